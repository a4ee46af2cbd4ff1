//! Command-line driver behind the `coded-pir` binary.
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration or
//! precondition failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audit::{
    achieved_rate, closed_form_rate, collusion_view_ranks, full_privacy_sweep, maximal_collusion_sets,
    multifile_capacity_bound, BoundCase, PrivacyAudit, RateReport, RunReport, REPORT_SCHEMA_VERSION,
};
use crate::field::Seed;
use crate::pattern::{family_eval, k_subsets, optimize_family, BlockFamily, CollusionPattern, FamilyEval};
use crate::plan::{build_plan, QueryPlan, SchemeParams, Variant};
use crate::rational::Rational;
use crate::reconstruct::reconstruct;
use crate::storage::{run_session, Adversary, Database, StorageCode};

const DATABASE_SEED: u64 = 3;
const ADVERSARY_SEED: u64 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Config(_) => 2,
        }
    }
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "coded-pir", version, about = "PIR schemes over MDS-coded storage")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the closed-form rate.
    Rate(RunArgs),
    /// Dump the query plan as JSON.
    Build(RunArgs),
    /// Run sessions against a random database and check exact recovery.
    Simulate(SimulateArgs),
    /// Rank-level privacy audit over the collusion sets.
    Audit(AuditArgs),
    /// Search for the block family with the smallest Δ/b.
    PatternOpt(PatternOptArgs),
    /// Multi-file capacity bounds next to the scheme rate.
    Bounds(BoundsArgs),
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    serde_json::from_value(serde_json::Value::String(s.to_ascii_lowercase()))
        .map_err(|_| format!("unknown variant {s:?} (prototype, robust, byzantine, multi-file, pattern)"))
}

/// Scheme and adversary settings, from flags or a JSON config file.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[arg(long, value_parser = parse_variant)]
    pub variant: Option<Variant>,
    /// Servers.
    #[arg(long)]
    pub n: Option<usize>,
    /// Code dimension.
    #[arg(long)]
    pub k: Option<usize>,
    /// Collusion size.
    #[arg(long)]
    pub t: Option<usize>,
    /// Files.
    #[arg(long)]
    pub m: Option<usize>,
    /// Robust (non-responding) servers.
    #[arg(long)]
    pub s: Option<usize>,
    /// Byzantine servers.
    #[arg(long)]
    pub b: Option<usize>,
    /// Desired files for multi-file retrieval.
    #[arg(long)]
    pub p: Option<usize>,
    /// Desired file indices; defaults to 0..P.
    #[arg(long, value_delimiter = ',')]
    pub desired: Option<Vec<usize>>,
    /// Collusion pattern JSON.
    #[arg(long)]
    pub pattern: Option<PathBuf>,
    /// Block family JSON; optimized from the pattern when absent.
    #[arg(long)]
    pub family: Option<PathBuf>,
    #[arg(long)]
    pub modulus: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Servers that do not respond.
    #[arg(long, value_delimiter = ',')]
    pub absent: Option<Vec<usize>>,
    /// Servers that corrupt their answers.
    #[arg(long, value_delimiter = ',')]
    pub corrupt: Option<Vec<usize>>,
}

macro_rules! merge_fields {
    ($a:expr, $b:expr, $($f:ident),*) => {
        RunConfig { $($f: $a.$f.or($b.$f)),* }
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        let dir = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.pattern, &mut cfg.family].into_iter().flatten() {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
        Ok(cfg)
    }

    /// Flags win over the file.
    pub fn or(self, file: RunConfig) -> RunConfig {
        merge_fields!(
            self, file, variant, n, k, t, m, s, b, p, desired, pattern, family, modulus, seed, absent, corrupt
        )
    }

    pub fn to_params(&self) -> Result<SchemeParams, CliError> {
        let variant = self.variant.ok_or_else(|| config_err("--variant is required"))?;
        let need = |v: Option<usize>, flag: &str| {
            v.ok_or_else(|| config_err(format!("--{flag} is required for {}", variant.name())))
        };
        let mut params = match variant {
            Variant::Pattern => {
                let path = self.pattern.as_ref().ok_or_else(|| config_err("--pattern is required for pattern"))?;
                let pattern = CollusionPattern::from_json(&read(path)?).map_err(config_err)?;
                let family = match &self.family {
                    Some(fp) => BlockFamily::from_json(&read(fp)?).map_err(config_err)?,
                    None => optimize_family(&pattern, need(self.k, "k")?, usize::MAX).map_err(config_err)?.0,
                };
                if let Some(n) = self.n.filter(|&n| n != pattern.n_servers()) {
                    return Err(config_err(format!(
                        "--n {n} disagrees with the pattern's {} servers",
                        pattern.n_servers()
                    )));
                }
                SchemeParams::pattern(pattern, family, need(self.m, "m")?)
            }
            _ => {
                let (n, k, t, m) = (need(self.n, "n")?, need(self.k, "k")?, need(self.t, "t")?, need(self.m, "m")?);
                match variant {
                    Variant::Prototype => SchemeParams::prototype(n, k, t, m),
                    Variant::Robust => SchemeParams::robust(n, need(self.s, "s")?, k, t, m),
                    Variant::Byzantine => SchemeParams::byzantine(n, need(self.b, "b")?, k, t, m),
                    _ => SchemeParams::multi_file(n, k, t, m, need(self.p, "p")?),
                }
            }
        };
        if let Some(d) = &self.desired {
            params = params.with_desired(d.clone());
        }
        if let Some(q) = self.modulus {
            params = params.with_modulus(q);
        }
        Ok(params.with_seed(Seed(self.seed.unwrap_or(0))))
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub scheme: RunConfig,
    /// Write the JSON report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig, CliError> {
        match &self.config {
            Some(path) => Ok(self.scheme.clone().or(RunConfig::load(path)?)),
            None => Ok(self.scheme.clone()),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Try every admissible placement of the robust or Byzantine servers.
    #[arg(long)]
    pub sweep_adversaries: bool,
    /// Corruption seeds per Byzantine placement when sweeping.
    #[arg(long, default_value_t = 1)]
    pub corruption_seeds: u64,
}

#[derive(Debug, Clone, Args)]
pub struct AuditArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Also audit every server pair outside the maximal collusion sets.
    #[arg(long)]
    pub all_pairs: bool,
}

#[derive(Debug, Clone, Args)]
pub struct PatternOptArgs {
    #[arg(long)]
    pub pattern: PathBuf,
    #[arg(long)]
    pub k: usize,
    /// File count used for the reported rate.
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    #[arg(long)]
    pub max_blocks: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub t: usize,
    #[arg(long)]
    pub m: usize,
    /// Single P; all of 1..=M otherwise.
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let stdout = std::io::stdout();
    match run(cli.command, &mut stdout.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn run(command: Command, out: &mut impl Write) -> Result<(), CliError> {
    match command {
        Command::Rate(args) => cmd_rate(&args, out),
        Command::Build(args) => cmd_build(&args, out),
        Command::Simulate(args) => cmd_simulate(&args, out),
        Command::Audit(args) => cmd_audit(&args, out),
        Command::PatternOpt(args) => cmd_pattern_opt(&args, out),
        Command::Bounds(args) => cmd_bounds(&args, out),
    }
}

fn emit(out: &mut impl Write, line: impl std::fmt::Display) -> Result<(), CliError> {
    writeln!(out, "{line}").map_err(config_err)
}

fn to_json(value: &impl Serialize) -> String {
    serde_json::to_string_pretty(value).expect("report serializes")
}

fn write_report(path: Option<&Path>, json: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, format!("{json}\n")).map_err(|e| config_err(format!("{}: {e}", p.display()))),
        None => Ok(()),
    }
}

fn build(params: &SchemeParams) -> Result<QueryPlan, CliError> {
    build_plan(params).map_err(config_err)
}

#[derive(Serialize)]
struct RateDoc<'a> {
    schema_version: u32,
    params: &'a SchemeParams,
    closed_form: Rational,
    decimal: f64,
}

pub fn cmd_rate(args: &RunArgs, out: &mut impl Write) -> Result<(), CliError> {
    let params = args.config()?.to_params()?;
    let rate = closed_form_rate(&params).map_err(config_err)?;
    emit(out, format!("variant  {}", params.variant.name()))?;
    emit(out, format!("rate     {rate}"))?;
    emit(out, format!("decimal  {:.6}", rate.to_f64()))?;
    let doc =
        RateDoc { schema_version: REPORT_SCHEMA_VERSION, params: &params, decimal: rate.to_f64(), closed_form: rate };
    write_report(args.out.as_deref(), &to_json(&doc))
}

pub fn cmd_build(args: &RunArgs, out: &mut impl Write) -> Result<(), CliError> {
    let plan = build(&args.config()?.to_params()?)?;
    let json = plan.to_json();
    match &args.out {
        Some(_) => write_report(args.out.as_deref(), &json),
        None => emit(out, json),
    }
}

/// One adversary placement tried by `simulate`.
#[derive(Debug, Clone, Serialize)]
pub struct PlacementOutcome {
    pub absent: Vec<usize>,
    pub corrupt: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corruption_seed: Option<u64>,
    pub recovered: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub achieved: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Serialize)]
struct SimulateReport {
    #[serde(flatten)]
    report: RunReport,
    placements: Vec<PlacementOutcome>,
}

fn placements(
    params: &SchemeParams,
    cfg: &RunConfig,
    sweep: bool,
    seeds: u64,
) -> Vec<(Vec<usize>, Vec<usize>, Option<u64>)> {
    let n = params.n_servers;
    if sweep {
        return match params.variant {
            Variant::Robust => k_subsets(n, params.robust).into_iter().map(|a| (a, vec![], None)).collect(),
            Variant::Byzantine => k_subsets(n, params.byzantine)
                .into_iter()
                .flat_map(|c| (0..seeds).map(move |s| (vec![], c.clone(), Some(s))))
                .collect(),
            _ => vec![(vec![], vec![], None)],
        };
    }
    let absent = cfg.absent.clone().unwrap_or_else(|| match params.variant {
        Variant::Robust => (0..params.robust).collect(),
        _ => vec![],
    });
    let corrupt = cfg.corrupt.clone().unwrap_or_else(|| match params.variant {
        Variant::Byzantine => (0..params.byzantine).collect(),
        _ => vec![],
    });
    let seed = (!corrupt.is_empty()).then_some(0);
    vec![(absent, corrupt, seed)]
}

pub fn cmd_simulate(args: &SimulateArgs, out: &mut impl Write) -> Result<(), CliError> {
    let cfg = args.run.config()?;
    let params = cfg.to_params()?;
    let closed_form = closed_form_rate(&params).map_err(config_err)?;
    let plan = build(&params)?;
    let f = plan.field();
    let code = StorageCode::reed_solomon(&f, params.n_servers, params.code_dim).map_err(config_err)?;
    let db = Database::random(&f, params.n_files, plan.l_rows, params.code_dim, params.seed.child(DATABASE_SEED));
    let mut outcomes = Vec::new();
    for (absent, corrupt, cseed) in placements(&params, &cfg, args.sweep_adversaries, args.corruption_seeds) {
        let mut adversary =
            Adversary::corrupting(corrupt.iter().copied(), params.seed.child(ADVERSARY_SEED).child(cseed.unwrap_or(0)));
        adversary.robust = absent.iter().copied().collect();
        let transcript = run_session(&plan, &db, &code, &adversary).map_err(config_err)?;
        let achieved = achieved_rate(&plan, &transcript);
        let (recovered, error) = match reconstruct(&plan, &transcript, &code) {
            Ok(files) => {
                let exact = files.iter().all(|(&m, w)| *w == db.files[m]);
                (exact, (!exact).then(|| "recovered data differs from the database".to_string()))
            }
            Err(e) => (false, Some(e.to_string())),
        };
        outcomes.push(PlacementOutcome {
            absent,
            corrupt,
            corruption_seed: cseed,
            recovered,
            achieved: Some(achieved),
            error,
        });
    }
    let recovered = outcomes.iter().filter(|o| o.recovered).count();
    let achieved = outcomes[0].achieved.clone().expect("set above");
    let rates_agree = outcomes.iter().all(|o| o.achieved.as_ref() == Some(&closed_form));
    emit(out, format!("variant      {}", params.variant.name()))?;
    emit(out, format!("placements   {recovered}/{} recovered exactly", outcomes.len()))?;
    emit(out, format!("achieved     {achieved}"))?;
    emit(out, format!("closed form  {closed_form}"))?;
    for o in outcomes.iter().filter(|o| !o.recovered) {
        emit(
            out,
            format!("failed       absent={:?} corrupt={:?}: {}", o.absent, o.corrupt, o.error.as_deref().unwrap_or("")),
        )?;
    }
    let mut rate = RateReport::new(achieved, closed_form);
    rate.matches = rates_agree;
    let report = SimulateReport {
        report: RunReport { schema_version: REPORT_SCHEMA_VERSION, params, audits: None, rate: Some(rate) },
        placements: outcomes,
    };
    write_report(args.run.out.as_deref(), &to_json(&report))?;
    if recovered != report.placements.len() {
        return Err(CliError::Verification(format!(
            "{} of {} placements failed to recover",
            report.placements.len() - recovered,
            report.placements.len()
        )));
    }
    if !rates_agree {
        return Err(CliError::Verification("achieved rate differs from the closed form".into()));
    }
    Ok(())
}

#[derive(Serialize)]
struct AuditReport {
    #[serde(flatten)]
    report: RunReport,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    outside_pattern: Vec<PrivacyAudit>,
}

fn show_audit(a: &PrivacyAudit) -> String {
    let verdict = if a.pass { "pass" } else { "FAIL" };
    format!("{:?}  ranks {:?}  expected {}  {verdict}", a.collusion_set, a.per_file_rank, a.expected_rank)
}

pub fn cmd_audit(args: &AuditArgs, out: &mut impl Write) -> Result<(), CliError> {
    let params = args.run.config()?.to_params()?;
    let plan = build(&params)?;
    let sweep = full_privacy_sweep(&plan);
    emit(out, format!("variant  {}  L = {}", params.variant.name(), plan.l_rows))?;
    for a in &sweep.audits {
        emit(out, show_audit(a))?;
    }
    let mut outside = Vec::new();
    if args.all_pairs {
        let maximal = maximal_collusion_sets(&plan);
        for pair in k_subsets(plan.n_servers(), 2) {
            if maximal.iter().any(|s| pair.iter().all(|x| s.contains(x))) {
                continue;
            }
            let audit = collusion_view_ranks(&plan, &pair);
            emit(out, format!("{}  (outside pattern)", show_audit(&audit)))?;
            if !audit.pass {
                eprintln!("warning: servers {:?} are not a collusion set and their view differs across files", pair);
            }
            outside.push(audit);
        }
    }
    emit(out, format!("overall  {}", if sweep.pass { "pass" } else { "FAIL" }))?;
    let pass = sweep.pass;
    let report = AuditReport {
        report: RunReport { schema_version: REPORT_SCHEMA_VERSION, params, audits: Some(sweep), rate: None },
        outside_pattern: outside,
    };
    write_report(args.run.out.as_deref(), &to_json(&report))?;
    if pass {
        Ok(())
    } else {
        Err(CliError::Verification("privacy audit failed".into()))
    }
}

#[derive(Serialize)]
struct FamilyReport {
    schema_version: u32,
    family: BlockFamily,
    #[serde(flatten)]
    eval: FamilyEval,
    m: usize,
    rate: Rational,
}

pub fn cmd_pattern_opt(args: &PatternOptArgs, out: &mut impl Write) -> Result<(), CliError> {
    let pattern = CollusionPattern::from_json(&read(&args.pattern)?).map_err(config_err)?;
    let (family, eval) =
        optimize_family(&pattern, args.k, args.max_blocks.unwrap_or(usize::MAX)).map_err(config_err)?;
    debug_assert_eq!(family_eval(&pattern, &family), eval);
    let params = SchemeParams::pattern(pattern, family.clone(), args.m);
    let rate = closed_form_rate(&params).map_err(config_err)?;
    let report = FamilyReport { schema_version: REPORT_SCHEMA_VERSION, family, eval, m: args.m, rate };
    let json = to_json(&report);
    match &args.out {
        Some(_) => {
            emit(
                out,
                format!(
                    "b = {}  Δ = {}  ratio {}  rate {}",
                    report.eval.b, report.eval.delta, report.eval.ratio, report.rate
                ),
            )?;
            write_report(args.out.as_deref(), &json)
        }
        None => emit(out, json),
    }
}

#[derive(Serialize)]
struct BoundRow {
    p: usize,
    case: BoundCase,
    bound: Rational,
    #[serde(skip_serializing_if = "Option::is_none")]
    scheme_rate: Option<Rational>,
}

pub fn cmd_bounds(args: &BoundsArgs, out: &mut impl Write) -> Result<(), CliError> {
    let (case, other) = match (args.k, args.t) {
        (1, t) => (BoundCase::K1, t),
        (k, 1) => (BoundCase::T1, k),
        _ => return Err(config_err("capacity bounds need K = 1 or T = 1")),
    };
    let ps: Vec<usize> = match args.p {
        Some(p) => vec![p],
        None => (1..=args.m).collect(),
    };
    emit(out, format!("{:>3}  {:>16}  {:>16}", "P", "bound", "scheme"))?;
    let mut rows = Vec::new();
    for p in ps {
        let bound = multifile_capacity_bound(args.n, other, args.m, p, case).map_err(config_err)?;
        let scheme_rate = closed_form_rate(&SchemeParams::multi_file(args.n, args.k, args.t, args.m, p)).ok();
        let shown = scheme_rate.as_ref().map_or("-".to_string(), Rational::to_string);
        emit(out, format!("{p:>3}  {:>16}  {shown:>16}", bound.to_string()))?;
        rows.push(BoundRow { p, case, bound, scheme_rate });
    }
    #[derive(Serialize)]
    struct BoundsDoc {
        schema_version: u32,
        n: usize,
        k: usize,
        t: usize,
        m: usize,
        rows: Vec<BoundRow>,
    }
    let doc = BoundsDoc { schema_version: REPORT_SCHEMA_VERSION, n: args.n, k: args.k, t: args.t, m: args.m, rows };
    write_report(args.out.as_deref(), &to_json(&doc))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Command {
        Cli::try_parse_from(std::iter::once("coded-pir").chain(args.iter().copied())).unwrap().command
    }

    fn run_capture(args: &[&str]) -> (Result<(), CliError>, String) {
        let mut buf = Vec::new();
        let r = run(parse(args), &mut buf);
        (r, String::from_utf8(buf).unwrap())
    }

    #[test]
    fn rate_prints_fraction() {
        let (r, text) =
            run_capture(&["rate", "--variant", "prototype", "--n", "4", "--k", "2", "--t", "2", "--m", "3"]);
        r.unwrap();
        assert!(text.contains("36/91"));
        let (r, text) = run_capture(&[
            "rate",
            "--variant",
            "byzantine",
            "--n",
            "8",
            "--b",
            "1",
            "--k",
            "2",
            "--t",
            "2",
            "--m",
            "2",
        ]);
        r.unwrap();
        assert!(text.contains("7/27"));
    }

    #[test]
    fn precondition_is_a_config_error() {
        let (r, _) =
            run_capture(&["rate", "--variant", "robust", "--n", "4", "--s", "2", "--k", "2", "--t", "2", "--m", "2"]);
        let err = r.unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("C(N−S,K) > C(N,K) − C(N−T,K)"));
    }

    #[test]
    fn flags_override_config_file() {
        let file = RunConfig {
            variant: Some(Variant::Prototype),
            n: Some(4),
            k: Some(2),
            t: Some(2),
            m: Some(3),
            ..Default::default()
        };
        let flags = RunConfig { m: Some(2), ..Default::default() };
        let merged = flags.or(file);
        assert_eq!(merged.m, Some(2));
        assert_eq!(merged.n, Some(4));
    }

    #[test]
    fn variant_names_parse() {
        assert_eq!(parse_variant("multi-file"), Ok(Variant::MultiFile));
        assert_eq!(parse_variant("MultiFile"), Ok(Variant::MultiFile));
        assert!(parse_variant("hybrid").is_err());
    }

    #[test]
    fn sweep_placements_enumerate_choices() {
        let robust = SchemeParams::robust(6, 1, 2, 2, 2);
        assert_eq!(placements(&robust, &RunConfig::default(), true, 1).len(), 6);
        let byz = SchemeParams::byzantine(8, 1, 2, 2, 2);
        assert_eq!(placements(&byz, &RunConfig::default(), true, 20).len(), 160);
        let single = placements(&byz, &RunConfig::default(), false, 1);
        assert_eq!(single, vec![(vec![], vec![0], Some(0))]);
    }

    #[test]
    fn bounds_require_a_degenerate_parameter() {
        let (r, _) = run_capture(&["bounds", "--n", "5", "--k", "2", "--t", "2", "--m", "3"]);
        assert_eq!(r.unwrap_err().exit_code(), 2);
        let (r, text) = run_capture(&["bounds", "--n", "4", "--k", "1", "--t", "2", "--m", "3", "--p", "2"]);
        r.unwrap();
        assert!(text.contains("4/5"));
    }
}
