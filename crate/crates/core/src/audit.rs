//! Rank-level privacy audits and exact rate accounting.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::pattern::k_subsets;
use crate::plan::{PlanError, QueryPlan, SchemeParams, Variant};
use crate::rational::{binomial, Rational};
use crate::storage::Transcript;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Ranks of the atom coefficient rows a server set observes, per file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrivacyAudit {
    pub collusion_set: Vec<usize>,
    pub per_file_rank: Vec<usize>,
    pub expected_rank: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrivacySweep {
    pub audits: Vec<PrivacyAudit>,
    pub pass: bool,
}

impl PrivacySweep {
    fn from_audits(audits: Vec<PrivacyAudit>) -> Self {
        let pass = audits.iter().all(|a| a.pass);
        Self { audits, pass }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RateReport {
    pub achieved: Rational,
    pub closed_form: Rational,
    #[serde(rename = "match")]
    pub matches: bool,
}

impl RateReport {
    pub fn new(achieved: Rational, closed_form: Rational) -> Self {
        let matches = achieved == closed_form;
        Self { achieved, closed_form, matches }
    }
}

/// Top-level JSON document written by the CLI.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub params: SchemeParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub audits: Option<PrivacySweep>,
    #[serde(flatten, skip_serializing_if = "Option::is_none")]
    pub rate: Option<RateReport>,
}

/// Number of family blocks (symbols) holding at least one of `servers`.
fn hits(plan: &QueryPlan, servers: &BTreeSet<usize>) -> usize {
    (0..plan.b).filter(|&s| plan.array.servers_of(s).iter().any(|n| servers.contains(n))).count()
}

pub fn expected_view_rank(plan: &QueryPlan, servers: &[usize]) -> usize {
    let set: BTreeSet<usize> = servers.iter().copied().collect();
    let per_symbol = match plan.variant() {
        Variant::MultiFile => plan.ab.alpha + plan.ab.beta,
        _ => (plan.ab.alpha + plan.ab.beta).pow(plan.n_files() as u32 - 1),
    };
    per_symbol as usize * hits(plan, &set)
}

pub fn collusion_view_ranks(plan: &QueryPlan, servers: &[usize]) -> PrivacyAudit {
    let f = plan.field();
    let mut visible: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); plan.n_files()];
    for &server in servers.iter().filter(|&&n| n < plan.n_servers()) {
        for q in &plan.queries[server] {
            let block = &plan.blocks[q.block];
            for &file in &block.label {
                visible[file].insert(block.atom(file, q.symbol).expect("file in label"));
            }
        }
    }
    let per_file_rank: Vec<usize> = visible
        .iter()
        .enumerate()
        .map(|(file, rows)| {
            let idx: Vec<usize> = rows.iter().copied().collect();
            f.rank(&plan.atom_coeffs[file].select_rows(&idx))
        })
        .collect();
    let expected_rank = expected_view_rank(plan, servers);
    let pass = per_file_rank.iter().all(|&r| r == expected_rank);
    let mut collusion_set = servers.to_vec();
    collusion_set.sort_unstable();
    PrivacyAudit { collusion_set, per_file_rank, expected_rank, pass }
}

/// Maximal collusion sets the plan is designed against.
pub fn maximal_collusion_sets(plan: &QueryPlan) -> Vec<Vec<usize>> {
    match (&plan.params.pattern, plan.variant()) {
        (Some(pattern), Variant::Pattern) => pattern.maximal_sets().to_vec(),
        _ => k_subsets(plan.n_servers(), plan.params.collusion_size),
    }
}

pub fn privacy_sweep(plan: &QueryPlan, sets: &[Vec<usize>]) -> PrivacySweep {
    PrivacySweep::from_audits(sets.par_iter().map(|s| collusion_view_ranks(plan, s)).collect())
}

pub fn full_privacy_sweep(plan: &QueryPlan) -> PrivacySweep {
    privacy_sweep(plan, &maximal_collusion_sets(plan))
}

pub fn achieved_rate(plan: &QueryPlan, transcript: &Transcript) -> Rational {
    let retrieved = plan.params.p_desired() as u128 * plan.l_rows as u128 * plan.params.code_dim as u128;
    Rational::new(retrieved, u128::from(transcript.downloaded_symbols))
}

fn c(n: usize, k: usize) -> Rational {
    Rational::integer(binomial(n as u64, k as u64))
}

/// `(1 + r + … + r^{m−1})^{-1}`
pub fn geometric_rate(r: &Rational, m: usize) -> Rational {
    let mut sum = Rational::zero();
    let mut term = Rational::one();
    for _ in 0..m {
        sum = &sum + &term;
        term = &term * r;
    }
    sum.recip()
}

pub fn closed_form_rate(params: &SchemeParams) -> Result<Rational, PlanError> {
    let shape = params.shape()?;
    let (n, k, t, m) = (params.n_servers, params.code_dim, params.collusion_size, params.n_files);
    let seen = || &c(n, k) - &c(n - t, k);
    Ok(match params.variant {
        Variant::Prototype => geometric_rate(&(&seen() / &c(n, k)), m),
        Variant::Robust => {
            let s = params.robust;
            let pre = &c(n - s - 1, k - 1) / &c(n - 1, k - 1);
            &pre * &geometric_rate(&(&seen() / &c(n - s, k)), m)
        }
        Variant::Byzantine => {
            let b = params.byzantine;
            let kept = &(&c(n - b, k) * &Rational::integer(2)) - &c(n, k);
            let pre = &kept / &c(n, k);
            &pre * &geometric_rate(&(&seen() / &kept), m)
        }
        Variant::MultiFile => {
            let ratio = Rational::new(m as u64, params.p_desired() as u64);
            &c(n, k) / &(&(&ratio * &seen()) + &c(n - t, k))
        }
        Variant::Pattern => geometric_rate(&Rational::new(shape.delta as u64, shape.b as u64), m),
    })
}

/// Which parameter is degenerate in a capacity bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundCase {
    /// `K = 1`; the other parameter is `T`.
    K1,
    /// `T = 1`; the other parameter is `K`.
    T1,
}

/// Upper bound on the P-file capacity when K = 1 or T = 1. `other` is the
/// parameter that is not one; both cases reduce to the same expression in
/// `other / N`.
pub fn multifile_capacity_bound(
    n: usize,
    other: usize,
    m: usize,
    p: usize,
    _case: BoundCase,
) -> Result<Rational, PlanError> {
    if p == 0 || m < p || n == 0 {
        return Err(PlanError::PreconditionViolated(format!("1 ≤ P ≤ M and N ≥ 1 (N={n}, M={m}, P={p})")));
    }
    let r = Rational::new(other as u64, n as u64);
    let rounds = m / p;
    let head = geometric_rate(&r, rounds).recip();
    let tail = &Rational::new((m - p * rounds) as u64, p as u64) * &r.pow(rounds as u32);
    Ok((&head + &tail).recip())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NaiveComparison {
    pub adapted: Rational,
    pub naive: Rational,
    pub better: bool,
}

/// Joint multi-file rate against running one single-file scheme per desired
/// file, counting the free rows of other desired files.
pub fn naive_comparison(params: &SchemeParams) -> Result<NaiveComparison, PlanError> {
    if params.variant != Variant::MultiFile {
        return Err(PlanError::PreconditionViolated("naive comparison needs the multi-file variant".into()));
    }
    let adapted = closed_form_rate(params)?;
    let (n, k, t, m, p) =
        (params.n_servers, params.code_dim, params.collusion_size, params.n_files, params.p_desired());
    let r = &Rational::one() - &(&c(n - t, k) / &c(n, k));
    let extra = &r.pow(m as u32 - 1) * &Rational::integer(p as u64 - 1);
    let naive = &(&Rational::one() + &extra) * &geometric_rate(&r, m);
    let better = adapted > naive;
    Ok(NaiveComparison { adapted, naive, better })
}
