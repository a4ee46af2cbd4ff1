//! Deterministic query plans for the five schemes.
//!
//! A plan fixes the sub-packetization L, the block table, the grouping of
//! blocks for interference elimination, and the coefficient row (in F^L) of
//! every atom of every file. Files and servers are 0-based.
//!
//! Standard variants (Prototype, Robust, Byzantine, Pattern) share one layout:
//!
//! * a family of b symbols (K-subsets of servers), Δ = number of symbols met
//!   by the worst collusion set, and a desired-block dimension x
//!   (b, C(N-S,K), 2C(N-B,K)-C(N,K), b respectively);
//! * α/β with αx = (α+β)Δ and L = x(α+β)^(M-1);
//! * α^(M-|D|) β^(|D|-1) blocks per nonempty label D, labels ordered by size
//!   (largest first) then lexicographically, so the table does not depend on
//!   the desired file;
//! * per label D without the desired file d, groups of α blocks labelled D
//!   and β labelled D ∪ {d}. In a group the atoms of each m ∈ D form one
//!   codeword of the ((α+β)b, αx) group code, mixed blocks first.
//!
//! MultiFile has Mα singleton blocks and Pβ blocks mixing every file through
//! the rows of a P x M Reed-Solomon matrix.

use std::collections::BTreeMap;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{FieldError, FieldRng, Matrix, PrimeField, Seed, DEFAULT_MODULUS};
use crate::pattern::{family_eval, BlockFamily, CollusionPattern};
use crate::rational::binomial;
use crate::rs::{CodeError, RsCode};

pub const PLAN_SCHEMA_VERSION: u32 = 1;

/// Upper limit on L accepted by [`build_plan`]; masks are dense L x L.
pub const MAX_ROWS: usize = 4096;

const MASK_SEED: u64 = 1;
const MIX_SEED: u64 = 2;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("infeasible ratio: need 0 < {y} < {x}")]
    InfeasibleRatio { x: u64, y: u64 },
    #[error("field too small: a code of length {length} needs modulus > {length}, have {modulus}")]
    FieldTooSmall { length: u64, modulus: u64 },
    #[error("plan too large: L = {l_rows} exceeds {MAX_ROWS}")]
    TooLarge { l_rows: u128 },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Code(#[from] CodeError),
}

fn violated(msg: impl Into<String>) -> PlanError {
    PlanError::PreconditionViolated(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Prototype,
    Robust,
    Byzantine,
    #[serde(alias = "multifile")]
    MultiFile,
    Pattern,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Prototype => "prototype",
            Variant::Robust => "robust",
            Variant::Byzantine => "byzantine",
            Variant::MultiFile => "multi-file",
            Variant::Pattern => "pattern",
        }
    }
}

fn default_modulus() -> u64 {
    DEFAULT_MODULUS
}

/// Scheme parameters. `collusion_size` is ignored for Pattern, `robust`
/// outside Robust and `byzantine` outside Byzantine.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeParams {
    pub variant: Variant,
    pub n_servers: usize,
    pub code_dim: usize,
    #[serde(default)]
    pub collusion_size: usize,
    pub n_files: usize,
    pub desired: Vec<usize>,
    #[serde(default)]
    pub robust: usize,
    #[serde(default)]
    pub byzantine: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern: Option<CollusionPattern>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<BlockFamily>,
    #[serde(default = "default_modulus")]
    pub modulus: u64,
    #[serde(default)]
    pub seed: Seed,
}

impl SchemeParams {
    fn base(variant: Variant, n: usize, k: usize, t: usize, m: usize) -> Self {
        Self {
            variant,
            n_servers: n,
            code_dim: k,
            collusion_size: t,
            n_files: m,
            desired: vec![0],
            robust: 0,
            byzantine: 0,
            pattern: None,
            family: None,
            modulus: DEFAULT_MODULUS,
            seed: Seed::default(),
        }
    }

    pub fn prototype(n: usize, k: usize, t: usize, m: usize) -> Self {
        Self::base(Variant::Prototype, n, k, t, m)
    }

    pub fn robust(n: usize, s: usize, k: usize, t: usize, m: usize) -> Self {
        Self { robust: s, ..Self::base(Variant::Robust, n, k, t, m) }
    }

    pub fn byzantine(n: usize, b: usize, k: usize, t: usize, m: usize) -> Self {
        Self { byzantine: b, ..Self::base(Variant::Byzantine, n, k, t, m) }
    }

    /// Retrieves files `0..p`.
    pub fn multi_file(n: usize, k: usize, t: usize, m: usize, p: usize) -> Self {
        Self { desired: (0..p).collect(), ..Self::base(Variant::MultiFile, n, k, t, m) }
    }

    pub fn pattern(pattern: CollusionPattern, family: BlockFamily, m: usize) -> Self {
        let n = pattern.n_servers();
        let t = pattern.max_size();
        Self {
            pattern: Some(pattern),
            code_dim: family.k(),
            family: Some(family),
            ..Self::base(Variant::Pattern, n, 0, t, m)
        }
    }

    pub fn with_desired(mut self, desired: Vec<usize>) -> Self {
        self.desired = desired;
        self
    }

    pub fn with_seed(mut self, seed: Seed) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_modulus(mut self, modulus: u64) -> Self {
        self.modulus = modulus;
        self
    }

    pub fn p_desired(&self) -> usize {
        self.desired.len()
    }

    /// Checks the variant preconditions and derives the layout sizes.
    pub fn shape(&self) -> Result<Shape, PlanError> {
        let (n, k, t, m) = (self.n_servers, self.code_dim, self.collusion_size, self.n_files);
        if m == 0 {
            return Err(violated("M ≥ 1"));
        }
        if k == 0 || k > n {
            return Err(violated(format!("1 ≤ K ≤ N (K={k}, N={n})")));
        }
        self.check_desired()?;
        let c = |a: usize, b: usize| binomial(a as u64, b as u64);
        let (family, delta, x) = match self.variant {
            Variant::Pattern => {
                let (pattern, family) = match (&self.pattern, &self.family) {
                    (Some(p), Some(f)) => (p, f),
                    _ => return Err(violated("pattern variant needs a collusion pattern and a block family")),
                };
                if pattern.n_servers() != n || family.implied_servers() > n {
                    return Err(violated(format!("pattern and family must live on the N={n} servers")));
                }
                if family.k() != k {
                    return Err(violated(format!("family blocks must have size K={k}")));
                }
                let eval = family_eval(pattern, family);
                if eval.delta == 0 {
                    return Err(violated("Δ ≥ 1: some collusion set must meet a family block"));
                }
                if eval.b <= eval.delta {
                    return Err(violated(format!("b > Δ (b={}, Δ={})", eval.b, eval.delta)));
                }
                (family.clone(), eval.delta as u128, eval.b as i128)
            }
            variant => {
                if t == 0 {
                    return Err(violated("T ≥ 1"));
                }
                if t + k > n {
                    return Err(violated(format!("T + K ≤ N (T={t}, K={k}, N={n})")));
                }
                let all = c(n, k);
                let delta = all - c(n - t, k);
                let x = match variant {
                    Variant::Robust => {
                        let s = self.robust;
                        let x = if s <= n { c(n - s, k) } else { 0 };
                        if x <= delta {
                            return Err(violated(format!(
                                "C(N−S,K) > C(N,K) − C(N−T,K) ({x} ≤ {delta} at N={n}, S={s}, K={k}, T={t})"
                            )));
                        }
                        x as i128
                    }
                    Variant::Byzantine => {
                        let b = self.byzantine;
                        let x = if b <= n { 2 * c(n - b, k) as i128 - all as i128 } else { -1 };
                        if x <= delta as i128 {
                            return Err(violated(format!(
                                "2·C(N−B,K) − C(N,K) > C(N,K) − C(N−T,K) ({x} ≤ {delta} at N={n}, B={b}, K={k}, T={t})"
                            )));
                        }
                        x
                    }
                    _ => all as i128,
                };
                (BlockFamily::all_subsets(n, k), delta, x)
            }
        };
        let b = family.len();
        let x = x as u64;
        let ab = compute_alpha_beta(x, delta as u64)?;
        let l_rows: u128 = match self.variant {
            Variant::MultiFile => u128::from(ab.alpha + ab.beta) * b as u128,
            _ => u128::from(ab.alpha + ab.beta)
                .checked_pow(m as u32 - 1)
                .and_then(|v| v.checked_mul(u128::from(x)))
                .unwrap_or(u128::MAX),
        };
        Ok(Shape { family, b, delta: delta as usize, x: x as usize, ab, l_rows })
    }

    fn check_desired(&self) -> Result<(), PlanError> {
        let m = self.n_files;
        if let Some(&bad) = self.desired.iter().find(|&&d| d >= m) {
            return Err(violated(format!("desired file {bad} out of range for M={m}")));
        }
        let mut sorted = self.desired.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.desired.len() || sorted.is_empty() {
            return Err(violated("desired files must be nonempty and distinct"));
        }
        match self.variant {
            Variant::MultiFile if 2 * sorted.len() < m => Err(violated(format!("2P ≥ M (P={}, M={m})", sorted.len()))),
            Variant::MultiFile => Ok(()),
            _ if sorted.len() != 1 => Err(violated("exactly one desired file outside multi-file")),
            _ => Ok(()),
        }
    }
}

/// Sizes derived from validated parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shape {
    pub family: BlockFamily,
    /// Symbols per block.
    pub b: usize,
    /// Symbols met by the worst collusion set.
    pub delta: usize,
    /// Dimension of the per-block desired code (b when it is the identity).
    pub x: usize,
    pub ab: AlphaBeta,
    pub l_rows: u128,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlphaBeta {
    pub alpha: u64,
    pub beta: u64,
}

/// Smallest positive α, β with αx = (α+β)y.
pub fn compute_alpha_beta(x: u64, y: u64) -> Result<AlphaBeta, PlanError> {
    if y == 0 || y >= x {
        return Err(PlanError::InfeasibleRatio { x, y });
    }
    let g = y.gcd(&(x - y));
    Ok(AlphaBeta { alpha: y / g, beta: (x - y) / g })
}

/// Per server, the symbols stored in that column, ordered by subset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AssistingArray {
    pub n_cols: usize,
    pub family: BlockFamily,
    pub layout: Vec<Vec<usize>>,
}

impl AssistingArray {
    pub fn n_symbols(&self) -> usize {
        self.family.len()
    }

    pub fn column(&self, server: usize) -> &[usize] {
        &self.layout[server]
    }

    /// The servers holding a symbol.
    pub fn servers_of(&self, symbol: usize) -> &[usize] {
        &self.family.blocks()[symbol]
    }
}

pub fn build_assisting_array(n: usize, family: &BlockFamily) -> AssistingArray {
    let mut layout: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut order: Vec<usize> = (0..family.len()).collect();
    order.sort_by(|&a, &b| family.blocks()[a].cmp(&family.blocks()[b]).then(a.cmp(&b)));
    for s in order {
        for &server in &family.blocks()[s] {
            if server < n {
                layout[server].push(s);
            }
        }
    }
    AssistingArray { n_cols: n, family: family.clone(), layout }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Block {
    /// Sorted files mixed in this block.
    pub label: Vec<usize>,
    /// `atom_base[i]` is the first atom of `label[i]` in this block; the atom
    /// for symbol s is `atom_base[i] + s`.
    pub atom_base: Vec<usize>,
    /// Row of the mixing matrix (MultiFile only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mix_row: Option<usize>,
}

impl Block {
    pub fn atom(&self, file: usize, symbol: usize) -> Option<usize> {
        let i = self.label.binary_search(&file).ok()?;
        Some(self.atom_base[i] + symbol)
    }
}

/// Rows `start..start+len` of a file's mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RowSlice {
    pub file: usize,
    pub start: usize,
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Group {
    pub base_label: Vec<usize>,
    pub pure_blocks: Vec<usize>,
    pub mixed_blocks: Vec<usize>,
    pub slices: Vec<RowSlice>,
}

impl Group {
    /// Blocks in group-code position order: mixed first, then pure.
    pub fn code_blocks(&self) -> impl Iterator<Item = usize> + '_ {
        self.mixed_blocks.iter().chain(&self.pure_blocks).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct QueryRef {
    pub block: usize,
    pub symbol: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct QueryPlan {
    pub schema_version: u32,
    pub params: SchemeParams,
    #[serde(flatten)]
    pub ab: AlphaBeta,
    pub l_rows: usize,
    /// Symbols per block.
    pub b: usize,
    pub delta: usize,
    /// Dimension of the per-block desired code.
    pub desired_dim: usize,
    pub array: AssistingArray,
    pub blocks: Vec<Block>,
    pub groups: Vec<Group>,
    /// Per file, one row in F^L per atom.
    pub atom_coeffs: Vec<Matrix>,
    /// Per server, the queries it answers in order.
    pub queries: Vec<Vec<QueryRef>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mix_matrix: Option<Matrix>,
    /// Per file, the L x L invertible mask the atoms are drawn from.
    #[serde(skip)]
    pub masks: Vec<Matrix>,
}

impl QueryPlan {
    pub fn field(&self) -> PrimeField {
        PrimeField::new(self.params.modulus).expect("modulus checked at build time")
    }

    pub fn variant(&self) -> Variant {
        self.params.variant
    }

    pub fn n_servers(&self) -> usize {
        self.params.n_servers
    }

    pub fn n_files(&self) -> usize {
        self.params.n_files
    }

    pub fn is_desired(&self, file: usize) -> bool {
        self.params.desired.contains(&file)
    }

    /// The (b, desired_dim) code of a desired block; `None` when it is the
    /// identity.
    pub fn desired_code(&self) -> Option<RsCode> {
        (self.desired_dim < self.b).then(|| {
            RsCode::transposed_generator(&self.field(), self.b, self.desired_dim).expect("checked at build time")
        })
    }

    /// The ((α+β)b, α·desired_dim) code linking a group's atoms.
    pub fn group_code(&self) -> RsCode {
        let len = (self.ab.alpha + self.ab.beta) as usize * self.b;
        let dim = self.ab.alpha as usize * self.desired_dim;
        RsCode::transposed_generator(&self.field(), len, dim).expect("checked at build time")
    }

    /// Coefficient of a file in a block's queries.
    pub fn mix_coeff(&self, block: &Block, file: usize) -> u64 {
        match (block.mix_row, &self.mix_matrix) {
            (Some(row), Some(h)) => h.get(row, file),
            _ => 1,
        }
    }

    /// The query as a vector over the M·L stacked file rows.
    pub fn query_vector(&self, q: QueryRef) -> Vec<u64> {
        let f = self.field();
        let l = self.l_rows;
        let block = &self.blocks[q.block];
        let mut v = vec![0; self.n_files() * l];
        for &file in &block.label {
            let atom = block.atom(file, q.symbol).expect("file in label");
            let c = self.mix_coeff(block, file);
            f.axpy(&mut v[file * l..(file + 1) * l], c, self.atom_coeffs[file].row(atom));
        }
        v
    }

    /// Number of queries each server receives.
    pub fn queries_per_server(&self) -> Vec<usize> {
        self.queries.iter().map(Vec::len).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plan serializes")
    }
}

/// Nonempty subsets of `0..m` ordered by size (largest first), then
/// lexicographically.
fn canonical_labels(m: usize) -> Vec<Vec<usize>> {
    (1..=m).rev().flat_map(|size| crate::pattern::k_subsets(m, size)).collect()
}

fn block_count(ab: AlphaBeta, m: usize, label_len: usize) -> u128 {
    u128::from(ab.alpha).pow((m - label_len) as u32) * u128::from(ab.beta).pow(label_len as u32 - 1)
}

pub fn build_plan(params: &SchemeParams) -> Result<QueryPlan, PlanError> {
    let shape = params.shape()?;
    if shape.l_rows > MAX_ROWS as u128 {
        return Err(PlanError::TooLarge { l_rows: shape.l_rows });
    }
    let f = PrimeField::new(params.modulus)?;
    let (alpha, beta) = (shape.ab.alpha as usize, shape.ab.beta as usize);
    let longest = [(alpha + beta) * shape.b, params.n_servers, params.n_files].into_iter().max().unwrap_or(0) as u64;
    if longest >= params.modulus {
        return Err(PlanError::FieldTooSmall { length: longest, modulus: params.modulus });
    }
    let l = shape.l_rows as usize;
    let masks: Vec<Matrix> =
        (0..params.n_files).map(|m| f.sample_invertible(l, params.seed.child(MASK_SEED).child(m as u64))).collect();
    let array = build_assisting_array(params.n_servers, &shape.family);
    let mut plan = QueryPlan {
        schema_version: PLAN_SCHEMA_VERSION,
        params: params.clone(),
        ab: shape.ab,
        l_rows: l,
        b: shape.b,
        delta: shape.delta,
        desired_dim: shape.x,
        array,
        blocks: Vec::new(),
        groups: Vec::new(),
        atom_coeffs: Vec::new(),
        queries: Vec::new(),
        mix_matrix: None,
        masks,
    };
    match params.variant {
        Variant::MultiFile => layout_multi_file(&f, &mut plan),
        _ => layout_standard(&f, &mut plan),
    }
    plan.queries = (0..params.n_servers)
        .map(|server| {
            let column = plan.array.column(server);
            (0..plan.blocks.len())
                .flat_map(|block| column.iter().map(move |&symbol| QueryRef { block, symbol }))
                .collect()
        })
        .collect();
    Ok(plan)
}

fn layout_standard(f: &PrimeField, plan: &mut QueryPlan) {
    let (m, b, x, l) = (plan.n_files(), plan.b, plan.desired_dim, plan.l_rows);
    let (alpha, beta) = (plan.ab.alpha as usize, plan.ab.beta as usize);
    let desired = plan.params.desired[0];

    let mut next_atom = vec![0usize; m];
    let mut by_label: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for label in canonical_labels(m) {
        for _ in 0..block_count(plan.ab, m, label.len()) {
            let atom_base = label
                .iter()
                .map(|&file| {
                    let base = next_atom[file];
                    next_atom[file] += b;
                    base
                })
                .collect();
            by_label.entry(label.clone()).or_default().push(plan.blocks.len());
            plan.blocks.push(Block { label: label.clone(), atom_base, mix_row: None });
        }
    }

    let mut next_row = vec![0usize; m];
    for base in canonical_labels(m).into_iter().filter(|d| !d.contains(&desired)) {
        let mut with_desired = base.clone();
        with_desired.push(desired);
        with_desired.sort_unstable();
        let pure = &by_label[&base];
        let mixed = &by_label[&with_desired];
        for g in 0..pure.len() / alpha {
            let slices = base
                .iter()
                .map(|&file| {
                    let start = next_row[file];
                    next_row[file] += alpha * x;
                    RowSlice { file, start, len: alpha * x }
                })
                .collect();
            plan.groups.push(Group {
                base_label: base.clone(),
                pure_blocks: pure[g * alpha..(g + 1) * alpha].to_vec(),
                mixed_blocks: mixed[g * beta..(g + 1) * beta].to_vec(),
                slices,
            });
        }
    }

    let mut coeffs: Vec<Matrix> = next_atom.iter().map(|&n| Matrix::zeros(n, l)).collect();
    // Desired file: block j carries the desired code applied to mask rows j·x..(j+1)·x.
    let small = plan.desired_code();
    for block in plan.blocks.iter().filter(|blk| blk.label.contains(&desired)) {
        let base = block.atom(desired, 0).expect("desired in label");
        let j = base / b;
        let rows = plan.masks[desired].row_range(j * x, x);
        let atoms = match &small {
            Some(code) => f.matmul(code.gen_t(), &rows),
            None => rows,
        };
        for s in 0..b {
            coeffs[desired].row_mut(base + s).copy_from_slice(atoms.row(s));
        }
    }
    // Undesired files: one group-code codeword per group and file.
    if !plan.groups.is_empty() {
        let code = plan.group_code();
        for group in &plan.groups {
            for slice in &group.slices {
                let rows = plan.masks[slice.file].row_range(slice.start, slice.len);
                let atoms = f.matmul(code.gen_t(), &rows);
                for (i, blk) in group.code_blocks().enumerate() {
                    let base = plan.blocks[blk].atom(slice.file, 0).expect("file in label");
                    for s in 0..b {
                        coeffs[slice.file].row_mut(base + s).copy_from_slice(atoms.row(i * b + s));
                    }
                }
            }
        }
    }
    plan.atom_coeffs = coeffs;
}

fn layout_multi_file(f: &PrimeField, plan: &mut QueryPlan) {
    let (m, b, l) = (plan.n_files(), plan.b, plan.l_rows);
    let (alpha, beta) = (plan.ab.alpha as usize, plan.ab.beta as usize);
    let p = plan.params.p_desired();

    // Reed-Solomon rows over a seeded permutation of the points 1..M.
    let mut points: Vec<u64> = (1..=m as u64).collect();
    FieldRng::new(plan.params.seed.child(MIX_SEED)).shuffle(&mut points);
    let mut h = Matrix::zeros(p, m);
    for (col, &pt) in points.iter().enumerate() {
        for row in 0..p {
            h.set(row, col, f.pow(pt, row as u64));
        }
    }
    plan.mix_matrix = Some(h);

    let all: Vec<usize> = (0..m).collect();
    let mut mixed = Vec::new();
    for lambda in 0..beta {
        for row in 0..p {
            mixed.push(plan.blocks.len());
            plan.blocks.push(Block { label: all.clone(), atom_base: vec![lambda * b; m], mix_row: Some(row) });
        }
    }
    let mut singles: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (file, own) in singles.iter_mut().enumerate() {
        for lambda in 0..alpha {
            own.push(plan.blocks.len());
            plan.blocks.push(Block { label: vec![file], atom_base: vec![(beta + lambda) * b], mix_row: None });
        }
    }
    for (file, own) in singles.into_iter().enumerate() {
        if plan.is_desired(file) {
            continue;
        }
        plan.groups.push(Group {
            base_label: vec![file],
            pure_blocks: own,
            mixed_blocks: mixed.clone(),
            slices: vec![RowSlice { file, start: 0, len: alpha * b }],
        });
    }

    let code = plan.group_code();
    plan.atom_coeffs = (0..m)
        .map(|file| {
            if plan.is_desired(file) {
                plan.masks[file].clone()
            } else {
                f.matmul(code.gen_t(), &plan.masks[file].row_range(0, alpha * b))
            }
        })
        .collect();
    debug_assert!(plan.atom_coeffs.iter().all(|c| c.rows() == l));
}

/// Checks every structural invariant of a plan. Returns human-readable
/// violations; an empty list means the plan is well formed.
pub fn validate_plan(plan: &QueryPlan) -> Vec<String> {
    let mut out = Vec::new();
    let (m, b, k, n) = (plan.n_files(), plan.b, plan.params.code_dim, plan.n_servers());
    let AlphaBeta { alpha, beta } = plan.ab;
    let (au, bu) = (alpha as usize, beta as usize);
    let x = plan.desired_dim;

    if alpha.gcd(&beta) != 1 || alpha * x as u64 != (alpha + beta) * plan.delta as u64 {
        out.push(format!("alpha/beta ({alpha},{beta}) do not solve αx = (α+β)Δ for x={x}, Δ={}", plan.delta));
    }
    let expected_l = match plan.variant() {
        Variant::MultiFile => (au + bu) * b,
        _ => x * (au + bu).pow(m as u32 - 1),
    };
    if plan.l_rows != expected_l {
        out.push(format!("L = {} but the variant formula gives {expected_l}", plan.l_rows));
    }
    if plan.variant() == Variant::Byzantine && m >= 2 && (au + bu).pow(m as u32 - 2) * au * x > plan.l_rows {
        out.push("row budget (α+β)^(M−2)·α·x exceeds L".into());
    }

    // Query multiplicity.
    let mut seen: BTreeMap<QueryRef, Vec<usize>> = BTreeMap::new();
    for (server, list) in plan.queries.iter().enumerate() {
        for &q in list {
            seen.entry(q).or_default().push(server);
        }
    }
    for block in 0..plan.blocks.len() {
        for symbol in 0..b {
            let q = QueryRef { block, symbol };
            let servers = seen.remove(&q).unwrap_or_default();
            if servers.len() != k {
                out.push(format!(
                    "query multiplicity ≠ K: block {block} symbol {symbol} sent to {} servers",
                    servers.len()
                ));
            } else if servers != plan.array.servers_of(symbol) {
                out.push(format!("block {block} symbol {symbol} sent to {servers:?}, not its subset"));
            }
        }
    }
    if let Some(q) = seen.keys().next() {
        out.push(format!("query {q:?} does not exist in the block table"));
    }
    if plan.queries.len() != n {
        out.push(format!("{} query lists for {n} servers", plan.queries.len()));
    }

    // Block multiplicity per label.
    let mut counts: BTreeMap<Vec<usize>, u128> = BTreeMap::new();
    for blk in &plan.blocks {
        *counts.entry(blk.label.clone()).or_default() += 1;
    }
    let expected: BTreeMap<Vec<usize>, u128> = match plan.variant() {
        Variant::MultiFile => {
            let mut e: BTreeMap<_, _> = (0..m).map(|f| (vec![f], alpha as u128)).collect();
            *e.entry((0..m).collect()).or_default() += (plan.params.p_desired() * bu) as u128;
            e
        }
        _ => canonical_labels(m)
            .into_iter()
            .map(|d| {
                let c = block_count(plan.ab, m, d.len());
                (d, c)
            })
            .collect(),
    };
    for (label, want) in &expected {
        let have = counts.get(label).copied().unwrap_or(0);
        if have != *want {
            out.push(format!("block multiplicity: label {label:?} has {have} blocks, expected {want}"));
        }
    }
    if let Some(extra) = counts.keys().find(|l| !expected.contains_key(*l)) {
        out.push(format!("block multiplicity: unexpected label {extra:?}"));
    }

    // Atoms.
    let mut used: Vec<Vec<bool>> = plan.atom_coeffs.iter().map(|c| vec![false; c.rows()]).collect();
    if plan.atom_coeffs.len() != m {
        out.push(format!("{} atom tables for {m} files", plan.atom_coeffs.len()));
        return out;
    }
    for (i, c) in plan.atom_coeffs.iter().enumerate() {
        if c.cols() != plan.l_rows {
            out.push(format!("atom table of file {i} has {} columns, expected L", c.cols()));
        }
    }
    let shared = plan.variant() == Variant::MultiFile;
    for (id, blk) in plan.blocks.iter().enumerate() {
        if blk.label.len() != blk.atom_base.len() || blk.label.iter().any(|&f| f >= m) {
            out.push(format!("block {id} has a malformed label"));
            continue;
        }
        for (&file, &base) in blk.label.iter().zip(&blk.atom_base) {
            for s in 0..b {
                match used[file].get_mut(base + s) {
                    None => out.push(format!("block {id}: atom {} of file {file} out of range", base + s)),
                    Some(flag) if *flag && !shared => {
                        out.push(format!("block {id}: atom {} of file {file} reused", base + s))
                    }
                    Some(flag) => *flag = true,
                }
            }
        }
    }
    for (file, flags) in used.iter().enumerate() {
        if let Some(a) = flags.iter().position(|u| !u) {
            out.push(format!("atom {a} of file {file} appears in no block"));
        }
    }
    for &d in &plan.params.desired {
        let f = plan.field();
        if d < m && f.rank(&plan.atom_coeffs[d]) != plan.l_rows {
            out.push(format!("atoms of desired file {d} do not span F^L"));
        }
    }

    // Groups.
    let mut in_group = vec![0usize; plan.blocks.len()];
    let mut slices: Vec<Vec<(usize, usize)>> = vec![Vec::new(); m];
    for (gi, g) in plan.groups.iter().enumerate() {
        let mixed_want = if shared { plan.params.p_desired() * bu } else { bu };
        if g.pure_blocks.len() != au || g.mixed_blocks.len() != mixed_want {
            out.push(format!(
                "group {gi} has {} pure and {} mixed blocks, expected {au} and {mixed_want}",
                g.pure_blocks.len(),
                g.mixed_blocks.len()
            ));
        }
        for &pb in &g.pure_blocks {
            match plan.blocks.get(pb) {
                Some(blk) if blk.label == g.base_label => in_group[pb] += 1,
                _ => out.push(format!("group {gi}: pure block {pb} is not labelled {:?}", g.base_label)),
            }
        }
        for &mb in &g.mixed_blocks {
            let ok = plan.blocks.get(mb).is_some_and(|blk| {
                g.base_label.iter().all(|f| blk.label.contains(f)) && blk.label.iter().any(|f| plan.is_desired(*f))
            });
            if !ok {
                out.push(format!("group {gi}: mixed block {mb} does not extend {:?}", g.base_label));
            } else if !shared {
                in_group[mb] += 1;
            }
        }
        for sl in &g.slices {
            if sl.file >= m || sl.start + sl.len > plan.l_rows || sl.len != au * x {
                out.push(format!("group {gi}: bad row slice {sl:?}"));
            } else {
                slices[sl.file].push((sl.start, sl.start + sl.len));
            }
        }
    }
    for (id, blk) in plan.blocks.iter().enumerate() {
        let solely_desired = blk.label.iter().all(|f| plan.is_desired(*f));
        let want = usize::from(!solely_desired && !(shared && blk.mix_row.is_some()));
        if in_group[id] != want {
            out.push(format!("block {id} belongs to {} groups, expected {want}", in_group[id]));
        }
    }
    for (file, mut spans) in slices.into_iter().enumerate() {
        spans.sort_unstable();
        if spans.windows(2).any(|w| w[0].1 > w[1].0) {
            out.push(format!("row slices of file {file} overlap"));
        }
    }
    out
}
