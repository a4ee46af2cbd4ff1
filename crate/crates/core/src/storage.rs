//! Coded storage and retrieval sessions under robust and Byzantine faults.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{FieldRng, Matrix, PrimeField, Seed};
use crate::pattern::k_subsets;
use crate::plan::QueryPlan;
use crate::rs::{CodeError, RsCode};

pub const DATABASE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum StorageError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("storage code is not MDS: columns {0:?} are dependent")]
    NotMds(Vec<usize>),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error("database file: {0}")]
    Io(#[from] std::io::Error),
    #[error("database JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported database schema_version {0}")]
    UnsupportedSchema(u32),
}

/// M files, each an L x K matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Database {
    pub schema_version: u32,
    pub modulus: u64,
    pub files: Vec<Matrix>,
}

impl Database {
    pub fn new(f: &PrimeField, files: Vec<Matrix>) -> Result<Self, StorageError> {
        if let Some(first) = files.first() {
            if files.iter().any(|w| w.rows() != first.rows() || w.cols() != first.cols()) {
                return Err(StorageError::ShapeMismatch("files differ in shape".into()));
            }
        }
        Ok(Self { schema_version: DATABASE_SCHEMA_VERSION, modulus: f.modulus(), files })
    }

    /// Uniformly random entries.
    pub fn random(f: &PrimeField, n_files: usize, rows: usize, cols: usize, seed: Seed) -> Self {
        let mut rng = FieldRng::new(seed);
        let files = (0..n_files)
            .map(|_| Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| rng.element(f)).collect()))
            .collect();
        Self { schema_version: DATABASE_SCHEMA_VERSION, modulus: f.modulus(), files }
    }

    pub fn n_files(&self) -> usize {
        self.files.len()
    }

    /// (L, K) of every file.
    pub fn file_shape(&self) -> (usize, usize) {
        self.files.first().map_or((0, 0), |w| (w.rows(), w.cols()))
    }

    pub fn save(&self, path: &Path) -> Result<(), StorageError> {
        std::fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, StorageError> {
        let db: Database = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if db.schema_version != DATABASE_SCHEMA_VERSION {
            return Err(StorageError::UnsupportedSchema(db.schema_version));
        }
        let (l, k) = db.file_shape();
        if db.files.iter().any(|w| w.rows() != l || w.cols() != k) {
            return Err(StorageError::ShapeMismatch("files differ in shape".into()));
        }
        Ok(db)
    }
}

/// K x N generator; server n stores each file row times column n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StorageCode {
    gen: Matrix,
}

impl StorageCode {
    /// Reed-Solomon code on the points 1..N.
    pub fn reed_solomon(f: &PrimeField, n: usize, k: usize) -> Result<Self, StorageError> {
        Ok(Self { gen: RsCode::transposed_generator(f, n, k)?.gen_t().transpose() })
    }

    /// Accepts any K x N matrix whose every K columns are independent.
    pub fn from_matrix(f: &PrimeField, gen: Matrix) -> Result<Self, StorageError> {
        let (k, n) = (gen.rows(), gen.cols());
        if k == 0 || k > n {
            return Err(StorageError::ShapeMismatch(format!("generator is {k} x {n}")));
        }
        for cols in k_subsets(n, k) {
            if f.rank(&gen.select_cols(&cols)) < k {
                return Err(StorageError::NotMds(cols));
            }
        }
        Ok(Self { gen })
    }

    pub fn dim(&self) -> usize {
        self.gen.rows()
    }

    pub fn n_servers(&self) -> usize {
        self.gen.cols()
    }

    pub fn gen(&self) -> &Matrix {
        &self.gen
    }

    pub fn column(&self, server: usize) -> Vec<u64> {
        self.gen.column(server)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServerState {
    pub index: usize,
    /// File-major: entry m·L + j is row j of file m times this server's column.
    pub contents: Vec<u64>,
}

pub fn encode_database(f: &PrimeField, db: &Database, code: &StorageCode) -> Result<Vec<ServerState>, StorageError> {
    let (_, k) = db.file_shape();
    if db.n_files() > 0 && k != code.dim() {
        return Err(StorageError::ShapeMismatch(format!("files have {k} columns, code dimension is {}", code.dim())));
    }
    Ok((0..code.n_servers())
        .map(|index| {
            let g = code.column(index);
            let contents = db.files.iter().flat_map(|w| (0..w.rows()).map(|j| f.dot(w.row(j), &g))).collect();
            ServerState { index, contents }
        })
        .collect())
}

pub fn answer_query(f: &PrimeField, query: &[u64], server: &ServerState) -> u64 {
    assert_eq!(query.len(), server.contents.len(), "query length");
    f.dot(query, &server.contents)
}

/// `(server, response index, honest value) -> sent value`.
pub type CorruptionFn = Arc<dyn Fn(usize, usize, u64) -> u64 + Send + Sync>;

#[derive(Clone)]
pub enum Corruption {
    /// Adds an independent uniformly random nonzero element to every response.
    RandomNonzero(Seed),
    Custom(CorruptionFn),
}

impl fmt::Debug for Corruption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Corruption::RandomNonzero(seed) => f.debug_tuple("RandomNonzero").field(seed).finish(),
            Corruption::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Adversary {
    /// Servers that do not respond.
    pub robust: BTreeSet<usize>,
    /// Servers whose responses are corrupted.
    pub byzantine: BTreeSet<usize>,
    pub corruption: Corruption,
}

impl Adversary {
    pub fn honest() -> Self {
        Self { robust: BTreeSet::new(), byzantine: BTreeSet::new(), corruption: Corruption::RandomNonzero(Seed(0)) }
    }

    pub fn absent(servers: impl IntoIterator<Item = usize>) -> Self {
        Self { robust: servers.into_iter().collect(), ..Self::honest() }
    }

    pub fn corrupting(servers: impl IntoIterator<Item = usize>, seed: Seed) -> Self {
        Self { byzantine: servers.into_iter().collect(), corruption: Corruption::RandomNonzero(seed), ..Self::honest() }
    }
}

impl Default for Adversary {
    fn default() -> Self {
        Self::honest()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Response {
    Absent,
    Answers(Vec<u64>),
}

impl Response {
    pub fn answers(&self) -> Option<&[u64]> {
        match self {
            Response::Absent => None,
            Response::Answers(v) => Some(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Transcript {
    pub responses: Vec<Response>,
    pub downloaded_symbols: u64,
}

pub fn run_session(
    plan: &QueryPlan,
    db: &Database,
    code: &StorageCode,
    adversary: &Adversary,
) -> Result<Transcript, StorageError> {
    let f = plan.field();
    let (l, k) = db.file_shape();
    if db.n_files() != plan.n_files() || l != plan.l_rows || k != plan.params.code_dim {
        return Err(StorageError::ShapeMismatch(format!(
            "database is {} files of {l} x {k}, plan expects {} files of {} x {}",
            db.n_files(),
            plan.n_files(),
            plan.l_rows,
            plan.params.code_dim
        )));
    }
    if code.n_servers() != plan.n_servers() {
        return Err(StorageError::ShapeMismatch(format!(
            "code has {} servers, plan has {}",
            code.n_servers(),
            plan.n_servers()
        )));
    }
    if let Some(&s) = adversary.robust.iter().chain(&adversary.byzantine).find(|&&s| s >= plan.n_servers()) {
        return Err(StorageError::ShapeMismatch(format!("adversary names server {s}")));
    }
    let servers = encode_database(&f, db, code)?;
    let responses: Vec<Response> = servers
        .par_iter()
        .map(|server| {
            if adversary.robust.contains(&server.index) {
                return Response::Absent;
            }
            let mut answers: Vec<u64> =
                plan.queries[server.index].iter().map(|&q| answer_query(&f, &plan.query_vector(q), server)).collect();
            if adversary.byzantine.contains(&server.index) {
                corrupt(&f, server.index, &mut answers, &adversary.corruption);
            }
            Response::Answers(answers)
        })
        .collect();
    let downloaded_symbols = responses.iter().filter_map(Response::answers).map(|a| a.len() as u64).sum();
    Ok(Transcript { responses, downloaded_symbols })
}

fn corrupt(f: &PrimeField, server: usize, answers: &mut [u64], how: &Corruption) {
    match how {
        Corruption::RandomNonzero(seed) => {
            let mut rng = FieldRng::new(seed.child(server as u64));
            for a in answers.iter_mut() {
                *a = f.add(*a, rng.nonzero(f));
            }
        }
        Corruption::Custom(func) => {
            for (i, a) in answers.iter_mut().enumerate() {
                *a = f.elem(func(server, i, *a));
            }
        }
    }
}
