//! Private information retrieval over MDS-coded storage.

pub mod audit;
pub mod cli;
pub mod field;
pub mod pattern;
pub mod plan;
pub mod rational;
pub mod reconstruct;
pub mod rs;
pub mod storage;

pub use audit::{
    achieved_rate, closed_form_rate, collusion_view_ranks, full_privacy_sweep, multifile_capacity_bound,
    naive_comparison, privacy_sweep, BoundCase, NaiveComparison, PrivacyAudit, PrivacySweep, RateReport, RunReport,
};
pub use field::{FieldError, FieldRng, Matrix, PrimeField, Seed, DEFAULT_MODULUS};
pub use pattern::{family_eval, optimize_family, BlockFamily, CollusionPattern, FamilyEval, PatternError};
pub use plan::{
    build_assisting_array, build_plan, compute_alpha_beta, validate_plan, AlphaBeta, AssistingArray, Block, Group,
    PlanError, QueryPlan, QueryRef, RowSlice, SchemeParams, Variant,
};
pub use rational::Rational;
pub use reconstruct::{decode_shared_query, reconstruct, recover_atoms, AtomOrigin, ReconstructError, RecoveredAtoms};
pub use rs::{CodeError, RsCode};
pub use storage::{
    answer_query, encode_database, run_session, Adversary, Corruption, Database, Response, ServerState, StorageCode,
    StorageError, Transcript,
};
