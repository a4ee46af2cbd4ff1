//! User-side decoding of a session transcript.
//!
//! Order of work: decode every shared query from its K responses, recover the
//! undesired interference group by group, strip it from the mixed blocks,
//! decode each desired block, then solve the atom coefficients for the file.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::field::{FieldError, Matrix, PrimeField};
use crate::plan::{QueryPlan, QueryRef, Variant};
use crate::rs::{CodeError, RsCode};
use crate::storage::{StorageCode, Transcript};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReconstructError {
    #[error("decoding failure: {0}")]
    DecodingFailure(String),
    #[error("servers {0:?} did not respond and the {1} variant tolerates no absences")]
    MissingResponses(Vec<usize>, &'static str),
    #[error("storage code is singular on servers {0:?}")]
    SingularSystem(Vec<usize>),
    #[error("transcript does not match the plan: {0}")]
    ShapeMismatch(String),
}

fn failure(context: &str, err: impl std::fmt::Display) -> ReconstructError {
    ReconstructError::DecodingFailure(format!("{context}: {err}"))
}

/// Solves `x · G_S = r` for the K servers in `responses`.
pub fn decode_shared_query(
    f: &PrimeField,
    responses: &BTreeMap<usize, u64>,
    code: &StorageCode,
) -> Result<Vec<u64>, ReconstructError> {
    let servers: Vec<usize> = responses.keys().copied().collect();
    if servers.len() != code.dim() {
        return Err(ReconstructError::ShapeMismatch(format!(
            "{} responses for a dimension {} code",
            servers.len(),
            code.dim()
        )));
    }
    let inv = column_inverse(f, code, &servers)?;
    let r: Vec<u64> = responses.values().copied().collect();
    Ok(row_times(f, &r, &inv))
}

fn column_inverse(f: &PrimeField, code: &StorageCode, servers: &[usize]) -> Result<Matrix, ReconstructError> {
    if let Some(&s) = servers.iter().find(|&&s| s >= code.n_servers()) {
        return Err(ReconstructError::ShapeMismatch(format!("server {s} is not in the storage code")));
    }
    f.invert(&code.gen().select_cols(servers)).map_err(|_| ReconstructError::SingularSystem(servers.to_vec()))
}

fn row_times(f: &PrimeField, row: &[u64], m: &Matrix) -> Vec<u64> {
    let mut out = vec![0; m.cols()];
    for (i, &r) in row.iter().enumerate() {
        f.axpy(&mut out, r, m.row(i));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AtomOrigin {
    /// Read from a retrieved query (after interference removal).
    Direct,
    /// Filled in from other positions of its codeword.
    ErasureCompleted,
    /// Replaced by the error-corrected codeword value.
    ErrorCorrected,
}

/// Values `sW` in F^K of every atom of the desired files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecoveredAtoms {
    pub values: BTreeMap<usize, Vec<Vec<u64>>>,
    pub origin: BTreeMap<usize, Vec<AtomOrigin>>,
}

/// Decoded query values indexed by `block * b + symbol`; `None` when some
/// holder of the symbol did not respond.
struct QueryValues {
    b: usize,
    k: usize,
    values: Vec<Option<Vec<u64>>>,
}

impl QueryValues {
    fn get(&self, block: usize, symbol: usize) -> Option<&[u64]> {
        self.values[block * self.b + symbol].as_deref()
    }

    fn collect(plan: &QueryPlan, transcript: &Transcript, code: &StorageCode) -> Result<Self, ReconstructError> {
        let f = plan.field();
        let (n, b, k) = (plan.n_servers(), plan.b, plan.params.code_dim);
        if transcript.responses.len() != n || code.n_servers() != n || code.dim() != k {
            return Err(ReconstructError::ShapeMismatch(format!(
                "{} responses and a {} x {} code for {n} servers and K = {k}",
                transcript.responses.len(),
                code.dim(),
                code.n_servers()
            )));
        }
        let mut slot: Vec<Vec<Option<usize>>> = vec![vec![None; plan.blocks.len() * b]; n];
        for (server, list) in plan.queries.iter().enumerate() {
            if let Some(a) = transcript.responses[server].answers() {
                if a.len() != list.len() {
                    return Err(ReconstructError::ShapeMismatch(format!(
                        "server {server} sent {} answers for {} queries",
                        a.len(),
                        list.len()
                    )));
                }
            }
            for (i, &QueryRef { block, symbol }) in list.iter().enumerate() {
                slot[server][block * b + symbol] = Some(i);
            }
        }
        let inverses =
            (0..b).map(|s| column_inverse(&f, code, plan.array.servers_of(s))).collect::<Result<Vec<_>, _>>()?;
        let mut values = Vec::with_capacity(plan.blocks.len() * b);
        for block in 0..plan.blocks.len() {
            for (s, inv) in inverses.iter().enumerate() {
                let r: Option<Vec<u64>> = plan
                    .array
                    .servers_of(s)
                    .iter()
                    .map(|&srv| {
                        let idx = slot[srv][block * b + s]?;
                        transcript.responses[srv].answers().map(|a| a[idx])
                    })
                    .collect();
                values.push(r.map(|r| row_times(&f, &r, inv)));
            }
        }
        Ok(Self { b, k, values })
    }
}

/// Recovers the desired files, keyed by file index.
pub fn reconstruct(
    plan: &QueryPlan,
    transcript: &Transcript,
    code: &StorageCode,
) -> Result<BTreeMap<usize, Matrix>, ReconstructError> {
    let atoms = recover_atoms(plan, transcript, code)?;
    let f = plan.field();
    atoms
        .values
        .iter()
        .map(|(&file, vals)| {
            let rhs = Matrix::from_rows(vals);
            let w = f.solve(&plan.atom_coeffs[file], &rhs).map_err(|e| match e {
                FieldError::NoSolution => {
                    ReconstructError::DecodingFailure(format!("atoms of file {file} are inconsistent"))
                }
                other => failure("final solve", other),
            })?;
            Ok((file, w))
        })
        .collect()
}

pub fn recover_atoms(
    plan: &QueryPlan,
    transcript: &Transcript,
    code: &StorageCode,
) -> Result<RecoveredAtoms, ReconstructError> {
    let absent: Vec<usize> =
        (0..transcript.responses.len()).filter(|&n| transcript.responses[n].answers().is_none()).collect();
    if !absent.is_empty() && plan.variant() != Variant::Robust {
        return Err(ReconstructError::MissingResponses(absent, plan.variant().name()));
    }
    let q = QueryValues::collect(plan, transcript, code)?;
    match plan.variant() {
        Variant::MultiFile => recover_multi_file(plan, &q),
        _ => recover_standard(plan, &q),
    }
}

/// Column `c` of the decoded values at the given (block, symbol) positions.
fn column(q: &QueryValues, positions: &[(usize, usize)], c: usize) -> Vec<Option<u64>> {
    positions.iter().map(|&(blk, s)| q.get(blk, s).map(|v| v[c])).collect()
}

fn complete(code: &RsCode, f: &PrimeField, word: &[Option<u64>]) -> Result<Vec<u64>, CodeError> {
    let known: BTreeMap<usize, u64> = word.iter().enumerate().filter_map(|(i, v)| v.map(|v| (i, v))).collect();
    code.erasure_complete(f, &known)
}

fn recover_standard(plan: &QueryPlan, q: &QueryValues) -> Result<RecoveredAtoms, ReconstructError> {
    let f = plan.field();
    let (b, k) = (q.b, q.k);
    let desired = plan.params.desired[0];
    let byzantine = plan.variant() == Variant::Byzantine;

    // Interference per (block, symbol), one F^K value, for mixed blocks.
    let mut interference: BTreeMap<usize, Vec<Vec<u64>>> = BTreeMap::new();
    if !plan.groups.is_empty() {
        let code = plan.group_code();
        let beta = plan.ab.beta as usize;
        let pure_range: BTreeSet<usize> = (beta * b..code.len()).collect();
        let punctured = code.puncture(&f, &pure_range).map_err(|e| failure("group code", e))?;
        for (gi, group) in plan.groups.iter().enumerate() {
            let positions: Vec<(usize, usize)> =
                group.code_blocks().flat_map(|blk| (0..b).map(move |s| (blk, s))).collect();
            let mut words = Vec::with_capacity(k);
            for c in 0..k {
                let col = column(q, &positions, c);
                let word = if byzantine {
                    let received: Option<Vec<u64>> = col[beta * b..].iter().copied().collect();
                    let received = received.ok_or_else(|| failure("group", "missing pure query"))?;
                    let pure =
                        punctured.error_correct(&f, &received).map_err(|e| failure(&format!("group {gi}"), e))?;
                    let mut full: Vec<Option<u64>> = vec![None; beta * b];
                    full.extend(pure.into_iter().map(Some));
                    complete(&code, &f, &full)
                } else {
                    let mut pure_only = col;
                    pure_only[..beta * b].iter_mut().for_each(|v| *v = None);
                    complete(&code, &f, &pure_only)
                };
                words.push(word.map_err(|e| failure(&format!("group {gi}"), e))?);
            }
            for (i, &blk) in group.mixed_blocks.iter().enumerate() {
                let vals = (0..b).map(|s| words.iter().map(|w| w[i * b + s]).collect()).collect();
                interference.insert(blk, vals);
            }
        }
    }

    let small = plan.desired_code();
    let n_atoms = plan.atom_coeffs[desired].rows();
    let mut values = vec![Vec::new(); n_atoms];
    let mut origin = vec![AtomOrigin::Direct; n_atoms];
    for (blk, block) in plan.blocks.iter().enumerate().filter(|(_, blk)| blk.label.contains(&desired)) {
        let base = block.atom(desired, 0).expect("desired in label");
        let strip = interference.get(&blk);
        if strip.is_none() && block.label.len() > 1 {
            return Err(failure("plan", format!("block {blk} has no interference recovery")));
        }
        let direct: Vec<Option<Vec<u64>>> = (0..b)
            .map(|s| {
                q.get(blk, s).map(|v| match strip {
                    Some(i) => v.iter().zip(&i[s]).map(|(a, c)| f.sub(*a, *c)).collect(),
                    None => v.to_vec(),
                })
            })
            .collect();
        let mut decoded: Vec<Vec<u64>> = vec![vec![0; k]; b];
        for c in 0..k {
            let col: Vec<Option<u64>> = direct.iter().map(|v| v.as_ref().map(|v| v[c])).collect();
            let word = match &small {
                None => col
                    .iter()
                    .copied()
                    .collect::<Option<Vec<u64>>>()
                    .ok_or_else(|| failure("desired block", "missing query"))?,
                Some(code) if byzantine => {
                    let rx: Option<Vec<u64>> = col.iter().copied().collect();
                    let rx = rx.ok_or_else(|| failure("desired block", "missing query"))?;
                    code.error_correct(&f, &rx).map_err(|e| failure(&format!("desired block {blk}"), e))?
                }
                Some(code) => complete(code, &f, &col).map_err(|e| failure(&format!("desired block {blk}"), e))?,
            };
            for s in 0..b {
                decoded[s][c] = word[s];
            }
        }
        for s in 0..b {
            origin[base + s] = match &direct[s] {
                None => AtomOrigin::ErasureCompleted,
                Some(v) if *v != decoded[s] => AtomOrigin::ErrorCorrected,
                Some(_) => AtomOrigin::Direct,
            };
            values[base + s] = std::mem::take(&mut decoded[s]);
        }
    }
    Ok(RecoveredAtoms { values: BTreeMap::from([(desired, values)]), origin: BTreeMap::from([(desired, origin)]) })
}

#[allow(clippy::needless_range_loop)]
fn recover_multi_file(plan: &QueryPlan, q: &QueryValues) -> Result<RecoveredAtoms, ReconstructError> {
    let f = plan.field();
    let (b, k, m, l) = (q.b, q.k, plan.n_files(), plan.l_rows);
    let beta = plan.ab.beta as usize;
    let h = plan.mix_matrix.as_ref().ok_or_else(|| failure("plan", "multi-file plan without a mixing matrix"))?;
    let desired = &plan.params.desired;

    // Atom values per file that are read directly from singleton blocks.
    let mut atoms: Vec<Vec<Option<Vec<u64>>>> = vec![vec![None; l]; m];
    for (blk, block) in plan.blocks.iter().enumerate().filter(|(_, blk)| blk.mix_row.is_none()) {
        let file = block.label[0];
        for s in 0..b {
            atoms[file][block.atom_base[0] + s] = q.get(blk, s).map(<[u64]>::to_vec);
        }
    }
    // Undesired files: complete each codeword from its singleton positions.
    let code = plan.group_code();
    for group in &plan.groups {
        let file = group.base_label[0];
        let mut full = vec![vec![0; k]; l];
        for c in 0..k {
            let word: Vec<Option<u64>> =
                (0..l).map(|i| if i < beta * b { None } else { atoms[file][i].as_ref().map(|v| v[c]) }).collect();
            let word = complete(&code, &f, &word).map_err(|e| failure(&format!("file {file}"), e))?;
            for i in 0..l {
                full[i][c] = word[i];
            }
        }
        atoms[file] = full.into_iter().map(Some).collect();
    }
    // Σ blocks: P equations per (λ, symbol) in the desired atoms.
    let h_desired = h.select_cols(desired);
    let h_inv = f.invert(&h_desired).map_err(|e| failure("mixing matrix", e))?;
    let undesired: Vec<usize> = (0..m).filter(|x| !desired.contains(x)).collect();
    let mut sigma: BTreeMap<(usize, usize), Vec<u64>> = BTreeMap::new();
    for (blk, block) in plan.blocks.iter().enumerate() {
        let Some(row) = block.mix_row else { continue };
        for s in 0..b {
            let atom = block.atom_base[0] + s;
            let mut v = q.get(blk, s).ok_or_else(|| failure("mixed block", "missing query"))?.to_vec();
            for &u in &undesired {
                let a = atoms[u][atom].as_ref().expect("completed above");
                f.axpy(&mut v, f.neg(h.get(row, u)), a);
            }
            sigma.entry((atom, row)).or_insert(v);
        }
    }
    for atom in 0..beta * b {
        let rhs: Vec<Vec<u64>> = (0..desired.len())
            .map(|p| sigma.get(&(atom, p)).cloned().ok_or_else(|| failure("mixed block", "missing row")))
            .collect::<Result<_, _>>()?;
        let solved = f.matmul(&h_inv, &Matrix::from_rows(&rhs));
        for (i, &d) in desired.iter().enumerate() {
            atoms[d][atom] = Some(solved.row(i).to_vec());
        }
    }
    let mut values = BTreeMap::new();
    let mut origin = BTreeMap::new();
    for &d in desired {
        let vals: Option<Vec<Vec<u64>>> = atoms[d].iter().cloned().collect();
        values.insert(d, vals.ok_or_else(|| failure("desired file", "unrecovered atom"))?);
        origin.insert(d, vec![AtomOrigin::Direct; l]);
    }
    Ok(RecoveredAtoms { values, origin })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Seed;
    use crate::plan::{build_plan, SchemeParams};
    use crate::storage::{run_session, Adversary, Database};

    fn fixture(params: &SchemeParams, seed: u64) -> (QueryPlan, Database, StorageCode) {
        let plan = build_plan(params).unwrap();
        let f = plan.field();
        let code = StorageCode::reed_solomon(&f, params.n_servers, params.code_dim).unwrap();
        let db = Database::random(&f, params.n_files, plan.l_rows, params.code_dim, Seed(seed));
        (plan, db, code)
    }

    fn recovers(plan: &QueryPlan, db: &Database, code: &StorageCode, adv: &Adversary) -> bool {
        let t = run_session(plan, db, code, adv).unwrap();
        let out = reconstruct(plan, &t, code).unwrap();
        plan.params.desired.iter().all(|&d| out[&d] == db.files[d])
    }

    #[test]
    fn shared_query_examples() {
        let f7 = PrimeField::new(7).unwrap();
        let sys = StorageCode::from_matrix(&f7, Matrix::identity(2)).unwrap();
        let r = BTreeMap::from([(0, 3), (1, 5)]);
        assert_eq!(decode_shared_query(&f7, &r, &sys).unwrap(), vec![3, 5]);

        let rep = StorageCode::from_matrix(&f7, Matrix::from_rows(&[[1, 1]])).unwrap();
        assert_eq!(decode_shared_query(&f7, &BTreeMap::from([(1, 4)]), &rep).unwrap(), vec![4]);

        let rs = StorageCode::reed_solomon(&f7, 5, 2).unwrap();
        let x = [2, 6];
        let r: BTreeMap<usize, u64> = [1, 4].into_iter().map(|n| (n, f7.dot(&x, &rs.column(n)))).collect();
        assert_eq!(decode_shared_query(&f7, &r, &rs).unwrap(), x.to_vec());
    }

    #[test]
    fn singular_columns_are_reported() {
        let f7 = PrimeField::new(7).unwrap();
        // Not MDS, so built without the check.
        let rep = StorageCode::from_matrix(&f7, Matrix::from_rows(&[[1, 1]])).unwrap();
        assert!(matches!(
            decode_shared_query(&f7, &BTreeMap::from([(0, 1), (1, 1)]), &rep),
            Err(ReconstructError::ShapeMismatch(_))
        ));
    }

    #[test]
    fn prototype_recovers_every_desired_file() {
        for d in 0..3 {
            let (plan, db, code) = fixture(&SchemeParams::prototype(4, 2, 2, 3).with_desired(vec![d]), 7 + d as u64);
            assert!(recovers(&plan, &db, &code, &Adversary::honest()));
        }
    }

    #[test]
    fn robust_recovers_under_every_single_erasure() {
        let (plan, db, code) = fixture(&SchemeParams::robust(6, 1, 2, 2, 2), 1);
        for absent in 0..6 {
            assert!(recovers(&plan, &db, &code, &Adversary::absent([absent])));
        }
        assert!(recovers(&plan, &db, &code, &Adversary::honest()));
    }

    #[test]
    fn robust_overload_fails_loudly() {
        let (plan, db, code) = fixture(&SchemeParams::robust(6, 1, 2, 2, 2), 1);
        let t = run_session(&plan, &db, &code, &Adversary::absent([0, 1])).unwrap();
        assert!(matches!(reconstruct(&plan, &t, &code), Err(ReconstructError::DecodingFailure(_))));
    }

    #[test]
    fn robust_marks_completed_atoms() {
        let (plan, db, code) = fixture(&SchemeParams::robust(6, 1, 2, 2, 2), 2);
        let t = run_session(&plan, &db, &code, &Adversary::absent([3])).unwrap();
        let atoms = recover_atoms(&plan, &t, &code).unwrap();
        let filled = atoms.origin[&0].iter().filter(|o| **o == AtomOrigin::ErasureCompleted).count();
        // Five symbols touch server 3 in each of the ten desired blocks.
        assert_eq!(filled, 10 * 5);
    }

    #[test]
    fn byzantine_recovers_under_every_single_corruption() {
        let (plan, db, code) = fixture(&SchemeParams::byzantine(8, 1, 2, 2, 2), 3);
        for bad in 0..8 {
            for seed in 0..3 {
                assert!(recovers(&plan, &db, &code, &Adversary::corrupting([bad], Seed(seed))));
            }
        }
    }

    #[test]
    fn byzantine_overload_is_not_silently_accepted() {
        let (plan, db, code) = fixture(&SchemeParams::byzantine(8, 1, 2, 2, 2), 3);
        let t = run_session(&plan, &db, &code, &Adversary::corrupting([0, 1], Seed(1))).unwrap();
        match reconstruct(&plan, &t, &code) {
            Err(ReconstructError::DecodingFailure(_)) => {}
            Ok(out) => assert_ne!(out[&0], db.files[0]),
            Err(other) => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn multi_file_recovers_both() {
        let (plan, db, code) = fixture(&SchemeParams::multi_file(4, 2, 2, 3, 2), 4);
        assert!(recovers(&plan, &db, &code, &Adversary::honest()));
        let (plan, db, code) = fixture(&SchemeParams::multi_file(4, 2, 2, 3, 2).with_desired(vec![2, 0]), 5);
        assert!(recovers(&plan, &db, &code, &Adversary::honest()));
        let (plan, db, code) = fixture(&SchemeParams::multi_file(4, 2, 2, 3, 3), 5);
        assert!(recovers(&plan, &db, &code, &Adversary::honest()));
    }

    #[test]
    fn pattern_recovers() {
        let (plan, db, code) = fixture(&crate::plan::tests::pentagon_params(2), 6);
        assert!(recovers(&plan, &db, &code, &Adversary::honest()));
        let (plan, db, code) = fixture(&crate::plan::tests::pentagon_params(3), 6);
        assert!(recovers(&plan, &db, &code, &Adversary::honest()));
    }

    #[test]
    fn absences_rejected_outside_robust() {
        let (plan, db, code) = fixture(&SchemeParams::prototype(4, 2, 2, 2), 1);
        let t = run_session(&plan, &db, &code, &Adversary::absent([2])).unwrap();
        assert!(matches!(reconstruct(&plan, &t, &code), Err(ReconstructError::MissingResponses(..))));
    }

    #[test]
    fn undesired_contents_do_not_leak_into_output() {
        let (plan, mut db, code) = fixture(&SchemeParams::prototype(4, 2, 2, 3), 9);
        let before = reconstruct(&plan, &run_session(&plan, &db, &code, &Adversary::honest()).unwrap(), &code).unwrap();
        db.files[1] = Matrix::zeros(plan.l_rows, 2);
        db.files[2] = Matrix::zeros(plan.l_rows, 2);
        let after = reconstruct(&plan, &run_session(&plan, &db, &code, &Adversary::honest()).unwrap(), &code).unwrap();
        assert_eq!(before, after);
    }

    #[test]
    fn larger_instances_round_trip() {
        for p in [
            SchemeParams::prototype(5, 2, 1, 3),
            SchemeParams::prototype(4, 1, 2, 3),
            SchemeParams::robust(5, 1, 1, 2, 3),
            SchemeParams::byzantine(6, 1, 1, 1, 3),
            SchemeParams::multi_file(5, 2, 1, 4, 2),
        ] {
            let (plan, db, code) = fixture(&p, 11);
            assert!(recovers(&plan, &db, &code, &Adversary::honest()), "{p:?}");
        }
    }
}
