//! Collusion patterns, block families and the Δ/b family search.
//!
//! Servers are 0-based. A family lists K-subsets of servers; each subset is
//! one symbol of the assisting array. Δ is the largest number of family
//! blocks met by a single maximal collusion set.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::Rational;

/// Largest C(N,K) accepted by [`optimize_family`].
pub const SEARCH_BUDGET: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatternError {
    #[error("server {server} out of range for {n_servers} servers")]
    ServerOutOfRange { server: usize, n_servers: usize },
    #[error("empty subset")]
    EmptySet,
    #[error("maximal set {inner:?} is contained in {outer:?}")]
    NotAntichain { inner: Vec<usize>, outer: Vec<usize> },
    #[error("block {block:?} does not have size {k}")]
    WrongBlockSize { block: Vec<usize>, k: usize },
    #[error("family is empty")]
    EmptyFamily,
    #[error("C(N,K) = {candidates} exceeds the search budget of {SEARCH_BUDGET}")]
    BudgetExceeded { candidates: usize },
    #[error("no family with b > Δ exists for K = {k}")]
    Infeasible { k: usize },
    #[error("invalid JSON: {0}")]
    Json(String),
}

fn normalize(set: &[usize], n_servers: usize) -> Result<Vec<usize>, PatternError> {
    if set.is_empty() {
        return Err(PatternError::EmptySet);
    }
    let mut v = set.to_vec();
    v.sort_unstable();
    v.dedup();
    match v.iter().find(|&&s| s >= n_servers) {
        Some(&server) => Err(PatternError::ServerOutOfRange { server, n_servers }),
        None => Ok(v),
    }
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|x| b.binary_search(x).is_ok())
}

fn meets(a: &[usize], b: &[usize]) -> bool {
    a.iter().any(|x| b.binary_search(x).is_ok())
}

/// A collusion pattern given by its maximal sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PatternDoc")]
pub struct CollusionPattern {
    n_servers: usize,
    maximal_sets: Vec<Vec<usize>>,
}

impl CollusionPattern {
    pub fn new(n_servers: usize, sets: Vec<Vec<usize>>) -> Result<Self, PatternError> {
        let sets = sets.iter().map(|s| normalize(s, n_servers)).collect::<Result<Vec<_>, _>>()?;
        for (i, a) in sets.iter().enumerate() {
            for (j, b) in sets.iter().enumerate() {
                if i != j && is_subset(a, b) {
                    return Err(PatternError::NotAntichain { inner: a.clone(), outer: b.clone() });
                }
            }
        }
        Ok(Self { n_servers, maximal_sets: sets })
    }

    /// Every T-subset of N servers.
    pub fn all_subsets(n_servers: usize, t: usize) -> Self {
        Self { n_servers, maximal_sets: k_subsets(n_servers, t) }
    }

    pub fn n_servers(&self) -> usize {
        self.n_servers
    }

    pub fn maximal_sets(&self) -> &[Vec<usize>] {
        &self.maximal_sets
    }

    /// Size of the largest maximal set.
    pub fn max_size(&self) -> usize {
        self.maximal_sets.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Accepts `{"n_servers": N, "maximal_sets": [[..], ..]}` or a bare list
    /// of sets, in which case N is one more than the largest server index.
    pub fn from_json(text: &str) -> Result<Self, PatternError> {
        let (n, sets) = parse_sets(text, "maximal_sets", "n_servers")?;
        let n = n.unwrap_or_else(|| implied_servers(&sets));
        Self::new(n, sets)
    }
}

/// A family of K-subsets of servers, possibly with repeats.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "FamilyDoc")]
pub struct BlockFamily {
    k: usize,
    blocks: Vec<Vec<usize>>,
}

impl BlockFamily {
    pub fn new(k: usize, blocks: Vec<Vec<usize>>) -> Result<Self, PatternError> {
        if blocks.is_empty() {
            return Err(PatternError::EmptyFamily);
        }
        let mut out = Vec::with_capacity(blocks.len());
        for b in blocks {
            let norm = normalize(&b, usize::MAX)?;
            if norm.len() != k {
                return Err(PatternError::WrongBlockSize { block: b, k });
            }
            out.push(norm);
        }
        Ok(Self { k, blocks: out })
    }

    /// All K-subsets of N servers in lexicographic order.
    pub fn all_subsets(n_servers: usize, k: usize) -> Self {
        Self { k, blocks: k_subsets(n_servers, k) }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// One more than the largest server mentioned.
    pub fn implied_servers(&self) -> usize {
        implied_servers(&self.blocks)
    }

    /// Accepts `{"k": K, "blocks": [[..], ..]}` or a bare list of blocks.
    pub fn from_json(text: &str) -> Result<Self, PatternError> {
        let (k, blocks) = parse_sets(text, "blocks", "k")?;
        let k = k.or_else(|| blocks.first().map(Vec::len)).unwrap_or(0);
        Self::new(k, blocks)
    }
}

#[derive(Deserialize)]
struct PatternDoc {
    n_servers: Option<usize>,
    maximal_sets: Vec<Vec<usize>>,
}

impl TryFrom<PatternDoc> for CollusionPattern {
    type Error = PatternError;

    fn try_from(doc: PatternDoc) -> Result<Self, PatternError> {
        let n = doc.n_servers.unwrap_or_else(|| implied_servers(&doc.maximal_sets));
        Self::new(n, doc.maximal_sets)
    }
}

#[derive(Deserialize)]
struct FamilyDoc {
    k: usize,
    blocks: Vec<Vec<usize>>,
}

impl TryFrom<FamilyDoc> for BlockFamily {
    type Error = PatternError;

    fn try_from(doc: FamilyDoc) -> Result<Self, PatternError> {
        Self::new(doc.k, doc.blocks)
    }
}

fn implied_servers(sets: &[Vec<usize>]) -> usize {
    sets.iter().flatten().max().map_or(0, |m| m + 1)
}

fn parse_sets(text: &str, list_key: &str, size_key: &str) -> Result<(Option<usize>, Vec<Vec<usize>>), PatternError> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Doc {
        Bare(Vec<Vec<usize>>),
        Object(serde_json::Map<String, serde_json::Value>),
    }
    let err = |e: serde_json::Error| PatternError::Json(e.to_string());
    match serde_json::from_str::<Doc>(text).map_err(err)? {
        Doc::Bare(sets) => Ok((None, sets)),
        Doc::Object(mut map) => {
            let sets = map.remove(list_key).ok_or_else(|| PatternError::Json(format!("missing key {list_key:?}")))?;
            let sets = serde_json::from_value(sets).map_err(err)?;
            let size = map.remove(size_key).map(serde_json::from_value).transpose().map_err(err)?;
            Ok((size, sets))
        }
    }
}

/// All k-subsets of `0..n` in lexicographic order.
pub fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] < n - k + i) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FamilyEval {
    pub b: usize,
    pub delta: usize,
    pub per_set_counts: Vec<usize>,
    pub ratio: Rational,
}

impl FamilyEval {
    pub fn feasible(&self) -> bool {
        self.b > self.delta
    }
}

pub fn family_eval(pattern: &CollusionPattern, family: &BlockFamily) -> FamilyEval {
    let per_set_counts: Vec<usize> =
        pattern.maximal_sets.iter().map(|t| family.blocks.iter().filter(|b| meets(b, t)).count()).collect();
    let delta = per_set_counts.iter().copied().max().unwrap_or(0);
    let b = family.len();
    FamilyEval { b, delta, per_set_counts, ratio: Rational::new(delta as u64, b.max(1) as u64) }
}

/// Exhaustive search over repeat-free subfamilies of all K-subsets for the
/// smallest Δ/b with b > Δ and b ≤ `max_blocks`. Ties go to the smaller b,
/// then to the lexicographically smaller list of K-subset indices.
pub fn optimize_family(
    pattern: &CollusionPattern,
    k: usize,
    max_blocks: usize,
) -> Result<(BlockFamily, FamilyEval), PatternError> {
    let candidates = k_subsets(pattern.n_servers, k);
    if candidates.len() > SEARCH_BUDGET {
        return Err(PatternError::BudgetExceeded { candidates: candidates.len() });
    }
    // hits[c] lists the maximal sets met by candidate c.
    let hits: Vec<Vec<usize>> = candidates
        .iter()
        .map(|c| (0..pattern.maximal_sets.len()).filter(|&i| meets(c, &pattern.maximal_sets[i])).collect())
        .collect();
    let mut search = Search {
        hits: &hits,
        max_blocks: max_blocks.min(candidates.len()),
        counts: vec![0; pattern.maximal_sets.len()],
        chosen: Vec::new(),
        best: None,
    };
    search.descend(0, 0);
    let (_, _, chosen) = search.best.ok_or(PatternError::Infeasible { k })?;
    let family = BlockFamily { k, blocks: chosen.iter().map(|&i| candidates[i].clone()).collect() };
    let eval = family_eval(pattern, &family);
    Ok((family, eval))
}

struct Search<'a> {
    hits: &'a [Vec<usize>],
    max_blocks: usize,
    counts: Vec<usize>,
    chosen: Vec<usize>,
    /// (delta, b, indices) of the incumbent.
    best: Option<(usize, usize, Vec<usize>)>,
}

impl Search<'_> {
    fn better(&self, delta: usize, b: usize) -> bool {
        let Some((bd, bb, ref idx)) = self.best else { return true };
        match (delta * bb).cmp(&(bd * b)) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => b < bb || (b == bb && self.chosen < *idx),
        }
    }

    fn descend(&mut self, next: usize, delta: usize) {
        let b = self.chosen.len();
        if b > delta && self.better(delta, b) {
            self.best = Some((delta, b, self.chosen.clone()));
        }
        let room = (self.hits.len() - next).min(self.max_blocks - b);
        if room == 0 {
            return;
        }
        // Δ never decreases as blocks are added, so Δ/(b + room) bounds the subtree.
        if let Some((bd, bb, _)) = self.best {
            if delta * bb > bd * (b + room) {
                return;
            }
        }
        for c in next..self.hits.len() {
            if self.chosen.len() >= self.max_blocks {
                break;
            }
            let mut d = delta;
            for &i in &self.hits[c] {
                self.counts[i] += 1;
                d = d.max(self.counts[i]);
            }
            self.chosen.push(c);
            self.descend(c + 1, d);
            self.chosen.pop();
            for &i in &self.hits[c] {
                self.counts[i] -= 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pentagon() -> CollusionPattern {
        CollusionPattern::new(5, vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![3, 4], vec![0, 4]]).unwrap()
    }

    fn pentagon_family() -> BlockFamily {
        BlockFamily::new(3, vec![vec![0, 1, 2], vec![1, 2, 3], vec![2, 3, 4], vec![0, 3, 4], vec![0, 1, 4]]).unwrap()
    }

    /// Smallest feasible Δ/b by enumerating every subfamily bitmask.
    fn brute_force_ratio(pattern: &CollusionPattern, k: usize) -> Option<Rational> {
        let cands = k_subsets(pattern.n_servers(), k);
        let mut best: Option<Rational> = None;
        for mask in 1u32..(1 << cands.len()) {
            let blocks = (0..cands.len()).filter(|i| mask >> i & 1 == 1).map(|i| cands[i].clone()).collect();
            let e = family_eval(pattern, &BlockFamily::new(k, blocks).unwrap());
            if e.feasible() && best.as_ref().is_none_or(|b| e.ratio < *b) {
                best = Some(e.ratio);
            }
        }
        best
    }

    #[test]
    fn subsets_are_lexicographic() {
        assert_eq!(k_subsets(4, 2), vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(k_subsets(3, 3), vec![vec![0, 1, 2]]);
        assert_eq!(k_subsets(5, 3).len(), 10);
        assert!(k_subsets(2, 3).is_empty());
    }

    #[test]
    fn eval_examples() {
        let e = family_eval(&pentagon(), &pentagon_family());
        assert_eq!((e.b, e.delta), (5, 4));
        assert_eq!(e.per_set_counts, vec![4; 5]);
        assert_eq!(e.ratio, Rational::new(4, 5));

        let e = family_eval(&pentagon(), &BlockFamily::all_subsets(5, 3));
        assert_eq!((e.b, e.delta), (10, 9));

        let far = CollusionPattern::new(6, vec![vec![0, 1]]).unwrap();
        let fam = BlockFamily::new(2, vec![vec![0, 2], vec![3, 4]]).unwrap();
        assert_eq!(family_eval(&far, &fam).per_set_counts, vec![1]);
    }

    #[test]
    fn pattern_validation() {
        assert!(matches!(CollusionPattern::new(3, vec![vec![0, 1], vec![1]]), Err(PatternError::NotAntichain { .. })));
        assert!(matches!(CollusionPattern::new(3, vec![vec![3]]), Err(PatternError::ServerOutOfRange { .. })));
        assert!(matches!(BlockFamily::new(2, vec![vec![0, 1, 2]]), Err(PatternError::WrongBlockSize { .. })));
        assert!(matches!(BlockFamily::new(2, vec![]), Err(PatternError::EmptyFamily)));
    }

    #[test]
    fn json_forms() {
        let p = CollusionPattern::from_json("[[0,1],[1,2],[2,3],[3,4],[0,4]]").unwrap();
        assert_eq!(p, pentagon());
        let p = CollusionPattern::from_json(r#"{"n_servers": 5, "maximal_sets": [[0,1],[1,2],[2,3],[3,4],[4,0]]}"#)
            .unwrap();
        assert_eq!(p, pentagon());
        let f = BlockFamily::from_json(r#"{"k": 3, "blocks": [[0,1,2],[1,2,3],[2,3,4],[0,3,4],[0,1,4]]}"#).unwrap();
        assert_eq!(f, pentagon_family());
        assert!(CollusionPattern::from_json("{").is_err());
    }

    #[test]
    fn pentagon_optimum() {
        let (fam, eval) = optimize_family(&pentagon(), 3, usize::MAX).unwrap();
        assert_eq!(eval.ratio, Rational::new(4, 5));
        assert_eq!(eval.b, 5);
        assert_eq!(brute_force_ratio(&pentagon(), 3), Some(Rational::new(4, 5)));
        assert_eq!(family_eval(&pentagon(), &fam), eval);
    }

    #[test]
    fn all_pairs_pattern_matches_full_family() {
        let pat = CollusionPattern::all_subsets(4, 2);
        let (_, eval) = optimize_family(&pat, 2, usize::MAX).unwrap();
        let full = family_eval(&pat, &BlockFamily::all_subsets(4, 2));
        assert_eq!(full.ratio, Rational::new(5, 6));
        assert!(eval.ratio <= full.ratio);
        assert_eq!(brute_force_ratio(&pat, 2), Some(eval.ratio));
    }

    #[test]
    fn whole_set_is_infeasible() {
        let pat = CollusionPattern::new(4, vec![vec![0, 1, 2, 3]]).unwrap();
        assert_eq!(optimize_family(&pat, 2, usize::MAX), Err(PatternError::Infeasible { k: 2 }));
    }

    #[test]
    fn budget_is_enforced() {
        let pat = CollusionPattern::all_subsets(8, 2);
        assert!(matches!(optimize_family(&pat, 3, 10), Err(PatternError::BudgetExceeded { candidates: 56 })));
    }

    #[test]
    fn block_cap_is_respected() {
        // Each pair misses only its complementary triple, so b ≤ 4 forces Δ = b.
        assert_eq!(optimize_family(&pentagon(), 3, 4), Err(PatternError::Infeasible { k: 3 }));
        let (fam, eval) = optimize_family(&pentagon(), 3, 5).unwrap();
        assert_eq!(fam.len(), 5);
        assert!(eval.feasible());
    }

    /// Exhaustive check against every subfamily for all small patterns
    /// drawn from a fixed list of shapes.
    #[test]
    fn optimizer_matches_brute_force() {
        let shapes: Vec<CollusionPattern> = vec![
            pentagon(),
            CollusionPattern::all_subsets(4, 1),
            CollusionPattern::all_subsets(5, 2),
            CollusionPattern::new(5, vec![vec![0, 1, 2], vec![3], vec![4]]).unwrap(),
            CollusionPattern::new(6, vec![vec![0, 1], vec![2, 3], vec![4, 5]]).unwrap(),
            CollusionPattern::new(4, vec![vec![0, 1], vec![2]]).unwrap(),
        ];
        for pat in &shapes {
            for k in 1..pat.n_servers() {
                if k_subsets(pat.n_servers(), k).len() > 12 {
                    continue;
                }
                let brute = brute_force_ratio(pat, k);
                let found = optimize_family(pat, k, usize::MAX).ok().map(|(_, e)| e.ratio);
                assert_eq!(found, brute, "{pat:?} k={k}");
            }
        }
    }

    /// Repeating blocks never beats the repeat-free optimum.
    #[test]
    fn multisets_do_not_improve() {
        use crate::field::{FieldRng, Seed};
        let pat = pentagon();
        let cands = k_subsets(5, 3);
        let best = brute_force_ratio(&pat, 3).unwrap();
        let mut rng = FieldRng::new(Seed(3));
        for _ in 0..2000 {
            let len = 1 + rng.below(15) as usize;
            let blocks = (0..len).map(|_| cands[rng.below(cands.len() as u64) as usize].clone()).collect();
            let e = family_eval(&pat, &BlockFamily::new(3, blocks).unwrap());
            if e.feasible() {
                assert!(e.ratio >= best);
            }
        }
    }

    #[test]
    fn relabeling_preserves_evaluation() {
        let perm = [3, 0, 4, 1, 2];
        let relabel = |sets: &[Vec<usize>]| -> Vec<Vec<usize>> {
            sets.iter().map(|s| s.iter().map(|&x| perm[x]).collect()).collect()
        };
        let pat = pentagon();
        let fam = pentagon_family();
        let pat2 = CollusionPattern::new(5, relabel(pat.maximal_sets())).unwrap();
        let fam2 = BlockFamily::new(3, relabel(fam.blocks())).unwrap();
        let (a, b) = (family_eval(&pat, &fam), family_eval(&pat2, &fam2));
        assert_eq!((a.b, a.delta, a.ratio), (b.b, b.delta, b.ratio));
    }
}
