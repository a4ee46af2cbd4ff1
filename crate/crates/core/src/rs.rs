//! Reed-Solomon realizations of the MDS codes used by the schemes.
//!
//! An [`RsCode`] of length n and dimension k evaluates message polynomials of
//! degree < k at n distinct nonzero points. Its transposed generator `gen_t`
//! is the n x k Vandermonde matrix, so a codeword is `gen_t * message`.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use thiserror::Error;

use crate::field::{Matrix, PrimeField};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodeError {
    #[error("invalid code shape n={n}, k={k} for modulus {p}")]
    InvalidShape { n: usize, k: usize, p: u64 },
    #[error("{known} known positions, need at least {k}")]
    TooFewKnown { known: usize, k: usize },
    #[error("known values are not consistent with any codeword")]
    NotACodeword,
    #[error("no codeword within the unique decoding radius")]
    DecodingFailure,
    #[error("puncturing keeps {kept} positions, dimension is {k}")]
    TooShort { kept: usize, k: usize },
    #[error("position {0} out of range")]
    BadPosition(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RsCode {
    n: usize,
    k: usize,
    eval_points: Vec<u64>,
    gen_t: Matrix,
}

impl RsCode {
    /// The code on evaluation points `1..=n`.
    pub fn transposed_generator(f: &PrimeField, n: usize, k: usize) -> Result<Self, CodeError> {
        // Points 1..n must stay distinct and nonzero mod p.
        if k == 0 || k > n || n as u64 >= f.modulus() {
            return Err(CodeError::InvalidShape { n, k, p: f.modulus() });
        }
        Ok(Self::on_points(f, (1..=n as u64).collect(), k))
    }

    fn on_points(f: &PrimeField, eval_points: Vec<u64>, k: usize) -> Self {
        let n = eval_points.len();
        let mut gen_t = Matrix::zeros(n, k);
        for (i, &x) in eval_points.iter().enumerate() {
            let mut v = 1;
            for j in 0..k {
                gen_t.set(i, j, v);
                v = f.mul(v, x);
            }
        }
        Self { n, k, eval_points, gen_t }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn eval_points(&self) -> &[u64] {
        &self.eval_points
    }

    pub fn gen_t(&self) -> &Matrix {
        &self.gen_t
    }

    /// Number of errors the bounded-distance decoder corrects.
    pub fn radius(&self) -> usize {
        (self.n - self.k) / 2
    }

    pub fn encode(&self, f: &PrimeField, message: &[u64]) -> Vec<u64> {
        assert_eq!(message.len(), self.k, "message length");
        self.eval_points.iter().map(|&x| poly_eval(f, message, x)).collect()
    }

    /// The codeword agreeing with `known`. Uses the first k known positions
    /// for interpolation and checks every remaining one.
    pub fn erasure_complete(&self, f: &PrimeField, known: &BTreeMap<usize, u64>) -> Result<Vec<u64>, CodeError> {
        if known.len() < self.k {
            return Err(CodeError::TooFewKnown { known: known.len(), k: self.k });
        }
        if let Some((&pos, _)) = known.iter().next_back().filter(|(&p, _)| p >= self.n) {
            return Err(CodeError::BadPosition(pos));
        }
        let (xs, ys): (Vec<u64>, Vec<u64>) =
            known.iter().take(self.k).map(|(&pos, &v)| (self.eval_points[pos], v)).unzip();
        let msg = interpolate(f, &xs, &ys);
        let word = self.encode(f, &pad(msg, self.k));
        if known.iter().skip(self.k).any(|(&pos, &v)| word[pos] != v) {
            return Err(CodeError::NotACodeword);
        }
        Ok(word)
    }

    /// Recovers the message polynomial coefficients of a full codeword.
    pub fn message_of(&self, f: &PrimeField, word: &[u64]) -> Result<Vec<u64>, CodeError> {
        let known: BTreeMap<usize, u64> = word.iter().copied().enumerate().collect();
        let full = self.erasure_complete(f, &known)?;
        debug_assert_eq!(full, word);
        Ok(pad(interpolate(f, &self.eval_points[..self.k], &word[..self.k]), self.k))
    }

    /// Bounded-distance decoding up to `radius()` errors.
    ///
    /// Berlekamp-Welch key equation solved by the partial extended Euclidean
    /// algorithm (Gao's formulation): interpolate the received word, run
    /// Euclid against the vanishing polynomial of the evaluation points until
    /// the remainder degree drops below (n + k) / 2, then divide out the
    /// error locator.
    pub fn error_correct(&self, f: &PrimeField, received: &[u64]) -> Result<Vec<u64>, CodeError> {
        assert_eq!(received.len(), self.n, "received length");
        let g1 = interpolate(f, &self.eval_points, received);
        let g0 = vanishing(f, &self.eval_points);
        let threshold = self.n + self.k; // continue while 2 * deg(r) >= n + k
        let (mut r_prev, mut r_cur) = (g0, g1);
        let (mut v_prev, mut v_cur) = (Vec::new(), vec![1u64]);
        while degree(&r_cur).is_some_and(|d| 2 * d >= threshold) {
            let (q, rem) = poly_divmod(f, &r_prev, &r_cur);
            let v_next = poly_sub(f, &v_prev, &poly_mul(f, &q, &v_cur));
            r_prev = std::mem::replace(&mut r_cur, rem);
            v_prev = std::mem::replace(&mut v_cur, v_next);
        }
        let (msg, rem) = poly_divmod(f, &r_cur, &v_cur);
        if degree(&rem).is_some() || msg.len() > self.k {
            return Err(CodeError::DecodingFailure);
        }
        let word = self.encode(f, &pad(msg, self.k));
        let dist = word.iter().zip(received).filter(|(a, b)| a != b).count();
        if dist > self.radius() {
            return Err(CodeError::DecodingFailure);
        }
        Ok(word)
    }

    /// The code restricted to the kept positions (ascending order).
    pub fn puncture(&self, f: &PrimeField, keep: &BTreeSet<usize>) -> Result<RsCode, CodeError> {
        if keep.len() < self.k {
            return Err(CodeError::TooShort { kept: keep.len(), k: self.k });
        }
        if let Some(&bad) = keep.iter().find(|&&p| p >= self.n) {
            return Err(CodeError::BadPosition(bad));
        }
        Ok(Self::on_points(f, keep.iter().map(|&p| self.eval_points[p]).collect(), self.k))
    }
}

fn pad(mut v: Vec<u64>, len: usize) -> Vec<u64> {
    debug_assert!(v.len() <= len);
    v.resize(len, 0);
    v
}

// Polynomials are coefficient vectors, lowest degree first, with no trailing
// zeros. The zero polynomial is the empty vector.

fn trim(mut v: Vec<u64>) -> Vec<u64> {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

fn degree(p: &[u64]) -> Option<usize> {
    p.iter().rposition(|&c| c != 0)
}

fn poly_eval(f: &PrimeField, p: &[u64], x: u64) -> u64 {
    p.iter().rev().fold(0, |acc, &c| f.mul_add(c, acc, x))
}

fn poly_sub(f: &PrimeField, a: &[u64], b: &[u64]) -> Vec<u64> {
    let n = a.len().max(b.len());
    let out = (0..n).map(|i| f.sub(a.get(i).copied().unwrap_or(0), b.get(i).copied().unwrap_or(0))).collect();
    trim(out)
}

fn poly_mul(f: &PrimeField, a: &[u64], b: &[u64]) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        f.axpy(&mut out[i..i + b.len()], x, b);
    }
    trim(out)
}

fn poly_divmod(f: &PrimeField, a: &[u64], b: &[u64]) -> (Vec<u64>, Vec<u64>) {
    let db = degree(b).expect("division by the zero polynomial");
    let mut rem = trim(a.to_vec());
    if rem.len() <= db {
        return (Vec::new(), rem);
    }
    let lead_inv = f.inv(b[db]);
    let mut q = vec![0; rem.len() - db];
    while let Some(dr) = degree(&rem).filter(|&d| d >= db) {
        let c = f.mul(rem[dr], lead_inv);
        q[dr - db] = c;
        f.axpy(&mut rem[dr - db..=dr], f.neg(c), &b[..=db]);
        rem.truncate(dr);
        rem = trim(rem);
    }
    (trim(q), rem)
}

/// Prod (x - a_i).
fn vanishing(f: &PrimeField, points: &[u64]) -> Vec<u64> {
    let mut acc = vec![1u64];
    for &a in points {
        let mut next = vec![0; acc.len() + 1];
        for (i, &c) in acc.iter().enumerate() {
            next[i + 1] = f.add(next[i + 1], c);
            next[i] = f.sub(next[i], f.mul(c, a));
        }
        acc = next;
    }
    acc
}

/// Lagrange interpolation through `(xs[i], ys[i])` via Newton divided
/// differences. Returns monomial coefficients (trimmed).
pub(crate) fn interpolate(f: &PrimeField, xs: &[u64], ys: &[u64]) -> Vec<u64> {
    let n = xs.len();
    assert_eq!(n, ys.len());
    let mut coef = ys.to_vec();
    for j in 1..n {
        for i in (j..n).rev() {
            let num = f.sub(coef[i], coef[i - 1]);
            let den = f.sub(xs[i], xs[i - j]);
            coef[i] = f.mul(num, f.inv(den));
        }
    }
    // Expand the Newton form from the innermost term outwards.
    let mut poly = vec![0u64; n];
    let mut len = 0;
    for i in (0..n).rev() {
        // poly = poly * (x - xs[i]) + coef[i]
        let mut next = vec![0u64; n];
        for d in 0..len {
            next[d + 1] = f.add(next[d + 1], poly[d]);
            next[d] = f.sub(next[d], f.mul(poly[d], xs[i]));
        }
        next[0] = f.add(next[0], coef[i]);
        len = (len + 1).min(n);
        poly = next;
    }
    trim(poly)
}
