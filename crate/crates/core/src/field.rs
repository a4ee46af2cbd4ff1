//! Prime-field arithmetic and dense linear algebra.
//!
//! Elements are plain `u64` values kept reduced in `[0, p)`. A [`PrimeField`]
//! carries the modulus and a Barrett constant, and every operation goes
//! through it. Matrices are row-major and do not remember their field; the
//! field is passed explicitly to anything that does arithmetic.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::ser::SerializeSeq;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

/// Default modulus, the Fermat prime 2^16 + 1.
pub const DEFAULT_MODULUS: u64 = 65_537;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("modulus {0} is not a prime")]
    NotPrime(u64),
    #[error("linear system has no unique solution")]
    NoSolution,
    #[error("dimension mismatch: {0}")]
    Shape(String),
}

/// The prime field F_p.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimeField {
    p: u64,
    // floor(2^64 / p); only used when p < 2^32 so that products fit in u64.
    barrett: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        let barrett = if p < (1 << 32) { (u128::from(u64::MAX) + 1).div_euclid(u128::from(p)) as u64 } else { 0 };
        Ok(Self { p, barrett })
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.p
    }

    #[inline]
    fn reduce(&self, x: u64) -> u64 {
        debug_assert!(self.p < (1 << 32));
        let q = ((u128::from(x) * u128::from(self.barrett)) >> 64) as u64;
        let r = x - q * self.p;
        if r >= self.p {
            r - self.p
        } else {
            r
        }
    }

    /// Reduces an arbitrary integer into the field.
    #[inline]
    pub fn elem(&self, x: u64) -> u64 {
        x % self.p
    }

    /// Maps a signed integer into the field.
    pub fn from_i64(&self, x: i64) -> u64 {
        x.rem_euclid(self.p as i64) as u64
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        if self.barrett != 0 {
            self.reduce(a * b)
        } else {
            (u128::from(a) * u128::from(b) % u128::from(self.p)) as u64
        }
    }

    /// Returns `acc + a * b`.
    #[inline]
    pub fn mul_add(&self, acc: u64, a: u64, b: u64) -> u64 {
        if self.barrett != 0 {
            // acc < p and a*b < p^2, so the sum stays below 2^64.
            self.reduce(acc + a * b)
        } else {
            ((u128::from(acc) + u128::from(a) * u128::from(b)) % u128::from(self.p)) as u64
        }
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse. Panics on zero.
    pub fn inv(&self, a: u64) -> u64 {
        assert!(a != 0, "inverse of zero");
        self.pow(a, self.p - 2)
    }

    pub fn dot(&self, a: &[u64], b: &[u64]) -> u64 {
        debug_assert_eq!(a.len(), b.len());
        a.iter().zip(b).fold(0, |acc, (&x, &y)| self.mul_add(acc, x, y))
    }

    /// `dst += c * src`, entrywise.
    #[inline]
    pub fn axpy(&self, dst: &mut [u64], c: u64, src: &[u64]) {
        if c == 0 {
            return;
        }
        for (d, &s) in dst.iter_mut().zip(src) {
            *d = self.mul_add(*d, c, s);
        }
    }

    /// Rank of `a` over this field.
    pub fn rank(&self, a: &Matrix) -> usize {
        let mut m = a.clone();
        self.row_reduce(&mut m, a.cols)
    }

    /// Solves `a * x = b` for `x`.
    ///
    /// Succeeds only when `a` has full column rank and the system is
    /// consistent; over-determined consistent systems are accepted.
    pub fn solve(&self, a: &Matrix, b: &Matrix) -> Result<Matrix, FieldError> {
        if a.rows != b.rows {
            return Err(FieldError::Shape(format!("a has {} rows, b has {}", a.rows, b.rows)));
        }
        let n = a.cols;
        let r = b.cols;
        let mut aug = Matrix::zeros(a.rows, n + r);
        for i in 0..a.rows {
            aug.row_mut(i)[..n].copy_from_slice(a.row(i));
            aug.row_mut(i)[n..].copy_from_slice(b.row(i));
        }
        let rank = self.rref(&mut aug, n);
        if rank < n {
            return Err(FieldError::NoSolution);
        }
        // Rows below the pivots must be entirely zero on the right-hand side.
        for i in n..aug.rows {
            if aug.row(i)[n..].iter().any(|&v| v != 0) {
                return Err(FieldError::NoSolution);
            }
        }
        let mut x = Matrix::zeros(n, r);
        for i in 0..n {
            x.row_mut(i).copy_from_slice(&aug.row(i)[n..]);
        }
        Ok(x)
    }

    /// Inverse of a square matrix.
    pub fn invert(&self, a: &Matrix) -> Result<Matrix, FieldError> {
        if a.rows != a.cols {
            return Err(FieldError::Shape("inverse of a non-square matrix".into()));
        }
        self.solve(a, &Matrix::identity(a.rows))
    }

    pub fn matmul(&self, a: &Matrix, b: &Matrix) -> Matrix {
        assert_eq!(a.cols, b.rows, "matmul shape mismatch");
        let mut out = Matrix::zeros(a.rows, b.cols);
        for i in 0..a.rows {
            let (arow, orow) = (a.row(i), &mut out.data[i * b.cols..(i + 1) * b.cols]);
            for (k, &c) in arow.iter().enumerate() {
                self.axpy(orow, c, b.row(k));
            }
        }
        out
    }

    /// Forward elimination restricted to the first `pivot_cols` columns.
    /// Returns the rank of that leading block.
    fn row_reduce(&self, m: &mut Matrix, pivot_cols: usize) -> usize {
        let mut rank = 0;
        for c in 0..pivot_cols {
            if rank == m.rows {
                break;
            }
            let Some(piv) = (rank..m.rows).find(|&r| m.get(r, c) != 0) else {
                continue;
            };
            m.swap_rows(rank, piv);
            let inv = self.inv(m.get(rank, c));
            for v in &mut m.row_mut(rank)[c..] {
                *v = self.mul(*v, inv);
            }
            let (top, bottom) = m.data.split_at_mut((rank + 1) * m.cols);
            let pivot_row = &top[rank * m.cols..];
            for row in bottom.chunks_exact_mut(m.cols) {
                let f = row[c];
                if f != 0 {
                    self.axpy(&mut row[c..], self.neg(f), &pivot_row[c..]);
                }
            }
            rank += 1;
        }
        rank
    }

    /// Reduced row echelon form on the first `pivot_cols` columns. Pivots
    /// land on the diagonal when the leading block has full column rank.
    fn rref(&self, m: &mut Matrix, pivot_cols: usize) -> usize {
        let rank = self.row_reduce(m, pivot_cols);
        // Back substitution; pivot columns are found by scanning each row.
        for r in (0..rank).rev() {
            let c = m.row(r).iter().position(|&v| v != 0).expect("pivot row is nonzero");
            let (top, rest) = m.data.split_at_mut(r * m.cols);
            let pivot_row = &rest[..m.cols];
            for row in top.chunks_exact_mut(m.cols) {
                let f = row[c];
                if f != 0 {
                    self.axpy(&mut row[c..], self.neg(f), &pivot_row[c..]);
                }
            }
        }
        rank
    }

    /// Samples an `l x l` invertible matrix by rejection: draw uniform
    /// matrices until one has full rank.
    pub fn sample_invertible(&self, l: usize, seed: Seed) -> Matrix {
        assert!(l >= 1);
        let mut rng = FieldRng::new(seed);
        loop {
            let m = Matrix::from_vec(l, l, (0..l * l).map(|_| rng.element(self)).collect());
            if self.rank(&m) == l {
                return m;
            }
        }
    }
}

/// Deterministic Miller-Rabin, exact for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for sp in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(sp) {
            return n == sp;
        }
    }
    let mulm = |a: u64, b: u64| (u128::from(a) * u128::from(b) % u128::from(n)) as u64;
    let powm = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulm(acc, b);
            }
            b = mulm(b, b);
            e >>= 1;
        }
        acc
    };
    let (mut d, mut s) = (n - 1, 0);
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powm(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulm(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Dense row-major matrix of field elements.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(try_from = "Vec<Vec<u64>>")]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<u64>) -> Self {
        assert_eq!(rows * cols, data.len(), "matrix data length");
        Self { rows, cols, data }
    }

    /// Builds a matrix from equal-length rows. An empty slice gives a 0x0 matrix.
    pub fn from_rows<R: AsRef<[u64]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.as_ref().len(), cols, "ragged rows");
            data.extend_from_slice(r.as_ref());
        }
        Self { rows: rows.len(), cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[u64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<u64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for c in 0..self.cols {
                self.data.swap(a * self.cols + c, b * self.cols + c);
            }
        }
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    /// The rows with the given indices, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Matrix { rows: idx.len(), cols: self.cols, data }
    }

    /// Contiguous row range `[start, start + len)`.
    pub fn row_range(&self, start: usize, len: usize) -> Matrix {
        Matrix { rows: len, cols: self.cols, data: self.data[start * self.cols..(start + len) * self.cols].to_vec() }
    }

    pub fn select_cols(&self, idx: &[usize]) -> Matrix {
        let mut m = Matrix::zeros(self.rows, idx.len());
        for r in 0..self.rows {
            for (j, &c) in idx.iter().enumerate() {
                m.set(r, j, self.get(r, c));
            }
        }
        m
    }

    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.rows))?;
        for r in 0..self.rows {
            seq.serialize_element(self.row(r))?;
        }
        seq.end()
    }
}

impl TryFrom<Vec<Vec<u64>>> for Matrix {
    type Error = String;

    fn try_from(rows: Vec<Vec<u64>>) -> Result<Self, Self::Error> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err("ragged matrix rows".into());
        }
        Ok(Matrix::from_rows(&rows))
    }
}

/// A 64-bit seed. Equal seeds and parameters give bit-identical output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

impl Seed {
    /// Derives an independent sub-seed for the labelled purpose. Uses the
    /// SplitMix64 finalizer over `seed ^ mix(label)`.
    pub fn child(self, label: u64) -> Seed {
        Seed(splitmix64(self.0 ^ splitmix64(label.wrapping_add(0x9e37_79b9_7f4a_7c15))))
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Counter-based generator (ChaCha8) mapped onto field elements by rejection
/// sampling below the largest multiple of p that fits in 64 bits.
pub struct FieldRng {
    inner: ChaCha8Rng,
}

impl FieldRng {
    pub fn new(seed: Seed) -> Self {
        Self { inner: ChaCha8Rng::seed_from_u64(seed.0) }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform element of `[0, p)`.
    pub fn element(&mut self, f: &PrimeField) -> u64 {
        self.below(f.modulus())
    }

    /// Uniform element of `[1, p)`.
    pub fn nonzero(&mut self, f: &PrimeField) -> u64 {
        loop {
            let x = self.element(f);
            if x != 0 {
                return x;
            }
        }
    }

    /// Uniform integer in `[0, n)`.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        // Largest multiple of n not exceeding 2^64.
        let limit = (1u128 << 64) / u128::from(n) * u128::from(n);
        loop {
            let x = self.inner.next_u64();
            if u128::from(x) < limit {
                return x % n;
            }
        }
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, v: &mut [T]) {
        for i in (1..v.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            v.swap(i, j);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    #[test]
    fn rank_examples() {
        let f5 = f(5);
        assert_eq!(f5.rank(&Matrix::identity(3)), 3);
        assert_eq!(f5.rank(&Matrix::zeros(2, 2)), 0);
        let a = Matrix::from_rows(&[[1, 1], [1, 2], [1, 3], [1, 4]]);
        assert_eq!(f5.rank(&a), 2);
    }

    #[test]
    fn solve_examples() {
        let f5 = f(5);
        let b = Matrix::from_rows(&[[3, 1], [4, 0]]);
        assert_eq!(f5.solve(&Matrix::identity(2), &b).unwrap(), b);

        let a = Matrix::from_rows(&[[1, 1], [1, 2]]);
        let b = Matrix::from_rows(&[[3], [4]]);
        assert_eq!(f5.solve(&a, &b).unwrap(), Matrix::from_rows(&[[2], [1]]));

        let a = Matrix::from_rows(&[[1, 1], [2, 2]]);
        let b = Matrix::from_rows(&[[1], [0]]);
        assert_eq!(f5.solve(&a, &b), Err(FieldError::NoSolution));
    }

    #[test]
    fn solve_overdetermined() {
        let f7 = f(7);
        let a = Matrix::from_rows(&[[1, 0], [0, 1], [1, 1]]);
        let ok = Matrix::from_rows(&[[2], [3], [5]]);
        assert_eq!(f7.solve(&a, &ok).unwrap(), Matrix::from_rows(&[[2], [3]]));
        let bad = Matrix::from_rows(&[[2], [3], [6]]);
        assert_eq!(f7.solve(&a, &bad), Err(FieldError::NoSolution));
        // underdetermined
        let a = Matrix::from_rows(&[[1, 1]]);
        assert_eq!(f7.solve(&a, &Matrix::from_rows(&[[1]])), Err(FieldError::NoSolution));
    }

    #[test]
    fn invertible_sampling() {
        let fp = f(DEFAULT_MODULUS);
        let one = fp.sample_invertible(1, Seed(9));
        assert_ne!(one.get(0, 0), 0);
        let m = fp.sample_invertible(3, Seed(1));
        assert_eq!(fp.rank(&m), 3);
        assert_eq!(m, fp.sample_invertible(3, Seed(1)));
        // small field forces rejections
        let f2 = f(2);
        for s in 0..20 {
            assert_eq!(f2.rank(&f2.sample_invertible(4, Seed(s))), 4);
        }
    }

    #[test]
    fn distinct_seeds_give_distinct_matrices() {
        let fp = f(DEFAULT_MODULUS);
        for s in 0..100u64 {
            let a = fp.sample_invertible(4, Seed(2 * s));
            let b = fp.sample_invertible(4, Seed(2 * s + 1));
            assert_ne!(a, b);
        }
    }

    #[test]
    fn primality() {
        let primes: Vec<u64> = (0..60).filter(|&n| is_prime(n)).collect();
        assert_eq!(primes, [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]);
        assert!(is_prime(65_537));
        assert!(is_prime(18_446_744_073_709_551_557));
        assert!(!is_prime(3_215_031_751));
        assert!(PrimeField::new(65_536).is_err());
    }

    #[test]
    fn large_modulus_arithmetic() {
        let p = 18_446_744_073_709_551_557;
        let fp = f(p);
        let a = p - 1;
        assert_eq!(fp.mul(a, a), 1);
        assert_eq!(fp.mul(fp.inv(12345), 12345), 1);
        assert_eq!(fp.mul_add(5, a, 2), 3);
    }

    #[test]
    fn rng_element_is_in_range() {
        let fp = f(7);
        let mut rng = FieldRng::new(Seed(3));
        let mut seen = [false; 7];
        for _ in 0..500 {
            let x = rng.element(&fp);
            seen[x as usize] = true;
        }
        assert!(seen.iter().all(|&s| s));
        assert_ne!(Seed(1).child(0), Seed(1).child(1));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn matrix(p: u64, max: usize) -> impl Strategy<Value = Matrix> {
            (1..=max, 1..=max).prop_flat_map(move |(r, c)| {
                proptest::collection::vec(0..p, r * c).prop_map(move |d| Matrix::from_vec(r, c, d))
            })
        }

        proptest! {
            #[test]
            fn rank_of_transpose(a in matrix(7, 6)) {
                let f7 = f(7);
                prop_assert_eq!(f7.rank(&a), f7.rank(&a.transpose()));
            }

            #[test]
            fn solve_round_trip(seed in any::<u64>(), n in 1usize..7, r in 1usize..4, b in proptest::collection::vec(0u64..65_537, 18)) {
                let fp = f(DEFAULT_MODULUS);
                let a = fp.sample_invertible(n, Seed(seed));
                let b = Matrix::from_vec(n, r, b.into_iter().cycle().take(n * r).collect());
                let x = fp.solve(&a, &b).unwrap();
                prop_assert_eq!(fp.matmul(&a, &x), b);
            }
        }
    }
}
