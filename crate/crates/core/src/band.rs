//! Symmetric band matrices.
//!
//! Every Hamiltonian in this crate is banded in its natural product basis, so
//! operators are assembled here first and only densified when a full spectrum
//! is needed.

use nalgebra::DMatrix;

/// A real symmetric matrix with `H[i][j] = 0` whenever `|i − j| > bw`.
///
/// Only the lower band is stored, row by row: entry `(i, i − d)` lives at
/// `data[i * (bw + 1) + d]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymBand {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl SymBand {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self { n, bw, data: vec![0.0; n * (bw + 1)] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut b = Self::zeros(diag.len(), 0);
        b.data.copy_from_slice(diag);
        b
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        let d = hi - lo;
        (d <= self.bw).then(|| hi * (self.bw + 1) + d)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.data[s])
    }

    /// Sets both `(i, j)` and `(j, i)`.
    ///
    /// # Panics
    /// If the entry lies outside the band.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let s = self.slot(i, j).expect("entry outside band");
        self.data[s] = value;
    }

    pub fn add_to(&mut self, i: usize, j: usize, value: f64) {
        let s = self.slot(i, j).expect("entry outside band");
        self.data[s] += value;
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.data[i * (self.bw + 1)]).collect()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { n: self.n, bw: self.bw, data: self.data.iter().map(|v| v * s).collect() }
    }

    fn widened(&self, bw: usize) -> Self {
        if bw == self.bw {
            return self.clone();
        }
        let mut out = Self::zeros(self.n, bw);
        for i in 0..self.n {
            for d in 0..=self.bw.min(i) {
                out.data[i * (bw + 1) + d] = self.data[i * (self.bw + 1) + d];
            }
        }
        out
    }

    /// `self + s · other`.
    pub fn add_scaled(&self, other: &SymBand, s: f64) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let bw = self.bw.max(other.bw);
        let mut out = self.widened(bw);
        for i in 0..other.n {
            for d in 0..=other.bw.min(i) {
                out.data[i * (bw + 1) + d] += s * other.data[i * (other.bw + 1) + d];
            }
        }
        out
    }

    /// `(i, j)` entry of the ordinary product `self · other`.
    fn product_entry(&self, other: &SymBand, i: usize, j: usize) -> f64 {
        let lo = i.saturating_sub(self.bw).max(j.saturating_sub(other.bw));
        let hi = (i + self.bw).min(j + other.bw).min(self.n - 1);
        (lo..=hi).map(|k| self.get(i, k) * other.get(k, j)).sum()
    }

    /// Symmetrized product `(AB + BA) / 2`.
    ///
    /// Equals `AB` when the factors commute (powers of one matrix), and is half
    /// the anticommutator otherwise.
    pub fn jordan(&self, other: &SymBand) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let bw = (self.bw + other.bw).min(self.n.saturating_sub(1));
        let mut out = Self::zeros(self.n, bw);
        for i in 0..self.n {
            for d in 0..=bw.min(i) {
                let j = i - d;
                let v = 0.5 * (self.product_entry(other, i, j) + self.product_entry(other, j, i));
                out.data[i * (bw + 1) + d] = v;
            }
        }
        out
    }

    /// Anticommutator `AB + BA`, built from the two matrix products.
    pub fn anticommutator(&self, other: &SymBand) -> Self {
        self.jordan(other).scaled(2.0)
    }

    pub fn powi(&self, k: u32) -> Self {
        match k {
            0 => Self::identity(self.n),
            1 => self.clone(),
            _ => {
                let half = self.powi(k / 2);
                let sq = half.jordan(&half);
                if k % 2 == 0 {
                    sq
                } else {
                    sq.jordan(self)
                }
            }
        }
    }

    /// Kronecker product `A ⊗ B` with row index `p · dim(B) + q`.
    pub fn kron(a: &SymBand, b: &SymBand) -> Self {
        let nb = b.n;
        let n = a.n * nb;
        let bw = (a.bw * nb + b.bw).min(n.saturating_sub(1));
        let mut out = Self::zeros(n, bw);
        for p in 0..a.n {
            for r in p.saturating_sub(a.bw)..=(p + a.bw).min(a.n - 1) {
                let av = a.get(p, r);
                if av == 0.0 {
                    continue;
                }
                for q in 0..nb {
                    for s in q.saturating_sub(b.bw)..=(q + b.bw).min(nb - 1) {
                        let (i, j) = (p * nb + q, r * nb + s);
                        if i >= j {
                            out.data[i * (bw + 1) + (i - j)] = av * b.get(q, s);
                        }
                    }
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let row = i * (self.bw + 1);
            y[i] += self.data[row] * x[i];
            for d in 1..=self.bw.min(i) {
                let v = self.data[row + d];
                y[i] += v * x[i - d];
                y[i - d] += v * x[i];
            }
        }
        y
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Principal submatrix on the (sorted) index set `keep`.
    pub fn restrict(&self, keep: &[usize]) -> Self {
        let m = keep.len();
        let mut bw = 0;
        for a in 0..m {
            for b in (0..a).rev() {
                if keep[a] - keep[b] > self.bw {
                    break;
                }
                if self.get(keep[a], keep[b]) != 0.0 {
                    bw = bw.max(a - b);
                }
            }
        }
        let mut out = Self::zeros(m, bw);
        for a in 0..m {
            for d in 0..=bw.min(a) {
                out.data[a * (bw + 1) + d] = self.get(keep[a], keep[a - d]);
            }
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// Gershgorin lower and upper bounds on the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let mut radius = vec![0.0; self.n];
        for i in 0..self.n {
            for d in 1..=self.bw.min(i) {
                let v = self.data[i * (self.bw + 1) + d].abs();
                radius[i] += v;
                radius[i - d] += v;
            }
        }
        let diag = self.diagonal();
        let lo = diag.iter().zip(&radius).map(|(d, r)| d - r).fold(f64::INFINITY, f64::min);
        let hi = diag.iter().zip(&radius).map(|(d, r)| d + r).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn random_band(n: usize, bw: usize, vals: &[f64]) -> SymBand {
        let mut b = SymBand::zeros(n, bw);
        let mut k = 0;
        for i in 0..n {
            for d in 0..=bw.min(i) {
                b.set(i, i - d, vals[k % vals.len()]);
                k += 1;
            }
        }
        b
    }

    #[test]
    fn kron_matches_dense() {
        let a = random_band(3, 1, &[1.0, 2.0, -0.5, 3.0]);
        let b = random_band(4, 2, &[0.3, -1.0, 2.5]);
        let dense = a.to_dense().kronecker(&b.to_dense());
        assert_eq!(SymBand::kron(&a, &b).to_dense(), dense);
    }

    #[test]
    fn restrict_keeps_entries() {
        let a = random_band(6, 2, &[1.0, 2.0, 3.0, 4.0, 5.0]);
        let keep = [0, 2, 4];
        let r = a.restrict(&keep);
        for (x, &i) in keep.iter().enumerate() {
            for (y, &j) in keep.iter().enumerate() {
                assert_eq!(r.get(x, y), a.get(i, j));
            }
        }
    }

    proptest! {
        #[test]
        fn jordan_and_matvec_match_dense(vals in prop::collection::vec(-2.0f64..2.0, 4..20),
                                         vals2 in prop::collection::vec(-2.0f64..2.0, 4..20),
                                         n in 2usize..9, bw in 0usize..3, bw2 in 0usize..3) {
            let a = random_band(n, bw, &vals);
            let b = random_band(n, bw2, &vals2);
            let (da, db) = (a.to_dense(), b.to_dense());
            let expect = (&da * &db + &db * &da) * 0.5;
            let got = a.jordan(&b).to_dense();
            prop_assert!((got - expect).amax() < 1e-12);
            let x: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
            let y = a.matvec(&x);
            let yd = &da * nalgebra::DVector::from_vec(x);
            for i in 0..n {
                prop_assert!((y[i] - yd[i]).abs() < 1e-12);
            }
            let p3 = a.powi(3).to_dense();
            prop_assert!((p3 - &da * &da * &da).amax() < 1e-9);
        }
    }
}
