//! Eigensolvers and spectral diagnostics.

pub mod banded;
pub mod cutoff;
pub mod precise;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::operator::{asymmetry, Operator};

pub use banded::{ground_state, GroundState};
pub use cutoff::{converge_cutoff, converge_cutoff_with_schedule, CutoffProbe, CutoffResult, CUTOFF_SCHEDULE};

/// Largest `‖[H, P]‖` accepted by `parity_decompose`.
pub const PARITY_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralResult {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal columns matching `eigenvalues`.
    pub eigenvectors: Option<DMatrix<f64>>,
    pub ground_energy: f64,
    /// `E₁ − E₀`, absent for a one-dimensional space.
    pub gap: Option<f64>,
    /// Parity sector (±1) of each eigenvalue.
    pub parity_labels: Option<Vec<i8>>,
}

impl SpectralResult {
    fn from_sorted(eigenvalues: Vec<f64>, eigenvectors: Option<DMatrix<f64>>, parity_labels: Option<Vec<i8>>) -> Self {
        let ground_energy = eigenvalues[0];
        let gap = eigenvalues.get(1).map(|e1| e1 - ground_energy);
        Self { eigenvalues, eigenvectors, ground_energy, gap, parity_labels }
    }
}

/// Full spectrum of a symmetric operator.
pub fn eig_sym(h: &Operator, want_vectors: bool) -> Result<SpectralResult> {
    eig_sym_matrix(h.matrix(), want_vectors)
}

/// Full spectrum of an exactly symmetric matrix. Each eigenvector is signed so
/// that its largest-magnitude component is positive.
pub fn eig_sym_matrix(m: &DMatrix<f64>, want_vectors: bool) -> Result<SpectralResult> {
    if !m.is_square() || m.nrows() == 0 {
        return Err(Error::ContractViolation(format!("expected a non-empty square matrix, got {}x{}", m.nrows(), m.ncols())));
    }
    let asym = asymmetry(m);
    if asym != 0.0 {
        return Err(Error::ContractViolation(format!("matrix is not symmetric (max |M - M^T| = {asym:e})")));
    }
    if !want_vectors {
        let mut values: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
        values.sort_by(f64::total_cmp);
        return Ok(SpectralResult::from_sorted(values, None, None));
    }
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::zeros(m.nrows(), m.nrows());
    for (col, &k) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(k).into_owned();
        let lead = v.iter().copied().fold(0.0f64, |best, x| if x.abs() > best.abs() { x } else { best });
        if lead < 0.0 {
            v.neg_mut();
        }
        vectors.set_column(col, &v);
    }
    Ok(SpectralResult::from_sorted(values, Some(vectors), None))
}

fn sector_indices(parity: &[f64]) -> (Vec<usize>, Vec<usize>) {
    let even = (0..parity.len()).filter(|&k| parity[k] > 0.0).collect();
    let odd = (0..parity.len()).filter(|&k| parity[k] < 0.0).collect();
    (even, odd)
}

/// Splits `H` into its `+1` and `−1` parity blocks.
pub fn parity_decompose(h: &Operator, parity: &[f64]) -> Result<(Operator, Operator)> {
    check_parity(h, parity)?;
    let (even, odd) = sector_indices(parity);
    Ok((h.restrict(&even), h.restrict(&odd)))
}

fn check_parity(h: &Operator, parity: &[f64]) -> Result<()> {
    if parity.len() != h.dim() || parity.iter().any(|&p| p != 1.0 && p != -1.0) {
        return Err(crate::error::invalid("parity must list ±1 for every basis state"));
    }
    let leak = h.commutator_with_diagonal(parity);
    if leak > PARITY_TOL {
        return Err(Error::NotBlockDiagonal(leak));
    }
    Ok(())
}

/// Full spectrum assembled from the two parity blocks, labeled by sector.
pub fn eig_sym_with_parity(h: &Operator, parity: &[f64]) -> Result<SpectralResult> {
    let (even, odd) = parity_decompose(h, parity)?;
    let mut labeled: Vec<(f64, i8)> = Vec::with_capacity(h.dim());
    for (block, label) in [(even, 1i8), (odd, -1i8)] {
        if block.dim() > 0 {
            labeled.extend(eig_sym(&block, false)?.eigenvalues.into_iter().map(|e| (e, label)));
        }
    }
    labeled.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
    let (values, labels) = labeled.into_iter().unzip();
    Ok(SpectralResult::from_sorted(values, None, Some(labels)))
}

/// Equal-width histogram over `[lo, hi]`; bins are closed-open except the last.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.counts.len() as f64
    }

    pub fn edges(&self) -> Vec<f64> {
        let n = self.counts.len();
        (0..=n).map(|k| if k == n { self.hi } else { self.lo + k as f64 * self.width() }).collect()
    }

    /// Bin containing `e`, or `None` outside `[lo, hi]`.
    pub fn bin_of(&self, e: f64) -> Option<usize> {
        if !(e >= self.lo && e <= self.hi) {
            return None;
        }
        let n = self.counts.len();
        if n == 1 || e == self.hi {
            return Some(n - 1);
        }
        Some((((e - self.lo) / self.width()).floor() as usize).min(n - 1))
    }

    /// Index of the largest interior bin (first and last excluded), lowest index on ties.
    pub fn interior_argmax(&self) -> Option<usize> {
        let n = self.counts.len();
        if n < 3 {
            return None;
        }
        (1..n - 1).fold(None, |best: Option<usize>, k| match best {
            Some(b) if self.counts[b] >= self.counts[k] => Some(b),
            _ => Some(k),
        })
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

/// Histogram of eigenvalues into `n_bins ≥ 4` equal bins over their range.
pub fn density_of_states(eigs: &[f64], n_bins: usize) -> Result<Histogram> {
    if n_bins < 4 {
        return Err(crate::error::invalid(format!("need at least 4 bins, got {n_bins}")));
    }
    if eigs.is_empty() || eigs.iter().any(|e| !e.is_finite()) {
        return Err(crate::error::invalid("eigenvalues must be finite and non-empty"));
    }
    let lo = eigs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = eigs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        return Ok(Histogram { lo, hi, counts: vec![eigs.len()] });
    }
    let mut hist = Histogram { lo, hi, counts: vec![0; n_bins] };
    for &e in eigs {
        let b = hist.bin_of(e).expect("value inside its own range");
        hist.counts[b] += 1;
    }
    Ok(hist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{slow_labels, BasisLabel};
    use proptest::prelude::*;

    fn op(m: DMatrix<f64>) -> Operator {
        let n = m.nrows();
        Operator::new(m, slow_labels(n)).unwrap()
    }

    #[test]
    fn trivial_spectra() {
        let r = eig_sym(&op(DMatrix::identity(5, 5)), false).unwrap();
        assert_eq!(r.eigenvalues, vec![1.0; 5]);
        let r = eig_sym(&op(DMatrix::from_diagonal(&nalgebra::dvector![3.0, 1.0, 2.0])), true).unwrap();
        assert_eq!(r.eigenvalues, vec![1.0, 2.0, 3.0]);
        assert_eq!(r.gap, Some(1.0));
        let r = eig_sym(&op(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])), true).unwrap();
        assert!((r.eigenvalues[0] + 1.0).abs() < 1e-15 && (r.eigenvalues[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_asymmetric() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0, 0.0]);
        assert!(matches!(eig_sym_matrix(&m, false), Err(Error::ContractViolation(_))));
    }

    #[test]
    fn eigenvector_sign_convention() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0]);
        let r = eig_sym(&op(m), true).unwrap();
        let v = r.eigenvectors.unwrap();
        for c in 0..3 {
            let col = v.column(c);
            let lead = col.iter().copied().fold(0.0f64, |b, x| if x.abs() > b.abs() { x } else { b });
            assert!(lead > 0.0);
        }
    }

    fn random_symmetric(n: usize, seed: u64) -> DMatrix<f64> {
        // Small deterministic LCG; the values only need to be generic.
        let mut state = seed;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = next();
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }

    #[test]
    fn reconstruction_and_trace() {
        let m = random_symmetric(50, 7);
        let r = eig_sym_matrix(&m, true).unwrap();
        let v = r.eigenvectors.as_ref().unwrap();
        let e = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(r.eigenvalues.clone()));
        let scale = m.amax();
        assert!((v * &e * v.transpose() - &m).amax() <= 1e-8 * scale);
        assert!((v.transpose() * v - DMatrix::identity(50, 50)).amax() <= 1e-10);
        assert!((&m * v - v * &e).amax() <= 1e-8 * scale);
        let sum: f64 = r.eigenvalues.iter().sum();
        assert!((sum - m.trace()).abs() <= 1e-8 * 50.0 * scale);
        assert!(r.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn parity_blocks_reassemble_spectrum() {
        let mut m = random_symmetric(9, 3);
        let parity: Vec<f64> = (0..9).map(|k| if k % 3 == 0 { -1.0 } else { 1.0 }).collect();
        for i in 0..9 {
            for j in 0..9 {
                if parity[i] != parity[j] {
                    m[(i, j)] = 0.0;
                }
            }
        }
        let h = op(m);
        let (even, odd) = parity_decompose(&h, &parity).unwrap();
        assert_eq!((even.dim(), odd.dim()), (6, 3));
        assert_eq!(odd.labels()[1], BasisLabel::slow(3));
        let full = eig_sym(&h, false).unwrap();
        let split = eig_sym_with_parity(&h, &parity).unwrap();
        for (a, b) in full.eigenvalues.iter().zip(&split.eigenvalues) {
            assert!((a - b).abs() < 1e-10);
        }
        assert_eq!(split.parity_labels.unwrap().iter().filter(|&&p| p < 0).count(), 3);
    }

    #[test]
    fn parity_violation_is_reported() {
        let h = op(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
        assert!(matches!(parity_decompose(&h, &[1.0, -1.0]), Err(Error::NotBlockDiagonal(_))));
    }

    #[test]
    fn histogram_rules() {
        let ladder: Vec<f64> = (-5..=4).map(|m| 0.01 * m as f64).collect();
        let h = density_of_states(&ladder, 5).unwrap();
        assert_eq!(h.counts, vec![2; 5]);
        assert_eq!(h.total(), 10);
        let single = density_of_states(&[1.0, 1.0, 1.0], 8).unwrap();
        assert_eq!(single.counts, vec![3]);
        assert!(density_of_states(&[0.0, 1.0], 3).is_err());
        let h = density_of_states(&[0.0, 0.1, 0.5, 0.55, 0.6, 1.0], 4).unwrap();
        assert_eq!(h.counts, vec![2, 0, 3, 1]);
        assert_eq!(h.interior_argmax(), Some(2));
        assert_eq!(h.bin_of(1.0), Some(3));
        assert_eq!(h.bin_of(0.25), Some(1));
        assert_eq!(h.bin_of(1.5), None);
    }

    proptest! {
        #[test]
        fn histogram_counts_sum_to_len(vals in prop::collection::vec(-10.0f64..10.0, 1..200), bins in 4usize..64) {
            let h = density_of_states(&vals, bins).unwrap();
            prop_assert_eq!(h.total(), vals.len());
        }
    }
}
