use nalgebra::DMatrix;

use crate::band::SymBand;
use crate::error::{invalid, Error, Result};

/// Largest dimension that is densified. A 6000×6000 matrix is already 288 MB.
pub const MAX_DENSE_DIM: usize = 6000;

/// Largest number of band entries a banded operator may hold.
pub const MAX_BAND_ENTRIES: usize = 50_000_000;

/// Basis state of a product space: slow index `x`, and fast index `y` unless
/// the fast subsystem has been projected out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisLabel {
    pub x: usize,
    pub y: Option<usize>,
}

impl BasisLabel {
    pub fn slow(x: usize) -> Self {
        Self { x, y: None }
    }

    pub fn product(x: usize, y: usize) -> Self {
        Self { x, y: Some(y) }
    }
}

pub(crate) fn product_labels(dim_x: usize, dim_y: usize) -> Vec<BasisLabel> {
    (0..dim_x).flat_map(|x| (0..dim_y).map(move |y| BasisLabel::product(x, y))).collect()
}

pub(crate) fn slow_labels(dim: usize) -> Vec<BasisLabel> {
    (0..dim).map(BasisLabel::slow).collect()
}

/// Dense real symmetric Hamiltonian on a labeled basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    matrix: DMatrix<f64>,
    labels: Vec<BasisLabel>,
}

impl Operator {
    /// Wraps a matrix that must be exactly symmetric.
    pub fn new(matrix: DMatrix<f64>, labels: Vec<BasisLabel>) -> Result<Self> {
        check_shape(&matrix, &labels)?;
        let asym = asymmetry(&matrix);
        if asym != 0.0 {
            return Err(Error::ContractViolation(format!("matrix is not symmetric (max |M - M^T| = {asym:e})")));
        }
        Ok(Self { matrix, labels })
    }

    /// Wraps `(M + Mᵀ)/2`.
    pub fn symmetrized(matrix: DMatrix<f64>, labels: Vec<BasisLabel>) -> Result<Self> {
        check_shape(&matrix, &labels)?;
        let sym = (&matrix + matrix.transpose()) * 0.5;
        Ok(Self { matrix: sym, labels })
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn labels(&self) -> &[BasisLabel] {
        &self.labels
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.amax()
    }

    /// `max |[H, diag(d)]|`, evaluated entrywise as `|Hᵢⱼ (dⱼ − dᵢ)|`.
    pub fn commutator_with_diagonal(&self, d: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.dim() {
            for i in 0..self.dim() {
                worst = worst.max((self.matrix[(i, j)] * (d[j] - d[i])).abs());
            }
        }
        worst
    }

    /// Principal submatrix on the given basis states.
    pub fn restrict(&self, keep: &[usize]) -> Operator {
        let m = DMatrix::from_fn(keep.len(), keep.len(), |a, b| self.matrix[(keep[a], keep[b])]);
        let labels = keep.iter().map(|&k| self.labels[k]).collect();
        Operator { matrix: m, labels }
    }

    pub(crate) fn with_labels(mut self, labels: Vec<BasisLabel>) -> Self {
        assert_eq!(labels.len(), self.labels.len());
        self.labels = labels;
        self
    }
}

fn check_shape(matrix: &DMatrix<f64>, labels: &[BasisLabel]) -> Result<()> {
    if !matrix.is_square() || matrix.nrows() != labels.len() {
        return Err(invalid(format!(
            "matrix is {}x{} but {} basis labels were given",
            matrix.nrows(),
            matrix.ncols(),
            labels.len()
        )));
    }
    Ok(())
}

pub(crate) fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..j {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// A banded Hamiltonian on a labeled basis; symmetric by storage.
#[derive(Clone, Debug, PartialEq)]
pub struct BandOperator {
    band: SymBand,
    labels: Vec<BasisLabel>,
}

impl BandOperator {
    pub fn new(band: SymBand, labels: Vec<BasisLabel>) -> Result<Self> {
        if band.dim() != labels.len() {
            return Err(invalid(format!("band has dimension {} but {} labels", band.dim(), labels.len())));
        }
        Ok(Self { band, labels })
    }

    pub fn dim(&self) -> usize {
        self.band.dim()
    }

    pub fn band(&self) -> &SymBand {
        &self.band
    }

    pub fn labels(&self) -> &[BasisLabel] {
        &self.labels
    }

    pub fn to_dense(&self) -> Result<Operator> {
        if self.dim() > MAX_DENSE_DIM {
            return Err(Error::SizeLimit(format!(
                "dense operator of dimension {} exceeds {MAX_DENSE_DIM}",
                self.dim()
            )));
        }
        Ok(Operator { matrix: self.band.to_dense(), labels: self.labels.clone() })
    }

    pub fn commutator_with_diagonal(&self, d: &[f64]) -> f64 {
        let bw = self.band.bandwidth();
        let mut worst = 0.0f64;
        for i in 0..self.dim() {
            for j in i.saturating_sub(bw)..=i {
                worst = worst.max((self.band.get(i, j) * (d[j] - d[i])).abs());
            }
        }
        worst
    }

    pub fn restrict(&self, keep: &[usize]) -> BandOperator {
        BandOperator {
            band: self.band.restrict(keep),
            labels: keep.iter().map(|&k| self.labels[k]).collect(),
        }
    }
}

pub(crate) fn check_band_size(n: usize, bw: usize) -> Result<()> {
    match n.checked_mul(bw + 1) {
        Some(entries) if entries <= MAX_BAND_ENTRIES => Ok(()),
        _ => Err(Error::SizeLimit(format!(
            "band operator with dimension {n} and bandwidth {bw} exceeds {MAX_BAND_ENTRIES} stored entries"
        ))),
    }
}
