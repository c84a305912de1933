//! Finite matrix representations of polynomially deformed ladder algebras.
//!
//! A ladder triple `(X₀, X₊, X₋)` satisfies `[X₀, X±] = ±X±` and
//! `X₊X₋ = φ(X₀)` for a structure polynomial `φ`. The commutator
//! `[X₊, X₋]` is then the forward difference `∇φ(X₀) = φ(X₀) − φ(X₀+1)`.
//! Two representations are provided: the `(A+1)`-dimensional su(2) irrep and
//! a truncated single-mode Fock space.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;

use crate::band::SymBand;
use crate::error::{invalid, Error, Result};

/// Tolerance for `X₊X₋ = diag(φ(x₀))`.
pub const STRUCTURE_TOL: f64 = 1e-12;

/// An integer or half-integer, stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfInt(i64);

impl HalfInt {
    pub const fn from_doubled(doubled: i64) -> Self {
        Self(doubled)
    }

    pub const fn from_int(value: i64) -> Self {
        Self(2 * value)
    }

    pub const fn doubled(self) -> i64 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    /// Shift by an integer amount.
    pub const fn shifted(self, by: i64) -> Self {
        Self(self.0 + 2 * by)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// A real polynomial with coefficients in ascending order of degree.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut p = Self { coeffs };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * z + c)
    }

    pub fn eval_half(&self, z: HalfInt) -> f64 {
        self.eval(z.value())
    }

    /// The polynomial `z ↦ p(z + t)`.
    pub fn shift(&self, t: f64) -> Self {
        // Horner in polynomial arithmetic: p(z+t) = c0 + (z+t)(c1 + (z+t)(...)).
        let lin = Polynomial::new(vec![t, 1.0]);
        let mut acc = Polynomial::zero();
        for &c in self.coeffs.iter().rev() {
            acc = &(&acc * &lin) + &Polynomial::constant(c);
        }
        acc
    }

    /// `∇p(z) = p(z) − p(z + 1)`.
    pub fn forward_difference(&self) -> Self {
        self - &self.shift(1.0)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    fn trim(&mut self) {
        while self.coeffs.last() == Some(&0.0) {
            self.coeffs.pop();
        }
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n)
            .map(|i| self.coeffs.get(i).unwrap_or(&0.0) + rhs.coeffs.get(i).unwrap_or(&0.0))
            .collect();
        Polynomial::new(coeffs)
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &rhs.scale(-1.0)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.coeffs.is_empty() || rhs.coeffs.is_empty() {
            return Polynomial::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

/// Iterated forward difference of an arbitrary function on a unit-spaced lattice.
///
/// `order = 1` gives `z ↦ f(z) − f(z+1)`; order `n` is the binomial sum
/// `Σₖ (−1)ᵏ C(n,k) f(z+k)`, identical to applying the first difference `n` times.
pub fn forward_difference<F>(f: F, order: u32) -> impl Fn(f64) -> f64
where
    F: Fn(f64) -> f64,
{
    let weights: Vec<f64> = (0..=order)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign * binomial(order as u64, k as u64) as f64
        })
        .collect();
    move |z| {
        weights
            .iter()
            .enumerate()
            .map(|(k, w)| w * f(z + k as f64))
            .sum()
    }
}

fn binomial(n: u64, k: u64) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RepKind {
    Spin,
    Boson,
}

/// A finite matrix representation of one ladder algebra.
///
/// `X₀` is diagonal with strictly increasing eigenvalues, `X₋ = X₊ᵀ`, and
/// `φ` reproduces the diagonal of `X₊X₋`.
#[derive(Clone, Debug, PartialEq)]
pub struct LadderRep {
    kind: RepKind,
    x0: Vec<HalfInt>,
    xplus: DMatrix<f64>,
    phi: Polynomial,
    label: String,
    truncated: bool,
}

/// The `(A+1)`-dimensional su(2) representation with `j = A/2`.
pub fn make_spin_rep(a: usize) -> Result<LadderRep> {
    if a < 1 {
        return Err(invalid(format!("spin size A must be >= 1, got {a}")));
    }
    let a2 = a as i64;
    let dim = a + 1;
    let x0: Vec<HalfInt> = (0..dim as i64).map(|k| HalfInt::from_doubled(-a2 + 2 * k)).collect();
    let mut xplus = DMatrix::zeros(dim, dim);
    for (k, m) in x0.iter().take(a).enumerate() {
        xplus[(k + 1, k)] = spin_raising_element(a2, m.doubled());
    }
    // φ(m) = C₂ − m² + m with C₂ = j(j+1) = A(A+2)/4.
    let casimir = (a2 * (a2 + 2)) as f64 / 4.0;
    Ok(LadderRep {
        kind: RepKind::Spin,
        x0,
        xplus,
        phi: Polynomial::new(vec![casimir, 1.0, -1.0]),
        label: format!("spin(A={a})"),
        truncated: false,
    })
}

/// `⟨m+1|S₊|m⟩ = √((j−m)(j+m+1))`, with `a = 2j` and `m2 = 2m`.
pub(crate) fn spin_raising_element(a: i64, m2: i64) -> f64 {
    (((a - m2) * (a + m2 + 2)) as f64).sqrt() / 2.0
}

/// A single bosonic mode truncated to the Fock states `0..=n_max`.
pub fn make_boson_rep(n_max: usize) -> Result<LadderRep> {
    if n_max < 2 {
        return Err(invalid(format!("boson cutoff n_max must be >= 2, got {n_max}")));
    }
    let dim = n_max + 1;
    let mut xplus = DMatrix::zeros(dim, dim);
    for n in 0..n_max {
        xplus[(n + 1, n)] = ((n + 1) as f64).sqrt();
    }
    Ok(LadderRep {
        kind: RepKind::Boson,
        x0: (0..dim as i64).map(HalfInt::from_int).collect(),
        xplus,
        phi: Polynomial::new(vec![0.0, 1.0]),
        label: format!("boson(n_max={n_max})"),
        truncated: true,
    })
}

impl LadderRep {
    pub fn kind(&self) -> RepKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.x0.len()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub fn x0_levels(&self) -> &[HalfInt] {
        &self.x0
    }

    pub fn x0_diag(&self) -> Vec<f64> {
        self.x0.iter().map(|h| h.value()).collect()
    }

    pub fn x0_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_vec(self.x0_diag()))
    }

    pub fn xplus(&self) -> &DMatrix<f64> {
        &self.xplus
    }

    pub fn xminus(&self) -> DMatrix<f64> {
        self.xplus.transpose()
    }

    pub fn phi(&self) -> &Polynomial {
        &self.phi
    }

    /// Lowest eigenvalue of `X₀`, the fast-subsystem ground level when `ω > 0`.
    pub fn lowest_level(&self) -> f64 {
        self.x0[0].value()
    }

    /// Index of the `X₀` eigenvalue `value`, if it belongs to the representation.
    pub fn index_of(&self, value: f64) -> Option<usize> {
        let doubled = 2.0 * value;
        if doubled.fract() != 0.0 {
            return None;
        }
        let target = HalfInt::from_doubled(doubled as i64);
        self.x0.binary_search(&target).ok()
    }

    /// `X₊ + X₋` as a symmetric band matrix of bandwidth 1.
    pub fn coupling_band(&self) -> SymBand {
        let mut band = SymBand::zeros(self.dim(), 1);
        for k in 0..self.dim() - 1 {
            band.set(k + 1, k, self.xplus[(k + 1, k)]);
        }
        band
    }

    /// `X₀` as a diagonal band matrix.
    pub fn x0_band(&self) -> SymBand {
        SymBand::from_diagonal(&self.x0_diag())
    }
}

/// Returns `φ` after checking that `X₊X₋ = diag(φ(x₀))` entrywise.
pub fn structure_phi(rep: &LadderRep) -> Result<Polynomial> {
    let product = rep.xplus() * rep.xminus();
    let diag: Vec<f64> = rep.x0.iter().map(|&x| rep.phi.eval_half(x)).collect();
    let mut worst = 0.0f64;
    for i in 0..rep.dim() {
        for j in 0..rep.dim() {
            let target = if i == j { diag[i] } else { 0.0 };
            worst = worst.max((product[(i, j)] - target).abs());
        }
    }
    if worst > STRUCTURE_TOL {
        return Err(Error::RepresentationInconsistent(format!(
            "{}: max |X+X- - diag(phi)| = {worst:e}",
            rep.label
        )));
    }
    Ok(rep.phi.clone())
}

pub fn commutator(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a * b - b * a
}

/// `[diag(d), M]` evaluated entrywise as `(dᵢ − dⱼ) Mᵢⱼ`.
pub fn commutator_with_diagonal(d: &[f64], m: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| (d[i] - d[j]) * m[(i, j)])
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Wigner small-d matrix `d^j(π/2) = exp(−i(π/2)S_y)` for `j = A/2`.
///
/// The entries are `2^{−j} √((j+m')!(j−m')!/((j+m)!(j−m)!)) Σₛ (−1)^{m'−m+s} C(j+m, s) C(j−m, j−m'−s)`;
/// the alternating sum is carried out in exact integer arithmetic. With
/// `R = d(π/2)`, `Rᵀ S_z R = −S_x` and `Rᵀ S_x R = S_z`.
pub fn spin_rotation_y_half_pi(a: usize) -> Result<DMatrix<f64>> {
    if !(1..=60).contains(&a) {
        return Err(invalid(format!("rotation supported for 1 <= A <= 60, got {a}")));
    }
    let two_j = a as i64;
    let dim = a + 1;
    let ln_fact: Vec<f64> = std::iter::once(0.0)
        .chain((1..=dim).scan(0.0, |acc, k| {
            *acc += (k as f64).ln();
            Some(*acc)
        }))
        .collect();
    // Indices p = j + m run over 0..=2j.
    let mut d = DMatrix::zeros(dim, dim);
    for p_row in 0..=two_j {
        for p_col in 0..=two_j {
            // m' = p_row - j, m = p_col - j.
            let jp_m = p_col; // j + m
            let jm_m = two_j - p_col; // j - m
            let jm_mp = two_j - p_row; // j - m'
            let mp_minus_m = p_row - p_col;
            let mut sum: i128 = 0;
            for s in 0..=jp_m {
                let k2 = jm_mp - s;
                if k2 < 0 || k2 > jm_m || mp_minus_m + s < 0 {
                    continue;
                }
                let term = binomial(jp_m as u64, s as u64) as i128 * binomial(jm_m as u64, k2 as u64) as i128;
                if (mp_minus_m + s).rem_euclid(2) == 0 {
                    sum += term;
                } else {
                    sum -= term;
                }
            }
            let ln_ratio = 0.5
                * (ln_fact[p_row as usize] + ln_fact[jm_mp as usize] - ln_fact[jp_m as usize] - ln_fact[jm_m as usize]);
            let value = sum as f64 * (ln_ratio - two_j as f64 * 0.5 * std::f64::consts::LN_2).exp();
            d[(p_row as usize, p_col as usize)] = value;
        }
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn spin_half_is_pauli_like() {
        let rep = make_spin_rep(1).unwrap();
        assert_eq!(rep.dim(), 2);
        assert_eq!(rep.x0_diag(), vec![-0.5, 0.5]);
        assert_eq!(rep.xplus()[(1, 0)], 1.0);
        assert_eq!(rep.xplus().iter().filter(|v| **v != 0.0).count(), 1);
    }

    #[test]
    fn spin_one_raising_entries() {
        // √((j−m)(j+m+1)) with j = 1: m = −1 → √2, m = 0 → √2.
        let rep = make_spin_rep(2).unwrap();
        assert_abs_diff_eq!(rep.xplus()[(1, 0)], 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(rep.xplus()[(2, 1)], 2f64.sqrt(), epsilon = 1e-15);
        let p = rep.xplus() * rep.xminus();
        assert_abs_diff_eq!(p[(0, 0)], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p[(1, 1)], 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p[(2, 2)], 2.0, epsilon = 1e-14);
    }

    #[test]
    fn constructors_reject_small_sizes() {
        assert!(matches!(make_spin_rep(0), Err(Error::InvalidParameter(_))));
        assert!(matches!(make_boson_rep(1), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn boson_entries() {
        let rep = make_boson_rep(2).unwrap();
        assert_eq!(rep.x0_diag(), vec![0.0, 1.0, 2.0]);
        assert_eq!(rep.xplus()[(1, 0)], 1.0);
        assert_abs_diff_eq!(rep.xplus()[(2, 1)], 2f64.sqrt(), epsilon = 1e-15);
        assert!(rep.is_truncated());
    }

    #[test]
    fn x0_commutator_is_exact() {
        let reps = (1..=10)
            .map(|a| make_spin_rep(a).unwrap())
            .chain([8, 64].map(|n| make_boson_rep(n).unwrap()));
        for rep in reps {
            let c = commutator_with_diagonal(&rep.x0_diag(), rep.xplus()) - rep.xplus();
            assert_eq!(max_abs(&c), 0.0, "{}", rep.label());
        }
    }

    #[test]
    fn structure_phi_values() {
        let phi = structure_phi(&make_spin_rep(2).unwrap()).unwrap();
        assert_eq!(phi.eval(-1.0), 0.0);
        assert_eq!(phi.eval(0.0), 2.0);
        assert_eq!(phi.eval(1.0), 2.0);
        for a in 1..=12 {
            let rep = make_spin_rep(a).unwrap();
            assert_eq!(structure_phi(&rep).unwrap().eval(-(a as f64) / 2.0), 0.0);
        }
        let boson = structure_phi(&make_boson_rep(16).unwrap()).unwrap();
        for n in 0..16 {
            assert_eq!(boson.eval(n as f64), n as f64);
        }
    }

    #[test]
    fn inconsistent_phi_is_rejected() {
        let mut rep = make_spin_rep(3).unwrap();
        rep.phi = Polynomial::new(vec![1.0, 1.0, -1.0]);
        assert!(matches!(structure_phi(&rep), Err(Error::RepresentationInconsistent(_))));
    }

    #[test]
    fn raising_lowering_commutator_matches_difference_of_phi() {
        for a in 1..=10 {
            let rep = make_spin_rep(a).unwrap();
            let c = commutator(rep.xplus(), &rep.xminus());
            let dphi = rep.phi().forward_difference();
            let target = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                rep.dim(),
                rep.x0_diag().into_iter().map(|x| dphi.eval(x)),
            ));
            assert!(max_abs(&(c - target)) <= 1e-12);
        }
        for n_max in [8, 64] {
            let rep = make_boson_rep(n_max).unwrap();
            let c = commutator(rep.xplus(), &rep.xminus());
            let dphi = rep.phi().forward_difference();
            // The top Fock level is where truncation breaks [a, a†] = 1.
            for i in 0..n_max {
                for j in 0..=n_max {
                    let target = if i == j { dphi.eval(i as f64) } else { 0.0 };
                    assert!((c[(i, j)] - target).abs() <= 1e-12);
                }
            }
            assert!((c[(n_max, n_max)] - dphi.eval(n_max as f64)).abs() > 1.0);
        }
    }

    #[test]
    fn forward_differences() {
        let d = forward_difference(|n| n, 1);
        for z in [-3.0, 0.0, 2.5, 10.0] {
            assert_eq!(d(z), -1.0);
        }
        let rep = make_spin_rep(6).unwrap();
        let phi = rep.phi().clone();
        let d1 = forward_difference(|m| phi.eval(m), 1);
        let d2 = forward_difference(|m| phi.eval(m), 2);
        for m in rep.x0_diag() {
            assert_eq!(d1(m), 2.0 * m);
            assert_eq!(d2(m), -2.0);
        }
        assert_eq!(d1(-3.0), -6.0);
        // Symbolic and pointwise differences agree.
        let sym = phi.forward_difference();
        assert_eq!(sym.coeffs(), &[0.0, 2.0]);
        assert_eq!(phi.forward_difference().forward_difference().coeffs(), &[-2.0]);
    }

    #[test]
    fn index_lookup() {
        let rep = make_spin_rep(3).unwrap();
        assert_eq!(rep.index_of(-1.5), Some(0));
        assert_eq!(rep.index_of(0.5), Some(2));
        assert_eq!(rep.index_of(0.0), None);
        assert_eq!(rep.index_of(2.5), None);
        assert_eq!(HalfInt::from_doubled(-3).to_string(), "-3/2");
    }

    #[test]
    fn rotation_maps_sz_to_minus_sx() {
        for a in [1, 2, 5, 10, 40] {
            let rep = make_spin_rep(a).unwrap();
            let r = spin_rotation_y_half_pi(a).unwrap();
            let sz = rep.x0_matrix();
            let sx = (rep.xplus() + rep.xminus()) * 0.5;
            let id = DMatrix::<f64>::identity(a + 1, a + 1);
            assert!(max_abs(&(r.transpose() * &r - id)) < 1e-12);
            assert!(max_abs(&(r.transpose() * &sz * &r + &sx)) < 1e-11, "A={a}");
            assert!(max_abs(&(r.transpose() * &sx * &r - &sz)) < 1e-11, "A={a}");
        }
    }

    fn poly_strategy() -> impl Strategy<Value = Polynomial> {
        prop::collection::vec(-5.0f64..5.0, 1..6).prop_map(Polynomial::new)
    }

    proptest! {
        #[test]
        fn forward_difference_is_linear(p in poly_strategy(), q in poly_strategy(),
                                        a in -3.0f64..3.0, b in -3.0f64..3.0, z in -4.0f64..4.0) {
            let combo = &p.scale(a) + &q.scale(b);
            let lhs = combo.forward_difference().eval(z);
            let rhs = a * p.forward_difference().eval(z) + b * q.forward_difference().eval(z);
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
            let pointwise = forward_difference(|x| combo.eval(x), 1)(z);
            prop_assert!((lhs - pointwise).abs() <= 1e-9 * (1.0 + lhs.abs()));
        }

        #[test]
        fn shift_matches_evaluation(p in poly_strategy(), t in -3.0f64..3.0, z in -3.0f64..3.0) {
            let lhs = p.shift(t).eval(z);
            let rhs = p.eval(z + t);
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
        }
    }
}
