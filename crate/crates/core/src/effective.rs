//! The exact coupled Hamiltonian and its third-order effective counterpart.
//!
//! With `W = X₊ + X₋` and `δ = g/ω₂` the effective Hamiltonian reads
//!
//! ```text
//! H_eff = ω₁X₀ + ω₂Y₀ − 2ω₁δ² ∇_{x,−y}Φ(X₀, Y₀+1)
//!       + gδ ∇φ₂(Y₀) W² + ½gδ³ ∇(φ₂(Y₀) ∇²φ₂(Y₀−1)) W⁴
//! ```
//!
//! with `Φ(a, b) = φ₁(a)φ₂(b−1) − φ₁(a+1)φ₂(b)`. Every `Y`-dependent factor
//! is diagonal in the fast basis, so the operator is block diagonal in `Y₀`.

use log::warn;

use crate::algebra::LadderRep;
use crate::band::SymBand;
use crate::error::{invalid, Error, Result};
use crate::operator::{check_band_size, product_labels, slow_labels, BandOperator, Operator};

/// Small parameters at or above this value trigger a regime warning.
pub const SMALL_PARAMETER_LIMIT: f64 = 0.2;

/// Frequencies and coupling of the two subsystems.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelSpec {
    pub omega1: f64,
    pub omega2: f64,
    pub g: f64,
}

/// `δ = g/ω₂`, `ε = g/(ω₂+ω₁)`, `ϵ = g/(ω₂−ω₁)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpansionParameters {
    pub delta: f64,
    pub epsilon_plus: f64,
    pub epsilon_minus: f64,
}

impl ModelSpec {
    /// Requires `ω₂ > 0`, `0 ≤ ω₁ < ω₂` and `0 ≤ g < ω₂`.
    pub fn new(omega1: f64, omega2: f64, g: f64) -> Result<Self> {
        let spec = Self { omega1, omega2, g };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let Self { omega1, omega2, g } = *self;
        if !(omega1.is_finite() && omega2.is_finite() && g.is_finite()) {
            return Err(invalid("frequencies and coupling must be finite"));
        }
        if omega2 <= 0.0 {
            return Err(invalid(format!("omega2 must be positive, got {omega2}")));
        }
        if omega1 < 0.0 || omega1 >= omega2 {
            return Err(invalid(format!("need 0 <= omega1 < omega2, got omega1={omega1}, omega2={omega2}")));
        }
        if g < 0.0 || g >= omega2 {
            return Err(invalid(format!("need 0 <= g < omega2 (delta < 1), got g={g}")));
        }
        Ok(())
    }

    pub fn delta(&self) -> f64 {
        self.g / self.omega2
    }

    pub fn epsilon_plus(&self) -> f64 {
        self.g / (self.omega2 + self.omega1)
    }

    pub fn epsilon_minus(&self) -> f64 {
        self.g / (self.omega2 - self.omega1)
    }

    pub fn with_g(&self, g: f64) -> Self {
        Self { g, ..*self }
    }

    /// Human-readable notes on departures from `ω₁ ≲ g ≪ ω₂`.
    pub fn regime_warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Ok(p) = expansion_parameters(self) {
            for (name, v) in [("delta", p.delta), ("epsilon", p.epsilon_plus), ("epsilon_minus", p.epsilon_minus)] {
                if v >= SMALL_PARAMETER_LIMIT {
                    out.push(format!("{name} = {v} is not small (>= {SMALL_PARAMETER_LIMIT})"));
                }
            }
        }
        if self.g > 0.0 && self.g < 0.5 * self.omega1 {
            out.push(format!("g = {} is well below omega1 = {}; the strong-coupling regime is left", self.g, self.omega1));
        }
        out
    }

    pub(crate) fn log_regime(&self) {
        for w in self.regime_warnings() {
            warn!("{w}");
        }
    }
}

pub fn expansion_parameters(spec: &ModelSpec) -> Result<ExpansionParameters> {
    if spec.omega2 == spec.omega1 || spec.omega2 == -spec.omega1 {
        return Err(Error::DivisionByZero(format!(
            "omega2 = ±omega1 = {} makes an expansion parameter singular",
            spec.omega1
        )));
    }
    let p = ExpansionParameters {
        delta: spec.delta(),
        epsilon_plus: spec.epsilon_plus(),
        epsilon_minus: spec.epsilon_minus(),
    };
    for (name, v) in [("delta", p.delta), ("epsilon", p.epsilon_plus), ("epsilon_minus", p.epsilon_minus)] {
        if v.abs() >= SMALL_PARAMETER_LIMIT {
            warn!("{name} = {v} is not small");
        }
    }
    Ok(p)
}

/// `(x, y) ↦ f(x, y) − f(x+m, y+n)`.
pub fn generalized_displacement<F>(f: F, m: i64, n: i64) -> impl Fn(f64, f64) -> f64
where
    F: Fn(f64, f64) -> f64,
{
    move |x, y| f(x, y) - f(x + m as f64, y + n as f64)
}

/// Offsets `(m, n)` used for the mixed displacement `∇_{x,−y}` in the
/// `ω₁δ²` term: `Φ(x, y+1) − Φ(x+m, y+1+n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DisplacementConvention {
    pub m: i64,
    pub n: i64,
}

impl DisplacementConvention {
    /// `Φ(x, y+1) − Φ(x+1, y)`.
    pub const DEFAULT: Self = Self { m: 1, n: -1 };
    /// The opposite sign reading, `Φ(x, y+1) − Φ(x−1, y+2)`.
    pub const ALTERNATIVE: Self = Self { m: -1, n: 1 };
}

impl Default for DisplacementConvention {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Coefficients of the effective Hamiltonian at one fast level `y₀`.
#[derive(Clone, Debug, PartialEq)]
pub struct FastLevelTerms {
    /// `ω₁x + ω₂y₀ − 2ω₁δ²∇Φ` for every slow level `x`.
    pub diagonal: Vec<f64>,
    /// Coefficient of `W²`.
    pub quadratic: f64,
    /// Coefficient of `W⁴`.
    pub quartic: f64,
}

/// `Φ(a, b) = φ₁(a)φ₂(b−1) − φ₁(a+1)φ₂(b)`.
pub fn phi_cross<'a>(rep_x: &'a LadderRep, rep_y: &'a LadderRep) -> impl Fn(f64, f64) -> f64 + 'a {
    let (p1, p2) = (rep_x.phi(), rep_y.phi());
    move |a, b| p1.eval(a) * p2.eval(b - 1.0) - p1.eval(a + 1.0) * p2.eval(b)
}

pub fn fast_level_terms(
    rep_x: &LadderRep,
    rep_y: &LadderRep,
    spec: &ModelSpec,
    conv: DisplacementConvention,
    y0: f64,
) -> FastLevelTerms {
    let delta = spec.delta();
    let phi2 = rep_y.phi();
    let disp = generalized_displacement(phi_cross(rep_x, rep_y), conv.m, conv.n);
    let diagonal = rep_x
        .x0_diag()
        .into_iter()
        .map(|x| spec.omega1 * x + spec.omega2 * y0 - 2.0 * spec.omega1 * delta * delta * disp(x, y0 + 1.0))
        .collect();
    let quadratic = spec.g * delta * (phi2.eval(y0) - phi2.eval(y0 + 1.0));
    let second = |z: f64| phi2.eval(z) - 2.0 * phi2.eval(z + 1.0) + phi2.eval(z + 2.0);
    let h = |y: f64| phi2.eval(y) * second(y - 1.0);
    let quartic = 0.5 * spec.g * delta.powi(3) * (h(y0) - h(y0 + 1.0));
    FastLevelTerms { diagonal, quadratic, quartic }
}

fn slow_block(rep_x: &LadderRep, terms: &FastLevelTerms) -> SymBand {
    let w2 = rep_x.coupling_band().powi(2);
    let w4 = w2.powi(2);
    SymBand::from_diagonal(&terms.diagonal).add_scaled(&w2, terms.quadratic).add_scaled(&w4, terms.quartic)
}

/// `ω₁X₀⊗1 + ω₂1⊗Y₀ + g W_x⊗W_y` in band storage, basis ordered x-major.
pub fn build_full_banded(rep_x: &LadderRep, rep_y: &LadderRep, spec: &ModelSpec) -> Result<BandOperator> {
    let (dx, dy) = (rep_x.dim(), rep_y.dim());
    let n = dx.checked_mul(dy).ok_or_else(|| Error::SizeLimit("tensor dimension overflows".into()))?;
    check_band_size(n, dy + 1)?;
    let ix = SymBand::identity(dx);
    let iy = SymBand::identity(dy);
    let band = SymBand::kron(&rep_x.x0_band(), &iy)
        .scaled(spec.omega1)
        .add_scaled(&SymBand::kron(&ix, &rep_y.x0_band()), spec.omega2)
        .add_scaled(&SymBand::kron(&rep_x.coupling_band(), &rep_y.coupling_band()), spec.g);
    BandOperator::new(band, product_labels(dx, dy))
}

pub fn build_full(rep_x: &LadderRep, rep_y: &LadderRep, spec: &ModelSpec) -> Result<Operator> {
    build_full_banded(rep_x, rep_y, spec)?.to_dense()
}

/// The effective Hamiltonian on the full product space, block diagonal in `Y₀`.
pub fn build_generic_effective_banded(
    rep_x: &LadderRep,
    rep_y: &LadderRep,
    spec: &ModelSpec,
    conv: DisplacementConvention,
) -> Result<BandOperator> {
    let (dx, dy) = (rep_x.dim(), rep_y.dim());
    let n = dx.checked_mul(dy).ok_or_else(|| Error::SizeLimit("tensor dimension overflows".into()))?;
    let xbw = 4.min(dx - 1);
    let bw = xbw * dy;
    check_band_size(n, bw)?;
    let mut band = SymBand::zeros(n, bw);
    for (q, y0) in rep_y.x0_diag().into_iter().enumerate() {
        let block = slow_block(rep_x, &fast_level_terms(rep_x, rep_y, spec, conv, y0));
        for p in 0..dx {
            for r in p.saturating_sub(xbw)..=p {
                let v = block.get(p, r);
                if v != 0.0 {
                    band.set(p * dy + q, r * dy + q, v);
                }
            }
        }
    }
    BandOperator::new(band, product_labels(dx, dy))
}

pub fn build_generic_effective_with(
    rep_x: &LadderRep,
    rep_y: &LadderRep,
    spec: &ModelSpec,
    conv: DisplacementConvention,
) -> Result<Operator> {
    build_generic_effective_banded(rep_x, rep_y, spec, conv)?.to_dense()
}

pub fn build_generic_effective(rep_x: &LadderRep, rep_y: &LadderRep, spec: &ModelSpec) -> Result<Operator> {
    build_generic_effective_with(rep_x, rep_y, spec, DisplacementConvention::DEFAULT)
}

/// Fixes `Y₀ = y0` in a `Y`-diagonal operator, leaving an operator on `X` alone.
pub fn project_fast_ground(h: &Operator, rep_y: &LadderRep, y0: f64) -> Result<Operator> {
    let q = rep_y
        .index_of(y0)
        .ok_or_else(|| invalid(format!("y0 = {y0} is not an eigenvalue of Y0 in {}", rep_y.label())))?;
    let labels = h.labels();
    if labels.iter().any(|l| l.y.is_none()) {
        return Err(invalid("operator has no fast index to project"));
    }
    let d: Vec<f64> = labels.iter().map(|l| l.y.unwrap() as f64).collect();
    let leak = h.commutator_with_diagonal(&d);
    if leak != 0.0 {
        return Err(Error::ContractViolation(format!("operator couples fast levels (max |[H, Y0]| = {leak:e})")));
    }
    let keep: Vec<usize> = (0..labels.len()).filter(|&k| labels[k].y == Some(q)).collect();
    let dim = keep.len();
    Ok(h.restrict(&keep).with_labels(slow_labels(dim)))
}

/// The effective Hamiltonian at fast level `y0`, built directly on the slow space.
pub fn generic_projected_banded(
    rep_x: &LadderRep,
    rep_y: &LadderRep,
    spec: &ModelSpec,
    conv: DisplacementConvention,
    y0: f64,
) -> Result<BandOperator> {
    if rep_y.index_of(y0).is_none() {
        return Err(invalid(format!("y0 = {y0} is not an eigenvalue of Y0 in {}", rep_y.label())));
    }
    let band = slow_block(rep_x, &fast_level_terms(rep_x, rep_y, spec, conv, y0));
    BandOperator::new(band, slow_labels(rep_x.dim()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{make_boson_rep, make_spin_rep};
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;

    fn spec(g: f64) -> ModelSpec {
        ModelSpec::new(0.01, 1.0, g).unwrap()
    }

    #[test]
    fn expansion_parameter_values() {
        let p = expansion_parameters(&spec(0.05)).unwrap();
        assert_abs_diff_eq!(p.delta, 0.05, epsilon = 1e-15);
        assert_abs_diff_eq!(p.epsilon_plus, 0.05 / 1.01, epsilon = 1e-15);
        assert_abs_diff_eq!(p.epsilon_minus, 0.05 / 0.99, epsilon = 1e-15);
        let zero = expansion_parameters(&spec(0.0)).unwrap();
        assert_eq!((zero.delta, zero.epsilon_plus, zero.epsilon_minus), (0.0, 0.0, 0.0));
        let slow0 = expansion_parameters(&ModelSpec::new(0.0, 1.0, 0.05).unwrap()).unwrap();
        assert_eq!(slow0.delta, slow0.epsilon_plus);
        assert_eq!(slow0.delta, slow0.epsilon_minus);
    }

    #[test]
    fn degenerate_frequencies_are_singular() {
        let s = ModelSpec { omega1: 1.0, omega2: 1.0, g: 0.1 };
        assert!(matches!(expansion_parameters(&s), Err(Error::DivisionByZero(_))));
    }

    #[test]
    fn spec_validation() {
        assert!(ModelSpec::new(0.01, 0.0, 0.01).is_err());
        assert!(ModelSpec::new(2.0, 1.0, 0.01).is_err());
        assert!(ModelSpec::new(0.01, 1.0, 1.0).is_err());
        assert!(ModelSpec::new(0.01, 1.0, -0.1).is_err());
        assert!(spec(0.05).regime_warnings().is_empty());
        assert_eq!(spec(0.3).regime_warnings().len(), 3);
        assert_eq!(spec(0.001).regime_warnings().len(), 1);
    }

    #[test]
    fn displacement_examples() {
        let f = |x: f64, y: f64| x * y;
        let zero = generalized_displacement(f, 0, 0);
        let shift = generalized_displacement(f, 1, 0);
        for &(x, y) in &[(0.5, 2.0), (-1.5, 3.0), (4.0, -2.0)] {
            assert_eq!(zero(x, y), 0.0);
            assert_eq!(shift(x, y), -y);
        }
    }

    #[test]
    fn phi_cross_is_displacement_of_product() {
        // Φ(x, y+1) = ∇_{x,y}[φ₁(x)φ₂(y)] on a 5×5 lattice, spin slow and boson fast.
        let sx = make_spin_rep(4).unwrap();
        let by = make_boson_rep(4).unwrap();
        let cross = phi_cross(&sx, &by);
        let product = |x: f64, y: f64| {
            let p1 = -x * x + x + 6.0;
            p1 * y
        };
        let disp = generalized_displacement(product, 1, 1);
        for x in sx.x0_diag() {
            for y in by.x0_diag() {
                assert_abs_diff_eq!(cross(x, y + 1.0), disp(x, y), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn full_decoupled_spectrum() {
        let x = make_boson_rep(3).unwrap();
        let y = make_spin_rep(2).unwrap();
        let h = build_full(&x, &y, &spec(0.0)).unwrap();
        let mut expect: Vec<f64> = Vec::new();
        for xv in x.x0_diag() {
            for yv in y.x0_diag() {
                expect.push(0.01 * xv + yv);
            }
        }
        for (k, v) in expect.iter().enumerate() {
            assert_eq!(h.matrix()[(k, k)], *v);
        }
        assert_eq!(h.matrix().clone() - DMatrix::from_diagonal(&h.matrix().diagonal()), DMatrix::zeros(12, 12));
    }

    #[test]
    fn full_matches_dense_kronecker() {
        let x = make_boson_rep(4).unwrap();
        let y = make_spin_rep(3).unwrap();
        let s = spec(0.07);
        let h = build_full(&x, &y, &s).unwrap();
        let ix = DMatrix::<f64>::identity(x.dim(), x.dim());
        let iy = DMatrix::<f64>::identity(y.dim(), y.dim());
        let wx = x.xplus() + x.xminus();
        let wy = y.xplus() + y.xminus();
        let dense = x.x0_matrix().kronecker(&iy) * s.omega1 + ix.kronecker(&y.x0_matrix()) * s.omega2 + wx.kronecker(&wy) * s.g;
        assert!((h.matrix() - dense).amax() < 1e-15);
    }

    #[test]
    fn field_slow_coefficients() {
        for a in [2usize, 4, 8] {
            let x = make_boson_rep(10).unwrap();
            let y = make_spin_rep(a).unwrap();
            let s = spec(0.05);
            let t = fast_level_terms(&x, &y, &s, DisplacementConvention::DEFAULT, -(a as f64) / 2.0);
            let af = a as f64;
            assert_abs_diff_eq!(t.quadratic, -af * s.g * s.delta(), epsilon = 1e-15);
            assert_abs_diff_eq!(t.quartic, af * s.g * s.delta().powi(3), epsilon = 1e-15);
        }
    }

    #[test]
    fn atom_slow_quadratic_coefficient() {
        let x = make_spin_rep(4).unwrap();
        let y = make_boson_rep(6).unwrap();
        let s = spec(0.05);
        let t = fast_level_terms(&x, &y, &s, DisplacementConvention::DEFAULT, 0.0);
        // gδ·∇φ(0)·(2S_x)² = −4gδS_x².
        assert_abs_diff_eq!(t.quadratic, -s.g * s.delta(), epsilon = 1e-15);
        assert_eq!(t.quartic, 0.0);
    }

    #[test]
    fn decoupled_effective_is_bare() {
        let x = make_boson_rep(5).unwrap();
        let y = make_spin_rep(3).unwrap();
        let h = build_generic_effective(&x, &y, &spec(0.0)).unwrap();
        let bare = build_full(&x, &y, &spec(0.0)).unwrap();
        assert_eq!(h.matrix(), bare.matrix());
    }

    #[test]
    fn effective_is_fast_diagonal_and_projects() {
        let x = make_boson_rep(6).unwrap();
        let y = make_spin_rep(4).unwrap();
        let s = spec(0.05);
        let h = build_generic_effective(&x, &y, &s).unwrap();
        let d: Vec<f64> = h.labels().iter().map(|l| l.y.unwrap() as f64).collect();
        assert_eq!(h.commutator_with_diagonal(&d), 0.0);
        let p = project_fast_ground(&h, &y, -2.0).unwrap();
        assert_eq!(p.dim(), x.dim());
        let direct = generic_projected_banded(&x, &y, &s, DisplacementConvention::DEFAULT, -2.0).unwrap();
        assert_eq!(p.matrix(), direct.to_dense().unwrap().matrix());
        assert!(matches!(project_fast_ground(&h, &y, -2.5), Err(Error::InvalidParameter(_))));
        assert!(matches!(project_fast_ground(&h, &y, 7.0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn projection_rejects_coupled_operator() {
        let x = make_boson_rep(3).unwrap();
        let y = make_spin_rep(2).unwrap();
        let h = build_full(&x, &y, &spec(0.05)).unwrap();
        assert!(matches!(project_fast_ground(&h, &y, -1.0), Err(Error::ContractViolation(_))));
    }

    #[test]
    fn projected_effective_preserves_slow_parity() {
        let x = make_boson_rep(12).unwrap();
        let y = make_spin_rep(4).unwrap();
        let p = generic_projected_banded(&x, &y, &spec(0.05), DisplacementConvention::DEFAULT, -2.0).unwrap();
        let parity: Vec<f64> = (0..x.dim()).map(|n| if n % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert_eq!(p.commutator_with_diagonal(&parity), 0.0);
    }

    #[test]
    fn quadratic_coefficient_is_linear_in_g_at_fixed_delta() {
        // At fixed δ the W² coefficient is g·δ∇φ₂(y₀); its g-derivative is δ∇φ₂.
        let x = make_boson_rep(4).unwrap();
        let y = make_spin_rep(6).unwrap();
        let delta = 0.05;
        let c2 = |g: f64| {
            let s = ModelSpec { omega1: 0.0, omega2: g / delta, g };
            fast_level_terms(&x, &y, &s, DisplacementConvention::DEFAULT, -3.0).quadratic
        };
        let h = 1e-4;
        let slope = (c2(0.01 + h) - c2(0.01 - h)) / (2.0 * h);
        assert_abs_diff_eq!(slope, delta * -6.0, epsilon = 1e-8);
    }
}
