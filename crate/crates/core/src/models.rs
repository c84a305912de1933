//! Closed-form Dicke and spin-spin effective models.
//!
//! Spin operators are `S_z = X₀` and `S_x = (X₊ + X₋)/2` of the spin
//! representation; the field quadrature is `x = (a + a†)/√2`.

use std::fmt;
use std::str::FromStr;

use crate::algebra::{make_boson_rep, make_spin_rep, LadderRep};
use crate::band::SymBand;
use crate::effective::{build_full_banded, ModelSpec};
use crate::error::{invalid, Error, Result};
use crate::operator::{slow_labels, BandOperator, Operator};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelId {
    DickeFull,
    DickeFieldSlow,
    DickeAtomSlow,
    DickeAtomSlowRotated,
    SpinSpinSlow,
}

impl ModelId {
    pub const ALL: [ModelId; 5] = [
        ModelId::DickeFull,
        ModelId::DickeFieldSlow,
        ModelId::DickeAtomSlow,
        ModelId::DickeAtomSlowRotated,
        ModelId::SpinSpinSlow,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelId::DickeFull => "dicke-full",
            ModelId::DickeFieldSlow => "dicke-field-slow",
            ModelId::DickeAtomSlow => "dicke-atom-slow",
            ModelId::DickeAtomSlowRotated => "dicke-atom-slow-rotated",
            ModelId::SpinSpinSlow => "spin-spin-slow",
        }
    }

    pub fn valid_names() -> String {
        Self::ALL.iter().map(|m| m.name()).collect::<Vec<_>>().join(", ")
    }

    /// Whether the slow subsystem is a truncated boson.
    pub fn has_field_cutoff(self) -> bool {
        matches!(self, ModelId::DickeFull | ModelId::DickeFieldSlow)
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| invalid(format!("unknown model '{s}'; valid models: {}", Self::valid_names())))
    }
}

/// Coefficients of the field potential `U(x) = c2·x² + c4·x⁴`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PotentialCoeffs {
    pub c2: f64,
    pub c4: f64,
    pub omega1_tilde: f64,
}

impl PotentialCoeffs {
    pub fn eval(&self, x: f64) -> f64 {
        let x2 = x * x;
        self.c2 * x2 + self.c4 * x2 * x2
    }

    /// `x*²` of the two symmetric minima, or `None` for a single well.
    pub fn minimum_sq(&self) -> Option<f64> {
        (self.c2 < 0.0 && self.c4 > 0.0).then(|| -self.c2 / (2.0 * self.c4))
    }
}

/// `ω̃₁ = ω₁(1 − 2Aδ²)`.
pub fn field_slow_omega1_tilde(a: f64, spec: &ModelSpec) -> f64 {
    spec.omega1 * (1.0 - 2.0 * a * spec.delta().powi(2))
}

/// `ω̃₁ = ω₁ − 2ω₂δ² − 16gδ³`.
pub fn atom_slow_omega1_tilde(spec: &ModelSpec) -> f64 {
    let d = spec.delta();
    spec.omega1 - 2.0 * spec.omega2 * d * d - 16.0 * spec.g * d.powi(3)
}

/// `ω̃₁ = ω₁ − 2A₁ω₁δ² − 20gδ³A₁²`.
pub fn spin_spin_omega1_tilde(a1: f64, spec: &ModelSpec) -> f64 {
    let d = spec.delta();
    spec.omega1 - 2.0 * a1 * spec.omega1 * d * d - 20.0 * spec.g * d.powi(3) * a1 * a1
}

/// Field-potential coefficients; `A` may be any positive real.
pub fn field_slow_potential(a: f64, spec: &ModelSpec) -> PotentialCoeffs {
    let d = spec.delta();
    let w = field_slow_omega1_tilde(a, spec);
    PotentialCoeffs { c2: w / 2.0 - 2.0 * a * spec.g * d, c4: 4.0 * a * spec.g * d.powi(3), omega1_tilde: w }
}

pub(crate) struct SpinOps {
    pub sz: SymBand,
    pub sx: SymBand,
}

impl SpinOps {
    pub fn new(a: usize) -> Result<Self> {
        let rep = make_spin_rep(a)?;
        Ok(Self::from_rep(&rep))
    }

    pub fn from_rep(rep: &LadderRep) -> Self {
        Self { sz: rep.x0_band(), sx: rep.coupling_band().scaled(0.5) }
    }
}

pub fn dicke_full_banded(a: usize, n_max: usize, spec: &ModelSpec) -> Result<BandOperator> {
    spec.validate()?;
    let field = make_boson_rep(n_max)?;
    let atoms = make_spin_rep(a)?;
    build_full_banded(&field, &atoms, spec)
}

/// `ω₁n̂ + ω₂S_z + g(S₊+S₋)(a†+a)`, basis `|n⟩⊗|m⟩` ordered by `n` first.
pub fn dicke_full(a: usize, n_max: usize, spec: &ModelSpec) -> Result<Operator> {
    dicke_full_banded(a, n_max, spec)?.to_dense()
}

/// `(−1)^{n + m + A/2}` on the `dicke_full` basis.
pub fn dicke_full_parity(a: usize, n_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity((n_max + 1) * (a + 1));
    for n in 0..=n_max {
        for q in 0..=a {
            out.push(if (n + q) % 2 == 0 { 1.0 } else { -1.0 });
        }
    }
    out
}

/// `(−1)^k` for the `k`-th slow basis state.
pub fn alternating_parity(dim: usize) -> Vec<f64> {
    (0..dim).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 }).collect()
}

/// `ω̃₁n̂ − Agδ(a+a†)² + Agδ³(a+a†)⁴` with real-valued `A`.
pub fn dicke_field_slow_banded(a: f64, n_max: usize, spec: &ModelSpec) -> Result<(BandOperator, PotentialCoeffs)> {
    spec.validate()?;
    if !(a > 0.0 && a.is_finite()) {
        return Err(invalid(format!("spin size A must be positive, got {a}")));
    }
    spec.log_regime();
    let field = make_boson_rep(n_max)?;
    let coeffs = field_slow_potential(a, spec);
    let d = spec.delta();
    let w2 = field.coupling_band().powi(2);
    let w4 = w2.powi(2);
    let band = field
        .x0_band()
        .scaled(coeffs.omega1_tilde)
        .add_scaled(&w2, -a * spec.g * d)
        .add_scaled(&w4, a * spec.g * d.powi(3));
    Ok((BandOperator::new(band, slow_labels(field.dim()))?, coeffs))
}

pub fn dicke_field_slow(a: usize, n_max: usize, spec: &ModelSpec) -> Result<(Operator, PotentialCoeffs)> {
    if a < 1 {
        return Err(invalid(format!("spin size A must be >= 1, got {a}")));
    }
    let (op, c) = dicke_field_slow_banded(a as f64, n_max, spec)?;
    Ok((op.to_dense()?, c))
}

pub fn dicke_atom_slow_banded(a: usize, spec: &ModelSpec, rotated: bool) -> Result<BandOperator> {
    spec.validate()?;
    spec.log_regime();
    let ops = SpinOps::new(a)?;
    let d = spec.delta();
    let w = atom_slow_omega1_tilde(spec);
    let (g, w2) = (spec.g, spec.omega2);
    let band = if rotated {
        let sz2 = ops.sz.powi(2);
        ops.sx
            .scaled(-w)
            .add_scaled(&sz2, -4.0 * g * d)
            .add_scaled(&ops.sx.powi(2), 2.0 * w2 * d * d)
            .add_scaled(&sz2.anticommutator(&ops.sx), -16.0 * g * d.powi(3))
    } else {
        let sx2 = ops.sx.powi(2);
        ops.sz
            .scaled(w)
            .add_scaled(&sx2, -4.0 * g * d)
            .add_scaled(&ops.sz.powi(2), 2.0 * w2 * d * d)
            .add_scaled(&sx2.anticommutator(&ops.sz), 16.0 * g * d.powi(3))
    };
    BandOperator::new(band, slow_labels(a + 1))
}

/// Unrotated: `ω̃₁S_z − 4gδS_x² + 2ω₂δ²S_z² + 16gδ³{S_x², S_z}`.
/// Rotated by `π/2` about `y`: `−ω̃₁S_x − 4gδS_z² + 2ω₂δ²S_x² − 16gδ³{S_z², S_x}`.
pub fn dicke_atom_slow(a: usize, spec: &ModelSpec, rotated: bool) -> Result<Operator> {
    dicke_atom_slow_banded(a, spec, rotated)?.to_dense()
}

pub fn spin_spin_slow_banded(a1: usize, a2: usize, spec: &ModelSpec) -> Result<BandOperator> {
    spec.validate()?;
    if a2 < 1 {
        return Err(invalid(format!("spin size A2 must be >= 1, got {a2}")));
    }
    spec.log_regime();
    let ops = SpinOps::new(a1)?;
    let (d, g, w1) = (spec.delta(), spec.g, spec.omega1);
    let a2 = a2 as f64;
    let w = spin_spin_omega1_tilde(a1 as f64, spec);
    let sx2 = ops.sx.powi(2);
    let band = ops
        .sz
        .scaled(w)
        .add_scaled(&sx2, -2.0 * a2 * g * d)
        .add_scaled(&ops.sz.powi(2), 2.0 * a2 * w1 * d * d)
        .add_scaled(&sx2.powi(2), 16.0 * g * a2 * d.powi(3))
        .add_scaled(&sx2.anticommutator(&ops.sz), 24.0 * g * d.powi(3) * a2 * a2);
    BandOperator::new(band, slow_labels(a1 + 1))
}

/// `ω̃₁S_z − 2A₂gδS_x² + 2A₂ω₁δ²S_z² + 16gA₂δ³S_x⁴ + 24gδ³A₂²{S_x², S_z}` on
/// the slow spin, with its critical ratio `ξ = 4A₂A₁²gδ/ω̃₁` when `ω̃₁ > 0`.
pub fn spin_spin_slow(a1: usize, a2: usize, spec: &ModelSpec) -> Result<(Operator, Option<f64>)> {
    let op = spin_spin_slow_banded(a1, a2, spec)?.to_dense()?;
    let xi = critical_coupling(ModelId::SpinSpinSlow, &CriticalParams { a: a1 as f64, a2: a2 as f64, spec: *spec })
        .ok()
        .map(|c| c.xi);
    Ok((op, xi))
}

/// Inputs to `critical_coupling`. `a` is the slow spin size (`A₁` for the
/// spin-spin model) and `a2` the fast spin size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CriticalParams {
    pub a: f64,
    pub a2: f64,
    pub spec: ModelSpec,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CriticalPoint {
    pub xi: f64,
    pub omega1_tilde: f64,
    /// Threshold spin size `ω̃₁/(4gδ)` of the field model.
    pub a_critical: Option<f64>,
}

pub fn critical_coupling(model: ModelId, params: &CriticalParams) -> Result<CriticalPoint> {
    let spec = &params.spec;
    let gd = spec.g * spec.delta();
    let w = match model {
        ModelId::DickeFull | ModelId::DickeFieldSlow => field_slow_omega1_tilde(params.a, spec),
        ModelId::DickeAtomSlow | ModelId::DickeAtomSlowRotated => atom_slow_omega1_tilde(spec),
        ModelId::SpinSpinSlow => spin_spin_omega1_tilde(params.a, spec),
    };
    if !(w > 0.0) {
        return Err(Error::RegimeInvalid(format!("renormalized frequency omega1_tilde = {w} is not positive")));
    }
    let point = match model {
        ModelId::DickeFull | ModelId::DickeFieldSlow => {
            let a_c = if gd > 0.0 { w / (4.0 * gd) } else { f64::INFINITY };
            CriticalPoint { xi: 4.0 * params.a * gd / w, omega1_tilde: w, a_critical: Some(a_c) }
        }
        ModelId::DickeAtomSlow | ModelId::DickeAtomSlowRotated => {
            CriticalPoint { xi: 4.0 * params.a * gd / w, omega1_tilde: w, a_critical: None }
        }
        ModelId::SpinSpinSlow => {
            CriticalPoint { xi: 4.0 * params.a2 * params.a * params.a * gd / w, omega1_tilde: w, a_critical: None }
        }
    };
    Ok(point)
}

/// Self-consistent field threshold: the `A` at which `c2 = 0`, i.e.
/// `A = ω̃₁(A)/(4gδ)`, which gives `A_c = ω₁/(4gδ + 2ω₁δ²)`.
pub fn field_slow_threshold(spec: &ModelSpec) -> f64 {
    let d = spec.delta();
    spec.omega1 / (4.0 * spec.g * d + 2.0 * spec.omega1 * d * d)
}

/// Coupling `g` at which the atom-slow model has ratio `ξ` for spin size `A`.
///
/// With `u = g²` the condition `ξω̃₁ = 4Agδ` is the quadratic
/// `(16ξ/ω₂³)u² + ((4A + 2ξ)/ω₂)u − ξω₁ = 0`.
pub fn coupling_for_xi(a: f64, xi: f64, omega1: f64, omega2: f64) -> Result<f64> {
    if !(xi >= 0.0 && a > 0.0 && omega1 > 0.0 && omega2 > 0.0) {
        return Err(invalid("coupling_for_xi needs xi >= 0 and positive A, omega1, omega2"));
    }
    let qa = 16.0 * xi / omega2.powi(3);
    let qb = (4.0 * a + 2.0 * xi) / omega2;
    let qc = xi * omega1;
    let u = 2.0 * qc / (qb + (qb * qb + 4.0 * qa * qc).sqrt());
    Ok(u.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::spin_rotation_y_half_pi;
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;

    fn spec(g: f64) -> ModelSpec {
        ModelSpec::new(0.01, 1.0, g).unwrap()
    }

    #[test]
    fn model_names_round_trip() {
        for m in ModelId::ALL {
            assert_eq!(m.name().parse::<ModelId>().unwrap(), m);
        }
        let err = "dicke".parse::<ModelId>().unwrap_err().to_string();
        assert!(err.contains("dicke-atom-slow-rotated"));
    }

    #[test]
    fn atom_slow_matches_hand_assembled_spin_one() {
        let s = spec(0.05);
        let (g, d, w2) = (s.g, s.delta(), s.omega2);
        let w = s.omega1 - 2.0 * w2 * d * d - 16.0 * g * d.powi(3);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let sz = DMatrix::from_row_slice(3, 3, &[-1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let sx = DMatrix::from_row_slice(3, 3, &[0.0, r, 0.0, r, 0.0, r, 0.0, r, 0.0]);
        let sx2 = &sx * &sx;
        let oracle = &sz * w - &sx2 * (4.0 * g * d) + &sz * &sz * (2.0 * w2 * d * d)
            + (&sx2 * &sz + &sz * &sx2) * (16.0 * g * d.powi(3));
        let h = dicke_atom_slow(2, &s, false).unwrap();
        assert!((h.matrix() - oracle).amax() < 1e-14);
    }

    #[test]
    fn rotated_is_rotation_of_unrotated() {
        for a in [2usize, 5, 12] {
            let s = spec(0.03);
            let r = spin_rotation_y_half_pi(a).unwrap();
            let h = dicke_atom_slow(a, &s, false).unwrap();
            let hr = dicke_atom_slow(a, &s, true).unwrap();
            let rotated = r.transpose() * h.matrix() * &r;
            assert!((rotated - hr.matrix()).amax() < 1e-12);
        }
    }

    #[test]
    fn atom_slow_decoupled_is_zeeman() {
        let h = dicke_atom_slow(4, &spec(0.0), false).unwrap();
        let expect: Vec<f64> = (-2..=2).map(|m| 0.01 * m as f64).collect();
        assert_eq!(h.matrix().diagonal().as_slice(), expect.as_slice());
    }

    #[test]
    fn field_slow_potential_and_threshold() {
        let s = spec(0.05);
        let a_c = field_slow_threshold(&s);
        let c = field_slow_potential(a_c, &s);
        assert_abs_diff_eq!(c.c2, 0.0, epsilon = 1e-15);
        assert!(field_slow_potential(a_c * 0.9, &s).c2 > 0.0);
        assert!(field_slow_potential(a_c * 1.1, &s).c2 < 0.0);
        let cp = critical_coupling(ModelId::DickeFieldSlow, &CriticalParams { a: a_c, a2: 0.0, spec: s }).unwrap();
        assert_abs_diff_eq!(cp.a_critical.unwrap(), a_c, epsilon = 1e-12);
        assert_abs_diff_eq!(cp.xi, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn field_slow_double_well_minima() {
        let s = spec(0.05);
        let c = field_slow_potential(4.0, &s);
        let x2 = c.minimum_sq().unwrap();
        let expect = (2.0 * 4.0 * s.g * s.delta() - c.omega1_tilde / 2.0) / (8.0 * 4.0 * s.g * s.delta().powi(3));
        assert_abs_diff_eq!(x2, expect, epsilon = 1e-12);
        // Brute-force grid minimizer of U on x ≥ 0.
        let (mut best, mut bx) = (f64::INFINITY, 0.0);
        for k in 0..200_001 {
            let x = k as f64 * 1e-4;
            let u = c.eval(x);
            if u < best {
                best = u;
                bx = x;
            }
        }
        assert!((bx - x2.sqrt()).abs() < 2e-4);
        assert!(field_slow_potential(0.5, &s).minimum_sq().is_none());
    }

    #[test]
    fn quartic_is_positive() {
        for a in [0.5, 1.0, 7.0] {
            assert!(field_slow_potential(a, &spec(0.02)).c4 > 0.0);
        }
    }

    #[test]
    fn atom_critical_point() {
        let a = 20.0;
        let g = coupling_for_xi(a, 1.0, 0.01, 1.0).unwrap();
        let s = spec(g);
        let cp = critical_coupling(ModelId::DickeAtomSlow, &CriticalParams { a, a2: 0.0, spec: s }).unwrap();
        assert_abs_diff_eq!(cp.xi, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(4.0 * a * g * s.delta(), cp.omega1_tilde, epsilon = 1e-15);
        let zero = critical_coupling(ModelId::DickeAtomSlow, &CriticalParams { a, a2: 0.0, spec: spec(0.0) }).unwrap();
        assert_eq!(zero.xi, 0.0);
    }

    #[test]
    fn xi_scales_with_coupling_at_fixed_delta() {
        // Hold δ fixed by scaling ω₂ with g; then ξ is linear in g for small g.
        let delta = 0.01;
        let xi = |g: f64| {
            let s = ModelSpec::new(1e-3, g / delta, g).unwrap();
            critical_coupling(ModelId::DickeAtomSlow, &CriticalParams { a: 10.0, a2: 0.0, spec: s }).unwrap().xi
        };
        assert_abs_diff_eq!(xi(2e-4) / xi(1e-4), 2.0, epsilon = 1e-2);
    }

    #[test]
    fn regime_invalid_when_frequency_collapses() {
        let s = ModelSpec { omega1: 0.001, omega2: 1.0, g: 0.1 };
        let err = critical_coupling(ModelId::DickeAtomSlow, &CriticalParams { a: 4.0, a2: 0.0, spec: s });
        assert!(matches!(err, Err(Error::RegimeInvalid(_))));
    }

    #[test]
    fn spin_spin_decoupled_and_xi() {
        let (h, xi) = spin_spin_slow(3, 2, &spec(0.0)).unwrap();
        let h = h.matrix();
        for (k, m) in [-1.5, -0.5, 0.5, 1.5].iter().enumerate() {
            assert_abs_diff_eq!(h[(k, k)], 0.01 * m, epsilon = 1e-17);
        }
        assert_eq!(xi, Some(0.0));
        let s = spec(0.02);
        let (_, xi) = spin_spin_slow(3, 2, &s).unwrap();
        let w = spin_spin_omega1_tilde(3.0, &s);
        assert_abs_diff_eq!(xi.unwrap(), 4.0 * 2.0 * 9.0 * s.g * s.delta() / w, epsilon = 1e-12);
    }

    #[test]
    fn spin_models_preserve_sz_parity() {
        let s = spec(0.04);
        let parity = alternating_parity(7);
        let hs = spin_spin_slow_banded(6, 3, &s).unwrap();
        assert_eq!(hs.commutator_with_diagonal(&parity), 0.0);
        let ha = dicke_atom_slow_banded(6, &s, false).unwrap();
        assert_eq!(ha.commutator_with_diagonal(&parity), 0.0);
    }

    #[test]
    fn dicke_full_parity_commutes() {
        let s = spec(0.05);
        let h = dicke_full(2, 8, &s).unwrap();
        assert_eq!(h.commutator_with_diagonal(&dicke_full_parity(2, 8)), 0.0);
        assert_eq!(crate::operator::asymmetry(h.matrix()), 0.0);
    }
}
