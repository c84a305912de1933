//! Thermodynamic-limit energy surface of the atom-slow Dicke model.
//!
//! Spin operators are replaced by classical vectors of length `A/2`,
//! `S = (A/2)(sinθ cosφ, sinθ sinφ, cosθ)`, and the rotated effective
//! Hamiltonian becomes
//!
//! ```text
//! H_cl = −(A/2) [ ω̃₁ cosφ sinθ + 2Agδ cos²θ − Aω₂δ² cos²φ sin²θ
//!                 + 4A²gδ³ cosθ cosφ sin²θ ]
//! ```
//!
//! The last two terms are the higher-order corrections and can be switched
//! off. Stationary points are located by a grid scan followed by Newton
//! refinement and classified from the Hessian.

use rayon::prelude::*;

use crate::effective::ModelSpec;
use crate::error::{invalid, Error, Result};
use crate::models::{atom_slow_omega1_tilde, field_slow_potential, ModelId};

use std::f64::consts::PI;

/// Grid resolution in θ (inclusive of both poles).
pub const THETA_POINTS: usize = 181;
/// Grid resolution in φ (inclusive of both ends of `[−π, π]`).
pub const PHI_POINTS: usize = 361;
/// Convergence threshold on `|∇H_cl|` relative to `A`.
pub const GRADIENT_TOL: f64 = 1e-10;
/// Stationary points closer than this (in radians) are merged.
pub const DEDUP_RADIUS: f64 = 1e-6;

const MAX_NEWTON: usize = 200;
/// Points with `sinθ` below this are treated as poles.
const POLE_EXCLUSION: f64 = 1e-6;
const PROBE_RADIUS: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StationaryKind {
    Min,
    Max,
    Saddle,
}

impl StationaryKind {
    pub fn name(self) -> &'static str {
        match self {
            StationaryKind::Min => "min",
            StationaryKind::Max => "max",
            StationaryKind::Saddle => "saddle",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StationaryPoint {
    pub theta: f64,
    pub phi: f64,
    pub energy: f64,
    pub kind: StationaryKind,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalLandscape {
    pub a: f64,
    pub xi: f64,
    pub omega1_tilde: f64,
    /// Sorted by energy, then θ, then φ.
    pub stationary_points: Vec<StationaryPoint>,
    /// `|cosθ|` at the global minimum.
    pub order_parameter: f64,
    /// Energy of the unstable point on `φ = 0` nearest `θ = π/2`, for `ξ > 1`.
    pub separatrix_energy: Option<f64>,
    pub include_cubic_corrections: bool,
}

impl ClassicalLandscape {
    pub fn minima(&self) -> impl Iterator<Item = &StationaryPoint> {
        self.stationary_points.iter().filter(|p| p.kind == StationaryKind::Min)
    }

    pub fn global_minimum(&self) -> &StationaryPoint {
        self.minima().next().expect("a continuous function on the sphere has a minimum")
    }

    pub fn min_energy(&self) -> f64 {
        self.global_minimum().energy
    }
}

/// `H_cl = −(A/2)·F(θ, φ)` with
/// `F = a cφ sθ + b cθ² − c cφ² sθ² + d cθ cφ sθ²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Surface {
    pub half_a: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Surface {
    pub fn new(size: f64, spec: &ModelSpec, include_corrections: bool) -> Self {
        let delta = spec.delta();
        let (c, d) = if include_corrections {
            (size * spec.omega2 * delta * delta, 4.0 * size * size * spec.g * delta.powi(3))
        } else {
            (0.0, 0.0)
        };
        Self { half_a: size / 2.0, a: atom_slow_omega1_tilde(spec), b: 2.0 * size * spec.g * delta, c, d }
    }

    pub fn energy(&self, theta: f64, phi: f64) -> f64 {
        let (st, ct) = theta.sin_cos();
        let cp = phi.cos();
        let f = self.a * cp * st + self.b * ct * ct - self.c * cp * cp * st * st + self.d * ct * cp * st * st;
        -self.half_a * f
    }

    /// `(∂θ H, ∂φ H)`.
    pub fn gradient(&self, theta: f64, phi: f64) -> [f64; 2] {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        let s2t = (2.0 * theta).sin();
        let ft = self.a * cp * ct - self.b * s2t - self.c * cp * cp * s2t + self.d * cp * (2.0 * st * ct * ct - st.powi(3));
        let fp = sp * (-self.a * st + 2.0 * self.c * cp * st * st - self.d * ct * st * st);
        [-self.half_a * ft, -self.half_a * fp]
    }

    /// `[[∂θθ, ∂θφ], [∂θφ, ∂φφ]]` of `H`.
    pub fn hessian(&self, theta: f64, phi: f64) -> [[f64; 2]; 2] {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        let c2t = (2.0 * theta).cos();
        let s2t = (2.0 * theta).sin();
        let ftt = -self.a * cp * st - 2.0 * self.b * c2t - 2.0 * self.c * cp * cp * c2t
            + self.d * cp * (2.0 * ct.powi(3) - 7.0 * st * st * ct);
        let fpp = -self.a * cp * st + 2.0 * self.c * (2.0 * phi).cos() * st * st - self.d * ct * cp * st * st;
        let ftp = -self.a * sp * ct + 2.0 * self.c * cp * sp * s2t - self.d * sp * (2.0 * st * ct * ct - st.powi(3));
        let h = -self.half_a;
        [[h * ftt, h * ftp], [h * ftp, h * fpp]]
    }

    fn grad_norm(&self, theta: f64, phi: f64) -> f64 {
        let [gt, gp] = self.gradient(theta, phi);
        gt.hypot(gp)
    }
}

/// Evaluates `H_cl(θ, φ)` for spin size `A`.
pub fn hcl_eval(theta: f64, phi: f64, a: f64, spec: &ModelSpec, include_corrections: bool) -> f64 {
    Surface::new(a, spec, include_corrections).energy(theta, phi)
}

/// `0` for `ξ ≤ 1`, `√(1 − ξ⁻²)` above.
pub fn order_parameter(xi: f64) -> f64 {
    if xi <= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (xi * xi)).sqrt()
    }
}

fn wrap_phi(phi: f64) -> f64 {
    let w = (phi + PI).rem_euclid(2.0 * PI) - PI;
    if w >= PI {
        -PI
    } else {
        w
    }
}

/// Maps any `(θ, φ)` to `θ ∈ [0, π]`, `φ ∈ [−π, π)`.
fn normalize(theta: f64, phi: f64) -> (f64, f64) {
    let mut t = theta.rem_euclid(2.0 * PI);
    let mut p = phi;
    if t > PI {
        t = 2.0 * PI - t;
        p += PI;
    }
    (t, wrap_phi(p))
}

fn angular_distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    let dphi = wrap_phi(a.1 - b.1).abs();
    (a.0 - b.0).abs().max(dphi)
}

fn solve2(h: &[[f64; 2]; 2], g: [f64; 2]) -> Option<[f64; 2]> {
    let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    let scale = h[0][0].abs().max(h[1][1].abs()).max(h[0][1].abs());
    if det.abs() <= 1e-300 || det.abs() < 1e-14 * scale * scale {
        return None;
    }
    Some([(h[1][1] * g[0] - h[0][1] * g[1]) / det, (h[0][0] * g[1] - h[1][0] * g[0]) / det])
}

fn sym_eigen2(h: &[[f64; 2]; 2]) -> ([f64; 2], [f64; 2]) {
    let (p, q, r) = (h[0][0], h[0][1], h[1][1]);
    let mean = 0.5 * (p + r);
    let rad = (0.25 * (p - r) * (p - r) + q * q).sqrt();
    let (lo, hi) = (mean - rad, mean + rad);
    // Eigenvector of the lower eigenvalue.
    let v = if q.abs() > 1e-300 {
        [q, lo - p]
    } else if p <= r {
        [1.0, 0.0]
    } else {
        [0.0, 1.0]
    };
    let n = v[0].hypot(v[1]);
    ([lo, hi], [v[0] / n, v[1] / n])
}

/// Newton iteration on `∇H = 0`, continued until the step stalls.
fn newton(s: &Surface, theta: f64, phi: f64, tol: f64) -> Option<(f64, f64)> {
    let (mut t, mut p) = (theta, phi);
    for _ in 0..MAX_NEWTON {
        let g = s.gradient(t, p);
        let step = solve2(&s.hessian(t, p), g)?;
        let len = step[0].hypot(step[1]);
        let damp = if len > 0.2 { 0.2 / len } else { 1.0 };
        if !(step[0].is_finite() && step[1].is_finite()) {
            return None;
        }
        (t, p) = normalize(t - damp * step[0], p - damp * step[1]);
        if len < 1e-15 {
            break;
        }
    }
    accept(s, t, p, tol)
}

/// `(θ, φ)` if it is an interior stationary point. The poles are handled
/// separately since `φ` is undefined there.
fn accept(s: &Surface, theta: f64, phi: f64, tol: f64) -> Option<(f64, f64)> {
    let (t, p) = normalize(theta, phi);
    (t.sin() > POLE_EXCLUSION && s.grad_norm(t, p) < tol).then_some((t, p))
}

/// Descent to a local minimum by Newton steps on a shifted Hessian with
/// backtracking; returns the polished point.
fn descend(s: &Surface, theta: f64, phi: f64, tol: f64) -> Option<(f64, f64)> {
    let (mut t, mut p) = (theta, phi);
    for _ in 0..10 * MAX_NEWTON {
        let g = s.gradient(t, p);
        let gn = g[0].hypot(g[1]);
        let h = s.hessian(t, p);
        let ([lo, hi], _) = sym_eigen2(&h);
        let floor = 1e-3 * hi.abs().max(lo.abs()).max(tol);
        let shift = if lo < floor { floor - lo } else { 0.0 };
        let hs = [[h[0][0] + shift, h[0][1]], [h[1][0], h[1][1] + shift]];
        let mut dir = match solve2(&hs, g) {
            Some(d) => [-d[0], -d[1]],
            None => [-g[0], -g[1]],
        };
        let len = dir[0].hypot(dir[1]);
        if len > 0.2 {
            dir = [dir[0] * 0.2 / len, dir[1] * 0.2 / len];
        }
        let e0 = s.energy(t, p);
        let slope = g[0] * dir[0] + g[1] * dir[1];
        let mut step = 1.0;
        let mut moved = false;
        for _ in 0..60 {
            let (nt, np) = (t + step * dir[0], p + step * dir[1]);
            if s.energy(nt, np) <= e0 + 1e-4 * step * slope {
                (t, p) = normalize(nt, np);
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if gn < tol * 1e-3 || !moved {
            break;
        }
    }
    // Polish with plain Newton; near a non-degenerate minimum it stays put.
    newton(s, t, p, tol).or_else(|| accept(s, t, p, tol))
}

fn line_roots(s: &Surface, tol: f64) -> Vec<(f64, f64)> {
    const SAMPLES: usize = 4001;
    let mut out = Vec::new();
    for phi in [0.0, -PI] {
        let dtheta = |t: f64| s.gradient(t, phi)[0];
        let grid: Vec<(f64, f64)> = (1..SAMPLES - 1)
            .map(|k| {
                let t = PI * k as f64 / (SAMPLES - 1) as f64;
                (t, dtheta(t))
            })
            .collect();
        for w in grid.windows(2) {
            let ((mut lo, flo), (mut hi, fhi)) = (w[0], w[1]);
            if flo == 0.0 {
                out.push((lo, phi));
                continue;
            }
            if flo.signum() == fhi.signum() {
                continue;
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if dtheta(mid).signum() == flo.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let t = if dtheta(lo).abs() <= dtheta(hi).abs() { lo } else { hi };
            out.extend(accept(s, t, phi, tol));
        }
    }
    out
}

fn classify(s: &Surface, theta: f64, phi: f64) -> StationaryKind {
    let h = s.hessian(theta, phi);
    let ([lo, hi], _) = sym_eigen2(&h);
    let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    let eps = 1e-9 * scale.max(s.half_a * (s.a.abs() + s.b.abs()));
    if lo > eps && hi > eps {
        return StationaryKind::Min;
    }
    if lo < -eps && hi < -eps {
        return StationaryKind::Max;
    }
    if lo < -eps && hi > eps {
        return StationaryKind::Saddle;
    }
    // Degenerate Hessian: compare with eight neighbours.
    let e0 = s.energy(theta, phi);
    let mut higher = 0;
    let mut lower = 0;
    for k in 0..8 {
        let ang = k as f64 * PI / 4.0;
        let e = s.energy(theta + PROBE_RADIUS * ang.cos(), phi + PROBE_RADIUS * ang.sin());
        if e > e0 {
            higher += 1;
        } else if e < e0 {
            lower += 1;
        }
    }
    match (higher, lower) {
        (8, _) => StationaryKind::Min,
        (_, 8) => StationaryKind::Max,
        _ => StationaryKind::Saddle,
    }
}

/// `ξ = 4Agδ/ω̃₁` with the atom-slow `ω̃₁`.
pub fn atom_xi(a: f64, spec: &ModelSpec) -> Result<(f64, f64)> {
    let w = atom_slow_omega1_tilde(spec);
    if !(w > 0.0) {
        return Err(Error::RegimeInvalid(format!("renormalized frequency omega1_tilde = {w} is not positive")));
    }
    Ok((4.0 * a * spec.g * spec.delta() / w, w))
}

/// Locates and classifies every stationary point of `H_cl`.
pub fn find_stationary(a: f64, spec: &ModelSpec, include_corrections: bool) -> Result<ClassicalLandscape> {
    spec.validate()?;
    if !(a > 0.0 && a.is_finite()) {
        return Err(invalid(format!("spin size A must be positive, got {a}")));
    }
    let (xi, w) = atom_xi(a, spec)?;
    let s = Surface::new(a, spec, include_corrections);
    let tol = GRADIENT_TOL * a;

    let dt = PI / (THETA_POINTS - 1) as f64;
    let dp = 2.0 * PI / (PHI_POINTS - 1) as f64;
    let cols = PHI_POINTS - 1;
    let grad2: Vec<Vec<f64>> = (0..THETA_POINTS)
        .into_par_iter()
        .map(|i| {
            (0..cols)
                .map(|j| {
                    let [gt, gp] = s.gradient(i as f64 * dt, -PI + j as f64 * dp);
                    gt * gt + gp * gp
                })
                .collect()
        })
        .collect();

    let mut seeds = Vec::new();
    for i in 1..THETA_POINTS - 1 {
        for j in 0..cols {
            let v = grad2[i][j];
            let is_local_min = (-1i64..=1).all(|di| {
                (-1i64..=1).all(|dj| {
                    if di == 0 && dj == 0 {
                        return true;
                    }
                    let ii = (i as i64 + di) as usize;
                    let jj = (j as i64 + dj).rem_euclid(cols as i64) as usize;
                    v <= grad2[ii][jj]
                })
            });
            if is_local_min {
                seeds.push((i as f64 * dt, -PI + j as f64 * dp));
            }
        }
    }

    let candidates: Vec<Vec<(f64, f64)>> = seeds
        .par_iter()
        .map(|&(t, p)| {
            let mut out = Vec::with_capacity(2);
            out.extend(newton(&s, t, p, tol));
            out.extend(descend(&s, t, p, tol));
            out
        })
        .collect();

    let mut points: Vec<(f64, f64)> = Vec::new();
    let push = |pt: (f64, f64), points: &mut Vec<(f64, f64)>| {
        if !points.iter().any(|q| angular_distance(*q, pt) < DEDUP_RADIUS) {
            points.push(pt);
        }
    };
    for pt in candidates.into_iter().flatten() {
        push(pt, &mut points);
    }
    // The mirror lines φ = 0 and φ = π carry stationary points wherever ∂θH
    // changes sign, including ones whose φ curvature vanishes.
    for pt in line_roots(&s, tol) {
        push(pt, &mut points);
    }
    // A pole is stationary only when the first-order term vanishes.
    if s.half_a * s.a.abs() < tol {
        for pole in [0.0, PI] {
            push((pole, 0.0), &mut points);
        }
    }
    // Follow each saddle downhill on both sides of its unstable direction.
    let saddles: Vec<(f64, f64)> =
        points.iter().copied().filter(|&(t, p)| classify(&s, t, p) == StationaryKind::Saddle).collect();
    for (t, p) in saddles {
        let (_, v) = sym_eigen2(&s.hessian(t, p));
        for sign in [1.0, -1.0] {
            let h = 1e-3 * sign;
            if let Some(pt) = descend(&s, t + h * v[0], p + h * v[1], tol) {
                push(pt, &mut points);
            }
        }
    }

    let mut stationary: Vec<StationaryPoint> = points
        .into_iter()
        .map(|(t, p)| StationaryPoint { theta: t, phi: p, energy: s.energy(t, p), kind: classify(&s, t, p) })
        .collect();
    stationary.sort_by(|x, y| {
        x.energy.total_cmp(&y.energy).then(x.theta.total_cmp(&y.theta)).then(x.phi.total_cmp(&y.phi))
    });
    if !stationary.iter().any(|p| p.kind == StationaryKind::Min) {
        return Err(Error::NoConvergence("no minimum of the classical energy was found".into()));
    }
    let global = stationary.iter().find(|p| p.kind == StationaryKind::Min).unwrap();
    let order = global.theta.cos().abs();
    let separatrix_energy = if xi > 1.0 {
        stationary
            .iter()
            .filter(|p| p.kind != StationaryKind::Min && p.phi.abs() < DEDUP_RADIUS)
            .min_by(|x, y| (x.theta - PI / 2.0).abs().total_cmp(&(y.theta - PI / 2.0).abs()))
            .map(|p| p.energy)
    } else {
        None
    };
    Ok(ClassicalLandscape {
        a,
        xi,
        omega1_tilde: w,
        stationary_points: stationary,
        order_parameter: order,
        separatrix_energy,
        include_cubic_corrections: include_corrections,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParameter {
    A,
    G,
}

impl std::str::FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(SweepParameter::A),
            "g" | "G" => Ok(SweepParameter::G),
            _ => Err(invalid(format!("unknown sweep parameter '{s}'; expected A or g"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sweep {
    pub parameter: SweepParameter,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl Sweep {
    pub const MIN_STEPS: usize = 16;

    pub fn points(&self) -> Vec<f64> {
        let n = self.steps;
        (0..n)
            .map(|k| if k + 1 == n { self.stop } else { self.start + (self.stop - self.start) * k as f64 / (n - 1) as f64 })
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if !(self.start < self.stop) || !self.start.is_finite() || !self.stop.is_finite() {
            return Err(invalid(format!("sweep needs start < stop, got {} .. {}", self.start, self.stop)));
        }
        if self.steps < Self::MIN_STEPS {
            return Err(invalid(format!("sweep needs at least {} points, got {}", Self::MIN_STEPS, self.steps)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BifurcationResult {
    /// Midpoint of the final bracket.
    pub critical: f64,
    pub half_width: f64,
    /// Consecutive sweep points that first straddle the transition.
    pub grid_bracket: (f64, f64),
}

/// Fixed quantities of a bifurcation scan; the swept one is overridden.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanBase {
    pub a: f64,
    pub spec: ModelSpec,
}

fn broken_phase(model: ModelId, base: &ScanBase, parameter: SweepParameter, value: f64) -> Result<bool> {
    let (a, spec) = match parameter {
        SweepParameter::A => (value, base.spec),
        SweepParameter::G => (base.a, base.spec.with_g(value)),
    };
    spec.validate()?;
    match model {
        ModelId::DickeFieldSlow | ModelId::DickeFull => Ok(field_slow_potential(a, &spec).c2 < 0.0),
        ModelId::DickeAtomSlow | ModelId::DickeAtomSlowRotated => {
            Ok(find_stationary(a, &spec, false)?.minima().count() >= 2)
        }
        ModelId::SpinSpinSlow => Err(invalid("bifurcation scan is defined for the Dicke models only")),
    }
}

/// Locates the transition along a sweep: the sign of the field potential's
/// quadratic coefficient, or one versus two classical minima for the atom model.
pub fn bifurcation_scan(model: ModelId, base: &ScanBase, sweep: &Sweep) -> Result<BifurcationResult> {
    sweep.validate()?;
    let points = sweep.points();
    let phases: Vec<bool> = points
        .par_iter()
        .map(|&v| broken_phase(model, base, sweep.parameter, v))
        .collect::<Result<_>>()?;
    let k = phases
        .windows(2)
        .position(|w| w[0] != w[1])
        .ok_or_else(|| Error::NotBracketed(format!("no transition between {} and {}", sweep.start, sweep.stop)))?;
    let (mut lo, mut hi) = (points[k], points[k + 1]);
    let low_phase = phases[k];
    let target = 1e-6 * (sweep.stop - sweep.start);
    while 0.5 * (hi - lo) > target {
        let mid = 0.5 * (lo + hi);
        if broken_phase(model, base, sweep.parameter, mid)? == low_phase {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(BifurcationResult { critical: 0.5 * (lo + hi), half_width: 0.5 * (hi - lo), grid_bracket: (points[k], points[k + 1]) })
}
