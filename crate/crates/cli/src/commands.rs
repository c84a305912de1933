//! One function per subcommand; each returns the table to be written.

use anyhow::{Context, Result};
use effham::classical::{bifurcation_scan, find_stationary, order_parameter, ScanBase, Sweep, SweepParameter};
use effham::effective::DisplacementConvention;
use effham::models::{
    alternating_parity, critical_coupling, dicke_atom_slow, dicke_field_slow_banded, dicke_full, dicke_full_parity,
    field_slow_potential, spin_spin_slow, CriticalParams,
};
use effham::spectra::cutoff::{converge_cutoff_with_schedule, dicke_full_probe, field_slow_probe};
use effham::spectra::{density_of_states, eig_sym, eig_sym_with_parity, CUTOFF_SCHEDULE};
use effham::verify::{
    closed_vs_generic, convention_review, error_scaling, finite_size_convergence, ComparisonParams, ErrorTable,
};
use effham::{Error, ModelId, ModelSpec, Operator, SpectralResult};
use rayon::prelude::*;

use crate::config::{Check, ConfigError, NMax, RunConfig};
use crate::output::{Cell, Table};

/// Fock cutoff used by `closed-vs-generic` when `n-max` is `auto`.
const COMPARISON_N_MAX: usize = 40;

fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

/// Slow and fast sizes of a model: `(A, A₂)`; `A₂` only matters for spin-spin.
fn sizes(cfg: &RunConfig, model: ModelId) -> Result<(f64, f64)> {
    match model {
        ModelId::SpinSpinSlow => {
            let a1 = cfg.spin_size("A1", cfg.a1.map(|v| v as f64).or(cfg.a))?;
            let a2 = cfg.spin_size("A2", cfg.a2.map(|v| v as f64))?;
            Ok((a1 as f64, a2 as f64))
        }
        ModelId::DickeFieldSlow => match cfg.a {
            Some(a) if a > 0.0 => Ok((a, 0.0)),
            Some(a) => Err(config_error(format!("A must be positive, got {a}"))),
            None => Err(config_error("--A is required for this model")),
        },
        _ => Ok((cfg.spin_size("A", cfg.a)? as f64, 0.0)),
    }
}

fn xi_at(model: ModelId, a: f64, a2: f64, spec: ModelSpec) -> Result<f64, Error> {
    critical_coupling(model, &CriticalParams { a, a2, spec }).map(|c| c.xi)
}

/// Coupling with `ξ(g) = target`, by bisection on `(0, ω₂)`; `ξ` grows with
/// `g` until the renormalized frequency collapses.
fn solve_coupling(model: ModelId, a: f64, a2: f64, omega1: f64, omega2: f64, target: f64) -> Result<f64> {
    if !(target > 0.0) {
        return Err(config_error(format!("xi must be positive, got {target}")));
    }
    let xi = |g: f64| -> Result<f64> {
        let spec = ModelSpec::new(omega1, omega2, g)?;
        match xi_at(model, a, a2, spec) {
            Ok(x) => Ok(x),
            Err(Error::RegimeInvalid(_)) => Ok(f64::INFINITY),
            Err(e) => Err(e.into()),
        }
    };
    let (mut lo, mut hi) = (0.0, omega2 * (1.0 - 1e-9));
    if xi(hi)? < target {
        return Err(Error::NotBracketed(format!("xi = {target} is not reached for g below omega2")).into());
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if xi(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn coupling(cfg: &RunConfig, model: ModelId, a: f64, a2: f64) -> Result<f64> {
    match (cfg.g, cfg.xi) {
        (Some(g), _) => Ok(g),
        (None, Some(xi)) => solve_coupling(model, a, a2, cfg.omega1, cfg.omega2, xi),
        (None, None) => Err(config_error("give --g or --xi")),
    }
}

fn model_spec(cfg: &RunConfig, g: f64) -> Result<ModelSpec> {
    let spec = ModelSpec::new(cfg.omega1, cfg.omega2, g)?;
    for w in spec.regime_warnings() {
        log::warn!("{w}");
    }
    Ok(spec)
}

/// An assembled model ready for diagonalization.
struct Built {
    op: Operator,
    parity: Option<Vec<f64>>,
    n_max: Option<usize>,
}

fn cutoff(model: ModelId, a: f64, spec: &ModelSpec, n_max: NMax, tol: f64) -> Result<usize> {
    let n = match n_max {
        NMax::Fixed(n) => n,
        NMax::Auto => {
            let r = match model {
                ModelId::DickeFull => {
                    converge_cutoff_with_schedule(&CUTOFF_SCHEDULE, tol, |n| dicke_full_probe(a as usize, spec, n))?
                }
                _ => converge_cutoff_with_schedule(&CUTOFF_SCHEDULE, tol, |n| field_slow_probe(a, spec, n))?,
            };
            log::info!("cutoff converged at n_max = {}", r.n_max);
            r.n_max
        }
    };
    Ok(n)
}

fn build(model: ModelId, a: f64, a2: f64, spec: &ModelSpec, n_max: NMax, tol: f64) -> Result<Built> {
    let built = match model {
        ModelId::DickeFull => {
            let n = cutoff(model, a, spec, n_max, tol)?;
            let ai = a as usize;
            Built { op: dicke_full(ai, n, spec)?, parity: Some(dicke_full_parity(ai, n)), n_max: Some(n) }
        }
        ModelId::DickeFieldSlow => {
            let n = cutoff(model, a, spec, n_max, tol)?;
            let (band, _) = dicke_field_slow_banded(a, n, spec)?;
            Built { op: band.to_dense()?, parity: Some(alternating_parity(n + 1)), n_max: Some(n) }
        }
        ModelId::DickeAtomSlow => {
            let ai = a as usize;
            Built { op: dicke_atom_slow(ai, spec, false)?, parity: Some(alternating_parity(ai + 1)), n_max: None }
        }
        ModelId::DickeAtomSlowRotated => {
            Built { op: dicke_atom_slow(a as usize, spec, true)?, parity: None, n_max: None }
        }
        ModelId::SpinSpinSlow => {
            let (op, _) = spin_spin_slow(a as usize, a2 as usize, spec)?;
            Built { op, parity: Some(alternating_parity(a as usize + 1)), n_max: None }
        }
    };
    Ok(built)
}

fn solve(b: &Built) -> Result<SpectralResult> {
    Ok(match &b.parity {
        Some(p) => eig_sym_with_parity(&b.op, p)?,
        None => eig_sym(&b.op, false)?,
    })
}

fn diagnostics(t: &mut Table, model: ModelId, a: f64, a2: f64, spec: &ModelSpec) -> Result<()> {
    let d = spec.delta();
    let crit = critical_coupling(model, &CriticalParams { a, a2, spec: *spec })?;
    t.note("model", model.name());
    t.note("A", a);
    t.note("g", spec.g);
    t.note("delta", d);
    t.note("omega1_tilde", crit.omega1_tilde);
    t.note("xi", crit.xi);
    t.note("A_delta", a * d);
    t.note("A_delta_sq", a * d * d);
    if let Some(ac) = crit.a_critical {
        t.note("A_critical", ac);
    }
    Ok(())
}

pub fn spectrum(cfg: &RunConfig) -> Result<Table> {
    let model = cfg.model();
    let (a, a2) = sizes(cfg, model)?;
    let spec = model_spec(cfg, coupling(cfg, model, a, a2)?)?;
    let built = build(model, a, a2, &spec, cfg.n_max, cfg.tol)?;
    let res = solve(&built)?;
    let mut t = match cfg.bins {
        Some(bins) => {
            let hist = density_of_states(&res.eigenvalues, bins)?;
            let edges = hist.edges();
            let mut t = Table::new(vec!["bin", "lo", "hi", "count"]);
            for (k, c) in hist.counts.iter().enumerate() {
                t.push(vec![k.into(), edges[k].into(), edges[k + 1].into(), (*c).into()]);
            }
            t.note("interior_argmax", hist.interior_argmax());
            t
        }
        None => {
            let mut t = Table::new(vec!["index", "energy", "parity"]);
            for (k, e) in res.eigenvalues.iter().enumerate() {
                let parity = res.parity_labels.as_ref().map(|p| p[k] as i64).map_or(Cell::Empty, Cell::Int);
                t.push(vec![k.into(), (*e).into(), parity]);
            }
            t
        }
    };
    diagnostics(&mut t, model, a, a2, &spec)?;
    if model == ModelId::SpinSpinSlow {
        t.note("A2", a2);
    }
    t.note("dim", built.op.dim());
    t.note("n_max", built.n_max);
    t.note("ground_energy", res.ground_energy);
    t.note("gap", res.gap);
    Ok(t)
}

pub fn classical(cfg: &RunConfig) -> Result<Table> {
    let a = cfg.a.ok_or_else(|| config_error("classical needs --A"))?;
    if !(a > 0.0) {
        return Err(config_error(format!("A must be positive, got {a}")));
    }
    let g = coupling(cfg, ModelId::DickeAtomSlow, a, 0.0)?;
    let spec = model_spec(cfg, g)?;
    let l = find_stationary(a, &spec, cfg.corrections)?;
    let mut t = Table::new(vec!["theta", "phi", "energy", "kind"]);
    for p in &l.stationary_points {
        t.push(vec![p.theta.into(), p.phi.into(), p.energy.into(), p.kind.name().into()]);
    }
    t.note("A", a);
    t.note("g", g);
    t.note("xi", l.xi);
    t.note("omega1_tilde", l.omega1_tilde);
    t.note("include_cubic_corrections", l.include_cubic_corrections);
    t.note("minima", l.minima().count());
    t.note("min_energy", l.min_energy());
    t.note("order_parameter", l.order_parameter);
    t.note("order_parameter_formula", order_parameter(l.xi));
    t.note("separatrix_energy", l.separatrix_energy);
    Ok(t)
}

/// Scan rows, plus the transition bracket unless it could not be found.
pub fn scan(cfg: &RunConfig) -> Result<(Table, Option<anyhow::Error>)> {
    let model = cfg.model();
    let sweep = cfg.sweep.expect("sweep presence is checked on resolve");
    if sweep.parameter == SweepParameter::G && cfg.xi.is_some() {
        return Err(config_error("a g sweep cannot also fix xi"));
    }
    let points = sweep.points();
    let rows: Vec<Vec<Cell>> = points
        .par_iter()
        .map(|&v| scan_point(cfg, model, sweep.parameter, v))
        .collect::<Result<_>>()?;
    let mut t = Table::new(vec!["value", "A", "g", "e0", "gap", "xi", "order_parameter", "c2", "n_max"]);
    for r in rows {
        t.push(r);
    }
    t.note("model", model.name());
    t.note("param", if sweep.parameter == SweepParameter::A { "A" } else { "g" });
    let mut deferred = None;
    match bifurcation(cfg, model, &sweep) {
        Ok(Some(r)) => {
            t.note("critical", r.critical);
            t.note("half_width", r.half_width);
            t.note("bracket_lo", r.grid_bracket.0);
            t.note("bracket_hi", r.grid_bracket.1);
        }
        Ok(None) => {}
        Err(e) => deferred = Some(e),
    }
    Ok((t, deferred))
}

fn bifurcation(cfg: &RunConfig, model: ModelId, sweep: &Sweep) -> Result<Option<effham::classical::BifurcationResult>> {
    if model == ModelId::SpinSpinSlow || sweep.steps < Sweep::MIN_STEPS || cfg.xi.is_some() {
        return Ok(None);
    }
    let base = match sweep.parameter {
        SweepParameter::A => {
            let g = cfg.g.ok_or_else(|| config_error("an A sweep needs --g or --xi"))?;
            ScanBase { a: 1.0, spec: ModelSpec::new(cfg.omega1, cfg.omega2, g)? }
        }
        SweepParameter::G => {
            let a = cfg.a.ok_or_else(|| config_error("a g sweep needs --A"))?;
            ScanBase { a, spec: ModelSpec::new(cfg.omega1, cfg.omega2, 0.0)? }
        }
    };
    Ok(Some(bifurcation_scan(model, &base, sweep)?))
}

fn scan_point(cfg: &RunConfig, model: ModelId, param: SweepParameter, v: f64) -> Result<Vec<Cell>> {
    let (a, a2, g) = match param {
        SweepParameter::A => {
            let mut c = cfg.clone();
            if model == ModelId::SpinSpinSlow {
                c.a1 = None;
            }
            c.a = Some(v);
            let (a, a2) = sizes(&c, model)?;
            (a, a2, coupling(&c, model, a, a2)?)
        }
        SweepParameter::G => {
            let (a, a2) = sizes(cfg, model)?;
            (a, a2, v)
        }
    };
    let spec = ModelSpec::new(cfg.omega1, cfg.omega2, g)?;
    let built = build(model, a, a2, &spec, cfg.n_max, cfg.tol).with_context(|| format!("scan point {v}"))?;
    let res = solve(&built)?;
    let xi = xi_at(model, a, a2, spec)?;
    let (order, c2) = match model {
        ModelId::DickeFull | ModelId::DickeFieldSlow => {
            (Cell::from(order_parameter(xi)), Cell::from(field_slow_potential(a, &spec).c2))
        }
        ModelId::DickeAtomSlow | ModelId::DickeAtomSlowRotated => {
            (Cell::from(find_stationary(a, &spec, cfg.corrections)?.order_parameter), Cell::Empty)
        }
        ModelId::SpinSpinSlow => (Cell::Empty, Cell::Empty),
    };
    Ok(vec![
        v.into(),
        a.into(),
        g.into(),
        res.ground_energy.into(),
        res.gap.into(),
        xi.into(),
        order,
        c2,
        built.n_max.into(),
    ])
}

fn error_rows(t: &mut Table, label: Option<&str>, table: &ErrorTable) {
    for r in &table.rows {
        let mut row: Vec<Cell> = label.map(|l| vec![l.into()]).unwrap_or_default();
        row.extend([
            r.delta.into(),
            r.e0_exact.into(),
            r.e0_effective.into(),
            r.abs_error.into(),
            r.rel_error.into(),
            r.n_max_exact.into(),
            r.n_max_effective.into(),
        ]);
        t.push(row);
    }
}

const ERROR_COLUMNS: [&str; 7] =
    ["delta", "e0_exact", "e0_effective", "abs_error", "rel_error", "n_max_exact", "n_max_effective"];

pub fn verify(cfg: &RunConfig) -> Result<Table> {
    let check = cfg.check.expect("check presence is checked on resolve");
    match check {
        Check::ErrorScaling => {
            let a = cfg.a.map_or(Ok(4), |_| cfg.spin_size("A", cfg.a))?;
            let table = error_scaling(a, &cfg.deltas, cfg.ratio, DisplacementConvention::DEFAULT, cfg.tol)?;
            let mut t = Table::new(ERROR_COLUMNS.to_vec());
            error_rows(&mut t, None, &table);
            t.note("A", a);
            t.note("slope", table.slope);
            t.note("monotone", table.monotone);
            t.note("warnings", table.warnings.join("; "));
            Ok(t)
        }
        Check::Convention => {
            let a = cfg.a.map_or(Ok(4), |_| cfg.spin_size("A", cfg.a))?;
            let review = convention_review(a, &cfg.deltas, cfg.ratio, cfg.tol)?;
            let mut header = vec!["convention"];
            header.extend(ERROR_COLUMNS);
            let mut t = Table::new(header);
            error_rows(&mut t, Some("default"), &review.default);
            error_rows(&mut t, Some("alternative"), &review.alternative);
            t.note("A", a);
            t.note("slope_default", review.default.slope);
            t.note("slope_alternative", review.alternative.slope);
            t.note("flagged", review.flagged);
            Ok(t)
        }
        Check::ClosedVsGeneric => {
            let model = cfg.model.ok_or_else(|| config_error("closed-vs-generic needs --model"))?;
            let (a, a2) = match model {
                ModelId::DickeFieldSlow => (cfg.spin_size("A", cfg.a)? as f64, 0.0),
                other => sizes(cfg, other)?,
            };
            let spec = model_spec(cfg, coupling(cfg, model, a, a2)?)?;
            let n_max = match cfg.n_max {
                NMax::Fixed(n) => n,
                NMax::Auto => COMPARISON_N_MAX,
            };
            let params = ComparisonParams { a: a as usize, a2: a2 as usize, n_max, spec };
            let c = closed_vs_generic(model, &params)?;
            let mut t = Table::new(vec!["term", "closed", "generic", "difference", "ratio"]);
            for term in &c.terms {
                t.push(vec![
                    term.term.clone().into(),
                    term.closed.into(),
                    term.generic.into(),
                    term.difference().into(),
                    term.ratio().into(),
                ]);
            }
            t.note("model", model.name());
            t.note("max_abs", c.max_abs);
            t.note("max_abs_offdiag", c.max_abs_offdiag);
            t.note("norm", c.norm);
            Ok(t)
        }
        Check::FiniteSize => {
            let xi = cfg.xi.ok_or_else(|| config_error("finite-size needs --xi"))?;
            let table = finite_size_convergence(&cfg.a_list, xi, cfg.omega1, cfg.omega2, cfg.corrections)?;
            let mut t = Table::new(vec!["A", "g", "e0_quantum", "e0_classical", "diff"]);
            for r in &table.rows {
                t.push(vec![r.a.into(), r.g.into(), r.e0_quantum.into(), r.e0_classical.into(), r.diff.into()]);
            }
            t.note("xi", xi);
            t.note("include_cubic_corrections", cfg.corrections);
            t.note("strictly_converging", table.strictly_converging());
            t.note("richardson_limit", table.richardson_limit);
            Ok(t)
        }
    }
}
