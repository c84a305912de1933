//! Fock-space cutoff control for models with a truncated boson.

use std::collections::BTreeMap;

use crate::effective::ModelSpec;
use crate::error::{invalid, Error, Result};
use crate::models::{alternating_parity, dicke_field_slow_banded, dicke_full_banded, dicke_full_parity};
use crate::operator::BandOperator;
use crate::spectra::banded::ground_state;
use crate::spectra::PARITY_TOL;

/// Cutoffs tried in order.
pub const CUTOFF_SCHEDULE: [usize; 7] = [16, 32, 64, 128, 256, 512, 1024];

/// Schedule extended to the largest cutoff the banded solver handles comfortably.
pub const EXTENDED_CUTOFF_SCHEDULE: [usize; 9] = [16, 32, 64, 128, 256, 512, 1024, 2048, 4096];

/// Ground-state weight allowed on the highest Fock level.
pub const TOP_POPULATION_LIMIT: f64 = 1e-8;

/// Ground energy at one cutoff and the ground-state weight on the top Fock level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutoffProbe {
    pub ground_energy: f64,
    pub top_population: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutoffResult {
    pub n_max: usize,
    pub ground_energy: f64,
    /// Ground energy at `2·n_max`.
    pub doubled_energy: f64,
    pub top_population: f64,
}

/// Lowest energy over the parity sectors of `op`, with its vector embedded in
/// the full basis.
pub fn sector_ground(op: &BandOperator, parity: &[f64]) -> Result<(f64, Vec<f64>)> {
    if parity.len() != op.dim() {
        return Err(invalid("parity length does not match the operator"));
    }
    let leak = op.commutator_with_diagonal(parity);
    if leak > PARITY_TOL {
        return Err(Error::NotBlockDiagonal(leak));
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    for sign in [1.0, -1.0] {
        let keep: Vec<usize> = (0..parity.len()).filter(|&k| parity[k] == sign).collect();
        if keep.is_empty() {
            continue;
        }
        let gs = ground_state(op.restrict(&keep).band())?;
        if best.as_ref().map_or(true, |(e, _)| gs.energy < *e) {
            let mut full = vec![0.0; op.dim()];
            for (v, &k) in gs.vector.iter().zip(&keep) {
                full[k] = *v;
            }
            best = Some((gs.energy, full));
        }
    }
    Ok(best.expect("at least one sector is non-empty"))
}

/// Probe for a boson-slow operator whose labels carry the Fock index in `x`.
pub fn probe_band(op: &BandOperator, parity: &[f64], n_max: usize) -> Result<CutoffProbe> {
    let (energy, v) = sector_ground(op, parity)?;
    let top_population = op.labels().iter().zip(&v).filter(|(l, _)| l.x == n_max).map(|(_, c)| c * c).sum();
    Ok(CutoffProbe { ground_energy: energy, top_population })
}

pub fn field_slow_probe(a: f64, spec: &ModelSpec, n_max: usize) -> Result<CutoffProbe> {
    let (op, _) = dicke_field_slow_banded(a, n_max, spec)?;
    probe_band(&op, &alternating_parity(n_max + 1), n_max)
}

pub fn dicke_full_probe(a: usize, spec: &ModelSpec, n_max: usize) -> Result<CutoffProbe> {
    let op = dicke_full_banded(a, n_max, spec)?;
    probe_band(&op, &dicke_full_parity(a, n_max), n_max)
}

/// Smallest `n_max` of `schedule` with `|E₀(n_max) − E₀(2·n_max)| < tol` and
/// top-level population below `TOP_POPULATION_LIMIT`.
pub fn converge_cutoff_with_schedule<F>(schedule: &[usize], tol: f64, mut probe: F) -> Result<CutoffResult>
where
    F: FnMut(usize) -> Result<CutoffProbe>,
{
    if !(tol > 0.0) {
        return Err(invalid(format!("tolerance must be positive, got {tol}")));
    }
    let mut cache: BTreeMap<usize, CutoffProbe> = BTreeMap::new();
    let mut eval = |n: usize, cache: &mut BTreeMap<usize, CutoffProbe>| -> Result<CutoffProbe> {
        if let Some(p) = cache.get(&n) {
            return Ok(*p);
        }
        let p = probe(n)?;
        cache.insert(n, p);
        Ok(p)
    };
    let mut last = None;
    for &n in schedule {
        let here = eval(n, &mut cache)?;
        if here.top_population >= TOP_POPULATION_LIMIT {
            last = Some((n, here, f64::NAN));
            continue;
        }
        let next = eval(2 * n, &mut cache)?;
        let change = (here.ground_energy - next.ground_energy).abs();
        if change < tol {
            return Ok(CutoffResult {
                n_max: n,
                ground_energy: here.ground_energy,
                doubled_energy: next.ground_energy,
                top_population: here.top_population,
            });
        }
        last = Some((n, here, change));
    }
    let detail = match last {
        Some((n, p, change)) => format!(
            "last cutoff {n}: energy change {change:e}, top population {:e}",
            p.top_population
        ),
        None => "empty schedule".into(),
    };
    Err(Error::NoConvergence(format!("cutoff schedule exhausted at tol {tol:e}; {detail}")))
}

/// Cutoff convergence of the field-slow model on `CUTOFF_SCHEDULE`.
pub fn converge_cutoff(a: f64, spec: &ModelSpec, tol: f64) -> Result<CutoffResult> {
    converge_cutoff_with_schedule(&CUTOFF_SCHEDULE, tol, |n| field_slow_probe(a, spec, n))
}
