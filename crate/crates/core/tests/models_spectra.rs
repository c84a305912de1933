use approx::assert_abs_diff_eq;
use effham::algebra::{make_boson_rep, make_spin_rep};
use effham::effective::{build_generic_effective, project_fast_ground};
use effham::models::{
    alternating_parity, atom_slow_omega1_tilde, coupling_for_xi, dicke_atom_slow, dicke_field_slow, dicke_full,
    dicke_full_parity, field_slow_potential,
};
use effham::spectra::{eig_sym, parity_decompose, precise::atom_slow_gap};
use effham::{ModelSpec, Operator};

fn spec_for_xi(a: usize, xi: f64) -> ModelSpec {
    ModelSpec::new(0.01, 1.0, coupling_for_xi(a as f64, xi, 0.01, 1.0).unwrap()).unwrap()
}

fn commutator_norm(h: &Operator, diag: &[f64]) -> f64 {
    h.commutator_with_diagonal(diag)
}

#[test]
fn rotated_and_unrotated_spectra_agree() {
    let spec = ModelSpec::new(0.01, 1.0, 0.05).unwrap();
    for a in [2, 10, 40] {
        let e0 = eig_sym(&dicke_atom_slow(a, &spec, false).unwrap(), false).unwrap().eigenvalues;
        let e1 = eig_sym(&dicke_atom_slow(a, &spec, true).unwrap(), false).unwrap().eigenvalues;
        for (x, y) in e0.iter().zip(&e1) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-10);
        }
    }
}

#[test]
fn dicke_full_commutes_with_parity() {
    let spec = ModelSpec::new(0.01, 1.0, 0.05).unwrap();
    let h = dicke_full(4, 30, &spec).unwrap();
    assert_eq!(commutator_norm(&h, &dicke_full_parity(4, 30)), 0.0);
}

#[test]
fn effective_dicke_models_commute_with_parity() {
    let spec = ModelSpec::new(0.01, 1.0, 0.05).unwrap();
    let (h, _) = dicke_field_slow(4, 40, &spec).unwrap();
    assert_eq!(commutator_norm(&h, &alternating_parity(41)), 0.0);
    let h = dicke_atom_slow(10, &spec, false).unwrap();
    assert_eq!(commutator_norm(&h, &alternating_parity(11)), 0.0);
}

#[test]
fn field_blocks_have_expected_sizes_and_spectrum() {
    let spec = ModelSpec::new(0.01, 1.0, 0.05).unwrap();
    let (h, _) = dicke_field_slow(4, 40, &spec).unwrap();
    let (even, odd) = parity_decompose(&h, &alternating_parity(41)).unwrap();
    assert_eq!((even.dim(), odd.dim()), (21, 20));
    let mut union: Vec<f64> = eig_sym(&even, false).unwrap().eigenvalues;
    union.extend(eig_sym(&odd, false).unwrap().eigenvalues);
    union.sort_by(f64::total_cmp);
    let full = eig_sym(&h, false).unwrap().eigenvalues;
    for (x, y) in union.iter().zip(&full) {
        assert_abs_diff_eq!(x, y, epsilon = 1e-10);
    }
}

#[test]
fn dicke_full_blocks_have_distinct_ground_energies() {
    let spec = ModelSpec::new(0.01, 1.0, 0.05).unwrap();
    let h = dicke_full(2, 20, &spec).unwrap();
    let (even, odd) = parity_decompose(&h, &dicke_full_parity(2, 20)).unwrap();
    let e_even = eig_sym(&even, false).unwrap().ground_energy;
    let e_odd = eig_sym(&odd, false).unwrap().ground_energy;
    assert!((e_even - e_odd).abs() > 1e-12);
    let global = eig_sym(&h, false).unwrap().ground_energy;
    assert_abs_diff_eq!(global, e_even.min(e_odd), epsilon = 1e-12);
}

#[test]
fn field_potential_matches_generic_projection() {
    let spec = ModelSpec::new(0.01, 1.0, 0.05).unwrap();
    for a in [2usize, 4, 8] {
        let rx = make_boson_rep(12).unwrap();
        let ry = make_spin_rep(a).unwrap();
        let generic = build_generic_effective(&rx, &ry, &spec).unwrap();
        let proj = project_fast_ground(&generic, &ry, -(a as f64) / 2.0).unwrap();
        let (closed, coeffs) = dicke_field_slow(a, 12, &spec).unwrap();
        let d = spec.delta();
        assert_abs_diff_eq!(coeffs.c4, 4.0 * a as f64 * spec.g * d.powi(3), epsilon = 1e-15);
        // Off-diagonal entries carry only the quadratic and quartic terms.
        for i in 0..13 {
            for j in 0..13 {
                if i != j {
                    assert_abs_diff_eq!(closed.matrix()[(i, j)], proj.matrix()[(i, j)], epsilon = 1e-12);
                }
            }
        }
    }
}

#[test]
fn field_minimum_matches_grid_search() {
    let spec = ModelSpec::new(0.01, 1.0, 0.05).unwrap();
    let p = field_slow_potential(4.0, &spec);
    let x_sq = p.minimum_sq().unwrap();
    let (mut best_x, mut best_u) = (0.0, f64::INFINITY);
    for k in 0..=200_000 {
        let x = k as f64 * 1e-4;
        let u = p.eval(x);
        if u < best_u {
            best_u = u;
            best_x = x;
        }
    }
    assert!((best_x - x_sq.sqrt()).abs() < 2e-4);
}

#[test]
fn gap_shrinks_in_the_double_well() {
    let gaps: Vec<f64> = [20, 40, 80].iter().map(|&a| atom_slow_gap(a, &spec_for_xi(a, 2.0)).unwrap()).collect();
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2] && gaps[2] > 0.0, "{gaps:?}");
}

#[test]
fn precise_gap_matches_dense_at_moderate_size() {
    let spec = spec_for_xi(12, 2.0);
    let dense = eig_sym(&dicke_atom_slow(12, &spec, true).unwrap(), false).unwrap();
    let precise = atom_slow_gap(12, &spec).unwrap();
    assert_abs_diff_eq!(dense.gap.unwrap(), precise, epsilon = 1e-13);
}

#[test]
fn gap_near_frequency_in_normal_phase() {
    let spec = spec_for_xi(20, 0.05);
    let r = eig_sym(&dicke_atom_slow(20, &spec, true).unwrap(), false).unwrap();
    let w = atom_slow_omega1_tilde(&spec);
    assert!((r.gap.unwrap() - w).abs() < 0.1 * w);
}
