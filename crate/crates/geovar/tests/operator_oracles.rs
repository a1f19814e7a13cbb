//! Stencil operators against brute-force matrix expressions.

mod common;

use common::{kinetic_cells, random_cells, random_solenoidal, rng};
use geovar::lie_core::{cayley_matrix, pairing, skew_outer};
use geovar::matrix_backend::*;
use geovar::models::{fluid_step, FluidState};
use geovar::staggered_grid::*;
use geovar::timestepper::{apply_cayley_cells, SolverConfig};
use geovar::diagnostics;
use nalgebra::{DMatrix, DVector};

fn periodic(n: usize, eps: f64) -> (GridSpec, MeshIndex) {
    let g = GridSpec::new(n, n, eps, Boundary::Periodic).unwrap();
    let m = MeshIndex::new(&g).unwrap();
    (g, m)
}

fn flux(w: &StaggeredVectorField, m: &MeshIndex) -> geovar::AlgebraMatrix64 {
    to_flux_matrix(w, m).unwrap()
}

/// Worst mismatch of `⟨C, Z⟩` and `ε² Σ z·x` over random test fields `Z`.
fn weak_mismatch(c: &DMatrix<f64>, x: &StaggeredVectorField, m: &MeshIndex, r: &mut rand_chacha::ChaCha8Rng) -> f64 {
    let e2 = m.grid.eps * m.grid.eps;
    (0..20)
        .map(|_| {
            let z = random_solenoidal(&m.grid, r);
            let lhs = pairing(c, flux(&z, m).entries(), &m.omega());
            (lhs - e2 * z.dot(x)).abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn psi_matches_lie_derivative_of_flat() {
    let (_, m) = periodic(6, 0.7);
    let mut r = rng(11);
    for _ in 0..20 {
        let a = random_solenoidal(&m.grid, &mut r);
        let am = flux(&a, &m);
        let l = lie_deriv_one_form(&am, &flat(am.entries(), &m).unwrap());
        assert!(weak_mismatch(&l, &psi_op(&a), &m, &mut r) <= 1e-12);
        // Adjacent entries are −εΨ up to the differential of ½Σ(edge²).
        let expect = &psi_op(&a) + &gradient_cell(&kinetic_cells(&a));
        let got = flux_to_field(&(&l * (1.0 / (2.0 * m.grid.eps * m.grid.eps))), &m);
        assert!((&got - &expect).max_abs() < 1e-12);
    }
}

#[test]
fn phi_matches_sparsified_bracket() {
    let (_, m) = periodic(6, 0.7);
    let mut r = rng(12);
    for _ in 0..20 {
        let a = random_solenoidal(&m.grid, &mut r);
        let b = random_solenoidal(&m.grid, &mut r);
        let lv = lie_deriv_vector(&flux(&a, &m), &flux(&b, &m), &m).unwrap();
        let got = flux_to_field(lv.entries(), &m);
        assert!((&got - &phi_op(&a, &b).unwrap()).max_abs() <= 1e-12);
    }
}

#[test]
fn lambda_matches_skew_product() {
    let (_, m) = periodic(6, 0.7);
    let mut r = rng(13);
    for _ in 0..20 {
        let f = random_cells(&m.grid, &mut r);
        let e = random_cells(&m.grid, &mut r);
        let s = skew_outer(&DVector::from_vec(f.data.clone()), &DVector::from_vec(e.data.clone()));
        let lam = lambda_op(&f, &e).unwrap();
        // skew(F Eᵀ)_mn = −ε Λ(F, E) on neighbours.
        let got = flux_to_field(&(&s * (1.0 / (2.0 * m.grid.eps * m.grid.eps))), &m);
        assert!((&got - &lam).max_abs() <= 1e-12);
        assert!(weak_mismatch(&s, &lam, &m, &mut r) <= 1e-12);
    }
}

#[test]
fn flat_pairing_is_symmetric() {
    let (_, m) = periodic(6, 0.4);
    let mut r = rng(14);
    for _ in 0..50 {
        let c = flux(&random_solenoidal(&m.grid, &mut r), &m);
        let b = flux(&random_solenoidal(&m.grid, &mut r), &m);
        let cb = pairing(&flat(c.entries(), &m).unwrap(), b.entries(), &m.omega());
        let bc = pairing(&flat(b.entries(), &m).unwrap(), c.entries(), &m.omega());
        assert!((cb - bc).abs() <= 1e-12 * cb.abs().max(1.0));
    }
}

#[test]
fn sparsify_preserves_pairings() {
    let (_, m) = periodic(6, 0.4);
    let mut r = rng(15);
    let a = flux(&random_solenoidal(&m.grid, &mut r), &m);
    let b = flux(&random_solenoidal(&m.grid, &mut r), &m);
    let comm = a.entries() * b.entries() - b.entries() * a.entries();
    let down = sparsify(&comm, &m).unwrap();
    for _ in 0..50 {
        let zf = flat(flux(&random_solenoidal(&m.grid, &mut r), &m).entries(), &m).unwrap();
        let lhs = pairing(&zf, &comm, &m.omega());
        let rhs = pairing(&zf, down.entries(), &m.omega());
        assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
    }
    assert!(geovar::AlgebraMatrix64::new(down.into_entries(), m.omega()).is_ok());
}

#[test]
fn flux_matrices_are_algebra_elements() {
    let (_, m) = periodic(6, 0.5);
    let mut r = rng(16);
    for _ in 0..20 {
        let w = random_solenoidal(&m.grid, &mut r);
        let a = flux(&w, &m);
        assert!(geovar::AlgebraMatrix64::new(a.entries().clone(), m.omega()).is_ok());
        assert_eq!(flux_to_field(a.entries(), &m), w);
    }
    let bad = StaggeredVectorField::from_fn(&m.grid, |x, _| x, |_, _| 0.0);
    assert!(to_flux_matrix(&bad, &m).is_err());
}

#[test]
fn flat_energy_ratio_is_resolution_independent() {
    let ratio = |n: usize| {
        let (g, m) = periodic(n, 1.0 / n as f64);
        let two_pi = std::f64::consts::TAU;
        let w = from_stream_function(&VertexField::from_fn(&g, |x, y| (two_pi * x).sin() * (two_pi * y).cos()));
        let a = flux(&w, &m);
        pairing(&flat(a.entries(), &m).unwrap(), a.entries(), &m.omega()) / (2.0 * g.eps * g.eps * w.dot(&w))
    };
    let (r1, r2) = (ratio(8), ratio(16));
    assert!(((r1 - r2) / r2).abs() < 0.05);
}

#[test]
fn stencil_cross_helicity_matches_matrix_pairing() {
    let (_, m) = periodic(6, 0.6);
    let mut r = rng(17);
    for (k, h) in [0.0, 0.1, 0.37].into_iter().cycle().take(20).enumerate() {
        let u = random_solenoidal(&m.grid, &mut r);
        let b = random_solenoidal(&m.grid, &mut r);
        let j_mat = cross_helicity(&flux(&u, &m), &flux(&b, &m), h, &m).unwrap();
        let j_st = diagnostics::cross_helicity(&u, &b, h);
        assert!((j_mat - j_st).abs() <= 1e-12 * j_st.abs().max(1.0), "case {k}: {j_mat} vs {j_st}");
    }
}

#[test]
fn fluid_step_matches_matrix_update() {
    let cfg = SolverConfig { residual_tol: 1e-13, ..Default::default() };
    for n in [5, 6] {
        let (_, m) = periodic(n, 0.5);
        let mut r = rng(18 + n as u64);
        let u0 = &random_solenoidal(&m.grid, &mut r) * 0.5;
        let h = 0.1;
        let grid_next = fluid_step(&FluidState::new(u0.clone()), h, &cfg).unwrap();
        let mat_next = fluid_step_matrix(&flux(&u0, &m), h, false, &m).unwrap();
        let diff = (&flux_to_field(mat_next.entries(), &m) - &grid_next.vel).max_abs();
        assert!(diff <= 1e-9, "{n}x{n}: {diff}");
    }
}

#[test]
fn recovered_pressure_matches_solver() {
    let cfg = SolverConfig { residual_tol: 1e-13, ..Default::default() };
    let (g, m) = periodic(6, 0.5);
    let mut r = rng(21);
    let u0 = random_solenoidal(&g, &mut r);
    let h = 0.05;
    let s1 = fluid_step(&FluidState::new(u0.clone()), h, &cfg).unwrap();
    let (y0, y1) = (flux(&u0, &m), flux(&s1.vel, &m));
    let f0 = flat(y0.entries(), &m).unwrap();
    let f1 = flat(y1.entries(), &m).unwrap();
    let resid = (&f1 - &f0) / h + (lie_deriv_one_form(&y0, &f0) + lie_deriv_one_form(&y1, &f1)) * 0.5;
    let p = recover_pressure(&resid, &m).unwrap();
    // Matrix pressure is −p plus the mean kinetic potential of the two levels.
    let k = &(&kinetic_cells(&u0) + &kinetic_cells(&s1.vel)) * 0.5;
    let expect = (&k - &s1.p).demeaned();
    assert!((&p - &expect).max_abs() < 1e-8);
}

#[test]
fn matrix_free_cayley_matches_dense() {
    for b in [Boundary::Periodic, Boundary::NoNormalFlow] {
        let g = GridSpec::new(5, 5, 0.5, b).unwrap();
        let m = MeshIndex::new(&g).unwrap();
        let mut r = rng(22);
        let w = random_solenoidal(&g, &mut r);
        let x = random_cells(&g, &mut r);
        let y = flux(&w, &m);
        let dense = cayley_matrix(&(y.entries() * 0.3)).unwrap() * DVector::from_vec(x.data.clone());
        let free = apply_cayley_cells(&w, &x, 0.3, &SolverConfig::default()).unwrap();
        let err = free.data.iter().zip(dense.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{b:?}: {err}");
    }
}

#[test]
fn stream_function_fields_are_solenoidal() {
    for b in [Boundary::Periodic, Boundary::NoNormalFlow] {
        let g = GridSpec::new(7, 6, 0.3, b).unwrap();
        let mut r = rng(23);
        for _ in 0..10 {
            assert!(divergence_cell(&random_solenoidal(&g, &mut r)).max_abs() <= 1e-13);
        }
    }
}
