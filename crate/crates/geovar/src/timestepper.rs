//! Linear and nonlinear solves shared by the grid models.

use crate::staggered_grid::{
    divergence_cell, gradient_cell, laplacian_cell, phi_op_unchecked, CellField, StaggeredVectorField, DIV_TOL,
};
use crate::{GeovarError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Cap on nonlinear iterations (Picard or Newton) per implicit solve.
    pub picard_max: usize,
    /// Max-norm bound on the momentum stencil residual.
    pub residual_tol: f64,
    /// Relative residual for the pressure Poisson solve.
    pub poisson_tol: f64,
    pub linear_max_iter: usize,
    /// Relative residual for the Krylov solves (magnetic and Cayley systems).
    pub linear_tol: f64,
    pub krylov_restart: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            picard_max: 200,
            residual_tol: 1e-10,
            poisson_tol: 1e-12,
            linear_max_iter: 500,
            linear_tol: 1e-13,
            krylov_restart: 40,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let tols = [self.residual_tol, self.poisson_tol, self.linear_tol];
        if tols.iter().any(|t| !(*t > 0.0)) {
            return Err(GeovarError::ConstraintViolated("solver tolerances must be positive".into()));
        }
        if self.picard_max == 0 || self.linear_max_iter == 0 || self.krylov_restart == 0 {
            return Err(GeovarError::ConstraintViolated("iteration caps must be at least 1".into()));
        }
        Ok(())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn demean(x: &mut [f64]) {
    let m = x.iter().sum::<f64>() / x.len() as f64;
    x.iter_mut().for_each(|v| *v -= m);
}

/// Mean-zero `φ` with `𝚫φ = rhs`, by conjugate gradients on `−𝚫`.
pub fn poisson_solve(rhs: &CellField, cfg: &SolverConfig) -> Result<CellField> {
    let g = rhs.grid;
    let scale = rhs.data.iter().map(|x| x.abs()).sum::<f64>().max(1.0) * g.eps * g.eps;
    let total = rhs.integral();
    if total.abs() > 1e-10 * scale {
        return Err(GeovarError::IncompatibleRHS(total));
    }
    let mut b: Vec<f64> = rhs.data.iter().map(|x| -x).collect();
    demean(&mut b);
    let bn = norm(&b);
    let mut x = CellField::zeros(&g);
    if bn == 0.0 {
        return Ok(x);
    }
    let apply = |p: &CellField| -> Vec<f64> { laplacian_cell(p).data.iter().map(|v| -v).collect() };
    let mut r = b.clone();
    let mut p = CellField::from_data(&g, r.clone())?;
    let mut rr = dot(&r, &r);
    let max_iter = 10 * (g.nx + g.ny) + cfg.linear_max_iter;
    let target = cfg.poisson_tol * bn;
    for it in 0..max_iter {
        let ap = apply(&p);
        let alpha = rr / dot(&p.data, &ap);
        for k in 0..r.len() {
            x.data[k] += alpha * p.data[k];
            r[k] -= alpha * ap[k];
        }
        demean(&mut x.data);
        demean(&mut r);
        // Refresh the recurrence residual now and then to stop drift.
        if it % 50 == 49 {
            let ax = apply(&x);
            for k in 0..r.len() {
                r[k] = b[k] - ax[k];
            }
        }
        let rr_new = dot(&r, &r);
        if rr_new.sqrt() <= target {
            let ax = apply(&x);
            let true_res: f64 = norm(&b.iter().zip(&ax).map(|(a, c)| a - c).collect::<Vec<_>>());
            if true_res <= 10.0 * target {
                return Ok(x);
            }
            r = b.iter().zip(&ax).map(|(a, c)| a - c).collect();
            p.data.clone_from(&r);
            rr = dot(&r, &r);
            continue;
        }
        let beta = rr_new / rr;
        for k in 0..r.len() {
            p.data[k] = r[k] + beta * p.data[k];
        }
        rr = rr_new;
    }
    Err(GeovarError::PoissonNoConvergence { iterations: max_iter, residual: rr.sqrt() / bn })
}

/// Restarted GMRES from `x = 0`. Stops when `‖b − Ax‖₂ ≤ tol`.
pub fn gmres(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    tol: f64,
    restart: usize,
    max_iter: usize,
) -> Result<(Vec<f64>, usize)> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut beta = norm(&r);
    let mut total = 0;
    if beta <= tol {
        return Ok((x, 0));
    }
    let m = restart.min(n).max(1);
    while total < max_iter {
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut hess = vec![vec![0.0; m]; m + 1];
        let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
        let mut gvec = vec![0.0; m + 1];
        gvec[0] = beta;
        let mut used = 0;
        for jcol in 0..m {
            total += 1;
            let mut w = apply(&basis[jcol]);
            // Modified Gram-Schmidt, twice for stability.
            for _ in 0..2 {
                for (i, q) in basis.iter().enumerate() {
                    let c = dot(&w, q);
                    hess[i][jcol] += c;
                    w.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
                }
            }
            let wn = norm(&w);
            hess[jcol + 1][jcol] = wn;
            for i in 0..jcol {
                let t = cs[i] * hess[i][jcol] + sn[i] * hess[i + 1][jcol];
                hess[i + 1][jcol] = -sn[i] * hess[i][jcol] + cs[i] * hess[i + 1][jcol];
                hess[i][jcol] = t;
            }
            let (a, bb) = (hess[jcol][jcol], hess[jcol + 1][jcol]);
            let d = a.hypot(bb);
            cs[jcol] = if d == 0.0 { 1.0 } else { a / d };
            sn[jcol] = if d == 0.0 { 0.0 } else { bb / d };
            hess[jcol][jcol] = d;
            hess[jcol + 1][jcol] = 0.0;
            gvec[jcol + 1] = -sn[jcol] * gvec[jcol];
            gvec[jcol] *= cs[jcol];
            used = jcol + 1;
            if gvec[jcol + 1].abs() <= 0.5 * tol || wn == 0.0 || total >= max_iter {
                break;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }
        let mut y = vec![0.0; used];
        for i in (0..used).rev() {
            let s: f64 = (i + 1..used).map(|k| hess[i][k] * y[k]).sum();
            y[i] = (gvec[i] - s) / hess[i][i];
        }
        for (i, yi) in y.iter().enumerate() {
            x.iter_mut().zip(&basis[i]).for_each(|(a, q)| *a += yi * q);
        }
        let ax = apply(&x);
        r = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
        beta = norm(&r);
        if beta <= tol {
            return Ok((x, total));
        }
    }
    Err(GeovarError::NoConvergence { iterations: total, residual: beta })
}

fn pack(w: &StaggeredVectorField) -> Vec<f64> {
    w.u.iter().chain(&w.v).copied().collect()
}

fn unpack(like: &StaggeredVectorField, x: &[f64]) -> StaggeredVectorField {
    let nu = like.u.len();
    StaggeredVectorField { grid: like.grid, u: x[..nu].to_vec(), v: x[nu..].to_vec() }
}

/// Result of [`momentum_solve`].
#[derive(Clone, Debug)]
pub struct MomentumSolution {
    pub velocity: StaggeredVectorField,
    pub pressure: CellField,
    pub iterations: usize,
    pub residual: f64,
}

/// Solves `(w − w_prev)/h + N(w) = f − ∇p`, `∇·w = 0` for `w` and mean-zero `p`,
/// where `f` is `explicit_rhs` and `N` is `implicit`.
///
/// Fixed point of `G(w) = P[w_prev + h f − h N(w)]` with the Helmholtz
/// projection `P`. Picard steps while they contract quickly, then Newton steps
/// with GMRES on finite-difference products `G'(w)v` (exact for quadratic `N`
/// up to rounding). The reported residual `‖w − G(w)‖∞/h` equals the stencil
/// residual with the optimal pressure.
pub fn momentum_solve(
    prev: &StaggeredVectorField,
    explicit_rhs: &StaggeredVectorField,
    implicit: &dyn Fn(&StaggeredVectorField) -> StaggeredVectorField,
    h: f64,
    cfg: &SolverConfig,
) -> Result<MomentumSolution> {
    prev.grid.check(&explicit_rhs.grid, "momentum_solve")?;
    let d = divergence_cell(prev).max_abs();
    if d > DIV_TOL {
        return Err(GeovarError::ConstraintViolated(format!("previous velocity has divergence {d:e}")));
    }
    let mut base = prev.clone();
    base.axpy(h, explicit_rhs);
    // `None` once the iterate has blown up.
    let g_map = |x: &StaggeredVectorField| -> Result<Option<(StaggeredVectorField, CellField)>> {
        let mut target = base.clone();
        target.axpy(-h, &implicit(x));
        target.enforce_walls();
        if !target.max_abs().is_finite() {
            return Ok(None);
        }
        let phi = poisson_solve(&divergence_cell(&target), cfg)?;
        target.axpy(-1.0, &gradient_cell(&phi));
        Ok(Some((target, phi)))
    };
    let mut x = prev.clone();
    let Some((mut y, mut phi)) = g_map(&x)? else {
        return Err(GeovarError::NoConvergence { iterations: 0, residual: f64::INFINITY });
    };
    let mut last = f64::INFINITY;
    let mut best = f64::INFINITY;
    let mut newton = false;
    for it in 1..=cfg.picard_max {
        let f = &x - &y;
        let res = f.max_abs() / h.abs();
        if res <= cfg.residual_tol {
            return Ok(MomentumSolution { velocity: y, pressure: &phi * (1.0 / h), iterations: it, residual: res });
        }
        if !res.is_finite() {
            break;
        }
        newton |= it >= 3 && res > 0.3 * last;
        best = best.min(res);
        last = res;
        if newton {
            let xs = pack(&x);
            let scale = norm(&xs).max(1e-300);
            let jv = |v: &[f64]| -> Vec<f64> {
                let vn = norm(v);
                if vn == 0.0 {
                    return vec![0.0; v.len()];
                }
                let s = 1e-2 * scale / vn;
                let shifted = |sign: f64| {
                    let p: Vec<f64> = xs.iter().zip(v).map(|(a, b)| a + sign * s * b).collect();
                    g_map(&unpack(&x, &p)).ok().flatten().map(|(g, _)| pack(&g))
                };
                match (shifted(1.0), shifted(-1.0)) {
                    (Some(gp), Some(gm)) => v.iter().zip(gp.iter().zip(&gm)).map(|(a, (p, m))| a - (p - m) / (2.0 * s)).collect(),
                    _ => vec![f64::NAN; v.len()],
                }
            };
            let rhs: Vec<f64> = pack(&f).iter().map(|v| -v).collect();
            let tol = 1e-3 * norm(&rhs);
            let Ok((delta, _)) = gmres(jv, &rhs, tol, cfg.krylov_restart, cfg.linear_max_iter) else { break };
            if delta.iter().any(|v| !v.is_finite()) {
                break;
            }
            x.axpy(1.0, &unpack(&x, &delta));
        } else {
            x = y;
        }
        match g_map(&x)? {
            Some((gy, gp)) => (y, phi) = (gy, gp),
            None => break,
        }
    }
    Err(GeovarError::NoConvergence { iterations: cfg.picard_max, residual: last.min(best) })
}

/// `B` with `(B − B_prev)/h + Φ(u, (B_prev + B)/2) = 0` for a fixed advecting `u`.
pub fn magnetic_solve(
    adv: &StaggeredVectorField,
    b_prev: &StaggeredVectorField,
    h: f64,
    cfg: &SolverConfig,
) -> Result<StaggeredVectorField> {
    adv.grid.check(&b_prev.grid, "magnetic_solve")?;
    for (name, f) in [("velocity", adv), ("magnetic field", b_prev)] {
        let d = divergence_cell(f).max_abs();
        if d > DIV_TOL {
            return Err(GeovarError::ConstraintViolated(format!("{name} has divergence {d:e}")));
        }
    }
    // δ = B − B_prev solves (I + h/2 Φ_u) δ = −h Φ_u B_prev. Every Krylov vector
    // lies in the range of Φ_u and is therefore divergence-free.
    let rhs0 = phi_op_unchecked(adv, b_prev);
    let b: Vec<f64> = pack(&rhs0).iter().map(|x| -h * x).collect();
    let scale = (b_prev.norm2() + norm(&b)).max(f64::MIN_POSITIVE);
    let apply = |x: &[f64]| -> Vec<f64> {
        let f = unpack(b_prev, x);
        let pf = phi_op_unchecked(adv, &f);
        x.iter().zip(pack(&pf)).map(|(a, p)| a + 0.5 * h * p).collect()
    };
    let (delta, _) = gmres(apply, &b, cfg.linear_tol * scale, cfg.krylov_restart, cfg.linear_max_iter)?;
    let mut out = b_prev.clone();
    out.axpy(1.0, &unpack(b_prev, &delta));
    Ok(out)
}

/// `(Y x)_m = Σ_n Y_mn (x_n − x_m)` for the flux matrix `Y` of `adv`.
pub fn flux_apply(adv: &StaggeredVectorField, x: &CellField) -> CellField {
    let g = adv.grid;
    let mut out = CellField::zeros(&g);
    let s = 0.5 / g.eps;
    for j in 0..g.ny as isize {
        for i in 0..g.nx as isize {
            let c = x.at(i, j);
            let val = -s * adv.u_at(i + 1, j) * (x.at(i + 1, j) - c) + s * adv.u_at(i, j) * (x.at(i - 1, j) - c)
                - s * adv.v_at(i, j + 1) * (x.at(i, j + 1) - c)
                + s * adv.v_at(i, j) * (x.at(i, j - 1) - c);
            out.set(i as usize, j as usize, val);
        }
    }
    out
}

/// `cay(sY) x = (I − sY/2)⁻¹(I + sY/2) x`, matrix-free.
pub fn apply_cayley_cells(adv: &StaggeredVectorField, x: &CellField, scale: f64, cfg: &SolverConfig) -> Result<CellField> {
    adv.grid.check(&x.grid, "apply_cayley_cells")?;
    let d = divergence_cell(adv).max_abs();
    if d > DIV_TOL {
        return Err(GeovarError::ConstraintViolated(format!("advecting field has divergence {d:e}")));
    }
    // x + δ with (I − sY/2) δ = sYx; Krylov vectors of a row-null operator sum to zero.
    let b: Vec<f64> = flux_apply(adv, x).data.iter().map(|v| scale * v).collect();
    let tol = cfg.linear_tol * (norm(&x.data) + norm(&b)).max(f64::MIN_POSITIVE);
    let apply = |y: &[f64]| -> Vec<f64> {
        let f = CellField { grid: x.grid, data: y.to_vec() };
        let yf = flux_apply(adv, &f);
        y.iter().zip(&yf.data).map(|(a, q)| a - 0.5 * scale * q).collect()
    };
    let (delta, _) = gmres(apply, &b, tol, cfg.krylov_restart, cfg.linear_max_iter)?;
    Ok(CellField { grid: x.grid, data: x.data.iter().zip(&delta).map(|(a, b)| a + b).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::staggered_grid::{from_stream_function, Boundary, GridSpec, VertexField};
    use std::f64::consts::PI;

    #[test]
    fn zero_rhs_gives_zero() {
        let g = GridSpec::new(5, 4, 0.3, Boundary::Periodic).unwrap();
        let p = poisson_solve(&CellField::zeros(&g), &SolverConfig::default()).unwrap();
        assert_eq!(p.max_abs(), 0.0);
    }

    #[test]
    fn fourier_mode_matches_eigenvalue() {
        let (n, eps) = (16, 0.25);
        let g = GridSpec::new(n, n, eps, Boundary::Periodic).unwrap();
        let (kx, ky) = (2.0 * PI * 2.0 / (n as f64 * eps), 2.0 * PI / (n as f64 * eps));
        let rhs = CellField::from_fn(&g, |x, y| (kx * x + ky * y).cos());
        let phi = poisson_solve(&rhs, &SolverConfig::default()).unwrap();
        let lam = (2.0 / (eps * eps)) * (2.0 - (kx * eps).cos() - (ky * eps).cos());
        let err = phi.zip_map(&rhs, |p, r| p + r / lam).max_abs();
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn incompatible_rhs_rejected() {
        let g = GridSpec::new(4, 4, 1.0, Boundary::NoNormalFlow).unwrap();
        let r = poisson_solve(&CellField::constant(&g, 1.0), &SolverConfig::default());
        assert!(matches!(r, Err(GeovarError::IncompatibleRHS(_))));
    }

    #[test]
    fn gmres_solves_small_system() {
        let a = [[4.0, 1.0, 0.0], [1.0, 3.0, -1.0], [0.0, 2.0, 5.0]];
        let apply = |x: &[f64]| (0..3).map(|i| (0..3).map(|j| a[i][j] * x[j]).sum()).collect();
        let (x, _) = gmres(apply, &[1.0, 2.0, 3.0], 1e-14, 2, 50).unwrap();
        for i in 0..3 {
            let s: f64 = (0..3).map(|j| a[i][j] * x[j]).sum();
            assert!((s - [1.0, 2.0, 3.0][i]).abs() < 1e-13);
        }
    }

    #[test]
    fn zero_field_cayley_is_identity() {
        let g = GridSpec::new(5, 5, 1.0, Boundary::Periodic).unwrap();
        let x = CellField::from_fn(&g, |a, b| a * b);
        let y = apply_cayley_cells(&StaggeredVectorField::zeros(&g), &x, 0.3, &SolverConfig::default()).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn cayley_conserves_sum_and_inverts() {
        let g = GridSpec::new(6, 5, 0.5, Boundary::NoNormalFlow).unwrap();
        let w = from_stream_function(&VertexField::from_fn(&g, |x, y| (x * (3.0 - x) * y * (2.5 - y)).powi(2)));
        let x = CellField::from_fn(&g, |a, b| (a + 2.0 * b).sin());
        let cfg = SolverConfig::default();
        let y = apply_cayley_cells(&w, &x, 0.4, &cfg).unwrap();
        assert!((y.sum() - x.sum()).abs() < 1e-12);
        let z = apply_cayley_cells(&w, &y, -0.4, &cfg).unwrap();
        assert!((&z - &x).max_abs() < 1e-11);
        let c = apply_cayley_cells(&w, &CellField::constant(&g, 2.0), 0.4, &cfg).unwrap();
        assert!(c.data.iter().all(|v| (v - 2.0).abs() < 1e-14));
    }
}
