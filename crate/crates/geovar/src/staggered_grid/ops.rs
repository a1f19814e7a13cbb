use super::{CellField, GridSpec, StaggeredVectorField, VertexField};
use crate::timestepper::{poisson_solve, SolverConfig};
use crate::{GeovarError, Result};

/// Divergence bound accepted by operators that require divergence-free input.
pub const DIV_TOL: f64 = 1e-10;

/// `ω^{i,j} = (u^{i,j−½} + v^{i+½,j} − u^{i,j+½} − v^{i−½,j})/ε`.
pub fn curl_vertex(w: &StaggeredVectorField) -> VertexField {
    let g = w.grid;
    let mut out = VertexField::zeros(&g);
    let (a, b) = g.vertex_shape();
    for j in 0..b {
        for i in 0..a {
            let (ii, jj) = (i as isize, j as isize);
            let c = (w.u_at(ii, jj - 1) + w.v_at(ii, jj) - w.u_at(ii, jj) - w.v_at(ii - 1, jj)) / g.eps;
            out.set(i, j, c);
        }
    }
    out
}

/// Net outflow per cell divided by `ε`.
pub fn divergence_cell(w: &StaggeredVectorField) -> CellField {
    let g = w.grid;
    let mut out = CellField::zeros(&g);
    for j in 0..g.ny as isize {
        for i in 0..g.nx as isize {
            let d = (w.u_at(i + 1, j) - w.u_at(i, j) + w.v_at(i, j + 1) - w.v_at(i, j)) / g.eps;
            out.set(i as usize, j as usize, d);
        }
    }
    out
}

/// Edge differences of a cell field; zero on walls.
pub fn gradient_cell(p: &CellField) -> StaggeredVectorField {
    let g = p.grid;
    let mut w = StaggeredVectorField::zeros(&g);
    let (a, b) = g.u_shape();
    for j in 0..b {
        for i in 0..a {
            if !w.u_is_wall(i) {
                let (ii, jj) = (i as isize, j as isize);
                w.u[j * a + i] = (p.at(ii, jj) - p.at(ii - 1, jj)) / g.eps;
            }
        }
    }
    let (c, d) = g.v_shape();
    for j in 0..d {
        if w.v_is_wall(j) {
            continue;
        }
        for i in 0..c {
            let (ii, jj) = (i as isize, j as isize);
            w.v[j * c + i] = (p.at(ii, jj) - p.at(ii, jj - 1)) / g.eps;
        }
    }
    w
}

/// Vertex averages `ū^{i,j}` (of `u` along y) and `v̄^{i,j}` (of `v` along x).
fn vertex_averages(w: &StaggeredVectorField) -> (VertexField, VertexField) {
    let g = w.grid;
    let mut ub = VertexField::zeros(&g);
    let mut vb = VertexField::zeros(&g);
    let (a, b) = g.vertex_shape();
    for j in 0..b {
        for i in 0..a {
            let (ii, jj) = (i as isize, j as isize);
            ub.set(i, j, 0.5 * (w.u_at(ii, jj - 1) + w.u_at(ii, jj)));
            vb.set(i, j, 0.5 * (w.v_at(ii - 1, jj) + w.v_at(ii, jj)));
        }
    }
    (ub, vb)
}

/// Builds an edge field from per-edge closures, leaving wall edges zero.
fn edge_field(
    g: &GridSpec,
    fu: impl Fn(isize, isize) -> f64,
    fv: impl Fn(isize, isize) -> f64,
) -> StaggeredVectorField {
    let mut out = StaggeredVectorField::zeros(g);
    let (a, b) = g.u_shape();
    for j in 0..b {
        for i in 0..a {
            if !out.u_is_wall(i) {
                out.u[j * a + i] = fu(i as isize, j as isize);
            }
        }
    }
    let (c, d) = g.v_shape();
    for j in 0..d {
        if out.v_is_wall(j) {
            continue;
        }
        for i in 0..c {
            out.v[j * c + i] = fv(i as isize, j as isize);
        }
    }
    out
}

/// Vorticity times averaged transverse velocity: the edge form of `(∇×w)×w`.
pub fn psi_op(w: &StaggeredVectorField) -> StaggeredVectorField {
    let g = w.grid;
    let om = curl_vertex(w);
    let (ub, vb) = vertex_averages(w);
    edge_field(
        &g,
        |i, j| -0.5 * (om.at(i, j) * vb.at(i, j) + om.at(i, j + 1) * vb.at(i, j + 1)),
        |i, j| 0.5 * (om.at(i, j) * ub.at(i, j) + om.at(i + 1, j) * ub.at(i + 1, j)),
    )
}

/// Checked form of [`phi_op_unchecked`]; both fields must be divergence-free.
pub fn phi_op(adv: &StaggeredVectorField, carried: &StaggeredVectorField) -> Result<StaggeredVectorField> {
    adv.grid.check(&carried.grid, "phi_op")?;
    for (name, f) in [("advecting", adv), ("carried", carried)] {
        let d = divergence_cell(f).max_abs();
        if d > DIV_TOL {
            return Err(GeovarError::ConstraintViolated(format!("{name} field has divergence {d:e}")));
        }
    }
    Ok(phi_op_unchecked(adv, carried))
}

/// `Φ(u,v,p,q)`: minus the discrete curl of the vertex field `E = ū q̄ − p̄ v̄`.
pub fn phi_op_unchecked(adv: &StaggeredVectorField, carried: &StaggeredVectorField) -> StaggeredVectorField {
    let g = adv.grid;
    let (ub, vb) = vertex_averages(adv);
    let (pb, qb) = vertex_averages(carried);
    let mut e = VertexField::zeros(&g);
    for (k, x) in e.data.iter_mut().enumerate() {
        *x = ub.data[k] * qb.data[k] - pb.data[k] * vb.data[k];
    }
    let eps = g.eps;
    edge_field(
        &g,
        |i, j| -(e.at(i, j + 1) - e.at(i, j)) / eps,
        |i, j| (e.at(i + 1, j) - e.at(i, j)) / eps,
    )
}

/// `Λ(β, α) = ½(ᾱ dβ − β̄ dα)` on edges, with pairwise cell averages.
pub fn lambda_op(beta: &CellField, alpha: &CellField) -> Result<StaggeredVectorField> {
    beta.grid.check(&alpha.grid, "lambda_op")?;
    let g = beta.grid;
    let eps = g.eps;
    let edge = |bl: f64, br: f64, al: f64, ar: f64| 0.5 * (0.5 * (al + ar) * (br - bl) - 0.5 * (bl + br) * (ar - al)) / eps;
    Ok(edge_field(
        &g,
        |i, j| edge(beta.at(i - 1, j), beta.at(i, j), alpha.at(i - 1, j), alpha.at(i, j)),
        |i, j| edge(beta.at(i, j - 1), beta.at(i, j), alpha.at(i, j - 1), alpha.at(i, j)),
    ))
}

/// Five-point Laplacian over `ε²`; mirror ghosts at walls.
pub fn laplacian_cell(a: &CellField) -> CellField {
    let g = a.grid;
    let mut out = CellField::zeros(&g);
    let inv = 1.0 / (g.eps * g.eps);
    for j in 0..g.ny as isize {
        for i in 0..g.nx as isize {
            let c = a.at(i, j);
            let s = a.at(i - 1, j) + a.at(i + 1, j) + a.at(i, j - 1) + a.at(i, j + 1) - 4.0 * c;
            out.set(i as usize, j as usize, s * inv);
        }
    }
    out
}

/// `u = ∂ψ/∂y`, `v = −∂ψ/∂x` by vertex differences. With walls, `ψ` should be
/// constant along the boundary so that the wall-normal edges vanish.
pub fn from_stream_function(psi: &VertexField) -> StaggeredVectorField {
    let g = psi.grid;
    let mut w = StaggeredVectorField::zeros(&g);
    let (a, b) = g.u_shape();
    for j in 0..b {
        for i in 0..a {
            let (ii, jj) = (i as isize, j as isize);
            w.u[j * a + i] = (psi.at(ii, jj + 1) - psi.at(ii, jj)) / g.eps;
        }
    }
    let (c, d) = g.v_shape();
    for j in 0..d {
        for i in 0..c {
            let (ii, jj) = (i as isize, j as isize);
            w.v[j * c + i] = -(psi.at(ii + 1, jj) - psi.at(ii, jj)) / g.eps;
        }
    }
    w
}

/// `B_x = ∂A/∂y`, `B_y = −∂A/∂x`.
pub fn from_vector_potential(a: &VertexField) -> StaggeredVectorField {
    from_stream_function(a)
}

/// Helmholtz projection with the default solver settings.
pub fn project_divergence_free(w: &StaggeredVectorField) -> Result<StaggeredVectorField> {
    Ok(project_divergence_free_with(w, &SolverConfig::default())?.0)
}

/// `w − ∇φ` with `𝚫φ = ∇·w`; wall-normal edges are zeroed first. Returns the
/// projected field and `φ`.
pub fn project_divergence_free_with(
    w: &StaggeredVectorField,
    cfg: &SolverConfig,
) -> Result<(StaggeredVectorField, CellField)> {
    let mut base = w.clone();
    base.enforce_walls();
    let div = divergence_cell(&base);
    let phi = poisson_solve(&div, cfg)?;
    let mut out = base;
    out.axpy(-1.0, &gradient_cell(&phi));
    Ok((out, phi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::staggered_grid::Boundary;

    fn grid(b: Boundary) -> GridSpec {
        GridSpec::new(6, 5, 0.5, b).unwrap()
    }

    #[test]
    fn rigid_rotation_has_curl_two() {
        let g = grid(Boundary::NoNormalFlow).with_origin(-1.5, -1.25);
        let w = StaggeredVectorField::from_fn(&g, |_, y| -y, |x, _| x);
        let om = curl_vertex(&w);
        for j in 1..g.ny {
            for i in 1..g.nx {
                assert!((om.get(i, j) - 2.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn linear_field_has_unit_divergence() {
        let g = grid(Boundary::NoNormalFlow);
        let mut w = StaggeredVectorField::zeros(&g);
        for j in 0..g.ny {
            for i in 0..=g.nx {
                w.u_set(i, j, g.u_position(i, j).0);
            }
        }
        let d = divergence_cell(&w);
        assert!(d.data.iter().all(|&x| (x - 1.0).abs() < 1e-13));
    }

    #[test]
    fn bilinear_stream_function() {
        let g = grid(Boundary::NoNormalFlow);
        let w = from_stream_function(&VertexField::from_fn(&g, |x, y| x * y));
        for j in 0..g.ny {
            for i in 0..=g.nx {
                assert!((w.u_get(i, j) - g.u_position(i, j).0).abs() < 1e-13);
            }
        }
        for j in 0..=g.ny {
            for i in 0..g.nx {
                assert!((w.v_get(i, j) + g.v_position(i, j).1).abs() < 1e-13);
            }
        }
        assert!(divergence_cell(&w).max_abs() < 1e-13);
    }

    #[test]
    fn uniform_fields_are_inert() {
        for b in [Boundary::Periodic, Boundary::NoNormalFlow] {
            let g = grid(b);
            let w = StaggeredVectorField::uniform(&g, 0.7, -0.3);
            if b == Boundary::Periodic {
                assert!(curl_vertex(&w).max_abs() < 1e-14);
                assert!(psi_op(&w).max_abs() < 1e-14);
                assert!(phi_op(&w, &StaggeredVectorField::uniform(&g, 0.2, 0.1)).unwrap().max_abs() < 1e-14);
            }
            assert!(divergence_cell(&w).data.iter().all(|&x| b == Boundary::NoNormalFlow || x.abs() < 1e-14));
        }
    }

    #[test]
    fn lambda_with_constant_alpha() {
        let g = grid(Boundary::Periodic);
        let beta = CellField::from_fn(&g, |x, y| (x * 1.3).sin() + y * y);
        let alpha = CellField::constant(&g, 2.5);
        let l = lambda_op(&beta, &alpha).unwrap();
        for j in 0..g.ny as isize {
            for i in 0..g.nx as isize {
                let expect = 1.25 * (beta.at(i, j) - beta.at(i - 1, j)) / g.eps;
                assert!((l.u_get(i as usize, j as usize) - expect).abs() < 1e-13);
            }
        }
        assert!(lambda_op(&beta, &beta).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn laplacian_sums_to_zero() {
        for b in [Boundary::Periodic, Boundary::NoNormalFlow] {
            let g = grid(b);
            let a = CellField::from_fn(&g, |x, y| (x * y).sin() + x);
            assert!(laplacian_cell(&a).sum().abs() < 1e-12);
            assert!(laplacian_cell(&CellField::constant(&g, 3.0)).max_abs() < 1e-13);
        }
    }

    #[test]
    fn mismatched_grids_rejected() {
        let a = CellField::zeros(&grid(Boundary::Periodic));
        let b = CellField::zeros(&GridSpec::new(4, 4, 0.5, Boundary::Periodic).unwrap());
        assert!(matches!(lambda_op(&a, &b), Err(GeovarError::ShapeMismatch(_))));
    }
}
