//! Dense matrix realization of the discrete diffeomorphism group on small
//! cartesian meshes: flux matrices, flat and sparsity operators, Lie
//! derivatives, pressure recovery and circulation-type pairings.
//!
//! Everything here is brute force and meant for meshes of at most 256 cells.
//! Cell `(i, j)` has index `j*nx + i` and `Ω = ε² I`.
//!
//! A pair of adjacent cells `(m, n)` with `m` left of (or below) `n` carries the
//! edge value `w` through `A_mn = −w/2ε`, `A_nm = w/2ε`.

use nalgebra::{DMatrix, DVector};

use crate::lie_core::{dcay_inv_star, dcay_inv_star_linear, lie_bracket, pairing};
use crate::staggered_grid::{divergence_cell, CellField, GridSpec, StaggeredVectorField, DIV_TOL};
use crate::{AlgebraMatrix64, GeovarError, Result};

pub use crate::lie_core::lie_deriv_one_form;

/// An interior edge and the ordered cell pair it separates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdgeRef {
    /// `true` for `u` edges.
    pub vertical: bool,
    pub i: usize,
    pub j: usize,
    /// Cell on the low side.
    pub m: usize,
    pub n: usize,
}

/// Adjacency tables plus the dense projector onto divergence-free edge fields.
#[derive(Clone, Debug)]
pub struct MeshIndex {
    pub grid: GridSpec,
    pub adjacent: Vec<Vec<usize>>,
    /// Two-away cells with the flat weight (1 across a corner, 2 along a row or column).
    pub two_away: Vec<Vec<(usize, f64)>>,
    pub edges: Vec<EdgeRef>,
    projector: DMatrix<f64>,
}

pub const MAX_CELLS: usize = 256;

impl MeshIndex {
    pub fn new(grid: &GridSpec) -> Result<Self> {
        let g = *grid;
        // On periodic rings of 4 two-step paths wrap onto each other, so the
        // matrix operators stay valid but no longer reduce to the grid stencils.
        if g.nx < 4 || g.ny < 4 || g.n_cells() > MAX_CELLS {
            return Err(GeovarError::ShapeMismatch(format!(
                "matrix meshes need 4 <= n and at most {MAX_CELLS} cells, got {}x{}",
                g.nx, g.ny
            )));
        }
        let n = g.n_cells();
        let cell = |i: isize, j: isize| -> Option<usize> {
            if g.periodic() {
                Some(j.rem_euclid(g.ny as isize) as usize * g.nx + i.rem_euclid(g.nx as isize) as usize)
            } else if i < 0 || j < 0 || i >= g.nx as isize || j >= g.ny as isize {
                None
            } else {
                Some(j as usize * g.nx + i as usize)
            }
        };
        let mut edges = Vec::new();
        let (a, b) = g.u_shape();
        for j in 0..b {
            for i in 0..a {
                let (ii, jj) = (i as isize, j as isize);
                if let (Some(m), Some(nn)) = (cell(ii - 1, jj), cell(ii, jj)) {
                    edges.push(EdgeRef { vertical: true, i, j, m, n: nn });
                }
            }
        }
        let (c, d) = g.v_shape();
        for j in 0..d {
            for i in 0..c {
                let (ii, jj) = (i as isize, j as isize);
                if let (Some(m), Some(nn)) = (cell(ii, jj - 1), cell(ii, jj)) {
                    edges.push(EdgeRef { vertical: false, i, j, m, n: nn });
                }
            }
        }
        let mut adjacent = vec![Vec::new(); n];
        for e in &edges {
            adjacent[e.m].push(e.n);
            adjacent[e.n].push(e.m);
        }
        let mut two_away = vec![Vec::new(); n];
        for j in 0..g.ny as isize {
            for i in 0..g.nx as isize {
                let me = cell(i, j).unwrap();
                let offsets = [(1, 1, 1.0), (1, -1, 1.0), (-1, 1, 1.0), (-1, -1, 1.0), (2, 0, 2.0), (-2, 0, 2.0), (0, 2, 2.0), (0, -2, 2.0)];
                for (di, dj, w) in offsets {
                    if let Some(o) = cell(i + di, j + dj) {
                        if o != me && !adjacent[me].contains(&o) && !two_away[me].iter().any(|&(x, _)| x == o) {
                            two_away[me].push((o, w));
                        }
                    }
                }
            }
        }
        // Euclidean projector I − D⁺D onto the kernel of the edge divergence.
        let ne = edges.len();
        let mut dmat = DMatrix::<f64>::zeros(n, ne);
        for (k, e) in edges.iter().enumerate() {
            dmat[(e.m, k)] -= 1.0;
            dmat[(e.n, k)] += 1.0;
        }
        let pinv = dmat.clone().pseudo_inverse(1e-12).map_err(|e| GeovarError::SingularMatrix(e.len() as f64))?;
        let projector = DMatrix::identity(ne, ne) - pinv * dmat;
        Ok(Self { grid: g, adjacent, two_away, edges, projector })
    }

    pub fn n_cells(&self) -> usize {
        self.grid.n_cells()
    }

    pub fn omega(&self) -> DVector<f64> {
        DVector::from_element(self.n_cells(), self.grid.eps * self.grid.eps)
    }

    /// Edge values of a staggered field in [`MeshIndex::edges`] order.
    pub fn edge_values(&self, w: &StaggeredVectorField) -> DVector<f64> {
        DVector::from_iterator(
            self.edges.len(),
            self.edges.iter().map(|e| if e.vertical { w.u_get(e.i, e.j) } else { w.v_get(e.i, e.j) }),
        )
    }

    pub fn field_from_edges(&self, x: &DVector<f64>) -> StaggeredVectorField {
        let mut w = StaggeredVectorField::zeros(&self.grid);
        for (k, e) in self.edges.iter().enumerate() {
            if e.vertical {
                w.u_set(e.i, e.j, x[k]);
            } else {
                w.v_set(e.i, e.j, x[k]);
            }
        }
        w
    }

    /// Orthogonal projection onto divergence-free edge vectors.
    pub fn project(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.projector * x
    }

    /// `g_e = ⟨C, flux(E_e)⟩` for each unit edge field `E_e`, i.e. `−ε C_mn`.
    pub fn edge_pairings(&self, c: &DMatrix<f64>) -> DVector<f64> {
        let eps = self.grid.eps;
        DVector::from_iterator(self.edges.len(), self.edges.iter().map(|e| -0.5 * eps * (c[(e.m, e.n)] - c[(e.n, e.m)])))
    }

    /// Components of `C` seen by test fields in the constraint space; zero iff `C ≐ 0`.
    pub fn weak_residual(&self, c: &DMatrix<f64>) -> DVector<f64> {
        self.project(&self.edge_pairings(c))
    }
}

fn edge_entries(mesh: &MeshIndex, x: &DVector<f64>) -> DMatrix<f64> {
    let n = mesh.n_cells();
    let s = 0.5 / mesh.grid.eps;
    let mut a = DMatrix::zeros(n, n);
    for (k, e) in mesh.edges.iter().enumerate() {
        a[(e.m, e.n)] -= s * x[k];
        a[(e.n, e.m)] += s * x[k];
    }
    for m in 0..n {
        let r: f64 = a.row(m).sum();
        a[(m, m)] -= r;
    }
    a
}

/// Flux matrix of a divergence-free edge field.
pub fn to_flux_matrix(w: &StaggeredVectorField, mesh: &MeshIndex) -> Result<AlgebraMatrix64> {
    mesh.grid.check(&w.grid, "to_flux_matrix")?;
    let d = divergence_cell(w).max_abs();
    if d > DIV_TOL {
        return Err(GeovarError::ConstraintViolated(format!("field has divergence {d:e}")));
    }
    Ok(AlgebraMatrix64::new_unchecked(edge_entries(mesh, &mesh.edge_values(w)), mesh.omega()))
}

/// Reads edge values back from the adjacent entries of a matrix.
pub fn flux_to_field(a: &DMatrix<f64>, mesh: &MeshIndex) -> StaggeredVectorField {
    let eps = mesh.grid.eps;
    let x = DVector::from_iterator(mesh.edges.len(), mesh.edges.iter().map(|e| -eps * (a[(e.m, e.n)] - a[(e.n, e.m)])));
    mesh.field_from_edges(&x)
}

/// Discrete flat operator: `2ε² C_ij` on neighbours and
/// `w_ij ε² Σ_{k ∈ N(i)∩N(j)} (C_ik + C_kj)` on two-away pairs.
pub fn flat(c: &DMatrix<f64>, mesh: &MeshIndex) -> Result<DMatrix<f64>> {
    let n = mesh.n_cells();
    let e2 = mesh.grid.eps * mesh.grid.eps;
    let scale = c.amax().max(1.0);
    for i in 0..n {
        for j in 0..n {
            if i != j && c[(i, j)].abs() > 1e-14 * scale && !mesh.adjacent[i].contains(&j) {
                return Err(GeovarError::SupportViolation(format!("entry ({i},{j}) is not between neighbours")));
            }
        }
    }
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for &j in &mesh.adjacent[i] {
            out[(i, j)] = 2.0 * e2 * c[(i, j)];
        }
        for &(j, w) in &mesh.two_away[i] {
            let s: f64 = mesh.adjacent[i]
                .iter()
                .filter(|k| mesh.adjacent[j].contains(k))
                .map(|&k| c[(i, k)] + c[(k, j)])
                .sum();
            out[(i, j)] = w * e2 * s;
        }
    }
    Ok(out)
}

/// Sparsity operator: the unique `A↓ ∈ 𝒮` with `⟨Z♭, A↓⟩ = ⟨Z♭, A⟩` for all `Z ∈ 𝒮`.
///
/// Built as the dual of [`flat`]: `g_e = ⟨flat(E_e), A⟩` for each edge basis
/// field, then projected onto divergence-free edge vectors.
pub fn sparsify(a: &DMatrix<f64>, mesh: &MeshIndex) -> Result<AlgebraMatrix64> {
    let omega = mesh.omega();
    let e2 = mesh.grid.eps * mesh.grid.eps;
    let ne = mesh.edges.len();
    let mut g = DVector::zeros(ne);
    for k in 0..ne {
        let mut unit = DVector::zeros(ne);
        unit[k] = 1.0;
        let zf = flat(&edge_entries(mesh, &unit), mesh)?;
        g[k] = pairing(&zf, a, &omega) / e2;
    }
    let x = mesh.project(&g);
    Ok(AlgebraMatrix64::new_unchecked(edge_entries(mesh, &x), omega))
}

/// `(£_A B)↓ = (−[A, B])↓`.
pub fn lie_deriv_vector(a: &AlgebraMatrix64, b: &AlgebraMatrix64, mesh: &MeshIndex) -> Result<AlgebraMatrix64> {
    sparsify(lie_bracket(a, b).entries(), mesh)
}

/// Mean-zero `P` with `C_mn = P_m − P_n` on neighbours, by least squares.
pub fn recover_pressure(c_flat: &DMatrix<f64>, mesh: &MeshIndex) -> Result<CellField> {
    let n = mesh.n_cells();
    let ne = mesh.edges.len();
    let mut gmat = DMatrix::<f64>::zeros(ne, n);
    let mut rhs = DVector::zeros(ne);
    for (k, e) in mesh.edges.iter().enumerate() {
        gmat[(k, e.m)] = 1.0;
        gmat[(k, e.n)] = -1.0;
        rhs[k] = 0.5 * (c_flat[(e.m, e.n)] - c_flat[(e.n, e.m)]);
    }
    let pinv = gmat.clone().pseudo_inverse(1e-12).map_err(|e| GeovarError::SingularMatrix(e.len() as f64))?;
    let mut p = pinv * &rhs;
    let mean = p.mean();
    p.add_scalar_mut(-mean);
    let resid = (&gmat * &p - &rhs).amax();
    if resid > 1e-8 * rhs.amax().max(1.0) {
        return Err(GeovarError::NotWeaklyNull(resid));
    }
    CellField::from_data(&mesh.grid, p.as_slice().to_vec())
}

/// Which transported form of `Y♭` enters a circulation pairing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KelvinForm {
    /// `(I + (h/2)£_Y) Y♭`, the linearization of `(dcay⁻¹_{−hY})* Y♭`.
    Linear,
    /// `(I − (h/2)£_Y) Y♭`.
    LinearReversed,
    /// `(dcay⁻¹_{−hY})* Y♭` with the cubic term.
    Exact,
}

/// `⟨X♭, Γ⟩` with `X♭` the chosen transport of `Y♭`.
pub fn kelvin_quantity(y: &AlgebraMatrix64, gamma: &DMatrix<f64>, h: f64, form: KelvinForm, mesh: &MeshIndex) -> Result<f64> {
    let yf = flat(y.entries(), mesh)?;
    let x = match form {
        KelvinForm::Linear => dcay_inv_star_linear(&y.scale(-h), &yf),
        KelvinForm::LinearReversed => dcay_inv_star_linear(&y.scale(h), &yf),
        KelvinForm::Exact => dcay_inv_star(&y.scale(-h), &yf),
    };
    Ok(pairing(&x, gamma, y.omega()))
}

/// Cross-helicity `⟨(I + (h/2)£_Y) Y♭, R⟩`.
pub fn cross_helicity(y: &AlgebraMatrix64, r: &AlgebraMatrix64, h: f64, mesh: &MeshIndex) -> Result<f64> {
    kelvin_quantity(y, r.entries(), h, KelvinForm::Linear, mesh)
}

/// `(dτ⁻¹_{sY})* Y♭`, with or without the cubic term.
fn transported(y: &AlgebraMatrix64, s: f64, cubic: bool, mesh: &MeshIndex) -> Result<DMatrix<f64>> {
    let yf = flat(y.entries(), mesh)?;
    Ok(if cubic { dcay_inv_star(&y.scale(s), &yf) } else { dcay_inv_star_linear(&y.scale(s), &yf) })
}

/// One step of the matrix fluid update: finds `Y_k ∈ 𝒮` with
/// `(dτ⁻¹_{−hY_k})* Y♭_k ≐ (dτ⁻¹_{hY_{k−1}})* Y♭_{k−1}` by fixed-point iteration.
pub fn fluid_step_matrix(prev: &AlgebraMatrix64, h: f64, cubic: bool, mesh: &MeshIndex) -> Result<AlgebraMatrix64> {
    let e2 = mesh.grid.eps * mesh.grid.eps;
    let rhs = transported(prev, h, cubic, mesh)?;
    let mut x = mesh.project(&mesh.edge_values(&flux_to_field(prev.entries(), mesh)));
    let scale = x.amax().max(1e-300);
    for _ in 0..500 {
        let y = AlgebraMatrix64::new_unchecked(edge_entries(mesh, &x), mesh.omega());
        let lhs = transported(&y, -h, cubic, mesh)?;
        let dx = mesh.weak_residual(&(lhs - &rhs)) / e2;
        x -= &dx;
        if dx.amax() <= 1e-15 * scale {
            return Ok(AlgebraMatrix64::new_unchecked(edge_entries(mesh, &x), mesh.omega()));
        }
    }
    Err(GeovarError::NoConvergence { iterations: 500, residual: f64::NAN })
}
