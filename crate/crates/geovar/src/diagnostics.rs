//! Conserved quantities and field diagnostics.

use crate::models::ModelState;
use crate::staggered_grid::{curl_vertex, divergence_cell, psi_op, CellField, StaggeredVectorField, VertexField};
use crate::{GeovarError, Result};

/// One CSV row. Column order is [`DiagnosticsRecord::HEADER`].
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub k: usize,
    pub energy_pairing: f64,
    pub energy_quadrature: f64,
    pub cross_helicity: f64,
    pub micro_momentum: f64,
    pub div_u_max: f64,
    pub div_b_max: f64,
    pub magnetic_pressure_avg: f64,
    pub picard_iters: usize,
    pub residual: f64,
}

impl DiagnosticsRecord {
    pub const HEADER: &'static str = "t,k,energy_pairing,energy_quadrature,cross_helicity,micro_momentum,div_u_max,div_B_max,magnetic_pressure_avg,picard_iters,residual";

    pub fn to_csv_row(&self) -> String {
        format!(
            "{:e},{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{},{:e}",
            self.t,
            self.k,
            self.energy_pairing,
            self.energy_quadrature,
            self.cross_helicity,
            self.micro_momentum,
            self.div_u_max,
            self.div_b_max,
            self.magnetic_pressure_avg,
            self.picard_iters,
            self.residual
        )
    }

    pub fn is_finite(&self) -> bool {
        [
            self.t,
            self.energy_pairing,
            self.energy_quadrature,
            self.cross_helicity,
            self.micro_momentum,
            self.div_u_max,
            self.div_b_max,
            self.magnetic_pressure_avg,
            self.residual,
        ]
        .iter()
        .all(|x| x.is_finite())
    }
}

fn e2(w: &StaggeredVectorField) -> f64 {
    w.grid.eps * w.grid.eps
}

/// `½ ε² Σ_edges w²`.
pub fn edge_energy(w: &StaggeredVectorField) -> f64 {
    0.5 * e2(w) * w.dot(w)
}

/// `½ Σ_neighbours (α_n − α_m)²`, the one-constant free energy.
pub fn free_energy(alpha: &CellField) -> f64 {
    let g = alpha.grid;
    let mut s = 0.0;
    for j in 0..g.ny as isize {
        for i in 0..g.nx as isize {
            let a = alpha.at(i, j);
            if g.periodic() || i + 1 < g.nx as isize {
                s += (alpha.at(i + 1, j) - a).powi(2);
            }
            if g.periodic() || j + 1 < g.ny as isize {
                s += (alpha.at(i, j + 1) - a).powi(2);
            }
        }
    }
    0.5 * s
}

fn cell_energy(state: &ModelState) -> f64 {
    match state {
        ModelState::Nematic(s) => 0.5 * s.omega.integral_of(|w| w * w) + free_energy(&s.alpha),
        ModelState::Microstretch(s) => {
            let rot = s.j_r.zip_map(&s.omega, |j, w| j.exp() * w * w);
            let str_ = s.j_s.zip_map(&s.r, |j, r| j.exp() * r * r);
            0.5 * (rot.integral() + str_.integral()) + free_energy(&s.alpha) + 0.5 * s.lambda.integral_of(|l| l * l)
        }
        _ => 0.0,
    }
}

impl CellField {
    /// `ε² Σ f(x)`.
    pub fn integral_of(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.grid.eps * self.grid.eps * self.data.iter().map(|&x| f(x)).sum::<f64>()
    }
}

/// Edge-quadrature energy `ε²(½Σu² + ½Σv² + ½ΣB²)` plus the model cell terms.
pub fn energy_quadrature(state: &ModelState) -> f64 {
    edge_energy(state.velocity()) + state.magnetic().map_or(0.0, edge_energy) + cell_energy(state)
}

/// `½⟨Y♭, Y⟩ + ½⟨R♭, R⟩` evaluated through flux entries, plus the model cell terms.
///
/// Each edge contributes two ordered cell pairs with `Y♭_mn Y_mn = u²/2`.
pub fn energy_pairing(state: &ModelState) -> f64 {
    let pair = |w: &StaggeredVectorField| {
        let eps = w.grid.eps;
        let mut s = 0.0;
        for &x in w.u.iter().chain(&w.v) {
            let (entry, flat) = (-x / (2.0 * eps), -eps * x);
            s += 2.0 * flat * entry;
        }
        0.5 * eps * eps * s
    };
    pair(state.velocity()) + state.magnetic().map_or(0.0, pair) + cell_energy(state)
}

/// `J = ε² Σ (u + (h/2)Ψ(u))·B`, the edge form of `⟨(I + (h/2)£_Y)Y♭, R⟩`.
pub fn cross_helicity(vel: &StaggeredVectorField, b: &StaggeredVectorField, h: f64) -> f64 {
    let mut x = vel.clone();
    x.axpy(0.5 * h, &psi_op(vel));
    e2(vel) * x.dot(b)
}

/// `ε² Σ ω` (nematic) or `ε² Σ π` (microstretch).
pub fn micro_momentum(state: &ModelState) -> Result<f64> {
    match state {
        ModelState::Nematic(s) => Ok(s.omega.integral()),
        ModelState::Microstretch(s) => Ok(s.pi().integral()),
        other => Err(GeovarError::WrongModel(format!("{} has no micro angular momentum", other.kind()))),
    }
}

pub fn current_density(b: &StaggeredVectorField) -> VertexField {
    curl_vertex(b)
}

/// Mean of `B_x²` over `u` edges plus mean of `B_y²` over `v` edges.
pub fn magnetic_pressure_avg(b: &StaggeredVectorField) -> f64 {
    let m = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
    m(&b.u) + m(&b.v)
}

/// Centroid of `|B|²` (edge squares averaged to cells). Periodic axes use the circular mean.
pub fn pressure_centroid(b: &StaggeredVectorField) -> (f64, f64) {
    let g = b.grid;
    let mut wsum = 0.0;
    let (mut sx, mut sy, mut cx, mut cy, mut lx, mut ly) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    let [ex, ey] = g.extent();
    let tau = std::f64::consts::TAU;
    for j in 0..g.ny {
        for i in 0..g.nx {
            let (ii, jj) = (i as isize, j as isize);
            let w = 0.5 * (b.u_at(ii, jj).powi(2) + b.u_at(ii + 1, jj).powi(2) + b.v_at(ii, jj).powi(2) + b.v_at(ii, jj + 1).powi(2));
            let (x, y) = g.cell_center(i, j);
            let (ax, ay) = (tau * (x - g.origin[0]) / ex, tau * (y - g.origin[1]) / ey);
            sx += w * ax.sin();
            cx += w * ax.cos();
            sy += w * ay.sin();
            cy += w * ay.cos();
            lx += w * x;
            ly += w * y;
            wsum += w;
        }
    }
    if wsum == 0.0 {
        return (f64::NAN, f64::NAN);
    }
    if g.periodic() {
        let fx = sx.atan2(cx).rem_euclid(tau) / tau;
        let fy = sy.atan2(cy).rem_euclid(tau) / tau;
        (g.origin[0] + fx * ex, g.origin[1] + fy * ey)
    } else {
        (lx / wsum, ly / wsum)
    }
}

/// `ε_c-weighted L₂` distance between `coarse` and `fine` restricted by pairwise edge averages.
pub fn refinement_difference(coarse: &StaggeredVectorField, fine: &StaggeredVectorField) -> Result<f64> {
    let (c, f) = (coarse.grid, fine.grid);
    if f.nx != 2 * c.nx || f.ny != 2 * c.ny || f.boundary != c.boundary || (2.0 * f.eps - c.eps).abs() > 1e-12 * c.eps {
        return Err(GeovarError::IncompatibleGrids(format!("{}x{} is not a refinement of {}x{}", f.nx, f.ny, c.nx, c.ny)));
    }
    let mut s = 0.0;
    let (a, b) = c.u_shape();
    for j in 0..b {
        for i in 0..a {
            let r = 0.5 * (fine.u_get(2 * i, 2 * j) + fine.u_get(2 * i, 2 * j + 1));
            s += (coarse.u_get(i, j) - r).powi(2);
        }
    }
    let (a, b) = c.v_shape();
    for j in 0..b {
        for i in 0..a {
            let r = 0.5 * (fine.v_get(2 * i, 2 * j) + fine.v_get(2 * i + 1, 2 * j));
            s += (coarse.v_get(i, j) - r).powi(2);
        }
    }
    Ok((c.eps * c.eps * s).sqrt())
}

/// Full diagnostics for a state advanced with step `h`.
pub fn record(state: &ModelState, h: f64) -> DiagnosticsRecord {
    let (t, k) = state.time();
    let stats = state.stats();
    let b = state.magnetic();
    DiagnosticsRecord {
        t,
        k,
        energy_pairing: energy_pairing(state),
        energy_quadrature: energy_quadrature(state),
        cross_helicity: b.map_or(0.0, |b| cross_helicity(state.velocity(), b, h)),
        micro_momentum: micro_momentum(state).unwrap_or(0.0),
        div_u_max: divergence_cell(state.velocity()).max_abs(),
        div_b_max: b.map_or(0.0, |b| divergence_cell(b).max_abs()),
        magnetic_pressure_avg: b.map_or(0.0, magnetic_pressure_avg),
        picard_iters: stats.picard_iters,
        residual: stats.residual,
    }
}
