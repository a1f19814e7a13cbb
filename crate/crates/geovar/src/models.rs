//! Grid steppers for incompressible fluids, MHD, nematic and microstretch flow.
//!
//! Every momentum equation has the form
//! `(u_k − u_{k−1})/h + ½(Ψ(u_{k−1}) + Ψ(u_k)) = F_k − ∇p_k`, `∇·u_k = 0`,
//! with a model-specific forcing `F_k` that is fully known before the
//! momentum solve: the magnetic and cell-field updates depend on `u_{k−1}` only.

use crate::staggered_grid::{laplacian_cell, lambda_op, psi_op, CellField, GridSpec, StaggeredVectorField};
use crate::timestepper::{apply_cayley_cells, magnetic_solve, momentum_solve, SolverConfig};
use crate::{GeovarError, Result};

/// Iteration count and final residual of the last momentum solve.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SolveStats {
    pub picard_iters: usize,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FluidState {
    pub vel: StaggeredVectorField,
    pub p: CellField,
    pub t: f64,
    pub k: usize,
    pub stats: SolveStats,
}

impl FluidState {
    pub fn new(vel: StaggeredVectorField) -> Self {
        let p = CellField::zeros(&vel.grid);
        Self { vel, p, t: 0.0, k: 0, stats: SolveStats::default() }
    }

    pub fn grid(&self) -> GridSpec {
        self.vel.grid
    }
}

/// Time level of the magnetic field in the Lorentz force.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LorentzForcing {
    /// `Ψ(B_k)`: the cross-helicity is conserved to solver tolerance.
    #[default]
    Endpoint,
    /// `½(Ψ(B_{k−1}) + Ψ(B_k))`.
    Trapezoidal,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MhdState {
    pub vel: StaggeredVectorField,
    pub b: StaggeredVectorField,
    pub p: CellField,
    pub t: f64,
    pub k: usize,
    pub stats: SolveStats,
    pub lorentz: LorentzForcing,
}

impl MhdState {
    pub fn new(vel: StaggeredVectorField, b: StaggeredVectorField) -> Self {
        let p = CellField::zeros(&vel.grid);
        Self { vel, b, p, t: 0.0, k: 0, stats: SolveStats::default(), lorentz: LorentzForcing::Endpoint }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NematicState {
    pub vel: StaggeredVectorField,
    pub p: CellField,
    pub omega: CellField,
    /// Director angle, unwrapped.
    pub alpha: CellField,
    pub t: f64,
    pub k: usize,
    pub stats: SolveStats,
}

impl NematicState {
    pub fn new(vel: StaggeredVectorField, omega: CellField, alpha: CellField) -> Self {
        let p = CellField::zeros(&vel.grid);
        Self { vel, p, omega, alpha, t: 0.0, k: 0, stats: SolveStats::default() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MicrostretchState {
    pub vel: StaggeredVectorField,
    pub p: CellField,
    pub omega: CellField,
    pub r: CellField,
    pub alpha: CellField,
    pub lambda: CellField,
    pub j_r: CellField,
    pub j_s: CellField,
    pub t: f64,
    pub k: usize,
    pub stats: SolveStats,
    /// When false, `R`, `λ`, `j_s` are held at zero and the stretch forcing is dropped.
    pub stretch_enabled: bool,
    /// Cell updates so far whose stretch quadratic had no real root.
    pub stretch_clamped: usize,
}

impl MicrostretchState {
    pub fn new(vel: StaggeredVectorField, omega: CellField, alpha: CellField) -> Self {
        let g = vel.grid;
        let z = CellField::zeros(&g);
        Self {
            vel,
            p: z.clone(),
            omega,
            r: z.clone(),
            alpha,
            lambda: z.clone(),
            j_r: z.clone(),
            j_s: z,
            t: 0.0,
            k: 0,
            stats: SolveStats::default(),
            stretch_enabled: true,
            stretch_clamped: 0,
        }
    }

    /// `π = e^{j_r} ω`.
    pub fn pi(&self) -> CellField {
        self.j_r.zip_map(&self.omega, |j, w| j.exp() * w)
    }

    /// `Q = e^{j_s} R`.
    pub fn q(&self) -> CellField {
        self.j_s.zip_map(&self.r, |j, r| j.exp() * r)
    }

    /// `i_r = ½ e^{j_r} ω²`.
    pub fn i_r(&self) -> CellField {
        self.j_r.zip_map(&self.omega, |j, w| 0.5 * j.exp() * w * w)
    }

    /// `i_s = ½ e^{j_s} R²`.
    pub fn i_s(&self) -> CellField {
        self.j_s.zip_map(&self.r, |j, r| 0.5 * j.exp() * r * r)
    }
}

fn solve_momentum(
    prev: &StaggeredVectorField,
    forcing: Option<&StaggeredVectorField>,
    h: f64,
    cfg: &SolverConfig,
) -> Result<(StaggeredVectorField, CellField, SolveStats)> {
    let mut explicit = &psi_op(prev) * -0.5;
    if let Some(f) = forcing {
        explicit.axpy(1.0, f);
    }
    let implicit = |w: &StaggeredVectorField| &psi_op(w) * 0.5;
    let sol = momentum_solve(prev, &explicit, &implicit, h, cfg)?;
    Ok((sol.velocity, sol.pressure, SolveStats { picard_iters: sol.iterations, residual: sol.residual }))
}

pub fn fluid_step(s: &FluidState, h: f64, cfg: &SolverConfig) -> Result<FluidState> {
    let (vel, p, stats) = solve_momentum(&s.vel, None, h, cfg)?;
    Ok(FluidState { vel, p, t: s.t + h, k: s.k + 1, stats })
}

pub fn mhd_step(s: &MhdState, h: f64, cfg: &SolverConfig) -> Result<MhdState> {
    let b = magnetic_solve(&s.vel, &s.b, h, cfg)?;
    let force = match s.lorentz {
        LorentzForcing::Endpoint => psi_op(&b),
        LorentzForcing::Trapezoidal => &(&psi_op(&s.b) + &psi_op(&b)) * 0.5,
    };
    let (vel, p, stats) = solve_momentum(&s.vel, Some(&force), h, cfg)?;
    Ok(MhdState { vel, b, p, t: s.t + h, k: s.k + 1, stats, lorentz: s.lorentz })
}

pub fn nematic_step(s: &NematicState, h: f64, cfg: &SolverConfig) -> Result<NematicState> {
    let y = &s.vel;
    let alpha = &apply_cayley_cells(y, &s.alpha, h, cfg)? + &(&apply_cayley_cells(y, &s.omega, 0.5 * h, cfg)? * h);
    let lap = laplacian_cell(&alpha);
    let force = lambda_op(&lap, &alpha)?;
    let (vel, p, stats) = solve_momentum(y, Some(&force), h, cfg)?;
    let inner = &apply_cayley_cells(y, &s.omega, 0.5 * h, cfg)? + &(&lap * h);
    let omega = apply_cayley_cells(&vel, &inner, 0.5 * h, cfg)?;
    Ok(NematicState { vel, p, omega, alpha, t: s.t + h, k: s.k + 1, stats })
}

pub fn microstretch_step(s: &MicrostretchState, h: f64, cfg: &SolverConfig) -> Result<MicrostretchState> {
    let g = s.vel.grid;
    let y = &s.vel;
    let cay = |x: &CellField| apply_cayley_cells(y, x, h, cfg);
    let alpha = cay(&(&s.alpha + &(&s.omega * h)))?;
    let j_r = cay(&(&s.j_r - &(&s.r * (2.0 * h))))?;
    let lap = laplacian_cell(&alpha);
    let pi = &cay(&s.pi())? + &(&lap * h);
    let omega = pi.zip_map(&j_r, |p, j| p * (-j).exp());
    let i_r = pi.zip_map(&omega, |p, w| 0.5 * p * w);
    let mut clamped = 0;
    let (r, lambda, j_s) = if s.stretch_enabled {
        let lambda = cay(&(&s.lambda + &(&s.r * h)))?;
        let j_s = cay(&(&s.j_s - &(&s.r * (2.0 * h))))?;
        // Q + h e^{−j_s} Q² = b, root that tends to b as h → 0. Once the step is
        // too large for a real root, the vertex Q = −e^{j_s}/(2h) minimises the residual.
        let b = &(&cay(&s.q())? - &(&i_r * (2.0 * h))) - &(&lambda * h);
        let mut r = CellField::zeros(&g);
        for k in 0..r.data.len() {
            let (bk, ej) = (b.data[k], (-j_s.data[k]).exp());
            let disc = 1.0 + 4.0 * h * bk * ej;
            if !disc.is_finite() {
                return Err(GeovarError::NoConvergence { iterations: 0, residual: f64::INFINITY });
            }
            r.data[k] = if disc >= 0.0 {
                2.0 * bk / (1.0 + disc.sqrt()) * ej
            } else {
                clamped += 1;
                -0.5 / h
            };
        }
        (r, lambda, j_s)
    } else {
        let z = CellField::zeros(&g);
        (z.clone(), z.clone(), z)
    };
    let mut force = lambda_op(&pi, &omega)?;
    force.axpy(1.0, &lambda_op(&i_r, &j_r)?);
    force.axpy(1.0, &lambda_op(&lap, &alpha)?);
    if s.stretch_enabled {
        let q = j_s.zip_map(&r, |j, x| j.exp() * x);
        let i_s = j_s.zip_map(&r, |j, x| 0.5 * j.exp() * x * x);
        force.axpy(1.0, &lambda_op(&q, &r)?);
        force.axpy(1.0, &lambda_op(&i_s, &j_s)?);
    }
    let (vel, p, stats) = solve_momentum(y, Some(&force), h, cfg)?;
    Ok(MicrostretchState {
        vel,
        p,
        omega,
        r,
        alpha,
        lambda,
        j_r,
        j_s,
        t: s.t + h,
        k: s.k + 1,
        stats,
        stretch_enabled: s.stretch_enabled,
        stretch_clamped: s.stretch_clamped + clamped,
    })
}

/// Any of the grid models.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelState {
    Fluid(FluidState),
    Mhd(MhdState),
    Nematic(NematicState),
    Microstretch(MicrostretchState),
}

impl ModelState {
    pub fn kind(&self) -> &'static str {
        match self {
            ModelState::Fluid(_) => "fluid",
            ModelState::Mhd(_) => "mhd",
            ModelState::Nematic(_) => "nematic",
            ModelState::Microstretch(_) => "microstretch",
        }
    }

    pub fn velocity(&self) -> &StaggeredVectorField {
        match self {
            ModelState::Fluid(s) => &s.vel,
            ModelState::Mhd(s) => &s.vel,
            ModelState::Nematic(s) => &s.vel,
            ModelState::Microstretch(s) => &s.vel,
        }
    }

    pub fn pressure(&self) -> &CellField {
        match self {
            ModelState::Fluid(s) => &s.p,
            ModelState::Mhd(s) => &s.p,
            ModelState::Nematic(s) => &s.p,
            ModelState::Microstretch(s) => &s.p,
        }
    }

    pub fn time(&self) -> (f64, usize) {
        match self {
            ModelState::Fluid(s) => (s.t, s.k),
            ModelState::Mhd(s) => (s.t, s.k),
            ModelState::Nematic(s) => (s.t, s.k),
            ModelState::Microstretch(s) => (s.t, s.k),
        }
    }

    pub fn stats(&self) -> SolveStats {
        match self {
            ModelState::Fluid(s) => s.stats,
            ModelState::Mhd(s) => s.stats,
            ModelState::Nematic(s) => s.stats,
            ModelState::Microstretch(s) => s.stats,
        }
    }

    pub fn magnetic(&self) -> Option<&StaggeredVectorField> {
        match self {
            ModelState::Mhd(s) => Some(&s.b),
            _ => None,
        }
    }

    /// Named cell fields in case-insensitive alphabetical order, for snapshots.
    pub fn cell_fields(&self) -> Vec<(&'static str, CellField)> {
        let mut out = vec![("p", self.pressure().clone())];
        match self {
            ModelState::Nematic(s) => {
                out.push(("omega", s.omega.clone()));
                out.push(("alpha", s.alpha.clone()));
            }
            ModelState::Microstretch(s) => {
                out.extend([
                    ("omega", s.omega.clone()),
                    ("R", s.r.clone()),
                    ("alpha", s.alpha.clone()),
                    ("lambda", s.lambda.clone()),
                    ("j_r", s.j_r.clone()),
                    ("j_s", s.j_s.clone()),
                    ("pi", s.pi()),
                    ("Q", s.q()),
                ]);
            }
            _ => {}
        }
        out.sort_by_key(|(name, _)| name.to_ascii_lowercase());
        out
    }

    pub fn step(&self, h: f64, cfg: &SolverConfig) -> Result<ModelState> {
        Ok(match self {
            ModelState::Fluid(s) => ModelState::Fluid(fluid_step(s, h, cfg)?),
            ModelState::Mhd(s) => ModelState::Mhd(mhd_step(s, h, cfg)?),
            ModelState::Nematic(s) => ModelState::Nematic(nematic_step(s, h, cfg)?),
            ModelState::Microstretch(s) => ModelState::Microstretch(microstretch_step(s, h, cfg)?),
        })
    }
}
