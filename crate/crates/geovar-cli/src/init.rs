//! Initial states built from a [`RunConfig`].

use std::f64::consts::PI;

use geovar::finite_dim::{HeavyTopState, RigidBodyState};
use geovar::models::*;
use geovar::staggered_grid::*;
use geovar::{HeavyTopState64, RigidBodyState64};
use nalgebra::{Rotation3, Vector3};

use crate::config::{Init, Model, RunConfig};
use crate::CliError;

#[derive(Clone, Debug, PartialEq)]
pub enum State {
    Grid(ModelState),
    Rigid(RigidBodyState64),
    Top(HeavyTopState64),
}

/// Grid fields before they are packed into a model state.
struct Fields {
    vel: StaggeredVectorField,
    b: StaggeredVectorField,
    omega: CellField,
}

/// Sampled fields pick up O(1) discrete divergence; remove it.
fn solenoidal(w: StaggeredVectorField) -> Result<StaggeredVectorField, CliError> {
    if divergence_cell(&w).max_abs() <= 1e-13 {
        return Ok(w);
    }
    Ok(project_divergence_free(&w)?)
}

fn grid_fields(init: &Init, g: &GridSpec) -> Result<Fields, CliError> {
    let zero = StaggeredVectorField::zeros(g);
    let mut f = Fields { vel: zero.clone(), b: zero, omega: CellField::zeros(g) };
    let [lx, ly] = g.extent();
    let [ox, oy] = g.origin;
    match *init {
        Init::Rest => {}
        Init::StreamFunction { amplitude, kx, ky, bx, by } => {
            let psi = VertexField::from_fn(g, |x, y| amplitude * (kx * x).sin() * (ky * y).sin());
            f.vel = from_stream_function(&psi);
            f.b = StaggeredVectorField::uniform(g, bx, by);
        }
        Init::MhdVortex { x0, y0, u0, beta, .. } => {
            let bump = move |x: f64, y: f64| {
                let r2 = (x - x0).powi(2) + (y - y0).powi(2);
                beta / (2.0 * PI) * ((1.0 - r2) / 2.0).exp()
            };
            f.vel = solenoidal(StaggeredVectorField::from_fn(
                g,
                |x, y| u0 + bump(x, y) * (y - y0),
                |x, y| -bump(x, y) * (x - x0),
            ))?;
            f.b = solenoidal(StaggeredVectorField::from_fn(
                g,
                |x, y| -(PI * x / 10.0).sin() * (PI * y / 12.0).cos(),
                |x, y| (PI * x / 10.0).cos() * (PI * y / 12.0).sin(),
            ))?;
        }
        Init::Reconnection { x1, x2, u0, b0, .. } => {
            f.vel = solenoidal(StaggeredVectorField::from_fn(g, |_, y| u0 * (PI * y).sin(), |_, _| 0.0))?;
            let by = |x: f64, _| if x < x1 || x > x2 { b0 } else { -b0 };
            f.b = solenoidal(StaggeredVectorField::from_fn(g, |_, _| 0.0, by))?;
        }
        Init::FieldLoop { v0, a0, radius, theta } => {
            f.vel = StaggeredVectorField::uniform(g, v0 * theta.cos(), v0 * theta.sin());
            // Clipped at zero outside the loop, otherwise there is no loop.
            let a = VertexField::from_fn(g, |x, y| a0 * (radius - x.hypot(y)).max(0.0));
            f.b = from_vector_potential(&a);
        }
        Init::Rotor { u0, r0, r1, bx, .. } => {
            let (cx, cy) = (ox + 0.5 * lx, oy + 0.5 * ly);
            // Angular speed profile: solid rotation inside r0, linear taper to zero at r1.
            let spin = move |x: f64, y: f64| {
                let r = (x - cx).hypot(y - cy);
                if r < r0 {
                    u0 / r0
                } else if r <= r1 {
                    u0 * (r1 - r) / (r1 - r0) / r
                } else {
                    0.0
                }
            };
            f.vel = solenoidal(StaggeredVectorField::from_fn(
                g,
                |x, y| -spin(x, y) * (y - cy),
                |x, y| spin(x, y) * (x - cx),
            ))?;
            f.b = StaggeredVectorField::uniform(g, bx, 0.0);
        }
        Init::OrszagTang => {
            f.vel = from_stream_function(&VertexField::from_fn(g, |x, y| 2.0 * y.sin() - 2.0 * x.cos()));
            f.b = from_vector_potential(&VertexField::from_fn(g, |x, y| (2.0 * y).cos() - 2.0 * x.cos()));
        }
        Init::SpinningDisk { cx, cy, radius, omega0 } => {
            let psi = VertexField::from_fn(g, |x, y| (PI * (x - ox) / lx).sin() * (PI * (y - oy) / ly).sin());
            f.vel = from_stream_function(&psi);
            f.omega = CellField::from_fn(g, |x, y| if (x - cx).hypot(y - cy) < radius { omega0 } else { 0.0 });
        }
        Init::RigidBody { .. } | Init::HeavyTop { .. } => {
            return Err(CliError::Config("rigid-body initial data on a grid model".into()))
        }
    }
    Ok(f)
}

pub fn initial_state(c: &RunConfig) -> Result<State, CliError> {
    let v3 = |a: [f64; 3]| Vector3::from(a);
    match (c.run.model, &c.init) {
        (Model::RigidBody, Init::RigidBody { inertia, omega }) => {
            Ok(State::Rigid(RigidBodyState::new(v3(*omega), v3(*inertia))))
        }
        (Model::HeavyTop, Init::HeavyTop { inertia, omega, chi, mgl, tilt }) => {
            let r = *Rotation3::from_euler_angles(*tilt, 0.0, 0.0).matrix();
            Ok(State::Top(HeavyTopState {
                body: RigidBodyState { r, omega: v3(*omega), inertia: v3(*inertia) },
                gamma: r.transpose() * Vector3::z(),
                mass: *mgl,
                gravity: 1.0,
                length: 1.0,
                chi: v3(*chi),
            }))
        }
        (m, init) if m.is_grid() => {
            let g = c.grid.as_ref().ok_or_else(|| CliError::Config("missing [grid]".into()))?.spec()?;
            let f = grid_fields(init, &g)?;
            let alpha = CellField::zeros(&g);
            Ok(State::Grid(match m {
                Model::Fluid => ModelState::Fluid(FluidState::new(f.vel)),
                Model::Mhd => {
                    let mut s = MhdState::new(f.vel, f.b);
                    s.lorentz = c.run.lorentz.into();
                    ModelState::Mhd(s)
                }
                Model::Nematic => ModelState::Nematic(NematicState::new(f.vel, f.omega, alpha)),
                _ => {
                    let mut s = MicrostretchState::new(f.vel, f.omega, alpha);
                    s.stretch_enabled = c.run.stretch;
                    ModelState::Microstretch(s)
                }
            }))
        }
        _ => Err(CliError::Config("initial condition does not fit the model".into())),
    }
}
