//! Run configuration and its TOML form.
//!
//! ```toml
//! [run]
//! name = "mhd-vortex"
//! model = "mhd"              # fluid | mhd | nematic | microstretch | rigid-body | heavy-top
//! h = 0.5
//! t_end = 80.0
//! steps_per_snapshot = 20
//! binary = false
//! lorentz = "endpoint"       # mhd only: endpoint | trapezoidal
//! stretch = true             # microstretch only
//!
//! [grid]                     # omitted for rigid-body and heavy-top
//! nx = 20
//! ny = 24
//! x = [0.0, 10.0]
//! y = [0.0, 12.0]
//! boundary = "no-normal-flow" # or "periodic"
//!
//! [solver]                   # every key optional
//! picard_max = 200
//! residual_tol = 1e-10
//! poisson_tol = 1e-12
//!
//! [init]
//! kind = "mhd-vortex"        # plus the parameters of that initial condition
//! x0 = 3.0
//! ```

use std::path::Path;

use geovar::models::LorentzForcing;
use geovar::staggered_grid::{Boundary, GridSpec};
use geovar::timestepper::SolverConfig;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    Fluid,
    Mhd,
    Nematic,
    Microstretch,
    RigidBody,
    HeavyTop,
}

impl Model {
    pub fn is_grid(self) -> bool {
        !matches!(self, Model::RigidBody | Model::HeavyTop)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Lorentz {
    #[default]
    Endpoint,
    Trapezoidal,
}

impl From<Lorentz> for LorentzForcing {
    fn from(l: Lorentz) -> Self {
        match l {
            Lorentz::Endpoint => LorentzForcing::Endpoint,
            Lorentz::Trapezoidal => LorentzForcing::Trapezoidal,
        }
    }
}

fn one() -> usize {
    1
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default)]
    pub name: String,
    pub model: Model,
    pub h: f64,
    pub t_end: f64,
    #[serde(default = "one")]
    pub steps_per_snapshot: usize,
    #[serde(default)]
    pub binary: bool,
    #[serde(default)]
    pub lorentz: Lorentz,
    #[serde(default = "yes")]
    pub stretch: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub nx: usize,
    pub ny: usize,
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub boundary: String,
}

impl GridSection {
    pub fn spec(&self) -> Result<GridSpec, CliError> {
        let b = Boundary::parse(&self.boundary)
            .ok_or_else(|| CliError::Config(format!("unknown boundary `{}`", self.boundary)))?;
        GridSpec::for_domain(self.nx, self.ny, self.x, self.y, b).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Same domain at `nx` cells across, keeping the aspect ratio.
    pub fn with_nx(&self, nx: usize) -> Self {
        Self { ny: nx * self.ny / self.nx, nx, ..self.clone() }
    }
}

/// Solver settings; absent keys fall back to the library defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub picard_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub poisson_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub linear_max_iter: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub linear_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub krylov_restart: Option<usize>,
}

impl SolverSection {
    pub fn resolve(&self) -> SolverConfig {
        let d = SolverConfig::default();
        SolverConfig {
            picard_max: self.picard_max.unwrap_or(d.picard_max),
            residual_tol: self.residual_tol.unwrap_or(d.residual_tol),
            poisson_tol: self.poisson_tol.unwrap_or(d.poisson_tol),
            linear_max_iter: self.linear_max_iter.unwrap_or(d.linear_max_iter),
            linear_tol: self.linear_tol.unwrap_or(d.linear_tol),
            krylov_restart: self.krylov_restart.unwrap_or(d.krylov_restart),
        }
    }
}

/// Initial conditions. Coordinates are absolute domain coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Init {
    /// Everything zero.
    Rest,
    /// Velocity from a stream function `a sin(kx x) sin(ky y)` and optional uniform field.
    StreamFunction { amplitude: f64, kx: f64, ky: f64, bx: f64, by: f64 },
    MhdVortex { x0: f64, y0: f64, u0: f64, beta: f64, gamma: f64 },
    Reconnection { x1: f64, x2: f64, u0: f64, b0: f64, theta: f64 },
    FieldLoop { v0: f64, a0: f64, radius: f64, theta: f64 },
    Rotor { u0: f64, r0: f64, r1: f64, bx: f64, theta: f64 },
    OrszagTang,
    /// Stream function `sin(πx/Lx) sin(πy/Ly)` and a spinning disk `ω = omega0` for `r < radius`.
    SpinningDisk { cx: f64, cy: f64, radius: f64, omega0: f64 },
    RigidBody { inertia: [f64; 3], omega: [f64; 3] },
    /// Tilt is a rotation about the body x axis.
    HeavyTop { inertia: [f64; 3], omega: [f64; 3], chi: [f64; 3], mgl: f64, tilt: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub run: RunSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSection>,
    #[serde(default)]
    pub solver: SolverSection,
    pub init: Init,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let c: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Number of steps; `t_end` is rounded to the nearest whole step.
    pub fn steps(&self) -> usize {
        (self.run.t_end / self.run.h).round() as usize
    }

    pub fn solver(&self) -> SolverConfig {
        self.solver.resolve()
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        let r = &self.run;
        if !(r.h > 0.0 && r.h.is_finite()) {
            return bad(format!("h = {} must be positive", r.h));
        }
        if !(r.t_end > 0.0 && r.t_end.is_finite()) {
            return bad(format!("t_end = {} must be positive", r.t_end));
        }
        if r.steps_per_snapshot == 0 {
            return bad("steps_per_snapshot must be at least 1".into());
        }
        self.solver().validate().map_err(|e| CliError::Config(e.to_string()))?;
        match (&self.grid, r.model.is_grid()) {
            (Some(g), true) => {
                g.spec()?;
            }
            (None, true) => return bad("grid models need a [grid] section".into()),
            _ => {}
        }
        let ok = match (&self.init, r.model) {
            (Init::RigidBody { .. }, m) => m == Model::RigidBody,
            (Init::HeavyTop { .. }, m) => m == Model::HeavyTop,
            (_, m) => m.is_grid(),
        };
        if !ok {
            return bad(format!("initial condition does not fit model {:?}", r.model));
        }
        Ok(())
    }
}
