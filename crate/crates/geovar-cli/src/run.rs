//! Time stepping and output files.
//!
//! A run directory holds `config.toml`, `diagnostics.csv` (one row per step,
//! `k = 1..N`), `snapshots/step_<k>.txt` (or `.bin`) every
//! `steps_per_snapshot` steps plus the initial and final states, and on
//! solver failure a `failure.toml` next to the partial outputs.
//!
//! Grid models use the [`DiagnosticsRecord::HEADER`] columns. Rigid body and
//! heavy top runs use [`TRAJECTORY_HEADER`]: body angular velocity, total
//! energy and spatial angular momentum.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use geovar::diagnostics::{self, DiagnosticsRecord};
use geovar::finite_dim::{heavy_top_step, rigid_step, spatial_momentum};
use geovar::lie_core::NewtonConfig;
use geovar::models::ModelState;
use geovar::staggered_grid::snapshot::Snapshot;
use geovar::timestepper::SolverConfig;
use geovar::GeovarError;

use crate::config::RunConfig;
use crate::init::{initial_state, State};
use crate::CliError;

pub const TRAJECTORY_HEADER: &str = "t,k,omega_x,omega_y,omega_z,energy,m_x,m_y,m_z";

/// One row of rigid body or heavy top output.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub t: f64,
    pub k: usize,
    pub omega: [f64; 3],
    pub energy: f64,
    pub momentum: [f64; 3],
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Record {
    Grid(DiagnosticsRecord),
    Trajectory(TrajectoryRecord),
}

impl Record {
    pub fn csv_row(&self) -> String {
        match self {
            Record::Grid(r) => r.to_csv_row(),
            Record::Trajectory(r) => {
                let [a, b, c] = r.omega;
                let [x, y, z] = r.momentum;
                format!("{:e},{},{a:e},{b:e},{c:e},{:e},{x:e},{y:e},{z:e}", r.t, r.k, r.energy)
            }
        }
    }
}

/// A configured model and its current state.
pub struct Simulation {
    pub config: RunConfig,
    pub state: State,
    pub k: usize,
    solver: SolverConfig,
    newton: NewtonConfig,
}

impl Simulation {
    pub fn new(config: &RunConfig) -> Result<Self, CliError> {
        config.validate()?;
        Ok(Self {
            state: initial_state(config)?,
            config: config.clone(),
            k: 0,
            solver: config.solver(),
            newton: NewtonConfig::default(),
        })
    }

    pub fn h(&self) -> f64 {
        self.config.run.h
    }

    pub fn t(&self) -> f64 {
        self.k as f64 * self.h()
    }

    pub fn step(&mut self) -> Result<(), GeovarError> {
        let h = self.h();
        self.state = match &self.state {
            State::Grid(s) => State::Grid(s.step(h, &self.solver)?),
            State::Rigid(s) => State::Rigid(rigid_step(s, h, &self.newton)?),
            State::Top(s) => State::Top(heavy_top_step(s, h, &self.newton)?),
        };
        self.k += 1;
        Ok(())
    }

    pub fn grid_state(&self) -> Option<&ModelState> {
        match &self.state {
            State::Grid(s) => Some(s),
            _ => None,
        }
    }

    pub fn record(&self) -> Record {
        let h = self.h();
        let (t, k) = (self.t(), self.k);
        let traj = |body: &geovar::RigidBodyState64, energy: f64| {
            Record::Trajectory(TrajectoryRecord {
                t,
                k,
                omega: body.omega.into(),
                energy,
                momentum: spatial_momentum(body, h).into(),
            })
        };
        match &self.state {
            State::Grid(s) => Record::Grid(diagnostics::record(s, h)),
            State::Rigid(b) => traj(b, b.energy()),
            State::Top(s) => traj(&s.body, s.body.energy() + s.mgl() * s.gamma.dot(&s.chi)),
        }
    }

    pub fn header(&self) -> &'static str {
        match self.state {
            State::Grid(_) => DiagnosticsRecord::HEADER,
            _ => TRAJECTORY_HEADER,
        }
    }

    pub fn snapshot(&self) -> Option<Snapshot> {
        let s = self.grid_state()?;
        let v = s.velocity();
        let g = v.grid;
        let mut snap = Snapshot::new(s.kind(), g);
        snap.push("u", g.u_shape(), &v.u);
        snap.push("v", g.v_shape(), &v.v);
        if let Some(b) = s.magnetic() {
            snap.push("Bx", g.u_shape(), &b.u);
            snap.push("By", g.v_shape(), &b.v);
        }
        for (name, f) in s.cell_fields() {
            snap.push(name, g.cell_shape(), &f.data);
        }
        Some(snap)
    }
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub records: Vec<Record>,
    pub snapshots: Vec<PathBuf>,
}

fn write_snapshot(sim: &Simulation, dir: &Path, tag: &str, out: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let Some(snap) = sim.snapshot() else { return Ok(()) };
    let binary = sim.config.run.binary;
    let path = dir.join(format!("{tag}.{}", if binary { "bin" } else { "txt" }));
    let mut w = BufWriter::new(File::create(&path)?);
    if binary {
        snap.write_binary(&mut w)?;
    } else {
        snap.write_text(&mut w)?;
    }
    w.flush()?;
    out.push(path);
    Ok(())
}

fn write_failure(out: &Path, sim: &Simulation, err: &GeovarError) -> Result<(), CliError> {
    let text = format!(
        "failed_step = {}\nlast_good_t = {:e}\nerror = {:?}\n",
        sim.k + 1,
        sim.t(),
        err.to_string()
    );
    fs::write(out.join("failure.toml"), text)?;
    Ok(())
}

/// Steps `config` to `t_end`, writing into `out`.
pub fn run(config: &RunConfig, out: &Path) -> Result<RunSummary, CliError> {
    let mut sim = Simulation::new(config)?;
    let snap_dir = out.join("snapshots");
    fs::create_dir_all(&snap_dir)?;
    fs::write(out.join("config.toml"), config.to_toml())?;
    let mut csv = BufWriter::new(File::create(out.join("diagnostics.csv"))?);
    writeln!(csv, "{}", sim.header())?;

    let mut summary = RunSummary { records: Vec::new(), snapshots: Vec::new() };
    write_snapshot(&sim, &snap_dir, "step_000000", &mut summary.snapshots)?;
    let n = config.steps();
    let cadence = config.run.steps_per_snapshot;
    for _ in 0..n {
        if let Err(e) = sim.step() {
            csv.flush()?;
            write_snapshot(&sim, &snap_dir, "last_good", &mut summary.snapshots)?;
            write_failure(out, &sim, &e)?;
            return Err(CliError::Solver { step: sim.k + 1, source: e });
        }
        let r = sim.record();
        writeln!(csv, "{}", r.csv_row())?;
        summary.records.push(r);
        if sim.k % cadence == 0 || sim.k == n {
            write_snapshot(&sim, &snap_dir, &format!("step_{:06}", sim.k), &mut summary.snapshots)?;
        }
    }
    csv.flush()?;
    Ok(summary)
}
