//! Refinement study: the same problem on a ladder of doubling grids.

use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use geovar::diagnostics::refinement_difference;
use geovar::staggered_grid::StaggeredVectorField;

use crate::config::RunConfig;
use crate::run::Simulation;
use crate::CliError;

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub n_coarse: usize,
    pub n_fine: usize,
    pub diff_u: f64,
    pub diff_b: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    /// Negated least-squares slope of `log₂ diff` against `log₂ n`.
    pub order_u: f64,
    pub order_b: f64,
}

impl ConvergenceTable {
    pub const HEADER: &'static str = "n_coarse,n_fine,diff_u,diff_B";
    pub const FIT_HEADER: &'static str = "field,order";

    pub fn to_csv(&self) -> String {
        let mut s = format!("{}\n", Self::HEADER);
        for r in &self.rows {
            s += &format!("{},{},{:e},{:e}\n", r.n_coarse, r.n_fine, r.diff_u, r.diff_b);
        }
        s
    }

    pub fn fit_csv(&self) -> String {
        format!("{}\nu,{}\nB,{}\n", Self::FIT_HEADER, self.order_u, self.order_b)
    }

    pub fn write(&self, out: &Path) -> Result<(), CliError> {
        fs::create_dir_all(out)?;
        fs::write(out.join("convergence.csv"), self.to_csv())?;
        fs::write(out.join("convergence_fit.csv"), self.fit_csv())?;
        Ok(())
    }
}

/// Worker count from `GEOVAR_THREADS`, else the available cores.
pub fn thread_cap() -> usize {
    std::env::var("GEOVAR_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|n| *n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn order(ns: &[usize], d: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = ns.iter().zip(d).map(|(n, d)| ((*n as f64).log2(), d.log2())).collect();
    let m = pts.len() as f64;
    let (xm, ym) = (pts.iter().map(|p| p.0).sum::<f64>() / m, pts.iter().map(|p| p.1).sum::<f64>() / m);
    let sxy: f64 = pts.iter().map(|(x, y)| (x - xm) * (y - ym)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - xm).powi(2)).sum();
    -sxy / sxx
}

/// Final velocity and magnetic field of `base` at `n` cells across, stepped to
/// `t_compare` with `h` as close to `ε / eps_over_h` as whole steps allow.
fn solve_at(
    base: &RunConfig,
    n: usize,
    eps_over_h: f64,
    t_compare: f64,
) -> Result<(StaggeredVectorField, Option<StaggeredVectorField>), CliError> {
    let mut c = base.clone();
    let g = base.grid.as_ref().ok_or_else(|| CliError::Config("convergence needs a grid model".into()))?.with_nx(n);
    let eps = (g.x[1] - g.x[0]) / n as f64;
    let steps = (t_compare * eps_over_h / eps - 1e-9).ceil().max(1.0) as usize;
    c.grid = Some(g);
    c.run.h = t_compare / steps as f64;
    c.run.t_end = t_compare;
    let mut sim = Simulation::new(&c)?;
    for _ in 0..steps {
        sim.step().map_err(|e| CliError::Solver { step: sim.k + 1, source: e })?;
    }
    let s = sim.grid_state().expect("grid model");
    Ok((s.velocity().clone(), s.magnetic().cloned()))
}

/// `resolutions` must double at each entry.
pub fn convergence_study(
    base: &RunConfig,
    resolutions: &[usize],
    eps_over_h: f64,
    t_compare: f64,
) -> Result<ConvergenceTable, CliError> {
    if resolutions.len() < 3 || resolutions.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(CliError::Config("need at least three doubling resolutions".into()));
    }
    if !(eps_over_h > 0.0 && t_compare > 0.0) {
        return Err(CliError::Config("eps_over_h and the comparison time must be positive".into()));
    }
    let results: Mutex<Vec<Option<Result<_, CliError>>>> = Mutex::new((0..resolutions.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    // Largest grids first so the slowest run starts immediately.
    let order_idx: Vec<usize> = (0..resolutions.len()).rev().collect();
    std::thread::scope(|sc| {
        for _ in 0..thread_cap().min(resolutions.len()) {
            sc.spawn(|| loop {
                let Some(&i) = order_idx.get(next.fetch_add(1, Ordering::SeqCst)) else { break };
                let r = solve_at(base, resolutions[i], eps_over_h, t_compare);
                results.lock().unwrap()[i] = Some(r);
            });
        }
    });
    let fields = results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every resolution ran"))
        .collect::<Result<Vec<_>, _>>()?;

    let mut rows = Vec::new();
    for (i, pair) in fields.windows(2).enumerate() {
        let ((uc, bc), (uf, bf)) = (&pair[0], &pair[1]);
        let diff_b = match (bc, bf) {
            (Some(c), Some(f)) => refinement_difference(c, f)?,
            _ => 0.0,
        };
        rows.push(ConvergenceRow {
            n_coarse: resolutions[i],
            n_fine: resolutions[i + 1],
            diff_u: refinement_difference(uc, uf)?,
            diff_b,
        });
    }
    let ns: Vec<usize> = rows.iter().map(|r| r.n_coarse).collect();
    let du: Vec<f64> = rows.iter().map(|r| r.diff_u).collect();
    let db: Vec<f64> = rows.iter().map(|r| r.diff_b).collect();
    Ok(ConvergenceTable { order_u: order(&ns, &du), order_b: order(&ns, &db), rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Init;
    use crate::presets::load_preset;

    #[test]
    fn slope_fit_recovers_power_laws() {
        let ns = [8, 16, 32];
        let d: Vec<f64> = ns.iter().map(|n| 3.0 / (*n as f64).powi(2)).collect();
        assert!((order(&ns, &d) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn steady_state_ladder_has_zero_differences() {
        // A uniform flow is exact on every grid and does not evolve.
        let mut c = load_preset("orszag-tang").unwrap();
        c.init = Init::StreamFunction { amplitude: 0.0, kx: 0.0, ky: 0.0, bx: 0.3, by: -0.2 };
        let t = convergence_study(&c, &[4, 8, 16], 7.85, 0.25).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert!(t.rows.iter().all(|r| r.diff_u == 0.0 && r.diff_b < 1e-14), "{t:?}");
        assert!(t.to_csv().starts_with(ConvergenceTable::HEADER));
    }

    #[test]
    fn rejects_non_doubling_ladders() {
        let c = load_preset("orszag-tang").unwrap();
        assert!(convergence_study(&c, &[8, 12, 16], 7.85, 0.25).is_err());
    }
}
