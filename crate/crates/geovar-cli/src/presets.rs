//! Benchmark configurations.

use std::f64::consts::PI;

use crate::config::{GridSection, Init, Lorentz, Model, RunConfig, RunSection, SolverSection};
use crate::CliError;

pub const PRESETS: [&str; 9] = [
    "mhd-vortex",
    "reconnection",
    "field-loop",
    "rotor",
    "orszag-tang",
    "nematic-disk",
    "microstretch-disk",
    "rigid-body",
    "heavy-top",
];

fn run(name: &str, model: Model, h: f64, t_end: f64, steps_per_snapshot: usize) -> RunSection {
    RunSection {
        name: name.into(),
        model,
        h,
        t_end,
        steps_per_snapshot,
        binary: false,
        lorentz: Lorentz::Endpoint,
        stretch: true,
    }
}

fn grid(nx: usize, ny: usize, x: [f64; 2], y: [f64; 2], boundary: &str) -> Option<GridSection> {
    Some(GridSection { nx, ny, x, y, boundary: boundary.into() })
}

fn disk(name: &str, model: Model) -> RunConfig {
    RunConfig {
        run: run(name, model, 0.4, 50.0, 25),
        grid: grid(10, 10, [0.0, 10.0], [0.0, 10.0], "no-normal-flow"),
        solver: SolverSection::default(),
        init: Init::SpinningDisk { cx: 5.0, cy: 5.0, radius: 2.5, omega0: 1.0 },
    }
}

pub fn load_preset(name: &str) -> Result<RunConfig, CliError> {
    let theta = 0.5f64.atan();
    let c = match name {
        "mhd-vortex" => RunConfig {
            run: run(name, Model::Mhd, 0.5, 80.0, 20),
            grid: grid(20, 24, [0.0, 10.0], [0.0, 12.0], "no-normal-flow"),
            solver: SolverSection::default(),
            init: Init::MhdVortex { x0: 3.0, y0: 5.5, u0: 0.5, beta: 5.0, gamma: 1.4 },
        },
        "reconnection" => RunConfig {
            run: run(name, Model::Mhd, 0.1, 8.0, 10),
            grid: grid(30, 30, [0.0, 2.0], [0.0, 2.0], "periodic"),
            solver: SolverSection::default(),
            init: Init::Reconnection { x1: 0.5, x2: 1.5, u0: 0.1, b0: 1.0, theta },
        },
        "field-loop" => RunConfig {
            run: run(name, Model::Mhd, 0.01, 2.0, 50),
            grid: grid(128, 64, [-1.0, 1.0], [-0.5, 0.5], "periodic"),
            solver: SolverSection::default(),
            init: Init::FieldLoop { v0: 5f64.sqrt(), a0: 1e-3, radius: 0.3, theta },
        },
        "rotor" => RunConfig {
            run: run(name, Model::Mhd, 0.003, 0.36, 20),
            grid: grid(30, 30, [0.0, 1.0], [0.0, 1.0], "periodic"),
            solver: SolverSection::default(),
            init: Init::Rotor { u0: 2.0, r0: 0.1, r1: 0.115, bx: 5.0 / (4.0 * PI).sqrt(), theta },
        },
        "orszag-tang" => RunConfig {
            run: run(name, Model::Mhd, 0.01, 0.75, 25),
            grid: grid(64, 64, [0.0, 2.0 * PI], [0.0, 2.0 * PI], "periodic"),
            solver: SolverSection::default(),
            init: Init::OrszagTang,
        },
        "nematic-disk" => disk(name, Model::Nematic),
        "microstretch-disk" => disk(name, Model::Microstretch),
        "rigid-body" => RunConfig {
            run: run(name, Model::RigidBody, 0.01, 100.0, 1000),
            grid: None,
            solver: SolverSection::default(),
            init: Init::RigidBody { inertia: [1.0, 2.0, 3.0], omega: [1.0, 0.1, 0.1] },
        },
        "heavy-top" => RunConfig {
            run: run(name, Model::HeavyTop, 0.01, 100.0, 1000),
            grid: None,
            solver: SolverSection::default(),
            // Lagrange top; the tilt and spin are our choice of initial data.
            init: Init::HeavyTop {
                inertia: [1.0, 1.0, 2.0],
                omega: [0.3, -0.2, 3.0],
                chi: [0.0, 0.0, 1.0],
                mgl: 1.0,
                tilt: 0.4,
            },
        },
        _ => return Err(CliError::Config(geovar::GeovarError::UnknownPreset(name.into()).to_string())),
    };
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_is_valid() {
        for p in PRESETS {
            let c = load_preset(p).unwrap();
            c.validate().unwrap();
            assert_eq!(c.run.name, p);
            assert_eq!(RunConfig::from_toml(&c.to_toml()).unwrap(), c, "{p}");
        }
        assert!(load_preset("vortex").is_err());
    }

    #[test]
    fn published_parameters() {
        let theta = 0.5f64.atan();
        let c = load_preset("mhd-vortex").unwrap();
        let g = c.grid.as_ref().unwrap();
        assert_eq!((g.nx, g.ny, g.x, g.y, g.boundary.as_str()), (20, 24, [0.0, 10.0], [0.0, 12.0], "no-normal-flow"));
        assert_eq!((c.run.h, c.run.t_end, c.steps()), (0.5, 80.0, 160));
        assert_eq!(c.init, Init::MhdVortex { x0: 3.0, y0: 5.5, u0: 0.5, beta: 5.0, gamma: 1.4 });

        let c = load_preset("reconnection").unwrap();
        assert_eq!((c.grid.as_ref().unwrap().nx, c.run.h, c.run.t_end), (30, 0.1, 8.0));
        assert_eq!(c.init, Init::Reconnection { x1: 0.5, x2: 1.5, u0: 0.1, b0: 1.0, theta });

        let c = load_preset("field-loop").unwrap();
        let g = c.grid.as_ref().unwrap();
        assert_eq!((g.nx, g.ny, g.x, g.y), (128, 64, [-1.0, 1.0], [-0.5, 0.5]));
        assert_eq!((c.run.h, c.run.t_end), (0.01, 2.0));
        assert_eq!(c.init, Init::FieldLoop { v0: 5f64.sqrt(), a0: 1e-3, radius: 0.3, theta });

        let c = load_preset("rotor").unwrap();
        assert_eq!((c.grid.as_ref().unwrap().nx, c.run.h, c.run.t_end), (30, 0.003, 0.36));
        assert_eq!(c.steps(), 120);
        assert_eq!(c.init, Init::Rotor { u0: 2.0, r0: 0.1, r1: 0.115, bx: 5.0 / (4.0 * PI).sqrt(), theta });

        let c = load_preset("orszag-tang").unwrap();
        let g = c.grid.as_ref().unwrap();
        assert_eq!((g.nx, g.ny, g.x[1], c.run.h, c.run.t_end), (64, 64, 2.0 * PI, 0.01, 0.75));

        for p in ["nematic-disk", "microstretch-disk"] {
            let c = load_preset(p).unwrap();
            let g = c.grid.as_ref().unwrap();
            assert_eq!((g.nx, g.ny, g.x, g.y, g.boundary.as_str()), (10, 10, [0.0, 10.0], [0.0, 10.0], "no-normal-flow"));
            assert_eq!((c.run.h, c.run.t_end, c.steps()), (0.4, 50.0, 125));
            assert_eq!(c.init, Init::SpinningDisk { cx: 5.0, cy: 5.0, radius: 2.5, omega0: 1.0 });
        }

        let c = load_preset("rigid-body").unwrap();
        assert_eq!(c.init, Init::RigidBody { inertia: [1.0, 2.0, 3.0], omega: [1.0, 0.1, 0.1] });
        assert_eq!((c.run.h, c.steps()), (0.01, 10_000));
        let c = load_preset("heavy-top").unwrap();
        let Init::HeavyTop { inertia, chi, mgl, .. } = c.init else { panic!() };
        assert_eq!((inertia, chi, mgl, c.steps()), ([1.0, 1.0, 2.0], [0.0, 0.0, 1.0], 1.0, 10_000));
    }
}
