#![allow(dead_code)]

use geovar::staggered_grid::{from_stream_function, CellField, GridSpec, StaggeredVectorField, VertexField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random divergence-free field: stream function plus a uniform drift when periodic.
pub fn random_solenoidal(g: &GridSpec, r: &mut ChaCha8Rng) -> StaggeredVectorField {
    let (a, b) = g.vertex_shape();
    let psi: Vec<f64> = (0..a * b)
        .map(|k| {
            let (i, j) = (k % a, k / a);
            let edge = !g.periodic() && (i == 0 || j == 0 || i == a - 1 || j == b - 1);
            if edge { 0.0 } else { r.gen_range(-1.0..1.0) }
        })
        .collect();
    let mut w = from_stream_function(&VertexField::from_data(g, psi).unwrap());
    if g.periodic() {
        let (cu, cv) = (r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
        w.u.iter_mut().for_each(|x| *x += cu);
        w.v.iter_mut().for_each(|x| *x += cv);
    }
    w
}

pub fn random_cells(g: &GridSpec, r: &mut ChaCha8Rng) -> CellField {
    CellField::from_data(g, (0..g.n_cells()).map(|_| r.gen_range(-1.0..1.0)).collect()).unwrap()
}

/// `½ Σ` of the squares of the four edge values around each cell.
pub fn kinetic_cells(w: &StaggeredVectorField) -> CellField {
    let g = w.grid;
    let mut k = CellField::zeros(&g);
    for j in 0..g.ny {
        for i in 0..g.nx {
            let (ii, jj) = (i as isize, j as isize);
            let s = w.u_at(ii, jj).powi(2) + w.u_at(ii + 1, jj).powi(2) + w.v_at(ii, jj).powi(2) + w.v_at(ii, jj + 1).powi(2);
            k.set(i, j, 0.5 * s);
        }
    }
    k
}
