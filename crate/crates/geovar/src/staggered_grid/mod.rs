//! Uniform 2-D staggered (MAC) grid: geometry, field containers and the
//! cartesian operators of the structure-preserving schemes.
//!
//! Storage is row-major with `x` fastest:
//! - cell `(i, j)` ↔ centre `(i+½, j+½)ε`, index `j*nx + i`;
//! - `u` at vertical edges `(i, j+½)ε`, index `j*nu + i` with `nu = nx` (periodic) or `nx+1`;
//! - `v` at horizontal edges `(i+½, j)ε`, index `j*nx + i` with `ny` or `ny+1` rows;
//! - vertex `(i, j)ε`, index `j*nvx + i` with `nvx = nx` (periodic) or `nx+1`.
//!
//! With [`Boundary::NoNormalFlow`] the wall-normal edges (`u` at `i = 0, nx`,
//! `v` at `j = 0, ny`) carry zero flux, cell fields are closed by mirror ghosts
//! and edge values outside the domain read as zero.

mod ops;
pub mod snapshot;

pub use ops::*;

use std::ops::{Add, Mul, Neg, Sub};

use crate::{GeovarError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Boundary {
    Periodic,
    NoNormalFlow,
}

impl Boundary {
    pub fn name(self) -> &'static str {
        match self {
            Boundary::Periodic => "periodic",
            Boundary::NoNormalFlow => "no-normal-flow",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "periodic" => Some(Boundary::Periodic),
            "no-normal-flow" | "nonormalflow" | "walls" => Some(Boundary::NoNormalFlow),
            _ => None,
        }
    }
}

/// Square-cell grid of `nx × ny` cells of side `eps` with lower-left corner `origin`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub eps: f64,
    pub boundary: Boundary,
    pub origin: [f64; 2],
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, eps: f64, boundary: Boundary) -> Result<Self> {
        if nx < 3 || ny < 3 {
            return Err(GeovarError::ShapeMismatch(format!("grid {nx}x{ny} is smaller than 3x3")));
        }
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(GeovarError::ShapeMismatch(format!("cell size {eps} must be positive")));
        }
        Ok(Self { nx, ny, eps, boundary, origin: [0.0, 0.0] })
    }

    /// Grid covering `[x0, x1] × [y0, y1]` with `nx × ny` square cells.
    pub fn for_domain(nx: usize, ny: usize, x: [f64; 2], y: [f64; 2], boundary: Boundary) -> Result<Self> {
        let ex = (x[1] - x[0]) / nx as f64;
        let ey = (y[1] - y[0]) / ny as f64;
        if (ex - ey).abs() > 1e-12 * ex.abs().max(ey.abs()) {
            return Err(GeovarError::ShapeMismatch(format!("cells are not square ({ex} vs {ey})")));
        }
        Ok(Self { origin: [x[0], y[0]], ..Self::new(nx, ny, ex, boundary)? })
    }

    pub fn with_origin(mut self, x0: f64, y0: f64) -> Self {
        self.origin = [x0, y0];
        self
    }

    pub fn periodic(&self) -> bool {
        self.boundary == Boundary::Periodic
    }

    pub fn n_cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn u_shape(&self) -> (usize, usize) {
        if self.periodic() {
            (self.nx, self.ny)
        } else {
            (self.nx + 1, self.ny)
        }
    }

    pub fn v_shape(&self) -> (usize, usize) {
        if self.periodic() {
            (self.nx, self.ny)
        } else {
            (self.nx, self.ny + 1)
        }
    }

    pub fn vertex_shape(&self) -> (usize, usize) {
        if self.periodic() {
            (self.nx, self.ny)
        } else {
            (self.nx + 1, self.ny + 1)
        }
    }

    pub fn extent(&self) -> [f64; 2] {
        [self.nx as f64 * self.eps, self.ny as f64 * self.eps]
    }

    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        (self.origin[0] + (i as f64 + 0.5) * self.eps, self.origin[1] + (j as f64 + 0.5) * self.eps)
    }

    pub fn u_position(&self, i: usize, j: usize) -> (f64, f64) {
        (self.origin[0] + i as f64 * self.eps, self.origin[1] + (j as f64 + 0.5) * self.eps)
    }

    pub fn v_position(&self, i: usize, j: usize) -> (f64, f64) {
        (self.origin[0] + (i as f64 + 0.5) * self.eps, self.origin[1] + j as f64 * self.eps)
    }

    pub fn vertex_position(&self, i: usize, j: usize) -> (f64, f64) {
        (self.origin[0] + i as f64 * self.eps, self.origin[1] + j as f64 * self.eps)
    }

    /// Same grid with twice the resolution.
    pub fn refined(&self) -> Self {
        Self { nx: 2 * self.nx, ny: 2 * self.ny, eps: 0.5 * self.eps, ..*self }
    }

    pub(crate) fn same_shape(&self, o: &GridSpec) -> bool {
        self.nx == o.nx && self.ny == o.ny && self.boundary == o.boundary && self.eps == o.eps
    }

    pub(crate) fn check(&self, o: &GridSpec, what: &str) -> Result<()> {
        if self.same_shape(o) {
            Ok(())
        } else {
            Err(GeovarError::ShapeMismatch(format!(
                "{what}: {}x{} ({:?}) vs {}x{} ({:?})",
                self.nx, self.ny, self.boundary, o.nx, o.ny, o.boundary
            )))
        }
    }
}

#[inline]
fn wrap(i: isize, n: usize) -> usize {
    i.rem_euclid(n as isize) as usize
}

macro_rules! scalar_field {
    ($name:ident, $shape:ident, $doc:literal) => {
        #[doc = $doc]
        #[derive(Clone, Debug, PartialEq)]
        pub struct $name {
            pub grid: GridSpec,
            pub data: Vec<f64>,
        }

        impl $name {
            pub fn zeros(grid: &GridSpec) -> Self {
                let (a, b) = grid.$shape();
                Self { grid: *grid, data: vec![0.0; a * b] }
            }

            pub fn from_data(grid: &GridSpec, data: Vec<f64>) -> Result<Self> {
                let (a, b) = grid.$shape();
                if data.len() != a * b {
                    return Err(GeovarError::ShapeMismatch(format!(
                        "{} needs {} values, got {}",
                        stringify!($name),
                        a * b,
                        data.len()
                    )));
                }
                Ok(Self { grid: *grid, data })
            }

            pub fn constant(grid: &GridSpec, c: f64) -> Self {
                let (a, b) = grid.$shape();
                Self { grid: *grid, data: vec![c; a * b] }
            }

            pub fn shape(&self) -> (usize, usize) {
                self.grid.$shape()
            }

            #[inline]
            pub fn get(&self, i: usize, j: usize) -> f64 {
                self.data[j * self.shape().0 + i]
            }

            #[inline]
            pub fn set(&mut self, i: usize, j: usize, x: f64) {
                let n = self.shape().0;
                self.data[j * n + i] = x;
            }

            pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
                Self { grid: self.grid, data: self.data.iter().map(|&x| f(x)).collect() }
            }

            pub fn zip_map(&self, o: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
                assert!(self.grid.same_shape(&o.grid), "field grids differ");
                Self { grid: self.grid, data: self.data.iter().zip(&o.data).map(|(&a, &b)| f(a, b)).collect() }
            }

            pub fn sum(&self) -> f64 {
                self.data.iter().sum()
            }

            pub fn max_abs(&self) -> f64 {
                self.data.iter().fold(0.0, |m, &x| m.max(x.abs()))
            }

            pub fn dot(&self, o: &Self) -> f64 {
                self.data.iter().zip(&o.data).map(|(a, b)| a * b).sum()
            }
        }

        impl Add<&$name> for &$name {
            type Output = $name;
            fn add(self, o: &$name) -> $name {
                self.zip_map(o, |a, b| a + b)
            }
        }
        impl Sub<&$name> for &$name {
            type Output = $name;
            fn sub(self, o: &$name) -> $name {
                self.zip_map(o, |a, b| a - b)
            }
        }
        impl Mul<f64> for &$name {
            type Output = $name;
            fn mul(self, s: f64) -> $name {
                self.map(|a| a * s)
            }
        }
        impl Neg for &$name {
            type Output = $name;
            fn neg(self) -> $name {
                self.map(|a| -a)
            }
        }
    };
}

scalar_field!(CellField, cell_shape, "Values at cell centres.");
scalar_field!(VertexField, vertex_shape, "Values at cell corners.");

impl GridSpec {
    pub fn cell_shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }
}

impl CellField {
    pub fn from_fn(grid: &GridSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut out = Self::zeros(grid);
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let (x, y) = grid.cell_center(i, j);
                out.set(i, j, f(x, y));
            }
        }
        out
    }

    /// Value with periodic wrap or mirror ghosts.
    #[inline]
    pub fn at(&self, i: isize, j: isize) -> f64 {
        let g = &self.grid;
        let (ii, jj) = if g.periodic() {
            (wrap(i, g.nx), wrap(j, g.ny))
        } else {
            (i.clamp(0, g.nx as isize - 1) as usize, j.clamp(0, g.ny as isize - 1) as usize)
        };
        self.data[jj * g.nx + ii]
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.data.len() as f64
    }

    /// Shifts to zero mean (pressure gauge).
    pub fn demeaned(&self) -> Self {
        let m = self.mean();
        self.map(|x| x - m)
    }

    /// `ε² Σ x`.
    pub fn integral(&self) -> f64 {
        self.grid.eps * self.grid.eps * self.sum()
    }
}

impl VertexField {
    pub fn from_fn(grid: &GridSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut out = Self::zeros(grid);
        let (a, b) = grid.vertex_shape();
        for j in 0..b {
            for i in 0..a {
                let (x, y) = grid.vertex_position(i, j);
                out.set(i, j, f(x, y));
            }
        }
        out
    }

    /// Vertex value; wraps when periodic. Off-domain vertices read zero.
    #[inline]
    pub fn at(&self, i: isize, j: isize) -> f64 {
        let g = &self.grid;
        if g.periodic() {
            self.data[wrap(j, g.ny) * g.nx + wrap(i, g.nx)]
        } else if i < 0 || j < 0 || i > g.nx as isize || j > g.ny as isize {
            0.0
        } else {
            self.data[j as usize * (g.nx + 1) + i as usize]
        }
    }
}

/// Edge-sampled vector field: `u` on vertical edges, `v` on horizontal edges.
#[derive(Clone, Debug, PartialEq)]
pub struct StaggeredVectorField {
    pub grid: GridSpec,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl StaggeredVectorField {
    pub fn zeros(grid: &GridSpec) -> Self {
        let (a, b) = grid.u_shape();
        let (c, d) = grid.v_shape();
        Self { grid: *grid, u: vec![0.0; a * b], v: vec![0.0; c * d] }
    }

    pub fn from_data(grid: &GridSpec, u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        let (a, b) = grid.u_shape();
        let (c, d) = grid.v_shape();
        if u.len() != a * b || v.len() != c * d {
            return Err(GeovarError::ShapeMismatch(format!(
                "edge arrays need {} and {} values, got {} and {}",
                a * b,
                c * d,
                u.len(),
                v.len()
            )));
        }
        Ok(Self { grid: *grid, u, v })
    }

    /// Samples `(fu, fv)` at edge midpoints. Wall-normal edges are zeroed.
    pub fn from_fn(grid: &GridSpec, fu: impl Fn(f64, f64) -> f64, fv: impl Fn(f64, f64) -> f64) -> Self {
        let mut w = Self::zeros(grid);
        let (a, b) = grid.u_shape();
        for j in 0..b {
            for i in 0..a {
                let (x, y) = grid.u_position(i, j);
                w.u[j * a + i] = fu(x, y);
            }
        }
        let (c, d) = grid.v_shape();
        for j in 0..d {
            for i in 0..c {
                let (x, y) = grid.v_position(i, j);
                w.v[j * c + i] = fv(x, y);
            }
        }
        w.enforce_walls();
        w
    }

    pub fn uniform(grid: &GridSpec, cu: f64, cv: f64) -> Self {
        Self::from_fn(grid, |_, _| cu, |_, _| cv)
    }

    /// Zeroes wall-normal edges (no-op when periodic).
    pub fn enforce_walls(&mut self) {
        let g = self.grid;
        if g.periodic() {
            return;
        }
        let nu = g.nx + 1;
        for j in 0..g.ny {
            self.u[j * nu] = 0.0;
            self.u[j * nu + g.nx] = 0.0;
        }
        for i in 0..g.nx {
            self.v[i] = 0.0;
            self.v[g.ny * g.nx + i] = 0.0;
        }
    }

    #[inline]
    pub fn u_get(&self, i: usize, j: usize) -> f64 {
        self.u[j * self.grid.u_shape().0 + i]
    }
    #[inline]
    pub fn v_get(&self, i: usize, j: usize) -> f64 {
        self.v[j * self.grid.nx + i]
    }
    #[inline]
    pub fn u_set(&mut self, i: usize, j: usize, x: f64) {
        let n = self.grid.u_shape().0;
        self.u[j * n + i] = x;
    }
    #[inline]
    pub fn v_set(&mut self, i: usize, j: usize, x: f64) {
        let n = self.grid.nx;
        self.v[j * n + i] = x;
    }

    /// `u` at edge `(i, j+½)`: wraps when periodic, zero off the domain.
    #[inline]
    pub fn u_at(&self, i: isize, j: isize) -> f64 {
        let g = &self.grid;
        if g.periodic() {
            self.u[wrap(j, g.ny) * g.nx + wrap(i, g.nx)]
        } else if i < 0 || j < 0 || i > g.nx as isize || j >= g.ny as isize {
            0.0
        } else {
            self.u[j as usize * (g.nx + 1) + i as usize]
        }
    }

    /// `v` at edge `(i+½, j)`: wraps when periodic, zero off the domain.
    #[inline]
    pub fn v_at(&self, i: isize, j: isize) -> f64 {
        let g = &self.grid;
        if g.periodic() {
            self.v[wrap(j, g.ny) * g.nx + wrap(i, g.nx)]
        } else if i < 0 || j < 0 || i >= g.nx as isize || j > g.ny as isize {
            0.0
        } else {
            self.v[j as usize * g.nx + i as usize]
        }
    }

    /// Whether edge `(i, j+½)` is a wall.
    #[inline]
    pub fn u_is_wall(&self, i: usize) -> bool {
        !self.grid.periodic() && (i == 0 || i == self.grid.nx)
    }
    #[inline]
    pub fn v_is_wall(&self, j: usize) -> bool {
        !self.grid.periodic() && (j == 0 || j == self.grid.ny)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            u: self.u.iter().map(|&x| f(x)).collect(),
            v: self.v.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn zip_map(&self, o: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert!(self.grid.same_shape(&o.grid), "field grids differ");
        Self {
            grid: self.grid,
            u: self.u.iter().zip(&o.u).map(|(&a, &b)| f(a, b)).collect(),
            v: self.v.iter().zip(&o.v).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    /// `self + s·o` in place.
    pub fn axpy(&mut self, s: f64, o: &Self) {
        assert!(self.grid.same_shape(&o.grid), "field grids differ");
        for (a, b) in self.u.iter_mut().zip(&o.u) {
            *a += s * b;
        }
        for (a, b) in self.v.iter_mut().zip(&o.v) {
            *a += s * b;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.u.iter().chain(&self.v).fold(0.0, |m, &x| m.max(x.abs()))
    }

    /// Plain Euclidean dot product over all stored edges.
    pub fn dot(&self, o: &Self) -> f64 {
        self.u.iter().zip(&o.u).map(|(a, b)| a * b).sum::<f64>()
            + self.v.iter().zip(&o.v).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn norm2(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Number of stored edge values.
    pub fn len(&self) -> usize {
        self.u.len() + self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Add<&StaggeredVectorField> for &StaggeredVectorField {
    type Output = StaggeredVectorField;
    fn add(self, o: &StaggeredVectorField) -> StaggeredVectorField {
        self.zip_map(o, |a, b| a + b)
    }
}
impl Sub<&StaggeredVectorField> for &StaggeredVectorField {
    type Output = StaggeredVectorField;
    fn sub(self, o: &StaggeredVectorField) -> StaggeredVectorField {
        self.zip_map(o, |a, b| a - b)
    }
}
impl Mul<f64> for &StaggeredVectorField {
    type Output = StaggeredVectorField;
    fn mul(self, s: f64) -> StaggeredVectorField {
        self.map(|a| a * s)
    }
}
impl Neg for &StaggeredVectorField {
    type Output = StaggeredVectorField;
    fn neg(self) -> StaggeredVectorField {
        self.map(|a| -a)
    }
}
