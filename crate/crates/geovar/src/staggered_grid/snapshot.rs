//! Grid snapshot files.
//!
//! ```text
//! GEOVAR1 <kind> <nx> <ny> <eps> <boundary>
//! <name> <cols> <rows> v0 v1 ...        (one line per component)
//! ```
//!
//! Values are row-major with `x` fastest. Components come in the order
//! `u, v, Bx, By`, then cell fields sorted by name ignoring case. In binary
//! mode each component line stops after `<rows>` and is followed by
//! `cols·rows` little-endian `f64` values.

use std::io::{BufRead, Write};

use super::{Boundary, GridSpec};
use crate::{GeovarError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    pub name: String,
    pub cols: usize,
    pub rows: usize,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub kind: String,
    pub grid: GridSpec,
    pub components: Vec<Component>,
}

fn rank(name: &str) -> (usize, String) {
    let lead = ["u", "v", "Bx", "By"].iter().position(|n| *n == name).unwrap_or(4);
    (lead, name.to_ascii_lowercase())
}

impl Snapshot {
    pub fn new(kind: &str, grid: GridSpec) -> Self {
        Self { kind: kind.to_string(), grid, components: Vec::new() }
    }

    /// Adds a component and keeps the documented order.
    pub fn push(&mut self, name: &str, (cols, rows): (usize, usize), values: &[f64]) {
        assert_eq!(cols * rows, values.len(), "component {name} has the wrong length");
        self.components.push(Component { name: name.to_string(), cols, rows, values: values.to_vec() });
        self.components.sort_by_key(|c| rank(&c.name));
    }

    pub fn get(&self, name: &str) -> Option<&Component> {
        self.components.iter().find(|c| c.name == name)
    }

    fn header(&self) -> String {
        let g = &self.grid;
        format!("GEOVAR1 {} {} {} {} {}\n", self.kind, g.nx, g.ny, g.eps, g.boundary.name())
    }

    pub fn write_text(&self, w: &mut impl Write) -> std::io::Result<()> {
        w.write_all(self.header().as_bytes())?;
        for c in &self.components {
            write!(w, "{} {} {}", c.name, c.cols, c.rows)?;
            for x in &c.values {
                write!(w, " {x:e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn write_binary(&self, w: &mut impl Write) -> std::io::Result<()> {
        w.write_all(self.header().as_bytes())?;
        for c in &self.components {
            writeln!(w, "{} {} {}", c.name, c.cols, c.rows)?;
            for x in &c.values {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        Ok(())
    }

    /// Reads either encoding; the payload kind is detected per component.
    pub fn read(r: &mut impl BufRead) -> Result<Self> {
        let bad = |m: &str| GeovarError::ShapeMismatch(format!("bad snapshot: {m}"));
        let mut line = String::new();
        r.read_line(&mut line).map_err(|e| bad(&e.to_string()))?;
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 6 || f[0] != "GEOVAR1" {
            return Err(bad("header"));
        }
        let nx = f[2].parse().map_err(|_| bad("nx"))?;
        let ny = f[3].parse().map_err(|_| bad("ny"))?;
        let eps = f[4].parse().map_err(|_| bad("eps"))?;
        let boundary = Boundary::parse(f[5]).ok_or_else(|| bad("boundary"))?;
        let mut snap = Snapshot::new(f[1], GridSpec::new(nx, ny, eps, boundary)?);
        loop {
            let mut line = String::new();
            if r.read_line(&mut line).map_err(|e| bad(&e.to_string()))? == 0 {
                break;
            }
            let mut it = line.split_whitespace();
            let Some(name) = it.next() else { continue };
            let cols: usize = it.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad("cols"))?;
            let rows: usize = it.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad("rows"))?;
            let text: Vec<f64> = it.map(|s| s.parse().map_err(|_| bad("value"))).collect::<Result<_>>()?;
            let values = if text.is_empty() && cols * rows > 0 {
                let mut buf = vec![0u8; 8 * cols * rows];
                r.read_exact(&mut buf).map_err(|e| bad(&e.to_string()))?;
                buf.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().unwrap())).collect()
            } else {
                text
            };
            if values.len() != cols * rows {
                return Err(bad(&format!("component {name} length")));
            }
            snap.components.push(Component { name: name.to_string(), cols, rows, values });
        }
        Ok(snap)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_and_binary_payload() {
        let g = GridSpec::new(3, 3, 0.5, Boundary::Periodic).unwrap();
        let mut s = Snapshot::new("mhd", g);
        s.push("omega", (3, 3), &[1.5; 9]);
        s.push("Bx", (3, 3), &[0.1; 9]);
        s.push("alpha", (3, 3), &[-2.0; 9]);
        s.push("u", (3, 3), &[0.3; 9]);
        let names: Vec<_> = s.components.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, ["u", "Bx", "alpha", "omega"]);
        let mut bytes = Vec::new();
        s.write_binary(&mut bytes).unwrap();
        assert!(bytes.starts_with(b"GEOVAR1 mhd 3 3 0.5 periodic\n"));
        assert_eq!(Snapshot::read(&mut bytes.as_slice()).unwrap(), s);
    }
}
