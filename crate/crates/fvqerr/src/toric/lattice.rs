//! The N x M torus lattice: edge indexing, stars, plaquettes, basic cycles,
//! stabilizer and logical operators, and shortest torus paths.
//!
//! Vertices sit at (row r, col c) with periodic wraparound; horizontal edge
//! h(r, c) joins (r, c)-(r, c+1) and vertical edge v(r, c) joins
//! (r, c)-(r+1, c). Edge indices: h(r, c) = r M + c, v(r, c) = N M + r M + c,
//! for 2 N M edge qubits in total.

use serde::{Deserialize, Serialize};

use super::pauli::PauliString;
use crate::error::{FvError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusLattice {
    pub rows: usize,
    pub cols: usize,
}

/// The six logical operators generated by the torus-winding strings.
#[derive(Debug, Clone)]
pub struct Logicals {
    pub s1x: PauliString,
    pub s1z: PauliString,
    pub s1y: PauliString,
    pub s2x: PauliString,
    pub s2z: PauliString,
    pub s2y: PauliString,
}

impl TorusLattice {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows < 2 || cols < 2 {
            return Err(FvError::InvalidParameter(
                "torus needs at least 2 rows and 2 cols".into(),
            ));
        }
        if 2 * rows * cols > 64 {
            return Err(FvError::InvalidParameter(format!(
                "{} edges exceed the 64-qubit packing",
                2 * rows * cols
            )));
        }
        Ok(Self { rows, cols })
    }

    pub fn n_vertices(&self) -> usize {
        self.rows * self.cols
    }

    pub fn n_plaquettes(&self) -> usize {
        self.rows * self.cols
    }

    pub fn n_edges(&self) -> usize {
        2 * self.rows * self.cols
    }

    pub fn h_edge(&self, r: usize, c: usize) -> usize {
        (r % self.rows) * self.cols + (c % self.cols)
    }

    pub fn v_edge(&self, r: usize, c: usize) -> usize {
        self.rows * self.cols + (r % self.rows) * self.cols + (c % self.cols)
    }

    /// Edges meeting vertex (r, c): east, west, south, north.
    pub fn star_mask(&self, r: usize, c: usize) -> u64 {
        let mut m = 0u64;
        m |= 1 << self.h_edge(r, c);
        m |= 1 << self.h_edge(r, c + self.cols - 1);
        m |= 1 << self.v_edge(r, c);
        m |= 1 << self.v_edge(r + self.rows - 1, c);
        m
    }

    /// Edges bounding the plaquette with top-left vertex (r, c).
    pub fn plaquette_mask(&self, r: usize, c: usize) -> u64 {
        let mut m = 0u64;
        m |= 1 << self.h_edge(r, c);
        m |= 1 << self.h_edge(r + 1, c);
        m |= 1 << self.v_edge(r, c);
        m |= 1 << self.v_edge(r, c + 1);
        m
    }

    /// The two vertices joined by an edge.
    pub fn edge_vertices(&self, edge: usize) -> ((usize, usize), (usize, usize)) {
        let nm = self.rows * self.cols;
        if edge < nm {
            let (r, c) = (edge / self.cols, edge % self.cols);
            ((r, c), (r, (c + 1) % self.cols))
        } else {
            let e = edge - nm;
            let (r, c) = (e / self.cols, e % self.cols);
            ((r, c), ((r + 1) % self.rows, c))
        }
    }

    /// The two plaquettes containing an edge.
    pub fn edge_plaquettes(&self, edge: usize) -> ((usize, usize), (usize, usize)) {
        let nm = self.rows * self.cols;
        if edge < nm {
            // h(r, c) is the top of p(r, c) and the bottom of p(r-1, c)
            let (r, c) = (edge / self.cols, edge % self.cols);
            (((r + self.rows - 1) % self.rows, c), (r, c))
        } else {
            // v(r, c) is the left of p(r, c) and the right of p(r, c-1)
            let e = edge - nm;
            let (r, c) = (e / self.cols, e % self.cols);
            ((r, (c + self.cols - 1) % self.cols), (r, c))
        }
    }

    /// Vertex stabilizer A_s: X on the star of (r, c).
    pub fn vertex_stabilizer(&self, r: usize, c: usize) -> PauliString {
        PauliString::x_string(self.n_edges(), self.star_mask(r, c)).unwrap()
    }

    /// Plaquette stabilizer B_p: Z on the boundary of p(r, c).
    pub fn plaquette_stabilizer(&self, r: usize, c: usize) -> PauliString {
        PauliString::z_string(self.n_edges(), self.plaquette_mask(r, c)).unwrap()
    }

    /// All vertex and plaquette stabilizers, row-major.
    pub fn build_stabilizers(&self) -> (Vec<PauliString>, Vec<PauliString>) {
        let mut a = Vec::with_capacity(self.n_vertices());
        let mut b = Vec::with_capacity(self.n_plaquettes());
        for r in 0..self.rows {
            for c in 0..self.cols {
                a.push(self.vertex_stabilizer(r, c));
                b.push(self.plaquette_stabilizer(r, c));
            }
        }
        (a, b)
    }

    /// Basic cycle C1: horizontal edges along row 0 (winds in c).
    pub fn cycle_c1(&self) -> u64 {
        (0..self.cols).fold(0u64, |m, c| m | 1 << self.h_edge(0, c))
    }

    /// Basic cycle C2: vertical edges along column 0 (winds in r).
    pub fn cycle_c2(&self) -> u64 {
        (0..self.rows).fold(0u64, |m, r| m | 1 << self.v_edge(r, 0))
    }

    /// Dual cycle C1': vertical edges along dual row 0 (winds in c).
    pub fn cycle_c1_dual(&self) -> u64 {
        (0..self.cols).fold(0u64, |m, c| m | 1 << self.v_edge(0, c))
    }

    /// Dual cycle C2': horizontal edges along dual column 0 (winds in r).
    pub fn cycle_c2_dual(&self) -> u64 {
        (0..self.rows).fold(0u64, |m, r| m | 1 << self.h_edge(r, 0))
    }

    /// X-type logicals live on the dual cycles (even overlap with every
    /// plaquette boundary), Z-type logicals on the vertex-lattice cycles
    /// (even overlap with every star); s_y = i s_z s_x.
    pub fn build_logicals(&self) -> Logicals {
        let n = self.n_edges();
        let s1x = PauliString::x_string(n, self.cycle_c2_dual()).unwrap();
        let s1z = PauliString::z_string(n, self.cycle_c1()).unwrap();
        let s2x = PauliString::x_string(n, self.cycle_c1_dual()).unwrap();
        let s2z = PauliString::z_string(n, self.cycle_c2()).unwrap();
        let mut s1y = s1z.mul(&s1x);
        s1y.phase = (s1y.phase + 1) % 4;
        let mut s2y = s2z.mul(&s2x);
        s2y.phase = (s2y.phase + 1) % 4;
        Logicals {
            s1x,
            s1z,
            s1y,
            s2x,
            s2z,
            s2y,
        }
    }

    /// Minimal wrapped displacement candidates from a to b on a ring of size
    /// `len`: one entry, or two when the separation is exactly half the ring.
    fn ring_steps(len: usize, a: usize, b: usize) -> Vec<i64> {
        let fwd = ((b + len - a) % len) as i64;
        let bwd = fwd - len as i64;
        if fwd == 0 {
            vec![0]
        } else if 2 * fwd == len as i64 {
            vec![fwd, bwd]
        } else if fwd < -bwd {
            vec![fwd]
        } else {
            vec![bwd]
        }
    }

    /// All minimal staircase Z-strings joining two defect vertices: one per
    /// minimal wrapped direction combination.
    pub fn minimal_vertex_paths(
        &self,
        from: (usize, usize),
        to: (usize, usize),
    ) -> Vec<u64> {
        let drs = Self::ring_steps(self.rows, from.0, to.0);
        let dcs = Self::ring_steps(self.cols, from.1, to.1);
        let mut out = Vec::new();
        for &dr in &drs {
            for &dc in &dcs {
                let mut mask = 0u64;
                let (mut r, c) = (from.0 as i64, from.1 as i64);
                for _ in 0..dr.abs() {
                    let step_row = if dr > 0 { r } else { r - 1 };
                    mask |= 1 << self.v_edge(
                        step_row.rem_euclid(self.rows as i64) as usize,
                        c.rem_euclid(self.cols as i64) as usize,
                    );
                    r += dr.signum();
                }
                let mut cc = c;
                for _ in 0..dc.abs() {
                    let step_col = if dc > 0 { cc } else { cc - 1 };
                    mask |= 1 << self.h_edge(
                        r.rem_euclid(self.rows as i64) as usize,
                        step_col.rem_euclid(self.cols as i64) as usize,
                    );
                    cc += dc.signum();
                }
                out.push(mask);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// All minimal staircase X-strings (paths on the dual lattice) joining two
    /// defect plaquettes.
    pub fn minimal_plaquette_paths(
        &self,
        from: (usize, usize),
        to: (usize, usize),
    ) -> Vec<u64> {
        let drs = Self::ring_steps(self.rows, from.0, to.0);
        let dcs = Self::ring_steps(self.cols, from.1, to.1);
        let mut out = Vec::new();
        for &dr in &drs {
            for &dc in &dcs {
                let mut mask = 0u64;
                let (mut r, c) = (from.0 as i64, from.1 as i64);
                for _ in 0..dr.abs() {
                    // p(r, c) <-> p(r+1, c) share h(r+1, c)
                    let cross_row = if dr > 0 { r + 1 } else { r };
                    mask |= 1 << self.h_edge(
                        cross_row.rem_euclid(self.rows as i64) as usize,
                        c.rem_euclid(self.cols as i64) as usize,
                    );
                    r += dr.signum();
                }
                let mut cc = c;
                for _ in 0..dc.abs() {
                    // p(r, c) <-> p(r, c+1) share v(r, c+1)
                    let cross_col = if dc > 0 { cc + 1 } else { cc };
                    mask |= 1 << self.v_edge(
                        r.rem_euclid(self.rows as i64) as usize,
                        cross_col.rem_euclid(self.cols as i64) as usize,
                    );
                    cc += dc.signum();
                }
                out.push(mask);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Whether a closed Z-type (vertex-lattice) cycle acts trivially on the
    /// code space: even intersection with both logical-X supports.
    pub fn z_cycle_is_trivial(&self, mask: u64) -> bool {
        (mask & self.cycle_c2_dual()).count_ones() & 1 == 0
            && (mask & self.cycle_c1_dual()).count_ones() & 1 == 0
    }

    /// Whether a closed X-type (dual) cycle acts trivially on the code space:
    /// even intersection with both logical-Z supports.
    pub fn x_cycle_is_trivial(&self, mask: u64) -> bool {
        (mask & self.cycle_c1()).count_ones() & 1 == 0
            && (mask & self.cycle_c2()).count_ones() & 1 == 0
    }
}
