//! Stored solution history on a uniform lattice, with multilinear
//! interpolation in space and time.

use crate::error::{Error, Result};
use crate::lattice::Lattice;

/// Node positions `origin[a] + i · spacing` on every axis.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeGeometry {
    pub dims: Vec<usize>,
    pub origin: Vec<f64>,
    pub spacing: f64,
}

impl LatticeGeometry {
    pub fn new(dims: Vec<usize>, origin: Vec<f64>, spacing: f64) -> Self {
        assert_eq!(dims.len(), origin.len());
        Self {
            dims,
            origin,
            spacing,
        }
    }

    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn lattice(&self) -> Lattice {
        Lattice::new(&self.dims)
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.origin[axis] + i as f64 * self.spacing
    }

    /// Coordinates of node `idx`.
    pub fn point(&self, idx: usize, out: &mut [f64]) {
        let lattice = self.lattice();
        let mut ijk = [0usize; 3];
        lattice.unravel(idx, &mut ijk[..self.ndim()]);
        for a in 0..self.ndim() {
            out[a] = self.coord(a, ijk[a]);
        }
    }
}

/// Levels `times[k] = times[0] + k · dt`, each a full spatial array.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameSet {
    pub geometry: LatticeGeometry,
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

// Fractions this close to an integer snap to it, so points that should
// sit on a node pick up no rounding from the neighbours.
const SNAP: f64 = 1e-9;

fn locate(x: f64, lo: f64, h: f64, count: usize) -> Option<(usize, f64)> {
    let u = (x - lo) / h;
    let last = (count - 1) as f64;
    if !(u >= -SNAP && u <= last + SNAP) {
        return None;
    }
    let u = u.clamp(0.0, last);
    let near = u.round();
    let u = if (u - near).abs() < SNAP { near } else { u };
    if count == 1 {
        return Some((0, 0.0));
    }
    let i = (u.floor() as usize).min(count - 2);
    Some((i, u - i as f64))
}

impl FrameSet {
    pub fn new(geometry: LatticeGeometry) -> Self {
        Self {
            geometry,
            times: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn push(&mut self, time: f64, values: Vec<f64>) {
        assert_eq!(values.len(), self.geometry.len());
        debug_assert!(self.times.last().is_none_or(|&t| t < time));
        self.times.push(time);
        self.values.push(values);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Uniform level spacing; zero for a single frame.
    pub fn dt(&self) -> f64 {
        match self.times.len() {
            0 | 1 => 0.0,
            k => (self.times[k - 1] - self.times[0]) / (k - 1) as f64,
        }
    }

    /// Multilinear value at spatial point `x` and time `t`. Exact at nodes.
    pub fn interpolate(&self, x: &[f64], t: f64) -> Result<f64> {
        let g = &self.geometry;
        let n = g.ndim();
        if x.len() != n || self.times.is_empty() {
            return Err(Error::OutOfGrid);
        }
        let (k, wt) = if self.times.len() == 1 {
            if (t - self.times[0]).abs() > SNAP * self.times[0].abs().max(1.0) {
                return Err(Error::OutOfGrid);
            }
            (0, 0.0)
        } else {
            locate(t, self.times[0], self.dt(), self.times.len()).ok_or(Error::OutOfGrid)?
        };
        let mut base = [0usize; 3];
        let mut frac = [0.0; 3];
        for a in 0..n {
            let (i, w) = locate(x[a], g.origin[a], g.spacing, g.dims[a]).ok_or(Error::OutOfGrid)?;
            base[a] = i;
            frac[a] = w;
        }
        let at = |frame: &[f64]| spatial(g, frame, &base[..n], &frac[..n]);
        let v0 = at(&self.values[k]);
        if wt == 0.0 {
            return Ok(v0);
        }
        Ok((1.0 - wt) * v0 + wt * at(&self.values[k + 1]))
    }
}

fn spatial(g: &LatticeGeometry, frame: &[f64], base: &[usize], frac: &[f64]) -> f64 {
    let n = base.len();
    let lattice_strides = {
        let mut s = [1usize; 3];
        for a in (0..n - 1).rev() {
            s[a] = s[a + 1] * g.dims[a + 1];
        }
        s
    };
    let mut acc = 0.0;
    for corner in 0..(1usize << n) {
        let mut w = 1.0;
        let mut idx = 0;
        for a in 0..n {
            let up = (corner >> a) & 1 == 1;
            let f = frac[a];
            if up {
                if f == 0.0 {
                    w = 0.0;
                    break;
                }
                w *= f;
                idx += (base[a] + 1) * lattice_strides[a];
            } else {
                w *= 1.0 - f;
                idx += base[a] * lattice_strides[a];
            }
        }
        if w != 0.0 {
            acc += w * frame[idx];
        }
    }
    acc
}
