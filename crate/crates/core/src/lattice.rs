//! Row-major index arithmetic and the leapfrog kernel.
//!
//! Values outside the lattice are taken to be zero, so every box is a
//! homogeneous Dirichlet box.

use rayon::prelude::*;

/// A rectilinear index space; the last axis varies fastest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lattice {
    dims: Vec<usize>,
    strides: Vec<usize>,
    len: usize,
}

impl Lattice {
    pub fn new(dims: &[usize]) -> Self {
        assert!(!dims.is_empty(), "lattice needs at least one axis");
        let mut strides = vec![1; dims.len()];
        for a in (0..dims.len() - 1).rev() {
            strides[a] = strides[a + 1] * dims[a + 1];
        }
        Self {
            dims: dims.to_vec(),
            strides,
            len: dims.iter().product(),
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn row_len(&self) -> usize {
        self.dims[self.dims.len() - 1]
    }

    pub fn index(&self, ijk: &[usize]) -> usize {
        ijk.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn unravel(&self, mut idx: usize, out: &mut [usize]) {
        for (a, s) in self.strides.iter().enumerate() {
            out[a] = idx / s;
            idx %= s;
        }
    }

    /// `Σ_a (u[+e_a] - 2u + u[-e_a])` at `idx`, with zeros beyond the edges.
    #[inline]
    pub fn second_difference(&self, u: &[f64], idx: usize, ijk: &[usize]) -> f64 {
        let c = u[idx];
        let mut acc = 0.0;
        for (a, (&i, &s)) in ijk.iter().zip(&self.strides).enumerate() {
            let lo = if i > 0 { u[idx - s] } else { 0.0 };
            let hi = if i + 1 < self.dims[a] { u[idx + s] } else { 0.0 };
            acc += lo - 2.0 * c + hi;
        }
        acc
    }

    /// Runs `body(first_index, row_prefix, row)` over every row of `out` in
    /// parallel. `row_prefix` holds the multi-index of the row minus its
    /// last component. Each row is written by exactly one worker, so results
    /// do not depend on the pool size.
    pub fn par_rows<T, F>(&self, out: &mut [T], body: F)
    where
        T: Send,
        F: Fn(usize, &[usize], &mut [T]) + Sync,
    {
        assert_eq!(out.len(), self.len);
        let row = self.row_len();
        out.par_chunks_mut(row).enumerate().for_each(|(r, chunk)| {
            let first = r * row;
            let mut ijk = [0usize; 3];
            self.unravel(first, &mut ijk[..self.ndim()]);
            body(first, &ijk[..self.ndim() - 1], chunk);
        });
    }
}

/// One leapfrog update for `u_tt = Δu`, with `lap` the undivided second
/// difference and `lambda2 = (Δt/Δx)²`.
#[inline]
pub fn leapfrog(curr: f64, prev: f64, lap: f64, lambda2: f64) -> f64 {
    2.0 * curr - prev + lambda2 * lap
}

/// Advances a Dirichlet box one step. Nodes with `fixed(idx)` true are held
/// at zero.
pub fn leapfrog_step(
    lattice: &Lattice,
    prev: &[f64],
    curr: &[f64],
    next: &mut [f64],
    lambda2: f64,
    fixed: impl Fn(usize) -> bool + Sync,
) {
    let n = lattice.ndim();
    lattice.par_rows(next, |first, prefix, row| {
        let mut ijk = [0usize; 3];
        ijk[..n - 1].copy_from_slice(prefix);
        for (j, out) in row.iter_mut().enumerate() {
            let idx = first + j;
            ijk[n - 1] = j;
            *out = if fixed(idx) {
                0.0
            } else {
                let lap = lattice.second_difference(curr, idx, &ijk[..n]);
                leapfrog(curr[idx], prev[idx], lap, lambda2)
            };
        }
    });
}

/// Leapfrog energy of two consecutive levels,
/// `½ hⁿ Σ [ ((c - p)/Δt)² + ½ Σ_a ((D⁺c)² + (D⁺p)²) ]`,
/// where the forward differences include the edges to the zero halo.
/// Summed sequentially so the value is reproducible.
pub fn leapfrog_energy(lattice: &Lattice, prev: &[f64], curr: &[f64], h: f64, dt: f64) -> f64 {
    let n = lattice.ndim();
    let mut kinetic = 0.0;
    let mut potential = 0.0;
    let mut ijk = [0usize; 3];
    for idx in 0..lattice.len() {
        let v = (curr[idx] - prev[idx]) / dt;
        kinetic += v * v;
        lattice.unravel(idx, &mut ijk[..n]);
        for a in 0..n {
            let s = lattice.strides()[a];
            let (c_hi, p_hi) = if ijk[a] + 1 < lattice.dims()[a] {
                (curr[idx + s], prev[idx + s])
            } else {
                (0.0, 0.0)
            };
            let dc = (c_hi - curr[idx]) / h;
            let dp = (p_hi - prev[idx]) / h;
            potential += 0.5 * (dc * dc + dp * dp);
            if ijk[a] == 0 {
                // edge to the low-side halo
                let dc = curr[idx] / h;
                let dp = prev[idx] / h;
                potential += 0.5 * (dc * dc + dp * dp);
            }
        }
    }
    0.5 * h.powi(n as i32) * (kinetic + potential)
}
