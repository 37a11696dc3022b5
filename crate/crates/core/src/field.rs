//! Initial data `f` (displacement) and `h` (velocity) on `R^n`.

use std::fmt::Debug;
use std::sync::Arc;

/// Exponent below which a Gaussian is treated as exactly zero.
pub const GAUSSIAN_CUTOFF_EXPONENT: f64 = -40.0;

/// Radius, in units of σ, of the ball that contains a truncated Gaussian.
/// `sqrt(80) ≈ 8.94`, rounded up.
pub const GAUSSIAN_SUPPORT_SIGMAS: f64 = 9.0;

/// A closed ball in `R^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    /// Largest `|x|` over the ball.
    pub fn reach(&self) -> f64 {
        norm(&self.center) + self.radius
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// A scalar field on `R^n` with compact support.
///
/// The derivative methods default to centered differences with step
/// `length_scale() / 100`; implementations with closed forms override them.
pub trait InitialField: Send + Sync + Debug {
    fn value(&self, x: &[f64]) -> f64;

    /// A ball containing the support, or `None` for the zero field.
    fn support(&self) -> Option<Ball>;

    /// Smallest feature size; sets the finite-difference step.
    fn length_scale(&self) -> f64 {
        1.0
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        let h = self.length_scale() / 100.0;
        let mut y = x.to_vec();
        for (a, g) in out.iter_mut().enumerate() {
            y[a] = x[a] + h;
            let fp = self.value(&y);
            y[a] = x[a] - h;
            let fm = self.value(&y);
            y[a] = x[a];
            *g = (fp - fm) / (2.0 * h);
        }
    }

    fn laplacian(&self, x: &[f64]) -> f64 {
        let h = self.length_scale() / 100.0;
        let f0 = self.value(x);
        let mut y = x.to_vec();
        let mut acc = 0.0;
        for a in 0..x.len() {
            y[a] = x[a] + h;
            let fp = self.value(&y);
            y[a] = x[a] - h;
            let fm = self.value(&y);
            y[a] = x[a];
            acc += fp - 2.0 * f0 + fm;
        }
        acc / (h * h)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ZeroField;

impl InitialField for ZeroField {
    fn value(&self, _x: &[f64]) -> f64 {
        0.0
    }

    fn support(&self) -> Option<Ball> {
        None
    }

    fn gradient(&self, _x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
    }

    fn laplacian(&self, _x: &[f64]) -> f64 {
        0.0
    }
}

/// `A exp(-|x - μ|² / (2σ²))`, set to zero where the exponent drops below
/// [`GAUSSIAN_CUTOFF_EXPONENT`] so the support is genuinely compact.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianPulse {
    pub amplitude: f64,
    pub sigma: f64,
    pub center: Vec<f64>,
}

impl GaussianPulse {
    pub fn new(amplitude: f64, sigma: f64, center: Vec<f64>) -> Self {
        Self {
            amplitude,
            sigma,
            center,
        }
    }

    /// Returns `(exponent, x - μ)` or `None` past the cutoff.
    fn exponent(&self, x: &[f64]) -> Option<f64> {
        let r2: f64 = x
            .iter()
            .zip(&self.center)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let e = -r2 / (2.0 * self.sigma * self.sigma);
        (e >= GAUSSIAN_CUTOFF_EXPONENT).then_some(e)
    }
}

impl InitialField for GaussianPulse {
    fn value(&self, x: &[f64]) -> f64 {
        self.exponent(x)
            .map_or(0.0, |e| self.amplitude * e.exp())
    }

    fn support(&self) -> Option<Ball> {
        (self.amplitude != 0.0).then(|| Ball {
            center: self.center.clone(),
            radius: GAUSSIAN_SUPPORT_SIGMAS * self.sigma,
        })
    }

    fn length_scale(&self) -> f64 {
        self.sigma
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        let Some(e) = self.exponent(x) else {
            out.fill(0.0);
            return;
        };
        let f = self.amplitude * e.exp();
        let inv_s2 = 1.0 / (self.sigma * self.sigma);
        for ((g, xi), mi) in out.iter_mut().zip(x).zip(&self.center) {
            *g = -(xi - mi) * inv_s2 * f;
        }
    }

    fn laplacian(&self, x: &[f64]) -> f64 {
        let Some(e) = self.exponent(x) else {
            return 0.0;
        };
        let f = self.amplitude * e.exp();
        let s2 = self.sigma * self.sigma;
        let r2 = -2.0 * s2 * e;
        f * (r2 / (s2 * s2) - x.len() as f64 / s2)
    }
}

/// `inner(x - offset)`: the field translated by `offset`.
#[derive(Clone, Debug)]
pub struct Shifted {
    pub inner: Arc<dyn InitialField>,
    pub offset: Vec<f64>,
}

impl Shifted {
    fn local(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.offset).map(|(a, b)| a - b).collect()
    }
}

impl InitialField for Shifted {
    fn value(&self, x: &[f64]) -> f64 {
        self.inner.value(&self.local(x))
    }

    fn support(&self) -> Option<Ball> {
        self.inner.support().map(|b| Ball {
            center: b.center.iter().zip(&self.offset).map(|(c, o)| c + o).collect(),
            radius: b.radius,
        })
    }

    fn length_scale(&self) -> f64 {
        self.inner.length_scale()
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        self.inner.gradient(&self.local(x), out)
    }

    fn laplacian(&self, x: &[f64]) -> f64 {
        self.inner.laplacian(&self.local(x))
    }
}
