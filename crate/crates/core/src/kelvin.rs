//! The Minkowski–Kelvin transform applied to the infinite-domain initial
//! value problem.
//!
//! With `(ξ, τ) = Inv(x, t)` and `U = u ∘ Inv`, the weighted field
//!
//! ```text
//! V(ξ, τ) = U(ξ, τ) / G(ξ, τ),    G = | |ξ|² - τ² |^((n-1)/2)
//! ```
//!
//! again satisfies the plain wave equation, now on a *bounded* set. The
//! initial slice `t = t0` becomes the hyperboloid `τ / (|ξ|² - τ²) = t0`.
//! Everything here is a pure function; the time stepping lives in
//! [`crate::solver`].

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{norm, InitialField};
use crate::lattice::Lattice;
use crate::minkowski::{
    classify, inversion_conformal_factor, inversion_jacobian, invert, IntervalClass,
    MobiusMap, Primitive, SpacetimePoint, DEFAULT_CONE_TOLERANCE, MAX_DIM,
};
use crate::obstacle::ObstacleSpec;

/// The unbounded initial–boundary value problem.
///
/// All stored quantities are in the *normalized* frame in which the
/// causality cone of the solution has its apex at the origin and the
/// inversion is applied directly. A nonzero apex shift `(Δx, Δt)` maps
/// user coordinates to that frame by `(x, t) ↦ (x + Δx, t + Δt)`.
#[derive(Clone, Debug)]
pub struct ProblemSpec {
    n: usize,
    t0: f64,
    x0: f64,
    f: Arc<dyn InitialField>,
    h: Arc<dyn InitialField>,
    obstacle: ObstacleSpec,
    apex_shift: SpacetimePoint,
}

impl ProblemSpec {
    pub fn new(
        n: usize,
        t0: f64,
        x0: f64,
        f: Arc<dyn InitialField>,
        h: Arc<dyn InitialField>,
        obstacle: ObstacleSpec,
    ) -> Result<Self> {
        let spec = Self {
            n,
            t0,
            x0,
            f,
            h,
            obstacle,
            apex_shift: SpacetimePoint::on_axis(n.clamp(1, MAX_DIM), 0.0),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Like [`new`](Self::new) but with the data given in user coordinates
    /// that are translated by `shift` before inversion. `x0` bounds the
    /// support in the translated frame.
    pub fn with_apex_shift(
        n: usize,
        t0: f64,
        x0: f64,
        f: Arc<dyn InitialField>,
        h: Arc<dyn InitialField>,
        obstacle: ObstacleSpec,
        shift: SpacetimePoint,
    ) -> Result<Self> {
        if shift.dim() != n {
            return Err(Error::InvalidSpec(format!(
                "apex shift has dimension {}, expected {n}",
                shift.dim()
            )));
        }
        let offset = shift.space().to_vec();
        let moved = |g: Arc<dyn InitialField>| -> Arc<dyn InitialField> {
            if offset.iter().all(|v| *v == 0.0) {
                g
            } else {
                Arc::new(crate::field::Shifted {
                    inner: g,
                    offset: offset.clone(),
                })
            }
        };
        let spec = Self {
            n,
            t0: t0 + shift.t,
            x0,
            f: moved(f),
            h: moved(h),
            obstacle: obstacle.translated(&offset),
            apex_shift: shift,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        if !(1..=MAX_DIM).contains(&self.n) {
            return Err(Error::InvalidSpec(format!("n must be 1, 2 or 3, got {}", self.n)));
        }
        if !(self.x0 > 0.0) {
            return Err(Error::InvalidSpec(format!("x0 must be positive, got {}", self.x0)));
        }
        if !(self.t0 > self.x0) {
            return Err(Error::InvalidSpec(format!(
                "t0 > x0 required (t0 = {}, x0 = {})",
                self.t0, self.x0
            )));
        }
        for (name, field) in [("f", &self.f), ("h", &self.h)] {
            if let Some(ball) = field.support() {
                if ball.center.len() != self.n {
                    return Err(Error::InvalidSpec(format!(
                        "{name} is defined on R^{}, expected R^{}",
                        ball.center.len(),
                        self.n
                    )));
                }
                if !(ball.reach() < self.x0) {
                    return Err(Error::InvalidSpec(format!(
                        "support of {name} reaches |x| = {} but must stay below x0 = {}",
                        ball.reach(),
                        self.x0
                    )));
                }
            }
        }
        self.obstacle.validate(self.n, self.x0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Initial time in the normalized frame.
    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn f(&self) -> &dyn InitialField {
        self.f.as_ref()
    }

    pub fn h(&self) -> &dyn InitialField {
        self.h.as_ref()
    }

    pub fn obstacle(&self) -> &ObstacleSpec {
        &self.obstacle
    }

    pub fn apex_shift(&self) -> &SpacetimePoint {
        &self.apex_shift
    }

    /// `t0 - x0`: the support cone is `{|x| < t - (t0 - x0)}`.
    pub fn cone_offset(&self) -> f64 {
        self.t0 - self.x0
    }

    /// User coordinates to the normalized frame.
    pub fn to_normalized(&self, q: &SpacetimePoint) -> SpacetimePoint {
        q.add(&self.apex_shift)
    }

    /// The chart from user coordinates to the bounded `(ξ, τ)` domain.
    pub fn chart(&self) -> MobiusMap {
        MobiusMap::new(vec![
            Primitive::Translation(self.apex_shift),
            Primitive::Inversion,
        ])
        .expect("translation and inversion are always valid")
    }

    /// Whether a normalized point is inside the support cone.
    pub fn in_support_cone(&self, q: &SpacetimePoint) -> bool {
        norm(q.space()) < q.t - self.cone_offset()
    }

    /// Same problem with `f` and `h` multiplied by `alpha` (uses the
    /// normalized fields as-is).
    pub fn scaled_data(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        out.f = Arc::new(Scaled {
            inner: self.f.clone(),
            factor: alpha,
        });
        out.h = Arc::new(Scaled {
            inner: self.h.clone(),
            factor: alpha,
        });
        out
    }
}

#[derive(Debug)]
struct Scaled {
    inner: Arc<dyn InitialField>,
    factor: f64,
}

impl InitialField for Scaled {
    fn value(&self, x: &[f64]) -> f64 {
        self.factor * self.inner.value(x)
    }
    fn support(&self) -> Option<crate::field::Ball> {
        self.inner.support()
    }
    fn length_scale(&self) -> f64 {
        self.inner.length_scale()
    }
    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        self.inner.gradient(x, out);
        out.iter_mut().for_each(|g| *g *= self.factor);
    }
    fn laplacian(&self, x: &[f64]) -> f64 {
        self.factor * self.inner.laplacian(x)
    }
}

/// Kelvin weight `G = | |ξ|² - τ² |^((n-1)/2)`.
pub fn g_factor(p: &SpacetimePoint) -> Result<f64> {
    let phi = inversion_conformal_factor(p)?;
    Ok(weight_from_interval(p.interval().abs().max(1.0 / phi), p.dim()))
}

fn weight_from_interval(abs_s: f64, n: usize) -> f64 {
    match n {
        1 => 1.0,
        2 => abs_s.sqrt(),
        3 => abs_s,
        _ => abs_s.powf((n as f64 - 1.0) / 2.0),
    }
}

/// `∂G/∂τ = -(n-1) τ sgn(s) |s|^((n-3)/2)` with `s = |ξ|² - τ²`.
pub fn g_factor_dtau(p: &SpacetimePoint) -> Result<f64> {
    if classify(p, DEFAULT_CONE_TOLERANCE) == IntervalClass::Lightlike {
        return Err(Error::LightConeSingular {
            interval: p.interval(),
        });
    }
    let n = p.dim() as f64;
    let s = p.interval();
    Ok(-(n - 1.0) * p.t * s.signum() * s.abs().powf((n - 3.0) / 2.0))
}

/// Lower root `τ` of `t0 τ² + τ - t0 |ξ|² = 0`: the point of the initial
/// hyperboloid above `ξ`.
pub fn init_surface_tau(xi: &[f64], t0: f64) -> f64 {
    let r2: f64 = xi.iter().map(|v| v * v).sum();
    (-1.0 - (1.0 + 4.0 * t0 * t0 * r2).sqrt()) / (2.0 * t0)
}

/// `(V, ∂V/∂τ)` at a point `p` of the initial hyperboloid.
///
/// Returns `(0, 0)` when the physical image lies outside the support ball.
pub fn transform_initial_data(spec: &ProblemSpec, p: &SpacetimePoint) -> Result<(f64, f64)> {
    let q = invert(p)?;
    let x = q.space();
    if norm(x) >= spec.x0 {
        return Ok((0.0, 0.0));
    }
    let n = spec.n;
    let g = g_factor(p)?;
    let dg = g_factor_dtau(p)?;
    let jac = inversion_jacobian(p)?;

    let f = spec.f.value(x);
    let h = spec.h.value(x);
    let mut grad = [0.0; MAX_DIM];
    spec.f.gradient(x, &mut grad[..n]);

    // Inv is an involution, so the same Jacobian maps (ξ, τ) to (x, t).
    let dt_dtau = jac[(n, n)];
    let du_dtau = h * dt_dtau + (0..n).map(|i| grad[i] * jac[(i, n)]).sum::<f64>();

    Ok((f / g, du_dtau / g - f / (g * g) * dg))
}

/// `V` at `p` from the Cauchy–Kovalevskaya expansion in physical time,
/// `u(x, t0 + δ) ≈ f + δ h + δ²/2 Δf + δ³/6 Δh`. Accurate to `O(δ⁴)`
/// for points near the initial hyperboloid on either side of it.
pub fn cauchy_extension(spec: &ProblemSpec, p: &SpacetimePoint) -> Result<f64> {
    let q = invert(p)?;
    let x = q.space();
    if norm(x) >= spec.x0 {
        return Ok(0.0);
    }
    let d = q.t - spec.t0;
    let u = spec.f.value(x)
        + d * spec.h.value(x)
        + 0.5 * d * d * spec.f.laplacian(x)
        + d * d * d / 6.0 * spec.h.laplacian(x);
    Ok(u / g_factor(p)?)
}

/// `φ(p)^((n-1)/2) · u(Inv(p))`.
pub fn kelvin_transform_field(
    u: impl Fn(&SpacetimePoint) -> f64,
    p: &SpacetimePoint,
) -> Result<f64> {
    let phi = inversion_conformal_factor(p)?;
    let w = weight_from_interval(phi, p.dim());
    Ok(w * u(&invert(p)?))
}

/// Rectilinear discretization of the bounded domain.
///
/// Spatial nodes are cell-centred on `[-w, w]^n` with `w = (ξ0 + τ0)/2`, so
/// the grid is symmetric about the τ-axis and has `m = ⌈(ξ0 + τ0)/Δξ⌉`
/// points per axis. Levels run from `τ = -τ0` to `τ = 0` in
/// `N = ⌈τ0/Δτ⌉` steps. The effective steps (`dxi`, `dtau`) are the
/// requested ones shrunk so the lattice tiles the box exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub n: usize,
    pub xi0: f64,
    pub tau0: f64,
    pub dxi: f64,
    pub dtau: f64,
    pub requested_dxi: f64,
    pub requested_dtau: f64,
    /// Half-width `w` of the spatial box.
    pub xi_extent: f64,
    pub points_per_axis: usize,
    pub tau_start: f64,
    pub tau_end: f64,
    /// Total spatial points, `m^n`.
    pub m_total: usize,
    /// Number of time steps.
    pub steps: usize,
}

fn ceil_tol(v: f64) -> usize {
    (v - 1e-9 * v.abs().max(1.0)).ceil().max(1.0) as usize
}

pub fn size_grid(x0: f64, t0: f64, dxi: f64, dtau: f64, n: usize) -> Result<GridSpec> {
    if !(x0 > 0.0 && t0 > x0) {
        return Err(Error::InvalidSpec(format!(
            "t0 > x0 > 0 required (t0 = {t0}, x0 = {x0})"
        )));
    }
    if !(dxi > 0.0 && dtau > 0.0) {
        return Err(Error::InvalidSpec("dxi and dtau must be positive".into()));
    }
    if !(1..=MAX_DIM).contains(&n) {
        return Err(Error::InvalidSpec(format!("n must be 1, 2 or 3, got {n}")));
    }
    let denom = (x0 * x0 - t0 * t0).abs();
    let xi0 = x0 / denom;
    let tau0 = t0 / denom;
    let m = ceil_tol((xi0 + tau0) / dxi);
    let steps = ceil_tol(tau0 / dtau);
    let extent = 0.5 * (xi0 + tau0);
    Ok(GridSpec {
        n,
        xi0,
        tau0,
        dxi: 2.0 * extent / m as f64,
        dtau: tau0 / steps as f64,
        requested_dxi: dxi,
        requested_dtau: dtau,
        xi_extent: extent,
        points_per_axis: m,
        tau_start: -tau0,
        tau_end: 0.0,
        m_total: m.pow(n as u32),
        steps,
    })
}

impl GridSpec {
    /// Coordinate of node `i` along any axis.
    pub fn node_coord(&self, i: usize) -> f64 {
        -self.xi_extent + (i as f64 + 0.5) * self.dxi
    }

    /// `τ` of level `k`; exactly `0` at `k = N`.
    pub fn tau_at(&self, k: usize) -> f64 {
        self.tau0 * (k as f64 / self.steps as f64 - 1.0)
    }

    pub fn cfl_limit(&self) -> f64 {
        0.9 * self.dxi / (self.n as f64).sqrt()
    }

    pub fn check_cfl(&self) -> Result<()> {
        if self.dtau > self.cfl_limit() * (1.0 + 1e-12) {
            return Err(Error::Cfl {
                dtau: self.dtau,
                limit: self.cfl_limit(),
            });
        }
        Ok(())
    }

    pub fn lattice(&self) -> Lattice {
        Lattice::new(&vec![self.points_per_axis; self.n])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{GaussianPulse, ZeroField};

    fn pt(x: &[f64], t: f64) -> SpacetimePoint {
        SpacetimePoint::new(x, t)
    }

    #[test]
    fn g_factor_examples() {
        assert_eq!(g_factor(&pt(&[0.3], -0.7)).unwrap(), 1.0);
        assert!((g_factor(&pt(&[0.0, 0.0], -0.5)).unwrap() - 0.5).abs() < 1e-15);
        assert!((g_factor(&pt(&[0.0, 0.0, 0.0], -1.0)).unwrap() - 1.0).abs() < 1e-15);
        assert!(g_factor(&pt(&[0.5, 0.0], 0.5)).is_err());
    }

    #[test]
    fn g_factor_dtau_examples() {
        assert_eq!(g_factor_dtau(&pt(&[0.2], -0.9)).unwrap(), 0.0);
        assert!((g_factor_dtau(&pt(&[0.0, 0.0], -0.5)).unwrap() + 1.0).abs() < 1e-15);
        // sign follows τ inside the cone
        assert!(g_factor_dtau(&pt(&[0.1, 0.0], -0.5)).unwrap() < 0.0);
        assert!(g_factor_dtau(&pt(&[0.1, 0.0], 0.5)).unwrap() > 0.0);
    }

    #[test]
    fn g_factor_dtau_matches_central_differences() {
        for n in 1..=3 {
            for &(r, tau) in &[(0.1, -0.6), (0.3, -0.5), (0.05, -0.2), (0.9, -0.3)] {
                let mut x = vec![0.0; n];
                x[0] = r;
                let at = |dt: f64| g_factor(&pt(&x, tau + dt)).unwrap();
                let exact = g_factor_dtau(&pt(&x, tau)).unwrap();
                let err = |h: f64| ((at(h) - at(-h)) / (2.0 * h) - exact).abs();
                let (e1, e2) = (err(1e-3), err(5e-4));
                if e1 > 1e-9 {
                    let ratio = e1 / e2;
                    assert!((3.5..4.5).contains(&ratio), "n={n} r={r} ratio {ratio}");
                }
            }
        }
    }

    #[test]
    fn init_surface_examples() {
        assert!((init_surface_tau(&[0.0], 2.0) + 0.5).abs() < 1e-15);
        assert!((init_surface_tau(&[1.0 / 3.0, 0.0], 2.0) + 2.0 / 3.0).abs() < 1e-15);
        for &r in &[0.0, 0.1, 0.25, 0.4, 0.5] {
            let xi = [r * 0.6, r * 0.8];
            let tau = init_surface_tau(&xi, 2.0);
            let back = invert(&pt(&xi, tau)).unwrap();
            assert!((back.t - 2.0).abs() < 1e-12 * 2.0);
        }
    }

    fn gaussian_spec() -> ProblemSpec {
        ProblemSpec::new(
            2,
            2.0,
            1.0,
            Arc::new(GaussianPulse::new(1.0, 0.1, vec![0.0, 0.0])),
            Arc::new(ZeroField),
            ObstacleSpec::None,
        )
        .unwrap()
    }

    #[test]
    fn initial_data_at_center() {
        let spec = gaussian_spec();
        let (v, dv) = transform_initial_data(&spec, &pt(&[0.0, 0.0], -0.5)).unwrap();
        assert!((v - 2.0).abs() < 1e-14);
        assert!((dv - 4.0).abs() < 1e-13);
    }

    #[test]
    fn initial_data_vanishes_outside_support() {
        let spec = gaussian_spec();
        let xi = [0.34, 0.0];
        let p = pt(&xi, init_surface_tau(&xi, 2.0));
        assert!(norm(invert(&p).unwrap().space()) >= 1.0);
        assert_eq!(transform_initial_data(&spec, &p).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn initial_slope_matches_finite_difference_of_cauchy_extension() {
        // V(τ) near the surface from the physical-time expansion; its τ slope
        // at the surface must equal the chain-rule value.
        let spec = ProblemSpec::new(
            2,
            2.0,
            1.0,
            Arc::new(GaussianPulse::new(1.0, 0.1, vec![0.05, -0.02])),
            Arc::new(GaussianPulse::new(0.7, 0.08, vec![-0.1, 0.0])),
            ObstacleSpec::None,
        )
        .unwrap();
        let xi = [0.02, 0.01];
        let tau = init_surface_tau(&xi, 2.0);
        let (v, dv) = transform_initial_data(&spec, &pt(&xi, tau)).unwrap();
        let ext = |d: f64| cauchy_extension(&spec, &pt(&xi, tau + d)).unwrap();
        assert!((ext(0.0) - v).abs() < 1e-12 * v.abs().max(1.0));
        let h = 1e-5;
        let fd = (ext(h) - ext(-h)) / (2.0 * h);
        assert!((fd - dv).abs() < 1e-5 * dv.abs().max(1.0), "{fd} vs {dv}");
    }

    #[test]
    fn kelvin_transform_examples() {
        let u = |q: &SpacetimePoint| q.space()[0] + 2.0 * q.t;
        let p = pt(&[0.2], -0.7);
        let q = invert(&p).unwrap();
        assert_eq!(kelvin_transform_field(u, &p).unwrap(), u(&q));
        let one = kelvin_transform_field(|_| 1.0, &pt(&[0.0, 0.0], -0.5)).unwrap();
        assert!((one - 2.0).abs() < 1e-15);
    }

    #[test]
    fn size_grid_reference_example() {
        let g = size_grid(1.0, 2.0, 1.0 / 30.0, 1.0 / 60.0, 2).unwrap();
        assert!((g.xi0 - 1.0 / 3.0).abs() < 1e-15);
        assert!((g.tau0 - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(g.points_per_axis, 30);
        assert_eq!(g.m_total, 900);
        assert_eq!(g.steps, 40);
        assert_eq!(g.tau_at(40), 0.0);
        assert_eq!(g.tau_at(0), -g.tau0);
        // symmetric about the τ-axis
        assert!((g.node_coord(0) + g.node_coord(29)).abs() < 1e-15);
    }

    #[test]
    fn size_grid_rejects_bad_input() {
        assert!(matches!(size_grid(2.0, 2.0, 0.1, 0.1, 2), Err(Error::InvalidSpec(_))));
        assert!(size_grid(1.0, 2.0, 0.0, 0.1, 2).is_err());
    }

    #[test]
    fn halving_dxi_scales_m_by_two_to_the_n() {
        for n in 1..=3 {
            let a = size_grid(1.0, 2.0, 1.0 / 20.0, 0.01, n).unwrap();
            let b = size_grid(1.0, 2.0, 1.0 / 40.0, 0.01, n).unwrap();
            assert_eq!(b.m_total, a.m_total * (1 << n));
        }
    }

    #[test]
    fn problem_validation() {
        let g = || -> Arc<dyn InitialField> { Arc::new(GaussianPulse::new(1.0, 0.1, vec![0.0])) };
        let z = || -> Arc<dyn InitialField> { Arc::new(ZeroField) };
        assert!(ProblemSpec::new(1, 1.0, 1.0, g(), z(), ObstacleSpec::None).is_err());
        // support 0.9 does not fit inside x0 = 0.8
        assert!(ProblemSpec::new(1, 2.0, 0.8, g(), z(), ObstacleSpec::None).is_err());
        // shifting time makes t0 > x0 hold
        let shifted = ProblemSpec::with_apex_shift(
            1,
            0.5,
            1.0,
            g(),
            z(),
            ObstacleSpec::None,
            pt(&[0.0], 1.0),
        )
        .unwrap();
        assert_eq!(shifted.t0(), 1.5);
    }
}
