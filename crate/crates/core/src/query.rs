//! Reconstruction of `u(x, t) = G(ξ, τ) · V(ξ, τ)` at physical points.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frames::{FrameSet, LatticeGeometry};
use crate::kelvin::{g_factor, ProblemSpec};
use crate::minkowski::{invert, SpacetimePoint, DEFAULT_CONE_TOLERANCE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    InsideSupportCone,
    /// Outside `{|x| < t - (t0 - x0)}`; the solution is 0 there.
    OutsideSupportCone,
    /// `t < t0`; reported as 0.
    PreInitial,
    /// Numerically on the light cone through the apex, where the inversion
    /// is undefined.
    NearLightCone,
    /// Inside the Dirichlet obstacle after `t0`.
    InsideObstacle,
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct QueryResult {
    pub value: f64,
    pub region: Region,
}

impl QueryResult {
    fn zero(region: Region) -> Self {
        Self { value: 0.0, region }
    }
}

/// `V` at a point of the bounded domain, `p = (ξ, τ)`.
pub fn interpolate(frames: &FrameSet, p: &SpacetimePoint) -> Result<f64> {
    frames.interpolate(p.space(), p.t)
}

/// `u` at a physical point given in user coordinates.
pub fn query_point(frames: &FrameSet, spec: &ProblemSpec, q: &SpacetimePoint) -> QueryResult {
    let p = spec.to_normalized(q);
    if p.t < spec.t0() {
        return QueryResult::zero(Region::PreInitial);
    }
    if !spec.in_support_cone(&p) {
        return QueryResult::zero(Region::OutsideSupportCone);
    }
    let s = p.interval();
    if s.abs() <= DEFAULT_CONE_TOLERANCE * p.t * p.t {
        return QueryResult::zero(Region::NearLightCone);
    }
    if spec.obstacle().contains(p.space()) {
        return QueryResult::zero(Region::InsideObstacle);
    }
    let image = match invert(&p) {
        Ok(image) => image,
        Err(_) => return QueryResult::zero(Region::NearLightCone),
    };
    // Only cells hugging the support-cone image fall off the node hull,
    // and V vanishes there.
    let v = match interpolate(frames, &image) {
        Ok(v) => v,
        Err(Error::OutOfGrid) => 0.0,
        Err(_) => unreachable!("interpolation only fails with OutOfGrid"),
    };
    let g = g_factor(&image).expect("timelike points are off the light cone");
    QueryResult {
        value: g * v,
        region: Region::InsideSupportCone,
    }
}

/// [`query_point`] over many points, in input order.
pub fn query_batch(
    frames: &FrameSet,
    spec: &ProblemSpec,
    points: &[SpacetimePoint],
) -> Vec<QueryResult> {
    points
        .par_iter()
        .map(|q| query_point(frames, spec, q))
        .collect()
}

/// `u(·, t)` sampled on a regular physical-space window, row-major.
pub fn query_frame(
    frames: &FrameSet,
    spec: &ProblemSpec,
    t: f64,
    window: &LatticeGeometry,
) -> Vec<f64> {
    let n = window.ndim();
    let mut out = vec![0.0; window.len()];
    window.lattice().par_rows(&mut out, |first, _, row| {
        let mut x = [0.0; 3];
        for (j, slot) in row.iter_mut().enumerate() {
            window.point(first + j, &mut x);
            *slot = query_point(frames, spec, &SpacetimePoint::new(&x[..n], t)).value;
        }
    });
    out
}

/// Radius of the physical solution's support at time `t`.
pub fn support_radius(spec: &ProblemSpec, t: f64) -> f64 {
    (t - spec.cone_offset()).max(0.0)
}
