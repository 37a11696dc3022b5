//! Independent checks on the transformed pipeline: the 1-D closed form, a
//! brute-force solve on a truncated physical box, and the harnesses that
//! compare against them.
//!
//! Only the stencil kernel in [`crate::lattice`] is shared with the
//! transformed solver.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::InitialField;
use crate::frames::{FrameSet, LatticeGeometry};
use crate::kelvin::{size_grid, GridSpec, ProblemSpec};
use crate::lattice::{leapfrog_step, Lattice};
use crate::minkowski::SpacetimePoint;
use crate::query::{query_batch, query_point};
use crate::solver::{run_with, Seeding, SolverOptions};

/// Absolute tolerance of [`integrate`].
pub const QUADRATURE_TOLERANCE: f64 = 1e-10;

/// Adaptive Simpson quadrature of `g` over `[a, b]`.
pub fn integrate(g: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        g: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (g(lm), g(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(g, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + recurse(g, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let (fa, fm, fb) = (g(a), g(0.5 * (a + b)), g(b));
    let whole = simpson(fa, fm, fb, a, b);
    recurse(g, a, b, fa, fm, fb, whole, tol, 50)
}

/// `½[f(x - s) + f(x + s)] + ½ ∫_{x-s}^{x+s} h` with `s = t - t0`.
pub fn dalembert_exact(
    f: &dyn InitialField,
    h: &dyn InitialField,
    x: f64,
    t: f64,
    t0: f64,
) -> f64 {
    let s = t - t0;
    let wave = 0.5 * (f.value(&[x - s]) + f.value(&[x + s]));
    let (mut a, mut b) = (x - s, x + s);
    let Some(ball) = h.support() else {
        return wave;
    };
    a = a.max(ball.center[0] - ball.radius);
    b = b.min(ball.center[0] + ball.radius);
    if a >= b {
        return wave;
    }
    // Panels no wider than the feature size, so no bump hides between the
    // initial Simpson samples.
    let panels = ((b - a) / h.length_scale()).ceil().max(1.0) as usize;
    let width = (b - a) / panels as f64;
    let tol = QUADRATURE_TOLERANCE / panels as f64;
    let g = |y: f64| h.value(&[y]);
    let integral: f64 = (0..panels)
        .map(|i| {
            let lo = a + i as f64 * width;
            integrate(&g, lo, lo + width, tol)
        })
        .sum();
    wave + 0.5 * integral
}

/// Second-order centred d'Alembertian `Δu - u_tt` of `u` at `p`.
pub fn discrete_dalembertian(u: &dyn Fn(&SpacetimePoint) -> f64, p: &SpacetimePoint, h: f64) -> f64 {
    discrete_dalembertian_steps(u, p, h, h)
}

/// Same stencil with separate space and time steps. In one space dimension
/// equal steps make it exact for any `F(x − t) + H(x + t)`.
pub fn discrete_dalembertian_steps(
    u: &dyn Fn(&SpacetimePoint) -> f64,
    p: &SpacetimePoint,
    hx: f64,
    ht: f64,
) -> f64 {
    let center = u(p);
    let mut acc = 0.0;
    for a in 0..p.dim() {
        let mut hi = *p;
        let mut lo = *p;
        hi.space_mut()[a] += hx;
        lo.space_mut()[a] -= hx;
        acc += u(&hi) - 2.0 * center + u(&lo);
    }
    let mut later = *p;
    let mut earlier = *p;
    later.t += ht;
    earlier.t -= ht;
    acc / (hx * hx) - (u(&later) - 2.0 * center + u(&earlier)) / (ht * ht)
}

#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct ReferenceConfig {
    pub dx: f64,
    pub dt: f64,
    pub t_max: f64,
    /// Half-width of the box; defaults to the smallest reflection-free one,
    /// `x0 + 2 (t_max - t0)`.
    #[serde(default)]
    pub half_width: Option<f64>,
    /// Keep every `record_every`-th level.
    #[serde(default = "one")]
    pub record_every: usize,
    /// Skip levels before this time.
    #[serde(default)]
    pub record_from: Option<f64>,
}

fn one() -> usize {
    1
}

impl ReferenceConfig {
    pub fn new(dx: f64, dt: f64, t_max: f64) -> Self {
        Self {
            dx,
            dt,
            t_max,
            half_width: None,
            record_every: 1,
            record_from: None,
        }
    }
}

/// Leapfrog solution on `[-L, L]^n` with zero Dirichlet data on the box and
/// the obstacle. Node-centred with a node at the origin; times are physical
/// in the problem's normalized frame.
pub fn run_reference(spec: &ProblemSpec, cfg: &ReferenceConfig) -> Result<FrameSet> {
    let n = spec.n();
    let t0 = spec.t0();
    if !(cfg.t_max > t0 && cfg.t_max.is_finite()) {
        return Err(Error::InvalidSpec(format!(
            "reference end time {} must be finite and after t0 = {t0}",
            cfg.t_max
        )));
    }
    if !(cfg.dx > 0.0 && cfg.dt > 0.0) || cfg.record_every == 0 {
        return Err(Error::InvalidSpec(
            "reference steps and record interval must be positive".into(),
        ));
    }
    let needed = spec.x0() + 2.0 * (cfg.t_max - t0);
    let half_width = cfg.half_width.unwrap_or(needed);
    if half_width < needed * (1.0 - 1e-12) {
        return Err(Error::InvalidSpec(format!(
            "reference box half-width {half_width} is below the reflection-free bound {needed}"
        )));
    }
    let half_nodes = (half_width / cfg.dx - 1e-9).ceil() as usize;
    let dx = half_width / half_nodes as f64;
    let steps = ((cfg.t_max - t0) / cfg.dt - 1e-9).ceil() as usize;
    let dt = (cfg.t_max - t0) / steps as f64;
    let limit = 0.9 * dx / (n as f64).sqrt();
    if dt > limit * (1.0 + 1e-12) {
        return Err(Error::Cfl { dtau: dt, limit });
    }

    let geometry = LatticeGeometry::new(vec![2 * half_nodes + 1; n], vec![-half_width; n], dx);
    let lattice = geometry.lattice();
    let mut x = [0.0; 3];
    let blocked: Vec<bool> = (0..lattice.len())
        .map(|idx| {
            geometry.point(idx, &mut x);
            spec.obstacle().contains(&x[..n])
        })
        .collect();

    let (f, h) = (spec.f(), spec.h());
    let mut curr = vec![0.0; lattice.len()];
    let mut prev = vec![0.0; lattice.len()];
    for idx in 0..lattice.len() {
        if blocked[idx] {
            continue;
        }
        geometry.point(idx, &mut x);
        let p = &x[..n];
        let (f0, h0) = (f.value(p), h.value(p));
        curr[idx] = f0;
        prev[idx] =
            f0 - dt * h0 + 0.5 * dt * dt * f.laplacian(p) - dt * dt * dt / 6.0 * h.laplacian(p);
    }

    let record_from = cfg.record_from.unwrap_or(t0);
    let first = (((record_from - t0) / dt) - 1e-9).ceil().max(0.0) as usize;
    let mut frames = FrameSet::new(geometry);
    let lambda2 = (dt / dx).powi(2);
    let mut next = vec![0.0; lattice.len()];
    for k in 0..=steps {
        if k >= first && (k - first).is_multiple_of(cfg.record_every) {
            frames.push(t0 + k as f64 * dt, curr.clone());
        }
        if k == steps {
            break;
        }
        leapfrog_step(&lattice, &prev, &curr, &mut next, lambda2, |idx| blocked[idx]);
        std::mem::swap(&mut prev, &mut curr);
        std::mem::swap(&mut curr, &mut next);
        if let Some(bad) = curr.iter().find(|v| !v.is_finite() || v.abs() > 1e12) {
            return Err(Error::NumericBlowUp {
                step: k + 1,
                value: bad.abs(),
            });
        }
    }
    Ok(frames)
}

/// Points of a reference lattice used by [`compare`].
#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct ComparisonWindow {
    pub t_min: f64,
    pub t_max: f64,
    /// Keep lattice points with `|x| ≤ radius` (normalized frame).
    pub radius: f64,
    /// Use every `stride`-th node along each axis.
    #[serde(default = "one")]
    pub stride: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Residual {
    pub x: Vec<f64>,
    pub t: f64,
    pub kelvin: f64,
    pub reference: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub description: String,
    pub points: usize,
    pub l2_rel: f64,
    pub linf_rel: f64,
    pub kelvin_dxi: f64,
    /// Spacing of the stored levels, not the solver step.
    pub kelvin_frame_dtau: f64,
    pub reference_dx: f64,
    /// Spacing of the stored levels, not the solver step.
    pub reference_frame_dt: f64,
    pub residuals: Vec<Residual>,
}

/// Relative L2 and L∞ norms of `a - b` against `b`.
pub fn relative_errors(pairs: impl IntoIterator<Item = (f64, f64)>) -> (f64, f64) {
    let (mut num, mut den, mut worst, mut peak) = (0.0, 0.0, 0.0f64, 0.0f64);
    for (a, b) in pairs {
        num += (a - b) * (a - b);
        den += b * b;
        worst = worst.max((a - b).abs());
        peak = peak.max(b.abs());
    }
    if den == 0.0 {
        return if num == 0.0 { (0.0, 0.0) } else { (f64::INFINITY, f64::INFINITY) };
    }
    ((num / den).sqrt(), worst / peak)
}

/// Transformed solution against a physical-domain reference on the
/// reference's own lattice points inside `window`.
pub fn compare(
    frames: &FrameSet,
    spec: &ProblemSpec,
    reference: &FrameSet,
    window: &ComparisonWindow,
) -> ComparisonReport {
    let geom = &reference.geometry;
    let n = geom.ndim();
    let lattice = geom.lattice();
    let stride = window.stride.max(1);
    let shift = *spec.apex_shift();
    let mut points = Vec::new();
    let mut values = Vec::new();
    let mut ijk = [0usize; 3];
    let mut x = [0.0; 3];
    for (k, &t) in reference.times.iter().enumerate() {
        if t < window.t_min - 1e-12 || t > window.t_max + 1e-12 {
            continue;
        }
        for idx in 0..lattice.len() {
            lattice.unravel(idx, &mut ijk[..n]);
            if ijk[..n].iter().any(|i| i % stride != 0) {
                continue;
            }
            geom.point(idx, &mut x);
            if x[..n].iter().map(|v| v * v).sum::<f64>().sqrt() > window.radius {
                continue;
            }
            let normalized = SpacetimePoint::new(&x[..n], t);
            points.push(normalized.add(&shift.neg()));
            values.push(reference.values[k][idx]);
        }
    }
    let results = query_batch(frames, spec, &points);
    let (l2_rel, linf_rel) =
        relative_errors(results.iter().map(|r| r.value).zip(values.iter().copied()));
    let residuals = points
        .iter()
        .zip(results.iter().zip(&values))
        .map(|(p, (r, v))| Residual {
            x: p.space().to_vec(),
            t: p.t,
            kelvin: r.value,
            reference: *v,
        })
        .collect();
    ComparisonReport {
        description: format!(
            "{} reference lattice points, t in [{}, {}], |x| <= {}, stride {}",
            points.len(),
            window.t_min,
            window.t_max,
            window.radius,
            stride
        ),
        points: points.len(),
        l2_rel,
        linf_rel,
        kelvin_dxi: frames.geometry.spacing,
        kelvin_frame_dtau: frames.dt(),
        reference_dx: geom.spacing,
        reference_frame_dt: reference.dt(),
        residuals,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceLevel {
    pub delta: f64,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub levels: Vec<ConvergenceLevel>,
    /// Least-squares slope of `log error` against `log Δ`; `None` when an
    /// error is zero.
    pub order: Option<f64>,
    /// RMS residual of the fit in natural-log units.
    pub fit_residual: Option<f64>,
}

/// Fits `log e = p log Δ + b`. Returns `(p, rms residual)`.
pub fn fit_order(deltas: &[f64], errors: &[f64]) -> Option<(f64, f64)> {
    if deltas.len() < 2 || errors.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return None;
    }
    let xs: Vec<f64> = deltas.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let p = sxy / sxx;
    let b = my - p * mx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - p * x - b).powi(2)).sum();
    Some((p, (rss / k).sqrt()))
}

/// A refinement study. Level `l` uses `Δ / 2^l`.
#[derive(Clone, Debug)]
pub enum ConvergenceScenario {
    /// Solver only: `V = sin(πξ) cos(πτ)` on `[0, 1]` with Dirichlet ends,
    /// `base_cells` cells at level 0, Courant number 1/2, run to `τ = 1/2`.
    StandingWave { base_cells: usize },
    /// Full pipeline for `n = 1` against the closed form at fixed points.
    Dalembert {
        spec: ProblemSpec,
        base_points: usize,
        courant: f64,
        seeding: Seeding,
        queries: Vec<SpacetimePoint>,
    },
    /// Full pipeline against a reference refined in lockstep.
    Reference {
        spec: ProblemSpec,
        base_points: usize,
        courant: f64,
        reference: ReferenceConfig,
        window: ComparisonWindow,
    },
}

/// Grid with exactly `points` nodes per axis and the step count that keeps
/// `Δτ ≤ courant · Δξ`.
pub fn grid_with_points(spec: &ProblemSpec, points: usize, courant: f64) -> Result<GridSpec> {
    let probe = size_grid(spec.x0(), spec.t0(), 1.0, 1.0, spec.n())?;
    let dxi = (probe.xi0 + probe.tau0) / points as f64;
    let steps = (probe.tau0 / (courant * dxi) - 1e-9).ceil();
    size_grid(spec.x0(), spec.t0(), dxi, probe.tau0 / steps, spec.n())
}

pub fn convergence_study(scenario: &ConvergenceScenario, levels: usize) -> Result<ConvergenceReport> {
    if levels < 3 {
        return Err(Error::InvalidSpec("a convergence study needs at least 3 levels".into()));
    }
    let mut out = Vec::with_capacity(levels);
    for l in 0..levels {
        let scale = 1usize << l;
        let level = match scenario {
            ConvergenceScenario::StandingWave { base_cells } => {
                let cells = base_cells * scale;
                ConvergenceLevel {
                    delta: 1.0 / cells as f64,
                    error: standing_wave_error(cells),
                }
            }
            ConvergenceScenario::Dalembert {
                spec,
                base_points,
                courant,
                seeding,
                queries,
            } => {
                let gs = grid_with_points(spec, base_points * scale, *courant)?;
                let (frames, _) = run_with(
                    spec,
                    &gs,
                    SolverOptions {
                        seeding: *seeding,
                        stride: 1,
                    },
                )?;
                let pairs = queries.iter().map(|q| {
                    let p = spec.to_normalized(q);
                    let exact = dalembert_exact(spec.f(), spec.h(), p.space()[0], p.t, spec.t0());
                    (query_point(&frames, spec, q).value, exact)
                });
                ConvergenceLevel {
                    delta: gs.dxi,
                    error: relative_errors(pairs.collect::<Vec<_>>()).0,
                }
            }
            ConvergenceScenario::Reference {
                spec,
                base_points,
                courant,
                reference,
                window,
            } => {
                let gs = grid_with_points(spec, base_points * scale, *courant)?;
                let (frames, _) = run_with(spec, &gs, SolverOptions::default())?;
                let mut cfg = reference.clone();
                cfg.dx /= scale as f64;
                cfg.dt /= scale as f64;
                cfg.record_every *= scale;
                let reference = run_reference(spec, &cfg)?;
                let mut window = window.clone();
                window.stride *= scale;
                ConvergenceLevel {
                    delta: gs.dxi,
                    error: compare(&frames, spec, &reference, &window).l2_rel,
                }
            }
        };
        out.push(level);
    }
    let deltas: Vec<f64> = out.iter().map(|l| l.delta).collect();
    let errors: Vec<f64> = out.iter().map(|l| l.error).collect();
    let fit = fit_order(&deltas, &errors);
    Ok(ConvergenceReport {
        levels: out,
        order: fit.map(|f| f.0),
        fit_residual: fit.map(|f| f.1),
    })
}

fn standing_wave_error(cells: usize) -> f64 {
    use std::f64::consts::PI;
    let m = cells - 1;
    let h = 1.0 / cells as f64;
    let dt = 0.5 * h;
    let steps = cells;
    let lattice = Lattice::new(&[m]);
    let exact = |i: usize, t: f64| (PI * (i + 1) as f64 * h).sin() * (PI * t).cos();
    let mut prev: Vec<f64> = (0..m).map(|i| exact(i, -dt)).collect();
    let mut curr: Vec<f64> = (0..m).map(|i| exact(i, 0.0)).collect();
    let mut next = vec![0.0; m];
    for _ in 0..steps {
        leapfrog_step(&lattice, &prev, &curr, &mut next, 0.25, |_| false);
        std::mem::swap(&mut prev, &mut curr);
        std::mem::swap(&mut curr, &mut next);
    }
    (0..m)
        .map(|i| (curr[i] - exact(i, 0.5)).abs())
        .fold(0.0, f64::max)
}
