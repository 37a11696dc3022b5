//! Exact geometry of Minkowski spacetime `R^{n,1}`.
//!
//! Coordinates are ordered `(x_1, ..., x_n, t)` with the propagation speed
//! normalized to one. The metric has signature `(+, ..., +, -)`:
//!
//! ```text
//! η((u, a), (v, b)) = <u, v> - a b
//! ```
//!
//! The central object is the Minkowski inversion
//!
//! ```text
//! Inv(x, t) = (x, t) / (|x|² - t²)
//! ```
//!
//! which is an involution, conformal with factor `|1 / (|x|² - t²)|`, and
//! singular on the light cone `|x|² = t²`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Largest supported spatial dimension.
pub const MAX_DIM: usize = 3;

/// Relative tolerance used to decide that a point is on the light cone.
pub const DEFAULT_CONE_TOLERANCE: f64 = 1e-9;

/// An event `(x, t)` in `R^{n,1}`, `n ∈ {1, 2, 3}`.
///
/// Also used for spacetime displacement vectors, and for points of the
/// bounded `(ξ, τ)` chart, which share the same representation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpacetimePoint {
    x: [f64; MAX_DIM],
    n: usize,
    pub t: f64,
}

impl SpacetimePoint {
    /// Panics if `x` is empty or longer than [`MAX_DIM`].
    pub fn new(x: &[f64], t: f64) -> Self {
        assert!(
            (1..=MAX_DIM).contains(&x.len()),
            "spatial dimension must be 1, 2 or 3 (got {})",
            x.len()
        );
        let mut coords = [0.0; MAX_DIM];
        coords[..x.len()].copy_from_slice(x);
        Self {
            x: coords,
            n: x.len(),
            t,
        }
    }

    /// The point `(0, ..., 0, t)` in `n` spatial dimensions.
    pub fn on_axis(n: usize, t: f64) -> Self {
        Self::new(&[0.0; MAX_DIM][..n], t)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn space(&self) -> &[f64] {
        &self.x[..self.n]
    }

    pub fn space_mut(&mut self) -> &mut [f64] {
        &mut self.x[..self.n]
    }

    /// Squared Euclidean norm of the spatial part.
    pub fn space_norm2(&self) -> f64 {
        self.space().iter().map(|v| v * v).sum()
    }

    /// `|x|² - t²`, the Minkowski square of the position vector.
    pub fn interval(&self) -> f64 {
        self.space_norm2() - self.t * self.t
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.space().iter().all(|v| v.is_finite())
    }

    /// Coordinates as a flat slice-like vector `(x_1, ..., x_n, t)`.
    pub fn coords(&self) -> Vec<f64> {
        let mut v = self.space().to_vec();
        v.push(self.t);
        v
    }

    /// Inverse of [`coords`](Self::coords).
    pub fn from_coords(c: &[f64]) -> Self {
        let (t, x) = c.split_last().expect("at least one spatial coordinate");
        Self::new(x, *t)
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = *self;
        out.space_mut().iter_mut().for_each(|v| *v *= s);
        out.t *= s;
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let mut out = *self;
        for (a, b) in out.space_mut().iter_mut().zip(other.space()) {
            *a += b;
        }
        out.t += other.t;
        out
    }

    pub fn neg(&self) -> Self {
        self.scaled(-1.0)
    }
}

/// `η(u, v) = <u_space, v_space> - u_t v_t`.
pub fn minkowski_inner(u: &SpacetimePoint, v: &SpacetimePoint) -> f64 {
    assert_eq!(u.dim(), v.dim(), "dimension mismatch");
    let spatial: f64 = u.space().iter().zip(v.space()).map(|(a, b)| a * b).sum();
    spatial - u.t * v.t
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntervalClass {
    Timelike,
    Spacelike,
    Lightlike,
}

/// Classifies the position vector of `p`. A point is lightlike when
/// `| |x|² - t² | ≤ tol · (|x|² + t²)`; the origin is lightlike.
pub fn classify(p: &SpacetimePoint, tol: f64) -> IntervalClass {
    let r2 = p.space_norm2();
    let t2 = p.t * p.t;
    let s = r2 - t2;
    if s.abs() <= tol * (r2 + t2) {
        IntervalClass::Lightlike
    } else if s < 0.0 {
        IntervalClass::Timelike
    } else {
        IntervalClass::Spacelike
    }
}

fn checked_interval(p: &SpacetimePoint) -> Result<f64> {
    if classify(p, DEFAULT_CONE_TOLERANCE) == IntervalClass::Lightlike {
        return Err(Error::LightConeSingular {
            interval: p.interval(),
        });
    }
    Ok(p.interval())
}

/// The Minkowski inversion `(x, t) ↦ (x, t) / (|x|² - t²)`.
pub fn invert(p: &SpacetimePoint) -> Result<SpacetimePoint> {
    let s = checked_interval(p)?;
    Ok(p.scaled(1.0 / s))
}

/// Conformal factor of the inversion, `|1 / (|x|² - t²)|`.
pub fn inversion_conformal_factor(p: &SpacetimePoint) -> Result<f64> {
    Ok(1.0 / checked_interval(p)?.abs())
}

/// Jacobian of the inversion at `p`, rows and columns ordered `(x_1, ..., x_n, t)`.
///
/// Differentiating `y / s(y)` with `s = η(y, y)` gives
/// `J = (1/s) (I - (2/s) y (η y)ᵀ)`. The prefactor is the *signed* `1/s`;
/// only its square enters the pullback identity `Jᵀ η J = φ² η`.
pub fn inversion_jacobian(p: &SpacetimePoint) -> Result<DMatrix<f64>> {
    let s = checked_interval(p)?;
    let y = p.coords();
    let dim = y.len();
    let mut eta_y = y.clone();
    eta_y[dim - 1] = -eta_y[dim - 1];
    Ok(DMatrix::from_fn(dim, dim, |a, b| {
        let delta = if a == b { 1.0 } else { 0.0 };
        (delta - 2.0 * y[a] * eta_y[b] / s) / s
    }))
}

/// The Minkowski metric matrix `diag(1, ..., 1, -1)` of size `n + 1`.
pub fn metric(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n + 1, n + 1, |a, b| match (a == b, a == n) {
        (true, true) => -1.0,
        (true, false) => 1.0,
        _ => 0.0,
    })
}

/// Generators of the Möbius group acting on `R^{n,1}`.
#[derive(Clone, Debug, PartialEq)]
pub enum Primitive {
    Translation(SpacetimePoint),
    /// `(x, t) ↦ (s x, s t)`, `s > 0`.
    Scaling(f64),
    /// Lorentz boost mixing spatial `axis` with time.
    Boost { axis: usize, rapidity: f64 },
    Inversion,
}

impl Primitive {
    fn validate(&self) -> Result<()> {
        match self {
            Primitive::Scaling(s) if !(*s > 0.0 && s.is_finite()) => Err(Error::InvalidSpec(
                format!("scaling factor must be positive and finite, got {s}"),
            )),
            Primitive::Translation(d) if !d.is_finite() => Err(Error::InvalidSpec(
                "translation must be finite".into(),
            )),
            Primitive::Boost { rapidity, .. } if !rapidity.is_finite() => Err(
                Error::InvalidSpec("boost rapidity must be finite".into()),
            ),
            _ => Ok(()),
        }
    }

    /// Image of `p` together with the conformal factor at `p`.
    pub fn apply_with_factor(&self, p: &SpacetimePoint) -> Result<(SpacetimePoint, f64)> {
        match self {
            Primitive::Translation(d) => {
                if d.dim() != p.dim() {
                    return Err(Error::InvalidSpec(format!(
                        "translation has dimension {} but point has {}",
                        d.dim(),
                        p.dim()
                    )));
                }
                Ok((p.add(d), 1.0))
            }
            Primitive::Scaling(s) => Ok((p.scaled(*s), *s)),
            Primitive::Boost { axis, rapidity } => {
                if *axis >= p.dim() {
                    return Err(Error::InvalidSpec(format!(
                        "boost axis {axis} out of range for n = {}",
                        p.dim()
                    )));
                }
                let (sh, ch) = (rapidity.sinh(), rapidity.cosh());
                let mut out = *p;
                let x = p.space()[*axis];
                out.space_mut()[*axis] = ch * x - sh * p.t;
                out.t = ch * p.t - sh * x;
                Ok((out, 1.0))
            }
            Primitive::Inversion => {
                let s = checked_interval(p)?;
                Ok((p.scaled(1.0 / s), 1.0 / s.abs()))
            }
        }
    }
}

/// A finite composition of Möbius generators, applied first to last.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MobiusMap {
    steps: Vec<Primitive>,
}

impl MobiusMap {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn new(steps: Vec<Primitive>) -> Result<Self> {
        steps.iter().try_for_each(Primitive::validate)?;
        Ok(Self { steps })
    }

    /// Appends `step` so that it is applied after the existing chain.
    pub fn then(mut self, step: Primitive) -> Result<Self> {
        step.validate()?;
        self.steps.push(step);
        Ok(self)
    }

    pub fn steps(&self) -> &[Primitive] {
        &self.steps
    }

    /// Image of `p` and the accumulated conformal factor.
    ///
    /// Factors compose as `φ_{B∘A}(p) = φ_B(A(p)) · φ_A(p)`.
    pub fn apply_with_factor(&self, p: &SpacetimePoint) -> Result<(SpacetimePoint, f64)> {
        self.steps.iter().try_fold((*p, 1.0), |(q, phi), step| {
            let (next, f) = step.apply_with_factor(&q)?;
            Ok((next, phi * f))
        })
    }

    pub fn apply(&self, p: &SpacetimePoint) -> Result<SpacetimePoint> {
        self.apply_with_factor(p).map(|(q, _)| q)
    }

    pub fn conformal_factor(&self, p: &SpacetimePoint) -> Result<f64> {
        self.apply_with_factor(p).map(|(_, f)| f)
    }
}

pub fn apply_map(m: &MobiusMap, p: &SpacetimePoint) -> Result<SpacetimePoint> {
    m.apply(p)
}

pub fn map_conformal_factor(m: &MobiusMap, p: &SpacetimePoint) -> Result<f64> {
    m.conformal_factor(p)
}

/// The open future cone `{ |x - p0|² < (t - a0)², t > a0 }`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CausalityCone {
    pub apex: SpacetimePoint,
}

impl CausalityCone {
    pub fn new(apex: SpacetimePoint) -> Self {
        Self { apex }
    }

    pub fn contains(&self, p: &SpacetimePoint) -> bool {
        let dt = p.t - self.apex.t;
        let dx2: f64 = p
            .space()
            .iter()
            .zip(self.apex.space())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        dt > 0.0 && dx2 < dt * dt
    }
}

pub fn cone_contains(c: &CausalityCone, p: &SpacetimePoint) -> bool {
    c.contains(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;
    use proptest::prelude::*;

    fn p1(x: f64, t: f64) -> SpacetimePoint {
        SpacetimePoint::new(&[x], t)
    }

    #[test]
    fn inner_product_examples() {
        assert_eq!(minkowski_inner(&p1(1.0, 0.0), &p1(1.0, 0.0)), 1.0);
        assert_eq!(minkowski_inner(&p1(0.0, 1.0), &p1(0.0, 1.0)), -1.0);
        let u = SpacetimePoint::new(&[1.0, 1.0], 1.0);
        let v = SpacetimePoint::new(&[1.0, -1.0], 2.0);
        assert_eq!(minkowski_inner(&u, &v), -2.0);
    }

    #[test]
    fn inversion_examples() {
        let q = invert(&p1(1.0, 2.0)).unwrap();
        assert!((q.space()[0] + 1.0 / 3.0).abs() < 1e-15);
        assert!((q.t + 2.0 / 3.0).abs() < 1e-15);

        let q = invert(&SpacetimePoint::new(&[0.0, 0.0], 2.0)).unwrap();
        assert_eq!(q.space(), &[0.0, 0.0]);
        assert_eq!(q.t, -0.5);

        assert!(matches!(
            invert(&p1(1.0, 1.0)),
            Err(Error::LightConeSingular { .. })
        ));
        assert!(invert(&SpacetimePoint::on_axis(2, 0.0)).is_err());
    }

    #[test]
    fn conformal_factor_examples() {
        assert!((inversion_conformal_factor(&p1(1.0, 2.0)).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let f = inversion_conformal_factor(&SpacetimePoint::new(&[0.0, 0.0], 2.0)).unwrap();
        assert_eq!(f, 0.25);
        assert_eq!(inversion_conformal_factor(&p1(0.0, 1.0)).unwrap(), 1.0);
    }

    #[test]
    fn jacobian_at_unit_timelike_point() {
        let j = inversion_jacobian(&p1(0.0, 1.0)).unwrap();
        assert_eq!(j, DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]));
        // ∂(ξ, τ)/∂t column
        let col = j * DVector::from_vec(vec![0.0, 1.0]);
        assert_eq!(col.as_slice(), &[0.0, 1.0]);
    }

    fn fd_jacobian(p: &SpacetimePoint, h: f64) -> DMatrix<f64> {
        let c = p.coords();
        let d = c.len();
        DMatrix::from_fn(d, d, |a, b| {
            let mut plus = c.clone();
            let mut minus = c.clone();
            plus[b] += h;
            minus[b] -= h;
            let fp = invert(&SpacetimePoint::from_coords(&plus)).unwrap().coords();
            let fm = invert(&SpacetimePoint::from_coords(&minus)).unwrap().coords();
            (fp[a] - fm[a]) / (2.0 * h)
        })
    }

    #[test]
    fn jacobian_matches_central_differences_at_second_order() {
        let p = SpacetimePoint::new(&[0.3, -0.2], 1.1);
        let exact = inversion_jacobian(&p).unwrap();
        let e1 = (fd_jacobian(&p, 1e-2) - &exact).amax();
        let e2 = (fd_jacobian(&p, 5e-3) - &exact).amax();
        let ratio = e1 / e2;
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn map_examples() {
        let p = p1(1.0, 3.0);
        assert_eq!(MobiusMap::identity().apply(&p).unwrap(), p);
        assert_eq!(MobiusMap::identity().conformal_factor(&p).unwrap(), 1.0);

        let d = p1(0.7, -0.4);
        let back = MobiusMap::new(vec![
            Primitive::Translation(d),
            Primitive::Translation(d.neg()),
        ])
        .unwrap();
        let q = back.apply(&p).unwrap();
        assert!((q.space()[0] - 1.0).abs() < 1e-15 && (q.t - 3.0).abs() < 1e-15);

        let s = MobiusMap::new(vec![Primitive::Scaling(2.0)]).unwrap();
        assert_eq!(s.apply(&p).unwrap(), p1(2.0, 6.0));

        let si = MobiusMap::new(vec![Primitive::Scaling(2.0), Primitive::Inversion]).unwrap();
        assert!((si.conformal_factor(&p).unwrap() - 1.0 / 16.0).abs() < 1e-16);

        let ii = MobiusMap::new(vec![Primitive::Inversion, Primitive::Inversion]).unwrap();
        assert!((ii.conformal_factor(&p).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn invalid_primitives_rejected() {
        assert!(MobiusMap::new(vec![Primitive::Scaling(0.0)]).is_err());
        assert!(MobiusMap::new(vec![Primitive::Scaling(-1.0)]).is_err());
        let boost = MobiusMap::new(vec![Primitive::Boost {
            axis: 1,
            rapidity: 0.2,
        }])
        .unwrap();
        assert!(boost.apply(&p1(0.0, 1.0)).is_err());
    }

    #[test]
    fn inversion_on_light_cone_propagates_through_chain() {
        let m = MobiusMap::new(vec![Primitive::Scaling(3.0), Primitive::Inversion]).unwrap();
        assert!(matches!(
            m.apply(&p1(2.0, -2.0)),
            Err(Error::LightConeSingular { .. })
        ));
    }

    #[test]
    fn cone_examples() {
        let origin = CausalityCone::new(p1(0.0, 0.0));
        assert!(cone_contains(&origin, &p1(0.0, 1.0)));
        assert!(!cone_contains(&origin, &p1(2.0, 1.0)));
        let shifted = CausalityCone::new(p1(0.0, -1.0));
        assert!(cone_contains(&shifted, &p1(0.5, -0.4)));
        // strict: the cone surface itself is excluded
        assert!(!cone_contains(&origin, &p1(1.0, 1.0)));
    }

    #[test]
    fn classification() {
        assert_eq!(classify(&p1(0.0, 1.0), 1e-9), IntervalClass::Timelike);
        assert_eq!(classify(&p1(2.0, 1.0), 1e-9), IntervalClass::Spacelike);
        assert_eq!(classify(&p1(1.0, -1.0), 1e-9), IntervalClass::Lightlike);
        assert_eq!(classify(&p1(1.0, 1.0 + 1e-12), 1e-9), IntervalClass::Lightlike);
    }

    fn point(n: usize) -> impl Strategy<Value = SpacetimePoint> {
        (prop::collection::vec(-3.0..3.0f64, n), -3.0..3.0f64)
            .prop_map(|(x, t)| SpacetimePoint::new(&x, t))
    }

    proptest! {
        #[test]
        fn boost_preserves_inner(p in point(2), q in point(2), axis in 0usize..2, r in -2.0..2.0f64) {
            let b = Primitive::Boost { axis, rapidity: r };
            let (bp, _) = b.apply_with_factor(&p).unwrap();
            let (bq, _) = b.apply_with_factor(&q).unwrap();
            let before = minkowski_inner(&p, &q);
            let after = minkowski_inner(&bp, &bq);
            let scale = 1.0 + p.coords().iter().chain(q.coords().iter()).map(|v| v * v).sum::<f64>() * (2.0 * r.abs()).exp();
            prop_assert!((after - before).abs() <= 1e-12 * scale);
        }

        #[test]
        fn jacobian_pullback_identity(p in point(3), u in point(3), v in point(3)) {
            prop_assume!(p.interval().abs() > 1e-2);
            let j = inversion_jacobian(&p).unwrap();
            let phi = inversion_conformal_factor(&p).unwrap();
            let ju = SpacetimePoint::from_coords((&j * DVector::from_vec(u.coords())).as_slice());
            let jv = SpacetimePoint::from_coords((&j * DVector::from_vec(v.coords())).as_slice());
            let lhs = minkowski_inner(&ju, &jv);
            let rhs = phi * phi * minkowski_inner(&u, &v);
            prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()) * phi * phi);
        }
    }
}
