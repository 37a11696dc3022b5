//! Obstacle geometry in physical space. The boundary condition is always
//! homogeneous Dirichlet (`u = 0`), which the inversion carries over to
//! `V = 0` on the image of the obstacle world-tube.

use crate::error::{Error, Result};
use crate::field::norm;

#[derive(Clone, Debug, Default, PartialEq)]
pub enum ObstacleSpec {
    #[default]
    None,
    /// Open ball (disk for `n = 2`).
    Disk { center: Vec<f64>, radius: f64 },
    /// Simple polygon, `n = 2` only. Vertices in order, not repeated.
    Polygon { vertices: Vec<[f64; 2]> },
}

impl ObstacleSpec {
    pub fn is_none(&self) -> bool {
        matches!(self, ObstacleSpec::None)
    }

    /// Strict interior test.
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            ObstacleSpec::None => false,
            ObstacleSpec::Disk { center, radius } => {
                let d2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                d2 < radius * radius
            }
            ObstacleSpec::Polygon { vertices } => point_in_polygon(vertices, [x[0], x[1]]),
        }
    }

    /// Upper bound on `|x|` over the obstacle; zero when there is none.
    pub fn reach(&self) -> f64 {
        match self {
            ObstacleSpec::None => 0.0,
            ObstacleSpec::Disk { center, radius } => norm(center) + radius,
            ObstacleSpec::Polygon { vertices } => vertices
                .iter()
                .map(|v| v[0].hypot(v[1]))
                .fold(0.0, f64::max),
        }
    }

    pub fn translated(&self, offset: &[f64]) -> Self {
        match self {
            ObstacleSpec::None => ObstacleSpec::None,
            ObstacleSpec::Disk { center, radius } => ObstacleSpec::Disk {
                center: center.iter().zip(offset).map(|(c, o)| c + o).collect(),
                radius: *radius,
            },
            ObstacleSpec::Polygon { vertices } => ObstacleSpec::Polygon {
                vertices: vertices
                    .iter()
                    .map(|v| [v[0] + offset[0], v[1] + offset[1]])
                    .collect(),
            },
        }
    }

    /// Checks dimensionality, simplicity and containment in `{|x| < x0}`.
    pub fn validate(&self, n: usize, x0: f64) -> Result<()> {
        match self {
            ObstacleSpec::None => return Ok(()),
            ObstacleSpec::Disk { center, radius } => {
                if center.len() != n {
                    return Err(Error::InvalidSpec(format!(
                        "disk center has {} coordinates, expected {n}",
                        center.len()
                    )));
                }
                if !(*radius > 0.0) {
                    return Err(Error::InvalidSpec("disk radius must be positive".into()));
                }
            }
            ObstacleSpec::Polygon { vertices } => {
                if n != 2 {
                    return Err(Error::InvalidSpec("polygon obstacles require n = 2".into()));
                }
                if vertices.len() < 3 {
                    return Err(Error::InvalidSpec("polygon needs at least 3 vertices".into()));
                }
                if !is_simple(vertices) {
                    return Err(Error::InvalidSpec("polygon is self-intersecting".into()));
                }
            }
        }
        if !(self.reach() < x0) {
            return Err(Error::InvalidSpec(format!(
                "obstacle must lie strictly inside |x| < x0 = {x0} (reaches {})",
                self.reach()
            )));
        }
        Ok(())
    }
}

fn point_in_polygon(vs: &[[f64; 2]], p: [f64; 2]) -> bool {
    let mut inside = false;
    let mut j = vs.len() - 1;
    for i in 0..vs.len() {
        let (a, b) = (vs[i], vs[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x_cross = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < x_cross {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn on_segment(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> bool {
    p[0] >= a[0].min(b[0])
        && p[0] <= a[0].max(b[0])
        && p[1] >= a[1].min(b[1])
        && p[1] <= a[1].max(b[1])
}

fn segments_intersect(p1: [f64; 2], p2: [f64; 2], q1: [f64; 2], q2: [f64; 2]) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

/// Non-adjacent edges must not touch.
fn is_simple(vs: &[[f64; 2]]) -> bool {
    let m = vs.len();
    for i in 0..m {
        let (a1, a2) = (vs[i], vs[(i + 1) % m]);
        for j in i + 1..m {
            let adjacent = j == i + 1 || (i == 0 && j == m - 1);
            if adjacent {
                continue;
            }
            let (b1, b2) = (vs[j], vs[(j + 1) % m]);
            if segments_intersect(a1, a2, b1, b2) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> ObstacleSpec {
        ObstacleSpec::Polygon {
            vertices: vec![[0.1, 0.1], [0.3, 0.1], [0.3, 0.3], [0.1, 0.3]],
        }
    }

    #[test]
    fn disk_membership_is_strict() {
        let d = ObstacleSpec::Disk {
            center: vec![0.5, 0.0],
            radius: 0.1,
        };
        assert!(d.contains(&[0.55, 0.0]));
        assert!(!d.contains(&[0.61, 0.0]));
        assert!((d.reach() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn polygon_membership() {
        let p = square();
        assert!(p.contains(&[0.2, 0.2]));
        assert!(!p.contains(&[0.35, 0.2]));
        assert!(!p.contains(&[0.0, 0.0]));
        p.validate(2, 1.0).unwrap();
    }

    #[test]
    fn validation_errors() {
        let bowtie = ObstacleSpec::Polygon {
            vertices: vec![[0.0, 0.0], [0.2, 0.2], [0.2, 0.0], [0.0, 0.2]],
        };
        assert!(bowtie.validate(2, 1.0).is_err());
        assert!(square().validate(1, 1.0).is_err());
        assert!(square().validate(2, 0.3).is_err());
        let big = ObstacleSpec::Disk {
            center: vec![0.5, 0.0],
            radius: 0.6,
        };
        assert!(big.validate(2, 1.0).is_err());
        assert!(ObstacleSpec::None.validate(3, 0.1).is_ok());
    }
}
