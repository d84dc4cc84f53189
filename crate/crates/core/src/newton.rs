//! Newton polygons with exact rational slopes.
//!
//! Points whose valuation is only bounded below ("zero at precision `T`")
//! enter as upper constraints: they must lie strictly above the hull built
//! from the determined points, otherwise some admissible value could change
//! the polygon and construction fails with a precision error.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::Zero;

use crate::rational::{int, Rational};
use crate::series::Valuation;
use crate::{Error, Result};

/// A hull edge between two consecutive vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub start: (i64, Rational),
    pub end: (i64, Rational),
    pub slope: Rational,
    pub length: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewtonPolygon {
    vertices: Vec<(i64, Rational)>,
    /// Input points on a segment but not vertices.
    collinear: Vec<(i64, Rational)>,
    /// Input points strictly above the hull.
    above: Vec<(i64, Rational)>,
}

fn slope(a: &(i64, Rational), b: &(i64, Rational)) -> Rational {
    (&b.1 - &a.1) / int(b.0 - a.0)
}

/// Sign of the turn `a → b → c`; `≤ 0` means `b` is not strictly below `ac`.
fn cross(a: &(i64, Rational), b: &(i64, Rational), c: &(i64, Rational)) -> Rational {
    let ab = (int(b.0 - a.0), &b.1 - &a.1);
    let ac = (int(c.0 - a.0), &c.1 - &a.1);
    &ab.0 * &ac.1 - &ab.1 * &ac.0
}

impl NewtonPolygon {
    /// Lower convex hull of points with distinct indices.
    pub fn new(points: &[(i64, Rational)]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty("Newton polygon needs at least one point".into()));
        }
        let mut pts = points.to_vec();
        pts.sort_by_key(|p| p.0);
        let mut seen = BTreeSet::new();
        for p in &pts {
            if !seen.insert(p.0) {
                return Err(Error::DuplicateIndex(p.0));
            }
        }
        // monotone chain; collinear middle points are popped
        let mut hull: Vec<(i64, Rational)> = Vec::new();
        for p in &pts {
            while hull.len() >= 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= Rational::zero() {
                hull.pop();
            }
            hull.push(p.clone());
        }
        let mut poly = NewtonPolygon { vertices: hull, collinear: Vec::new(), above: Vec::new() };
        for p in &pts {
            if poly.vertices.iter().any(|v| v.0 == p.0) {
                continue;
            }
            let line = poly.line_value(p.0).expect("interior index");
            if p.1 == line {
                poly.collinear.push(p.clone());
            } else {
                poly.above.push(p.clone());
            }
        }
        Ok(poly)
    }

    /// Hull of the determined points of a coefficient list `c_i` at indices
    /// `offset + i`. Exact zeros are skipped; unknown coefficients must lie
    /// strictly above the resulting hull.
    pub fn from_valuations(offset: i64, vals: &[Valuation]) -> Result<Self> {
        let mut points = Vec::new();
        let mut bounds = Vec::new();
        for (i, v) in vals.iter().enumerate() {
            let idx = offset + i as i64;
            match v {
                Valuation::Finite(r) => points.push((idx, r.clone())),
                Valuation::AtLeast(r) => bounds.push((idx, r.clone())),
                Valuation::Infinite => {}
            }
        }
        Self::with_bounds(&points, &bounds)
    }

    /// Hull of `points`, certified against lower-bounded `bounds`.
    pub fn with_bounds(points: &[(i64, Rational)], bounds: &[(i64, Rational)]) -> Result<Self> {
        let poly = Self::new(points)?;
        for (i, t) in bounds {
            match poly.line_value(*i) {
                Some(line) if *t > line => {}
                _ => {
                    return Err(Error::InsufficientPrecision(format!(
                        "coefficient at index {i} is only known to have valuation >= {t}; the Newton polygon is not determined"
                    )))
                }
            }
        }
        Ok(poly)
    }

    pub fn vertices(&self) -> &[(i64, Rational)] {
        &self.vertices
    }

    pub fn collinear_points(&self) -> &[(i64, Rational)] {
        &self.collinear
    }

    pub fn points_above(&self) -> &[(i64, Rational)] {
        &self.above
    }

    pub fn first_index(&self) -> i64 {
        self.vertices[0].0
    }

    pub fn last_index(&self) -> i64 {
        self.vertices.last().unwrap().0
    }

    pub fn is_degenerate(&self) -> bool {
        self.vertices.len() < 2
    }

    pub fn segments(&self) -> Vec<Segment> {
        self.vertices
            .windows(2)
            .map(|w| Segment {
                start: w[0].clone(),
                end: w[1].clone(),
                slope: slope(&w[0], &w[1]),
                length: (w[1].0 - w[0].0) as usize,
            })
            .collect()
    }

    /// Height of the hull at index `i`, inside the index span.
    pub fn line_value(&self, i: i64) -> Option<Rational> {
        if i < self.first_index() || i > self.last_index() {
            return None;
        }
        let k = self.vertices.partition_point(|v| v.0 < i);
        let b = &self.vertices[k];
        if b.0 == i {
            return Some(b.1.clone());
        }
        let a = &self.vertices[k - 1];
        Some(&a.1 + slope(a, b) * int(i - a.0))
    }

    /// Root valuations with multiplicities: `(-slope, length)` per segment.
    pub fn root_valuations(&self) -> Vec<(Rational, usize)> {
        self.segments().into_iter().map(|s| (-s.slope, s.length)).collect()
    }
}

impl fmt::Display for NewtonPolygon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vs: Vec<String> = self.vertices.iter().map(|(i, v)| format!("({i}, {v})")).collect();
        write!(f, "{}", vs.join(" -> "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn pts(v: &[(i64, i64, i64)]) -> Vec<(i64, Rational)> {
        v.iter().map(|&(i, n, d)| (i, rat(n, d))).collect()
    }

    #[test]
    fn single_segment() {
        let p = NewtonPolygon::new(&pts(&[(0, 1, 1), (2, 0, 1)])).unwrap();
        assert_eq!(p.root_valuations(), vec![(rat(1, 2), 2)]);
    }

    #[test]
    fn interior_point_above() {
        let p = NewtonPolygon::new(&pts(&[(1, 1, 1), (2, 1, 1), (3, 0, 1)])).unwrap();
        assert_eq!(p.vertices().len(), 2);
        assert_eq!(p.points_above(), &pts(&[(2, 1, 1)])[..]);
        assert_eq!(p.root_valuations(), vec![(rat(1, 2), 2)]);
        let q = NewtonPolygon::new(&pts(&[(0, 1, 1), (1, 5, 1), (2, 0, 1)])).unwrap();
        assert_eq!(q.root_valuations(), vec![(rat(1, 2), 2)]);
    }

    #[test]
    fn collinear_points_are_not_vertices() {
        let p = NewtonPolygon::new(&pts(&[(0, 2, 1), (1, 1, 1), (2, 0, 1)])).unwrap();
        assert_eq!(p.vertices().len(), 2);
        assert_eq!(p.collinear_points(), &pts(&[(1, 1, 1)])[..]);
    }

    #[test]
    fn degenerate_and_errors() {
        let p = NewtonPolygon::new(&pts(&[(0, 0, 1)])).unwrap();
        assert!(p.is_degenerate());
        assert!(p.root_valuations().is_empty());
        assert_eq!(NewtonPolygon::new(&pts(&[(1, 0, 1), (1, 1, 1)])), Err(Error::DuplicateIndex(1)));
        assert!(NewtonPolygon::new(&[]).is_err());
    }

    #[test]
    fn bounds_must_clear_the_hull() {
        let points = pts(&[(0, 2, 1), (2, 0, 1)]);
        assert!(NewtonPolygon::with_bounds(&points, &pts(&[(1, 3, 2)])).is_ok());
        assert!(matches!(
            NewtonPolygon::with_bounds(&points, &pts(&[(1, 1, 1)])),
            Err(Error::InsufficientPrecision(_))
        ));
        assert!(NewtonPolygon::with_bounds(&points, &pts(&[(3, 9, 1)])).is_err());
    }
}
