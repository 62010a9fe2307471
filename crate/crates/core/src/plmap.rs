//! Finite piecewise-linear orientation-preserving homeomorphisms of the line.
//!
//! A `PLMap` is stored in canonical form: breakpoints strictly increasing in
//! both coordinates, every interior breakpoint a genuine corner, and two
//! affine tail slopes. Canonicalization makes structural equality coincide
//! with functional equality, so group identities (associativity, inverses,
//! commutators, factorizations) are checked as exact `==` on values.
//!
//! Canonical representations:
//! - the identity is the empty breakpoint list with both tail slopes 1
//!   (only constructible via [`PLMap::identity`]);
//! - any other globally affine map `x -> a x + b` is anchored by the single
//!   breakpoint `(0, b)` with both tail slopes `a`;
//! - every other map has a slope change at every breakpoint.

use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::interval::{IntervalUnion, Span, Window};
use crate::rational::Rational;

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum PlError {
    #[error("breakpoint list is empty; the identity map has a dedicated constructor")]
    EmptyBreakpoints,
    #[error("breakpoint x-coordinates are not strictly increasing at index {0}")]
    UnsortedBreakpoints(usize),
    #[error("not an orientation-preserving homeomorphism: {0}")]
    NonMonotone(String),
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PLMap {
    points: Vec<(Rational, Rational)>,
    slope_left: Rational,
    slope_right: Rational,
}

impl PLMap {
    pub fn identity() -> Self {
        PLMap {
            points: Vec::new(),
            slope_left: Rational::one(),
            slope_right: Rational::one(),
        }
    }

    /// Canonicalizing constructor. Collinear breakpoints are removed; a
    /// globally affine result is re-anchored at `x = 0`.
    pub fn make(
        points: Vec<(Rational, Rational)>,
        slope_left: Rational,
        slope_right: Rational,
    ) -> Result<Self, PlError> {
        if points.is_empty() {
            return Err(PlError::EmptyBreakpoints);
        }
        for i in 1..points.len() {
            if points[i - 1].0 >= points[i].0 {
                return Err(PlError::UnsortedBreakpoints(i));
            }
        }
        if !slope_left.is_positive() {
            return Err(PlError::NonMonotone(format!(
                "left tail slope {slope_left} is not positive"
            )));
        }
        if !slope_right.is_positive() {
            return Err(PlError::NonMonotone(format!(
                "right tail slope {slope_right} is not positive"
            )));
        }
        for i in 1..points.len() {
            if points[i - 1].1 >= points[i].1 {
                return Err(PlError::NonMonotone(format!(
                    "values not strictly increasing at breakpoint index {i}"
                )));
            }
        }
        // slope to the left and right of each breakpoint
        let n = points.len();
        let slope_at = |i: usize, side_right: bool| -> Rational {
            if side_right {
                if i + 1 < n {
                    (&points[i + 1].1 - &points[i].1) / (&points[i + 1].0 - &points[i].0)
                } else {
                    slope_right.clone()
                }
            } else if i > 0 {
                (&points[i].1 - &points[i - 1].1) / (&points[i].0 - &points[i - 1].0)
            } else {
                slope_left.clone()
            }
        };
        let kept: Vec<(Rational, Rational)> = (0..n)
            .filter(|&i| slope_at(i, false) != slope_at(i, true))
            .map(|i| points[i].clone())
            .collect();
        if kept.is_empty() {
            // globally affine: slope is the common tail slope
            let slope = slope_left;
            let offset = &points[0].1 - &slope * &points[0].0;
            return Ok(Self::affine(slope, offset));
        }
        Ok(PLMap {
            points: kept,
            slope_left,
            slope_right,
        })
    }

    /// The affine map `x -> slope * x + offset`; `slope` must be positive.
    pub fn affine(slope: Rational, offset: Rational) -> Self {
        assert!(slope.is_positive(), "affine map with non-positive slope");
        if slope.is_one() && offset.is_zero() {
            return Self::identity();
        }
        PLMap {
            points: vec![(Rational::zero(), offset)],
            slope_left: slope.clone(),
            slope_right: slope,
        }
    }

    pub fn translation(offset: Rational) -> Self {
        Self::affine(Rational::one(), offset)
    }

    pub fn is_identity(&self) -> bool {
        self.points.is_empty()
    }

    pub fn breakpoints(&self) -> &[(Rational, Rational)] {
        &self.points
    }

    pub fn slope_left(&self) -> &Rational {
        &self.slope_left
    }

    pub fn slope_right(&self) -> &Rational {
        &self.slope_right
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        if self.points.is_empty() {
            return x.clone();
        }
        let first = &self.points[0];
        if x <= &first.0 {
            return &first.1 + &self.slope_left * (x - &first.0);
        }
        let last = self.points.last().unwrap();
        if x >= &last.0 {
            return &last.1 + &self.slope_right * (x - &last.0);
        }
        // first index with points[i].0 > x; the segment is [i-1, i]
        let i = self.points.partition_point(|p| &p.0 <= x);
        let (x0, y0) = &self.points[i - 1];
        let (x1, y1) = &self.points[i];
        y0 + (y1 - y0) / (x1 - x0) * (x - x0)
    }

    pub fn eval_inverse(&self, y: &Rational) -> Rational {
        if self.points.is_empty() {
            return y.clone();
        }
        let first = &self.points[0];
        if y <= &first.1 {
            return &first.0 + (y - &first.1) / &self.slope_left;
        }
        let last = self.points.last().unwrap();
        if y >= &last.1 {
            return &last.0 + (y - &last.1) / &self.slope_right;
        }
        let i = self.points.partition_point(|p| &p.1 <= y);
        let (x0, y0) = &self.points[i - 1];
        let (x1, y1) = &self.points[i];
        x0 + (x1 - x0) / (y1 - y0) * (y - y0)
    }

    pub fn invert(&self) -> PLMap {
        if self.points.is_empty() {
            return PLMap::identity();
        }
        let points: Vec<(Rational, Rational)> = self
            .points
            .iter()
            .map(|(x, y)| (y.clone(), x.clone()))
            .collect();
        PLMap::make(points, self.slope_left.recip(), self.slope_right.recip())
            .expect("inverse of a canonical map is canonical")
    }

    /// `self` after `g`: the map `x -> self(g(x))`.
    pub fn compose(&self, g: &PLMap) -> PLMap {
        if self.is_identity() {
            return g.clone();
        }
        if g.is_identity() {
            return self.clone();
        }
        let mut xs: Vec<Rational> = Vec::with_capacity(self.points.len() + g.points.len());
        let mut a = g.points.iter().map(|p| p.0.clone()).peekable();
        let mut b = self.points.iter().map(|p| g.eval_inverse(&p.0)).peekable();
        loop {
            match (a.peek(), b.peek()) {
                (Some(x), Some(y)) => {
                    if x < y {
                        xs.push(a.next().unwrap());
                    } else if y < x {
                        xs.push(b.next().unwrap());
                    } else {
                        xs.push(a.next().unwrap());
                        b.next();
                    }
                }
                (Some(_), None) => xs.push(a.next().unwrap()),
                (None, Some(_)) => xs.push(b.next().unwrap()),
                (None, None) => break,
            }
        }
        let points: Vec<(Rational, Rational)> = xs
            .into_iter()
            .map(|x| {
                let y = self.eval(&g.eval(&x));
                (x, y)
            })
            .collect();
        PLMap::make(
            points,
            &self.slope_left * &g.slope_left,
            &self.slope_right * &g.slope_right,
        )
        .expect("composition of homeomorphisms is a homeomorphism")
    }

    /// `b . self . b^{-1}`.
    pub fn conjugate_by(&self, b: &PLMap) -> PLMap {
        b.compose(&self.compose(&b.invert()))
    }

    /// Integer power under composition; negative exponents use the inverse.
    pub fn pow(&self, k: i64) -> PLMap {
        let base = if k < 0 { self.invert() } else { self.clone() };
        let mut out = PLMap::identity();
        for _ in 0..k.unsigned_abs() {
            out = base.compose(&out);
        }
        out
    }

    /// Closure of the set of moved points, as an exact interval union.
    /// A tail with slope 1 and nonzero offset is marked unbounded.
    pub fn support(&self) -> IntervalUnion {
        if self.is_identity() {
            return IntervalUnion::empty();
        }
        let n = self.points.len();
        // segment i covers: i=0 the left tail, 1..n the interior pieces,
        // n+0...: plus one final right tail, for n+1 segments total
        let seg_count = n + 1;
        let is_id_seg = |i: usize| -> bool {
            if i == 0 {
                self.slope_left.is_one() && self.points[0].0 == self.points[0].1
            } else if i == n {
                self.slope_right.is_one() && self.points[n - 1].0 == self.points[n - 1].1
            } else {
                let (x0, y0) = &self.points[i - 1];
                let (x1, y1) = &self.points[i];
                x0 == y0 && x1 == y1 && (y1 - y0) == (x1 - x0)
            }
        };
        let mut spans: Vec<Span> = Vec::new();
        let mut open: Option<Option<Rational>> = None; // start of current moving run
        for i in 0..seg_count {
            let seg_start = if i == 0 {
                None
            } else {
                Some(self.points[i - 1].0.clone())
            };
            let seg_end = if i == n {
                None
            } else {
                Some(self.points[i].0.clone())
            };
            if is_id_seg(i) {
                if let Some(start) = open.take() {
                    spans.push(Span {
                        lo: start,
                        hi: seg_start,
                    });
                }
            } else if open.is_none() {
                open = Some(seg_start);
            }
            let _ = seg_end;
        }
        if let Some(start) = open.take() {
            spans.push(Span {
                lo: start,
                hi: None,
            });
        }
        IntervalUnion::from_spans(spans)
    }

    /// Exact image of a span; orientation preservation maps endpoints to
    /// endpoints and keeps tails unbounded.
    pub fn image_span(&self, s: &Span) -> Span {
        Span {
            lo: s.lo.as_ref().map(|x| self.eval(x)),
            hi: s.hi.as_ref().map(|x| self.eval(x)),
        }
    }

    pub fn image_union(&self, u: &IntervalUnion) -> IntervalUnion {
        IntervalUnion::from_spans(u.spans().iter().map(|s| self.image_span(s)).collect())
    }

    /// Split at a pointwise-fixed closed interval `[a, b]` (requires
    /// `self(a) = a` and `self(b) = b`): returns `(inside, outside)` with
    /// `inside` equal to `self` on `[a, b]` and the identity elsewhere,
    /// `outside` the complementary factor, and `self = outside . inside`.
    pub fn carve(&self, a: &Rational, b: &Rational) -> Option<(PLMap, PLMap)> {
        if a >= b || self.eval(a) != *a || self.eval(b) != *b {
            return None;
        }
        let mut inner_pts = vec![(a.clone(), a.clone())];
        inner_pts.extend(
            self.points
                .iter()
                .filter(|(x, _)| x > a && x < b)
                .cloned(),
        );
        inner_pts.push((b.clone(), b.clone()));
        let inside = PLMap::make(inner_pts, Rational::one(), Rational::one())
            .expect("carved inner factor is monotone");
        let mut outer_pts: Vec<(Rational, Rational)> = self
            .points
            .iter()
            .filter(|(x, _)| x < a)
            .cloned()
            .collect();
        outer_pts.push((a.clone(), a.clone()));
        outer_pts.push((b.clone(), b.clone()));
        outer_pts.extend(self.points.iter().filter(|(x, _)| x > b).cloned());
        outer_pts.sort_by(|p, q| p.0.cmp(&q.0));
        outer_pts.dedup_by(|p, q| p.0 == q.0);
        let outside = PLMap::make(outer_pts, self.slope_left.clone(), self.slope_right.clone())
            .expect("carved outer factor is monotone");
        Some((inside, outside))
    }

    /// Exact equality of the two maps on a closed window.
    pub fn agrees_on_window(&self, other: &PLMap, w: &Window) -> bool {
        self.first_disagreement_on_window(other, w).is_none()
    }

    /// A point where two maps differ, or `None` when they are equal.
    /// Probing every breakpoint of both maps plus one point beyond each
    /// extreme is exhaustive: agreement there forces equal segments and
    /// equal tails.
    pub fn difference_witness(&self, other: &PLMap) -> Option<Rational> {
        if self == other {
            return None;
        }
        let mut xs: Vec<Rational> = self
            .points
            .iter()
            .chain(other.points.iter())
            .map(|(x, _)| x.clone())
            .collect();
        xs.push(Rational::zero());
        let lo = xs.iter().cloned().min().unwrap() - Rational::one();
        let hi = xs.iter().cloned().max().unwrap() + Rational::one();
        xs.push(lo);
        xs.push(hi);
        xs.sort();
        xs.dedup();
        xs.into_iter().find(|x| self.eval(x) != other.eval(x))
    }

    /// First sample point in the window where the maps differ, checking the
    /// window ends and every breakpoint of either map inside it. Between
    /// consecutive checked points both maps are affine, so agreement at the
    /// checked points is agreement on the whole window.
    pub fn first_disagreement_on_window(&self, other: &PLMap, w: &Window) -> Option<Rational> {
        let mut xs: Vec<Rational> = vec![w.lo.clone(), w.hi.clone()];
        for (x, _) in self.points.iter().chain(other.points.iter()) {
            if x > &w.lo && x < &w.hi {
                xs.push(x.clone());
            }
        }
        xs.sort();
        xs.dedup();
        xs.into_iter().find(|x| self.eval(x) != other.eval(x))
    }
}

impl fmt::Display for PLMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "id");
        }
        let pts: Vec<String> = self
            .points
            .iter()
            .map(|(x, y)| format!("({x},{y})"))
            .collect();
        write!(
            f,
            "PL[{} | sl={} sr={}]",
            pts.join(" "),
            self.slope_left,
            self.slope_right
        )
    }
}

impl fmt::Debug for PLMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

#[derive(Serialize, Deserialize)]
struct PlMapWire {
    breakpoints: Vec<(Rational, Rational)>,
    slope_left: Rational,
    slope_right: Rational,
}

impl Serialize for PLMap {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        PlMapWire {
            breakpoints: self.points.clone(),
            slope_left: self.slope_left.clone(),
            slope_right: self.slope_right.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PLMap {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let wire = PlMapWire::deserialize(deserializer)?;
        if wire.breakpoints.is_empty() {
            if wire.slope_left.is_one() && wire.slope_right.is_one() {
                return Ok(PLMap::identity());
            }
            return Err(D::Error::custom(
                "empty breakpoint list is only valid for the identity map (slopes 1)",
            ));
        }
        PLMap::make(wire.breakpoints, wire.slope_left, wire.slope_right)
            .map_err(D::Error::custom)
    }
}
