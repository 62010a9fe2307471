//! Closed intervals, finite unions of them, and verification windows.
//!
//! An `IntervalUnion` is a sorted list of pairwise disjoint closed spans
//! with positive gaps between consecutive components; a span endpoint of
//! `None` marks an unbounded tail on that side. Construction normalizes
//! (sorts and merges touching or overlapping components), so structural
//! equality of unions is set equality.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::rational::Rational;

/// Closed interval with optionally infinite endpoints. `lo = None` means
/// the span extends to -inf, `hi = None` to +inf.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub lo: Option<Rational>,
    pub hi: Option<Rational>,
}

impl Span {
    pub fn bounded(lo: Rational, hi: Rational) -> Self {
        assert!(lo <= hi, "span with lo > hi");
        Span {
            lo: Some(lo),
            hi: Some(hi),
        }
    }

    pub fn point(x: Rational) -> Self {
        Span {
            lo: Some(x.clone()),
            hi: Some(x),
        }
    }

    pub fn left_ray(hi: Rational) -> Self {
        Span {
            lo: None,
            hi: Some(hi),
        }
    }

    pub fn right_ray(lo: Rational) -> Self {
        Span {
            lo: Some(lo),
            hi: None,
        }
    }

    pub fn whole_line() -> Self {
        Span { lo: None, hi: None }
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_some() && self.hi.is_some()
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.lo.as_ref().is_none_or(|lo| lo <= x) && self.hi.as_ref().is_none_or(|hi| x <= hi)
    }

    pub fn intersects(&self, other: &Span) -> bool {
        let left_ok = match (&self.lo, &other.hi) {
            (Some(a), Some(b)) => a <= b,
            _ => true,
        };
        let right_ok = match (&self.hi, &other.lo) {
            (Some(a), Some(b)) => b <= a,
            _ => true,
        };
        left_ok && right_ok
    }

    pub fn intersection(&self, other: &Span) -> Option<Span> {
        if !self.intersects(other) {
            return None;
        }
        let lo = match (&self.lo, &other.lo) {
            (Some(a), Some(b)) => Some(a.clone().max(b.clone())),
            (Some(a), None) => Some(a.clone()),
            (None, b) => b.clone(),
        };
        let hi = match (&self.hi, &other.hi) {
            (Some(a), Some(b)) => Some(a.clone().min(b.clone())),
            (Some(a), None) => Some(a.clone()),
            (None, b) => b.clone(),
        };
        Some(Span { lo, hi })
    }

    pub fn subset_of(&self, other: &Span) -> bool {
        let lo_ok = match (&other.lo, &self.lo) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(a), Some(b)) => a <= b,
        };
        let hi_ok = match (&other.hi, &self.hi) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(a), Some(b)) => b <= a,
        };
        lo_ok && hi_ok
    }

    /// Length of a bounded span.
    pub fn diameter(&self) -> Option<Rational> {
        match (&self.lo, &self.hi) {
            (Some(lo), Some(hi)) => Some(hi - lo),
            _ => None,
        }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.lo {
            Some(lo) => write!(f, "[{lo}, ")?,
            None => write!(f, "(-inf, ")?,
        }
        match &self.hi {
            Some(hi) => write!(f, "{hi}]"),
            None => write!(f, "+inf)"),
        }
    }
}

impl fmt::Debug for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

/// Finite union of disjoint closed spans, kept sorted and normalized.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct IntervalUnion {
    spans: Vec<Span>,
}

impl IntervalUnion {
    pub fn empty() -> Self {
        IntervalUnion { spans: Vec::new() }
    }

    pub fn whole_line() -> Self {
        IntervalUnion {
            spans: vec![Span::whole_line()],
        }
    }

    pub fn from_spans(spans: Vec<Span>) -> Self {
        let mut spans = spans;
        spans.sort_by(|a, b| match (&a.lo, &b.lo) {
            (None, None) => std::cmp::Ordering::Equal,
            (None, Some(_)) => std::cmp::Ordering::Less,
            (Some(_), None) => std::cmp::Ordering::Greater,
            (Some(x), Some(y)) => x.cmp(y),
        });
        let mut merged: Vec<Span> = Vec::new();
        for s in spans {
            match merged.last_mut() {
                Some(last) if last.intersects(&s) || touches(last, &s) => {
                    last.hi = match (&last.hi, &s.hi) {
                        (None, _) | (_, None) => None,
                        (Some(a), Some(b)) => Some(a.clone().max(b.clone())),
                    };
                }
                _ => merged.push(s),
            }
        }
        IntervalUnion { spans: merged }
    }

    pub fn from_intervals(intervals: Vec<(Rational, Rational)>) -> Self {
        Self::from_spans(
            intervals
                .into_iter()
                .map(|(a, b)| Span::bounded(a, b))
                .collect(),
        )
    }

    pub fn single(lo: Rational, hi: Rational) -> Self {
        Self::from_spans(vec![Span::bounded(lo, hi)])
    }

    pub fn spans(&self) -> &[Span] {
        &self.spans
    }

    pub fn is_empty(&self) -> bool {
        self.spans.is_empty()
    }

    pub fn is_bounded(&self) -> bool {
        self.spans.iter().all(Span::is_bounded)
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.spans.iter().any(|s| s.contains(x))
    }

    pub fn union(&self, other: &IntervalUnion) -> IntervalUnion {
        let mut spans = self.spans.clone();
        spans.extend(other.spans.iter().cloned());
        IntervalUnion::from_spans(spans)
    }

    /// First intersecting pair of spans, if the two unions meet.
    pub fn intersection_witness(&self, other: &IntervalUnion) -> Option<Span> {
        for a in &self.spans {
            for b in &other.spans {
                if let Some(w) = a.intersection(b) {
                    return Some(w);
                }
            }
        }
        None
    }

    pub fn is_disjoint(&self, other: &IntervalUnion) -> bool {
        self.intersection_witness(other).is_none()
    }

    pub fn is_subset(&self, other: &IntervalUnion) -> bool {
        self.spans
            .iter()
            .all(|a| other.spans.iter().any(|b| a.subset_of(b)))
    }

    /// Smallest gap between consecutive components; `None` if fewer than two.
    pub fn min_gap(&self) -> Option<Rational> {
        let mut best: Option<Rational> = None;
        for pair in self.spans.windows(2) {
            if let (Some(hi), Some(lo)) = (&pair[0].hi, &pair[1].lo) {
                let gap = lo - hi;
                best = Some(match best {
                    None => gap,
                    Some(b) => b.min(gap),
                });
            }
        }
        best
    }

    /// Hull endpoints of a bounded nonempty union.
    pub fn bounds(&self) -> Option<(Rational, Rational)> {
        let lo = self.spans.first()?.lo.clone()?;
        let hi = self.spans.last()?.hi.clone()?;
        Some((lo, hi))
    }

    pub fn max_component_diameter(&self) -> Option<Rational> {
        self.spans
            .iter()
            .map(|s| s.diameter())
            .collect::<Option<Vec<_>>>()
            .map(|ds| {
                ds.into_iter()
                    .fold(Rational::zero(), |acc, d| acc.max(d))
            })
    }
}

fn touches(a: &Span, b: &Span) -> bool {
    match (&a.hi, &b.lo) {
        (Some(hi), Some(lo)) => hi == lo,
        _ => false,
    }
}

impl fmt::Display for IntervalUnion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.spans.is_empty() {
            return write!(f, "{{}}");
        }
        let parts: Vec<String> = self.spans.iter().map(|s| s.to_string()).collect();
        write!(f, "{}", parts.join(" u "))
    }
}

impl fmt::Debug for IntervalUnion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

/// Bounded open verification window `(lo, hi)` with `lo < hi`.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub lo: Rational,
    pub hi: Rational,
}

impl Window {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        assert!(lo < hi, "window with lo >= hi");
        Window { lo, hi }
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn as_span(&self) -> Span {
        Span::bounded(self.lo.clone(), self.hi.clone())
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / Rational::from_int(2)
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl fmt::Debug for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}
