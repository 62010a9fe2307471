//! Homeomorphisms with infinite, locally finite piecewise structure.
//!
//! The central object is the infinite product of conjugates
//! `A = prod_{n,m} a_n^{T^n S^m}` built from a finite family of terms
//! supported in a set `Z` and two displacement movers `S`, `T`. Its
//! breakpoints accumulate at the images of the contraction fixed points, so
//! no finite `PLMap` represents it; a [`LazyHomeo`] instead offers exact
//! pointwise evaluation everywhere and finite materialization on windows
//! whose closure avoids the accumulation set.
//!
//! Validity is not sampled: [`check_family`] verifies the disjointness
//! properties exactly to a requested depth and then certifies the whole
//! infinite family through a structural contraction witness (each support
//! component is pushed off itself toward an attracting fixed endpoint, with
//! slope < 1 on the final segment), which covers all iterates at once.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::interval::{IntervalUnion, Span, Window};
use crate::plmap::PLMap;
use crate::rational::Rational;
use crate::report::Report;

/// Depth used for the exact disjointness prefix when building products.
pub const DEFAULT_CHECK_DEPTH: u32 = 20;

const ITER_GUARD: usize = 100_000;

/// Finite description of the conjugated family: terms `a_0..a_N` supported
/// in `z_set`, displaced by `mover_s` within nested neighborhoods displaced
/// in turn by `mover_t`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ConjugatedFamilySpec {
    pub terms: Vec<PLMap>,
    pub mover_t: PLMap,
    pub mover_s: PLMap,
    pub z_set: IntervalUnion,
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum FamilyError {
    #[error("terms[{0}] is not supported inside Z")]
    TermNotSupportedInZ(usize),
    #[error("disjointness violation in {family}: iterates {i} and {j} overlap on {overlap}")]
    DisjointnessViolation {
        family: String,
        i: u32,
        j: u32,
        overlap: Box<Span>,
    },
    #[error("no structural decay witness: {0}")]
    NoDecayWitness(String),
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum MaterializeError {
    #[error("window closure hits accumulation point {0}")]
    WindowHitsAccumulation(Rational),
}

/// Structural contraction data for one component of a displaced family:
/// the component is pushed off itself (`first_gap > 0`) toward
/// `attractor`, and after `escape_steps` iterates every image lies in the
/// final affine zone where the mover has slope `ratio < 1`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ContractionWitness {
    pub component: Span,
    pub support_span: Span,
    pub attractor: Rational,
    pub rightward: bool,
    pub ratio: Rational,
    pub escape_steps: u32,
    pub first_gap: Rational,
}

/// Result of [`check_family`]: the exact-prefix report plus the structural
/// witnesses that extend the disjointness and decay to all iterates.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FamilyCheck {
    pub report: Report,
    pub s_witnesses: Vec<ContractionWitness>,
    pub t_witnesses: Vec<ContractionWitness>,
}

/// Extract the contraction witness of `mover` for one `component` of the
/// displaced family. The component must sit inside a single support span of
/// the mover, be displaced entirely off itself, and the mover must move
/// every interior point of that span in one consistent direction.
fn contraction_witness(
    mover: &PLMap,
    mover_name: &str,
    component: &Span,
    support: &IntervalUnion,
) -> Result<ContractionWitness, FamilyError> {
    let err = |msg: String| FamilyError::NoDecayWitness(msg);
    let (c_lo, c_hi) = match (&component.lo, &component.hi) {
        (Some(a), Some(b)) => (a.clone(), b.clone()),
        _ => return Err(err(format!("component {component} is unbounded"))),
    };
    let span = support
        .spans()
        .iter()
        .find(|s| component.subset_of(s))
        .ok_or_else(|| {
            err(format!(
                "component {component} is not inside a single support span of {mover_name}"
            ))
        })?;
    let (u, v) = match (&span.lo, &span.hi) {
        (Some(u), Some(v)) => (u.clone(), v.clone()),
        _ => return Err(err(format!("support span {span} of {mover_name} is unbounded"))),
    };
    // sign of mover - id on the interior; mixed signs mean an interior
    // fixed point and no all-iterates guarantee
    let mut rightward: Option<bool> = None;
    for (x, y) in mover.breakpoints() {
        if x > &u && x < &v {
            if y > x {
                if rightward == Some(false) {
                    return Err(err(format!(
                        "{mover_name} changes direction inside {span}"
                    )));
                }
                rightward = Some(true);
            } else if y < x {
                if rightward == Some(true) {
                    return Err(err(format!(
                        "{mover_name} changes direction inside {span}"
                    )));
                }
                rightward = Some(false);
            } else {
                return Err(err(format!(
                    "{mover_name} has an interior fixed point at {x} inside {span}"
                )));
            }
        }
    }
    let rightward = rightward
        .ok_or_else(|| err(format!("{mover_name} has no breakpoint inside {span}")))?;
    let attractor = if rightward { v.clone() } else { u.clone() };
    let first_gap = if rightward {
        mover.eval(&c_lo) - &c_hi
    } else {
        &c_lo - mover.eval(&c_hi)
    };
    if !first_gap.is_positive() {
        return Err(err(format!(
            "{mover_name} does not displace {component} off itself (gap {first_gap})"
        )));
    }
    // final affine zone: from the last breakpoint before the attractor
    let zone_edge: Option<Rational> = if rightward {
        mover
            .breakpoints()
            .iter()
            .filter(|(x, _)| x > &u && x < &v)
            .map(|(x, _)| x.clone())
            .max()
    } else {
        mover
            .breakpoints()
            .iter()
            .filter(|(x, _)| x > &u && x < &v)
            .map(|(x, _)| x.clone())
            .min()
    };
    let zone_edge = zone_edge.expect("interior breakpoint exists");
    let ratio = segment_slope_toward(mover, &attractor, rightward);
    if ratio >= Rational::one() {
        return Err(err(format!(
            "{mover_name} has slope {ratio} >= 1 adjacent to its fixed endpoint {attractor}"
        )));
    }
    // iterate the component until it is inside the final zone
    let mut lo = c_lo;
    let mut hi = c_hi;
    let mut escape_steps: u32 = 0;
    loop {
        let inside = if rightward {
            lo >= zone_edge
        } else {
            hi <= zone_edge
        };
        if inside {
            break;
        }
        lo = mover.eval(&lo);
        hi = mover.eval(&hi);
        escape_steps += 1;
        if escape_steps as usize > ITER_GUARD {
            return Err(err(format!(
                "{mover_name} iterates of {component} do not reach the final zone"
            )));
        }
    }
    Ok(ContractionWitness {
        component: component.clone(),
        support_span: span.clone(),
        attractor,
        rightward,
        ratio,
        escape_steps,
        first_gap,
    })
}

/// Slope of the segment of `map` on the approach side of `x`: iterates
/// approach a rightward attractor from below, so this is the slope just
/// left of `x` (and just right of `x` for a leftward attractor).
fn segment_slope_toward(map: &PLMap, x: &Rational, rightward: bool) -> Rational {
    let pts = map.breakpoints();
    let fx = map.eval(x);
    if rightward {
        let idx = pts.partition_point(|p| &p.0 < x);
        if idx == 0 {
            return map.slope_left().clone();
        }
        let (ax, ay) = &pts[idx - 1];
        (&fx - ay) / (x - ax)
    } else {
        let idx = pts.partition_point(|p| &p.0 <= x);
        if idx >= pts.len() {
            return map.slope_right().clone();
        }
        let (bx, by) = &pts[idx];
        (by - &fx) / (bx - x)
    }
}

/// Verify the displaced-family properties exactly to `depth` and produce
/// the structural witnesses covering all iterates.
pub fn check_family(spec: &ConjugatedFamilySpec, depth: u32) -> Result<FamilyCheck, FamilyError> {
    assert!(depth >= 1, "depth must be >= 1");
    let mut report = Report::new("conjugated family check");
    if !spec.z_set.is_bounded() || spec.z_set.is_empty() {
        return Err(FamilyError::NoDecayWitness(
            "Z must be a nonempty bounded union".to_string(),
        ));
    }
    for (n, a) in spec.terms.iter().enumerate() {
        if !a.support().is_subset(&spec.z_set) {
            return Err(FamilyError::TermNotSupportedInZ(n));
        }
    }
    report.pass(format!(
        "all {} terms supported inside Z = {}",
        spec.terms.len(),
        spec.z_set
    ));

    let s_support = spec.mover_s.support();
    check_iterates_disjoint(&spec.mover_s, &spec.z_set, depth, "S-iterates of Z")?;
    report.pass(format!(
        "S^i(Z) pairwise disjoint for 0 <= i < j <= {depth} (exact)"
    ));
    check_iterates_disjoint(&spec.mover_t, &s_support, depth, "T-iterates of supp S")?;
    report.pass(format!(
        "T^i(supp S) pairwise disjoint for 0 <= i < j <= {depth} (exact)"
    ));

    let mut s_witnesses = Vec::new();
    let mut used_spans: Vec<Span> = Vec::new();
    for comp in spec.z_set.spans() {
        let w = contraction_witness(&spec.mover_s, "S", comp, &s_support)?;
        if used_spans.contains(&w.support_span) {
            return Err(FamilyError::NoDecayWitness(format!(
                "two Z components share the S support span {}",
                w.support_span
            )));
        }
        used_spans.push(w.support_span.clone());
        s_witnesses.push(w);
    }
    let t_support = spec.mover_t.support();
    let mut t_witnesses = Vec::new();
    let mut used_t: Vec<Span> = Vec::new();
    for comp in s_support.spans() {
        let w = contraction_witness(&spec.mover_t, "T", comp, &t_support)?;
        if used_t.contains(&w.support_span) {
            return Err(FamilyError::NoDecayWitness(format!(
                "two supp(S) components share the T support span {}",
                w.support_span
            )));
        }
        used_t.push(w.support_span.clone());
        t_witnesses.push(w);
    }
    for w in s_witnesses.iter().chain(t_witnesses.iter()) {
        report.pass(format!(
            "contraction witness: {} inside {} toward {}, ratio {}, escape after {} steps, first gap {}",
            w.component, w.support_span, w.attractor, w.ratio, w.escape_steps, w.first_gap
        ));
    }
    report.note(
        "witnesses certify disjointness and diameter decay for all iterates; \
         in particular both families are locally finite away from the attractors"
            .to_string(),
    );
    Ok(FamilyCheck {
        report,
        s_witnesses,
        t_witnesses,
    })
}

fn check_iterates_disjoint(
    mover: &PLMap,
    base: &IntervalUnion,
    depth: u32,
    family: &str,
) -> Result<(), FamilyError> {
    let mut iterates: Vec<IntervalUnion> = Vec::with_capacity(depth as usize + 1);
    iterates.push(base.clone());
    for _ in 0..depth {
        let next = mover.image_union(iterates.last().unwrap());
        iterates.push(next);
    }
    for i in 0..iterates.len() {
        for j in (i + 1)..iterates.len() {
            if let Some(overlap) = iterates[i].intersection_witness(&iterates[j]) {
                return Err(FamilyError::DisjointnessViolation {
                    family: family.to_string(),
                    i: i as u32,
                    j: j as u32,
                    overlap: Box::new(overlap),
                });
            }
        }
    }
    Ok(())
}

struct ComponentGeometry {
    z_lo: Rational,
    z_hi: Rational,
    s_span: Span,
    s_attractor: Rational,
    s_rightward: bool,
}

struct ProductData {
    spec: ConjugatedFamilySpec,
    geoms: Vec<ComponentGeometry>,
}

enum LazySource {
    Identity,
    Product(Arc<ProductData>),
    InverseProduct(Arc<ProductData>),
}

impl Clone for LazySource {
    fn clone(&self) -> Self {
        match self {
            LazySource::Identity => LazySource::Identity,
            LazySource::Product(d) => LazySource::Product(Arc::clone(d)),
            LazySource::InverseProduct(d) => LazySource::InverseProduct(Arc::clone(d)),
        }
    }
}

/// A homeomorphism given by coherent finite materializations on windows.
/// Values are immutable and cheap to clone; evaluation is pure.
#[derive(Clone)]
pub struct LazyHomeo {
    source: LazySource,
    accumulation_points: Vec<Rational>,
}

impl LazyHomeo {
    pub fn identity() -> Self {
        LazyHomeo {
            source: LazySource::Identity,
            accumulation_points: Vec::new(),
        }
    }

    pub fn accumulation_points(&self) -> &[Rational] {
        &self.accumulation_points
    }

    pub fn invert(&self) -> LazyHomeo {
        let source = match &self.source {
            LazySource::Identity => LazySource::Identity,
            LazySource::Product(d) => LazySource::InverseProduct(Arc::clone(d)),
            LazySource::InverseProduct(d) => LazySource::Product(Arc::clone(d)),
        };
        LazyHomeo {
            source,
            accumulation_points: self.accumulation_points.clone(),
        }
    }

    /// Exact value at `x`. Accumulation points evaluate to themselves (the
    /// unique continuous extension fixes them).
    pub fn point_eval(&self, x: &Rational) -> Rational {
        if self.accumulation_points.binary_search(x).is_ok() {
            return x.clone();
        }
        match &self.source {
            LazySource::Identity => x.clone(),
            LazySource::Product(d) => eval_product(d, x, false),
            LazySource::InverseProduct(d) => eval_product(d, x, true),
        }
    }

    /// Finite canonical `PLMap` agreeing with the homeomorphism on `w`.
    pub fn materialize(&self, w: &Window) -> Result<PLMap, MaterializeError> {
        for p in &self.accumulation_points {
            if w.contains(p) {
                return Err(MaterializeError::WindowHitsAccumulation(p.clone()));
            }
        }
        match &self.source {
            LazySource::Identity => Ok(PLMap::identity()),
            LazySource::Product(d) => Ok(materialize_product(d, w)),
            LazySource::InverseProduct(d) => Ok(materialize_product(d, w).invert()),
        }
    }
}

impl std::fmt::Debug for LazyHomeo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.source {
            LazySource::Identity => write!(f, "LazyHomeo[id]"),
            LazySource::Product(d) => write!(
                f,
                "LazyHomeo[product of {} terms over {} components]",
                d.spec.terms.len(),
                d.geoms.len()
            ),
            LazySource::InverseProduct(d) => write!(
                f,
                "LazyHomeo[inverse product of {} terms over {} components]",
                d.spec.terms.len(),
                d.geoms.len()
            ),
        }
    }
}

/// Build the infinite product `A(x) = prod_{n <= N, m >= 0} a_n^{T^n S^m}(x)`
/// after verifying the family (depth [`DEFAULT_CHECK_DEPTH`]).
pub fn build_a(spec: &ConjugatedFamilySpec) -> Result<LazyHomeo, FamilyError> {
    let check = check_family(spec, DEFAULT_CHECK_DEPTH)?;
    Ok(build_a_checked(spec, &check))
}

/// Build the product from an existing successful [`check_family`] result.
pub fn build_a_checked(spec: &ConjugatedFamilySpec, check: &FamilyCheck) -> LazyHomeo {
    let geoms: Vec<ComponentGeometry> = spec
        .z_set
        .spans()
        .iter()
        .zip(check.s_witnesses.iter())
        .map(|(z, w)| ComponentGeometry {
            z_lo: z.lo.clone().expect("bounded Z component"),
            z_hi: z.hi.clone().expect("bounded Z component"),
            s_span: w.support_span.clone(),
            s_attractor: w.attractor.clone(),
            s_rightward: w.rightward,
        })
        .collect();
    // breakpoints accumulate at T^n of each S-attractor (n over the term
    // indices); the T-attractors are included as a conservative margin
    let mut accumulation: Vec<Rational> = Vec::new();
    for g in &geoms {
        let mut p = g.s_attractor.clone();
        accumulation.push(p.clone());
        for _ in 1..spec.terms.len().max(1) {
            p = spec.mover_t.eval(&p);
            accumulation.push(p.clone());
        }
    }
    for w in &check.t_witnesses {
        accumulation.push(w.attractor.clone());
    }
    accumulation.sort();
    accumulation.dedup();
    LazyHomeo {
        source: LazySource::Product(Arc::new(ProductData {
            spec: spec.clone(),
            geoms,
        })),
        accumulation_points: accumulation,
    }
}

/// Locate the unique support piece `T^n S^m (Z)` containing `x`, returning
/// `(term index n, m, pulled-back point in Z)`.
fn locate(d: &ProductData, x: &Rational) -> Option<(usize, usize, Rational)> {
    let term_count = d.spec.terms.len();
    let mut y = x.clone();
    for n in 0..term_count {
        if n > 0 {
            y = d.spec.mover_t.eval_inverse(&y);
        }
        for g in &d.geoms {
            if !g.s_span.contains(&y) {
                continue;
            }
            let mut u = y.clone();
            let mut m = 0usize;
            loop {
                if u >= g.z_lo && u <= g.z_hi {
                    return Some((n, m, u));
                }
                let past = if g.s_rightward {
                    u < g.z_lo
                } else {
                    u > g.z_hi
                };
                if past || !g.s_span.contains(&u) {
                    break;
                }
                let next = d.spec.mover_s.eval_inverse(&u);
                if next == u {
                    break; // fixed point of the mover
                }
                u = next;
                m += 1;
                assert!(m <= ITER_GUARD, "locate: mover iteration guard exceeded");
            }
            break; // s-spans are disjoint: no other component can contain y
        }
    }
    None
}

fn eval_product(d: &ProductData, x: &Rational, inverse: bool) -> Rational {
    match locate(d, x) {
        None => x.clone(),
        Some((n, m, z_point)) => {
            let term = &d.spec.terms[n];
            let mut v = if inverse {
                term.eval_inverse(&z_point)
            } else {
                term.eval(&z_point)
            };
            for _ in 0..m {
                v = d.spec.mover_s.eval(&v);
            }
            for _ in 0..n {
                v = d.spec.mover_t.eval(&v);
            }
            v
        }
    }
}

/// Compose the finitely many conjugates whose supports meet the window.
fn materialize_product(d: &ProductData, w: &Window) -> PLMap {
    let term_count = d.spec.terms.len();
    let mut active: Vec<(usize, usize)> = Vec::new();
    for g in d.geoms.iter() {
        for n in 0..term_count {
            // pull the window back through T^n and clip to the S support span
            let mut lo = w.lo.clone();
            let mut hi = w.hi.clone();
            for _ in 0..n {
                lo = d.spec.mover_t.eval_inverse(&lo);
                hi = d.spec.mover_t.eval_inverse(&hi);
            }
            let clipped = Span::bounded(lo, hi).intersection(&g.s_span);
            let (wlo, whi) = match clipped {
                Some(s) => (s.lo.unwrap(), s.hi.unwrap()),
                None => continue,
            };
            let mut m_lo = g.z_lo.clone();
            let mut m_hi = g.z_hi.clone();
            let mut m = 0usize;
            loop {
                let passed = if g.s_rightward {
                    m_lo > whi
                } else {
                    m_hi < wlo
                };
                if passed {
                    break;
                }
                if m_hi >= wlo && m_lo <= whi && !active.contains(&(n, m)) {
                    active.push((n, m));
                }
                m_lo = d.spec.mover_s.eval(&m_lo);
                m_hi = d.spec.mover_s.eval(&m_hi);
                m += 1;
                assert!(
                    m <= ITER_GUARD,
                    "materialize: window closure must stay clear of the accumulation set"
                );
            }
        }
    }
    active.sort();
    let mut out = PLMap::identity();
    for (n, m) in active {
        let conjugator = d.spec.mover_t.pow(n as i64).compose(&d.spec.mover_s.pow(m as i64));
        let piece = d.spec.terms[n].conjugate_by(&conjugator);
        out = piece.compose(&out);
    }
    out
}
