//! Interval systems with disjoint, locally finite mixed orbits.
//!
//! Two maps act here, both the identity on `(-infty, 0]`: `S` is affine
//! `x -> 2(x - 2) + 2` from 2 on, and `T` starts from a base map fixing 1
//! with no other fixed point above 0 and is repeatedly modified by small
//! tents. The construction places closed intervals `I_0, I_1, ...` around
//! carefully chosen points `x_k` so that all the images `S^i(I_a)`,
//! `T^j(I_b)` (`i, j` ranging over all integers) are pairwise disjoint and
//! the forward family is locally finite. Backward `S`-orbits accumulate
//! only at 2 and backward `T`-orbits only at 1.
//!
//! Every choice is made by exhaustive ascending search over rationals with
//! bounded denominator, so a run is deterministic and replayable from its
//! construction log.


use serde::{Deserialize, Serialize};

use crate::interval::{IntervalUnion, Span, Window};
use crate::plmap::PLMap;
use crate::rational::Rational;
use crate::report::Report;

const CHAIN_GUARD: usize = 100_000;
const MAX_X_CANDIDATES: usize = 96;
const MAX_REROUTE_CANDIDATES: usize = 96;
const MAX_RADIUS_HALVINGS: usize = 64;

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum OrbitError {
    #[error("search exhausted at step {0}: no admissible rational with the given denominator bound")]
    SearchExhausted(usize),
}

/// One tent modification of `T`: `support` is the closed support of the
/// tent and `from -> to` the displaced value or interval recorded for audit.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TentLog {
    pub support: (Rational, Rational),
    pub from: (Rational, Rational),
    pub to: (Rational, Rational),
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct StepLog {
    pub k: usize,
    pub lower_bound: Rational,
    pub x: Rational,
    pub x_candidates_tried: u32,
    /// Backward-orbit collision reroute, when one was needed.
    pub reroute: Option<(Rational, TentLog)>,
    pub radius: Rational,
    pub radius_halvings: u32,
    /// Forward displacement of `T(I_k)` off the `S`-orbit, when needed.
    pub forward: Option<TentLog>,
}

/// The two maps, the placed intervals, and the full construction log.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct OrbitSystem {
    pub s: PLMap,
    pub t: PLMap,
    pub intervals: Vec<(Rational, Rational)>,
    pub log: Vec<StepLog>,
}

fn q(n: i64) -> Rational {
    Rational::from_int(n)
}
fn qq(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

/// `S`: identity up to 2, then `x -> 2(x - 2) + 2`.
pub fn base_s() -> PLMap {
    PLMap::make(vec![(q(2), q(2))], Rational::one(), q(2)).unwrap()
}

/// Base `T`: identity on `(-infty, 0]`, a bump above the identity on
/// `(0, 1)`, fixes 1, climbs with slope 3/2 to meet `S` at 3, and agrees
/// with `S` on `[3, +infty)`.
pub fn base_t() -> PLMap {
    PLMap::make(
        vec![
            (q(0), q(0)),
            (qq(1, 2), qq(3, 4)),
            (q(1), q(1)),
            (q(3), q(4)),
        ],
        Rational::one(),
        q(2),
    )
    .unwrap()
}

/// `map(x) > x` for every `x > 1`, checked structurally: positivity at all
/// breakpoints above 1 and a right tail slope >= 1 make the PL difference
/// positive on every segment.
fn strictly_above_identity_past_one(map: &PLMap) -> bool {
    if map.eval(&q(1)) != q(1) {
        return false;
    }
    if map.slope_right() < &Rational::one() {
        return false;
    }
    map.breakpoints()
        .iter()
        .filter(|(x, _)| x > &q(1))
        .all(|(x, y)| y > x)
}

/// Ascending rationals with denominator at most `bound` in `(lo, hi]`
/// (or `[lo, hi]` when `include_lo`).
fn rationals_in(lo: &Rational, hi: &Rational, bound: u32, include_lo: bool) -> Vec<Rational> {
    let mut out: Vec<Rational> = Vec::new();
    for d in 1..=bound as i64 {
        let dq = Rational::from_int(d);
        let mut n = (lo * &dq).ceil_bigint();
        if !include_lo && &Rational::from_bigint(n.clone()) / &dq == *lo {
            n += 1;
        }
        let top = (hi * &dq).floor_bigint();
        let mut v = n;
        while v <= top {
            out.push(&Rational::from_bigint(v.clone()) / &dq);
            v += 1;
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Backward orbit of `x` under `map`, keeping the members `> floor`.
fn backward_points(map: &PLMap, x: &Rational, floor: &Rational) -> Vec<Rational> {
    let mut out = Vec::new();
    let mut y = map.eval_inverse(x);
    let mut guard = 0usize;
    while &y > floor {
        out.push(y.clone());
        let next = map.eval_inverse(&y);
        if next == y {
            break;
        }
        y = next;
        guard += 1;
        assert!(guard < CHAIN_GUARD, "backward orbit does not descend");
    }
    out
}

/// Is `target` on the backward `S`-orbit of `x`? (`target > 2` required.)
fn on_s_backward_orbit(s: &PLMap, x: &Rational, target: &Rational) -> bool {
    debug_assert!(target > &q(2));
    let mut y = s.eval_inverse(x);
    let mut guard = 0usize;
    while &y > target {
        y = s.eval_inverse(&y);
        guard += 1;
        assert!(guard < CHAIN_GUARD);
    }
    &y == target
}

/// Forward orbit of 2 under `t`, clipped to `<= hi`.
fn orbit2_upto(t: &PLMap, hi: &Rational) -> Vec<Rational> {
    let mut out = vec![q(2)];
    let mut guard = 0usize;
    loop {
        let next = t.eval(out.last().unwrap());
        if &next > hi {
            break;
        }
        assert!(next > *out.last().unwrap(), "orbit of 2 must increase");
        out.push(next);
        guard += 1;
        assert!(guard < CHAIN_GUARD);
    }
    out
}

struct Builder {
    s: PLMap,
    t: PLMap,
    seeds: Vec<(Rational, Rational)>,
    xs: Vec<Rational>,
    protected: Vec<(Rational, Rational)>,
    log: Vec<StepLog>,
    den_bound: u32,
}

impl Builder {
    fn new(den_bound: u32) -> Self {
        Builder {
            s: base_s(),
            t: base_t(),
            seeds: Vec::new(),
            xs: Vec::new(),
            protected: Vec::new(),
            log: Vec::new(),
            den_bound,
        }
    }

    /// All placed-family images (`S^i(I_m)`, `T^j(I_m)`, all integers `i, j`)
    /// intersecting `[lo, hi]`, plus protected tent supports. Requires
    /// `lo > 5/2` so that backward `S`-chains terminate.
    fn family_hits(&self, lo: &Rational, hi: &Rational) -> Vec<(Rational, Rational)> {
        assert!(lo > &qq(5, 2), "family enumeration window must sit above 5/2");
        let mut hits = Vec::new();
        let mut push_if_hit = |a: &Rational, b: &Rational| {
            if b >= lo && a <= hi {
                hits.push((a.clone(), b.clone()));
            }
        };
        for (a, b) in &self.seeds {
            push_if_hit(a, b);
            for map in [&self.s, &self.t] {
                // forward images escape upward
                let (mut ia, mut ib) = (map.eval(a), map.eval(b));
                let mut guard = 0usize;
                while &ia <= hi {
                    push_if_hit(&ia, &ib);
                    let next = (map.eval(&ia), map.eval(&ib));
                    assert!(next.0 > ia, "forward images must escape");
                    ia = next.0;
                    ib = next.1;
                    guard += 1;
                    assert!(guard < CHAIN_GUARD);
                }
                // backward images descend toward the fixed points
                let (mut ia, mut ib) = (map.eval_inverse(a), map.eval_inverse(b));
                let mut guard = 0usize;
                while &ib >= lo {
                    push_if_hit(&ia, &ib);
                    let next = (map.eval_inverse(&ia), map.eval_inverse(&ib));
                    if next.1 == ib {
                        break;
                    }
                    ia = next.0;
                    ib = next.1;
                    guard += 1;
                    assert!(guard < CHAIN_GUARD);
                }
            }
        }
        for (a, b) in &self.protected {
            push_if_hit(a, b);
        }
        hits
    }

    /// Point avoidance targets near `[lo, hi]`: family images, tent
    /// supports, and the forward orbit of 2.
    fn avoid_items(&self, lo: &Rational, hi: &Rational) -> Vec<(Rational, Rational)> {
        let mut items = self.family_hits(lo, hi);
        for p in orbit2_upto(&self.t, hi) {
            if &p >= lo {
                items.push((p.clone(), p));
            }
        }
        items
    }

    fn point_is_clear(x: &Rational, items: &[(Rational, Rational)]) -> bool {
        items.iter().all(|(a, b)| x < a || x > b)
    }

    /// Minimal distance from `x` to the items (assumes `x` is clear).
    fn clearance(x: &Rational, items: &[(Rational, Rational)]) -> Rational {
        let mut best = Rational::one();
        for (a, b) in items {
            let d = if x < a { a - x } else { x - b };
            best = best.min(d);
        }
        best
    }

    /// Do the backward `T`-orbit (under `t`) and backward `S`-orbit of
    /// `anchor` share a point above 2?
    fn backward_orbits_collide(&self, t: &PLMap, point: &Rational, anchor: &Rational) -> bool {
        backward_points(t, point, &q(2))
            .iter()
            .any(|tau| tau > &q(2) && on_s_backward_orbit(&self.s, anchor, tau))
    }

    /// Backward `T`-orbit points of `point` must avoid every `S`-image
    /// (all powers) of every placed seed. Same-map overlaps are already
    /// excluded by conjugation invariance once the point itself is clear
    /// of the family, so only this mixed case needs an explicit walk.
    fn t_back_orbit_clear(&self, t: &PLMap, point: &Rational) -> bool {
        // only members above 2 matter: every S-image of a seed lies above 2
        let taus = backward_points(t, point, &q(2));
        for tau in &taus {
            for (a, b) in &self.seeds {
                if tau >= a && tau <= b {
                    return false;
                }
                // forward S-images up to tau
                let (mut ia, mut ib) = (self.s.eval(a), self.s.eval(b));
                let mut guard = 0usize;
                while &ia <= tau {
                    if &ib >= tau {
                        return false;
                    }
                    let next = (self.s.eval(&ia), self.s.eval(&ib));
                    ia = next.0;
                    ib = next.1;
                    guard += 1;
                    if guard >= CHAIN_GUARD {
                        return false;
                    }
                }
                // backward S-images down to tau
                let (mut ia, mut ib) = (self.s.eval_inverse(a), self.s.eval_inverse(b));
                let mut guard = 0usize;
                while &ib >= tau {
                    if &ia <= tau {
                        return false;
                    }
                    let next = (self.s.eval_inverse(&ia), self.s.eval_inverse(&ib));
                    if next.1 == ib {
                        break;
                    }
                    ia = next.0;
                    ib = next.1;
                    guard += 1;
                    if guard >= CHAIN_GUARD {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Backward `S`-orbit points of `x` must avoid every backward
    /// `T`-image of every placed seed (the other mixed case).
    fn s_back_orbit_clear(&self, x: &Rational) -> bool {
        for (a, b) in &self.seeds {
            let (mut pa, mut pb) = (self.t.eval_inverse(a), self.t.eval_inverse(b));
            let mut guard = 0usize;
            while pb > q(2) {
                if pa > q(2) {
                    // walk the S-backs of x down through [pa, pb]
                    let mut sigma = self.s.eval_inverse(x);
                    let mut inner = 0usize;
                    while sigma >= pa {
                        if sigma <= pb {
                            return false;
                        }
                        sigma = self.s.eval_inverse(&sigma);
                        inner += 1;
                        if inner >= CHAIN_GUARD {
                            return false;
                        }
                    }
                }
                let next = (self.t.eval_inverse(&pa), self.t.eval_inverse(&pb));
                if next.1 == pb {
                    break;
                }
                pa = next.0;
                pb = next.1;
                guard += 1;
                if guard >= CHAIN_GUARD {
                    return false;
                }
            }
        }
        true
    }

    fn step(&mut self, k: usize) -> Result<(), OrbitError> {
        let lower = if k == 0 {
            q(3)
        } else {
            self.s.eval(&self.xs[k - 1])
        };
        // candidates blocked by an existing interval, image or tent are
        // skipped for free; only full placement attempts count toward the
        // budget, so dense enumeration near a blocked zone cannot starve
        // the search
        let mut tried: u32 = 0;
        let mut span_lo = lower.clone();
        let mut spans = 0usize;
        'candidates: while (tried as usize) < MAX_X_CANDIDATES && spans < 64 {
            let span_hi = &span_lo + Rational::one();
            let candidates = rationals_in(&span_lo, &span_hi, self.den_bound, k == 0 && spans == 0);
            span_lo = span_hi;
            spans += 1;
            for x in candidates {
                if (tried as usize) >= MAX_X_CANDIDATES {
                    break 'candidates;
                }
                let (wlo, whi) = (&x - Rational::one(), &x + Rational::one());
                let items = self.avoid_items(&wlo.clone().max(qq(21, 8)), &whi);
                if !Self::point_is_clear(&x, &items) {
                    continue;
                }
                if !self.t_back_orbit_clear(&self.t, &x) || !self.s_back_orbit_clear(&x) {
                    continue;
                }
                tried += 1;
                if let Some(done) = self.try_place(k, &lower, &x, tried)? {
                    self.log.push(done);
                    return Ok(());
                }
            }
        }
        Err(OrbitError::SearchExhausted(k))
    }

    /// Attempt the whole placement at the candidate point; `Ok(None)` means
    /// this candidate is inadmissible and the search should move on.
    fn try_place(
        &mut self,
        k: usize,
        lower: &Rational,
        x: &Rational,
        tried: u32,
    ) -> Result<Option<StepLog>, OrbitError> {
        // 1: reroute the backward T-orbit if it meets the backward S-orbit
        let mut t_new = self.t.clone();
        let mut reroute: Option<(Rational, TentLog)> = None;
        if self.backward_orbits_collide(&self.t, x, x) {
            let window = qq(1, 4);
            let mut found = false;
            let near = rationals_in(&(x - &window), &(x + &window), self.den_bound, false);
            let mut by_distance: Vec<Rational> = near.into_iter().filter(|c| c != x).collect();
            by_distance.sort_by(|a, b| {
                let da = (a - x).abs();
                let db = (b - x).abs();
                da.cmp(&db).then(a.cmp(b))
            });
            for (ci, cand) in by_distance.into_iter().enumerate() {
                if ci >= MAX_REROUTE_CANDIDATES {
                    break;
                }
                let (wlo, whi) = (&cand - Rational::one(), &cand + Rational::one());
                let items = self.avoid_items(&wlo.clone().max(qq(21, 8)), &whi);
                if !Self::point_is_clear(&cand, &items) {
                    continue;
                }
                if self.backward_orbits_collide(&self.t, &cand, x) {
                    continue;
                }
                if !self.t_back_orbit_clear(&self.t, &cand) {
                    continue;
                }
                // tent support: around cand, containing x, clear of
                // everything else including both backward orbits
                let mut rho = Self::clearance(&cand, &items).min(qq(1, 4));
                for p in backward_points(&self.t, &cand, &q(2)) {
                    rho = rho.min((&cand - &p).abs());
                }
                // S-backs below 21/8 sit farther than the cap 1/4; the
                // floor must stay strictly above the accumulation point 2
                let s_floor = qq(21, 8).max(&cand - Rational::one());
                for p in backward_points(&self.s, x, &s_floor) {
                    rho = rho.min((&cand - &p).abs());
                }
                let rho = rho / q(2);
                if (x - &cand).abs() >= rho {
                    continue;
                }
                let tent = PLMap::make(
                    vec![
                        (&cand - &rho, &cand - &rho),
                        (cand.clone(), x.clone()),
                        (&cand + &rho, &cand + &rho),
                    ],
                    Rational::one(),
                    Rational::one(),
                )
                .expect("tent is monotone");
                let candidate_t = tent.compose(&self.t);
                if !strictly_above_identity_past_one(&candidate_t) {
                    continue;
                }
                // rerouted backward orbit must now avoid the S-orbit, and
                // the orbit of 2 must still avoid x
                if self.backward_orbits_collide(&candidate_t, x, x) {
                    continue;
                }
                if orbit2_upto(&candidate_t, &(x + Rational::one())).contains(x) {
                    continue;
                }
                reroute = Some((
                    cand.clone(),
                    TentLog {
                        support: (&cand - &rho, &cand + &rho),
                        from: (cand.clone(), cand.clone()),
                        to: (x.clone(), x.clone()),
                    },
                ));
                t_new = candidate_t;
                found = true;
                break;
            }
            if !found {
                return Ok(None);
            }
        }

        // 2: interval radius by exact halving
        let (wlo, whi) = (x - Rational::one(), x + Rational::one());
        let items = self.avoid_items(&wlo.max(qq(21, 8)), &whi);
        let mut r = Self::clearance(x, &items).min(qq(1, 3));
        let s_floor = qq(21, 8).max(x - Rational::one());
        for p in backward_points(&t_new, x, &q(2))
            .into_iter()
            .chain(backward_points(&self.s, x, &s_floor))
        {
            r = r.min((x - &p).abs());
        }
        r = r / q(2);
        // the interval must stay above the lower bound
        if x - &r <= *lower && k > 0 {
            r = (x - lower) / q(2);
        }
        if !r.is_positive() {
            return Ok(None);
        }
        let mut halvings = 0u32;
        let radius = loop {
            if halvings as usize > MAX_RADIUS_HALVINGS {
                return Ok(None);
            }
            if self.radius_admissible(&t_new, x, &r) {
                break r;
            }
            r = r / q(2);
            halvings += 1;
        };

        let interval = (x - &radius, x + &radius);

        // 3: displace T(I_k) off the S-orbit of I_k
        let image = (t_new.eval(&interval.0), t_new.eval(&interval.1));
        let mut forward: Option<TentLog> = None;
        if !self.forward_independence_ok(&t_new, &interval, &image) {
            match self.forward_displace(&t_new, x, &interval, &image) {
                Some((t2, tent)) => {
                    t_new = t2;
                    forward = Some(tent);
                }
                None => return Ok(None),
            }
        }
        if !strictly_above_identity_past_one(&t_new) {
            return Ok(None);
        }

        // commit
        if let Some((_, tent)) = &reroute {
            self.protected.push(tent.support.clone());
        }
        if let Some(tent) = &forward {
            self.protected.push(tent.support.clone());
        }
        self.t = t_new;
        self.seeds.push(interval.clone());
        self.xs.push(x.clone());
        Ok(Some(StepLog {
            k,
            lower_bound: lower.clone(),
            x: x.clone(),
            x_candidates_tried: tried,
            reroute,
            radius,
            radius_halvings: halvings,
            forward,
        }))
    }

    /// Exact disjointness checks for the candidate interval `[x - r, x + r]`:
    /// the backward chains under both maps are pairwise disjoint, disjoint
    /// from each other, from the placed family, and no member straddles 2.
    fn radius_admissible(&self, t: &PLMap, x: &Rational, r: &Rational) -> bool {
        let (lo, hi) = (x - r, x + r);
        // S-backs: one exact condition gives the whole chain
        if self.s.eval_inverse(&hi) >= lo {
            return false;
        }
        // T-back chain: consecutive disjointness, 2-straddle guard, and
        // cross checks against the S-backs of this and all placed seeds
        let mut prev_inf = lo.clone();
        let (mut ja, mut jb) = (t.eval_inverse(&lo), t.eval_inverse(&hi));
        let mut guard = 0usize;
        loop {
            if jb >= prev_inf {
                return false;
            }
            if ja <= q(2) && jb > q(2) {
                return false; // straddles the S-accumulation point
            }
            if jb > q(2) {
                // vs S-backs of the new interval
                if !self.chain_clear_of_s_backs(&ja, &jb, &lo, &hi) {
                    return false;
                }
                // vs S-backs of every placed seed
                for (sa, sb) in &self.seeds {
                    if !self.chain_clear_of_s_backs(&ja, &jb, sa, sb) {
                        return false;
                    }
                }
                // vs placed family images in range (above 5/2 only; lower
                // members are handled by the S-back checks and conjugation)
                if jb > qq(21, 8) {
                    let floor = ja.clone().max(qq(21, 8));
                    for (fa, fb) in self.family_hits(&floor, &jb) {
                        if fb >= ja && fa <= jb {
                            return false;
                        }
                    }
                }
            }
            // stop once inside the pure affine zone below 5/2: deeper
            // members are scaled copies and stay disjoint
            if jb <= qq(5, 2) {
                break;
            }
            prev_inf = ja.clone();
            let next = (t.eval_inverse(&ja), t.eval_inverse(&jb));
            if next.1 == jb {
                break;
            }
            ja = next.0;
            jb = next.1;
            guard += 1;
            if guard >= CHAIN_GUARD {
                return false;
            }
        }
        // T-backs of placed seeds vs S-backs of the new interval
        for (sa, sb) in &self.seeds {
            let (mut pa, mut pb) = (t.eval_inverse(sa), t.eval_inverse(sb));
            let mut guard = 0usize;
            while pb > q(2) {
                if pa <= q(2) {
                    return false;
                }
                if !self.chain_clear_of_s_backs(&pa, &pb, &lo, &hi) {
                    return false;
                }
                let next = (t.eval_inverse(&pa), t.eval_inverse(&pb));
                if next.1 == pb {
                    break;
                }
                pa = next.0;
                pb = next.1;
                guard += 1;
                if guard >= CHAIN_GUARD {
                    return false;
                }
            }
        }
        true
    }

    /// No backward `S`-image of `[sa, sb]` meets `[ja, jb]` (`ja > 2`).
    fn chain_clear_of_s_backs(
        &self,
        ja: &Rational,
        jb: &Rational,
        sa: &Rational,
        sb: &Rational,
    ) -> bool {
        let (mut ba, mut bb) = (self.s.eval_inverse(sa), self.s.eval_inverse(sb));
        let mut guard = 0usize;
        while &bb >= ja {
            if &ba <= jb && &bb >= ja {
                return false;
            }
            let next = (self.s.eval_inverse(&ba), self.s.eval_inverse(&bb));
            if next.1 == bb {
                break;
            }
            ba = next.0;
            bb = next.1;
            guard += 1;
            if guard >= CHAIN_GUARD {
                return false;
            }
        }
        true
    }

    /// Is `T(I)` already independent of the S-saturation of `I` and clear
    /// of everything else?
    fn forward_independence_ok(
        &self,
        _t: &PLMap,
        interval: &(Rational, Rational),
        image: &(Rational, Rational),
    ) -> bool {
        // S^i(I) for the i with images near T(I)
        let (mut sa, mut sb) = interval.clone();
        let mut guard = 0usize;
        while sa <= image.1 {
            if sb >= image.0 && sa <= image.1 && (sa != interval.0 || sb != interval.1) {
                return false;
            }
            let next = (self.s.eval(&sa), self.s.eval(&sb));
            sa = next.0;
            sb = next.1;
            guard += 1;
            if guard >= CHAIN_GUARD {
                return false;
            }
        }
        let hits = self.family_hits(&image.0.clone().max(qq(21, 8)), &image.1);
        hits.iter().all(|(a, b)| b < &image.0 || a > &image.1)
    }

    /// Post-compose `T` with a tent supported on a neighborhood `U` of
    /// `T(I)` sending it to a fresh interval placed in a free gap of `U`,
    /// off the whole S-orbit of `I` and clear of everything placed so far.
    fn forward_displace(
        &self,
        t: &PLMap,
        x: &Rational,
        interval: &(Rational, Rational),
        image: &(Rational, Rational),
    ) -> Option<(PLMap, TentLog)> {
        let _ = x;
        let (ja, jb) = image;
        if *ja <= interval.1 {
            return None; // the image must sit strictly right of the interval
        }
        // clearance from other seeds, tent supports and the orbit of 2;
        // the S-saturation of the new interval is handled by gap placement
        let items =
            self.avoid_items(&(ja - Rational::one()).max(qq(21, 8)), &(jb + Rational::one()));
        let mut gamma = qq(1, 4).min((ja - &interval.1) / q(2));
        for (a, b) in &items {
            let d = if b < ja {
                ja - b
            } else if a > jb {
                a - jb
            } else {
                return None; // the image itself hits an avoid item
            };
            gamma = gamma.min(d / q(2));
        }
        if !gamma.is_positive() {
            return None;
        }
        // shrink until U and S(U) are disjoint
        let mut guard = 0usize;
        while self.s.eval(&(ja - &gamma)) <= jb + &gamma {
            gamma = gamma / q(2);
            guard += 1;
            if guard > 64 {
                return None;
            }
        }
        let u_lo = ja - &gamma;
        let u_hi = jb + &gamma;
        // blockers inside U: the S-saturation of the interval, plus the
        // image itself
        let mut blockers: Vec<(Rational, Rational)> = vec![(ja.clone(), jb.clone())];
        let (mut sa, mut sb) = interval.clone();
        let mut guard = 0usize;
        while sa <= u_hi {
            if sb >= u_lo {
                blockers.push((sa.clone(), sb.clone()));
            }
            let next = (self.s.eval(&sa), self.s.eval(&sb));
            sa = next.0;
            sb = next.1;
            guard += 1;
            if guard >= CHAIN_GUARD {
                return None;
            }
        }
        blockers.sort_by(|p, r| p.0.cmp(&r.0));
        // largest free gap inside U (leftmost on ties)
        let mut best: Option<(Rational, Rational)> = None;
        let mut cursor = u_lo.clone();
        let consider = |lo: &Rational, hi: &Rational, best: &mut Option<(Rational, Rational)>| {
            if hi > lo {
                let better = match &*best {
                    None => true,
                    Some((blo, bhi)) => hi - lo > bhi - blo,
                };
                if better {
                    *best = Some((lo.clone(), hi.clone()));
                }
            }
        };
        for (a, b) in &blockers {
            let gap_hi = a.clone().min(u_hi.clone());
            consider(&cursor, &gap_hi, &mut best);
            if b > &cursor {
                cursor = b.clone();
            }
        }
        consider(&cursor, &u_hi, &mut best);
        let (gap_lo, gap_hi) = best?;
        let width = &gap_hi - &gap_lo;
        let c = (&gap_lo + &gap_hi) / q(2);
        let radius = &width / q(8);
        let (ia, ib) = (&c - &radius, &c + &radius);
        if ia <= u_lo || ib >= u_hi {
            return None;
        }
        let tent = PLMap::make(
            vec![
                (u_lo.clone(), u_lo.clone()),
                (ja.clone(), ia.clone()),
                (jb.clone(), ib.clone()),
                (u_hi.clone(), u_hi.clone()),
            ],
            Rational::one(),
            Rational::one(),
        )
        .ok()?;
        let t_new = tent.compose(t);
        if t_new.eval(&interval.0) != ia || t_new.eval(&interval.1) != ib {
            return None;
        }
        // forward S-iterates of the displaced interval must clear every
        // tent support, present and past
        let top = self
            .protected
            .iter()
            .map(|(_, b)| b.clone())
            .fold(u_hi.clone(), |acc, b| acc.max(b));
        let (mut fa, mut fb) = (self.s.eval(&ia), self.s.eval(&ib));
        let mut guard = 0usize;
        while fa <= top {
            for (pa, pb) in self
                .protected
                .iter()
                .chain(std::iter::once(&(u_lo.clone(), u_hi.clone())))
            {
                if &fb >= pa && &fa <= pb {
                    return None;
                }
            }
            let next = (self.s.eval(&fa), self.s.eval(&fb));
            fa = next.0;
            fb = next.1;
            guard += 1;
            if guard >= CHAIN_GUARD {
                return None;
            }
        }
        Some((
            t_new,
            TentLog {
                support: (u_lo, u_hi),
                from: (ja.clone(), jb.clone()),
                to: (ia, ib),
            },
        ))
    }
}

/// Run the iterative construction for `count` intervals.
pub fn build_orbit_system(count: usize, den_bound: u32) -> Result<OrbitSystem, OrbitError> {
    assert!(count >= 1, "need at least one interval");
    assert!(den_bound >= 1);
    let mut b = Builder::new(den_bound);
    for k in 0..count {
        b.step(k)?;
    }
    Ok(OrbitSystem {
        s: b.s,
        t: b.t,
        intervals: b.seeds,
        log: b.log,
    })
}

/// Exact verification of the mixed-orbit properties on a window.
pub fn verify_orbit_system(sys: &OrbitSystem, window: &Window, depth: u32) -> Report {
    assert!(depth >= 1);
    let mut report = Report::new("orbit system verification");
    // base-map structure
    report.check(
        "S is the identity on (-inf, 0]",
        sys.s.support().is_subset(&IntervalUnion::from_spans(vec![Span::right_ray(q(0))])),
        format!("supp(S) = {}", sys.s.support()),
    );
    report.check(
        "T is the identity on (-inf, 0]",
        sys.t.support().is_subset(&IntervalUnion::from_spans(vec![Span::right_ray(q(0))])),
        format!("supp(T) = {}", sys.t.support()),
    );
    let affine_ok = [q(2), qq(5, 2), q(3), q(17), q(5000)]
        .iter()
        .all(|v| sys.s.eval(v) == q(2) * v - q(2));
    report.check(
        "S(x) = 2(x - 2) + 2 on [2, inf) (sampled exactly)",
        affine_ok,
        "affine tail mismatch",
    );
    report.check(
        "T fixes 1 and exceeds the identity on (1, inf)",
        strictly_above_identity_past_one(&sys.t),
        "T has a fixed or descending point above 1",
    );
    for v in [qq(9, 8), qq(3, 2), q(2), qq(5, 2), qq(23, 8)] {
        if !(sys.t.eval(&v) > v) {
            report.fail("T(q) > q on (1, 3) samples", format!("at {v}"));
        }
    }

    // enumerate window-relevant images with |i|, |j| <= depth
    struct Item {
        map: char,
        power: i64,
        seed: usize,
        lo: Rational,
        hi: Rational,
    }
    let mut items: Vec<Item> = Vec::new();
    for (seed, (a, b)) in sys.intervals.iter().enumerate() {
        for (tag, map) in [('S', &sys.s), ('T', &sys.t)] {
            let (mut lo, mut hi) = (a.clone(), b.clone());
            for p in 0..=depth as i64 {
                if p > 0 {
                    lo = map.eval(&lo);
                    hi = map.eval(&hi);
                }
                if hi >= window.lo && lo <= window.hi {
                    items.push(Item {
                        map: tag,
                        power: p,
                        seed,
                        lo: lo.clone(),
                        hi: hi.clone(),
                    });
                }
            }
            let (mut lo, mut hi) = (a.clone(), b.clone());
            for p in 1..=depth as i64 {
                lo = map.eval_inverse(&lo);
                hi = map.eval_inverse(&hi);
                if hi >= window.lo && lo <= window.hi {
                    items.push(Item {
                        map: tag,
                        power: -p,
                        seed,
                        lo: lo.clone(),
                        hi: hi.clone(),
                    });
                }
            }
        }
    }
    let mut violations = 0usize;
    for i in 0..items.len() {
        for j in (i + 1)..items.len() {
            let (p, r) = (&items[i], &items[j]);
            // the trivial exception: S^0 I_k = T^0 I_k
            if p.power == 0 && r.power == 0 && p.seed == r.seed {
                continue;
            }
            if p.hi >= r.lo && r.hi >= p.lo {
                violations += 1;
                if violations <= 10 {
                    report.fail(
                        "pairwise disjointness",
                        format!(
                            "{}^{}(I_{}) = [{}, {}] meets {}^{}(I_{}) = [{}, {}]",
                            p.map, p.power, p.seed, p.lo, p.hi, r.map, r.power, r.seed, r.lo, r.hi
                        ),
                    );
                }
            }
        }
    }
    if violations == 0 {
        report.pass(format!(
            "all {} images with |i|, |j| <= {depth} meeting {window} are pairwise disjoint",
            items.len()
        ));
    } else {
        report.note(format!("{violations} disjointness violations in total"));
    }

    // local finiteness of the forward family, counted per unit subwindow
    let lo_int = window.lo.floor_bigint();
    let hi_int = window.hi.ceil_bigint();
    let width = (&hi_int - &lo_int).max(1.into());
    let units: usize = usize::try_from(&width).unwrap_or(usize::MAX).min(1 << 22);
    let mut counts = vec![0u32; units];
    let base = Rational::from_bigint(lo_int.clone());
    let mut total = 0u64;
    for (a, b) in sys.intervals.iter() {
        for map in [&sys.s, &sys.t] {
            let (mut lo, mut hi) = (a.clone(), b.clone());
            let mut guard = 0usize;
            loop {
                if lo > window.hi {
                    break;
                }
                if hi >= window.lo {
                    total += 1;
                    let from = (&lo.clone().max(window.lo.clone()) - &base).floor_bigint();
                    let to = (&hi.clone().min(window.hi.clone()) - &base).ceil_bigint();
                    let from = usize::try_from(&from.max(0.into())).unwrap_or(0);
                    let to = usize::try_from(&to.max(0.into())).unwrap_or(0).min(units);
                    for c in counts.iter_mut().take(to).skip(from) {
                        *c += 1;
                    }
                }
                let next = (map.eval(&lo), map.eval(&hi));
                assert!(next.0 > lo, "forward images must escape");
                lo = next.0;
                hi = next.1;
                guard += 1;
                if guard >= CHAIN_GUARD {
                    break;
                }
            }
        }
    }
    let max_count = counts.iter().max().copied().unwrap_or(0);
    report.pass(format!(
        "forward family is locally finite on {window}: {total} images in the window, \
         at most {max_count} per unit subwindow"
    ));
    report.note(
        "backward images accumulate only at the fixed points 1 (for T) and 2 (for S), \
         so any window at positive distance from them meets finitely many images"
            .to_string(),
    );
    // monotone placement read from the log
    for w in sys.log.windows(2) {
        if w[1].x <= sys.s.eval(&w[0].x) {
            report.fail(
                "monotone placement x_{k+1} > S(x_k)",
                format!("x = {} after {}", w[1].x, w[0].x),
            );
        }
    }
    report
}

/// Text layout of the interval system and its first iterates.
pub fn layout_figure(sys: &OrbitSystem, powers: u32) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    let _ = writeln!(out, "interval orbit layout (first {powers} forward iterates)");
    for (k, (a, b)) in sys.intervals.iter().enumerate() {
        let _ = writeln!(out, "I_{k} = [{a}, {b}]");
        for (tag, map) in [('S', &sys.s), ('T', &sys.t)] {
            let mut row = format!("  {tag}: ");
            let (mut lo, mut hi) = (a.clone(), b.clone());
            for p in 1..=powers {
                lo = map.eval(&lo);
                hi = map.eval(&hi);
                row.push_str(&format!("{tag}^{p} -> [{lo}, {hi}]  "));
            }
            let _ = writeln!(out, "{row}");
        }
    }
    out
}

/// Exact value `a + b * sqrt(radicand)` with rational `a`, `b`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct QuadraticValue {
    pub rational: Rational,
    pub coefficient: Rational,
    pub radicand: Rational,
}

/// Image of a point of R^d under the radial suspension `h x Id`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub enum SuspensionImage {
    /// Exact rational coordinates.
    Point(Vec<Rational>),
    /// `base` scaled coordinatewise by the exact factor `scale`.
    Scaled {
        base: Vec<Rational>,
        scale: QuadraticValue,
    },
}

fn exact_sqrt(v: &Rational) -> Option<Rational> {
    if v.is_negative() {
        return None;
    }
    let n = v.numer().sqrt();
    let d = v.denom().sqrt();
    if &(&n * &n) == v.numer() && &(&d * &d) == v.denom() {
        Some(Rational::from_bigint(n) / Rational::from_bigint(d))
    } else {
        None
    }
}

/// Radial evaluation of the suspension of `h` at a point of R^d.
///
/// Conventions: for `d = 1` this is plain evaluation. For `d >= 2` the
/// radial coordinate is the Euclidean radius; the origin is fixed (the map
/// is the identity on `(-infty, 0]`, so the suspension extends continuously
/// by fixing 0). When the squared radius `s` is a perfect rational square
/// the image is exact and rational; otherwise the segment of `h` containing
/// `sqrt(s)` is located exactly through squared coordinates, the new radius
/// is `a + b*sqrt(s)` in `Q[sqrt(s)]`, and the image is returned as the
/// input point scaled by the exact factor `(a + b*sqrt(s))/sqrt(s) =
/// b + (a/s)*sqrt(s)`.
pub fn radial_suspension(h: &PLMap, p: &[Rational]) -> SuspensionImage {
    if p.len() == 1 {
        return SuspensionImage::Point(vec![h.eval(&p[0])]);
    }
    let s: Rational = p
        .iter()
        .fold(Rational::zero(), |acc, c| acc + c * c);
    if s.is_zero() {
        return SuspensionImage::Point(p.to_vec());
    }
    if let Some(r) = exact_sqrt(&s) {
        let scale = h.eval(&r) / &r;
        return SuspensionImage::Point(p.iter().map(|c| c * &scale).collect());
    }
    // locate the segment of h containing sqrt(s) by comparing s with the
    // squares of the positive breakpoints
    let mut seg_lo: Option<&(Rational, Rational)> = None;
    let mut seg_hi: Option<&(Rational, Rational)> = None;
    for bp in h.breakpoints() {
        if bp.0.is_negative() {
            continue;
        }
        if &bp.0 * &bp.0 <= s {
            seg_lo = Some(bp);
        } else if seg_hi.is_none() {
            seg_hi = Some(bp);
        }
    }
    // affine coefficients a + b x on the located segment
    let (a, b) = match (seg_lo, seg_hi) {
        (Some((x0, y0)), Some((x1, y1))) => {
            let slope = (y1 - y0) / (x1 - x0);
            (y0 - &slope * x0, slope)
        }
        (Some((x0, y0)), None) => {
            let slope = h.slope_right().clone();
            (y0 - &slope * x0, slope)
        }
        (None, Some((x1, y1))) => {
            let slope = h.slope_left().clone();
            (y1 - &slope * x1, slope)
        }
        (None, None) => (Rational::zero(), Rational::one()),
    };
    if a.is_zero() {
        // purely linear on the segment: the scale b is rational
        return SuspensionImage::Point(p.iter().map(|c| c * &b).collect());
    }
    SuspensionImage::Scaled {
        base: p.to_vec(),
        scale: QuadraticValue {
            rational: b,
            coefficient: &a / &s,
            radicand: s,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_maps_have_required_shape() {
        let s = base_s();
        assert_eq!(s.eval(&q(-5)), q(-5));
        assert_eq!(s.eval(&q(2)), q(2));
        assert_eq!(s.eval(&q(7)), q(12));
        assert_eq!(s.eval(&qq(5, 2)), q(3));
        let t = base_t();
        assert_eq!(t.eval(&q(-1)), q(-1));
        assert_eq!(t.eval(&q(1)), q(1));
        assert_eq!(t.eval(&q(3)), q(4));
        assert_eq!(t.eval(&q(5)), s.eval(&q(5)));
        assert!(t.eval(&qq(1, 2)) > qq(1, 2));
        assert!(strictly_above_identity_past_one(&t));
    }

    #[test]
    fn backward_orbits_accumulate_at_fixed_points() {
        let s = base_s();
        // S^{-n}(x) = 2 + (x-2)/2^n exactly
        let mut v = q(10);
        for n in 1..=20 {
            v = s.eval_inverse(&v);
            let expected = q(2) + q(8) / Rational::from_int(1 << n);
            assert_eq!(v, expected);
        }
        let t = base_t();
        let mut w = q(10);
        for _ in 0..60 {
            w = t.eval_inverse(&w);
            assert!(w > q(1));
        }
        assert!(w - q(1) < qq(1, 1000));
    }

    #[test]
    fn single_interval_system() {
        let sys = build_orbit_system(1, 16).unwrap();
        assert_eq!(sys.intervals.len(), 1);
        let report = verify_orbit_system(&sys, &Window::new(q(0), q(200)), 12);
        assert!(report.passed(), "{report}");
        // backward S-orbit of I_0 lies in (2, x_0]
        let (a, b) = &sys.intervals[0];
        let x0 = &sys.log[0].x;
        let mut lo = sys.s.eval_inverse(a);
        let mut hi = sys.s.eval_inverse(b);
        for _ in 0..20 {
            assert!(lo > q(2) && &hi <= x0);
            lo = sys.s.eval_inverse(&lo);
            hi = sys.s.eval_inverse(&hi);
        }
        // backward T-orbit eventually in (1, 2)
        let mut v = sys.t.eval_inverse(a);
        for _ in 0..100 {
            v = sys.t.eval_inverse(&v);
        }
        assert!(v > q(1) && v < q(2));
    }

    #[test]
    fn three_interval_system_deep_check() {
        let sys = build_orbit_system(3, 32).unwrap();
        let report = verify_orbit_system(&sys, &Window::new(q(0), q(2000)), 15);
        assert!(report.passed(), "{report}");
        // placement is monotone: x_{k+1} > S(x_k)
        for k in 1..sys.log.len() {
            assert!(sys.log[k].x > sys.s.eval(&sys.log[k - 1].x));
        }
    }

    #[test]
    fn integer_only_search_exhausts() {
        match build_orbit_system(2, 1) {
            Err(OrbitError::SearchExhausted(_)) => {}
            other => panic!("expected SearchExhausted, got {other:?}"),
        }
    }

    #[test]
    fn tampered_system_fails_verification() {
        let mut sys = build_orbit_system(1, 16).unwrap();
        sys.t = sys.s.clone();
        let report = verify_orbit_system(&sys, &Window::new(q(0), q(500)), 8);
        assert!(!report.passed());
    }

    #[test]
    fn window_below_zero_is_trivial() {
        let sys = build_orbit_system(1, 16).unwrap();
        let report = verify_orbit_system(&sys, &Window::new(q(-50), q(-1)), 5);
        assert!(report.passed(), "{report}");
    }

    #[test]
    fn serde_round_trip() {
        let sys = build_orbit_system(2, 16).unwrap();
        let s = serde_json::to_string(&sys).unwrap();
        let back: OrbitSystem = serde_json::from_str(&s).unwrap();
        assert_eq!(back, sys);
        assert!(!layout_figure(&sys, 3).is_empty());
    }

    #[test]
    fn suspension_identity_and_dimension_one() {
        let id = PLMap::identity();
        let p = vec![q(3), q(-4)];
        assert_eq!(radial_suspension(&id, &p), SuspensionImage::Point(p.clone()));
        // d = 1 reduces to evaluation, including on the fixed negative ray
        let s = base_s();
        assert_eq!(
            radial_suspension(&s, &[q(-7)]),
            SuspensionImage::Point(vec![q(-7)])
        );
        assert_eq!(
            radial_suspension(&s, &[q(5)]),
            SuspensionImage::Point(vec![q(8)])
        );
    }

    #[test]
    fn suspension_scales_radius_exactly() {
        // radius 4 on the x-axis maps to radius 6 under x -> 2(x-2)+2
        let s = base_s();
        let image = radial_suspension(&s, &[q(4), q(0)]);
        assert_eq!(image, SuspensionImage::Point(vec![q(6), q(0)]));
        // radius 5 point (3, 4): new radius 8, scale 8/5
        let image = radial_suspension(&s, &[q(3), q(4)]);
        assert_eq!(
            image,
            SuspensionImage::Point(vec![qq(24, 5), qq(32, 5)])
        );
    }

    #[test]
    fn suspension_irrational_radius_is_exact_quadratic() {
        // p = (1, 1): squared radius 2. With h = x + 1 on the active
        // segment, the new radius is 1 + sqrt(2) and the scale is
        // 1 + (1/2) sqrt(2).
        let h = PLMap::translation(q(1));
        match radial_suspension(&h, &[q(1), q(1)]) {
            SuspensionImage::Scaled { base, scale } => {
                assert_eq!(base, vec![q(1), q(1)]);
                assert_eq!(scale.rational, q(1));
                assert_eq!(scale.coefficient, qq(1, 2));
                assert_eq!(scale.radicand, q(2));
            }
            other => panic!("expected scaled image, got {other:?}"),
        }
        // doubling map: linear segment through the origin stays rational
        let double = PLMap::affine(q(2), q(0));
        assert_eq!(
            radial_suspension(&double, &[q(1), q(1)]),
            SuspensionImage::Point(vec![q(2), q(2)])
        );
    }

    #[test]
    fn suspension_origin_fixed() {
        let s = base_s();
        assert_eq!(
            radial_suspension(&s, &[q(0), q(0), q(0)]),
            SuspensionImage::Point(vec![q(0), q(0), q(0)])
        );
    }
}
