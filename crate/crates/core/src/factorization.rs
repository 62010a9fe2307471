//! Exact factorization of a map sequence through anchored interval unions.
//!
//! Given maps `f_0 = id, f_1, ..., f_N`, the anchor construction produces
//! symmetric interval pairs `X_n = [-x_n^+, -x_n^-] u [x_n^-, x_n^+]` and
//! anchor points `z_n` such that the unit-width intervals around `+-z_n`
//! and all their images under `f_0..f_n` stay inside `X_n`. Each input then
//! splits exactly as `f_n = g_n . h_n . k_n` with `g_n` supported on
//! `X = U X_m`, `k_n` supported on the compact `[-z_n, z_n]`, and `h_n`
//! supported on the closed complement `Y` of the anchor intervals.
//!
//! The construction is prefix-stable: extending the input sequence extends
//! the anchors without changing earlier ones.

use serde::{Deserialize, Serialize};

use crate::interval::{IntervalUnion, Span};
use crate::plmap::PLMap;
use crate::rational::Rational;
use crate::report::Report;

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum FactorError {
    #[error("anchor data invalid: {0}")]
    AnchorInvalid(String),
}

/// Anchor points and interval unions for a normalized sequence.
/// `x_minus[n]`, `x_plus[n]` are defined for `n = 0..=N`; `z[n-1]` holds
/// the anchor `z_n` for `n = 1..=N`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct AnchorData {
    pub z: Vec<Rational>,
    pub x_minus: Vec<Rational>,
    pub x_plus: Vec<Rational>,
    pub x_set: IntervalUnion,
    pub y_set: IntervalUnion,
}

impl AnchorData {
    pub fn z_n(&self, n: usize) -> &Rational {
        assert!(n >= 1, "anchors z_n start at n = 1");
        &self.z[n - 1]
    }

    /// `[z_n - 1/2, z_n + 1/2]` or its mirror image.
    pub fn anchor_interval(&self, n: usize, positive: bool) -> (Rational, Rational) {
        let half = Rational::new(1, 2);
        let z = self.z_n(n);
        if positive {
            (z - &half, z + &half)
        } else {
            (-(z + &half), -(z - &half))
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FactorizationResult {
    pub anchors: AnchorData,
    pub inputs: Vec<PLMap>,
    pub g: Vec<PLMap>,
    pub h: Vec<PLMap>,
    pub k: Vec<PLMap>,
}

/// Ensure the head of the sequence is the identity, prepending one if
/// needed; all downstream indexing follows the normalized sequence.
pub fn normalize_head(fs: &[PLMap]) -> Vec<PLMap> {
    let mut out = Vec::with_capacity(fs.len() + 1);
    if fs.first().is_none_or(|f| !f.is_identity()) {
        out.push(PLMap::identity());
    }
    out.extend(fs.iter().cloned());
    out
}

/// Inductive anchor construction over the normalized sequence.
pub fn build_anchors(fs: &[PLMap]) -> AnchorData {
    let fs = normalize_head(fs);
    let half = Rational::new(1, 2);
    let one = Rational::one();
    let mut x_minus = vec![Rational::one()];
    let mut x_plus = vec![Rational::from_int(3)];
    let mut z: Vec<Rational> = Vec::new();
    for n in 1..fs.len() {
        let xm = &x_plus[n - 1] + &one;
        // z_n: the anchor intervals and all their images under f_0..f_n
        // must clear x_n^- on both sides
        let mut bound = xm.clone();
        for f in fs.iter().take(n + 1) {
            bound = bound.max(f.eval_inverse(&xm));
            bound = bound.max(-f.eval_inverse(&-&xm));
        }
        let zn = (bound + &one).ceil();
        // x_n^+: smallest integer with [-x^+, x^+] containing every image
        // of the two anchor intervals, plus one
        let mut reach = Rational::zero();
        for f in fs.iter().take(n + 1) {
            for x in [&zn - &half, &zn + &half, -(&zn + &half), -(&zn - &half)] {
                reach = reach.max(f.eval(&x).abs());
            }
        }
        let xp = reach.ceil() + &one;
        x_minus.push(xm);
        x_plus.push(xp);
        z.push(zn);
    }
    let mut x_components = Vec::new();
    for n in 0..x_minus.len() {
        x_components.push((x_minus[n].clone(), x_plus[n].clone()));
        x_components.push((-&x_plus[n], -&x_minus[n]));
    }
    let x_set = IntervalUnion::from_intervals(x_components);
    let y_set = if z.is_empty() {
        IntervalUnion::whole_line()
    } else {
        // closed complement of the open anchor intervals together with
        // (-z_1, z_1); the two outermost components are unbounded rays
        let last = z.len();
        let mut spans = Vec::new();
        spans.push(Span::left_ray(-(&z[last - 1] + &half)));
        spans.push(Span::right_ray(&z[last - 1] + &half));
        for m in 1..last {
            spans.push(Span::bounded(&z[m - 1] + &half, &z[m] - &half));
            spans.push(Span::bounded(-(&z[m] - &half), -(&z[m - 1] + &half)));
        }
        IntervalUnion::from_spans(spans)
    };
    AnchorData {
        z,
        x_minus,
        x_plus,
        x_set,
        y_set,
    }
}

/// Check every anchor invariant against the normalized sequence.
pub fn validate_anchors(fs: &[PLMap], anchors: &AnchorData) -> Result<(), FactorError> {
    let fs = normalize_head(fs);
    let n_max = fs.len() - 1;
    if anchors.x_minus.len() != fs.len()
        || anchors.x_plus.len() != fs.len()
        || anchors.z.len() != n_max
    {
        return Err(FactorError::AnchorInvalid(format!(
            "anchor lengths do not match a sequence of {} maps",
            fs.len()
        )));
    }
    if anchors.x_minus[0] != 1 || anchors.x_plus[0] != 3 {
        return Err(FactorError::AnchorInvalid(
            "base anchors must be x_0^- = 1, x_0^+ = 3".to_string(),
        ));
    }
    for n in 1..=n_max {
        if anchors.x_minus[n] != &anchors.x_plus[n - 1] + Rational::one() {
            return Err(FactorError::AnchorInvalid(format!(
                "x_{n}^- != x_{}^+ + 1",
                n - 1
            )));
        }
        let zn = anchors.z_n(n);
        if zn <= &anchors.x_minus[n] {
            return Err(FactorError::AnchorInvalid(format!("z_{n} <= x_{n}^-")));
        }
        let (lo_p, hi_p) = anchors.anchor_interval(n, true);
        let (lo_m, hi_m) = anchors.anchor_interval(n, false);
        for (j, f) in fs.iter().take(n + 1).enumerate() {
            if f.eval(&lo_p) <= anchors.x_minus[n] {
                return Err(FactorError::AnchorInvalid(format!(
                    "f_{j} image of the +z_{n} interval is not right of x_{n}^-"
                )));
            }
            if f.eval(&hi_m) >= -&anchors.x_minus[n] {
                return Err(FactorError::AnchorInvalid(format!(
                    "f_{j} image of the -z_{n} interval is not left of -x_{n}^-"
                )));
            }
            for x in [&lo_p, &hi_p, &lo_m, &hi_m] {
                if f.eval(x).abs() >= anchors.x_plus[n] {
                    return Err(FactorError::AnchorInvalid(format!(
                        "f_{j} image of an anchor interval endpoint leaves [-x_{n}^+, x_{n}^+]"
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Factor every map of the normalized sequence as `f_n = g_n . h_n . k_n`.
pub fn build_factors(
    fs: &[PLMap],
    anchors: &AnchorData,
) -> Result<FactorizationResult, FactorError> {
    let fs = normalize_head(fs);
    validate_anchors(&fs, anchors)?;
    let n_max = fs.len() - 1;
    let mut gs = Vec::with_capacity(fs.len());
    let mut hs = Vec::with_capacity(fs.len());
    let mut ks = Vec::with_capacity(fs.len());
    for (n, f) in fs.iter().enumerate() {
        if f.is_identity() {
            gs.push(PLMap::identity());
            hs.push(PLMap::identity());
            ks.push(PLMap::identity());
            continue;
        }
        let g = build_g(f, n, n_max, anchors);
        let u = g.invert().compose(f);
        let zn = anchors.z_n(n);
        let (k, h) = u.carve(&-zn, zn).ok_or_else(|| {
            FactorError::AnchorInvalid(format!("g_{n}^-1 f_{n} does not fix -z_{n}, z_{n}"))
        })?;
        gs.push(g);
        hs.push(h);
        ks.push(k);
    }
    Ok(FactorizationResult {
        anchors: anchors.clone(),
        inputs: fs,
        g: gs,
        h: hs,
        k: ks,
    })
}

/// Convenience: anchors plus factors in one call.
pub fn factorize(fs: &[PLMap]) -> Result<FactorizationResult, FactorError> {
    let anchors = build_anchors(fs);
    build_factors(fs, &anchors)
}

/// The factor supported on `X` that agrees with `f` on the anchor
/// intervals of index `m >= n`: pointwise `f` there, the identity at each
/// component boundary of `X`, linear in between, identity off `X`.
fn build_g(f: &PLMap, n: usize, n_max: usize, anchors: &AnchorData) -> PLMap {
    let mut points: Vec<(Rational, Rational)> = Vec::new();
    for m in n.max(1)..=n_max {
        for positive in [false, true] {
            let (lo, hi) = anchors.anchor_interval(m, positive);
            let (c_lo, c_hi) = if positive {
                (anchors.x_minus[m].clone(), anchors.x_plus[m].clone())
            } else {
                (-&anchors.x_plus[m], -&anchors.x_minus[m])
            };
            points.push((c_lo.clone(), c_lo));
            points.push((lo.clone(), f.eval(&lo)));
            for (x, y) in f.breakpoints() {
                if x > &lo && x < &hi {
                    points.push((x.clone(), y.clone()));
                }
            }
            points.push((hi.clone(), f.eval(&hi)));
            points.push((c_hi.clone(), c_hi));
        }
    }
    if points.is_empty() {
        return PLMap::identity();
    }
    points.sort_by(|a, b| a.0.cmp(&b.0));
    PLMap::make(points, Rational::one(), Rational::one())
        .expect("anchor invariants make the interpolation monotone")
}

/// Exact checks on a factorization: the product identity, the three
/// support containments and the anchor invariants, with witnesses.
pub fn verify_factorization(res: &FactorizationResult) -> Report {
    let mut report = Report::new("factorization");
    if let Err(e) = validate_anchors(&res.inputs, &res.anchors) {
        report.fail("anchor invariants", e.to_string());
    } else {
        report.pass("anchor invariants");
    }
    let counts_ok = res.inputs.len() == res.g.len()
        && res.inputs.len() == res.h.len()
        && res.inputs.len() == res.k.len();
    report.check(
        "factor/input counts agree",
        counts_ok,
        format!(
            "inputs {} g {} h {} k {}",
            res.inputs.len(),
            res.g.len(),
            res.h.len(),
            res.k.len()
        ),
    );
    if !counts_ok {
        return report;
    }
    for n in 0..res.inputs.len() {
        let product = res.g[n].compose(&res.h[n].compose(&res.k[n]));
        if product == res.inputs[n] {
            report.pass(format!("f_{n} = g_{n} . h_{n} . k_{n} (structural)"));
        } else {
            let witness = product
                .difference_witness(&res.inputs[n])
                .map(|x| format!("differ at x = {x}"))
                .unwrap_or_else(|| "structural mismatch".to_string());
            report.fail(format!("f_{n} = g_{n} . h_{n} . k_{n}"), witness);
        }
        let g_supp = res.g[n].support();
        report.check(
            format!("supp(g_{n}) inside X"),
            g_supp.is_subset(&res.anchors.x_set),
            format!("supp(g_{n}) = {g_supp}"),
        );
        let h_supp = res.h[n].support();
        report.check(
            format!("supp(h_{n}) inside Y"),
            h_supp.is_subset(&res.anchors.y_set),
            format!("supp(h_{n}) = {h_supp}"),
        );
        let k_supp = res.k[n].support();
        if n == 0 {
            report.check(
                "k_0 is the identity",
                res.k[0].is_identity(),
                format!("supp(k_0) = {k_supp}"),
            );
        } else {
            let zn = res.anchors.z_n(n);
            let compact = IntervalUnion::single(-zn, zn.clone());
            report.check(
                format!("supp(k_{n}) inside [-z_{n}, z_{n}]"),
                k_supp.is_subset(&compact),
                format!("supp(k_{n}) = {k_supp}, bound {compact}"),
            );
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::Window;

    fn q(n: i64) -> Rational {
        Rational::from_int(n)
    }
    fn qq(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn base_anchors_for_identity() {
        let anchors = build_anchors(&[PLMap::identity()]);
        assert_eq!(anchors.x_minus, vec![q(1)]);
        assert_eq!(anchors.x_plus, vec![q(3)]);
        assert!(anchors.z.is_empty());
        assert_eq!(
            anchors.x_set,
            IntervalUnion::from_intervals(vec![(q(-3), q(-1)), (q(1), q(3))])
        );
    }

    #[test]
    fn trivial_sequence_anchor_values() {
        // with all maps the identity, z_1 = x_1^- + 1 = 5
        let anchors = build_anchors(&[PLMap::identity(), PLMap::identity()]);
        assert_eq!(anchors.x_minus[1], q(4));
        assert_eq!(anchors.z, vec![q(5)]);
        // images reach 5 + 1/2, so x_1^+ = 6 + 1 = 7
        assert_eq!(anchors.x_plus[1], q(7));
    }

    #[test]
    fn translation_anchor_values() {
        // f_1 = x + 10: the max formula is dominated by -f_1^{-1}(-4) = 14
        let fs = vec![PLMap::identity(), PLMap::translation(q(10))];
        let anchors = build_anchors(&fs);
        assert_eq!(anchors.z, vec![q(15)]);
        assert!(anchors.z[0] >= q(14));
        // images reach f_1(15 + 1/2) = 25.5, so x_1^+ = 26 + 1 = 27
        assert_eq!(anchors.x_plus[1], q(27));
        validate_anchors(&fs, &anchors).unwrap();
    }

    #[test]
    fn strong_left_pull_keeps_invariants() {
        // a map pulling hard to the left stresses the z_n bound: every
        // image of the anchor interval must still clear x_n^-
        let squeeze = PLMap::make(
            vec![(q(0), q(0)), (q(64), q(8))],
            Rational::one(),
            Rational::one(),
        )
        .unwrap();
        let fs = vec![PLMap::identity(), squeeze, PLMap::translation(q(-7))];
        let anchors = build_anchors(&fs);
        validate_anchors(&fs, &anchors).unwrap();
        let res = build_factors(&fs, &anchors).unwrap();
        assert!(verify_factorization(&res).passed());
    }

    #[test]
    fn compact_input_needs_no_g_or_h() {
        let bump = PLMap::make(
            vec![(q(-1), q(-1)), (q(0), qq(1, 2)), (q(1), q(1))],
            Rational::one(),
            Rational::one(),
        )
        .unwrap();
        let res = factorize(std::slice::from_ref(&bump)).unwrap();
        // normalized: f_0 = id, f_1 = bump with support well inside [-z_1, z_1]
        assert_eq!(res.inputs.len(), 2);
        assert!(res.g[1].is_identity());
        assert!(res.h[1].is_identity());
        assert_eq!(res.k[1], bump);
        assert!(verify_factorization(&res).passed());
    }

    #[test]
    fn unbounded_input_gets_nontrivial_h() {
        let fs = vec![PLMap::translation(q(1))];
        let res = factorize(&fs).unwrap();
        assert!(!res.h[1].is_identity());
        let report = verify_factorization(&res);
        assert!(report.passed(), "{report}");
        // h acts on the unbounded rays of Y
        assert!(!res.h[1].support().is_bounded());
    }

    #[test]
    fn factorization_is_exact_on_a_mixed_suite() {
        let fs = vec![
            PLMap::identity(),
            PLMap::translation(q(10)),
            PLMap::affine(q(2), q(0)),
            PLMap::make(
                vec![(q(0), q(0)), (qq(1, 2), qq(3, 4)), (q(1), q(1))],
                Rational::one(),
                Rational::one(),
            )
            .unwrap(),
            PLMap::make(
                vec![(q(-1), q(-2)), (q(0), q(0)), (q(2), q(3))],
                qq(1, 2),
                q(2),
            )
            .unwrap(),
            PLMap::identity(),
        ];
        let res = factorize(&fs).unwrap();
        let report = verify_factorization(&res);
        assert!(report.passed(), "{report}");
        // anchors strictly increase
        for n in 1..res.anchors.z.len() {
            assert!(res.anchors.z[n] > res.anchors.z[n - 1]);
        }
        for n in 1..res.inputs.len() {
            assert!(res.anchors.z_n(n) > &res.anchors.x_minus[n]);
            assert!(res.anchors.x_minus[n] > res.anchors.x_plus[n - 1]);
        }
    }

    #[test]
    fn g_agrees_with_f_on_anchor_intervals() {
        let f = PLMap::make(
            vec![(q(-1), q(-2)), (q(0), q(0)), (q(2), q(3))],
            qq(1, 2),
            q(2),
        )
        .unwrap();
        let fs = vec![f.clone()];
        let res = factorize(&fs).unwrap();
        let n_max = res.inputs.len() - 1;
        for m in 1..=n_max {
            for positive in [true, false] {
                let (lo, hi) = res.anchors.anchor_interval(m, positive);
                let w = Window::new(lo, hi);
                assert!(
                    res.g[1].agrees_on_window(&res.inputs[1], &w),
                    "g_1 vs f_1 on anchor interval {m}"
                );
            }
        }
    }

    #[test]
    fn tampered_product_is_caught_with_witness() {
        let fs = vec![PLMap::translation(q(2))];
        let mut res = factorize(&fs).unwrap();
        res.k[1] = PLMap::translation(q(1));
        let report = verify_factorization(&res);
        assert!(!report.passed());
        let failure = report.failures().next().unwrap();
        assert!(failure.witness.as_deref().unwrap_or("").contains("x ="));
    }

    #[test]
    fn empty_input_factorizes_to_identity_head() {
        let res = factorize(&[]).unwrap();
        assert_eq!(res.inputs.len(), 1);
        assert!(verify_factorization(&res).passed());
    }
}
