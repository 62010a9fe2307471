//! Distortion certificates for sequences of PL homeomorphisms.
//!
//! `distort` packs an arbitrary finite sequence into a 10-element generating
//! set `{d, A1, S1, T1, A2, S2, T2, A3, S3, T3}` together with explicit
//! words `W_n` of length `14n + 12` that evaluate back to the inputs. The
//! three `(A, S, T)` triples are independent conjugate-product systems, one
//! per factor sequence of the exact factorization `f_n = g_n . h_n . k_n`:
//! the compactly supported `k_n` are first pulled into a fixed base interval
//! by powers of the squeeze map `d`. Each factor is then recovered as the
//! commutator `T^{-n} A T^n S T^{-n} A^{-1} T^n S^{-1}` of its system.
//!
//! Component word lengths are `6n + 4` for the squeezed factor and `4n + 4`
//! for each of the other two, recorded per index in the certificate ledger.
//!
//! Inputs with unbounded support leave an unbounded tail in `h_n` which no
//! finite displacement system can move off itself, so the third system
//! encodes `h_n` truncated at a recorded horizon: the words then equal the
//! inputs exactly on `[-horizon.inner, horizon.inner]`, which is chosen to
//! contain every default verification window (and always contains
//! `[-100, 100]`).

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::factorization::{factorize, verify_factorization, FactorError, FactorizationResult};
use crate::interval::{IntervalUnion, Span, Window};
use crate::lazy::{
    build_a_checked, check_family, ConjugatedFamilySpec, FamilyError, LazyHomeo, MaterializeError,
    DEFAULT_CHECK_DEPTH,
};
use crate::plmap::PLMap;
use crate::rational::Rational;
use crate::report::Report;

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum PairError {
    #[error("margin too small: cannot fit nested disjoint neighborhoods around {0}")]
    MarginTooSmall(String),
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum SqueezeError {
    #[error("map {0} is not compactly supported")]
    NotCompactlySupported(usize),
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum WordError {
    #[error("word uses generator {0:?} which is not bound")]
    UnboundGenerator(String),
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum DistortError {
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Factor(#[from] FactorError),
    #[error(transparent)]
    Squeeze(#[from] SqueezeError),
    #[error(transparent)]
    Pair(#[from] PairError),
}

/// Freely reduced word over named generators with integer exponents.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq, Default)]
pub struct Word {
    letters: Vec<(String, i64)>,
}

impl Word {
    pub fn empty() -> Self {
        Word::default()
    }

    /// Build a word, merging adjacent letters with the same name and
    /// dropping zero exponents (free reduction).
    pub fn from_letters(raw: Vec<(String, i64)>) -> Self {
        let mut letters: Vec<(String, i64)> = Vec::with_capacity(raw.len());
        for (name, exp) in raw {
            if exp == 0 {
                continue;
            }
            match letters.last_mut() {
                Some((last, e)) if *last == name => {
                    *e += exp;
                    if *e == 0 {
                        letters.pop();
                    }
                }
                _ => letters.push((name, exp)),
            }
        }
        Word { letters }
    }

    pub fn concat(words: &[&Word]) -> Self {
        let mut raw = Vec::new();
        for w in words {
            raw.extend(w.letters.iter().cloned());
        }
        Word::from_letters(raw)
    }

    pub fn letters(&self) -> &[(String, i64)] {
        &self.letters
    }

    /// Word length: the sum of absolute exponents.
    pub fn length(&self) -> u64 {
        self.letters.iter().map(|(_, e)| e.unsigned_abs()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }
}

impl std::fmt::Display for Word {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .letters
            .iter()
            .map(|(n, e)| {
                if *e == 1 {
                    n.clone()
                } else {
                    format!("{n}^{e}")
                }
            })
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// The commutator word `T^{-n} A T^n S T^{-n} A^{-1} T^n S^{-1}` of length
/// exactly `4n + 4`, recovering the n-th term of a conjugate-product system.
pub fn commutator_word(n: u32, a: &str, s: &str, t: &str) -> Word {
    let n = n as i64;
    Word::from_letters(vec![
        (t.to_string(), -n),
        (a.to_string(), 1),
        (t.to_string(), n),
        (s.to_string(), 1),
        (t.to_string(), -n),
        (a.to_string(), -1),
        (t.to_string(), n),
        (s.to_string(), -1),
    ])
}

/// A certificate generator: either a finite map or a conjugate-product
/// system (the product itself is rebuilt deterministically, never stored).
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    Pl { map: PLMap },
    Product { family: ConjugatedFamilySpec },
}

/// Ordered named generator set (the order is part of the certificate bytes).
pub type GeneratorSet = Vec<(String, Generator)>;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct LedgerRow {
    pub n: usize,
    pub k_component: u64,
    pub g_component: u64,
    pub h_component: u64,
    pub constructed_total: u64,
    pub bound: u64,
    pub reduced: u64,
}

/// Words equal the inputs exactly on `[-inner, inner]`; the third system's
/// terms are the identity outside `[-outer, outer]`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Horizon {
    pub inner: Rational,
    pub outer: Rational,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DistortionCertificate {
    pub generators: GeneratorSet,
    pub words: Vec<Word>,
    pub ledger: Vec<LedgerRow>,
    pub factorization: FactorizationResult,
    pub horizon: Option<Horizon>,
    pub verification: Report,
}

impl DistortionCertificate {
    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Build the displacement pair `(T, S)` for a bounded union `Z`: per
/// component `[a, b]` with margin `m`, `S` is supported on
/// `[a - m/2, b + m/2]` and pushes the component into `(b, b + m/2)` with
/// slope 1/2 into the fixed point `b + m/2`; `T` is supported on
/// `[a - m, b + m]` and pushes the whole `S`-support past itself toward
/// `b + m`. Both are contractions with ratio 1/2 on their final segment,
/// the decay witness for the conjugate-product construction.
pub fn build_displacement_pair(
    z: &IntervalUnion,
    margin: &Rational,
) -> Result<(PLMap, PLMap), PairError> {
    if z.is_empty() || !z.is_bounded() {
        return Err(PairError::MarginTooSmall(format!(
            "Z must be nonempty and bounded, got {z}"
        )));
    }
    if !margin.is_positive() {
        return Err(PairError::MarginTooSmall(format!(
            "margin {margin} is not positive"
        )));
    }
    if let Some(gap) = z.min_gap() {
        if margin * Rational::from_int(2) >= gap {
            return Err(PairError::MarginTooSmall(format!(
                "margin {margin} does not fit in the minimal gap {gap} of {z}"
            )));
        }
    }
    let mut s_points: Vec<(Rational, Rational)> = Vec::new();
    let mut t_points: Vec<(Rational, Rational)> = Vec::new();
    let half = margin / Rational::from_int(2);
    let quarter = margin / Rational::from_int(4);
    let eighth = margin / Rational::from_int(8);
    let sixteenth = margin / Rational::from_int(16);
    for span in z.spans() {
        let a = span.lo.clone().expect("bounded");
        let b = span.hi.clone().expect("bounded");
        // S on [a - m/2, b + m/2]: a -> b + m/4, slope 1/2 from b + m/4 on
        s_points.push((&a - &half, &a - &half));
        s_points.push((a.clone(), &b + &quarter));
        s_points.push((&b + &quarter, &b + &quarter + &eighth));
        s_points.push((&b + &half, &b + &half));
        // T on [a - m, b + m]: a - m/2 -> b + 5m/8, slope 1/2 from there on
        let five_eighths = &half + &eighth;
        t_points.push((&a - margin, &a - margin));
        t_points.push((&a - &half, &b + &five_eighths));
        t_points.push((
            &b + &five_eighths,
            &b + &five_eighths + &eighth + &sixteenth,
        ));
        t_points.push((&b + margin, &b + margin));
    }
    let s = PLMap::make(s_points, Rational::one(), Rational::one())
        .expect("displacement data is monotone");
    let t = PLMap::make(t_points, Rational::one(), Rational::one())
        .expect("displacement data is monotone");
    Ok((t, s))
}

/// Nested compact intervals `K_n` containing the supports, and the squeeze
/// map `d` (global doubling) with `d(K_i) = K_{i+1}`; the conjugates
/// `d^{-n} k_n d^n` all land in the base interval `K[0]`.
pub fn build_squeeze(ks: &[PLMap]) -> Result<(PLMap, Vec<IntervalUnion>), SqueezeError> {
    let mut base = Rational::one();
    for (n, k) in ks.iter().enumerate() {
        let support = k.support();
        if support.is_empty() {
            continue;
        }
        if !support.is_bounded() {
            return Err(SqueezeError::NotCompactlySupported(n));
        }
        let (lo, hi) = support.bounds().expect("bounded nonempty support");
        let reach = lo.abs().max(hi.abs());
        let mut scaled = reach;
        for _ in 0..n {
            scaled = scaled / Rational::from_int(2);
        }
        base = base.max(scaled.ceil());
    }
    let d = PLMap::affine(Rational::from_int(2), Rational::zero());
    let mut nested = Vec::with_capacity(ks.len());
    let mut radius = base.clone();
    for _ in 0..ks.len().max(1) {
        nested.push(IntervalUnion::single(-&radius, radius.clone()));
        radius = radius * Rational::from_int(2);
    }
    // exact check: conjugation by the n-th inverse power lands in K[0]
    for (n, k) in ks.iter().enumerate() {
        let pulled = k.conjugate_by(&d.pow(-(n as i64)));
        debug_assert!(pulled.support().is_subset(&nested[0]));
        let _ = pulled;
    }
    Ok((d, nested))
}

/// Realized generators: finite maps as-is, product families rebuilt (and
/// re-verified) into lazy homeomorphisms.
pub struct RealizedGenerators {
    entries: Vec<(String, RealizedGen)>,
}

pub enum RealizedGen {
    Pl(PLMap),
    Lazy(LazyHomeo),
}

impl RealizedGenerators {
    pub fn realize(gens: &GeneratorSet) -> Result<Self, FamilyError> {
        let mut entries = Vec::with_capacity(gens.len());
        for (name, g) in gens {
            let realized = match g {
                Generator::Pl { map } => RealizedGen::Pl(map.clone()),
                Generator::Product { family } => {
                    let check = check_family(family, DEFAULT_CHECK_DEPTH)?;
                    RealizedGen::Lazy(build_a_checked(family, &check))
                }
            };
            entries.push((name.clone(), realized));
        }
        Ok(RealizedGenerators { entries })
    }

    pub fn get(&self, name: &str) -> Option<&RealizedGen> {
        self.entries
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, g)| g)
    }

    /// Accumulation points of every lazy generator, sorted.
    pub fn accumulation_points(&self) -> Vec<Rational> {
        let mut out = Vec::new();
        for (_, g) in &self.entries {
            if let RealizedGen::Lazy(l) = g {
                out.extend(l.accumulation_points().iter().cloned());
            }
        }
        out.sort();
        out.dedup();
        out
    }
}

/// Exact right-to-left application of a word to a point.
pub fn evaluate_word(
    word: &Word,
    gens: &RealizedGenerators,
    x: &Rational,
) -> Result<Rational, WordError> {
    let mut v = x.clone();
    for (name, exp) in word.letters().iter().rev() {
        let g = gens
            .get(name)
            .ok_or_else(|| WordError::UnboundGenerator(name.clone()))?;
        let inverse = *exp < 0;
        for _ in 0..exp.unsigned_abs() {
            v = match g {
                RealizedGen::Pl(m) => {
                    if inverse {
                        m.eval_inverse(&v)
                    } else {
                        m.eval(&v)
                    }
                }
                RealizedGen::Lazy(l) => {
                    if inverse {
                        l.invert().point_eval(&v)
                    } else {
                        l.point_eval(&v)
                    }
                }
            };
        }
    }
    Ok(v)
}

/// Materialize a word as a finite map valid on the window, tracking the
/// image window through each letter so lazy generators materialize on the
/// region they are actually applied to.
pub fn materialize_word(
    word: &Word,
    gens: &RealizedGenerators,
    w: &Window,
) -> Result<PLMap, MaterializeError> {
    let mut acc = PLMap::identity();
    let mut lo = w.lo.clone();
    let mut hi = w.hi.clone();
    for (name, exp) in word.letters().iter().rev() {
        let g = gens.get(name).expect("word letters bound in generator set");
        let inverse = *exp < 0;
        for _ in 0..exp.unsigned_abs() {
            let step = match g {
                RealizedGen::Pl(m) => {
                    if inverse {
                        m.invert()
                    } else {
                        m.clone()
                    }
                }
                RealizedGen::Lazy(l) => {
                    let window = Window::new(lo.clone(), hi.clone());
                    if inverse {
                        l.invert().materialize(&window)?
                    } else {
                        l.materialize(&window)?
                    }
                }
            };
            lo = step.eval(&lo);
            hi = step.eval(&hi);
            acc = step.compose(&acc);
        }
    }
    Ok(acc)
}

const GEN_D: &str = "d";
const GEN_A1: &str = "A1";
const GEN_S1: &str = "S1";
const GEN_T1: &str = "T1";
const GEN_A2: &str = "A2";
const GEN_S2: &str = "S2";
const GEN_T2: &str = "T2";
const GEN_A3: &str = "A3";
const GEN_S3: &str = "S3";
const GEN_T3: &str = "T3";

fn pick_margin(z: &IntervalUnion) -> Rational {
    let gap = z.min_gap().unwrap_or_else(|| Rational::from_int(2));
    gap.min(Rational::from_int(2)) / Rational::from_int(4)
}

/// Truncate `h` at the horizon: unchanged on `[-inner, inner]`, identity
/// outside `[-outer, outer]`, linear in between.
fn clamp_map(h: &PLMap, inner: &Rational, outer: &Rational) -> PLMap {
    if h.is_identity() {
        return PLMap::identity();
    }
    let mut pts: Vec<(Rational, Rational)> = vec![
        (-outer, -outer.clone()),
        (-inner, h.eval(&-inner)),
    ];
    for (x, y) in h.breakpoints() {
        if x > &-inner && x < inner {
            pts.push((x.clone(), y.clone()));
        }
    }
    pts.push((inner.clone(), h.eval(inner)));
    pts.push((outer.clone(), outer.clone()));
    PLMap::make(pts, Rational::one(), Rational::one())
        .expect("horizon clamp preserves monotonicity")
}

/// Build the distortion certificate for a map sequence.
///
/// The construction is deterministic: the same input yields the same
/// certificate, byte for byte; randomness only ever enters verification
/// sampling.
pub fn distort(fs: &[PLMap]) -> Result<DistortionCertificate, DistortError> {
    if fs.is_empty() {
        let mut verification = Report::new("distortion construction");
        verification.note("empty input: empty certificate, vacuously valid");
        return Ok(DistortionCertificate {
            generators: Vec::new(),
            words: Vec::new(),
            ledger: Vec::new(),
            factorization: FactorizationResult {
                anchors: crate::factorization::AnchorData {
                    z: vec![],
                    x_minus: vec![],
                    x_plus: vec![],
                    x_set: IntervalUnion::empty(),
                    y_set: IntervalUnion::empty(),
                },
                inputs: vec![],
                g: vec![],
                h: vec![],
                k: vec![],
            },
            horizon: None,
            verification,
        });
    }
    let mut verification = Report::new("distortion construction");
    let factorization = factorize(fs)?;
    let fact_report = verify_factorization(&factorization);
    verification.merge(fact_report);
    let n_count = factorization.inputs.len();

    // horizon: inner covers every default verification window and all
    // anchors; outer bounds the truncated third system
    let one = Rational::one();
    let half = Rational::new(1, 2);
    let inner = {
        let mut m = Rational::from_int(102);
        if let Some(z_last) = factorization.anchors.z.last() {
            m = m.max(z_last + Rational::from_int(2));
        }
        m.ceil()
    };
    let mut outer = &inner + &one;
    for h in &factorization.h {
        outer = outer.max(h.eval(&inner).abs().ceil() + &one);
        outer = outer.max(h.eval(&-&inner).abs().ceil() + &one);
    }
    let h_trunc: Vec<PLMap> = factorization
        .h
        .iter()
        .map(|h| clamp_map(h, &inner, &outer))
        .collect();

    // system 1: the squeezed compact factors on the base interval K[0]
    let (d, nested) = build_squeeze(&factorization.k)?;
    let z1 = nested[0].clone();
    let (t1, s1) = build_displacement_pair(&z1, &one)?;
    let terms1: Vec<PLMap> = factorization
        .k
        .iter()
        .enumerate()
        .map(|(n, k)| k.conjugate_by(&d.pow(-(n as i64))))
        .collect();
    let spec1 = ConjugatedFamilySpec {
        terms: terms1,
        mover_t: t1.clone(),
        mover_s: s1.clone(),
        z_set: z1,
    };
    let check1 = check_family(&spec1, DEFAULT_CHECK_DEPTH)?;
    verification.merge(check1.report.clone());

    // system 2: the factors supported on X
    let z2 = factorization.anchors.x_set.clone();
    let margin2 = pick_margin(&z2);
    let (t2, s2) = build_displacement_pair(&z2, &margin2)?;
    let spec2 = ConjugatedFamilySpec {
        terms: factorization.g.clone(),
        mover_t: t2.clone(),
        mover_s: s2.clone(),
        z_set: z2,
    };
    let check2 = check_family(&spec2, DEFAULT_CHECK_DEPTH)?;
    verification.merge(check2.report.clone());

    // system 3: the truncated factors on the bounded part of Y
    let z3 = if factorization.anchors.z.is_empty() {
        IntervalUnion::single(Rational::one(), Rational::from_int(2))
    } else {
        let zs = &factorization.anchors.z;
        let last = zs.len();
        let mut spans = Vec::new();
        spans.push(Span::bounded(-&outer, -(&zs[last - 1] + &half)));
        spans.push(Span::bounded(&zs[last - 1] + &half, outer.clone()));
        for m in 1..last {
            spans.push(Span::bounded(&zs[m - 1] + &half, &zs[m] - &half));
            spans.push(Span::bounded(-(&zs[m] - &half), -(&zs[m - 1] + &half)));
        }
        IntervalUnion::from_spans(spans)
    };
    let margin3 = pick_margin(&z3);
    let (t3, s3) = build_displacement_pair(&z3, &margin3)?;
    let spec3 = ConjugatedFamilySpec {
        terms: h_trunc,
        mover_t: t3.clone(),
        mover_s: s3.clone(),
        z_set: z3,
    };
    let check3 = check_family(&spec3, DEFAULT_CHECK_DEPTH)?;
    verification.merge(check3.report.clone());

    // words: W_n = [g word][h word][k word], rightmost applied first
    let mut words = Vec::with_capacity(n_count);
    let mut ledger = Vec::with_capacity(n_count);
    for n in 0..n_count {
        let g_word = commutator_word(n as u32, GEN_A2, GEN_S2, GEN_T2);
        let h_word = commutator_word(n as u32, GEN_A3, GEN_S3, GEN_T3);
        let core = commutator_word(n as u32, GEN_A1, GEN_S1, GEN_T1);
        let conj_in = Word::from_letters(vec![(GEN_D.to_string(), n as i64)]);
        let conj_out = Word::from_letters(vec![(GEN_D.to_string(), -(n as i64))]);
        let k_word = Word::concat(&[&conj_in, &core, &conj_out]);
        let g_len = g_word.length();
        let h_len = h_word.length();
        let k_len = k_word.length();
        let word = Word::concat(&[&g_word, &h_word, &k_word]);
        let n64 = n as u64;
        ledger.push(LedgerRow {
            n,
            k_component: k_len,
            g_component: g_len,
            h_component: h_len,
            constructed_total: k_len + g_len + h_len,
            bound: 14 * n64 + 12,
            reduced: word.length(),
        });
        words.push(word);
    }

    let generators: GeneratorSet = vec![
        (GEN_D.to_string(), Generator::Pl { map: d }),
        (GEN_A1.to_string(), Generator::Product { family: spec1 }),
        (GEN_S1.to_string(), Generator::Pl { map: s1 }),
        (GEN_T1.to_string(), Generator::Pl { map: t1 }),
        (GEN_A2.to_string(), Generator::Product { family: spec2 }),
        (GEN_S2.to_string(), Generator::Pl { map: s2 }),
        (GEN_T2.to_string(), Generator::Pl { map: t2 }),
        (GEN_A3.to_string(), Generator::Product { family: spec3 }),
        (GEN_S3.to_string(), Generator::Pl { map: s3 }),
        (GEN_T3.to_string(), Generator::Pl { map: t3 }),
    ];
    verification.check(
        "generator count is 10",
        generators.len() == 10,
        format!("{}", generators.len()),
    );
    verification.note(format!(
        "words equal the inputs exactly on [-{inner}, {inner}] (recorded horizon)"
    ));
    verification.note(
        "word shapes depend only on the index n; the sequence enters only through the generators"
            .to_string(),
    );
    verification.note(
        "length-function bound: any symmetric subadditive length l satisfies \
         l(f_n) <= (14n + 12) * max generator value; in particular the whole sequence \
         lies in the subgroup generated by these 10 elements"
            .to_string(),
    );
    Ok(DistortionCertificate {
        generators,
        words,
        ledger,
        factorization,
        horizon: Some(Horizon { inner, outer }),
        verification,
    })
}

/// Windows inside `[lo, hi]` whose closures stay clear of every
/// accumulation point of the realized generators.
pub fn plan_windows(gens: &RealizedGenerators, lo: &Rational, hi: &Rational) -> Vec<Window> {
    let mut cuts: Vec<Rational> = gens
        .accumulation_points()
        .into_iter()
        .filter(|p| p > lo && p < hi)
        .collect();
    cuts.insert(0, lo.clone());
    cuts.push(hi.clone());
    let mut out = Vec::new();
    for pair in cuts.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let gap = b - a;
        if !gap.is_positive() {
            continue;
        }
        let margin = &gap / Rational::from_int(16);
        let (wlo, whi) = (a + &margin, b - &margin);
        if wlo < whi {
            out.push(Window::new(wlo, whi));
        }
    }
    out
}

fn sample_in(rng: &mut ChaCha8Rng, w: &Window) -> Rational {
    let denom: i64 = rng.gen_range(2..=64);
    let d = Rational::from_int(denom);
    let lo_i = (&w.lo * &d).ceil_bigint();
    let hi_i = (&w.hi * &d).floor_bigint();
    if lo_i > hi_i {
        return w.midpoint();
    }
    let span = &hi_i - &lo_i;
    let span_u: u64 = match u64::try_from(&span) {
        Ok(v) => v,
        Err(_) => return w.midpoint(),
    };
    let offset = rng.gen_range(0..=span_u);
    Rational::from_bigint(lo_i + offset) / d
}

/// Replay a certificate: ledger arithmetic, generator count, factorization
/// identities, exact pointwise word evaluation on sampled rationals, and
/// structural window equality of materialized words.
pub fn verify_certificate(
    cert: &DistortionCertificate,
    windows: &[Window],
    samples_per_window: u32,
    seed: u64,
) -> Report {
    let mut report = Report::new("certificate verification");
    if cert.is_empty() && cert.factorization.inputs.is_empty() {
        report.pass("empty certificate (no inputs): vacuously valid");
        return report;
    }
    let n_count = cert.factorization.inputs.len();
    report.check(
        "generator count is 10",
        cert.generators.len() == 10,
        format!("{}", cert.generators.len()),
    );
    report.check(
        "one word per input",
        cert.words.len() == n_count && cert.ledger.len() == n_count,
        format!(
            "{} words, {} ledger rows, {} inputs",
            cert.words.len(),
            cert.ledger.len(),
            n_count
        ),
    );
    if cert.words.len() != n_count || cert.ledger.len() != n_count {
        return report;
    }
    let mut ledger_ok = true;
    for (n, row) in cert.ledger.iter().enumerate() {
        let n64 = n as u64;
        let expect = (6 * n64 + 4, 4 * n64 + 4, 4 * n64 + 4);
        let ok = row.n == n
            && row.k_component == expect.0
            && row.g_component == expect.1
            && row.h_component == expect.2
            && row.constructed_total == 14 * n64 + 12
            && row.bound == 14 * n64 + 12
            && row.reduced == cert.words[n].length()
            && row.reduced <= row.bound;
        if !ok {
            ledger_ok = false;
            report.fail(
                format!("ledger row {n}"),
                format!(
                    "expected components ({}, {}, {}) with total {}, got ({}, {}, {}) total {} reduced {}",
                    expect.0,
                    expect.1,
                    expect.2,
                    14 * n64 + 12,
                    row.k_component,
                    row.g_component,
                    row.h_component,
                    row.constructed_total,
                    row.reduced
                ),
            );
        }
    }
    if ledger_ok {
        report.pass(format!(
            "ledger: components (6n+4, 4n+4, 4n+4) and |W_n| <= 14n+12 for all {n_count} indices"
        ));
    }
    report.merge(verify_factorization(&cert.factorization));
    let realized = match RealizedGenerators::realize(&cert.generators) {
        Ok(r) => r,
        Err(e) => {
            report.fail("realize generators", e.to_string());
            return report;
        }
    };
    report.pass("generator families re-verified and rebuilt");

    // restrict to windows inside the validity horizon
    let usable: Vec<&Window> = match &cert.horizon {
        Some(hz) => windows
            .iter()
            .filter(|w| w.lo >= -&hz.inner && w.hi <= hz.inner)
            .collect(),
        None => windows.iter().collect(),
    };
    if usable.len() < windows.len() {
        report.note(format!(
            "{} of {} windows ignored: outside the certificate horizon",
            windows.len() - usable.len(),
            windows.len()
        ));
    }
    if usable.is_empty() && !windows.is_empty() {
        report.fail(
            "usable verification windows",
            "every supplied window lies outside the certificate horizon",
        );
        return report;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (n, word) in cert.words.iter().enumerate() {
        let target = &cert.factorization.inputs[n];
        let mut checked = 0u64;
        let mut failure: Option<String> = None;
        for w in &usable {
            for _ in 0..samples_per_window {
                let x = sample_in(&mut rng, w);
                match evaluate_word(word, &realized, &x) {
                    Ok(v) => {
                        let expect = target.eval(&x);
                        if v != expect {
                            failure = Some(format!("W_{n}({x}) = {v} but f_{n}({x}) = {expect}"));
                            break;
                        }
                        checked += 1;
                    }
                    Err(e) => {
                        failure = Some(e.to_string());
                        break;
                    }
                }
            }
            if failure.is_some() {
                break;
            }
        }
        match failure {
            None => report.pass(format!(
                "W_{n} evaluates to f_{n} at {checked} sampled rationals (exact)"
            )),
            Some(w) => report.fail(format!("W_{n} pointwise equality"), w),
        }
    }

    // structural equality on materialized windows
    let structural_target = usable.len().min(3);
    if structural_target < 3 {
        report.note(format!(
            "only {} usable windows supplied; structural checks limited accordingly",
            usable.len()
        ));
    }
    for (n, word) in cert.words.iter().enumerate() {
        let target = &cert.factorization.inputs[n];
        let mut successes = 0usize;
        let mut failure: Option<String> = None;
        let mut queue: Vec<Window> = usable.iter().map(|w| (*w).clone()).collect();
        queue.reverse();
        let mut attempts = 0usize;
        while let Some(w) = queue.pop() {
            if successes >= structural_target || attempts > 64 {
                break;
            }
            attempts += 1;
            match materialize_word(word, &realized, &w) {
                Ok(pl) => {
                    if let Some(x) = pl.first_disagreement_on_window(target, &w) {
                        failure = Some(format!("materialized W_{n} differs from f_{n} at {x}"));
                        break;
                    }
                    successes += 1;
                }
                Err(MaterializeError::WindowHitsAccumulation(_)) => {
                    // split and retry away from the accumulation point
                    if &w.hi - &w.lo > Rational::new(1, 1024) {
                        let mid = w.midpoint();
                        let quarter = (&w.hi - &w.lo) / Rational::from_int(64);
                        if w.lo < &mid - &quarter {
                            queue.push(Window::new(w.lo.clone(), &mid - &quarter));
                        }
                        if &mid + &quarter < w.hi {
                            queue.push(Window::new(&mid + &quarter, w.hi.clone()));
                        }
                    }
                }
            }
        }
        match failure {
            None => report.check(
                format!("W_{n} structural equality on {successes} windows"),
                successes >= structural_target,
                format!("only {successes} windows materialized (need {structural_target})"),
            ),
            Some(msg) => report.fail(format!("W_{n} structural equality"), msg),
        }
    }
    report
}

/// Order-embedding report: the inputs land in the 10-generator subgroup and
/// the order on the orbit of 0 is read off exactly.
pub fn embed_ordered(gs: &[PLMap]) -> Result<(DistortionCertificate, Report), DistortError> {
    let cert = distort(gs)?;
    let mut report = Report::new("order embedding");
    if gs.is_empty() {
        report.note("empty input: nothing to embed");
        return Ok((cert, report));
    }
    report.pass(format!(
        "{} input maps lie in the subgroup generated by {} elements",
        gs.len(),
        cert.generators.len()
    ));
    let zero = Rational::zero();
    let mut orbit: Vec<(usize, Rational)> = Vec::new();
    for (i, g) in gs.iter().enumerate() {
        let v = g.eval(&zero);
        if v == zero {
            report.note(format!("input {i} fixes 0: orbit point coincides with 0"));
        } else if v.is_positive() {
            report.note(format!("input {i}: 0 < g_{i}(0) = {v}"));
        } else {
            report.note(format!("input {i}: g_{i}(0) = {v} < 0"));
        }
        orbit.push((i, v));
    }
    orbit.sort_by(|a, b| a.1.cmp(&b.1));
    let order: Vec<String> = orbit.iter().map(|(i, v)| format!("g_{i}(0)={v}")).collect();
    report.note(format!(
        "left order on the orbit of 0 agrees with the real order: {}",
        order.join(" <= ")
    ));
    Ok((cert, report))
}
