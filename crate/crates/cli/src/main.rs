//! Command-line surface: sequence ingestion, pipeline orchestration,
//! certificate emission and verification replay.
//!
//! Exit codes: 0 all checks pass, 1 verification failure (witnesses in the
//! report), 2 input or construction error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use plhomeo::counterexamples::{
    brute_force_generated, nongeneration_certificate, parse_counterexample_input,
    verify_agreement_certificate, FiniteGroupTable, ProductElement,
};
use plhomeo::distortion::{
    distort, embed_ordered, plan_windows, verify_certificate, DistortionCertificate,
    RealizedGenerators, Word,
};
use plhomeo::factorization::{factorize, verify_factorization};
use plhomeo::orbits::{build_orbit_system, layout_figure, verify_orbit_system, OrbitSystem};
use plhomeo::report::Report;
use plhomeo::{PLMap, Rational, Window};

#[derive(Parser)]
#[command(
    name = "plhomeo",
    about = "Exact distortion certificates for piecewise-linear homeomorphisms of the line"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct VerifyOpts {
    /// Verification window as two rationals, repeatable.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], action = clap::ArgAction::Append)]
    window: Vec<String>,
    /// Sample points per window.
    #[arg(long, default_value_t = 150)]
    samples: u32,
    /// Seed for sample-point generation (never affects constructions).
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Build a 10-generator distortion certificate for a map sequence.
    Distort {
        /// JSON file: array of PL maps.
        #[arg(long)]
        input: PathBuf,
        /// Write the certificate JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        verify: VerifyOpts,
        /// Also print the order-embedding report.
        #[arg(long)]
        embed: bool,
    },
    /// Factor a sequence as f_n = g_n . h_n . k_n over anchored intervals.
    Factorize {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay verification of a stored certificate.
    Verify {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        verify: VerifyOpts,
    },
    /// Build and verify an interval system with disjoint mixed orbits.
    Orbits {
        /// Number of intervals to place.
        #[arg(long, default_value_t = 3)]
        intervals: usize,
        /// Denominator bound for the rational search.
        #[arg(long, default_value_t = 64)]
        den_bound: u32,
        /// Iterate depth for the disjointness check.
        #[arg(long, default_value_t = 15)]
        depth: u32,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], action = clap::ArgAction::Append)]
        window: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Non-generation certificate in a finite power of a finite group.
    Counterexample {
        /// Plain-text instance: group table, `gens` rows, `target` row.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Oracle word length for the brute-force cross-check.
        #[arg(long, default_value_t = 4)]
        depth: u32,
    },
    /// Run the built-in property suite on generated fixtures.
    Selftest,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::from(0),
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn parse_windows(raw: &[String]) -> anyhow::Result<Vec<Window>> {
    let mut out = Vec::new();
    for pair in raw.chunks(2) {
        if pair.len() != 2 {
            anyhow::bail!("--window expects two rationals");
        }
        let lo = Rational::parse_strict(&pair[0])?;
        let hi = Rational::parse_strict(&pair[1])?;
        if lo >= hi {
            anyhow::bail!("window [{lo}, {hi}] is empty");
        }
        out.push(Window::new(lo, hi));
    }
    Ok(out)
}

fn read_sequence(path: &PathBuf) -> anyhow::Result<Vec<PLMap>> {
    let text = fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
    let maps: Vec<PLMap> = serde_json::from_str(&text)
        .map_err(|e| anyhow::anyhow!("parse error in {}: {e}", path.display()))?;
    Ok(maps)
}

fn write_json<T: serde::Serialize>(path: &PathBuf, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| anyhow::anyhow!("cannot write {}: {e}", path.display()))?;
    Ok(())
}

fn default_windows(cert: &DistortionCertificate) -> anyhow::Result<Vec<Window>> {
    let realized = RealizedGenerators::realize(&cert.generators)
        .map_err(|e| anyhow::anyhow!("cannot realize generators: {e}"))?;
    Ok(plan_windows(
        &realized,
        &Rational::from_int(-100),
        &Rational::from_int(100),
    ))
}

fn print_ledger(cert: &DistortionCertificate) {
    println!("length ledger (|S| = {} generators):", cert.generators.len());
    println!("  n | k-part 6n+4 | g-part 4n+4 | h-part 4n+4 | |W_n| | bound 14n+12");
    for row in &cert.ledger {
        println!(
            "  {} | {:11} | {:11} | {:11} | {:5} | {}",
            row.n, row.k_component, row.g_component, row.h_component, row.reduced, row.bound
        );
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Distort {
            input,
            out,
            verify,
            embed,
        } => {
            let maps = read_sequence(&input)?;
            let (cert, embed_report) = if embed {
                let (c, r) = embed_ordered(&maps)?;
                (c, Some(r))
            } else {
                (distort(&maps)?, None)
            };
            if let Some(path) = &out {
                write_json(path, &cert)?;
                println!("certificate written to {}", path.display());
            }
            print_ledger(&cert);
            print!("{}", cert.verification);
            if let Some(r) = embed_report {
                print!("{r}");
            }
            let windows = if verify.window.is_empty() {
                if cert.is_empty() {
                    Vec::new()
                } else {
                    default_windows(&cert)?
                }
            } else {
                parse_windows(&verify.window)?
            };
            let report = verify_certificate(&cert, &windows, verify.samples, verify.seed);
            print!("{report}");
            Ok(report.passed() && cert.verification.passed())
        }
        Command::Factorize { input, out } => {
            let maps = read_sequence(&input)?;
            let result = factorize(&maps)?;
            if let Some(path) = &out {
                write_json(path, &result)?;
                println!("factorization written to {}", path.display());
            }
            let report = verify_factorization(&result);
            println!(
                "anchors: X = {}, Y = {}, z = {:?}",
                result.anchors.x_set, result.anchors.y_set, result.anchors.z
            );
            print!("{report}");
            Ok(report.passed())
        }
        Command::Verify { input, verify } => {
            let text = fs::read_to_string(&input)
                .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", input.display()))?;
            let cert: DistortionCertificate = serde_json::from_str(&text)
                .map_err(|e| anyhow::anyhow!("parse error in {}: {e}", input.display()))?;
            let windows = if verify.window.is_empty() {
                if cert.is_empty() {
                    Vec::new()
                } else {
                    default_windows(&cert)?
                }
            } else {
                parse_windows(&verify.window)?
            };
            let report = verify_certificate(&cert, &windows, verify.samples, verify.seed);
            print_ledger(&cert);
            print!("{report}");
            Ok(report.passed())
        }
        Command::Orbits {
            intervals,
            den_bound,
            depth,
            window,
            out,
        } => {
            let sys = build_orbit_system(intervals, den_bound)?;
            if let Some(path) = &out {
                write_json(path, &sys)?;
                println!("orbit system written to {}", path.display());
            }
            let windows = if window.is_empty() {
                vec![Window::new(Rational::from_int(0), Rational::from_int(10_000))]
            } else {
                parse_windows(&window)?
            };
            print!("{}", layout_figure(&sys, 4));
            let mut ok = true;
            for w in &windows {
                let report = verify_orbit_system(&sys, w, depth);
                print!("{report}");
                ok &= report.passed();
            }
            Ok(ok)
        }
        Command::Counterexample { input, out, depth } => {
            let text = fs::read_to_string(&input)
                .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", input.display()))?;
            let (table, gens, target) = parse_counterexample_input(&text)?;
            println!(
                "group {} of order {}, {} generators, dimension {}",
                table.name,
                table.order(),
                gens.len(),
                target.coords.len()
            );
            match nongeneration_certificate(&gens, &target) {
                Some(cert) => {
                    let report = verify_agreement_certificate(&table, &gens, &cert);
                    print!("{report}");
                    let mut ok = report.passed();
                    match brute_force_generated(&table, &gens, &target, depth) {
                        Ok(false) => println!(
                            "brute-force oracle agrees: not generated by words of length <= {depth}"
                        ),
                        Ok(true) => {
                            println!("brute-force oracle CONTRADICTS the certificate");
                            ok = false;
                        }
                        Err(e) => println!("brute-force oracle skipped: {e}"),
                    }
                    if let Some(path) = &out {
                        write_json(path, &cert)?;
                        println!("certificate written to {}", path.display());
                    }
                    Ok(ok)
                }
                None => {
                    println!(
                        "no agreement certificate: the target is constant on every class \
                         (this does not prove generability)"
                    );
                    Ok(true)
                }
            }
        }
        Command::Selftest => selftest(),
    }
}

fn selftest() -> anyhow::Result<bool> {
    let mut report = Report::new("selftest");
    let q = Rational::from_int;

    // exact group structure on a small fixture set
    let f = PLMap::make(
        vec![(q(0), q(0)), (q(1), q(2))],
        Rational::one(),
        Rational::one(),
    )
    .unwrap();
    let g = PLMap::translation(q(3));
    let h = PLMap::affine(Rational::new(1, 2), q(-1));
    let assoc = f.compose(&g).compose(&h) == f.compose(&g.compose(&h));
    report.check("composition is associative", assoc, "triple mismatch");
    report.check(
        "inverses cancel",
        f.compose(&f.invert()).is_identity() && h.invert().invert() == h,
        "inverse law failed",
    );

    // round-trip serialization
    let text = serde_json::to_string(&f).unwrap();
    let back: PLMap = serde_json::from_str(&text).unwrap();
    report.check("serialization round-trips", back == f, "round trip changed the map");

    // distortion pipeline end to end, deterministically
    let fs = vec![g.clone(), f.clone()];
    let cert_a = distort(&fs)?;
    let cert_b = distort(&fs)?;
    report.check(
        "certificates are byte-identical across runs",
        serde_json::to_string(&cert_a)? == serde_json::to_string(&cert_b)?,
        "determinism broken",
    );
    let windows = default_windows(&cert_a)?;
    let verify = verify_certificate(&cert_a, &windows, 40, 1);
    report.check("fresh certificate verifies", verify.passed(), "see verify report");

    // corrupted certificate must fail
    let mut broken = cert_a.clone();
    if let Some(w) = broken.words.last_mut() {
        let mut letters = w.letters().to_vec();
        letters.pop();
        *w = Word::from_letters(letters);
    }
    if let Some(row) = broken.ledger.last_mut() {
        row.reduced = broken.words.last().unwrap().length();
    }
    let bad = verify_certificate(&broken, &windows, 40, 1);
    report.check(
        "corrupted certificate is rejected with a witness",
        !bad.passed() && bad.failures().any(|c| c.witness.is_some()),
        "corruption not caught",
    );

    // orbit system
    let sys: OrbitSystem = build_orbit_system(2, 32)?;
    let orbit_report = verify_orbit_system(&sys, &Window::new(q(0), q(500)), 10);
    report.check("orbit system verifies", orbit_report.passed(), "see orbit report");

    // counterexample engine
    let table = FiniteGroupTable::symmetric_3();
    let gens = vec![ProductElement {
        coords: vec![1, 1, 2, 0],
    }];
    let target = ProductElement {
        coords: vec![1, 0, 2, 0],
    };
    let cert = nongeneration_certificate(&gens, &target);
    let ok = match &cert {
        Some(c) => {
            verify_agreement_certificate(&table, &gens, c).passed()
                && !brute_force_generated(&table, &gens, &target, 4)?
        }
        None => false,
    };
    report.check("non-generation certificate confirmed by the oracle", ok, "oracle disagrees");

    print!("{report}");
    Ok(report.passed())
}
