//! Desk-scale acceptance run. Prints one PASS/FAIL line per criterion.
//!
//! Exits non-zero when a criterion fails that is not listed in
//! `KNOWN_FAILURES`. A known failure still prints FAIL with its reason.

use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bloch_lab::criteria::{
    boundedness_check, classify, compactness_profile, criterion_density, default_paths, schwarz_expansion_sup,
    ApproachMode, ClassifyOptions, Verdict,
};
use bloch_lab::experiment::{oracle_corpus, random_polynomials, Corpus};
use bloch_lab::holo::{moebius_automorphism, HoloFunction, HoloSelfMap, Series};
use bloch_lab::norms::{
    bloch_density, bloch_norm_estimate, lipschitz_norm_estimate, little_bloch_gap, pointeval_bound, timoney_q,
};
use bloch_lab::oracle::{fd_gradient, uniform_grid_bloch_norm, uniform_grid_sup, FD_STEP};
use bloch_lab::polydisk::disk_weight;
use bloch_lab::sampling::{random_points, SamplingPlan};
use bloch_lab::testfn::{family_norm_bound, tail_bound, Family, TestFunction};
use bloch_lab::Result;

const SEED: u64 = 20_240_611;

/// Criteria expected to fail, with the reason. Recorded in the decision log.
const KNOWN_FAILURES: &[(usize, &str)] = &[(
    3,
    "the stated H-family bound does not hold for p < 1 once |w| is close to 1; \
     (1-|w|^2)^(p-1) grows faster than the bound allows",
)];

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self { passed, detail: detail.into() }
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn plan() -> SamplingPlan {
    SamplingPlan::default().with_seed(SEED)
}

fn shifted_half() -> Result<HoloSelfMap> {
    HoloSelfMap::from_series(vec![Series::coordinate(1, 0).scale(c(0.5, 0.0)).add(&Series::constant(1, c(0.5, 0.0)))])
}

fn identity_map() -> Result<Outcome> {
    let mut worst_density: f64 = 0.0;
    let mut notes = Vec::new();
    let mut passed = true;
    for n in 1..=3 {
        let phi = HoloSelfMap::identity(n);
        let nf = n as f64;
        for z in random_points(n, 10_000, SEED + n as u64, 40.0) {
            let d = criterion_density(&phi, 1.0, 1.0, z.coords())?;
            worst_density = worst_density.max((d - nf).abs());
        }
        let (verdict, est) = boundedness_check(&phi, 1.0, 1.0, &plan())?;
        let paths: Vec<_> = default_paths(&phi, ApproachMode::ImageToBoundary).into_iter().take(16).collect();
        let profile = compactness_profile(&phi, 1.0, 1.0, &paths)?;
        let tails_ok = paths.len() == 16
            && profile.tables.iter().all(|t| (t.densities.last().copied().unwrap_or(f64::NAN) - nf).abs() <= 1e-9);
        let ok = verdict == Verdict::Holds
            && (est.sup - nf).abs() <= 1e-9
            && profile.verdict == Verdict::Fails
            && tails_ok;
        passed &= ok;
        notes.push(format!("n={n}: bounded {verdict}, sup {:.12}, profile {}", est.sup, profile.verdict));
    }
    passed &= worst_density <= 1e-12;
    Ok(Outcome::new(passed, format!("max |density - n| {worst_density:.1e}; {}", notes.join("; "))))
}

fn automorphism_metric() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    let mut non_failing = 0;
    for i in 0..20 {
        let a: Vec<Complex64> =
            (0..2).map(|_| Complex64::from_polar(rng.gen_range(0.0..0.9), rng.gen_range(0.0..std::f64::consts::TAU))).collect();
        let theta: Vec<f64> = (0..2).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
        let sigma = if rng.gen_bool(0.5) { vec![0, 1] } else { vec![1, 0] };
        let phi = moebius_automorphism(&a, &theta, &sigma)?;
        for z in random_points(2, 1_000, SEED + i, 12.0) {
            worst = worst.max((schwarz_expansion_sup(&phi, z.coords())? - 1.0).abs());
        }
        let report = classify(&phi, 1.0, 1.0, &plan(), &ClassifyOptions::default())?;
        if report.compact != Verdict::Fails {
            non_failing += 1;
        }
    }
    Ok(Outcome::new(
        worst <= 1e-9 && non_failing == 0,
        format!("max |ratio - 1| {worst:.1e}; {non_failing} of 20 maps not classified non-compact"),
    ))
}

fn test_family_bounds() -> Result<Outcome> {
    let ws: Vec<Complex64> = [0.3, 0.6, 0.9, 0.99]
        .iter()
        .flat_map(|r| (0..8).map(move |k| Complex64::from_polar(*r, std::f64::consts::TAU * k as f64 / 8.0)))
        .collect();
    let mut violations = Vec::new();
    let mut checked = 0;
    for p in [0.5, 1.0, 2.0] {
        for family in [Family::F, Family::G, Family::H] {
            let bound = family_norm_bound(family, p);
            let mut worst = (f64::NEG_INFINITY, c(0.0, 0.0), 0);
            for l in 0..2 {
                if family == Family::H && l == 0 {
                    continue;
                }
                for &w in &ws {
                    let t = TestFunction::new(family, 2, l, w, p)?;
                    let value = bloch_norm_estimate(&t.to_holo(), p, &plan())?.value;
                    checked += 1;
                    if value - bound > worst.0 {
                        worst = (value - bound, w, l + 1);
                    }
                }
            }
            if worst.0 > 1e-9 {
                violations.push(format!(
                    "{family} p={p}: exceeds {bound:.4} by {:.4} at l={} w={:.3}",
                    worst.0, worst.2, worst.1
                ));
            }
        }
    }
    let mut identity_gap: f64 = 0.0;
    for p in [0.5, 1.0, 2.0] {
        for l in 0..2 {
            for &w in &ws {
                let t = TestFunction::new(Family::F, 2, l, w, p)?;
                let f = t.to_holo();
                for z in random_points(2, 50, SEED + l as u64, 20.0) {
                    let z = z.coords();
                    let expected = (disk_weight(z[l]) / (c(1.0, 0.0) - w.conj() * z[l]).norm()).powf(p);
                    let d = bloch_density(&f, p, z)?;
                    identity_gap = identity_gap.max((d - expected).abs() / expected.max(1.0));
                }
            }
        }
    }
    let passed = violations.is_empty() && identity_gap <= 1e-12;
    let mut detail = format!("{checked} norms, F identity gap {identity_gap:.1e}");
    if !violations.is_empty() {
        detail.push_str("; ");
        detail.push_str(&violations.join("; "));
    }
    Ok(Outcome::new(passed, detail))
}

fn truncation_tail() -> Result<Outcome> {
    let w = c(0.5, 0.0);
    let g = TestFunction::new(Family::G, 2, 0, w, 1.0)?.to_holo();
    let mut worst = f64::NEG_INFINITY;
    for m in [2usize, 4, 8, 16] {
        let gap = little_bloch_gap(&g, 1.0, m, &plan())?.value;
        let allowed = w.norm().powi(m as i32 + 1) / (1.0 - w.norm()) + 1e-6;
        worst = worst.max(gap - allowed);
    }
    let t3 = tail_bound(1.0, w, 3)?;
    Ok(Outcome::new(
        worst <= 0.0 && (t3 - 0.125).abs() <= 1e-12,
        format!("worst gap minus bound {worst:.3e}; tail(m=3) = {t3:.15}"),
    ))
}

fn point_evaluation() -> Result<Outcome> {
    let polys = random_polynomials(2, 50, 4, SEED);
    let pts = random_points(2, 10_000, SEED, 20.0);
    let mut violations = 0usize;
    let mut worst_ratio: f64 = 0.0;
    for p in [0.5, 1.0, 2.0] {
        for (_, f) in &polys {
            let norm = bloch_norm_estimate(f, p, &plan())?.value;
            for z in &pts {
                let lhs = f.eval(z.coords())?.norm();
                let rhs = pointeval_bound(p, z.coords())? * norm;
                worst_ratio = worst_ratio.max(lhs / rhs);
                if lhs > rhs * (1.0 + 1e-3) {
                    violations += 1;
                }
            }
        }
    }
    let factor = pointeval_bound(0.5, &[c(0.3, 0.2)])?;
    Ok(Outcome::new(
        violations == 0 && factor == 3.0,
        format!("{violations} violations, max |f(z)|/bound {worst_ratio:.4}; p=0.5 n=1 factor {factor}"),
    ))
}

fn hardy_littlewood_band() -> Result<Outcome> {
    let polys = random_polynomials(2, 50, 4, SEED);
    let band = |plan: &SamplingPlan| -> Result<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for (_, f) in &polys {
            let r = lipschitz_norm_estimate(f, 0.5, plan)?.value / bloch_norm_estimate(f, 0.5, plan)?.value;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        Ok((lo, hi))
    };
    let (lo, hi) = band(&plan())?;
    let (lo2, hi2) = band(&plan().doubled())?;
    let movement = ((lo2 - lo) / lo).abs().max(((hi2 - hi) / hi).abs());
    Ok(Outcome::new(
        lo > 0.0 && movement < 0.1,
        format!("band [{lo:.4}, {hi:.4}] -> [{lo2:.4}, {hi2:.4}], movement {:.2}%", 100.0 * movement),
    ))
}

fn non_compact_shift() -> Result<Outcome> {
    let phi = shifted_half()?;
    let (bounded, _) = boundedness_check(&phi, 1.0, 1.0, &plan())?;
    let paths = default_paths(&phi, ApproachMode::ImageToBoundary);
    let profile = compactness_profile(&phi, 1.0, 1.0, &paths)?;
    let tail = profile.worst_tail;
    Ok(Outcome::new(
        bounded == Verdict::Holds && !paths.is_empty() && (tail - 1.0).abs() <= 1e-3 && profile.verdict == Verdict::Fails,
        format!("bounded {bounded}, {} path(s), tail {tail:.9}, profile {}", paths.len(), profile.verdict),
    ))
}

fn compactness_shortcuts() -> Result<Outcome> {
    let half = HoloSelfMap::from_series(vec![Series::coordinate(1, 0).scale(c(0.5, 0.0))])?;
    let r = classify(&half, 1.0, 1.0, &plan(), &ClassifyOptions::default())?;
    let first = r.compact == Verdict::Holds && r.compact_rule == "image-inside-polydisk";

    let id = HoloSelfMap::identity(2);
    let r2 = classify(&id, 0.5, 1.0, &plan(), &ClassifyOptions::default())?;
    let per = r2.verdicts.get("compactness-per-coordinate").map(|v| v.verdict);
    let coordinate_tables: Vec<_> =
        r2.boundary_limsup.iter().filter(|t| matches!(t.mode, ApproachMode::CoordinateToOne { .. })).collect();
    let tail = coordinate_tables.iter().filter_map(|t| t.densities.last().copied()).fold(0.0, f64::max);
    let second = r2.compact == Verdict::Holds && per == Some(Verdict::Holds) && !coordinate_tables.is_empty() && tail < 1e-3;
    Ok(Outcome::new(
        first && second,
        format!(
            "z/2: compact {} via {}; identity p=0.5 q=1: compact {}, per-coordinate {:?}, max tail {tail:.2e}",
            r.compact, r.compact_rule, r2.compact, per
        ),
    ))
}

fn oracle_agreement() -> Result<Outcome> {
    let corpus = oracle_corpus(2, 1.0, SEED)?;
    let pts = random_points(2, 1_000, SEED, 5.0);
    let mut worst: f64 = 0.0;
    let mut functions: Vec<HoloFunction> = corpus.functions.iter().map(|(_, f)| f.clone()).collect();
    for (_, phi) in &corpus.maps {
        functions.extend(phi.components().iter().cloned());
    }
    for f in &functions {
        for z in &pts {
            let exact = f.gradient_at(z.coords())?;
            let fd = fd_gradient(f, z.coords(), FD_STEP)?;
            for (a, b) in exact.iter().zip(&fd) {
                worst = worst.max((a - b).norm() / a.norm().max(1.0));
            }
        }
    }
    let mut overshoots = Vec::new();
    for (label, f) in &corpus.functions {
        let primary = bloch_norm_estimate(f, 1.0, &plan())?.value;
        let grid = uniform_grid_bloch_norm(f, 1.0)?;
        if grid > primary * (1.0 + 1e-9) + 1e-12 {
            overshoots.push(format!("{label}: grid {grid:.6} > primary {primary:.6}"));
        }
    }
    for (label, phi) in &corpus.maps {
        let (_, est) = boundedness_check(phi, 1.0, 1.0, &plan())?;
        let grid = uniform_grid_sup(2, |z| criterion_density(phi, 1.0, 1.0, z));
        if grid > est.sup * (1.0 + 1e-9) + 1e-12 {
            overshoots.push(format!("{label}: grid {grid:.6} > primary {:.6}", est.sup));
        }
    }
    let mut detail = format!("{} functions, max FD discrepancy {worst:.2e}, {} sup overshoot(s)", functions.len(), overshoots.len());
    if !overshoots.is_empty() {
        detail.push_str(": ");
        detail.push_str(&overshoots.join("; "));
    }
    Ok(Outcome::new(worst <= 1e-6 && overshoots.is_empty(), detail))
}

fn l1_l2_sandwich() -> Result<Outcome> {
    let mut worst = f64::INFINITY;
    let mut count = 0usize;
    for n in [1usize, 2, 3] {
        let corpus = Corpus::builtin(n, 0.5, SEED)?;
        let root_n = (n as f64).sqrt();
        let pts = random_points(n, 1_000, SEED + n as u64, 20.0);
        for (_, f) in &corpus.functions {
            for z in &pts {
                let d = bloch_density(f, 1.0, z.coords())?;
                let q = timoney_q(f, z.coords())?;
                let tol = 1e-12 * d.max(1.0);
                worst = worst.min((d - q).min(root_n * q - d) + tol);
                count += 1;
            }
        }
    }
    Ok(Outcome::new(worst >= 0.0, format!("{count} point checks, minimum slack {worst:.3e}")))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Result<Outcome>); 10] = [
        ("identity-map", identity_map),
        ("automorphism-metric", automorphism_metric),
        ("test-family-bounds", test_family_bounds),
        ("truncation-tail", truncation_tail),
        ("point-evaluation", point_evaluation),
        ("hardy-littlewood-band", hardy_littlewood_band),
        ("non-compact-shift", non_compact_shift),
        ("compactness-shortcuts", compactness_shortcuts),
        ("oracle-agreement", oracle_agreement),
        ("l1-l2-sandwich", l1_l2_sandwich),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut unexpected = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = i + 1;
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = run().unwrap_or_else(|e| Outcome::new(false, format!("error: {e}")));
        let secs = start.elapsed().as_secs_f64();
        let known = KNOWN_FAILURES.iter().find(|(k, _)| *k == id).map(|(_, why)| *why);
        let status = if outcome.passed { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} {name:<22} {status} ({secs:.1}s) {}", outcome.detail);
        match (outcome.passed, known) {
            (false, Some(why)) => println!("             known failure: {why}"),
            (false, None) => unexpected += 1,
            (true, Some(_)) => println!("             listed as a known failure but passed"),
            (true, None) => {}
        }
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
