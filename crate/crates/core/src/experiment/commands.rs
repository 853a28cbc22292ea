use num_complex::Complex64;
use serde::Serialize;

use crate::criteria::{boundedness_check, classify, ClassifyOptions, CriterionReport, Verdict};
use crate::error::{BlochError, Result};
use crate::holo::{ClosedForm, HoloFunction, HoloSelfMap, SpecDocument};
use crate::norms::{bloch_norm_estimate, lipschitz_norm_estimate, timoney_q, NormEstimate};
use crate::oracle::{
    antiderivative_closed_form, fd_criterion_density, gradient_discrepancy, grid_covers, timoney_by_search, uniform_grid_bloch_norm,
    uniform_grid_sup, OracleResult, DERIVATIVE_THRESHOLD, SUP_THRESHOLD,
};
use crate::polydisk::coords_to_pairs;
use crate::sampling::random_points;
use crate::testfn::Family;

use super::corpus::Corpus;
use super::lemmas::{run_suite, LemmaSettings};
use super::{csv_string, CommandOutput, ExperimentConfig};

/// Points of the finite-difference gradient comparison.
const ORACLE_POINTS: usize = 1000;
/// Deepest radial level of those points.
const ORACLE_LEVEL: f64 = 5.0;
/// Points of the Timoney direction search.
const TIMONEY_POINTS: usize = 5;

fn load_specs(config: &ExperimentConfig) -> Result<Vec<(String, SpecDocument)>> {
    if config.specs.is_empty() {
        return Err(BlochError::InvalidParameter("this command needs at least one --spec file".into()));
    }
    config.specs.iter().map(|p| Ok((p.display().to_string(), SpecDocument::load(p)?))).collect()
}

fn certified(phi: HoloSelfMap, config: &ExperimentConfig) -> Result<HoloSelfMap> {
    if phi.is_certified() {
        Ok(phi)
    } else {
        phi.certified(&config.plan)
    }
}

fn point_json(z: &[Complex64]) -> String {
    serde_json::to_string(&coords_to_pairs(z)).expect("pairs serialize")
}

fn oracle_points(n: usize, seed: u64) -> Vec<Vec<Complex64>> {
    random_points(n, ORACLE_POINTS, seed, ORACLE_LEVEL).into_iter().map(|z| z.into_coords()).collect()
}

/// Oracle checks for one function: FD partials, the uniform-grid sup
/// against `primary` (when given) and, for family F, the closed-form
/// antiderivative.
fn function_oracle(label: &str, f: &HoloFunction, p: f64, primary: Option<&NormEstimate>, seed: u64) -> Result<Vec<OracleResult>> {
    let n = f.dim();
    let pts = oracle_points(n, seed);
    let (d, _) = gradient_discrepancy(f, &pts)?;
    let mut out = vec![OracleResult {
        quantity: format!("{label}: partials"),
        primary: 0.0,
        oracle: d,
        discrepancy: d,
        threshold: DERIVATIVE_THRESHOLD,
        breach: !(d <= DERIVATIVE_THRESHOLD),
    }];
    if let Some(primary) = primary {
        let grid = uniform_grid_bloch_norm(f, p)?;
        let covered = grid_covers(primary.witness.coords());
        out.push(OracleResult::sup(format!("{label}: B^{p} norm"), primary.value, grid, SUP_THRESHOLD, covered));
    }
    for z in pts.iter().take(TIMONEY_POINTS) {
        let exact = timoney_q(f, z)?;
        let found = timoney_by_search(f, z, 2000, seed)?;
        out.push(OracleResult::sup(format!("{label}: timoney q at {}", point_json(z)), exact, found, SUP_THRESHOLD, true));
    }
    if let HoloFunction::Closed(ClosedForm::Test(t)) = f {
        if t.family() == Family::F {
            let worst = pts
                .iter()
                .map(|z| {
                    let a = antiderivative_closed_form(t.w(), t.p(), z[t.l()]);
                    let b = t.eval(z)?;
                    Ok((a - b).norm() / a.norm().max(b.norm()).max(1e-300))
                })
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            out.push(OracleResult {
                quantity: format!("{label}: antiderivative"),
                primary: 0.0,
                oracle: worst,
                discrepancy: worst,
                threshold: 1e-10,
                breach: !(worst <= 1e-10),
            });
        }
    }
    Ok(out)
}

/// Oracle checks for a self-map: component partials and the uniform-grid
/// sup of the criterion density.
fn map_oracle(label: &str, phi: &HoloSelfMap, p: f64, q: f64, primary: &NormEstimate, seed: u64) -> Result<Vec<OracleResult>> {
    let mut out = Vec::new();
    for (l, f) in phi.components().iter().enumerate() {
        out.extend(function_oracle(&format!("{label} component {}", l + 1), f, p, None, seed)?);
    }
    let grid = uniform_grid_sup(phi.dim(), |z| fd_criterion_density(phi, p, q, z));
    let covered = grid_covers(primary.witness.coords());
    let quantity = format!("{label}: criterion density sup (p={p}, q={q})");
    out.push(OracleResult::sup(quantity, primary.sup, grid, SUP_THRESHOLD, covered));
    Ok(out)
}

#[derive(Serialize)]
struct NormRow {
    spec: String,
    component: usize,
    p: f64,
    bloch: NormEstimate,
    #[serde(skip_serializing_if = "Option::is_none")]
    lipschitz: Option<LipschitzRow>,
}

#[derive(Serialize)]
struct LipschitzRow {
    exponent: f64,
    estimate: NormEstimate,
}

#[derive(Serialize)]
struct NormResults {
    estimates: Vec<NormRow>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    oracle: Vec<OracleResult>,
}

/// B^p norms of every function in every spec; for `0 < p < 1` also the
/// Lipschitz norm of exponent `1 - p`.
pub fn cmd_norm(config: &ExperimentConfig) -> Result<CommandOutput> {
    let specs = load_specs(config)?;
    let mut rows = Vec::new();
    let mut oracle = Vec::new();
    for (label, doc) in &specs {
        for (c, f) in doc.functions(config.degree_cap)?.iter().enumerate() {
            for p in config.ps(&[1.0]) {
                let bloch = bloch_norm_estimate(f, p, &config.plan)?;
                let lipschitz = if p < 1.0 {
                    Some(LipschitzRow { exponent: 1.0 - p, estimate: lipschitz_norm_estimate(f, 1.0 - p, &config.plan)? })
                } else {
                    None
                };
                if config.oracle {
                    let name = format!("{label}[{}]", c + 1);
                    oracle.extend(function_oracle(&name, f, p, Some(&bloch), config.plan.seed)?);
                }
                rows.push(NormRow { spec: label.clone(), component: c + 1, p, bloch, lipschitz });
            }
        }
    }
    let csv = csv_string(&["spec", "component", "p", "kind", "value", "offset", "sup", "witness", "converged"], |w| {
        for r in &rows {
            let mut emit = |kind: &str, e: &NormEstimate| {
                w.write_record([
                    r.spec.clone(),
                    r.component.to_string(),
                    r.p.to_string(),
                    kind.to_string(),
                    e.value.to_string(),
                    e.offset.to_string(),
                    e.sup.to_string(),
                    point_json(e.witness.coords()),
                    e.converged.to_string(),
                ])
            };
            emit("bloch", &r.bloch)?;
            if let Some(l) = &r.lipschitz {
                emit("lipschitz", &l.estimate)?;
            }
        }
        Ok(())
    })?;
    let failures = oracle.iter().filter(|o| o.breach).count();
    Ok(CommandOutput::new("norm", config, NormResults { estimates: rows, oracle }, failures)?.with_csv(csv))
}

#[derive(Serialize)]
struct ClassifyCase {
    spec: String,
    report: CriterionReport,
}

#[derive(Serialize)]
struct ClassifyResults {
    cases: Vec<ClassifyCase>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    oracle: Vec<OracleResult>,
}

/// Classifies every spec map for every `(p, q)` pair. The CSV prepends a
/// `case` column to the per-report table.
pub fn cmd_classify(config: &ExperimentConfig) -> Result<CommandOutput> {
    let specs = load_specs(config)?;
    let options = ClassifyOptions { theorems: config.theorems.clone(), paths: None };
    let mut cases = Vec::new();
    let mut oracle = Vec::new();
    for (label, doc) in &specs {
        let phi = certified(doc.map(config.degree_cap)?, config)?;
        for p in config.ps(&[1.0]) {
            for q in config.qs(&[1.0]) {
                let report = classify(&phi, p, q, &config.plan, &options)?;
                if config.oracle {
                    oracle.extend(map_oracle(label, &phi, p, q, &report.sup_estimate, config.plan.seed)?);
                }
                cases.push(ClassifyCase { spec: label.to_string(), report });
            }
        }
    }
    let csv = classify_csv(&cases)?;
    let failures = oracle.iter().filter(|o| o.breach).count();
    Ok(CommandOutput::new("classify", config, ClassifyResults { cases, oracle }, failures)?.with_csv(csv))
}

fn classify_csv(cases: &[ClassifyCase]) -> Result<String> {
    let mut out = String::from("case,sample_index,path_id,z,density,verdict\n");
    for (i, c) in cases.iter().enumerate() {
        let mut buf = Vec::new();
        c.report.write_csv(&mut buf)?;
        let text = String::from_utf8(buf).expect("csv output is UTF-8");
        for line in text.lines().skip(1) {
            out.push_str(&format!("{i},{line}\n"));
        }
    }
    Ok(out)
}

/// Runs the invariant suite over `corpus` (the built-in corpus when `None`
/// and no spec files are given).
pub fn cmd_verify_lemmas(config: &ExperimentConfig, corpus: Option<&Corpus>) -> Result<CommandOutput> {
    let p = config.ps(&[0.5])[0];
    let q = config.qs(&[p])[0];
    let owned;
    let corpus = match corpus {
        Some(c) => c,
        None => {
            owned = if config.specs.is_empty() {
                Corpus::builtin(config.dimension, p, config.plan.seed)?
            } else {
                Corpus::from_specs(&config.specs, config.degree_cap)?
            };
            &owned
        }
    };
    let n = corpus
        .functions
        .first()
        .map(|(_, f)| f.dim())
        .or_else(|| corpus.maps.first().map(|(_, m)| m.dim()))
        .unwrap_or(config.dimension);
    let settings = LemmaSettings { n, p, q, plan: config.plan.clone(), degree_cap: config.degree_cap };
    let rows = run_suite(corpus, &settings)?;
    let csv = csv_string(&["invariant", "passed", "slack", "checked", "witness", "witness_point"], |w| {
        for r in &rows {
            let point = r.witness_point.as_ref().map(|p| serde_json::to_string(p).expect("pairs serialize"));
            w.write_record([
                r.invariant.clone(),
                r.passed.to_string(),
                r.slack.to_string(),
                r.checked.to_string(),
                r.witness.clone(),
                point.unwrap_or_default(),
            ])?;
        }
        Ok(())
    })?;
    let failures = rows.iter().filter(|r| !r.passed).count();
    Ok(CommandOutput::new("verify-lemmas", config, &rows, failures)?.with_csv(csv))
}

/// The built-in oracle corpus: the lemma corpus at exponent `p`.
pub fn oracle_corpus(n: usize, p: f64, seed: u64) -> Result<Corpus> {
    Corpus::builtin(n, p, seed)
}

/// Cross-checks the corpus (or the spec files) against the independent
/// oracle paths.
pub fn cmd_oracle(config: &ExperimentConfig) -> Result<CommandOutput> {
    let p = config.ps(&[1.0])[0];
    let q = config.qs(&[p])[0];
    let corpus = if config.specs.is_empty() {
        oracle_corpus(config.dimension, p, config.plan.seed)?
    } else {
        Corpus::from_specs(&config.specs, config.degree_cap)?
    };
    let mut results = Vec::new();
    for (label, f) in &corpus.functions {
        let primary = bloch_norm_estimate(f, p, &config.plan)?;
        results.extend(function_oracle(label, f, p, Some(&primary), config.plan.seed)?);
    }
    for (label, phi) in &corpus.maps {
        let phi = certified(phi.clone(), config)?;
        let (_, est) = boundedness_check(&phi, p, q, &config.plan)?;
        results.extend(map_oracle(label, &phi, p, q, &est, config.plan.seed)?);
    }
    let csv = csv_string(&["quantity", "primary", "oracle", "discrepancy", "threshold", "breach"], |w| {
        for r in &results {
            w.write_record([
                r.quantity.clone(),
                r.primary.to_string(),
                r.oracle.to_string(),
                r.discrepancy.to_string(),
                r.threshold.to_string(),
                r.breach.to_string(),
            ])?;
        }
        Ok(())
    })?;
    let failures = results.iter().filter(|r| r.breach).count();
    Ok(CommandOutput::new("oracle", config, &results, failures)?.with_csv(csv))
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub map: String,
    pub p: f64,
    pub q: f64,
    pub bounded: Verdict,
    pub sup: f64,
    pub compact: Verdict,
    pub compact_rule: String,
    /// Largest sampled `sup |φ_l|`.
    pub image_sup: f64,
}

/// Tabulates classification over the `(p, q)` grid for every map; the
/// default grid is `{0.3, 0.5, 0.7}^2` and the default maps are the
/// identity and `z/2`.
pub fn cmd_sweep(config: &ExperimentConfig) -> Result<CommandOutput> {
    let maps: Vec<(String, HoloSelfMap)> = if config.specs.is_empty() {
        super::corpus::builtin_maps(config.dimension)?
            .into_iter()
            .filter(|(name, _)| name == "identity" || name == "half")
            .collect()
    } else {
        load_specs(config)?
            .into_iter()
            .map(|(label, doc)| Ok((label, doc.map(config.degree_cap)?)))
            .collect::<Result<_>>()?
    };
    sweep_maps(config, &maps)
}

pub(crate) fn sweep_maps(config: &ExperimentConfig, maps: &[(String, HoloSelfMap)]) -> Result<CommandOutput> {
    let grid = [0.3, 0.5, 0.7];
    let options = ClassifyOptions { theorems: config.theorems.clone(), paths: None };
    let mut rows = Vec::new();
    for (label, phi) in maps {
        let phi = certified(phi.clone(), config)?;
        for p in config.ps(&grid) {
            for q in config.qs(&grid) {
                let r = classify(&phi, p, q, &config.plan, &options)?;
                rows.push(SweepRow {
                    map: label.clone(),
                    p,
                    q,
                    bounded: r.bounded,
                    sup: r.sup_estimate.sup,
                    compact: r.compact,
                    compact_rule: r.compact_rule.clone(),
                    image_sup: r.image_sup.iter().copied().fold(0.0, f64::max),
                });
            }
        }
    }
    let csv = csv_string(&["map", "p", "q", "bounded", "sup", "compact", "compact_rule", "image_sup"], |w| {
        for r in &rows {
            w.write_record([
                r.map.clone(),
                r.p.to_string(),
                r.q.to_string(),
                r.bounded.to_string(),
                r.sup.to_string(),
                r.compact.to_string(),
                r.compact_rule.clone(),
                r.image_sup.to_string(),
            ])?;
        }
        Ok(())
    })?;
    Ok(CommandOutput::new("sweep", config, &rows, 0)?.with_csv(csv))
}
