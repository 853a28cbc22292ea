//! Combined boundedness and compactness classification of `C_φ : B^p -> B^q`.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::holo::{Certificate, HoloSelfMap};
use crate::norms::NormEstimate;
use crate::polydisk::{coords_to_pairs, PolydiskPoint};
use crate::sampling::{self, SamplingPlan};

use super::{
    boundedness_check, check_exponents, compactness_profile, default_paths, profile_verdict, require_certified,
    schwarz_ratio, ApproachMode, BoundaryPath, PathTable, ProfileOutcome, Verdict,
};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Identifiers of the individual rules a report can contain.
pub const THEOREM_IDS: [&str; 7] = [
    "boundedness",
    "image-inside-polydisk",
    "exponent-shortcut",
    "compactness-global",
    "jacobian-metric-lower-bound",
    "compactness-per-coordinate",
    "schwarz-plateau",
];

/// Sampled `sup |φ_l|` below `1 - IMAGE_MARGIN` counts as an image inside
/// the polydisk.
const IMAGE_MARGIN: f64 = 1e-3;
/// Grid minimum of the smallest squared weighted singular value above which
/// the metric lower bound is taken to hold.
const JACOBIAN_FLOOR: f64 = 1e-3;

#[derive(Clone, Debug, Default)]
pub struct ClassifyOptions {
    /// Rules to run; empty selects all. Boundedness always runs.
    pub theorems: Vec<String>,
    /// Paths replacing the default radial rays.
    pub paths: Option<Vec<BoundaryPath>>,
}

impl ClassifyOptions {
    fn wants(&self, id: &str) -> bool {
        self.theorems.is_empty() || self.theorems.iter().any(|t| t == id)
    }

    fn paths_for(&self, phi: &HoloSelfMap, mode: ApproachMode) -> Vec<BoundaryPath> {
        match &self.paths {
            Some(paths) => paths.iter().filter(|p| p.mode == mode).cloned().collect(),
            None => default_paths(phi, mode),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub verdict: Verdict,
    /// How the numerical criterion translates into an operator statement.
    pub rule: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<PolydiskPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness_path: Option<usize>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl VerdictRecord {
    fn new(verdict: Verdict, rule: &str) -> Self {
        Self { verdict, rule: rule.into(), margin: None, witness: None, witness_path: None, note: String::new() }
    }

    fn margin(mut self, m: f64) -> Self {
        self.margin = Some(m);
        self
    }

    fn witness(mut self, z: PolydiskPoint) -> Self {
        self.witness = Some(z);
        self
    }

    fn note(mut self, s: impl Into<String>) -> Self {
        self.note = s.into();
        self
    }

    fn from_profile(out: &ProfileOutcome, rule: &str) -> Self {
        let mut r = VerdictRecord::new(out.verdict, rule).margin(out.worst_tail);
        r.witness_path = out.witness_path;
        if let Some(id) = out.witness_path {
            r.witness = out.tables.iter().find(|t| t.path_id == id).and_then(|t| t.points.last().cloned());
        }
        if out.vacuous {
            r.note = "no probed path realizes the approach".into();
        }
        r
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    pub n: usize,
    pub p: f64,
    pub q: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchwarzSummary {
    /// Estimated `sup_z` of the largest squared weighted singular value.
    pub sup: f64,
    pub sup_witness: PolydiskPoint,
    /// Grid minimum of the smallest squared weighted singular value.
    pub inf: f64,
    pub inf_witness: PolydiskPoint,
    pub level_profile: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub schema_version: u32,
    pub parameters: Parameters,
    pub seed: u64,
    pub certificate: Certificate,
    pub sup_estimate: NormEstimate,
    /// Sampled `sup |φ_l|` per component.
    pub image_sup: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schwarz: Option<SchwarzSummary>,
    pub boundary_limsup: Vec<PathTable>,
    pub verdicts: BTreeMap<String, VerdictRecord>,
    pub bounded: Verdict,
    pub compact: Verdict,
    /// Rule that produced `compact`.
    pub compact_rule: String,
}

impl CriterionReport {
    /// One row per path point plus one row for the supremum witness:
    /// `sample_index, path_id, z, density, verdict`, with `z` as a JSON list
    /// of `[re, im]` pairs.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["sample_index", "path_id", "z", "density", "verdict"])?;
        let z = serde_json::to_string(&coords_to_pairs(self.sup_estimate.witness.coords()))?;
        w.write_record(["0", "sup", &z, &self.sup_estimate.sup.to_string(), &self.bounded.to_string()])?;
        for t in &self.boundary_limsup {
            for (i, (pt, d)) in t.points.iter().zip(&t.densities).enumerate() {
                let z = serde_json::to_string(&coords_to_pairs(pt.coords()))?;
                w.write_record([i.to_string(), t.path_id.to_string(), z, d.to_string(), t.verdict.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn renumber(tables: &mut Vec<PathTable>, extra: Vec<PathTable>) -> Vec<usize> {
    let base = tables.len();
    let mut ids = Vec::new();
    for mut t in extra {
        t.path_id += base;
        ids.push(t.path_id);
        tables.push(t);
    }
    ids
}

/// Runs the boundedness criterion, then the compactness route that applies
/// to `(p, q)`: an image inside the polydisk, the `p < 1 <= q` shortcut, the
/// global boundary limit with the Jacobian metric bound for `p >= 1`, or the
/// per-coordinate limits for `p < 1`.
pub fn classify(
    phi: &HoloSelfMap,
    p: f64,
    q: f64,
    plan: &SamplingPlan,
    options: &ClassifyOptions,
) -> Result<CriterionReport> {
    check_exponents(p, q)?;
    require_certified(phi)?;
    let n = phi.dim();
    let mut verdicts = BTreeMap::new();
    let mut tables = Vec::new();

    let (bounded, sup_estimate) = boundedness_check(phi, p, q, plan)?;
    let mut rec = VerdictRecord::new(bounded, "C_φ bounded iff sup of the criterion density is finite")
        .margin(sup_estimate.sup)
        .witness(sup_estimate.witness.clone());
    if bounded == Verdict::Inconclusive {
        rec.note = "no plateau and no divergence across the last boundary levels".into();
    }
    verdicts.insert("boundedness".to_string(), rec);

    let image_sup = (0..n)
        .map(|l| Ok(sampling::maximize(n, plan, |z| Ok(phi.eval(z)?[l].norm()))?.value))
        .collect::<Result<Vec<f64>>>()?;
    let inside = image_sup.iter().all(|m| *m < 1.0 - IMAGE_MARGIN);

    let mut compact = Verdict::Inconclusive;
    let mut compact_rule = String::from("undecided");
    if bounded == Verdict::Fails {
        compact = Verdict::Fails;
        compact_rule = "boundedness".into();
    }

    if options.wants("image-inside-polydisk") {
        let worst = image_sup.iter().copied().fold(0.0, f64::max);
        let v = if inside { Verdict::Holds } else { Verdict::Inconclusive };
        let rec = VerdictRecord::new(v, "every ‖φ_l‖_∞ < 1 and φ_l in B^q imply compactness")
            .margin(1.0 - worst)
            .note(if inside { "sampled sup |φ_l| stays below 1" } else { "some component approaches modulus 1" });
        verdicts.insert("image-inside-polydisk".into(), rec);
        if inside && bounded == Verdict::Holds && compact == Verdict::Inconclusive {
            compact = Verdict::Holds;
            compact_rule = "image-inside-polydisk".into();
        }
    }

    if p < 1.0 && q >= 1.0 && options.wants("exponent-shortcut") {
        verdicts.insert(
            "exponent-shortcut".into(),
            VerdictRecord::new(Verdict::Holds, "p < 1 <= q: every self-map induces a compact operator"),
        );
        if compact == Verdict::Inconclusive {
            compact = Verdict::Holds;
            compact_rule = "exponent-shortcut".into();
        }
    }

    if p >= 1.0 {
        if options.wants("compactness-global") {
            let paths = options.paths_for(phi, ApproachMode::ImageToBoundary);
            let out = compactness_profile(phi, p, q, &paths)?;
            let mut rec = VerdictRecord::from_profile(
                &out,
                "for p >= 1, compact iff bounded and the density tends to 0 as φ(z) approaches the boundary",
            );
            let ids = renumber(&mut tables, out.tables.clone());
            if let Some(w) = rec.witness_path {
                rec.witness_path = Some(ids[w]);
            }
            if out.verdict == Verdict::Holds {
                rec.note = format!("{} evidence along probed paths only", if out.vacuous { "vacuous" } else { "limit" });
            }
            verdicts.insert("compactness-global".into(), rec);
            if compact == Verdict::Inconclusive {
                match out.verdict {
                    Verdict::Fails => {
                        compact = Verdict::Fails;
                        compact_rule = "compactness-global".into();
                    }
                    Verdict::Holds if bounded == Verdict::Holds => {
                        compact = Verdict::Holds;
                        compact_rule = "compactness-global".into();
                    }
                    _ => {}
                }
            }
        }
        if q <= 1.0 && options.wants("jacobian-metric-lower-bound") {
            let (inf, at) = sampling::grid_minimum(n, plan, |z| Ok(schwarz_ratio(phi, z)?.inf))?;
            let at = PolydiskPoint::new(at)?;
            let v = if inf >= JACOBIAN_FLOOR { Verdict::Fails } else { Verdict::Inconclusive };
            let rec = VerdictRecord::new(
                v,
                "p >= 1, q <= 1: H_z(u) <= C H_φ(z)(J u) for all z, u rules out compactness",
            )
            .margin(inf)
            .witness(at)
            .note("margin is the grid minimum of the smallest squared weighted singular value");
            verdicts.insert("jacobian-metric-lower-bound".into(), rec);
            if v == Verdict::Fails && compact != Verdict::Fails {
                compact = Verdict::Fails;
                compact_rule = "jacobian-metric-lower-bound".into();
            }
        }
    } else if options.wants("compactness-per-coordinate") {
        let mut outcomes = Vec::new();
        for l in 0..n {
            let paths = options.paths_for(phi, ApproachMode::CoordinateToOne { l });
            outcomes.push(compactness_profile(phi, p, q, &paths)?);
        }
        let verdict = if outcomes.iter().any(|o| o.verdict == Verdict::Fails) {
            Verdict::Fails
        } else if outcomes.iter().all(|o| o.verdict == Verdict::Holds) {
            Verdict::Holds
        } else {
            Verdict::Inconclusive
        };
        let worst = outcomes.iter().map(|o| o.worst_tail).fold(0.0, f64::max);
        let mut rec = VerdictRecord::new(
            verdict,
            "for p < 1, compact iff bounded and each row density tends to 0 as |φ_l(z)| approaches 1",
        )
        .margin(worst);
        for o in outcomes {
            let ids = renumber(&mut tables, o.tables.clone());
            if rec.witness_path.is_none() && (o.verdict == verdict) && verdict != Verdict::Holds {
                if let Some(w) = o.witness_path {
                    rec.witness_path = Some(ids[w]);
                    rec.witness = o.tables[w].points.last().cloned();
                }
            }
        }
        if verdict == Verdict::Fails && compact_rule == "exponent-shortcut" {
            rec.note = "disagrees with the exponent shortcut; inspect the witness path".into();
        }
        verdicts.insert("compactness-per-coordinate".into(), rec);
        if compact == Verdict::Inconclusive {
            match verdict {
                Verdict::Fails => {
                    compact = Verdict::Fails;
                    compact_rule = "compactness-per-coordinate".into();
                }
                Verdict::Holds if bounded == Verdict::Holds => {
                    compact = Verdict::Holds;
                    compact_rule = "compactness-per-coordinate".into();
                }
                _ => {}
            }
        }
    }

    let schwarz = if options.wants("schwarz-plateau") {
        let search = sampling::maximize(n, plan, |z| Ok(schwarz_ratio(phi, z)?.sup))?;
        let (inf, inf_at) = sampling::grid_minimum(n, plan, |z| Ok(schwarz_ratio(phi, z)?.inf))?;
        let summary = SchwarzSummary {
            sup: search.value,
            sup_witness: PolydiskPoint::new(search.witness)?,
            inf,
            inf_witness: PolydiskPoint::new(inf_at)?,
            level_profile: search.level_profile,
        };
        let rec = VerdictRecord::new(
            profile_verdict(&summary.level_profile),
            "the metric expansion H_φ(z)(J u)/H_z(u) has a finite supremum",
        )
        .margin(summary.sup)
        .witness(summary.sup_witness.clone());
        verdicts.insert("schwarz-plateau".into(), rec);
        Some(summary)
    } else {
        None
    };

    Ok(CriterionReport {
        schema_version: REPORT_SCHEMA_VERSION,
        parameters: Parameters { n, p, q },
        seed: plan.seed,
        certificate: phi.certificate().clone(),
        sup_estimate,
        image_sup,
        schwarz,
        boundary_limsup: tables,
        verdicts,
        bounded,
        compact,
        compact_rule,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holo::{moebius_automorphism, Series};
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn plan() -> SamplingPlan {
        SamplingPlan { levels: 12, angular_count: 32, max_rounds: 4, ..SamplingPlan::default() }
    }

    #[test]
    fn identity_is_bounded_not_compact() {
        let r = classify(&HoloSelfMap::identity(2), 1.0, 1.0, &plan(), &ClassifyOptions::default()).unwrap();
        assert_eq!(r.bounded, Verdict::Holds);
        assert!((r.sup_estimate.value - 2.0).abs() < 1e-12);
        assert_eq!(r.compact, Verdict::Fails);
        assert_eq!(r.verdicts["compactness-global"].verdict, Verdict::Fails);
        assert_eq!(r.verdicts["jacobian-metric-lower-bound"].verdict, Verdict::Fails);
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("sample_index,path_id,z,density,verdict"));
    }

    #[test]
    fn contraction_is_compact() {
        let half = HoloSelfMap::from_series(vec![Series::coordinate(1, 0).scale(c(0.5, 0.0))]).unwrap();
        let r = classify(&half, 1.0, 1.0, &plan(), &ClassifyOptions::default()).unwrap();
        assert_eq!(r.bounded, Verdict::Holds);
        assert_eq!(r.compact, Verdict::Holds);
        assert_eq!(r.compact_rule, "image-inside-polydisk");
    }

    #[test]
    fn constant_map() {
        let k = HoloSelfMap::constant(&[c(0.2, 0.3), c(-0.5, 0.0)]).unwrap();
        let r = classify(&k, 1.0, 1.0, &plan(), &ClassifyOptions::default()).unwrap();
        assert_eq!(r.bounded, Verdict::Holds);
        assert_eq!(r.sup_estimate.value, 0.0);
        assert_eq!(r.compact, Verdict::Holds);
    }

    #[test]
    fn automorphism_not_compact() {
        let phi = moebius_automorphism(&[c(0.4, -0.2), c(0.1, 0.6)], &[1.0, -0.5], &[0, 1]).unwrap();
        let r = classify(&phi, 1.0, 1.0, &plan(), &ClassifyOptions::default()).unwrap();
        assert_eq!(r.bounded, Verdict::Holds);
        assert_eq!(r.compact, Verdict::Fails);
        let s = r.schwarz.unwrap();
        assert!((s.sup - 1.0).abs() < 1e-9 && (s.inf - 1.0).abs() < 1e-9);
    }

    #[test]
    fn small_p_identity_compact_via_shortcut_and_rows() {
        let r = classify(&HoloSelfMap::identity(1), 0.5, 1.0, &plan(), &ClassifyOptions::default()).unwrap();
        assert_eq!(r.compact, Verdict::Holds);
        assert_eq!(r.compact_rule, "exponent-shortcut");
        assert_eq!(r.verdicts["compactness-per-coordinate"].verdict, Verdict::Holds);
    }

    #[test]
    fn theorem_selection() {
        let opts = ClassifyOptions { theorems: vec!["boundedness".into()], paths: None };
        let r = classify(&HoloSelfMap::identity(1), 1.0, 1.0, &plan(), &opts).unwrap();
        assert_eq!(r.verdicts.len(), 1);
        assert_eq!(r.compact, Verdict::Inconclusive);
    }
}
