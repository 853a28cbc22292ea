//! `p`-Bloch and `p`-Lipschitz norm estimates.
//!
//! All estimates are lower bounds of the true suprema, reported together with
//! a convergence flag.

use std::f64::consts::{LN_2, TAU};

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{BlochError, Result};
use crate::holo::{ClosedForm, HoloFunction, Series};
use crate::polydisk::{disk_weight, PolydiskPoint};
use crate::sampling::{self, random_points, within_relative, SamplingPlan, SupSearch};

/// Exponent of a Bloch-type space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochParams {
    pub p: f64,
}

impl BlochParams {
    pub fn new(p: f64) -> Result<Self> {
        check_exponent(p)?;
        Ok(Self { p })
    }
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p > 0.0 && p.is_finite() {
        Ok(())
    } else {
        Err(BlochError::InvalidParameter(format!("exponent {p} must be positive and finite")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    /// `offset + sup`.
    pub value: f64,
    /// `|f(0)|`.
    pub offset: f64,
    pub sup: f64,
    pub witness: PolydiskPoint,
    /// Second point of the witnessing pair for difference quotients.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partner: Option<PolydiskPoint>,
    pub trace: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub level_profile: Vec<f64>,
    pub converged: bool,
    pub evaluations: usize,
    #[serde(default)]
    pub singular_count: usize,
}

impl NormEstimate {
    fn exact(n: usize, offset: f64) -> Self {
        Self {
            value: offset,
            offset,
            sup: 0.0,
            witness: PolydiskPoint::origin(n),
            partner: None,
            trace: vec![0.0],
            level_profile: Vec::new(),
            converged: true,
            evaluations: 0,
            singular_count: 0,
        }
    }

    fn from_search(offset: f64, s: SupSearch) -> Result<Self> {
        Ok(Self {
            value: offset + s.value,
            offset,
            sup: s.value,
            witness: PolydiskPoint::new(s.witness)?,
            partner: None,
            trace: s.trace,
            level_profile: s.level_profile,
            converged: s.converged,
            evaluations: s.evaluations,
            singular_count: s.singular_count,
        })
    }
}

/// `Σ_k |g_k| (1 - |z_k|^2)^p` for a gradient `g` at `z`.
pub fn weighted_l1(gradient: &[Complex64], z: &[Complex64], p: f64) -> f64 {
    gradient.iter().zip(z).map(|(g, zk)| g.norm() * disk_weight(*zk).powf(p)).sum()
}

/// `Σ_k |∂f/∂z_k(z)| (1 - |z_k|^2)^p`.
pub fn bloch_density(f: &HoloFunction, p: f64, z: &[Complex64]) -> Result<f64> {
    Ok(weighted_l1(&f.gradient_at(z)?, z, p))
}

/// `Q_f(z) = sqrt(Σ_k |∂f/∂z_k(z)|^2 (1 - |z_k|^2)^2)`, the closed form of
/// `sup_u |<∇f(z), u>| / sqrt(H(z, u))`.
pub fn timoney_q(f: &HoloFunction, z: &[Complex64]) -> Result<f64> {
    let gradient = f.gradient_at(z)?;
    Ok(gradient.iter().zip(z).map(|(g, zk)| (g.norm() * disk_weight(*zk)).powi(2)).sum::<f64>().sqrt())
}

/// `|f(0)| + sup_z bloch_density(f, p, z)` estimated over `plan`.
pub fn bloch_norm_estimate(f: &HoloFunction, p: f64, plan: &SamplingPlan) -> Result<NormEstimate> {
    check_exponent(p)?;
    let n = f.dim();
    let offset = f.eval(&vec![Complex64::new(0.0, 0.0); n])?.norm();
    if let Some(s) = f.as_series() {
        if s.max_degree() == 0 {
            return Ok(NormEstimate::exact(n, offset));
        }
    }
    let search = sampling::maximize(n, plan, |z| bloch_density(f, p, z))?;
    NormEstimate::from_search(offset, search)
}

/// Factor `B(p, n, z)` with `|f(z)| <= B ‖f‖_{B^p}`:
///
/// * `p < 1`: `(n - p + 1)/(1 - p)`
/// * `p = 1`: `(n ln 2 + 1)/(n ln 2) Σ_k ln(2/(1 - |z_k|^2))`
/// * `p > 1`: `(2^{p-1} n + p - 1)/(n(p - 1)) Σ_k (1 - |z_k|^2)^{1-p}`
pub fn pointeval_bound(p: f64, z: &[Complex64]) -> Result<f64> {
    check_exponent(p)?;
    let n = z.len() as f64;
    if z.is_empty() {
        return Err(BlochError::InvalidParameter("empty point".into()));
    }
    if p < 1.0 {
        Ok((n - p + 1.0) / (1.0 - p))
    } else if p == 1.0 {
        let s: f64 = z.iter().map(|zk| (2.0 / disk_weight(*zk)).ln()).sum();
        Ok((n * LN_2 + 1.0) / (n * LN_2) * s)
    } else {
        let s: f64 = z.iter().map(|zk| disk_weight(*zk).powf(1.0 - p)).sum();
        Ok((2f64.powf(p - 1.0) * n + p - 1.0) / (n * (p - 1.0)) * s)
    }
}

/// The degree-`m` polynomial compared against `f` by [`little_bloch_gap`]:
/// the family truncation for a bare test function, else the Taylor
/// truncation of total degree `m`.
pub fn approximating_polynomial(f: &HoloFunction, m: usize) -> Result<Series> {
    match f {
        HoloFunction::Closed(ClosedForm::Test(t)) => Ok(t.truncate(m)),
        _ => f.taylor_truncate(m),
    }
}

/// `B^p` norm of `f - P_m` with `P_m` from [`approximating_polynomial`].
pub fn little_bloch_gap(f: &HoloFunction, p: f64, m: usize, plan: &SamplingPlan) -> Result<NormEstimate> {
    check_exponent(p)?;
    let poly = approximating_polynomial(f, m)?;
    let diff = match f {
        HoloFunction::Series(s) => HoloFunction::Series(s.add(&poly.scale(Complex64::new(-1.0, 0.0)))),
        _ => f.clone().sub(HoloFunction::Series(poly)),
    };
    if diff.is_zero_series() {
        return Ok(NormEstimate::exact(f.dim(), 0.0));
    }
    bloch_norm_estimate(&diff, p, plan)
}

#[derive(Clone, Debug)]
struct Pair {
    value: f64,
    z: Vec<Complex64>,
    w: Vec<Complex64>,
}

fn quotient(f: &HoloFunction, p: f64, z: &[Complex64], w: &[Complex64]) -> Option<f64> {
    let dist = z.iter().zip(w).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    if dist < 1e-13 {
        return None;
    }
    let fz = f.eval(z).ok()?;
    let fw = f.eval(w).ok()?;
    let q = (fz - fw).norm() / dist.powf(p);
    q.is_finite().then_some(q)
}

fn clamp_into_disk(c: Complex64) -> Complex64 {
    let r = c.norm();
    let max = 1.0 - 1e-12;
    if r > max {
        c * (max / r)
    } else {
        c
    }
}

/// `|f(0)| + sup_{z≠w} |f(z) - f(w)| / |z - w|^p` for `0 < p <= 1`.
///
/// Pairs come from a random point pool (all pairs), short coordinate-direction
/// pairs around the best points, and local refinement of the best pairs.
pub fn lipschitz_norm_estimate(f: &HoloFunction, p: f64, plan: &SamplingPlan) -> Result<NormEstimate> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(BlochError::InvalidParameter(format!("Lipschitz exponent {p} must lie in (0, 1]")));
    }
    let n = f.dim();
    let offset = f.eval(&vec![Complex64::new(0.0, 0.0); n])?.norm();
    if let Some(s) = f.as_series() {
        if s.max_degree() == 0 {
            return Ok(NormEstimate::exact(n, offset));
        }
    }
    let pool_size = (8 * plan.angular_count).clamp(16, 4096);
    let mut pool: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); n]];
    pool.extend(random_points(n, pool_size, plan.seed, plan.levels as f64).into_iter().map(|z| z.into_coords()));
    let values: Vec<Option<Complex64>> = pool.par_iter().map(|z| f.eval(z).ok()).collect();
    let mut evaluations = pool.len();

    let keep = plan.refine_seeds.max(1);
    let top_pairs = |pairs: Vec<Pair>| {
        let mut pairs = pairs;
        pairs.sort_by(|a, b| b.value.total_cmp(&a.value));
        pairs.truncate(keep);
        pairs
    };

    let grid_pairs: Vec<Pair> = (0..pool.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let pool = &pool;
            let values = &values;
            (i + 1..pool.len()).filter_map(move |j| {
                let (a, b) = (values[i]?, values[j]?);
                let dist = pool[i].iter().zip(&pool[j]).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
                let q = (a - b).norm() / dist.powf(p);
                q.is_finite().then(|| Pair { value: q, z: pool[i].clone(), w: pool[j].clone() })
            })
        })
        .collect();
    let mut seeds = top_pairs(grid_pairs);
    if seeds.is_empty() {
        return Err(BlochError::Singular("no admissible pair in the sample pool".into()));
    }

    // Short pairs around the current best endpoints.
    let mut short = Vec::new();
    for s in &seeds {
        for base in [&s.z, &s.w] {
            for k in 0..n {
                for &delta in &[1e-2, 1e-4] {
                    for a in 0..8 {
                        let mut other = base.clone();
                        other[k] = clamp_into_disk(other[k] + Complex64::from_polar(delta, TAU * a as f64 / 8.0));
                        short.push((base.clone(), other));
                    }
                }
            }
        }
    }
    let short_pairs: Vec<Pair> = short
        .into_par_iter()
        .filter_map(|(z, w)| quotient(f, p, &z, &w).map(|value| Pair { value, z, w }))
        .collect();
    evaluations += 2 * short_pairs.len();
    seeds.extend(short_pairs);
    seeds = top_pairs(seeds);

    let mut best = seeds[0].clone();
    let mut trace = vec![best.value];
    let mut half = 0.25;
    let samples = 16 * n;
    for round in 0..plan.max_rounds {
        if evaluations + 2 * seeds.len() * samples > plan.budget {
            break;
        }
        let proposals: Vec<(Vec<Complex64>, Vec<Complex64>)> = seeds
            .iter()
            .enumerate()
            .flat_map(|(si, s)| {
                let mut rng = sampling::stream_rng(plan.seed ^ 0x11b5_0000_0000, ((round as u64) << 32) | si as u64);
                (0..samples)
                    .map(|_| {
                        let mut jitter = |c: &Complex64, scale: f64| {
                            let d = Complex64::new(2.0 * rng.gen::<f64>() - 1.0, 2.0 * rng.gen::<f64>() - 1.0);
                            clamp_into_disk(c + d * scale)
                        };
                        let z: Vec<_> = s.z.iter().map(|c| jitter(c, half)).collect();
                        // The partner moves relative to `z` so short separations survive.
                        let sep = s.w.iter().zip(&s.z).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                        let w: Vec<_> =
                            s.w.iter().zip(&z).zip(&s.z).map(|((w, zn), zo)| jitter(&(w + zn - zo), half.min(sep))).collect();
                        (z, w)
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        let results: Vec<Pair> = proposals
            .into_par_iter()
            .filter_map(|(z, w)| quotient(f, p, &z, &w).map(|value| Pair { value, z, w }))
            .collect();
        evaluations += 2 * results.len();
        seeds.extend(results);
        seeds = top_pairs(seeds);
        if seeds[0].value > best.value {
            best = seeds[0].clone();
        }
        trace.push(best.value);
        half *= plan.shrink;
    }
    let converged = trace.len() >= 2 && within_relative(trace[trace.len() - 1], trace[trace.len() - 2], 1e-3);
    Ok(NormEstimate {
        value: offset + best.value,
        offset,
        sup: best.value,
        witness: PolydiskPoint::new(best.z)?,
        partner: Some(PolydiskPoint::new(best.w)?),
        trace,
        level_profile: Vec::new(),
        converged,
        evaluations,
        singular_count: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polydisk::MultiIndex;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn small_plan() -> SamplingPlan {
        SamplingPlan { levels: 10, angular_count: 32, max_rounds: 6, ..SamplingPlan::default() }
    }

    #[test]
    fn density_examples() {
        let f = HoloFunction::coordinate(1, 0);
        assert_eq!(bloch_density(&f, 1.0, &[c(0.0, 0.0)]).unwrap(), 1.0);
        assert!((bloch_density(&f, 1.0, &[c(0.5, 0.0)]).unwrap() - 0.75).abs() < 1e-15);
        let k = HoloFunction::constant(2, c(3.0, 1.0));
        assert_eq!(bloch_density(&k, 2.0, &[c(0.1, 0.2), c(0.9, 0.0)]).unwrap(), 0.0);
    }

    #[test]
    fn timoney_examples() {
        let f = HoloFunction::coordinate(2, 0).add(HoloFunction::coordinate(2, 1));
        let origin = [c(0.0, 0.0), c(0.0, 0.0)];
        assert!((timoney_q(&f, &origin).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(timoney_q(&HoloFunction::coordinate(2, 0), &origin).unwrap(), 1.0);
        assert_eq!(timoney_q(&HoloFunction::constant(2, c(1.0, 0.0)), &origin).unwrap(), 0.0);
    }

    #[test]
    fn norm_examples() {
        let plan = small_plan();
        let z1 = bloch_norm_estimate(&HoloFunction::coordinate(2, 0), 1.5, &plan).unwrap();
        assert!((z1.value - 1.0).abs() < 1e-12);
        let g0 = crate::testfn::make_g(1, 0, c(0.0, 0.0), 1.0).unwrap().to_holo();
        let e = bloch_norm_estimate(&g0, 1.0, &plan).unwrap();
        assert!((e.value - 1.0).abs() < 1e-15);
        let sq = HoloFunction::Series(Series::monomial(MultiIndex(vec![2]), c(1.0, 0.0)));
        let e = bloch_norm_estimate(&sq, 1.0, &SamplingPlan::default()).unwrap();
        let exact = 4.0 / (3.0 * 3f64.sqrt());
        assert!(e.value <= exact + 1e-15 && exact - e.value < 1e-5, "{}", e.value);
        assert!((bloch_density(&sq, 1.0, e.witness.coords()).unwrap() - e.sup).abs() < 1e-15);
        let three = HoloFunction::constant(1, c(3.0, 0.0));
        assert_eq!(bloch_norm_estimate(&three, 2.0, &plan).unwrap().value, 3.0);
    }

    #[test]
    fn pointeval_examples() {
        for z in [c(0.0, 0.0), c(0.9, 0.3)] {
            assert_eq!(pointeval_bound(0.5, &[z]).unwrap(), 3.0);
        }
        assert!((pointeval_bound(1.0, &[c(0.0, 0.0)]).unwrap() - (1.0 + LN_2)).abs() < 1e-15);
        assert!((pointeval_bound(2.0, &[c(0.0, 0.0)]).unwrap() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn little_bloch_examples() {
        let plan = small_plan();
        let poly = HoloFunction::Series(Series::monomial(MultiIndex(vec![1, 2]), c(2.0, 0.0)));
        assert_eq!(little_bloch_gap(&poly, 1.0, 3, &plan).unwrap().value, 0.0);
        let f0 = crate::testfn::make_f(2, 1, c(0.0, 0.0), 1.0).unwrap().to_holo();
        assert_eq!(little_bloch_gap(&f0, 1.0, 1, &plan).unwrap().value, 0.0);
        let g = crate::testfn::make_g(1, 0, c(0.5, 0.0), 1.0).unwrap().to_holo();
        let gap = little_bloch_gap(&g, 1.0, 4, &plan).unwrap().value;
        assert!(gap > 0.0 && gap <= crate::testfn::geometric_tail(c(0.5, 0.0), 4) + 1e-6);
    }

    #[test]
    fn lipschitz_examples() {
        let plan = small_plan();
        let k = HoloFunction::constant(1, c(0.0, -2.0));
        assert_eq!(lipschitz_norm_estimate(&k, 0.5, &plan).unwrap().value, 2.0);
        let z1 = HoloFunction::coordinate(2, 0);
        let e = lipschitz_norm_estimate(&z1, 1.0, &plan).unwrap();
        assert!(e.value <= 1.0 + 1e-12 && e.value > 0.999, "{}", e.value);
        let e5 = lipschitz_norm_estimate(&z1.clone().scale(c(5.0, 0.0)), 1.0, &plan).unwrap();
        assert!((e5.value - 5.0).abs() < 5e-3);
        assert!(e.trace.windows(2).all(|w| w[1] >= w[0]));
        assert!(lipschitz_norm_estimate(&z1, 1.5, &plan).is_err());
    }
}
