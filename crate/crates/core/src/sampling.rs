//! Supremum estimation over the polydisk.
//!
//! The search starts on a radially stratified grid: every coordinate takes a
//! radius from `r_i = 1 - 2^{-i}`, `i = 0..=L`, and the angles of each radius
//! tuple come from a randomly shifted rank-1 lattice with `angular_count`
//! nodes. The best points are then refined in shrinking boxes expressed in
//! (level, angle) coordinates, where the level of a radius `r` is
//! `-log2(1 - r)`. All results are lower bounds of the true supremum.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{BlochError, Result};
use crate::polydisk::PolydiskPoint;

/// Sampling and refinement configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    /// Deepest radial level `L`; radii are `1 - 2^{-i}` for `i = 0..=L`.
    pub levels: usize,
    /// Angle nodes per radius tuple.
    pub angular_count: usize,
    pub max_rounds: usize,
    /// Box shrink factor per refinement round.
    pub shrink: f64,
    /// Maximum number of objective evaluations.
    pub budget: usize,
    pub seed: u64,
    /// Number of best points refined in each round.
    pub refine_seeds: usize,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        Self { levels: 14, angular_count: 64, max_rounds: 8, shrink: 0.5, budget: 2_000_000, seed: 0, refine_seeds: 8 }
    }
}

impl SamplingPlan {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn radial_levels(&self) -> Vec<f64> {
        (0..=self.levels).map(level_to_radius_index).collect()
    }

    pub fn initial_grid_size(&self, n: usize) -> usize {
        (self.levels + 1).saturating_pow(n as u32).saturating_mul(self.angular_count)
    }

    /// Twice the angular resolution, rounds and budget.
    pub fn doubled(&self) -> Self {
        Self {
            angular_count: self.angular_count * 2,
            max_rounds: self.max_rounds * 2,
            budget: self.budget.saturating_mul(2),
            ..self.clone()
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(BlochError::InvalidParameter("dimension must be at least 1".into()));
        }
        if self.angular_count == 0 {
            return Err(BlochError::InvalidParameter("angular_count must be positive".into()));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(BlochError::InvalidParameter(format!("shrink {} must lie in (0,1)", self.shrink)));
        }
        if self.levels > 48 {
            return Err(BlochError::InvalidParameter(format!("levels {} exceed double precision", self.levels)));
        }
        let grid = self.initial_grid_size(n);
        if self.budget < grid {
            return Err(BlochError::InvalidParameter(format!(
                "budget {} is below the initial grid size {grid} for n = {n}",
                self.budget
            )));
        }
        Ok(())
    }
}

fn level_to_radius_index(i: usize) -> f64 {
    1.0 - (-(i as f64)).exp2()
}

/// Radius for a (fractional) level `s >= 0`.
pub fn level_to_radius(s: f64) -> f64 {
    1.0 - (-s).exp2()
}

pub fn radius_to_level(r: f64) -> f64 {
    -(1.0 - r).log2()
}

/// Result of a supremum search.
#[derive(Clone, Debug)]
pub struct SupSearch {
    pub value: f64,
    pub witness: Vec<Complex64>,
    /// Best value after the grid pass and after every refinement round.
    pub trace: Vec<f64>,
    /// `level_profile[i]` is the grid maximum over points whose deepest
    /// coordinate sits at radial level at most `i`.
    pub level_profile: Vec<f64>,
    pub converged: bool,
    pub evaluations: usize,
    pub budget_exhausted: bool,
    pub singular_count: usize,
    pub singular_witness: Option<Vec<Complex64>>,
}

/// Relative plateau test used for convergence flags.
pub fn within_relative(a: f64, b: f64, tol: f64) -> bool {
    let scale = a.abs().max(b.abs());
    scale == 0.0 || (a - b).abs() <= tol * scale
}

#[derive(Clone, Debug)]
struct Candidate {
    value: f64,
    levels: Vec<f64>,
    angles: Vec<f64>,
}

impl Candidate {
    fn point(&self) -> Vec<Complex64> {
        polar_point(&self.levels, &self.angles)
    }
}

fn polar_point(levels: &[f64], angles: &[f64]) -> Vec<Complex64> {
    levels.iter().zip(angles).map(|(&s, &t)| Complex64::from_polar(level_to_radius(s), t)).collect()
}

pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Generating vector of a Korobov lattice `(1, a, a^2, ...) mod A`.
fn lattice_generators(n: usize, count: usize) -> Vec<usize> {
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = ((count as f64 * golden).round() as usize).max(1);
    while count > 1 && gcd(a, count) != 1 {
        a += 1;
    }
    let mut g = Vec::with_capacity(n);
    let mut cur = 1usize;
    for _ in 0..n {
        g.push(cur % count.max(1));
        cur = (cur * a) % count.max(1);
    }
    g
}

struct Grid {
    n: usize,
    levels: usize,
    angular: usize,
    generators: Vec<usize>,
    seed: u64,
}

impl Grid {
    fn new(n: usize, plan: &SamplingPlan) -> Self {
        Self {
            n,
            levels: plan.levels,
            angular: plan.angular_count,
            generators: lattice_generators(n, plan.angular_count),
            seed: plan.seed,
        }
    }

    fn radius_tuples(&self) -> usize {
        (self.levels + 1).pow(self.n as u32)
    }

    fn len(&self) -> usize {
        self.radius_tuples() * self.angular
    }

    fn level_indices(&self, tuple: usize) -> Vec<usize> {
        let mut t = tuple;
        (0..self.n)
            .map(|_| {
                let i = t % (self.levels + 1);
                t /= self.levels + 1;
                i
            })
            .collect()
    }

    /// Levels and angles of grid point `index`.
    fn polar(&self, index: usize) -> (Vec<f64>, Vec<f64>) {
        let tuple = index / self.angular;
        let j = index % self.angular;
        let levels: Vec<f64> = self.level_indices(tuple).into_iter().map(|i| i as f64).collect();
        let mut rng = stream_rng(self.seed, tuple as u64);
        let a = self.angular as f64;
        let angles = self
            .generators
            .iter()
            .map(|&g| {
                let shift: f64 = rng.gen::<f64>() / a;
                TAU * ((j * g) as f64 / a + shift).fract()
            })
            .collect();
        (levels, angles)
    }

    fn depth(&self, index: usize) -> usize {
        self.level_indices(index / self.angular).into_iter().max().unwrap_or(0)
    }
}

enum Outcome {
    Value(f64),
    Singular,
}

fn evaluate<F>(objective: &F, z: &[Complex64]) -> Outcome
where
    F: Fn(&[Complex64]) -> Result<f64>,
{
    match objective(z) {
        Ok(v) if v.is_finite() => Outcome::Value(v),
        _ => Outcome::Singular,
    }
}

fn better(a: &Candidate, b: &Candidate) -> std::cmp::Ordering {
    b.value.total_cmp(&a.value)
}

/// Estimates `sup_{z ∈ U^n} objective(z)` following `plan`.
///
/// Evaluation errors and non-finite values are counted as singular points and
/// otherwise ignored. The result is deterministic for a fixed seed regardless
/// of the thread count.
pub fn maximize<F>(n: usize, plan: &SamplingPlan, objective: F) -> Result<SupSearch>
where
    F: Fn(&[Complex64]) -> Result<f64> + Sync,
{
    plan.validate(n)?;
    let grid = Grid::new(n, plan);
    let outcomes: Vec<Outcome> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let (levels, angles) = grid.polar(i);
            evaluate(&objective, &polar_point(&levels, &angles))
        })
        .collect();

    let mut evaluations = outcomes.len();
    let mut singular_count = 0;
    let mut singular_witness = None;
    let mut per_level = vec![f64::NEG_INFINITY; plan.levels + 1];
    let mut scored: Vec<(usize, f64)> = Vec::with_capacity(outcomes.len());
    for (i, o) in outcomes.iter().enumerate() {
        match o {
            Outcome::Value(v) => {
                let d = grid.depth(i);
                per_level[d] = per_level[d].max(*v);
                scored.push((i, *v));
            }
            Outcome::Singular => {
                singular_count += 1;
                if singular_witness.is_none() {
                    let (l, a) = grid.polar(i);
                    singular_witness = Some(polar_point(&l, &a));
                }
            }
        }
    }
    if scored.is_empty() {
        return Err(BlochError::Singular("objective failed at every grid point".into()));
    }
    let mut level_profile = Vec::with_capacity(per_level.len());
    let mut running = f64::NEG_INFINITY;
    for v in per_level {
        running = running.max(v);
        level_profile.push(running);
    }

    // Stable sort keeps the lowest grid index first among ties.
    scored.sort_by(|a, b| b.1.total_cmp(&a.1));
    let keep = plan.refine_seeds.max(1);
    let mut seeds: Vec<Candidate> = scored
        .iter()
        .take(keep)
        .map(|&(i, value)| {
            let (levels, angles) = grid.polar(i);
            Candidate { value, levels, angles }
        })
        .collect();
    let mut best = seeds[0].clone();
    let mut trace = vec![best.value];
    let mut budget_exhausted = false;

    let samples_per_seed = 16 * n;
    let mut half_level = 1.0;
    let mut half_angle = PI / (plan.angular_count as f64).powf(1.0 / n as f64);
    let max_level = plan.levels as f64;

    for round in 0..plan.max_rounds {
        let planned = seeds.len() * samples_per_seed;
        if evaluations + planned > plan.budget {
            budget_exhausted = true;
            break;
        }
        let proposals: Vec<(Vec<f64>, Vec<f64>)> = seeds
            .iter()
            .enumerate()
            .flat_map(|(si, seed)| {
                let mut rng = stream_rng(plan.seed ^ 0x5eed_0000_0000, ((round as u64) << 32) | si as u64);
                (0..samples_per_seed)
                    .map(|_| {
                        let levels = seed
                            .levels
                            .iter()
                            .map(|&s| (s + half_level * (2.0 * rng.gen::<f64>() - 1.0)).clamp(0.0, max_level))
                            .collect();
                        let angles = seed
                            .angles
                            .iter()
                            .map(|&t| (t + half_angle * (2.0 * rng.gen::<f64>() - 1.0)).rem_euclid(TAU))
                            .collect();
                        (levels, angles)
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        let results: Vec<Outcome> =
            proposals.par_iter().map(|(l, a)| evaluate(&objective, &polar_point(l, a))).collect();
        evaluations += results.len();

        let mut pool = seeds.clone();
        for ((levels, angles), o) in proposals.into_iter().zip(results) {
            match o {
                Outcome::Value(value) => pool.push(Candidate { value, levels, angles }),
                Outcome::Singular => {
                    singular_count += 1;
                    if singular_witness.is_none() {
                        singular_witness = Some(polar_point(&levels, &angles));
                    }
                }
            }
        }
        pool.sort_by(better);
        pool.truncate(keep);
        seeds = pool;
        if seeds[0].value > best.value {
            best = seeds[0].clone();
        }
        trace.push(best.value);
        half_level *= plan.shrink;
        half_angle *= plan.shrink;
    }

    if plan.max_rounds > 0 {
        let room = plan.budget.saturating_sub(evaluations).min(POLISH_MAX_EVALUATIONS);
        let (polished, used, failed) = polish(&objective, &best, max_level, room);
        evaluations += used;
        singular_count += failed;
        if polished.value > best.value {
            best = polished;
        }
        trace.push(best.value);
    }

    let converged = trace.len() >= 2 && within_relative(trace[trace.len() - 1], trace[trace.len() - 2], 1e-3);
    Ok(SupSearch {
        value: best.value,
        witness: best.point(),
        trace,
        level_profile,
        converged,
        evaluations,
        budget_exhausted,
        singular_count,
        singular_witness,
    })
}

/// Evaluation cap of the final compass search.
const POLISH_MAX_EVALUATIONS: usize = 4000;

/// Compass search in (level, angle) coordinates from `start`: try `±step`
/// along every coordinate, keep improvements, halve the steps otherwise.
/// Returns the best candidate, evaluations used and failed evaluations.
fn polish<F>(objective: &F, start: &Candidate, max_level: f64, budget: usize) -> (Candidate, usize, usize)
where
    F: Fn(&[Complex64]) -> Result<f64>,
{
    let n = start.levels.len();
    let mut best = start.clone();
    let mut step_level = 0.25;
    let mut step_angle = PI / 16.0;
    let (mut used, mut failed) = (0, 0);
    while step_level > 1e-10 && used + 4 * n <= budget {
        let mut improved = false;
        for c in 0..2 * n {
            for sign in [1.0, -1.0] {
                let mut trial = best.clone();
                if c < n {
                    trial.levels[c] = (trial.levels[c] + sign * step_level).clamp(0.0, max_level);
                } else {
                    trial.angles[c - n] = (trial.angles[c - n] + sign * step_angle).rem_euclid(TAU);
                }
                used += 1;
                match evaluate(objective, &trial.point()) {
                    Outcome::Value(v) if v > best.value => {
                        trial.value = v;
                        best = trial;
                        improved = true;
                    }
                    Outcome::Value(_) => {}
                    Outcome::Singular => failed += 1,
                }
            }
        }
        if !improved {
            step_level *= 0.5;
            step_angle *= 0.5;
        }
    }
    (best, used, failed)
}

/// Minimum of `objective` over the initial grid of `plan` (no refinement).
pub fn grid_minimum<F>(n: usize, plan: &SamplingPlan, objective: F) -> Result<(f64, Vec<Complex64>)>
where
    F: Fn(&[Complex64]) -> Result<f64> + Sync,
{
    plan.validate(n)?;
    let grid = Grid::new(n, plan);
    let best = (0..grid.len())
        .into_par_iter()
        .filter_map(|i| {
            let (l, a) = grid.polar(i);
            match evaluate(&objective, &polar_point(&l, &a)) {
                Outcome::Value(v) => Some((v, i)),
                Outcome::Singular => None,
            }
        })
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .ok_or_else(|| BlochError::Singular("objective failed at every grid point".into()))?;
    let (l, a) = grid.polar(best.1);
    Ok((best.0, polar_point(&l, &a)))
}

/// Random interior points mixing area-uniform radii with radii clustered
/// near the boundary (`1 - 2^{-s}`, `s` uniform in `[0, max_level]`).
pub fn random_points(n: usize, count: usize, seed: u64, max_level: f64) -> Vec<PolydiskPoint> {
    let mut rng = stream_rng(seed, 0x7a11);
    (0..count)
        .map(|_| {
            let coords = (0..n)
                .map(|_| {
                    let r = if rng.gen_bool(0.5) {
                        rng.gen::<f64>().sqrt() * (1.0 - 1e-12)
                    } else {
                        level_to_radius(rng.gen::<f64>() * max_level)
                    };
                    Complex64::from_polar(r, TAU * rng.gen::<f64>())
                })
                .collect();
            PolydiskPoint::new(coords).expect("sampled radii are below 1")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radial_levels_default() {
        let plan = SamplingPlan::default();
        let radii = plan.radial_levels();
        assert_eq!(radii.len(), 15);
        assert_eq!(radii[0], 0.0);
        assert_eq!(radii[1], 0.5);
        assert!(radii.iter().all(|&r| (0.0..1.0).contains(&r)));
        assert!(plan.validate(3).is_ok());
    }

    #[test]
    fn budget_must_cover_grid() {
        let plan = SamplingPlan { budget: 100, ..SamplingPlan::default() };
        assert!(plan.validate(1).is_err());
    }

    #[test]
    fn finds_interior_maximum_in_one_variable() {
        // 2r(1 - r^2) peaks at r = 1/sqrt(3).
        let plan = SamplingPlan::default();
        let s = maximize(1, &plan, |z| {
            let r2 = z[0].norm_sqr();
            Ok(2.0 * r2.sqrt() * (1.0 - r2))
        })
        .unwrap();
        let exact = 4.0 / (3.0 * 3f64.sqrt());
        assert!(s.value <= exact + 1e-15);
        assert!(exact - s.value < 1e-6, "{} vs {exact}", s.value);
        assert!(s.converged);
        assert!(s.trace.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let plan = SamplingPlan { seed: 42, ..SamplingPlan::default() };
        let f = |z: &[Complex64]| Ok((z[0] * z[1] - Complex64::new(0.3, 0.1)).norm());
        let a = maximize(2, &plan, f).unwrap();
        let b = maximize(2, &plan, f).unwrap();
        assert_eq!(a.value, b.value);
        assert_eq!(a.witness, b.witness);
        assert_eq!(a.trace, b.trace);
    }

    #[test]
    fn singular_points_are_counted() {
        let plan = SamplingPlan { levels: 4, angular_count: 8, max_rounds: 1, ..SamplingPlan::default() };
        let s = maximize(1, &plan, |z| {
            if z[0].norm() > 0.9 {
                Err(BlochError::Singular("test".into()))
            } else {
                Ok(z[0].norm())
            }
        })
        .unwrap();
        assert!(s.singular_count > 0);
        assert!(s.value <= 0.9);
    }

    #[test]
    fn level_profile_tracks_growth() {
        let plan = SamplingPlan { max_rounds: 0, ..SamplingPlan::default() };
        let s = maximize(1, &plan, |z| Ok(1.0 / (1.0 - z[0].norm_sqr()))).unwrap();
        assert_eq!(s.level_profile.len(), 15);
        assert!(s.level_profile.windows(2).all(|w| w[1] > w[0]));
        assert!(!s.converged);
    }
}
