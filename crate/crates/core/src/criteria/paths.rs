//! Boundary approach paths and compactness profiles along them.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{BlochError, Result};
use crate::holo::HoloSelfMap;
use crate::polydisk::{boundary_distance, PolydiskPoint};
use crate::sampling::level_to_radius;

use super::{check_exponents, density_rows, Verdict};

/// Number of dyadic distance targets `2^{-1}, ..., 2^{-PATH_DEPTH}` per ray.
/// Deeper targets lose accuracy: `1 - |φ|^2` carries an absolute rounding
/// error near `1e-16`.
pub const PATH_DEPTH: usize = 32;
/// Number of final path values inspected by the verdict.
pub const TAIL_LEN: usize = 4;
/// A tail below this (and non-increasing) satisfies the limit criterion.
pub const COMPACTNESS_TOL: f64 = 1e-3;
/// A tail that never drops below this violates the limit criterion unless
/// it is still decaying.
pub const TAIL_FLOOR: f64 = 1e-2;
/// A strictly decreasing tail whose last value is at most this fraction of
/// its first is still decaying: neither verdict is justified yet.
pub const DECAY_RATIO: f64 = 0.9;

const MIN_POINTS: usize = 8;
const FINAL_DISTANCE: f64 = 1e-4;
const RAY_ANGLES: usize = 16;
const MAX_RAY_LEVEL: f64 = 45.0;
const BISECTION_STEPS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ApproachMode {
    /// `boundary_distance(φ(z))` decreases to 0.
    ImageToBoundary,
    /// `|φ_l(z)|` increases to 1 (0-based `l`).
    CoordinateToOne { l: usize },
}

impl ApproachMode {
    fn distance(&self, values: &[Complex64]) -> f64 {
        match self {
            ApproachMode::ImageToBoundary => boundary_distance(values),
            ApproachMode::CoordinateToOne { l } => 1.0 - values[*l].norm(),
        }
    }

    fn label(&self) -> String {
        match self {
            ApproachMode::ImageToBoundary => "image".into(),
            ApproachMode::CoordinateToOne { l } => format!("coordinate {}", l + 1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPath {
    pub label: String,
    pub mode: ApproachMode,
    pub points: Vec<PolydiskPoint>,
}

impl BoundaryPath {
    pub fn new(label: impl Into<String>, mode: ApproachMode, points: Vec<PolydiskPoint>) -> Self {
        Self { label: label.into(), mode, points }
    }

    /// Checks the declared approach against `phi` and returns the distances
    /// to the boundary along the path.
    pub fn validate(&self, phi: &HoloSelfMap) -> Result<Vec<f64>> {
        if self.points.len() < MIN_POINTS {
            return Err(BlochError::InvalidParameter(format!(
                "path {:?} has {} points, at least {MIN_POINTS} required",
                self.label,
                self.points.len()
            )));
        }
        if let ApproachMode::CoordinateToOne { l } = self.mode {
            if l >= phi.dim() {
                return Err(BlochError::IndexOutOfRange { index: l, dim: phi.dim() });
            }
        }
        let distances = self
            .points
            .iter()
            .map(|z| Ok(self.mode.distance(&phi.eval(z)?)))
            .collect::<Result<Vec<_>>>()?;
        if distances.windows(2).any(|w| w[1] > w[0]) {
            return Err(BlochError::InvalidParameter(format!(
                "path {:?} does not approach the boundary monotonically",
                self.label
            )));
        }
        let last = *distances.last().expect("non-empty");
        if last > FINAL_DISTANCE {
            return Err(BlochError::InvalidParameter(format!(
                "path {:?} ends at distance {last:e} from the boundary, above {FINAL_DISTANCE:e}",
                self.label
            )));
        }
        Ok(distances)
    }

    /// Points `t u` on the ray through `u` (with `|u_k| <= 1`) where the
    /// approach distance first reaches `2^{-j}`, `j = 1..=PATH_DEPTH`.
    /// Returns `None` when the ray does not realize the approach.
    pub fn ray(phi: &HoloSelfMap, direction: &[Complex64], mode: ApproachMode, label: String) -> Option<Self> {
        let point = |s: f64| -> Option<Vec<Complex64>> {
            let t = level_to_radius(s);
            Some(direction.iter().map(|u| u * t).collect())
        };
        let dist = |s: f64| -> Option<f64> { phi.eval(&point(s)?).ok().map(|v| mode.distance(&v)) };
        let d_end = dist(MAX_RAY_LEVEL)?;
        if d_end > FINAL_DISTANCE {
            return None;
        }
        let mut points = Vec::new();
        let mut lo = 0.0;
        for j in 1..=PATH_DEPTH {
            let target = 0.5f64.powi(j as i32);
            if d_end > target {
                break;
            }
            if dist(lo)? <= target {
                continue;
            }
            let mut hi = MAX_RAY_LEVEL;
            for _ in 0..BISECTION_STEPS {
                let mid = 0.5 * (lo + hi);
                if dist(mid)? <= target {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            points.push(PolydiskPoint::new(point(hi)?).ok()?);
            lo = hi;
        }
        let path = Self::new(label, mode, points);
        path.validate(phi).ok()?;
        Some(path)
    }
}

/// Radial rays through `e^{iθ} e_k` for 16 angles per coordinate, plus 16
/// diagonal rays when `n >= 2`; only rays that realize `mode` are kept.
pub fn default_paths(phi: &HoloSelfMap, mode: ApproachMode) -> Vec<BoundaryPath> {
    let n = phi.dim();
    let mut directions = Vec::new();
    for k in 0..n {
        for a in 0..RAY_ANGLES {
            let mut u = vec![Complex64::new(0.0, 0.0); n];
            u[k] = Complex64::from_polar(1.0, TAU * a as f64 / RAY_ANGLES as f64);
            directions.push((format!("{} ray, axis {}, angle {a}/{RAY_ANGLES}", mode.label(), k + 1), u));
        }
    }
    if n >= 2 {
        for a in 0..RAY_ANGLES {
            let u = vec![Complex64::from_polar(1.0, TAU * a as f64 / RAY_ANGLES as f64); n];
            directions.push((format!("{} ray, diagonal, angle {a}/{RAY_ANGLES}", mode.label()), u));
        }
    }
    directions.into_par_iter().filter_map(|(label, u)| BoundaryPath::ray(phi, &u, mode, label)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathTable {
    pub path_id: usize,
    pub label: String,
    pub mode: ApproachMode,
    pub points: Vec<PolydiskPoint>,
    pub distances: Vec<f64>,
    pub densities: Vec<f64>,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileOutcome {
    pub verdict: Verdict,
    /// No path realizes the approach.
    pub vacuous: bool,
    /// Path with the largest final tail, the witness for a failing verdict.
    pub witness_path: Option<usize>,
    /// Largest final density over all paths.
    pub worst_tail: f64,
    pub tables: Vec<PathTable>,
}

fn tail_verdict(densities: &[f64]) -> Verdict {
    let tail = &densities[densities.len().saturating_sub(TAIL_LEN)..];
    let last = *tail.last().expect("validated paths are non-empty");
    let non_increasing = tail.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
    let decaying = tail.windows(2).all(|w| w[1] < w[0]) && last <= DECAY_RATIO * tail[0];
    if last < COMPACTNESS_TOL && non_increasing {
        Verdict::Holds
    } else if !decaying && tail.iter().all(|v| *v >= TAIL_FLOOR) {
        Verdict::Fails
    } else {
        Verdict::Inconclusive
    }
}

/// Tabulates the density matching each path's mode (the full criterion
/// density for image paths, row `l` for coordinate paths) and reads off
/// whether it tends to 0.
pub fn compactness_profile(phi: &HoloSelfMap, p: f64, q: f64, paths: &[BoundaryPath]) -> Result<ProfileOutcome> {
    check_exponents(p, q)?;
    let tables = paths
        .par_iter()
        .enumerate()
        .map(|(path_id, path)| {
            let distances = path.validate(phi)?;
            let densities = path
                .points
                .iter()
                .map(|z| {
                    let rows = density_rows(&phi.jet(z)?, z, p, q)?;
                    Ok(match path.mode {
                        ApproachMode::ImageToBoundary => rows.iter().sum(),
                        ApproachMode::CoordinateToOne { l } => rows[l],
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            let verdict = tail_verdict(&densities);
            Ok(PathTable {
                path_id,
                label: path.label.clone(),
                mode: path.mode,
                points: path.points.clone(),
                distances,
                densities,
                verdict,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if tables.is_empty() {
        return Ok(ProfileOutcome { verdict: Verdict::Holds, vacuous: true, witness_path: None, worst_tail: 0.0, tables });
    }
    let (witness, worst_tail) = tables
        .iter()
        .map(|t| (t.path_id, *t.densities.last().expect("non-empty")))
        .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    let verdict = if tables.iter().any(|t| t.verdict == Verdict::Fails) {
        Verdict::Fails
    } else if tables.iter().all(|t| t.verdict == Verdict::Holds) {
        Verdict::Holds
    } else {
        Verdict::Inconclusive
    };
    let witness_path = match verdict {
        Verdict::Fails => tables
            .iter()
            .filter(|t| t.verdict == Verdict::Fails)
            .max_by(|a, b| a.densities.last().unwrap().total_cmp(b.densities.last().unwrap()))
            .map(|t| t.path_id),
        _ => Some(witness),
    };
    Ok(ProfileOutcome { verdict, vacuous: false, witness_path, worst_tail, tables })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holo::Series;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn shifted_half() -> HoloSelfMap {
        // (z + 1) / 2
        let s = Series::coordinate(1, 0).add(&Series::constant(1, c(1.0, 0.0))).scale(c(0.5, 0.0));
        HoloSelfMap::from_series(vec![s]).unwrap()
    }

    #[test]
    fn identity_radial_path_fails() {
        let id = HoloSelfMap::identity(1);
        let paths = default_paths(&id, ApproachMode::ImageToBoundary);
        assert_eq!(paths.len(), 16);
        let out = compactness_profile(&id, 1.0, 1.0, &paths).unwrap();
        assert_eq!(out.verdict, Verdict::Fails);
        assert!(out.tables.iter().all(|t| t.densities.iter().all(|d| *d == 1.0)));
        assert_eq!(out.tables[0].points.len(), PATH_DEPTH);
    }

    #[test]
    fn contracted_map_is_vacuous() {
        let half = HoloSelfMap::from_series(vec![Series::coordinate(1, 0).scale(c(0.5, 0.0))]).unwrap();
        let paths = default_paths(&half, ApproachMode::ImageToBoundary);
        assert!(paths.is_empty());
        let out = compactness_profile(&half, 1.0, 1.0, &paths).unwrap();
        assert!(out.vacuous);
        assert_eq!(out.verdict, Verdict::Holds);
    }

    #[test]
    fn shifted_map_limit_matches_closed_form() {
        let phi = shifted_half();
        let paths = default_paths(&phi, ApproachMode::ImageToBoundary);
        // Only the ray through 1 reaches the boundary.
        assert_eq!(paths.len(), 1);
        let out = compactness_profile(&phi, 1.0, 1.0, &paths).unwrap();
        assert_eq!(out.verdict, Verdict::Fails);
        let t = &out.tables[0];
        for ((z, d), dist) in t.points.iter().zip(&t.densities).zip(&t.distances) {
            let r = z.coords()[0].re;
            assert!((d - 2.0 * (1.0 + r) / (3.0 + r)).abs() < 1e-14 / dist);
        }
        assert!((t.densities.last().unwrap() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn per_coordinate_decay_for_small_p() {
        let id = HoloSelfMap::identity(1);
        let paths = default_paths(&id, ApproachMode::CoordinateToOne { l: 0 });
        let out = compactness_profile(&id, 0.5, 1.0, &paths).unwrap();
        assert_eq!(out.verdict, Verdict::Holds);
        assert!(out.worst_tail < 1e-3);
    }

    #[test]
    fn slow_decay_is_inconclusive() {
        // Identity from B^0.3 to B^0.5: rows (1-|z|^2)^0.2 decay too slowly to
        // drop below the tolerance within the path depth.
        let phi = HoloSelfMap::identity(1);
        let paths = default_paths(&phi, ApproachMode::CoordinateToOne { l: 0 });
        let out = compactness_profile(&phi, 0.3, 0.5, &paths).unwrap();
        assert!(out.worst_tail > TAIL_FLOOR);
        assert_eq!(out.verdict, Verdict::Inconclusive);
        assert_eq!(tail_verdict(&[1.0, 1.0, 1.0, 1.0]), Verdict::Fails);
        assert_eq!(tail_verdict(&[0.5, 0.6, 0.7, 0.8]), Verdict::Fails);
    }

    #[test]
    fn invalid_paths_are_rejected() {
        let id = HoloSelfMap::identity(1);
        let short = BoundaryPath::new(
            "short",
            ApproachMode::ImageToBoundary,
            (1..4).map(|j| PolydiskPoint::from_reals(&[1.0 - 0.5f64.powi(j)]).unwrap()).collect(),
        );
        assert!(compactness_profile(&id, 1.0, 1.0, &[short]).is_err());
        let backwards = BoundaryPath::new(
            "backwards",
            ApproachMode::ImageToBoundary,
            (1..=20).rev().map(|j| PolydiskPoint::from_reals(&[1.0 - 0.5f64.powi(j)]).unwrap()).collect(),
        );
        assert!(backwards.validate(&id).is_err());
    }
}
