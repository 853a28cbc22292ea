//! Finite-difference and uniform-grid cross-checks for a Möbius map and a
//! G test function.
use num_complex::Complex64;

use bloch_lab::holo::moebius_automorphism;
use bloch_lab::norms::bloch_norm_estimate;
use bloch_lab::oracle::{gradient_discrepancy, uniform_grid, uniform_grid_bloch_norm};
use bloch_lab::sampling::SamplingPlan;
use bloch_lab::testfn::{Family, TestFunction};

fn main() -> bloch_lab::Result<()> {
    let phi = moebius_automorphism(&[Complex64::new(0.4, -0.3), Complex64::new(0.0, 0.6)], &[1.0, -0.5], &[0, 1])?;
    let points: Vec<_> = uniform_grid(2).into_iter().step_by(7).collect();
    for (l, c) in phi.components().iter().enumerate() {
        let (worst, at) = gradient_discrepancy(c, &points)?;
        println!("component {}: FD discrepancy {worst:.2e} at {at:?}", l + 1);
    }
    let g = TestFunction::new(Family::G, 2, 1, Complex64::new(0.5, 0.0), 1.0)?.to_holo();
    let primary = bloch_norm_estimate(&g, 1.0, &SamplingPlan::default())?.value;
    let grid = uniform_grid_bloch_norm(&g, 1.0)?;
    println!("G norm: primary {primary:.6}, uniform grid {grid:.6}");
    Ok(())
}
