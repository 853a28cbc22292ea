//! Bloch norm of a polynomial with its witness, refinement trace and the
//! point-evaluation factor.
use num_complex::Complex64;

use bloch_lab::holo::{HoloFunction, Series};
use bloch_lab::norms::{bloch_norm_estimate, pointeval_bound, timoney_q};
use bloch_lab::polydisk::MultiIndex;
use bloch_lab::sampling::SamplingPlan;

fn main() -> bloch_lab::Result<()> {
    // f(z) = z1^2 z2 + 3 z2 - 1
    let f = Series::from_terms(
        2,
        [
            (MultiIndex(vec![2, 1]), Complex64::new(1.0, 0.0)),
            (MultiIndex(vec![0, 1]), Complex64::new(3.0, 0.0)),
            (MultiIndex(vec![0, 0]), Complex64::new(-1.0, 0.0)),
        ],
    )?;
    let f = HoloFunction::Series(f);
    let plan = SamplingPlan::default();
    for p in [0.5, 1.0, 2.0] {
        let est = bloch_norm_estimate(&f, p, &plan)?;
        println!("p = {p}: norm {:.6} at {} ({} evaluations)", est.value, est.witness, est.evaluations);
        println!("  trace {:?}", est.trace);
        let z = [Complex64::new(0.6, 0.0), Complex64::new(0.0, -0.6)];
        println!(
            "  |f(z)| = {:.4} <= {:.4}",
            f.eval(&z)?.norm(),
            pointeval_bound(p, &z)? * est.value
        );
    }
    println!("Q_f(0) = {:.4}", timoney_q(&f, &[Complex64::new(0.0, 0.0); 2])?);
    Ok(())
}
