//! Lipschitz norm of exponent 1-p against the B^p norm for a few random
//! polynomials, under a plan and its doubling.
use bloch_lab::experiment::random_polynomials;
use bloch_lab::norms::{bloch_norm_estimate, lipschitz_norm_estimate};
use bloch_lab::sampling::SamplingPlan;

fn main() -> bloch_lab::Result<()> {
    let p = 0.5;
    let plan = SamplingPlan::default();
    for (label, f) in random_polynomials(2, 5, 4, 11) {
        let mut ratios = Vec::new();
        for plan in [plan.clone(), plan.doubled()] {
            let lip = lipschitz_norm_estimate(&f, 1.0 - p, &plan)?.value;
            let bloch = bloch_norm_estimate(&f, p, &plan)?.value;
            ratios.push(lip / bloch);
        }
        println!("{label}: ratio {:.4} (doubled plan {:.4})", ratios[0], ratios[1]);
    }
    Ok(())
}
