//! The F, G and H test families: values, norm bounds and truncation tails.
use num_complex::Complex64;

use bloch_lab::norms::bloch_norm_estimate;
use bloch_lab::sampling::SamplingPlan;
use bloch_lab::testfn::{family_norm_bound, tail_bound, Family, TestFunction};

fn main() -> bloch_lab::Result<()> {
    let plan = SamplingPlan::default();
    let w = Complex64::from_polar(0.8, 0.7);
    for p in [0.5, 1.0, 2.0] {
        for family in [Family::F, Family::G, Family::H] {
            let t = TestFunction::new(family, 2, 1, w, p)?;
            let est = bloch_norm_estimate(&t.to_holo(), p, &plan)?;
            println!(
                "{:<28} norm {:>9.5}  bound {:>9.5}",
                t.describe(),
                est.value,
                family_norm_bound(family, p)
            );
        }
    }
    for m in [2, 4, 8, 16] {
        println!("tail bound p=1 |w|=0.5 m={m:>2}: {:.3e}", tail_bound(1.0, Complex64::new(0.5, 0.0), m)?);
    }
    Ok(())
}
