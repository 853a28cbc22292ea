//! Little-Bloch evidence: truncation gaps of a G test function and the
//! operator check on a polynomial self-map.
use num_complex::Complex64;

use bloch_lab::criteria::little_bloch_operator_check;
use bloch_lab::holo::{HoloSelfMap, Series};
use bloch_lab::norms::little_bloch_gap;
use bloch_lab::polydisk::MultiIndex;
use bloch_lab::sampling::SamplingPlan;
use bloch_lab::testfn::{tail_bound, Family, TestFunction};

fn main() -> bloch_lab::Result<()> {
    let plan = SamplingPlan::default();
    let w = Complex64::new(0.5, 0.0);
    let g = TestFunction::new(Family::G, 2, 0, w, 1.0)?.to_holo();
    for m in [2, 4, 8, 16] {
        let gap = little_bloch_gap(&g, 1.0, m, &plan)?.value;
        println!("m = {m:>2}: gap {gap:.3e}, tail {:.3e}", tail_bound(1.0, w, m)?);
    }
    // (z1 z2, z2)
    let phi = HoloSelfMap::from_series(vec![
        Series::monomial(MultiIndex(vec![1, 1]), Complex64::new(1.0, 0.0)),
        Series::coordinate(2, 1),
    ])?;
    let report = little_bloch_operator_check(&phi, 1.0, 1.0, 3, &plan)?;
    for g in &report.gammas {
        println!("gamma {:?}: gap {:.2e} -> {:.2e} ({})", g.gamma.exponents(), g.gap_low, g.gap_high, g.verdict);
    }
    println!("bounded {}, verdict {}", report.bounded, report.verdict);
    Ok(())
}
