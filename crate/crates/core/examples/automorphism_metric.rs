//! Möbius automorphisms preserve the Bergman metric: the largest and the
//! smallest weighted singular values are both 1.
use num_complex::Complex64;

use bloch_lab::criteria::schwarz_ratio;
use bloch_lab::holo::{moebius_automorphism, HoloSelfMap, Series};
use bloch_lab::sampling::random_points;

fn main() -> bloch_lab::Result<()> {
    let a = [Complex64::from_polar(0.7, 1.0), Complex64::new(-0.2, 0.4)];
    let phi = moebius_automorphism(&a, &[0.3, 2.0], &[1, 0])?;
    let squeeze = HoloSelfMap::from_series(vec![
        Series::coordinate(2, 0).scale(Complex64::new(0.5, 0.0)),
        Series::coordinate(2, 1),
    ])?;
    for (name, map) in [("automorphism", &phi), ("z1/2 x z2", &squeeze)] {
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for z in random_points(2, 2_000, 5, 12.0) {
            let r = schwarz_ratio(map, z.coords())?;
            lo = lo.min(r.inf);
            hi = hi.max(r.sup);
        }
        println!("{name:<13} squared singular values in [{lo:.9}, {hi:.9}]");
    }
    Ok(())
}
