//! Density along the radial path towards 1 for `(z+1)/2`, next to the
//! closed form `2(1+r)/(3+r)`.
use num_complex::Complex64;

use bloch_lab::criteria::{compactness_profile, default_paths, ApproachMode};
use bloch_lab::holo::{HoloSelfMap, Series};

fn main() -> bloch_lab::Result<()> {
    let half = Complex64::new(0.5, 0.0);
    let phi = HoloSelfMap::from_series(vec![Series::coordinate(1, 0).scale(half).add(&Series::constant(1, half))])?;
    let paths = default_paths(&phi, ApproachMode::ImageToBoundary);
    let out = compactness_profile(&phi, 1.0, 1.0, &paths)?;
    for t in &out.tables {
        println!("{} ({})", t.label, t.verdict);
        for (z, d) in t.points.iter().zip(&t.densities).step_by(4) {
            let r = z.coords()[0].re;
            println!("  r = {:<20} density {d:.12}  closed form {:.12}", r, 2.0 * (1.0 + r) / (3.0 + r));
        }
    }
    println!("verdict {} with tail {:.9}", out.verdict, out.worst_tail);
    Ok(())
}
