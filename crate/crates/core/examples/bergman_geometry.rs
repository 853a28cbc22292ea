//! Bergman metric, boundary distance and mixed points on `U^2`.
use num_complex::Complex64;

use bloch_lab::polydisk::{bergman_metric, boundary_distance, segment_point, Direction, PolydiskPoint};

fn main() -> bloch_lab::Result<()> {
    let z = PolydiskPoint::from_pairs(&[(0.5, 0.0), (0.0, 0.9)])?;
    let w = PolydiskPoint::from_reals(&[-0.3, 0.1])?;
    let u = Direction::new(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)]);
    println!("z = {z}");
    println!("H(z, u) = {:.6}", bergman_metric(&z, &u)?);
    println!("H(0, u) = {:.6}", bergman_metric(&PolydiskPoint::origin(2), &u)?);
    println!("distance to the boundary = {:.3}", boundary_distance(z.coords()));
    for j in 0..=2 {
        println!("[z,w]_{j} = {}", segment_point(&z, &w, j)?);
    }
    Ok(())
}
