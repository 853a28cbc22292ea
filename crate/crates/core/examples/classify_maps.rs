//! Classification of a few self-maps of `U^2` for one exponent pair.
use bloch_lab::criteria::{classify, ClassifyOptions};
use bloch_lab::experiment::builtin_maps;
use bloch_lab::sampling::SamplingPlan;

fn main() -> bloch_lab::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (p, q) = (args.first().copied().unwrap_or(1.0), args.get(1).copied().unwrap_or(1.0));
    let plan = SamplingPlan::default();
    println!("p = {p}, q = {q}");
    for (name, phi) in builtin_maps(2)? {
        let r = classify(&phi, p, q, &plan, &ClassifyOptions::default())?;
        println!(
            "{name:<14} bounded {:<12} sup {:<10.5} compact {:<12} via {}",
            r.bounded.to_string(),
            r.sup_estimate.sup,
            r.compact.to_string(),
            r.compact_rule
        );
    }
    Ok(())
}
