//! Explicit measurements for random non-symmetric three-qubit states.

use gmnl::experiments::theorem2_batch;
use gmnl::quantum::appendix::{alpha_closed_form, closed_form_probabilities};
use gmnl::quantum::canonical::canonical_sample;
use gmnl::quantum::{solve_alpha, verify_theorem2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> gmnl::error::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..3 {
        let st = canonical_sample(&mut rng, true);
        let alpha = solve_alpha(&st)?;
        let out = verify_theorem2(&st)?;
        let (p000, p100, p110) = closed_form_probabilities(&st, alpha);
        println!("coefficients {:.4?}, phi = {:.3}", st.coefficients(), st.phi);
        println!("  alpha = {alpha:.6} (quadratic root {:.6})", alpha_closed_form(&st).unwrap_or(f64::NAN));
        println!("  p(000|000) = {p000:.5}, p(100|100) = {p100:.5}, p(000|110) = {p110:.1e}");
        println!("  margin {:.5}", out.margin);
    }

    let report = theorem2_batch(1000, 7)?;
    let min = report.entries.iter().map(|e| e.margin).fold(f64::INFINITY, f64::min);
    println!("{}/{} violated, smallest margin {min:.3e}", report.violations, report.count);
    Ok(())
}
