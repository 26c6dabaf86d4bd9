//! Depth certification with the star inequalities on noisy GHZ states.

use gmnl::compose::symmetric_depth_report;
use gmnl::experiments::depth_demo;
use gmnl::quantum::OptimizationConfig;

fn main() -> gmnl::error::Result<()> {
    let cfg = OptimizationConfig::default().with_restarts(10);
    for (n, q) in [(3, 0.0), (4, 0.0), (4, 0.05)] {
        let report = depth_demo(n, n - 1, q, &cfg)?;
        println!("n={n}, q={q}: certified depth {}", report.certified_depth);
        for e in &report.entries {
            println!(
                "  k={} gamma={} margin {:+.4} exceeded={} oracle {:?}",
                e.k, e.gamma, e.margin, e.exceeded, e.oracle_max
            );
        }
    }
    for (n, k) in [(4, 2), (5, 3), (6, 4)] {
        let r = symmetric_depth_report(n, k)?;
        println!("symmetric family n={n} k={k}: enumerated {} closed form {}", r.enumerated, r.closed_form);
    }
    Ok(())
}
