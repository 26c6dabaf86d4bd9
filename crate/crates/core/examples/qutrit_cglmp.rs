//! Three-outcome inequalities built from CGLMP seeds, tested on GHZ(3,3).

use gmnl::compose::compose_qutrit_tripartite;
use gmnl::experiments::qutrit_ghz;
use gmnl::oracle::bilocal_bound;
use gmnl::quantum::OptimizationConfig;
use gmnl::seeds::cglmp_seeds;

fn main() -> gmnl::error::Result<()> {
    let (j3, j3t) = cglmp_seeds();
    println!("J3  = {j3}");
    println!("J3~ = {j3t}");
    let (sym, star) = compose_qutrit_tripartite()?;
    println!("I+ = {}", star.positive_part);
    println!("T  = {}", star.common_term);
    for ineq in [&sym, &star] {
        println!("{}: bilocal bound {}", ineq.label, bilocal_bound(&ineq.as_expression())?.exact);
    }

    let restarts = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10);
    let ghz = qutrit_ghz(&OptimizationConfig::default().with_restarts(restarts))?;
    println!("GHZ(3,3), {restarts} restarts: sym margin {:.4e}, star margin {:.4e}", ghz.sym_margin, ghz.star_margin);
    println!("star noise tolerance from the margin: {:.4}", ghz.closed_form_threshold);
    Ok(())
}
