//! Exact local, bilocal and k-producible bounds of the composed inequalities.

use gmnl::compose::{improved00, ineq_i1, ineq_isym, star_depth, tri_improved};
use gmnl::oracle::{bilocal_bound, kproducible_bound, local_bound};
use gmnl::seeds::chsh_seed;

fn main() -> gmnl::error::Result<()> {
    let chsh = chsh_seed();
    let b = local_bound(&chsh)?;
    println!("{}: local {} with strategy {:?}", chsh.label, b.exact, b.strategy);
    println!("{}: non-signaling {}", chsh.label, gmnl::oracle::ns_bound(&chsh)?);

    for ineq in [improved00(3)?, ineq_i1(3)?, ineq_isym(4)?, tri_improved(4)?] {
        let e = ineq.as_expression();
        let t = std::time::Instant::now();
        let bl = bilocal_bound(&e)?;
        println!(
            "{:<24} local {:>3}  bilocal {:>3} (attained at {})  [{:.1?}]",
            ineq.label,
            local_bound(&e)?.exact,
            bl.exact,
            bl.partition.map(|p| p.to_string()).unwrap_or_default(),
            t.elapsed()
        );
    }

    let depth = star_depth(4, 2)?;
    let e = depth.as_expression();
    for k in 1..=3 {
        println!("{} with blocks of at most {k}: {}", depth.label, kproducible_bound(&e, k)?.exact);
    }
    Ok(())
}
