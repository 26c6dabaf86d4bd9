//! Enumerates the vertices of the bipartite two-input non-signaling
//! polytopes and sorts them by type.

use std::collections::BTreeMap;

use gmnl::oracle::ns_vertices_2x2xd;
use gmnl::scenario::Scenario;

fn main() -> gmnl::error::Result<()> {
    for d in [2, 3] {
        let t = std::time::Instant::now();
        let verts = ns_vertices_2x2xd(d)?;
        let mut by_den: BTreeMap<i64, usize> = BTreeMap::new();
        for v in verts {
            let den = v.probs.iter().map(|p| *p.denom()).max().unwrap_or(1);
            *by_den.entry(den).or_default() += 1;
            assert!(v.to_behavior(Scenario { n: 2, m: 2, d }).is_ok());
        }
        println!("(2,2,{d}): {} vertices in {:.2?}", verts.len(), t.elapsed());
        for (den, count) in by_den {
            println!("  largest denominator {den}: {count}");
        }
    }
    Ok(())
}
