mod common;

use common::*;
use gmnl::compose::{
    bipartitions, compose_qutrit_tripartite, improved00, ineq_i1, ineq_isym, star_chsh_family, star_depth,
    symmetric_chsh_family, tri_family,
};
use gmnl::oracle::bounds::to_f64;
use gmnl::oracle::{bilocal_bound, hybrid_vertices, kproducible_bound, local_bound, partition_max, verify_condition_i};
use gmnl::seeds::{chsh_seed, cglmp_seeds, tri_seed};
use num_traits::Zero;
use rand::Rng;

#[test]
fn three_party_inequalities_hold_on_every_hybrid_vertex() {
    for ineq in [improved00(3).unwrap(), ineq_i1(3).unwrap(), ineq_isym(3).unwrap()] {
        let (worst, visited) = soundness(&ineq, None).unwrap();
        assert!(worst <= 1e-9, "{}: {worst}", ineq.label);
        assert_eq!(visited, 3 * 24 * 4);
    }
    let (worst, _) = soundness(&star_depth(3, 2).unwrap(), Some(2)).unwrap();
    assert!(worst <= 1e-9);
}

#[test]
fn qutrit_inequalities_are_bilocal_sound() {
    let (sym, star) = compose_qutrit_tripartite().unwrap();
    for ineq in [sym, star] {
        let (worst, visited) = soundness(&ineq, None).unwrap();
        assert!(worst <= 1e-9, "{}: {worst}", ineq.label);
        assert_eq!(visited, 3 * 1161 * 9);
    }
}

#[test]
fn bounds_are_monotone_in_the_model_class() {
    let exprs = [
        chsh_seed().lift(3, &[0, 1], &[(0, 0)]).unwrap(),
        improved00(3).unwrap().as_expression(),
        ineq_isym(3).unwrap().as_expression(),
        ineq_i1(4).unwrap().as_expression(),
        tri_seed().lift(4, &[0, 1, 2], &[(0, 0)]).unwrap(),
    ];
    for e in &exprs {
        let n = e.scenario.n;
        let local = local_bound(e).unwrap().exact;
        let by_k: Vec<_> = (1..n).map(|k| kproducible_bound(e, k).unwrap().exact).collect();
        assert_eq!(by_k[0], local, "{}", e.label);
        assert!(by_k.windows(2).all(|w| w[0] <= w[1]), "{}", e.label);
        assert_eq!(bilocal_bound(e).unwrap().exact, by_k[n - 2], "{}", e.label);
    }
}

#[test]
fn random_mixtures_stay_below_the_vertex_maximum() {
    let ineq = improved00(3).unwrap();
    let mut r = rng(11);
    for p in bipartitions(3) {
        let verts = hybrid_vertices(ineq.scenario(), &p).unwrap();
        let behaviors: Vec<_> = verts.iter().map(|v| v.to_behavior().unwrap()).collect();
        let vmax = behaviors
            .iter()
            .map(|b| ineq.margin(b).unwrap())
            .fold(f64::NEG_INFINITY, f64::max);
        let lp = to_f64(&partition_max(&ineq.as_expression(), &p).unwrap());
        assert!((lp - vmax).abs() < 1e-12, "{p}: {lp} vs {vmax}");
        for _ in 0..200 {
            let mut mix = behaviors[r.gen_range(0..behaviors.len())].clone();
            for _ in 0..4 {
                let other = &behaviors[r.gen_range(0..behaviors.len())];
                mix = mix.mix(other, r.gen_range(0.0..1.0)).unwrap();
            }
            assert!(ineq.margin(&mix).unwrap() <= vmax + 1e-12);
        }
    }
}

#[test]
fn seeds_are_local() {
    let (j3, j3t) = cglmp_seeds();
    for e in [chsh_seed(), tri_seed(), j3, j3t] {
        assert!(local_bound(&e).unwrap().exact.is_zero(), "{}", e.label);
    }
}

#[test]
fn member_conditions_hold() {
    for n in 3..=4 {
        assert!(verify_condition_i(&star_chsh_family(n).unwrap()).unwrap().holds());
        assert!(verify_condition_i(&symmetric_chsh_family(n).unwrap()).unwrap().holds());
    }
    assert!(verify_condition_i(&tri_family(4).unwrap()).unwrap().holds());
}
