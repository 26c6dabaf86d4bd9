#![allow(dead_code)]

use gmnl::behavior::{check_nonsignaling, Behavior};
use gmnl::compose::{bipartitions, partitions, ComposedInequality, Partition};
use gmnl::expression::BellExpression;
use gmnl::measurement::{born_behavior, MeasurementSet};
use gmnl::oracle::bounds::to_f64;
use gmnl::oracle::{hybrid_vertices, partition_max};
use gmnl::quantum::canonical::{canonical_sample, random_unitary, CanonicalThreeQubit};
use gmnl::quantum::canonicalize;
use gmnl::scenario::{Event, Scenario};
use gmnl::state::{DensityMatrix, Dims, PureState, C64};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

pub fn random_pure(rng: &mut ChaCha8Rng, n: usize, d: usize) -> PureState {
    let dims = Dims::new(n, d).unwrap();
    let amps = (0..dims.dim()).map(|_| gaussian(rng)).collect();
    PureState::normalized(dims, amps).unwrap()
}

/// `G G† / tr` for a complex Gaussian `G`.
pub fn random_mixed(rng: &mut ChaCha8Rng, n: usize, d: usize) -> DensityMatrix {
    let dims = Dims::new(n, d).unwrap();
    let dim = dims.dim();
    let g = DMatrix::<C64>::from_fn(dim, dim, |_, _| gaussian(rng));
    let mut rho = &g * g.adjoint();
    let tr: C64 = rho.trace();
    rho /= tr;
    let rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
    let entries: Vec<C64> = (0..dim).flat_map(|i| (0..dim).map(move |j| (i, j))).map(|(i, j)| rho[(i, j)]).collect();
    DensityMatrix::new(dims, entries).unwrap()
}

/// Projective measurements onto the columns of Haar-random unitaries.
pub fn random_measurements(rng: &mut ChaCha8Rng, s: Scenario) -> MeasurementSet {
    let bases: Vec<Vec<Vec<Vec<C64>>>> = (0..s.n)
        .map(|_| {
            (0..s.m)
                .map(|_| {
                    let u = random_unitary(rng, s.d);
                    (0..s.d).map(|c| u.column(c).iter().cloned().collect()).collect()
                })
                .collect()
        })
        .collect();
    MeasurementSet::from_bases(s, &bases).unwrap()
}

pub fn random_event(rng: &mut ChaCha8Rng, s: Scenario) -> Event {
    Event::new(
        (0..s.n).map(|_| rng.gen_range(0..s.d)).collect(),
        (0..s.n).map(|_| rng.gen_range(0..s.m)).collect(),
    )
}

pub fn random_expression(rng: &mut ChaCha8Rng, s: Scenario, terms: usize) -> BellExpression {
    let mut e = BellExpression::zero(s, "random");
    for _ in 0..terms {
        let c = rng.gen_range(-4i32..=4) as f64 / 2.0;
        if c != 0.0 {
            e.add_term(random_event(rng, s), c).unwrap();
        }
    }
    e
}

/// Normalization per input tuple and non-signaling of the Born behavior.
pub fn born_behavior_is_valid(seed: u64, n: usize, d: usize) -> Result<(), String> {
    let mut r = rng(seed);
    let s = Scenario::new(n, 2, d).unwrap();
    let rho = random_mixed(&mut r, n, d);
    let b = born_behavior(&rho, &random_measurements(&mut r, s)).map_err(|e| e.to_string())?;
    for x in s.inputs() {
        let total: f64 = s.outcomes().map(|a| b.get(&Event::new(a, x.clone()))).sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(format!("inputs {x:?} sum to {total}"));
        }
    }
    let report = check_nonsignaling(&b);
    if report.max_violation > 1e-10 {
        return Err(report.describe());
    }
    Ok(())
}

/// `e = I₊ − I₋` as term maps and as values on a random behavior.
pub fn decomposition_identity(seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let s = Scenario::new(r.gen_range(2..=3), 2, r.gen_range(2..=3)).unwrap();
    let e = random_expression(&mut r, s, 12);
    let (plus, minus) = e.pos_neg_decompose();
    if plus.terms().any(|(_, c)| c <= 0.0) || minus.terms().any(|(_, c)| c <= 0.0) {
        return Err("non-positive coefficient in a part".into());
    }
    let rebuilt = plus.minus(&minus).map_err(|e| e.to_string())?;
    if rebuilt.term_map() != e.term_map() {
        return Err(format!("[{rebuilt}] ≠ [{e}]"));
    }
    let b = born_behavior(&random_mixed(&mut r, s.n, s.d), &random_measurements(&mut r, s)).unwrap();
    let (v, vp, vm) = (e.evaluate(&b).unwrap(), plus.evaluate(&b).unwrap(), minus.evaluate(&b).unwrap());
    if (v - (vp - vm)).abs() > 1e-12 {
        return Err(format!("{v} ≠ {vp} − {vm}"));
    }
    Ok(())
}

/// Lifting keeps the number of terms and the multiset of coefficients.
pub fn lift_preserves_terms(seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let d = r.gen_range(2..=3);
    let e = random_expression(&mut r, Scenario::new(2, 2, d).unwrap(), 10);
    let n = r.gen_range(3..=5);
    let mut host: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        host.swap(i, r.gen_range(0..=i));
    }
    host.truncate(2);
    let fill: Vec<(usize, usize)> = (0..n - 2).map(|_| (r.gen_range(0..d), r.gen_range(0..2))).collect();
    let lifted = e.lift(n, &host, &fill).map_err(|e| e.to_string())?;
    let sorted = |x: &BellExpression| {
        let mut v: Vec<f64> = x.terms().map(|(_, c)| c).collect();
        v.sort_by(f64::total_cmp);
        v
    };
    if lifted.len() != e.len() || sorted(&lifted) != sorted(&e) {
        return Err(format!("[{e}] lifted to [{lifted}]"));
    }
    Ok(())
}

fn canonical_distance(x: &CanonicalThreeQubit, y: &CanonicalThreeQubit) -> f64 {
    let dc = x
        .coefficients()
        .iter()
        .zip(y.coefficients())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let dphi = (x.phi - y.phi).rem_euclid(std::f64::consts::TAU);
    dc.max(dphi.min(std::f64::consts::TAU - dphi))
}

/// Canonical forms of `ψ` and of `U₁⊗U₂⊗U₃ ψ` agree, and the canonical
/// form is its own canonical form.
pub fn canonical_form_is_lu_invariant(seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let st = canonical_sample(&mut r, true);
    let us: Vec<_> = (0..3).map(|_| random_unitary(&mut r, 2)).collect();
    let rotated = st.state().apply_local_unitaries(&us).map_err(|e| e.to_string())?;
    let first = canonicalize(&st.state()).map_err(|e| e.to_string())?.canonical;
    let second = canonicalize(&rotated).map_err(|e| e.to_string())?.canonical;
    let again = canonicalize(&second.state()).map_err(|e| e.to_string())?.canonical;
    if canonical_distance(&first, &second) > 1e-6 || canonical_distance(&second, &again) > 1e-6 {
        return Err(format!("{first:?} vs {second:?} vs {again:?}"));
    }
    Ok(())
}

/// Largest margin of `ineq` over the product models of one partition. Blocks
/// of at most two parties are enumerated vertex by vertex; a partition with a
/// larger block falls back to the exact linear program.
pub fn partition_margin(ineq: &ComposedInequality, p: &Partition) -> Result<(f64, usize), String> {
    let expr = ineq.as_expression();
    if p.blocks.iter().all(|b| b.len() <= 2) {
        let verts = hybrid_vertices(expr.scenario, p).map_err(|e| e.to_string())?;
        let mut worst = f64::NEG_INFINITY;
        for v in &verts {
            let b: Behavior = v.to_behavior().map_err(|e| e.to_string())?;
            worst = worst.max(ineq.margin(&b).map_err(|e| e.to_string())?);
        }
        Ok((worst, verts.len()))
    } else {
        let q = partition_max(&expr, p).map_err(|e| e.to_string())?;
        Ok((to_f64(&q), 0))
    }
}

/// Worst margin over bipartitions (`k = None`) or over all partitions into
/// blocks of at most `k` parties, with the number of vertices visited.
pub fn soundness(ineq: &ComposedInequality, k: Option<usize>) -> Result<(f64, usize), String> {
    let n = ineq.scenario().n;
    let parts = match k {
        None => bipartitions(n),
        Some(k) => partitions(n, k),
    };
    let mut worst = f64::NEG_INFINITY;
    let mut visited = 0;
    for p in &parts {
        let (m, v) = partition_margin(ineq, p)?;
        worst = worst.max(m);
        visited += v;
    }
    Ok((worst, visited))
}
