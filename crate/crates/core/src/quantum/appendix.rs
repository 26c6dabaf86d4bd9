//! Explicit measurements violating the improved three-party inequality for
//! every canonical three-qubit state with `b > c > d`.

use std::f64::consts::FRAC_PI_4;

use serde::Serialize;

use super::canonical::CanonicalThreeQubit;
use crate::behavior::Behavior;
use crate::compose::improved00;
use crate::error::{Error, Result};
use crate::measurement::{born_behavior_pure, MeasurementSet};
use crate::scenario::Scenario;
use crate::state::C64;

/// Normalizations `(η₁, η₂, η₃)` of the input-1 measurement vectors.
pub fn etas(st: &CanonicalThreeQubit, alpha: f64) -> (f64, f64, f64) {
    let (s, c) = alpha.sin_cos();
    let (a2, c2) = (st.a * st.a, st.c * st.c);
    let eta1 = (c2 * c2 * s * s + a2 * a2 * c * c).sqrt();
    let eta2 = (c2 * s * s + (st.b * c + st.e * s).powi(2)).sqrt();
    let eta3 = (a2 * c * c + c2 * s * s).sqrt();
    (eta1, eta2, eta3)
}

/// Outcome-0 vectors `[party][input]`.
pub fn appendix_vectors(st: &CanonicalThreeQubit, alpha: f64) -> Result<Vec<Vec<Vec<C64>>>> {
    if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&alpha) {
        return Err(Error::OutOfRange(format!("α = {alpha} outside [0, π/2]")));
    }
    let (eta1, eta2, eta3) = etas(st, alpha);
    if [eta1, eta2, eta3].iter().any(|&e| e < 1e-300) {
        return Err(Error::Numerical(format!("vanishing normalization at α = {alpha} for {st:?}")));
    }
    let (s, c) = alpha.sin_cos();
    let r = |x: f64| C64::new(x, 0.0);
    let (a2, c2) = (st.a * st.a, st.c * st.c);
    Ok(vec![
        vec![
            vec![r(c), r(s)],
            vec![r(-c2 * s / eta1), r(a2 * c / eta1)],
        ],
        vec![
            vec![r(1.0), r(0.0)],
            vec![r(st.c * s / eta2), r((st.b * c + st.e * s) / eta2)],
        ],
        vec![
            vec![r(0.0), r(1.0)],
            vec![C64::from_polar(st.a * c / eta3, st.phi), r(st.c * s / eta3)],
        ],
    ])
}

pub fn appendix_measurements(st: &CanonicalThreeQubit, alpha: f64) -> Result<MeasurementSet> {
    MeasurementSet::from_outcome_zero_vectors(Scenario::qubits(3), &appendix_vectors(st, alpha)?)
}

/// Probabilities `(p(000|000), p(100|100), p(000|110))` in closed form.
pub fn closed_form_probabilities(st: &CanonicalThreeQubit, alpha: f64) -> (f64, f64, f64) {
    let (eta1, eta2, _) = etas(st, alpha);
    let s = alpha.sin();
    let c2 = st.c * st.c;
    let p000 = c2 * s * s;
    let p100 = c2 * c2 * c2 * s * s / (eta1 * eta1);
    let p110 = f_alpha(st, alpha).powi(2) / (eta1 * eta1 * eta2 * eta2);
    (p000, p100, p110)
}

/// `f(α) = a²c² sinα cosα + (a²e cosα − bc² sinα)(b cosα + e sinα)`, whose
/// root makes `p(000|110)` vanish.
pub fn f_alpha(st: &CanonicalThreeQubit, alpha: f64) -> f64 {
    let (s, c) = alpha.sin_cos();
    let (a2, c2) = (st.a * st.a, st.c * st.c);
    a2 * c2 * s * c + (a2 * st.e * c - st.b * c2 * s) * (st.b * c + st.e * s)
}

/// Positive root of `−bc²e t² + (a²c² + a²e² − b²c²) t + a²eb = 0` in
/// `t = tan α`, used to cross-check the bisection.
pub fn alpha_closed_form(st: &CanonicalThreeQubit) -> Option<f64> {
    let (a2, b, c2, e) = (st.a * st.a, st.b, st.c * st.c, st.e);
    let qa = b * c2 * e;
    let qb = a2 * c2 + a2 * e * e - b * b * c2;
    let qc = a2 * e * b;
    if qa <= 0.0 {
        return None;
    }
    let disc = qb * qb + 4.0 * qa * qc;
    // Stable form of (qb + √disc) / (2 qa).
    let t = if qb >= 0.0 {
        (qb + disc.sqrt()) / (2.0 * qa)
    } else {
        2.0 * qc / (disc.sqrt() - qb)
    };
    Some(t.atan())
}

/// Chooses `α`: `π/4` when `e = 0`, otherwise the root of [`f_alpha`] in
/// `(0, π/2)` found by bisection.
pub fn solve_alpha(st: &CanonicalThreeQubit) -> Result<f64> {
    if !(st.b > st.c && st.c > st.d) {
        return Err(Error::InvalidState(format!(
            "construction needs b > c > d, got b={}, c={}, d={}",
            st.b, st.c, st.d
        )));
    }
    if st.e == 0.0 {
        return Ok(FRAC_PI_4);
    }
    let (mut lo, mut hi) = (0.0, std::f64::consts::FRAC_PI_2);
    let (flo, fhi) = (f_alpha(st, lo), f_alpha(st, hi));
    if !(flo > 0.0 && fhi < 0.0) {
        return Err(Error::Numerical(format!(
            "no sign change of f on [0, π/2]: f(0) = {flo}, f(π/2) = {fhi}"
        )));
    }
    while hi - lo > 4.0 * f64::EPSILON {
        let mid = 0.5 * (lo + hi);
        if f_alpha(st, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let alpha = 0.5 * (lo + hi);
    let residual = f_alpha(st, alpha);
    if residual.abs() > 1e-12 {
        return Err(Error::Numerical(format!("bisection stalled with f(α) = {residual:.3e}")));
    }
    Ok(alpha)
}

#[derive(Debug, Clone, Serialize)]
pub struct Theorem2Outcome {
    pub margin: f64,
    pub alpha: f64,
    #[serde(skip)]
    pub behavior: Behavior,
}

/// Builds the measurements at the chosen `α` and evaluates the improved
/// three-party inequality on the resulting behavior.
pub fn verify_theorem2(st: &CanonicalThreeQubit) -> Result<Theorem2Outcome> {
    let alpha = solve_alpha(st)?;
    let meas = appendix_measurements(st, alpha)?;
    let behavior = born_behavior_pure(&st.state(), &meas)?;
    let margin = improved00(3)?.margin(&behavior)?;
    if !(margin > 0.0) {
        return Err(Error::Numerical(format!("non-positive margin {margin} for {st:?} at α = {alpha}")));
    }
    Ok(Theorem2Outcome {
        margin,
        alpha,
        behavior,
    })
}

/// Margin for `e = 0` at `α = π/4`:
/// `c²[½(b²+c²)(a²−c²)(a²+c²) − c²(a²−b²)²] / (4η₁²η₂²)`.
pub fn margin_e0_closed_form(st: &CanonicalThreeQubit) -> f64 {
    let (a2, b2, c2) = (st.a * st.a, st.b * st.b, st.c * st.c);
    let (eta1, eta2, _) = etas(st, FRAC_PI_4);
    let bracket = 0.5 * (b2 + c2) * (a2 - c2) * (a2 + c2) - c2 * (a2 - b2).powi(2);
    c2 * bracket / (4.0 * eta1 * eta1 * eta2 * eta2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::ev;
    use crate::quantum::canonical::canonical_sample;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample(seed: u64) -> CanonicalThreeQubit {
        canonical_sample(&mut ChaCha8Rng::seed_from_u64(seed), true)
    }

    #[test]
    fn zeroed_events_vanish() {
        for seed in 0..20 {
            let st = sample(seed);
            for alpha in [0.2, 0.7, 1.3] {
                let b = born_behavior_pure(&st.state(), &appendix_measurements(&st, alpha).unwrap()).unwrap();
                for e in ["001|001", "010|010", "000|101"] {
                    assert!(b.get(&ev(e)).abs() < 1e-12, "{e} = {}", b.get(&ev(e)));
                }
            }
        }
    }

    #[test]
    fn sign_change_endpoints() {
        let st = sample(5);
        let (a2, c2) = (st.a * st.a, st.c * st.c);
        assert!((f_alpha(&st, 0.0) - a2 * st.e * st.b).abs() < 1e-15);
        let half_pi = std::f64::consts::FRAC_PI_2;
        assert!((f_alpha(&st, half_pi) + st.b * c2 * st.e).abs() < 1e-12);
    }

    #[test]
    fn bisection_matches_closed_form_root() {
        for seed in 0..50 {
            let st = sample(seed);
            let a = solve_alpha(&st).unwrap();
            let closed = alpha_closed_form(&st).unwrap();
            assert!((a - closed).abs() < 1e-9, "{a} vs {closed}");
            let b = born_behavior_pure(&st.state(), &appendix_measurements(&st, a).unwrap()).unwrap();
            assert!(b.get(&ev("000|110")).abs() < 1e-10);
        }
    }

    #[test]
    fn e_zero_uses_quarter_pi() {
        let raw = [0.8f64, 0.45, 0.3, 0.1, 0.0];
        let n = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        let st = CanonicalThreeQubit::new(raw[0] / n, raw[1] / n, raw[2] / n, raw[3] / n, 0.0, 0.0).unwrap();
        assert_eq!(solve_alpha(&st).unwrap(), FRAC_PI_4);
        let out = verify_theorem2(&st).unwrap();
        assert!((out.margin - margin_e0_closed_form(&st)).abs() < 1e-12);
        assert!(out.margin > 0.0);
    }

    #[test]
    fn rejects_symmetric_states() {
        assert!(solve_alpha(&CanonicalThreeQubit::ghz()).is_err());
    }
}
