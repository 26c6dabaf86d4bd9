//! Derivative-free search for measurements maximizing a Bell expression on
//! a fixed state.
//!
//! Every input of every party measures in an orthonormal basis. Qubit bases
//! are set by two angles `(θ, φ)`; for `d ≥ 3` a basis is the columns of
//! `exp(i Σ_j t_j λ_j)` over the `d²−1` generalized Gell-Mann matrices.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compose::ComposedInequality;
use crate::error::{Error, Result};
use crate::expression::BellExpression;
use crate::measurement::MeasurementSet;
use crate::scenario::Scenario;
use crate::state::{DensityMatrix, SpectralForm, C64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizationConfig {
    pub restarts: usize,
    pub max_iterations: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub lower: f64,
    pub upper: f64,
}

impl Default for OptimizationConfig {
    fn default() -> Self {
        OptimizationConfig {
            restarts: 50,
            max_iterations: 20_000,
            seed: 0,
            tolerance: 1e-12,
            lower: -PI,
            upper: PI,
        }
    }
}

impl OptimizationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::OutOfRange("restarts must be at least 1".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::OutOfRange(format!("tolerance {} must be positive", self.tolerance)));
        }
        if !(self.lower < self.upper) || !self.lower.is_finite() || !self.upper.is_finite() {
            return Err(Error::OutOfRange(format!(
                "parameter bounds [{}, {}] are empty",
                self.lower, self.upper
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::OutOfRange("max_iterations must be at least 1".into()));
        }
        Ok(())
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Debug, Clone)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes `f` with the Nelder–Mead simplex method, starting from a
/// simplex of edge `step` around `x0`.
pub fn nelder_mead<F: Fn(&[f64]) -> f64>(
    f: F,
    x0: &[f64],
    step: f64,
    max_iterations: usize,
    tolerance: f64,
) -> NelderMeadResult {
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        let v = f(&x);
        simplex.push((x, v));
    }
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iterations {
        iterations += 1;
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[n].1 - simplex[0].1;
        let size = simplex[1..]
            .iter()
            .map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if spread.abs() <= tolerance && size <= 1e-9_f64.max(tolerance) {
            converged = true;
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / n as f64)
            .collect();
        let towards = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n].0)
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };
        let xr = towards(-alpha);
        let fr = f(&xr);
        if fr < simplex[0].1 {
            let xe = towards(-alpha * gamma);
            let fe = f(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[n].1 {
                let xc = towards(-alpha * rho);
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc = towards(rho);
                let fc = f(&xc);
                (xc, fc)
            };
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for (x, v) in simplex[1..].iter_mut() {
                    for (xi, bi) in x.iter_mut().zip(&best) {
                        *xi = bi + sigma * (*xi - bi);
                    }
                    *v = f(x);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    NelderMeadResult {
        x,
        value,
        iterations,
        converged,
    }
}

/// Generalized Gell-Mann matrices for dimension `d` (`d²−1` of them).
pub fn gell_mann(d: usize) -> Vec<DMatrix<C64>> {
    let z = C64::new(0.0, 0.0);
    let mut out = Vec::with_capacity(d * d - 1);
    for j in 0..d {
        for k in (j + 1)..d {
            let mut s = DMatrix::from_element(d, d, z);
            s[(j, k)] = C64::new(1.0, 0.0);
            s[(k, j)] = C64::new(1.0, 0.0);
            out.push(s);
            let mut a = DMatrix::from_element(d, d, z);
            a[(j, k)] = C64::new(0.0, -1.0);
            a[(k, j)] = C64::new(0.0, 1.0);
            out.push(a);
        }
    }
    for l in 1..d {
        let norm = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut m = DMatrix::from_element(d, d, z);
        for j in 0..l {
            m[(j, j)] = C64::new(norm, 0.0);
        }
        m[(l, l)] = C64::new(-norm * l as f64, 0.0);
        out.push(m);
    }
    out
}

/// Number of real parameters describing one basis.
pub fn params_per_basis(d: usize) -> usize {
    if d == 2 {
        2
    } else {
        d * d - 1
    }
}

/// Orthonormal basis (outcome-ordered vectors) for one parameter block.
pub fn basis_from_params(d: usize, p: &[f64], generators: &[DMatrix<C64>]) -> Vec<Vec<C64>> {
    if d == 2 {
        let (th, ph) = (p[0], p[1]);
        let (s, c) = (0.5 * th).sin_cos();
        return vec![
            vec![C64::new(c, 0.0), C64::from_polar(s, ph)],
            vec![-C64::from_polar(s, -ph), C64::new(c, 0.0)],
        ];
    }
    let mut h = DMatrix::from_element(d, d, C64::new(0.0, 0.0));
    for (t, g) in p.iter().zip(generators) {
        h += g * C64::new(*t, 0.0);
    }
    let eig = h.symmetric_eigen();
    let phases = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        d,
        eig.eigenvalues.iter().map(|&l| C64::from_polar(1.0, l)),
    ));
    let u = &eig.eigenvectors * phases * eig.eigenvectors.adjoint();
    (0..d).map(|col| u.column(col).iter().cloned().collect()).collect()
}

/// How parameters map onto `(party, input)` bases.
#[derive(Debug, Clone, Copy)]
pub struct Layout {
    pub scenario: Scenario,
    /// Parties `2..n` share one set of settings.
    pub tie_parties: bool,
}

impl Layout {
    fn distinct_parties(&self) -> usize {
        if self.tie_parties {
            self.scenario.n.min(2)
        } else {
            self.scenario.n
        }
    }

    pub fn len(&self) -> usize {
        self.distinct_parties() * self.scenario.m * params_per_basis(self.scenario.d)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `[party][input][outcome] → vector`.
    pub fn bases(&self, params: &[f64], generators: &[DMatrix<C64>]) -> Vec<Vec<Vec<Vec<C64>>>> {
        let s = self.scenario;
        let per = params_per_basis(s.d);
        let distinct: Vec<Vec<Vec<Vec<C64>>>> = (0..self.distinct_parties())
            .map(|k| {
                (0..s.m)
                    .map(|x| {
                        let off = (k * s.m + x) * per;
                        basis_from_params(s.d, &params[off..off + per], generators)
                    })
                    .collect()
            })
            .collect();
        (0..s.n).map(|k| distinct[k.min(distinct.len() - 1)].clone()).collect()
    }

    pub fn measurements(&self, params: &[f64]) -> Result<MeasurementSet> {
        let generators = gell_mann(self.scenario.d);
        MeasurementSet::from_bases(self.scenario, &self.bases(params, &generators))
    }
}

/// Value of an expression on a state in spectral form under rank-1
/// projective measurements.
pub struct Objective {
    layout: Layout,
    generators: Vec<DMatrix<C64>>,
    terms: Vec<(Vec<usize>, Vec<usize>, f64)>,
    identity_weight: f64,
    components: Vec<(f64, Vec<C64>)>,
    coefficient_sum: f64,
}

impl Objective {
    pub fn new(expr: &BellExpression, state: &SpectralForm, tie_parties: bool) -> Result<Self> {
        let s = expr.scenario;
        if !state.dims.matches(&s) {
            return Err(Error::DimensionMismatch(format!(
                "state with n={}, d={} does not fit {s}",
                state.dims.n, state.dims.d
            )));
        }
        let terms: Vec<_> = expr
            .terms()
            .map(|(e, c)| (e.outcomes.clone(), e.inputs.clone(), c))
            .collect();
        Ok(Objective {
            layout: Layout {
                scenario: s,
                tie_parties,
            },
            generators: gell_mann(s.d),
            coefficient_sum: terms.iter().map(|t| t.2).sum(),
            terms,
            identity_weight: state.identity_weight,
            components: state.components.clone(),
        })
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    /// Value on the maximally mixed state, the same for every rank-1
    /// projective measurement: `Σ c / d^n`.
    pub fn white_noise_value(&self) -> f64 {
        self.coefficient_sum / self.layout.scenario.outcome_strings() as f64
    }

    pub fn value(&self, params: &[f64]) -> f64 {
        let s = self.layout.scenario;
        let bases = self.layout.bases(params, &self.generators);
        let mut total = 0.0;
        let mut buf = Vec::new();
        for (a, x, c) in &self.terms {
            let mut p = self.identity_weight;
            for (w, psi) in &self.components {
                buf.clear();
                buf.extend_from_slice(psi);
                let mut len = buf.len();
                for k in (0..s.n).rev() {
                    let v = &bases[k][x[k]][a[k]];
                    len /= s.d;
                    for j in 0..len {
                        let mut acc = C64::new(0.0, 0.0);
                        for t in 0..s.d {
                            acc += v[t].conj() * buf[j * s.d + t];
                        }
                        buf[j] = acc;
                    }
                }
                p += w * buf[0].norm_sqr();
            }
            total += c * p;
        }
        total
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizationResult {
    pub value: f64,
    pub params: Vec<f64>,
    pub converged: bool,
    pub best_restart: usize,
    /// Best value of every restart, in restart order.
    pub restart_values: Vec<f64>,
    #[serde(skip)]
    pub measurements: MeasurementSet,
}

fn wrap(x: f64, lo: f64, hi: f64) -> f64 {
    lo + (x - lo).rem_euclid(hi - lo)
}

/// RNG of restart `r`: independent of how many restarts are requested.
pub fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

/// Maximizes `objective` from seeded random starts, plus any `warm` starts.
pub fn maximize(objective: &Objective, cfg: &OptimizationConfig, warm: &[Vec<f64>]) -> Result<OptimizationResult> {
    cfg.validate()?;
    let dim = objective.layout.len();
    let f = |p: &[f64]| {
        let wrapped: Vec<f64> = p.iter().map(|&x| wrap(x, cfg.lower, cfg.upper)).collect();
        -objective.value(&wrapped)
    };
    let starts: Vec<Vec<f64>> = warm
        .iter()
        .cloned()
        .chain((0..cfg.restarts).map(|r| {
            let mut rng = restart_rng(cfg.seed, r);
            (0..dim).map(|_| rng.gen_range(cfg.lower..cfg.upper)).collect()
        }))
        .collect();
    let runs: Vec<NelderMeadResult> = starts
        .par_iter()
        .map(|x0| {
            // A second pass from the first optimum escapes collapsed simplices.
            let first = nelder_mead(f, x0, 0.6, cfg.max_iterations, cfg.tolerance);
            let second = nelder_mead(f, &first.x, 0.1, cfg.max_iterations, cfg.tolerance);
            if second.value <= first.value {
                second
            } else {
                first
            }
        })
        .collect();
    let (best_restart, best) = runs
        .iter()
        .enumerate()
        .fold((0, &runs[0]), |acc, (i, r)| if r.value < acc.1.value { (i, r) } else { acc });
    let params: Vec<f64> = best.x.iter().map(|&x| wrap(x, cfg.lower, cfg.upper)).collect();
    Ok(OptimizationResult {
        value: -best.value,
        measurements: objective.layout.measurements(&params)?,
        params,
        converged: best.converged,
        best_restart,
        restart_values: runs.iter().map(|r| -r.value).collect(),
    })
}

/// Best margin `lhs − rhs` of `ineq` on `rho` over projective measurements.
pub fn optimize_violation(
    ineq: &ComposedInequality,
    rho: &DensityMatrix,
    cfg: &OptimizationConfig,
    tie_parties: bool,
) -> Result<OptimizationResult> {
    let objective = Objective::new(&ineq.as_expression(), &rho.spectral_form(), tie_parties)?;
    maximize(&objective, cfg, &[])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::born_behavior;
    use crate::state::ghz_state;

    #[test]
    fn nelder_mead_finds_quadratic_minimum() {
        let r = nelder_mead(|x| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 2.0).powi(2), &[0.0, 0.0], 0.5, 5000, 1e-14);
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-5 && (r.x[1] + 2.0).abs() < 1e-5);
    }

    #[test]
    fn bases_are_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for d in [2, 3, 4] {
            let g = gell_mann(d);
            assert_eq!(g.len(), d * d - 1);
            let p: Vec<f64> = (0..params_per_basis(d)).map(|_| rng.gen_range(-PI..PI)).collect();
            let b = basis_from_params(d, &p, &g);
            for i in 0..d {
                for j in 0..d {
                    let ip: C64 = b[i].iter().zip(&b[j]).map(|(x, y)| x.conj() * y).sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((ip - C64::new(want, 0.0)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn objective_matches_born_rule() {
        let ineq = crate::compose::improved00(3).unwrap();
        let rho = crate::state::mix_white_noise(&ghz_state(3, 2).unwrap().density_matrix(), 0.2).unwrap();
        let obj = Objective::new(&ineq.as_expression(), &rho.spectral_form(), false).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p: Vec<f64> = (0..obj.layout().len()).map(|_| rng.gen_range(-PI..PI)).collect();
        let b = born_behavior(&rho, &obj.layout().measurements(&p).unwrap()).unwrap();
        assert!((obj.value(&p) - ineq.margin(&b).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn white_noise_value_is_measurement_independent() {
        let ineq = crate::compose::ineq_i1(3).unwrap();
        let dims = crate::state::Dims::new(3, 2).unwrap();
        let mixed = DensityMatrix::maximally_mixed(dims);
        let obj = Objective::new(&ineq.as_expression(), &mixed.spectral_form(), true).unwrap();
        let p = vec![0.3; obj.layout().len()];
        assert!((obj.value(&p) - obj.white_noise_value()).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        assert!(OptimizationConfig::default().validate().is_ok());
        assert!(OptimizationConfig::default().with_restarts(0).validate().is_err());
    }
}
