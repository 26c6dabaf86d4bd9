//! Canonical local-unitary form of three-qubit pure states,
//! `a e^{iφ}|000⟩ + b|011⟩ + c|101⟩ + d|110⟩ + e|111⟩`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{Dims, PureState, C64};

/// Smallest gap between `b`, `c`, `d` accepted by [`canonical_sample`] when
/// a non-symmetric state is requested.
pub const NONSYMMETRIC_GAP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonicalThreeQubit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub phi: f64,
}

impl CanonicalThreeQubit {
    pub fn new(a: f64, b: f64, c: f64, d: f64, e: f64, phi: f64) -> Result<Self> {
        let st = CanonicalThreeQubit { a, b, c, d, e, phi };
        st.validate()?;
        Ok(st)
    }

    pub fn ghz() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        CanonicalThreeQubit {
            a: h,
            b: 0.0,
            c: 0.0,
            d: 0.0,
            e: h,
            phi: 0.0,
        }
    }

    pub fn coefficients(&self) -> [f64; 5] {
        [self.a, self.b, self.c, self.d, self.e]
    }

    pub fn validate(&self) -> Result<()> {
        let cs = self.coefficients();
        if cs.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) || !self.phi.is_finite() {
            return Err(Error::InvalidState(format!("coefficients must be finite and non-negative: {self:?}")));
        }
        let norm: f64 = cs.iter().map(|x| x * x).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!("Σ coefficients² = {norm}, expected 1")));
        }
        if cs[1..].iter().any(|&x| x > self.a + 1e-12) {
            return Err(Error::InvalidState(format!("a = {} is not the largest coefficient", self.a)));
        }
        Ok(())
    }

    /// `b > c > d` with every gap at least `gap`.
    pub fn is_nonsymmetric(&self, gap: f64) -> bool {
        self.b - self.c >= gap && self.c - self.d >= gap
    }

    pub fn state(&self) -> PureState {
        let mut amps = vec![C64::new(0.0, 0.0); 8];
        amps[0b000] = C64::from_polar(self.a, self.phi);
        amps[0b011] = C64::new(self.b, 0.0);
        amps[0b101] = C64::new(self.c, 0.0);
        amps[0b110] = C64::new(self.d, 0.0);
        amps[0b111] = C64::new(self.e, 0.0);
        PureState::normalized(Dims { n: 3, d: 2 }, amps).expect("canonical coefficients are normalized")
    }
}

/// Draws canonical coefficients: five absolute Gaussians normalized, the
/// largest becomes `a`, a random one of the rest becomes `e`, and the other
/// three are sorted into `b ≥ c ≥ d`. With `require_nonsymmetric` the draw
/// is repeated until `b > c > d` with gaps of at least `gap`.
pub fn canonical_sample_with_gap(rng: &mut ChaCha8Rng, require_nonsymmetric: bool, gap: f64) -> CanonicalThreeQubit {
    loop {
        let mut xs: Vec<f64> = (0..5)
            .map(|_| {
                let g: f64 = StandardNormal.sample(rng);
                g.abs()
            })
            .collect();
        let norm = xs.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        xs.iter_mut().for_each(|x| *x /= norm);
        xs.sort_by(|p, q| q.total_cmp(p));
        let a = xs[0];
        let e = xs.remove(1 + rng.gen_range(0..4));
        let (b, c, d) = (xs[1], xs[2], xs[3]);
        let st = CanonicalThreeQubit {
            a,
            b,
            c,
            d,
            e,
            phi: rng.gen_range(0.0..2.0 * PI),
        };
        if !require_nonsymmetric || st.is_nonsymmetric(gap) {
            return st;
        }
    }
}

pub fn canonical_sample(rng: &mut ChaCha8Rng, require_nonsymmetric: bool) -> CanonicalThreeQubit {
    canonical_sample_with_gap(rng, require_nonsymmetric, NONSYMMETRIC_GAP)
}

/// Result of [`canonicalize`]: coefficients, the local unitaries and the
/// party order that map the input onto them.
#[derive(Debug, Clone)]
pub struct Canonicalization {
    pub canonical: CanonicalThreeQubit,
    pub unitaries: Vec<DMatrix<C64>>,
    /// `permutation[k]` is the input party placed at position `k`.
    pub permutation: Vec<usize>,
    /// Weight left on `|001⟩, |010⟩, |100⟩`.
    pub residual: f64,
}

const CANON_RESTARTS: usize = 16;
const CANON_SWEEPS: usize = 20_000;
const RESIDUAL_TOL: f64 = 1e-8;

fn amp(psi: &[C64], i: usize, j: usize, k: usize) -> C64 {
    psi[(i << 2) | (j << 1) | k]
}

/// Contracts `ψ` with `conj(x)` on the two parties other than `party`.
fn contract(psi: &[C64], party: usize, x: &[[C64; 2]; 3]) -> [C64; 2] {
    let mut out = [C64::new(0.0, 0.0); 2];
    for (idx, &v) in psi.iter().enumerate() {
        let bits = [(idx >> 2) & 1, (idx >> 1) & 1, idx & 1];
        let mut w = v;
        for q in 0..3 {
            if q != party {
                w *= x[q][bits[q]].conj();
            }
        }
        out[bits[party]] += w;
    }
    out
}

fn normalize2(v: [C64; 2]) -> Option<[C64; 2]> {
    let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    (n > 1e-300).then(|| [v[0] / n, v[1] / n])
}

/// Product state of maximal overlap with `ψ`, by alternating updates of one
/// factor at a time from several random starts.
fn max_product_overlap(psi: &[C64], rng: &mut ChaCha8Rng) -> ([[C64; 2]; 3], f64) {
    let mut best = ([[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]; 3], f64::NEG_INFINITY);
    for _ in 0..CANON_RESTARTS {
        let mut x = [[C64::new(0.0, 0.0); 2]; 3];
        for f in x.iter_mut() {
            let raw = [
                C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)),
                C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)),
            ];
            *f = normalize2(raw).unwrap_or([C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        }
        for _ in 0..CANON_SWEEPS {
            let mut shift = 0.0f64;
            for party in 0..3 {
                if let Some(v) = normalize2(contract(psi, party, &x)) {
                    shift = shift.max((v[0] - x[party][0]).norm()).max((v[1] - x[party][1]).norm());
                    x[party] = v;
                }
            }
            if shift < 1e-14 {
                break;
            }
        }
        let u = contract(psi, 0, &x);
        let overlap = (x[0][0].conj() * u[0] + x[0][1].conj() * u[1]).norm();
        if overlap > best.1 + 1e-13 {
            best = (x, overlap);
        }
    }
    best
}

/// Unitary whose rows are `⟨v|` and `⟨v⊥|`, mapping `v ↦ |0⟩`.
fn basis_change(v: [C64; 2]) -> DMatrix<C64> {
    let perp = [-v[1].conj(), v[0].conj()];
    DMatrix::from_row_slice(2, 2, &[v[0].conj(), v[1].conj(), perp[0].conj(), perp[1].conj()])
}

/// Finds the canonical form of a three-qubit pure state.
///
/// The product state of largest overlap defines the local `|0⟩` of each
/// party, which removes the `|001⟩, |010⟩, |100⟩` components; local phases
/// then make `b, c, d, e` real and non-negative, and the parties are
/// reordered so that `b ≥ c ≥ d`.
pub fn canonicalize(psi: &PureState) -> Result<Canonicalization> {
    if psi.dims.n != 3 || psi.dims.d != 2 {
        return Err(Error::InvalidState("canonical form needs three qubits".into()));
    }
    let mut rng = <ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0x5eed);
    let (x, _) = max_product_overlap(psi.amplitudes(), &mut rng);
    let mut unitaries: Vec<DMatrix<C64>> = x.iter().map(|&v| basis_change(v)).collect();
    let rotated = psi.apply_local_unitaries(&unitaries)?;
    let r = rotated.amplitudes();
    let arg = |i, j, k| {
        let z = amp(r, i, j, k);
        if z.norm() < 1e-14 {
            0.0
        } else {
            z.arg()
        }
    };
    // Phases multiplying basis vector |1⟩ of parties 1, 2 stay 0.
    let w1 = -arg(1, 1, 1);
    let u0 = -arg(0, 1, 1) - w1;
    let v0 = -arg(1, 0, 1) - w1;
    let w0 = -arg(1, 1, 0);
    let phases = [[u0, 0.0], [v0, 0.0], [w0, w1]];
    for (u, ph) in unitaries.iter_mut().zip(phases) {
        let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::from_polar(1.0, ph[0]),
            C64::from_polar(1.0, ph[1]),
        ]));
        *u = &diag * &*u;
    }
    let fixed = psi.apply_local_unitaries(&unitaries)?;
    let f = fixed.amplitudes();
    let residual = [amp(f, 0, 0, 1), amp(f, 0, 1, 0), amp(f, 1, 0, 0)]
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>();
    if residual > RESIDUAL_TOL {
        return Err(Error::Numerical(format!(
            "canonical form residual {residual:.3e} exceeds {RESIDUAL_TOL:.0e}"
        )));
    }
    // Party k carries the coefficient of the ket with a single 0 at k.
    let singles = [amp(f, 0, 1, 1).re, amp(f, 1, 0, 1).re, amp(f, 1, 1, 0).re];
    let mut permutation = vec![0, 1, 2];
    permutation.sort_by(|&p, &q| singles[q].total_cmp(&singles[p]));
    let a0 = amp(f, 0, 0, 0);
    let canonical = CanonicalThreeQubit {
        a: a0.norm(),
        b: singles[permutation[0]].max(0.0),
        c: singles[permutation[1]].max(0.0),
        d: singles[permutation[2]].max(0.0),
        e: amp(f, 1, 1, 1).re.max(0.0),
        phi: if a0.norm() < 1e-14 { 0.0 } else { a0.arg().rem_euclid(2.0 * PI) },
    };
    Ok(Canonicalization {
        canonical,
        unitaries,
        permutation,
        residual,
    })
}

/// Haar-random single-qubit unitary.
pub fn random_unitary(rng: &mut ChaCha8Rng, dim: usize) -> DMatrix<C64> {
    let g = DMatrix::<C64>::from_fn(dim, dim, |_, _| {
        C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
    });
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        dim,
        (0..dim).map(|i| {
            let z = r[(i, i)];
            if z.norm() == 0.0 {
                C64::new(1.0, 0.0)
            } else {
                z / z.norm()
            }
        }),
    ));
    q * phases
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::ghz_state;
    use rand::SeedableRng;

    #[test]
    fn samples_satisfy_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..2000 {
            let st = canonical_sample(&mut rng, true);
            st.validate().unwrap();
            assert!(st.is_nonsymmetric(NONSYMMETRIC_GAP));
        }
    }

    #[test]
    fn ghz_is_already_canonical() {
        let c = canonicalize(&ghz_state(3, 2).unwrap()).unwrap().canonical;
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for (got, want) in c.coefficients().iter().zip([h, 0.0, 0.0, 0.0, h]) {
            assert!((got - want).abs() < 1e-9, "{c:?}");
        }
    }

    #[test]
    fn canonical_input_is_fixed() {
        let raw = [0.8f64, 0.4, 0.3, 0.2, 0.25];
        let n = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        let st = CanonicalThreeQubit::new(raw[0] / n, raw[1] / n, raw[2] / n, raw[3] / n, raw[4] / n, 0.4).unwrap();
        let got = canonicalize(&st.state()).unwrap();
        assert_eq!(got.permutation, vec![0, 1, 2]);
        for (x, y) in got.canonical.coefficients().iter().zip(st.coefficients()) {
            assert!((x - y).abs() < 1e-8, "{:?} vs {st:?}", got.canonical);
        }
        assert!((got.canonical.phi - st.phi).abs() < 1e-8);
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_unitary(&mut rng, 3);
        let id = &u * u.adjoint();
        assert!((id - DMatrix::<C64>::identity(3, 3)).norm() < 1e-12);
    }
}
