//! Pure states and density matrices of `n` qudits.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::TOLERANCES;
use crate::error::{Error, Result};
use crate::scenario::Scenario;

pub type C64 = Complex64;

/// Local dimension and party count of a state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub n: usize,
    pub d: usize,
}

impl Dims {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        if n == 0 || d < 2 {
            return Err(Error::InvalidState(format!("need n ≥ 1 and d ≥ 2, got n={n}, d={d}")));
        }
        let dim = d.checked_pow(n as u32).unwrap_or(usize::MAX);
        if dim > TOLERANCES.dimension_cap {
            return Err(Error::DimensionOverflow {
                dim,
                cap: TOLERANCES.dimension_cap,
            });
        }
        Ok(Dims { n, d })
    }

    pub fn dim(&self) -> usize {
        self.d.pow(self.n as u32)
    }

    pub fn matches(&self, s: &Scenario) -> bool {
        self.n == s.n && self.d == s.d
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PureState {
    #[serde(rename = "scenario")]
    pub dims: Dims,
    #[serde(rename = "data")]
    amplitudes: Vec<C64>,
}

impl PureState {
    pub fn new(dims: Dims, amplitudes: Vec<C64>) -> Result<Self> {
        let dims = Dims::new(dims.n, dims.d)?;
        if amplitudes.len() != dims.dim() {
            return Err(Error::DimensionMismatch(format!(
                "state of {} qudits (d={}) needs {} amplitudes, got {}",
                dims.n,
                dims.d,
                dims.dim(),
                amplitudes.len()
            )));
        }
        let norm: f64 = amplitudes.iter().map(|c| c.norm_sqr()).sum();
        if (norm - 1.0).abs() > TOLERANCES.state_norm {
            return Err(Error::InvalidState(format!("‖ψ‖² = {norm}, expected 1")));
        }
        Ok(PureState { dims, amplitudes })
    }

    /// Normalizes `amplitudes` before wrapping.
    pub fn normalized(dims: Dims, mut amplitudes: Vec<C64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        amplitudes.iter_mut().for_each(|c| *c /= norm);
        Self::new(dims, amplitudes)
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn density_matrix(&self) -> DensityMatrix {
        let dim = self.dim();
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                entries.push(self.amplitudes[i] * self.amplitudes[j].conj());
            }
        }
        DensityMatrix {
            dims: self.dims,
            entries,
        }
    }

    /// Amplitude vector after reordering parties: party `k` of the result is
    /// party `perm[k]` of `self`.
    pub fn permute_parties(&self, perm: &[usize]) -> Result<PureState> {
        let Dims { n, d } = self.dims;
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::OutOfRange(format!("{perm:?} is not a permutation of {n} parties")));
        }
        let mut out = vec![C64::new(0.0, 0.0); self.dim()];
        for (i, amp) in self.amplitudes.iter().enumerate() {
            let digits = crate::scenario::index_to_digits(i, d, n);
            let moved: Vec<usize> = perm.iter().map(|&p| digits[p]).collect();
            out[crate::scenario::digits_to_index(&moved, d)] = *amp;
        }
        Ok(PureState {
            dims: self.dims,
            amplitudes: out,
        })
    }

    /// Applies the product `⊗_k U_k` of local operators.
    pub fn apply_local_unitaries(&self, unitaries: &[DMatrix<C64>]) -> Result<PureState> {
        if unitaries.len() != self.dims.n {
            return Err(Error::DimensionMismatch(format!(
                "{} local operators for {} parties",
                unitaries.len(),
                self.dims.n
            )));
        }
        let mut v = self.amplitudes.clone();
        for (k, u) in unitaries.iter().enumerate() {
            apply_local(&mut v, self.dims, k, u)?;
        }
        PureState::normalized(self.dims, v)
    }
}

/// `|GHZ_{n,d}⟩ = d^{-1/2} Σ_i |i⟩^{⊗n}`.
pub fn ghz_state(n: usize, d: usize) -> Result<PureState> {
    if n < 2 {
        return Err(Error::InvalidState(format!("GHZ state needs n ≥ 2, got {n}")));
    }
    let dims = Dims::new(n, d)?;
    let mut amps = vec![C64::new(0.0, 0.0); dims.dim()];
    let amp = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    // |i…i⟩ has index i·(1 + d + … + d^{n−1}).
    let step: usize = (0..n).map(|k| d.pow(k as u32)).sum();
    for i in 0..d {
        amps[i * step] = amp;
    }
    PureState::new(dims, amps)
}

/// Multiplies party `party` of the vector `v` by the `d×d` operator `op`.
pub fn apply_local(v: &mut [C64], dims: Dims, party: usize, op: &DMatrix<C64>) -> Result<()> {
    let d = dims.d;
    if op.nrows() != d || op.ncols() != d || party >= dims.n || v.len() != dims.dim() {
        return Err(Error::DimensionMismatch(format!(
            "cannot apply a {}×{} operator to party {party} of a ({}, d={}) system",
            op.nrows(),
            op.ncols(),
            dims.n,
            d
        )));
    }
    let stride = d.pow((dims.n - 1 - party) as u32);
    let block = stride * d;
    let mut buf = vec![C64::new(0.0, 0.0); d];
    for base in (0..v.len()).step_by(block) {
        for offset in 0..stride {
            for (i, slot) in buf.iter_mut().enumerate() {
                *slot = (0..d)
                    .map(|j| op[(i, j)] * v[base + offset + j * stride])
                    .sum();
            }
            for (i, val) in buf.iter().enumerate() {
                v[base + offset + i * stride] = *val;
            }
        }
    }
    Ok(())
}

/// Density matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    #[serde(rename = "scenario")]
    pub dims: Dims,
    #[serde(rename = "data")]
    entries: Vec<C64>,
}

/// `ρ = w·𝟙 + Σ_i λ_i |v_i⟩⟨v_i|`, with `w` the smallest eigenvalue and
/// only the eigenvectors whose eigenvalue exceeds it kept.
#[derive(Debug, Clone)]
pub struct SpectralForm {
    pub dims: Dims,
    pub identity_weight: f64,
    pub components: Vec<(f64, Vec<C64>)>,
}

impl DensityMatrix {
    pub fn new(dims: Dims, entries: Vec<C64>) -> Result<Self> {
        let dims = Dims::new(dims.n, dims.d)?;
        let dim = dims.dim();
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "density matrix of dimension {dim} needs {} entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        let rho = DensityMatrix { dims, entries };
        rho.validate()?;
        Ok(rho)
    }

    pub fn maximally_mixed(dims: Dims) -> Self {
        let dim = dims.dim();
        let mut entries = vec![C64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = C64::new(1.0 / dim as f64, 0.0);
        }
        DensityMatrix { dims, entries }
    }

    pub fn dim(&self) -> usize {
        self.dims.dim()
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> C64 {
        self.entries[i * self.dim() + j]
    }

    pub fn matrix(&self) -> DMatrix<C64> {
        let dim = self.dim();
        DMatrix::from_row_slice(dim, dim, &self.entries)
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.at(i, i)).sum()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.matrix().symmetric_eigenvalues().iter().cloned().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Hermitian, unit trace, positive semidefinite.
    pub fn validate(&self) -> Result<()> {
        let tol = TOLERANCES;
        let dim = self.dim();
        for i in 0..dim {
            for j in i..dim {
                if (self.at(i, j) - self.at(j, i).conj()).norm() > tol.hermitian {
                    return Err(Error::InvalidState(format!(
                        "density matrix is not Hermitian at ({i},{j})"
                    )));
                }
            }
        }
        let tr = self.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > tol.hermitian {
            return Err(Error::InvalidState(format!("trace {tr} ≠ 1")));
        }
        let min = self.eigenvalues()[0];
        if min < -tol.eigenvalue {
            return Err(Error::InvalidState(format!("negative eigenvalue {min}")));
        }
        Ok(())
    }

    pub fn spectral_form(&self) -> SpectralForm {
        let eig = self.matrix().symmetric_eigen();
        let vals: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
        let floor = vals.iter().cloned().fold(f64::INFINITY, f64::min).max(0.0);
        let mut components = Vec::new();
        for (i, &lambda) in vals.iter().enumerate() {
            let w = lambda - floor;
            if w > 1e-13 {
                let v: Vec<C64> = eig.eigenvectors.column(i).iter().cloned().collect();
                components.push((w, v));
            }
        }
        SpectralForm {
            dims: self.dims,
            identity_weight: floor,
            components,
        }
    }
}

impl From<&PureState> for DensityMatrix {
    fn from(psi: &PureState) -> Self {
        psi.density_matrix()
    }
}

impl SpectralForm {
    pub fn pure(psi: &PureState) -> Self {
        SpectralForm {
            dims: psi.dims,
            identity_weight: 0.0,
            components: vec![(1.0, psi.amplitudes().to_vec())],
        }
    }

    /// Mixes in white noise without diagonalizing: `(1−q)·self + q·𝟙/dim`.
    pub fn with_white_noise(mut self, q: f64) -> Self {
        let dim = self.dims.dim() as f64;
        self.identity_weight = (1.0 - q) * self.identity_weight + q / dim;
        for (w, _) in &mut self.components {
            *w *= 1.0 - q;
        }
        self
    }
}

/// `(1−q)·ρ + q·𝟙/dim`.
pub fn mix_white_noise(rho: &DensityMatrix, q: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::OutOfRange(format!("noise weight q = {q} outside [0,1]")));
    }
    let dim = rho.dim();
    let mut entries: Vec<C64> = rho.entries.iter().map(|c| c * (1.0 - q)).collect();
    for i in 0..dim {
        entries[i * dim + i] += C64::new(q / dim as f64, 0.0);
    }
    Ok(DensityMatrix {
        dims: rho.dims,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn ghz_three_qubits() {
        let g = ghz_state(3, 2).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for (i, a) in g.amplitudes().iter().enumerate() {
            let want = if i == 0 || i == 7 { h } else { 0.0 };
            assert!((a - c(want)).norm() < 1e-15);
        }
    }

    #[test]
    fn ghz_qutrits_have_three_equal_amplitudes() {
        let g = ghz_state(3, 3).unwrap();
        let nz: Vec<usize> = (0..27).filter(|&i| g.amplitudes()[i].norm() > 0.0).collect();
        assert_eq!(nz, vec![0, 13, 26]);
        for i in nz {
            assert!((g.amplitudes()[i].re - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn bell_state_marginal_is_maximally_mixed() {
        let g = ghz_state(2, 2).unwrap();
        let rho = g.density_matrix();
        // ρ_A[i][j] = Σ_k ρ[(i,k),(j,k)]
        for i in 0..2 {
            for j in 0..2 {
                let v: C64 = (0..2).map(|k| rho.at(2 * i + k, 2 * j + k)).sum();
                let want = if i == j { 0.5 } else { 0.0 };
                assert!((v - c(want)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn ghz_dimension_cap_and_preconditions() {
        assert!(matches!(ghz_state(11, 3), Err(Error::DimensionOverflow { .. })));
        assert!(ghz_state(10, 3).is_ok());
        assert!(ghz_state(1, 2).is_err());
        assert!(ghz_state(3, 1).is_err());
    }

    #[test]
    fn white_noise_endpoints() {
        let rho = ghz_state(3, 2).unwrap().density_matrix();
        assert_eq!(mix_white_noise(&rho, 0.0).unwrap(), rho);
        let mixed = mix_white_noise(&rho, 1.0).unwrap();
        assert_eq!(mixed, DensityMatrix::maximally_mixed(rho.dims));
        let half = mix_white_noise(&rho, 0.5).unwrap();
        assert!(half.validate().is_ok());
        assert!(mix_white_noise(&rho, 1.5).is_err());
        assert!(mix_white_noise(&rho, -0.1).is_err());
    }

    #[test]
    fn spectral_form_of_noisy_ghz_has_one_component() {
        let psi = ghz_state(3, 2).unwrap();
        let rho = mix_white_noise(&psi.density_matrix(), 0.2).unwrap();
        let sf = rho.spectral_form();
        assert_eq!(sf.components.len(), 1);
        assert!((sf.identity_weight - 0.2 / 8.0).abs() < 1e-12);
        assert!((sf.components[0].0 - 0.8).abs() < 1e-12);
    }

    #[test]
    fn invalid_density_matrices_are_rejected() {
        let dims = Dims::new(1, 2).unwrap();
        let nonherm = vec![c(0.5), c(0.3), c(0.0), c(0.5)];
        assert!(DensityMatrix::new(dims, nonherm).is_err());
        let negative = vec![c(1.5), c(0.0), c(0.0), c(-0.5)];
        assert!(DensityMatrix::new(dims, negative).is_err());
        let trace2 = vec![c(1.0), c(0.0), c(0.0), c(1.0)];
        assert!(DensityMatrix::new(dims, trace2).is_err());
    }

    #[test]
    fn apply_local_flips_one_party() {
        let dims = Dims::new(3, 2).unwrap();
        let mut v = vec![c(0.0); 8];
        v[0] = c(1.0);
        let x = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        apply_local(&mut v, dims, 1, &x).unwrap();
        assert_eq!(v[2], c(1.0)); // |010⟩
    }
}
