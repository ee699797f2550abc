//! Von Neumann entropy, the effective spin-chain model, and the entropy
//! bookkeeping of a measurement.
//!
//! The effective model replaces every apparatus packet by a spin: the branch
//! states become `⊗|+⟩` and `⊗|−⟩` on `2k+1` sites, and the collapsed state is
//! the mixture `|α|²ω⁺ + |β|²ω⁻`. Because the two branches are orthogonal the
//! mixture has rank two for every `k`, which is what makes the mean entropy
//! (entropy per site) of the collapsed state vanish as `k → ∞`.
//!
//! Entropies are in nats.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state_metrics::ReducedSpinMatrix;

pub const MAX_DIM: usize = 4096;
pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const NEGATIVE_EIGENVALUE_TOL: f64 = 1e-10;
/// Eigenvalues this close to 0 or 1 contribute nothing to `−Σ p ln p`.
pub const EIGENVALUE_FLOOR: f64 = 1e-14;
/// Largest `k` for which the dense `2^(2k+1)`-dimensional mixture is built.
pub const MAX_DENSE_K: u64 = 5;

/// Validated density matrix with its spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: DMatrix<Complex64>,
    eigenvalues: Vec<f64>,
}

impl DensityMatrix {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        let n = matrix.nrows();
        if matrix.ncols() != n {
            return Err(Error::DimensionMismatch(n, matrix.ncols()));
        }
        if n > MAX_DIM {
            return Err(Error::DimensionCap { dim: n, cap: MAX_DIM });
        }
        let mut herm: f64 = 0.0;
        let mut diagonal = true;
        for i in 0..n {
            for j in i..n {
                herm = herm.max((matrix[(i, j)] - matrix[(j, i)].conj()).norm());
                if i != j && (matrix[(i, j)] != Complex64::new(0.0, 0.0) || matrix[(j, i)] != Complex64::new(0.0, 0.0))
                {
                    diagonal = false;
                }
            }
        }
        if herm > HERMITIAN_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidTrace(trace));
        }
        let mut eigenvalues: Vec<f64> = if diagonal {
            (0..n).map(|i| matrix[(i, i)].re).collect()
        } else {
            matrix.clone().symmetric_eigenvalues().iter().copied().collect()
        };
        eigenvalues.sort_by(|a, b| a.total_cmp(b));
        if let Some(&min) = eigenvalues.first() {
            if min < -NEGATIVE_EIGENVALUE_TOL {
                return Err(Error::NegativeEigenvalue(min));
            }
        }
        Ok(DensityMatrix { matrix, eigenvalues })
    }

    pub fn from_diagonal(probabilities: &[f64]) -> Result<Self> {
        let diag = DVector::from_iterator(
            probabilities.len(),
            probabilities.iter().map(|&p| Complex64::new(p, 0.0)),
        );
        Self::new(DMatrix::from_diagonal(&diag))
    }

    /// `|ψ⟩⟨ψ|` for a normalized `ψ`.
    pub fn pure(state: &[Complex64]) -> Result<Self> {
        let n = state.len();
        Self::new(DMatrix::from_fn(n, n, |i, j| state[i] * state[j].conj()))
    }

    pub fn from_spin_matrix(rho: &ReducedSpinMatrix) -> Result<Self> {
        let e = rho.entries;
        Self::new(DMatrix::from_row_slice(2, 2, &[e[0][0], e[0][1], e[1][0], e[1][1]]))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `a·self + (1−a)·other`.
    pub fn mix(&self, other: &DensityMatrix, a: f64) -> Result<DensityMatrix> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        if !(0.0..=1.0).contains(&a) {
            return Err(Error::InvalidProbability(a));
        }
        let ca = Complex64::new(a, 0.0);
        let cb = Complex64::new(1.0 - a, 0.0);
        DensityMatrix::new(&self.matrix * ca + &other.matrix * cb)
    }
}

/// `−Σ p ln p` with the [`EIGENVALUE_FLOOR`] convention.
pub fn entropy_from_spectrum(eigenvalues: &[f64]) -> f64 {
    eigenvalues
        .iter()
        .filter(|&&p| p > EIGENVALUE_FLOOR && p < 1.0 - EIGENVALUE_FLOOR)
        .map(|&p| -p * p.ln())
        .sum()
}

pub fn binary_entropy(p: f64) -> f64 {
    entropy_from_spectrum(&[p, 1.0 - p])
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    entropy_from_spectrum(rho.eigenvalues())
}

pub fn spin_matrix_entropy(rho: &ReducedSpinMatrix) -> f64 {
    entropy_from_spectrum(&rho.eigenvalues())
}

/// `|α|²(P₊)^⊗(2k+1) + |β|²(P₋)^⊗(2k+1)`, held in its rank-two form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinChainMixture {
    alpha2: f64,
    k: u64,
}

impl SpinChainMixture {
    pub fn new(alpha2: f64, k: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha2) {
            return Err(Error::InvalidProbability(alpha2));
        }
        Ok(SpinChainMixture { alpha2, k })
    }

    pub fn alpha2(&self) -> f64 {
        self.alpha2
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn sites(&self) -> u64 {
        2 * self.k + 1
    }

    /// Nonzero spectrum `{|α|², |β|²}`; the branches are orthogonal for every `k`.
    pub fn spectrum(&self) -> [f64; 2] {
        [self.alpha2, 1.0 - self.alpha2]
    }

    pub fn entropy(&self) -> f64 {
        entropy_from_spectrum(&self.spectrum())
    }

    pub fn per_site_entropy(&self) -> f64 {
        self.entropy() / self.sites() as f64
    }

    /// Dense matrix on `2^(2k+1)` dimensions, built from explicit Kronecker
    /// products. Index 0 of each factor is `|+⟩`.
    pub fn dense(&self) -> Result<DensityMatrix> {
        if self.k > MAX_DENSE_K {
            return Err(Error::DimensionCap {
                dim: 1usize.checked_shl(self.sites().min(63) as u32).unwrap_or(usize::MAX),
                cap: MAX_DIM,
            });
        }
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let p_up = DMatrix::from_row_slice(2, 2, &[one, zero, zero, zero]);
        let p_down = DMatrix::from_row_slice(2, 2, &[zero, zero, zero, one]);
        let mut up = DMatrix::from_element(1, 1, one);
        let mut down = DMatrix::from_element(1, 1, one);
        for _ in 0..self.sites() {
            up = up.kronecker(&p_up);
            down = down.kronecker(&p_down);
        }
        DensityMatrix::new(up * Complex64::new(self.alpha2, 0.0) + down * Complex64::new(1.0 - self.alpha2, 0.0))
    }
}

pub fn mixture_density(alpha2: f64, k: u64) -> Result<SpinChainMixture> {
    SpinChainMixture::new(alpha2, k)
}

/// `S / volume`, checked against `0 <= s <= ln 2`.
pub fn mean_entropy(entropy: f64, volume: u64) -> Result<f64> {
    if volume < 1 {
        return Err(Error::InvalidConfig("volume must be >= 1".into()));
    }
    let s = entropy / volume as f64;
    let bound = std::f64::consts::LN_2;
    if !(s >= -1e-12 && s <= bound + 1e-12) {
        return Err(Error::EntropyOutOfBounds { value: s, bound });
    }
    Ok(s)
}

/// `S(aρ₁ + (1−a)ρ₂) − aS(ρ₁) − (1−a)S(ρ₂)`.
pub fn concavity_gap(rho1: &DensityMatrix, rho2: &DensityMatrix, a: f64) -> Result<f64> {
    let mixed = rho1.mix(rho2, a)?;
    Ok(von_neumann_entropy(&mixed) - a * von_neumann_entropy(rho1) - (1.0 - a) * von_neumann_entropy(rho2))
}

/// Concavity gap of mixing the two branch states of the `k`-chain with weight
/// `a`, from the rank-two spectra.
pub fn chain_concavity_gap(a: f64, k: u64) -> Result<f64> {
    let mixture = SpinChainMixture::new(a, k)?;
    let branch = entropy_from_spectrum(&[1.0]);
    Ok(mixture.entropy() - a * branch - (1.0 - a) * branch)
}

/// Entropy accounting for one measurement on the `k`-chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyLedger {
    pub alpha2: f64,
    pub sites: u64,
    /// Pure superposition before collapse.
    pub s_pre: f64,
    /// Collapsed mixture `|α|²ω⁺ + |β|²ω⁻`.
    pub s_post_mixture: f64,
    /// `|α|² S(ω⁺) + |β|² S(ω⁻)`.
    pub s_avg_outcomes: f64,
    pub s_pre_per_site: f64,
    pub s_post_mixture_per_site: f64,
    pub s_avg_outcomes_per_site: f64,
    /// `k → ∞` limit of the per-site post-collapse entropy.
    pub mean_entropy_limit: f64,
}

pub fn collapse_entropy_audit(alpha2: f64, k: u64) -> Result<EntropyLedger> {
    let mixture = SpinChainMixture::new(alpha2, k)?;
    let beta2 = 1.0 - alpha2;
    // α|+…+⟩ + β|−…−⟩ restricted to the span of the two orthogonal branch vectors
    let off = Complex64::new((alpha2 * beta2).sqrt(), 0.0);
    let pre = ReducedSpinMatrix {
        entries: [[Complex64::new(alpha2, 0.0), off], [off, Complex64::new(beta2, 0.0)]],
    };
    let s_pre = spin_matrix_entropy(&pre);
    let s_branch = entropy_from_spectrum(&[1.0]);
    let s_avg_outcomes = alpha2 * s_branch + beta2 * s_branch;
    let s_post_mixture = mixture.entropy();
    let n = mixture.sites() as f64;
    Ok(EntropyLedger {
        alpha2,
        sites: mixture.sites(),
        s_pre,
        s_post_mixture,
        s_avg_outcomes,
        s_pre_per_site: s_pre / n,
        s_post_mixture_per_site: s_post_mixture / n,
        s_avg_outcomes_per_site: s_avg_outcomes / n,
        mean_entropy_limit: 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProcessClass {
    Reversible,
    Irreversible,
    /// The mean entropy would decrease.
    Forbidden,
}

impl std::fmt::Display for ProcessClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ProcessClass::Reversible => "Reversible",
            ProcessClass::Irreversible => "Irreversible",
            ProcessClass::Forbidden => "Forbidden",
        };
        f.write_str(s)
    }
}

pub fn classify_process(s1: f64, s2: f64, tol: f64) -> ProcessClass {
    if (s1 - s2).abs() <= tol {
        ProcessClass::Reversible
    } else if s2 > s1 {
        ProcessClass::Irreversible
    } else {
        ProcessClass::Forbidden
    }
}
