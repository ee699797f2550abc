//! Distances, transition probabilities, collapse and disjointness at finite `k`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian_model::{branch_overlap, per_site_log_overlap, LogOverlap, SgConfig};

/// Successive transition-probability estimates closer than this count as converged.
pub const CAUCHY_TOL: f64 = 1e-10;
/// Number of trailing entries inspected by the Cauchy criterion.
pub const CAUCHY_WINDOW: usize = 3;

/// 2×2 spin density matrix in the `(|+⟩, |−⟩)` basis after tracing out the apparatus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedSpinMatrix {
    pub entries: [[Complex64; 2]; 2],
}

impl ReducedSpinMatrix {
    pub fn diagonal(p_up: f64, p_down: f64) -> Self {
        let z = Complex64::new(0.0, 0.0);
        ReducedSpinMatrix {
            entries: [[Complex64::new(p_up, 0.0), z], [z, Complex64::new(p_down, 0.0)]],
        }
    }

    pub fn off_diagonal(&self) -> Complex64 {
        self.entries[0][1]
    }

    pub fn trace(&self) -> f64 {
        self.entries[0][0].re + self.entries[1][1].re
    }

    /// Eigenvalues in ascending order, from the 2×2 characteristic polynomial.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let a = self.entries[0][0].re;
        let d = self.entries[1][1].re;
        let half_gap = 0.5 * (a - d);
        let r = half_gap.hypot(self.entries[0][1].norm());
        let mean = 0.5 * (a + d);
        [mean - r, mean + r]
    }

    pub fn is_valid(&self, tol: f64) -> bool {
        let herm = (self.entries[0][1] - self.entries[1][0].conj()).norm()
            + self.entries[0][0].im.abs()
            + self.entries[1][1].im.abs();
        let [lo, _] = self.eigenvalues();
        herm <= tol && (self.trace() - 1.0).abs() <= tol && lo >= -tol
    }
}

/// Fidelity `F = |⟨x,y⟩|²` (as `ln F`) together with the trace-norm distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityRecord {
    pub log_fidelity: f64,
    pub norm_distance: f64,
}

impl FidelityRecord {
    pub fn from_overlap(overlap: &LogOverlap) -> Self {
        FidelityRecord {
            log_fidelity: overlap.log_fidelity(),
            norm_distance: norm_distance(overlap),
        }
    }

    pub fn fidelity(&self) -> f64 {
        self.log_fidelity.exp()
    }
}

/// `‖ω_x − ω_y‖ = 2√(1 − F)` for unit vectors.
///
/// `1 − F` is taken as `-expm1(ln F)`, which is accurate both when the states
/// nearly coincide and when `F` underflows.
pub fn norm_distance(overlap: &LogOverlap) -> f64 {
    let log_f = overlap.log_fidelity().min(0.0);
    2.0 * (-log_f.exp_m1()).sqrt()
}

/// Limit estimate of `1 − d_k²/4` over increasing `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionEstimate {
    pub value: f64,
    pub converged: bool,
}

/// Estimates the transition probability from a sequence of fidelity records
/// indexed by increasing `k`. The estimate is the last entry; it is flagged as
/// converged when the last three entries differ pairwise by less than
/// [`CAUCHY_TOL`]. Oscillating or short sequences are reported unconverged.
pub fn transition_probability(records: &[FidelityRecord]) -> Result<TransitionEstimate> {
    let last = records.last().ok_or(Error::EmptySequence)?;
    let converged = records.len() >= CAUCHY_WINDOW
        && records[records.len() - CAUCHY_WINDOW..]
            .windows(2)
            .all(|w| (w[1].fidelity() - w[0].fidelity()).abs() < CAUCHY_TOL);
    Ok(TransitionEstimate {
        value: last.fidelity(),
        converged,
    })
}

/// Spin density matrix at time `t`: diagonal `(|α|², |β|²)`, off-diagonal
/// `αβ̄⟨Ψ⁻,Ψ⁺⟩`.
pub fn reduced_spin_density(config: &SgConfig, t: f64) -> Result<ReducedSpinMatrix> {
    let gamma = branch_overlap(config, t)?.value();
    let off = config.alpha() * config.beta().conj() * gamma;
    Ok(ReducedSpinMatrix {
        entries: [
            [Complex64::new(config.alpha2(), 0.0), off],
            [off.conj(), Complex64::new(config.beta2(), 0.0)],
        ],
    })
}

/// Drops the interference terms.
pub fn collapse(rho: &ReducedSpinMatrix) -> ReducedSpinMatrix {
    ReducedSpinMatrix::diagonal(rho.entries[0][0].re, rho.entries[1][1].re)
}

/// `ln` of [`local_discrepancy_bound`]; `-∞` when the bound is exactly zero.
pub fn local_discrepancy_log_bound(config: &SgConfig, support_sites: u64, op_norm: f64) -> Result<f64> {
    let sites = config.sites();
    if support_sites > sites {
        return Err(Error::SupportTooLarge {
            support: support_sites,
            sites,
        });
    }
    if !(op_norm >= 0.0) {
        return Err(Error::InvalidConfig(format!("operator norm {op_norm} < 0")));
    }
    let log_g = per_site_log_overlap(config, config.time())?;
    let prefactor = 2.0 * config.alpha().norm() * config.beta().norm() * op_norm;
    if prefactor == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let untouched = (sites - support_sites) as f64;
    let decay = if untouched == 0.0 { 0.0 } else { untouched * log_g };
    Ok(prefactor.ln() + decay)
}

/// Upper bound `2|α||β|·‖A‖·g^(2k+1−s)` on `|tr(Aρ) − tr(Aρ̂)|` for an
/// observable of norm `‖A‖` acting on `s` apparatus sites, `g` the per-site
/// overlap at the measurement time.
pub fn local_discrepancy_bound(config: &SgConfig, support_sites: u64, op_norm: f64) -> Result<f64> {
    local_discrepancy_log_bound(config, support_sites, op_norm).map(f64::exp)
}

/// How the per-site deficits `|⟨x_i,y_i⟩ − 1|` continue past the supplied terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailModel {
    /// Every later site repeats the last supplied overlap.
    Constant,
    /// Later deficits decay like `i^(-exponent)`.
    PowerLaw { exponent: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Disjointness {
    Disjoint,
    Equivalent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisjointnessReport {
    pub verdict: Disjointness,
    /// `Σ |⟨x_i,y_i⟩ − 1|` over the supplied terms.
    pub partial_sum: f64,
    /// Smallest supplied deficit.
    pub min_deficit: f64,
}

/// Decides equivalence of two product families from their per-site overlaps:
/// the families are equivalent iff `Σ |⟨x_i,y_i⟩ − 1|` converges.
pub fn disjointness_test(per_site_overlaps: &[f64], tail: TailModel) -> Result<DisjointnessReport> {
    if per_site_overlaps.is_empty() {
        return Err(Error::EmptySequence);
    }
    if let Some(&bad) = per_site_overlaps.iter().find(|&&o| !(o > 0.0 && o <= 1.0)) {
        return Err(Error::OverlapOutOfRange(bad));
    }
    let deficits = per_site_overlaps.iter().map(|o| 1.0 - o);
    let partial_sum = deficits.clone().sum();
    let min_deficit = deficits.fold(f64::INFINITY, f64::min);
    let last = 1.0 - per_site_overlaps[per_site_overlaps.len() - 1];
    let divergent = match tail {
        TailModel::Constant => last > 0.0,
        TailModel::PowerLaw { exponent } => last > 0.0 && exponent <= 1.0,
    };
    Ok(DisjointnessReport {
        verdict: if divergent {
            Disjointness::Disjoint
        } else {
            Disjointness::Equivalent
        },
        partial_sum,
        min_deficit,
    })
}

/// Per-site deficit `1 − exp(−λ²t_D²/(2σ₀²))` at the decoherence time, a lower
/// bound on every site's deficit once `T >= t_D`.
pub fn deficit_at_decoherence(config: &SgConfig) -> f64 {
    let t_d = crate::gaussian_model::decoherence_time(config);
    let x = config.lambda() * t_d / config.sigma0();
    -(-0.5 * x * x).exp_m1()
}

/// The quadratic lower bound `λ²t_D²/(8σ₀²)` for the same deficit. It only
/// holds while `λ²t_D²/(2σ₀²) ≲ 3.92`; at `t_D = 3σ₀/λ` it evaluates to 9/8
/// and exceeds [`deficit_at_decoherence`].
pub fn quadratic_deficit_bound(config: &SgConfig) -> f64 {
    let t_d = crate::gaussian_model::decoherence_time(config);
    let x = config.lambda() * t_d / config.sigma0();
    x * x / 8.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian_model::decoherence_time;
    use crate::oracle::{
        tensor_observable_check, trace_norm_distance, unit_vectors_with_overlap, PhaseFactor, ProductObservable,
    };
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg(time: f64, k: u64, alpha2: f64) -> SgConfig {
        SgConfig::with_alpha2(1.0, 1.0, time, k, alpha2).unwrap()
    }

    fn binary_entropy(p: f64) -> f64 {
        [p, 1.0 - p].iter().filter(|&&x| x > 0.0).map(|x| -x * x.ln()).sum()
    }

    #[test]
    fn norm_distance_examples() {
        assert_eq!(norm_distance(&LogOverlap::new(f64::NEG_INFINITY, 0.0)), 2.0);
        assert_eq!(norm_distance(&LogOverlap::new(0.0, 0.0)), 0.0);
        // F = e^{-1}; oracle diagonalizes |x⟩⟨x| − |y⟩⟨y|
        let d = norm_distance(&LogOverlap::new(-0.5, 0.0));
        assert_relative_eq!(d, 1.590_120_195_241_300_2, max_relative = 1e-14);
        let (x, y) = unit_vectors_with_overlap(Complex64::new((-0.5f64).exp(), 0.0));
        assert_relative_eq!(d, trace_norm_distance(&x, &y), max_relative = 1e-9);
        // tiny separations keep full relative accuracy: 2√(2ε) for ln|⟨x,y⟩| = -ε
        let eps = 1e-20;
        assert_relative_eq!(
            norm_distance(&LogOverlap::new(-eps, 0.0)),
            2.0 * (2.0 * eps).sqrt(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn transition_probability_examples() {
        assert_eq!(transition_probability(&[]), Err(Error::EmptySequence));

        let config = cfg(0.0, 1, 0.5);
        let t_d = decoherence_time(&config);
        let records: Vec<_> = (1..=64)
            .map(|k| FidelityRecord::from_overlap(&branch_overlap(&config.with_k(k).unwrap(), t_d).unwrap()))
            .collect();
        let est = transition_probability(&records).unwrap();
        assert!(est.value.abs() < 1e-10 && est.converged);

        let ones = vec![FidelityRecord::from_overlap(&LogOverlap::new(0.0, 0.0)); 5];
        let est = transition_probability(&ones).unwrap();
        assert_eq!(est.value, 1.0);
        assert!(est.converged);

        // T(k) = c/√(2k+1): limit exp(−λ²c²/σ₀²)
        let c = 0.8;
        let records: Vec<_> = (1..=200)
            .map(|k| {
                let t = c / ((2 * k + 1) as f64).sqrt();
                FidelityRecord::from_overlap(&branch_overlap(&config.with_k(k).unwrap(), t).unwrap())
            })
            .collect();
        let est = transition_probability(&records).unwrap();
        assert!(est.converged);
        assert_relative_eq!(est.value, (-c * c).exp(), max_relative = 1e-12);

        let oscillating: Vec<_> = (0..10)
            .map(|i| FidelityRecord::from_overlap(&LogOverlap::new(if i % 2 == 0 { -0.1 } else { -0.2 }, 0.0)))
            .collect();
        assert!(!transition_probability(&oscillating).unwrap().converged);
        assert!(!transition_probability(&ones[..2]).unwrap().converged);
    }

    #[test]
    fn reduced_density_examples() {
        let rho = reduced_spin_density(&cfg(0.0, 1, 0.5), 0.0).unwrap();
        let [lo, hi] = rho.eigenvalues();
        assert!(lo.abs() < 1e-15 && (hi - 1.0).abs() < 1e-15);

        let rho = reduced_spin_density(&cfg(1.0, 1, 0.5), 1.0).unwrap();
        assert_relative_eq!(rho.off_diagonal().re, 0.111_565_080_074_214_91, max_relative = 1e-12);
        assert!(rho.is_valid(1e-12));

        let config = cfg(3.0, 200, 0.3);
        let rho = reduced_spin_density(&config, 3.0).unwrap();
        assert_eq!(rho.off_diagonal().norm(), 0.0);
        assert_eq!(rho, collapse(&rho));
    }

    #[test]
    fn reduced_density_off_diagonal_matches_oracle() {
        // ⟨+,Ψ⁺| (|+⟩⟨−| ⊗ 1) |−,Ψ⁻⟩ picks out conj(α)β⟨Ψ⁺,Ψ⁻⟩ = conj(ρ₊₋)
        let config = cfg(1.0, 1, 0.5);
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let obs = ProductObservable {
            spin: [[zero, one], [zero, zero]],
            factors: vec![],
        };
        let check = tensor_observable_check(&config, &obs, 1024).unwrap();
        let rho = reduced_spin_density(&config, 1.0).unwrap();
        assert_relative_eq!(check.full.re, rho.entries[1][0].re, max_relative = 1e-6);
    }

    #[test]
    fn collapse_examples() {
        let diag = ReducedSpinMatrix::diagonal(0.3, 0.7);
        assert_eq!(collapse(&diag), diag);
        let rho = reduced_spin_density(&cfg(0.0, 1, 0.5), 0.0).unwrap();
        let c = collapse(&rho);
        assert_eq!(c.off_diagonal(), Complex64::new(0.0, 0.0));
        assert_relative_eq!(c.entries[0][0].re, 0.5, max_relative = 1e-15);
        assert_relative_eq!(c.entries[1][1].re, 0.5, max_relative = 1e-15);
        assert_eq!(collapse(&c), c);
        assert!(c.is_valid(1e-12));
        assert_relative_eq!(
            binary_entropy(c.eigenvalues()[0]),
            std::f64::consts::LN_2,
            max_relative = 1e-12
        );
    }

    #[test]
    fn discrepancy_bound_examples() {
        let config = cfg(1.0, 1, 0.5);
        assert_relative_eq!(
            local_discrepancy_bound(&config, 3, 1.0).unwrap(),
            1.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            local_discrepancy_bound(&config, 1, 1.0).unwrap(),
            (-1.0f64).exp(),
            max_relative = 1e-14
        );
        assert!(matches!(
            local_discrepancy_bound(&config, 4, 1.0),
            Err(Error::SupportTooLarge { .. })
        ));
        assert_eq!(local_discrepancy_bound(&cfg(1.0, 1, 1.0), 1, 1.0).unwrap(), 0.0);

        let mut prev = f64::INFINITY;
        for k in [1, 10, 100, 1000] {
            let b = local_discrepancy_log_bound(&cfg(3.0, k, 0.5), 1, 1.0).unwrap();
            assert!(b < prev);
            prev = b;
        }
        assert_eq!(prev.exp(), 0.0);
    }

    #[test]
    fn discrepancy_bound_holds_on_oracle_tensors() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let config = cfg(1.0, 1, 0.5);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let obs = random_single_site_observable(&mut rng, 3);
            let check = tensor_observable_check(&config, &obs, 512).unwrap();
            assert!(check.holds(), "{check:?}");
            worst = worst.max(check.discrepancy / check.bound);
        }
        assert!(worst > 0.1, "bound never approached: {worst}");
    }

    pub(crate) fn random_single_site_observable(rng: &mut ChaCha8Rng, sites: usize) -> ProductObservable {
        let mut c = || Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let spin = [[c(), c()], [c(), c()]];
        ProductObservable {
            spin,
            factors: vec![(
                rng.gen_range(0..sites),
                PhaseFactor {
                    wavenumber: rng.gen_range(-3.0..3.0),
                    offset: rng.gen_range(0.0..std::f64::consts::TAU),
                },
            )],
        }
    }

    #[test]
    fn disjointness_examples() {
        let half = (-0.5f64).exp();
        let r = disjointness_test(&[half; 10], TailModel::Constant).unwrap();
        assert_eq!(r.verdict, Disjointness::Disjoint);
        assert_relative_eq!(r.partial_sum, 10.0 * (1.0 - half), max_relative = 1e-12);

        let r = disjointness_test(&[1.0; 10], TailModel::Constant).unwrap();
        assert_eq!(r.verdict, Disjointness::Equivalent);
        assert_eq!(r.partial_sum, 0.0);

        let tail: Vec<f64> = (1..=1000)
            .map(|i| 1.0 - 1.0 / ((i * i) as f64))
            .filter(|&o| o > 0.0)
            .collect();
        let r = disjointness_test(&tail, TailModel::PowerLaw { exponent: 2.0 }).unwrap();
        assert_eq!(r.verdict, Disjointness::Equivalent);
        assert!(r.partial_sum < std::f64::consts::PI.powi(2) / 6.0);
        let r = disjointness_test(&tail, TailModel::PowerLaw { exponent: 1.0 }).unwrap();
        assert_eq!(r.verdict, Disjointness::Disjoint);

        assert_eq!(disjointness_test(&[], TailModel::Constant), Err(Error::EmptySequence));
        assert_eq!(
            disjointness_test(&[0.5, 1.5], TailModel::Constant),
            Err(Error::OverlapOutOfRange(1.5))
        );
        assert_eq!(
            disjointness_test(&[0.0], TailModel::Constant),
            Err(Error::OverlapOutOfRange(0.0))
        );
    }

    #[test]
    fn deficit_bounds() {
        let config = cfg(3.0, 1, 0.5);
        let deficit = deficit_at_decoherence(&config);
        assert_relative_eq!(deficit, 1.0 - (-4.5f64).exp(), max_relative = 1e-14);
        assert_relative_eq!(quadratic_deficit_bound(&config), 9.0 / 8.0, max_relative = 1e-14);
        let g = per_site_log_overlap(&config, 3.0).unwrap().exp();
        assert!(1.0 - g >= deficit - 1e-15);
    }

    proptest! {
        #[test]
        fn fidelity_distance_duality(log_mag in -800.0f64..0.0) {
            let rec = FidelityRecord::from_overlap(&LogOverlap::new(log_mag, 0.0));
            prop_assert!((rec.fidelity() + rec.norm_distance.powi(2) / 4.0 - 1.0).abs() <= 1e-12);
            prop_assert!((0.0..=2.0).contains(&rec.norm_distance));
        }

        #[test]
        fn distance_monotone_in_fidelity(a in -50.0f64..0.0, b in -50.0f64..0.0) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(norm_distance(&LogOverlap::new(lo, 0.0)) >= norm_distance(&LogOverlap::new(hi, 0.0)));
        }

        #[test]
        fn reduced_density_is_valid_and_decays(t in 0.0f64..3.0, dt in 0.0f64..1.0, k in 0u64..50, alpha2 in 0.0f64..=1.0) {
            let rho = reduced_spin_density(&cfg(t, k, alpha2), t).unwrap();
            prop_assert!(rho.is_valid(1e-12));
            let [lo, hi] = rho.eigenvalues();
            prop_assert!(lo >= -1e-12 && hi <= 1.0 + 1e-12);
            let later = reduced_spin_density(&cfg(t, k, alpha2), t + dt).unwrap();
            let bigger = reduced_spin_density(&cfg(t, k + 1, alpha2), t).unwrap();
            prop_assert!(later.off_diagonal().norm() <= rho.off_diagonal().norm());
            prop_assert!(bigger.off_diagonal().norm() <= rho.off_diagonal().norm());
            let off = rho.off_diagonal().norm();
            prop_assert!(off <= (rho.entries[0][0].re * rho.entries[1][1].re).sqrt() + 1e-15);
        }
    }
}
