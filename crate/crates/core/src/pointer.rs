//! Macroscopic pointer observables: the center of mass of the apparatus atoms
//! and the mean magnetization of the effective spin chain.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian_model::{GaussianPacket, SgConfig, Spin};

/// Tolerance for recognizing a readout as a `σ_z/2` eigenvalue.
pub const READOUT_TOL: f64 = 1e-9;

/// Apparatus size for characteristic-function evaluation; `Infinite` yields
/// the closed-form `k → ∞` limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApparatusSize {
    Finite(u64),
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointerReading {
    pub z_cm_mean: f64,
    pub variance: f64,
    pub spin: Spin,
}

/// `⟨exp(iρ z_CM)⟩` in branch `spin` at time `t`, with `z_CM` the mean
/// position of the `2k+1` atoms:
/// `exp(−ρ²σ₀²/(2(2k+1))) · exp(i·sign·ρλt)`.
pub fn characteristic(config: &SgConfig, rho: f64, spin: Spin, t: f64, size: ApparatusSize) -> Result<Complex64> {
    config.validate()?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::NegativeTime(t));
    }
    let phase = Complex64::from_polar(1.0, spin.sign() * rho * config.lambda() * t);
    Ok(match size {
        ApparatusSize::Infinite => phase,
        ApparatusSize::Finite(k) => {
            let n = (2 * k + 1) as f64;
            let s = rho * config.sigma0();
            phase * (-s * s / (2.0 * n)).exp()
        }
    })
}

/// [`characteristic`] at the configured apparatus size.
pub fn cm_characteristic(config: &SgConfig, rho: f64, spin: Spin, t: f64) -> Result<Complex64> {
    characteristic(config, rho, spin, t, ApparatusSize::Finite(config.k()))
}

/// `k → ∞` limit of [`cm_characteristic`], a pure phase.
pub fn cm_characteristic_limit(config: &SgConfig, rho: f64, spin: Spin, t: f64) -> Result<Complex64> {
    characteristic(config, rho, spin, t, ApparatusSize::Infinite)
}

/// `ln|χ(ρ)|`; stays finite where `|χ|` itself underflows.
pub fn cm_log_modulus(config: &SgConfig, rho: f64) -> f64 {
    let s = rho * config.sigma0();
    -s * s / (2.0 * config.sites() as f64)
}

/// Characteristic function of the center of mass for an arbitrary product of
/// Gaussian packets (one per atom).
pub fn product_characteristic(packets: &[GaussianPacket], rho: f64) -> Complex64 {
    let n = packets.len() as f64;
    let (phase, log_mod) = packets.iter().fold((0.0, 0.0), |(ph, lm), p| {
        let q = rho / n;
        (ph + q * p.center, lm - 0.5 * q * q * p.sigma * p.sigma)
    });
    Complex64::from_polar(log_mod.exp(), phase)
}

/// Mean and variance of `z_CM` at the measurement time.
pub fn cm_mean(config: &SgConfig, spin: Spin) -> PointerReading {
    PointerReading {
        z_cm_mean: spin.sign() * config.lambda() * config.time(),
        variance: config.sigma0() * config.sigma0() / config.sites() as f64,
        spin,
    }
}

/// `s_z = ⟨z_CM⟩ / (2λT)`.
pub fn spin_readout(z_cm_mean: f64, lambda: f64, time: f64) -> Result<f64> {
    if !(time > 0.0) {
        return Err(Error::ReadoutUndefined(format!(
            "T = {time}: instantaneous measurement excluded"
        )));
    }
    if !(lambda > 0.0) {
        return Err(Error::ReadoutUndefined(format!("lambda = {lambda} must be > 0")));
    }
    Ok(z_cm_mean / (2.0 * lambda * time))
}

/// `Some(±1/2)` when `s` is within [`READOUT_TOL`] of a spin eigenvalue.
pub fn as_spin_eigenvalue(s: f64) -> Option<f64> {
    [0.5, -0.5].into_iter().find(|v| (s - v).abs() <= READOUT_TOL)
}

/// Mean magnetization `(2k+1)⁻¹ Σ ⟨σ_z^i⟩` of the product state `⊗|±⟩`.
pub fn magnetization_pointer(spin: Spin, k: u64) -> f64 {
    let n = 2 * k + 1;
    // ⟨±|σ_z|±⟩ on each site
    let per_site = spin.sign();
    (n as f64 * per_site) / n as f64
}

/// Mean magnetization of the mixture `|α|²ω⁺ + |β|²ω⁻`.
pub fn mixture_magnetization(alpha2: f64, k: u64) -> f64 {
    alpha2 * magnetization_pointer(Spin::Up, k) + (1.0 - alpha2) * magnetization_pointer(Spin::Down, k)
}

/// Distance between the two branches' limiting characteristic values,
/// `|2 sin(ρλT)|`; nonzero means the limiting states are told apart by `z_CM`.
pub fn limit_separation(config: &SgConfig, rho: f64) -> Result<f64> {
    let t = config.time();
    let up = cm_characteristic_limit(config, rho, Spin::Up, t)?;
    let down = cm_characteristic_limit(config, rho, Spin::Down, t)?;
    Ok((up - down).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian_model::{decoherence_time, evolve};
    use crate::oracle::{discretize, finite_difference, finite_difference_complex, phase_expectation, Grid};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn cfg(sigma0: f64, lambda: f64, time: f64, k: u64) -> SgConfig {
        SgConfig::with_alpha2(lambda, sigma0, time, k, 0.5).unwrap()
    }

    #[test]
    fn characteristic_examples() {
        let config = cfg(1.0, 1.0, 2.0, 1);
        assert_eq!(
            cm_characteristic(&config, 0.0, Spin::Up, 2.0).unwrap(),
            Complex64::new(1.0, 0.0)
        );
        let chi = cm_characteristic(&config, 1.0, Spin::Up, 2.0).unwrap();
        let expected = Complex64::from_polar(0.846_481_724_890_614_1, 2.0);
        assert!((chi - expected).norm() < 1e-14);
        let lim = cm_characteristic_limit(&config, 1.0, Spin::Down, 2.0).unwrap();
        assert!((lim - Complex64::from_polar(1.0, -2.0)).norm() < 1e-15);
        let big = characteristic(&config, 1.0, Spin::Up, 2.0, ApparatusSize::Finite(1_000_000_000)).unwrap();
        assert!((big - Complex64::from_polar(1.0, 2.0)).norm() < 1e-9);
    }

    #[test]
    fn characteristic_matches_product_quadrature() {
        let config = cfg(1.0, 1.0, 2.0, 1);
        let (up, down) = evolve(&config, 2.0).unwrap();
        let grid = Grid::new(-16.0, 16.0, 1024).unwrap();
        for (branch, spin) in [(&up, Spin::Up), (&down, Spin::Down)] {
            let sites: Vec<_> = branch.packets.iter().map(|p| discretize(p, &grid).unwrap()).collect();
            for rho in [0.3, 1.0, 2.5] {
                let oracle = phase_expectation(&sites, rho);
                let analytic = cm_characteristic(&config, rho, spin, 2.0).unwrap();
                assert!(
                    (oracle - analytic).norm() <= 1e-6 * analytic.norm(),
                    "{rho}: {oracle} vs {analytic}"
                );
            }
        }
    }

    #[test]
    fn cm_mean_examples() {
        for k in [0, 1, 10, 1000] {
            let r = cm_mean(&cfg(1.0, 1.0, 2.0, k), Spin::Up);
            assert_eq!(r.z_cm_mean, 2.0);
            assert_eq!(r.variance * (2 * k + 1) as f64, 1.0);
        }
        assert_eq!(cm_mean(&cfg(1.0, 1.0, 0.0, 3), Spin::Down).z_cm_mean, 0.0);
    }

    #[test]
    fn finite_difference_recovers_mean() {
        let h = 1e-6;
        for (lambda, t, k) in [(1.0, 2.0, 1), (0.3, 7.0, 10), (2.0, 0.5, 1000)] {
            let config = cfg(1.0, lambda, t, k);
            for spin in [Spin::Up, Spin::Down] {
                let chi = |rho: f64| cm_characteristic(&config, rho, spin, t).unwrap();
                let d = finite_difference_complex(chi, 0.0, h);
                let z = (Complex64::new(0.0, -1.0) * d).re;
                let mean = cm_mean(&config, spin).z_cm_mean;
                assert!((z - mean).abs() <= 1e-6 * (1.0 + (lambda * t).abs()), "{z} vs {mean}");
            }
            let modulus = |rho: f64| cm_characteristic(&config, rho, Spin::Up, t).unwrap().norm();
            assert!(finite_difference(modulus, 0.0, 1e-4).abs() < 1e-10);
        }
    }

    #[test]
    fn readout_examples() {
        assert_eq!(spin_readout(3.0, 1.5, 1.0).unwrap(), 1.0);
        let base = cfg(1.0, 1.0, 1.0, 1);
        let t_d = decoherence_time(&base);
        for t in [t_d, 2.0 * t_d, 10.0 * t_d] {
            let config = base.with_time(t).unwrap();
            for (spin, expected) in [(Spin::Up, 0.5), (Spin::Down, -0.5)] {
                let s = spin_readout(cm_mean(&config, spin).z_cm_mean, 1.0, t).unwrap();
                assert_eq!(as_spin_eigenvalue(s), Some(expected));
            }
        }
        assert!(matches!(spin_readout(0.0, 1.0, 0.0), Err(Error::ReadoutUndefined(_))));
        assert_eq!(as_spin_eigenvalue(0.3), None);
    }

    #[test]
    fn magnetization_examples() {
        for k in [0, 1, 5, 1_000_000] {
            assert_eq!(magnetization_pointer(Spin::Up, k), 1.0);
            assert_eq!(magnetization_pointer(Spin::Down, k), -1.0);
        }
        assert_relative_eq!(mixture_magnetization(0.3, 4), 0.3 - 0.7, max_relative = 1e-15);
    }

    #[test]
    fn finitely_many_shifted_sites_leave_limit_unchanged() {
        let k = 10_000u64;
        let config = cfg(1.0, 1.0, 2.0, k);
        let n = (2 * k + 1) as usize;
        let rho = 1.3;
        let mut packets = vec![GaussianPacket::new(2.0, 1.0).unwrap(); n];
        let shifts = [0.7, -1.5, 2.0];
        for (i, s) in shifts.iter().enumerate() {
            packets[i * 17].center += s;
        }
        let unperturbed = cm_characteristic(&config, rho, Spin::Up, 2.0).unwrap();
        let perturbed = product_characteristic(&packets, rho);
        let max_shift = 2.0;
        let tol = 10.0 * 3.0 * max_shift / n as f64;
        assert!((perturbed - unperturbed).norm() <= tol);
        assert!((perturbed - unperturbed).norm() > 0.0);
    }

    #[test]
    fn limits_separate_branches() {
        let config = cfg(1.0, 1.0, 2.0, 1);
        assert!(limit_separation(&config, 0.5).unwrap() > 0.1);
        let rho = std::f64::consts::PI / 2.0;
        assert!(limit_separation(&config, rho).unwrap() < 1e-12);
    }

    proptest! {
        #[test]
        fn modulus_bounded_and_gaussian(rho in -50.0f64..50.0, k in 0u64..1_000_000, sigma0 in 0.01f64..10.0) {
            let config = cfg(sigma0, 1.0, 1.0, k);
            let chi = cm_characteristic(&config, rho, Spin::Up, 1.0).unwrap();
            prop_assert!(chi.norm() <= 1.0 + 1e-15);
            let lm = cm_log_modulus(&config, rho);
            let expected = -(rho * sigma0).powi(2) / (2.0 * (2 * k + 1) as f64);
            prop_assert!((lm - expected).abs() <= 1e-12 * (1.0 + expected.abs()));
        }

        #[test]
        fn variance_scaling(k in 0u64..=1_000_000, sigma0 in 0.1f64..10.0) {
            let r = cm_mean(&cfg(sigma0, 1.0, 1.0, k), Spin::Down);
            prop_assert!((r.variance * (2 * k + 1) as f64 - sigma0 * sigma0).abs() <= 1e-12 * sigma0 * sigma0);
        }
    }
}
