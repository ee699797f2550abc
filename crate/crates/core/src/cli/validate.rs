//! Every closed form against its brute-force oracle, as one report.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::table::{Cell, Table};
use crate::error::Result;
use crate::gaussian_model::{branch_overlap, per_site_overlap, GaussianPacket, LogOverlap, SgConfig, Spin};
use crate::oracle::{
    discretize, entropy_by_resolvent_quadrature, finite_difference_complex, inner_product, phase_expectation, sample,
    tensor_observable_check, tensor_observable_dense, trace_norm_distance, translate, unit_vectors_with_overlap, Grid,
    PhaseFactor, ProductObservable,
};
use crate::pointer::{cm_characteristic, cm_mean, spin_readout};
use crate::spin_entropy::{
    binary_entropy, collapse_entropy_audit, concavity_gap, mixture_density, von_neumann_entropy, DensityMatrix,
    MAX_DENSE_K,
};
use crate::state_metrics::{reduced_spin_density, FidelityRecord};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ValidateOptions {
    /// Relative error injected into σ₀ on the analytic side only.
    pub sigma0_perturbation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub metric: &'static str,
    pub max_error: f64,
    pub tolerance: f64,
    pub comparisons: usize,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.max_error <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&["check", "metric", "max_error", "tolerance", "comparisons", "status"]);
        for c in &self.checks {
            t.rows.push(vec![
                c.name.into(),
                c.metric.into(),
                c.max_error.into(),
                c.tolerance.into(),
                Cell::Int(c.comparisons as i64),
                if c.passed() { "PASS" } else { "FAIL" }.into(),
            ]);
        }
        t
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn crel_err(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

struct Runner {
    opts: ValidateOptions,
    checks: Vec<CheckResult>,
}

impl Runner {
    /// The configuration handed to closed-form code.
    fn analytic(&self, c: &SgConfig) -> Result<SgConfig> {
        c.with_sigma0(c.sigma0() * (1.0 + self.opts.sigma0_perturbation))
    }

    fn record(&mut self, name: &'static str, metric: &'static str, tolerance: f64, errors: Vec<f64>) {
        let max_error = errors
            .iter()
            .copied()
            .fold(0.0, |m: f64, e| if e.is_nan() { f64::NAN } else { m.max(e) });
        self.checks.push(CheckResult {
            name,
            metric,
            max_error,
            tolerance,
            comparisons: errors.len(),
        });
    }
}

fn cfg(lambda: f64, sigma0: f64, time: f64, k: u64, alpha2: f64) -> Result<SgConfig> {
    SgConfig::with_alpha2(lambda, sigma0, time, k, alpha2)
}

fn overlap_triples() -> Vec<(f64, f64, f64)> {
    let mut out = Vec::new();
    for (i, lambda) in [0.5, 1.0, 2.0, 3.7].into_iter().enumerate() {
        for (j, sigma0) in [0.3, 1.0, 2.5, 0.8, 1.7].into_iter().enumerate() {
            let ratio = 0.25 * (1 + (i + j) % 8) as f64;
            out.push((lambda, sigma0, ratio * sigma0 / lambda));
        }
    }
    out
}

/// `⟨x,y⟩` for packets at `±λt`, by quadrature.
pub(crate) fn quadrature_site_overlap(lambda: f64, sigma0: f64, t: f64, points: usize) -> Result<f64> {
    let shift = lambda * t;
    let half = shift + 12.0 * sigma0;
    let grid = Grid::new(-half, half, points)?;
    let f = discretize(&GaussianPacket::new(shift, sigma0)?, &grid)?;
    let g = discretize(&GaussianPacket::new(-shift, sigma0)?, &grid)?;
    Ok(inner_product(&f, &g)?.re)
}

fn run_checks(r: &mut Runner) -> Result<()> {
    // per-site overlap against direct quadrature
    let mut errs = Vec::new();
    for (lambda, sigma0, t) in overlap_triples() {
        let oracle = quadrature_site_overlap(lambda, sigma0, t, 2049)?;
        let analytic = per_site_overlap(&r.analytic(&cfg(lambda, sigma0, t, 0, 0.5)?)?, t)?;
        errs.push(rel_err(analytic, oracle));
    }
    r.record("per_site_overlap_quadrature", "relative", 1e-6, errs);

    // per-site overlap through grid translation of the t = 0 packet
    let mut errs = Vec::new();
    for (lambda, sigma0, t) in [(1.0, 1.0, 1.0), (2.0, 0.5, 0.3), (0.7, 1.3, 2.0)] {
        let shift = lambda * t;
        let grid = Grid::aligned(shift + 12.0 * sigma0, shift, 1025)?;
        let f0 = discretize(&GaussianPacket::new(0.0, sigma0)?, &grid)?;
        let oracle = inner_product(&translate(&f0, shift)?, &translate(&f0, -shift)?)?.re;
        let analytic = per_site_overlap(&r.analytic(&cfg(lambda, sigma0, t, 0, 0.5)?)?, t)?;
        errs.push(rel_err(analytic, oracle));
    }
    r.record("per_site_overlap_translation", "relative", 1e-6, errs);

    // branch overlap as an explicit product over sites, k <= 1
    let mut errs = Vec::new();
    for k in [0_u64, 1] {
        for t in [0.5, 1.0, 1.5] {
            let config = cfg(1.0, 1.0, t, k, 0.5)?;
            let grid = Grid::new(-(t + 12.0), t + 12.0, 1024)?;
            let oracle: f64 = (0..config.sites())
                .map(|_| -> Result<f64> {
                    let f = discretize(&GaussianPacket::new(t, 1.0)?, &grid)?;
                    let g = discretize(&GaussianPacket::new(-t, 1.0)?, &grid)?;
                    Ok(inner_product(&f, &g)?.re)
                })
                .product::<Result<f64>>()?;
            let analytic = branch_overlap(&r.analytic(&config)?, t)?.magnitude();
            errs.push(rel_err(analytic, oracle));
        }
    }
    r.record("branch_overlap_tensor", "relative", 1e-6, errs);

    // discretization norm
    let grid = Grid::new(-12.0, 12.0, 1024)?;
    let raw = sample(&GaussianPacket::new(0.0, 1.0)?, &grid);
    r.record("discretize_norm", "absolute", 1e-9, vec![(raw.norm() - 1.0).abs()]);

    // second-order convergence of the trapezoid rule on a marginally resolved packet
    let exact = (-0.5f64).exp();
    let err = |n: usize| -> Result<f64> {
        let grid = Grid::new(-4.0, 4.0, n)?;
        let f = sample(&GaussianPacket::new(-0.1, 0.1)?, &grid);
        let g = sample(&GaussianPacket::new(0.1, 0.1)?, &grid);
        Ok((inner_product(&f, &g)?.re - exact).abs())
    };
    let (e1, e2) = (err(64)?, err(128)?);
    r.record("quadrature_convergence", "error ratio e(2n)/e(n)", 0.25, vec![e2 / e1]);

    // trace-norm distance against diagonalization of |x⟩⟨x| − |y⟩⟨y|
    let mut errs = Vec::new();
    for log_mag in [-1e-6, -0.01, -0.5, -1.0, -3.0, -10.0] {
        let d = crate::state_metrics::norm_distance(&LogOverlap::new(log_mag, 0.0));
        let (x, y) = unit_vectors_with_overlap(Complex64::new(log_mag.exp(), 0.0));
        errs.push(rel_err(d, trace_norm_distance(&x, &y)));
    }
    r.record("norm_distance_trace_norm", "relative", 1e-9, errs);

    let errs = (0..200)
        .map(|i| {
            let rec = FidelityRecord::from_overlap(&LogOverlap::new(-(i as f64) * 0.05, 0.0));
            (rec.fidelity() + rec.norm_distance.powi(2) / 4.0 - 1.0).abs()
        })
        .collect();
    r.record("fidelity_distance_duality", "absolute", 1e-12, errs);

    // reduced spin matrix off-diagonal against the k = 1 tensor state
    let mut errs = Vec::new();
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let pick = ProductObservable {
        spin: [[zero, one], [zero, zero]],
        factors: vec![],
    };
    for (t, alpha2) in [(1.0, 0.5), (0.5, 0.3), (1.5, 0.8)] {
        let config = cfg(1.0, 1.0, t, 1, alpha2)?;
        let oracle = tensor_observable_check(&config, &pick, 1024)?.full;
        let analytic = reduced_spin_density(&r.analytic(&config)?, t)?.entries[1][0];
        errs.push(crel_err(analytic, oracle));
    }
    r.record("reduced_density_off_diagonal", "relative", 1e-6, errs);

    // center-of-mass characteristic function against product quadrature
    let mut errs = Vec::new();
    for k in [0_u64, 1] {
        for (rho, t) in [(0.5, 1.0), (1.0, 2.0), (2.5, 0.7)] {
            let config = cfg(1.0, 1.0, t, k, 0.5)?;
            let grid = Grid::new(-(t + 12.0), t + 12.0, 1024)?;
            for spin in [Spin::Up, Spin::Down] {
                let site = discretize(&GaussianPacket::new(spin.sign() * t, 1.0)?, &grid)?;
                let sites = vec![site; config.sites() as usize];
                let oracle = phase_expectation(&sites, rho);
                let analytic = cm_characteristic(&r.analytic(&config)?, rho, spin, t)?;
                errs.push(crel_err(analytic, oracle));
            }
        }
    }
    r.record("cm_characteristic_quadrature", "relative", 1e-6, errs);

    // −i dχ/dρ at 0 equals the classical trajectory ±λT
    let mut errs = Vec::new();
    for (lambda, t, k) in [(1.0, 2.0, 1_u64), (0.4, 5.0, 10), (3.0, 0.2, 1000)] {
        let config = r.analytic(&cfg(lambda, 1.0, t, k, 0.5)?)?;
        for spin in [Spin::Up, Spin::Down] {
            let d = finite_difference_complex(|x| cm_characteristic(&config, x, spin, t).unwrap(), 0.0, 1e-6);
            let z = (Complex64::new(0.0, -1.0) * d).re;
            errs.push((z - spin.sign() * lambda * t).abs() / (1.0 + lambda * t));
        }
    }
    r.record("cm_mean_finite_difference", "absolute / (1 + |λT|)", 1e-6, errs);

    // spin readout is ±1/2 for every T in [t_D, 100 t_D]
    let mut errs = Vec::new();
    for k in [1_u64, 10, 1000] {
        for i in 0..50 {
            let t = 3.0 * (1.0 + 99.0 * i as f64 / 49.0);
            let config = cfg(1.0, 1.0, t, k, 0.5)?;
            for spin in [Spin::Up, Spin::Down] {
                let s = spin_readout(cm_mean(&config, spin).z_cm_mean, 1.0, t)?;
                errs.push((s - 0.5 * spin.sign()).abs());
            }
        }
    }
    r.record("spin_readout_invariance", "absolute", 1e-9, errs);

    // collapse discrepancy bound on k = 1 tensors
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let config = cfg(1.0, 1.0, 1.0, 1, 0.5)?;
    let analytic = r.analytic(&config)?;
    let mut errs = Vec::new();
    for _ in 0..100 {
        let obs = random_observable(&mut rng);
        let check = tensor_observable_check(&config, &obs, 512)?;
        let bound = crate::state_metrics::local_discrepancy_bound(&analytic, obs.support() as u64, obs.op_norm())?;
        errs.push(check.discrepancy / bound);
    }
    r.record("collapse_discrepancy_bound", "discrepancy / bound", 1.0, errs);

    // factorized and materialized tensor contractions agree
    let mut errs = Vec::new();
    for _ in 0..4 {
        let obs = random_observable(&mut rng);
        let a = tensor_observable_check(&config, &obs, 65)?;
        let b = tensor_observable_dense(&config, &obs, 65)?;
        errs.push((a.full - b.full).norm().max((a.collapsed - b.collapsed).norm()));
    }
    r.record("tensor_factorized_vs_dense", "absolute", 1e-12, errs);

    // von Neumann entropy against the resolvent integral
    let mut errs = Vec::new();
    errs.push((von_neumann_entropy(&DensityMatrix::from_diagonal(&[0.25, 0.75])?) - 0.562_335_144_618_808_3).abs());
    for dim in [2, 3, 4, 6, 8] {
        let rho = random_density(&mut rng, dim)?;
        errs.push((von_neumann_entropy(&rho) - entropy_by_resolvent_quadrature(rho.matrix())).abs());
    }
    r.record("entropy_resolvent_quadrature", "absolute", 1e-8, errs);

    // rank-two mixture spectrum against the dense Kronecker construction
    let mut errs = Vec::new();
    for k in 0..=MAX_DENSE_K {
        for a in [0.1, 0.5, 0.75] {
            let m = mixture_density(a, k)?;
            errs.push((von_neumann_entropy(&m.dense()?) - m.entropy()).abs());
        }
    }
    r.record("mixture_rank_two_vs_dense", "absolute", 1e-10, errs);

    // concavity on random pairs
    let mut errs = Vec::new();
    for i in 0..200 {
        let dim = 2 + i % 15;
        let r1 = random_density(&mut rng, dim)?;
        let r2 = random_density(&mut rng, dim)?;
        let a = 0.1 * (1 + i % 9) as f64;
        errs.push((-concavity_gap(&r1, &r2, a)?).max(0.0));
    }
    r.record("entropy_concavity", "max(−gap, 0)", 1e-10, errs);

    // entropy ledger identities
    let mut errs = Vec::new();
    for i in 0..=8 {
        let a = i as f64 / 8.0;
        for k in [0_u64, 1, 100, 10_000] {
            let l = collapse_entropy_audit(a, k)?;
            errs.push(l.s_pre.abs());
            errs.push(l.s_avg_outcomes.abs());
            errs.push((l.s_post_mixture - binary_entropy(a)).abs());
        }
    }
    r.record("collapse_entropy_audit", "absolute", 1e-12, errs);

    Ok(())
}

pub(crate) fn random_observable(rng: &mut ChaCha8Rng) -> ProductObservable {
    let mut c = || Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let spin = [[c(), c()], [c(), c()]];
    ProductObservable {
        spin,
        factors: vec![(
            rng.gen_range(0..3),
            PhaseFactor {
                wavenumber: rng.gen_range(-3.0..3.0),
                offset: rng.gen_range(0.0..std::f64::consts::TAU),
            },
        )],
    }
}

pub(crate) fn random_density(rng: &mut ChaCha8Rng, dim: usize) -> Result<DensityMatrix> {
    let g = nalgebra::DMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let m = &g * g.adjoint();
    let mut m = &m / m.trace();
    for i in 0..dim {
        m[(i, i)].im = 0.0;
        for j in 0..i {
            m[(i, j)] = m[(j, i)].conj();
        }
    }
    DensityMatrix::new(m)
}

/// Runs every oracle comparison.
pub fn cmd_validate(opts: ValidateOptions) -> Result<ValidationReport> {
    let mut runner = Runner {
        opts,
        checks: Vec::new(),
    };
    run_checks(&mut runner)?;
    Ok(ValidationReport { checks: runner.checks })
}
