//! Brute-force reference computations.
//!
//! Nothing in here calls the closed forms it is used to check: wave packets are
//! sampled on a uniform grid, evolved by shifting samples, and integrated with
//! the trapezoid rule. Small tensor states are either contracted site by site
//! (product operators only) or materialized outright.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian_model::{GaussianPacket, SgConfig};
use crate::state_metrics::local_discrepancy_bound;

pub const MIN_GRID_POINTS: usize = 64;
/// Boundary samples must be below this fraction of the peak.
pub const BOUNDARY_TOL: f64 = 1e-12;
/// Largest tensor the dense path will materialize.
pub const MAX_DENSE_AMPLITUDES: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    z_min: f64,
    z_max: f64,
    n_points: usize,
}

impl Grid {
    pub fn new(z_min: f64, z_max: f64, n_points: usize) -> Result<Self> {
        if !(z_max > z_min) || !z_min.is_finite() || !z_max.is_finite() {
            return Err(Error::Grid(format!("empty window [{z_min}, {z_max}]")));
        }
        if n_points < MIN_GRID_POINTS {
            return Err(Error::Grid(format!(
                "{n_points} points, need at least {MIN_GRID_POINTS}"
            )));
        }
        Ok(Grid { z_min, z_max, n_points })
    }

    /// Symmetric grid with about `n_points` points (rounded up to odd), half-width at
    /// least `min_half_width`, and a spacing that divides `shift` exactly.
    pub fn aligned(min_half_width: f64, shift: f64, n_points: usize) -> Result<Self> {
        let shift = shift.abs();
        let mut n = n_points.max(MIN_GRID_POINTS + 1) | 1;
        let h = if shift == 0.0 {
            2.0 * min_half_width / (n - 1) as f64
        } else {
            let cells = (shift * (n - 1) as f64 / (2.0 * min_half_width)).floor();
            if cells >= 1.0 {
                shift / cells
            } else {
                let half_cells = (min_half_width / shift).ceil() as usize;
                n = 2 * half_cells + 1;
                shift
            }
        };
        if n > MAX_DENSE_AMPLITUDES {
            return Err(Error::Grid(format!("aligned grid would need {n} points")));
        }
        let half = h * (n - 1) as f64 / 2.0;
        Grid::new(-half, half, n)
    }

    pub fn z_min(&self) -> f64 {
        self.z_min
    }

    pub fn z_max(&self) -> f64 {
        self.z_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        (self.z_max - self.z_min) / (self.n_points - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        self.z_min + i as f64 * self.spacing()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.point(i))
    }

    /// Trapezoid weight of sample `i`.
    pub fn weight(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.n_points {
            0.5 * self.spacing()
        } else {
            self.spacing()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridWavefunction {
    pub grid: Grid,
    pub samples: Vec<Complex64>,
}

impl GridWavefunction {
    pub fn norm(&self) -> f64 {
        self.samples
            .iter()
            .enumerate()
            .map(|(i, s)| self.grid.weight(i) * s.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        self.samples.iter_mut().for_each(|s| *s /= n);
        self
    }

    fn peak(&self) -> f64 {
        self.samples.iter().map(|s| s.norm()).fold(0.0, f64::max)
    }

    fn check_boundary(&self) -> Result<()> {
        let peak = self.peak();
        let edge = self.samples[0].norm().max(self.samples[self.samples.len() - 1].norm());
        if !(peak > 0.0) || edge > BOUNDARY_TOL * peak {
            return Err(Error::WindowTooSmall(format!(
                "boundary sample {edge:e} vs peak {peak:e} on [{}, {}]",
                self.grid.z_min, self.grid.z_max
            )));
        }
        Ok(())
    }
}

/// Raw point samples of the packet, without renormalization.
pub fn sample(packet: &GaussianPacket, grid: &Grid) -> GridWavefunction {
    GridWavefunction {
        grid: *grid,
        samples: grid
            .points()
            .map(|z| Complex64::new(packet.amplitude(z), 0.0))
            .collect(),
    }
}

/// Samples the packet and renormalizes it to unit quadrature norm.
pub fn discretize(packet: &GaussianPacket, grid: &Grid) -> Result<GridWavefunction> {
    let lo = packet.center - 8.0 * packet.sigma;
    let hi = packet.center + 8.0 * packet.sigma;
    if lo < grid.z_min || hi > grid.z_max {
        return Err(Error::WindowTooSmall(format!(
            "packet needs [{lo}, {hi}], grid is [{}, {}]",
            grid.z_min, grid.z_max
        )));
    }
    let f = sample(packet, grid);
    f.check_boundary()?;
    Ok(f.normalized())
}

/// Trapezoid quadrature of `conj(f)·g`.
pub fn inner_product(f: &GridWavefunction, g: &GridWavefunction) -> Result<Complex64> {
    if f.grid != g.grid {
        return Err(Error::Grid("inner product of functions on different grids".into()));
    }
    Ok(f.samples
        .iter()
        .zip(&g.samples)
        .enumerate()
        .map(|(i, (a, b))| a.conj() * b * f.grid.weight(i))
        .sum())
}

/// Shifts the samples by `round(a/h)` cells: the exact action of `exp(-i a P)`
/// when `a` is a multiple of the spacing.
pub fn translate(f: &GridWavefunction, a: f64) -> Result<GridWavefunction> {
    let cells = (a / f.grid.spacing()).round();
    let n = f.samples.len() as i64;
    if cells.abs() >= n as f64 {
        return Err(Error::WindowTooSmall(format!("shift of {cells} cells on {n} points")));
    }
    let cells = cells as i64;
    let peak = f.peak();
    let mut out = vec![Complex64::new(0.0, 0.0); f.samples.len()];
    for (i, s) in f.samples.iter().enumerate() {
        let j = i as i64 + cells;
        if (0..n).contains(&j) {
            out[j as usize] = *s;
        } else if s.norm() > BOUNDARY_TOL * peak {
            return Err(Error::WindowTooSmall(format!(
                "shift by {a} pushes support off the grid"
            )));
        }
    }
    let g = GridWavefunction {
        grid: f.grid,
        samples: out,
    };
    g.check_boundary()?;
    Ok(g)
}

/// `⟨f, exp(iρz) f⟩` by quadrature.
pub fn site_phase_expectation(f: &GridWavefunction, rho: f64) -> Complex64 {
    f.samples
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let z = f.grid.point(i);
            s.norm_sqr() * Complex64::from_polar(1.0, rho * z) * f.grid.weight(i)
        })
        .sum()
}

/// Expectation of `exp(iρ Σ z_i / n)` in the product state `⊗ f_i`, `n` sites.
pub fn phase_expectation(branches: &[GridWavefunction], rho: f64) -> Complex64 {
    let n = branches.len() as f64;
    branches.iter().map(|f| site_phase_expectation(f, rho / n)).product()
}

/// Multiplication by `exp(i(wavenumber·z + offset))` on one site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseFactor {
    pub wavenumber: f64,
    pub offset: f64,
}

impl PhaseFactor {
    fn at(&self, z: f64) -> Complex64 {
        Complex64::from_polar(1.0, self.wavenumber * z + self.offset)
    }
}

/// `A_spin ⊗ (⊗_{sites} phase factors)`, identity on every other site.
/// Spin index 0 is `|+⟩`, 1 is `|−⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductObservable {
    pub spin: [[Complex64; 2]; 2],
    pub factors: Vec<(usize, PhaseFactor)>,
}

impl ProductObservable {
    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        ProductObservable {
            spin: [[one, zero], [zero, one]],
            factors: Vec::new(),
        }
    }

    /// Distinct apparatus sites touched.
    pub fn support(&self) -> usize {
        let mut sites: Vec<usize> = self.factors.iter().map(|(s, _)| *s).collect();
        sites.sort_unstable();
        sites.dedup();
        sites.len()
    }

    /// Operator norm; the phase factors are unitary so this is the largest
    /// singular value of the spin block.
    pub fn op_norm(&self) -> f64 {
        let m = nalgebra::Matrix2::new(self.spin[0][0], self.spin[0][1], self.spin[1][0], self.spin[1][1]);
        m.singular_values().max()
    }

    fn site_factor(&self, site: usize, z: f64) -> Complex64 {
        self.factors
            .iter()
            .filter(|(s, _)| *s == site)
            .map(|(_, p)| p.at(z))
            .product()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservableCheck {
    /// `tr(Aρ)` in the full superposition.
    pub full: Complex64,
    /// `tr(Aρ̂)` after dropping the interference terms.
    pub collapsed: Complex64,
    pub discrepancy: f64,
    pub bound: f64,
}

impl ObservableCheck {
    pub fn holds(&self) -> bool {
        self.discrepancy <= self.bound * (1.0 + 1e-9) + 1e-15
    }
}

fn branch_grids(config: &SgConfig, points_per_site: usize) -> Result<[GridWavefunction; 2]> {
    if config.k() > 1 {
        return Err(Error::InvalidConfig(format!(
            "tensor oracle handles k <= 1, got k = {}",
            config.k()
        )));
    }
    let shift = config.lambda() * config.time();
    let grid = Grid::aligned(shift + 12.0 * config.sigma0(), shift, points_per_site)?;
    let f0 = discretize(&GaussianPacket::new(0.0, config.sigma0())?, &grid)?;
    Ok([translate(&f0, shift)?, translate(&f0, -shift)?])
}

fn check_support(config: &SgConfig, observable: &ProductObservable) -> Result<()> {
    let sites = config.sites() as usize;
    if let Some((s, _)) = observable.factors.iter().find(|(s, _)| *s >= sites) {
        return Err(Error::SupportTooLarge {
            support: *s as u64 + 1,
            sites: sites as u64,
        });
    }
    Ok(())
}

fn finish(
    config: &SgConfig,
    observable: &ProductObservable,
    full: Complex64,
    collapsed: Complex64,
) -> Result<ObservableCheck> {
    let bound = local_discrepancy_bound(config, observable.support() as u64, observable.op_norm())?;
    Ok(ObservableCheck {
        full,
        collapsed,
        discrepancy: (full - collapsed).norm(),
        bound,
    })
}

/// `|tr(Aρ) − tr(Aρ̂)|` on the discretized spin ⊗ apparatus state at time `T`,
/// contracted site by site.
pub fn tensor_observable_check(
    config: &SgConfig,
    observable: &ProductObservable,
    points_per_site: usize,
) -> Result<ObservableCheck> {
    check_support(config, observable)?;
    let branches = branch_grids(config, points_per_site)?;
    let coeff = [config.alpha(), config.beta()];
    let sites = config.sites() as usize;
    let mut full = Complex64::new(0.0, 0.0);
    let mut collapsed = Complex64::new(0.0, 0.0);
    for s in 0..2 {
        for t in 0..2 {
            let mut amp = coeff[s].conj() * coeff[t] * observable.spin[s][t];
            for site in 0..sites {
                let f = &branches[s];
                let g = &branches[t];
                amp *= f
                    .samples
                    .iter()
                    .zip(&g.samples)
                    .enumerate()
                    .map(|(i, (a, b))| {
                        let z = f.grid.point(i);
                        a.conj() * observable.site_factor(site, z) * b * f.grid.weight(i)
                    })
                    .sum::<Complex64>();
            }
            full += amp;
            if s == t {
                collapsed += amp;
            }
        }
    }
    finish(config, observable, full, collapsed)
}

/// Same quantity as [`tensor_observable_check`], but on the fully materialized
/// amplitude tensor `ψ(s, z_1, …, z_n)`.
pub fn tensor_observable_dense(
    config: &SgConfig,
    observable: &ProductObservable,
    points_per_site: usize,
) -> Result<ObservableCheck> {
    check_support(config, observable)?;
    let branches = branch_grids(config, points_per_site)?;
    let grid = branches[0].grid;
    let m = grid.n_points();
    let sites = config.sites() as u32;
    let per_branch = m.pow(sites);
    if 2 * per_branch > MAX_DENSE_AMPLITUDES {
        return Err(Error::DimensionCap {
            dim: 2 * per_branch,
            cap: MAX_DENSE_AMPLITUDES,
        });
    }
    let coeff = [config.alpha(), config.beta()];
    let mut psi = vec![Complex64::new(0.0, 0.0); 2 * per_branch];
    let mut weight = vec![0.0; per_branch];
    let mut phase = vec![Complex64::new(0.0, 0.0); per_branch];
    for idx in 0..per_branch {
        let mut rest = idx;
        let mut w = 1.0;
        let mut ph = Complex64::new(1.0, 0.0);
        let mut amp = [coeff[0], coeff[1]];
        for site in 0..sites as usize {
            let i = rest % m;
            rest /= m;
            let z = grid.point(i);
            w *= grid.weight(i);
            ph *= observable.site_factor(site, z);
            amp[0] *= branches[0].samples[i];
            amp[1] *= branches[1].samples[i];
        }
        weight[idx] = w;
        phase[idx] = ph;
        psi[idx] = amp[0];
        psi[per_branch + idx] = amp[1];
    }
    let mut full = Complex64::new(0.0, 0.0);
    let mut collapsed = Complex64::new(0.0, 0.0);
    for s in 0..2 {
        for t in 0..2 {
            let a = observable.spin[s][t];
            let sum: Complex64 = (0..per_branch)
                .map(|idx| psi[s * per_branch + idx].conj() * phase[idx] * psi[t * per_branch + idx] * weight[idx])
                .sum();
            full += a * sum;
            if s == t {
                collapsed += a * sum;
            }
        }
    }
    finish(config, observable, full, collapsed)
}

/// Central difference `(f(x+h) − f(x−h)) / 2h`.
pub fn finite_difference<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Complex-valued central difference.
pub fn finite_difference_complex<F: Fn(f64) -> Complex64>(f: F, x: f64, h: f64) -> Complex64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Trace-norm distance `‖|x⟩⟨x| − |y⟩⟨y|‖₁` by numerical diagonalization.
pub fn trace_norm_distance(x: &[Complex64], y: &[Complex64]) -> f64 {
    let n = x.len();
    let t = DMatrix::from_fn(n, n, |i, j| x[i] * x[j].conj() - y[i] * y[j].conj());
    t.symmetric_eigenvalues().iter().map(|e| e.abs()).sum()
}

/// Two unit vectors in `C²` whose inner product `⟨x,y⟩` equals `overlap`
/// (requires `|overlap| <= 1`).
pub fn unit_vectors_with_overlap(overlap: Complex64) -> (Vec<Complex64>, Vec<Complex64>) {
    let x = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
    let rest = (1.0 - overlap.norm_sqr()).max(0.0).sqrt();
    let y = vec![overlap, Complex64::new(rest, 0.0)];
    (x, y)
}

/// `S(ρ) = −tr ρ ln ρ` from the resolvent integral
/// `∫₀^∞ tr[ρ(ρ+s)^(-1)] − 1/(1+s) ds`, evaluated with `s = e^u` and the
/// trapezoid rule on `u ∈ [-60, 60]`. Assumes `tr ρ = 1`.
pub fn entropy_by_resolvent_quadrature(rho: &DMatrix<Complex64>) -> f64 {
    let n = rho.nrows();
    let step = 0.02;
    let steps = (120.0 / step) as usize;
    let mut total = 0.0;
    for j in 0..=steps {
        let u = -60.0 + j as f64 * step;
        let s = u.exp();
        let shifted = rho + DMatrix::<Complex64>::identity(n, n) * Complex64::new(s, 0.0);
        let inv = shifted.try_inverse().expect("ρ + s is positive definite");
        let tr = (rho * inv).trace().re;
        let integrand = (tr - 1.0 / (1.0 + s)) * s;
        let w = if j == 0 || j == steps { 0.5 } else { 1.0 };
        total += w * integrand * step;
    }
    total
}
