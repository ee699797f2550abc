//! The apparatus as a product of one-dimensional Gaussian packets.
//!
//! The interaction Hamiltonian contains only `λ σ_z P_z` per atom, so the time
//! evolution is a rigid translation of every packet by `±λt` with no spreading.
//! Spin up is paired with packets moving to `+λt`, which is what makes the
//! center-of-mass readout `⟨z_CM⟩ = 2 s_z λT` come out with the right sign.

use num_complex::Complex64;

use crate::error::{Error, Result};

const NORMALIZATION_TOL: f64 = 1e-12;

/// Eigenvalue of `σ_z` labelling a branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub fn sign(self) -> f64 {
        match self {
            Spin::Up => 1.0,
            Spin::Down => -1.0,
        }
    }

    pub fn flip(self) -> Spin {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }
}

/// Parameters of one Stern-Gerlach run.
///
/// `lambda` is both the coupling and the mean z-velocity (length/time),
/// `sigma0` the initial packet width, `time` the measurement time `T`, and
/// `k` the half-size of the apparatus: atoms are indexed `-k..=k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SgConfig {
    lambda: f64,
    sigma0: f64,
    time: f64,
    k: u64,
    alpha: Complex64,
    beta: Complex64,
}

impl SgConfig {
    pub fn new(lambda: f64, sigma0: f64, time: f64, k: u64, alpha: Complex64, beta: Complex64) -> Result<Self> {
        let config = SgConfig {
            lambda,
            sigma0,
            time,
            k,
            alpha,
            beta,
        };
        config.validate()?;
        Ok(config)
    }

    /// Real, non-negative spinor weights `α = √a`, `β = √(1-a)`.
    pub fn with_alpha2(lambda: f64, sigma0: f64, time: f64, k: u64, alpha2: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha2) {
            return Err(Error::InvalidConfig(format!("alpha2 = {alpha2} outside [0, 1]")));
        }
        Self::new(
            lambda,
            sigma0,
            time,
            k,
            Complex64::new(alpha2.sqrt(), 0.0),
            Complex64::new((1.0 - alpha2).sqrt(), 0.0),
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidConfig(format!("lambda must be > 0, got {}", self.lambda)));
        }
        if !(self.sigma0 > 0.0 && self.sigma0.is_finite()) {
            return Err(Error::InvalidConfig(format!("sigma0 must be > 0, got {}", self.sigma0)));
        }
        if !(self.time >= 0.0) {
            return Err(Error::InvalidConfig(format!("T must be >= 0, got {}", self.time)));
        }
        let norm = self.alpha.norm_sqr() + self.beta.norm_sqr();
        if (norm - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidConfig(format!(
                "|alpha|^2 + |beta|^2 = {norm}, expected 1"
            )));
        }
        Ok(())
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn sigma0(&self) -> f64 {
        self.sigma0
    }

    /// Measurement time `T`.
    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn beta(&self) -> Complex64 {
        self.beta
    }

    pub fn alpha2(&self) -> f64 {
        self.alpha.norm_sqr()
    }

    pub fn beta2(&self) -> f64 {
        self.beta.norm_sqr()
    }

    /// Number of atoms, `2k+1`.
    pub fn sites(&self) -> u64 {
        2 * self.k + 1
    }

    pub fn weight(&self, spin: Spin) -> Complex64 {
        match spin {
            Spin::Up => self.alpha,
            Spin::Down => self.beta,
        }
    }

    pub fn with_time(self, time: f64) -> Result<Self> {
        Self::new(self.lambda, self.sigma0, time, self.k, self.alpha, self.beta)
    }

    pub fn with_k(self, k: u64) -> Result<Self> {
        Self::new(self.lambda, self.sigma0, self.time, k, self.alpha, self.beta)
    }

    pub fn with_sigma0(self, sigma0: f64) -> Result<Self> {
        Self::new(self.lambda, sigma0, self.time, self.k, self.alpha, self.beta)
    }
}

/// Normalized Gaussian `(2πσ²)^(-1/4) exp(-(z-c)²/(4σ²))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPacket {
    pub center: f64,
    pub sigma: f64,
}

impl GaussianPacket {
    pub fn new(center: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) || !center.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "packet needs finite center and sigma > 0, got ({center}, {sigma})"
            )));
        }
        Ok(GaussianPacket { center, sigma })
    }

    pub fn amplitude(&self, z: f64) -> f64 {
        let d = z - self.center;
        (2.0 * std::f64::consts::PI * self.sigma * self.sigma).powf(-0.25)
            * (-d * d / (4.0 * self.sigma * self.sigma)).exp()
    }
}

/// One spin branch together with its `2k+1` apparatus packets.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchState {
    pub spin: Spin,
    pub packets: Vec<GaussianPacket>,
    pub weight: Complex64,
}

/// Inner product stored as `ln|⟨x,y⟩|` plus a phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogOverlap {
    pub log_magnitude: f64,
    pub phase: f64,
}

impl LogOverlap {
    pub fn new(log_magnitude: f64, phase: f64) -> Self {
        LogOverlap { log_magnitude, phase }
    }

    /// `|⟨x,y⟩|`; underflows to 0 below ~exp(-745).
    pub fn magnitude(&self) -> f64 {
        self.log_magnitude.exp()
    }

    pub fn value(&self) -> Complex64 {
        Complex64::from_polar(self.magnitude(), self.phase)
    }

    /// `ln F` with `F = |⟨x,y⟩|²`.
    pub fn log_fidelity(&self) -> f64 {
        2.0 * self.log_magnitude
    }
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::NegativeTime(t))
    }
}

fn branch_at(config: &SgConfig, spin: Spin, t: f64) -> BranchState {
    let center = spin.sign() * config.lambda * t;
    let packet = GaussianPacket {
        center,
        sigma: config.sigma0,
    };
    BranchState {
        spin,
        packets: vec![packet; config.sites() as usize],
        weight: config.weight(spin),
    }
}

/// Both branches at `t = 0`: every packet centered at the origin.
pub fn initial_state(config: &SgConfig) -> Result<(BranchState, BranchState)> {
    config.validate()?;
    Ok((branch_at(config, Spin::Up, 0.0), branch_at(config, Spin::Down, 0.0)))
}

/// Exact evolution to time `t`: the up branch moves to `+λt`, the down branch
/// to `-λt`, widths unchanged.
pub fn evolve(config: &SgConfig, t: f64) -> Result<(BranchState, BranchState)> {
    config.validate()?;
    check_time(t)?;
    Ok((branch_at(config, Spin::Up, t), branch_at(config, Spin::Down, t)))
}

/// `ln⟨x_i, y_i⟩ = -λ²t²/(2σ₀²)` for a single atom.
pub fn per_site_log_overlap(config: &SgConfig, t: f64) -> Result<f64> {
    config.validate()?;
    check_time(t)?;
    let x = config.lambda * t / config.sigma0;
    Ok(-0.5 * x * x)
}

/// Single-atom overlap `exp(-λ²t²/(2σ₀²))`.
pub fn per_site_overlap(config: &SgConfig, t: f64) -> Result<f64> {
    per_site_log_overlap(config, t).map(f64::exp)
}

/// Overlap of the two apparatus branch vectors, `(2k+1)` times the per-site log.
pub fn branch_overlap(config: &SgConfig, t: f64) -> Result<LogOverlap> {
    let per_site = per_site_log_overlap(config, t)?;
    Ok(LogOverlap::new(config.sites() as f64 * per_site, 0.0))
}

/// `t_D = 3σ₀/λ`.
pub fn decoherence_time(config: &SgConfig) -> f64 {
    3.0 * config.sigma0 / config.lambda
}

/// Distance `2λt` between the centers of the two branches.
pub fn center_separation(config: &SgConfig, t: f64) -> f64 {
    2.0 * config.lambda * t
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WindowViolation {
    /// `T = 0`: an instantaneous measurement is excluded.
    InstantaneousMeasurement,
    /// `t_D` is not strictly positive.
    VanishingDecoherenceTime,
    /// `T < t_D`.
    BeforeDecoherence { time: f64, decoherence_time: f64 },
    /// `T` is not finite.
    UnboundedTime,
}

impl std::fmt::Display for WindowViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WindowViolation::InstantaneousMeasurement => {
                write!(f, "T = 0: instantaneous measurement excluded")
            }
            WindowViolation::VanishingDecoherenceTime => write!(f, "t_D > 0 violated"),
            WindowViolation::BeforeDecoherence { time, decoherence_time } => {
                write!(f, "t_D <= T violated: T = {time}, t_D = {decoherence_time}")
            }
            WindowViolation::UnboundedTime => write!(f, "T < infinity violated"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementWindow {
    pub decoherence_time: f64,
    pub violation: Option<WindowViolation>,
}

impl MeasurementWindow {
    pub fn is_satisfied(&self) -> bool {
        self.violation.is_none()
    }
}

/// Checks `0 < t_D <= T < ∞`.
pub fn check_measurement_window(config: &SgConfig) -> MeasurementWindow {
    let t_d = decoherence_time(config);
    let time = config.time;
    let violation = if time == 0.0 {
        Some(WindowViolation::InstantaneousMeasurement)
    } else if !(t_d > 0.0) {
        Some(WindowViolation::VanishingDecoherenceTime)
    } else if !time.is_finite() {
        Some(WindowViolation::UnboundedTime)
    } else if time < t_d {
        Some(WindowViolation::BeforeDecoherence {
            time,
            decoherence_time: t_d,
        })
    } else {
        None
    };
    MeasurementWindow {
        decoherence_time: t_d,
        violation,
    }
}
