use rayon::prelude::*;

use super::config::{Experiment, Params, RunConfig, SweepSpec};
use super::table::{Cell, Table};
use crate::error::{Error, Result};
use crate::gaussian_model::{branch_overlap, Spin};
use crate::pointer::{cm_characteristic, cm_log_modulus, cm_mean, spin_readout};
use crate::spin_entropy::{
    chain_concavity_gap, classify_process, collapse_entropy_audit, mixture_density, spin_matrix_entropy,
};
use crate::state_metrics::{collapse, norm_distance, reduced_spin_density};

/// Two entropies closer than this are classified as equal.
const CLASSIFY_TOL: f64 = 1e-12;

fn default_sweep(run: &RunConfig) -> Result<Vec<SweepSpec>> {
    if !run.sweeps.is_empty() {
        return Ok(run.sweeps.clone());
    }
    let spec = match run.experiment {
        Experiment::DecoherenceCurve => "k:1:64:64".to_string(),
        Experiment::ScalingStudy => "k:1:10000:41:log".to_string(),
        Experiment::Pointer => {
            let r = 8.0 / run.params.sigma0;
            format!("rho:{}:{}:257", -r, r)
        }
        Experiment::Entropy | Experiment::CollapseAudit => "alpha2:0:1:9".to_string(),
        Experiment::Validate => return Ok(Vec::new()),
    };
    Ok(vec![SweepSpec::parse(&spec)?])
}

/// Evaluates `row` at every sweep point on a worker pool; rows come back in
/// sweep order.
fn sweep_table<F>(run: &RunConfig, columns: &[&str], row: F) -> Result<Table>
where
    F: Fn(&Params) -> Result<Vec<Cell>> + Sync,
{
    let mut resolved = run.clone();
    resolved.sweeps = default_sweep(run)?;
    let points = resolved.points()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = super::thread_cap() {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let rows = pool.install(|| points.par_iter().map(&row).collect::<Result<Vec<_>>>())?;
    let mut table = Table::new(columns);
    table.rows = rows;
    Ok(table)
}

fn log_abs_alpha_beta(alpha2: f64) -> f64 {
    0.5 * (alpha2.ln() + (1.0 - alpha2).ln())
}

/// Branch overlap, distance and coherence along a sweep over `k` and/or `T`.
pub fn cmd_decoherence_curve(run: &RunConfig) -> Result<Table> {
    let columns = [
        "k",
        "T",
        "log_overlap",
        "norm_distance",
        "transition_prob_partial",
        "log_transition_prob_partial",
        "off_diagonal_magnitude",
        "log_off_diagonal",
    ];
    sweep_table(run, &columns, |p| {
        let config = p.sg_config()?;
        let t = config.time();
        let overlap = branch_overlap(&config, t)?;
        let log_off = log_abs_alpha_beta(config.alpha2()) + overlap.log_magnitude;
        Ok(vec![
            Cell::from(config.k()),
            t.into(),
            overlap.log_magnitude.into(),
            norm_distance(&overlap).into(),
            overlap.log_fidelity().exp().into(),
            overlap.log_fidelity().into(),
            log_off.exp().into(),
            log_off.into(),
        ])
    })
}

/// Branch overlap under the shrinking measurement time `T(k) = c/√(2k+1)`.
pub fn cmd_scaling_study(run: &RunConfig) -> Result<Table> {
    let mut run = run.clone();
    if run.params.c.is_none() {
        run.params.c = Some(1.0);
    }
    let columns = [
        "k",
        "c",
        "T",
        "log_overlap",
        "log_overlap_limit",
        "transition_prob",
        "transition_prob_limit",
        "off_diagonal_magnitude",
    ];
    sweep_table(&run, &columns, |p| {
        let config = p.sg_config()?;
        let c = p.c.expect("c is set");
        let t = config.time();
        let overlap = branch_overlap(&config, t)?;
        let limit = -(config.lambda() * c / config.sigma0()).powi(2) / 2.0;
        Ok(vec![
            Cell::from(config.k()),
            c.into(),
            t.into(),
            overlap.log_magnitude.into(),
            limit.into(),
            overlap.log_fidelity().exp().into(),
            (2.0 * limit).exp().into(),
            (log_abs_alpha_beta(config.alpha2()) + overlap.log_magnitude)
                .exp()
                .into(),
        ])
    })
}

/// Center-of-mass characteristic function and spin readout of both branches.
pub fn cmd_pointer(run: &RunConfig) -> Result<Table> {
    let columns = [
        "rho",
        "k",
        "T",
        "re_chi_plus",
        "im_chi_plus",
        "re_chi_minus",
        "im_chi_minus",
        "log_abs_chi",
        "z_cm_mean_plus",
        "z_cm_mean_minus",
        "s_z_readout_plus",
        "s_z_readout_minus",
    ];
    sweep_table(run, &columns, |p| {
        let config = p.sg_config()?;
        let t = config.time();
        let up = cm_characteristic(&config, p.rho, Spin::Up, t)?;
        let down = cm_characteristic(&config, p.rho, Spin::Down, t)?;
        let z_up = cm_mean(&config, Spin::Up).z_cm_mean;
        let z_down = cm_mean(&config, Spin::Down).z_cm_mean;
        let readout = |z: f64| spin_readout(z, config.lambda(), t).unwrap_or(f64::NAN);
        Ok(vec![
            p.rho.into(),
            Cell::from(config.k()),
            t.into(),
            up.re.into(),
            up.im.into(),
            down.re.into(),
            down.im.into(),
            cm_log_modulus(&config, p.rho).into(),
            z_up.into(),
            z_down.into(),
            readout(z_up).into(),
            readout(z_down).into(),
        ])
    })
}

/// Entropy of the effective spin-chain mixture over `k` and `|α|²`.
pub fn cmd_entropy(run: &RunConfig) -> Result<Table> {
    let columns = [
        "k",
        "alpha2",
        "S_mixture",
        "per_site",
        "concavity_gap",
        "concavity_gap_per_site",
        "s_pre",
        "s_avg_outcomes",
        "classification",
    ];
    sweep_table(run, &columns, |p| {
        let mixture = mixture_density(p.alpha2, p.k)?;
        let gap = chain_concavity_gap(p.alpha2, p.k)?;
        let ledger = collapse_entropy_audit(p.alpha2, p.k)?;
        let n = mixture.sites() as f64;
        Ok(vec![
            Cell::from(p.k),
            p.alpha2.into(),
            mixture.entropy().into(),
            mixture.per_site_entropy().into(),
            gap.into(),
            (gap / n).into(),
            ledger.s_pre.into(),
            ledger.s_avg_outcomes.into(),
            classify_process(ledger.s_pre, ledger.s_avg_outcomes, CLASSIFY_TOL)
                .to_string()
                .into(),
        ])
    })
}

/// Entropy ledger of one measurement, alongside the reduced spin matrix at `T`.
pub fn cmd_collapse_audit(run: &RunConfig) -> Result<Table> {
    let columns = [
        "k",
        "alpha2",
        "T",
        "off_diagonal_magnitude",
        "S_spin_reduced",
        "S_spin_collapsed",
        "s_pre",
        "s_post_mixture",
        "s_avg_outcomes",
        "s_pre_per_site",
        "s_post_mixture_per_site",
        "s_avg_outcomes_per_site",
        "mean_entropy_limit",
        "classification",
    ];
    sweep_table(run, &columns, |p| {
        let config = p.sg_config()?;
        let t = config.time();
        let rho = reduced_spin_density(&config, t)?;
        let ledger = collapse_entropy_audit(config.alpha2(), config.k())?;
        Ok(vec![
            Cell::from(config.k()),
            config.alpha2().into(),
            t.into(),
            rho.off_diagonal().norm().into(),
            spin_matrix_entropy(&rho).into(),
            spin_matrix_entropy(&collapse(&rho)).into(),
            ledger.s_pre.into(),
            ledger.s_post_mixture.into(),
            ledger.s_avg_outcomes.into(),
            ledger.s_pre_per_site.into(),
            ledger.s_post_mixture_per_site.into(),
            ledger.s_avg_outcomes_per_site.into(),
            ledger.mean_entropy_limit.into(),
            classify_process(ledger.s_pre_per_site, ledger.s_avg_outcomes_per_site, CLASSIFY_TOL)
                .to_string()
                .into(),
        ])
    })
}

/// Dispatches the sweep experiments; `validate` is handled separately.
pub fn run_experiment(run: &RunConfig) -> Result<Table> {
    match run.experiment {
        Experiment::DecoherenceCurve => cmd_decoherence_curve(run),
        Experiment::Pointer => cmd_pointer(run),
        Experiment::Entropy => cmd_entropy(run),
        Experiment::CollapseAudit => cmd_collapse_audit(run),
        Experiment::ScalingStudy => cmd_scaling_study(run),
        Experiment::Validate => Err(Error::InvalidConfig("validate is not a sweep".into())),
    }
}
