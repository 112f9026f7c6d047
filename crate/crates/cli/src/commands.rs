//! Implementations of the data-emitting subcommands.

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use dce_core::asymptotics::{
    asymptotic_log_negativity, asymptotic_photons, f_factors, occurrence_time, AsymptoticParams,
};
use dce_core::dynamics::{evolve_linear, evolve_ring, EvolutionTrace, EvolveOptions};
use dce_core::floquet::{monodromy, stability_map};
use dce_core::gaussian::{photon_number, thermal_state, Basis};
use dce_core::ode::OdeOptions;

use crate::config::{Cavity, ExperimentConfig, ModulationConfig, RunConfig};
use crate::output::{Cell, Table};

fn evolve_options(run: &RunConfig, period: f64) -> EvolveOptions<f64> {
    EvolveOptions {
        rel_tol: run.rel_tol,
        abs_tol: run.abs_tol,
        snapshot_interval: run.snapshot_interval.unwrap_or(period),
        ..EvolveOptions::default()
    }
}

fn run_trace(cfg: &ExperimentConfig) -> Result<(EvolutionTrace<f64>, Cavity)> {
    let cavity = cfg.cavity()?;
    let profile = cfg.profile()?;
    let bath = cfg.bath_spec()?;
    let run = cfg.run_config()?;
    let opts = evolve_options(run, profile.period());
    let trace = match cavity {
        Cavity::Linear => {
            let st = thermal_state(bath.nbar, 1, Basis::Original)?;
            evolve_linear(&st, &profile, &bath, run.t_end, &opts)?
        }
        Cavity::Ring => {
            let st = thermal_state(bath.nbar, 2, Basis::Original)?;
            evolve_ring(&st, &profile, &bath, run.t_end, &opts)?
        }
    };
    Ok((trace, cavity))
}

fn reject_sweep(cfg: &ExperimentConfig, command: &str) -> Result<()> {
    if cfg.sweep.is_some() {
        bail!("`{command}` does not accept a [sweep] section");
    }
    Ok(())
}

/// `theta1,theta2,delta,mu,stable` over the configured theta grid.
pub fn cmd_stability_map(cfg: &ExperimentConfig) -> Result<Table> {
    reject_sweep(cfg, "stability-map")?;
    let f_r = match cfg.modulation {
        ModulationConfig::Twostep { f1, f2, .. } => f2 / f1,
        ModulationConfig::Sinusoidal { .. } => {
            bail!("stability-map requires a twostep modulation")
        }
    };
    let grid = cfg
        .grid
        .as_ref()
        .context("stability-map requires a [grid] section")?;
    let theta1 = grid.theta1.values()?;
    let theta2 = grid.theta2.values()?;
    let cells = stability_map(f_r, &theta1, &theta2)?;
    let mut table = Table::new(vec!["theta1", "theta2", "delta", "mu", "stable"]);
    for c in cells {
        table.push(vec![
            Cell::Num(c.theta1),
            Cell::Num(c.theta2),
            Cell::Num(c.delta),
            Cell::Num(c.mu),
            Cell::Bool(c.stable),
        ]);
    }
    Ok(table)
}

/// `t,n_mean,e_n,nu_min,nu_dfs,trace_sigma`; `e_n` and `nu_dfs` are empty for
/// the linear cavity.
pub fn cmd_evolve(cfg: &ExperimentConfig) -> Result<Table> {
    reject_sweep(cfg, "evolve")?;
    let (trace, _) = run_trace(cfg)?;
    let mut table = Table::new(vec![
        "t",
        "n_mean",
        "e_n",
        "nu_min",
        "nu_dfs",
        "trace_sigma",
    ]);
    for snap in &trace.snapshots {
        table.push(vec![
            Cell::Num(snap.t),
            Cell::Num(snap.n_mean),
            snap.e_n.map_or(Cell::Empty, Cell::Num),
            Cell::Num(snap.nu_min),
            snap.nu_dfs.map_or(Cell::Empty, Cell::Num),
            Cell::Num(snap.trace_sigma),
        ]);
    }
    Ok(table)
}

/// `t,n_quantum,n_classical_thermal_seed,n_classical_zero_seed`; the thermal
/// seed matches the initial quantum photon observable.
pub fn cmd_compare_classical(cfg: &ExperimentConfig) -> Result<Table> {
    reject_sweep(cfg, "compare-classical")?;
    let profile = cfg.profile()?;
    let bath = cfg.bath_spec()?;
    let mu = monodromy(&profile, &OdeOptions::default())?.mu;
    let (trace, _) = run_trace(cfg)?;
    let seed = photon_number(&trace.snapshots[0].state);
    // classical intensity: seed e^{2 (mu - gamma) t}, zero for a zero seed
    let exponent = 2.0 * (mu - bath.gamma);
    let mut table = Table::new(vec![
        "t",
        "n_quantum",
        "n_classical_thermal_seed",
        "n_classical_zero_seed",
    ]);
    for snap in &trace.snapshots {
        table.push(vec![
            Cell::Num(snap.t),
            Cell::Num(snap.n_mean),
            Cell::Num(seed * (exponent * snap.t).exp()),
            Cell::Num(0.0),
        ]);
    }
    Ok(table)
}

fn first_entanglement_crossing(trace: &EvolutionTrace<f64>) -> Option<f64> {
    trace
        .snapshots
        .iter()
        .find(|s| s.e_n.unwrap_or(0.0) > 0.0)
        .map(|s| s.t)
}

/// `sweep_value,t_occ_analytic,t_occ_numeric` across the configured sweep;
/// the numeric column is the first `E_N > 0` snapshot of a ring evolution and
/// is empty when no crossing happens before `t_end`.
pub fn cmd_occurrence(cfg: &ExperimentConfig) -> Result<Table> {
    let sweep = cfg
        .sweep
        .as_ref()
        .context("occurrence requires a [sweep] section")?;
    if cfg.cavity()? != Cavity::Ring {
        bail!("occurrence requires cavity = \"ring\"");
    }
    let values = cfg.sweep_values()?;
    let parameter = sweep.parameter.clone();
    let points: Vec<Result<(f64, f64, Option<f64>)>> = values
        .par_iter()
        .map(|&value| -> Result<(f64, f64, Option<f64>)> {
            let mut point = cfg.clone();
            point.sweep = None;
            point.set_parameter(&parameter, value)?;
            let profile = point.profile()?;
            let bath = point.bath_spec()?;
            let params = AsymptoticParams::from_profile(&profile, &bath, &OdeOptions::default())?;
            let analytic = occurrence_time(&params)?.time;
            let (trace, _) = run_trace(&point)?;
            Ok((value, analytic, first_entanglement_crossing(&trace)))
        })
        .collect();
    let mut table = Table::new(vec!["sweep_value", "t_occ_analytic", "t_occ_numeric"]);
    for point in points {
        let (value, analytic, numeric) = point?;
        table.push(vec![
            Cell::Num(value),
            Cell::Num(analytic),
            numeric.map_or(Cell::Empty, Cell::Num),
        ]);
    }
    Ok(table)
}

/// `m,t,n_asymptotic,e_n_asymptotic,f_minus,f_plus` at period marks up to
/// `t_end`; `e_n_asymptotic` is empty where the entanglement asymptote is
/// undefined (lossless drive).
pub fn cmd_asymptotics(cfg: &ExperimentConfig) -> Result<Table> {
    reject_sweep(cfg, "asymptotics")?;
    let profile = cfg.profile()?;
    let bath = cfg.bath_spec()?;
    let run = cfg.run_config()?;
    let params = AsymptoticParams::from_profile(&profile, &bath, &OdeOptions::default())?;
    let period = profile.period();
    let m_max = (run.t_end / period).floor() as usize;
    if m_max == 0 {
        bail!("t_end must cover at least one period");
    }
    let mut table = Table::new(vec![
        "m",
        "t",
        "n_asymptotic",
        "e_n_asymptotic",
        "f_minus",
        "f_plus",
    ]);
    for m in 1..=m_max {
        let (f_minus, f_plus) = f_factors(&params, m)?;
        let e_n = asymptotic_log_negativity(&params, m).ok();
        table.push(vec![
            Cell::Int(m as u64),
            Cell::Num(m as f64 * period),
            Cell::Num(asymptotic_photons(&params, m)?),
            e_n.map_or(Cell::Empty, Cell::Num),
            Cell::Num(f_minus),
            Cell::Num(f_plus),
        ]);
    }
    Ok(table)
}
