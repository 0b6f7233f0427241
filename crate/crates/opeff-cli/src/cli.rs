//! Command definitions and implementations.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use opeff_core::indices::{evaluate_operation, DEFAULT_UNIT_INTERVAL};
use opeff_core::model::{ChannelRole, CostRates};
use opeff_core::plant::{self, run_operation, ControlSetting};
use opeff_core::sweep::{
    refine, select_optimal, successful, sweep, Criterion, SweepOutcome,
};

use crate::config::{CostsSection, RunConfigDocument};
use crate::error::{CliError, CliResult};
use crate::report::{
    sibling, with_suffix, write_atomic, write_deployed_series, write_series,
    write_theta_series, Format, OperationReport, SweepFailure, SweepReport,
};
use crate::signal_log::{read_signal_log, write_signal_log};

/// Operation efficiency modeling: simulate batch heating operations, sweep
/// control settings, and analyze recorded operation logs.
#[derive(Debug, Parser)]
#[command(name = "opeff", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one heating operation; writes `<out>.signals.csv` and
    /// `<out>.report.{toml,txt}`.
    Simulate {
        /// Run configuration (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Heater drive in percent of nominal power, in (0, 100].
        #[arg(long = "u-p")]
        u_p: f64,
        /// Base path for the output files.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "structured")]
        format: Format,
    },
    /// Sweep the drive grid from the config; writes the report plus the
    /// quantity-curve and triple-scatter series next to it, and prints the
    /// optimum under every criterion.
    Sweep {
        /// Run configuration (TOML) with a [sweep] block.
        #[arg(long)]
        config: PathBuf,
        /// Report file to write.
        #[arg(long)]
        report: PathBuf,
        /// Refine the grid around the incumbent optimum (three halvings).
        #[arg(long)]
        refine: bool,
        #[arg(long, value_enum, default_value = "structured")]
        format: Format,
    },
    /// Analyze a recorded signal log; writes the report and the deployed
    /// curves next to it.
    Analyze {
        /// Signal log (CSV with metadata block).
        #[arg(long)]
        signals: PathBuf,
        /// Cost rates (TOML). Rates embedded in the log fill any gaps.
        #[arg(long)]
        costs: PathBuf,
        /// Report file to write.
        #[arg(long)]
        report: PathBuf,
        #[arg(long, value_enum, default_value = "structured")]
        format: Format,
    },
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate { config, u_p, out, format } => {
            cmd_simulate(&config, u_p, &out, format)
        }
        Command::Sweep { config, report, refine, format } => {
            cmd_sweep(&config, &report, refine, format)
        }
        Command::Analyze { signals, costs, report, format } => {
            cmd_analyze(&signals, &costs, &report, format)
        }
    }
}

fn cmd_simulate(config: &Path, u_p: f64, out: &Path, format: Format) -> CliResult<()> {
    let doc = RunConfigDocument::load(config)?;
    let plant_cfg = doc.plant_config();
    let costs = doc.cost_rates()?;
    let setting = ControlSetting::new(u_p)?;
    let reg = run_operation(&plant_cfg, setting)?;
    let evaluation = evaluate_operation(&reg, &costs, doc.f_unit_interval)?;

    let signals_path = with_suffix(out, "signals.csv");
    write_signal_log(&signals_path, &reg, &costs)?;

    let report = OperationReport {
        u_p: Some(u_p),
        t_s: reg.t_s(),
        t_f: reg.t_f(),
        quantities: reg.integrated_quantities(),
        summary: evaluation.summary,
    };
    let report_path = with_suffix(out, format.report_suffix());
    write_atomic(&report_path, &report.render(format))?;

    println!("signals: {}", signals_path.display());
    println!("report:  {}", report_path.display());
    Ok(())
}

fn cmd_sweep(config: &Path, report_path: &Path, refine_flag: bool, format: Format) -> CliResult<()> {
    let doc = RunConfigDocument::load(config)?;
    let sweep_section = doc.sweep.ok_or_else(|| {
        CliError::Validation(String::from("config has no [sweep] block"))
    })?;
    let u_values = sweep_section.u_values()?;
    let plant_cfg = doc.plant_config();
    let costs = doc.cost_rates()?;

    let mut outcomes = sweep(&plant_cfg, &costs, &u_values, doc.f_unit_interval)?;
    if refine_flag {
        outcomes = refine(&plant_cfg, &costs, outcomes, Criterion::MaxF, doc.f_unit_interval)?;
    }
    let records = successful(&outcomes);
    let failures = collect_failures(&outcomes);

    let mut optima = Vec::new();
    for criterion in Criterion::ALL {
        let best = select_optimal(&records, criterion)?;
        optima.push((criterion, best.u_p));
        println!("optimum {}: u_p = {}", criterion.name(), best.u_p);
    }

    let report = SweepReport {
        unit_interval: doc.f_unit_interval,
        records: records.clone(),
        failures,
        optima,
    };
    write_atomic(report_path, &report.render(format)?)?;

    // Plot-ready series: the four quantity curves and the triple scatter.
    for (key, role) in [
        ("rq_w", ChannelRole::input(plant::COLD_FLUID)),
        ("rq_p", ChannelRole::input(plant::ENERGY)),
        ("rq_m", ChannelRole::input(plant::MECHANISM_WEAR)),
        ("pq_w", ChannelRole::output(plant::HEATED_FLUID)),
    ] {
        let rows: Vec<(f64, f64)> = records
            .iter()
            .map(|r| (r.u_p, r.quantities[&role]))
            .collect();
        write_series(
            &sibling(report_path, &format!("{key}.csv")),
            &key.to_uppercase(),
            &rows,
        )?;
    }
    write_theta_series(&sibling(report_path, "theta.csv"), &records)?;

    println!("report:  {}", report_path.display());
    Ok(())
}

fn cmd_analyze(
    signals: &Path,
    costs_path: &Path,
    report_path: &Path,
    format: Format,
) -> CliResult<()> {
    let log = read_signal_log(signals)?;
    let file_costs = CostsSection::load(costs_path)?.to_cost_rates()?;
    let costs = merge_costs(&log.metadata.rates, &file_costs);
    let reg = log.to_registration()?;
    let evaluation = evaluate_operation(&reg, &costs, DEFAULT_UNIT_INTERVAL)?;

    let report = OperationReport {
        u_p: None,
        t_s: reg.t_s(),
        t_f: reg.t_f(),
        quantities: reg.integrated_quantities(),
        summary: evaluation.summary,
    };
    write_atomic(report_path, &report.render(format))?;
    write_deployed_series(&sibling(report_path, "deployed.csv"), &evaluation.deployed)?;

    println!("report:  {}", report_path.display());
    Ok(())
}

/// Rates from the costs document take precedence; rates embedded in the log
/// metadata fill the remaining channels.
fn merge_costs(metadata: &CostRates, file: &CostRates) -> CostRates {
    let merge = |base: &BTreeMap<String, f64>, over: &BTreeMap<String, f64>| {
        let mut merged = base.clone();
        merged.extend(over.iter().map(|(k, v)| (k.clone(), *v)));
        merged
    };
    CostRates {
        input_rates: merge(&metadata.input_rates, &file.input_rates),
        output_rates: merge(&metadata.output_rates, &file.output_rates),
    }
}

fn collect_failures(outcomes: &[SweepOutcome]) -> Vec<SweepFailure> {
    outcomes
        .iter()
        .filter_map(|o| {
            o.result.as_ref().err().map(|e| SweepFailure {
                u_p: o.u_p,
                error: e.to_string(),
            })
        })
        .collect()
}
