//! Control-parameter sweep over the heating plant.
//!
//! Runs one operation per drive setting, builds the full model chain for
//! each, and selects the most efficient operation under a chosen criterion.
//! A grid sweep mirrors how such experiments are tabulated; an optional
//! refinement pass halves the grid step around the incumbent a fixed number
//! of times.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::Error;
use crate::indices::{evaluate_operation, OperationSummary};
use crate::model::{ChannelRole, CostRates};
use crate::plant::{run_operation, ControlSetting, PlantConfig};
use crate::Result;

/// Number of rounds the refinement pass performs.
pub const REFINE_ROUNDS: usize = 3;

/// One row of the sweep table: the drive setting, the integrated natural
/// quantities of every channel, and the operation summary (totals plus both
/// indices).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub u_p: f64,
    pub quantities: BTreeMap<ChannelRole, f64>,
    pub summary: OperationSummary,
}

/// Result of evaluating a single drive setting; failed settings are
/// reported, not dropped.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub u_p: f64,
    pub result: core::result::Result<SweepRecord, Error>,
}

/// Ranking criterion for [`select_optimal`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    /// Highest efficiency index F (the default tool).
    MaxF,
    /// Highest conditional return R.
    MaxR,
    /// Lowest total input cost RE.
    MinRe,
    /// Shortest operation time.
    MinTop,
}

impl Criterion {
    pub const ALL: [Criterion; 4] =
        [Criterion::MaxF, Criterion::MaxR, Criterion::MinRe, Criterion::MinTop];

    pub fn name(self) -> &'static str {
        match self {
            Criterion::MaxF => "max_F",
            Criterion::MaxR => "max_R",
            Criterion::MinRe => "min_RE",
            Criterion::MinTop => "min_Top",
        }
    }

    /// Score to maximize; minimizing criteria negate their field.
    fn score(self, record: &SweepRecord) -> f64 {
        match self {
            Criterion::MaxF => record.summary.f,
            Criterion::MaxR => record.summary.r,
            Criterion::MinRe => -record.summary.re,
            Criterion::MinTop => -record.summary.top,
        }
    }
}

impl core::str::FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max_F" => Ok(Criterion::MaxF),
            "max_R" => Ok(Criterion::MaxR),
            "min_RE" => Ok(Criterion::MinRe),
            "min_Top" => Ok(Criterion::MinTop),
            other => Err(Error::Argument(format!(
                "unknown criterion `{other}` (expected max_F, max_R, min_RE or min_Top)"
            ))),
        }
    }
}

/// Evaluates one drive setting through the full chain.
pub fn evaluate_setting(
    cfg: &PlantConfig,
    costs: &CostRates,
    u_p: f64,
    unit_interval: f64,
) -> core::result::Result<SweepRecord, Error> {
    let setting = ControlSetting::new(u_p)?;
    let reg = run_operation(cfg, setting)?;
    let evaluation = evaluate_operation(&reg, costs, unit_interval)?;
    Ok(SweepRecord {
        u_p,
        quantities: reg.integrated_quantities(),
        summary: evaluation.summary,
    })
}

/// Runs the plant once per drive value and returns one outcome per value, in
/// input order. Drive values must be strictly increasing and in (0, 100].
/// Individual settings may fail (e.g. unreachable setpoint) without aborting
/// the sweep; only a sweep in which every setting failed is an error.
pub fn sweep(
    cfg: &PlantConfig,
    costs: &CostRates,
    u_values: &[f64],
    unit_interval: f64,
) -> Result<Vec<SweepOutcome>> {
    if u_values.is_empty() {
        return Err(Error::Argument(String::from(
            "sweep needs at least one drive value",
        )));
    }
    for pair in u_values.windows(2) {
        if !(pair[0] < pair[1]) {
            return Err(Error::Argument(format!(
                "drive values must be strictly increasing, got {} before {}",
                pair[0], pair[1]
            )));
        }
    }
    for &u in u_values {
        if !(u > 0.0 && u <= 100.0) {
            return Err(Error::Argument(format!(
                "`u_p` values must lie in (0, 100], got {u}"
            )));
        }
    }
    let outcomes: Vec<SweepOutcome> = u_values
        .iter()
        .map(|&u_p| SweepOutcome {
            u_p,
            result: evaluate_setting(cfg, costs, u_p, unit_interval),
        })
        .collect();
    if outcomes.iter().all(|o| o.result.is_err()) {
        return Err(Error::Simulation(String::from(
            "every sweep setting failed; check the plant configuration",
        )));
    }
    Ok(outcomes)
}

/// Picks the best record under `criterion`; ties go to the smaller drive
/// (less stress on the mechanism at equal value).
pub fn select_optimal(
    records: &[SweepRecord],
    criterion: Criterion,
) -> Result<&SweepRecord> {
    let mut best = records.first().ok_or_else(|| {
        Error::Argument(String::from("cannot select from an empty record set"))
    })?;
    let mut best_score = criterion.score(best);
    for record in &records[1..] {
        let score = criterion.score(record);
        if score > best_score || (score == best_score && record.u_p < best.u_p) {
            best = record;
            best_score = score;
        }
    }
    Ok(best)
}

/// Refinement pass: starting from the outcomes of a grid sweep, halve the
/// grid step around the incumbent optimum and re-evaluate, for
/// [`REFINE_ROUNDS`] rounds. Returns the merged outcome list, still ordered
/// by drive value.
pub fn refine(
    cfg: &PlantConfig,
    costs: &CostRates,
    mut outcomes: Vec<SweepOutcome>,
    criterion: Criterion,
    unit_interval: f64,
) -> Result<Vec<SweepOutcome>> {
    let mut step = initial_step(&outcomes);
    for _ in 0..REFINE_ROUNDS {
        step /= 2.0;
        if !(step > 0.0) {
            break;
        }
        let records: Vec<SweepRecord> = outcomes
            .iter()
            .filter_map(|o| o.result.as_ref().ok().cloned())
            .collect();
        let incumbent = select_optimal(&records, criterion)?.u_p;
        for candidate in [incumbent - step, incumbent + step] {
            if !(candidate > 0.0 && candidate <= 100.0) {
                continue;
            }
            if outcomes
                .iter()
                .any(|o| (o.u_p - candidate).abs() <= 1e-9 * candidate.max(1.0))
            {
                continue;
            }
            let outcome = SweepOutcome {
                u_p: candidate,
                result: evaluate_setting(cfg, costs, candidate, unit_interval),
            };
            let at = outcomes.partition_point(|o| o.u_p < candidate);
            outcomes.insert(at, outcome);
        }
    }
    Ok(outcomes)
}

/// Smallest gap between adjacent drive values of the original grid.
fn initial_step(outcomes: &[SweepOutcome]) -> f64 {
    outcomes
        .windows(2)
        .map(|w| w[1].u_p - w[0].u_p)
        .fold(f64::INFINITY, f64::min)
}

/// The successful records of a sweep, in drive order.
pub fn successful(outcomes: &[SweepOutcome]) -> Vec<SweepRecord> {
    outcomes
        .iter()
        .filter_map(|o| o.result.as_ref().ok().cloned())
        .collect()
}
