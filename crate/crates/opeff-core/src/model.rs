//! The operation model hierarchy: registration → reduced → simplified →
//! deployed.
//!
//! A registration model is the raw record of one operation: every significant
//! input and output product as a non-negative flow-rate signal, bounded by
//! the operation start `t_s` and physical completion `t_f`. Reduction scales
//! each channel by its cost rate and merges the channels into one input
//! stream `re(t)` and one output stream `pe(t)`. Simplification compresses
//! those streams to two impulses, `RE` at `t_s` and `PE` at `t_f`.
//! Deployment integrates the streams into cumulative flows and splits the
//! result into a closed flow `ibe(t)` (resources committed and released by
//! `t_f`) and an open flow `ide(t)` (the settled surplus `PE − RE`).
//!
//! Sign convention: inputs integrate negatively, outputs positively, so the
//! combined cumulative flow `ice(t)` of a running operation sits in the
//! negative half-plane until the output lands.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::Error;
use crate::signal::{sum_signals, CumulativeSignal, Sign, Signal, TimeGrid};
use crate::Result;

/// Relative tolerance for the settled-tail check in [`decompose`].
const SETTLED_TOL: f64 = 1e-9;

/// Whether a channel feeds the operation or is produced by it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    Input,
    Output,
}

impl Direction {
    /// Short tag used in column names and reports: `in` or `out`.
    pub fn tag(self) -> &'static str {
        match self {
            Direction::Input => "in",
            Direction::Output => "out",
        }
    }
}

/// Identity of one product channel of an operation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChannelRole {
    pub direction: Direction,
    pub product_id: String,
}

impl ChannelRole {
    pub fn input(product_id: impl Into<String>) -> Self {
        ChannelRole { direction: Direction::Input, product_id: product_id.into() }
    }

    pub fn output(product_id: impl Into<String>) -> Self {
        ChannelRole { direction: Direction::Output, product_id: product_id.into() }
    }
}

/// One registered product channel: its role and its quantity signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub role: ChannelRole,
    pub quantity: Signal,
}

/// The raw operation record: per-channel quantity signals plus the operation
/// window `[t_s, t_f]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegistrationModel {
    channels: Vec<Channel>,
    t_s: f64,
    t_f: f64,
}

impl RegistrationModel {
    /// Validates and assembles a registration model.
    ///
    /// Requirements: at least one channel; `t_s < t_f`; all channel signals
    /// on one grid that covers `[t_s, t_f]`; non-negative densities and
    /// impulse masses (registration signals are magnitudes); and no two
    /// channels sharing a direction and product id.
    pub fn new(channels: Vec<Channel>, t_s: f64, t_f: f64) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::Argument(String::from(
                "a registration model needs at least one channel",
            )));
        }
        if !(t_s < t_f) {
            return Err(Error::Argument(format!(
                "operation start t_s={t_s} must precede completion t_f={t_f}"
            )));
        }
        let grid = channels[0].quantity.grid().clone();
        let slack = 1e-9 * grid.dt();
        if grid.t_start() > t_s + slack || grid.end() < t_f - slack {
            return Err(Error::Argument(format!(
                "grid [{}, {}] does not cover the operation window [{t_s}, {t_f}]",
                grid.t_start(),
                grid.end()
            )));
        }
        let mut seen: BTreeMap<(Direction, &str), ()> = BTreeMap::new();
        for ch in &channels {
            if *ch.quantity.grid() != grid {
                return Err(Error::GridMismatch(format!(
                    "channel `{}` is not on the shared grid",
                    ch.role.product_id
                )));
            }
            if ch.quantity.density().iter().any(|&d| d < 0.0)
                || ch.quantity.impulses().iter().any(|i| i.mass < 0.0)
            {
                return Err(Error::Argument(format!(
                    "channel `{}` has negative quantities; registration signals are magnitudes",
                    ch.role.product_id
                )));
            }
            if seen
                .insert((ch.role.direction, ch.role.product_id.as_str()), ())
                .is_some()
            {
                return Err(Error::Argument(format!(
                    "duplicate {} channel `{}`",
                    ch.role.direction.tag(),
                    ch.role.product_id
                )));
            }
        }
        Ok(RegistrationModel { channels, t_s, t_f })
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn grid(&self) -> &TimeGrid {
        self.channels[0].quantity.grid()
    }

    pub fn t_s(&self) -> f64 {
        self.t_s
    }

    pub fn t_f(&self) -> f64 {
        self.t_f
    }

    /// Channels feeding the operation.
    pub fn inputs(&self) -> impl Iterator<Item = &Channel> {
        self.channels
            .iter()
            .filter(|c| c.role.direction == Direction::Input)
    }

    /// Channels produced by the operation.
    pub fn outputs(&self) -> impl Iterator<Item = &Channel> {
        self.channels
            .iter()
            .filter(|c| c.role.direction == Direction::Output)
    }

    /// Integrated natural quantity of every channel over `[t_s, t_f]`.
    pub fn integrated_quantities(&self) -> BTreeMap<ChannelRole, f64> {
        self.channels
            .iter()
            .map(|ch| {
                let total = ch
                    .quantity
                    .integral_between(self.t_s, self.t_f)
                    .expect("t_s < t_f by construction");
                (ch.role.clone(), total)
            })
            .collect()
    }
}

/// Cost (or expert) rates per quantity unit, keyed by product id and side.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CostRates {
    pub input_rates: BTreeMap<String, f64>,
    pub output_rates: BTreeMap<String, f64>,
}

impl CostRates {
    /// Checks that every rate is non-negative.
    pub fn validate(&self) -> Result<()> {
        for (id, &rate) in self.input_rates.iter().chain(&self.output_rates) {
            if !(rate >= 0.0) {
                return Err(Error::Argument(format!(
                    "cost rate for `{id}` must be non-negative, got {rate}"
                )));
            }
        }
        Ok(())
    }

    /// Rate applying to the given channel, if configured.
    pub fn rate_for(&self, role: &ChannelRole) -> Option<f64> {
        match role.direction {
            Direction::Input => self.input_rates.get(&role.product_id).copied(),
            Direction::Output => self.output_rates.get(&role.product_id).copied(),
        }
    }

    /// All rates multiplied by `c`. Indices R and F are ratios of currencies,
    /// so this must leave them unchanged; tests rely on that.
    pub fn scaled(&self, c: f64) -> CostRates {
        CostRates {
            input_rates: self
                .input_rates
                .iter()
                .map(|(k, v)| (k.clone(), v * c))
                .collect(),
            output_rates: self
                .output_rates
                .iter()
                .map(|(k, v)| (k.clone(), v * c))
                .collect(),
        }
    }
}

/// The cost-comparable form of an operation: aggregate input cost rate
/// `re(t)` and output cost rate `pe(t)` (currency per time-unit).
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedModel {
    re: Signal,
    pe: Signal,
    t_s: f64,
    t_f: f64,
}

impl ReducedModel {
    pub fn new(re: Signal, pe: Signal, t_s: f64, t_f: f64) -> Result<Self> {
        if re.grid() != pe.grid() {
            return Err(Error::GridMismatch(String::from(
                "re and pe must share one grid",
            )));
        }
        if !(t_s < t_f) {
            return Err(Error::Argument(format!(
                "operation start t_s={t_s} must precede completion t_f={t_f}"
            )));
        }
        Ok(ReducedModel { re, pe, t_s, t_f })
    }

    /// Aggregate input cost-rate stream.
    pub fn re(&self) -> &Signal {
        &self.re
    }

    /// Aggregate output cost-rate stream.
    pub fn pe(&self) -> &Signal {
        &self.pe
    }

    pub fn t_s(&self) -> f64 {
        self.t_s
    }

    pub fn t_f(&self) -> f64 {
        self.t_f
    }
}

/// Scales one quantity signal by its cost rate, producing a cost-rate stream.
pub fn reduce_channel(rq: &Signal, rate: f64) -> Result<Signal> {
    if !(rate >= 0.0) {
        return Err(Error::Argument(format!(
            "cost rate must be non-negative, got {rate}"
        )));
    }
    Ok(rq.scale(rate))
}

/// Reduces a registration model to comparable values: every channel scaled by
/// its cost rate, inputs merged into `re(t)` and outputs into `pe(t)`.
///
/// Every channel must have a rate in `costs`; a missing one is reported by
/// product id.
pub fn reduce(reg: &RegistrationModel, costs: &CostRates) -> Result<ReducedModel> {
    costs.validate()?;
    let mut re_parts = Vec::new();
    let mut pe_parts = Vec::new();
    for ch in reg.channels() {
        let rate = costs
            .rate_for(&ch.role)
            .ok_or_else(|| Error::MissingCostRate {
                product_id: ch.role.product_id.clone(),
            })?;
        let scaled = reduce_channel(&ch.quantity, rate)?;
        match ch.role.direction {
            Direction::Input => re_parts.push(scaled),
            Direction::Output => pe_parts.push(scaled),
        }
    }
    let grid = reg.grid().clone();
    let re = if re_parts.is_empty() {
        Signal::zero(grid.clone())
    } else {
        sum_signals(&re_parts)?
    };
    let pe = if pe_parts.is_empty() {
        Signal::zero(grid)
    } else {
        sum_signals(&pe_parts)?
    };
    ReducedModel::new(re, pe, reg.t_s(), reg.t_f())
}

/// The reduced model compressed to totals: input cost `RE` (conceptually an
/// impulse at `t_s`), output cost `PE` (an impulse at `t_f`), and the
/// operation window. Together with `Top = t_f − t_s` this is the triple the
/// indices work on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplifiedModel {
    input_cost: f64,
    output_cost: f64,
    t_s: f64,
    t_f: f64,
}

impl SimplifiedModel {
    pub fn new(output_cost: f64, input_cost: f64, t_s: f64, t_f: f64) -> Result<Self> {
        if !(input_cost >= 0.0) || !(output_cost >= 0.0) {
            return Err(Error::Argument(format!(
                "cost totals must be non-negative, got RE={input_cost}, PE={output_cost}"
            )));
        }
        if !(t_s < t_f) {
            return Err(Error::Argument(format!(
                "operation start t_s={t_s} must precede completion t_f={t_f}"
            )));
        }
        Ok(SimplifiedModel { input_cost, output_cost, t_s, t_f })
    }

    /// Total input cost estimate `RE`.
    pub fn input_cost(&self) -> f64 {
        self.input_cost
    }

    /// Total output cost estimate `PE`.
    pub fn output_cost(&self) -> f64 {
        self.output_cost
    }

    pub fn t_s(&self) -> f64 {
        self.t_s
    }

    pub fn t_f(&self) -> f64 {
        self.t_f
    }

    /// Operation time `Top = t_f − t_s`.
    pub fn duration(&self) -> f64 {
        self.t_f - self.t_s
    }

    /// The impulse streams `re*(t)` and `pe*(t)` realizing this model on a
    /// grid: the full input cost lands at `t_s`, the full output cost at
    /// `t_f`. The grid must contain both times.
    pub fn impulse_signals(&self, grid: &TimeGrid) -> Result<(Signal, Signal)> {
        let re = Signal::impulse(self.input_cost, self.t_s, grid.clone())?;
        let pe = Signal::impulse(self.output_cost, self.t_f, grid.clone())?;
        Ok((re, pe))
    }
}

/// Compresses a reduced model to its cost totals over `[t_s, t_f]`.
pub fn simplify(red: &ReducedModel) -> SimplifiedModel {
    let input_cost = red
        .re()
        .integral_between(red.t_s(), red.t_f())
        .expect("t_s < t_f by construction");
    let output_cost = red
        .pe()
        .integral_between(red.t_s(), red.t_f())
        .expect("t_s < t_f by construction");
    SimplifiedModel {
        input_cost,
        output_cost,
        t_s: red.t_s(),
        t_f: red.t_f(),
    }
}

/// The integrated view of an operation: cumulative input flow `ire(t) <= 0`,
/// cumulative output flow `ipe(t) >= 0`, their sum `ice(t)`, and the
/// decomposition of `ice` into the closed flow `ibe(t)` and the open (target)
/// flow `ide(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeployedModel {
    ire: CumulativeSignal,
    ipe: CumulativeSignal,
    ice: CumulativeSignal,
    ibe: CumulativeSignal,
    ide: CumulativeSignal,
    t_s: f64,
    t_f: f64,
}

impl DeployedModel {
    pub fn ire(&self) -> &CumulativeSignal {
        &self.ire
    }

    pub fn ipe(&self) -> &CumulativeSignal {
        &self.ipe
    }

    /// Combined cumulative cost flow `ice = ire + ipe`.
    pub fn ice(&self) -> &CumulativeSignal {
        &self.ice
    }

    /// Closed flow: the part of `ice` that returns to zero by `t_f`.
    pub fn ibe(&self) -> &CumulativeSignal {
        &self.ibe
    }

    /// Open flow: the settled surplus `PE − RE`, appearing at `t_f`.
    pub fn ide(&self) -> &CumulativeSignal {
        &self.ide
    }

    pub fn t_s(&self) -> f64 {
        self.t_s
    }

    pub fn t_f(&self) -> f64 {
        self.t_f
    }

    /// Operation time `Top = t_f − t_s`.
    pub fn duration(&self) -> f64 {
        self.t_f - self.t_s
    }
}

/// Deploys cost-rate streams into the cumulative view.
///
/// `re` and `pe` must be non-negative (cost rates are magnitudes; the sign
/// convention enters through the integration) and share one grid covering
/// `[t_s, t_f]`; the operation must be settled by `t_f` (no mass after it),
/// otherwise a model error is raised. Integration past `t_f` — the tail the
/// index F reads — is covered by the boundary hold of cumulative signals, so
/// the grid may end exactly at `t_f`.
pub fn deploy(re: &Signal, pe: &Signal, t_s: f64, t_f: f64) -> Result<DeployedModel> {
    if re.grid() != pe.grid() {
        return Err(Error::GridMismatch(String::from(
            "re and pe must share one grid",
        )));
    }
    if !(t_s < t_f) {
        return Err(Error::Argument(format!(
            "operation start t_s={t_s} must precede completion t_f={t_f}"
        )));
    }
    for (name, stream) in [("re", re), ("pe", pe)] {
        if stream.density().iter().any(|&d| d < 0.0)
            || stream.impulses().iter().any(|i| i.mass < 0.0)
        {
            return Err(Error::Argument(format!(
                "{name} carries negative values; cost-rate streams are magnitudes"
            )));
        }
    }
    let grid = re.grid();
    let slack = 1e-9 * grid.dt();
    if grid.t_start() > t_s + slack || grid.end() < t_f - slack {
        return Err(Error::Argument(format!(
            "grid [{}, {}] too short for the operation window [{t_s}, {t_f}]",
            grid.t_start(),
            grid.end()
        )));
    }
    let ire = re.integrate_cumulative(Sign::Negative);
    let ipe = pe.integrate_cumulative(Sign::Positive);
    let ice = ire.add(&ipe)?;
    let (ibe, ide) = decompose(&ice, t_f)?;
    Ok(DeployedModel { ire, ipe, ice, ibe, ide, t_s, t_f })
}

/// Splits a settled cumulative flow at `t_f` into the closed and open parts.
///
/// The open flow `ide` is a step of height `D` (the settled level of `ice` at
/// and after `t_f`) located at `t_f`; the closed flow `ibe` is the remainder
/// `ice − ide`. A tail that is not constant within `1e-9` (relative) of the
/// settled level means the operation has not physically completed and is
/// rejected.
pub fn decompose(
    ice: &CumulativeSignal,
    t_f: f64,
) -> Result<(CumulativeSignal, CumulativeSignal)> {
    if ice.is_empty() {
        return Ok((ice.clone(), ice.clone()));
    }
    let grid = ice.grid().clone();
    let n = ice.values().len();
    let k_step = grid.index_at_or_after(t_f);
    if k_step >= n {
        return Err(Error::Model(format!(
            "cumulative flow ends at t={} before the completion time t_f={t_f}",
            grid.time(n - 1)
        )));
    }
    let settled = ice.final_value();
    let tol = SETTLED_TOL * settled.abs().max(1.0);
    for (k, &v) in ice.values().iter().enumerate().skip(k_step) {
        if (v - settled).abs() > tol {
            return Err(Error::Model(format!(
                "flow not settled after t_f={t_f}: value {v} at t={} differs from the \
                 settled level {settled}",
                grid.time(k)
            )));
        }
    }
    let ide_values: Vec<f64> = (0..n)
        .map(|k| if k >= k_step { settled } else { 0.0 })
        .collect();
    let ide = CumulativeSignal::new(grid, ide_values)?;
    let ibe = ice.sub(&ide)?;
    Ok((ibe, ide))
}

/// The quantitative (uncosted) deployed flow of a displacement-style
/// operation: how much product is bound inside the process at each instant,
/// seen from the outside (hence negative while bound).
pub fn tight_resource_flow(rq: &Signal, pq: &Signal) -> Result<CumulativeSignal> {
    if rq.grid() != pq.grid() {
        return Err(Error::GridMismatch(String::from(
            "rq and pq must share one grid",
        )));
    }
    let irq = rq.integrate_cumulative(Sign::Negative);
    let ipq = pq.integrate_cumulative(Sign::Positive);
    irq.add(&ipq)
}
