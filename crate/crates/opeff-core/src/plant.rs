//! Batch fluid-heating plant simulator.
//!
//! One operation runs three strictly sequential phases:
//!
//! 1. **Fill** — a fixed batch of cold fluid enters at `fill_rate`
//!    (registered as the input channel `cold_fluid`).
//! 2. **Heat** — the heater runs at a commanded fraction `k_u` of its nominal
//!    power until the batch temperature reaches the setpoint. Energy drawn is
//!    registered as the input channel `energy`; heater wear accrues on the
//!    input channel `mechanism_wear` as the fraction of heater life consumed.
//! 3. **Discharge** — the heated batch leaves at `discharge_rate`
//!    (output channel `heated_fluid`).
//!
//! The batch temperature follows a lumped energy balance with an ambient
//! loss term,
//!
//! ```text
//! dT/dt = (efficiency * k_u * P_nominal - loss_coefficient * (T - T_ambient))
//!         / (heat_capacity_volumetric * batch_volume)
//! ```
//!
//! integrated with an explicit step of `dt`. Heating stops at the first step
//! where `T >= T_setpoint`, so the final temperature overshoots the setpoint
//! by at most one step's rise.
//!
//! Heater life shrinks with drive level as `T_n * k_u^(-alpha)`; while the
//! heater is energized, wear accrues at the reciprocal rate `k_u^alpha / T_n`
//! per time-unit. Wear enters the cost model as an ordinary input product
//! whose rate is the heater replacement cost.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::model::{Channel, ChannelRole, RegistrationModel};
use crate::num;
use crate::signal::{Signal, TimeGrid};
use crate::Result;

/// Product id of the cold-fluid input channel.
pub const COLD_FLUID: &str = "cold_fluid";
/// Product id of the energy input channel.
pub const ENERGY: &str = "energy";
/// Product id of the heater-wear input channel.
pub const MECHANISM_WEAR: &str = "mechanism_wear";
/// Product id of the heated-fluid output channel.
pub const HEATED_FLUID: &str = "heated_fluid";

/// Hard cap on simulation steps; a run that exceeds it aborts instead of
/// exhausting memory.
const MAX_STEPS: usize = 10_000_000;

/// Physical and numerical parameters of the heating plant.
///
/// Units are abstract but must be mutually consistent (e.g. hours, kWh, cbm,
/// degrees): power is energy per time-unit, `heat_capacity_volumetric` is
/// energy per (quantity x degree), `loss_coefficient` is energy per
/// (time-unit x degree).
#[derive(Debug, Clone, PartialEq)]
pub struct PlantConfig {
    /// Batch size processed per operation (quantity).
    pub batch_volume: f64,
    /// Temperature of the incoming cold fluid.
    pub t_inlet: f64,
    /// Target temperature; heating stops once the batch reaches it.
    pub t_setpoint: f64,
    /// Ambient temperature the loss term relaxes toward.
    pub t_ambient: f64,
    /// Energy to raise one quantity unit by one degree.
    pub heat_capacity_volumetric: f64,
    /// Fraction of drawn energy that reaches the fluid, in (0, 1].
    pub efficiency: f64,
    /// Heat lost per time-unit per degree above ambient; zero for a
    /// perfectly insulated tank.
    pub loss_coefficient: f64,
    /// Heater power draw at 100% drive (energy per time-unit).
    pub p_nominal: f64,
    /// Heater life at rated power (time-units).
    pub heater_life_nominal: f64,
    /// Wear-law exponent; life falls as drive^(-alpha).
    pub alpha: f64,
    /// Cold fluid feed rate during the fill phase (quantity per time-unit).
    pub fill_rate: f64,
    /// Heated fluid transfer rate during discharge (quantity per time-unit).
    pub discharge_rate: f64,
    /// Simulation step (time-units).
    pub dt: f64,
}

impl Default for PlantConfig {
    /// Reference configuration, hour/kWh/cbm flavored: a one-cbm batch
    /// heated from 10 to 60 degrees by a 12-unit heater with ambient losses,
    /// wear exponent 4, and a step small enough for the fastest drive to
    /// spend well over a thousand steps heating.
    fn default() -> Self {
        PlantConfig {
            batch_volume: 1.0,
            t_inlet: 10.0,
            t_setpoint: 60.0,
            t_ambient: 20.0,
            heat_capacity_volumetric: 1.163,
            efficiency: 0.9,
            loss_coefficient: 0.05,
            p_nominal: 12.0,
            heater_life_nominal: 10_000.0,
            alpha: 4.0,
            fill_rate: 2.0,
            discharge_rate: 4.0,
            dt: 0.005,
        }
    }
}

/// Cost rates matching the reference configuration: cheap fluid, mid-priced
/// energy, an expensive heater (wear is priced at replacement cost), and a
/// heated-fluid price that keeps the operation profitable across the whole
/// drive range.
pub fn reference_costs() -> crate::model::CostRates {
    let mut costs = crate::model::CostRates::default();
    costs.input_rates.insert(String::from(COLD_FLUID), 2.0);
    costs.input_rates.insert(String::from(ENERGY), 1.5);
    costs.input_rates.insert(String::from(MECHANISM_WEAR), 200_000.0);
    costs.output_rates.insert(String::from(HEATED_FLUID), 250.0);
    costs
}

impl PlantConfig {
    /// Checks the configuration invariants, naming the offending field.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("batch_volume", self.batch_volume),
            ("heat_capacity_volumetric", self.heat_capacity_volumetric),
            ("P_nominal", self.p_nominal),
            ("heater_life_nominal", self.heater_life_nominal),
            ("fill_rate", self.fill_rate),
            ("discharge_rate", self.discharge_rate),
            ("dt", self.dt),
        ];
        for (name, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::Argument(format!(
                    "`{name}` must be positive and finite, got {value}"
                )));
            }
        }
        if !(self.t_setpoint > self.t_inlet) {
            return Err(Error::Argument(format!(
                "`T_setpoint` ({}) must exceed `T_inlet` ({})",
                self.t_setpoint, self.t_inlet
            )));
        }
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(Error::Argument(format!(
                "`efficiency` must lie in (0, 1], got {}",
                self.efficiency
            )));
        }
        if !(self.loss_coefficient >= 0.0) {
            return Err(Error::Argument(format!(
                "`loss_coefficient` must be non-negative, got {}",
                self.loss_coefficient
            )));
        }
        if !(self.alpha >= 0.0) {
            return Err(Error::Argument(format!(
                "`alpha` must be non-negative, got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// Commanded heater drive, in percent of nominal power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlSetting {
    u_p: f64,
}

impl ControlSetting {
    /// Accepts drives in (0, 100].
    pub fn new(u_p: f64) -> Result<Self> {
        if !(u_p > 0.0 && u_p <= 100.0) {
            return Err(Error::Argument(format!(
                "`u_p` must lie in (0, 100], got {u_p}"
            )));
        }
        Ok(ControlSetting { u_p })
    }

    pub fn u_p(&self) -> f64 {
        self.u_p
    }

    /// Ratio of actual to nominal power, `k_u = u_p / 100`.
    pub fn k_u(&self) -> f64 {
        self.u_p / 100.0
    }
}

/// Heater life at drive ratio `k_u`: `T_n * k_u^(-alpha)`.
pub fn heater_life(k_u: f64, t_n: f64, alpha: f64) -> Result<f64> {
    if !(k_u > 0.0) {
        return Err(Error::Argument(format!(
            "drive ratio k_u must be positive, got {k_u}"
        )));
    }
    Ok(t_n * num::powf(k_u, -alpha))
}

/// Fraction of heater life consumed per time-unit while energized at drive
/// ratio `k_u`: the reciprocal of [`heater_life`], i.e. `k_u^alpha / T_n`.
pub fn wear_rate(k_u: f64, t_n: f64, alpha: f64) -> Result<f64> {
    Ok(1.0 / heater_life(k_u, t_n, alpha)?)
}

/// Simulates one batch heating operation and returns its registration model.
///
/// The registration grid starts at `t_s = 0` with step `cfg.dt`; `t_f` is the
/// end of the discharge phase. Fill and discharge consume a whole number of
/// steps with the last step's density reduced so the integrated volume equals
/// `batch_volume` exactly.
pub fn run_operation(cfg: &PlantConfig, u: ControlSetting) -> Result<RegistrationModel> {
    cfg.validate()?;
    let k_u = u.k_u();
    let heat_power = cfg.efficiency * k_u * cfg.p_nominal;
    let max_loss = cfg.loss_coefficient * (cfg.t_setpoint - cfg.t_ambient);
    if heat_power <= max_loss {
        return Err(Error::Simulation(format!(
            "setpoint unreachable at u_p={}: effective heating power {heat_power} does not \
             exceed the loss {max_loss} at the setpoint",
            u.u_p()
        )));
    }

    let dt = cfg.dt;
    let thermal_mass = cfg.heat_capacity_volumetric * cfg.batch_volume;

    let (n_fill, fill_density) = phase_steps(cfg.batch_volume, cfg.fill_rate, dt)?;

    // Explicit integration of the lumped energy balance.
    let mut temperature = cfg.t_inlet;
    let mut n_heat = 0usize;
    while temperature < cfg.t_setpoint {
        let net_power =
            heat_power - cfg.loss_coefficient * (temperature - cfg.t_ambient);
        temperature += dt * net_power / thermal_mass;
        n_heat += 1;
        if n_heat > MAX_STEPS {
            return Err(Error::Simulation(format!(
                "heating did not reach the setpoint within {MAX_STEPS} steps; \
                 increase dt or the heater drive"
            )));
        }
    }
    let wear = wear_rate(k_u, cfg.heater_life_nominal, cfg.alpha)?;

    let (n_discharge, discharge_density) =
        phase_steps(cfg.batch_volume, cfg.discharge_rate, dt)?;

    let n_total = n_fill + n_heat + n_discharge;
    if n_total > MAX_STEPS {
        return Err(Error::Simulation(format!(
            "operation needs {n_total} steps, more than the supported {MAX_STEPS}"
        )));
    }
    let grid = TimeGrid::new(0.0, dt, n_total)?;
    let t_f = grid.end();

    let mut rq_w = vec![0.0; n_total];
    rq_w[..n_fill].copy_from_slice(&fill_density);
    let mut rq_p = vec![0.0; n_total];
    let mut rq_m = vec![0.0; n_total];
    for k in n_fill..n_fill + n_heat {
        rq_p[k] = k_u * cfg.p_nominal;
        rq_m[k] = wear;
    }
    let mut pq_w = vec![0.0; n_total];
    pq_w[n_fill + n_heat..].copy_from_slice(&discharge_density);

    let channel = |role: ChannelRole, density: Vec<f64>| -> Result<Channel> {
        Ok(Channel {
            role,
            quantity: Signal::new(grid.clone(), density, Vec::new())?,
        })
    };
    RegistrationModel::new(
        vec![
            channel(ChannelRole::input(COLD_FLUID), rq_w)?,
            channel(ChannelRole::input(ENERGY), rq_p)?,
            channel(ChannelRole::input(MECHANISM_WEAR), rq_m)?,
            channel(ChannelRole::output(HEATED_FLUID), pq_w)?,
        ],
        0.0,
        t_f,
    )
}

/// Step count and per-step densities for moving `volume` at `rate`, with the
/// final step carrying the fractional remainder so the total is exact.
fn phase_steps(volume: f64, rate: f64, dt: f64) -> Result<(usize, Vec<f64>)> {
    let exact = volume / rate / dt;
    if !exact.is_finite() || exact > MAX_STEPS as f64 {
        return Err(Error::Simulation(format!(
            "transfer phase needs {exact} steps, more than the supported {MAX_STEPS}"
        )));
    }
    // A duration within snapping slack of a whole number of steps counts as
    // whole; otherwise one extra partial step finishes the phase.
    let whole = num::floor(exact + 1e-9) as usize;
    let full_mass = rate * dt * whole as f64;
    let remainder = volume - full_mass;
    let mut density = vec![rate; whole];
    if remainder > 0.0 {
        density.push(remainder / dt);
    }
    Ok((density.len(), density))
}
