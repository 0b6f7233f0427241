//! Run configuration and cost-rate documents (TOML).
//!
//! Unknown keys are rejected so that typos surface instead of silently
//! falling back to defaults.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use opeff_core::model::CostRates;
use opeff_core::plant::PlantConfig;

use crate::error::{CliError, CliResult};

/// Top-level run configuration: the plant, the cost rates, the optional
/// sweep grid, and the unit interval the index F integrates over.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigDocument {
    pub plant: PlantSection,
    pub costs: CostsSection,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    #[serde(default = "default_unit_interval")]
    pub f_unit_interval: f64,
}

fn default_unit_interval() -> f64 {
    opeff_core::indices::DEFAULT_UNIT_INTERVAL
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantSection {
    pub batch_volume: f64,
    #[serde(rename = "T_inlet")]
    pub t_inlet: f64,
    #[serde(rename = "T_setpoint")]
    pub t_setpoint: f64,
    #[serde(rename = "T_ambient")]
    pub t_ambient: f64,
    pub heat_capacity_volumetric: f64,
    pub efficiency: f64,
    pub loss_coefficient: f64,
    #[serde(rename = "P_nominal")]
    pub p_nominal: f64,
    pub heater_life_nominal: f64,
    pub alpha: f64,
    pub fill_rate: f64,
    pub discharge_rate: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostsSection {
    #[serde(default)]
    pub input_rates: BTreeMap<String, f64>,
    #[serde(default)]
    pub output_rates: BTreeMap<String, f64>,
}

/// Sweep grid in percent of nominal power: `u_from`, `u_from + u_step`, ...
/// up to `u_to` inclusive.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub u_from: f64,
    pub u_to: f64,
    pub u_step: f64,
}

impl RunConfigDocument {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let doc: RunConfigDocument = toml::from_str(&text).map_err(|e| {
            CliError::Validation(format!("invalid config `{}`: {e}", path.display()))
        })?;
        doc.validate()?;
        Ok(doc)
    }

    fn validate(&self) -> CliResult<()> {
        let plant = self.plant.to_plant_config();
        plant.validate().map_err(CliError::from)?;
        let costs = self.costs.to_cost_rates()?;
        costs.validate().map_err(CliError::from)?;
        if !(self.f_unit_interval > 0.0) {
            return Err(CliError::Validation(format!(
                "`f_unit_interval` must be positive, got {}",
                self.f_unit_interval
            )));
        }
        if let Some(sweep) = &self.sweep {
            sweep.u_values()?;
        }
        Ok(())
    }

    pub fn plant_config(&self) -> PlantConfig {
        self.plant.to_plant_config()
    }

    pub fn cost_rates(&self) -> CliResult<CostRates> {
        self.costs.to_cost_rates()
    }
}

impl PlantSection {
    fn to_plant_config(&self) -> PlantConfig {
        PlantConfig {
            batch_volume: self.batch_volume,
            t_inlet: self.t_inlet,
            t_setpoint: self.t_setpoint,
            t_ambient: self.t_ambient,
            heat_capacity_volumetric: self.heat_capacity_volumetric,
            efficiency: self.efficiency,
            loss_coefficient: self.loss_coefficient,
            p_nominal: self.p_nominal,
            heater_life_nominal: self.heater_life_nominal,
            alpha: self.alpha,
            fill_rate: self.fill_rate,
            discharge_rate: self.discharge_rate,
            dt: self.dt,
        }
    }
}

impl CostsSection {
    pub fn to_cost_rates(&self) -> CliResult<CostRates> {
        for id in self.input_rates.keys().chain(self.output_rates.keys()) {
            validate_product_id(id)?;
        }
        Ok(CostRates {
            input_rates: self.input_rates.clone(),
            output_rates: self.output_rates.clone(),
        })
    }

    /// Loads a standalone costs document (`[input_rates]` / `[output_rates]`
    /// tables).
    pub fn load(path: &Path) -> CliResult<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| {
            CliError::Validation(format!("invalid costs `{}`: {e}", path.display()))
        })
    }
}

impl SweepSection {
    /// Expands the grid, validating bounds and step.
    pub fn u_values(&self) -> CliResult<Vec<f64>> {
        if !(self.u_step > 0.0) {
            return Err(CliError::Validation(format!(
                "`u_step` must be positive, got {}",
                self.u_step
            )));
        }
        if self.u_to < self.u_from {
            return Err(CliError::Validation(format!(
                "`u_to` ({}) must not precede `u_from` ({})",
                self.u_to, self.u_from
            )));
        }
        let mut values = Vec::new();
        let mut k = 0u32;
        loop {
            let u = self.u_from + f64::from(k) * self.u_step;
            if u > self.u_to + 1e-9 * self.u_step {
                break;
            }
            values.push(u.min(self.u_to));
            k += 1;
        }
        for &u in &values {
            if !(u > 0.0 && u <= 100.0) {
                return Err(CliError::Validation(format!(
                    "sweep grid leaves (0, 100]: `u_p` value {u}"
                )));
            }
        }
        Ok(values)
    }
}

/// Product ids appear in CSV column names (`in:<id>`), so they are limited
/// to ASCII alphanumerics and underscores.
pub fn validate_product_id(id: &str) -> CliResult<()> {
    let ok = !id.is_empty()
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_');
    if ok {
        Ok(())
    } else {
        Err(CliError::Validation(format!(
            "product id `{id}` must be non-empty ASCII alphanumerics or `_`"
        )))
    }
}
