//! Tabular signal logs: the on-disk form of a registration model.
//!
//! Plain CSV with one time column and one flow-rate density column per
//! channel:
//!
//! ```text
//! # t_s = 0
//! # t_f = 10.05
//! # rate:in:cold_fluid = 2
//! t,in:cold_fluid,in:energy,out:heated_fluid
//! 0,2,0,0
//! 0.005,2,0,0
//! ```
//!
//! Leading `#` lines form an optional metadata block: `t_s` and `t_f`
//! override the detected operation window, and `rate:in:<id>` /
//! `rate:out:<id>` carry cost rates alongside the data. `#` lines that are
//! not `key = value` pairs with a known key are plain comments.
//!
//! Without overrides, the operation window is detected from the data: `t_s`
//! is the first time any channel flows, `t_f` the end of the last slot in
//! which an output channel flows (densities above `1e-12` count as flow).
//!
//! Timestamps must be strictly increasing with a uniform step (to `1e-9`
//! relative); densities must be non-negative. Numbers are written in Rust's
//! shortest round-trip form, so a written log re-reads bit-exactly.

use std::fmt::Write as _;
use std::path::Path;

use opeff_core::model::{Channel, ChannelRole, CostRates, Direction, RegistrationModel};
use opeff_core::signal::{Signal, TimeGrid};

use crate::config::validate_product_id;
use crate::error::{CliError, CliResult};
use crate::report::write_atomic;

/// Densities at or below this threshold count as "no flow" when detecting
/// the operation window.
pub const ZERO_DENSITY_TOL: f64 = 1e-12;

/// Metadata block of a signal log.
#[derive(Debug, Clone, Default)]
pub struct LogMetadata {
    pub t_s: Option<f64>,
    pub t_f: Option<f64>,
    pub rates: CostRates,
}

/// A parsed signal log: the sampling grid, one density column per channel,
/// and the metadata block.
#[derive(Debug, Clone)]
pub struct SignalLog {
    pub grid: TimeGrid,
    pub channels: Vec<(ChannelRole, Vec<f64>)>,
    pub metadata: LogMetadata,
}

impl SignalLog {
    /// Builds the registration model, applying the window overrides or the
    /// detection rules.
    pub fn to_registration(&self) -> CliResult<RegistrationModel> {
        let dt = self.grid.dt();
        let n = self.grid.n_samples();

        let t_s = match self.metadata.t_s {
            Some(t) => t,
            None => {
                let first = (0..n).find(|&k| {
                    self.channels
                        .iter()
                        .any(|(_, density)| density[k] > ZERO_DENSITY_TOL)
                });
                match first {
                    Some(k) => self.grid.time(k),
                    None => {
                        return Err(CliError::Validation(String::from(
                            "no channel ever flows; cannot detect t_s (add a `# t_s = ...` \
                             override)",
                        )))
                    }
                }
            }
        };
        let t_f = match self.metadata.t_f {
            Some(t) => t,
            None => {
                let last = (0..n).rev().find(|&k| {
                    self.channels.iter().any(|(role, density)| {
                        role.direction == Direction::Output && density[k] > ZERO_DENSITY_TOL
                    })
                });
                match last {
                    Some(k) => self.grid.time(k) + dt,
                    None => {
                        return Err(CliError::Validation(String::from(
                            "no output channel ever flows; cannot detect t_f (add a \
                             `# t_f = ...` override)",
                        )))
                    }
                }
            }
        };

        let channels = self
            .channels
            .iter()
            .map(|(role, density)| {
                Ok(Channel {
                    role: role.clone(),
                    quantity: Signal::new(self.grid.clone(), density.clone(), Vec::new())?,
                })
            })
            .collect::<Result<Vec<_>, opeff_core::Error>>()?;
        RegistrationModel::new(channels, t_s, t_f).map_err(CliError::from)
    }
}

/// Writes a registration model as a signal log. The channel columns are
/// ordered inputs-then-outputs, alphabetically within each side; cost rates
/// covering the channels are embedded in the metadata block.
pub fn write_signal_log(
    path: &Path,
    reg: &RegistrationModel,
    rates: &CostRates,
) -> CliResult<()> {
    let mut channels: Vec<&Channel> = reg.channels().iter().collect();
    channels.sort_by(|a, b| a.role.cmp(&b.role));
    for ch in &channels {
        if !ch.quantity.impulses().is_empty() {
            return Err(CliError::Validation(format!(
                "channel `{}` carries impulses; signal logs hold densities only",
                ch.role.product_id
            )));
        }
    }

    let mut out = String::new();
    let _ = writeln!(out, "# operation signal log");
    let _ = writeln!(out, "# t_s = {}", reg.t_s());
    let _ = writeln!(out, "# t_f = {}", reg.t_f());
    for ch in &channels {
        if let Some(rate) = rates.rate_for(&ch.role) {
            let _ = writeln!(
                out,
                "# rate:{}:{} = {}",
                ch.role.direction.tag(),
                ch.role.product_id,
                rate
            );
        }
    }
    out.push('t');
    for ch in &channels {
        let _ = write!(out, ",{}:{}", ch.role.direction.tag(), ch.role.product_id);
    }
    out.push('\n');
    let grid = reg.grid();
    for k in 0..grid.n_samples() {
        let _ = write!(out, "{}", grid.time(k));
        for ch in &channels {
            let _ = write!(out, ",{}", ch.quantity.density()[k]);
        }
        out.push('\n');
    }
    write_atomic(path, &out)
}

/// Reads and validates a signal log.
pub fn read_signal_log(path: &Path) -> CliResult<SignalLog> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_signal_log(&text).map_err(|e| match e {
        CliError::Validation(msg) => {
            CliError::Validation(format!("invalid signal log `{}`: {msg}", path.display()))
        }
        other => other,
    })
}

fn parse_signal_log(text: &str) -> CliResult<SignalLog> {
    let mut metadata = LogMetadata::default();
    let mut lines = text.lines().enumerate().peekable();

    while let Some((_, line)) = lines.peek() {
        let line = line.trim();
        if line.is_empty() {
            lines.next();
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            parse_metadata_line(comment, &mut metadata)?;
            lines.next();
        } else {
            break;
        }
    }

    let (_, header) = lines
        .next()
        .ok_or_else(|| CliError::Validation(String::from("missing header row")))?;
    let roles = parse_header(header.trim())?;

    let mut times: Vec<f64> = Vec::new();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); roles.len()];
    for (line_no, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != roles.len() + 1 {
            return Err(CliError::Validation(format!(
                "line {}: expected {} fields, found {}",
                line_no + 1,
                roles.len() + 1,
                fields.len()
            )));
        }
        let mut parsed = fields.iter().map(|f| {
            f.trim().parse::<f64>().map_err(|_| {
                CliError::Validation(format!("line {}: `{}` is not a number", line_no + 1, f))
            })
        });
        times.push(parsed.next().expect("at least one field")?);
        for column in columns.iter_mut() {
            let value = parsed.next().expect("field count checked")?;
            if !value.is_finite() || value < 0.0 {
                return Err(CliError::Validation(format!(
                    "line {}: negative density {value}; registration signals are magnitudes",
                    line_no + 1
                )));
            }
            column.push(value);
        }
    }

    if times.len() < 2 {
        return Err(CliError::Validation(String::from(
            "at least two samples are required to infer the time step",
        )));
    }
    let n = times.len();
    let dt = (times[n - 1] - times[0]) / (n - 1) as f64;
    if !(dt > 0.0) {
        return Err(CliError::Validation(String::from(
            "timestamps must be strictly increasing",
        )));
    }
    for (k, pair) in times.windows(2).enumerate() {
        let step = pair[1] - pair[0];
        if (step - dt).abs() > 1e-9 * dt {
            return Err(CliError::Validation(format!(
                "non-uniform time step between rows {} and {}: {} vs {}",
                k + 1,
                k + 2,
                step,
                dt
            )));
        }
    }

    let grid = TimeGrid::new(times[0], dt, n).map_err(CliError::from)?;
    let channels = roles.into_iter().zip(columns).collect();
    Ok(SignalLog { grid, channels, metadata })
}

fn parse_metadata_line(comment: &str, metadata: &mut LogMetadata) -> CliResult<()> {
    let Some((key, value)) = comment.split_once('=') else {
        return Ok(()); // plain comment
    };
    let key = key.trim();
    let value = value.trim();
    let parse = |what: &str| -> CliResult<f64> {
        value.parse::<f64>().map_err(|_| {
            CliError::Validation(format!("metadata `{what}`: `{value}` is not a number"))
        })
    };
    match key {
        "t_s" => metadata.t_s = Some(parse("t_s")?),
        "t_f" => metadata.t_f = Some(parse("t_f")?),
        _ => {
            if let Some(rest) = key.strip_prefix("rate:") {
                let role = parse_column_label(rest)?;
                let rate = parse(key)?;
                match role.direction {
                    Direction::Input => {
                        metadata.rates.input_rates.insert(role.product_id, rate)
                    }
                    Direction::Output => {
                        metadata.rates.output_rates.insert(role.product_id, rate)
                    }
                };
            }
            // Unrecognized keys in comments are ignored.
        }
    }
    Ok(())
}

fn parse_header(header: &str) -> CliResult<Vec<ChannelRole>> {
    let mut fields = header.split(',');
    match fields.next() {
        Some("t") => {}
        other => {
            return Err(CliError::Validation(format!(
                "first column must be `t`, found `{}`",
                other.unwrap_or("")
            )))
        }
    }
    let mut roles: Vec<ChannelRole> = Vec::new();
    for label in fields {
        let role = parse_column_label(label.trim())?;
        if roles.contains(&role) {
            return Err(CliError::Validation(format!(
                "duplicate column `{}:{}`",
                role.direction.tag(),
                role.product_id
            )));
        }
        roles.push(role);
    }
    if roles.is_empty() {
        return Err(CliError::Validation(String::from(
            "the log has no channel columns",
        )));
    }
    Ok(roles)
}

/// Parses `in:<id>` / `out:<id>`.
fn parse_column_label(label: &str) -> CliResult<ChannelRole> {
    let (tag, id) = label.split_once(':').ok_or_else(|| {
        CliError::Validation(format!(
            "channel column `{label}` must be `in:<product_id>` or `out:<product_id>`"
        ))
    })?;
    let direction = match tag {
        "in" => Direction::Input,
        "out" => Direction::Output,
        other => {
            return Err(CliError::Validation(format!(
                "channel column side must be `in` or `out`, found `{other}`"
            )))
        }
    };
    validate_product_id(id)?;
    Ok(ChannelRole { direction, product_id: id.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# operation signal log
# t_s = 0
# t_f = 3
# rate:in:resource = 0.6666666666666666
# rate:out:product = 1
t,in:resource,out:product
0,1,0
0.5,1,0
1,1,1
1.5,1,1
2,0,1
2.5,0,1
";

    #[test]
    fn parses_sample_log() {
        let log = parse_signal_log(SAMPLE).unwrap();
        assert_eq!(log.grid.n_samples(), 6);
        assert_eq!(log.grid.dt(), 0.5);
        assert_eq!(log.metadata.t_s, Some(0.0));
        assert_eq!(log.metadata.t_f, Some(3.0));
        assert_eq!(log.channels.len(), 2);
        assert_eq!(
            log.metadata.rates.input_rates.get("resource"),
            Some(&0.6666666666666666)
        );
        let reg = log.to_registration().unwrap();
        assert_eq!(reg.t_f(), 3.0);
    }

    #[test]
    fn detects_window_without_overrides() {
        let trimmed: String = SAMPLE
            .lines()
            .filter(|l| !l.starts_with("# t_"))
            .collect::<Vec<_>>()
            .join("\n");
        let log = parse_signal_log(&trimmed).unwrap();
        let reg = log.to_registration().unwrap();
        assert_eq!(reg.t_s(), 0.0);
        // Last output flow is in the slot starting at 2.5.
        assert_eq!(reg.t_f(), 3.0);
    }

    #[test]
    fn rejects_negative_density() {
        let bad = SAMPLE.replace("2,0,1", "2,0,-1");
        let err = parse_signal_log(&bad).unwrap_err();
        assert!(err.to_string().contains("negative density"));
    }

    #[test]
    fn rejects_non_uniform_step() {
        let bad = SAMPLE.replace("1.5,1,1", "1.6,1,1");
        assert!(parse_signal_log(&bad).is_err());
    }

    #[test]
    fn rejects_single_row() {
        let bad = "t,in:a\n0,1\n";
        assert!(parse_signal_log(bad).is_err());
    }

    #[test]
    fn rejects_bad_header() {
        assert!(parse_signal_log("time,in:a\n0,1\n1,1\n").is_err());
        assert!(parse_signal_log("t,a\n0,1\n1,1\n").is_err());
        assert!(parse_signal_log("t,mid:a\n0,1\n1,1\n").is_err());
        assert!(parse_signal_log("t,in:a,in:a\n0,1,1\n1,1,1\n").is_err());
    }
}
