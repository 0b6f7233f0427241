//! Acceptance suite: every release criterion as one test, with its tolerance
//! pinned in code and a pass/fail line printed per criterion.
//!
//! Run with `cargo test -p opeff-cli --test acceptance -- --nocapture` to see
//! the lines.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, UnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use opeff_core::indices::{conditional_return, efficiency_f, summarize, OperationSummary};
use opeff_core::model::{deploy, ChannelRole, DeployedModel, ReducedModel, SimplifiedModel};
use opeff_core::plant::{self, reference_costs, PlantConfig};
use opeff_core::signal::{Sign, Signal, TimeGrid};
use opeff_core::sweep::{select_optimal, successful, sweep, Criterion, SweepRecord};

use opeff_cli::report::parse_operation_report;

/// Runs one criterion, printing its verdict.
fn criterion<F: FnOnce() + UnwindSafe>(id: u32, name: &str, body: F) {
    let start = Instant::now();
    let result = catch_unwind(body);
    let verdict = if result.is_ok() { "PASS" } else { "FAIL" };
    println!(
        "[acceptance] C{id:02} {name}: {verdict} ({:.2?})",
        start.elapsed()
    );
    if let Err(payload) = result {
        std::panic::resume_unwind(payload);
    }
}

/// Builds the deployed model of a compressed operation `(pe, re, top)` on a
/// grid with the given step, running the full deploy → decompose pipeline.
fn deploy_compressed(pe: f64, re: f64, top: f64, dt: f64, tail: f64) -> DeployedModel {
    let grid = TimeGrid::covering(0.0, top + tail, dt).unwrap();
    let simp = SimplifiedModel::new(pe, re, 0.0, top).unwrap();
    let (re_s, pe_s) = simp.impulse_signals(&grid).unwrap();
    deploy(&re_s, &pe_s, 0.0, top).unwrap()
}

fn reference_config_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/reference.toml")
}

#[test]
fn c01_f_worked_examples() {
    criterion(1, "F worked examples through deploy/decompose (dt = 0.01)", || {
        let start = Instant::now();
        let cases = [(3.0, 2.0, 3.0, 1.0 / 6.0), (3.0, 2.0, 2.0, 0.25)];
        for (pe, re, top, expect) in cases {
            let dep = deploy_compressed(pe, re, top, 0.01, 1.0);
            let f = efficiency_f(&dep, 1.0).unwrap();
            assert!(
                (f - expect).abs() <= 1e-9,
                "F for Top={top}: got {f}, expected {expect}"
            );
        }
        assert!(start.elapsed() < Duration::from_secs(1), "runtime budget");
    });
}

#[test]
fn c02_r_worked_example() {
    criterion(2, "conditional return worked example", || {
        let r = conditional_return(20.0, 14.0).unwrap();
        assert!((r - 0.428).abs() <= 1e-3, "rounded reference value: {r}");
        assert!((r - 6.0 / 14.0).abs() <= 1e-12, "exact arithmetic: {r}");
    });
}

#[test]
fn c03_closed_form_oracle() {
    criterion(3, "1000 random compressed operations vs closed form", || {
        let start = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..1000 {
            let pe = rng.gen_range(0.01..=100.0);
            let re = rng.gen_range(0.01..=100.0);
            let top = rng.gen_range(0.01..=50.0);
            let dep = deploy_compressed(pe, re, top, top / 2000.0, 0.0);
            let f = efficiency_f(&dep, 1.0).unwrap();
            let closed = (pe - re) / (re * top);
            assert!(
                (f - closed).abs() <= 1e-9 * closed.abs().max(1e-12),
                "PE={pe} RE={re} Top={top}: F={f} vs {closed}"
            );
            let r = conditional_return(pe, re).unwrap();
            assert!(
                (f * top - r).abs() <= 1e-9 * r.abs().max(1.0),
                "F*Top={} vs R={r}",
                f * top
            );
        }
        assert!(start.elapsed() < Duration::from_secs(5), "runtime budget");
    });
}

#[test]
fn c04_deployment_conservation() {
    criterion(4, "200 random reduced models: settled tails and reconstruction", || {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n = rng.gen_range(20..400);
            let dt = rng.gen_range(0.01..0.5);
            let grid = TimeGrid::new(0.0, dt, n).unwrap();
            let split = rng.gen_range(1..n);
            let re_level = rng.gen_range(0.1..20.0);
            let pe_level = rng.gen_range(0.1..20.0);
            let re_density: Vec<f64> = (0..n)
                .map(|k| if k < split { re_level } else { 0.0 })
                .collect();
            let pe_density: Vec<f64> = (0..n)
                .map(|k| if k >= split { pe_level } else { 0.0 })
                .collect();
            let re = Signal::new(grid.clone(), re_density, Vec::new()).unwrap();
            let pe = Signal::new(grid.clone(), pe_density, Vec::new()).unwrap();
            let t_f = grid.end();
            let surplus = pe.total() - re.total();

            let red = ReducedModel::new(re, pe, 0.0, t_f).unwrap();
            let dep = deploy(red.re(), red.pe(), 0.0, t_f).unwrap();

            assert_eq!(dep.ice().value_at(-1.0), 0.0, "nothing flows before t_s");
            let tol = 1e-9 * surplus.abs().max(1.0);
            assert!((dep.ice().value_at(t_f) - surplus).abs() <= tol);
            assert!((dep.ice().value_at(t_f + 100.0) - surplus).abs() <= tol);

            let rebuilt = dep.ibe().add(dep.ide()).unwrap();
            for (a, b) in rebuilt.values().iter().zip(dep.ice().values()) {
                assert!(
                    (a - b).abs() <= 1e-12 * b.abs().max(1.0),
                    "reconstruction drift {a} vs {b}"
                );
            }
        }
    });
}

#[test]
fn c05_homogeneity_and_argmax_invariance() {
    criterion(5, "cost scaling leaves R, F, and the selection unchanged", || {
        let cfg = PlantConfig::default();
        let costs = reference_costs();
        let grid: Vec<f64> = (30..=100).step_by(5).map(f64::from).collect();
        let base = successful(&sweep(&cfg, &costs, &grid, 1.0).unwrap());
        let picks: Vec<f64> = Criterion::ALL
            .iter()
            .map(|&c| select_optimal(&base, c).unwrap().u_p)
            .collect();
        for c in [0.1, 7.0, 1000.0] {
            let scaled = successful(&sweep(&cfg, &costs.scaled(c), &grid, 1.0).unwrap());
            for (a, b) in base.iter().zip(&scaled) {
                assert!(
                    (a.summary.r - b.summary.r).abs() <= 1e-12 * a.summary.r.abs().max(1.0),
                    "R drifted under scaling by {c}"
                );
                assert!(
                    (a.summary.f - b.summary.f).abs() <= 1e-12 * a.summary.f.abs().max(1.0),
                    "F drifted under scaling by {c}"
                );
            }
            for (&criterion_kind, &pick) in Criterion::ALL.iter().zip(&picks) {
                assert_eq!(
                    select_optimal(&scaled, criterion_kind).unwrap().u_p,
                    pick,
                    "selection changed under scaling by {c}"
                );
            }
        }
    });
}

#[test]
fn c06_quantity_monotonicities() {
    criterion(6, "quantity curves over the drive grid (default plant)", || {
        let start = Instant::now();
        let cfg = PlantConfig::default();
        assert!(cfg.loss_coefficient > 0.0 && cfg.alpha == 4.0);
        let grid: Vec<f64> = (30..=100).step_by(5).map(f64::from).collect();
        let records = successful(&sweep(&cfg, &reference_costs(), &grid, 1.0).unwrap());
        assert_eq!(records.len(), grid.len());

        let series = |role: &ChannelRole| -> Vec<f64> {
            records.iter().map(|r| r.quantities[role]).collect()
        };
        let tops: Vec<f64> = records.iter().map(|r| r.summary.top).collect();
        assert!(tops.windows(2).all(|w| w[1] < w[0]), "Top strictly falls");

        let rq_p = series(&ChannelRole::input(plant::ENERGY));
        assert!(rq_p.windows(2).all(|w| w[1] < w[0]), "RQ_p strictly falls");

        let rq_m = series(&ChannelRole::input(plant::MECHANISM_WEAR));
        assert!(rq_m.windows(2).all(|w| w[1] > w[0]), "RQ_m strictly rises");

        for role in [
            ChannelRole::input(plant::COLD_FLUID),
            ChannelRole::output(plant::HEATED_FLUID),
        ] {
            for value in series(&role) {
                assert!(
                    (value - cfg.batch_volume).abs() <= 1e-9 * cfg.batch_volume,
                    "fluid quantities stay at the batch volume"
                );
            }
        }
        assert!(start.elapsed() < Duration::from_secs(10), "runtime budget");
    });
}

#[test]
fn c07_interior_optimum_fixture() {
    criterion(7, "committed config has an interior F-optimum", || {
        // Regression fixture: the shipped reference config.
        let doc = opeff_cli::config::RunConfigDocument::load(&reference_config_path())
            .expect("shipped config loads");
        let cfg = doc.plant_config();
        let costs = doc.cost_rates().unwrap();
        let grid = doc.sweep.expect("config has a sweep block").u_values().unwrap();
        let records = successful(&sweep(&cfg, &costs, &grid, doc.f_unit_interval).unwrap());
        let best = select_optimal(&records, Criterion::MaxF).unwrap();
        let (lo, hi) = (grid[0], grid[grid.len() - 1]);
        assert!(
            best.u_p > lo && best.u_p < hi,
            "argmax_F must be interior: got {} on [{lo}, {hi}]",
            best.u_p
        );
    });
}

#[test]
fn c08_time_discrimination() {
    criterion(8, "equal cost totals, different durations: R blind, F ordered", || {
        let build = |u_p: f64, top: f64| -> SweepRecord {
            let dep = deploy_compressed(20.0, 14.0, top, top / 2000.0, 0.0);
            let simp = SimplifiedModel::new(20.0, 14.0, 0.0, top).unwrap();
            let summary: OperationSummary = summarize(&dep, &simp, 1.0).unwrap();
            SweepRecord { u_p, quantities: BTreeMap::new(), summary }
        };
        let slow = build(50.0, 5.0);
        let fast = build(70.0, 3.5);
        assert!(
            (slow.summary.pe - fast.summary.pe).abs() <= 1e-6
                && (slow.summary.re - fast.summary.re).abs() <= 1e-6
        );
        assert_eq!(slow.summary.r, fast.summary.r, "R cannot separate them");
        assert!(
            fast.summary.f > slow.summary.f,
            "F must prefer the shorter operation"
        );
        let records = vec![slow, fast];
        assert_eq!(select_optimal(&records, Criterion::MaxF).unwrap().u_p, 70.0);
        assert_eq!(select_optimal(&records, Criterion::MaxR).unwrap().u_p, 50.0);
    });
}

#[test]
fn c09_cli_round_trip() {
    criterion(9, "simulate/analyze round trip, byte-identical reports", || {
        let dir = tempfile::tempdir().unwrap();
        let config = reference_config_path();
        let run = |args: &[&str]| {
            let out = std::process::Command::new(env!("CARGO_BIN_EXE_opeff"))
                .args(args)
                .output()
                .expect("binary runs");
            assert!(out.status.success(), "{out:?}");
        };
        let path = |p: &Path| p.to_string_lossy().into_owned();

        let mut reports = Vec::new();
        for round in 0..2 {
            let out = dir.path().join(format!("run{round}"));
            run(&[
                "simulate",
                "--config",
                &path(&config),
                "--u-p",
                "65",
                "--out",
                &path(&out),
            ]);
            let costs = dir.path().join("empty.toml");
            std::fs::write(&costs, "").unwrap();
            let analyzed = dir.path().join(format!("re{round}.toml"));
            run(&[
                "analyze",
                "--signals",
                &path(&dir.path().join(format!("run{round}.signals.csv"))),
                "--costs",
                &path(&costs),
                "--report",
                &path(&analyzed),
            ]);
            reports.push((
                std::fs::read_to_string(dir.path().join(format!("run{round}.report.toml")))
                    .unwrap(),
                std::fs::read_to_string(&analyzed).unwrap(),
            ));
        }

        let simulated = parse_operation_report(&reports[0].0).unwrap();
        let analyzed = parse_operation_report(&reports[0].1).unwrap();
        for (a, b) in [
            (simulated.pe, analyzed.pe),
            (simulated.re, analyzed.re),
            (simulated.top, analyzed.top),
            (simulated.r, analyzed.r),
            (simulated.f, analyzed.f),
        ] {
            assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "{a} vs {b}");
        }
        assert_eq!(reports[0].0, reports[1].0, "simulate reports byte-identical");
        assert_eq!(reports[0].1, reports[1].1, "analyze reports byte-identical");
    });
}

#[test]
fn c10_riemann_oracle() {
    criterion(10, "cumulative integration vs dt/100 re-summation", || {
        let mut rng = ChaCha8Rng::seed_from_u64(100);
        for _ in 0..100 {
            let n = rng.gen_range(5..80);
            let dt = rng.gen_range(0.01..0.8);
            let t0 = rng.gen_range(-5.0..5.0);
            let grid = TimeGrid::new(t0, dt, n).unwrap();
            let density: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..10.0)).collect();
            let mut impulses: Vec<opeff_core::signal::Impulse> = (0..rng.gen_range(0..5))
                .map(|_| opeff_core::signal::Impulse {
                    time: rng.gen_range(t0..t0 + dt * n as f64),
                    mass: rng.gen_range(0.0..5.0),
                })
                .collect();
            impulses.sort_by(|a, b| a.time.partial_cmp(&b.time).unwrap());
            let signal = Signal::new(grid.clone(), density.clone(), impulses.clone()).unwrap();
            let cumulative = signal.integrate_cumulative(Sign::Positive);

            // Brute force at dt/100: fine cell j subdivides coarse cell j/100.
            let fine_dt = dt / 100.0;
            for k in 0..=n {
                let t = grid.time(k);
                let mut oracle = 0.0;
                for j in 0..100 * k {
                    oracle += density[j / 100] * fine_dt;
                }
                for imp in &impulses {
                    if imp.time <= t {
                        oracle += imp.mass;
                    }
                }
                let got = cumulative.values()[k];
                assert!(
                    (got - oracle).abs() <= 1e-6 * oracle.abs().max(1e-9),
                    "sample {k}: {got} vs oracle {oracle}"
                );
            }
        }
    });
}
