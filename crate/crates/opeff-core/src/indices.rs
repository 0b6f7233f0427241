//! Operation identification indices.
//!
//! Two relative indices rank operations by their cost totals:
//!
//! * the conditional return `R = (PE − RE) / RE`, which is blind to how long
//!   the operation took, and
//! * the index `F`, the integral of the open flow `ide(t)` over one unit
//!   interval after `t_f` divided by the magnitude of the integral of the
//!   closed flow `ibe(t)` over `[t_s, t_f]`, which discriminates operations
//!   by duration: at equal cost totals the shorter operation scores higher.
//!
//! For a compressed (impulse) operation both reduce to closed forms:
//! `R = (PE − RE)/RE` and `F = (PE − RE)/(RE · Top)`, so `F · Top = R`.
//! For smooth deployed models `F` is computed from the actual curves, not
//! from the rectangular shortcut.
//!
//! `F` is measured per chosen unit interval; every summary records the
//! interval alongside the value, since comparing `F` across different time
//! units is only meaningful after normalization.

use alloc::format;
use alloc::string::String;

use crate::error::Error;
use crate::model::{
    deploy, reduce, simplify, CostRates, DeployedModel, ReducedModel, RegistrationModel,
    SimplifiedModel,
};
use crate::Result;

/// Default width of the unit interval `F` integrates the open flow over.
pub const DEFAULT_UNIT_INTERVAL: f64 = 1.0;

/// Relative tolerance for the consistency check between a deployed model and
/// the simplified model summarizing the same operation.
const CONSISTENCY_TOL: f64 = 1e-9;

/// The identification record of one operation: the triple `(PE, RE, Top)`
/// plus both indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperationSummary {
    /// Total output cost estimate `PE`.
    pub pe: f64,
    /// Total input cost estimate `RE`.
    pub re: f64,
    /// Operation time `Top = t_f − t_s`.
    pub top: f64,
    /// Conditional return `R`.
    pub r: f64,
    /// Efficiency index `F`, per `unit_interval` of time.
    pub f: f64,
    /// Width of the interval the open flow was integrated over.
    pub unit_interval: f64,
}

impl OperationSummary {
    /// The triple `(PE, RE, Top)`.
    pub fn theta(&self) -> (f64, f64, f64) {
        (self.pe, self.re, self.top)
    }
}

/// Conditional return `R = (PE − RE) / RE`. Undefined for `RE <= 0`.
pub fn conditional_return(pe: f64, re: f64) -> Result<f64> {
    if !(re > 0.0) {
        return Err(Error::UndefinedIndex(format!(
            "conditional return needs RE > 0, got RE={re}"
        )));
    }
    Ok((pe - re) / re)
}

/// Efficiency index `F` of a deployed model: the open flow integrated over
/// `[t_f, t_f + unit_interval]` divided by the magnitude of the closed flow
/// integrated over `[t_s, t_f]`.
pub fn efficiency_f(dep: &DeployedModel, unit_interval: f64) -> Result<f64> {
    if !(unit_interval > 0.0) {
        return Err(Error::Argument(format!(
            "unit interval must be positive, got {unit_interval}"
        )));
    }
    let open = dep
        .ide()
        .integrate_interval(dep.t_f(), dep.t_f() + unit_interval)?;
    let closed = dep.ibe().integrate_interval(dep.t_s(), dep.t_f())?;
    if closed == 0.0 {
        return Err(Error::UndefinedIndex(String::from(
            "closed-flow integral is zero; F is undefined",
        )));
    }
    Ok(open / closed.abs())
}

/// Bundles the triple and both indices, cross-checking that the deployed and
/// simplified views describe the same operation (same window, same settled
/// surplus to `1e-9` relative).
pub fn summarize(
    dep: &DeployedModel,
    simp: &SimplifiedModel,
    unit_interval: f64,
) -> Result<OperationSummary> {
    if dep.t_s() != simp.t_s() || dep.t_f() != simp.t_f() {
        return Err(Error::Model(format!(
            "deployed window [{}, {}] does not match simplified window [{}, {}]",
            dep.t_s(),
            dep.t_f(),
            simp.t_s(),
            simp.t_f()
        )));
    }
    let surplus = simp.output_cost() - simp.input_cost();
    let settled = dep.ice().final_value();
    let tol = CONSISTENCY_TOL * (simp.output_cost() + simp.input_cost()).abs().max(1.0);
    if (settled - surplus).abs() > tol {
        return Err(Error::Model(format!(
            "deployed model settles at {settled} but the simplified model implies \
             PE − RE = {surplus}"
        )));
    }
    let r = conditional_return(simp.output_cost(), simp.input_cost())?;
    let f = efficiency_f(dep, unit_interval)?;
    Ok(OperationSummary {
        pe: simp.output_cost(),
        re: simp.input_cost(),
        top: simp.duration(),
        r,
        f,
        unit_interval,
    })
}

/// Everything the model chain produces for one registered operation.
#[derive(Debug, Clone)]
pub struct OperationEvaluation {
    pub reduced: ReducedModel,
    pub simplified: SimplifiedModel,
    pub deployed: DeployedModel,
    pub summary: OperationSummary,
}

/// Runs the full chain on a registration model: reduce by the cost rates,
/// compress to the impulse form, deploy the impulses, and summarize.
pub fn evaluate_operation(
    reg: &RegistrationModel,
    costs: &CostRates,
    unit_interval: f64,
) -> Result<OperationEvaluation> {
    let reduced = reduce(reg, costs)?;
    let simplified = simplify(&reduced);
    let (re_imp, pe_imp) = simplified.impulse_signals(reduced.re().grid())?;
    let deployed = deploy(&re_imp, &pe_imp, reduced.t_s(), reduced.t_f())?;
    let summary = summarize(&deployed, &simplified, unit_interval)?;
    Ok(OperationEvaluation { reduced, simplified, deployed, summary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::TimeGrid;
    use approx::assert_relative_eq;

    fn deploy_simplified(pe: f64, re: f64, top: f64, samples: usize) -> DeployedModel {
        let simp = SimplifiedModel::new(pe, re, 0.0, top).unwrap();
        let grid = TimeGrid::covering(0.0, top, top / samples as f64).unwrap();
        let (re_s, pe_s) = simp.impulse_signals(&grid).unwrap();
        deploy(&re_s, &pe_s, 0.0, top).unwrap()
    }

    #[test]
    fn conditional_return_worked_example() {
        let r = conditional_return(20.0, 14.0).unwrap();
        assert!((r - 0.428).abs() <= 1e-3, "rounded value, got {r}");
        assert_relative_eq!(r, 6.0 / 14.0, max_relative = 1e-12);
    }

    #[test]
    fn conditional_return_break_even_and_simple() {
        assert_eq!(conditional_return(5.0, 5.0).unwrap(), 0.0);
        assert_relative_eq!(conditional_return(3.0, 2.0).unwrap(), 0.5);
    }

    #[test]
    fn conditional_return_undefined_without_inputs() {
        assert!(matches!(
            conditional_return(1.0, 0.0),
            Err(Error::UndefinedIndex(_))
        ));
    }

    #[test]
    fn efficiency_worked_examples() {
        let f3 = efficiency_f(&deploy_simplified(3.0, 2.0, 3.0, 300), 1.0).unwrap();
        assert!((f3 - 1.0 / 6.0).abs() <= 1e-9, "got {f3}");

        let f2 = efficiency_f(&deploy_simplified(3.0, 2.0, 2.0, 200), 1.0).unwrap();
        assert!((f2 - 0.25).abs() <= 1e-9, "got {f2}");
    }

    #[test]
    fn efficiency_zero_at_break_even() {
        let f = efficiency_f(&deploy_simplified(2.0, 2.0, 3.0, 300), 1.0).unwrap();
        assert_eq!(f, 0.0);
    }

    #[test]
    fn summarize_worked_example() {
        let simp = SimplifiedModel::new(3.0, 2.0, 0.0, 3.0).unwrap();
        let dep = deploy_simplified(3.0, 2.0, 3.0, 300);
        let s = summarize(&dep, &simp, 1.0).unwrap();
        assert_eq!(s.theta(), (3.0, 2.0, 3.0));
        assert_relative_eq!(s.r, 0.5, max_relative = 1e-12);
        assert!((s.f - 0.1667).abs() < 1e-4);
        assert_eq!(s.unit_interval, 1.0);
    }

    #[test]
    fn summarize_break_even() {
        let simp = SimplifiedModel::new(2.0, 2.0, 0.0, 3.0).unwrap();
        let dep = deploy_simplified(2.0, 2.0, 3.0, 300);
        let s = summarize(&dep, &simp, 1.0).unwrap();
        assert_eq!(s.r, 0.0);
        assert_eq!(s.f, 0.0);
    }

    #[test]
    fn summarize_rejects_mismatched_pair() {
        let simp = SimplifiedModel::new(5.0, 2.0, 0.0, 3.0).unwrap();
        let dep = deploy_simplified(3.0, 2.0, 3.0, 300);
        assert!(matches!(
            summarize(&dep, &simp, 1.0),
            Err(Error::Model(_))
        ));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn closed_form_matches_numeric(
                pe in 0.1f64..100.0,
                re in 0.1f64..100.0,
                top in 0.5f64..50.0,
            ) {
                let dep = deploy_simplified(pe, re, top, 500);
                let f = efficiency_f(&dep, 1.0).unwrap();
                let expect = (pe - re) / (re * top);
                prop_assert!(
                    (f - expect).abs() <= 1e-9 * expect.abs().max(1e-9),
                    "numeric {} vs closed form {}", f, expect
                );
                // Simplified-model identity: F * Top = R.
                let r = conditional_return(pe, re).unwrap();
                prop_assert!((f * top - r).abs() <= 1e-9 * r.abs().max(1e-9));
            }

            #[test]
            fn homogeneous_of_degree_zero(
                pe in 0.1f64..100.0,
                re in 0.1f64..100.0,
                top in 0.5f64..50.0,
                c in prop::sample::select(alloc::vec![0.1, 7.0, 1000.0]),
            ) {
                let base = deploy_simplified(pe, re, top, 400);
                let scaled = deploy_simplified(c * pe, c * re, top, 400);
                let f0 = efficiency_f(&base, 1.0).unwrap();
                let f1 = efficiency_f(&scaled, 1.0).unwrap();
                prop_assert!((f0 - f1).abs() <= 1e-12 * f0.abs().max(1.0));
                let r0 = conditional_return(pe, re).unwrap();
                let r1 = conditional_return(c * pe, c * re).unwrap();
                prop_assert!((r0 - r1).abs() <= 1e-12 * r0.abs().max(1.0));
            }

            #[test]
            fn f_discriminates_by_duration(
                pe in 1.0f64..100.0,
                re in 0.5f64..50.0,
                top_short in 0.5f64..10.0,
                stretch in 1.1f64..5.0,
            ) {
                prop_assume!(pe > re);
                let top_long = top_short * stretch;
                let f_short =
                    efficiency_f(&deploy_simplified(pe, re, top_short, 400), 1.0).unwrap();
                let f_long =
                    efficiency_f(&deploy_simplified(pe, re, top_long, 400), 1.0).unwrap();
                prop_assert!(f_short > f_long, "F must fall as Top grows");
                // R ignores duration entirely.
                let r = conditional_return(pe, re).unwrap();
                prop_assert!(r > 0.0);
            }

            #[test]
            fn f_sign_follows_surplus(
                pe in 0.1f64..100.0,
                re in 0.1f64..100.0,
                top in 0.5f64..20.0,
            ) {
                let f = efficiency_f(&deploy_simplified(pe, re, top, 300), 1.0).unwrap();
                if pe > re {
                    prop_assert!(f > 0.0);
                } else if pe < re {
                    prop_assert!(f < 0.0);
                }
            }
        }
    }
}
