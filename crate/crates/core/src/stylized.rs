//! Two-group protest model with exogenous beliefs about peer turnout.
//!
//! Subjects attend when their mean belief about others' turnout exceeds the
//! attendance cost, and are paid for reporting turnout within a window. The
//! two default groups have prior means below the cost; after a uniform
//! signal at 17% the first group's mean crosses the cost while its mode
//! falls, so reported beliefs and participation move in opposite directions.

use serde::{Deserialize, Serialize};

use crate::distributions::{BeliefDistribution, DiscreteBelief};
use crate::elicitation::Scheme;
use crate::error::{Error, Result};
use crate::updating::{uniform_window_update, UniformSignal};

/// Attendance cost; a subject attends iff their mean belief exceeds it.
pub const DEFAULT_COST: f64 = 0.165;
/// Half-width of the reporting window (two percentage points).
pub const DEFAULT_REPORT_WINDOW: f64 = 0.02;
pub const DEFAULT_SIGNAL: f64 = 0.17;
pub const DEFAULT_SIGNAL_HALF_WIDTH: f64 = 0.10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentGroup {
    pub label: String,
    #[serde(with = "discrete_json")]
    pub beliefs: DiscreteBelief,
    pub cost: f64,
    pub reward: f64,
    pub report_window: f64,
}

impl AgentGroup {
    pub fn new(
        label: impl Into<String>,
        beliefs: DiscreteBelief,
        cost: f64,
        reward: f64,
        report_window: f64,
    ) -> Result<Self> {
        if !(cost > 0.0 && cost < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "cost {cost} outside (0, 1)"
            )));
        }
        if report_window <= 0.0 {
            return Err(Error::InvalidParameter(
                "report window must be positive".into(),
            ));
        }
        Ok(Self {
            label: label.into(),
            beliefs,
            cost,
            reward,
            report_window,
        })
    }

    /// The window scheme the group is paid under.
    pub fn scheme(&self) -> Result<Scheme> {
        Scheme::window(self.report_window, self.reward)
    }
}

/// Group 1: high mode (0.30), prior mean 0.1645.
pub fn group_one_beliefs() -> DiscreteBelief {
    DiscreteBelief::new([
        (0.0, 0.30),
        (0.12, 0.10),
        (0.17, 0.15),
        (0.22, 0.10),
        (0.30, 0.35),
    ])
    .expect("valid")
}

/// Group 2: low mode (0.05), prior mean 0.10.
pub fn group_two_beliefs() -> DiscreteBelief {
    DiscreteBelief::new([(0.05, 0.35), (0.08, 0.20), (0.12, 0.20), (0.17, 0.25)]).expect("valid")
}

pub fn default_groups() -> Vec<AgentGroup> {
    vec![
        AgentGroup::new(
            "group1",
            group_one_beliefs(),
            DEFAULT_COST,
            1.0,
            DEFAULT_REPORT_WINDOW,
        )
        .expect("valid"),
        AgentGroup::new(
            "group2",
            group_two_beliefs(),
            DEFAULT_COST,
            1.0,
            DEFAULT_REPORT_WINDOW,
        )
        .expect("valid"),
    ]
}

pub fn default_signal() -> UniformSignal {
    UniformSignal::new(DEFAULT_SIGNAL, DEFAULT_SIGNAL_HALF_WIDTH).expect("valid")
}

/// Attend iff `mean(beliefs) > cost`; a tie means staying home.
pub fn participation_decision(beliefs: &BeliefDistribution, cost: f64) -> bool {
    beliefs.mean() > cost
}

/// Summary of one group in one survey wave.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveSummary {
    pub mean: f64,
    pub mode: f64,
    pub report: f64,
    pub participates: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupOutcome {
    pub label: String,
    pub prior: WaveSummary,
    pub posterior: WaveSummary,
}

/// How an observer who reads reports as mean beliefs judges complementarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScVerdict {
    #[serde(rename = "rejects_sc")]
    RejectsSC,
    #[serde(rename = "consistent_with_sc")]
    ConsistentWithSC,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StylizedOutcome {
    pub groups: Vec<GroupOutcome>,
    pub naive_sc_verdict: ScVerdict,
}

impl StylizedOutcome {
    /// Table of means and modes: `group,statistic,prior,posterior`.
    pub fn table_csv(&self) -> String {
        let mut out = String::from("group,statistic,prior,posterior\n");
        for g in &self.groups {
            for (stat, p, q) in [
                ("mean", g.prior.mean, g.posterior.mean),
                ("mode", g.prior.mode, g.posterior.mode),
                ("report", g.prior.report, g.posterior.report),
            ] {
                out.push_str(&format!("{},{stat},{p},{q}\n", g.label));
            }
            out.push_str(&format!(
                "{},participates,{},{}\n",
                g.label, g.prior.participates, g.posterior.participates
            ));
        }
        out
    }
}

fn sign(x: f64) -> i8 {
    if x.abs() <= crate::distributions::PROB_TOL {
        0
    } else if x > 0.0 {
        1
    } else {
        -1
    }
}

/// True when reports and participation move strictly against each other.
fn contradicts_sc(report_change: f64, participation_change: i8) -> bool {
    let r = sign(report_change);
    r != 0 && participation_change != 0 && r != participation_change
}

fn summarize(beliefs: &BeliefDistribution, cost: f64, scheme: &Scheme) -> Result<WaveSummary> {
    Ok(WaveSummary {
        mean: beliefs.mean(),
        mode: beliefs.mode()?,
        report: scheme.optimal_report(beliefs)?.report,
        participates: participation_decision(beliefs, cost),
    })
}

fn run_group(group: &AgentGroup, sig: &UniformSignal, scheme: &Scheme) -> Result<GroupOutcome> {
    let prior: BeliefDistribution = group.beliefs.clone().into();
    let posterior: BeliefDistribution = uniform_window_update(&group.beliefs, sig)?.into();
    Ok(GroupOutcome {
        label: group.label.clone(),
        prior: summarize(&prior, group.cost, scheme)?,
        posterior: summarize(&posterior, group.cost, scheme)?,
    })
}

/// Runs every group through the signal, paying each under its own window.
pub fn run_stylized(groups: &[AgentGroup], sig: &UniformSignal) -> Result<StylizedOutcome> {
    let outcomes = groups
        .iter()
        .map(|g| run_group(g, sig, &g.scheme()?))
        .collect::<Result<Vec<_>>>()?;
    Ok(finish(outcomes))
}

/// As [`run_stylized`], with every group paid under `scheme` instead.
pub fn run_stylized_with_scheme(
    groups: &[AgentGroup],
    sig: &UniformSignal,
    scheme: &Scheme,
) -> Result<StylizedOutcome> {
    let outcomes = groups
        .iter()
        .map(|g| run_group(g, sig, scheme))
        .collect::<Result<Vec<_>>>()?;
    Ok(finish(outcomes))
}

fn finish(groups: Vec<GroupOutcome>) -> StylizedOutcome {
    let rejects = groups.iter().any(|g| {
        let dp = g.posterior.participates as i8 - g.prior.participates as i8;
        contradicts_sc(g.posterior.report - g.prior.report, dp)
    });
    StylizedOutcome {
        groups,
        naive_sc_verdict: if rejects {
            ScVerdict::RejectsSC
        } else {
            ScVerdict::ConsistentWithSC
        },
    }
}

/// One group split into an untreated control arm and a treated arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitOutcome {
    pub control: GroupOutcome,
    pub treated: GroupOutcome,
    /// Verdict of an observer comparing the arms' second-wave reports and
    /// participation as if reports were mean beliefs.
    pub naive_sc_verdict: ScVerdict,
}

pub fn control_treatment_split(group: &AgentGroup, sig: &UniformSignal) -> Result<SplitOutcome> {
    let scheme = group.scheme()?;
    let prior: BeliefDistribution = group.beliefs.clone().into();
    let before = summarize(&prior, group.cost, &scheme)?;
    let control = GroupOutcome {
        label: format!("{}-control", group.label),
        prior: before,
        posterior: before,
    };
    let mut treated = run_group(group, sig, &scheme)?;
    treated.label = format!("{}-treated", group.label);

    let dp = treated.posterior.participates as i8 - control.posterior.participates as i8;
    let dr = treated.posterior.report - control.posterior.report;
    let naive_sc_verdict = if contradicts_sc(dr, dp) {
        ScVerdict::RejectsSC
    } else {
        ScVerdict::ConsistentWithSC
    };
    Ok(SplitOutcome {
        control,
        treated,
        naive_sc_verdict,
    })
}

mod discrete_json {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::distributions::{BeliefDistribution, DiscreteBelief};

    pub fn serialize<S: Serializer>(d: &DiscreteBelief, s: S) -> Result<S::Ok, S::Error> {
        BeliefDistribution::Discrete(d.clone()).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<DiscreteBelief, D::Error> {
        match BeliefDistribution::deserialize(de)? {
            BeliefDistribution::Discrete(d) => Ok(d),
            BeliefDistribution::Beta(_) => {
                Err(serde::de::Error::custom("group beliefs must be discrete"))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn participation_threshold_is_strict() {
        let b1: BeliefDistribution = group_one_beliefs().into();
        assert!(!participation_decision(&b1, DEFAULT_COST));
        let post = uniform_window_update(&group_one_beliefs(), &default_signal()).unwrap();
        assert!(participation_decision(&post.into(), DEFAULT_COST));
        let post2 = uniform_window_update(&group_two_beliefs(), &default_signal()).unwrap();
        assert!(!participation_decision(&post2.into(), DEFAULT_COST));
        let at_cost = BeliefDistribution::discrete([(0.165, 1.0)]).unwrap();
        assert!(!participation_decision(&at_cost, 0.165));
    }

    #[test]
    fn table_one() {
        let out = run_stylized(&default_groups(), &default_signal()).unwrap();
        let g1 = &out.groups[0];
        assert_abs_diff_eq!(g1.prior.mean, 0.1645, epsilon = 1e-12);
        assert_abs_diff_eq!(g1.prior.mode, 0.30, epsilon = 1e-12);
        assert_abs_diff_eq!(g1.posterior.mean, 0.17, epsilon = 1e-12);
        assert_abs_diff_eq!(g1.posterior.mode, 0.17, epsilon = 1e-12);
        let g2 = &out.groups[1];
        assert_abs_diff_eq!(g2.prior.mean, 0.10, epsilon = 1e-12);
        assert_abs_diff_eq!(g2.prior.mode, 0.05, epsilon = 1e-12);
        assert_abs_diff_eq!(g2.posterior.mean, 0.0825 / 0.65, epsilon = 1e-12);
        assert_eq!(format!("{:.3}", g2.posterior.mean), "0.127");
        assert_abs_diff_eq!(g2.posterior.mode, 0.17, epsilon = 1e-12);
    }

    #[test]
    fn group_one_report_falls_while_it_starts_attending() {
        let out = run_stylized(&default_groups(), &default_signal()).unwrap();
        let g1 = &out.groups[0];
        assert_eq!((g1.prior.report, g1.posterior.report), (0.30, 0.17));
        assert!(!g1.prior.participates && g1.posterior.participates);
        assert_eq!(out.naive_sc_verdict, ScVerdict::RejectsSC);
    }

    #[test]
    fn group_one_reports_equal_modes_under_separation() {
        let out = run_stylized(&default_groups(), &default_signal()).unwrap();
        let g1 = &out.groups[0];
        assert_eq!(g1.prior.report, g1.prior.mode);
        assert_eq!(g1.posterior.report, g1.posterior.mode);
    }

    #[test]
    fn group_two_window_reports_rise_without_attendance() {
        let out = run_stylized(&default_groups(), &default_signal()).unwrap();
        let g2 = &out.groups[1];
        // Atoms 0.03 and 0.04 apart let one window cover two of them.
        assert_abs_diff_eq!(g2.prior.report, 0.06, epsilon = 1e-12);
        assert_abs_diff_eq!(g2.posterior.report, 0.10, epsilon = 1e-12);
        assert!(g2.posterior.report > g2.prior.report);
        assert!(!g2.prior.participates && !g2.posterior.participates);
    }

    #[test]
    fn quadratic_reports_are_means_and_consistent_with_sc() {
        let q = Scheme::quadratic(1.0, 2.0).unwrap();
        let out = run_stylized_with_scheme(&default_groups(), &default_signal(), &q).unwrap();
        for g in &out.groups {
            assert_eq!(g.prior.report, g.prior.mean);
            assert_eq!(g.posterior.report, g.posterior.mean);
        }
        assert_eq!(out.naive_sc_verdict, ScVerdict::ConsistentWithSC);
    }

    #[test]
    fn symmetric_group_is_consistent_with_sc() {
        let sym = DiscreteBelief::new([(0.10, 0.25), (0.15, 0.5), (0.20, 0.25)]).unwrap();
        let g = AgentGroup::new("sym", sym, 0.16, 1.0, 0.02).unwrap();
        let out = run_stylized(&[g], &UniformSignal::new(0.25, 0.10).unwrap()).unwrap();
        assert_eq!(out.naive_sc_verdict, ScVerdict::ConsistentWithSC);
    }

    #[test]
    fn control_and_treated_arms_of_group_one() {
        let split = control_treatment_split(&default_groups()[0], &default_signal()).unwrap();
        assert_eq!(
            (split.control.prior.report, split.control.posterior.report),
            (0.30, 0.30)
        );
        assert!(!split.control.posterior.participates);
        assert_eq!(
            (split.treated.prior.report, split.treated.posterior.report),
            (0.30, 0.17)
        );
        assert!(split.treated.posterior.participates);
        assert_eq!(split.naive_sc_verdict, ScVerdict::RejectsSC);
    }

    #[test]
    fn treated_group_two_reports_up_but_stays_home() {
        let split = control_treatment_split(&default_groups()[1], &default_signal()).unwrap();
        assert!(split.treated.posterior.report > split.treated.prior.report);
        assert!(!split.treated.posterior.participates);
    }

    #[test]
    fn zero_width_signal_on_the_mode_collapses_the_posterior() {
        let split = control_treatment_split(
            &default_groups()[0],
            &UniformSignal::new(0.30, 0.0).unwrap(),
        )
        .unwrap();
        assert_eq!(split.treated.posterior.mean, 0.30);
    }

    #[test]
    fn csv_table_has_header_and_rows() {
        let out = run_stylized(&default_groups(), &default_signal()).unwrap();
        let csv = out.table_csv();
        assert!(csv.starts_with("group,statistic,prior,posterior\n"));
        assert!(csv.contains("group1,mode,0.3,0.17\n"));
        assert_eq!(csv.lines().count(), 1 + 2 * 4);
    }

    #[test]
    fn group_json_round_trip() {
        let g = &default_groups()[0];
        let s = serde_json::to_string(g).unwrap();
        let back: AgentGroup = serde_json::from_str(&s).unwrap();
        assert_eq!(&back, g);
    }
}
