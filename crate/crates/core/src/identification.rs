//! Simulated information experiment and the participation regression.
//!
//! Agents attend iff their mean belief exceeds a cost, so participation is
//! increasing in beliefs about others by construction. A random share of
//! agents sees a signal. Both waves elicit a report under a chosen scheme,
//! and participation is regressed on the reports. Under a mean-eliciting
//! scheme the slope has the true sign; under a window scheme it can flip.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::BeliefDistribution;
use crate::elicitation::{ReportSolution, Scheme};
use crate::error::{Error, Result};
use crate::hierarchical::{chi_squared, draw_belief, HyperParams};
use crate::rng::substream;
use crate::stylized::{default_groups, default_signal, DEFAULT_COST, DEFAULT_REPORT_WINDOW};
use crate::updating::Signal;

pub const MIN_AGENTS: usize = 10;

/// Where agents' priors come from. In JSON a bare array of distributions is
/// an explicit population (agent `i` gets entry `i mod len`) and
/// `{"ell": .., "q": ..}` is a hierarchical one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Population {
    Explicit(Vec<BeliefDistribution>),
    Hierarchical(HyperParams),
}

impl Population {
    /// The two stylized groups.
    pub fn stylized() -> Self {
        Population::Explicit(
            default_groups()
                .into_iter()
                .map(|g| g.beliefs.into())
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub population: Population,
    pub scheme: Scheme,
    pub cost: f64,
    pub treated_share: f64,
    pub signal: Signal,
    pub agents: usize,
    pub seed: u64,
    /// Scale of logistic noise added to the participation threshold.
    #[serde(default)]
    pub participation_noise: Option<f64>,
}

impl ExperimentConfig {
    /// Stylized population, half treated with the uniform signal.
    pub fn stylized(scheme: Scheme, seed: u64) -> Self {
        Self {
            population: Population::stylized(),
            scheme,
            cost: DEFAULT_COST,
            treated_share: 0.5,
            signal: Signal::Uniform(default_signal()),
            agents: 1000,
            seed,
            participation_noise: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.agents < MIN_AGENTS {
            return Err(Error::InvalidParameter(format!(
                "need at least {MIN_AGENTS} agents, got {}",
                self.agents
            )));
        }
        if !(0.0..=1.0).contains(&self.treated_share) {
            return Err(Error::InvalidParameter(format!(
                "treated share {} outside [0, 1]",
                self.treated_share
            )));
        }
        if !(self.cost > 0.0 && self.cost < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "cost {} outside (0, 1)",
                self.cost
            )));
        }
        if let Some(s) = self.participation_noise {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "noise scale {s} must be positive"
                )));
            }
        }
        if let Population::Explicit(v) = &self.population {
            if v.is_empty() {
                return Err(Error::InvalidParameter(
                    "explicit population is empty".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PanelRow {
    pub id: usize,
    pub treated: bool,
    pub prior_report: f64,
    pub post_report: f64,
    pub prior_mean: f64,
    pub post_mean: f64,
    pub participates: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelData {
    pub rows: Vec<PanelRow>,
}

impl PanelData {
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("id,treated,prior_report,post_report,prior_mean,post_mean,participates\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.id,
                r.treated as u8,
                r.prior_report,
                r.post_report,
                r.prior_mean,
                r.post_mean,
                r.participates as u8
            ));
        }
        out
    }
}

/// One agent's beliefs and reports in both waves.
struct Waves {
    prior_report: f64,
    post_report: f64,
    prior_mean: f64,
    post_mean: f64,
}

fn waves(
    prior: &BeliefDistribution,
    prior_sol: Option<&ReportSolution>,
    cfg: &ExperimentConfig,
    treated: bool,
) -> Result<Waves> {
    let prior_report = match prior_sol {
        Some(s) => s.report,
        None => cfg.scheme.optimal_report(prior)?.report,
    };
    if !treated {
        let m = prior.mean();
        return Ok(Waves {
            prior_report,
            post_report: prior_report,
            prior_mean: m,
            post_mean: m,
        });
    }
    let post = cfg.signal.update(prior)?;
    Ok(Waves {
        prior_report,
        post_report: cfg.scheme.optimal_report(&post)?.report,
        prior_mean: prior.mean(),
        post_mean: post.mean(),
    })
}

pub fn simulate_experiment(cfg: &ExperimentConfig) -> Result<PanelData> {
    cfg.validate()?;

    // Explicit populations repeat a few beliefs; solve each once.
    let explicit = match &cfg.population {
        Population::Explicit(beliefs) => {
            let mut cache = Vec::with_capacity(beliefs.len());
            for b in beliefs {
                let prior_sol = cfg.scheme.optimal_report(b)?;
                let control = waves(b, Some(&prior_sol), cfg, false)?;
                let treated = waves(b, Some(&prior_sol), cfg, true)?;
                cache.push((control, treated));
            }
            Some(cache)
        }
        Population::Hierarchical(_) => None,
    };
    let chis = match &cfg.population {
        Population::Hierarchical(h) => Some((chi_squared(h.ell)?, chi_squared(h.q)?)),
        Population::Explicit(_) => None,
    };

    let rows = (0..cfg.agents)
        .into_par_iter()
        .map(|id| {
            let mut rng = substream(cfg.seed, id as u64);
            let owned;
            let w = match (&explicit, &chis) {
                (Some(cache), _) => {
                    let treated = rng.random::<f64>() < cfg.treated_share;
                    let (c, t) = &cache[id % cache.len()];
                    (treated, if treated { t } else { c })
                }
                (None, Some((ca, cb))) => {
                    let prior: BeliefDistribution = draw_belief(ca, cb, &mut rng).into();
                    let treated = rng.random::<f64>() < cfg.treated_share;
                    owned = waves(&prior, None, cfg, treated)?;
                    (treated, &owned)
                }
                (None, None) => unreachable!("population is explicit or hierarchical"),
            };
            let (treated, w) = w;
            let belief = if treated { w.post_mean } else { w.prior_mean };
            let participates = match cfg.participation_noise {
                None => belief > cfg.cost,
                Some(scale) => {
                    let u: f64 = rng.random_range(f64::EPSILON..1.0);
                    belief - cfg.cost + scale * (u / (1.0 - u)).ln() > 0.0
                }
            };
            Ok(PanelRow {
                id,
                treated,
                prior_report: w.prior_report,
                post_report: w.post_report,
                prior_mean: w.prior_mean,
                post_mean: w.post_mean,
                participates,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PanelData { rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regressor {
    /// Second-wave report, the level form `P = δ₁ + δ₂ r + ε`.
    PostReport,
    /// `post_report − prior_report`.
    ReportChange,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub delta1: f64,
    pub delta2: f64,
    /// HC1 heteroskedasticity-robust standard error of `delta2`.
    pub se2: f64,
    pub n_obs: usize,
}

/// OLS with intercept of `y` on `x`.
pub fn ols(x: &[f64], y: &[f64]) -> Result<RegressionResult> {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    if n < 3 {
        return Err(Error::DegenerateData(format!(
            "need at least 3 observations, got {n}"
        )));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx <= f64::EPSILON * f64::EPSILON * nf * (1.0 + mx * mx) {
        return Err(Error::ZeroVariance);
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let delta2 = sxy / sxx;
    let delta1 = my - delta2 * mx;
    let meat: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let e = b - delta1 - delta2 * a;
            (a - mx).powi(2) * e * e
        })
        .sum();
    let se2 = (nf / (nf - 2.0) * meat).sqrt() / sxx;
    Ok(RegressionResult {
        delta1,
        delta2,
        se2,
        n_obs: n,
    })
}

/// Regresses participation (0/1) on the chosen regressor.
pub fn estimate(panel: &PanelData, regressor: Regressor) -> Result<RegressionResult> {
    let x: Vec<f64> = panel
        .rows
        .iter()
        .map(|r| match regressor {
            Regressor::PostReport => r.post_report,
            Regressor::ReportChange => r.post_report - r.prior_report,
        })
        .collect();
    let y: Vec<f64> = panel
        .rows
        .iter()
        .map(|r| r.participates as u8 as f64)
        .collect();
    ols(&x, &y)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeEstimates {
    pub post_report: RegressionResult,
    pub report_change: RegressionResult,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignFlip {
    pub window: SchemeEstimates,
    pub quadratic: SchemeEstimates,
}

fn both_regressors(cfg: &ExperimentConfig) -> Result<SchemeEstimates> {
    let panel = simulate_experiment(cfg)?;
    Ok(SchemeEstimates {
        post_report: estimate(&panel, Regressor::PostReport)?,
        report_change: estimate(&panel, Regressor::ReportChange)?,
    })
}

/// Same experiment and seed under a window scheme and a quadratic scheme.
/// `cfg.scheme` is used for whichever of the two it is; the other gets the
/// default window `(0.02, 1)` or quadratic `(1, 2)`.
pub fn sign_flip_demo(cfg: &ExperimentConfig) -> Result<SignFlip> {
    let window = match cfg.scheme {
        s @ Scheme::Window { .. } => s,
        _ => Scheme::window(DEFAULT_REPORT_WINDOW, 1.0)?,
    };
    let quadratic = match cfg.scheme {
        s @ Scheme::Quadratic { .. } => s,
        _ => Scheme::quadratic(1.0, 2.0)?,
    };
    Ok(SignFlip {
        window: both_regressors(&ExperimentConfig {
            scheme: window,
            ..cfg.clone()
        })?,
        quadratic: both_regressors(&ExperimentConfig {
            scheme: quadratic,
            ..cfg.clone()
        })?,
    })
}
