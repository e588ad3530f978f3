//! Bayesian updating of beliefs after an information intervention.
//!
//! Two signal structures are supported: a binomial sample (conjugate with
//! Beta beliefs) and a uniform window around the truth (used with discrete
//! beliefs). The module also computes how the mean and the mode move, which
//! is where elicited modes and structural means can disagree in sign.

use serde::{Deserialize, Serialize};

use crate::distributions::{BeliefDistribution, BetaBelief, DiscreteBelief, Interval, PROB_TOL};
use crate::error::{Error, Result};

/// Observed share `x_hat` among `n` sampled peers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinomialSignal {
    pub x_hat: f64,
    pub n: u64,
}

impl BinomialSignal {
    pub fn new(x_hat: f64, n: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&x_hat) {
            return Err(Error::InvalidParameter(format!(
                "x_hat {x_hat} outside [0, 1]"
            )));
        }
        if n == 0 {
            return Err(Error::InvalidParameter(
                "sample size must be at least 1".into(),
            ));
        }
        Ok(Self { x_hat, n })
    }

    /// Real-valued success pseudo-count `x_hat · n`.
    pub fn successes(&self) -> f64 {
        self.x_hat * self.n as f64
    }
}

/// A signal known to fall uniformly within `half_width` of the truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformSignal {
    pub signal: f64,
    pub half_width: f64,
}

impl UniformSignal {
    pub fn new(signal: f64, half_width: f64) -> Result<Self> {
        if !signal.is_finite() || !(half_width >= 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "uniform signal ({signal}, {half_width}) needs a finite signal and a non-negative half-width"
            )));
        }
        Ok(Self { signal, half_width })
    }
}

/// Either signal structure, tagged for JSON as `{"kind": "binomial", ...}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Signal {
    Binomial(BinomialSignal),
    Uniform(UniformSignal),
}

impl Signal {
    /// Posterior belief. Binomial signals apply to Beta beliefs and uniform
    /// signals to discrete ones.
    pub fn update(&self, prior: &BeliefDistribution) -> Result<BeliefDistribution> {
        match (self, prior) {
            (Signal::Binomial(s), BeliefDistribution::Beta(b)) => {
                Ok(beta_binomial_update(b, s).into())
            }
            (Signal::Uniform(s), BeliefDistribution::Discrete(d)) => {
                uniform_window_update(d, s).map(Into::into)
            }
            (Signal::Binomial(_), BeliefDistribution::Discrete(_)) => {
                Err(Error::IncompatibleSignal(
                    "binomial updating is implemented for Beta priors only".into(),
                ))
            }
            (Signal::Uniform(_), BeliefDistribution::Beta(_)) => Err(Error::IncompatibleSignal(
                "uniform-window updating is implemented for discrete priors only".into(),
            )),
        }
    }
}

/// Conjugate update `Beta(α + x̂n, β + (1 − x̂)n)` with real pseudo-counts.
pub fn beta_binomial_update(prior: &BetaBelief, sig: &BinomialSignal) -> BetaBelief {
    let k = sig.successes();
    BetaBelief::new(prior.alpha() + k, prior.beta() + sig.n as f64 - k)
        .expect("shapes stay positive when adding non-negative counts")
}

/// Range of posterior means over every Beta prior with `α + β ≤ cap`
/// (shapes relaxed to `α, β ≥ 0`): `[x̂n/(n + S), (S + x̂n)/(n + S)]`.
pub fn posterior_mean_bounds(sig: &BinomialSignal, shape_sum_cap: f64) -> Result<Interval> {
    check_cap(shape_sum_cap)?;
    let n = sig.n as f64;
    let k = sig.successes();
    Ok(Interval::new(
        k / (n + shape_sum_cap),
        (shape_sum_cap + k) / (n + shape_sum_cap),
    ))
}

/// Range of posterior modes `(α − 1 + x̂n)/(α + β − 2 + n)` under the same
/// relaxation. Both endpoints are attained at `α + β = S`, with `α = 0` for
/// the lower and `α = S` for the upper end.
pub fn posterior_mode_bounds(sig: &BinomialSignal, shape_sum_cap: f64) -> Result<Interval> {
    check_cap(shape_sum_cap)?;
    let n = sig.n as f64;
    let k = sig.successes();
    let denom = shape_sum_cap + n - 2.0;
    if denom <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "mode bounds need S + n > 2, got S = {shape_sum_cap}, n = {n}"
        )));
    }
    let lo = (k - 1.0) / denom;
    let hi = (shape_sum_cap - 1.0 + k) / denom;
    Ok(Interval::new(lo.min(hi), hi.max(lo)))
}

fn check_cap(cap: f64) -> Result<()> {
    if cap > 0.0 && cap.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "shape-sum cap {cap} must be positive"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
    Unchanged,
}

impl Direction {
    pub fn between(before: f64, after: f64) -> Self {
        if (after - before).abs() <= PROB_TOL {
            Direction::Unchanged
        } else if after > before {
            Direction::Up
        } else {
            Direction::Down
        }
    }

    fn opposes(self, other: Direction) -> bool {
        matches!(
            (self, other),
            (Direction::Up, Direction::Down) | (Direction::Down, Direction::Up)
        )
    }
}

/// How the mean and the mode moved between a prior and its posterior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpdateReport {
    pub prior_mean: f64,
    pub prior_mode: f64,
    pub post_mean: f64,
    pub post_mode: f64,
    pub mean_direction: Direction,
    pub mode_direction: Direction,
    pub opposite: bool,
}

impl UpdateReport {
    pub fn compare(prior: &BeliefDistribution, posterior: &BeliefDistribution) -> Result<Self> {
        let (prior_mean, prior_mode) = (prior.mean(), prior.mode()?);
        let (post_mean, post_mode) = (posterior.mean(), posterior.mode()?);
        let mean_direction = Direction::between(prior_mean, post_mean);
        let mode_direction = Direction::between(prior_mode, post_mode);
        Ok(Self {
            prior_mean,
            prior_mode,
            post_mean,
            post_mode,
            mean_direction,
            mode_direction,
            opposite: mean_direction.opposes(mode_direction),
        })
    }
}

/// Updates a Beta prior on a binomial signal and reports whether mean and
/// mode moved in opposite directions.
pub fn opposite_direction(prior: &BetaBelief, sig: &BinomialSignal) -> Result<UpdateReport> {
    let post = beta_binomial_update(prior, sig);
    UpdateReport::compare(&(*prior).into(), &post.into())
}

/// Drops atoms outside `[signal − w, signal + w]` and renormalizes the rest.
pub fn uniform_window_update(
    prior: &DiscreteBelief,
    sig: &UniformSignal,
) -> Result<DiscreteBelief> {
    let kept: Vec<(f64, f64)> = prior
        .atoms()
        .iter()
        .filter(|a| (a.value - sig.signal).abs() <= sig.half_width + PROB_TOL)
        .map(|a| (a.value, a.prob))
        .collect();
    if kept.is_empty() {
        return Err(Error::EmptyPosterior);
    }
    let total: f64 = kept.iter().map(|(_, p)| p).sum();
    DiscreteBelief::new(kept.into_iter().map(|(v, p)| (v, p / total)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn fig1() -> BetaBelief {
        BetaBelief::new(1.5, 4.0).unwrap()
    }

    fn intervention() -> BinomialSignal {
        BinomialSignal::new(0.17, 1234).unwrap()
    }

    fn b1() -> DiscreteBelief {
        DiscreteBelief::new([
            (0.0, 0.30),
            (0.12, 0.10),
            (0.17, 0.15),
            (0.22, 0.10),
            (0.30, 0.35),
        ])
        .unwrap()
    }

    fn b2() -> DiscreteBelief {
        DiscreteBelief::new([(0.05, 0.35), (0.08, 0.20), (0.12, 0.20), (0.17, 0.25)]).unwrap()
    }

    #[test]
    fn conjugate_update_of_fig1_belief() {
        let post = beta_binomial_update(&fig1(), &intervention());
        assert_abs_diff_eq!(post.alpha(), 211.28, epsilon = 1e-10);
        assert_abs_diff_eq!(post.beta(), 1028.22, epsilon = 1e-10);
        assert_abs_diff_eq!(post.mean(), 211.28 / 1239.5, epsilon = 1e-15);
        assert_abs_diff_eq!(post.mode().unwrap(), 210.28 / 1237.5, epsilon = 1e-15);
        assert_abs_diff_eq!(post.mean(), 0.170_455, epsilon = 1e-6);
        assert_abs_diff_eq!(post.mode().unwrap(), 0.169_923, epsilon = 1e-6);
    }

    #[test]
    fn symmetric_update_is_a_fixed_point() {
        let prior = BetaBelief::new(2.0, 2.0).unwrap();
        let post = beta_binomial_update(&prior, &BinomialSignal::new(0.5, 100).unwrap());
        assert_eq!((post.alpha(), post.beta()), (52.0, 52.0));
        let rep = opposite_direction(&prior, &BinomialSignal::new(0.5, 100).unwrap()).unwrap();
        assert_eq!(rep.mean_direction, Direction::Unchanged);
        assert_eq!(rep.mode_direction, Direction::Unchanged);
        assert!(!rep.opposite);
    }

    #[test]
    fn one_observation_at_the_prior_mean_keeps_it() {
        let prior = BetaBelief::new(3.0, 5.0).unwrap();
        let post = beta_binomial_update(&prior, &BinomialSignal::new(prior.mean(), 1).unwrap());
        assert_abs_diff_eq!(post.mean(), prior.mean(), epsilon = 1e-15);
        let post = beta_binomial_update(&prior, &BinomialSignal::new(0.9, 1).unwrap());
        assert!(post.mean() > prior.mean() && post.mean() < 0.9);
    }

    #[test]
    fn mean_bounds() {
        let iv = posterior_mean_bounds(&intervention(), 1.0).unwrap();
        assert_abs_diff_eq!(iv.lo, 0.17 * 1234.0 / 1235.0, epsilon = 1e-15);
        assert_abs_diff_eq!(iv.hi, (1.0 + 0.17 * 1234.0) / 1235.0, epsilon = 1e-15);
        let iv = posterior_mean_bounds(&BinomialSignal::new(0.5, 1).unwrap(), 1.0).unwrap();
        assert_abs_diff_eq!(iv.lo, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(iv.hi, 0.75, epsilon = 1e-15);
        let iv =
            posterior_mean_bounds(&BinomialSignal::new(0.17, 100_000_000).unwrap(), 20.0).unwrap();
        assert!(iv.width() < 1e-6 && iv.contains(0.17));
        assert!(posterior_mean_bounds(&intervention(), 0.0).is_err());
    }

    #[test]
    fn mode_bounds() {
        let iv = posterior_mode_bounds(&intervention(), 1.0).unwrap();
        // Brute force over prior shapes with α + β ≤ 1.
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..=1000 {
            let a = i as f64 / 1000.0;
            let m = (a + 0.17 * 1234.0 - 1.0) / (1.0 + 1234.0 - 2.0);
            lo = lo.min(m);
            hi = hi.max(m);
        }
        assert_abs_diff_eq!(iv.lo, lo, epsilon = 1e-12);
        assert_abs_diff_eq!(iv.hi, hi, epsilon = 1e-12);
        // The linearized [1.0008 x̂ − 0.00082, 1.00082 x̂] is close, not exact.
        assert_abs_diff_eq!(iv.lo, 0.169_316, epsilon = 2e-5);
        assert_abs_diff_eq!(iv.hi, 0.170_139, epsilon = 2e-5);
        let post_mode = beta_binomial_update(&fig1(), &intervention())
            .mode()
            .unwrap();
        assert!(iv.contains(post_mode));
        let wide = posterior_mode_bounds(&intervention(), 5.5).unwrap();
        assert!(wide.contains(post_mode));
        let iv =
            posterior_mode_bounds(&BinomialSignal::new(0.17, 100_000_000).unwrap(), 20.0).unwrap();
        assert!(iv.width() < 1e-6 && iv.contains(0.17));
    }

    #[test]
    fn fig1_updates_in_opposite_directions() {
        let rep = opposite_direction(&fig1(), &intervention()).unwrap();
        assert_eq!(rep.mean_direction, Direction::Down);
        assert_eq!(rep.mode_direction, Direction::Up);
        assert!(rep.opposite);
        assert_abs_diff_eq!(rep.prior_mean, 0.2727, epsilon = 1e-4);
        assert_abs_diff_eq!(rep.prior_mode, 0.1429, epsilon = 1e-4);
    }

    #[test]
    fn right_skewed_prior_moves_both_down() {
        let rep = opposite_direction(&BetaBelief::new(4.0, 1.5).unwrap(), &intervention()).unwrap();
        assert_eq!(rep.mean_direction, Direction::Down);
        assert_eq!(rep.mode_direction, Direction::Down);
        assert!(!rep.opposite);
    }

    #[test]
    fn undefined_prior_mode_propagates() {
        let err =
            opposite_direction(&BetaBelief::new(1.0, 3.0).unwrap(), &intervention()).unwrap_err();
        assert!(matches!(err, Error::UndefinedMode { .. }));
    }

    #[test]
    fn stylized_posteriors() {
        let sig = UniformSignal::new(0.17, 0.10).unwrap();
        let p1 = uniform_window_update(&b1(), &sig).unwrap();
        let want1 = [
            (0.12, 0.10 / 0.35),
            (0.17, 0.15 / 0.35),
            (0.22, 0.10 / 0.35),
        ];
        for (a, (v, p)) in p1.atoms().iter().zip(want1) {
            assert_eq!(a.value, v);
            assert_abs_diff_eq!(a.prob, p, epsilon = 1e-15);
        }
        let p2 = uniform_window_update(&b2(), &sig).unwrap();
        let want2 = [
            (0.08, 0.20 / 0.65),
            (0.12, 0.20 / 0.65),
            (0.17, 0.25 / 0.65),
        ];
        assert_eq!(p2.atoms().len(), 3);
        for (a, (v, p)) in p2.atoms().iter().zip(want2) {
            assert_eq!(a.value, v);
            assert_abs_diff_eq!(a.prob, p, epsilon = 1e-15);
        }
    }

    #[test]
    fn window_covering_everything_keeps_prior() {
        let sig = UniformSignal::new(0.5, 0.5).unwrap();
        assert_eq!(uniform_window_update(&b1(), &sig).unwrap(), b1());
    }

    #[test]
    fn empty_posterior_is_an_error() {
        let sig = UniformSignal::new(0.9, 0.05).unwrap();
        assert_eq!(
            uniform_window_update(&b1(), &sig),
            Err(Error::EmptyPosterior)
        );
    }

    #[test]
    fn survivors_keep_relative_odds() {
        let sig = UniformSignal::new(0.17, 0.10).unwrap();
        let post = uniform_window_update(&b2(), &sig).unwrap();
        let ratio_prior = 0.25 / 0.20;
        let ratio_post = post.atoms()[2].prob / post.atoms()[1].prob;
        assert_abs_diff_eq!(ratio_post, ratio_prior, epsilon = 1e-14);
    }

    #[test]
    fn signal_dispatch_and_json() {
        let s: Signal =
            serde_json::from_str(r#"{"kind":"binomial","x_hat":0.17,"n":1234}"#).unwrap();
        let post = s.update(&fig1().into()).unwrap();
        assert_abs_diff_eq!(post.mean(), 211.28 / 1239.5, epsilon = 1e-15);
        assert!(matches!(
            s.update(&b1().into()),
            Err(Error::IncompatibleSignal(_))
        ));
        let u: Signal =
            serde_json::from_str(r#"{"kind":"uniform","signal":0.17,"half_width":0.1}"#).unwrap();
        assert!(u.update(&b1().into()).is_ok());
        assert!(matches!(
            u.update(&fig1().into()),
            Err(Error::IncompatibleSignal(_))
        ));
    }

    #[test]
    fn signal_validation() {
        assert!(BinomialSignal::new(0.17, 0).is_err());
        assert!(BinomialSignal::new(1.2, 10).is_err());
        assert!(UniformSignal::new(0.17, -0.1).is_err());
    }
}
