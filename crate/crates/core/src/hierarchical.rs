//! Population of heterogeneous Beta beliefs and what it implies for reported
//! modes.
//!
//! Shapes are drawn as `α − 1 ~ χ²(ℓ)` and `β − 1 ~ χ²(q)`, independently.
//! Because a ratio `U/(U + V)` of independent χ² variables is Beta, the modes
//! `(α − 1)/(α + β − 2)` of the population follow `Beta(ℓ/2, q/2)`. Fitting
//! that Beta to observed modes by maximum likelihood recovers `(ℓ, q)`, and
//! simulating the population measures how often mean and mode fall on
//! opposite sides of a revealed share.

use rand::Rng;
use rand_distr::{ChiSquared, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{BetaBelief, Interval};
use crate::error::{Error, Result};
use crate::optimize::{nelder_mead, NelderMeadOptions};
use crate::rng::substream;
use crate::special::ln_beta;
use crate::updating::BinomialSignal;

/// Two-sided 95% standard-normal quantile.
const Z_95: f64 = 1.959_963_984_540_054;
/// Reports at exactly 0 or 1 are moved this far inside the unit interval.
pub const CLAMP_EPS: f64 = 1e-6;
pub const MIN_OBSERVATIONS: usize = 10;

/// Degrees of freedom `(ℓ, q)` of the shape hyperprior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub ell: f64,
    pub q: f64,
}

impl HyperParams {
    pub fn new(ell: f64, q: f64) -> Result<Self> {
        if !(ell > 0.0 && q > 0.0 && ell.is_finite() && q.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "degrees of freedom must be positive, got ({ell}, {q})"
            )));
        }
        Ok(Self { ell, q })
    }

    /// Rounded-up treatment-sample estimates, `(ℓ, q) = (1, 3)`.
    pub fn treatment_rounded() -> Self {
        Self { ell: 1.0, q: 3.0 }
    }

    /// Unrounded treatment-sample estimates, twice the fitted shapes
    /// `(0.232, 1.383)`.
    pub fn treatment_raw() -> Self {
        Self {
            ell: 2.0 * TREATMENT_SHAPES.0,
            q: 2.0 * TREATMENT_SHAPES.1,
        }
    }

    /// Hyperparameters whose mode distribution is `Beta(a, b)`.
    pub fn from_mode_shapes(a: f64, b: f64) -> Result<Self> {
        Self::new(2.0 * a, 2.0 * b)
    }
}

/// Fitted `Beta(ℓ/2, q/2)` shapes of first-survey modes, treated subjects.
pub const TREATMENT_SHAPES: (f64, f64) = (0.232, 1.383);
/// Same, full sample.
pub const FULL_SAMPLE_SHAPES: (f64, f64) = (0.172, 1.192);

pub(crate) fn draw_belief<R: Rng + ?Sized>(
    alpha_dof: &ChiSquared<f64>,
    beta_dof: &ChiSquared<f64>,
    rng: &mut R,
) -> BetaBelief {
    let a = 1.0 + alpha_dof.sample(rng);
    let b = 1.0 + beta_dof.sample(rng);
    BetaBelief::new(a, b).expect("shapes are at least one")
}

pub(crate) fn chi_squared(dof: f64) -> Result<ChiSquared<f64>> {
    ChiSquared::new(dof).map_err(|e| Error::InvalidParameter(format!("χ²({dof}): {e}")))
}

/// Draws `draws` Beta beliefs; draw `i` depends only on `(seed, i)`.
pub fn sample_population(hyper: HyperParams, draws: usize, seed: u64) -> Result<Vec<BetaBelief>> {
    if draws == 0 {
        return Err(Error::InvalidParameter("need at least one draw".into()));
    }
    let (ca, cb) = (chi_squared(hyper.ell)?, chi_squared(hyper.q)?);
    Ok((0..draws as u64)
        .into_par_iter()
        .map(|i| draw_belief(&ca, &cb, &mut substream(seed, i)))
        .collect())
}

/// Distribution of population modes, `Beta(ℓ/2, q/2)`.
pub fn mode_distribution(hyper: HyperParams) -> BetaBelief {
    BetaBelief::new(hyper.ell / 2.0, hyper.q / 2.0).expect("validated hyperparameters")
}

/// Mean and variance of the mode distribution.
pub fn model_fit_moments(hyper: HyperParams) -> (f64, f64) {
    let d = mode_distribution(hyper);
    (d.mean(), d.variance())
}

/// Reported modes, one per subject.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeDataset {
    reports: Vec<f64>,
    clamped: usize,
}

impl ModeDataset {
    /// Validates reports in `[0, 1]`, moving exact 0s and 1s inside by
    /// [`CLAMP_EPS`] and counting how many were moved.
    pub fn new(values: impl IntoIterator<Item = f64>) -> Result<Self> {
        let mut clamped = 0;
        let reports = values
            .into_iter()
            .map(|v| {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidParameter(format!(
                        "report {v} outside [0, 1]"
                    )));
                }
                if v == 0.0 || v == 1.0 {
                    clamped += 1;
                    return Ok(v.clamp(CLAMP_EPS, 1.0 - CLAMP_EPS));
                }
                Ok(v)
            })
            .collect::<Result<Vec<_>>>()?;
        if reports.is_empty() {
            return Err(Error::DegenerateData("no reports".into()));
        }
        Ok(Self { reports, clamped })
    }

    pub fn reports(&self) -> &[f64] {
        &self.reports
    }

    pub fn clamped(&self) -> usize {
        self.clamped
    }

    pub fn len(&self) -> usize {
        self.reports.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reports.is_empty()
    }
}

/// Maximum-likelihood `Beta(a, b)` fit to reported modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub a_hat: f64,
    pub b_hat: f64,
    pub ci_a: Interval,
    pub ci_b: Interval,
    pub se_a: f64,
    pub se_b: f64,
    pub loglik: f64,
    /// Log-likelihood at the method-of-moments starting point.
    pub loglik_start: f64,
    /// `⌈2·a_hat⌉`, the implied integer degrees of freedom `ℓ`.
    pub ell_rounded: u32,
    /// `⌈2·b_hat⌉`.
    pub q_rounded: u32,
    pub n_obs: usize,
    pub clamped: usize,
    pub iterations: usize,
}

impl FitResult {
    pub fn hyper_raw(&self) -> HyperParams {
        HyperParams {
            ell: 2.0 * self.a_hat,
            q: 2.0 * self.b_hat,
        }
    }

    pub fn hyper_rounded(&self) -> HyperParams {
        HyperParams {
            ell: self.ell_rounded as f64,
            q: self.q_rounded as f64,
        }
    }
}

/// Sufficient statistics of the Beta likelihood.
struct BetaSuff {
    n: f64,
    mean_ln_x: f64,
    mean_ln_1mx: f64,
}

impl BetaSuff {
    fn loglik(&self, a: f64, b: f64) -> f64 {
        self.n * ((a - 1.0) * self.mean_ln_x + (b - 1.0) * self.mean_ln_1mx - ln_beta(a, b))
    }
}

pub fn fit_mle(data: &ModeDataset) -> Result<FitResult> {
    let xs = data.reports();
    if xs.len() < MIN_OBSERVATIONS {
        return Err(Error::DegenerateData(format!(
            "need at least {MIN_OBSERVATIONS} reports, got {}",
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    if var <= f64::EPSILON * mean * mean {
        return Err(Error::DegenerateData("all reports are equal".into()));
    }
    let suff = BetaSuff {
        n,
        mean_ln_x: xs.iter().map(|x| x.ln()).sum::<f64>() / n,
        mean_ln_1mx: xs.iter().map(|x| (1.0 - x).ln()).sum::<f64>() / n,
    };

    let common = mean * (1.0 - mean) / var - 1.0;
    let (a0, b0) = if common > 0.0 {
        (mean * common, (1.0 - mean) * common)
    } else {
        (1.0, 1.0)
    };

    // Search over log-shapes so the simplex never leaves the positive quadrant.
    let objective = |t: &[f64]| -suff.loglik(t[0].exp(), t[1].exp()) / suff.n;
    let opts = NelderMeadOptions {
        f_tol: 1e-14,
        x_tol: 1e-10,
        ..Default::default()
    };
    let min = nelder_mead(objective, &[a0.ln(), b0.ln()], opts)?;
    let (a, b) = (min.x[0].exp(), min.x[1].exp());

    let cov = inverse_observed_information(&suff, a, b)?;
    let (se_a, se_b) = (cov[0][0].sqrt(), cov[1][1].sqrt());
    Ok(FitResult {
        a_hat: a,
        b_hat: b,
        ci_a: Interval::new(a - Z_95 * se_a, a + Z_95 * se_a),
        ci_b: Interval::new(b - Z_95 * se_b, b + Z_95 * se_b),
        se_a,
        se_b,
        loglik: suff.loglik(a, b),
        loglik_start: suff.loglik(a0, b0),
        ell_rounded: (2.0 * a).ceil() as u32,
        q_rounded: (2.0 * b).ceil() as u32,
        n_obs: xs.len(),
        clamped: data.clamped(),
        iterations: min.iterations,
    })
}

/// Inverse of the negated central-difference Hessian of the log-likelihood.
fn inverse_observed_information(suff: &BetaSuff, a: f64, b: f64) -> Result<[[f64; 2]; 2]> {
    let (ha, hb) = (1e-4 * a, 1e-4 * b);
    let f = |x: f64, y: f64| suff.loglik(x, y);
    let f0 = f(a, b);
    let faa = (f(a + ha, b) - 2.0 * f0 + f(a - ha, b)) / (ha * ha);
    let fbb = (f(a, b + hb) - 2.0 * f0 + f(a, b - hb)) / (hb * hb);
    let fab = (f(a + ha, b + hb) - f(a + ha, b - hb) - f(a - ha, b + hb) + f(a - ha, b - hb))
        / (4.0 * ha * hb);
    let (i11, i22, i12) = (-faa, -fbb, -fab);
    let det = i11 * i22 - i12 * i12;
    if !(det > 0.0 && i11 > 0.0) {
        return Err(Error::DegenerateData(
            "observed information is not positive definite".into(),
        ));
    }
    Ok([[i22 / det, -i12 / det], [-i12 / det, i11 / det]])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantifyParams {
    pub ell: f64,
    pub q: f64,
    pub x_hat: f64,
    pub n: u64,
    pub delta: f64,
}

/// Monte Carlo share of beliefs whose mean and mode straddle the revealed
/// share and whose mode window outweighs the mean window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantifyResult {
    pub share: f64,
    /// Share meeting the straddle condition alone.
    pub share_without_mass_check: f64,
    #[serde(rename = "R")]
    pub draws: usize,
    pub seed: u64,
    pub params: QuantifyParams,
}

pub fn quantify_opposite_share(
    hyper: HyperParams,
    sig: &BinomialSignal,
    delta: f64,
    draws: usize,
    seed: u64,
) -> Result<QuantifyResult> {
    if draws == 0 {
        return Err(Error::InvalidParameter("need at least one draw".into()));
    }
    if !(0.0..0.5).contains(&delta) {
        return Err(Error::InvalidParameter(format!(
            "window half-width {delta} outside [0, 0.5)"
        )));
    }
    let (ca, cb) = (chi_squared(hyper.ell)?, chi_squared(hyper.q)?);
    let x_hat = sig.x_hat;

    let (straddle, both) = (0..draws as u64)
        .into_par_iter()
        .map(|i| {
            let belief = draw_belief(&ca, &cb, &mut substream(seed, i));
            let Ok(mode) = belief.mode() else {
                return (0u64, 0u64);
            };
            let mean = belief.mean();
            let straddles = (mean > x_hat && mode < x_hat) || (mean < x_hat && mode > x_hat);
            if !straddles {
                return (0, 0);
            }
            let heavier = belief.window_mass(mode, delta) >= belief.window_mass(mean, delta);
            (1, heavier as u64)
        })
        .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1));

    Ok(QuantifyResult {
        share: both as f64 / draws as f64,
        share_without_mass_check: straddle as f64 / draws as f64,
        draws,
        seed,
        params: QuantifyParams {
            ell: hyper.ell,
            q: hyper.q,
            x_hat,
            n: sig.n,
            delta,
        },
    })
}
