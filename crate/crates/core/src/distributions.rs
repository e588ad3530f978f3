//! Belief distributions over a proportion `x ∈ [0, 1]` and their summary
//! functionals.
//!
//! Two families are supported: finitely many atoms ([`DiscreteBelief`]) and
//! the Beta family ([`BetaBelief`]). [`BeliefDistribution`] wraps either and
//! is what the elicitation and updating code consumes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{ln_beta, reg_inc_beta};

/// Tolerance used for probability normalization, tie detection and inclusive
/// window endpoints on atoms.
pub const PROB_TOL: f64 = 1e-12;

/// Closed interval `[lo, hi]` of proportions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "interval [{lo}, {hi}] is reversed");
        Self { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }
}

/// One support point of a discrete belief.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub value: f64,
    pub prob: f64,
}

/// Finitely supported belief: atoms with strictly increasing values in
/// `[0, 1]` and strictly positive probabilities summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteBelief {
    atoms: Vec<Atom>,
}

impl DiscreteBelief {
    /// Builds a belief from `(value, probability)` pairs in any order.
    pub fn new(pairs: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut atoms: Vec<Atom> = pairs
            .into_iter()
            .map(|(value, prob)| Atom { value, prob })
            .collect();
        if atoms.is_empty() {
            return Err(Error::InvalidDistribution("no atoms".into()));
        }
        for a in &atoms {
            if !a.value.is_finite() || !(0.0..=1.0).contains(&a.value) {
                return Err(Error::InvalidDistribution(format!(
                    "atom value {} outside [0, 1]",
                    a.value
                )));
            }
            if !a.prob.is_finite() || a.prob <= 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "atom at {} has non-positive probability {}",
                    a.value, a.prob
                )));
            }
        }
        atoms.sort_by(|x, y| x.value.total_cmp(&y.value));
        if let Some(w) = atoms.windows(2).find(|w| w[0].value >= w[1].value) {
            return Err(Error::InvalidDistribution(format!(
                "duplicate atom value {}",
                w[1].value
            )));
        }
        let total: f64 = atoms.iter().map(|a| a.prob).sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        Ok(Self { atoms })
    }

    /// Single atom carrying all mass.
    pub fn point_mass(value: f64) -> Result<Self> {
        Self::new([(value, 1.0)])
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.atoms.iter().map(|a| (a.value, a.prob)).collect()
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|a| a.value * a.prob).sum()
    }

    /// Value of the unique most probable atom.
    pub fn mode(&self) -> Result<f64> {
        let best = self
            .atoms
            .iter()
            .max_by(|x, y| x.prob.total_cmp(&y.prob))
            .expect("non-empty by construction");
        let ties = self
            .atoms
            .iter()
            .filter(|a| (a.prob - best.prob).abs() <= PROB_TOL)
            .count();
        if ties > 1 {
            return Err(Error::AmbiguousMode { prob: best.prob });
        }
        Ok(best.value)
    }

    /// Full minimizer set of `E|x − r|`.
    ///
    /// The minimizer is the first atom whose cumulative mass passes 1/2; when
    /// the cumulative mass hits 1/2 exactly, the loss is flat up to the next
    /// atom and the whole gap is returned.
    pub fn median(&self) -> Interval {
        let mut cum = 0.0;
        for (k, a) in self.atoms.iter().enumerate() {
            cum += a.prob;
            if (cum - 0.5).abs() <= PROB_TOL {
                let next = self.atoms.get(k + 1).map_or(a.value, |n| n.value);
                return Interval::new(a.value, next);
            }
            if cum > 0.5 {
                return Interval::point(a.value);
            }
        }
        // Only reachable through rounding when the last atom closes the sum.
        Interval::point(self.atoms.last().expect("non-empty").value)
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.atoms
            .iter()
            .map(|a| a.prob * (a.value - m).powi(2))
            .sum()
    }

    /// Mass of atoms with `|value − r| ≤ delta` (inclusive endpoints).
    pub fn window_mass(&self, r: f64, delta: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|a| (a.value - r).abs() <= delta + PROB_TOL)
            .map(|a| a.prob)
            .sum()
    }

    pub fn cdf(&self, t: f64) -> f64 {
        self.atoms
            .iter()
            .take_while(|a| a.value <= t + PROB_TOL)
            .map(|a| a.prob)
            .sum::<f64>()
            .min(1.0)
    }

    /// Smallest distance between two support points; `None` for a point mass.
    pub fn min_gap(&self) -> Option<f64> {
        self.atoms
            .windows(2)
            .map(|w| w[1].value - w[0].value)
            .min_by(f64::total_cmp)
    }

    pub fn expected_abs_deviation(&self, r: f64) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.prob * (a.value - r).abs())
            .sum()
    }
}

/// Beta(α, β) belief on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaBelief {
    alpha: f64,
    beta: f64,
}

impl BetaBelief {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite() && alpha > 0.0 && beta > 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "Beta shapes must be positive and finite, got ({alpha}, {beta})"
            )));
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn mean(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }

    /// `(α − 1)/(α + β − 2)`, defined only when both shapes exceed one.
    pub fn mode(&self) -> Result<f64> {
        if self.alpha <= 1.0 || self.beta <= 1.0 {
            return Err(Error::UndefinedMode {
                alpha: self.alpha,
                beta: self.beta,
            });
        }
        Ok((self.alpha - 1.0) / (self.alpha + self.beta - 2.0))
    }

    pub fn variance(&self) -> f64 {
        let s = self.alpha + self.beta;
        self.alpha * self.beta / (s * s * (s + 1.0))
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        if !(0.0..=1.0).contains(&x) {
            return f64::NEG_INFINITY;
        }
        (self.alpha - 1.0) * x.ln() + (self.beta - 1.0) * (1.0 - x).ln()
            - ln_beta(self.alpha, self.beta)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if !(0.0..=1.0).contains(&x) {
            return 0.0;
        }
        // Boundary values follow the limit of the kernel, avoiding 0 · ∞.
        if x == 0.0 || x == 1.0 {
            let shape = if x == 0.0 { self.alpha } else { self.beta };
            return match shape.partial_cmp(&1.0) {
                Some(std::cmp::Ordering::Greater) => 0.0,
                Some(std::cmp::Ordering::Equal) => (-ln_beta(self.alpha, self.beta)).exp(),
                _ => f64::INFINITY,
            };
        }
        self.ln_pdf(x).exp()
    }

    pub fn cdf(&self, t: f64) -> f64 {
        reg_inc_beta(self.alpha, self.beta, t)
    }

    /// Inverse CDF at 1/2 by bisection.
    pub fn median(&self) -> f64 {
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) < 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn window_mass(&self, r: f64, delta: f64) -> f64 {
        let hi = (r + delta).min(1.0);
        let lo = (r - delta).max(0.0);
        if hi <= lo {
            return 0.0;
        }
        (self.cdf(hi) - self.cdf(lo)).max(0.0)
    }

    /// `E|x − r|` in closed form, using `E[x; x ≤ r] = mean · I_r(α + 1, β)`.
    pub fn expected_abs_deviation(&self, r: f64) -> f64 {
        let f = self.cdf(r);
        let partial = reg_inc_beta(self.alpha + 1.0, self.beta, r);
        r * (2.0 * f - 1.0) + self.mean() * (1.0 - 2.0 * partial)
    }
}

/// A subject's belief over an unknown proportion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDistribution", into = "RawDistribution")]
pub enum BeliefDistribution {
    Discrete(DiscreteBelief),
    Beta(BetaBelief),
}

impl From<DiscreteBelief> for BeliefDistribution {
    fn from(d: DiscreteBelief) -> Self {
        BeliefDistribution::Discrete(d)
    }
}

impl From<BetaBelief> for BeliefDistribution {
    fn from(b: BetaBelief) -> Self {
        BeliefDistribution::Beta(b)
    }
}

impl BeliefDistribution {
    pub fn beta(alpha: f64, beta: f64) -> Result<Self> {
        BetaBelief::new(alpha, beta).map(Into::into)
    }

    pub fn discrete(pairs: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        DiscreteBelief::new(pairs).map(Into::into)
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, BeliefDistribution::Discrete(_))
    }

    pub fn mean(&self) -> f64 {
        match self {
            BeliefDistribution::Discrete(d) => d.mean(),
            BeliefDistribution::Beta(b) => b.mean(),
        }
    }

    pub fn mode(&self) -> Result<f64> {
        match self {
            BeliefDistribution::Discrete(d) => d.mode(),
            BeliefDistribution::Beta(b) => b.mode(),
        }
    }

    /// Set of minimizers of `E|x − r|`; a single point for Beta beliefs.
    pub fn median(&self) -> Interval {
        match self {
            BeliefDistribution::Discrete(d) => d.median(),
            BeliefDistribution::Beta(b) => Interval::point(b.median()),
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            BeliefDistribution::Discrete(d) => d.variance(),
            BeliefDistribution::Beta(b) => b.variance(),
        }
    }

    /// `P(x ∈ [r − delta, r + delta])`, the window clipped to `[0, 1]`.
    pub fn window_mass(&self, r: f64, delta: f64) -> f64 {
        match self {
            BeliefDistribution::Discrete(d) => d.window_mass(r, delta),
            BeliefDistribution::Beta(b) => b.window_mass(r, delta),
        }
    }

    /// `P(x ≤ t)`.
    pub fn cdf(&self, t: f64) -> f64 {
        match self {
            BeliefDistribution::Discrete(d) => d.cdf(t),
            BeliefDistribution::Beta(b) => b.cdf(t),
        }
    }

    /// `E[(x − r)²] = Var + (mean − r)²`.
    pub fn expected_sq_deviation(&self, r: f64) -> f64 {
        self.variance() + (self.mean() - r).powi(2)
    }

    pub fn expected_abs_deviation(&self, r: f64) -> f64 {
        match self {
            BeliefDistribution::Discrete(d) => d.expected_abs_deviation(r),
            BeliefDistribution::Beta(b) => b.expected_abs_deviation(r),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum RawDistribution {
    Discrete { atoms: Vec<(f64, f64)> },
    Beta { alpha: f64, beta: f64 },
}

impl TryFrom<RawDistribution> for BeliefDistribution {
    type Error = Error;

    fn try_from(raw: RawDistribution) -> Result<Self> {
        match raw {
            RawDistribution::Discrete { atoms } => BeliefDistribution::discrete(atoms),
            RawDistribution::Beta { alpha, beta } => BeliefDistribution::beta(alpha, beta),
        }
    }
}

impl From<BeliefDistribution> for RawDistribution {
    fn from(d: BeliefDistribution) -> Self {
        match d {
            BeliefDistribution::Discrete(d) => RawDistribution::Discrete { atoms: d.pairs() },
            BeliefDistribution::Beta(b) => RawDistribution::Beta {
                alpha: b.alpha,
                beta: b.beta,
            },
        }
    }
}
