//! Incentive schemes for point reports and the reports they make optimal.
//!
//! * window: pays `bonus` when `x` lands within `δ` of `r`; optimal reports
//!   sit near the mode
//! * quadratic: pays `B − A (x − r)²`; the mean is optimal
//! * absolute: pays `B − A abs(x − r)`; any median is optimal
//! * no incentive: nothing pins the report down
//!
//! The window scheme has no closed form, so its optimum is found by scanning
//! a `1e-4` grid of reports and refining every maximizer to `1e-7`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{BeliefDistribution, Interval, PROB_TOL};
use crate::error::{Error, Result};
use crate::optimize::golden_max;

/// Number of grid cells the report range `[0, 1]` is split into.
pub const GRID_CELLS: usize = 10_000;
/// Width of the final bracket around every window maximizer.
pub const REFINE_TOL: f64 = 1e-7;
/// Reports whose payoff is within this of the maximum count as maximizers.
pub const TIE_TOL: f64 = 1e-9;
/// Coarse-grid local maxima this close to the best grid value are refined.
const PEAK_SLACK: f64 = 1e-6;

/// Reward rule mapping a report `r` and the realized `x` to a payment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawScheme", into = "RawScheme")]
pub enum Scheme {
    /// Pays `bonus` iff `|r − x| ≤ delta`.
    Window {
        delta: f64,
        bonus: f64,
    },
    /// Pays `b − a (x − r)²`.
    Quadratic {
        a: f64,
        b: f64,
    },
    /// Pays `b − a |x − r|`.
    Absolute {
        a: f64,
        b: f64,
    },
    NoIncentive,
}

impl Scheme {
    pub fn window(delta: f64, bonus: f64) -> Result<Self> {
        Self::Window { delta, bonus }.validated()
    }

    pub fn quadratic(a: f64, b: f64) -> Result<Self> {
        Self::Quadratic { a, b }.validated()
    }

    pub fn absolute(a: f64, b: f64) -> Result<Self> {
        Self::Absolute { a, b }.validated()
    }

    fn validated(self) -> Result<Self> {
        match self {
            Scheme::Window { delta, bonus } => {
                if !(0.0..0.5).contains(&delta) {
                    return Err(Error::InvalidScheme(format!(
                        "window half-width {delta} outside [0, 0.5)"
                    )));
                }
                if !(bonus > 0.0 && bonus.is_finite()) {
                    return Err(Error::InvalidScheme(format!(
                        "bonus {bonus} must be positive"
                    )));
                }
            }
            Scheme::Quadratic { a, b } | Scheme::Absolute { a, b } => {
                if !(a > 0.0 && b > a && b.is_finite()) {
                    return Err(Error::InvalidScheme(format!(
                        "need B > A > 0, got A = {a}, B = {b}"
                    )));
                }
            }
            Scheme::NoIncentive => {}
        }
        Ok(self)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Window { .. } => "window",
            Scheme::Quadratic { .. } => "quadratic",
            Scheme::Absolute { .. } => "absolute",
            Scheme::NoIncentive => "no_incentive",
        }
    }

    /// Expected payment of report `r` under belief `dist`.
    pub fn expected_payoff(&self, dist: &BeliefDistribution, r: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::InvalidParameter(format!(
                "report {r} outside [0, 1]"
            )));
        }
        match *self {
            Scheme::Window { delta, bonus } => Ok(bonus * dist.window_mass(r, delta)),
            Scheme::Quadratic { a, b } => Ok(b - a * dist.expected_sq_deviation(r)),
            Scheme::Absolute { a, b } => Ok(b - a * dist.expected_abs_deviation(r)),
            Scheme::NoIncentive => Err(Error::NoBestResponse),
        }
    }

    /// Profit-maximizing report(s) under belief `dist`.
    pub fn optimal_report(&self, dist: &BeliefDistribution) -> Result<ReportSolution> {
        match *self {
            Scheme::Quadratic { .. } => {
                let r = dist.mean();
                Ok(ReportSolution {
                    reports: vec![Interval::point(r)],
                    report: r,
                    payoff: self.expected_payoff(dist, r)?,
                    method: SolveMethod::Analytic,
                })
            }
            Scheme::Absolute { .. } => {
                let m = dist.median();
                Ok(ReportSolution {
                    reports: vec![m],
                    report: m.lo,
                    payoff: self.expected_payoff(dist, m.lo)?,
                    method: SolveMethod::Analytic,
                })
            }
            Scheme::Window { delta, bonus } => Ok(window_search(dist, delta, bonus)),
            Scheme::NoIncentive => Err(Error::NoBestResponse),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
enum RawScheme {
    Window {
        delta: f64,
        #[serde(default = "default_bonus")]
        bonus: f64,
    },
    Quadratic {
        #[serde(alias = "A")]
        a: f64,
        #[serde(alias = "B")]
        b: f64,
    },
    Absolute {
        #[serde(alias = "A")]
        a: f64,
        #[serde(alias = "B")]
        b: f64,
    },
    #[serde(alias = "none")]
    NoIncentive,
}

fn default_bonus() -> f64 {
    1.0
}

impl TryFrom<RawScheme> for Scheme {
    type Error = Error;

    fn try_from(raw: RawScheme) -> Result<Self> {
        match raw {
            RawScheme::Window { delta, bonus } => Scheme::window(delta, bonus),
            RawScheme::Quadratic { a, b } => Scheme::quadratic(a, b),
            RawScheme::Absolute { a, b } => Scheme::absolute(a, b),
            RawScheme::NoIncentive => Ok(Scheme::NoIncentive),
        }
    }
}

impl From<Scheme> for RawScheme {
    fn from(s: Scheme) -> Self {
        match s {
            Scheme::Window { delta, bonus } => RawScheme::Window { delta, bonus },
            Scheme::Quadratic { a, b } => RawScheme::Quadratic { a, b },
            Scheme::Absolute { a, b } => RawScheme::Absolute { a, b },
            Scheme::NoIncentive => RawScheme::NoIncentive,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    Analytic,
    GridSearch,
}

/// Optimal reports of a scheme for one belief.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSolution {
    /// Every maximizing report, as disjoint closed intervals, smallest first.
    pub reports: Vec<Interval>,
    /// The single report a subject is taken to give. For window schemes this
    /// is the most probable atom inside a maximizing interval when one
    /// exists, otherwise the smallest maximizer.
    pub report: f64,
    pub payoff: f64,
    pub method: SolveMethod,
}

impl ReportSolution {
    pub fn contains(&self, r: f64) -> bool {
        self.reports.iter().any(|i| i.contains(r))
    }
}

fn window_search(dist: &BeliefDistribution, delta: f64, bonus: f64) -> ReportSolution {
    let payoff = |r: f64| bonus * dist.window_mass(r, delta);

    let mut cands: Vec<f64> = (0..=GRID_CELLS)
        .map(|i| i as f64 / GRID_CELLS as f64)
        .collect();
    if let BeliefDistribution::Discrete(d) = dist {
        // Plateaus of a discrete window payoff start and end at atom ± δ.
        for a in d.atoms() {
            for c in [a.value - delta, a.value, a.value + delta] {
                if (0.0..=1.0).contains(&c) {
                    cands.push(c);
                }
            }
        }
        cands.sort_by(f64::total_cmp);
        cands.dedup();
    }
    let vals: Vec<f64> = cands.par_iter().map(|&r| payoff(r)).collect();
    let coarse_best = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let flagged = |v: f64| v >= coarse_best - TIE_TOL;
    let mut found: Vec<(Interval, f64)> = Vec::new();
    let mut in_plateau = vec![false; cands.len()];

    let mut i = 0;
    while i < cands.len() {
        if !flagged(vals[i]) {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < cands.len() && flagged(vals[i + 1]) {
            i += 1;
        }
        let end = i;
        i += 1;
        // Discrete payoffs are piecewise constant, so every run is a plateau.
        // A continuous payoff only plateaus when the density is flat.
        if dist.is_discrete() || end - start >= 2 {
            let threshold = coarse_best - TIE_TOL;
            let lo = if start == 0 {
                cands[0]
            } else {
                bisect_edge(&payoff, threshold, cands[start - 1], cands[start])
            };
            let hi = if end + 1 == cands.len() {
                cands[end]
            } else {
                bisect_edge(&payoff, threshold, cands[end + 1], cands[end])
            };
            let best_in_run = vals[start..=end]
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max);
            found.push((Interval::new(lo, hi), best_in_run));
            in_plateau[start..=end].iter_mut().for_each(|p| *p = true);
        }
    }

    if !dist.is_discrete() {
        let last = cands.len() - 1;
        for k in 0..cands.len() {
            if in_plateau[k] || vals[k] < coarse_best - PEAK_SLACK {
                continue;
            }
            let left_ok = k == 0 || vals[k] > vals[k - 1];
            let right_ok = k == last || vals[k] >= vals[k + 1];
            if !(left_ok && right_ok) {
                continue;
            }
            let lo = cands[k.saturating_sub(1)];
            let hi = cands[(k + 2).min(last)];
            let (x, fx) = golden_max(payoff, lo, hi, REFINE_TOL);
            let (x, fx) = if fx >= vals[k] {
                (x, fx)
            } else {
                (cands[k], vals[k])
            };
            found.push((Interval::point(x), fx));
        }
    }

    let best = found.iter().map(|f| f.1).fold(f64::NEG_INFINITY, f64::max);
    let mut reports: Vec<Interval> = found
        .into_iter()
        .filter(|(_, v)| *v >= best - TIE_TOL)
        .map(|(iv, _)| iv)
        .collect();
    reports.sort_by(|a, b| a.lo.total_cmp(&b.lo));

    let report = representative(dist, &reports);
    ReportSolution {
        payoff: payoff(report),
        reports,
        report,
        method: SolveMethod::GridSearch,
    }
}

/// Shrinks `[outside, inside]` (in either order) around the point where the
/// payoff crosses `threshold`; returns the side that is still a maximizer.
fn bisect_edge(
    payoff: &impl Fn(f64) -> f64,
    threshold: f64,
    mut outside: f64,
    mut inside: f64,
) -> f64 {
    while (inside - outside).abs() > REFINE_TOL {
        let mid = 0.5 * (inside + outside);
        if payoff(mid) >= threshold {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    inside
}

fn representative(dist: &BeliefDistribution, reports: &[Interval]) -> f64 {
    if let BeliefDistribution::Discrete(d) = dist {
        let atom = d
            .atoms()
            .iter()
            .filter(|a| reports.iter().any(|iv| iv.contains(a.value)))
            // Highest probability first, then the smallest value.
            .min_by(|x, y| {
                y.prob
                    .total_cmp(&x.prob)
                    .then_with(|| x.value.total_cmp(&y.value))
            });
        if let Some(a) = atom {
            return a.value;
        }
    }
    reports.first().map_or(0.0, |iv| iv.lo)
}

/// Which sufficient condition localizes the window optimum to `mode ± δ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeCondition {
    /// Discrete belief whose atoms are more than `2δ` apart, so no window
    /// covers two atoms and the optimum is exactly the modal atom.
    DiscreteSeparated,
    /// Density increasing below the mode and decreasing above it on all of
    /// `[0, 1]`; every Beta with both shapes above one qualifies.
    GlobalUnimodal,
    /// Density single-peaked on `[m − ε, m + ε]` for some `ε > δ` and at least
    /// as high there as anywhere outside.
    LocalUnimodal,
    NotApplicable,
}

const UNIMODAL_GRID: usize = 10_000;

/// Checks which of the window-scheme sufficient conditions `dist` meets.
pub fn mode_report_condition(dist: &BeliefDistribution, delta: f64) -> ModeCondition {
    match dist {
        BeliefDistribution::Discrete(d) => match d.min_gap() {
            Some(gap) if gap <= 2.0 * delta + PROB_TOL => ModeCondition::NotApplicable,
            _ if d.mode().is_err() => ModeCondition::NotApplicable,
            _ => ModeCondition::DiscreteSeparated,
        },
        BeliefDistribution::Beta(b) if b.alpha() > 1.0 && b.beta() > 1.0 => {
            ModeCondition::GlobalUnimodal
        }
        BeliefDistribution::Beta(b) => {
            let xs: Vec<f64> = (0..UNIMODAL_GRID)
                .map(|k| (k as f64 + 0.5) / UNIMODAL_GRID as f64)
                .collect();
            let fs: Vec<f64> = xs.iter().map(|&x| b.pdf(x)).collect();
            if fs.iter().any(|f| !f.is_finite()) {
                return ModeCondition::NotApplicable;
            }
            let m = (0..fs.len())
                .max_by(|&i, &j| fs[i].total_cmp(&fs[j]))
                .expect("grid is non-empty");
            let ok = [2.0, 4.0, 8.0].iter().any(|mult| {
                let eps = mult * delta;
                let inside = |k: usize| (xs[k] - xs[m]).abs() <= eps;
                let rising = (1..=m)
                    .filter(|&k| inside(k - 1))
                    .all(|k| fs[k] >= fs[k - 1]);
                let falling = (m + 1..fs.len())
                    .filter(|&k| inside(k))
                    .all(|k| fs[k] <= fs[k - 1]);
                let min_in = (0..fs.len())
                    .filter(|&k| inside(k))
                    .map(|k| fs[k])
                    .fold(f64::INFINITY, f64::min);
                let max_out = (0..fs.len())
                    .filter(|&k| !inside(k))
                    .map(|k| fs[k])
                    .fold(0.0, f64::max);
                rising && falling && min_in >= max_out && fs[m] > max_out
            });
            if ok {
                ModeCondition::LocalUnimodal
            } else {
                ModeCondition::NotApplicable
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn b1() -> BeliefDistribution {
        BeliefDistribution::discrete([
            (0.0, 0.30),
            (0.12, 0.10),
            (0.17, 0.15),
            (0.22, 0.10),
            (0.30, 0.35),
        ])
        .unwrap()
    }

    fn b2() -> BeliefDistribution {
        BeliefDistribution::discrete([(0.05, 0.35), (0.08, 0.20), (0.12, 0.20), (0.17, 0.25)])
            .unwrap()
    }

    fn fig1() -> BeliefDistribution {
        BeliefDistribution::beta(1.5, 4.0).unwrap()
    }

    #[test]
    fn payoffs() {
        let w = Scheme::window(0.02, 1.0).unwrap();
        assert_abs_diff_eq!(
            w.expected_payoff(&b1(), 0.30).unwrap(),
            0.35,
            epsilon = 1e-15
        );

        let q = Scheme::quadratic(1.0, 2.0).unwrap();
        let sym = BeliefDistribution::beta(2.0, 2.0).unwrap();
        assert_abs_diff_eq!(q.expected_payoff(&sym, 0.5).unwrap(), 1.95, epsilon = 1e-15);

        let a = Scheme::absolute(1.0, 2.0).unwrap();
        let atom = BeliefDistribution::discrete([(0.3, 1.0)]).unwrap();
        assert_eq!(a.expected_payoff(&atom, 0.3).unwrap(), 2.0);

        assert_eq!(
            Scheme::NoIncentive.expected_payoff(&atom, 0.3),
            Err(Error::NoBestResponse)
        );
        assert!(w.expected_payoff(&atom, 1.5).is_err());
    }

    #[test]
    fn window_reports_modal_atom_of_b1() {
        let sol = Scheme::window(0.02, 1.0)
            .unwrap()
            .optimal_report(&b1())
            .unwrap();
        assert_eq!(sol.report, 0.30);
        assert_eq!(sol.method, SolveMethod::GridSearch);
        assert_eq!(sol.reports.len(), 1);
        // Every report in [0.28, 0.32] covers the 0.30 atom and nothing else.
        assert_abs_diff_eq!(sol.reports[0].lo, 0.28, epsilon = 1e-7);
        assert_abs_diff_eq!(sol.reports[0].hi, 0.32, epsilon = 1e-7);
        assert_abs_diff_eq!(sol.payoff, 0.35, epsilon = 1e-12);
    }

    #[test]
    fn quadratic_reports_mean() {
        let sol = Scheme::quadratic(1.0, 2.0)
            .unwrap()
            .optimal_report(&fig1())
            .unwrap();
        assert_abs_diff_eq!(sol.report, 3.0 / 11.0, epsilon = 1e-15);
        assert_eq!(sol.method, SolveMethod::Analytic);
    }

    #[test]
    fn absolute_reports_median_interval() {
        let two = BeliefDistribution::discrete([(0.1, 0.5), (0.3, 0.5)]).unwrap();
        let s = Scheme::absolute(1.0, 2.0).unwrap();
        let sol = s.optimal_report(&two).unwrap();
        assert_eq!(sol.reports, vec![Interval::new(0.1, 0.3)]);
        for r in [0.1, 0.2, 0.3] {
            assert_abs_diff_eq!(
                s.expected_payoff(&two, r).unwrap(),
                sol.payoff,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn window_on_fig1_stays_within_mode_band() {
        let d = fig1();
        let sol = Scheme::window(0.02, 1.0)
            .unwrap()
            .optimal_report(&d)
            .unwrap();
        let m = 1.0 / 7.0;
        assert!(
            sol.report >= m - 0.02 && sol.report <= m + 0.02,
            "{}",
            sol.report
        );

        // Brute-force scan at 1e-5.
        let (brute, brute_val) = (0..=100_000)
            .map(|i| i as f64 * 1e-5)
            .map(|r| (r, d.window_mass(r, 0.02)))
            .fold(
                (0.0, f64::NEG_INFINITY),
                |acc, x| if x.1 > acc.1 { x } else { acc },
            );
        assert!(
            (brute - sol.report).abs() <= 1e-5,
            "{brute} vs {}",
            sol.report
        );
        assert!(sol.payoff >= brute_val - 1e-12);
    }

    #[test]
    fn no_incentive_has_no_best_response() {
        let err = Scheme::NoIncentive.optimal_report(&fig1()).unwrap_err();
        assert_eq!(err, Error::NoBestResponse);
        assert!(err.to_string().contains("uninterpretable"));
    }

    #[test]
    fn payoff_matches_solution_at_every_returned_report() {
        let w = Scheme::window(0.02, 3.0).unwrap();
        for d in [
            b1(),
            b2(),
            fig1(),
            BeliefDistribution::beta(1.0, 1.0).unwrap(),
        ] {
            let sol = w.optimal_report(&d).unwrap();
            for iv in &sol.reports {
                for r in [iv.lo, iv.midpoint(), iv.hi] {
                    assert_abs_diff_eq!(
                        w.expected_payoff(&d, r).unwrap(),
                        sol.payoff,
                        epsilon = 1e-9
                    );
                }
            }
        }
    }

    #[test]
    fn flat_density_yields_plateau() {
        let u = BeliefDistribution::beta(1.0, 1.0).unwrap();
        let sol = Scheme::window(0.02, 1.0)
            .unwrap()
            .optimal_report(&u)
            .unwrap();
        assert_eq!(sol.reports.len(), 1);
        assert_abs_diff_eq!(sol.reports[0].lo, 0.02, epsilon = 1e-6);
        assert_abs_diff_eq!(sol.reports[0].hi, 0.98, epsilon = 1e-6);
    }

    #[test]
    fn gap_below_two_deltas_lets_window_cover_two_atoms() {
        // b²'s 0.05 and 0.08 atoms are 0.03 apart: reporting 0.065 wins both.
        let sol = Scheme::window(0.02, 1.0)
            .unwrap()
            .optimal_report(&b2())
            .unwrap();
        assert_abs_diff_eq!(sol.payoff, 0.55, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.reports[0].lo, 0.06, epsilon = 1e-7);
        assert_abs_diff_eq!(sol.reports[0].hi, 0.07, epsilon = 1e-7);
        assert_ne!(sol.report, b2().mode().unwrap());
    }

    #[test]
    fn mode_conditions() {
        assert_eq!(
            mode_report_condition(&b1(), 0.02),
            ModeCondition::DiscreteSeparated
        );
        assert_eq!(
            mode_report_condition(&fig1(), 0.02),
            ModeCondition::GlobalUnimodal
        );
        assert_eq!(
            mode_report_condition(&b1(), 0.06),
            ModeCondition::NotApplicable
        );
        assert_eq!(
            mode_report_condition(&b2(), 0.02),
            ModeCondition::NotApplicable
        );
        let decreasing = BeliefDistribution::beta(1.0, 3.0).unwrap();
        assert_eq!(
            mode_report_condition(&decreasing, 0.02),
            ModeCondition::LocalUnimodal
        );
        let flat = BeliefDistribution::beta(1.0, 1.0).unwrap();
        assert_eq!(
            mode_report_condition(&flat, 0.02),
            ModeCondition::NotApplicable
        );
        let u_shape = BeliefDistribution::beta(0.5, 0.5).unwrap();
        assert_eq!(
            mode_report_condition(&u_shape, 0.02),
            ModeCondition::NotApplicable
        );
    }

    #[test]
    fn scheme_validation() {
        assert!(Scheme::window(0.5, 1.0).is_err());
        assert!(Scheme::window(-0.1, 1.0).is_err());
        assert!(Scheme::window(0.02, 0.0).is_err());
        assert!(Scheme::quadratic(2.0, 1.0).is_err());
        assert!(Scheme::absolute(0.0, 1.0).is_err());
        assert!(Scheme::window(0.0, 1.0).is_ok());
    }

    #[test]
    fn scheme_json() {
        let w: Scheme =
            serde_json::from_str(r#"{"scheme":"window","delta":0.02,"bonus":1.0}"#).unwrap();
        assert_eq!(
            w,
            Scheme::Window {
                delta: 0.02,
                bonus: 1.0
            }
        );
        let q: Scheme = serde_json::from_str(r#"{"scheme":"quadratic","A":1,"B":2}"#).unwrap();
        assert_eq!(q, Scheme::Quadratic { a: 1.0, b: 2.0 });
        let n: Scheme = serde_json::from_str(r#"{"scheme":"no_incentive"}"#).unwrap();
        assert_eq!(n, Scheme::NoIncentive);
        assert!(serde_json::from_str::<Scheme>(r#"{"scheme":"absolute","a":3,"b":2}"#).is_err());
        let back: Scheme = serde_json::from_str(&serde_json::to_string(&w).unwrap()).unwrap();
        assert_eq!(back, w);
    }
}
