//! Stochastic dominance of Poisson mixtures over Poisson laws.
//!
//! The workhorse is the equivalence: for Y ~ Poi(U) with a random rate U,
//! Poi(λ) is stochastically below Y exactly when λ ≤ −log E e^{−U}, which
//! in turn is just a comparison of the two zero probabilities. The h_n
//! family (partial exponential series) carries the concavity argument that
//! makes the zero-probability check sufficient.
//!
//! [`brute_force_dominates`] is the independent oracle: it compares cdfs
//! pointwise up to a horizon and closes the tail with certified bounds,
//! reporting `Unknown` rather than guessing when the tail cannot be closed.

use serde::{Deserialize, Serialize};

use crate::operators::dist::{log_sum_exp, DiscreteDist};
use crate::{FrogError, Result};

/// Partial exponential series `h_n(x) = x Σ_{k=0}^n (−log x)^k / k!` on
/// (0, 1]. Equals P[Poi(−log x) ≤ n]; increasing and concave in x.
pub fn h_n(n: u32, x: f64) -> Result<f64> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(FrogError::argument(format!(
            "h_n requires x in (0, 1], got {x}"
        )));
    }
    let lambda = -x.ln();
    // ln of term k is ln x + k ln λ − ln k!; sum in log space for stability.
    if lambda == 0.0 {
        return Ok(1.0);
    }
    let ln_x = x.ln();
    let ln_lambda = lambda.ln();
    let mut ln_terms = Vec::with_capacity(n as usize + 1);
    let mut ln_fact = 0.0;
    for k in 0..=n {
        if k > 0 {
            ln_fact += (k as f64).ln();
        }
        ln_terms.push(ln_x + k as f64 * ln_lambda - ln_fact);
    }
    Ok(log_sum_exp(&ln_terms).exp().min(1.0))
}

/// The largest λ with Poi(λ) stochastically below the target, which must be
/// Poisson or a Poisson mixture: `−log E e^{−U}` over the random rate U.
///
/// Computed entirely in log space so rates up to 10³ stay stable.
pub fn critical_rate(target: &DiscreteDist) -> Result<f64> {
    match target {
        DiscreteDist::Poisson { rate } => Ok(*rate),
        DiscreteDist::PoissonMixture { components } => {
            let ln_terms: Vec<f64> = components
                .iter()
                .filter(|c| c.weight > 0.0)
                .map(|c| c.weight.ln() - c.rate)
                .collect();
            Ok(-log_sum_exp(&ln_terms))
        }
        other => Err(FrogError::argument(format!(
            "critical rate is defined for Poisson mixtures only, got {}",
            kind_name(other)
        ))),
    }
}

fn kind_name(d: &DiscreteDist) -> &'static str {
    match d {
        DiscreteDist::FinitePmf { .. } => "finite pmf",
        DiscreteDist::Poisson { .. } => "poisson",
        DiscreteDist::PoissonMixture { .. } => "poisson mixture",
        DiscreteDist::ShiftedBinomialMixture { .. } => "shifted binomial mixture",
    }
}

/// Verdict of a dominance query `a ⪯ b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DominanceOutcome {
    /// cdf comparison holds on the scan range and the tail is closed.
    Dominates,
    /// An explicit witness level where the cdf comparison fails.
    DoesNotDominate { witness: u64 },
    /// The scan was clean but no tail bound closed the comparison.
    Unknown,
}

impl DominanceOutcome {
    pub fn is_definite(&self) -> bool {
        !matches!(self, DominanceOutcome::Unknown)
    }
}

/// Brute-force check that `a ⪯ b` (b stochastically dominates a): verifies
/// `CDF_b(k) ≤ CDF_a(k)` for all k ≤ `n_max` exactly, then closes the tail
/// `k > n_max` with rigorous bounds or reports [`DominanceOutcome::Unknown`].
pub fn brute_force_dominates(a: &DiscreteDist, b: &DiscreteDist, n_max: u64) -> DominanceOutcome {
    let mut cdf_a = 0.0;
    let mut cdf_b = 0.0;
    for k in 0..=n_max {
        cdf_a += a.pmf(k);
        cdf_b += b.pmf(k);
        if cdf_b > cdf_a + 1e-15 {
            return DominanceOutcome::DoesNotDominate { witness: k };
        }
    }
    if tail_closes(a, b, n_max) {
        DominanceOutcome::Dominates
    } else {
        DominanceOutcome::Unknown
    }
}

/// Sufficient conditions for `P[a > k] ≤ P[b > k]` for every k > n_max.
fn tail_closes(a: &DiscreteDist, b: &DiscreteDist, n_max: u64) -> bool {
    // The whole remaining upper mass of `a` fits under b's floor.
    let a_tail = a.survival_upper_bound(n_max);
    if a_tail <= b.infinity_mass() {
        return true;
    }
    // Poisson-ratio closure: if b has a mixture component (w, r) with r
    // strictly above every rate of a, then for j > k ≥ n_max,
    //   P[Poi(λ) > k] ≤ e^{r−λ} (λ/r)^{k+1} P[Poi(r) > k],
    // so the comparison closes once the weighted ratio factors fit under w.
    let a_rates: Option<Vec<(f64, f64)>> = match a {
        DiscreteDist::Poisson { rate } => Some(vec![(1.0, *rate)]),
        DiscreteDist::PoissonMixture { components } => {
            Some(components.iter().map(|c| (c.weight, c.rate)).collect())
        }
        _ => None,
    };
    let b_top: Option<(f64, f64)> = match b {
        DiscreteDist::Poisson { rate } => Some((1.0, *rate)),
        DiscreteDist::PoissonMixture { components } => components
            .iter()
            .filter(|c| c.weight > 0.0)
            .map(|c| (c.weight, c.rate))
            .max_by(|x, y| x.1.total_cmp(&y.1)),
        _ => None,
    };
    if let (Some(rates), Some((w_top, r_top))) = (a_rates, b_top) {
        if r_top > 0.0 && rates.iter().all(|&(_, l)| l < r_top) {
            let k1 = (n_max + 1) as f64;
            let ln_factor_sum = log_sum_exp(
                &rates
                    .iter()
                    .filter(|&&(w, _)| w > 0.0)
                    .map(|&(w, l)| {
                        let ln_ratio = if l == 0.0 {
                            f64::NEG_INFINITY
                        } else {
                            k1 * (l.ln() - r_top.ln())
                        };
                        w.ln() + (r_top - l) + ln_ratio
                    })
                    .collect::<Vec<_>>(),
            );
            if ln_factor_sum <= w_top.ln() {
                return true;
            }
        }
    }
    false
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DominanceVerdict {
    pub dominated: bool,
    /// Largest λ with Poi(λ) below the target.
    pub critical_rate: f64,
    /// critical_rate − queried λ; dominated exactly when nonnegative.
    pub margin: f64,
}

/// Criterion verdict for `Poi(lambda) ⪯ target`.
pub fn poisson_dominated_by(lambda: f64, target: &DiscreteDist) -> Result<DominanceVerdict> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(FrogError::argument(format!(
            "lambda must be finite and nonnegative, got {lambda}"
        )));
    }
    let critical = critical_rate(target)?;
    Ok(DominanceVerdict {
        dominated: lambda <= critical,
        critical_rate: critical,
        margin: critical - lambda,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::dist::PoissonComponent;
    use approx::assert_abs_diff_eq;

    fn poi(rate: f64) -> DiscreteDist {
        DiscreteDist::poisson(rate).unwrap()
    }

    fn mixture(parts: &[(f64, f64)]) -> DiscreteDist {
        DiscreteDist::poisson_mixture(
            parts
                .iter()
                .map(|&(weight, rate)| PoissonComponent { weight, rate })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn h_0_is_identity() {
        for &x in &[1e-6, 0.3, 0.99, 1.0] {
            assert_abs_diff_eq!(h_n(0, x).unwrap(), x, epsilon = 1e-15);
        }
    }

    #[test]
    fn h_n_at_one_is_one() {
        for n in 0..10 {
            assert_abs_diff_eq!(h_n(n, 1.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn h_1_at_inverse_e() {
        let x = (-1.0f64).exp();
        assert_abs_diff_eq!(h_n(1, x).unwrap(), 2.0 * x, epsilon = 1e-14);
    }

    #[test]
    fn h_n_is_poisson_cdf() {
        use statrs::distribution::DiscreteCDF;
        for &lambda in &[0.2, 1.0, 3.7] {
            let reference = statrs::distribution::Poisson::new(lambda).unwrap();
            for n in 0..8 {
                assert_abs_diff_eq!(
                    h_n(n, (-lambda).exp()).unwrap(),
                    reference.cdf(n as u64),
                    epsilon = 1e-10
                );
            }
        }
    }

    #[test]
    fn h_n_rejects_out_of_range() {
        assert!(h_n(2, 0.0).is_err());
        assert!(h_n(2, 1.5).is_err());
        assert!(h_n(2, -0.1).is_err());
    }

    #[test]
    fn critical_rate_of_pure_poisson() {
        assert_abs_diff_eq!(critical_rate(&poi(1.75)).unwrap(), 1.75);
    }

    #[test]
    fn critical_rate_two_point_example() {
        // rate 0 or 2, equally likely
        let target = mixture(&[(0.5, 0.0), (0.5, 2.0)]);
        let expect = -((0.5f64 * (1.0 + (-2.0f64).exp())).ln());
        let got = critical_rate(&target).unwrap();
        assert_abs_diff_eq!(got, expect, epsilon = 1e-14);
        assert_abs_diff_eq!(got, 0.566219, epsilon = 1e-6);
    }

    #[test]
    fn critical_rate_rejects_other_shapes() {
        let finite = DiscreteDist::finite_pmf(vec![1], vec![1.0], 0.0).unwrap();
        assert!(critical_rate(&finite).is_err());
    }

    #[test]
    fn zero_probability_identity() {
        let target = mixture(&[(0.3, 0.7), (0.45, 2.2), (0.25, 5.0)]);
        let critical = critical_rate(&target).unwrap();
        assert_abs_diff_eq!(target.pmf(0), (-critical).exp(), epsilon = 1e-12);
    }

    #[test]
    fn poisson_family_is_ordered() {
        assert_eq!(
            brute_force_dominates(&poi(1.0), &poi(2.0), 60),
            DominanceOutcome::Dominates
        );
        assert_eq!(
            brute_force_dominates(&poi(1.0), &poi(1.0), 60),
            DominanceOutcome::Dominates
        );
        assert!(matches!(
            brute_force_dominates(&poi(2.0), &poi(1.0), 60),
            DominanceOutcome::DoesNotDominate { .. }
        ));
    }

    #[test]
    fn straddles_critical_rate_of_two_point_mixture() {
        let target = mixture(&[(0.5, 0.0), (0.5, 2.0)]);
        assert_eq!(
            brute_force_dominates(&poi(0.56), &target, 120),
            DominanceOutcome::Dominates
        );
        assert!(matches!(
            brute_force_dominates(&poi(0.57), &target, 120),
            DominanceOutcome::DoesNotDominate { witness: 0 }
        ));
    }

    #[test]
    fn equality_boundary_dominates() {
        let target = mixture(&[(0.4, 1.0), (0.6, 3.0)]);
        let critical = critical_rate(&target).unwrap();
        assert_eq!(
            brute_force_dominates(&poi(critical), &target, 200),
            DominanceOutcome::Dominates
        );
    }

    #[test]
    fn unknown_when_tail_cannot_close() {
        // Horizon far too small to separate these: scan is clean but no
        // closure applies because a's top rate equals b's top rate.
        let a = mixture(&[(0.5, 1.0), (0.5, 4.0)]);
        let b = mixture(&[(0.2, 1.0), (0.8, 4.0)]);
        let out = brute_force_dominates(&a, &b, 2);
        assert_eq!(out, DominanceOutcome::Unknown);
    }

    #[test]
    fn verdict_margin_sign() {
        let target = mixture(&[(0.5, 0.5), (0.5, 2.0)]);
        let v = poisson_dominated_by(0.3, &target).unwrap();
        assert!(v.dominated && v.margin >= 0.0);
        let v = poisson_dominated_by(3.0, &target).unwrap();
        assert!(!v.dominated && v.margin < 0.0);
    }
}
