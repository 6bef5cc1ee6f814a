//! Discrete probability laws on the extended nonnegative integers.
//!
//! Four representations cover everything the operators and certificates
//! need: explicit finite pmfs (with an optional atom at infinity, for
//! empirical laws of censored counts), Poisson, Poisson mixtures (the image
//! of Poisson laws under the star operator), and shifted binomial mixtures
//! (the explicit lower-bounding activation law of the d-ary certificate).

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::rng::{CounterRng, PoissonSampler};
use crate::{FrogError, Result};

/// Weight tolerance for mixture validation.
pub const WEIGHT_TOLERANCE: f64 = 1e-12;

/// An observation from a law on the extended nonnegative integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Count {
    Finite(u64),
    Infinite,
}

impl Count {
    pub fn finite(self) -> Option<u64> {
        match self {
            Count::Finite(k) => Some(k),
            Count::Infinite => None,
        }
    }
}

/// One Poisson mixture component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonComponent {
    pub weight: f64,
    pub rate: f64,
}

/// One shifted binomial mixture component: `shift + Bin(trials, success)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftedBinomialComponent {
    pub weight: f64,
    pub shift: u64,
    pub trials: u64,
    pub success: f64,
}

/// A probability law on `{0, 1, 2, …} ∪ {∞}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DiscreteDist {
    FinitePmf {
        values: Vec<u64>,
        probabilities: Vec<f64>,
        #[serde(default, skip_serializing_if = "is_zero")]
        infinity_mass: f64,
    },
    Poisson {
        rate: f64,
    },
    PoissonMixture {
        components: Vec<PoissonComponent>,
    },
    ShiftedBinomialMixture {
        components: Vec<ShiftedBinomialComponent>,
    },
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

impl DiscreteDist {
    /// Finite pmf over distinct nonnegative integers plus an optional atom
    /// at infinity. Values need not be sorted on input.
    pub fn finite_pmf(
        mut values: Vec<u64>,
        mut probabilities: Vec<f64>,
        infinity_mass: f64,
    ) -> Result<Self> {
        if values.len() != probabilities.len() {
            return Err(FrogError::argument(
                "values and probabilities must have equal length".to_string(),
            ));
        }
        if !(0.0..=1.0).contains(&infinity_mass) {
            return Err(FrogError::argument(format!(
                "infinity mass {infinity_mass} outside [0, 1]"
            )));
        }
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by_key(|&i| values[i]);
        values = order.iter().map(|&i| values[i]).collect();
        probabilities = order.iter().map(|&i| probabilities[i]).collect();
        if values.windows(2).any(|w| w[0] == w[1]) {
            return Err(FrogError::argument(
                "finite pmf values must be distinct".to_string(),
            ));
        }
        if probabilities.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(FrogError::argument(
                "probabilities must lie in [0, 1]".to_string(),
            ));
        }
        let total: f64 = probabilities.iter().sum::<f64>() + infinity_mass;
        if (total - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(FrogError::argument(format!(
                "pmf mass sums to {total}, not 1"
            )));
        }
        Ok(DiscreteDist::FinitePmf {
            values,
            probabilities,
            infinity_mass,
        })
    }

    /// Empirical law of a sample of counts.
    pub fn from_counts(counts: &[Count]) -> Result<Self> {
        if counts.is_empty() {
            return Err(FrogError::argument("empty sample".to_string()));
        }
        let n = counts.len() as f64;
        let mut finite: std::collections::BTreeMap<u64, u64> = std::collections::BTreeMap::new();
        let mut infinite = 0u64;
        for &c in counts {
            match c {
                Count::Finite(k) => *finite.entry(k).or_insert(0) += 1,
                Count::Infinite => infinite += 1,
            }
        }
        let values: Vec<u64> = finite.keys().copied().collect();
        let probabilities: Vec<f64> = finite.values().map(|&c| c as f64 / n).collect();
        DiscreteDist::finite_pmf(values, probabilities, infinite as f64 / n)
    }

    pub fn poisson(rate: f64) -> Result<Self> {
        check_rate(rate)?;
        Ok(DiscreteDist::Poisson { rate })
    }

    pub fn poisson_mixture(components: Vec<PoissonComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(FrogError::argument("empty mixture".to_string()));
        }
        for c in &components {
            check_rate(c.rate)?;
            check_weight(c.weight)?;
        }
        check_total_weight(components.iter().map(|c| c.weight))?;
        Ok(DiscreteDist::PoissonMixture { components })
    }

    pub fn shifted_binomial_mixture(components: Vec<ShiftedBinomialComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(FrogError::argument("empty mixture".to_string()));
        }
        for c in &components {
            check_weight(c.weight)?;
            if !(0.0..=1.0).contains(&c.success) {
                return Err(FrogError::argument(format!(
                    "success probability {} outside [0, 1]",
                    c.success
                )));
            }
        }
        check_total_weight(components.iter().map(|c| c.weight))?;
        Ok(DiscreteDist::ShiftedBinomialMixture { components })
    }

    /// Probability of the finite value `k`.
    pub fn pmf(&self, k: u64) -> f64 {
        match self {
            DiscreteDist::FinitePmf {
                values,
                probabilities,
                ..
            } => match values.binary_search(&k) {
                Ok(i) => probabilities[i],
                Err(_) => 0.0,
            },
            DiscreteDist::Poisson { rate } => poisson_pmf(*rate, k),
            DiscreteDist::PoissonMixture { components } => components
                .iter()
                .map(|c| c.weight * poisson_pmf(c.rate, k))
                .sum(),
            DiscreteDist::ShiftedBinomialMixture { components } => components
                .iter()
                .map(|c| {
                    if k < c.shift {
                        0.0
                    } else {
                        c.weight * binomial_pmf(c.trials, c.success, k - c.shift)
                    }
                })
                .sum(),
        }
    }

    /// `P[X <= k]` (finite part; the atom at infinity never enters a cdf).
    pub fn cdf(&self, k: u64) -> f64 {
        match self {
            DiscreteDist::FinitePmf {
                values,
                probabilities,
                ..
            } => {
                let end = values.partition_point(|&v| v <= k);
                probabilities[..end].iter().sum()
            }
            _ => (0..=k).map(|j| self.pmf(j)).sum(),
        }
    }

    /// Mass at infinity.
    pub fn infinity_mass(&self) -> f64 {
        match self {
            DiscreteDist::FinitePmf { infinity_mass, .. } => *infinity_mass,
            _ => 0.0,
        }
    }

    /// Mean (infinite when there is mass at infinity).
    pub fn mean(&self) -> f64 {
        match self {
            DiscreteDist::FinitePmf {
                values,
                probabilities,
                infinity_mass,
            } => {
                if *infinity_mass > 0.0 {
                    f64::INFINITY
                } else {
                    values
                        .iter()
                        .zip(probabilities)
                        .map(|(&v, &p)| v as f64 * p)
                        .sum()
                }
            }
            DiscreteDist::Poisson { rate } => *rate,
            DiscreteDist::PoissonMixture { components } => {
                components.iter().map(|c| c.weight * c.rate).sum()
            }
            DiscreteDist::ShiftedBinomialMixture { components } => components
                .iter()
                .map(|c| c.weight * (c.shift as f64 + c.trials as f64 * c.success))
                .sum(),
        }
    }

    /// Rigorous upper bound on the survival `P[X > k]`, including any atom
    /// at infinity. Used to close stochastic-dominance comparisons beyond a
    /// finite scan horizon.
    pub fn survival_upper_bound(&self, k: u64) -> f64 {
        match self {
            DiscreteDist::FinitePmf {
                values,
                probabilities,
                infinity_mass,
            } => {
                let start = values.partition_point(|&v| v <= k);
                probabilities[start..].iter().sum::<f64>() + infinity_mass
            }
            DiscreteDist::Poisson { rate } => poisson_survival_upper(*rate, k),
            DiscreteDist::PoissonMixture { components } => components
                .iter()
                .map(|c| c.weight * poisson_survival_upper(c.rate, k))
                .sum(),
            DiscreteDist::ShiftedBinomialMixture { components } => components
                .iter()
                .map(|c| {
                    let bound = if k < c.shift {
                        1.0
                    } else {
                        binomial_survival_upper(c.trials, c.success, k - c.shift)
                    };
                    c.weight * bound
                })
                .sum(),
        }
    }

    /// Truncation horizon beyond which the remaining finite mass is tiny;
    /// each Poisson-type component contributes `rate + 40·sqrt(rate) + 40`.
    pub fn truncation_horizon(&self) -> u64 {
        fn horizon(rate: f64) -> u64 {
            (rate + 40.0 * rate.sqrt() + 40.0).ceil() as u64
        }
        match self {
            DiscreteDist::FinitePmf { values, .. } => values.last().copied().unwrap_or(0),
            DiscreteDist::Poisson { rate } => horizon(*rate),
            DiscreteDist::PoissonMixture { components } => components
                .iter()
                .map(|c| horizon(c.rate))
                .max()
                .unwrap_or(0),
            DiscreteDist::ShiftedBinomialMixture { components } => components
                .iter()
                .map(|c| c.shift + c.trials)
                .max()
                .unwrap_or(0),
        }
    }

    /// Draws one observation. Pure function of the stream state.
    pub fn sample(&self, rng: &mut CounterRng) -> Count {
        match self {
            DiscreteDist::FinitePmf {
                values,
                probabilities,
                infinity_mass,
            } => {
                let u = rng.unit_f64();
                let mut acc = 0.0;
                for (&v, &p) in values.iter().zip(probabilities) {
                    acc += p;
                    if u < acc {
                        return Count::Finite(v);
                    }
                }
                if *infinity_mass > 0.0 && u < acc + infinity_mass {
                    return Count::Infinite;
                }
                // u landed in the rounding slack at the top; return the max.
                values
                    .last()
                    .map(|&v| Count::Finite(v))
                    .unwrap_or(Count::Infinite)
            }
            DiscreteDist::Poisson { rate } => {
                let sampler = PoissonSampler::new(*rate).expect("validated rate");
                Count::Finite(sampler.sample(rng))
            }
            DiscreteDist::PoissonMixture { components } => {
                let c = &components[pick_component(rng, components.iter().map(|c| c.weight))];
                let sampler = PoissonSampler::new(c.rate).expect("validated rate");
                Count::Finite(sampler.sample(rng))
            }
            DiscreteDist::ShiftedBinomialMixture { components } => {
                let c = &components[pick_component(rng, components.iter().map(|c| c.weight))];
                let b = if c.trials == 0 || c.success == 0.0 {
                    0
                } else {
                    use rand_distr::Distribution;
                    rand_distr::Binomial::new(c.trials, c.success)
                        .expect("validated success probability")
                        .sample(rng)
                };
                Count::Finite(c.shift + b)
            }
        }
    }
}

fn check_rate(rate: f64) -> Result<()> {
    if !rate.is_finite() || rate < 0.0 {
        return Err(FrogError::argument(format!(
            "rate must be finite and nonnegative, got {rate}"
        )));
    }
    Ok(())
}

fn check_weight(w: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&w) {
        return Err(FrogError::argument(format!("weight {w} outside [0, 1]")));
    }
    Ok(())
}

fn check_total_weight(weights: impl Iterator<Item = f64>) -> Result<()> {
    let total: f64 = weights.sum();
    if (total - 1.0).abs() > WEIGHT_TOLERANCE {
        return Err(FrogError::argument(format!(
            "mixture weights sum to {total}, not 1"
        )));
    }
    Ok(())
}

fn pick_component(rng: &mut CounterRng, weights: impl Iterator<Item = f64> + Clone) -> usize {
    let u = rng.unit_f64();
    let mut acc = 0.0;
    let n = weights.clone().count();
    for (i, w) in weights.enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    n - 1
}

/// Poisson pmf evaluated in log space.
pub fn poisson_pmf(rate: f64, k: u64) -> f64 {
    if rate == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let kf = k as f64;
    (kf * rate.ln() - rate - ln_gamma(kf + 1.0)).exp()
}

/// Binomial pmf evaluated in log space.
pub fn binomial_pmf(n: u64, p: f64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    if p == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if p == 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    let (nf, kf) = (n as f64, k as f64);
    let ln_choose = ln_gamma(nf + 1.0) - ln_gamma(kf + 1.0) - ln_gamma(nf - kf + 1.0);
    (ln_choose + kf * p.ln() + (nf - kf) * (1.0 - p).ln()).exp()
}

/// Upper bound on `P[Poi(rate) > k]` via the geometric-ratio tail bound:
/// successive pmf terms beyond `k+1` shrink by at least `rate/(k+2)`.
fn poisson_survival_upper(rate: f64, k: u64) -> f64 {
    let next = (k + 2) as f64;
    if rate >= next {
        return 1.0;
    }
    let head = poisson_pmf(rate, k + 1);
    (head / (1.0 - rate / next)).min(1.0)
}

/// Same ratio argument for the binomial: beyond `k+1` successive terms
/// shrink by at least `(n-k-1)p / ((k+2)(1-p))`.
fn binomial_survival_upper(n: u64, p: f64, k: u64) -> f64 {
    if k >= n {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    let ratio = (n - k - 1) as f64 * p / ((k + 2) as f64 * (1.0 - p));
    if ratio >= 1.0 {
        return 1.0;
    }
    (binomial_pmf(n, p, k + 1) / (1.0 - ratio)).min(1.0)
}

/// Numerically stable `ln Σ exp(x_i)`.
pub fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    m + terms.iter().map(|&x| (x - m).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Key128;
    use approx::assert_abs_diff_eq;
    use statrs::distribution::{Discrete, DiscreteCDF};

    #[test]
    fn poisson_pmf_matches_statrs() {
        for &rate in &[0.3, 1.0, 4.5, 25.0, 300.0] {
            let reference = statrs::distribution::Poisson::new(rate).unwrap();
            for k in 0..((rate as u64 + 5 * (rate.sqrt() as u64)).max(20)) {
                assert_abs_diff_eq!(poisson_pmf(rate, k), reference.pmf(k), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn binomial_pmf_matches_statrs() {
        for &(n, p) in &[(5u64, 0.3), (40, 0.77), (1000, 0.01)] {
            let reference = statrs::distribution::Binomial::new(p, n).unwrap();
            for k in 0..=n.min(60) {
                assert_abs_diff_eq!(binomial_pmf(n, p, k), reference.pmf(k), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn survival_bound_is_a_bound() {
        for &rate in &[0.5, 2.0, 7.0] {
            let reference = statrs::distribution::Poisson::new(rate).unwrap();
            for k in (rate as u64)..(rate as u64 + 30) {
                let exact = 1.0 - reference.cdf(k);
                let bound = poisson_survival_upper(rate, k);
                assert!(bound + 1e-15 >= exact, "rate {rate} k {k}");
            }
        }
    }

    #[test]
    fn finite_pmf_validation() {
        assert!(DiscreteDist::finite_pmf(vec![0, 0], vec![0.5, 0.5], 0.0).is_err());
        assert!(DiscreteDist::finite_pmf(vec![0, 1], vec![0.5, 0.4], 0.0).is_err());
        assert!(DiscreteDist::finite_pmf(vec![0, 1], vec![0.5, 0.4], 0.1).is_ok());
        // unsorted input is accepted and normalized
        let d = DiscreteDist::finite_pmf(vec![3, 1], vec![0.25, 0.75], 0.0).unwrap();
        assert_eq!(d.cdf(1), 0.75);
    }

    #[test]
    fn mixture_weight_validation() {
        let bad = DiscreteDist::poisson_mixture(vec![
            PoissonComponent {
                weight: 0.6,
                rate: 1.0,
            },
            PoissonComponent {
                weight: 0.6,
                rate: 2.0,
            },
        ]);
        assert!(bad.is_err());
    }

    #[test]
    fn empirical_law_from_counts() {
        let sample = [
            Count::Finite(0),
            Count::Finite(2),
            Count::Finite(2),
            Count::Infinite,
        ];
        let d = DiscreteDist::from_counts(&sample).unwrap();
        assert_abs_diff_eq!(d.pmf(2), 0.5);
        assert_abs_diff_eq!(d.infinity_mass(), 0.25);
    }

    #[test]
    fn mixture_sampling_matches_mean() {
        let d = DiscreteDist::poisson_mixture(vec![
            PoissonComponent {
                weight: 0.3,
                rate: 1.0,
            },
            PoissonComponent {
                weight: 0.7,
                rate: 4.0,
            },
        ])
        .unwrap();
        let mut rng = Key128::from_seed(17).stream();
        let n = 100_000;
        let total: u64 = (0..n)
            .map(|_| d.sample(&mut rng).finite().unwrap())
            .sum();
        let mean = total as f64 / n as f64;
        // variance of the mixture is about 5.99, sigma of mean ~ 0.0077
        assert!((mean - d.mean()).abs() < 4.0 * 0.008, "mean {mean}");
    }

    #[test]
    fn serde_kind_discriminator() {
        let d = DiscreteDist::poisson(2.0).unwrap();
        let json = serde_json::to_string(&d).unwrap();
        assert!(json.contains("\"kind\":\"poisson\""), "{json}");
        let back: DiscreteDist = serde_json::from_str(&json).unwrap();
        assert_eq!(back, d);
    }
}
