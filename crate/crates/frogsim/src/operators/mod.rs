//! The star-graph frog model and its induced operators on leaf laws.
//!
//! A star with center ρ′ and leaves ρ, u_1, …, u_d carries Poi(μ) sleeping
//! frogs at the center and i.i.d. π-many sleepers at each u_i. The initial
//! frog walks ρ → ρ′ → u_1 and stays; every woken frog takes a
//! non-backtracking walk stopped on arrival at a leaf. Pushing a leaf law π
//! through this system yields two laws: the number of frogs that terminate
//! at ρ, and the number of leaves u_i ever visited. On the binary tree both
//! have closed forms; elsewhere they are sampled.
//!
//! All randomness is keyed by frog identity, so runs with pathwise-coupled
//! leaf laws share every other coin flip — stochastic-dominance couplings
//! hold realization by realization, not just in law.

pub mod dist;

pub use dist::{Count, DiscreteDist, PoissonComponent, ShiftedBinomialComponent};

use serde::{Deserialize, Serialize};

use crate::rng::{CounterRng, Key128, PoissonSampler};
use crate::{FrogError, Result};

const TAG_CENTER_COUNT: u64 = 0x5354_4152_0001;
const TAG_CENTER_STEP: u64 = 0x5354_4152_0002;
const TAG_LEAF_COUNT: u64 = 0x5354_4152_0003;
const TAG_LEAF_STEP: u64 = 0x5354_4152_0004;

/// Parameters of one star-model experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StarModelParams {
    pub d: u32,
    pub mu: f64,
    /// Law of the sleeping-frog count at each leaf u_i.
    pub leaf_law: DiscreteDist,
}

impl StarModelParams {
    pub fn new(d: u32, mu: f64, leaf_law: DiscreteDist) -> Result<Self> {
        if d < 2 {
            return Err(FrogError::argument(format!("d must be at least 2, got {d}")));
        }
        if !mu.is_finite() || mu < 0.0 {
            return Err(FrogError::argument(format!(
                "mu must be finite and nonnegative, got {mu}"
            )));
        }
        Ok(StarModelParams { d, mu, leaf_law })
    }
}

/// Result of one star-model realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StarOutcome {
    /// Number of frogs that terminate at ρ; its law is the image of the
    /// leaf law under the root-visit operator.
    pub returns_to_rho: Count,
    /// Number of leaves u_1..u_d visited; its law is the image under the
    /// activation operator. Always at least 1 (the initial frog).
    pub activated_leaves: u32,
}

/// Per-stage counts recorded while running the star model, used by the
/// thinning and coupling validations.
#[derive(Debug, Clone, Default)]
pub struct StarTrace {
    /// Center frogs that stepped to ρ.
    pub center_to_rho: u64,
    /// Center frogs that stepped to each leaf u_i.
    pub center_leaf_arrivals: Vec<u64>,
    /// Sleeper count released at each leaf (None when never activated).
    pub leaf_releases: Vec<Option<u64>>,
}

/// Samples one star realization from an identity key.
///
/// Every count and step is keyed by the entity it belongs to, so two runs
/// with the same key but stochastically ordered leaf laws are coupled
/// through shared uniforms (leaf counts are drawn by inverse cdf).
pub fn sample_star_with_key(params: &StarModelParams, key: Key128) -> Result<StarOutcome> {
    run_star(params, key, None)
}

/// As [`sample_star_with_key`], keeping per-stage counts.
pub fn sample_star_traced(
    params: &StarModelParams,
    key: Key128,
) -> Result<(StarOutcome, StarTrace)> {
    let mut trace = StarTrace {
        center_to_rho: 0,
        center_leaf_arrivals: vec![0; params.d as usize],
        leaf_releases: vec![None; params.d as usize],
    };
    let outcome = run_star(params, key, Some(&mut trace))?;
    Ok((outcome, trace))
}

/// Samples one star realization, deriving the identity key from the stream.
pub fn sample_star(params: &StarModelParams, rng: &mut CounterRng) -> Result<StarOutcome> {
    let key = Key128 {
        hi: rng.next(),
        lo: rng.next(),
    };
    sample_star_with_key(params, key)
}

fn run_star(
    params: &StarModelParams,
    key: Key128,
    mut trace: Option<&mut StarTrace>,
) -> Result<StarOutcome> {
    let d = params.d as usize;
    let mut activated = vec![false; d];
    let mut queue: Vec<usize> = Vec::with_capacity(d);
    let mut returns: u64 = 0;

    // Initial frog: ρ → ρ′ → u_1, stays there.
    activated[0] = true;
    queue.push(0);

    // Center frogs each take one uniform step to one of the d+1 leaves.
    let center_sampler = PoissonSampler::new(params.mu)?;
    let center_count = {
        let mut s = key.absorb(TAG_CENTER_COUNT).stream();
        center_sampler.sample(&mut s)
    };
    for j in 0..center_count {
        let mut s = key.absorb(TAG_CENTER_STEP).absorb(j).stream();
        let t = s.below(params.d + 1);
        if t == 0 {
            returns += 1;
            if let Some(tr) = trace.as_deref_mut() {
                tr.center_to_rho += 1;
            }
        } else {
            let leaf = (t - 1) as usize;
            if let Some(tr) = trace.as_deref_mut() {
                tr.center_leaf_arrivals[leaf] += 1;
            }
            if !activated[leaf] {
                activated[leaf] = true;
                queue.push(leaf);
            }
        }
    }

    // Cascade: each newly activated leaf releases π-many frogs; each walks
    // u_i → ρ′ → (uniform leaf ≠ u_i) and stops.
    let mut cursor = 0;
    while cursor < queue.len() {
        let i = queue[cursor];
        cursor += 1;
        let release = {
            let mut s = key.absorb(TAG_LEAF_COUNT).absorb(i as u64).stream();
            quantile_sample(&params.leaf_law, s.unit_f64())
        };
        let release = match release {
            Count::Finite(n) => n,
            Count::Infinite => {
                // Infinitely many frogs visit every leaf and ρ almost surely.
                return Ok(StarOutcome {
                    returns_to_rho: Count::Infinite,
                    activated_leaves: params.d,
                });
            }
        };
        if let Some(tr) = trace.as_deref_mut() {
            tr.leaf_releases[i] = Some(release);
        }
        for idx in 0..release {
            let mut s = key
                .absorb(TAG_LEAF_STEP)
                .absorb(i as u64)
                .absorb(idx)
                .stream();
            let t = s.below(params.d);
            if t == 0 {
                returns += 1;
            } else {
                let jj = (t - 1) as usize;
                let j = if jj >= i { jj + 1 } else { jj };
                if !activated[j] {
                    activated[j] = true;
                    queue.push(j);
                }
            }
        }
    }

    Ok(StarOutcome {
        returns_to_rho: Count::Finite(returns),
        activated_leaves: activated.iter().filter(|&&a| a).count() as u32,
    })
}

/// Inverse-cdf draw; shared uniforms couple stochastically ordered laws.
fn quantile_sample(dist: &DiscreteDist, u: f64) -> Count {
    match dist {
        DiscreteDist::FinitePmf {
            values,
            probabilities,
            infinity_mass,
        } => {
            let mut acc = 0.0;
            for (&v, &p) in values.iter().zip(probabilities) {
                acc += p;
                if u < acc {
                    return Count::Finite(v);
                }
            }
            if *infinity_mass > 0.0 {
                Count::Infinite
            } else {
                Count::Finite(values.last().copied().unwrap_or(0))
            }
        }
        _ => {
            // Unbounded laws: scan the pmf; beyond the truncation horizon the
            // residual mass is far below a resolvable uniform.
            let horizon = dist.truncation_horizon().max(8);
            let mut acc = 0.0;
            for k in 0..=horizon {
                acc += dist.pmf(k);
                if u < acc {
                    return Count::Finite(k);
                }
            }
            Count::Finite(horizon)
        }
    }
}

/// The activation law on the binary tree for a Poisson leaf law:
/// 1 with probability exp(−μ/3 − λ/2), else 2.
pub fn exact_u_binary(mu: f64, lambda: f64) -> Result<DiscreteDist> {
    check_nonnegative("mu", mu)?;
    check_nonnegative("lambda", lambda)?;
    let p1 = (-mu / 3.0 - lambda / 2.0).exp();
    DiscreteDist::finite_pmf(vec![1, 2], vec![p1, 1.0 - p1], 0.0)
}

/// The root-visit law on the binary tree for a Poisson leaf law: a
/// two-component Poisson mixture,
/// Poi(μ/3 + λ/2) w.p. exp(−μ/3 − λ/2) and Poi(μ/3 + λ) otherwise.
pub fn exact_b_binary(mu: f64, lambda: f64) -> Result<DiscreteDist> {
    check_nonnegative("mu", mu)?;
    check_nonnegative("lambda", lambda)?;
    let w1 = (-mu / 3.0 - lambda / 2.0).exp();
    DiscreteDist::poisson_mixture(vec![
        PoissonComponent {
            weight: w1,
            rate: mu / 3.0 + lambda / 2.0,
        },
        PoissonComponent {
            weight: 1.0 - w1,
            rate: mu / 3.0 + lambda,
        },
    ])
}

/// Assembles the root-visit law from an activation law `U` supported on
/// `{1, …, d}`: the mixture over u of Poi(μ/(d+1) + u·λ/d) with weight
/// P[U = u].
pub fn b_from_u(mu: f64, d: u32, lambda: f64, u_dist: &DiscreteDist) -> Result<DiscreteDist> {
    check_nonnegative("mu", mu)?;
    check_nonnegative("lambda", lambda)?;
    if d < 2 {
        return Err(FrogError::argument(format!("d must be at least 2, got {d}")));
    }
    if u_dist.pmf(0) > 0.0 || u_dist.infinity_mass() > 0.0 {
        return Err(FrogError::argument(
            "activation law must be supported on {1, …, d}".to_string(),
        ));
    }
    let mut components = Vec::new();
    let mut total = 0.0;
    for u in 1..=d as u64 {
        let w = u_dist.pmf(u);
        total += w;
        if w > 0.0 {
            components.push(PoissonComponent {
                weight: w,
                rate: mu / (d as f64 + 1.0) + u as f64 * lambda / d as f64,
            });
        }
    }
    if (total - 1.0).abs() > 1e-9 {
        return Err(FrogError::argument(format!(
            "activation law has mass {total} on {{1, …, {d}}}; support outside"
        )));
    }
    // Spread the floating residual over the recorded weights.
    for c in &mut components {
        c.weight /= total;
    }
    DiscreteDist::poisson_mixture(components)
}

/// The case-split threshold: ⌈d/c⌉ leaves must be hit by center frogs for
/// the main branch of the activation lower bound to apply.
pub fn kappa_d(d: u32, c: f64) -> u64 {
    (d as f64 / c).ceil() as u64
}

/// Hoeffding exponent for the probability that fewer than ⌈d/c⌉ leaves are
/// hit by the center frogs: `b = 2(1 − e^{−C} − 1/c)²`.
pub fn case2_exponent(big_c: f64, c: f64) -> f64 {
    let eps = 1.0 - (-big_c).exp() - 1.0 / c;
    2.0 * eps * eps
}

/// Which weight the two-branch activation lower bound carries on its
/// fallback branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QMode {
    /// The exact binomial probability P[Bin(d, 1−e^{−C}) < ⌈d/c⌉].
    Exact,
    /// The Hoeffding bound e^{−bd}; valid (stochastically smaller) only
    /// when 1 − e^{−C} ≥ 1/c.
    Bounded,
}

/// The explicit two-branch lower bound on the activation count: with the
/// main weight, ⌈d/c⌉ + Bin(d−⌈d/c⌉, 1−e^{−λ/c}); with the fallback weight,
/// 1 + Bin(d−1, 1−e^{−λ/d}).
pub fn u_doubleprime_dist(
    lambda: f64,
    d: u32,
    big_c: f64,
    c: f64,
    q_mode: QMode,
) -> Result<DiscreteDist> {
    check_nonnegative("lambda", lambda)?;
    if c <= 1.0 {
        return Err(FrogError::argument(format!("c must exceed 1, got {c}")));
    }
    if big_c <= 0.0 {
        return Err(FrogError::argument(format!(
            "C must be positive, got {big_c}"
        )));
    }
    let kd = kappa_d(d, c);
    if kd >= d as u64 {
        return Err(FrogError::argument(format!(
            "degenerate split: kappa_d = {kd} >= d = {d} (need d > c)"
        )));
    }
    let q = match q_mode {
        QMode::Exact => {
            use statrs::distribution::DiscreteCDF;
            let hit = 1.0 - (-big_c).exp();
            let bin = statrs::distribution::Binomial::new(hit, d as u64)
                .map_err(|e| FrogError::argument(format!("invalid binomial: {e}")))?;
            // P[Bin < kd] = cdf(kd - 1); kd >= 1 because d/c > 0.
            bin.cdf(kd - 1)
        }
        QMode::Bounded => {
            if 1.0 - (-big_c).exp() < 1.0 / c {
                return Err(FrogError::argument(format!(
                    "Hoeffding bound needs 1 - e^(-C) >= 1/c; got C = {big_c}, c = {c}"
                )));
            }
            (-case2_exponent(big_c, c) * d as f64).exp()
        }
    };
    DiscreteDist::shifted_binomial_mixture(vec![
        ShiftedBinomialComponent {
            weight: 1.0 - q,
            shift: kd,
            trials: d as u64 - kd,
            success: 1.0 - (-lambda / c).exp(),
        },
        ShiftedBinomialComponent {
            weight: q,
            shift: 1,
            trials: d as u64 - 1,
            success: 1.0 - (-lambda / d as f64).exp(),
        },
    ])
}

/// Empirical law of the root-return count over independent star samples.
/// Deterministic given the seed; samples parallelize by index.
pub fn monte_carlo_b(params: &StarModelParams, samples: u64, seed: u64) -> Result<DiscreteDist> {
    if samples == 0 {
        return Err(FrogError::argument("samples must be at least 1".to_string()));
    }
    let base = Key128::from_seed(seed).absorb(0x4D43_4253); // monte-carlo-B domain
    let outcomes = crate::map_trials(samples, |i| {
        let key = base.absorb(i);
        sample_star_with_key(params, key)
            .expect("validated params")
            .returns_to_rho
    });
    DiscreteDist::from_counts(&outcomes)
}

/// Total-variation distance of `empirical` from `exact`, split into the
/// truncated sum and a rigorous tail remainder, so `upper_bound()` is a
/// certified bound on the true distance.
#[derive(Debug, Clone, Copy)]
pub struct TvBound {
    pub truncated: f64,
    pub tail_remainder: f64,
}

impl TvBound {
    pub fn upper_bound(&self) -> f64 {
        self.truncated + self.tail_remainder
    }
}

pub fn tv_distance_certified(exact: &DiscreteDist, empirical: &DiscreteDist) -> TvBound {
    let horizon = exact
        .truncation_horizon()
        .max(empirical.truncation_horizon());
    let mut acc = 0.0;
    for k in 0..=horizon {
        acc += (exact.pmf(k) - empirical.pmf(k)).abs();
    }
    let tail = exact.survival_upper_bound(horizon) + empirical.survival_upper_bound(horizon);
    TvBound {
        truncated: acc / 2.0,
        tail_remainder: tail / 2.0,
    }
}

/// Two-sample total-variation gate for empirical laws.
///
/// The statistic is TV(p̂, q̂); under equality its null expectation is the
/// multinomial noise floor, so the gate passes when the observed TV does
/// not exceed the noise floor plus `z` of its standard deviations.
#[derive(Debug, Clone, Copy)]
pub struct TwoSampleTv {
    pub tv: f64,
    pub noise_floor: f64,
    pub noise_sd: f64,
    pub threshold: f64,
    pub pass: bool,
}

pub fn two_sample_tv_gate(
    a: &DiscreteDist,
    n_a: u64,
    b: &DiscreteDist,
    n_b: u64,
    z: f64,
) -> TwoSampleTv {
    let horizon = a.truncation_horizon().max(b.truncation_horizon());
    let inv = 1.0 / n_a as f64 + 1.0 / n_b as f64;
    let (mut tv, mut floor, mut var) = (0.0, 0.0, 0.0);
    let wa = n_a as f64 / (n_a + n_b) as f64;
    for k in 0..=horizon {
        let (pa, pb) = (a.pmf(k), b.pmf(k));
        tv += (pa - pb).abs();
        let pooled = wa * pa + (1.0 - wa) * pb;
        let sigma2 = pooled * (1.0 - pooled) * inv;
        floor += (2.0 * sigma2 / std::f64::consts::PI).sqrt();
        var += sigma2 * (1.0 - 2.0 / std::f64::consts::PI);
    }
    let inf_gap = (a.infinity_mass() - b.infinity_mass()).abs();
    let tv = (tv + inf_gap) / 2.0;
    let noise_floor = floor / 2.0;
    let noise_sd = var.sqrt() / 2.0;
    let threshold = noise_floor + z * noise_sd;
    TwoSampleTv {
        tv,
        noise_floor,
        noise_sd,
        threshold,
        pass: tv <= threshold,
    }
}

fn check_nonnegative(name: &str, x: f64) -> Result<()> {
    if !x.is_finite() || x < 0.0 {
        return Err(FrogError::argument(format!(
            "{name} must be finite and nonnegative, got {x}"
        )));
    }
    Ok(())
}
