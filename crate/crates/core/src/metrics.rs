//! Population measurements: mean reward, inverse-Gini equality, role census
//! and the group-size signal analysis, plus the small amount of summary
//! statistics the harness needs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// What [`inverse_gini`] returns when the mean reward is zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MeanZeroConvention {
    /// All-zero rewards are maximally equal.
    #[default]
    FullEquality,
    Reject,
}

/// Inverse Gini index; 1 is perfect equality.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct EqualityReading(pub f64);

impl EqualityReading {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// `1 - sum_ij |R_i - R_j| / (2 N^2 mean(R))`.
pub fn inverse_gini(rewards: &[f64], convention: MeanZeroConvention) -> Result<EqualityReading> {
    if rewards.is_empty() {
        return Err(Error::config("rewards", "equality needs at least one agent"));
    }
    let n = rewards.len() as f64;
    let mean = rewards.iter().sum::<f64>() / n;
    if mean == 0.0 {
        return match convention {
            MeanZeroConvention::FullEquality => Ok(EqualityReading(1.0)),
            MeanZeroConvention::Reject => Err(Error::UndefinedEquality),
        };
    }
    let first = rewards[0];
    if rewards.iter().all(|&r| r == first) {
        return Ok(EqualityReading(1.0));
    }

    // Sorted ascending, the pairwise sum is 2 * sum_k (k*x_k - prefix_k).
    let mut sorted = rewards.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut prefix = 0.0;
    let mut half_sum = 0.0;
    for (k, &x) in sorted.iter().enumerate() {
        half_sum += k as f64 * x - prefix;
        prefix += x;
    }
    Ok(EqualityReading(1.0 - 2.0 * half_sum / (2.0 * n * n * mean)))
}

/// Arithmetic mean of per-agent totals; 0 for an empty population.
pub fn mean_population_reward(totals: &[f64]) -> f64 {
    if totals.is_empty() {
        return 0.0;
    }
    totals.iter().sum::<f64>() / totals.len() as f64
}

pub const DEFAULT_DOMINANCE_RATIO: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Picker,
    Cleaner,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoleCensus {
    pub apples: Vec<u64>,
    pub cleans: Vec<u64>,
    pub roles: Vec<Role>,
}

impl RoleCensus {
    pub fn count(&self, role: Role) -> usize {
        self.roles.iter().filter(|&&r| r == role).count()
    }

    pub fn pickers(&self) -> usize {
        self.count(Role::Picker)
    }

    pub fn cleaners(&self) -> usize {
        self.count(Role::Cleaner)
    }
}

pub fn classify_role(apples: u64, cleans: u64, dominance_ratio: f64) -> Role {
    if apples as f64 >= dominance_ratio * (cleans as f64 + 1.0) {
        Role::Picker
    } else if cleans as f64 >= dominance_ratio * (apples as f64 + 1.0) {
        Role::Cleaner
    } else {
        Role::Mixed
    }
}

pub fn classify_roles(apples: &[u64], cleans: &[u64], dominance_ratio: f64) -> Result<RoleCensus> {
    if dominance_ratio.is_nan() || dominance_ratio <= 1.0 {
        return Err(Error::config(
            "dominance_ratio",
            format!("must exceed 1, got {dominance_ratio}"),
        ));
    }
    if apples.len() != cleans.len() {
        return Err(Error::LengthMismatch {
            expected: apples.len(),
            actual: cleans.len(),
        });
    }
    let roles = apples
        .iter()
        .zip(cleans)
        .map(|(&a, &c)| classify_role(a, c, dominance_ratio))
        .collect();
    Ok(RoleCensus {
        apples: apples.to_vec(),
        cleans: cleans.to_vec(),
        roles,
    })
}

/// Probability that at least one of `n` independent agents collects a
/// non-zero reward when each does so with probability `p_collect`.
pub fn prob_any_nonzero(p_collect: f64, n: u32) -> f64 {
    1.0 - (1.0 - p_collect).powi(n as i32)
}

/// Share each agent receives when `r` is split evenly over `n` agents.
pub fn per_agent_share(r: f64, n: u32) -> f64 {
    r / n as f64
}

/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
pub fn sample_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean_population_reward(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}

/// Half-width of the normal-approximation 95% interval, `1.96 * s / sqrt(n)`.
pub fn ci95_half_width(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    1.96 * sample_std(values) / (values.len() as f64).sqrt()
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

/// Index range of the last quarter of `num_batches` batches (at least one).
pub fn final_quartile(num_batches: usize) -> std::ops::Range<usize> {
    let len = num_batches.div_ceil(4).max(1).min(num_batches);
    num_batches - len..num_batches
}
