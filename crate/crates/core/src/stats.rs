//! Nonparametric statistics: box summaries (median, quartiles, 1.5-IQR
//! whiskers) and the two-tailed Mann-Whitney U test.
//!
//! Quartiles use linear interpolation over the sorted sample (inclusive
//! method) so downstream plot data is reproducible bit-for-bit. The U test
//! switches between exact enumeration of all labelings (small samples) and
//! the tie-corrected normal approximation with continuity correction.

use alloc::vec::Vec;
use core::fmt;

/// Pooled sample size up to which the exact permutation p-value is used.
pub const EXACT_ENUMERATION_LIMIT: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StatsError {
    EmptySample,
    NonFiniteSample,
}

impl fmt::Display for StatsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StatsError::EmptySample => write!(f, "sample is empty"),
            StatsError::NonFiniteSample => write!(f, "sample contains a non-finite value"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoxSummary {
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
    pub lower_whisker: f64,
    pub upper_whisker: f64,
    pub outliers: Vec<f64>,
}

/// Linear-interpolation quantile (inclusive method) of a sorted slice.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = libm::floor(pos) as usize;
    let frac = pos - lo as f64;
    if frac == 0.0 || lo + 1 == n {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

fn checked_sorted(sample: &[f64]) -> Result<Vec<f64>, StatsError> {
    if sample.is_empty() {
        return Err(StatsError::EmptySample);
    }
    if sample.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFiniteSample);
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values compare"));
    Ok(sorted)
}

/// Median, quartiles and 1.5-IQR whiskers of a sample.
///
/// Whiskers are clipped to the most extreme data points still within
/// 1.5 IQR of the quartiles; everything beyond is reported as an outlier.
pub fn summarize(sample: &[f64]) -> Result<BoxSummary, StatsError> {
    let sorted = checked_sorted(sample)?;
    let q25 = quantile(&sorted, 0.25);
    let median = quantile(&sorted, 0.5);
    let q75 = quantile(&sorted, 0.75);
    let iqr = q75 - q25;
    let lo_fence = q25 - 1.5 * iqr;
    let hi_fence = q75 + 1.5 * iqr;

    let mut lower_whisker = q25;
    let mut upper_whisker = q75;
    let mut outliers = Vec::new();
    for &v in &sorted {
        if v < lo_fence || v > hi_fence {
            outliers.push(v);
        }
    }
    for &v in &sorted {
        if v >= lo_fence {
            lower_whisker = v;
            break;
        }
    }
    for &v in sorted.iter().rev() {
        if v <= hi_fence {
            upper_whisker = v;
            break;
        }
    }
    Ok(BoxSummary {
        median,
        q25,
        q75,
        lower_whisker,
        upper_whisker,
        outliers,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum PValueMethod {
    Exact,
    NormalApprox,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MannWhitneyResult {
    /// min(U1, U2), with ties contributing half counts.
    pub u_statistic: f64,
    pub p_two_tailed: f64,
    pub method: PValueMethod,
}

/// 2*U for the `x` side: each (x, y) pair contributes 2 if x > y,
/// 1 on a tie, 0 otherwise. Kept in integers so enumeration is exact.
fn two_u(x: &[f64], y: &[f64]) -> u64 {
    let mut acc = 0u64;
    for &a in x {
        for &b in y {
            if a > b {
                acc += 2;
            } else if a == b {
                acc += 1;
            }
        }
    }
    acc
}

/// 2*U1 for the subset of `pooled` selected by `mask` against the rest.
fn two_u_mask(pooled: &[f64], mask: u32) -> u64 {
    let mut acc = 0u64;
    for (i, &a) in pooled.iter().enumerate() {
        if mask & (1 << i) == 0 {
            continue;
        }
        for (j, &b) in pooled.iter().enumerate() {
            if mask & (1 << j) != 0 {
                continue;
            }
            if a > b {
                acc += 2;
            } else if a == b {
                acc += 1;
            }
        }
    }
    acc
}

/// Exact two-tailed p by enumerating every way of labeling the pooled
/// multiset: `p = min(1, 2 * min(P(U1 <= u1), P(U1 >= u1)))`, the doubled
/// smaller tail of the observed first-sample statistic. Swapping the two
/// samples maps each labeling to its complement and flips the tails, so
/// this definition is exactly symmetric in the arguments even under ties.
fn exact_p(pooled: &[f64], n1: usize, two_u1: u64) -> f64 {
    let n = pooled.len();
    debug_assert!(n <= EXACT_ENUMERATION_LIMIT);
    let mut count_le = 0u64;
    let mut count_ge = 0u64;
    let mut total = 0u64;
    // Gosper's hack: iterate all n-bit masks with exactly n1 bits set.
    let mut mask: u32 = (1u32 << n1) - 1;
    let limit: u32 = 1u32 << n;
    while mask < limit {
        total += 1;
        let u = two_u_mask(pooled, mask);
        if u <= two_u1 {
            count_le += 1;
        }
        if u >= two_u1 {
            count_ge += 1;
        }
        let c = mask & mask.wrapping_neg();
        let r = mask + c;
        if r >= limit || c == 0 {
            break;
        }
        mask = r | (((mask ^ r) >> 2) / c);
    }
    let p = 2.0 * count_le.min(count_ge) as f64 / total as f64;
    if p > 1.0 {
        1.0
    } else {
        p
    }
}

/// Standard normal CDF via erfc.
fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / core::f64::consts::SQRT_2)
}

/// Tie-corrected normal approximation with continuity correction.
fn normal_approx_p(pooled_sorted: &[f64], n1: usize, n2: usize, u_min: f64) -> f64 {
    let n = (n1 + n2) as f64;
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < pooled_sorted.len() {
        let mut j = i + 1;
        while j < pooled_sorted.len() && pooled_sorted[j] == pooled_sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    let mean = n1 as f64 * n2 as f64 / 2.0;
    let var = (n1 as f64 * n2 as f64 / 12.0) * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if var <= 0.0 {
        return 1.0;
    }
    let z = (u_min - mean + 0.5) / libm::sqrt(var);
    let p = 2.0 * normal_cdf(z);
    p.clamp(f64::MIN_POSITIVE, 1.0)
}

/// Two-tailed Mann-Whitney U test with midrank tie handling.
///
/// Exact enumeration of all C(n1+n2, n1) labelings when the pooled size is
/// at most [`EXACT_ENUMERATION_LIMIT`]; tie-corrected normal approximation
/// with continuity correction beyond that.
pub fn mann_whitney_u(x: &[f64], y: &[f64]) -> Result<MannWhitneyResult, StatsError> {
    let method = if x.len() + y.len() <= EXACT_ENUMERATION_LIMIT {
        PValueMethod::Exact
    } else {
        PValueMethod::NormalApprox
    };
    mann_whitney_u_with(x, y, method)
}

/// Same test with the p-value method forced; the exact method still
/// requires the pooled size to fit [`EXACT_ENUMERATION_LIMIT`].
pub fn mann_whitney_u_with(
    x: &[f64],
    y: &[f64],
    method: PValueMethod,
) -> Result<MannWhitneyResult, StatsError> {
    if x.is_empty() || y.is_empty() {
        return Err(StatsError::EmptySample);
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFiniteSample);
    }
    let n1 = x.len();
    let n2 = y.len();
    let two_u1 = two_u(x, y);
    let two_u2 = two_u(y, x);
    debug_assert_eq!(two_u1 + two_u2, 2 * (n1 * n2) as u64);
    let u_min = two_u1.min(two_u2) as f64 / 2.0;

    let mut pooled = Vec::with_capacity(n1 + n2);
    pooled.extend_from_slice(x);
    pooled.extend_from_slice(y);
    let p_two_tailed = match method {
        PValueMethod::Exact => {
            assert!(
                n1 + n2 <= EXACT_ENUMERATION_LIMIT,
                "exact enumeration capped at {EXACT_ENUMERATION_LIMIT} pooled values"
            );
            exact_p(&pooled, n1, two_u1)
        }
        PValueMethod::NormalApprox => {
            pooled.sort_by(|a, b| a.partial_cmp(b).expect("finite values compare"));
            normal_approx_p(&pooled, n1, n2, u_min)
        }
    };
    Ok(MannWhitneyResult {
        u_statistic: u_min,
        p_two_tailed,
        method,
    })
}
