//! Configurations of KSPM(p) and the local firing rule.
//!
//! A configuration is stored as its slope sequence `b_i = h_i - h_{i+1}`,
//! finitely supported, with an implicit `0^ω` tail. Firing column `i` moves
//! `p` grains off column `i`, one onto each of `i+1..=i+p`, which in slope
//! terms is `b_{i-1} += p`, `b_i -= p+1`, `b_{i+p} += 1`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest grain count accepted at the API boundary.
pub const MAX_GRAINS: u64 = 1 << 62;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("parameter p must be at least 1")]
    InvalidParameter,
    #[error("column {column} is not fireable (slope {slope} <= p = {p})")]
    NotFireable { column: usize, slope: i64, p: u32 },
    #[error("negative slope {slope} at column {column}")]
    NegativeSlope { column: usize, slope: i64 },
    #[error("grain count overflow")]
    Overflow,
    #[error("grain count {0} exceeds the limit of 2^62")]
    TooManyGrains(u64),
}

/// The model parameter: number of grains leaving a column on each firing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Params {
    p: u32,
}

impl Params {
    pub fn new(p: u32) -> Result<Self, ModelError> {
        if p == 0 {
            return Err(ModelError::InvalidParameter);
        }
        Ok(Params { p })
    }

    #[inline]
    pub fn p(self) -> u32 {
        self.p
    }

    #[inline]
    pub fn p_i64(self) -> i64 {
        self.p as i64
    }

    #[inline]
    pub fn p_usize(self) -> usize {
        self.p as usize
    }
}

impl TryFrom<u32> for Params {
    type Error = ModelError;
    fn try_from(p: u32) -> Result<Self, ModelError> {
        Params::new(p)
    }
}

impl From<Params> for u32 {
    fn from(params: Params) -> u32 {
        params.p
    }
}

impl fmt::Display for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p={}", self.p)
    }
}

/// Rejects grain counts above [`MAX_GRAINS`].
pub fn check_grains(n: u64) -> Result<u64, ModelError> {
    if n > MAX_GRAINS {
        Err(ModelError::TooManyGrains(n))
    } else {
        Ok(n)
    }
}

/// Dense capacity hint for a configuration of `n` grains: the support of any
/// reachable configuration is below `(p+1)√n + p + 1`.
pub fn capacity_hint(params: Params, n: u64) -> usize {
    let p = params.p() as f64;
    ((p + 1.0) * (n as f64).sqrt()).ceil() as usize + params.p_usize() + 2
}

/// A finitely supported slope sequence, trailing zeros trimmed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct SlopeConfig {
    slopes: Vec<i64>,
}

impl SlopeConfig {
    /// The empty configuration `0^ω`.
    pub fn empty() -> Self {
        SlopeConfig { slopes: Vec::new() }
    }

    /// The initial configuration `(n, 0^ω)`.
    pub fn tower(n: u64) -> Result<Self, ModelError> {
        let n = check_grains(n)?;
        Ok(SlopeConfig::from_trusted(vec![n as i64]))
    }

    pub fn new(slopes: Vec<i64>) -> Result<Self, ModelError> {
        if let Some((column, &slope)) = slopes.iter().enumerate().find(|(_, &b)| b < 0) {
            return Err(ModelError::NegativeSlope { column, slope });
        }
        Ok(SlopeConfig::from_trusted(slopes))
    }

    /// Builds from a buffer already known to be non-negative.
    pub(crate) fn from_trusted(mut slopes: Vec<i64>) -> Self {
        debug_assert!(slopes.iter().all(|&b| b >= 0));
        trim_zeros(&mut slopes);
        SlopeConfig { slopes }
    }

    /// Slopes up to the support; entries beyond are zero.
    pub fn as_slice(&self) -> &[i64] {
        &self.slopes
    }

    pub fn into_vec(self) -> Vec<i64> {
        self.slopes
    }

    /// `b_i`, zero beyond the stored prefix.
    #[inline]
    pub fn get(&self, i: usize) -> i64 {
        self.slopes.get(i).copied().unwrap_or(0)
    }

    /// Support `w = min{ i | b_j = 0 for all j >= i }`.
    pub fn support(&self) -> usize {
        self.slopes.len()
    }

    pub fn fireable(&self, params: Params, i: usize) -> bool {
        self.get(i) > params.p_i64()
    }

    pub fn fire(&self, params: Params, i: usize) -> Result<SlopeConfig, ModelError> {
        let slope = self.get(i);
        if slope <= params.p_i64() {
            return Err(ModelError::NotFireable { column: i, slope, p: params.p() });
        }
        let mut slopes = self.slopes.clone();
        apply_firing(&mut slopes, params, i);
        Ok(SlopeConfig::from_trusted(slopes))
    }

    pub fn is_stable(&self, params: Params) -> bool {
        self.slopes.iter().all(|&b| b <= params.p_i64())
    }

    /// Columns that can currently fire, in increasing order.
    pub fn fireable_columns(&self, params: Params) -> Vec<usize> {
        let p = params.p_i64();
        self.slopes
            .iter()
            .enumerate()
            .filter(|(_, &b)| b > p)
            .map(|(i, _)| i)
            .collect()
    }

    /// Total number of grains, `Σ (i+1) b_i`.
    pub fn grain_count(&self) -> Result<u64, ModelError> {
        let mut total: i64 = 0;
        for (i, &b) in self.slopes.iter().enumerate() {
            let weight = i64::try_from(i + 1).map_err(|_| ModelError::Overflow)?;
            let term = b.checked_mul(weight).ok_or(ModelError::Overflow)?;
            total = total.checked_add(term).ok_or(ModelError::Overflow)?;
        }
        Ok(total as u64)
    }

    /// `σ^{↓0}`: one more grain on column 0.
    pub fn add_grain_col0(&self) -> SlopeConfig {
        let mut slopes = self.slopes.clone();
        if slopes.is_empty() {
            slopes.push(0);
        }
        slopes[0] += 1;
        SlopeConfig { slopes }
    }

    pub fn heights(&self) -> HeightConfig {
        heights_from_slopes(self)
    }
}

impl TryFrom<Vec<i64>> for SlopeConfig {
    type Error = ModelError;
    fn try_from(slopes: Vec<i64>) -> Result<Self, ModelError> {
        SlopeConfig::new(slopes)
    }
}

impl From<SlopeConfig> for Vec<i64> {
    fn from(c: SlopeConfig) -> Vec<i64> {
        c.slopes
    }
}

impl fmt::Display for SlopeConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for b in &self.slopes {
            write!(f, "{b},")?;
        }
        write!(f, "0^ω)")
    }
}

/// Column heights `h_i = Σ_{j>=i} b_j`, trailing empty columns trimmed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HeightConfig {
    heights: Vec<i64>,
}

impl HeightConfig {
    pub fn new(mut heights: Vec<i64>) -> Self {
        trim_zeros(&mut heights);
        HeightConfig { heights }
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.heights
    }

    pub fn grain_count(&self) -> i64 {
        self.heights.iter().sum()
    }
}

pub fn heights_from_slopes(c: &SlopeConfig) -> HeightConfig {
    HeightConfig { heights: suffix_sums(c.as_slice()) }
}

/// Inverse of [`heights_from_slopes`]. With `require_valid`, rejects height
/// sequences that increase somewhere (a negative slope).
pub fn slopes_from_heights(
    h: &HeightConfig,
    require_valid: bool,
) -> Result<Vec<i64>, ModelError> {
    let hs = h.as_slice();
    let mut out = Vec::with_capacity(hs.len());
    for (i, &hi) in hs.iter().enumerate() {
        let next = hs.get(i + 1).copied().unwrap_or(0);
        let b = hi - next;
        if require_valid && b < 0 {
            return Err(ModelError::NegativeSlope { column: i, slope: b });
        }
        out.push(b);
    }
    trim_zeros(&mut out);
    Ok(out)
}

pub(crate) fn suffix_sums(slopes: &[i64]) -> Vec<i64> {
    let mut heights = vec![0; slopes.len()];
    let mut acc = 0;
    for (i, &b) in slopes.iter().enumerate().rev() {
        acc += b;
        heights[i] = acc;
    }
    heights
}

/// Applies the firing rule in place, growing the buffer as needed. The caller
/// guarantees `slopes[i] > p`.
#[inline]
pub(crate) fn apply_firing(slopes: &mut Vec<i64>, params: Params, i: usize) {
    let p = params.p_usize();
    if slopes.len() <= i + p {
        slopes.resize(i + p + 1, 0);
    }
    if i > 0 {
        slopes[i - 1] += p as i64;
    }
    slopes[i] -= p as i64 + 1;
    slopes[i + p] += 1;
}

pub(crate) fn trim_zeros(v: &mut Vec<i64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}
