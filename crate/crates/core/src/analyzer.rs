//! Structural analysis of fixed points: wave-grammar parsing of the tail,
//! support bounds, plateaus, the interior zero of the wave region, and
//! logarithmic fits over sweeps.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dds::{audit_trajectory, wave_unfold, DdsError, WaveToken};
use crate::model::{HeightConfig, ModelError, Params, SlopeConfig};
use crate::stabilizer::{stabilize, Avalanche, FixedPoint, Hourglass, Strategy};

#[derive(Debug, Error)]
pub enum AnalyzerError {
    #[error("log fit needs at least {min_rows} rows spanning two decades, got {rows} rows spanning {span:.3} decades")]
    InsufficientData { rows: usize, min_rows: usize, span: f64 },
    #[error("no sample points: stride {stride} exceeds n-max {n_max}")]
    EmptySelection { stride: u64, n_max: u64 },
    #[error("stride must be positive")]
    ZeroStride,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Dds(#[from] DdsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grammar {
    /// `(p…1)* 0 (p…1)* 0^ω`, the lone zero being absorbable into `0^ω`.
    Strict,
    /// `(0 + p…1)* 0^ω`.
    Loose,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WaveDecomposition {
    pub n: usize,
    pub prefix: Vec<i64>,
    pub blocks: Vec<WaveToken>,
    /// Column index of each `Zero` block.
    pub zero_positions: Vec<usize>,
    pub interior_zero_count: usize,
    pub accepted: bool,
    pub grammar: Grammar,
}

/// Tokenizes `slopes[start..]` up to the support. `None` if some column is
/// neither `0` nor the start of a complete wave.
fn tokenize(p: i64, slopes: &[i64], start: usize) -> Option<Vec<(WaveToken, usize)>> {
    let w = slopes.len();
    let mut tokens = Vec::new();
    let mut i = start;
    while i < w {
        if slopes[i] == 0 {
            tokens.push((WaveToken::Zero, i));
            i += 1;
        } else if is_wave_at(p, slopes, i) {
            tokens.push((WaveToken::Wave, i));
            i += p as usize;
        } else {
            return None;
        }
    }
    Some(tokens)
}

fn is_wave_at(p: i64, slopes: &[i64], i: usize) -> bool {
    let len = p as usize;
    i + len <= slopes.len() && (0..len).all(|k| slopes[i + k] == p - k as i64)
}

fn grammar_admits(grammar: Grammar, zeros: usize) -> bool {
    match grammar {
        Grammar::Strict => zeros <= 1,
        Grammar::Loose => true,
    }
}

/// Parses the suffix of `slopes` starting at `n`.
///
/// For `n` beyond the support the suffix is `0^ω` and always accepted.
pub fn parse_waves_at(params: Params, slopes: &SlopeConfig, n: usize, grammar: Grammar) -> WaveDecomposition {
    let s = slopes.as_slice();
    let n_eff = n.min(s.len());
    let tokens = tokenize(params.p_i64(), s, n_eff);
    let prefix = s[..n_eff].to_vec();
    match tokens {
        Some(tokens) => {
            let zero_positions: Vec<usize> =
                tokens.iter().filter(|(t, _)| *t == WaveToken::Zero).map(|&(_, i)| i).collect();
            let zeros = zero_positions.len();
            WaveDecomposition {
                n,
                prefix,
                blocks: tokens.into_iter().map(|(t, _)| t).collect(),
                zero_positions,
                interior_zero_count: zeros,
                accepted: grammar_admits(grammar, zeros),
                grammar,
            }
        }
        None => WaveDecomposition {
            n,
            prefix,
            blocks: Vec::new(),
            zero_positions: Vec::new(),
            interior_zero_count: 0,
            accepted: false,
            grammar,
        },
    }
}

/// Minimal `n` whose suffix matches `grammar`.
///
/// A backward pass computes, for every start column, whether the
/// deterministic tokenization reaches the support and how many zeros it
/// emits; the decomposition at the minimal accepted start is then rebuilt.
pub fn parse_waves(params: Params, slopes: &SlopeConfig, grammar: Grammar) -> WaveDecomposition {
    let s = slopes.as_slice();
    let w = s.len();
    let p = params.p_i64();
    let len = params.p_usize();
    // zeros[i] = number of zeros in the parse of s[i..], None if it fails.
    let mut zeros: Vec<Option<usize>> = vec![None; w + 1];
    zeros[w] = Some(0);
    for i in (0..w).rev() {
        zeros[i] = if s[i] == 0 {
            zeros[i + 1].map(|z| z + 1)
        } else if is_wave_at(p, s, i) {
            zeros[i + len]
        } else {
            None
        };
    }
    let n = (0..=w)
        .find(|&i| zeros[i].is_some_and(|z| grammar_admits(grammar, z)))
        .unwrap_or(w);
    parse_waves_at(params, slopes, n, grammar)
}

/// `w = min{i : b_j = 0 for all j >= i}`.
pub fn support(slopes: &SlopeConfig) -> usize {
    slopes.support()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportReport {
    pub n: u64,
    pub p: u32,
    pub w: usize,
    /// `√N / p - 1`, informational.
    pub lower: f64,
    /// `(p+1)√N + p + 1`, informational.
    pub upper: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
    pub within_bounds: bool,
}

/// Checks `√N/p - 1 < w < (p+1)√N + p + 1` strictly, in integers.
///
/// The lower bound is `N < p²(w+1)²`; the upper bound holds outright when
/// `w < p+1` and is otherwise `(w-p-1)² < (p+1)² N`.
pub fn support_bounds(params: Params, n: u64, w: usize) -> SupportReport {
    let p = params.p() as u128;
    let nn = n as u128;
    let ww = w as u128;
    let lower_ok = nn < p * p * (ww + 1) * (ww + 1);
    let upper_ok = ww < p + 1 || {
        let d = ww - p - 1;
        d * d < (p + 1) * (p + 1) * nn
    };
    let root = (n as f64).sqrt();
    let pf = params.p() as f64;
    SupportReport {
        n,
        p: params.p(),
        w,
        lower: root / pf - 1.0,
        upper: (pf + 1.0) * root + pf + 1.0,
        lower_ok,
        upper_ok,
        within_bounds: lower_ok && upper_ok,
    }
}

/// Longest run of consecutive non-empty columns of equal height; 1 when
/// there is no plateau (0 for the empty configuration).
pub fn max_plateau(heights: &HeightConfig) -> usize {
    let h = heights.as_slice();
    let mut best = usize::from(h.iter().any(|&x| x != 0));
    let mut run = 0;
    for (i, &x) in h.iter().enumerate() {
        if x == 0 {
            run = 0;
            continue;
        }
        run = if i > 0 && h[i - 1] == x { run + 1 } else { 1 };
        best = best.max(run);
    }
    best
}

/// Plateau length read straight off the slope vector: a plateau is a run of
/// zero slopes between non-empty columns.
pub fn max_plateau_of_slopes(slopes: &[i64]) -> usize {
    let end = slopes.iter().rposition(|&b| b != 0).map_or(0, |i| i + 1);
    if end == 0 {
        return 0;
    }
    let mut best = 0;
    let mut run = 0;
    for &b in &slopes[..end] {
        run = if b == 0 { run + 1 } else { 0 };
        best = best.max(run);
    }
    best + 1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClimbingZeroReport {
    pub k: u64,
    pub prev_n_strict: usize,
    pub next_n_strict: usize,
    pub reaches_wave_region: bool,
    pub prev_zero: Option<usize>,
    pub next_zero: Option<usize>,
    pub next_interior_zeros: usize,
    /// Slopes beyond the reach of the avalanche are unchanged.
    pub untouched_tail_ok: bool,
    /// The interior zero did not move right, compared only when both zeros
    /// lie in the wave region shared by both tails.
    pub zero_not_right: bool,
    pub violation: bool,
}

/// Compares the strict tails around one avalanche `prev → next`.
pub fn climbing_zero_check(prev: &FixedPoint, next: &FixedPoint, avalanche: &Avalanche) -> ClimbingZeroReport {
    let params = prev.p;
    let ps = parse_waves(params, &prev.slopes, Grammar::Strict);
    let ns = parse_waves(params, &next.slopes, Grammar::Strict);
    let reach = avalanche.max_fired.map(|m| m + params.p_usize());
    let reaches_wave_region = avalanche.max_fired.is_some_and(|m| m >= ps.n);
    // The dropped grain itself changes b_0.
    let first_untouched = reach.map_or(1, |r| r + 1);
    let width = prev.slopes.support().max(next.slopes.support());
    let untouched_tail_ok = (first_untouched..width).all(|i| prev.slopes.get(i) == next.slopes.get(i));
    let prev_zero = ps.zero_positions.first().copied();
    let next_zero = ns.zero_positions.first().copied();
    let shared = ps.n.max(ns.n);
    let zero_not_right = match (prev_zero, next_zero) {
        (Some(a), Some(b)) if reaches_wave_region && a >= shared && b >= shared => b <= a,
        _ => true,
    };
    let violation = !untouched_tail_ok || ns.interior_zero_count > 1 || !ns.accepted || !zero_not_right;
    ClimbingZeroReport {
        k: avalanche.k,
        prev_n_strict: ps.n,
        next_n_strict: ns.n,
        reaches_wave_region,
        prev_zero,
        next_zero,
        next_interior_zeros: ns.interior_zero_count,
        untouched_tail_ok,
        zero_not_right,
        violation,
    }
}

/// Everything the analyzer derives from one fixed point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointAnalysis {
    pub w: usize,
    pub strict: WaveDecomposition,
    pub loose: WaveDecomposition,
    pub uniform_index: Option<usize>,
    /// The suffix from the first uniform averaging vector parses loosely.
    pub loose_at_uniform: bool,
    /// The strict tail replays through the averaging system from a uniform vector.
    pub unfold_consistent: bool,
    pub support: SupportReport,
    pub ambiguous_count: usize,
    pub audit_passed: bool,
}

impl FixedPointAnalysis {
    pub fn invariants_ok(&self) -> bool {
        self.strict.accepted
            && self.strict.interior_zero_count <= 1
            && self.strict.n <= self.w + 1
            && self.loose.accepted
            && self.loose_at_uniform
            && self.unfold_consistent
            && self.support.within_bounds
            && self.audit_passed
    }
}

pub fn analyze(fp: &FixedPoint) -> Result<FixedPointAnalysis, AnalyzerError> {
    let params = fp.p;
    let w = fp.slopes.support();
    let strict = parse_waves(params, &fp.slopes, Grammar::Strict);
    let loose = parse_waves(params, &fp.slopes, Grammar::Loose);
    let audit = audit_trajectory(fp)?;
    let loose_at_uniform = audit
        .uniform_index
        .is_some_and(|u| parse_waves_at(params, &fp.slopes, u, Grammar::Loose).accepted);
    let unfold_consistent = {
        let tail = &fp.slopes.as_slice()[strict.n.min(w)..];
        let strict_loose = parse_waves_at(params, &fp.slopes, strict.n, Grammar::Loose);
        strict_loose.accepted
            && wave_unfold(params, 0, tail).is_ok_and(|r| r.tokens == strict.blocks)
    };
    Ok(FixedPointAnalysis {
        w,
        support: support_bounds(params, fp.n, w),
        uniform_index: audit.uniform_index,
        ambiguous_count: audit.ambiguous_before_uniform,
        audit_passed: audit.passed(),
        loose_at_uniform,
        unfold_consistent,
        strict,
        loose,
    })
}

/// One sampled `N` of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub n: u64,
    pub p: u32,
    pub w: usize,
    pub n_strict: usize,
    pub n_loose: usize,
    pub uniform_index: Option<usize>,
    pub interior_zeros: usize,
    /// `L(p,N)`, incremental runs only.
    pub density_column: Option<usize>,
    pub ambiguous_count: usize,
    pub elapsed_us: u64,
    pub support_ok: bool,
    pub strict_ok: bool,
    pub loose_at_uniform: bool,
    pub unfold_consistent: bool,
    pub audit_passed: bool,
    /// No avalanche since the previous row fired a column twice.
    pub avalanches_simple: Option<bool>,
    /// Climbing-zero findings since the previous row.
    pub climbing_violations: Option<usize>,
}

impl ScanRow {
    pub const CSV_HEADER: [&'static str; 10] = [
        "N",
        "p",
        "w",
        "n_strict",
        "n_loose",
        "uniform_index",
        "interior_zeros",
        "density_column",
        "ambiguous_count",
        "elapsed_us",
    ];

    pub fn from_analysis(fp: &FixedPoint, a: &FixedPointAnalysis, elapsed_us: u64) -> Self {
        ScanRow {
            n: fp.n,
            p: fp.p.p(),
            w: a.w,
            n_strict: a.strict.n,
            n_loose: a.loose.n,
            uniform_index: a.uniform_index,
            interior_zeros: a.strict.interior_zero_count,
            density_column: None,
            ambiguous_count: a.ambiguous_count,
            elapsed_us,
            support_ok: a.support.within_bounds,
            strict_ok: a.strict.accepted && a.strict.interior_zero_count <= 1 && a.strict.n <= a.w + 1,
            loose_at_uniform: a.loose_at_uniform,
            unfold_consistent: a.unfold_consistent,
            audit_passed: a.audit_passed,
            avalanches_simple: None,
            climbing_violations: None,
        }
    }

    pub fn csv_record(&self) -> [String; 10] {
        let opt = |v: Option<usize>| v.map_or_else(String::new, |x| x.to_string());
        [
            self.n.to_string(),
            self.p.to_string(),
            self.w.to_string(),
            self.n_strict.to_string(),
            self.n_loose.to_string(),
            opt(self.uniform_index),
            self.interior_zeros.to_string(),
            opt(self.density_column),
            self.ambiguous_count.to_string(),
            self.elapsed_us.to_string(),
        ]
    }

    pub fn invariants_ok(&self) -> bool {
        self.support_ok
            && self.strict_ok
            && self.loose_at_uniform
            && self.unfold_consistent
            && self.audit_passed
            && self.avalanches_simple != Some(false)
            && self.climbing_violations.unwrap_or(0) == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub p: Params,
    pub n_max: u64,
    pub stride: u64,
    pub incremental: bool,
    pub timings: bool,
}

impl ScanConfig {
    /// `{stride, 2·stride, …} ∩ [1, n_max]`.
    pub fn samples(&self) -> Result<Vec<u64>, AnalyzerError> {
        if self.stride == 0 {
            return Err(AnalyzerError::ZeroStride);
        }
        if self.stride > self.n_max {
            return Err(AnalyzerError::EmptySelection { stride: self.stride, n_max: self.n_max });
        }
        Ok((1..=self.n_max / self.stride).map(|k| k * self.stride).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub rows: Vec<ScanRow>,
    /// Avalanches, over the whole incremental run, that fired some column twice.
    pub repeated_firings: Option<usize>,
}

fn elapsed(start: Instant, timings: bool) -> u64 {
    if timings {
        start.elapsed().as_micros() as u64
    } else {
        0
    }
}

/// Runs a sweep. Direct mode stabilizes every sample independently on the
/// current rayon pool; incremental mode drops grains one at a time and
/// snapshots the fixed point at each sample.
pub fn scan(config: &ScanConfig) -> Result<ScanResult, AnalyzerError> {
    let samples = config.samples()?;
    if !config.incremental {
        let rows = samples
            .par_iter()
            .map(|&n| {
                let start = Instant::now();
                let fp = stabilize(config.p, n, Strategy::Leftmost)?;
                let us = elapsed(start, config.timings);
                let a = analyze(&fp)?;
                Ok(ScanRow::from_analysis(&fp, &a, us))
            })
            .collect::<Result<Vec<_>, AnalyzerError>>()?;
        return Ok(ScanResult { rows, repeated_firings: None });
    }

    let mut glass = Hourglass::new(config.p);
    let mut rows = Vec::with_capacity(samples.len());
    let mut density = 0;
    let mut repeated_total = 0;
    let mut prev = glass.fixed_point();
    for &n in &samples {
        let start = Instant::now();
        let mut repeated = 0;
        let mut climbing = 0;
        while glass.k() < n {
            let av = glass.step()?;
            density = density.max(av.density_column);
            if av.fired.windows(2).any(|w| w[0] == w[1]) {
                repeated += 1;
            }
            let next = glass.fixed_point();
            if climbing_zero_check(&prev, &next, &av).violation {
                climbing += 1;
            }
            prev = next;
        }
        let us = elapsed(start, config.timings);
        repeated_total += repeated;
        let a = analyze(&prev)?;
        let mut row = ScanRow::from_analysis(&prev, &a, us);
        row.density_column = Some(density);
        row.avalanches_simple = Some(repeated == 0);
        row.climbing_violations = Some(climbing);
        rows.push(row);
    }
    Ok(ScanResult { rows, repeated_firings: Some(repeated_total) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitField {
    NStrict,
    UniformIndex,
    DensityColumn,
}

impl FitField {
    pub fn get(self, row: &ScanRow) -> Option<f64> {
        match self {
            FitField::NStrict => Some(row.n_strict as f64),
            FitField::UniformIndex => row.uniform_index.map(|u| u as f64),
            FitField::DensityColumn => row.density_column.map(|d| d as f64),
        }
    }
}

/// Smallest `N` admitted to the ratio statistic.
pub const RATIO_MIN_N: u64 = 16;
pub const FIT_MIN_ROWS: usize = 10;

/// `field ≈ c log2(N) + d` by least squares.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogFit {
    pub c: f64,
    pub d: f64,
    /// `max field/log2(N)` over `N >= 16`.
    pub max_ratio: f64,
    pub max_ratio_at: u64,
    pub points: usize,
}

/// Fits `(N, value)` pairs.
pub fn log_fit_points(points: &[(u64, f64)]) -> Result<LogFit, AnalyzerError> {
    let pts: Vec<(u64, f64)> = points.iter().copied().filter(|&(n, _)| n >= 1).collect();
    let span = match (pts.iter().map(|p| p.0).min(), pts.iter().map(|p| p.0).max()) {
        (Some(lo), Some(hi)) => (hi as f64 / lo as f64).log10(),
        _ => 0.0,
    };
    if pts.len() < FIT_MIN_ROWS || span < 2.0 {
        return Err(AnalyzerError::InsufficientData { rows: pts.len(), min_rows: FIT_MIN_ROWS, span });
    }
    let xs: Vec<f64> = pts.iter().map(|&(n, _)| (n as f64).log2()).collect();
    let k = pts.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&pts).map(|(x, p)| (x - mx) * (p.1 - my)).sum();
    let c = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let d = my - c * mx;
    let (max_ratio, max_ratio_at) = pts
        .iter()
        .filter(|&&(n, _)| n >= RATIO_MIN_N)
        .map(|&(n, v)| (v / (n as f64).log2(), n))
        .fold((0.0, 0), |best, cur| if cur.0 > best.0 { cur } else { best });
    Ok(LogFit { c, d, max_ratio, max_ratio_at, points: pts.len() })
}

pub fn log_fit(rows: &[ScanRow], field: FitField) -> Result<LogFit, AnalyzerError> {
    let points: Vec<(u64, f64)> = rows.iter().filter_map(|r| field.get(r).map(|v| (r.n, v))).collect();
    log_fit_points(&points)
}

/// Allowed growth of the ratio statistic from one decade to the next.
pub const REGRESSION_FACTOR: f64 = 1.25;

/// Compares `max field/log2(N)` over the top decade `[N_max/10, N_max]` with
/// the decade below it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionGate {
    pub top_decade_max: f64,
    pub previous_decade_max: f64,
    pub passed: bool,
}

pub fn regression_gate(points: &[(u64, f64)]) -> Option<RegressionGate> {
    let n_max = points.iter().map(|p| p.0).max()?;
    let top_lo = n_max / 10;
    let prev_lo = n_max / 100;
    let ratio_max = |lo: u64, hi: u64, hi_inclusive: bool| {
        points
            .iter()
            .filter(|&&(n, _)| n >= lo.max(RATIO_MIN_N) && (n < hi || (hi_inclusive && n == hi)))
            .map(|&(n, v)| v / (n as f64).log2())
            .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.max(r))))
    };
    let top = ratio_max(top_lo, n_max, true)?;
    let prev = ratio_max(prev_lo, top_lo, false)?;
    Some(RegressionGate {
        top_decade_max: top,
        previous_decade_max: prev,
        passed: top <= REGRESSION_FACTOR * prev,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stabilizer::{leftmost_avalanche, stabilize};

    fn p(p: u32) -> Params {
        Params::new(p).unwrap()
    }

    fn slopes(v: &[i64]) -> SlopeConfig {
        SlopeConfig::new(v.to_vec()).unwrap()
    }

    /// Exhaustive reference: try every start, tokenize forward.
    fn naive_min_n(params: Params, s: &SlopeConfig, grammar: Grammar) -> usize {
        (0..=s.support())
            .find(|&n| parse_waves_at(params, s, n, grammar).accepted)
            .unwrap()
    }

    #[test]
    fn pi_24() {
        let s = slopes(&[2, 1, 2, 1, 2]);
        let d = parse_waves(p(2), &s, Grammar::Strict);
        assert_eq!(d.n, 5);
        assert!(d.accepted && d.blocks.is_empty());
        assert_eq!(d.prefix, vec![2, 1, 2, 1, 2]);
    }

    #[test]
    fn pi_2000() {
        let fp = stabilize(p(4), 2000, Strategy::Leftmost).unwrap();
        let d = parse_waves(p(4), &fp.slopes, Grammar::Strict);
        use WaveToken::*;
        assert_eq!(d.n, 20);
        assert_eq!(d.blocks, vec![Wave, Zero, Wave, Wave, Wave, Wave]);
        assert_eq!(d.zero_positions, vec![24]);
        assert_eq!(d.interior_zero_count, 1);
    }

    #[test]
    fn empty_and_grammars() {
        let e = SlopeConfig::empty();
        for g in [Grammar::Strict, Grammar::Loose] {
            let d = parse_waves(p(3), &e, g);
            assert_eq!(d.n, 0);
            assert!(d.accepted);
        }
        // Two interior zeros: loose accepts from 0, strict must skip past one.
        let s = slopes(&[0, 2, 1, 0, 2, 1]);
        assert_eq!(parse_waves(p(2), &s, Grammar::Loose).n, 0);
        assert_eq!(parse_waves(p(2), &s, Grammar::Strict).n, 1);
        assert!(!parse_waves_at(p(2), &s, 0, Grammar::Strict).accepted);
        assert!(!parse_waves_at(p(2), &s, 2, Grammar::Loose).accepted);
    }

    #[test]
    fn min_n_matches_exhaustive_scan() {
        for pp in 1..=4 {
            for n in [0u64, 1, 5, 17, 64, 150, 333] {
                let fp = stabilize(p(pp), n, Strategy::Leftmost).unwrap();
                for g in [Grammar::Strict, Grammar::Loose] {
                    assert_eq!(
                        parse_waves(p(pp), &fp.slopes, g).n,
                        naive_min_n(p(pp), &fp.slopes, g),
                        "p={pp} N={n} {g:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn support_examples() {
        let r = support_bounds(p(2), 24, 5);
        assert!(r.within_bounds);
        assert!((r.lower - 1.449).abs() < 1e-3 && (r.upper - 17.697).abs() < 1e-3);
        let r = support_bounds(p(4), 2000, 41);
        assert!(r.within_bounds);
        assert!((r.lower - 10.18).abs() < 1e-2 && (r.upper - 228.6).abs() < 1e-1);
        assert!(support_bounds(p(1), 1, 1).within_bounds);
        assert!(support_bounds(p(1), 0, 0).within_bounds);
        // Boundary cases of the strict inequalities.
        assert!(!support_bounds(p(2), 36, 2).lower_ok); // √36/2 - 1 = 2
        assert!(support_bounds(p(1), 1, 3).upper_ok); // 3 < 2·1 + 2
        assert!(!support_bounds(p(1), 1, 4).upper_ok);
    }

    #[test]
    fn support_bounds_match_float_away_from_ties() {
        for pp in 1..=5u32 {
            for n in 0..400u64 {
                for w in 0..80usize {
                    let r = support_bounds(p(pp), n, w);
                    let wf = w as f64;
                    if (wf - r.lower).abs() > 1e-9 {
                        assert_eq!(r.lower_ok, r.lower < wf, "p={pp} n={n} w={w}");
                    }
                    if (wf - r.upper).abs() > 1e-9 {
                        assert_eq!(r.upper_ok, wf < r.upper, "p={pp} n={n} w={w}");
                    }
                }
            }
        }
    }

    #[test]
    fn plateau_examples() {
        let fp = stabilize(p(2), 24, Strategy::Leftmost).unwrap();
        let h = fp.slopes.heights();
        assert_eq!(h.as_slice(), &[8, 6, 5, 3, 2]);
        assert_eq!(max_plateau(&h), 1);
        assert_eq!(max_plateau(&HeightConfig::new(vec![9, 4, 4, 4, 1])), 3);
        assert_eq!(max_plateau(&HeightConfig::new(vec![])), 0);
        for v in [vec![3, 0, 0, 1], vec![1, 1, 1], vec![0, 2, 0], vec![5]] {
            let s = slopes(&v);
            assert_eq!(max_plateau(&s.heights()), max_plateau_of_slopes(s.as_slice()), "{v:?}");
        }
    }

    #[test]
    fn climbing_zero_simple_cases() {
        let fp = stabilize(p(2), 23, Strategy::Leftmost).unwrap();
        let (next, av) = leftmost_avalanche(&fp).unwrap();
        let r = climbing_zero_check(&fp, &next, &av);
        assert!(!r.violation);
        assert!(r.untouched_tail_ok);
    }

    #[test]
    fn fit_constant_field() {
        let pts: Vec<(u64, f64)> = (4..=17).map(|e| (1u64 << e, 3.0)).collect();
        let fit = log_fit_points(&pts).unwrap();
        assert!(fit.c.abs() < 1e-12);
        assert!((fit.d - 3.0).abs() < 1e-12);
        assert!((fit.max_ratio - 0.75).abs() < 1e-12);
        assert_eq!(fit.max_ratio_at, 16);
        assert!(log_fit_points(&pts[..5]).is_err());
        let narrow: Vec<(u64, f64)> = (100..120).map(|n| (n, 1.0)).collect();
        assert!(matches!(log_fit_points(&narrow), Err(AnalyzerError::InsufficientData { .. })));
    }

    #[test]
    fn fit_exact_line() {
        let pts: Vec<(u64, f64)> = (1..=20).map(|e| (1u64 << e, 2.0 * e as f64 + 1.0)).collect();
        let fit = log_fit_points(&pts).unwrap();
        assert!((fit.c - 2.0).abs() < 1e-12 && (fit.d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gate() {
        let flat: Vec<(u64, f64)> = (1..=1000).map(|n| (n * 100, ((n * 100) as f64).log2())).collect();
        assert!(regression_gate(&flat).unwrap().passed);
        let growing: Vec<(u64, f64)> = (1..=1000).map(|n| (n * 100, (n * 100) as f64)).collect();
        assert!(!regression_gate(&growing).unwrap().passed);
    }

    #[test]
    fn samples_contract() {
        let c = |n_max, stride| ScanConfig { p: p(2), n_max, stride, incremental: false, timings: false };
        assert_eq!(c(10, 3).samples().unwrap(), vec![3, 6, 9]);
        assert!(matches!(c(5, 6).samples(), Err(AnalyzerError::EmptySelection { .. })));
        assert!(c(5, 0).samples().is_err());
    }

    #[test]
    fn incremental_and_direct_scans_agree() {
        let mk = |incremental| ScanConfig { p: p(3), n_max: 300, stride: 7, incremental, timings: false };
        let d = scan(&mk(false)).unwrap();
        let i = scan(&mk(true)).unwrap();
        assert_eq!(d.rows.len(), i.rows.len());
        for (a, b) in d.rows.iter().zip(&i.rows) {
            assert_eq!((a.n, a.w, a.n_strict, a.n_loose, a.uniform_index), (b.n, b.w, b.n_strict, b.n_loose, b.uniform_index));
            assert!(a.invariants_ok() && b.invariants_ok(), "{a:?} {b:?}");
        }
        assert_eq!(i.repeated_firings, Some(0));
    }
}
