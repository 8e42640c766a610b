//! Quasi-linear dynamics of the shot vector of a fixed point.
//!
//! For a fixed point with shot vector `(a_i)` and slopes `(b_i)`,
//! `b_i = a_{i-p} - (p+1) a_i + p a_{i+1}` with a virtual column `a_{-p} = N`.
//! Read left to right this is a recurrence on the window
//! `X_i = (a_{i-p}, …, a_i)`; its consecutive differences
//! `Y_i = (a_{i-p+1}-a_{i-p}, …, a_i-a_{i-1})` evolve by shifting up and
//! appending `mean(Y_i) + b_i/p`. Integrality of the appended entry almost
//! pins `b_i`: only a residue of zero leaves the choice `{0, p}` open.
//!
//! All arithmetic here is exact.

use num_rational::Rational64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Params, SlopeConfig};
use crate::stabilizer::FixedPoint;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DdsError {
    #[error("slope {slope} does not yield an integral successor at position {position}")]
    NonIntegral { position: usize, slope: i64 },
    #[error("reconstruction passed position {bound} without reaching a zero window")]
    Divergence { bound: usize },
    #[error("negative shot value {value} at column {column}")]
    NegativeShot { column: usize, value: i64 },
    #[error("resolver returned slope {slope} at ambiguous column {column}; expected 0 or p")]
    InvalidResolution { column: usize, slope: i64 },
    #[error("slope {slope} at offset {position} contradicts the wave automaton")]
    Mismatch { position: usize, slope: i64 },
    #[error("window has {got} entries, expected {expected}")]
    Dimension { got: usize, expected: usize },
}

/// Outcome of inferring `b_i` from integrality alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SlopeDetermination {
    Determined(i64),
    /// `b_i ∈ {0, p}`.
    Ambiguous,
}

impl SlopeDetermination {
    /// Whether the slope `b` is compatible with this determination.
    pub fn admits(self, params: Params, b: i64) -> bool {
        match self {
            SlopeDetermination::Determined(d) => d == b,
            SlopeDetermination::Ambiguous => b == 0 || b == params.p_i64(),
        }
    }
}

/// `b_i = a_{i-p} - (p+1) a_i + p a_{i+1}`.
pub fn slope_from_shots(params: Params, a_im_p: i64, a_i: i64, a_ip1: i64) -> i64 {
    let p = params.p_i64();
    a_im_p - (p + 1) * a_i + p * a_ip1
}

/// `a_{i+1} = (-a_{i-p} + (p+1) a_i + b_i) / p`, exact.
pub fn next_shot(params: Params, a_im_p: i64, a_i: i64, b_i: i64) -> Result<i64, DdsError> {
    let p = params.p_i64();
    let num = -a_im_p + (p + 1) * a_i + b_i;
    if num.rem_euclid(p) != 0 {
        return Err(DdsError::NonIntegral { position: 0, slope: b_i });
    }
    Ok(num / p)
}

/// Infers `b_i` from `a_{i-p}` and `a_i` through the mod-p constraint.
pub fn determine_slope(params: Params, a_im_p: i64, a_i: i64) -> SlopeDetermination {
    let p = params.p_i64();
    let residue = (-a_im_p + (p + 1) * a_i).rem_euclid(p);
    if residue == 0 {
        SlopeDetermination::Ambiguous
    } else {
        SlopeDetermination::Determined(p - residue)
    }
}

/// `X_i = (a_{i-p}, …, a_i)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotWindow {
    pub position: usize,
    pub entries: Vec<i64>,
}

impl ShotWindow {
    /// `X_0 = (N, 0, …, 0, a_0)`.
    pub fn initial(params: Params, n: u64, a0: i64) -> Self {
        let mut entries = vec![0; params.p_usize() + 1];
        entries[0] = n as i64;
        *entries.last_mut().unwrap() += a0;
        ShotWindow { position: 0, entries }
    }

    /// Window at column `i` read off a fixed point's shot vector.
    pub fn from_fixed_point(fp: &FixedPoint, i: usize) -> Self {
        let p = fp.p.p_i64();
        let entries = (0..=p).map(|k| fp.shot_at(i as i64 - p + k)).collect();
        ShotWindow { position: i, entries }
    }

    pub fn first(&self) -> i64 {
        self.entries[0]
    }

    pub fn last(&self) -> i64 {
        *self.entries.last().unwrap()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&a| a == 0)
    }

    pub fn is_uniform(&self) -> bool {
        self.entries.windows(2).all(|w| w[0] == w[1])
    }
}

/// `X_{i+1} = A X_i + (b_i/p) J`, computed as shift-and-append.
pub fn x_step(params: Params, x: &ShotWindow, b_i: i64) -> Result<ShotWindow, DdsError> {
    check_len(x.entries.len(), params.p_usize() + 1)?;
    let next = next_shot(params, x.first(), x.last(), b_i)
        .map_err(|_| DdsError::NonIntegral { position: x.position, slope: b_i })?;
    let mut entries = Vec::with_capacity(x.entries.len());
    entries.extend_from_slice(&x.entries[1..]);
    entries.push(next);
    Ok(ShotWindow { position: x.position + 1, entries })
}

/// `Y_i`: consecutive differences of a shot window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AveragingVector {
    pub position: usize,
    pub entries: Vec<i64>,
}

impl AveragingVector {
    pub fn uniform(params: Params, alpha: i64, position: usize) -> Self {
        AveragingVector { position, entries: vec![alpha; params.p_usize()] }
    }

    pub fn sum(&self) -> i64 {
        self.entries.iter().sum()
    }

    pub fn is_uniform(&self) -> bool {
        self.entries.windows(2).all(|w| w[0] == w[1])
    }

    pub fn stats(&self) -> MeanStats {
        MeanStats::of(self)
    }
}

/// `Y_i = P B'^{-1} X_i`.
pub fn to_averaging(x: &ShotWindow) -> AveragingVector {
    AveragingVector {
        position: x.position,
        entries: x.entries.windows(2).map(|w| w[1] - w[0]).collect(),
    }
}

/// `Y_{i+1} = M Y_i + (b_i/p) K`: shift up, append `mean(Y_i) + b_i/p`.
pub fn y_step(params: Params, y: &AveragingVector, b_i: i64) -> Result<AveragingVector, DdsError> {
    check_len(y.entries.len(), params.p_usize())?;
    let p = params.p_i64();
    let num = y.sum() + b_i;
    if num.rem_euclid(p) != 0 {
        return Err(DdsError::NonIntegral { position: y.position, slope: b_i });
    }
    let mut entries = Vec::with_capacity(y.entries.len());
    entries.extend_from_slice(&y.entries[1..]);
    entries.push(num / p);
    Ok(AveragingVector { position: y.position + 1, entries })
}

/// Infers `b_i = p(⌈m_i⌉ - m_i)` from the mean of `Y_i`; ambiguous when the mean is integral.
pub fn determine_slope_from_mean(params: Params, y: &AveragingVector) -> SlopeDetermination {
    let p = params.p_i64();
    let mean = Rational64::new(y.sum(), p);
    if mean.is_integer() {
        SlopeDetermination::Ambiguous
    } else {
        let b = (mean.ceil() - mean) * Rational64::from_integer(p);
        SlopeDetermination::Determined(b.to_integer())
    }
}

/// Mean, maximum and minimum of the entries of `Y_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeanStats {
    pub mean: Rational64,
    pub max: i64,
    pub min: i64,
}

impl MeanStats {
    pub fn of(y: &AveragingVector) -> Self {
        let max = y.entries.iter().copied().max().unwrap_or(0);
        let min = y.entries.iter().copied().min().unwrap_or(0);
        let len = y.entries.len().max(1) as i64;
        MeanStats { mean: Rational64::new(y.sum(), len), max, min }
    }

    pub fn spread(&self) -> i64 {
        self.max - self.min
    }
}

/// First index whose vector is uniform.
pub fn uniform_index(trajectory: &[AveragingVector]) -> Option<usize> {
    trajectory.iter().position(AveragingVector::is_uniform)
}

/// Token of the wave grammar over slope sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WaveToken {
    /// `p, p-1, …, 1`
    Wave,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WaveUnfoldReport {
    pub alpha_start: i64,
    pub alpha_end: i64,
    pub tokens: Vec<WaveToken>,
}

/// Replays a slope tail through the averaging system started at the uniform
/// vector `(α, …, α)`.
///
/// From a uniform vector the only admissible slopes are `0` (stay at `α`) and
/// `p`, after which the slopes are forced to `p-1, …, 1` and the vector is
/// uniform again at `α+1`. The tail is followed by `0^ω`, so it must end in a
/// uniform state.
pub fn wave_unfold(
    params: Params,
    alpha: i64,
    tail: &[i64],
) -> Result<WaveUnfoldReport, DdsError> {
    let p = params.p_i64();
    let mut y = AveragingVector::uniform(params, alpha, 0);
    let mut tokens = Vec::new();
    for (offset, &b) in tail.iter().enumerate() {
        let det = determine_slope_from_mean(params, &y);
        let at_uniform = y.is_uniform();
        if !det.admits(params, b) {
            return Err(DdsError::Mismatch { position: offset, slope: b });
        }
        if at_uniform {
            tokens.push(if b == 0 { WaveToken::Zero } else { WaveToken::Wave });
        } else if b % p == 0 {
            // Only reachable if a determination inside a wave came out as 0 or p.
            return Err(DdsError::Mismatch { position: offset, slope: b });
        }
        y = y_step(params, &y, b)
            .map_err(|_| DdsError::Mismatch { position: offset, slope: b })?;
    }
    if !y.is_uniform() {
        return Err(DdsError::Mismatch { position: tail.len(), slope: 0 });
    }
    Ok(WaveUnfoldReport { alpha_start: alpha, alpha_end: y.entries[0], tokens })
}

/// Supplies `b_i` at columns where integrality leaves `{0, p}` open.
pub trait AmbiguityResolver {
    fn resolve(&mut self, column: usize, window: &ShotWindow) -> i64;

    /// Whether results produced with this resolver describe the true fixed point.
    fn authoritative(&self) -> bool {
        true
    }
}

/// Reads the answer off known slopes.
pub struct GroundTruth<'a>(pub &'a SlopeConfig);

impl AmbiguityResolver for GroundTruth<'_> {
    fn resolve(&mut self, column: usize, _window: &ShotWindow) -> i64 {
        self.0.get(column)
    }
}

/// Always picks 0. Output is not authoritative.
pub struct AssumeZero;

impl AmbiguityResolver for AssumeZero {
    fn resolve(&mut self, _column: usize, _window: &ShotWindow) -> i64 {
        0
    }

    fn authoritative(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reconstruction {
    pub slopes: SlopeConfig,
    pub shot: Vec<i64>,
    /// Columns where the resolver was consulted.
    pub ambiguous: Vec<usize>,
    pub authoritative: bool,
}

/// Position past which a reconstruction is declared divergent.
pub fn reconstruction_bound(params: Params, n: u64) -> usize {
    let p = params.p() as f64;
    ((p + 1.0) * (n as f64).sqrt()).ceil() as usize + 2 * params.p_usize() + 2
}

/// Unrolls the orbit of `X_0 = (N, 0, …, 0, a_0)` until the window vanishes,
/// inferring each slope and asking `resolver` at ambiguous columns.
pub fn reconstruct_fixed_point(
    params: Params,
    n: u64,
    a0: i64,
    resolver: &mut dyn AmbiguityResolver,
) -> Result<Reconstruction, DdsError> {
    let p = params.p_i64();
    let bound = reconstruction_bound(params, n);
    if a0 < 0 {
        return Err(DdsError::NegativeShot { column: 0, value: a0 });
    }
    let mut x = ShotWindow::initial(params, n, a0);
    let mut shot = vec![a0];
    let mut slopes = Vec::new();
    let mut ambiguous = Vec::new();
    while !x.is_zero() {
        let i = x.position;
        if i > bound {
            return Err(DdsError::Divergence { bound });
        }
        let b = match determine_slope(params, x.first(), x.last()) {
            SlopeDetermination::Determined(b) => b,
            SlopeDetermination::Ambiguous => {
                ambiguous.push(i);
                let b = resolver.resolve(i, &x);
                if b != 0 && b != p {
                    return Err(DdsError::InvalidResolution { column: i, slope: b });
                }
                b
            }
        };
        x = x_step(params, &x, b)?;
        if x.last() < 0 {
            return Err(DdsError::NegativeShot { column: x.position, value: x.last() });
        }
        shot.push(x.last());
        slopes.push(b);
    }
    crate::model::trim_zeros(&mut shot);
    Ok(Reconstruction {
        slopes: SlopeConfig::from_trusted(slopes),
        shot,
        ambiguous,
        authoritative: resolver.authoritative(),
    })
}

/// One step of the averaging trajectory of a fixed point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrajectoryStep {
    pub y: AveragingVector,
    pub slope: i64,
    pub stats: MeanStats,
}

/// `Y_0, Y_1, …` of a fixed point, driven by its true slopes, until past the
/// support where the vector is zero.
#[derive(Debug, Clone)]
pub struct AveragingTrajectory {
    pub params: Params,
    pub steps: Vec<TrajectoryStep>,
}

impl AveragingTrajectory {
    pub fn from_fixed_point(fp: &FixedPoint) -> Result<Self, DdsError> {
        let params = fp.p;
        let end = fp.slopes.support().max(fp.shot.len()) + params.p_usize();
        let mut y = to_averaging(&ShotWindow::initial(params, fp.n, fp.shot_at(0)));
        let mut steps = Vec::with_capacity(end + 1);
        for i in 0..=end {
            let slope = fp.slopes.get(i);
            let next = if i < end { Some(y_step(params, &y, slope)?) } else { None };
            let stats = y.stats();
            steps.push(TrajectoryStep { y, slope, stats });
            match next {
                Some(n) => y = n,
                None => break,
            }
        }
        Ok(AveragingTrajectory { params, steps })
    }

    pub fn vectors(&self) -> Vec<AveragingVector> {
        self.steps.iter().map(|s| s.y.clone()).collect()
    }

    pub fn uniform_index(&self) -> Option<usize> {
        self.steps.iter().position(|s| s.y.is_uniform())
    }
}

/// Results of checking the structural invariants of an averaging trajectory
/// against its fixed point. Violation lists hold column indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectoryAudit {
    pub steps: usize,
    pub uniform_index: Option<usize>,
    /// Value of the first uniform vector.
    pub alpha: Option<i64>,
    pub ambiguous_before_uniform: usize,
    pub ambiguous_total: usize,
    pub commutation_violations: Vec<usize>,
    pub sandwich_violations: Vec<usize>,
    pub new_entry_violations: Vec<usize>,
    pub determination_violations: Vec<usize>,
}

impl TrajectoryAudit {
    pub fn passed(&self) -> bool {
        self.commutation_violations.is_empty()
            && self.sandwich_violations.is_empty()
            && self.new_entry_violations.is_empty()
            && self.determination_violations.is_empty()
            && self.uniform_index.is_some()
    }
}

/// Checks, along the trajectory of `fp`:
/// the shot-window and averaging steps commute through the difference map;
/// at non-uniform steps the min/max sandwich holds, the appended entry lies
/// in `(min, max]`, and the spread strictly drops within `p` steps;
/// both slope inferences agree with each other and with the true slope.
pub fn audit_trajectory(fp: &FixedPoint) -> Result<TrajectoryAudit, DdsError> {
    let params = fp.p;
    let p = params.p_usize();
    let traj = AveragingTrajectory::from_fixed_point(fp)?;
    let uniform = traj.uniform_index();
    let mut audit = TrajectoryAudit {
        steps: traj.steps.len(),
        uniform_index: uniform,
        alpha: uniform.map(|u| traj.steps[u].y.entries[0]),
        ..Default::default()
    };

    for (i, step) in traj.steps.iter().enumerate() {
        let x = ShotWindow::from_fixed_point(fp, i);
        if to_averaging(&x) != step.y {
            audit.commutation_violations.push(i);
        } else if i + 1 < traj.steps.len() {
            let via_x = x_step(params, &x, step.slope).map(|x1| to_averaging(&x1));
            let via_y = y_step(params, &step.y, step.slope);
            if via_x.is_err() || via_x != via_y {
                audit.commutation_violations.push(i);
            }
        }

        let from_shots = determine_slope(params, x.first(), x.last());
        let from_mean = determine_slope_from_mean(params, &step.y);
        if from_shots != from_mean || !from_shots.admits(params, step.slope) {
            audit.determination_violations.push(i);
        }
        if from_shots == SlopeDetermination::Ambiguous {
            audit.ambiguous_total += 1;
            if uniform.is_some_and(|u| i < u) {
                audit.ambiguous_before_uniform += 1;
            }
        }

        let stats = step.stats;
        if stats.spread() == 0 {
            continue;
        }
        if let Some(next) = traj.steps.get(i + 1) {
            let appended = *next.y.entries.last().unwrap();
            if !(stats.min < appended && appended <= stats.max) {
                audit.new_entry_violations.push(i);
            }
            let ns = next.stats;
            if !(stats.min <= ns.min && ns.min <= ns.max && ns.max <= stats.max) {
                audit.sandwich_violations.push(i);
            }
            let drops = (1..=p)
                .filter_map(|c| traj.steps.get(i + c))
                .any(|later| later.stats.spread() < stats.spread());
            if !drops {
                audit.sandwich_violations.push(i);
            }
        }
    }
    audit.sandwich_violations.dedup();
    Ok(audit)
}

fn check_len(got: usize, expected: usize) -> Result<(), DdsError> {
    if got != expected {
        Err(DdsError::Dimension { got, expected })
    } else {
        Ok(())
    }
}

/// Mean of `Y` as an exact rational; zero for the empty vector.
pub fn mean(y: &AveragingVector) -> Rational64 {
    if y.entries.is_empty() {
        Rational64::zero()
    } else {
        Rational64::new(y.sum(), y.entries.len() as i64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stabilizer::{stabilize, Strategy};

    fn p(p: u32) -> Params {
        Params::new(p).unwrap()
    }

    fn av(v: &[i64]) -> AveragingVector {
        AveragingVector { position: 0, entries: v.to_vec() }
    }

    #[test]
    fn worked_shot_example() {
        assert_eq!(slope_from_shots(p(4), 189, 120, 103), 1);
        assert_eq!(determine_slope(p(4), 189, 120), SlopeDetermination::Determined(1));
        assert_eq!(next_shot(p(4), 189, 120, 1), Ok(103));
        assert!(matches!(next_shot(p(4), 189, 120, 2), Err(DdsError::NonIntegral { .. })));
    }

    #[test]
    fn ambiguous_residue() {
        assert_eq!(determine_slope(p(2), 0, 0), SlopeDetermination::Ambiguous);
        assert_eq!(determine_slope(p(1), 17, 4), SlopeDetermination::Ambiguous);
    }

    #[test]
    fn column_zero_uses_virtual_column() {
        let fp = stabilize(p(3), 40, Strategy::Leftmost).unwrap();
        let b0 = slope_from_shots(p(3), 40, fp.shot_at(0), fp.shot_at(1));
        assert_eq!(b0, fp.slopes.get(0));
    }

    #[test]
    fn pi_24_slopes_from_shot_vector() {
        let shot = [8i64, 1, 2];
        let a = |i: i64| if i == -2 { 24 } else if i < 0 { 0 } else { *shot.get(i as usize).unwrap_or(&0) };
        let slopes: Vec<i64> = (0..6).map(|i| slope_from_shots(p(2), a(i - 2), a(i), a(i + 1))).collect();
        assert_eq!(slopes, vec![2, 1, 2, 1, 2, 0]);
    }

    #[test]
    fn x_chain_for_pi_24() {
        let mut x = ShotWindow::initial(p(2), 24, 8);
        assert_eq!(x.entries, vec![24, 0, 8]);
        let mut shots = vec![x.last()];
        for b in [2, 1, 2, 1, 2, 0, 0] {
            let next = x_step(p(2), &x, b).unwrap();
            assert_eq!(slope_from_shots(p(2), x.first(), x.last(), next.last()), b);
            x = next;
            shots.push(x.last());
        }
        assert_eq!(&shots[..4], &[8, 1, 2, 0]);
        assert!(x.is_zero());
        let zero = ShotWindow { position: 3, entries: vec![0; 3] };
        assert!(x_step(p(2), &zero, 0).unwrap().is_zero());
    }

    #[test]
    fn x_step_inverts_slope_formula() {
        let x = ShotWindow { position: 4, entries: vec![189, 118, 124, 126, 120] };
        let next = x_step(p(4), &x, 1).unwrap();
        assert_eq!(slope_from_shots(p(4), x.first(), x.last(), next.last()), 1);
    }

    #[test]
    fn averaging_initialization() {
        let x = ShotWindow::initial(p(2), 24, 8);
        assert_eq!(to_averaging(&x).entries, vec![-24, 8]);
        let uniform = ShotWindow { position: 0, entries: vec![7; 5] };
        assert_eq!(to_averaging(&uniform).entries, vec![0; 4]);
    }

    #[test]
    fn averaging_micro_example() {
        let y13 = av(&[-3, -5, -7, -7]);
        assert_eq!(determine_slope_from_mean(p(4), &y13), SlopeDetermination::Determined(2));
        assert_eq!(y_step(p(4), &y13, 2).unwrap().entries, vec![-5, -7, -7, -5]);
        assert!(y_step(p(4), &y13, 1).is_err());
    }

    #[test]
    fn uniform_steps() {
        let y = av(&[-4, -4, -4, -4]);
        assert_eq!(y_step(p(4), &y, 0).unwrap().entries, vec![-4; 4]);
        assert_eq!(y_step(p(4), &y, 4).unwrap().entries, vec![-4, -4, -4, -3]);
        assert_eq!(determine_slope_from_mean(p(4), &y), SlopeDetermination::Ambiguous);
    }

    #[test]
    fn wave_unfold_examples() {
        let report = wave_unfold(p(4), -2, &[4, 3, 2, 1, 0, 4, 3, 2, 1]).unwrap();
        assert_eq!(report.tokens, vec![WaveToken::Wave, WaveToken::Zero, WaveToken::Wave]);
        assert_eq!(report.alpha_end, 0);
        assert_eq!(
            wave_unfold(p(4), -2, &[4, 3, 3]),
            Err(DdsError::Mismatch { position: 2, slope: 3 })
        );
        assert_eq!(
            wave_unfold(p(4), -2, &[4, 3]),
            Err(DdsError::Mismatch { position: 2, slope: 0 })
        );
        assert!(wave_unfold(p(3), 0, &[2]).is_err());
    }

    #[test]
    fn reconstruct_pi_24() {
        let truth = SlopeConfig::new(vec![2, 1, 2, 1, 2]).unwrap();
        let r = reconstruct_fixed_point(p(2), 24, 8, &mut GroundTruth(&truth)).unwrap();
        assert_eq!(r.slopes, truth);
        assert_eq!(r.shot, vec![8, 1, 2]);
        assert!(r.authoritative);
        let guess = reconstruct_fixed_point(p(2), 24, 8, &mut AssumeZero);
        if let Ok(g) = guess {
            assert!(!g.authoritative);
        }
    }

    #[test]
    fn reconstruct_rejects_bad_inputs() {
        let truth = SlopeConfig::new(vec![2, 1, 2, 1, 2]).unwrap();
        assert!(matches!(
            reconstruct_fixed_point(p(2), 24, -1, &mut GroundTruth(&truth)),
            Err(DdsError::NegativeShot { .. })
        ));
        let wrong = SlopeConfig::new(vec![1]).unwrap();
        assert!(matches!(
            reconstruct_fixed_point(p(2), 24, 8, &mut GroundTruth(&wrong)),
            Err(DdsError::InvalidResolution { column: 0, slope: 1 })
        ));
        assert!(reconstruct_fixed_point(p(2), 24, 9, &mut GroundTruth(&truth)).is_err());
    }

    #[test]
    fn reconstruct_matches_stabilizer() {
        for (pp, n) in [(3u32, 500u64), (1, 77), (5, 333), (2, 1), (4, 0)] {
            let fp = stabilize(p(pp), n, Strategy::Leftmost).unwrap();
            let r = reconstruct_fixed_point(p(pp), n, fp.shot_at(0), &mut GroundTruth(&fp.slopes))
                .unwrap();
            assert_eq!(r.slopes, fp.slopes, "p={pp} n={n}");
            assert_eq!(r.shot, fp.shot);
        }
    }

    #[test]
    fn audit_pi_2000() {
        let fp = stabilize(p(4), 2000, Strategy::Leftmost).unwrap();
        let audit = audit_trajectory(&fp).unwrap();
        assert!(audit.passed(), "{audit:?}");
        assert!(audit.uniform_index.unwrap() <= 20);
        assert!(audit.alpha.unwrap() < 0);
        let y = AveragingTrajectory::from_fixed_point(&fp).unwrap();
        assert_eq!(y.steps[13].y.entries, vec![-3, -5, -7, -7]);
        assert_eq!(y.steps[14].y.entries, vec![-5, -7, -7, -5]);
        assert_eq!(y.steps[0].stats.spread(), 2000 + fp.shot_at(0));
    }

    #[test]
    fn p1_is_immediately_uniform() {
        for n in [1u64, 10, 300] {
            let fp = stabilize(p(1), n, Strategy::Leftmost).unwrap();
            let traj = AveragingTrajectory::from_fixed_point(&fp).unwrap();
            assert_eq!(uniform_index(&traj.vectors()), Some(0));
        }
    }

    #[test]
    fn mean_stats_ordering() {
        let s = av(&[-3, -5, -7, -7]).stats();
        assert_eq!(s.mean, Rational64::new(-11, 2));
        assert!(Rational64::from_integer(s.min) <= s.mean && s.mean <= Rational64::from_integer(s.max));
        assert_eq!(mean(&av(&[])), Rational64::zero());
    }
}
