//! Fixed-point computation by repeated firing.
//!
//! Three strategies reach `π(N)` from `(N, 0^ω)`: always firing the leftmost
//! unstable column, firing a uniformly random unstable column, or the
//! hourglass construction that adds grains one at a time and records the
//! leftmost avalanche triggered by each grain.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{apply_firing, capacity_hint, check_grains, ModelError, Params, SlopeConfig};

/// PRNG used by [`Strategy::Random`], identified in output metadata.
pub const RANDOM_ALGORITHM: &str = "ChaCha8Rng::seed_from_u64";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Strategy {
    Leftmost,
    Random { seed: u64 },
    Incremental,
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Leftmost => "leftmost",
            Strategy::Random { .. } => "random",
            Strategy::Incremental => "incremental",
        }
    }
}

/// A stabilized configuration of `N` grains together with its shot vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub p: Params,
    pub n: u64,
    pub slopes: SlopeConfig,
    /// `a_i`: number of firings of column `i`, trailing zeros trimmed.
    pub shot: Vec<i64>,
    pub strategy: Strategy,
}

impl FixedPoint {
    /// `a_i` with the virtual column convention `a_{-p} = N`, `a_j = 0` for `-p < j < 0`.
    pub fn shot_at(&self, i: i64) -> i64 {
        let p = self.p.p_i64();
        if i == -p {
            self.n as i64
        } else if i < 0 {
            0
        } else {
            self.shot.get(i as usize).copied().unwrap_or(0)
        }
    }

    /// Checks `b_i = a_{i-p} - (p+1) a_i + p a_{i+1}` at every column up to
    /// past both supports. Returns the first offending column.
    pub fn check_shot_consistency(&self) -> Result<(), usize> {
        let p = self.p.p_i64();
        let end = self.slopes.support().max(self.shot.len()) + self.p.p_usize() + 1;
        for i in 0..end {
            let ii = i as i64;
            let b = self.shot_at(ii - p) - (p + 1) * self.shot_at(ii) + p * self.shot_at(ii + 1);
            if b != self.slopes.get(i) {
                return Err(i);
            }
        }
        Ok(())
    }
}

/// Columns fired while stabilizing `π(k-1)^{↓0}` into `π(k)` with the leftmost strategy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Avalanche {
    pub k: u64,
    /// Firing order.
    pub order: Vec<usize>,
    /// The same columns sorted; duplicates kept so that they can be detected.
    pub fired: Vec<usize>,
    pub density_column: usize,
    pub max_fired: Option<usize>,
}

impl Avalanche {
    pub fn from_order(k: u64, order: Vec<usize>) -> Self {
        let mut fired = order.clone();
        fired.sort_unstable();
        let density_column = density_column(&fired);
        let max_fired = fired.last().copied();
        Avalanche { k, order, fired, density_column, max_fired }
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// No column fired twice.
    pub fn is_single_firing(&self) -> bool {
        self.fired.windows(2).all(|w| w[0] < w[1])
    }

    /// Holes: columns `i` not fired with `i+1` fired.
    pub fn holes(&self) -> Vec<usize> {
        let mut holes = Vec::new();
        for w in self.fired.windows(2) {
            if w[1] > w[0] + 1 {
                holes.push(w[1] - 1);
            }
        }
        if let Some(&first) = self.fired.first() {
            if first > 0 {
                holes.insert(0, first - 1);
            }
        }
        holes
    }
}

/// `L'(p,k)`: the minimal `l` such that the fired columns at or beyond `l`
/// form exactly the interval `[l, max fired]`. This is the first column of
/// the trailing contiguous block. Zero for an empty avalanche.
///
/// `fired` must be sorted.
pub fn density_column(fired: &[usize]) -> usize {
    let Some(&last) = fired.last() else {
        return 0;
    };
    let mut start = last;
    for &c in fired.iter().rev().skip(1) {
        if c + 1 == start {
            start = c;
        } else if c != start {
            break;
        }
    }
    start
}

/// Mutable single-owner sandpile state with its shot vector.
#[derive(Debug, Clone)]
pub struct Pile {
    params: Params,
    grains: u64,
    slopes: Vec<i64>,
    shot: Vec<i64>,
}

impl Pile {
    pub fn tower(params: Params, n: u64) -> Result<Self, ModelError> {
        let n = check_grains(n)?;
        let cap = capacity_hint(params, n);
        let mut slopes = Vec::with_capacity(cap);
        slopes.push(n as i64);
        Ok(Pile { params, grains: n, slopes, shot: Vec::with_capacity(cap) })
    }

    pub fn from_fixed_point(fp: &FixedPoint) -> Self {
        Pile {
            params: fp.p,
            grains: fp.n,
            slopes: fp.slopes.as_slice().to_vec(),
            shot: fp.shot.clone(),
        }
    }

    pub fn params(&self) -> Params {
        self.params
    }

    pub fn grains(&self) -> u64 {
        self.grains
    }

    /// Current slopes; may carry trailing zeros.
    pub fn slopes(&self) -> &[i64] {
        &self.slopes
    }

    pub fn shot(&self) -> &[i64] {
        &self.shot
    }

    #[inline]
    fn unstable(&self, i: usize) -> bool {
        self.slopes.get(i).is_some_and(|&b| b > self.params.p_i64())
    }

    #[inline]
    fn fire(&mut self, i: usize) {
        apply_firing(&mut self.slopes, self.params, i);
        if self.shot.len() <= i {
            self.shot.resize(i + 1, 0);
        }
        self.shot[i] += 1;
    }

    fn add_grain(&mut self) -> Result<(), ModelError> {
        self.grains = check_grains(self.grains + 1)?;
        if self.slopes.is_empty() {
            self.slopes.push(0);
        }
        self.slopes[0] += 1;
        Ok(())
    }

    /// Fires the leftmost unstable column until stable. `observer` sees the
    /// fired column and the slopes right after each firing.
    pub fn run_leftmost<F: FnMut(usize, &[i64])>(&mut self, mut observer: F) -> u64 {
        let mut work: BTreeSet<usize> =
            (0..self.slopes.len()).filter(|&i| self.unstable(i)).collect();
        let p = self.params.p_usize();
        let mut count = 0;
        while let Some(i) = work.pop_first() {
            if !self.unstable(i) {
                continue;
            }
            self.fire(i);
            count += 1;
            observer(i, &self.slopes);
            if i > 0 && self.unstable(i - 1) {
                work.insert(i - 1);
            }
            if self.unstable(i) {
                work.insert(i);
            }
            if self.unstable(i + p) {
                work.insert(i + p);
            }
        }
        count
    }

    /// Fires uniformly random unstable columns until stable.
    pub fn run_random<F: FnMut(usize, &[i64])>(&mut self, seed: u64, mut observer: F) -> u64 {
        const ABSENT: usize = usize::MAX;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut active: Vec<usize> = Vec::new();
        let mut slot: Vec<usize> = Vec::new();
        let p = self.params.p_usize();

        fn sync(pile: &Pile, i: usize, active: &mut Vec<usize>, slot: &mut Vec<usize>) {
            if slot.len() <= i {
                slot.resize(i + 1, ABSENT);
            }
            let should = pile.unstable(i);
            let present = slot[i] != ABSENT;
            if should && !present {
                slot[i] = active.len();
                active.push(i);
            } else if !should && present {
                let at = slot[i];
                active.swap_remove(at);
                if at < active.len() {
                    slot[active[at]] = at;
                }
                slot[i] = ABSENT;
            }
        }

        for i in 0..self.slopes.len() {
            sync(self, i, &mut active, &mut slot);
        }
        let mut count = 0;
        while !active.is_empty() {
            let i = active[rng.random_range(0..active.len())];
            self.fire(i);
            count += 1;
            observer(i, &self.slopes);
            if i > 0 {
                sync(self, i - 1, &mut active, &mut slot);
            }
            sync(self, i, &mut active, &mut slot);
            sync(self, i + p, &mut active, &mut slot);
        }
        count
    }

    pub fn is_stable(&self) -> bool {
        self.slopes.iter().all(|&b| b <= self.params.p_i64())
    }

    pub fn to_fixed_point(&self, strategy: Strategy) -> FixedPoint {
        debug_assert!(self.is_stable());
        let mut shot = self.shot.clone();
        crate::model::trim_zeros(&mut shot);
        FixedPoint {
            p: self.params,
            n: self.grains,
            slopes: SlopeConfig::from_trusted(self.slopes.clone()),
            shot,
            strategy,
        }
    }
}

/// Stabilizes `(n, 0^ω)`.
pub fn stabilize(params: Params, n: u64, strategy: Strategy) -> Result<FixedPoint, ModelError> {
    stabilize_observed(params, n, strategy, |_, _| {})
}

/// Like [`stabilize`], reporting every firing to `observer`. The incremental
/// strategy reports the firings of all avalanches in sequence.
pub fn stabilize_observed<F: FnMut(usize, &[i64])>(
    params: Params,
    n: u64,
    strategy: Strategy,
    mut observer: F,
) -> Result<FixedPoint, ModelError> {
    match strategy {
        Strategy::Leftmost => {
            let mut pile = Pile::tower(params, n)?;
            pile.run_leftmost(observer);
            Ok(pile.to_fixed_point(strategy))
        }
        Strategy::Random { seed } => {
            let mut pile = Pile::tower(params, n)?;
            pile.run_random(seed, observer);
            Ok(pile.to_fixed_point(strategy))
        }
        Strategy::Incremental => {
            check_grains(n)?;
            let mut glass = Hourglass::new(params);
            for _ in 0..n {
                glass.pile.add_grain()?;
                glass.k += 1;
                glass.pile.run_leftmost(&mut observer);
            }
            Ok(glass.fixed_point())
        }
    }
}

/// Builds `π(1), π(2), …` one grain at a time.
#[derive(Debug, Clone)]
pub struct Hourglass {
    pile: Pile,
    k: u64,
}

impl Hourglass {
    pub fn new(params: Params) -> Self {
        Hourglass {
            pile: Pile { params, grains: 0, slopes: Vec::new(), shot: Vec::new() },
            k: 0,
        }
    }

    pub fn from_fixed_point(fp: &FixedPoint) -> Self {
        Hourglass { pile: Pile::from_fixed_point(fp), k: fp.n }
    }

    /// Number of grains added so far.
    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn pile(&self) -> &Pile {
        &self.pile
    }

    /// Adds one grain on column 0 and stabilizes leftmost, returning the avalanche.
    pub fn step(&mut self) -> Result<Avalanche, ModelError> {
        self.pile.add_grain()?;
        self.k += 1;
        let mut order = Vec::new();
        self.pile.run_leftmost(|i, _| order.push(i));
        Ok(Avalanche::from_order(self.k, order))
    }

    pub fn fixed_point(&self) -> FixedPoint {
        self.pile.to_fixed_point(Strategy::Incremental)
    }
}

/// Hourglass stabilization returning every avalanche `s^1..s^n`.
pub fn stabilize_incremental(
    params: Params,
    n: u64,
) -> Result<(FixedPoint, Vec<Avalanche>), ModelError> {
    check_grains(n)?;
    let mut glass = Hourglass::new(params);
    let mut avalanches = Vec::with_capacity(n.min(1 << 20) as usize);
    for _ in 0..n {
        avalanches.push(glass.step()?);
    }
    Ok((glass.fixed_point(), avalanches))
}

/// The avalanche triggered by one grain dropped on a stable configuration,
/// with the resulting fixed point.
pub fn leftmost_avalanche(prev: &FixedPoint) -> Result<(FixedPoint, Avalanche), ModelError> {
    let mut glass = Hourglass::from_fixed_point(prev);
    let avalanche = glass.step()?;
    let mut next = glass.fixed_point();
    next.strategy = prev.strategy;
    Ok((next, avalanche))
}

/// `L(p,N) = max_{k<=N} L'(p,k)`.
pub fn global_density_column(params: Params, n: u64) -> Result<usize, ModelError> {
    check_grains(n)?;
    let mut glass = Hourglass::new(params);
    let mut best = 0;
    for _ in 0..n {
        best = best.max(glass.step()?.density_column);
    }
    Ok(best)
}
