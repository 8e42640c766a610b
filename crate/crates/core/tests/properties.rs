use proptest::prelude::*;

use kspm::analyzer::{parse_waves, parse_waves_at, Grammar};
use kspm::dds::{
    audit_trajectory, reconstruct_fixed_point, to_averaging, wave_unfold, x_step, y_step, GroundTruth,
    ShotWindow, WaveToken,
};
use kspm::model::{heights_from_slopes, slopes_from_heights, Params, SlopeConfig};
use kspm::spectral::{basis_identities, centering_absorbs};
use kspm::stabilizer::{density_column, stabilize, stabilize_incremental, Strategy as Order};
use num_rational::BigRational;

fn params() -> impl Strategy<Value = Params> {
    (1u32..=5).prop_map(|p| Params::new(p).unwrap())
}

fn config() -> impl Strategy<Value = (Params, SlopeConfig)> {
    (params(), prop::collection::vec(0i64..14, 0..10))
        .prop_map(|(p, v)| (p, SlopeConfig::new(v).unwrap()))
}

fn tokens() -> impl Strategy<Value = Vec<WaveToken>> {
    prop::collection::vec(prop_oneof![Just(WaveToken::Wave), Just(WaveToken::Zero)], 0..12)
}

fn spell(p: Params, tokens: &[WaveToken]) -> Vec<i64> {
    let mut out = Vec::new();
    for t in tokens {
        match t {
            WaveToken::Zero => out.push(0),
            WaveToken::Wave => out.extend((1..=p.p_i64()).rev()),
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn firing_conserves_grains_and_is_local((p, c) in config()) {
        for i in c.fireable_columns(p) {
            let f = c.fire(p, i).unwrap();
            prop_assert_eq!(f.grain_count(), c.grain_count());
            prop_assert!(f.as_slice().iter().all(|&b| b >= 0));
            let touched = [i.checked_sub(1), Some(i), Some(i + p.p_usize())];
            for j in 0..c.support().max(f.support()) + 1 {
                if !touched.contains(&Some(j)) {
                    prop_assert_eq!(f.get(j), c.get(j), "column {} changed by firing {}", j, i);
                }
            }
        }
    }

    #[test]
    fn diamond((p, c) in config()) {
        let fireable = c.fireable_columns(p);
        for &i in &fireable {
            for &j in &fireable {
                if i != j {
                    let ij = c.fire(p, i).unwrap().fire(p, j).unwrap();
                    let ji = c.fire(p, j).unwrap().fire(p, i).unwrap();
                    prop_assert_eq!(ij, ji);
                }
            }
        }
    }

    #[test]
    fn heights_round_trip((_p, c) in config()) {
        let h = heights_from_slopes(&c);
        prop_assert_eq!(slopes_from_heights(&h, true).unwrap(), c.as_slice().to_vec());
        prop_assert_eq!(h.grain_count() as u64, c.grain_count().unwrap());
    }

    #[test]
    fn random_order_reaches_leftmost_fixed_point(p in params(), n in 0u64..300, seed in any::<u64>()) {
        let left = stabilize(p, n, Order::Leftmost).unwrap();
        let rand = stabilize(p, n, Order::Random { seed }).unwrap();
        prop_assert_eq!(&left.slopes, &rand.slopes);
        prop_assert_eq!(&left.shot, &rand.shot);
        prop_assert!(left.slopes.is_stable(p));
        prop_assert!(left.check_shot_consistency().is_ok());
        prop_assert!(left.shot_at(0) * p.p_i64() <= n as i64);
    }

    #[test]
    fn hourglass_matches_direct(p in params(), n in 0u64..400) {
        let direct = stabilize(p, n, Order::Leftmost).unwrap();
        let (inc, avalanches) = stabilize_incremental(p, n).unwrap();
        prop_assert_eq!(&direct.slopes, &inc.slopes);
        prop_assert_eq!(&direct.shot, &inc.shot);
        for a in &avalanches {
            prop_assert!(a.fired.windows(2).all(|w| w[0] < w[1]), "avalanche {} repeats a column", a.k);
        }
    }

    #[test]
    fn reconstruction_matches_stabilizer(p in params(), n in 0u64..2000) {
        let fp = stabilize(p, n, Order::Leftmost).unwrap();
        let r = reconstruct_fixed_point(p, n, fp.shot_at(0), &mut GroundTruth(&fp.slopes)).unwrap();
        prop_assert_eq!(&r.slopes, &fp.slopes);
        prop_assert_eq!(&r.shot, &fp.shot);
    }

    #[test]
    fn trajectory_audit_passes(p in params(), n in 0u64..1500) {
        let fp = stabilize(p, n, Order::Leftmost).unwrap();
        let audit = audit_trajectory(&fp).unwrap();
        prop_assert!(audit.passed(), "{:?}", audit);
        // Small piles reach the zero window before any negative uniform one.
        let alpha = audit.alpha.unwrap();
        prop_assert!(alpha <= 0 && (n <= 600 || alpha < 0), "alpha = {}", alpha);
    }

    #[test]
    fn window_steps_commute(
        p in params(),
        base in prop::collection::vec(-40i64..40, 6),
        b in 0i64..=5,
    ) {
        let b = b.min(p.p_i64());
        let x = ShotWindow { position: 3, entries: base[..=p.p_usize()].to_vec() };
        let via_x = x_step(p, &x, b).ok().map(|x1| to_averaging(&x1));
        let via_y = y_step(p, &to_averaging(&x), b).ok();
        prop_assert_eq!(via_x, via_y);
    }

    #[test]
    fn uniform_vectors_unfold_into_waves(p in params(), alpha in -50i64..50, toks in tokens()) {
        let tail = spell(p, &toks);
        let report = wave_unfold(p, alpha, &tail).unwrap();
        prop_assert_eq!(&report.tokens, &toks);
        let waves = toks.iter().filter(|&&t| t == WaveToken::Wave).count() as i64;
        prop_assert_eq!(report.alpha_end, alpha + waves);
    }

    #[test]
    fn tails_that_are_not_waves_are_rejected(p in (2u32..=5).prop_map(|p| Params::new(p).unwrap()), toks in tokens(), cut in 1usize..5) {
        // Drop the last `cut` columns of a wave to leave an incomplete excursion.
        let mut with_wave = toks.clone();
        with_wave.push(WaveToken::Wave);
        let mut tail = spell(p, &with_wave);
        let cut = cut.min(p.p_usize() - 1);
        tail.truncate(tail.len() - cut);
        prop_assert!(wave_unfold(p, 0, &tail).is_err());
    }

    #[test]
    fn strict_parse_is_minimal_and_loose_compatible(p in params(), n in 0u64..1200) {
        let fp = stabilize(p, n, Order::Leftmost).unwrap();
        let strict = parse_waves(p, &fp.slopes, Grammar::Strict);
        let w = fp.slopes.support();
        prop_assert!(strict.accepted);
        prop_assert!(strict.n <= w + 1);
        prop_assert!(parse_waves_at(p, &fp.slopes, strict.n, Grammar::Loose).accepted);
        for m in 0..strict.n {
            prop_assert!(!parse_waves_at(p, &fp.slopes, m, Grammar::Strict).accepted);
        }
        let tail = &fp.slopes.as_slice()[strict.n.min(w)..];
        prop_assert_eq!(wave_unfold(p, 0, tail).unwrap().tokens, strict.blocks);
    }

    #[test]
    fn density_column_matches_definition(set in prop::collection::btree_set(0usize..24, 0..12)) {
        let fired: Vec<usize> = set.iter().copied().collect();
        let l = density_column(&fired);
        // Dense from l: every column in [l, max] is fired.
        let dense_from = |l: usize| fired.last().is_none_or(|&m| (l..=m).all(|c| set.contains(&c)));
        prop_assert!(dense_from(l));
        prop_assert!((0..l).all(|k| !dense_from(k)));
    }

    #[test]
    fn centering_is_absorbed(p in 1u32..=8, v in prop::collection::vec((-30i64..30, 1i64..9), 8)) {
        let y: Vec<BigRational> = v[..p as usize]
            .iter()
            .map(|&(a, b)| BigRational::new(a.into(), b.into()))
            .collect();
        prop_assert!(centering_absorbs(p, &y));
    }
}

#[test]
fn basis_change_structure() {
    for p in 1..=12 {
        for (name, ok) in basis_identities(p) {
            assert!(ok, "{name} fails for p={p}");
        }
    }
}
