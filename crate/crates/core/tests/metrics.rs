use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use tabcompare_core::metrics::BarMetrics;
use tabcompare_core::{fret_position_mm, fret_span, note_density, techniques_in_bar, Bar};
use tabcompare_testkit::{gen, oracle, rng};

fn bar(seed: u64) -> Bar {
    let mut r = rng(seed);
    {
        let ts = gen::time_signature(&mut r);
        gen::bar(&mut r, 0, ts, 6)
    }
}

#[test]
fn fret_positions_match_high_precision_table() {
    for n in 0..=30u8 {
        let expected = oracle::fret_position_648(n);
        assert_abs_diff_eq!(fret_position_mm(n, 648.0), expected, epsilon = 1e-9);
        let scaled = fret_position_mm(n, 628.65);
        assert_abs_diff_eq!(scaled, expected * 628.65 / 648.0, epsilon = 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn density_counts_untied_notes(seed in any::<u64>()) {
        let b = bar(seed);
        let expected = b.beats.iter().flat_map(|x| &x.notes).filter(|n| !n.tied).count();
        prop_assert_eq!(note_density(&b), expected);
    }

    #[test]
    fn moving_up_the_neck_keeps_fret_count_and_shrinks_mm(seed in any::<u64>()) {
        let mut b = bar(seed);
        for beat in &mut b.beats {
            for n in &mut beat.notes {
                n.fret = n.fret.min(24);
            }
        }
        let before = fret_span(&b, 648.0);
        let mut shifted = b.clone();
        for beat in &mut shifted.beats {
            for n in &mut beat.notes {
                if n.fret > 0 {
                    n.fret += 6;
                }
            }
        }
        let after = fret_span(&shifted, 648.0);
        prop_assert_eq!(before.map(|s| s.frets), after.map(|s| s.frets));
        if let (Some(x), Some(y)) = (before, after) {
            prop_assert!(y.mm <= x.mm + 1e-9);
            prop_assert!(x.mm >= 0.0 && (x.frets == 0) == (x.mm == 0.0));
        }
        prop_assert_eq!(note_density(&b), note_density(&shifted));
        prop_assert_eq!(techniques_in_bar(&b), techniques_in_bar(&shifted));
    }

    #[test]
    fn technique_totals_match_note_annotations(seed in any::<u64>()) {
        let b = bar(seed);
        let m = BarMetrics::<f64>::compute(&b, 648.0);
        let total: usize = m.techniques.values().sum();
        prop_assert_eq!(total, b.beats.iter().flat_map(|x| &x.notes).map(|n| n.techniques.len()).sum::<usize>());
        prop_assert!(m.techniques.values().all(|&c| c > 0));
    }
}
