use proptest::prelude::*;
use tabcompare_core::{bar_diff, bar_equal, Bar, EditKind};
use tabcompare_testkit::{gen, oracle, rng, Rng};

fn pair(seed: u64) -> (Bar, Bar) {
    let mut r = rng(seed);
    let strings = r.random_range(4..=7);
    let a = {
        let ts = gen::time_signature(&mut r);
        gen::bar(&mut r, 0, ts, strings)
    };
    let b = match r.random_range(0..4) {
        0 => a.clone(),
        1 => {
            let ts = gen::time_signature(&mut r);
            gen::bar(&mut r, 0, ts, strings)
        }
        _ => gen::mutate(&mut r, &a, strings),
    };
    (a, b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn applying_the_diff_reproduces_the_other_bar(seed in any::<u64>()) {
        let (a, b) = pair(seed);
        let d = bar_diff(&a, &b);
        let patched = oracle::patch(&a, &d).map_err(TestCaseError::fail)?;
        prop_assert!(bar_equal(&patched, &b), "{:?}\n{:?}", patched, b);
    }

    #[test]
    fn empty_exactly_when_equal(seed in any::<u64>()) {
        let (a, b) = pair(seed);
        prop_assert_eq!(bar_diff(&a, &b).is_empty(), bar_equal(&a, &b));
    }

    #[test]
    fn edits_are_sorted_and_unique(seed in any::<u64>()) {
        let (a, b) = pair(seed);
        let d = bar_diff(&a, &b);
        for w in d.edits.windows(2) {
            prop_assert!((w[0].onset, w[0].string) < (w[1].onset, w[1].string));
        }
        for e in &d.edits {
            match e.kind {
                EditKind::Added => prop_assert!(e.before.is_none() && e.after.is_some()),
                EditKind::Removed => prop_assert!(e.before.is_some() && e.after.is_none()),
                EditKind::Modified => prop_assert!(e.before.is_some() && e.after.is_some() && e.before != e.after),
            }
        }
    }

    #[test]
    fn reverse_diff_mirrors(seed in any::<u64>()) {
        let (a, b) = pair(seed);
        let (ab, ba) = (bar_diff(&a, &b), bar_diff(&b, &a));
        prop_assert_eq!(ab.edits.len(), ba.edits.len());
        let back = oracle::patch(&b, &ba).map_err(TestCaseError::fail)?;
        prop_assert!(bar_equal(&back, &a));
    }
}
