use proptest::prelude::*;
use tabcompare_core::similarity::DistanceMatrix;
use tabcompare_core::{color_of, mds_1d, ColorMap, Rgb};
use tabcompare_testkit::{oracle, rng, Rng};

/// Points on a line with a small second coordinate and some exact duplicates.
fn planted(seed: u64) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut r = rng(seed);
    let n = r.random_range(2..=20);
    let mut pts: Vec<(f64, f64)> = (0..n)
        .map(|_| (r.random_range(0.0..10.0), r.random_range(-0.05..0.05)))
        .collect();
    for _ in 0..r.random_range(0..=n / 3) {
        let (i, j) = (r.random_range(0..n), r.random_range(0..n));
        pts[i] = pts[j];
    }
    let d = pts
        .iter()
        .map(|a| {
            pts.iter()
                .map(|b| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt())
                .collect()
        })
        .collect();
    (pts.iter().map(|p| p.0).collect(), d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn matches_dense_eigensolver(seed in any::<u64>()) {
        let (_, d) = planted(seed);
        let t = mds_1d(&DistanceMatrix::from_rows(d.clone())).unwrap();
        let expected = oracle::mds_1d(&d);
        prop_assert!(oracle::max_error_up_to_reflection(&t, &expected) < 1e-6);
        prop_assert!(t.iter().all(|x| (0.0..=1.0).contains(x)));
        prop_assert!(t[0] <= t[t.len() - 1]);
    }

    #[test]
    fn exact_line_is_recovered(seed in any::<u64>()) {
        let mut r = rng(seed);
        let x: Vec<f64> = (0..r.random_range(2..=20)).map(|_| r.random_range(-5.0..5.0)).collect();
        let d: Vec<Vec<f64>> = x.iter().map(|a| x.iter().map(|b| (a - b).abs()).collect()).collect();
        let t = mds_1d(&DistanceMatrix::from_rows(d)).unwrap();
        prop_assert!(oracle::max_error_up_to_reflection(&t, &oracle::normalize(&x)) < 1e-6);
    }

    #[test]
    fn duplicates_coincide_and_runs_repeat(seed in any::<u64>()) {
        let (_, d) = planted(seed);
        let m = DistanceMatrix::from_rows(d.clone());
        let t = mds_1d(&m).unwrap();
        for i in 0..d.len() {
            for j in 0..d.len() {
                if d[i] == d[j] {
                    prop_assert_eq!(t[i].to_bits(), t[j].to_bits());
                }
            }
        }
        let again = mds_1d(&m).unwrap();
        prop_assert_eq!(
            t.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
            again.iter().map(|x| x.to_bits()).collect::<Vec<_>>()
        );
    }
}

#[test]
fn colormap_endpoints_and_midpoint() {
    let map = ColorMap::default();
    assert_eq!(color_of(0.0, &map).to_string(), "#440154");
    assert_eq!(color_of(1.0, &map).to_string(), "#FDE725");
    assert_eq!(color_of(0.5, &map).to_string(), "#21918C");
    // halfway between #440154 and #3B528B: (0x44+0x3B)/2 = 63.5 rounds to 64
    assert_eq!(color_of(0.125, &map), Rgb([64, 42, 112]));
}
