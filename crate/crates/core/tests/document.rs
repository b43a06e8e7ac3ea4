use proptest::prelude::*;
use tabcompare_core::{
    build_document, read_document, write_document, BuildError, ColumnStatus, ConfigError,
    RunOptions, Score, Track, Tuning, VersionInput, VersionSelection,
};
use tabcompare_testkit::{gen, rng, Rng};

fn versions(seed: u64) -> Vec<Score> {
    let mut r = rng(seed);
    let n = r.random_range(1..=10);
    let base = gen::bars(&mut r, n, 6);
    (0..r.random_range(2..=4))
        .map(|v| {
            let bars = if v == 0 {
                base.clone()
            } else {
                gen::variant(&mut r, &base, 6)
            };
            Score {
                title: String::new(),
                tracks: vec![Track {
                    name: "Gtr".into(),
                    tuning: Tuning::default(),
                    bars,
                }],
            }
        })
        .collect()
}

fn options(n: usize) -> RunOptions {
    RunOptions::new(
        (0..n)
            .map(|i| VersionSelection {
                source: format!("v{i}"),
                track: 0,
            })
            .collect(),
    )
}

fn build(
    scores: &[Score],
    options: &RunOptions,
) -> Result<tabcompare_core::ComparisonDocument, BuildError> {
    let names: Vec<String> = (0..scores.len()).map(|i| format!("v{i}")).collect();
    let inputs: Vec<_> = names
        .iter()
        .zip(scores)
        .map(|(name, score)| VersionInput { name, score })
        .collect();
    build_document(&inputs, options)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn documents_are_consistent_and_stable(seed in any::<u64>()) {
        let scores = versions(seed);
        let opts = options(scores.len());
        let doc = build(&scores, &opts).unwrap();
        let text = write_document(&doc);
        prop_assert_eq!(&write_document(&build(&scores, &opts).unwrap()), &text);
        prop_assert_eq!(&read_document(text.as_bytes()).unwrap(), &doc);

        let r = doc.reference_index;
        for (v, row) in doc.cells.iter().enumerate() {
            prop_assert_eq!(row.len(), doc.columns.len());
            for (c, cell) in row.iter().enumerate() {
                prop_assert_eq!(cell.bar, doc.columns[c][v]);
                prop_assert_eq!(cell.bar.is_none(), cell.status == ColumnStatus::MissingInVersion);
                if v == r && cell.bar.is_some() {
                    prop_assert_eq!(cell.status, ColumnStatus::Same);
                }
                if cell.status != ColumnStatus::Changed {
                    prop_assert!(cell.edits.is_empty() && cell.time_signature_change.is_none());
                } else {
                    prop_assert!(!cell.edits.is_empty() || cell.time_signature_change.is_some());
                }
                if let Some(s) = &cell.similarity {
                    prop_assert!((0.0..=1.0).contains(&s.t));
                }
            }
        }
    }
}

#[test]
fn configuration_errors() {
    let scores = versions(7);
    let one = &scores[..1];
    assert!(matches!(
        build(one, &options(1)),
        Err(BuildError::Config(ConfigError::TooFewVersions(1)))
    ));
    let mut bad_track = options(2);
    bad_track.versions[1].track = 5;
    assert!(matches!(
        build(&scores[..2], &bad_track),
        Err(BuildError::Config(ConfigError::TrackOutOfRange { .. }))
    ));
    let mut bad_gap = options(2);
    bad_gap.gap_cost = 0.0;
    assert!(matches!(
        build(&scores[..2], &bad_gap),
        Err(BuildError::Config(ConfigError::GapCost(_)))
    ));
}
