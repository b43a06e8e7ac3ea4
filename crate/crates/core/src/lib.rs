//! Compare several tablature versions of the same piece.
//!
//! The engine aligns the bars of every version to a reference version,
//! computes per-bar metrics (note density, fret span in frets and
//! millimeters, playing techniques), colors bars by similarity across all
//! versions at once, and records explicit note-level differences against the
//! reference. Everything ends up in a [`ComparisonDocument`].
//!
//! ```
//! use tabcompare_core::{build_document, parse_tabtext, RunOptions, VersionInput, VersionSelection};
//!
//! let a = parse_tabtext("\\track \"Gtr\"\n0.6.4 2.5.4 2.4.4 1.3.4 | 0.1.1 |").unwrap();
//! let b = parse_tabtext("\\track \"Gtr\"\n0.6.4 2.5.4 2.4.4 2.3.4 | 0.1.1 |").unwrap();
//! let options = RunOptions::new(vec![
//!     VersionSelection { source: "a".into(), track: 0 },
//!     VersionSelection { source: "b".into(), track: 0 },
//! ]);
//! let doc = build_document(
//!     &[VersionInput { name: "a", score: &a }, VersionInput { name: "b", score: &b }],
//!     &options,
//! )
//! .unwrap();
//! assert_eq!(doc.columns.len(), 2);
//! assert_eq!(doc.cells[1][0].edits.len(), 1);
//! ```
//!
//! Numeric stages are generic over [`num::Scalar`] (`f32` or `f64`); the
//! aliases below fix the scalar type. The document always uses `f64`.

pub mod alignment;
pub mod canonical;
pub mod diff;
pub mod document;
pub mod features;
pub mod metrics;
pub mod model;
pub mod num;
pub mod parser;
pub mod similarity;

use thiserror::Error;

pub use alignment::{
    align_pair, align_with, choose_reference, merge_alignments, AlignError, AlignmentGrid,
};
pub use canonical::{is_canonical, read_canonical, write_canonical, CanonicalError};
pub use diff::{
    bar_diff, bar_equal, column_statuses, BarDiff, CellStatus, ColumnStatus, EditKind, NoteEdit,
    NoteState,
};
pub use document::{
    build_document, read_document, write_document, BuildError, ComparisonDocument, ConfigError,
    RunOptions, VersionInput, VersionSelection, DOCUMENT_SCHEMA,
};
pub use features::{bar_distance, chroma_vector, onset_vector};
pub use metrics::{fret_position_mm, fret_span, note_density, techniques_in_bar};
pub use model::{
    pitch_of, validate_score, Bar, Beat, Duration, Note, Score, Technique, TimeSignature, Track,
    Tuning, Violation,
};
pub use parser::{list_tracks, parse_tabtext, track_summaries, ParseError, TrackInfo};
pub use similarity::{color_of, mds_1d, ColorMap, ColorStop, Rgb};

pub type BarFeature64 = features::BarFeature<f64>;
pub type BarFeature32 = features::BarFeature<f32>;
pub type FeatureWeights64 = features::FeatureWeights<f64>;
pub type FeatureWeights32 = features::FeatureWeights<f32>;
pub type AlignParams64 = alignment::AlignParams<f64>;
pub type AlignParams32 = alignment::AlignParams<f32>;
pub type PairAlignment64 = alignment::PairAlignment<f64>;
pub type PairAlignment32 = alignment::PairAlignment<f32>;
pub type BarMetrics64 = metrics::BarMetrics<f64>;
pub type BarMetrics32 = metrics::BarMetrics<f32>;
pub type DistanceMatrix64 = similarity::DistanceMatrix<f64>;
pub type DistanceMatrix32 = similarity::DistanceMatrix<f32>;
pub type SimilarityColoring64 = similarity::SimilarityColoring<f64>;
pub type SimilarityColoring32 = similarity::SimilarityColoring<f32>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LoadError {
    #[error(transparent)]
    Text(#[from] ParseError),
    #[error(transparent)]
    Canonical(#[from] CanonicalError),
    #[error("input is not valid UTF-8")]
    Utf8,
}

/// Reads either format: canonical JSON when the first non-blank byte is
/// `{`, `.tabtxt` otherwise.
pub fn load_score(bytes: &[u8]) -> Result<Score, LoadError> {
    if is_canonical(bytes) {
        Ok(read_canonical(bytes)?)
    } else {
        let text = std::str::from_utf8(bytes).map_err(|_| LoadError::Utf8)?;
        Ok(parse_tabtext(text)?)
    }
}
