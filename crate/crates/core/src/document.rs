//! The comparison document: runs the whole pipeline and assembles a
//! self-contained JSON result for the CLI, the HTTP service and the UI.
//!
//! Pipeline: select one track per version, pick the reference, align every
//! other version to it, merge into a column grid, compute per-bar metrics,
//! color all bars of all versions at once by similarity, and diff every
//! cell against the reference. Floats are rounded to 6 decimals when the
//! document is built, so serialization is byte-stable.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::alignment::{
    align_pair, choose_reference, merge_alignments, AlignParams, PairAlignment,
};
use crate::diff::{column_statuses, ColumnStatus, EditKind, NoteEdit, NoteState};
use crate::features::{bar_features, FeatureWeights};
use crate::metrics::{BarMetrics, DEFAULT_SCALE_LENGTH_MM};
use crate::model::{Bar, Beat, Duration, Note, Score, Technique, TimeSignature, Track};
use crate::num::{round6, Rational};
use crate::similarity::{color_of, similarity_coloring, ColorMap, ColorStop, Rgb};

pub const SCHEMA_VERSION: &str = "1";

/// JSON Schema (draft 2020-12) for [`ComparisonDocument`].
pub const DOCUMENT_SCHEMA: &str = include_str!("../schema/comparison-document.schema.json");

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("need at least 2 versions, got {0}")]
    TooFewVersions(usize),
    #[error("{options} version selections for {inputs} inputs")]
    VersionCountMismatch { options: usize, inputs: usize },
    #[error("version {version} ({name}): track index {track} out of range, score has {available} track(s)")]
    TrackOutOfRange {
        version: usize,
        name: String,
        track: usize,
        available: usize,
    },
    #[error("version {version} ({name}): track {track} has no bars")]
    EmptyTrack {
        version: usize,
        name: String,
        track: usize,
    },
    #[error("reference index {reference} out of range for {versions} versions")]
    ReferenceOutOfRange { reference: usize, versions: usize },
    #[error("gap cost must be positive, got {0}")]
    GapCost(f64),
    #[error("feature weights must be non-negative and not both zero, got wc={0} wo={1}")]
    Weights(f64, f64),
    #[error("scale length must be positive, got {0}")]
    ScaleLength(f64),
    #[error("{0}")]
    ColorMap(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BuildError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("internal error: {0}")]
    Internal(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VersionSelection {
    /// Identifier of the input (content digest of the uploaded file).
    pub source: String,
    pub track: usize,
}

fn default_gap_cost() -> f64 {
    AlignParams::<f64>::default().gap_cost
}
fn default_weight() -> f64 {
    1.0
}
fn default_scale_length() -> f64 {
    DEFAULT_SCALE_LENGTH_MM
}
fn default_colormap() -> Vec<ColorStop> {
    ColorMap::default().stops().to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct RunOptions {
    pub versions: Vec<VersionSelection>,
    /// Reference version override; the longest version when absent.
    #[serde(default)]
    pub reference: Option<usize>,
    #[serde(default = "default_gap_cost")]
    pub gap_cost: f64,
    #[serde(default = "default_weight")]
    pub wc: f64,
    #[serde(default = "default_weight")]
    pub wo: f64,
    #[serde(default = "default_scale_length")]
    pub scale_length_mm: f64,
    #[serde(default = "default_colormap")]
    pub colormap: Vec<ColorStop>,
}

impl RunOptions {
    pub fn new(versions: Vec<VersionSelection>) -> Self {
        RunOptions {
            versions,
            reference: None,
            gap_cost: default_gap_cost(),
            wc: default_weight(),
            wo: default_weight(),
            scale_length_mm: default_scale_length(),
            colormap: default_colormap(),
        }
    }

    /// Checks everything that does not depend on the input scores.
    pub fn check(&self) -> Result<(), ConfigError> {
        if self.versions.len() < 2 {
            return Err(ConfigError::TooFewVersions(self.versions.len()));
        }
        if let Some(r) = self.reference {
            if r >= self.versions.len() {
                return Err(ConfigError::ReferenceOutOfRange {
                    reference: r,
                    versions: self.versions.len(),
                });
            }
        }
        AlignParams::new(self.gap_cost).map_err(|_| ConfigError::GapCost(self.gap_cost))?;
        let weight_ok = |w: f64| w.is_finite() && w >= 0.0;
        if !weight_ok(self.wc) || !weight_ok(self.wo) || self.wc + self.wo == 0.0 {
            return Err(ConfigError::Weights(self.wc, self.wo));
        }
        if !(self.scale_length_mm.is_finite() && self.scale_length_mm > 0.0) {
            return Err(ConfigError::ScaleLength(self.scale_length_mm));
        }
        ColorMap::new(self.colormap.clone()).map_err(|e| ConfigError::ColorMap(e.to_string()))?;
        Ok(())
    }
}

/// One version to compare: a display name and its parsed score.
#[derive(Debug, Clone, Copy)]
pub struct VersionInput<'a> {
    pub name: &'a str,
    pub score: &'a Score,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct DocNote {
    pub string: u8,
    pub fret: u8,
    pub tied: bool,
    pub techniques: Vec<Technique>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct DocBeat {
    pub onset: String,
    pub duration: String,
    pub notes: Vec<DocNote>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct DocBar {
    pub index: usize,
    pub time_signature: String,
    pub beats: Vec<DocBeat>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct DocVersion {
    pub name: String,
    pub track_name: String,
    pub bar_count: usize,
    pub tuning: Vec<u8>,
    pub bars: Vec<DocBar>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct DocMetrics {
    pub density: usize,
    pub fret_span_frets: Option<u8>,
    pub fret_span_mm: Option<f64>,
    pub techniques: BTreeMap<Technique, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct DocSimilarity {
    pub t: f64,
    pub color: Rgb,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct DocNoteState {
    pub duration: String,
    pub fret: u8,
    pub techniques: Vec<Technique>,
    pub tied: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct DocEdit {
    pub kind: EditKind,
    pub onset: String,
    /// 0 for a rest beat.
    pub string: u8,
    pub before: Option<DocNoteState>,
    pub after: Option<DocNoteState>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DocMeterChange {
    pub before: String,
    pub after: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct DocCell {
    /// Bar index within the version, `None` for an inserted empty bar.
    pub bar: Option<usize>,
    pub metrics: Option<DocMetrics>,
    pub similarity: Option<DocSimilarity>,
    pub status: ColumnStatus,
    pub time_signature_change: Option<DocMeterChange>,
    pub edits: Vec<DocEdit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct Normalization {
    pub max_density: usize,
    pub max_fret_span_frets: u8,
    pub max_fret_span_mm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct ComparisonDocument {
    pub schema_version: String,
    pub options: RunOptions,
    pub versions: Vec<DocVersion>,
    pub reference_index: usize,
    /// `columns[c][v]`: bar of version `v` in column `c`.
    pub columns: Vec<Vec<Option<usize>>>,
    /// `cells[v][c]`.
    pub cells: Vec<Vec<DocCell>>,
    pub normalization: Normalization,
}

fn rational_str(r: Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn doc_bar(bar: &Bar) -> DocBar {
    DocBar {
        index: bar.index,
        time_signature: bar.time_signature.to_string(),
        beats: bar
            .beats
            .iter()
            .map(|b| DocBeat {
                onset: rational_str(b.onset),
                duration: b.duration.to_string(),
                notes: b
                    .notes
                    .iter()
                    .map(|n| DocNote {
                        string: n.string,
                        fret: n.fret,
                        tied: n.tied,
                        techniques: n.techniques.iter().copied().collect(),
                    })
                    .collect(),
            })
            .collect(),
    }
}

impl DocBar {
    /// Rebuilds the model bar from its embedded form.
    pub fn to_bar(&self) -> Result<Bar, String> {
        let time_signature: TimeSignature =
            self.time_signature.parse().map_err(|e| format!("{e}"))?;
        let beats = self
            .beats
            .iter()
            .map(|b| {
                let (n, d) = b
                    .onset
                    .split_once('/')
                    .ok_or_else(|| format!("bad onset {}", b.onset))?;
                let onset = Rational::new(
                    n.parse().map_err(|_| format!("bad onset {}", b.onset))?,
                    d.parse().map_err(|_| format!("bad onset {}", b.onset))?,
                );
                let duration: Duration = b.duration.parse().map_err(|e| format!("{e}"))?;
                let notes = b
                    .notes
                    .iter()
                    .map(|n| Note {
                        string: n.string,
                        fret: n.fret,
                        techniques: n.techniques.iter().copied().collect(),
                        tied: n.tied,
                    })
                    .collect();
                Ok(Beat {
                    onset,
                    duration,
                    notes,
                })
            })
            .collect::<Result<Vec<_>, String>>()?;
        Ok(Bar {
            index: self.index,
            time_signature,
            beats,
        })
    }
}

fn doc_metrics(m: &BarMetrics<f64>) -> DocMetrics {
    DocMetrics {
        density: m.density,
        fret_span_frets: m.fret_span.map(|s| s.frets),
        fret_span_mm: m.fret_span.map(|s| round6(s.mm)),
        techniques: m.techniques.clone(),
    }
}

fn doc_state(s: &NoteState) -> DocNoteState {
    DocNoteState {
        duration: s.duration.to_string(),
        fret: s.fret,
        techniques: s.techniques.iter().copied().collect(),
        tied: s.tied,
    }
}

fn doc_edit(e: &NoteEdit) -> DocEdit {
    DocEdit {
        kind: e.kind,
        onset: rational_str(e.onset),
        string: e.string,
        before: e.before.as_ref().map(doc_state),
        after: e.after.as_ref().map(doc_state),
    }
}

/// Runs the full comparison pipeline.
pub fn build_document(
    inputs: &[VersionInput<'_>],
    options: &RunOptions,
) -> Result<ComparisonDocument, BuildError> {
    options.check()?;
    if inputs.len() != options.versions.len() {
        return Err(ConfigError::VersionCountMismatch {
            options: options.versions.len(),
            inputs: inputs.len(),
        }
        .into());
    }
    let mut tracks: Vec<&Track> = Vec::with_capacity(inputs.len());
    for (v, (input, sel)) in inputs.iter().zip(&options.versions).enumerate() {
        let track =
            input
                .score
                .tracks
                .get(sel.track)
                .ok_or_else(|| ConfigError::TrackOutOfRange {
                    version: v,
                    name: input.name.to_string(),
                    track: sel.track,
                    available: input.score.tracks.len(),
                })?;
        if track.bars.is_empty() {
            return Err(ConfigError::EmptyTrack {
                version: v,
                name: input.name.to_string(),
                track: sel.track,
            }
            .into());
        }
        tracks.push(track);
    }

    let weights = FeatureWeights {
        chroma: options.wc,
        onset: options.wo,
    };
    let params =
        AlignParams::new(options.gap_cost).map_err(|_| ConfigError::GapCost(options.gap_cost))?;
    let colormap = ColorMap::new(options.colormap.clone())
        .map_err(|e| ConfigError::ColorMap(e.to_string()))?;

    let features: Vec<_> = tracks
        .par_iter()
        .map(|t| bar_features(&t.bars, &t.tuning, weights))
        .collect();
    let reference = match options.reference {
        Some(r) => r,
        None => choose_reference(tracks.iter().map(|t| t.bars.len()))
            .map_err(|e| BuildError::Internal(e.to_string()))?,
    };

    let pairs = (0..tracks.len())
        .into_par_iter()
        .map(|v| {
            if v == reference {
                Ok(PairAlignment::identity(tracks[v].bars.len()))
            } else {
                align_pair(&features[reference], &features[v], params)
            }
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| BuildError::Internal(e.to_string()))?;
    let grid = merge_alignments(tracks[reference].bars.len(), reference, &pairs)
        .map_err(|e| BuildError::Internal(e.to_string()))?;
    let bar_counts: Vec<usize> = tracks.iter().map(|t| t.bars.len()).collect();
    grid.check(&bar_counts).map_err(BuildError::Internal)?;

    let metrics: Vec<Vec<BarMetrics<f64>>> = tracks
        .iter()
        .map(|t| {
            t.bars
                .iter()
                .map(|b| BarMetrics::compute(b, options.scale_length_mm))
                .collect()
        })
        .collect();

    // all bars of all versions at once, in version then bar order
    let all_features: Vec<_> = features.iter().flatten().cloned().collect();
    let coloring = similarity_coloring(&all_features, &colormap)
        .map_err(|e| BuildError::Internal(e.to_string()))?;
    let offsets: Vec<usize> = bar_counts
        .iter()
        .scan(0, |acc, &n| {
            let start = *acc;
            *acc += n;
            Some(start)
        })
        .collect();

    let bars: Vec<&[Bar]> = tracks.iter().map(|t| t.bars.as_slice()).collect();
    let statuses = column_statuses(&grid, &bars);

    let cells: Vec<Vec<DocCell>> = (0..grid.num_versions())
        .map(|v| {
            (0..grid.num_columns())
                .map(|c| {
                    let bar = grid.cell(v, c);
                    let status = &statuses[v][c];
                    let similarity = bar.map(|b| {
                        let t = round6(coloring.coordinates[offsets[v] + b]);
                        DocSimilarity {
                            t,
                            color: color_of(t, &colormap),
                        }
                    });
                    let diff = status.diff.as_ref();
                    DocCell {
                        bar,
                        metrics: bar.map(|b| doc_metrics(&metrics[v][b])),
                        similarity,
                        status: status.status,
                        time_signature_change: diff.and_then(|d| d.time_signature).map(|(a, b)| {
                            DocMeterChange {
                                before: a.to_string(),
                                after: b.to_string(),
                            }
                        }),
                        edits: diff
                            .map(|d| d.edits.iter().map(doc_edit).collect())
                            .unwrap_or_default(),
                    }
                })
                .collect()
        })
        .collect();

    let all_metrics = metrics.iter().flatten();
    let normalization = Normalization {
        max_density: all_metrics.clone().map(|m| m.density).max().unwrap_or(0),
        max_fret_span_frets: all_metrics
            .clone()
            .filter_map(|m| m.fret_span.map(|s| s.frets))
            .max()
            .unwrap_or(0),
        max_fret_span_mm: round6(
            all_metrics
                .filter_map(|m| m.fret_span.map(|s| s.mm))
                .fold(0.0, f64::max),
        ),
    };

    Ok(ComparisonDocument {
        schema_version: SCHEMA_VERSION.to_string(),
        options: options.clone(),
        versions: inputs
            .iter()
            .zip(&tracks)
            .map(|(input, t)| DocVersion {
                name: input.name.to_string(),
                track_name: t.name.clone(),
                bar_count: t.bars.len(),
                tuning: t.tuning.pitches.clone(),
                bars: t.bars.iter().map(doc_bar).collect(),
            })
            .collect(),
        reference_index: reference,
        columns: (0..grid.num_columns()).map(|c| grid.column(c)).collect(),
        cells,
        normalization,
    })
}

/// Pretty JSON with 2-space indentation and a trailing newline.
pub fn write_document(doc: &ComparisonDocument) -> String {
    let mut out = serde_json::to_string_pretty(doc).expect("document serializes");
    out.push('\n');
    out
}

pub fn read_document(bytes: &[u8]) -> Result<ComparisonDocument, serde_json::Error> {
    serde_json::from_slice(bytes)
}
