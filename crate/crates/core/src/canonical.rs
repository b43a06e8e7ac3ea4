//! Canonical JSON interchange format for scores.
//!
//! Keys are written in a fixed order with 2-space indentation and a trailing
//! newline; rationals are `"n/d"` strings. Beat onsets are not stored, they
//! are recomputed as prefix sums on read.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    validate_score, Bar, Duration, Note, Score, Technique, TimeSignature, Track, Tuning,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CanonicalError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireScore {
    title: String,
    tracks: Vec<WireTrack>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireTrack {
    name: String,
    tuning: Vec<u8>,
    bars: Vec<WireBar>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct WireBar {
    time_signature: String,
    beats: Vec<WireBeat>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireBeat {
    duration: String,
    notes: Vec<WireNote>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireNote {
    string: u8,
    fret: u8,
    tied: bool,
    techniques: Vec<Technique>,
}

/// True when the text looks like a canonical document (first non-blank byte is `{`).
pub fn is_canonical(source: &[u8]) -> bool {
    source.iter().find(|b| !b.is_ascii_whitespace()) == Some(&b'{')
}

pub fn write_canonical(score: &Score) -> String {
    let wire = WireScore {
        title: score.title.clone(),
        tracks: score
            .tracks
            .iter()
            .map(|t| WireTrack {
                name: t.name.clone(),
                tuning: t.tuning.pitches.clone(),
                bars: t
                    .bars
                    .iter()
                    .map(|b| WireBar {
                        time_signature: b.time_signature.to_string(),
                        beats: b
                            .beats
                            .iter()
                            .map(|beat| WireBeat {
                                duration: beat.duration.to_string(),
                                notes: beat
                                    .notes
                                    .iter()
                                    .map(|n| WireNote {
                                        string: n.string,
                                        fret: n.fret,
                                        tied: n.tied,
                                        techniques: n.techniques.iter().copied().collect(),
                                    })
                                    .collect(),
                            })
                            .collect(),
                    })
                    .collect(),
            })
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&wire).expect("score serializes");
    out.push('\n');
    out
}

pub fn read_canonical(bytes: &[u8]) -> Result<Score, CanonicalError> {
    let wire: WireScore = serde_json::from_slice(bytes).map_err(|e| CanonicalError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let invalid = |path: String, message: String| CanonicalError::Invalid { path, message };

    let mut tracks = Vec::with_capacity(wire.tracks.len());
    for (ti, wt) in wire.tracks.into_iter().enumerate() {
        let mut bars = Vec::with_capacity(wt.bars.len());
        for (bi, wb) in wt.bars.into_iter().enumerate() {
            let bpath = format!("tracks[{ti}].bars[{bi}]");
            let ts: TimeSignature = wb
                .time_signature
                .parse()
                .map_err(|e| invalid(format!("{bpath}.timeSignature"), format!("{e}")))?;
            let mut beats = Vec::with_capacity(wb.beats.len());
            for (ki, wbeat) in wb.beats.into_iter().enumerate() {
                let kpath = format!("{bpath}.beats[{ki}]");
                let duration: Duration = wbeat
                    .duration
                    .parse()
                    .map_err(|e| invalid(format!("{kpath}.duration"), format!("{e}")))?;
                let mut notes = Vec::with_capacity(wbeat.notes.len());
                for (ni, wn) in wbeat.notes.into_iter().enumerate() {
                    let mut techniques = BTreeSet::new();
                    for t in wn.techniques {
                        if !techniques.insert(t) {
                            return Err(invalid(
                                format!("{kpath}.notes[{ni}].techniques"),
                                format!("duplicate technique {t}"),
                            ));
                        }
                    }
                    notes.push(Note {
                        string: wn.string,
                        fret: wn.fret,
                        techniques,
                        tied: wn.tied,
                    });
                }
                beats.push((duration, notes));
            }
            // Bar::from_durations sorts notes; detect unsorted input first so the
            // document is rejected rather than silently rewritten.
            for (ki, (_, notes)) in beats.iter().enumerate() {
                if notes.windows(2).any(|w| w[0].string >= w[1].string) {
                    return Err(invalid(
                        format!("{bpath}.beats[{ki}].notes"),
                        "notes must be sorted by string without duplicates".into(),
                    ));
                }
            }
            bars.push(Bar::from_durations(bi, ts, beats));
        }
        tracks.push(Track {
            name: wt.name,
            tuning: Tuning::new(wt.tuning),
            bars,
        });
    }
    let score = Score {
        title: wire.title,
        tracks,
    };
    if let Some(v) = validate_score(&score).into_iter().next() {
        return Err(invalid(v.path, v.rule));
    }
    Ok(score)
}
