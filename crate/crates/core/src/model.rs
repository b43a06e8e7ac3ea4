//! Music domain types: scores, tracks, bars, beats and notes.
//!
//! Durations and onsets are exact fractions of a whole note. Strings are
//! numbered from 1 (highest pitch, top line of the tab).

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::num::Rational;

/// Highest fret a note may use.
pub const MAX_FRET: u8 = 30;
/// Maximum number of strings in a tuning.
pub const MAX_STRINGS: usize = 12;
/// Standard six-string guitar tuning, string 1 first (E4 B3 G3 D3 A2 E2).
pub const STANDARD_TUNING: [u8; 6] = [64, 59, 55, 50, 45, 40];
/// Denominators allowed in time signatures and base note values.
pub const ALLOWED_DENOMINATORS: [u32; 6] = [1, 2, 4, 8, 16, 32];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("string {string} exceeds tuning of {strings} strings")]
    StringOutOfRange { string: u8, strings: usize },
    #[error("invalid time signature {0}/{1}")]
    InvalidTimeSignature(u32, u32),
    #[error("invalid duration {0}/{1}")]
    InvalidDuration(i64, i64),
    #[error("malformed fraction `{0}`, expected n/d")]
    MalformedFraction(String),
}

/// Parses `"n/d"` into a pair of integers.
fn parse_fraction(s: &str) -> Result<(i64, i64), ModelError> {
    let bad = || ModelError::MalformedFraction(s.to_string());
    let (n, d) = s.split_once('/').ok_or_else(bad)?;
    let digits = |p: &str| !p.is_empty() && p.bytes().all(|b| b.is_ascii_digit());
    if !digits(n) || !digits(d) {
        return Err(bad());
    }
    Ok((n.parse().map_err(|_| bad())?, d.parse().map_err(|_| bad())?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TimeSignature {
    pub numerator: u32,
    pub denominator: u32,
}

impl TimeSignature {
    pub const COMMON: TimeSignature = TimeSignature {
        numerator: 4,
        denominator: 4,
    };

    pub fn new(numerator: u32, denominator: u32) -> Result<Self, ModelError> {
        let ts = TimeSignature {
            numerator,
            denominator,
        };
        if ts.is_valid() {
            Ok(ts)
        } else {
            Err(ModelError::InvalidTimeSignature(numerator, denominator))
        }
    }

    pub fn is_valid(&self) -> bool {
        self.numerator > 0 && ALLOWED_DENOMINATORS.contains(&self.denominator)
    }

    /// Length of a full bar in whole notes.
    pub fn capacity(&self) -> Rational {
        Rational::new(self.numerator as i64, self.denominator as i64)
    }
}

impl Default for TimeSignature {
    fn default() -> Self {
        Self::COMMON
    }
}

impl fmt::Display for TimeSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator)
    }
}

impl FromStr for TimeSignature {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (n, d) = parse_fraction(s)?;
        let n = u32::try_from(n).map_err(|_| ModelError::InvalidTimeSignature(u32::MAX, 0))?;
        let d = u32::try_from(d).map_err(|_| ModelError::InvalidTimeSignature(n, u32::MAX))?;
        TimeSignature::new(n, d)
    }
}

/// Positive exact fraction of a whole note, always in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Duration(Rational);

impl Duration {
    pub fn new(numerator: i64, denominator: i64) -> Result<Self, ModelError> {
        if numerator <= 0 || denominator <= 0 {
            return Err(ModelError::InvalidDuration(numerator, denominator));
        }
        Ok(Duration(Rational::new(numerator, denominator)))
    }

    /// A base note value (`4` = quarter), optionally dotted (1.5×).
    pub fn from_note_value(value: u32, dotted: bool) -> Result<Self, ModelError> {
        if !ALLOWED_DENOMINATORS.contains(&value) {
            return Err(ModelError::InvalidDuration(1, value as i64));
        }
        if dotted {
            Duration::new(3, 2 * value as i64)
        } else {
            Duration::new(1, value as i64)
        }
    }

    pub fn value(&self) -> Rational {
        self.0
    }
}

impl fmt::Display for Duration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl FromStr for Duration {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (n, d) = parse_fraction(s)?;
        Duration::new(n, d)
    }
}

/// Playing technique annotations. The variant order is the canonical order
/// used everywhere techniques are listed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Technique {
    Bend,
    PalmMute,
    NaturalHarmonic,
    HammerOn,
    PullOff,
    Slide,
    Vibrato,
    LetRing,
    Staccato,
    Tap,
    DeadNote,
}

impl Technique {
    pub const ALL: [Technique; 11] = [
        Technique::Bend,
        Technique::PalmMute,
        Technique::NaturalHarmonic,
        Technique::HammerOn,
        Technique::PullOff,
        Technique::Slide,
        Technique::Vibrato,
        Technique::LetRing,
        Technique::Staccato,
        Technique::Tap,
        Technique::DeadNote,
    ];

    /// Short token used in `.tabtxt` technique suffixes.
    pub fn token(self) -> &'static str {
        match self {
            Technique::Bend => "b",
            Technique::PalmMute => "pm",
            Technique::NaturalHarmonic => "nh",
            Technique::HammerOn => "h",
            Technique::PullOff => "p",
            Technique::Slide => "sl",
            Technique::Vibrato => "v",
            Technique::LetRing => "lr",
            Technique::Staccato => "st",
            Technique::Tap => "tp",
            Technique::DeadNote => "x",
        }
    }

    pub fn from_token(token: &str) -> Option<Technique> {
        Technique::ALL.into_iter().find(|t| t.token() == token)
    }

    pub fn name(self) -> &'static str {
        match self {
            Technique::Bend => "Bend",
            Technique::PalmMute => "PalmMute",
            Technique::NaturalHarmonic => "NaturalHarmonic",
            Technique::HammerOn => "HammerOn",
            Technique::PullOff => "PullOff",
            Technique::Slide => "Slide",
            Technique::Vibrato => "Vibrato",
            Technique::LetRing => "LetRing",
            Technique::Staccato => "Staccato",
            Technique::Tap => "Tap",
            Technique::DeadNote => "DeadNote",
        }
    }
}

impl fmt::Display for Technique {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Note {
    /// 1-based, 1 = highest-pitched string.
    pub string: u8,
    pub fret: u8,
    pub techniques: BTreeSet<Technique>,
    /// Continuation of the previous note on this string rather than a new attack.
    pub tied: bool,
}

impl Note {
    pub fn new(string: u8, fret: u8) -> Self {
        Note {
            string,
            fret,
            techniques: BTreeSet::new(),
            tied: false,
        }
    }

    pub fn with_techniques(mut self, techniques: impl IntoIterator<Item = Technique>) -> Self {
        self.techniques.extend(techniques);
        self
    }

    pub fn tied(mut self) -> Self {
        self.tied = true;
        self
    }

    pub fn is_dead(&self) -> bool {
        self.techniques.contains(&Technique::DeadNote)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Beat {
    /// Offset from the bar start in whole notes.
    pub onset: Rational,
    pub duration: Duration,
    /// Sorted by string; empty for a rest.
    pub notes: Vec<Note>,
}

impl Beat {
    pub fn is_rest(&self) -> bool {
        self.notes.is_empty()
    }

    pub fn end(&self) -> Rational {
        self.onset + self.duration.value()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bar {
    pub index: usize,
    pub time_signature: TimeSignature,
    pub beats: Vec<Beat>,
}

impl Bar {
    /// Builds a bar from consecutive `(duration, notes)` pairs, computing
    /// onsets as prefix sums and sorting each beat's notes by string.
    pub fn from_durations(
        index: usize,
        time_signature: TimeSignature,
        beats: impl IntoIterator<Item = (Duration, Vec<Note>)>,
    ) -> Bar {
        let mut onset = Rational::from_integer(0);
        let beats = beats
            .into_iter()
            .map(|(duration, mut notes)| {
                notes.sort_by_key(|n| n.string);
                let beat = Beat {
                    onset,
                    duration,
                    notes,
                };
                onset += duration.value();
                beat
            })
            .collect();
        Bar {
            index,
            time_signature,
            beats,
        }
    }

    pub fn capacity(&self) -> Rational {
        self.time_signature.capacity()
    }

    pub fn notes(&self) -> impl Iterator<Item = (&Beat, &Note)> {
        self.beats
            .iter()
            .flat_map(|b| b.notes.iter().map(move |n| (b, n)))
    }

    pub fn is_rest_only(&self) -> bool {
        self.beats.iter().all(Beat::is_rest)
    }
}

/// Open-string pitches as MIDI note numbers, string 1 first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Tuning {
    pub pitches: Vec<u8>,
}

impl Tuning {
    pub fn new(pitches: Vec<u8>) -> Self {
        Tuning { pitches }
    }

    pub fn num_strings(&self) -> usize {
        self.pitches.len()
    }
}

impl Default for Tuning {
    fn default() -> Self {
        Tuning {
            pitches: STANDARD_TUNING.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Track {
    pub name: String,
    pub tuning: Tuning,
    pub bars: Vec<Bar>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Score {
    pub title: String,
    pub tracks: Vec<Track>,
}

/// MIDI pitch of a note under a tuning.
pub fn pitch_of(note: &Note, tuning: &Tuning) -> Result<u8, ModelError> {
    let idx = note.string as usize;
    if idx == 0 || idx > tuning.num_strings() {
        return Err(ModelError::StringOutOfRange {
            string: note.string,
            strings: tuning.num_strings(),
        });
    }
    Ok(tuning.pitches[idx - 1].saturating_add(note.fret))
}

/// A broken invariant, located by a path such as `tracks[0].bars[3].beats[1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub rule: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.rule)
    }
}

/// Checks every structural invariant of the model. Returns an empty list for
/// a well-formed score.
pub fn validate_score(score: &Score) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |path: String, rule: String| out.push(Violation { path, rule });

    if score.tracks.is_empty() {
        push("tracks".into(), "score has no tracks".into());
    }
    for (ti, track) in score.tracks.iter().enumerate() {
        let tpath = format!("tracks[{ti}]");
        let strings = track.tuning.num_strings();
        if strings == 0 || strings > MAX_STRINGS {
            push(
                format!("{tpath}.tuning"),
                format!("tuning must have 1..={MAX_STRINGS} strings, has {strings}"),
            );
        }
        for (si, &p) in track.tuning.pitches.iter().enumerate() {
            if p > 127 {
                push(
                    format!("{tpath}.tuning[{si}]"),
                    format!("pitch {p} outside 0..=127"),
                );
            }
        }
        for (bi, bar) in track.bars.iter().enumerate() {
            let bpath = format!("{tpath}.bars[{bi}]");
            if bar.index != bi {
                push(
                    bpath.clone(),
                    format!("bar index {} should be {bi}", bar.index),
                );
            }
            if !bar.time_signature.is_valid() {
                push(
                    bpath.clone(),
                    format!("invalid time signature {}", bar.time_signature),
                );
            }
            let capacity = bar.capacity();
            let mut expected_onset = Rational::from_integer(0);
            for (ki, beat) in bar.beats.iter().enumerate() {
                let kpath = format!("{bpath}.beats[{ki}]");
                if beat.duration.value() <= Rational::from_integer(0) {
                    push(kpath.clone(), "duration must be positive".into());
                }
                if beat.onset != expected_onset {
                    push(
                        kpath.clone(),
                        format!("onset {} should be {}", beat.onset, expected_onset),
                    );
                }
                if beat.end() > capacity {
                    push(
                        kpath.clone(),
                        format!(
                            "onset {} + duration {} exceeds bar capacity {}",
                            beat.onset, beat.duration, capacity
                        ),
                    );
                }
                expected_onset = beat.end();
                for (ni, note) in beat.notes.iter().enumerate() {
                    let npath = format!("{kpath}.notes[{ni}]");
                    if note.string == 0 || note.string as usize > strings {
                        push(
                            npath.clone(),
                            format!("string {} exceeds tuning of {strings} strings", note.string),
                        );
                    }
                    if note.fret > MAX_FRET {
                        push(
                            npath.clone(),
                            format!("fret {} exceeds {MAX_FRET}", note.fret),
                        );
                    }
                    if ni > 0 {
                        let prev = beat.notes[ni - 1].string;
                        if prev == note.string {
                            push(npath, format!("two notes on string {}", note.string));
                        } else if prev > note.string {
                            push(npath, "notes not sorted by string".into());
                        }
                    }
                }
            }
            // beats tile the bar exactly; only report underfull when no beat overflowed
            if expected_onset < capacity {
                push(
                    bpath,
                    format!("beats fill {expected_onset} of bar capacity {capacity}"),
                );
            }
        }
    }
    out
}
