//! Random, always valid, model values.

use std::collections::BTreeSet;

use rand::seq::{IndexedMutRandom, IndexedRandom, SliceRandom};
use rand::Rng;
use tabcompare_core::model::STANDARD_TUNING;
use tabcompare_core::num::Rational;
use tabcompare_core::{Bar, Beat, Duration, Note, Score, Technique, TimeSignature, Track, Tuning};

pub const METERS: [(u32, u32); 9] = [
    (4, 4),
    (3, 4),
    (2, 4),
    (6, 8),
    (5, 4),
    (7, 8),
    (12, 8),
    (2, 2),
    (9, 16),
];

/// Every note value the text format can spell. The dotted 32nd is left
/// out so greedy filling can always finish with 32nds.
pub fn note_values() -> Vec<Duration> {
    let mut out = Vec::new();
    for v in [1, 2, 4, 8, 16, 32] {
        out.push(Duration::from_note_value(v, false).unwrap());
        if v != 32 {
            out.push(Duration::from_note_value(v, true).unwrap());
        }
    }
    out
}

pub fn time_signature(rng: &mut impl Rng) -> TimeSignature {
    let (n, d) = *METERS.choose(rng).unwrap();
    TimeSignature::new(n, d).unwrap()
}

/// Durations that exactly fill `capacity`, biased towards common values.
pub fn rhythm(rng: &mut impl Rng, capacity: Rational) -> Vec<Duration> {
    let values = note_values();
    let mut remaining = capacity;
    let mut out = Vec::new();
    while remaining > Rational::from_integer(0) {
        let fits: Vec<&Duration> = values.iter().filter(|d| d.value() <= remaining).collect();
        // prefer quarters and eighths so bars do not explode into 32nds
        let pick = if rng.random_bool(0.6) {
            fits.iter()
                .copied()
                .rfind(|d| [4, 8].contains(d.value().denom()) && *d.value().numer() == 1)
        } else {
            None
        };
        let d = *pick.unwrap_or_else(|| fits.choose(rng).unwrap());
        remaining -= d.value();
        out.push(d);
    }
    out
}

pub fn techniques(rng: &mut impl Rng) -> BTreeSet<Technique> {
    let mut out = BTreeSet::new();
    if rng.random_bool(0.3) {
        for _ in 0..rng.random_range(1..=2) {
            out.insert(*Technique::ALL.choose(rng).unwrap());
        }
    }
    out
}

pub fn note(rng: &mut impl Rng, string: u8) -> Note {
    let fret = if rng.random_bool(0.8) {
        rng.random_range(0..=12)
    } else {
        rng.random_range(0..=30)
    };
    Note {
        string,
        fret,
        techniques: techniques(rng),
        tied: rng.random_bool(0.08),
    }
}

/// Notes of one beat: a rest (empty) about a fifth of the time.
pub fn chord(rng: &mut impl Rng, strings: u8) -> Vec<Note> {
    if rng.random_bool(0.2) {
        return Vec::new();
    }
    let count = if rng.random_bool(0.6) {
        1
    } else {
        rng.random_range(2..=strings.min(6))
    };
    let mut all: Vec<u8> = (1..=strings).collect();
    all.shuffle(rng);
    let mut picked: Vec<u8> = all.into_iter().take(count as usize).collect();
    picked.sort_unstable();
    picked.into_iter().map(|s| note(rng, s)).collect()
}

pub fn bar(rng: &mut impl Rng, index: usize, ts: TimeSignature, strings: u8) -> Bar {
    let beats: Vec<_> = rhythm(rng, ts.capacity())
        .into_iter()
        .map(|d| (d, chord(rng, strings)))
        .collect();
    Bar::from_durations(index, ts, beats)
}

pub fn tuning(rng: &mut impl Rng) -> Tuning {
    match rng.random_range(0..4) {
        0 => Tuning::new(vec![43, 38, 33, 28]),
        1 => Tuning::new(vec![64, 59, 55, 50, 45, 40, 35]),
        2 => Tuning::new(vec![62, 59, 55, 50, 43, 38]),
        _ => Tuning::new(STANDARD_TUNING.to_vec()),
    }
}

pub fn name(rng: &mut impl Rng) -> String {
    const WORDS: [&str; 10] = [
        "Lead",
        "Rhythm",
        "Bass",
        "Gtr",
        "Solo",
        "Intro",
        "Verse \"B\"",
        "a\\b",
        "Pad",
        "",
    ];
    (*WORDS.choose(rng).unwrap()).to_owned()
}

/// Bars of one track; the meter occasionally changes between bars.
pub fn bars(rng: &mut impl Rng, count: usize, strings: u8) -> Vec<Bar> {
    let mut ts = time_signature(rng);
    (0..count)
        .map(|i| {
            if rng.random_bool(0.15) {
                ts = time_signature(rng);
            }
            bar(rng, i, ts, strings)
        })
        .collect()
}

pub fn score(rng: &mut impl Rng) -> Score {
    let tracks = (0..rng.random_range(1..=3))
        .map(|_| {
            let tuning = tuning(rng);
            let strings = tuning.num_strings() as u8;
            let count = rng.random_range(0..=6);
            Track {
                name: name(rng),
                tuning,
                bars: bars(rng, count, strings),
            }
        })
        .collect();
    Score {
        title: name(rng),
        tracks,
    }
}

fn rebuild(bar: &Bar, beats: Vec<(Duration, Vec<Note>)>) -> Bar {
    Bar::from_durations(bar.index, bar.time_signature, beats)
}

fn parts(bar: &Bar) -> Vec<(Duration, Vec<Note>)> {
    bar.beats
        .iter()
        .map(|b| (b.duration, b.notes.clone()))
        .collect()
}

/// A bar that is usually similar to `bar`: one to three local edits
/// (fret, technique, tie, added or removed note, split or merged beat), and
/// now and then something entirely different.
pub fn mutate(rng: &mut impl Rng, bar: &Bar, strings: u8) -> Bar {
    if rng.random_bool(0.1) {
        let ts = if rng.random_bool(0.5) {
            bar.time_signature
        } else {
            time_signature(rng)
        };
        return self::bar(rng, bar.index, ts, strings);
    }
    let values = note_values();
    let mut beats = parts(bar);
    for _ in 0..rng.random_range(1..=3) {
        let k = rng.random_range(0..beats.len());
        match rng.random_range(0..7) {
            0 | 1 => {
                if let Some(n) = beats[k].1.choose_mut(rng) {
                    n.fret = (n.fret + rng.random_range(1..=5)) % 31;
                }
            }
            2 => {
                if let Some(n) = beats[k].1.choose_mut(rng) {
                    let t = *Technique::ALL.choose(rng).unwrap();
                    if !n.techniques.remove(&t) {
                        n.techniques.insert(t);
                    }
                }
            }
            3 => {
                if let Some(n) = beats[k].1.choose_mut(rng) {
                    n.tied = !n.tied;
                }
            }
            4 => {
                let used: Vec<u8> = beats[k].1.iter().map(|n| n.string).collect();
                let free: Vec<u8> = (1..=strings).filter(|s| !used.contains(s)).collect();
                if let Some(&s) = free.choose(rng) {
                    beats[k].1.push(note(rng, s));
                    beats[k].1.sort_by_key(|n| n.string);
                }
            }
            5 => {
                if !beats[k].1.is_empty() {
                    let i = rng.random_range(0..beats[k].1.len());
                    beats[k].1.remove(i);
                }
            }
            _ => {
                // split a beat in two halves, or merge it with the next one
                let half = beats[k].0.value() / Rational::from_integer(2);
                let merged = beats.get(k + 1).map(|b| beats[k].0.value() + b.0.value());
                if let Some(h) = values
                    .iter()
                    .find(|d| d.value() == half)
                    .filter(|_| rng.random_bool(0.5))
                {
                    let second = (*h, beats[k].1.clone());
                    beats[k].0 = *h;
                    beats.insert(k + 1, second);
                } else if let Some(m) = merged.and_then(|m| values.iter().find(|d| d.value() == m))
                {
                    beats[k].0 = *m;
                    beats.remove(k + 1);
                }
            }
        }
    }
    rebuild(bar, beats)
}

/// A sequence of bars with a few bars deleted, inserted and edited.
pub fn variant(rng: &mut impl Rng, bars: &[Bar], strings: u8) -> Vec<Bar> {
    let mut out = Vec::new();
    for b in bars {
        let roll: f64 = rng.random();
        if roll < 0.12 && bars.len() > 1 {
            continue;
        }
        if roll < 0.22 {
            out.push(self::bar(rng, 0, b.time_signature, strings));
        }
        out.push(if rng.random_bool(0.25) {
            mutate(rng, b, strings)
        } else {
            b.clone()
        });
    }
    if out.is_empty() {
        out.push(bars[0].clone());
    }
    for (i, b) in out.iter_mut().enumerate() {
        b.index = i;
    }
    out
}

/// Onsets recomputed from durations; handy after editing beats by hand.
pub fn reflow(bar: &mut Bar) {
    let mut onset = Rational::from_integer(0);
    for b in &mut bar.beats {
        b.onset = onset;
        onset += b.duration.value();
    }
}

pub fn beat(onset: Rational, duration: Duration, notes: Vec<Note>) -> Beat {
    Beat {
        onset,
        duration,
        notes,
    }
}
