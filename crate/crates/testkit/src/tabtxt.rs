//! Writes a [`Score`] as `.tabtxt`, the inverse of the parser for scores
//! whose durations are plain or dotted note values.

use std::fmt::Write;

use tabcompare_core::model::STANDARD_TUNING;
use tabcompare_core::{Duration, Note, Score, TimeSignature};

fn quoted(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn duration(d: Duration) -> String {
    let v = d.value();
    match (*v.numer(), *v.denom()) {
        (1, den) => den.to_string(),
        (3, den) => format!("{}.", den / 2),
        _ => panic!("{v} is not a note value"),
    }
}

fn suffixes(n: &Note) -> String {
    let mut s = String::new();
    if !n.techniques.is_empty() {
        let names: Vec<&str> = n.techniques.iter().map(|t| t.token()).collect();
        write!(s, "{{{}}}", names.join(" ")).unwrap();
    }
    if n.tied {
        s.push('~');
    }
    s
}

pub fn write(score: &Score) -> String {
    let mut out = String::new();
    writeln!(out, "\\title {}", quoted(&score.title)).unwrap();
    let mut ts = TimeSignature::COMMON;
    for track in &score.tracks {
        writeln!(out, "\\track {}", quoted(&track.name)).unwrap();
        if track.tuning.pitches != STANDARD_TUNING {
            let p: Vec<String> = track.tuning.pitches.iter().map(u8::to_string).collect();
            writeln!(out, "\\tuning {}", p.join(" ")).unwrap();
        }
        for bar in &track.bars {
            if bar.time_signature != ts {
                ts = bar.time_signature;
                writeln!(out, "\\ts {} {}", ts.numerator, ts.denominator).unwrap();
            }
            let beats: Vec<String> = bar
                .beats
                .iter()
                .map(|b| match b.notes.as_slice() {
                    [] => format!("r.{}", duration(b.duration)),
                    [n] => format!(
                        "{}.{}.{}{}",
                        n.fret,
                        n.string,
                        duration(b.duration),
                        suffixes(n)
                    ),
                    notes => {
                        let inner: Vec<String> = notes
                            .iter()
                            .map(|n| format!("{}.{}{}", n.fret, n.string, suffixes(n)))
                            .collect();
                        format!("({}).{}", inner.join(" "), duration(b.duration))
                    }
                })
                .collect();
            writeln!(out, "{} |", beats.join(" ")).unwrap();
        }
    }
    out
}
