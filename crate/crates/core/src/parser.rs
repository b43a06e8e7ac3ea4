//! Parser for the `.tabtxt` text tablature format.
//!
//! ```text
//! \title "Song"
//! \ts 4 4
//! \track "Lead"
//! \tuning 64 59 55 50 45 40
//! 3.3.4 5.3.8{pm} 5.3.8~ (0.1 1.2 0.3).2 |
//! r.4 7.2.4.{b v} 5.2.8 |
//! ```
//!
//! A note is `fret.string.duration` with an optional trailing `.` for a
//! dotted value; a rest is `r.duration`; a chord is
//! `(fret.string fret.string ...).duration`. `{...}` attaches techniques and
//! `~` marks a note as tied to the previous one. Bars are separated by `|`,
//! `//` starts a line comment.

use std::fmt;

use thiserror::Error;

use crate::model::{
    validate_score, Bar, Duration, Note, Score, Technique, TimeSignature, Track, Tuning,
    ALLOWED_DENOMINATORS, MAX_FRET, MAX_STRINGS,
};
use crate::num::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message} (near `{snippet}`)")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub snippet: String,
}

/// Summary row for a track selection menu.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct TrackInfo {
    pub index: usize,
    pub name: String,
    pub strings: usize,
    pub bars: usize,
}

impl fmt::Display for TrackInfo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\t{}\t{}\t{}",
            self.index, self.name, self.strings, self.bars
        )
    }
}

pub fn track_summaries(score: &Score) -> Vec<TrackInfo> {
    score
        .tracks
        .iter()
        .enumerate()
        .map(|(index, t)| TrackInfo {
            index,
            name: t.name.clone(),
            strings: t.tuning.num_strings(),
            bars: t.bars.len(),
        })
        .collect()
}

pub fn list_tracks(source: &str) -> Result<Vec<TrackInfo>, ParseError> {
    parse_tabtext(source).map(|s| track_summaries(&s))
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Command(String),
    Str(String),
    Number(u32),
    Word(String),
    Dot,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Tilde,
    Pipe,
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
    text: String,
}

impl Token {
    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            column: self.column,
            message: message.into(),
            snippet: self.text.clone(),
        }
    }
}

fn lex(source: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = source.chars().collect();
    let mut tokens = Vec::new();
    let (mut i, mut line, mut column) = (0usize, 1usize, 1usize);

    while i < chars.len() {
        let c = chars[i];
        let (start, start_line, start_col) = (i, line, column);
        let err = |message: String, end: usize| ParseError {
            line: start_line,
            column: start_col,
            message,
            snippet: chars[start..end.min(chars.len())].iter().collect(),
        };
        let advance = |n: usize, i: &mut usize, column: &mut usize| {
            *i += n;
            *column += n;
        };

        if c == '\n' {
            i += 1;
            line += 1;
            column = 1;
            continue;
        }
        if c.is_whitespace() {
            advance(1, &mut i, &mut column);
            continue;
        }
        if c == '/' {
            if chars.get(i + 1) == Some(&'/') {
                while i < chars.len() && chars[i] != '\n' {
                    advance(1, &mut i, &mut column);
                }
                continue;
            }
            return Err(err("unexpected character `/`".into(), i + 1));
        }

        let tok = match c {
            '.' => Tok::Dot,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '~' => Tok::Tilde,
            '|' => Tok::Pipe,
            '\\' => {
                let mut j = i + 1;
                while j < chars.len() && chars[j].is_ascii_alphabetic() {
                    j += 1;
                }
                if j == i + 1 {
                    return Err(err("expected command name after `\\`".into(), j + 1));
                }
                let name: String = chars[i + 1..j].iter().collect();
                tokens.push(Token {
                    tok: Tok::Command(name),
                    line,
                    column,
                    text: chars[i..j].iter().collect(),
                });
                advance(j - i, &mut i, &mut column);
                continue;
            }
            '"' => {
                let mut j = i + 1;
                let mut value = String::new();
                loop {
                    match chars.get(j) {
                        None | Some('\n') => return Err(err("unterminated string".into(), j)),
                        Some('"') => break,
                        Some('\\') => match chars.get(j + 1) {
                            Some(&e @ ('"' | '\\')) => {
                                value.push(e);
                                j += 2;
                            }
                            _ => return Err(err("invalid escape in string".into(), j + 2)),
                        },
                        Some(&ch) => {
                            value.push(ch);
                            j += 1;
                        }
                    }
                }
                tokens.push(Token {
                    tok: Tok::Str(value),
                    line,
                    column,
                    text: chars[i..=j].iter().collect(),
                });
                advance(j + 1 - i, &mut i, &mut column);
                continue;
            }
            d if d.is_ascii_digit() => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let text: String = chars[i..j].iter().collect();
                let value: u32 = text
                    .parse()
                    .map_err(|_| err(format!("number {text} is too large"), j))?;
                tokens.push(Token {
                    tok: Tok::Number(value),
                    line,
                    column,
                    text,
                });
                advance(j - i, &mut i, &mut column);
                continue;
            }
            a if a.is_ascii_alphabetic() => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_alphabetic() {
                    j += 1;
                }
                let text: String = chars[i..j].iter().collect();
                tokens.push(Token {
                    tok: Tok::Word(text.clone()),
                    line,
                    column,
                    text,
                });
                advance(j - i, &mut i, &mut column);
                continue;
            }
            other => return Err(err(format!("unexpected character `{other}`"), i + 1)),
        };
        tokens.push(Token {
            tok,
            line,
            column,
            text: c.to_string(),
        });
        advance(1, &mut i, &mut column);
    }
    tokens.push(Token {
        tok: Tok::Eof,
        line,
        column,
        text: String::new(),
    });
    Ok(tokens)
}

struct PendingTrack {
    name: String,
    tuning: Tuning,
    bars: Vec<Bar>,
    /// Beats of the bar currently being filled.
    beats: Vec<(Duration, Vec<Note>)>,
    filled: Rational,
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    title: String,
    time_signature: TimeSignature,
    tracks: Vec<Track>,
    current: Option<PendingTrack>,
}

/// Parses `.tabtxt` source into a validated [`Score`]. The first error wins;
/// no partially parsed score is ever returned.
pub fn parse_tabtext(source: &str) -> Result<Score, ParseError> {
    let tokens = lex(source)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        title: String::new(),
        time_signature: TimeSignature::COMMON,
        tracks: Vec::new(),
        current: None,
    };
    parser.run()?;
    let score = Score {
        title: parser.title,
        tracks: parser.tracks,
    };
    // the grammar enforces every model invariant; this is a last line of defence
    if let Some(v) = validate_score(&score).into_iter().next() {
        let eof = parser.tokens.last().expect("eof token");
        return Err(eof.error(format!("internal validation failure: {v}")));
    }
    Ok(score)
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, offset: usize) -> &Token {
        &self.tokens[(self.pos + offset).min(self.tokens.len() - 1)]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn expect_dot(&mut self, what: &str) -> Result<(), ParseError> {
        let t = self.next();
        match t.tok {
            Tok::Dot => Ok(()),
            _ => Err(t.error(format!("expected `.` {what}"))),
        }
    }

    fn expect_number(&mut self, what: &str) -> Result<(u32, Token), ParseError> {
        let t = self.next();
        match t.tok {
            Tok::Number(n) => Ok((n, t)),
            _ => Err(t.error(format!("expected {what}"))),
        }
    }

    fn run(&mut self) -> Result<(), ParseError> {
        loop {
            let t = self.peek().clone();
            match &t.tok {
                Tok::Eof => {
                    self.finish_bar(&t, true)?;
                    self.finish_track();
                    if self.tracks.is_empty() {
                        return Err(t.error("expected \\track"));
                    }
                    return Ok(());
                }
                Tok::Command(name) => {
                    self.next();
                    self.command(name, &t)?;
                }
                Tok::Pipe => {
                    self.next();
                    match &self.current {
                        None => return Err(t.error("expected \\track before the first bar")),
                        Some(p) if p.beats.is_empty() => return Err(t.error("empty bar")),
                        Some(_) => self.finish_bar(&t, false)?,
                    }
                }
                Tok::Number(_) | Tok::LParen | Tok::Word(_) => {
                    if self.current.is_none() {
                        return Err(t.error("expected \\track before the first bar"));
                    }
                    self.beat()?;
                }
                _ => return Err(t.error("unexpected token")),
            }
        }
    }

    fn command(&mut self, name: &str, at: &Token) -> Result<(), ParseError> {
        match name {
            "title" => {
                let t = self.next();
                match t.tok {
                    Tok::Str(s) => self.title = s,
                    _ => return Err(t.error("expected quoted title after \\title")),
                }
            }
            "ts" => {
                if self.current.as_ref().is_some_and(|p| !p.beats.is_empty()) {
                    return Err(at.error("\\ts must appear between bars"));
                }
                let (n, nt) = self.expect_number("time signature numerator")?;
                let (d, _) = self.expect_number("time signature denominator")?;
                self.time_signature = TimeSignature::new(n, d)
                    .map_err(|_| nt.error(format!("invalid time signature {n}/{d}")))?;
            }
            "track" => {
                self.finish_bar(at, true)?;
                self.finish_track();
                let t = self.next();
                let Tok::Str(name) = t.tok else {
                    return Err(t.error("expected quoted track name after \\track"));
                };
                self.current = Some(PendingTrack {
                    name,
                    tuning: Tuning::default(),
                    bars: Vec::new(),
                    beats: Vec::new(),
                    filled: Rational::from_integer(0),
                });
            }
            "tuning" => {
                let Some(p) = &self.current else {
                    return Err(at.error("expected \\track before \\tuning"));
                };
                if !p.bars.is_empty() || !p.beats.is_empty() {
                    return Err(at.error("\\tuning must precede the track's first bar"));
                }
                let mut pitches = Vec::new();
                // a number followed by `.` starts a note, not a pitch
                while let Tok::Number(n) = self.peek().tok {
                    if self.peek_at(1).tok == Tok::Dot {
                        break;
                    }
                    let t = self.next();
                    if n > 127 {
                        return Err(t.error(format!("tuning pitch {n} outside 0..=127")));
                    }
                    pitches.push(n as u8);
                }
                if pitches.is_empty() || pitches.len() > MAX_STRINGS {
                    return Err(at.error(format!("\\tuning needs 1..={MAX_STRINGS} pitches")));
                }
                self.current.as_mut().expect("checked").tuning = Tuning::new(pitches);
            }
            other => return Err(at.error(format!("unknown command \\{other}"))),
        }
        Ok(())
    }

    fn finish_bar(&mut self, at: &Token, allow_empty: bool) -> Result<(), ParseError> {
        let ts = self.time_signature;
        let Some(p) = self.current.as_mut() else {
            return Ok(());
        };
        if p.beats.is_empty() {
            return if allow_empty {
                Ok(())
            } else {
                Err(at.error("empty bar"))
            };
        }
        if p.filled != ts.capacity() {
            return Err(at.error(format!(
                "underfull bar {}: beats fill {} of {}",
                p.bars.len() + 1,
                p.filled,
                ts.capacity()
            )));
        }
        let index = p.bars.len();
        p.bars
            .push(Bar::from_durations(index, ts, std::mem::take(&mut p.beats)));
        p.filled = Rational::from_integer(0);
        Ok(())
    }

    fn finish_track(&mut self) {
        if let Some(p) = self.current.take() {
            self.tracks.push(Track {
                name: p.name,
                tuning: p.tuning,
                bars: p.bars,
            });
        }
    }

    fn duration(&mut self) -> Result<Duration, ParseError> {
        let (value, t) = self.expect_number("duration (1, 2, 4, 8, 16 or 32)")?;
        if !ALLOWED_DENOMINATORS.contains(&value) {
            return Err(t.error(format!(
                "invalid duration {value}, expected 1, 2, 4, 8, 16 or 32"
            )));
        }
        let dotted = self.peek().tok == Tok::Dot;
        if dotted {
            self.next();
        }
        Ok(Duration::from_note_value(value, dotted).expect("validated note value"))
    }

    /// `fret.string` with bounds checks against the current tuning.
    fn fret_string(&mut self) -> Result<Note, ParseError> {
        let (fret, ft) = self.expect_number("fret")?;
        self.expect_dot("between fret and string")?;
        let (string, st) = self.expect_number("string")?;
        let strings = self
            .current
            .as_ref()
            .expect("inside track")
            .tuning
            .num_strings();
        if fret > MAX_FRET as u32 {
            return Err(ft.error(format!("fret {fret} exceeds maximum fret {MAX_FRET}")));
        }
        if string == 0 {
            return Err(st.error("string numbers start at 1"));
        }
        if string as usize > strings {
            return Err(st.error(format!("string {string} exceeds tuning")));
        }
        Ok(Note::new(string as u8, fret as u8))
    }

    /// Optional `{...}` and `~` suffixes, each at most once, in either order.
    fn suffixes(&mut self) -> Result<(Vec<Technique>, bool), ParseError> {
        let mut techniques = Vec::new();
        let (mut seen_braces, mut tied) = (false, false);
        loop {
            match self.peek().tok {
                Tok::LBrace if !seen_braces => {
                    self.next();
                    seen_braces = true;
                    loop {
                        let t = self.next();
                        match &t.tok {
                            Tok::RBrace => break,
                            Tok::Word(w) => match Technique::from_token(w) {
                                Some(tech) => techniques.push(tech),
                                None => return Err(t.error(format!("unknown technique `{w}`"))),
                            },
                            _ => return Err(t.error("expected technique or `}`")),
                        }
                    }
                }
                Tok::Tilde if !tied => {
                    self.next();
                    tied = true;
                }
                _ => return Ok((techniques, tied)),
            }
        }
    }

    fn beat(&mut self) -> Result<(), ParseError> {
        let start = self.peek().clone();
        let (duration, notes) = match &start.tok {
            Tok::Word(w) if w == "r" => {
                self.next();
                self.expect_dot("after rest")?;
                (self.duration()?, Vec::new())
            }
            Tok::Word(w) => return Err(start.error(format!("unexpected word `{w}`"))),
            Tok::Number(_) => {
                let mut note = self.fret_string()?;
                self.expect_dot("and duration after string")?;
                let duration = self.duration()?;
                let (techniques, tied) = self.suffixes()?;
                note.techniques.extend(techniques);
                note.tied = tied;
                (duration, vec![note])
            }
            Tok::LParen => {
                self.next();
                let mut notes: Vec<Note> = Vec::new();
                while self.peek().tok != Tok::RParen {
                    let at = self.peek().clone();
                    let mut note = self.fret_string()?;
                    let (techniques, tied) = self.suffixes()?;
                    note.techniques.extend(techniques);
                    note.tied = tied;
                    if notes.iter().any(|n| n.string == note.string) {
                        return Err(
                            at.error(format!("two notes on string {} in one chord", note.string))
                        );
                    }
                    notes.push(note);
                }
                let close = self.next();
                if notes.is_empty() {
                    return Err(close.error("empty chord"));
                }
                self.expect_dot("and duration after chord")?;
                let duration = self.duration()?;
                let (techniques, tied) = self.suffixes()?;
                for n in &mut notes {
                    n.techniques.extend(techniques.iter().copied());
                    n.tied |= tied;
                }
                (duration, notes)
            }
            _ => return Err(start.error("expected note, rest or chord")),
        };

        let capacity = self.time_signature.capacity();
        let p = self.current.as_mut().expect("inside track");
        let filled = p.filled + duration.value();
        if filled > capacity {
            return Err(start.error(format!(
                "overfull bar {}: beats fill {} of {}",
                p.bars.len() + 1,
                filled,
                capacity
            )));
        }
        p.filled = filled;
        p.beats.push((duration, notes));
        Ok(())
    }
}
