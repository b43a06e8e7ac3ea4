//! Explicit differences between a reference bar and another version's bar.
//!
//! Beats are paired by exact onset and notes inside paired beats by string.
//! A rest beat takes part as a pseudo-note on string 0, so rhythm changes in
//! silent passages still show up as edits.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::alignment::AlignmentGrid;
use crate::model::{Bar, Duration, Technique, TimeSignature};
use crate::num::Rational;

/// String number used for rest entries in [`NoteEdit`].
pub const REST_STRING: u8 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ColumnStatus {
    Same,
    Changed,
    MissingInVersion,
    ExtraInVersion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EditKind {
    Added,
    Removed,
    Modified,
}

/// Content of one note (or rest) slot.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NoteState {
    /// Duration of the enclosing beat.
    pub duration: Duration,
    pub fret: u8,
    pub techniques: BTreeSet<Technique>,
    pub tied: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NoteEdit {
    pub kind: EditKind,
    pub onset: Rational,
    /// [`REST_STRING`] for a rest beat.
    pub string: u8,
    pub before: Option<NoteState>,
    pub after: Option<NoteState>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BarDiff {
    /// `(reference, other)` when the meters differ.
    pub time_signature: Option<(TimeSignature, TimeSignature)>,
    /// Sorted by `(onset, string, kind)`.
    pub edits: Vec<NoteEdit>,
}

impl BarDiff {
    pub fn is_empty(&self) -> bool {
        self.time_signature.is_none() && self.edits.is_empty()
    }
}

/// Positional equality: same meter and identical beats (onset, duration and
/// every note's string, fret, techniques and tie). The bar index is ignored.
pub fn bar_equal(a: &Bar, b: &Bar) -> bool {
    a.time_signature == b.time_signature && a.beats == b.beats
}

fn slots(bar: &Bar) -> BTreeMap<(Rational, u8), NoteState> {
    let mut out = BTreeMap::new();
    for beat in &bar.beats {
        if beat.is_rest() {
            let state = NoteState {
                duration: beat.duration,
                fret: 0,
                techniques: BTreeSet::new(),
                tied: false,
            };
            out.insert((beat.onset, REST_STRING), state);
        }
        for note in &beat.notes {
            let state = NoteState {
                duration: beat.duration,
                fret: note.fret,
                techniques: note.techniques.clone(),
                tied: note.tied,
            };
            out.insert((beat.onset, note.string), state);
        }
    }
    out
}

/// Edits that turn `reference` into `other`. Empty iff [`bar_equal`].
pub fn bar_diff(reference: &Bar, other: &Bar) -> BarDiff {
    let before = slots(reference);
    let mut after = slots(other);
    let mut edits = Vec::new();
    for ((onset, string), b) in before {
        match after.remove(&(onset, string)) {
            Some(a) if a == b => {}
            Some(a) => edits.push(NoteEdit {
                kind: EditKind::Modified,
                onset,
                string,
                before: Some(b),
                after: Some(a),
            }),
            None => edits.push(NoteEdit {
                kind: EditKind::Removed,
                onset,
                string,
                before: Some(b),
                after: None,
            }),
        }
    }
    for ((onset, string), a) in after {
        edits.push(NoteEdit {
            kind: EditKind::Added,
            onset,
            string,
            before: None,
            after: Some(a),
        });
    }
    edits.sort_by_key(|e| (e.onset, e.string, e.kind));
    let time_signature = (reference.time_signature != other.time_signature)
        .then_some((reference.time_signature, other.time_signature));
    BarDiff {
        time_signature,
        edits,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellStatus {
    pub status: ColumnStatus,
    /// Present exactly when `status` is [`ColumnStatus::Changed`].
    pub diff: Option<BarDiff>,
}

/// Status of every `(version, column)` cell relative to the reference row.
///
/// A gap in the version wins over a gap in the reference, so an insertion
/// column is `ExtraInVersion` only for the version that owns the bar.
pub fn column_statuses(grid: &AlignmentGrid, versions: &[&[Bar]]) -> Vec<Vec<CellStatus>> {
    let reference = grid.reference;
    (0..grid.num_versions())
        .map(|v| {
            (0..grid.num_columns())
                .map(|c| match (grid.cell(v, c), grid.cell(reference, c)) {
                    (None, _) => CellStatus {
                        status: ColumnStatus::MissingInVersion,
                        diff: None,
                    },
                    (Some(_), None) => CellStatus {
                        status: ColumnStatus::ExtraInVersion,
                        diff: None,
                    },
                    (Some(_), Some(_)) if v == reference => CellStatus {
                        status: ColumnStatus::Same,
                        diff: None,
                    },
                    (Some(b), Some(r)) => {
                        let (rb, ob) = (&versions[reference][r], &versions[v][b]);
                        if bar_equal(rb, ob) {
                            CellStatus {
                                status: ColumnStatus::Same,
                                diff: None,
                            }
                        } else {
                            CellStatus {
                                status: ColumnStatus::Changed,
                                diff: Some(bar_diff(rb, ob)),
                            }
                        }
                    }
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_tabtext;

    fn bar(src: &str) -> Bar {
        parse_tabtext(&format!("\\track \"G\"\n{src}"))
            .unwrap()
            .tracks[0]
            .bars[0]
            .clone()
    }

    #[test]
    fn equality_is_positional() {
        let a = bar("5.2.4 3.3.4 r.2");
        assert!(bar_equal(&a, &a));
        assert!(!bar_equal(&a, &bar("7.2.4 3.3.4 r.2")));
        assert!(!bar_equal(&bar("5.6.1"), &bar("0.5.1")));
    }

    #[test]
    fn identical_bars_have_no_edits() {
        let a = bar("(3.2 5.3).4{pm} r.4 3.2.2~");
        assert!(bar_diff(&a, &a).is_empty());
    }

    #[test]
    fn fret_change_is_one_modification() {
        let d = bar_diff(&bar("5.2.4 r.2."), &bar("7.2.4 r.2."));
        assert_eq!(d.edits.len(), 1);
        let e = &d.edits[0];
        assert_eq!(
            (e.kind, e.onset, e.string),
            (EditKind::Modified, Rational::from_integer(0), 2)
        );
        assert_eq!(e.before.as_ref().unwrap().fret, 5);
        assert_eq!(e.after.as_ref().unwrap().fret, 7);
    }

    #[test]
    fn chord_gaining_a_note() {
        let d = bar_diff(&bar("(3.2 5.3).2 r.2"), &bar("(3.2 5.3 5.4).2 r.2"));
        assert_eq!(d.edits.len(), 1);
        assert_eq!((d.edits[0].kind, d.edits[0].string), (EditKind::Added, 4));
        assert!(d.edits[0].before.is_none());
    }

    #[test]
    fn rest_rhythm_changes_are_visible() {
        let d = bar_diff(&bar("r.2 r.2"), &bar("r.1"));
        assert!(!d.is_empty());
        assert_eq!(
            d.edits.iter().map(|e| e.kind).collect::<Vec<_>>(),
            vec![EditKind::Modified, EditKind::Removed]
        );
        assert!(d.edits.iter().all(|e| e.string == REST_STRING));
    }

    #[test]
    fn meter_change_is_reported() {
        let a = parse_tabtext("\\track \"G\"\n\\ts 2 4 r.2").unwrap().tracks[0].bars[0].clone();
        let b = parse_tabtext("\\track \"G\"\n\\ts 4 8 r.2").unwrap().tracks[0].bars[0].clone();
        let d = bar_diff(&a, &b);
        assert!(d.edits.is_empty());
        assert_eq!(d.time_signature, Some((a.time_signature, b.time_signature)));
        assert!(!bar_equal(&a, &b));
    }

    #[test]
    fn swapping_roles_swaps_kinds() {
        let a = bar("(3.2 5.3).4 7.1.4{b} r.2");
        let b = bar("(3.2 5.4).4 7.1.8 r.8 r.2");
        let ab = bar_diff(&a, &b);
        let ba = bar_diff(&b, &a);
        let swapped: Vec<NoteEdit> = ab
            .edits
            .iter()
            .map(|e| NoteEdit {
                kind: match e.kind {
                    EditKind::Added => EditKind::Removed,
                    EditKind::Removed => EditKind::Added,
                    EditKind::Modified => EditKind::Modified,
                },
                onset: e.onset,
                string: e.string,
                before: e.after.clone(),
                after: e.before.clone(),
            })
            .collect();
        let mut swapped = swapped;
        swapped.sort_by_key(|e| (e.onset, e.string, e.kind));
        assert_eq!(ba.edits, swapped);
    }

    #[test]
    fn statuses_follow_grid() {
        let bars_ref = vec![bar("0.1.1"), bar("1.1.1"), bar("2.1.1")];
        let bars_v1 = vec![bar("0.1.1"), bar("2.1.1")];
        let bars_v2 = vec![bar("0.1.1"), bar("9.1.1"), bar("1.1.1"), bar("3.1.1")];
        let grid = AlignmentGrid {
            rows: vec![
                vec![Some(0), None, Some(1), Some(2)],
                vec![Some(0), None, None, Some(1)],
                vec![Some(0), Some(1), Some(2), Some(3)],
            ],
            reference: 0,
        };
        let st = column_statuses(&grid, &[&bars_ref, &bars_v1, &bars_v2]);
        let kinds: Vec<Vec<ColumnStatus>> = st
            .iter()
            .map(|r| r.iter().map(|c| c.status).collect())
            .collect();
        use ColumnStatus::*;
        assert_eq!(kinds[0], vec![Same, MissingInVersion, Same, Same]);
        assert_eq!(
            kinds[1],
            vec![Same, MissingInVersion, MissingInVersion, Same]
        );
        assert_eq!(kinds[2], vec![Same, ExtraInVersion, Same, Changed]);
        assert_eq!(st[2][3].diff.as_ref().unwrap().edits.len(), 1);
        assert!(st
            .iter()
            .flatten()
            .all(|c| c.diff.is_some() == (c.status == Changed)));
    }
}
