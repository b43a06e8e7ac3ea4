//! Per-bar metrics: note density, fret span and technique counts.

use std::collections::BTreeMap;

use crate::model::{Bar, Technique};
use crate::num::Scalar;

/// Default scale length (25.5 inches) in millimeters.
pub const DEFAULT_SCALE_LENGTH_MM: f64 = 648.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FretSpan<T> {
    pub frets: u8,
    pub mm: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarMetrics<T> {
    pub density: usize,
    /// `None` when the bar has no fretted note.
    pub fret_span: Option<FretSpan<T>>,
    pub techniques: BTreeMap<Technique, usize>,
}

impl<T: Scalar> BarMetrics<T> {
    pub fn compute(bar: &Bar, scale_length_mm: T) -> Self {
        BarMetrics {
            density: note_density(bar),
            fret_span: fret_span(bar, scale_length_mm),
            techniques: techniques_in_bar(bar),
        }
    }
}

/// Number of attacked notes: every chord note counts, tied continuations do not.
pub fn note_density(bar: &Bar) -> usize {
    bar.notes().filter(|(_, n)| !n.tied).count()
}

/// Distance of a fret from the nut: `L * (1 - 2^(-fret/12))`.
pub fn fret_position_mm<T: Scalar>(fret: u8, scale_length_mm: T) -> T {
    let exponent = -T::lit(fret as f64) / T::lit(12.0);
    scale_length_mm * (T::one() - T::lit(2.0).powf(exponent))
}

/// Extent between the lowest and highest fretted note of the bar. Open
/// strings and dead notes do not move the fretting hand and are ignored.
pub fn fret_span<T: Scalar>(bar: &Bar, scale_length_mm: T) -> Option<FretSpan<T>> {
    let frets = bar
        .notes()
        .map(|(_, n)| n)
        .filter(|n| n.fret >= 1 && !n.is_dead())
        .map(|n| n.fret);
    let (lo, hi) = frets.fold(None, |acc: Option<(u8, u8)>, f| match acc {
        None => Some((f, f)),
        Some((lo, hi)) => Some((lo.min(f), hi.max(f))),
    })?;
    let mm = if lo == hi {
        T::zero()
    } else {
        fret_position_mm(hi, scale_length_mm) - fret_position_mm(lo, scale_length_mm)
    };
    Some(FretSpan { frets: hi - lo, mm })
}

/// Technique counts over all notes of the bar.
pub fn techniques_in_bar(bar: &Bar) -> BTreeMap<Technique, usize> {
    let mut counts = BTreeMap::new();
    for (_, note) in bar.notes() {
        for &t in &note.techniques {
            *counts.entry(t).or_insert(0) += 1;
        }
    }
    counts
}
