//! Fixed-length bar descriptors and the bar distance.
//!
//! A bar is described by a 12-bin chroma (duration-weighted pitch-class
//! mass) and a 16-slot onset histogram (note counts per sixteenth of the
//! bar, independent of meter). Both are L1-normalized, weighted,
//! concatenated and L2-normalized into a 28-dimensional vector. The
//! distance between two bars is one minus the cosine of those vectors.

use crate::model::{Bar, Tuning};
use crate::num::{Rational, Scalar};

pub const CHROMA_BINS: usize = 12;
pub const ONSET_SLOTS: usize = 16;
pub const FEATURE_DIM: usize = CHROMA_BINS + ONSET_SLOTS;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureWeights<T> {
    pub chroma: T,
    pub onset: T,
}

impl<T: Scalar> Default for FeatureWeights<T> {
    fn default() -> Self {
        FeatureWeights {
            chroma: T::one(),
            onset: T::one(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarFeature<T> {
    pub chroma: [T; CHROMA_BINS],
    pub onsets: [T; ONSET_SLOTS],
    /// Unit length, or all zero for a bar of rests.
    pub combined: [T; FEATURE_DIM],
}

impl<T: Scalar> BarFeature<T> {
    pub fn extract(bar: &Bar, tuning: &Tuning, weights: FeatureWeights<T>) -> Self {
        let chroma = chroma_vector(bar, tuning);
        let onsets = onset_vector(bar);
        let mut combined = [T::zero(); FEATURE_DIM];
        for (dst, &c) in combined.iter_mut().zip(chroma.iter()) {
            *dst = weights.chroma * c;
        }
        for (dst, &o) in combined[CHROMA_BINS..].iter_mut().zip(onsets.iter()) {
            *dst = weights.onset * o;
        }
        let norm = combined.iter().map(|&x| x * x).sum::<T>().sqrt();
        if norm > T::zero() {
            for x in &mut combined {
                *x /= norm;
            }
        }
        BarFeature {
            chroma,
            onsets,
            combined,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.combined.iter().all(|x| x.is_zero())
    }
}

/// Divides exact non-negative masses by their total; all-zero stays zero.
fn l1_normalized<T: Scalar, const N: usize>(masses: [Rational; N]) -> [T; N] {
    let total: Rational = masses.iter().sum();
    let mut out = [T::zero(); N];
    if total > Rational::from_integer(0) {
        for (dst, m) in out.iter_mut().zip(masses) {
            *dst = T::from_rational(m / total);
        }
    }
    out
}

/// Duration-weighted pitch-class histogram, L1-normalized.
///
/// Tied and dead notes contribute like any other note. Notes on strings the
/// tuning does not have are ignored (they cannot occur in a valid bar).
pub fn chroma_vector<T: Scalar>(bar: &Bar, tuning: &Tuning) -> [T; CHROMA_BINS] {
    let mut masses = [Rational::from_integer(0); CHROMA_BINS];
    for (beat, note) in bar.notes() {
        let Some(&open) = tuning.pitches.get((note.string as usize).wrapping_sub(1)) else {
            continue;
        };
        let pitch = open as usize + note.fret as usize;
        masses[pitch % CHROMA_BINS] += beat.duration.value();
    }
    l1_normalized(masses)
}

/// Slot index of an onset: `floor(16 * onset / capacity)`, clamped to 15.
pub fn onset_slot(onset: Rational, capacity: Rational) -> usize {
    let slot = (onset * Rational::from_integer(ONSET_SLOTS as i64) / capacity)
        .floor()
        .to_integer();
    slot.clamp(0, ONSET_SLOTS as i64 - 1) as usize
}

/// Note-count histogram over sixteen equal slots of the bar, L1-normalized.
pub fn onset_vector<T: Scalar>(bar: &Bar) -> [T; ONSET_SLOTS] {
    let capacity = bar.capacity();
    let mut counts = [Rational::from_integer(0); ONSET_SLOTS];
    for beat in &bar.beats {
        counts[onset_slot(beat.onset, capacity)] += Rational::from_integer(beat.notes.len() as i64);
    }
    l1_normalized(counts)
}

/// Cosine distance in `[0, 2]`: 0 for two rest bars, 1 when exactly one is a
/// rest bar.
pub fn bar_distance<T: Scalar>(a: &BarFeature<T>, b: &BarFeature<T>) -> T {
    match (a.is_zero(), b.is_zero()) {
        (true, true) => return T::zero(),
        (true, false) | (false, true) => return T::one(),
        (false, false) => {}
    }
    if a.combined == b.combined {
        return T::zero();
    }
    let dot: T = a
        .combined
        .iter()
        .zip(b.combined.iter())
        .map(|(&x, &y)| x * y)
        .sum();
    (T::one() - dot).max(T::zero()).min(T::lit(2.0))
}

/// Features for every bar of a sequence.
pub fn bar_features<T: Scalar>(
    bars: &[Bar],
    tuning: &Tuning,
    weights: FeatureWeights<T>,
) -> Vec<BarFeature<T>> {
    bars.iter()
        .map(|b| BarFeature::extract(b, tuning, weights))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Duration, Note, TimeSignature};
    use approx::assert_relative_eq;

    fn d(v: u32) -> Duration {
        Duration::from_note_value(v, false).unwrap()
    }

    fn rest_bar() -> Bar {
        Bar::from_durations(0, TimeSignature::COMMON, vec![(d(1), vec![])])
    }

    #[test]
    fn rest_bar_is_zero() {
        let t = Tuning::default();
        assert_eq!(chroma_vector::<f64>(&rest_bar(), &t), [0.0; 12]);
        assert_eq!(onset_vector::<f64>(&rest_bar()), [0.0; 16]);
        assert!(BarFeature::<f64>::extract(&rest_bar(), &t, FeatureWeights::default()).is_zero());
    }

    #[test]
    fn whole_low_e_is_one_hot() {
        let bar = Bar::from_durations(
            0,
            TimeSignature::COMMON,
            vec![(d(1), vec![Note::new(6, 0)])],
        );
        let c = chroma_vector::<f64>(&bar, &Tuning::default());
        let mut expected = [0.0; 12];
        expected[4] = 1.0;
        assert_eq!(c, expected);
    }

    #[test]
    fn two_quarters_split_chroma() {
        // midi 40 (class 4) and 45 (class 9), each 1/4 of mass 1/2 total
        let bar = Bar::from_durations(
            0,
            TimeSignature::COMMON,
            vec![
                (d(4), vec![Note::new(6, 0)]),
                (d(4), vec![Note::new(5, 0)]),
                (d(2), vec![]),
            ],
        );
        let c = chroma_vector::<f64>(&bar, &Tuning::default());
        assert_eq!(c[4], 0.5);
        assert_eq!(c[9], 0.5);
        assert_eq!(c.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn quarter_notes_land_on_slots() {
        let bar = Bar::from_durations(
            0,
            TimeSignature::COMMON,
            (0..4).map(|_| (d(4), vec![Note::new(3, 3)])),
        );
        let o = onset_vector::<f64>(&bar);
        for (s, &v) in o.iter().enumerate() {
            assert_eq!(v, if s % 4 == 0 { 0.25 } else { 0.0 }, "slot {s}");
        }
    }

    #[test]
    fn chord_at_start_is_one_hot_slot_zero() {
        let bar = Bar::from_durations(
            0,
            TimeSignature::COMMON,
            vec![(
                d(1),
                vec![Note::new(1, 0), Note::new(2, 1), Note::new(3, 0)],
            )],
        );
        let o = onset_vector::<f32>(&bar);
        assert_eq!(o[0], 1.0);
        assert_eq!(o[1..].iter().sum::<f32>(), 0.0);
    }

    #[test]
    fn slots_are_fraction_of_bar() {
        let cap = TimeSignature::new(6, 8).unwrap().capacity();
        assert_eq!(onset_slot(Rational::new(3, 8), cap), 8);
        assert_eq!(onset_slot(Rational::new(1, 8), cap), 2);
        assert_eq!(onset_slot(cap, cap), 15);
    }

    #[test]
    fn distance_cases() {
        let t = Tuning::default();
        let w = FeatureWeights::<f64>::default();
        // C = string 2 fret 1 (midi 60), G = string 3 fret 0 (midi 55)
        let c = Bar::from_durations(
            0,
            TimeSignature::COMMON,
            vec![(d(1), vec![Note::new(2, 1)])],
        );
        let g = Bar::from_durations(
            0,
            TimeSignature::COMMON,
            vec![(d(1), vec![Note::new(3, 0)])],
        );
        let fc = BarFeature::extract(&c, &t, w);
        let fg = BarFeature::extract(&g, &t, w);
        let fr = BarFeature::extract(&rest_bar(), &t, w);
        assert_eq!(bar_distance(&fc, &fc), 0.0);
        assert_eq!(bar_distance(&fr, &fr), 0.0);
        assert_eq!(bar_distance(&fr, &fc), 1.0);
        assert_relative_eq!(bar_distance(&fc, &fg), 0.5, epsilon = 1e-12);
        assert_eq!(bar_distance(&fc, &fg), bar_distance(&fg, &fc));
    }

    #[test]
    fn octave_shift_leaves_chroma_unchanged() {
        let t = Tuning::default();
        let low = Bar::from_durations(
            0,
            TimeSignature::COMMON,
            vec![(d(2), vec![Note::new(5, 3)]), (d(2), vec![Note::new(4, 2)])],
        );
        let high = Bar::from_durations(
            0,
            TimeSignature::COMMON,
            vec![
                (d(2), vec![Note::new(5, 15)]),
                (d(2), vec![Note::new(4, 14)]),
            ],
        );
        assert_eq!(
            chroma_vector::<f64>(&low, &t),
            chroma_vector::<f64>(&high, &t)
        );
    }
}
