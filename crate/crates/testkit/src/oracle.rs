//! Reference implementations. They favour obviousness over speed and share
//! no code with the engine beyond the data model.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use tabcompare_core::num::Rational;
use tabcompare_core::{Bar, BarDiff, Beat, Duration, EditKind, Note, NoteState, Tuning};

/// `648 * (1 - 2^(-n/12))` for n = 0..=30, from mpmath at 50 significant
/// digits:
/// `[mp.nstr(648*(1-mp.power(2,-mp.mpf(n)/12)),25) for n in range(31)]`.
pub const FRET_POSITIONS_648: [&str; 31] = [
    "0.0",
    "36.36944538226261417604027",
    "70.69763064506013052833342",
    "103.0991229155929761158307",
    "133.6820591623033701804474",
    "162.548507091955194389033",
    "189.7948057911172041882529",
    "215.5118872489088657948105",
    "239.7855798340610946154238",
    "262.69689473911837438353",
    "284.3222963477631540155353",
    "304.7339574275883342819686",
    "324.0",
    "342.1847226911313070880201",
    "359.3488153225300652641667",
    "375.5495614577964880579153",
    "390.8410295811516850902237",
    "405.2742535459775971945165",
    "418.8974028955586020941264",
    "431.7559436244544328974052",
    "443.8927899170305473077119",
    "455.348447369559187191765",
    "466.1611481738815770077676",
    "476.3669787137941671409843",
    "486.0",
    "495.0923613455656535440101",
    "503.6744076612650326320834",
    "511.7747807288982440289577",
    "519.4205147905758425451118",
    "526.6371267729887985972583",
    "533.4487014477793010470632",
];

pub fn fret_position_648(fret: u8) -> f64 {
    FRET_POSITIONS_648[fret as usize].parse().unwrap()
}

// ---------------------------------------------------------------- features

fn rat(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Chroma, onset histogram and cosine distance computed in plain `f64`.
pub fn chroma(bar: &Bar, tuning: &Tuning) -> [f64; 12] {
    let mut v = [0.0; 12];
    for beat in &bar.beats {
        for n in &beat.notes {
            let pitch = tuning.pitches[n.string as usize - 1] as usize + n.fret as usize;
            v[pitch % 12] += rat(beat.duration.value());
        }
    }
    l1(v)
}

pub fn onsets(bar: &Bar) -> [f64; 16] {
    let mut v = [0.0; 16];
    for beat in &bar.beats {
        // exact slot via integer division of the reduced fraction
        let x = beat.onset * Rational::from_integer(16) / bar.capacity();
        let slot = (*x.numer() / *x.denom()).min(15) as usize;
        v[slot] += beat.notes.len() as f64;
    }
    l1(v)
}

fn l1<const N: usize>(mut v: [f64; N]) -> [f64; N] {
    let s: f64 = v.iter().sum();
    if s > 0.0 {
        v.iter_mut().for_each(|x| *x /= s);
    }
    v
}

pub fn distance(a: &Bar, ta: &Tuning, b: &Bar, tb: &Tuning, wc: f64, wo: f64) -> f64 {
    let vec = |bar: &Bar, t: &Tuning| -> Vec<f64> {
        chroma(bar, t)
            .iter()
            .map(|x| wc * x)
            .chain(onsets(bar).iter().map(|x| wo * x))
            .collect()
    };
    let (x, y) = (vec(a, ta), vec(b, tb));
    let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    match (nx == 0.0, ny == 0.0) {
        (true, true) => 0.0,
        (true, false) | (false, true) => 1.0,
        _ => 1.0 - x.iter().zip(&y).map(|(p, q)| p * q).sum::<f64>() / (nx * ny),
    }
}

// --------------------------------------------------------------- alignment

/// Minimum alignment cost over every monotone alignment, by exhaustive
/// enumeration. Costs are accumulated from the start of the path, so the
/// result is bitwise comparable with a forward dynamic program.
pub fn min_alignment_cost(n: usize, m: usize, dist: &dyn Fn(usize, usize) -> f64, gap: f64) -> f64 {
    fn go(
        i: usize,
        j: usize,
        n: usize,
        m: usize,
        acc: f64,
        dist: &dyn Fn(usize, usize) -> f64,
        gap: f64,
    ) -> f64 {
        if i == n && j == m {
            return acc;
        }
        let mut best = f64::INFINITY;
        if i < n && j < m {
            best = best.min(go(i + 1, j + 1, n, m, acc + dist(i, j), dist, gap));
        }
        if i < n {
            best = best.min(go(i + 1, j, n, m, acc + gap, dist, gap));
        }
        if j < m {
            best = best.min(go(i, j + 1, n, m, acc + gap, dist, gap));
        }
        best
    }
    go(0, 0, n, m, 0.0, dist, gap)
}

/// Cost of one alignment, summed in column order.
pub fn alignment_cost(
    columns: &[(Option<usize>, Option<usize>)],
    dist: &dyn Fn(usize, usize) -> f64,
    gap: f64,
) -> f64 {
    columns.iter().fold(0.0, |acc, c| match c {
        (Some(i), Some(j)) => acc + dist(*i, *j),
        _ => acc + gap,
    })
}

/// Whether `columns` is a valid alignment of `n` against `m` items.
pub fn is_alignment(columns: &[(Option<usize>, Option<usize>)], n: usize, m: usize) -> bool {
    let a: Vec<usize> = columns.iter().filter_map(|c| c.0).collect();
    let b: Vec<usize> = columns.iter().filter_map(|c| c.1).collect();
    a == (0..n).collect::<Vec<_>>()
        && b == (0..m).collect::<Vec<_>>()
        && columns.iter().all(|c| c.0.is_some() || c.1.is_some())
}

// --------------------------------------------------------------------- MDS

/// Classical MDS onto one axis with a dense symmetric eigensolver, then
/// min-max normalization (all equal → 0.5) with the first coordinate not
/// above the last.
pub fn mds_1d(d: &[Vec<f64>]) -> Vec<f64> {
    let n = d.len();
    let sq = DMatrix::from_fn(n, n, |i, j| d[i][j] * d[i][j]);
    let centering = DMatrix::identity(n, n) - DMatrix::from_element(n, n, 1.0 / n as f64);
    let b = (&centering * sq * &centering) * -0.5;
    let eig = SymmetricEigen::new(b);
    let (k, lambda) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(&y.1))
        .unwrap_or((0, 0.0));
    if lambda <= 1e-12 {
        return vec![0.5; n];
    }
    let x: Vec<f64> = eig
        .eigenvectors
        .column(k)
        .iter()
        .map(|v| v * lambda.sqrt())
        .collect();
    normalize(&x)
}

pub fn normalize(x: &[f64]) -> Vec<f64> {
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi.partial_cmp(&lo) != Some(std::cmp::Ordering::Greater) {
        return vec![0.5; x.len()];
    }
    let t: Vec<f64> = x.iter().map(|v| (v - lo) / (hi - lo)).collect();
    if t[0] > t[t.len() - 1] {
        t.iter().map(|v| 1.0 - v).collect()
    } else {
        t
    }
}

/// Largest deviation between `a` and either `b` or its mirror image.
pub fn max_error_up_to_reflection(a: &[f64], b: &[f64]) -> f64 {
    let direct = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let mirrored = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - (1.0 - y)).abs())
        .fold(0.0, f64::max);
    direct.min(mirrored)
}

// -------------------------------------------------------------------- diff

type Slots = BTreeMap<(Rational, u8), NoteState>;

fn slots_of(bar: &Bar) -> Slots {
    let mut out = BTreeMap::new();
    for beat in &bar.beats {
        let state = |fret, techniques, tied| NoteState {
            duration: beat.duration,
            fret,
            techniques,
            tied,
        };
        if beat.notes.is_empty() {
            out.insert((beat.onset, 0), state(0, Default::default(), false));
        }
        for n in &beat.notes {
            out.insert(
                (beat.onset, n.string),
                state(n.fret, n.techniques.clone(), n.tied),
            );
        }
    }
    out
}

/// Applies `diff` to `reference`, checking every precondition an edit
/// states about the bar it is applied to.
pub fn patch(reference: &Bar, diff: &BarDiff) -> Result<Bar, String> {
    let mut slots = slots_of(reference);
    for e in &diff.edits {
        let key = (e.onset, e.string);
        match e.kind {
            EditKind::Added => {
                if e.before.is_some() || slots.contains_key(&key) {
                    return Err(format!("add onto occupied slot {key:?}"));
                }
                slots.insert(key, e.after.clone().ok_or("add without content")?);
            }
            EditKind::Removed => {
                if slots.remove(&key) != e.before || e.after.is_some() {
                    return Err(format!("remove of mismatched slot {key:?}"));
                }
            }
            EditKind::Modified => {
                if slots.get(&key) != e.before.as_ref() || e.before == e.after {
                    return Err(format!("modify of mismatched slot {key:?}"));
                }
                slots.insert(key, e.after.clone().ok_or("modify without content")?);
            }
        }
    }
    let time_signature = match diff.time_signature {
        Some((from, to)) if from == reference.time_signature => to,
        Some(_) => return Err("meter change does not start from the reference meter".into()),
        None => reference.time_signature,
    };

    let mut by_onset: BTreeMap<Rational, Vec<(u8, NoteState)>> = BTreeMap::new();
    for ((onset, string), state) in slots {
        by_onset.entry(onset).or_default().push((string, state));
    }
    let mut beats = Vec::new();
    for (onset, entries) in by_onset {
        let duration: Duration = entries[0].1.duration;
        if entries.iter().any(|(_, s)| s.duration != duration) {
            return Err(format!("beat at {onset} has mixed durations"));
        }
        let rest = entries.iter().any(|(s, _)| *s == 0);
        if rest && entries.len() > 1 {
            return Err(format!("beat at {onset} is both a rest and a chord"));
        }
        let notes = if rest {
            Vec::new()
        } else {
            entries
                .into_iter()
                .map(|(string, s)| Note {
                    string,
                    fret: s.fret,
                    techniques: s.techniques,
                    tied: s.tied,
                })
                .collect()
        };
        beats.push(Beat {
            onset,
            duration,
            notes,
        });
    }
    Ok(Bar {
        index: reference.index,
        time_signature,
        beats,
    })
}
