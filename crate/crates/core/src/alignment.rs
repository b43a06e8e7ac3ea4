//! Global bar alignment.
//!
//! Every version is aligned to a reference version with a Needleman–Wunsch
//! style dynamic program (minimizing bar distance plus a per-gap cost). The
//! pairwise results are then merged into one column grid: reference bars
//! give one column each, and bars a version has in addition to the
//! reference become insertion columns after the reference bar they follow.
//! This is a center-star merge, not a true multiple alignment.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::features::{bar_distance, BarFeature};
use crate::num::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlignError {
    #[error("no versions to align")]
    NoVersions,
    #[error("cannot align an empty bar sequence")]
    EmptySequence,
    #[error("gap cost must be positive and finite")]
    InvalidGapCost,
    #[error("inconsistent alignment for version {version}: {reason}")]
    Inconsistent { version: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignParams<T> {
    pub gap_cost: T,
}

impl<T: Scalar> Default for AlignParams<T> {
    fn default() -> Self {
        AlignParams {
            gap_cost: T::lit(0.75),
        }
    }
}

impl<T: Scalar> AlignParams<T> {
    pub fn new(gap_cost: T) -> Result<Self, AlignError> {
        if gap_cost > T::zero() && gap_cost.is_finite() {
            Ok(AlignParams { gap_cost })
        } else {
            Err(AlignError::InvalidGapCost)
        }
    }
}

/// One alignment column: `(reference bar, other bar)`, `None` marking a gap.
pub type Column = (Option<usize>, Option<usize>);

#[derive(Debug, Clone, PartialEq)]
pub struct PairAlignment<T> {
    pub columns: Vec<Column>,
    pub total_cost: T,
}

impl<T: Scalar> PairAlignment<T> {
    /// The all-substitution alignment of a sequence with itself.
    pub fn identity(len: usize) -> Self {
        PairAlignment {
            columns: (0..len).map(|i| (Some(i), Some(i))).collect(),
            total_cost: T::zero(),
        }
    }

    /// Checks that no column is a double gap and that stripping gaps from
    /// either side yields `0..n` in order. Returns `(ref_len, other_len)`.
    pub fn check(&self) -> Result<(usize, usize), String> {
        let (mut next_ref, mut next_other) = (0usize, 0usize);
        for (c, col) in self.columns.iter().enumerate() {
            match *col {
                (None, None) => return Err(format!("column {c} is a gap on both sides")),
                (r, o) => {
                    if let Some(r) = r {
                        if r != next_ref {
                            return Err(format!(
                                "column {c}: reference bar {r}, expected {next_ref}"
                            ));
                        }
                        next_ref += 1;
                    }
                    if let Some(o) = o {
                        if o != next_other {
                            return Err(format!("column {c}: bar {o}, expected {next_other}"));
                        }
                        next_other += 1;
                    }
                }
            }
        }
        Ok((next_ref, next_other))
    }

    pub fn gap_count(&self) -> usize {
        self.columns
            .iter()
            .map(|(r, o)| r.is_none() as usize + o.is_none() as usize)
            .sum()
    }
}

/// Index of the version with the most bars; ties go to the lowest index.
pub fn choose_reference(bar_counts: impl IntoIterator<Item = usize>) -> Result<usize, AlignError> {
    let mut best: Option<(usize, usize)> = None;
    for (i, n) in bar_counts.into_iter().enumerate() {
        if best.is_none_or(|(_, m)| n > m) {
            best = Some((i, n));
        }
    }
    best.map(|(i, _)| i).ok_or(AlignError::NoVersions)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Step {
    Diagonal,
    Up,
    Left,
}

/// Optimal global alignment of two sequences of lengths `n_ref` and
/// `n_other` under an arbitrary substitution cost `dist(i, j)`.
///
/// Ties during backtrace prefer a substitution, then a gap in `other`, then
/// a gap in the reference.
pub fn align_with<T: Scalar>(
    n_ref: usize,
    n_other: usize,
    dist: impl Fn(usize, usize) -> T,
    params: AlignParams<T>,
) -> Result<PairAlignment<T>, AlignError> {
    if n_ref == 0 || n_other == 0 {
        return Err(AlignError::EmptySequence);
    }
    let gap = params.gap_cost;
    let width = n_other + 1;
    let mut cost = vec![T::zero(); (n_ref + 1) * width];
    let at = |i: usize, j: usize| i * width + j;

    for i in 1..=n_ref {
        cost[at(i, 0)] = cost[at(i - 1, 0)] + gap;
    }
    for j in 1..=n_other {
        cost[at(0, j)] = cost[at(0, j - 1)] + gap;
    }
    for i in 1..=n_ref {
        for j in 1..=n_other {
            let diag = cost[at(i - 1, j - 1)] + dist(i - 1, j - 1);
            let up = cost[at(i - 1, j)] + gap;
            let left = cost[at(i, j - 1)] + gap;
            cost[at(i, j)] = diag.min(up).min(left);
        }
    }

    let mut columns = Vec::with_capacity(n_ref + n_other);
    let (mut i, mut j) = (n_ref, n_other);
    while i > 0 || j > 0 {
        let here = cost[at(i, j)];
        let step = if i > 0 && j > 0 && here == cost[at(i - 1, j - 1)] + dist(i - 1, j - 1) {
            Step::Diagonal
        } else if i > 0 && here == cost[at(i - 1, j)] + gap {
            Step::Up
        } else {
            Step::Left
        };
        match step {
            Step::Diagonal => {
                i -= 1;
                j -= 1;
                columns.push((Some(i), Some(j)));
            }
            Step::Up => {
                i -= 1;
                columns.push((Some(i), None));
            }
            Step::Left => {
                j -= 1;
                columns.push((None, Some(j)));
            }
        }
    }
    columns.reverse();
    Ok(PairAlignment {
        columns,
        total_cost: cost[at(n_ref, n_other)],
    })
}

/// Aligns two bar sequences using [`bar_distance`] as substitution cost.
pub fn align_pair<T: Scalar>(
    reference: &[BarFeature<T>],
    other: &[BarFeature<T>],
    params: AlignParams<T>,
) -> Result<PairAlignment<T>, AlignError> {
    align_with(
        reference.len(),
        other.len(),
        |i, j| bar_distance(&reference[i], &other[j]),
        params,
    )
}

/// Column layout shared by all versions. `rows[v][c]` is the bar of version
/// `v` shown in column `c`, or `None` for an inserted empty bar.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignmentGrid {
    pub rows: Vec<Vec<Option<usize>>>,
    pub reference: usize,
}

impl AlignmentGrid {
    pub fn num_columns(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn num_versions(&self) -> usize {
        self.rows.len()
    }

    pub fn cell(&self, version: usize, column: usize) -> Option<usize> {
        self.rows[version][column]
    }

    /// The bars of column `c`, one entry per version.
    pub fn column(&self, c: usize) -> Vec<Option<usize>> {
        self.rows.iter().map(|r| r[c]).collect()
    }

    /// Checks the grid invariants against each version's bar count.
    pub fn check(&self, bar_counts: &[usize]) -> Result<(), String> {
        if self.rows.len() != bar_counts.len() {
            return Err(format!(
                "{} rows for {} versions",
                self.rows.len(),
                bar_counts.len()
            ));
        }
        let width = self.num_columns();
        for (v, row) in self.rows.iter().enumerate() {
            if row.len() != width {
                return Err(format!(
                    "row {v} has {} columns, expected {width}",
                    row.len()
                ));
            }
            let bars: Vec<usize> = row.iter().flatten().copied().collect();
            if bars != (0..bar_counts[v]).collect::<Vec<_>>() {
                return Err(format!(
                    "row {v} does not list bars 0..{} in order",
                    bar_counts[v]
                ));
            }
        }
        if let Some(c) = (0..width).find(|&c| self.rows.iter().all(|r| r[c].is_none())) {
            return Err(format!("column {c} is empty in every version"));
        }
        Ok(())
    }
}

/// Merges per-version alignments against the reference into one grid.
///
/// `pairs[v]` aligns the reference (left side) with version `v`;
/// `pairs[reference]` must be the identity alignment. Runs of bars that a
/// version has in addition to the reference become new columns placed
/// directly after the preceding reference column (or before column 0).
/// Runs from different versions at the same spot stay in separate columns,
/// ordered by version index.
pub fn merge_alignments<T: Scalar>(
    ref_len: usize,
    reference: usize,
    pairs: &[PairAlignment<T>],
) -> Result<AlignmentGrid, AlignError> {
    let versions = pairs.len();
    if reference >= versions {
        return Err(AlignError::NoVersions);
    }
    let inconsistent =
        |version: usize, reason: String| AlignError::Inconsistent { version, reason };

    let mut ref_columns = vec![vec![None; versions]; ref_len];
    // anchor = reference bar the run follows; None sorts first (before bar 0)
    let mut insertions: BTreeMap<Option<usize>, Vec<(usize, Vec<usize>)>> = BTreeMap::new();

    for (v, pair) in pairs.iter().enumerate() {
        let (n_ref, _) = pair.check().map_err(|r| inconsistent(v, r))?;
        if n_ref != ref_len {
            return Err(inconsistent(
                v,
                format!("covers {n_ref} reference bars, expected {ref_len}"),
            ));
        }
        if v == reference && pair.columns.iter().any(|&(r, o)| r != o) {
            return Err(inconsistent(
                v,
                "reference must align to itself without gaps".into(),
            ));
        }
        let mut anchor = None;
        let mut run = Vec::new();
        for &(r, o) in &pair.columns {
            match r {
                Some(r) => {
                    if !run.is_empty() {
                        insertions
                            .entry(anchor)
                            .or_default()
                            .push((v, std::mem::take(&mut run)));
                    }
                    ref_columns[r][v] = o;
                    anchor = Some(r);
                }
                None => run.push(o.expect("double gaps rejected by check")),
            }
        }
        if !run.is_empty() {
            insertions.entry(anchor).or_default().push((v, run));
        }
    }

    let mut columns: Vec<Vec<Option<usize>>> = Vec::with_capacity(ref_len);
    let mut emit_insertions = |anchor: Option<usize>, columns: &mut Vec<Vec<Option<usize>>>| {
        for (v, run) in insertions.remove(&anchor).unwrap_or_default() {
            for bar in run {
                let mut col = vec![None; versions];
                col[v] = Some(bar);
                columns.push(col);
            }
        }
    };
    emit_insertions(None, &mut columns);
    for (r, col) in ref_columns.into_iter().enumerate() {
        columns.push(col);
        emit_insertions(Some(r), &mut columns);
    }

    let rows = (0..versions)
        .map(|v| columns.iter().map(|c| c[v]).collect())
        .collect();
    Ok(AlignmentGrid { rows, reference })
}
