//! Similarity-based bar coloring.
//!
//! All bars of all versions are projected onto one axis with classical
//! multidimensional scaling (double-centred squared distances, top
//! eigenpair by power iteration), normalized to `[0, 1]` and looked up in a
//! piecewise-linear colormap. Bars with equal features get byte-identical
//! coordinates and colors.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{bar_distance, BarFeature};
use crate::num::Scalar;

pub const POWER_ITERATION_TOLERANCE: f64 = 1e-10;
pub const POWER_ITERATION_MAX_ITERATIONS: usize = 10_000;
/// Top eigenvalues at or below this are treated as zero (no spread).
pub const EIGENVALUE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimilarityError {
    #[error("distance matrix is empty")]
    Empty,
    #[error("distance matrix is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),
    #[error("distance matrix has non-zero diagonal at {0}")]
    NonZeroDiagonal(usize),
    #[error("distance matrix has a non-finite entry at ({0}, {1})")]
    NonFinite(usize, usize),
    #[error("invalid colormap: {0}")]
    InvalidColorMap(String),
    #[error("invalid color `{0}`, expected #RRGGBB")]
    InvalidColor(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rgb(pub [u8; 3]);

impl fmt::Display for Rgb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [r, g, b] = self.0;
        write!(f, "#{r:02X}{g:02X}{b:02X}")
    }
}

impl FromStr for Rgb {
    type Err = SimilarityError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SimilarityError::InvalidColor(s.to_string());
        let hex = s.strip_prefix('#').ok_or_else(bad)?;
        if hex.len() != 6 || !hex.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(bad());
        }
        let channel = |k: usize| u8::from_str_radix(&hex[2 * k..2 * k + 2], 16).map_err(|_| bad());
        Ok(Rgb([channel(0)?, channel(1)?, channel(2)?]))
    }
}

impl Serialize for Rgb {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rgb {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColorStop {
    pub t: f64,
    #[serde(rename = "rgbHex")]
    pub rgb: Rgb,
}

/// Ordered color stops from `t = 0` to `t = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorMap {
    stops: Vec<ColorStop>,
}

impl ColorMap {
    pub fn new(stops: Vec<ColorStop>) -> Result<Self, SimilarityError> {
        let bad = |m: &str| Err(SimilarityError::InvalidColorMap(m.to_string()));
        if stops.len() < 2 {
            return bad("need at least two stops");
        }
        if stops[0].t != 0.0 || stops[stops.len() - 1].t != 1.0 {
            return bad("first stop must be at 0 and last at 1");
        }
        if stops
            .windows(2)
            .any(|w| w[0].t.partial_cmp(&w[1].t) != Some(std::cmp::Ordering::Less))
        {
            return bad("stop positions must be strictly increasing");
        }
        Ok(ColorMap { stops })
    }

    pub fn stops(&self) -> &[ColorStop] {
        &self.stops
    }
}

impl Default for ColorMap {
    /// Dark violet to yellow, perceptually ordered.
    fn default() -> Self {
        let stop = |t, hex: &str| ColorStop {
            t,
            rgb: hex.parse().expect("valid literal"),
        };
        ColorMap {
            stops: vec![
                stop(0.0, "#440154"),
                stop(0.25, "#3B528B"),
                stop(0.5, "#21918C"),
                stop(0.75, "#5EC962"),
                stop(1.0, "#FDE725"),
            ],
        }
    }
}

/// Linear interpolation per channel between the bracketing stops, rounding
/// half up. Out-of-range `t` is clamped.
pub fn color_of<T: Scalar>(t: T, map: &ColorMap) -> Rgb {
    let mut t = t.to_f64_lossy();
    if !(0.0..=1.0).contains(&t) {
        #[cfg(debug_assertions)]
        log::warn!("colormap lookup outside [0, 1]: {t}");
        t = if t.is_nan() { 0.0 } else { t.clamp(0.0, 1.0) };
    }
    let stops = map.stops();
    let k = stops
        .windows(2)
        .position(|w| t <= w[1].t)
        .unwrap_or(stops.len() - 2);
    let (a, b) = (stops[k], stops[k + 1]);
    let frac = (t - a.t) / (b.t - a.t);
    let mut rgb = [0u8; 3];
    for (c, out) in rgb.iter_mut().enumerate() {
        let (x, y) = (a.rgb.0[c] as f64, b.rgb.0[c] as f64);
        *out = (x + frac * (y - x) + 0.5).floor().clamp(0.0, 255.0) as u8;
    }
    Rgb(rgb)
}

/// Dense symmetric matrix of pairwise bar distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> DistanceMatrix<T> {
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        DistanceMatrix { n, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let n = rows.len();
        DistanceMatrix {
            n,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn check(&self) -> Result<(), SimilarityError> {
        if self.n == 0 {
            return Err(SimilarityError::Empty);
        }
        if self.data.len() != self.n * self.n {
            return Err(SimilarityError::NotSymmetric(
                self.n,
                self.data.len() / self.n.max(1),
            ));
        }
        for i in 0..self.n {
            if self.get(i, i) != T::zero() {
                return Err(SimilarityError::NonZeroDiagonal(i));
            }
            for j in 0..self.n {
                let x = self.get(i, j);
                if !x.is_finite() {
                    return Err(SimilarityError::NonFinite(i, j));
                }
                if x != self.get(j, i) {
                    return Err(SimilarityError::NotSymmetric(i, j));
                }
            }
        }
        Ok(())
    }
}

/// Pairwise [`bar_distance`] over all features.
pub fn distance_matrix<T: Scalar>(features: &[BarFeature<T>]) -> DistanceMatrix<T> {
    let n = features.len();
    let rows: Vec<Vec<T>> = (0..n)
        .into_par_iter()
        .map(|i| {
            features
                .iter()
                .map(|f| bar_distance(&features[i], f))
                .collect()
        })
        .collect();
    DistanceMatrix::from_rows(rows)
}

/// Raw one-dimensional classical MDS embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding<T> {
    /// `sqrt(lambda) * v` for the top eigenpair; all zero when there is no spread.
    pub coordinates: Vec<T>,
    pub eigenvalue: T,
    pub iterations: usize,
}

/// Deterministic, non-degenerate start vector for power iteration. The
/// all-ones vector cannot be used: it spans the null space of any
/// double-centred matrix.
fn start_vector<T: Scalar>(n: usize) -> Vec<T> {
    let mut v: Vec<T> = (0..n as u64)
        .map(|i| {
            // splitmix64
            let mut z = i.wrapping_add(0x9E37_79B9_7F4A_7C15);
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            z ^= z >> 31;
            T::lit(0.5 + (z >> 11) as f64 / (1u64 << 53) as f64)
        })
        .collect();
    normalize(&mut v);
    v
}

fn normalize<T: Scalar>(v: &mut [T]) -> T {
    let norm = v.iter().map(|&x| x * x).sum::<T>().sqrt();
    if norm > T::zero() {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
    norm
}

fn mat_vec<T: Scalar>(b: &[T], n: usize, v: &[T]) -> Vec<T> {
    (0..n)
        .map(|i| {
            b[i * n..(i + 1) * n]
                .iter()
                .zip(v)
                .map(|(&x, &y)| x * y)
                .sum()
        })
        .collect()
}

/// Dominant (largest magnitude) eigenpair of a symmetric matrix.
fn power_iteration<T: Scalar>(b: &[T], n: usize) -> (T, Vec<T>, usize) {
    let tol = T::lit(POWER_ITERATION_TOLERANCE).max(T::epsilon() * T::lit(64.0));
    let mut v = start_vector::<T>(n);
    let mut iterations = 0;
    while iterations < POWER_ITERATION_MAX_ITERATIONS {
        iterations += 1;
        let mut w = mat_vec(b, n, &v);
        let norm = normalize(&mut w);
        if norm <= T::min_positive_value() {
            return (T::zero(), w, iterations);
        }
        let dot: T = w.iter().zip(&v).map(|(&x, &y)| x * y).sum();
        let sign = if dot < T::zero() { -T::one() } else { T::one() };
        let change = w
            .iter()
            .zip(&v)
            .map(|(&x, &y)| (x - sign * y).powi(2))
            .sum::<T>()
            .sqrt();
        v = w;
        if change < tol {
            break;
        }
    }
    let bv = mat_vec(b, n, &v);
    let lambda = v.iter().zip(&bv).map(|(&x, &y)| x * y).sum();
    (lambda, v, iterations)
}

/// Classical MDS onto one axis, before normalization.
pub fn classical_mds_1d<T: Scalar>(m: &DistanceMatrix<T>) -> Result<Embedding<T>, SimilarityError> {
    m.check()?;
    let n = m.len();
    let nt = T::lit(n as f64);
    let sq: Vec<T> = m.data.iter().map(|&d| d * d).collect();
    let row_mean: Vec<T> = (0..n)
        .map(|i| sq[i * n..(i + 1) * n].iter().copied().sum::<T>() / nt)
        .collect();
    let grand = row_mean.iter().copied().sum::<T>() / nt;
    // r_i + r_j is commutative, so b is exactly symmetric and duplicate
    // points produce bitwise identical rows
    let mut b: Vec<T> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            b.push(-T::half() * ((sq[i * n + j] - (row_mean[i] + row_mean[j])) + grand));
        }
    }

    let mut total_iterations = 0;
    // a dominant negative eigenvalue is deflated away so the largest
    // algebraic eigenpair is found
    for _ in 0..n {
        let (lambda, v, it) = power_iteration(&b, n);
        total_iterations += it;
        if lambda < T::zero() && lambda.abs() > T::lit(EIGENVALUE_FLOOR) {
            for i in 0..n {
                for j in 0..n {
                    b[i * n + j] -= lambda * v[i] * v[j];
                }
            }
            continue;
        }
        if lambda <= T::lit(EIGENVALUE_FLOOR) {
            break;
        }
        let scale = lambda.sqrt();
        return Ok(Embedding {
            coordinates: v.iter().map(|&x| x * scale).collect(),
            eigenvalue: lambda,
            iterations: total_iterations,
        });
    }
    Ok(Embedding {
        coordinates: vec![T::zero(); n],
        eigenvalue: T::zero(),
        iterations: total_iterations,
    })
}

/// Min-max normalization to `[0, 1]` (all equal → 0.5), oriented so the
/// first coordinate is not greater than the last.
pub fn normalize_coordinates<T: Scalar>(raw: &[T]) -> Vec<T> {
    let min = raw.iter().copied().fold(T::infinity(), T::min);
    let max = raw.iter().copied().fold(T::neg_infinity(), T::max);
    if raw.is_empty() || max.partial_cmp(&min) != Some(std::cmp::Ordering::Greater) {
        return vec![T::half(); raw.len()];
    }
    let span = max - min;
    let mut t: Vec<T> = raw.iter().map(|&x| (x - min) / span).collect();
    if t[0] > t[t.len() - 1] {
        for x in &mut t {
            *x = T::one() - *x;
        }
    }
    t
}

/// Normalized one-dimensional coordinates in `[0, 1]`.
pub fn mds_1d<T: Scalar>(m: &DistanceMatrix<T>) -> Result<Vec<T>, SimilarityError> {
    Ok(normalize_coordinates(&classical_mds_1d(m)?.coordinates))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityColoring<T> {
    pub coordinates: Vec<T>,
    pub colors: Vec<Rgb>,
}

/// Colors every bar by its position on the similarity axis.
pub fn similarity_coloring<T: Scalar>(
    features: &[BarFeature<T>],
    map: &ColorMap,
) -> Result<SimilarityColoring<T>, SimilarityError> {
    let coordinates = mds_1d(&distance_matrix(features))?;
    let colors = coordinates.iter().map(|&t| color_of(t, map)).collect();
    Ok(SimilarityColoring {
        coordinates,
        colors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn line(points: &[f64]) -> DistanceMatrix<f64> {
        DistanceMatrix::from_fn(points.len(), |i, j| (points[i] - points[j]).abs())
    }

    #[test]
    fn zero_matrix_is_all_half() {
        let m = DistanceMatrix::from_fn(3, |_, _| 0.0);
        assert_eq!(mds_1d(&m).unwrap(), vec![0.5, 0.5, 0.5]);
        assert_eq!(
            mds_1d(&DistanceMatrix::from_fn(1, |_, _| 0.0f32)).unwrap(),
            vec![0.5]
        );
    }

    #[test]
    fn collinear_points_recovered() {
        let t = mds_1d(&line(&[0.0, 1.0, 2.0])).unwrap();
        assert_abs_diff_eq!(t[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t[1], 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(t[2], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn two_points_span_unit_interval() {
        let m = DistanceMatrix::from_rows(vec![vec![0.0, 0.8], vec![0.8, 0.0]]);
        assert_eq!(mds_1d(&m).unwrap(), vec![0.0, 1.0]);
    }

    #[test]
    fn orientation_puts_first_below_last() {
        let t = mds_1d(&line(&[5.0, 3.0, 0.0, 1.0])).unwrap();
        assert!(t[0] <= t[3]);
    }

    #[test]
    fn invalid_matrices_rejected() {
        let asym = DistanceMatrix::from_rows(vec![vec![0.0, 1.0], vec![0.5, 0.0]]);
        assert_eq!(mds_1d(&asym), Err(SimilarityError::NotSymmetric(0, 1)));
        let diag = DistanceMatrix::from_rows(vec![vec![-1.0, 1.0], vec![1.0, 0.0]]);
        assert_eq!(mds_1d(&diag), Err(SimilarityError::NonZeroDiagonal(0)));
        assert_eq!(
            mds_1d(&DistanceMatrix::<f64>::from_rows(vec![])),
            Err(SimilarityError::Empty)
        );
    }

    #[test]
    fn duplicate_points_get_identical_coordinates() {
        let pts = [0.3, 2.0, 0.3, 7.5, 2.0, 4.25];
        let t = mds_1d(&line(&pts)).unwrap();
        assert_eq!(t[0].to_bits(), t[2].to_bits());
        assert_eq!(t[1].to_bits(), t[4].to_bits());
    }

    #[test]
    fn colormap_endpoints_and_midpoint() {
        let map = ColorMap::default();
        assert_eq!(color_of(0.0, &map), "#440154".parse().unwrap());
        assert_eq!(color_of(1.0, &map), "#FDE725".parse().unwrap());
        let grey = ColorMap::new(vec![
            ColorStop {
                t: 0.0,
                rgb: Rgb([0, 0, 0]),
            },
            ColorStop {
                t: 1.0,
                rgb: Rgb([255, 255, 255]),
            },
        ])
        .unwrap();
        assert_eq!(color_of(0.5, &grey), Rgb([128, 128, 128]));
        assert_eq!(color_of(1.5f32, &grey), Rgb([255, 255, 255]));
    }

    #[test]
    fn colormap_validation() {
        let s = |t| ColorStop {
            t,
            rgb: Rgb([0, 0, 0]),
        };
        assert!(ColorMap::new(vec![s(0.0)]).is_err());
        assert!(ColorMap::new(vec![s(0.1), s(1.0)]).is_err());
        assert!(ColorMap::new(vec![s(0.0), s(0.5), s(0.5), s(1.0)]).is_err());
        assert!(ColorMap::new(vec![s(0.0), s(0.5), s(1.0)]).is_ok());
    }

    #[test]
    fn rgb_hex_round_trip() {
        assert_eq!(Rgb([0x21, 0x91, 0x8C]).to_string(), "#21918C");
        assert_eq!("#21918c".parse::<Rgb>().unwrap(), Rgb([0x21, 0x91, 0x8C]));
        assert!("21918C".parse::<Rgb>().is_err());
        assert!("#21918".parse::<Rgb>().is_err());
    }

    #[test]
    fn colors_monotone_within_segment() {
        let map = ColorMap::default();
        for w in map.stops().windows(2) {
            let (a, b) = (w[0], w[1]);
            let mut prev = color_of(a.t, &map);
            for k in 1..=50 {
                let c = color_of(a.t + (b.t - a.t) * k as f64 / 50.0, &map);
                for ch in 0..3 {
                    let up = b.rgb.0[ch] >= a.rgb.0[ch];
                    assert!(if up {
                        c.0[ch] >= prev.0[ch]
                    } else {
                        c.0[ch] <= prev.0[ch]
                    });
                }
                prev = c;
            }
        }
    }
}
