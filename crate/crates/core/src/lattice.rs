//! Integer-lattice geometry: points, finite boxes, shifts and the
//! translation-invariant total orders used by anchoring functionals.
//!
//! Field values live in dense buffers indexed in row-major order (first
//! coordinate most significant). That storage order *is* the lexicographic
//! order, so most hot loops never materialize a [`LatticePoint`].

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::Serialize;

use crate::error::{usage, Result};

/// A point of `Z^d`, `d >= 1`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct LatticePoint(Vec<i64>);

impl LatticePoint {
    /// Panics if `coords` is empty.
    pub fn new(coords: Vec<i64>) -> Self {
        assert!(!coords.is_empty(), "lattice points need at least one coordinate");
        LatticePoint(coords)
    }

    pub fn origin(dim: usize) -> Self {
        LatticePoint::new(vec![0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn is_origin(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// Largest absolute coordinate.
    pub fn sup_norm(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    pub fn euclidean_norm(&self) -> f64 {
        self.0.iter().map(|&c| (c as f64) * (c as f64)).sum::<f64>().sqrt()
    }

    fn zip_with(&self, other: &LatticePoint, op: impl Fn(i64, i64) -> i64) -> LatticePoint {
        assert_eq!(self.dim(), other.dim(), "lattice dimension mismatch");
        LatticePoint(self.0.iter().zip(&other.0).map(|(&a, &b)| op(a, b)).collect())
    }
}

impl fmt::Debug for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() == 1 {
            return write!(f, "{}", self.0[0]);
        }
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl From<i64> for LatticePoint {
    fn from(c: i64) -> Self {
        LatticePoint(vec![c])
    }
}

impl From<Vec<i64>> for LatticePoint {
    fn from(c: Vec<i64>) -> Self {
        LatticePoint::new(c)
    }
}

impl<const N: usize> From<[i64; N]> for LatticePoint {
    fn from(c: [i64; N]) -> Self {
        LatticePoint::new(c.to_vec())
    }
}

impl Add for &LatticePoint {
    type Output = LatticePoint;
    fn add(self, rhs: &LatticePoint) -> LatticePoint {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &LatticePoint {
    type Output = LatticePoint;
    fn sub(self, rhs: &LatticePoint) -> LatticePoint {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Neg for &LatticePoint {
    type Output = LatticePoint;
    fn neg(self) -> LatticePoint {
        LatticePoint(self.0.iter().map(|c| -c).collect())
    }
}

/// Translation-invariant total orders on `Z^d`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeOrder {
    /// Compare `t_1`, then `t_2`, ...
    #[default]
    Lexicographic,
    /// Compare `t_d`, then `t_{d-1}`, ... (co-lexicographic).
    ReversedLexicographic,
}

impl LatticeOrder {
    fn cmp_coords(self, a: &[i64], b: &[i64]) -> Ordering {
        match self {
            LatticeOrder::Lexicographic => a.cmp(b),
            LatticeOrder::ReversedLexicographic => a.iter().rev().cmp(b.iter().rev()),
        }
    }

    /// Storage indices of `w` in ascending order.
    pub fn sequence(self, w: &Window) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..w.len()).collect();
        if self != LatticeOrder::Lexicographic {
            let mut buf_a = vec![0; w.dim()];
            let mut buf_b = vec![0; w.dim()];
            idx.sort_by(|&i, &j| {
                w.coords_at(i, &mut buf_a);
                w.coords_at(j, &mut buf_b);
                self.cmp_coords(&buf_a, &buf_b)
            });
        }
        idx
    }
}

/// Compares two points under a translation-invariant order.
pub fn order_compare(order: LatticeOrder, a: &LatticePoint, b: &LatticePoint) -> Result<Ordering> {
    if a.dim() != b.dim() {
        return usage(format!("cannot compare points of dimension {} and {}", a.dim(), b.dim()));
    }
    Ok(order.cmp_coords(a.coords(), b.coords()))
}

/// A finite box `[lower, upper] ∩ Z^d` with inclusive bounds.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Window {
    lower: LatticePoint,
    upper: LatticePoint,
}

impl Window {
    pub fn new(lower: LatticePoint, upper: LatticePoint) -> Result<Self> {
        if lower.dim() != upper.dim() {
            return usage(format!("window bounds have dimensions {} and {}", lower.dim(), upper.dim()));
        }
        if lower.coords().iter().zip(upper.coords()).any(|(l, u)| l > u) {
            return usage(format!("window lower bound {lower} exceeds upper bound {upper}"));
        }
        Ok(Window { lower, upper })
    }

    /// `[lo, hi]^d`.
    pub fn cube(dim: usize, lo: i64, hi: i64) -> Result<Self> {
        Window::new(LatticePoint::new(vec![lo; dim]), LatticePoint::new(vec![hi; dim]))
    }

    /// `[-radius, radius]^d`.
    pub fn centered(dim: usize, radius: i64) -> Result<Self> {
        Window::cube(dim, -radius, radius)
    }

    /// Smallest box containing every point.
    pub fn bounding(points: &[LatticePoint]) -> Result<Self> {
        let Some(first) = points.first() else {
            return usage("cannot bound an empty point set");
        };
        let d = first.dim();
        let mut lo = first.coords().to_vec();
        let mut hi = lo.clone();
        for p in points {
            if p.dim() != d {
                return usage("points of mixed dimension");
            }
            for j in 0..d {
                lo[j] = lo[j].min(p.coords()[j]);
                hi[j] = hi[j].max(p.coords()[j]);
            }
        }
        Window::new(LatticePoint::new(lo), LatticePoint::new(hi))
    }

    pub fn lower(&self) -> &LatticePoint {
        &self.lower
    }

    pub fn upper(&self) -> &LatticePoint {
        &self.upper
    }

    pub fn dim(&self) -> usize {
        self.lower.dim()
    }

    /// Number of points per coordinate.
    pub fn extents(&self) -> Vec<usize> {
        self.lower.coords().iter().zip(self.upper.coords()).map(|(l, u)| (u - l + 1) as usize).collect()
    }

    pub fn len(&self) -> usize {
        self.extents().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, p: &LatticePoint) -> bool {
        p.dim() == self.dim() && self.contains_coords(p.coords())
    }

    pub(crate) fn contains_coords(&self, c: &[i64]) -> bool {
        c.iter().zip(self.lower.coords().iter().zip(self.upper.coords())).all(|(x, (l, u))| l <= x && x <= u)
    }

    pub fn contains_window(&self, other: &Window) -> bool {
        self.contains(&other.lower) && self.contains(&other.upper)
    }

    pub fn index_of(&self, p: &LatticePoint) -> Option<usize> {
        if p.dim() != self.dim() {
            return None;
        }
        self.index_of_coords(p.coords())
    }

    pub(crate) fn index_of_coords(&self, c: &[i64]) -> Option<usize> {
        let mut idx = 0usize;
        for ((&x, &l), &u) in c.iter().zip(self.lower.coords()).zip(self.upper.coords()) {
            if x < l || x > u {
                return None;
            }
            idx = idx * (u - l + 1) as usize + (x - l) as usize;
        }
        Some(idx)
    }

    pub(crate) fn coords_at(&self, mut idx: usize, out: &mut [i64]) {
        let lo = self.lower.coords();
        let hi = self.upper.coords();
        for j in (0..lo.len()).rev() {
            let ext = (hi[j] - lo[j] + 1) as usize;
            out[j] = lo[j] + (idx % ext) as i64;
            idx /= ext;
        }
    }

    pub fn point_at(&self, idx: usize) -> LatticePoint {
        assert!(idx < self.len(), "index {idx} outside window of {} points", self.len());
        let mut c = vec![0; self.dim()];
        self.coords_at(idx, &mut c);
        LatticePoint(c)
    }

    pub fn origin_index(&self) -> Option<usize> {
        self.index_of(&LatticePoint::origin(self.dim()))
    }

    /// Points in storage (lexicographic) order.
    pub fn points(&self) -> impl Iterator<Item = LatticePoint> + '_ {
        (0..self.len()).map(move |i| self.point_at(i))
    }

    pub fn translate(&self, h: &LatticePoint) -> Window {
        Window { lower: &self.lower + h, upper: &self.upper + h }
    }

    /// Grows the box by `margin` points on every side.
    pub fn expand(&self, margin: i64) -> Result<Window> {
        let m = LatticePoint::new(vec![margin; self.dim()]);
        Window::new(&self.lower - &m, &self.upper + &m)
    }

    /// The set of differences `{a - b : a ∈ self, b ∈ other}`.
    pub fn difference_box(&self, other: &Window) -> Window {
        Window { lower: &self.lower - &other.upper, upper: &self.upper - &other.lower }
    }

    /// Smallest box containing both windows.
    pub fn hull(&self, other: &Window) -> Result<Window> {
        Window::bounding(&[self.lower.clone(), self.upper.clone(), other.lower.clone(), other.upper.clone()])
    }

    /// Restriction to the coordinates `range`.
    pub fn project(&self, range: std::ops::Range<usize>) -> Window {
        Window {
            lower: LatticePoint(self.lower.coords()[range.clone()].to_vec()),
            upper: LatticePoint(self.upper.coords()[range].to_vec()),
        }
    }

    /// Marks the points lying on the outer shell of the box.
    pub fn shell_mask(&self) -> Vec<bool> {
        let lo = self.lower.coords();
        let hi = self.upper.coords();
        let mut c = vec![0; self.dim()];
        (0..self.len())
            .map(|i| {
                self.coords_at(i, &mut c);
                c.iter().enumerate().any(|(j, &x)| x == lo[j] || x == hi[j])
            })
            .collect()
    }

    /// Sup-norm of every point, in storage order.
    pub(crate) fn sup_norms(&self) -> Vec<i64> {
        let mut c = vec![0; self.dim()];
        (0..self.len())
            .map(|i| {
                self.coords_at(i, &mut c);
                c.iter().map(|x| x.abs()).max().unwrap_or(0)
            })
            .collect()
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lower, self.upper)
    }
}

/// Every point of `w` exactly once, ascending in `order`.
pub fn window_points(w: &Window, order: LatticeOrder) -> Vec<LatticePoint> {
    order.sequence(w).into_iter().map(|i| w.point_at(i)).collect()
}

/// Which random object a sample realizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FieldTag {
    /// Spectral field.
    Z,
    /// Spectral tail field, `Θ(0) = 1`.
    Theta,
    /// Tail field `RΘ`, `Y(0) > 1`.
    Y,
    /// Max-stable field.
    X,
}

/// Non-negative field values on a window. Points outside the window are
/// absent and read as zero.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FieldSample {
    pub window: Window,
    pub values: Vec<f64>,
    pub tag: FieldTag,
    /// Importance weight, set by tilted samplers.
    pub weight: Option<f64>,
}

impl FieldSample {
    pub fn new(window: Window, values: Vec<f64>, tag: FieldTag) -> Result<Self> {
        if values.len() != window.len() {
            return usage(format!("{} values supplied for a window of {} points", values.len(), window.len()));
        }
        if values.iter().any(|v| !(*v >= 0.0)) {
            return usage("field values must be non-negative");
        }
        Ok(FieldSample { window, values, tag, weight: None })
    }

    /// Value at `p`, zero outside the stored window.
    pub fn get(&self, p: &LatticePoint) -> f64 {
        self.window.index_of(p).map_or(0.0, |i| self.values[i])
    }

    pub fn scaled(&self, c: f64) -> FieldSample {
        FieldSample { values: self.values.iter().map(|v| v * c).collect(), ..self.clone() }
    }
}

/// `B^h f`: the sample translated by `h`, i.e. `result(t) = f(t - h)`.
pub fn shift_field(f: &FieldSample, h: &LatticePoint) -> FieldSample {
    FieldSample { window: f.window.translate(h), ..f.clone() }
}
