//! Anchoring functionals and path statistics on window-truncated samples.
//!
//! An anchoring map `I` picks a lattice point of a path such that
//! `f(I(f)) ≥ min(f(0), 1)` and `I(B^h f) = I(f) + h`. The built-in maps are
//! the first/last maximum and first/last exceedance of level 1 under a
//! translation-invariant order.

use serde::Serialize;

use crate::error::{usage, Result};
use crate::lattice::{shift_field, FieldSample, FieldTag, LatticeOrder, LatticePoint, Window};

/// A path statistic is flagged as possibly divergent when the outer shell of
/// the window carries more than this share of its "fair" mass
/// `shell_points / window_points`.
pub const DEFAULT_TAIL_SHARE: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AnchorKind {
    FirstMax,
    LastMax,
    FirstExceed,
    LastExceed,
}

impl AnchorKind {
    pub fn name(self) -> &'static str {
        match self {
            AnchorKind::FirstMax => "first_max",
            AnchorKind::LastMax => "last_max",
            AnchorKind::FirstExceed => "first_exceed",
            AnchorKind::LastExceed => "last_exceed",
        }
    }

    /// Exceedance maps act on `Y`, maximum maps on `Θ`.
    pub fn is_exceedance(self) -> bool {
        matches!(self, AnchorKind::FirstExceed | AnchorKind::LastExceed)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AnchorMap {
    pub kind: AnchorKind,
    pub order: LatticeOrder,
}

impl AnchorMap {
    pub fn new(kind: AnchorKind, order: LatticeOrder) -> Self {
        AnchorMap { kind, order }
    }

    pub fn apply(&self, f: &FieldSample) -> Anchored {
        let seq = self.order.sequence(&f.window);
        let at = anchor_in(&f.values, &seq, self.kind);
        let boundary = at.is_some_and(|i| on_shell(&f.window, i));
        Anchored { result: at.map_or(AnchorResult::Infinity, |i| AnchorResult::At(f.window.point_at(i))), boundary }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AnchorResult {
    At(LatticePoint),
    Infinity,
}

/// An anchor plus whether the deciding point lies on the window's outer
/// shell (a hint that a larger window could change the answer).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Anchored {
    pub result: AnchorResult,
    pub boundary: bool,
}

pub fn first_max(f: &FieldSample, order: LatticeOrder) -> Anchored {
    AnchorMap::new(AnchorKind::FirstMax, order).apply(f)
}

pub fn last_max(f: &FieldSample, order: LatticeOrder) -> Anchored {
    AnchorMap::new(AnchorKind::LastMax, order).apply(f)
}

pub fn first_exceed(f: &FieldSample, order: LatticeOrder) -> Anchored {
    AnchorMap::new(AnchorKind::FirstExceed, order).apply(f)
}

pub fn last_exceed(f: &FieldSample, order: LatticeOrder) -> Anchored {
    AnchorMap::new(AnchorKind::LastExceed, order).apply(f)
}

/// Storage index chosen by `kind`, scanning `values` in the order `seq`.
pub(crate) fn anchor_in(values: &[f64], seq: &[usize], kind: AnchorKind) -> Option<usize> {
    match kind {
        AnchorKind::FirstMax | AnchorKind::LastMax => {
            let m = values.iter().copied().fold(0.0, f64::max);
            if m <= 0.0 {
                return None;
            }
            if kind == AnchorKind::FirstMax {
                seq.iter().copied().find(|&i| values[i] == m)
            } else {
                seq.iter().rev().copied().find(|&i| values[i] == m)
            }
        }
        AnchorKind::FirstExceed => seq.iter().copied().find(|&i| values[i] > 1.0),
        AnchorKind::LastExceed => seq.iter().rev().copied().find(|&i| values[i] > 1.0),
    }
}

fn on_shell(w: &Window, i: usize) -> bool {
    let p = w.point_at(i);
    p.coords().iter().zip(w.lower().coords().iter().zip(w.upper().coords())).any(|(c, (l, u))| c == l || c == u)
}

/// A window-truncated path statistic with its divergence flag.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PathStat {
    pub value: f64,
    pub tail_flag: bool,
}

/// Outer shell of a window, precomputed for repeated tail checks.
#[derive(Clone, Debug)]
pub struct Shell {
    mask: Vec<bool>,
    threshold: Option<f64>,
}

impl Shell {
    pub fn new(w: &Window, share: f64) -> Self {
        let mask = w.shell_mask();
        let k = mask.iter().filter(|&&s| s).count();
        // A window that is all shell has no interior to compare against.
        let threshold = (k < mask.len()).then(|| share * k as f64 / mask.len() as f64);
        Shell { mask, threshold }
    }

    /// Whether the shell holds more than its share of `Σ weights`.
    pub fn flags(&self, weights: impl Iterator<Item = f64>) -> bool {
        let Some(th) = self.threshold else {
            return false;
        };
        let (mut shell, mut total) = (0.0, 0.0);
        for (w, &s) in weights.zip(&self.mask) {
            total += w;
            if s {
                shell += w;
            }
        }
        total > 0.0 && shell > th * total
    }

    pub fn contains(&self, i: usize) -> bool {
        self.mask[i]
    }
}

/// `S(f) = Σ_t f^α(t)` over the window.
pub fn sum_alpha(f: &FieldSample, alpha: f64) -> PathStat {
    let shell = Shell::new(&f.window, DEFAULT_TAIL_SHARE);
    let powered = || f.values.iter().map(|v| pow_alpha(*v, alpha));
    PathStat { value: powered().sum(), tail_flag: shell.flags(powered()) }
}

/// `B(Y) = Σ_t 1(Y(t) > 1)` over the window; requires a `Y` sample.
pub fn exceed_count(f: &FieldSample) -> Result<PathStat> {
    if f.tag != FieldTag::Y {
        return usage(format!("exceedance counts need a Y sample, got {:?}", f.tag));
    }
    let shell = Shell::new(&f.window, DEFAULT_TAIL_SHARE);
    let ind = || f.values.iter().map(|&v| if v > 1.0 { 1.0 } else { 0.0 });
    Ok(PathStat { value: ind().sum(), tail_flag: shell.flags(ind()) })
}

#[inline]
pub(crate) fn pow_alpha(v: f64, alpha: f64) -> f64 {
    if alpha == 1.0 {
        v
    } else {
        v.powf(alpha)
    }
}

/// Outcome of checking the anchoring axioms on a set of samples.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnchoringReport {
    pub checked: usize,
    /// Samples where the chosen point violates `f(I(f)) ≥ min(f(0), 1)`.
    pub level_violations: usize,
    /// (sample, shift) pairs where `I(B^h f) ≠ I(f) + h`.
    pub shift_violations: usize,
    pub pass: bool,
}

/// Checks both anchoring conditions for `map` on every sample and shift.
pub fn check_anchoring<F>(map: F, samples: &[FieldSample], shifts: &[LatticePoint]) -> AnchoringReport
where
    F: Fn(&FieldSample) -> AnchorResult,
{
    let mut level = 0;
    let mut shift = 0;
    for f in samples {
        let base = map(f);
        if let AnchorResult::At(p) = &base {
            let origin = LatticePoint::origin(f.window.dim());
            if f.get(p) < f.get(&origin).min(1.0) {
                level += 1;
            }
        }
        for h in shifts {
            let expected = match &base {
                AnchorResult::At(p) => AnchorResult::At(p + h),
                AnchorResult::Infinity => AnchorResult::Infinity,
            };
            if map(&shift_field(f, h)) != expected {
                shift += 1;
            }
        }
    }
    AnchoringReport {
        checked: samples.len(),
        level_violations: level,
        shift_violations: shift,
        pass: level == 0 && shift == 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f1(lo: i64, values: &[f64], tag: FieldTag) -> FieldSample {
        let w = Window::cube(1, lo, lo + values.len() as i64 - 1).unwrap();
        FieldSample::new(w, values.to_vec(), tag).unwrap()
    }

    fn at(c: i64) -> AnchorResult {
        AnchorResult::At(LatticePoint::from(c))
    }

    const LEX: LatticeOrder = LatticeOrder::Lexicographic;

    #[test]
    fn first_max_examples() {
        assert_eq!(first_max(&f1(-1, &[0.2, 1.0, 0.7], FieldTag::Theta), LEX).result, at(0));
        let two_peaks = f1(-1, &[1.0, 0.0, 0.0, 0.0, 1.0], FieldTag::Theta);
        assert_eq!(first_max(&two_peaks, LEX).result, at(-1));
        assert_eq!(last_max(&two_peaks, LEX).result, at(3));
        assert_eq!(first_max(&f1(0, &[0.0, 0.0], FieldTag::Theta), LEX).result, AnchorResult::Infinity);
    }

    #[test]
    fn first_exceed_examples() {
        assert_eq!(first_exceed(&f1(-1, &[0.5, 2.0, 3.0], FieldTag::Y), LEX).result, at(0));
        assert_eq!(first_exceed(&f1(-1, &[1.5, 2.0], FieldTag::Y), LEX).result, at(-1));
        assert_eq!(last_exceed(&f1(-1, &[1.5, 2.0, 0.3], FieldTag::Y), LEX).result, at(0));
        assert_eq!(first_exceed(&f1(-1, &[1.0, 0.5], FieldTag::Y), LEX).result, AnchorResult::Infinity);
    }

    #[test]
    fn first_exceed_is_not_homogeneous() {
        let f = f1(0, &[2.0], FieldTag::Y);
        assert_eq!(first_exceed(&f, LEX).result, at(0));
        assert_eq!(first_exceed(&f.scaled(0.4), LEX).result, AnchorResult::Infinity);
    }

    #[test]
    fn path_statistics() {
        let w = Window::centered(1, 10).unwrap();
        let alt: Vec<f64> = w.points().map(|p| if p.coords()[0] % 2 == 0 { 1.0 } else { 0.0 }).collect();
        let theta = FieldSample::new(w.clone(), alt.clone(), FieldTag::Theta).unwrap();
        let s = sum_alpha(&theta, 1.0);
        assert_eq!(s.value, 11.0);
        assert!(s.tail_flag);
        let y = FieldSample::new(w.clone(), alt.iter().map(|v| v * 1.7).collect(), FieldTag::Y).unwrap();
        let b = exceed_count(&y).unwrap();
        assert_eq!(b.value, 11.0);
        assert!(b.tail_flag);
        assert!(exceed_count(&theta).is_err());

        let mut ind = vec![0.0; w.len()];
        ind[10] = 1.0;
        let theta = FieldSample::new(w.clone(), ind, FieldTag::Theta).unwrap();
        assert_eq!(sum_alpha(&theta, 1.0), PathStat { value: 1.0, tail_flag: false });

        // Sequence c = (3, 1): the two atoms of Θ.
        let a1 = f1(-1, &[0.0, 1.0, 1.0 / 3.0], FieldTag::Theta);
        let a2 = f1(-1, &[3.0, 1.0, 0.0], FieldTag::Theta);
        assert!((sum_alpha(&a1, 1.0).value - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(sum_alpha(&a2, 1.0).value, 4.0);
    }

    #[test]
    fn anchoring_axioms() {
        let samples: Vec<FieldSample> = (0..20)
            .map(|k| f1(-3, &[0.1, 0.4 * k as f64, 1.0, 0.9, 0.3 + 0.05 * k as f64, 0.0, 0.2], FieldTag::Theta))
            .collect();
        let shifts: Vec<LatticePoint> = (-3..=3).map(LatticePoint::from).collect();
        for kind in [AnchorKind::FirstMax, AnchorKind::LastMax, AnchorKind::FirstExceed, AnchorKind::LastExceed] {
            let map = AnchorMap::new(kind, LEX);
            let r = check_anchoring(|f| map.apply(f).result, &samples, &shifts);
            assert!(r.pass, "{kind:?}: {r:?}");
        }
        let r = check_anchoring(|_| at(0), &samples, &shifts);
        assert!(!r.pass);
        assert!(r.shift_violations > 0);
    }
}
