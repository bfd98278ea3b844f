//! Max-stable fields through the de Haan series
//! `X(t) = max_i Γ_i^{-1/α} Z_i(t)`, and finite-dimensional distributions
//! through spectral expectations.

use rand::Rng;
use rand_distr::Exp1;
use serde::Serialize;

use crate::error::{usage, Result};
use crate::lattice::{FieldSample, FieldTag, LatticeOrder, LatticePoint, Window};
use crate::mc::{self, McSpec};
use crate::report::EstimateReport;
use crate::spectral::{ModelSpec, SpectralRoute, SpectralSampler, ThetaSampler};

/// Truncation control for the de Haan series.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeriesControl {
    pub max_terms: usize,
    /// Quantile of `max_t Z(t)` used as the stopping bound when no
    /// almost-sure bound is known.
    pub quantile_guard: f64,
    /// Stop once `Γ^{-1/α} q̂ < relative_floor · min_t X(t)`.
    pub relative_floor: f64,
}

impl Default for SeriesControl {
    fn default() -> Self {
        SeriesControl { max_terms: 100_000, quantile_guard: 0.9999, relative_floor: 1.0 }
    }
}

impl SeriesControl {
    pub fn validate(&self) -> Result<()> {
        if self.max_terms == 0 {
            return usage("max_terms must be at least 1");
        }
        if !(self.quantile_guard > 0.0 && self.quantile_guard < 1.0) {
            return usage("quantile_guard must lie in (0, 1)");
        }
        if !(self.relative_floor > 0.0) {
            return usage("relative_floor must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// No later term can change the result (exactly, when the bound is an
    /// almost-sure bound).
    Bound,
    /// `max_terms` reached.
    Budget,
}

/// Reusable simulator: one spectral sampler plus its stopping bound.
#[derive(Clone, Debug)]
pub struct MaxStableSimulator {
    z: SpectralSampler,
    alpha: f64,
    bound: f64,
    exact_bound: bool,
    ctrl: SeriesControl,
}

impl MaxStableSimulator {
    /// `pilot_seed` drives the pilot run that estimates the quantile bound
    /// when the spectral field has no almost-sure bound.
    pub fn new(
        model: &ModelSpec,
        w: &Window,
        route: SpectralRoute,
        ctrl: SeriesControl,
        pilot_seed: u64,
    ) -> Result<Self> {
        ctrl.validate()?;
        let z = SpectralSampler::new(model, w, route)?;
        let alpha = model.alpha();
        let (bound, exact_bound) = match z.bound() {
            Some(b) => (b, true),
            None => (pilot_quantile(&z, ctrl.quantile_guard, pilot_seed)?, false),
        };
        Ok(MaxStableSimulator { z, alpha, bound, exact_bound, ctrl })
    }

    pub fn window(&self) -> &Window {
        self.z.window()
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn has_exact_bound(&self) -> bool {
        self.exact_bound
    }

    /// Fills `out` with `X` on the window.
    pub fn simulate_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) -> StopReason {
        out.iter_mut().for_each(|v| *v = 0.0);
        let mut buf = vec![0.0; out.len()];
        let mut gamma = 0.0;
        let mut floor = 0.0;
        for _ in 0..self.ctrl.max_terms {
            gamma += rng.sample::<f64, _>(Exp1);
            let g = gamma.powf(-1.0 / self.alpha);
            if g * self.bound < self.ctrl.relative_floor * floor {
                return StopReason::Bound;
            }
            self.z.sample_into(rng, &mut buf);
            let mut min = f64::INFINITY;
            for (x, z) in out.iter_mut().zip(&buf) {
                *x = x.max(g * z);
                min = min.min(*x);
            }
            floor = min;
        }
        StopReason::Budget
    }

    /// `max_t X(t)` over the window, with the cheaper scalar stopping rule.
    pub fn simulate_max<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, StopReason) {
        let mut buf = vec![0.0; self.z.window().len()];
        let mut gamma = 0.0;
        let mut m = 0.0f64;
        for _ in 0..self.ctrl.max_terms {
            gamma += rng.sample::<f64, _>(Exp1);
            let g = gamma.powf(-1.0 / self.alpha);
            if g * self.bound < self.ctrl.relative_floor * m {
                return (m, StopReason::Bound);
            }
            self.z.sample_into(rng, &mut buf);
            m = buf.iter().fold(m, |acc, z| acc.max(g * z));
        }
        (m, StopReason::Budget)
    }
}

fn pilot_quantile(z: &SpectralSampler, guard: f64, seed: u64) -> Result<f64> {
    let n = (10.0 / (1.0 - guard)).ceil().max(10_000.0) as usize;
    let len = z.window().len();
    let mut maxima = mc::collect(
        &McSpec::new(n, seed ^ 0x5EED0FB00D),
        || vec![0.0; len],
        |buf, rng| {
            z.sample_into(rng, buf);
            Ok(buf.iter().copied().fold(0.0, f64::max))
        },
    )?;
    maxima.sort_by(f64::total_cmp);
    let k = ((guard * n as f64).ceil() as usize).min(n - 1);
    Ok(maxima[k])
}

/// One realization of `X` on `w` and the reason the series stopped.
pub fn simulate_maxstable<R: Rng + ?Sized>(
    model: &ModelSpec,
    w: &Window,
    ctrl: SeriesControl,
    route: SpectralRoute,
    rng: &mut R,
) -> Result<(FieldSample, StopReason)> {
    let sim = MaxStableSimulator::new(model, w, route, ctrl, rng.random())?;
    let mut values = vec![0.0; w.len()];
    let stop = sim.simulate_into(rng, &mut values);
    Ok((FieldSample { window: w.clone(), values, tag: FieldTag::X, weight: None }, stop))
}

/// `max(p^{1/α} η_1, (1 − p)^{1/α} η_2)` for independent max-stable fields
/// `η_1`, `η_2`; with `α = 1` this is `max(p η_1, (1 − p) η_2)`.
#[derive(Clone, Debug)]
pub struct MixtureSimulator {
    weights: (f64, f64),
    first: MaxStableSimulator,
    second: MaxStableSimulator,
}

impl MixtureSimulator {
    pub fn new(
        p: f64,
        m1: &ModelSpec,
        m2: &ModelSpec,
        w: &Window,
        route: SpectralRoute,
        ctrl: SeriesControl,
        pilot_seed: u64,
    ) -> Result<Self> {
        ModelSpec::mixture(p, m1.clone(), m2.clone()).validate()?;
        let alpha = m1.alpha();
        Ok(MixtureSimulator {
            weights: (p.powf(1.0 / alpha), (1.0 - p).powf(1.0 / alpha)),
            first: MaxStableSimulator::new(m1, w, route, ctrl, pilot_seed)?,
            second: MaxStableSimulator::new(m2, w, route, ctrl, pilot_seed.wrapping_add(1))?,
        })
    }

    /// Returns `Budget` when either component hit the term budget.
    pub fn simulate_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) -> StopReason {
        let mut other = vec![0.0; out.len()];
        let s1 = self.first.simulate_into(rng, out);
        let s2 = self.second.simulate_into(rng, &mut other);
        for (x, y) in out.iter_mut().zip(&other) {
            *x = (self.weights.0 * *x).max(self.weights.1 * y);
        }
        worse(s1, s2)
    }

    pub fn simulate_max<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, StopReason) {
        let (a, s1) = self.first.simulate_max(rng);
        let (b, s2) = self.second.simulate_max(rng);
        ((self.weights.0 * a).max(self.weights.1 * b), worse(s1, s2))
    }
}

fn worse(a: StopReason, b: StopReason) -> StopReason {
    if a == StopReason::Budget || b == StopReason::Budget {
        StopReason::Budget
    } else {
        StopReason::Bound
    }
}

pub fn sample_mixture_x<R: Rng + ?Sized>(
    p: f64,
    m1: &ModelSpec,
    m2: &ModelSpec,
    w: &Window,
    ctrl: SeriesControl,
    rng: &mut R,
) -> Result<(FieldSample, StopReason)> {
    let sim = MixtureSimulator::new(p, m1, m2, w, SpectralRoute::default(), ctrl, rng.random())?;
    let mut values = vec![0.0; w.len()];
    let stop = sim.simulate_into(rng, &mut values);
    Ok((FieldSample { window: w.clone(), values, tag: FieldTag::X, weight: None }, stop))
}

fn check_fidi_args(model: &ModelSpec, points: &[LatticePoint], thresholds: &[f64]) -> Result<Window> {
    if points.is_empty() {
        return usage("fidi evaluation needs at least one point");
    }
    if points.len() != thresholds.len() {
        return usage(format!("{} points but {} thresholds", points.len(), thresholds.len()));
    }
    if thresholds.iter().any(|x| !(*x > 0.0)) {
        return usage("thresholds must be positive (+inf allowed)");
    }
    for (i, p) in points.iter().enumerate() {
        if p.dim() != model.dim() {
            return usage(format!("point {p} has the wrong dimension"));
        }
        if points[..i].contains(p) {
            return usage(format!("point {p} listed twice"));
        }
    }
    Window::bounding(points)
}

/// `x^{-α}`, zero for infinite thresholds.
fn inv_pow(x: f64, alpha: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        x.powf(-alpha)
    }
}

/// `−ln P(X(t_i) ≤ x_i, i ≤ n) = E max_i Z^α(t_i) x_i^{-α}`, by Monte Carlo.
pub fn fidi_neglog(
    model: &ModelSpec,
    points: &[LatticePoint],
    thresholds: &[f64],
    route: SpectralRoute,
    spec: &McSpec,
) -> Result<EstimateReport> {
    let bbox = check_fidi_args(model, points, thresholds)?;
    let z = SpectralSampler::new(model, &bbox, route)?;
    let alpha = model.alpha();
    let idx: Vec<usize> = points.iter().map(|p| bbox.index_of(p).expect("inside bounding box")).collect();
    let scale: Vec<f64> = thresholds.iter().map(|&x| inv_pow(x, alpha)).collect();
    let m = mc::replicate(
        spec,
        1,
        || vec![0.0; bbox.len()],
        |buf, rng, out| {
            z.sample_into(rng, buf);
            out[0] = idx.iter().zip(&scale).map(|(&i, s)| buf[i].powf(alpha) * s).fold(0.0, f64::max);
            Ok(())
        },
    )?;
    Ok(EstimateReport::from_moments("fidi_neglog", &m[0]).with_window(&bbox))
}

/// The same quantity through the tail field and the first-maximum anchor:
/// `Σ_i x_i^{-α} P(first max of (Θ(t_j − t_i)/x_j)_j is at j = i)`.
pub fn fidi_neglog_anchored(
    model: &ModelSpec,
    points: &[LatticePoint],
    thresholds: &[f64],
    order: LatticeOrder,
    spec: &McSpec,
) -> Result<EstimateReport> {
    let bbox = check_fidi_args(model, points, thresholds)?;
    let domain = bbox.difference_box(&bbox);
    let theta = ThetaSampler::new(model, &domain)?;
    let alpha = model.alpha();
    let n = points.len();
    // Points sorted by the order; the anchor scan runs in this sequence.
    let mut sorted: Vec<usize> = (0..n).collect();
    sorted.sort_by(|&a, &b| crate::lattice::order_compare(order, &points[a], &points[b]).expect("same dimension"));
    // diff[i][k]: domain index of t_k − t_i.
    let diff: Vec<Vec<usize>> = points
        .iter()
        .map(|ti| points.iter().map(|tk| domain.index_of(&(tk - ti)).expect("inside difference box")).collect())
        .collect();
    let scale: Vec<f64> = thresholds.iter().map(|&x| inv_pow(x, alpha)).collect();
    let m = mc::replicate(
        spec,
        1,
        || vec![0.0; domain.len()],
        |buf, rng, out| {
            theta.sample(rng, buf);
            let mut total = 0.0;
            for i in 0..n {
                if scale[i] == 0.0 {
                    continue;
                }
                let mut best = usize::MAX;
                let mut best_v = f64::NEG_INFINITY;
                for &k in &sorted {
                    let v = buf[diff[i][k]].powf(alpha) * scale[k];
                    if v > best_v {
                        best_v = v;
                        best = k;
                    }
                }
                if best == i {
                    total += scale[i];
                }
            }
            out[0] = total;
            Ok(())
        },
    )?;
    Ok(EstimateReport::from_moments("fidi_neglog_anchored", &m[0]).with_window(&domain))
}

/// `P(Y_h(t_i) ≤ x_i, i ≤ n) = E[max(Z^α(h), m) − m]`,
/// `m = max_i Z^α(t_i) x_i^{-α}`.
pub fn y_fidi_cdf(
    model: &ModelSpec,
    h: &LatticePoint,
    points: &[LatticePoint],
    thresholds: &[f64],
    route: SpectralRoute,
    spec: &McSpec,
) -> Result<EstimateReport> {
    check_fidi_args(model, points, thresholds)?;
    let mut all = points.to_vec();
    all.push(h.clone());
    let bbox = Window::bounding(&all)?;
    let z = SpectralSampler::new(model, &bbox, route)?;
    let alpha = model.alpha();
    let hi = bbox.index_of(h).expect("inside bounding box");
    let idx: Vec<usize> = points.iter().map(|p| bbox.index_of(p).expect("inside bounding box")).collect();
    let scale: Vec<f64> = thresholds.iter().map(|&x| inv_pow(x, alpha)).collect();
    let m = mc::replicate(
        spec,
        1,
        || vec![0.0; bbox.len()],
        |buf, rng, out| {
            z.sample_into(rng, buf);
            let m = idx.iter().zip(&scale).map(|(&i, s)| buf[i].powf(alpha) * s).fold(0.0, f64::max);
            out[0] = buf[hi].powf(alpha).max(m) - m;
            Ok(())
        },
    )?;
    Ok(EstimateReport::from_moments("y_fidi_cdf", &m[0]).with_window(&bbox))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::stream;
    use crate::spectral::Variogram;

    fn pts(c: &[i64]) -> Vec<LatticePoint> {
        c.iter().map(|&x| LatticePoint::from(x)).collect()
    }

    #[test]
    fn independent_anchored_fidis_are_exact() {
        let ind = ModelSpec::Independent { dim: 1 };
        let spec = McSpec::new(200, 1);
        let r = fidi_neglog_anchored(&ind, &pts(&[0]), &[1.0], LatticeOrder::Lexicographic, &spec).unwrap();
        assert_eq!((r.estimate, r.stderr), (1.0, 0.0));
        let r = fidi_neglog_anchored(&ind, &pts(&[0, 1]), &[1.0, 1.0], LatticeOrder::Lexicographic, &spec).unwrap();
        assert_eq!((r.estimate, r.stderr), (2.0, 0.0));
    }

    #[test]
    fn single_point_fidi_is_reciprocal_threshold() {
        let m = ModelSpec::sequence(&[3.0, 1.0], 1.0).unwrap();
        let spec = McSpec::new(50_000, 2);
        let r = fidi_neglog(&m, &pts(&[0]), &[2.0], SpectralRoute::default(), &spec).unwrap();
        // A single-point box: Z(0) = 1 on every replicate.
        assert_eq!(r.estimate, 0.5);
        let r = fidi_neglog(&m, &pts(&[0, 3]), &[2.0, f64::INFINITY], SpectralRoute::default(), &spec).unwrap();
        assert!(r.within(0.5, 4.0), "{r:?}");
    }

    #[test]
    fn y_fidi_edge_cases() {
        let m = ModelSpec::brown_resnick(Variogram::linear(1.0), 1);
        let spec = McSpec::new(20_000, 3);
        let h = LatticePoint::from(0);
        let r = y_fidi_cdf(&m, &h, &pts(&[0]), &[1.0], SpectralRoute::Direct, &spec).unwrap();
        assert_eq!(r.estimate, 0.0);
        let r = y_fidi_cdf(&m, &h, &pts(&[0]), &[1e6], SpectralRoute::Direct, &spec).unwrap();
        assert!((r.estimate - (1.0 - 1e-6)).abs() < 1e-12);
    }

    #[test]
    fn independent_simulation_stops_on_the_bound() {
        let w = Window::cube(1, 0, 9).unwrap();
        let sim = MaxStableSimulator::new(
            &ModelSpec::Independent { dim: 1 },
            &w,
            SpectralRoute::default(),
            SeriesControl::default(),
            0,
        )
        .unwrap();
        assert!(sim.has_exact_bound());
        let mut rng = stream(4, 0);
        let mut out = vec![0.0; 10];
        for _ in 0..100 {
            assert_eq!(sim.simulate_into(&mut rng, &mut out), StopReason::Bound);
            assert!(out.iter().all(|&x| x > 0.0));
        }
    }

    #[test]
    fn argument_errors() {
        let m = ModelSpec::Independent { dim: 1 };
        let spec = McSpec::new(10, 0);
        assert!(fidi_neglog(&m, &[], &[], SpectralRoute::default(), &spec).is_err());
        assert!(fidi_neglog(&m, &pts(&[0, 0]), &[1.0, 1.0], SpectralRoute::default(), &spec).is_err());
        assert!(fidi_neglog(&m, &pts(&[0]), &[-1.0], SpectralRoute::default(), &spec).is_err());
    }
}
