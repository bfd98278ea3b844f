//! Statistical checks of the structural identities a spectral tail field
//! must satisfy: the tilt-shift formulas for `Z` and `Θ`, the tilt identity
//! for `Y`, and the finite-dimensional law of `Y_h` against conditional
//! simulation.
//!
//! Both sides of an identity are estimated on the same samples and compared
//! through the per-replicate difference, so `z = mean(d) / stderr(d)`.

use serde::Serialize;

use crate::dehaan::{y_fidi_cdf, MaxStableSimulator, SeriesControl};
use crate::error::{usage, Result};
use crate::functionals::{anchor_in, pow_alpha, AnchorKind};
use crate::lattice::{FieldSample, LatticeOrder, LatticePoint, Window};
use crate::mc::{self, McSpec, Moments};
use crate::report::{z_of, EstimateReport};
use crate::spectral::{pareto, ModelSpec, SpectralRoute, SpectralSampler, ThetaSampler};

/// Pass threshold in standard errors.
pub const PASS_Z: f64 = 4.0;

/// Bounded functionals used as test functions. All are 0-homogeneous.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunctional {
    /// `f(a) / (f(a) + f(b))`, `0/0 := 0`.
    CoordinateRatio { a: LatticePoint, b: LatticePoint },
    /// `1(first maximum of f over region is j)`.
    AnchorIndicator { j: LatticePoint, region: Window, order: LatticeOrder },
    /// `1(f(a) > c f(0))`.
    ExceedIndicator { a: LatticePoint, c: f64 },
}

impl TestFunctional {
    pub fn ratio(a: i64, b: i64) -> Self {
        TestFunctional::CoordinateRatio { a: LatticePoint::from(a), b: LatticePoint::from(b) }
    }

    pub fn exceed(a: i64, c: f64) -> Self {
        TestFunctional::ExceedIndicator { a: LatticePoint::from(a), c }
    }

    /// First maximum over `[lo, hi]` (`d = 1`) sits at `j`.
    pub fn anchor(j: i64, lo: i64, hi: i64) -> Self {
        TestFunctional::AnchorIndicator {
            j: LatticePoint::from(j),
            region: Window::cube(1, lo, hi).expect("lo <= hi"),
            order: LatticeOrder::Lexicographic,
        }
    }

    /// The points the functional reads.
    pub fn support(&self) -> Window {
        let pts = match self {
            TestFunctional::CoordinateRatio { a, b } => vec![a.clone(), b.clone()],
            TestFunctional::AnchorIndicator { j, region, .. } => {
                vec![region.lower().clone(), region.upper().clone(), j.clone()]
            }
            TestFunctional::ExceedIndicator { a, .. } => vec![a.clone(), LatticePoint::origin(a.dim())],
        };
        Window::bounding(&pts).expect("non-empty")
    }

    pub fn dim(&self) -> usize {
        self.support().dim()
    }

    pub fn eval(&self, f: &FieldSample) -> f64 {
        let w = f.window.hull(&self.support()).expect("same dimension");
        let mut values = vec![0.0; w.len()];
        for (p, v) in f.window.points().zip(&f.values) {
            values[w.index_of(&p).expect("hull")] = *v;
        }
        self.compile(&w, &LatticePoint::origin(w.dim())).eval(&values)
    }

    /// Index form reading `g(p) = f(p − shift)` from buffers on `w`.
    fn compile(&self, w: &Window, shift: &LatticePoint) -> Compiled {
        let at = |p: &LatticePoint| w.index_of(&(p - shift));
        match self {
            TestFunctional::CoordinateRatio { a, b } => Compiled::Ratio(at(a), at(b)),
            TestFunctional::AnchorIndicator { j, region, order } => {
                let pts = crate::lattice::window_points(region, *order);
                let target = pts.iter().position(|p| p == j);
                Compiled::Anchor(pts.iter().map(at).collect(), target)
            }
            TestFunctional::ExceedIndicator { a, c } => Compiled::Exceed(at(a), at(&LatticePoint::origin(a.dim())), *c),
        }
    }
}

enum Compiled {
    Ratio(Option<usize>, Option<usize>),
    Anchor(Vec<Option<usize>>, Option<usize>),
    Exceed(Option<usize>, Option<usize>, f64),
}

impl Compiled {
    fn eval(&self, v: &[f64]) -> f64 {
        let get = |i: &Option<usize>| i.map_or(0.0, |i| v[i]);
        match self {
            Compiled::Ratio(a, b) => {
                let (fa, fb) = (get(a), get(b));
                if fa + fb > 0.0 {
                    fa / (fa + fb)
                } else {
                    0.0
                }
            }
            Compiled::Anchor(idx, target) => {
                let vals: Vec<f64> = idx.iter().map(get).collect();
                let seq: Vec<usize> = (0..vals.len()).collect();
                let hit = anchor_in(&vals, &seq, AnchorKind::FirstMax);
                (hit.is_some() && hit == *target) as u8 as f64
            }
            Compiled::Exceed(a, o, c) => (get(a) > c * get(o)) as u8 as f64,
        }
    }
}

/// Two estimates of the same quantity and their paired comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityReport {
    pub name: String,
    pub lhs: EstimateReport,
    pub rhs: EstimateReport,
    pub z_score: f64,
    pub diff_stderr: f64,
    pub pass: bool,
    /// Too little data to decide; `pass` is false.
    pub inconclusive: bool,
}

impl IdentityReport {
    fn paired(name: String, m: &[Moments]) -> Self {
        let z = z_of(m[2].mean(), m[2].stderr());
        IdentityReport {
            name,
            lhs: EstimateReport::from_moments("lhs", &m[0]),
            rhs: EstimateReport::from_moments("rhs", &m[1]),
            z_score: z,
            diff_stderr: m[2].stderr(),
            pass: z.abs() <= PASS_Z,
            inconclusive: false,
        }
    }
}

fn check_dims(model: &ModelSpec, h: &LatticePoint, f: &TestFunctional) -> Result<()> {
    if h.dim() != model.dim() || f.dim() != model.dim() {
        return usage("shift, functional and model dimensions differ");
    }
    Ok(())
}

fn single(p: &LatticePoint) -> Window {
    Window::new(p.clone(), p.clone()).expect("a point is a window")
}

/// Smallest window holding `F` on the field, on its `h`-shift, and the
/// listed points.
fn check_window(f: &TestFunctional, h: &LatticePoint, extra: &[LatticePoint]) -> Result<Window> {
    let s = f.support();
    let mut w = s.hull(&s.translate(&-h))?;
    for p in extra {
        w = w.hull(&single(p))?;
    }
    Ok(w)
}

/// `E[Z^α(h) F(Z)] = E[Z^α(0) F(B^h Z)]`.
pub fn check_tsf_z(
    model: &ModelSpec,
    h: &LatticePoint,
    f: &TestFunctional,
    route: SpectralRoute,
    spec: &McSpec,
) -> Result<IdentityReport> {
    check_dims(model, h, f)?;
    let o = LatticePoint::origin(h.dim());
    let w = check_window(f, h, &[h.clone(), o.clone()])?;
    let z = SpectralSampler::new(model, &w, route)?;
    let alpha = model.alpha();
    let (hi, oi) = (w.index_of(h).unwrap(), w.index_of(&o).unwrap());
    let plain = f.compile(&w, &o);
    let shifted = f.compile(&w, h);
    let m = mc::replicate(
        spec,
        3,
        || vec![0.0; w.len()],
        |buf, rng, out| {
            z.sample_into(rng, buf);
            out[0] = pow_alpha(buf[hi], alpha) * plain.eval(buf);
            out[1] = pow_alpha(buf[oi], alpha) * shifted.eval(buf);
            out[2] = out[0] - out[1];
            Ok(())
        },
    )?;
    Ok(IdentityReport::paired(format!("tsf_z h={h}"), &m))
}

/// `E[Θ^α(h) F(Θ)] = E[F(B^h Θ) 1(Θ(−h) ≠ 0)]`.
pub fn check_tsf_theta(
    model: &ModelSpec,
    h: &LatticePoint,
    f: &TestFunctional,
    spec: &McSpec,
) -> Result<IdentityReport> {
    check_dims(model, h, f)?;
    let o = LatticePoint::origin(h.dim());
    let w = check_window(f, h, &[h.clone(), -h, o.clone()])?;
    let theta = ThetaSampler::new(model, &w)?;
    let alpha = model.alpha();
    let (hi, mi) = (w.index_of(h).unwrap(), w.index_of(&-h).unwrap());
    let plain = f.compile(&w, &o);
    let shifted = f.compile(&w, h);
    let m = mc::replicate(
        spec,
        3,
        || vec![0.0; w.len()],
        |buf, rng, out| {
            theta.sample(rng, buf);
            out[0] = pow_alpha(buf[hi], alpha) * plain.eval(buf);
            out[1] = if buf[mi] != 0.0 { shifted.eval(buf) } else { 0.0 };
            out[2] = out[0] - out[1];
            Ok(())
        },
    )?;
    Ok(IdentityReport::paired(format!("tsf_theta h={h}"), &m))
}

/// `E[F(Y) 1(Y(i) > 1/t)] = t^α E[F(B^i Y) 1(Y(−i) > t)]`.
pub fn check_tilt_identity(
    model: &ModelSpec,
    i: &LatticePoint,
    t: f64,
    f: &TestFunctional,
    spec: &McSpec,
) -> Result<IdentityReport> {
    check_dims(model, i, f)?;
    if !(t > 0.0) {
        return usage("t must be positive");
    }
    let o = LatticePoint::origin(i.dim());
    let w = check_window(f, i, &[i.clone(), -i, o.clone()])?;
    let theta = ThetaSampler::new(model, &w)?;
    let alpha = model.alpha();
    let (ii, mi) = (w.index_of(i).unwrap(), w.index_of(&-i).unwrap());
    let plain = f.compile(&w, &o);
    let shifted = f.compile(&w, i);
    let tw = t.powf(alpha);
    let m = mc::replicate(
        spec,
        3,
        || vec![0.0; w.len()],
        |buf, rng, out| {
            theta.sample(rng, buf);
            let r = pareto(rng, alpha);
            buf.iter_mut().for_each(|v| *v *= r);
            out[0] = if buf[ii] > 1.0 / t { plain.eval(buf) } else { 0.0 };
            out[1] = if buf[mi] > t { tw * shifted.eval(buf) } else { 0.0 };
            out[2] = out[0] - out[1];
            Ok(())
        },
    )?;
    Ok(IdentityReport::paired(format!("tilt i={i} t={t}"), &m))
}

/// Settings for [`check_y_fidi`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct YFidiConfig {
    /// Conditioning level for `X(h) > u`.
    pub u: f64,
    /// Absolute difference tolerated on top of the statistical error, for
    /// the bias of conditioning at a finite level.
    pub bias_allowance: f64,
    pub min_events: u64,
    pub series: SeriesControl,
    pub route: SpectralRoute,
}

impl Default for YFidiConfig {
    fn default() -> Self {
        YFidiConfig {
            u: 50.0,
            bias_allowance: 0.02,
            min_events: 500,
            series: SeriesControl::default(),
            route: SpectralRoute::default(),
        }
    }
}

/// Empirical `P(X(t_i) ≤ u x_i ∀i | X(h) > u)` from de Haan simulation,
/// against the spectral formula for `P(Y_h(t_i) ≤ x_i ∀i)`.
pub fn check_y_fidi(
    model: &ModelSpec,
    h: &LatticePoint,
    points: &[LatticePoint],
    thresholds: &[f64],
    cfg: &YFidiConfig,
    spec: &McSpec,
) -> Result<IdentityReport> {
    let rhs = y_fidi_cdf(model, h, points, thresholds, cfg.route, &spec.derive(1))?;
    let mut all = points.to_vec();
    all.push(h.clone());
    let w = Window::bounding(&all)?;
    let sim = MaxStableSimulator::new(model, &w, cfg.route, cfg.series, spec.seed ^ 0xF1D1)?;
    let hi = w.index_of(h).unwrap();
    let idx: Vec<usize> = points.iter().map(|p| w.index_of(p).unwrap()).collect();
    let m = mc::replicate(
        spec,
        2,
        || vec![0.0; w.len()],
        |buf, rng, out| {
            sim.simulate_into(rng, buf);
            if buf[hi] > cfg.u {
                out[0] = 1.0;
                out[1] = idx.iter().zip(thresholds).all(|(&i, &x)| buf[i] <= cfg.u * x) as u8 as f64;
            }
            Ok(())
        },
    )?;
    let events = (m[0].mean() * m[0].count() as f64).round() as u64;
    let (p, se) = if events > 0 {
        let p = m[1].mean() / m[0].mean();
        (p, (p * (1.0 - p) / events as f64).sqrt())
    } else {
        (f64::NAN, f64::NAN)
    };
    let mut lhs = EstimateReport::new("conditional_simulation", p, se, events).with_diag("u", cfg.u);
    lhs.window = Some(w);
    let diff = p - rhs.estimate;
    let se_d = se.hypot(rhs.stderr);
    let excess = (diff.abs() - cfg.bias_allowance).max(0.0);
    let z = z_of(diff.signum() * excess, se_d);
    let inconclusive = events < cfg.min_events;
    Ok(IdentityReport {
        name: format!("y_fidi h={h}"),
        lhs,
        rhs,
        z_score: if inconclusive { f64::NAN } else { z },
        diff_stderr: se_d,
        pass: !inconclusive && z.abs() <= PASS_Z,
        inconclusive,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentityKind {
    TsfZ,
    TsfTheta,
    Tilt,
}

/// One configured identity check. `t` is used by the tilt identity only.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityCase {
    pub kind: IdentityKind,
    pub shift: LatticePoint,
    pub functional: TestFunctional,
    pub t: f64,
}

fn axis(d: usize, k: i64) -> LatticePoint {
    let mut c = vec![0; d];
    c[0] = k;
    LatticePoint::new(c)
}

/// Embeds a one-dimensional functional along the first axis.
fn lift(f: &TestFunctional, d: usize) -> TestFunctional {
    let up = |p: &LatticePoint| axis(d, p.coords()[0]);
    match f {
        TestFunctional::CoordinateRatio { a, b } => TestFunctional::CoordinateRatio { a: up(a), b: up(b) },
        TestFunctional::AnchorIndicator { j, region, order } => TestFunctional::AnchorIndicator {
            j: up(j),
            region: Window::new(up(region.lower()), up(region.upper())).expect("ordered"),
            order: *order,
        },
        TestFunctional::ExceedIndicator { a, c } => TestFunctional::ExceedIndicator { a: up(a), c: *c },
    }
}

/// Twenty mixed checks of one identity, along the first axis.
pub fn standard_cases(kind: IdentityKind, d: usize) -> Vec<IdentityCase> {
    let functionals = [
        TestFunctional::ratio(0, 1),
        TestFunctional::ratio(-1, 2),
        TestFunctional::anchor(0, -2, 2),
        TestFunctional::exceed(1, 0.5),
    ];
    let shifts: [(i64, f64); 5] = match kind {
        IdentityKind::Tilt => [(1, 0.5), (1, 2.0), (-1, 1.0), (2, 0.5), (2, 2.0)],
        _ => [(1, 1.0), (2, 1.0), (-1, 1.0), (-2, 1.0), (3, 1.0)],
    };
    shifts
        .iter()
        .flat_map(|&(h, t)| {
            functionals.iter().map(move |f| IdentityCase { kind, shift: axis(d, h), functional: lift(f, d), t })
        })
        .collect()
}

/// Twenty checks chosen so that a tail field with `Θ(0) ≠ 1` violates every
/// one of them by an amount proportional to `Θ(0) − 1`. Used to measure the
/// power of the harness.
pub fn power_cases(kind: IdentityKind, d: usize) -> Vec<IdentityCase> {
    let case = |h: i64, f: TestFunctional, t: f64| IdentityCase { kind, shift: axis(d, h), functional: lift(&f, d), t };
    match kind {
        // `Var Z(h)` grows with `|h|` and dilutes the signal, so shifts stay
        // short and the functional varies instead.
        IdentityKind::TsfZ => [(1, 4), (-1, 4), (2, 4), (-2, 4), (3, 2), (-3, 2)]
            .iter()
            .flat_map(|&(h, k)| {
                [0, 1, -1, 2].into_iter().take(k).map(move |a| case(h, TestFunctional::exceed(a, 0.0), 1.0))
            })
            .collect(),
        IdentityKind::TsfTheta => [1, -1, 2, -2, 3]
            .iter()
            .flat_map(|&h| [0.9, 0.95, 1.0, 1.05].map(|c| case(h, TestFunctional::exceed(h, c), 1.0)))
            .collect(),
        IdentityKind::Tilt => [1.02, 1.03, 1.05, 1.07, 1.1]
            .iter()
            .flat_map(|&t| [0, 1, -1, 2].map(|a| case(0, TestFunctional::exceed(a, 0.0), t)))
            .collect(),
    }
}

pub fn run_case(model: &ModelSpec, case: &IdentityCase, route: SpectralRoute, spec: &McSpec) -> Result<IdentityReport> {
    let mut r = match case.kind {
        IdentityKind::TsfZ => check_tsf_z(model, &case.shift, &case.functional, route, spec)?,
        IdentityKind::TsfTheta => check_tsf_theta(model, &case.shift, &case.functional, spec)?,
        IdentityKind::Tilt => check_tilt_identity(model, &case.shift, case.t, &case.functional, spec)?,
    };
    r.name = format!("{} {:?}", r.name, case.functional);
    Ok(r)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub reports: Vec<IdentityReport>,
    pub passed: usize,
    pub total: usize,
    pub mean_abs_z: f64,
}

/// Runs every case with its own seed derived from `spec`.
pub fn run_suite(
    model: &ModelSpec,
    cases: &[IdentityCase],
    route: SpectralRoute,
    spec: &McSpec,
) -> Result<SuiteReport> {
    let reports: Vec<IdentityReport> = cases
        .iter()
        .enumerate()
        .map(|(k, c)| run_case(model, c, route, &spec.derive(k as u64 + 1)))
        .collect::<Result<_>>()?;
    let passed = reports.iter().filter(|r| r.pass).count();
    let finite: Vec<f64> = reports.iter().map(|r| r.z_score.abs()).filter(|z| z.is_finite()).collect();
    let mean_abs_z = if finite.is_empty() { f64::NAN } else { finite.iter().sum::<f64>() / finite.len() as f64 };
    Ok(SuiteReport { total: reports.len(), passed, reports, mean_abs_z })
}
