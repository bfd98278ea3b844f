//! Monte Carlo estimators of the extremal index `θ` of a stationary
//! max-stable field, one per equivalent formula, plus the Brown-Resnick
//! lower bound and the anti-clustering probe.
//!
//! Tail-field estimators are window truncations of lattice-wide
//! functionals. Each sample gets a tail flag when the outer shell of the
//! window carries a disproportionate part of `S(Θ) = Σ Θ^α`; the flag rate is
//! reported in the diagnostics. Ratio, exceedance and anchor estimators
//! report the raw truncated mean. The difference estimator counts flagged
//! samples as zero, the window version of its restriction to `S(Θ) < ∞`.

use serde::Serialize;

use crate::dehaan::{MaxStableSimulator, MixtureSimulator, SeriesControl, StopReason};
use crate::error::{usage, Result};
use crate::functionals::{anchor_in, pow_alpha, AnchorMap, Shell, DEFAULT_TAIL_SHARE};
use crate::lattice::{LatticeOrder, Window};
use crate::mc::{self, McSpec, Moments};
use crate::normal;
use crate::report::EstimateReport;
use crate::spectral::{pareto, ModelSpec, SpectralRoute, SpectralSampler, ThetaSampler, Variogram};

fn theta_sampler(model: &ModelSpec, w: &Window) -> Result<(ThetaSampler, usize)> {
    let Some(origin) = w.origin_index() else {
        return usage(format!("window {w} does not contain the origin"));
    };
    Ok((ThetaSampler::new(model, w)?, origin))
}

fn finish(method: &str, m: &[Moments], w: &Window) -> EstimateReport {
    let mut r = EstimateReport::from_moments(method, &m[0]).with_window(w).with_diag("tail_flag_rate", m[1].mean());
    if m[1].mean() > 0.0 {
        r.warn(format!("{:.1}% of samples carry window-boundary mass (possible divergence)", 100.0 * m[1].mean()));
    }
    r
}

/// `θ = E[max_t Θ^α(t) / Σ_t Θ^α(t)]`.
pub fn theta_ratio(model: &ModelSpec, w: &Window, spec: &McSpec) -> Result<EstimateReport> {
    let (theta, _) = theta_sampler(model, w)?;
    let alpha = model.alpha();
    let shell = Shell::new(w, DEFAULT_TAIL_SHARE);
    let m = mc::replicate(
        spec,
        2,
        || vec![0.0; w.len()],
        |buf, rng, out| {
            theta.sample(rng, buf);
            buf.iter_mut().for_each(|v| *v = pow_alpha(*v, alpha));
            let (max, sum) = buf.iter().fold((0.0f64, 0.0), |(m, s), &v| (m.max(v), s + v));
            out[0] = max / sum;
            out[1] = shell.flags(buf.iter().copied()) as u8 as f64;
            Ok(())
        },
    )?;
    Ok(finish("ratio", &m, w))
}

/// `θ = E[1 / B(Y)]`, `B(Y) = #{t : Y(t) > 1}`.
pub fn theta_exceed(model: &ModelSpec, w: &Window, spec: &McSpec) -> Result<EstimateReport> {
    let (theta, _) = theta_sampler(model, w)?;
    let alpha = model.alpha();
    let shell = Shell::new(w, DEFAULT_TAIL_SHARE);
    let m = mc::replicate(
        spec,
        2,
        || vec![0.0; w.len()],
        |buf, rng, out| {
            theta.sample(rng, buf);
            let r = pareto(rng, alpha);
            let ind = buf.iter().map(|v| if r * v > 1.0 { 1.0 } else { 0.0 });
            out[0] = 1.0 / ind.clone().sum::<f64>();
            out[1] = shell.flags(ind) as u8 as f64;
            Ok(())
        },
    )?;
    Ok(finish("exceed", &m, w))
}

/// `θ = P(I(Θ) = 0, S(Θ) < ∞)` for maximum anchors and
/// `θ = P(I(Y) = 0, S(Y) < ∞)` for exceedance anchors.
///
/// Flagged samples are not zeroed here: on a divergent path the anchor
/// drifts to the window boundary and away from the origin by itself, while
/// zeroing would also discard convergent paths with a heavy shell.
pub fn theta_anchor(model: &ModelSpec, w: &Window, map: AnchorMap, spec: &McSpec) -> Result<EstimateReport> {
    let (theta, origin) = theta_sampler(model, w)?;
    let alpha = model.alpha();
    let shell = Shell::new(w, DEFAULT_TAIL_SHARE);
    let seq = map.order.sequence(w);
    let m = mc::replicate(
        spec,
        3,
        || vec![0.0; w.len()],
        |buf, rng, out| {
            theta.sample(rng, buf);
            let flagged = shell.flags(buf.iter().map(|v| pow_alpha(*v, alpha)));
            if map.kind.is_exceedance() {
                let r = pareto(rng, alpha);
                buf.iter_mut().for_each(|v| *v *= r);
            }
            let at = anchor_in(buf, &seq, map.kind);
            out[0] = (at == Some(origin)) as u8 as f64;
            out[1] = flagged as u8 as f64;
            out[2] = at.is_some_and(|i| shell.contains(i)) as u8 as f64;
            Ok(())
        },
    )?;
    let method = format!("anchor_{}", map.kind.name());
    Ok(finish(&method, &m, w).with_diag("boundary_anchor_rate", m[2].mean()))
}

/// `θ = E[max_{t ⪰ 0} Θ^α(t) − max_{t ≻ 0} Θ^α(t); S(Θ) < ∞]`.
pub fn theta_difference(model: &ModelSpec, w: &Window, order: LatticeOrder, spec: &McSpec) -> Result<EstimateReport> {
    let (theta, origin) = theta_sampler(model, w)?;
    let alpha = model.alpha();
    let shell = Shell::new(w, DEFAULT_TAIL_SHARE);
    let seq = order.sequence(w);
    let pos = seq.iter().position(|&i| i == origin).expect("origin is in the window");
    let after = seq[pos + 1..].to_vec();
    let m = mc::replicate(
        spec,
        2,
        || vec![0.0; w.len()],
        |buf, rng, out| {
            theta.sample(rng, buf);
            buf.iter_mut().for_each(|v| *v = pow_alpha(*v, alpha));
            let flagged = shell.flags(buf.iter().copied());
            let strict = after.iter().map(|&i| buf[i]).fold(0.0, f64::max);
            let weak = strict.max(buf[origin]);
            out[0] = if flagged { 0.0 } else { weak - strict };
            out[1] = flagged as u8 as f64;
            Ok(())
        },
    )?;
    Ok(finish("difference", &m, w))
}

/// `n^{-d} E max_{t ∈ [0,n]^d} Z^α(t)`, the finite-`n` Pickands quantity.
pub fn theta_pickands(model: &ModelSpec, n: i64, route: SpectralRoute, spec: &McSpec) -> Result<EstimateReport> {
    if n < 1 {
        return usage("Pickands window side must be at least 1");
    }
    let w = Window::cube(model.dim(), 0, n)?;
    let e = expected_block_max(model, &w, route, spec)?;
    let norm = (n as f64).powi(model.dim() as i32);
    let mut r = EstimateReport::new("pickands", e.mean() / norm, e.stderr() / norm, e.count()).with_window(&w);
    r.diagnostics.insert("n".into(), n as f64);
    Ok(r)
}

/// Pickands quantities for increasing `n`; the last entry is the reported
/// value. No extrapolation is attempted.
pub fn pickands_sweep(
    model: &ModelSpec,
    ns: &[i64],
    route: SpectralRoute,
    spec: &McSpec,
) -> Result<Vec<EstimateReport>> {
    if ns.is_empty() || ns.windows(2).any(|p| p[0] >= p[1]) {
        return usage("sweep sizes must be non-empty and strictly increasing");
    }
    ns.iter().enumerate().map(|(k, &n)| theta_pickands(model, n, route, &spec.derive(k as u64))).collect()
}

/// Moments of `max_{t ∈ w} Z^α(t)`.
fn expected_block_max(model: &ModelSpec, w: &Window, route: SpectralRoute, spec: &McSpec) -> Result<Moments> {
    let z = SpectralSampler::new(model, w, route)?;
    let alpha = model.alpha();
    let m = mc::replicate(
        spec,
        1,
        || vec![0.0; w.len()],
        |buf, rng, out| {
            z.sample_into(rng, buf);
            out[0] = pow_alpha(buf.iter().copied().fold(0.0, f64::max), alpha);
            Ok(())
        },
    )?;
    Ok(m[0])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockMode {
    /// `P(max > u) = 1 − exp(−E[max Z^α] u^{-α})` with the expectation
    /// estimated by Monte Carlo.
    Analytic,
    /// Count simulated block maxima above `u`.
    RawCount,
}

/// Block estimator setup: level `u = n τ` for each `τ`, block `[0, r]^d`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockConfig {
    pub n: f64,
    pub r: i64,
    /// The first entry is the reported estimate; all are in the diagnostics.
    pub taus: Vec<f64>,
    pub mode: BlockMode,
    pub route: SpectralRoute,
    pub series: SeriesControl,
}

impl BlockConfig {
    pub fn new(n: f64, r: i64) -> Self {
        BlockConfig {
            n,
            r,
            taus: vec![1.0, 0.5, 2.0],
            mode: BlockMode::Analytic,
            route: SpectralRoute::default(),
            series: SeriesControl::default(),
        }
    }

    fn validate(&self, d: usize) -> Result<f64> {
        if self.r < 1 {
            return usage("block side must be at least 1");
        }
        if self.taus.is_empty() || self.taus.iter().any(|t| !(*t > 0.0)) {
            return usage("tau values must be positive");
        }
        let volume = (self.r as f64).powi(d as i32);
        if !(volume <= self.n / 10.0) {
            return usage(format!("block volume r^d = {volume} exceeds n/10 = {}", self.n / 10.0));
        }
        Ok(volume)
    }
}

/// `P(X(0) > u)` for `α`-Fréchet margins, accurate for large `u`.
fn frechet_sf(u: f64, alpha: f64) -> f64 {
    -(-u.powf(-alpha)).exp_m1()
}

/// `P(max_{[0,r]^d} X > nτ) / (r^d P(X(0) > nτ))`.
pub fn theta_block(model: &ModelSpec, cfg: &BlockConfig, spec: &McSpec) -> Result<EstimateReport> {
    let d = model.dim();
    let volume = cfg.validate(d)?;
    let w = Window::cube(d, 0, cfg.r)?;
    let alpha = model.alpha();
    match cfg.mode {
        BlockMode::Analytic => {
            let e = expected_block_max(model, &w, cfg.route, spec)?;
            let value = |tau: f64| {
                let u = (cfg.n * tau).powf(-alpha);
                let num = -(-e.mean() * u).exp_m1();
                let slope = (-e.mean() * u).exp() * u;
                let den = volume * frechet_sf(cfg.n * tau, alpha);
                (num / den, slope * e.stderr() / den)
            };
            let (est, se) = value(cfg.taus[0]);
            let mut r = EstimateReport::new("block", est, se, e.count()).with_window(&w);
            for &tau in &cfg.taus {
                r.diagnostics.insert(format!("tau_{tau}"), value(tau).0);
            }
            r.diagnostics.insert("expected_block_max".into(), e.mean());
            Ok(r)
        }
        BlockMode::RawCount => {
            let sim = MaxStableSimulator::new(model, &w, cfg.route, cfg.series, spec.seed ^ 0xB10C)?;
            block_from_maxima(cfg, volume, alpha, &w, spec, |rng| sim.simulate_max(rng))
        }
    }
}

/// Raw-count block estimator on the mixture field
/// `max(p^{1/α} η_1, (1 − p)^{1/α} η_2)` with independently simulated parts.
pub fn theta_block_mixture(
    p: f64,
    m1: &ModelSpec,
    m2: &ModelSpec,
    cfg: &BlockConfig,
    spec: &McSpec,
) -> Result<EstimateReport> {
    let d = m1.dim();
    let volume = cfg.validate(d)?;
    let w = Window::cube(d, 0, cfg.r)?;
    let sim = MixtureSimulator::new(p, m1, m2, &w, cfg.route, cfg.series, spec.seed ^ 0xB10C)?;
    let mut r = block_from_maxima(cfg, volume, m1.alpha(), &w, spec, |rng| sim.simulate_max(rng))?;
    r.method = "block_mixture".into();
    Ok(r)
}

fn block_from_maxima<F>(
    cfg: &BlockConfig,
    volume: f64,
    alpha: f64,
    w: &Window,
    spec: &McSpec,
    f: F,
) -> Result<EstimateReport>
where
    F: Fn(&mut mc::McRng) -> (f64, StopReason) + Sync + Send,
{
    let k = cfg.taus.len();
    let m = mc::replicate(
        spec,
        k + 1,
        || (),
        |_, rng, out| {
            let (max, stop) = f(rng);
            for (o, &tau) in out.iter_mut().zip(&cfg.taus) {
                *o = (max > cfg.n * tau) as u8 as f64;
            }
            out[k] = (stop == StopReason::Budget) as u8 as f64;
            Ok(())
        },
    )?;
    let den = |tau: f64| volume * frechet_sf(cfg.n * tau, alpha);
    let d0 = den(cfg.taus[0]);
    let mut r = EstimateReport::new("block", m[0].mean() / d0, m[0].stderr() / d0, m[0].count())
        .with_window(w)
        .with_diag("budget_stop_rate", m[k].mean());
    for (i, &tau) in cfg.taus.iter().enumerate() {
        r.diagnostics.insert(format!("tau_{tau}"), m[i].mean() / den(tau));
        r.diagnostics.insert(format!("tau_{tau}_stderr"), m[i].stderr() / den(tau));
    }
    if m[k].mean() > 0.01 {
        r.warn("more than 1% of de Haan series stopped on the term budget");
    }
    Ok(r)
}

/// `θ = p θ_1 + (1 − p) θ_2` for the mixture field, with independent error
/// propagation.
pub fn theta_mixture(p: f64, first: &EstimateReport, second: &EstimateReport) -> Result<EstimateReport> {
    if !(p > 0.0 && p < 1.0) {
        return usage(format!("mixture weight must lie in (0, 1), got {p}"));
    }
    let est = p * first.estimate + (1.0 - p) * second.estimate;
    let se = (p * first.stderr).hypot((1.0 - p) * second.stderr);
    Ok(EstimateReport::new("mixture", est, se, first.replicates.min(second.replicates)))
}

/// Result of [`br_lower_bound`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LowerBound {
    /// `1 / (support sum + tail bound)`; `0` when the sum diverges.
    pub value: f64,
    pub support_sum: f64,
    /// Upper bound for the terms outside the support, `None` when no
    /// analytic bound is available (tabulated variograms).
    pub tail_bound: Option<f64>,
}

/// Lower bound `θ ≥ 1 / Σ_t 2Φ̄(σ(t)/2)`, `σ² = γ`, for the Brown-Resnick
/// model: the sum over `support` plus an analytic bound for the rest.
pub fn br_lower_bound(v: &Variogram, support: &Window) -> Result<(LowerBound, EstimateReport)> {
    v.validate()?;
    let term = |g: f64| 2.0 * normal::sf(g.sqrt() / 2.0);
    let mut sum = 0.0;
    let mut comp = 0.0;
    for t in support.points() {
        // Neumaier summation.
        let x = term(v.eval(&t)?);
        let s = sum + x;
        comp += if sum.abs() >= x.abs() { (sum - s) + x } else { (x - s) + sum };
        sum = s;
    }
    let support_sum = sum + comp;
    let tail_bound = match v {
        Variogram::Power { scale, exponent } => Some(power_tail_bound(*scale, *exponent, support)),
        Variogram::Table(_) => None,
    };
    let total = support_sum + tail_bound.unwrap_or(0.0);
    let value = if total.is_finite() { 1.0 / total } else { 0.0 };
    let lb = LowerBound { value, support_sum, tail_bound };
    let mut r =
        EstimateReport::exact("br_lower_bound", value).with_window(support).with_diag("support_sum", support_sum);
    match tail_bound {
        Some(t) => r.diagnostics.insert("tail_bound".into(), t),
        None => {
            r.warn("no analytic tail bound for tabulated variograms; value covers the support only");
            None
        }
    };
    if value == 0.0 {
        r.warn("the bound series diverges");
    }
    Ok((lb, r))
}

/// Bound for `Σ_{‖t‖∞ > R} 2Φ̄(σ(t)/2)` with `γ(t) = s‖t‖^e`, where `R` is the
/// radius of the largest centered cube inside the support. Sup-norm shell
/// `k` has `(2k+1)^d − (2k−1)^d` points, each with Euclidean norm `≥ k`.
/// Shells are summed one by one, then in doubling blocks bounded by their
/// first term, which is valid since terms decrease in `k`.
fn power_tail_bound(scale: f64, exponent: f64, support: &Window) -> f64 {
    let d = support.dim() as i32;
    let radius = support
        .lower()
        .coords()
        .iter()
        .zip(support.upper().coords())
        .map(|(l, u)| (-l).min(*u))
        .min()
        .unwrap_or(0)
        .max(0) as f64;
    let term = |k: f64| 2.0 * normal::sf((scale * k.powf(exponent)).sqrt() / 2.0);
    let count = |a: f64, b: f64| (2.0 * b + 1.0).powi(d) - (2.0 * a - 1.0).powi(d);
    let mut total = 0.0;
    let mut k = radius + 1.0;
    let single_end = radius + 10_000.0;
    while k <= single_end {
        total += count(k, k) * term(k);
        k += 1.0;
    }
    while k < 1e300 {
        let end = 2.0 * k;
        let block = count(k, end - 1.0) * term(k);
        if !block.is_finite() {
            return f64::INFINITY;
        }
        total += block;
        if term(k) == 0.0 {
            break;
        }
        k = end;
    }
    total
}

/// `E[(1 − max_{m < ‖t‖∞, t ∈ w} Θ(t))_+]` for each `m`.
pub fn anti_clustering_probe(
    model: &ModelSpec,
    m_values: &[i64],
    w: &Window,
    spec: &McSpec,
) -> Result<Vec<EstimateReport>> {
    let (theta, _) = theta_sampler(model, w)?;
    if m_values.is_empty() || m_values.windows(2).any(|p| p[0] >= p[1]) {
        return usage("m values must be non-empty and strictly increasing");
    }
    let norms = w.sup_norms();
    let reach = norms.iter().copied().max().unwrap_or(0);
    if m_values[0] < 0 || *m_values.last().unwrap() >= reach {
        return usage(format!("m values must lie in [0, {reach})"));
    }
    let k = m_values.len();
    let m = mc::replicate(
        spec,
        k,
        || vec![0.0; w.len()],
        |buf, rng, out| {
            theta.sample(rng, buf);
            for (o, &mv) in out.iter_mut().zip(m_values) {
                let far = buf.iter().zip(&norms).filter(|(_, &n)| n > mv).map(|(v, _)| *v).fold(0.0, f64::max);
                *o = (1.0 - far).max(0.0);
            }
            Ok(())
        },
    )?;
    Ok(m_values
        .iter()
        .zip(&m)
        .map(|(&mv, mo)| EstimateReport::from_moments("anti_clustering", mo).with_window(w).with_diag("m", mv as f64))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::AnchorKind;
    use crate::lattice::LatticePoint;
    use crate::spectral::SequenceModel;

    const LEX: LatticeOrder = LatticeOrder::Lexicographic;

    fn seq31() -> ModelSpec {
        ModelSpec::sequence(&[3.0, 1.0], 1.0).unwrap()
    }

    #[test]
    fn independent_is_exact() {
        let ind = ModelSpec::Independent { dim: 1 };
        let w = Window::centered(1, 10).unwrap();
        let spec = McSpec::new(500, 1);
        for r in [
            theta_ratio(&ind, &w, &spec).unwrap(),
            theta_exceed(&ind, &w, &spec).unwrap(),
            theta_anchor(&ind, &w, AnchorMap::new(AnchorKind::FirstMax, LEX), &spec).unwrap(),
            theta_anchor(&ind, &w, AnchorMap::new(AnchorKind::LastExceed, LEX), &spec).unwrap(),
            theta_difference(&ind, &w, LEX, &spec).unwrap(),
        ] {
            assert_eq!((r.estimate, r.stderr), (1.0, 0.0), "{}", r.method);
        }
        let p = theta_pickands(&ind, 10, SpectralRoute::default(), &spec).unwrap();
        assert!((p.estimate - 1.1).abs() < 1e-12 && p.stderr == 0.0);
    }

    #[test]
    fn sequence_pickands_matches_finite_n_value() {
        // Exact: E max_{[0,n]} Z = 1 + 0.75 n for c = (3, 1).
        let spec = McSpec::new(100_000, 2);
        let r = theta_pickands(&seq31(), 20, SpectralRoute::default(), &spec).unwrap();
        assert!(r.within(0.75 + 1.0 / 20.0, 4.0), "{r:?}");
    }

    #[test]
    fn block_at_r40_matches_finite_block_value() {
        let spec = McSpec::new(100_000, 3);
        let cfg = BlockConfig::new(1e6, 40);
        let r = theta_block(&seq31(), &cfg, &spec).unwrap();
        let a = 1.0 + 0.75 * 40.0;
        let u = 1e6f64;
        let exact = -(-a / u).exp_m1() / (40.0 * -(-1.0 / u).exp_m1());
        assert!(r.within(exact, 4.0), "{r:?} vs {exact}");
        assert!((r.diagnostics["tau_0.5"] - r.diagnostics["tau_2"]).abs() < 3.0 * r.stderr);
        assert!(theta_block(&seq31(), &BlockConfig::new(100.0, 40), &spec).is_err());
    }

    #[test]
    fn independent_block_value() {
        let ind = ModelSpec::Independent { dim: 1 };
        let r = theta_block(&ind, &BlockConfig::new(1e4, 20), &McSpec::new(100, 4)).unwrap();
        let exact = -(-21.0 / 1e4f64).exp_m1() / (20.0 * -(-1.0 / 1e4f64).exp_m1());
        assert!((r.estimate - exact).abs() < 1e-12);
        assert!((r.estimate - 1.05).abs() < 2e-3);
    }

    #[test]
    fn mixture_combination() {
        let a = EstimateReport::new("a", 0.75, 0.01, 10);
        let b = EstimateReport::new("b", 0.0, 0.02, 10);
        let m = theta_mixture(0.7, &a, &b).unwrap();
        assert!((m.estimate - 0.525).abs() < 1e-15);
        let s = theta_mixture(0.3, &b, &a).unwrap();
        assert!((m.estimate - s.estimate).abs() < 1e-15 && (m.stderr - s.stderr).abs() < 1e-15);
        let one = EstimateReport::exact("x", 1.0);
        assert_eq!(theta_mixture(0.5, &one, &one).unwrap().estimate, 1.0);
        assert!(theta_mixture(1.0, &a, &b).is_err());
    }

    #[test]
    fn lower_bound_origin_term_and_tail() {
        let (lb, _) = br_lower_bound(&Variogram::linear(1.0), &Window::centered(1, 0).unwrap()).unwrap();
        assert_eq!(lb.support_sum, 1.0);
        assert!(lb.tail_bound.unwrap() > 0.0);
        let (wide, _) = br_lower_bound(&Variogram::linear(1.0), &Window::centered(1, 200).unwrap()).unwrap();
        let (narrow, _) = br_lower_bound(&Variogram::linear(1.0), &Window::centered(1, 50).unwrap()).unwrap();
        // Both are valid bounds for the same series, and the tail bound is
        // conservative, so widening can only tighten.
        assert!(wide.value >= narrow.value - 1e-12);
        assert!((wide.value - narrow.value).abs() < 1e-3);
    }

    #[test]
    fn probe_dichotomy() {
        let w = Window::centered(1, 12).unwrap();
        let spec = McSpec::new(200, 5);
        let ms = [1, 3, 6];
        for r in anti_clustering_probe(&ModelSpec::Independent { dim: 1 }, &ms, &w, &spec).unwrap() {
            assert_eq!(r.estimate, 1.0);
        }
        for r in anti_clustering_probe(&ModelSpec::Alternating, &ms, &w, &spec).unwrap() {
            assert_eq!(r.estimate, 0.0);
        }
        assert!(anti_clustering_probe(&ModelSpec::Alternating, &[12], &w, &spec).is_err());
    }

    #[test]
    fn alternating_ratio_is_reciprocal_even_count() {
        let spec = McSpec::new(100, 6);
        for radius in [4, 8, 16] {
            let w = Window::centered(1, radius).unwrap();
            let r = theta_ratio(&ModelSpec::Alternating, &w, &spec).unwrap();
            assert_eq!(r.estimate, 1.0 / (radius + 1) as f64);
            assert_eq!(r.diagnostics["tail_flag_rate"], 1.0);
        }
    }

    #[test]
    fn geometric_sequence_exact_value() {
        let m = SequenceModel::new((-20..=20i64).map(|t| (LatticePoint::from(t), 0.5f64.powi(t.abs() as i32))), 1.0)
            .unwrap();
        let w = Window::centered(1, 45).unwrap();
        let r = theta_ratio(&ModelSpec::Sequence(m.clone()), &w, &McSpec::new(20_000, 7)).unwrap();
        assert!(r.within(m.exact_theta(), 4.0), "{r:?}");
    }
}
