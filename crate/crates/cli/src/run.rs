//! Executes a parsed configuration.

use std::time::Instant;

use maxstable_core::dehaan::{fidi_neglog, fidi_neglog_anchored, y_fidi_cdf};
use maxstable_core::estimators::{
    anti_clustering_probe, br_lower_bound, pickands_sweep, theta_anchor, theta_block, theta_block_mixture,
    theta_difference, theta_exceed, theta_pickands, theta_ratio, BlockConfig,
};
use maxstable_core::functionals::{AnchorKind, AnchorMap};
use maxstable_core::verify::{power_cases, run_suite, standard_cases, SuiteReport};
use maxstable_core::{EstimateReport, LatticePoint, McSpec, ModelSpec, Window};
use serde::Serialize;

use crate::config::{Command, ExperimentConfig, Method};

/// θ estimates further than this many standard errors outside `[0, 1]`
/// make the run fail.
const UNIT_RANGE_K: f64 = 4.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MethodResult {
    pub seed: u64,
    pub wall_time_ms: f64,
    #[serde(flatten)]
    pub report: EstimateReport,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MethodError {
    pub method: String,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifySummary {
    pub identity: String,
    pub passed: usize,
    pub total: usize,
    pub mean_abs_z: f64,
    pub suite: SuiteReport,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunOutput {
    pub command: Command,
    pub seed: u64,
    pub replicates: u64,
    pub reports: Vec<MethodResult>,
    pub errors: Vec<MethodError>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub verify: Vec<VerifySummary>,
    /// Methods whose θ estimate lies outside `[0, 1]` beyond noise.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub out_of_range: Vec<String>,
}

impl RunOutput {
    pub fn success(&self) -> bool {
        self.errors.is_empty() && self.out_of_range.is_empty() && self.verify.iter().all(|v| v.passed == v.total)
    }
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Ratio => "ratio",
        Method::Exceed => "exceed",
        Method::Anchor | Method::AnchorFirstMax => "anchor_first_max",
        Method::AnchorLastMax => "anchor_last_max",
        Method::AnchorFirstExceed => "anchor_first_exceed",
        Method::AnchorLastExceed => "anchor_last_exceed",
        Method::Difference => "difference",
        Method::Pickands => "pickands",
        Method::Block => "block",
        Method::Neglog => "neglog",
        Method::NeglogAnchored => "neglog_anchored",
        Method::YCdf => "y_cdf",
    }
}

fn anchor_kind(m: Method) -> Option<AnchorKind> {
    match m {
        Method::Anchor | Method::AnchorFirstMax => Some(AnchorKind::FirstMax),
        Method::AnchorLastMax => Some(AnchorKind::LastMax),
        Method::AnchorFirstExceed => Some(AnchorKind::FirstExceed),
        Method::AnchorLastExceed => Some(AnchorKind::LastExceed),
        _ => None,
    }
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    model: ModelSpec,
    window: Window,
    spec: McSpec,
}

impl Ctx<'_> {
    fn block_config(&self) -> BlockConfig {
        let b = &self.cfg.block;
        BlockConfig { taus: b.taus.clone(), mode: b.mode(), route: self.cfg.route(), ..BlockConfig::new(b.n, b.r) }
    }

    fn theta(&self, m: Method, spec: &McSpec) -> maxstable_core::Result<EstimateReport> {
        let order = self.cfg.order.into();
        if let Some(kind) = anchor_kind(m) {
            return theta_anchor(&self.model, &self.window, AnchorMap::new(kind, order), spec);
        }
        match m {
            Method::Ratio => theta_ratio(&self.model, &self.window, spec),
            Method::Exceed => theta_exceed(&self.model, &self.window, spec),
            Method::Difference => theta_difference(&self.model, &self.window, order, spec),
            Method::Pickands => theta_pickands(&self.model, self.cfg.pickands.n, self.cfg.route(), spec),
            Method::Block => match &self.model {
                // Raw counts on a mixture need the two parts simulated
                // separately.
                ModelSpec::Mixture { p, first, second } if self.cfg.block.raw => {
                    theta_block_mixture(*p, first, second, &self.block_config(), spec)
                }
                _ => theta_block(&self.model, &self.block_config(), spec),
            },
            _ => unreachable!("validated"),
        }
    }

    fn fidi(&self, m: Method, spec: &McSpec) -> maxstable_core::Result<EstimateReport> {
        let f = self.cfg.fidi.as_ref().expect("validated");
        let points: Vec<LatticePoint> = f.points.iter().map(|p| p.point()).collect();
        match m {
            Method::Neglog => fidi_neglog(&self.model, &points, &f.thresholds, self.cfg.route(), spec),
            Method::NeglogAnchored => {
                fidi_neglog_anchored(&self.model, &points, &f.thresholds, self.cfg.order.into(), spec)
            }
            Method::YCdf => {
                let h = f.h.as_ref().map(|h| h.point()).unwrap_or_else(|| LatticePoint::origin(self.model.dim()));
                y_fidi_cdf(&self.model, &h, &points, &f.thresholds, self.cfg.route(), spec)
            }
            _ => unreachable!("validated"),
        }
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64() * 1e3)
}

/// Runs every method of the configuration. Failing methods are recorded in
/// `errors` and do not stop the others.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput, String> {
    let model = cfg.model.build()?;
    let window = cfg.window.window(model.dim())?;
    let spec = McSpec::new(cfg.replicates as usize, cfg.seed);
    let ctx = Ctx { cfg, model, window, spec };
    let mut out = RunOutput {
        command: cfg.command,
        seed: cfg.seed,
        replicates: cfg.replicates as u64,
        reports: Vec::new(),
        errors: Vec::new(),
        verify: Vec::new(),
        out_of_range: Vec::new(),
    };
    let push =
        |out: &mut RunOutput, name: &str, seed: u64, res: maxstable_core::Result<EstimateReport>, ms: f64| match res {
            Ok(mut report) => {
                report.method = name.to_string();
                out.reports.push(MethodResult { seed, wall_time_ms: ms, report })
            }
            Err(e) => out.errors.push(MethodError { method: name.to_string(), error: e.to_string() }),
        };

    match cfg.command {
        Command::Theta | Command::Fidi => {
            for (k, &m) in cfg.effective_methods().iter().enumerate() {
                // Each method gets its own stream so that adding a method
                // leaves the others unchanged.
                let spec = ctx.spec.derive(k as u64 + 1);
                let (res, ms) =
                    timed(|| if cfg.command == Command::Theta { ctx.theta(m, &spec) } else { ctx.fidi(m, &spec) });
                push(&mut out, method_name(m), spec.seed, res, ms);
            }
            if cfg.command == Command::Theta {
                out.out_of_range = out
                    .reports
                    .iter()
                    .filter(|r| !r.report.in_unit_range(UNIT_RANGE_K))
                    .map(|r| r.report.method.clone())
                    .collect();
            }
        }
        Command::Bound => {
            let ModelSpec::BrownResnick { variogram, .. } = &ctx.model else { unreachable!("validated") };
            let (res, ms) = timed(|| br_lower_bound(variogram, &ctx.window));
            let res = res.map(|(lb, r)| {
                let mut r = r.with_diag("support_sum", lb.support_sum);
                if let Some(t) = lb.tail_bound {
                    r.diagnostics.insert("tail_bound".into(), t);
                }
                r
            });
            push(&mut out, "br_lower_bound", cfg.seed, res, ms);
        }
        Command::Probe => {
            let ms_values = &cfg.probe.as_ref().expect("validated").m;
            let (res, ms) = timed(|| anti_clustering_probe(&ctx.model, ms_values, &ctx.window, &ctx.spec));
            match res {
                Ok(reports) => {
                    for (r, m) in reports.into_iter().zip(ms_values) {
                        push(&mut out, &format!("probe_m{m}"), cfg.seed, Ok(r), ms);
                    }
                }
                Err(e) => push(&mut out, "probe", cfg.seed, Err(e), ms),
            }
        }
        Command::Sweep => {
            let ns = &cfg.pickands.sweep;
            let (res, ms) = timed(|| pickands_sweep(&ctx.model, ns, cfg.route(), &ctx.spec));
            match res {
                Ok(reports) => {
                    for (r, n) in reports.into_iter().zip(ns) {
                        push(&mut out, &format!("pickands_n{n}"), cfg.seed, Ok(r), ms);
                    }
                }
                Err(e) => push(&mut out, "pickands_sweep", cfg.seed, Err(e), ms),
            }
        }
        Command::Verify => {
            for (k, &kind) in cfg.verify.identities.iter().enumerate() {
                let ik = kind.into();
                let cases = if cfg.verify.power {
                    power_cases(ik, ctx.model.dim())
                } else {
                    standard_cases(ik, ctx.model.dim())
                };
                let spec = ctx.spec.derive(k as u64 + 1);
                let name =
                    serde_json::to_value(kind).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
                match run_suite(&ctx.model, &cases, cfg.route(), &spec) {
                    Ok(suite) => out.verify.push(VerifySummary {
                        identity: name,
                        passed: suite.passed,
                        total: suite.total,
                        mean_abs_z: suite.mean_abs_z,
                        suite,
                    }),
                    Err(e) => out.errors.push(MethodError { method: name, error: e.to_string() }),
                }
            }
        }
    }
    Ok(out)
}
