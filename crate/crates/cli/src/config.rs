//! Experiment configuration: a TOML document with top-level run settings,
//! a `[model]` table selected by its `family` key, and optional tables for
//! command-specific settings. The full schema is in the README.

use std::fmt;
use std::path::PathBuf;

use maxstable_core::estimators::BlockMode;
use maxstable_core::spectral::{SequenceModel, VariogramTable};
use maxstable_core::verify::IdentityKind;
use maxstable_core::{LatticeOrder, LatticePoint, ModelSpec, SpectralRoute, Variogram, Window};
use serde::{Deserialize, Serialize};

pub const MIN_REPLICATES: i64 = 100;

/// A configuration error with the line it points at when known.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub field: String,
    pub reason: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.field.is_empty()) {
            (Some(l), false) => write!(f, "line {l}: {}: {}", self.field, self.reason),
            (Some(l), true) => write!(f, "line {l}: {}", self.reason),
            (None, false) => write!(f, "{}: {}", self.field, self.reason),
            (None, true) => write!(f, "{}", self.reason),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Theta,
    Verify,
    Fidi,
    Bound,
    Probe,
    Sweep,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderConfig {
    #[default]
    Lexicographic,
    ReversedLexicographic,
}

impl From<OrderConfig> for LatticeOrder {
    fn from(o: OrderConfig) -> Self {
        match o {
            OrderConfig::Lexicographic => LatticeOrder::Lexicographic,
            OrderConfig::ReversedLexicographic => LatticeOrder::ReversedLexicographic,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Ratio,
    Exceed,
    /// Alias of `anchor_first_max`.
    Anchor,
    AnchorFirstMax,
    AnchorLastMax,
    AnchorFirstExceed,
    AnchorLastExceed,
    Difference,
    Pickands,
    Block,
    /// `fidi` command: the spectral formula.
    Neglog,
    /// `fidi` command: the anchored tail-field formula.
    NeglogAnchored,
    /// `fidi` command: the CDF of `Y_h`.
    YCdf,
}

/// A lattice point written as an integer (`d = 1`) or an array.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointSpec {
    Scalar(i64),
    Coords(Vec<i64>),
}

impl PointSpec {
    pub fn point(&self) -> LatticePoint {
        match self {
            PointSpec::Scalar(x) => LatticePoint::from(*x),
            PointSpec::Coords(c) => LatticePoint::new(c.clone()),
        }
    }
}

/// `[lo, hi]` for the cube `[lo, hi]^d`, or explicit corners.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WindowSpec {
    Cube([i64; 2]),
    Corners { lower: Vec<i64>, upper: Vec<i64> },
}

impl WindowSpec {
    pub fn window(&self, dim: usize) -> Result<Window, String> {
        let w = match self {
            WindowSpec::Cube([lo, hi]) => Window::cube(dim, *lo, *hi),
            WindowSpec::Corners { lower, upper } => {
                if lower.len() != dim || upper.len() != dim {
                    return Err(format!("corners must have {dim} coordinates"));
                }
                Window::new(LatticePoint::new(lower.clone()), LatticePoint::new(upper.clone()))
            }
        };
        w.map_err(|e| e.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelConfig {
    BrownResnick {
        #[serde(default = "one")]
        scale: f64,
        #[serde(default = "one")]
        exponent: f64,
        #[serde(default = "one_usize")]
        dim: usize,
        /// Variogram table file, overriding `scale` and `exponent`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        table: Option<PathBuf>,
    },
    Sequence {
        coefficients: Vec<f64>,
        /// Index of the first coefficient.
        #[serde(default)]
        start: i64,
        #[serde(default = "one")]
        alpha: f64,
    },
    Independent {
        #[serde(default = "one_usize")]
        dim: usize,
    },
    Alternating,
    Product {
        first: Box<ModelConfig>,
        second: Box<ModelConfig>,
    },
    Mixture {
        p: f64,
        first: Box<ModelConfig>,
        second: Box<ModelConfig>,
    },
    Perturbed {
        base: Box<ModelConfig>,
        origin_value: f64,
    },
}

fn one() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

impl ModelConfig {
    pub fn build(&self) -> Result<ModelSpec, String> {
        let m = match self {
            ModelConfig::BrownResnick { scale, exponent, dim, table } => {
                let variogram = match table {
                    Some(path) => {
                        let text = std::fs::read_to_string(path)
                            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
                        Variogram::Table(VariogramTable::parse(&text).map_err(|e| e.to_string())?)
                    }
                    None => Variogram::Power { scale: *scale, exponent: *exponent },
                };
                ModelSpec::brown_resnick(variogram, *dim)
            }
            ModelConfig::Sequence { coefficients, start, alpha } => {
                let coeffs = coefficients.iter().enumerate().map(|(i, &c)| (LatticePoint::from(start + i as i64), c));
                ModelSpec::Sequence(SequenceModel::new(coeffs, *alpha).map_err(|e| e.to_string())?)
            }
            ModelConfig::Independent { dim } => ModelSpec::Independent { dim: *dim },
            ModelConfig::Alternating => ModelSpec::Alternating,
            ModelConfig::Product { first, second } => ModelSpec::product(first.build()?, second.build()?),
            ModelConfig::Mixture { p, first, second } => ModelSpec::mixture(*p, first.build()?, second.build()?),
            ModelConfig::Perturbed { base, origin_value } => ModelSpec::perturbed(base.build()?, *origin_value),
        };
        m.validate().map_err(|e| e.to_string())?;
        Ok(m)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RouteKind {
    #[default]
    Constructed,
    Direct,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockSection {
    pub n: f64,
    pub r: i64,
    #[serde(default = "default_taus")]
    pub taus: Vec<f64>,
    #[serde(default)]
    pub raw: bool,
}

fn default_taus() -> Vec<f64> {
    vec![1.0, 0.5, 2.0]
}

impl Default for BlockSection {
    fn default() -> Self {
        BlockSection { n: 1e7, r: 200, taus: default_taus(), raw: false }
    }
}

impl BlockSection {
    pub fn mode(&self) -> BlockMode {
        if self.raw {
            BlockMode::RawCount
        } else {
            BlockMode::Analytic
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PickandsSection {
    #[serde(default = "default_pickands_n")]
    pub n: i64,
    #[serde(default = "default_sweep")]
    pub sweep: Vec<i64>,
}

fn default_pickands_n() -> i64 {
    100
}

fn default_sweep() -> Vec<i64> {
    vec![25, 50, 100, 200]
}

impl Default for PickandsSection {
    fn default() -> Self {
        PickandsSection { n: default_pickands_n(), sweep: default_sweep() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FidiSection {
    pub points: Vec<PointSpec>,
    pub thresholds: Vec<f64>,
    /// Conditioning point for `y_cdf`; the origin by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<PointSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSection {
    pub m: Vec<i64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentityConfig {
    TsfZ,
    TsfTheta,
    Tilt,
}

impl From<IdentityConfig> for IdentityKind {
    fn from(k: IdentityConfig) -> Self {
        match k {
            IdentityConfig::TsfZ => IdentityKind::TsfZ,
            IdentityConfig::TsfTheta => IdentityKind::TsfTheta,
            IdentityConfig::Tilt => IdentityKind::Tilt,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    #[serde(default = "all_identities")]
    pub identities: Vec<IdentityConfig>,
    /// Use the power-calibration cases instead of the standard ones.
    #[serde(default)]
    pub power: bool,
}

fn all_identities() -> Vec<IdentityConfig> {
    vec![IdentityConfig::TsfZ, IdentityConfig::TsfTheta, IdentityConfig::Tilt]
}

impl Default for VerifySection {
    fn default() -> Self {
        VerifySection { identities: all_identities(), power: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    pub seed: u64,
    #[serde(default = "default_replicates")]
    pub replicates: i64,
    #[serde(default = "default_window")]
    pub window: WindowSpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub methods: Vec<Method>,
    #[serde(default)]
    pub order: OrderConfig,
    #[serde(default)]
    pub route: RouteKind,
    #[serde(default)]
    pub margin: i64,
    #[serde(default)]
    pub format: Format,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub model: ModelConfig,
    #[serde(default)]
    pub block: BlockSection,
    #[serde(default)]
    pub pickands: PickandsSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fidi: Option<FidiSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeSection>,
    #[serde(default)]
    pub verify: VerifySection,
}

fn default_replicates() -> i64 {
    10_000
}

fn default_window() -> WindowSpec {
    WindowSpec::Cube([-10, 10])
}

impl ExperimentConfig {
    pub fn route(&self) -> SpectralRoute {
        match self.route {
            RouteKind::Constructed => SpectralRoute::Constructed { margin: self.margin },
            RouteKind::Direct => SpectralRoute::Direct,
        }
    }

    /// The requested methods, or the command's defaults.
    pub fn effective_methods(&self) -> Vec<Method> {
        if !self.methods.is_empty() {
            return self.methods.clone();
        }
        match self.command {
            Command::Theta => vec![Method::Ratio, Method::Exceed, Method::AnchorFirstMax, Method::Difference],
            Command::Fidi => vec![Method::Neglog, Method::NeglogAnchored],
            _ => Vec::new(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configs always serialize")
    }
}

/// Line (1-based) of the first `key = ...` assignment in `text`.
fn key_line(text: &str, key: &str) -> Option<usize> {
    text.lines()
        .position(|l| {
            let l = l.trim_start();
            l.strip_prefix(key).is_some_and(|rest| rest.trim_start().starts_with('='))
        })
        .map(|i| i + 1)
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn semantic(text: &str, field: &str, reason: impl Into<String>) -> ConfigError {
    let key = field.rsplit('.').next().unwrap_or(field);
    ConfigError { line: key_line(text, key), field: field.to_string(), reason: reason.into() }
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
        let reason = e.message().to_string();
        // serde names the offending key in backticks for missing and
        // unknown fields.
        let field = reason.split('`').nth(1).unwrap_or("").to_string();
        let line = e.span().map(|s| line_of_offset(text, s.start));
        ConfigError { line: key_line(text, &field).or(line), field, reason }
    })?;
    validate(&cfg, text)?;
    Ok(cfg)
}

fn validate(cfg: &ExperimentConfig, text: &str) -> Result<(), ConfigError> {
    if cfg.replicates < MIN_REPLICATES {
        return Err(semantic(text, "replicates", format!("must be at least {MIN_REPLICATES}, got {}", cfg.replicates)));
    }
    let model = cfg.model.build().map_err(|e| semantic(text, "model", e))?;
    cfg.window.window(model.dim()).map_err(|e| semantic(text, "window", e))?;
    if cfg.margin < 0 {
        return Err(semantic(text, "margin", "must be non-negative"));
    }
    let methods = cfg.effective_methods();
    let allowed: &[Method] = match cfg.command {
        Command::Theta => &[
            Method::Ratio,
            Method::Exceed,
            Method::Anchor,
            Method::AnchorFirstMax,
            Method::AnchorLastMax,
            Method::AnchorFirstExceed,
            Method::AnchorLastExceed,
            Method::Difference,
            Method::Pickands,
            Method::Block,
        ],
        Command::Fidi => &[Method::Neglog, Method::NeglogAnchored, Method::YCdf],
        _ => &[],
    };
    if let Some(m) = methods.iter().find(|m| !allowed.contains(m)) {
        return Err(semantic(text, "methods", format!("{m:?} is not available for {:?}", cfg.command)));
    }
    match cfg.command {
        Command::Fidi => {
            let Some(f) = &cfg.fidi else {
                return Err(semantic(text, "fidi", "the fidi command needs a [fidi] table"));
            };
            if f.points.len() != f.thresholds.len() || f.points.is_empty() {
                return Err(semantic(text, "fidi.thresholds", "needs one threshold per point"));
            }
        }
        Command::Probe if cfg.probe.is_none() => {
            return Err(semantic(text, "probe", "the probe command needs a [probe] table with m values"));
        }
        Command::Bound if !matches!(model, ModelSpec::BrownResnick { .. }) => {
            return Err(semantic(text, "family", "the bound command needs a brown_resnick model"));
        }
        _ => {}
    }
    if cfg.block.r < 1 || !(cfg.block.n > 0.0) {
        return Err(semantic(text, "block", "n and r must be positive"));
    }
    if cfg.pickands.n < 1 || cfg.pickands.sweep.iter().any(|&n| n < 1) {
        return Err(semantic(text, "pickands", "window sides must be at least 1"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str =
        "command = \"theta\"\nseed = 1\n\n[model]\nfamily = \"sequence\"\ncoefficients = [3.0, 1.0]\n";

    #[test]
    fn minimal_config_fills_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.format, Format::Json);
        assert_eq!(c.order, OrderConfig::Lexicographic);
        assert_eq!(c.replicates, 10_000);
        assert!(matches!(c.model, ModelConfig::Sequence { alpha, start: 0, .. } if alpha == 1.0));
        assert_eq!(c.effective_methods().len(), 4);
    }

    #[test]
    fn missing_seed_names_the_field() {
        let e = parse_config("command = \"theta\"\n[model]\nfamily = \"alternating\"\n").unwrap_err();
        assert_eq!(e.field, "seed");
    }

    #[test]
    fn negative_replicates_are_rejected() {
        let text = MINIMAL.replace("seed = 1", "seed = 1\nreplicates = -5");
        let e = parse_config(&text).unwrap_err();
        assert_eq!((e.field.as_str(), e.line), ("replicates", Some(3)));
    }

    #[test]
    fn unknown_family_and_bad_window() {
        let e = parse_config(&MINIMAL.replace("\"sequence\"", "\"gaussian\"")).unwrap_err();
        assert!(e.reason.contains("gaussian"), "{e}");
        let e = parse_config(&MINIMAL.replace("seed = 1", "seed = 1\nwindow = [3, -3]")).unwrap_err();
        assert_eq!(e.field, "window");
        let e = parse_config(&MINIMAL.replace("seed = 1", "seed = 1\nwindow = \"wide\"")).unwrap_err();
        assert_eq!(e.line, Some(3), "{e}");
    }

    #[test]
    fn round_trip() {
        let text = r#"
command = "fidi"
seed = 7
replicates = 500
route = "direct"

[model]
family = "mixture"
p = 0.3
[model.first]
family = "brown_resnick"
scale = 2.0
[model.second]
family = "independent"

[fidi]
points = [0, 2]
thresholds = [1.0, 2.0]
"#;
        let c = parse_config(text).unwrap();
        let again = parse_config(&c.to_toml()).unwrap();
        assert_eq!(c, again);
    }
}
