use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{model, usage, Result};
use crate::lattice::{LatticePoint, Window};

/// Variogram `γ(h) = Var(W(t + h) − W(t))` of a Gaussian field with
/// stationary increments.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Variogram {
    /// `γ(h) = scale · |h|^exponent`, Euclidean norm, `exponent ∈ (0, 2]`.
    Power {
        scale: f64,
        exponent: f64,
    },
    Table(VariogramTable),
}

impl Variogram {
    /// `γ(h) = scale · |h|`.
    pub fn linear(scale: f64) -> Self {
        Variogram::Power { scale, exponent: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Variogram::Power { scale, exponent } => {
                if !(scale.is_finite() && *scale > 0.0) {
                    return model(format!("variogram scale must be positive, got {scale}"));
                }
                if !(*exponent > 0.0 && *exponent <= 2.0) {
                    return model(format!("variogram exponent must lie in (0, 2], got {exponent}"));
                }
                Ok(())
            }
            Variogram::Table(_) => Ok(()),
        }
    }

    pub fn eval(&self, h: &LatticePoint) -> Result<f64> {
        match self {
            Variogram::Power { scale, exponent } => Ok(scale * h.euclidean_norm().powf(*exponent)),
            Variogram::Table(t) => t.eval(h),
        }
    }
}

/// A variogram given pointwise. Offsets and their negatives share a value;
/// `γ(0) = 0` is implied.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VariogramTable {
    entries: BTreeMap<LatticePoint, f64>,
}

impl VariogramTable {
    pub fn new(entries: impl IntoIterator<Item = (LatticePoint, f64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        let mut dim = None;
        for (h, g) in entries {
            if *dim.get_or_insert(h.dim()) != h.dim() {
                return model("variogram table mixes dimensions");
            }
            if !(g.is_finite() && g >= 0.0) {
                return model(format!("variogram value at {h} must be non-negative, got {g}"));
            }
            if h.is_origin() && g != 0.0 {
                return model("variogram must vanish at the origin");
            }
            let key = canonical(&h);
            if let Some(prev) = map.insert(key, g) {
                if prev != g {
                    return model(format!("variogram table is not symmetric at {h}"));
                }
            }
        }
        if map.is_empty() {
            return model("variogram table is empty");
        }
        Ok(VariogramTable { entries: map })
    }

    /// Parses lines `t_1 [t_2 ...] gamma`, separated by whitespace or commas.
    /// Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> =
                line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
            if fields.len() < 2 {
                return usage(format!("variogram table line {}: expected offset and value", no + 1));
            }
            let (coords, value) = fields.split_at(fields.len() - 1);
            let coords: Vec<i64> = coords
                .iter()
                .map(|s| s.parse::<i64>())
                .collect::<std::result::Result<_, _>>()
                .or_else(|e| usage(format!("variogram table line {}: {e}", no + 1)))?;
            let value: f64 = value[0].parse().or_else(|e| usage(format!("variogram table line {}: {e}", no + 1)))?;
            entries.push((LatticePoint::new(coords), value));
        }
        VariogramTable::new(entries)
    }

    pub fn dim(&self) -> usize {
        self.entries.keys().next().map_or(1, |h| h.dim())
    }

    pub fn eval(&self, h: &LatticePoint) -> Result<f64> {
        if h.is_origin() {
            return Ok(0.0);
        }
        match self.entries.get(&canonical(h)) {
            Some(g) => Ok(*g),
            None => model(format!("variogram table has no entry for offset {h}")),
        }
    }
}

/// The representative of `{h, −h}` used as table key.
fn canonical(h: &LatticePoint) -> LatticePoint {
    let neg = -h;
    if neg < *h {
        neg
    } else {
        h.clone()
    }
}

/// Tail field generated by a summable sequence: `Θ(i) = c_{i+S}/c_S` with
/// `P(S = i) = c_i^α / C`, `C = Σ c^α`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SequenceModel {
    coeffs: Vec<(LatticePoint, f64)>,
    alpha: f64,
}

impl SequenceModel {
    pub fn new(coeffs: impl IntoIterator<Item = (LatticePoint, f64)>, alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return model(format!("alpha must be positive, got {alpha}"));
        }
        let mut map: BTreeMap<LatticePoint, f64> = BTreeMap::new();
        for (t, c) in coeffs {
            if !(c.is_finite() && c >= 0.0) {
                return model(format!("coefficient at {t} must be non-negative, got {c}"));
            }
            if map.insert(t.clone(), c).is_some() {
                return model(format!("coefficient at {t} given twice"));
            }
        }
        let Some(dim) = map.keys().next().map(|t| t.dim()) else {
            return model("sequence model needs at least one coefficient");
        };
        if map.keys().any(|t| t.dim() != dim) {
            return model("sequence coefficients mix dimensions");
        }
        if map.values().all(|&c| c == 0.0) {
            return model("all sequence coefficients are zero");
        }
        Ok(SequenceModel { coeffs: map.into_iter().collect(), alpha })
    }

    /// Coefficients `c_0, c_1, ...` on consecutive points of `Z`.
    pub fn from_slice(c: &[f64], alpha: f64) -> Result<Self> {
        SequenceModel::new(c.iter().enumerate().map(|(i, &v)| (LatticePoint::from(i as i64), v)), alpha)
    }

    pub fn coeffs(&self) -> &[(LatticePoint, f64)] {
        &self.coeffs
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.coeffs[0].0.dim()
    }

    /// `Σ c^α`.
    pub fn total_mass(&self) -> f64 {
        self.coeffs.iter().map(|(_, c)| c.powf(self.alpha)).sum()
    }

    /// `max c^α / Σ c^α`.
    pub fn exact_theta(&self) -> f64 {
        let max = self.coeffs.iter().map(|(_, c)| c.powf(self.alpha)).fold(0.0, f64::max);
        max / self.total_mass()
    }

    pub(crate) fn support(&self) -> Window {
        let pts: Vec<LatticePoint> = self.coeffs.iter().map(|(t, _)| t.clone()).collect();
        Window::bounding(&pts).expect("coefficient set is non-empty")
    }
}

/// A spectral model family.
///
/// `Mixture` is the field `max(p^{1/α} η_1, (1 − p)^{1/α} η_2)` of two
/// independent max-stable fields; for `α = 1` this is `max(p η_1, (1−p) η_2)`.
/// `Perturbed` overrides `Θ(0)`; it is not a valid model and exists only to
/// calibrate the verification harness.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelSpec {
    BrownResnick { variogram: Variogram, dim: usize },
    Sequence(SequenceModel),
    Independent { dim: usize },
    Alternating,
    Product { first: Box<ModelSpec>, second: Box<ModelSpec> },
    Mixture { p: f64, first: Box<ModelSpec>, second: Box<ModelSpec> },
    FromTail { tail: Box<ModelSpec>, support: Window, weights: Option<Vec<f64>> },
    Perturbed { base: Box<ModelSpec>, origin_value: f64 },
}

impl ModelSpec {
    pub fn brown_resnick(variogram: Variogram, dim: usize) -> Self {
        ModelSpec::BrownResnick { variogram, dim }
    }

    pub fn sequence(c: &[f64], alpha: f64) -> Result<Self> {
        Ok(ModelSpec::Sequence(SequenceModel::from_slice(c, alpha)?))
    }

    pub fn product(first: ModelSpec, second: ModelSpec) -> Self {
        ModelSpec::Product { first: Box::new(first), second: Box::new(second) }
    }

    pub fn mixture(p: f64, first: ModelSpec, second: ModelSpec) -> Self {
        ModelSpec::Mixture { p, first: Box::new(first), second: Box::new(second) }
    }

    pub fn perturbed(base: ModelSpec, origin_value: f64) -> Self {
        ModelSpec::Perturbed { base: Box::new(base), origin_value }
    }

    /// Lattice dimension; `None` never occurs for a validated model.
    pub fn dim(&self) -> usize {
        match self {
            ModelSpec::BrownResnick { dim, .. } | ModelSpec::Independent { dim } => *dim,
            ModelSpec::Sequence(m) => m.dim(),
            ModelSpec::Alternating => 1,
            ModelSpec::Product { first, second } => first.dim() + second.dim(),
            ModelSpec::Mixture { first, .. } => first.dim(),
            ModelSpec::FromTail { tail, .. } => tail.dim(),
            ModelSpec::Perturbed { base, .. } => base.dim(),
        }
    }

    fn declared_alpha(&self) -> Option<f64> {
        match self {
            ModelSpec::Sequence(m) => Some(m.alpha()),
            ModelSpec::Product { first, second } | ModelSpec::Mixture { first, second, .. } => {
                first.declared_alpha().or_else(|| second.declared_alpha())
            }
            ModelSpec::FromTail { tail, .. } => tail.declared_alpha(),
            ModelSpec::Perturbed { base, .. } => base.declared_alpha(),
            _ => None,
        }
    }

    /// Tail index. Only sequence models declare one; the other families are
    /// used with `α = 1`.
    pub fn alpha(&self) -> f64 {
        self.declared_alpha().unwrap_or(1.0)
    }

    /// Whether `Θ` is a fixed function (no randomness at all).
    pub fn is_deterministic(&self) -> bool {
        match self {
            ModelSpec::Independent { .. } | ModelSpec::Alternating => true,
            ModelSpec::Product { first, second } => first.is_deterministic() && second.is_deterministic(),
            ModelSpec::FromTail { tail, .. } => tail.is_deterministic(),
            ModelSpec::Perturbed { base, .. } => base.is_deterministic(),
            _ => false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::BrownResnick { variogram, dim } => {
                if *dim == 0 {
                    return model("dimension must be at least 1");
                }
                if let Variogram::Table(t) = variogram {
                    if t.dim() != *dim {
                        return model(format!("variogram table has dimension {}, model {dim}", t.dim()));
                    }
                }
                variogram.validate()
            }
            ModelSpec::Independent { dim } => {
                if *dim == 0 {
                    return model("dimension must be at least 1");
                }
                Ok(())
            }
            ModelSpec::Sequence(_) | ModelSpec::Alternating => Ok(()),
            ModelSpec::Product { first, second } => {
                first.validate()?;
                second.validate()?;
                check_alpha(first, second)
            }
            ModelSpec::Mixture { p, first, second } => {
                if !(*p > 0.0 && *p < 1.0) {
                    return model(format!("mixture weight must lie in (0, 1), got {p}"));
                }
                first.validate()?;
                second.validate()?;
                if first.dim() != second.dim() {
                    return model("mixture components have different dimensions");
                }
                check_alpha(first, second)
            }
            ModelSpec::FromTail { tail, support, weights } => {
                tail.validate()?;
                if support.dim() != tail.dim() {
                    return model("construction support and tail model differ in dimension");
                }
                if let Some(q) = weights {
                    if q.len() != support.len() {
                        return model(format!("{} weights given for a support of {} points", q.len(), support.len()));
                    }
                    if q.iter().any(|&x| !(x.is_finite() && x > 0.0)) {
                        return model("construction weights must be positive");
                    }
                }
                Ok(())
            }
            ModelSpec::Perturbed { base, origin_value } => {
                if !(origin_value.is_finite() && *origin_value > 0.0) {
                    return model("perturbed origin value must be positive");
                }
                base.validate()
            }
        }
    }
}

fn check_alpha(a: &ModelSpec, b: &ModelSpec) -> Result<()> {
    match (a.declared_alpha(), b.declared_alpha()) {
        (Some(x), Some(y)) if x != y => model(format!("components declare different alpha ({x} and {y})")),
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_theta_examples() {
        let m = SequenceModel::from_slice(&[1.0, 1.0], 1.0).unwrap();
        assert_eq!(m.exact_theta(), 0.5);
        let m = SequenceModel::from_slice(&[3.0, 1.0], 1.0).unwrap();
        assert_eq!(m.exact_theta(), 0.75);
        let geo =
            SequenceModel::new((-20..=20).map(|t: i64| (LatticePoint::from(t), 0.5f64.powi(t.abs() as i32))), 1.0)
                .unwrap();
        let c = 1.0 + 2.0 * (1.0 - 0.5f64.powi(20));
        assert!((geo.exact_theta() - 1.0 / c).abs() < 1e-15);
        assert!((geo.exact_theta() - 1.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn sequence_rejects_zero_and_negative() {
        assert!(SequenceModel::from_slice(&[0.0, 0.0], 1.0).is_err());
        assert!(SequenceModel::from_slice(&[1.0, -1.0], 1.0).is_err());
        assert!(SequenceModel::from_slice(&[1.0], 0.0).is_err());
    }

    #[test]
    fn table_parsing_and_symmetry() {
        let t = VariogramTable::parse("# offsets\n1 0.5\n2, 0.9\n-3 1.2\n").unwrap();
        assert_eq!(t.eval(&LatticePoint::from(-1)).unwrap(), 0.5);
        assert_eq!(t.eval(&LatticePoint::from(3)).unwrap(), 1.2);
        assert_eq!(t.eval(&LatticePoint::from(0)).unwrap(), 0.0);
        assert!(t.eval(&LatticePoint::from(4)).is_err());
        assert!(VariogramTable::parse("1 0.5\n-1 0.6").is_err());
        assert!(VariogramTable::parse("0 0.1").is_err());
        assert!(VariogramTable::parse("1 x").is_err());
    }

    #[test]
    fn mixture_and_product_validation() {
        let seq = ModelSpec::sequence(&[3.0, 1.0], 1.0).unwrap();
        assert!(ModelSpec::mixture(1.0, seq.clone(), ModelSpec::Alternating).validate().is_err());
        assert!(ModelSpec::mixture(0.7, seq.clone(), ModelSpec::Alternating).validate().is_ok());
        let p = ModelSpec::product(seq.clone(), seq);
        assert_eq!(p.dim(), 2);
        assert!(Variogram::Power { scale: 1.0, exponent: 2.5 }.validate().is_err());
    }
}
