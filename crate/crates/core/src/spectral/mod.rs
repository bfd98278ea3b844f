//! Model families and samplers for spectral tail fields `Θ`, tail fields
//! `Y = RΘ` and spectral fields `Z`.
//!
//! Every sampler works on a fixed *domain* window and fills a dense buffer in
//! the window's storage order. The primitive is rooted sampling: for a root
//! point `r` of the domain, fill `Θ(t − r)` for every `t` in the domain. Plain
//! `Θ` is the root at the origin; the spectral-field construction needs the
//! other roots.

mod gaussian;
mod models;
mod sampler;
mod spectral_field;
mod tilt;

pub use models::{ModelSpec, SequenceModel, Variogram, VariogramTable};
pub use sampler::ThetaSampler;
pub use spectral_field::{SpectralRoute, SpectralSampler};
pub use tilt::{resample_weighted, tilt_spectral, TiltedSample};

use rand::Rng;

use crate::error::{usage, Result};
use crate::lattice::{FieldSample, FieldTag, Window};

/// Draws `R = U^{-1/α}`, `U` uniform on `(0, 1]`.
pub fn pareto<R: Rng + ?Sized>(rng: &mut R, alpha: f64) -> f64 {
    let u: f64 = 1.0 - rng.random::<f64>();
    u.powf(-1.0 / alpha)
}

/// `P(Y(t) ≤ y)` for a Brown-Resnick tail field with `α = 1` and
/// `γ(t) = gamma > 0`: `Φ(ln y / c + c/2) − Φ(ln y / c − c/2) / y`, `c = √γ`.
pub fn br_y_marginal_cdf(gamma: f64, y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    let c = gamma.sqrt();
    let l = y.ln() / c;
    (crate::normal::cdf(l + c / 2.0) - crate::normal::cdf(l - c / 2.0) / y).max(0.0)
}

fn theta_sample<R: Rng + ?Sized>(model: &ModelSpec, w: &Window, rng: &mut R) -> Result<FieldSample> {
    let sampler = ThetaSampler::new(model, w)?;
    let Some(origin) = w.origin_index() else {
        return usage(format!("window {w} does not contain the origin"));
    };
    let mut values = vec![0.0; w.len()];
    sampler.sample_rooted(rng, origin, &mut values);
    Ok(FieldSample { window: w.clone(), values, tag: FieldTag::Theta, weight: None })
}

/// `Θ(t) = exp(W(t) − γ(t)/2)` for a Brown-Resnick model.
pub fn sample_br_theta<R: Rng + ?Sized>(v: &Variogram, w: &Window, rng: &mut R) -> Result<FieldSample> {
    theta_sample(&ModelSpec::BrownResnick { variogram: v.clone(), dim: w.dim() }, w, rng)
}

/// `Θ(i) = c_{i+S}/c_S` with `P(S = i) = c_i^α / Σ c^α`.
pub fn sample_sequence_theta<R: Rng + ?Sized>(m: &SequenceModel, w: &Window, rng: &mut R) -> Result<FieldSample> {
    theta_sample(&ModelSpec::Sequence(m.clone()), w, rng)
}

/// Closed-form extremal index of the sequence model, `max c^α / Σ c^α`.
pub fn exact_sequence_theta(m: &SequenceModel) -> f64 {
    m.exact_theta()
}

/// The tail field of an i.i.d. field: one at the origin, zero elsewhere.
pub fn sample_independent_theta(w: &Window) -> Result<FieldSample> {
    let mut rng = crate::mc::stream(0, 0);
    theta_sample(&ModelSpec::Independent { dim: w.dim() }, w, &mut rng)
}

/// One on even points, zero on odd points (`d = 1`).
pub fn sample_alternating_theta(w: &Window) -> Result<FieldSample> {
    let mut rng = crate::mc::stream(0, 0);
    theta_sample(&ModelSpec::Alternating, w, &mut rng)
}

/// `Θ(t) = Θ_1(t_1) Θ_2(t_2)` with independent factors.
pub fn sample_product_theta<R: Rng + ?Sized>(
    first: &ModelSpec,
    second: &ModelSpec,
    w: &Window,
    rng: &mut R,
) -> Result<FieldSample> {
    let model = ModelSpec::Product { first: Box::new(first.clone()), second: Box::new(second.clone()) };
    theta_sample(&model, w, rng)
}

/// `Θ` for any model family.
pub fn sample_theta<R: Rng + ?Sized>(model: &ModelSpec, w: &Window, rng: &mut R) -> Result<FieldSample> {
    theta_sample(model, w, rng)
}

/// `Y = RΘ` with `R` an independent `α`-Pareto variable.
pub fn sample_y<R: Rng + ?Sized>(model: &ModelSpec, w: &Window, alpha: f64, rng: &mut R) -> Result<FieldSample> {
    if !(alpha > 0.0) {
        return usage("alpha must be positive");
    }
    let mut f = theta_sample(model, w, rng)?;
    let r = pareto(rng, alpha);
    f.values.iter_mut().for_each(|v| *v *= r);
    f.tag = FieldTag::Y;
    Ok(f)
}

/// A spectral field built from the tail field of `tail` with weights
/// `weights` on `support` (uniform when `None`), evaluated on `w ⊆ support`.
pub fn construct_spectral_from_tail<R: Rng + ?Sized>(
    tail: &ModelSpec,
    support: &Window,
    weights: Option<Vec<f64>>,
    w: &Window,
    rng: &mut R,
) -> Result<FieldSample> {
    let model = ModelSpec::FromTail { tail: Box::new(tail.clone()), support: support.clone(), weights };
    let z = SpectralSampler::new(&model, w, SpectralRoute::default())?;
    let mut values = vec![0.0; w.len()];
    z.sample_into(rng, &mut values);
    Ok(FieldSample { window: w.clone(), values, tag: FieldTag::Z, weight: None })
}

/// A spectral field sample of `model` on `w`.
pub fn sample_z<R: Rng + ?Sized>(
    model: &ModelSpec,
    w: &Window,
    route: SpectralRoute,
    rng: &mut R,
) -> Result<FieldSample> {
    let z = SpectralSampler::new(model, w, route)?;
    let mut values = vec![0.0; w.len()];
    z.sample_into(rng, &mut values);
    Ok(FieldSample { window: w.clone(), values, tag: FieldTag::Z, weight: None })
}
