//! The tilted field `Θ_h`, `P(Θ_h ∈ A) = E[Z^α(h) 1(Z/Z(h) ∈ A)]`,
//! represented by importance weights.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use super::models::ModelSpec;
use super::spectral_field::{SpectralRoute, SpectralSampler};
use crate::error::{usage, Result};
use crate::lattice::{FieldSample, FieldTag, LatticePoint, Window};

/// `Z / Z(h)` with weight `Z^α(h)`; all-zero with weight 0 when `Z(h) = 0`.
pub type TiltedSample = FieldSample;

pub fn tilt_spectral<R: Rng + ?Sized>(
    model: &ModelSpec,
    h: &LatticePoint,
    w: &Window,
    route: SpectralRoute,
    rng: &mut R,
) -> Result<TiltedSample> {
    let Some(hi) = w.index_of(h) else {
        return usage(format!("tilt point {h} lies outside window {w}"));
    };
    let z = SpectralSampler::new(model, w, route)?;
    let mut values = vec![0.0; w.len()];
    z.sample_into(rng, &mut values);
    let zh = values[hi];
    let weight = if zh > 0.0 {
        values.iter_mut().for_each(|v| *v /= zh);
        zh.powf(model.alpha())
    } else {
        values.iter_mut().for_each(|v| *v = 0.0);
        0.0
    };
    Ok(FieldSample { window: w.clone(), values, tag: FieldTag::Theta, weight: Some(weight) })
}

/// Unweighted draws from a weighted pool by multinomial resampling.
pub fn resample_weighted<R: Rng + ?Sized>(pool: &[TiltedSample], k: usize, rng: &mut R) -> Result<Vec<FieldSample>> {
    let law = WeightedIndex::new(pool.iter().map(|s| s.weight.unwrap_or(1.0)))
        .or_else(|e| usage(format!("cannot resample: {e}")))?;
    Ok((0..k)
        .map(|_| {
            let mut s = pool[law.sample(rng)].clone();
            s.weight = None;
            s
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::stream;
    use crate::spectral::models::Variogram;

    #[test]
    fn tilted_value_at_h_is_one_and_weights_average_to_one() {
        let m = ModelSpec::brown_resnick(Variogram::linear(1.0), 1);
        let w = Window::cube(1, -2, 2).unwrap();
        let h = LatticePoint::from(1);
        let mut rng = stream(11, 0);
        let n = 20_000;
        let mut wsum = 0.0;
        for _ in 0..n {
            let s = tilt_spectral(&m, &h, &w, SpectralRoute::Direct, &mut rng).unwrap();
            assert_eq!(s.get(&h), 1.0);
            wsum += s.weight.unwrap();
        }
        // Var Z(1) = e − 1, so the mean weight has stderr ≈ 0.009.
        assert!((wsum / n as f64 - 1.0).abs() < 0.04);
    }

    #[test]
    fn resampling_drops_zero_weights() {
        let w = Window::cube(1, 0, 1).unwrap();
        let a = FieldSample { window: w.clone(), values: vec![1.0, 0.0], tag: FieldTag::Theta, weight: Some(0.0) };
        let b = FieldSample { window: w, values: vec![0.5, 1.0], tag: FieldTag::Theta, weight: Some(2.0) };
        let out = resample_weighted(&[a, b.clone()], 10, &mut stream(0, 0)).unwrap();
        assert!(out.iter().all(|s| s.values == b.values && s.weight.is_none()));
    }
}
