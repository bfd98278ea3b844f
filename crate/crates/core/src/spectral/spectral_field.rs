//! Spectral fields `Z` with `E Z^α(t) = 1`.
//!
//! The construction route turns any tail field into a spectral field. With
//! positive weights `q` on a finite box `K`, draw `N ~ q`, sample `Θ(· − N)`
//! on `K`, and set
//!
//! ```text
//! Z(t) = Θ(t − N) / q_N^{1/α} · 1(N is the first maximizer over K of q_i Θ^α(i − N)).
//! ```
//!
//! The Pareto factor of `Y = RΘ` cancels. For `t ∈ K` this gives
//! `E Z^α(t) = 1` exactly and the finite-dimensional laws on `K` are those of
//! the stationary field with tail field `Θ`, so no truncation bias arises on
//! `K` itself. Points outside `K` are never evaluated. Every value obeys
//! `Z(t) ≤ q_t^{-1/α}`, which gives the de Haan simulator an exact stopping
//! bound.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::Serialize;

use super::models::ModelSpec;
use super::sampler::ThetaSampler;
use crate::error::{usage, Result};
use crate::lattice::{LatticePoint, Window};

/// How a spectral field is obtained from a model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralRoute {
    /// Construction from the tail field on the target window enlarged by
    /// `margin` points per side, uniform weights.
    Constructed { margin: i64 },
    /// `Z(t) = exp(W(t) − γ(t)/2)`; Brown-Resnick only.
    Direct,
}

impl Default for SpectralRoute {
    fn default() -> Self {
        SpectralRoute::Constructed { margin: 0 }
    }
}

#[derive(Clone, Debug)]
pub struct SpectralSampler {
    window: Window,
    kind: Kind,
}

#[derive(Clone, Debug)]
enum Kind {
    Constructed(Box<Construction>),
    Direct { theta: Box<ThetaSampler>, root: usize, map: Vec<usize> },
    Mixture { p: f64, first: Box<SpectralSampler>, second: Box<SpectralSampler> },
}

#[derive(Clone, Debug)]
struct Construction {
    theta: ThetaSampler,
    alpha: f64,
    /// `None` for uniform weights.
    weights: Option<(Vec<f64>, WeightedIndex<f64>)>,
    /// `q_i^{-1/α}` per support point.
    scale: Vec<f64>,
    /// Target index → support index.
    map: Vec<usize>,
}

impl SpectralSampler {
    pub fn new(model: &ModelSpec, w: &Window, route: SpectralRoute) -> Result<Self> {
        model.validate()?;
        if model.dim() != w.dim() {
            return usage(format!("model has dimension {} but window {w} has dimension {}", model.dim(), w.dim()));
        }
        let kind = match (model, route) {
            (ModelSpec::Mixture { p, first, second }, _) => Kind::Mixture {
                p: *p,
                first: Box::new(SpectralSampler::new(first, w, route)?),
                second: Box::new(SpectralSampler::new(second, w, route)?),
            },
            (ModelSpec::FromTail { tail, support, weights }, SpectralRoute::Constructed { .. }) => {
                if !support.contains_window(w) {
                    return usage(format!("window {w} is not inside the construction support {support}"));
                }
                Kind::Constructed(Box::new(Construction::new(tail, support, weights.clone(), w)?))
            }
            (_, SpectralRoute::Constructed { margin }) => {
                if margin < 0 {
                    return usage("construction margin must be non-negative");
                }
                let support = w.expand(margin)?;
                Kind::Constructed(Box::new(Construction::new(model, &support, None, w)?))
            }
            (m, SpectralRoute::Direct) if has_direct_form(m) => {
                let domain = w.hull(&Window::new(LatticePoint::origin(w.dim()), LatticePoint::origin(w.dim()))?)?;
                let theta = ThetaSampler::new(m, &domain)?;
                let root = domain.origin_index().expect("hull contains the origin");
                let map = w.points().map(|p| domain.index_of(&p).expect("hull contains window")).collect();
                Kind::Direct { theta: Box::new(theta), root, map }
            }
            (_, SpectralRoute::Direct) => {
                return usage("the direct spectral route exists only for Brown-Resnick models");
            }
        };
        Ok(SpectralSampler { window: w.clone(), kind })
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    /// An almost-sure upper bound for `max_t Z(t)` over the window, when one
    /// is known.
    pub fn bound(&self) -> Option<f64> {
        match &self.kind {
            Kind::Constructed(c) => Some(c.map.iter().map(|&i| c.scale[i]).fold(0.0, f64::max)),
            Kind::Direct { .. } => None,
            Kind::Mixture { first, second, .. } => Some(first.bound()?.max(second.bound()?)),
        }
    }

    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.window.len());
        match &self.kind {
            Kind::Constructed(c) => c.sample_into(rng, out),
            Kind::Direct { theta, root, map } => {
                let mut buf = vec![0.0; theta.domain().len()];
                theta.sample_rooted(rng, *root, &mut buf);
                for (o, &i) in out.iter_mut().zip(map) {
                    *o = buf[i];
                }
            }
            Kind::Mixture { p, first, second } => {
                if rng.random::<f64>() < *p {
                    first.sample_into(rng, out)
                } else {
                    second.sample_into(rng, out)
                }
            }
        }
    }
}

fn has_direct_form(m: &ModelSpec) -> bool {
    match m {
        ModelSpec::BrownResnick { .. } => true,
        ModelSpec::Perturbed { base, .. } => has_direct_form(base),
        _ => false,
    }
}

impl Construction {
    fn new(tail: &ModelSpec, support: &Window, weights: Option<Vec<f64>>, target: &Window) -> Result<Self> {
        let theta = ThetaSampler::new(tail, support)?;
        let alpha = tail.alpha();
        let n = support.len();
        let (weights, q) = match weights {
            None => (None, vec![1.0 / n as f64; n]),
            Some(raw) => {
                let total: f64 = raw.iter().sum();
                let q: Vec<f64> = raw.iter().map(|x| x / total).collect();
                let law = WeightedIndex::new(&q).or_else(|e| usage(format!("invalid weights: {e}")))?;
                (Some((q.clone(), law)), q)
            }
        };
        let scale = q.iter().map(|x| x.powf(-1.0 / alpha)).collect();
        let map = target.points().map(|p| support.index_of(&p).expect("target inside support")).collect();
        Ok(Construction { theta, alpha, weights, scale, map })
    }

    fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let n = self.scale.len();
        let root = match &self.weights {
            None => rng.random_range(0..n),
            Some((_, law)) => law.sample(rng),
        };
        let mut buf = vec![0.0; n];
        self.theta.sample_rooted(rng, root, &mut buf);
        let first_max = match &self.weights {
            None => first_argmax(buf.iter().copied()),
            Some((q, _)) if self.alpha == 1.0 => first_argmax(buf.iter().zip(q).map(|(v, w)| v * w)),
            Some((q, _)) => first_argmax(buf.iter().zip(q).map(|(v, w)| w * v.powf(self.alpha))),
        };
        if first_max != root {
            out.iter_mut().for_each(|v| *v = 0.0);
            return;
        }
        let s = self.scale[root];
        for (o, &i) in out.iter_mut().zip(&self.map) {
            *o = buf[i] * s;
        }
    }
}

/// Index of the first maximal element.
fn first_argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (i, v) in values.enumerate() {
        if v > best_v {
            best = i;
            best_v = v;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::stream;
    use crate::spectral::models::Variogram;

    #[test]
    fn independent_construction_is_an_indicator() {
        let w = Window::cube(1, 0, 4).unwrap();
        let z = SpectralSampler::new(&ModelSpec::Independent { dim: 1 }, &w, SpectralRoute::default()).unwrap();
        assert_eq!(z.bound(), Some(5.0));
        let mut rng = stream(9, 0);
        let mut out = vec![0.0; 5];
        for _ in 0..50 {
            z.sample_into(&mut rng, &mut out);
            assert_eq!(out.iter().filter(|&&v| v == 5.0).count(), 1);
            assert_eq!(out.iter().sum::<f64>(), 5.0);
        }
    }

    #[test]
    fn sequence_construction_mean_is_exact() {
        // Enumerating N ∈ {0, 1} and the two atoms gives E Z(0) = E Z(1) = 1;
        // here we check it by brute force over many draws.
        let w = Window::cube(1, 0, 1).unwrap();
        let m = ModelSpec::sequence(&[3.0, 1.0], 1.0).unwrap();
        let z = SpectralSampler::new(&m, &w, SpectralRoute::default()).unwrap();
        let mut rng = stream(10, 0);
        let mut out = vec![0.0; 2];
        let n = 200_000;
        let mut sums = [0.0; 2];
        for _ in 0..n {
            z.sample_into(&mut rng, &mut out);
            assert!(out == [2.0, 2.0 / 3.0] || out == [2.0, 0.0] || out == [0.0, 2.0] || out == [0.0, 0.0]);
            sums[0] += out[0];
            sums[1] += out[1];
        }
        assert!((sums[0] / n as f64 - 1.0).abs() < 0.01);
        assert!((sums[1] / n as f64 - 1.0).abs() < 0.01);
    }

    #[test]
    fn direct_route_only_for_brown_resnick() {
        let w = Window::cube(1, 2, 4).unwrap();
        assert!(SpectralSampler::new(&ModelSpec::Alternating, &w, SpectralRoute::Direct).is_err());
        let br = ModelSpec::brown_resnick(Variogram::linear(1.0), 1);
        let z = SpectralSampler::new(&br, &w, SpectralRoute::Direct).unwrap();
        assert_eq!(z.bound(), None);
        let mut out = vec![0.0; 3];
        z.sample_into(&mut stream(1, 1), &mut out);
        assert!(out.iter().all(|v| *v > 0.0));
    }

    #[test]
    fn weighted_construction_requires_support() {
        let support = Window::cube(1, 0, 2).unwrap();
        let m = ModelSpec::FromTail {
            tail: Box::new(ModelSpec::Independent { dim: 1 }),
            support: support.clone(),
            weights: Some(vec![1.0, 2.0, 1.0]),
        };
        assert!(SpectralSampler::new(&m, &Window::cube(1, 0, 3).unwrap(), SpectralRoute::default()).is_err());
        let z = SpectralSampler::new(&m, &support, SpectralRoute::default()).unwrap();
        assert_eq!(z.bound(), Some(4.0));
    }
}
