use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use super::gaussian::IncrementField;
use super::models::{ModelSpec, SequenceModel};
use crate::error::{usage, Result};
use crate::lattice::Window;

/// Rooted sampler of a spectral tail field on a fixed domain window.
#[derive(Clone, Debug)]
pub struct ThetaSampler {
    domain: Window,
    origin: Option<usize>,
    kind: Kind,
}

#[derive(Clone, Debug)]
enum Kind {
    Gaussian(IncrementField),
    Sequence(SequenceSampler),
    Independent,
    Alternating { coord: Vec<i64> },
    Product { first: Box<ThetaSampler>, second: Box<ThetaSampler> },
    Mixture { p: f64, first: Box<ThetaSampler>, second: Box<ThetaSampler> },
    Perturbed { base: Box<ThetaSampler>, origin_value: f64 },
}

impl ThetaSampler {
    pub fn new(model: &ModelSpec, domain: &Window) -> Result<Self> {
        model.validate()?;
        if model.dim() != domain.dim() {
            return usage(format!(
                "model has dimension {} but window {domain} has dimension {}",
                model.dim(),
                domain.dim()
            ));
        }
        let kind = match model {
            ModelSpec::BrownResnick { variogram, .. } => Kind::Gaussian(IncrementField::new(variogram, domain)?),
            ModelSpec::Sequence(m) => Kind::Sequence(SequenceSampler::new(m, domain)),
            ModelSpec::Independent { .. } => Kind::Independent,
            ModelSpec::Alternating => Kind::Alternating { coord: domain.points().map(|p| p.coords()[0]).collect() },
            ModelSpec::Product { first, second } => {
                let k = first.dim();
                Kind::Product {
                    first: Box::new(ThetaSampler::new(first, &domain.project(0..k))?),
                    second: Box::new(ThetaSampler::new(second, &domain.project(k..domain.dim()))?),
                }
            }
            ModelSpec::Mixture { p, first, second } => Kind::Mixture {
                p: *p,
                first: Box::new(ThetaSampler::new(first, domain)?),
                second: Box::new(ThetaSampler::new(second, domain)?),
            },
            ModelSpec::FromTail { tail, .. } => return ThetaSampler::new(tail, domain),
            ModelSpec::Perturbed { base, origin_value } => {
                Kind::Perturbed { base: Box::new(ThetaSampler::new(base, domain)?), origin_value: *origin_value }
            }
        };
        Ok(ThetaSampler { domain: domain.clone(), origin: domain.origin_index(), kind })
    }

    pub fn domain(&self) -> &Window {
        &self.domain
    }

    pub fn origin_index(&self) -> Option<usize> {
        self.origin
    }

    /// Fills `out[t] = Θ(t − root)` for every point `t` of the domain.
    pub fn sample_rooted<R: Rng + ?Sized>(&self, rng: &mut R, root: usize, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.domain.len());
        match &self.kind {
            Kind::Gaussian(g) => g.sample_rooted(rng, root, out),
            Kind::Sequence(s) => s.sample_rooted(rng, root, out),
            Kind::Independent => {
                out.iter_mut().for_each(|v| *v = 0.0);
                out[root] = 1.0;
            }
            Kind::Alternating { coord } => {
                let r = coord[root];
                for (v, &c) in out.iter_mut().zip(coord) {
                    *v = if (c - r).rem_euclid(2) == 0 { 1.0 } else { 0.0 };
                }
            }
            Kind::Product { first, second } => {
                let n2 = second.domain.len();
                let mut a = vec![0.0; first.domain.len()];
                let mut b = vec![0.0; n2];
                first.sample_rooted(rng, root / n2, &mut a);
                second.sample_rooted(rng, root % n2, &mut b);
                for (i, x) in a.iter().enumerate() {
                    for (j, y) in b.iter().enumerate() {
                        out[i * n2 + j] = x * y;
                    }
                }
            }
            Kind::Mixture { p, first, second } => {
                if rng.random::<f64>() < *p {
                    first.sample_rooted(rng, root, out)
                } else {
                    second.sample_rooted(rng, root, out)
                }
            }
            Kind::Perturbed { base, origin_value } => {
                base.sample_rooted(rng, root, out);
                out[root] = *origin_value;
            }
        }
    }

    /// Fills `out` with `Θ` on the domain. Panics if the domain misses the
    /// origin.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let root = self.origin.expect("sampling domain must contain the origin");
        self.sample_rooted(rng, root, out);
    }
}

/// Dense coefficient lookup plus the law of the random shift `S`.
#[derive(Clone, Debug)]
struct SequenceSampler {
    /// Domain coordinates, flattened.
    coords: Vec<i64>,
    dim: usize,
    support: Window,
    c: Vec<f64>,
    /// Support indices with positive coefficient, and their `c^α` weights.
    atoms: Vec<usize>,
    law: WeightedIndex<f64>,
}

impl SequenceSampler {
    fn new(m: &SequenceModel, domain: &Window) -> Self {
        let support = m.support();
        let mut c = vec![0.0; support.len()];
        for (t, v) in m.coeffs() {
            c[support.index_of(t).expect("support bounds every coefficient")] = *v;
        }
        let atoms: Vec<usize> = (0..c.len()).filter(|&i| c[i] > 0.0).collect();
        let law = WeightedIndex::new(atoms.iter().map(|&i| c[i].powf(m.alpha()))).expect("positive mass");
        let coords = domain.points().flat_map(|p| p.coords().to_vec()).collect();
        SequenceSampler { coords, dim: domain.dim(), support, c, atoms, law }
    }

    fn sample_rooted<R: Rng + ?Sized>(&self, rng: &mut R, root: usize, out: &mut [f64]) {
        let s_idx = self.atoms[self.law.sample(rng)];
        let s = self.support.point_at(s_idx);
        let cs = self.c[s_idx];
        let d = self.dim;
        let r = &self.coords[root * d..root * d + d];
        let mut at = vec![0i64; d];
        for (t, v) in out.iter_mut().enumerate() {
            let x = &self.coords[t * d..t * d + d];
            for j in 0..d {
                at[j] = x[j] - r[j] + s.coords()[j];
            }
            *v = self.support.index_of_coords(&at).map_or(0.0, |i| self.c[i] / cs);
        }
    }
}
