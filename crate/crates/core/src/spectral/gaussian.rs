//! Gaussian fields with stationary increments on a finite window.

use nalgebra::{Cholesky, DMatrix};
use rand::Rng;
use rand_distr::StandardNormal;

use super::models::Variogram;
use crate::error::{model, Result};
use crate::lattice::Window;

const JITTER_START: f64 = 1e-10;
const JITTER_MAX: f64 = 1e-6;

/// Samples `exp(W(t) − W(r) − γ(t − r)/2)` on a window for any root `r` of
/// the window. `W` is anchored at one window point; re-rooting uses the
/// stationarity of increments, so a single factorization serves every root.
#[derive(Clone, Debug)]
pub(crate) struct IncrementField {
    n: usize,
    anchor: usize,
    /// Lower Cholesky factor over the non-anchor points.
    chol: DMatrix<f64>,
    /// `γ` on the difference box, plus the index split `idx(t − r) = a[t] + b[r]`.
    gamma: Vec<f64>,
    a: Vec<usize>,
    b: Vec<usize>,
}

impl IncrementField {
    pub fn new(v: &Variogram, domain: &Window) -> Result<Self> {
        let n = domain.len();
        let diff = domain.difference_box(domain);
        let mut gamma = Vec::with_capacity(diff.len());
        for h in diff.points() {
            gamma.push(v.eval(&h)?);
        }
        let strides = strides(&diff);
        let lo = domain.lower().coords();
        let hi = domain.upper().coords();
        let mut a = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        for p in domain.points() {
            let c = p.coords();
            a.push((0..c.len()).map(|j| (c[j] - lo[j]) as usize * strides[j]).sum());
            b.push((0..c.len()).map(|j| (hi[j] - c[j]) as usize * strides[j]).sum());
        }
        let anchor = domain.origin_index().unwrap_or(0);
        let g = |s: usize, t: usize| gamma[a[s] + b[t]];
        let others: Vec<usize> = (0..n).filter(|&i| i != anchor).collect();
        let m = others.len();
        let cov = DMatrix::from_fn(m, m, |i, j| {
            let (s, t) = (others[i], others[j]);
            0.5 * (g(s, anchor) + g(t, anchor) - g(s, t))
        });
        let chol = if m == 0 { DMatrix::zeros(0, 0) } else { factor(cov)? };
        Ok(IncrementField { n, anchor, chol, gamma, a, b })
    }

    pub fn gamma_between(&self, t: usize, r: usize) -> f64 {
        self.gamma[self.a[t] + self.b[r]]
    }

    /// Fills `out[t] = W(t)` with `W(anchor) = 0`.
    fn sample_w<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let m = self.n - 1;
        let z: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
        let mut k = 0;
        for (t, o) in out.iter_mut().enumerate() {
            if t == self.anchor {
                *o = 0.0;
                continue;
            }
            let row = self.chol.row(k);
            let mut s = 0.0;
            for j in 0..=k {
                s += row[j] * z[j];
            }
            *o = s;
            k += 1;
        }
    }

    /// `out[t] = exp(W(t) − W(root) − γ(t − root)/2)`.
    pub fn sample_rooted<R: Rng + ?Sized>(&self, rng: &mut R, root: usize, out: &mut [f64]) {
        self.sample_w(rng, out);
        let w_root = out[root];
        for (t, o) in out.iter_mut().enumerate() {
            *o = (*o - w_root - 0.5 * self.gamma_between(t, root)).exp();
        }
        out[root] = 1.0;
    }
}

fn strides(w: &Window) -> Vec<usize> {
    let ext = w.extents();
    let mut s = vec![1usize; ext.len()];
    for j in (0..ext.len().saturating_sub(1)).rev() {
        s[j] = s[j + 1] * ext[j + 1];
    }
    s
}

/// Cholesky with diagonal jitter escalating by ×10 from 1e-10 to 1e-6.
fn factor(cov: DMatrix<f64>) -> Result<DMatrix<f64>> {
    if let Some(c) = Cholesky::new(cov.clone()) {
        return Ok(c.l());
    }
    let mut eps = JITTER_START;
    while eps <= JITTER_MAX * 1.000_001 {
        let mut jittered = cov.clone();
        for i in 0..jittered.nrows() {
            jittered[(i, i)] += eps;
        }
        if let Some(c) = Cholesky::new(jittered) {
            return Ok(c.l());
        }
        eps *= 10.0;
    }
    model("covariance is not positive semi-definite; the variogram is not conditionally negative definite")
}
