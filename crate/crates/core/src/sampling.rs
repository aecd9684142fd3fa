//! Seeded unit-sphere directions.
//!
//! Each direction is a pure function of `(mode, seed, index)`, so sampled
//! scans can be evaluated in any order or in parallel and still produce
//! identical reports.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

const PRIMES: [u64; 32] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
    97, 101, 103, 107, 109, 113, 127, 131,
];

/// Offset between the Halton windows of consecutive seeds.
const SEED_STRIDE: u64 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingMode {
    /// Halton sequence pushed through Box-Muller, then normalized.
    #[default]
    LowDiscrepancy,
    /// ChaCha8 normals, one stream per sample index.
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SphereSampler {
    pub mode: SamplingMode,
    pub seed: u64,
}

fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while index > 0 {
        out += (index % base) as f64 * f;
        index /= base;
        f *= inv;
    }
    out
}

impl SphereSampler {
    pub fn new(seed: u64) -> Self {
        Self {
            mode: SamplingMode::LowDiscrepancy,
            seed,
        }
    }

    pub fn with_mode(mode: SamplingMode, seed: u64) -> Self {
        Self { mode, seed }
    }

    /// Euclidean-unit direction number `index` in `R^dim`.
    pub fn direction(&self, dim: usize, index: usize) -> DVector<f64> {
        if dim == 0 {
            return DVector::zeros(0);
        }
        let mut g = match self.mode {
            SamplingMode::LowDiscrepancy => self.halton_gaussian(dim, index),
            SamplingMode::Uniform => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream(index as u64);
                DVector::from_fn(dim, |_, _| StandardNormal.sample(&mut rng))
            }
        };
        let n = g.norm();
        if n == 0.0 || !n.is_finite() {
            g = DVector::zeros(dim);
            g[index % dim] = 1.0;
            return g;
        }
        g / n
    }

    fn halton_gaussian(&self, dim: usize, index: usize) -> DVector<f64> {
        assert!(dim <= PRIMES.len(), "low-discrepancy sampling supports up to 32 dimensions");
        let k = 1 + index as u64 + self.seed.wrapping_mul(SEED_STRIDE);
        DVector::from_fn(dim, |i, _| {
            let pair = i / 2;
            let u1 = radical_inverse(k, PRIMES[(2 * pair) % PRIMES.len()]);
            let u2 = radical_inverse(k, PRIMES[(2 * pair + 1) % PRIMES.len()]);
            let r = (-2.0 * u1.max(f64::MIN_POSITIVE).ln()).sqrt();
            let theta = std::f64::consts::TAU * u2;
            if i % 2 == 0 {
                r * theta.cos()
            } else {
                r * theta.sin()
            }
        })
    }

    /// Direction inside the span of the orthonormal columns of `basis`.
    pub fn direction_in(&self, basis: &DMatrix<f64>, index: usize) -> DVector<f64> {
        basis * self.direction(basis.ncols(), index)
    }
}

/// Coordinate axes lying in the span of `basis` (orthonormal columns).
///
/// Scans evaluate these before the sampled directions, so extremes that
/// sit on a coordinate axis are hit exactly.
pub fn axis_probes(basis: &DMatrix<f64>, tol: f64) -> Vec<DVector<f64>> {
    let n = basis.nrows();
    (0..n)
        .filter_map(|i| {
            let mut e = DVector::zeros(n);
            e[i] = 1.0;
            let r = crate::linalg::residual_outside(basis, &e).norm();
            (basis.ncols() > 0 && r <= tol).then_some(e)
        })
        .collect()
}
