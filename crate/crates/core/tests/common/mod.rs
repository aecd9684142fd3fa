#![allow(dead_code)]

use std::collections::BTreeMap;

use homfinsler::minkowski::{MinkowskiNorm, QuarticForm};
use homfinsler::space::{self, LoadedSpace};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn load(name: &str) -> LoadedSpace {
    space::load_space(space::gallery_path(name), 1e-9).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn gallery_names() -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(space::gallery_dir())
        .unwrap()
        .filter_map(|e| {
            let p = e.ok()?.path();
            (p.extension()? == "space").then(|| p.file_stem().unwrap().to_string_lossy().into_owned())
        })
        .collect();
    names.sort();
    names
}

pub fn v(xs: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(xs)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    use rand_distr::{Distribution, StandardNormal};
    DVector::from_fn(n, |_, _| StandardNormal.sample(rng))
}

/// Random invertible matrix, well conditioned enough for basis changes.
pub fn random_basis_change(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    loop {
        let p = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 } + rng.gen_range(-0.8..0.8));
        let sv = p.singular_values();
        if sv.min() > 0.2 * sv.max() {
            return p;
        }
    }
}

/// The norm families exercised by the tensor checks.
pub fn norm_families() -> Vec<(&'static str, MinkowskiNorm)> {
    let a = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, 0.1, 0.3, 1.5, -0.2, 0.1, -0.2, 1.0]);
    let quartic = {
        let mut m = BTreeMap::new();
        for (k, c) in [
            ([0, 0, 0, 0], 2.0),
            ([0, 0, 1, 1], 2.0),
            ([0, 0, 2, 2], 2.0),
            ([1, 1, 1, 1], 1.0),
            ([1, 1, 2, 2], 2.0),
            ([2, 2, 2, 2], 1.0),
            ([0, 1, 1, 2], 0.3),
        ] {
            m.insert(k, c);
        }
        MinkowskiNorm::quartic(QuarticForm::from_monomials(3, m).unwrap())
    };
    vec![
        ("riemannian", MinkowskiNorm::riemannian(a.clone())),
        ("randers", MinkowskiNorm::randers(a, v(&[0.3, -0.2, 0.25]))),
        ("quartic", quartic),
    ]
}

/// Central-difference oracle for derivatives of `E = F²`, independent of
/// the closed forms in the library.
pub struct FiniteDifference<'a> {
    pub energy: &'a dyn Fn(&DVector<f64>) -> f64,
}

impl FiniteDifference<'_> {
    fn shifted(&self, y: &DVector<f64>, steps: &[(usize, f64)]) -> f64 {
        let mut z = y.clone();
        for &(i, s) in steps {
            z[i] += s;
        }
        (self.energy)(&z)
    }

    /// `½ ∂_i ∂_j E`.
    pub fn fundamental(&self, y: &DVector<f64>, h: f64) -> DMatrix<f64> {
        let n = y.len();
        DMatrix::from_fn(n, n, |i, j| {
            let f = |a: f64, b: f64| self.shifted(y, &[(i, a), (j, b)]);
            0.5 * (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4.0 * h * h)
        })
    }

    /// `¼ ∂_i ∂_j ∂_k E`, Richardson-extrapolated from steps `2h` and `h`.
    pub fn cartan(&self, y: &DVector<f64>, h: f64) -> Vec<f64> {
        let coarse = self.cartan_stencil(y, 2.0 * h);
        let fine = self.cartan_stencil(y, h);
        fine.iter().zip(&coarse).map(|(f, c)| (4.0 * f - c) / 3.0).collect()
    }

    pub fn cartan_stencil(&self, y: &DVector<f64>, h: f64) -> Vec<f64> {
        let n = y.len();
        let mut out = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut acc = 0.0;
                    for si in [1.0, -1.0] {
                        for sj in [1.0, -1.0] {
                            for sk in [1.0, -1.0] {
                                acc += si * sj * sk * self.shifted(y, &[(i, si * h), (j, sj * h), (k, sk * h)]);
                            }
                        }
                    }
                    out.push(0.25 * acc / (8.0 * h * h * h));
                }
            }
        }
        out
    }
}

pub struct TensorCheck {
    pub g_rel: f64,
    pub c_rel: f64,
    pub euler: f64,
    pub cartan_y: f64,
}

/// Compares closed-form tensors of `norm` with the finite-difference oracle
/// on `samples` seeded directions; returns the worst errors seen.
pub fn tensor_check(norm: &MinkowskiNorm, samples: usize, seed: u64) -> TensorCheck {
    let n = norm.dim();
    let energy = |y: &DVector<f64>| norm.energy(y);
    let fd = FiniteDifference { energy: &energy };
    let mut r = rng(seed);
    let mut out = TensorCheck {
        g_rel: 0.0,
        c_rel: 0.0,
        euler: 0.0,
        cartan_y: 0.0,
    };
    for _ in 0..samples {
        let y = gaussian(&mut r, n);
        let y = &y / norm.norm_value(&y).unwrap();
        let g = norm.fundamental_tensor(&y).unwrap();
        let c = norm.cartan_tensor(&y).unwrap();

        let g_fd = fd.fundamental(&y, 1e-4);
        out.g_rel = out.g_rel.max((&g.gram - &g_fd).amax() / g_fd.amax());

        let c_fd = fd.cartan(&y, 1e-3);
        let scale = c_fd.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
        let mut idx = 0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    out.c_rel = out.c_rel.max((c.get(i, j, k) - c_fd[idx]).abs() / scale);
                    idx += 1;
                }
            }
        }

        let f2 = norm.energy(&y);
        out.euler = out.euler.max((g.inner(&y, &y) - f2).abs() / f2);
        out.cartan_y = out.cartan_y.max(c.contract_first(&y).amax());
    }
    out
}
