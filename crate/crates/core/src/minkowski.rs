//! Minkowski norms on `m` with closed-form fundamental and Cartan tensors.
//!
//! Conventions: `g_y = ½ Hess(F²)(y)` and `C_y = ¼ D³(F²)(y)`, so that
//! `d/dt g_{y + t z}(u, w)|_0 = 2 C_y(u, w, z)`.
//!
//! Three families are supported:
//! * riemannian `F(y) = sqrt(yᵀ A y)`;
//! * randers `F(y) = sqrt(yᵀ A y) + bᵀ y`, strongly convex iff `bᵀ A⁻¹ b < 1`;
//! * quartic `F(y)⁴ = Q(y, y, y, y)` for a fully symmetric 4-tensor `Q`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::decomposition::ReductiveDecomposition;
use crate::error::{Error, Result};
use crate::linalg;
use crate::sampling::{axis_probes, SphereSampler};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NormFamily {
    Riemannian,
    Randers,
    Quartic,
}

impl NormFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            NormFamily::Riemannian => "riemannian",
            NormFamily::Randers => "randers",
            NormFamily::Quartic => "quartic",
        }
    }
}

/// Fully symmetric 4-tensor stored densely, built from monomial coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct QuarticForm {
    dim: usize,
    /// Monomial coefficients keyed by sorted index tuples.
    monomials: BTreeMap<[usize; 4], f64>,
    dense: Vec<f64>,
}

fn distinct_permutations(t: &[usize; 4]) -> f64 {
    let mut fact = 1.0;
    let mut run = 1;
    for k in 1..4 {
        if t[k] == t[k - 1] {
            run += 1;
            fact *= run as f64;
        } else {
            run = 1;
        }
    }
    24.0 / fact
}

fn permutations4(t: [usize; 4]) -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    if a != b && a != c && a != d && b != c && b != d && c != d {
                        out.push([t[a], t[b], t[c], t[d]]);
                    }
                }
            }
        }
    }
    out
}

impl QuarticForm {
    /// `F⁴ = Σ c_t y_i y_j y_k y_l` over sorted tuples `t = (i, j, k, l)`.
    pub fn from_monomials(dim: usize, monomials: BTreeMap<[usize; 4], f64>) -> Result<Self> {
        let mut dense = vec![0.0; dim.pow(4)];
        let mut canon = BTreeMap::new();
        for (t, c) in monomials {
            if t.iter().any(|&i| i >= dim) {
                return Err(Error::InadmissibleNorm(format!(
                    "quartic index {t:?} out of range for dimension {dim}"
                )));
            }
            let mut s = t;
            s.sort_unstable();
            if s != t {
                return Err(Error::InadmissibleNorm(format!(
                    "quartic index {t:?} is not sorted"
                )));
            }
            let share = c / distinct_permutations(&s);
            for p in permutations4(s) {
                dense[((p[0] * dim + p[1]) * dim + p[2]) * dim + p[3]] = share;
            }
            canon.insert(s, c);
        }
        Ok(Self {
            dim,
            monomials: canon,
            dense,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn monomials(&self) -> &BTreeMap<[usize; 4], f64> {
        &self.monomials
    }

    pub fn entry(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let d = self.dim;
        self.dense[((i * d + j) * d + k) * d + l]
    }

    /// Contractions `(Q(·,·,·,y), Q(·,·,y,y), Q(·,y,y,y), Q(y,y,y,y))`.
    fn contractions(&self, y: &DVector<f64>) -> (Vec<f64>, DMatrix<f64>, DVector<f64>, f64) {
        let d = self.dim;
        let mut q3 = vec![0.0; d * d * d];
        for (idx, slot) in q3.iter_mut().enumerate() {
            let base = idx * d;
            *slot = (0..d).map(|l| self.dense[base + l] * y[l]).sum();
        }
        let q2 = DMatrix::from_fn(d, d, |i, j| (0..d).map(|k| q3[(i * d + j) * d + k] * y[k]).sum());
        let q1 = &q2 * y;
        let q0 = q1.dot(y);
        (q3, q2, q1, q0)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Family {
    Riemannian { a: DMatrix<f64> },
    Randers { a: DMatrix<f64>, b: DVector<f64> },
    Quartic { q: QuarticForm },
}

/// An invariant norm on `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct MinkowskiNorm {
    family: Family,
    /// Outcome of the closed-form admissibility checks, computed once.
    closed_form: std::result::Result<(), String>,
}

fn check_spd(a: &DMatrix<f64>) -> std::result::Result<(), String> {
    if !a.is_square() {
        return Err("matrix is not square".into());
    }
    let asym = (a - a.transpose()).abs().max();
    if asym > 1e-12 * a.abs().max().max(1.0) {
        return Err(format!("matrix is not symmetric (asymmetry {asym:e})"));
    }
    let min = linalg::min_symmetric_eigenvalue(a);
    if min <= 0.0 {
        return Err(format!("matrix is not positive-definite (min eigenvalue {min:e})"));
    }
    Ok(())
}

fn randers_b_norm_sq(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<f64> {
    linalg::spd_solve(a, b).map(|x| b.dot(&x))
}

impl MinkowskiNorm {
    pub fn riemannian(a: DMatrix<f64>) -> Self {
        let closed_form = check_spd(&a);
        Self {
            family: Family::Riemannian { a },
            closed_form,
        }
    }

    pub fn euclidean(dim: usize) -> Self {
        Self::riemannian(DMatrix::identity(dim, dim))
    }

    pub fn randers(a: DMatrix<f64>, b: DVector<f64>) -> Self {
        let closed_form = check_spd(&a).and_then(|_| {
            if b.len() != a.nrows() {
                return Err(format!("covector has length {}, expected {}", b.len(), a.nrows()));
            }
            match randers_b_norm_sq(&a, &b) {
                Some(s) if s < 1.0 => Ok(()),
                Some(s) => Err(format!("b^T A^-1 b = {s} is not < 1")),
                None => Err("matrix is not positive-definite".into()),
            }
        });
        Self {
            family: Family::Randers { a, b },
            closed_form,
        }
    }

    pub fn quartic(q: QuarticForm) -> Self {
        Self {
            family: Family::Quartic { q },
            closed_form: Ok(()),
        }
    }

    pub fn family(&self) -> NormFamily {
        match self.family {
            Family::Riemannian { .. } => NormFamily::Riemannian,
            Family::Randers { .. } => NormFamily::Randers,
            Family::Quartic { .. } => NormFamily::Quartic,
        }
    }

    pub fn dim(&self) -> usize {
        match &self.family {
            Family::Riemannian { a } | Family::Randers { a, .. } => a.nrows(),
            Family::Quartic { q } => q.dim(),
        }
    }

    /// The matrix `A` of a riemannian or randers norm.
    pub fn quadratic_part(&self) -> Option<&DMatrix<f64>> {
        match &self.family {
            Family::Riemannian { a } | Family::Randers { a, .. } => Some(a),
            Family::Quartic { .. } => None,
        }
    }

    pub fn covector(&self) -> Option<&DVector<f64>> {
        match &self.family {
            Family::Randers { b, .. } => Some(b),
            _ => None,
        }
    }

    pub fn quartic_form(&self) -> Option<&QuarticForm> {
        match &self.family {
            Family::Quartic { q } => Some(q),
            _ => None,
        }
    }

    fn check(&self, y: &DVector<f64>) -> Result<()> {
        if let Err(reason) = &self.closed_form {
            return Err(Error::InadmissibleNorm(reason.clone()));
        }
        if y.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: y.len(),
            });
        }
        Ok(())
    }

    fn check_nonzero(&self, y: &DVector<f64>) -> Result<()> {
        self.check(y)?;
        if y.iter().all(|c| *c == 0.0) {
            return Err(Error::ZeroVector("base vector y"));
        }
        Ok(())
    }

    pub fn norm_value(&self, y: &DVector<f64>) -> Result<f64> {
        self.check(y)?;
        Ok(self.value_unchecked(y))
    }

    pub(crate) fn value_unchecked(&self, y: &DVector<f64>) -> f64 {
        match &self.family {
            Family::Riemannian { a } => y.dot(&(a * y)).max(0.0).sqrt(),
            Family::Randers { a, b } => y.dot(&(a * y)).max(0.0).sqrt() + b.dot(y),
            Family::Quartic { q } => q.contractions(y).3.max(0.0).sqrt().sqrt(),
        }
    }

    /// `F(y)²`, the generating function for both tensors.
    pub fn energy(&self, y: &DVector<f64>) -> f64 {
        match &self.family {
            Family::Quartic { q } => q.contractions(y).3.max(0.0).sqrt(),
            _ => {
                let f = self.value_unchecked(y);
                f * f
            }
        }
    }

    pub fn fundamental_tensor(&self, y: &DVector<f64>) -> Result<AnisotropicInnerProduct> {
        self.check_nonzero(y)?;
        let gram = self.gram_unchecked(y);
        if gram.clone().cholesky().is_none() {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: linalg::min_symmetric_eigenvalue(&gram),
            });
        }
        Ok(AnisotropicInnerProduct {
            base: y.clone(),
            gram,
        })
    }

    fn gram_unchecked(&self, y: &DVector<f64>) -> DMatrix<f64> {
        let d = self.dim();
        let entry: Box<dyn Fn(usize, usize) -> f64> = match &self.family {
            Family::Riemannian { a } => Box::new(move |i, j| a[(i, j)]),
            Family::Randers { a, b } => {
                let ay = a * y;
                let alpha = y.dot(&ay).sqrt();
                let beta = b.dot(y);
                let l = ay / alpha;
                let ratio = (alpha + beta) / alpha;
                Box::new(move |i, j| {
                    ratio * (a[(i, j)] - l[i] * l[j]) + (l[i] + b[i]) * (l[j] + b[j])
                })
            }
            Family::Quartic { q } => {
                let (_, q2, q1, q0) = q.contractions(y);
                let s = q0.sqrt();
                let c2 = 3.0 / s;
                let c1 = 2.0 / (q0 * s);
                Box::new(move |i, j| c2 * q2[(i, j)] - c1 * q1[i] * q1[j])
            }
        };
        let mut g = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in i..d {
                let v = entry(i, j);
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        g
    }

    pub fn cartan_tensor(&self, y: &DVector<f64>) -> Result<CartanTensorValue> {
        self.check_nonzero(y)?;
        let d = self.dim();
        let entry: Option<Box<dyn Fn(usize, usize, usize) -> f64>> = match &self.family {
            Family::Riemannian { .. } => None,
            Family::Randers { a, b } => {
                let ay = a * y;
                let alpha = y.dot(&ay).sqrt();
                let beta = b.dot(y);
                let l = ay / alpha;
                let p = b - &l * (beta / alpha);
                let h = a - &l * l.transpose();
                let c = 0.5 / alpha;
                Some(Box::new(move |i, j, k| {
                    c * (h[(i, j)] * p[k] + h[(j, k)] * p[i] + h[(k, i)] * p[j])
                }))
            }
            Family::Quartic { q } => {
                let (q3, q2, q1, q0) = q.contractions(y);
                let s = q0.sqrt();
                let c3 = 3.0 / s;
                let c2 = 3.0 / (q0 * s);
                let c1 = 6.0 / (q0 * q0 * s);
                Some(Box::new(move |i, j, k| {
                    c3 * q3[(i * d + j) * d + k]
                        - c2 * (q2[(i, j)] * q1[k] + q2[(i, k)] * q1[j] + q2[(j, k)] * q1[i])
                        + c1 * q1[i] * q1[j] * q1[k]
                }))
            }
        };
        let mut data = vec![0.0; d * d * d];
        if let Some(f) = entry {
            for i in 0..d {
                for j in i..d {
                    for k in j..d {
                        let v = f(i, j, k);
                        for (a, b, c) in [(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)] {
                            data[(a * d + b) * d + c] = v;
                        }
                    }
                }
            }
        }
        Ok(CartanTensorValue {
            base: y.clone(),
            dim: d,
            data,
        })
    }

    /// Strong-convexity report. Riemannian and randers norms use their
    /// closed-form criteria; quartic norms are checked at seeded samples
    /// and the report is only as strong as the sample set.
    pub fn check_admissible(&self, sample_count: usize, seed: u64) -> AdmissibilityReport {
        let family = self.family();
        match &self.family {
            Family::Riemannian { a } => AdmissibilityReport {
                family,
                passed: self.closed_form.is_ok(),
                min_eigenvalue: if a.is_square() { linalg::min_symmetric_eigenvalue(a) } else { f64::NAN },
                randers_b_norm_sq: None,
                samples_checked: 0,
                detail: self.closed_form.clone().err().unwrap_or_else(|| "A symmetric positive-definite".into()),
            },
            Family::Randers { a, b } => AdmissibilityReport {
                family,
                passed: self.closed_form.is_ok(),
                min_eigenvalue: if a.is_square() { linalg::min_symmetric_eigenvalue(a) } else { f64::NAN },
                randers_b_norm_sq: randers_b_norm_sq(a, b),
                samples_checked: 0,
                detail: self.closed_form.clone().err().unwrap_or_else(|| "b^T A^-1 b < 1".into()),
            },
            Family::Quartic { .. } => {
                let sampler = SphereSampler::new(seed);
                let d = self.dim();
                let mins: Vec<f64> = (0..sample_count)
                    .into_par_iter()
                    .map(|i| {
                        let y = sampler.direction(d, i);
                        if self.energy(&y) <= 0.0 {
                            return f64::NEG_INFINITY;
                        }
                        linalg::min_symmetric_eigenvalue(&self.gram_unchecked(&y))
                    })
                    .collect();
                let min = mins.iter().cloned().fold(f64::INFINITY, f64::min);
                let passed = sample_count > 0 && min > 0.0;
                AdmissibilityReport {
                    family,
                    passed,
                    min_eigenvalue: min,
                    randers_b_norm_sq: None,
                    samples_checked: sample_count,
                    detail: format!(
                        "g_y positive-definite at {sample_count} sampled directions (sampling, not a proof)"
                    ),
                }
            }
        }
    }

    /// Infinitesimal Ad(H)-invariance:
    /// `g_y([v',u]_m, w) + g_y(u, [v',w]_m) + 2 C_y(u, w, [v',y]_m) = 0`
    /// for `v'` in a basis of `h`, `u, w` in the basis of `m`, and sampled `y`.
    pub fn check_adh_invariance(
        &self,
        decomposition: &ReductiveDecomposition,
        sample_count: usize,
        seed: u64,
        tol: f64,
    ) -> Result<InvarianceReport> {
        let d = decomposition.m_dim();
        if d != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: self.dim(),
            });
        }
        if decomposition.h_dim() == 0 {
            return Ok(InvarianceReport {
                max_residual: 0.0,
                worst: None,
                samples_checked: 0,
                tolerance: tol,
                passed: true,
            });
        }
        let sampler = SphereSampler::new(seed);
        let mut directions = axis_probes(&DMatrix::identity(d, d), 1e-12);
        directions.extend((0..sample_count).map(|i| sampler.direction(d, i)));
        let alg = decomposition.algebra();
        let h_basis: Vec<DVector<f64>> = decomposition
            .h_indices()
            .iter()
            .map(|&i| alg.unit(i))
            .collect();
        let m_basis: Vec<DVector<f64>> = (0..d)
            .map(|a| {
                let mut e = DVector::zeros(d);
                e[a] = 1.0;
                e
            })
            .collect();
        let per_sample: Vec<Result<(f64, (usize, usize, usize))>> = directions
            .par_iter()
            .map(|dir| {
                let f = self.value_unchecked(dir);
                let y = dir / f;
                let g = self.fundamental_tensor(&y)?;
                let c = self.cartan_tensor(&y)?;
                let mut worst = (0.0_f64, (0, 0, 0));
                for (k, hv) in h_basis.iter().enumerate() {
                    let act = |x: &DVector<f64>| decomposition.bracket_m_full(hv, &decomposition.embed_m(x));
                    let hy = act(&y);
                    let images: Vec<DVector<f64>> = m_basis.iter().map(act).collect();
                    for a in 0..d {
                        for b in 0..d {
                            let r = g.inner(&images[a], &m_basis[b])
                                + g.inner(&m_basis[a], &images[b])
                                + 2.0 * c.contract(&m_basis[a], &m_basis[b], &hy);
                            if r.abs() > worst.0 {
                                worst = (r.abs(), (k, a, b));
                            }
                        }
                    }
                }
                Ok(worst)
            })
            .collect();
        let mut max_residual = 0.0;
        let mut worst = None;
        for (idx, r) in per_sample.into_iter().enumerate() {
            let (res, (k, a, b)) = r?;
            if res > max_residual {
                max_residual = res;
                worst = Some(InvarianceWitness {
                    sample: directions[idx].iter().cloned().collect(),
                    h_index: decomposition.h_indices()[k],
                    u_index: decomposition.m_indices()[a],
                    w_index: decomposition.m_indices()[b],
                });
            }
        }
        let threshold = tol * alg.scale();
        Ok(InvarianceReport {
            max_residual,
            worst,
            samples_checked: directions.len(),
            tolerance: tol,
            passed: max_residual <= threshold,
        })
    }
}

/// `g_y` as a Gram matrix in the m-basis.
#[derive(Debug, Clone, Serialize)]
pub struct AnisotropicInnerProduct {
    #[serde(with = "crate::linalg::serde_vec")]
    pub base: DVector<f64>,
    #[serde(with = "crate::linalg::serde_mat")]
    pub gram: DMatrix<f64>,
}

impl AnisotropicInnerProduct {
    pub fn inner(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        u.dot(&(&self.gram * v))
    }
}

/// `C_y` stored densely; symmetric under all index permutations.
#[derive(Debug, Clone)]
pub struct CartanTensorValue {
    pub base: DVector<f64>,
    dim: usize,
    data: Vec<f64>,
}

impl CartanTensorValue {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.dim + j) * self.dim + k]
    }

    pub fn contract(&self, u: &DVector<f64>, v: &DVector<f64>, w: &DVector<f64>) -> f64 {
        let d = self.dim;
        let mut s = 0.0;
        for i in 0..d {
            if u[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                if v[j] == 0.0 {
                    continue;
                }
                for k in 0..d {
                    s += self.data[(i * d + j) * d + k] * u[i] * v[j] * w[k];
                }
            }
        }
        s
    }

    /// The matrix `C_y(y, ·, ·)`.
    pub fn contract_first(&self, y: &DVector<f64>) -> DMatrix<f64> {
        let d = self.dim;
        DMatrix::from_fn(d, d, |j, k| (0..d).map(|i| y[i] * self.get(i, j, k)).sum())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |a, x| a.max(x.abs()))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AdmissibilityReport {
    pub family: NormFamily,
    pub passed: bool,
    /// Smallest eigenvalue of `A` (closed-form families) or of `g_y` over samples.
    pub min_eigenvalue: f64,
    pub randers_b_norm_sq: Option<f64>,
    pub samples_checked: usize,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvarianceWitness {
    pub sample: Vec<f64>,
    pub h_index: usize,
    pub u_index: usize,
    pub w_index: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvarianceReport {
    pub max_residual: f64,
    pub worst: Option<InvarianceWitness>,
    pub samples_checked: usize,
    pub tolerance: f64,
    pub passed: bool,
}
