//! Flag curvature of homogeneous Finsler spaces and related algebraic tests.
//!
//! For a commuting pair `u, v` in `m` with `g_u([u, w]_m, u) = 0` for all
//! `w` in `m`, the flag curvature is
//!
//! ```text
//! K(u, u∧v) = g_u(U, U) / (g_u(u,u) g_u(v,v) - g_u(u,v)²),   U = U(u, v),
//! g_u(U(u,v), w) = ½ (g_u([w,u]_m, v) + g_u([w,v]_m, u)),     w ∈ m.
//! ```
//!
//! The numerator is a squared g_u-length, so the formula never goes negative.
//! All vectors in this module are in m-coordinates unless stated otherwise.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::decomposition::ReductiveDecomposition;
use crate::error::{Error, Result};
use crate::linalg::{self, serde_vec};
use crate::minkowski::{AnisotropicInnerProduct, MinkowskiNorm, NormFamily};
use crate::sampling::{axis_probes, SphereSampler};

pub const DEFAULT_TOL: f64 = 1e-8;

/// Relative cutoff for dropping near-dependent vectors in Gram-Schmidt.
const GRAM_SCHMIDT_TOL: f64 = 1e-10;

fn check_m(d: &ReductiveDecomposition, x: &DVector<f64>) -> Result<()> {
    if x.len() != d.m_dim() {
        return Err(Error::DimensionMismatch {
            expected: d.m_dim(),
            got: x.len(),
        });
    }
    Ok(())
}

fn check_norm(d: &ReductiveDecomposition, n: &MinkowskiNorm) -> Result<()> {
    if n.dim() != d.m_dim() {
        return Err(Error::DimensionMismatch {
            expected: d.m_dim(),
            got: n.dim(),
        });
    }
    Ok(())
}

fn is_zero(x: &DVector<f64>) -> bool {
    x.iter().all(|c| *c == 0.0)
}

fn m_unit(dim: usize, a: usize) -> DVector<f64> {
    let mut e = DVector::zeros(dim);
    e[a] = 1.0;
    e
}

/// Solves the U-map system for a fixed Gram matrix.
fn u_map_gram(
    d: &ReductiveDecomposition,
    g: &DMatrix<f64>,
    u: &DVector<f64>,
    v: &DVector<f64>,
) -> Result<DVector<f64>> {
    let dim = d.m_dim();
    let gu = g * u;
    let gv = g * v;
    let rhs = DVector::from_fn(dim, |a, _| {
        let w = m_unit(dim, a);
        0.5 * (d.bracket_m(&w, u).dot(&gv) + d.bracket_m(&w, v).dot(&gu))
    });
    linalg::spd_solve(g, &rhs).ok_or_else(|| Error::NotPositiveDefinite {
        min_eigenvalue: linalg::min_symmetric_eigenvalue(g),
    })
}

/// `U(u, v)` with inner products taken at `anchor`.
pub fn u_map(
    d: &ReductiveDecomposition,
    n: &MinkowskiNorm,
    anchor: &DVector<f64>,
    u: &DVector<f64>,
    v: &DVector<f64>,
) -> Result<DVector<f64>> {
    check_norm(d, n)?;
    for x in [anchor, u, v] {
        check_m(d, x)?;
    }
    if is_zero(anchor) {
        return Err(Error::ZeroVector("u-map anchor"));
    }
    let g = n.fundamental_tensor(anchor)?;
    u_map_gram(d, &g.gram, u, v)
}

/// `max_w |g_u([u, w]_m, u)|` over the m-basis.
pub fn anchor_residual(d: &ReductiveDecomposition, g: &AnisotropicInnerProduct, u: &DVector<f64>) -> f64 {
    let gu = &g.gram * u;
    (0..d.m_dim())
        .map(|a| d.bracket_m(u, &m_unit(d.m_dim(), a)).dot(&gu).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Serialize)]
pub struct FlagCurvatureResult {
    #[serde(with = "serde_vec")]
    pub anchor: DVector<f64>,
    #[serde(with = "serde_vec")]
    pub flagpole: DVector<f64>,
    #[serde(with = "serde_vec")]
    pub u_vector: DVector<f64>,
    pub numerator: f64,
    pub denominator: f64,
    pub curvature: f64,
    pub commutator_residual: f64,
    pub anchor_residual: f64,
}

/// Flag curvature `K(u, u∧v)` by the commuting-flag formula.
///
/// Each unmet hypothesis is its own error: `NotCommuting`,
/// `AnchorCondition`, `LinearlyDependent`.
pub fn flag_curvature_go(
    d: &ReductiveDecomposition,
    n: &MinkowskiNorm,
    u: &DVector<f64>,
    v: &DVector<f64>,
    tol: f64,
) -> Result<FlagCurvatureResult> {
    check_norm(d, n)?;
    check_m(d, u)?;
    check_m(d, v)?;
    if is_zero(u) {
        return Err(Error::ZeroVector("flag anchor u"));
    }
    if is_zero(v) {
        return Err(Error::ZeroVector("flagpole v"));
    }
    let alg = d.algebra();
    let commutator = alg.bracket_unchecked(&d.embed_m(u), &d.embed_m(v));
    let commutator_residual = linalg::inf_norm(&commutator);
    if commutator_residual > tol * alg.scale() * linalg::inf_norm(u) * linalg::inf_norm(v) {
        return Err(Error::NotCommuting {
            residual: commutator_residual,
        });
    }
    let g = n.fundamental_tensor(u)?;
    let guu = g.inner(u, u);
    let anchor_res = anchor_residual(d, &g, u);
    if anchor_res > tol * alg.scale() * guu {
        return Err(Error::AnchorCondition {
            residual: anchor_res,
        });
    }
    let gvv = g.inner(v, v);
    let guv = g.inner(u, v);
    let denominator = guu * gvv - guv * guv;
    let relative_det = denominator / (guu * gvv);
    if relative_det <= tol {
        return Err(Error::LinearlyDependent { relative_det });
    }
    let u_vector = u_map_gram(d, &g.gram, u, v)?;
    let numerator = g.inner(&u_vector, &u_vector);
    Ok(FlagCurvatureResult {
        anchor: u.clone(),
        flagpole: v.clone(),
        u_vector,
        numerator,
        denominator,
        curvature: numerator / denominator,
        commutator_residual,
        anchor_residual: anchor_res,
    })
}

fn riemannian_matrix(n: &MinkowskiNorm) -> Result<&DMatrix<f64>> {
    match n.family() {
        NormFamily::Riemannian => Ok(n.quadratic_part().expect("riemannian norm has a matrix")),
        other => Err(Error::NotRiemannian(other.as_str())),
    }
}

/// Matrix of `Λ_x z = ½[x, z]_m + U_A(x, z)` acting on m.
fn connection_operator(d: &ReductiveDecomposition, a: &DMatrix<f64>, x: &DVector<f64>) -> Result<DMatrix<f64>> {
    let dim = d.m_dim();
    let mut lambda = DMatrix::zeros(dim, dim);
    for c in 0..dim {
        let z = m_unit(dim, c);
        let col = d.bracket_m(x, &z) * 0.5 + u_map_gram(d, a, x, &z)?;
        lambda.set_column(c, &col);
    }
    Ok(lambda)
}

/// Sectional curvature of the invariant Riemannian metric `A` on the
/// plane spanned by `x, y`, via the Levi-Civita connection of a reductive
/// homogeneous space:
/// `R(x,y) = [Λ_x, Λ_y] - Λ_{[x,y]_m} - ad([x,y]_h)`.
pub fn riemannian_sectional(
    d: &ReductiveDecomposition,
    n: &MinkowskiNorm,
    x: &DVector<f64>,
    y: &DVector<f64>,
    tol: f64,
) -> Result<f64> {
    check_norm(d, n)?;
    check_m(d, x)?;
    check_m(d, y)?;
    let a = riemannian_matrix(n)?;
    n.norm_value(x)?;
    let gxx = x.dot(&(a * x));
    let gyy = y.dot(&(a * y));
    let gxy = x.dot(&(a * y));
    let denominator = gxx * gyy - gxy * gxy;
    if gxx == 0.0 || gyy == 0.0 || denominator / (gxx * gyy) <= tol {
        let relative_det = if gxx * gyy > 0.0 { denominator / (gxx * gyy) } else { 0.0 };
        return Err(Error::LinearlyDependent { relative_det });
    }
    let lx = connection_operator(d, a, x)?;
    let ly = connection_operator(d, a, y)?;
    let full = d.algebra().bracket_unchecked(&d.embed_m(x), &d.embed_m(y));
    let xy_m = d.project_m(&full);
    let xy_h = &full - d.embed_m(&xy_m);
    let lxy = connection_operator(d, a, &xy_m)?;
    let ry = &lx * (&ly * y) - &ly * (&lx * y) - &lxy * y - d.bracket_m_full(&xy_h, &d.embed_m(y));
    Ok(ry.dot(&(a * x)) / denominator)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RicciBackend {
    GoFormula,
    Riemannian,
}

#[derive(Debug, Clone, Serialize)]
pub struct RicciFlag {
    #[serde(with = "serde_vec")]
    pub flagpole: DVector<f64>,
    pub curvature: Option<f64>,
    pub skipped_reason: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RicciResult {
    /// `F(y)²` times the sum of the covered flag curvatures.
    pub value: f64,
    pub backend: RicciBackend,
    pub covered: usize,
    pub uncovered: usize,
    pub flags: Vec<RicciFlag>,
}

impl RicciResult {
    pub fn is_complete(&self) -> bool {
        self.uncovered == 0
    }
}

/// `g_y`-orthonormal completion `{e_1, ..., e_{n-1}}` of `y / F(y)`.
///
/// Coordinate vectors are processed in index order; those within the
/// relative cutoff of the current span are skipped.
pub fn orthonormal_completion(g: &AnisotropicInnerProduct, y: &DVector<f64>, f: f64) -> Vec<DVector<f64>> {
    let dim = y.len();
    let mut basis = vec![y / f];
    for k in 0..dim {
        if basis.len() == dim {
            break;
        }
        let e = m_unit(dim, k);
        let mut w = e.clone();
        for b in &basis {
            w -= b * g.inner(&e, b);
        }
        let len = g.inner(&w, &w).max(0.0).sqrt();
        if len <= GRAM_SCHMIDT_TOL * g.inner(&e, &e).sqrt() {
            continue;
        }
        basis.push(w / len);
    }
    basis.split_off(1)
}

/// Ricci scalar `F(y)² Σ K(y, y∧e_i)` over a g_y-orthonormal completion.
///
/// The riemannian backend sums the Levi-Civita oracle over every flag.
/// The go-formula backend only sums flags meeting the commuting-flag
/// hypotheses and reports the rest as uncovered.
pub fn ricci_scalar(
    d: &ReductiveDecomposition,
    n: &MinkowskiNorm,
    y: &DVector<f64>,
    backend: RicciBackend,
    tol: f64,
) -> Result<RicciResult> {
    check_norm(d, n)?;
    check_m(d, y)?;
    if is_zero(y) {
        return Err(Error::ZeroVector("ricci base vector y"));
    }
    let f = n.norm_value(y)?;
    let g = n.fundamental_tensor(y)?;
    let completion = orthonormal_completion(&g, y, f);
    let mut flags = Vec::with_capacity(completion.len());
    let mut sum = 0.0;
    for e in completion {
        let k = match backend {
            RicciBackend::Riemannian => Ok(riemannian_sectional(d, n, y, &e, tol)?),
            RicciBackend::GoFormula => match flag_curvature_go(d, n, y, &e, tol) {
                Ok(r) => Ok(r.curvature),
                Err(err) if err.is_inapplicable() => Err(err.to_string()),
                Err(err) => return Err(err),
            },
        };
        match k {
            Ok(k) => {
                sum += k;
                flags.push(RicciFlag {
                    flagpole: e,
                    curvature: Some(k),
                    skipped_reason: None,
                });
            }
            Err(reason) => flags.push(RicciFlag {
                flagpole: e,
                curvature: None,
                skipped_reason: Some(reason),
            }),
        }
    }
    let covered = flags.iter().filter(|fl| fl.curvature.is_some()).count();
    let uncovered = flags.len() - covered;
    if covered == 0 && !flags.is_empty() {
        return Err(Error::NoApplicableFlags { total: flags.len() });
    }
    Ok(RicciResult {
        value: f * f * sum,
        backend,
        covered,
        uncovered,
        flags,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GeodesicVectorCheck {
    pub is_geodesic: bool,
    pub residual: f64,
    pub threshold: f64,
}

/// `max_z |g_w(w, [a + w, z]_m)|` over the m-basis, with `a` in h-coordinates.
fn geodesic_residual(
    d: &ReductiveDecomposition,
    g: &AnisotropicInnerProduct,
    w: &DVector<f64>,
    a: &DVector<f64>,
) -> f64 {
    let gw = &g.gram * w;
    let generator = d.embed_h(a) + d.embed_m(w);
    (0..d.m_dim())
        .map(|c| {
            d.bracket_m_full(&generator, &d.embed_m(&m_unit(d.m_dim(), c)))
                .dot(&gw)
                .abs()
        })
        .fold(0.0, f64::max)
}

/// Whether the orbit of `exp t(a + w)` through the origin is a geodesic.
pub fn is_geodesic_vector(
    d: &ReductiveDecomposition,
    n: &MinkowskiNorm,
    w: &DVector<f64>,
    a: &DVector<f64>,
    tol: f64,
) -> Result<GeodesicVectorCheck> {
    check_norm(d, n)?;
    check_m(d, w)?;
    if a.len() != d.h_dim() {
        return Err(Error::DimensionMismatch {
            expected: d.h_dim(),
            got: a.len(),
        });
    }
    if is_zero(w) {
        return Err(Error::ZeroVector("geodesic vector w"));
    }
    let g = n.fundamental_tensor(w)?;
    let residual = geodesic_residual(d, &g, w, a);
    let threshold = tol * d.algebra().scale() * g.inner(w, w);
    Ok(GeodesicVectorCheck {
        is_geodesic: residual <= threshold,
        residual,
        threshold,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GoFailure {
    pub sample: Vec<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GoReport {
    pub sample_count: usize,
    pub seed: u64,
    pub failures: Vec<GoFailure>,
    pub passed: bool,
    pub max_residual: f64,
    /// Direction attaining `max_residual` (first one on ties).
    pub worst_direction: Option<Vec<f64>>,
    pub tolerance: f64,
}

/// Best compensating `a` in h (minimum norm) and the remaining residual
/// for an F-unit direction `w`.
fn go_feasibility(
    d: &ReductiveDecomposition,
    n: &MinkowskiNorm,
    w: &DVector<f64>,
) -> Result<(DVector<f64>, f64)> {
    let g = n.fundamental_tensor(w)?;
    let gw = &g.gram * w;
    let mdim = d.m_dim();
    let alg = d.algebra();
    let zs: Vec<DVector<f64>> = (0..mdim).map(|c| d.embed_m(&m_unit(mdim, c))).collect();
    let lhs = DMatrix::from_fn(mdim, d.h_dim(), |c, k| {
        d.bracket_m_full(&alg.unit(d.h_indices()[k]), &zs[c]).dot(&gw)
    });
    let ww = d.embed_m(w);
    let rhs = DVector::from_fn(mdim, |c, _| -d.bracket_m_full(&ww, &zs[c]).dot(&gw));
    let a = linalg::least_squares(&lhs, &rhs);
    let residual = if d.h_dim() == 0 {
        linalg::inf_norm(&rhs)
    } else {
        linalg::inf_norm(&(&lhs * &a - &rhs))
    };
    Ok((a, residual))
}

/// Sampled geodesic-orbit test: every direction must be a geodesic vector
/// after compensation by some element of h.
///
/// Coordinate axes of m are checked first, then `sample_count` seeded
/// directions; each is scaled to `F = 1`.
pub fn is_geodesic_orbit(
    d: &ReductiveDecomposition,
    n: &MinkowskiNorm,
    sample_count: usize,
    seed: u64,
    tol: f64,
) -> Result<GoReport> {
    check_norm(d, n)?;
    let mdim = d.m_dim();
    let sampler = SphereSampler::new(seed);
    let mut directions = axis_probes(&DMatrix::identity(mdim, mdim), 1e-12);
    directions.extend((0..sample_count).map(|i| sampler.direction(mdim, i)));
    let residuals: Vec<Result<(DVector<f64>, f64)>> = directions
        .par_iter()
        .map(|dir| {
            let w = dir / n.norm_value(dir)?;
            let (_, r) = go_feasibility(d, n, &w)?;
            Ok((w, r))
        })
        .collect();
    let threshold = tol * d.algebra().scale();
    let mut failures = Vec::new();
    let mut max_residual = 0.0;
    let mut worst_direction = None;
    for r in residuals {
        let (w, res) = r?;
        if res > max_residual || worst_direction.is_none() {
            max_residual = res;
            worst_direction = Some(w.iter().cloned().collect());
        }
        if res > threshold {
            failures.push(GoFailure {
                sample: w.iter().cloned().collect(),
                residual: res,
            });
        }
    }
    Ok(GoReport {
        sample_count: directions.len(),
        seed,
        passed: failures.is_empty(),
        failures,
        max_residual,
        worst_direction,
        tolerance: tol,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantLengthReport {
    pub critical: bool,
    /// `max |g_v(v, [v, x]_m)|` over basis vectors `x` of h.
    pub h_residual: f64,
    /// The same over basis vectors of m.
    pub m_residual: f64,
    /// `max |g_v([v, w]_m, v)|` over m, the anchor form of the condition.
    pub anchor_residual: f64,
    pub threshold: f64,
}

/// Critical-point condition `g_v(v, [v, g]_m) = 0` for the Killing field of `v`.
pub fn constant_length_critical(
    d: &ReductiveDecomposition,
    n: &MinkowskiNorm,
    v: &DVector<f64>,
    tol: f64,
) -> Result<ConstantLengthReport> {
    check_norm(d, n)?;
    check_m(d, v)?;
    if is_zero(v) {
        return Err(Error::ZeroVector("killing generator v"));
    }
    let g = n.fundamental_tensor(v)?;
    let gv = &g.gram * v;
    let alg = d.algebra();
    let vv = d.embed_m(v);
    let pairing = |i: usize| d.bracket_m_full(&vv, &alg.unit(i)).dot(&gv).abs();
    let h_residual = d.h_indices().iter().map(|&i| pairing(i)).fold(0.0, f64::max);
    let m_residual = d.m_indices().iter().map(|&i| pairing(i)).fold(0.0, f64::max);
    let threshold = tol * alg.scale() * g.inner(v, v);
    Ok(ConstantLengthReport {
        critical: h_residual.max(m_residual) <= threshold,
        h_residual,
        m_residual,
        anchor_residual: anchor_residual(d, &g, v),
        threshold,
    })
}
