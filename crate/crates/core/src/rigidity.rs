//! Negatively curved left-invariant Finsler metrics on solvable groups.
//!
//! A simply connected solvable group whose derived algebra is abelian
//! admits such a metric exactly when `dim g = dim [g,g] + 1` and, for a
//! vector `u'` spanning a complement of `[g,g]`, every eigenvalue of
//! `ad(u')|[g,g]` has positive real part (after possibly replacing `u'`
//! by `-u'`). The scans here tie that criterion to norm-level data.

use nalgebra::{Complex, DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::curvature::{self, FlagCurvatureResult};
use crate::decomposition::ReductiveDecomposition;
use crate::error::{Error, Result};
use crate::lie::{LieAlgebraModel, SpectrumResult};
use crate::linalg::{self, serde_vec};
use crate::minkowski::MinkowskiNorm;
use crate::sampling::{axis_probes, SphereSampler};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureReason {
    NotSolvable,
    DerivedNotAbelian,
    DerivedZero,
    DimensionGap,
    SpectrumMixed,
    SpectrumImaginaryAxis,
}

impl FailureReason {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureReason::NotSolvable => "not-solvable",
            FailureReason::DerivedNotAbelian => "derived-not-abelian",
            FailureReason::DerivedZero => "derived-zero",
            FailureReason::DimensionGap => "dimension-gap",
            FailureReason::SpectrumMixed => "spectrum-mixed",
            FailureReason::SpectrumImaginaryAxis => "spectrum-imaginary-axis",
        }
    }

    /// Whether the failure is one of the structural hypotheses (solvable,
    /// abelian nonzero derived algebra of codimension one) rather than the
    /// spectral condition.
    pub fn is_hypothesis(self) -> bool {
        !matches!(self, FailureReason::SpectrumMixed | FailureReason::SpectrumImaginaryAxis)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationVerdict {
    pub admits_negative_metric: bool,
    pub dim_g: usize,
    pub dim_derived: usize,
    pub derived_series_dims: Vec<usize>,
    #[serde(serialize_with = "serialize_opt_vec")]
    pub chosen_u: Option<DVector<f64>>,
    pub spectrum: Option<SpectrumResult>,
    pub failure_reason: Option<FailureReason>,
    /// Some eigenvalue sits within tolerance of the imaginary axis without
    /// being numerically zero in real part.
    pub borderline: bool,
    pub tolerance: f64,
}

fn serialize_opt_vec<S: serde::Serializer>(v: &Option<DVector<f64>>, s: S) -> std::result::Result<S::Ok, S::Error> {
    v.as_ref().map(|x| x.as_slice().to_vec()).serialize(s)
}

impl ClassificationVerdict {
    /// Eigenvalues scaled to spectral radius 1. The raw spectrum depends on
    /// the scale of `u'`; this one does not.
    pub fn normalized_eigenvalues(&self) -> Vec<Complex<f64>> {
        match &self.spectrum {
            Some(s) => {
                let r = s.spectral_radius();
                if r == 0.0 {
                    return s.eigenvalues.clone();
                }
                s.eigenvalues.iter().map(|z| z / r).collect()
            }
            None => Vec::new(),
        }
    }

    pub fn summary(&self) -> String {
        match self.failure_reason {
            None => format!(
                "admits a negatively curved left-invariant metric (dim g = {} = {} + 1, all Re λ > 0)",
                self.dim_g, self.dim_derived
            ),
            Some(FailureReason::DimensionGap) => format!(
                "does NOT admit: dimension-gap ({} ≠ {}+1)",
                self.dim_g, self.dim_derived
            ),
            Some(reason) => format!("does NOT admit: {}", reason.as_str()),
        }
    }
}

struct Hypotheses {
    derived: DMatrix<f64>,
    complement: DVector<f64>,
}

fn reject(
    reason: FailureReason,
    dim_g: usize,
    dim_derived: usize,
    dims: Vec<usize>,
    tol: f64,
) -> ClassificationVerdict {
    ClassificationVerdict {
        admits_negative_metric: false,
        dim_g,
        dim_derived,
        derived_series_dims: dims,
        chosen_u: None,
        spectrum: None,
        failure_reason: Some(reason),
        borderline: false,
        tolerance: tol,
    }
}

/// Checks the structural hypotheses; on success returns `[g,g]` and a unit
/// vector orthogonal to it.
fn structural_check(alg: &LieAlgebraModel, tol: f64) -> std::result::Result<Hypotheses, ClassificationVerdict> {
    let series = alg.derived_series(tol);
    let dims = series.dimensions();
    let dim_g = alg.dim();
    let derived = series.derived_algebra().clone();
    let dim_derived = derived.ncols();
    if !series.is_solvable {
        return Err(reject(FailureReason::NotSolvable, dim_g, dim_derived, dims, tol));
    }
    if dim_derived == 0 {
        return Err(reject(FailureReason::DerivedZero, dim_g, dim_derived, dims, tol));
    }
    if alg.bracket_span(&derived, tol).ncols() > 0 {
        return Err(reject(FailureReason::DerivedNotAbelian, dim_g, dim_derived, dims, tol));
    }
    if dim_g != dim_derived + 1 {
        return Err(reject(FailureReason::DimensionGap, dim_g, dim_derived, dims, tol));
    }
    let complement = linalg::orthogonal_complement(&derived).column(0).into_owned();
    Ok(Hypotheses { derived, complement })
}

/// Decides whether the simply connected group of `alg` admits a negatively
/// curved left-invariant Finsler metric.
pub fn classify_solvable_negative(alg: &LieAlgebraModel, tol: f64) -> ClassificationVerdict {
    let hyp = match structural_check(alg, tol) {
        Ok(h) => h,
        Err(verdict) => return verdict,
    };
    let dims = alg.derived_series(tol).dimensions();
    let restricted = |u: &DVector<f64>| {
        alg.ad_restricted(u, &hyp.derived, tol)
            .expect("[g,g] is an ideal, hence ad-invariant")
    };
    let mut u = hyp.complement.clone();
    let mut r = restricted(&u);
    // orient u' so that the trace is nonnegative
    if r.matrix.trace() < 0.0 {
        u = -u;
        r = restricted(&u);
    }
    let spectrum = r.spectrum;
    let margin = tol * spectrum.operator_norm;
    let dim = spectrum.eigenvalues.len() as f64;
    let noise = f64::EPSILON * spectrum.operator_norm * dim * 16.0;
    let near_axis: Vec<&Complex<f64>> = spectrum
        .eigenvalues
        .iter()
        .filter(|z| z.re.abs() <= margin)
        .collect();
    let borderline = near_axis.iter().any(|z| z.re.abs() > noise);
    let failure_reason = if !near_axis.is_empty() {
        Some(FailureReason::SpectrumImaginaryAxis)
    } else if spectrum.eigenvalues.iter().all(|z| z.re > 0.0) {
        None
    } else {
        Some(FailureReason::SpectrumMixed)
    };
    ClassificationVerdict {
        admits_negative_metric: failure_reason.is_none(),
        dim_g: alg.dim(),
        dim_derived: hyp.derived.ncols(),
        derived_series_dims: dims,
        chosen_u: Some(u),
        spectrum: Some(spectrum),
        failure_reason,
        borderline,
        tolerance: tol,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PositivityScanReport {
    pub passed: bool,
    /// Minimum of `g_u(u, [u', u]_m)` over F-unit samples `u` in `[g,g]`.
    pub min_value: f64,
    /// m-coordinates of the sample attaining the minimum.
    pub worst_sample: Vec<f64>,
    pub samples_checked: usize,
    pub seed: u64,
    pub tolerance: f64,
}

/// `[g,g]` as orthonormal m-coordinate columns; it must lie in m.
fn derived_in_m(d: &ReductiveDecomposition, tol: f64) -> Result<DMatrix<f64>> {
    let derived = d.algebra().derived_series(tol).derived_algebra().clone();
    if derived.ncols() == 0 {
        return Err(Error::Hypothesis("derived algebra is zero".into()));
    }
    let mut cols = Vec::with_capacity(derived.ncols());
    for c in derived.column_iter() {
        cols.push(d.m_part_checked(&c.into_owned(), tol)?);
    }
    Ok(DMatrix::from_columns(&cols))
}

/// Scans `g_u(u, [u', u]_m)` over unit `u` in the derived algebra.
///
/// `u_prime` is in full g-coordinates and must lie outside `[g,g]`.
pub fn bracket_positivity_scan(
    d: &ReductiveDecomposition,
    n: &MinkowskiNorm,
    u_prime: &DVector<f64>,
    sample_count: usize,
    seed: u64,
    tol: f64,
) -> Result<PositivityScanReport> {
    let alg = d.algebra();
    alg.check_len(u_prime)?;
    let derived_g = alg.derived_series(tol).derived_algebra().clone();
    let outside = linalg::residual_outside(&derived_g, u_prime).norm();
    if outside <= tol * u_prime.norm() {
        return Err(Error::Hypothesis(format!(
            "u' lies in the derived algebra (distance {outside:?})"
        )));
    }
    let basis = derived_in_m(d, tol)?;
    let sampler = SphereSampler::new(seed);
    let mut directions = axis_probes(&basis, 1e-12);
    directions.extend((0..sample_count).map(|i| sampler.direction_in(&basis, i)));
    let values: Vec<Result<(f64, DVector<f64>)>> = directions
        .par_iter()
        .map(|dir| {
            let u = dir / n.norm_value(dir)?;
            let g = n.fundamental_tensor(&u)?;
            let image = d.bracket_m_full(u_prime, &d.embed_m(&u));
            Ok((g.inner(&u, &image), u))
        })
        .collect();
    let mut min_value = f64::INFINITY;
    let mut worst_sample = Vec::new();
    for r in values {
        let (val, u) = r?;
        if val < min_value {
            min_value = val;
            worst_sample = u.iter().cloned().collect();
        }
    }
    Ok(PositivityScanReport {
        passed: min_value > tol,
        min_value,
        worst_sample,
        samples_checked: directions.len(),
        seed,
        tolerance: tol,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ImplicationReport {
    pub scan_plus: PositivityScanReport,
    pub scan_minus: PositivityScanReport,
    /// `Some(±1)` for the orientation of `u'` whose scan passed.
    pub passing_orientation: Option<i8>,
    pub verdict: ClassificationVerdict,
    /// False only when a scan passed and the classifier still rejected.
    pub consistent: bool,
}

/// Checks that norm-level positivity implies the spectral condition.
///
/// Both orientations of the complement vector are scanned; if either
/// passes, the classifier must accept.
pub fn positivity_implies_spectrum(
    d: &ReductiveDecomposition,
    n: &MinkowskiNorm,
    sample_count: usize,
    seed: u64,
    tol: f64,
) -> Result<ImplicationReport> {
    let alg = d.algebra();
    let hyp = structural_check(alg, tol).map_err(|v| {
        Error::Hypothesis(format!(
            "structural hypotheses fail: {}",
            v.failure_reason.map(|r| r.as_str()).unwrap_or("unknown")
        ))
    })?;
    let scan_plus = bracket_positivity_scan(d, n, &hyp.complement, sample_count, seed, tol)?;
    let scan_minus = bracket_positivity_scan(d, n, &(-&hyp.complement), sample_count, seed, tol)?;
    let passing_orientation = if scan_plus.passed {
        Some(1)
    } else if scan_minus.passed {
        Some(-1)
    } else {
        None
    };
    let verdict = classify_solvable_negative(alg, tol);
    let consistent = passing_orientation.is_none() || verdict.admits_negative_metric;
    Ok(ImplicationReport {
        scan_plus,
        scan_minus,
        passing_orientation,
        verdict,
        consistent,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct IdealFlag {
    #[serde(with = "serde_vec")]
    pub y: DVector<f64>,
    #[serde(with = "serde_vec")]
    pub v: DVector<f64>,
    pub curvature: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct IdealFlagScan {
    pub applicable: usize,
    pub skipped: usize,
    /// `None` when no flag was applicable; an empty scan is not a success.
    pub min_curvature: Option<f64>,
    pub flags: Vec<IdealFlag>,
    pub seed: u64,
}

impl IdealFlagScan {
    pub fn is_empty(&self) -> bool {
        self.applicable == 0
    }
}

/// Evaluates the commuting-flag formula on pairs drawn from an abelian ideal.
///
/// `ideal` holds full g-coordinate columns and must be an abelian ideal
/// contained in m. Pairs of coordinate axes inside the ideal come first,
/// then `sample_count` seeded pairs.
pub fn abelian_ideal_flag_scan(
    d: &ReductiveDecomposition,
    n: &MinkowskiNorm,
    ideal: &DMatrix<f64>,
    sample_count: usize,
    seed: u64,
    tol: f64,
) -> Result<IdealFlagScan> {
    let alg = d.algebra();
    if ideal.nrows() != alg.dim() {
        return Err(Error::DimensionMismatch {
            expected: alg.dim(),
            got: ideal.nrows(),
        });
    }
    let ideal = linalg::orthonormal_span(ideal, 1e-12, 0.0);
    if ideal.ncols() == 0 {
        return Err(Error::InconsistentIdeal("ideal is zero".into()));
    }
    alg.verify_abelian_ideal(&ideal, tol)?;
    let mut cols = Vec::with_capacity(ideal.ncols());
    for c in ideal.column_iter() {
        cols.push(d.m_part_checked(&c.into_owned(), tol)?);
    }
    let basis = DMatrix::from_columns(&cols);
    let probes = axis_probes(&basis, 1e-12);
    let mut pairs = Vec::new();
    for (i, y) in probes.iter().enumerate() {
        for (j, v) in probes.iter().enumerate() {
            if i != j {
                pairs.push((y.clone(), v.clone()));
            }
        }
    }
    let sampler = SphereSampler::new(seed);
    pairs.extend((0..sample_count).map(|k| {
        (
            sampler.direction_in(&basis, 2 * k),
            sampler.direction_in(&basis, 2 * k + 1),
        )
    }));
    let results: Vec<Result<Option<FlagCurvatureResult>>> = pairs
        .par_iter()
        .map(|(y, v)| match curvature::flag_curvature_go(d, n, y, v, tol) {
            Ok(r) => Ok(Some(r)),
            Err(e) if e.is_inapplicable() => Ok(None),
            Err(e) => Err(e),
        })
        .collect();
    let mut flags = Vec::new();
    let mut skipped = 0;
    for r in results {
        match r? {
            Some(f) => flags.push(IdealFlag {
                y: f.anchor,
                v: f.flagpole,
                curvature: f.curvature,
            }),
            None => skipped += 1,
        }
    }
    let min_curvature = flags.iter().map(|f| f.curvature).reduce(f64::min);
    Ok(IdealFlagScan {
        applicable: flags.len(),
        skipped,
        min_curvature,
        flags,
        seed,
    })
}
