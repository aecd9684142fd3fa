//! Real Lie algebras given by structure constants.
//!
//! Brackets of basis vectors are stored only for pairs `i < j`; the full
//! bracket is assembled from the antisymmetrized coordinate products
//! `x_i y_j - x_j y_i`, which makes `[x, y] = -[y, x]` and `[x, x] = 0`
//! hold exactly in floating point.

use std::collections::BTreeMap;

use nalgebra::{Complex, DMatrix, DVector};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg;

/// Default relative tolerance for zero tests on algebra data.
pub const DEFAULT_TOL: f64 = 1e-9;

/// `(i, j, [(k, c_ij^k)])`: the bracket `[e_i, e_j]` as sparse coefficients.
pub type Relation<'a> = (usize, usize, &'a [(usize, f64)]);

#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebraModel {
    basis_names: Vec<String>,
    constants: BTreeMap<(usize, usize), DVector<f64>>,
}

impl LieAlgebraModel {
    /// Builds an algebra from brackets of basis vectors.
    ///
    /// Pairs may be given in either orientation; `(j, i)` is stored as the
    /// negated `(i, j)`. A pair listed twice or a self-bracket is rejected.
    pub fn new<I>(basis_names: Vec<String>, brackets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, DVector<f64>)>,
    {
        let dim = basis_names.len();
        if dim == 0 {
            return Err(Error::InvalidSpace(vec!["empty basis".into()]));
        }
        let mut seen = std::collections::BTreeSet::new();
        for name in &basis_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidSpace(vec![format!(
                    "duplicate basis name {name:?}"
                )]));
            }
        }
        let mut constants = BTreeMap::new();
        for (i, j, out) in brackets {
            if i >= dim || j >= dim {
                return Err(Error::InvalidSpace(vec![format!(
                    "bracket index ({i}, {j}) out of range for dimension {dim}"
                )]));
            }
            if out.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: out.len(),
                });
            }
            if i == j {
                if out.iter().any(|c| *c != 0.0) {
                    return Err(Error::InvalidSpace(vec![format!(
                        "self-bracket [{0}, {0}] must vanish",
                        basis_names[i]
                    )]));
                }
                continue;
            }
            let (key, val) = if i < j { ((i, j), out) } else { ((j, i), -out) };
            if constants.insert(key, val).is_some() {
                return Err(Error::InvalidSpace(vec![format!(
                    "bracket [{}, {}] listed more than once",
                    basis_names[key.0], basis_names[key.1]
                )]));
            }
        }
        constants.retain(|_, v: &mut DVector<f64>| v.iter().any(|c| *c != 0.0));
        Ok(Self {
            basis_names,
            constants,
        })
    }

    /// Convenience constructor from sparse relations `[e_i, e_j] = sum c_k e_k`.
    pub fn from_relations(names: &[&str], relations: &[Relation]) -> Result<Self> {
        let dim = names.len();
        let brackets = relations.iter().map(|(i, j, terms)| {
            let mut out = DVector::zeros(dim);
            for (k, c) in terms.iter() {
                out[*k] += c;
            }
            (*i, *j, out)
        });
        Self::new(names.iter().map(|s| s.to_string()).collect(), brackets.collect::<Vec<_>>())
    }

    pub fn dim(&self) -> usize {
        self.basis_names.len()
    }

    pub fn basis_names(&self) -> &[String] {
        &self.basis_names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.basis_names.iter().position(|n| n == name)
    }

    /// Nonzero structure constants, keyed by `(i, j)` with `i < j`.
    pub fn structure_constants(&self) -> &BTreeMap<(usize, usize), DVector<f64>> {
        &self.constants
    }

    pub fn is_abelian(&self) -> bool {
        self.constants.is_empty()
    }

    /// Largest absolute structure constant, floored at 1; the reference
    /// magnitude for relative zero tests.
    pub fn scale(&self) -> f64 {
        self.constants
            .values()
            .map(linalg::inf_norm)
            .fold(1.0, f64::max)
    }

    pub fn unit(&self, i: usize) -> DVector<f64> {
        let mut v = DVector::zeros(self.dim());
        v[i] = 1.0;
        v
    }

    pub fn basis_bracket(&self, i: usize, j: usize) -> DVector<f64> {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self
                .constants
                .get(&(i, j))
                .cloned()
                .unwrap_or_else(|| DVector::zeros(self.dim())),
            std::cmp::Ordering::Greater => self
                .constants
                .get(&(j, i))
                .map(|v| -v)
                .unwrap_or_else(|| DVector::zeros(self.dim())),
            std::cmp::Ordering::Equal => DVector::zeros(self.dim()),
        }
    }

    pub fn bracket(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_len(x)?;
        self.check_len(y)?;
        Ok(self.bracket_unchecked(x, y))
    }

    pub(crate) fn bracket_unchecked(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim());
        for (&(i, j), c) in &self.constants {
            let w = x[i] * y[j] - x[j] * y[i];
            if w != 0.0 {
                out.axpy(w, c, 1.0);
            }
        }
        out
    }

    pub(crate) fn check_len(&self, v: &DVector<f64>) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: v.len(),
            });
        }
        Ok(())
    }

    /// Matrix of ad(u) in the coordinate basis: column j is [u, e_j].
    pub fn ad(&self, u: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check_len(u)?;
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            m.set_column(j, &self.bracket_unchecked(u, &self.unit(j)));
        }
        Ok(m)
    }

    /// Killing form `B(e_i, e_j) = tr(ad e_i ad e_j)`.
    pub fn killing_form(&self) -> DMatrix<f64> {
        let n = self.dim();
        let ads: Vec<DMatrix<f64>> = (0..n)
            .map(|i| self.ad(&self.unit(i)).expect("unit has algebra dimension"))
            .collect();
        DMatrix::from_fn(n, n, |i, j| (&ads[i] * &ads[j]).trace())
    }

    pub fn validate_jacobi(&self, tol: f64) -> JacobiReport {
        let n = self.dim();
        let mut max_residual = 0.0_f64;
        let mut worst_triple = None;
        // the Jacobiator is alternating, so distinct increasing triples suffice
        for i in 0..n {
            for j in (i + 1)..n {
                for k in (j + 1)..n {
                    let (x, y, z) = (self.unit(i), self.unit(j), self.unit(k));
                    let jac = self.bracket_unchecked(&x, &self.bracket_unchecked(&y, &z))
                        + self.bracket_unchecked(&y, &self.bracket_unchecked(&z, &x))
                        + self.bracket_unchecked(&z, &self.bracket_unchecked(&x, &y));
                    let r = linalg::inf_norm(&jac);
                    if r > max_residual {
                        max_residual = r;
                        worst_triple = Some((i, j, k));
                    }
                }
            }
        }
        JacobiReport {
            max_residual,
            worst_triple,
            tolerance: tol,
            passed: max_residual <= tol,
        }
    }

    /// Orthonormal basis of the span of all brackets of vectors in `subspace`.
    pub fn bracket_span(&self, subspace: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
        let k = subspace.ncols();
        let mut cols = Vec::new();
        for a in 0..k {
            for b in (a + 1)..k {
                let x = subspace.column(a).into_owned();
                let y = subspace.column(b).into_owned();
                cols.push(self.bracket_unchecked(&x, &y));
            }
        }
        if cols.is_empty() {
            return DMatrix::zeros(self.dim(), 0);
        }
        let m = DMatrix::from_columns(&cols);
        linalg::orthonormal_span(&m, tol, tol * self.scale())
    }

    pub fn derived_series(&self, tol: f64) -> DerivedSeries {
        let n = self.dim();
        let mut terms = vec![DMatrix::identity(n, n)];
        loop {
            let current = terms.last().expect("series is nonempty");
            let next = self.bracket_span(current, tol);
            let stalled = next.ncols() == current.ncols();
            let reached_zero = next.ncols() == 0;
            if stalled {
                return DerivedSeries {
                    terms,
                    is_solvable: false,
                };
            }
            terms.push(next);
            if reached_zero {
                return DerivedSeries {
                    terms,
                    is_solvable: true,
                };
            }
        }
    }

    /// Matrix of ad(u) restricted to an ad(u)-invariant subspace, expressed
    /// in the given subspace basis (columns), together with its spectrum.
    pub fn ad_restricted(
        &self,
        u: &DVector<f64>,
        subspace: &DMatrix<f64>,
        tol: f64,
    ) -> Result<RestrictedAd> {
        self.check_len(u)?;
        if subspace.nrows() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: subspace.nrows(),
            });
        }
        let k = subspace.ncols();
        if k == 0 {
            return Ok(RestrictedAd {
                matrix: DMatrix::zeros(0, 0),
                spectrum: SpectrumResult::of(&DMatrix::zeros(0, 0)),
                invariance_residual: 0.0,
            });
        }
        let ad = self.ad(u)?;
        let image = &ad * subspace;
        let svd = subspace.clone().svd(true, true);
        let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        let matrix = svd
            .solve(&image, smax * 1e-13)
            .map_err(|e| Error::Hypothesis(format!("subspace basis is degenerate: {e}")))?;
        let residual = (&image - subspace * &matrix).abs().max();
        let scale = linalg::max_row_sum(&ad);
        if residual > tol * scale.max(f64::MIN_POSITIVE) && residual > 0.0 {
            return Err(Error::NotInvariant { residual });
        }
        let spectrum = SpectrumResult::of(&matrix);
        Ok(RestrictedAd {
            matrix,
            spectrum,
            invariance_residual: residual,
        })
    }

    /// An abelian ideal, or `None` when the Killing form is nondegenerate.
    ///
    /// Solvable algebras return the last nonzero derived term. Otherwise
    /// the kernel of the Killing form (a solvable ideal when nonzero) is
    /// taken and its own last nonzero derived term returned.
    pub fn find_abelian_ideal(&self, tol: f64) -> Result<Option<DMatrix<f64>>> {
        let series = self.derived_series(tol);
        let candidate = if series.is_solvable {
            series.last_nonzero().clone()
        } else {
            let killing = self.killing_form();
            let kernel = linalg::symmetric_kernel(&killing, tol);
            if kernel.ncols() == 0 {
                return Ok(None);
            }
            let mut current = kernel;
            loop {
                let next = self.bracket_span(&current, tol);
                if next.ncols() == 0 {
                    break current;
                }
                if next.ncols() == current.ncols() {
                    return Err(Error::InconsistentIdeal(
                        "radical of the Killing form is not solvable".into(),
                    ));
                }
                current = next;
            }
        };
        self.verify_abelian_ideal(&candidate, tol)?;
        Ok(Some(candidate))
    }

    /// Checks `[a, a] = 0` and `[g, a] ⊆ a` on basis pairs.
    pub fn verify_abelian_ideal(&self, ideal: &DMatrix<f64>, tol: f64) -> Result<()> {
        let threshold = tol * self.scale();
        let k = ideal.ncols();
        for a in 0..k {
            let x = ideal.column(a).into_owned();
            for b in (a + 1)..k {
                let y = ideal.column(b).into_owned();
                let r = linalg::inf_norm(&self.bracket_unchecked(&x, &y));
                if r > threshold {
                    return Err(Error::InconsistentIdeal(format!(
                        "not abelian: |[a_{a}, a_{b}]| = {r:e}"
                    )));
                }
            }
            for g in 0..self.dim() {
                let br = self.bracket_unchecked(&self.unit(g), &x);
                let r = linalg::inf_norm(&linalg::residual_outside(ideal, &br));
                if r > threshold {
                    return Err(Error::InconsistentIdeal(format!(
                        "not an ideal: [e_{g}, a_{a}] leaves the subspace by {r:e}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Structure constants in the basis given by the columns of `p`.
    pub fn change_basis(&self, p: &DMatrix<f64>) -> Result<LieAlgebraModel> {
        let n = self.dim();
        if p.shape() != (n, n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: p.nrows(),
            });
        }
        let lu = p.clone().lu();
        let mut brackets = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let x = p.column(i).into_owned();
                let y = p.column(j).into_owned();
                let br = self.bracket_unchecked(&x, &y);
                let coords = lu
                    .solve(&br)
                    .ok_or_else(|| Error::Hypothesis("change of basis is singular".into()))?;
                brackets.push((i, j, coords));
            }
        }
        LieAlgebraModel::new(self.basis_names.clone(), brackets)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct JacobiReport {
    pub max_residual: f64,
    pub worst_triple: Option<(usize, usize, usize)>,
    pub tolerance: f64,
    pub passed: bool,
}

/// The derived series, each term an orthonormal basis in columns.
#[derive(Debug, Clone)]
pub struct DerivedSeries {
    pub terms: Vec<DMatrix<f64>>,
    pub is_solvable: bool,
}

impl DerivedSeries {
    /// `[g, g]`; equal to the whole algebra when the series stalls at once.
    pub fn derived_algebra(&self) -> &DMatrix<f64> {
        self.terms.get(1).unwrap_or(&self.terms[0])
    }

    pub fn dimensions(&self) -> Vec<usize> {
        self.terms.iter().map(|t| t.ncols()).collect()
    }

    pub fn last_nonzero(&self) -> &DMatrix<f64> {
        self.terms
            .iter()
            .rev()
            .find(|t| t.ncols() > 0)
            .expect("first term is the whole algebra")
    }
}

#[derive(Debug, Clone)]
pub struct SpectrumResult {
    /// Sorted by real part, then imaginary part.
    pub eigenvalues: Vec<Complex<f64>>,
    /// Maximum absolute row sum of the operator.
    pub operator_norm: f64,
}

impl SpectrumResult {
    pub fn of(m: &DMatrix<f64>) -> Self {
        let mut eigenvalues: Vec<Complex<f64>> = if m.nrows() == 0 {
            Vec::new()
        } else {
            m.complex_eigenvalues().iter().cloned().collect()
        };
        eigenvalues.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        SpectrumResult {
            eigenvalues,
            operator_norm: linalg::max_row_sum(m),
        }
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl Serialize for SpectrumResult {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.eigenvalues.iter().map(|z| [z.re, z.im]).collect();
        let mut st = s.serialize_struct("SpectrumResult", 2)?;
        st.serialize_field("eigenvalues", &pairs)?;
        st.serialize_field("operator_norm", &self.operator_norm)?;
        st.end()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RestrictedAd {
    #[serde(with = "crate::linalg::serde_mat")]
    pub matrix: DMatrix<f64>,
    pub spectrum: SpectrumResult,
    pub invariance_residual: f64,
}
