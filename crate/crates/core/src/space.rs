//! JSON space definitions: an algebra, a reductive splitting and a norm.
//!
//! ```json
//! {
//!   "name": "hyperbolic3",
//!   "dim": 3,
//!   "basis": ["u", "e1", "e2"],
//!   "brackets": [{"x": "u", "y": "e1", "out": {"e1": 1.0}}],
//!   "h": [],
//!   "m": ["u", "e1", "e2"],
//!   "norm": {"family": "riemannian", "matrix": [[1,0,0],[0,1,0],[0,0,1]]}
//! }
//! ```
//!
//! Unlisted bracket pairs are zero. Norm data is indexed in the order of
//! `m`; quartic coefficients are keyed by sorted m-index tuples `"i,j,k,l"`
//! and give the monomial coefficients of `F⁴`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::decomposition::ReductiveDecomposition;
use crate::error::{Error, Result};
use crate::lie::LieAlgebraModel;
use crate::minkowski::{AdmissibilityReport, MinkowskiNorm, NormFamily, QuarticForm};

/// Samples used for the quartic admissibility check at load time.
pub const ADMISSIBILITY_SAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BracketRecord {
    pub x: String,
    pub y: String,
    pub out: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum NormSpec {
    Riemannian {
        matrix: Vec<Vec<f64>>,
    },
    Randers {
        matrix: Vec<Vec<f64>>,
        covector: Vec<f64>,
    },
    Quartic {
        coefficients: BTreeMap<String, f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceDefinition {
    pub name: String,
    pub dim: usize,
    pub basis: Vec<String>,
    #[serde(default)]
    pub brackets: Vec<BracketRecord>,
    #[serde(default)]
    pub h: Vec<String>,
    pub m: Vec<String>,
    pub norm: NormSpec,
}

/// A validated space, ready for computation.
#[derive(Debug, Clone)]
pub struct LoadedSpace {
    pub definition: SpaceDefinition,
    pub decomposition: ReductiveDecomposition,
    pub norm: MinkowskiNorm,
    pub jacobi_residual: f64,
    pub admissibility: AdmissibilityReport,
}

impl LoadedSpace {
    pub fn algebra(&self) -> &LieAlgebraModel {
        self.decomposition.algebra()
    }
}

fn matrix_from_rows(rows: &[Vec<f64>], n: usize, what: &str, errors: &mut Vec<String>) -> Option<DMatrix<f64>> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        errors.push(format!("{what} must be {n}x{n} to match |m| = {n}"));
        return None;
    }
    Some(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn parse_quartic_key(key: &str, n: usize) -> std::result::Result<[usize; 4], String> {
    let parts: Vec<&str> = key.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(format!("quartic key {key:?} must have four indices"));
    }
    let mut t = [0usize; 4];
    for (slot, p) in t.iter_mut().zip(parts) {
        *slot = p
            .parse()
            .map_err(|_| format!("quartic key {key:?} has a non-integer index"))?;
        if *slot >= n {
            return Err(format!("quartic key {key:?} indexes beyond |m| = {n}"));
        }
    }
    if t.windows(2).any(|w| w[0] > w[1]) {
        return Err(format!("quartic key {key:?} is not sorted"));
    }
    Ok(t)
}

impl NormSpec {
    pub fn family(&self) -> NormFamily {
        match self {
            NormSpec::Riemannian { .. } => NormFamily::Riemannian,
            NormSpec::Randers { .. } => NormFamily::Randers,
            NormSpec::Quartic { .. } => NormFamily::Quartic,
        }
    }

    fn build(&self, n: usize, errors: &mut Vec<String>) -> Option<MinkowskiNorm> {
        match self {
            NormSpec::Riemannian { matrix } => {
                matrix_from_rows(matrix, n, "norm.matrix", errors).map(MinkowskiNorm::riemannian)
            }
            NormSpec::Randers { matrix, covector } => {
                let a = matrix_from_rows(matrix, n, "norm.matrix", errors);
                if covector.len() != n {
                    errors.push(format!("norm.covector must have length |m| = {n}"));
                    return None;
                }
                a.map(|a| MinkowskiNorm::randers(a, DVector::from_row_slice(covector)))
            }
            NormSpec::Quartic { coefficients } => {
                let mut monomials = BTreeMap::new();
                let before = errors.len();
                for (k, c) in coefficients {
                    match parse_quartic_key(k, n) {
                        Ok(t) => {
                            if monomials.insert(t, *c).is_some() {
                                errors.push(format!("quartic key {k:?} listed twice"));
                            }
                        }
                        Err(e) => errors.push(e),
                    }
                }
                if errors.len() > before {
                    return None;
                }
                match QuarticForm::from_monomials(n, monomials) {
                    Ok(q) => Some(MinkowskiNorm::quartic(q)),
                    Err(e) => {
                        errors.push(e.to_string());
                        None
                    }
                }
            }
        }
    }

    fn from_norm(norm: &MinkowskiNorm) -> Self {
        let rows = |a: &DMatrix<f64>| -> Vec<Vec<f64>> {
            a.row_iter().map(|r| r.iter().cloned().collect()).collect()
        };
        match norm.family() {
            NormFamily::Riemannian => NormSpec::Riemannian {
                matrix: rows(norm.quadratic_part().expect("riemannian")),
            },
            NormFamily::Randers => NormSpec::Randers {
                matrix: rows(norm.quadratic_part().expect("randers")),
                covector: norm.covector().expect("randers").iter().cloned().collect(),
            },
            NormFamily::Quartic => NormSpec::Quartic {
                coefficients: norm
                    .quartic_form()
                    .expect("quartic")
                    .monomials()
                    .iter()
                    .map(|(t, c)| (format!("{},{},{},{}", t[0], t[1], t[2], t[3]), *c))
                    .collect(),
            },
        }
    }
}

impl SpaceDefinition {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("space definitions always serialize")
    }

    /// Canonical definition of an assembled space: brackets in basis order
    /// with `x` before `y`, zero coefficients omitted.
    pub fn from_parts(name: &str, decomposition: &ReductiveDecomposition, norm: &MinkowskiNorm) -> Self {
        let alg = decomposition.algebra();
        let names = alg.basis_names();
        let brackets = alg
            .structure_constants()
            .iter()
            .map(|(&(i, j), out)| BracketRecord {
                x: names[i].clone(),
                y: names[j].clone(),
                out: out
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| **c != 0.0)
                    .map(|(k, c)| (names[k].clone(), *c))
                    .collect(),
            })
            .collect();
        let pick = |idx: &[usize]| idx.iter().map(|&i| names[i].clone()).collect();
        SpaceDefinition {
            name: name.to_string(),
            dim: alg.dim(),
            basis: names.to_vec(),
            brackets,
            h: pick(decomposition.h_indices()),
            m: pick(decomposition.m_indices()),
            norm: NormSpec::from_norm(norm),
        }
    }

    /// Validates and assembles the model, collecting every violation found.
    pub fn assemble(&self, tol: f64) -> Result<LoadedSpace> {
        let mut errors = Vec::new();
        if self.dim != self.basis.len() {
            errors.push(format!(
                "dim = {} but basis lists {} names",
                self.dim,
                self.basis.len()
            ));
        }
        let mut index = BTreeMap::new();
        for (i, name) in self.basis.iter().enumerate() {
            if index.insert(name.as_str(), i).is_some() {
                errors.push(format!("basis name {name:?} repeated"));
            }
        }
        let lookup = |name: &str, ctx: &str, errors: &mut Vec<String>| -> Option<usize> {
            let r = index.get(name).copied();
            if r.is_none() {
                errors.push(format!("{ctx} names unknown basis vector {name:?}"));
            }
            r
        };
        let dim = self.basis.len();
        let mut pairs = BTreeSet::new();
        let mut brackets = Vec::new();
        for (n, rec) in self.brackets.iter().enumerate() {
            let ctx = format!("brackets[{n}]");
            let (x, y) = (
                lookup(&rec.x, &ctx, &mut errors),
                lookup(&rec.y, &ctx, &mut errors),
            );
            let mut out = DVector::zeros(dim);
            for (k, c) in &rec.out {
                if let Some(k) = lookup(k, &ctx, &mut errors) {
                    out[k] = *c;
                }
                if !c.is_finite() {
                    errors.push(format!("{ctx} has a non-finite coefficient"));
                }
            }
            if let (Some(x), Some(y)) = (x, y) {
                if x == y {
                    errors.push(format!("{ctx} brackets {:?} with itself", rec.x));
                    continue;
                }
                if !pairs.insert((x.min(y), x.max(y))) {
                    errors.push(format!("{ctx}: pair ({}, {}) listed more than once", rec.x, rec.y));
                    continue;
                }
                brackets.push((x, y, out));
            }
        }
        let h: Vec<usize> = self
            .h
            .iter()
            .filter_map(|n| lookup(n, "h", &mut errors))
            .collect();
        let m: Vec<usize> = self
            .m
            .iter()
            .filter_map(|n| lookup(n, "m", &mut errors))
            .collect();
        let mut cover = vec![0usize; dim];
        for &i in h.iter().chain(m.iter()) {
            cover[i] += 1;
        }
        for (i, c) in cover.iter().enumerate() {
            match c {
                0 => errors.push(format!("basis vector {:?} is in neither h nor m", self.basis[i])),
                1 => {}
                _ => errors.push(format!("basis vector {:?} is listed in h/m more than once", self.basis[i])),
            }
        }
        let norm = self.norm.build(self.m.len(), &mut errors);
        if !errors.is_empty() {
            return Err(Error::InvalidSpace(errors));
        }

        let algebra = LieAlgebraModel::new(self.basis.clone(), brackets)
            .map_err(|e| Error::InvalidSpace(vec![e.to_string()]))?;
        let jacobi = algebra.validate_jacobi(tol * algebra.scale() * algebra.scale());
        if !jacobi.passed {
            let (i, j, k) = jacobi.worst_triple.expect("failure has a witness");
            errors.push(format!(
                "Jacobi identity fails on ({}, {}, {}): residual {:?}",
                self.basis[i], self.basis[j], self.basis[k], jacobi.max_residual
            ));
        }
        let decomposition = match ReductiveDecomposition::new(algebra, h, m, tol) {
            Ok(d) => Some(d),
            Err(Error::ClosureFailure { kind, x, y, residual }) => {
                errors.push(format!(
                    "decomposition fails [{kind}] closure at [{}, {}]: residual {residual:?}",
                    self.basis[x], self.basis[y]
                ));
                None
            }
            Err(e) => {
                errors.push(e.to_string());
                None
            }
        };
        let norm = norm.expect("norm built when no structural errors");
        let admissibility = norm.check_admissible(ADMISSIBILITY_SAMPLES, 0);
        if !admissibility.passed {
            errors.push(format!("norm is not admissible: {}", admissibility.detail));
        }
        match decomposition {
            Some(decomposition) if errors.is_empty() => Ok(LoadedSpace {
                definition: self.clone(),
                decomposition,
                norm,
                jacobi_residual: jacobi.max_residual,
                admissibility,
            }),
            _ => Err(Error::InvalidSpace(errors)),
        }
    }
}

pub fn load_space(path: impl AsRef<Path>, tol: f64) -> Result<LoadedSpace> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    SpaceDefinition::from_json(&text)?.assemble(tol)
}

/// Directory holding the bundled gallery of named spaces.
pub fn gallery_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/gallery"))
}

pub fn gallery_path(name: &str) -> std::path::PathBuf {
    gallery_dir().join(format!("{name}.space"))
}
