//! Reductive splittings `g = h + m` and the projected bracket.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::lie::LieAlgebraModel;
use crate::linalg;

/// A validated splitting of the coordinate basis into `h` and `m`.
///
/// Vectors in `m` are handled in m-coordinates (length `m_dim()`, ordered
/// as `m_indices`), vectors in `h` likewise.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductiveDecomposition {
    algebra: LieAlgebraModel,
    h_indices: Vec<usize>,
    m_indices: Vec<usize>,
}

impl ReductiveDecomposition {
    /// Validates `[h, h] ⊆ h` and `[h, m] ⊆ m` on basis pairs.
    pub fn new(
        algebra: LieAlgebraModel,
        h_indices: Vec<usize>,
        m_indices: Vec<usize>,
        tol: f64,
    ) -> Result<Self> {
        let n = algebra.dim();
        let mut seen = vec![false; n];
        for &i in h_indices.iter().chain(m_indices.iter()) {
            if i >= n {
                return Err(Error::InvalidPartition(format!("index {i} out of range")));
            }
            if seen[i] {
                return Err(Error::InvalidPartition(format!("index {i} appears twice")));
            }
            seen[i] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidPartition(format!("index {missing} is in neither h nor m")));
        }
        if m_indices.is_empty() {
            return Err(Error::InvalidPartition("m is empty".into()));
        }
        let d = Self {
            algebra,
            h_indices,
            m_indices,
        };
        d.check_closure(tol)?;
        Ok(d)
    }

    /// The group case: `h = 0`, `m = g`.
    pub fn trivial(algebra: LieAlgebraModel) -> Self {
        let n = algebra.dim();
        Self {
            algebra,
            h_indices: Vec::new(),
            m_indices: (0..n).collect(),
        }
    }

    fn check_closure(&self, tol: f64) -> Result<()> {
        let threshold = tol * self.algebra.scale();
        let mut worst: Option<(&'static str, usize, usize, f64)> = None;
        let mut note = |kind, x, y, r: f64| {
            if r > threshold && worst.is_none_or(|w| r > w.3) {
                worst = Some((kind, x, y, r));
            }
        };
        for (a, &i) in self.h_indices.iter().enumerate() {
            for &j in &self.h_indices[a + 1..] {
                let br = self.algebra.basis_bracket(i, j);
                let r = self.m_indices.iter().fold(0.0_f64, |acc, &k| acc.max(br[k].abs()));
                note("h,h", i, j, r);
            }
            for &j in &self.m_indices {
                let br = self.algebra.basis_bracket(i, j);
                let r = self.h_indices.iter().fold(0.0_f64, |acc, &k| acc.max(br[k].abs()));
                note("h,m", i, j, r);
            }
        }
        match worst {
            Some((kind, x, y, residual)) => Err(Error::ClosureFailure {
                kind,
                x,
                y,
                residual,
            }),
            None => Ok(()),
        }
    }

    pub fn algebra(&self) -> &LieAlgebraModel {
        &self.algebra
    }

    pub fn h_indices(&self) -> &[usize] {
        &self.h_indices
    }

    pub fn m_indices(&self) -> &[usize] {
        &self.m_indices
    }

    pub fn m_dim(&self) -> usize {
        self.m_indices.len()
    }

    pub fn h_dim(&self) -> usize {
        self.h_indices.len()
    }

    pub fn embed_m(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.algebra.dim());
        for (a, &i) in self.m_indices.iter().enumerate() {
            out[i] = x[a];
        }
        out
    }

    pub fn embed_h(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.algebra.dim());
        for (a, &i) in self.h_indices.iter().enumerate() {
            out[i] = x[a];
        }
        out
    }

    /// `pr_m`, returned in m-coordinates.
    pub fn project_m(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.m_dim(), self.m_indices.iter().map(|&i| x[i]))
    }

    pub fn project_h(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.h_dim(), self.h_indices.iter().map(|&i| x[i]))
    }

    /// `[x, y]_m` for m-coordinate inputs.
    pub fn bracket_m(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        self.project_m(&self.algebra.bracket_unchecked(&self.embed_m(x), &self.embed_m(y)))
    }

    /// `[x, y]_m` for full g-coordinate inputs.
    pub fn bracket_m_full(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        self.project_m(&self.algebra.bracket_unchecked(x, y))
    }


    /// Splits a full g-coordinate vector, requiring it to lie in `m`.
    pub fn m_part_checked(&self, x: &DVector<f64>, tol: f64) -> Result<DVector<f64>> {
        self.algebra.check_len(x)?;
        let h = self.project_h(x);
        let r = linalg::inf_norm(&h);
        if r > tol * linalg::inf_norm(x).max(f64::MIN_POSITIVE) {
            return Err(Error::NotInSubspace {
                space: "m",
                residual: r,
            });
        }
        Ok(self.project_m(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;

    #[test]
    fn trivial_h_always_valid() {
        let g = models::heisenberg();
        assert!(ReductiveDecomposition::new(g, vec![], vec![0, 1, 2], 1e-9).is_ok());
    }

    #[test]
    fn so3_sphere_splitting() {
        let d = ReductiveDecomposition::new(models::so3(), vec![2], vec![0, 1], 1e-9).unwrap();
        // [e1, e2]_m = pr_m(e3) = 0
        let e1 = DVector::from_row_slice(&[1.0, 0.0]);
        let e2 = DVector::from_row_slice(&[0.0, 1.0]);
        assert_eq!(d.bracket_m(&e1, &e2), DVector::zeros(2));
    }

    #[test]
    fn heisenberg_with_h_e1_passes() {
        assert!(ReductiveDecomposition::new(models::heisenberg(), vec![0], vec![1, 2], 1e-9).is_ok());
    }

    #[test]
    fn hyperbolic_with_h_e1_rejected() {
        // [e1, u] = -e1 lands in h
        let err = ReductiveDecomposition::new(models::hyperbolic(3), vec![1], vec![0, 2], 1e-9)
            .unwrap_err();
        match err {
            Error::ClosureFailure { kind, x, y, residual } => {
                assert_eq!(kind, "h,m");
                assert_eq!((x, y), (1, 0));
                assert_eq!(residual, 1.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_subalgebra_h_rejected() {
        let err = ReductiveDecomposition::new(models::so3(), vec![0, 1], vec![2], 1e-9).unwrap_err();
        assert!(matches!(err, Error::ClosureFailure { kind: "h,h", .. }));
    }

    #[test]
    fn bad_partitions() {
        let g = models::heisenberg();
        assert!(matches!(
            ReductiveDecomposition::new(g.clone(), vec![0], vec![0, 1, 2], 1e-9),
            Err(Error::InvalidPartition(_))
        ));
        assert!(matches!(
            ReductiveDecomposition::new(g, vec![], vec![0, 1], 1e-9),
            Err(Error::InvalidPartition(_))
        ));
    }
}
