//! Named algebras used throughout the gallery and the tests.

use crate::lie::{LieAlgebraModel, Relation};

fn build(names: &[&str], relations: &[Relation]) -> LieAlgebraModel {
    LieAlgebraModel::from_relations(names, relations).expect("model constants are well formed")
}

pub fn abelian(n: usize) -> LieAlgebraModel {
    let names: Vec<String> = (1..=n).map(|i| format!("e{i}")).collect();
    LieAlgebraModel::new(names, Vec::new()).expect("nonempty basis")
}

/// `[e1, e2] = e3`.
pub fn heisenberg() -> LieAlgebraModel {
    build(&["e1", "e2", "e3"], &[(0, 1, &[(2, 1.0)])])
}

/// Basis `(u, e1, ..., e_{n-1})` with `[u, e_i] = e_i`: real hyperbolic space as a solvable group.
pub fn hyperbolic(n: usize) -> LieAlgebraModel {
    assert!(n >= 2, "hyperbolic model needs dimension at least 2");
    let mut names = vec!["u".to_string()];
    names.extend((1..n).map(|i| format!("e{i}")));
    let dim = names.len();
    let brackets = (1..n).map(|i| {
        let mut out = nalgebra::DVector::zeros(dim);
        out[i] = 1.0;
        (0, i, out)
    });
    LieAlgebraModel::new(names, brackets.collect::<Vec<_>>()).expect("well formed")
}

/// Basis `(u, e1, e2)` with `[u, e1] = a e2`, `[u, e2] = -b e1`.
pub fn rotation(a: f64, b: f64) -> LieAlgebraModel {
    build(&["u", "e1", "e2"], &[(0, 1, &[(2, a)]), (0, 2, &[(1, -b)])])
}

/// Basis `(u, e1, e2)` with `[u, e1] = d1 e1`, `[u, e2] = d2 e2`.
pub fn diagonal(d1: f64, d2: f64) -> LieAlgebraModel {
    build(&["u", "e1", "e2"], &[(0, 1, &[(1, d1)]), (0, 2, &[(2, d2)])])
}

/// Basis `(u, e1, e2, e3)` with `[u, e1] = e1`, `[u, e2] = -e2`; `e3` central.
pub fn saddle() -> LieAlgebraModel {
    build(
        &["u", "e1", "e2", "e3"],
        &[(0, 1, &[(1, 1.0)]), (0, 2, &[(2, -1.0)])],
    )
}

/// `[e1, e2] = e3`, `[e2, e3] = e1`, `[e3, e1] = e2`.
pub fn so3() -> LieAlgebraModel {
    build(
        &["e1", "e2", "e3"],
        &[(0, 1, &[(2, 1.0)]), (1, 2, &[(0, 1.0)]), (2, 0, &[(1, 1.0)])],
    )
}

/// Basis `(h, e, f)`: `[h, e] = 2e`, `[h, f] = -2f`, `[e, f] = h`.
pub fn sl2() -> LieAlgebraModel {
    build(
        &["h", "e", "f"],
        &[(0, 1, &[(1, 2.0)]), (0, 2, &[(2, -2.0)]), (1, 2, &[(0, 1.0)])],
    )
}
