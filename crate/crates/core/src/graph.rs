//! Undirected graphs, graph shifts and families of commuting shifts.
//!
//! Matrices are stored densely; the graph only constrains the sparsity pattern of a shift.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{GsisError, Result};
use crate::linalg::{commutator_norm, symmetry_residual};

/// Tolerance used by the shift checks when the caller does not supply one.
pub fn default_tolerance(m: &DMatrix<f64>) -> f64 {
    1e-10 * m.norm().max(1.0)
}

/// Undirected graph on vertices `0..n` with nonnegative edge weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Graph {
    n: usize,
    /// Keyed by `(min(i, j), max(i, j))`.
    edges: BTreeMap<(usize, usize), f64>,
}

impl Graph {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(GsisError::InvalidGraph("graph order must be positive".into()));
        }
        Ok(Self { n, edges: BTreeMap::new() })
    }

    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut g = Self::new(n)?;
        for (i, j, w) in edges {
            g.add_edge(i, j, w)?;
        }
        Ok(g)
    }

    /// Path graph `0 - 1 - … - (n-1)`.
    pub fn path(n: usize) -> Result<Self> {
        Self::from_edges(n, (1..n).map(|i| (i - 1, i, 1.0)))
    }

    /// Cycle graph on `n ≥ 3` vertices.
    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(GsisError::InvalidGraph("a cycle needs at least 3 vertices".into()));
        }
        Self::from_edges(n, (0..n).map(|i| (i, (i + 1) % n, 1.0)))
    }

    /// Adds (or overwrites) the undirected edge `{i, j}`.
    pub fn add_edge(&mut self, i: usize, j: usize, weight: f64) -> Result<()> {
        if i == j {
            return Err(GsisError::InvalidGraph(format!("self-loop at vertex {i}")));
        }
        for v in [i, j] {
            if v >= self.n {
                return Err(GsisError::IndexOutOfRange { index: v, size: self.n });
            }
        }
        if !(weight.is_finite() && weight >= 0.0) {
            return Err(GsisError::InvalidGraph(format!(
                "edge ({i}, {j}) has invalid weight {weight}"
            )));
        }
        self.edges.insert((i.min(j), i.max(j)), weight);
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edges.contains_key(&(i.min(j), i.max(j)))
    }

    /// Edges as `(i, j, w)` with `i < j`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.edges.iter().map(|(&(i, j), &w)| (i, j, w))
    }

    pub fn adjacency_matrix(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for (i, j, w) in self.edges() {
            a[(i, j)] = w;
            a[(j, i)] = w;
        }
        a
    }

    pub fn degrees(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for (i, j, w) in self.edges() {
            d[i] += w;
            d[j] += w;
        }
        d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftKind {
    Adjacency,
    Laplacian,
    NormalizedLaplacian,
}

/// A symmetric matrix whose off-diagonal support lies inside the edge set of its graph.
#[derive(Debug, Clone)]
pub struct ShiftMatrix {
    matrix: DMatrix<f64>,
    graph: Arc<Graph>,
}

impl ShiftMatrix {
    /// Wraps `matrix` after checking symmetry and the sparsity pattern with the default tolerance.
    pub fn new(matrix: DMatrix<f64>, graph: Arc<Graph>) -> Result<Self> {
        let tol = default_tolerance(&matrix);
        if !validate_shift(&matrix, &graph, tol)? {
            return Err(GsisError::InvalidParameter(
                "matrix is not a graph shift: asymmetric or nonzero off the edge set".into(),
            ));
        }
        Ok(Self { matrix, graph })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn graph(&self) -> &Arc<Graph> {
        &self.graph
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }
}

/// Ordered family of shifts on a common graph, with the commutativity residual recorded
/// at construction.
#[derive(Debug, Clone)]
pub struct ShiftSet {
    graph: Arc<Graph>,
    shifts: Vec<DMatrix<f64>>,
    commutativity_residual: f64,
}

impl ShiftSet {
    pub fn new(shifts: Vec<ShiftMatrix>) -> Result<Self> {
        let first = shifts.first().ok_or(GsisError::Empty("shift set"))?;
        let graph = Arc::clone(&first.graph);
        for s in &shifts[1..] {
            if !Arc::ptr_eq(&s.graph, &graph) && *s.graph != *graph {
                return Err(GsisError::InvalidParameter(
                    "all shifts in a set must share one graph".into(),
                ));
            }
        }
        let shifts: Vec<DMatrix<f64>> = shifts.into_iter().map(ShiftMatrix::into_matrix).collect();
        let commutativity_residual = max_commutator(&shifts);
        Ok(Self { graph, shifts, commutativity_residual })
    }

    pub fn single(shift: ShiftMatrix) -> Self {
        let graph = Arc::clone(&shift.graph);
        Self { graph, shifts: vec![shift.matrix], commutativity_residual: 0.0 }
    }

    pub fn graph(&self) -> &Arc<Graph> {
        &self.graph
    }

    pub fn order(&self) -> usize {
        self.graph.order()
    }

    /// Number of shifts `L`.
    pub fn len(&self) -> usize {
        self.shifts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shifts.is_empty()
    }

    pub fn shifts(&self) -> &[DMatrix<f64>] {
        &self.shifts
    }

    pub fn shift(&self, l: usize) -> &DMatrix<f64> {
        &self.shifts[l]
    }

    pub fn commutativity_residual(&self) -> f64 {
        self.commutativity_residual
    }

    /// Tolerance for the commutator test, scaled by the squared largest shift norm.
    pub fn default_commutativity_tolerance(&self) -> f64 {
        let scale = self.shifts.iter().map(|s| s.norm()).fold(1.0, f64::max);
        1e-10 * scale * scale
    }
}

fn max_commutator(shifts: &[DMatrix<f64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (a, sa) in shifts.iter().enumerate() {
        for sb in &shifts[a + 1..] {
            worst = worst.max(commutator_norm(sa, sb));
        }
    }
    worst
}

/// Adjacency `A`, Laplacian `D − A` or symmetric normalized Laplacian `D^{-1/2}(D − A)D^{-1/2}`.
pub fn build_standard_shift(graph: &Arc<Graph>, kind: ShiftKind) -> Result<ShiftMatrix> {
    let n = graph.order();
    let adj = graph.adjacency_matrix();
    let deg = graph.degrees();
    let matrix = match kind {
        ShiftKind::Adjacency => adj,
        ShiftKind::Laplacian => DMatrix::from_diagonal(&deg.clone().into()) - adj,
        ShiftKind::NormalizedLaplacian => {
            if let Some(vertex) = deg.iter().position(|&d| d <= 0.0) {
                return Err(GsisError::DegenerateGraph { vertex });
            }
            let inv_sqrt: Vec<f64> = deg.iter().map(|d| 1.0 / d.sqrt()).collect();
            DMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    1.0
                } else {
                    -adj[(i, j)] * inv_sqrt[i] * inv_sqrt[j]
                }
            })
        }
    };
    Ok(ShiftMatrix { matrix, graph: Arc::clone(graph) })
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Circulant graph `C(n, Q)` with one shift per generator: diagonal 1 and `-1/2` at offsets `±q`.
pub fn build_circulant(n: usize, generators: &[usize]) -> Result<(Arc<Graph>, ShiftSet)> {
    if generators.is_empty() {
        return Err(GsisError::Empty("circulant generator set"));
    }
    for w in generators.windows(2) {
        if w[0] >= w[1] {
            return Err(GsisError::InvalidParameter(
                "circulant generators must be strictly increasing".into(),
            ));
        }
    }
    for &q in generators {
        if q == 0 || 2 * q >= n {
            return Err(GsisError::InvalidGenerator { q, n });
        }
    }
    let g = generators.iter().fold(n, |acc, &q| gcd(acc, q));
    if g != 1 {
        log::warn!("circulant generators {generators:?} and order {n} share the factor {g}; graph is disconnected");
    }

    let mut graph = Graph::new(n)?;
    for &q in generators {
        for i in 0..n {
            graph.add_edge(i, (i + q) % n, 1.0)?;
        }
    }
    let graph = Arc::new(graph);
    let shifts = generators
        .iter()
        .map(|&q| {
            let matrix = DMatrix::from_fn(n, n, |i, j| {
                let offset = (i + n - j) % n;
                if i == j {
                    1.0
                } else if offset == q || offset == n - q {
                    -0.5
                } else {
                    0.0
                }
            });
            ShiftMatrix { matrix, graph: Arc::clone(&graph) }
        })
        .collect();
    let set = ShiftSet::new(shifts)?;
    Ok((graph, set))
}

/// Returns `(commutes, residual)` where `residual` is the largest pairwise
/// Frobenius norm of `S_l S_l' − S_l' S_l`.
pub fn check_commutative(shifts: &ShiftSet, tol: f64) -> (bool, f64) {
    let residual = shifts.commutativity_residual;
    (residual <= tol, residual)
}

/// Checks that `matrix` is symmetric within `tol` and vanishes (within `tol`) off the
/// diagonal and the edge set of `graph`.
pub fn validate_shift(matrix: &DMatrix<f64>, graph: &Graph, tol: f64) -> Result<bool> {
    let n = graph.order();
    if matrix.nrows() != n || matrix.ncols() != n {
        return Err(GsisError::DimensionMismatch { expected: n, actual: matrix.nrows().max(matrix.ncols()) });
    }
    if symmetry_residual(matrix) > tol {
        return Ok(false);
    }
    for i in 0..n {
        for j in 0..n {
            if i != j && !graph.has_edge(i, j) && matrix[(i, j)].abs() > tol {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p3() -> Arc<Graph> {
        Arc::new(Graph::path(3).unwrap())
    }

    #[test]
    fn empty_graph_laplacian_is_zero() {
        let g = Arc::new(Graph::new(4).unwrap());
        let l = build_standard_shift(&g, ShiftKind::Laplacian).unwrap();
        assert_eq!(l.matrix(), &DMatrix::zeros(4, 4));
    }

    #[test]
    fn path_laplacian() {
        let l = build_standard_shift(&p3(), ShiftKind::Laplacian).unwrap();
        let expected =
            DMatrix::from_row_slice(3, 3, &[1.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 1.0]);
        assert_eq!(l.matrix(), &expected);
    }

    #[test]
    fn cycle_normalized_laplacian_matches_direct_product() {
        let g = Arc::new(Graph::cycle(4).unwrap());
        let lsym = build_standard_shift(&g, ShiftKind::NormalizedLaplacian).unwrap();
        // oracle: D^{-1/2} (D - A) D^{-1/2} with explicit 4x4 matrices
        let a = g.adjacency_matrix();
        let d = DMatrix::from_diagonal_element(4, 4, 2.0);
        let d_inv_sqrt = DMatrix::from_diagonal_element(4, 4, 1.0 / 2f64.sqrt());
        let oracle = &d_inv_sqrt * (d - &a) * &d_inv_sqrt;
        assert_relative_eq!(lsym.matrix(), &oracle, epsilon = 1e-15);
        assert_relative_eq!(lsym.matrix(), &(DMatrix::identity(4, 4) - a / 2.0), epsilon = 1e-15);
    }

    #[test]
    fn isolated_vertex_rejected_for_normalized_laplacian() {
        let g = Arc::new(Graph::from_edges(3, [(0, 1, 1.0)]).unwrap());
        let err = build_standard_shift(&g, ShiftKind::NormalizedLaplacian).unwrap_err();
        assert!(matches!(err, GsisError::DegenerateGraph { vertex: 2 }));
    }

    #[test]
    fn graph_rejects_self_loops_and_bad_indices() {
        let mut g = Graph::new(3).unwrap();
        assert!(g.add_edge(1, 1, 1.0).is_err());
        assert!(g.add_edge(0, 3, 1.0).is_err());
        assert!(g.add_edge(0, 1, -1.0).is_err());
        assert!(Graph::new(0).is_err());
    }

    #[test]
    fn circulant_five_single_generator() {
        let (g, set) = build_circulant(5, &[1]).unwrap();
        assert_eq!(g.edge_count(), 5);
        let s = set.shift(0);
        for i in 0..5 {
            assert_eq!(s[(i, i)], 1.0);
            assert_eq!(s[(i, (i + 1) % 5)], -0.5);
            assert_eq!(s[(i, (i + 4) % 5)], -0.5);
            assert_eq!(s[(i, (i + 2) % 5)], 0.0);
        }
    }

    #[test]
    fn circulant_hundred_commutes() {
        let (_, set) = build_circulant(100, &[1, 3]).unwrap();
        assert_eq!(set.len(), 2);
        assert!(set.commutativity_residual() <= 1e-12);
    }

    #[test]
    fn circulant_six_products_commute_entrywise() {
        let (_, set) = build_circulant(6, &[1, 2]).unwrap();
        let (a, b) = (set.shift(0), set.shift(1));
        // explicit triple loop, independent of the nalgebra product
        for i in 0..6 {
            for j in 0..6 {
                let ab: f64 = (0..6).map(|k| a[(i, k)] * b[(k, j)]).sum();
                let ba: f64 = (0..6).map(|k| b[(i, k)] * a[(k, j)]).sum();
                assert_eq!(ab, ba);
            }
        }
    }

    #[test]
    fn circulant_rejects_large_generator() {
        assert!(matches!(build_circulant(6, &[3]), Err(GsisError::InvalidGenerator { q: 3, n: 6 })));
        assert!(build_circulant(6, &[2, 1]).is_err());
        // gcd(2, 6) = 2 only warns
        assert!(build_circulant(6, &[2]).is_ok());
    }

    #[test]
    fn commutativity_checks() {
        let l = build_standard_shift(&p3(), ShiftKind::Laplacian).unwrap();
        let single = ShiftSet::single(l);
        assert_eq!(check_commutative(&single, 1e-12), (true, 0.0));

        let k3 = Arc::new(Graph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap());
        let s1 = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let s2 = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 0.0, 0.0, 2.0, 0.0, 2.0, 0.0]);
        let oracle = commutator_norm(&s1, &s2);
        let set = ShiftSet::new(vec![
            ShiftMatrix::new(s1, Arc::clone(&k3)).unwrap(),
            ShiftMatrix::new(s2, k3).unwrap(),
        ])
        .unwrap();
        let (ok, residual) = check_commutative(&set, 1e-10);
        assert!(!ok);
        assert_eq!(residual, oracle);
        assert!(residual > 1.0);
    }

    #[test]
    fn shift_validation() {
        let g = p3();
        assert!(validate_shift(&DMatrix::identity(3, 3), &g, 1e-12).unwrap());
        assert!(validate_shift(&g.adjacency_matrix(), &g, 1e-12).unwrap());
        let mut bad = g.adjacency_matrix();
        bad[(0, 2)] = 0.3;
        bad[(2, 0)] = 0.3;
        assert!(!validate_shift(&bad, &g, 1e-12).unwrap());
        let mut asym = g.adjacency_matrix();
        asym[(0, 1)] = 2.0;
        assert!(!validate_shift(&asym, &g, 1e-12).unwrap());
        assert!(validate_shift(&DMatrix::identity(2, 2), &g, 1e-12).is_err());
    }

    #[test]
    fn circulant_rows_sum_to_zero() {
        for n in [5usize, 12, 33, 100] {
            let (_, set) = build_circulant(n, &[1, 2]).unwrap();
            for s in set.shifts() {
                for row in s.row_iter() {
                    assert_eq!(row.sum(), 0.0);
                }
            }
        }
    }
}
