#![allow(dead_code)]

use std::sync::Arc;

use gsis_core::graph::build_standard_shift;
use gsis_core::spectral::diagonalize_simultaneously;
use gsis_core::{DiagonalizeOptions, Graph, ShiftKind, ShiftSet, SpectralDecomposition};
use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random spanning tree plus extra edges with probability `p`; weights in `[0.5, 2]`.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, p: f64) -> Graph {
    let mut g = Graph::new(n).unwrap();
    for v in 1..n {
        let u = rng.random_range(0..v);
        g.add_edge(u, v, rng.random_range(0.5..2.0)).unwrap();
    }
    for i in 0..n {
        for j in i + 1..n {
            if !g.has_edge(i, j) && rng.random_bool(p) {
                g.add_edge(i, j, rng.random_range(0.5..2.0)).unwrap();
            }
        }
    }
    g
}

pub struct Instance {
    pub graph: Arc<Graph>,
    pub shifts: ShiftSet,
    pub decomp: Arc<SpectralDecomposition>,
}

pub fn laplacian_instance(graph: Graph) -> Instance {
    let graph = Arc::new(graph);
    let shifts = ShiftSet::single(build_standard_shift(&graph, ShiftKind::Laplacian).unwrap());
    let decomp = Arc::new(diagonalize_simultaneously(&shifts, &DiagonalizeOptions::default()).unwrap());
    Instance { graph, shifts, decomp }
}

/// Random weighted graph whose Laplacian has a distinct spectrum.
pub fn distinct_spectrum_instance<R: Rng>(rng: &mut R, n: usize) -> Instance {
    loop {
        let inst = laplacian_instance(random_graph(rng, n, 0.35));
        if inst.decomp.assumption1_holds() {
            return inst;
        }
    }
}

/// `k` distinct indices out of `0..n`, sorted.
pub fn random_subset<R: Rng>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    let mut v = sample(rng, n, k).into_vec();
    v.sort_unstable();
    v
}

/// Random signal supported on `support` vertices, entries `±[0.5, 1.5]`.
pub fn sparse_signal<R: Rng>(rng: &mut R, n: usize, support: usize) -> DVector<f64> {
    let mut x = DVector::zeros(n);
    for i in random_subset(rng, n, support) {
        let mag = rng.random_range(0.5..1.5);
        x[i] = if rng.random_bool(0.5) { mag } else { -mag };
    }
    x
}

/// `U c` with `c` supported on `omega`.
pub fn spectral_signal<R: Rng>(rng: &mut R, u: &DMatrix<f64>, omega: &[usize]) -> DVector<f64> {
    let mut c = DVector::zeros(u.ncols());
    for &k in omega {
        let mag = rng.random_range(0.5..1.5);
        c[k] = if rng.random_bool(0.5) { mag } else { -mag };
    }
    u * c
}

pub fn gaussian_vector<R: Rng>(rng: &mut R, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal))
}

pub fn delta(n: usize, i: usize) -> DVector<f64> {
    let mut d = DVector::zeros(n);
    d[i] = 1.0;
    d
}

/// Numerical rank by SVD, `σ > tol · σ_max · max(dims)`.
pub fn rank(m: &DMatrix<f64>, tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let s = m.clone().svd(false, false).singular_values;
    let top = s.max();
    s.iter().filter(|&&v| v > tol * top * m.nrows().max(m.ncols()) as f64).count()
}

/// Orthonormal basis of `null(A)` from the full SVD.
pub fn null_space(a: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let n = a.ncols();
    let padded = if a.nrows() < n {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.unwrap();
    let top = svd.singular_values.max().max(1e-300);
    let cols: Vec<DVector<f64>> = (0..vt.nrows())
        .filter(|&r| svd.singular_values[r] <= tol * top * n as f64)
        .map(|r| vt.row(r).transpose())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}
