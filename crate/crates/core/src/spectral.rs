//! Joint diagonalization of commuting symmetric shifts, the graph Fourier transform and
//! polynomial filters.
//!
//! Commuting symmetric shifts `S_1, …, S_L` share an orthonormal eigenbasis `U`. It is found
//! by eigendecomposing one random combination `T = Σ d_l S_l`: when `T` has simple eigenvalues
//! its eigenvectors diagonalize every `S_l`, and an unlucky `d` is simply redrawn.

use std::collections::{BTreeMap, HashMap};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{GsisError, Result};
use crate::graph::ShiftSet;
use crate::linalg::{random_unit_vector, seeded_rng, sorted_symmetric_eigen};
use crate::multi_index::MultiIndex;

/// Entries below this magnitude are skipped when fixing column signs.
const SIGN_THRESHOLD: f64 = 1e-8;
/// Joint-spectrum points closer than this fraction of the spectral diameter coincide.
const COINCIDENCE_FRACTION: f64 = 1e-8;

#[derive(Debug, Clone, Copy)]
pub struct DiagonalizeOptions {
    /// Relative residual allowed in `‖S_l − U Λ_l Uᵀ‖_F ≤ tol ‖S_l‖_F`.
    pub tol: f64,
    pub max_retries: usize,
    pub seed: u64,
}

impl Default for DiagonalizeOptions {
    fn default() -> Self {
        Self { tol: 1e-9, max_retries: 8, seed: 0 }
    }
}

/// `S_l = U Λ_l Uᵀ` for every shift of a commuting family.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralDecomposition {
    #[serde(skip)]
    u: DMatrix<f64>,
    /// `lambdas[(l, n)] = λ_l(n)`.
    #[serde(skip)]
    lambdas: DMatrix<f64>,
    assumption1_holds: bool,
    min_spectral_gap: f64,
    coincidence_tolerance: f64,
}

impl SpectralDecomposition {
    fn from_parts(u: DMatrix<f64>, lambdas: DMatrix<f64>) -> Self {
        let (diameter, min_gap) = joint_spectrum_extent(&lambdas);
        let coincidence_tolerance = COINCIDENCE_FRACTION * diameter;
        let n = u.ncols();
        let assumption1_holds = n <= 1 || (diameter > 0.0 && min_gap > coincidence_tolerance);
        Self { u, lambdas, assumption1_holds, min_spectral_gap: min_gap, coincidence_tolerance }
    }

    /// Builds a decomposition from a known orthogonal basis, reading each `λ_l(n)` off the
    /// Rayleigh quotient `u_nᵀ S_l u_n`. The basis is taken as given (no sign or order change).
    pub fn from_basis(shifts: &ShiftSet, u: DMatrix<f64>) -> Result<Self> {
        let n = shifts.order();
        if u.nrows() != n || u.ncols() != n {
            return Err(GsisError::DimensionMismatch { expected: n, actual: u.nrows() });
        }
        let lambdas = rayleigh_quotients(shifts.shifts(), &u);
        Ok(Self::from_parts(u, lambdas))
    }

    pub fn order(&self) -> usize {
        self.u.nrows()
    }

    pub fn shift_count(&self) -> usize {
        self.lambdas.nrows()
    }

    pub fn u(&self) -> &DMatrix<f64> {
        &self.u
    }

    /// The `n`-th Fourier basis vector `u_n`.
    pub fn basis_vector(&self, n: usize) -> DVector<f64> {
        self.u.column(n).into_owned()
    }

    /// `L × N` matrix of eigenvalues, `λ_l(n)` at `(l, n)`.
    pub fn lambdas(&self) -> &DMatrix<f64> {
        &self.lambdas
    }

    /// Eigenvalues of shift `l` as a vector over frequencies.
    pub fn eigenvalues(&self, l: usize) -> DVector<f64> {
        self.lambdas.row(l).transpose()
    }

    /// The joint spectrum point `λ(n) ∈ ℝ^L`.
    pub fn joint_point(&self, n: usize) -> DVector<f64> {
        self.lambdas.column(n).into_owned()
    }

    pub fn joint_spectrum(&self) -> Vec<DVector<f64>> {
        (0..self.order()).map(|n| self.joint_point(n)).collect()
    }

    /// True when the joint-spectrum points are pairwise distinct.
    pub fn assumption1_holds(&self) -> bool {
        self.assumption1_holds
    }

    pub fn min_spectral_gap(&self) -> f64 {
        self.min_spectral_gap
    }

    pub fn coincidence_tolerance(&self) -> f64 {
        self.coincidence_tolerance
    }

    /// Groups of frequencies whose joint-spectrum points coincide. Singletons under Assumption 1.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let n = self.order();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for a in 0..n {
            for b in a + 1..n {
                let dist = (self.lambdas.column(a) - self.lambdas.column(b)).norm();
                if dist <= self.coincidence_tolerance {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    if ra != rb {
                        parent[ra.max(rb)] = ra.min(rb);
                    }
                }
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..n {
            let root = find(&mut parent, i);
            groups.entry(root).or_default().push(i);
        }
        groups.into_values().collect()
    }

    /// `‖S_l − U Λ_l Uᵀ‖_F / max(‖S_l‖_F, 1e-300)` for each shift.
    pub fn relative_residuals(&self, shifts: &ShiftSet) -> Vec<f64> {
        shifts
            .shifts()
            .iter()
            .enumerate()
            .map(|(l, s)| {
                let recon = self.synthesize(&self.eigenvalues(l));
                (s - recon).norm() / s.norm().max(1e-300)
            })
            .collect()
    }

    /// `U diag(values) Uᵀ`.
    pub fn synthesize(&self, values: &DVector<f64>) -> DMatrix<f64> {
        let mut scaled = self.u.clone();
        for (mut col, &v) in scaled.column_iter_mut().zip(values.iter()) {
            col *= v;
        }
        scaled * self.u.transpose()
    }

    /// Diagonal of `Uᵀ M U`, after checking that the off-diagonal part is below
    /// `tol · max(1, ‖M‖_F)`.
    pub fn diagonal_of(&self, m: &DMatrix<f64>, tol: f64) -> Result<DVector<f64>> {
        let n = self.order();
        if m.nrows() != n || m.ncols() != n {
            return Err(GsisError::DimensionMismatch { expected: n, actual: m.nrows() });
        }
        let rotated = self.u.transpose() * m * &self.u;
        let diag = rotated.diagonal();
        let off = (&rotated - DMatrix::from_diagonal(&diag)).norm();
        if off > tol * m.norm().max(1.0) {
            return Err(GsisError::NotDiagonalized { residual: off });
        }
        Ok(diag)
    }

    /// Re-chooses the basis inside every repeated joint eigenspace so that the projections
    /// of `generators` onto that eigenspace occupy as few basis vectors as possible. The result
    /// still diagonalizes the same shifts; under Assumption 1 it equals `self` up to signs.
    pub fn adapted_to(&self, generators: &[DVector<f64>]) -> Self {
        let mut u = self.u.clone();
        for cluster in self.clusters().into_iter().filter(|c| c.len() > 1) {
            let uc = DMatrix::from_columns(
                &cluster.iter().map(|&n| self.u.column(n).into_owned()).collect::<Vec<_>>(),
            );
            let c = cluster.len();
            let rotation = if generators.is_empty() {
                DMatrix::identity(c, c)
            } else {
                let g = uc.transpose() * DMatrix::from_columns(generators);
                leading_left_singular_basis(&g)
            };
            let rotated = uc * rotation;
            for (k, &n) in cluster.iter().enumerate() {
                u.set_column(n, &rotated.column(k));
            }
        }
        normalize_signs(&mut u);
        let lambdas = DMatrix::from_fn(self.lambdas.nrows(), self.order(), |l, n| {
            // Points in a cluster coincide; keep the original values.
            self.lambdas[(l, n)]
        });
        Self::from_parts(u, lambdas)
    }
}

/// Orthonormal `c × c` basis whose leading columns are the left singular vectors of `g`
/// ordered by decreasing singular value; the remainder completes it.
fn leading_left_singular_basis(g: &DMatrix<f64>) -> DMatrix<f64> {
    let c = g.nrows();
    let svd = g.clone().svd(true, false);
    let left = svd.u.expect("left singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let smax = order.first().map_or(0.0, |&i| svd.singular_values[i]);
    let mut cols: Vec<DVector<f64>> = order
        .iter()
        .filter(|&&i| svd.singular_values[i] > 1e-12 * smax.max(1e-300))
        .map(|&i| left.column(i).into_owned())
        .collect();
    for k in 0..c {
        let mut v = DVector::zeros(c);
        v[k] = 1.0;
        for _ in 0..2 {
            for b in &cols {
                let p = b.dot(&v);
                v.axpy(-p, b, 1.0);
            }
        }
        let nv = v.norm();
        if nv > 1e-8 && cols.len() < c {
            cols.push(v / nv);
        }
    }
    DMatrix::from_columns(&cols)
}

fn rayleigh_quotients(shifts: &[DMatrix<f64>], u: &DMatrix<f64>) -> DMatrix<f64> {
    let n = u.ncols();
    let mut lambdas = DMatrix::zeros(shifts.len(), n);
    for (l, s) in shifts.iter().enumerate() {
        let su = s * u;
        for k in 0..n {
            lambdas[(l, k)] = u.column(k).dot(&su.column(k));
        }
    }
    lambdas
}

/// (max, min) pairwise Euclidean distance between joint-spectrum points.
fn joint_spectrum_extent(lambdas: &DMatrix<f64>) -> (f64, f64) {
    let n = lambdas.ncols();
    let mut diameter: f64 = 0.0;
    let mut min_gap = f64::INFINITY;
    for a in 0..n {
        for b in a + 1..n {
            let d = (lambdas.column(a) - lambdas.column(b)).norm();
            diameter = diameter.max(d);
            min_gap = min_gap.min(d);
        }
    }
    (diameter, min_gap)
}

/// Makes the first entry of magnitude above `SIGN_THRESHOLD` in each column positive.
fn normalize_signs(u: &mut DMatrix<f64>) {
    for mut col in u.column_iter_mut() {
        if let Some(v) = col.iter().find(|v| v.abs() > SIGN_THRESHOLD).copied() {
            if v < 0.0 {
                col.neg_mut();
            }
        }
    }
}

/// Column order by joint-spectrum point: ascending in `λ_1`, ties (within `eps`) broken by
/// `λ_2`, and so on.
fn joint_order(lambdas: &DMatrix<f64>, eps: f64) -> Vec<usize> {
    fn refine(idx: &mut [usize], lambdas: &DMatrix<f64>, l: usize, eps: f64) {
        if l >= lambdas.nrows() || idx.len() < 2 {
            return;
        }
        idx.sort_by(|&a, &b| lambdas[(l, a)].total_cmp(&lambdas[(l, b)]));
        let mut start = 0;
        for k in 1..=idx.len() {
            let split = k == idx.len() || lambdas[(l, idx[k])] - lambdas[(l, idx[k - 1])] > eps;
            if split {
                refine(&mut idx[start..k], lambdas, l + 1, eps);
                start = k;
            }
        }
    }
    let mut idx: Vec<usize> = (0..lambdas.ncols()).collect();
    refine(&mut idx, lambdas, 0, eps);
    idx
}

/// Finds an orthogonal `U` with `S_l = U Λ_l Uᵀ` for every shift.
///
/// Columns are sign-normalized and ordered by joint-spectrum point, so decompositions of an
/// Assumption-1 family agree across seeds. When the joint spectrum genuinely repeats the
/// result is still a valid diagonalization, with `assumption1_holds() == false`.
pub fn diagonalize_simultaneously(
    shifts: &ShiftSet,
    opts: &DiagonalizeOptions,
) -> Result<SpectralDecomposition> {
    let scale = shifts.shifts().iter().map(|s| s.norm()).fold(1.0, f64::max);
    let comm_tol = opts.tol * scale * scale;
    if shifts.commutativity_residual() > comm_tol {
        return Err(GsisError::NotCommutative {
            residual: shifts.commutativity_residual(),
            tol: comm_tol,
        });
    }

    let n = shifts.order();
    let l_count = shifts.len();
    let mut rng = seeded_rng(opts.seed);
    let mut worst = f64::INFINITY;
    let attempts = opts.max_retries + 1;
    for _ in 0..attempts {
        let d = if l_count == 1 {
            DVector::from_element(1, 1.0)
        } else {
            random_unit_vector(&mut rng, l_count)
        };
        let mut t = DMatrix::zeros(n, n);
        for (s, &w) in shifts.shifts().iter().zip(d.iter()) {
            t += s * w;
        }
        let (_, mut u) = sorted_symmetric_eigen(&t);
        normalize_signs(&mut u);
        let lambdas = rayleigh_quotients(shifts.shifts(), &u);

        let candidate = SpectralDecomposition::from_parts(u, lambdas);
        let residual = candidate
            .relative_residuals(shifts)
            .into_iter()
            .zip(shifts.shifts())
            .map(|(r, s)| if s.norm() == 0.0 { 0.0 } else { r })
            .fold(0.0, f64::max);
        if residual <= opts.tol {
            let order = joint_order(&candidate.lambdas, candidate.coincidence_tolerance);
            let u = DMatrix::from_fn(n, n, |r, c| candidate.u[(r, order[c])]);
            let lambdas = DMatrix::from_fn(l_count, n, |l, c| candidate.lambdas[(l, order[c])]);
            return Ok(SpectralDecomposition::from_parts(u, lambdas));
        }
        worst = worst.min(residual);
    }
    Err(GsisError::DiagonalizationFailed { attempts, worst_residual: worst })
}

/// Graph Fourier transform `x̂ = Uᵀ x`.
pub fn gft(decomp: &SpectralDecomposition, x: &DVector<f64>) -> Result<DVector<f64>> {
    check_len(decomp.order(), x.len())?;
    Ok(decomp.u.tr_mul(x))
}

/// Inverse transform `x = U x̂`.
pub fn igft(decomp: &SpectralDecomposition, xhat: &DVector<f64>) -> Result<DVector<f64>> {
    check_len(decomp.order(), xhat.len())?;
    Ok(&decomp.u * xhat)
}

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(GsisError::DimensionMismatch { expected, actual });
    }
    Ok(())
}

/// `H = Σ_α h_α S₁^{α₁} ⋯ S_L^{α_L}` with finitely many nonzero coefficients.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PolynomialFilter {
    coeffs: BTreeMap<MultiIndex, f64>,
}

impl PolynomialFilter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `h` to the coefficient of `S^alpha`.
    pub fn term(mut self, alpha: MultiIndex, h: f64) -> Self {
        *self.coeffs.entry(alpha).or_insert(0.0) += h;
        self
    }

    pub fn coefficients(&self) -> &BTreeMap<MultiIndex, f64> {
        &self.coeffs
    }

    fn check_arity(&self, l_count: usize) -> Result<()> {
        match self.coeffs.keys().find(|a| a.len() != l_count) {
            Some(a) => Err(GsisError::InvalidParameter(format!(
                "multi-index {a:?} has length {}, expected {l_count}",
                a.len()
            ))),
            None => Ok(()),
        }
    }

    /// Spectral response `h(λ(n))` at every frequency.
    pub fn frequency_response(&self, decomp: &SpectralDecomposition) -> Result<DVector<f64>> {
        self.check_arity(decomp.shift_count())?;
        Ok(DVector::from_fn(decomp.order(), |n, _| {
            self.coeffs
                .iter()
                .map(|(alpha, &h)| {
                    h * alpha
                        .iter()
                        .enumerate()
                        .map(|(l, &p)| decomp.lambdas[(l, n)].powi(p as i32))
                        .product::<f64>()
                })
                .sum()
        }))
    }
}

/// Applies a polynomial filter to `x`. With a decomposition the filter is evaluated in the
/// Fourier domain; otherwise monomials `S^α x` are built by repeated shifting (memoized).
pub fn apply_polynomial_filter(
    shifts: &ShiftSet,
    filter: &PolynomialFilter,
    x: &DVector<f64>,
    decomp: Option<&SpectralDecomposition>,
) -> Result<DVector<f64>> {
    check_len(shifts.order(), x.len())?;
    filter.check_arity(shifts.len())?;
    if let Some(decomp) = decomp {
        check_len(decomp.order(), x.len())?;
        let response = filter.frequency_response(decomp)?;
        let xhat = decomp.u.tr_mul(x);
        return Ok(&decomp.u * xhat.component_mul(&response));
    }

    fn monomial(
        alpha: &[usize],
        shifts: &ShiftSet,
        x: &DVector<f64>,
        memo: &mut HashMap<MultiIndex, DVector<f64>>,
    ) -> DVector<f64> {
        if let Some(v) = memo.get(alpha) {
            return v.clone();
        }
        let v = match alpha.iter().position(|&p| p > 0) {
            None => x.clone(),
            Some(l) => {
                let mut lower = alpha.to_vec();
                lower[l] -= 1;
                shifts.shift(l) * monomial(&lower, shifts, x, memo)
            }
        };
        memo.insert(alpha.to_vec(), v.clone());
        v
    }

    let mut memo = HashMap::new();
    let mut out = DVector::zeros(x.len());
    for (alpha, &h) in filter.coefficients() {
        out.axpy(h, &monomial(alpha, shifts, x, &mut memo), 1.0);
    }
    Ok(out)
}

/// Outcome of the commutation test for a candidate filter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FilterCommutation {
    pub holds: bool,
    /// `max_l ‖H S_l − S_l H‖_F`.
    pub residual: f64,
    /// Set when the joint spectrum repeats, in which case commuting with the shifts does not
    /// imply being a polynomial in them.
    pub assumption1_caveat: bool,
}

/// Polynomial-filter test by commutation: under distinct joint spectrum a filter is a
/// polynomial in the shifts iff it commutes with each of them.
pub fn is_polynomial_filter(
    h: &DMatrix<f64>,
    shifts: &ShiftSet,
    decomp: &SpectralDecomposition,
    tol: f64,
) -> Result<FilterCommutation> {
    let n = shifts.order();
    if h.nrows() != n || h.ncols() != n {
        return Err(GsisError::DimensionMismatch { expected: n, actual: h.nrows() });
    }
    let residual = shifts
        .shifts()
        .iter()
        .map(|s| (h * s - s * h).norm())
        .fold(0.0, f64::max);
    Ok(FilterCommutation {
        holds: residual <= tol,
        residual,
        assumption1_caveat: !decomp.assumption1_holds(),
    })
}

/// Rank-one spectral projector `u_n u_nᵀ`.
pub fn lagrange_projector(decomp: &SpectralDecomposition, n: usize) -> Result<DMatrix<f64>> {
    if n >= decomp.order() {
        return Err(GsisError::IndexOutOfRange { index: n, size: decomp.order() });
    }
    let u = decomp.u.column(n);
    Ok(&u * u.transpose())
}

/// Univariate Lagrange interpolant in `T = Σ d_l S_l`: `q(t) = Π_{m≠n} (t − t_m)/(t_n − t_m)`
/// over the nodes `t_m = dᵀλ(m)`. Evaluated at `T` on the full frequency set it reproduces the
/// projector `u_n u_nᵀ` whenever the joint spectrum is distinct.
#[derive(Debug, Clone)]
pub struct LagrangeInterpolant {
    pub direction: DVector<f64>,
    pub nodes: Vec<f64>,
    pub target: usize,
}

impl LagrangeInterpolant {
    /// Interpolant on the frequencies `support`, picking `d` at random (seeded) until the
    /// projected nodes `dᵀλ(m)` are pairwise distinct.
    pub fn new(
        decomp: &SpectralDecomposition,
        support: &[usize],
        target: usize,
        seed: u64,
    ) -> Result<Self> {
        if !support.contains(&target) {
            return Err(GsisError::InvalidParameter(format!(
                "target frequency {target} is not in the interpolation support"
            )));
        }
        let direction = distinct_projection(decomp, support, seed)?;
        let nodes = support
            .iter()
            .map(|&m| direction.dot(&decomp.joint_point(m)))
            .collect();
        let target = support.iter().position(|&m| m == target).expect("checked above");
        Ok(Self { direction, nodes, target })
    }

    pub fn eval(&self, t: f64) -> f64 {
        let tn = self.nodes[self.target];
        self.nodes
            .iter()
            .enumerate()
            .filter(|&(m, _)| m != self.target)
            .map(|(_, &tm)| (t - tm) / (tn - tm))
            .product()
    }

    /// `q(T) x`, computed as a product of shifted copies of `T`.
    pub fn apply(&self, shifts: &ShiftSet, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(shifts.order(), x.len())?;
        let tn = self.nodes[self.target];
        let mut v = x.clone();
        for (m, &tm) in self.nodes.iter().enumerate() {
            if m == self.target {
                continue;
            }
            let mut tv = DVector::zeros(v.len());
            for (s, &w) in shifts.shifts().iter().zip(self.direction.iter()) {
                tv += s * &v * w;
            }
            v = (tv - &v * tm) / (tn - tm);
        }
        Ok(v)
    }
}

/// Random unit `d` (seeded, at most 32 draws) with `dᵀλ(n)` pairwise distinct over `support`.
pub(crate) fn distinct_projection(
    decomp: &SpectralDecomposition,
    support: &[usize],
    seed: u64,
) -> Result<DVector<f64>> {
    // Restricted points must be distinct before any projection can separate them.
    let eps = decomp.coincidence_tolerance.max(1e-300);
    for (a, &na) in support.iter().enumerate() {
        for &nb in &support[a + 1..] {
            if (decomp.joint_point(na) - decomp.joint_point(nb)).norm() <= eps {
                return Err(GsisError::RepeatedSpectrum { first: na, second: nb });
            }
        }
    }
    let l_count = decomp.shift_count();
    let mut rng = seeded_rng(seed);
    for _ in 0..32 {
        let d = if l_count == 1 {
            DVector::from_element(1, 1.0)
        } else {
            random_unit_vector(&mut rng, l_count)
        };
        let mut projected: Vec<f64> =
            support.iter().map(|&n| d.dot(&decomp.joint_point(n))).collect();
        projected.sort_by(f64::total_cmp);
        let separated = projected.windows(2).all(|w| w[1] - w[0] > eps);
        if separated {
            return Ok(d);
        }
    }
    Err(GsisError::InvalidParameter(
        "could not find a shift combination separating the joint spectrum after 32 draws".into(),
    ))
}
