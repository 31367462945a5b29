//! Bandlimited and shift-invariant spaces.
//!
//! Every shift-invariant space is stored canonically as a frequency set `Ω` together with the
//! matching columns `U_Ω` of a joint eigenbasis. When the joint spectrum repeats, the basis
//! inside each repeated eigenspace is first rotated to fit the generators (see
//! [`SpectralDecomposition::adapted_to`]), which keeps `dim H = #Ω` true.

use std::collections::BTreeSet;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{GsisError, Result};
use crate::graph::ShiftSet;
use crate::krylov::{DegeneratePolicy, KrylovChain};
use crate::linalg::{numerical_rank, orthonormal_columns, singular_values};
use crate::multi_index::graded_lex;
use crate::spectral::{check_len, distinct_projection, gft, SpectralDecomposition};

/// Default relative threshold for spectral support detection.
pub const SUPPORT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Bandlimited,
    GsisGenerators { count: usize },
    Pgsis,
}

#[derive(Debug, Clone)]
pub struct SignalSpace {
    omega: Vec<usize>,
    basis: DMatrix<f64>,
    decomp: Arc<SpectralDecomposition>,
    provenance: Provenance,
}

impl SignalSpace {
    fn from_omega(
        decomp: Arc<SpectralDecomposition>,
        omega: Vec<usize>,
        provenance: Provenance,
    ) -> Self {
        let n = decomp.order();
        let basis = if omega.is_empty() {
            DMatrix::zeros(n, 0)
        } else {
            DMatrix::from_columns(&omega.iter().map(|&k| decomp.basis_vector(k)).collect::<Vec<_>>())
        };
        Self { omega, basis, decomp, provenance }
    }

    pub fn dim(&self) -> usize {
        self.omega.len()
    }

    pub fn omega(&self) -> &[usize] {
        &self.omega
    }

    /// `U_Ω`, with orthonormal columns.
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn decomposition(&self) -> &Arc<SpectralDecomposition> {
        &self.decomp
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Orthogonal projection `U_Ω U_Ωᵀ x`.
    pub fn project(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(self.decomp.order(), x.len())?;
        Ok(&self.basis * self.basis.tr_mul(x))
    }

    pub fn projector(&self) -> DMatrix<f64> {
        &self.basis * self.basis.transpose()
    }

    /// `x ∈ B_Ω` iff the Fourier coefficients off `Ω` have norm at most `tol ‖x‖₂`.
    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> Result<bool> {
        let xhat = gft(&self.decomp, x)?;
        let inside: BTreeSet<usize> = self.omega.iter().copied().collect();
        let off: f64 = xhat
            .iter()
            .enumerate()
            .filter(|(k, _)| !inside.contains(k))
            .map(|(_, v)| v * v)
            .sum::<f64>()
            .sqrt();
        Ok(off <= tol * x.norm())
    }

    pub fn is_shift_invariant(&self, shifts: &ShiftSet, tol: f64) -> bool {
        is_shift_invariant(&self.basis, shifts, tol)
    }
}

/// Nonzero generators on a common graph.
#[derive(Debug, Clone)]
pub struct GeneratorFamily {
    phis: Vec<DVector<f64>>,
}

impl GeneratorFamily {
    pub fn new(phis: Vec<DVector<f64>>) -> Result<Self> {
        let first = phis.first().ok_or(GsisError::Empty("generator family"))?;
        let n = first.len();
        for phi in &phis {
            check_len(n, phi.len())?;
            if phi.iter().all(|&v| v == 0.0) {
                return Err(GsisError::ZeroSignal);
            }
        }
        Ok(Self { phis })
    }

    pub fn single(phi: DVector<f64>) -> Result<Self> {
        Self::new(vec![phi])
    }

    /// Delta signals at the given vertices.
    pub fn deltas(n: usize, vertices: &[usize]) -> Result<Self> {
        let phis = vertices
            .iter()
            .map(|&v| {
                if v >= n {
                    return Err(GsisError::IndexOutOfRange { index: v, size: n });
                }
                let mut d = DVector::zeros(n);
                d[v] = 1.0;
                Ok(d)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(phis)
    }

    pub fn generators(&self) -> &[DVector<f64>] {
        &self.phis
    }

    pub fn len(&self) -> usize {
        self.phis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phis.is_empty()
    }
}

/// `B_Ω = {x : supp x̂ ⊂ Ω}`.
pub fn bandlimited_space(
    decomp: &Arc<SpectralDecomposition>,
    omega: &[usize],
) -> Result<SignalSpace> {
    let n = decomp.order();
    let mut set = BTreeSet::new();
    for &k in omega {
        if k >= n {
            return Err(GsisError::IndexOutOfRange { index: k, size: n });
        }
        set.insert(k);
    }
    Ok(SignalSpace::from_omega(Arc::clone(decomp), set.into_iter().collect(), Provenance::Bandlimited))
}

/// `H(Φ)` as the bandlimited space on `Ω = ∪_φ supp φ̂`, where `n ∈ supp φ̂` when
/// `|φ̂(n)| > support_tol ‖φ̂‖₂`.
pub fn gsis_from_generators(
    decomp: &Arc<SpectralDecomposition>,
    family: &GeneratorFamily,
    support_tol: f64,
) -> Result<SignalSpace> {
    let n = decomp.order();
    check_len(n, family.phis[0].len())?;
    let decomp = if decomp.assumption1_holds() {
        Arc::clone(decomp)
    } else {
        Arc::new(decomp.adapted_to(family.generators()))
    };
    let mut omega = BTreeSet::new();
    for phi in family.generators() {
        let hat = gft(&decomp, phi)?;
        let cutoff = support_tol * hat.norm();
        omega.extend(hat.iter().enumerate().filter(|(_, v)| v.abs() > cutoff).map(|(k, _)| k));
    }
    let provenance = if family.len() == 1 {
        Provenance::Pgsis
    } else {
        Provenance::GsisGenerators { count: family.len() }
    };
    Ok(SignalSpace::from_omega(decomp, omega.into_iter().collect(), provenance))
}

/// Orthonormal basis of a Krylov space together with the dimensions of every level.
#[derive(Debug, Clone)]
pub struct KrylovBasis {
    pub basis: DMatrix<f64>,
    /// `dims[n] = dim H_n(Φ)` for `n = 0..=level`.
    pub dims: Vec<usize>,
}

/// `H_n(Φ) = span{S^α φ : |α| ≤ n, φ ∈ Φ}`, orthonormal under the standard inner product or,
/// when `sampler` is given, under `⟨x, y⟩_A = (Ax)ᵀ(Ay)`.
pub fn krylov_subspace(
    shifts: &ShiftSet,
    family: &GeneratorFamily,
    level: usize,
    sampler: Option<&DMatrix<f64>>,
) -> Result<KrylovBasis> {
    let mut chain =
        KrylovChain::new(shifts.shifts(), family.generators(), sampler, DegeneratePolicy::Drop)?;
    while chain.level() < level {
        chain.extend()?;
    }
    Ok(KrylovBasis { basis: chain.basis_matrix(), dims: chain.dims().to_vec() })
}

/// `dim H(Φ)`, read off the saturated Krylov chain.
pub fn gsis_dimension(shifts: &ShiftSet, family: &GeneratorFamily) -> Result<usize> {
    let mut chain =
        KrylovChain::new(shifts.shifts(), family.generators(), None, DegeneratePolicy::Drop)?;
    chain.run_to(shifts.order().saturating_sub(1))?;
    Ok(chain.dim())
}

/// `[S^α φ]` over `α ∈ Σ_max_degree` (graded lexicographic order) and `φ ∈ Φ`.
pub fn monomial_frame(
    shifts: &ShiftSet,
    generators: &[DVector<f64>],
    max_degree: usize,
) -> DMatrix<f64> {
    let alphas = graded_lex(shifts.len(), max_degree);
    let mut cols = Vec::with_capacity(alphas.len() * generators.len());
    for phi in generators {
        let mut cache: std::collections::HashMap<Vec<usize>, DVector<f64>> =
            std::collections::HashMap::new();
        for alpha in &alphas {
            let v = match alpha.iter().position(|&p| p > 0) {
                None => phi.clone(),
                Some(l) => {
                    let mut lower = alpha.clone();
                    lower[l] -= 1;
                    shifts.shift(l) * &cache[&lower]
                }
            };
            cache.insert(alpha.clone(), v.clone());
            cols.push(v);
        }
    }
    DMatrix::from_columns(&cols)
}

/// Generator and shift for `B_Ω = span{T^m φ₀ : 0 ≤ m < #Ω}`.
#[derive(Debug, Clone)]
pub struct CanonicalGenerator {
    /// `φ₀ = F⁻¹ χ_Ω`.
    pub phi0: DVector<f64>,
    /// `T = Σ d_l S_l`.
    pub t: DMatrix<f64>,
    pub direction: DVector<f64>,
    /// `λ_T(n) = dᵀλ(n)` for every frequency.
    pub lambda_t: DVector<f64>,
    pub omega: Vec<usize>,
    pub krylov_rank: usize,
}

impl CanonicalGenerator {
    /// The weighted Vandermonde matrix `[φ̂₀(n) λ_T(n)^m]_{n∈Ω, 0≤m<#Ω}`.
    pub fn weighted_vandermonde(&self, decomp: &SpectralDecomposition) -> Result<DMatrix<f64>> {
        let hat = gft(decomp, &self.phi0)?;
        Ok(weighted_vandermonde(&hat, &self.lambda_t, &self.omega))
    }

    /// Coefficients `c` with `x = Σ_m c_m T^m φ₀`, for `x ∈ B_Ω`.
    pub fn coefficients_of(
        &self,
        decomp: &SpectralDecomposition,
        x: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        let v = self.weighted_vandermonde(decomp)?;
        let xhat = gft(decomp, x)?;
        let rhs = DVector::from_iterator(self.omega.len(), self.omega.iter().map(|&k| xhat[k]));
        v.lu().solve(&rhs).ok_or_else(|| {
            GsisError::Precondition("weighted Vandermonde matrix is singular".into())
        })
    }

    /// `Σ_m c_m T^m φ₀`.
    pub fn synthesize(&self, coeffs: &DVector<f64>) -> DVector<f64> {
        let mut acc = DVector::zeros(self.phi0.len());
        let mut power = self.phi0.clone();
        for (m, &c) in coeffs.iter().enumerate() {
            if m > 0 {
                power = &self.t * power;
            }
            acc.axpy(c, &power, 1.0);
        }
        acc
    }
}

fn weighted_vandermonde(hat: &DVector<f64>, lambda_t: &DVector<f64>, omega: &[usize]) -> DMatrix<f64> {
    let size = omega.len();
    DMatrix::from_fn(size, size, |r, m| hat[omega[r]] * lambda_t[omega[r]].powi(m as i32))
}

/// Builds `φ₀ = F⁻¹ χ_Ω` and `T = Σ d_l S_l` with `dᵀλ(n)` distinct on `Ω` (seeded draws),
/// then confirms that `{T^m φ₀}` spans `B_Ω`.
pub fn canonical_generator(
    decomp: &SpectralDecomposition,
    omega: &[usize],
    seed: u64,
) -> Result<CanonicalGenerator> {
    let n = decomp.order();
    let omega: Vec<usize> = omega.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    if omega.is_empty() {
        return Err(GsisError::Empty("frequency set"));
    }
    if let Some(&k) = omega.iter().find(|&&k| k >= n) {
        return Err(GsisError::IndexOutOfRange { index: k, size: n });
    }
    let direction = distinct_projection(decomp, &omega, seed)?;
    let lambda_t = decomp.lambdas().tr_mul(&direction);
    let t = decomp.synthesize(&lambda_t);
    let mut chi = DVector::zeros(n);
    for &k in &omega {
        chi[k] = 1.0;
    }
    let phi0 = decomp.u() * chi;

    let shifts = [t.clone()];
    let mut chain = KrylovChain::new(&shifts, &[phi0.clone()], None, DegeneratePolicy::Drop)?;
    chain.run_to(omega.len() - 1)?;
    let krylov_rank = chain.dim();
    if krylov_rank != omega.len() {
        return Err(GsisError::Precondition(format!(
            "Krylov rank {krylov_rank} of the canonical generator is below #Ω = {}",
            omega.len()
        )));
    }
    Ok(CanonicalGenerator { phi0, t, direction, lambda_t, omega, krylov_rank })
}

/// Extreme singular values of a bounds matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RieszBounds {
    pub sigma_min: f64,
    pub sigma_max: f64,
}

/// Lower/upper Riesz bounds of `{T^m φ₀}_{0≤m<#Ω}`: the extreme singular values of
/// `[φ̂₀(n) λ_T(n)^m]_{n∈Ω, 0≤m<#Ω}`.
pub fn riesz_bounds(
    decomp: &SpectralDecomposition,
    t: &DMatrix<f64>,
    phi0: &DVector<f64>,
    omega: &[usize],
) -> Result<RieszBounds> {
    let lambda_t = decomp.diagonal_of(t, 1e-9)?;
    let hat = gft(decomp, phi0)?;
    if omega.is_empty() {
        return Err(GsisError::Empty("frequency set"));
    }
    if let Some(&k) = omega.iter().find(|&&k| k >= decomp.order()) {
        return Err(GsisError::IndexOutOfRange { index: k, size: decomp.order() });
    }
    let s = singular_values(&weighted_vandermonde(&hat, &lambda_t, omega));
    Ok(RieszBounds { sigma_min: *s.last().expect("nonempty"), sigma_max: s[0] })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameBounds {
    /// Smallest nonzero singular value `σ⁺_min`.
    pub sigma_min_plus: f64,
    pub sigma_max: f64,
    pub rank: usize,
}

/// `F̂_{M,φ₀} = [λ(n)^α φ̂₀(n)]_{n, α∈Σ_{M−1}}` with columns in graded lexicographic order.
pub fn frame_matrix_hat(
    decomp: &SpectralDecomposition,
    phi0: &DVector<f64>,
    m: usize,
) -> Result<DMatrix<f64>> {
    if m == 0 {
        return Err(GsisError::InvalidParameter("frame level M must be at least 1".into()));
    }
    let hat = gft(decomp, phi0)?;
    let alphas = graded_lex(decomp.shift_count(), m - 1);
    let lambdas = decomp.lambdas();
    Ok(DMatrix::from_fn(decomp.order(), alphas.len(), |n, c| {
        let monomial: f64 =
            alphas[c].iter().enumerate().map(|(l, &p)| lambdas[(l, n)].powi(p as i32)).product();
        monomial * hat[n]
    }))
}

/// Frame bounds of `{S^α φ₀ : α ∈ Σ_{M−1}}` on the space it spans.
pub fn frame_bounds(
    decomp: &SpectralDecomposition,
    phi0: &DVector<f64>,
    m: usize,
) -> Result<FrameBounds> {
    let f = frame_matrix_hat(decomp, phi0, m)?;
    let s = singular_values(&f);
    let sigma_max = s.first().copied().unwrap_or(0.0);
    let rank = numerical_rank(&f, 1e-12);
    let sigma_min_plus = if rank == 0 { 0.0 } else { s[rank - 1] };
    Ok(FrameBounds { sigma_min_plus, sigma_max, rank })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UniformNormMode {
    /// Exhaustive search over vertex subsets (order at most 12).
    ExactBruteforce,
    /// `‖U‖_∞ = max |u_n(i)|`, an upper bound on `‖U‖*_∞`.
    InfinityBound,
}

/// Largest order accepted by [`UniformNormMode::ExactBruteforce`].
pub const EXACT_NORM_LIMIT: usize = 12;

/// `‖U‖*_∞ = sup {(#W #Ω)^{-1/2} : Σ_{i∈W, n∈Ω} |u_n(i)|² ≥ 1}`.
///
/// The exact mode enumerates every vertex subset `W`; for a fixed `W` the best `Ω` of each
/// size takes the frequencies with the largest energies `Σ_{i∈W} u_n(i)²`, so the search over
/// `Ω` collapses to a sort.
pub fn uniform_norm_star(u: &DMatrix<f64>, mode: UniformNormMode) -> Result<f64> {
    let n = u.nrows();
    match mode {
        UniformNormMode::InfinityBound => Ok(u.iter().fold(0.0, |m, v| m.max(v.abs()))),
        UniformNormMode::ExactBruteforce => {
            if n > EXACT_NORM_LIMIT {
                return Err(GsisError::SizeLimit {
                    what: "exact uniform norm",
                    limit: EXACT_NORM_LIMIT,
                    actual: n,
                });
            }
            let squared = u.map(|v| v * v);
            let mut best_product = usize::MAX;
            let mut energies = vec![0.0; u.ncols()];
            for mask in 1u32..(1u32 << n) {
                let w_size = mask.count_ones() as usize;
                if w_size >= best_product {
                    continue;
                }
                for (k, e) in energies.iter_mut().enumerate() {
                    *e = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| squared[(i, k)]).sum();
                }
                energies.sort_by(|a, b| b.total_cmp(a));
                let mut acc = 0.0;
                for (b, e) in energies.iter().enumerate() {
                    acc += e;
                    let product = w_size * (b + 1);
                    if product >= best_product {
                        break;
                    }
                    if acc >= 1.0 - 1e-10 {
                        best_product = product;
                        break;
                    }
                }
            }
            Ok((best_product as f64).powf(-0.5))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UncertaintyReport {
    /// `#W`, the vertex support of `φ₀`.
    pub support_size: usize,
    /// `dim H(φ₀)`.
    pub space_dim: usize,
    /// `(‖U‖*_∞)^{-2}` in exact mode, `‖U‖_∞^{-2}` otherwise.
    pub lower_bound: f64,
    pub mode: UniformNormMode,
    pub holds: bool,
}

/// Checks `#W · dim H(φ₀) ≥ (‖U‖*_∞)^{-2}`, with the exact norm for orders up to 12 and the
/// weaker `‖U‖_∞` bound beyond that.
pub fn uncertainty_check(
    shifts: &ShiftSet,
    decomp: &Arc<SpectralDecomposition>,
    phi0: &DVector<f64>,
    support_tol: f64,
) -> Result<UncertaintyReport> {
    check_len(decomp.order(), phi0.len())?;
    let peak = phi0.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    if peak == 0.0 {
        return Err(GsisError::ZeroSignal);
    }
    let support_size = phi0.iter().filter(|v| v.abs() > support_tol * peak).count();
    let family = GeneratorFamily::single(phi0.clone())?;
    let space_dim = gsis_dimension(shifts, &family)?;
    let space = gsis_from_generators(decomp, &family, support_tol)?;
    let mode = if decomp.order() <= EXACT_NORM_LIMIT {
        UniformNormMode::ExactBruteforce
    } else {
        UniformNormMode::InfinityBound
    };
    let norm = uniform_norm_star(space.decomposition().u(), mode)?;
    let lower_bound = norm.powi(-2);
    let holds = (support_size * space_dim) as f64 >= lower_bound - 1e-9;
    Ok(UncertaintyReport { support_size, space_dim, lower_bound, mode, holds })
}

/// True when `S_l b` stays in `span(basis)` (projection residual `≤ tol ‖b‖₂`) for every
/// basis column `b` and every shift.
pub fn is_shift_invariant(basis: &DMatrix<f64>, shifts: &ShiftSet, tol: f64) -> bool {
    let q = orthonormal_columns(basis, 1e-12);
    basis.column_iter().all(|b| {
        let b = b.into_owned();
        shifts.shifts().iter().all(|s| {
            let sb = s * &b;
            let residual = &sb - &q * q.tr_mul(&sb);
            residual.norm() <= tol * b.norm().max(f64::MIN_POSITIVE)
        })
    })
}
