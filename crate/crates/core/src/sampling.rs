//! Sampling schemes, injectivity tests and reconstruction.
//!
//! Two reconstructors are provided: [`reconstruct_direct`] solves the Fourier-domain normal
//! equations on a bandlimited space, and [`reconstruct_krylov`] grows an `A`-orthonormal basis
//! of `H_n(Φ)` level by level, updating the estimate and the residual as it goes.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;

use crate::error::{GsisError, Result};
use crate::graph::ShiftSet;
use crate::krylov::{DegeneratePolicy, KrylovChain};
use crate::linalg::{numerical_rank, seeded_rng, sorted_symmetric_eigen};
use crate::spaces::GeneratorFamily;
use crate::spectral::{check_len, SpectralDecomposition};

/// Gram matrices with a larger condition number are treated as singular.
pub const CONDITION_LIMIT: f64 = 1e12;
/// Default relative rank threshold for injectivity tests.
pub const RANK_TOL: f64 = 1e-10;
/// Residuals below this multiple of `ε‖y‖₂` count as exact fits.
const ROUNDOFF_FLOOR: f64 = 64.0 * f64::EPSILON;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SchemeProvenance {
    Subset { vertices: Vec<usize> },
    Dynamic { i0: usize, snapshots: usize },
    Custom,
}

/// A linear sampling map `y = A x`.
#[derive(Debug, Clone)]
pub struct SamplingScheme {
    a: DMatrix<f64>,
    provenance: SchemeProvenance,
}

impl SamplingScheme {
    pub fn custom(a: DMatrix<f64>) -> Self {
        Self { a, provenance: SchemeProvenance::Custom }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn provenance(&self) -> &SchemeProvenance {
        &self.provenance
    }

    /// Number of samples `M`.
    pub fn rows(&self) -> usize {
        self.a.nrows()
    }

    /// Graph order `N`.
    pub fn order(&self) -> usize {
        self.a.ncols()
    }

    pub fn sample(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(self.order(), x.len())?;
        Ok(&self.a * x)
    }

    /// `A x + ε` with `ε` i.i.d. uniform on `[−σ, σ]`.
    pub fn observe(&self, x: &DVector<f64>, sigma: f64, seed: u64) -> Result<Observation> {
        let mut y = self.sample(x)?;
        y += uniform_noise(y.len(), sigma, seed)?;
        Ok(Observation {
            y,
            noise: Some(NoiseMeta { distribution: "uniform".into(), sigma, seed }),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseMeta {
    pub distribution: String,
    pub sigma: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub y: DVector<f64>,
    pub noise: Option<NoiseMeta>,
}

/// `len` i.i.d. draws from `U[−σ, σ]`.
pub fn uniform_noise(len: usize, sigma: f64, seed: u64) -> Result<DVector<f64>> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(GsisError::InvalidParameter(format!("noise level must be ≥ 0, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(DVector::zeros(len));
    }
    let mut rng = seeded_rng(seed);
    Ok(DVector::from_fn(len, |_, _| rng.random_range(-sigma..=sigma)))
}

/// Rows `e_iᵀ` for `i ∈ W`, in increasing vertex order.
pub fn subset_sampler(w: &[usize], n: usize) -> Result<SamplingScheme> {
    if w.is_empty() {
        return Err(GsisError::Empty("sampling set"));
    }
    let set: BTreeSet<usize> = w.iter().copied().collect();
    if let Some(&bad) = set.iter().find(|&&i| i >= n) {
        return Err(GsisError::IndexOutOfRange { index: bad, size: n });
    }
    let vertices: Vec<usize> = set.into_iter().collect();
    let a = DMatrix::from_fn(vertices.len(), n, |r, c| if vertices[r] == c { 1.0 } else { 0.0 });
    Ok(SamplingScheme { a, provenance: SchemeProvenance::Subset { vertices } })
}

/// Rows `e_{i₀}ᵀ D^m` for `m = 0, …, k−1`. `D` must be diagonalized by the decomposition; the
/// result is checked against its spectral form `[λ_D(n)^m u_n(i₀)] Uᵀ`.
pub fn dynamic_sampler(
    decomp: &SpectralDecomposition,
    d: &DMatrix<f64>,
    i0: usize,
    k: usize,
) -> Result<SamplingScheme> {
    let n = decomp.order();
    if i0 >= n {
        return Err(GsisError::IndexOutOfRange { index: i0, size: n });
    }
    if k == 0 {
        return Err(GsisError::InvalidParameter("at least one snapshot is required".into()));
    }
    let lambda_d = decomp.diagonal_of(d, 1e-9)?;
    let mut a = DMatrix::zeros(k, n);
    let mut row = DVector::zeros(n);
    row[i0] = 1.0;
    for m in 0..k {
        if m > 0 {
            row = d.tr_mul(&row);
        }
        a.row_mut(m).copy_from(&row.transpose());
    }
    let u = decomp.u();
    let spectral = DMatrix::from_fn(k, n, |m, c| lambda_d[c].powi(m as i32) * u[(i0, c)]) * u.transpose();
    let residual = (&a - &spectral).norm();
    if residual > 1e-10 * a.norm().max(1.0) {
        return Err(GsisError::NotDiagonalized { residual });
    }
    Ok(SamplingScheme { a, provenance: SchemeProvenance::Dynamic { i0, snapshots: k } })
}

/// Injective on `span(frame)` iff `rank(A F) = rank(F)`.
pub fn check_injective(a: &DMatrix<f64>, frame: &DMatrix<f64>, tol: f64) -> Result<bool> {
    if a.ncols() != frame.nrows() {
        return Err(GsisError::DimensionMismatch { expected: a.ncols(), actual: frame.nrows() });
    }
    if frame.ncols() == 0 {
        return Ok(true);
    }
    Ok(numerical_rank(&(a * frame), tol) == numerical_rank(frame, tol))
}

/// Subset sampling on `W` is injective on `B_Ω` iff `[u_n(i)]_{i∈W, n∈Ω}` has rank `#Ω`.
pub fn check_bandlimited_injective(
    decomp: &SpectralDecomposition,
    omega: &[usize],
    w: &[usize],
) -> Result<bool> {
    let n = decomp.order();
    let omega: Vec<usize> = omega.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let w: Vec<usize> = w.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    for &i in omega.iter().chain(&w) {
        if i >= n {
            return Err(GsisError::IndexOutOfRange { index: i, size: n });
        }
    }
    if omega.is_empty() {
        return Ok(true);
    }
    if w.len() < omega.len() {
        return Ok(false);
    }
    let u = decomp.u();
    let sub = DMatrix::from_fn(w.len(), omega.len(), |r, c| u[(w[r], omega[c])]);
    Ok(numerical_rank(&sub, RANK_TOL) == omega.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DynamicFailure {
    InsufficientSnapshots,
    RepeatedEigenvalues,
    VanishingComponent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DynamicInjectivity {
    pub injective: bool,
    pub failure: Option<DynamicFailure>,
}

/// Dynamic sampling `{e_{i₀}ᵀ D^m}_{m<k}` is injective on `B_Ω` iff `k ≥ #Ω`, the values
/// `λ_D(n)` are distinct on `Ω` and `u_n(i₀) ≠ 0` on `Ω`.
pub fn check_dynamic_injective(
    decomp: &SpectralDecomposition,
    omega: &[usize],
    d: &DMatrix<f64>,
    i0: usize,
    k: usize,
) -> Result<DynamicInjectivity> {
    let n = decomp.order();
    if i0 >= n {
        return Err(GsisError::IndexOutOfRange { index: i0, size: n });
    }
    let omega: Vec<usize> = omega.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    if let Some(&bad) = omega.iter().find(|&&c| c >= n) {
        return Err(GsisError::IndexOutOfRange { index: bad, size: n });
    }
    let lambda_d = decomp.diagonal_of(d, 1e-9)?;
    let fail = |f| Ok(DynamicInjectivity { injective: false, failure: Some(f) });
    if k < omega.len() {
        return fail(DynamicFailure::InsufficientSnapshots);
    }
    let values: Vec<f64> = omega.iter().map(|&c| lambda_d[c]).collect();
    let spread = lambda_d.iter().fold(0.0, |m: f64, v| m.max(v.abs())).max(1.0);
    for (p, a) in values.iter().enumerate() {
        if values[p + 1..].iter().any(|b| (a - b).abs() <= 1e-8 * spread) {
            return fail(DynamicFailure::RepeatedEigenvalues);
        }
    }
    if omega.iter().any(|&c| decomp.u()[(i0, c)].abs() <= 1e-10) {
        return fail(DynamicFailure::VanishingComponent);
    }
    Ok(DynamicInjectivity { injective: true, failure: None })
}

/// Least-squares fit on `B_Ω`: `U_Ω (U_Ωᵀ AᵀA U_Ω)^{−1} U_Ωᵀ Aᵀ y`.
pub fn reconstruct_direct(
    decomp: &SpectralDecomposition,
    omega: &[usize],
    scheme: &SamplingScheme,
    y: &DVector<f64>,
) -> Result<DVector<f64>> {
    let n = decomp.order();
    check_len(n, scheme.order())?;
    check_len(scheme.rows(), y.len())?;
    let omega: Vec<usize> = omega.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    if let Some(&bad) = omega.iter().find(|&&c| c >= n) {
        return Err(GsisError::IndexOutOfRange { index: bad, size: n });
    }
    if omega.is_empty() {
        return Ok(DVector::zeros(n));
    }
    let u_omega = DMatrix::from_columns(&omega.iter().map(|&c| decomp.basis_vector(c)).collect::<Vec<_>>());
    let au = scheme.matrix() * &u_omega;
    let gram = au.tr_mul(&au);
    let (eigs, _) = sorted_symmetric_eigen(&gram);
    let top = eigs[eigs.len() - 1];
    let condition = if eigs[0] > 0.0 { top / eigs[0] } else { f64::INFINITY };
    if !(condition <= CONDITION_LIMIT) {
        return Err(GsisError::NonInjectiveSampling { condition });
    }
    let rhs = au.tr_mul(y);
    let coeffs = gram
        .cholesky()
        .ok_or(GsisError::NonInjectiveSampling { condition })?
        .solve(&rhs);
    Ok(u_omega * coeffs)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovOptions {
    /// Stop once `‖e‖₂ ≤ delta`.
    pub delta: f64,
    /// Highest level to build; defaults to `N − 1`.
    pub max_level: Option<usize>,
    pub policy: DegeneratePolicy,
    /// Keep the estimate after every level in [`ReconstructionResult::level_signals`].
    pub record_levels: bool,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self { delta: 0.0, max_level: None, policy: DegeneratePolicy::Error, record_levels: false }
    }
}

#[derive(Debug, Clone)]
pub struct ReconstructionResult {
    pub x_out: DVector<f64>,
    pub e_final: DVector<f64>,
    pub residual_norm: f64,
    /// Level `D` at which the run stopped.
    pub depth: usize,
    /// `d_0, …, d_D`.
    pub dims_trace: Vec<usize>,
    /// `‖e‖₂` after each level.
    pub residual_trace: Vec<f64>,
    /// Estimate after each level, when requested.
    pub level_signals: Vec<DVector<f64>>,
    /// Directions dropped because the sampling could not see them.
    pub degenerate_drops: usize,
}

/// Finite-step Krylov reconstruction on `H(Φ)`.
///
/// Level 0 orthonormalizes `Φ` under `⟨·,·⟩_A` and projects `y`; level `n` adds the
/// orthonormalized `S_l w` for the vectors `w` added at level `n − 1` and moves the new
/// components of the residual into the estimate. After each level the estimate minimizes
/// `‖y − A x‖₂` over `H_n(Φ)`. The run stops when `‖e‖₂ ≤ delta`, when a level adds nothing,
/// or at level `N − 1`.
pub fn reconstruct_krylov(
    shifts: &ShiftSet,
    family: &GeneratorFamily,
    scheme: &SamplingScheme,
    y: &DVector<f64>,
    options: &KrylovOptions,
) -> Result<ReconstructionResult> {
    let n = shifts.order();
    check_len(n, scheme.order())?;
    check_len(scheme.rows(), y.len())?;
    check_len(n, family.generators()[0].len())?;
    if !(options.delta >= 0.0) {
        return Err(GsisError::InvalidParameter(format!("delta must be ≥ 0, got {}", options.delta)));
    }
    let a = scheme.matrix();
    let mut chain = KrylovChain::new(shifts.shifts(), family.generators(), Some(a), options.policy)?;
    let threshold = options.delta.max(ROUNDOFF_FLOOR * y.norm());
    let max_level = options.max_level.unwrap_or(n.saturating_sub(1)).min(n.saturating_sub(1));

    let mut x = DVector::zeros(n);
    let mut e = y.clone();
    let absorb = |chain: &KrylovChain, x: &mut DVector<f64>, e: &mut DVector<f64>| {
        for m in chain.newest() {
            let aw = &chain.sampled_vectors()[m];
            let c = aw.dot(e);
            x.axpy(c, &chain.vectors()[m], 1.0);
            e.axpy(-c, aw, 1.0);
        }
    };
    absorb(&chain, &mut x, &mut e);
    let mut residual_trace = vec![e.norm()];
    let mut level_signals = Vec::new();
    if options.record_levels {
        level_signals.push(x.clone());
    }
    while e.norm() > threshold && chain.level() < max_level {
        if chain.extend()? == 0 {
            break;
        }
        absorb(&chain, &mut x, &mut e);
        residual_trace.push(e.norm());
        if options.record_levels {
            level_signals.push(x.clone());
        }
    }
    let mut dims_trace = chain.dims().to_vec();
    if dims_trace.len() > residual_trace.len() {
        // The final level added nothing; report the depth of the last productive level.
        dims_trace.truncate(residual_trace.len());
    }
    let residual_norm = (y - a * &x).norm();
    Ok(ReconstructionResult {
        x_out: x,
        e_final: e,
        residual_norm,
        depth: residual_trace.len() - 1,
        dims_trace,
        residual_trace,
        level_signals,
        degenerate_drops: chain.degenerate_drops(),
    })
}

/// For a single shift `S` with `AᵀA S = S AᵀA`, the `A`-orthonormal Krylov basis of `φ₀` grows
/// by exactly one vector per level until it saturates.
pub fn degenerate_dimension_check(
    shifts: &ShiftSet,
    phi0: &DVector<f64>,
    scheme: &SamplingScheme,
) -> Result<bool> {
    if shifts.len() != 1 {
        return Err(GsisError::Precondition(format!(
            "a single shift is required, got {}",
            shifts.len()
        )));
    }
    check_len(shifts.order(), scheme.order())?;
    let s = shifts.shift(0);
    let ata = scheme.matrix().tr_mul(scheme.matrix());
    let residual = (&ata * s - s * &ata).norm();
    if residual > 1e-10 * ata.norm().max(1.0) * s.norm().max(1.0) {
        return Err(GsisError::Precondition(format!(
            "AᵀA does not commute with the shift (residual {residual:.3e})"
        )));
    }
    let mut chain =
        KrylovChain::new(shifts.shifts(), std::slice::from_ref(phi0), Some(scheme.matrix()), DegeneratePolicy::Error)?;
    chain.run_to(shifts.order().saturating_sub(1))?;
    let dims = chain.dims();
    let mut growing = true;
    for pair in dims.windows(2) {
        match pair[1] - pair[0] {
            1 if growing => {}
            0 => growing = false,
            _ => return Ok(false),
        }
    }
    Ok(dims[0] == 1)
}
