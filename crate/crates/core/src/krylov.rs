//! Nested Krylov chains `H_0(Φ) ⊂ H_1(Φ) ⊂ …` with an orthonormal basis under either the
//! Euclidean inner product or the sampling inner product `⟨x, y⟩_A = (Ax)ᵀ(Ay)`.
//!
//! Each level orthogonalizes the candidates `S_l w` (for every shift `l` and every basis
//! vector `w` added at the previous level, in that order) against the running basis with two
//! passes of modified Gram–Schmidt.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{GsisError, Result};

/// A candidate is dropped when its sampled norm falls below this fraction of the largest
/// sampled candidate norm seen so far.
pub const DROP_TOLERANCE: f64 = 1e-10;
/// A dropped candidate whose Euclidean remainder exceeds this fraction of its scale is not a
/// genuine dependency but a direction the sampling cannot see.
const EUCLIDEAN_DEPENDENCY: f64 = 1e-8;

/// What to do with a candidate that is nonzero but invisible to the sampling matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegeneratePolicy {
    /// Fail with [`GsisError::DegenerateInnerProduct`].
    #[default]
    Error,
    /// Drop the direction and keep going.
    Drop,
}

#[derive(Debug, Clone)]
pub struct KrylovChain<'a> {
    shifts: &'a [DMatrix<f64>],
    sampler: Option<&'a DMatrix<f64>>,
    policy: DegeneratePolicy,
    basis: Vec<DVector<f64>>,
    /// `A w` for each basis vector (equal to `w` without a sampler).
    sampled: Vec<DVector<f64>>,
    frontier: std::ops::Range<usize>,
    dims: Vec<usize>,
    scale: f64,
    degenerate_drops: usize,
    dependent_generators: usize,
}

impl<'a> KrylovChain<'a> {
    /// Level 0: orthonormalizes the generators. Generators dependent on earlier ones are
    /// skipped with a warning.
    pub fn new(
        shifts: &'a [DMatrix<f64>],
        generators: &[DVector<f64>],
        sampler: Option<&'a DMatrix<f64>>,
        policy: DegeneratePolicy,
    ) -> Result<Self> {
        let n = shifts.first().map(|s| s.nrows()).ok_or(GsisError::Empty("shift family"))?;
        if let Some(a) = sampler {
            if a.ncols() != n {
                return Err(GsisError::DimensionMismatch { expected: n, actual: a.ncols() });
            }
        }
        let mut chain = Self {
            shifts,
            sampler,
            policy,
            basis: Vec::new(),
            sampled: Vec::new(),
            frontier: 0..0,
            dims: Vec::new(),
            scale: 0.0,
            degenerate_drops: 0,
            dependent_generators: 0,
        };
        for phi in generators {
            if phi.len() != n {
                return Err(GsisError::DimensionMismatch { expected: n, actual: phi.len() });
            }
            if !chain.admit(phi.clone())? {
                chain.dependent_generators += 1;
            }
        }
        if chain.dependent_generators > 0 {
            log::warn!(
                "{} generator(s) dependent under the working inner product were dropped",
                chain.dependent_generators
            );
        }
        chain.frontier = 0..chain.basis.len();
        chain.dims.push(chain.basis.len());
        Ok(chain)
    }

    fn sample(&self, v: &DVector<f64>) -> DVector<f64> {
        match self.sampler {
            Some(a) => a * v,
            None => v.clone(),
        }
    }

    /// Orthogonalizes `v` against the basis and appends it if it survives.
    fn admit(&mut self, mut v: DVector<f64>) -> Result<bool> {
        let mut av = self.sample(&v);
        let raw_sampled = av.norm();
        let raw_euclid = v.norm();
        self.scale = self.scale.max(raw_sampled);
        let mut coefficient_mass = 0.0;
        for pass in 0..2 {
            for (w, aw) in self.basis.iter().zip(&self.sampled) {
                let c = aw.dot(&av);
                v.axpy(-c, w, 1.0);
                av.axpy(-c, aw, 1.0);
                if pass == 0 {
                    coefficient_mass += c.abs() * w.norm();
                }
            }
        }
        let sampled_norm = av.norm();
        if sampled_norm <= DROP_TOLERANCE * self.scale || sampled_norm == 0.0 {
            if self.sampler.is_some() {
                let euclid_scale = raw_euclid.max(coefficient_mass);
                if v.norm() > EUCLIDEAN_DEPENDENCY * euclid_scale {
                    let relative_norm = if self.scale > 0.0 { sampled_norm / self.scale } else { 0.0 };
                    match self.policy {
                        DegeneratePolicy::Error => {
                            return Err(GsisError::DegenerateInnerProduct { relative_norm })
                        }
                        DegeneratePolicy::Drop => self.degenerate_drops += 1,
                    }
                }
            }
            return Ok(false);
        }
        self.basis.push(v / sampled_norm);
        self.sampled.push(av / sampled_norm);
        Ok(true)
    }

    /// Adds the next level; returns how many basis vectors it contributed.
    pub fn extend(&mut self) -> Result<usize> {
        let before = self.basis.len();
        let frontier = self.frontier.clone();
        for l in 0..self.shifts.len() {
            for m in frontier.clone() {
                let candidate = &self.shifts[l] * &self.basis[m];
                self.admit(candidate)?;
            }
        }
        self.frontier = before..self.basis.len();
        self.dims.push(self.basis.len());
        Ok(self.basis.len() - before)
    }

    /// Current level `n` (0 after construction).
    pub fn level(&self) -> usize {
        self.dims.len() - 1
    }

    /// `d_0, d_1, …, d_level`.
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_saturated(&self) -> bool {
        self.frontier.is_empty()
    }

    pub fn vectors(&self) -> &[DVector<f64>] {
        &self.basis
    }

    /// `A w` for every basis vector.
    pub fn sampled_vectors(&self) -> &[DVector<f64>] {
        &self.sampled
    }

    /// Basis vectors added by the most recent level.
    pub fn newest(&self) -> std::ops::Range<usize> {
        self.frontier.clone()
    }

    pub fn degenerate_drops(&self) -> usize {
        self.degenerate_drops
    }

    pub fn basis_matrix(&self) -> DMatrix<f64> {
        let n = self.shifts[0].nrows();
        if self.basis.is_empty() {
            DMatrix::zeros(n, 0)
        } else {
            DMatrix::from_columns(&self.basis)
        }
    }

    /// Extends until saturation or `max_level`, whichever comes first.
    pub fn run_to(&mut self, max_level: usize) -> Result<()> {
        while self.level() < max_level && !self.is_saturated() {
            self.extend()?;
        }
        Ok(())
    }
}
