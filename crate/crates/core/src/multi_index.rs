//! Multi-indices `α ∈ ℤ₊^L` and the truncated sets `Σ_M = {α : |α| ≤ M}`.

/// Exponent vector for a monomial `S₁^α₁ ⋯ S_L^α_L`.
pub type MultiIndex = Vec<usize>;

pub fn degree(alpha: &[usize]) -> usize {
    alpha.iter().sum()
}

/// All multi-indices of length `vars` with total degree exactly `deg`, in lexicographically
/// descending order (`(deg,0,…)` first).
pub fn of_degree(vars: usize, deg: usize) -> Vec<MultiIndex> {
    fn fill(vars: usize, remaining: usize, prefix: &mut MultiIndex, out: &mut Vec<MultiIndex>) {
        if prefix.len() + 1 == vars {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=remaining).rev() {
            prefix.push(first);
            fill(vars, remaining - first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if vars == 0 {
        if deg == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    fill(vars, deg, &mut Vec::with_capacity(vars), &mut out);
    out
}

/// `Σ_M` in graded lexicographic order: by total degree, then lexicographically descending.
pub fn graded_lex(vars: usize, max_degree: usize) -> Vec<MultiIndex> {
    (0..=max_degree).flat_map(|d| of_degree(vars, d)).collect()
}

/// Number of multi-indices in `ℤ₊^vars` of total degree at most `max_degree`.
pub fn count_up_to(vars: usize, max_degree: usize) -> usize {
    // binomial(max_degree + vars, vars)
    let mut acc: u128 = 1;
    for i in 1..=vars as u128 {
        acc = acc * (max_degree as u128 + i) / i;
    }
    acc as usize
}
