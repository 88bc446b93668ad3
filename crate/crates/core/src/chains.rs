//! Kernel and range chains of matrix powers, ascent and descent.

use serde::Serialize;

use crate::numeric::{
    subspaces_equal, ComplexMatrix, RankRevealing, Result, SubspaceBasis, ToleranceContext,
    SUBSPACE_ANGLE_TOL,
};

/// `dim N(T^n)` and `rank(T^n)` for `n = 0..=n_max`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainProfile {
    pub op_dim: usize,
    pub n_max: usize,
    pub kernel_dims: Vec<usize>,
    pub range_ranks: Vec<usize>,
    pub ascent: usize,
    pub descent: usize,
    /// Kernel chain nondecreasing, range chain nonincreasing, and
    /// `dim N(T^n) + rank(T^n) = dim` at every step.
    pub consistent: bool,
}

/// `T^0, T^1, ..., T^n`, each rescaled to unit Frobenius norm (zero powers
/// stay zero).
///
/// Powers are built from `T / ||T||_2` by left multiplication, and after
/// every step singular values at or below `rank_rel_tol` are discarded. Since
/// the unscaled products never exceed norm one, that cutoff sits far above
/// accumulated rounding, so a nilpotent part dies exactly instead of being
/// blown up to unit size by the rescaling.
pub fn normalized_powers(
    t: &ComplexMatrix,
    n: usize,
    tol: &ToleranceContext,
) -> Result<Vec<ComplexMatrix>> {
    let dim = t.ensure_square()?;
    let norm = t.spectral_norm()?;
    let base = if norm > 0.0 {
        t.scale(1.0 / norm)
    } else {
        t.clone()
    };
    let mut raw = ComplexMatrix::identity(dim);
    let mut out = Vec::with_capacity(n + 1);
    out.push(raw.clone());
    for _ in 1..=n {
        let next = &base * &raw;
        raw = RankRevealing::new(&next, tol)?.truncated(tol.rank_rel_tol);
        let f = raw.frobenius_norm();
        out.push(if f > 0.0 {
            raw.scale(1.0 / f)
        } else {
            raw.clone()
        });
    }
    Ok(out)
}

fn first_stable(seq: &[usize]) -> usize {
    seq.windows(2)
        .position(|w| w[0] == w[1])
        .unwrap_or(seq.len() - 1)
}

/// Bases of `N(T^k)` and `R(T^k)` for `k = 0..=n`.
///
/// No power is ever formed: `N(T^k)` is the kernel of `T` followed by the
/// projection off `N(T^{k-1})`, and `R(T^k)` is the range of `T` restricted
/// to `R(T^{k-1})`. Every rank decision is made against `||T||_2`, so each
/// step is only as delicate as `T` itself, however many steps are taken.
#[derive(Debug, Clone)]
pub struct SubspaceChains {
    pub kernels: Vec<SubspaceBasis>,
    pub ranges: Vec<SubspaceBasis>,
}

pub fn subspace_chains(
    t: &ComplexMatrix,
    tol: &ToleranceContext,
    n: usize,
) -> Result<SubspaceChains> {
    let dim = t.ensure_square()?;
    let scale = t.spectral_norm()?;
    let mut kernels = vec![SubspaceBasis::empty(dim)];
    let mut ranges = vec![SubspaceBasis::full(dim)];
    for k in 1..=n {
        let prev_kernel = &kernels[k - 1];
        let prev_range = &ranges[k - 1];
        let kernel = if prev_kernel.rank == dim {
            prev_kernel.clone()
        } else {
            RankRevealing::with_scale(&prev_kernel.residual_of(t), tol, scale)?.kernel_basis()
        };
        let range = if prev_range.rank == 0 {
            prev_range.clone()
        } else {
            RankRevealing::with_scale(&(t * &prev_range.basis), tol, scale)?.range_basis()
        };
        kernels.push(kernel);
        ranges.push(range);
    }
    Ok(SubspaceChains { kernels, ranges })
}

/// Chain profile up to `max(n_max, dim)` so that stabilization is always
/// observed.
pub fn chain_profile(
    t: &ComplexMatrix,
    tol: &ToleranceContext,
    n_max: usize,
) -> Result<ChainProfile> {
    let dim = t.ensure_square()?;
    let n_eval = n_max.max(dim).max(1);
    let chains = subspace_chains(t, tol, n_eval)?;
    Ok(profile_from(dim, &chains))
}

fn profile_from(dim: usize, chains: &SubspaceChains) -> ChainProfile {
    let kernel_dims: Vec<usize> = chains.kernels.iter().map(|k| k.rank).collect();
    let range_ranks: Vec<usize> = chains.ranges.iter().map(|r| r.rank).collect();
    let consistent = kernel_dims.windows(2).all(|w| w[0] <= w[1])
        && range_ranks.windows(2).all(|w| w[0] >= w[1])
        && kernel_dims
            .iter()
            .zip(&range_ranks)
            .all(|(k, r)| k + r == dim);
    ChainProfile {
        op_dim: dim,
        n_max: kernel_dims.len() - 1,
        ascent: first_stable(&kernel_dims),
        descent: first_stable(&range_ranks),
        kernel_dims,
        range_ranks,
        consistent,
    }
}

pub fn ascent(t: &ComplexMatrix, tol: &ToleranceContext) -> Result<usize> {
    Ok(chain_profile(t, tol, 1)?.ascent)
}

pub fn descent(t: &ComplexMatrix, tol: &ToleranceContext) -> Result<usize> {
    Ok(chain_profile(t, tol, 1)?.descent)
}

/// Both sides of `asc(T^k) <= j ⇔ asc(T) <= jk` and the descent analogue.
#[derive(Debug, Clone, Serialize)]
pub struct PowerIndexReport {
    pub j: usize,
    pub k: usize,
    pub ascent_of_power: usize,
    pub ascent: usize,
    pub ascent_lhs: bool,
    pub ascent_rhs: bool,
    pub descent_of_power: usize,
    pub descent: usize,
    pub descent_lhs: bool,
    pub descent_rhs: bool,
    pub agree: bool,
}

pub fn check_power_indices(
    t: &ComplexMatrix,
    tol: &ToleranceContext,
    j: usize,
    k: usize,
) -> Result<PowerIndexReport> {
    let j = j.max(1);
    let k = k.max(1);
    let base = chain_profile(t, tol, 1)?;
    let tk = normalized_powers(t, k, tol)?
        .pop()
        .expect("at least one power");
    let power = chain_profile(&tk, tol, 1)?;
    let ascent_lhs = power.ascent <= j;
    let ascent_rhs = base.ascent <= j * k;
    let descent_lhs = power.descent <= j;
    let descent_rhs = base.descent <= j * k;
    Ok(PowerIndexReport {
        j,
        k,
        ascent_of_power: power.ascent,
        ascent: base.ascent,
        ascent_lhs,
        ascent_rhs,
        descent_of_power: power.descent,
        descent: base.descent,
        descent_lhs,
        descent_rhs,
        agree: ascent_lhs == ascent_rhs && descent_lhs == descent_rhs,
    })
}

/// Finite-dimensional content of index stabilization at level `k`.
#[derive(Debug, Clone, Serialize)]
pub struct StabilizationReport {
    pub k: usize,
    pub precondition_met: bool,
    pub ascent: usize,
    pub descent: usize,
    pub ascent_equals_descent: bool,
    /// `R(T^n) = R(T^k)` for every `k <= n <= n_max`.
    pub ranges_stable: bool,
    /// `N(T^n) = N(T^k)` for every `k <= n <= n_max`.
    pub kernels_stable: bool,
    pub adjoint_ascent: usize,
    pub adjoint_descent: usize,
    pub adjoint_holds: bool,
    pub holds: bool,
}

/// Checks `dsc(T) = asc(T) <= k`, stabilization of ranges and kernels from
/// `k` on, and the same equality for `T*`. `k = 0` is read as `k = 1`. An
/// unmet precondition `asc(T) <= k` is reported, not raised.
pub fn check_index_stabilization(
    t: &ComplexMatrix,
    tol: &ToleranceContext,
    k: usize,
    n_max: usize,
) -> Result<StabilizationReport> {
    let k = k.max(1);
    let dim = t.ensure_square()?;
    let chains = subspace_chains(t, tol, n_max.max(k).max(dim))?;
    let profile = profile_from(dim, &chains);
    let adj = chain_profile(&t.adjoint(), tol, n_max.max(k))?;
    let mut report = StabilizationReport {
        k,
        precondition_met: profile.ascent <= k,
        ascent: profile.ascent,
        descent: profile.descent,
        ascent_equals_descent: profile.ascent == profile.descent,
        ranges_stable: false,
        kernels_stable: false,
        adjoint_ascent: adj.ascent,
        adjoint_descent: adj.descent,
        adjoint_holds: adj.ascent == adj.descent && adj.ascent <= k,
        holds: false,
    };
    if !report.precondition_met {
        return Ok(report);
    }
    let mut ranges = true;
    let mut kernels = true;
    for n in k + 1..chains.kernels.len() {
        ranges &= subspaces_equal(&chains.ranges[n], &chains.ranges[k], SUBSPACE_ANGLE_TOL)?;
        kernels &= subspaces_equal(&chains.kernels[n], &chains.kernels[k], SUBSPACE_ANGLE_TOL)?;
    }
    report.ranges_stable = ranges;
    report.kernels_stable = kernels;
    report.holds = report.ascent_equals_descent && ranges && kernels && report.adjoint_holds;
    Ok(report)
}

/// `asc(T*) <= dsc(T)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AdjointAscentReport {
    pub adjoint_ascent: usize,
    pub descent: usize,
    pub holds: bool,
}

pub fn check_adjoint_ascent(
    t: &ComplexMatrix,
    tol: &ToleranceContext,
) -> Result<AdjointAscentReport> {
    let adjoint_ascent = ascent(&t.adjoint(), tol)?;
    let descent = descent(t, tol)?;
    Ok(AdjointAscentReport {
        adjoint_ascent,
        descent,
        holds: adjoint_ascent <= descent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::Complex64;

    fn jordan(n: usize) -> ComplexMatrix {
        let mut j = ComplexMatrix::zeros(n, n);
        for i in 0..n - 1 {
            j.set(i, i + 1, Complex64::new(1.0, 0.0));
        }
        j
    }

    #[test]
    fn invertible_has_zero_ascent() {
        let t = ComplexMatrix::from_real_rows(&[[2.0, 1.0], [1.0, 1.0]]).unwrap();
        let p = chain_profile(&t, &ToleranceContext::default(), 2).unwrap();
        assert_eq!((p.ascent, p.descent), (0, 0));
    }

    #[test]
    fn jordan3_profile() {
        let p = chain_profile(&jordan(3), &ToleranceContext::default(), 3).unwrap();
        assert_eq!(p.kernel_dims, vec![0, 1, 2, 3]);
        assert_eq!(p.range_ranks, vec![3, 2, 1, 0]);
        assert_eq!((p.ascent, p.descent), (3, 3));
        assert!(p.consistent);
    }

    #[test]
    fn diagonal_with_zero() {
        let p = chain_profile(
            &ComplexMatrix::from_real_diagonal(&[0.0, 1.0]),
            &ToleranceContext::default(),
            2,
        )
        .unwrap();
        assert_eq!((p.ascent, p.descent), (1, 1));
    }

    #[test]
    fn power_indices_on_jordan3() {
        let tol = ToleranceContext::default();
        let r = check_power_indices(&jordan(3), &tol, 2, 2).unwrap();
        assert_eq!(r.ascent_of_power, 2);
        assert!(r.ascent_lhs && r.ascent_rhs && r.agree);
        let r = check_power_indices(&jordan(3), &tol, 1, 2).unwrap();
        assert!(!r.ascent_lhs && !r.ascent_rhs && r.agree);
        let r = check_power_indices(&ComplexMatrix::identity(3), &tol, 1, 3).unwrap();
        assert!(r.ascent_lhs && r.ascent_rhs && r.agree);
    }

    #[test]
    fn stabilization_examples() {
        let tol = ToleranceContext::default();
        let r = check_index_stabilization(&jordan(2), &tol, 2, 4).unwrap();
        assert!(r.precondition_met && r.holds);
        assert_eq!((r.ascent, r.descent), (2, 2));
        let r = check_index_stabilization(&ComplexMatrix::identity(3), &tol, 0, 3).unwrap();
        assert_eq!(r.k, 1);
        assert!(r.holds);
        let r = check_index_stabilization(&jordan(3), &tol, 1, 3).unwrap();
        assert!(!r.precondition_met && !r.holds);
    }

    #[test]
    fn adjoint_ascent_on_nilpotent() {
        let r = check_adjoint_ascent(&jordan(4), &ToleranceContext::default()).unwrap();
        assert!(r.holds);
        assert_eq!(r.adjoint_ascent, 4);
    }
}
