//! Range inclusion, minimal factorization and domination constants.
//!
//! For matrices `A` and `B` with the same number of rows the following are
//! equivalent: `AA* <= a^2 BB*` for some `a`, `R(A) ⊆ R(B)`, and `A = BC`
//! for some `C`. [`range_included`] decides the middle statement by rank,
//! produces the minimal-norm `C`, and reports the smallest admissible `a`.

use serde::Serialize;

use crate::numeric::{
    hermitian_eigen, hermitian_eigenvalues, is_psd, normalized, numerical_rank, pinv_solve_with,
    Complex64, ComplexMatrix, NumericError, RankRevealing, Result, SubspaceBasis, ToleranceContext,
};

/// Outcome of a range-inclusion test `R(A) ⊆ R(B)`.
#[derive(Debug, Clone, Serialize)]
pub struct DouglasResult {
    pub included: bool,
    /// `||C||_2` for the minimal factor; absent when not included.
    pub alpha_min: Option<f64>,
    #[serde(skip)]
    pub factor_c: Option<ComplexMatrix>,
    /// `||B C - A||_2` for `C = pinv(B) A`, reported either way.
    pub residual: f64,
    /// `||(I - QQ*) A|| / ||A||` with `Q` an orthonormal basis of `R(B)`:
    /// how far the columns of `A` stick out of `R(B)`.
    pub margin: f64,
    /// Unit vector in `R(A)` with maximal component outside `R(B)`.
    pub witness: Option<Vec<Complex64>>,
}

fn check_rows(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<()> {
    if a.rows() != b.rows() {
        return Err(NumericError::DimensionMismatch(format!(
            "range inclusion needs equal row counts, got A {}x{} and B {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    Ok(())
}

/// Rank-based inclusion decision behind [`range_included`].
struct InclusionProbe {
    rank_equal: bool,
    margin: f64,
    outside: ComplexMatrix,
}

fn probe(
    a: &ComplexMatrix,
    norm_a: f64,
    b: &ComplexMatrix,
    rr_b: &RankRevealing,
    tol: &ToleranceContext,
) -> Result<InclusionProbe> {
    let rank_b = rr_b.rank();
    if rank_b == b.rows() {
        return Ok(InclusionProbe {
            rank_equal: true,
            margin: 0.0,
            outside: ComplexMatrix::zeros(a.rows(), a.cols()),
        });
    }
    let outside = rr_b.range_basis().residual_of(a);
    let margin = outside.spectral_norm()? / norm_a;
    let rank_equal = if rank_b == 0 {
        false
    } else {
        // Scale A to B's magnitude so the shared relative threshold treats
        // both blocks of the augmented matrix alike.
        let aug = b.hstack(&a.scale(rr_b.sigma_max() / norm_a))?;
        numerical_rank(&aug, tol)? == rank_b
    };
    Ok(InclusionProbe {
        rank_equal,
        margin,
        outside,
    })
}

/// Decides `R(A) ⊆ R(B)` and, when it holds, returns the minimal factor
/// `C = pinv(B) A` and `alpha_min = ||C||_2`.
///
/// Inclusion requires both equal numerical rank of `[B | A]` and `B` and a
/// factorization residual within `residual_tol * ||A||`; a borderline case
/// that passes only one of the two is reported as not included.
pub fn range_included(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    tol: &ToleranceContext,
) -> Result<DouglasResult> {
    check_rows(a, b)?;
    let norm_a = a.spectral_norm()?;
    if norm_a == 0.0 {
        return Ok(DouglasResult {
            included: true,
            alpha_min: Some(0.0),
            factor_c: Some(ComplexMatrix::zeros(b.cols(), a.cols())),
            residual: 0.0,
            margin: 0.0,
            witness: None,
        });
    }
    let rr_b = RankRevealing::new(b, tol)?;
    let probe = probe(a, norm_a, b, &rr_b, tol)?;
    let sol = pinv_solve_with(&rr_b, b, a)?;
    let included = probe.rank_equal && sol.residual <= tol.residual_tol * norm_a;
    if included {
        let alpha = sol.factor.spectral_norm()?;
        Ok(DouglasResult {
            included,
            alpha_min: Some(alpha),
            factor_c: Some(sol.factor),
            residual: sol.residual,
            margin: probe.margin,
            witness: None,
        })
    } else {
        let witness = escape_direction(a, &probe.outside)?;
        Ok(DouglasResult {
            included,
            alpha_min: None,
            factor_c: None,
            residual: sol.residual,
            margin: probe.margin,
            witness: Some(witness),
        })
    }
}

/// `A y / ||A y||` for `y` the top right singular vector of the part of `A`
/// outside `R(B)`.
fn escape_direction(a: &ComplexMatrix, outside: &ComplexMatrix) -> Result<Vec<Complex64>> {
    let rr = RankRevealing::new(outside, &ToleranceContext::default())?;
    let (_, y) = rr.top_singular_pair();
    Ok(normalized(&a.mul_vec(&y)))
}

/// Smallest `alpha` with `M <= alpha^2 N`, possibly infinite.
#[derive(Debug, Clone, Serialize)]
pub struct Domination {
    /// `f64::INFINITY` when `R(M)` is not contained in `R(N)`.
    pub alpha: f64,
    /// Vector `x` attaining `<Mx, x> = alpha^2 <Nx, x>` when alpha is finite
    /// and positive.
    pub extremal: Option<Vec<Complex64>>,
}

impl Domination {
    pub fn is_finite(&self) -> bool {
        self.alpha.is_finite()
    }
}

/// Smallest `alpha >= 0` with `M <= alpha^2 N` for PSD `M`, `N`.
///
/// Both matrices are compressed to `R(N)`, where `N` is definite, and the
/// answer is the square root of the largest eigenvalue of the reduced pencil.
pub fn psd_domination_alpha(
    m: &ComplexMatrix,
    n: &ComplexMatrix,
    tol: &ToleranceContext,
) -> Result<Domination> {
    let dim = m.ensure_square()?;
    if n.ensure_square()? != dim {
        return Err(NumericError::DimensionMismatch(format!(
            "pencil matrices have sizes {dim} and {}",
            n.rows()
        )));
    }
    let not_psd = |name: &str, min: f64| {
        NumericError::Precondition(format!(
            "{name} is not positive semidefinite (min eigenvalue {min:.3e})"
        ))
    };
    let m_values = hermitian_eigenvalues(m, tol, None)?;
    let norm_m = m_values.last().copied().unwrap_or(0.0).max(0.0);
    let m_min = m_values.first().copied().unwrap_or(0.0);
    if m_min < -tol.psd_tol * norm_m.max(m_min.abs()) {
        return Err(not_psd("M", m_min));
    }
    let n_eig = hermitian_eigen(n, tol, None)?;
    let n_max = n_eig.max().max(0.0);
    if n_eig.min() < -tol.psd_tol * n_eig.abs_max() {
        return Err(not_psd("N", n_eig.min()));
    }
    if norm_m == 0.0 {
        return Ok(Domination {
            alpha: 0.0,
            extremal: None,
        });
    }
    // For PSD N the eigenvectors above the rank cutoff span R(N), and the
    // matching eigenvalues give N^{-1/2} on that subspace directly.
    let cutoff = tol.rank_rel_tol * n_max;
    let keep: Vec<usize> = (0..dim)
        .filter(|&i| n_eig.eigenvalues[i] > cutoff)
        .collect();
    let r = keep.len();
    if r == 0 {
        return Ok(Domination {
            alpha: f64::INFINITY,
            extremal: None,
        });
    }
    let q = ComplexMatrix::from_fn(dim, r, |i, j| n_eig.eigenvectors.get(i, keep[j]));
    if r < dim {
        let basis = SubspaceBasis {
            ambient_dim: dim,
            basis: q.clone(),
            rank: r,
        };
        let margin = basis.residual_of(m).spectral_norm()? / norm_m;
        let aug = n.hstack(&m.scale(n_max / norm_m))?;
        if margin > tol.residual_tol || numerical_rank(&aug, tol)? != r {
            return Ok(Domination {
                alpha: f64::INFINITY,
                extremal: None,
            });
        }
    }
    let w: Vec<f64> = keep
        .iter()
        .map(|&i| 1.0 / n_eig.eigenvalues[i].sqrt())
        .collect();
    let mr = &(&q.adjoint() * m) * &q;
    let pencil = ComplexMatrix::from_fn(r, r, |i, j| mr.get(i, j) * (w[i] * w[j]));
    let eig = hermitian_eigen(&pencil, &ToleranceContext::uniform(1e-6)?, None)?;
    let top = eig.max().max(0.0);
    let u = eig.eigenvectors.column(r - 1);
    let y: Vec<Complex64> = u.iter().zip(&w).map(|(z, s)| z * s).collect();
    let x = q.mul_vec(&y);
    Ok(Domination {
        alpha: top.sqrt(),
        extremal: Some(normalized(&x)),
    })
}

/// A positive semidefinite `Q` with `TT* = T*QT`.
#[derive(Debug, Clone)]
pub struct PosinormalWitness {
    pub q: ComplexMatrix,
    /// `L` with `T = T* L`; `Q = L L*`.
    pub l: ComplexMatrix,
    /// `||TT* - T*QT||_2`
    pub residual: f64,
    pub psd: bool,
}

/// Canonical interrupter `Q = LL*` built from the minimal-norm `L` solving
/// `T = T* L`; `None` when `R(T)` is not contained in `R(T*)`.
pub fn posinormal_q(
    t: &ComplexMatrix,
    tol: &ToleranceContext,
) -> Result<Option<PosinormalWitness>> {
    t.ensure_square()?;
    let th = t.adjoint();
    let res = range_included(t, &th, tol)?;
    let Some(l) = res.factor_c else {
        return Ok(None);
    };
    let q = &l * &l.adjoint();
    let residual = (&(t * &th) - &(&(&th * &q) * t)).spectral_norm()?;
    let psd = is_psd(&q, tol)?.psd;
    Ok(Some(PosinormalWitness {
        q,
        l,
        residual,
        psd,
    }))
}
