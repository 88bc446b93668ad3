//! Per-trial property checks. Each `check_*` function takes a concrete
//! instance so that a failing seed, or a hand-made counterexample, can be
//! examined directly.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::generators::{
    complex_gaussian, gaussian_matrix, generate_with, haar_unitary, GeneratorKind, Instance,
};
use crate::chains::{
    chain_profile, check_adjoint_ascent, check_index_stabilization, check_power_indices,
    normalized_powers,
};
use crate::classes::{alpha_min, is_posinormal, is_quasiposinormal};
use crate::douglas::{psd_domination_alpha, range_included};
use crate::numeric::{
    kernel_basis, normalized, pinv_solve, range_basis, vector_norm, ComplexMatrix, RankRevealing,
    Result, ToleranceContext,
};

/// Absolute slack on every constant bound.
pub const BOUND_SLACK: f64 = 1e-6;
/// Allowed `||S*T - TS*|| / (||S|| ||T||)` once `S` is normal and `ST = TS`.
pub const FUGLEDE_TOL: f64 = 1e-10;
/// Largest power examined by the power-closure suites.
pub const MAX_POWER: usize = 5;

pub type Measured = BTreeMap<String, f64>;

/// One violated property inside a trial.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyFailure {
    pub property: String,
    pub measured: Measured,
}

/// What a single trial produced.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrialOutcome {
    /// The drawn instance did not meet the generator contract.
    pub filtered: bool,
    pub resampled: u32,
    pub failures: Vec<PropertyFailure>,
}

impl TrialOutcome {
    fn filtered() -> Self {
        Self {
            filtered: true,
            ..Self::default()
        }
    }

    fn fail(&mut self, property: &str, measured: &[(&str, f64)]) {
        self.failures.push(PropertyFailure {
            property: property.to_string(),
            measured: measured.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        });
    }

    fn expect(&mut self, ok: bool, property: &str, measured: &[(&str, f64)]) {
        if !ok {
            self.fail(property, measured);
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn opt(x: Option<f64>) -> f64 {
    x.unwrap_or(f64::INFINITY)
}

fn trial_dim(rng: &mut ChaCha8Rng, max_dim: usize) -> usize {
    rng.random_range(2..=max_dim.max(2))
}

fn single(kind: GeneratorKind, dim: usize, rng: &mut ChaCha8Rng) -> (ComplexMatrix, u32) {
    let g = generate_with(kind, dim, rng);
    match g.instance {
        Instance::Single(t) => (t, g.resampled),
        Instance::Pair { .. } => unreachable!("{kind} yields single matrices"),
    }
}

fn pair(
    kind: GeneratorKind,
    dim: usize,
    rng: &mut ChaCha8Rng,
) -> (ComplexMatrix, ComplexMatrix, u32) {
    let g = generate_with(kind, dim, rng);
    match g.instance {
        Instance::Pair { s, t } => (s, t, g.resampled),
        Instance::Single(_) => unreachable!("{kind} yields pairs"),
    }
}

// ---------------------------------------------------------------- douglas

pub(crate) fn douglas_trial(
    rng: &mut ChaCha8Rng,
    max_dim: usize,
    tol: &ToleranceContext,
) -> Result<TrialOutcome> {
    let n = trial_dim(rng, max_dim);
    let m = rng.random_range(1..=n + 2);
    let p = rng.random_range(1..=n);
    let r = rng.random_range(1..=n.min(m));
    // B = U_r diag(s) V_r* has rank r and well-separated singular values
    let u = haar_unitary(rng, n);
    let v = haar_unitary(rng, m);
    let mut b = ComplexMatrix::zeros(n, m);
    for k in 0..r {
        let s = rng.random_range(0.5..=2.0);
        let uk = u.column(k);
        let vk = v.column(k);
        for i in 0..n {
            for j in 0..m {
                b.set(i, j, b.get(i, j) + uk[i] * vk[j].conj() * s);
            }
        }
    }
    let a = if rng.random_bool(0.5) {
        let c = gaussian_matrix(rng, m, p).scale(1.0 / (m as f64).sqrt());
        &b * &c
    } else if rng.random_bool(0.1) {
        ComplexMatrix::zeros(n, p)
    } else {
        gaussian_matrix(rng, n, p).scale(1.0 / (n as f64).sqrt())
    };
    let mut out = check_douglas(&a, &b, tol)?;
    // extra probing with random unit vectors
    if let Some(alpha) = range_included(&a, &b, tol)?.alpha_min {
        let (ah, bh) = (a.adjoint(), b.adjoint());
        let a_norm = a.spectral_norm()?;
        for _ in 0..20 {
            let x: Vec<_> = (0..n).map(|_| complex_gaussian(rng)).collect();
            let x = normalized(&x);
            let lhs = vector_norm(&ah.mul_vec(&x));
            let rhs = vector_norm(&bh.mul_vec(&x));
            let ok = lhs <= (alpha + 1e-8) * rhs + tol.residual_tol * a_norm;
            out.expect(
                ok,
                "douglas.alpha_bounds_samples",
                &[("lhs", lhs), ("rhs", rhs), ("alpha", alpha)],
            );
        }
    }
    Ok(out)
}

/// Range inclusion, majorization and factorization must agree, and the
/// factor norm must match the extremal ratio `||A*x|| / ||B*x||`.
pub fn check_douglas(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    tol: &ToleranceContext,
) -> Result<TrialOutcome> {
    let mut out = TrialOutcome::default();
    let inc = range_included(a, b, tol)?;
    let dom = psd_domination_alpha(&(a * &a.adjoint()), &(b * &b.adjoint()), tol)?;
    let sol = pinv_solve(b, a, tol)?;
    let a_norm = a.spectral_norm()?;
    let factored = sol.residual <= tol.residual_tol * a_norm;
    out.expect(
        inc.included == dom.is_finite() && inc.included == factored,
        "douglas.three_way",
        &[
            ("included", flag(inc.included)),
            ("dominated", flag(dom.is_finite())),
            ("factored", flag(factored)),
            ("residual", sol.residual),
        ],
    );
    if let (true, Some(alpha)) = (inc.included, inc.alpha_min) {
        out.expect(
            (alpha - dom.alpha).abs() <= BOUND_SLACK,
            "douglas.alpha_agreement",
            &[("alpha_factor", alpha), ("alpha_pencil", dom.alpha)],
        );
        if let Some(x) = &dom.extremal {
            let lhs = vector_norm(&a.adjoint().mul_vec(x));
            let rhs = vector_norm(&b.adjoint().mul_vec(x));
            let ratio = if rhs > 0.0 { lhs / rhs } else { f64::INFINITY };
            out.expect(
                (ratio - alpha).abs() <= BOUND_SLACK,
                "douglas.alpha_attained",
                &[("alpha", alpha), ("sampled_ratio", ratio)],
            );
        }
    }
    if !inc.included {
        let ok = match &inc.witness {
            Some(w) => {
                let q = range_basis(b, tol)?;
                let outside = vector_norm(
                    &q.residual_of(&ComplexMatrix::from_columns(w.len(), &[w.clone()]))
                        .column(0),
                );
                outside > tol.residual_tol
            }
            None => false,
        };
        out.expect(ok, "douglas.witness_outside", &[("margin", inc.margin)]);
    }
    Ok(out)
}

// ---------------------------------------------------------------- t1c1

pub(crate) fn t1c1_trial(
    rng: &mut ChaCha8Rng,
    max_dim: usize,
    tol: &ToleranceContext,
) -> Result<TrialOutcome> {
    let n = trial_dim(rng, max_dim);
    let (t, resampled) = single(GeneratorKind::Ep, n, rng);
    let mut out = check_t1c1(&t, tol)?;
    out.resampled = resampled;
    Ok(out)
}

/// Every power of a posinormal and coposinormal matrix is again both.
/// Inputs that are not both are filtered, not failed.
pub fn check_t1c1(t: &ComplexMatrix, tol: &ToleranceContext) -> Result<TrialOutcome> {
    let th = t.adjoint();
    if !is_posinormal(t, tol)?.holds || !is_posinormal(&th, tol)?.holds {
        return Ok(TrialOutcome::filtered());
    }
    let mut out = TrialOutcome::default();
    for (n, p) in normalized_powers(t, MAX_POWER, tol)?
        .iter()
        .enumerate()
        .skip(1)
    {
        let pos = is_posinormal(p, tol)?.holds;
        let copos = is_posinormal(&p.adjoint(), tol)?.holds;
        out.expect(
            pos && copos,
            "t1c1.power_ep",
            &[
                ("n", n as f64),
                ("posinormal", flag(pos)),
                ("coposinormal", flag(copos)),
            ],
        );
    }
    Ok(out)
}

// ---------------------------------------------------------------- t3

pub(crate) fn t3_trial(
    rng: &mut ChaCha8Rng,
    max_dim: usize,
    tol: &ToleranceContext,
) -> Result<TrialOutcome> {
    let n = trial_dim(rng, max_dim);
    let (t, resampled) = single(GeneratorKind::CommutingGram, n, rng);
    let mut out = check_t3(&t, tol)?;
    out.resampled = resampled;
    Ok(out)
}

/// Constant chains for squares and cubes of a posinormal matrix.
///
/// With `a = alpha_min(T)` and `b` the best constant in
/// `||TT*x|| <= b ||T*Tx||`: `alpha_min(T^2) <= a^2 b`, and when the two
/// Gram matrices commute also `b <= a^2` and `alpha_min(T^3) <= a^9`.
pub fn check_t3(t: &ComplexMatrix, tol: &ToleranceContext) -> Result<TrialOutcome> {
    let Some(alpha) = alpha_min(t, tol)? else {
        return Ok(TrialOutcome::filtered());
    };
    let mut out = TrialOutcome::default();
    let th = t.adjoint();
    let tt = t * &th;
    let gram = &th * t;
    let inc = range_included(&tt, &gram, tol)?;
    let dom = psd_domination_alpha(&(&tt * &tt), &(&gram * &gram), tol)?;
    out.expect(
        inc.included == dom.is_finite(),
        "t3.gram_equivalence",
        &[("included", flag(inc.included)), ("beta_pencil", dom.alpha)],
    );
    let beta = opt(inc.alpha_min);
    let powers = normalized_powers(t, 3, tol)?;
    let alpha2 = opt(alpha_min(&powers[2], tol)?);
    out.expect(
        alpha2 <= alpha * alpha * beta + BOUND_SLACK,
        "t3.square_bound",
        &[("alpha", alpha), ("beta", beta), ("alpha_t2", alpha2)],
    );
    let scale = t.spectral_norm()?.powi(4);
    let commuting = (&(&tt * &gram) - &(&gram * &tt)).spectral_norm()? <= 1e-10 * scale;
    if commuting {
        let alpha3 = opt(alpha_min(&powers[3], tol)?);
        out.expect(
            beta <= alpha * alpha + BOUND_SLACK,
            "t3.commuting_beta",
            &[("alpha", alpha), ("beta", beta)],
        );
        out.expect(
            alpha3 <= alpha.powi(9) + BOUND_SLACK,
            "t3.cube_bound",
            &[("alpha", alpha), ("alpha_t3", alpha3)],
        );
    }
    Ok(out)
}

// ---------------------------------------------------------------- t4

pub(crate) fn t4_trial(
    rng: &mut ChaCha8Rng,
    max_dim: usize,
    tol: &ToleranceContext,
) -> Result<TrialOutcome> {
    let n = trial_dim(rng, max_dim);
    if rng.random_bool(0.5) {
        let (s, t, resampled) = pair(GeneratorKind::StarCommutingPair, n, rng);
        let mut out = check_t4_star(&s, &t, tol)?;
        out.resampled = resampled;
        Ok(out)
    } else {
        let (s, t, resampled) = pair(GeneratorKind::CommutingPair, n, rng);
        let mut out = check_t4_normal(&s, &t, tol)?;
        out.resampled = resampled;
        Ok(out)
    }
}

fn relative_commutator(x: &ComplexMatrix, y: &ComplexMatrix) -> Result<f64> {
    let scale = x.spectral_norm()? * y.spectral_norm()?;
    let d = (&(x * y) - &(y * x)).spectral_norm()?;
    Ok(if scale > 0.0 { d / scale } else { d })
}

/// `XY` with singular values below `rank_rel_tol ||X|| ||Y||` removed, so an
/// exactly vanishing product is not mistaken for its rounding noise.
fn clean_product(
    x: &ComplexMatrix,
    y: &ComplexMatrix,
    tol: &ToleranceContext,
) -> Result<ComplexMatrix> {
    let cutoff = tol.rank_rel_tol * x.spectral_norm()? * y.spectral_norm()?;
    Ok(RankRevealing::new(&(x * y), tol)?.truncated(cutoff))
}

fn product_bound(
    out: &mut TrialOutcome,
    s: &ComplexMatrix,
    t: &ComplexMatrix,
    tol: &ToleranceContext,
) -> Result<()> {
    let (Some(a_s), Some(a_t)) = (alpha_min(s, tol)?, alpha_min(t, tol)?) else {
        out.filtered = true;
        return Ok(());
    };
    let st = clean_product(s, t, tol)?;
    let a_st = alpha_min(&st, tol)?;
    out.expect(
        a_st.is_some_and(|a| a <= a_s * a_t + BOUND_SLACK),
        "t4.product_bound",
        &[("alpha_s", a_s), ("alpha_t", a_t), ("alpha_st", opt(a_st))],
    );
    if relative_commutator(s, t)? <= 1e-10 && a_st.is_some() {
        let mut contained = true;
        for x in [s, t, &s.adjoint(), &t.adjoint()] {
            contained &= range_included(&st, x, tol)?.included;
        }
        out.expect(
            contained,
            "t4.range_intersection",
            &[("contained", flag(contained))],
        );
    }
    Ok(())
}

/// Posinormal `S`, `T` with `TS* = S*T`: `ST` is posinormal and
/// `alpha_min(ST) <= alpha_min(S) alpha_min(T)`.
pub fn check_t4_star(
    s: &ComplexMatrix,
    t: &ComplexMatrix,
    tol: &ToleranceContext,
) -> Result<TrialOutcome> {
    if relative_commutator(t, &s.adjoint())? > 1e-10 {
        return Ok(TrialOutcome::filtered());
    }
    let mut out = TrialOutcome::default();
    product_bound(&mut out, s, t, tol)?;
    Ok(out)
}

/// Normal `S` commuting with posinormal `T`: `S*` commutes with `T` too,
/// and the product bound follows.
pub fn check_t4_normal(
    s: &ComplexMatrix,
    t: &ComplexMatrix,
    tol: &ToleranceContext,
) -> Result<TrialOutcome> {
    let normal_defect = relative_commutator(s, &s.adjoint())?;
    if normal_defect > 1e-10 || relative_commutator(s, t)? > 1e-10 {
        return Ok(TrialOutcome::filtered());
    }
    let mut out = TrialOutcome::default();
    let fuglede = relative_commutator(&s.adjoint(), t)?;
    out.expect(
        fuglede <= FUGLEDE_TOL,
        "t4.fuglede",
        &[("relative_residual", fuglede)],
    );
    product_bound(&mut out, s, t, tol)?;
    Ok(out)
}

// ---------------------------------------------------------------- t5

pub(crate) fn t5_trial(
    rng: &mut ChaCha8Rng,
    max_dim: usize,
    tol: &ToleranceContext,
) -> Result<TrialOutcome> {
    let n = trial_dim(rng, max_dim);
    let (t, resampled) = single(GeneratorKind::KernelInclusion, n, rng);
    let mut out = check_t5(&t, tol)?;
    out.resampled = resampled;
    Ok(out)
}

/// `N(T) ⊆ N(T*)` forces `N(T^n) = N(T) ⊆ N(T*^n)` for every `n`.
pub fn check_t5(t: &ComplexMatrix, tol: &ToleranceContext) -> Result<TrialOutcome> {
    if !is_quasiposinormal(t, tol)?.holds {
        return Ok(TrialOutcome::filtered());
    }
    let mut out = TrialOutcome::default();
    let profile = chain_profile(t, tol, MAX_POWER)?;
    out.expect(
        profile.ascent <= 1,
        "t5.ascent",
        &[("ascent", profile.ascent as f64)],
    );
    let powers = normalized_powers(t, MAX_POWER, tol)?;
    for (n, p) in powers.iter().enumerate().skip(1) {
        let dims_equal = profile.kernel_dims[n] == profile.kernel_dims[1];
        out.expect(
            dims_equal,
            "t5.kernel_chain",
            &[
                ("n", n as f64),
                ("dim_kernel_power", profile.kernel_dims[n] as f64),
                ("dim_kernel", profile.kernel_dims[1] as f64),
            ],
        );
        let k = kernel_basis(p, tol)?;
        let leak = if k.rank == 0 {
            0.0
        } else {
            (&p.adjoint() * &k.basis).spectral_norm()?
        };
        let quasi = is_quasiposinormal(p, tol)?.holds;
        out.expect(
            quasi && leak <= tol.residual_tol,
            "t5.power_quasiposinormal",
            &[("n", n as f64), ("adjoint_leak", leak)],
        );
    }
    Ok(out)
}

// ---------------------------------------------------------------- chains

pub(crate) fn chains_trial(
    rng: &mut ChaCha8Rng,
    max_dim: usize,
    tol: &ToleranceContext,
) -> Result<TrialOutcome> {
    let n = trial_dim(rng, max_dim);
    let kind = match rng.random_range(0..3) {
        0 => GeneratorKind::DenseGaussian,
        1 => GeneratorKind::NilpotentAugmented,
        _ => GeneratorKind::Ep,
    };
    let (t, resampled) = single(kind, n, rng);
    let mut out = check_chains(&t, tol)?;
    out.resampled = resampled;
    Ok(out)
}

/// Ascent equals descent, the power biconditionals agree for
/// `j, k ∈ {1, 2, 3}`, `asc(T*) <= dsc(T)`, and kernels and ranges are
/// stable from the ascent on.
pub fn check_chains(t: &ComplexMatrix, tol: &ToleranceContext) -> Result<TrialOutcome> {
    let mut out = TrialOutcome::default();
    let profile = chain_profile(t, tol, t.rows())?;
    out.expect(
        profile.ascent == profile.descent && profile.consistent,
        "chains.ascent_descent",
        &[
            ("ascent", profile.ascent as f64),
            ("descent", profile.descent as f64),
        ],
    );
    for j in 1..=3 {
        for k in 1..=3 {
            let r = check_power_indices(t, tol, j, k)?;
            out.expect(
                r.agree,
                "chains.power_biconditional",
                &[
                    ("j", j as f64),
                    ("k", k as f64),
                    ("ascent", r.ascent as f64),
                    ("ascent_of_power", r.ascent_of_power as f64),
                ],
            );
        }
    }
    let c = check_adjoint_ascent(t, tol)?;
    out.expect(
        c.holds,
        "chains.adjoint_ascent",
        &[
            ("adjoint_ascent", c.adjoint_ascent as f64),
            ("descent", c.descent as f64),
        ],
    );
    let stab = check_index_stabilization(t, tol, profile.ascent, t.rows() + 1)?;
    out.expect(
        stab.holds,
        "chains.stabilization",
        &[
            ("k", stab.k as f64),
            ("ranges_stable", flag(stab.ranges_stable)),
            ("kernels_stable", flag(stab.kernels_stable)),
        ],
    );
    Ok(out)
}

/// Ratio `||A*x|| / ||B*x||` at `x`, for tests.
pub fn sup_ratio_at(a: &ComplexMatrix, b: &ComplexMatrix, x: &[crate::numeric::Complex64]) -> f64 {
    vector_norm(&a.adjoint().mul_vec(x)) / vector_norm(&b.adjoint().mul_vec(x))
}
