//! Weighted shifts `e_k ↦ w_k e_{k+1}` analysed without truncation.
//!
//! `S^n S*^n` and `S*^n S^n` are diagonal, so posinormality of `S^n` comes
//! down to bounding ratios of window products of weights:
//!
//! ```text
//! s_n = sup_j  prod_{k=j+1}^{j+n} |w_k|  /  prod_{k=j+n+1}^{j+2n} |w_k|
//! ```
//!
//! `S^n` is posinormal exactly when `s_n` is finite, and then `s_n` is its
//! smallest constant. All products are accumulated as sums of logarithms.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::numeric::{Complex64, ComplexMatrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ShiftError {
    #[error("weight w_{index} is zero; the shift would not be injective")]
    ZeroWeight { index: i64 },
    #[error("invalid weight parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, ShiftError>;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", content = "param", rename_all = "kebab-case")]
pub enum WeightKind {
    /// `w_k = c`
    Constant(f64),
    /// `w_k = k^p`
    PowerLaw(f64),
    /// `w_k = 1/k`
    Reciprocal,
    /// Two-sided, `w_k = 1/max(|k|, 1)` for every integer `k`.
    BilateralReciprocal,
    /// `w_k = r^k`
    Geometric(f64),
    /// `w_k = list[(k - 1) mod len]`
    Explicit(Vec<f64>),
}

/// A validated weight sequence with no zero terms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightSequence {
    kind: WeightKind,
}

/// Label attached to output for the two-sided reciprocal weights.
pub const BILATERAL_ZERO_NOTE: &str = "weight at k = 0 taken as 1 (w_k = 1/max(|k|, 1))";

impl WeightSequence {
    pub fn new(kind: WeightKind) -> Result<Self> {
        let bad = |what: &str| Err(ShiftError::InvalidParameter(what.to_string()));
        match &kind {
            WeightKind::Constant(c) => {
                if !c.is_finite() {
                    return bad("constant weight must be finite");
                }
                if *c == 0.0 {
                    return Err(ShiftError::ZeroWeight { index: 1 });
                }
            }
            WeightKind::PowerLaw(p) if !p.is_finite() => return bad("exponent must be finite"),
            WeightKind::Geometric(r) => {
                if !r.is_finite() {
                    return bad("ratio must be finite");
                }
                if *r == 0.0 {
                    return Err(ShiftError::ZeroWeight { index: 1 });
                }
            }
            WeightKind::Explicit(list) => {
                if list.is_empty() {
                    return bad("weight list is empty");
                }
                if list.iter().any(|x| !x.is_finite()) {
                    return bad("weight list entries must be finite");
                }
                if let Some(pos) = list.iter().position(|&x| x == 0.0) {
                    return Err(ShiftError::ZeroWeight {
                        index: pos as i64 + 1,
                    });
                }
            }
            _ => {}
        }
        Ok(Self { kind })
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::new(WeightKind::Constant(c))
    }

    pub fn power_law(p: f64) -> Result<Self> {
        Self::new(WeightKind::PowerLaw(p))
    }

    pub fn reciprocal() -> Self {
        Self {
            kind: WeightKind::Reciprocal,
        }
    }

    pub fn bilateral_reciprocal() -> Self {
        Self {
            kind: WeightKind::BilateralReciprocal,
        }
    }

    pub fn geometric(r: f64) -> Result<Self> {
        Self::new(WeightKind::Geometric(r))
    }

    pub fn explicit(list: Vec<f64>) -> Result<Self> {
        Self::new(WeightKind::Explicit(list))
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    pub fn is_bilateral(&self) -> bool {
        matches!(self.kind, WeightKind::BilateralReciprocal)
    }

    pub fn note(&self) -> Option<&'static str> {
        self.is_bilateral().then_some(BILATERAL_ZERO_NOTE)
    }

    /// `w_k`. Unilateral sequences are indexed from `k = 1`.
    pub fn weight(&self, k: i64) -> f64 {
        match &self.kind {
            WeightKind::Constant(c) => *c,
            WeightKind::PowerLaw(p) => (k as f64).powf(*p),
            WeightKind::Reciprocal => 1.0 / k as f64,
            WeightKind::BilateralReciprocal => 1.0 / (k.unsigned_abs().max(1) as f64),
            WeightKind::Geometric(r) => r.powi(k as i32),
            WeightKind::Explicit(list) => list[(k - 1).rem_euclid(list.len() as i64) as usize],
        }
    }

    /// `ln |w_k|`, computed without forming `w_k` where possible.
    pub fn log_abs_weight(&self, k: i64) -> f64 {
        match &self.kind {
            WeightKind::Constant(c) => c.abs().ln(),
            WeightKind::PowerLaw(p) => p * (k as f64).ln(),
            WeightKind::Reciprocal => -(k as f64).ln(),
            WeightKind::BilateralReciprocal => -(k.unsigned_abs().max(1) as f64).ln(),
            WeightKind::Geometric(r) => k as f64 * r.abs().ln(),
            WeightKind::Explicit(_) => self.weight(k).abs().ln(),
        }
    }
}

impl fmt::Display for WeightSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            WeightKind::Constant(c) => write!(f, "const:{c}"),
            WeightKind::PowerLaw(p) => write!(f, "pow:{p}"),
            WeightKind::Reciprocal => write!(f, "recip"),
            WeightKind::BilateralReciprocal => write!(f, "bilrecip"),
            WeightKind::Geometric(r) => write!(f, "geom:{r}"),
            WeightKind::Explicit(list) => {
                let parts: Vec<String> = list.iter().map(|x| x.to_string()).collect();
                write!(f, "list:{}", parts.join(","))
            }
        }
    }
}

/// Diagonals of `S^n S*^n` and `S*^n S^n` for a unilateral shift.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GramDiagonals {
    pub n: usize,
    /// `(S^n S*^n)_{ii}`, `i = 1..=L`
    pub range_side: Vec<f64>,
    /// `(S*^n S^n)_{ii}`, `i = 1..=L`
    pub domain_side: Vec<f64>,
}

fn window_sq(w: &WeightSequence, from: i64, to: i64) -> f64 {
    (2.0 * (from..=to).map(|k| w.log_abs_weight(k)).sum::<f64>()).exp()
}

/// First `len` diagonal entries of both Gram powers.
pub fn shift_gram_diagonals(w: &WeightSequence, n: usize, len: usize) -> Result<GramDiagonals> {
    if w.is_bilateral() {
        return Err(ShiftError::InvalidParameter(
            "Gram diagonals are indexed for unilateral shifts".into(),
        ));
    }
    if n == 0 || len < 2 * n {
        return Err(ShiftError::InvalidParameter(format!(
            "need n >= 1 and L >= 2n, got n = {n}, L = {len}"
        )));
    }
    let n = n as i64;
    let range_side = (1..=len as i64)
        .map(|i| {
            if i <= n {
                0.0
            } else {
                window_sq(w, i - n, i - 1)
            }
        })
        .collect();
    let domain_side = (1..=len as i64)
        .map(|i| window_sq(w, i, i + n - 1))
        .collect();
    Ok(GramDiagonals {
        n: n as usize,
        range_side,
        domain_side,
    })
}

/// Posinormality analysis of `S^n`.
#[derive(Debug, Clone, Serialize)]
pub struct ShiftVerdict {
    pub weights: String,
    pub n: usize,
    /// `s_n`, or infinity.
    pub sup_value: f64,
    pub infinite: bool,
    pub horizon: usize,
    /// Whether the value is exact rather than a horizon estimate.
    pub closed_form: bool,
    /// `s_1`
    pub base_sup: f64,
    /// `sup_k |w_k| / |w_{k+n}|`
    pub step_sup: f64,
    /// `step_sup^n`
    pub step_bound: f64,
    /// `s_1^{n^2}`
    pub bound_n_squared: f64,
    /// `s_n <= step_sup^n <= s_1^{n^2}` (vacuous if `s_1` is infinite).
    pub bound_holds: bool,
    pub note: Option<&'static str>,
}

/// Posinormality verdict for `S^n` and its adjoint.
#[derive(Debug, Clone, Serialize)]
pub struct ShiftPosinormality {
    pub posinormal: bool,
    /// Smallest posinormality constant of `S^n` (equals `s_n`).
    pub alpha: Option<f64>,
    pub coposinormal: bool,
    pub coposinormal_alpha: Option<f64>,
    pub verdict: ShiftVerdict,
}

/// Sup of the supplied log ratios together with the sup over the first half
/// of the range, for the divergence heuristic.
struct Scan {
    sup: f64,
    half_sup: f64,
}

fn scan(count: usize, mut log_ratio: impl FnMut(i64) -> f64) -> Scan {
    let mut sup = f64::NEG_INFINITY;
    let mut half_sup = f64::NEG_INFINITY;
    for j in 0..count as i64 {
        let v = log_ratio(j);
        sup = sup.max(v);
        if (j as usize) <= count / 2 {
            half_sup = half_sup.max(v);
        }
    }
    Scan { sup, half_sup }
}

/// Growth by more than this factor over the second half of the horizon is
/// read as divergence.
pub const DIVERGENCE_FACTOR: f64 = 10.0;

struct Estimate {
    value: f64,
    infinite: bool,
}

fn estimate(s: Scan) -> Estimate {
    let infinite = s.sup - s.half_sup > DIVERGENCE_FACTOR.ln();
    Estimate {
        value: if infinite { f64::INFINITY } else { s.sup.exp() },
        infinite,
    }
}

/// Prefix sums `P[m] = sum_{k=1}^{m} ln|w_k|`, `m = 0..=upto`.
fn log_prefix(w: &WeightSequence, upto: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(upto + 1);
    out.push(0.0);
    let mut acc = 0.0;
    for k in 1..=upto as i64 {
        acc += w.log_abs_weight(k);
        out.push(acc);
    }
    out
}

/// Brute-force `ln s_n` over `j = 0..=horizon` for a unilateral sequence.
pub fn scan_window_log_sup(w: &WeightSequence, n: usize, horizon: usize) -> f64 {
    let p = log_prefix(w, horizon + 2 * n);
    scan(horizon + 1, |j| {
        let j = j as usize;
        (p[j + n] - p[j]) - (p[j + 2 * n] - p[j + n])
    })
    .sup
}

fn log_binomial_central(n: usize) -> f64 {
    (1..=n).map(|i| ((n + i) as f64 / i as f64).ln()).sum()
}

/// Exact `ln s_n`, `ln sup_k |w_k/w_{k+n}|` for kinds where the sup has a
/// closed form.
fn closed_forms(w: &WeightSequence, n: usize) -> Option<(f64, f64)> {
    let nf = n as f64;
    match w.kind() {
        WeightKind::Constant(_) => Some((0.0, 0.0)),
        WeightKind::PowerLaw(p) if *p >= 0.0 => Some((0.0, 0.0)),
        WeightKind::PowerLaw(p) => Some((-p * log_binomial_central(n), -p * (1.0 + nf).ln())),
        WeightKind::Reciprocal => Some((log_binomial_central(n), (1.0 + nf).ln())),
        WeightKind::Geometric(r) => {
            let lr = r.abs().ln();
            Some((-nf * nf * lr, -nf * lr))
        }
        _ => None,
    }
}

/// Linear-scale counterparts of [`closed_forms`]. Products of small
/// integers stay exact in `f64`, so `recip` yields `C(2n, n)` exactly.
fn closed_values(w: &WeightSequence, n: usize) -> Option<(f64, f64)> {
    let nf = n as f64;
    let central = || (1..=n).fold(1.0_f64, |c, i| c * (n + i) as f64 / i as f64);
    match w.kind() {
        WeightKind::Constant(_) => Some((1.0, 1.0)),
        WeightKind::PowerLaw(p) if *p >= 0.0 => Some((1.0, 1.0)),
        WeightKind::PowerLaw(p) => Some((central().powf(-p), (1.0 + nf).powf(-p))),
        WeightKind::Reciprocal => Some((central(), 1.0 + nf)),
        WeightKind::Geometric(r) => Some((r.abs().powf(-nf * nf), r.abs().powf(-nf))),
        _ => None,
    }
    .filter(|(a, b)| a.is_finite() && b.is_finite() && *a > 0.0 && *b > 0.0)
}

/// Two-sided window ratio for the reciprocal bilateral weights. Beyond
/// `|j| > 2n + 2` all window indices share a sign and the ratio tends
/// monotonically to 1, so scanning the middle and including the limit is
/// exact.
fn bilateral_log_sup(w: &WeightSequence, n: usize, adjoint: bool) -> f64 {
    let n = n as i64;
    let reach = 2 * n + 2;
    let mut sup = 0.0_f64;
    for j in -reach..=reach {
        let near: f64 = (j + 1..=j + n).map(|k| w.log_abs_weight(k)).sum();
        let far: f64 = (j + n + 1..=j + 2 * n).map(|k| w.log_abs_weight(k)).sum();
        sup = sup.max(if adjoint { far - near } else { near - far });
    }
    sup
}

fn bilateral_log_step(w: &WeightSequence, n: usize) -> f64 {
    let n = n as i64;
    let reach = n + 2;
    (-reach..=reach)
        .map(|k| w.log_abs_weight(k) - w.log_abs_weight(k + n))
        .fold(0.0, f64::max)
}

/// Relative slack for the bound chain, which is an equality for some kinds.
const BOUND_SLACK: f64 = 1e-12;

/// Computes `s_n` and the bound chain `s_n <= (sup_k |w_k/w_{k+n}|)^n <= s_1^{n^2}`.
pub fn shift_power_sup(w: &WeightSequence, n: usize, horizon: usize) -> Result<ShiftVerdict> {
    if n == 0 || horizon == 0 {
        return Err(ShiftError::InvalidParameter(format!(
            "need n >= 1 and horizon >= 1, got n = {n}, horizon = {horizon}"
        )));
    }
    let (log_sn, log_step, log_s1, infinite, s1_infinite, closed_form) = if w.is_bilateral() {
        let ln = bilateral_log_sup(w, n, false);
        let l1 = bilateral_log_sup(w, 1, false);
        (ln, bilateral_log_step(w, n), l1, false, false, true)
    } else if let (Some((ln, lstep)), Some((l1, _))) = (closed_forms(w, n), closed_forms(w, 1)) {
        (ln, lstep, l1, false, false, true)
    } else {
        let p = log_prefix(w, horizon + 2 * n);
        let sn = estimate(scan(horizon + 1, |j| {
            let j = j as usize;
            (p[j + n] - p[j]) - (p[j + 2 * n] - p[j + n])
        }));
        let step = estimate(scan(horizon + n, |k| {
            let k = k as usize + 1;
            p[k] - p[k - 1] - (p[k + n] - p[k + n - 1])
        }));
        let s1 = estimate(scan(horizon + 2 * n - 1, |k| {
            let k = k as usize + 1;
            (p[k] - p[k - 1]) - (p[k + 1] - p[k])
        }));
        let ln = if sn.infinite {
            f64::INFINITY
        } else {
            sn.value.ln()
        };
        let lstep = if step.infinite {
            f64::INFINITY
        } else {
            step.value.ln()
        };
        let l1 = if s1.infinite {
            f64::INFINITY
        } else {
            s1.value.ln()
        };
        (ln, lstep, l1, sn.infinite, s1.infinite, false)
    };
    let nf = n as f64;
    let exact = |m| {
        if closed_form && !w.is_bilateral() {
            closed_values(w, m)
        } else {
            None
        }
    };
    let (sup_value, step_sup) = exact(n).unwrap_or((log_sn.exp(), log_step.exp()));
    let base_sup = exact(1).map_or(log_s1.exp(), |v| v.0);
    let step_bound = step_sup.powf(nf);
    let bound_n_squared = base_sup.powf(nf * nf);
    let slack = |a: f64, b: f64| a <= b + BOUND_SLACK * b.abs().max(1.0);
    let bound_holds =
        s1_infinite || (slack(log_sn, nf * log_step) && slack(nf * log_step, nf * nf * log_s1));
    Ok(ShiftVerdict {
        weights: w.to_string(),
        n,
        sup_value,
        infinite,
        horizon,
        closed_form,
        base_sup,
        step_sup,
        step_bound,
        bound_n_squared,
        bound_holds,
        note: w.note(),
    })
}

/// `S^n` is posinormal iff `s_n < ∞`, with constant `s_n`. Unilateral
/// shifts are never coposinormal (`S*` has a kernel, `S` does not); the
/// bilateral sequence is checked through the adjoint window ratio.
pub fn shift_posinormal(
    w: &WeightSequence,
    n: usize,
    horizon: usize,
) -> Result<ShiftPosinormality> {
    let verdict = shift_power_sup(w, n, horizon)?;
    let posinormal = !verdict.infinite;
    let (coposinormal, coposinormal_alpha) = if w.is_bilateral() {
        (true, Some(bilateral_log_sup(w, n, true).exp()))
    } else {
        (false, None)
    };
    Ok(ShiftPosinormality {
        posinormal,
        alpha: posinormal.then_some(verdict.sup_value),
        coposinormal,
        coposinormal_alpha,
        verdict,
    })
}

/// Finite section of the shift. Unilateral: `L x L` with `w_1..w_{L-1}` on
/// the subdiagonal. Bilateral: `(2L+1) x (2L+1)` on basis `e_{-L}..e_L`,
/// with `e_k ↦ w_k e_{k+1}` for `k = -L..L-1`.
pub fn build_shift_truncation(w: &WeightSequence, len: usize) -> Result<ComplexMatrix> {
    if len < 2 {
        return Err(ShiftError::InvalidParameter(format!(
            "truncation length must be >= 2, got {len}"
        )));
    }
    let (size, first) = if w.is_bilateral() {
        (2 * len + 1, -(len as i64))
    } else {
        (len, 1)
    };
    let mut m = ComplexMatrix::zeros(size, size);
    for b in 0..size - 1 {
        m.set(b + 1, b, Complex64::new(w.weight(first + b as i64), 0.0));
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gram_diagonal_examples() {
        let g = shift_gram_diagonals(&WeightSequence::constant(1.0).unwrap(), 2, 5).unwrap();
        assert_eq!(g.range_side, vec![0.0, 0.0, 1.0, 1.0, 1.0]);
        assert_eq!(g.domain_side, vec![1.0; 5]);
        let g = shift_gram_diagonals(&WeightSequence::reciprocal(), 1, 4).unwrap();
        let expect_range = [0.0, 1.0, 0.25, 1.0 / 9.0];
        let expect_domain = [1.0, 0.25, 1.0 / 9.0, 1.0 / 16.0];
        for i in 0..4 {
            assert!((g.range_side[i] - expect_range[i]).abs() < 1e-15);
            assert!((g.domain_side[i] - expect_domain[i]).abs() < 1e-15);
        }
        assert!(shift_gram_diagonals(&WeightSequence::reciprocal(), 3, 5).is_err());
    }

    #[test]
    fn reciprocal_sups_are_central_binomials() {
        let w = WeightSequence::reciprocal();
        for (n, expect) in [(1, 2.0), (2, 6.0), (3, 20.0)] {
            let v = shift_power_sup(&w, n, 64).unwrap();
            assert!(v.closed_form && v.bound_holds);
            assert!(
                (v.sup_value - expect).abs() < 1e-12 * expect,
                "n = {n}: {}",
                v.sup_value
            );
            assert!((scan_window_log_sup(&w, n, 200).exp() - expect).abs() < 1e-12 * expect);
        }
        let v = shift_power_sup(&w, 2, 64).unwrap();
        assert_eq!(v.bound_n_squared, 16.0);
        assert!((v.step_bound - 9.0).abs() < 1e-12);
    }

    #[test]
    fn rapidly_decaying_list_diverges() {
        let list: Vec<f64> = (1..=30).map(|k: i32| 2f64.powi(-k * k)).collect();
        let w = WeightSequence::explicit(list).unwrap();
        let v = shift_power_sup(&w, 1, 20).unwrap();
        assert!(v.infinite && !v.closed_form);
        assert!(!shift_posinormal(&w, 1, 20).unwrap().posinormal);
    }

    #[test]
    fn periodic_list_is_finite() {
        let w = WeightSequence::explicit(vec![1.0, 0.5, 2.0]).unwrap();
        let v = shift_power_sup(&w, 1, 60).unwrap();
        assert!(!v.infinite);
        assert!((v.sup_value - 2.0).abs() < 1e-12);
        assert!(v.bound_holds);
    }

    #[test]
    fn unit_weights_are_isometric() {
        let w = WeightSequence::constant(1.0).unwrap();
        for n in 1..8 {
            let p = shift_posinormal(&w, n, 16).unwrap();
            assert!(p.posinormal && !p.coposinormal);
            assert_eq!(p.alpha, Some(1.0));
        }
    }

    #[test]
    fn bilateral_reciprocal_both_ways() {
        let w = WeightSequence::bilateral_reciprocal();
        let p = shift_posinormal(&w, 1, 16).unwrap();
        assert!(p.posinormal && p.coposinormal);
        assert!((p.alpha.unwrap() - 2.0).abs() < 1e-12);
        assert!(p.verdict.note.is_some());
    }

    #[test]
    fn geometric_growth_is_exact() {
        let w = WeightSequence::geometric(2.0).unwrap();
        let v = shift_power_sup(&w, 3, 10).unwrap();
        assert!((v.sup_value - 2f64.powi(-9)).abs() < 1e-15);
        assert!(v.bound_holds);
        let w = WeightSequence::geometric(0.5).unwrap();
        let v = shift_power_sup(&w, 2, 10).unwrap();
        assert!((v.sup_value - 16.0).abs() < 1e-12);
    }

    #[test]
    fn zero_weights_rejected() {
        assert_eq!(
            WeightSequence::explicit(vec![1.0, 0.0, 1.0]),
            Err(ShiftError::ZeroWeight { index: 2 })
        );
        assert!(WeightSequence::constant(0.0).is_err());
        assert!(WeightSequence::geometric(0.0).is_err());
    }

    #[test]
    fn truncation_layouts() {
        let m = build_shift_truncation(&WeightSequence::constant(1.0).unwrap(), 3).unwrap();
        assert_eq!(
            m,
            ComplexMatrix::from_real_rows(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
                .unwrap()
        );
        let m =
            build_shift_truncation(&WeightSequence::explicit(vec![1.0, 0.5]).unwrap(), 3).unwrap();
        assert_eq!((m.get(1, 0).re, m.get(2, 1).re), (1.0, 0.5));
        let m = build_shift_truncation(&WeightSequence::bilateral_reciprocal(), 2).unwrap();
        assert_eq!(m.rows(), 5);
        let sub: Vec<f64> = (0..4).map(|i| m.get(i + 1, i).re).collect();
        assert_eq!(sub, vec![0.5, 1.0, 1.0, 1.0]);
    }
}
