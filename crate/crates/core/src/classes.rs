//! Membership tests for the posinormal family and its neighbours.
//!
//! Every verdict here is about the matrix itself. A truncated shift, for
//! instance, is nilpotent and fails tests its infinite parent passes, so
//! reports carry [`SCOPE`] to make that explicit.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::douglas::range_included;
use crate::numeric::{
    hermitian_eigen, kernel_basis, numerical_rank, Complex64, ComplexMatrix, RankRevealing, Result,
    ToleranceContext,
};

/// Label attached to every verdict.
pub const SCOPE: &str = "finite-dimensional";

/// Relative gap below which eigenvalues are treated as one cluster.
pub const EIGEN_CLUSTER_GAP: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct PosinormalVerdict {
    pub holds: bool,
    /// Smallest `a` with `TT* <= a^2 T*T`; absent when the verdict fails.
    pub alpha_min: Option<f64>,
    /// Unit `x` with `Tx ≈ 0` but `T*x ≠ 0` when the verdict fails.
    pub witness: Option<Vec<Complex64>>,
    pub scope: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub holds: bool,
    pub scope: &'static str,
}

impl Verdict {
    fn new(holds: bool) -> Self {
        Self {
            holds,
            scope: SCOPE,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HyponormalVerdict {
    pub holds: bool,
    /// Smallest eigenvalue of `T*T - TT*`.
    pub min_eigenvalue: f64,
    /// Eigenvector for `min_eigenvalue` when the verdict fails.
    pub witness: Option<Vec<Complex64>>,
    pub scope: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenvalueAlphaEntry {
    pub lambda: Complex64,
    pub multiplicity: usize,
    /// Posinormality constant of `lambda I - T`; absent means infinite.
    pub alpha_lambda: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DominanceVerdict {
    pub holds: bool,
    pub table: Vec<EigenvalueAlphaEntry>,
    /// Kernel-gap certificate for the first failing eigenvalue.
    pub witness: Option<Vec<Complex64>>,
    pub scope: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationReport {
    pub dim: usize,
    pub posinormal: PosinormalVerdict,
    pub coposinormal: PosinormalVerdict,
    pub quasiposinormal: Verdict,
    pub coquasiposinormal: Verdict,
    pub hyponormal: Verdict,
    pub cohyponormal: Verdict,
    pub normal: Verdict,
    pub dominant: DominanceVerdict,
    pub codominant: Verdict,
    pub invertible: Verdict,
    /// Certificates keyed by the name of each failed class.
    pub witnesses: BTreeMap<String, Vec<Complex64>>,
}

/// `R(T) ⊆ R(T*)`, with the minimal constant or a kernel-gap witness.
pub fn is_posinormal(t: &ComplexMatrix, tol: &ToleranceContext) -> Result<PosinormalVerdict> {
    t.ensure_square()?;
    let th = t.adjoint();
    let res = range_included(t, &th, tol)?;
    if res.included {
        return Ok(PosinormalVerdict {
            holds: true,
            alpha_min: res.alpha_min,
            witness: None,
            scope: SCOPE,
        });
    }
    let witness = kernel_gap_witness(t, &th, tol)?.or(res.witness);
    Ok(PosinormalVerdict {
        holds: false,
        alpha_min: None,
        witness,
        scope: SCOPE,
    })
}

/// Unit vector of `N(T)` on which `T*` is largest.
fn kernel_gap_witness(
    t: &ComplexMatrix,
    th: &ComplexMatrix,
    tol: &ToleranceContext,
) -> Result<Option<Vec<Complex64>>> {
    let k = kernel_basis(t, tol)?;
    if k.rank == 0 {
        return Ok(None);
    }
    let image = th * &k.basis;
    let rr = RankRevealing::new(&image, tol)?;
    if rr.sigma_max() == 0.0 {
        return Ok(None);
    }
    let (_, y) = rr.top_singular_pair();
    Ok(Some(k.basis.mul_vec(&y)))
}

/// Posinormality of the adjoint: `R(T*) ⊆ R(T)`.
pub fn is_coposinormal(t: &ComplexMatrix, tol: &ToleranceContext) -> Result<PosinormalVerdict> {
    is_posinormal(&t.adjoint(), tol)
}

/// `N(T) ⊆ N(T*)`.
pub fn is_quasiposinormal(t: &ComplexMatrix, tol: &ToleranceContext) -> Result<Verdict> {
    t.ensure_square()?;
    let k = kernel_basis(t, tol)?;
    if k.rank == 0 {
        return Ok(Verdict::new(true));
    }
    let leak = (&t.adjoint() * &k.basis).spectral_norm()?;
    Ok(Verdict::new(leak <= tol.residual_tol * t.spectral_norm()?))
}

struct CommutatorSpectrum {
    min: f64,
    max: f64,
    min_vec: Vec<Complex64>,
    max_vec: Vec<Complex64>,
    scale: f64,
}

/// Extreme eigenpairs of the self-commutator `T*T - TT*`.
fn self_commutator(t: &ComplexMatrix, tol: &ToleranceContext) -> Result<CommutatorSpectrum> {
    let n = t.ensure_square()?;
    let th = t.adjoint();
    let d = &(&th * t) - &(t * &th);
    let norm_t = t.spectral_norm()?;
    let scale = norm_t * norm_t;
    if n == 0 || scale == 0.0 {
        return Ok(CommutatorSpectrum {
            min: 0.0,
            max: 0.0,
            min_vec: vec![Complex64::new(0.0, 0.0); n],
            max_vec: vec![Complex64::new(0.0, 0.0); n],
            scale,
        });
    }
    let eig = hermitian_eigen(&d, tol, Some(scale))?;
    Ok(CommutatorSpectrum {
        min: eig.min(),
        max: eig.max(),
        min_vec: eig.eigenvectors.column(0),
        max_vec: eig.eigenvectors.column(n - 1),
        scale,
    })
}

/// `TT* <= T*T`.
pub fn is_hyponormal(t: &ComplexMatrix, tol: &ToleranceContext) -> Result<HyponormalVerdict> {
    let s = self_commutator(t, tol)?;
    let holds = s.min >= -tol.psd_tol * s.scale;
    Ok(HyponormalVerdict {
        holds,
        min_eigenvalue: s.min,
        witness: (!holds).then_some(s.min_vec),
        scope: SCOPE,
    })
}

/// `T*T <= TT*`.
pub fn is_cohyponormal(t: &ComplexMatrix, tol: &ToleranceContext) -> Result<HyponormalVerdict> {
    let s = self_commutator(t, tol)?;
    let holds = s.max <= tol.psd_tol * s.scale;
    Ok(HyponormalVerdict {
        holds,
        min_eigenvalue: -s.max,
        witness: (!holds).then_some(s.max_vec),
        scope: SCOPE,
    })
}

/// Groups eigenvalues closer than `gap` (single linkage) and returns each
/// cluster's mean and size, in a deterministic order.
pub fn cluster_eigenvalues(values: &[Complex64], gap: f64) -> Vec<(Complex64, usize)> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (values[i] - values[j]).norm() <= gap {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<Complex64>> = BTreeMap::new();
    for (i, &v) in values.iter().enumerate() {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(v);
    }
    let mut out: Vec<(Complex64, usize)> = groups
        .into_values()
        .map(|g| {
            let sum: Complex64 = g.iter().sum();
            (sum / g.len() as f64, g.len())
        })
        .collect();
    out.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
    out
}

/// `lambda I - T` posinormal for every eigenvalue `lambda`; away from the
/// spectrum `lambda I - T` is invertible and needs no test.
pub fn is_dominant(t: &ComplexMatrix, tol: &ToleranceContext) -> Result<DominanceVerdict> {
    t.ensure_square()?;
    let gap = EIGEN_CLUSTER_GAP * t.spectral_norm()?;
    let clusters = cluster_eigenvalues(&t.eigenvalues()?, gap);
    let mut table = Vec::with_capacity(clusters.len());
    let mut witness = None;
    for (lambda, multiplicity) in clusters {
        let v = is_posinormal(&t.shifted(lambda), tol)?;
        if !v.holds && witness.is_none() {
            witness = v.witness.clone();
        }
        table.push(EigenvalueAlphaEntry {
            lambda,
            multiplicity,
            alpha_lambda: v.alpha_min,
        });
    }
    Ok(DominanceVerdict {
        holds: table.iter().all(|e| e.alpha_lambda.is_some()),
        table,
        witness,
        scope: SCOPE,
    })
}

/// Dominance of the adjoint.
pub fn is_codominant(t: &ComplexMatrix, tol: &ToleranceContext) -> Result<DominanceVerdict> {
    is_dominant(&t.adjoint(), tol)
}

/// Full report across all classes.
pub fn classify(t: &ComplexMatrix, tol: &ToleranceContext) -> Result<ClassificationReport> {
    let dim = t.ensure_square()?;
    let ((posinormal, coposinormal), (quasi, coquasi)) = rayon::join(
        || (is_posinormal(t, tol), is_coposinormal(t, tol)),
        || {
            (
                is_quasiposinormal(t, tol),
                is_quasiposinormal(&t.adjoint(), tol),
            )
        },
    );
    let (posinormal, coposinormal, quasi, coquasi) = (posinormal?, coposinormal?, quasi?, coquasi?);
    let hypo = is_hyponormal(t, tol)?;
    let cohypo = is_cohyponormal(t, tol)?;
    let (dominant, codominant) = rayon::join(|| is_dominant(t, tol), || is_codominant(t, tol));
    let (dominant, codominant) = (dominant?, codominant?);
    let invertible = numerical_rank(t, tol)? == dim;

    let mut witnesses = BTreeMap::new();
    let mut record = |name: &str, w: &Option<Vec<Complex64>>| {
        if let Some(w) = w {
            witnesses.insert(name.to_string(), w.clone());
        }
    };
    record("posinormal", &posinormal.witness);
    record("coposinormal", &coposinormal.witness);
    if !quasi.holds {
        record("quasiposinormal", &posinormal.witness);
    }
    if !coquasi.holds {
        record("coquasiposinormal", &coposinormal.witness);
    }
    record("hyponormal", &hypo.witness);
    record("cohyponormal", &cohypo.witness);
    if !(hypo.holds && cohypo.holds) {
        record(
            "normal",
            if hypo.holds {
                &cohypo.witness
            } else {
                &hypo.witness
            },
        );
    }
    record("dominant", &dominant.witness);
    record("codominant", &codominant.witness);

    Ok(ClassificationReport {
        dim,
        posinormal,
        coposinormal,
        quasiposinormal: quasi,
        coquasiposinormal: coquasi,
        hyponormal: Verdict::new(hypo.holds),
        cohyponormal: Verdict::new(cohypo.holds),
        normal: Verdict::new(hypo.holds && cohypo.holds),
        dominant,
        codominant: Verdict::new(codominant.holds),
        invertible: Verdict::new(invertible),
        witnesses,
    })
}

/// Posinormality constant, or `None` when not posinormal.
pub fn alpha_min(t: &ComplexMatrix, tol: &ToleranceContext) -> Result<Option<f64>> {
    Ok(is_posinormal(t, tol)?.alpha_min)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(rows: &[&[f64]]) -> ComplexMatrix {
        ComplexMatrix::from_real_rows(rows).unwrap()
    }

    #[test]
    fn jordan_two_by_two_is_posinormal_with_golden_ratio() {
        let tol = ToleranceContext::default();
        let v = is_posinormal(&real(&[&[1.0, 1.0], &[0.0, 1.0]]), &tol).unwrap();
        assert!(v.holds);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((v.alpha_min.unwrap() - phi).abs() < 1e-12);
    }

    #[test]
    fn nilpotent_fails_with_e1_witness() {
        let tol = ToleranceContext::default();
        let v = is_posinormal(&real(&[&[0.0, 1.0], &[0.0, 0.0]]), &tol).unwrap();
        assert!(!v.holds);
        let w = v.witness.unwrap();
        assert!((w[0].norm() - 1.0).abs() < 1e-12 && w[1].norm() < 1e-12);
    }

    #[test]
    fn zero_is_posinormal_with_zero_constant() {
        let v = is_posinormal(&ComplexMatrix::zeros(3, 3), &ToleranceContext::default()).unwrap();
        assert!(v.holds);
        assert_eq!(v.alpha_min, Some(0.0));
    }

    #[test]
    fn quasiposinormal_examples() {
        let tol = ToleranceContext::default();
        assert!(
            is_quasiposinormal(&real(&[&[2.0, 1.0], &[1.0, 1.0]]), &tol)
                .unwrap()
                .holds
        );
        assert!(
            !is_quasiposinormal(&real(&[&[0.0, 1.0], &[0.0, 0.0]]), &tol)
                .unwrap()
                .holds
        );
        assert!(
            is_quasiposinormal(&ComplexMatrix::from_real_diagonal(&[0.0, 1.0]), &tol)
                .unwrap()
                .holds
        );
    }

    #[test]
    fn truncated_shift_is_not_hyponormal() {
        let tol = ToleranceContext::default();
        let mut j = ComplexMatrix::zeros(4, 4);
        for i in 0..3 {
            j.set(i + 1, i, Complex64::new(1.0, 0.0));
        }
        let d = &(&j.adjoint() * &j) - &(&j * &j.adjoint());
        assert_eq!(d, ComplexMatrix::from_real_diagonal(&[1.0, 0.0, 0.0, -1.0]));
        let v = is_hyponormal(&j, &tol).unwrap();
        assert!(!v.holds);
        assert!((v.min_eigenvalue + 1.0).abs() < 1e-14);
        assert!(
            !is_hyponormal(&real(&[&[1.0, 1.0], &[0.0, 1.0]]), &tol)
                .unwrap()
                .holds
        );
    }

    #[test]
    fn dominance_examples() {
        let tol = ToleranceContext::default();
        let d = is_dominant(&real(&[&[1.0, 1.0], &[0.0, 1.0]]), &tol).unwrap();
        assert!(!d.holds);
        assert_eq!(d.table.len(), 1);
        assert!((d.table[0].lambda - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert_eq!(d.table[0].multiplicity, 2);
        let t = real(&[&[2.0, 1.0], &[0.0, 2.0]]);
        assert!(!is_dominant(&t, &tol).unwrap().holds);
        assert!(is_posinormal(&t, &tol).unwrap().holds);
        let c = |re, im| Complex64::new(re, im);
        let n = ComplexMatrix::from_diagonal(&[c(1.0, 1.0), c(1.0, 1.0), c(-2.0, 0.5)]);
        let d = is_dominant(&n, &tol).unwrap();
        assert!(d.holds);
        assert_eq!(d.table.len(), 2);
    }

    #[test]
    fn classify_jordan_block() {
        let r = classify(
            &real(&[&[1.0, 1.0], &[0.0, 1.0]]),
            &ToleranceContext::default(),
        )
        .unwrap();
        assert!(r.invertible.holds && r.posinormal.holds && r.coposinormal.holds);
        assert!(!r.dominant.holds && !r.hyponormal.holds && !r.normal.holds);
        assert!(r.witnesses.contains_key("dominant"));
        assert!(!r.witnesses.contains_key("posinormal"));
    }

    #[test]
    fn classify_nilpotent_fails_everything() {
        let r = classify(
            &real(&[&[0.0, 1.0], &[0.0, 0.0]]),
            &ToleranceContext::default(),
        )
        .unwrap();
        for holds in [
            r.posinormal.holds,
            r.coposinormal.holds,
            r.quasiposinormal.holds,
            r.coquasiposinormal.holds,
            r.hyponormal.holds,
            r.cohyponormal.holds,
            r.normal.holds,
            r.dominant.holds,
            r.codominant.holds,
            r.invertible.holds,
        ] {
            assert!(!holds);
        }
    }

    #[test]
    fn clustering_merges_close_values() {
        let c = |re| Complex64::new(re, 0.0);
        let groups = cluster_eigenvalues(&[c(1.0), c(1.0 + 1e-12), c(3.0), c(1.0 - 1e-12)], 1e-8);
        assert_eq!(groups.len(), 2);
        assert_eq!(groups[0].1, 3);
    }
}
