//! Concrete constructions: the projection pair `P`, `P_k` and the block
//! operators built from them, plus a few small classification exemplars.
//!
//! With `A = ⊕_k P` and `B = ⊕_k (P + P_k)` one has `O <= A <= B`, yet the
//! best constant in `A <= a^2 B^2` grows like `sqrt(K)` over `K` blocks.
//! In infinite dimensions this is what makes a subdiagonal operator built
//! from `A^{1/2}` and `B^{1/2}` posinormal while its square is not.

use serde::Serialize;
use thiserror::Error;

use crate::douglas::{psd_domination_alpha, range_included};
use crate::numeric::{
    is_psd, psd_sqrt, range_basis, subspaces_equal, Complex64, ComplexMatrix, NumericError,
    SubspaceBasis, ToleranceContext, SUBSPACE_ANGLE_TOL,
};
use crate::shifts::{build_shift_truncation, WeightSequence};

/// Largest matrix dimension any construction here will allocate.
pub const MAX_DIM: usize = 4096;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GalleryError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("matrix dimension {dim} exceeds the limit {limit}")]
    ResourceLimit { dim: usize, limit: usize },
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

pub type Result<T> = std::result::Result<T, GalleryError>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `P = diag(1, 0)` and `P_k = (1/k) [[k-1, sqrt(k-1)], [sqrt(k-1), 1]]`.
pub fn build_p_pk(k: usize) -> Result<(ComplexMatrix, ComplexMatrix)> {
    if k == 0 {
        return Err(GalleryError::InvalidConfig(
            "block index k must be >= 1".into(),
        ));
    }
    let kf = k as f64;
    let s = (kf - 1.0).sqrt();
    let p = ComplexMatrix::from_real_diagonal(&[1.0, 0.0]);
    let pk = ComplexMatrix::from_real_rows(&[[(kf - 1.0) / kf, s / kf], [s / kf, 1.0 / kf]])?;
    for m in [&p, &pk] {
        let idempotent = (m * m).max_abs_diff(m);
        let hermitian = m.max_abs_diff(&m.adjoint());
        if idempotent > 1e-12 || hermitian > 1e-12 {
            return Err(NumericError::Precondition(format!(
                "projection check failed for k = {k}: idempotence {idempotent:.3e}, symmetry {hermitian:.3e}"
            ))
            .into());
        }
    }
    Ok((p, pk))
}

/// `A = ⊕_{k=1}^{K} P` and `B = ⊕_{k=1}^{K} (P + P_k)`, with `B - A >= 0`
/// checked.
pub fn build_ab(k_blocks: usize, tol: &ToleranceContext) -> Result<(ComplexMatrix, ComplexMatrix)> {
    if k_blocks == 0 {
        return Err(GalleryError::InvalidConfig("K must be >= 1".into()));
    }
    if 2 * k_blocks > MAX_DIM {
        return Err(GalleryError::ResourceLimit {
            dim: 2 * k_blocks,
            limit: MAX_DIM,
        });
    }
    let mut a_blocks = Vec::with_capacity(k_blocks);
    let mut b_blocks = Vec::with_capacity(k_blocks);
    for k in 1..=k_blocks {
        let (p, pk) = build_p_pk(k)?;
        // B - A is block diagonal with blocks P_k, so positivity is blockwise.
        if !is_psd(&pk, tol)?.psd {
            return Err(
                NumericError::Precondition(format!("B - A fails positivity at block {k}")).into(),
            );
        }
        b_blocks.push(&p + &pk);
        a_blocks.push(p);
    }
    let a = ComplexMatrix::block_diag(&a_blocks.iter().collect::<Vec<_>>());
    let b = ComplexMatrix::block_diag(&b_blocks.iter().collect::<Vec<_>>());
    Ok((a, b))
}

#[derive(Debug, Clone, Serialize)]
pub struct BlowupReport {
    pub k_blocks: usize,
    /// Largest `beta` with `beta P <= (P + P_k)^2`, for `k = 1..=K`.
    pub per_block_beta: Vec<f64>,
    /// Smallest `a` with `P <= a^2 (P + P_k)^2`, for `k = 1..=K`.
    pub per_block_alpha: Vec<f64>,
    /// Smallest `a` with `A <= a^2 B`.
    pub alpha_half: f64,
    /// Smallest `a` with `A <= a^2 B^2`.
    pub alpha_full: f64,
    /// Block attaining the largest per-block constant.
    pub witness_k: usize,
}

pub fn blowup_report(k_blocks: usize, tol: &ToleranceContext) -> Result<BlowupReport> {
    let (a, b) = build_ab(k_blocks, tol)?;
    let mut per_block_alpha = Vec::with_capacity(k_blocks);
    for k in 1..=k_blocks {
        let (p, pk) = build_p_pk(k)?;
        let s = &p + &pk;
        per_block_alpha.push(psd_domination_alpha(&p, &(&s * &s), tol)?.alpha);
    }
    let per_block_beta = per_block_alpha.iter().map(|a| 1.0 / (a * a)).collect();
    let witness_k = per_block_alpha
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(y.1))
        .map(|(i, _)| i + 1)
        .unwrap_or(1);
    let alpha_full = psd_domination_alpha(&a, &(&b * &b), tol)?.alpha;
    let a_half = psd_sqrt(&a, tol)?;
    let b_half = psd_sqrt(&b, tol)?;
    let half = range_included(&a_half, &b_half, tol)?;
    let alpha_half = half.alpha_min.unwrap_or(f64::INFINITY);
    Ok(BlowupReport {
        k_blocks,
        per_block_beta,
        per_block_alpha,
        alpha_half,
        alpha_full,
        witness_k,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BlowupPoint {
    pub k_blocks: usize,
    pub alpha_half: f64,
    pub alpha_full: f64,
}

/// `alpha_half` and `alpha_full` for `K = 1..=k_max`.
pub fn blowup_curve(k_max: usize, tol: &ToleranceContext) -> Result<Vec<BlowupPoint>> {
    (1..=k_max)
        .map(|k| {
            let r = blowup_report(k, tol)?;
            Ok(BlowupPoint {
                k_blocks: k,
                alpha_half: r.alpha_half,
                alpha_full: r.alpha_full,
            })
        })
        .collect()
}

/// Size of the truncated block operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Example1Config {
    /// Number of 2x2 blocks in `A` and `B`.
    pub k_blocks: usize,
    /// Number of block rows in `T`.
    pub depth: usize,
}

impl Example1Config {
    pub fn new(k_blocks: usize, depth: usize) -> Result<Self> {
        if k_blocks == 0 || depth < 3 {
            return Err(GalleryError::InvalidConfig(format!(
                "need K >= 1 and depth >= 3, got K = {k_blocks}, depth = {depth}"
            )));
        }
        let dim = 2 * k_blocks * depth;
        if dim > MAX_DIM {
            return Err(GalleryError::ResourceLimit {
                dim,
                limit: MAX_DIM,
            });
        }
        Ok(Self { k_blocks, depth })
    }

    pub fn block_size(&self) -> usize {
        2 * self.k_blocks
    }

    pub fn dim(&self) -> usize {
        self.block_size() * self.depth
    }
}

/// `A`, `B` and their square roots for one configuration.
#[derive(Debug, Clone)]
pub struct Example1Blocks {
    pub a: ComplexMatrix,
    pub b: ComplexMatrix,
    pub a_half: ComplexMatrix,
    pub b_half: ComplexMatrix,
}

impl Example1Blocks {
    pub fn new(k_blocks: usize, tol: &ToleranceContext) -> Result<Self> {
        let (a, b) = build_ab(k_blocks, tol)?;
        let a_half = psd_sqrt(&a, tol)?;
        let b_half = psd_sqrt(&b, tol)?;
        Ok(Self {
            a,
            b,
            a_half,
            b_half,
        })
    }

    /// Block of `T` at block position `(i + 1, i)`.
    pub fn subdiagonal(&self, i: usize) -> &ComplexMatrix {
        if i < 2 {
            &self.a_half
        } else {
            &self.b_half
        }
    }
}

/// Block subdiagonal `T` whose first two subdiagonal blocks are `A^{1/2}`
/// and the rest `B^{1/2}`.
pub fn build_example1_t(cfg: &Example1Config, tol: &ToleranceContext) -> Result<ComplexMatrix> {
    let blocks = Example1Blocks::new(cfg.k_blocks, tol)?;
    Ok(assemble_t(cfg, &blocks))
}

fn assemble_t(cfg: &Example1Config, blocks: &Example1Blocks) -> ComplexMatrix {
    let s = cfg.block_size();
    let mut t = ComplexMatrix::zeros(cfg.dim(), cfg.dim());
    for i in 0..cfg.depth - 1 {
        t.set_block((i + 1) * s, i * s, blocks.subdiagonal(i));
    }
    t
}

/// Comparison of `T·T` with the expected block pattern
/// `A, B^{1/2} A^{1/2}, B, B, ...` two steps below the diagonal.
#[derive(Debug, Clone, Serialize)]
pub struct TSquaredCheck {
    pub blocks_checked: usize,
    /// Largest entrywise deviation from the expected pattern.
    pub max_pattern_error: f64,
    /// Largest entry of `T·T` outside the second block subdiagonal.
    pub max_off_pattern: f64,
    pub holds: bool,
}

/// Named range pattern entry for one block row of `T`, `T*`, `T^2`, `T*^2`.
#[derive(Debug, Clone, Serialize)]
pub struct RangeTableEntry {
    pub operator: &'static str,
    pub block_row: usize,
    pub expected: &'static str,
    pub matches: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Example1Report {
    pub config: Example1Config,
    pub t_squared: TSquaredCheck,
    pub range_table: Vec<RangeTableEntry>,
    pub range_table_holds: bool,
}

/// Builds `T`, checks `T^2` against the block pattern and compares the
/// block-row ranges of `T`, `T*`, `T^2`, `T*^2` with their named pattern on
/// the rows unaffected by truncation.
pub fn example1_report(cfg: &Example1Config, tol: &ToleranceContext) -> Result<Example1Report> {
    let blocks = Example1Blocks::new(cfg.k_blocks, tol)?;
    let t = assemble_t(cfg, &blocks);
    let th = t.adjoint();
    let t2 = &t * &t;
    let th2 = &th * &th;
    let s = cfg.block_size();
    let d = cfg.depth;

    let ba = &blocks.b_half * &blocks.a_half;
    let ab = &blocks.a_half * &blocks.b_half;
    let mut max_pattern_error = 0.0_f64;
    let mut max_off_pattern = 0.0_f64;
    let mut blocks_checked = 0;
    for i in 0..d {
        for j in 0..d {
            let blk = t2.block(i * s, j * s, s, s);
            if i == j + 2 {
                let expected = match j {
                    0 => &blocks.a,
                    1 => &ba,
                    _ => &blocks.b,
                };
                max_pattern_error = max_pattern_error.max(blk.max_abs_diff(expected));
                blocks_checked += 1;
            } else {
                max_off_pattern =
                    max_off_pattern.max(blk.max_abs_diff(&ComplexMatrix::zeros(s, s)));
            }
        }
    }
    let t_squared = TSquaredCheck {
        blocks_checked,
        max_pattern_error,
        max_off_pattern,
        holds: max_pattern_error <= 1e-12 && max_off_pattern == 0.0,
    };

    let named: [(&'static str, Option<&ComplexMatrix>); 7] = [
        ("{0}", None),
        ("R(A^1/2)", Some(&blocks.a_half)),
        ("R(B^1/2)", Some(&blocks.b_half)),
        ("R(A)", Some(&blocks.a)),
        ("R(B^1/2 A^1/2)", Some(&ba)),
        ("R(A^1/2 B^1/2)", Some(&ab)),
        ("R(B)", Some(&blocks.b)),
    ];
    let basis_of = |m: Option<&ComplexMatrix>| -> Result<SubspaceBasis> {
        Ok(match m {
            None => SubspaceBasis::empty(s),
            Some(m) => range_basis(m, tol)?,
        })
    };
    let expected_for = |op: &str, i: usize| -> usize {
        match op {
            "T" => match i {
                0 => 0,
                1 | 2 => 1,
                _ => 2,
            },
            "T*" => {
                if i < 2 {
                    1
                } else {
                    2
                }
            }
            "T^2" => match i {
                0 | 1 => 0,
                2 => 3,
                3 => 4,
                _ => 6,
            },
            _ => match i {
                0 => 3,
                1 => 5,
                _ => 6,
            },
        }
    };
    let mut range_table = Vec::new();
    for (op, m, rows) in [
        ("T", &t, d),
        ("T*", &th, d - 1),
        ("T^2", &t2, d),
        ("T*^2", &th2, d - 2),
    ] {
        for i in 0..rows {
            let actual = range_basis(&m.block(i * s, 0, s, m.cols()), tol)?;
            let (label, which) = named[expected_for(op, i)];
            let matches = subspaces_equal(&actual, &basis_of(which)?, SUBSPACE_ANGLE_TOL)?;
            range_table.push(RangeTableEntry {
                operator: op,
                block_row: i + 1,
                expected: label,
                matches,
            });
        }
    }
    let range_table_holds = range_table.iter().all(|e| e.matches);
    Ok(Example1Report {
        config: *cfg,
        t_squared,
        range_table,
        range_table_holds,
    })
}

/// One exemplar with the class memberships it must exhibit.
#[derive(Debug, Clone)]
pub struct GalleryEntry {
    pub name: &'static str,
    pub matrix: ComplexMatrix,
    pub expected: Vec<(&'static str, bool)>,
}

/// Default sizes: a 5x5 `2I + backward shift` and the two-sided reciprocal
/// shift on `e_{-4}..e_4`.
pub fn exemplar_gallery() -> Vec<GalleryEntry> {
    exemplar_gallery_with(5, 4)
}

pub fn exemplar_gallery_with(shift_dim: usize, bilateral_half_width: usize) -> Vec<GalleryEntry> {
    let jordan = ComplexMatrix::from_real_rows(&[[1.0, 1.0], [0.0, 1.0]]).expect("static matrix");
    let n = shift_dim.max(2);
    let mut two_plus_backward = ComplexMatrix::identity(n).scale(2.0);
    for i in 0..n - 1 {
        two_plus_backward.set(i, i + 1, c(1.0));
    }
    let bilateral = build_shift_truncation(
        &WeightSequence::bilateral_reciprocal(),
        bilateral_half_width.max(2),
    )
    .expect("valid truncation length");
    vec![
        GalleryEntry {
            name: "jordan-2x2",
            matrix: jordan,
            expected: vec![
                ("invertible", true),
                ("posinormal", true),
                ("coposinormal", true),
                ("dominant", false),
                ("hyponormal", false),
            ],
        },
        GalleryEntry {
            name: "two-plus-backward-shift",
            matrix: two_plus_backward,
            expected: vec![
                ("invertible", true),
                ("posinormal", true),
                ("dominant", false),
            ],
        },
        GalleryEntry {
            name: "bilateral-reciprocal-shift",
            matrix: bilateral,
            expected: vec![("hyponormal", false)],
        },
    ]
}

/// Looks up a class verdict by name in a report.
pub fn verdict_by_name(report: &crate::classes::ClassificationReport, name: &str) -> Option<bool> {
    Some(match name {
        "posinormal" => report.posinormal.holds,
        "coposinormal" => report.coposinormal.holds,
        "quasiposinormal" => report.quasiposinormal.holds,
        "coquasiposinormal" => report.coquasiposinormal.holds,
        "hyponormal" => report.hyponormal.holds,
        "cohyponormal" => report.cohyponormal.holds,
        "normal" => report.normal.holds,
        "dominant" => report.dominant.holds,
        "codominant" => report.codominant.holds,
        "invertible" => report.invertible.holds,
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::classify;

    fn tol() -> ToleranceContext {
        ToleranceContext::default()
    }

    #[test]
    fn projection_pair_examples() {
        let (_, p1) = build_p_pk(1).unwrap();
        assert_eq!(p1, ComplexMatrix::from_real_diagonal(&[0.0, 1.0]));
        let (_, p2) = build_p_pk(2).unwrap();
        assert!(
            p2.max_abs_diff(&ComplexMatrix::from_real_rows(&[[0.5, 0.5], [0.5, 0.5]]).unwrap())
                < 1e-15
        );
        let (p, p5) = build_p_pk(5).unwrap();
        let s = &p + &p5;
        let sq = &s * &s;
        let expected = ComplexMatrix::from_real_rows(&[[17.0 / 5.0, 0.8], [0.8, 0.2]]).unwrap();
        assert!(sq.max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn ab_single_block() {
        let (a, b) = build_ab(1, &tol()).unwrap();
        assert_eq!(a, ComplexMatrix::from_real_diagonal(&[1.0, 0.0]));
        assert!(b.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-15);
    }

    #[test]
    fn blowup_small_k() {
        let r = blowup_report(4, &tol()).unwrap();
        for (k, beta) in r.per_block_beta.iter().enumerate() {
            assert!((beta - 1.0 / (k + 1) as f64).abs() < 1e-9);
        }
        assert!((r.alpha_full - 2.0).abs() < 1e-8);
        assert!(r.alpha_half <= 1.0 + 1e-10);
        assert_eq!(r.witness_k, 4);
        assert!((blowup_report(1, &tol()).unwrap().alpha_full - 1.0).abs() < 1e-10);
    }

    #[test]
    fn example1_t_square_blocks() {
        let cfg = Example1Config::new(1, 3).unwrap();
        let t = build_example1_t(&cfg, &tol()).unwrap();
        let t2 = &t * &t;
        let (a, _) = build_ab(1, &tol()).unwrap();
        assert!(t2.block(4, 0, 2, 2).max_abs_diff(&a) < 1e-15);

        let cfg = Example1Config::new(2, 5).unwrap();
        let r = example1_report(&cfg, &tol()).unwrap();
        assert!(r.t_squared.holds, "{:?}", r.t_squared);
        assert_eq!(r.t_squared.blocks_checked, 3);
        assert!(r.range_table_holds, "{:?}", r.range_table);
    }

    #[test]
    fn config_guards() {
        assert!(matches!(
            Example1Config::new(1, 2),
            Err(GalleryError::InvalidConfig(_))
        ));
        assert!(matches!(
            Example1Config::new(500, 5),
            Err(GalleryError::ResourceLimit { .. })
        ));
    }

    #[test]
    fn gallery_fragments_hold() {
        for entry in exemplar_gallery() {
            let report = classify(&entry.matrix, &tol()).unwrap();
            for (class, expected) in &entry.expected {
                assert_eq!(
                    verdict_by_name(&report, class),
                    Some(*expected),
                    "{} / {}",
                    entry.name,
                    class
                );
            }
        }
    }
}
