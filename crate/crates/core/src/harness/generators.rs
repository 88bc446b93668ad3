//! Seeded random instances for the property suites.
//!
//! Every generator is a pure function of `(kind, dim, seed)`. Draws whose
//! nonzero singular values spread by more than [`MAX_CONDITION`] are
//! redrawn from the same stream, and the number of redraws is reported.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::numeric::{Complex64, ComplexMatrix, RankRevealing, ToleranceContext};

/// Largest admissible ratio of extreme nonzero singular values.
pub const MAX_CONDITION: f64 = 1e8;
const MAX_REDRAWS: u32 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GeneratorKind {
    DenseGaussian,
    /// `W (R ⊕ 0) W*` with `R` invertible: `R(T) = R(T*)`.
    Ep,
    Normal,
    /// Normal `S` and posinormal `T` with `ST = TS`.
    CommutingPair,
    /// Posinormal `S`, `T` with `TS* = S*T`.
    StarCommutingPair,
    /// Singular `T` with `N(T) ⊆ N(T*)`.
    KernelInclusion,
    /// Posinormal `T` for which `T*T` and `TT*` commute.
    CommutingGram,
    /// `W (J ⊕ R) W*` with `J` nilpotent and `R` invertible.
    NilpotentAugmented,
}

impl GeneratorKind {
    pub const ALL: [GeneratorKind; 8] = [
        Self::DenseGaussian,
        Self::Ep,
        Self::Normal,
        Self::CommutingPair,
        Self::StarCommutingPair,
        Self::KernelInclusion,
        Self::CommutingGram,
        Self::NilpotentAugmented,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::DenseGaussian => "dense-gaussian",
            Self::Ep => "ep",
            Self::Normal => "normal",
            Self::CommutingPair => "commuting-pair",
            Self::StarCommutingPair => "star-commuting-pair",
            Self::KernelInclusion => "kernel-inclusion",
            Self::CommutingGram => "commuting-gram",
            Self::NilpotentAugmented => "nilpotent-augmented",
        }
    }

    pub fn is_pair(self) -> bool {
        matches!(self, Self::CommutingPair | Self::StarCommutingPair)
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GeneratorKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown generator kind '{s}'"))
    }
}

#[derive(Debug, Clone)]
pub enum Instance {
    Single(ComplexMatrix),
    Pair { s: ComplexMatrix, t: ComplexMatrix },
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub instance: Instance,
    pub resampled: u32,
}

/// Draws one instance. `dim` is clamped to `2..=32`.
pub fn generate(kind: GeneratorKind, dim: usize, seed: u64) -> Generated {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    generate_with(kind, dim, &mut rng)
}

pub(crate) fn generate_with(kind: GeneratorKind, dim: usize, rng: &mut ChaCha8Rng) -> Generated {
    let n = dim.clamp(2, 32);
    let mut resampled = 0;
    loop {
        let instance = match kind {
            GeneratorKind::DenseGaussian => Instance::Single(dense_gaussian(rng, n)),
            GeneratorKind::Ep => Instance::Single(ep(rng, n, 1)),
            GeneratorKind::Normal => Instance::Single(normal(rng, n)),
            GeneratorKind::CommutingPair => commuting_pair(rng, n),
            GeneratorKind::StarCommutingPair => star_commuting_pair(rng, n),
            GeneratorKind::KernelInclusion => Instance::Single(kernel_inclusion(rng, n)),
            GeneratorKind::CommutingGram => Instance::Single(commuting_gram(rng, n)),
            GeneratorKind::NilpotentAugmented => Instance::Single(nilpotent_augmented(rng, n)),
        };
        let acceptable = match &instance {
            Instance::Single(t) => well_conditioned(t),
            Instance::Pair { s, t } => {
                well_conditioned(s) && well_conditioned(t) && pair_relation_holds(kind, s, t)
            }
        };
        if acceptable || resampled >= MAX_REDRAWS {
            return Generated {
                instance,
                resampled,
            };
        }
        resampled += 1;
    }
}

fn well_conditioned(m: &ComplexMatrix) -> bool {
    let Ok(rr) = RankRevealing::new(m, &ToleranceContext::default()) else {
        return false;
    };
    if rr.rank() == 0 {
        return true;
    }
    rr.sigma_max() / rr.singular_values()[rr.rank() - 1] <= MAX_CONDITION
}

fn commutator_defect(x: &ComplexMatrix, y: &ComplexMatrix) -> f64 {
    (&(x * y) - &(y * x)).frobenius_norm()
}

fn pair_relation_holds(kind: GeneratorKind, s: &ComplexMatrix, t: &ComplexMatrix) -> bool {
    let scale = s.frobenius_norm() * t.frobenius_norm();
    let defect = match kind {
        GeneratorKind::StarCommutingPair => commutator_defect(t, &s.adjoint()),
        _ => commutator_defect(s, t),
    };
    defect <= 1e-12 * scale.max(f64::MIN_POSITIVE)
}

pub(crate) fn complex_gaussian(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn unit_phase(rng: &mut impl Rng) -> Complex64 {
    Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))
}

pub(crate) fn gaussian_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    let entries: Vec<Complex64> = (0..rows * cols).map(|_| complex_gaussian(rng)).collect();
    ComplexMatrix::from_row_major(rows, cols, entries).expect("finite gaussian draws")
}

/// Haar-distributed unitary via Gram-Schmidt (applied twice) on Gaussian
/// columns.
pub(crate) fn haar_unitary(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let g = gaussian_matrix(rng, n, n);
    let mut cols: Vec<Vec<Complex64>> = (0..n).map(|j| g.column(j)).collect();
    for j in 0..n {
        for _ in 0..2 {
            for i in 0..j {
                let proj: Complex64 = cols[i]
                    .iter()
                    .zip(&cols[j])
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                let qi = cols[i].clone();
                for (x, q) in cols[j].iter_mut().zip(&qi) {
                    *x -= proj * q;
                }
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for x in cols[j].iter_mut() {
            *x /= norm;
        }
    }
    ComplexMatrix::from_columns(n, &cols)
}

/// `U diag(s) V*` with singular values uniform in `[lo, hi]`.
pub(crate) fn with_singular_values(
    rng: &mut impl Rng,
    n: usize,
    lo: f64,
    hi: f64,
) -> ComplexMatrix {
    let u = haar_unitary(rng, n);
    let v = haar_unitary(rng, n);
    let s: Vec<f64> = (0..n).map(|_| rng.random_range(lo..=hi)).collect();
    &(&u * &ComplexMatrix::from_real_diagonal(&s)) * &v.adjoint()
}

fn conjugate(w: &ComplexMatrix, core: &ComplexMatrix) -> ComplexMatrix {
    &(w * core) * &w.adjoint()
}

fn dense_gaussian(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    gaussian_matrix(rng, n, n).scale(1.0 / (n as f64).sqrt())
}

/// EP matrix of rank `r >= min_rank` (rank drawn uniformly).
pub(crate) fn ep(rng: &mut impl Rng, n: usize, min_rank: usize) -> ComplexMatrix {
    let r = rng.random_range(min_rank.min(n)..=n);
    ep_of_rank(rng, n, r)
}

fn ep_of_rank(rng: &mut impl Rng, n: usize, r: usize) -> ComplexMatrix {
    if r == 0 {
        return ComplexMatrix::zeros(n, n);
    }
    let core = with_singular_values(rng, r, 0.5, 2.0);
    let padded = ComplexMatrix::block_diag(&[&core, &ComplexMatrix::zeros(n - r, n - r)]);
    conjugate(&haar_unitary(rng, n), &padded)
}

fn normal_spectrum(rng: &mut impl Rng, n: usize) -> Vec<Complex64> {
    let mut lambda: Vec<Complex64> = (0..n).map(|_| complex_gaussian(rng)).collect();
    match rng.random_range(0..3) {
        0 => {
            let zeros = rng.random_range(0..=n / 2);
            for z in lambda.iter_mut().take(zeros) {
                *z = Complex64::new(0.0, 0.0);
            }
        }
        1 if n > 1 => {
            let repeats = rng.random_range(1..n);
            for i in 0..repeats {
                lambda[i + 1] = lambda[0];
            }
        }
        _ => {}
    }
    let peak = lambda.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if peak > 0.0 {
        let target = rng.random_range(0.5..=2.0);
        for z in lambda.iter_mut() {
            *z *= target / peak;
        }
    }
    lambda.shuffle(rng);
    lambda
}

fn normal(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let lambda = normal_spectrum(rng, n);
    conjugate(
        &haar_unitary(rng, n),
        &ComplexMatrix::from_diagonal(&lambda),
    )
}

fn kernel_inclusion(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    if n == 1 {
        return ComplexMatrix::zeros(1, 1);
    }
    let r = rng.random_range(1..n);
    let core = if rng.random_bool(0.5) {
        with_singular_values(rng, r, 0.5, 2.0)
    } else {
        // triangular and far from normal, diagonal bounded away from zero
        let off = 0.3 / (r as f64).sqrt();
        let mut m = ComplexMatrix::zeros(r, r);
        for i in 0..r {
            m.set(i, i, unit_phase(rng) * rng.random_range(0.5..=2.0));
            for j in i + 1..r {
                m.set(i, j, complex_gaussian(rng) * off);
            }
        }
        m
    };
    let padded = ComplexMatrix::block_diag(&[&ComplexMatrix::zeros(n - r, n - r), &core]);
    conjugate(&haar_unitary(rng, n), &padded)
}

/// Either a normal matrix or a weighted permutation `V Π D V*` whose zero
/// weights fill whole cycles of `Π`; then `T*T = V|D|^2V*` and
/// `TT* = VΠ|D|^2Π*V*` are simultaneously diagonal.
fn commuting_gram(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    if rng.random_range(0..3) == 0 {
        return normal(rng, n);
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut weights: Vec<Complex64> = (0..n)
        .map(|_| unit_phase(rng) * rng.random_range(0.5..=2.0))
        .collect();
    let mut seen = vec![false; n];
    let mut cycles = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            cycle.push(i);
            i = perm[i];
        }
        cycles.push(cycle);
    }
    let ncycles = cycles.len();
    for (idx, cycle) in cycles.iter().enumerate() {
        let keep_one = idx == ncycles - 1;
        if !keep_one && rng.random_bool(0.25) {
            for &i in cycle {
                weights[i] = Complex64::new(0.0, 0.0);
            }
        }
    }
    let mut core = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        core.set(perm[j], j, weights[j]);
    }
    conjugate(&haar_unitary(rng, n), &core)
}

fn nilpotent_augmented(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let m = rng.random_range(1..=n);
    let mut nil = ComplexMatrix::zeros(m, m);
    let mut start = 0;
    while start < m {
        let size = rng.random_range(1..=m - start);
        for i in start..start + size - 1 {
            nil.set(i, i + 1, unit_phase(rng) * rng.random_range(0.5..=1.5));
        }
        start += size;
    }
    let core = if m < n {
        ComplexMatrix::block_diag(&[&nil, &with_singular_values(rng, n - m, 0.8, 1.25)])
    } else {
        nil
    };
    conjugate(&haar_unitary(rng, n), &core)
}

fn random_partition(rng: &mut impl Rng, n: usize) -> Vec<usize> {
    let mut parts = Vec::new();
    let mut left = n;
    while left > 0 {
        let p = rng.random_range(1..=left);
        parts.push(p);
        left -= p;
    }
    parts
}

fn polynomial(rng: &mut impl Rng, n: &ComplexMatrix) -> ComplexMatrix {
    let dim = n.rows();
    let c0 = complex_gaussian(rng) * 0.5;
    let c1 = complex_gaussian(rng);
    let c2 = complex_gaussian(rng) * 0.5;
    let n2 = n * n;
    let mut out = ComplexMatrix::identity(dim).scale_complex(c0);
    out = &out + &n.scale_complex(c1);
    out = &out + &n2.scale_complex(c2);
    let norm = out.spectral_norm().unwrap_or(0.0);
    if norm > 0.0 {
        out = out.scale(rng.random_range(0.5..=2.0) / norm);
    }
    out
}

fn commuting_pair(rng: &mut impl Rng, n: usize) -> Instance {
    let w = haar_unitary(rng, n);
    if rng.random_bool(0.75) {
        let parts = random_partition(rng, n);
        let mut lambda = Vec::with_capacity(n);
        let mut blocks = Vec::with_capacity(parts.len());
        for &p in &parts {
            let l = if rng.random_bool(0.15) {
                Complex64::new(0.0, 0.0)
            } else {
                complex_gaussian(rng)
            };
            lambda.extend(std::iter::repeat_n(l, p));
            blocks.push(ep(rng, p, 0));
        }
        let t_core = ComplexMatrix::block_diag(&blocks.iter().collect::<Vec<_>>());
        Instance::Pair {
            s: conjugate(&w, &ComplexMatrix::from_diagonal(&lambda)),
            t: conjugate(&w, &t_core),
        }
    } else {
        let nrm = conjugate(&w, &ComplexMatrix::from_diagonal(&normal_spectrum(rng, n)));
        Instance::Pair {
            s: polynomial(rng, &nrm),
            t: polynomial(rng, &nrm),
        }
    }
}

fn divisors(n: usize) -> Vec<usize> {
    (1..=n).filter(|d| n % d == 0).collect()
}

fn scalar_or_zero(rng: &mut impl Rng) -> Complex64 {
    if rng.random_bool(0.25) {
        Complex64::new(0.0, 0.0)
    } else {
        unit_phase(rng) * rng.random_range(0.5..=2.0)
    }
}

fn star_commuting_pair(rng: &mut impl Rng, n: usize) -> Instance {
    let w = haar_unitary(rng, n);
    match rng.random_range(0..3) {
        0 => {
            let ds = divisors(n);
            let d1 = ds[rng.random_range(0..ds.len())];
            let d2 = n / d1;
            let s1 = ep(rng, d1, 1);
            let t2 = ep(rng, d2, 1);
            Instance::Pair {
                s: conjugate(&w, &s1.kron(&ComplexMatrix::identity(d2))),
                t: conjugate(&w, &ComplexMatrix::identity(d1).kron(&t2)),
            }
        }
        1 if n > 1 => {
            let k = rng.random_range(1..n);
            let s1 = ep(rng, k, 0);
            let t2 = ep(rng, n - k, 0);
            let c = scalar_or_zero(rng);
            let d = scalar_or_zero(rng);
            let s_core =
                ComplexMatrix::block_diag(&[&s1, &ComplexMatrix::identity(n - k).scale_complex(c)]);
            let t_core =
                ComplexMatrix::block_diag(&[&ComplexMatrix::identity(k).scale_complex(d), &t2]);
            Instance::Pair {
                s: conjugate(&w, &s_core),
                t: conjugate(&w, &t_core),
            }
        }
        _ => {
            let nrm = conjugate(&w, &ComplexMatrix::from_diagonal(&normal_spectrum(rng, n)));
            Instance::Pair {
                s: polynomial(rng, &nrm),
                t: polynomial(rng, &nrm).adjoint(),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::{is_coposinormal, is_posinormal};

    #[test]
    fn generation_is_deterministic() {
        for kind in GeneratorKind::ALL {
            let a = generate(kind, 6, 99);
            let b = generate(kind, 6, 99);
            match (a.instance, b.instance) {
                (Instance::Single(x), Instance::Single(y)) => assert_eq!(x, y),
                (Instance::Pair { s: s1, t: t1 }, Instance::Pair { s: s2, t: t2 }) => {
                    assert_eq!(s1, s2);
                    assert_eq!(t1, t2);
                }
                _ => panic!("shape changed between runs"),
            }
        }
    }

    #[test]
    fn haar_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = haar_unitary(&mut rng, 7);
        assert!((&u.adjoint() * &u).max_abs_diff(&ComplexMatrix::identity(7)) < 1e-13);
    }

    #[test]
    fn ep_and_gram_contracts() {
        let tol = ToleranceContext::default();
        for seed in 0..20 {
            let Instance::Single(t) = generate(GeneratorKind::Ep, 7, seed).instance else {
                unreachable!()
            };
            assert!(
                is_posinormal(&t, &tol).unwrap().holds && is_coposinormal(&t, &tol).unwrap().holds
            );
            let Instance::Single(t) = generate(GeneratorKind::CommutingGram, 7, seed).instance
            else {
                unreachable!()
            };
            let th = t.adjoint();
            assert!(commutator_defect(&(&th * &t), &(&t * &th)) < 1e-12);
            assert!(is_posinormal(&t, &tol).unwrap().holds);
        }
    }

    #[test]
    fn norms_stay_in_band() {
        for kind in GeneratorKind::ALL {
            for seed in 0..10 {
                let mats = match generate(kind, 9, seed).instance {
                    Instance::Single(t) => vec![t],
                    Instance::Pair { s, t } => vec![s, t],
                };
                let single = mats.len() == 1;
                for m in mats {
                    let nrm = m.spectral_norm().unwrap();
                    assert!(nrm <= 10.0, "{kind}: norm {nrm}");
                    if single {
                        assert!(nrm >= 0.1, "{kind}: norm {nrm}");
                    }
                }
            }
        }
    }

    #[test]
    fn kind_names_round_trip() {
        for kind in GeneratorKind::ALL {
            assert_eq!(kind.name().parse::<GeneratorKind>().unwrap(), kind);
        }
    }
}
