#![allow(dead_code)]

use posinorm::numeric::{Complex64, ComplexMatrix, ToleranceContext};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn tol() -> ToleranceContext {
    ToleranceContext::default()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    let entries = (0..rows * cols)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im) / 2f64.sqrt()
        })
        .collect();
    ComplexMatrix::from_row_major(rows, cols, entries).unwrap()
}

/// Product of Gaussian factors, generically of rank exactly `rank`.
pub fn low_rank(rng: &mut ChaCha8Rng, rows: usize, cols: usize, rank: usize) -> ComplexMatrix {
    if rank == 0 {
        return ComplexMatrix::zeros(rows, cols);
    }
    &gaussian(rng, rows, rank) * &gaussian(rng, rank, cols)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn jordan(n: usize) -> ComplexMatrix {
    let mut j = ComplexMatrix::zeros(n, n);
    for i in 0..n.saturating_sub(1) {
        j.set(i, i + 1, c(1.0, 0.0));
    }
    j
}

pub fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    let v = gaussian(rng, n, 1).column(0);
    posinorm::numeric::normalized(&v)
}
