//! Seeded random test systems.
//!
//! Recipe: draw `G` (n×n) with standard normal entries, form `M = GGᵀ + n·I`
//! and set `A = n·M/‖M‖₂`, so `A` is SPD with spectral norm `n`. `B` (n×m) and
//! `C` (p×n) have standard normal entries; for gradient systems `C = Bᵀ` and
//! `p` is ignored. Entries are drawn row by row in the order `G`, `B`, `C` from
//! a ChaCha8 stream seeded with `seed`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use spdred_core::matlib::{sym, sym_eig};
use spdred_core::{Matrix, Result};

use crate::io::SystemFile;

/// `(A, B, C)`; `C` is `None` for gradient systems.
pub fn random_matrices(
    n: usize,
    m: usize,
    p: usize,
    seed: u64,
    gradient: bool,
) -> Result<(Matrix, Matrix, Option<Matrix>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |rows: usize, cols: usize| {
        let data: Vec<f64> = (0..rows * cols)
            .map(|_| rng.sample(StandardNormal))
            .collect();
        Matrix::from_row_slice(rows, cols, &data)
    };
    let g = draw(n, n);
    let b = draw(n, m);
    let c = (!gradient).then(|| draw(p, n));
    let shifted = sym(&(&g * g.transpose() + Matrix::identity(n, n) * n as f64));
    let norm = sym_eig(&shifted)?.max();
    let a = sym(&(shifted * (n as f64 / norm)));
    Ok((a, b, c))
}

pub fn random_system_file(
    n: usize,
    m: usize,
    p: usize,
    seed: u64,
    gradient: bool,
) -> Result<SystemFile> {
    let (a, b, c) = random_matrices(n, m, p, seed, gradient)?;
    Ok(SystemFile::from_matrices(&a, &b, c.as_ref()))
}
