use nalgebra::DMatrix;
use rand::Rng;

pub fn random_points<R: Rng>(rng: &mut R, n: usize, d: usize, half_width: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            (0..d)
                .map(|_| rng.random_range(-half_width..half_width))
                .collect()
        })
        .collect()
}

/// Smallest and largest eigenvalue of a symmetric matrix.
pub fn min_max_eigen(m: &DMatrix<f64>) -> (f64, f64) {
    let ev = m.clone().symmetric_eigenvalues();
    let lo = ev.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}
