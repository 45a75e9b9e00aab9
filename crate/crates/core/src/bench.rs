//! Random separable benchmark states: sums of a fixed number of product
//! terms with standard complex Gaussian factors.

use num_complex::Complex;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::hermitian::{ComplexMatrix, HermitianState};
use crate::scalar::Scalar;

/// Standard normal via Box-Muller, generic over the scalar.
fn standard_normal<T: Scalar, R: Rng>(rng: &mut R) -> T {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    T::from64((-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos())
}

fn gaussian_vector<T: Scalar, R: Rng>(d: usize, rng: &mut R) -> Vec<Complex<T>> {
    (0..d)
        .map(|_| Complex::new(standard_normal(rng), standard_normal(rng)))
        .collect()
}

/// `ρ = Σ_{j=1}^{terms} a_j a_j* ⊗ b_j b_j*` with `a_j, b_j` standard
/// complex Gaussian, trace-normalized. The per-instance stream is derived
/// from `(seed, index)` so instance `k` is identical regardless of how many
/// instances are drawn.
pub fn random_product_state<T: Scalar>(
    d: usize,
    terms: usize,
    seed: u64,
    index: u64,
) -> Result<HermitianState<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index.wrapping_add(1));
    let dim = d * d;
    let mut mat = ComplexMatrix::<T>::zeros(dim, dim);
    let mut factors = Vec::with_capacity(terms);
    for _ in 0..terms {
        let a = gaussian_vector::<T, _>(d, &mut rng);
        let b = gaussian_vector::<T, _>(d, &mut rng);
        factors.push((a, b));
    }
    for (a, b) in &factors {
        for i in 0..d {
            for j in 0..d {
                for ip in 0..d {
                    for jp in 0..d {
                        let v = a[i] * a[ip].conj() * b[j] * b[jp].conj();
                        mat[(i * d + j, ip * d + jp)] += v;
                    }
                }
            }
        }
    }
    HermitianState::new(d, d, mat)?.normalized()
}

/// Random PSD state `G G* / Tr(G G*)` with Gaussian `G`; generally entangled.
pub fn random_density_matrix<T: Scalar>(
    d1: usize,
    d2: usize,
    seed: u64,
    index: u64,
) -> Result<HermitianState<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index.wrapping_add(1));
    let dim = d1 * d2;
    let mut g = ComplexMatrix::<T>::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            g[(i, j)] = Complex::new(standard_normal(&mut rng), standard_normal(&mut rng));
        }
    }
    let m = g.matmul(&g.conj_transpose());
    HermitianState::new(d1, d2, m)?.normalized()
}
