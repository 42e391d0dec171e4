//! Haar-random unitaries from the Ginibre ensemble.

use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{LabError, Result};

pub const MAX_DIM: usize = 64;

/// Column-major Gram-Schmidt on a complex Gaussian matrix. The triangular
/// factor has a positive real diagonal by construction, which makes the
/// result Haar distributed.
fn haar_columns<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<Complex64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut a: Vec<Complex64> = (0..dim * dim)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re * s, im * s)
        })
        .collect();
    for j in 0..dim {
        for k in 0..j {
            let (head, tail) = a.split_at_mut(j * dim);
            let qk = &head[k * dim..(k + 1) * dim];
            let vj = &mut tail[..dim];
            let proj: Complex64 = qk.iter().zip(vj.iter()).map(|(q, v)| q.conj() * v).sum();
            for (v, q) in vj.iter_mut().zip(qk) {
                *v -= proj * q;
            }
        }
        let col = &mut a[j * dim..(j + 1) * dim];
        let norm = col.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        for v in col.iter_mut() {
            *v /= norm;
        }
    }
    a
}

pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<DMatrix<Complex64>> {
    if !(1..=MAX_DIM).contains(&dim) {
        return Err(LabError::arg(format!("Haar dimension must lie in 1..={MAX_DIM}, got {dim}")));
    }
    Ok(DMatrix::from_column_slice(dim, dim, &haar_columns(dim, rng)))
}

/// Haar-random two-qubit gate.
pub fn haar_u4<R: Rng + ?Sized>(rng: &mut R) -> Matrix4<Complex64> {
    Matrix4::from_column_slice(&haar_columns(4, rng))
}

/// `max |U^dagger U - I|` entrywise.
pub fn unitarity_defect(u: &DMatrix<Complex64>) -> f64 {
    let prod = u.adjoint() * u;
    let id = DMatrix::<Complex64>::identity(u.nrows(), u.ncols());
    (prod - id).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::weingarten;
    use crate::rng::trial_rng;
    use crate::stats::Estimate;
    use num_traits::ToPrimitive;

    #[test]
    fn samples_are_unitary() {
        let mut rng = trial_rng(31, 0);
        for _ in 0..1000 {
            let u = haar_unitary(4, &mut rng).unwrap();
            assert!(unitarity_defect(&u) < 1e-12);
        }
        assert!(haar_unitary(65, &mut rng).is_err());
    }

    #[test]
    fn first_and_second_moments() {
        let dim = 4;
        let mut rng = trial_rng(32, 0);
        let samples: Vec<f64> = (0..100_000).map(|_| haar_u4(&mut rng)[(0, 0)].norm_sqr()).collect();
        let first = Estimate::from_samples(&samples);
        let wg1 = weingarten(1, dim as u32).unwrap();
        let expect1 = wg1.value(&crate::perm::Permutation::identity(1)).to_f64().unwrap();
        assert!(first.within_sigmas(expect1, 3.0), "{first:?}");
        let fourth: Vec<f64> = samples.iter().map(|p| p * p).collect();
        let second = Estimate::from_samples(&fourth);
        assert!(second.within_sigmas(2.0 / (dim as f64 * (dim as f64 + 1.0)), 3.0), "{second:?}");
    }
}
