//! Dense statevectors with little-endian qubit order: qubit `q` is bit `q`
//! of the basis index.

use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex64;

use crate::error::{LabError, Result};

/// Largest register simulated.
pub const MAX_QUBITS: usize = 14;

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    /// `|0^n>`.
    pub fn zero(n: usize) -> Result<Self> {
        Self::basis(n, 0)
    }

    /// Computational basis state `|x>`.
    pub fn basis(n: usize, x: usize) -> Result<Self> {
        if n > MAX_QUBITS {
            return Err(LabError::SizeLimit { what: "qubits", value: n as u64, max: MAX_QUBITS as u64 });
        }
        let dim = 1usize << n;
        if x >= dim {
            return Err(LabError::arg(format!("basis index {x} out of range for {n} qubits")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[x] = Complex64::new(1.0, 0.0);
        Ok(Statevector { n, amps })
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let n = amps.len().trailing_zeros() as usize;
        if amps.len() != 1 << n {
            return Err(LabError::arg("amplitude count must be a power of two"));
        }
        Ok(Statevector { n, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, x: usize) -> Complex64 {
        self.amps[x]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `sum_x |<x|psi>|^4`.
    pub fn collision(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr().powi(2)).sum()
    }

    /// Applies `u` to qubits `(i, j)`; the local basis index is `2 b_i + b_j`.
    pub fn apply_two(&mut self, i: usize, j: usize, u: &Matrix4<Complex64>) {
        assert!(i != j && i < self.n && j < self.n, "invalid qubit pair ({i}, {j})");
        let (bi, bj) = (1usize << i, 1usize << j);
        let offs = [0, bj, bi, bi | bj];
        for base in 0..self.amps.len() {
            if base & (bi | bj) != 0 {
                continue;
            }
            let v = [
                self.amps[base + offs[0]],
                self.amps[base + offs[1]],
                self.amps[base + offs[2]],
                self.amps[base + offs[3]],
            ];
            for (r, &o) in offs.iter().enumerate() {
                self.amps[base + o] = u[(r, 0)] * v[0] + u[(r, 1)] * v[1] + u[(r, 2)] * v[2] + u[(r, 3)] * v[3];
            }
        }
    }

    /// Applies a unitary on the whole register.
    pub fn apply_full(&mut self, u: &DMatrix<Complex64>) {
        assert_eq!(u.nrows(), self.amps.len(), "dimension mismatch");
        let v = nalgebra::DVector::from_column_slice(&self.amps);
        self.amps = (u * v).as_slice().to_vec();
    }

    /// Reduced density matrix on `subset` (listed qubits become the bits
    /// of the row index in the given order, least significant first).
    pub fn reduced_density(&self, subset: &[usize]) -> Result<DMatrix<Complex64>> {
        let k = subset.len();
        let mut seen = vec![false; self.n];
        for &q in subset {
            if q >= self.n || seen[q] {
                return Err(LabError::arg(format!("invalid subset {subset:?} for {} qubits", self.n)));
            }
            seen[q] = true;
        }
        let rest: Vec<usize> = (0..self.n).filter(|&q| !seen[q]).collect();
        let (ds, dr) = (1usize << k, 1usize << rest.len());
        let index = |a: usize, r: usize| -> usize {
            let mut idx = 0;
            for (b, &q) in subset.iter().enumerate() {
                idx |= ((a >> b) & 1) << q;
            }
            for (b, &q) in rest.iter().enumerate() {
                idx |= ((r >> b) & 1) << q;
            }
            idx
        };
        let a = DMatrix::from_fn(ds, dr, |s, r| self.amps[index(s, r)]);
        Ok(&a * a.adjoint())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn basis_and_collision() {
        let s = Statevector::zero(3).unwrap();
        assert_eq!(s.collision(), 1.0);
        assert!(Statevector::zero(15).is_err());
        let h = 0.5;
        let flat = Statevector::from_amplitudes(vec![c(h); 4]).unwrap();
        assert!((flat.collision() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn two_qubit_gate_layout() {
        // CNOT with control i = 0 and target j = 2, local index 2 b_i + b_j.
        let mut u = Matrix4::zeros();
        u[(0, 0)] = c(1.0);
        u[(1, 1)] = c(1.0);
        u[(2, 3)] = c(1.0);
        u[(3, 2)] = c(1.0);
        let mut s = Statevector::basis(3, 0b001).unwrap();
        s.apply_two(0, 2, &u);
        assert_eq!(s.amplitude(0b101), c(1.0));
        let mut s = Statevector::basis(3, 0b100).unwrap();
        s.apply_two(0, 2, &u);
        assert_eq!(s.amplitude(0b100), c(1.0));
    }

    #[test]
    fn reduced_density_of_product_state() {
        let s = Statevector::zero(4).unwrap();
        let rho = s.reduced_density(&[1, 3]).unwrap();
        assert_eq!(rho.nrows(), 4);
        assert_eq!(rho[(0, 0)], c(1.0));
        assert!(s.reduced_density(&[1, 1]).is_err());
    }
}
