//! State-vector primitives. Qubit 0 is the leftmost tensor factor, i.e. the most significant
//! bit of the amplitude index.

use num_complex::Complex64;
use thiserror::Error;

use crate::syntax::{unitarity_error, CMatrix};

/// Branches whose probability falls below this are dropped.
pub const PRUNE: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum StateError {
    #[error("qubit position {0} out of range for {1} qubits")]
    OutOfRange(usize, usize),
    #[error("duplicate qubit position {0}")]
    Duplicate(usize),
    #[error("matrix of size {0} does not act on {1} qubits")]
    Shape(usize, usize),
    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    m: usize,
    amps: Vec<Complex64>,
}

impl Default for StateVector {
    fn default() -> Self {
        StateVector::scalar()
    }
}

impl StateVector {
    /// The 0-qubit state `1`.
    pub fn scalar() -> StateVector {
        StateVector { m: 0, amps: vec![Complex64::new(1.0, 0.0)] }
    }

    pub fn basis(bits: &[bool]) -> StateVector {
        let mut s = StateVector::scalar();
        for &b in bits {
            s = s.append_qubit(b);
        }
        s
    }

    /// Wrap raw amplitudes; the length must be a power of two.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Option<StateVector> {
        if amps.is_empty() || !amps.len().is_power_of_two() {
            return None;
        }
        let m = amps.len().trailing_zeros() as usize;
        Some(StateVector { m, amps })
    }

    pub fn qubits(&self) -> usize {
        self.m
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `self (x) |b>`
    pub fn append_qubit(&self, b: bool) -> StateVector {
        let zero = Complex64::new(0.0, 0.0);
        let mut amps = vec![zero; self.amps.len() * 2];
        for (j, a) in self.amps.iter().enumerate() {
            amps[2 * j + usize::from(b)] = *a;
        }
        StateVector { m: self.m + 1, amps }
    }

    fn bit_of(&self, q: usize) -> usize {
        self.m - 1 - q
    }

    /// Apply a `2^k x 2^k` unitary to the qubits at `positions` (first position = most
    /// significant bit of the matrix index).
    pub fn apply_unitary(&self, u: &CMatrix, positions: &[usize]) -> Result<StateVector, StateError> {
        let k = positions.len();
        if u.nrows() != 1 << k || u.ncols() != 1 << k {
            return Err(StateError::Shape(u.nrows(), k));
        }
        for (i, &p) in positions.iter().enumerate() {
            if p >= self.m {
                return Err(StateError::OutOfRange(p, self.m));
            }
            if positions[..i].contains(&p) {
                return Err(StateError::Duplicate(p));
            }
        }
        let dev = unitarity_error(u);
        if dev > 1e-9 {
            return Err(StateError::NotUnitary(dev));
        }
        Ok(self.apply_matrix_unchecked(u, positions))
    }

    pub(crate) fn apply_matrix_unchecked(&self, u: &CMatrix, positions: &[usize]) -> StateVector {
        let k = positions.len();
        let masks: Vec<usize> = positions.iter().map(|&p| 1usize << self.bit_of(p)).collect();
        let addressed: usize = masks.iter().sum();
        let offsets: Vec<usize> = (0..1usize << k)
            .map(|r| {
                (0..k).filter(|&i| r & (1 << (k - 1 - i)) != 0).map(|i| masks[i]).sum()
            })
            .collect();
        let zero = Complex64::new(0.0, 0.0);
        let mut out = vec![zero; self.amps.len()];
        let mut gathered = vec![zero; 1 << k];
        for base in 0..self.amps.len() {
            if base & addressed != 0 {
                continue;
            }
            for (r, off) in offsets.iter().enumerate() {
                gathered[r] = self.amps[base | off];
            }
            for (r, off) in offsets.iter().enumerate() {
                let mut acc = zero;
                for (c, g) in gathered.iter().enumerate() {
                    acc += u[(r, c)] * g;
                }
                out[base | off] = acc;
            }
        }
        StateVector { m: self.m, amps: out }
    }

    /// Measure qubit `i` in the computational basis. Each outcome is `Some((p, post-state))`
    /// unless its probability is below [`PRUNE`].
    #[allow(clippy::type_complexity)]
    pub fn measure(&self, i: usize) -> Result<[Option<(f64, StateVector)>; 2], StateError> {
        if i >= self.m {
            return Err(StateError::OutOfRange(i, self.m));
        }
        let mask = 1usize << self.bit_of(i);
        let branch = |b: bool| {
            let p: f64 = self
                .amps
                .iter()
                .enumerate()
                .filter(|(j, _)| (j & mask != 0) == b)
                .map(|(_, a)| a.norm_sqr())
                .sum();
            if p < PRUNE {
                return None;
            }
            let s = 1.0 / p.sqrt();
            let amps = self
                .amps
                .iter()
                .enumerate()
                .map(|(j, a)| if (j & mask != 0) == b { a * s } else { Complex64::new(0.0, 0.0) })
                .collect();
            Some((p, StateVector { m: self.m, amps }))
        };
        Ok([branch(false), branch(true)])
    }

    /// Max entrywise distance; `None` when the qubit counts differ.
    pub fn distance(&self, other: &StateVector) -> Option<f64> {
        if self.m != other.m {
            return None;
        }
        Some(self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::Gate;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn gate(name: &str) -> CMatrix {
        (*Gate::builtin(name).unwrap().matrix).clone()
    }

    #[test]
    fn append() {
        assert_eq!(StateVector::scalar().append_qubit(false).amplitudes(), &[c(1.0), c(0.0)]);
        let one = StateVector::basis(&[true]);
        assert_eq!(one.append_qubit(true), StateVector::basis(&[true, true]));
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = StateVector::from_amplitudes(vec![c(s), c(s)]).unwrap();
        assert_eq!(plus.append_qubit(false).amplitudes(), &[c(s), c(0.0), c(s), c(0.0)]);
    }

    #[test]
    fn hadamard_and_cnot() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let out = StateVector::basis(&[false]).apply_unitary(&gate("H"), &[0]).unwrap();
        assert!(out.distance(&StateVector::from_amplitudes(vec![c(s), c(s)]).unwrap()).unwrap() < 1e-15);
        let out = StateVector::basis(&[true, false]).apply_unitary(&gate("CNOT"), &[0, 1]).unwrap();
        assert_eq!(out, StateVector::basis(&[true, true]));
        // control on qubit 1, target qubit 0
        let out = StateVector::basis(&[false, true]).apply_unitary(&gate("CNOT"), &[1, 0]).unwrap();
        assert_eq!(out, StateVector::basis(&[true, true]));
    }

    #[test]
    fn measurement() {
        let [zero, one] = StateVector::basis(&[false]).measure(0).unwrap();
        assert_eq!(zero.unwrap().0, 1.0);
        assert!(one.is_none());
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = StateVector::from_amplitudes(vec![c(s), c(0.0), c(0.0), c(s)]).unwrap();
        let [a, b] = bell.measure(1).unwrap();
        let (pa, sa) = a.unwrap();
        let (pb, sb) = b.unwrap();
        assert!((pa - 0.5).abs() < 1e-15 && (pb - 0.5).abs() < 1e-15);
        assert!(sa.distance(&StateVector::basis(&[false, false])).unwrap() < 1e-15);
        assert!(sb.distance(&StateVector::basis(&[true, true])).unwrap() < 1e-15);
    }

    #[test]
    fn errors() {
        let s = StateVector::basis(&[false, false]);
        assert_eq!(s.apply_unitary(&gate("CNOT"), &[0, 0]).unwrap_err(), StateError::Duplicate(0));
        assert_eq!(s.apply_unitary(&gate("H"), &[2]).unwrap_err(), StateError::OutOfRange(2, 2));
        assert!(s.measure(5).is_err());
    }
}
