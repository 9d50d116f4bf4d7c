//! Truncated oscillator Fock space, optionally tensored with the qubit.
//!
//! Flat index of |n, s⟩ is `2 n + s` with s = 0 for τz = +1 and s = 1 for
//! τz = −1. Without a qubit the index is just n.

use faer::Mat;

use crate::circuit::QubitLevel;
use crate::error::{Error, Result};
use crate::linalg::{real, CMat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HilbertSpace {
    n_fock: usize,
    qubit: bool,
}

impl HilbertSpace {
    pub fn with_qubit(n_fock: usize) -> Result<Self> {
        Self::new(n_fock, true)
    }

    pub fn detector(n_fock: usize) -> Result<Self> {
        Self::new(n_fock, false)
    }

    pub fn new(n_fock: usize, qubit: bool) -> Result<Self> {
        if n_fock < 2 {
            return Err(Error::InvalidParameter {
                name: "n_fock",
                reason: format!("must be >= 2, got {n_fock}"),
            });
        }
        Ok(Self { n_fock, qubit })
    }

    pub fn n_fock(&self) -> usize {
        self.n_fock
    }

    pub fn has_qubit(&self) -> bool {
        self.qubit
    }

    pub fn dim(&self) -> usize {
        if self.qubit {
            2 * self.n_fock
        } else {
            self.n_fock
        }
    }

    /// Flat index of |n, s⟩. `level` must be `Some` exactly when the space
    /// has a qubit.
    pub fn index(&self, n: usize, level: Option<QubitLevel>) -> usize {
        assert!(n < self.n_fock);
        match (self.qubit, level) {
            (true, Some(QubitLevel::Up)) => 2 * n,
            (true, Some(QubitLevel::Down)) => 2 * n + 1,
            (false, None) => n,
            _ => panic!("qubit label does not match the Hilbert space"),
        }
    }

    pub fn components(&self, i: usize) -> (usize, Option<QubitLevel>) {
        assert!(i < self.dim());
        if self.qubit {
            let level = if i.is_multiple_of(2) {
                QubitLevel::Up
            } else {
                QubitLevel::Down
            };
            (i / 2, Some(level))
        } else {
            (i, None)
        }
    }

    fn oscillator_op(&self, elem: impl Fn(usize, usize) -> f64) -> CMat {
        let d = self.dim();
        Mat::from_fn(d, d, |i, j| {
            let (n, s) = self.components(i);
            let (m, t) = self.components(j);
            if s == t {
                real(elem(n, m))
            } else {
                real(0.0)
            }
        })
    }

    /// Annihilation operator a.
    pub fn annihilation(&self) -> CMat {
        self.oscillator_op(|n, m| if m == n + 1 { (m as f64).sqrt() } else { 0.0 })
    }

    pub fn creation(&self) -> CMat {
        self.oscillator_op(|n, m| if n == m + 1 { (n as f64).sqrt() } else { 0.0 })
    }

    /// a² with exact matrix elements ⟨n|a²|n+2⟩ = √((n+1)(n+2)).
    pub fn annihilation_squared(&self) -> CMat {
        self.oscillator_op(|n, m| {
            if m == n + 2 {
                ((m * (m - 1)) as f64).sqrt()
            } else {
                0.0
            }
        })
    }

    /// (a a† + a† a)/2 = a†a + 1/2, exact up to the truncation edge.
    pub fn symmetric_number(&self) -> CMat {
        self.oscillator_op(|n, m| if n == m { n as f64 + 0.5 } else { 0.0 })
    }

    pub fn number(&self) -> CMat {
        self.oscillator_op(|n, m| if n == m { n as f64 } else { 0.0 })
    }

    fn qubit_op(&self, elem: impl Fn(QubitLevel, QubitLevel) -> f64) -> Option<CMat> {
        if !self.qubit {
            return None;
        }
        let d = self.dim();
        Some(Mat::from_fn(d, d, |i, j| {
            let (n, s) = self.components(i);
            let (m, t) = self.components(j);
            if n == m {
                real(elem(s.unwrap(), t.unwrap()))
            } else {
                real(0.0)
            }
        }))
    }

    pub fn tau_z(&self) -> Option<CMat> {
        self.qubit_op(|s, t| if s == t { s.tau_z() } else { 0.0 })
    }

    /// τ⁺ = |↑⟩⟨↓|
    pub fn tau_plus(&self) -> Option<CMat> {
        self.qubit_op(|s, t| {
            if s == QubitLevel::Up && t == QubitLevel::Down {
                1.0
            } else {
                0.0
            }
        })
    }

    /// τ⁻ = |↓⟩⟨↑|
    pub fn tau_minus(&self) -> Option<CMat> {
        self.qubit_op(|s, t| {
            if s == QubitLevel::Down && t == QubitLevel::Up {
                1.0
            } else {
                0.0
            }
        })
    }

    pub fn qubit_projector(&self, level: QubitLevel) -> Option<CMat> {
        self.qubit_op(|s, t| if s == level && t == level { 1.0 } else { 0.0 })
    }
}
