//! Hardware-efficient parameterized circuits.
//!
//! Both families alternate rotation layers with a linear CX chain
//! (`CX(q, q+1)` for `q = 0..n-1`): `reps` entanglement blocks, `reps + 1`
//! rotation layers. An SU2 layer is RY on every qubit followed by RZ on
//! every qubit; an RA ("real amplitudes") layer is RY only.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::statevector::{Circuit, Gate, State};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnsatzKind {
    Su2,
    Ra,
}

impl AnsatzKind {
    fn rotations_per_qubit(self) -> usize {
        match self {
            AnsatzKind::Su2 => 2,
            AnsatzKind::Ra => 1,
        }
    }
}

impl FromStr for AnsatzKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "su2" => Ok(AnsatzKind::Su2),
            "ra" => Ok(AnsatzKind::Ra),
            other => Err(Error::config(format!("unknown ansatz kind {other:?}"))),
        }
    }
}

impl fmt::Display for AnsatzKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            AnsatzKind::Su2 => "SU2",
            AnsatzKind::Ra => "RA",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnsatzSpec {
    kind: AnsatzKind,
    n: usize,
    reps: usize,
}

impl AnsatzSpec {
    pub fn new(kind: AnsatzKind, n: usize, reps: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::config(format!("ansatz needs at least 2 qubits, got {n}")));
        }
        if n > crate::statevector::MAX_QUBITS {
            return Err(Error::config(format!("ansatz width {n} exceeds the simulator limit")));
        }
        if reps < 1 {
            return Err(Error::config("ansatz needs at least one repetition"));
        }
        Ok(Self { kind, n, reps })
    }

    pub fn kind(&self) -> AnsatzKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn reps(&self) -> usize {
        self.reps
    }

    pub fn param_count(&self) -> usize {
        self.kind.rotations_per_qubit() * self.n * (self.reps + 1)
    }

    pub fn cx_depth(&self) -> usize {
        self.reps * (self.n - 1)
    }

    pub fn build(&self, params: &[f64]) -> Result<Circuit> {
        if params.len() != self.param_count() {
            return Err(Error::config(format!(
                "{} ansatz with n={} reps={} takes {} parameters, got {}",
                self.kind,
                self.n,
                self.reps,
                self.param_count(),
                params.len()
            )));
        }
        let mut circuit = Circuit::new(self.n)?;
        let mut p = params.iter().copied();
        for layer in 0..=self.reps {
            for q in 0..self.n {
                circuit.push(Gate::ry(q, p.next().unwrap()))?;
            }
            if self.kind == AnsatzKind::Su2 {
                for q in 0..self.n {
                    circuit.push(Gate::rz(q, p.next().unwrap()))?;
                }
            }
            if layer < self.reps {
                for q in 0..self.n - 1 {
                    circuit.push(Gate::cx(q, q + 1))?;
                }
            }
        }
        Ok(circuit)
    }

    /// Build and simulate from `|0…0⟩`.
    pub fn prepare(&self, params: &[f64]) -> Result<State> {
        Ok(self.build(params)?.simulate())
    }
}
