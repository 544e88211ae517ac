//! Pauli-sum observables: the 1-D transverse-field Ising model, a plain
//! text file format for externally supplied Hamiltonians, and exact
//! ground energies by dense diagonalisation.
//!
//! File format: one term per line, `coefficient whitespace paulistring`,
//! `#` starts a comment, and the first non-comment line may be `n=<int>`.
//! Repeated Pauli strings are merged by adding their coefficients.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::statevector::{sample_parity_mean, PauliString, State, MAX_QUBITS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Open,
    Periodic,
}

impl std::str::FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "open" => Ok(Boundary::Open),
            "periodic" => Ok(Boundary::Periodic),
            other => Err(Error::config(format!("unknown boundary {other:?}"))),
        }
    }
}

/// `Σ_k c_k P_k` over `n` qubits with unique Pauli strings.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n: usize,
    terms: Vec<(f64, PauliString)>,
}

impl PauliSum {
    /// Validate and merge `terms`; first occurrence fixes a string's position.
    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (f64, PauliString)>) -> Result<Self> {
        if n == 0 || n > 64 {
            return Err(Error::config(format!("unsupported qubit count {n}")));
        }
        let mut merged: Vec<(f64, PauliString)> = Vec::new();
        let mut index: HashMap<PauliString, usize> = HashMap::new();
        for (c, p) in terms {
            if p.len() != n {
                return Err(Error::Format(format!("term {p} has length {}, expected {n}", p.len())));
            }
            if !c.is_finite() {
                return Err(Error::config(format!("non-finite coefficient on {p}")));
            }
            match index.get(&p) {
                Some(&i) => merged[i].0 += c,
                None => {
                    index.insert(p, merged.len());
                    merged.push((c, p));
                }
            }
        }
        Ok(Self { n, terms: merged })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            n: self.n,
            terms: self.terms.iter().map(|&(c, p)| (a * c, p)).collect(),
        }
    }

    /// Parse the text format; `path` only labels error messages.
    pub fn parse(text: &str, path: Option<&Path>) -> Result<Self> {
        let mut declared: Option<usize> = None;
        let mut terms = Vec::new();
        let mut seen_content = false;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if !seen_content {
                seen_content = true;
                if let Some(rest) = line.strip_prefix("n=") {
                    let n = rest
                        .trim()
                        .parse::<usize>()
                        .map_err(|_| Error::parse(path, line_no, format!("bad qubit count {rest:?}")))?;
                    declared = Some(n);
                    continue;
                }
            }
            let mut fields = line.split_whitespace();
            let (Some(coeff), Some(label), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(Error::parse(path, line_no, format!("expected `coefficient paulistring`, got {line:?}")));
            };
            let coeff: f64 = coeff
                .replace('\u{2212}', "-")
                .parse()
                .map_err(|_| Error::parse(path, line_no, format!("bad coefficient {coeff:?}")))?;
            if !coeff.is_finite() {
                return Err(Error::parse(path, line_no, "non-finite coefficient"));
            }
            let pauli: PauliString = label
                .parse()
                .map_err(|_| Error::parse(path, line_no, format!("bad Pauli string {label:?}")))?;
            terms.push((line_no, coeff, pauli));
        }
        let Some(&(_, _, first)) = terms.first() else {
            return Err(Error::Format("no terms".into()));
        };
        let n = declared.unwrap_or(first.len());
        if let Some(&(line_no, _, p)) = terms.iter().find(|(_, _, p)| p.len() != n) {
            return Err(Error::Format(format!(
                "line {line_no}: term {p} has length {}, expected {n}",
                p.len()
            )));
        }
        Self::from_terms(n, terms.into_iter().map(|(_, c, p)| (c, p)))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, Some(path))
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("n={}\n", self.n);
        for (c, p) in &self.terms {
            let _ = writeln!(out, "{c:?} {p}");
        }
        out
    }

    /// Coefficient of the all-identity term (zero when absent).
    pub fn identity_coefficient(&self) -> f64 {
        self.terms.iter().filter(|(_, p)| p.is_identity()).map(|(c, _)| c).sum()
    }

    /// Analytic `⟨ψ|H|ψ⟩`.
    pub fn expectation(&self, state: &State) -> Result<f64> {
        self.check_state(state)?;
        self.terms
            .iter()
            .map(|(c, p)| Ok(c * state.expectation(p)?))
            .sum()
    }

    /// The VQE objective: analytic when `shots` is `None`, otherwise each
    /// non-identity term is sampled independently with `shots` shots.
    pub fn objective<R: Rng + ?Sized>(&self, state: &State, shots: Option<u32>, rng: &mut R) -> Result<f64> {
        let Some(shots) = shots else {
            return self.expectation(state);
        };
        self.check_state(state)?;
        let mut total = 0.0;
        for (c, p) in &self.terms {
            total += if p.is_identity() {
                *c
            } else {
                c * sample_parity_mean(state.expectation(p)?, shots, rng)?
            };
        }
        Ok(total)
    }

    fn check_state(&self, state: &State) -> Result<()> {
        if state.n() != self.n {
            return Err(Error::config(format!(
                "Hamiltonian on {} qubits, state on {}",
                self.n,
                state.n()
            )));
        }
        Ok(())
    }

    /// Dense `2^n x 2^n` matrix assembled from each term's bit-mask action.
    pub fn dense_matrix(&self) -> Result<DMatrix<Complex64>> {
        if self.n > MAX_QUBITS {
            return Err(Error::Capability(format!(
                "dense matrices are limited to {MAX_QUBITS} qubits, got {}",
                self.n
            )));
        }
        let dim = 1usize << self.n;
        let mut m = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
        for (c, p) in &self.terms {
            let x = p.x_mask() as usize;
            let z = p.z_mask() as usize;
            let phase = match (p.x_mask() & p.z_mask()).count_ones() % 4 {
                0 => Complex64::new(1.0, 0.0),
                1 => Complex64::new(0.0, 1.0),
                2 => Complex64::new(-1.0, 0.0),
                _ => Complex64::new(0.0, -1.0),
            };
            for b in 0..dim {
                let sign = if (b & z).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
                m[(b ^ x, b)] += phase * (sign * c);
            }
        }
        Ok(m)
    }

    /// Smallest eigenvalue of the dense matrix.
    pub fn exact_ground_energy(&self) -> Result<f64> {
        let m = self.dense_matrix()?;
        let real = m.iter().all(|z| z.im == 0.0);
        let lowest = if real {
            let r = m.map(|z| z.re);
            r.symmetric_eigen().eigenvalues.min()
        } else {
            m.symmetric_eigen().eigenvalues.min()
        };
        Ok(lowest)
    }
}

/// `H = -J Σ Z_i Z_{i+1} - h Σ X_i`; the periodic chain adds the `(n-1, 0)` bond.
pub fn tfim_1d(n: usize, coupling: f64, field: f64, boundary: Boundary) -> Result<PauliSum> {
    use crate::statevector::Pauli;
    if n < 2 {
        return Err(Error::config(format!("TFIM chain needs at least 2 sites, got {n}")));
    }
    let bonds = match boundary {
        Boundary::Open => n - 1,
        Boundary::Periodic => n,
    };
    let zz = (0..bonds).map(|i| {
        (
            -coupling,
            PauliString::with_ops(n, &[(i, Pauli::Z), ((i + 1) % n, Pauli::Z)]),
        )
    });
    let x = (0..n).map(|i| (-field, PauliString::with_ops(n, &[(i, Pauli::X)])));
    PauliSum::from_terms(n, zz.chain(x))
}
