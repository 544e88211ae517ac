//! Exact statevector simulation of small circuits.
//!
//! Qubit `q` is bit `q` of the basis index (little-endian). Rotations follow
//! `R_P(θ) = exp(-iθP/2)`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};

/// Largest register the simulator (and the dense oracle) accepts.
pub const MAX_QUBITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// 2x2 matrix in the computational basis.
    pub fn matrix(self) -> DMatrix<Complex64> {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            Pauli::I => DMatrix::from_row_slice(2, 2, &[l, o, o, l]),
            Pauli::X => DMatrix::from_row_slice(2, 2, &[o, l, l, o]),
            Pauli::Y => DMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
            Pauli::Z => DMatrix::from_row_slice(2, 2, &[l, o, o, -l]),
        }
    }
}

/// A tensor product of single-qubit Paulis, stored as X/Z bit masks.
///
/// The textual form puts qubit 0 first: `"ZI"` is `Z` on qubit 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n: usize,
    x: u64,
    z: u64,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        Self { n, x: 0, z: 0 }
    }

    pub fn from_ops(ops: &[Pauli]) -> Self {
        let mut s = Self::identity(ops.len());
        for (q, &p) in ops.iter().enumerate() {
            s.set(q, p);
        }
        s
    }

    /// Identity everywhere except `ops` on the listed qubits.
    pub fn with_ops(n: usize, ops: &[(usize, Pauli)]) -> Self {
        let mut s = Self::identity(n);
        for &(q, p) in ops {
            s.set(q, p);
        }
        s
    }

    fn set(&mut self, q: usize, p: Pauli) {
        let bit = 1u64 << q;
        self.x &= !bit;
        self.z &= !bit;
        match p {
            Pauli::I => {}
            Pauli::X => self.x |= bit,
            Pauli::Z => self.z |= bit,
            Pauli::Y => {
                self.x |= bit;
                self.z |= bit;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, q: usize) -> Pauli {
        let bit = 1u64 << q;
        match (self.x & bit != 0, self.z & bit != 0) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (false, true) => Pauli::Z,
            (true, true) => Pauli::Y,
        }
    }

    pub fn ops(&self) -> impl Iterator<Item = Pauli> + '_ {
        (0..self.n).map(|q| self.get(q))
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    /// Dense `2^n x 2^n` matrix built by Kronecker products.
    pub fn dense_matrix(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
        // qubit n-1 is the most significant factor
        for q in (0..self.n).rev() {
            m = m.kronecker(&self.get(q).matrix());
        }
        m
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in self.ops() {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let ops = s
            .chars()
            .map(|c| {
                Pauli::from_char(c).ok_or_else(|| Error::config(format!("invalid Pauli label {c:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if ops.is_empty() || ops.len() > 64 {
            return Err(Error::config(format!("Pauli string {s:?} has unsupported length")));
        }
        Ok(Self::from_ops(&ops))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    H,
    Cx,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub target: usize,
    pub control: Option<usize>,
    /// Rotation angle in radians; ignored by `H` and `CX`.
    pub angle: f64,
}

impl Gate {
    pub fn rx(target: usize, angle: f64) -> Self {
        Self { kind: GateKind::Rx, target, control: None, angle }
    }

    pub fn ry(target: usize, angle: f64) -> Self {
        Self { kind: GateKind::Ry, target, control: None, angle }
    }

    pub fn rz(target: usize, angle: f64) -> Self {
        Self { kind: GateKind::Rz, target, control: None, angle }
    }

    pub fn h(target: usize) -> Self {
        Self { kind: GateKind::H, target, control: None, angle: 0.0 }
    }

    pub fn cx(control: usize, target: usize) -> Self {
        Self { kind: GateKind::Cx, target, control: Some(control), angle: 0.0 }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.target >= n {
            return Err(Error::config(format!("gate target {} out of range for {n} qubits", self.target)));
        }
        match (self.kind, self.control) {
            (GateKind::Cx, Some(c)) if c >= n => {
                Err(Error::config(format!("gate control {c} out of range for {n} qubits")))
            }
            (GateKind::Cx, Some(c)) if c == self.target => {
                Err(Error::config("CX control and target coincide"))
            }
            (GateKind::Cx, None) => Err(Error::config("CX requires a control qubit")),
            (GateKind::Cx, Some(_)) => Ok(()),
            (_, Some(_)) => Err(Error::config("only CX takes a control qubit")),
            (_, None) if !self.angle.is_finite() => Err(Error::config("non-finite rotation angle")),
            _ => Ok(()),
        }
    }

    /// Single-qubit unitary as `[[m00, m01], [m10, m11]]`.
    fn single_qubit_matrix(&self) -> [[Complex64; 2]; 2] {
        let half = 0.5 * self.angle;
        let (s, c) = half.sin_cos();
        let z = Complex64::new(0.0, 0.0);
        match self.kind {
            GateKind::Rx => [
                [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
                [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
            ],
            GateKind::Ry => [
                [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
                [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
            ],
            GateKind::Rz => [
                [Complex64::new(c, -s), z],
                [z, Complex64::new(c, s)],
            ],
            GateKind::H => {
                let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                [[r, r], [r, -r]]
            }
            GateKind::Cx => unreachable!("CX is not a single-qubit gate"),
        }
    }
}

/// An ordered gate list on a fixed register.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n: usize,
    gates: Vec<Gate>,
    cx_depth: usize,
}

impl Circuit {
    pub fn new(n: usize) -> Result<Self> {
        check_qubits(n)?;
        Ok(Self { n, gates: Vec::new(), cx_depth: 0 })
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.n)?;
        if gate.kind == GateKind::Cx {
            self.cx_depth += 1;
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Number of CX gates; drives the static-noise model.
    pub fn cx_depth(&self) -> usize {
        self.cx_depth
    }

    /// Run the circuit on `|0…0⟩`.
    pub fn simulate(&self) -> State {
        let mut state = State::init_zero(self.n).expect("circuit register already validated");
        for g in &self.gates {
            state.apply_valid(g);
        }
        state
    }
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::config(format!("qubit count {n} outside 1..={MAX_QUBITS}")));
    }
    Ok(())
}

/// A pure state of `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    n: usize,
    amps: Vec<Complex64>,
}

impl State {
    pub fn init_zero(n: usize) -> Result<Self> {
        check_qubits(n)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    /// Wrap explicit amplitudes; they are renormalised.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let n = amps.len().trailing_zeros() as usize;
        if !amps.len().is_power_of_two() {
            return Err(Error::config("amplitude count is not a power of two"));
        }
        check_qubits(n)?;
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::config("amplitudes have zero or non-finite norm"));
        }
        Ok(Self { n, amps: amps.into_iter().map(|a| a / norm).collect() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n)?;
        self.apply_valid(gate);
        Ok(())
    }

    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.n != self.n {
            return Err(Error::config(format!(
                "circuit acts on {} qubits, state has {}",
                circuit.n, self.n
            )));
        }
        for g in &circuit.gates {
            self.apply_valid(g);
        }
        Ok(())
    }

    fn apply_valid(&mut self, gate: &Gate) {
        let tbit = 1usize << gate.target;
        if gate.kind == GateKind::Cx {
            let cbit = 1usize << gate.control.expect("validated");
            for i in 0..self.amps.len() {
                if i & cbit != 0 && i & tbit == 0 {
                    self.amps.swap(i, i | tbit);
                }
            }
            return;
        }
        let m = gate.single_qubit_matrix();
        for i in 0..self.amps.len() {
            if i & tbit == 0 {
                let a0 = self.amps[i];
                let a1 = self.amps[i | tbit];
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i | tbit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    /// `⟨ψ|P|ψ⟩`, computed from the bit-mask action
    /// `P|b⟩ = i^{#Y} (-1)^{|b ∧ z|} |b ⊕ x⟩`.
    pub fn expectation(&self, pauli: &PauliString) -> Result<f64> {
        if pauli.len() != self.n {
            return Err(Error::config(format!(
                "Pauli string of length {} on a {}-qubit state",
                pauli.len(),
                self.n
            )));
        }
        let x = pauli.x_mask() as usize;
        let z = pauli.z_mask() as usize;
        let mut acc = Complex64::new(0.0, 0.0);
        for (b, amp) in self.amps.iter().enumerate() {
            let partner = self.amps[b ^ x];
            let term = partner.conj() * amp;
            if (b & z).count_ones() % 2 == 1 {
                acc -= term;
            } else {
                acc += term;
            }
        }
        let phase = match (pauli.x_mask() & pauli.z_mask()).count_ones() % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        Ok((phase * acc).re.clamp(-1.0, 1.0))
    }

    /// `⟨ψ|M|ψ⟩` against an explicit dense matrix.
    pub fn dense_expectation(&self, matrix: &DMatrix<Complex64>) -> Result<f64> {
        let dim = self.amps.len();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::config("dense matrix dimension does not match state"));
        }
        let psi = nalgebra::DVector::from_column_slice(&self.amps);
        Ok((psi.adjoint() * matrix * &psi)[(0, 0)].re)
    }
}

/// Shot-sampled estimate of `⟨P⟩`.
///
/// Measuring `P` in its eigenbasis gives a ±1 outcome whose `+1` probability
/// is `(1 + ⟨P⟩)/2`; each shot is an independent draw of that outcome.
pub fn sample_pauli_estimate<R: Rng + ?Sized>(
    state: &State,
    pauli: &PauliString,
    shots: u32,
    rng: &mut R,
) -> Result<f64> {
    let exact = state.expectation(pauli)?;
    sample_parity_mean(exact, shots, rng)
}

/// Empirical mean of `shots` ±1 outcomes whose mean is `expectation`.
pub fn sample_parity_mean<R: Rng + ?Sized>(expectation: f64, shots: u32, rng: &mut R) -> Result<f64> {
    if shots == 0 {
        return Err(Error::config("shot count must be positive"));
    }
    let p_plus = (0.5 * (1.0 + expectation)).clamp(0.0, 1.0);
    let plus = Binomial::new(u64::from(shots), p_plus)
        .map_err(|e| Error::config(format!("invalid sampling probability: {e}")))?
        .sample(rng);
    Ok((2.0 * plus as f64 - f64::from(shots)) / f64::from(shots))
}
