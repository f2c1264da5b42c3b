//! Pauli operators in binary symplectic form.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

pub(crate) fn words(n: usize) -> usize {
    n.div_ceil(64)
}

/// `i^phase * prod_j X_j^{x_j} Z_j^{z_j}`, with X to the left of Z on each qubit.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: u8,
}

/// Single-qubit Pauli label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const NONTRIVIAL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

impl PauliOperator {
    pub fn identity(n: usize) -> Self {
        PauliOperator {
            n,
            x: vec![0; words(n)],
            z: vec![0; words(n)],
            phase: 0,
        }
    }

    /// Hermitian operator with the given single-qubit factors and sign +1.
    pub fn from_paulis(ps: &[Pauli]) -> Self {
        let mut p = PauliOperator::identity(ps.len());
        for (i, &q) in ps.iter().enumerate() {
            p.set(i, q);
        }
        p
    }

    /// Hermitian single-qubit operator `p` acting on qubit `q` of `n`.
    pub fn single(n: usize, q: usize, p: Pauli) -> Self {
        let mut op = PauliOperator::identity(n);
        op.set(q, p);
        op
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn x_bit(&self, q: usize) -> bool {
        self.x[q / 64] >> (q % 64) & 1 == 1
    }

    pub fn z_bit(&self, q: usize) -> bool {
        self.z[q / 64] >> (q % 64) & 1 == 1
    }

    pub fn get(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x_bit(q), self.z_bit(q))
    }

    pub fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub fn z_words(&self) -> &[u64] {
        &self.z
    }

    /// Replace the factor on `q` by the Hermitian Pauli `p`, keeping the
    /// overall Hermitian sign.
    pub fn set(&mut self, q: usize, p: Pauli) {
        let before = self.x_bit(q) && self.z_bit(q);
        let (xb, zb) = p.bits();
        let (w, b) = (q / 64, 1u64 << (q % 64));
        self.x[w] = if xb { self.x[w] | b } else { self.x[w] & !b };
        self.z[w] = if zb { self.z[w] | b } else { self.z[w] & !b };
        // Each Y = i XZ contributes one factor of i in this representation.
        let after = xb && zb;
        self.phase = (self.phase + after as u8 + 4 - before as u8) % 4;
    }

    /// Overall phase as a power of `i` in the Hermitian (Y-based) reading.
    pub fn hermitian_phase(&self) -> u8 {
        let ys = self
            .x
            .iter()
            .zip(&self.z)
            .map(|(a, b)| (a & b).count_ones())
            .sum::<u32>();
        ((self.phase as u32 + 4 * ys - ys) % 4) as u8
    }

    /// Phase as a power of `i` in the `X^x Z^z` reading.
    pub fn xz_phase(&self) -> u8 {
        self.phase
    }

    pub fn with_xz_phase(mut self, phase: u8) -> Self {
        self.phase = phase % 4;
        self
    }

    /// Multiply by `i^k`.
    pub fn scale(mut self, k: u8) -> Self {
        self.phase = (self.phase + k) % 4;
        self
    }

    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    pub fn is_identity_up_to_phase(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    /// Equality ignoring the phase.
    pub fn same_support_type(&self, other: &Self) -> bool {
        self.x == other.x && self.z == other.z
    }

    pub fn commutes(&self, other: &Self) -> bool {
        assert_eq!(self.n, other.n);
        let s: u32 = (0..self.x.len())
            .map(|w| (self.x[w] & other.z[w]).count_ones() + (self.z[w] & other.x[w]).count_ones())
            .sum();
        s.is_multiple_of(2)
    }

    /// Group product `self * other`.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        // X^a Z^b X^c Z^d = (-1)^{b.c} X^{a+c} Z^{b+d}
        let swaps: u32 = (0..self.x.len())
            .map(|w| (self.z[w] & other.x[w]).count_ones())
            .sum();
        PauliOperator {
            n: self.n,
            x: self.x.iter().zip(&other.x).map(|(a, b)| a ^ b).collect(),
            z: self.z.iter().zip(&other.z).map(|(a, b)| a ^ b).collect(),
            phase: ((self.phase as u32 + other.phase as u32 + 2 * (swaps % 2)) % 4) as u8,
        }
    }

    /// Restrict to the listed qubits, in order, dropping the phase.
    pub fn restrict(&self, qubits: &[usize]) -> PauliOperator {
        let ps: Vec<Pauli> = qubits.iter().map(|&q| self.get(q)).collect();
        PauliOperator::from_paulis(&ps)
    }

    /// `(x, z)` bit masks of the first 64 qubits.
    pub fn masks64(&self) -> (u64, u64) {
        (
            self.x.first().copied().unwrap_or(0),
            self.z.first().copied().unwrap_or(0),
        )
    }

    pub fn from_masks(n: usize, x: u64, z: u64) -> Self {
        assert!(n <= 64);
        let mut p = PauliOperator::identity(n);
        if n > 0 {
            p.x[0] = x;
            p.z[0] = z;
            p.phase = ((x & z).count_ones() % 4) as u8;
        }
        p
    }

    /// Hermitian operator from 128-bit masks; `n <= 128`.
    pub fn from_masks128(n: usize, x: u128, z: u128) -> Self {
        assert!(n <= 128);
        let mut p = PauliOperator::identity(n);
        for (w, (xw, zw)) in p.x.iter_mut().zip(p.z.iter_mut()).enumerate() {
            *xw = (x >> (64 * w)) as u64;
            *zw = (z >> (64 * w)) as u64;
        }
        p.phase = ((x & z).count_ones() % 4) as u8;
        p
    }

    pub fn label(&self) -> String {
        (0..self.n).map(|q| self.get(q).symbol()).collect()
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = ["+", "+i", "-", "-i"][self.hermitian_phase() as usize];
        write!(f, "{sign}{}", self.label())
    }
}

impl fmt::Debug for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for PauliOperator {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl FromStr for PauliOperator {
    type Err = String;
    /// Parses `[+|-][i]` followed by letters from `IXYZ`.
    fn from_str(s: &str) -> Result<Self, String> {
        let (neg, rest) = match s.strip_prefix('-') {
            Some(r) => (true, r),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let (imag, rest) = match rest.strip_prefix('i') {
            Some(r) => (true, r),
            None => (false, rest),
        };
        let ps = rest
            .chars()
            .map(|c| match c {
                'I' | '_' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                _ => Err(format!("bad Pauli letter {c:?}")),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PauliOperator::from_paulis(&ps).scale(2 * neg as u8 + imag as u8))
    }
}
