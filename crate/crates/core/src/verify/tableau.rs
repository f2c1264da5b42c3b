//! Aaronson–Gottesman stabilizer tableau.

use super::pauli::{words, PauliOperator};

/// Destabilizer rows `0..n`, stabilizer rows `n..2n`, and one scratch row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerTableau {
    n: usize,
    w: usize,
    x: Vec<Vec<u64>>,
    z: Vec<Vec<u64>>,
    r: Vec<bool>,
}

impl StabilizerTableau {
    /// `|0...0>` on `n` qubits.
    pub fn zero_state(n: usize) -> Self {
        let w = words(n);
        let mut t = StabilizerTableau {
            n,
            w,
            x: vec![vec![0; w]; 2 * n + 1],
            z: vec![vec![0; w]; 2 * n + 1],
            r: vec![false; 2 * n + 1],
        };
        for i in 0..n {
            t.x[i][i / 64] |= 1 << (i % 64);
            t.z[n + i][i / 64] |= 1 << (i % 64);
        }
        t
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    #[inline]
    fn bit(v: &[u64], q: usize) -> bool {
        v[q / 64] >> (q % 64) & 1 == 1
    }

    #[inline]
    fn flip(v: &mut [u64], q: usize) {
        v[q / 64] ^= 1 << (q % 64);
    }

    pub fn h(&mut self, a: usize) {
        for i in 0..2 * self.n {
            let (xa, za) = (Self::bit(&self.x[i], a), Self::bit(&self.z[i], a));
            self.r[i] ^= xa && za;
            if xa != za {
                Self::flip(&mut self.x[i], a);
                Self::flip(&mut self.z[i], a);
            }
        }
    }

    pub fn s(&mut self, a: usize) {
        for i in 0..2 * self.n {
            let (xa, za) = (Self::bit(&self.x[i], a), Self::bit(&self.z[i], a));
            self.r[i] ^= xa && za;
            if xa {
                Self::flip(&mut self.z[i], a);
            }
        }
    }

    pub fn sdg(&mut self, a: usize) {
        self.s(a);
        self.s(a);
        self.s(a);
    }

    pub fn pauli_z(&mut self, a: usize) {
        for i in 0..2 * self.n {
            self.r[i] ^= Self::bit(&self.x[i], a);
        }
    }

    pub fn pauli_x(&mut self, a: usize) {
        for i in 0..2 * self.n {
            self.r[i] ^= Self::bit(&self.z[i], a);
        }
    }

    pub fn cnot(&mut self, a: usize, b: usize) {
        for i in 0..2 * self.n {
            let (xa, za) = (Self::bit(&self.x[i], a), Self::bit(&self.z[i], a));
            let (xb, zb) = (Self::bit(&self.x[i], b), Self::bit(&self.z[i], b));
            self.r[i] ^= xa && zb && (xb == za);
            if xa {
                Self::flip(&mut self.x[i], b);
            }
            if zb {
                Self::flip(&mut self.z[i], a);
            }
        }
    }

    pub fn swap(&mut self, a: usize, b: usize) {
        for i in 0..2 * self.n {
            for v in [&mut self.x[i], &mut self.z[i]] {
                if Self::bit(v, a) != Self::bit(v, b) {
                    Self::flip(v, a);
                    Self::flip(v, b);
                }
            }
        }
    }

    /// Exponent of `i` picked up when multiplying row `i` into row `h`.
    fn rowsum_phase(&self, h: usize, i: usize) -> i32 {
        let mut e: i32 = 0;
        for q in 0..self.n {
            let (x1, z1) = (Self::bit(&self.x[i], q), Self::bit(&self.z[i], q));
            let (x2, z2) = (Self::bit(&self.x[h], q), Self::bit(&self.z[h], q));
            e += match (x1, z1) {
                (false, false) => 0,
                (true, true) => z2 as i32 - x2 as i32,
                (true, false) => (z2 as i32) * (2 * x2 as i32 - 1),
                (false, true) => (x2 as i32) * (1 - 2 * z2 as i32),
            };
        }
        e
    }

    fn rowsum(&mut self, h: usize, i: usize) {
        let e = 2 * self.r[h] as i32 + 2 * self.r[i] as i32 + self.rowsum_phase(h, i);
        self.r[h] = e.rem_euclid(4) == 2;
        for k in 0..self.w {
            let (xi, zi) = (self.x[i][k], self.z[i][k]);
            self.x[h][k] ^= xi;
            self.z[h][k] ^= zi;
        }
    }

    /// A stabilizer generator anticommuting with `Z_a`, if the outcome of
    /// measuring `a` is random.
    pub fn anticommuting_stabilizer(&self, a: usize) -> Option<PauliOperator> {
        (self.n..2 * self.n)
            .find(|&i| Self::bit(&self.x[i], a))
            .map(|i| self.row_operator(i))
    }

    /// Measure Z on `a`. Random outcomes resolve to 0 (the +1 eigenvalue).
    /// Returns `(outcome, was_deterministic)`.
    pub fn measure(&mut self, a: usize) -> (bool, bool) {
        let n = self.n;
        if let Some(p) = (n..2 * n).find(|&i| Self::bit(&self.x[i], a)) {
            for i in 0..2 * n {
                if i != p && Self::bit(&self.x[i], a) {
                    self.rowsum(i, p);
                }
            }
            self.x[p - n] = self.x[p].clone();
            self.z[p - n] = self.z[p].clone();
            self.r[p - n] = self.r[p];
            self.x[p] = vec![0; self.w];
            self.z[p] = vec![0; self.w];
            Self::flip(&mut self.z[p], a);
            self.r[p] = false;
            (false, false)
        } else {
            let s = 2 * n;
            self.x[s] = vec![0; self.w];
            self.z[s] = vec![0; self.w];
            self.r[s] = false;
            for i in 0..n {
                if Self::bit(&self.x[i], a) {
                    self.rowsum(s, i + n);
                }
            }
            (self.r[s], true)
        }
    }

    /// Reset `a` to `|0>`.
    pub fn reset(&mut self, a: usize) {
        if self.measure(a).0 {
            self.pauli_x(a);
        }
    }

    fn row_operator(&self, i: usize) -> PauliOperator {
        let mut p = PauliOperator::identity(self.n);
        for q in 0..self.n {
            p.set(
                q,
                super::Pauli::from_bits(Self::bit(&self.x[i], q), Self::bit(&self.z[i], q)),
            );
        }
        p.scale(2 * self.r[i] as u8)
    }

    /// The `n` stabilizer generators with their signs.
    pub fn stabilizers(&self) -> Vec<PauliOperator> {
        (self.n..2 * self.n).map(|i| self.row_operator(i)).collect()
    }

    pub fn destabilizers(&self) -> Vec<PauliOperator> {
        (0..self.n).map(|i| self.row_operator(i)).collect()
    }

    /// `Some(sign)` if `±p` is in the stabilizer group (`true` for `-p`),
    /// `None` if `p` anticommutes with some generator.
    pub fn expectation(&self, p: &PauliOperator) -> Option<bool> {
        assert_eq!(p.num_qubits(), self.n);
        let stabs = self.stabilizers();
        if stabs.iter().any(|s| !s.commutes(p)) {
            return None;
        }
        let destabs = self.destabilizers();
        let mut acc = PauliOperator::identity(self.n);
        for (d, s) in destabs.iter().zip(&stabs) {
            if !d.commutes(p) {
                acc = acc.mul(s);
            }
        }
        debug_assert!(acc.same_support_type(p));
        // acc = i^k p with k in {0, 2}.
        let diff = (acc.hermitian_phase() + 4 - p.hermitian_phase()) % 4;
        Some(diff == 2)
    }

    /// `p` stabilizes the state with eigenvalue +1.
    pub fn is_stabilized_by(&self, p: &PauliOperator) -> bool {
        self.expectation(p) == Some(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn op(s: &str) -> PauliOperator {
        s.parse().unwrap()
    }

    #[test]
    fn zero_state_generators() {
        let t = StabilizerTableau::zero_state(3);
        assert!(t.is_stabilized_by(&op("ZII")));
        assert!(t.is_stabilized_by(&op("ZZZ")));
        assert_eq!(t.expectation(&op("-IZI")), Some(true));
        assert_eq!(t.expectation(&op("XII")), None);
    }

    #[test]
    fn bell_pair() {
        let mut t = StabilizerTableau::zero_state(2);
        t.h(0);
        t.cnot(0, 1);
        assert!(t.is_stabilized_by(&op("XX")));
        assert!(t.is_stabilized_by(&op("ZZ")));
        assert!(t.is_stabilized_by(&op("-YY")));
        let (m0, det0) = t.measure(0);
        assert!(!det0);
        assert!(!m0);
        assert_eq!(t.measure(1), (false, true));
    }

    #[test]
    fn hh_is_identity() {
        let mut t = StabilizerTableau::zero_state(2);
        t.h(1);
        t.h(1);
        assert_eq!(t, StabilizerTableau::zero_state(2));
    }

    #[test]
    fn s_maps_plus_to_plus_i() {
        let mut t = StabilizerTableau::zero_state(1);
        t.h(0);
        t.s(0);
        assert!(t.is_stabilized_by(&op("Y")));
        t.sdg(0);
        assert!(t.is_stabilized_by(&op("X")));
    }

    #[test]
    fn x_flips_measurement() {
        let mut t = StabilizerTableau::zero_state(2);
        t.pauli_x(1);
        assert_eq!(t.measure(1), (true, true));
        t.reset(1);
        assert_eq!(t.measure(1), (false, true));
    }

    #[test]
    fn swap_moves_state() {
        let mut t = StabilizerTableau::zero_state(3);
        t.pauli_x(0);
        t.swap(0, 2);
        assert!(t.is_stabilized_by(&op("-IIZ")));
        assert!(t.is_stabilized_by(&op("ZII")));
    }
}
