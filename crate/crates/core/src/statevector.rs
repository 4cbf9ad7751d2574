//! Dense complex statevector kernel.
//!
//! Basis index `b` has qubit `q` in bit `q` (qubit 0 least significant).

use num_complex::Complex64;
use rand::distributions::{Distribution, WeightedIndex};

use crate::clifford::{CliffordFrame, FrameDirection};
use crate::error::{CqeError, Result};
use crate::pauli::{PauliKey, PauliString, PauliSum, Phase};
use crate::rng;

/// Norm drift tolerated by public constructors.
pub const NORM_TOL: f64 = 1e-10;

/// Series terms below this norm end the Taylor expansion in
/// [`Statevector::evolve_hamiltonian`].
const SERIES_TOL: f64 = 1e-14;

const HERMITIAN_TOL: f64 = 1e-12;

#[inline]
fn parity_sign(z: u64, b: u64) -> f64 {
    if (z & b).count_ones() & 1 == 1 {
        -1.0
    } else {
        1.0
    }
}

/// A [`PauliSum`] grouped by X mask for repeated application.
#[derive(Debug, Clone)]
pub struct CompiledPauliSum {
    n_qubits: usize,
    groups: Vec<(u64, Vec<(u64, Complex64)>)>,
}

impl CompiledPauliSum {
    pub fn new(s: &PauliSum) -> Self {
        let mut groups: Vec<(u64, Vec<(u64, Complex64)>)> = Vec::new();
        for (k, c) in s.iter() {
            let coeff = c * Phase::from_exponent(k.y_count()).to_complex();
            match groups.last_mut() {
                Some((x, zs)) if *x == k.x => zs.push((k.z, coeff)),
                _ => groups.push((k.x, vec![(k.z, coeff)])),
            }
        }
        Self {
            n_qubits: s.n_qubits(),
            groups,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    #[inline]
    fn diag(zs: &[(u64, Complex64)], b: u64) -> Complex64 {
        zs.iter()
            .map(|&(z, c)| c * parity_sign(z, b))
            .sum::<Complex64>()
    }

    /// `O|ψ⟩` as a raw amplitude vector.
    pub fn apply(&self, amps: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];
        for (x, zs) in &self.groups {
            for (b, a) in amps.iter().enumerate() {
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let b = b as u64;
                out[(b ^ x) as usize] += Self::diag(zs, b) * a;
            }
        }
        out
    }

    /// `⟨ψ|O|ψ⟩`.
    pub fn expectation(&self, amps: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, zs) in &self.groups {
            for (b, a) in amps.iter().enumerate() {
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let b = b as u64;
                acc += amps[(b ^ x) as usize].conj() * Self::diag(zs, b) * a;
            }
        }
        acc
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    /// `|0…0⟩`.
    pub fn zero_state(n_qubits: usize) -> Self {
        Self::basis_state(n_qubits, 0)
    }

    pub fn basis_state(n_qubits: usize, index: u64) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[index as usize] = Complex64::new(1.0, 0.0);
        Self { n_qubits, amps }
    }

    /// Takes amplitudes that must already be normalized.
    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != 1 << n_qubits {
            return Err(CqeError::Dimension {
                expected: 1 << n_qubits,
                found: amps.len(),
            });
        }
        let s = Self { n_qubits, amps };
        let norm = s.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(CqeError::NotNormalized(norm));
        }
        Ok(s)
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized(n_qubits: usize, mut amps: Vec<Complex64>) -> Result<Self> {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(CqeError::NotNormalized(norm));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Self::from_amplitudes(n_qubits, amps)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &Statevector) -> Result<Complex64> {
        self.check(other.n_qubits)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    fn check(&self, n: usize) -> Result<()> {
        if n != self.n_qubits {
            return Err(CqeError::Dimension {
                expected: self.n_qubits,
                found: n,
            });
        }
        Ok(())
    }

    /// `e^{iθP}|ψ⟩ = cos θ |ψ⟩ + i sin θ P|ψ⟩`.
    pub fn apply_pauli_exponential(&self, p: &PauliString, theta: f64) -> Result<Statevector> {
        let mut out = self.clone();
        out.apply_pauli_exponential_mut(p, theta)?;
        Ok(out)
    }

    pub fn apply_pauli_exponential_mut(&mut self, p: &PauliString, theta: f64) -> Result<()> {
        self.check(p.n_qubits())?;
        if !p.is_hermitian() {
            return Err(CqeError::NonHermitianString(p.to_string()));
        }
        self.rotate_by_key(p.key(), p.phase(), theta);
        Ok(())
    }

    /// In-place `e^{iθ·phase·P}` for a Hermitian label string.
    pub(crate) fn rotate_by_key(&mut self, key: PauliKey, phase: Phase, theta: f64) {
        let ph = (phase * Phase::from_exponent(key.y_count())).to_complex();
        let (s, c) = theta.sin_cos();
        let is = Complex64::new(0.0, s) * ph;
        let (x, z) = (key.x, key.z);
        if x == 0 {
            for (b, a) in self.amps.iter_mut().enumerate() {
                *a *= c + is * parity_sign(z, b as u64);
            }
            return;
        }
        for b in 0..self.amps.len() as u64 {
            let other = b ^ x;
            if other < b {
                continue;
            }
            let (ab, ao) = (self.amps[b as usize], self.amps[other as usize]);
            self.amps[b as usize] = ab * c + is * parity_sign(z, other) * ao;
            self.amps[other as usize] = ao * c + is * parity_sign(z, b) * ab;
        }
    }

    /// `O|ψ⟩` (not normalized).
    pub fn apply_operator(&self, o: &PauliSum) -> Result<Vec<Complex64>> {
        self.check(o.n_qubits())?;
        Ok(CompiledPauliSum::new(o).apply(&self.amps))
    }

    /// `e^{iδH}|ψ⟩` by a sub-stepped Taylor series; the identity component of
    /// `H` is applied as an exact global phase.
    pub fn evolve_hamiltonian(&self, h: &PauliSum, delta: f64) -> Result<Statevector> {
        self.check(h.n_qubits())?;
        h.ensure_hermitian(HERMITIAN_TOL)?;
        if delta == 0.0 {
            return Ok(self.clone());
        }
        let shift = h.coefficient(PauliKey::IDENTITY).re;
        let rest = h.without_identity();
        let op = CompiledPauliSum::new(&rest);
        let steps = (delta.abs() * rest.one_norm() / 0.5).ceil().max(1.0) as usize;
        let dt = delta / steps as f64;
        let mut amps = self.amps.clone();
        for _ in 0..steps {
            let mut term = amps.clone();
            let mut k = 1usize;
            loop {
                let applied = op.apply(&term);
                let f = Complex64::new(0.0, dt / k as f64);
                term = applied.into_iter().map(|a| a * f).collect();
                let tnorm = term.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
                amps.iter_mut().zip(&term).for_each(|(a, t)| *a += t);
                if tnorm < SERIES_TOL || k > 200 {
                    break;
                }
                k += 1;
            }
        }
        let global = Complex64::from_polar(1.0, delta * shift);
        amps.iter_mut().for_each(|a| *a *= global);
        Ok(Self {
            n_qubits: self.n_qubits,
            amps,
        })
    }

    /// `⟨ψ|O|ψ⟩`; for Hermitian `O` the imaginary part is checked against
    /// 1e−12 relative to the operator scale.
    pub fn expectation(&self, o: &PauliSum) -> Result<Complex64> {
        self.check(o.n_qubits())?;
        let v = CompiledPauliSum::new(o).expectation(&self.amps);
        if o.is_hermitian(HERMITIAN_TOL) {
            debug_assert!(
                v.im.abs() <= 1e-12 * o.one_norm().max(1.0),
                "Hermitian expectation has imaginary part {}",
                v.im
            );
            return Ok(Complex64::new(v.re, 0.0));
        }
        Ok(v)
    }

    pub fn expectation_compiled(&self, o: &CompiledPauliSum) -> Result<Complex64> {
        self.check(o.n_qubits())?;
        Ok(o.expectation(&self.amps))
    }

    /// Applies `Û = ⊗ U_q` (forward) or `Û†` (inverse).
    pub fn rotate_frame(&self, frame: &CliffordFrame, direction: FrameDirection) -> Result<Statevector> {
        self.check(frame.n_qubits())?;
        let mut amps = self.amps.clone();
        for q in 0..self.n_qubits {
            let id = frame.element_ids()[q];
            if id == 0 {
                continue;
            }
            let u = frame.element(q).unitary;
            let m = match direction {
                FrameDirection::Forward => u,
                FrameDirection::Inverse => [
                    [u[0][0].conj(), u[1][0].conj()],
                    [u[0][1].conj(), u[1][1].conj()],
                ],
            };
            let bit = 1usize << q;
            for b in 0..amps.len() {
                if b & bit != 0 {
                    continue;
                }
                let (a0, a1) = (amps[b], amps[b | bit]);
                amps[b] = m[0][0] * a0 + m[0][1] * a1;
                amps[b | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
        Ok(Self {
            n_qubits: self.n_qubits,
            amps,
        })
    }

    /// `shots` i.i.d. computational-basis samples, returned as basis indices.
    pub fn sample_bitstrings(&self, shots: usize, seed: u64) -> Result<Vec<u64>> {
        if shots == 0 {
            return Err(CqeError::InvalidConfig("shots must be ≥ 1".into()));
        }
        let dist = WeightedIndex::new(self.probabilities())
            .map_err(|e| CqeError::InvalidConfig(format!("cannot sample state: {e}")))?;
        let mut rng = rng::seeded(seed);
        Ok((0..shots).map(|_| dist.sample(&mut rng) as u64).collect())
    }
}
