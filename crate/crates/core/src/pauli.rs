//! Sparse multi-qubit Pauli algebra.
//!
//! A [`PauliString`] is a phase times a tensor product of single-qubit labels,
//! stored as a pair of bit masks. Per qubit `(x, z)` encodes the label:
//! `(0,0) = I`, `(1,0) = X`, `(1,1) = Y`, `(0,1) = Z`. Qubit `q` lives in bit `q`.
//!
//! A [`PauliSum`] folds the phase into a complex coefficient and keys terms by
//! the masks alone, so Hermiticity is a per-coefficient predicate: a sum is
//! Hermitian iff every coefficient is real.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{CqeError, Result};

/// Default tolerance below which coefficients are dropped.
pub const SIMPLIFY_TOL: f64 = 1e-12;

/// Largest supported register.
pub const MAX_QUBITS: usize = 64;

pub(crate) fn qubit_mask(n_qubits: usize) -> u64 {
    if n_qubits >= 64 {
        u64::MAX
    } else {
        (1u64 << n_qubits) - 1
    }
}

/// Element of {+1, +i, -1, -i}, stored as the exponent of i.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_exponent(k: u32) -> Self {
        Phase((k % 4) as u8)
    }

    pub fn exponent(self) -> u32 {
        self.0 as u32
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    pub fn is_real(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn conj(self) -> Self {
        Phase((4 - self.0) % 4)
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.0 {
            0 => "+1",
            1 => "+i",
            2 => "-1",
            _ => "-i",
        };
        f.write_str(s)
    }
}

/// Single-qubit Pauli label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Key of a phase-free Pauli label string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliKey {
    pub x: u64,
    pub z: u64,
}

impl PauliKey {
    pub const IDENTITY: PauliKey = PauliKey { x: 0, z: 0 };

    pub fn is_identity(self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn support(self) -> u64 {
        self.x | self.z
    }

    pub fn weight(self) -> u32 {
        self.support().count_ones()
    }

    /// Number of Y sites.
    pub fn y_count(self) -> u32 {
        (self.x & self.z).count_ones()
    }

    pub fn commutes_with(self, other: PauliKey) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2 == 0
    }

    /// Qubit-wise commutation: on every shared site the labels agree.
    pub fn qubit_wise_commutes(self, other: PauliKey) -> bool {
        let shared = self.support() & other.support();
        ((self.x ^ other.x) | (self.z ^ other.z)) & shared == 0
    }

    /// Product of two label strings: returns the phase and the label key.
    pub fn mul(self, other: PauliKey) -> (Phase, PauliKey) {
        // Label form: sigma(x, z) = i^{|x&z|} X^x Z^z.
        let out = PauliKey {
            x: self.x ^ other.x,
            z: self.z ^ other.z,
        };
        let k = self.y_count() + other.y_count() + 2 * (self.z & other.x).count_ones()
            + 4 * 64
            - out.y_count();
        (Phase::from_exponent(k), out)
    }

    pub fn label(self, qubit: usize) -> Pauli {
        Pauli::from_bits(self.x >> qubit & 1 == 1, self.z >> qubit & 1 == 1)
    }

    pub fn render(self, n_qubits: usize) -> String {
        (0..n_qubits).map(|q| self.label(q).as_char()).collect()
    }
}

/// Phase times a tensor product of single-qubit Pauli labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    n_qubits: usize,
    key: PauliKey,
    phase: Phase,
}

impl PauliString {
    pub fn new(n_qubits: usize, x_mask: u64, z_mask: u64, phase: Phase) -> Result<Self> {
        if n_qubits > MAX_QUBITS {
            return Err(CqeError::TooManyQubits(n_qubits));
        }
        let mask = qubit_mask(n_qubits);
        if (x_mask | z_mask) & !mask != 0 {
            return Err(CqeError::MaskOutOfRange { n_qubits });
        }
        Ok(Self {
            n_qubits,
            key: PauliKey {
                x: x_mask,
                z: z_mask,
            },
            phase,
        })
    }

    pub(crate) fn from_key(n_qubits: usize, key: PauliKey, phase: Phase) -> Self {
        Self {
            n_qubits,
            key,
            phase,
        }
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self::from_key(n_qubits, PauliKey::IDENTITY, Phase::ONE)
    }

    /// Single-site label on `qubit`.
    pub fn single(n_qubits: usize, qubit: usize, label: Pauli) -> Result<Self> {
        if qubit >= n_qubits {
            return Err(CqeError::IndexOutOfRange {
                index: qubit,
                limit: n_qubits,
            });
        }
        let (x, z) = label.bits();
        Self::new(
            n_qubits,
            (x as u64) << qubit,
            (z as u64) << qubit,
            Phase::ONE,
        )
    }

    pub fn from_labels(labels: &[Pauli]) -> Result<Self> {
        let mut x = 0u64;
        let mut z = 0u64;
        for (q, l) in labels.iter().enumerate() {
            let (bx, bz) = l.bits();
            x |= (bx as u64) << q;
            z |= (bz as u64) << q;
        }
        Self::new(labels.len(), x, z, Phase::ONE)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn x_mask(&self) -> u64 {
        self.key.x
    }

    pub fn z_mask(&self) -> u64 {
        self.key.z
    }

    pub fn key(&self) -> PauliKey {
        self.key
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn with_phase(mut self, phase: Phase) -> Self {
        self.phase = phase;
        self
    }

    pub fn weight(&self) -> u32 {
        self.key.weight()
    }

    pub fn is_identity(&self) -> bool {
        self.key.is_identity() && self.phase == Phase::ONE
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase.is_real()
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        self.key.commutes_with(other.key)
    }

    /// Product `self · other` with the accumulated phase.
    pub fn multiply(&self, other: &PauliString) -> Result<PauliString> {
        if self.n_qubits != other.n_qubits {
            return Err(CqeError::Dimension {
                expected: self.n_qubits,
                found: other.n_qubits,
            });
        }
        let (p, key) = self.key.mul(other.key);
        Ok(Self::from_key(self.n_qubits, key, self.phase * other.phase * p))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase.exponent() {
            0 => "",
            1 => "i",
            2 => "-",
            _ => "-i",
        };
        write!(f, "{prefix}{}", self.key.render(self.n_qubits))
    }
}

impl FromStr for PauliString {
    type Err = CqeError;

    /// Parses `"XZIIY"` (qubit 0 leftmost) with an optional `+`, `-`, `i`,
    /// `+i` or `-i` prefix.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let (phase, body) = if let Some(rest) = t.strip_prefix("-i") {
            (Phase::MINUS_I, rest)
        } else if let Some(rest) = t.strip_prefix("+i") {
            (Phase::I, rest)
        } else if let Some(rest) = t.strip_prefix('i') {
            (Phase::I, rest)
        } else if let Some(rest) = t.strip_prefix('-') {
            (Phase::MINUS_ONE, rest)
        } else if let Some(rest) = t.strip_prefix('+') {
            (Phase::ONE, rest)
        } else {
            (Phase::ONE, t)
        };
        let labels = body
            .chars()
            .map(|c| match c {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                _ => Err(CqeError::PauliParse(s.to_string())),
            })
            .collect::<Result<Vec<_>>>()?;
        if labels.len() > MAX_QUBITS {
            return Err(CqeError::TooManyQubits(labels.len()));
        }
        Ok(PauliString::from_labels(&labels)?.with_phase(phase))
    }
}

/// Complex linear combination of Pauli label strings.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: BTreeMap<PauliKey, Complex64>,
}

impl PauliSum {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(n_qubits: usize, coeff: Complex64) -> Self {
        let mut s = Self::new(n_qubits);
        s.add_key(PauliKey::IDENTITY, coeff);
        s
    }

    pub fn from_string(p: &PauliString, coeff: Complex64) -> Self {
        let mut s = Self::new(p.n_qubits);
        s.add_key(p.key, coeff * p.phase.to_complex());
        s
    }

    /// Builds a sum from raw terms; duplicates are merged but nothing is dropped.
    pub fn from_terms<I>(n_qubits: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (PauliString, Complex64)>,
    {
        let mut s = Self::new(n_qubits);
        for (p, c) in terms {
            s.add_term(&p, c)?;
        }
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (PauliKey, Complex64)> + '_ {
        self.terms.iter().map(|(k, c)| (*k, *c))
    }

    pub fn coefficient(&self, key: PauliKey) -> Complex64 {
        self.terms.get(&key).copied().unwrap_or_default()
    }

    pub fn add_term(&mut self, p: &PauliString, coeff: Complex64) -> Result<()> {
        if p.n_qubits != self.n_qubits {
            return Err(CqeError::Dimension {
                expected: self.n_qubits,
                found: p.n_qubits,
            });
        }
        self.add_key(p.key, coeff * p.phase.to_complex());
        Ok(())
    }

    pub(crate) fn add_key(&mut self, key: PauliKey, coeff: Complex64) {
        *self.terms.entry(key).or_default() += coeff;
    }

    /// Merge duplicates (already merged on insertion) and drop `|c| < tol`.
    pub fn simplify(&self, tol: f64) -> PauliSum {
        Self {
            n_qubits: self.n_qubits,
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.norm() >= tol)
                .map(|(k, c)| (*k, *c))
                .collect(),
        }
    }

    fn check_dims(&self, other: &PauliSum) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(CqeError::Dimension {
                expected: self.n_qubits,
                found: other.n_qubits,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &PauliSum) -> Result<PauliSum> {
        self.check_dims(other)?;
        let mut out = self.clone();
        for (k, c) in other.iter() {
            out.add_key(k, c);
        }
        Ok(out.simplify(SIMPLIFY_TOL))
    }

    pub fn sub(&self, other: &PauliSum) -> Result<PauliSum> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, factor: Complex64) -> PauliSum {
        Self {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().map(|(k, c)| (*k, c * factor)).collect(),
        }
    }

    /// Operator product `self · other`, simplified.
    pub fn mul(&self, other: &PauliSum) -> Result<PauliSum> {
        self.check_dims(other)?;
        let mut out = PauliSum::new(self.n_qubits);
        for (ka, ca) in self.iter() {
            for (kb, cb) in other.iter() {
                let (p, k) = ka.mul(kb);
                out.add_key(k, ca * cb * p.to_complex());
            }
        }
        Ok(out.simplify(SIMPLIFY_TOL))
    }

    /// `[self, other] = self·other − other·self`, simplified.
    pub fn commutator(&self, other: &PauliSum) -> Result<PauliSum> {
        self.check_dims(other)?;
        let mut out = PauliSum::new(self.n_qubits);
        for (ka, ca) in self.iter() {
            for (kb, cb) in other.iter() {
                // commuting label pairs cancel; anticommuting ones double
                if !ka.commutes_with(kb) {
                    let (p, k) = ka.mul(kb);
                    out.add_key(k, 2.0 * ca * cb * p.to_complex());
                }
            }
        }
        Ok(out.simplify(SIMPLIFY_TOL))
    }

    /// `{self, other} = self·other + other·self`, simplified.
    pub fn anticommutator(&self, other: &PauliSum) -> Result<PauliSum> {
        self.check_dims(other)?;
        let mut out = PauliSum::new(self.n_qubits);
        for (ka, ca) in self.iter() {
            for (kb, cb) in other.iter() {
                if ka.commutes_with(kb) {
                    let (p, k) = ka.mul(kb);
                    out.add_key(k, 2.0 * ca * cb * p.to_complex());
                }
            }
        }
        Ok(out.simplify(SIMPLIFY_TOL))
    }

    pub fn adjoint(&self) -> PauliSum {
        Self {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().map(|(k, c)| (*k, c.conj())).collect(),
        }
    }

    /// Splits into `(hermitian, anti_hermitian)` parts with `self = h + a`.
    pub fn split_hermitian(&self) -> (PauliSum, PauliSum) {
        let mut h = PauliSum::new(self.n_qubits);
        let mut a = PauliSum::new(self.n_qubits);
        for (k, c) in self.iter() {
            if c.re != 0.0 {
                h.add_key(k, Complex64::new(c.re, 0.0));
            }
            if c.im != 0.0 {
                a.add_key(k, Complex64::new(0.0, c.im));
            }
        }
        (h, a)
    }

    pub fn max_imag(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.im.abs()))
    }

    pub fn max_real(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.re.abs()))
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.norm()))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_imag() <= tol
    }

    pub fn is_anti_hermitian(&self, tol: f64) -> bool {
        self.max_real() <= tol
    }

    pub fn ensure_hermitian(&self, tol: f64) -> Result<()> {
        if self.is_hermitian(tol) {
            Ok(())
        } else {
            Err(CqeError::NotHermitian(self.max_imag()))
        }
    }

    pub fn without_identity(&self) -> PauliSum {
        let mut out = self.clone();
        out.terms.remove(&PauliKey::IDENTITY);
        out
    }

    /// Sum of |coefficients|; bounds the spectral norm.
    pub fn one_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    pub fn keys(&self) -> impl Iterator<Item = PauliKey> + '_ {
        self.terms.keys().copied()
    }

    /// Dense `2ⁿ×2ⁿ` matrix, qubit 0 as least significant bit of the basis index.
    pub fn to_dense(&self) -> Result<nalgebra::DMatrix<Complex64>> {
        if self.n_qubits > 12 {
            return Err(CqeError::TooLarge(self.n_qubits));
        }
        let dim = 1usize << self.n_qubits;
        let mut m = nalgebra::DMatrix::<Complex64>::zeros(dim, dim);
        for (k, c) in self.iter() {
            let base = c * Phase::from_exponent(k.y_count()).to_complex();
            for b in 0..dim as u64 {
                let sign = if (k.z & b).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
                m[((b ^ k.x) as usize, b as usize)] += base * sign;
            }
        }
        Ok(m)
    }
}
