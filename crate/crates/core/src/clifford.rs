//! Single-qubit Clifford frames.
//!
//! The 24 single-qubit Cliffords are indexed by how they conjugate the Pauli
//! operators, `P ↦ U† P U`. Element `id = 4·z + x` has Z-image
//! `Z_IMAGES[z]` and X-image `x_images(Z_IMAGES[z])[x]`: the Z-image runs over
//! the six signed Paulis and the X-image over the four signed Paulis that
//! anticommute with it. Element 0 is the identity.

use std::sync::OnceLock;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{CqeError, Result};
use crate::pauli::{Pauli, PauliKey, PauliString, PauliSum, Phase};

pub const N_CLIFFORDS: usize = 24;

/// A Pauli label with a sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignedPauli {
    pub negative: bool,
    pub pauli: Pauli,
}

impl SignedPauli {
    const fn new(negative: bool, pauli: Pauli) -> Self {
        Self { negative, pauli }
    }

    fn matrix(self) -> [[Complex64; 2]; 2] {
        let z = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let m = match self.pauli {
            Pauli::I => [[one, z], [z, one]],
            Pauli::X => [[z, one], [one, z]],
            Pauli::Y => [[z, -i], [i, z]],
            Pauli::Z => [[one, z], [z, -one]],
        };
        if self.negative {
            m.map(|r| r.map(|v| -v))
        } else {
            m
        }
    }
}

const Z_IMAGES: [SignedPauli; 6] = [
    SignedPauli::new(false, Pauli::Z),
    SignedPauli::new(true, Pauli::Z),
    SignedPauli::new(false, Pauli::X),
    SignedPauli::new(true, Pauli::X),
    SignedPauli::new(false, Pauli::Y),
    SignedPauli::new(true, Pauli::Y),
];

fn x_images(z: SignedPauli) -> [SignedPauli; 4] {
    let (a, b) = match z.pauli {
        Pauli::Z => (Pauli::X, Pauli::Y),
        Pauli::X => (Pauli::Y, Pauli::Z),
        _ => (Pauli::Z, Pauli::X),
    };
    [
        SignedPauli::new(false, a),
        SignedPauli::new(true, a),
        SignedPauli::new(false, b),
        SignedPauli::new(true, b),
    ]
}

/// Conjugation table entry and the 2×2 unitary realizing it.
#[derive(Debug, Clone, Copy)]
pub struct CliffordElement {
    pub x_image: SignedPauli,
    pub z_image: SignedPauli,
    pub unitary: [[Complex64; 2]; 2],
}

impl CliffordElement {
    /// `U† σ U` for a single-site label, with the sign folded into a phase.
    pub fn conjugate(&self, label: Pauli) -> (Phase, Pauli) {
        let sign = |s: SignedPauli| {
            if s.negative {
                Phase::MINUS_ONE
            } else {
                Phase::ONE
            }
        };
        match label {
            Pauli::I => (Phase::ONE, Pauli::I),
            Pauli::X => (sign(self.x_image), self.x_image.pauli),
            Pauli::Z => (sign(self.z_image), self.z_image.pauli),
            Pauli::Y => {
                // Y = i X Z
                let (xk, zk) = (label_key(self.x_image.pauli), label_key(self.z_image.pauli));
                let (p, k) = xk.mul(zk);
                let phase = Phase::I * p * sign(self.x_image) * sign(self.z_image);
                (phase, k.label(0))
            }
        }
    }
}

fn label_key(p: Pauli) -> PauliKey {
    let (x, z) = p.bits();
    PauliKey {
        x: x as u64,
        z: z as u64,
    }
}

fn eigenvectors(p: SignedPauli) -> ([Complex64; 2], [Complex64; 2]) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let (plus, minus) = match p.pauli {
        Pauli::Z | Pauli::I => ([one, zero], [zero, one]),
        Pauli::X => (
            [one * s, one * s],
            [one * s, -one * s],
        ),
        Pauli::Y => (
            [one * s, Complex64::new(0.0, s)],
            [one * s, Complex64::new(0.0, -s)],
        ),
    };
    if p.negative {
        (minus, plus)
    } else {
        (plus, minus)
    }
}

fn build_element(z_image: SignedPauli, x_image: SignedPauli) -> CliffordElement {
    // Rows of U are ⟨e+| and e^{iφ}⟨e−| for the eigenvectors of the Z-image,
    // so U† Z U = Z-image; φ is fixed by U† X U = X-image.
    let (ep, em) = eigenvectors(z_image);
    let xm = x_image.matrix();
    let mut c = Complex64::new(0.0, 0.0);
    for a in 0..2 {
        for b in 0..2 {
            c += ep[a].conj() * xm[a][b] * em[b];
        }
    }
    let u = [
        [ep[0].conj(), ep[1].conj()],
        [c * em[0].conj(), c * em[1].conj()],
    ];
    CliffordElement {
        x_image,
        z_image,
        unitary: u,
    }
}

/// The fixed 24-element table.
pub fn clifford_table() -> &'static [CliffordElement; N_CLIFFORDS] {
    static TABLE: OnceLock<[CliffordElement; N_CLIFFORDS]> = OnceLock::new();
    TABLE.get_or_init(|| {
        std::array::from_fn(|id| {
            let z = Z_IMAGES[id / 4];
            build_element(z, x_images(z)[id % 4])
        })
    })
}

/// Id of the element whose Z-image is `+label` and X-image is the first
/// candidate. Used to rotate a qubit into the eigenbasis of `label`.
pub fn basis_change_id(label: Pauli) -> usize {
    match label {
        Pauli::I | Pauli::Z => 0,
        Pauli::X => 8,
        Pauli::Y => 16,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameDirection {
    Forward,
    Inverse,
}

/// Per-qubit single-qubit Clifford assignment defining `Û = ⊗_q U_q`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CliffordFrame {
    elements: Vec<u8>,
}

impl CliffordFrame {
    pub fn new(elements: Vec<u8>) -> Result<Self> {
        if let Some(&bad) = elements.iter().find(|&&e| e as usize >= N_CLIFFORDS) {
            return Err(CqeError::IndexOutOfRange {
                index: bad as usize,
                limit: N_CLIFFORDS,
            });
        }
        Ok(Self { elements })
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self {
            elements: vec![0; n_qubits],
        }
    }

    /// Uniform i.i.d. draw of every qubit's element.
    pub fn sample(n_qubits: usize, rng: &mut ChaCha8Rng) -> Self {
        Self {
            elements: (0..n_qubits)
                .map(|_| rng.gen_range(0..N_CLIFFORDS) as u8)
                .collect(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.elements.len()
    }

    pub fn element_ids(&self) -> &[u8] {
        &self.elements
    }

    pub fn element(&self, qubit: usize) -> &'static CliffordElement {
        &clifford_table()[self.elements[qubit] as usize]
    }

    /// `Û† P Û` for a Pauli label string.
    pub fn conjugate_key(&self, key: PauliKey) -> (Phase, PauliKey) {
        let mut phase = Phase::ONE;
        let mut out = PauliKey::IDENTITY;
        for q in 0..self.elements.len() {
            let label = key.label(q);
            if label == Pauli::I {
                continue;
            }
            let (p, img) = self.element(q).conjugate(label);
            phase = phase * p;
            let (x, z) = img.bits();
            out.x |= (x as u64) << q;
            out.z |= (z as u64) << q;
        }
        (phase, out)
    }

    pub fn conjugate_string(&self, p: &PauliString) -> Result<PauliString> {
        self.check(p.n_qubits())?;
        let (phase, key) = self.conjugate_key(p.key());
        Ok(PauliString::from_key(p.n_qubits(), key, p.phase() * phase))
    }

    /// `Û† S Û`, term by term through the image table.
    pub fn conjugate_sum(&self, s: &PauliSum) -> Result<PauliSum> {
        self.check(s.n_qubits())?;
        let mut out = PauliSum::new(s.n_qubits());
        for (k, c) in s.iter() {
            let (phase, key) = self.conjugate_key(k);
            out.add_key(key, c * phase.to_complex());
        }
        Ok(out)
    }

    fn check(&self, n: usize) -> Result<()> {
        if n != self.elements.len() {
            return Err(CqeError::Dimension {
                expected: self.elements.len(),
                found: n,
            });
        }
        Ok(())
    }
}
