//! Second-quantized operators and their Jordan–Wigner images.
//!
//! Mode `p` maps to qubit `p`, and the Z string of `a_p` acts on qubits below
//! `p`:
//!
//! ```text
//! a†_p = ½ (X_p − iY_p) Z_{p−1} … Z_0
//! a_p  = ½ (X_p + iY_p) Z_{p−1} … Z_0
//! ```
//!
//! Spin orbitals are interleaved from spatial orbitals: mode `2p` is `pα`,
//! mode `2p + 1` is `pβ`.

use num_complex::Complex64;

use crate::error::{CqeError, Result};
use crate::pauli::{qubit_mask, PauliKey, PauliSum, MAX_QUBITS, SIMPLIFY_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Spin {
    Alpha,
    Beta,
}

/// Interleaved spin-orbital index of spatial orbital `p` with spin `spin`.
pub fn spin_orbital(p: usize, spin: Spin) -> usize {
    match spin {
        Spin::Alpha => 2 * p,
        Spin::Beta => 2 * p + 1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LadderOp {
    pub mode: usize,
    pub creation: bool,
}

impl LadderOp {
    pub fn create(mode: usize) -> Self {
        Self {
            mode,
            creation: true,
        }
    }

    pub fn annihilate(mode: usize) -> Self {
        Self {
            mode,
            creation: false,
        }
    }
}

/// Ordered product of ladder operators; the rightmost acts first on kets.
#[derive(Debug, Clone, PartialEq)]
pub struct FermionTerm {
    pub ops: Vec<LadderOp>,
    pub coeff: Complex64,
}

impl FermionTerm {
    pub fn new(ops: Vec<LadderOp>, coeff: Complex64) -> Self {
        Self { ops, coeff }
    }

    pub fn scalar(coeff: Complex64) -> Self {
        Self {
            ops: Vec::new(),
            coeff,
        }
    }

    /// `a†_i a†_j a_l a_k` with unit coefficient.
    pub fn two_body(i: usize, j: usize, k: usize, l: usize) -> Self {
        Self::new(
            vec![
                LadderOp::create(i),
                LadderOp::create(j),
                LadderOp::annihilate(l),
                LadderOp::annihilate(k),
            ],
            Complex64::new(1.0, 0.0),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FermionOperator {
    n_modes: usize,
    terms: Vec<FermionTerm>,
}

impl FermionOperator {
    pub fn new(n_modes: usize) -> Self {
        Self {
            n_modes,
            terms: Vec::new(),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn terms(&self) -> &[FermionTerm] {
        &self.terms
    }

    pub fn push(&mut self, term: FermionTerm) -> Result<()> {
        if let Some(op) = term.ops.iter().find(|op| op.mode >= self.n_modes) {
            return Err(CqeError::IndexOutOfRange {
                index: op.mode,
                limit: self.n_modes,
            });
        }
        self.terms.push(term);
        Ok(())
    }
}

fn ladder_image(op: LadderOp, n_modes: usize) -> PauliSum {
    let p = op.mode;
    let string = qubit_mask(p);
    let x = 1u64 << p;
    let mut s = PauliSum::new(n_modes);
    s.add_key(PauliKey { x, z: string }, Complex64::new(0.5, 0.0));
    let y_coeff = if op.creation { -0.5 } else { 0.5 };
    s.add_key(
        PauliKey {
            x,
            z: string | x,
        },
        Complex64::new(0.0, y_coeff),
    );
    s
}

/// Jordan–Wigner image of one ordered term on `n_modes` qubits.
pub fn jordan_wigner(term: &FermionTerm, n_modes: usize) -> Result<PauliSum> {
    if n_modes > MAX_QUBITS {
        return Err(CqeError::TooManyQubits(n_modes));
    }
    let mut acc = PauliSum::identity(n_modes, term.coeff);
    for op in &term.ops {
        if op.mode >= n_modes {
            return Err(CqeError::IndexOutOfRange {
                index: op.mode,
                limit: n_modes,
            });
        }
        acc = acc.mul(&ladder_image(*op, n_modes))?;
    }
    Ok(acc)
}

/// Image of `a†_i a†_j a_j a_i = n̂_i n̂_j = ¼(I − Z_i)(I − Z_j)`.
pub fn number_pair_operator(i: usize, j: usize, n_modes: usize) -> Result<PauliSum> {
    for idx in [i, j] {
        if idx >= n_modes {
            return Err(CqeError::IndexOutOfRange {
                index: idx,
                limit: n_modes,
            });
        }
    }
    if i == j {
        return Err(CqeError::DegeneratePair(i));
    }
    let (zi, zj) = (1u64 << i, 1u64 << j);
    let mut s = PauliSum::new(n_modes);
    s.add_key(PauliKey::IDENTITY, Complex64::new(0.25, 0.0));
    s.add_key(PauliKey { x: 0, z: zi }, Complex64::new(-0.25, 0.0));
    s.add_key(PauliKey { x: 0, z: zj }, Complex64::new(-0.25, 0.0));
    s.add_key(PauliKey { x: 0, z: zi | zj }, Complex64::new(0.25, 0.0));
    Ok(s)
}

/// Linear extension of [`jordan_wigner`], simplified.
pub fn map_operator(f: &FermionOperator) -> Result<PauliSum> {
    let mut out = PauliSum::new(f.n_modes);
    for t in &f.terms {
        for (k, c) in jordan_wigner(t, f.n_modes)?.iter() {
            out.add_key(k, c);
        }
    }
    Ok(out.simplify(SIMPLIFY_TOL))
}

/// `N̂ = Σ_p n̂_p`.
pub fn number_operator(n_modes: usize) -> PauliSum {
    let mut s = PauliSum::new(n_modes);
    for p in 0..n_modes {
        s.add_key(PauliKey::IDENTITY, Complex64::new(0.5, 0.0));
        s.add_key(PauliKey { x: 0, z: 1 << p }, Complex64::new(-0.5, 0.0));
    }
    s.simplify(SIMPLIFY_TOL)
}

/// `Ŝ_z = ½ Σ_p (n̂_{pα} − n̂_{pβ})` for interleaved ordering.
pub fn sz_operator(n_modes: usize) -> PauliSum {
    let mut s = PauliSum::new(n_modes);
    for p in 0..n_modes {
        let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
        s.add_key(PauliKey::IDENTITY, Complex64::new(0.25 * sign, 0.0));
        s.add_key(PauliKey { x: 0, z: 1 << p }, Complex64::new(-0.25 * sign, 0.0));
    }
    s.simplify(SIMPLIFY_TOL)
}
