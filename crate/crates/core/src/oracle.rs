//! Dense exact diagonalization in fixed `(N_α, N_β)` sectors and reference
//! states.

use log::warn;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CqeError, Result};
use crate::pauli::PauliSum;
use crate::statevector::{CompiledPauliSum, Statevector};

/// Largest qubit count handled densely.
pub const MAX_DENSE_QUBITS: usize = 14;
/// Largest block diagonalized densely.
pub const MAX_BLOCK_DIM: usize = 4096;
/// Blocks up to this size are cross-checked by power iteration.
pub const CROSS_CHECK_DIM: usize = 512;

const EIGEN_RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SectorSpec {
    pub n_alpha: usize,
    pub n_beta: usize,
}

impl SectorSpec {
    pub fn new(n_alpha: usize, n_beta: usize) -> Self {
        Self { n_alpha, n_beta }
    }

    /// Sector implied by an electron count and `2·S_z`, if consistent.
    pub fn from_electrons(n_electrons: usize, ms2: i32) -> Option<Self> {
        let n = n_electrons as i64;
        let m = ms2 as i64;
        if (n + m) % 2 != 0 || m.abs() > n {
            return None;
        }
        Some(Self::new(((n + m) / 2) as usize, ((n - m) / 2) as usize))
    }

    pub fn n_electrons(&self) -> usize {
        self.n_alpha + self.n_beta
    }

    fn check(&self, r: usize) -> Result<()> {
        if r % 2 != 0 || self.n_alpha > r / 2 || self.n_beta > r / 2 {
            return Err(CqeError::SectorTooLarge {
                n_alpha: self.n_alpha,
                n_beta: self.n_beta,
                n_spatial: r / 2,
            });
        }
        Ok(())
    }

    /// Basis indices with the sector's occupations, interleaved spin order.
    pub fn basis_indices(&self, r: usize) -> Result<Vec<u64>> {
        self.check(r)?;
        let alpha: u64 = (0..r).step_by(2).map(|q| 1u64 << q).sum();
        let beta = alpha << 1;
        let out: Vec<u64> = (0..1u64 << r)
            .filter(|b| {
                (b & alpha).count_ones() as usize == self.n_alpha
                    && (b & beta).count_ones() as usize == self.n_beta
            })
            .collect();
        if out.is_empty() {
            return Err(CqeError::EmptySector);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone)]
pub struct FciResult {
    pub energy: f64,
    pub ground: Statevector,
    pub block_dim: usize,
    /// Lowest eigenvalue from the power-iteration cross-check, when run.
    pub cross_check: Option<f64>,
}

/// Lowest eigenpair of `h`, restricted to `sector` when given.
pub fn fci_solve(h: &PauliSum, sector: Option<SectorSpec>) -> Result<FciResult> {
    h.ensure_hermitian(1e-12)?;
    let n = h.n_qubits();
    if n > MAX_DENSE_QUBITS {
        return Err(CqeError::TooLarge(n));
    }
    let basis: Vec<u64> = match sector {
        Some(s) => s.basis_indices(n)?,
        None => (0..1u64 << n).collect(),
    };
    if basis.len() > MAX_BLOCK_DIM {
        return Err(CqeError::TooLarge(n));
    }
    let block = sector_block(h, &basis);
    let eig = SymmetricEigen::try_new(block.clone(), f64::EPSILON * 0.5, 0)
        .ok_or_else(|| CqeError::Eigensolver("no convergence".into()))?;
    let (k, &energy) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| CqeError::Eigensolver("empty block".into()))?;
    let (energy, v) = polish(&block, energy, eig.eigenvectors.column(k).into_owned());

    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
    for (i, &b) in basis.iter().enumerate() {
        amps[b as usize] = v[i];
    }
    let ground = Statevector::normalized(n, amps)?;

    let hc = CompiledPauliSum::new(h);
    let hg = hc.apply(ground.amplitudes());
    let resid = hg
        .iter()
        .zip(ground.amplitudes())
        .map(|(a, g)| (a - g * energy).norm_sqr())
        .sum::<f64>()
        .sqrt();
    if resid > EIGEN_RESIDUAL_TOL {
        return Err(CqeError::Eigensolver(format!(
            "eigen-residual {resid:e} exceeds {EIGEN_RESIDUAL_TOL:e}"
        )));
    }

    let cross_check = if basis.len() <= CROSS_CHECK_DIM {
        let e2 = power_iteration_lowest(&block, 200_000, 1e-14);
        match e2 {
            Some(e2) if (e2 - energy).abs() > 1e-9 => warn!(
                "power iteration gives {e2:.12}, dense eigensolver {energy:.12}"
            ),
            None => warn!("power-iteration cross-check did not converge"),
            _ => {}
        }
        e2
    } else {
        None
    };

    Ok(FciResult {
        energy,
        ground,
        block_dim: basis.len(),
        cross_check,
    })
}

/// A few inverse-iteration steps at the computed eigenvalue, which tighten
/// the eigenvector of near-degenerate blocks to working precision.
fn polish(
    block: &DMatrix<Complex64>,
    energy: f64,
    mut v: DVector<Complex64>,
) -> (f64, DVector<Complex64>) {
    let dim = block.nrows();
    let mut e = energy;
    for _ in 0..2 {
        let shift = e - 1e-9 * e.abs().max(1.0);
        let shifted =
            block - DMatrix::<Complex64>::identity(dim, dim) * Complex64::new(shift, 0.0);
        let Some(w) = shifted.lu().solve(&v) else {
            break;
        };
        let norm = w.norm();
        if !norm.is_finite() || norm == 0.0 {
            break;
        }
        v = w / Complex64::new(norm, 0.0);
        e = v.dotc(&(block * &v)).re;
    }
    (e, v)
}

/// Hamiltonian matrix restricted to the listed basis states.
pub fn sector_block(h: &PauliSum, basis: &[u64]) -> DMatrix<Complex64> {
    let n = h.n_qubits();
    let hc = CompiledPauliSum::new(h);
    let mut pos = vec![usize::MAX; 1 << n];
    for (i, &b) in basis.iter().enumerate() {
        pos[b as usize] = i;
    }
    let mut m = DMatrix::zeros(basis.len(), basis.len());
    let mut e = vec![Complex64::new(0.0, 0.0); 1 << n];
    for (j, &b) in basis.iter().enumerate() {
        e[b as usize] = Complex64::new(1.0, 0.0);
        for (row, v) in hc.apply(&e).into_iter().enumerate() {
            if v != Complex64::new(0.0, 0.0) && pos[row] != usize::MAX {
                m[(pos[row], j)] = v;
            }
        }
        e[b as usize] = Complex64::new(0.0, 0.0);
    }
    m
}

/// Lowest eigenvalue of a Hermitian matrix by power iteration on
/// `σ I − A`, with `σ` a Gershgorin upper bound. Independent of the dense
/// eigensolver; `None` if the Rayleigh quotient has not settled.
pub fn power_iteration_lowest(a: &DMatrix<Complex64>, max_iter: usize, tol: f64) -> Option<f64> {
    let dim = a.nrows();
    if dim == 0 {
        return None;
    }
    let sigma = (0..dim)
        .map(|i| a.row(i).iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let shifted = DMatrix::<Complex64>::identity(dim, dim) * Complex64::new(sigma, 0.0) - a;
    // deterministic start with weight on every component
    let mut v = DVector::<Complex64>::from_fn(dim, |i, _| {
        Complex64::new(1.0 + 0.1 * (i as f64).sin(), 0.05 * (i as f64).cos())
    });
    v /= Complex64::new(v.norm(), 0.0);
    let mut last = f64::INFINITY;
    let mut stable = 0;
    for _ in 0..max_iter {
        let w = &shifted * &v;
        let lambda = v.dotc(&w).re;
        let norm = w.norm();
        if norm == 0.0 {
            return Some(sigma);
        }
        v = w / Complex64::new(norm, 0.0);
        if (lambda - last).abs() <= tol * lambda.abs().max(1.0) {
            stable += 1;
            if stable >= 10 {
                return Some(sigma - lambda);
            }
        } else {
            stable = 0;
        }
        last = lambda;
    }
    None
}

/// Lowest `n_alpha` α and lowest `n_beta` β spin-orbitals occupied.
pub fn hf_determinant(sector: SectorSpec, r: usize) -> Result<Statevector> {
    sector.check(r)?;
    let mut b = 0u64;
    for p in 0..sector.n_alpha {
        b |= 1 << (2 * p);
    }
    for p in 0..sector.n_beta {
        b |= 1 << (2 * p + 1);
    }
    Ok(Statevector::basis_state(r, b))
}

/// Equal-weight superposition of every determinant in the sector.
pub fn uniform_sector_state(sector: SectorSpec, r: usize) -> Result<Statevector> {
    let basis = sector.basis_indices(r)?;
    let a = Complex64::new(1.0 / (basis.len() as f64).sqrt(), 0.0);
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << r];
    for b in basis {
        amps[b as usize] = a;
    }
    Statevector::normalized(r, amps)
}
