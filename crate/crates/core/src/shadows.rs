//! Shadow residual measurement, shadow generators and the full two-body
//! residual used as the tomography baseline.
//!
//! Entries are commutator expectations estimated from the pair of states
//! `|Λ±⟩ = e^{±iδH}|ψ⟩`. To first order in `δ`,
//! `⟨Λ±|O|Λ±⟩ = ⟨O⟩ ± iδ⟨[O, H]⟩`, so
//! `⟨[O, H]⟩ = (⟨Λ⁺|O|Λ⁺⟩ − ⟨Λ⁻|O|Λ⁻⟩) / (2iδ)` with an `O(δ²)` error.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::clifford::{basis_change_id, CliffordFrame, FrameDirection};
use crate::error::{CqeError, Result};
use crate::fermion::{jordan_wigner, number_pair_operator, FermionTerm};
use crate::pauli::{PauliKey, PauliSum, SIMPLIFY_TOL};
use crate::rng::{self, StreamTag};
use crate::statevector::{CompiledPauliSum, Statevector};

/// How expectation values are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measurement {
    Exact,
    /// `shots` samples per measured circuit; sampling streams derive from `seed`.
    Shots { shots: usize, seed: u64 },
}

impl Measurement {
    fn validate(self) -> Result<()> {
        match self {
            Measurement::Shots { shots: 0, .. } => {
                Err(CqeError::InvalidConfig("shots must be ≥ 1".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Uniform i.i.d. draw of a Clifford element for every qubit.
pub fn sample_frame(n_qubits: usize, seed: u64) -> CliffordFrame {
    CliffordFrame::sample(n_qubits, &mut rng::seeded(seed))
}

/// `|Λ±⟩ = e^{±iδH}|ψ⟩`, computed once per iteration and shared by every
/// frame.
#[derive(Debug, Clone)]
pub struct LambdaStates {
    pub plus: Statevector,
    pub minus: Statevector,
    pub delta: f64,
}

impl LambdaStates {
    pub fn prepare(psi: &Statevector, h: &PauliSum, delta: f64) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(CqeError::InvalidConfig(format!("delta must be > 0, got {delta}")));
        }
        Ok(Self {
            plus: psi.evolve_hamiltonian(h, delta)?,
            minus: psi.evolve_hamiltonian(h, -delta)?,
            delta,
        })
    }

    fn n_qubits(&self) -> usize {
        self.plus.n_qubits()
    }

    /// `⟨[O, H]⟩` from exact expectations on both states.
    pub fn commutator_expectation(&self, o: &CompiledPauliSum) -> Result<Complex64> {
        let p = self.plus.expectation_compiled(o)?;
        let m = self.minus.expectation_compiled(o)?;
        Ok((p - m) / Complex64::new(0.0, 2.0 * self.delta))
    }
}

/// Measured shadow: real symmetric `r×r` matrix of
/// `s_ij = ⟨[Û†n̂_in̂_jÛ, H]⟩ / i`, zero on the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadowResidual {
    pub frame: CliffordFrame,
    pub s: DMatrix<f64>,
    pub measurement: Measurement,
    pub shots_used: usize,
}

impl ShadowResidual {
    pub fn n_modes(&self) -> usize {
        self.s.nrows()
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.s.iter().map(|v| v * v).sum()
    }
}

/// `P(b_i = b_j = 1)` for all pairs, from a distribution over basis indices.
fn pair_occupations(n: usize, probs: impl Iterator<Item = (u64, f64)>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(n, n);
    let mut bits = Vec::with_capacity(n);
    for (b, p) in probs {
        if p == 0.0 {
            continue;
        }
        bits.clear();
        bits.extend((0..n).filter(|q| b >> q & 1 == 1));
        for (a, &i) in bits.iter().enumerate() {
            for &j in &bits[a + 1..] {
                out[(i, j)] += p;
            }
        }
    }
    out
}

fn rotated_pair_occupations(
    state: &Statevector,
    frame: &CliffordFrame,
    measurement: Measurement,
    tag: StreamTag,
) -> Result<DMatrix<f64>> {
    let n = state.n_qubits();
    let rotated = state.rotate_frame(frame, FrameDirection::Forward)?;
    Ok(match measurement {
        Measurement::Exact => pair_occupations(
            n,
            rotated
                .probabilities()
                .into_iter()
                .enumerate()
                .map(|(b, p)| (b as u64, p)),
        ),
        Measurement::Shots { shots, seed } => {
            let samples = rotated.sample_bitstrings(shots, rng::derive_seed(seed, &[tag as u64]))?;
            let mut counts: HashMap<u64, usize> = HashMap::new();
            for b in samples {
                *counts.entry(b).or_default() += 1;
            }
            let mut counts: Vec<_> = counts.into_iter().collect();
            counts.sort_unstable();
            pair_occupations(
                n,
                counts
                    .into_iter()
                    .map(|(b, c)| (b, c as f64 / shots as f64)),
            )
        }
    })
}

/// One frame's shadow from prepared `Λ±`. All pair correlators of a state
/// come from the same rotated distribution (one circuit per state).
pub fn measure_shadow_residual_prepared(
    lambda: &LambdaStates,
    frame: &CliffordFrame,
    measurement: Measurement,
) -> Result<ShadowResidual> {
    measurement.validate()?;
    let n = lambda.n_qubits();
    if frame.n_qubits() != n {
        return Err(CqeError::Dimension {
            expected: n,
            found: frame.n_qubits(),
        });
    }
    let plus = rotated_pair_occupations(&lambda.plus, frame, measurement, StreamTag::ShotsPlus)?;
    let minus = rotated_pair_occupations(&lambda.minus, frame, measurement, StreamTag::ShotsMinus)?;
    let mut s = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = (minus[(i, j)] - plus[(i, j)]) / (2.0 * lambda.delta);
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    let shots_used = match measurement {
        Measurement::Exact => 0,
        Measurement::Shots { shots, .. } => 2 * shots,
    };
    Ok(ShadowResidual {
        frame: frame.clone(),
        s,
        measurement,
        shots_used,
    })
}

pub fn measure_shadow_residual(
    psi: &Statevector,
    h: &PauliSum,
    frame: &CliffordFrame,
    delta: f64,
    measurement: Measurement,
) -> Result<ShadowResidual> {
    measurement.validate()?;
    let lambda = LambdaStates::prepare(psi, h, delta)?;
    measure_shadow_residual_prepared(&lambda, frame, measurement)
}

/// Anti-Hermitian generator built from one shadow; `eta` is filled in by the
/// line search.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadowGenerator {
    pub frame: CliffordFrame,
    pub generator: PauliSum,
    pub eta: f64,
}

/// `i · Û†(Σ_{i<j} 2 s_ij n̂_in̂_j)Û` without its identity component.
pub fn build_shadow_generator(res: &ShadowResidual, n_qubits: usize) -> Result<ShadowGenerator> {
    if res.n_modes() != n_qubits {
        return Err(CqeError::Dimension {
            expected: n_qubits,
            found: res.n_modes(),
        });
    }
    let mut k = PauliSum::new(n_qubits);
    for i in 0..n_qubits {
        for j in i + 1..n_qubits {
            let v = res.s[(i, j)];
            if v == 0.0 {
                continue;
            }
            for (key, c) in number_pair_operator(i, j, n_qubits)?.iter() {
                k.add_key(key, c * 2.0 * v);
            }
        }
    }
    let k = k.without_identity();
    let conj = res.frame.conjugate_sum(&k)?;
    Ok(ShadowGenerator {
        frame: res.frame.clone(),
        generator: conj.scale(Complex64::new(0.0, 1.0)).simplify(SIMPLIFY_TOL),
        eta: 0.0,
    })
}

/// Index quadruple `(i, j, k, l)` of `a†_i a†_j a_l a_k` with `i < j`, `k < l`.
pub type TwoBodyIndex = (usize, usize, usize, usize);

/// Greedy first-fit grouping into qubit-wise commuting sets. Each group is
/// returned with the merged measurement basis.
pub fn qwc_groups(keys: impl IntoIterator<Item = PauliKey>) -> Vec<(PauliKey, Vec<PauliKey>)> {
    let mut groups: Vec<(PauliKey, Vec<PauliKey>)> = Vec::new();
    for k in keys {
        if k.is_identity() {
            continue;
        }
        match groups.iter_mut().find(|(basis, _)| basis.qubit_wise_commutes(k)) {
            Some((basis, members)) => {
                basis.x |= k.x;
                basis.z |= k.z;
                members.push(k);
            }
            None => groups.push((k, vec![k])),
        }
    }
    groups
}

/// Precomputed two-body operators and their measurement groups.
#[derive(Debug, Clone)]
pub struct FullTomography {
    n_modes: usize,
    ops: Vec<(TwoBodyIndex, PauliSum, CompiledPauliSum)>,
    groups: Vec<(PauliKey, Vec<PauliKey>)>,
}

impl FullTomography {
    pub fn new(n_modes: usize) -> Result<Self> {
        let mut ops = Vec::new();
        let mut all = PauliSum::new(n_modes);
        for i in 0..n_modes {
            for j in i + 1..n_modes {
                for k in 0..n_modes {
                    for l in k + 1..n_modes {
                        let o = jordan_wigner(&FermionTerm::two_body(i, j, k, l), n_modes)?
                            .simplify(SIMPLIFY_TOL);
                        for (key, _) in o.iter() {
                            all.add_key(key, Complex64::new(1.0, 0.0));
                        }
                        let compiled = CompiledPauliSum::new(&o);
                        ops.push(((i, j, k, l), o, compiled));
                    }
                }
            }
        }
        let groups = qwc_groups(all.keys());
        Ok(Self {
            n_modes,
            ops,
            groups,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn n_operators(&self) -> usize {
        self.ops.len()
    }

    pub fn n_groups(&self) -> usize {
        self.groups.len()
    }

    /// Distinct circuits for one residual evaluation: every group on both
    /// `Λ⁺` and `Λ⁻`.
    pub fn circuits_per_measurement(&self) -> usize {
        2 * self.groups.len()
    }

    fn sampled_pauli_expectations(
        &self,
        state: &Statevector,
        shots: usize,
        seed: u64,
        tag: StreamTag,
    ) -> Result<HashMap<PauliKey, f64>> {
        let n = self.n_modes;
        let mut out = HashMap::new();
        for (g, (basis, members)) in self.groups.iter().enumerate() {
            let ids = (0..n)
                .map(|q| basis_change_id(basis.label(q)) as u8)
                .collect();
            let frame = CliffordFrame::new(ids)?;
            let rotated = state.rotate_frame(&frame, FrameDirection::Forward)?;
            let samples = rotated.sample_bitstrings(
                shots,
                rng::derive_seed(seed, &[tag as u64, g as u64]),
            )?;
            for &m in members {
                let support = m.support();
                let sum: f64 = samples
                    .iter()
                    .map(|b| if (b & support).count_ones() % 2 == 1 { -1.0 } else { 1.0 })
                    .sum();
                out.insert(m, sum / shots as f64);
            }
        }
        Ok(out)
    }

    /// Two-body residual `A_{ij;kl} = ⟨[a†_ia†_ja_la_k, H]⟩` for every index
    /// quadruple, in construction order.
    pub fn residual_elements(
        &self,
        lambda: &LambdaStates,
        measurement: Measurement,
    ) -> Result<Vec<(TwoBodyIndex, Complex64)>> {
        measurement.validate()?;
        if lambda.n_qubits() != self.n_modes {
            return Err(CqeError::Dimension {
                expected: self.n_modes,
                found: lambda.n_qubits(),
            });
        }
        match measurement {
            Measurement::Exact => self
                .ops
                .iter()
                .map(|(idx, _, c)| Ok((*idx, lambda.commutator_expectation(c)?)))
                .collect(),
            Measurement::Shots { shots, seed } => {
                let plus = self.sampled_pauli_expectations(
                    &lambda.plus,
                    shots,
                    seed,
                    StreamTag::ShotsPlus,
                )?;
                let minus = self.sampled_pauli_expectations(
                    &lambda.minus,
                    shots,
                    seed,
                    StreamTag::ShotsMinus,
                )?;
                let denom = Complex64::new(0.0, 2.0 * lambda.delta);
                Ok(self
                    .ops
                    .iter()
                    .map(|(idx, o, _)| {
                        let mut diff = Complex64::new(0.0, 0.0);
                        for (k, c) in o.iter() {
                            if k.is_identity() {
                                continue;
                            }
                            diff += c * (plus[&k] - minus[&k]);
                        }
                        (*idx, diff / denom)
                    })
                    .collect())
            }
        }
    }

    /// `Â = Σ A_{ij;kl} a†_ia†_ja_la_k`, Jordan–Wigner mapped. Only the
    /// anti-Hermitian part is kept, which removes round-off of order 1e−16.
    pub fn generator(&self, elements: &[(TwoBodyIndex, Complex64)]) -> PauliSum {
        let mut g = PauliSum::new(self.n_modes);
        for ((_, o, _), (_, a)) in self.ops.iter().zip(elements) {
            for (k, c) in o.iter() {
                g.add_key(k, c * a);
            }
        }
        g.split_hermitian().1.simplify(SIMPLIFY_TOL)
    }
}

/// Full two-body residual generator, convenience form of
/// [`FullTomography::residual_elements`] and [`FullTomography::generator`].
pub fn measure_full_acse_residual(
    psi: &Statevector,
    h: &PauliSum,
    delta: f64,
    measurement: Measurement,
) -> Result<PauliSum> {
    let tomo = FullTomography::new(psi.n_qubits())?;
    let lambda = LambdaStates::prepare(psi, h, delta)?;
    Ok(tomo.generator(&tomo.residual_elements(&lambda, measurement)?))
}
