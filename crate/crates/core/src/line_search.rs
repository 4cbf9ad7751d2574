//! One-dimensional energy minimization along an anti-Hermitian generator.
//!
//! For `G = i Σ_k b_k P_k` the ansatz circuit is the first-order product
//! `Π_k e^{iη b_k P_k}`, terms in descending `|b_k|`. `E(η)` is minimized by
//! bracketing followed by Brent's parabolic interpolation with golden-section
//! fallback.

use num_complex::Complex64;

use crate::error::{CqeError, Result};
use crate::pauli::{PauliKey, PauliSum, Phase};
use crate::statevector::{CompiledPauliSum, Statevector};

const ANTI_HERMITIAN_TOL: f64 = 1e-12;
const GOLDEN: f64 = 0.381_966_011_250_105_1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchConfig {
    /// First trial angle, in units of `1 / max |b_k|`.
    pub initial_step: f64,
    pub max_evals: usize,
    /// Relative tolerance on η.
    pub tol: f64,
}

impl Default for LineSearchConfig {
    fn default() -> Self {
        Self {
            initial_step: 0.1,
            max_evals: 20,
            tol: 1e-10,
        }
    }
}

/// First-order product-formula circuit for `e^{ηG}`.
#[derive(Debug, Clone)]
pub struct TrotterCircuit {
    n_qubits: usize,
    terms: Vec<(PauliKey, f64)>,
}

impl TrotterCircuit {
    pub fn new(g: &PauliSum) -> Result<Self> {
        if !g.is_anti_hermitian(ANTI_HERMITIAN_TOL) {
            return Err(CqeError::NotAntiHermitian(g.max_real()));
        }
        let mut terms: Vec<(PauliKey, f64)> = g
            .iter()
            .filter(|(k, c)| !k.is_identity() && c.im != 0.0)
            .map(|(k, c)| (k, c.im))
            .collect();
        // stable sort keeps key order among equal magnitudes
        terms.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()));
        Ok(Self {
            n_qubits: g.n_qubits(),
            terms,
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_coeff(&self) -> f64 {
        self.terms.first().map_or(0.0, |t| t.1.abs())
    }

    pub fn apply(&self, psi: &Statevector, eta: f64) -> Result<Statevector> {
        if psi.n_qubits() != self.n_qubits {
            return Err(CqeError::Dimension {
                expected: self.n_qubits,
                found: psi.n_qubits(),
            });
        }
        let mut out = psi.clone();
        if eta != 0.0 {
            for &(k, b) in &self.terms {
                out.rotate_by_key(k, Phase::ONE, eta * b);
            }
        }
        Ok(out)
    }
}

/// `dE/dη` at `η = 0`: `⟨[H, G]⟩ = 2 Re⟨Hψ|Gψ⟩` for anti-Hermitian `G`.
pub fn energy_gradient(psi: &Statevector, h: &CompiledPauliSum, g: &PauliSum) -> Result<f64> {
    if psi.n_qubits() != g.n_qubits() || psi.n_qubits() != h.n_qubits() {
        return Err(CqeError::Dimension {
            expected: psi.n_qubits(),
            found: g.n_qubits(),
        });
    }
    let hpsi = h.apply(psi.amplitudes());
    let gpsi = CompiledPauliSum::new(g).apply(psi.amplitudes());
    let dot: Complex64 = hpsi.iter().zip(&gpsi).map(|(a, b)| a.conj() * b).sum();
    Ok(2.0 * dot.re)
}

#[derive(Debug, Clone)]
pub struct LineSearchResult {
    pub eta: f64,
    pub energy: f64,
    pub state: Statevector,
    pub evals: usize,
}

struct Objective<'a> {
    psi: &'a Statevector,
    h: &'a CompiledPauliSum,
    circuit: &'a TrotterCircuit,
    evals: usize,
    best: (f64, f64),
}

impl Objective<'_> {
    fn eval(&mut self, eta: f64) -> Result<f64> {
        self.evals += 1;
        let s = self.circuit.apply(self.psi, eta)?;
        let e = s.expectation_compiled(self.h)?.re;
        if e < self.best.1 {
            self.best = (eta, e);
        }
        Ok(e)
    }
}

/// Minimizes `E(η) = ⟨ψ|e^{−ηG} H e^{ηG}|ψ⟩` over the Trotter circuit of `g`.
/// The returned energy never exceeds `e0`; if no lower point is found, `η = 0`.
pub fn line_search_eta(
    psi: &Statevector,
    g: &PauliSum,
    h: &CompiledPauliSum,
    e0: f64,
    cfg: &LineSearchConfig,
) -> Result<LineSearchResult> {
    let circuit = TrotterCircuit::new(g)?;
    let unchanged = LineSearchResult {
        eta: 0.0,
        energy: e0,
        state: psi.clone(),
        evals: 0,
    };
    if circuit.is_empty() {
        return Ok(unchanged);
    }
    let grad = energy_gradient(psi, h, g)?;
    if !grad.is_finite() || grad == 0.0 {
        return Ok(unchanged);
    }
    let mut f = Objective {
        psi,
        h,
        circuit: &circuit,
        evals: 0,
        best: (0.0, e0),
    };
    let max = cfg.max_evals.max(3);
    let dir = -grad.signum();
    let mut step = cfg.initial_step / circuit.max_coeff();

    // Bracket a minimum along the descent direction: (a, b, c) with
    // f(b) < f(a), f(b) ≤ f(c).
    let (mut a, mut fa) = (0.0, e0);
    let mut b = dir * step;
    let mut fb = f.eval(b)?;
    while fb >= fa && f.evals < max / 2 {
        step *= 0.25;
        b = dir * step;
        fb = f.eval(b)?;
    }
    if fb >= fa {
        return Ok(unchanged);
    }
    let mut c = b + (b - a) * 2.0;
    let mut fc = f.eval(c)?;
    while fc < fb && f.evals < max {
        a = b;
        fa = fb;
        b = c;
        fb = fc;
        c = b + (b - a) * 2.0;
        fc = f.eval(c)?;
    }
    let _ = fa;
    if fc >= fb {
        brent(&mut f, a.min(c), a.max(c), b, fb, max, cfg.tol)?;
    }

    let (eta, energy) = f.best;
    if !(energy < e0) {
        return Ok(LineSearchResult {
            evals: f.evals,
            ..unchanged
        });
    }
    Ok(LineSearchResult {
        eta,
        energy,
        state: circuit.apply(psi, eta)?,
        evals: f.evals,
    })
}

/// Brent minimization inside `[lo, hi]` starting from the interior point `x`.
fn brent(
    f: &mut Objective,
    mut lo: f64,
    mut hi: f64,
    x0: f64,
    fx0: f64,
    max_evals: usize,
    tol: f64,
) -> Result<()> {
    let (mut x, mut w, mut v) = (x0, x0, x0);
    let (mut fx, mut fw, mut fv) = (fx0, fx0, fx0);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    while f.evals < max_evals {
        let xm = 0.5 * (lo + hi);
        let tol1 = tol * x.abs() + 1e-14;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (hi - lo) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            if p.abs() < (0.5 * q * etemp).abs() && p > q * (lo - x) && p < q * (hi - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - lo < tol2 || hi - u < tol2 {
                    d = tol1.copysign(xm - x);
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { lo - x } else { hi - x };
            d = GOLDEN * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = f.eval(u)?;
        if fu <= fx {
            if u >= x {
                lo = x;
            } else {
                hi = x;
            }
            (v, fv) = (w, fw);
            (w, fw) = (x, fx);
            (x, fx) = (u, fu);
        } else {
            if u < x {
                lo = u;
            } else {
                hi = u;
            }
            if fu <= fw || w == x {
                (v, fv) = (w, fw);
                (w, fw) = (u, fu);
            } else if fu <= fv || v == x || v == w {
                (v, fv) = (u, fu);
            }
        }
    }
    Ok(())
}
