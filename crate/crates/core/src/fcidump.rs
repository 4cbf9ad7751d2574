//! FCIDUMP ingestion and second-quantized Hamiltonian assembly.
//!
//! Header: `&FCI NORB=n, NELEC=m, MS2=k, ... &END` (a lone `/` also ends the
//! namelist). Records are `value i j k l` with 1-based indices:
//! `i j k l` all nonzero is the two-electron integral (ij|kl) in chemists'
//! notation, `k = l = 0` is the one-electron integral h_ij, and all zero is the
//! core energy. Real orbitals are assumed, so every integral is fanned out to
//! its 8 (resp. 2) symmetry images.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{CqeError, Result};
use crate::fermion::{spin_orbital, FermionOperator, FermionTerm, LadderOp, Spin};

#[derive(Debug, Clone, PartialEq)]
pub struct IntegralSet {
    pub n_spatial: usize,
    pub n_electrons: usize,
    /// 2·S_z as declared in the header.
    pub ms2: i32,
    one_body: Vec<f64>,
    eri: Vec<f64>,
    pub e_core: f64,
}

impl IntegralSet {
    pub fn zeros(n_spatial: usize, n_electrons: usize, ms2: i32) -> Self {
        Self {
            n_spatial,
            n_electrons,
            ms2,
            one_body: vec![0.0; n_spatial * n_spatial],
            eri: vec![0.0; n_spatial.pow(4)],
            e_core: 0.0,
        }
    }

    fn idx2(&self, p: usize, q: usize) -> usize {
        p * self.n_spatial + q
    }

    fn idx4(&self, p: usize, q: usize, r: usize, s: usize) -> usize {
        let n = self.n_spatial;
        ((p * n + q) * n + r) * n + s
    }

    pub fn h(&self, p: usize, q: usize) -> f64 {
        self.one_body[self.idx2(p, q)]
    }

    /// (pq|rs), chemists' notation.
    pub fn eri(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.eri[self.idx4(p, q, r, s)]
    }

    pub fn set_h(&mut self, p: usize, q: usize, v: f64) {
        let (a, b) = (self.idx2(p, q), self.idx2(q, p));
        self.one_body[a] = v;
        self.one_body[b] = v;
    }

    /// Sets (pq|rs) and all 8 real-orbital symmetry images.
    pub fn set_eri(&mut self, p: usize, q: usize, r: usize, s: usize, v: f64) {
        for (a, b, c, d) in [
            (p, q, r, s),
            (q, p, r, s),
            (p, q, s, r),
            (q, p, s, r),
            (r, s, p, q),
            (s, r, p, q),
            (r, s, q, p),
            (s, r, q, p),
        ] {
            let i = self.idx4(a, b, c, d);
            self.eri[i] = v;
        }
    }

    /// Returns the 0-based permutation image: orbital `p` becomes `perm[p]`.
    pub fn permuted(&self, perm: &[usize]) -> IntegralSet {
        let n = self.n_spatial;
        let mut out = IntegralSet::zeros(n, self.n_electrons, self.ms2);
        out.e_core = self.e_core;
        for p in 0..n {
            for q in 0..n {
                out.set_h(perm[p], perm[q], self.h(p, q));
                for r in 0..n {
                    for s in 0..n {
                        let v = self.eri(p, q, r, s);
                        let i = out.idx4(perm[p], perm[q], perm[r], perm[s]);
                        out.eri[i] = v;
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Default)]
struct Header {
    norb: Option<usize>,
    nelec: Option<usize>,
    ms2: Option<i32>,
}

fn parse_header(text: &str, first_line: usize) -> Result<Header> {
    let spaced = text.replace('=', " = ").replace(',', " ");
    let tokens: Vec<&str> = spaced.split_whitespace().collect();
    let mut header = Header::default();
    let mut i = 0;
    while i < tokens.len() {
        if i + 1 < tokens.len() && tokens[i + 1] == "=" {
            let key = tokens[i].to_ascii_uppercase();
            let mut j = i + 2;
            let mut values = Vec::new();
            while j < tokens.len() && !(j + 1 < tokens.len() && tokens[j + 1] == "=") {
                values.push(tokens[j]);
                j += 1;
            }
            let bad = |what: &str| CqeError::Parse {
                line: first_line,
                message: format!("header key {key}: {what}"),
            };
            let first = values.first().copied();
            match key.as_str() {
                "NORB" => {
                    header.norb = Some(
                        first
                            .and_then(|v| v.parse().ok())
                            .ok_or_else(|| bad("expected a non-negative integer"))?,
                    )
                }
                "NELEC" => {
                    header.nelec = Some(
                        first
                            .and_then(|v| v.parse().ok())
                            .ok_or_else(|| bad("expected a non-negative integer"))?,
                    )
                }
                "MS2" => {
                    header.ms2 = Some(
                        first
                            .and_then(|v| v.parse().ok())
                            .ok_or_else(|| bad("expected an integer"))?,
                    )
                }
                "ORBSYM" => log::warn!("FCIDUMP ORBSYM ignored: point-group symmetry is not used"),
                "IUHF" | "UHF" => {
                    if first.map_or(false, |v| v != "0" && !v.eq_ignore_ascii_case(".FALSE.")) {
                        return Err(bad("unrestricted integrals are not supported"));
                    }
                }
                _ => {}
            }
            i = j;
        } else {
            i += 1;
        }
    }
    Ok(header)
}

/// Parses FCIDUMP text into an [`IntegralSet`].
pub fn parse_fcidump(text: &str) -> Result<IntegralSet> {
    let lines: Vec<&str> = text.lines().collect();
    let start = lines
        .iter()
        .position(|l| !l.trim().is_empty())
        .ok_or(CqeError::Parse {
            line: 1,
            message: "empty input".into(),
        })?;
    if !lines[start].trim_start().to_ascii_uppercase().starts_with("&FCI") {
        return Err(CqeError::Parse {
            line: start + 1,
            message: "expected namelist header starting with &FCI".into(),
        });
    }

    let mut header_text = String::new();
    let mut body_start = None;
    for (i, line) in lines.iter().enumerate().skip(start) {
        let mut l = line.trim().to_string();
        if i == start {
            l = l[4..].to_string();
        }
        let upper = l.to_ascii_uppercase();
        if let Some(pos) = upper.find("&END") {
            header_text.push_str(&l[..pos]);
            body_start = Some(i + 1);
            break;
        }
        if l == "/" || l.ends_with(" /") || l.ends_with(",/") {
            header_text.push_str(l.trim_end_matches('/'));
            body_start = Some(i + 1);
            break;
        }
        header_text.push(' ');
        header_text.push_str(&l);
    }
    let body_start = body_start.ok_or(CqeError::Parse {
        line: start + 1,
        message: "namelist header is not terminated by &END or /".into(),
    })?;
    let header = parse_header(&header_text, start + 1)?;
    let norb = header.norb.ok_or(CqeError::MissingHeaderKey("NORB"))?;
    let nelec = header.nelec.ok_or(CqeError::MissingHeaderKey("NELEC"))?;
    let ms2 = header.ms2.ok_or(CqeError::MissingHeaderKey("MS2"))?;

    let mut ints = IntegralSet::zeros(norb, nelec, ms2);
    for (i, raw) in lines.iter().enumerate().skip(body_start) {
        let line_no = i + 1;
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        let err = |message: String| CqeError::Parse {
            line: line_no,
            message,
        };
        if raw.contains('(') || fields.len() == 6 {
            return Err(err("complex integrals are not supported".into()));
        }
        if fields.len() != 5 {
            return Err(err(format!("expected 5 fields, found {}", fields.len())));
        }
        let value: f64 = fields[0]
            .replace(['d', 'D'], "e")
            .parse()
            .map_err(|_| err(format!("malformed value {:?}", fields[0])))?;
        if !value.is_finite() {
            return Err(err(format!("non-finite value {:?}", fields[0])));
        }
        let mut idx = [0usize; 4];
        for (k, f) in fields[1..].iter().enumerate() {
            idx[k] = f
                .parse()
                .map_err(|_| err(format!("malformed index {f:?}")))?;
            if idx[k] > norb {
                return Err(err(format!("index {} exceeds NORB = {norb}", idx[k])));
            }
        }
        match idx {
            [0, 0, 0, 0] => ints.e_core = value,
            [p, q, 0, 0] if p > 0 && q > 0 => ints.set_h(p - 1, q - 1, value),
            [p, q, r, s] if p > 0 && q > 0 && r > 0 && s > 0 => {
                ints.set_eri(p - 1, q - 1, r - 1, s - 1, value)
            }
            _ => {
                return Err(err(format!(
                    "index pattern {idx:?} is neither core, one- nor two-electron"
                )))
            }
        }
    }
    Ok(ints)
}

pub fn read_fcidump(path: &Path) -> Result<IntegralSet> {
    let text = std::fs::read_to_string(path)?;
    parse_fcidump(&text)
}

/// Renders unique integrals back to FCIDUMP text; `parse_fcidump` inverts it.
pub fn render_fcidump(ints: &IntegralSet) -> String {
    let n = ints.n_spatial;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "&FCI NORB={n}, NELEC={}, MS2={},\n&END",
        ints.n_electrons, ints.ms2
    );
    let pair = |a: usize, b: usize| a * (a + 1) / 2 + b;
    for p in 0..n {
        for q in 0..=p {
            for r in 0..n {
                for s in 0..=r {
                    if pair(p, q) < pair(r, s) {
                        continue;
                    }
                    let v = ints.eri(p, q, r, s);
                    if v != 0.0 {
                        let _ = writeln!(out, "{v:?} {} {} {} {}", p + 1, q + 1, r + 1, s + 1);
                    }
                }
            }
        }
    }
    for p in 0..n {
        for q in 0..=p {
            let v = ints.h(p, q);
            if v != 0.0 {
                let _ = writeln!(out, "{v:?} {} {} 0 0", p + 1, q + 1);
            }
        }
    }
    let _ = writeln!(out, "{:?} 0 0 0 0", ints.e_core);
    out
}

/// Ĥ = E_core + Σ h_pq a†_{pσ} a_{qσ} + ½ Σ (pq|rs) a†_{pσ} a†_{rτ} a_{sτ} a_{qσ}.
pub fn build_hamiltonian(ints: &IntegralSet) -> FermionOperator {
    let n = ints.n_spatial;
    let mut op = FermionOperator::new(2 * n);
    let spins = [Spin::Alpha, Spin::Beta];
    let c = |v: f64| Complex64::new(v, 0.0);
    // Indices are in range by construction.
    let mut push = |t: FermionTerm| op.push(t).expect("spin-orbital index in range");
    if ints.e_core != 0.0 {
        push(FermionTerm::scalar(c(ints.e_core)));
    }
    for p in 0..n {
        for q in 0..n {
            let v = ints.h(p, q);
            if v == 0.0 {
                continue;
            }
            for &s in &spins {
                push(FermionTerm::new(
                    vec![
                        LadderOp::create(spin_orbital(p, s)),
                        LadderOp::annihilate(spin_orbital(q, s)),
                    ],
                    c(v),
                ));
            }
        }
    }
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    let v = ints.eri(p, q, r, s);
                    if v == 0.0 {
                        continue;
                    }
                    for &sig in &spins {
                        for &tau in &spins {
                            let (ps, qs) = (spin_orbital(p, sig), spin_orbital(q, sig));
                            let (rt, st) = (spin_orbital(r, tau), spin_orbital(s, tau));
                            if ps == rt || qs == st {
                                continue;
                            }
                            push(FermionTerm::new(
                                vec![
                                    LadderOp::create(ps),
                                    LadderOp::create(rt),
                                    LadderOp::annihilate(st),
                                    LadderOp::annihilate(qs),
                                ],
                                c(0.5 * v),
                            ));
                        }
                    }
                }
            }
        }
    }
    op
}
