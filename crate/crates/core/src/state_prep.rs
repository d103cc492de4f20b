//! Truncated input states organized by invariant block.
//!
//! Product inputs are expanded mode by mode in the Fock basis and scattered
//! into the blocks of a [`BlockDecomposition`]. Nothing is renormalized: the
//! probability that falls outside the charge cutoff (or beyond the per-mode
//! expansions) is kept as `tail_mass`. Because the evolution conserves the
//! block charges this is the only truncation error of the whole simulation.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock_space::{BasisVector, BlockDecomposition, DeviceKind};

/// Default truncation budget for discarded probability.
pub const DEFAULT_EPS_TRUNC: f64 = 1e-10;

/// A pure single-mode input.
#[derive(Debug, Clone, PartialEq)]
pub enum SingleModeSpec {
    Vacuum,
    Number(u32),
    Coherent(Complex64),
    /// Fock coefficients `c_0, c_1, ...`.
    Custom(Vec<Complex64>),
}

impl SingleModeSpec {
    /// Photon-number cutoff that keeps the expansion tail negligible.
    ///
    /// For coherent states this is `⌈|α|² + 10|α| + 20⌉`, which leaves a
    /// Poisson tail below `1e-10` for `|α| ≤ 9`.
    pub fn default_cutoff(&self) -> u32 {
        match self {
            SingleModeSpec::Vacuum => 0,
            SingleModeSpec::Number(n) => *n,
            SingleModeSpec::Coherent(alpha) => coherent_cutoff(alpha.norm()),
            SingleModeSpec::Custom(c) => c.len().saturating_sub(1) as u32,
        }
    }

    /// Fock coefficients up to `cutoff` together with the probability beyond it.
    pub fn coefficients(&self, cutoff: u32) -> (Vec<Complex64>, f64) {
        let len = cutoff as usize + 1;
        match self {
            SingleModeSpec::Vacuum => {
                let mut c = vec![Complex64::new(0.0, 0.0); len];
                c[0] = Complex64::new(1.0, 0.0);
                (c, 0.0)
            }
            SingleModeSpec::Number(n) => {
                let mut c = vec![Complex64::new(0.0, 0.0); len];
                if (*n as usize) < len {
                    c[*n as usize] = Complex64::new(1.0, 0.0);
                    (c, 0.0)
                } else {
                    (c, 1.0)
                }
            }
            SingleModeSpec::Coherent(alpha) => {
                let c = coherent_coefficients(*alpha, cutoff);
                (c, coherent_tail(alpha.norm(), cutoff))
            }
            SingleModeSpec::Custom(coeffs) => {
                let mut c = vec![Complex64::new(0.0, 0.0); len];
                for (dst, src) in c.iter_mut().zip(coeffs) {
                    *dst = *src;
                }
                let kept: f64 = c.iter().map(|z| z.norm_sqr()).sum();
                (c, (1.0 - kept).max(0.0))
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let SingleModeSpec::Custom(c) = self {
            let norm: f64 = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if c.is_empty() || !norm.is_finite() || norm > 1.0 + 1e-12 {
                return Err(Error::Contract(format!("custom state has norm {norm}")));
            }
        }
        Ok(())
    }
}

impl fmt::Display for SingleModeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SingleModeSpec::Vacuum => write!(f, "vacuum"),
            SingleModeSpec::Number(n) => write!(f, "fock:{n}"),
            SingleModeSpec::Coherent(a) => write!(f, "coherent:{},{}", a.re, a.im),
            SingleModeSpec::Custom(c) => write!(f, "custom[{}]", c.len()),
        }
    }
}

/// Signal-side input as written on the command line.
///
/// Grammar: `vacuum`, `fock:n`, `coherent:re,im`, `fock2:n,m`. For the
/// nondegenerate amplifier a single-mode spec is applied to both the signal
/// and the idler (so `fock:1` means `|1,1⟩`); `fock2:n,m` sets them
/// separately and is only valid there.
#[derive(Debug, Clone, PartialEq)]
pub enum SignalInput {
    Single(SingleModeSpec),
    Pair(SingleModeSpec, SingleModeSpec),
}

impl SignalInput {
    /// One spec per non-pump mode of `device`.
    pub fn modes_for(&self, device: DeviceKind) -> Result<Vec<SingleModeSpec>> {
        match (device, self) {
            (DeviceKind::NondegenerateAmp, SignalInput::Single(s)) => Ok(vec![s.clone(), s.clone()]),
            (DeviceKind::NondegenerateAmp, SignalInput::Pair(a, b)) => Ok(vec![a.clone(), b.clone()]),
            (_, SignalInput::Single(s)) => Ok(vec![s.clone()]),
            (_, SignalInput::Pair(..)) => Err(Error::Parse(format!(
                "two-mode signal input is only valid for npa, not {device}"
            ))),
        }
    }
}

impl fmt::Display for SignalInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SignalInput::Single(s) => write!(f, "{s}"),
            SignalInput::Pair(SingleModeSpec::Number(n), SingleModeSpec::Number(m)) => {
                write!(f, "fock2:{n},{m}")
            }
            SignalInput::Pair(a, b) => write!(f, "{a}/{b}"),
        }
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("`{s}` is not a number")))
}

fn parse_u32(s: &str) -> Result<u32> {
    s.trim()
        .parse::<u32>()
        .map_err(|_| Error::Parse(format!("`{s}` is not a photon number")))
}

/// Parses `re,im` (or a bare real number) into a complex amplitude.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let parts: Vec<&str> = s.split(',').collect();
    match parts.as_slice() {
        [re] => Ok(Complex64::new(parse_f64(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(parse_f64(re)?, parse_f64(im)?)),
        _ => Err(Error::Parse(format!("`{s}` is not a complex number `re,im`"))),
    }
}

impl FromStr for SignalInput {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k.trim(), Some(a)),
            None => (s, None),
        };
        match (kind.to_ascii_lowercase().as_str(), arg) {
            ("vacuum", None) => Ok(SignalInput::Single(SingleModeSpec::Vacuum)),
            ("fock", Some(n)) => Ok(SignalInput::Single(SingleModeSpec::Number(parse_u32(n)?))),
            ("coherent", Some(z)) => Ok(SignalInput::Single(SingleModeSpec::Coherent(parse_complex(z)?))),
            ("fock2", Some(nm)) => match nm.split(',').collect::<Vec<_>>().as_slice() {
                [n, m] => Ok(SignalInput::Pair(
                    SingleModeSpec::Number(parse_u32(n)?),
                    SingleModeSpec::Number(parse_u32(m)?),
                )),
                _ => Err(Error::Parse(format!("`{s}`: fock2 takes `n,m`"))),
            },
            _ => Err(Error::Parse(format!(
                "unknown signal `{s}` (expected vacuum|fock:n|coherent:re,im|fock2:n,m)"
            ))),
        }
    }
}

pub fn coherent_cutoff(abs_alpha: f64) -> u32 {
    (abs_alpha * abs_alpha + 10.0 * abs_alpha + 20.0).ceil() as u32
}

/// `e^{−|α|²/2} αⁿ/√(n!)` for `n ∈ [0, cutoff]`, by the ratio recurrence.
pub fn coherent_coefficients(alpha: Complex64, cutoff: u32) -> Vec<Complex64> {
    let mut c = Vec::with_capacity(cutoff as usize + 1);
    let mut cur = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    c.push(cur);
    for n in 0..cutoff {
        cur = cur * alpha / ((n + 1) as f64).sqrt();
        c.push(cur);
    }
    c
}

/// Poisson probability beyond `cutoff` for mean `|α|²`, summed forward.
pub fn coherent_tail(abs_alpha: f64, cutoff: u32) -> f64 {
    let mean = abs_alpha * abs_alpha;
    if mean == 0.0 {
        return 0.0;
    }
    // log p(n) via the recurrence, starting at n = cutoff + 1.
    let mut log_p = -mean;
    for n in 1..=cutoff + 1 {
        log_p += mean.ln() - (n as f64).ln();
    }
    let mut tail = 0.0;
    let mut n = cutoff + 1;
    loop {
        let p = log_p.exp();
        tail += p;
        if (n as f64) > mean && p < tail * 1e-17 {
            break;
        }
        n += 1;
        log_p += mean.ln() - (n as f64).ln();
        if n > cutoff + 100_000 {
            break;
        }
    }
    tail
}

/// Amplitudes of one populated block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockAmplitudes {
    pub block: usize,
    pub amps: Vec<Complex64>,
}

/// A pure multimode state over the block-organized Fock basis.
///
/// Only populated blocks are stored, sorted by block index.
#[derive(Debug, Clone)]
pub struct MultiModeState {
    decomposition: Arc<BlockDecomposition>,
    blocks: Vec<BlockAmplitudes>,
    tail_mass: f64,
}

impl MultiModeState {
    /// Assembles a state from explicit block amplitudes.
    pub fn from_blocks(
        decomposition: Arc<BlockDecomposition>,
        mut blocks: Vec<BlockAmplitudes>,
        tail_mass: f64,
    ) -> Result<Self> {
        blocks.sort_by_key(|b| b.block);
        for w in blocks.windows(2) {
            if w[0].block == w[1].block {
                return Err(Error::Contract(format!("block {} given twice", w[0].block)));
            }
        }
        for b in &blocks {
            let dim = decomposition
                .blocks()
                .get(b.block)
                .ok_or_else(|| Error::Contract(format!("no block {}", b.block)))?
                .dim();
            if dim != b.amps.len() {
                return Err(Error::Contract(format!(
                    "block {} has dimension {dim}, got {} amplitudes",
                    b.block,
                    b.amps.len()
                )));
            }
        }
        Ok(MultiModeState { decomposition, blocks, tail_mass })
    }

    pub fn decomposition(&self) -> &Arc<BlockDecomposition> {
        &self.decomposition
    }

    pub fn device(&self) -> DeviceKind {
        self.decomposition.device()
    }

    pub fn blocks(&self) -> &[BlockAmplitudes] {
        &self.blocks
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn norm_sqr(&self) -> f64 {
        self.blocks.iter().map(|b| b.amps.iter().map(|z| z.norm_sqr()).sum::<f64>()).sum()
    }

    pub fn block_norms_sqr(&self) -> Vec<(usize, f64)> {
        self.blocks
            .iter()
            .map(|b| (b.block, b.amps.iter().map(|z| z.norm_sqr()).sum()))
            .collect()
    }

    /// Every stored amplitude with its Fock vector.
    pub fn iter(&self) -> impl Iterator<Item = (BasisVector, Complex64)> + '_ {
        self.blocks.iter().flat_map(move |b| {
            let block = self.decomposition.block(b.block);
            b.amps.iter().enumerate().map(move |(m, &z)| (block.basis_vector(m), z))
        })
    }

    /// Visits every stored amplitude with its occupations, without allocating.
    pub fn for_each_amplitude(&self, mut f: impl FnMut(&[u32], Complex64)) {
        let modes = self.device().mode_count();
        let mut occ = [0u32; 3];
        for b in &self.blocks {
            let block = self.decomposition.block(b.block);
            for (m, &z) in b.amps.iter().enumerate() {
                block.occupations_into(m, &mut occ);
                f(&occ[..modes], z);
            }
        }
    }

    pub fn amplitude(&self, v: &BasisVector) -> Complex64 {
        let Some((block, pos)) = self.decomposition.locate(v) else {
            return Complex64::new(0.0, 0.0);
        };
        match self.blocks.binary_search_by_key(&block, |b| b.block) {
            Ok(i) => self.blocks[i].amps[pos],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// Largest occupation of each mode over the stored support.
    pub fn max_occupations(&self) -> Vec<u32> {
        let mut max = vec![0u32; self.device().mode_count()];
        self.for_each_amplitude(|occ, _| {
            for (m, &n) in max.iter_mut().zip(occ) {
                *m = (*m).max(n);
            }
        });
        max
    }

    /// Same decomposition and tail, new amplitudes.
    pub(crate) fn with_blocks(&self, blocks: Vec<BlockAmplitudes>) -> Self {
        MultiModeState { decomposition: self.decomposition.clone(), blocks, tail_mass: self.tail_mass }
    }
}

/// Per-mode cutoffs for a product input, derived from the specs.
pub fn default_mode_cutoffs(signals: &[SingleModeSpec], pump: &SingleModeSpec) -> Vec<u32> {
    signals.iter().chain(std::iter::once(pump)).map(SingleModeSpec::default_cutoff).collect()
}

/// Charge cutoff that holds the default per-mode expansions of a product input.
pub fn default_max_charge(device: DeviceKind, signals: &[SingleModeSpec], pump: &SingleModeSpec) -> u32 {
    device.charge_bound(&default_mode_cutoffs(signals, pump))
}

/// Builds `|signal⟩ ⊗ |pump⟩` over the blocks of `decomposition`.
///
/// Fails with [`Error::Truncation`] if the probability that cannot be
/// represented (beyond the per-mode expansions or the charge cutoff) exceeds
/// `eps_trunc`.
pub fn product_state(
    signals: &[SingleModeSpec],
    pump: &SingleModeSpec,
    decomposition: Arc<BlockDecomposition>,
    eps_trunc: f64,
) -> Result<MultiModeState> {
    let device = decomposition.device();
    if signals.len() + 1 != device.mode_count() {
        return Err(Error::Contract(format!(
            "{device} takes {} signal mode(s), got {}",
            device.mode_count() - 1,
            signals.len()
        )));
    }
    let specs: Vec<&SingleModeSpec> = signals.iter().chain(std::iter::once(pump)).collect();
    for s in &specs {
        s.validate()?;
    }
    let cutoffs: Vec<u32> = specs.iter().map(|s| s.default_cutoff()).collect();
    let expansions: Vec<Vec<(u32, Complex64)>> = specs
        .iter()
        .zip(&cutoffs)
        .map(|(s, &cut)| {
            let (c, _) = s.coefficients(cut);
            c.into_iter()
                .enumerate()
                .filter(|(_, z)| z.norm_sqr() > 0.0)
                .map(|(n, z)| (n as u32, z))
                .collect()
        })
        .collect();

    let mut scattered: BTreeMap<usize, Vec<Complex64>> = BTreeMap::new();
    let mut place = |occ: &[u32], amp: Complex64| {
        let v = BasisVector::new(occ);
        if let Some((b, pos)) = decomposition.locate(&v) {
            let dim = decomposition.block(b).dim();
            scattered.entry(b).or_insert_with(|| vec![Complex64::new(0.0, 0.0); dim])[pos] += amp;
        }
    };
    match expansions.as_slice() {
        [x, y] => {
            for &(n0, c0) in x {
                for &(n1, c1) in y {
                    place(&[n0, n1], c0 * c1);
                }
            }
        }
        [x, y, z] => {
            for &(n0, c0) in x {
                for &(n1, c1) in y {
                    let c01 = c0 * c1;
                    for &(n2, c2) in z {
                        place(&[n0, n1, n2], c01 * c2);
                    }
                }
            }
        }
        _ => unreachable!("devices have two or three modes"),
    }

    let blocks: Vec<BlockAmplitudes> =
        scattered.into_iter().map(|(block, amps)| BlockAmplitudes { block, amps }).collect();
    let kept: f64 = blocks.iter().flat_map(|b| &b.amps).map(|z| z.norm_sqr()).sum();
    let tail_mass = (1.0 - kept).max(0.0);
    if tail_mass > eps_trunc {
        // Required cutoff: large enough for every mode's expansion at the budget.
        let required = device.charge_bound(&cutoffs).max(decomposition.max_charge() + 1);
        return Err(Error::Truncation { discarded: tail_mass, allowed: eps_trunc, required });
    }
    MultiModeState::from_blocks(decomposition, blocks, tail_mass)
}
