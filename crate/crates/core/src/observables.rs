//! Reduced states and the quantities compared against the parametric
//! approximation: overlap, photon statistics, pump depletion and the Wigner
//! function.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::{FRAC_1_PI, SQRT_2};
use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::state_prep::MultiModeState;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A pure state of one or more modes as a dense row-major tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    dims: Vec<usize>,
    amps: Vec<Complex64>,
}

impl PureState {
    pub fn new(dims: Vec<usize>, amps: Vec<Complex64>) -> Result<Self> {
        if dims.is_empty() || dims.iter().product::<usize>() != amps.len() {
            return Err(Error::Contract(format!(
                "{} amplitudes do not fill dimensions {dims:?}",
                amps.len()
            )));
        }
        Ok(PureState { dims, amps })
    }

    pub fn single_mode(amps: Vec<Complex64>) -> Self {
        PureState { dims: vec![amps.len()], amps }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    fn flat_index(&self, occ: &[u32]) -> Option<usize> {
        let mut idx = 0usize;
        for (&n, &d) in occ.iter().zip(&self.dims) {
            let n = n as usize;
            if n >= d {
                return None;
            }
            idx = idx * d + n;
        }
        Some(idx)
    }

    /// Amplitude of a Fock configuration, zero outside the stored range.
    pub fn get(&self, occ: &[u32]) -> Complex64 {
        self.flat_index(occ).map_or(ZERO, |i| self.amps[i])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `|ψ⟩⟨ψ|` as a [`ReducedDensity`] over the stored support.
    pub fn to_density(&self, modes: Vec<usize>) -> ReducedDensity {
        let mut basis = Vec::new();
        let mut vals = Vec::new();
        let mut occ = vec![0u32; self.dims.len()];
        for (i, &z) in self.amps.iter().enumerate() {
            let mut r = i;
            for k in (0..self.dims.len()).rev() {
                occ[k] = (r % self.dims[k]) as u32;
                r /= self.dims[k];
            }
            basis.push(occ.clone());
            vals.push(z);
        }
        let n = vals.len();
        let matrix = DMatrix::from_fn(n, n, |i, j| vals[i] * vals[j].conj());
        ReducedDensity { modes, basis, matrix }
    }
}

/// A density matrix of a subset of modes in the Fock basis.
///
/// `basis[i]` lists the occupations of the kept modes for row/column `i`.
/// Single-mode densities always use the contiguous basis `|0⟩ … |dim−1⟩`.
#[derive(Debug, Clone)]
pub struct ReducedDensity {
    modes: Vec<usize>,
    basis: Vec<Vec<u32>>,
    matrix: DMatrix<Complex64>,
}

impl ReducedDensity {
    /// Single-mode density from an explicit matrix.
    pub fn single_mode(matrix: DMatrix<Complex64>) -> Self {
        let basis = (0..matrix.nrows() as u32).map(|n| vec![n]).collect();
        ReducedDensity { modes: vec![0], basis, matrix }
    }

    pub fn modes(&self) -> &[usize] {
        &self.modes
    }

    pub fn basis(&self) -> &[Vec<u32>] {
        &self.basis
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn is_single_mode(&self) -> bool {
        self.modes.len() == 1
    }

    /// Diagonal of the matrix (occupation probabilities, unnormalized).
    pub fn diagonal(&self) -> Vec<f64> {
        self.matrix.diagonal().iter().map(|z| z.re).collect()
    }

    pub fn index_of(&self, occ: &[u32]) -> Option<usize> {
        if self.is_single_mode() {
            let n = occ[0] as usize;
            (n < self.basis.len()).then_some(n)
        } else {
            self.basis.binary_search_by(|b| b.as_slice().cmp(occ)).ok()
        }
    }

    /// Smallest eigenvalue (Hermitian eigensolver).
    pub fn min_eigenvalue(&self) -> f64 {
        self.matrix.clone().symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest `|ρ − ρ†|` entry.
    pub fn hermiticity_error(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

fn rest_key(occ: &[u32], keep_mask: u8) -> u64 {
    let mut key = 0u64;
    for (m, &n) in occ.iter().enumerate() {
        if keep_mask & (1 << m) == 0 {
            key = (key << 21) | n as u64;
        }
    }
    key
}

fn keep_mask(modes: usize, keep: &[usize]) -> Result<u8> {
    if keep.is_empty() {
        return Err(Error::Contract("partial trace must keep at least one mode".into()));
    }
    let mut mask = 0u8;
    for &k in keep {
        if k >= modes || mask & (1 << k) != 0 {
            return Err(Error::Contract(format!("bad mode set {keep:?} for {modes} modes")));
        }
        mask |= 1 << k;
    }
    Ok(mask)
}

/// Traces out every mode not in `keep` (kept modes in ascending order).
pub fn partial_trace(state: &MultiModeState, keep: &[usize]) -> Result<ReducedDensity> {
    let modes = state.device().mode_count();
    let mask = keep_mask(modes, keep)?;
    let mut kept_modes: Vec<usize> = keep.to_vec();
    kept_modes.sort_unstable();

    let kept_occ = |occ: &[u32]| -> Vec<u32> { kept_modes.iter().map(|&m| occ[m]).collect() };

    // Kept basis.
    let basis: Vec<Vec<u32>> = if kept_modes.len() == 1 {
        let max = state.max_occupations()[kept_modes[0]];
        (0..=max).map(|n| vec![n]).collect()
    } else {
        let mut set = BTreeMap::new();
        state.for_each_amplitude(|occ, z| {
            if z.norm_sqr() > 0.0 {
                set.insert(kept_occ(occ), ());
            }
        });
        set.into_keys().collect()
    };
    let index: HashMap<&[u32], usize> = basis.iter().enumerate().map(|(i, b)| (b.as_slice(), i)).collect();

    let mut groups: HashMap<u64, Vec<(usize, Complex64)>> = HashMap::new();
    state.for_each_amplitude(|occ, z| {
        if z.norm_sqr() == 0.0 {
            return;
        }
        let k = kept_occ(occ);
        let i = index[k.as_slice()];
        groups.entry(rest_key(occ, mask)).or_default().push((i, z));
    });

    let n = basis.len();
    let mut matrix = DMatrix::<Complex64>::zeros(n, n);
    let mut keys: Vec<u64> = groups.keys().copied().collect();
    keys.sort_unstable();
    for key in keys {
        let g = &groups[&key];
        for &(i, zi) in g {
            for &(j, zj) in g {
                matrix[(i, j)] += zi * zj.conj();
            }
        }
    }
    Ok(ReducedDensity { modes: kept_modes, basis, matrix })
}

/// The theoretical side of an overlap.
#[derive(Debug, Clone, Copy)]
pub enum Reference<'a> {
    Pure(&'a PureState),
    Mixed(&'a ReducedDensity),
}

/// `Tr(ρ_th ρ_out)`; bases are matched by occupation, missing entries count as zero.
pub fn trace_overlap(theory: Reference<'_>, out: &ReducedDensity) -> f64 {
    let value = match theory {
        Reference::Pure(psi) => {
            // ψ mapped into the basis of ρ_out.
            let v: Vec<Complex64> = out.basis.iter().map(|b| psi.get(b)).collect();
            let mut acc = ZERO;
            for (i, vi) in v.iter().enumerate() {
                if vi.norm_sqr() == 0.0 {
                    continue;
                }
                for (j, vj) in v.iter().enumerate() {
                    acc += vi.conj() * out.matrix[(i, j)] * vj;
                }
            }
            acc.re
        }
        Reference::Mixed(th) => {
            let mut acc = ZERO;
            let map: Vec<Option<usize>> = th.basis.iter().map(|b| out.index_of(b)).collect();
            for (i, oi) in map.iter().enumerate() {
                let Some(oi) = oi else { continue };
                for (j, oj) in map.iter().enumerate() {
                    let Some(oj) = oj else { continue };
                    acc += th.matrix[(i, j)] * out.matrix[(*oj, *oi)];
                }
            }
            acc.re
        }
    };
    value.max(0.0)
}

/// `O = √Tr(ρ_th ρ_out)`.
pub fn overlap(theory: Reference<'_>, out: &ReducedDensity) -> f64 {
    trace_overlap(theory, out).sqrt()
}

/// `⟨ψ|Tr_rest(|Ψ⟩⟨Ψ|)|ψ⟩` computed directly on the multimode state.
///
/// Equivalent to [`trace_overlap`] with a pure reference against
/// `partial_trace(state, keep)`, without forming the reduced matrix.
pub fn pure_trace_overlap(psi: &PureState, state: &MultiModeState, keep: &[usize]) -> Result<f64> {
    let modes = state.device().mode_count();
    let mask = keep_mask(modes, keep)?;
    let mut kept_modes: Vec<usize> = keep.to_vec();
    kept_modes.sort_unstable();
    if kept_modes.len() != psi.dims().len() {
        return Err(Error::Contract(format!(
            "reference has {} modes, keeping {}",
            psi.dims().len(),
            kept_modes.len()
        )));
    }
    let mut kept = [0u32; 3];
    let single_rest = modes - kept_modes.len() == 1;
    let mut dense: Vec<Complex64> = Vec::new();
    let mut sparse: HashMap<u64, Complex64> = HashMap::new();
    state.for_each_amplitude(|occ, z| {
        for (slot, &m) in kept.iter_mut().zip(&kept_modes) {
            *slot = occ[m];
        }
        let t = psi.get(&kept[..kept_modes.len()]);
        if t.norm_sqr() == 0.0 {
            return;
        }
        let contrib = t.conj() * z;
        let key = rest_key(occ, mask);
        if single_rest {
            let k = key as usize;
            if dense.len() <= k {
                dense.resize(k + 1, ZERO);
            }
            dense[k] += contrib;
        } else {
            *sparse.entry(key).or_insert(ZERO) += contrib;
        }
    });
    let total: f64 = dense.iter().map(|z| z.norm_sqr()).sum::<f64>()
        + sparse.values().map(|z| z.norm_sqr()).sum::<f64>();
    Ok(total)
}

/// Occupation probabilities of one mode (unnormalized: they sum to `1 − tail`).
pub fn mode_distribution(state: &MultiModeState, mode: usize) -> Vec<f64> {
    let mut p = vec![0.0; state.max_occupations()[mode] as usize + 1];
    state.for_each_amplitude(|occ, z| p[occ[mode] as usize] += z.norm_sqr());
    p
}

/// Moments of a photon-number distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonStats {
    /// Renormalized to unit sum.
    pub distribution: Vec<f64>,
    pub mean: f64,
    pub variance: f64,
    /// `variance / mean`; `None` when the mean vanishes.
    pub fano: Option<f64>,
}

impl PhotonStats {
    pub fn from_distribution(p: &[f64]) -> Result<Self> {
        let total: f64 = p.iter().sum();
        if total < 1e-6 {
            return Err(Error::Contract(format!("distribution carries only {total:.3e} probability")));
        }
        let distribution: Vec<f64> = p.iter().map(|x| x / total).collect();
        let mean: f64 = distribution.iter().enumerate().map(|(n, q)| n as f64 * q).sum();
        let variance: f64 = distribution
            .iter()
            .enumerate()
            .map(|(n, q)| (n as f64 - mean).powi(2) * q)
            .sum();
        let fano = (mean > 1e-300).then(|| variance / mean);
        Ok(PhotonStats { distribution, mean, variance, fano })
    }
}

/// Photon statistics of a single-mode density, renormalized by its trace.
pub fn photon_stats(rho: &ReducedDensity) -> Result<PhotonStats> {
    if !rho.is_single_mode() {
        return Err(Error::Contract("photon statistics need a single-mode density".into()));
    }
    PhotonStats::from_distribution(&rho.diagonal())
}

/// Fractional loss of pump photons relative to the initial `|β|²`.
pub fn depletion_from_mean(mean_pump: f64, beta: Complex64) -> Result<f64> {
    let b2 = beta.norm_sqr();
    if b2 <= 0.0 {
        return Err(Error::Contract("depletion needs a nonzero pump amplitude".into()));
    }
    Ok((b2 - mean_pump) / b2)
}

pub fn depletion(rho_pump: &ReducedDensity, beta: Complex64) -> Result<f64> {
    depletion_from_mean(photon_stats(rho_pump)?.mean, beta)
}

/// Rectangular phase-space grid, `points × points`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WignerGridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub points: usize,
}

impl Default for WignerGridSpec {
    fn default() -> Self {
        WignerGridSpec { x_min: -6.0, x_max: 6.0, p_min: -6.0, p_max: 6.0, points: 121 }
    }
}

impl std::str::FromStr for WignerGridSpec {
    type Err = Error;

    /// `xmin,xmax,pmin,pmax,npts`
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [a, b, c, d, n] = parts.as_slice() else {
            return Err(Error::Parse(format!("wigner grid `{s}` needs xmin,xmax,pmin,pmax,npts")));
        };
        let f = |t: &str| t.parse::<f64>().map_err(|_| Error::Parse(format!("`{t}` is not a number")));
        let points = n.parse::<usize>().map_err(|_| Error::Parse(format!("`{n}` is not a point count")))?;
        let spec = WignerGridSpec { x_min: f(a)?, x_max: f(b)?, p_min: f(c)?, p_max: f(d)?, points };
        if points < 2 || !(spec.x_min < spec.x_max && spec.p_min < spec.p_max) {
            return Err(Error::Parse(format!("degenerate wigner grid `{s}`")));
        }
        Ok(spec)
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Wigner function sampled on a grid; `values[ix * p.len() + ip]`.
#[derive(Debug, Clone)]
pub struct WignerGrid {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    pub values: Vec<f64>,
}

impl WignerGrid {
    pub fn at(&self, ix: usize, ip: usize) -> f64 {
        self.values[ix * self.p.len() + ip]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Trapezoidal `∫∫ W dx dp`.
    pub fn integral(&self) -> f64 {
        let dx = self.x[1] - self.x[0];
        let dp = self.p[1] - self.p[0];
        let (nx, np) = (self.x.len(), self.p.len());
        let mut acc = 0.0;
        for ix in 0..nx {
            let wx = if ix == 0 || ix == nx - 1 { 0.5 } else { 1.0 };
            for ip in 0..np {
                let wp = if ip == 0 || ip == np - 1 { 0.5 } else { 1.0 };
                acc += wx * wp * self.at(ix, ip);
            }
        }
        acc * dx * dp
    }

    /// `∫ W(x, p) dp` for every grid `x`.
    pub fn x_marginal(&self) -> Vec<f64> {
        let dp = self.p[1] - self.p[0];
        let np = self.p.len();
        (0..self.x.len())
            .map(|ix| {
                (0..np)
                    .map(|ip| if ip == 0 || ip == np - 1 { 0.5 } else { 1.0 } * self.at(ix, ip))
                    .sum::<f64>()
                    * dp
            })
            .collect()
    }

    /// CSV with header `x,p,w`, one row per grid point, `x` outermost.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,p,w")?;
        for (ix, x) in self.x.iter().enumerate() {
            for (ip, p) in self.p.iter().enumerate() {
                writeln!(w, "{},{},{}", fmt_sig(*x), fmt_sig(*p), fmt_sig(self.at(ix, ip)))?;
            }
        }
        Ok(())
    }
}

/// Twelve significant digits, fixed layout.
pub fn fmt_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    format!("{v:.11e}")
}

/// `W(x, p) = (1/π) Tr[ρ D(α) P D†(α)]`, `α = (x + ip)/√2`, by the Laguerre
/// recurrence over the Fock matrix elements.
fn wigner_point(rho: &DMatrix<Complex64>, x: f64, p: f64) -> f64 {
    let m = rho.nrows();
    let a = Complex64::new(x, p) / SQRT_2;
    let two_a = 2.0 * a;
    let two_a_conj = two_a.conj();
    let mut wl = vec![ZERO; m];
    wl[0] = Complex64::new((-2.0 * a.norm_sqr()).exp() * FRAC_1_PI, 0.0);
    let mut w = rho[(0, 0)].re * wl[0].re;
    for n in 1..m {
        wl[n] = two_a * wl[n - 1] / (n as f64).sqrt();
        w += 2.0 * (rho[(0, n)] * wl[n]).re;
    }
    for i in 1..m {
        let si = (i as f64).sqrt();
        let mut temp = wl[i];
        wl[i] = (two_a_conj * temp - si * wl[i - 1]) / si;
        w += (rho[(i, i)] * wl[i]).re;
        for n in i + 1..m {
            let next = (two_a * wl[n - 1] - si * temp) / (n as f64).sqrt();
            temp = wl[n];
            wl[n] = next;
            w += 2.0 * (rho[(i, n)] * wl[n]).re;
        }
    }
    w
}

/// Samples the Wigner function of a single-mode density on `grid`.
pub fn wigner(rho: &ReducedDensity, grid: &WignerGridSpec) -> Result<WignerGrid> {
    if !rho.is_single_mode() {
        return Err(Error::Contract("Wigner function needs a single-mode density".into()));
    }
    if rho.dim() > 256 {
        return Err(Error::Contract(format!("density of dimension {} exceeds 256", rho.dim())));
    }
    if grid.points < 2 || !(grid.x_min.is_finite() && grid.x_max.is_finite() && grid.p_min.is_finite() && grid.p_max.is_finite()) {
        return Err(Error::Contract("Wigner grid must be finite with at least two points".into()));
    }
    let x = linspace(grid.x_min, grid.x_max, grid.points);
    let p = linspace(grid.p_min, grid.p_max, grid.points);
    let values = x
        .par_iter()
        .flat_map_iter(|&xv| p.iter().map(move |&pv| (xv, pv)).collect::<Vec<_>>())
        .map(|(xv, pv)| wigner_point(&rho.matrix, xv, pv))
        .collect();
    Ok(WignerGrid { x, p, values })
}
