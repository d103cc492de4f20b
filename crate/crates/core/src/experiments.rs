//! τ* searches, time sweeps and the Fano-factor criterion scan.

use std::collections::BTreeSet;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock_space::{decompose, DeviceKind};
use crate::observables::{
    depletion_from_mean, fmt_sig, mode_distribution, partial_trace, pure_trace_overlap, wigner, PhotonStats,
    ReducedDensity, WignerGrid, WignerGridSpec,
};
use crate::propagator::{EvolutionPlan, PreparedEvolution};
use crate::state_prep::{
    default_max_charge, parse_complex, product_state, MultiModeState, SignalInput, SingleModeSpec, DEFAULT_EPS_TRUNC,
};
use crate::theory::{TargetStateSpec, TruncatedTarget};

pub const CSV_HEADER: &str = "tau,overlap,fano,mean_signal,mean_pump,depletion";

/// How the exact reduced state is compared with the target `|ψ⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OverlapMeasure {
    /// `⟨ψ|ρ_out|ψ⟩`.
    Trace,
    /// `√⟨ψ|ρ_out|ψ⟩`.
    Root,
}

impl OverlapMeasure {
    /// `Root` for the degenerate amplifier, `Trace` otherwise.
    ///
    /// These are the measures under which the published τ* values of each
    /// device are reproduced; see the README.
    pub fn default_for(device: DeviceKind) -> Self {
        match device {
            DeviceKind::DegenerateAmp => OverlapMeasure::Root,
            _ => OverlapMeasure::Trace,
        }
    }
}

impl FromStr for OverlapMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "trace" => Ok(OverlapMeasure::Trace),
            "root" | "sqrt" => Ok(OverlapMeasure::Root),
            other => Err(Error::Parse(format!("unknown overlap measure `{other}` (trace|root)"))),
        }
    }
}

impl fmt::Display for OverlapMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OverlapMeasure::Trace => "trace",
            OverlapMeasure::Root => "root",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Output {
    Overlap,
    Fano,
    Mean,
    Depletion,
    Distribution,
    Wigner,
}

impl Output {
    /// Whether this output is a column of the sweep CSV.
    pub fn in_sweep(self) -> bool {
        !matches!(self, Output::Distribution | Output::Wigner)
    }
}

impl FromStr for Output {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "overlap" => Output::Overlap,
            "fano" => Output::Fano,
            "mean" | "mean_photon" => Output::Mean,
            "depletion" => Output::Depletion,
            "dist" | "distribution" => Output::Distribution,
            "wigner" => Output::Wigner,
            other => return Err(Error::Parse(format!("unknown output `{other}`"))),
        })
    }
}

pub fn parse_outputs(s: &str) -> Result<BTreeSet<Output>> {
    let set = s.split(',').filter(|t| !t.trim().is_empty()).map(Output::from_str).collect::<Result<BTreeSet<_>>>()?;
    if set.is_empty() {
        return Err(Error::Parse("empty output list".into()));
    }
    Ok(set)
}

/// Charge cutoff of the simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Cutoff {
    /// Derived from the input expansions.
    #[default]
    Auto,
    Fixed(u32),
}

impl FromStr for Cutoff {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "auto" => Ok(Cutoff::Auto),
            n => n
                .parse::<u32>()
                .map(Cutoff::Fixed)
                .map_err(|_| Error::Parse(format!("cutoff `{n}` is neither `auto` nor an integer"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub device: DeviceKind,
    pub signal: SignalInput,
    pub beta: Complex64,
    /// `None` selects the device default, see [`ExperimentConfig::tau_max`].
    pub tau_max: Option<f64>,
    pub tau_steps: usize,
    pub threshold: f64,
    pub eps_trunc: f64,
    pub cutoff: Cutoff,
    pub outputs: BTreeSet<Output>,
    /// `None` selects [`OverlapMeasure::default_for`] the device.
    pub measure: Option<OverlapMeasure>,
    pub wigner_grid: WignerGridSpec,
    /// Time of the distribution and Wigner snapshots; `None` means τ*.
    pub snapshot_tau: Option<f64>,
}

impl ExperimentConfig {
    pub fn new(device: DeviceKind, signal: SignalInput, beta: Complex64) -> Self {
        ExperimentConfig {
            device,
            signal,
            beta,
            tau_max: None,
            tau_steps: 400,
            threshold: 0.99,
            eps_trunc: DEFAULT_EPS_TRUNC,
            cutoff: Cutoff::Auto,
            outputs: [Output::Overlap, Output::Fano, Output::Mean, Output::Depletion].into_iter().collect(),
            measure: None,
            wigner_grid: WignerGridSpec::default(),
            snapshot_tau: None,
        }
    }

    pub fn with_tau_grid(mut self, tau_max: f64, steps: usize) -> Self {
        self.tau_max = Some(tau_max);
        self.tau_steps = steps;
        self
    }

    /// π for the beam splitter, `3/(2|β|)` for the amplifiers unless set.
    pub fn tau_max(&self) -> f64 {
        self.tau_max.unwrap_or(match self.device {
            DeviceKind::BeamSplitter => std::f64::consts::PI,
            _ => 1.5 / self.beta.norm(),
        })
    }

    pub fn measure(&self) -> OverlapMeasure {
        self.measure.unwrap_or(OverlapMeasure::default_for(self.device))
    }

    /// Inclusive grid `0, …, τ_max` with `tau_steps` points.
    pub fn tau_grid(&self) -> Vec<f64> {
        let hi = self.tau_max();
        let n = self.tau_steps;
        (0..n).map(|i| hi * i as f64 / (n - 1) as f64).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.tau_steps < 2 {
            return Err(Error::Parse(format!("tau-steps must be at least 2, got {}", self.tau_steps)));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::Parse(format!("threshold must lie in (0, 1), got {}", self.threshold)));
        }
        if !(self.eps_trunc > 0.0 && self.eps_trunc < 1.0) {
            return Err(Error::Parse(format!("eps-trunc must lie in (0, 1), got {}", self.eps_trunc)));
        }
        if !(self.beta.norm() > 0.0 && self.beta.norm().is_finite()) {
            return Err(Error::Parse("pump amplitude must be finite and nonzero".into()));
        }
        let tmax = self.tau_max();
        if !(tmax > 0.0 && tmax.is_finite()) {
            return Err(Error::Parse(format!("tau-max must be positive, got {tmax}")));
        }
        self.signal.modes_for(self.device)?;
        Ok(())
    }

    /// Sets one field from its textual `key=value` form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let num = |v: &str| v.parse::<f64>().map_err(|_| Error::Parse(format!("{key}: `{v}` is not a number")));
        match key.trim() {
            "device" => self.device = value.parse()?,
            "signal" => self.signal = value.parse()?,
            "beta" => self.beta = parse_complex(value)?,
            "tau-max" | "tau_max" => self.tau_max = Some(num(value)?),
            "tau-steps" | "tau_steps" => {
                self.tau_steps = value.parse().map_err(|_| Error::Parse(format!("{key}: `{value}` is not a count")))?
            }
            "threshold" => self.threshold = num(value)?,
            "eps-trunc" | "eps_trunc" => self.eps_trunc = num(value)?,
            "cutoff" => self.cutoff = value.parse()?,
            "emit" => self.outputs = parse_outputs(value)?,
            "measure" => self.measure = Some(value.parse()?),
            "wigner-grid" | "wigner_grid" => self.wigner_grid = value.parse()?,
            "snapshot-tau" | "snapshot_tau" => self.snapshot_tau = Some(num(value)?),
            other => return Err(Error::Parse(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Builds a config from `key=value` pairs applied in order; `device` is
    /// required, everything else has a default.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self> {
        let pairs: Vec<(&str, &str)> = pairs.into_iter().collect();
        let device = pairs
            .iter()
            .rev()
            .find(|(k, _)| k.trim() == "device")
            .ok_or_else(|| Error::Parse("missing `device`".into()))?
            .1
            .parse()?;
        let mut cfg = ExperimentConfig::new(device, SignalInput::Single(SingleModeSpec::Vacuum), Complex64::new(1.0, 0.0));
        for (k, v) in pairs {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses a plain `key = value` file; `#` starts a comment.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected key=value", n + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// One row of the sweep CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentRecord {
    pub tau: f64,
    pub overlap: f64,
    /// Pump Fano factor; NaN if the pump is empty.
    pub fano: f64,
    /// Summed over all signal modes (signal plus idler for npa).
    pub mean_signal: f64,
    pub mean_pump: f64,
    pub depletion: f64,
}

pub fn write_records<W: Write>(records: &[ExperimentRecord], mut w: W) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            fmt_sig(r.tau),
            fmt_sig(r.overlap),
            fmt_sig(r.fano),
            fmt_sig(r.mean_signal),
            fmt_sig(r.mean_pump),
            fmt_sig(r.depletion)
        )?;
    }
    Ok(())
}

/// Where the overlap first drops below threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauStar {
    Found(f64),
    /// Overlap never falls below threshold on the grid.
    Unbounded,
}

impl TauStar {
    pub fn value(self) -> Result<f64> {
        match self {
            TauStar::Found(t) => Ok(t),
            TauStar::Unbounded => Err(Error::Unbounded),
        }
    }
}

/// An initial state prepared for repeated exact evaluation.
pub struct Experiment {
    config: ExperimentConfig,
    signals: Vec<SingleModeSpec>,
    evolution: PreparedEvolution,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let signals = config.signal.modes_for(config.device)?;
        let pump = SingleModeSpec::Coherent(config.beta);
        let max_charge = match config.cutoff {
            Cutoff::Auto => default_max_charge(config.device, &signals, &pump),
            Cutoff::Fixed(n) => n,
        };
        let dec = Arc::new(decompose(config.device, max_charge));
        let state = product_state(&signals, &pump, dec, config.eps_trunc)?;
        let plan = EvolutionPlan::for_state(&state)?;
        let evolution = plan.prepare(&state)?;
        Ok(Experiment { config, signals, evolution })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn signals(&self) -> &[SingleModeSpec] {
        &self.signals
    }

    pub fn initial(&self) -> &MultiModeState {
        self.evolution.initial()
    }

    pub fn state_at(&self, tau: f64) -> MultiModeState {
        self.evolution.at(tau)
    }

    pub fn target_spec(&self, tau: f64) -> TargetStateSpec {
        TargetStateSpec { device: self.config.device, pump_amplitude: self.config.beta, tau }
    }

    /// Target over the signal modes, exact on every level the simulation can
    /// populate.
    pub fn target(&self, tau: f64) -> Result<TruncatedTarget> {
        let max = self.initial().max_occupations();
        let cutoff = self.config.device.signal_modes().iter().map(|&m| max[m]).max().unwrap_or(0);
        self.target_spec(tau).target(&self.signals, cutoff)
    }

    fn overlap_of(&self, state: &MultiModeState, tau: f64) -> Result<f64> {
        let target = self.target(tau)?;
        let tr = pure_trace_overlap(&target.state, state, self.config.device.signal_modes())?;
        Ok(match self.config.measure() {
            OverlapMeasure::Trace => tr,
            OverlapMeasure::Root => tr.sqrt(),
        })
    }

    pub fn overlap_at(&self, tau: f64) -> Result<f64> {
        self.overlap_of(&self.state_at(tau), tau)
    }

    pub fn record_at(&self, tau: f64) -> Result<ExperimentRecord> {
        let state = self.state_at(tau);
        let overlap = self.overlap_of(&state, tau)?;
        let device = self.config.device;
        let pump = PhotonStats::from_distribution(&mode_distribution(&state, device.pump_mode()))?;
        let mut mean_signal = 0.0;
        for &m in device.signal_modes() {
            mean_signal += PhotonStats::from_distribution(&mode_distribution(&state, m))?.mean;
        }
        Ok(ExperimentRecord {
            tau,
            overlap,
            fano: pump.fano.unwrap_or(f64::NAN),
            mean_signal,
            mean_pump: pump.mean,
            depletion: depletion_from_mean(pump.mean, self.config.beta)?,
        })
    }

    /// One record per grid point, in τ order.
    pub fn sweep(&self) -> Result<Vec<ExperimentRecord>> {
        self.config.tau_grid().par_iter().map(|&t| self.record_at(t)).collect()
    }

    /// First down-crossing of the threshold on the grid, refined by
    /// bisection to `1e-4`. Returns the lower end of the final bracket, so
    /// the overlap there is still above threshold.
    pub fn tau_star(&self) -> Result<TauStar> {
        let grid = self.config.tau_grid();
        let thr = self.config.threshold;
        let values: Vec<f64> = grid.par_iter().map(|&t| self.overlap_at(t)).collect::<Result<_>>()?;
        let Some(first) = values.iter().position(|&o| o < thr) else {
            return Ok(TauStar::Unbounded);
        };
        if first == 0 {
            return Err(Error::Contract(format!("overlap at tau = 0 is already below {thr}")));
        }
        let (mut lo, mut hi) = (grid[first - 1], grid[first]);
        while hi - lo > 1e-4 {
            let mid = 0.5 * (lo + hi);
            if self.overlap_at(mid)? >= thr {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(TauStar::Found(lo))
    }

    /// `|β| sin τ*`, `2|β|τ*` or `|β|τ*`.
    pub fn max_parameter(&self) -> Result<f64> {
        let t = self.tau_star()?.value()?;
        Ok(max_parameter_at(self.config.device, self.config.beta, t))
    }

    /// Reduced density of the first signal mode.
    pub fn signal_density(&self, tau: f64) -> Result<ReducedDensity> {
        partial_trace(&self.state_at(tau), &[self.config.device.signal_modes()[0]])
    }

    pub fn signal_wigner(&self, tau: f64) -> Result<WignerGrid> {
        wigner(&self.signal_density(tau)?, &self.config.wigner_grid)
    }

    /// Photon-number distributions of every mode, device mode order.
    pub fn distributions(&self, tau: f64) -> Vec<Vec<f64>> {
        let state = self.state_at(tau);
        (0..self.config.device.mode_count()).map(|m| mode_distribution(&state, m)).collect()
    }

    /// Snapshot time for distribution and Wigner outputs.
    pub fn snapshot_tau(&self) -> Result<f64> {
        if let Some(t) = self.config.snapshot_tau {
            return Ok(t);
        }
        Ok(match self.tau_star()? {
            TauStar::Found(t) => t,
            TauStar::Unbounded => self.config.tau_max(),
        })
    }
}

pub fn max_parameter_at(device: DeviceKind, beta: Complex64, tau: f64) -> f64 {
    let b = beta.norm();
    match device {
        DeviceKind::BeamSplitter => b * tau.sin(),
        DeviceKind::DegenerateAmp => 2.0 * b * tau,
        DeviceKind::NondegenerateAmp => b * tau,
    }
}

/// CSV `n,p_<mode>...` with one column per device mode (`a`, `b` signal side, `c` pump
/// of the amplifiers; `b` is the beam-splitter pump).
pub fn write_distributions<W: Write>(device: DeviceKind, dists: &[Vec<f64>], mut w: W) -> Result<()> {
    let names: &[&str] = match device {
        DeviceKind::BeamSplitter => &["a", "b"],
        DeviceKind::DegenerateAmp => &["a", "c"],
        DeviceKind::NondegenerateAmp => &["a", "b", "c"],
    };
    let mut header = String::from("n");
    for name in names {
        header.push_str(&format!(",p_{name}"));
    }
    writeln!(w, "{header}")?;
    let rows = dists.iter().map(Vec::len).max().unwrap_or(0);
    for n in 0..rows {
        let mut line = n.to_string();
        for d in dists {
            line.push(',');
            line.push_str(&fmt_sig(d.get(n).copied().unwrap_or(0.0)));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// A grid cell of the Fano-factor scan.
#[derive(Debug, Clone, PartialEq)]
pub struct FanoCell {
    pub device: DeviceKind,
    pub signal: String,
    pub beta: f64,
    pub tau: f64,
    pub overlap: f64,
    pub fano: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FanoReport {
    pub cells: usize,
    /// Cells with overlap ≥ threshold.
    pub accepted: usize,
    /// Overlap ≥ threshold but Fano above the bound.
    pub counterexamples: Vec<FanoCell>,
    /// Fano within the bound but overlap below threshold.
    pub converse_failures: usize,
}

impl FanoReport {
    pub fn holds(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

/// Checks `overlap ≥ threshold ⇒ F ≤ fano_bound` on every grid point of
/// every config, and counts failures of the converse.
pub fn fano_criterion_scan(configs: &[ExperimentConfig], fano_bound: f64) -> Result<FanoReport> {
    let mut report = FanoReport::default();
    for cfg in configs {
        let exp = Experiment::new(cfg.clone())?;
        for r in exp.sweep()? {
            report.cells += 1;
            let within = r.fano <= fano_bound;
            if r.overlap >= cfg.threshold {
                report.accepted += 1;
                if !within {
                    report.counterexamples.push(FanoCell {
                        device: cfg.device,
                        signal: cfg.signal.to_string(),
                        beta: cfg.beta.norm(),
                        tau: r.tau,
                        overlap: r.overlap,
                        fano: r.fano,
                    });
                }
            } else if within {
                report.converse_failures += 1;
            }
        }
    }
    Ok(report)
}
