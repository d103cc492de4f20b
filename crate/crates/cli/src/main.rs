use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use paramp::experiments::{
    max_parameter_at, parse_key_values, write_distributions, write_records, Experiment, ExperimentConfig, Output,
    TauStar,
};
use paramp::Error;

const EXIT_TRUNCATION: u8 = 2;
const EXIT_USAGE: u8 = 64;

/// Exact quantum-pump simulation of beam splitters and parametric amplifiers,
/// compared against the classical-pump approximation.
#[derive(Debug, Parser)]
#[command(name = "paramp", version)]
struct Cli {
    /// Device: bs, dpa or npa.
    device: Option<String>,

    /// vacuum | fock:n | coherent:re,im | fock2:n,m (npa only).
    #[arg(long)]
    signal: Option<String>,

    /// Pump amplitude as `re,im` (or a real number).
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<String>,

    #[arg(long)]
    tau_max: Option<String>,

    #[arg(long)]
    tau_steps: Option<String>,

    #[arg(long)]
    threshold: Option<String>,

    #[arg(long)]
    eps_trunc: Option<String>,

    /// `auto` or a charge cutoff.
    #[arg(long)]
    cutoff: Option<String>,

    /// Comma list of overlap, fano, mean, depletion, dist, wigner.
    #[arg(long)]
    emit: Option<String>,

    /// `xmin,xmax,pmin,pmax,npts`.
    #[arg(long, allow_hyphen_values = true)]
    wigner_grid: Option<String>,

    /// Overlap measure: trace or root. Defaults per device.
    #[arg(long)]
    measure: Option<String>,

    /// Time of the dist and wigner snapshots (default: τ*).
    #[arg(long)]
    snapshot_tau: Option<String>,

    /// Output CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Plain `key = value` file; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Cli {
    fn pairs(&self) -> Result<Vec<(String, String)>, Error> {
        let mut pairs = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
                parse_key_values(&text)?
            }
            None => Vec::new(),
        };
        let flags = [
            ("device", &self.device),
            ("signal", &self.signal),
            ("beta", &self.beta),
            ("tau-max", &self.tau_max),
            ("tau-steps", &self.tau_steps),
            ("threshold", &self.threshold),
            ("eps-trunc", &self.eps_trunc),
            ("cutoff", &self.cutoff),
            ("emit", &self.emit),
            ("wigner-grid", &self.wigner_grid),
            ("measure", &self.measure),
            ("snapshot-tau", &self.snapshot_tau),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                pairs.push((key.to_string(), v.clone()));
            }
        }
        Ok(pairs)
    }
}

fn sink(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = path.extension().map(|e| e.to_string_lossy().into_owned()).unwrap_or_else(|| "csv".into());
    path.with_file_name(format!("{stem}_{suffix}.{ext}"))
}

fn run(cli: Cli) -> Result<(), Error> {
    let pairs = cli.pairs()?;
    let config = ExperimentConfig::from_pairs(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())))?;

    let sweep = config.outputs.iter().any(|o| o.in_sweep());
    let dist = config.outputs.contains(&Output::Distribution);
    let wig = config.outputs.contains(&Output::Wigner);
    let groups = [sweep, dist, wig].iter().filter(|&&g| g).count();
    if groups > 1 && cli.out.is_none() {
        return Err(Error::Parse("--out is required when emitting several files".into()));
    }
    // A single output goes to --out itself; otherwise dist and wigner get suffixed siblings.
    let path_for = |suffix: &str| -> Option<PathBuf> {
        cli.out.as_deref().map(|p| if groups == 1 { p.to_path_buf() } else { sibling(p, suffix) })
    };

    let exp = Experiment::new(config)?;
    let cfg = exp.config();
    let tau_star = exp.tau_star()?;
    match tau_star {
        TauStar::Found(t) => eprintln!(
            "{} {} |beta|={}: tau* = {t:.6}, max parameter = {:.6}",
            cfg.device,
            cfg.signal,
            cfg.beta.norm(),
            max_parameter_at(cfg.device, cfg.beta, t)
        ),
        TauStar::Unbounded => eprintln!(
            "{} {} |beta|={}: overlap stays above {} up to tau = {}",
            cfg.device,
            cfg.signal,
            cfg.beta.norm(),
            cfg.threshold,
            cfg.tau_max()
        ),
    }

    if sweep {
        let records = exp.sweep()?;
        let mut w = sink(cli.out.as_deref())?;
        write_records(&records, &mut w)?;
        w.flush()?;
    }
    let snapshot = match (cfg.snapshot_tau, tau_star) {
        (Some(t), _) => t,
        (None, TauStar::Found(t)) => t,
        (None, TauStar::Unbounded) => cfg.tau_max(),
    };
    if dist {
        let mut w = sink(path_for("dist").as_deref())?;
        write_distributions(cfg.device, &exp.distributions(snapshot), &mut w)?;
        w.flush()?;
    }
    if wig {
        let mut w = sink(path_for("wigner").as_deref())?;
        exp.signal_wigner(snapshot)?.write_csv(&mut w)?;
        w.flush()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("paramp: {e}");
            ExitCode::from(match e {
                Error::Truncation { .. } => EXIT_TRUNCATION,
                Error::Parse(_) => EXIT_USAGE,
                _ => 1,
            })
        }
    }
}
