use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use qebt::decompose::{decompose_constructive, decompose_numeric_seeded, CqDecomposition};
use qebt::holevo::{trine_ensemble, HolevoEnsemble};
use qebt::io::{parse_channel, parse_ensemble, to_json};
use qebt::polytope::polytope_data;
use qebt::region::{ebt_lens, scan_plane_with_tol, trace_boundary, write_polyline_csv, write_scan_csv, Grid};
use qebt::selftest::{run_selftest, SelftestConfig};
use qebt::{build_cq, build_qc, classify, ensemble_to_transfer, to_canonical, PauliTransferMatrix};
use serde::Serialize;

use crate::args::{Cli, Command, Decompose, HolevoBuild, Region};

const CHANNEL_SCHEMA: &str = "channel JSON: {\"t\":[t1,t2,t3],\"lambda\":[l1,l2,l3]} \
    or {\"matrix\":[[1,0,0,0],[..4],[..4],[..4]]}";
const ENSEMBLE_SCHEMA: &str = "ensemble JSON: {\"items\":[{\"w\":[w1,w2,w3],\"u0\":u0,\"u\":[u1,u2,u3]}, ...]}";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Channel(qebt::Error),
    #[error("{0}")]
    Ensemble(qebt::Error),
    #[error("{0}")]
    Core(#[from] qebt::Error),
    #[error("invalid option: {0}")]
    Usage(String),
    #[error("self-test failed")]
    SelftestFailed,
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Core(e) if e.is_numerical() => 3,
            Self::SelftestFailed => 3,
            _ => 2,
        }
    }

    pub fn help(&self) -> Option<&'static str> {
        match self {
            Self::Channel(_) => Some(CHANNEL_SCHEMA),
            Self::Ensemble(_) => Some(ENSEMBLE_SCHEMA),
            _ => None,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_owned(), source })
}

fn load_channel(path: &Path) -> Result<PauliTransferMatrix> {
    parse_channel(&read(path)?).map_err(CliError::Channel)
}

fn emit<T: Serialize>(value: &T) -> Result<()> {
    let mut out = io::stdout().lock();
    writeln!(out, "{}", to_json(value)).map_err(|source| CliError::Io { path: "<stdout>".into(), source })
}

pub fn run(cli: Cli) -> Result<()> {
    if !(cli.tol.is_finite() && cli.tol >= 0.0) {
        return Err(CliError::Usage(format!("tolerance must be a non-negative number, got {}", cli.tol)));
    }
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let tol = cli.tol;
    match cli.command {
        Command::Classify { channel } => emit(&classify(&load_channel(&channel)?, tol)),
        Command::Canonical { channel } => emit(&to_canonical(&load_channel(&channel)?)),
        Command::Choi { channel } => emit(&ChoiReport::new(&load_channel(&channel)?)),
        Command::HolevoBuild(b) => emit(&holevo_build(&b)?),
        Command::HolevoVerify { ensemble, channel } => {
            let ens = parse_ensemble(&read(&ensemble)?).map_err(CliError::Ensemble)?;
            let ch = load_channel(&channel)?;
            emit(&verify(&ens, &ch)?)
        }
        Command::Decompose(d) => emit(&decompose(&d, cli.seed)?),
        Command::Region(r) => region(&r, cli.seed, tol),
        Command::Selftest { samples } => {
            let report = run_selftest(&SelftestConfig { samples, seed: cli.seed, tol });
            emit(&report)?;
            let status = if report.passed { "PASS" } else { "FAIL" };
            eprintln!(
                "{status}: criteria agree on {}/{} samples, contraction agrees on {}/{}",
                report.ebt_criteria.agreed,
                report.ebt_criteria.compared,
                report.cp_contraction.agreed,
                report.cp_contraction.compared
            );
            if report.passed {
                Ok(())
            } else {
                Err(CliError::SelftestFailed)
            }
        }
    }
}

#[derive(Serialize)]
struct ChoiReport {
    real: [[f64; 4]; 4],
    imag: [[f64; 4]; 4],
    eigenvalues: [f64; 4],
    trace: f64,
}

impl ChoiReport {
    fn new(ch: &PauliTransferMatrix) -> Self {
        let choi = ch.choi();
        let m = choi.matrix();
        Self {
            real: std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)].re)),
            imag: std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)].im)),
            eigenvalues: choi.eigenvalues(),
            trace: choi.trace(),
        }
    }
}

fn holevo_build(b: &HolevoBuild) -> Result<HolevoEnsemble> {
    if let Some(v) = &b.cq {
        return Ok(build_cq([v[0], v[1], v[2]], v[3])?);
    }
    if let Some(v) = &b.qc {
        return Ok(build_qc(v[0], [v[1], v[2], v[3]])?.original_ensemble());
    }
    Ok(trine_ensemble())
}

#[derive(Serialize)]
struct Verification {
    matches: bool,
    distance: f64,
    transfer: [[f64; 4]; 4],
}

fn verify(ens: &HolevoEnsemble, ch: &PauliTransferMatrix) -> Result<Verification> {
    let built = ensemble_to_transfer(ens).map_err(CliError::Ensemble)?;
    Ok(Verification {
        matches: qebt::verify_ensemble(ens, ch),
        distance: built.distance(ch),
        transfer: built.rows(),
    })
}

#[derive(Serialize)]
struct DecompositionReport {
    method: &'static str,
    #[serde(flatten)]
    decomposition: CqDecomposition,
}

fn decompose(d: &Decompose, seed: u64) -> Result<DecompositionReport> {
    let cf = to_canonical(&load_channel(&d.channel)?);
    match decompose_constructive(&cf) {
        Ok(decomposition) => Ok(DecompositionReport { method: "constructive", decomposition }),
        Err(qebt::Error::NotCovered) if !d.constructive_only => {
            let decomposition = decompose_numeric_seeded(&cf, d.candidates, d.fit_tol, seed)?;
            Ok(DecompositionReport { method: "numeric", decomposition })
        }
        Err(e) => Err(e.into()),
    }
}

fn region(r: &Region, seed: u64, tol: f64) -> Result<()> {
    let mut sink: Box<dyn Write> = match &r.output {
        Some(path) => Box::new(io::BufWriter::new(
            fs::File::create(path).map_err(|source| CliError::Io { path: path.clone(), source })?,
        )),
        None => Box::new(io::stdout().lock()),
    };
    if let Some(kind) = r.mode.polytope {
        let pieces = polytope_data(kind);
        let text = if pieces.len() == 1 { to_json(&pieces[0]) } else { to_json(&pieces) };
        let path = r.output.clone().unwrap_or_else(|| "<stdout>".into());
        return writeln!(sink, "{text}").map_err(|source| CliError::Io { path, source });
    }
    let t: [f64; 3] = r
        .t
        .as_deref()
        .and_then(|t| t.try_into().ok())
        .ok_or_else(|| CliError::Usage("--t takes three comma-separated numbers".into()))?;
    let l3 = r.l3.expect("clap requires --l3 without --polytope");
    if r.mode.scan {
        let samples = scan_plane_with_tol(t, l3, Grid::new(r.resolution), seed, tol)?;
        write_scan_csv(&samples, sink)?;
    } else {
        let points = if r.mode.lens { ebt_lens(t, l3, r.rays)? } else { trace_boundary(t, l3, r.rays)? };
        write_polyline_csv(&points, sink)?;
    }
    Ok(())
}
