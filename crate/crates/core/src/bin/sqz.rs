use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sqz_core::channel_bounds::channel_bound;
use sqz_core::channels::parse_channel;
use sqz_core::experiments::{emit, run, ExperimentConfig, ExperimentId, Format};
use sqz_core::report::BoundReport;
use sqz_core::sdp::Tolerances;
use sqz_core::state_bounds::{parse_state, state_bound};
use sqz_core::{Error, Result};

#[derive(Parser)]
#[command(name = "sqz", version, about = "Squeezing upper bounds on distillable entanglement and quantum capacity")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate one bound on a bipartite state.
    StateBound {
        /// Constructor (mes:2, isotropic:2,0.9, bilocal:ad:0.1|depol:2,0.2, hs:2,2,3,7, twoway:0.3) or JSON file.
        #[arg(long)]
        state: String,
        /// erev-u | erev-u-hat | erev-npt-hat | scb | mcb | dset | dmap | hashing
        #[arg(long)]
        bound: String,
        /// Subsystem dimensions, overriding those of the input.
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<usize>>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate one bound on a channel.
    ChannelBound {
        /// Constructor (id:2, depol:2,0.1, ad:0.3, pauli:p0,p1,p2,p3, covpauli:p0,p3, mad:3:g10,g20,g21, mixu:seed:probs) or JSON file.
        #[arg(long)]
        channel: String,
        /// qsqz | nocloning | covpauli | conti-adg | conti-deg | hashing | eps-deg | eps-adg
        #[arg(long)]
        bound: String,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a figure dataset.
    Fig {
        /// fig-qubit | fig-qutrit | fig-qudit | fig-mixu | fig-covpauli | fig-random-states | fig-twoway
        experiment: String,
        #[arg(long)]
        seed: Option<u64>,
        /// Grid points over the default parameter range.
        #[arg(long)]
        steps: Option<usize>,
        /// Samples per parameter set (fig-mixu) or per dimension (fig-random-states).
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Defaults to json when the output path ends in .json, csv otherwise.
        #[arg(long)]
        format: Option<String>,
        /// Record per-bound wall-clock time (makes output run-dependent).
        #[arg(long)]
        timing: bool,
        #[arg(long)]
        out: PathBuf,
    },
}

fn write_report(r: &BoundReport, out: Option<&Path>) -> Result<bool> {
    let text = r.to_json()? + "\n";
    match out {
        Some(p) => std::fs::write(p, text).map_err(|source| Error::Io { path: p.display().to_string(), source })?,
        None => print!("{text}"),
    }
    Ok(r.status.is_ok())
}

fn main_inner(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::StateBound { state, bound, dims, tol, out } => {
            let mut rho = parse_state(&state)?;
            if let Some(d) = dims {
                rho = rho.with_dims(d)?;
            }
            let r = state_bound(&bound, &rho, &Tolerances::with_gap_feas(tol))?;
            write_report(&r, out.as_deref())
        }
        Cmd::ChannelBound { channel, bound, tol, out } => {
            let n = parse_channel(&channel)?;
            let r = channel_bound(&bound, &n, &Tolerances::with_gap_feas(tol))?;
            write_report(&r, out.as_deref())
        }
        Cmd::Fig { experiment, seed, steps, samples, tol, format, timing, out } => {
            let id: ExperimentId = experiment.parse()?;
            let mut cfg = ExperimentConfig::new(id).with_tol(Tolerances::with_gap_feas(tol));
            if let Some(s) = seed {
                cfg = cfg.with_seed(s);
            }
            if let Some(n) = steps {
                cfg = cfg.with_steps(n);
            }
            if let Some(n) = samples {
                cfg = cfg.with_samples(n);
            }
            cfg.timing = timing;
            cfg.output = Some(out.clone());
            let format = match format {
                Some(f) => f.parse()?,
                None if out.extension().is_some_and(|e| e == "json") => Format::Json,
                None => Format::Csv,
            };
            let ds = run(&cfg)?;
            emit(&ds, format, &out)?;
            let bad = ds.failures().count();
            if bad > 0 {
                eprintln!("{bad} of {} rows did not reach an optimal or analytic status", ds.rows.len());
            }
            Ok(bad == 0)
        }
    }
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
