use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use linmax::bounds::{bound_maxwell, bound_te, write_bounds_csv, StabilityParams};
use linmax::config::ExperimentConfig;
use linmax::experiments::run_frequency_sweep;
use linmax::geometry::CartesianGrid;
use linmax::linearised::{add_noise, synth_linearised_trace};
use linmax::phase_space::{make_ce_pair_te, make_phase_point};
use linmax::reconstruct::{run_algorithm1, ForwardSetup, DOMAIN_RADIUS};
use linmax::recovery::{oracle_ft, recover_mode};
use linmax::Error;

/// Linearised conductivity reconstruction from TE boundary data.
///
/// Every command reads `--config FILE` (flat `key = value` lines) and
/// accepts `--key=value` overrides after it.
#[derive(Debug, Parser)]
#[command(name = "linmax", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample the conductivity on the inversion grid.
    Phantom,
    /// One forward solve with its full and linearised Neumann traces.
    Forward,
    /// Recover a single Fourier mode and compare with direct quadrature.
    Recover,
    /// Full reconstruction at one frequency.
    Reconstruct,
    /// Noise sweep at every configured frequency with slope fits.
    Sweep,
    /// Tabulate the stability bounds.
    Bounds,
}

enum Failure {
    Lib(Error),
    Io(std::io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

type Outcome = std::result::Result<(), Failure>;

/// Splits `--key=value` overrides from the flags clap understands.
fn split_args(args: Vec<String>) -> (Vec<String>, Vec<String>) {
    let mut own = Vec::new();
    let mut overrides = Vec::new();
    for a in args {
        let is_override = a
            .strip_prefix("--")
            .and_then(|b| b.split_once('='))
            .is_some_and(|(k, _)| k != "config" && k != "out");
        if is_override {
            overrides.push(a);
        } else {
            own.push(a);
        }
    }
    (own, overrides)
}

fn create(dir: &Path, name: &str) -> std::io::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn phantom(exp: &ExperimentConfig, out: &Path) -> Outcome {
    let grid = CartesianGrid::square(exp.grid_inverse, DOMAIN_RADIUS)?;
    let mut w = create(out, "phantom.csv")?;
    exp.phantom().sample(grid).write_csv(&mut w, "sigma")?;
    w.flush()?;
    Ok(())
}

fn forward(exp: &ExperimentConfig, out: &Path, recover: bool) -> Outcome {
    let cfg = exp.reconstruction(exp.omega)?;
    let setup = ForwardSetup::for_config(&cfg)?;
    let (op, op0) = setup.operators(&cfg.phantom, cfg.omega, cfg.eps0, cfg.mu0)?;
    let pair = make_ce_pair_te(make_phase_point(exp.xi)?, cfg.wavenumber())?;
    let mut trace = synth_linearised_trace(&op, &op0, &pair, &setup.extractor)?;
    if let Some(spec) = cfg.noise {
        trace = add_noise(&trace, spec, &setup.sampling)?;
    }
    if recover {
        let mode = recover_mode(&trace, &pair, &setup.sampling, cfg.omega, cfg.mu0)?;
        let fine = cfg.phantom.sample(CartesianGrid::square(400, DOMAIN_RADIUS)?);
        let oracle = oracle_ft(&fine, &setup.domain, mode.key());
        let key = mode.key();
        let mut w = create(out, "mode.csv")?;
        writeln!(w, "xi1,xi2,re,im,abs,oracle_re,oracle_im,oracle_abs")?;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            key[0],
            key[1],
            mode.value.re,
            mode.value.im,
            mode.value.norm(),
            oracle.re,
            oracle.im,
            oracle.norm()
        )?;
        w.flush()?;
        println!("mode at {key:?}: {} (quadrature {oracle})", mode.value);
        return Ok(());
    }
    let field = op.solve_dirichlet(|x| pair.e3(x))?;
    let full = setup.extractor.apply(&field, |x| pair.e3(x));
    let mut w = create(out, "field.csv")?;
    field.write_csv(&mut w)?;
    w.flush()?;
    let mut w = create(out, "trace.csv")?;
    full.write_csv(&mut w, &setup.sampling)?;
    w.flush()?;
    let mut w = create(out, "linearised_trace.csv")?;
    trace.write_csv(&mut w, &setup.sampling)?;
    w.flush()?;
    println!(
        "linearised trace: max |value| {}, L2 {}",
        trace.max_abs(),
        trace.l2_norm(&setup.sampling)
    );
    Ok(())
}

fn reconstruct(exp: &ExperimentConfig, out: &Path) -> Outcome {
    let cfg = exp.reconstruction(exp.omega)?;
    let rec = run_algorithm1(&cfg)?;
    let mut w = create(out, "modes.csv")?;
    rec.modes.write_csv(&mut w)?;
    w.flush()?;
    let mut w = create(out, "reconstruction.csv")?;
    rec.field.field.write_csv(&mut w, "sigma_inv")?;
    w.flush()?;
    let mut w = create(out, "metrics.csv")?;
    writeln!(w, "omega,delta,rel_error,max_imag_residue,runtime_s")?;
    let err = rec.rel_error.map_or(String::from("nan"), |e| e.to_string());
    let delta = cfg.noise.map_or(0.0, |n| n.delta);
    writeln!(w, "{},{},{},{},{}", cfg.omega, delta, err, rec.field.imag_residue, rec.runtime_s)?;
    w.flush()?;
    println!("omega {}: relative error {err}, imaginary residue {}", cfg.omega, rec.field.imag_residue);
    Ok(())
}

fn sweep(exp: &ExperimentConfig, out: &Path) -> Outcome {
    let result = run_frequency_sweep(exp)?;
    let mut w = create(out, "sweep.csv")?;
    result.write_csv(&mut w)?;
    w.flush()?;
    let mut w = create(out, "metrics.csv")?;
    result.write_metrics(&mut w)?;
    w.flush()?;
    for s in result.slopes() {
        println!("omega {}: slope {}", s.omega, s.slope);
    }
    Ok(())
}

fn bounds(exp: &ExperimentConfig, out: &Path) -> Outcome {
    let mut te = Vec::new();
    let mut mx = Vec::new();
    for n in 1..=12 {
        for k in [1.0, 2.0, 5.0, 10.0, 15.0, 20.0] {
            let mut p = StabilityParams::disk_defaults(10f64.powi(-n), k);
            p.alpha = exp.alpha;
            p.m1 = exp.m1;
            te.push((p, bound_te(&p, true)?));
            mx.push((p, bound_maxwell(&p)?));
        }
    }
    let mut w = create(out, "bounds_te.csv")?;
    write_bounds_csv(&mut w, &te)?;
    w.flush()?;
    let mut w = create(out, "bounds_maxwell.csv")?;
    write_bounds_csv(&mut w, &mx)?;
    w.flush()?;
    Ok(())
}

fn run(cli: &Cli, overrides: &[String]) -> Outcome {
    let mut exp = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    exp.apply_overrides(overrides)?;
    std::fs::create_dir_all(&cli.out)?;
    match cli.command {
        Command::Phantom => phantom(&exp, &cli.out),
        Command::Forward => forward(&exp, &cli.out, false),
        Command::Recover => forward(&exp, &cli.out, true),
        Command::Reconstruct => reconstruct(&exp, &cli.out),
        Command::Sweep => sweep(&exp, &cli.out),
        Command::Bounds => bounds(&exp, &cli.out),
    }
}

fn main() -> ExitCode {
    let (own, overrides) = split_args(std::env::args().collect());
    let cli = match Cli::try_parse_from(own) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli, &overrides) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            let code = if e.is_solver_error() {
                3
            } else if matches!(
                e,
                Error::Config(_)
                    | Error::ParamOutOfRange(_)
                    | Error::EmptyGrid { .. }
                    | Error::InvalidGrid(_)
                    | Error::ZeroPhaseVector
            ) {
                2
            } else {
                1
            };
            ExitCode::from(code)
        }
    }
}
