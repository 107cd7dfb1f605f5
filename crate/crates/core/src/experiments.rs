//! Frequency and noise sweeps with log-log slope fitting.

use std::io::Write;
use std::time::Instant;

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::linearised::NoiseSpec;
use crate::reconstruct::{reconstruct_from_bank, ForwardSetup, ReconstructionConfig, TraceBank};

/// Accepted distance from a reference slope.
pub const SLOPE_WINDOW: f64 = 0.10;

/// Published noise slopes at the three demonstration frequencies.
pub fn reference_slope(omega: f64) -> Option<f64> {
    [(5.0, 0.00), (10.0, 0.08), (15.0, 0.20)]
        .iter()
        .find(|(w, _)| *w == omega)
        .map(|&(_, s)| s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub omega: f64,
    pub delta: f64,
    pub seed: u64,
    pub rel_error: f64,
    pub max_imag_residue: f64,
    pub runtime_s: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeReport {
    pub omega: f64,
    pub slope: f64,
    pub reference: Option<f64>,
}

impl SlopeReport {
    pub fn within_window(&self) -> Option<bool> {
        self.reference.map(|r| (self.slope - r).abs() <= SLOPE_WINDOW)
    }
}

impl SweepResult {
    pub fn sort(&mut self) {
        self.rows.sort_by(|a, b| {
            a.omega
                .total_cmp(&b.omega)
                .then(a.delta.total_cmp(&b.delta))
                .then(a.seed.cmp(&b.seed))
        });
    }

    pub fn extend(&mut self, other: SweepResult) {
        self.rows.extend(other.rows);
        self.sort();
    }

    pub fn omegas(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.rows.iter().map(|r| r.omega).collect();
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Slopes for every frequency that has enough distinct noise levels.
    pub fn slopes(&self) -> Vec<SlopeReport> {
        self.omegas()
            .into_iter()
            .filter_map(|omega| {
                fit_slope(self, omega).ok().map(|slope| SlopeReport {
                    omega,
                    slope,
                    reference: reference_slope(omega),
                })
            })
            .collect()
    }

    /// One row per `(omega, delta, seed)`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "omega,delta,seed,rel_error,max_imag_residue,runtime_s")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                r.omega, r.delta, r.seed, r.rel_error, r.max_imag_residue, r.runtime_s
            )?;
        }
        Ok(())
    }

    /// Seed-averaged rows plus the fitted slopes as trailing comments.
    pub fn write_metrics<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "omega,delta,rel_error,max_imag_residue,runtime_s")?;
        let mut i = 0;
        while i < self.rows.len() {
            let head = self.rows[i];
            let group: Vec<&SweepRow> = self.rows[i..]
                .iter()
                .take_while(|r| r.omega == head.omega && r.delta == head.delta)
                .collect();
            let n = group.len() as f64;
            writeln!(
                w,
                "{},{},{},{},{}",
                head.omega,
                head.delta,
                group.iter().map(|r| r.rel_error).sum::<f64>() / n,
                group.iter().map(|r| r.max_imag_residue).fold(0.0, f64::max),
                group.iter().map(|r| r.runtime_s).sum::<f64>()
            )?;
            i += group.len();
        }
        for s in self.slopes() {
            write!(w, "# slope omega={} value={}", s.omega, s.slope)?;
            if let (Some(r), Some(ok)) = (s.reference, s.within_window()) {
                write!(w, " reference={r} window={SLOPE_WINDOW} within={ok}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Least-squares slope of `y` on `x`.
pub fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Slope of `log rel_error` against `log delta` at `omega`, using the
/// seed-averaged log error at each positive noise level.
pub fn fit_slope(sweep: &SweepResult, omega: f64) -> Result<f64> {
    let mut levels: Vec<(f64, Vec<f64>)> = Vec::new();
    for r in sweep.rows.iter().filter(|r| r.omega == omega && r.delta > 0.0) {
        if !(r.rel_error > 0.0) {
            return Err(Error::InsufficientData(format!(
                "nonpositive error at omega={omega}, delta={}",
                r.delta
            )));
        }
        match levels.iter_mut().find(|(d, _)| *d == r.delta) {
            Some((_, errs)) => errs.push(r.rel_error.ln()),
            None => levels.push((r.delta, vec![r.rel_error.ln()])),
        }
    }
    if levels.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} distinct positive noise levels at omega={omega}, need 3",
            levels.len()
        )));
    }
    let points: Vec<(f64, f64)> = levels
        .iter()
        .map(|(d, errs)| (d.ln(), errs.iter().sum::<f64>() / errs.len() as f64))
        .collect();
    Ok(least_squares_slope(&points))
}

/// Noisy reconstructions from one bank for every `(delta, seed)`.
pub fn run_noise_sweep(
    cfg: &ReconstructionConfig,
    setup: &ForwardSetup,
    bank: &TraceBank,
    deltas: &[f64],
    seeds: &[u64],
) -> Result<SweepResult> {
    let mut out = SweepResult::default();
    for &delta in deltas {
        for &seed in seeds {
            let start = Instant::now();
            let mut c = cfg.clone();
            c.noise = if delta == 0.0 { None } else { Some(NoiseSpec::new(delta, seed)?) };
            let rec = reconstruct_from_bank(&c, setup, bank)?;
            out.rows.push(SweepRow {
                omega: cfg.omega,
                delta,
                seed,
                rel_error: rec.rel_error.ok_or(Error::ZeroTruth)?,
                max_imag_residue: rec.field.imag_residue,
                runtime_s: start.elapsed().as_secs_f64(),
            });
        }
    }
    out.sort();
    Ok(out)
}

/// Noise sweep at every configured frequency, sharing one forward setup.
pub fn run_frequency_sweep(exp: &ExperimentConfig) -> Result<SweepResult> {
    let base = exp.reconstruction(exp.omega)?;
    let setup = ForwardSetup::for_config(&base)?;
    let mut out = SweepResult::default();
    for &omega in &exp.omegas {
        let cfg = exp.reconstruction(omega)?;
        let (op, op0) = setup.operators(&cfg.phantom, omega, cfg.eps0, cfg.mu0)?;
        let bank = TraceBank::generate(&setup, &op, &op0, cfg.phase_grid()?)?;
        out.extend(run_noise_sweep(&cfg, &setup, &bank, &exp.deltas, &exp.seeds)?);
    }
    Ok(out)
}
