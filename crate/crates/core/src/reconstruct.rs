//! Linearised reconstruction: sweep the phase grid, recover one Fourier mode per CE
//! excitation, and synthesize the conductivity on a coarse grid.

use std::io::Write;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forward::{assemble, HelmholtzOperator, NeumannExtractor, RealField2D};
use crate::geometry::{boundary_sampling, BoundarySampling, CartesianGrid, DiskDomain, Discretization};
use crate::linearised::{add_noise, synth_linearised_traces, LinearisedTrace, NoiseSpec};
use crate::phantom::Phantom;
use crate::phase_space::{make_ce_pair_te, make_phase_grid, CEPairTE, PhaseGrid};
use crate::recovery::{recover_mode, RecoveredMode};

/// Radius of the disk on which every experiment runs.
pub const DOMAIN_RADIUS: f64 = 0.7;
/// Half-width of the forward rectangle; leaves a margin around the disk.
pub const FORWARD_HALF_WIDTH: f64 = 0.75;

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionConfig {
    pub omega: f64,
    pub eps0: f64,
    pub mu0: f64,
    /// Truncation radius `K`; `None` selects `2 k`.
    pub truncation: Option<f64>,
    pub kappa_min: f64,
    pub kappa_step: f64,
    pub n_angles: usize,
    pub grid_forward: usize,
    pub grid_inverse: usize,
    pub n_boundary: usize,
    pub noise: Option<NoiseSpec>,
    pub phantom: Phantom,
}

impl ReconstructionConfig {
    pub fn new(omega: f64) -> Self {
        Self {
            omega,
            eps0: 1.0,
            mu0: 1.0,
            truncation: None,
            kappa_min: 0.2,
            kappa_step: 0.2,
            n_angles: 19,
            grid_forward: 200,
            grid_inverse: 90,
            n_boundary: 720,
            noise: None,
            phantom: Phantom::peaks(),
        }
    }

    pub fn wavenumber(&self) -> f64 {
        self.omega * (self.eps0 * self.mu0).sqrt()
    }

    pub fn cap(&self) -> f64 {
        self.truncation.unwrap_or(2.0 * self.wavenumber())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::ParamOutOfRange(format!("{name} = {v}")))
            }
        };
        positive("omega", self.omega)?;
        positive("eps0", self.eps0)?;
        positive("mu0", self.mu0)?;
        positive("K", self.cap())?;
        positive("kappa_min", self.kappa_min)?;
        positive("kappa_step", self.kappa_step)?;
        if self.n_angles == 0 || self.n_boundary < 3 || self.grid_inverse < 3 {
            return Err(Error::ParamOutOfRange(format!(
                "n_angles={}, n_boundary={}, grid_inverse={}",
                self.n_angles, self.n_boundary, self.grid_inverse
            )));
        }
        if self.phantom.amplitude < 0.0 {
            return Err(Error::ParamOutOfRange(format!("amplitude {}", self.phantom.amplitude)));
        }
        Ok(())
    }

    pub fn phase_grid(&self) -> Result<PhaseGrid> {
        make_phase_grid(self.kappa_min, self.kappa_step, self.cap(), self.n_angles)
    }

    pub fn inverse_grid(&self) -> Result<CartesianGrid> {
        CartesianGrid::square(self.grid_inverse, DOMAIN_RADIUS)
    }
}

/// Fine forward discretization with its boundary sampling and trace extractor.
#[derive(Debug)]
pub struct ForwardSetup {
    pub domain: DiskDomain,
    pub disc: Arc<Discretization>,
    pub sampling: BoundarySampling,
    pub extractor: NeumannExtractor,
}

impl ForwardSetup {
    pub fn new(n_grid: usize, n_boundary: usize) -> Result<Self> {
        let domain = DiskDomain::new([0.0, 0.0], DOMAIN_RADIUS)?;
        let disc = Arc::new(Discretization::new(
            CartesianGrid::square(n_grid, FORWARD_HALF_WIDTH)?,
            domain,
        )?);
        let sampling = boundary_sampling(&domain, n_boundary)?;
        let extractor = NeumannExtractor::new(&disc, &sampling)?;
        Ok(Self {
            domain,
            disc,
            sampling,
            extractor,
        })
    }

    pub fn for_config(cfg: &ReconstructionConfig) -> Result<Self> {
        Self::new(cfg.grid_forward, cfg.n_boundary)
    }

    /// Perturbed and background operators at `omega`.
    pub fn operators(
        &self,
        phantom: &Phantom,
        omega: f64,
        eps0: f64,
        mu0: f64,
    ) -> Result<(HelmholtzOperator, HelmholtzOperator)> {
        let sigma = phantom.sample(self.disc.grid);
        let op = assemble(self.disc.clone(), omega, eps0, mu0, &sigma)?;
        let op0 = assemble(self.disc.clone(), omega, eps0, mu0, &RealField2D::zeros(self.disc.grid))?;
        Ok((op, op0))
    }
}

/// Noise-free linearised traces for every point of a phase grid at one
/// frequency. Noisy variants and smaller truncations are derived from it
/// without further solves.
#[derive(Debug, Clone)]
pub struct TraceBank {
    pub grid: PhaseGrid,
    pub omega: f64,
    pub mu0: f64,
    pub pairs: Vec<CEPairTE>,
    pub traces: Vec<LinearisedTrace>,
}

const BANK_CHUNK: usize = 64;

impl TraceBank {
    pub fn generate(
        setup: &ForwardSetup,
        op: &HelmholtzOperator,
        op0: &HelmholtzOperator,
        grid: PhaseGrid,
    ) -> Result<Self> {
        let k = op.k_squared().sqrt();
        let pairs = grid
            .indices()
            .map(|(l, s)| make_ce_pair_te(grid.point(l, s), k))
            .collect::<Result<Vec<_>>>()?;
        let n = grid.n_angles();
        let mut traces = Vec::with_capacity(pairs.len());
        for (c, chunk) in pairs.chunks(BANK_CHUNK).enumerate() {
            match synth_linearised_traces(op, op0, chunk, &setup.extractor) {
                Ok(t) => traces.extend(t),
                Err(e) => {
                    // Locate the first failing excitation for the report.
                    for (i, pair) in chunk.iter().enumerate() {
                        if let Err(source) =
                            synth_linearised_traces(op, op0, std::slice::from_ref(pair), &setup.extractor)
                        {
                            let flat = c * BANK_CHUNK + i;
                            return Err(Error::ModeFailed {
                                ell: flat / n,
                                s: flat % n,
                                source: Box::new(source),
                            });
                        }
                    }
                    return Err(e);
                }
            }
        }
        Ok(Self {
            grid,
            omega: op.omega,
            mu0: op.mu0,
            pairs,
            traces,
        })
    }

    /// Recovered modes for lengths up to `cap`, with independent noise per
    /// trace when `noise` is given.
    pub fn modes(&self, sampling: &BoundarySampling, cap: f64, noise: Option<NoiseSpec>) -> Result<ModeSet> {
        let grid = self.grid.truncated(cap)?;
        let n = grid.n_angles();
        let modes = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let wrap = |source: Error| Error::ModeFailed {
                    ell: idx / n,
                    s: idx % n,
                    source: Box::new(source),
                };
                let trace = match noise {
                    Some(spec) => add_noise(&self.traces[idx], spec.for_index(idx as u64), sampling).map_err(wrap)?,
                    None => self.traces[idx].clone(),
                };
                recover_mode(&trace, &self.pairs[idx], sampling, self.omega, self.mu0).map_err(wrap)
            })
            .collect::<Result<Vec<_>>>()?;
        ModeSet::new(grid, modes)
    }
}

/// Recovered modes in phase-grid order, one per `(ell, s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet {
    pub grid: PhaseGrid,
    modes: Vec<RecoveredMode>,
}

impl ModeSet {
    pub fn new(grid: PhaseGrid, modes: Vec<RecoveredMode>) -> Result<Self> {
        if modes.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: modes.len(),
            });
        }
        Ok(Self { grid, modes })
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn get(&self, ell: usize, s: usize) -> &RecoveredMode {
        &self.modes[ell * self.grid.n_angles() + s]
    }

    pub fn modes(&self) -> &[RecoveredMode] {
        &self.modes
    }

    /// Rows `ell,s,xi1,xi2,re,im,abs`, where `xi` is the frequency the
    /// value estimates.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "ell,s,xi1,xi2,re,im,abs")?;
        for (idx, m) in self.modes.iter().enumerate() {
            let n = self.grid.n_angles();
            let key = m.key();
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                idx / n,
                idx % n,
                key[0],
                key[1],
                m.value.re,
                m.value.im,
                m.value.norm()
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructedField {
    pub field: RealField2D,
    /// Largest discarded imaginary part.
    pub max_imag: f64,
    /// `max_imag` relative to the largest real part.
    pub imag_residue: f64,
}

/// Weighted Fourier sum `Re sum w sigma_hat(key) exp(i key.x)` on `grid`.
/// Each node accumulates in `(ell, s)` order.
pub fn synthesize(modes: &ModeSet, grid: CartesianGrid) -> ReconstructedField {
    let terms: Vec<(f64, f64, Complex64)> = modes
        .grid
        .indices()
        .zip(&modes.modes)
        .map(|((l, s), m)| {
            let key = m.key();
            (key[0], key[1], m.value * modes.grid.weight(l, s))
        })
        .collect();
    let sums: Vec<Complex64> = (0..grid.len())
        .into_par_iter()
        .map(|node| {
            let x = grid.node_point(node);
            terms
                .iter()
                .fold(Complex64::default(), |acc, &(k1, k2, c)| {
                    acc + c * Complex64::cis(k1 * x[0] + k2 * x[1])
                })
        })
        .collect();
    let max_imag = sums.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let max_real = sums.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
    ReconstructedField {
        field: RealField2D {
            grid,
            values: sums.iter().map(|z| z.re).collect(),
        },
        max_imag,
        imag_residue: if max_real > 0.0 { max_imag / max_real } else { 0.0 },
    }
}

/// `||rec - truth|| / ||truth||` over nodes in the closed disk.
pub fn relative_error(rec: &RealField2D, truth: &RealField2D, dom: &DiskDomain) -> Result<f64> {
    if rec.grid != truth.grid {
        return Err(Error::DimensionMismatch {
            expected: truth.grid.len(),
            got: rec.grid.len(),
        });
    }
    let (mut num, mut den) = (0.0, 0.0);
    for (node, (&r, &t)) in rec.values.iter().zip(&truth.values).enumerate() {
        if dom.contains_closed(truth.grid.node_point(node)) {
            num += (r - t) * (r - t);
            den += t * t;
        }
    }
    if den == 0.0 {
        return Err(Error::ZeroTruth);
    }
    Ok((num / den).sqrt())
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub modes: ModeSet,
    pub field: ReconstructedField,
    pub truth: RealField2D,
    /// `None` when the true conductivity vanishes.
    pub rel_error: Option<f64>,
    pub runtime_s: f64,
}

/// Full reconstruction run from scratch.
pub fn run_algorithm1(cfg: &ReconstructionConfig) -> Result<Reconstruction> {
    cfg.validate()?;
    let start = Instant::now();
    let setup = ForwardSetup::for_config(cfg)?;
    let (op, op0) = setup.operators(&cfg.phantom, cfg.omega, cfg.eps0, cfg.mu0)?;
    let bank = TraceBank::generate(&setup, &op, &op0, cfg.phase_grid()?)?;
    let mut out = reconstruct_from_bank(cfg, &setup, &bank)?;
    out.runtime_s = start.elapsed().as_secs_f64();
    Ok(out)
}

/// Reconstruction with the forward solves already done.
pub fn reconstruct_from_bank(
    cfg: &ReconstructionConfig,
    setup: &ForwardSetup,
    bank: &TraceBank,
) -> Result<Reconstruction> {
    let start = Instant::now();
    let modes = bank.modes(&setup.sampling, cfg.cap(), cfg.noise)?;
    let inv = cfg.inverse_grid()?;
    let field = synthesize(&modes, inv);
    let truth = cfg.phantom.sample(inv);
    let rel_error = match relative_error(&field.field, &truth, &setup.domain) {
        Ok(e) => Some(e),
        Err(Error::ZeroTruth) => None,
        Err(e) => return Err(e),
    };
    Ok(Reconstruction {
        modes,
        field,
        truth,
        rel_error,
        runtime_s: start.elapsed().as_secs_f64(),
    })
}
