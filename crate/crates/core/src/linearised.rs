//! Linearised Neumann data `d_nu E3 - d_nu E3(;0)` and the relative noise model.

use std::io::Write;

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forward::{trace_l2_norm, write_trace_csv, HelmholtzOperator, NeumannExtractor, NeumannTrace};
use crate::geometry::BoundarySampling;
use crate::phase_space::{CEPairTE, PhasePoint2D};

/// Difference of the perturbed and unperturbed Neumann traces for one CE
/// excitation, optionally carrying measurement noise.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearisedTrace {
    pub point: PhasePoint2D,
    pub omega: f64,
    pub values: Vec<Complex64>,
    /// `L^2` norm of the full perturbed trace `d_nu E3`; the noise reference.
    pub full_norm: f64,
    pub noisy: bool,
    pub delta: f64,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub delta: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(delta: f64, seed: u64) -> Result<Self> {
        if !(delta >= 0.0) || !delta.is_finite() {
            return Err(Error::ParamOutOfRange(format!("noise level {delta}")));
        }
        Ok(Self { delta, seed })
    }

    /// Independent stream for the `index`-th trace of a sweep.
    pub fn for_index(&self, index: u64) -> Self {
        // splitmix64 finalizer over (seed, index)
        let mut z = self
            .seed
            .wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        Self {
            delta: self.delta,
            seed: z ^ (z >> 31),
        }
    }
}

fn check_pair(op: &HelmholtzOperator, op0: &HelmholtzOperator) -> Result<()> {
    if op.disc != op0.disc {
        return Err(Error::DimensionMismatch {
            expected: op0.n_unknowns(),
            got: op.n_unknowns(),
        });
    }
    if op.omega != op0.omega || op.eps0 != op0.eps0 || op.mu0 != op0.mu0 {
        return Err(Error::ParamOutOfRange(format!(
            "operators disagree on omega: {} vs {}",
            op.omega, op0.omega
        )));
    }
    Ok(())
}

pub fn synth_linearised_trace(
    op: &HelmholtzOperator,
    op0: &HelmholtzOperator,
    pair: &CEPairTE,
    extractor: &NeumannExtractor,
) -> Result<LinearisedTrace> {
    Ok(synth_linearised_traces(op, op0, std::slice::from_ref(pair), extractor)?
        .pop()
        .expect("one trace"))
}

/// Batched form of [`synth_linearised_trace`]. Columns are distributed over
/// threads in fixed-size chunks, so output is independent of the thread count.
pub fn synth_linearised_traces(
    op: &HelmholtzOperator,
    op0: &HelmholtzOperator,
    pairs: &[CEPairTE],
    extractor: &NeumannExtractor,
) -> Result<Vec<LinearisedTrace>> {
    check_pair(op, op0)?;
    // Both operators share the same cut geometry, hence the same data map.
    op.factorization()?;
    op0.factorization()?;
    let sampling = &extractor.sampling;
    let chunks: Vec<Result<Vec<LinearisedTrace>>> = pairs
        .par_chunks(16)
        .map(|chunk| {
            let rhs: Vec<Vec<Complex64>> = chunk.iter().map(|p| op.rhs(|x| p.e3(x))).collect();
            let full = op.solve_rhs(&rhs)?;
            let base = op0.solve_rhs(&rhs)?;
            let nodes = op.disc.classes.unknown_nodes();
            let grid_len = op.disc.grid.len();
            let scatter = |x: &[Complex64]| {
                let mut v = vec![Complex64::default(); grid_len];
                for (&n, &xi) in nodes.iter().zip(x) {
                    v[n] = xi;
                }
                v
            };
            Ok(chunk
                .iter()
                .zip(full.iter().zip(&base))
                .map(|(pair, (xf, x0))| {
                    let g: Vec<Complex64> = sampling.points.iter().map(|&p| pair.e3(p)).collect();
                    let tf = extractor.apply_values(&scatter(xf), &g);
                    let t0 = extractor.apply_values(&scatter(x0), &g);
                    LinearisedTrace {
                        point: pair.point,
                        omega: op.omega,
                        values: tf.iter().zip(&t0).map(|(a, b)| a - b).collect(),
                        full_norm: trace_l2_norm(&tf, sampling),
                        noisy: false,
                        delta: 0.0,
                        seed: None,
                    }
                })
                .collect())
        })
        .collect();
    let mut out = Vec::with_capacity(pairs.len());
    for c in chunks {
        out.extend(c?);
    }
    Ok(out)
}

/// Neumann trace of the exact first-order field `E3(;1)`, solving
/// `A0 E3(;1) = i omega mu0 sigma E3(;0)` with zero Dirichlet data.
pub fn first_order_trace(
    op: &HelmholtzOperator,
    op0: &HelmholtzOperator,
    pair: &CEPairTE,
    extractor: &NeumannExtractor,
) -> Result<NeumannTrace> {
    check_pair(op, op0)?;
    let u0 = op0.solve_dirichlet(|x| pair.e3(x))?;
    let u1 = op0.first_order_response(op, &u0)?;
    Ok(extractor.apply(&u1, |_| Complex64::default()))
}

pub fn add_noise(
    trace: &LinearisedTrace,
    spec: NoiseSpec,
    sampling: &BoundarySampling,
) -> Result<LinearisedTrace> {
    if trace.noisy {
        return Err(Error::DoubleNoise);
    }
    if trace.values.len() != sampling.len() {
        return Err(Error::DimensionMismatch {
            expected: sampling.len(),
            got: trace.values.len(),
        });
    }
    if spec.delta == 0.0 {
        return Ok(trace.clone());
    }
    let mut rng = StdRng::seed_from_u64(spec.seed);
    let noise: Vec<Complex64> = (0..trace.values.len())
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im)
        })
        .collect();
    let raw = trace_l2_norm(&noise, sampling);
    let scale = if raw > 0.0 { spec.delta * trace.full_norm / raw } else { 0.0 };
    Ok(LinearisedTrace {
        values: trace
            .values
            .iter()
            .zip(&noise)
            .map(|(v, n)| v + n * scale)
            .collect(),
        noisy: true,
        delta: spec.delta,
        seed: Some(spec.seed),
        ..trace.clone()
    })
}

impl LinearisedTrace {
    pub fn l2_norm(&self, sampling: &BoundarySampling) -> f64 {
        trace_l2_norm(&self.values, sampling)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, w: W, sampling: &BoundarySampling) -> std::io::Result<()> {
        let header = self
            .seed
            .filter(|_| self.noisy)
            .map(|s| format!("delta={} seed={s}", self.delta));
        write_trace_csv(w, &self.values, sampling, header.as_deref())
    }
}
