//! Fourier-mode recovery from linearised boundary data, and a direct
//! quadrature of the Fourier transform for checking it.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::forward::RealField2D;
use crate::geometry::{BoundarySampling, DiskDomain};
use crate::linearised::LinearisedTrace;
use crate::phase_space::{CEPairTE, Vec2};

/// Estimate of `sigma_hat(-xi)` obtained from the excitation at `xi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveredMode {
    /// Phase point of the CE excitation.
    pub xi: Vec2,
    pub value: Complex64,
    pub omega: f64,
}

impl RecoveredMode {
    /// Frequency at which `value` estimates the transform, i.e. `-xi`.
    pub fn key(&self) -> Vec2 {
        [-self.xi[0], -self.xi[1]]
    }
}

/// `sigma_hat(-xi) ~ (2 pi)^-1 (i omega mu0)^-1 * sum_j w_j t_j E3*(;0)(x_j)`.
pub fn recover_mode(
    trace: &LinearisedTrace,
    pair: &CEPairTE,
    sampling: &BoundarySampling,
    omega: f64,
    mu0: f64,
) -> Result<RecoveredMode> {
    if trace.values.len() != sampling.len() {
        return Err(Error::DimensionMismatch {
            expected: sampling.len(),
            got: trace.values.len(),
        });
    }
    if trace.omega != omega {
        return Err(Error::ParamOutOfRange(format!(
            "trace recorded at omega = {}, recovering at {omega}",
            trace.omega
        )));
    }
    let integral: Complex64 = sampling.integrate(
        trace
            .values
            .iter()
            .zip(&sampling.points)
            .map(|(t, &p)| t * pair.e3_star(p)),
    );
    let value = integral / Complex64::new(0.0, omega * mu0) / (2.0 * PI);
    Ok(RecoveredMode {
        xi: pair.point.xi,
        value,
        omega,
    })
}

/// `(2 pi)^-1 * integral of sigma(x) exp(-i xi.x)` over the disk, by the
/// tensor trapezoid rule restricted to nodes in the closed disk.
pub fn oracle_ft(sigma: &RealField2D, dom: &DiskDomain, xi: Vec2) -> Complex64 {
    let grid = sigma.grid;
    let mut acc = Complex64::default();
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let x = grid.point(i, j);
            if !dom.contains_closed(x) {
                continue;
            }
            let s = sigma.values[grid.index(i, j)];
            if s != 0.0 {
                acc += Complex64::from_polar(s, -(xi[0] * x[0] + xi[1] * x[1]));
            }
        }
    }
    acc * grid.cell_area() / (2.0 * PI)
}
