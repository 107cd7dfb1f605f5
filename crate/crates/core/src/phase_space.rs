//! Phase-space points, complex-exponential (CE) solutions and the polar
//! sampling of frequency space used by the reconstruction sweep.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Vec2 = [f64; 2];
pub type Vec3 = [f64; 3];
pub type CVec2 = [Complex64; 2];
pub type CVec3 = [Complex64; 3];

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// A nonzero frequency vector together with its orthonormal frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint2D {
    pub xi: Vec2,
    pub kappa: f64,
    /// `xi / |xi|`
    pub e1: Vec2,
    /// `e1` rotated by +pi/2.
    pub e2: Vec2,
}

pub fn make_phase_point(xi: Vec2) -> Result<PhasePoint2D> {
    let kappa = xi[0].hypot(xi[1]);
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::ZeroPhaseVector);
    }
    let e1 = [xi[0] / kappa, xi[1] / kappa];
    let e2 = [-e1[1], e1[0]];
    Ok(PhasePoint2D { xi, kappa, e1, e2 })
}

/// `sqrt(k^2 - kappa^2 / 4)` with the branch `sqrt(-y) = i sqrt(y)` for `y > 0`.
///
/// The case split keeps the value exactly zero at `kappa = 2k`.
pub fn ce_root(k: f64, kappa: f64) -> Complex64 {
    let d = k * k - 0.25 * kappa * kappa;
    if d >= 0.0 {
        Complex64::new(d.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-d).sqrt())
    }
}

/// Pair of complex wave vectors for the transverse-electric CE solutions
/// `E3(;0) = exp(i zeta.x)` and `E3*(;0) = -exp(i zeta_star.x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CEPairTE {
    pub point: PhasePoint2D,
    pub zeta: CVec2,
    pub zeta_star: CVec2,
    pub k: f64,
}

pub fn make_ce_pair_te(p: PhasePoint2D, k: f64) -> Result<CEPairTE> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::ParamOutOfRange(format!("wave number k = {k}")));
    }
    let half = 0.5 * p.kappa;
    let s = ce_root(k, p.kappa);
    let mut zeta = [Complex64::default(); 2];
    let mut zeta_star = [Complex64::default(); 2];
    for d in 0..2 {
        let along = Complex64::new(half * p.e1[d], 0.0);
        zeta[d] = along + s * p.e2[d];
        zeta_star[d] = along - s * p.e2[d];
    }
    Ok(CEPairTE {
        point: p,
        zeta,
        zeta_star,
        k,
    })
}

/// Complex bilinear dot product (no conjugation).
pub fn cdot<const N: usize>(a: &[Complex64; N], b: &[Complex64; N]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn cdot_real(z: &CVec2, x: Vec2) -> Complex64 {
    z[0] * x[0] + z[1] * x[1]
}

/// Values and gradients of both TE CE solutions at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TeFields {
    pub e3: Complex64,
    pub e3_star: Complex64,
    pub grad_e3: CVec2,
    pub grad_e3_star: CVec2,
}

impl CEPairTE {
    /// `exp(i zeta.x)`
    pub fn e3(&self, x: Vec2) -> Complex64 {
        (I * cdot_real(&self.zeta, x)).exp()
    }

    /// `-exp(i zeta_star.x)`
    pub fn e3_star(&self, x: Vec2) -> Complex64 {
        -(I * cdot_real(&self.zeta_star, x)).exp()
    }
}

pub fn eval_te_fields(pair: &CEPairTE, x: Vec2) -> TeFields {
    let e3 = pair.e3(x);
    let e3_star = pair.e3_star(x);
    TeFields {
        e3,
        e3_star,
        grad_e3: [I * pair.zeta[0] * e3, I * pair.zeta[1] * e3],
        grad_e3_star: [I * pair.zeta_star[0] * e3_star, I * pair.zeta_star[1] * e3_star],
    }
}

/// Full 3D CE parameter set: wave vectors and electric/magnetic polarizations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CEPair3D {
    pub zeta: CVec3,
    pub zeta_star: CVec3,
    pub a: CVec3,
    pub b: CVec3,
    pub a_star: CVec3,
    pub b_star: CVec3,
    /// Orthonormal frame `[e1, e2, e3]` with `e1 = xi / |xi|`.
    pub frame: [Vec3; 3],
    pub k: f64,
    pub omega: f64,
    pub eps0: f64,
    pub mu0: f64,
}

fn cross3(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn ccross(a: &CVec3, b: &CVec3) -> CVec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Orthonormal frame whose first vector is `xi / |xi|`. The second vector is
/// the normalized projection of the canonical axis least aligned with `e1`
/// (lowest index on ties).
pub fn frame_3d(xi: Vec3) -> Result<[Vec3; 3]> {
    let norm = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::ZeroPhaseVector);
    }
    let e1 = [xi[0] / norm, xi[1] / norm, xi[2] / norm];
    let mut axis = 0;
    for d in 1..3 {
        if e1[d].abs() < e1[axis].abs() {
            axis = d;
        }
    }
    let mut e2 = [0.0; 3];
    e2[axis] = 1.0;
    let proj = e1[axis];
    for d in 0..3 {
        e2[d] -= proj * e1[d];
    }
    let n2 = (e2[0] * e2[0] + e2[1] * e2[1] + e2[2] * e2[2]).sqrt();
    for v in &mut e2 {
        *v /= n2;
    }
    let e3 = cross3(e1, e2);
    Ok([e1, e2, e3])
}

pub fn make_ce_pair_3d(xi: Vec3, omega: f64, eps0: f64, mu0: f64) -> Result<CEPair3D> {
    for (name, v) in [("omega", omega), ("eps0", eps0), ("mu0", mu0)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::ParamOutOfRange(format!("{name} = {v}")));
        }
    }
    let frame = frame_3d(xi)?;
    let [e1, e2, e3] = frame;
    let kappa = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
    let k = omega * (eps0 * mu0).sqrt();
    let half = 0.5 * kappa;
    let s = ce_root(k, kappa);
    let wm = omega * mu0;

    let c = |x: f64| Complex64::new(x, 0.0);
    let mut out = CEPair3D {
        zeta: [Complex64::default(); 3],
        zeta_star: [Complex64::default(); 3],
        a: [Complex64::default(); 3],
        b: [Complex64::default(); 3],
        a_star: [Complex64::default(); 3],
        b_star: [Complex64::default(); 3],
        frame,
        k,
        omega,
        eps0,
        mu0,
    };
    for d in 0..3 {
        out.zeta[d] = c(half * e1[d]) + s * e2[d];
        out.zeta_star[d] = c(half * e1[d]) - s * e2[d];
        out.a[d] = c(e3[d]);
        out.a_star[d] = c(-e3[d]);
        out.b[d] = -(c(half * e2[d]) - s * e1[d]) / wm;
        out.b_star[d] = (c(half * e2[d]) + s * e1[d]) / wm;
    }
    Ok(out)
}

impl CEPair3D {
    /// Largest relative residual over the four curl relations and both
    /// dispersion relations.
    pub fn max_relative_residual(&self) -> f64 {
        let wm = self.omega * self.mu0;
        let we = self.omega * self.eps0;
        let rel = |lhs: CVec3, rhs: CVec3| -> f64 {
            let scale = lhs
                .iter()
                .chain(rhs.iter())
                .map(|z| z.norm())
                .fold(0.0f64, f64::max)
                .max(f64::MIN_POSITIVE);
            lhs.iter()
                .zip(rhs.iter())
                .map(|(a, b)| (a - b).norm() / scale)
                .fold(0.0, f64::max)
        };
        let scale = |v: &CVec3, f: f64| v.map(|z| z * f);
        let k2 = self.omega * self.omega * self.eps0 * self.mu0;
        let disp = |z: &CVec3| (cdot(z, z) - k2).norm() / k2;
        [
            rel(ccross(&self.zeta, &self.a), scale(&self.b, wm)),
            rel(ccross(&self.zeta, &self.b), scale(&self.a, -we)),
            rel(ccross(&self.zeta_star, &self.a_star), scale(&self.b_star, wm)),
            rel(ccross(&self.zeta_star, &self.b_star), scale(&self.a_star, -we)),
            disp(&self.zeta),
            disp(&self.zeta_star),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Polar sampling of frequency space: `M` lengths times `N` directions.
///
/// Point `(ell, s)` is `kappa_ell * (cos theta_s, sin theta_s)` with
/// `theta_s = 2 pi s / N`. Its weight `kappa_ell * dkappa * (2 pi / N) / (2 pi)`
/// folds the `(2 pi)^-1` of the 2D inverse transform into the polar rule.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseGrid {
    pub lengths: Vec<f64>,
    pub angles: Vec<f64>,
    pub directions: Vec<(Vec2, Vec2)>,
    weights: Vec<f64>,
    pub kappa_step: f64,
    pub cap: f64,
}

pub fn make_phase_grid(kappa_min: f64, kappa_step: f64, cap: f64, n_angles: usize) -> Result<PhaseGrid> {
    if !(kappa_min > 0.0) || !(kappa_step > 0.0) || !cap.is_finite() || n_angles == 0 {
        return Err(Error::ParamOutOfRange(format!(
            "phase grid kappa_min={kappa_min}, step={kappa_step}, K={cap}, N={n_angles}"
        )));
    }
    if cap < kappa_min {
        return Err(Error::EmptyGrid { kappa_min, cap });
    }
    // Slack absorbs representation error in kappa_min + m * step.
    let count = ((cap - kappa_min) / kappa_step + 1e-9).floor() as usize + 1;
    let lengths: Vec<f64> = (0..count).map(|m| kappa_min + m as f64 * kappa_step).collect();
    let angles: Vec<f64> = (0..n_angles)
        .map(|s| 2.0 * PI * s as f64 / n_angles as f64)
        .collect();
    let directions = angles
        .iter()
        .map(|&t| {
            let (sn, cs) = t.sin_cos();
            ([cs, sn], [-sn, cs])
        })
        .collect();
    let dtheta = 2.0 * PI / n_angles as f64;
    let weights = lengths
        .iter()
        .flat_map(|&kappa| {
            std::iter::repeat_n(kappa * kappa_step * dtheta / (2.0 * PI), n_angles)
        })
        .collect();
    Ok(PhaseGrid {
        lengths,
        angles,
        directions,
        weights,
        kappa_step,
        cap,
    })
}

impl PhaseGrid {
    pub fn n_lengths(&self) -> usize {
        self.lengths.len()
    }

    pub fn n_angles(&self) -> usize {
        self.angles.len()
    }

    pub fn len(&self) -> usize {
        self.lengths.len() * self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn weight(&self, ell: usize, s: usize) -> f64 {
        self.weights[ell * self.n_angles() + s]
    }

    pub fn xi(&self, ell: usize, s: usize) -> Vec2 {
        let (e1, _) = self.directions[s];
        [self.lengths[ell] * e1[0], self.lengths[ell] * e1[1]]
    }

    pub fn point(&self, ell: usize, s: usize) -> PhasePoint2D {
        let (e1, e2) = self.directions[s];
        let kappa = self.lengths[ell];
        PhasePoint2D {
            xi: [kappa * e1[0], kappa * e1[1]],
            kappa,
            e1,
            e2,
        }
    }

    /// `(ell, s)` pairs in sweep order: lengths outer, angles inner.
    pub fn indices(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n_angles();
        (0..self.n_lengths()).flat_map(move |l| (0..n).map(move |s| (l, s)))
    }

    /// Grid restricted to lengths `<= cap`, keeping directions and weights.
    pub fn truncated(&self, cap: f64) -> Result<PhaseGrid> {
        let keep = self
            .lengths
            .iter()
            .take_while(|&&k| k <= cap + 1e-9 * self.kappa_step)
            .count();
        if keep == 0 {
            return Err(Error::EmptyGrid {
                kappa_min: self.lengths.first().copied().unwrap_or(f64::NAN),
                cap,
            });
        }
        Ok(PhaseGrid {
            lengths: self.lengths[..keep].to_vec(),
            angles: self.angles.clone(),
            directions: self.directions.clone(),
            weights: self.weights[..keep * self.n_angles()].to_vec(),
            kappa_step: self.kappa_step,
            cap,
        })
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "ell,s,kappa,theta,xi1,xi2,weight")?;
        for (l, s) in self.indices() {
            let xi = self.xi(l, s);
            writeln!(
                w,
                "{l},{s},{},{},{},{},{}",
                self.lengths[l],
                self.angles[s],
                xi[0],
                xi[1],
                self.weight(l, s)
            )?;
        }
        Ok(())
    }
}
