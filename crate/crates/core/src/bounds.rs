//! Increasing-stability bounds on `||sigma||^2` for the linearised problem:
//! the 3D Maxwell estimate and its TE counterpart, split into a Lipschitz
//! term, a Hoelder term and a logarithmic term.

use std::f64::consts::PI;
use std::io::Write;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityParams {
    /// Operator-norm surrogate, `0 < eps < 1`.
    pub eps: f64,
    /// Wave number, `k >= 1`.
    pub k: f64,
    pub alpha: f64,
    /// A-priori `H^1` bound on the conductivity.
    pub m1: f64,
    /// Diameter.
    pub d: f64,
    /// 3-volume (Maxwell bound only).
    pub vol: f64,
    /// Largest planar projection area, or the area in 2D.
    pub vol2: f64,
    /// Trace constant (TE bound only).
    pub c2: f64,
}

impl StabilityParams {
    /// Disk of radius 0.7 and its ball counterpart, `alpha = 1`, `M1 = 1`.
    pub fn disk_defaults(eps: f64, k: f64) -> Self {
        let r: f64 = 0.7;
        Self {
            eps,
            k,
            alpha: 1.0,
            m1: 1.0,
            d: 2.0 * r,
            vol: 4.0 / 3.0 * PI * r.powi(3),
            vol2: PI * r * r,
            c2: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |what: &str| Err(Error::ParamOutOfRange(format!("{what}: {self:?}")));
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return fail("eps must lie in (0, 1)");
        }
        if !(self.k >= 1.0 && self.k.is_finite()) {
            return fail("k must be >= 1");
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return fail("alpha must lie in (0, 1]");
        }
        for (name, v) in [("D", self.d), ("Vol", self.vol), ("Vol2", self.vol2)] {
            if !(v > 0.0 && v.is_finite()) {
                return fail(name);
            }
        }
        if !(self.m1 >= 0.0 && self.m1.is_finite()) || !(self.c2 >= 0.0 && self.c2.is_finite()) {
            return fail("M1 and C2 must be finite and nonnegative");
        }
        Ok(())
    }

    pub fn e_log(&self) -> f64 {
        -self.eps.ln()
    }

    pub fn chi(&self) -> bool {
        self.k <= self.e_log()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundBreakdown {
    pub e_log: f64,
    pub chi: bool,
    pub term_lipschitz: f64,
    pub term_holder: f64,
    pub term_log: f64,
    pub total: f64,
}

impl BoundBreakdown {
    fn new(e_log: f64, chi: bool, terms: [f64; 3]) -> Self {
        Self {
            e_log,
            chi,
            term_lipschitz: terms[0],
            term_holder: terms[1],
            term_log: terms[2],
            total: neumaier_sum(&terms),
        }
    }
}

/// Product of positive factors. Falls back to a log-domain sum when the
/// running product leaves the normal range.
fn product(factors: &[f64]) -> f64 {
    if factors.contains(&0.0) {
        return 0.0;
    }
    let direct: f64 = factors.iter().product();
    if direct.is_normal() {
        return direct;
    }
    factors.iter().map(|f| f.ln()).sum::<f64>().exp()
}

fn neumaier_sum(xs: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for &x in xs {
        let t = sum + x;
        c += if sum.abs() >= x.abs() { (sum - t) + x } else { (x - t) + sum };
        sum = t;
    }
    sum + c
}

fn term_log(p: &StabilityParams, e: f64, chi: bool) -> f64 {
    let m2 = p.m1 * p.m1;
    if chi {
        m2 / (1.0 + e * e / (p.d * p.d) + 4.0 * p.k * p.k)
    } else {
        m2 / (1.0 + 2.0 * e.powf(2.0 * p.alpha) + 2.0 * p.k.powf(2.0 * p.alpha))
    }
}

fn maxwell_terms(p: &StabilityParams, lip: &[f64], hol: &[f64]) -> Result<BoundBreakdown> {
    p.validate()?;
    let e = p.e_log();
    let chi = p.chi();
    let regime = if chi {
        [(1.0 + e).powi(4), e.powi(3)]
    } else {
        [(1.0 + p.k).powi(4), p.k.powf(3.0 * p.alpha)]
    };
    let t1 = product(&[lip, &regime, &[p.eps, p.eps]].concat());
    let t2 = if chi {
        product(&[hol, &[(1.0 + e).powi(4), e, p.eps]].concat())
    } else {
        0.0
    };
    Ok(BoundBreakdown::new(e, chi, [t1, t2, term_log(p, e, chi)]))
}

/// Three-dimensional estimate with the actual volume and projection area.
pub fn bound_maxwell(p: &StabilityParams) -> Result<BoundBreakdown> {
    let lip = [4.0 / (3.0 * PI * PI), p.vol, p.vol];
    let hol = [p.vol2, p.vol2, (1.0 + 4.0 * p.d * p.d).sqrt() / (4.0 * PI * PI * p.d)];
    maxwell_terms(p, &lip, &hol)
}

/// [`bound_maxwell`] with volume and projection area replaced by their
/// ball bounds `pi D^3 / 6` and `pi D^2 / 4`.
pub fn bound_maxwell_ball(p: &StabilityParams) -> Result<BoundBreakdown> {
    let lip = [p.d.powi(6) / 27.0];
    let hol = [p.d.powi(3) / 64.0 * (1.0 + 4.0 * p.d * p.d).sqrt()];
    maxwell_terms(p, &lip, &hol)
}

/// TE estimate; `use_unit_trace` fixes `C2 = 1`.
pub fn bound_te(p: &StabilityParams, use_unit_trace: bool) -> Result<BoundBreakdown> {
    p.validate()?;
    let c4 = if use_unit_trace { 1.0 } else { p.c2.powi(4) };
    let e = p.e_log();
    let chi = p.chi();
    let t1 = if chi {
        product(&[c4 / PI, p.vol2, p.vol2, (1.0 + e).powi(4), e * e, p.eps, p.eps])
    } else {
        product(&[c4 / PI, p.vol2, p.vol2, (1.0 + p.k).powi(4), p.k.powf(2.0 * p.alpha), p.eps, p.eps])
    };
    let t2 = if chi {
        product(&[c4 / (4.0 * PI), p.d, p.d, (1.0 + e).powi(4), p.eps])
    } else {
        0.0
    };
    Ok(BoundBreakdown::new(e, chi, [t1, t2, term_log(p, e, chi)]))
}

/// Rows `eps,k,alpha,chi,term1,term2,term3,total`.
pub fn write_bounds_csv<W: Write>(
    mut w: W,
    rows: &[(StabilityParams, BoundBreakdown)],
) -> std::io::Result<()> {
    writeln!(w, "eps,k,alpha,chi,term1,term2,term3,total")?;
    for (p, b) in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            p.eps,
            p.k,
            p.alpha,
            u8::from(b.chi),
            b.term_lipschitz,
            b.term_holder,
            b.term_log,
            b.total
        )?;
    }
    Ok(())
}
