//! Arbitrary-precision reference evaluation of the stability bounds.
#![allow(dead_code)]

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use linmax::bounds::StabilityParams;

type F = FBig<HalfEven, 2>;

const PREC: usize = 320;

fn big(x: f64) -> F {
    F::try_from(x).unwrap().with_precision(PREC).value()
}

fn int(n: i64) -> F {
    big(n as f64)
}

/// `atan(1/n)` by its Taylor series.
fn atan_inv(n: i64) -> F {
    let x = int(1) / int(n);
    let x2 = x.clone() * x.clone();
    let mut term = x;
    let mut sum = int(0);
    for k in 0..200 {
        let t = term.clone() / int(2 * k + 1);
        sum = if k % 2 == 0 { sum + t } else { sum - t };
        term = term * x2.clone();
    }
    sum
}

/// Machin's formula.
fn pi() -> F {
    int(16) * atan_inv(5) - int(4) * atan_inv(239)
}

fn to_f64(x: &F) -> f64 {
    x.to_f64().value()
}

#[derive(Debug, Clone, Copy)]
pub struct OracleTerms {
    pub chi: bool,
    pub terms: [f64; 3],
    pub total: f64,
}

fn regime_log(p: &StabilityParams, e: &F, chi: bool) -> F {
    let m2 = big(p.m1) * big(p.m1);
    let k = big(p.k);
    let d = big(p.d);
    if chi {
        m2 / (int(1) + e.clone() * e.clone() / (d.clone() * d) + int(4) * k.clone() * k)
    } else {
        let two_a = big(2.0 * p.alpha);
        m2 / (int(1) + int(2) * e.powf(&two_a) + int(2) * k.powf(&two_a))
    }
}

fn finish(chi: bool, t: [F; 3]) -> OracleTerms {
    let total = t[0].clone() + t[1].clone() + t[2].clone();
    OracleTerms {
        chi,
        terms: [to_f64(&t[0]), to_f64(&t[1]), to_f64(&t[2])],
        total: to_f64(&total),
    }
}

/// Three-dimensional bound; `ball` swaps in `pi D^3/6` and `pi D^2/4`.
pub fn maxwell(p: &StabilityParams, ball: bool) -> OracleTerms {
    let pi = pi();
    let eps = big(p.eps);
    let e = -eps.ln();
    let k = big(p.k);
    let d = big(p.d);
    let chi = k <= e;
    let (vol, vol2) = if ball {
        (
            pi.clone() * d.powi(3.into()) / int(6),
            pi.clone() * d.powi(2.into()) / int(4),
        )
    } else {
        (big(p.vol), big(p.vol2))
    };
    let one_e4 = (int(1) + e.clone()).powi(4.into());
    let lip = int(4) / (int(3) * pi.clone() * pi.clone()) * vol.clone() * vol;
    let t1 = if chi {
        lip * one_e4.clone() * e.powi(3.into()) * eps.clone() * eps.clone()
    } else {
        lip * (int(1) + k.clone()).powi(4.into()) * k.powf(&big(3.0 * p.alpha)) * eps.clone() * eps.clone()
    };
    let t2 = if chi {
        let root = (int(1) + int(4) * d.clone() * d.clone()).sqrt();
        vol2.clone() * vol2 / (int(4) * pi.clone() * pi) / d * root * one_e4 * e.clone() * eps
    } else {
        int(0)
    };
    let t3 = regime_log(p, &e, chi);
    finish(chi, [t1, t2, t3])
}

/// TE bound with trace constant `c2`.
pub fn te(p: &StabilityParams, c2: f64) -> OracleTerms {
    let pi = pi();
    let eps = big(p.eps);
    let e = -eps.ln();
    let k = big(p.k);
    let d = big(p.d);
    let chi = k <= e;
    let c4 = big(c2).powi(4.into());
    let vol2 = big(p.vol2);
    let one_e4 = (int(1) + e.clone()).powi(4.into());
    let pre = c4.clone() / pi.clone() * vol2.clone() * vol2;
    let t1 = if chi {
        pre * one_e4.clone() * e.clone() * e.clone() * eps.clone() * eps.clone()
    } else {
        pre * (int(1) + k.clone()).powi(4.into()) * k.powf(&big(2.0 * p.alpha)) * eps.clone() * eps.clone()
    };
    let t2 = if chi {
        c4 / (int(4) * pi) * d.clone() * d * one_e4 * eps
    } else {
        int(0)
    };
    let t3 = regime_log(p, &e, chi);
    finish(chi, [t1, t2, t3])
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    if a == b {
        return true;
    }
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

/// 100-point `(eps, k, alpha)` lattice spanning both regimes.
pub fn lattice() -> Vec<StabilityParams> {
    let mut out = Vec::new();
    for eps in [0.5, 0.1, 1e-3, 1e-6, 1e-12] {
        for k in [1.0, 2.5, 7.0, 15.0, 30.0] {
            for alpha in [0.1, 0.5, 0.9, 1.0] {
                let mut p = StabilityParams::disk_defaults(eps, k);
                p.alpha = alpha;
                p.m1 = 1.7;
                p.c2 = 0.8;
                out.push(p);
            }
        }
    }
    out
}
