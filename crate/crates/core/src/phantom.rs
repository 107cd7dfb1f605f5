//! Test conductivities.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::forward::RealField2D;
use crate::geometry::CartesianGrid;
use crate::phase_space::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhantomKind {
    /// Absolute value of the three-Gaussian "peaks" surface.
    Peaks,
    /// Narrow off-centre Gaussian, effectively supported inside the disk.
    GaussBump,
    Zero,
}

impl FromStr for PhantomKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim().to_ascii_lowercase().as_str() {
            "peaks" => Ok(Self::Peaks),
            "gauss_bump" | "bump" => Ok(Self::GaussBump),
            "zero" => Ok(Self::Zero),
            other => Err(Error::Config(format!("unknown phantom '{other}'"))),
        }
    }
}

impl fmt::Display for PhantomKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Peaks => "peaks",
            Self::GaussBump => "gauss_bump",
            Self::Zero => "zero",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phantom {
    pub kind: PhantomKind,
    pub amplitude: f64,
}

pub const BUMP_CENTER: Vec2 = [0.15, -0.1];
pub const BUMP_WIDTH: f64 = 0.12;

impl Phantom {
    pub fn new(kind: PhantomKind, amplitude: f64) -> Self {
        Self { kind, amplitude }
    }

    pub fn peaks() -> Self {
        Self::new(PhantomKind::Peaks, 1.0)
    }

    pub fn sample(&self, grid: CartesianGrid) -> RealField2D {
        RealField2D::from_fn(grid, |x| evaluate_phantom(self, x))
    }
}

pub fn evaluate_phantom(ph: &Phantom, x: Vec2) -> f64 {
    let [x1, x2] = x;
    let base = match ph.kind {
        PhantomKind::Zero => return 0.0,
        PhantomKind::Peaks => (3.0 * (1.0 - x1).powi(2) * (-x1 * x1 - (x2 + 1.0).powi(2)).exp()
            - (2.0 * x1 - 10.0 * x1.powi(3) - 10.0 * x2.powi(5)) * (-x1 * x1 - x2 * x2).exp()
            - (-(x1 + 1.0).powi(2) - x2 * x2).exp() / 3.0)
            .abs(),
        PhantomKind::GaussBump => {
            let d2 = (x1 - BUMP_CENTER[0]).powi(2) + (x2 - BUMP_CENTER[1]).powi(2);
            (-d2 / (2.0 * BUMP_WIDTH * BUMP_WIDTH)).exp()
        }
    };
    ph.amplitude * base
}
