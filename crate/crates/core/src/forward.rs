//! Embedded-boundary finite differences for the interior Dirichlet problem
//!
//! ```text
//! -Lap E3 = (omega^2 eps0 mu0 + i omega mu0 sigma) E3   in the disk,
//!       E3 = g                                           on the circle,
//! ```
//!
//! plus Neumann-trace extraction and the in-plane magnetic fields.
//!
//! Nodes next to the circle use the Shortley-Weller unequal-arm stencil with
//! the Dirichlet value imposed at the exact grid-line/circle intersection.
//! The sparse LU factorization is computed lazily once per operator and then
//! shared by every right-hand side.

use std::io::Write;
use std::sync::{Arc, Once, OnceLock};

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Par};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{BoundarySampling, CartesianGrid, Discretization};
use crate::phase_space::Vec2;

/// Relative residual accepted from the direct solve.
pub const SOLVE_TOLERANCE: f64 = 1e-10;
/// Arms shorter than this fraction of `h` are treated as degenerate cuts.
pub const MIN_ARM_FRACTION: f64 = 1e-6;
/// Condition indicator above which the operator is reported as resonant.
pub const RESONANCE_INDICATOR: f64 = 1e13;

const SOLVE_BATCH: usize = 32;

static SEQUENTIAL_FAER: Once = Once::new();

fn sequential_faer() {
    // Parallelism is applied across right-hand-side batches instead; keeping
    // faer sequential makes every column bit-reproducible.
    SEQUENTIAL_FAER.call_once(|| faer::set_global_parallelism(Par::Seq));
}

/// Real scalar field sampled on every node of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField2D {
    pub grid: CartesianGrid,
    pub values: Vec<f64>,
}

impl RealField2D {
    pub fn zeros(grid: CartesianGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn(grid: CartesianGrid, f: impl Fn(Vec2) -> f64) -> Self {
        let values = (0..grid.len()).map(|n| f(grid.node_point(n))).collect();
        Self { grid, values }
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v * t).collect(),
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W, column: &str) -> std::io::Result<()> {
        writeln!(w, "i,j,x1,x2,{column}")?;
        for j in 0..self.grid.ny {
            for i in 0..self.grid.nx {
                let x = self.grid.point(i, j);
                writeln!(w, "{i},{j},{},{},{}", x[0], x[1], self.values[self.grid.index(i, j)])?;
            }
        }
        Ok(())
    }
}

/// Complex field on the unknown (interior + irregular) nodes of a
/// discretization; exterior entries are held at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField2D {
    pub disc: Arc<Discretization>,
    pub values: Vec<Complex64>,
}

impl ComplexField2D {
    pub fn zeros(disc: Arc<Discretization>) -> Self {
        let n = disc.grid.len();
        Self {
            disc,
            values: vec![Complex64::default(); n],
        }
    }

    /// Samples `f` on the unknown nodes.
    pub fn from_fn(disc: Arc<Discretization>, f: impl Fn(Vec2) -> Complex64) -> Self {
        let mut out = Self::zeros(disc);
        for &node in out.disc.classes.unknown_nodes() {
            out.values[node] = f(out.disc.grid.node_point(node));
        }
        out
    }

    fn from_unknowns(disc: Arc<Discretization>, x: impl Iterator<Item = Complex64>) -> Self {
        let mut out = Self::zeros(disc);
        for (&node, v) in out.disc.classes.unknown_nodes().iter().zip(x) {
            out.values[node] = v;
        }
        out
    }

    pub fn grid(&self) -> &CartesianGrid {
        &self.disc.grid
    }

    pub fn is_defined(&self, node: usize) -> bool {
        self.disc.classes.is_unknown(node)
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.values[self.disc.grid.index(i, j)]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Discrete `L^2` norm over the unknown nodes.
    pub fn l2_norm(&self) -> f64 {
        let a = self.disc.grid.cell_area();
        self.disc
            .classes
            .unknown_nodes()
            .iter()
            .map(|&n| self.values[n].norm_sqr())
            .sum::<f64>()
            .mul_add(a, 0.0)
            .sqrt()
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            disc: self.disc.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "i,j,x1,x2,re,im")?;
        let grid = &self.disc.grid;
        for &node in self.disc.classes.unknown_nodes() {
            let (i, j) = grid.ij(node);
            let x = grid.point(i, j);
            let v = self.values[node];
            writeln!(w, "{i},{j},{},{},{},{}", x[0], x[1], v.re, v.im)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct BoundaryTerm {
    row: usize,
    coef: f64,
    point: Vec2,
}

/// Assembled Helmholtz operator `-Lap_h - (omega^2 eps0 mu0 + i omega mu0 sigma)`
/// on the unknowns of a discretization.
pub struct HelmholtzOperator {
    pub disc: Arc<Discretization>,
    pub omega: f64,
    pub eps0: f64,
    pub mu0: f64,
    /// Conductivity at each unknown, in row order.
    pub sigma: Vec<f64>,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<Complex64>,
    boundary_terms: Vec<BoundaryTerm>,
    lu: OnceLock<std::result::Result<Lu<usize, Complex64>, Error>>,
}

impl std::fmt::Debug for HelmholtzOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HelmholtzOperator")
            .field("omega", &self.omega)
            .field("unknowns", &self.n_unknowns())
            .field("nnz", &self.vals.len())
            .field("factorized", &self.lu.get().is_some())
            .finish()
    }
}

pub fn assemble(
    disc: Arc<Discretization>,
    omega: f64,
    eps0: f64,
    mu0: f64,
    sigma: &RealField2D,
) -> Result<HelmholtzOperator> {
    if !(omega > 0.0) || !(eps0 > 0.0) || !(mu0 > 0.0) {
        return Err(Error::ParamOutOfRange(format!(
            "omega={omega}, eps0={eps0}, mu0={mu0}"
        )));
    }
    let grid = disc.grid;
    if sigma.grid != grid {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            got: sigma.values.len(),
        });
    }
    let classes = &disc.classes;
    let dom = disc.domain;
    let k2 = omega * omega * eps0 * mu0;

    let n = classes.n_unknowns();
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::with_capacity(5 * n);
    let mut vals = Vec::with_capacity(5 * n);
    let mut boundary_terms = Vec::new();
    let mut sig = Vec::with_capacity(n);
    row_ptr.push(0);

    for (row, &node) in classes.unknown_nodes().iter().enumerate() {
        let (i, j) = grid.ij(node);
        let p = grid.point(i, j);
        let s = sigma.values[node];
        if !(s >= 0.0) || !s.is_finite() {
            return Err(Error::ParamOutOfRange(format!("sigma = {s} at node ({i}, {j})")));
        }
        sig.push(s);

        // (neighbour node, step, unit direction) for the four arms: +x, -x, +y, -y.
        let arms = [
            (grid.index(i + 1, j), grid.hx, [1.0, 0.0]),
            (grid.index(i - 1, j), grid.hx, [-1.0, 0.0]),
            (grid.index(i, j + 1), grid.hy, [0.0, 1.0]),
            (grid.index(i, j - 1), grid.hy, [0.0, -1.0]),
        ];
        let mut lengths = [0.0; 4];
        for (a, &(nb, h, dir)) in arms.iter().enumerate() {
            lengths[a] = if classes.is_unknown(nb) {
                h
            } else {
                let t = dom.axis_intersection(p, dir).min(h);
                if t < MIN_ARM_FRACTION * h {
                    return Err(Error::AssemblyFailure { i, j, theta: t / h });
                }
                t
            };
        }

        let mut diag = Complex64::new(-k2, -omega * mu0 * s);
        let mut entries: Vec<(usize, Complex64)> = Vec::with_capacity(5);
        for axis in 0..2 {
            let (lp, lm) = (lengths[2 * axis], lengths[2 * axis + 1]);
            for (a, this, other) in [(2 * axis, lp, lm), (2 * axis + 1, lm, lp)] {
                let coef = 2.0 / (this * (this + other));
                diag += coef;
                let (nb, _, dir) = arms[a];
                match classes.unknown(nb) {
                    Some(col) => entries.push((col, Complex64::new(-coef, 0.0))),
                    None => boundary_terms.push(BoundaryTerm {
                        row,
                        coef,
                        point: [p[0] + this * dir[0], p[1] + this * dir[1]],
                    }),
                }
            }
        }
        entries.push((row, diag));
        entries.sort_by_key(|e| e.0);
        for (c, v) in entries {
            col_idx.push(c);
            vals.push(v);
        }
        row_ptr.push(col_idx.len());
    }

    Ok(HelmholtzOperator {
        disc,
        omega,
        eps0,
        mu0,
        sigma: sig,
        row_ptr,
        col_idx,
        vals,
        boundary_terms,
        lu: OnceLock::new(),
    })
}

impl HelmholtzOperator {
    pub fn n_unknowns(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn k_squared(&self) -> f64 {
        self.omega * self.omega * self.eps0 * self.mu0
    }

    /// Number of grid-line/circle intersections carrying Dirichlet data.
    pub fn n_boundary_terms(&self) -> usize {
        self.boundary_terms.len()
    }

    /// `y = A x` over the unknowns.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.n_unknowns())
            .map(|r| {
                (self.row_ptr[r]..self.row_ptr[r + 1])
                    .map(|e| self.vals[e] * x[self.col_idx[e]])
                    .sum()
            })
            .collect()
    }

    /// Applies the grid operator to a full field, moving the Dirichlet values
    /// `g` to the left-hand side. Returns the residual `A u - b(g)` per unknown.
    pub fn residual(&self, field: &ComplexField2D, g: impl Fn(Vec2) -> Complex64) -> Vec<Complex64> {
        let x: Vec<Complex64> = self
            .disc
            .classes
            .unknown_nodes()
            .iter()
            .map(|&n| field.values[n])
            .collect();
        let mut r = self.apply(&x);
        for (ri, bi) in r.iter_mut().zip(self.rhs(g)) {
            *ri -= bi;
        }
        r
    }

    fn inf_norm(&self) -> f64 {
        (0..self.n_unknowns())
            .map(|r| {
                (self.row_ptr[r]..self.row_ptr[r + 1])
                    .map(|e| self.vals[e].norm())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Right-hand side generated by Dirichlet data `g`.
    pub fn rhs(&self, g: impl Fn(Vec2) -> Complex64) -> Vec<Complex64> {
        let mut b = vec![Complex64::default(); self.n_unknowns()];
        for t in &self.boundary_terms {
            b[t.row] += g(t.point) * t.coef;
        }
        b
    }

    /// Sparse LU of the operator, computed on first use.
    pub fn factorization(&self) -> Result<&Lu<usize, Complex64>> {
        self.lu
            .get_or_init(|| self.factorize())
            .as_ref()
            .map_err(Clone::clone)
    }

    fn factorize(&self) -> std::result::Result<Lu<usize, Complex64>, Error> {
        sequential_faer();
        let n = self.n_unknowns();
        let mut triplets = Vec::with_capacity(self.vals.len());
        for r in 0..n {
            for e in self.row_ptr[r]..self.row_ptr[r + 1] {
                triplets.push(Triplet::new(r, self.col_idx[e], self.vals[e]));
            }
        }
        let mat = SparseColMat::<usize, Complex64>::try_new_from_triplets(n, n, &triplets)
            .map_err(|e| Error::InvalidGrid(format!("sparse assembly: {e:?}")))?;
        let lu = mat
            .sp_lu()
            .map_err(|_| Error::NearResonance { indicator: f64::INFINITY })?;

        // Cheap lower bound on the condition number from one probe solve.
        let mut probe = Mat::<Complex64>::from_fn(n, 1, |i, _| {
            Complex64::new(1.0, if i % 2 == 0 { 0.5 } else { -0.5 })
        });
        let probe_norm = probe.col(0).iter().map(|z| z.norm()).fold(0.0, f64::max);
        lu.solve_in_place(probe.as_mut());
        let x_norm = probe.col(0).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let indicator = self.inf_norm() * x_norm / probe_norm;
        if !indicator.is_finite() || indicator > RESONANCE_INDICATOR {
            return Err(Error::NearResonance { indicator });
        }
        Ok(lu)
    }

    /// Solves for a batch of right-hand sides; each column gets one step of
    /// iterative refinement if the first residual misses the tolerance.
    pub fn solve_rhs(&self, rhs: &[Vec<Complex64>]) -> Result<Vec<Vec<Complex64>>> {
        let lu = self.factorization()?;
        let n = self.n_unknowns();
        let mut out = Vec::with_capacity(rhs.len());
        for chunk in rhs.chunks(SOLVE_BATCH) {
            let mut x = Mat::<Complex64>::from_fn(n, chunk.len(), |i, c| chunk[c][i]);
            lu.solve_in_place(x.as_mut());
            for (c, b) in chunk.iter().enumerate() {
                let mut col: Vec<Complex64> = x.col(c).iter().copied().collect();
                self.check_and_refine(lu, b, &mut col)?;
                out.push(col);
            }
        }
        Ok(out)
    }

    fn relative_residual(&self, b: &[Complex64], x: &[Complex64]) -> (Vec<Complex64>, f64) {
        let ax = self.apply(x);
        let r: Vec<Complex64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let bn = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let rn = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let rel = if bn == 0.0 {
            if rn == 0.0 { 0.0 } else { f64::INFINITY }
        } else {
            rn / bn
        };
        (r, rel)
    }

    fn check_and_refine(
        &self,
        lu: &Lu<usize, Complex64>,
        b: &[Complex64],
        x: &mut [Complex64],
    ) -> Result<()> {
        let (r, rel) = self.relative_residual(b, x);
        if rel.is_finite() && rel <= SOLVE_TOLERANCE {
            return Ok(());
        }
        let n = x.len();
        let mut d = Mat::<Complex64>::from_fn(n, 1, |i, _| r[i]);
        lu.solve_in_place(d.as_mut());
        for (xi, di) in x.iter_mut().zip(d.col(0).iter()) {
            *xi += di;
        }
        let (_, rel) = self.relative_residual(b, x);
        if !rel.is_finite() || rel > SOLVE_TOLERANCE {
            return Err(Error::NearResonance { indicator: rel });
        }
        Ok(())
    }

    /// Solves the Dirichlet problem with boundary data `g`.
    pub fn solve_dirichlet(&self, g: impl Fn(Vec2) -> Complex64) -> Result<ComplexField2D> {
        let b = self.rhs(g);
        let x = self.solve_rhs(std::slice::from_ref(&b))?.pop().expect("one column");
        Ok(ComplexField2D::from_unknowns(self.disc.clone(), x.into_iter()))
    }

    /// Solves with a source term: `A u = f` on the unknowns with zero Dirichlet data.
    pub fn solve_source(&self, f: &ComplexField2D) -> Result<ComplexField2D> {
        let b: Vec<Complex64> = self
            .disc
            .classes
            .unknown_nodes()
            .iter()
            .map(|&n| f.values[n])
            .collect();
        let x = self.solve_rhs(std::slice::from_ref(&b))?.pop().expect("one column");
        Ok(ComplexField2D::from_unknowns(self.disc.clone(), x.into_iter()))
    }

    /// Solves many Dirichlet problems; results match sequential single solves.
    pub fn solve_dirichlet_many<G>(&self, gs: &[G]) -> Result<Vec<ComplexField2D>>
    where
        G: Fn(Vec2) -> Complex64,
    {
        let rhs: Vec<Vec<Complex64>> = gs.iter().map(|g| self.rhs(g)).collect();
        Ok(self
            .solve_rhs(&rhs)?
            .into_iter()
            .map(|x| ComplexField2D::from_unknowns(self.disc.clone(), x.into_iter()))
            .collect())
    }

    /// First-order response to the conductivity of `perturbed`: solves
    /// `A0 u1 = i omega mu0 sigma u0` with zero boundary data, where `self`
    /// is the unperturbed operator and `u0` its discrete solution.
    pub fn first_order_response(
        &self,
        perturbed: &HelmholtzOperator,
        u0: &ComplexField2D,
    ) -> Result<ComplexField2D> {
        let mut f = ComplexField2D::zeros(self.disc.clone());
        let wm = self.omega * self.mu0;
        for (row, &node) in self.disc.classes.unknown_nodes().iter().enumerate() {
            let s = perturbed.sigma[row] - self.sigma[row];
            f.values[node] = Complex64::new(0.0, wm * s) * u0.values[node];
        }
        self.solve_source(&f)
    }
}

/// Sampled values of `d E3 / d nu` on the circle.
#[derive(Debug, Clone, PartialEq)]
pub struct NeumannTrace {
    pub values: Vec<Complex64>,
}

impl NeumannTrace {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Discrete `L^2` norm over the boundary.
    pub fn l2_norm(&self, sampling: &BoundarySampling) -> f64 {
        trace_l2_norm(&self.values, sampling)
    }

    pub fn write_csv<W: Write>(&self, w: W, sampling: &BoundarySampling) -> std::io::Result<()> {
        write_trace_csv(w, &self.values, sampling, None)
    }
}

pub fn trace_l2_norm(values: &[Complex64], sampling: &BoundarySampling) -> f64 {
    values
        .iter()
        .zip(&sampling.arc_weights)
        .map(|(v, w)| v.norm_sqr() * w)
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn write_trace_csv<W: Write>(
    mut w: W,
    values: &[Complex64],
    sampling: &BoundarySampling,
    header: Option<&str>,
) -> std::io::Result<()> {
    if let Some(h) = header {
        writeln!(w, "# {h}")?;
    }
    writeln!(w, "j,theta,re,im")?;
    for (j, (v, t)) in values.iter().zip(&sampling.angles).enumerate() {
        writeln!(w, "{j},{t},{},{}", v.re, v.im)?;
    }
    Ok(())
}

/// Biquadratic interpolation weights for the two inward points of every
/// boundary sample, precomputed once per (discretization, sampling).
///
/// The normal derivative is `(3 u0 - 4 u1 + u2) / (2 h)` with `u0` the
/// Dirichlet value on the circle and `u1`, `u2` interpolated at distances
/// `h`, `2h` along the inward normal.
#[derive(Debug, Clone)]
pub struct NeumannExtractor {
    pub sampling: BoundarySampling,
    step: f64,
    stencils: Vec<[[(usize, f64); 9]; 2]>,
}

fn lagrange3(t: f64) -> [f64; 3] {
    [
        0.5 * (t - 1.0) * (t - 2.0),
        -t * (t - 2.0),
        0.5 * t * (t - 1.0),
    ]
}

impl NeumannExtractor {
    pub fn new(disc: &Discretization, sampling: &BoundarySampling) -> Result<Self> {
        let grid = &disc.grid;
        let step = grid.h_max();
        let mut offsets: Vec<(isize, isize)> = (-2..=2)
            .flat_map(|a| (-2..=2).map(move |b| (a, b)))
            .collect();
        offsets.sort_by_key(|&(a, b)| (a * a + b * b, a, b));

        let mut stencils = Vec::with_capacity(sampling.len());
        for (sample, (p, nu)) in sampling.points.iter().zip(&sampling.normals).enumerate() {
            let mut pair = [[(0usize, 0.0f64); 9]; 2];
            for (m, dist) in [step, 2.0 * step].into_iter().enumerate() {
                let q = [p[0] - dist * nu[0], p[1] - dist * nu[1]];
                pair[m] = Self::stencil(disc, q, &offsets)
                    .ok_or(Error::InterpolationOutOfDomain { sample })?;
            }
            stencils.push(pair);
        }
        Ok(Self {
            sampling: sampling.clone(),
            step,
            stencils,
        })
    }

    fn stencil(disc: &Discretization, q: Vec2, offsets: &[(isize, isize)]) -> Option<[(usize, f64); 9]> {
        let grid = &disc.grid;
        let fx = (q[0] - grid.origin[0]) / grid.hx;
        let fy = (q[1] - grid.origin[1]) / grid.hy;
        let ci = fx.round() as isize - 1;
        let cj = fy.round() as isize - 1;
        for &(di, dj) in offsets {
            let (i0, j0) = (ci + di, cj + dj);
            if i0 < 0 || j0 < 0 || i0 + 2 >= grid.nx as isize || j0 + 2 >= grid.ny as isize {
                continue;
            }
            let ok = (0..3).all(|b| {
                (0..3).all(|a| {
                    disc.classes
                        .is_unknown(grid.index((i0 + a) as usize, (j0 + b) as usize))
                })
            });
            if !ok {
                continue;
            }
            let wx = lagrange3(fx - i0 as f64);
            let wy = lagrange3(fy - j0 as f64);
            let mut out = [(0usize, 0.0); 9];
            for b in 0..3 {
                for a in 0..3 {
                    out[3 * b + a] = (
                        grid.index((i0 + a as isize) as usize, (j0 + b as isize) as usize),
                        wx[a] * wy[b],
                    );
                }
            }
            return Some(out);
        }
        None
    }

    /// `d/d nu` of a grid-indexed field whose boundary values are `boundary`.
    pub fn apply_values(&self, values: &[Complex64], boundary: &[Complex64]) -> Vec<Complex64> {
        let interp = |st: &[(usize, f64); 9]| -> Complex64 {
            st.iter().map(|&(n, w)| values[n] * w).sum()
        };
        self.stencils
            .iter()
            .zip(boundary)
            .map(|(st, &u0)| {
                let u1 = interp(&st[0]);
                let u2 = interp(&st[1]);
                (u0 * 3.0 - u1 * 4.0 + u2) / (2.0 * self.step)
            })
            .collect()
    }

    pub fn apply(&self, field: &ComplexField2D, g: impl Fn(Vec2) -> Complex64) -> NeumannTrace {
        let boundary: Vec<Complex64> = self.sampling.points.iter().map(|&p| g(p)).collect();
        NeumannTrace {
            values: self.apply_values(&field.values, &boundary),
        }
    }
}

/// Normal derivative of `field` on the sampled circle. `g` supplies the
/// Dirichlet values on the circle.
pub fn neumann_trace(
    field: &ComplexField2D,
    g: impl Fn(Vec2) -> Complex64,
    sampling: &BoundarySampling,
) -> Result<NeumannTrace> {
    Ok(NeumannExtractor::new(&field.disc, sampling)?.apply(field, g))
}

/// Derivative of `field` along one axis at every defined node: centred where
/// both neighbours exist, otherwise one-sided (second order when two nodes
/// are available on that side).
fn axis_derivative(field: &ComplexField2D, axis: usize) -> ComplexField2D {
    let grid = field.disc.grid;
    let h = if axis == 0 { grid.hx } else { grid.hy };
    let (n_along, stride) = if axis == 0 { (grid.nx, 1isize) } else { (grid.ny, grid.nx as isize) };
    let mut out = ComplexField2D::zeros(field.disc.clone());
    let defined = |node: isize, pos: isize| -> bool {
        pos >= 0 && (pos as usize) < n_along && field.is_defined(node as usize)
    };
    for &node in field.disc.classes.unknown_nodes() {
        let (i, j) = grid.ij(node);
        let pos = if axis == 0 { i } else { j } as isize;
        let nd = node as isize;
        let v = |off: isize| field.values[(nd + off * stride) as usize];
        let fwd1 = defined(nd + stride, pos + 1);
        let bwd1 = defined(nd - stride, pos - 1);
        let d = if fwd1 && bwd1 {
            (v(1) - v(-1)) / (2.0 * h)
        } else if fwd1 {
            if defined(nd + 2 * stride, pos + 2) {
                (v(0) * -3.0 + v(1) * 4.0 - v(2)) / (2.0 * h)
            } else {
                (v(1) - v(0)) / h
            }
        } else if bwd1 {
            if defined(nd - 2 * stride, pos - 2) {
                (v(0) * 3.0 - v(-1) * 4.0 + v(-2)) / (2.0 * h)
            } else {
                (v(0) - v(-1)) / h
            }
        } else {
            Complex64::default()
        };
        out.values[node] = d;
    }
    out
}

/// `H1 = (i omega mu0)^-1 d2 E3`, `H2 = -(i omega mu0)^-1 d1 E3`.
pub fn magnetic_fields(field: &ComplexField2D, omega: f64, mu0: f64) -> (ComplexField2D, ComplexField2D) {
    let inv = 1.0 / Complex64::new(0.0, omega * mu0);
    let mut h1 = axis_derivative(field, 1);
    let mut h2 = axis_derivative(field, 0);
    h1.values.iter_mut().for_each(|v| *v *= inv);
    h2.values.iter_mut().for_each(|v| *v *= -inv);
    (h1, h2)
}

/// Relative discrete `L^2` distance between a field and an analytic function
/// over the unknown nodes.
pub fn relative_l2_error(field: &ComplexField2D, exact: impl Fn(Vec2) -> Complex64) -> f64 {
    let grid = field.disc.grid;
    let (mut num, mut den) = (0.0, 0.0);
    for &node in field.disc.classes.unknown_nodes() {
        let e = exact(grid.node_point(node));
        num += (field.values[node] - e).norm_sqr();
        den += e.norm_sqr();
    }
    (num / den).sqrt()
}
