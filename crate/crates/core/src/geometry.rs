//! Cartesian carrier grid, the disk domain, embedded-boundary node labels and
//! the boundary sampling used for trace quadrature.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;

use crate::error::{Error, Result};
use crate::phase_space::Vec2;

/// Uniform node-centred grid on an axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartesianGrid {
    pub nx: usize,
    pub ny: usize,
    /// Lower-left corner.
    pub origin: Vec2,
    pub hx: f64,
    pub hy: f64,
}

impl CartesianGrid {
    /// `nx x ny` nodes covering `[-half_width, half_width]^2` exactly.
    pub fn new(nx: usize, ny: usize, half_width: f64) -> Result<Self> {
        if nx < 3 || ny < 3 {
            return Err(Error::InvalidGrid(format!("need at least 3x3 nodes, got {nx}x{ny}")));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::InvalidGrid(format!("half width {half_width}")));
        }
        Ok(Self {
            nx,
            ny,
            origin: [-half_width, -half_width],
            hx: 2.0 * half_width / (nx - 1) as f64,
            hy: 2.0 * half_width / (ny - 1) as f64,
        })
    }

    pub fn square(n: usize, half_width: f64) -> Result<Self> {
        Self::new(n, n, half_width)
    }

    /// Same grid translated by `shift`.
    pub fn shifted(&self, shift: Vec2) -> Self {
        Self {
            origin: [self.origin[0] + shift[0], self.origin[1] + shift[1]],
            ..*self
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn ij(&self, node: usize) -> (usize, usize) {
        (node % self.nx, node / self.nx)
    }

    #[inline]
    pub fn point(&self, i: usize, j: usize) -> Vec2 {
        [
            self.origin[0] + i as f64 * self.hx,
            self.origin[1] + j as f64 * self.hy,
        ]
    }

    pub fn node_point(&self, node: usize) -> Vec2 {
        let (i, j) = self.ij(node);
        self.point(i, j)
    }

    pub fn upper(&self) -> Vec2 {
        self.point(self.nx - 1, self.ny - 1)
    }

    pub fn h_max(&self) -> f64 {
        self.hx.max(self.hy)
    }

    pub fn cell_area(&self) -> f64 {
        self.hx * self.hy
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskDomain {
    pub center: Vec2,
    pub radius: f64,
}

impl DiskDomain {
    pub fn new(center: Vec2, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::ParamOutOfRange(format!("disk radius {radius}")));
        }
        Ok(Self { center, radius })
    }

    pub fn diameter(&self) -> f64 {
        2.0 * self.radius
    }

    pub fn area(&self) -> f64 {
        PI * self.radius * self.radius
    }

    /// `|x - c| - r`, negative inside.
    pub fn signed_distance(&self, x: Vec2) -> f64 {
        (x[0] - self.center[0]).hypot(x[1] - self.center[1]) - self.radius
    }

    /// Open disk membership.
    pub fn contains(&self, x: Vec2) -> bool {
        self.signed_distance(x) < 0.0
    }

    /// Closed disk membership, used for quadrature masks.
    pub fn contains_closed(&self, x: Vec2) -> bool {
        self.signed_distance(x) <= 0.0
    }

    /// Closest point on the circle (the center maps to angle 0).
    pub fn foot_point(&self, x: Vec2) -> Vec2 {
        let d = [x[0] - self.center[0], x[1] - self.center[1]];
        let n = d[0].hypot(d[1]);
        if n == 0.0 {
            return [self.center[0] + self.radius, self.center[1]];
        }
        [
            self.center[0] + self.radius * d[0] / n,
            self.center[1] + self.radius * d[1] / n,
        ]
    }

    /// Distance `t > 0` from an inside point `p` along the unit axis
    /// direction `dir` to the circle.
    pub fn axis_intersection(&self, p: Vec2, dir: Vec2) -> f64 {
        let q = [p[0] - self.center[0], p[1] - self.center[1]];
        let qd = q[0] * dir[0] + q[1] * dir[1];
        let qq = q[0] * q[0] + q[1] * q[1];
        -qd + (self.radius * self.radius - qq + qd * qd).max(0.0).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeLabel {
    Interior,
    Irregular,
    Exterior,
}

impl fmt::Display for NodeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NodeLabel::Interior => "INTERIOR",
            NodeLabel::Irregular => "IRREGULAR",
            NodeLabel::Exterior => "EXTERIOR",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IrregularNode {
    pub node: usize,
    pub signed_distance: f64,
    pub foot: Vec2,
}

/// Node labels plus the numbering of unknowns (interior and irregular nodes).
#[derive(Debug, Clone, PartialEq)]
pub struct NodeClassification {
    pub labels: Vec<NodeLabel>,
    pub irregular: Vec<IrregularNode>,
    unknown_of: Vec<Option<usize>>,
    nodes: Vec<usize>,
}

impl NodeClassification {
    pub fn label(&self, node: usize) -> NodeLabel {
        self.labels[node]
    }

    pub fn is_unknown(&self, node: usize) -> bool {
        self.unknown_of[node].is_some()
    }

    pub fn unknown(&self, node: usize) -> Option<usize> {
        self.unknown_of[node]
    }

    /// Grid node of each unknown, in row order.
    pub fn unknown_nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn n_unknowns(&self) -> usize {
        self.nodes.len()
    }

    pub fn count(&self, label: NodeLabel) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }
}

pub fn classify(grid: &CartesianGrid, dom: &DiskDomain) -> Result<NodeClassification> {
    let lo = grid.origin;
    let hi = grid.upper();
    let margin = [
        dom.center[0] - dom.radius - lo[0],
        hi[0] - dom.center[0] - dom.radius,
        dom.center[1] - dom.radius - lo[1],
        hi[1] - dom.center[1] - dom.radius,
    ]
    .into_iter()
    .fold(f64::INFINITY, f64::min);
    let required = 2.0 * grid.h_max();
    if margin < required {
        return Err(Error::DomainTouchesBounds { margin, required });
    }

    let inside: Vec<bool> = (0..grid.len())
        .map(|n| dom.contains(grid.node_point(n)))
        .collect();
    let mut labels = vec![NodeLabel::Exterior; grid.len()];
    let mut irregular = Vec::new();
    let mut unknown_of = vec![None; grid.len()];
    let mut nodes = Vec::new();
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let node = grid.index(i, j);
            if !inside[node] {
                continue;
            }
            // The margin check guarantees inside nodes are not on the rectangle edge.
            let all_in = inside[grid.index(i - 1, j)]
                && inside[grid.index(i + 1, j)]
                && inside[grid.index(i, j - 1)]
                && inside[grid.index(i, j + 1)];
            if all_in {
                labels[node] = NodeLabel::Interior;
            } else {
                labels[node] = NodeLabel::Irregular;
                let x = grid.point(i, j);
                irregular.push(IrregularNode {
                    node,
                    signed_distance: dom.signed_distance(x),
                    foot: dom.foot_point(x),
                });
            }
            unknown_of[node] = Some(nodes.len());
            nodes.push(node);
        }
    }
    Ok(NodeClassification {
        labels,
        irregular,
        unknown_of,
        nodes,
    })
}

/// Grid, domain and classification bundled for the solver.
#[derive(Debug, Clone, PartialEq)]
pub struct Discretization {
    pub grid: CartesianGrid,
    pub domain: DiskDomain,
    pub classes: NodeClassification,
}

impl Discretization {
    pub fn new(grid: CartesianGrid, domain: DiskDomain) -> Result<Self> {
        let classes = classify(&grid, &domain)?;
        Ok(Self {
            grid,
            domain,
            classes,
        })
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "i,j,x1,x2,label")?;
        for j in 0..self.grid.ny {
            for i in 0..self.grid.nx {
                let x = self.grid.point(i, j);
                let label = self.classes.label(self.grid.index(i, j));
                writeln!(w, "{i},{j},{},{},{label}", x[0], x[1])?;
            }
        }
        Ok(())
    }
}

/// Uniform samples on the circle with trapezoid arc weights.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySampling {
    pub domain: DiskDomain,
    pub angles: Vec<f64>,
    pub points: Vec<Vec2>,
    pub normals: Vec<Vec2>,
    pub arc_weights: Vec<f64>,
}

pub fn boundary_sampling(dom: &DiskDomain, nb: usize) -> Result<BoundarySampling> {
    if nb == 0 {
        return Err(Error::ParamOutOfRange("boundary sample count is zero".into()));
    }
    let w = 2.0 * PI * dom.radius / nb as f64;
    let mut out = BoundarySampling {
        domain: *dom,
        angles: Vec::with_capacity(nb),
        points: Vec::with_capacity(nb),
        normals: Vec::with_capacity(nb),
        arc_weights: vec![w; nb],
    };
    for j in 0..nb {
        let theta = 2.0 * PI * j as f64 / nb as f64;
        let (s, c) = theta.sin_cos();
        out.angles.push(theta);
        out.normals.push([c, s]);
        out.points
            .push([dom.center[0] + dom.radius * c, dom.center[1] + dom.radius * s]);
    }
    Ok(out)
}

impl BoundarySampling {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Trapezoid approximation of the boundary integral of sampled values.
    pub fn integrate<T>(&self, values: impl IntoIterator<Item = T>) -> T
    where
        T: std::ops::Mul<f64, Output = T> + std::iter::Sum<T>,
    {
        values
            .into_iter()
            .zip(&self.arc_weights)
            .map(|(v, &w)| v * w)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn model_disc() -> DiskDomain {
        DiskDomain::new([0.0, 0.0], 0.7).unwrap()
    }

    #[test]
    fn tangent_disk_is_rejected() {
        let grid = CartesianGrid::square(200, 0.7).unwrap();
        assert!(matches!(
            classify(&grid, &model_disc()),
            Err(Error::DomainTouchesBounds { .. })
        ));
        let shrunk = DiskDomain::new([0.0, 0.0], 0.69 * 0.7).unwrap();
        assert!(classify(&grid, &shrunk).is_ok());
        // Enlarged carrier rectangle used by default.
        let grid = CartesianGrid::square(200, 0.75).unwrap();
        assert!(classify(&grid, &model_disc()).is_ok());
    }

    #[test]
    fn labels_near_origin_and_rim() {
        let grid = CartesianGrid::square(201, 0.75).unwrap();
        let c = classify(&grid, &model_disc()).unwrap();
        assert_eq!(c.label(grid.index(100, 100)), NodeLabel::Interior);

        // Build a grid whose nodes straddle x = 0.7 at distance h/2.
        let h = 0.01;
        let n = 151;
        let g = CartesianGrid {
            nx: n,
            ny: n,
            origin: [-0.75 + h / 2.0, -0.75],
            hx: h,
            hy: h,
        };
        let c = classify(&g, &model_disc()).unwrap();
        let i = ((0.7 - h / 2.0 - g.origin[0]) / h).round() as usize;
        let j = 75;
        assert!((g.point(i, j)[0] - (0.7 - h / 2.0)).abs() < 1e-12);
        assert_eq!(c.label(g.index(i, j)), NodeLabel::Irregular);
        assert_eq!(c.label(g.index(i + 1, j)), NodeLabel::Exterior);
    }

    #[test]
    fn labels_partition_and_respect_neighbours() {
        let grid = CartesianGrid::square(90, 0.75).unwrap();
        let dom = model_disc();
        let c = classify(&grid, &dom).unwrap();
        let total = c.count(NodeLabel::Interior) + c.count(NodeLabel::Irregular) + c.count(NodeLabel::Exterior);
        assert_eq!(total, grid.len());
        assert_eq!(c.n_unknowns(), c.count(NodeLabel::Interior) + c.count(NodeLabel::Irregular));
        for j in 1..grid.ny - 1 {
            for i in 1..grid.nx - 1 {
                let node = grid.index(i, j);
                let nb = [
                    grid.index(i - 1, j),
                    grid.index(i + 1, j),
                    grid.index(i, j - 1),
                    grid.index(i, j + 1),
                ];
                let all_in = nb.iter().all(|&m| dom.contains(grid.node_point(m)));
                match c.label(node) {
                    NodeLabel::Interior => assert!(all_in),
                    NodeLabel::Irregular => {
                        assert!(dom.contains(grid.node_point(node)) && !all_in)
                    }
                    NodeLabel::Exterior => assert!(!dom.contains(grid.node_point(node))),
                }
            }
        }
        for irr in &c.irregular {
            let x = grid.node_point(irr.node);
            assert!(irr.signed_distance < 0.0);
            assert!((dom.signed_distance(x) - irr.signed_distance).abs() < 1e-15);
            assert!(dom.signed_distance(irr.foot).abs() < 1e-14);
        }
    }

    #[test]
    fn exterior_labels_survive_refinement() {
        let dom = model_disc();
        let coarse = CartesianGrid::square(61, 0.75).unwrap();
        let fine = CartesianGrid::square(121, 0.75).unwrap();
        let cc = classify(&coarse, &dom).unwrap();
        let cf = classify(&fine, &dom).unwrap();
        for j in 0..coarse.ny {
            for i in 0..coarse.nx {
                if cc.label(coarse.index(i, j)) == NodeLabel::Exterior {
                    assert_eq!(cf.label(fine.index(2 * i, 2 * j)), NodeLabel::Exterior);
                }
            }
        }
    }

    #[test]
    fn axis_intersection_lands_on_circle() {
        let dom = DiskDomain::new([0.1, -0.2], 0.5).unwrap();
        let p = [0.3, 0.05];
        for dir in [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]] {
            let t = dom.axis_intersection(p, dir);
            assert!(t > 0.0);
            let q = [p[0] + t * dir[0], p[1] + t * dir[1]];
            assert!(dom.signed_distance(q).abs() < 1e-14);
        }
    }

    #[test]
    fn sampling_examples() {
        let dom = model_disc();
        let s = boundary_sampling(&dom, 4).unwrap();
        let want = [[0.7, 0.0], [0.0, 0.7], [-0.7, 0.0], [0.0, -0.7]];
        for (p, q) in s.points.iter().zip(want) {
            assert!((p[0] - q[0]).abs() < 1e-15 && (p[1] - q[1]).abs() < 1e-15);
        }
        for &w in &s.arc_weights {
            assert!((w - 0.35 * PI).abs() < 1e-15);
        }
        let total: f64 = s.integrate(std::iter::repeat_n(1.0, s.len()));
        assert!((total - 1.4 * PI).abs() < 1e-12 * 1.4 * PI);
        for n in &s.normals {
            assert!((n[0].hypot(n[1]) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn trapezoid_is_spectral_on_circle() {
        let dom = model_disc();
        let nb = 720;
        let s = boundary_sampling(&dom, nb).unwrap();
        let circ = 2.0 * PI * 0.7;
        for m in [1i32, 2, 7, 100, 359] {
            let v: Complex64 = s.integrate(
                s.angles
                    .iter()
                    .map(|&t| Complex64::from_polar(1.0, m as f64 * t)),
            );
            assert!(v.norm() < 1e-12 * circ, "m = {m}: {v}");
        }
    }

    #[test]
    fn csv_dump_has_one_row_per_node() {
        let d = Discretization::new(CartesianGrid::square(61, 0.75).unwrap(), model_disc()).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("i,j,x1,x2,label\n"));
        assert_eq!(text.lines().count(), 1 + 61 * 61);
        assert!(text.contains("INTERIOR") && text.contains("EXTERIOR"));
    }
}
