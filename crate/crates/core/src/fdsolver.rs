//! Five-point finite differences on a masked square grid.
//!
//! Nodes sit at `center + (-w + i h, -w + j h)` for `i, j = 0..=n`, with
//! `h = 2 w / n`. Every node carries a [`Label`]. Free nodes are unknowns,
//! hole nodes carry a per-hole constant, exterior nodes (outside the unit
//! disk) carry the outer value. The energy
//!
//! `E(f) = sum over grid edges of weight * (f(a) - f(b))^2`
//!
//! uses weight 1 for interior edges and 1/2 for edges lying on the box
//! boundary, so it integrates `|grad f|^2` exactly for affine `f` and the
//! minimizer satisfies natural (Neumann) conditions on the box edge.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::DomainSpec;
use crate::geometry::{Hole, Point};
use crate::multigrid::{Multigrid, Stencil};

/// Minimum number of nodes a hole must own.
pub const MIN_HOLE_NODES: usize = 4;

pub const RELATIVE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("grid size {0} must be a power of two in [{min}, {max}]", min = MIN_GRID, max = MAX_GRID)]
    BadGridSize(usize),
    #[error(
        "hole {hole} owns {nodes} grid nodes at n = {n}; at least {MIN_HOLE_NODES} are needed"
    )]
    UnderResolved { hole: usize, nodes: usize, n: usize },
    #[error(
        "conjugate gradient stalled after {iterations} iterations (relative residual {residual:e})"
    )]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("expected {expected} hole values, got {got}")]
    ValueCount { expected: usize, got: usize },
}

pub const MIN_GRID: usize = 16;
pub const MAX_GRID: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Interior,
    Hole(u32),
    Exterior,
}

impl Label {
    /// Integer code used by field dumps: -1 interior, -2 exterior, j >= 0 hole.
    pub fn code(self) -> i64 {
        match self {
            Label::Interior => -1,
            Label::Exterior => -2,
            Label::Hole(j) => j as i64,
        }
    }
}

/// Region of nodes carrying the outer value.
#[derive(Debug, Clone, PartialEq)]
pub enum Exterior {
    None,
    /// `|z| >= 1`.
    UnitDisk,
    /// Points at distance at least `distance` from `hole`.
    Far {
        hole: Hole,
        distance: f64,
    },
}

impl Exterior {
    pub fn contains(&self, p: Point) -> bool {
        match self {
            Exterior::None => false,
            Exterior::UnitDisk => p.x * p.x + p.y * p.y >= 1.0,
            Exterior::Far { hole, distance } => hole.distance_to(p) >= *distance,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    n: usize,
    center: Point,
    half_width: f64,
    h: f64,
    labels: Vec<Label>,
    hole_nodes: Vec<usize>,
    exterior: Exterior,
}

impl Grid {
    /// Grid over `center + [-half_width, half_width]^2`. Node `p` belongs to
    /// hole `j` if `holes[j].contains(p)` and is exterior if
    /// `exterior.contains(p)`; the first matching region wins.
    pub fn build(
        holes: &[&Hole],
        exterior: Exterior,
        center: Point,
        half_width: f64,
        n: usize,
    ) -> Result<Grid, SolverError> {
        if !n.is_power_of_two() || !(MIN_GRID..=MAX_GRID).contains(&n) {
            return Err(SolverError::BadGridSize(n));
        }
        let h = 2.0 * half_width / n as f64;
        let side = n + 1;
        let mut labels = vec![Label::Interior; side * side];
        let coord = |i: usize, c: f64| c - half_width + i as f64 * h;
        if exterior != Exterior::None {
            for j in 0..side {
                let y = coord(j, center.y);
                for i in 0..side {
                    if exterior.contains(Point::new(coord(i, center.x), y)) {
                        labels[j * side + i] = Label::Exterior;
                    }
                }
            }
        }
        let mut hole_nodes = vec![0; holes.len()];
        for (k, hole) in holes.iter().enumerate() {
            let (lo, hi) = bounding_box(hole);
            let range = |a: f64, b: f64, c: f64| {
                let first = (((a - c + half_width) / h).ceil().max(0.0)) as usize;
                let last = (((b - c + half_width) / h).floor().min(n as f64)).max(-1.0);
                (first, last as i64)
            };
            let (i0, i1) = range(lo.x, hi.x, center.x);
            let (j0, j1) = range(lo.y, hi.y, center.y);
            for j in j0 as i64..=j1 {
                for i in i0 as i64..=i1 {
                    let (i, j) = (i as usize, j as usize);
                    let p = Point::new(coord(i, center.x), coord(j, center.y));
                    let idx = j * side + i;
                    if labels[idx] == Label::Interior && hole.contains(p) {
                        labels[idx] = Label::Hole(k as u32);
                        hole_nodes[k] += 1;
                    }
                }
            }
        }
        if let Some((hole, &nodes)) = hole_nodes
            .iter()
            .enumerate()
            .find(|(_, &c)| c < MIN_HOLE_NODES)
        {
            return Err(SolverError::UnderResolved { hole, nodes, n });
        }
        Ok(Grid {
            n,
            center,
            half_width,
            h,
            labels,
            hole_nodes,
            exterior,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn side(&self) -> usize {
        self.n + 1
    }

    pub fn center(&self) -> Point {
        self.center
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn exterior(&self) -> &Exterior {
        &self.exterior
    }

    pub fn hole_count(&self) -> usize {
        self.hole_nodes.len()
    }

    pub fn hole_node_count(&self, j: usize) -> usize {
        self.hole_nodes[j]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn label(&self, i: usize, j: usize) -> Label {
        self.labels[j * self.side() + i]
    }

    pub fn node(&self, i: usize, j: usize) -> Point {
        Point::new(
            self.center.x - self.half_width + i as f64 * self.h,
            self.center.y - self.half_width + j as f64 * self.h,
        )
    }

    /// Nearest node to `p`, if inside the box.
    pub fn nearest(&self, p: Point) -> Option<(usize, usize)> {
        let f = |v: f64, c: f64| ((v - c + self.half_width) / self.h).round();
        let (i, j) = (f(p.x, self.center.x), f(p.y, self.center.y));
        let n = self.n as f64;
        ((0.0..=n).contains(&i) && (0.0..=n).contains(&j)).then_some((i as usize, j as usize))
    }

    fn edge_weight_x(&self, j: usize) -> f64 {
        if j == 0 || j == self.n {
            0.5
        } else {
            1.0
        }
    }

    fn edge_weight_y(&self, i: usize) -> f64 {
        if i == 0 || i == self.n {
            0.5
        } else {
            1.0
        }
    }
}

fn bounding_box(h: &Hole) -> (Point, Point) {
    match h {
        Hole::Disk { center, radius } => (
            Point::new(center.x - radius, center.y - radius),
            Point::new(center.x + radius, center.y + radius),
        ),
        Hole::Polygon { vertices } => vertices.iter().fold(
            (
                Point::new(f64::INFINITY, f64::INFINITY),
                Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
            ),
            |(lo, hi), v| {
                (
                    Point::new(lo.x.min(v.x), lo.y.min(v.y)),
                    Point::new(hi.x.max(v.x), hi.y.max(v.y)),
                )
            },
        ),
    }
}

/// The unit-disk grid of a domain: `[-1, 1]^2`, exterior outside the disk.
pub fn build_grid(d: &DomainSpec, n: usize) -> Result<Grid, SolverError> {
    if !(128..=MAX_GRID).contains(&n) {
        return Err(SolverError::BadGridSize(n));
    }
    build_grid_unchecked(d, n)
}

/// Same as [`build_grid`] without the lower size limit; small grids are
/// handy in tests.
pub fn build_grid_unchecked(d: &DomainSpec, n: usize) -> Result<Grid, SolverError> {
    let holes: Vec<&Hole> = d.holes.iter().collect();
    Grid::build(&holes, Exterior::UnitDisk, Point::ORIGIN, 1.0, n)
}

#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(Point) -> f64) -> Self {
        let side = grid.side();
        let mut values = Vec::with_capacity(side * side);
        for j in 0..side {
            for i in 0..side {
                values.push(f(grid.node(i, j)));
            }
        }
        ScalarField { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.grid.side() + i]
    }

    /// Bilinear interpolation inside the box.
    pub fn sample(&self, p: Point) -> Option<f64> {
        let g = &*self.grid;
        let u = (p.x - g.center.x + g.half_width) / g.h;
        let v = (p.y - g.center.y + g.half_width) / g.h;
        let n = g.n as f64;
        if !(0.0..=n).contains(&u) || !(0.0..=n).contains(&v) {
            return None;
        }
        let (i, j) = (
            (u.floor() as usize).min(g.n - 1),
            (v.floor() as usize).min(g.n - 1),
        );
        let (s, t) = (u - i as f64, v - j as f64);
        Some(
            (1.0 - s) * (1.0 - t) * self.at(i, j)
                + s * (1.0 - t) * self.at(i + 1, j)
                + (1.0 - s) * t * self.at(i, j + 1)
                + s * t * self.at(i + 1, j + 1),
        )
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Row-major CSV dump of node values.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        let side = self.grid.side();
        for row in self.values.chunks(side) {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    /// JSON sidecar describing the CSV dump.
    pub fn sidecar(&self) -> serde_json::Value {
        let g = &*self.grid;
        serde_json::json!({
            "n": g.n,
            "nodes_per_axis": g.side(),
            "h": g.h,
            "bounds": [
                [g.center.x - g.half_width, g.center.x + g.half_width],
                [g.center.y - g.half_width, g.center.y + g.half_width]
            ],
            "layout": "row-major, row j holds y = ymin + j h",
            "mask_encoding": {"interior": -1, "exterior": -2, "hole": "0-based hole index"},
            "mask": g.labels.iter().map(|l| l.code()).collect::<Vec<_>>(),
        })
    }
}

fn same_grid(a: &ScalarField, b: &ScalarField) -> bool {
    Arc::ptr_eq(&a.grid, &b.grid) || a.grid == b.grid
}

/// Discrete Dirichlet energy, an approximation of the integral of `|grad f|^2`.
pub fn dirichlet_energy(f: &ScalarField) -> f64 {
    energy_form(&f.grid, &f.values, &f.values)
}

pub fn energy_inner_product(f1: &ScalarField, f2: &ScalarField) -> Result<f64, SolverError> {
    if !same_grid(f1, f2) {
        return Err(SolverError::GridMismatch);
    }
    Ok(energy_form(&f1.grid, &f1.values, &f2.values))
}

fn energy_form(g: &Grid, a: &[f64], b: &[f64]) -> f64 {
    let side = g.side();
    let mut total = 0.0;
    for j in 0..side {
        let row = j * side;
        let wx = g.edge_weight_x(j);
        let mut acc = 0.0;
        for i in 0..g.n {
            let k = row + i;
            acc += (a[k + 1] - a[k]) * (b[k + 1] - b[k]);
        }
        total += wx * acc;
        if j < g.n {
            let mut acc = 0.0;
            for i in 0..side {
                let k = row + i;
                acc += g.edge_weight_y(i) * (a[k + side] - a[k]) * (b[k + side] - b[k]);
            }
            total += acc;
        }
    }
    total
}

/// Discrete version of `int u^2 / (1 - |z|)^2` over the unit disk divided by
/// the energy. Reported, never asserted.
pub fn hardy_quotient(f: &ScalarField) -> f64 {
    let g = &*f.grid;
    let side = g.side();
    let mut num = 0.0;
    for j in 0..side {
        for i in 0..side {
            let p = g.node(i, j);
            let r = p.norm();
            if r < 1.0 {
                let v = f.at(i, j);
                num += v * v / ((1.0 - r) * (1.0 - r));
            }
        }
    }
    num * g.h * g.h / dirichlet_energy(f)
}

/// Operator and multigrid preconditioner for one grid, reusable across
/// right-hand sides.
pub struct Solver {
    grid: Arc<Grid>,
    free: Vec<bool>,
    diag: Vec<f64>,
    cx: Vec<f64>,
    cy: Vec<f64>,
    multigrid: Multigrid,
}

impl Solver {
    pub fn new(grid: Arc<Grid>) -> Solver {
        let side = grid.side();
        let len = side * side;
        let free: Vec<bool> = grid.labels.iter().map(|l| *l == Label::Interior).collect();
        let mut diag = vec![0.0; len];
        let mut cx = vec![0.0; len];
        let mut cy = vec![0.0; len];
        for j in 0..side {
            for i in 0..side {
                let k = j * side + i;
                if i < grid.n {
                    let w = grid.edge_weight_x(j);
                    diag[k] += w;
                    diag[k + 1] += w;
                    if free[k] && free[k + 1] {
                        cx[k] = w;
                    }
                }
                if j < grid.n {
                    let w = grid.edge_weight_y(i);
                    diag[k] += w;
                    diag[k + side] += w;
                    if free[k] && free[k + side] {
                        cy[k] = w;
                    }
                }
            }
        }
        for k in 0..len {
            if !free[k] {
                diag[k] = 0.0;
            }
        }
        let multigrid = Multigrid::new(Stencil::five_point(side, &diag, &cx, &cy));
        Solver {
            grid,
            free,
            diag,
            cx,
            cy,
            multigrid,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    // Fixed nodes have zero diagonal and couplings, so the
    // sweeps below need no mask tests.
    fn apply(&self, p: &[f64], out: &mut [f64]) {
        let side = self.grid.side();
        let len = side * side;
        let edge = |k: usize| {
            let mut v = self.diag[k] * p[k];
            if k + 1 < len {
                v -= self.cx[k] * p[k + 1];
            }
            if k >= 1 {
                v -= self.cx[k - 1] * p[k - 1];
            }
            if k + side < len {
                v -= self.cy[k] * p[k + side];
            }
            if k >= side {
                v -= self.cy[k - side] * p[k - side];
            }
            v
        };
        for k in (0..side).chain(len - side..len) {
            out[k] = edge(k);
        }
        let m = len - 2 * side;
        let d = &self.diag[side..][..m];
        let (cxc, cxw) = (&self.cx[side..][..m], &self.cx[side - 1..][..m]);
        let (cyc, cys) = (&self.cy[side..][..m], &self.cy[..m]);
        let (pc, pe, pw) = (&p[side..][..m], &p[side + 1..][..m], &p[side - 1..][..m]);
        let (pn, ps) = (&p[2 * side..][..m], &p[..m]);
        let o = &mut out[side..][..m];
        for t in 0..m {
            o[t] = d[t] * pc[t] - cxc[t] * pe[t] - cxw[t] * pw[t] - cyc[t] * pn[t] - cys[t] * ps[t];
        }
    }

    /// Dirichlet solve with `hole_values[j]` on hole `j` and `outer_value`
    /// on exterior nodes.
    pub fn solve(&self, hole_values: &[f64], outer_value: f64) -> Result<ScalarField, SolverError> {
        let g = &*self.grid;
        if hole_values.len() != g.hole_count() {
            return Err(SolverError::ValueCount {
                expected: g.hole_count(),
                got: hole_values.len(),
            });
        }
        let side = g.side();
        let len = side * side;
        let mut values: Vec<f64> = g
            .labels
            .iter()
            .map(|l| match l {
                Label::Interior => 0.0,
                Label::Hole(j) => hole_values[*j as usize],
                Label::Exterior => outer_value,
            })
            .collect();
        // b = -(A_full * fixed) restricted to free nodes.
        let mut b = vec![0.0; len];
        for j in 0..side {
            for i in 0..side {
                let k = j * side + i;
                if i < g.n && self.free[k] != self.free[k + 1] {
                    let w = g.edge_weight_x(j);
                    if self.free[k] {
                        b[k] += w * values[k + 1];
                    } else {
                        b[k + 1] += w * values[k];
                    }
                }
                if j < g.n && self.free[k] != self.free[k + side] {
                    let w = g.edge_weight_y(i);
                    if self.free[k] {
                        b[k] += w * values[k + side];
                    } else {
                        b[k + side] += w * values[k];
                    }
                }
            }
        }
        let x = self.pcg(&b)?;
        for k in 0..len {
            if self.free[k] {
                values[k] = x[k];
            }
        }
        Ok(ScalarField {
            grid: self.grid.clone(),
            values,
        })
    }

    fn pcg(&self, b: &[f64]) -> Result<Vec<f64>, SolverError> {
        let len = b.len();
        let mut x = vec![0.0; len];
        let b_norm = dot(b, b).sqrt();
        if b_norm == 0.0 {
            return Ok(x);
        }
        let mut r = b.to_vec();
        let mut z = vec![0.0; len];
        self.multigrid.apply(&r, &mut z);
        let mut p = z.clone();
        let mut q = vec![0.0; len];
        let mut rz = dot(&r, &z);
        let cap = 20 * self.grid.n;
        for it in 0..cap {
            self.apply(&p, &mut q);
            let alpha = rz / dot(&p, &q);
            axpy(alpha, &p, &mut x);
            axpy(-alpha, &q, &mut r);
            let res = dot(&r, &r).sqrt() / b_norm;
            if res <= RELATIVE_TOLERANCE {
                return Ok(x);
            }
            if !res.is_finite() || it + 1 == cap {
                return Err(SolverError::NoConvergence {
                    iterations: it + 1,
                    residual: res,
                });
            }
            self.multigrid.apply(&r, &mut z);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for k in 0..len {
                p[k] = z[k] + beta * p[k];
            }
        }
        unreachable!("loop returns on its last iteration")
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// One-shot Dirichlet solve; builds the operator every call.
pub fn solve_dirichlet(
    grid: &Arc<Grid>,
    hole_values: &[f64],
    outer_value: f64,
) -> Result<ScalarField, SolverError> {
    Solver::new(grid.clone()).solve(hole_values, outer_value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::gen_annulus;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn annulus_grid(r: f64, n: usize) -> Arc<Grid> {
        Arc::new(build_grid_unchecked(&gen_annulus(r).unwrap(), n).unwrap())
    }

    #[test]
    fn grid_size_rules() {
        let d = gen_annulus(0.3).unwrap();
        assert_eq!(build_grid(&d, 100), Err(SolverError::BadGridSize(100)));
        assert_eq!(build_grid(&d, 64), Err(SolverError::BadGridSize(64)));
        assert!(build_grid(&d, 128).is_ok());
    }

    #[test]
    fn hole_node_count_matches_area() {
        let g = build_grid(&gen_annulus(0.3).unwrap(), 256).unwrap();
        let expected = PI * (0.3 / g.h()).powi(2);
        let got = g.hole_node_count(0) as f64;
        assert!(
            (got - expected).abs() / expected < 0.1,
            "{got} vs {expected}"
        );
    }

    #[test]
    fn tiny_hole_is_rejected() {
        let d = DomainSpec::new(vec![Hole::disk(Point::new(0.1234, 0.0), 0.004).unwrap()]);
        assert!(matches!(
            build_grid(&d, 128),
            Err(SolverError::UnderResolved { hole: 0, .. })
        ));
    }

    #[test]
    fn mask_rotates_with_domain() {
        let a = Hole::disk(Point::new(0.5, 0.0), 0.1).unwrap();
        let b = Hole::disk(Point::new(-0.5, 0.0), 0.1).unwrap();
        let c = Hole::disk(Point::new(0.0, 0.5), 0.1).unwrap();
        let e = Hole::disk(Point::new(0.0, -0.5), 0.1).unwrap();
        let g = Grid::build(
            &[&a, &b, &c, &e],
            Exterior::UnitDisk,
            Point::ORIGIN,
            1.0,
            128,
        )
        .unwrap();
        let kind = |l: Label| match l {
            Label::Hole(_) => 1,
            other => other.code(),
        };
        for j in 0..=128 {
            for i in 0..=128 {
                // (x, y) -> (-y, x)
                assert_eq!(kind(g.label(i, j)), kind(g.label(128 - j, i)));
            }
        }
    }

    #[test]
    fn zero_data_gives_zero_field() {
        let g = annulus_grid(0.3, 64);
        let f = solve_dirichlet(&g, &[0.0], 0.0).unwrap();
        assert!(f.values().iter().all(|&v| v == 0.0));
        assert_eq!(dirichlet_energy(&f), 0.0);
    }

    #[test]
    fn affine_energy_is_exact() {
        let g = Arc::new(Grid::build(&[], Exterior::None, Point::ORIGIN, 1.0, 64).unwrap());
        let x = ScalarField::from_fn(g.clone(), |p| p.x);
        let y = ScalarField::from_fn(g.clone(), |p| p.y);
        assert_relative_eq!(dirichlet_energy(&x), 4.0, epsilon = 1e-12);
        assert_relative_eq!(dirichlet_energy(&y), 4.0, epsilon = 1e-12);
        assert_relative_eq!(energy_inner_product(&x, &y).unwrap(), 0.0, epsilon = 1e-12);
        let c = ScalarField::from_fn(g, |_| 2.5);
        assert_eq!(dirichlet_energy(&c), 0.0);
    }

    #[test]
    fn inner_product_checks() {
        let g = annulus_grid(0.5, 64);
        let f = solve_dirichlet(&g, &[1.0], 0.0).unwrap();
        assert_relative_eq!(
            energy_inner_product(&f, &f).unwrap(),
            dirichlet_energy(&f),
            epsilon = 1e-12
        );
        let other = annulus_grid(0.4, 64);
        let f2 = solve_dirichlet(&other, &[1.0], 0.0).unwrap();
        assert_eq!(
            energy_inner_product(&f, &f2),
            Err(SolverError::GridMismatch)
        );
    }

    #[test]
    fn annulus_profile_is_logarithmic() {
        let g = annulus_grid(0.5, 512);
        let f = solve_dirichlet(&g, &[1.0], 0.0).unwrap();
        for &r in &[0.55, 0.6, 0.7, 0.8, 0.9] {
            for k in 0..8 {
                let p = Point::polar(r, k as f64 * PI / 4.0 + 0.1);
                let exact = r.ln() / 0.5f64.ln();
                let got = f.sample(p).unwrap();
                assert!(
                    (got - exact).abs() <= 0.01 * exact,
                    "r = {r}: {got} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn annulus_energy_matches_closed_form() {
        let g = annulus_grid(0.5, 1024);
        let f = solve_dirichlet(&g, &[1.0], 0.0).unwrap();
        let exact = 2.0 * PI / 2f64.ln();
        assert_relative_eq!(exact, 9.06472, epsilon = 1e-5);
        let e = dirichlet_energy(&f);
        assert!((e - exact).abs() / exact < 0.02, "{e} vs {exact}");
    }

    #[test]
    fn antisymmetric_data_gives_odd_field() {
        let a = Hole::disk(Point::new(0.4, 0.0), 0.1).unwrap();
        let b = Hole::disk(Point::new(-0.4, 0.0), 0.1).unwrap();
        let g =
            Arc::new(Grid::build(&[&a, &b], Exterior::UnitDisk, Point::ORIGIN, 1.0, 128).unwrap());
        let f = solve_dirichlet(&g, &[1.0, -1.0], 0.0).unwrap();
        for j in 0..=128 {
            for i in 0..=128 {
                assert!((f.at(i, j) + f.at(128 - i, j)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn maximum_principle_and_minimality() {
        use rand::{Rng, SeedableRng};
        let a = Hole::disk(Point::new(0.3, 0.1), 0.12).unwrap();
        let b = Hole::square(Point::new(-0.35, -0.2), 0.1).unwrap();
        let g =
            Arc::new(Grid::build(&[&a, &b], Exterior::UnitDisk, Point::ORIGIN, 1.0, 128).unwrap());
        let f = solve_dirichlet(&g, &[0.7, -0.4], 0.2).unwrap();
        let (lo, hi) = f.min_max();
        assert!(lo >= -0.4 - 1e-12 && hi <= 0.7 + 1e-12);

        let base = dirichlet_energy(&f);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let free: Vec<usize> = g
            .labels()
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == Label::Interior)
            .map(|(k, _)| k)
            .collect();
        for _ in 0..50 {
            let k = free[rng.gen_range(0..free.len())];
            let mut values = f.values().to_vec();
            values[k] += rng.gen_range(-1e-3..1e-3);
            let perturbed = ScalarField {
                grid: g.clone(),
                values,
            };
            assert!(dirichlet_energy(&perturbed) > base);
        }
    }

    #[test]
    fn refinement_approaches_closed_form() {
        let exact = 2.0 * PI / 2f64.ln();
        let err = |n| {
            let f = solve_dirichlet(&annulus_grid(0.5, n), &[1.0], 0.0).unwrap();
            (dirichlet_energy(&f) - exact).abs()
        };
        let (e256, e512, e1024) = (err(256), err(512), err(1024));
        assert!(e512 < e256 && e1024 < e512, "{e256} {e512} {e1024}");
    }

    #[test]
    fn hardy_quotient_is_finite() {
        let g = annulus_grid(0.5, 128);
        let f = solve_dirichlet(&g, &[1.0], 0.0).unwrap();
        let q = hardy_quotient(&f);
        assert!(q.is_finite() && q > 0.0);
    }

    #[test]
    fn csv_dump_has_one_row_per_grid_line() {
        let g = annulus_grid(0.5, 16);
        let f = solve_dirichlet(&g, &[1.0], 0.0).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 17);
        assert_eq!(f.sidecar()["mask"].as_array().unwrap().len(), 17 * 17);
    }
}
