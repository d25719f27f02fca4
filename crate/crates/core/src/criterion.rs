//! The four metric conditions of the complete interpolation criterion:
//! uniform local finiteness, bounded hyperbolic diameters, weak
//! separatedness and connectedness of the hole graph. Also the partial order
//! on holes built from free annuli, and Blaschke sums.

use std::collections::{BTreeMap, VecDeque};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::capacity::{cap2_batch, CapacityError, Plate};
use crate::domain::DomainSpec;
use crate::geometry::{
    euclid_gap, hyperbolic_diameter, hyperbolic_distance_to_hole, hyperbolic_inflate, Component,
    GeometryError, Hole, MobiusMap, Point,
};
use crate::serde_util::{hops, inf_f64};

/// Largest number of capacity solves `capacity_graph` performs.
pub const MAX_CAPACITY_PAIRS: usize = 500;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CriterionError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("threshold must be positive, got {0}")]
    BadThreshold(f64),
    #[error("capacity of pair ({first}, {second}): {source}")]
    Capacity {
        first: Vertex,
        second: Vertex,
        source: CapacityError,
    },
}

/// Graph vertex: a hole index or the exterior of the unit disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Vertex {
    Hole(usize),
    Outer,
}

impl std::fmt::Display for Vertex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Vertex::Hole(j) => write!(f, "B{j}"),
            Vertex::Outer => write!(f, "OUTER"),
        }
    }
}

/// ULF constant bracket. For disk holes `lower == upper` and `exact` is set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UlfBound {
    pub lower: usize,
    pub upper: usize,
    pub exact: bool,
}

impl UlfBound {
    /// The certified constant: the upper end of the bracket.
    pub fn value(&self) -> usize {
        self.upper
    }
}

fn check_inside(d: &DomainSpec) -> Result<(), CriterionError> {
    for h in &d.holes {
        if h.max_norm() >= 1.0 {
            return Err(GeometryError::OutsideUnitDisk(h.max_norm()).into());
        }
    }
    Ok(())
}

/// Largest number of holes met by a hyperbolic disk of radius 1.
///
/// A radius-1 disk centered at `z` meets `B_j` iff `z` lies in the
/// hyperbolic 1-neighborhood of `B_j`. For a disk hole that neighborhood is a
/// Euclidean disk, so the answer is the maximum depth of a disk
/// arrangement, attained at a disk center or at a crossing of two circles.
/// Polygon holes fall back to [`ulf_net_bracket`].
pub fn ulf_constant(d: &DomainSpec) -> Result<UlfBound, CriterionError> {
    check_inside(d)?;
    if d.is_empty() {
        return Ok(UlfBound {
            lower: 0,
            upper: 0,
            exact: true,
        });
    }
    if !d.all_disks() {
        return ulf_net_bracket(d);
    }
    let disks = d
        .holes
        .iter()
        .map(|h| match h {
            Hole::Disk { center, radius } => {
                hyperbolic_inflate(*center, *radius, 1.0).map(|e| match e {
                    Hole::Disk { center, radius } => (center, radius),
                    Hole::Polygon { .. } => unreachable!("inflation of a disk is a disk"),
                })
            }
            Hole::Polygon { .. } => unreachable!(),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let depth = arrangement_depth(&disks);
    Ok(UlfBound {
        lower: depth,
        upper: depth,
        exact: true,
    })
}

/// Maximum number of closed disks sharing a point.
pub fn arrangement_depth(disks: &[(Point, f64)]) -> usize {
    let depth_at = |p: Point| {
        disks
            .iter()
            .filter(|(c, r)| p.dist(*c) <= r * (1.0 + 1e-12) + 1e-14)
            .count()
    };
    let mut best = disks.iter().map(|(c, _)| depth_at(*c)).max().unwrap_or(0);
    for i in 0..disks.len() {
        for j in i + 1..disks.len() {
            let ((c1, r1), (c2, r2)) = (disks[i], disks[j]);
            let dist = c1.dist(c2);
            if dist == 0.0 || dist > r1 + r2 || dist < (r1 - r2).abs() {
                continue;
            }
            let a = (r1 * r1 - r2 * r2 + dist * dist) / (2.0 * dist);
            let h = (r1 * r1 - a * a).max(0.0).sqrt();
            let u = (c2 - c1) * (1.0 / dist);
            let base = c1 + u * a;
            let perp = Point::new(-u.y, u.x);
            for p in [base + perp * h, base - perp * h] {
                best = best.max(depth_at(p));
            }
        }
    }
    best
}

/// Counts holes within hyperbolic distance `radius` of `z`.
fn holes_within(d: &DomainSpec, z: Point, radius: f64) -> usize {
    d.holes
        .iter()
        .filter(|h| {
            hyperbolic_distance_to_hole(z, h)
                .map(|t| t <= radius)
                .unwrap_or(false)
        })
        .count()
}

/// Hyperbolic net of covering radius `delta` around each hole: a point of
/// the 1-neighborhood of any hole lies within `delta` of a net point.
fn hyperbolic_net(d: &DomainSpec, delta: f64) -> Result<Vec<Point>, CriterionError> {
    let step = delta;
    let mut out = Vec::new();
    for h in &d.holes {
        // a boundary point belongs to the closed hole
        let anchor = h.boundary_samples(1)[0];
        let reach = 1.0 + hyperbolic_diameter(h)? + delta;
        let back = MobiusMap::new(anchor, 0.0)?.inverse();
        out.push(anchor);
        let rings = (reach / step).ceil() as usize + 1;
        for k in 1..=rings {
            let t = k as f64 * step;
            // radial error <= step/2, arc error <= (dphi/2) sinh(2t)/2 <= step/2
            let count = (2.0 * std::f64::consts::PI * (2.0 * t).sinh() / (2.0 * step))
                .ceil()
                .max(3.0) as usize;
            let r = t.tanh();
            for m in 0..count {
                let phi = 2.0 * std::f64::consts::PI * m as f64 / count as f64;
                out.push(back.apply(Point::polar(r, phi)));
            }
        }
    }
    Ok(out)
}

/// ULF bracket from a hyperbolic net: the lower end counts holes within 1 of
/// net points of spacing 0.25; the upper end counts holes within 1.5 of net
/// points of covering radius 0.5, since every radius-1 disk sits inside a
/// radius-1.5 disk about some net point.
pub fn ulf_net_bracket(d: &DomainSpec) -> Result<UlfBound, CriterionError> {
    use rayon::prelude::*;
    check_inside(d)?;
    let fine = hyperbolic_net(d, 0.25)?;
    let coarse = hyperbolic_net(d, 0.5)?;
    let lower = fine
        .par_iter()
        .map(|&z| holes_within(d, z, 1.0))
        .max()
        .unwrap_or(0);
    let upper = coarse
        .par_iter()
        .map(|&z| holes_within(d, z, 1.5))
        .max()
        .unwrap_or(0)
        .max(lower);
    Ok(UlfBound {
        lower,
        upper,
        exact: lower == upper,
    })
}

/// Monte Carlo lower bound for the ULF constant: centers drawn uniformly
/// from the Euclidean hulls of the inflated holes, hole counts computed by
/// direct hyperbolic distance.
pub fn ulf_sampling<R: Rng>(
    d: &DomainSpec,
    samples: usize,
    rng: &mut R,
) -> Result<usize, CriterionError> {
    check_inside(d)?;
    if d.is_empty() {
        return Ok(0);
    }
    let hulls = d
        .holes
        .iter()
        .map(|h| {
            let c = h.anchor();
            let rad = h.farthest_distance(c);
            match hyperbolic_inflate(c, rad, 1.0)? {
                Hole::Disk { center, radius } => Ok((center, radius)),
                Hole::Polygon { .. } => unreachable!(),
            }
        })
        .collect::<Result<Vec<_>, CriterionError>>()?;
    let mut best = 0;
    for _ in 0..samples {
        let (c, r) = hulls[rng.gen_range(0..hulls.len())];
        let rho = r * rng.gen::<f64>().sqrt();
        let z = c + Point::polar(rho, rng.gen_range(0.0..2.0 * std::f64::consts::PI));
        if z.norm() >= 1.0 {
            continue;
        }
        best = best.max(holes_within(d, z, 1.0));
    }
    Ok(best)
}

/// `sup_j diam_H(B_j)`.
pub fn sup_hyperbolic_diameter(d: &DomainSpec) -> Result<f64, CriterionError> {
    let mut best: f64 = 0.0;
    for h in &d.holes {
        best = best.max(hyperbolic_diameter(h)?);
    }
    Ok(best)
}

/// `(eps_weak, eps_strong)`: minima over pairs of gap / min diam and
/// gap / max diam. A single hole gives `(inf, inf)`.
pub fn separatedness(d: &DomainSpec) -> (f64, f64) {
    let mut weak = f64::INFINITY;
    let mut strong = f64::INFINITY;
    for i in 0..d.len() {
        for k in i + 1..d.len() {
            let (a, b) = (&d.holes[i], &d.holes[k]);
            let gap = euclid_gap(Component::Hole(a), Component::Hole(b));
            let (da, db) = (a.diameter(), b.diameter());
            weak = weak.min(gap / da.min(db));
            strong = strong.min(gap / da.max(db));
        }
    }
    (weak, strong)
}

/// Undirected graph on the holes plus the exterior vertex `OUTER`, stored
/// with `OUTER` at index `holes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoleGraph {
    pub holes: usize,
    pub threshold: f64,
    pub edges: Vec<(Vertex, Vertex)>,
    /// Edges accepted from the capacity-metric bounds without a solve.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub unsolved_edges: usize,
}

fn is_zero(v: &usize) -> bool {
    *v == 0
}

impl HoleGraph {
    pub fn new(holes: usize, threshold: f64) -> Self {
        HoleGraph {
            holes,
            threshold,
            edges: Vec::new(),
            unsolved_edges: 0,
        }
    }

    fn index(&self, v: Vertex) -> usize {
        match v {
            Vertex::Hole(j) => j,
            Vertex::Outer => self.holes,
        }
    }

    fn vertex(&self, i: usize) -> Vertex {
        if i == self.holes {
            Vertex::Outer
        } else {
            Vertex::Hole(i)
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.holes + 1
    }

    pub fn add_edge(&mut self, a: Vertex, b: Vertex) {
        let e = if a <= b { (a, b) } else { (b, a) };
        if a != b && !self.edges.contains(&e) {
            self.edges.push(e);
        }
    }

    pub fn has_edge(&self, a: Vertex, b: Vertex) -> bool {
        let e = if a <= b { (a, b) } else { (b, a) };
        self.edges.contains(&e)
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertex_count()];
        for &(a, b) in &self.edges {
            let (i, j) = (self.index(a), self.index(b));
            adj[i].push(j);
            adj[j].push(i);
        }
        adj
    }

    /// Hop counts from `from`; `None` for unreachable vertices.
    pub fn bfs(&self, from: Vertex) -> Vec<Option<usize>> {
        let adj = self.adjacency();
        let mut dist = vec![None; self.vertex_count()];
        let start = self.index(from);
        dist[start] = Some(0);
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            let next = dist[i].unwrap() + 1;
            for &j in &adj[i] {
                if dist[j].is_none() {
                    dist[j] = Some(next);
                    queue.push_back(j);
                }
            }
        }
        dist
    }

    /// Per-hole hop distance to `OUTER`.
    pub fn distances_to_outer(&self) -> Vec<Option<usize>> {
        let mut d = self.bfs(Vertex::Outer);
        d.pop();
        d
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        (0..self.vertex_count()).map(|i| self.vertex(i))
    }
}

/// Edge rule: holes joined when `gap <= S min(diam)`, a hole joined to
/// `OUTER` when its gap to the unit circle is at most `S diam`.
pub fn metric_graph(d: &DomainSpec, s: f64) -> Result<HoleGraph, CriterionError> {
    if !(s > 0.0) {
        return Err(CriterionError::BadThreshold(s));
    }
    let mut g = HoleGraph::new(d.len(), s);
    for (j, h) in d.holes.iter().enumerate() {
        if euclid_gap(Component::Hole(h), Component::Outer) <= s * h.diameter() {
            g.add_edge(Vertex::Hole(j), Vertex::Outer);
        }
        for k in j + 1..d.len() {
            let other = &d.holes[k];
            if euclid_gap(Component::Hole(h), Component::Hole(other))
                <= s * h.diameter().min(other.diameter())
            {
                g.add_edge(Vertex::Hole(j), Vertex::Hole(k));
            }
        }
    }
    Ok(g)
}

/// Edge rule: two vertices joined when their condenser capacity is at least
/// `s`. Hole pairs are solved in the plane; a hole and `OUTER` inside the
/// unit disk.
///
/// When more than [`MAX_CAPACITY_PAIRS`] pairs would need a solve, pairs the
/// capacity bounds settle are decided without one, and every remaining pair
/// the upper bound cannot exclude is kept as an edge and counted in
/// `unsolved_edges`.
pub fn capacity_graph(d: &DomainSpec, s: f64, n: usize) -> Result<HoleGraph, CriterionError> {
    if !(s > 0.0) {
        return Err(CriterionError::BadThreshold(s));
    }
    let mut g = HoleGraph::new(d.len(), s);
    let mut pairs = Vec::new();
    for j in 0..d.len() {
        pairs.push((Vertex::Hole(j), Vertex::Outer));
        for k in j + 1..d.len() {
            pairs.push((Vertex::Hole(j), Vertex::Hole(k)));
        }
    }
    let plate = |v: Vertex| match v {
        Vertex::Hole(j) => Plate::hole(d.holes[j].clone()),
        Vertex::Outer => Plate::unit_complement(),
    };
    let mut to_solve = Vec::new();
    if pairs.len() <= MAX_CAPACITY_PAIRS {
        to_solve = pairs;
    } else {
        for (a, b) in pairs {
            let (pa, pb) = (plate(a), plate(b));
            let dist = pa.distance(&pb);
            let min_diam = pa.diameter().min(pb.diameter());
            let upper_excludes = dist > crate::capacity::separation_for_capacity(s) * min_diam;
            let lower_certifies = crate::capacity::lower_bound_capacity(min_diam / dist) >= s;
            if upper_excludes {
                continue;
            }
            if lower_certifies {
                g.add_edge(a, b);
            } else {
                to_solve.push((a, b));
            }
        }
        if to_solve.len() > MAX_CAPACITY_PAIRS {
            for (a, b) in to_solve.drain(..) {
                g.add_edge(a, b);
                g.unsolved_edges += 1;
            }
        }
    }
    let plates: Vec<(Plate, Plate)> = to_solve
        .iter()
        .map(|&(a, b)| (plate(a), plate(b)))
        .collect();
    for ((a, b), res) in to_solve.iter().zip(cap2_batch(&plates, n)) {
        let cap = res.map_err(|source| CriterionError::Capacity {
            first: *a,
            second: *b,
            source,
        })?;
        if cap.value >= s {
            g.add_edge(*a, *b);
        }
    }
    g.edges.sort();
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphMetrics {
    pub connected: bool,
    #[serde(with = "hops")]
    pub diameter: Option<usize>,
    #[serde(with = "hops")]
    pub max_dist_to_outer: Option<usize>,
}

/// Connectedness, hop diameter and largest hop distance to `OUTER`;
/// `None` stands for infinity.
pub fn graph_metrics(g: &HoleGraph) -> GraphMetrics {
    let mut diameter = Some(0);
    for v in g.vertices() {
        for d in g.bfs(v) {
            diameter = match (diameter, d) {
                (Some(a), Some(b)) => Some(a.max(b)),
                _ => None,
            };
        }
    }
    let to_outer = g.distances_to_outer();
    let max_dist_to_outer = to_outer.iter().try_fold(0, |m, d| d.map(|d| m.max(d)));
    GraphMetrics {
        connected: diameter.is_some(),
        diameter,
        max_dist_to_outer,
    }
}

/// `alpha -> sum_j dist(B_j, unit circle)^alpha`, keyed by the shortest
/// decimal form of `alpha`.
pub fn blaschke_sums(d: &DomainSpec, alphas: &[f64]) -> BTreeMap<String, f64> {
    alphas
        .iter()
        .map(|&a| {
            let sum = d
                .holes
                .iter()
                .map(|h| euclid_gap(Component::Hole(h), Component::Outer).powf(a))
                .sum();
            (format!("{a}"), sum)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub eps_min: f64,
    pub diamh_max: f64,
    /// `None` means `3 n_ulf + 3`.
    pub dist_max: Option<usize>,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            eps_min: 0.05,
            diamh_max: 5.0,
            dist_max: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSummary {
    #[serde(rename = "S")]
    pub s: f64,
    pub connected: bool,
    #[serde(with = "hops")]
    pub diameter: Option<usize>,
    #[serde(with = "hops")]
    pub max_dist_to_outer: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub n_ulf: usize,
    pub sup_diam_h: f64,
    #[serde(with = "inf_f64")]
    pub eps_weak: f64,
    #[serde(with = "inf_f64")]
    pub eps_strong: f64,
    pub graph: GraphSummary,
    pub blaschke: BTreeMap<String, f64>,
    pub verdict: bool,
}

impl CriterionReport {
    /// The individual conditions in order: uniform local finiteness,
    /// bounded hyperbolic diameters, weak separatedness, graph connectedness
    /// with bounded distance to `OUTER`.
    pub fn conditions(&self, t: &Thresholds) -> [bool; 4] {
        let dist_max = t.dist_max.unwrap_or(3 * self.n_ulf + 3);
        [
            true,
            self.sup_diam_h <= t.diamh_max,
            self.eps_weak >= t.eps_min,
            self.graph.connected && self.graph.max_dist_to_outer.is_some_and(|m| m <= dist_max),
        ]
    }
}

/// Evaluates all four conditions with the metric graph at parameter `s`.
pub fn full_criterion(
    d: &DomainSpec,
    s: f64,
    t: &Thresholds,
) -> Result<CriterionReport, CriterionError> {
    let n_ulf = ulf_constant(d)?.value();
    let sup_diam_h = sup_hyperbolic_diameter(d)?;
    let (eps_weak, eps_strong) = separatedness(d);
    let m = graph_metrics(&metric_graph(d, s)?);
    let mut report = CriterionReport {
        n_ulf,
        sup_diam_h,
        eps_weak,
        eps_strong,
        graph: GraphSummary {
            s,
            connected: m.connected,
            diameter: m.diameter,
            max_dist_to_outer: m.max_dist_to_outer,
        },
        blaschke: blaschke_sums(d, &[1.0, 2.0]),
        verdict: false,
    };
    report.verdict = report.conditions(t).iter().all(|&c| c);
    Ok(report)
}

/// Smallest `S` in `candidates` whose metric graph is connected.
pub fn smallest_connected_s(
    d: &DomainSpec,
    candidates: &[f64],
) -> Result<Option<f64>, CriterionError> {
    let mut sorted = candidates.to_vec();
    sorted.sort_by(f64::total_cmp);
    for s in sorted {
        if graph_metrics(&metric_graph(d, s)?).connected {
            return Ok(Some(s));
        }
    }
    Ok(None)
}

/// Free annulus `U_s(B_j) \ U_t(B_j)` about one hole.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Annulus {
    pub t: f64,
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderForest {
    pub c1: f64,
    pub c2: f64,
    /// `None` where no free interval exists.
    pub annuli: Vec<Option<Annulus>>,
    /// Pairs `(j', j)` with `B_j' < B_j`.
    pub relation: Vec<(usize, usize)>,
    /// Nearest ancestor of each non-maximal hole.
    pub parent: Vec<Option<usize>>,
    pub failures: Vec<usize>,
}

impl OrderForest {
    pub fn precedes(&self, a: usize, b: usize) -> bool {
        self.relation.contains(&(a, b))
    }

    pub fn ancestors(&self, j: usize) -> Vec<usize> {
        self.relation
            .iter()
            .filter(|(a, _)| *a == j)
            .map(|(_, b)| *b)
            .collect()
    }

    pub fn is_partial_order(&self) -> bool {
        let irreflexive = self.relation.iter().all(|(a, b)| a != b);
        let antisymmetric = self.relation.iter().all(|&(a, b)| !self.precedes(b, a));
        let transitive = self.relation.iter().all(|&(a, b)| {
            self.relation
                .iter()
                .filter(|(c, _)| *c == b)
                .all(|&(_, d)| self.precedes(a, d))
        });
        irreflexive && antisymmetric && transitive
    }

    /// Every set of ancestors is totally ordered.
    pub fn ancestors_are_chains(&self) -> bool {
        (0..self.parent.len()).all(|j| {
            let up = self.ancestors(j);
            up.iter().all(|&a| {
                up.iter()
                    .all(|&b| a == b || self.precedes(a, b) || self.precedes(b, a))
            })
        })
    }

    /// Ancestor edges form a forest: no cycles through parents.
    pub fn is_forest(&self) -> bool {
        (0..self.parent.len()).all(|start| {
            let mut seen = 0;
            let mut cur = self.parent[start];
            while let Some(p) = cur {
                if p == start || seen > self.parent.len() {
                    return false;
                }
                seen += 1;
                cur = self.parent[p];
            }
            true
        })
    }
}

/// `C(eps, k)` from the free-interval argument: `C(eps, 1) = 1 + 1/eps`,
/// `C(eps, k) = (1 + 1/eps)(C(eps, k - 1) + 1)`.
fn chain_constant(eps: f64, k: usize) -> f64 {
    let q = 1.0 + 1.0 / eps;
    (1..k).fold(q, |c, _| q * (c + 1.0))
}

/// `C2(eps, M) = 2 max_{k <= M} C(eps, k) + 3`.
pub fn wide_neighborhood_constant(eps: f64, m: usize) -> f64 {
    2.0 * chain_constant(eps, m.max(1)) + 3.0
}

/// Range `[min, max]` of `dist(., from)` over the hole `of`.
fn distance_image(from: &Hole, of: &Hole) -> (f64, f64) {
    let lo = euclid_gap(Component::Hole(from), Component::Hole(of));
    let hi = match (from, of) {
        (
            Hole::Disk {
                center: c1,
                radius: r1,
            },
            Hole::Disk {
                center: c2,
                radius: r2,
            },
        ) => c1.dist(*c2) + r2 - r1,
        _ => {
            let mut pts = of.boundary_samples(256);
            if let Hole::Polygon { vertices } = of {
                let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
                for v in vertices {
                    x0 = x0.min(v.x);
                    x1 = x1.max(v.x);
                    y0 = y0.min(v.y);
                    y1 = y1.max(v.y);
                }
                for a in 0..=32 {
                    for b in 0..=32 {
                        let p = Point::new(
                            x0 + (x1 - x0) * a as f64 / 32.0,
                            y0 + (y1 - y0) * b as f64 / 32.0,
                        );
                        if of.contains(p) {
                            pts.push(p);
                        }
                    }
                }
            }
            pts.iter().map(|&p| from.distance_to(p)).fold(lo, f64::max)
        }
    };
    (lo, hi.max(lo))
}

/// Partial order on holes from free annuli.
///
/// With `Lambda_j = diam B_j`, `c1` is taken just below
/// `min(c_h / 2, eps / 2, eps / (1 + C2))` where `c_h` keeps every
/// `U_{c_h Lambda_j}(B_j)` inside the unit disk, and `c2 = c1 / C2`. For each
/// hole the images `[t_k, s_k]` of nearby holes under `dist(., B_j)` are
/// scanned on `[0, c1 Lambda_j]` for the first free gap longer than
/// `c2 Lambda_j`; the annulus is centered in that gap. Then `B_j' < B_j` iff
/// `B_j'` lies in `U_{t_j}(B_j)`.
pub fn hole_order(d: &DomainSpec, eps: f64, m: usize) -> OrderForest {
    let n = d.len();
    let lambda: Vec<f64> = d.holes.iter().map(Hole::diameter).collect();
    let c_h = d
        .holes
        .iter()
        .zip(&lambda)
        .map(|(h, l)| euclid_gap(Component::Hole(h), Component::Outer) / l)
        .fold(f64::INFINITY, f64::min);
    let c2_factor = wide_neighborhood_constant(eps, m);
    let c1 = 0.9 * (c_h / 2.0).min(eps / 2.0).min(eps / (1.0 + c2_factor));
    let c2 = c1 / c2_factor;
    let mut annuli = vec![None; n];
    let mut failures = Vec::new();
    for j in 0..n {
        let reach = c1 * lambda[j];
        let mut images: Vec<(f64, f64)> = (0..n)
            .filter(|&k| k != j)
            .map(|k| distance_image(&d.holes[j], &d.holes[k]))
            .filter(|&(lo, _)| lo < reach)
            .collect();
        images.sort_by(|a, b| a.0.total_cmp(&b.0));
        let need = c2 * lambda[j];
        let mut start = 0.0;
        let mut found = None;
        for &(lo, hi) in images.iter().chain(std::iter::once(&(reach, reach))) {
            let end = lo.min(reach);
            if end - start > need {
                let t = start + 0.5 * (end - start - need);
                found = Some(Annulus { t, s: t + need });
                break;
            }
            start = start.max(hi);
            if start >= reach {
                break;
            }
        }
        match found {
            Some(a) => annuli[j] = Some(a),
            None => failures.push(j),
        }
    }
    let mut relation = Vec::new();
    for (j, a) in annuli.iter().enumerate() {
        let Some(a) = a else { continue };
        for k in 0..n {
            if k != j && distance_image(&d.holes[j], &d.holes[k]).1 <= a.t {
                relation.push((k, j));
            }
        }
    }
    relation.sort();
    let mut forest = OrderForest {
        c1,
        c2,
        annuli,
        relation,
        parent: vec![None; n],
        failures,
    };
    for j in 0..n {
        let up = forest.ancestors(j);
        // the nearest ancestor precedes every other ancestor
        forest.parent[j] = up
            .iter()
            .copied()
            .find(|&a| up.iter().all(|&b| b == a || forest.precedes(a, b)));
    }
    forest
}
