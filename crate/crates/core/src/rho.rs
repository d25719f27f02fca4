//! The degenerate metric with density 1 on the domain and 0 on the holes and
//! outside the unit disk, and its distance `u` from the exterior.
//!
//! `u` is constant on each hole. It is computed exactly by a shortest path
//! over the complete graph on the holes plus `OUTER`, with edge weight the
//! Euclidean gap between the two sets.
//!
//! Lower bound: a path from `B_j` to the exterior is cut at the moments it
//! enters a new complementary component. Each piece starts on one component
//! and ends on the next, so its length in the domain is at least the gap
//! between them; the path's cost is at least the cost of the chain of
//! components it visits.
//!
//! Upper bound: for any chain of components, join consecutive members by a
//! closest-point segment. A segment's cost is at most its length, which is
//! the gap, and moving inside a hole is free because holes are connected.
//!
//! So the graph distance equals the metric distance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::domain::DomainSpec;
use crate::geometry::{euclid_gap, Component, Hole, Point};
use crate::report::BoundReport;
use crate::riesz::RieszConstants;

/// Inflation of the weak Bessel constant in [`check_rho_lower_bound`].
pub const BESSEL_INFLATION: f64 = 1.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoResult {
    pub u: Vec<f64>,
    /// Next component on an optimal chain; `None` is `OUTER`.
    #[serde(with = "crate::serde_util::chain")]
    pub chain: Vec<Option<usize>>,
}

#[derive(Clone, Copy, PartialEq)]
struct Entry {
    dist: f64,
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Exact `u` on every hole via Dijkstra from `OUTER` on the gap graph.
pub fn rho_distances(d: &DomainSpec) -> RhoResult {
    let n = d.len();
    let mut u = vec![f64::INFINITY; n];
    let mut chain = vec![None; n];
    let mut done = vec![false; n];
    for (j, h) in d.holes.iter().enumerate() {
        u[j] = euclid_gap(Component::Hole(h), Component::Outer);
    }
    // dense Dijkstra: the graph is complete
    for _ in 0..n {
        let Some(j) = (0..n)
            .filter(|&j| !done[j])
            .min_by(|&a, &b| u[a].total_cmp(&u[b]).then(a.cmp(&b)))
        else {
            break;
        };
        done[j] = true;
        for k in 0..n {
            if !done[k] {
                let via =
                    u[j] + euclid_gap(Component::Hole(&d.holes[j]), Component::Hole(&d.holes[k]));
                if via < u[k] {
                    u[k] = via;
                    chain[k] = Some(j);
                }
            }
        }
    }
    RhoResult { u, chain }
}

/// Pixel distance field from the brute-force oracle.
#[derive(Debug, Clone)]
pub struct PixelField {
    pub n: usize,
    pub dist: Vec<f64>,
}

impl PixelField {
    pub fn h(&self) -> f64 {
        2.0 / self.n as f64
    }

    pub fn node(&self, i: usize, j: usize) -> Point {
        Point::new(-1.0 + i as f64 * self.h(), -1.0 + j as f64 * self.h())
    }

    /// Value at the grid node nearest to `p`.
    pub fn at(&self, p: Point) -> f64 {
        let side = self.n + 1;
        let idx =
            |x: f64| (((x + 1.0) / self.h()).round() as isize).clamp(0, self.n as isize) as usize;
        self.dist[idx(p.y) * side + idx(p.x)]
    }
}

/// 8-connected Dijkstra on the `(n+1)^2` nodes of `[-1, 1]^2`. A step costs
/// its length when its midpoint lies in the domain and nothing otherwise;
/// nodes outside the open unit disk are sources.
pub fn rho_pixel_field(d: &DomainSpec, n: usize) -> PixelField {
    rho_pixel_field_with(d, n, 1)
}

/// Steps `(di, dj)` with `max(|di|, |dj|) <= reach` and coprime entries.
fn stencil(reach: usize) -> Vec<(isize, isize)> {
    fn gcd(a: isize, b: isize) -> isize {
        if b == 0 {
            a.abs()
        } else {
            gcd(b, a % b)
        }
    }
    let r = reach as isize;
    let mut out = Vec::new();
    for dj in -r..=r {
        for di in -r..=r {
            if (di, dj) != (0, 0) && gcd(di, dj) == 1 {
                out.push((di, dj));
            }
        }
    }
    out
}

/// [`rho_pixel_field`] with every primitive step of Chebyshev length up to
/// `reach`. A step of Chebyshev length `k` is split into `k` equal pieces,
/// each costed by its midpoint. Reach 1 is the 8-connected field, with
/// metric distortion up to 1.0824; reach 3 has 32 directions and distortion
/// up to 1.0131.
pub fn rho_pixel_field_with(d: &DomainSpec, n: usize, reach: usize) -> PixelField {
    assert!(reach >= 1, "stencil reach must be positive");
    let side = n + 1;
    let h = 2.0 / n as f64;
    let point = |i: isize, j: isize| Point::new(-1.0 + i as f64 * h, -1.0 + j as f64 * h);
    let in_domain = |p: Point| p.norm() < 1.0 && !d.holes.iter().any(|hole| hole.contains(p));
    let mut dist = vec![f64::INFINITY; side * side];
    let mut heap = BinaryHeap::new();
    for j in 0..side {
        for i in 0..side {
            if point(i as isize, j as isize).norm() >= 1.0 {
                dist[j * side + i] = 0.0;
                heap.push(Entry {
                    dist: 0.0,
                    node: j * side + i,
                });
            }
        }
    }
    let steps = stencil(reach);
    while let Some(Entry { dist: du, node }) = heap.pop() {
        if du > dist[node] {
            continue;
        }
        let (i, j) = ((node % side) as isize, (node / side) as isize);
        let here = point(i, j);
        for &(di, dj) in &steps {
            let (ni, nj) = (i + di, j + dj);
            if ni < 0 || nj < 0 || ni >= side as isize || nj >= side as isize {
                continue;
            }
            let k = di.abs().max(dj.abs());
            let piece = h * ((di * di + dj * dj) as f64).sqrt() / k as f64;
            let step = (point(ni, nj) - here) * (1.0 / k as f64);
            let inside = (0..k)
                .filter(|&m| in_domain(here + step * (m as f64 + 0.5)))
                .count();
            let cost = piece * inside as f64;
            let next = nj as usize * side + ni as usize;
            if du + cost < dist[next] {
                dist[next] = du + cost;
                heap.push(Entry {
                    dist: du + cost,
                    node: next,
                });
            }
        }
    }
    PixelField { n, dist }
}

fn hole_value(field: &PixelField, hole: &Hole) -> f64 {
    let side = field.n + 1;
    let mut best = f64::INFINITY;
    for j in 0..side {
        for i in 0..side {
            if hole.contains(field.node(i, j)) {
                best = best.min(field.dist[j * side + i]);
            }
        }
    }
    if best.is_finite() {
        best
    } else {
        field.at(hole.anchor())
    }
}

/// Oracle for [`rho_distances`] on the 8-connected field. It exceeds the
/// metric distance by at most the stencil distortion plus grid effects.
pub fn rho_pixel_oracle(d: &DomainSpec, n: usize) -> RhoResult {
    rho_pixel_oracle_with(d, n, 1)
}

/// [`rho_pixel_oracle`] on the field of [`rho_pixel_field_with`].
pub fn rho_pixel_oracle_with(d: &DomainSpec, n: usize, reach: usize) -> RhoResult {
    assert!(n <= 2048, "pixel oracle grid is limited to 2048");
    let field = rho_pixel_field_with(d, n, reach);
    RhoResult {
        u: d.holes.iter().map(|h| hole_value(&field, h)).collect(),
        chain: vec![None; d.len()],
    }
}

/// `u|B_j >= exp(-2 pi c~^2) / 2 * dist(B_j, unit circle)` on every hole,
/// with `c~` the weak Bessel constant inflated by [`BESSEL_INFLATION`].
/// Reports the hole with the smallest ratio of `u` to the bound.
pub fn check_rho_lower_bound(d: &DomainSpec, rho: &RhoResult, c_b_weak: f64) -> BoundReport {
    let c = c_b_weak * BESSEL_INFLATION;
    let factor = (-2.0 * std::f64::consts::PI * c * c).exp() / 2.0;
    let mut worst: Option<(usize, f64, f64)> = None;
    for (j, h) in d.holes.iter().enumerate() {
        let bound = factor * euclid_gap(Component::Hole(h), Component::Outer);
        let ratio = rho.u[j] / bound;
        if worst.is_none_or(|(_, b, u)| ratio < u / b) {
            worst = Some((j, bound, rho.u[j]));
        }
    }
    match worst {
        Some((j, bound, u)) => BoundReport::le("rho lower bound", bound, u)
            .with_detail(format!("tightest at hole {j}")),
        None => BoundReport::le("rho lower bound", 0.0, 0.0),
    }
}

/// `sum_j dist(B_j, unit circle)^2 <= 4 pi c_i^2 exp(4 pi c_b_weak^2)`,
/// compared as logarithms.
pub fn check_dist_sq_budget(d: &DomainSpec, consts: &RieszConstants) -> BoundReport {
    let sum: f64 = d
        .holes
        .iter()
        .map(|h| euclid_gap(Component::Hole(h), Component::Outer).powi(2))
        .sum();
    let pi = std::f64::consts::PI;
    let rhs =
        (4.0 * pi * consts.c_i * consts.c_i).ln() + 4.0 * pi * consts.c_b_weak * consts.c_b_weak;
    BoundReport::le("dist^2 budget (log)", sum.ln(), rhs).with_detail(format!("sum = {sum}"))
}
