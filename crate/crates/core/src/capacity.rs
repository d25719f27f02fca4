//! Two-plate condenser capacity and the analytic bounds on it.
//!
//! `cap2(E1, E2)` is the minimal energy of a function equal to 1 on `E1` and
//! 0 on `E2`. When one plate contains the unit-disk complement the problem is
//! solved on `[-1, 1]^2`. Otherwise the plane is truncated to a square box
//! around the plates, [`PLANE_BOX_FACTOR`] times their half extent, with a
//! free (natural) edge.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fdsolver::{dirichlet_energy, Exterior, Grid, Solver, SolverError};
use crate::geometry::{euclid_gap, signed_gap, Component, Hole, MobiusMap, Point};
use crate::report::BoundReport;

pub const PLANE_BOX_FACTOR: f64 = 8.0;

/// Multiplicative slack on computed capacities in bound checks.
pub const CAP_SLACK: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CapacityError {
    #[error("plate is empty")]
    EmptyPlate,
    #[error("plates intersect")]
    Overlap,
    #[error("plates are at distance zero")]
    ZeroDistance,
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// The far plate of a condenser.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OuterPlate {
    /// The complement of the unit disk.
    UnitDisk,
    /// Complement of the open `distance`-neighborhood of a hole.
    Beyond { hole: Hole, distance: f64 },
}

/// A condenser plate: a union of holes, optionally with an outer region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plate {
    pub holes: Vec<Hole>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outer: Option<OuterPlate>,
}

impl Plate {
    pub fn hole(h: Hole) -> Plate {
        Plate {
            holes: vec![h],
            outer: None,
        }
    }

    pub fn holes(holes: Vec<Hole>) -> Plate {
        Plate { holes, outer: None }
    }

    pub fn unit_complement() -> Plate {
        Plate {
            holes: Vec::new(),
            outer: Some(OuterPlate::UnitDisk),
        }
    }

    pub fn with_unit_complement(mut self) -> Plate {
        self.outer = Some(OuterPlate::UnitDisk);
        self
    }

    pub fn is_empty(&self) -> bool {
        self.holes.is_empty() && self.outer.is_none()
    }

    /// Euclidean diameter; infinite when the plate has an outer part.
    pub fn diameter(&self) -> f64 {
        if self.outer.is_some() {
            return f64::INFINITY;
        }
        let mut d: f64 = 0.0;
        for (i, a) in self.holes.iter().enumerate() {
            d = d.max(a.diameter());
            for b in &self.holes[i + 1..] {
                d = d.max(farthest_between(a, b));
            }
        }
        d
    }

    /// Euclidean distance to another plate.
    pub fn distance(&self, other: &Plate) -> f64 {
        let mut d = f64::INFINITY;
        for a in &self.holes {
            for b in &other.holes {
                d = d.min(euclid_gap(Component::Hole(a), Component::Hole(b)));
            }
            if let Some(o) = &other.outer {
                d = d.min(hole_to_outer(a, o));
            }
        }
        if let Some(o) = &self.outer {
            for b in &other.holes {
                d = d.min(hole_to_outer(b, o));
            }
        }
        d
    }

    fn map(&self, m: &MobiusMap) -> Plate {
        Plate {
            holes: self
                .holes
                .iter()
                .map(|h| crate::geometry::apply_mobius_refined(m, h, 4).unwrap())
                .collect(),
            outer: self.outer.clone(),
        }
    }
}

impl fmt::Display for Plate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.holes.iter().map(|h| h.to_string()).collect();
        match &self.outer {
            Some(OuterPlate::UnitDisk) => parts.push("unit disk complement".into()),
            Some(OuterPlate::Beyond { distance, .. }) => {
                parts.push(format!("complement of {distance}-neighborhood"))
            }
            None => {}
        }
        write!(f, "{}", parts.join(" + "))
    }
}

fn hole_to_outer(h: &Hole, o: &OuterPlate) -> f64 {
    match o {
        OuterPlate::UnitDisk => euclid_gap(Component::Hole(h), Component::Outer),
        // only used with the hole the neighborhood is built around
        OuterPlate::Beyond { distance, .. } => *distance,
    }
}

fn farthest_between(a: &Hole, b: &Hole) -> f64 {
    match (a, b) {
        (
            Hole::Disk {
                center: c1,
                radius: r1,
            },
            Hole::Disk {
                center: c2,
                radius: r2,
            },
        ) => c1.dist(*c2) + r1 + r2,
        (Hole::Disk { center, radius }, other) | (other, Hole::Disk { center, radius }) => {
            other.farthest_distance(*center) + radius
        }
        (Hole::Polygon { vertices }, other) => vertices
            .iter()
            .map(|v| other.farthest_distance(*v))
            .fold(0.0, f64::max),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityResult {
    pub value: f64,
    pub grid_n: usize,
    pub h: f64,
    pub plates: [String; 2],
}

fn check_disjoint(e1: &Plate, e2: &Plate) -> Result<(), CapacityError> {
    if e1.is_empty() || e2.is_empty() {
        return Err(CapacityError::EmptyPlate);
    }
    if e1.outer.is_some() && e2.outer.is_some() {
        return Err(CapacityError::Overlap);
    }
    for a in &e1.holes {
        for b in &e2.holes {
            if signed_gap(a, b) <= 0.0 {
                return Err(CapacityError::Overlap);
            }
        }
    }
    for (p, q) in [(e1, e2), (e2, e1)] {
        if let Some(OuterPlate::UnitDisk) = &q.outer {
            if p.holes.iter().any(|h| h.max_norm() >= 1.0) {
                return Err(CapacityError::Overlap);
            }
        }
    }
    Ok(())
}

/// Computational box for a condenser. The plate carrying the outer part, if
/// any, must come second.
fn layout(e1: &Plate, e2: &Plate) -> (Point, f64, Exterior) {
    match &e2.outer {
        Some(OuterPlate::UnitDisk) => (Point::ORIGIN, 1.0, Exterior::UnitDisk),
        Some(OuterPlate::Beyond { hole, distance }) => {
            let (lo, hi) = bbox(
                e1.holes
                    .iter()
                    .chain(e2.holes.iter())
                    .chain(std::iter::once(hole)),
            );
            let c = (lo + hi) * 0.5;
            let half = 0.5 * (hi.x - lo.x).max(hi.y - lo.y) + distance;
            (
                c,
                half * 1.1,
                Exterior::Far {
                    hole: hole.clone(),
                    distance: *distance,
                },
            )
        }
        None => {
            let (c, half) = plane_box(e1.holes.iter().chain(e2.holes.iter()));
            (c, half, Exterior::None)
        }
    }
}

fn bbox<'a>(holes: impl Iterator<Item = &'a Hole>) -> (Point, Point) {
    let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for h in holes {
        let pts: Vec<Point> = match h {
            Hole::Disk { center, radius } => {
                vec![
                    *center - Point::new(*radius, *radius),
                    *center + Point::new(*radius, *radius),
                ]
            }
            Hole::Polygon { vertices } => vertices.clone(),
        };
        for p in pts {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
    }
    (lo, hi)
}

/// Discrete condenser capacity on an `n`-cell grid.
pub fn cap2(e1: &Plate, e2: &Plate, n: usize) -> Result<CapacityResult, CapacityError> {
    cap2_in_box(e1, e2, n, None)
}

/// Plane box `(center, half_width)` enclosing `holes` with the default margin.
pub fn plane_box<'a>(holes: impl IntoIterator<Item = &'a Hole>) -> (Point, f64) {
    let (lo, hi) = bbox(holes.into_iter());
    (
        (lo + hi) * 0.5,
        PLANE_BOX_FACTOR * 0.5 * (hi.x - lo.x).max(hi.y - lo.y),
    )
}

/// [`cap2`] with an explicit plane box, so several condensers can share one
/// grid. Ignored when a plate has an outer part.
pub fn cap2_in_box(
    e1: &Plate,
    e2: &Plate,
    n: usize,
    plane: Option<(Point, f64)>,
) -> Result<CapacityResult, CapacityError> {
    check_disjoint(e1, e2)?;
    // u -> 1 - u swaps the plates without changing the energy
    let (a, b) = if e1.outer.is_some() {
        (e2, e1)
    } else {
        (e1, e2)
    };
    let (mut center, mut half, exterior) = layout(a, b);
    if let (Some((c, w)), Exterior::None) = (plane, &exterior) {
        center = c;
        half = w;
    }
    let holes: Vec<&Hole> = a.holes.iter().chain(b.holes.iter()).collect();
    let grid = Arc::new(Grid::build(&holes, exterior, center, half, n)?);
    let mut values = vec![1.0; a.holes.len()];
    values.resize(holes.len(), 0.0);
    let field = Solver::new(grid.clone()).solve(&values, 0.0)?;
    Ok(CapacityResult {
        value: dirichlet_energy(&field),
        grid_n: n,
        h: grid.h(),
        plates: [e1.to_string(), e2.to_string()],
    })
}

/// Parallel batch of capacities; results keep the input order.
pub fn cap2_batch(
    pairs: &[(Plate, Plate)],
    n: usize,
) -> Vec<Result<CapacityResult, CapacityError>> {
    pairs.par_iter().map(|(a, b)| cap2(a, b, n)).collect()
}

/// Closed form for two disjoint disks of radius `r` with centers `d` apart.
pub fn two_equal_disks(r: f64, d: f64) -> f64 {
    PI / (d / (2.0 * r)).acosh()
}

/// Closed form for a disk of radius `r` inside a concentric circle of radius `big`.
pub fn concentric(r: f64, big: f64) -> f64 {
    2.0 * PI / (big / r).ln()
}

/// Smallest capacity compatible with `min diam / dist = ratio`.
pub fn lower_bound_capacity(ratio: f64) -> f64 {
    (PI * ratio + 1.0).ln() / (24.0 * PI)
}

/// `pi (1 + 2 eps)^2 / eps^2`.
pub fn upper_bound_value(eps: f64) -> f64 {
    PI * (1.0 + 2.0 * eps).powi(2) / (eps * eps)
}

/// Largest gap-to-diameter ratio a capacity `s` can coexist with, obtained
/// by inverting [`upper_bound_value`]: edges of the capacity graph satisfy
/// `dist <= F(s) min diam`.
pub fn separation_for_capacity(s: f64) -> f64 {
    // pi (1 + 2e)^2 / e^2 = s  <=>  (1/e + 2)^2 = s / pi
    let root = (s / PI).sqrt();
    if root <= 2.0 {
        f64::INFINITY
    } else {
        1.0 / (root - 2.0)
    }
}

/// Checks `min diam / dist <= (exp(24 pi cap) - 1) / pi`.
///
/// Compared in logarithmic form, `ln(1 + pi * ratio) <= 24 pi cap (1 + slack)`,
/// since the right side overflows for moderate capacities. `lhs` and `rhs`
/// of the report are these logarithms.
pub fn check_lower_bound(
    e1: &Plate,
    e2: &Plate,
    cap: &CapacityResult,
) -> Result<BoundReport, CapacityError> {
    if e1.is_empty() || e2.is_empty() {
        return Err(CapacityError::EmptyPlate);
    }
    let dist = e1.distance(e2);
    if dist <= 0.0 {
        return Err(CapacityError::ZeroDistance);
    }
    let ratio = e1.diameter().min(e2.diameter()) / dist;
    let lhs = (PI * ratio).ln_1p();
    let rhs = 24.0 * PI * cap.value * (1.0 + CAP_SLACK);
    Ok(BoundReport::le("capacity lower bound", lhs, rhs)
        .with_detail(format!("min diam / dist = {ratio}, cap = {}", cap.value)))
}

/// Capacity of `e` against the complement of its `eps * diam e`
/// neighborhood, checked against `pi (1 + 2 eps)^2 / eps^2`.
pub fn check_upper_bound(
    e: &Hole,
    eps: f64,
    n: usize,
) -> Result<(BoundReport, CapacityResult), CapacityError> {
    let distance = eps * e.diameter();
    let outer = Plate {
        holes: vec![],
        outer: Some(OuterPlate::Beyond {
            hole: e.clone(),
            distance,
        }),
    };
    let cap = cap2(&Plate::hole(e.clone()), &outer, n)?;
    let bound = upper_bound_value(eps);
    let report = BoundReport::le("capacity upper bound", cap.value, bound * (1.0 + CAP_SLACK))
        .with_detail(format!("eps = {eps}, bound = {bound}"));
    Ok((report, cap))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomRow {
    pub symmetry_rel_diff: f64,
    pub symmetric: bool,
    pub monotone: Option<bool>,
    pub semiadditive: bool,
    pub cap_12: f64,
    pub cap_13: f64,
    pub cap_1_23: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub rows: Vec<AxiomRow>,
}

impl AxiomReport {
    pub fn holds(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.symmetric && r.monotone != Some(false) && r.semiadditive)
    }
}

/// Symmetry, monotonicity under a 20% enlargement of a disk `E2`, and
/// semiadditivity `cap(E1, E2 u E3) <= cap(E1, E2) + cap(E1, E3)` for each
/// triple of pairwise disjoint holes.
pub fn check_cap_axioms(
    samples: &[(Hole, Hole, Hole)],
    n: usize,
) -> Result<AxiomReport, CapacityError> {
    let rows = samples
        .par_iter()
        .map(|(e1, e2, e3)| -> Result<AxiomRow, CapacityError> {
            let (p1, p2, p3) = (
                Plate::hole(e1.clone()),
                Plate::hole(e2.clone()),
                Plate::hole(e3.clone()),
            );
            let bigger = match e2 {
                Hole::Disk { center, radius } => {
                    Some(Hole::disk(*center, radius * 1.2).expect("radius stays positive"))
                }
                Hole::Polygon { .. } => None,
            };
            let area = Some(plane_box([e1, e2, e3].into_iter().chain(bigger.as_ref())));
            let cap = |a: &Plate, b: &Plate| cap2_in_box(a, b, n, area).map(|c| c.value);
            let c12 = cap(&p1, &p2)?;
            let c21 = cap(&p2, &p1)?;
            let c13 = cap(&p1, &p3)?;
            let c123 = cap(&p1, &Plate::holes(vec![e2.clone(), e3.clone()]))?;
            let sym = (c12 - c21).abs() / c12;
            let monotone = match bigger {
                Some(b) if signed_gap(e1, &b) > 0.0 && signed_gap(e3, &b) > 0.0 => {
                    Some(cap(&p1, &Plate::hole(b))? >= c12 * (1.0 - 0.01))
                }
                _ => None,
            };
            Ok(AxiomRow {
                symmetry_rel_diff: sym,
                symmetric: sym <= 0.01,
                monotone,
                semiadditive: c123 <= (c12 + c13) * (1.0 + CAP_SLACK),
                cap_12: c12,
                cap_13: c13,
                cap_1_23: c123,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(AxiomReport { rows })
}

/// Relative change of `cap2(e1, e2)` under a disk automorphism, checked
/// against 3%.
pub fn check_conformal_invariance(
    e1: &Plate,
    e2: &Plate,
    m: &MobiusMap,
    n: usize,
) -> Result<BoundReport, CapacityError> {
    let before = cap2(e1, e2, n)?.value;
    let after = cap2(&e1.map(m), &e2.map(m), n)?.value;
    let rel = (after - before).abs() / before;
    Ok(BoundReport::le("capacity conformal invariance", rel, 0.03)
        .with_detail(format!("before = {before}, after = {after}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn disk(x: f64, y: f64, r: f64) -> Hole {
        Hole::disk(Point::new(x, y), r).unwrap()
    }

    #[test]
    fn annulus_capacity() {
        let c = cap2(
            &Plate::hole(disk(0.0, 0.0, 0.5)),
            &Plate::unit_complement(),
            1024,
        )
        .unwrap();
        let exact = 2.0 * PI / 2f64.ln();
        assert!((c.value - exact).abs() / exact < 0.02, "{}", c.value);
    }

    #[test]
    fn plates_commute() {
        let a = Plate::hole(disk(0.2, 0.1, 0.15));
        let o = Plate::unit_complement();
        let x = cap2(&a, &o, 256).unwrap().value;
        let y = cap2(&o, &a, 256).unwrap().value;
        assert_eq!(x, y);
        let b = Plate::hole(disk(-0.3, 0.0, 0.1));
        let x = cap2(&a, &b, 256).unwrap().value;
        let y = cap2(&b, &a, 256).unwrap().value;
        assert!((x - y).abs() / x < 1e-8);
    }

    #[test]
    fn two_disks_match_closed_form() {
        let (r, d) = (0.1, 0.5);
        let c = cap2(
            &Plate::hole(disk(-d / 2.0, 0.0, r)),
            &Plate::hole(disk(d / 2.0, 0.0, r)),
            1024,
        )
        .unwrap();
        let exact = two_equal_disks(r, d);
        assert!(
            (c.value - exact).abs() / exact < 0.03,
            "{} vs {exact}",
            c.value
        );
    }

    #[test]
    fn far_tiny_disks_respect_corollary() {
        // gap = 10 diam
        let (r, gap) = (0.01, 0.2);
        let c = cap2(
            &Plate::hole(disk(0.0, 0.0, r)),
            &Plate::hole(disk(2.0 * r + gap, 0.0, r)),
            512,
        )
        .unwrap();
        let bound = upper_bound_value(10.0);
        assert_relative_eq!(bound, PI * 4.41, epsilon = 1e-12);
        assert!(c.value <= bound * (1.0 + CAP_SLACK));
        let exact = two_equal_disks(r, 2.0 * r + gap);
        assert!(
            (c.value - exact).abs() / exact < 0.05,
            "{} vs {exact}",
            c.value
        );
    }

    #[test]
    fn lower_bound_examples() {
        let a = Plate::hole(disk(0.0, 0.0, 0.5));
        let o = Plate::unit_complement();
        let cap = cap2(&a, &o, 256).unwrap();
        let r = check_lower_bound(&a, &o, &cap).unwrap();
        assert!(r.holds);
        assert_relative_eq!(r.lhs, (2.0 * PI).ln_1p(), epsilon = 1e-12);

        assert_relative_eq!(
            lower_bound_capacity(200.0),
            (200.0 * PI + 1.0).ln() / (24.0 * PI),
            epsilon = 1e-15
        );
        assert!((lower_bound_capacity(200.0) - 0.0856).abs() < 2e-4);
        let e1 = Plate::hole(disk(-0.1005, 0.0, 0.1));
        let e2 = Plate::hole(disk(0.1005, 0.0, 0.1));
        assert_relative_eq!(e1.distance(&e2), 1e-3, epsilon = 1e-12);
        let cap = cap2(&e1, &e2, 1024).unwrap();
        assert!(cap.value >= 0.0856 * 0.95);
        assert!(check_lower_bound(&e1, &e2, &cap).unwrap().holds);

        let empty = Plate::holes(vec![]);
        assert_eq!(
            check_lower_bound(&empty, &e2, &cap),
            Err(CapacityError::EmptyPlate)
        );
    }

    #[test]
    fn upper_bound_examples() {
        assert_relative_eq!(upper_bound_value(1.0), 9.0 * PI, epsilon = 1e-12);
        assert_relative_eq!(upper_bound_value(0.5), 16.0 * PI, epsilon = 1e-12);
        let e = disk(0.0, 0.0, 0.1);
        let mut last = f64::INFINITY;
        for eps in [0.5, 1.0, 2.0, 4.0] {
            let (rep, cap) = check_upper_bound(&e, eps, 512).unwrap();
            assert!(rep.holds, "{rep:?}");
            let exact = concentric(0.1, 0.1 + 0.2 * eps);
            assert!(
                (cap.value - exact).abs() / exact < 0.03,
                "eps {eps}: {} vs {exact}",
                cap.value
            );
            assert!(cap.value < last);
            last = cap.value;
        }
    }

    #[test]
    fn axioms_on_disk_triple() {
        let t = (
            disk(0.0, 0.0, 0.1),
            disk(0.4, 0.0, 0.1),
            disk(-0.1, 0.4, 0.08),
        );
        let rep = check_cap_axioms(&[t], 256).unwrap();
        assert!(rep.holds(), "{rep:?}");
        assert_eq!(rep.rows[0].monotone, Some(true));
    }

    #[test]
    fn conformal_invariance_examples() {
        let a = Plate::hole(disk(0.0, 0.0, 0.5));
        let o = Plate::unit_complement();
        let id = check_conformal_invariance(&a, &o, &MobiusMap::identity(), 256).unwrap();
        assert_eq!(id.lhs, 0.0);
        let rot = check_conformal_invariance(
            &Plate::hole(disk(0.3, 0.0, 0.2)),
            &o,
            &MobiusMap::rotation(PI),
            256,
        )
        .unwrap();
        assert!(rot.lhs < 1e-9, "{rot:?}");
        let shifted = check_conformal_invariance(
            &a,
            &o,
            &MobiusMap::new(Point::new(0.4, 0.0), 0.0).unwrap(),
            1024,
        )
        .unwrap();
        assert!(shifted.holds, "{shifted:?}");
    }

    #[test]
    fn overlapping_plates_are_rejected() {
        let a = Plate::hole(disk(0.0, 0.0, 0.3));
        let b = Plate::hole(disk(0.25, 0.0, 0.1));
        assert_eq!(cap2(&a, &b, 128), Err(CapacityError::Overlap));
        assert_eq!(
            cap2(&Plate::unit_complement(), &Plate::unit_complement(), 128),
            Err(CapacityError::Overlap)
        );
    }

    #[test]
    fn separation_inverse_roundtrip() {
        for eps in [0.1, 0.5, 1.0, 3.0] {
            assert_relative_eq!(
                separation_for_capacity(upper_bound_value(eps)),
                eps,
                epsilon = 1e-12
            );
        }
        assert!(separation_for_capacity(4.0 * PI).is_infinite());
    }
}
