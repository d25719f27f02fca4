//! Planar and hyperbolic-disk primitives.
//!
//! Hyperbolic distances use `arctanh` of the pseudo-hyperbolic distance, so
//! the hyperbolic ball of radius 1 about the origin is the Euclidean disk of
//! radius `tanh 1`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised by geometric constructors and maps.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("disk radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon is not simple")]
    SelfIntersecting,
    #[error("polygon has zero area")]
    ZeroArea,
    #[error("point or set not strictly inside the unit disk (|z| = {0})")]
    OutsideUnitDisk(f64),
    #[error("the pole of the map lies inside the hole")]
    PoleInsideHole,
    #[error("Möbius parameter z0 must satisfy |z0| < 1, got {0}")]
    InvalidMap(f64),
}

/// A point of the plane, serialized as `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl From<[f64; 2]> for Point {
    fn from(v: [f64; 2]) -> Self {
        Point { x: v[0], y: v[1] }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl From<Complex64> for Point {
    fn from(z: Complex64) -> Self {
        Point { x: z.re, y: z.im }
    }
}

impl From<Point> for Complex64 {
    fn from(p: Point) -> Self {
        Complex64::new(p.x, p.y)
    }
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn polar(r: f64, theta: f64) -> Self {
        Point::new(r * theta.cos(), r * theta.sin())
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Rotation about the origin.
    pub fn rotate(self, theta: f64) -> Point {
        let (s, c) = theta.sin_cos();
        Point::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

impl std::ops::Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl std::ops::Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// One bounded complementary component of the domain.
///
/// Polygons are stored counterclockwise; the constructor reorients clockwise
/// input. Containment in the unit disk is a property of the domain, not of
/// the hole, since inversions legitimately produce holes outside it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", try_from = "HoleRepr")]
pub enum Hole {
    Disk { center: Point, radius: f64 },
    Polygon { vertices: Vec<Point> },
}

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum HoleRepr {
    Disk { center: Point, radius: f64 },
    Polygon { vertices: Vec<Point> },
}

impl TryFrom<HoleRepr> for Hole {
    type Error = GeometryError;
    fn try_from(r: HoleRepr) -> Result<Self, Self::Error> {
        match r {
            HoleRepr::Disk { center, radius } => Hole::disk(center, radius),
            HoleRepr::Polygon { vertices } => Hole::polygon(vertices),
        }
    }
}

impl Hole {
    pub fn disk(center: Point, radius: f64) -> Result<Hole, GeometryError> {
        if !center.is_finite() || !radius.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        if radius <= 0.0 {
            return Err(GeometryError::NonPositiveRadius(radius));
        }
        Ok(Hole::Disk { center, radius })
    }

    pub fn polygon(mut vertices: Vec<Point>) -> Result<Hole, GeometryError> {
        if vertices.len() < 3 {
            return Err(GeometryError::TooFewVertices(vertices.len()));
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let area = signed_area(&vertices);
        let scale = vertices.iter().map(|v| v.norm()).fold(1e-300, f64::max);
        if area.abs() <= 1e-14 * scale * scale {
            return Err(GeometryError::ZeroArea);
        }
        if !is_simple(&vertices) {
            return Err(GeometryError::SelfIntersecting);
        }
        if area < 0.0 {
            vertices.reverse();
        }
        Ok(Hole::Polygon { vertices })
    }

    /// Axis-aligned square `[cx - a, cx + a] x [cy - a, cy + a]`.
    pub fn square(center: Point, half_side: f64) -> Result<Hole, GeometryError> {
        let a = half_side;
        Hole::polygon(vec![
            center + Point::new(-a, -a),
            center + Point::new(a, -a),
            center + Point::new(a, a),
            center + Point::new(-a, a),
        ])
    }

    pub fn is_disk(&self) -> bool {
        matches!(self, Hole::Disk { .. })
    }

    /// Closed-set membership.
    pub fn contains(&self, p: Point) -> bool {
        match self {
            Hole::Disk { center, radius } => {
                let dx = p.x - center.x;
                let dy = p.y - center.y;
                dx * dx + dy * dy <= radius * radius
            }
            Hole::Polygon { vertices } => polygon_contains(vertices, p),
        }
    }

    /// Euclidean distance from a point to the hole (0 inside).
    pub fn distance_to(&self, p: Point) -> f64 {
        match self {
            Hole::Disk { center, radius } => (p.dist(*center) - radius).max(0.0),
            Hole::Polygon { vertices } => {
                if polygon_contains(vertices, p) {
                    0.0
                } else {
                    polygon_boundary_distance(vertices, p)
                }
            }
        }
    }

    /// Largest distance from a point to the hole.
    pub fn farthest_distance(&self, p: Point) -> f64 {
        match self {
            Hole::Disk { center, radius } => p.dist(*center) + radius,
            Hole::Polygon { vertices } => vertices.iter().map(|v| v.dist(p)).fold(0.0, f64::max),
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Hole::Disk { radius, .. } => 2.0 * radius,
            Hole::Polygon { vertices } => {
                let mut d: f64 = 0.0;
                for (i, a) in vertices.iter().enumerate() {
                    for b in &vertices[i + 1..] {
                        d = d.max(a.dist(*b));
                    }
                }
                d
            }
        }
    }

    /// `max |z|` over the hole.
    pub fn max_norm(&self) -> f64 {
        match self {
            Hole::Disk { center, radius } => center.norm() + radius,
            Hole::Polygon { vertices } => vertices.iter().map(|v| v.norm()).fold(0.0, f64::max),
        }
    }

    /// `min |z|` over the hole (0 when the hole contains the origin).
    pub fn min_norm(&self) -> f64 {
        self.distance_to(Point::ORIGIN)
    }

    pub fn area(&self) -> f64 {
        match self {
            Hole::Disk { radius, .. } => PI * radius * radius,
            Hole::Polygon { vertices } => signed_area(vertices).abs(),
        }
    }

    /// Disk center or polygon vertex centroid; used for drawing and labels.
    pub fn anchor(&self) -> Point {
        match self {
            Hole::Disk { center, .. } => *center,
            Hole::Polygon { vertices } => {
                let n = vertices.len() as f64;
                let s = vertices.iter().fold(Point::ORIGIN, |acc, v| acc + *v);
                s * (1.0 / n)
            }
        }
    }

    /// `count` boundary points, equally spaced in arc length.
    pub fn boundary_samples(&self, count: usize) -> Vec<Point> {
        match self {
            Hole::Disk { center, radius } => (0..count)
                .map(|k| *center + Point::polar(*radius, 2.0 * PI * k as f64 / count as f64))
                .collect(),
            Hole::Polygon { vertices } => {
                let perimeter = polygon_perimeter(vertices);
                (0..count)
                    .map(|k| polygon_point_at(vertices, perimeter * k as f64 / count as f64))
                    .collect()
            }
        }
    }

    /// Translated copy.
    pub fn translated(&self, by: Point) -> Hole {
        match self {
            Hole::Disk { center, radius } => Hole::Disk {
                center: *center + by,
                radius: *radius,
            },
            Hole::Polygon { vertices } => Hole::Polygon {
                vertices: vertices.iter().map(|v| *v + by).collect(),
            },
        }
    }

    /// Copy scaled about its anchor.
    pub fn scaled(&self, factor: f64) -> Hole {
        match self {
            Hole::Disk { center, radius } => Hole::Disk {
                center: *center,
                radius: radius * factor,
            },
            Hole::Polygon { vertices } => {
                let a = self.anchor();
                Hole::Polygon {
                    vertices: vertices.iter().map(|v| a + (*v - a) * factor).collect(),
                }
            }
        }
    }
}

impl fmt::Display for Hole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hole::Disk { center, radius } => write!(f, "disk(c={center}, r={radius})"),
            Hole::Polygon { vertices } => write!(f, "polygon({} vertices)", vertices.len()),
        }
    }
}

/// A complementary component: a hole or the exterior of the unit disk.
#[derive(Debug, Clone, Copy)]
pub enum Component<'a> {
    Hole(&'a Hole),
    Outer,
}

/// Euclidean distance between two complementary components.
///
/// Overlapping sets report 0; [`signed_gap`] keeps the sign for disks.
pub fn euclid_gap(a: Component<'_>, b: Component<'_>) -> f64 {
    match (a, b) {
        (Component::Outer, Component::Outer) => 0.0,
        (Component::Hole(h), Component::Outer) | (Component::Outer, Component::Hole(h)) => {
            (1.0 - h.max_norm()).max(0.0)
        }
        (Component::Hole(p), Component::Hole(q)) => hole_gap(p, q).max(0.0),
    }
}

/// Gap between holes; negative for overlapping disks (depth of overlap),
/// 0 for any other intersecting pair.
pub fn signed_gap(a: &Hole, b: &Hole) -> f64 {
    hole_gap(a, b)
}

fn hole_gap(a: &Hole, b: &Hole) -> f64 {
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
        ) => c1.dist(*c2) - r1 - r2,
        (Hole::Disk { center, radius }, poly @ Hole::Polygon { .. })
        | (poly @ Hole::Polygon { .. }, Hole::Disk { center, radius }) => {
            (poly.distance_to(*center) - radius).max(0.0)
        }
        (Hole::Polygon { vertices: p }, Hole::Polygon { vertices: q }) => {
            if polygon_contains(p, q[0]) || polygon_contains(q, p[0]) {
                return 0.0;
            }
            let mut best = f64::INFINITY;
            for i in 0..p.len() {
                let (a0, a1) = (p[i], p[(i + 1) % p.len()]);
                for j in 0..q.len() {
                    let (b0, b1) = (q[j], q[(j + 1) % q.len()]);
                    if segments_intersect(a0, a1, b0, b1) {
                        return 0.0;
                    }
                    best = best
                        .min(point_segment_distance(a0, b0, b1))
                        .min(point_segment_distance(a1, b0, b1))
                        .min(point_segment_distance(b0, a0, a1))
                        .min(point_segment_distance(b1, a0, a1));
                }
            }
            best
        }
    }
}

/// Pseudo-hyperbolic distance `|(z1 - z2) / (1 - z1 conj(z2))|`.
pub fn pseudo_hyperbolic(z1: Point, z2: Point) -> Result<f64, GeometryError> {
    for z in [z1, z2] {
        if !z.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        if z.norm() >= 1.0 {
            return Err(GeometryError::OutsideUnitDisk(z.norm()));
        }
    }
    let a = Complex64::from(z1);
    let b = Complex64::from(z2);
    Ok(((a - b) / (1.0 - a * b.conj())).norm())
}

/// Hyperbolic distance between two points of the unit disk.
pub fn hyperbolic_distance(z1: Point, z2: Point) -> Result<f64, GeometryError> {
    let p = pseudo_hyperbolic(z1, z2)?;
    Ok(p.min(1.0 - f64::EPSILON).atanh())
}

/// Hyperbolic distance from a point to a hole (0 when inside).
pub fn hyperbolic_distance_to_hole(z: Point, hole: &Hole) -> Result<f64, GeometryError> {
    if hole.max_norm() >= 1.0 {
        return Err(GeometryError::OutsideUnitDisk(hole.max_norm()));
    }
    if hole.contains(z) {
        return Ok(0.0);
    }
    // Send z to the origin; the distance is arctanh of the nearest image point.
    let m = MobiusMap::new(z, 0.0)?;
    let image = apply_mobius_refined(&m, hole, 16)?;
    Ok(image.min_norm().min(1.0 - f64::EPSILON).atanh())
}

/// Points `a` and `b` where the line through the origin and the disk center
/// meets the circle, as signed coordinates along the unit direction `u`.
fn radial_extent(center: Point, radius: f64) -> (Point, f64, f64) {
    let c = center.norm();
    let u = if c > 0.0 {
        center * (1.0 / c)
    } else {
        Point::new(1.0, 0.0)
    };
    (u, c - radius, c + radius)
}

/// Hyperbolic diameter of a hole inside the unit disk.
///
/// Exact for disks (the diameter lies on the line through the origin);
/// polygons use 512 boundary samples plus one golden-section pass.
pub fn hyperbolic_diameter(h: &Hole) -> Result<f64, GeometryError> {
    let m = h.max_norm();
    if m >= 1.0 {
        return Err(GeometryError::OutsideUnitDisk(m));
    }
    match h {
        Hole::Disk { center, radius } => {
            let (_, a, b) = radial_extent(*center, *radius);
            Ok(b.atanh() - a.atanh())
        }
        Hole::Polygon { vertices } => Ok(polygon_hyperbolic_diameter(vertices, 512)),
    }
}

fn polygon_hyperbolic_diameter(vertices: &[Point], samples: usize) -> f64 {
    let perimeter = polygon_perimeter(vertices);
    let at = |s: f64| polygon_point_at(vertices, s.rem_euclid(perimeter));
    let dist = |s: f64, t: f64| hyperbolic_distance(at(s), at(t)).unwrap_or(0.0);
    let params: Vec<f64> = (0..samples)
        .map(|k| perimeter * k as f64 / samples as f64)
        .collect();
    let pts: Vec<Point> = params.iter().map(|&s| at(s)).collect();
    let mut best = (0.0, 0usize, 0usize);
    for i in 0..samples {
        for j in i + 1..samples {
            let d = hyperbolic_distance(pts[i], pts[j]).unwrap_or(0.0);
            if d > best.0 {
                best = (d, i, j);
            }
        }
    }
    // Also consider vertices, where the maximum of a convex-ish piece sits.
    for (i, a) in vertices.iter().enumerate() {
        for b in &vertices[i + 1..] {
            best.0 = best.0.max(hyperbolic_distance(*a, *b).unwrap_or(0.0));
        }
    }
    let step = perimeter / samples as f64;
    let (mut s, mut t) = (params[best.1], params[best.2]);
    s = golden_max(|x| dist(x, t), s - step, s + step);
    t = golden_max(|x| dist(s, x), t - step, t + step);
    best.0.max(dist(s, t))
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..40 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Disk automorphism `z -> e^{i theta} (z - z0) / (1 - z conj(z0))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobiusMap {
    pub z0: Point,
    pub theta: f64,
}

impl MobiusMap {
    pub fn new(z0: Point, theta: f64) -> Result<Self, GeometryError> {
        if !z0.is_finite() || !theta.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        if z0.norm() >= 1.0 {
            return Err(GeometryError::InvalidMap(z0.norm()));
        }
        Ok(MobiusMap { z0, theta })
    }

    pub fn identity() -> Self {
        MobiusMap {
            z0: Point::ORIGIN,
            theta: 0.0,
        }
    }

    pub fn rotation(theta: f64) -> Self {
        MobiusMap {
            z0: Point::ORIGIN,
            theta,
        }
    }

    pub fn apply(&self, p: Point) -> Point {
        let z = Complex64::from(p);
        let z0 = Complex64::from(self.z0);
        let w = Complex64::from_polar(1.0, self.theta) * (z - z0) / (1.0 - z * z0.conj());
        w.into()
    }

    pub fn inverse(&self) -> MobiusMap {
        let z0 = Complex64::from_polar(1.0, self.theta) * Complex64::from(self.z0);
        MobiusMap {
            z0: Point::from(-z0),
            theta: -self.theta,
        }
    }

    /// The point sent to infinity, `1 / conj(z0)`; `None` for rotations.
    pub fn pole(&self) -> Option<Point> {
        if self.z0 == Point::ORIGIN {
            None
        } else {
            Some(Point::from(1.0 / Complex64::from(self.z0).conj()))
        }
    }
}

/// Image of a disk under a map with a pole, through the two circle points on
/// the line joining the pole and the center; that line is orthogonal to the
/// circle, so its image is a line through the image center.
fn disk_image(center: Point, radius: f64, pole: Point, f: impl Fn(Point) -> Point) -> Hole {
    let d = center - pole;
    let len = d.norm();
    let u = if len > 0.0 {
        d * (1.0 / len)
    } else {
        Point::new(1.0, 0.0)
    };
    let w1 = f(center + u * radius);
    let w2 = f(center - u * radius);
    Hole::Disk {
        center: (w1 + w2) * 0.5,
        radius: 0.5 * w1.dist(w2),
    }
}

/// Image of a hole under a disk automorphism (polygons vertex-wise).
pub fn apply_mobius(m: &MobiusMap, h: &Hole) -> Result<Hole, GeometryError> {
    apply_mobius_refined(m, h, 1)
}

/// As [`apply_mobius`], subdividing each polygon edge into `refine` pieces
/// before mapping so that the image follows the circular-arc edges.
pub fn apply_mobius_refined(m: &MobiusMap, h: &Hole, refine: usize) -> Result<Hole, GeometryError> {
    match (h, m.pole()) {
        (Hole::Disk { center, radius }, None) => Hole::disk(m.apply(*center), *radius),
        (Hole::Disk { center, radius }, Some(pole)) => {
            if h.contains(pole) {
                return Err(GeometryError::PoleInsideHole);
            }
            Ok(disk_image(*center, *radius, pole, |p| m.apply(p)))
        }
        (Hole::Polygon { vertices }, pole) => {
            if pole.is_some_and(|p| h.contains(p)) {
                return Err(GeometryError::PoleInsideHole);
            }
            Hole::polygon(
                refine_polygon(vertices, refine)
                    .into_iter()
                    .map(|p| m.apply(p))
                    .collect(),
            )
        }
    }
}

/// The inversion `z -> 1 / (2 z)`.
pub fn invert_half_point(p: Point) -> Point {
    Point::from(1.0 / (2.0 * Complex64::from(p)))
}

/// Image of a hole under `z -> 1 / (2 z)`.
pub fn invert_disk(h: &Hole) -> Result<Hole, GeometryError> {
    invert_refined(h, 1)
}

pub fn invert_refined(h: &Hole, refine: usize) -> Result<Hole, GeometryError> {
    if h.contains(Point::ORIGIN) {
        return Err(GeometryError::PoleInsideHole);
    }
    match h {
        Hole::Disk { center, radius } => Ok(disk_image(
            *center,
            *radius,
            Point::ORIGIN,
            invert_half_point,
        )),
        Hole::Polygon { vertices } => Hole::polygon(
            refine_polygon(vertices, refine)
                .into_iter()
                .map(invert_half_point)
                .collect(),
        ),
    }
}

/// The hyperbolic `rho`-neighborhood of a disk hole, itself a Euclidean disk.
pub fn hyperbolic_inflate(center: Point, radius: f64, rho: f64) -> Result<Hole, GeometryError> {
    let (u, a, b) = radial_extent(center, radius);
    if b >= 1.0 {
        return Err(GeometryError::OutsideUnitDisk(b));
    }
    let lo = (a.atanh() - rho).tanh();
    let hi = (b.atanh() + rho).tanh();
    Hole::disk(u * (0.5 * (lo + hi)), 0.5 * (hi - lo))
}

fn refine_polygon(vertices: &[Point], refine: usize) -> Vec<Point> {
    let k = refine.max(1);
    let n = vertices.len();
    let mut out = Vec::with_capacity(n * k);
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        for s in 0..k {
            out.push(a + (b - a) * (s as f64 / k as f64));
        }
    }
    out
}

pub(crate) fn signed_area(v: &[Point]) -> f64 {
    let n = v.len();
    0.5 * (0..n).map(|i| v[i].cross(v[(i + 1) % n])).sum::<f64>()
}

fn polygon_perimeter(v: &[Point]) -> f64 {
    let n = v.len();
    (0..n).map(|i| v[i].dist(v[(i + 1) % n])).sum()
}

fn polygon_point_at(v: &[Point], mut s: f64) -> Point {
    let n = v.len();
    for i in 0..n {
        let a = v[i];
        let b = v[(i + 1) % n];
        let len = a.dist(b);
        if s <= len || i == n - 1 {
            let t = if len > 0.0 {
                (s / len).clamp(0.0, 1.0)
            } else {
                0.0
            };
            return a + (b - a) * t;
        }
        s -= len;
    }
    v[0]
}

fn polygon_contains(v: &[Point], p: Point) -> bool {
    let n = v.len();
    let mut inside = false;
    for i in 0..n {
        let a = v[i];
        let b = v[(i + 1) % n];
        if point_segment_distance(p, a, b) <= 1e-14 {
            return true;
        }
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}

fn polygon_boundary_distance(v: &[Point], p: Point) -> f64 {
    let n = v.len();
    (0..n)
        .map(|i| point_segment_distance(p, v[i], v[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min)
}

pub(crate) fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

fn segments_intersect(a0: Point, a1: Point, b0: Point, b1: Point) -> bool {
    let d1 = orient(b0, b1, a0);
    let d2 = orient(b0, b1, a1);
    let d3 = orient(a0, a1, b0);
    let d4 = orient(a0, a1, b1);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on =
        |p: Point, q: Point, r: Point, d: f64| d == 0.0 && point_segment_distance(r, p, q) == 0.0;
    on(b0, b1, a0, d1) || on(b0, b1, a1, d2) || on(a0, a1, b0, d3) || on(a0, a1, b1, d4)
}

fn is_simple(v: &[Point]) -> bool {
    let n = v.len();
    for i in 0..n {
        let (a0, a1) = (v[i], v[(i + 1) % n]);
        if a0 == a1 {
            return false;
        }
        for j in i + 1..n {
            // adjacent edges share a vertex by construction
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (b0, b1) = (v[j], v[(j + 1) % n]);
            if segments_intersect(a0, a1, b0, b1) {
                return false;
            }
        }
    }
    true
}
