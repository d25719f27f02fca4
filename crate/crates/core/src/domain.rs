//! The domain: unit disk minus an ordered list of holes.

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    apply_mobius, euclid_gap, invert_disk, invert_refined, signed_gap, Component, GeometryError,
    Hole, MobiusMap, Point,
};

/// Smallest gap between two complementary components accepted by [`validate`].
pub const MIN_GAP: f64 = 1e-6;

/// Gaps below this are legal but flagged, since grids coarser than about
/// n = 256 cannot resolve them.
pub const NARROW_GAP: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("parameter {name} = {value} out of range ({expected})")]
    OutOfRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("generated holes collide: {0}")]
    Collision(String),
    #[error("curve basis must be a non-singular square integer matrix of size {expected}")]
    BadBasis { expected: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("invalid domain: {0}")]
    Invalid(String),
    #[error("inversion needs the hole B(0, 1/2)")]
    NoCentralHole,
}

/// Integer change of basis from hole periods to curve periods.
///
/// Stored row-major; `apply` maps curve-period coordinates to hole periods
/// (`hole = A * curve`), the convention used by the inverse-domain example.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<i64>>", into = "Vec<Vec<i64>>")]
pub struct CurveBasis {
    n: usize,
    entries: Vec<i64>,
}

impl CurveBasis {
    pub fn new(rows: Vec<Vec<i64>>) -> Result<Self, DomainError> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(DomainError::BadBasis { expected: n });
        }
        let basis = CurveBasis {
            n,
            entries: rows.into_iter().flatten().collect(),
        };
        if basis.determinant() == 0 {
            return Err(DomainError::BadBasis { expected: n });
        }
        Ok(basis)
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1;
        }
        CurveBasis { n, entries }
    }

    /// The 2x2 basis of the inverse-domain example.
    pub fn inverse_example() -> Self {
        CurveBasis {
            n: 2,
            entries: vec![-1, -1, 0, 1],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.entries[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.entries.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> i128 {
        let n = self.n;
        let mut m: Vec<i128> = self.entries.iter().map(|&v| v as i128).collect();
        let mut sign = 1;
        let mut prev: i128 = 1;
        for k in 0..n {
            if m[k * n + k] == 0 {
                let Some(swap) = (k + 1..n).find(|&r| m[r * n + k] != 0) else {
                    return 0;
                };
                for c in 0..n {
                    m.swap(k * n + c, swap * n + c);
                }
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    m[i * n + j] =
                        (m[i * n + j] * m[k * n + k] - m[i * n + k] * m[k * n + j]) / prev;
                }
            }
            prev = m[k * n + k];
        }
        sign * m[n * n - 1]
    }
}

impl TryFrom<Vec<Vec<i64>>> for CurveBasis {
    type Error = DomainError;
    fn try_from(rows: Vec<Vec<i64>>) -> Result<Self, Self::Error> {
        CurveBasis::new(rows)
    }
}

impl From<CurveBasis> for Vec<Vec<i64>> {
    fn from(b: CurveBasis) -> Self {
        b.rows()
    }
}

/// The unit disk minus `holes`. Hole `j` (0-based here) is `B_{j+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub holes: Vec<Hole>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve_basis: Option<CurveBasis>,
}

impl DomainSpec {
    pub fn new(holes: Vec<Hole>) -> Self {
        DomainSpec {
            holes,
            curve_basis: None,
        }
    }

    pub fn len(&self) -> usize {
        self.holes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.holes.is_empty()
    }

    pub fn all_disks(&self) -> bool {
        self.holes.iter().all(Hole::is_disk)
    }

    /// Canonical JSON (compact, shortest round-trip floats).
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("domain serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    /// Validated construction.
    pub fn checked(self) -> Result<Self, DomainError> {
        let report = validate(&self);
        if report.is_valid() {
            Ok(self)
        } else {
            Err(DomainError::Invalid(report.to_string()))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NoHoles,
    Overlap {
        first: usize,
        second: usize,
        gap: f64,
    },
    TouchesBoundary {
        hole: usize,
        gap: f64,
    },
    Degenerate {
        hole: usize,
        reason: String,
    },
    BasisSize {
        basis: usize,
        holes: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Advisory {
    NarrowGapToBoundary {
        hole: usize,
        gap: f64,
    },
    NarrowGap {
        first: usize,
        second: usize,
        gap: f64,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub advisories: Vec<Advisory>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            write!(f, "valid")?;
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            match v {
                Violation::NoHoles => write!(f, "domain has no holes")?,
                Violation::Overlap { first, second, gap } => {
                    write!(f, "holes {first} and {second} overlap (gap {gap})")?
                }
                Violation::TouchesBoundary { hole, gap } => {
                    write!(f, "hole {hole} touches the unit circle (gap {gap})")?
                }
                Violation::Degenerate { hole, reason } => {
                    write!(f, "hole {hole} is degenerate: {reason}")?
                }
                Violation::BasisSize { basis, holes } => write!(
                    f,
                    "curve basis is {basis}x{basis} but there are {holes} holes"
                )?,
            }
        }
        for a in &self.advisories {
            match a {
                Advisory::NarrowGapToBoundary { hole, gap } => write!(
                    f,
                    " [advisory: narrow gap {gap} between hole {hole} and the unit circle]"
                )?,
                Advisory::NarrowGap { first, second, gap } => write!(
                    f,
                    " [advisory: narrow gap {gap} between holes {first} and {second}]"
                )?,
            }
        }
        Ok(())
    }
}

/// Checks every domain invariant; never fails, reports instead.
pub fn validate(d: &DomainSpec) -> ValidationReport {
    let mut report = ValidationReport::default();
    if d.holes.is_empty() {
        report.violations.push(Violation::NoHoles);
    }
    for (j, h) in d.holes.iter().enumerate() {
        if let Hole::Polygon { vertices } = h {
            if let Err(e) = Hole::polygon(vertices.clone()) {
                report.violations.push(Violation::Degenerate {
                    hole: j,
                    reason: e.to_string(),
                });
                continue;
            }
        }
        if let Hole::Disk { radius, .. } = h {
            if !(*radius > 0.0) {
                report.violations.push(Violation::Degenerate {
                    hole: j,
                    reason: "non-positive radius".into(),
                });
                continue;
            }
        }
        let gap = 1.0 - h.max_norm();
        if gap < MIN_GAP {
            report
                .violations
                .push(Violation::TouchesBoundary { hole: j, gap });
        } else if gap < NARROW_GAP {
            report
                .advisories
                .push(Advisory::NarrowGapToBoundary { hole: j, gap });
        }
    }
    for i in 0..d.holes.len() {
        for k in i + 1..d.holes.len() {
            let gap = signed_gap(&d.holes[i], &d.holes[k]);
            if gap < MIN_GAP {
                report.violations.push(Violation::Overlap {
                    first: i,
                    second: k,
                    gap,
                });
            } else if gap < NARROW_GAP {
                report.advisories.push(Advisory::NarrowGap {
                    first: i,
                    second: k,
                    gap,
                });
            }
        }
    }
    if let Some(b) = &d.curve_basis {
        if b.dim() != d.holes.len() {
            report.violations.push(Violation::BasisSize {
                basis: b.dim(),
                holes: d.holes.len(),
            });
        }
    }
    report
}

/// Round annulus `{ r < |z| < 1 }`.
pub fn gen_annulus(r: f64) -> Result<DomainSpec, DomainError> {
    if !(r > 0.0 && r < 1.0) {
        return Err(DomainError::OutOfRange {
            name: "r",
            value: r,
            expected: "0 < r < 1",
        });
    }
    Ok(DomainSpec::new(vec![Hole::disk(Point::ORIGIN, r)?]))
}

/// Orbit of the closed disk `|z| <= rho` under powers `-m..=m` of
/// `z -> (z - a) / (1 - a z)`. Holes are ordered `0, +1, -1, +2, -2, ...`.
pub fn gen_orbit(a: f64, rho: f64, m: usize) -> Result<DomainSpec, DomainError> {
    if !(a > -1.0 && a < 0.0) {
        return Err(DomainError::OutOfRange {
            name: "a",
            value: a,
            expected: "-1 < a < 0",
        });
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(DomainError::OutOfRange {
            name: "rho",
            value: rho,
            expected: "0 < rho < 1",
        });
    }
    let forward = MobiusMap::new(Point::new(a, 0.0), 0.0)?;
    let backward = forward.inverse();
    let base = Hole::disk(Point::ORIGIN, rho)?;
    let mut holes = vec![base.clone()];
    let (mut up, mut down) = (base.clone(), base);
    for _ in 0..m {
        up = apply_mobius(&forward, &up)?;
        down = apply_mobius(&backward, &down)?;
        holes.push(up.clone());
        holes.push(down.clone());
    }
    let d = DomainSpec::new(holes);
    let report = validate(&d);
    if !report.is_valid() {
        return Err(DomainError::Collision(report.to_string()));
    }
    Ok(d)
}

/// Inverse domain: `B(0, 1/2)` together with the image of
/// `B(1 - 2 delta, delta)` under `z -> 1 / (2 z)`, plus the period basis.
pub fn gen_inverse(delta: f64) -> Result<(DomainSpec, CurveBasis), DomainError> {
    if !(delta > 0.0 && delta <= 0.01) {
        return Err(DomainError::OutOfRange {
            name: "delta",
            value: delta,
            expected: "0 < delta <= 1/100",
        });
    }
    let (pre_image, basis) = inverse_pre_image(delta)?;
    let second = invert_disk(&pre_image.holes[1])?;
    let mut d = DomainSpec::new(vec![Hole::disk(Point::ORIGIN, 0.5)?, second]);
    d.curve_basis = Some(basis.clone());
    Ok((d, basis))
}

/// The domain `D \ (B(0, 1/2) u B(1 - 2 delta, delta))` whose inversion is
/// [`gen_inverse`].
pub fn inverse_pre_image(delta: f64) -> Result<(DomainSpec, CurveBasis), DomainError> {
    if !(delta > 0.0 && delta <= 0.01) {
        return Err(DomainError::OutOfRange {
            name: "delta",
            value: delta,
            expected: "0 < delta <= 1/100",
        });
    }
    let holes = vec![
        Hole::disk(Point::ORIGIN, 0.5)?,
        Hole::disk(Point::new(1.0 - 2.0 * delta, 0.0), delta)?,
    ];
    Ok((DomainSpec::new(holes), CurveBasis::inverse_example()))
}

/// Dyadic family: hole `B_{n,k}` centered at `r e^{i theta}` with
/// `r = 1 - 3 * 2^{-n-1}`, `theta = 2 pi (k + 1/2) 2^{-n}`, radius `2^{-n}/100`.
pub fn gen_dyadic(n_max: u32) -> Result<DomainSpec, DomainError> {
    if !(1..=8).contains(&n_max) {
        return Err(DomainError::OutOfRange {
            name: "n_max",
            value: n_max as f64,
            expected: "1 <= n_max <= 8",
        });
    }
    let mut holes = Vec::with_capacity((1usize << (n_max + 1)) - 2);
    for n in 1..=n_max {
        let scale = 0.5f64.powi(n as i32);
        let r = 1.0 - 1.5 * scale;
        for k in 0..(1u32 << n) {
            let theta = 2.0 * PI * (k as f64 + 0.5) * scale;
            holes.push(Hole::disk(Point::polar(r, theta), scale / 100.0)?);
        }
    }
    Ok(DomainSpec::new(holes))
}

/// Hole-wise image under a disk automorphism.
pub fn transform_domain(d: &DomainSpec, m: &MobiusMap) -> Result<DomainSpec, DomainError> {
    let holes = d
        .holes
        .iter()
        .map(|h| apply_mobius_hole(m, h))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DomainSpec {
        holes,
        curve_basis: d.curve_basis.clone(),
    })
}

fn apply_mobius_hole(m: &MobiusMap, h: &Hole) -> Result<Hole, GeometryError> {
    match h {
        Hole::Disk { .. } => apply_mobius(m, h),
        Hole::Polygon { .. } => crate::geometry::apply_mobius_refined(m, h, 1),
    }
}

/// Image under `z -> 1 / (2 z)`. The map swaps the unit circle and the
/// circle `|z| = 1/2`, so the domain must contain the hole `B(0, 1/2)`, which
/// stays in place; every other hole is inverted.
pub fn invert_domain(d: &DomainSpec) -> Result<DomainSpec, DomainError> {
    let central = Hole::Disk {
        center: Point::ORIGIN,
        radius: 0.5,
    };
    if !d.holes.contains(&central) {
        return Err(DomainError::NoCentralHole);
    }
    let holes = d
        .holes
        .iter()
        .map(|h| {
            if *h == central {
                Ok(central.clone())
            } else {
                invert_refined(h, 1)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DomainSpec {
        holes,
        curve_basis: d.curve_basis.clone(),
    })
}

/// Random disk domain for corpus tests.
///
/// Radii are drawn from `radius_range`; every hole keeps at least `min_gap`
/// from the others and from the unit circle.
pub fn random_disk_domain<R: Rng>(
    rng: &mut R,
    holes: usize,
    radius_range: (f64, f64),
    min_gap: f64,
) -> DomainSpec {
    'outer: loop {
        let mut out: Vec<Hole> = Vec::with_capacity(holes);
        let mut attempts = 0;
        while out.len() < holes {
            attempts += 1;
            if attempts > 10_000 {
                continue 'outer;
            }
            let r = rng.gen_range(radius_range.0..radius_range.1);
            let reach = 1.0 - min_gap - r;
            if reach <= 0.0 {
                continue;
            }
            let rho = reach * rng.gen::<f64>().sqrt();
            let c = Point::polar(rho, rng.gen_range(0.0..2.0 * PI));
            let cand = Hole::Disk {
                center: c,
                radius: r,
            };
            if out.iter().all(|h| signed_gap(h, &cand) >= min_gap)
                && euclid_gap(Component::Hole(&cand), Component::Outer) >= min_gap
            {
                out.push(cand);
            }
        }
        return DomainSpec::new(out);
    }
}

/// Seeded corpus of `count` disk domains with 3 to 8 holes, radii in
/// `[0.06, 0.15)` and gaps of at least 0.06.
pub fn seeded_corpus(seed: u64, count: usize) -> Vec<DomainSpec> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let holes = rng.gen_range(3..=8);
            random_disk_domain(&mut rng, holes, (0.06, 0.15), 0.06)
        })
        .collect()
}
