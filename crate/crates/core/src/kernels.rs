//! Period reproducing kernels `v_j` and their Gram matrix.
//!
//! `v_j` is harmonic in the domain, 1 on hole `j`, 0 on the other holes and
//! outside the unit disk. The kernel form is never built; every quantity
//! used is an energy inner product of the `v_j`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::capacity::{cap2, CapacityError, Plate};
use crate::domain::{validate, CurveBasis, DomainSpec};
use crate::fdsolver::{build_grid, energy_inner_product, Grid, ScalarField, Solver, SolverError};
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error(transparent)]
    Grid(SolverError),
    #[error("kernel {hole}: {source}")]
    Solve { hole: usize, source: SolverError },
    #[error("curve basis is singular")]
    SingularBasis,
    #[error("curve basis is {basis}x{basis} but the Gram matrix is {gram}x{gram}")]
    BasisSize { basis: usize, gram: usize },
    #[error(transparent)]
    Capacity(#[from] CapacityError),
}

#[derive(Debug, Clone)]
pub struct KernelSet {
    pub grid: Arc<Grid>,
    pub fields: Vec<ScalarField>,
}

impl KernelSet {
    pub fn grid_n(&self) -> usize {
        self.grid.n()
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    /// Largest node value of `sum_j v_j`; at most 1 by the maximum principle.
    pub fn superposition_max(&self) -> f64 {
        let len = self.grid.side() * self.grid.side();
        (0..len)
            .map(|k| self.fields.iter().map(|f| f.values()[k]).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// One Dirichlet solve per hole on a shared grid and operator.
pub fn solve_kernels(d: &DomainSpec, n: usize) -> Result<KernelSet, KernelError> {
    let report = validate(d);
    if !report.is_valid() {
        return Err(KernelError::InvalidDomain(report.to_string()));
    }
    let grid = Arc::new(build_grid(d, n).map_err(KernelError::Grid)?);
    kernels_on_grid(grid)
}

pub fn kernels_on_grid(grid: Arc<Grid>) -> Result<KernelSet, KernelError> {
    let solver = Solver::new(grid.clone());
    let count = grid.hole_count();
    let fields = (0..count)
        .into_par_iter()
        .map(|j| {
            let mut values = vec![0.0; count];
            values[j] = 1.0;
            solver
                .solve(&values, 0.0)
                .map_err(|source| KernelError::Solve { hole: j, source })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(KernelSet { grid, fields })
}

/// Symmetric matrix of energy inner products.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GramMatrix(pub Matrix);

impl GramMatrix {
    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.0[(j, k)]
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn max_diagonal(&self) -> f64 {
        (0..self.dim())
            .map(|j| self.get(j, j))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Off-diagonal entries that are not negative, as `(j, k, value)`.
    pub fn sign_violations(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for j in 0..self.dim() {
            for k in j + 1..self.dim() {
                if self.get(j, k) >= 0.0 {
                    out.push((j, k, self.get(j, k)));
                }
            }
        }
        out
    }

    /// CSV with one row per matrix row.
    pub fn to_csv(&self) -> String {
        self.0
            .rows()
            .iter()
            .map(|r| {
                r.iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect::<Vec<_>>()
            .join("\n")
    }
}

pub fn gram(ks: &KernelSet) -> GramMatrix {
    let n = ks.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|j| (j..n).map(move |k| (j, k))).collect();
    let values: Vec<f64> = pairs
        .par_iter()
        .map(|&(j, k)| {
            energy_inner_product(&ks.fields[j], &ks.fields[k]).expect("kernels share one grid")
        })
        .collect();
    let mut m = Matrix::zeros(n);
    for (&(j, k), v) in pairs.iter().zip(values) {
        m[(j, k)] = v;
        m[(k, j)] = v;
    }
    GramMatrix(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagRow {
    pub hole: usize,
    pub gram: f64,
    pub capacity: f64,
    pub rel_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub rows: Vec<DiagRow>,
    pub tolerance: f64,
}

impl ConsistencyReport {
    pub fn holds(&self) -> bool {
        self.rows.iter().all(|r| r.rel_diff <= self.tolerance)
    }
}

/// Compares each `G_jj` with `cap2(B_j, other holes + unit complement)`
/// computed through the capacity module on the same grid size.
pub fn diag_vs_capacity(d: &DomainSpec, ks: &KernelSet) -> Result<ConsistencyReport, KernelError> {
    let g = gram(ks);
    let n = ks.grid_n();
    let rows = (0..d.len())
        .into_par_iter()
        .map(|j| -> Result<DiagRow, KernelError> {
            let others: Vec<_> = d
                .holes
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != j)
                .map(|(_, h)| h.clone())
                .collect();
            let cap = cap2(
                &Plate::hole(d.holes[j].clone()),
                &Plate::holes(others).with_unit_complement(),
                n,
            )?
            .value;
            let gjj = g.get(j, j);
            Ok(DiagRow {
                hole: j,
                gram: gjj,
                capacity: cap,
                rel_diff: (gjj - cap).abs() / gjj,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ConsistencyReport {
        rows,
        tolerance: 0.01,
    })
}

pub fn basis_matrix(basis: &CurveBasis) -> Matrix {
    Matrix::from_rows(
        &basis
            .rows()
            .iter()
            .map(|r| r.iter().map(|&v| v as f64).collect())
            .collect::<Vec<_>>(),
    )
}

/// Gram of the kernels reproducing curve-basis periods, `A^-1 G A^-T`,
/// where hole periods equal `A` times curve periods.
pub fn basis_change(g: &GramMatrix, basis: &CurveBasis) -> Result<GramMatrix, KernelError> {
    if basis.dim() != g.dim() {
        return Err(KernelError::BasisSize {
            basis: basis.dim(),
            gram: g.dim(),
        });
    }
    let inv = basis_matrix(basis)
        .inverse()
        .ok_or(KernelError::SingularBasis)?;
    let mut out = inv.mul(g.matrix()).mul(&inv.transpose());
    let n = out.dim();
    for j in 0..n {
        for k in 0..j {
            let s = 0.5 * (out[(j, k)] + out[(k, j)]);
            out[(j, k)] = s;
            out[(k, j)] = s;
        }
    }
    Ok(GramMatrix(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::gen_annulus;
    use crate::geometry::{Hole, Point};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn disk(x: f64, y: f64, r: f64) -> Hole {
        Hole::disk(Point::new(x, y), r).unwrap()
    }

    #[test]
    fn annulus_kernel_and_gram() {
        let ks = solve_kernels(&gen_annulus(0.5).unwrap(), 512).unwrap();
        for &r in &[0.6f64, 0.75, 0.9] {
            let exact = r.ln() / 0.5f64.ln();
            let got = ks.fields[0].sample(Point::polar(r, 0.7)).unwrap();
            assert!((got - exact).abs() <= 0.01 * exact);
        }
        let g = gram(&ks);
        assert_eq!(g.dim(), 1);
        let exact = 2.0 * PI / 2f64.ln();
        assert!((g.get(0, 0) - exact).abs() / exact < 0.02);
        let rep = diag_vs_capacity(&gen_annulus(0.5).unwrap(), &ks).unwrap();
        assert_eq!(rep.rows[0].rel_diff, 0.0);
    }

    #[test]
    fn mirror_holes_give_mirror_kernels() {
        let d = DomainSpec::new(vec![disk(0.4, 0.0, 0.1), disk(-0.4, 0.0, 0.1)]);
        let ks = solve_kernels(&d, 128).unwrap();
        for j in 0..=128 {
            for i in 0..=128 {
                assert!((ks.fields[0].at(i, j) - ks.fields[1].at(128 - i, j)).abs() < 1e-8);
            }
        }
        let g = gram(&ks);
        assert!(g.get(0, 1) < 0.0);
        assert!(ks.superposition_max() <= 1.0 + 1e-12);
    }

    #[test]
    fn far_separated_disks_nearly_diagonal() {
        // gap 1.34 is about 22 diameters
        let d = DomainSpec::new(vec![disk(-0.7, 0.0, 0.03), disk(0.7, 0.0, 0.03)]);
        let g = gram(&solve_kernels(&d, 512).unwrap());
        assert!(g.get(0, 1) < 0.0);
        assert!(g.get(0, 1).abs() <= 0.05 * g.get(0, 0), "{g:?}");
    }

    #[test]
    fn diagonal_matches_capacity_on_three_holes() {
        let d = DomainSpec::new(vec![
            disk(0.3, 0.2, 0.12),
            disk(-0.35, 0.1, 0.1),
            disk(0.0, -0.5, 0.15),
        ]);
        let ks = solve_kernels(&d, 256).unwrap();
        let rep = diag_vs_capacity(&d, &ks).unwrap();
        assert!(rep.holds(), "{rep:?}");
    }

    #[test]
    fn basis_change_identity_and_congruence() {
        let g = GramMatrix(Matrix::from_rows(&[vec![5.0, -1.5], vec![-1.5, 3.0]]));
        assert_eq!(basis_change(&g, &CurveBasis::identity(2)).unwrap(), g);
        let a = CurveBasis::inverse_example();
        let out = basis_change(&g, &a).unwrap();
        // curve periods c = A^-1 p with A^-1 = A: c1 = -p1 - p2, c2 = p2, so
        // the curve kernels are -k1 - k2 and k2.
        let (g11, g12, g22) = (5.0, -1.5, 3.0);
        assert_relative_eq!(out.get(0, 0), g11 + 2.0 * g12 + g22, epsilon = 1e-14);
        assert_relative_eq!(out.get(0, 1), -g12 - g22, epsilon = 1e-14);
        assert_relative_eq!(out.get(1, 1), g22, epsilon = 1e-14);
        let det_a = a.determinant() as f64;
        assert_relative_eq!(
            out.matrix().determinant(),
            g.matrix().determinant() / (det_a * det_a),
            epsilon = 1e-12
        );
        assert_eq!(
            basis_change(&g, &CurveBasis::identity(3)),
            Err(KernelError::BasisSize { basis: 3, gram: 2 })
        );
    }

    #[test]
    fn invalid_domain_is_rejected() {
        let d = DomainSpec::new(vec![disk(0.0, 0.0, 0.3), disk(0.25, 0.0, 0.1)]);
        assert!(matches!(
            solve_kernels(&d, 128),
            Err(KernelError::InvalidDomain(_))
        ));
    }
}
