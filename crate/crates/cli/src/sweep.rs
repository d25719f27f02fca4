use clap::ValueEnum;
use serde::Serialize;

use periodlab::analysis::AnalyzeConfig;
use periodlab::criterion::full_criterion;
use periodlab::domain::{gen_annulus, gen_dyadic, gen_orbit};
use periodlab::kernels::{gram, solve_kernels};
use periodlab::riesz::constants;
use periodlab::DomainSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    AnnulusR,
    OrbitM,
    DyadicN,
}

impl Family {
    pub fn default_values(self) -> Vec<f64> {
        match self {
            Family::AnnulusR => (1..=9).map(|k| k as f64 / 10.0).collect(),
            Family::OrbitM => (1..=6).map(f64::from).collect(),
            Family::DyadicN => (1..=5).map(f64::from).collect(),
        }
    }

    fn domain(self, value: f64, a: f64, rho: f64) -> Result<DomainSpec, String> {
        let count = |v: f64| {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v)
            } else {
                Err(format!("expected a non-negative integer, got {v}"))
            }
        };
        let d = match self {
            Family::AnnulusR => gen_annulus(value),
            Family::OrbitM => gen_orbit(a, rho, count(value)? as usize),
            Family::DyadicN => gen_dyadic(count(value)? as u32),
        };
        d.map_err(|e| e.to_string())
    }
}

/// Fixed column order: param, c_b, c_b_weak, c_i, n_ulf, eps_weak,
/// graph_diameter, blaschke_1, blaschke_2. The Riesz columns are empty when
/// the kernels cannot be solved on the grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub param: f64,
    pub c_b: Option<f64>,
    pub c_b_weak: Option<f64>,
    pub c_i: Option<f64>,
    pub n_ulf: usize,
    pub eps_weak: f64,
    pub graph_diameter: String,
    pub blaschke_1: f64,
    pub blaschke_2: f64,
}

fn row(family: Family, value: f64, a: f64, rho: f64, cfg: &AnalyzeConfig) -> Result<Row, String> {
    let d = family.domain(value, a, rho)?;
    let crit = full_criterion(&d, cfg.big_s, &cfg.thresholds).map_err(|e| e.to_string())?;
    let c = solve_kernels(&d, cfg.grid_n)
        .map_err(|e| e.to_string())
        .and_then(|ks| constants(&gram(&ks)).map_err(|e| e.to_string()));
    let c = match c {
        Ok(c) => Some(c),
        Err(e) => {
            eprintln!("sweep {family:?} at {value}: {e}");
            None
        }
    };
    Ok(Row {
        param: value,
        c_b: c.map(|c| c.c_b),
        c_b_weak: c.map(|c| c.c_b_weak),
        c_i: c.map(|c| c.c_i),
        n_ulf: crit.n_ulf,
        eps_weak: crit.eps_weak,
        graph_diameter: crit.graph.diameter.map_or("inf".into(), |m| m.to_string()),
        blaschke_1: crit.blaschke["1"],
        blaschke_2: crit.blaschke["2"],
    })
}

/// Rows for every value that succeeds; failures are logged and skipped.
pub fn run(family: Family, values: &[f64], a: f64, rho: f64, cfg: &AnalyzeConfig) -> Vec<Row> {
    values
        .iter()
        .filter_map(|&v| match row(family, v, a, rho, cfg) {
            Ok(r) => Some(r),
            Err(e) => {
                eprintln!("sweep {family:?} at {v}: {e}");
                None
            }
        })
        .collect()
}

pub fn to_csv(rows: &[Row]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("writing to memory cannot fail");
    }
    String::from_utf8(w.into_inner().expect("flush to memory cannot fail"))
        .expect("csv output is utf-8")
}
