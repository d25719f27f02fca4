//! The full analysis pipeline behind the `analyze` command: kernels, Gram
//! matrix, Riesz constants, criterion, rho metric and every bound check.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::criterion::{
    capacity_graph, full_criterion, graph_metrics, CriterionReport, GraphSummary, Thresholds,
};
use crate::domain::{validate, DomainSpec};
use crate::kernels::{gram, solve_kernels, GramMatrix};
use crate::report::{all_hold, BoundReport};
use crate::rho::{check_dist_sq_budget, check_rho_lower_bound, rho_distances, RhoResult};
use crate::riesz::{constants, constants_under_basis, BasisConstants, RieszConstants};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeConfig {
    pub grid_n: usize,
    /// Metric graph parameter `S`.
    pub big_s: f64,
    /// Capacity graph parameter `s`.
    pub small_s: f64,
    pub thresholds: Thresholds,
}

impl Default for AnalyzeConfig {
    fn default() -> Self {
        AnalyzeConfig {
            grid_n: 512,
            big_s: 2.0,
            small_s: 0.5,
            thresholds: Thresholds::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyzeError {
    #[error("invalid domain: {0}")]
    Invalid(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageFailure {
    pub stage: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub config: AnalyzeConfig,
    pub domain: DomainSpec,
    pub riesz: Option<RieszConstants>,
    pub gram: Option<GramMatrix>,
    pub curve_basis: Option<BasisConstants>,
    pub criterion: Option<CriterionReport>,
    pub capacity_graph: Option<GraphSummary>,
    pub rho: RhoResult,
    pub bounds: Vec<BoundReport>,
    pub failures: Vec<StageFailure>,
}

impl AnalysisReport {
    pub fn bounds_hold(&self) -> bool {
        all_hold(&self.bounds)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

/// Runs every stage it can. Stages that fail are recorded in `failures` and
/// the stages depending on them are skipped.
pub fn analyze(d: &DomainSpec, cfg: &AnalyzeConfig) -> Result<AnalysisReport, AnalyzeError> {
    let report = validate(d);
    if !report.is_valid() {
        return Err(AnalyzeError::Invalid(report.to_string()));
    }
    for (name, v) in [("S", cfg.big_s), ("s", cfg.small_s)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(AnalyzeError::Config(format!(
                "{name} must be positive, got {v}"
            )));
        }
    }
    let mut failures = Vec::new();
    let mut fail = |stage: &str, message: String| {
        failures.push(StageFailure {
            stage: stage.into(),
            message,
        })
    };
    let mut bounds = Vec::new();

    let gram = match solve_kernels(d, cfg.grid_n) {
        Ok(ks) => {
            bounds.push(BoundReport::le(
                "sum_j v_j <= 1",
                ks.superposition_max(),
                1.0 + 1e-9,
            ));
            Some(gram(&ks))
        }
        Err(e) => {
            fail("kernels", e.to_string());
            None
        }
    };
    if let Some(g) = &gram {
        if g.dim() > 1 {
            let worst = (0..g.dim())
                .flat_map(|j| (j + 1..g.dim()).map(move |k| (j, k)))
                .max_by(|a, b| g.get(a.0, a.1).total_cmp(&g.get(b.0, b.1)))
                .expect("at least one pair");
            let value = g.get(worst.0, worst.1);
            bounds.push(BoundReport {
                name: "G_jk < 0".into(),
                lhs: value,
                rhs: 0.0,
                holds: value < 0.0,
                detail: format!("largest at ({}, {})", worst.0, worst.1),
            });
        }
    }
    let riesz = gram.as_ref().and_then(|g| match constants(g) {
        Ok(c) => Some(c),
        Err(e) => {
            fail("riesz", e.to_string());
            None
        }
    });
    let curve_basis = match (&gram, &d.curve_basis) {
        (Some(g), Some(b)) => match constants_under_basis(g, b) {
            Ok(c) => Some(c),
            Err(e) => {
                fail("curve_basis", e.to_string());
                None
            }
        },
        _ => None,
    };
    let criterion = match full_criterion(d, cfg.big_s, &cfg.thresholds) {
        Ok(c) => Some(c),
        Err(e) => {
            fail("criterion", e.to_string());
            None
        }
    };
    let capacity_graph = match capacity_graph(d, cfg.small_s, cfg.grid_n) {
        Ok(g) => {
            let m = graph_metrics(&g);
            Some(GraphSummary {
                s: cfg.small_s,
                connected: m.connected,
                diameter: m.diameter,
                max_dist_to_outer: m.max_dist_to_outer,
            })
        }
        Err(e) => {
            fail("capacity_graph", e.to_string());
            None
        }
    };
    let rho = rho_distances(d);
    if let Some(c) = &riesz {
        bounds.push(c.weak_strong_bound());
        bounds.push(check_rho_lower_bound(d, &rho, c.c_b_weak));
        bounds.push(check_dist_sq_budget(d, c));
    }
    if let Some(b) = &curve_basis {
        bounds.extend(b.envelopes.iter().cloned());
    }
    Ok(AnalysisReport {
        config: *cfg,
        domain: d.clone(),
        riesz,
        gram,
        curve_basis,
        criterion,
        capacity_graph,
        rho,
        bounds,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{gen_annulus, gen_inverse};
    use crate::geometry::{Hole, Point};

    fn cfg(n: usize) -> AnalyzeConfig {
        AnalyzeConfig {
            grid_n: n,
            ..AnalyzeConfig::default()
        }
    }

    #[test]
    fn annulus_report() {
        let r = analyze(&gen_annulus(0.3).unwrap(), &cfg(256)).unwrap();
        let c = r.riesz.unwrap();
        let exact = (0.3f64.ln().abs() / (2.0 * std::f64::consts::PI)).sqrt();
        assert!((c.c_i - exact).abs() <= 0.03 * exact, "{c:?}");
        assert!(r.criterion.as_ref().unwrap().verdict);
        assert!(r.bounds_hold(), "{:?}", r.bounds);
        assert!(r.failures.is_empty());
        assert!(r.curve_basis.is_none());
    }

    #[test]
    fn report_round_trips_and_is_deterministic() {
        let d = DomainSpec::new(vec![
            Hole::disk(Point::new(0.3, 0.1), 0.1).unwrap(),
            Hole::disk(Point::new(-0.4, -0.2), 0.12).unwrap(),
        ]);
        let a = analyze(&d, &cfg(128)).unwrap();
        let json = a.to_json();
        let back: AnalysisReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, a);
        assert_eq!(analyze(&d, &cfg(128)).unwrap().to_json(), json);
    }

    #[test]
    fn inverse_domain_reports_curve_basis() {
        let (d, _) = gen_inverse(0.01).unwrap();
        let r = analyze(&d, &cfg(1024)).unwrap();
        // the plane box of the close pair is too wide to resolve the small hole
        assert!(
            r.failures.iter().all(|f| f.stage == "capacity_graph"),
            "{:?}",
            r.failures
        );
        assert!(r.curve_basis.unwrap().within_envelopes());
        assert_eq!(
            r.bounds.iter().filter(|b| b.name.starts_with("c_")).count(),
            2
        );
    }

    #[test]
    fn errors_and_partial_output() {
        let bad = DomainSpec::new(vec![]);
        assert!(matches!(
            analyze(&bad, &cfg(128)),
            Err(AnalyzeError::Invalid(_))
        ));
        let d = gen_annulus(0.3).unwrap();
        let bad_s = AnalyzeConfig {
            big_s: -1.0,
            ..cfg(128)
        };
        assert!(matches!(analyze(&d, &bad_s), Err(AnalyzeError::Config(_))));
        // grid too coarse to resolve the hole: kernels fail, criterion and rho survive
        let tiny = DomainSpec::new(vec![Hole::disk(Point::new(0.2, 0.0), 0.002).unwrap()]);
        let r = analyze(&tiny, &cfg(128)).unwrap();
        assert!(r.gram.is_none() && r.riesz.is_none());
        assert!(r.failures.iter().any(|f| f.stage == "kernels"));
        assert!(r.criterion.is_some());
        assert_eq!(r.rho.u.len(), 1);
    }
}
