use std::f64::consts::PI;
use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use periodlab::capacity::{
    cap2, check_lower_bound, check_upper_bound, upper_bound_value, Plate, CAP_SLACK,
};
use periodlab::criterion::{
    full_criterion, smallest_connected_s, ulf_constant, ulf_sampling, Thresholds,
};
use periodlab::domain::{
    gen_annulus, gen_dyadic, gen_inverse, inverse_pre_image, seeded_corpus, transform_domain,
};
use periodlab::geometry::{euclid_gap, signed_gap, Component};
use periodlab::kernels::{basis_change, diag_vs_capacity, gram, solve_kernels, GramMatrix};
use periodlab::linalg::symmetric_eigen;
use periodlab::rho::{
    check_dist_sq_budget, check_rho_lower_bound, rho_distances, rho_pixel_oracle,
    rho_pixel_oracle_with,
};
use periodlab::riesz::{constants, constants_under_basis, RieszConstants};
use periodlab::{DomainSpec, Hole, MobiusMap, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const SEED: u64 = 20_240_917;
const CORPUS_SIZE: usize = 20;
const CORPUS_GRID: usize = 512;
const KNOWN_FAILURES: &[&str] = &["9a"];

type Outcome = Result<String, String>;
type Criterion = (&'static str, &'static str, fn() -> Outcome);

struct Corpus {
    domains: Vec<DomainSpec>,
    grams: Vec<GramMatrix>,
    consts: Vec<RieszConstants>,
}

static CORPUS: OnceLock<Result<Corpus, String>> = OnceLock::new();

fn domains() -> Vec<DomainSpec> {
    seeded_corpus(SEED, CORPUS_SIZE)
}

fn corpus() -> Result<&'static Corpus, String> {
    CORPUS
        .get_or_init(|| {
            let domains = domains();
            let grams = domains
                .par_iter()
                .map(|d| {
                    solve_kernels(d, CORPUS_GRID)
                        .map(|ks| gram(&ks))
                        .map_err(|e| e.to_string())
                })
                .collect::<Result<Vec<_>, _>>()?;
            let consts = grams
                .iter()
                .map(|g| constants(g).map_err(|e| e.to_string()))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Corpus {
                domains,
                grams,
                consts,
            })
        })
        .as_ref()
        .map_err(Clone::clone)
}

fn disk(x: f64, y: f64, r: f64) -> Hole {
    Hole::disk(Point::new(x, y), r).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn within(budget: Duration, start: Instant) -> Result<(), String> {
    let t = start.elapsed();
    if t <= budget {
        Ok(())
    } else {
        Err(format!(
            "took {:.1} s, budget {} s",
            t.as_secs_f64(),
            budget.as_secs()
        ))
    }
}

fn annulus_closed_form() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut worst_product: f64 = 0.0;
    for r in [0.1, 0.3, 0.5, 0.7] {
        let d = gen_annulus(r).map_err(|e| e.to_string())?;
        let ks = solve_kernels(&d, 1024).map_err(|e| e.to_string())?;
        let c = constants(&gram(&ks)).map_err(|e| e.to_string())?;
        let exact = (r.ln().abs() / (2.0 * PI)).sqrt();
        let err = rel(c.c_i, exact);
        if err > 0.03 {
            return Err(format!("r = {r}: c_i = {} vs {exact}", c.c_i));
        }
        worst = worst.max(err);
        worst_product = worst_product.max((c.c_b * c.c_i - 1.0).abs());
    }
    // sqrt(g) * (1 / sqrt(g)) rounds to within one ulp of 1
    if worst_product > f64::EPSILON {
        return Err(format!("|c_b c_i - 1| = {worst_product:e}"));
    }
    within(Duration::from_secs(30), start)?;
    Ok(format!(
        "worst c_i error {:.2}%, |c_b c_i - 1| <= {worst_product:e}, {:.1} s",
        100.0 * worst,
        start.elapsed().as_secs_f64()
    ))
}

fn diag_identity() -> Outcome {
    let start = Instant::now();
    let ds = domains();
    let rows = ds
        .par_iter()
        .map(|d| {
            let ks = solve_kernels(d, CORPUS_GRID).map_err(|e| e.to_string())?;
            let report = diag_vs_capacity(d, &ks).map_err(|e| e.to_string())?;
            Ok((gram(&ks), report))
        })
        .collect::<Result<Vec<_>, String>>()?;
    let mut worst: f64 = 0.0;
    let mut holes = 0;
    for (i, (_, report)) in rows.iter().enumerate() {
        for row in &report.rows {
            if row.rel_diff > 0.01 {
                return Err(format!(
                    "domain {i} hole {}: G = {} vs cap = {}",
                    row.hole, row.gram, row.capacity
                ));
            }
            worst = worst.max(row.rel_diff);
            holes += 1;
        }
    }
    within(Duration::from_secs(300), start)?;
    let grams: Vec<GramMatrix> = rows.into_iter().map(|(g, _)| g).collect();
    if let Ok(consts) = grams.iter().map(constants).collect::<Result<Vec<_>, _>>() {
        let _ = CORPUS.set(Ok(Corpus {
            domains: ds,
            grams,
            consts,
        }));
    }
    Ok(format!(
        "{holes} holes, worst {worst:.2e}, {:.1} s",
        start.elapsed().as_secs_f64()
    ))
}

fn sign_structure() -> Outcome {
    let c = corpus()?;
    let mut largest = f64::NEG_INFINITY;
    for (i, g) in c.grams.iter().enumerate() {
        if let Some(&(j, k, v)) = g.sign_violations().first() {
            return Err(format!("domain {i}: G[{j}][{k}] = {v}"));
        }
        for j in 0..g.dim() {
            for k in 0..j {
                largest = largest.max(g.get(j, k));
            }
        }
    }
    Ok(format!("largest off-diagonal entry {largest:.3e}"))
}

fn weak_strong() -> Outcome {
    let c = corpus()?;
    let mut worst: f64 = 0.0;
    for (i, k) in c.consts.iter().enumerate() {
        let b = k.weak_strong_bound();
        if !b.holds {
            return Err(format!("domain {i}: {} > {}", b.lhs, b.rhs));
        }
        worst = worst.max(b.lhs / b.rhs);
    }
    Ok(format!("max lambda_max / (2 max G_jj) = {worst:.4}"))
}

fn sorted_eigenvalues(g: &GramMatrix) -> Vec<f64> {
    let mut v = symmetric_eigen(g.matrix()).values;
    v.sort_by(f64::total_cmp);
    v
}

fn unit_caps(d: &DomainSpec, n: usize) -> Result<Vec<f64>, String> {
    d.holes
        .iter()
        .map(|h| {
            cap2(&Plate::hole(h.clone()), &Plate::unit_complement(), n)
                .map(|c| c.value)
                .map_err(|e| e.to_string())
        })
        .collect()
}

fn conformal_invariance() -> Outcome {
    const N: usize = 512;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 5);
    let jobs: Vec<(usize, MobiusMap)> = (0..CORPUS_SIZE)
        .flat_map(|i| (0..5).map(move |_| i))
        .map(|i| {
            let z0 = Point::polar(0.3 * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..2.0 * PI));
            (i, MobiusMap::new(z0, rng.gen_range(0.0..2.0 * PI)).unwrap())
        })
        .collect();
    let ds = domains();
    let base = ds
        .par_iter()
        .map(|d| {
            let g = gram(&solve_kernels(d, N).map_err(|e| e.to_string())?);
            Ok((sorted_eigenvalues(&g), unit_caps(d, N)?))
        })
        .collect::<Result<Vec<_>, String>>()?;
    let errors = jobs
        .par_iter()
        .map(|(i, m)| {
            let image = transform_domain(&ds[*i], m).map_err(|e| e.to_string())?;
            let g = gram(&solve_kernels(&image, N).map_err(|e| e.to_string())?);
            let eig = sorted_eigenvalues(&g);
            let caps = unit_caps(&image, N)?;
            let (eig0, caps0) = &base[*i];
            let e = eig
                .iter()
                .zip(eig0)
                .map(|(a, b)| rel(*a, *b))
                .fold(0.0, f64::max);
            let c = caps
                .iter()
                .zip(caps0)
                .map(|(a, b)| rel(*a, *b))
                .fold(0.0, f64::max);
            Ok((*i, e, c))
        })
        .collect::<Result<Vec<_>, String>>()?;
    let (mut we, mut wc): (f64, f64) = (0.0, 0.0);
    for (i, e, c) in errors {
        if e > 0.03 || c > 0.03 {
            return Err(format!(
                "domain {i}: eigenvalue error {e:.3}, capacity error {c:.3}"
            ));
        }
        we = we.max(e);
        wc = wc.max(c);
    }
    Ok(format!(
        "{} maps, worst eigenvalue error {:.2}%, worst capacity error {:.2}%",
        5 * CORPUS_SIZE,
        100.0 * we,
        100.0 * wc
    ))
}

fn nearest_gap(d: &DomainSpec, j: usize) -> (Option<usize>, f64) {
    let mut best = (
        None,
        euclid_gap(Component::Hole(&d.holes[j]), Component::Outer),
    );
    for (k, h) in d.holes.iter().enumerate() {
        let g = signed_gap(&d.holes[j], h);
        if k != j && g < best.1 {
            best = (Some(k), g);
        }
    }
    best
}

fn capacity_bounds() -> Outcome {
    let c = corpus()?;
    let mut pairs: Vec<(Plate, Plate, usize)> = Vec::new();
    for d in &c.domains {
        for j in 0..d.len() {
            pairs.push((
                Plate::hole(d.holes[j].clone()),
                Plate::unit_complement(),
                CORPUS_GRID,
            ));
            if let (Some(k), _) = nearest_gap(d, j) {
                if k > j || nearest_gap(d, k).0 != Some(j) {
                    pairs.push((
                        Plate::hole(d.holes[j].clone()),
                        Plate::hole(d.holes[k].clone()),
                        1024,
                    ));
                }
            }
        }
    }
    let corpus_pairs = pairs.len();
    // near-touching: gap / diam from 0.2 down to 0.02
    for ratio in [0.2, 0.1, 0.05, 0.03, 0.02] {
        let gap = ratio * 0.2;
        pairs.push((
            Plate::hole(disk(-0.1 - gap / 2.0, 0.0, 0.1)),
            Plate::hole(disk(0.1 + gap / 2.0, 0.0, 0.1)),
            2048,
        ));
    }
    // far-separated: gap / diam from 2 to 12
    for ratio in [2.0, 3.0, 5.0, 8.0, 12.0] {
        let gap = ratio * 0.1;
        pairs.push((
            Plate::hole(disk(-0.05 - gap / 2.0, 0.0, 0.05)),
            Plate::hole(disk(0.05 + gap / 2.0, 0.0, 0.05)),
            1024,
        ));
    }
    let lower = pairs
        .par_iter()
        .map(|(a, b, n)| {
            let cap = cap2(a, b, *n).map_err(|e| e.to_string())?;
            let low = check_lower_bound(a, b, &cap).map_err(|e| e.to_string())?;
            // b lies outside the eps diam neighborhood of a
            let eps = a.distance(b) / a.diameter();
            let up = cap.value <= upper_bound_value(eps) * (1.0 + CAP_SLACK);
            Ok((low, up, cap.value, eps))
        })
        .collect::<Result<Vec<_>, String>>()?;
    for (i, (low, up, cap, eps)) in lower.iter().enumerate() {
        if !low.holds {
            return Err(format!("pair {i}: lower bound {} > {}", low.lhs, low.rhs));
        }
        if !up {
            return Err(format!(
                "pair {i}: cap {cap} above upper bound at eps = {eps}"
            ));
        }
    }
    let mut holes = 0;
    for (i, (d, g)) in c.domains.iter().zip(&c.grams).enumerate() {
        for j in 0..d.len() {
            let eps = nearest_gap(d, j).1 / d.holes[j].diameter();
            if g.get(j, j) > upper_bound_value(eps) * (1.0 + CAP_SLACK) {
                return Err(format!(
                    "domain {i} hole {j}: G_jj = {} at eps = {eps}",
                    g.get(j, j)
                ));
            }
            holes += 1;
        }
    }
    let neighborhoods = [0.05, 0.2, 1.0, 4.0]
        .par_iter()
        .map(|&eps| check_upper_bound(&disk(0.1, -0.2, 0.1), eps, 512).map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, String>>()?;
    if let Some((b, _)) = neighborhoods.iter().find(|(b, _)| !b.holds) {
        return Err(format!("neighborhood capacity {} > {}", b.lhs, b.rhs));
    }
    Ok(format!(
        "{corpus_pairs} corpus pairs, 10 engineered pairs, {holes} hole neighborhoods, 4 eps sweeps; all within {:.0}% slack",
        100.0 * CAP_SLACK
    ))
}

fn rho_oracle() -> Outcome {
    const N: usize = 1024;
    let start = Instant::now();
    let ds: Vec<DomainSpec> = seeded_corpus(SEED ^ 7, 10);
    let h = 2.0 / N as f64;
    let graphs: Vec<_> = ds.iter().map(rho_distances).collect();
    let slack = |g: f64| 0.02 * g + 4.0 * h;
    let wide = ds
        .par_iter()
        .map(|d| rho_pixel_oracle_with(d, N, 3))
        .collect::<Vec<_>>();
    let mut worst: f64 = 0.0;
    for (i, (graph, pixel)) in graphs.iter().zip(&wide).enumerate() {
        for (j, (g, p)) in graph.u.iter().zip(&pixel.u).enumerate() {
            if (g - p).abs() > slack(*g) {
                return Err(format!("domain {i} hole {j}: graph {g} vs pixel {p}"));
            }
            worst = worst.max((g - p).abs() / slack(*g));
        }
    }
    let two = DomainSpec::new(vec![disk(0.0, 0.0, 0.1), disk(0.5, 0.0, 0.1)]);
    let r = rho_distances(&two);
    // 0.3 + 0.4 rounds to one ulp above 0.7
    let ulps = |a: f64, b: f64| (a - b).abs() / (f64::EPSILON * b);
    if ulps(r.u[0], 0.7) > 2.0 || ulps(r.u[1], 0.4) > 2.0 || r.chain != vec![Some(1), None] {
        return Err(format!("two-disk case gives {:?}", r.u));
    }
    within(Duration::from_secs(120), start)?;
    let secs = start.elapsed().as_secs_f64();
    let narrow = ds
        .par_iter()
        .map(|d| rho_pixel_oracle(d, N))
        .collect::<Vec<_>>();
    let (mut outside, mut ratio, mut total): (usize, f64, usize) = (0, 0.0, 0);
    for (graph, pixel) in graphs.iter().zip(&narrow) {
        for (g, p) in graph.u.iter().zip(&pixel.u) {
            total += 1;
            outside += usize::from((g - p).abs() > slack(*g));
            ratio = ratio.max(p / g);
        }
    }
    Ok(format!(
        "32-direction oracle: worst error {:.0}% of tolerance; 8-connected oracle: {outside}/{total} holes outside \
         tolerance, max ratio {ratio:.4}; two-disk case (0.7, 0.4) to rounding; {secs:.1} s",
        100.0 * worst
    ))
}

fn rho_and_budget() -> Outcome {
    let c = corpus()?;
    let (mut low, mut budget): (f64, f64) = (f64::INFINITY, f64::NEG_INFINITY);
    for (i, (d, k)) in c.domains.iter().zip(&c.consts).enumerate() {
        let r = check_rho_lower_bound(d, &rho_distances(d), k.c_b_weak);
        if !r.holds {
            return Err(format!("domain {i}: rho bound {} > u = {}", r.lhs, r.rhs));
        }
        let b = check_dist_sq_budget(d, k);
        if !b.holds {
            return Err(format!("domain {i}: log sum {} > {}", b.lhs, b.rhs));
        }
        low = low.min(r.rhs / r.lhs);
        budget = budget.max(b.lhs - b.rhs);
    }
    Ok(format!(
        "min u / bound {low:.3e}, max log(sum / budget) {budget:.2}"
    ))
}

fn dyadic_criterion() -> Outcome {
    let t = Thresholds::default();
    let candidates: Vec<f64> = (0..10).map(|k| 2f64.powi(k)).collect();
    let mut notes = Vec::new();
    let mut failures = Vec::new();
    let mut prev: Option<(usize, f64, f64)> = None;
    for n in 1..=5 {
        let d = gen_dyadic(n).map_err(|e| e.to_string())?;
        let s = smallest_connected_s(&d, &candidates)
            .map_err(|e| e.to_string())?
            .ok_or_else(|| format!("n = {n}: no connected S up to 512"))?;
        let r = full_criterion(&d, s, &t).map_err(|e| e.to_string())?;
        if !r.verdict {
            failures.push(format!("n = {n}: conditions {:?}", r.conditions(&t)));
        }
        let (b1, b2) = (r.blaschke["1"], r.blaschke["2"]);
        // level k adds 2^k (1.49 * 2^-k)^2, a geometric series
        if b2 >= 1.49 * 1.49 {
            failures.push(format!("n = {n}: blaschke_2 = {b2}"));
        }
        if let Some((n0, b1_prev, _)) = prev {
            if r.n_ulf != n0 {
                failures.push(format!("N changes from {n0} to {} at n = {n}", r.n_ulf));
            }
            if b1 - b1_prev < 0.4 {
                failures.push(format!("n = {n}: blaschke_1 rises by {}", b1 - b1_prev));
            }
        }
        notes.push(format!("n={n}: S={s} N={} b1={b1:.2} b2={b2:.3}", r.n_ulf));
        prev = Some((r.n_ulf, b1, b2));
    }
    if failures.is_empty() {
        Ok(notes.join("; "))
    } else {
        Err(format!("{} [{}]", failures.join("; "), notes.join("; ")))
    }
}

fn annulus_trend() -> Outcome {
    let radii = [0.7, 0.5, 0.3, 0.1, 0.03, 0.01];
    let rows = radii
        .par_iter()
        .map(|&r| {
            let d = gen_annulus(r).map_err(|e| e.to_string())?;
            let c = constants(&gram(&solve_kernels(&d, 1024).map_err(|e| e.to_string())?))
                .map_err(|e| e.to_string())?;
            let s = smallest_connected_s(&d, &(0..12).map(|k| 2f64.powi(k)).collect::<Vec<_>>())
                .map_err(|e| e.to_string())?
                .unwrap_or(f64::INFINITY);
            Ok((r, c.c_i, s))
        })
        .collect::<Result<Vec<_>, String>>()?;
    for w in rows.windows(2) {
        if w[1].1 <= w[0].1 {
            return Err(format!(
                "c_i does not increase from r = {} to r = {}",
                w[0].0, w[1].0
            ));
        }
        if w[1].2 < w[0].2 {
            return Err(format!(
                "smallest connected S drops from r = {} to r = {}",
                w[0].0, w[1].0
            ));
        }
    }
    Ok(rows
        .iter()
        .map(|(r, c, s)| format!("r={r}: c_i={c:.3} S={s}"))
        .collect::<Vec<_>>()
        .join("; "))
}

fn inverse_pair() -> Outcome {
    const N: usize = 1024;
    let mut notes = Vec::new();
    for delta in [0.01, 0.005] {
        let (d, basis) = gen_inverse(delta).map_err(|e| e.to_string())?;
        let g = gram(&solve_kernels(&d, N).map_err(|e| e.to_string())?);
        let b = constants_under_basis(&g, &basis).map_err(|e| e.to_string())?;
        if let Some(e) = b.envelopes.iter().find(|e| !e.holds) {
            return Err(format!(
                "delta = {delta}: {} ({} > {})",
                e.name, e.lhs, e.rhs
            ));
        }
        let curve = basis_change(&g, &basis).map_err(|e| e.to_string())?;
        let (pre, _) = inverse_pre_image(delta).map_err(|e| e.to_string())?;
        let oracle = gram(&solve_kernels(&pre, N).map_err(|e| e.to_string())?);
        let diffs: Vec<String> = [(0, 0), (0, 1), (1, 1)]
            .iter()
            .map(|&(j, k)| format!("{:.1}%", 100.0 * rel(curve.get(j, k), oracle.get(j, k))))
            .collect();
        notes.push(format!(
            "delta={delta}: c_b {:.3}/{:.3}, c_i {:.3}/{:.3} (curve/hole), pre-image Gram gap {}",
            b.curve.c_b,
            b.hole.c_b,
            b.curve.c_i,
            b.hole.c_i,
            diffs.join(" ")
        ));
    }
    Ok(notes.join("; "))
}

fn ulf_exactness() -> Outcome {
    let ds = domains();
    let rows = ds
        .par_iter()
        .enumerate()
        .map(|(i, d)| {
            let exact = ulf_constant(d).map_err(|e| e.to_string())?.value();
            let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ (i as u64 + 100));
            let sampled = ulf_sampling(d, 100_000, &mut rng).map_err(|e| e.to_string())?;
            Ok((exact, sampled))
        })
        .collect::<Result<Vec<_>, String>>()?;
    if let Some((i, (e, s))) = rows.iter().enumerate().find(|(_, (e, s))| e < s) {
        return Err(format!("domain {i}: arrangement {e} < sampling {s}"));
    }
    let equal = rows.iter().filter(|(e, s)| e == s).count();
    let summary = format!("{equal}/{} domains equal", rows.len());
    if equal * 10 >= rows.len() * 9 {
        Ok(summary)
    } else {
        Err(summary)
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("1", "annulus closed form", annulus_closed_form),
        ("2", "kernel norm equals capacity", diag_identity),
        ("3", "off-diagonal Gram entries negative", sign_structure),
        ("4", "lambda_max <= 2 max G_jj", weak_strong),
        ("5", "conformal invariance", conformal_invariance),
        ("6", "capacity bounds", capacity_bounds),
        ("7", "rho graph vs pixel oracle", rho_oracle),
        ("8", "rho lower bound and dist^2 budget", rho_and_budget),
        ("9a", "dyadic family criterion", dyadic_criterion),
        ("9b", "annulus c_i monotone as r -> 0", annulus_trend),
        ("9c", "inverse domain basis envelopes", inverse_pair),
        ("10", "ULF arrangement vs sampling", ulf_exactness),
    ];
    let only: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut unexpected = 0;
    for (id, name, f) in criteria {
        if !only.is_empty() && !only.iter().any(|o| o == id) {
            continue;
        }
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        let known = KNOWN_FAILURES.contains(&id);
        match outcome {
            Ok(detail) => {
                println!("PASS {id} {name} ({secs:.1} s): {detail}");
                if known {
                    println!("     {id} is listed as a known failure but passed");
                }
            }
            Err(detail) => {
                println!("FAIL {id} {name} ({secs:.1} s): {detail}");
                if known {
                    println!("     {id} is a known deviation");
                } else {
                    unexpected += 1;
                }
            }
        }
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
