//! Acceptance criteria, one test each. Every test prints a PASS or FAIL line
//! with the measured value before asserting.

mod common;

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use choquet_smaa::capacity::{base_constraints, choquet, shapley, MobiusVector};
use choquet_smaa::hierarchy::CriterionId;
use choquet_smaa::lp::{solve_epsilon_max, COMPATIBILITY_THRESHOLD};
use choquet_smaa::pipeline::{self, bundled_data_dir, NodeReport, ProfileOutcome, RunConfig, RunReport, VERIFY_TOLERANCE};
use choquet_smaa::sampler::{sample, SamplerOptions, SAMPLE_SLACK};
use common::{brute_force_feasible, eis, flat, lovasz, profile_constraints};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PROFILES: [(&str, &str); 3] = [("dmu", "university"), ("dmi", "industry"), ("dmg", "government")];

fn report(criterion: &str, pass: bool, detail: String) {
    println!("{} criterion {criterion}: {detail}", if pass { "PASS" } else { "FAIL" });
}

struct FullRun {
    report: RunReport,
    elapsed: Duration,
    _dir: tempfile::TempDir,
}

/// The bundled pipeline with default settings: three profiles, 10,000
/// samples, seed 42, root and its four children.
fn full_run() -> &'static FullRun {
    static RUN: OnceLock<FullRun> = OnceLock::new();
    RUN.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig::bundled(dir.path().join("out"));
        let start = Instant::now();
        let report = pipeline::run(&cfg).unwrap();
        FullRun { report, elapsed: start.elapsed(), _dir: dir }
    })
}

fn ranked(run: &'static FullRun, profile: &str) -> &'static [NodeReport] {
    match &run.report.profile(profile).unwrap().outcome {
        ProfileOutcome::Ranked { nodes, .. } => nodes,
        ProfileOutcome::Incompatible { conflict } => panic!("{profile} incompatible: {conflict:?}"),
    }
}

fn published_ranks(column: &str) -> Vec<(String, f64)> {
    let mut r = csv::Reader::from_path(bundled_data_dir().join("eis_expected_ranking_published.csv")).unwrap();
    let idx = r.headers().unwrap().iter().position(|h| h == column).unwrap();
    r.records().map(|rec| {
        let rec = rec.unwrap();
        (rec[0].to_string(), rec[idx].parse().unwrap())
    })
    .collect()
}

/// Ranks with ties averaged.
fn fractional_ranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|&x| {
            let below = v.iter().filter(|&&y| y < x).count() as f64;
            let equal = v.iter().filter(|&&y| y == x).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

/// Spearman coefficient as the Pearson correlation of fractional ranks.
fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let (ra, rb) = (fractional_ranks(a), fractional_ranks(b));
    let n = ra.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma) * (x - ma)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb) * (y - mb)).sum();
    cov / (va * vb).sqrt()
}

#[test]
fn criterion_01_normalization_reproduction() {
    let dir = bundled_data_dir();
    let start = Instant::now();
    let v = pipeline::verify(
        &dir.join("eis_hierarchy.json"),
        &dir.join("eis_raw.csv"),
        &dir.join("eis_normalized_expected.csv"),
        VERIFY_TOLERANCE,
    )
    .unwrap();
    let elapsed = start.elapsed();
    let cells: usize = v.columns.len() * 28;
    let worst = v.columns.iter().max_by(|a, b| a.max_error.total_cmp(&b.max_error)).unwrap();
    let pass = v.passed() && elapsed < Duration::from_secs(1) && cells == 756;
    report(
        "1",
        pass,
        format!(
            "{cells} cells, max |error| {:.4} ({} at {}), tolerance {VERIFY_TOLERANCE}, {elapsed:?}",
            v.max_error(),
            worst.criterion,
            worst.worst_alternative
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_02_choquet_degeneration() {
    let (h, table) = eis();
    let m = MobiusVector::uniform_additive(27);
    let mut worst: f64 = 0.0;
    for a in 0..table.alternative_count() {
        let row = table.row(a);
        let mean = row.iter().sum::<f64>() / row.len() as f64;
        worst = worst.max((choquet(&m, &h, &CriterionId::root(), row).unwrap() - mean).abs());
    }
    let pass = table.alternative_count() == 28 && worst <= 1e-12;
    report("2", pass, format!("max |Choquet - mean| over 28 countries = {worst:.2e}"));
    assert!(pass);
}

#[test]
fn criterion_03_brute_force_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    let mut infeasible = 0;
    for (n, count) in [(2, 333), (3, 333), (4, 334)] {
        let h = flat(n);
        let s = sample(&base_constraints(&h), count, 100 + n as u64, &SamplerOptions::default()).unwrap();
        for m in &s.vectors {
            if !brute_force_feasible(m.coefficients(), n, 1e-9) {
                infeasible += 1;
            }
            let x: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
            let got = choquet(m, &h, &CriterionId::root(), &x).unwrap();
            worst = worst.max((got - lovasz(m.coefficients(), n, &x)).abs());
            checked += 1;
        }
    }
    let pass = checked == 1000 && infeasible == 0 && worst <= 1e-10;
    report("3", pass, format!("{checked} capacities, {infeasible} infeasible, max |difference| {worst:.2e}"));
    assert!(pass);
}

#[test]
fn criterion_04_shapley_normalization() {
    let (h, table) = eis();
    let c = profile_constraints(&h, &table, "dmu");
    let s = sample(&c, 1000, 4, &SamplerOptions::default()).unwrap();
    let root = CriterionId::root();
    let children: Vec<CriterionId> = h.children(&root).unwrap().iter().map(|n| n.id.clone()).collect();
    let worst = s
        .vectors
        .iter()
        .map(|m| {
            let total: f64 = children.iter().map(|ch| shapley(m, &h, &root, ch).unwrap()).sum();
            (total - 1.0).abs()
        })
        .fold(0.0, f64::max);
    let pass = s.len() == 1000 && worst <= 1e-12;
    report("4", pass, format!("1000 vectors, max |Σ Shapley - 1| = {worst:.2e}"));
    assert!(pass);
}

#[test]
fn criterion_05_compatibility() {
    let (h, table) = eis();
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, _) in PROFILES {
        let eps = solve_epsilon_max(&profile_constraints(&h, &table, name)).unwrap().epsilon_star;
        pass &= eps >= COMPATIBILITY_THRESHOLD;
        parts.push(format!("{name} ε* = {eps:.6}"));
    }
    report("5", pass, parts.join(", "));
    assert!(pass);
}

#[test]
fn criterion_06_smaa_extremes() {
    let run = full_run();
    let alts = &run.report.alternatives;
    let idx = |c: &str| alts.iter().position(|a| a == c).unwrap();
    let rai = |profile: &str, country: &str, pos: usize| {
        let root = ranked(run, profile).iter().find(|r| r.node.is_root()).unwrap();
        root.statistics.ranks.rai(idx(country), pos)
    };
    let checks = [
        ("dmi", "SE", 1, 0.95),
        ("dmu", "RO", 28, 0.99),
        ("dmu", "BG", 27, 0.99),
        ("dmg", "RO", 28, 0.99),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (p, country, pos, min) in checks {
        let v = rai(p, country, pos);
        pass &= v >= min;
        parts.push(format!("{p} {country} b^{pos} = {v:.4} (≥ {min})"));
    }
    report("6", pass, parts.join(", "));
    assert!(pass);
}

#[test]
fn criterion_07_expected_ranking_agreement() {
    let run = full_run();
    let alts = &run.report.alternatives;
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, column) in PROFILES {
        let root = match &run.report.profile(name).unwrap().outcome {
            ProfileOutcome::Ranked { root, .. } => root,
            ProfileOutcome::Incompatible { .. } => panic!("{name} incompatible"),
        };
        let published = published_ranks(column);
        let ours: Vec<f64> = published
            .iter()
            .map(|(a, _)| root[alts.iter().position(|x| x == a).unwrap()].ordinal as f64)
            .collect();
        let theirs: Vec<f64> = published.iter().map(|(_, r)| *r).collect();
        let rho = spearman(&ours, &theirs);
        let at = |c: &str| root[alts.iter().position(|x| x == c).unwrap()].ordinal;
        let ok = rho >= 0.95 && at("SE") == 1 && at("RO") == 28;
        pass &= ok;
        parts.push(format!("{name} ρ = {rho:.4}, SE {}, RO {}", at("SE"), at("RO")));
    }
    report("7", pass, parts.join("; "));
    assert!(pass);
}

#[test]
fn criterion_08_statistical_identities() {
    let run = full_run();
    let mut pass = true;
    let mut ties = 0;
    let mut nodes = 0;
    for (name, _) in PROFILES {
        for node in ranked(run, name) {
            nodes += 1;
            let (rm, wm) = (&node.statistics.ranks, &node.statistics.wins);
            let n = rm.alternatives();
            ties += wm.tie_count();
            for a in 0..n {
                pass &= (1..=n).map(|p| rm.count(a, p)).sum::<u64>() == rm.samples();
                for b in (0..n).filter(|&b| b != a) {
                    let both = wm.wins(a, b) + wm.wins(b, a);
                    pass &= both <= wm.samples();
                    let tie_free = wm.tie_frequency(a, b) == 0.0;
                    pass &= !tie_free || both == wm.samples();
                }
            }
        }
    }
    report("8", pass, format!("{nodes} node reports checked, {ties} tied pairs reported"));
    assert!(pass);
}

#[test]
fn criterion_09_sampler_validity() {
    let (h, table) = eis();
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, _) in PROFILES {
        let c = profile_constraints(&h, &table, name);
        let opts = SamplerOptions { chains: 4, ..SamplerOptions::default() };
        let s = sample(&c, 10_000, 42, &opts).unwrap();
        let bad = s
            .vectors
            .iter()
            .filter(|m| !m.is_feasible(SAMPLE_SLACK) || c.first_violation(m, s.epsilon, SAMPLE_SLACK).is_some())
            .count();
        pass &= bad == 0 && s.len() == 10_000;
        parts.push(format!("{name} {bad}/10000 invalid"));
    }

    let s = sample(&base_constraints(&flat(2)), 100_000, 9, &SamplerOptions::default()).unwrap();
    let cdf = |z: f64| {
        let z = z.clamp(-1.0, 1.0);
        if z <= 0.0 { (1.0 + z) * (1.0 + z) / 2.0 } else { 1.0 - (1.0 - z) * (1.0 - z) / 2.0 }
    };
    let mut bins = [0usize; 20];
    for m in &s.vectors {
        bins[(((m.coefficients()[2] + 1.0) / 0.1) as usize).min(19)] += 1;
    }
    let tv: f64 = bins
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let lo = -1.0 + 0.1 * k as f64;
            (c as f64 / 100_000.0 - (cdf(lo + 0.1) - cdf(lo))).abs()
        })
        .sum::<f64>()
        / 2.0;
    pass &= tv < 0.03;
    parts.push(format!("2-leaf m12 total variation {tv:.4} (< 0.03)"));
    report("9", pass, parts.join(", "));
    assert!(pass);
}

#[test]
fn criterion_10_performance_envelope() {
    let run = full_run();
    let threads = rayon::current_num_threads();
    let pass = run.elapsed < Duration::from_secs(300);
    report("10", pass, format!("full pipeline in {:.1?} on {threads} thread(s), limit 5 min", run.elapsed));
    assert!(pass);
}
