//! End-to-end driver: load, normalize, compile, solve, sample, summarize and
//! write reports. Also the normalization check against a golden table.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::capacity::base_constraints;
use crate::dataset::{column_stats, load_table_file, normalize, NormalizedTable};
use crate::error::{Error, Result};
use crate::hierarchy::{CriterionId, Hierarchy};
use crate::lp::{diagnose, solve_epsilon_max_with_cuts, to_mps, Cuts};
use crate::preferences::{compile, PreferenceProfile};
use crate::sampler::{sample_with_solution, SampleSet, SamplerOptions, DEFAULT_BURN_IN, DEFAULT_THINNING};
use crate::smaa::{analyze, pwi_csv, rai_csv, summarize, summary_csv, NodeStatistics, RankSummary};

/// Directory holding the bundled case-study files.
pub fn bundled_data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub hierarchy: PathBuf,
    pub data: PathBuf,
    pub prefs: Vec<PathBuf>,
    pub samples: usize,
    pub seed: u64,
    pub burn_in: usize,
    pub thinning: usize,
    /// Chains per profile; part of the result, unlike the thread count.
    pub chains: usize,
    pub out: PathBuf,
    /// Node labels; `None` means the root and its children.
    pub nodes: Option<Vec<String>>,
    pub emit_samples: bool,
    pub emit_lp: bool,
    /// Worker threads; `None` lets rayon decide.
    pub threads: Option<usize>,
}

impl RunConfig {
    /// The bundled hierarchy, data and the three stakeholder profiles.
    pub fn bundled(out: impl Into<PathBuf>) -> Self {
        let dir = bundled_data_dir();
        RunConfig {
            hierarchy: dir.join("eis_hierarchy.json"),
            data: dir.join("eis_raw.csv"),
            prefs: ["dmu", "dmi", "dmg"].iter().map(|p| dir.join(format!("{p}.prefs"))).collect(),
            samples: 10_000,
            seed: 42,
            burn_in: DEFAULT_BURN_IN,
            thinning: DEFAULT_THINNING,
            chains: 4,
            out: out.into(),
            nodes: None,
            emit_samples: false,
            emit_lp: false,
            threads: None,
        }
    }

    fn check(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::Sampler("at least one sample is required".into()));
        }
        if self.thinning == 0 || self.chains == 0 {
            return Err(Error::Sampler("thinning and chain count must be positive".into()));
        }
        if self.prefs.is_empty() {
            return Err(Error::Preference {
                line: 0,
                message: "no preference files given".into(),
            });
        }
        Ok(())
    }
}

/// The root followed by its children.
pub fn default_nodes(h: &Hierarchy) -> Vec<CriterionId> {
    let root = CriterionId::root();
    let mut nodes = vec![root.clone()];
    nodes.extend(h.children(&root).expect("root exists").iter().filter(|c| !c.is_leaf()).map(|c| c.id.clone()));
    nodes
}

pub fn resolve_nodes(h: &Hierarchy, labels: &[String]) -> Result<Vec<CriterionId>> {
    labels
        .iter()
        .map(|l| {
            let node = h.find(l)?;
            if node.is_leaf() {
                return Err(Error::Hierarchy(format!("`{l}` is an elementary criterion, not a node")));
            }
            Ok(node.id.clone())
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct NodeReport {
    pub node: CriterionId,
    pub label: String,
    pub statistics: NodeStatistics,
    pub summary: Vec<RankSummary>,
}

#[derive(Clone, Debug)]
pub enum ProfileOutcome {
    Ranked { sampling_epsilon: f64, nodes: Vec<NodeReport>, root: Vec<RankSummary> },
    /// No compatible model; the statement ids of an irreducible conflict.
    Incompatible { conflict: Vec<String> },
}

#[derive(Clone, Debug)]
pub struct ProfileReport {
    pub name: String,
    pub epsilon_star: f64,
    pub generated_rows: usize,
    pub outcome: ProfileOutcome,
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub alternatives: Vec<String>,
    pub profiles: Vec<ProfileReport>,
}

impl RunReport {
    pub fn profile(&self, name: &str) -> Option<&ProfileReport> {
        self.profiles.iter().find(|p| p.name == name)
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    hierarchy: String,
    data: String,
    seed: u64,
    samples: usize,
    burn_in: usize,
    thinning: usize,
    chains: usize,
    nodes: Vec<String>,
    profiles: Vec<ManifestProfile<'a>>,
}

#[derive(Serialize)]
struct ManifestProfile<'a> {
    name: &'a str,
    source: String,
    epsilon_star: f64,
    compatible: bool,
    generated_rows: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    sampling_epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    conflict: Option<&'a [String]>,
    /// Exact score ties between distinct alternatives, per node.
    ties: Vec<NodeTies>,
}

#[derive(Serialize)]
struct NodeTies {
    node: String,
    ties: u64,
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::from(e).in_file(path))
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Loads the hierarchy and the normalized table.
pub fn load_inputs(hierarchy: &Path, data: &Path) -> Result<(Hierarchy, NormalizedTable)> {
    let h = Hierarchy::load(hierarchy)?;
    let raw = load_table_file(data, &h)?;
    let table = normalize(&raw, &column_stats(&raw), &h).map_err(|e| e.in_file(data))?;
    Ok((h, table))
}

/// Runs every profile and writes the reports under `cfg.out`.
pub fn run(cfg: &RunConfig) -> Result<RunReport> {
    cfg.check()?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cfg.threads {
        pool = pool.num_threads(t);
    }
    let pool = pool.build().map_err(|e| Error::Sampler(format!("thread pool: {e}")))?;
    pool.install(|| run_in_pool(cfg))
}

fn run_in_pool(cfg: &RunConfig) -> Result<RunReport> {
    let (h, table) = load_inputs(&cfg.hierarchy, &cfg.data)?;
    let nodes = match &cfg.nodes {
        Some(labels) => resolve_nodes(&h, labels)?,
        None => default_nodes(&h),
    };
    let labels: Vec<String> = nodes.iter().map(|n| h.label(n).map(str::to_string)).collect::<Result<_>>()?;
    let alternatives = table.alternatives().to_vec();
    let profiles = cfg
        .prefs
        .iter()
        .map(|p| PreferenceProfile::load(p, &h, Some(&alternatives)))
        .collect::<Result<Vec<_>>>()?;
    for (i, p) in profiles.iter().enumerate() {
        if profiles[..i].iter().any(|q| q.name == p.name) {
            return Err(Error::Preference {
                line: 0,
                message: format!("two profiles are named `{}`", p.name),
            });
        }
    }
    fs::create_dir_all(&cfg.out).map_err(|e| Error::from(e).in_file(&cfg.out))?;

    let opts = SamplerOptions {
        burn_in: cfg.burn_in,
        thinning: cfg.thinning,
        chains: cfg.chains,
        epsilon: None,
    };
    let base = base_constraints(&h);
    let mut reports = Vec::new();
    for (profile, source) in profiles.iter().zip(&cfg.prefs) {
        let mut c = base.clone();
        c.extend(&compile(profile, &h, Some(&table)).map_err(|e| e.in_file(source))?)?;
        let mut cuts = Cuts::default();
        let solution = solve_epsilon_max_with_cuts(&c, &mut cuts)?;
        let dir = cfg.out.join(&profile.name);
        if cfg.emit_lp || solution.is_compatible() {
            fs::create_dir_all(&dir).map_err(|e| Error::from(e).in_file(&dir))?;
        }
        if cfg.emit_lp {
            write(&dir.join("epsilon_max.mps"), &to_mps(&c, &cuts, &profile.name))?;
        }
        let outcome = if solution.is_compatible() {
            let samples: SampleSet = sample_with_solution(&c, &solution, cfg.samples, cfg.seed, &opts)?;
            if cfg.emit_samples {
                write(&dir.join("samples.csv"), &samples.to_csv(&h))?;
            }
            let mut node_reports = Vec::new();
            for (node, label) in nodes.iter().zip(&labels) {
                let statistics = analyze(&samples.vectors, &table, &h, node)?;
                let summary = summarize(&statistics.ranks);
                write(&dir.join(format!("rai_{label}.csv")), &rai_csv(&statistics.ranks, &alternatives))?;
                write(&dir.join(format!("pwi_{label}.csv")), &pwi_csv(&statistics.wins, &alternatives))?;
                write(&dir.join(format!("summary_{label}.csv")), &summary_csv(&summary, &alternatives))?;
                node_reports.push(NodeReport {
                    node: node.clone(),
                    label: label.clone(),
                    statistics,
                    summary,
                });
            }
            let root = match node_reports.iter().find(|r| r.node.is_root()) {
                Some(r) => r.summary.clone(),
                None => summarize(&analyze(&samples.vectors, &table, &h, &CriterionId::root())?.ranks),
            };
            ProfileOutcome::Ranked {
                sampling_epsilon: samples.epsilon,
                nodes: node_reports,
                root,
            }
        } else {
            let conflict = diagnose(&c)?;
            write(
                &cfg.out.join(format!("infeasible_{}.txt", profile.name)),
                &conflict_report(profile, &conflict, solution.epsilon_star),
            )?;
            ProfileOutcome::Incompatible { conflict }
        };
        reports.push(ProfileReport {
            name: profile.name.clone(),
            epsilon_star: solution.epsilon_star,
            generated_rows: solution.generated_rows,
            outcome,
        });
    }

    let report = RunReport {
        alternatives,
        profiles: reports,
    };
    write(&cfg.out.join("expected_ranking.csv"), &expected_ranking_csv(&report))?;
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        hierarchy: file_name(&cfg.hierarchy),
        data: file_name(&cfg.data),
        seed: cfg.seed,
        samples: cfg.samples,
        burn_in: cfg.burn_in,
        thinning: cfg.thinning,
        chains: cfg.chains,
        nodes: labels,
        profiles: report
            .profiles
            .iter()
            .zip(&cfg.prefs)
            .map(|(p, source)| {
                let (sampling_epsilon, conflict, ties) = match &p.outcome {
                    ProfileOutcome::Ranked {
                        sampling_epsilon, nodes, ..
                    } => (
                        Some(*sampling_epsilon),
                        None,
                        nodes
                            .iter()
                            .map(|n| NodeTies {
                                node: n.label.clone(),
                                ties: n.statistics.wins.tie_count(),
                            })
                            .collect(),
                    ),
                    ProfileOutcome::Incompatible { conflict } => (None, Some(conflict.as_slice()), Vec::new()),
                };
                ManifestProfile {
                    name: &p.name,
                    source: file_name(source),
                    epsilon_star: p.epsilon_star,
                    compatible: sampling_epsilon.is_some(),
                    generated_rows: p.generated_rows,
                    sampling_epsilon,
                    conflict,
                    ties,
                }
            })
            .collect(),
    };
    let json = serde_json::to_string_pretty(&manifest)?;
    write(&cfg.out.join("run_manifest.json"), &(json + "\n"))?;
    Ok(report)
}

fn conflict_report(profile: &PreferenceProfile, conflict: &[String], epsilon_star: f64) -> String {
    let mut out = format!(
        "profile {} admits no compatible capacity (largest margin {epsilon_star:.3e}).\n\
         Conflicting statements:\n",
        profile.name
    );
    for id in conflict {
        match profile.statement(id) {
            Some(s) => {
                let _ = writeln!(out, "{id} (line {})", s.line);
                for clause in &s.clauses {
                    let _ = writeln!(out, "    {clause}");
                }
            }
            None => {
                let _ = writeln!(out, "{id}");
            }
        }
    }
    out
}

/// Root ordinal position per profile, one column each; blank when a profile
/// has no compatible model.
pub fn expected_ranking_csv(report: &RunReport) -> String {
    let mut out = String::from("alternative");
    for p in &report.profiles {
        let _ = write!(out, ",{}", p.name);
    }
    out.push('\n');
    for (a, label) in report.alternatives.iter().enumerate() {
        out.push_str(label);
        for p in &report.profiles {
            match &p.outcome {
                ProfileOutcome::Ranked { root, .. } => {
                    let _ = write!(out, ",{}", root[a].ordinal);
                }
                ProfileOutcome::Incompatible { .. } => out.push(','),
            }
        }
        out.push('\n');
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct ColumnCheck {
    pub criterion: String,
    pub max_error: f64,
    pub worst_alternative: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub tolerance: f64,
    pub columns: Vec<ColumnCheck>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.columns.iter().all(|c| c.max_error <= self.tolerance)
    }

    pub fn max_error(&self) -> f64 {
        self.columns.iter().map(|c| c.max_error).fold(0.0, f64::max)
    }

    /// One line per column, failures last with their worst cell.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.columns {
            let verdict = if c.max_error <= self.tolerance { "PASS" } else { "FAIL" };
            let _ = writeln!(
                out,
                "{verdict} {:<8} max |error| {:.4} ({})",
                c.criterion, c.max_error, c.worst_alternative
            );
        }
        let mut failing: Vec<&ColumnCheck> = self.columns.iter().filter(|c| c.max_error > self.tolerance).collect();
        failing.sort_by(|a, b| b.max_error.total_cmp(&a.max_error));
        if failing.is_empty() {
            let _ = writeln!(out, "all {} columns within ±{}", self.columns.len(), self.tolerance);
        } else {
            let _ = writeln!(out, "{} column(s) outside ±{}; worst offenders:", failing.len(), self.tolerance);
            for c in failing {
                let _ = writeln!(out, "  {} at {}: {:.4}", c.criterion, c.worst_alternative, c.max_error);
            }
        }
        out
    }
}

/// Default tolerance: the golden table is printed with two decimals.
pub const VERIFY_TOLERANCE: f64 = 0.01;

/// Normalizes `data` and compares every cell with the golden table.
pub fn verify(hierarchy: &Path, data: &Path, golden: &Path, tolerance: f64) -> Result<VerifyReport> {
    let (h, table) = load_inputs(hierarchy, data)?;
    let expected = NormalizedTable::load(golden, &h)?;
    verify_tables(&table, &expected, tolerance).map_err(|e| e.in_file(golden))
}

pub fn verify_tables(table: &NormalizedTable, expected: &NormalizedTable, tolerance: f64) -> Result<VerifyReport> {
    if table.alternatives() != expected.alternatives() {
        return Err(Error::Table("golden table lists different alternatives".into()));
    }
    let columns = (0..table.criterion_count())
        .map(|c| {
            let (worst, err) = (0..table.alternative_count())
                .map(|a| (a, (table.get(a, c) - expected.get(a, c)).abs()))
                .fold((0, -1.0), |best, x| if x.1 > best.1 { x } else { best });
            ColumnCheck {
                criterion: table.criteria()[c].clone(),
                max_error: err,
                worst_alternative: table.alternatives()[worst].clone(),
            }
        })
        .collect();
    Ok(VerifyReport { tolerance, columns })
}
