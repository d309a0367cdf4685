//! End-to-end ensemble runs driven by a JSON manifest: generate, enumerate,
//! sample with SA, compute analytic distributions, compare, report, and emit
//! plot data. Every stochastic step draws its seed from the manifest root
//! seed, so reruns are byte-identical for any thread count.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::enumerate::{solve_planted, EliminationConfig, EnumerateConfig, SolutionSet};
use crate::error::{Error, Result};
use crate::instance::{generate_planted, PlantedInstance, PlantingParams};
use crate::io;
use crate::quantum::{quantum_gsd, Driver, DriverKind, QgsConfig, SignMode};
use crate::rng::{derive_seed, rng_from, stage};
use crate::sa::{default_pilot_grid, optimal_sweeps, sample_gsd, tts_curve, SaSchedule, SweepOrder, TtsTable};
use crate::stats::{self, ComparisonRow, Gsd};
use crate::topology::{build_chimera, ChimeraSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationSpec {
    pub clause_density: f64,
    pub loop_length_limit: usize,
    /// Candidate instances to generate.
    pub count: usize,
    /// Instances with more ground states than this are discarded.
    pub max_solutions: usize,
}

impl Default for GenerationSpec {
    fn default() -> Self {
        GenerationSpec {
            clause_density: PlantingParams::default().clause_density,
            loop_length_limit: PlantingParams::default().loop_length_limit,
            count: 10,
            max_solutions: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnumerationSpec {
    pub cap_table_size: usize,
    pub max_attempts: usize,
}

impl Default for EnumerationSpec {
    fn default() -> Self {
        let d = EliminationConfig::default();
        EnumerationSpec {
            cap_table_size: d.cap_table_size,
            max_attempts: d.max_attempts,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SaSpec {
    /// Fixed sweep count; `None` picks the pilot-grid optimum per instance.
    pub sweeps: Option<usize>,
    pub anneals: u64,
    pub beta_min: f64,
    pub beta_max: f64,
    pub order: SweepOrder,
    pub pilot_grid: Vec<usize>,
    pub pilot_anneals: u64,
    /// Sweep grid for per-solution TTS curves; empty to skip.
    pub tts_grid: Vec<usize>,
    pub tts_anneals: u64,
}

impl Default for SaSpec {
    fn default() -> Self {
        SaSpec {
            sweeps: None,
            anneals: 10_000,
            beta_min: 0.0,
            beta_max: 20.0,
            order: SweepOrder::Sequential,
            pilot_grid: default_pilot_grid(),
            pilot_anneals: 1_000,
            tts_grid: Vec::new(),
            tts_anneals: 1_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuantumSpec {
    pub drivers: Vec<DriverKind>,
    pub sign_mode: SignMode,
    pub config: QgsConfig,
}

impl Default for QuantumSpec {
    fn default() -> Self {
        QuantumSpec {
            drivers: vec![DriverKind::TransverseField, DriverKind::NonStoquastic],
            sign_mode: SignMode::Global,
            config: QgsConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CompareSpec {
    pub bootstrap: usize,
    pub p_threshold: f64,
    /// Method pairs by tag: `sa`, `tf`, `ns`.
    pub pairs: Vec<(String, String)>,
}

impl Default for CompareSpec {
    fn default() -> Self {
        CompareSpec {
            bootstrap: stats::DEFAULT_BOOTSTRAP,
            p_threshold: 0.01,
            pairs: vec![("sa".into(), "tf".into()), ("sa".into(), "ns".into()), ("tf".into(), "ns".into())],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum StageStatus {
    Done,
    Discarded { reason: String },
    Failed { error: String, exit_code: i32 },
    Blocked,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub id: String,
    pub index: usize,
    /// Artifact paths relative to the output directory, by kind.
    pub files: BTreeMap<String, String>,
    pub status: BTreeMap<String, StageStatus>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ground_states: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweeps: Option<usize>,
    /// Perturbative order per driver tag.
    #[serde(default)]
    pub quantum_order: BTreeMap<String, u8>,
}

impl InstanceRecord {
    fn done(&self, stage: &str) -> bool {
        matches!(self.status.get(stage), Some(StageStatus::Done))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentManifest {
    pub ensemble_id: String,
    pub root_seed: u64,
    pub graph: ChimeraSpec,
    pub generation: GenerationSpec,
    #[serde(default)]
    pub enumeration: EnumerationSpec,
    #[serde(default)]
    pub sa: SaSpec,
    #[serde(default)]
    pub quantum: QuantumSpec,
    #[serde(default)]
    pub compare: CompareSpec,
    #[serde(default)]
    pub instances: Vec<InstanceRecord>,
    #[serde(default)]
    pub stages: BTreeMap<String, StageStatus>,
}

impl ExperimentManifest {
    pub fn new(ensemble_id: &str, root_seed: u64, graph: ChimeraSpec, generation: GenerationSpec) -> Self {
        ExperimentManifest {
            ensemble_id: ensemble_id.to_string(),
            root_seed,
            graph,
            generation,
            enumeration: EnumerationSpec::default(),
            sa: SaSpec::default(),
            quantum: QuantumSpec::default(),
            compare: CompareSpec::default(),
            instances: Vec::new(),
            stages: BTreeMap::new(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&io::read_text(path)?)?)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        io::write_text(path, &self.to_json())
    }
}

pub const MANIFEST_FILE: &str = "manifest.json";
pub const STAGES: [&str; 7] = ["generate", "enumerate", "sa", "quantum", "compare", "report", "plotdata"];

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses the rayon default.
    pub threads: Option<usize>,
    /// Recompute completed stages and require byte-identical artifacts.
    pub verify: bool,
}

fn tag(kind: DriverKind) -> &'static str {
    kind.tag()
}

struct Ctx<'a> {
    out: &'a Path,
    verify: bool,
}

impl Ctx<'_> {
    fn path(&self, rel: &str) -> PathBuf {
        self.out.join(rel)
    }

    /// Writes an artifact, or in verify mode checks it is unchanged.
    fn emit(&self, rel: &str, text: &str) -> Result<()> {
        let path = self.path(rel);
        if self.verify && path.exists() {
            let old = io::read_text(&path)?;
            if old != text {
                return Err(Error::Integrity(format!("{} differs on recomputation", path.display())));
            }
            return Ok(());
        }
        io::write_text(&path, text)
    }

    /// A stage is skipped when done and all its files exist, unless verifying.
    fn skip(&self, rec: &InstanceRecord, stage: &str, kinds: &[&str]) -> bool {
        !self.verify
            && rec.done(stage)
            && kinds.iter().all(|k| rec.files.get(*k).is_some_and(|f| self.path(f).exists()))
    }
}

fn record_outcome(rec: &mut InstanceRecord, stage: &str, outcome: Result<()>) {
    let status = match outcome {
        Ok(()) => StageStatus::Done,
        Err(e) => StageStatus::Failed {
            error: e.to_string(),
            exit_code: e.exit_code(),
        },
    };
    rec.status.insert(stage.to_string(), status);
}

fn load_planted(ctx: &Ctx, rec: &InstanceRecord) -> Result<PlantedInstance> {
    let instance = io::load(&ctx.path(&rec.files["instance"]), io::parse_instance)?;
    let terms = io::load(&ctx.path(&rec.files["terms"]), io::parse_terms)?;
    let (planted, ground_energy) = io::load(&ctx.path(&rec.files["planted"]), io::parse_planted)?;
    Ok(PlantedInstance {
        instance,
        terms,
        planted,
        ground_energy,
    })
}

fn load_solutions(ctx: &Ctx, rec: &InstanceRecord) -> Result<SolutionSet> {
    io::load(&ctx.path(&rec.files["solutions"]), io::parse_solutions)
}

/// Runs every pending stage; the manifest is updated in place and saved to
/// `out_dir/manifest.json` after each stage.
pub fn run_pipeline(manifest: &mut ExperimentManifest, out_dir: &Path, opts: &RunOptions) -> Result<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = opts.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Resource(format!("cannot start worker pool: {e}")))?;
    pool.install(|| run_stages(manifest, out_dir, opts))
}

fn run_stages(m: &mut ExperimentManifest, out: &Path, opts: &RunOptions) -> Result<()> {
    let ctx = Ctx {
        out,
        verify: opts.verify,
    };
    let manifest_path = out.join(MANIFEST_FILE);
    if m.generation.count == 0 {
        for name in STAGES {
            m.stages.insert(name.into(), StageStatus::Done);
        }
        return m.save(&manifest_path);
    }
    let graph = build_chimera(&m.graph)?;
    ctx.emit("graph.txt", &io::graph_to_string(&graph))?;

    // generate
    if m.instances.len() < m.generation.count {
        for index in m.instances.len()..m.generation.count {
            m.instances.push(InstanceRecord {
                id: format!("{}-{index:04}", m.ensemble_id),
                index,
                files: BTreeMap::new(),
                status: BTreeMap::new(),
                ground_states: None,
                sweeps: None,
                quantum_order: BTreeMap::new(),
            });
        }
    }
    let params = PlantingParams {
        clause_density: m.generation.clause_density,
        loop_length_limit: m.generation.loop_length_limit,
        ..PlantingParams::default()
    };
    let root = m.root_seed;
    m.instances.par_iter_mut().try_for_each(|rec| -> Result<()> {
        if ctx.skip(rec, "generate", &["instance", "planted", "terms"]) {
            return Ok(());
        }
        let mut rng = rng_from(root, &[stage::GENERATE, rec.index as u64]);
        let outcome = generate_planted(&graph, &params, &mut rng).and_then(|p| {
            for (kind, ext, text) in [
                ("instance", "ising", io::instance_to_string(&p.instance)),
                ("planted", "planted", io::planted_to_string(&p)),
                ("terms", "terms", io::terms_to_string(&p.terms)),
            ] {
                let rel = format!("instances/{}.{ext}", rec.id);
                ctx.emit(&rel, &text)?;
                rec.files.insert(kind.into(), rel);
            }
            Ok(())
        });
        record_outcome(rec, "generate", outcome);
        Ok(())
    })?;
    m.stages.insert("generate".into(), StageStatus::Done);
    m.save(&manifest_path)?;

    // enumerate
    let enum_config = EnumerateConfig {
        elimination: EliminationConfig {
            cap_table_size: m.enumeration.cap_table_size,
            max_attempts: m.enumeration.max_attempts,
            ..EliminationConfig::default()
        },
        cap: m.generation.max_solutions,
    };
    m.instances.par_iter_mut().try_for_each(|rec| -> Result<()> {
        if !rec.done("generate") {
            rec.status.insert("enumerate".into(), StageStatus::Blocked);
            return Ok(());
        }
        if ctx.skip(rec, "enumerate", &["solutions"]) || matches!(rec.status.get("enumerate"), Some(StageStatus::Discarded { .. })) && !ctx.verify {
            return Ok(());
        }
        let seed = derive_seed(root, &[stage::ENUMERATE, rec.index as u64]);
        let outcome = load_planted(&ctx, rec).and_then(|p| solve_planted(&p, &rec.id, &enum_config, seed));
        match outcome {
            Ok(sols) => {
                let rel = format!("solutions/{}.sol", rec.id);
                ctx.emit(&rel, &io::solutions_to_string(&sols))?;
                rec.files.insert("solutions".into(), rel);
                if sols.truncated {
                    rec.ground_states = None;
                    rec.status.insert(
                        "enumerate".into(),
                        StageStatus::Discarded {
                            reason: format!("more than {} ground states", enum_config.cap),
                        },
                    );
                } else {
                    rec.ground_states = Some(sols.len());
                    rec.status.insert("enumerate".into(), StageStatus::Done);
                }
            }
            Err(e) => record_outcome(rec, "enumerate", Err(e)),
        }
        Ok(())
    })?;
    m.stages.insert("enumerate".into(), StageStatus::Done);
    m.save(&manifest_path)?;

    // sa
    let sa = m.sa.clone();
    let base = SaSchedule {
        sweeps: sa.sweeps.unwrap_or(1),
        beta_min: sa.beta_min,
        beta_max: sa.beta_max,
        order: sa.order,
    };
    base.validate()?;
    m.instances.par_iter_mut().try_for_each(|rec| -> Result<()> {
        if !rec.done("enumerate") {
            rec.status.insert("sa".into(), StageStatus::Blocked);
            return Ok(());
        }
        let mut kinds = vec!["gsd:sa"];
        if !sa.tts_grid.is_empty() {
            kinds.push("tts");
        }
        if ctx.skip(rec, "sa", &kinds) {
            return Ok(());
        }
        let i = rec.index as u64;
        let outcome = (|| -> Result<()> {
            let p = load_planted(&ctx, rec)?;
            let sols = load_solutions(&ctx, rec)?;
            let sweeps = match sa.sweeps {
                Some(s) => s,
                None => optimal_sweeps(
                    &p.instance,
                    &sols,
                    &base,
                    &sa.pilot_grid,
                    sa.pilot_anneals,
                    derive_seed(root, &[stage::PILOT, i]),
                )?,
            };
            rec.sweeps = Some(sweeps);
            let g = sample_gsd(&p.instance, &sols, &base.with_sweeps(sweeps), sa.anneals, derive_seed(root, &[stage::SA, i]))?;
            let rel = format!("gsd/{}.sa.gsd", rec.id);
            ctx.emit(&rel, &io::gsd_to_string(&g))?;
            rec.files.insert("gsd:sa".into(), rel);
            if !sa.tts_grid.is_empty() {
                let table = tts_curve(&p.instance, &sols, &base, &sa.tts_grid, sa.tts_anneals, derive_seed(root, &[stage::SA, i, 1]))?;
                let rel = format!("tts/{}.csv", rec.id);
                ctx.emit(&rel, &tts_to_csv(&table))?;
                rec.files.insert("tts".into(), rel);
            }
            Ok(())
        })();
        record_outcome(rec, "sa", outcome);
        Ok(())
    })?;
    m.stages.insert("sa".into(), StageStatus::Done);
    m.save(&manifest_path)?;

    // quantum
    let qspec = m.quantum.clone();
    m.instances.par_iter_mut().try_for_each(|rec| -> Result<()> {
        for &kind in &qspec.drivers {
            let stage_name = format!("quantum:{}", tag(kind));
            let file_kind = format!("gsd:{}", tag(kind));
            if !rec.done("enumerate") {
                rec.status.insert(stage_name, StageStatus::Blocked);
                continue;
            }
            if ctx.skip(rec, &stage_name, &[file_kind.as_str()]) {
                continue;
            }
            let i = rec.index as u64;
            let outcome = (|| -> Result<()> {
                let p = load_planted(&ctx, rec)?;
                let sols = load_solutions(&ctx, rec)?;
                let driver = match kind {
                    DriverKind::TransverseField => Driver::transverse_field(),
                    DriverKind::NonStoquastic => {
                        Driver::non_stoquastic(&p.instance, derive_seed(root, &[stage::QUANTUM, i, 1]), qspec.sign_mode)
                    }
                };
                let config = QgsConfig {
                    seed: derive_seed(root, &[stage::QUANTUM, i, 0]),
                    ..qspec.config.clone()
                };
                let g = quantum_gsd(&p.instance, &sols, &driver, &config)?;
                let rel = format!("gsd/{}.{}.gsd", rec.id, tag(kind));
                ctx.emit(&rel, &io::analytic_to_string(&g))?;
                rec.files.insert(file_kind.clone(), rel);
                rec.quantum_order.insert(tag(kind).into(), g.order);
                Ok(())
            })();
            record_outcome(rec, &stage_name, outcome);
        }
        Ok(())
    })?;
    m.stages.insert("quantum".into(), StageStatus::Done);
    m.save(&manifest_path)?;

    // compare
    let cmp = m.compare.clone();
    let per_instance: Vec<Vec<ComparisonRow>> = m
        .instances
        .par_iter()
        .map(|rec| -> Result<Vec<ComparisonRow>> {
            let mut rows = Vec::new();
            for (k, (a, b)) in cmp.pairs.iter().enumerate() {
                let (Some(fa), Some(fb)) = (rec.files.get(&format!("gsd:{a}")), rec.files.get(&format!("gsd:{b}"))) else {
                    continue;
                };
                if !stage_done_for(rec, a) || !stage_done_for(rec, b) {
                    continue;
                }
                let ga = io::load(&ctx.path(fa), io::parse_any_gsd)?;
                let gb = io::load(&ctx.path(fb), io::parse_any_gsd)?;
                if matches!(&ga, Gsd::Empirical(c) if c.iter().sum::<u64>() == 0)
                    || matches!(&gb, Gsd::Empirical(c) if c.iter().sum::<u64>() == 0)
                {
                    continue;
                }
                let seed = derive_seed(root, &[stage::COMPARE, rec.index as u64, k as u64]);
                rows.push(stats::compare(&rec.id, (a, &ga), (b, &gb), cmp.bootstrap, seed)?);
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    let rows: Vec<ComparisonRow> = per_instance.into_iter().flatten().collect();
    ctx.emit("report/comparisons.csv", &io::report_to_csv(&rows))?;
    m.stages.insert("compare".into(), StageStatus::Done);
    m.save(&manifest_path)?;

    // report
    let summary = EnsembleSummary::build(m, &rows);
    ctx.emit("report/summary.json", &(serde_json::to_string_pretty(&summary)? + "\n"))?;
    m.stages.insert("report".into(), StageStatus::Done);
    m.save(&manifest_path)?;

    // plotdata
    for kind in PlotKind::ALL {
        let data = emit_plot_data(out, kind)?;
        ctx.emit(&format!("plots/{}.csv", kind.name()), &data.to_csv())?;
    }
    m.stages.insert("plotdata".into(), StageStatus::Done);
    m.save(&manifest_path)
}

fn stage_done_for(rec: &InstanceRecord, method: &str) -> bool {
    match method {
        "sa" => rec.done("sa"),
        other => rec.done(&format!("quantum:{other}")),
    }
}

pub fn tts_to_csv(t: &TtsTable) -> String {
    let mut out = String::from("sweeps,solution,hits,anneals,tts\n");
    for (k, (&sw, g)) in t.sweeps.iter().zip(&t.gsds).enumerate() {
        for (i, &c) in g.counts.iter().enumerate() {
            let tts = t.tts[i][k].unwrap_or(f64::INFINITY);
            writeln!(out, "{sw},{i},{c},{},{tts}", g.anneals).unwrap();
        }
        let any = t.ground_tts(k).unwrap_or(f64::INFINITY);
        writeln!(out, "{sw},any,{},{},{any}", g.ground_hits, g.anneals).unwrap();
    }
    out
}

/// Counts mirroring the summary table, plus ensemble bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub ensemble_id: String,
    pub generated: usize,
    pub kept: usize,
    pub discarded: usize,
    pub failed: BTreeMap<String, usize>,
    /// Instances resolved at first and second order, per driver.
    pub order_counts: BTreeMap<String, [usize; 2]>,
    pub report: stats::Report,
}

impl EnsembleSummary {
    pub fn build(m: &ExperimentManifest, rows: &[ComparisonRow]) -> Self {
        let mut failed = BTreeMap::new();
        let mut order_counts: BTreeMap<String, [usize; 2]> = BTreeMap::new();
        for rec in &m.instances {
            for (stage, st) in &rec.status {
                if matches!(st, StageStatus::Failed { .. }) {
                    *failed.entry(stage.clone()).or_insert(0) += 1;
                }
            }
            for (driver, &order) in &rec.quantum_order {
                if (1..=2).contains(&order) {
                    order_counts.entry(driver.clone()).or_default()[order as usize - 1] += 1;
                }
            }
        }
        let count = |pred: fn(&StageStatus) -> bool| {
            m.instances
                .iter()
                .filter(|r| r.status.get("enumerate").is_some_and(pred))
                .count()
        };
        EnsembleSummary {
            ensemble_id: m.ensemble_id.clone(),
            generated: m.instances.iter().filter(|r| r.done("generate")).count(),
            kept: count(|s| matches!(s, StageStatus::Done)),
            discarded: count(|s| matches!(s, StageStatus::Discarded { .. })),
            failed,
            order_counts,
            report: stats::pairwise_report(rows, m.compare.p_threshold),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    BiasScatter,
    TtsCurves,
    GsdBars,
    SolutionHistogram,
    PvalueMatrix,
}

impl PlotKind {
    pub const ALL: [PlotKind; 5] = [
        PlotKind::BiasScatter,
        PlotKind::TtsCurves,
        PlotKind::GsdBars,
        PlotKind::SolutionHistogram,
        PlotKind::PvalueMatrix,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PlotKind::BiasScatter => "bias_scatter",
            PlotKind::TtsCurves => "tts_curves",
            PlotKind::GsdBars => "gsd_bars",
            PlotKind::SolutionHistogram => "solution_histogram",
            PlotKind::PvalueMatrix => "pvalue_matrix",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        PlotKind::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| Error::input(format!("unknown plot kind `{name}`")))
    }
}

/// Labelled numeric columns for one figure; no rendering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotData {
    pub kind: PlotKind,
    pub labels: Vec<String>,
    pub columns: Vec<(String, Vec<f64>)>,
}

impl PlotData {
    fn new(kind: PlotKind, names: &[&str]) -> Self {
        PlotData {
            kind,
            labels: Vec::new(),
            columns: names.iter().map(|n| (n.to_string(), Vec::new())).collect(),
        }
    }

    fn push(&mut self, label: String, values: &[f64]) {
        self.labels.push(label);
        for (col, &v) in self.columns.iter_mut().zip(values) {
            col.1.push(v);
        }
    }

    pub fn is_consistent(&self) -> bool {
        self.columns.iter().all(|c| c.1.len() == self.labels.len())
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|c| c.0 == name).map(|c| c.1.as_slice())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("label");
        for (name, _) in &self.columns {
            write!(out, ",{name}").unwrap();
        }
        out.push('\n');
        for (r, label) in self.labels.iter().enumerate() {
            out.push_str(label);
            for (_, col) in &self.columns {
                write!(out, ",{}", col[r]).unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Builds plot data from the artifacts in `dir`.
pub fn emit_plot_data(dir: &Path, kind: PlotKind) -> Result<PlotData> {
    let manifest_path = dir.join(MANIFEST_FILE);
    if !manifest_path.exists() {
        return Err(Error::Dependency(format!("{} not found", manifest_path.display())));
    }
    let m = ExperimentManifest::load(&manifest_path)?;
    let need = |rel: &str| -> Result<PathBuf> {
        let p = dir.join(rel);
        if p.exists() {
            Ok(p)
        } else {
            Err(Error::Dependency(format!("{} not found", p.display())))
        }
    };
    let mut data;
    match kind {
        PlotKind::BiasScatter => {
            data = PlotData::new(kind, &["bias_a", "bias_combined", "y_eq_x", "y_eq_half_x"]);
            let rows = io::load(&need("report/comparisons.csv")?, io::parse_report_csv)?;
            for r in rows {
                data.push(
                    format!("{}/{}+{}", r.instance_id, r.method_a, r.method_b),
                    &[r.bias_a, r.bias_combined, r.bias_a, r.bias_a / 2.0],
                );
            }
        }
        PlotKind::PvalueMatrix => {
            let rows = io::load(&need("report/comparisons.csv")?, io::parse_report_csv)?;
            let names: Vec<String> = m.compare.pairs.iter().map(|(a, b)| format!("p_{a}_{b}")).collect();
            data = PlotData::new(kind, &names.iter().map(String::as_str).collect::<Vec<_>>());
            for rec in &m.instances {
                let values: Vec<f64> = m
                    .compare
                    .pairs
                    .iter()
                    .map(|(a, b)| {
                        rows.iter()
                            .find(|r| r.instance_id == rec.id && &r.method_a == a && &r.method_b == b)
                            .map_or(f64::NAN, |r| r.p_value)
                    })
                    .collect();
                if values.iter().any(|v| !v.is_nan()) {
                    data.push(rec.id.clone(), &values);
                }
            }
        }
        PlotKind::SolutionHistogram => {
            data = PlotData::new(kind, &["ground_states", "instances"]);
            let mut hist: BTreeMap<usize, usize> = BTreeMap::new();
            for rec in &m.instances {
                if let Some(d) = rec.ground_states {
                    *hist.entry(d).or_insert(0) += 1;
                }
            }
            for (d, c) in hist {
                data.push(d.to_string(), &[d as f64, c as f64]);
            }
        }
        PlotKind::GsdBars => {
            let methods: Vec<String> = std::iter::once("sa".to_string())
                .chain(m.quantum.drivers.iter().map(|k| tag(*k).to_string()))
                .collect();
            let names: Vec<String> = std::iter::once("solution".to_string())
                .chain(methods.iter().map(|t| format!("p_{t}")))
                .collect();
            data = PlotData::new(kind, &names.iter().map(String::as_str).collect::<Vec<_>>());
            for rec in &m.instances {
                let Some(d) = rec.ground_states else { continue };
                let mut probs = Vec::new();
                for t in &methods {
                    let p = match rec.files.get(&format!("gsd:{t}")) {
                        Some(f) if stage_done_for(rec, t) => io::load(&need(f)?, io::parse_any_gsd)?.probabilities(),
                        _ => vec![f64::NAN; d],
                    };
                    probs.push(p);
                }
                for i in 0..d {
                    let mut row = vec![i as f64];
                    row.extend(probs.iter().map(|p| p[i]));
                    data.push(rec.id.clone(), &row);
                }
            }
        }
        PlotKind::TtsCurves => {
            data = PlotData::new(kind, &["solution", "sweeps", "tts"]);
            for rec in &m.instances {
                let Some(f) = rec.files.get("tts") else { continue };
                let text = io::read_text(&need(f)?)?;
                for line in text.lines().skip(1) {
                    let c: Vec<&str> = line.split(',').collect();
                    if c.len() != 5 || c[1] == "any" {
                        continue;
                    }
                    let num = |s: &str| {
                        s.parse::<f64>().map_err(|_| Error::Parse {
                            path: f.clone(),
                            line: 0,
                            msg: format!("bad number `{s}`"),
                        })
                    };
                    data.push(rec.id.clone(), &[num(c[1])?, num(c[0])?, num(c[4])?]);
                }
            }
        }
    }
    debug_assert!(data.is_consistent());
    Ok(data)
}
