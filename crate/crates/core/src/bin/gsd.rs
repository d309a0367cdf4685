use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use gsdlab::enumerate::{solve_planted, EliminationConfig, EnumerateConfig, SolutionSet};
use gsdlab::instance::{generate_planted, PlantedInstance, PlantingParams};
use gsdlab::io;
use gsdlab::pipeline::{emit_plot_data, run_pipeline, tts_to_csv, EnsembleSummary, ExperimentManifest, PlotKind, RunOptions};
use gsdlab::quantum::{quantum_gsd, Driver, QgsConfig, SignMode};
use gsdlab::rng::{derive_seed, rng_from, stage};
use gsdlab::sa::{sample_gsd, tts_curve, SaSchedule, SweepOrder};
use gsdlab::stats;
use gsdlab::topology::{build_chimera, ChimeraSpec};
use gsdlab::{Error, Result};

#[derive(Parser)]
#[command(name = "gsd", version, about = "Ground-state distribution laboratory for planted Ising instances")]
struct Cli {
    /// Root seed for stochastic steps.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory receiving output artifacts.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Hardware graphs.
    Topology {
        #[command(subcommand)]
        kind: TopologyKind,
    },
    /// Generate planted instances and enumerate their ground states.
    Gen(GenArgs),
    /// Enumerate the ground states of a planted instance.
    Enumerate {
        /// Instance file; `.planted` and `.terms` companions must sit beside it.
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = 500)]
        cap: usize,
    },
    /// Sample a ground-state distribution with simulated annealing.
    Sa {
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        sweeps: usize,
        #[arg(long, default_value_t = 10_000)]
        anneals: u64,
        #[command(flatten)]
        schedule: ScheduleArgs,
    },
    /// Per-solution time-to-solution over a sweep grid.
    SaTts {
        #[command(flatten)]
        target: Target,
        /// Comma-separated ascending sweep counts.
        #[arg(long, value_delimiter = ',', required = true)]
        sweeps_grid: Vec<usize>,
        #[arg(long, default_value_t = 1_000)]
        anneals: u64,
        #[command(flatten)]
        schedule: ScheduleArgs,
    },
    /// Ideal quantum-annealing ground-state distribution.
    Qgs {
        #[command(flatten)]
        target: Target,
        #[arg(long, value_enum, default_value_t = DriverArg::Tf)]
        driver: DriverArg,
        /// Seed for the XX coupling signs of the ns driver.
        #[arg(long, default_value_t = 0)]
        sign_seed: u64,
        /// Draw an independent sign per coupling instead of one global sign.
        #[arg(long)]
        per_edge_signs: bool,
        /// Smallest distance 1 - s reached on the approach to s = 1.
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
    },
    /// Bootstrapped distance test between two distributions.
    Compare {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, default_value_t = stats::DEFAULT_BOOTSTRAP)]
        bootstrap: usize,
    },
    /// Summarize the comparisons of a pipeline run.
    Report {
        #[arg(long)]
        dir: PathBuf,
    },
    /// Emit figure data as CSV.
    Plotdata {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long, value_parser = ["bias_scatter", "tts_curves", "gsd_bars", "solution_histogram", "pvalue_matrix"])]
        kind: String,
    },
    /// Run or resume an ensemble described by a manifest.
    Pipeline {
        #[arg(long)]
        manifest: PathBuf,
        /// Recompute finished stages and check outputs are unchanged.
        #[arg(long)]
        verify: bool,
    },
}

#[derive(Subcommand)]
enum TopologyKind {
    Chimera {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        #[arg(long, default_value_t = 4)]
        k: usize,
        /// Whitespace-separated list of inoperative vertex indices.
        #[arg(long)]
        dead: Option<PathBuf>,
    },
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value_t = PlantingParams::default().clause_density)]
    density: f64,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, default_value_t = 500)]
    max_solutions: usize,
    #[arg(long, default_value = "inst")]
    prefix: String,
}

#[derive(Args)]
struct Target {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    solutions: PathBuf,
}

#[derive(Args)]
struct ScheduleArgs {
    #[arg(long, default_value_t = 0.0)]
    beta_min: f64,
    #[arg(long, default_value_t = 20.0)]
    beta_max: f64,
    #[arg(long)]
    random_order: bool,
}

impl ScheduleArgs {
    fn schedule(&self, sweeps: usize) -> Result<SaSchedule> {
        let order = if self.random_order { SweepOrder::RandomPermutation } else { SweepOrder::Sequential };
        Ok(SaSchedule::new(sweeps, self.beta_min, self.beta_max)?.with_order(order))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DriverArg {
    Tf,
    Ns,
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "out".into(), |s| s.to_string_lossy().into_owned())
}

fn load_planted(instance: &Path) -> Result<PlantedInstance> {
    let inst = io::load(instance, io::parse_instance)?;
    let (planted, ground_energy) = io::load(&instance.with_extension("planted"), io::parse_planted)?;
    let terms = io::load(&instance.with_extension("terms"), io::parse_terms)?;
    Ok(PlantedInstance {
        instance: inst,
        terms,
        planted,
        ground_energy,
    })
}

fn load_target(t: &Target) -> Result<(gsdlab::instance::IsingInstance, SolutionSet)> {
    Ok((io::load(&t.instance, io::parse_instance)?, io::load(&t.solutions, io::parse_solutions)?))
}

fn write(path: PathBuf, text: &str) -> Result<()> {
    io::write_text(&path, text)?;
    println!("{}", path.display());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Resource(format!("cannot start worker pool: {e}")))?;
    }
    let out = cli.out_dir;
    let seed = cli.seed;
    match cli.command {
        Command::Topology {
            kind: TopologyKind::Chimera { rows, cols, k, dead },
        } => {
            let mut spec = ChimeraSpec::new(rows, cols, k);
            if let Some(path) = dead {
                let text = io::read_text(&path)?;
                let dead = text
                    .split_whitespace()
                    .map(|t| t.parse().map_err(|_| Error::input(format!("bad vertex index `{t}` in {}", path.display()))))
                    .collect::<Result<Vec<usize>>>()?;
                spec = spec.with_dead(dead);
            }
            write(out.join("graph.txt"), &io::graph_to_string(&build_chimera(&spec)?))
        }
        Command::Gen(args) => {
            let graph = io::load(&args.graph, io::parse_graph)?;
            let params = PlantingParams {
                clause_density: args.density,
                ..PlantingParams::default()
            };
            let config = EnumerateConfig {
                elimination: EliminationConfig::default(),
                cap: args.max_solutions,
            };
            let mut kept = 0;
            for i in 0..args.count {
                let id = format!("{}-{i:04}", args.prefix);
                let mut rng = rng_from(seed, &[stage::GENERATE, i as u64]);
                let p = generate_planted(&graph, &params, &mut rng)?;
                let sols = solve_planted(&p, &id, &config, derive_seed(seed, &[stage::ENUMERATE, i as u64]))?;
                if sols.truncated {
                    eprintln!("{id}: more than {} ground states, discarded", args.max_solutions);
                    continue;
                }
                let dir = out.join("instances");
                write(dir.join(format!("{id}.ising")), &io::instance_to_string(&p.instance))?;
                write(dir.join(format!("{id}.planted")), &io::planted_to_string(&p))?;
                write(dir.join(format!("{id}.terms")), &io::terms_to_string(&p.terms))?;
                let constraints = gsdlab::enumerate::terms_to_constraints(&p)?;
                write(dir.join(format!("{id}.constraints")), &io::constraints_to_string(&constraints))?;
                write(out.join("solutions").join(format!("{id}.sol")), &io::solutions_to_string(&sols))?;
                kept += 1;
            }
            eprintln!("kept {kept} of {} instances", args.count);
            Ok(())
        }
        Command::Enumerate { instance, cap } => {
            let p = load_planted(&instance)?;
            let id = stem(&instance);
            let config = EnumerateConfig {
                elimination: EliminationConfig::default(),
                cap,
            };
            let sols = solve_planted(&p, &id, &config, seed)?;
            write(out.join(format!("{id}.sol")), &io::solutions_to_string(&sols))
        }
        Command::Sa {
            target,
            sweeps,
            anneals,
            schedule,
        } => {
            let (inst, sols) = load_target(&target)?;
            let g = sample_gsd(&inst, &sols, &schedule.schedule(sweeps)?, anneals, seed)?;
            write(out.join(format!("{}.sa.gsd", stem(&target.instance))), &io::gsd_to_string(&g))
        }
        Command::SaTts {
            target,
            sweeps_grid,
            anneals,
            schedule,
        } => {
            let (inst, sols) = load_target(&target)?;
            let table = tts_curve(&inst, &sols, &schedule.schedule(1)?, &sweeps_grid, anneals, seed)?;
            write(out.join(format!("{}.tts.csv", stem(&target.instance))), &tts_to_csv(&table))
        }
        Command::Qgs {
            target,
            driver,
            sign_seed,
            per_edge_signs,
            eps,
        } => {
            let (inst, sols) = load_target(&target)?;
            let mode = if per_edge_signs { SignMode::PerEdge } else { SignMode::Global };
            let d = match driver {
                DriverArg::Tf => Driver::transverse_field(),
                DriverArg::Ns => Driver::non_stoquastic(&inst, sign_seed, mode),
            };
            let config = QgsConfig {
                epsilon: eps,
                seed,
                ..QgsConfig::default()
            };
            let g = quantum_gsd(&inst, &sols, &d, &config)?;
            let name = format!("{}.{}.gsd", stem(&target.instance), d.kind.tag());
            write(out.join(name), &io::analytic_to_string(&g))
        }
        Command::Compare { a, b, bootstrap } => {
            let ga = io::load(&a, io::parse_any_gsd)?;
            let gb = io::load(&b, io::parse_any_gsd)?;
            // `<id>.<method>.gsd` names give the instance id and method tags.
            let split = |p: &Path| {
                let s = stem(p);
                match s.rsplit_once('.') {
                    Some((id, method)) => (id.to_string(), method.to_string()),
                    None => (s.clone(), s),
                }
            };
            let (id, ma) = split(&a);
            let (_, mb) = split(&b);
            let row = stats::compare(&id, (&ma, &ga), (&mb, &gb), bootstrap, seed)?;
            let csv = io::report_to_csv(std::slice::from_ref(&row));
            print!("{csv}");
            io::write_text(&out.join("comparison.csv"), &csv)
        }
        Command::Report { dir } => {
            let m = ExperimentManifest::load(&dir.join(gsdlab::pipeline::MANIFEST_FILE))?;
            let rows = io::load(&dir.join("report/comparisons.csv"), io::parse_report_csv)?;
            let summary = EnsembleSummary::build(&m, &rows);
            let json = serde_json::to_string_pretty(&summary)? + "\n";
            print!("{json}");
            io::write_text(&dir.join("report/summary.json"), &json)
        }
        Command::Plotdata { dir, kind } => {
            let kind = PlotKind::parse(&kind)?;
            let data = emit_plot_data(&dir, kind)?;
            write(out.join(format!("{}.csv", kind.name())), &data.to_csv())
        }
        Command::Pipeline { manifest, verify } => {
            let mut m = ExperimentManifest::load(&manifest)?;
            let opts = RunOptions { threads: None, verify };
            let result = run_pipeline(&mut m, &out, &opts);
            let failed = m
                .instances
                .iter()
                .flat_map(|r| r.status.values())
                .filter(|s| matches!(s, gsdlab::pipeline::StageStatus::Failed { .. }))
                .count();
            eprintln!("{} instances, {failed} failed stages", m.instances.len());
            result
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gsd: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
