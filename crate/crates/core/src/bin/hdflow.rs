use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hdflow::bench::{self, build_report, EvalRecord, TraceLine};
use hdflow::config::{BackendKind, RunConfig};
use hdflow::jsonl;
use hdflow::synth::{self, SynthesizedProblem, TaskDescription};
use hdflow::trajectory::{export_trajectories, SolveMode, TrajectoryRecord};

#[derive(Parser)]
#[command(name = "hdflow", version, about = "Hybrid fast/slow reasoning runs, benchmarks and problem synthesis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Backend {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured backend kind.
    #[arg(long, value_enum)]
    backend: Option<BackendKind>,
}

impl Backend {
    fn load(&self) -> Result<RunConfig, String> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p).map_err(|e| e.to_string())?,
            None => RunConfig::default(),
        };
        if let Some(kind) = self.backend {
            cfg.backend.kind = kind;
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem.
    Solve {
        #[arg(long, default_value = "hybrid")]
        mode: SolveMode,
        /// Problem file, or `-` for stdin.
        #[arg(long)]
        problem: String,
        #[command(flatten)]
        backend: Backend,
        /// Append the trajectory to this JSON-lines file.
        #[arg(long)]
        trajectories: Option<PathBuf>,
        /// Print the full run as JSON instead of the answer.
        #[arg(long)]
        json: bool,
    },
    /// Evaluate a dataset and write a report.
    Eval {
        /// JSON-lines dataset, or `game24:<seed>,<n>`.
        #[arg(long)]
        dataset: String,
        #[arg(long, default_value = "hybrid")]
        mode: SolveMode,
        #[command(flatten)]
        backend: Backend,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        trajectories: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Problem synthesis steps.
    #[command(subcommand)]
    Synth(Synth),
    /// Summarize a trajectories file written by `eval`.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Subcommand)]
enum Synth {
    /// Generate tasks from ten seeds (plus puzzles) and drop near duplicates.
    Tasks {
        /// Seed tasks; the bundled ten when omitted.
        #[arg(long)]
        seeds: Option<PathBuf>,
        /// Seed for sampling ten seeds from a larger pool.
        #[arg(long, default_value_t = 0)]
        sample_seed: u64,
        #[arg(long)]
        puzzles: bool,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        backend: Backend,
    },
    /// Write up to three problems per task.
    Problems {
        #[arg(long)]
        tasks: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        backend: Backend,
    },
    /// Gate problems for validity, rewriting invalid ones where possible.
    Validate {
        #[arg(long)]
        problems: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        backend: Backend,
    },
    /// Export training rows from trajectories.
    Export {
        #[arg(long)]
        trajectories: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn read_problem(arg: &str) -> Result<String, String> {
    let text = if arg == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| e.to_string())?;
        s
    } else {
        std::fs::read_to_string(arg).map_err(|e| format!("{arg}: {e}"))?
    };
    Ok(text.trim().to_string())
}

fn problem_id(arg: &str) -> String {
    Path::new(arg).file_stem().and_then(|s| s.to_str()).filter(|_| arg != "-").unwrap_or("stdin").to_string()
}

/// Trajectory records from lines written by `eval`/`solve`, or bare records.
fn read_trajectories(path: &Path) -> Result<Vec<TrajectoryRecord>, String> {
    #[derive(serde::Deserialize)]
    #[serde(untagged)]
    enum Line {
        Trace(TraceLine),
        Bare(TrajectoryRecord),
    }
    let lines: Vec<Line> = jsonl::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(lines
        .into_iter()
        .filter_map(|l| match l {
            Line::Trace(t) => t.trajectory,
            Line::Bare(r) => Some(r),
        })
        .collect())
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), String> {
    let text = serde_json::to_string_pretty(value).map_err(|e| e.to_string())?;
    std::fs::write(path, text + "\n").map_err(|e| format!("{}: {e}", path.display()))
}

fn run(cmd: Command) -> Result<(), String> {
    match cmd {
        Command::Solve { mode, problem, backend, trajectories, json } => {
            let text = read_problem(&problem)?;
            if text.is_empty() {
                return Err("problem is empty".into());
            }
            let controller = backend.load()?.controller().map_err(|e| e.to_string())?;
            let id = problem_id(&problem);
            let run = bench::run_problem(&id, &text, mode, &controller);
            if let (Some(path), Some(t)) = (&trajectories, &run.trajectory) {
                jsonl::append(path, std::slice::from_ref(t)).map_err(|e| e.to_string())?;
            }
            if json {
                let v = serde_json::json!({
                    "problem_id": id, "mode": mode, "mode_used": run.mode_used, "answer": run.answer,
                    "usage": run.usage, "note": run.note, "trajectory": run.trajectory,
                });
                println!("{}", serde_json::to_string_pretty(&v).map_err(|e| e.to_string())?);
            } else if let Some(a) = &run.answer {
                println!("{a}");
            }
            match run.answer {
                Some(_) => {
                    eprintln!("mode used: {}, tokens: {}", run.mode_used, run.usage);
                    Ok(())
                }
                None => Err(run.note.unwrap_or_else(|| "no answer".into())),
            }
        }
        Command::Eval { dataset, mode, backend, out, trajectories, jobs } => {
            let items = bench::load_spec(&dataset).map_err(|e| e.to_string())?;
            let controller = backend.load()?.controller().map_err(|e| e.to_string())?;
            let lines = bench::evaluate(&items, mode, &controller, jobs).map_err(|e| e.to_string())?;
            if let Some(path) = &trajectories {
                jsonl::write(path, &lines).map_err(|e| e.to_string())?;
            }
            let records: Vec<EvalRecord> = lines.into_iter().map(|l| l.eval).collect();
            let report = build_report(&records);
            if let Some(path) = &out {
                write_json(path, &report)?;
            }
            print!("{}", report.render_table());
            Ok(())
        }
        Command::Report { input, json } => {
            let lines: Vec<TraceLine> = jsonl::read(&input).map_err(|e| format!("{}: {e}", input.display()))?;
            let records: Vec<EvalRecord> = lines.into_iter().map(|l| l.eval).collect();
            let report = build_report(&records);
            if json {
                println!("{}", serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?);
            } else {
                print!("{}", report.render_table());
            }
            Ok(())
        }
        Command::Synth(s) => run_synth(s),
    }
}

fn run_synth(cmd: Synth) -> Result<(), String> {
    match cmd {
        Synth::Tasks { seeds, sample_seed, puzzles, out, backend } => {
            let pool = match seeds {
                Some(p) => synth::load_tasks(&p).map_err(|e| e.to_string())?,
                None => synth::bundled_seeds(),
            };
            let seeds = synth::sample_seeds(&pool, sample_seed);
            let s = backend.load()?.synthesizer().map_err(|e| e.to_string())?;
            let mut tasks = s.generate_tasks(&seeds).map_err(|e| e.to_string())?;
            if puzzles {
                tasks.extend(s.brainstorm_puzzles().map_err(|e| e.to_string())?);
            }
            let kept = synth::dedup_tasks(&tasks);
            jsonl::write(&out, &kept).map_err(|e| e.to_string())?;
            eprintln!("generated {}, kept {} after dedup", tasks.len(), kept.len());
            Ok(())
        }
        Synth::Problems { tasks, out, backend } => {
            let tasks: Vec<TaskDescription> = synth::load_tasks(&tasks).map_err(|e| e.to_string())?;
            let s = backend.load()?.synthesizer().map_err(|e| e.to_string())?;
            let problems = s.synthesize_all(&tasks).map_err(|e| e.to_string())?;
            jsonl::write(&out, &problems).map_err(|e| e.to_string())?;
            eprintln!("{} problems from {} tasks", problems.len(), tasks.len());
            Ok(())
        }
        Synth::Validate { problems, out, backend } => {
            let problems: Vec<SynthesizedProblem> = jsonl::read(&problems).map_err(|e| e.to_string())?;
            let s = backend.load()?.synthesizer().map_err(|e| e.to_string())?;
            let checked = s.validate_all(&problems).map_err(|e| e.to_string())?;
            jsonl::write(&out, &checked).map_err(|e| e.to_string())?;
            let exportable = checked.iter().filter(|p| p.is_exportable()).count();
            eprintln!("{exportable} of {} problems are valid or rewritten", checked.len());
            Ok(())
        }
        Synth::Export { trajectories, out } => {
            let records = read_trajectories(&trajectories)?;
            let mut sink =
                std::io::BufWriter::new(std::fs::File::create(&out).map_err(|e| format!("{}: {e}", out.display()))?);
            let n = export_trajectories(&records, &mut sink).map_err(|e| e.to_string())?;
            eprintln!("{n} training rows from {} trajectories", records.len());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(std::io::stderr)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
