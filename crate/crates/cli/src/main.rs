use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use exgraph::bench::{self, BenchOptions, BenchRowSpec, Expect};
use exgraph::encoder::{Bounds, CycleEncoding, Encoding, Forbid, ProblemSpec, SbpMode};
use exgraph::extremal::{self, ExOptions, ExSearch};
use exgraph::oracle::{self, CheckBackend, Sampler};
use exgraph::sbp::{self, BfsCertificate, Predicate};
use exgraph::solver::{run_solver, SeedPolicy, SolveResult, SolverConfig, SOLVER_ENV};
use exgraph::Graph;

#[derive(Parser)]
#[command(name = "exgraph", version, about = "SAT search for extremal graphs with BFS symmetry breaking")]
struct Cli {
    /// Worker threads for parallel scans and concurrent solver jobs.
    #[arg(long, global = true, env = "EXGRAPH_JOBS")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the DIMACS formula of one instance.
    Encode {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Output file (default stdout).
        #[arg(short, long, visible_alias = "out")]
        output: Option<PathBuf>,
    },
    /// Solve one instance and print the decoded graph.
    Solve {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Write the witness graph here as well.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Evaluate a predicate on a graph file (`-` for stdin). Exit status 1 if it fails.
    Check {
        graph: PathBuf,
        #[arg(long, default_value = "bfs*")]
        predicate: Predicate,
        /// Print the parent array, degrees and subtree weights.
        #[arg(long)]
        certificate: bool,
    },
    /// Relabel a connected graph so that it satisfies bfs*.
    Renumber { graph: PathBuf },
    /// Compute ex(n; forbid) by an ascending edge-count sweep.
    Ex {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "3,4")]
        forbid: Forbid,
        #[arg(long, default_value = "bfs-star")]
        sbp: SbpMode,
        /// garnick, clapham, none, or auto (the family matching forbid).
        #[arg(long, default_value = "auto")]
        bounds: String,
        #[arg(long, default_value = "aux")]
        cycles: CycleEncoding,
        /// CSV ledger read for bootstrap values and appended with the result.
        #[arg(long)]
        ledger: Option<PathBuf>,
        /// Witness graph output file.
        #[arg(long)]
        witness: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Count allowed labelings per connected isomorphism class for n = 1..=max-n.
    VerifySbp {
        #[arg(long, default_value_t = 6)]
        max_n: usize,
        /// Restrict the summary to one predicate.
        #[arg(long)]
        predicate: Option<Predicate>,
        /// Also write the per-class counts as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Print every class, not only the summary.
        #[arg(long)]
        classes: bool,
    },
    /// ex(n; forbid) by exhaustive enumeration (n <= 7).
    BruteEx {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "3,4")]
        forbid: Forbid,
    },
    /// Compare the predicate formulas against the semantic checkers.
    CrossCheck {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "bfs-star")]
        mode: SbpMode,
        /// Random connected samples instead of all graphs.
        #[arg(long)]
        samples: Option<usize>,
        /// Seed of the graph sampler.
        #[arg(long, default_value_t = 1)]
        sample_seed: u64,
        /// Decide with the embedded procedure even when a solver is available.
        #[arg(long)]
        embedded: bool,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Median solver times per predicate for ex(n) (sat) or ex(n)+1 (unsat).
    Bench {
        /// Orders to run, e.g. `10,11,12`.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, default_value = "3,4")]
        forbid: Forbid,
        /// sat: m = ex(n); unsat: m = ex(n) + 1.
        #[arg(long, default_value = "unsat")]
        case: String,
        #[arg(long, value_delimiter = ',', default_value = "none,bfs,bfs+,bfs-star")]
        modes: Vec<SbpMode>,
        #[arg(long, default_value = "none")]
        bounds: String,
        #[arg(long, default_value_t = bench::DEFAULT_UNSAT_REPEATS)]
        unsat_repeats: usize,
        /// Ledger with known ex values (missing ones are computed).
        #[arg(long)]
        ledger: Option<PathBuf>,
        /// Raw per-run timings as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Run cells concurrently (timings become noisier).
        #[arg(long)]
        parallel: bool,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

#[derive(Args)]
struct ProblemArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    #[arg(long, default_value = "3,4")]
    forbid: Forbid,
    #[arg(long, default_value = "none")]
    sbp: SbpMode,
    #[arg(long, visible_alias = "cycle-enc", default_value = "aux")]
    cycles: CycleEncoding,
    /// garnick, clapham, none, or auto (the family matching forbid).
    #[arg(long, default_value = "none")]
    bounds: String,
    /// Shorthand for `--bounds garnick`.
    #[arg(long, conflicts_with = "bounds")]
    garnick: bool,
    /// ex(n-1; forbid), needed by the garnick bounds.
    #[arg(long)]
    ex_prev: Option<usize>,
}

impl ProblemArgs {
    fn spec(&self) -> Result<ProblemSpec> {
        Ok(ProblemSpec {
            n: self.n,
            m: self.m,
            forbid: self.forbid,
            cycle_encoding: self.cycles,
            sbp: self.sbp,
            bounds: if self.garnick {
                Bounds::GARNICK
            } else {
                parse_bounds(&self.bounds, self.forbid)?
            },
            ex_prev: self.ex_prev,
        })
    }
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// DIMACS solver executable. Defaults to the bundled exgraph-sat next to
    /// this binary, then to the embedded procedure (tiny formulas only).
    #[arg(long, env = SOLVER_ENV)]
    solver: Option<PathBuf>,
    /// Per-call time limit in seconds.
    #[arg(long, default_value_t = 3600.0)]
    time_limit: f64,
    /// Runs per SAT measurement.
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    /// Base seed passed as --seed=N (+ run index).
    #[arg(long)]
    seed: Option<u64>,
}

impl SolverArgs {
    fn config(&self) -> Result<SolverConfig> {
        if !(self.time_limit > 0.0 && self.time_limit.is_finite()) {
            bail!("--time-limit must be a positive number of seconds");
        }
        let path = self.solver.clone().filter(|p| !p.as_os_str().is_empty()).or_else(bundled_solver);
        let mut cfg = match path {
            Some(p) => SolverConfig::external(p),
            None => SolverConfig::embedded(),
        };
        cfg.time_limit = Duration::from_secs_f64(self.time_limit);
        cfg.repeats = self.repeats;
        cfg.seed_policy = self.seed.map_or(SeedPolicy::None, SeedPolicy::PerRepeat);
        cfg.validate()?;
        Ok(cfg)
    }
}

fn bundled_solver() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    let p = exe.with_file_name(format!("exgraph-sat{}", std::env::consts::EXE_SUFFIX));
    p.is_file().then_some(p)
}

fn parse_bounds(s: &str, forbid: Forbid) -> Result<Bounds> {
    Ok(match s {
        "none" => Bounds::NONE,
        "garnick" => Bounds::GARNICK,
        "clapham" => Bounds::CLAPHAM,
        "auto" => Bounds::default_for(forbid),
        _ => bail!("--bounds must be garnick, clapham, none or auto, got {s:?}"),
    })
}

fn read_graph(path: &Path) -> Result<Graph> {
    let text = if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        s
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?
    };
    text.parse().with_context(|| format!("parsing {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn ledger_search(opts: ExOptions, cfg: SolverConfig, ledger: Option<&Path>) -> Result<ExSearch> {
    let mut search = ExSearch::new(opts, cfg);
    if let Some(path) = ledger {
        extremal::seed_from_ledger(&mut search, &extremal::read_ledger(path)?);
    }
    Ok(search)
}

fn run(cli: Cli) -> Result<ExitCode> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .context("configuring the worker pool")?;
    }
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Encode { problem, output } => {
            let enc = Encoding::encode(&problem.spec()?)?;
            match output {
                Some(p) => {
                    let f = fs::File::create(&p).with_context(|| format!("creating {}", p.display()))?;
                    enc.cnf().write_dimacs(io::BufWriter::new(f))?;
                }
                None => enc.cnf().write_dimacs(&mut out)?,
            }
        }
        Command::Solve { problem, solver, output } => {
            let spec = problem.spec()?;
            let enc = Encoding::encode(&spec)?;
            let outcome = run_solver(enc.cnf(), &solver.config()?)?;
            writeln!(out, "s {} {:.3}s", outcome.status(), outcome.wall_seconds)?;
            if let SolveResult::Sat(model) = &outcome.result {
                let d = enc.decode_model(model)?;
                extremal::validate_witness(&d.graph, &spec)?;
                write!(out, "{}", d.graph)?;
                if let Some(p) = &d.parents {
                    let ps: Vec<String> = p.as_slice().iter().map(usize::to_string).collect();
                    writeln!(out, "# p: {}", ps.join(" "))?;
                }
                if let Some(w) = &d.weights {
                    let ws: Vec<String> = w.iter().map(usize::to_string).collect();
                    writeln!(out, "# w: {}", ws.join(" "))?;
                }
                if let Some(p) = output {
                    write_text(&p, &d.graph.to_string())?;
                }
            }
        }
        Command::Check { graph, predicate, certificate } => {
            let g = read_graph(&graph)?;
            let holds = predicate.holds(&g);
            writeln!(out, "{holds}")?;
            if certificate {
                match BfsCertificate::of(&g) {
                    Some(c) => write!(out, "{}", c.to_text())?,
                    None => writeln!(out, "no parent array: some vertex other than 1 has no smaller neighbor")?,
                }
            }
            if !holds {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Renumber { graph } => {
            let g = read_graph(&graph)?;
            let r = sbp::bfs_star_renumber(&g)?;
            let image: Vec<String> = r.permutation.image().iter().map(usize::to_string).collect();
            writeln!(out, "# relabeling: {}", image.join(" "))?;
            writeln!(out, "# sibling swaps: {}", r.swaps)?;
            write!(out, "{}", r.graph)?;
        }
        Command::Ex { n, forbid, sbp, bounds, cycles, ledger, witness, solver } => {
            let opts = ExOptions {
                sbp,
                bounds: parse_bounds(&bounds, forbid)?,
                cycle_encoding: cycles,
            };
            let mut search = ledger_search(opts, solver.config()?, ledger.as_deref())?;
            let r = search.find(n, forbid)?;
            for p in &r.probes {
                writeln!(out, "# m={} sbp={} {} {:.3}s", p.m, p.sbp, p.status, p.seconds)?;
            }
            if let Some(why) = &r.aborted {
                writeln!(out, "# stopped early: {why}")?;
            }
            if let Some(w) = &r.witness {
                write!(out, "{w}")?;
                if let Some(p) = &witness {
                    write_text(p, &w.to_string())?;
                }
            }
            let rec = r.csv_record();
            writeln!(out, "{},\"{}\",{},{},{}", rec[0], rec[1], rec[2], rec[3], rec[4])?;
            if let Some(p) = &ledger {
                extremal::append_ledger(p, &r)?;
            }
            if !r.unsat_confirmed {
                return Ok(ExitCode::from(2));
            }
        }
        Command::VerifySbp { max_n, predicate, csv, classes } => {
            let mut csv_text = String::new();
            let mut sound = true;
            let shown: Vec<Predicate> = predicate.map_or(Predicate::ALL.to_vec(), |p| vec![p]);
            writeln!(out, "| n | classes | labelings | {} |", shown.iter().map(|p| format!("{} violations", p.name())).collect::<Vec<_>>().join(" | "))?;
            writeln!(out, "|---|---|---|{}", "---|".repeat(shown.len()))?;
            let mut details = String::new();
            for n in 1..=max_n {
                let r = oracle::verify_sbp_soundness(n)?;
                let counts: Vec<String> = shown.iter().map(|&p| r.violations_of(p).len().to_string()).collect();
                writeln!(out, "| {n} | {} | {} | {} |", r.class_count, r.connected_labelings(), counts.join(" | "))?;
                sound &= Predicate::SOUND.iter().filter(|p| shown.contains(p)).all(|&p| r.violations_of(p).is_empty());
                if classes {
                    details.push_str(&r.to_markdown());
                    details.push('\n');
                }
                let body = r.to_csv();
                if csv_text.is_empty() {
                    csv_text.push_str(&body);
                } else {
                    csv_text.extend(body.lines().skip(1).map(|l| format!("{l}\n")));
                }
            }
            if classes {
                write!(out, "\n{details}")?;
            }
            if let Some(p) = csv {
                write_text(&p, &csv_text)?;
            }
            if !sound {
                writeln!(out, "a symmetry-breaking predicate missed a class")?;
                return Ok(ExitCode::from(1));
            }
        }
        Command::BruteEx { n, forbid } => {
            let (ex, w) = oracle::brute_force_ex(n, forbid)?;
            writeln!(out, "# ex({n}; {forbid}) = {ex}")?;
            write!(out, "{w}")?;
        }
        Command::CrossCheck { n, mode, samples, sample_seed, embedded, solver } => {
            let sampler = match samples {
                Some(count) => Sampler::RandomConnected { count, seed: sample_seed },
                None => Sampler::Exhaustive,
            };
            let backend = if embedded {
                CheckBackend::Embedded
            } else {
                match solver.config()? {
                    cfg if cfg.solver_path.is_some() => CheckBackend::Solver(cfg),
                    _ => CheckBackend::Embedded,
                }
            };
            let r = oracle::cross_validate_encoding(n, mode, sampler, &backend)?;
            writeln!(out, "| n | mode | checked | accepted | disagreements |")?;
            writeln!(out, "|---|---|---|---|---|")?;
            writeln!(out, "| {} | {} | {} | {} | {} |", r.n, r.mode, r.checked, r.accepted, r.disagreements.len())?;
            for g in r.disagreements.iter().take(5) {
                writeln!(out, "\ndisagreement:\n{g}")?;
            }
            if !r.disagreements.is_empty() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Bench { n, forbid, case, modes, bounds, unsat_repeats, ledger, csv, parallel, solver } => {
            let expect = match case.as_str() {
                "sat" => Expect::Sat,
                "unsat" => Expect::Unsat,
                _ => bail!("--case must be sat or unsat"),
            };
            let cfg = solver.config()?;
            let bounds = parse_bounds(&bounds, forbid)?;
            // ex values come from the ledger or a bfs* sweep with the natural bounds
            let finder = ExOptions::new(SbpMode::BfsStar, Bounds::default_for(forbid));
            let mut search = ledger_search(finder, cfg.clone(), ledger.as_deref())?;
            let mut rows = Vec::new();
            for &k in &n {
                let ex = exact(&mut search, k, forbid)?;
                let ex_prev = if k > 1 { Some(exact(&mut search, k - 1, forbid)?) } else { Some(0) };
                rows.push(BenchRowSpec {
                    n: k,
                    m: if expect == Expect::Sat { ex } else { ex + 1 },
                    forbid,
                    expect,
                    ex_prev,
                });
            }
            let opts = BenchOptions {
                modes,
                bounds,
                cycle_encoding: CycleEncoding::Auxiliary,
                unsat_repeats,
                parallel,
            };
            let table = bench::bench(&rows, &opts, &cfg)?;
            write!(out, "{}", table.to_markdown())?;
            if let Some(p) = csv {
                write_text(&p, &table.to_csv())?;
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn exact(search: &mut ExSearch, n: usize, forbid: Forbid) -> Result<usize> {
    if let Some(v) = search.known(n, forbid) {
        return Ok(v);
    }
    let r = search.find(n, forbid)?;
    if !r.unsat_confirmed {
        bail!("could not establish ex({n}; {forbid}) within the time limit");
    }
    Ok(r.ex_value)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
