//! Running formulas through an external DIMACS solver, with the embedded
//! procedure as a fallback for tiny formulas.

use std::env;
use std::io::{self, Read};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use crate::cnf::{CnfFormula, Lit};
use crate::dpll;
use crate::error::{Error, Result};

/// Formulas above this many variables are refused by the embedded fallback.
pub const EMBEDDED_VAR_LIMIT: u32 = 200;

/// Environment variable naming the solver executable.
pub const SOLVER_ENV: &str = "EXGRAPH_SOLVER";

/// How seeds are passed to the solver (as `--seed=N`) across repeats.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SeedPolicy {
    /// No seed argument.
    #[default]
    None,
    /// The same seed on every run.
    Fixed(u64),
    /// `base + repeat index`.
    PerRepeat(u64),
}

impl SeedPolicy {
    pub fn seed_for(self, repeat: usize) -> Option<u64> {
        match self {
            SeedPolicy::None => None,
            SeedPolicy::Fixed(s) => Some(s),
            SeedPolicy::PerRepeat(base) => Some(base.wrapping_add(repeat as u64)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// `None` selects the embedded procedure.
    pub solver_path: Option<PathBuf>,
    pub time_limit: Duration,
    /// Runs per SAT measurement.
    pub repeats: usize,
    pub seed_policy: SeedPolicy,
    /// Extra arguments placed before the seed and the formula path.
    pub extra_args: Vec<String>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            solver_path: None,
            time_limit: Duration::from_secs(3600),
            repeats: 1,
            seed_policy: SeedPolicy::None,
            extra_args: Vec::new(),
        }
    }
}

impl SolverConfig {
    pub fn external(path: impl Into<PathBuf>) -> Self {
        SolverConfig {
            solver_path: Some(path.into()),
            ..SolverConfig::default()
        }
    }

    pub fn embedded() -> Self {
        SolverConfig::default()
    }

    /// Solver path from `EXGRAPH_SOLVER`; embedded when unset or empty.
    pub fn from_env() -> Self {
        match env::var_os(SOLVER_ENV) {
            Some(p) if !p.is_empty() => SolverConfig::external(p),
            _ => SolverConfig::embedded(),
        }
    }

    pub fn with_time_limit(mut self, limit: Duration) -> Self {
        self.time_limit = limit;
        self
    }

    pub fn with_repeats(mut self, repeats: usize) -> Self {
        self.repeats = repeats;
        self
    }

    pub fn with_seed_policy(mut self, policy: SeedPolicy) -> Self {
        self.seed_policy = policy;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.time_limit.is_zero() {
            return Err(Error::Config("time limit must be positive".into()));
        }
        if self.repeats == 0 {
            return Err(Error::Config("repeats must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveResult {
    /// 1-indexed model, `model[0]` unused.
    Sat(Vec<bool>),
    Unsat,
    Unknown,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOutcome {
    pub result: SolveResult,
    /// Wall clock around the solver call only.
    pub wall_seconds: f64,
}

impl SolveOutcome {
    pub fn status(&self) -> &'static str {
        match self.result {
            SolveResult::Sat(_) => "sat",
            SolveResult::Unsat => "unsat",
            SolveResult::Unknown => "unknown",
        }
    }

    pub fn model(&self) -> Option<&[bool]> {
        match &self.result {
            SolveResult::Sat(m) => Some(m),
            _ => None,
        }
    }

    pub fn is_sat(&self) -> bool {
        matches!(self.result, SolveResult::Sat(_))
    }

    pub fn is_unsat(&self) -> bool {
        self.result == SolveResult::Unsat
    }

    pub fn is_unknown(&self) -> bool {
        self.result == SolveResult::Unknown
    }
}

/// Decides `cnf` with the configured solver, without a seed.
pub fn run_solver(cnf: &CnfFormula, cfg: &SolverConfig) -> Result<SolveOutcome> {
    run_solver_with_seed(cnf, cfg, cfg.seed_policy.seed_for(0))
}

/// Decides `cnf`, passing `--seed=N` to an external solver when given. Models
/// are checked against the formula before being returned.
pub fn run_solver_with_seed(
    cnf: &CnfFormula,
    cfg: &SolverConfig,
    seed: Option<u64>,
) -> Result<SolveOutcome> {
    cfg.validate()?;
    if cnf.is_trivially_unsat() {
        return Ok(SolveOutcome {
            result: SolveResult::Unsat,
            wall_seconds: 0.0,
        });
    }
    if cnf.clause_count() == 0 {
        return Ok(SolveOutcome {
            result: SolveResult::Sat(vec![false; cnf.var_count() as usize + 1]),
            wall_seconds: 0.0,
        });
    }
    let outcome = match &cfg.solver_path {
        None => run_embedded(cnf)?,
        Some(path) => run_external(cnf, path, cfg, seed)?,
    };
    if let SolveResult::Sat(model) = &outcome.result {
        if !cnf.is_satisfied_by(model) {
            return Err(Error::Integration {
                message: "solver model violates the formula".into(),
                raw: String::new(),
            });
        }
    }
    Ok(outcome)
}

fn run_embedded(cnf: &CnfFormula) -> Result<SolveOutcome> {
    if cnf.var_count() > EMBEDDED_VAR_LIMIT {
        return Err(Error::Config(format!(
            "no solver configured ({SOLVER_ENV} unset) and the formula has {} variables; \
             the embedded procedure is limited to {EMBEDDED_VAR_LIMIT}",
            cnf.var_count()
        )));
    }
    let start = Instant::now();
    let result = match dpll::solve(cnf, &[]) {
        Some(model) => SolveResult::Sat(model),
        None => SolveResult::Unsat,
    };
    Ok(SolveOutcome {
        result,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

fn run_external(
    cnf: &CnfFormula,
    path: &Path,
    cfg: &SolverConfig,
    seed: Option<u64>,
) -> Result<SolveOutcome> {
    let mut file = tempfile::Builder::new().suffix(".cnf").tempfile()?;
    cnf.write_dimacs(io::BufWriter::new(file.as_file_mut()))?;

    let mut cmd = Command::new(path);
    cmd.args(&cfg.extra_args);
    if let Some(s) = seed {
        cmd.arg(format!("--seed={s}"));
    }
    cmd.arg(file.path())
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());

    let start = Instant::now();
    let mut child = cmd.spawn().map_err(|e| match e.kind() {
        io::ErrorKind::NotFound | io::ErrorKind::PermissionDenied => {
            Error::Config(format!("cannot run solver {}: {e}", path.display()))
        }
        _ => Error::Io(e),
    })?;
    let mut stdout = child.stdout.take().expect("piped");
    let mut stderr = child.stderr.take().expect("piped");
    let out_reader = thread::spawn(move || {
        let mut s = String::new();
        let _ = stdout.read_to_string(&mut s);
        s
    });
    let err_reader = thread::spawn(move || {
        let mut s = String::new();
        let _ = stderr.read_to_string(&mut s);
        s
    });

    let mut pause = Duration::from_micros(200);
    let timed_out = loop {
        if child.try_wait()?.is_some() {
            break false;
        }
        if start.elapsed() >= cfg.time_limit {
            let _ = child.kill();
            let _ = child.wait();
            break true;
        }
        thread::sleep(pause.min(cfg.time_limit.saturating_sub(start.elapsed())));
        pause = (pause * 2).min(Duration::from_millis(20));
    };
    let wall_seconds = start.elapsed().as_secs_f64();
    if timed_out {
        // a grandchild may still hold the pipes open; leave the readers detached
        return Ok(SolveOutcome {
            result: SolveResult::Unknown,
            wall_seconds,
        });
    }
    let stdout = out_reader.join().unwrap_or_default();
    let stderr = err_reader.join().unwrap_or_default();
    let result = parse_competition_output(&stdout, cnf.var_count()).map_err(|message| {
        let mut raw = stdout.clone();
        if !stderr.is_empty() {
            raw.push_str("\n--- stderr ---\n");
            raw.push_str(&stderr);
        }
        Error::Integration { message, raw }
    })?;
    Ok(SolveOutcome {
        result,
        wall_seconds,
    })
}

/// Parses `s` status and `v` value lines. Variables the solver leaves out of
/// the model are set false.
pub fn parse_competition_output(
    out: &str,
    var_count: u32,
) -> std::result::Result<SolveResult, String> {
    let mut status = None;
    let mut model = vec![false; var_count as usize + 1];
    let mut terminated = false;
    for line in out.lines() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("s ") {
            status = Some(match rest.trim() {
                "SATISFIABLE" => 10,
                "UNSATISFIABLE" => 20,
                "UNKNOWN" => 0,
                other => return Err(format!("unrecognized status line {other:?}")),
            });
        } else if let Some(rest) = line.strip_prefix('v') {
            for tok in rest.split_whitespace() {
                let x: i32 = tok
                    .parse()
                    .map_err(|_| format!("bad value token {tok:?}"))?;
                if x == 0 {
                    terminated = true;
                    continue;
                }
                let v = x.unsigned_abs();
                if v > var_count {
                    return Err(format!("value for unknown variable {v}"));
                }
                model[v as usize] = Lit::from_dimacs(x).is_positive();
            }
        }
    }
    match status {
        Some(10) if terminated => Ok(SolveResult::Sat(model)),
        Some(10) => Err("satisfiable without a terminated value list".into()),
        Some(20) => Ok(SolveResult::Unsat),
        Some(_) => Ok(SolveResult::Unknown),
        None => Err("no status line".into()),
    }
}

/// Median of a non-empty sample (mean of the middle two for even sizes).
pub fn median(samples: &[f64]) -> f64 {
    assert!(!samples.is_empty(), "median of an empty sample");
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len() / 2;
    if v.len() % 2 == 1 {
        v[k]
    } else {
        (v[k - 1] + v[k]) / 2.0
    }
}
