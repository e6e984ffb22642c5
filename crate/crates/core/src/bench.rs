//! Timing tables: one row per instance, one column per predicate, cells are
//! median solver wall times or `---` on timeout.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::encoder::{Bounds, CycleEncoding, Encoding, Forbid, ProblemSpec, SbpMode};
use crate::error::{Error, Result};
use crate::extremal::validate_witness;
use crate::solver::{median, run_solver_with_seed, SolveResult, SolverConfig};

/// Runs per UNSAT cell unless configured otherwise.
pub const DEFAULT_UNSAT_REPEATS: usize = 5;

pub const TIMEOUT_MARK: &str = "---";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expect {
    Sat,
    Unsat,
}

/// One table row: a fixed `(n, m)` instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BenchRowSpec {
    pub n: usize,
    pub m: usize,
    pub forbid: Forbid,
    pub expect: Expect,
    /// Needed when the Garnick bounds are on.
    pub ex_prev: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchOptions {
    pub modes: Vec<SbpMode>,
    pub bounds: Bounds,
    pub cycle_encoding: CycleEncoding,
    /// Runs per UNSAT cell; SAT cells use the solver config's `repeats`.
    pub unsat_repeats: usize,
    /// Run cells concurrently on the rayon pool. Off for clean timings.
    pub parallel: bool,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            modes: SbpMode::ALL.to_vec(),
            bounds: Bounds::NONE,
            cycle_encoding: CycleEncoding::Auxiliary,
            unsat_repeats: DEFAULT_UNSAT_REPEATS,
            parallel: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchCell {
    pub mode: SbpMode,
    /// `None` once a run timed out.
    pub median: Option<f64>,
    /// Per-run wall times, including a timed-out run's.
    pub times: Vec<f64>,
}

impl BenchCell {
    pub fn display(&self) -> String {
        match self.median {
            Some(t) => format!("{t:.2}"),
            None => TIMEOUT_MARK.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub spec: BenchRowSpec,
    pub cells: Vec<BenchCell>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchTable {
    pub modes: Vec<SbpMode>,
    pub rows: Vec<BenchRow>,
}

impl BenchTable {
    pub fn cell(&self, n: usize, mode: SbpMode) -> Option<&BenchCell> {
        self.rows
            .iter()
            .find(|r| r.spec.n == n)?
            .cells
            .iter()
            .find(|c| c.mode == mode)
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::from("| n | m |");
        for m in &self.modes {
            write!(s, " {m} |").unwrap();
        }
        s.push_str("\n|---|---|");
        s.push_str(&"---|".repeat(self.modes.len()));
        s.push('\n');
        for r in &self.rows {
            write!(s, "| {} | {} |", r.spec.n, r.spec.m).unwrap();
            for c in &r.cells {
                write!(s, " {} |", c.display()).unwrap();
            }
            s.push('\n');
        }
        s
    }

    /// Raw timings: `n,m,forbid,expect,mode,run,seconds,timed_out`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,m,forbid,expect,mode,run,seconds,timed_out\n");
        for r in &self.rows {
            let expect = match r.spec.expect {
                Expect::Sat => "sat",
                Expect::Unsat => "unsat",
            };
            for c in &r.cells {
                for (k, t) in c.times.iter().enumerate() {
                    let timed_out = c.median.is_none() && k + 1 == c.times.len();
                    writeln!(
                        s,
                        "{},{},\"{}\",{expect},{},{},{t:.4},{timed_out}",
                        r.spec.n, r.spec.m, r.spec.forbid, c.mode, k + 1
                    )
                    .unwrap();
                }
            }
        }
        s
    }
}

/// Times every `(row, mode)` cell. SAT cells run `cfg.repeats` times, UNSAT
/// cells `opts.unsat_repeats` times; the first timeout ends a cell. An outcome
/// contradicting the row's expectation is an error.
pub fn bench(rows: &[BenchRowSpec], opts: &BenchOptions, cfg: &SolverConfig) -> Result<BenchTable> {
    cfg.validate()?;
    if opts.unsat_repeats == 0 {
        return Err(Error::Config("unsat repeats must be at least 1".into()));
    }
    let jobs: Vec<(usize, SbpMode)> = (0..rows.len())
        .flat_map(|r| opts.modes.iter().map(move |&m| (r, m)))
        .collect();
    let run = |&(r, mode): &(usize, SbpMode)| run_cell(&rows[r], mode, opts, cfg);
    let cells: Vec<Result<BenchCell>> = if opts.parallel {
        jobs.par_iter().map(run).collect()
    } else {
        jobs.iter().map(run).collect()
    };
    let mut cells = cells.into_iter();
    let mut out = Vec::with_capacity(rows.len());
    for spec in rows {
        let row_cells = (&mut cells).take(opts.modes.len()).collect::<Result<Vec<_>>>()?;
        out.push(BenchRow {
            spec: spec.clone(),
            cells: row_cells,
        });
    }
    Ok(BenchTable {
        modes: opts.modes.clone(),
        rows: out,
    })
}

fn run_cell(row: &BenchRowSpec, mode: SbpMode, opts: &BenchOptions, cfg: &SolverConfig) -> Result<BenchCell> {
    let spec = ProblemSpec {
        n: row.n,
        m: row.m,
        forbid: row.forbid,
        cycle_encoding: opts.cycle_encoding,
        sbp: if row.m + 1 < row.n { SbpMode::None } else { mode },
        bounds: opts.bounds,
        ex_prev: row.ex_prev,
    };
    let enc = Encoding::encode(&spec)?;
    let repeats = match row.expect {
        Expect::Sat => cfg.repeats,
        Expect::Unsat => opts.unsat_repeats,
    };
    let mut times = Vec::with_capacity(repeats);
    for k in 0..repeats {
        let out = run_solver_with_seed(enc.cnf(), cfg, cfg.seed_policy.seed_for(k))?;
        times.push(out.wall_seconds);
        match (&out.result, row.expect) {
            (SolveResult::Unknown, _) => {
                return Ok(BenchCell {
                    mode,
                    median: None,
                    times,
                })
            }
            (SolveResult::Sat(model), Expect::Sat) => {
                validate_witness(&enc.decode_model(model)?.graph, &spec)?;
            }
            (SolveResult::Unsat, Expect::Unsat) => {}
            (r, e) => {
                return Err(Error::Internal(format!(
                    "n={} m={} {mode}: expected {e:?}, solver said {}",
                    row.n,
                    row.m,
                    if matches!(r, SolveResult::Sat(_)) { "sat" } else { "unsat" }
                )))
            }
        }
    }
    Ok(BenchCell {
        mode,
        median: Some(median(&times)),
        times,
    })
}
