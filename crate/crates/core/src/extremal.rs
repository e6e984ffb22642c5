//! Computing `ex(n; forbid)` by an ascending sweep over the edge count.
//!
//! The sweep starts at `ex(n-1)` (always attainable: add an isolated vertex)
//! and stops at the first unsatisfiable edge count. With a symmetry-breaking
//! predicate only connected graphs are searched, which is sound for `m >= n-1`:
//! joining two components by an edge creates no cycle, so some extremal graph
//! is connected, and deleting non-bridge edges of a connected graph reaches
//! every edge count down to `n-1`. Below `n-1` the sweep drops the predicate.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io;
use std::path::Path;

use crate::encoder::{Bounds, CycleEncoding, Encoding, Forbid, ProblemSpec, SbpMode};
use crate::error::{Error, Result};
use crate::graph::{pair_count, Graph};
use crate::solver::{run_solver, SolveResult, SolverConfig};

/// `⌊(n/4)(1 + √(4n-3))⌋`, an upper bound on `ex(n; C4)`, evaluated exactly.
pub fn jukna_upper_bound(n: usize) -> usize {
    assert!(n >= 1, "n must be positive");
    // largest e with 4e - n <= n·√(4n-3)
    let n = n as u128;
    let rhs = n * n * (4 * n - 3);
    let fits = |e: u128| 4 * e <= n || (4 * e - n) * (4 * e - n) <= rhs;
    let mut e = 0u128;
    while fits(e + 1) {
        e += 1;
    }
    e as usize
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExOptions {
    pub sbp: SbpMode,
    pub bounds: Bounds,
    pub cycle_encoding: CycleEncoding,
}

impl ExOptions {
    pub fn new(sbp: SbpMode, bounds: Bounds) -> Self {
        ExOptions {
            sbp,
            bounds,
            cycle_encoding: CycleEncoding::Auxiliary,
        }
    }
}

/// One solver call of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct Probe {
    pub m: usize,
    /// The predicate actually used (none below `n-1` edges).
    pub sbp: SbpMode,
    /// `sat`, `unsat` or `unknown`.
    pub status: &'static str,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExResult {
    pub n: usize,
    pub forbid: Forbid,
    /// The largest edge count shown attainable. Exact iff `unsat_confirmed`.
    pub ex_value: usize,
    /// A graph with `ex_value` edges, re-validated after decoding.
    pub witness: Option<Graph>,
    /// Whether `ex_value + 1` was shown unattainable.
    pub unsat_confirmed: bool,
    pub probes: Vec<Probe>,
    /// Why the sweep stopped early, if it did.
    pub aborted: Option<String>,
}

impl ExResult {
    pub fn total_seconds(&self) -> f64 {
        self.probes.iter().map(|p| p.seconds).sum()
    }

    pub fn csv_record(&self) -> [String; 5] {
        [
            self.n.to_string(),
            self.forbid.to_string(),
            self.ex_value.to_string(),
            self.unsat_confirmed.to_string(),
            format!("{:.3}", self.total_seconds()),
        ]
    }
}

/// Sweeps with a cache of known values for the `ex(n-1)` bootstrap.
pub struct ExSearch {
    opts: ExOptions,
    cfg: SolverConfig,
    known: HashMap<(usize, Forbid), usize>,
}

impl ExSearch {
    pub fn new(opts: ExOptions, cfg: SolverConfig) -> Self {
        ExSearch {
            opts,
            cfg,
            known: HashMap::new(),
        }
    }

    /// Seeds the cache with an established value.
    pub fn insert_known(&mut self, n: usize, forbid: Forbid, ex: usize) {
        self.known.insert((n, forbid), ex);
    }

    pub fn known(&self, n: usize, forbid: Forbid) -> Option<usize> {
        self.known.get(&(n, forbid)).copied()
    }

    /// Computes `ex(n; forbid)`, recursing for `ex(n-1)` when it is not cached.
    /// A timeout ends the sweep with a partial result.
    pub fn find(&mut self, n: usize, forbid: Forbid) -> Result<ExResult> {
        if n == 0 {
            return Err(Error::input("n must be at least 1"));
        }
        let ex_prev = if n == 1 {
            0
        } else {
            match self.known(n - 1, forbid) {
                Some(v) => v,
                None => {
                    let prev = self.find(n - 1, forbid)?;
                    if !prev.unsat_confirmed {
                        return Ok(ExResult {
                            n,
                            forbid,
                            ex_value: prev.ex_value,
                            witness: None,
                            unsat_confirmed: false,
                            probes: Vec::new(),
                            aborted: Some(format!("ex({}) not established", n - 1)),
                        });
                    }
                    prev.ex_value
                }
            }
        };
        let result = self.sweep(n, forbid, ex_prev)?;
        if result.unsat_confirmed {
            self.known.insert((n, forbid), result.ex_value);
        }
        Ok(result)
    }

    fn sweep(&self, n: usize, forbid: Forbid, ex_prev: usize) -> Result<ExResult> {
        let mut out = ExResult {
            n,
            forbid,
            ex_value: ex_prev,
            witness: None,
            unsat_confirmed: false,
            probes: Vec::new(),
            aborted: None,
        };
        let mut m = ex_prev;
        loop {
            if m > pair_count(n) {
                out.probes.push(Probe {
                    m,
                    sbp: SbpMode::None,
                    status: "unsat",
                    seconds: 0.0,
                });
                out.unsat_confirmed = true;
                break;
            }
            let sbp = if m + 1 < n { SbpMode::None } else { self.opts.sbp };
            let spec = ProblemSpec {
                n,
                m,
                forbid,
                cycle_encoding: self.opts.cycle_encoding,
                sbp,
                bounds: self.opts.bounds,
                ex_prev: Some(ex_prev),
            };
            let enc = Encoding::encode(&spec)?;
            let outcome = run_solver(enc.cnf(), &self.cfg)?;
            out.probes.push(Probe {
                m,
                sbp,
                status: outcome.status(),
                seconds: outcome.wall_seconds,
            });
            match &outcome.result {
                SolveResult::Sat(model) => {
                    let g = enc.decode_model(model)?.graph;
                    validate_witness(&g, &spec)?;
                    out.ex_value = m;
                    out.witness = Some(g);
                }
                SolveResult::Unsat => {
                    if m == ex_prev {
                        return Err(Error::Internal(format!(
                            "ex({n}) < ex({}) = {ex_prev}: the supplied previous value is wrong \
                             or the encoding is unsound",
                            n - 1
                        )));
                    }
                    out.unsat_confirmed = true;
                    break;
                }
                SolveResult::Unknown => {
                    out.aborted = Some(format!("solver gave up at m = {m}"));
                    break;
                }
            }
            m += 1;
        }
        if forbid.c4 && out.ex_value > jukna_upper_bound(n) {
            return Err(Error::Internal(format!(
                "ex({n}) >= {} exceeds the upper bound {}",
                out.ex_value,
                jukna_upper_bound(n)
            )));
        }
        Ok(out)
    }
}

/// Re-checks a decoded graph against the spec with the plain graph routines.
pub fn validate_witness(g: &Graph, spec: &ProblemSpec) -> Result<()> {
    let bad = |what: &str| Err(Error::Internal(format!("witness {what}: {g:?}")));
    if g.n() != spec.n || g.edge_count() != spec.m {
        return bad("has the wrong size");
    }
    for k in spec.forbid.lengths() {
        if g.has_forbidden_cycle(k)? {
            return bad(&format!("contains a {k}-cycle"));
        }
    }
    if let Some(pred) = spec.sbp.predicate() {
        if !g.is_connected() || !pred.holds(g) {
            return bad(&format!("violates {}", spec.sbp));
        }
    }
    Ok(())
}

/// Convenience wrapper: a fresh search for one `n`.
pub fn find_ex(
    n: usize,
    forbid: Forbid,
    opts: ExOptions,
    cfg: &SolverConfig,
) -> Result<ExResult> {
    ExSearch::new(opts, cfg.clone()).find(n, forbid)
}

pub const LEDGER_HEADER: [&str; 5] = ["n", "forbid", "ex", "confirmed", "seconds"];

/// One row of the CSV ledger.
#[derive(Clone, Debug, PartialEq)]
pub struct LedgerEntry {
    pub n: usize,
    pub forbid: Forbid,
    pub ex: usize,
    pub confirmed: bool,
    pub seconds: f64,
}

/// Reads a ledger; a missing file reads as empty.
pub fn read_ledger(path: &Path) -> Result<Vec<LedgerEntry>> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    let mut rdr = csv::Reader::from_reader(file);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::input(format!("{}: {e}", path.display())))?;
        let field = |k: usize| rec.get(k).unwrap_or("").trim();
        let parse_err = |what: &str| Error::input(format!("{}: bad {what} in {rec:?}", path.display()));
        out.push(LedgerEntry {
            n: field(0).parse().map_err(|_| parse_err("n"))?,
            forbid: field(1).parse()?,
            ex: field(2).parse().map_err(|_| parse_err("ex"))?,
            confirmed: field(3).parse().map_err(|_| parse_err("confirmed"))?,
            seconds: field(4).parse().map_err(|_| parse_err("seconds"))?,
        });
    }
    Ok(out)
}

/// Appends one result, writing the header first if the file is new or empty.
pub fn append_ledger(path: &Path, result: &ExResult) -> Result<()> {
    let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut w = csv::Writer::from_writer(file);
    let to_err = |e: csv::Error| Error::Io(io::Error::other(e));
    if fresh {
        w.write_record(LEDGER_HEADER).map_err(to_err)?;
    }
    w.write_record(result.csv_record()).map_err(to_err)?;
    w.flush()?;
    Ok(())
}

/// Confirmed ledger values, as bootstrap input for [`ExSearch`].
pub fn seed_from_ledger(search: &mut ExSearch, entries: &[LedgerEntry]) {
    for e in entries.iter().filter(|e| e.confirmed) {
        search.insert_known(e.n, e.forbid, e.ex);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jukna_exact_values() {
        // (n/4)(1+√(4n-3)): n=1 → 0.5, n=4 → 4.605…, n=5 → 6.25, n=10 → 17.3…
        assert_eq!(jukna_upper_bound(1), 0);
        assert_eq!(jukna_upper_bound(4), 4);
        assert_eq!(jukna_upper_bound(5), 6);
        assert_eq!(jukna_upper_bound(10), 17);
        // n = 7: √25 = 5 exactly, (7/4)·6 = 10.5
        assert_eq!(jukna_upper_bound(7), 10);
        for n in 1..200usize {
            let f = (n as f64 / 4.0) * (1.0 + ((4 * n - 3) as f64).sqrt());
            // floating point agrees except within rounding of an integer
            if (f - f.round()).abs() > 1e-9 {
                assert_eq!(jukna_upper_bound(n), f.floor() as usize, "n={n}");
            }
        }
    }

    #[test]
    fn small_sweeps_with_the_embedded_solver() {
        let cfg = SolverConfig::embedded();
        // n = 5 already exceeds the embedded variable limit
        let expected = [0, 1, 2, 3];
        for sbp in SbpMode::ALL {
            let mut search = ExSearch::new(ExOptions::new(sbp, Bounds::NONE), cfg.clone());
            for (k, &ex) in expected.iter().enumerate() {
                let r = search.find(k + 1, Forbid::C3_C4).unwrap();
                assert_eq!(r.ex_value, ex, "n={} {sbp}", k + 1);
                assert!(r.unsat_confirmed);
                let w = r.witness.unwrap();
                assert_eq!(w.edge_count(), ex);
            }
        }
        let r = find_ex(4, Forbid::C4, ExOptions::new(SbpMode::BfsStar, Bounds::NONE), &cfg).unwrap();
        assert_eq!(r.ex_value, 4);
    }

    #[test]
    fn wrong_bootstrap_is_reported() {
        let mut search = ExSearch::new(
            ExOptions::new(SbpMode::None, Bounds::NONE),
            SolverConfig::embedded(),
        );
        search.insert_known(3, Forbid::C3_C4, 4);
        assert!(matches!(search.find(4, Forbid::C3_C4), Err(Error::Internal(_))));
    }

    #[test]
    fn ledger_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ex.csv");
        assert!(read_ledger(&path).unwrap().is_empty());
        let r = ExResult {
            n: 5,
            forbid: Forbid::C3_C4,
            ex_value: 5,
            witness: None,
            unsat_confirmed: true,
            probes: vec![Probe {
                m: 5,
                sbp: SbpMode::Bfs,
                status: "sat",
                seconds: 0.25,
            }],
            aborted: None,
        };
        append_ledger(&path, &r).unwrap();
        append_ledger(&path, &ExResult { n: 6, ex_value: 6, unsat_confirmed: false, ..r.clone() }).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("n,forbid,ex,confirmed,seconds\n5,\"3,4\",5,true,0.250\n"));
        let entries = read_ledger(&path).unwrap();
        assert_eq!(entries.len(), 2);
        assert_eq!(entries[0].forbid, Forbid::C3_C4);
        let mut search = ExSearch::new(ExOptions::new(SbpMode::None, Bounds::NONE), SolverConfig::embedded());
        seed_from_ledger(&mut search, &entries);
        assert_eq!(search.known(5, Forbid::C3_C4), Some(5));
        assert_eq!(search.known(6, Forbid::C3_C4), None);
    }
}
