//! Minimal DIMACS front end over CaDiCaL with competition-style output:
//! `s SATISFIABLE` plus `v` lines (exit 10) or `s UNSATISFIABLE` (exit 20).
//!
//! `exgraph-sat [--seed=N] [FILE]` reads FILE or stdin. A seed shuffles the
//! clause order before loading, which perturbs the search.

use std::fs;
use std::io::{self, Read, Write};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;

fn parse_dimacs(text: &str) -> Result<(i32, Vec<Vec<i32>>)> {
    let mut vars = 0;
    let mut clauses = Vec::new();
    let mut current = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if let Some(header) = line.strip_prefix("p ") {
            let parts: Vec<&str> = header.split_whitespace().collect();
            if parts.len() != 3 || parts[0] != "cnf" {
                bail!("bad header {line:?}");
            }
            vars = parts[1].parse().context("variable count")?;
            continue;
        }
        for tok in line.split_whitespace() {
            let lit: i32 = tok.parse().with_context(|| format!("bad literal {tok:?}"))?;
            if lit == 0 {
                clauses.push(std::mem::take(&mut current));
            } else {
                vars = vars.max(lit.abs());
                current.push(lit);
            }
        }
    }
    if !current.is_empty() {
        clauses.push(current);
    }
    Ok((vars, clauses))
}

fn run() -> Result<u8> {
    let mut seed = None;
    let mut path = None;
    for arg in std::env::args().skip(1) {
        if let Some(s) = arg.strip_prefix("--seed=") {
            seed = Some(s.parse::<u64>().context("seed")?);
        } else if arg.starts_with("--") {
            bail!("unknown option {arg}");
        } else {
            path = Some(arg);
        }
    }
    let text = match path.as_deref() {
        None | Some("-") => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s)?;
            s
        }
        Some(p) => fs::read_to_string(p).with_context(|| format!("reading {p}"))?,
    };
    let (vars, mut clauses) = parse_dimacs(&text)?;
    if let Some(s) = seed {
        clauses.shuffle(&mut StdRng::seed_from_u64(s));
    }

    let mut solver: cadical::Solver = cadical::Solver::new();
    solver.reserve(vars);
    for c in clauses {
        solver.add_clause(c);
    }
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    match solver.solve() {
        Some(true) => {
            writeln!(out, "s SATISFIABLE")?;
            let mut line = String::from("v");
            for v in 1..=vars {
                let lit = if solver.value(v) == Some(false) { -v } else { v };
                let tok = format!(" {lit}");
                if line.len() + tok.len() > 78 {
                    writeln!(out, "{line}")?;
                    line = String::from("v");
                }
                line.push_str(&tok);
            }
            writeln!(out, "{line} 0")?;
            Ok(10)
        }
        Some(false) => {
            writeln!(out, "s UNSATISFIABLE")?;
            Ok(20)
        }
        None => {
            writeln!(out, "s UNKNOWN")?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("exgraph-sat: {e:#}");
            ExitCode::from(1)
        }
    }
}
