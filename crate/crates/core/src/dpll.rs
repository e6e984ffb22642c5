//! Embedded complete decision procedure: unit propagation over two watched
//! literals plus chronological backtracking. It has no learning and no
//! restarts; it exists so that the encoder can be cross-checked against the
//! semantic predicates without an external solver, on instances where
//! propagation does almost all of the work.

use crate::cnf::{CnfFormula, Lit};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Value {
    Unassigned,
    True,
    False,
}

#[inline]
fn idx(l: Lit) -> usize {
    2 * l.var() as usize + usize::from(!l.is_positive())
}

/// A formula loaded once and solved under varying assumptions.
pub struct Dpll {
    var_count: usize,
    clauses: Vec<Vec<Lit>>,
    units: Vec<Lit>,
    watches: Vec<Vec<usize>>,
    unsat: bool,
    values: Vec<Value>,
    trail: Vec<Lit>,
}

struct Level {
    trail_pos: usize,
    decision: Lit,
    flipped: bool,
}

impl Dpll {
    pub fn new(cnf: &CnfFormula) -> Self {
        let var_count = cnf.var_count() as usize;
        let mut watches = vec![Vec::new(); 2 * var_count + 2];
        let mut clauses = Vec::with_capacity(cnf.clause_count());
        let mut units = Vec::new();
        for clause in cnf.clauses() {
            if clause.len() == 1 {
                units.push(clause[0]);
            } else {
                let ci = clauses.len();
                watches[idx(clause[0])].push(ci);
                watches[idx(clause[1])].push(ci);
                clauses.push(clause.clone());
            }
        }
        Dpll {
            var_count,
            clauses,
            units,
            watches,
            unsat: cnf.is_trivially_unsat(),
            values: vec![Value::Unassigned; var_count + 1],
            trail: Vec::new(),
        }
    }

    #[inline]
    fn value(&self, l: Lit) -> Value {
        match self.values[l.var() as usize] {
            Value::Unassigned => Value::Unassigned,
            Value::True if l.is_positive() => Value::True,
            Value::False if !l.is_positive() => Value::True,
            _ => Value::False,
        }
    }

    /// Makes `l` true; returns false if it is already false.
    #[inline]
    fn enqueue(&mut self, l: Lit) -> bool {
        match self.value(l) {
            Value::True => true,
            Value::False => false,
            Value::Unassigned => {
                self.values[l.var() as usize] = if l.is_positive() {
                    Value::True
                } else {
                    Value::False
                };
                self.trail.push(l);
                true
            }
        }
    }

    /// Propagates from trail position `head`; false on conflict.
    fn propagate(&mut self, mut head: usize) -> bool {
        while head < self.trail.len() {
            let falsified = -self.trail[head];
            head += 1;
            let mut ws = std::mem::take(&mut self.watches[idx(falsified)]);
            let mut keep = 0;
            let mut i = 0;
            let mut ok = true;
            while i < ws.len() {
                let ci = ws[i];
                i += 1;
                let clause = &mut self.clauses[ci];
                if clause[0] == falsified {
                    clause.swap(0, 1);
                }
                let first = clause[0];
                if self.values[first.var() as usize] != Value::Unassigned
                    && (self.values[first.var() as usize] == Value::True) == first.is_positive()
                {
                    ws[keep] = ci;
                    keep += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..clause.len() {
                    let l = clause[k];
                    let v = self.values[l.var() as usize];
                    let is_false =
                        v != Value::Unassigned && (v == Value::True) != l.is_positive();
                    if !is_false {
                        clause.swap(1, k);
                        self.watches[idx(l)].push(ci);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[keep] = ci;
                keep += 1;
                if !self.enqueue(first) {
                    while i < ws.len() {
                        ws[keep] = ws[i];
                        keep += 1;
                        i += 1;
                    }
                    ok = false;
                }
            }
            ws.truncate(keep);
            self.watches[idx(falsified)] = ws;
            if !ok {
                return false;
            }
        }
        true
    }

    fn undo_to(&mut self, pos: usize) {
        for l in self.trail.drain(pos..) {
            self.values[l.var() as usize] = Value::Unassigned;
        }
    }

    /// Returns a 1-indexed model (`model[0]` unused) or `None` if unsatisfiable.
    pub fn solve(&mut self, assumptions: &[Lit]) -> Option<Vec<bool>> {
        self.undo_to(0);
        if self.unsat {
            return None;
        }
        for k in 0..self.units.len() {
            if !self.enqueue(self.units[k]) {
                return None;
            }
        }
        for &a in assumptions {
            if !self.enqueue(a) {
                return None;
            }
        }
        if !self.propagate(0) {
            return None;
        }

        let mut levels: Vec<Level> = Vec::new();
        let mut next_var = 1;
        loop {
            while next_var <= self.var_count && self.values[next_var] != Value::Unassigned {
                next_var += 1;
            }
            if next_var > self.var_count {
                let model = std::iter::once(false)
                    .chain(self.values[1..].iter().map(|&v| v == Value::True))
                    .collect();
                return Some(model);
            }
            let decision = -Lit::positive(next_var as u32);
            let pos = self.trail.len();
            levels.push(Level {
                trail_pos: pos,
                decision,
                flipped: false,
            });
            self.enqueue(decision);
            let mut consistent = self.propagate(pos);
            while !consistent {
                let level = loop {
                    match levels.pop() {
                        None => return None,
                        Some(l) if !l.flipped => break l,
                        Some(_) => {}
                    }
                };
                self.undo_to(level.trail_pos);
                next_var = next_var.min(level.decision.var() as usize);
                let flipped = -level.decision;
                levels.push(Level {
                    trail_pos: level.trail_pos,
                    decision: flipped,
                    flipped: true,
                });
                self.enqueue(flipped);
                consistent = self.propagate(level.trail_pos);
            }
        }
    }
}

/// One-shot convenience around [`Dpll`].
pub fn solve(cnf: &CnfFormula, assumptions: &[Lit]) -> Option<Vec<bool>> {
    Dpll::new(cnf).solve(assumptions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn formula(vars: u32, clauses: &[Vec<i32>]) -> CnfFormula {
        let mut f = CnfFormula::new();
        for _ in 0..vars {
            f.new_lit();
        }
        for c in clauses {
            let lits: Vec<Lit> = c.iter().map(|&x| Lit::from_dimacs(x)).collect();
            f.add_clause(&lits);
        }
        f
    }

    fn brute_force_sat(vars: u32, clauses: &[Vec<i32>]) -> bool {
        (0u32..1 << vars).any(|mask| {
            clauses.iter().all(|c| {
                c.iter().any(|&x| {
                    let v = mask >> (x.unsigned_abs() - 1) & 1 == 1;
                    v == (x > 0)
                })
            })
        })
    }

    #[test]
    fn trivial_cases() {
        assert!(solve(&formula(1, &[vec![1]]), &[]).unwrap()[1]);
        assert!(solve(&formula(1, &[vec![1], vec![-1]]), &[]).is_none());
        assert!(solve(&formula(2, &[vec![1, 2]]), &[Lit::from_dimacs(-1)]).unwrap()[2]);
        let mut f = formula(1, &[]);
        f.add(&[]);
        assert!(solve(&f, &[]).is_none());
    }

    #[test]
    fn pigeonhole_three_into_two_is_unsat() {
        // p(i,h) = 2*i + h + 1
        let v = |i: i32, h: i32| 2 * i + h + 1;
        let mut cs = Vec::new();
        for i in 0..3 {
            cs.push(vec![v(i, 0), v(i, 1)]);
        }
        for h in 0..2 {
            for i in 0..3 {
                for j in i + 1..3 {
                    cs.push(vec![-v(i, h), -v(j, h)]);
                }
            }
        }
        assert!(solve(&formula(6, &cs), &[]).is_none());
    }

    fn arb_cnf() -> impl Strategy<Value = (u32, Vec<Vec<i32>>)> {
        (1u32..9).prop_flat_map(|vars| {
            let lit = (1..=vars as i32, any::<bool>()).prop_map(|(v, s)| if s { v } else { -v });
            (Just(vars), prop::collection::vec(prop::collection::vec(lit, 1..4), 0..30))
        })
    }

    proptest! {
        #[test]
        fn agrees_with_truth_tables((vars, clauses) in arb_cnf()) {
            let f = formula(vars, &clauses);
            let got = solve(&f, &[]);
            prop_assert_eq!(got.is_some(), brute_force_sat(vars, &clauses));
            if let Some(model) = got {
                prop_assert!(f.is_satisfied_by(&model));
            }
        }

        #[test]
        fn reuse_across_assumptions((vars, clauses) in arb_cnf(), picks in prop::collection::vec(any::<bool>(), 8)) {
            let f = formula(vars, &clauses);
            let mut solver = Dpll::new(&f);
            for (k, &p) in picks.iter().enumerate().take(vars as usize) {
                let a = Lit::from_dimacs(if p { k as i32 + 1 } else { -(k as i32) - 1 });
                let mut extended = clauses.clone();
                extended.push(vec![a.to_dimacs()]);
                prop_assert_eq!(solver.solve(&[a]).is_some(), brute_force_sat(vars, &extended));
            }
        }
    }
}
