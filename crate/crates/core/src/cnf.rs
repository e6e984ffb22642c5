//! Propositional formulas and the small circuit vocabulary the encoder is
//! built from.
//!
//! Gates accept [`Bit`]s, which may be constants; constants are folded away at
//! construction time so no clause ever mentions `true` or `false`. A clause
//! that folds to empty marks the whole formula trivially unsatisfiable.

use std::collections::HashMap;
use std::fmt;
use std::io::{self, Write};
use std::ops::Neg;

/// A DIMACS literal: a non-zero variable index with a sign.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(i32);

impl Lit {
    pub fn positive(var: u32) -> Self {
        assert!(var > 0 && var <= i32::MAX as u32, "variable {var} out of range");
        Lit(var as i32)
    }

    pub fn from_dimacs(code: i32) -> Self {
        assert!(code != 0 && code != i32::MIN, "invalid DIMACS literal {code}");
        Lit(code)
    }

    pub fn var(self) -> u32 {
        self.0.unsigned_abs()
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    pub fn to_dimacs(self) -> i32 {
        self.0
    }

    /// Truth value under a 1-indexed assignment (`assignment[0]` is unused).
    pub fn eval(self, assignment: &[bool]) -> bool {
        assignment[self.var() as usize] == self.is_positive()
    }
}

impl Neg for Lit {
    type Output = Lit;

    fn neg(self) -> Lit {
        Lit(-self.0)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A literal or a Boolean constant.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Bit {
    Const(bool),
    Lit(Lit),
}

pub const TRUE: Bit = Bit::Const(true);
pub const FALSE: Bit = Bit::Const(false);

impl Bit {
    pub fn eval(self, assignment: &[bool]) -> bool {
        match self {
            Bit::Const(b) => b,
            Bit::Lit(l) => l.eval(assignment),
        }
    }

    pub fn lit(self) -> Option<Lit> {
        match self {
            Bit::Lit(l) => Some(l),
            Bit::Const(_) => None,
        }
    }
}

impl Neg for Bit {
    type Output = Bit;

    fn neg(self) -> Bit {
        match self {
            Bit::Const(b) => Bit::Const(!b),
            Bit::Lit(l) => Bit::Lit(-l),
        }
    }
}

impl From<Lit> for Bit {
    fn from(l: Lit) -> Self {
        Bit::Lit(l)
    }
}

/// Order-encoded bounded integer in `lo..=hi`: `ge[k]` stands for
/// `value >= lo + k + 1`, and the value is `lo` plus the number of true
/// thresholds. Thresholds are monotone (`ge[k+1] → ge[k]`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderInt {
    lo: usize,
    ge: Vec<Bit>,
}

impl OrderInt {
    pub fn constant(value: usize) -> Self {
        OrderInt {
            lo: value,
            ge: Vec::new(),
        }
    }

    pub fn lo(&self) -> usize {
        self.lo
    }

    pub fn hi(&self) -> usize {
        self.lo + self.ge.len()
    }

    /// The bit `value >= t`.
    pub fn ge(&self, t: usize) -> Bit {
        if t <= self.lo {
            TRUE
        } else if t > self.hi() {
            FALSE
        } else {
            self.ge[t - self.lo - 1]
        }
    }

    /// `self + by`, sharing the threshold bits.
    pub fn shifted(&self, by: usize) -> OrderInt {
        OrderInt {
            lo: self.lo + by,
            ge: self.ge.clone(),
        }
    }

    /// Threshold bits for `lo+1..=hi`.
    pub fn thresholds(&self) -> &[Bit] {
        &self.ge
    }

    /// Reads the value back, failing if the thresholds are not monotone.
    pub fn decode(&self, assignment: &[bool]) -> Result<usize, String> {
        let bits: Vec<bool> = self.ge.iter().map(|b| b.eval(assignment)).collect();
        let count = bits.iter().take_while(|&&b| b).count();
        if bits[count..].iter().any(|&b| b) {
            return Err(format!("non-monotone order literals {bits:?}"));
        }
        Ok(self.lo + count)
    }
}

#[derive(Clone, Debug, Default)]
pub struct CnfFormula {
    var_count: u32,
    clauses: Vec<Vec<Lit>>,
    symbols: Vec<(String, Lit)>,
    symbol_index: HashMap<String, usize>,
    trivially_unsat: bool,
}

impl CnfFormula {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn var_count(&self) -> u32 {
        self.var_count
    }

    pub fn clause_count(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Vec<Lit>] {
        &self.clauses
    }

    /// Set when some constraint folded to the empty clause.
    pub fn is_trivially_unsat(&self) -> bool {
        self.trivially_unsat
    }

    pub fn new_lit(&mut self) -> Lit {
        self.var_count += 1;
        Lit::positive(self.var_count)
    }

    /// Adds a clause of literals. An empty slice marks the formula unsatisfiable.
    pub fn add_clause(&mut self, lits: &[Lit]) {
        if lits.is_empty() {
            self.trivially_unsat = true;
        } else {
            debug_assert!(lits.iter().all(|l| l.var() <= self.var_count));
            self.clauses.push(lits.to_vec());
        }
    }

    /// Adds a clause over bits, folding constants.
    pub fn add(&mut self, bits: &[Bit]) {
        let mut lits = Vec::with_capacity(bits.len());
        for &b in bits {
            match b {
                Bit::Const(true) => return,
                Bit::Const(false) => {}
                Bit::Lit(l) => {
                    if lits.contains(&-l) {
                        return;
                    }
                    if !lits.contains(&l) {
                        lits.push(l);
                    }
                }
            }
        }
        self.add_clause(&lits);
    }

    pub fn name(&mut self, name: impl Into<String>, lit: Lit) {
        let name = name.into();
        self.symbol_index.insert(name.clone(), self.symbols.len());
        self.symbols.push((name, lit));
    }

    pub fn lookup(&self, name: &str) -> Option<Lit> {
        self.symbol_index.get(name).map(|&k| self.symbols[k].1)
    }

    /// Symbols in definition order.
    pub fn symbols(&self) -> &[(String, Lit)] {
        &self.symbols
    }

    /// Checks every clause under a 1-indexed assignment.
    pub fn is_satisfied_by(&self, assignment: &[bool]) -> bool {
        !self.trivially_unsat
            && self
                .clauses
                .iter()
                .all(|c| c.iter().any(|l| l.eval(assignment)))
    }

    /// `a ∧ b`
    pub fn and(&mut self, a: Bit, b: Bit) -> Bit {
        match (a, b) {
            (FALSE, _) | (_, FALSE) => FALSE,
            (TRUE, x) | (x, TRUE) => x,
            (Bit::Lit(x), Bit::Lit(y)) if x == y => a,
            (Bit::Lit(x), Bit::Lit(y)) if x == -y => FALSE,
            (Bit::Lit(x), Bit::Lit(y)) => {
                let out = self.new_lit();
                self.add_clause(&[-out, x]);
                self.add_clause(&[-out, y]);
                self.add_clause(&[out, -x, -y]);
                Bit::Lit(out)
            }
        }
    }

    /// `⋁ inputs`
    pub fn or(&mut self, inputs: &[Bit]) -> Bit {
        let mut lits = Vec::with_capacity(inputs.len());
        for &b in inputs {
            match b {
                TRUE => return TRUE,
                FALSE => {}
                Bit::Lit(l) => lits.push(l),
            }
        }
        match lits.as_slice() {
            [] => FALSE,
            [single] => Bit::Lit(*single),
            _ => {
                let out = self.new_lit();
                let mut long = Vec::with_capacity(lits.len() + 1);
                long.push(-out);
                long.extend_from_slice(&lits);
                self.add_clause(&long);
                for &l in &lits {
                    self.add_clause(&[out, -l]);
                }
                Bit::Lit(out)
            }
        }
    }

    /// `a ∨ (x ∧ b)`, the cell of a sequential counter.
    fn or_and(&mut self, a: Bit, x: Bit, b: Bit) -> Bit {
        match (a, x, b) {
            (TRUE, _, _) => TRUE,
            (FALSE, _, _) => self.and(x, b),
            (_, FALSE, _) | (_, _, FALSE) => a,
            (_, TRUE, _) => self.or(&[a, b]),
            (_, _, TRUE) => self.or(&[a, x]),
            (Bit::Lit(a), Bit::Lit(x), Bit::Lit(b)) => {
                let s = self.new_lit();
                self.add_clause(&[-a, s]);
                self.add_clause(&[-x, -b, s]);
                self.add_clause(&[-s, a, x]);
                self.add_clause(&[-s, a, b]);
                Bit::Lit(s)
            }
        }
    }

    /// Fresh order-encoded integer in `lo..=hi` with monotonicity clauses.
    /// Thresholds are named `{name}>={t}` when a name is given.
    pub fn new_int(&mut self, lo: usize, hi: usize, name: Option<&str>) -> OrderInt {
        assert!(lo <= hi);
        let ge: Vec<Bit> = (lo + 1..=hi)
            .map(|t| {
                let l = self.new_lit();
                if let Some(name) = name {
                    self.name(format!("{name}>={t}"), l);
                }
                Bit::Lit(l)
            })
            .collect();
        for k in 1..ge.len() {
            self.add(&[-ge[k], ge[k - 1]]);
        }
        OrderInt { lo, ge }
    }

    /// Sequential unary counter: an order-encoded count of the true inputs,
    /// defined by equivalences and truncated at `cap` (the bit `>= cap` still
    /// means "at least `cap`").
    pub fn count(&mut self, inputs: &[Bit], cap: usize) -> OrderInt {
        // reg[k] = "at least k+1 of the inputs seen so far"
        let mut reg: Vec<Bit> = Vec::new();
        for (t, &x) in inputs.iter().enumerate() {
            let width = (t + 1).min(cap);
            let mut next = Vec::with_capacity(width);
            for k in 0..width {
                let stay = reg.get(k).copied().unwrap_or(FALSE);
                let below = if k == 0 { TRUE } else { reg[k - 1] };
                next.push(self.or_and(stay, x, below));
            }
            reg = next;
        }
        OrderInt { lo: 0, ge: reg }
    }

    /// Unary adder `a + b`, defined by equivalences. Sums above `cap` are
    /// forbidden outright; callers only pass caps that are semantically valid.
    pub fn add_ints(&mut self, a: &OrderInt, b: &OrderInt, cap: usize) -> OrderInt {
        let lo = a.lo + b.lo;
        assert!(lo <= cap, "adder lower bound {lo} exceeds cap {cap}");
        let hi = (a.hi() + b.hi()).min(cap);
        let ge: Vec<Bit> = (lo + 1..=hi).map(|_| Bit::Lit(self.new_lit())).collect();
        let sum = OrderInt { lo, ge };
        for x in a.lo..=a.hi() {
            for y in b.lo..=b.hi() {
                // a >= x ∧ b >= y → sum >= x + y
                if x + y > lo {
                    self.add(&[-a.ge(x), -b.ge(y), sum.ge(x + y)]);
                }
                // a <= x ∧ b <= y → sum <= x + y
                if x + y < hi {
                    self.add(&[a.ge(x + 1), b.ge(y + 1), -sum.ge(x + y + 1)]);
                }
            }
        }
        sum
    }

    /// `value` if `gate`, else 0, as an order-encoded integer.
    pub fn gated(&mut self, gate: Bit, value: &OrderInt) -> OrderInt {
        let ge = (1..=value.hi())
            .map(|t| self.and(gate, value.ge(t)))
            .collect();
        OrderInt { lo: 0, ge }
    }

    /// Ladder (sequential) at-most-one over `inputs`: `L - 1` auxiliaries and
    /// `3L - 4` clauses for `L >= 2` inputs.
    pub fn at_most_one(&mut self, inputs: &[Lit]) {
        let l = inputs.len();
        if l <= 1 {
            return;
        }
        // aux[k]: some input with index > k is true
        let aux: Vec<Lit> = (0..l - 1).map(|_| self.new_lit()).collect();
        for k in 0..l - 2 {
            self.add_clause(&[-aux[k + 1], aux[k]]);
        }
        for (k, &x) in inputs.iter().enumerate() {
            if k > 0 {
                self.add_clause(&[-x, aux[k - 1]]);
            }
            if k < l - 1 {
                self.add_clause(&[-x, -aux[k]]);
            }
        }
    }

    /// DIMACS text: `c name = var` symbol lines, the `p cnf` header, then one
    /// zero-terminated clause per line. A trivially unsatisfiable formula is
    /// written with a complementary unit pair on variable 1.
    pub fn write_dimacs<W: Write>(&self, mut out: W) -> io::Result<()> {
        for (name, lit) in &self.symbols {
            writeln!(out, "c {name} = {}", lit.to_dimacs())?;
        }
        if self.trivially_unsat {
            writeln!(out, "c trivially unsatisfiable")?;
            writeln!(
                out,
                "p cnf {} {}",
                self.var_count.max(1),
                self.clauses.len() + 2
            )?;
        } else {
            writeln!(out, "p cnf {} {}", self.var_count, self.clauses.len())?;
        }
        let mut line = String::new();
        for clause in &self.clauses {
            line.clear();
            for l in clause {
                line.push_str(&l.to_dimacs().to_string());
                line.push(' ');
            }
            line.push('0');
            writeln!(out, "{line}")?;
        }
        if self.trivially_unsat {
            writeln!(out, "1 0\n-1 0")?;
        }
        Ok(())
    }

    pub fn to_dimacs_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_dimacs(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("DIMACS output is ASCII")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dpll;
    use proptest::prelude::*;

    /// All assignments of the first `k` variables, extended by the solver.
    fn forced_value(cnf: &CnfFormula, fixed: &[Lit], int: &OrderInt) -> Option<usize> {
        dpll::solve(cnf, fixed).map(|model| int.decode(&model).unwrap())
    }

    fn fix(inputs: &[Lit], values: &[bool]) -> Vec<Lit> {
        inputs
            .iter()
            .zip(values)
            .map(|(&l, &v)| if v { l } else { -l })
            .collect()
    }

    #[test]
    fn folding() {
        let mut f = CnfFormula::new();
        let x = Bit::Lit(f.new_lit());
        assert_eq!(f.and(x, TRUE), x);
        assert_eq!(f.and(x, FALSE), FALSE);
        assert_eq!(f.or(&[x, FALSE]), x);
        assert_eq!(f.or(&[FALSE, FALSE]), FALSE);
        assert_eq!(f.clause_count(), 0);
        f.add(&[x, -x]);
        assert_eq!(f.clause_count(), 0);
        f.add(&[FALSE]);
        assert!(f.is_trivially_unsat());
    }

    #[test]
    fn ladder_counts_and_semantics() {
        for l in 0..6 {
            let mut f = CnfFormula::new();
            let xs: Vec<Lit> = (0..l).map(|_| f.new_lit()).collect();
            f.at_most_one(&xs);
            if l >= 2 {
                assert_eq!(f.clause_count(), 3 * l - 4);
                assert_eq!(f.var_count() as usize, 2 * l - 1);
            }
            for mask in 0u32..1 << l {
                let vals: Vec<bool> = (0..l).map(|k| mask >> k & 1 == 1).collect();
                let sat = dpll::solve(&f, &fix(&xs, &vals)).is_some();
                assert_eq!(sat, mask.count_ones() <= 1, "l={l} mask={mask:b}");
            }
        }
    }

    #[test]
    fn dimacs_layout() {
        let mut f = CnfFormula::new();
        let a = f.new_lit();
        let b = f.new_lit();
        f.name("a", a);
        f.add_clause(&[a, -b]);
        f.add_clause(&[b]);
        assert_eq!(f.to_dimacs_string(), "c a = 1\np cnf 2 2\n1 -2 0\n2 0\n");
        f.add(&[]);
        assert!(f.to_dimacs_string().ends_with("p cnf 2 4\n1 -2 0\n2 0\n1 0\n-1 0\n"));
    }

    #[test]
    fn decode_rejects_gaps() {
        let mut f = CnfFormula::new();
        let x = f.new_int(1, 4, Some("x"));
        assert_eq!(x.decode(&[false, true, true, false]).unwrap(), 3);
        assert!(x.decode(&[false, true, false, true]).is_err());
        assert_eq!(f.lookup("x>=3"), x.ge(3).lit());
        assert_eq!(x.ge(1), TRUE);
        assert_eq!(x.ge(5), FALSE);
    }

    proptest! {
        #[test]
        fn counter_matches_popcount(values in prop::collection::vec(any::<bool>(), 0..9), cap in 1usize..10) {
            let mut f = CnfFormula::new();
            let xs: Vec<Lit> = values.iter().map(|_| f.new_lit()).collect();
            let bits: Vec<Bit> = xs.iter().map(|&l| Bit::Lit(l)).collect();
            let c = f.count(&bits, cap);
            let ones = values.iter().filter(|&&v| v).count();
            prop_assert_eq!(forced_value(&f, &fix(&xs, &values), &c), Some(ones.min(cap)));
        }

        #[test]
        fn adder_matches_sum(a_lo in 0usize..3, a_w in 0usize..4, b_lo in 0usize..3, b_w in 0usize..4,
                             a_pick in 0usize..4, b_pick in 0usize..4, slack in 0usize..3) {
            let mut f = CnfFormula::new();
            let a = f.new_int(a_lo, a_lo + a_w, None);
            let b = f.new_int(b_lo, b_lo + b_w, None);
            let cap = a_lo + b_lo + slack + a_w.min(b_w);
            let s = f.add_ints(&a, &b, cap);
            let av = a_lo + a_pick.min(a_w);
            let bv = b_lo + b_pick.min(b_w);
            let mut fixed = Vec::new();
            for t in a.lo() + 1..=a.hi() {
                let l = a.ge(t).lit().unwrap();
                fixed.push(if av >= t { l } else { -l });
            }
            for t in b.lo() + 1..=b.hi() {
                let l = b.ge(t).lit().unwrap();
                fixed.push(if bv >= t { l } else { -l });
            }
            let got = forced_value(&f, &fixed, &s);
            if av + bv <= cap {
                prop_assert_eq!(got, Some(av + bv));
            } else {
                prop_assert_eq!(got, None);
            }
        }

        #[test]
        fn gate_selects_value(on in any::<bool>(), v in 1usize..5) {
            let mut f = CnfFormula::new();
            let g = f.new_lit();
            let w = f.new_int(1, 5, None);
            let c = f.gated(Bit::Lit(g), &w);
            let mut fixed = vec![if on { g } else { -g }];
            for t in 2..=5 {
                let l = w.ge(t).lit().unwrap();
                fixed.push(if v >= t { l } else { -l });
            }
            prop_assert_eq!(forced_value(&f, &fixed, &c), Some(if on { v } else { 0 }));
        }
    }
}
