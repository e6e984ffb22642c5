//! Compilation of a graph search problem into CNF.
//!
//! Integers (parents, degrees, weights, the degree extremes) are order
//! encoded; sums are sequential unary counters and unary adders. The variable
//! numbering is a deterministic function of the call sequence, so identical
//! problem specs produce byte-identical DIMACS.
//!
//! Symbols recorded in the formula:
//!
//! | name            | meaning                              |
//! |-----------------|--------------------------------------|
//! | `A[i,j]`        | edge `{i,j}`, `i < j`                |
//! | `deg[i]>=k`     | degree threshold of vertex `i`       |
//! | `delta>=k`      | minimum degree threshold             |
//! | `Delta>=k`      | maximum degree threshold             |
//! | `p[j]>=k`       | BFS parent threshold of vertex `j`   |
//! | `w[i]>=k`       | subtree weight threshold of `i`      |
//!
//! A symbol may map to a negative literal when a threshold coincides with the
//! negation of another variable.

use std::fmt;
use std::str::FromStr;

use crate::cnf::{Bit, CnfFormula, Lit, OrderInt, FALSE};
use crate::error::{Error, Result};
use crate::graph::{pair_count, pair_index0, Graph, MAX_VERTICES};
use crate::sbp::{ParentArray, Predicate};

/// Forbidden cycle lengths, a subset of `{3, 4}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Forbid {
    pub c3: bool,
    pub c4: bool,
}

impl Forbid {
    pub const C3_C4: Forbid = Forbid { c3: true, c4: true };
    pub const C4: Forbid = Forbid { c3: false, c4: true };
    pub const C3: Forbid = Forbid { c3: true, c4: false };
    pub const NONE: Forbid = Forbid { c3: false, c4: false };

    pub fn contains(self, k: usize) -> bool {
        match k {
            3 => self.c3,
            4 => self.c4,
            _ => false,
        }
    }

    pub fn lengths(self) -> Vec<usize> {
        [3, 4].into_iter().filter(|&k| self.contains(k)).collect()
    }

    /// True iff `g` contains none of the forbidden cycles.
    pub fn admits(self, g: &Graph) -> bool {
        !(self.c3 && g.has_triangle()) && !(self.c4 && g.has_square())
    }
}

impl fmt::Display for Forbid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.lengths().iter().map(usize::to_string).collect();
        if parts.is_empty() {
            f.write_str("none")
        } else {
            f.write_str(&parts.join(","))
        }
    }
}

impl FromStr for Forbid {
    type Err = Error;

    /// `"3,4"`, `"4"`, `"3"` or `"none"`.
    fn from_str(s: &str) -> Result<Self> {
        let mut out = Forbid::NONE;
        if s.trim() == "none" || s.trim().is_empty() {
            return Ok(out);
        }
        for tok in s.split([',', ' ', ';']).filter(|t| !t.is_empty()) {
            match tok {
                "3" => out.c3 = true,
                "4" => out.c4 = true,
                _ => {
                    return Err(Error::input(format!(
                        "forbidden cycle lengths must be 3 and/or 4, got {tok:?}"
                    )))
                }
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum CycleEncoding {
    /// One clause per triangle and per 4-cycle: `O(n^4)` clauses.
    Direct,
    /// Path variables `x[i,j,k]` and their disjunctions: `O(n^3)` clauses.
    #[default]
    Auxiliary,
}

impl FromStr for CycleEncoding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(CycleEncoding::Direct),
            "aux" | "auxiliary" => Ok(CycleEncoding::Auxiliary),
            _ => Err(Error::input(format!(
                "cycle encoding must be direct or aux, got {s:?}"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum SbpMode {
    #[default]
    None,
    Bfs,
    BfsPlus,
    BfsStar,
}

impl SbpMode {
    pub const ALL: [SbpMode; 4] = [SbpMode::None, SbpMode::Bfs, SbpMode::BfsPlus, SbpMode::BfsStar];

    pub fn name(self) -> &'static str {
        match self {
            SbpMode::None => "none",
            SbpMode::Bfs => "bfs",
            SbpMode::BfsPlus => "bfs+",
            SbpMode::BfsStar => "bfs-star",
        }
    }

    /// The semantic predicate this mode compiles, if any.
    pub fn predicate(self) -> Option<Predicate> {
        match self {
            SbpMode::None => None,
            SbpMode::Bfs => Some(Predicate::Bfs),
            SbpMode::BfsPlus => Some(Predicate::BfsPlus),
            SbpMode::BfsStar => Some(Predicate::BfsStar),
        }
    }
}

impl fmt::Display for SbpMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SbpMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(SbpMode::None),
            "bfs" => Ok(SbpMode::Bfs),
            "bfs+" | "bfs-plus" => Ok(SbpMode::BfsPlus),
            "bfs*" | "bfs-star" => Ok(SbpMode::BfsStar),
            _ => Err(Error::input(format!(
                "unknown sbp mode {s:?} (expected none, bfs, bfs+, bfs-star)"
            ))),
        }
    }
}

/// Optional problem-specific degree bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Bounds {
    /// For `{C3, C4}`-free graphs: `Δδ <= n-1`, `δ² <= n-1`,
    /// `δ >= m - ex(n-1)` and `Δ >= ⌈2m/n⌉`. Needs `ex(n-1)`.
    pub garnick: bool,
    /// For `C4`-free graphs: `δ <= Δ`, `Δ(δ-1) <= n-1` and
    /// `δ <= (1 + √(4n-3)) / 2`.
    pub clapham: bool,
}

impl Bounds {
    pub const NONE: Bounds = Bounds {
        garnick: false,
        clapham: false,
    };
    pub const GARNICK: Bounds = Bounds {
        garnick: true,
        clapham: false,
    };
    pub const CLAPHAM: Bounds = Bounds {
        garnick: false,
        clapham: true,
    };

    /// The natural bound family for a forbidden set.
    pub fn default_for(forbid: Forbid) -> Bounds {
        if forbid == Forbid::C3_C4 {
            Bounds::GARNICK
        } else if forbid.c4 {
            Bounds::CLAPHAM
        } else {
            Bounds::NONE
        }
    }
}

/// One SAT instance: is there a graph on `n` vertices with exactly `m` edges,
/// none of the forbidden cycles, and a labeling accepted by the chosen SBP?
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProblemSpec {
    pub n: usize,
    pub m: usize,
    pub forbid: Forbid,
    pub cycle_encoding: CycleEncoding,
    pub sbp: SbpMode,
    pub bounds: Bounds,
    /// `ex(n-1; forbid)`, required by the Garnick bounds.
    pub ex_prev: Option<usize>,
}

impl ProblemSpec {
    pub fn new(n: usize, m: usize, forbid: Forbid) -> Self {
        ProblemSpec {
            n,
            m,
            forbid,
            cycle_encoding: CycleEncoding::Auxiliary,
            sbp: SbpMode::None,
            bounds: Bounds::NONE,
            ex_prev: None,
        }
    }

    pub fn with_sbp(mut self, sbp: SbpMode) -> Self {
        self.sbp = sbp;
        self
    }

    pub fn with_cycle_encoding(mut self, enc: CycleEncoding) -> Self {
        self.cycle_encoding = enc;
        self
    }

    pub fn with_bounds(mut self, bounds: Bounds, ex_prev: Option<usize>) -> Self {
        self.bounds = bounds;
        self.ex_prev = ex_prev;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > MAX_VERTICES {
            return Err(Error::capacity(format!(
                "instances have 1..={MAX_VERTICES} vertices, got {}",
                self.n
            )));
        }
        if self.m > pair_count(self.n) {
            return Err(Error::input(format!(
                "m = {} exceeds the {} vertex pairs of n = {}",
                self.m,
                pair_count(self.n),
                self.n
            )));
        }
        if self.bounds.garnick {
            if self.forbid != Forbid::C3_C4 {
                return Err(Error::input("garnick bounds apply only to forbid = {3,4}"));
            }
            if self.ex_prev.is_none() {
                return Err(Error::input("garnick bounds need ex(n-1) (ex_prev)"));
            }
        }
        if self.bounds.clapham && !self.forbid.c4 {
            return Err(Error::input("clapham bounds need 4 in the forbidden set"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct DegreeVars {
    pub per_vertex: Vec<OrderInt>,
    pub min: OrderInt,
    pub max: OrderInt,
}

#[derive(Clone, Debug)]
pub struct SbpVars {
    pub mode: SbpMode,
    /// `p_j` for `j = 2..=n` at index `j - 2`.
    pub parents: Vec<OrderInt>,
    /// `is_parent[j-2][i-1]` is the bit `p_j = i`.
    pub is_parent: Vec<Vec<Bit>>,
    /// `w_1..=w_n`; empty unless the mode is `bfs-star`.
    pub weights: Vec<OrderInt>,
}

/// A formula under construction together with the layout needed to decode
/// its models.
#[derive(Clone, Debug)]
pub struct Encoding {
    n: usize,
    cnf: CnfFormula,
    adjacency: Vec<Lit>,
    degrees: Option<DegreeVars>,
    sbp: Option<SbpVars>,
}

impl Encoding {
    /// Introduces one variable per unordered pair, in upper-triangle order.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_VERTICES {
            return Err(Error::capacity(format!(
                "instances have 1..={MAX_VERTICES} vertices, got {n}"
            )));
        }
        let mut cnf = CnfFormula::new();
        let mut adjacency = Vec::with_capacity(pair_count(n));
        for i in 1..=n {
            for j in i + 1..=n {
                let l = cnf.new_lit();
                cnf.name(format!("A[{i},{j}]"), l);
                adjacency.push(l);
            }
        }
        Ok(Encoding {
            n,
            cnf,
            adjacency,
            degrees: None,
            sbp: None,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cnf(&self) -> &CnfFormula {
        &self.cnf
    }

    pub fn into_cnf(self) -> CnfFormula {
        self.cnf
    }

    pub fn degrees(&self) -> Option<&DegreeVars> {
        self.degrees.as_ref()
    }

    pub fn sbp(&self) -> Option<&SbpVars> {
        self.sbp.as_ref()
    }

    /// The variable of edge `{i, j}` (1-based, either order). `i == j` is
    /// structurally false and has no variable.
    pub fn adjacency(&self, i: usize, j: usize) -> Option<Lit> {
        if i == j || i == 0 || j == 0 || i > self.n || j > self.n {
            return None;
        }
        Some(self.adjacency[pair_index0(self.n, i - 1, j - 1)])
    }

    fn a(&self, i: usize, j: usize) -> Bit {
        self.adjacency(i, j).map_or(FALSE, Bit::Lit)
    }

    /// Symbol lookup; `A[j,i]` resolves to `A[i,j]`.
    pub fn lookup(&self, name: &str) -> Option<Lit> {
        if let Some(inner) = name.strip_prefix("A[").and_then(|s| s.strip_suffix(']')) {
            let (i, j) = inner.split_once(',')?;
            return self.adjacency(i.trim().parse().ok()?, j.trim().parse().ok()?);
        }
        self.cnf.lookup(name)
    }

    /// Compiles a whole problem spec.
    pub fn encode(spec: &ProblemSpec) -> Result<Self> {
        spec.validate()?;
        let mut enc = Encoding::new(spec.n)?;
        match spec.cycle_encoding {
            CycleEncoding::Direct => {
                if spec.forbid.c3 {
                    enc.encode_no_c3_direct();
                }
                if spec.forbid.c4 {
                    enc.encode_no_c4_direct();
                }
            }
            CycleEncoding::Auxiliary => enc.encode_no_cycles_auxiliary(spec.forbid),
        }
        enc.encode_edge_count(spec.m)?;
        enc.encode_degrees();
        if spec.bounds.garnick {
            let ex_prev = spec
                .ex_prev
                .ok_or_else(|| Error::input("garnick bounds need ex(n-1) (ex_prev)"))?;
            enc.encode_garnick_bounds(spec.m, ex_prev);
        }
        if spec.bounds.clapham {
            enc.encode_clapham_bounds();
        }
        enc.encode_sbp(spec.sbp);
        Ok(enc)
    }

    /// `¬A[i,j] ∨ ¬A[j,k] ∨ ¬A[i,k]` for every triple `i < j < k`.
    pub fn encode_no_c3_direct(&mut self) {
        let n = self.n;
        for i in 1..=n {
            for j in i + 1..=n {
                for k in j + 1..=n {
                    let c = [-self.a(i, j), -self.a(j, k), -self.a(i, k)];
                    self.cnf.add(&c);
                }
            }
        }
    }

    /// One clause per undirected 4-cycle: for `a < b < c < d` the cycles
    /// `a-b-c-d`, `a-b-d-c` and `a-c-b-d`.
    pub fn encode_no_c4_direct(&mut self) {
        let n = self.n;
        for a in 1..=n {
            for b in a + 1..=n {
                for c in b + 1..=n {
                    for d in c + 1..=n {
                        for [p, q, r, s] in [[a, b, c, d], [a, b, d, c], [a, c, b, d]] {
                            let cl = [-self.a(p, q), -self.a(q, r), -self.a(r, s), -self.a(s, p)];
                            self.cnf.add(&cl);
                        }
                    }
                }
            }
        }
    }

    /// For every pair `i < k`: path bits `x[i,j,k] ↔ A[i,j] ∧ A[j,k]`; with 3
    /// forbidden, `x[i,k] ↔ ⋁_j x[i,j,k]` and `¬A[i,k] ∨ ¬x[i,k]`; with 4
    /// forbidden, a ladder at-most-one over the `x[i,j,k]`.
    ///
    /// With `L = n - 2` middles per pair this emits, per pair, `3L` definition
    /// clauses, plus `L + 2` for the triangle part and `3L - 4` (`L >= 2`) for
    /// the 4-cycle part.
    pub fn encode_no_cycles_auxiliary(&mut self, forbid: Forbid) {
        if !forbid.c3 && !forbid.c4 {
            return;
        }
        let n = self.n;
        for i in 1..=n {
            for k in i + 1..=n {
                let mut paths = Vec::with_capacity(n.saturating_sub(2));
                for j in (1..=n).filter(|&j| j != i && j != k) {
                    let x = self.cnf.new_lit();
                    let (aij, ajk) = (self.a(i, j), self.a(j, k));
                    self.cnf.add(&[-Bit::Lit(x), aij]);
                    self.cnf.add(&[-Bit::Lit(x), ajk]);
                    self.cnf.add(&[Bit::Lit(x), -aij, -ajk]);
                    paths.push(x);
                }
                if forbid.c3 {
                    let any = self.cnf.new_lit();
                    let mut long = vec![-any];
                    long.extend_from_slice(&paths);
                    self.cnf.add_clause(&long);
                    for &x in &paths {
                        self.cnf.add_clause(&[any, -x]);
                    }
                    let aik = self.a(i, k);
                    self.cnf.add(&[-aik, -Bit::Lit(any)]);
                }
                if forbid.c4 {
                    self.cnf.at_most_one(&paths);
                }
            }
        }
    }

    /// Exactly `m` edges, via a sequential counter over the pair variables
    /// truncated at `m + 1`.
    pub fn encode_edge_count(&mut self, m: usize) -> Result<()> {
        let pc = pair_count(self.n);
        if m > pc {
            return Err(Error::input(format!(
                "m = {m} exceeds the {pc} vertex pairs of n = {}",
                self.n
            )));
        }
        let inputs: Vec<Bit> = self.adjacency.iter().map(|&l| Bit::Lit(l)).collect();
        let count = self.cnf.count(&inputs, m + 1);
        self.cnf.add(&[count.ge(m)]);
        self.cnf.add(&[-count.ge(m + 1)]);
        Ok(())
    }

    /// Degree registers for every vertex and the extremes `δ`, `Δ`: every
    /// degree lies in `[δ, Δ]` and some vertex attains each. Idempotent.
    pub fn encode_degrees(&mut self) -> &DegreeVars {
        if self.degrees.is_none() {
            let n = self.n;
            let top = n - 1;
            let mut per_vertex = Vec::with_capacity(n);
            for i in 1..=n {
                let inputs: Vec<Bit> = (1..=n).filter(|&j| j != i).map(|j| self.a(i, j)).collect();
                let deg = self.cnf.count(&inputs, top);
                for (k, b) in deg.thresholds().iter().enumerate() {
                    if let Some(l) = b.lit() {
                        self.cnf.name(format!("deg[{i}]>={}", k + 1), l);
                    }
                }
                per_vertex.push(deg);
            }
            let min = self.cnf.new_int(0, top, Some("delta"));
            let max = self.cnf.new_int(0, top, Some("Delta"));
            for deg in &per_vertex {
                for k in 1..=top {
                    self.cnf.add(&[-min.ge(k), deg.ge(k)]);
                    self.cnf.add(&[-deg.ge(k), max.ge(k)]);
                }
            }
            for k in 1..=top {
                let mut attained_max = vec![-max.ge(k)];
                attained_max.extend(per_vertex.iter().map(|d| d.ge(k)));
                self.cnf.add(&attained_max);
                let mut attained_min = vec![min.ge(k)];
                attained_min.extend(per_vertex.iter().map(|d| -d.ge(k)));
                self.cnf.add(&attained_min);
            }
            self.degrees = Some(DegreeVars {
                per_vertex,
                min,
                max,
            });
        }
        self.degrees.as_ref().expect("just encoded")
    }

    /// `Δδ <= n-1`, `δ² <= n-1`, `δ >= m - ex_prev`, `Δ >= ⌈2m/n⌉`.
    pub fn encode_garnick_bounds(&mut self, m: usize, ex_prev: usize) {
        let n = self.n;
        let (min, max) = {
            let d = self.encode_degrees();
            (d.min.clone(), d.max.clone())
        };
        for a in 1..n {
            let b = (n - 1) / a + 1;
            self.cnf.add(&[-max.ge(a), -min.ge(b)]);
        }
        self.cnf.add(&[-min.ge(isqrt(n - 1) + 1)]);
        if m > ex_prev {
            self.cnf.add(&[min.ge(m - ex_prev)]);
        }
        self.cnf.add(&[max.ge((2 * m).div_ceil(n))]);
    }

    /// `δ <= Δ`, `Δ(δ-1) <= n-1`, `δ <= (1 + √(4n-3)) / 2`.
    pub fn encode_clapham_bounds(&mut self) {
        let n = self.n;
        let (min, max) = {
            let d = self.encode_degrees();
            (d.min.clone(), d.max.clone())
        };
        for k in 1..n {
            self.cnf.add(&[-min.ge(k), max.ge(k)]);
        }
        for a in 1..n {
            let b = (n - 1) / a + 2;
            self.cnf.add(&[-max.ge(a), -min.ge(b)]);
        }
        self.cnf.add(&[-min.ge(clapham_min_degree_cap(n) + 1)]);
    }

    /// The BFS-enumeration predicates as constraints.
    ///
    /// * `bfs`: `p_j ∈ 1..j`, `p_j <= p_{j+1}`, and
    ///   `(p_j = i) ↔ A[i,j] ∧ ⋀_{k<i} ¬A[k,j]`;
    /// * `bfs+`: additionally `deg_1 = Δ`;
    /// * `bfs-star`: additionally `w_i = 1 + Σ_j [p_j = i]·w_j` with
    ///   `w_i ∈ 1..=n-i+1`, and `p_i = p_{i+1} → w_i >= w_{i+1}`.
    pub fn encode_sbp(&mut self, mode: SbpMode) {
        if mode == SbpMode::None || self.sbp.is_some() {
            return;
        }
        let n = self.n;
        let mut parents = Vec::with_capacity(n.saturating_sub(1));
        let mut is_parent = Vec::with_capacity(n.saturating_sub(1));
        for j in 2..=n {
            let p = self.cnf.new_int(1, j - 1, Some(&format!("p[{j}]")));
            let eq: Vec<Bit> = (1..j).map(|i| self.cnf.and(p.ge(i), -p.ge(i + 1))).collect();
            for i in 1..j {
                let e = eq[i - 1];
                self.cnf.add(&[-e, self.a(i, j)]);
                for k in 1..i {
                    self.cnf.add(&[-e, -self.a(k, j)]);
                }
                let mut back = vec![-self.a(i, j), e];
                back.extend((1..i).map(|k| self.a(k, j)));
                self.cnf.add(&back);
            }
            parents.push(p);
            is_parent.push(eq);
        }
        for j in 2..n {
            let (p, next) = (&parents[j - 2], &parents[j - 1]);
            for k in 2..j {
                self.cnf.add(&[-p.ge(k), next.ge(k)]);
            }
        }

        if matches!(mode, SbpMode::BfsPlus | SbpMode::BfsStar) {
            let (root, max) = {
                let d = self.encode_degrees();
                (d.per_vertex[0].clone(), d.max.clone())
            };
            for k in 1..n {
                self.cnf.add(&[-max.ge(k), root.ge(k)]);
            }
        }

        let mut weights = Vec::new();
        if mode == SbpMode::BfsStar {
            let mut by_vertex: Vec<Option<OrderInt>> = vec![None; n + 1];
            for i in (1..=n).rev() {
                let cap = n - i;
                let mut sum = OrderInt::constant(0);
                for j in i + 1..=n {
                    let w_j = by_vertex[j].as_ref().expect("built in reverse order");
                    let c = self.cnf.gated(is_parent[j - 2][i - 1], w_j);
                    sum = if j == i + 1 {
                        c
                    } else {
                        self.cnf.add_ints(&sum, &c, cap)
                    };
                }
                let w = sum.shifted(1);
                for t in 2..=w.hi() {
                    if let Some(l) = w.ge(t).lit() {
                        self.cnf.name(format!("w[{i}]>={t}"), l);
                    }
                }
                by_vertex[i] = Some(w);
            }
            weights = by_vertex.into_iter().flatten().collect();
            for i in 2..n {
                let (left, right) = (&weights[i - 1], &weights[i]);
                for q in 1..i {
                    let same = [-is_parent[i - 2][q - 1], -is_parent[i - 1][q - 1]];
                    for k in 2..=right.hi() {
                        self.cnf.add(&[same[0], same[1], -right.ge(k), left.ge(k)]);
                    }
                }
            }
        }

        self.sbp = Some(SbpVars {
            mode,
            parents,
            is_parent,
            weights,
        });
    }

    /// Unit literals pinning every adjacency variable to `g`.
    pub fn adjacency_assumptions(&self, g: &Graph) -> Result<Vec<Lit>> {
        if g.n() != self.n {
            return Err(Error::input(format!(
                "graph on {} vertices fixed into an encoding for n = {}",
                g.n(),
                self.n
            )));
        }
        Ok(self
            .adjacency
            .iter()
            .enumerate()
            .map(|(k, &l)| if g.edge_mask() >> k & 1 == 1 { l } else { -l })
            .collect())
    }

    /// Adds the [`Encoding::adjacency_assumptions`] as unit clauses.
    pub fn fix_adjacency(&mut self, g: &Graph) -> Result<()> {
        for l in self.adjacency_assumptions(g)? {
            self.cnf.add_clause(&[l]);
        }
        Ok(())
    }

    /// Reads a model (1-indexed, `model[0]` unused) back into a graph and the
    /// encoded integers.
    pub fn decode_model(&self, model: &[bool]) -> Result<DecodedModel> {
        if model.len() <= self.cnf.var_count() as usize {
            return Err(Error::Decode(format!(
                "model covers {} variables, formula has {}",
                model.len().saturating_sub(1),
                self.cnf.var_count()
            )));
        }
        let mut mask = 0u128;
        for (k, l) in self.adjacency.iter().enumerate() {
            if l.eval(model) {
                mask |= 1 << k;
            }
        }
        let graph = Graph::from_edge_mask(self.n, mask)?;
        let dec = |int: &OrderInt, what: &str| {
            int.decode(model)
                .map_err(|e| Error::Decode(format!("{what}: {e}")))
        };

        let mut out = DecodedModel {
            graph,
            degrees: None,
            min_degree: None,
            max_degree: None,
            parents: None,
            weights: None,
        };
        if let Some(d) = &self.degrees {
            out.degrees = Some(
                d.per_vertex
                    .iter()
                    .enumerate()
                    .map(|(i, int)| dec(int, &format!("deg[{}]", i + 1)))
                    .collect::<Result<_>>()?,
            );
            out.min_degree = Some(dec(&d.min, "delta")?);
            out.max_degree = Some(dec(&d.max, "Delta")?);
        }
        if let Some(s) = &self.sbp {
            let parents = s
                .parents
                .iter()
                .enumerate()
                .map(|(k, int)| dec(int, &format!("p[{}]", k + 2)))
                .collect::<Result<Vec<_>>>()?;
            out.parents = Some(ParentArray::new(parents).map_err(|e| Error::Decode(e.to_string()))?);
            if !s.weights.is_empty() {
                out.weights = Some(
                    s.weights
                        .iter()
                        .enumerate()
                        .map(|(i, int)| dec(int, &format!("w[{}]", i + 1)))
                        .collect::<Result<_>>()?,
                );
            }
        }
        Ok(out)
    }
}

/// What a model says, beyond the graph itself, for the parts that were encoded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodedModel {
    pub graph: Graph,
    pub degrees: Option<Vec<usize>>,
    pub min_degree: Option<usize>,
    pub max_degree: Option<usize>,
    pub parents: Option<ParentArray>,
    pub weights: Option<Vec<usize>>,
}

pub(crate) fn isqrt(x: usize) -> usize {
    let mut r = (x as f64).sqrt() as usize;
    while r * r > x {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= x {
        r += 1;
    }
    r
}

/// Largest `d` with `d <= (1 + √(4n-3)) / 2`, i.e. `(2d-1)² <= 4n-3`.
pub fn clapham_min_degree_cap(n: usize) -> usize {
    let bound = 4 * n - 3;
    let mut d = 0;
    while (2 * (d + 1) - 1) * (2 * (d + 1) - 1) <= bound {
        d += 1;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dpll;
    use crate::fixtures;
    use crate::sbp;

    fn solve_fixed(enc: &Encoding, g: &Graph) -> Option<DecodedModel> {
        let fixed = enc.adjacency_assumptions(g).unwrap();
        dpll::solve(enc.cnf(), &fixed).map(|m| enc.decode_model(&m).unwrap())
    }

    fn binomial(n: usize, k: usize) -> usize {
        if k > n {
            return 0;
        }
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn adjacency_variables() {
        assert_eq!(Encoding::new(4).unwrap().cnf().var_count(), 6);
        assert_eq!(Encoding::new(10).unwrap().cnf().var_count(), 45);
        let enc = Encoding::new(5).unwrap();
        assert_eq!(enc.lookup("A[3,2]"), enc.lookup("A[2,3]"));
        assert!(enc.lookup("A[2,3]").is_some());
        assert_eq!(enc.adjacency(2, 2), None);
    }

    #[test]
    fn direct_cycle_clause_counts() {
        for n in 3..=7 {
            let mut e = Encoding::new(n).unwrap();
            e.encode_no_c3_direct();
            assert_eq!(e.cnf().clause_count(), binomial(n, 3));
            let mut e = Encoding::new(n).unwrap();
            e.encode_no_c4_direct();
            assert_eq!(e.cnf().clause_count(), 3 * binomial(n, 4));
        }
    }

    #[test]
    fn auxiliary_clause_counts() {
        for (n, expected) in [(4, 72), (5, 190), (6, 390)] {
            let mut e = Encoding::new(n).unwrap();
            e.encode_no_cycles_auxiliary(Forbid::C3_C4);
            assert_eq!(e.cnf().clause_count(), expected);
        }
        for n in 4..=9 {
            let (pairs, l) = (pair_count(n), n - 2);
            for (forbid, per_pair) in [
                (Forbid::C3_C4, 7 * l - 2),
                (Forbid::C4, 6 * l - 4),
                (Forbid::C3, 4 * l + 2),
            ] {
                let mut e = Encoding::new(n).unwrap();
                e.encode_no_cycles_auxiliary(forbid);
                assert_eq!(e.cnf().clause_count(), pairs * per_pair, "n={n} {forbid}");
            }
        }
    }

    #[test]
    fn direct_c4_clauses_match_each_4_cycle_once() {
        // every labeled 4-cycle on 4 vertices falsifies exactly one clause
        let mut e = Encoding::new(4).unwrap();
        e.encode_no_c4_direct();
        let cycles = [
            Graph::from_edges(4, &[(1, 2), (2, 3), (3, 4), (1, 4)]).unwrap(),
            Graph::from_edges(4, &[(1, 2), (2, 4), (3, 4), (1, 3)]).unwrap(),
            Graph::from_edges(4, &[(1, 3), (2, 3), (2, 4), (1, 4)]).unwrap(),
        ];
        for g in cycles {
            let mut model = vec![false];
            model.extend(e.adjacency_assumptions(&g).unwrap().iter().map(|l| l.is_positive()));
            let violated = e
                .cnf()
                .clauses()
                .iter()
                .filter(|c| !c.iter().any(|l| l.eval(&model)))
                .count();
            assert_eq!(violated, 1);
        }
    }

    #[test]
    fn auxiliary_cycle_semantics() {
        let k3 = Graph::from_edges(3, &[(1, 2), (2, 3), (1, 3)]).unwrap();
        let c4 = fixtures::bfs_numbered_c4();
        for (forbid, g, sat) in [
            (Forbid::C3, k3, false),
            (Forbid::C3_C4, k3, false),
            (Forbid::C4, k3, true),
            (Forbid::C4, c4, false),
            (Forbid::C3_C4, c4, false),
            (Forbid::C3, c4, true),
            (Forbid::C3_C4, fixtures::c3c4_free_10(), true),
        ] {
            let mut e = Encoding::new(g.n()).unwrap();
            e.encode_no_cycles_auxiliary(forbid);
            assert_eq!(solve_fixed(&e, &g).is_some(), sat, "{forbid} {g:?}");
        }
    }

    #[test]
    fn auxiliary_matches_direct_on_all_small_graphs() {
        for n in 3..=5 {
            for forbid in [Forbid::C3, Forbid::C4, Forbid::C3_C4] {
                let mut e = Encoding::new(n).unwrap();
                e.encode_no_cycles_auxiliary(forbid);
                let mut solver = dpll::Dpll::new(e.cnf());
                for mask in 0..1u128 << pair_count(n) {
                    let g = Graph::from_edge_mask(n, mask).unwrap();
                    let sat = solver.solve(&e.adjacency_assumptions(&g).unwrap()).is_some();
                    assert_eq!(sat, forbid.admits(&g));
                }
            }
        }
    }

    #[test]
    fn edge_count_instances() {
        let sat = |n, m, forbid| {
            let enc = Encoding::encode(&ProblemSpec::new(n, m, forbid)).unwrap();
            dpll::solve(enc.cnf(), &[]).map(|model| enc.decode_model(&model).unwrap())
        };
        assert!(sat(3, 3, Forbid::C3).is_none());
        let k2 = sat(2, 1, Forbid::NONE).unwrap();
        assert_eq!(k2.graph, Graph::from_edges(2, &[(1, 2)]).unwrap());
        let c5 = sat(5, 5, Forbid::C3_C4).unwrap();
        assert_eq!(c5.graph.edge_count(), 5);
        assert!(Forbid::C3_C4.admits(&c5.graph));
        assert!(sat(5, 6, Forbid::C3_C4).is_none());
        assert!(Encoding::encode(&ProblemSpec::new(3, 4, Forbid::NONE)).is_err());
    }

    #[test]
    fn degree_registers_decode() {
        let star = Graph::from_edges(4, &[(1, 2), (1, 3), (1, 4)]).unwrap();
        for (g, degs, min, max) in [
            (fixtures::bfs_numbered_c4(), vec![2, 2, 2, 2], 2, 2),
            (star, vec![3, 1, 1, 1], 1, 3),
            (fixtures::layer_orderings()[0], fixtures::layer_orderings()[0].degrees(), 1, 3),
        ] {
            let mut e = Encoding::new(g.n()).unwrap();
            e.encode_degrees();
            let d = solve_fixed(&e, &g).unwrap();
            assert_eq!(d.degrees.unwrap(), degs);
            assert_eq!((d.min_degree.unwrap(), d.max_degree.unwrap()), (min, max));
        }
    }

    /// Values of (δ, Δ) consistent with the bound clauses alone.
    fn feasible_extremes(n: usize, add: impl Fn(&mut Encoding)) -> Vec<(usize, usize)> {
        let mut e = Encoding::new(n).unwrap();
        e.encode_degrees();
        add(&mut e);
        let d = e.degrees().unwrap().clone();
        let mut out = Vec::new();
        for lo in 0..n {
            for hi in 0..n {
                let mut fixed = Vec::new();
                for t in 1..n {
                    let a = d.min.ge(t).lit().unwrap();
                    fixed.push(if lo >= t { a } else { -a });
                    let b = d.max.ge(t).lit().unwrap();
                    fixed.push(if hi >= t { b } else { -b });
                }
                let mut f = e.cnf().clone();
                for l in &fixed {
                    f.add_clause(&[*l]);
                }
                // drop the degree registers' coupling to A by checking only the
                // bound clauses: the encoding with free A must still be consistent
                if dpll::solve(&bound_clauses_only(&e, &f), &[]).is_some() {
                    out.push((lo, hi));
                }
            }
        }
        out
    }

    /// The clauses that mention only δ/Δ thresholds.
    fn bound_clauses_only(e: &Encoding, f: &CnfFormula) -> CnfFormula {
        let d = e.degrees().unwrap();
        let vars: std::collections::HashSet<u32> = d
            .min
            .thresholds()
            .iter()
            .chain(d.max.thresholds())
            .filter_map(|b| b.lit().map(Lit::var))
            .collect();
        let mut out = CnfFormula::new();
        for _ in 0..f.var_count() {
            out.new_lit();
        }
        for c in f.clauses() {
            if c.iter().all(|l| vars.contains(&l.var())) {
                out.add_clause(c);
            }
        }
        out
    }

    #[test]
    fn garnick_bounds_arithmetic() {
        // n=10, m=15, ex(9)=12: δ >= 3, Δ >= 3, δ² <= 9 → δ = 3, and Δ·3 <= 9 → Δ = 3
        let ext = feasible_extremes(10, |e| e.encode_garnick_bounds(15, 12));
        assert!(ext.iter().all(|&(lo, hi)| lo == 3 && hi >= 3));
        assert!(ext.contains(&(3, 3)));
        assert!(!ext.iter().any(|&(_, hi)| hi > 3));
        // n=5, m=5, ex(4)=3: δ >= 2, Δ >= 2
        let ext = feasible_extremes(5, |e| e.encode_garnick_bounds(5, 3));
        assert!(ext.iter().all(|&(lo, hi)| lo >= 2 && hi >= 2));
        assert!(ext.contains(&(2, 2)));
        // m <= ex_prev: no lower bound on δ
        let ext = feasible_extremes(5, |e| e.encode_garnick_bounds(3, 3));
        assert!(ext.iter().any(|&(lo, _)| lo == 0));
    }

    #[test]
    fn clapham_bounds_arithmetic() {
        assert_eq!(clapham_min_degree_cap(10), 3);
        assert_eq!(clapham_min_degree_cap(5), 2);
        assert_eq!(clapham_min_degree_cap(1), 1);
        let ext = feasible_extremes(10, |e| e.encode_clapham_bounds());
        assert!(ext.iter().all(|&(lo, hi)| lo <= 3 && lo <= hi && hi * lo.saturating_sub(1) <= 9));
        assert!(ext.contains(&(3, 4)) && !ext.contains(&(3, 5)) && ext.contains(&(2, 9)));
    }

    #[test]
    fn clapham_rejects_four_regular_on_ten_vertices() {
        // circulant C10(1,2): 4-regular
        let edges: Vec<(usize, usize)> = (1..=10)
            .flat_map(|i| [1, 2].map(|s| (i, (i + s - 1) % 10 + 1)))
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        let g = Graph::from_edges(10, &edges).unwrap();
        assert_eq!((g.min_degree(), g.max_degree()), (4, 4));
        let mut e = Encoding::new(10).unwrap();
        e.encode_clapham_bounds();
        assert!(solve_fixed(&e, &g).is_none());
        let mut e = Encoding::new(10).unwrap();
        e.encode_degrees();
        assert!(solve_fixed(&e, &g).is_some());
    }

    #[test]
    fn spec_validation() {
        let base = ProblemSpec::new(6, 6, Forbid::C3_C4);
        assert!(base.clone().with_bounds(Bounds::GARNICK, None).validate().is_err());
        assert!(base.clone().with_bounds(Bounds::GARNICK, Some(5)).validate().is_ok());
        assert!(ProblemSpec::new(6, 6, Forbid::C4)
            .with_bounds(Bounds::GARNICK, Some(5))
            .validate()
            .is_err());
        assert!(ProblemSpec::new(6, 6, Forbid::C3)
            .with_bounds(Bounds::CLAPHAM, None)
            .validate()
            .is_err());
        assert!(ProblemSpec::new(17, 1, Forbid::C4).validate().is_err());
    }

    fn sbp_encoding(n: usize, mode: SbpMode) -> Encoding {
        let mut e = Encoding::new(n).unwrap();
        e.encode_degrees();
        e.encode_sbp(mode);
        e
    }

    #[test]
    fn sbp_fixed_examples() {
        let c4 = fixtures::bfs_numbered_c4();
        let d = solve_fixed(&sbp_encoding(4, SbpMode::BfsStar), &c4).unwrap();
        assert_eq!(d.weights.unwrap(), vec![4, 2, 1, 1]);
        assert_eq!(d.parents.unwrap().as_slice(), &[1, 1, 2]);
        let [first, second, third] = fixtures::path_labelings();
        let bfs = sbp_encoding(4, SbpMode::Bfs);
        assert!([first, second, third].iter().all(|g| solve_fixed(&bfs, g).is_some()));
        let star = sbp_encoding(4, SbpMode::BfsStar);
        let hits: Vec<bool> = [first, second, third]
            .iter()
            .map(|g| solve_fixed(&star, g).is_some())
            .collect();
        assert_eq!(hits, vec![false, true, false]);
        let g2 = fixtures::layer_orderings()[1];
        assert!(solve_fixed(&sbp_encoding(9, SbpMode::BfsStar), &g2).is_none());
        let g1 = fixtures::layer_orderings()[0];
        let d = solve_fixed(&sbp_encoding(9, SbpMode::BfsStar), &g1).unwrap();
        assert_eq!(d.weights.unwrap(), compute_weights_of(&g1));
    }

    fn compute_weights_of(g: &Graph) -> Vec<usize> {
        sbp::compute_parents(g).unwrap().weights()
    }

    #[test]
    fn sbp_matches_semantics_on_all_graphs_up_to_five() {
        for n in 1..=5 {
            for mode in [SbpMode::Bfs, SbpMode::BfsPlus, SbpMode::BfsStar] {
                let enc = sbp_encoding(n, mode);
                let pred = mode.predicate().unwrap();
                let mut solver = dpll::Dpll::new(enc.cnf());
                for mask in 0..1u128 << pair_count(n) {
                    let g = Graph::from_edge_mask(n, mask).unwrap();
                    let model = solver.solve(&enc.adjacency_assumptions(&g).unwrap());
                    assert_eq!(model.is_some(), pred.holds(&g), "n={n} {mode} {g:?}");
                    if let Some(model) = model {
                        let d = enc.decode_model(&model).unwrap();
                        let cert = sbp::BfsCertificate::of(&g).unwrap();
                        assert_eq!(d.graph, g);
                        assert_eq!(d.parents.unwrap(), cert.parents);
                        assert_eq!(d.degrees.unwrap(), cert.degrees);
                        assert_eq!(d.max_degree.unwrap(), cert.max_degree);
                        if let Some(w) = d.weights {
                            assert_eq!(w, cert.weights);
                            assert_eq!(w[0], n);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn decode_errors() {
        let e = sbp_encoding(4, SbpMode::Bfs);
        assert!(matches!(e.decode_model(&[false; 3]), Err(Error::Decode(_))));
        let mut model = vec![false; e.cnf().var_count() as usize + 1];
        // p[4] >= 3 without p[4] >= 2
        let ge3 = e.lookup("p[4]>=3").unwrap();
        model[ge3.var() as usize] = ge3.is_positive();
        assert!(matches!(e.decode_model(&model), Err(Error::Decode(_))));
    }

    #[test]
    fn round_trip_through_fixed_adjacency() {
        let g = fixtures::c3c4_free_10();
        let mut e = Encoding::encode(
            &ProblemSpec::new(10, 15, Forbid::C3_C4)
                .with_sbp(SbpMode::BfsStar)
                .with_bounds(Bounds::GARNICK, Some(12)),
        )
        .unwrap();
        e.fix_adjacency(&g).unwrap();
        let model = dpll::solve(e.cnf(), &[]).unwrap();
        let d = e.decode_model(&model).unwrap();
        assert_eq!(d.graph, g);
        assert_eq!(d.weights.unwrap()[0], 10);
        assert_eq!((d.min_degree, d.max_degree), (Some(3), Some(3)));
    }

    #[test]
    fn identical_specs_give_identical_dimacs() {
        let spec = ProblemSpec::new(7, 8, Forbid::C3_C4)
            .with_sbp(SbpMode::BfsStar)
            .with_bounds(Bounds::GARNICK, Some(6));
        let a = Encoding::encode(&spec).unwrap().cnf().to_dimacs_string();
        let b = Encoding::encode(&spec).unwrap().cnf().to_dimacs_string();
        assert_eq!(a, b);
    }

    #[test]
    fn isqrt_exact() {
        for x in 0..2000 {
            let r = isqrt(x);
            assert!(r * r <= x && (r + 1) * (r + 1) > x);
        }
    }

    #[test]
    fn names_parse() {
        assert_eq!("3,4".parse::<Forbid>().unwrap(), Forbid::C3_C4);
        assert_eq!("4".parse::<Forbid>().unwrap(), Forbid::C4);
        assert!("5".parse::<Forbid>().is_err());
        assert_eq!(Forbid::C3_C4.to_string(), "3,4");
        for m in SbpMode::ALL {
            assert_eq!(m.name().parse::<SbpMode>().unwrap(), m);
        }
        assert_eq!("aux".parse::<CycleEncoding>().unwrap(), CycleEncoding::Auxiliary);
    }
}
