//! Exhaustive ground truth for small orders: every labeled graph, grouped into
//! isomorphism classes, checked against the predicates, the extremal numbers
//! and the encoder.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand::rngs::StdRng;
use rayon::prelude::*;

use crate::dpll::Dpll;
use crate::encoder::{Encoding, Forbid, SbpMode};
use crate::error::{Error, Result};
use crate::graph::{pair_count, Graph, Permutation};
use crate::sbp::{self, bfs_order, order_to_permutation, Predicate};
use crate::solver::{run_solver, SolveResult, SolverConfig};

/// Largest order for exhaustive scans (`2^21` labeled graphs).
pub const MAX_ORACLE_VERTICES: usize = 7;

fn check_oracle_order(n: usize) -> Result<()> {
    if n == 0 || n > MAX_ORACLE_VERTICES {
        return Err(Error::capacity(format!(
            "exhaustive enumeration is limited to 1..={MAX_ORACLE_VERTICES} vertices, got {n}"
        )));
    }
    Ok(())
}

/// Every labeled graph on `n` vertices, by increasing edge bit string (pair
/// `(1,2)` is bit 0).
pub fn enumerate_graphs(
    n: usize,
    connected_only: bool,
) -> Result<impl Iterator<Item = Graph>> {
    check_oracle_order(n)?;
    Ok((0..1u128 << pair_count(n))
        .map(move |mask| Graph::from_mask_unchecked(n, mask))
        .filter(move |g| !connected_only || g.is_connected()))
}

/// Shards of the edge-mask range for parallel scans.
fn mask_shards(n: usize) -> Vec<(u128, u128)> {
    let total = 1u128 << pair_count(n);
    let shard = (total / 256).max(1);
    (0..total)
        .step_by(shard as usize)
        .map(|lo| (lo, (lo + shard).min(total)))
        .collect()
}

/// Allowed-labeling counts of one connected isomorphism class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassCounts {
    pub canonical: Graph,
    /// Connected labeled graphs in the class.
    pub labelings: u64,
    /// Indexed like [`Predicate::ALL`].
    pub allowed: [u64; 4],
}

impl ClassCounts {
    pub fn allowed_by(&self, p: Predicate) -> u64 {
        self.allowed[predicate_slot(p)]
    }
}

fn predicate_slot(p: Predicate) -> usize {
    Predicate::ALL
        .iter()
        .position(|&q| q == p)
        .expect("every predicate is listed")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsoClassReport {
    pub n: usize,
    pub class_count: usize,
    /// Sorted by canonical bit string.
    pub classes: Vec<ClassCounts>,
    /// Classes with no allowed labeling, per predicate. Non-empty only for
    /// predicates that are not symmetry-breaking.
    pub violations: Vec<(Predicate, Graph)>,
}

impl IsoClassReport {
    pub fn class_of(&self, g: &Graph) -> Result<Option<&ClassCounts>> {
        let c = g.canonical_form()?;
        Ok(self.classes.iter().find(|k| k.canonical == c))
    }

    pub fn violations_of(&self, p: Predicate) -> Vec<&Graph> {
        self.violations
            .iter()
            .filter(|(q, _)| *q == p)
            .map(|(_, g)| g)
            .collect()
    }

    pub fn connected_labelings(&self) -> u64 {
        self.classes.iter().map(|c| c.labelings).sum()
    }

    /// One row per class: canonical edge list, labelings and allowed counts.
    pub fn to_markdown(&self) -> String {
        let mut s = format!("## n = {}: {} connected classes\n\n", self.n, self.class_count);
        s.push_str("| class | edges | labelings |");
        for p in Predicate::ALL {
            write!(s, " {} |", p.name()).unwrap();
        }
        s.push_str("\n|---|---|---|");
        s.push_str(&"---|".repeat(Predicate::ALL.len()));
        s.push('\n');
        for c in &self.classes {
            let edges: Vec<String> = c.canonical.edges().map(|(i, j)| format!("{i}-{j}")).collect();
            write!(s, "| {} | {} | {} |", edges.join(" "), c.canonical.edge_count(), c.labelings).unwrap();
            for a in c.allowed {
                write!(s, " {a} |").unwrap();
            }
            s.push('\n');
        }
        s.push('\n');
        for p in Predicate::ALL {
            writeln!(s, "{}: {} violation classes", p.name(), self.violations_of(p).len()).unwrap();
        }
        s
    }

    /// `n,edges,class,labelings,<predicate...>` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,edges,class,labelings");
        for p in Predicate::ALL {
            write!(s, ",{}", p.name()).unwrap();
        }
        s.push('\n');
        for c in &self.classes {
            let edges: Vec<String> = c.canonical.edges().map(|(i, j)| format!("{i}-{j}")).collect();
            write!(s, "{},{},{},{}", self.n, c.canonical.edge_count(), edges.join(" "), c.labelings).unwrap();
            for a in c.allowed {
                write!(s, ",{a}").unwrap();
            }
            s.push('\n');
        }
        s
    }
}

/// Groups the connected labeled graphs on `n` vertices by isomorphism class
/// and counts, per class, the labelings each predicate accepts.
///
/// Exhaustive: `n <= 6` takes seconds, `n = 7` is long-running.
pub fn verify_sbp_soundness(n: usize) -> Result<IsoClassReport> {
    check_oracle_order(n)?;
    let merged: HashMap<u128, (u64, [u64; 4])> = mask_shards(n)
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut local: HashMap<u128, (u64, [u64; 4])> = HashMap::new();
            for mask in lo..hi {
                let g = Graph::from_mask_unchecked(n, mask);
                if !g.is_connected() {
                    continue;
                }
                let key = g.canonical_key().expect("n is within the canonical cap");
                let entry = local.entry(key).or_default();
                entry.0 += 1;
                for (slot, p) in Predicate::ALL.iter().enumerate() {
                    if p.holds(&g) {
                        entry.1[slot] += 1;
                    }
                }
            }
            local
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, (count, allowed)) in b {
                let e = a.entry(k).or_default();
                e.0 += count;
                for (t, x) in e.1.iter_mut().zip(allowed) {
                    *t += x;
                }
            }
            a
        });

    let mut keys: Vec<u128> = merged.keys().copied().collect();
    keys.sort_unstable();
    let mut classes = Vec::with_capacity(keys.len());
    let mut violations = Vec::new();
    for key in keys {
        let (labelings, allowed) = merged[&key];
        let canonical = Graph::from_edge_mask(n, key_bits_to_mask(n, key))?;
        for p in Predicate::ALL {
            if allowed[predicate_slot(p)] == 0 {
                violations.push((p, canonical));
            }
        }
        classes.push(ClassCounts {
            canonical,
            labelings,
            allowed,
        });
    }
    Ok(IsoClassReport {
        n,
        class_count: classes.len(),
        classes,
        violations,
    })
}

fn key_bits_to_mask(n: usize, key: u128) -> u128 {
    let pc = pair_count(n);
    (0..pc)
        .filter(|&k| key >> (pc - 1 - k) & 1 == 1)
        .fold(0, |m, k| m | 1 << k)
}

/// BFS enumeration checked straight from the definition: the labels must be
/// the discovery order of some breadth-first traversal started at vertex 1,
/// trying every order in which a dequeued vertex may enqueue its undiscovered
/// neighbors.
pub fn is_bfs_enumerated_by_traversal(g: &Graph) -> bool {
    fn explore(g: &Graph, queue: &mut Vec<usize>, head: usize, discovered: &mut Vec<bool>, next: usize) -> bool {
        let n = g.n();
        if head == queue.len() {
            return next == n + 1;
        }
        let u = queue[head];
        let mut order: Vec<usize> = (1..=n).filter(|&v| g.has_edge(u, v) && !discovered[v]).collect();
        // every permutation of the fresh neighbors, in lexicographic order
        order.sort_unstable();
        loop {
            // the k-th vertex discovered gets label k: accept only orders that
            // reproduce the existing labels
            if order.iter().enumerate().all(|(k, &v)| v == next + k) {
                let base = queue.len();
                for &v in &order {
                    discovered[v] = true;
                    queue.push(v);
                }
                if explore(g, queue, head + 1, discovered, next + order.len()) {
                    return true;
                }
                queue.truncate(base);
                for &v in &order {
                    discovered[v] = false;
                }
            }
            if !next_permutation(&mut order) {
                return false;
            }
        }
    }
    let n = g.n();
    let mut discovered = vec![false; n + 1];
    discovered[1] = true;
    explore(g, &mut vec![1], 0, &mut discovered, 2)
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// `ex(n; forbid)` by scanning every labeled graph, with the first extremal
/// graph in enumeration order as witness.
pub fn brute_force_ex(n: usize, forbid: Forbid) -> Result<(usize, Graph)> {
    check_oracle_order(n)?;
    let best = mask_shards(n)
        .into_par_iter()
        .filter_map(|(lo, hi)| {
            (lo..hi)
                .map(|mask| Graph::from_mask_unchecked(n, mask))
                .filter(|g| forbid.admits(g))
                .map(|g| (g.edge_count(), std::cmp::Reverse(g.edge_mask())))
                .max()
        })
        .max()
        .expect("the empty graph always qualifies");
    Ok((best.0, Graph::from_edge_mask(n, best.1 .0)?))
}

/// Which graphs a cross-check visits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sampler {
    /// All `2^C(n,2)` labeled graphs (`n <= 6`).
    Exhaustive,
    /// Random connected graphs: a third relabeled at random, a third
    /// renumbered by BFS, a third renumbered to satisfy `bfs*`.
    RandomConnected { count: usize, seed: u64 },
}

/// How fixed-adjacency formulas are decided.
#[derive(Clone, Debug, PartialEq)]
pub enum CheckBackend {
    /// The embedded procedure with the adjacency as assumptions.
    Embedded,
    /// One solver call per graph, the adjacency as unit clauses.
    Solver(SolverConfig),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrossCheckReport {
    pub n: usize,
    pub mode: SbpMode,
    pub checked: usize,
    /// Graphs the predicate accepts.
    pub accepted: usize,
    /// Graphs where the formula and the semantic checker disagree.
    pub disagreements: Vec<Graph>,
}

/// The formula the cross-check fixes adjacency into: degree registers plus the
/// mode's predicate, nothing else.
pub fn sbp_only_encoding(n: usize, mode: SbpMode) -> Result<Encoding> {
    let mut e = Encoding::new(n)?;
    e.encode_degrees();
    e.encode_sbp(mode);
    Ok(e)
}

/// Decides, for every sampled graph, the mode's formula with the adjacency
/// fixed, and compares with the semantic predicate. Satisfying models must also
/// decode to the graph's own parent array, degrees and weights.
pub fn cross_validate_encoding(
    n: usize,
    mode: SbpMode,
    sampler: Sampler,
    backend: &CheckBackend,
) -> Result<CrossCheckReport> {
    let pred = mode
        .predicate()
        .ok_or_else(|| Error::input("cross-checking needs an sbp mode other than none"))?;
    let graphs: Vec<Graph> = match sampler {
        Sampler::Exhaustive => {
            if n > 6 {
                return Err(Error::capacity(format!(
                    "exhaustive cross-checks are limited to n <= 6, got {n}"
                )));
            }
            enumerate_graphs(n, false)?.collect()
        }
        Sampler::RandomConnected { count, seed } => sample_connected(n, count, seed)?,
    };
    let enc = sbp_only_encoding(n, mode)?;

    let verdicts: Vec<Result<Option<Graph>>> = match backend {
        CheckBackend::Embedded => graphs
            .par_chunks(64)
            .flat_map_iter(|chunk| {
                let mut solver = Dpll::new(enc.cnf());
                chunk
                    .iter()
                    .map(|g| {
                        let model = solver.solve(&enc.adjacency_assumptions(g)?);
                        judge(&enc, pred, g, model.as_deref())
                    })
                    .collect::<Vec<_>>()
            })
            .collect(),
        CheckBackend::Solver(cfg) => graphs
            .par_iter()
            .map(|g| {
                let mut fixed = enc.clone();
                fixed.fix_adjacency(g)?;
                let out = run_solver(fixed.cnf(), cfg)?;
                match &out.result {
                    SolveResult::Sat(m) => judge(&enc, pred, g, Some(m)),
                    SolveResult::Unsat => judge(&enc, pred, g, None),
                    SolveResult::Unknown => Err(Error::Config(format!(
                        "solver timed out on a fixed-adjacency instance: {g:?}"
                    ))),
                }
            })
            .collect(),
    };
    let mut disagreements = Vec::new();
    for v in verdicts {
        if let Some(g) = v? {
            disagreements.push(g);
        }
    }
    Ok(CrossCheckReport {
        n,
        mode,
        checked: graphs.len(),
        accepted: graphs.iter().filter(|g| pred.holds(g)).count(),
        disagreements,
    })
}

/// `Some(g)` when formula and predicate disagree on `g`.
fn judge(enc: &Encoding, pred: Predicate, g: &Graph, model: Option<&[bool]>) -> Result<Option<Graph>> {
    let expected = pred.holds(g);
    let Some(model) = model else {
        return Ok((expected).then_some(*g));
    };
    if !expected {
        return Ok(Some(*g));
    }
    let d = enc.decode_model(model)?;
    let cert = sbp::BfsCertificate::of(g)
        .ok_or_else(|| Error::Internal("accepted graph without a certificate".into()))?;
    let consistent = d.graph == *g
        && d.parents.as_ref() == Some(&cert.parents)
        && d.degrees.as_ref() == Some(&cert.degrees)
        && d.weights.as_ref().is_none_or(|w| *w == cert.weights);
    Ok((!consistent).then_some(*g))
}

/// A random connected graph: a random recursive tree plus each remaining pair
/// with probability `extra`, under a random labeling.
pub fn random_connected_graph<R: Rng>(n: usize, extra: f64, rng: &mut R) -> Result<Graph> {
    let mut edges = Vec::new();
    for v in 2..=n {
        edges.push((rng.gen_range(1..v), v));
    }
    for i in 1..=n {
        for j in i + 1..=n {
            if !edges.contains(&(i, j)) && rng.gen_bool(extra) {
                edges.push((i, j));
            }
        }
    }
    let g = Graph::from_edges(n, &edges)?;
    g.apply_permutation(&random_permutation(n, rng))
}

pub fn random_permutation<R: Rng>(n: usize, rng: &mut R) -> Permutation {
    let mut image: Vec<u8> = (0..n as u8).collect();
    image.shuffle(rng);
    Permutation::from_image0(image)
}

/// Relabels by a BFS from a random root, expanding neighbors in a random order.
pub fn random_bfs_renumbering<R: Rng>(g: &Graph, rng: &mut R) -> Result<Graph> {
    if !g.is_connected() {
        return Err(Error::input("BFS renumbering needs a connected graph"));
    }
    let n = g.n();
    let mut rank: Vec<usize> = (0..n).collect();
    rank.shuffle(rng);
    let root = rng.gen_range(0..n);
    g.apply_permutation(&order_to_permutation(&bfs_order(g, root, &rank)))
}

fn sample_connected(n: usize, count: usize, seed: u64) -> Result<Vec<Graph>> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let extra = rng.gen_range(0.0..0.5);
        let g = random_connected_graph(n, extra, &mut rng)?;
        out.push(match k % 3 {
            0 => g,
            1 => random_bfs_renumbering(&g, &mut rng)?,
            _ => sbp::bfs_star_renumber(&g)?.graph,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_graphs(3, false).unwrap().count(), 8);
        assert_eq!(enumerate_graphs(3, true).unwrap().count(), 4);
        assert_eq!(enumerate_graphs(4, false).unwrap().count(), 64);
        assert_eq!(enumerate_graphs(1, true).unwrap().count(), 1);
        assert!(enumerate_graphs(8, false).is_err());
    }

    #[test]
    fn connected_class_counts() {
        // connected unlabeled graphs on 1..=5 vertices
        for (n, classes) in [(1, 1), (2, 1), (3, 2), (4, 6), (5, 21)] {
            assert_eq!(verify_sbp_soundness(n).unwrap().class_count, classes);
        }
    }

    #[test]
    fn four_vertex_report() {
        let r = verify_sbp_soundness(4).unwrap();
        let p4 = r.class_of(&fixtures::path_labelings()[0]).unwrap().unwrap();
        assert_eq!(p4.labelings, 12);
        assert_eq!(
            [Predicate::Bfs, Predicate::BfsPlus, Predicate::BfsStar].map(|p| p4.allowed_by(p)),
            [3, 2, 1]
        );
        let c4 = r.class_of(&fixtures::bfs_numbered_c4()).unwrap().unwrap();
        assert_eq!(c4.allowed_by(Predicate::Bfs), 1);
        assert_eq!(c4.allowed_by(Predicate::BfsAscending), 0);
        assert!(r.violations_of(Predicate::BfsAscending).contains(&&c4.canonical));
        for p in Predicate::SOUND {
            assert!(r.violations_of(p).is_empty());
        }
        assert!(r.to_markdown().contains("bfs-asc: 1 violation classes"));
        assert_eq!(r.to_csv().lines().count(), 7);
    }

    #[test]
    fn traversal_oracle_small_cases() {
        for g in fixtures::path_labelings() {
            assert!(is_bfs_enumerated_by_traversal(&g));
        }
        assert!(is_bfs_enumerated_by_traversal(&fixtures::bfs_numbered_c4()));
        let not = Graph::from_edges(4, &[(1, 2), (2, 3), (1, 4)]).unwrap();
        assert!(!is_bfs_enumerated_by_traversal(&not));
        assert!(is_bfs_enumerated_by_traversal(&Graph::empty(1).unwrap()));
        assert!(!is_bfs_enumerated_by_traversal(&Graph::empty(2).unwrap()));
    }

    #[test]
    fn traversal_oracle_matches_parent_characterization_up_to_five() {
        for n in 1..=5 {
            for g in enumerate_graphs(n, false).unwrap() {
                assert_eq!(is_bfs_enumerated_by_traversal(&g), sbp::check_bfs(&g), "{g:?}");
            }
        }
    }

    #[test]
    fn brute_force_values() {
        assert_eq!(brute_force_ex(3, Forbid::C3).unwrap().0, 2);
        assert_eq!(brute_force_ex(4, Forbid::C4).unwrap().0, 4);
        let (ex, w) = brute_force_ex(5, Forbid::C3_C4).unwrap();
        assert_eq!(ex, 5);
        let c5 = Graph::from_edges(5, &[(1, 2), (2, 3), (3, 4), (4, 5), (1, 5)]).unwrap();
        assert_eq!(w.canonical_form().unwrap(), c5.canonical_form().unwrap());
        assert!(brute_force_ex(8, Forbid::C4).is_err());
    }

    #[test]
    fn embedded_cross_check_up_to_four() {
        for n in 1..=4 {
            for mode in [SbpMode::Bfs, SbpMode::BfsPlus, SbpMode::BfsStar] {
                let r = cross_validate_encoding(n, mode, Sampler::Exhaustive, &CheckBackend::Embedded).unwrap();
                assert!(r.disagreements.is_empty());
                assert_eq!(r.checked, 1 << pair_count(n));
            }
        }
        assert!(cross_validate_encoding(3, SbpMode::None, Sampler::Exhaustive, &CheckBackend::Embedded).is_err());
    }

    #[test]
    fn samples_mix_accepted_and_rejected() {
        let gs = sample_connected(7, 60, 1).unwrap();
        assert!(gs.iter().all(Graph::is_connected));
        let star = gs.iter().filter(|g| sbp::check_bfs_star(g)).count();
        let bfs = gs.iter().filter(|g| sbp::check_bfs(g)).count();
        assert!(star >= 20 && bfs > star && bfs < 60);
    }

    #[test]
    fn next_permutation_visits_all() {
        let mut v = vec![1, 2, 3, 4];
        let mut count = 1;
        while next_permutation(&mut v) {
            count += 1;
        }
        assert_eq!(count, 24);
    }
}
