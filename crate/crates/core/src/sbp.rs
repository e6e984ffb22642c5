//! Semantic evaluation of the BFS-enumeration symmetry-breaking predicates on
//! explicit labeled graphs, and a constructive relabeling into the strongest
//! of them.
//!
//! A labeling is BFS-enumerated when the parent array (`p_j` is the smallest
//! label adjacent to `j` among `1..j`) exists for every `j >= 2` and is
//! non-decreasing. On top of that:
//!
//! * `bfs+` asks that vertex 1 has maximum degree;
//! * `bfs*` asks, in addition, that consecutive siblings in the BFS tree carry
//!   non-ascending subtree weights.
//!
//! The root is parentless: parent arrays are indexed by `j = 2..=n`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{Graph, Permutation};

/// `p_j` for `j = 2..=n`, with 1-based labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParentArray {
    parents: Vec<usize>,
}

impl ParentArray {
    /// Wraps explicit parents `[p_2, …, p_n]`; each `p_j` must lie in `1..j`.
    pub fn new(parents: Vec<usize>) -> Result<Self> {
        for (k, &p) in parents.iter().enumerate() {
            let j = k + 2;
            if p == 0 || p >= j {
                return Err(Error::input(format!("parent p_{j} = {p} outside 1..{}", j - 1)));
            }
        }
        Ok(ParentArray { parents })
    }

    /// Number of vertices the array describes.
    pub fn n(&self) -> usize {
        self.parents.len() + 1
    }

    /// Parent of the 1-based vertex `j`; `None` for the root.
    pub fn parent(&self, j: usize) -> Option<usize> {
        (j >= 2).then(|| self.parents[j - 2])
    }

    /// `[p_2, …, p_n]`.
    pub fn as_slice(&self) -> &[usize] {
        &self.parents
    }

    pub fn is_non_decreasing(&self) -> bool {
        self.parents.windows(2).all(|w| w[0] <= w[1])
    }

    /// Subtree weights `w_1..w_n`: one backward pass accumulating each vertex
    /// into its parent.
    pub fn weights(&self) -> Vec<usize> {
        let n = self.n();
        let mut w = vec![1usize; n];
        for j in (2..=n).rev() {
            let p = self.parents[j - 2];
            w[p - 1] += w[j - 1];
        }
        w
    }
}

/// Smallest earlier neighbor of every `j >= 2`, or `None` when some `j` has no
/// neighbor with a smaller label.
pub fn compute_parents(g: &Graph) -> Option<ParentArray> {
    let mut parents = Vec::with_capacity(g.n().saturating_sub(1));
    for j in 1..g.n() {
        let earlier = g.neighbors0(j) & ((1u16 << j) - 1);
        if earlier == 0 {
            return None;
        }
        parents.push(earlier.trailing_zeros() as usize + 1);
    }
    Some(ParentArray { parents })
}

/// Everything the predicates inspect, recomputed from the graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BfsCertificate {
    pub parents: ParentArray,
    pub degrees: Vec<usize>,
    pub max_degree: usize,
    pub weights: Vec<usize>,
}

impl BfsCertificate {
    /// `None` when the labeling admits no parent array.
    pub fn of(g: &Graph) -> Option<Self> {
        let parents = compute_parents(g)?;
        let weights = parents.weights();
        Some(BfsCertificate {
            parents,
            degrees: g.degrees(),
            max_degree: g.max_degree(),
            weights,
        })
    }

    /// Line-oriented text form: `p: …`, `deg: …`, `w: …`.
    pub fn to_text(&self) -> String {
        let join = |xs: &[usize]| {
            xs.iter()
                .map(usize::to_string)
                .collect::<Vec<_>>()
                .join(" ")
        };
        format!(
            "p: {}\ndeg: {}\nw: {}\n",
            join(self.parents.as_slice()),
            join(&self.degrees),
            join(&self.weights)
        )
    }
}

pub fn check_bfs(g: &Graph) -> bool {
    compute_parents(g).is_some_and(|p| p.is_non_decreasing())
}

pub fn check_bfs_plus(g: &Graph) -> bool {
    check_bfs(g) && g.degree0(0) == g.max_degree()
}

pub fn check_bfs_star(g: &Graph) -> bool {
    check_bfs_plus(g) && siblings_ordered(g, |left, right| left >= right)
}

/// Siblings ordered by non-descending weight instead. This is not a
/// symmetry-breaking predicate: no labeling of `C4` satisfies it.
pub fn check_bfs_ascending_variant(g: &Graph) -> bool {
    check_bfs_plus(g) && siblings_ordered(g, |left, right| left <= right)
}

fn siblings_ordered(g: &Graph, ordered: impl Fn(usize, usize) -> bool) -> bool {
    let Some(parents) = compute_parents(g) else {
        return false;
    };
    let w = parents.weights();
    let p = parents.as_slice();
    // p[k] is the parent of vertex k + 2, whose weight is w[k + 1]
    (0..p.len().saturating_sub(1)).all(|k| p[k] != p[k + 1] || ordered(w[k + 1], w[k + 2]))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Predicate {
    Bfs,
    BfsPlus,
    BfsStar,
    BfsAscending,
}

impl Predicate {
    pub const ALL: [Predicate; 4] = [
        Predicate::Bfs,
        Predicate::BfsPlus,
        Predicate::BfsStar,
        Predicate::BfsAscending,
    ];

    /// The three predicates that are symmetry breaking among connected graphs.
    pub const SOUND: [Predicate; 3] = [Predicate::Bfs, Predicate::BfsPlus, Predicate::BfsStar];

    pub fn holds(self, g: &Graph) -> bool {
        match self {
            Predicate::Bfs => check_bfs(g),
            Predicate::BfsPlus => check_bfs_plus(g),
            Predicate::BfsStar => check_bfs_star(g),
            Predicate::BfsAscending => check_bfs_ascending_variant(g),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Predicate::Bfs => "bfs",
            Predicate::BfsPlus => "bfs+",
            Predicate::BfsStar => "bfs*",
            Predicate::BfsAscending => "bfs-asc",
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Predicate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bfs" => Ok(Predicate::Bfs),
            "bfs+" | "bfs-plus" => Ok(Predicate::BfsPlus),
            "bfs*" | "bfs-star" => Ok(Predicate::BfsStar),
            "bfs-asc" | "bfs-ascending" => Ok(Predicate::BfsAscending),
            _ => Err(Error::input(format!(
                "unknown predicate {s:?} (expected bfs, bfs+, bfs*, bfs-asc)"
            ))),
        }
    }
}

/// BFS visit order from `root`, expanding each dequeued vertex's unvisited
/// neighbors by ascending `rank`. Returns `order` with `order[k]` the 0-based
/// vertex visited `k`-th; unreachable vertices are absent.
pub(crate) fn bfs_order(g: &Graph, root: usize, rank: &[usize]) -> Vec<usize> {
    let n = g.n();
    let mut order = Vec::with_capacity(n);
    let mut seen = 1u32 << root;
    order.push(root);
    let mut head = 0;
    while head < order.len() {
        let u = order[head];
        head += 1;
        let mut fresh: Vec<usize> = (0..n)
            .filter(|&v| g.neighbors0(u) >> v & 1 == 1 && seen >> v & 1 == 0)
            .collect();
        fresh.sort_by_key(|&v| rank[v]);
        for v in fresh {
            seen |= 1 << v;
            order.push(v);
        }
    }
    order
}

/// Relabeling that sends the `k`-th visited vertex to label `k`.
pub(crate) fn order_to_permutation(order: &[usize]) -> Permutation {
    let mut image = vec![0u8; order.len()];
    for (new, &old) in order.iter().enumerate() {
        image[old] = new as u8;
    }
    Permutation::from_image0(image)
}

#[derive(Clone, Debug)]
pub struct Renumbering {
    pub graph: Graph,
    /// Relabeling with `input.apply_permutation(&permutation) == graph`.
    pub permutation: Permutation,
    /// Number of sibling swaps performed after the initial traversal.
    pub swaps: usize,
}

/// Relabels a connected graph so that [`check_bfs_star`] holds.
///
/// Starts from a BFS traversal rooted at the smallest-labeled vertex of
/// maximum degree (ties within a layer broken by smallest original label).
/// Then, visiting parents in label order, it repairs every ascent between
/// consecutive children: the two sibling labels are exchanged and every later
/// vertex is renumbered by a fresh BFS that expands neighbors in current label
/// order. Each exchange strictly increases the parent's child-weight sequence
/// lexicographically and leaves all other subtree weights untouched, so the
/// loop terminates; `n³` exchanges is a safety cap whose violation is a bug.
pub fn bfs_star_renumber(g: &Graph) -> Result<Renumbering> {
    if !g.is_connected() {
        return Err(Error::input("bfs* renumbering needs a connected graph"));
    }
    let n = g.n();
    let max = g.max_degree();
    let root = (0..n).find(|&v| g.degree0(v) == max).unwrap_or(0);
    let identity_rank: Vec<usize> = (0..n).collect();

    let mut total = order_to_permutation(&bfs_order(g, root, &identity_rank));
    let mut cur = g.permute0(total.image0());
    let cap = n * n * n;
    let mut swaps = 0;

    for parent in 1..=n {
        loop {
            let parents = compute_parents(&cur)
                .filter(ParentArray::is_non_decreasing)
                .ok_or_else(|| Error::Internal("renumbering lost BFS order".into()))?;
            let w = parents.weights();
            let children: Vec<usize> = (2..=n)
                .filter(|&j| parents.parent(j) == Some(parent))
                .collect();
            let Some(pair) = children
                .windows(2)
                .find(|c| w[c[0] - 1] < w[c[1] - 1])
                .map(|c| (c[0], c[1]))
            else {
                break;
            };
            swaps += 1;
            if swaps > cap {
                return Err(Error::Internal(format!(
                    "bfs* renumbering exceeded {cap} sibling swaps"
                )));
            }
            let before = w[pair.0 - 1];

            let mut transpose: Vec<u8> = (0..n as u8).collect();
            transpose.swap(pair.0 - 1, pair.1 - 1);
            let transpose = Permutation::from_image0(transpose);
            let swapped = cur.permute0(transpose.image0());
            let retraverse = order_to_permutation(&bfs_order(&swapped, 0, &identity_rank));
            cur = swapped.permute0(retraverse.image0());
            total = total.then(&transpose).then(&retraverse);

            let after = compute_parents(&cur)
                .filter(ParentArray::is_non_decreasing)
                .ok_or_else(|| Error::Internal("sibling swap broke BFS order".into()))?
                .weights();
            if after[pair.0 - 1] <= before {
                return Err(Error::Internal(format!(
                    "sibling swap at vertices {} and {} made no progress",
                    pair.0, pair.1
                )));
            }
        }
    }

    if !check_bfs_star(&cur) {
        return Err(Error::Internal("renumbering finished without satisfying bfs*".into()));
    }
    Ok(Renumbering {
        graph: cur,
        permutation: total,
        swaps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn parents_of_small_labelings() {
        let [_, second, _] = fixtures::path_labelings();
        assert_eq!(compute_parents(&second).unwrap().as_slice(), &[1, 1, 2]);
        let g = Graph::from_edges(3, &[(2, 3)]).unwrap();
        assert!(compute_parents(&g).is_none());
        let c4 = fixtures::bfs_numbered_c4();
        assert_eq!(compute_parents(&c4).unwrap().as_slice(), &[1, 1, 2]);
    }

    #[test]
    fn bfs_on_path_labelings() {
        assert!(fixtures::path_labelings().iter().all(check_bfs));
        // 3-2-1-4: p = (1, 2, 1)
        let g = Graph::from_edges(4, &[(1, 2), (2, 3), (1, 4)]).unwrap();
        assert_eq!(compute_parents(&g).unwrap().as_slice(), &[1, 2, 1]);
        assert!(!check_bfs(&g));
        // 2-1-4-3: vertex 3 has no earlier neighbor
        let g = Graph::from_edges(4, &[(1, 2), (1, 4), (3, 4)]).unwrap();
        assert!(compute_parents(&g).is_none());
        assert!(!check_bfs(&g));
        assert!(check_bfs(&Graph::empty(1).unwrap()));
    }

    #[test]
    fn bfs_plus_on_examples() {
        let [first, second, third] = fixtures::path_labelings();
        assert!(!check_bfs_plus(&first));
        assert!(check_bfs_plus(&second));
        assert!(check_bfs_plus(&third));
        assert!(check_bfs_plus(&fixtures::bfs_numbered_c4()));
        let star = Graph::from_edges(4, &[(1, 2), (1, 3), (1, 4)]).unwrap();
        assert!(check_bfs_plus(&star));
    }

    #[test]
    fn weights_on_examples() {
        let g1 = &fixtures::layer_orderings()[0];
        let w = compute_parents(g1).unwrap().weights();
        assert_eq!(&w[1..4], &[5, 2, 1]);
        assert_eq!(w[0], 9);
        let c4 = compute_parents(&fixtures::bfs_numbered_c4()).unwrap().weights();
        assert_eq!(c4, vec![4, 2, 1, 1]);
        assert_eq!(compute_parents(&Graph::empty(1).unwrap()).unwrap().weights(), vec![1]);
    }

    #[test]
    fn layer_orderings_have_the_documented_weights() {
        let expected = [[5, 2, 1], [3, 4, 1], [5, 1, 2], [1, 5, 2], [3, 1, 4], [1, 3, 4]];
        for (g, want) in fixtures::layer_orderings().iter().zip(expected) {
            let w = compute_parents(g).unwrap().weights();
            assert_eq!(&w[1..4], &want);
            assert!(check_bfs_plus(g));
        }
    }

    #[test]
    fn bfs_star_on_examples() {
        let hits: Vec<bool> = fixtures::layer_orderings().iter().map(check_bfs_star).collect();
        assert_eq!(hits, vec![true, false, false, false, false, false]);
        let [first, second, third] = fixtures::path_labelings();
        assert!(!check_bfs_star(&first) && check_bfs_star(&second) && !check_bfs_star(&third));
        assert!(check_bfs_star(&fixtures::bfs_numbered_c4()));
        assert!(check_bfs_star(&fixtures::thirteen_vertex_enumeration()));
    }

    #[test]
    fn ascending_variant() {
        assert!(!check_bfs_ascending_variant(&fixtures::bfs_numbered_c4()));
        assert!(check_bfs_ascending_variant(&Graph::from_edges(2, &[(1, 2)]).unwrap()));
        assert!(check_bfs_ascending_variant(&fixtures::layer_orderings()[5]));
    }

    #[test]
    fn certificate_text() {
        let cert = BfsCertificate::of(&fixtures::bfs_numbered_c4()).unwrap();
        assert_eq!(cert.max_degree, 2);
        assert_eq!(cert.to_text(), "p: 1 1 2\ndeg: 2 2 2 2\nw: 4 2 1 1\n");
    }

    #[test]
    fn predicate_names_round_trip() {
        for p in Predicate::ALL {
            assert_eq!(p.name().parse::<Predicate>().unwrap(), p);
        }
        assert!("dfs".parse::<Predicate>().is_err());
    }

    #[test]
    fn renumber_repairs_layer_ordering() {
        let g3 = &fixtures::layer_orderings()[2];
        let r = bfs_star_renumber(g3).unwrap();
        assert!(check_bfs_star(&r.graph));
        assert_eq!(&compute_parents(&r.graph).unwrap().weights()[1..4], &[5, 2, 1]);
        assert_eq!(r.graph, fixtures::layer_orderings()[0]);
        assert_eq!(g3.apply_permutation(&r.permutation).unwrap(), r.graph);
    }

    #[test]
    fn renumber_is_identity_on_satisfying_input() {
        for g in [
            fixtures::layer_orderings()[0],
            fixtures::path_labelings()[1],
            fixtures::bfs_numbered_c4(),
            fixtures::thirteen_vertex_enumeration(),
        ] {
            let r = bfs_star_renumber(&g).unwrap();
            assert_eq!(r.graph, g);
            assert_eq!(r.swaps, 0);
        }
    }

    #[test]
    fn renumber_rejects_disconnected_input() {
        let g = Graph::from_edges(4, &[(1, 2), (3, 4)]).unwrap();
        assert!(matches!(bfs_star_renumber(&g), Err(Error::Input(_))));
    }
}
