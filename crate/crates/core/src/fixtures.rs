//! Small hand-checked graphs used across the test suites and by the CLI's
//! self-checks.

use crate::graph::Graph;
use crate::sbp::{bfs_order, order_to_permutation};

fn graph(n: usize, edges: &[(usize, usize)]) -> Graph {
    Graph::from_edges(n, edges).expect("fixture edges are valid")
}

/// Three BFS-enumerated labelings of the path on four vertices:
/// the path `1-2-3-4` rooted at an end, and the two labelings rooted at an
/// inner vertex (`1→2, 1→3, 2→4` and `1→2, 1→3, 3→4`).
pub fn path_labelings() -> [Graph; 3] {
    [
        graph(4, &[(1, 2), (2, 3), (3, 4)]),
        graph(4, &[(1, 2), (1, 3), (2, 4)]),
        graph(4, &[(1, 2), (1, 3), (3, 4)]),
    ]
}

/// The only BFS-enumerated labeling of the 4-cycle.
pub fn bfs_numbered_c4() -> Graph {
    graph(4, &[(1, 2), (1, 3), (2, 4), (3, 4)])
}

/// A 9-vertex graph whose root has three children `a, b, c` with subtree
/// weights 5, 2, 1, relabeled for each of the six orders of the first layer:
/// `(a,b,c), (b,a,c), (a,c,b), (c,a,b), (b,c,a), (c,b,a)`. The layers below are
/// renumbered by BFS; vertex `l2` hangs below whichever of `a`, `b` comes
/// first, which is why the weight sequences are not plain permutations of
/// `(5, 2, 1)`.
pub fn layer_orderings() -> [Graph; 6] {
    // r=1, a=2, b=3, c=4, l1=5, l2=6, l3=7, l4=8, l5=9
    let base = graph(
        9,
        &[(1, 2), (1, 3), (1, 4), (2, 5), (2, 6), (3, 7), (5, 8), (5, 9), (3, 6)],
    );
    let orders = [[1, 2, 3], [2, 1, 3], [1, 3, 2], [3, 1, 2], [2, 3, 1], [3, 2, 1]];
    orders.map(|order| {
        let mut rank: Vec<usize> = (0..9).map(|v| v + 3).collect();
        for (pos, &v) in order.iter().enumerate() {
            rank[v] = pos;
        }
        let perm = order_to_permutation(&bfs_order(&base, 0, &rank));
        base.apply_permutation(&perm).expect("same order")
    })
}

/// A 13-vertex graph already labeled so that every sibling sequence of its
/// BFS tree is non-ascending by subtree weight; the root has five children.
pub fn thirteen_vertex_enumeration() -> Graph {
    graph(
        13,
        &[
            (1, 2), (1, 3), (1, 4), (1, 5), (1, 6),
            (2, 7), (3, 8), (4, 9), (7, 10), (10, 11), (11, 12), (11, 13),
            (4, 6), (5, 6), (5, 9), (2, 4), (2, 3), (8, 9), (7, 8), (8, 10),
        ],
    )
}

/// A 15-edge graph on 10 vertices with no 3- or 4-cycles (BFS-labeled; the
/// Petersen graph).
pub fn c3c4_free_10() -> Graph {
    graph(
        10,
        &[
            (1, 2), (1, 3), (1, 4), (2, 5), (2, 6), (3, 7), (3, 8), (4, 9), (4, 10),
            (5, 7), (5, 9), (6, 8), (6, 10), (7, 10), (8, 9),
        ],
    )
}

/// An 18-edge graph on 12 vertices with no 3- or 4-cycles (BFS-labeled).
pub fn c3c4_free_12() -> Graph {
    graph(
        12,
        &[
            (1, 2), (1, 3), (1, 4), (1, 5), (2, 6), (2, 7), (3, 8), (3, 9), (4, 10), (4, 11),
            (5, 12), (6, 9), (6, 10), (7, 12), (8, 10), (8, 12), (9, 11), (11, 12),
        ],
    )
}
