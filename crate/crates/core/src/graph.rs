//! Labeled simple graphs on at most [`MAX_VERTICES`] vertices.
//!
//! Adjacency is stored once per unordered pair as a bit mask over the pair
//! order `(1,2), (1,3), …, (1,n), (2,3), …, (n-1,n)`, so symmetry and the
//! absence of loops hold by construction. Neighbor rows are derived from that
//! mask when a graph is built and never mutated afterwards.
//!
//! Every public surface speaks 1-based vertex labels; the `*_0` helpers are
//! crate-internal and 0-based.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const MAX_VERTICES: usize = 16;

/// Largest `n` accepted by the brute-force canonicalization (`n!` relabelings).
pub const MAX_CANONICAL_VERTICES: usize = 8;

/// Number of unordered vertex pairs, `C(n, 2)`.
pub const fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Position of the 0-based pair `{i, j}` in the upper-triangle order.
#[inline]
pub(crate) fn pair_index0(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    debug_assert!(j < n && i != j);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// All 0-based pairs in upper-triangle order.
pub(crate) fn pairs0(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(pair_count(n));
    for i in 0..n {
        for j in i + 1..n {
            out.push((i, j));
        }
    }
    out
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Graph {
    n: u8,
    bits: u128,
    rows: [u16; MAX_VERTICES],
}

impl Graph {
    /// The edgeless graph on `n` vertices.
    pub fn empty(n: usize) -> Result<Self> {
        Self::from_edge_mask(n, 0)
    }

    /// Builds a graph from 1-based edges. Duplicate edges are merged.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        check_order(n)?;
        let mut bits = 0u128;
        for &(i, j) in edges {
            if i == j {
                return Err(Error::input(format!("self-loop at vertex {i}")));
            }
            if i == 0 || j == 0 || i > n || j > n {
                return Err(Error::input(format!(
                    "edge {{{i},{j}}} outside vertex range 1..{n}"
                )));
            }
            bits |= 1u128 << pair_index0(n, i - 1, j - 1);
        }
        Self::from_edge_mask(n, bits)
    }

    /// Builds a graph from an upper-triangle edge mask (bit `k` is the `k`-th pair).
    pub fn from_edge_mask(n: usize, bits: u128) -> Result<Self> {
        check_order(n)?;
        let pc = pair_count(n);
        if pc < 128 && bits >> pc != 0 {
            return Err(Error::input(format!(
                "edge mask has bits beyond the {pc} pairs of an order-{n} graph"
            )));
        }
        Ok(Self::from_mask_unchecked(n, bits))
    }

    pub(crate) fn from_mask_unchecked(n: usize, bits: u128) -> Self {
        let mut rows = [0u16; MAX_VERTICES];
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                if bits >> k & 1 == 1 {
                    rows[i] |= 1 << j;
                    rows[j] |= 1 << i;
                }
                k += 1;
            }
        }
        Graph {
            n: n as u8,
            bits,
            rows,
        }
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn edge_mask(&self) -> u128 {
        self.bits
    }

    pub fn edge_count(&self) -> usize {
        self.bits.count_ones() as usize
    }

    /// Adjacency test on 1-based labels. Loops are never edges.
    ///
    /// Panics if either label is outside `1..=n`.
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        assert!(
            (1..=self.n()).contains(&i) && (1..=self.n()).contains(&j),
            "vertex pair ({i},{j}) outside 1..{}",
            self.n
        );
        self.adjacent0(i - 1, j - 1)
    }

    /// 1-based edges in upper-triangle order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        pairs0(self.n())
            .into_iter()
            .enumerate()
            .filter(|(k, _)| self.bits >> k & 1 == 1)
            .map(|(_, (i, j))| (i + 1, j + 1))
    }

    pub fn degree(&self, v: usize) -> Result<usize> {
        if v == 0 || v > self.n() {
            return Err(Error::input(format!("vertex {v} outside 1..{}", self.n)));
        }
        Ok(self.degree0(v - 1))
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n()).map(|v| self.degree0(v)).collect()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n()).map(|v| self.degree0(v)).max().unwrap_or(0)
    }

    pub fn min_degree(&self) -> usize {
        (0..self.n()).map(|v| self.degree0(v)).min().unwrap_or(0)
    }

    /// True iff every vertex is reachable from vertex 1.
    pub fn is_connected(&self) -> bool {
        let all: u32 = (1u32 << self.n) - 1;
        let mut seen: u32 = 1;
        let mut frontier: u32 = 1;
        while frontier != 0 {
            let v = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            let fresh = self.rows[v] as u32 & !seen;
            seen |= fresh;
            frontier |= fresh;
        }
        seen == all
    }

    /// `k = 3`: some triangle exists. `k = 4`: some (not necessarily induced)
    /// 4-cycle exists, detected as two vertices sharing two common neighbors.
    pub fn has_forbidden_cycle(&self, k: usize) -> Result<bool> {
        match k {
            3 => Ok(self.has_triangle()),
            4 => Ok(self.has_square()),
            _ => Err(Error::input(format!(
                "forbidden cycle length must be 3 or 4, got {k}"
            ))),
        }
    }

    pub(crate) fn has_triangle(&self) -> bool {
        let n = self.n();
        (0..n).any(|u| {
            let mut higher = self.rows[u] & !((2u32 << u) - 1) as u16;
            while higher != 0 {
                let v = higher.trailing_zeros() as usize;
                higher &= higher - 1;
                if self.rows[u] & self.rows[v] != 0 {
                    return true;
                }
            }
            false
        })
    }

    pub(crate) fn has_square(&self) -> bool {
        let n = self.n();
        (0..n).any(|u| (u + 1..n).any(|v| (self.rows[u] & self.rows[v]).count_ones() >= 2))
    }

    /// Relabels vertex `i` as `π(i)`.
    pub fn apply_permutation(&self, perm: &Permutation) -> Result<Self> {
        if perm.len() != self.n() {
            return Err(Error::input(format!(
                "permutation of length {} applied to a graph on {} vertices",
                perm.len(),
                self.n
            )));
        }
        Ok(self.permute0(&perm.image))
    }

    /// Relabeling by a 0-based image array; the caller guarantees bijectivity.
    pub(crate) fn permute0(&self, image: &[u8]) -> Self {
        let n = self.n();
        let mut bits = 0u128;
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                if self.bits >> k & 1 == 1 {
                    bits |= 1u128 << pair_index0(n, image[i] as usize, image[j] as usize);
                }
                k += 1;
            }
        }
        Self::from_mask_unchecked(n, bits)
    }

    /// Representative of the isomorphism class: the relabeling whose adjacency
    /// bit string (upper-triangle pair order, first pair first) is
    /// lexicographically smallest. Brute force over all `n!` relabelings.
    pub fn canonical_form(&self) -> Result<Self> {
        let key = self.canonical_key()?;
        Ok(Self::from_mask_unchecked(
            self.n(),
            key_to_mask(self.n(), key),
        ))
    }

    /// The lexicographic key of [`Graph::canonical_form`]: pair 0 is the most
    /// significant bit. Equal keys ⇔ isomorphic graphs of the same order.
    pub fn canonical_key(&self) -> Result<u128> {
        let n = self.n();
        if n > MAX_CANONICAL_VERTICES {
            return Err(Error::capacity(format!(
                "canonical form is brute force and limited to n <= {MAX_CANONICAL_VERTICES}, got n = {n}"
            )));
        }
        let edges = self.edge_list0();
        let mut best = u128::MAX;
        for_each_permutation(n, |perm| {
            let key = relabeled_key(n, &edges, perm);
            if key < best {
                best = key;
            }
        });
        Ok(best)
    }

    /// Number of relabelings mapping the graph onto itself.
    pub fn automorphism_count(&self) -> Result<u64> {
        let n = self.n();
        if n > MAX_CANONICAL_VERTICES {
            return Err(Error::capacity(format!(
                "automorphism counting is limited to n <= {MAX_CANONICAL_VERTICES}, got n = {n}"
            )));
        }
        let edges = self.edge_list0();
        let own = mask_to_key(n, self.bits);
        let mut count = 0;
        for_each_permutation(n, |perm| {
            if relabeled_key(n, &edges, perm) == own {
                count += 1;
            }
        });
        Ok(count)
    }

    #[inline]
    pub(crate) fn adjacent0(&self, i: usize, j: usize) -> bool {
        self.rows[i] >> j & 1 == 1
    }

    #[inline]
    pub(crate) fn neighbors0(&self, v: usize) -> u16 {
        self.rows[v]
    }

    #[inline]
    pub(crate) fn degree0(&self, v: usize) -> usize {
        self.rows[v].count_ones() as usize
    }

    fn edge_list0(&self) -> Vec<(u8, u8)> {
        self.edges().map(|(i, j)| (i as u8 - 1, j as u8 - 1)).collect()
    }

    /// Text form: header `n m`, then one `i j` line per edge with `i < j`.
    pub fn to_edge_list(&self) -> String {
        self.to_string()
    }

    /// `n` lines of `n` characters in `{0,1}`.
    pub fn to_adjacency_matrix(&self) -> String {
        let mut out = String::new();
        for i in 0..self.n() {
            for j in 0..self.n() {
                out.push(if self.adjacent0(i, j) { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }
}

fn check_order(n: usize) -> Result<()> {
    if n == 0 || n > MAX_VERTICES {
        return Err(Error::capacity(format!(
            "graphs have between 1 and {MAX_VERTICES} vertices, got {n}"
        )));
    }
    Ok(())
}

fn mask_to_key(n: usize, mask: u128) -> u128 {
    let pc = pair_count(n);
    let mut key = 0u128;
    for k in 0..pc {
        if mask >> k & 1 == 1 {
            key |= 1u128 << (pc - 1 - k);
        }
    }
    key
}

fn key_to_mask(n: usize, key: u128) -> u128 {
    // the bit reversal is its own inverse
    mask_to_key(n, key)
}

#[inline]
fn relabeled_key(n: usize, edges: &[(u8, u8)], perm: &[u8]) -> u128 {
    let top = pair_count(n).saturating_sub(1);
    edges.iter().fold(0u128, |key, &(i, j)| {
        key | 1u128 << (top - pair_index0(n, perm[i as usize] as usize, perm[j as usize] as usize))
    })
}

/// Heap's algorithm over 0-based permutations of `0..n`.
pub(crate) fn for_each_permutation(n: usize, mut visit: impl FnMut(&[u8])) {
    let mut perm: Vec<u8> = (0..n as u8).collect();
    let mut c = vec![0usize; n];
    visit(&perm);
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            visit(&perm);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(n={}, edges=[", self.n)?;
        for (k, (i, j)) in self.edges().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{i}-{j}")?;
        }
        write!(f, "])")
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.n, self.edge_count())?;
        for (i, j) in self.edges() {
            writeln!(f, "{i} {j}")?;
        }
        Ok(())
    }
}

impl FromStr for Graph {
    type Err = Error;

    /// Accepts the edge-list form or the adjacency-matrix form. Blank lines and
    /// lines starting with `#` are ignored.
    fn from_str(s: &str) -> Result<Self> {
        let lines: Vec<&str> = s
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect();
        let first = lines
            .first()
            .ok_or_else(|| Error::input("empty graph description"))?;
        let is_matrix_row = |l: &str| !l.is_empty() && l.chars().all(|c| c == '0' || c == '1');
        if first.split_whitespace().count() == 1 && is_matrix_row(first) {
            parse_matrix(&lines)
        } else {
            parse_edge_list(&lines)
        }
    }
}

fn parse_usize(tok: &str, what: &str) -> Result<usize> {
    tok.parse()
        .map_err(|_| Error::input(format!("expected {what}, found {tok:?}")))
}

fn parse_edge_list(lines: &[&str]) -> Result<Graph> {
    let header: Vec<&str> = lines[0].split_whitespace().collect();
    if header.len() != 2 {
        return Err(Error::input(format!(
            "header must be \"n m\", found {:?}",
            lines[0]
        )));
    }
    let n = parse_usize(header[0], "vertex count")?;
    let m = parse_usize(header[1], "edge count")?;
    if lines.len() - 1 != m {
        return Err(Error::input(format!(
            "header announces {m} edges but {} edge lines follow",
            lines.len() - 1
        )));
    }
    let mut edges = Vec::with_capacity(m);
    for line in &lines[1..] {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(Error::input(format!("edge line must be \"i j\", found {line:?}")));
        }
        let i = parse_usize(toks[0], "vertex label")?;
        let j = parse_usize(toks[1], "vertex label")?;
        if i >= j {
            return Err(Error::input(format!("edge line requires i < j, found {line:?}")));
        }
        edges.push((i, j));
    }
    let g = Graph::from_edges(n, &edges)?;
    if g.edge_count() != m {
        return Err(Error::input("duplicate edge lines"));
    }
    Ok(g)
}

#[allow(clippy::needless_range_loop)]
fn parse_matrix(lines: &[&str]) -> Result<Graph> {
    let n = lines.len();
    let rows: Vec<&[u8]> = lines.iter().map(|l| l.as_bytes()).collect();
    if let Some(bad) = rows.iter().position(|r| r.len() != n) {
        return Err(Error::input(format!(
            "adjacency matrix row {} has {} entries, expected {n}",
            bad + 1,
            rows[bad].len()
        )));
    }
    let mut edges = Vec::new();
    for i in 0..n {
        if rows[i][i] != b'0' {
            return Err(Error::input(format!("adjacency matrix has a loop at vertex {}", i + 1)));
        }
        for j in i + 1..n {
            if rows[i][j] != rows[j][i] {
                return Err(Error::input(format!(
                    "adjacency matrix is not symmetric at ({}, {})",
                    i + 1,
                    j + 1
                )));
            }
            if rows[i][j] == b'1' {
                edges.push((i + 1, j + 1));
            }
        }
    }
    Graph::from_edges(n, &edges)
}

/// A relabeling of `1..n`; `image[i]` is the new label of old label `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    image: Vec<u8>,
}

impl Permutation {
    /// Builds a permutation from its 1-based image array.
    pub fn new(image: &[usize]) -> Result<Self> {
        let n = image.len();
        check_order(n)?;
        let mut seen = vec![false; n];
        for &v in image {
            if v == 0 || v > n || std::mem::replace(&mut seen[v - 1], true) {
                return Err(Error::input(format!(
                    "{image:?} is not a bijection on 1..{n}"
                )));
            }
        }
        Ok(Permutation {
            image: image.iter().map(|&v| (v - 1) as u8).collect(),
        })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            image: (0..n as u8).collect(),
        }
    }

    pub(crate) fn from_image0(image: Vec<u8>) -> Self {
        debug_assert!({
            let mut s = image.clone();
            s.sort_unstable();
            s.iter().enumerate().all(|(k, &v)| v as usize == k)
        });
        Permutation { image }
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    /// New label of the 1-based vertex `v`.
    pub fn apply(&self, v: usize) -> usize {
        self.image[v - 1] as usize + 1
    }

    /// 1-based image array.
    pub fn image(&self) -> Vec<usize> {
        self.image.iter().map(|&v| v as usize + 1).collect()
    }

    pub(crate) fn image0(&self) -> &[u8] {
        &self.image
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0u8; self.image.len()];
        for (i, &v) in self.image.iter().enumerate() {
            inv[v as usize] = i as u8;
        }
        Permutation { image: inv }
    }

    /// `self` followed by `then`.
    pub fn then(&self, then: &Permutation) -> Self {
        Permutation {
            image: self.image.iter().map(|&v| then.image[v as usize]).collect(),
        }
    }
}
