//! Network topology and the controllability calculus.
//!
//! A network is an undirected, loop-free graph on dense vertex ids together
//! with a distinguished set of bath vertices. Controllability is decided by
//! iterating the "nicely connected" growth operator: a vertex outside the
//! current set `B` is added when some `b ∈ B` has it as its *only* neighbour
//! outside `B`.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub usize);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An interaction edge. The orientation `(a, b)` fixes the sign convention
/// `δq = q_b − q_a` for the edge potential; `{a, b}` may appear only once.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub a: VertexId,
    pub b: VertexId,
}

impl Edge {
    pub fn new(a: usize, b: usize) -> Self {
        Self {
            a: VertexId(a),
            b: VertexId(b),
        }
    }

    fn key(&self) -> (usize, usize) {
        (self.a.0.min(self.b.0), self.a.0.max(self.b.0))
    }

    pub fn other(&self, v: VertexId) -> Option<VertexId> {
        if self.a == v {
            Some(self.b)
        } else if self.b == v {
            Some(self.a)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTopology")]
pub struct NetworkTopology {
    names: Vec<String>,
    edges: Vec<Edge>,
    baths: Vec<VertexId>,
    #[serde(skip)]
    adjacency: Vec<Vec<usize>>,
}

#[derive(Deserialize)]
struct RawTopology {
    names: Vec<String>,
    edges: Vec<Edge>,
    baths: Vec<VertexId>,
}

impl TryFrom<RawTopology> for NetworkTopology {
    type Error = crate::Error;

    fn try_from(raw: RawTopology) -> Result<Self> {
        let edges: Vec<(usize, usize)> = raw.edges.iter().map(|e| (e.a.0, e.b.0)).collect();
        let baths: Vec<usize> = raw.baths.iter().map(|v| v.0).collect();
        Self::with_names(raw.names, &edges, &baths)
    }
}

impl NetworkTopology {
    /// Builds a topology with vertices named `"0"`, `"1"`, ...
    pub fn new(vertex_count: usize, edges: &[(usize, usize)], baths: &[usize]) -> Result<Self> {
        let names = (0..vertex_count).map(|i| i.to_string()).collect();
        Self::with_names(names, edges, baths)
    }

    pub fn with_names(names: Vec<String>, edges: &[(usize, usize)], baths: &[usize]) -> Result<Self> {
        let count = names.len();
        if count == 0 {
            return invalid("a network needs at least one vertex");
        }
        let unique: BTreeSet<&String> = names.iter().collect();
        if unique.len() != count {
            return invalid("vertex names must be unique");
        }
        let mut seen = BTreeSet::new();
        let mut edge_list = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a >= count || b >= count {
                return invalid(format!("edge ({a}, {b}) references a vertex outside 0..{count}"));
            }
            if a == b {
                return invalid(format!("loop edge ({a}, {a}) is not allowed"));
            }
            let e = Edge::new(a, b);
            if !seen.insert(e.key()) {
                return invalid(format!("duplicate edge {{{a}, {b}}}"));
            }
            edge_list.push(e);
        }
        let mut bath_set = BTreeSet::new();
        for &b in baths {
            if b >= count {
                return invalid(format!("bath vertex {b} outside 0..{count}"));
            }
            bath_set.insert(b);
        }
        let mut adjacency = vec![Vec::new(); count];
        for e in &edge_list {
            adjacency[e.a.0].push(e.b.0);
            adjacency[e.b.0].push(e.a.0);
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }
        Ok(Self {
            names,
            edges: edge_list,
            baths: bath_set.into_iter().map(VertexId).collect(),
            adjacency,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Bath vertices in increasing id order.
    pub fn baths(&self) -> &[VertexId] {
        &self.baths
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, v: VertexId) -> &str {
        &self.names[v.0]
    }

    pub fn vertex_by_name(&self, name: &str) -> Option<VertexId> {
        self.names.iter().position(|n| n == name).map(VertexId)
    }

    pub fn neighbours(&self, v: VertexId) -> &[usize] {
        &self.adjacency[v.0]
    }

    pub fn is_bath(&self, v: VertexId) -> bool {
        self.baths.binary_search(&v).is_ok()
    }

    /// Same graph with a different bath set.
    pub fn with_baths(&self, baths: &[usize]) -> Result<Self> {
        let edges: Vec<(usize, usize)> = self.edges.iter().map(|e| (e.a.0, e.b.0)).collect();
        Self::with_names(self.names.clone(), &edges, baths)
    }
}

/// Depth label of a vertex: `Level(k)` means the vertex first appears in
/// `T^k 𝓑` (bath vertices have level 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Depth {
    Level(usize),
    Uncontrolled,
}

impl Depth {
    pub fn level(self) -> Option<usize> {
        match self {
            Depth::Level(k) => Some(k),
            Depth::Uncontrolled => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlReport {
    pub controlled: bool,
    pub connected: bool,
    pub depth: Vec<Depth>,
    /// `|T^k 𝓑|` for k = 0, 1, ... up to the fixpoint.
    pub growth: Vec<usize>,
}

impl ControlReport {
    pub fn max_depth(&self) -> Option<usize> {
        self.depth.iter().filter_map(|d| d.level()).max()
    }
}

/// One application of the growth operator `T`.
pub fn nicely_connected_step(topology: &NetworkTopology, set: &BTreeSet<VertexId>) -> Result<BTreeSet<VertexId>> {
    let count = topology.vertex_count();
    if let Some(bad) = set.iter().find(|v| v.0 >= count) {
        return invalid(format!("vertex {bad} outside 0..{count}"));
    }
    let mut member = vec![false; count];
    for v in set {
        member[v.0] = true;
    }
    Ok(grow(topology, &member).into_iter().enumerate().filter(|(_, m)| *m).map(|(i, _)| VertexId(i)).collect())
}

fn grow(topology: &NetworkTopology, member: &[bool]) -> Vec<bool> {
    let mut next = member.to_vec();
    for (b, inside) in member.iter().enumerate() {
        if !*inside {
            continue;
        }
        let mut outside = topology.adjacency[b].iter().filter(|&&w| !member[w]);
        if let (Some(&only), None) = (outside.next(), outside.next()) {
            next[only] = true;
        }
    }
    next
}

pub fn is_connected(topology: &NetworkTopology) -> bool {
    let count = topology.vertex_count();
    let mut seen = vec![false; count];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut reached = 1;
    while let Some(v) = queue.pop_front() {
        for &w in &topology.adjacency[v] {
            if !seen[w] {
                seen[w] = true;
                reached += 1;
                queue.push_back(w);
            }
        }
    }
    reached == count
}

/// Iterates the growth operator from the bath set to its fixpoint.
pub fn controls(topology: &NetworkTopology) -> ControlReport {
    let count = topology.vertex_count();
    let mut member = vec![false; count];
    let mut depth = vec![Depth::Uncontrolled; count];
    for b in topology.baths() {
        member[b.0] = true;
        depth[b.0] = Depth::Level(0);
    }
    let mut growth = vec![topology.baths().len()];
    let mut level = 0;
    loop {
        let next = grow(topology, &member);
        let added: Vec<usize> = (0..count).filter(|&i| next[i] && !member[i]).collect();
        if added.is_empty() {
            break;
        }
        level += 1;
        for &i in &added {
            depth[i] = Depth::Level(level);
        }
        member = next;
        growth.push(member.iter().filter(|m| **m).count());
    }
    ControlReport {
        controlled: member.iter().all(|m| *m),
        connected: is_connected(topology),
        depth,
        growth,
    }
}

pub const FIXTURE_NAMES: [&str; 8] = [
    "fig1",
    "fig2_chain11",
    "fig2_ladder3x5",
    "fig2_braced3x5",
    "fig2_triangular",
    "fig2_hexcolumns",
    "fig2_square4",
    "fig2_braced2x5",
];

/// Built-in reference networks, frozen by their expected control reports.
///
/// | name              | vertices                     | baths        | controlled |
/// |-------------------|------------------------------|--------------|------------|
/// | `fig1`            | a..e, f (joins d,e), g h i   | a, b, c      | no         |
/// | `fig2_chain11`    | c0..c10                      | c0, c10      | yes        |
/// | `fig2_ladder3x5`  | r{row}c{col}, 3×5 grid       | both ends    | yes        |
/// | `fig2_braced3x5`  | 3×5 grid, 4 diagonals        | column 0     | yes        |
/// | `fig2_triangular` | t1..t15                      | t1, t2, t3   | yes        |
/// | `fig2_hexcolumns` | a1..d6                       | a1, a4, a5   | yes        |
/// | `fig2_square4`    | n1..n4 (4-cycle)             | n1, n3       | no         |
/// | `fig2_braced2x5`  | 2×5 grid, 4 diagonals        | both ends    | no         |
///
/// In the grid fixtures row 0 is the bottom row of the drawing.
pub fn builtin_fixture(name: &str) -> Result<NetworkTopology> {
    match name {
        "fig1" => named(
            &["a", "b", "c", "d", "e", "f", "g", "h", "i"],
            &[
                ("a", "b"),
                ("a", "c"),
                ("b", "g"),
                ("b", "h"),
                ("b", "i"),
                ("h", "i"),
                ("c", "e"),
                ("a", "d"),
                ("f", "e"),
                ("f", "d"),
            ],
            &["a", "b", "c"],
        ),
        "fig2_chain11" => {
            let names: Vec<String> = (0..11).map(|i| format!("c{i}")).collect();
            let edges: Vec<(usize, usize)> = (0..10).map(|i| (i, i + 1)).collect();
            NetworkTopology::with_names(names, &edges, &[0, 10])
        }
        "fig2_ladder3x5" => grid(3, 5, &[], &[(0, 0), (0, 4), (1, 0), (1, 4), (2, 0), (2, 4)]),
        "fig2_braced3x5" => grid(
            3,
            5,
            &[((2, 0), (1, 1)), ((2, 1), (1, 2)), ((0, 0), (1, 1)), ((0, 1), (1, 2))],
            &[(0, 0), (1, 0), (2, 0)],
        ),
        "fig2_braced2x5" => grid(
            2,
            5,
            &[((0, 0), (1, 1)), ((0, 2), (1, 3)), ((0, 1), (1, 0)), ((0, 3), (1, 2))],
            &[(0, 0), (0, 4), (1, 0), (1, 4)],
        ),
        "fig2_square4" => named(
            &["n1", "n2", "n3", "n4"],
            &[("n1", "n2"), ("n2", "n3"), ("n1", "n4"), ("n4", "n3")],
            &["n1", "n3"],
        ),
        "fig2_triangular" => {
            let names: Vec<String> = (1..=15).map(|i| format!("t{i}")).collect();
            let pairs = [
                (1, 2),
                (2, 3),
                (1, 4),
                (2, 4),
                (2, 5),
                (3, 5),
                (3, 6),
                (4, 5),
                (5, 6),
                (4, 7),
                (5, 8),
                (6, 9),
                (5, 9),
                (4, 8),
                (7, 8),
                (8, 9),
                (7, 10),
                (8, 10),
                (8, 11),
                (9, 11),
                (9, 12),
                (10, 11),
                (11, 12),
                (10, 13),
                (11, 14),
                (12, 15),
                (11, 15),
                (10, 14),
                (14, 13),
                (15, 14),
            ];
            let edges: Vec<(usize, usize)> = pairs.iter().map(|&(a, b)| (a - 1, b - 1)).collect();
            NetworkTopology::with_names(names, &edges, &[0, 1, 2])
        }
        "fig2_hexcolumns" => {
            let names: Vec<String> = ['a', 'b', 'c', 'd']
                .iter()
                .flat_map(|c| (1..=6).map(move |i| format!("{c}{i}")))
                .collect();
            let refs: Vec<&str> = names.iter().map(String::as_str).collect();
            let mut edges = vec![("a2", "a3"), ("a4", "a3"), ("a4", "a5")];
            edges.extend([("a1", "a2"), ("a5", "a6"), ("a2", "b1"), ("a3", "b4"), ("a6", "b5")]);
            edges.extend([("b1", "b2"), ("b2", "b3"), ("b4", "b3"), ("b4", "b5"), ("b5", "b6")]);
            edges.extend([("b2", "c1"), ("b3", "c4"), ("b6", "c5")]);
            edges.extend([("c1", "c2"), ("c2", "c3"), ("c4", "c3"), ("c4", "c5"), ("c5", "c6")]);
            edges.extend([("c2", "d1"), ("c3", "d4"), ("c6", "d5")]);
            edges.extend([("d1", "d2"), ("d2", "d3"), ("d4", "d3"), ("d4", "d5"), ("d5", "d6")]);
            named(&refs, &edges, &["a1", "a4", "a5"])
        }
        other => invalid(format!(
            "unknown fixture '{other}'; valid names: {}",
            FIXTURE_NAMES.join(", ")
        )),
    }
}

fn named(names: &[&str], edges: &[(&str, &str)], baths: &[&str]) -> Result<NetworkTopology> {
    let index = |n: &str| names.iter().position(|m| *m == n).expect("fixture vertex");
    let edges: Vec<(usize, usize)> = edges.iter().map(|&(a, b)| (index(a), index(b))).collect();
    let baths: Vec<usize> = baths.iter().map(|b| index(b)).collect();
    NetworkTopology::with_names(names.iter().map(|s| s.to_string()).collect(), &edges, &baths)
}

type Cell = (usize, usize);

/// Rows × columns grid with nearest-neighbour springs plus extra braces.
fn grid(rows: usize, cols: usize, braces: &[(Cell, Cell)], baths: &[Cell]) -> Result<NetworkTopology> {
    let id = |(r, c): Cell| r * cols + c;
    let names = (0..rows)
        .flat_map(|r| (0..cols).map(move |c| format!("r{r}c{c}")))
        .collect();
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push((id((r, c)), id((r, c + 1))));
            }
            if r + 1 < rows {
                edges.push((id((r, c)), id((r + 1, c))));
            }
        }
    }
    edges.extend(braces.iter().map(|&(x, y)| (id(x), id(y))));
    let baths: Vec<usize> = baths.iter().map(|&cell| id(cell)).collect();
    NetworkTopology::with_names(names, &edges, &baths)
}
