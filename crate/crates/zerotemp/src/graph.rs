//! Finite digraphs presenting topological Markov chains: validation,
//! decomposition into transitive components with periods and cyclic
//! partitions, elementary circuits (Johnson) and constrained elementary
//! paths.

use crate::{Error, Result};
use std::collections::{BTreeSet, HashSet};

/// A vertex index into the alphabet of a [`Digraph`].
pub type Symbol = usize;

/// Finite directed graph over a named alphabet.  Arrows are a set: no
/// duplicates, no parallel arrows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    names: Vec<String>,
    arrows: BTreeSet<(Symbol, Symbol)>,
    out: Vec<Vec<Symbol>>,
}

impl Digraph {
    /// Validates and builds a graph from symbol names and named arrows.
    pub fn validate(alphabet: Vec<String>, arrows: &[(String, String)]) -> Result<Self> {
        if alphabet.is_empty() {
            return Err(Error::EmptyAlphabet);
        }
        let mut seen = HashSet::new();
        for name in &alphabet {
            if !seen.insert(name.clone()) {
                return Err(Error::DuplicateSymbol(name.clone()));
            }
        }
        let index = |name: &String| -> Result<Symbol> {
            alphabet
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| Error::DanglingArrowEndpoint(name.clone()))
        };
        let mut idx_arrows = Vec::with_capacity(arrows.len());
        for (a, b) in arrows {
            idx_arrows.push((index(a)?, index(b)?));
        }
        Ok(Self::from_indices(alphabet, idx_arrows))
    }

    /// Builds a graph from pre-resolved arrow indices (must be in range).
    pub fn from_indices(names: Vec<String>, arrows: Vec<(Symbol, Symbol)>) -> Self {
        let n = names.len();
        let arrows: BTreeSet<_> = arrows.into_iter().collect();
        debug_assert!(arrows.iter().all(|&(a, b)| a < n && b < n));
        let mut out = vec![Vec::new(); n];
        for &(a, b) in &arrows {
            out[a].push(b);
        }
        Digraph { names, arrows, out }
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, v: Symbol) -> &str {
        &self.names[v]
    }

    pub fn symbol_by_name(&self, name: &str) -> Option<Symbol> {
        self.names.iter().position(|n| n == name)
    }

    pub fn arrows(&self) -> impl Iterator<Item = (Symbol, Symbol)> + '_ {
        self.arrows.iter().copied()
    }

    pub fn arrow_count(&self) -> usize {
        self.arrows.len()
    }

    pub fn has_arrow(&self, a: Symbol, b: Symbol) -> bool {
        self.arrows.contains(&(a, b))
    }

    pub fn successors(&self, a: Symbol) -> &[Symbol] {
        &self.out[a]
    }

    /// Subgraph induced by a vertex set, keeping the original vertex indices
    /// and names (vertices outside the set become isolated).
    pub fn restrict_arrows(&self, keep: impl Fn(Symbol, Symbol) -> bool) -> Digraph {
        let arrows = self.arrows().filter(|&(a, b)| keep(a, b)).collect();
        Digraph::from_indices(self.names.clone(), arrows)
    }

    /// True iff the whole graph is one strongly connected component.  A
    /// single vertex counts as strongly connected with or without a loop.
    pub fn is_irreducible(&self) -> bool {
        strongly_connected_components(self.n(), &self.out).len() == 1
    }

    /// Transitive components (SCCs carrying a circuit), their periods and
    /// cyclic partitions; circuit-free vertices become trivial components.
    pub fn decompose(&self) -> ComponentDecomposition {
        let sccs = strongly_connected_components(self.n(), &self.out);
        let mut components = Vec::new();
        for scc in sccs {
            let mut vertices = scc.clone();
            vertices.sort_unstable();
            let transitive = vertices.len() > 1 || self.has_arrow(vertices[0], vertices[0]);
            let arrows: Vec<_> = self
                .arrows()
                .filter(|&(a, b)| vertices.contains(&a) && vertices.contains(&b))
                .collect();
            if transitive {
                let (period, cyclic_partition) = component_period(&vertices, &arrows);
                components.push(Component {
                    vertices,
                    arrows,
                    kind: ComponentKind::Transitive,
                    period,
                    cyclic_partition,
                });
            } else {
                components.push(Component {
                    vertices,
                    arrows: Vec::new(),
                    kind: ComponentKind::Trivial,
                    period: 0,
                    cyclic_partition: Vec::new(),
                });
            }
        }
        components.sort_by_key(|c| c.vertices[0]);
        ComponentDecomposition { components }
    }

    /// All elementary circuits, each anchored at its minimal vertex, in
    /// deterministic order.  Stored as vertex sequences `b_0 .. b_m = b_0`.
    pub fn elementary_circuits(&self) -> Vec<PathRec> {
        johnson_circuits(self.n(), &self.out)
            .into_iter()
            .map(|mut vs| {
                vs.push(vs[0]);
                PathRec { vertices: vs }
            })
            .collect()
    }

    /// Elementary paths `a -> c` (`a != c`) avoiding the given arrows and
    /// whose strictly interior vertices avoid the given set.  Lexicographic
    /// order by vertex indices.  Returns `[]` when `a == c`; use
    /// [`Digraph::elementary_closed_paths`] for excursion circuits.
    pub fn elementary_paths(
        &self,
        a: Symbol,
        c: Symbol,
        forbidden_arrows: &HashSet<(Symbol, Symbol)>,
        forbidden_interior: &HashSet<Symbol>,
    ) -> Vec<PathRec> {
        if a == c {
            return Vec::new();
        }
        self.constrained_paths(a, c, forbidden_arrows, forbidden_interior)
    }

    /// Closed elementary excursions `a -> ... -> a` of length >= 1 under the
    /// same constraints (interior vertices distinct, not equal to `a`).
    pub fn elementary_closed_paths(
        &self,
        a: Symbol,
        forbidden_arrows: &HashSet<(Symbol, Symbol)>,
        forbidden_interior: &HashSet<Symbol>,
    ) -> Vec<PathRec> {
        self.constrained_paths(a, a, forbidden_arrows, forbidden_interior)
    }

    fn constrained_paths(
        &self,
        a: Symbol,
        c: Symbol,
        forbidden_arrows: &HashSet<(Symbol, Symbol)>,
        forbidden_interior: &HashSet<Symbol>,
    ) -> Vec<PathRec> {
        let mut found = Vec::new();
        let mut path = vec![a];
        let mut on_path = vec![false; self.n()];
        on_path[a] = true;
        self.path_dfs(c, forbidden_arrows, forbidden_interior, &mut path, &mut on_path, &mut found);
        found
    }

    fn path_dfs(
        &self,
        target: Symbol,
        forbidden_arrows: &HashSet<(Symbol, Symbol)>,
        forbidden_interior: &HashSet<Symbol>,
        path: &mut Vec<Symbol>,
        on_path: &mut [bool],
        found: &mut Vec<PathRec>,
    ) {
        let v = *path.last().unwrap();
        let mut next: Vec<Symbol> = self.out[v].clone();
        next.sort_unstable();
        for w in next {
            if forbidden_arrows.contains(&(v, w)) {
                continue;
            }
            if w == target {
                let mut vs = path.clone();
                vs.push(w);
                found.push(PathRec { vertices: vs });
                continue;
            }
            if on_path[w] || forbidden_interior.contains(&w) {
                continue;
            }
            on_path[w] = true;
            path.push(w);
            self.path_dfs(target, forbidden_arrows, forbidden_interior, path, on_path, found);
            path.pop();
            on_path[w] = false;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentKind {
    Transitive,
    Trivial,
}

/// One component of the circuit-carrying part of a graph.
#[derive(Debug, Clone)]
pub struct Component {
    pub vertices: Vec<Symbol>,
    pub arrows: Vec<(Symbol, Symbol)>,
    pub kind: ComponentKind,
    /// Period p >= 1 for transitive components, 0 for trivial ones.
    pub period: usize,
    /// p vertex classes, arrows map class i into class i+1 mod p.
    pub cyclic_partition: Vec<Vec<Symbol>>,
}

#[derive(Debug, Clone)]
pub struct ComponentDecomposition {
    pub components: Vec<Component>,
}

impl ComponentDecomposition {
    pub fn transitive(&self) -> impl Iterator<Item = &Component> {
        self.components.iter().filter(|c| c.kind == ComponentKind::Transitive)
    }

    pub fn component_of(&self, v: Symbol) -> Option<&Component> {
        self.components.iter().find(|c| c.vertices.contains(&v))
    }
}

/// A finite path or circuit, stored as its vertex sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PathRec {
    pub vertices: Vec<Symbol>,
}

impl PathRec {
    /// Number of arrows.
    pub fn len(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_circuit(&self) -> bool {
        self.vertices.len() > 1 && self.vertices.first() == self.vertices.last()
    }

    pub fn arrows(&self) -> impl Iterator<Item = (Symbol, Symbol)> + '_ {
        self.vertices.windows(2).map(|w| (w[0], w[1]))
    }

    /// Strictly interior vertices `b_1 .. b_{m-1}` (for circuits, everything
    /// but the anchor).
    pub fn interior(&self) -> &[Symbol] {
        &self.vertices[1..self.vertices.len() - 1]
    }

    pub fn is_elementary(&self) -> bool {
        let mut seen = HashSet::new();
        let closed = self.is_circuit();
        let upto = if closed { self.vertices.len() - 1 } else { self.vertices.len() };
        self.vertices[..upto].iter().all(|v| seen.insert(*v))
    }
}

/// Tarjan's algorithm, iterative.  Returns SCCs as vertex lists.
fn strongly_connected_components(n: usize, out: &[Vec<Symbol>]) -> Vec<Vec<Symbol>> {
    #[derive(Clone)]
    struct Node {
        index: Option<usize>,
        lowlink: usize,
        on_stack: bool,
    }
    let mut nodes = vec![
        Node { index: None, lowlink: 0, on_stack: false };
        n
    ];
    let mut stack = Vec::new();
    let mut sccs = Vec::new();
    let mut counter = 0usize;

    for root in 0..n {
        if nodes[root].index.is_some() {
            continue;
        }
        // explicit DFS stack: (vertex, next successor position)
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if *pos == 0 {
                nodes[v].index = Some(counter);
                nodes[v].lowlink = counter;
                counter += 1;
                stack.push(v);
                nodes[v].on_stack = true;
            }
            if *pos < out[v].len() {
                let w = out[v][*pos];
                *pos += 1;
                match nodes[w].index {
                    None => call.push((w, 0)),
                    Some(wi) if nodes[w].on_stack => {
                        nodes[v].lowlink = nodes[v].lowlink.min(wi);
                    }
                    _ => {}
                }
            } else {
                if nodes[v].lowlink == nodes[v].index.unwrap() {
                    let mut scc = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        nodes[w].on_stack = false;
                        scc.push(w);
                        if w == v {
                            break;
                        }
                    }
                    sccs.push(scc);
                }
                let low = nodes[v].lowlink;
                call.pop();
                if let Some(&mut (p, _)) = call.last_mut() {
                    nodes[p].lowlink = nodes[p].lowlink.min(low);
                }
            }
        }
    }
    sccs
}

/// Period (gcd of circuit lengths) and cyclic partition of one strongly
/// connected component, via BFS levels: p = gcd of level(u)+1-level(v) over
/// arrows, classes are levels mod p anchored at the smallest vertex.
fn component_period(
    vertices: &[Symbol],
    arrows: &[(Symbol, Symbol)],
) -> (usize, Vec<Vec<Symbol>>) {
    use std::collections::HashMap;
    let root = vertices[0];
    let mut level: HashMap<Symbol, i64> = HashMap::new();
    level.insert(root, 0);
    let mut queue = std::collections::VecDeque::from([root]);
    let mut out: HashMap<Symbol, Vec<Symbol>> = HashMap::new();
    for &(a, b) in arrows {
        out.entry(a).or_default().push(b);
    }
    while let Some(v) = queue.pop_front() {
        let lv = level[&v];
        for &w in out.get(&v).into_iter().flatten() {
            if !level.contains_key(&w) {
                level.insert(w, lv + 1);
                queue.push_back(w);
            }
        }
    }
    let mut g: i64 = 0;
    for &(a, b) in arrows {
        g = gcd(g, (level[&a] + 1 - level[&b]).abs());
    }
    let p = if g == 0 { 1 } else { g as usize };
    let mut classes = vec![Vec::new(); p];
    for &v in vertices {
        let cls = level[&v].rem_euclid(p as i64) as usize;
        classes[cls].push(v);
    }
    for cls in &mut classes {
        cls.sort_unstable();
    }
    (p, classes)
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Johnson's elementary-circuit enumeration.  Each circuit is emitted once,
/// anchored at its minimal vertex (the outer loop visits anchors in
/// increasing order and restricts to vertices >= anchor).  Self-loops are
/// included.
fn johnson_circuits(n: usize, out: &[Vec<Symbol>]) -> Vec<Vec<Symbol>> {
    let mut result = Vec::new();
    for start in 0..n {
        let neighbors = |v: Symbol| -> Vec<Symbol> {
            let mut ns: Vec<Symbol> = out[v].iter().copied().filter(|&w| w >= start).collect();
            ns.sort_unstable();
            ns.reverse(); // popped in increasing order
            ns
        };
        let mut blocked = vec![false; n];
        blocked[start] = true;
        let mut blist: Vec<HashSet<Symbol>> = vec![HashSet::new(); n];
        let mut path = vec![start];
        let mut stack = vec![(start, neighbors(start))];
        let mut closed: HashSet<Symbol> = HashSet::new();

        fn unblock(v: Symbol, blocked: &mut [bool], blist: &mut [HashSet<Symbol>]) {
            let mut todo = vec![v];
            while let Some(v) = todo.pop() {
                blocked[v] = false;
                todo.extend(blist[v].drain());
            }
        }

        while let Some((v, next)) = stack.last_mut() {
            let v = *v;
            if let Some(w) = next.pop() {
                if w == start {
                    result.push(path.clone());
                    closed.extend(path.iter().copied());
                } else if !blocked[w] {
                    path.push(w);
                    blocked[w] = true;
                    closed.remove(&w);
                    stack.push((w, neighbors(w)));
                }
                continue;
            }
            if closed.contains(&v) {
                unblock(v, &mut blocked, &mut blist);
            } else {
                for w in neighbors(v) {
                    blist[w].insert(v);
                }
            }
            stack.pop();
            path.pop();
        }
    }
    result
}
