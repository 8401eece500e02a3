use std::collections::{BTreeMap, BTreeSet};

use super::{NonGroundProgram, Pred};

/// Predicate dependency graph. Edges point from body predicate to head
/// predicate; nodes are indexed in sorted predicate order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DependencyGraph {
    pub nodes: Vec<Pred>,
    pub pos_edges: BTreeSet<(usize, usize)>,
    pub neg_edges: BTreeSet<(usize, usize)>,
}

impl DependencyGraph {
    /// Builds a graph over `n` nodes named `v0..v{n-1}` (zero padded so that
    /// name order equals index order).
    pub fn synthetic(
        n: usize,
        pos_edges: impl IntoIterator<Item = (usize, usize)>,
        neg_edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Self {
        let width = n.to_string().len();
        let nodes = (0..n)
            .map(|i| Pred {
                name: format!("v{i:0width$}"),
                arity: 0,
            })
            .collect();
        let pos_edges: BTreeSet<_> = pos_edges.into_iter().collect();
        let neg_edges: BTreeSet<_> = neg_edges.into_iter().collect();
        assert!(pos_edges
            .iter()
            .chain(&neg_edges)
            .all(|&(a, b)| a < n && b < n));
        DependencyGraph {
            nodes,
            pos_edges,
            neg_edges,
        }
    }

    pub fn index_of(&self, p: &Pred) -> Option<usize> {
        self.nodes.binary_search(p).ok()
    }

    /// Adjacency lists over positive edges, plus negative ones if asked.
    pub fn adjacency(&self, with_negative: bool) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        let neg = if with_negative {
            Some(&self.neg_edges)
        } else {
            None
        };
        for &(a, b) in self.pos_edges.iter().chain(neg.into_iter().flatten()) {
            adj[a].push(b);
        }
        for list in adj.iter_mut() {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }
}

pub fn dependency_graph(p: &NonGroundProgram) -> DependencyGraph {
    let nodes: Vec<Pred> = p.predicates.iter().cloned().collect();
    let index: BTreeMap<&Pred, usize> = nodes.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let mut pos_edges = BTreeSet::new();
    let mut neg_edges = BTreeSet::new();
    for rule in &p.rules {
        for h in &rule.head {
            let hi = index[&h.pred()];
            for b in &rule.pos_body {
                pos_edges.insert((index[&b.pred()], hi));
            }
            for b in &rule.neg_body {
                neg_edges.insert((index[&b.pred()], hi));
            }
        }
    }
    DependencyGraph {
        nodes,
        pos_edges,
        neg_edges,
    }
}

/// Strongly connected components (iterative Tarjan). Members of each
/// component are sorted, and components are ordered by their least member.
pub fn tarjan_scc(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    const UNVISITED: usize = usize::MAX;
    let n = adj.len();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut counter = 0;
    // (node, next edge offset)
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        call.push((root, 0));
        while let Some(&mut (v, ref mut next)) = call.last_mut() {
            if *next == 0 {
                index[v] = counter;
                low[v] = counter;
                counter += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if let Some(&w) = adj[v].get(*next) {
                *next += 1;
                if index[w] == UNVISITED {
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                comps.push(comp);
            }
        }
    }
    comps.sort_unstable_by_key(|c| c[0]);
    comps
}

/// Components over positive and negative edges.
pub fn scc(g: &DependencyGraph) -> Vec<Vec<usize>> {
    tarjan_scc(&g.adjacency(true))
}

/// Components of the positive dependency graph.
pub fn scc_positive(g: &DependencyGraph) -> Vec<Vec<usize>> {
    tarjan_scc(&g.adjacency(false))
}

/// Number of head-cycle-free components among `sccs` (normally
/// [`scc_positive`]): a component is HCF unless some rule has two distinct
/// head predicates inside it.
pub fn hcf_components(p: &NonGroundProgram, g: &DependencyGraph, sccs: &[Vec<usize>]) -> usize {
    let mut comp_of = vec![usize::MAX; g.nodes.len()];
    for (ci, comp) in sccs.iter().enumerate() {
        for &v in comp {
            comp_of[v] = ci;
        }
    }
    let mut violated = vec![false; sccs.len()];
    for rule in p.rules.iter().filter(|r| r.is_disjunctive()) {
        let heads: BTreeSet<usize> = rule
            .head
            .iter()
            .filter_map(|a| g.index_of(&a.pred()))
            .collect();
        let mut seen = BTreeSet::new();
        for h in heads {
            let c = comp_of[h];
            if c != usize::MAX && !seen.insert(c) {
                violated[c] = true;
            }
        }
    }
    violated.iter().filter(|v| !**v).count()
}

/// True iff no negative edge lies inside a strongly connected component.
pub fn is_stratified(g: &DependencyGraph) -> bool {
    let comps = scc(g);
    let mut comp_of = vec![0; g.nodes.len()];
    for (ci, comp) in comps.iter().enumerate() {
        for &v in comp {
            comp_of[v] = ci;
        }
    }
    g.neg_edges.iter().all(|&(a, b)| comp_of[a] != comp_of[b])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonground::parse_nonground;

    fn graph(src: &str) -> (NonGroundProgram, DependencyGraph) {
        let p = parse_nonground(src.as_bytes()).unwrap();
        let g = dependency_graph(&p);
        (p, g)
    }

    fn names(g: &DependencyGraph, edges: &BTreeSet<(usize, usize)>) -> Vec<(String, String)> {
        edges
            .iter()
            .map(|&(a, b)| (g.nodes[a].name.clone(), g.nodes[b].name.clone()))
            .collect()
    }

    #[test]
    fn positive_edge() {
        let (_, g) = graph("q(X) :- p(X).");
        assert_eq!(names(&g, &g.pos_edges), vec![("p".into(), "q".into())]);
        assert!(g.neg_edges.is_empty());
    }

    #[test]
    fn negative_self_loop() {
        let (_, g) = graph("p(X) :- not p(X).");
        assert_eq!(names(&g, &g.neg_edges), vec![("p".into(), "p".into())]);
        assert!(!is_stratified(&g));
    }

    #[test]
    fn reach_edges() {
        let (_, g) = graph(
            "reach(X,Y) :- edge(X,Y). reach(X,Z) :- reach(X,Y), edge(Y,Z). p(f(X)) :- reach(X,X).",
        );
        assert_eq!(
            names(&g, &g.pos_edges),
            vec![
                ("edge".into(), "reach".into()),
                ("reach".into(), "p".into()),
                ("reach".into(), "reach".into())
            ]
        );
    }

    #[test]
    fn scc_basics() {
        let g = DependencyGraph::synthetic(4, [], []);
        assert_eq!(scc(&g), vec![vec![0], vec![1], vec![2], vec![3]]);
        let g = DependencyGraph::synthetic(3, [(0, 1), (1, 2)], [(2, 0)]);
        assert_eq!(scc(&g), vec![vec![0, 1, 2]]);
        assert_eq!(scc_positive(&g), vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn hcf_examples() {
        let (p, g) = graph("a | b. a :- b. b :- a.");
        let pos = scc_positive(&g);
        assert_eq!(pos.len(), 1);
        assert_eq!(hcf_components(&p, &g, &pos), 0);

        let (p, g) = graph("a | b. a :- c.");
        let pos = scc_positive(&g);
        assert_eq!(hcf_components(&p, &g, &pos), pos.len());

        let (p, g) = graph("a :- b. b :- a. c :- a.");
        let pos = scc_positive(&g);
        assert_eq!(hcf_components(&p, &g, &pos), pos.len());
    }

    #[test]
    fn stratification_examples() {
        assert!(is_stratified(&graph("a :- b. b :- c.").1));
        assert!(!is_stratified(&graph("p :- not p.").1));
        assert!(!is_stratified(&graph("p :- not q. q :- r. r :- p.").1));
        assert!(is_stratified(&graph("p :- not q. q :- r.").1));
        assert!(is_stratified(&DependencyGraph::synthetic(0, [], [])));
    }
}
