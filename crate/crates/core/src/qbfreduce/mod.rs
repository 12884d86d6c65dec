//! Compiles a prenex CNF formula into an area protection instance on a
//! general graph: a diamond gadget per variable and a two-part gadget per
//! clause.
//!
//! Only the gadget shapes are prescribed. Lengths of the joining paths are
//! chosen here and recorded in the emitted layout.

mod qdimacs;

pub use qdimacs::{parse_qdimacs, QbfFormula, QdimacsError, QdimacsErrorKind, Quantifier};

use serde::{Deserialize, Serialize};

use crate::board::Graph;
use crate::model::Instance;

/// Geometry of one variable gadget. Vertex lists are in path order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableGadget {
    pub variable: u32,
    pub quantifier: Quantifier,
    /// Position of the variable's ∀∃ pair in the prefix, from 1.
    pub pair_index: usize,
    pub left: usize,
    pub right: usize,
    /// `left`, the m upper inner vertices, `right`.
    pub upper: Vec<usize>,
    pub lower: Vec<usize>,
    /// Agent names mapped to their start vertices.
    pub agents: Vec<(String, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClauseGadget {
    pub index: usize,
    pub literals: Vec<i32>,
    /// The defender's path, its start first.
    pub path: Vec<usize>,
    /// (variable, path vertex, gadget entry vertex).
    pub entries: Vec<(u32, usize, usize)>,
    pub defender: usize,
    pub attacker: usize,
    pub target: usize,
    /// Defender hops to the target on the empty graph.
    pub defender_distance: usize,
    /// Attacker hops to the target along its private path.
    pub k: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GadgetLayout {
    pub variables: Vec<VariableGadget>,
    pub clauses: Vec<ClauseGadget>,
    /// Internal vertices of each path added to connect otherwise separate
    /// gadgets.
    pub linking_chains: Vec<Vec<usize>>,
    pub figure_derived: bool,
}

pub struct Reduction {
    pub instance: Instance<Graph>,
    pub layout: GadgetLayout,
}

struct Builder {
    graph: Graph,
    attackers: Vec<(usize, usize)>,
    defenders: Vec<usize>,
}

impl Builder {
    fn vertex(&mut self) -> usize {
        self.graph.add_vertex()
    }

    /// A path from `from` of `hops` edges; returns its far end. The first
    /// vertex of the path is `from` itself.
    fn tail(&mut self, from: usize, hops: usize) -> Vec<usize> {
        let mut path = vec![from];
        for _ in 0..hops {
            let v = self.vertex();
            self.graph.add_edge(*path.last().unwrap(), v);
            path.push(v);
        }
        path
    }

    fn link(&mut self, a: usize, b: usize, internal: usize) -> Vec<usize> {
        let mut path = self.tail(a, internal);
        self.graph.add_edge(*path.last().unwrap(), b);
        path.remove(0);
        path
    }
}

/// Pair index per prefix position: starts at 1 and advances at every ∀
/// that directly follows an ∃.
pub fn pair_indices(prefix: &[(Quantifier, u32)]) -> Vec<usize> {
    let mut pair = 1;
    let mut out = Vec::with_capacity(prefix.len());
    for (i, &(q, _)) in prefix.iter().enumerate() {
        if i > 0 && q == Quantifier::Forall && prefix[i - 1].0 == Quantifier::Exists {
            pair += 1;
        }
        out.push(pair);
    }
    out
}

pub fn reduce_to_app(f: &QbfFormula) -> Reduction {
    let m = f.clauses.len();
    let n = f.variable_count();
    let path_len = n / 2 + 1;
    let pairs = pair_indices(&f.prefix);
    let mut b = Builder {
        graph: Graph::new(0),
        attackers: Vec::new(),
        defenders: Vec::new(),
    };

    let mut variables = Vec::with_capacity(n);
    for (&(quantifier, variable), &pair_index) in f.prefix.iter().zip(&pairs) {
        let left = b.vertex();
        let right = b.vertex();
        // A formula without clauses still gets one inner vertex per side so
        // the gadget's targets stay distinct.
        let inner_count = m.max(1);
        let side = |b: &mut Builder| {
            let inner = b.tail(left, inner_count);
            b.graph.add_edge(*inner.last().unwrap(), right);
            let mut full = inner;
            full.push(right);
            full
        };
        let upper = side(&mut b);
        let lower = side(&mut b);
        let mut agents = Vec::new();
        match quantifier {
            Quantifier::Exists => {
                // d_x1 approaches the left end; d_x2 the right end with a_x3
                // queued behind it; a_x1 and a_x2 enter at the far ends of
                // the upper and lower paths, aiming for their first inner
                // vertices.
                let d1 = *b.tail(left, pair_index).last().unwrap();
                let d2_path = b.tail(right, pair_index + 2);
                let d2 = d2_path[d2_path.len() - 2];
                let a3 = *d2_path.last().unwrap();
                let a1 = *b.tail(upper[inner_count], 2).last().unwrap();
                let a2 = *b.tail(lower[inner_count], 2).last().unwrap();
                b.attackers.push((a1, upper[1]));
                b.attackers.push((a2, lower[1]));
                b.attackers.push((a3, right));
                b.defenders.push(d1);
                b.defenders.push(d2);
                agents.extend([
                    ("a1".to_owned(), a1),
                    ("a2".to_owned(), a2),
                    ("a3".to_owned(), a3),
                    ("d1".to_owned(), d1),
                    ("d2".to_owned(), d2),
                ]);
            }
            Quantifier::Forall => {
                // The defender must reach the left end first; the attacker
                // comes in from the right, one hop slower at least.
                let d1 = *b.tail(left, pair_index + 1).last().unwrap();
                let hops = (pair_index + 1).saturating_sub(inner_count).max(1);
                let a1 = *b.tail(right, hops).last().unwrap();
                b.attackers.push((a1, left));
                b.defenders.push(d1);
                agents.extend([("a1".to_owned(), a1), ("d1".to_owned(), d1)]);
            }
        }
        variables.push(VariableGadget {
            variable,
            quantifier,
            pair_index,
            left,
            right,
            upper,
            lower,
            agents,
        });
    }

    let mut clauses = Vec::with_capacity(m);
    for (c, lits) in f.clauses.iter().enumerate() {
        let start = b.vertex();
        let path = b.tail(start, path_len - 1);
        let target = b.vertex();
        let mut entries = Vec::new();
        for &lit in lits {
            let var = lit.unsigned_abs();
            let Some(g) = variables.iter().find(|g| g.variable == var) else {
                continue;
            };
            let at = path[g.pair_index.min(path_len) - 1];
            let entry = if lit > 0 { g.upper[c + 1] } else { g.lower[c + 1] };
            b.graph.add_edge(at, entry);
            b.graph.add_edge(g.right, target);
            entries.push((var, at, entry));
        }
        b.defenders.push(start);
        clauses.push(ClauseGadget {
            index: c,
            literals: lits.clone(),
            path,
            entries,
            defender: start,
            attacker: usize::MAX,
            target,
            defender_distance: 0,
            k: 0,
        });
    }

    // Join any separate pieces, e.g. gadgets of variables no clause uses.
    let mut linking_chains = Vec::new();
    let chain = m + path_len + 4;
    loop {
        let dist = b.graph.distances(0);
        let Some(far) = dist.iter().position(Option::is_none) else {
            break;
        };
        linking_chains.push(b.link(0, far, chain));
    }

    // Clause attackers race the clause defenders on private paths, losing
    // by exactly one step when the defender takes a shortest route.
    for clause in &mut clauses {
        let d = b.graph.distances(clause.defender)[clause.target].expect("graph is connected");
        let k = d + 1;
        let path = b.tail(clause.target, k);
        let attacker = *path.last().unwrap();
        b.attackers.push((attacker, clause.target));
        clause.attacker = attacker;
        clause.defender_distance = d;
        clause.k = k;
    }

    let instance = Instance {
        board: b.graph,
        attacker_starts: b.attackers.iter().map(|a| a.0).collect(),
        attacker_targets: b.attackers.iter().map(|a| a.1).collect(),
        defender_starts: b.defenders,
        time_limit: u32::try_from(4 * (n + m) + 16).unwrap_or(u32::MAX),
    };
    Reduction {
        instance,
        layout: GadgetLayout {
            variables,
            clauses,
            linking_chains,
            figure_derived: true,
        },
    }
}
