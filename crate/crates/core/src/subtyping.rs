//! Nominal subtyping between ground types, interval checks, and a finite
//! slice of the ground-type order for export.
//!
//! `s <: t` is decided by walking the superclass chain of `s`, substituting
//! arguments at each step, until `t` is met or `Object` is reached. Type
//! arguments are invariant.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use serde::Serialize;

use crate::classtable::{ClassTable, NULL, OBJECT};
use crate::syntax::TypeExpr;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SubtypeError {
    #[error("ill-formed type {ty}: {reason}")]
    IllFormedType { ty: String, reason: String },
}

/// A variable-free type whose every head exists in the table with the
/// right number of arguments.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct GroundType(TypeExpr);

impl GroundType {
    pub fn new(table: &ClassTable, t: TypeExpr) -> Result<Self, SubtypeError> {
        well_formed_ground(table, &t).map_err(|reason| SubtypeError::IllFormedType {
            ty: t.to_string(),
            reason,
        })?;
        Ok(GroundType(t))
    }

    /// Wraps a term already known to be ground and well-formed.
    pub(crate) fn trusted(t: TypeExpr) -> Self {
        debug_assert!(t.is_ground());
        GroundType(t)
    }

    pub fn null() -> Self {
        GroundType(TypeExpr::null())
    }

    pub fn object() -> Self {
        GroundType(TypeExpr::object())
    }

    pub fn expr(&self) -> &TypeExpr {
        &self.0
    }

    pub fn into_expr(self) -> TypeExpr {
        self.0
    }

    pub fn head(&self) -> &str {
        self.0.head().expect("ground types are applications")
    }

    pub fn args(&self) -> &[TypeExpr] {
        self.0.args()
    }

    pub fn depth(&self) -> usize {
        self.0.depth()
    }
}

impl fmt::Display for GroundType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

pub(crate) fn well_formed_ground(table: &ClassTable, t: &TypeExpr) -> Result<(), String> {
    match t {
        TypeExpr::Var(v) => Err(format!("type variable {v} in a ground position")),
        TypeExpr::App(name, args) => {
            let arity = table
                .arity(name)
                .ok_or_else(|| format!("unknown class {name}"))?;
            if arity != args.len() {
                return Err(format!(
                    "class {name} expects {arity} type argument(s) but got {}",
                    args.len()
                ));
            }
            args.iter().try_for_each(|a| well_formed_ground(table, a))
        }
    }
}

/// The superclass chain of `t`, starting with `t` itself and ending at `Object`.
///
/// `Null` has no chain beyond itself. The chain is finite because the
/// declared-extends relation is acyclic.
pub fn superclass_chain(table: &ClassTable, t: &GroundType) -> Vec<GroundType> {
    let mut chain = vec![t.clone()];
    let mut cur = t.expr().clone();
    while let TypeExpr::App(head, args) = &cur {
        if head == OBJECT || head == NULL {
            break;
        }
        cur = table
            .superclass_of(head, args)
            .expect("table invariants hold for ground types");
        chain.push(GroundType::trusted(cur.clone()));
    }
    chain
}

/// Ground nominal subtyping.
pub fn is_subtype(table: &ClassTable, s: &GroundType, t: &GroundType) -> bool {
    if s == t || s.head() == NULL || (t.head() == OBJECT && t.args().is_empty()) {
        return true;
    }
    if t.head() == NULL {
        return false;
    }
    let mut cur = s.expr().clone();
    loop {
        if &cur == t.expr() {
            return true;
        }
        match &cur {
            TypeExpr::App(head, args) if head != OBJECT => {
                cur = table
                    .superclass_of(head, args)
                    .expect("table invariants hold for ground types");
            }
            _ => return false,
        }
    }
}

/// Checked variant of [`is_subtype`] for raw terms.
pub fn is_subtype_expr(
    table: &ClassTable,
    s: &TypeExpr,
    t: &TypeExpr,
) -> Result<bool, SubtypeError> {
    let s = GroundType::new(table, s.clone())?;
    let t = GroundType::new(table, t.clone())?;
    Ok(is_subtype(table, &s, &t))
}

/// `[a, b]` is an interval type when there is a subtyping path from `a` up to `b`.
pub fn is_interval(table: &ClassTable, a: &GroundType, b: &GroundType) -> bool {
    is_subtype(table, a, b)
}

/// All ground types of nesting depth at most `depth`.
pub fn enumerate_ground(table: &ClassTable, depth: usize) -> BTreeSet<GroundType> {
    let mut level: BTreeSet<TypeExpr> = table
        .classes()
        .filter(|c| c.arity() == 0)
        .map(|c| TypeExpr::class(c.name.clone()))
        .collect();
    for _ in 0..depth {
        let prev: Vec<TypeExpr> = level.iter().cloned().collect();
        let mut next: BTreeSet<TypeExpr> = level
            .iter()
            .filter(|t| t.args().is_empty())
            .cloned()
            .collect();
        for class in table.classes().filter(|c| c.arity() > 0) {
            for args in tuples(&prev, class.arity()) {
                next.insert(TypeExpr::App(class.name.clone(), args));
            }
        }
        level = next;
    }
    level.into_iter().map(GroundType::trusted).collect()
}

fn tuples(items: &[TypeExpr], k: usize) -> Vec<Vec<TypeExpr>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                items.iter().map(move |it| {
                    let mut v = prefix.clone();
                    v.push(it.clone());
                    v
                })
            })
            .collect();
    }
    out
}

/// Finite slice of the ground-type order: the types of [`enumerate_ground`]
/// with one edge from each type to the nearest type on its superclass chain
/// that is also in the slice, plus `Null` below every type without a subtype.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundGraph {
    pub nodes: BTreeSet<GroundType>,
    pub edges: BTreeSet<(GroundType, GroundType)>,
}

impl GroundGraph {
    pub fn build(table: &ClassTable, depth: usize) -> Self {
        let nodes = enumerate_ground(table, depth);
        let mut edges = BTreeSet::new();
        for n in &nodes {
            if n.head() == NULL || n.head() == OBJECT {
                continue;
            }
            let chain = superclass_chain(table, n);
            if let Some(sup) = chain.iter().skip(1).find(|t| nodes.contains(*t)) {
                edges.insert((n.clone(), sup.clone()));
            }
        }
        let has_sub: BTreeSet<&GroundType> = edges.iter().map(|(_, sup)| sup).collect();
        let minimal: Vec<GroundType> = nodes
            .iter()
            .filter(|n| n.head() != NULL && !has_sub.contains(n))
            .cloned()
            .collect();
        for n in minimal {
            edges.insert((GroundType::null(), n));
        }
        GroundGraph { nodes, edges }
    }

    /// Reflexive-transitive reachability over the edge set.
    pub fn reachable(&self) -> BTreeSet<(GroundType, GroundType)> {
        let mut succ: BTreeMap<&GroundType, Vec<&GroundType>> = BTreeMap::new();
        for (a, b) in &self.edges {
            succ.entry(a).or_default().push(b);
        }
        let mut out = BTreeSet::new();
        for start in &self.nodes {
            let mut stack = vec![start];
            let mut seen = BTreeSet::new();
            while let Some(n) = stack.pop() {
                if seen.insert(n) {
                    out.insert((start.clone(), n.clone()));
                    stack.extend(succ.get(n).into_iter().flatten().copied());
                }
            }
        }
        out
    }

    /// Graphviz rendering with nodes and edges in lexicographic order of
    /// their rendered text.
    pub fn to_dot(&self) -> String {
        let mut nodes: Vec<String> = self.nodes.iter().map(|n| n.to_string()).collect();
        nodes.sort();
        let mut edges: Vec<(String, String)> = self
            .edges
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        edges.sort();

        let mut out = String::from("digraph subtyping {\n");
        for n in &nodes {
            let _ = writeln!(out, "  \"{n}\";");
        }
        for (a, b) in &edges {
            let _ = writeln!(out, "  \"{a}\" -> \"{b}\";");
        }
        out.push_str("}\n");
        out
    }
}

/// DOT export of the depth-bounded ground-type graph.
pub fn export_graph(table: &ClassTable, depth: usize) -> String {
    GroundGraph::build(table, depth).to_dot()
}
