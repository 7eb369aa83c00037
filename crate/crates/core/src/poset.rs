//! Finite posets, monotone maps, down-closed and convex subsets.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PosetError {
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("order is not antisymmetric: `{0}` and `{1}` are mutually related")]
    NotAntisymmetric(String, String),
    #[error("operands live over different base posets")]
    BaseMismatch,
    #[error("map is not monotone: `{0}` <= `{1}` but images are unordered")]
    NotMonotone(String, String),
    #[error("map is not total: no image for `{0}`")]
    NotTotal(String),
    #[error("`{0}` is not down-closed")]
    NotDownClosed(String),
    #[error("`{0}` is not convex")]
    NotConvex(String),
}

/// A finite partial order. Elements are kept sorted; the order is a closed
/// boolean matrix over element indices.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FinPoset {
    names: Vec<String>,
    leq: Vec<Vec<bool>>,
}

impl fmt::Debug for FinPoset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut pairs = Vec::new();
        for i in 0..self.len() {
            for j in 0..self.len() {
                if i != j && self.leq[i][j] {
                    pairs.push(format!("{}<={}", self.names[i], self.names[j]));
                }
            }
        }
        write!(f, "FinPoset{{{:?}; {}}}", self.names, pairs.join(", "))
    }
}

/// Builds the reflexive-transitive closure of `pairs` over `elements`.
pub fn validate_poset<S: AsRef<str>>(
    elements: impl IntoIterator<Item = S>,
    pairs: &[(S, S)],
) -> Result<FinPoset, PosetError> {
    let mut names: Vec<String> = elements.into_iter().map(|s| s.as_ref().to_string()).collect();
    names.sort();
    names.dedup();
    let index: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let n = names.len();
    let mut leq = vec![vec![false; n]; n];
    for (i, row) in leq.iter_mut().enumerate() {
        row[i] = true;
    }
    for (a, b) in pairs {
        let ia = *index.get(a.as_ref()).ok_or_else(|| PosetError::UnknownElement(a.as_ref().to_string()))?;
        let ib = *index.get(b.as_ref()).ok_or_else(|| PosetError::UnknownElement(b.as_ref().to_string()))?;
        leq[ia][ib] = true;
    }
    FinPoset::from_relation(names, leq)
}

impl FinPoset {
    /// Closes `rel` (indexed like `names`, which must be sorted and distinct).
    pub(crate) fn from_relation(names: Vec<String>, mut leq: Vec<Vec<bool>>) -> Result<FinPoset, PosetError> {
        let n = names.len();
        for (i, row) in leq.iter_mut().enumerate() {
            row[i] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if leq[i][k] {
                    for j in 0..n {
                        if leq[k][j] {
                            leq[i][j] = true;
                        }
                    }
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if leq[i][j] && leq[j][i] {
                    return Err(PosetError::NotAntisymmetric(names[i].clone(), names[j].clone()));
                }
            }
        }
        Ok(FinPoset { names, leq })
    }

    pub fn discrete<S: AsRef<str>>(elements: impl IntoIterator<Item = S>) -> FinPoset {
        validate_poset(elements, &[]).expect("discrete order is antisymmetric")
    }

    /// The one-element poset `{•}`.
    pub fn one() -> FinPoset {
        FinPoset::discrete(["•"])
    }

    /// Chain in the given order (names must be distinct).
    pub fn chain<S: AsRef<str>>(elements: &[S]) -> Result<FinPoset, PosetError> {
        let pairs: Vec<(&str, &str)> = elements.windows(2).map(|w| (w[0].as_ref(), w[1].as_ref())).collect();
        validate_poset(elements.iter().map(|s| s.as_ref()), &pairs)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn elements(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, id: &str) -> Result<usize, PosetError> {
        self.names.binary_search_by(|n| n.as_str().cmp(id)).map_err(|_| PosetError::UnknownElement(id.to_string()))
    }

    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.leq[i][j]
    }

    pub fn leq_ids(&self, a: &str, b: &str) -> Result<bool, PosetError> {
        Ok(self.leq(self.index_of(a)?, self.index_of(b)?))
    }

    pub fn is_discrete(&self) -> bool {
        (0..self.len()).all(|i| (0..self.len()).all(|j| i == j || !self.leq[i][j]))
    }

    /// Strict covering-free listing of all related pairs `(i, j)` with `i != j`.
    pub fn strict_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.len() {
            for j in 0..self.len() {
                if i != j && self.leq[i][j] {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn indices(&self, ids: &[&str]) -> Result<BTreeSet<usize>, PosetError> {
        ids.iter().map(|s| self.index_of(s)).collect()
    }

    pub(crate) fn down_closure_idx(&self, s: &BTreeSet<usize>) -> BTreeSet<usize> {
        (0..self.len()).filter(|&z| s.iter().any(|&x| self.leq[z][x])).collect()
    }

    pub(crate) fn convex_hull_idx(&self, s: &BTreeSet<usize>) -> BTreeSet<usize> {
        (0..self.len()).filter(|&z| s.iter().any(|&x| self.leq[x][z]) && s.iter().any(|&y| self.leq[z][y])).collect()
    }

    pub fn is_down_closed(&self, s: &BTreeSet<usize>) -> bool {
        s.iter().all(|&x| (0..self.len()).all(|z| !self.leq[z][x] || s.contains(&z)))
    }

    pub fn is_convex(&self, s: &BTreeSet<usize>) -> bool {
        self.convex_hull_idx(s) == *s
    }

    /// Minimal elements of `s`.
    pub fn minimal(&self, s: &BTreeSet<usize>) -> BTreeSet<usize> {
        s.iter().copied().filter(|&x| s.iter().all(|&y| y == x || !self.leq[y][x])).collect()
    }

    /// Maximal elements of `s`.
    pub fn maximal(&self, s: &BTreeSet<usize>) -> BTreeSet<usize> {
        s.iter().copied().filter(|&x| s.iter().all(|&y| y == x || !self.leq[x][y])).collect()
    }
}

/// Order-preserving map between finite posets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonotoneMap {
    domain: Arc<FinPoset>,
    codomain: Arc<FinPoset>,
    graph: Vec<usize>,
}

impl MonotoneMap {
    pub fn new(domain: Arc<FinPoset>, codomain: Arc<FinPoset>, graph: Vec<usize>) -> Result<Self, PosetError> {
        if graph.len() != domain.len() {
            let missing = domain.name(graph.len().min(domain.len().saturating_sub(1)));
            return Err(PosetError::NotTotal(missing.to_string()));
        }
        for &g in &graph {
            if g >= codomain.len() {
                return Err(PosetError::UnknownElement(format!("#{g}")));
            }
        }
        for i in 0..domain.len() {
            for j in 0..domain.len() {
                if domain.leq(i, j) && !codomain.leq(graph[i], graph[j]) {
                    return Err(PosetError::NotMonotone(domain.name(i).into(), domain.name(j).into()));
                }
            }
        }
        Ok(MonotoneMap { domain, codomain, graph })
    }

    /// Builds a map from `(domain id, codomain id)` pairs.
    pub fn from_pairs<S: AsRef<str>>(
        domain: Arc<FinPoset>,
        codomain: Arc<FinPoset>,
        pairs: &[(S, S)],
    ) -> Result<Self, PosetError> {
        let mut graph = vec![usize::MAX; domain.len()];
        for (a, b) in pairs {
            graph[domain.index_of(a.as_ref())?] = codomain.index_of(b.as_ref())?;
        }
        if let Some(i) = graph.iter().position(|&g| g == usize::MAX) {
            return Err(PosetError::NotTotal(domain.name(i).to_string()));
        }
        MonotoneMap::new(domain, codomain, graph)
    }

    pub fn identity(p: Arc<FinPoset>) -> Self {
        let graph = (0..p.len()).collect();
        MonotoneMap { domain: p.clone(), codomain: p, graph }
    }

    pub fn domain(&self) -> &Arc<FinPoset> {
        &self.domain
    }

    pub fn codomain(&self) -> &Arc<FinPoset> {
        &self.codomain
    }

    pub fn apply(&self, i: usize) -> usize {
        self.graph[i]
    }

    pub fn compose(&self, then: &MonotoneMap) -> Result<MonotoneMap, PosetError> {
        if !same_base(&self.codomain, &then.domain) {
            return Err(PosetError::BaseMismatch);
        }
        Ok(MonotoneMap {
            domain: self.domain.clone(),
            codomain: then.codomain.clone(),
            graph: self.graph.iter().map(|&g| then.graph[g]).collect(),
        })
    }
}

pub(crate) fn same_base(a: &Arc<FinPoset>, b: &Arc<FinPoset>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// A down-closed subset of a base poset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DownSet {
    base: Arc<FinPoset>,
    members: BTreeSet<usize>,
}

/// An order-convex subset of a base poset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvexSet {
    base: Arc<FinPoset>,
    members: BTreeSet<usize>,
}

macro_rules! subset_accessors {
    ($t:ty) => {
        impl $t {
            pub fn base(&self) -> &Arc<FinPoset> {
                &self.base
            }

            pub fn members(&self) -> &BTreeSet<usize> {
                &self.members
            }

            pub fn member_ids(&self) -> Vec<&str> {
                self.members.iter().map(|&i| self.base.name(i)).collect()
            }

            pub fn contains(&self, id: &str) -> bool {
                self.base.index_of(id).map(|i| self.members.contains(&i)).unwrap_or(false)
            }
        }
    };
}

subset_accessors!(DownSet);
subset_accessors!(ConvexSet);

impl DownSet {
    pub fn from_members(base: Arc<FinPoset>, members: BTreeSet<usize>) -> Result<Self, PosetError> {
        if !base.is_down_closed(&members) {
            let ids: Vec<&str> = members.iter().map(|&i| base.name(i)).collect();
            return Err(PosetError::NotDownClosed(ids.join(",")));
        }
        Ok(DownSet { base, members })
    }
}

impl ConvexSet {
    pub fn from_members(base: Arc<FinPoset>, members: BTreeSet<usize>) -> Result<Self, PosetError> {
        if !base.is_convex(&members) {
            let ids: Vec<&str> = members.iter().map(|&i| base.name(i)).collect();
            return Err(PosetError::NotConvex(ids.join(",")));
        }
        Ok(ConvexSet { base, members })
    }
}

pub fn down_closure(p: &Arc<FinPoset>, s: &[&str]) -> Result<DownSet, PosetError> {
    let idx = p.indices(s)?;
    Ok(DownSet { base: p.clone(), members: p.down_closure_idx(&idx) })
}

pub fn convex_hull(p: &Arc<FinPoset>, s: &[&str]) -> Result<ConvexSet, PosetError> {
    let idx = p.indices(s)?;
    Ok(ConvexSet { base: p.clone(), members: p.convex_hull_idx(&idx) })
}

pub fn egli_milner_leq(p: &Arc<FinPoset>, a: &ConvexSet, b: &ConvexSet) -> Result<bool, PosetError> {
    if !same_base(p, &a.base) || !same_base(p, &b.base) {
        return Err(PosetError::BaseMismatch);
    }
    Ok(egli_milner_by(&a.members, &b.members, |x, y| p.leq(*x, *y)))
}

/// Egli-Milner comparison of two finite sets under an arbitrary order.
pub fn egli_milner_by<T>(a: &BTreeSet<T>, b: &BTreeSet<T>, mut leq: impl FnMut(&T, &T) -> bool) -> bool {
    a.iter().all(|x| b.iter().any(|y| leq(x, y))) && b.iter().all(|y| a.iter().any(|x| leq(x, y)))
}

pub fn downset_leq(a: &DownSet, b: &DownSet) -> Result<bool, PosetError> {
    if !same_base(&a.base, &b.base) {
        return Err(PosetError::BaseMismatch);
    }
    Ok(a.members.is_subset(&b.members))
}

/// Carrier `labels × P`, labels discretely ordered. Element `(a, x)` is named `a.x`.
pub fn product_with_discrete<S: AsRef<str>>(labels: &[S], p: &FinPoset) -> FinPoset {
    let mut labels: Vec<&str> = labels.iter().map(|s| s.as_ref()).collect();
    labels.sort();
    labels.dedup();
    let mut cells: Vec<(String, &str, usize)> = Vec::new();
    for a in &labels {
        for i in 0..p.len() {
            cells.push((product_name(a, p.name(i)), a, i));
        }
    }
    cells.sort_by(|x, y| x.0.cmp(&y.0));
    let n = cells.len();
    let mut leq = vec![vec![false; n]; n];
    for (u, (_, a, i)) in cells.iter().enumerate() {
        for (v, (_, b, j)) in cells.iter().enumerate() {
            leq[u][v] = a == b && p.leq(*i, *j);
        }
    }
    let names = cells.into_iter().map(|c| c.0).collect();
    FinPoset::from_relation(names, leq).expect("product of posets is a poset")
}

pub fn product_name(label: &str, x: &str) -> String {
    format!("{label}.{x}")
}

/// All partial orders on `{0, .., n-1}` (labelled, not up to isomorphism).
pub fn all_posets(n: usize) -> Vec<FinPoset> {
    let names: Vec<String> = (0..n).map(|i| i.to_string()).collect();
    let off: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).collect();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << off.len()) {
        let mut leq = vec![vec![false; n]; n];
        for (i, row) in leq.iter_mut().enumerate() {
            row[i] = true;
        }
        for (b, &(i, j)) in off.iter().enumerate() {
            if mask >> b & 1 == 1 {
                leq[i][j] = true;
            }
        }
        let closed = (0..n).all(|i| (0..n).all(|j| (0..n).all(|k| !(leq[i][j] && leq[j][k]) || leq[i][k])));
        let anti = (0..n).all(|i| (0..n).all(|j| i == j || !(leq[i][j] && leq[j][i])));
        if closed && anti {
            out.push(FinPoset { names: names.clone(), leq });
        }
    }
    out
}

/// All subsets of the carrier satisfying `keep`.
fn subsets_where(p: &FinPoset, keep: impl Fn(&BTreeSet<usize>) -> bool) -> Vec<BTreeSet<usize>> {
    assert!(p.len() < 24, "subset enumeration over {} elements", p.len());
    (0u32..(1u32 << p.len()))
        .map(|mask| (0..p.len()).filter(|i| mask >> i & 1 == 1).collect::<BTreeSet<_>>())
        .filter(|s| keep(s))
        .collect()
}

pub fn all_convex_sets(p: &Arc<FinPoset>) -> Vec<ConvexSet> {
    subsets_where(p, |s| p.is_convex(s)).into_iter().map(|members| ConvexSet { base: p.clone(), members }).collect()
}

pub fn all_down_sets(p: &Arc<FinPoset>) -> Vec<DownSet> {
    subsets_where(p, |s| p.is_down_closed(s)).into_iter().map(|members| DownSet { base: p.clone(), members }).collect()
}
