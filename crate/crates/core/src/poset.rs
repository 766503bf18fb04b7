//! Domains of doubly bounded endomaps over finite partial orders.
//!
//! For a poset `P` and endomaps `l`, `u`, the domain is the set of `x` with
//! `l(x) <= x <= u(x)` (either side optional, either side optionally
//! strict). When the bounding map is the restricted function itself, the
//! domain can also be read as a greatest fixed point: `x` is kept only if
//! `x < g(x)` and `x` itself stays in the domain. [`recursive_domain_gfp`]
//! computes that reading by iteration; [`theorem_check`] compares it with the
//! one-shot [`dfbf_domain`].

use std::collections::{BTreeMap, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Largest carrier supported; element sets are stored as a 64-bit mask.
pub const MAX_ELEMENTS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PosetError {
    #[error("order is not antisymmetric: cycle {}", .0.join(" < "))]
    CyclicOrder(Vec<String>),
    #[error("unknown element {0}")]
    UnknownElement(String),
    #[error("element {0} is listed twice")]
    DuplicateElement(String),
    #[error("poset has {size} elements; at most {MAX_ELEMENTS} are supported")]
    TooLarge { size: usize },
    #[error("map {map} has no image for element {element}")]
    NotTotal { map: String, element: String },
    #[error("a domain needs at least one bound")]
    NoBounds,
    #[error("map has {got} entries but the poset has {expected} elements")]
    SizeMismatch { expected: usize, got: usize },
    #[error("invalid poset file: {0}")]
    Json(String),
    #[error("no map named {0}")]
    UnknownMap(String),
}

/// Subset of a poset's carrier, as a bit mask over element indices.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElementSet(u64);

impl ElementSet {
    pub const EMPTY: ElementSet = ElementSet(0);

    pub fn full(n: usize) -> Self {
        if n >= 64 {
            ElementSet(u64::MAX)
        } else {
            ElementSet((1u64 << n) - 1)
        }
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn insert(&mut self, i: usize) {
        self.0 |= 1 << i;
    }

    pub fn intersect(self, other: ElementSet) -> ElementSet {
        ElementSet(self.0 & other.0)
    }

    pub fn is_subset(self, other: ElementSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..64).filter(move |&i| self.contains(i))
    }

    pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> Self {
        let mut s = ElementSet::EMPTY;
        indices.into_iter().for_each(|i| s.insert(i));
        s
    }
}

/// Finite partial order with a fully closed `<=` matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinitePoset {
    labels: Vec<String>,
    leq: Vec<bool>,
}

/// Result of checking the three order axioms on the closed matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrderAxioms {
    pub reflexive: bool,
    pub transitive: bool,
    pub antisymmetric: bool,
}

impl OrderAxioms {
    pub fn all(self) -> bool {
        self.reflexive && self.transitive && self.antisymmetric
    }
}

impl FinitePoset {
    /// Builds the reflexive-transitive closure of `covers`; `(a, b)` means `a <= b`.
    pub fn new<S: AsRef<str>>(elements: &[S], covers: &[(S, S)]) -> Result<Self, PosetError> {
        let labels: Vec<String> = elements.iter().map(|e| e.as_ref().to_string()).collect();
        if labels.len() > MAX_ELEMENTS {
            return Err(PosetError::TooLarge { size: labels.len() });
        }
        let mut index = BTreeMap::new();
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.as_str(), i).is_some() {
                return Err(PosetError::DuplicateElement(l.clone()));
            }
        }
        let lookup = |s: &str| {
            index
                .get(s)
                .copied()
                .ok_or_else(|| PosetError::UnknownElement(s.to_string()))
        };
        let edges = covers
            .iter()
            .map(|(a, b)| Ok((lookup(a.as_ref())?, lookup(b.as_ref())?)))
            .collect::<Result<Vec<_>, PosetError>>()?;
        Self::from_edges(labels, &edges)
    }

    fn from_edges(labels: Vec<String>, edges: &[(usize, usize)]) -> Result<Self, PosetError> {
        let n = labels.len();
        let mut leq = vec![false; n * n];
        for i in 0..n {
            leq[i * n + i] = true;
        }
        for &(a, b) in edges {
            leq[a * n + b] = true;
        }
        // Warshall
        for k in 0..n {
            for i in 0..n {
                if leq[i * n + k] {
                    for j in 0..n {
                        if leq[k * n + j] {
                            leq[i * n + j] = true;
                        }
                    }
                }
            }
        }
        let poset = FinitePoset { labels, leq };
        let axioms = poset.axioms();
        if !axioms.antisymmetric {
            return Err(PosetError::CyclicOrder(poset.find_cycle(edges)));
        }
        assert!(
            axioms.reflexive && axioms.transitive,
            "closure must be reflexive and transitive"
        );
        Ok(poset)
    }

    fn find_cycle(&self, edges: &[(usize, usize)]) -> Vec<String> {
        let n = self.len();
        let (a, b) = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .find(|&(i, j)| i != j && self.leq(i, j) && self.leq(j, i))
            .expect("antisymmetry violation has a witness");
        let mut path = self.path(edges, a, b);
        let back = self.path(edges, b, a);
        path.extend(&back[1..back.len() - 1]);
        path.into_iter().map(|i| self.labels[i].clone()).collect()
    }

    // shortest cover path from `from` to `to`, inclusive
    fn path(&self, edges: &[(usize, usize)], from: usize, to: usize) -> Vec<usize> {
        let mut prev = vec![usize::MAX; self.len()];
        let mut queue = VecDeque::from([from]);
        prev[from] = from;
        while let Some(x) = queue.pop_front() {
            if x == to {
                break;
            }
            for &(a, b) in edges {
                if a == x && prev[b] == usize::MAX {
                    prev[b] = x;
                    queue.push_back(b);
                }
            }
        }
        let mut path = vec![to];
        let mut cur = to;
        while cur != from {
            cur = prev[cur];
            path.push(cur);
        }
        path.reverse();
        path
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.leq[a * self.len() + b]
    }

    pub fn lt(&self, a: usize, b: usize) -> bool {
        a != b && self.leq(a, b)
    }

    pub fn carrier(&self) -> ElementSet {
        ElementSet::full(self.len())
    }

    pub fn axioms(&self) -> OrderAxioms {
        let n = self.len();
        let reflexive = (0..n).all(|i| self.leq(i, i));
        let antisymmetric =
            (0..n).all(|i| (0..n).all(|j| i == j || !(self.leq(i, j) && self.leq(j, i))));
        let transitive = (0..n).all(|i| {
            (0..n).all(|j| !self.leq(i, j) || (0..n).all(|k| !self.leq(j, k) || self.leq(i, k)))
        });
        OrderAxioms {
            reflexive,
            transitive,
            antisymmetric,
        }
    }

    /// Labels of the members of `set`, in carrier order.
    pub fn names(&self, set: ElementSet) -> Vec<&str> {
        set.iter().map(|i| self.labels[i].as_str()).collect()
    }
}

/// Total self-map on a poset's carrier, stored by index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EndoMap {
    image: Vec<usize>,
}

impl EndoMap {
    pub fn new(poset: &FinitePoset, image: Vec<usize>) -> Result<Self, PosetError> {
        if image.len() != poset.len() {
            return Err(PosetError::SizeMismatch {
                expected: poset.len(),
                got: image.len(),
            });
        }
        if let Some(&bad) = image.iter().find(|&&i| i >= poset.len()) {
            return Err(PosetError::UnknownElement(format!("#{bad}")));
        }
        Ok(EndoMap { image })
    }

    pub fn identity(poset: &FinitePoset) -> Self {
        EndoMap {
            image: (0..poset.len()).collect(),
        }
    }

    /// Builds a map from label pairs; every element must have an image.
    pub fn from_labels(
        poset: &FinitePoset,
        name: &str,
        pairs: &BTreeMap<String, String>,
    ) -> Result<Self, PosetError> {
        for key in pairs.keys() {
            poset
                .index_of(key)
                .ok_or_else(|| PosetError::UnknownElement(key.clone()))?;
        }
        let image = poset
            .labels()
            .iter()
            .map(|l| {
                let target = pairs.get(l).ok_or_else(|| PosetError::NotTotal {
                    map: name.to_string(),
                    element: l.clone(),
                })?;
                poset
                    .index_of(target)
                    .ok_or_else(|| PosetError::UnknownElement(target.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(EndoMap { image })
    }

    pub fn apply(&self, x: usize) -> usize {
        self.image[x]
    }

    pub fn images(&self) -> &[usize] {
        &self.image
    }
}

/// Which bounds restrict the domain, and whether each comparison is strict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainSpec {
    pub lower: Option<EndoMap>,
    pub upper: Option<EndoMap>,
    pub strict_lower: bool,
    pub strict_upper: bool,
}

impl DomainSpec {
    pub fn new(
        lower: Option<EndoMap>,
        upper: Option<EndoMap>,
        strict_lower: bool,
        strict_upper: bool,
    ) -> Result<Self, PosetError> {
        if lower.is_none() && upper.is_none() {
            return Err(PosetError::NoBounds);
        }
        Ok(DomainSpec {
            lower,
            upper,
            strict_lower,
            strict_upper,
        })
    }

    pub fn upper(map: EndoMap, strict: bool) -> Self {
        DomainSpec {
            lower: None,
            upper: Some(map),
            strict_lower: false,
            strict_upper: strict,
        }
    }

    pub fn lower(map: EndoMap, strict: bool) -> Self {
        DomainSpec {
            lower: Some(map),
            upper: None,
            strict_lower: strict,
            strict_upper: false,
        }
    }

    pub fn both(lower: EndoMap, upper: EndoMap, strict: bool) -> Self {
        DomainSpec {
            lower: Some(lower),
            upper: Some(upper),
            strict_lower: strict,
            strict_upper: strict,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DomainResult {
    pub members: ElementSet,
}

fn below(poset: &FinitePoset, a: usize, b: usize, strict: bool) -> bool {
    if strict {
        poset.lt(a, b)
    } else {
        poset.leq(a, b)
    }
}

/// One-shot domain: each bound is evaluated on `x` directly.
pub fn dfbf_domain(poset: &FinitePoset, spec: &DomainSpec) -> DomainResult {
    let members = ElementSet::from_indices((0..poset.len()).filter(|&x| {
        let lower_ok = spec
            .lower
            .as_ref()
            .is_none_or(|l| below(poset, l.apply(x), x, spec.strict_lower));
        let upper_ok = spec
            .upper
            .as_ref()
            .is_none_or(|u| below(poset, x, u.apply(x), spec.strict_upper));
        lower_ok && upper_ok
    }));
    DomainResult { members }
}

/// `{ x | f(x) = x }`
pub fn fixed_point_domain(poset: &FinitePoset, f: &EndoMap) -> DomainResult {
    DomainResult {
        members: ElementSet::from_indices((0..poset.len()).filter(|&x| f.apply(x) == x)),
    }
}

/// Whether the self-referential bound is an upper (`x < f(x)`) or lower
/// (`f(x) < x`) bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundSide {
    Upper,
    Lower,
}

/// The validity operator for a self-referential bound: keeps `x` in `s`
/// when `x` is related to `g(x)` on the given side.
pub fn phi(
    poset: &FinitePoset,
    g: &EndoMap,
    side: BoundSide,
    strict: bool,
    s: ElementSet,
) -> ElementSet {
    ElementSet::from_indices(s.iter().filter(|&x| match side {
        BoundSide::Upper => below(poset, x, g.apply(x), strict),
        BoundSide::Lower => below(poset, g.apply(x), x, strict),
    }))
}

/// Greatest fixed point of [`phi`], reached by iterating from the whole carrier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GfpTrace {
    pub result: DomainResult,
    /// Every iterate, starting with the carrier and ending with the fixed point.
    pub iterates: Vec<ElementSet>,
}

impl GfpTrace {
    /// Number of applications of the operator that changed the set.
    pub fn productive_steps(&self) -> usize {
        self.iterates.len() - 1
    }
}

pub fn recursive_domain_gfp_trace(
    poset: &FinitePoset,
    g: &EndoMap,
    side: BoundSide,
    strict: bool,
) -> GfpTrace {
    let mut cur = poset.carrier();
    let mut iterates = vec![cur];
    loop {
        let next = phi(poset, g, side, strict, cur);
        if next == cur {
            break;
        }
        iterates.push(next);
        cur = next;
    }
    GfpTrace {
        result: DomainResult { members: cur },
        iterates,
    }
}

/// Coinductive reading of `f(x < f(x))` with `g` as the expression of `f`.
pub fn recursive_domain_gfp(poset: &FinitePoset, g: &EndoMap, strict: bool) -> DomainResult {
    recursive_domain_gfp_trace(poset, g, BoundSide::Upper, strict).result
}

/// Per-side outcome of comparing the one-shot domain with the gfp reading.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TheoremReport {
    pub upper_agrees: bool,
    pub lower_agrees: bool,
    /// The gfp iteration needed at most one productive step on both sides.
    pub single_step: bool,
}

impl TheoremReport {
    pub fn holds(&self) -> bool {
        self.upper_agrees && self.lower_agrees
    }
}

pub fn theorem_report(poset: &FinitePoset, g: &EndoMap, strict: bool) -> TheoremReport {
    let side = |side: BoundSide| {
        let spec = match side {
            BoundSide::Upper => DomainSpec::upper(g.clone(), strict),
            BoundSide::Lower => DomainSpec::lower(g.clone(), strict),
        };
        let one_shot = dfbf_domain(poset, &spec);
        let trace = recursive_domain_gfp_trace(poset, g, side, strict);
        (one_shot == trace.result, trace.productive_steps() <= 1)
    };
    let (upper_agrees, upper_single) = side(BoundSide::Upper);
    let (lower_agrees, lower_single) = side(BoundSide::Lower);
    TheoremReport {
        upper_agrees,
        lower_agrees,
        single_step: upper_single && lower_single,
    }
}

/// One-shot domain with `g` unrestricted equals the gfp reading, for both
/// the upper-bound form and its lower-bound dual.
pub fn theorem_check(poset: &FinitePoset, g: &EndoMap, strict: bool) -> bool {
    theorem_report(poset, g, strict).holds()
}

/// Random poset on `1..=max_size` elements: a random DAG over a shuffled
/// labelling, closed under reflexivity and transitivity.
pub fn random_poset(seed: u64, max_size: usize) -> FinitePoset {
    assert!(
        (1..=MAX_ELEMENTS).contains(&max_size),
        "max_size must be in 1..={MAX_ELEMENTS}"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_size);
    let density: f64 = rng.gen_range(0.0..=1.0);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(density) {
                edges.push((order[i], order[j]));
            }
        }
    }
    let labels = (0..n).map(|i| format!("e{i}")).collect();
    FinitePoset::from_edges(labels, &edges).expect("edges respect a linear extension")
}

/// Uniformly random total map on the carrier.
pub fn random_endomap(seed: u64, poset: &FinitePoset) -> EndoMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    EndoMap {
        image: (0..poset.len())
            .map(|_| rng.gen_range(0..poset.len()))
            .collect(),
    }
}

/// Tally of a seeded sweep of [`theorem_report`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SweepSummary {
    pub runs: usize,
    pub passed: usize,
    pub single_step: usize,
    /// Instance seeds whose check failed.
    pub failures: Vec<u64>,
}

/// Runs `runs` instances; instance `i` uses seed `seed + i` for both the
/// poset and the map.
pub fn theorem_sweep(runs: usize, max_size: usize, seed: u64, strict: bool) -> SweepSummary {
    let mut summary = SweepSummary {
        runs,
        ..Default::default()
    };
    for i in 0..runs as u64 {
        let instance = seed.wrapping_add(i);
        let poset = random_poset(instance, max_size);
        let g = random_endomap(instance, &poset);
        let report = theorem_report(&poset, &g, strict);
        if report.holds() {
            summary.passed += 1;
        } else {
            summary.failures.push(instance);
        }
        if report.single_step {
            summary.single_step += 1;
        }
    }
    summary
}

/// On-disk poset description.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PosetFile {
    pub elements: Vec<String>,
    #[serde(default)]
    pub covers: Vec<(String, String)>,
    #[serde(default)]
    pub maps: BTreeMap<String, BTreeMap<String, String>>,
}

/// A poset together with its named maps.
#[derive(Debug, Clone)]
pub struct LoadedPoset {
    pub poset: FinitePoset,
    pub maps: BTreeMap<String, EndoMap>,
}

impl LoadedPoset {
    pub fn map(&self, name: &str) -> Result<&EndoMap, PosetError> {
        self.maps
            .get(name)
            .ok_or_else(|| PosetError::UnknownMap(name.to_string()))
    }
}

pub fn parse_poset_file(text: &str) -> Result<LoadedPoset, PosetError> {
    let file: PosetFile =
        serde_json::from_str(text).map_err(|e| PosetError::Json(e.to_string()))?;
    let poset = FinitePoset::new(&file.elements, &file.covers)?;
    let maps = file
        .maps
        .iter()
        .map(|(name, pairs)| Ok((name.clone(), EndoMap::from_labels(&poset, name, pairs)?)))
        .collect::<Result<BTreeMap<_, _>, PosetError>>()?;
    Ok(LoadedPoset { poset, maps })
}
