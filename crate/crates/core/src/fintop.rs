//! Finite topological spaces and continuous maps.
//!
//! A finite topology is closed under arbitrary intersections, so every point
//! has a smallest open neighbourhood and the topology is the family of unions
//! of those neighbourhoods. [`FinSpace`] stores exactly that data; the open
//! family itself is produced on demand by [`FinSpace::opens`], subject to a cap.

use fixedbitset::FixedBitSet;
use std::collections::BTreeSet;
use thiserror::Error;

/// Index of a point in a [`FinSpace`].
pub type Point = usize;

/// A subset of the points of a space, as a bitset of width `space.len()`.
pub type PointSet = FixedBitSet;

/// Default bound on explicitly materialised open families.
pub const DEFAULT_OPEN_CAP: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TopologyError {
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("open family exceeds the cap of {cap} sets")]
    OpenCapExceeded { cap: usize },
    #[error("map is not continuous at point {0}")]
    NotContinuous(String),
}

/// Build a point set of width `n` from indices.
pub fn set_of(n: usize, points: impl IntoIterator<Item = Point>) -> PointSet {
    let mut s = PointSet::with_capacity(n);
    for p in points {
        s.insert(p);
    }
    s
}

/// The full set of width `n`.
pub fn full_set(n: usize) -> PointSet {
    let mut s = PointSet::with_capacity(n);
    s.insert_range(..);
    s
}

/// Sort a family of width-`n` sets by size, then by members, removing duplicates.
pub fn canonical_family(n: usize, sets: impl IntoIterator<Item = PointSet>) -> Vec<PointSet> {
    let keyed: BTreeSet<(usize, Vec<Point>)> = sets
        .into_iter()
        .map(|s| (s.count_ones(..), s.ones().collect()))
        .collect();
    keyed.into_iter().map(|(_, members)| set_of(n, members)).collect()
}

/// A finite topological space.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FinSpace {
    labels: Vec<String>,
    nbhd: Vec<PointSet>,
}

impl FinSpace {
    /// The space with no points.
    pub fn empty() -> Self {
        FinSpace { labels: Vec::new(), nbhd: Vec::new() }
    }

    /// Every subset is open.
    pub fn discrete(labels: Vec<String>) -> Self {
        let n = labels.len();
        let nbhd = (0..n).map(|p| set_of(n, [p])).collect();
        FinSpace { labels, nbhd }
    }

    /// Only the empty set and the whole space are open.
    pub fn indiscrete(labels: Vec<String>) -> Self {
        let n = labels.len();
        let nbhd = (0..n).map(|_| full_set(n)).collect();
        FinSpace { labels, nbhd }
    }

    /// The Sierpiński space on points `0` and `1`, with `{1}` open.
    pub fn sierpinski() -> Self {
        FinSpace::generate(vec!["0".into(), "1".into()], &[set_of(2, [1])]).unwrap()
    }

    /// The smallest topology on `labels` containing every member of `subbasis`.
    pub fn generate(labels: Vec<String>, subbasis: &[PointSet]) -> Result<Self, TopologyError> {
        let n = labels.len();
        check_distinct(&labels)?;
        let mut nbhd: Vec<PointSet> = (0..n).map(|_| full_set(n)).collect();
        for b in subbasis {
            if b.len() > n && b.ones().any(|p| p >= n) {
                return Err(TopologyError::Malformed(
                    "subbasis member is not contained in the point set".into(),
                ));
            }
            let b = resized(b, n);
            for p in b.ones() {
                nbhd[p].intersect_with(&b);
            }
        }
        Ok(FinSpace { labels, nbhd })
    }

    /// A space from an explicit open family, which must already be a topology.
    pub fn from_opens(labels: Vec<String>, opens: &[PointSet], cap: usize) -> Result<Self, TopologyError> {
        let n = labels.len();
        check_distinct(&labels)?;
        if opens.len() > cap {
            return Err(TopologyError::OpenCapExceeded { cap });
        }
        let family: BTreeSet<PointSet> = opens.iter().map(|o| resized(o, n)).collect();
        if opens.iter().any(|o| o.ones().any(|p| p >= n)) {
            return Err(TopologyError::Malformed("open set mentions an unknown point".into()));
        }
        if !family.contains(&PointSet::with_capacity(n)) {
            return Err(TopologyError::Malformed("open family does not contain the empty set".into()));
        }
        if !family.contains(&full_set(n)) {
            return Err(TopologyError::Malformed("open family does not contain the whole space".into()));
        }
        let list: Vec<&PointSet> = family.iter().collect();
        for (i, a) in list.iter().enumerate() {
            for b in &list[i + 1..] {
                let mut u = (*a).clone();
                u.union_with(b);
                if !family.contains(&u) {
                    return Err(TopologyError::Malformed("open family is not closed under union".into()));
                }
                let mut m = (*a).clone();
                m.intersect_with(b);
                if !family.contains(&m) {
                    return Err(TopologyError::Malformed(
                        "open family is not closed under intersection".into(),
                    ));
                }
            }
        }
        let space = FinSpace::generate(labels, opens)?;
        Ok(space)
    }

    /// Build directly from minimal neighbourhoods. Each `nbhd[p]` must contain
    /// `p`, and `q ∈ nbhd[p]` must imply `nbhd[q] ⊆ nbhd[p]`.
    pub fn from_neighbourhoods(labels: Vec<String>, nbhd: Vec<PointSet>) -> Result<Self, TopologyError> {
        let n = labels.len();
        check_distinct(&labels)?;
        if nbhd.len() != n {
            return Err(TopologyError::Malformed("one neighbourhood per point is required".into()));
        }
        let nbhd: Vec<PointSet> = nbhd.iter().map(|s| resized(s, n)).collect();
        for (p, np) in nbhd.iter().enumerate() {
            if !np.contains(p) {
                return Err(TopologyError::Malformed(format!("neighbourhood of {} misses it", labels[p])));
            }
            for q in np.ones() {
                if !nbhd[q].is_subset(np) {
                    return Err(TopologyError::Malformed("neighbourhoods are not transitive".into()));
                }
            }
        }
        Ok(FinSpace { labels, nbhd })
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

    pub fn label(&self, p: Point) -> &str {
        &self.labels[p]
    }

    pub fn point(&self, label: &str) -> Option<Point> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        assert_eq!(labels.len(), self.labels.len());
        self.labels = labels;
        self
    }

    /// Smallest open set containing `p`.
    pub fn neighbourhood(&self, p: Point) -> &PointSet {
        &self.nbhd[p]
    }

    pub fn neighbourhoods(&self) -> &[PointSet] {
        &self.nbhd
    }

    pub fn full(&self) -> PointSet {
        full_set(self.len())
    }

    pub fn none(&self) -> PointSet {
        PointSet::with_capacity(self.len())
    }

    pub fn set(&self, points: impl IntoIterator<Item = Point>) -> PointSet {
        set_of(self.len(), points)
    }

    pub fn is_open(&self, s: &PointSet) -> bool {
        s.ones().all(|p| self.nbhd[p].is_subset(s))
    }

    pub fn is_closed(&self, s: &PointSet) -> bool {
        let mut c = self.full();
        c.difference_with(s);
        self.is_open(&c)
    }

    /// Smallest open set containing `s`.
    pub fn open_hull(&self, s: &PointSet) -> PointSet {
        let mut out = self.none();
        for p in s.ones() {
            out.union_with(&self.nbhd[p]);
        }
        out
    }

    /// Largest open set contained in `s`.
    pub fn interior(&self, s: &PointSet) -> PointSet {
        self.set((0..self.len()).filter(|&p| self.nbhd[p].is_subset(s)))
    }

    /// Smallest closed set containing `s`.
    pub fn closure(&self, s: &PointSet) -> PointSet {
        self.set((0..self.len()).filter(|&p| !self.nbhd[p].is_disjoint(s)))
    }

    pub fn point_closure(&self, p: Point) -> PointSet {
        self.closure(&self.set([p]))
    }

    /// The open family in canonical order, or an error past `cap` members.
    pub fn opens(&self, cap: usize) -> Result<Vec<PointSet>, TopologyError> {
        let n = self.len();
        let nbhd = &self.nbhd;
        let sets = crate::closure::closed_sets(
            n,
            |s| {
                let mut out = PointSet::with_capacity(n);
                for p in s.ones() {
                    out.union_with(&nbhd[p]);
                }
                out
            },
            cap,
        )
        .map_err(|cap| TopologyError::OpenCapExceeded { cap })?;
        Ok(canonical_family(n, sets))
    }

    /// Distinct points have distinct neighbourhood systems.
    pub fn is_t0(&self) -> bool {
        let distinct: BTreeSet<&PointSet> = self.nbhd.iter().collect();
        distinct.len() == self.len()
    }

    /// Every irreducible closed set is the closure of exactly one point.
    ///
    /// In a finite space the irreducible closed sets are exactly the point
    /// closures, so this checks that no two points share a closure.
    pub fn is_sober(&self) -> bool {
        let closures: BTreeSet<PointSet> = (0..self.len()).map(|p| self.point_closure(p)).collect();
        closures.len() == self.len()
    }

    pub fn is_discrete(&self) -> bool {
        self.nbhd.iter().all(|s| s.count_ones(..) == 1)
    }

    /// Same points, topology generated by the open and the closed sets.
    pub fn skula(&self) -> FinSpace {
        let nbhd = (0..self.len())
            .map(|p| {
                let mut s = self.nbhd[p].clone();
                s.intersect_with(&self.point_closure(p));
                s
            })
            .collect();
        FinSpace { labels: self.labels.clone(), nbhd }
    }

    /// `subset` meets every non-empty open set of the Skula topology.
    pub fn is_skula_dense(&self, subset: &PointSet) -> bool {
        let sk = self.skula();
        (0..self.len()).all(|p| !sk.nbhd[p].is_disjoint(subset))
    }

    /// The subspace on `subset` with its inclusion map.
    pub fn subspace(&self, subset: &PointSet) -> (FinSpace, ContinuousMap) {
        let members: Vec<Point> = subset.ones().filter(|&p| p < self.len()).collect();
        let m = members.len();
        let mut index = vec![usize::MAX; self.len()];
        for (i, &p) in members.iter().enumerate() {
            index[p] = i;
        }
        let nbhd = members
            .iter()
            .map(|&p| set_of(m, self.nbhd[p].ones().filter(|&q| index[q] != usize::MAX).map(|q| index[q])))
            .collect();
        let labels = members.iter().map(|&p| self.labels[p].clone()).collect();
        let sub = FinSpace { labels, nbhd };
        let incl = ContinuousMap { domain: sub.clone(), codomain: self.clone(), table: members };
        (sub, incl)
    }

    /// Quotient by the partition `class_of` (any class ids), with its quotient map.
    ///
    /// Classes are renumbered by first occurrence; a quotient open is a
    /// saturated open of this space.
    pub fn quotient(&self, class_of: &[usize]) -> (FinSpace, ContinuousMap) {
        assert_eq!(class_of.len(), self.len());
        let mut renumber = std::collections::HashMap::new();
        let table: Vec<Point> = class_of
            .iter()
            .map(|c| {
                let next = renumber.len();
                *renumber.entry(*c).or_insert(next)
            })
            .collect();
        let k = renumber.len();
        let mut members: Vec<Vec<Point>> = vec![Vec::new(); k];
        for (p, &c) in table.iter().enumerate() {
            members[c].push(p);
        }
        let nbhd = (0..k)
            .map(|c| {
                // grow the class until it is open and saturated
                let mut s = self.set(members[c].iter().copied());
                loop {
                    let hull = self.open_hull(&s);
                    let mut sat = hull.clone();
                    for p in hull.ones() {
                        for &q in &members[table[p]] {
                            sat.insert(q);
                        }
                    }
                    if sat == s {
                        break;
                    }
                    s = sat;
                }
                set_of(k, s.ones().map(|p| table[p]))
            })
            .collect();
        let labels = members
            .iter()
            .map(|ps| {
                let inner: Vec<&str> = ps.iter().map(|&p| self.labels[p].as_str()).collect();
                format!("[{}]", inner.join(","))
            })
            .collect();
        let q = FinSpace { labels, nbhd };
        let map = ContinuousMap { domain: self.clone(), codomain: q.clone(), table };
        (q, map)
    }

    /// The product space; point `(a, b)` has index `a * other.len() + b`.
    pub fn product(&self, other: &FinSpace) -> FinSpace {
        let (n, m) = (self.len(), other.len());
        let mut labels = Vec::with_capacity(n * m);
        let mut nbhd = Vec::with_capacity(n * m);
        for a in 0..n {
            for b in 0..m {
                labels.push(format!("({},{})", self.labels[a], other.labels[b]));
                nbhd.push(set_of(
                    n * m,
                    self.nbhd[a].ones().flat_map(|x| other.nbhd[b].ones().map(move |y| x * m + y)),
                ));
            }
        }
        FinSpace { labels, nbhd }
    }
}

fn resized(s: &PointSet, n: usize) -> PointSet {
    set_of(n, s.ones().filter(|&p| p < n))
}

fn check_distinct(labels: &[String]) -> Result<(), TopologyError> {
    let distinct: BTreeSet<&String> = labels.iter().collect();
    if distinct.len() != labels.len() {
        return Err(TopologyError::Malformed("duplicate point id".into()));
    }
    Ok(())
}

/// A continuous map between finite spaces, given by its table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContinuousMap {
    domain: FinSpace,
    codomain: FinSpace,
    table: Vec<Point>,
}

/// Every preimage of an open set is open.
pub fn is_continuous(domain: &FinSpace, codomain: &FinSpace, table: &[Point]) -> bool {
    first_discontinuity(domain, codomain, table).is_none()
}

fn first_discontinuity(domain: &FinSpace, codomain: &FinSpace, table: &[Point]) -> Option<Point> {
    (0..domain.len()).find(|&p| {
        let target = &codomain.nbhd[table[p]];
        domain.nbhd[p].ones().any(|q| !target.contains(table[q]))
    })
}

impl ContinuousMap {
    pub fn new(domain: FinSpace, codomain: FinSpace, table: Vec<Point>) -> Result<Self, TopologyError> {
        if table.len() != domain.len() {
            return Err(TopologyError::Malformed("map is not total on its domain".into()));
        }
        if let Some(p) = table.iter().find(|&&q| q >= codomain.len()) {
            return Err(TopologyError::Malformed(format!("map value {p} is not a codomain point")));
        }
        if let Some(p) = first_discontinuity(&domain, &codomain, &table) {
            return Err(TopologyError::NotContinuous(domain.labels[p].clone()));
        }
        Ok(ContinuousMap { domain, codomain, table })
    }

    pub fn identity(space: &FinSpace) -> Self {
        ContinuousMap { domain: space.clone(), codomain: space.clone(), table: (0..space.len()).collect() }
    }

    /// The map to the one-point space.
    pub fn to_point(space: &FinSpace) -> Self {
        let point = FinSpace::discrete(vec!["*".into()]);
        ContinuousMap { domain: space.clone(), codomain: point, table: vec![0; space.len()] }
    }

    pub fn domain(&self) -> &FinSpace {
        &self.domain
    }

    pub fn codomain(&self) -> &FinSpace {
        &self.codomain
    }

    pub fn table(&self) -> &[Point] {
        &self.table
    }

    pub fn apply(&self, p: Point) -> Point {
        self.table[p]
    }

    pub fn preimage(&self, s: &PointSet) -> PointSet {
        self.domain.set((0..self.domain.len()).filter(|&p| s.contains(self.table[p])))
    }

    pub fn image(&self, s: &PointSet) -> PointSet {
        self.codomain.set(s.ones().map(|p| self.table[p]))
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &ContinuousMap) -> Result<ContinuousMap, TopologyError> {
        if self.codomain != next.domain {
            return Err(TopologyError::Malformed("maps do not compose".into()));
        }
        Ok(ContinuousMap {
            domain: self.domain.clone(),
            codomain: next.codomain.clone(),
            table: self.table.iter().map(|&p| next.table[p]).collect(),
        })
    }

    pub fn is_injective(&self) -> bool {
        let distinct: BTreeSet<&Point> = self.table.iter().collect();
        distinct.len() == self.table.len()
    }

    pub fn is_surjective(&self) -> bool {
        let distinct: BTreeSet<&Point> = self.table.iter().collect();
        distinct.len() == self.codomain.len()
    }

    /// Images of open sets are open.
    pub fn is_open_map(&self) -> bool {
        (0..self.domain.len()).all(|p| self.codomain.is_open(&self.image(&self.domain.nbhd[p])))
    }

    pub fn is_homeomorphism(&self) -> bool {
        self.is_injective() && self.is_surjective() && self.is_open_map()
    }

    /// The preimage map on open sets is a bijection.
    pub fn is_quasi_homeomorphism(&self) -> bool {
        self.is_injective_on_opens() && self.is_surjective_on_opens()
    }

    /// The preimage map on open sets is injective: the map meets every class
    /// of topologically indistinguishable codomain points.
    pub fn is_injective_on_opens(&self) -> bool {
        let cod = &self.codomain;
        let hit = cod.set(self.table.iter().copied());
        (0..cod.len()).all(|y| {
            let mut class = cod.nbhd[y].clone();
            class.intersect_with(&cod.point_closure(y));
            !class.is_disjoint(&hit)
        })
    }

    /// The preimage map on open sets is surjective: the preimage of the
    /// neighbourhood of each image point is the neighbourhood of the point.
    pub fn is_surjective_on_opens(&self) -> bool {
        let cod = &self.codomain;
        (0..self.domain.len()).all(|x| self.preimage(&cod.nbhd[self.table[x]]) == self.domain.nbhd[x])
    }

    /// Every point has an open neighbourhood mapped homeomorphically onto an
    /// open set. It suffices to test the minimal neighbourhood.
    pub fn is_local_homeomorphism(&self) -> bool {
        (0..self.domain.len()).all(|x| {
            let v = &self.domain.nbhd[x];
            let image = self.image(v);
            image.count_ones(..) == v.count_ones(..)
                && v.ones().all(|y| self.image(&self.domain.nbhd[y]) == self.codomain.nbhd[self.table[y]])
        })
    }
}

/// Pullback of two maps into a common space, with the subspace-of-product topology.
#[derive(Debug, Clone)]
pub struct FiberProduct {
    pub space: FinSpace,
    /// The pair of points behind each point of `space`.
    pub pairs: Vec<(Point, Point)>,
    pub first: ContinuousMap,
    pub second: ContinuousMap,
}

impl FiberProduct {
    /// Index of the pair `(a, b)`, if it lies over a common point.
    pub fn index_of(&self, a: Point, b: Point) -> Option<Point> {
        self.pairs.binary_search(&(a, b)).ok()
    }
}

pub fn fiber_product(f: &ContinuousMap, g: &ContinuousMap) -> Result<FiberProduct, TopologyError> {
    if f.codomain != g.codomain {
        return Err(TopologyError::Malformed("fiber product needs a common codomain".into()));
    }
    Ok(fiber_product_tables(&f.domain, &f.table, &g.domain, &g.table))
}

pub(crate) fn fiber_product_tables(a: &FinSpace, fa: &[Point], b: &FinSpace, gb: &[Point]) -> FiberProduct {
    let mut pairs = Vec::new();
    for x in 0..a.len() {
        for y in 0..b.len() {
            if fa[x] == gb[y] {
                pairs.push((x, y));
            }
        }
    }
    let n = pairs.len();
    let nbhd = pairs
        .iter()
        .map(|&(x, y)| {
            set_of(
                n,
                pairs
                    .iter()
                    .enumerate()
                    .filter(|(_, &(x2, y2))| a.nbhd[x].contains(x2) && b.nbhd[y].contains(y2))
                    .map(|(i, _)| i),
            )
        })
        .collect();
    let labels = pairs.iter().map(|&(x, y)| format!("({},{})", a.labels[x], b.labels[y])).collect();
    let space = FinSpace { labels, nbhd };
    let first = ContinuousMap {
        domain: space.clone(),
        codomain: a.clone(),
        table: pairs.iter().map(|p| p.0).collect(),
    };
    let second = ContinuousMap {
        domain: space.clone(),
        codomain: b.clone(),
        table: pairs.iter().map(|p| p.1).collect(),
    };
    FiberProduct { space, pairs, first, second }
}
