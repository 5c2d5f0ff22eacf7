//! Finite topological groupoids, their subgroupoids, functors and transformations.
//!
//! Composition is written `g ∘ f` for `f: x → y`, `g: y → z`. The bi-orbit
//! `_L[α]_R` of an arrow collects `γ ∘ α ∘ β` with `γ` in `L` and `β` in `R`.

use crate::closure::closed_sets;
use crate::fintop::{canonical_family, fiber_product_tables, is_continuous, set_of, ContinuousMap, FinSpace, Point, PointSet, TopologyError};
use std::sync::Arc;
use thiserror::Error;

pub type Object = usize;
pub type Arrow = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupoidError {
    #[error("malformed groupoid: {0}")]
    Malformed(String),
    #[error("arrow set is not closed under composition and inverses")]
    NotSubgroupoid,
    #[error("subgroupoid is not open")]
    NotOpen,
    #[error("subset is not stable under the bi-orbit actions (arrow {0})")]
    NotBistable(String),
    #[error("more than {budget} subgroupoids; raise the budget or supply a family")]
    BudgetExceeded { budget: usize },
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

/// A groupoid internal to finite spaces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopGroupoid {
    objects: FinSpace,
    arrows: FinSpace,
    src: Vec<Object>,
    tgt: Vec<Object>,
    unit: Vec<Arrow>,
    inv: Vec<Arrow>,
    comp: Vec<Option<Arrow>>,
}

impl TopGroupoid {
    /// Assemble a groupoid. `comp` lists triples `(f, g, h)` with `h = g ∘ f`.
    ///
    /// Only the shape is checked here; use [`TopGroupoid::validate`] for the axioms.
    pub fn new(
        objects: FinSpace,
        arrows: FinSpace,
        src: Vec<Object>,
        tgt: Vec<Object>,
        unit: Vec<Arrow>,
        inv: Vec<Arrow>,
        comp: &[(Arrow, Arrow, Arrow)],
    ) -> Result<Self, GroupoidError> {
        let (n0, n1) = (objects.len(), arrows.len());
        let bad = |what: &str| Err(GroupoidError::Malformed(what.to_string()));
        if src.len() != n1 || tgt.len() != n1 || inv.len() != n1 || unit.len() != n0 {
            return bad("structure map has the wrong length");
        }
        if src.iter().chain(&tgt).any(|&x| x >= n0) || unit.iter().chain(&inv).any(|&a| a >= n1) {
            return bad("structure map leaves its codomain");
        }
        let mut table = vec![None; n1 * n1];
        for &(f, g, h) in comp {
            if f >= n1 || g >= n1 || h >= n1 {
                return bad("composition mentions an unknown arrow");
            }
            let slot = &mut table[g * n1 + f];
            if slot.is_some_and(|old| old != h) {
                return bad("composition assigns two values to one pair");
            }
            *slot = Some(h);
        }
        Ok(TopGroupoid { objects, arrows, src, tgt, unit, inv, comp: table })
    }

    /// A finite group as a one-object groupoid with discrete topologies.
    /// `table[a][b]` is the product `a·b`, read as `a ∘ b`.
    pub fn group(labels: Vec<String>, table: &[Vec<usize>]) -> Result<Self, GroupoidError> {
        let n = labels.len();
        let e = (0..n)
            .find(|&e| (0..n).all(|a| table[e][a] == a && table[a][e] == a))
            .ok_or_else(|| GroupoidError::Malformed("group table has no identity".into()))?;
        let inv = (0..n)
            .map(|a| (0..n).find(|&b| table[a][b] == e))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| GroupoidError::Malformed("group table has no inverses".into()))?;
        let mut comp = Vec::with_capacity(n * n);
        for g in 0..n {
            for f in 0..n {
                comp.push((f, g, table[g][f]));
            }
        }
        TopGroupoid::new(
            FinSpace::discrete(vec!["*".into()]),
            FinSpace::discrete(labels),
            vec![0; n],
            vec![0; n],
            vec![e],
            inv,
            &comp,
        )
    }

    /// The categorically discrete groupoid on a space: identity arrows only.
    pub fn discrete(space: &FinSpace) -> Self {
        let n = space.len();
        let arrows = space.clone().with_labels(space.labels().iter().map(|l| format!("id_{l}")).collect());
        let comp: Vec<_> = (0..n).map(|x| (x, x, x)).collect();
        let ids: Vec<usize> = (0..n).collect();
        TopGroupoid::new(space.clone(), arrows, ids.clone(), ids.clone(), ids.clone(), ids, &comp).unwrap()
    }

    /// Exactly one arrow between any two objects, discrete topologies.
    /// Arrow `s * n + t` goes from `s` to `t`.
    pub fn pair(labels: Vec<String>) -> Self {
        let n = labels.len();
        let mut names = Vec::with_capacity(n * n);
        for s in 0..n {
            for t in 0..n {
                names.push(if s == t { format!("id_{}", labels[s]) } else { format!("{}->{}", labels[s], labels[t]) });
            }
        }
        let src = (0..n * n).map(|a| a / n).collect();
        let tgt = (0..n * n).map(|a| a % n).collect();
        let unit = (0..n).map(|x| x * n + x).collect();
        let inv = (0..n * n).map(|a| (a % n) * n + a / n).collect();
        let mut comp = Vec::new();
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    comp.push((x * n + y, y * n + z, x * n + z));
                }
            }
        }
        TopGroupoid::new(FinSpace::discrete(labels), FinSpace::discrete(names), src, tgt, unit, inv, &comp).unwrap()
    }

    /// The same groupoid with new topologies on objects and arrows.
    pub fn with_topologies(&self, objects: FinSpace, arrows: FinSpace) -> Result<Self, GroupoidError> {
        if objects.len() != self.objects.len() || arrows.len() != self.arrows.len() {
            return Err(GroupoidError::Malformed("topology has the wrong number of points".into()));
        }
        Ok(TopGroupoid { objects, arrows, ..self.clone() })
    }

    pub fn objects(&self) -> &FinSpace {
        &self.objects
    }

    pub fn arrows(&self) -> &FinSpace {
        &self.arrows
    }

    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    pub fn arrow_count(&self) -> usize {
        self.arrows.len()
    }

    pub fn src(&self, a: Arrow) -> Object {
        self.src[a]
    }

    pub fn tgt(&self, a: Arrow) -> Object {
        self.tgt[a]
    }

    pub fn unit(&self, x: Object) -> Arrow {
        self.unit[x]
    }

    pub fn inv(&self, a: Arrow) -> Arrow {
        self.inv[a]
    }

    pub fn src_table(&self) -> &[Object] {
        &self.src
    }

    pub fn tgt_table(&self) -> &[Object] {
        &self.tgt
    }

    pub fn unit_table(&self) -> &[Arrow] {
        &self.unit
    }

    pub fn inv_table(&self) -> &[Arrow] {
        &self.inv
    }

    /// `g ∘ f`, when recorded.
    pub fn compose(&self, g: Arrow, f: Arrow) -> Option<Arrow> {
        self.comp[g * self.arrows.len() + f]
    }

    /// `g ∘ f` for a composable pair; panics if the table is incomplete.
    pub fn comp(&self, g: Arrow, f: Arrow) -> Arrow {
        self.compose(g, f).expect("composable pair without a composite")
    }

    /// All recorded triples `(f, g, g ∘ f)`.
    pub fn comp_triples(&self) -> Vec<(Arrow, Arrow, Arrow)> {
        let n = self.arrows.len();
        let mut out = Vec::new();
        for g in 0..n {
            for f in 0..n {
                if let Some(h) = self.comp[g * n + f] {
                    out.push((f, g, h));
                }
            }
        }
        out
    }

    pub fn src_map(&self) -> ContinuousMap {
        ContinuousMap::new(self.arrows.clone(), self.objects.clone(), self.src.clone())
            .expect("src of a validated groupoid")
    }

    pub fn tgt_map(&self) -> ContinuousMap {
        ContinuousMap::new(self.arrows.clone(), self.objects.clone(), self.tgt.clone())
            .expect("tgt of a validated groupoid")
    }

    /// Arrows out of `x`.
    pub fn arrows_from(&self, x: Object) -> impl Iterator<Item = Arrow> + '_ {
        (0..self.arrows.len()).filter(move |&a| self.src[a] == x)
    }

    /// Arrows whose source lies in `objs`.
    pub fn src_preimage(&self, objs: &PointSet) -> PointSet {
        self.arrows.set((0..self.arrows.len()).filter(|&a| objs.contains(self.src[a])))
    }

    /// Arrows whose target lies in `objs`.
    pub fn tgt_preimage(&self, objs: &PointSet) -> PointSet {
        self.arrows.set((0..self.arrows.len()).filter(|&a| objs.contains(self.tgt[a])))
    }

    /// Objects joined by some arrow to an object of `objs`.
    pub fn saturate_objects(&self, objs: &PointSet) -> PointSet {
        let mut out = objs.clone();
        for a in 0..self.arrows.len() {
            if objs.contains(self.tgt[a]) {
                out.insert(self.src[a]);
            }
        }
        out
    }

    /// Every violated axiom, by name. Empty iff this is a topological groupoid.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        let (n0, n1) = (self.objects.len(), self.arrows.len());
        let lab = |a: Arrow| self.arrows.label(a).to_string();
        for x in 0..n0 {
            let e = self.unit[x];
            if self.src[e] != x || self.tgt[e] != x {
                out.push(format!("unit of {} has wrong endpoints", self.objects.label(x)));
            }
        }
        for f in 0..n1 {
            for g in 0..n1 {
                let composable = self.src[g] == self.tgt[f];
                match (composable, self.compose(g, f)) {
                    (true, None) => out.push(format!("comp undefined at ({}, {})", lab(f), lab(g))),
                    (false, Some(_)) => out.push(format!("comp defined on non-composable ({}, {})", lab(f), lab(g))),
                    (true, Some(h)) if self.src[h] != self.src[f] || self.tgt[h] != self.tgt[g] => {
                        out.push(format!("comp has wrong endpoints at ({}, {})", lab(f), lab(g)))
                    }
                    _ => {}
                }
            }
        }
        if !out.is_empty() {
            return out;
        }
        for f in 0..n1 {
            if self.comp(f, self.unit[self.src[f]]) != f || self.comp(self.unit[self.tgt[f]], f) != f {
                out.push(format!("unit law fails at {}", lab(f)));
            }
            let i = self.inv[f];
            if self.src[i] != self.tgt[f]
                || self.tgt[i] != self.src[f]
                || self.compose(i, f) != Some(self.unit[self.src[f]])
                || self.compose(f, i) != Some(self.unit[self.tgt[f]])
            {
                out.push(format!("inverse law fails at {}", lab(f)));
            }
        }
        if out.is_empty() {
            'assoc: for f in 0..n1 {
                for g in self.arrows_from(self.tgt[f]) {
                    for h in self.arrows_from(self.tgt[g]) {
                        if self.comp(h, self.comp(g, f)) != self.comp(self.comp(h, g), f) {
                            out.push(format!("associativity fails at ({}, {}, {})", lab(f), lab(g), lab(h)));
                            break 'assoc;
                        }
                    }
                }
            }
        }
        if !is_continuous(&self.arrows, &self.objects, &self.src) {
            out.push("src not continuous".into());
        }
        if !is_continuous(&self.arrows, &self.objects, &self.tgt) {
            out.push("tgt not continuous".into());
        }
        if !is_continuous(&self.objects, &self.arrows, &self.unit) {
            out.push("unit not continuous".into());
        }
        if !is_continuous(&self.arrows, &self.arrows, &self.inv) {
            out.push("inv not continuous".into());
        }
        if out.is_empty() && !self.comp_is_continuous() {
            out.push("comp not continuous".into());
        }
        out
    }

    fn comp_is_continuous(&self) -> bool {
        // pairs (g, f) with s(g) = t(f)
        let fp = fiber_product_tables(&self.arrows, &self.src, &self.arrows, &self.tgt);
        let table: Vec<Point> = fp.pairs.iter().map(|&(g, f)| self.comp(g, f)).collect();
        is_continuous(&fp.space, &self.arrows, &table)
    }

    /// The source map is open.
    pub fn is_open(&self) -> bool {
        (0..self.arrows.len()).all(|a| {
            let image = self.objects.set(self.arrows.neighbourhood(a).ones().map(|b| self.src[b]));
            self.objects.is_open(&image)
        })
    }
}

/// A subset of arrows closed under composition and inverses, together with
/// its objects. Topologies are the subspace topologies of the ambient groupoid.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subgroupoid {
    arrows: PointSet,
    objects: PointSet,
}

impl Subgroupoid {
    pub fn new(g: &TopGroupoid, arrows: PointSet) -> Result<Self, GroupoidError> {
        let arrows = set_of(g.arrow_count(), arrows.ones());
        if close_subgroupoid(g, &arrows) != arrows {
            return Err(GroupoidError::NotSubgroupoid);
        }
        Ok(Self::from_closed(g, arrows))
    }

    fn from_closed(g: &TopGroupoid, arrows: PointSet) -> Self {
        let objects = g.objects.set(arrows.ones().map(|a| g.src[a]));
        Subgroupoid { arrows, objects }
    }

    /// Smallest subgroupoid containing `arrows`.
    pub fn generated(g: &TopGroupoid, arrows: &PointSet) -> Self {
        Self::from_closed(g, close_subgroupoid(g, arrows))
    }

    pub fn whole(g: &TopGroupoid) -> Self {
        Self::from_closed(g, g.arrows.full())
    }

    /// Identities on `objs` only.
    pub fn identities(g: &TopGroupoid, objs: &PointSet) -> Self {
        Self::from_closed(g, g.arrows.set(objs.ones().map(|x| g.unit[x])))
    }

    /// All arrows between objects of `objs`.
    pub fn full_on(g: &TopGroupoid, objs: &PointSet) -> Self {
        let mut arrows = g.src_preimage(objs);
        arrows.intersect_with(&g.tgt_preimage(objs));
        Self::from_closed(g, arrows)
    }

    pub fn arrows(&self) -> &PointSet {
        &self.arrows
    }

    pub fn objects(&self) -> &PointSet {
        &self.objects
    }

    pub fn contains(&self, a: Arrow) -> bool {
        self.arrows.contains(a)
    }

    pub fn is_open(&self, g: &TopGroupoid) -> bool {
        g.arrows.is_open(&self.arrows)
    }

    /// With subspace topologies, its source map is open.
    pub fn is_open_groupoid(&self, g: &TopGroupoid) -> bool {
        self.arrows.ones().all(|a| {
            let mut n = g.arrows.neighbourhood(a).clone();
            n.intersect_with(&self.arrows);
            let image = g.objects.set(n.ones().map(|b| g.src[b]));
            let mut hull = g.objects.open_hull(&image);
            hull.intersect_with(&self.objects);
            hull == image
        })
    }

    /// Every arrow between its objects belongs to it.
    pub fn is_full(&self, g: &TopGroupoid) -> bool {
        Subgroupoid::full_on(g, &self.objects).arrows == self.arrows
    }

    /// Its objects are closed under isomorphism in the ambient groupoid.
    pub fn is_replete(&self, g: &TopGroupoid) -> bool {
        (0..g.arrow_count()).all(|a| !self.objects.contains(g.src[a]) || self.objects.contains(g.tgt[a]))
    }

    /// Objects of the ambient groupoid isomorphic to one of its objects.
    pub fn orbit_closure(&self, g: &TopGroupoid) -> PointSet {
        g.saturate_objects(&self.objects)
    }

    pub fn labels(&self, g: &TopGroupoid) -> Vec<String> {
        self.arrows.ones().map(|a| g.arrows.label(a).to_string()).collect()
    }

    /// The subgroupoid as a groupoid in its own right, with its inclusion functor.
    pub fn materialize(&self, g: &Arc<TopGroupoid>) -> ContinuousFunctor {
        let (objects, obj_incl) = g.objects.subspace(&self.objects);
        let (arrows, arr_incl) = g.arrows.subspace(&self.arrows);
        let obj_of: Vec<Object> = obj_incl.table().to_vec();
        let arr_of: Vec<Arrow> = arr_incl.table().to_vec();
        let mut obj_index = vec![usize::MAX; g.object_count()];
        for (i, &x) in obj_of.iter().enumerate() {
            obj_index[x] = i;
        }
        let mut arr_index = vec![usize::MAX; g.arrow_count()];
        for (i, &a) in arr_of.iter().enumerate() {
            arr_index[a] = i;
        }
        let src = arr_of.iter().map(|&a| obj_index[g.src[a]]).collect();
        let tgt = arr_of.iter().map(|&a| obj_index[g.tgt[a]]).collect();
        let unit = obj_of.iter().map(|&x| arr_index[g.unit[x]]).collect();
        let inv = arr_of.iter().map(|&a| arr_index[g.inv[a]]).collect();
        let mut comp = Vec::new();
        for &f in &arr_of {
            for &h in &arr_of {
                if g.src[h] == g.tgt[f] {
                    comp.push((arr_index[f], arr_index[h], arr_index[g.comp(h, f)]));
                }
            }
        }
        let sub = TopGroupoid::new(objects, arrows, src, tgt, unit, inv, &comp).expect("subgroupoid shape");
        ContinuousFunctor { dom: Arc::new(sub), cod: g.clone(), obj: obj_of, arr: arr_of }
    }
}

fn close_subgroupoid(g: &TopGroupoid, seed: &PointSet) -> PointSet {
    let n = g.arrow_count();
    let mut set = set_of(n, seed.ones());
    let mut work: Vec<Arrow> = set.ones().collect();
    let add = |a: Arrow, set: &mut PointSet, work: &mut Vec<Arrow>| {
        if !set.contains(a) {
            set.insert(a);
            work.push(a);
        }
    };
    while let Some(a) = work.pop() {
        add(g.inv[a], &mut set, &mut work);
        let members: Vec<Arrow> = set.ones().collect();
        for b in members {
            if g.src[b] == g.tgt[a] {
                add(g.comp(b, a), &mut set, &mut work);
            }
            if g.src[a] == g.tgt[b] {
                add(g.comp(a, b), &mut set, &mut work);
            }
        }
    }
    set
}

fn close_open_subgroupoid(g: &TopGroupoid, seed: &PointSet) -> PointSet {
    let mut set = seed.clone();
    loop {
        let next = close_subgroupoid(g, &g.arrows.open_hull(&set));
        if next == set {
            return set;
        }
        set = next;
    }
}

/// Every subgroupoid, in canonical order; at most `budget` of them.
pub fn enumerate_subgroupoids(g: &TopGroupoid, budget: usize) -> Result<Vec<Subgroupoid>, GroupoidError> {
    closed_sets(g.arrow_count(), |s| close_subgroupoid(g, s), budget)
        .map(|sets| canonical_family(g.arrow_count(), sets).into_iter().map(|s| Subgroupoid::from_closed(g, s)).collect())
        .map_err(|budget| GroupoidError::BudgetExceeded { budget })
}

/// Every subgroupoid whose arrow set is open, in canonical order; at most `budget`.
pub fn enumerate_open_subgroupoids(g: &TopGroupoid, budget: usize) -> Result<Vec<Subgroupoid>, GroupoidError> {
    closed_sets(g.arrow_count(), |s| close_open_subgroupoid(g, s), budget)
        .map(|sets| canonical_family(g.arrow_count(), sets).into_iter().map(|s| Subgroupoid::from_closed(g, s)).collect())
        .map_err(|budget| GroupoidError::BudgetExceeded { budget })
}

/// The quotient of `U0` by the arrows of `U`, with the quotient map from the subspace `U0`.
pub fn orbit_space(g: &TopGroupoid, u: &Subgroupoid) -> (FinSpace, ContinuousMap) {
    let (sub, incl) = g.objects.subspace(&u.objects);
    let members = incl.table();
    let mut index = vec![usize::MAX; g.object_count()];
    for (i, &x) in members.iter().enumerate() {
        index[x] = i;
    }
    let mut uf = UnionFind::new(members.len());
    for a in u.arrows.ones() {
        uf.union(index[g.src[a]], index[g.tgt[a]]);
    }
    let classes: Vec<usize> = (0..members.len()).map(|i| uf.find(i)).collect();
    sub.quotient(&classes)
}

/// The space `_L[V]_R` of bi-orbits.
#[derive(Debug, Clone)]
pub struct BiOrbitSpace {
    /// `V` with its subspace topology, points in increasing arrow order.
    pub subspace: FinSpace,
    /// Arrow of the ambient groupoid behind each point of `subspace`.
    pub members: Vec<Arrow>,
    /// The quotient space of bi-orbits.
    pub space: FinSpace,
    pub quotient: ContinuousMap,
    class_of: Vec<Option<Point>>,
}

impl BiOrbitSpace {
    /// The bi-orbit containing arrow `a`, if `a ∈ V`.
    pub fn class_of(&self, a: Arrow) -> Option<Point> {
        self.class_of.get(a).copied().flatten()
    }

    /// Arrows of `V` in the bi-orbit `c`.
    pub fn orbit(&self, c: Point) -> Vec<Arrow> {
        (0..self.class_of.len()).filter(|&a| self.class_of[a] == Some(c)).collect()
    }
}

/// Bi-orbits of `v` under post-composition by `left` and pre-composition by `right`.
pub fn bi_orbit_space(
    g: &TopGroupoid,
    left: &Subgroupoid,
    right: &Subgroupoid,
    v: &PointSet,
) -> Result<BiOrbitSpace, GroupoidError> {
    let (subspace, incl) = g.arrows.subspace(v);
    let members = incl.table().to_vec();
    let mut index = vec![usize::MAX; g.arrow_count()];
    for (i, &a) in members.iter().enumerate() {
        index[a] = i;
    }
    let mut uf = UnionFind::new(members.len());
    for (i, &a) in members.iter().enumerate() {
        for c in left.arrows.ones().filter(|&c| g.src[c] == g.tgt[a]) {
            let b = g.comp(c, a);
            if index[b] == usize::MAX {
                return Err(GroupoidError::NotBistable(g.arrows.label(a).into()));
            }
            uf.union(i, index[b]);
        }
        for c in right.arrows.ones().filter(|&c| g.tgt[c] == g.src[a]) {
            let b = g.comp(a, c);
            if index[b] == usize::MAX {
                return Err(GroupoidError::NotBistable(g.arrows.label(a).into()));
            }
            uf.union(i, index[b]);
        }
    }
    let classes: Vec<usize> = (0..members.len()).map(|i| uf.find(i)).collect();
    let (space, quotient) = subspace.quotient(&classes);
    let mut class_of = vec![None; g.arrow_count()];
    for (i, &a) in members.iter().enumerate() {
        class_of[a] = Some(quotient.apply(i));
    }
    Ok(BiOrbitSpace { subspace, members, space, quotient, class_of })
}

/// The comparison map `_Y[s⁻¹(U0) ∩ t⁻¹(Y0)]_U → _X[s⁻¹(U0)]_U`.
#[derive(Debug, Clone)]
pub struct Iota {
    pub domain: BiOrbitSpace,
    pub codomain: BiOrbitSpace,
    pub map: ContinuousMap,
}

pub fn iota_map(g: &TopGroupoid, y: &Subgroupoid, u: &Subgroupoid) -> Result<Iota, GroupoidError> {
    let s = g.src_preimage(&u.objects);
    let mut a = s.clone();
    a.intersect_with(&g.tgt_preimage(&y.objects));
    let domain = bi_orbit_space(g, y, u, &a)?;
    let codomain = bi_orbit_space(g, &Subgroupoid::whole(g), u, &s)?;
    let mut table = vec![usize::MAX; domain.space.len()];
    for (i, &arrow) in domain.members.iter().enumerate() {
        table[domain.quotient.apply(i)] = codomain.class_of(arrow).expect("domain arrows lie in the codomain");
    }
    let map = ContinuousMap::new(domain.space.clone(), codomain.space.clone(), table)?;
    Ok(Iota { domain, codomain, map })
}

/// A functor whose object and arrow maps are continuous.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContinuousFunctor {
    dom: Arc<TopGroupoid>,
    cod: Arc<TopGroupoid>,
    obj: Vec<Object>,
    arr: Vec<Arrow>,
}

impl ContinuousFunctor {
    /// Assemble a functor; only the shape is checked here.
    pub fn new(
        dom: Arc<TopGroupoid>,
        cod: Arc<TopGroupoid>,
        obj: Vec<Object>,
        arr: Vec<Arrow>,
    ) -> Result<Self, GroupoidError> {
        if obj.len() != dom.object_count() || arr.len() != dom.arrow_count() {
            return Err(GroupoidError::Malformed("functor tables have the wrong length".into()));
        }
        if obj.iter().any(|&x| x >= cod.object_count()) || arr.iter().any(|&a| a >= cod.arrow_count()) {
            return Err(GroupoidError::Malformed("functor value outside its codomain".into()));
        }
        Ok(ContinuousFunctor { dom, cod, obj, arr })
    }

    pub fn identity(g: &Arc<TopGroupoid>) -> Self {
        ContinuousFunctor {
            dom: g.clone(),
            cod: g.clone(),
            obj: (0..g.object_count()).collect(),
            arr: (0..g.arrow_count()).collect(),
        }
    }

    pub fn dom(&self) -> &Arc<TopGroupoid> {
        &self.dom
    }

    pub fn cod(&self) -> &Arc<TopGroupoid> {
        &self.cod
    }

    pub fn obj(&self, x: Object) -> Object {
        self.obj[x]
    }

    pub fn arr(&self, a: Arrow) -> Arrow {
        self.arr[a]
    }

    pub fn obj_table(&self) -> &[Object] {
        &self.obj
    }

    pub fn arr_table(&self) -> &[Arrow] {
        &self.arr
    }

    /// Every failed functor law or continuity condition.
    pub fn validate(&self) -> Vec<String> {
        let (x, y) = (&*self.dom, &*self.cod);
        let mut out = Vec::new();
        for a in 0..x.arrow_count() {
            let fa = self.arr[a];
            if y.src(fa) != self.obj[x.src(a)] || y.tgt(fa) != self.obj[x.tgt(a)] {
                out.push(format!("endpoints not preserved at {}", x.arrows().label(a)));
            }
            for b in x.arrows_from(x.tgt(a)) {
                if y.compose(self.arr[b], fa) != Some(self.arr[x.comp(b, a)]) {
                    out.push(format!("composition not preserved at {}", x.arrows().label(a)));
                    break;
                }
            }
        }
        for o in 0..x.object_count() {
            if self.arr[x.unit(o)] != y.unit(self.obj[o]) {
                out.push(format!("unit not preserved at {}", x.objects().label(o)));
            }
        }
        if !is_continuous(x.objects(), y.objects(), &self.obj) {
            out.push("object map not continuous".into());
        }
        if !is_continuous(x.arrows(), y.arrows(), &self.arr) {
            out.push("arrow map not continuous".into());
        }
        out
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &ContinuousFunctor) -> Result<ContinuousFunctor, GroupoidError> {
        if self.cod != next.dom {
            return Err(GroupoidError::Malformed("functors do not compose".into()));
        }
        Ok(ContinuousFunctor {
            dom: self.dom.clone(),
            cod: next.cod.clone(),
            obj: self.obj.iter().map(|&x| next.obj[x]).collect(),
            arr: self.arr.iter().map(|&a| next.arr[a]).collect(),
        })
    }

    /// Injective on objects and arrows, and a homeomorphism onto the image
    /// on both levels.
    pub fn is_embedding(&self) -> bool {
        let on = |dom: &FinSpace, cod: &FinSpace, t: &[Point]| {
            let image = cod.set(t.iter().copied());
            let (sub, incl) = cod.subspace(&image);
            let table: Vec<Point> = t.iter().map(|p| incl.table().binary_search(p).unwrap()).collect();
            ContinuousMap::new(dom.clone(), sub, table).is_ok_and(|m| m.is_homeomorphism())
        };
        on(self.dom.objects(), self.cod.objects(), &self.obj) && on(self.dom.arrows(), self.cod.arrows(), &self.arr)
    }

    /// The subgroupoid generated by the image arrows.
    pub fn image(&self) -> Subgroupoid {
        Subgroupoid::generated(&self.cod, &self.cod.arrows().set(self.arr.iter().copied()))
    }

    /// The full subgroupoid on the objects isomorphic to an image object.
    pub fn full_essential_image(&self) -> Subgroupoid {
        let objs = self.cod.objects().set(self.obj.iter().copied());
        Subgroupoid::full_on(&self.cod, &self.cod.saturate_objects(&objs))
    }

    /// The same functor viewed as landing in the materialised subgroupoid `sub`
    /// (given by its inclusion), which must contain the image.
    pub fn corestrict(&self, incl: &ContinuousFunctor) -> Option<ContinuousFunctor> {
        let obj = self.obj.iter().map(|x| incl.obj.binary_search(x).ok()).collect::<Option<Vec<_>>>()?;
        let arr = self.arr.iter().map(|a| incl.arr.binary_search(a).ok()).collect::<Option<Vec<_>>>()?;
        Some(ContinuousFunctor { dom: self.dom.clone(), cod: incl.dom.clone(), obj, arr })
    }
}

/// A natural transformation with continuous components `X0 → Y1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContinuousTransformation {
    source: ContinuousFunctor,
    target: ContinuousFunctor,
    component: Vec<Arrow>,
}

impl ContinuousTransformation {
    pub fn new(
        source: ContinuousFunctor,
        target: ContinuousFunctor,
        component: Vec<Arrow>,
    ) -> Result<Self, GroupoidError> {
        if source.dom != target.dom || source.cod != target.cod {
            return Err(GroupoidError::Malformed("transformation between functors of different types".into()));
        }
        if component.len() != source.dom.object_count() || component.iter().any(|&a| a >= source.cod.arrow_count()) {
            return Err(GroupoidError::Malformed("component table has the wrong shape".into()));
        }
        Ok(ContinuousTransformation { source, target, component })
    }

    pub fn identity(f: &ContinuousFunctor) -> Self {
        let component = f.obj.iter().map(|&y| f.cod.unit(y)).collect();
        ContinuousTransformation { source: f.clone(), target: f.clone(), component }
    }

    pub fn source(&self) -> &ContinuousFunctor {
        &self.source
    }

    pub fn target(&self) -> &ContinuousFunctor {
        &self.target
    }

    pub fn component(&self, x: Object) -> Arrow {
        self.component[x]
    }

    pub fn components(&self) -> &[Arrow] {
        &self.component
    }

    /// Every failed naturality, endpoint or continuity condition.
    pub fn validate(&self) -> Vec<String> {
        let (x, y) = (&*self.source.dom, &*self.source.cod);
        let mut out = Vec::new();
        for o in 0..x.object_count() {
            let c = self.component[o];
            if y.src(c) != self.source.obj[o] || y.tgt(c) != self.target.obj[o] {
                out.push(format!("component at {} has wrong endpoints", x.objects().label(o)));
            }
        }
        if !out.is_empty() {
            return out;
        }
        for a in 0..x.arrow_count() {
            let lhs = y.compose(self.target.arr[a], self.component[x.src(a)]);
            let rhs = y.compose(self.component[x.tgt(a)], self.source.arr[a]);
            if lhs.is_none() || lhs != rhs {
                out.push(format!("naturality fails at {}", x.arrows().label(a)));
            }
        }
        if !is_continuous(x.objects(), y.arrows(), &self.component) {
            out.push("component map not continuous".into());
        }
        out
    }

    /// `next · self`, for `self: F ⇒ G` and `next: G ⇒ H`.
    pub fn vertical(&self, next: &ContinuousTransformation) -> Result<Self, GroupoidError> {
        if self.target != next.source {
            return Err(GroupoidError::Malformed("transformations do not compose".into()));
        }
        let y = &self.source.cod;
        let component = (0..self.component.len()).map(|o| y.comp(next.component[o], self.component[o])).collect();
        Ok(ContinuousTransformation { source: self.source.clone(), target: next.target.clone(), component })
    }

    /// The inverse transformation `G ⇒ F`.
    pub fn inverse(&self) -> Self {
        let y = &self.source.cod;
        ContinuousTransformation {
            source: self.target.clone(),
            target: self.source.clone(),
            component: self.component.iter().map(|&c| y.inv(c)).collect(),
        }
    }

    /// `H · self`, for a functor `H` out of the codomain.
    pub fn whisker_after(&self, h: &ContinuousFunctor) -> Result<Self, GroupoidError> {
        Ok(ContinuousTransformation {
            source: self.source.then(h)?,
            target: self.target.then(h)?,
            component: self.component.iter().map(|&c| h.arr[c]).collect(),
        })
    }

    /// `self · K`, for a functor `K` into the domain.
    pub fn whisker_before(&self, k: &ContinuousFunctor) -> Result<Self, GroupoidError> {
        Ok(ContinuousTransformation {
            source: k.then(&self.source)?,
            target: k.then(&self.target)?,
            component: k.obj.iter().map(|&o| self.component[o]).collect(),
        })
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    pub(crate) fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // keep the smaller root so class ids follow first occurrence
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}
