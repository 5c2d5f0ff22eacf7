//! Equivariant sheaves on finite topological groupoids.
//!
//! A sheaf is stored extensionally: a finite total space, a projection to the
//! objects and an action table. Subobjects are the action-stable open subsets.

use crate::closure::closed_sets;
use crate::fintop::{canonical_family, fiber_product_tables, is_continuous, set_of, FinSpace, Point, PointSet};
use crate::grpd::{bi_orbit_space, Arrow, ContinuousFunctor, ContinuousTransformation, GroupoidError, Object, Subgroupoid, TopGroupoid};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SheafError {
    #[error("malformed sheaf: {0}")]
    Malformed(String),
    #[error("more than {cap} subobjects")]
    CapExceeded { cap: usize },
    #[error(transparent)]
    Groupoid(#[from] GroupoidError),
}

/// A local homeomorphism `q: Y → X0` with a continuous `X1`-action.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivariantSheaf {
    base: Arc<TopGroupoid>,
    total: FinSpace,
    proj: Vec<Object>,
    action: Vec<Option<Point>>,
}

impl EquivariantSheaf {
    /// Assemble a sheaf from triples `(g, y, g·y)`; only the shape is checked.
    pub fn new(
        base: Arc<TopGroupoid>,
        total: FinSpace,
        proj: Vec<Object>,
        action: &[(Arrow, Point, Point)],
    ) -> Result<Self, SheafError> {
        let ny = total.len();
        if proj.len() != ny || proj.iter().any(|&x| x >= base.object_count()) {
            return Err(SheafError::Malformed("projection table has the wrong shape".into()));
        }
        let mut table = vec![None; base.arrow_count() * ny];
        for &(g, y, z) in action {
            if g >= base.arrow_count() || y >= ny || z >= ny {
                return Err(SheafError::Malformed("action mentions an unknown point".into()));
            }
            let slot = &mut table[g * ny + y];
            if slot.is_some_and(|old| old != z) {
                return Err(SheafError::Malformed("action assigns two values to one pair".into()));
            }
            *slot = Some(z);
        }
        Ok(EquivariantSheaf { base, total, proj, action: table })
    }

    /// `Y = X0`, `q = id`, arrows act by moving to their target.
    pub fn terminal(base: &Arc<TopGroupoid>) -> Self {
        let action: Vec<_> = (0..base.arrow_count()).map(|g| (g, base.src(g), base.tgt(g))).collect();
        let proj = (0..base.object_count()).collect();
        Self::new(base.clone(), base.objects().clone(), proj, &action).unwrap()
    }

    pub fn base(&self) -> &Arc<TopGroupoid> {
        &self.base
    }

    pub fn total(&self) -> &FinSpace {
        &self.total
    }

    pub fn len(&self) -> usize {
        self.total.len()
    }

    pub fn is_empty(&self) -> bool {
        self.total.is_empty()
    }

    pub fn proj(&self, y: Point) -> Object {
        self.proj[y]
    }

    pub fn proj_table(&self) -> &[Object] {
        &self.proj
    }

    /// `g · y`, when `q(y) = s(g)`.
    pub fn try_act(&self, g: Arrow, y: Point) -> Option<Point> {
        self.action[g * self.total.len() + y]
    }

    pub fn act(&self, g: Arrow, y: Point) -> Point {
        self.try_act(g, y).expect("action on a non-composable pair")
    }

    /// All triples `(g, y, g·y)`.
    pub fn action_triples(&self) -> Vec<(Arrow, Point, Point)> {
        let ny = self.total.len();
        (0..self.action.len()).filter_map(|i| self.action[i].map(|z| (i / ny, i % ny, z))).collect()
    }

    /// Every violated condition, by name. Empty iff this is an equivariant sheaf.
    pub fn validate(&self) -> Vec<String> {
        let x = &*self.base;
        let ny = self.total.len();
        let lab = |y: Point| self.total.label(y).to_string();
        let mut out = Vec::new();
        if !is_continuous(&self.total, x.objects(), &self.proj) {
            out.push("projection not continuous".into());
        } else if !self.proj_is_local_homeomorphism() {
            out.push("projection not a local homeomorphism".into());
        }
        for g in 0..x.arrow_count() {
            for y in 0..ny {
                let defined = self.try_act(g, y);
                if (x.src(g) == self.proj[y]) != defined.is_some() {
                    out.push(format!(
                        "action domain wrong at ({}, {})",
                        x.arrows().label(g),
                        lab(y)
                    ));
                } else if let Some(z) = defined {
                    if self.proj[z] != x.tgt(g) {
                        out.push(format!("action lands in the wrong fiber at ({}, {})", x.arrows().label(g), lab(y)));
                    }
                }
            }
        }
        if !out.is_empty() {
            return out;
        }
        for y in 0..ny {
            if self.act(x.unit(self.proj[y]), y) != y {
                out.push(format!("unit law fails at {}", lab(y)));
            }
        }
        for y in 0..ny {
            for g in x.arrows_from(self.proj[y]) {
                let gy = self.act(g, y);
                if x.arrows_from(x.tgt(g)).any(|h| self.act(h, gy) != self.act(x.comp(h, g), y)) {
                    out.push(format!("composition law fails at {}", lab(y)));
                    break;
                }
            }
        }
        let fp = fiber_product_tables(x.arrows(), x.src_table(), &self.total, &self.proj);
        let table: Vec<Point> = fp.pairs.iter().map(|&(g, y)| self.act(g, y)).collect();
        if !is_continuous(&fp.space, &self.total, &table) {
            out.push("action not continuous".into());
        }
        out
    }

    fn proj_is_local_homeomorphism(&self) -> bool {
        let x = self.base.objects();
        (0..self.total.len()).all(|y| {
            let n = self.total.neighbourhood(y);
            let image = x.set(n.ones().map(|z| self.proj[z]));
            n.count_ones(..) == image.count_ones(..) && image == *x.neighbourhood(self.proj[y])
        })
    }

    /// The closure `V̄` of `v` under the action.
    pub fn orbit_of_subset(&self, v: &PointSet) -> PointSet {
        let mut out = set_of(self.total.len(), v.ones());
        let mut work: Vec<Point> = out.ones().collect();
        while let Some(y) = work.pop() {
            for g in self.base.arrows_from(self.proj[y]) {
                let z = self.act(g, y);
                if !out.contains(z) {
                    out.insert(z);
                    work.push(z);
                }
            }
        }
        out
    }

    pub fn is_stable(&self, v: &PointSet) -> bool {
        self.orbit_of_subset(v) == set_of(self.total.len(), v.ones())
    }

    /// The smallest action-stable open set containing `v`.
    pub fn stable_open_hull(&self, v: &PointSet) -> PointSet {
        let mut s = set_of(self.total.len(), v.ones());
        loop {
            let next = self.orbit_of_subset(&self.total.open_hull(&s));
            if next == s {
                return s;
            }
            s = next;
        }
    }

    /// The action orbits, as a partition of the total space.
    pub fn orbits(&self) -> Vec<PointSet> {
        let mut seen = self.total.none();
        let mut out = Vec::new();
        for y in 0..self.total.len() {
            if !seen.contains(y) {
                let o = self.orbit_of_subset(&self.total.set([y]));
                seen.union_with(&o);
                out.push(o);
            }
        }
        out
    }

    /// All subobjects, at most `cap` of them.
    pub fn subobjects(&self, cap: usize) -> Result<SubobjectLattice, SheafError> {
        let elements = closed_sets(self.total.len(), |s| self.stable_open_hull(s), cap)
            .map_err(|cap| SheafError::CapExceeded { cap })?;
        Ok(SubobjectLattice { elements: canonical_family(self.total.len(), elements) })
    }
}

/// The action-stable open subsets of a sheaf, ordered by size then members.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubobjectLattice {
    pub elements: Vec<PointSet>,
}

impl SubobjectLattice {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, s: &PointSet) -> bool {
        self.elements.binary_search_by(|e| cmp_canonical(e, s)).is_ok()
    }
}

fn cmp_canonical(a: &PointSet, b: &PointSet) -> std::cmp::Ordering {
    a.count_ones(..)
        .cmp(&b.count_ones(..))
        .then_with(|| a.ones().cmp(b.ones()))
}

/// The generator `t̄: [s⁻¹(U0)]_U → X0` attached to an open subgroupoid.
///
/// Points are the orbits of arrows out of `U0` under pre-composition by `U`;
/// arrows act by post-composition.
pub fn moerdijk_generator(x: &Arc<TopGroupoid>, u: &Subgroupoid) -> Result<EquivariantSheaf, SheafError> {
    if !u.is_open(x) {
        return Err(GroupoidError::NotOpen.into());
    }
    let nobody = Subgroupoid::identities(x, &x.objects().none());
    let b = bi_orbit_space(x, &nobody, u, &x.src_preimage(u.objects()))?;
    let proj = (0..b.space.len()).map(|c| x.tgt(b.orbit(c)[0])).collect();
    let mut action = Vec::new();
    for c in 0..b.space.len() {
        let alpha = b.orbit(c)[0];
        for g in x.arrows_from(x.tgt(alpha)) {
            let to = b.class_of(x.comp(g, alpha)).expect("post-composition stays in s⁻¹(U0)");
            action.push((g, c, to));
        }
    }
    EquivariantSheaf::new(x.clone(), b.space, proj, &action)
}

/// Pullback of `w` along `f`: points `(x, w)` with `f(x) = q(w)`.
pub fn inverse_image(f: &ContinuousFunctor, w: &EquivariantSheaf) -> Result<EquivariantSheaf, SheafError> {
    if f.cod() != w.base() {
        return Err(SheafError::Malformed("sheaf lives over another groupoid".into()));
    }
    let x = f.dom();
    let fp = fiber_product_tables(x.objects(), f.obj_table(), w.total(), w.proj_table());
    let proj = fp.pairs.iter().map(|p| p.0).collect();
    let mut action = Vec::new();
    for (i, &(o, v)) in fp.pairs.iter().enumerate() {
        for g in x.arrows_from(o) {
            let to = fp.index_of(x.tgt(g), w.act(f.arr(g), v)).expect("pulled-back action is defined");
            action.push((g, i, to));
        }
    }
    EquivariantSheaf::new(x.clone(), fp.space, proj, &action)
}

/// An equivariant continuous map over the identity of the base.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SheafMorphism {
    pub dom: EquivariantSheaf,
    pub cod: EquivariantSheaf,
    pub table: Vec<Point>,
}

impl SheafMorphism {
    pub fn identity(s: &EquivariantSheaf) -> Self {
        SheafMorphism { dom: s.clone(), cod: s.clone(), table: (0..s.len()).collect() }
    }

    /// Every failed condition, by name.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.dom.base() != self.cod.base() {
            return vec!["sheaves over different groupoids".into()];
        }
        if self.table.len() != self.dom.len() || self.table.iter().any(|&p| p >= self.cod.len()) {
            return vec!["table has the wrong shape".into()];
        }
        if (0..self.dom.len()).any(|y| self.cod.proj(self.table[y]) != self.dom.proj(y)) {
            out.push("does not commute with projections".into());
        } else {
            let x = self.dom.base();
            let equivariant = (0..self.dom.len()).all(|y| {
                x.arrows_from(self.dom.proj(y))
                    .all(|g| self.table[self.dom.act(g, y)] == self.cod.act(g, self.table[y]))
            });
            if !equivariant {
                out.push("not equivariant".into());
            }
        }
        if !is_continuous(self.dom.total(), self.cod.total(), &self.table) {
            out.push("not continuous".into());
        }
        out
    }
}

/// `F*W → G*W`, `(x, w) ↦ (x, a_x · w)`.
pub fn transformation_morphism(a: &ContinuousTransformation, w: &EquivariantSheaf) -> Result<SheafMorphism, SheafError> {
    let dom = inverse_image(a.source(), w)?;
    let cod = inverse_image(a.target(), w)?;
    let fp_dom = fiber_product_tables(a.source().dom().objects(), a.source().obj_table(), w.total(), w.proj_table());
    let fp_cod = fiber_product_tables(a.target().dom().objects(), a.target().obj_table(), w.total(), w.proj_table());
    let table = fp_dom
        .pairs
        .iter()
        .map(|&(o, v)| fp_cod.index_of(o, w.act(a.component(o), v)).expect("component lands in the target fiber"))
        .collect();
    Ok(SheafMorphism { dom, cod, table })
}

/// The map `Sub(⟨U⟩) → Sub(i*⟨U⟩)` for a subgroupoid inclusion `i: Y ↪ X`.
#[derive(Debug, Clone)]
pub struct SubobjectRestriction {
    /// The generator on `X`.
    pub generator: EquivariantSheaf,
    /// Its pullback to `Y`.
    pub pulled_back: EquivariantSheaf,
    /// Point of the generator behind each point of the pullback.
    pub embed: Vec<Point>,
}

impl SubobjectRestriction {
    pub fn new(x: &Arc<TopGroupoid>, y: &Subgroupoid, u: &Subgroupoid) -> Result<Self, SheafError> {
        let generator = moerdijk_generator(x, u)?;
        let incl = y.materialize(x);
        let pulled_back = inverse_image(&incl, &generator)?;
        let fp = fiber_product_tables(incl.dom().objects(), incl.obj_table(), generator.total(), generator.proj_table());
        let embed = fp.pairs.iter().map(|p| p.1).collect();
        Ok(SubobjectRestriction { generator, pulled_back, embed })
    }

    /// `W ↦ W ∩ [t⁻¹(Y0)]_U`, read in the pullback.
    pub fn apply(&self, w: &PointSet) -> PointSet {
        self.pulled_back.total().set((0..self.embed.len()).filter(|&i| w.contains(self.embed[i])))
    }

    fn image_set(&self) -> PointSet {
        self.generator.total().set(self.embed.iter().copied())
    }

    /// Injective iff every principal subobject `⟨p⟩` is generated by a point
    /// over `Y0`.
    pub fn is_injective(&self) -> bool {
        let g = &self.generator;
        let image = self.image_set();
        let hulls: Vec<PointSet> = (0..g.len()).map(|p| g.stable_open_hull(&g.total().set([p]))).collect();
        (0..g.len()).all(|p| image.ones().any(|q| hulls[p].contains(q) && hulls[q].contains(p)))
    }

    /// Surjective iff every principal subobject of the pullback is a restriction.
    pub fn is_surjective(&self) -> bool {
        let (g, t) = (&self.generator, &self.pulled_back);
        (0..t.len()).all(|i| {
            let hull = t.stable_open_hull(&t.total().set([i]));
            hull == self.apply(&g.stable_open_hull(&g.total().set([self.embed[i]])))
        })
    }

    pub fn is_bijective(&self) -> bool {
        self.is_injective() && self.is_surjective()
    }

    /// Bijectivity by listing both lattices; at most `cap` subobjects each.
    pub fn is_bijective_by_enumeration(&self, cap: usize) -> Result<bool, SheafError> {
        let source = self.generator.subobjects(cap)?;
        let target = self.pulled_back.subobjects(cap)?;
        let images = canonical_family(self.pulled_back.len(), source.elements.iter().map(|w| self.apply(w)));
        Ok(images.len() == source.len() && images == target.elements)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grpd::iota_map;

    fn names(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn s3() -> Arc<TopGroupoid> {
        let perms: Vec<[usize; 3]> = vec![[0, 1, 2], [1, 0, 2], [0, 2, 1], [2, 1, 0], [1, 2, 0], [2, 0, 1]];
        let idx = |p: [usize; 3]| perms.iter().position(|q| *q == p).unwrap();
        let table: Vec<Vec<usize>> = perms
            .iter()
            .map(|a| perms.iter().map(|b| idx([a[b[0]], a[b[1]], a[b[2]]])).collect())
            .collect();
        Arc::new(TopGroupoid::group((0..6).map(|i| i.to_string()).collect(), &table).unwrap())
    }

    #[test]
    fn terminal_sheaf_is_valid() {
        let g = s3();
        assert!(EquivariantSheaf::terminal(&g).validate().is_empty());
        let d = Arc::new(TopGroupoid::discrete(&FinSpace::sierpinski()));
        let t = EquivariantSheaf::terminal(&d);
        assert!(t.validate().is_empty());
        assert_eq!(t.subobjects(100).unwrap().elements, FinSpace::sierpinski().opens(100).unwrap());
    }

    #[test]
    fn corrupted_unit_is_named() {
        let g = s3();
        let h = Subgroupoid::generated(&g, &set_of(6, [1]));
        let w = moerdijk_generator(&g, &h).unwrap();
        let mut triples = w.action_triples();
        for t in triples.iter_mut() {
            if t.0 == 0 && t.1 == 0 {
                t.2 = 1;
            }
        }
        let bad = EquivariantSheaf::new(g.clone(), w.total().clone(), w.proj_table().to_vec(), &triples).unwrap();
        assert!(bad.validate().contains(&format!("unit law fails at {}", w.total().label(0))));
    }

    #[test]
    fn coset_generator() {
        let g = s3();
        let h = Subgroupoid::generated(&g, &set_of(6, [1]));
        let w = moerdijk_generator(&g, &h).unwrap();
        assert_eq!(w.len(), 3);
        assert!(w.validate().is_empty());
        assert_eq!(w.subobjects(100).unwrap().len(), 2);
        let a3 = Subgroupoid::generated(&g, &set_of(6, [4]));
        assert_eq!(moerdijk_generator(&g, &a3).unwrap().len(), 2);
    }

    #[test]
    fn trivial_and_whole_generators() {
        let x = Arc::new(TopGroupoid::pair(names(&["a", "b"])));
        let ids = Subgroupoid::identities(&x, &x.objects().full());
        let w = moerdijk_generator(&x, &ids).unwrap();
        assert_eq!(w.len(), x.arrow_count());
        assert!(w.validate().is_empty());
        let whole = moerdijk_generator(&x, &Subgroupoid::whole(&x)).unwrap();
        assert_eq!(whole.len(), 2);
        assert_eq!(whole.proj_table(), &[0, 1]);
    }

    #[test]
    fn non_open_subgroupoid_is_rejected() {
        let x = Arc::new(TopGroupoid::discrete(&FinSpace::sierpinski()));
        let closed_point = Subgroupoid::identities(&x, &set_of(2, [0]));
        assert!(moerdijk_generator(&x, &closed_point).is_err());
    }

    #[test]
    fn pullback_along_identity_and_constant() {
        let g = s3();
        let h = Subgroupoid::generated(&g, &set_of(6, [1]));
        let w = moerdijk_generator(&g, &h).unwrap();
        let same = inverse_image(&ContinuousFunctor::identity(&g), &w).unwrap();
        assert_eq!(same.len(), w.len());
        assert!(same.validate().is_empty());

        let two = Arc::new(TopGroupoid::discrete(&FinSpace::discrete(names(&["p", "q"]))));
        let c = ContinuousFunctor::new(two, g.clone(), vec![0, 0], vec![0, 0]).unwrap();
        let pulled = inverse_image(&c, &w).unwrap();
        assert_eq!(pulled.len(), 6);
        assert!(pulled.validate().is_empty());
    }

    #[test]
    fn pullback_of_generator_along_inclusion() {
        let x = Arc::new(TopGroupoid::pair(names(&["a", "b", "c"])));
        let y = Subgroupoid::full_on(&x, &set_of(3, [0, 1]));
        let u = Subgroupoid::full_on(&x, &set_of(3, [2]));
        let r = SubobjectRestriction::new(&x, &y, &u).unwrap();
        // arrows c→a, c→b
        assert_eq!(r.pulled_back.len(), 2);
        assert!(r.pulled_back.validate().is_empty());
    }

    #[test]
    fn transformation_morphisms() {
        let g = s3();
        let h = Subgroupoid::generated(&g, &set_of(6, [1]));
        let w = moerdijk_generator(&g, &h).unwrap();
        let id = ContinuousFunctor::identity(&g);
        let m = transformation_morphism(&ContinuousTransformation::identity(&id), &w).unwrap();
        assert_eq!(m, SheafMorphism::identity(&m.dom));

        // conjugation by a 3-cycle, c = 4
        let c = 4;
        let conj: Vec<usize> = (0..6).map(|a| g.comp(g.comp(c, a), g.inv(c))).collect();
        let f = ContinuousFunctor::new(g.clone(), g.clone(), vec![0], conj).unwrap();
        assert!(f.validate().is_empty());
        let t = ContinuousTransformation::new(id, f, vec![c]).unwrap();
        assert!(t.validate().is_empty());
        let m = transformation_morphism(&t, &w).unwrap();
        assert!(m.validate().is_empty());
        let mut sorted = m.table.clone();
        sorted.sort();
        assert_eq!(sorted, vec![0, 1, 2]);
        assert_ne!(m.table, vec![0, 1, 2]);
    }

    #[test]
    fn disjoint_orbits_give_boolean_lattice() {
        let d = Arc::new(TopGroupoid::discrete(&FinSpace::discrete(names(&["a", "b"]))));
        assert_eq!(EquivariantSheaf::terminal(&d).subobjects(100).unwrap().len(), 4);
    }

    #[test]
    fn restriction_examples() {
        let x = Arc::new(TopGroupoid::pair(names(&["a", "b"])));
        let u = Subgroupoid::identities(&x, &x.objects().full());
        let whole = Subgroupoid::whole(&x);
        let r = SubobjectRestriction::new(&x, &whole, &u).unwrap();
        assert!(r.is_bijective());
        let lattice = r.generator.subobjects(100).unwrap();
        assert!(lattice
            .elements
            .iter()
            .all(|w| r.generator.total().set(r.apply(w).ones().map(|i| r.embed[i])) == *w));

        let one = Subgroupoid::full_on(&x, &set_of(2, [0]));
        let r = SubobjectRestriction::new(&x, &one, &u).unwrap();
        // two orbits, {id_a, a->b} and {id_b, b->a}
        assert_eq!(r.generator.subobjects(100).unwrap().len(), 4);
        assert!(r.is_bijective());
        assert_eq!(r.is_bijective_by_enumeration(100), Ok(true));
        let u_a = Subgroupoid::identities(&x, &set_of(2, [0]));
        let r = SubobjectRestriction::new(&x, &one, &u_a).unwrap();
        assert_eq!(r.generator.subobjects(100).unwrap().len(), 2);
        assert_eq!(r.pulled_back.subobjects(100).unwrap().len(), 2);
        assert!(r.is_bijective());

        let d = Arc::new(TopGroupoid::discrete(&FinSpace::discrete(names(&["a", "b"]))));
        let one = Subgroupoid::full_on(&d, &set_of(2, [0]));
        let r = SubobjectRestriction::new(&d, &one, &Subgroupoid::whole(&d)).unwrap();
        assert!(!r.is_injective());
        assert!(r.is_surjective());
        assert_eq!(r.is_bijective_by_enumeration(100), Ok(false));
    }

    #[test]
    fn restriction_agrees_with_iota_on_small_cases() {
        let x = Arc::new(TopGroupoid::pair(names(&["a", "b"])));
        let subs = crate::grpd::enumerate_subgroupoids(&x, 100).unwrap();
        let opens = crate::grpd::enumerate_open_subgroupoids(&x, 100).unwrap();
        for y in &subs {
            for u in &opens {
                let r = SubobjectRestriction::new(&x, y, u).unwrap();
                let iota = iota_map(&x, y, u).unwrap();
                assert_eq!(r.is_bijective(), iota.map.is_quasi_homeomorphism());
                assert_eq!(r.is_bijective_by_enumeration(1000), Ok(r.is_bijective()));
            }
        }
    }
}
