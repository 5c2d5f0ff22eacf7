use super::model::{compose_isos, ep_below, ep_type, invert_iso, model_isomorphisms, FinModel, ModelIso, Sorted};
use super::{Element, Formula, GeometricFormula, LogicError, Signature, SortId};
use crate::fintop::{FinSpace, PointSet};
use crate::grpd::{Subgroupoid, TopGroupoid};
use crate::sheaf::EquivariantSheaf;
use crate::weq::Answer;
use itertools::Itertools;
use std::collections::HashMap;
use std::sync::Arc;

/// A model with its partial surjection from the parameter set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexedModel {
    pub name: String,
    pub model: FinModel,
    /// `indexing[p]` interprets parameter `p`, if defined.
    pub indexing: Vec<Option<Element>>,
}

impl IndexedModel {
    pub fn new(name: impl Into<String>, model: FinModel, indexing: Vec<Option<Element>>) -> Self {
        IndexedModel { name: name.into(), model, indexing }
    }

    /// Parameters interpreted in this model.
    pub fn domain(&self) -> Vec<usize> {
        (0..self.indexing.len()).filter(|&p| self.indexing[p].is_some()).collect()
    }
}

/// An isomorphism between two member models, by index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ModelArrow {
    pub src: usize,
    pub tgt: usize,
    pub map: ModelIso,
}

/// A groupoid of indexed models and some of their isomorphisms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelGroupoid {
    sig: Arc<Signature>,
    params: Vec<(String, SortId)>,
    models: Vec<IndexedModel>,
    isos: Vec<ModelArrow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LogicOptions {
    /// Bound on the quantifier rank of the formulas used.
    pub depth: usize,
    /// Bound on the length of parameter tuples.
    pub tuple_cap: usize,
}

impl Default for LogicOptions {
    fn default() -> Self {
        LogicOptions { depth: 2, tuple_cap: 3 }
    }
}

impl ModelGroupoid {
    pub fn new(
        sig: Arc<Signature>,
        params: Vec<(String, SortId)>,
        models: Vec<IndexedModel>,
        isos: Vec<ModelArrow>,
    ) -> Result<Self, LogicError> {
        let bad = |m: String| Err(LogicError::Groupoid(m));
        for (i, (p, s)) in params.iter().enumerate() {
            if *s >= sig.sorts().len() || params[..i].iter().any(|(q, _)| q == p) {
                return bad(format!("bad or repeated parameter {p}"));
            }
        }
        for (i, m) in models.iter().enumerate() {
            let fail = |message: String| Err(LogicError::Model { model: m.name.clone(), message });
            if models[..i].iter().any(|n| n.name == m.name) {
                return bad(format!("model name {} repeated", m.name));
            }
            if m.model.carriers().len() != sig.sorts().len()
                || m.model.relations().len() != sig.relations().len()
                || m.model.constants().len() != sig.constants().len()
            {
                return fail("does not match the signature".into());
            }
            if m.indexing.len() != params.len() {
                return fail(format!("indexing has {} entries for {} parameters", m.indexing.len(), params.len()));
            }
            let mut hit: Vec<Vec<bool>> = m.model.carriers().iter().map(|&n| vec![false; n]).collect();
            for (e, (p, s)) in m.indexing.iter().zip(&params) {
                if let Some(e) = *e {
                    if e >= m.model.carrier(*s) {
                        return fail(format!("parameter {p} interpreted outside its carrier"));
                    }
                    hit[*s][e] = true;
                }
            }
            if let Some((s, e)) = m.model.elements().find(|&(s, e)| !hit[s][e]) {
                return fail(format!("element {e} of sort {} is not named by a parameter", sig.sorts()[s]));
            }
        }
        let mut index = HashMap::new();
        for (k, a) in isos.iter().enumerate() {
            if a.src >= models.len() || a.tgt >= models.len() {
                return bad(format!("isomorphism {k} mentions an unknown model"));
            }
            if !models[a.src].model.is_isomorphism(&models[a.tgt].model, &a.map) {
                return bad(format!("arrow {k} is not an isomorphism"));
            }
            if index.insert(a.clone(), k).is_some() {
                return bad(format!("arrow {k} listed twice"));
            }
        }
        let g = ModelGroupoid { sig, params, models, isos };
        for (i, m) in g.models.iter().enumerate() {
            let id = ModelArrow { src: i, tgt: i, map: m.model.identity_iso() };
            if !index.contains_key(&id) {
                return bad(format!("identity of {} missing", m.name));
            }
        }
        for a in &g.isos {
            if !index.contains_key(&inverse(a)) {
                return bad(format!("inverse of {} missing", g.arrow_label(a)));
            }
            for b in g.isos.iter().filter(|b| b.src == a.tgt) {
                if !index.contains_key(&compose(a, b)) {
                    return bad(format!("composite of {} and {} missing", g.arrow_label(a), g.arrow_label(b)));
                }
            }
        }
        Ok(g)
    }

    /// Every isomorphism between the given models.
    pub fn with_all_isomorphisms(
        sig: Arc<Signature>,
        params: Vec<(String, SortId)>,
        models: Vec<IndexedModel>,
    ) -> Result<Self, LogicError> {
        let isos = all_isomorphisms(&models);
        Self::new(sig, params, models, isos)
    }

    /// The arrows generated by `gens` together with the identities.
    pub fn generated(
        sig: Arc<Signature>,
        params: Vec<(String, SortId)>,
        models: Vec<IndexedModel>,
        gens: Vec<ModelArrow>,
    ) -> Result<Self, LogicError> {
        let mut isos: Vec<ModelArrow> = models
            .iter()
            .enumerate()
            .map(|(i, m)| ModelArrow { src: i, tgt: i, map: m.model.identity_iso() })
            .collect();
        for g in gens {
            if g.src >= models.len() || g.tgt >= models.len() {
                return Err(LogicError::Groupoid("generator mentions an unknown model".into()));
            }
            if !isos.contains(&g) {
                isos.push(g);
            }
        }
        let mut k = 0;
        while k < isos.len() {
            let a = isos[k].clone();
            let mut new = vec![inverse(&a)];
            new.extend(isos.iter().filter(|b| b.src == a.tgt).map(|b| compose(&a, b)));
            new.extend(isos.iter().filter(|b| b.tgt == a.src).map(|b| compose(b, &a)));
            for n in new {
                if !isos.contains(&n) {
                    isos.push(n);
                }
            }
            k += 1;
        }
        Self::new(sig, params, models, isos)
    }

    /// Only identity arrows.
    pub fn identities(
        sig: Arc<Signature>,
        params: Vec<(String, SortId)>,
        models: Vec<IndexedModel>,
    ) -> Result<Self, LogicError> {
        let isos = models
            .iter()
            .enumerate()
            .map(|(i, m)| ModelArrow { src: i, tgt: i, map: m.model.identity_iso() })
            .collect();
        Self::new(sig, params, models, isos)
    }

    pub fn signature(&self) -> &Arc<Signature> {
        &self.sig
    }

    pub fn params(&self) -> &[(String, SortId)] {
        &self.params
    }

    pub fn models(&self) -> &[IndexedModel] {
        &self.models
    }

    pub fn isos(&self) -> &[ModelArrow] {
        &self.isos
    }

    pub fn arrow_label(&self, a: &ModelArrow) -> String {
        let (m, n) = (&self.models[a.src].name, &self.models[a.tgt].name);
        if a.src == a.tgt && a.map == self.models[a.src].model.identity_iso() {
            return format!("id_{m}");
        }
        let maps = a.map.iter().map(|s| s.iter().join(",")).join("/");
        format!("{m}->{n}:{maps}")
    }

    /// Sorted interpretation of the parameters `ps` in model `i`.
    fn interpret(&self, i: usize, ps: &[usize]) -> Option<Vec<Sorted>> {
        ps.iter().map(|&p| self.models[i].indexing[p].map(|e| (self.params[p].1, e))).collect()
    }

    /// Parameter tuples probed at model `i`: the subsets of its domain of
    /// size `min(cap, |domain|)`.
    fn probes(&self, i: usize, cap: usize) -> Vec<Vec<usize>> {
        let dom = self.models[i].domain();
        let k = cap.min(dom.len());
        dom.into_iter().combinations(k).collect()
    }

    /// Whether every formula of rank `d` with parameters from the probes of
    /// `i`, prefixed by `a`, that holds of `a` in `i` holds of `b` in `j`.
    fn below(&self, i: usize, a: &[Sorted], j: usize, b: &[Sorted], d: usize, cap: usize) -> bool {
        self.probes(i, cap).iter().all(|ps| match (self.interpret(i, ps), self.interpret(j, ps)) {
            (Some(pi), Some(pj)) => {
                let (mut x, mut y) = (a.to_vec(), b.to_vec());
                x.extend(pi);
                y.extend(pj);
                ep_below(&self.models[i].model, &x, &self.models[j].model, &y, d)
            }
            _ => false,
        })
    }

    fn neighbourhoods(&self, d: usize, cap: usize) -> (Vec<PointSet>, Vec<PointSet>) {
        let n0 = self.models.len();
        let objs: Vec<PointSet> = (0..n0)
            .map(|i| crate::fintop::set_of(n0, (0..n0).filter(|&j| self.below(i, &[], j, &[], d, cap))))
            .collect();
        let n1 = self.isos.len();
        let arrs = self
            .isos
            .iter()
            .map(|a| {
                let tracked: Vec<(usize, usize)> = if cap == 0 {
                    vec![]
                } else {
                    let (m, n) = (&self.models[a.src], &self.models[a.tgt]);
                    m.domain()
                        .into_iter()
                        .cartesian_product(n.domain())
                        .filter(|&(p, q)| {
                            let (s, e) = (self.params[p].1, m.indexing[p].unwrap());
                            self.params[q].1 == s && n.indexing[q] == Some(a.map[s][e])
                        })
                        .collect()
                };
                crate::fintop::set_of(
                    n1,
                    (0..n1).filter(|&b| {
                        let b = &self.isos[b];
                        objs[a.src].contains(b.src)
                            && objs[a.tgt].contains(b.tgt)
                            && tracked.iter().all(|&(p, q)| {
                                let s = self.params[p].1;
                                match (self.models[b.src].indexing[p], self.models[b.tgt].indexing[q]) {
                                    (Some(e), Some(f)) => b.map[s][e] == f,
                                    _ => false,
                                }
                            })
                    }),
                )
            })
            .collect();
        (objs, arrs)
    }

    fn assemble(&self, objs: Vec<PointSet>, arrs: Vec<PointSet>) -> Result<TopGroupoid, LogicError> {
        let obj_labels = self.models.iter().map(|m| m.name.clone()).collect();
        let arr_labels = self.isos.iter().map(|a| self.arrow_label(a)).collect();
        let objects = FinSpace::from_neighbourhoods(obj_labels, objs).map_err(|e| LogicError::Groupoid(e.to_string()))?;
        let arrows = FinSpace::from_neighbourhoods(arr_labels, arrs).map_err(|e| LogicError::Groupoid(e.to_string()))?;
        let index: HashMap<&ModelArrow, usize> = self.isos.iter().enumerate().map(|(k, a)| (a, k)).collect();
        let unit = self
            .models
            .iter()
            .enumerate()
            .map(|(i, m)| index[&ModelArrow { src: i, tgt: i, map: m.model.identity_iso() }])
            .collect();
        let inv = self.isos.iter().map(|a| index[&inverse(a)]).collect();
        let mut comp = Vec::new();
        for (f, a) in self.isos.iter().enumerate() {
            for (g, b) in self.isos.iter().enumerate().filter(|(_, b)| b.src == a.tgt) {
                comp.push((f, g, index[&compose(a, b)]));
            }
        }
        let g = TopGroupoid::new(
            objects,
            arrows,
            self.isos.iter().map(|a| a.src).collect(),
            self.isos.iter().map(|a| a.tgt).collect(),
            unit,
            inv,
            &comp,
        )
        .map_err(|e| LogicError::Groupoid(e.to_string()))?;
        let problems = g.validate();
        if !problems.is_empty() {
            return Err(LogicError::Groupoid(problems.join("; ")));
        }
        Ok(g)
    }

    /// The logical topologies, deepening the quantifier rank from 0 until two
    /// consecutive ranks give the same topologies or `opts.depth` is reached.
    pub fn logical_topologies(&self, opts: LogicOptions) -> Result<LogicalGroupoid, LogicError> {
        let mut current = self.neighbourhoods(0, opts.tuple_cap);
        let mut depth = 0;
        let mut stabilized = false;
        while depth < opts.depth {
            let next = self.neighbourhoods(depth + 1, opts.tuple_cap);
            depth += 1;
            if next == current {
                stabilized = true;
                break;
            }
            current = next;
        }
        let groupoid = Arc::new(self.assemble(current.0, current.1)?);
        Ok(LogicalGroupoid { models: self.clone(), groupoid, depth, stabilized, opts })
    }

    /// The logical topologies of formulas of rank exactly `opts.depth`.
    pub fn logical_topologies_at(&self, opts: LogicOptions) -> Result<LogicalGroupoid, LogicError> {
        let (objs, arrs) = self.neighbourhoods(opts.depth, opts.tuple_cap);
        let groupoid = Arc::new(self.assemble(objs, arrs)?);
        Ok(LogicalGroupoid { models: self.clone(), groupoid, depth: opts.depth, stabilized: false, opts })
    }

    /// Same models, every isomorphism between them. Returns the completion
    /// and the position of each original arrow in it.
    pub fn etale_completion(&self) -> (ModelGroupoid, Vec<usize>) {
        let isos = all_isomorphisms(&self.models);
        let index: HashMap<&ModelArrow, usize> = isos.iter().enumerate().map(|(k, a)| (a, k)).collect();
        let embedding = self.isos.iter().map(|a| index[a]).collect();
        let complete = ModelGroupoid { sig: self.sig.clone(), params: self.params.clone(), models: self.models.clone(), isos };
        (complete, embedding)
    }

    /// Pairs of models (by name) with an isomorphism missing from the arrows,
    /// with the number missing.
    pub fn missing_isomorphisms(&self) -> Vec<(String, String, usize)> {
        let mut out = Vec::new();
        for (i, m) in self.models.iter().enumerate() {
            for (j, n) in self.models.iter().enumerate() {
                let have = self.isos.iter().filter(|a| a.src == i && a.tgt == j).count();
                let all = model_isomorphisms(&m.model, &n.model).len();
                if have < all {
                    out.push((m.name.clone(), n.name.clone(), all - have));
                }
            }
        }
        out
    }

    /// The model groupoid on the objects and arrows of `sub`, a subgroupoid of
    /// the derived topological groupoid.
    pub fn restrict(&self, sub: &Subgroupoid) -> Result<ModelGroupoid, LogicError> {
        let objs: Vec<usize> = sub.objects().ones().collect();
        let renumber: HashMap<usize, usize> = objs.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let models = objs.iter().map(|&i| self.models[i].clone()).collect();
        let isos = sub
            .arrows()
            .ones()
            .map(|k| {
                let a = &self.isos[k];
                ModelArrow { src: renumber[&a.src], tgt: renumber[&a.tgt], map: a.map.clone() }
            })
            .collect();
        ModelGroupoid::new(self.sig.clone(), self.params.clone(), models, isos)
    }
}

fn inverse(a: &ModelArrow) -> ModelArrow {
    ModelArrow { src: a.tgt, tgt: a.src, map: invert_iso(&a.map) }
}

/// `b ∘ a`.
fn compose(a: &ModelArrow, b: &ModelArrow) -> ModelArrow {
    ModelArrow { src: a.src, tgt: b.tgt, map: compose_isos(&a.map, &b.map) }
}

fn all_isomorphisms(models: &[IndexedModel]) -> Vec<ModelArrow> {
    let mut isos = Vec::new();
    for (i, m) in models.iter().enumerate() {
        for (j, n) in models.iter().enumerate() {
            for map in model_isomorphisms(&m.model, &n.model) {
                isos.push(ModelArrow { src: i, tgt: j, map });
            }
        }
    }
    isos
}

/// A model groupoid with its logical topologies at a recorded rank.
#[derive(Debug, Clone)]
pub struct LogicalGroupoid {
    models: ModelGroupoid,
    groupoid: Arc<TopGroupoid>,
    depth: usize,
    stabilized: bool,
    opts: LogicOptions,
}

/// A definable sheaf with the `(model, tuple)` behind each point.
#[derive(Debug, Clone)]
pub struct DefinableSheaf {
    pub points: Vec<(usize, Vec<Element>)>,
    pub sheaf: EquivariantSheaf,
}

/// Result of the parameter-elimination search for one parameter tuple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TupleWitness {
    pub params: Vec<String>,
    /// A parameter-free formula defining the orbit, if one was found.
    pub formula: Option<GeometricFormula>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Elimination {
    /// `Yes` or `Unknown`; never `No`.
    pub answer: Answer,
    pub depth: usize,
    pub tuple_cap: usize,
    pub tuples: Vec<TupleWitness>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EtaleCompleteness {
    pub answer: Answer,
    pub missing_isomorphisms: Vec<(String, String, usize)>,
    /// Finite spaces are sober exactly when they are T0.
    pub sober: bool,
    pub elimination: Elimination,
}

impl LogicalGroupoid {
    pub fn models(&self) -> &ModelGroupoid {
        &self.models
    }

    pub fn groupoid(&self) -> &Arc<TopGroupoid> {
        &self.groupoid
    }

    /// The rank whose formulas generate the topologies.
    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Whether the last deepening step changed nothing.
    pub fn stabilized(&self) -> bool {
        self.stabilized
    }

    pub fn options(&self) -> LogicOptions {
        self.opts
    }

    /// The sheaf of tuples satisfying `f`, topologised by formulas with
    /// parameters of rank at most [`depth`](Self::depth).
    pub fn definable_sheaf(&self, f: &GeometricFormula) -> Result<DefinableSheaf, LogicError> {
        let mg = &self.models;
        let sorts: Vec<SortId> = f.context().iter().map(|c| c.1).collect();
        let mut points = Vec::new();
        for (i, m) in mg.models.iter().enumerate() {
            for t in m.model.tuples(&sorts) {
                if m.model.satisfies(f, &t)? {
                    points.push((i, t));
                }
            }
        }
        let sorted = |t: &[Element]| -> Vec<Sorted> { sorts.iter().copied().zip(t.iter().copied()).collect() };
        let n = points.len();
        let nbhd = points
            .iter()
            .map(|(i, a)| {
                crate::fintop::set_of(
                    n,
                    (0..n).filter(|&q| {
                        let (j, b) = &points[q];
                        mg.below(*i, &sorted(a), *j, &sorted(b), self.depth, self.opts.tuple_cap)
                    }),
                )
            })
            .collect();
        let labels = points
            .iter()
            .map(|(i, t)| format!("{}:({})", mg.models[*i].name, t.iter().join(",")))
            .collect();
        let total = FinSpace::from_neighbourhoods(labels, nbhd).map_err(|e| LogicError::Groupoid(e.to_string()))?;
        let at: HashMap<&(usize, Vec<Element>), usize> = points.iter().enumerate().map(|(k, p)| (p, k)).collect();
        let mut action = Vec::new();
        for (g, a) in mg.isos.iter().enumerate() {
            for (y, (i, t)) in points.iter().enumerate().filter(|(_, p)| p.0 == a.src) {
                debug_assert_eq!(*i, a.src);
                let moved = (a.tgt, t.iter().zip(&sorts).map(|(&e, &s)| a.map[s][e]).collect());
                action.push((g, y, at[&moved]));
            }
        }
        let proj = points.iter().map(|p| p.0).collect();
        let sheaf = EquivariantSheaf::new(self.groupoid.clone(), total, proj, &action)
            .map_err(|e| LogicError::Groupoid(e.to_string()))?;
        let problems = sheaf.validate();
        if !problems.is_empty() {
            return Err(LogicError::NotASheaf(problems.join("; ")));
        }
        Ok(DefinableSheaf { points, sheaf })
    }

    /// The definable sheaf of `T` in context `x1 .. xk`, one variable per
    /// parameter, and the orbit of the parameters' interpretations in it.
    pub fn parameter_orbit(&self, params: &[usize]) -> Result<(DefinableSheaf, PointSet), LogicError> {
        let sheaf = self.definable_sheaf(&self.top_in(params)?)?;
        let seeds = sheaf.points.iter().enumerate().filter(|(_, (i, t))| {
            self.models.interpret(*i, params).is_some_and(|v| v.iter().map(|x| x.1).eq(t.iter().copied()))
        });
        let seeds = sheaf.sheaf.total().set(seeds.map(|(k, _)| k));
        let orbit = sheaf.sheaf.orbit_of_subset(&seeds);
        Ok((sheaf, orbit))
    }

    fn top_in(&self, params: &[usize]) -> Result<GeometricFormula, LogicError> {
        let context: Vec<(String, SortId)> =
            params.iter().enumerate().map(|(k, &p)| (format!("x{}", k + 1), self.models.params[p].1)).collect();
        GeometricFormula::new(&self.models.sig, Formula::True, &context)
    }

    /// Searches, for every parameter tuple up to the cap, a parameter-free
    /// formula of rank at most the requested depth defining its orbit.
    pub fn eliminates_parameters(&self) -> Result<Elimination, LogicError> {
        let mg = &self.models;
        let d = self.opts.depth;
        let mut tuples = Vec::new();
        for k in 1..=self.opts.tuple_cap.min(mg.params.len()) {
            for ps in (0..mg.params.len()).combinations(k) {
                let (sheaf, orbit) = self.parameter_orbit(&ps)?;
                let sorted = |(_, t): &(usize, Vec<Element>)| -> Vec<Sorted> {
                    ps.iter().map(|&p| mg.params[p].1).zip(t.iter().copied()).collect()
                };
                let pts = &sheaf.points;
                let closed = orbit.ones().all(|a| {
                    (0..pts.len()).all(|b| {
                        orbit.contains(b)
                            || !ep_below(&mg.models[pts[a].0].model, &sorted(&pts[a]), &mg.models[pts[b].0].model, &sorted(&pts[b]), d)
                    })
                });
                let formula = if closed {
                    let mut chis: Vec<Formula> = Vec::new();
                    for a in orbit.ones() {
                        let chi = ep_type(&mg.models[pts[a].0].model, &sorted(&pts[a]), d);
                        if !chis.contains(&chi) {
                            chis.push(chi);
                        }
                    }
                    let mut f = Formula::disj(chis);
                    let top = self.top_in(&ps)?;
                    let denotes = |f: &Formula| -> Result<PointSet, LogicError> {
                        let g = GeometricFormula::new(&mg.sig, f.clone(), top.context())?;
                        let mut s = PointSet::with_capacity(pts.len());
                        for (k, (i, t)) in pts.iter().enumerate() {
                            if mg.models[*i].model.satisfies(&g, t)? {
                                s.insert(k);
                            }
                        }
                        Ok(s)
                    };
                    debug_assert_eq!(denotes(&f)?, orbit);
                    reduce(&mut f, &|g| denotes(g).map(|s| s == orbit).unwrap_or(false));
                    Some(GeometricFormula::new(&mg.sig, f, top.context())?)
                } else {
                    None
                };
                tuples.push(TupleWitness { params: ps.iter().map(|&p| mg.params[p].0.clone()).collect(), formula });
            }
        }
        let answer = if tuples.iter().all(|t| t.formula.is_some()) { Answer::Yes } else { Answer::Unknown };
        Ok(Elimination { answer, depth: d, tuple_cap: self.opts.tuple_cap, tuples })
    }

    /// All isomorphisms present, sober object space, and parameters
    /// eliminated. The last may only be `Unknown`.
    pub fn is_etale_complete(&self) -> Result<EtaleCompleteness, LogicError> {
        let missing_isomorphisms = self.models.missing_isomorphisms();
        let sober = self.groupoid.objects().is_sober();
        let elimination = self.eliminates_parameters()?;
        let answer = if !missing_isomorphisms.is_empty() || !sober {
            Answer::No
        } else {
            elimination.answer
        };
        Ok(EtaleCompleteness { answer, missing_isomorphisms, sober, elimination })
    }

    /// The étale completion with the same options, and this groupoid as a
    /// subgroupoid of it.
    pub fn etale_completion(&self) -> Result<(LogicalGroupoid, Subgroupoid), LogicError> {
        let (complete, embedding) = self.models.etale_completion();
        let lg = complete.logical_topologies(self.opts)?;
        let arrows = lg.groupoid.arrows().set(embedding);
        let sub = Subgroupoid::new(&lg.groupoid, arrows).map_err(|e| LogicError::Groupoid(e.to_string()))?;
        Ok((lg, sub))
    }

    /// The logical groupoid of a subgroupoid's models at this same rank, with
    /// no further deepening.
    pub fn restrict(&self, sub: &Subgroupoid) -> Result<LogicalGroupoid, LogicError> {
        let models = self.models.restrict(sub)?;
        let (objs, arrs) = models.neighbourhoods(self.depth, self.opts.tuple_cap);
        let groupoid = Arc::new(models.assemble(objs, arrs)?);
        Ok(LogicalGroupoid { models, groupoid, depth: self.depth, stabilized: self.stabilized, opts: self.opts })
    }
}

/// Greedy simplification keeping `ok`: drop conjuncts and disjuncts and
/// weaken quantified subformulas to `T` while `ok` still holds.
fn reduce(f: &mut Formula, ok: &dyn Fn(&Formula) -> bool) {
    let mut i = 0;
    while i < f.size() {
        let mut changed = false;
        for choice in [2, 3, 1, 0] {
            let mut g = f.clone();
            if replace_at(&mut g, i, choice) && ok(&g) {
                *f = g;
                changed = true;
                break;
            }
        }
        if !changed {
            i += 1;
        }
    }
}

// Pre-order node `i`: 0 keeps the right operand, 1 the left, 2 turns an
// existential into `T`, 3 drops a vacuous quantifier.
fn replace_at(f: &mut Formula, i: usize, choice: u8) -> bool {
    fn go(f: &mut Formula, i: &mut usize, choice: u8) -> Option<bool> {
        if *i == 0 {
            let new = match (&*f, choice) {
                (Formula::And(_, b) | Formula::Or(_, b), 0) => (**b).clone(),
                (Formula::And(a, _) | Formula::Or(a, _), 1) => (**a).clone(),
                (Formula::Exists { .. }, 2) => Formula::True,
                (Formula::Exists { var, body, .. }, 3) if !body.free_vars().contains(var) => (**body).clone(),
                _ => return Some(false),
            };
            *f = new;
            return Some(true);
        }
        *i -= 1;
        match f {
            Formula::And(a, b) | Formula::Or(a, b) => go(a, i, choice).or_else(|| go(b, i, choice)),
            Formula::Exists { body, .. } => go(body, i, choice),
            _ => None,
        }
    }
    let mut i = i;
    go(f, &mut i, choice).unwrap_or(false)
}

/// Whether tuples of `m` with the same rank-`d` type, up to length `cap`,
/// are always related by an automorphism. Returns a counterexample pair
/// otherwise. Bounded types make this an approximation.
pub fn is_ultrahomogeneous(m: &FinModel, depth: usize, cap: usize) -> (Answer, Option<(Vec<Sorted>, Vec<Sorted>)>) {
    let autos = model_isomorphisms(m, m);
    let elems: Vec<Sorted> = m.elements().collect();
    for k in 1..=cap {
        let tuples: Vec<Vec<Sorted>> =
            std::iter::repeat(elems.iter().copied()).take(k).multi_cartesian_product().collect();
        for (x, a) in tuples.iter().enumerate() {
            for b in &tuples[x + 1..] {
                if ep_below(m, a, m, b, depth)
                    && ep_below(m, b, m, a, depth)
                    && !autos.iter().any(|s| a.iter().zip(b).all(|(&p, &q)| FinModel::apply(s, p) == q))
                {
                    return (Answer::No, Some((a.clone(), b.clone())));
                }
            }
        }
    }
    (Answer::Yes, None)
}
