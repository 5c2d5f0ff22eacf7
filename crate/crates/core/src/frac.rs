//! Morphisms of the localisation at weak equivalences.
//!
//! A morphism `A → B` is a cospan `A → P ← B` whose second leg is an
//! embedding onto a subgroupoid certified to be a weak equivalence. Both legs
//! are functors between groupoids of indexed models, which is what lets
//! [`ore_complete`] amalgamate two apexes into a new model groupoid.

use crate::grpd::{ContinuousFunctor, ContinuousTransformation, GroupoidError};
use crate::logic::{
    compose_isos, ep_type, invert_iso, model_isomorphisms, Element, GeometricFormula, IndexedModel, LogicError,
    LogicOptions, LogicalGroupoid, ModelArrow, ModelGroupoid, ModelIso, SortId,
};
use crate::weq::{is_weak_equivalence_all_modes, Answer, Family, Verdict, WeqError};
use std::collections::HashMap;
use thiserror::Error;

/// Default bound on the arrows of an amalgamated groupoid.
pub const DEFAULT_MERGE_BUDGET: usize = 2048;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FracError {
    #[error("functors do not fit together: {0}")]
    Mismatch(String),
    #[error("weak-equivalence certificate failed: {0}")]
    CertificateFailed(String),
    #[error("not presented by model groupoids over one signature: {0}")]
    NotModelPresented(String),
    #[error("merged groupoid has {arrows} arrows, over the budget of {budget}")]
    BudgetExceeded { arrows: usize, budget: usize },
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Groupoid(#[from] GroupoidError),
    #[error(transparent)]
    Weq(#[from] WeqError),
}

fn same(a: &LogicalGroupoid, b: &LogicalGroupoid) -> bool {
    a.models() == b.models() && a.groupoid() == b.groupoid()
}

/// A functor between logical groupoids given on objects, with a structure
/// isomorphism from each source model to its image. An arrow `a: M → N` goes
/// to `θ_N ∘ a ∘ θ_M⁻¹`.
#[derive(Debug, Clone)]
pub struct ModelFunctor {
    dom: LogicalGroupoid,
    cod: LogicalGroupoid,
    obj: Vec<usize>,
    theta: Vec<ModelIso>,
    functor: ContinuousFunctor,
}

impl ModelFunctor {
    pub fn new(dom: LogicalGroupoid, cod: LogicalGroupoid, obj: Vec<usize>, theta: Vec<ModelIso>) -> Result<Self, FracError> {
        let (x, y) = (dom.models(), cod.models());
        if x.signature() != y.signature() {
            return Err(FracError::NotModelPresented("different signatures".into()));
        }
        if obj.len() != x.models().len() || theta.len() != x.models().len() {
            return Err(FracError::Mismatch("one image and one isomorphism per model needed".into()));
        }
        for (i, m) in x.models().iter().enumerate() {
            let Some(n) = y.models().get(obj[i]) else {
                return Err(FracError::Mismatch(format!("image of {} out of range", m.name)));
            };
            if !m.model.is_isomorphism(&n.model, &theta[i]) {
                return Err(FracError::Mismatch(format!("map for {} is not an isomorphism onto {}", m.name, n.name)));
            }
        }
        let index: HashMap<(usize, usize, &ModelIso), usize> =
            y.isos().iter().enumerate().map(|(k, a)| ((a.src, a.tgt, &a.map), k)).collect();
        let mut arr = Vec::with_capacity(x.isos().len());
        for a in x.isos() {
            let map = compose_isos(&compose_isos(&invert_iso(&theta[a.src]), &a.map), &theta[a.tgt]);
            match index.get(&(obj[a.src], obj[a.tgt], &map)) {
                Some(&k) => arr.push(k),
                None => return Err(FracError::Mismatch(format!("no image for arrow {}", x.arrow_label(a)))),
            }
        }
        let functor = ContinuousFunctor::new(dom.groupoid().clone(), cod.groupoid().clone(), obj.clone(), arr)?;
        let problems = functor.validate();
        if !problems.is_empty() {
            return Err(FracError::Mismatch(problems.join("; ")));
        }
        Ok(ModelFunctor { dom, cod, obj, theta, functor })
    }

    pub fn identity(g: &LogicalGroupoid) -> Self {
        let theta = g.models().models().iter().map(|m| m.model.identity_iso()).collect();
        let obj = (0..g.models().models().len()).collect();
        Self::new(g.clone(), g.clone(), obj, theta).expect("identity functor")
    }

    /// The inclusion of a subgroupoid, with its models topologised at the
    /// same rank.
    pub fn inclusion(g: &LogicalGroupoid, sub: &crate::grpd::Subgroupoid) -> Result<Self, FracError> {
        let dom = g.restrict(sub)?;
        let obj: Vec<usize> = sub.objects().ones().collect();
        let theta = obj.iter().map(|&i| g.models().models()[i].model.identity_iso()).collect();
        Self::new(dom, g.clone(), obj, theta)
    }

    pub fn dom(&self) -> &LogicalGroupoid {
        &self.dom
    }

    pub fn cod(&self) -> &LogicalGroupoid {
        &self.cod
    }

    pub fn obj_table(&self) -> &[usize] {
        &self.obj
    }

    pub fn thetas(&self) -> &[ModelIso] {
        &self.theta
    }

    pub fn functor(&self) -> &ContinuousFunctor {
        &self.functor
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &ModelFunctor) -> Result<ModelFunctor, FracError> {
        if !same(&self.cod, &next.dom) {
            return Err(FracError::Mismatch("functors do not compose".into()));
        }
        let obj = self.obj.iter().map(|&i| next.obj[i]).collect();
        let theta = self.obj.iter().zip(&self.theta).map(|(&i, t)| compose_isos(t, &next.theta[i])).collect();
        Self::new(self.dom.clone(), next.cod.clone(), obj, theta)
    }
}

/// Certifies that `leg` is an embedding whose image is a weak equivalence.
fn certify_leg(leg: &ModelFunctor, family: &Family) -> Result<Verdict, FracError> {
    if !leg.functor.is_embedding() {
        return Err(FracError::CertificateFailed("leg is not an embedding".into()));
    }
    let verdict = is_weak_equivalence_all_modes(leg.cod.groupoid(), &leg.functor.image(), family)?;
    if verdict.answer != Answer::Yes {
        let why = verdict.witnesses.first().map_or(String::new(), |w| format!(": {}", w.reason));
        return Err(FracError::CertificateFailed(format!("answer {}{why}", verdict.answer)));
    }
    Ok(verdict)
}

/// A cospan `source → apex ← target` with a certified weak-equivalence leg.
#[derive(Debug, Clone)]
pub struct CospanMorphism {
    fwd: ModelFunctor,
    leg: ModelFunctor,
    certificate: Verdict,
}

/// Builds a cospan, certifying the second leg.
pub fn make_cospan(fwd: ModelFunctor, weq_leg: ModelFunctor, family: &Family) -> Result<CospanMorphism, FracError> {
    if !same(&fwd.cod, &weq_leg.cod) {
        return Err(FracError::Mismatch("legs have different codomains".into()));
    }
    let certificate = certify_leg(&weq_leg, family)?;
    Ok(CospanMorphism { fwd, leg: weq_leg, certificate })
}

impl CospanMorphism {
    pub fn identity(g: &LogicalGroupoid, family: &Family) -> Result<Self, FracError> {
        make_cospan(ModelFunctor::identity(g), ModelFunctor::identity(g), family)
    }

    pub fn source(&self) -> &LogicalGroupoid {
        &self.fwd.dom
    }

    pub fn target(&self) -> &LogicalGroupoid {
        &self.leg.dom
    }

    pub fn apex(&self) -> &LogicalGroupoid {
        &self.fwd.cod
    }

    pub fn fwd(&self) -> &ModelFunctor {
        &self.fwd
    }

    pub fn leg(&self) -> &ModelFunctor {
        &self.leg
    }

    pub fn certificate(&self) -> &Verdict {
        &self.certificate
    }
}

/// The completed square `φ′ ∘ ψ ≅ ψ′ ∘ φ`.
#[derive(Debug, Clone)]
pub struct OreSquare {
    /// `X → V`, certified.
    pub psi_prime: ModelFunctor,
    /// `W → V`.
    pub phi_prime: ModelFunctor,
    /// `φ′ ∘ ψ ⇒ ψ′ ∘ φ`.
    pub iso: ContinuousTransformation,
    pub certificate: Verdict,
}

fn tagged(tag: &str, params: &[(String, SortId)]) -> Vec<(String, SortId)> {
    params.iter().map(|(p, s)| (format!("{tag}:{p}"), *s)).collect()
}

/// `idx` read along `map⁻¹`: parameter `p` names `map⁻¹(idx[p])`.
fn pull_back(idx: &[Option<Element>], params: &[(String, SortId)], map: &ModelIso) -> Vec<Option<Element>> {
    let inv = invert_iso(map);
    idx.iter().zip(params).map(|(e, (_, s))| e.map(|e| inv[*s][e])).collect()
}

/// Models of `left` indexed by its parameters only, models of `right` by
/// theirs, and `extra` models indexed by both. With `links` the arrows are
/// generated by those of both sides and the links, otherwise they are every
/// isomorphism.
fn amalgam(
    left: (&str, &ModelGroupoid),
    right: (&str, &ModelGroupoid),
    extra: Vec<IndexedModel>,
    links: Option<Vec<ModelArrow>>,
    budget: usize,
) -> Result<ModelGroupoid, FracError> {
    let (l, r) = (left.1, right.1);
    if l.signature() != r.signature() {
        return Err(FracError::NotModelPresented("different signatures".into()));
    }
    let (nl, nr) = (l.params().len(), r.params().len());
    let mut params = tagged(left.0, l.params());
    params.extend(tagged(right.0, r.params()));
    let mut models: Vec<IndexedModel> = l
        .models()
        .iter()
        .map(|m| {
            let idx = m.indexing.iter().copied().chain(std::iter::repeat(None).take(nr)).collect();
            IndexedModel::new(format!("{}:{}", left.0, m.name), m.model.clone(), idx)
        })
        .collect();
    models.extend(r.models().iter().map(|m| {
        let idx = std::iter::repeat(None).take(nl).chain(m.indexing.iter().copied()).collect();
        IndexedModel::new(format!("{}:{}", right.0, m.name), m.model.clone(), idx)
    }));
    models.extend(extra);
    let sig = l.signature().clone();
    let over = |arrows: usize| Err(FracError::BudgetExceeded { arrows, budget });
    match links {
        None => {
            let arrows: usize = models
                .iter()
                .flat_map(|m| models.iter().map(move |n| model_isomorphisms(&m.model, &n.model).len()))
                .sum();
            if arrows > budget {
                return over(arrows);
            }
            Ok(ModelGroupoid::with_all_isomorphisms(sig, params, models)?)
        }
        Some(links) => {
            let shift = l.models().len();
            let mut gens: Vec<ModelArrow> = l.isos().to_vec();
            gens.extend(r.isos().iter().map(|a| ModelArrow { src: a.src + shift, tgt: a.tgt + shift, map: a.map.clone() }));
            gens.extend(links);
            let g = ModelGroupoid::generated(sig, params, models, gens)?;
            if g.isos().len() > budget {
                return over(g.isos().len());
            }
            Ok(g)
        }
    }
}

/// Completes `X ←φ Y ↪ψ W` to a square `X ↪ψ′ V ←φ′ W`.
///
/// `V` holds a copy of each model of `X` (parameters tagged `x:`), a copy
/// of each model of `W` (tagged `w:`), and for each model of `Y` that model
/// indexed both ways. Its arrows are all isomorphisms, topologised at the
/// larger rank of `X` and `W`. The leg `ψ′` is certified.
pub fn ore_complete(psi: &ModelFunctor, phi: &ModelFunctor, family: &Family, budget: usize) -> Result<OreSquare, FracError> {
    if !same(&psi.dom, &phi.dom) {
        return Err(FracError::Mismatch("the two functors start at different groupoids".into()));
    }
    let (y, w, x) = (psi.dom.models(), psi.cod.models(), phi.cod.models());
    let merged = y
        .models()
        .iter()
        .enumerate()
        .map(|(k, m)| {
            let (wi, xi) = (&w.models()[psi.obj[k]], &x.models()[phi.obj[k]]);
            let mut idx = pull_back(&xi.indexing, x.params(), &phi.theta[k]);
            idx.extend(pull_back(&wi.indexing, w.params(), &psi.theta[k]));
            IndexedModel::new(format!("y:{}", m.name), m.model.clone(), idx)
        })
        .collect();
    let v = amalgam(("x", x), ("w", w), merged, None, budget)?;
    let opts = LogicOptions {
        depth: phi.cod.depth().max(psi.cod.depth()),
        tuple_cap: phi.cod.options().tuple_cap.max(psi.cod.options().tuple_cap),
    };
    let v = v.logical_topologies_at(opts)?;
    let (nx, nw) = (x.models().len(), w.models().len());
    let ids = |g: &ModelGroupoid| g.models().iter().map(|m| m.model.identity_iso()).collect::<Vec<_>>();
    let psi_prime = ModelFunctor::new(phi.cod.clone(), v.clone(), (0..nx).collect(), ids(x))?;
    let phi_prime = ModelFunctor::new(psi.cod.clone(), v.clone(), (nx..nx + nw).collect(), ids(w))?;
    let top = psi.then(&phi_prime)?;
    let bottom = phi.then(&psi_prime)?;
    let index: HashMap<(usize, usize, &ModelIso), usize> =
        v.models().isos().iter().enumerate().map(|(k, a)| ((a.src, a.tgt, &a.map), k)).collect();
    let component = (0..y.models().len())
        .map(|k| {
            let map = compose_isos(&invert_iso(&psi.theta[k]), &phi.theta[k]);
            index[&(top.obj[k], bottom.obj[k], &map)]
        })
        .collect();
    let iso = ContinuousTransformation::new(top.functor.clone(), bottom.functor.clone(), component)?;
    let problems = iso.validate();
    if !problems.is_empty() {
        return Err(FracError::CertificateFailed(format!("square does not commute: {}", problems.join("; "))));
    }
    let certificate = certify_leg(&psi_prime, family)?;
    Ok(OreSquare { psi_prime, phi_prime, iso, certificate })
}

/// `g ∘ f`, with the square used to build it.
pub fn compose_with_square(
    f: &CospanMorphism,
    g: &CospanMorphism,
    family: &Family,
    budget: usize,
) -> Result<(CospanMorphism, OreSquare), FracError> {
    if !same(f.target(), g.source()) {
        return Err(FracError::Mismatch("target of the first is not the source of the second".into()));
    }
    let square = ore_complete(&f.leg, &g.fwd, family, budget)?;
    let fwd = f.fwd.then(&square.phi_prime)?;
    let leg = g.leg.then(&square.psi_prime)?;
    Ok((make_cospan(fwd, leg, family)?, square))
}

/// `g ∘ f`: the apex is the Ore completion of `f`'s leg against `g`'s
/// forward functor.
pub fn compose(f: &CospanMorphism, g: &CospanMorphism, family: &Family, budget: usize) -> Result<CospanMorphism, FracError> {
    compose_with_square(f, g, family, budget).map(|r| r.0)
}

/// A 2-cell between cospans with the same apex and leg.
#[derive(Debug, Clone)]
pub struct TwoCell {
    source: CospanMorphism,
    target: CospanMorphism,
    cell: ContinuousTransformation,
}

impl TwoCell {
    pub fn new(source: CospanMorphism, target: CospanMorphism, cell: ContinuousTransformation) -> Result<Self, FracError> {
        if !same(source.apex(), target.apex()) || source.leg.functor != target.leg.functor {
            return Err(FracError::Mismatch("2-cells need a shared apex and leg".into()));
        }
        if *cell.source() != source.fwd.functor || *cell.target() != target.fwd.functor {
            return Err(FracError::Mismatch("transformation is not between the forward legs".into()));
        }
        let problems = cell.validate();
        if !problems.is_empty() {
            return Err(FracError::Mismatch(problems.join("; ")));
        }
        Ok(TwoCell { source, target, cell })
    }

    pub fn identity(c: &CospanMorphism) -> Self {
        TwoCell { source: c.clone(), target: c.clone(), cell: ContinuousTransformation::identity(&c.fwd.functor) }
    }

    pub fn source(&self) -> &CospanMorphism {
        &self.source
    }

    pub fn target(&self) -> &CospanMorphism {
        &self.target
    }

    pub fn cell(&self) -> &ContinuousTransformation {
        &self.cell
    }

    pub fn vertical(&self, next: &TwoCell) -> Result<TwoCell, FracError> {
        let cell = self.cell.vertical(&next.cell)?;
        TwoCell::new(self.source.clone(), next.target.clone(), cell)
    }
}

/// Continuous natural transformations `f ⇒ g`, at most `limit` of them, in
/// lexicographic order of their component tables.
pub fn transformations(f: &ContinuousFunctor, g: &ContinuousFunctor, limit: usize) -> Vec<ContinuousTransformation> {
    let (x, y) = (f.dom(), f.cod());
    let n = x.object_count();
    // arrows whose later endpoint is `o`, checked once `o` is assigned
    let mut closing: Vec<Vec<usize>> = vec![Vec::new(); n];
    for a in 0..x.arrow_count() {
        closing[x.src(a).max(x.tgt(a))].push(a);
    }
    let mut out = Vec::new();
    let mut comp = vec![0; n];
    fn go(
        o: usize,
        f: &ContinuousFunctor,
        g: &ContinuousFunctor,
        closing: &[Vec<usize>],
        comp: &mut Vec<usize>,
        out: &mut Vec<ContinuousTransformation>,
        limit: usize,
    ) {
        let (x, y) = (f.dom(), f.cod());
        if out.len() >= limit {
            return;
        }
        if o == x.object_count() {
            if let Ok(t) = ContinuousTransformation::new(f.clone(), g.clone(), comp.clone()) {
                if t.validate().is_empty() {
                    out.push(t);
                }
            }
            return;
        }
        for c in y.arrows_from(f.obj(o)).filter(|&c| y.tgt(c) == g.obj(o)).collect::<Vec<_>>() {
            comp[o] = c;
            let natural = closing[o].iter().all(|&a| {
                let lhs = y.compose(g.arr(a), comp[x.src(a)]);
                lhs.is_some() && lhs == y.compose(comp[x.tgt(a)], f.arr(a))
            });
            if natural {
                go(o + 1, f, g, closing, comp, out, limit);
            }
        }
    }
    if f.dom() == g.dom() && y == g.cod() {
        go(0, f, g, &closing, &mut comp, &mut out, limit);
    }
    out
}

/// An equivalence of cospans: a certified weak equivalence between apexes
/// and isomorphisms filling both triangles.
#[derive(Debug, Clone)]
pub struct CospanIso {
    pub map: ModelFunctor,
    pub certificate: Verdict,
    /// `map ∘ fwd₁ ⇒ fwd₂`.
    pub fwd_cell: ContinuousTransformation,
    /// `map ∘ leg₁ ⇒ leg₂`.
    pub leg_cell: ContinuousTransformation,
}

/// Certifies that `map` relates the two cospans, searching the filling
/// isomorphisms.
pub fn certify_cospan_iso(
    c1: &CospanMorphism,
    c2: &CospanMorphism,
    map: &ModelFunctor,
    family: &Family,
) -> Result<CospanIso, FracError> {
    if !same(c1.source(), c2.source()) || !same(c1.target(), c2.target()) {
        return Err(FracError::Mismatch("cospans between different groupoids".into()));
    }
    let certificate = certify_leg(map, family)?;
    let cell = |a: &ModelFunctor, b: &ModelFunctor, what: &str| -> Result<ContinuousTransformation, FracError> {
        let moved = a.then(map)?;
        transformations(&moved.functor, &b.functor, 1)
            .pop()
            .ok_or_else(|| FracError::CertificateFailed(format!("no continuous isomorphism fills the {what} triangle")))
    };
    let fwd_cell = cell(&c1.fwd, &c2.fwd, "forward")?;
    let leg_cell = cell(&c1.leg, &c2.leg, "leg")?;
    Ok(CospanIso { map: map.clone(), certificate, fwd_cell, leg_cell })
}

/// A common apex with both inclusions certified.
#[derive(Debug, Clone)]
pub struct MoritaWitness {
    pub apex: LogicalGroupoid,
    pub left: ModelFunctor,
    pub right: ModelFunctor,
    pub left_certificate: Verdict,
    pub right_certificate: Verdict,
}

#[derive(Debug, Clone)]
pub struct MoritaReport {
    /// `Yes` with a witness, otherwise `Unknown`.
    pub answer: Answer,
    pub witness: Option<MoritaWitness>,
    pub candidates_tried: usize,
    /// Candidates skipped for exceeding the arrow budget.
    pub over_budget: usize,
    /// A sentence true in a model on one side and in none on the other, when
    /// no model of one side is isomorphic to a model of the other.
    pub separating_sentence: Option<GeometricFormula>,
}

/// Searches amalgams of `x` and `y`, in increasing number of doubly indexed
/// models, for an apex into which both embed as weak equivalences. Never
/// answers `No`.
pub fn morita_search(
    x: &ModelGroupoid,
    y: &ModelGroupoid,
    opts: LogicOptions,
    family: &Family,
    budget: usize,
) -> Result<MoritaReport, FracError> {
    if x.signature() != y.signature() {
        return Err(FracError::NotModelPresented("different signatures".into()));
    }
    let (lx, ly) = (x.logical_topologies_at(opts)?, y.logical_topologies_at(opts)?);
    // doubly indexed copies, one per isomorphism between a model of x and one of y
    let mut pairs: Vec<IndexedModel> = Vec::new();
    let mut first_of_pair: Vec<IndexedModel> = Vec::new();
    for mx in x.models() {
        for my in y.models() {
            for (k, map) in model_isomorphisms(&mx.model, &my.model).into_iter().enumerate() {
                let mut idx = mx.indexing.clone();
                idx.extend(pull_back(&my.indexing, y.params(), &map));
                let m = IndexedModel::new(format!("xy:{}:{}:{k}", mx.name, my.name), mx.model.clone(), idx);
                if k == 0 {
                    first_of_pair.push(m.clone());
                }
                pairs.push(m);
            }
        }
    }
    let mut report =
        MoritaReport { answer: Answer::Unknown, witness: None, candidates_tried: 0, over_budget: 0, separating_sentence: None };
    if pairs.is_empty() {
        report.separating_sentence = separating_sentence(x, y, opts.depth);
    }
    if x == y {
        report.candidates_tried = 1;
        let left = ModelFunctor::identity(&lx);
        if let Ok(c) = certify_leg(&left, family) {
            report.answer = Answer::Yes;
            let witness = MoritaWitness { apex: lx.clone(), left: left.clone(), right: left, left_certificate: c.clone(), right_certificate: c };
            report.witness = Some(witness);
            return Ok(report);
        }
    }
    // one link x:M -> y:N per isomorphic pair, by its first isomorphism
    let n = x.models().len();
    let mut links = Vec::new();
    for (i, mx) in x.models().iter().enumerate() {
        for (j, my) in y.models().iter().enumerate() {
            if let Some(map) = model_isomorphisms(&mx.model, &my.model).into_iter().next() {
                links.push(ModelArrow { src: i, tgt: n + j, map });
            }
        }
    }
    let mut candidates: Vec<(Vec<IndexedModel>, Option<Vec<ModelArrow>>)> = Vec::new();
    if !links.is_empty() {
        candidates.push((vec![], Some(links)));
    }
    candidates.push((vec![], None));
    if !first_of_pair.is_empty() {
        candidates.push((first_of_pair, None));
    }
    if pairs.len() > candidates.last().map_or(0, |c| c.0.len()) {
        candidates.push((pairs, None));
    }
    let sides = |w: &LogicalGroupoid| -> Result<(ModelFunctor, ModelFunctor), FracError> {
        let ids = |g: &ModelGroupoid| g.models().iter().map(|m| m.model.identity_iso()).collect::<Vec<_>>();
        let left = ModelFunctor::new(lx.clone(), w.clone(), (0..n).collect(), ids(x))?;
        let right = ModelFunctor::new(ly.clone(), w.clone(), (n..n + y.models().len()).collect(), ids(y))?;
        Ok((left, right))
    };
    for (extra, links) in candidates {
        let w = match amalgam(("x", x), ("y", y), extra, links, budget) {
            Ok(w) => w,
            Err(FracError::BudgetExceeded { .. }) => {
                report.over_budget += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        report.candidates_tried += 1;
        let w = w.logical_topologies_at(opts)?;
        let Ok((left, right)) = sides(&w) else { continue };
        let (Ok(lc), Ok(rc)) = (certify_leg(&left, family), certify_leg(&right, family)) else { continue };
        report.answer = Answer::Yes;
        report.witness = Some(MoritaWitness { apex: w, left, right, left_certificate: lc, right_certificate: rc });
        return Ok(report);
    }
    if report.candidates_tried == 0 {
        return Err(FracError::BudgetExceeded { arrows: budget + 1, budget });
    }
    Ok(report)
}

/// The positive type of a model, as a sentence, that no model on the other
/// side satisfies.
fn separating_sentence(x: &ModelGroupoid, y: &ModelGroupoid, depth: usize) -> Option<GeometricFormula> {
    let sig = x.signature();
    for (this, other) in [(x, y), (y, x)] {
        for m in this.models() {
            let chi = GeometricFormula::new(sig, ep_type(&m.model, &[], depth), &[]).ok()?;
            if other.models().iter().all(|n| !n.model.satisfies(&chi, &[]).unwrap_or(true)) {
                return Some(chi);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grpd::Subgroupoid;
    use crate::logic::{FinModel, Signature};
    use std::sync::Arc;

    fn opts() -> LogicOptions {
        LogicOptions { depth: 1, tuple_cap: 2 }
    }

    fn pure_sig() -> Arc<Signature> {
        Arc::new(Signature::single_sorted(&[("P", 1)]))
    }

    /// A 2-element pure set named by `p, q`, with the given arrows.
    fn two_set(all: bool) -> ModelGroupoid {
        let sig = pure_sig();
        let m = FinModel::single_sorted(&sig, 2, vec![vec![]]).unwrap();
        let params = vec![("p".into(), 0), ("q".into(), 0)];
        let models = vec![IndexedModel::new("M", m, vec![Some(0), Some(1)])];
        if all {
            ModelGroupoid::with_all_isomorphisms(sig, params, models).unwrap()
        } else {
            ModelGroupoid::identities(sig, params, models).unwrap()
        }
    }

    #[test]
    fn identity_cospan_is_certified() {
        let g = two_set(true).logical_topologies_at(opts()).unwrap();
        let c = CospanMorphism::identity(&g, &Family::default()).unwrap();
        assert_eq!(c.certificate().answer, Answer::Yes);
        assert!(same(c.apex(), &g));
    }

    #[test]
    fn proper_subgroup_leg_is_rejected() {
        let g = two_set(true).logical_topologies_at(opts()).unwrap();
        let ids = Subgroupoid::identities(g.groupoid(), &g.groupoid().objects().full());
        let incl = ModelFunctor::inclusion(&g, &ids).unwrap();
        let err = make_cospan(incl.clone(), incl, &Family::default()).unwrap_err();
        assert!(matches!(err, FracError::CertificateFailed(_)), "{err}");
    }

    #[test]
    fn functors_must_send_arrows_to_arrows() {
        let full = two_set(true).logical_topologies_at(opts()).unwrap();
        let ids = two_set(false).logical_topologies_at(opts()).unwrap();
        let swap = vec![vec![1, 0]];
        // the swap of the full groupoid has no image among identities
        let err = ModelFunctor::new(full.clone(), ids, vec![0], vec![swap.clone()]).unwrap_err();
        assert!(matches!(err, FracError::Mismatch(_)));
        // conjugating by the swap is fine when the swap is there
        let conj = ModelFunctor::new(full.clone(), full.clone(), vec![0], vec![swap]).unwrap();
        assert_eq!(conj.functor().arr_table(), ModelFunctor::identity(&full).functor().arr_table());
    }

    #[test]
    fn ore_square_of_identities() {
        let g = two_set(true).logical_topologies_at(opts()).unwrap();
        let id = ModelFunctor::identity(&g);
        let sq = ore_complete(&id, &id, &Family::default(), DEFAULT_MERGE_BUDGET).unwrap();
        let v = sq.psi_prime.cod();
        let names: Vec<&str> = v.models().models().iter().map(|m| m.name.as_str()).collect();
        assert_eq!(names, ["x:M", "w:M", "y:M"]);
        assert_eq!(v.models().params().len(), 4);
        assert_eq!(sq.certificate.answer, Answer::Yes);
        assert!(sq.iso.validate().is_empty());
        // the component at M is the identity map from the w-copy to the x-copy
        let c = sq.iso.component(0);
        let a = &v.models().isos()[c];
        assert_eq!((a.src, a.tgt, a.map.clone()), (1, 0, vec![vec![0, 1]]));
    }

    #[test]
    fn units_hold_up_to_certified_isomorphism() {
        let fam = Family::default();
        let g = two_set(true).logical_topologies_at(opts()).unwrap();
        let id = CospanMorphism::identity(&g, &fam).unwrap();
        let (left, sq) = compose_with_square(&id, &id, &fam, DEFAULT_MERGE_BUDGET).unwrap();
        let iso = certify_cospan_iso(&id, &left, &sq.psi_prime, &fam).unwrap();
        assert!(iso.fwd_cell.validate().is_empty() && iso.leg_cell.validate().is_empty());
        certify_cospan_iso(&id, &left, &sq.phi_prime, &fam).unwrap();
    }

    #[test]
    fn vertical_two_cells() {
        let fam = Family::default();
        let g = two_set(true).logical_topologies_at(opts()).unwrap();
        let c = CospanMorphism::identity(&g, &fam).unwrap();
        let conj = ModelFunctor::new(g.clone(), g.clone(), vec![0], vec![vec![vec![1, 0]]]).unwrap();
        let d = make_cospan(conj, ModelFunctor::identity(&g), &fam).unwrap();
        let cells = transformations(c.fwd().functor(), d.fwd().functor(), 8);
        assert_eq!(cells.len(), 2);
        let one = TwoCell::new(c.clone(), d.clone(), cells[0].clone()).unwrap();
        let back = TwoCell::new(d.clone(), c.clone(), cells[0].inverse()).unwrap();
        let round = one.vertical(&back).unwrap();
        assert_eq!(round.cell().components(), TwoCell::identity(&c).cell().components());
    }

    #[test]
    fn morita_search_examples() {
        let fam = Family::default();
        let g = two_set(true);
        let r = morita_search(&g, &g, opts(), &fam, DEFAULT_MERGE_BUDGET).unwrap();
        assert_eq!(r.answer, Answer::Yes);
        let w = r.witness.unwrap();
        assert_eq!(w.left_certificate.answer, Answer::Yes);
        assert_eq!(w.right_certificate.answer, Answer::Yes);

        // a marked point against an unmarked pair
        let sig = pure_sig();
        let one = FinModel::single_sorted(&sig, 1, vec![vec![vec![0]]]).unwrap();
        let x = ModelGroupoid::with_all_isomorphisms(
            sig.clone(),
            vec![("p".into(), 0)],
            vec![IndexedModel::new("A", one, vec![Some(0)])],
        )
        .unwrap();
        let r = morita_search(&x, &g, opts(), &fam, DEFAULT_MERGE_BUDGET).unwrap();
        assert_eq!(r.answer, Answer::Unknown);
        let s = r.separating_sentence.unwrap();
        assert_eq!(s.display(&sig).to_string(), "exists x1:S. P(x1)");
    }

    #[test]
    fn identities_on_isomorphic_models() {
        let x = two_set(false);
        let sig = pure_sig();
        let m = FinModel::single_sorted(&sig, 2, vec![vec![]]).unwrap();
        let y = ModelGroupoid::identities(
            sig,
            vec![("a".into(), 0), ("b".into(), 0)],
            vec![IndexedModel::new("N", m, vec![Some(1), Some(0)])],
        )
        .unwrap();
        let r = morita_search(&x, &y, opts(), &Family::default(), DEFAULT_MERGE_BUDGET).unwrap();
        assert_eq!(r.answer, Answer::Yes);
        let w = r.witness.unwrap();
        let names: Vec<&str> = w.apex.models().models().iter().map(|m| m.name.as_str()).collect();
        assert_eq!(names, ["x:M", "y:N"]);
        assert_eq!(w.apex.models().isos().len(), 4);
    }

    #[test]
    fn budget_is_enforced() {
        let g = two_set(true);
        let h = two_set(false);
        let err = morita_search(&g, &h, opts(), &Family::default(), 3).unwrap_err();
        assert!(matches!(err, FracError::BudgetExceeded { .. }));
    }
}
