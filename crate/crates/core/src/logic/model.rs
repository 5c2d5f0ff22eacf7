use super::{Element, Formula, GeometricFormula, LogicError, Signature, SortId, Term};
use std::collections::{BTreeMap, BTreeSet};

/// An element together with its sort.
pub type Sorted = (SortId, Element);

/// A finite structure: carrier `0..carriers[s]` for each sort `s`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FinModel {
    carriers: Vec<usize>,
    arities: Vec<Vec<SortId>>,
    const_sorts: Vec<SortId>,
    relations: Vec<BTreeSet<Vec<Element>>>,
    constants: Vec<Element>,
}

/// A sort-indexed bijection; `maps[s][e]` is the image of `e` of sort `s`.
pub type ModelIso = Vec<Vec<Element>>;

impl FinModel {
    pub fn new(
        sig: &Signature,
        carriers: Vec<usize>,
        relations: Vec<BTreeSet<Vec<Element>>>,
        constants: Vec<Element>,
    ) -> Result<Self, LogicError> {
        let bad = |message: String| Err(LogicError::Model { model: String::new(), message });
        if carriers.len() != sig.sorts().len() {
            return bad(format!("{} carriers for {} sorts", carriers.len(), sig.sorts().len()));
        }
        if relations.len() != sig.relations().len() || constants.len() != sig.constants().len() {
            return bad("relation or constant count does not match the signature".into());
        }
        for ((name, arity), tuples) in sig.relations().iter().zip(&relations) {
            for t in tuples {
                if t.len() != arity.len() || t.iter().zip(arity).any(|(&e, &s)| e >= carriers[s]) {
                    return bad(format!("tuple {t:?} of {name} does not fit its arity"));
                }
            }
        }
        for ((name, s), &e) in sig.constants().iter().zip(&constants) {
            if e >= carriers[*s] {
                return bad(format!("constant {name} interpreted outside its carrier"));
            }
        }
        Ok(FinModel {
            carriers,
            arities: sig.relations().iter().map(|r| r.1.clone()).collect(),
            const_sorts: sig.constants().iter().map(|c| c.1).collect(),
            relations,
            constants,
        })
    }

    /// A single-sorted model with only the given relations.
    pub fn single_sorted(sig: &Signature, size: usize, relations: Vec<Vec<Vec<Element>>>) -> Result<Self, LogicError> {
        Self::new(sig, vec![size], relations.into_iter().map(|r| r.into_iter().collect()).collect(), vec![])
    }

    pub fn carriers(&self) -> &[usize] {
        &self.carriers
    }

    pub fn carrier(&self, s: SortId) -> usize {
        self.carriers[s]
    }

    pub fn relation(&self, r: usize) -> &BTreeSet<Vec<Element>> {
        &self.relations[r]
    }

    pub fn relations(&self) -> &[BTreeSet<Vec<Element>>] {
        &self.relations
    }

    pub fn constant(&self, c: usize) -> Element {
        self.constants[c]
    }

    pub fn constants(&self) -> &[Element] {
        &self.constants
    }

    /// Every sorted element, sort by sort.
    pub fn elements(&self) -> impl Iterator<Item = Sorted> + '_ {
        self.carriers.iter().enumerate().flat_map(|(s, &n)| (0..n).map(move |e| (s, e)))
    }

    /// All tuples of the given sorts.
    pub fn tuples(&self, sorts: &[SortId]) -> Vec<Vec<Element>> {
        let mut out = vec![vec![]];
        for &s in sorts {
            out = out
                .into_iter()
                .flat_map(|t| {
                    (0..self.carriers[s]).map(move |e| {
                        let mut t = t.clone();
                        t.push(e);
                        t
                    })
                })
                .collect();
        }
        out
    }

    /// Satisfaction of `f` under `env`, which must bind every context variable.
    pub fn eval(&self, f: &GeometricFormula, env: &BTreeMap<String, Element>) -> Result<bool, LogicError> {
        let mut stack = Vec::with_capacity(f.context().len());
        for (v, s) in f.context() {
            let e = *env.get(v).ok_or_else(|| LogicError::Unbound(v.clone()))?;
            if e >= self.carriers[*s] {
                return Err(LogicError::Model { model: String::new(), message: format!("{v} := {e} lies outside its carrier") });
            }
            stack.push((v.clone(), e));
        }
        self.holds_in(f.body(), &mut stack)
    }

    /// Satisfaction with the context bound positionally to `tuple`.
    pub fn satisfies(&self, f: &GeometricFormula, tuple: &[Element]) -> Result<bool, LogicError> {
        if tuple.len() < f.context().len() {
            return Err(LogicError::Unbound(f.context()[tuple.len()].0.clone()));
        }
        let env = f.context().iter().map(|(v, _)| v.clone()).zip(tuple.iter().copied()).collect();
        self.eval(f, &env)
    }

    pub(crate) fn holds_in(&self, f: &Formula, env: &mut Vec<(String, Element)>) -> Result<bool, LogicError> {
        let value = |t: &Term, env: &Vec<(String, Element)>| match t {
            Term::Const(c) => Ok(self.constants[*c]),
            Term::Var(v) => env
                .iter()
                .rev()
                .find(|(w, _)| w == v)
                .map(|(_, e)| *e)
                .ok_or_else(|| LogicError::Unbound(v.clone())),
        };
        Ok(match f {
            Formula::True => true,
            Formula::False => false,
            Formula::Eq(a, b) => value(a, env)? == value(b, env)?,
            Formula::Rel(r, args) => {
                let t = args.iter().map(|a| value(a, env)).collect::<Result<Vec<_>, _>>()?;
                self.relations[*r].contains(&t)
            }
            Formula::And(a, b) => self.holds_in(a, env)? && self.holds_in(b, env)?,
            Formula::Or(a, b) => self.holds_in(a, env)? || self.holds_in(b, env)?,
            Formula::Exists { var, sort, body } => {
                let mut found = false;
                for e in 0..self.carriers[*sort] {
                    env.push((var.clone(), e));
                    let r = self.holds_in(body, env);
                    env.pop();
                    if r? {
                        found = true;
                        break;
                    }
                }
                found
            }
        })
    }

    /// Whether `map` is an isomorphism `self -> other`.
    pub fn is_isomorphism(&self, other: &FinModel, map: &ModelIso) -> bool {
        if map.len() != self.carriers.len() || self.carriers != other.carriers {
            return false;
        }
        for (s, m) in map.iter().enumerate() {
            let mut seen = vec![false; self.carriers[s]];
            if m.len() != self.carriers[s] {
                return false;
            }
            for &e in m {
                if e >= seen.len() || std::mem::replace(&mut seen[e], true) {
                    return false;
                }
            }
        }
        self.constants.iter().zip(&other.constants).zip(&self.const_sorts).all(|((&a, &b), &s)| map[s][a] == b)
            && self.relations.iter().zip(&other.relations).zip(&self.arities).all(|((rm, rn), arity)| {
                rm.len() == rn.len() && rm.iter().all(|t| rn.contains(&image(map, arity, t)))
            })
    }

    pub fn apply(map: &ModelIso, x: Sorted) -> Sorted {
        (x.0, map[x.0][x.1])
    }

    pub fn identity_iso(&self) -> ModelIso {
        self.carriers.iter().map(|&n| (0..n).collect()).collect()
    }
}

/// `g ∘ f`.
pub fn compose_isos(f: &ModelIso, g: &ModelIso) -> ModelIso {
    f.iter().zip(g).map(|(f, g)| f.iter().map(|&e| g[e]).collect()).collect()
}

pub fn invert_iso(f: &ModelIso) -> ModelIso {
    f.iter()
        .map(|m| {
            let mut inv = vec![0; m.len()];
            for (e, &x) in m.iter().enumerate() {
                inv[x] = e;
            }
            inv
        })
        .collect()
}

fn image(map: &ModelIso, arity: &[SortId], t: &[Element]) -> Vec<Element> {
    t.iter().zip(arity).map(|(&e, &s)| map[s][e]).collect()
}

/// All isomorphisms `m -> n`, in lexicographic order of their maps.
pub fn model_isomorphisms(m: &FinModel, n: &FinModel) -> Vec<ModelIso> {
    if m.carriers != n.carriers
        || m.relations.len() != n.relations.len()
        || m.relations.iter().zip(&n.relations).any(|(a, b)| a.len() != b.len())
    {
        return vec![];
    }
    // slots in sort order; constants pin their images
    let slots: Vec<Sorted> = m.elements().collect();
    let mut pinned: BTreeMap<Sorted, Element> = BTreeMap::new();
    for ((&a, &b), &s) in m.constants.iter().zip(&n.constants).zip(&m.const_sorts) {
        if *pinned.entry((s, a)).or_insert(b) != b {
            return vec![];
        }
    }
    let mut out = Vec::new();
    let mut map: ModelIso = m.carriers.iter().map(|&k| vec![usize::MAX; k]).collect();
    let mut used: Vec<Vec<bool>> = m.carriers.iter().map(|&k| vec![false; k]).collect();
    search(m, n, &slots, 0, &pinned, &mut map, &mut used, &mut out);
    out
}

#[allow(clippy::too_many_arguments)]
fn search(
    m: &FinModel,
    n: &FinModel,
    slots: &[Sorted],
    i: usize,
    pinned: &BTreeMap<Sorted, Element>,
    map: &mut ModelIso,
    used: &mut Vec<Vec<bool>>,
    out: &mut Vec<ModelIso>,
) {
    if i == slots.len() {
        if m.is_isomorphism(n, map) {
            out.push(map.clone());
        }
        return;
    }
    let (s, e) = slots[i];
    for f in 0..m.carriers[s] {
        if used[s][f] || pinned.get(&(s, e)).is_some_and(|&p| p != f) {
            continue;
        }
        map[s][e] = f;
        if consistent(m, n, map) {
            used[s][f] = true;
            search(m, n, slots, i + 1, pinned, map, used, out);
            used[s][f] = false;
        }
        map[s][e] = usize::MAX;
    }
}

// relation tuples whose entries are all mapped must land in the target
fn consistent(m: &FinModel, n: &FinModel, map: &ModelIso) -> bool {
    m.relations.iter().zip(&n.relations).zip(&m.arities).all(|((rm, rn), arity)| {
        rm.iter().all(|t| {
            let img = image_partial(map, arity, t);
            img.map_or(true, |img| rn.contains(&img))
        })
    })
}

fn image_partial(map: &ModelIso, arity: &[SortId], t: &[Element]) -> Option<Vec<Element>> {
    t.iter()
        .zip(arity)
        .map(|(&e, &s)| Some(map[s][e]).filter(|&f| f != usize::MAX))
        .collect()
}

/// The existential-positive comparison `(m, a) <=_d (n, b)`: every geometric
/// formula of quantifier rank at most `d` true of `a` in `m` is true of `b`
/// in `n`. Decided by the `d`-round game.
pub fn ep_below(m: &FinModel, a: &[Sorted], n: &FinModel, b: &[Sorted], d: usize) -> bool {
    if a.len() != b.len() || a.iter().zip(b).any(|(x, y)| x.0 != y.0) || !atoms_preserved(m, a, n, b) {
        return false;
    }
    if d == 0 {
        return true;
    }
    let mut a2 = a.to_vec();
    let mut b2 = b.to_vec();
    m.elements().all(|x| {
        a2.push(x);
        let ok = (0..n.carriers[x.0]).any(|f| {
            b2.push((x.0, f));
            let r = ep_below(m, &a2, n, &b2, d - 1);
            b2.pop();
            r
        });
        a2.pop();
        ok
    })
}

/// Names for the elements of `a` and the constants, in that order.
fn name_of(m: &FinModel, a: &[Sorted], x: Sorted) -> Option<Term> {
    if let Some(i) = a.iter().position(|&y| y == x) {
        return Some(Term::Var(format!("x{}", i + 1)));
    }
    m.constants
        .iter()
        .zip(&m.const_sorts)
        .position(|(&c, &s)| (s, c) == x)
        .map(Term::Const)
}

fn atoms_preserved(m: &FinModel, a: &[Sorted], n: &FinModel, b: &[Sorted]) -> bool {
    let lookup = |x: Sorted| -> Option<Sorted> {
        if let Some(i) = a.iter().position(|&y| y == x) {
            return Some(b[i]);
        }
        m.constants
            .iter()
            .zip(&m.const_sorts)
            .position(|(&c, &s)| (s, c) == x)
            .map(|c| (x.0, n.constants[c]))
    };
    for (i, x) in a.iter().enumerate() {
        for (j, y) in a.iter().enumerate().skip(i + 1) {
            if x == y && b[i] != b[j] {
                return false;
            }
        }
        for (c, (&e, &s)) in m.constants.iter().zip(&m.const_sorts).enumerate() {
            if (s, e) == *x && b[i] != (s, n.constants[c]) {
                return false;
            }
        }
    }
    for (c, (&e, &s)) in m.constants.iter().zip(&m.const_sorts).enumerate() {
        for (d, (&f, &t)) in m.constants.iter().zip(&m.const_sorts).enumerate().skip(c + 1) {
            if s == t && e == f && n.constants[c] != n.constants[d] {
                return false;
            }
        }
    }
    m.relations.iter().zip(&n.relations).zip(&m.arities).all(|((rm, rn), arity)| {
        rm.iter().all(|t| {
            let img: Option<Vec<Element>> =
                t.iter().zip(arity).map(|(&e, &s)| lookup((s, e)).map(|y| y.1)).collect();
            img.map_or(true, |img| rn.contains(&img))
        })
    })
}

/// A formula in `x1 .. xk` of quantifier rank `d` whose satisfying tuples in
/// any model `n` are exactly the `b` with `(m, a) <=_d (n, b)`.
pub fn ep_type(m: &FinModel, a: &[Sorted], d: usize) -> Formula {
    let mut parts = Vec::new();
    for (i, x) in a.iter().enumerate() {
        if let Some(j) = a[..i].iter().position(|y| y == x) {
            parts.push(Formula::Eq(Term::Var(format!("x{}", j + 1)), Term::Var(format!("x{}", i + 1))));
        } else if let Some(c @ Term::Const(_)) = name_of(m, &[], *x) {
            parts.push(Formula::Eq(Term::Var(format!("x{}", i + 1)), c));
        }
    }
    for (c, (&e, &s)) in m.constants.iter().zip(&m.const_sorts).enumerate() {
        if let Some(Term::Const(first)) = name_of(m, &[], (s, e)) {
            if first != c {
                parts.push(Formula::Eq(Term::Const(first), Term::Const(c)));
            }
        }
    }
    for (r, (tuples, arity)) in m.relations.iter().zip(&m.arities).enumerate() {
        for t in tuples {
            let args: Option<Vec<Term>> = t.iter().zip(arity).map(|(&e, &s)| name_of(m, a, (s, e))).collect();
            if let Some(args) = args {
                parts.push(Formula::Rel(r, args));
            }
        }
    }
    if d > 0 {
        let mut a2 = a.to_vec();
        for x in m.elements() {
            a2.push(x);
            parts.push(Formula::exists(format!("x{}", a2.len()), x.0, ep_type(m, &a2, d - 1)));
            a2.pop();
        }
    }
    Formula::conj(parts)
}
