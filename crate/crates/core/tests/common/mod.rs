#![allow(dead_code)]

pub mod groups;

use grpdtopos::fintop::{set_of, FinSpace, PointSet};
use grpdtopos::grpd::TopGroupoid;
use grpdtopos::logic::{FinModel, Formula, IndexedModel, ModelArrow, ModelGroupoid, Signature, SortId, Term};
use std::sync::Arc;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn names(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

type Perm = Vec<usize>;

fn compose(h: &Perm, g: &Perm) -> Perm {
    g.iter().map(|&p| h[p]).collect()
}

fn generated_group(m: usize, gens: &[Perm]) -> Vec<Perm> {
    let mut group: Vec<Perm> = vec![(0..m).collect()];
    let mut i = 0;
    while i < group.len() {
        for g in gens {
            let next = compose(g, &group[i]);
            if !group.contains(&next) {
                group.push(next);
            }
        }
        i += 1;
    }
    group.sort();
    group
}

/// A space on `n` points generated by up to four random subsets.
pub fn random_space(rng: &mut ChaCha8Rng, n: usize) -> FinSpace {
    let labels = (0..n).map(|i| format!("p{i}")).collect();
    let subbasis: Vec<PointSet> = (0..rng.gen_range(0..=4usize))
        .map(|_| set_of(n, (0..n).filter(|_| rng.gen_bool(0.5))))
        .collect();
    FinSpace::generate(labels, &subbasis).unwrap()
}

/// A random open groupoid with T0 object and arrow spaces and at most
/// `max_arrows` arrows.
///
/// Arrows act as permutations of a shared set `F`; each connected component is
/// a pair groupoid times a permutation group. Arrow opens are generated by
/// `s⁻¹O`, `t⁻¹O` and, optionally, `{α : α(p) = q}`. The object topology is
/// refined until the source map is open.
pub fn random_open_groupoid(rng: &mut ChaCha8Rng, max_arrows: usize) -> TopGroupoid {
    loop {
        if let Some(g) = try_open_groupoid(rng, max_arrows, true) {
            return g;
        }
    }
}

/// As [`random_open_groupoid`], without the T0 requirement.
pub fn random_open_groupoid_any(rng: &mut ChaCha8Rng, max_arrows: usize) -> TopGroupoid {
    loop {
        if let Some(g) = try_open_groupoid(rng, max_arrows, false) {
            return g;
        }
    }
}

fn try_open_groupoid(rng: &mut ChaCha8Rng, max_arrows: usize, t0: bool) -> Option<TopGroupoid> {
    let m = rng.gen_range(0..=3usize);
    let ncomp = rng.gen_range(1..=3usize);
    // (component objects, group)
    let mut comps = Vec::new();
    let mut total = 0;
    for _ in 0..ncomp {
        let k = rng.gen_range(1..=3usize);
        let ngens = rng.gen_range(0..=2usize);
        let gens: Vec<Perm> = (0..ngens)
            .map(|_| {
                let mut p: Perm = (0..m).collect();
                p.shuffle(rng);
                p
            })
            .collect();
        let group = generated_group(m, &gens);
        total += k * k * group.len();
        comps.push((k, group));
    }
    if total > max_arrows {
        return None;
    }
    let mut obj_base = Vec::new();
    let mut n0 = 0;
    for (k, _) in &comps {
        obj_base.push(n0);
        n0 += k;
    }
    // arrow = (src, tgt, perm)
    let mut arrows: Vec<(usize, usize, Perm)> = Vec::new();
    for (c, (k, group)) in comps.iter().enumerate() {
        for i in 0..*k {
            for j in 0..*k {
                for g in group {
                    arrows.push((obj_base[c] + i, obj_base[c] + j, g.clone()));
                }
            }
        }
    }
    let n1 = arrows.len();
    let index = |s: usize, t: usize, p: &Perm| arrows.iter().position(|a| a.0 == s && a.1 == t && &a.2 == p).unwrap();
    let src: Vec<usize> = arrows.iter().map(|a| a.0).collect();
    let tgt: Vec<usize> = arrows.iter().map(|a| a.1).collect();
    let ident: Perm = (0..m).collect();
    let unit: Vec<usize> = (0..n0).map(|x| index(x, x, &ident)).collect();
    let inv: Vec<usize> = arrows
        .iter()
        .map(|(s, t, p)| {
            let mut q = vec![0; m];
            for (i, &v) in p.iter().enumerate() {
                q[v] = i;
            }
            index(*t, *s, &q)
        })
        .collect();
    let mut comp = Vec::new();
    for (f, (fs, ft, fp)) in arrows.iter().enumerate() {
        for (g, (gs, gt, gp)) in arrows.iter().enumerate() {
            if gs == ft {
                comp.push((f, g, index(*fs, *gt, &compose(gp, fp))));
            }
        }
    }
    let use_values = rng.gen_bool(0.5);
    let mut value_sets = Vec::new();
    if use_values {
        for p in 0..m {
            for q in 0..m {
                value_sets.push(set_of(n1, (0..n1).filter(|&a| arrows[a].2[p] == q)));
            }
        }
    }
    let mut subbasis: Vec<PointSet> = (0..rng.gen_range(0..=3usize))
        .map(|_| set_of(n0, (0..n0).filter(|_| rng.gen_bool(0.5))))
        .collect();
    let obj_labels: Vec<String> = (0..n0).map(|i| format!("x{i}")).collect();
    let arr_labels: Vec<String> = (0..n1).map(|i| format!("a{i}")).collect();
    loop {
        let x0 = FinSpace::generate(obj_labels.clone(), &subbasis).ok()?;
        let mut arrow_sub = value_sets.clone();
        for x in 0..n0 {
            let o = x0.neighbourhood(x);
            arrow_sub.push(set_of(n1, (0..n1).filter(|&a| o.contains(src[a]))));
            arrow_sub.push(set_of(n1, (0..n1).filter(|&a| o.contains(tgt[a]))));
        }
        let x1 = FinSpace::generate(arr_labels.clone(), &arrow_sub).ok()?;
        let missing: Vec<PointSet> = (0..n1)
            .map(|a| x0.set(x1.neighbourhood(a).ones().map(|b| src[b])))
            .filter(|s| !x0.is_open(s))
            .collect();
        if missing.is_empty() {
            if t0 && (!x0.is_t0() || !x1.is_t0()) {
                return None;
            }
            let g = TopGroupoid::new(x0, x1, src, tgt, unit, inv, &comp).ok()?;
            assert!(g.validate().is_empty(), "generator produced {:?}", g.validate());
            assert!(g.is_open());
            return Some(g);
        }
        subbasis.extend(missing);
    }
}

/// A random groupoid of indexed models over a single sort with a unary `P`
/// and a binary `E`: up to `max_models` models with carriers of at most
/// `max_carrier` elements, arrows generated by random isomorphisms.
pub fn random_model_groupoid(rng: &mut ChaCha8Rng, max_models: usize, max_carrier: usize) -> ModelGroupoid {
    let sig = Arc::new(Signature::single_sorted(&[("P", 1), ("E", 2)]));
    let nparams = rng.gen_range(max_carrier..=max_carrier + 2);
    let params: Vec<(String, usize)> = (0..nparams).map(|i| (format!("m{i}"), 0)).collect();
    let nmodels = rng.gen_range(1..=max_models);
    let density = rng.gen_range(0.0..0.7);
    // a pool of shapes so that isomorphic models are common
    let shapes: Vec<FinModel> = (0..rng.gen_range(1..=nmodels))
        .map(|_| {
            let n = rng.gen_range(1..=max_carrier);
            let p: Vec<Vec<usize>> = (0..n).filter(|_| rng.gen_bool(density)).map(|e| vec![e]).collect();
            let e: Vec<Vec<usize>> = (0..n)
                .flat_map(|a| (0..n).map(move |b| vec![a, b]))
                .filter(|_| rng.gen_bool(density / 2.0))
                .collect();
            FinModel::single_sorted(&sig, n, vec![p, e]).unwrap()
        })
        .collect();
    let models: Vec<IndexedModel> = (0..nmodels)
        .map(|i| {
            let model = shapes.choose(rng).unwrap().clone();
            let n = model.carrier(0);
            let mut order: Vec<usize> = (0..nparams).collect();
            order.shuffle(rng);
            let mut idx = vec![None; nparams];
            for (k, &p) in order.iter().enumerate() {
                idx[p] = if k < n { Some(k) } else if rng.gen_bool(0.6) { Some(rng.gen_range(0..n)) } else { None };
            }
            IndexedModel::new(format!("M{i}"), model, idx)
        })
        .collect();
    let all = ModelGroupoid::with_all_isomorphisms(sig.clone(), params.clone(), models.clone()).unwrap();
    let keep = rng.gen_range(0.0..=1.0);
    let gens: Vec<ModelArrow> = all.isos().iter().filter(|_| rng.gen_bool(keep)).cloned().collect();
    ModelGroupoid::generated(sig, params, models, gens).unwrap()
}

/// A random formula over `sig` whose free variables come from `scope`, of
/// quantifier rank at most `depth`. Bound variables are named `y0, y1, ...`
/// and sometimes shadow an outer one.
pub fn random_formula(rng: &mut ChaCha8Rng, sig: &Signature, scope: &[(String, SortId)], depth: usize) -> Formula {
    fn term(rng: &mut ChaCha8Rng, sig: &Signature, scope: &[(String, SortId)], sort: SortId) -> Option<Term> {
        let vars: Vec<&String> = scope.iter().filter(|v| v.1 == sort).map(|v| &v.0).collect();
        let consts: Vec<usize> = (0..sig.constants().len()).filter(|&c| sig.constants()[c].1 == sort).collect();
        if !consts.is_empty() && (vars.is_empty() || rng.gen_bool(0.2)) {
            return Some(Term::Const(*consts.choose(rng).unwrap()));
        }
        vars.choose(rng).map(|v| Term::Var(v.to_string()))
    }
    fn go(rng: &mut ChaCha8Rng, sig: &Signature, scope: &mut Vec<(String, SortId)>, depth: usize, fuel: usize) -> Formula {
        let pick = if fuel == 0 { rng.gen_range(0..4) } else { rng.gen_range(0..8) };
        match pick {
            0 => Formula::True,
            1 => Formula::False,
            2 => {
                let s = rng.gen_range(0..sig.sorts().len());
                match (term(rng, sig, scope, s), term(rng, sig, scope, s)) {
                    (Some(a), Some(b)) => Formula::Eq(a, b),
                    _ => Formula::True,
                }
            }
            3 => {
                if sig.relations().is_empty() {
                    return Formula::False;
                }
                let r = rng.gen_range(0..sig.relations().len());
                let args: Option<Vec<Term>> =
                    sig.relations()[r].1.clone().into_iter().map(|s| term(rng, sig, scope, s)).collect();
                args.map_or(Formula::False, |a| Formula::Rel(r, a))
            }
            4 | 5 => Formula::and(go(rng, sig, scope, depth, fuel / 2), go(rng, sig, scope, depth, fuel / 2)),
            6 => Formula::or(go(rng, sig, scope, depth, fuel / 2), go(rng, sig, scope, depth, fuel / 2)),
            _ if depth == 0 => go(rng, sig, scope, 0, fuel - 1),
            _ => {
                let var = if !scope.is_empty() && rng.gen_bool(0.2) {
                    scope.choose(rng).unwrap().0.clone()
                } else {
                    format!("y{}", scope.len())
                };
                let sort = rng.gen_range(0..sig.sorts().len());
                let mut inner: Vec<(String, SortId)> = scope.iter().filter(|v| v.0 != var).cloned().collect();
                inner.push((var.clone(), sort));
                let body = go(rng, sig, &mut inner, depth - 1, fuel - 1);
                Formula::exists(var, sort, body)
            }
        }
    }
    go(rng, sig, &mut scope.to_vec(), depth, 6)
}

/// A random model groupoid `X`, its étale completion `V`, and the inclusion
/// `X ↪ V`, when that inclusion certifies as a weak equivalence.
pub struct CompletionCase {
    pub x: grpdtopos::logic::LogicalGroupoid,
    pub v: grpdtopos::logic::LogicalGroupoid,
    pub incl: grpdtopos::frac::ModelFunctor,
}

pub const FRAC_OPTIONS: grpdtopos::logic::LogicOptions = grpdtopos::logic::LogicOptions { depth: 1, tuple_cap: 2 };

pub fn completion_case(seed: u64, max_models: usize) -> Option<CompletionCase> {
    use grpdtopos::frac::{make_cospan, ModelFunctor};
    use grpdtopos::grpd::Subgroupoid;
    let mg = random_model_groupoid(&mut rng(seed), max_models, 2);
    let (full, embedding) = mg.etale_completion();
    let v = full.logical_topologies_at(FRAC_OPTIONS).unwrap();
    let sub = Subgroupoid::new(v.groupoid(), v.groupoid().arrows().set(embedding)).unwrap();
    let incl = ModelFunctor::inclusion(&v, &sub).unwrap();
    make_cospan(incl.clone(), incl.clone(), &grpdtopos::weq::Family::default()).ok()?;
    Some(CompletionCase { x: incl.dom().clone(), v, incl })
}
