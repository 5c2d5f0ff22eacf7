use crate::docs::{labels, verdict_json, FamilyDoc, FunctorDoc, GroupoidDoc, SheafDoc, SpaceDoc, SubDoc};
use crate::error::{CliError, Loc};
use crate::report::{Inputs, Status};
use crate::theory::{CospanDoc, ModelFunctorDoc, ModelsDoc};
use crate::{Cli, Command, Inclusion, ModeArg, Options};
use grpdtopos::frac::{compose, make_cospan, morita_search, CospanMorphism, FracError};
use grpdtopos::grpd::{enumerate_open_subgroupoids, Subgroupoid, TopGroupoid};
use grpdtopos::logic::{parse_formula_in, Elimination, LogicOptions, LogicalGroupoid, ModelGroupoid};
use grpdtopos::sheaf::moerdijk_generator;
use grpdtopos::weq::{
    factorize, is_localic_surjection, is_subtopos_inclusion, is_weak_equivalence, is_weak_equivalence_all_modes, Answer,
    Family, Mode,
};
use serde_json::{json, Value};
use std::path::Path;
use std::sync::Arc;

type Outcome = Result<(Status, Value), CliError>;

pub fn name(c: &Command) -> &'static str {
    match c {
        Command::Validate { .. } => "validate",
        Command::Topology { .. } => "topology",
        Command::WeqCheck(_) => "weq-check",
        Command::SurjectionCheck(_) => "surjection-check",
        Command::InclusionCheck(_) => "inclusion-check",
        Command::Factorize { .. } => "factorize",
        Command::Generators { .. } => "generators",
        Command::Subobjects { .. } => "subobjects",
        Command::LogicalTopology { .. } => "logical-topology",
        Command::ElimParams { .. } => "elim-params",
        Command::EtaleComplete { .. } => "etale-complete",
        Command::Compose { .. } => "compose",
        Command::MoritaSearch { .. } => "morita-search",
    }
}

pub fn dispatch(cli: &Cli, inputs: &mut Inputs) -> Outcome {
    let o = &cli.opts;
    match &cli.command {
        Command::Validate { file, groupoid } => validate(o, inputs, file, groupoid.as_deref()),
        Command::Topology { space } => topology(o, inputs, space),
        Command::WeqCheck(i) => inclusion(o, inputs, i, Check::Weq),
        Command::SurjectionCheck(i) => inclusion(o, inputs, i, Check::Surjection),
        Command::InclusionCheck(i) => inclusion(o, inputs, i, Check::Inclusion),
        Command::Factorize { functor } => factor(o, inputs, functor),
        Command::Generators { groupoid, sub } => generators(o, inputs, groupoid, sub.as_deref()),
        Command::Subobjects { groupoid, sub } => subobjects(o, inputs, groupoid, sub),
        Command::LogicalTopology { models, formula, vars } => logical_topology(o, inputs, models, formula.as_deref(), vars),
        Command::ElimParams { models } => elim_params(o, inputs, models),
        Command::EtaleComplete { models } => etale_complete(o, inputs, models),
        Command::Compose { first, second } => compose_cmd(o, inputs, first, second),
        Command::MoritaSearch { left, right } => morita(o, inputs, left, right),
    }
}

fn logic_options(o: &Options) -> LogicOptions {
    LogicOptions { depth: o.depth as usize, tuple_cap: o.tuple_cap as usize }
}

fn open_cap(o: &Options) -> usize {
    o.open_cap as usize
}

fn groupoid(o: &Options, inputs: &mut Inputs, path: &Path) -> Result<Arc<TopGroupoid>, CliError> {
    let (doc, loc): (GroupoidDoc, _) = inputs.read("groupoid", path)?;
    doc.to_groupoid(open_cap(o), &loc)
}

fn sub(inputs: &mut Inputs, g: &TopGroupoid, path: &Path) -> Result<Subgroupoid, CliError> {
    let (doc, loc): (SubDoc, _) = inputs.read("sub", path)?;
    doc.to_sub(g, &loc)
}

fn family(o: &Options, inputs: &mut Inputs, g: &TopGroupoid) -> Result<Family, CliError> {
    match &o.family {
        Some(path) => {
            let (doc, loc): (FamilyDoc, _) = inputs.read("family", path)?;
            doc.to_family(g, &loc)
        }
        None => Ok(Family::Exhaustive { budget: o.subgroupoid_budget as usize }),
    }
}

fn no_family(o: &Options, command: &str) -> Result<(), CliError> {
    match o.family {
        Some(_) => Err(CliError::Input(format!("--family does not apply to {command}"))),
        None => Ok(()),
    }
}

fn models(inputs: &mut Inputs, role: &str, path: &Path) -> Result<ModelGroupoid, CliError> {
    let (doc, loc): (ModelsDoc, _) = inputs.read(role, path)?;
    doc.to_models(&loc)
}

/// Guesses the kind of a document from its keys.
fn kind_of(v: &Value) -> Option<&'static str> {
    let has = |k: &str| v.get(k).is_some();
    if has("signature") {
        Some("models")
    } else if has("weq_leg") {
        Some("cospan")
    } else if has("src") {
        Some("groupoid")
    } else if has("source") {
        Some("functor")
    } else if has("subgroupoids") {
        Some("family")
    } else if has("points") {
        Some("space")
    } else if has("arrows") {
        Some("subgroupoid")
    } else {
        None
    }
}

fn validate(o: &Options, inputs: &mut Inputs, file: &Path, against: Option<&Path>) -> Outcome {
    let (value, loc): (Value, _) = inputs.read("document", file)?;
    let kind = kind_of(&value).ok_or_else(|| loc.err("not a recognised document".into()))?;
    let cap = open_cap(o);
    let mut facts = json!({});
    let problems: Vec<String> = match kind {
        "space" => {
            let s = parse::<SpaceDoc>(value, &loc)?.to_space(cap, &loc)?;
            facts = json!({"points": s.len(), "t0": s.is_t0()});
            vec![]
        }
        "groupoid" => {
            let (g, problems) = parse::<GroupoidDoc>(value, &loc)?.to_groupoid_unchecked(cap, &loc)?;
            if problems.is_empty() {
                facts = json!({"objects": g.object_count(), "arrows": g.arrow_count(), "open": g.is_open()});
            }
            problems
        }
        "functor" => parse::<FunctorDoc>(value, &loc)?.to_functor_unchecked(cap, &loc)?.1,
        "subgroupoid" | "family" => {
            let Some(path) = against else {
                return Err(loc.err(format!("a {kind} document is checked against --groupoid")));
            };
            let g = groupoid(o, inputs, path)?;
            let subs = if kind == "family" {
                match parse::<FamilyDoc>(value, &loc)?.to_family(&g, &loc)? {
                    Family::User(list) => list,
                    Family::Exhaustive { .. } => unreachable!("documents list their members"),
                }
            } else {
                vec![parse::<SubDoc>(value, &loc)?.to_sub(&g, &loc)?]
            };
            facts = json!({"open": subs.iter().map(|u| u.is_open(&g)).collect::<Vec<_>>()});
            vec![]
        }
        "models" => {
            let mg = parse::<ModelsDoc>(value, &loc)?.to_models(&loc)?;
            facts = json!({"models": mg.models().len(), "arrows": mg.isos().len(), "parameters": mg.params().len()});
            vec![]
        }
        _ => {
            let c = cospan(o, &parse::<CospanDoc>(value, &loc)?, &loc)?;
            facts = json!({"certificate": verdict_json(c.certificate())});
            vec![]
        }
    };
    let status = if problems.is_empty() { Status::Ok } else { Status::No };
    Ok((status, json!({"kind": kind, "valid": problems.is_empty(), "problems": problems, "facts": facts})))
}

fn parse<T: serde::de::DeserializeOwned>(v: Value, loc: &Loc) -> Result<T, CliError> {
    serde_json::from_value(v).map_err(|e| loc.err(e.to_string()))
}

fn topology(o: &Options, inputs: &mut Inputs, path: &Path) -> Outcome {
    let (doc, loc): (SpaceDoc, _) = inputs.read("space", path)?;
    let s = doc.to_space(open_cap(o), &loc)?;
    let opens = s.opens(open_cap(o)).map_err(|e| CliError::Budget(e.to_string()))?;
    Ok((
        Status::Ok,
        json!({
            "points": s.labels(),
            "opens": opens.iter().map(|u| labels(&s, u)).collect::<Vec<_>>(),
            "open_count": opens.len(),
            "t0": s.is_t0(),
            "sober": s.is_sober(),
            "discrete": s.is_discrete(),
            "skula": SpaceDoc::from_space(&s.skula(), open_cap(o)),
        }),
    ))
}

#[derive(Clone, Copy)]
enum Check {
    Weq,
    Surjection,
    Inclusion,
}

fn inclusion(o: &Options, inputs: &mut Inputs, i: &Inclusion, check: Check) -> Outcome {
    let g = groupoid(o, inputs, &i.groupoid)?;
    let y = sub(inputs, &g, &i.sub)?;
    let fam = family(o, inputs, &g)?;
    let v = match (check, o.mode) {
        (Check::Weq, ModeArg::All) => is_weak_equivalence_all_modes(&g, &y, &fam)?,
        (Check::Weq, ModeArg::QuasiHomeo) => is_weak_equivalence(&g, &y, &fam, Mode::QuasiHomeo)?,
        (Check::Weq, ModeArg::TwoCondition) => is_weak_equivalence(&g, &y, &fam, Mode::TwoCondition)?,
        (Check::Weq, ModeArg::SubobjectOracle) => is_weak_equivalence(&g, &y, &fam, Mode::SubobjectOracle)?,
        (Check::Surjection, _) => is_localic_surjection(&g, &y, &fam)?,
        (Check::Inclusion, _) => is_subtopos_inclusion(&g, &y, &fam)?,
    };
    Ok((Status::of(v.answer), verdict_json(&v)))
}

fn factor(o: &Options, inputs: &mut Inputs, path: &Path) -> Outcome {
    no_family(o, "factorize")?;
    let (doc, loc): (FunctorDoc, _) = inputs.read("functor", path)?;
    let f = doc.to_functor(open_cap(o), &loc)?;
    let fz = factorize(&f, o.subgroupoid_budget as usize)?;
    let y = f.cod();
    let surjective = if fz.surjective_on_image_objects { Answer::Yes } else { Answer::No };
    let status = Status::worst([
        Status::of(surjective),
        Status::of(fz.image_skula_dense.answer),
        Status::of(fz.inclusion.answer),
    ]);
    let table = |f: &grpdtopos::grpd::ContinuousFunctor| {
        let d = FunctorDoc::from_functor(f, open_cap(o));
        json!({"objects": d.objects.map, "arrows": d.arrows.map})
    };
    Ok((
        status,
        json!({
            "image": labels(y.arrows(), fz.image.arrows()),
            "essential_image": labels(y.arrows(), fz.essential_image.arrows()),
            "first": table(&fz.first),
            "second": table(&fz.second),
            "surjective_on_image_objects": fz.surjective_on_image_objects,
            "image_skula_dense": verdict_json(&fz.image_skula_dense),
            "inclusion": verdict_json(&fz.inclusion),
        }),
    ))
}

fn generator_json(o: &Options, g: &Arc<TopGroupoid>, u: &Subgroupoid) -> Result<Value, CliError> {
    let w = moerdijk_generator(g, u)?;
    Ok(json!({"subgroupoid": u.labels(g), "sheaf": SheafDoc::from_sheaf(&w, open_cap(o))}))
}

fn generators(o: &Options, inputs: &mut Inputs, gpath: &Path, spath: Option<&Path>) -> Outcome {
    let g = groupoid(o, inputs, gpath)?;
    let subs = match spath {
        Some(p) => vec![sub(inputs, &g, p)?],
        None => match family(o, inputs, &g)? {
            Family::User(list) => list,
            Family::Exhaustive { budget } => enumerate_open_subgroupoids(&g, budget)?,
        },
    };
    let out = subs.iter().map(|u| generator_json(o, &g, u)).collect::<Result<Vec<_>, _>>()?;
    Ok((Status::Ok, json!({ "generators": out })))
}

fn subobjects(o: &Options, inputs: &mut Inputs, gpath: &Path, spath: &Path) -> Outcome {
    no_family(o, "subobjects")?;
    let g = groupoid(o, inputs, gpath)?;
    let u = sub(inputs, &g, spath)?;
    let w = moerdijk_generator(&g, &u)?;
    let lattice = w.subobjects(open_cap(o))?;
    Ok((
        Status::Ok,
        json!({
            "subgroupoid": u.labels(&g),
            "sheaf": SheafDoc::from_sheaf(&w, open_cap(o)),
            "subobjects": lattice.elements.iter().map(|s| labels(w.total(), s)).collect::<Vec<_>>(),
        }),
    ))
}

fn achieved(lg: &LogicalGroupoid) -> Value {
    json!({"depth": lg.depth(), "tuple_cap": lg.options().tuple_cap, "stabilized": lg.stabilized()})
}

fn elimination_json(mg: &ModelGroupoid, e: &Elimination) -> Value {
    json!({
        "answer": e.answer.to_string(),
        "depth": e.depth,
        "tuple_cap": e.tuple_cap,
        "tuples": e.tuples.iter().map(|t| json!({
            "params": t.params,
            "formula": t.formula.as_ref().map(|f| f.display(mg.signature()).to_string()),
        })).collect::<Vec<_>>(),
    })
}

fn logical_topology(o: &Options, inputs: &mut Inputs, path: &Path, formula: Option<&str>, vars: &[String]) -> Outcome {
    no_family(o, "logical-topology")?;
    let mg = models(inputs, "models", path)?;
    let lg = mg.logical_topologies(logic_options(o))?;
    let g = lg.groupoid();
    let mut out = json!({
        "achieved": achieved(&lg),
        "groupoid": GroupoidDoc::from_groupoid(g, open_cap(o)),
        "open": g.is_open(),
        "objects_t0": g.objects().is_t0(),
    });
    if let Some(text) = formula {
        let sig = mg.signature();
        let ctx = vars
            .iter()
            .map(|v| {
                let (x, s) = v.split_once(':').ok_or_else(|| CliError::Input(format!("--var {v:?}: expected name:Sort")))?;
                let sort = sig.sort(s).ok_or_else(|| CliError::Input(format!("--var {v:?}: unknown sort {s:?}")))?;
                Ok((x.to_string(), sort))
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let f = parse_formula_in(text, sig, &ctx).map_err(|e| CliError::Input(format!("--formula: {e}")))?;
        let d = lg.definable_sheaf(&f)?;
        out["definable_sheaf"] = json!({
            "formula": f.display(sig).to_string(),
            "context": f.context().iter().map(|(x, s)| format!("{x}:{}", sig.sorts()[*s])).collect::<Vec<_>>(),
            "points": d.points.iter().map(|(m, t)| json!({"model": mg.models()[*m].name, "tuple": t})).collect::<Vec<_>>(),
            "sheaf": SheafDoc::from_sheaf(&d.sheaf, open_cap(o)),
        });
    }
    Ok((Status::Ok, out))
}

fn elim_params(o: &Options, inputs: &mut Inputs, path: &Path) -> Outcome {
    no_family(o, "elim-params")?;
    let mg = models(inputs, "models", path)?;
    let lg = mg.logical_topologies(logic_options(o))?;
    let e = lg.eliminates_parameters()?;
    Ok((Status::of(e.answer), json!({"achieved": achieved(&lg), "elimination": elimination_json(&mg, &e)})))
}

fn etale_complete(o: &Options, inputs: &mut Inputs, path: &Path) -> Outcome {
    no_family(o, "etale-complete")?;
    let mg = models(inputs, "models", path)?;
    let lg = mg.logical_topologies(logic_options(o))?;
    let c = lg.is_etale_complete()?;
    let (completion, _) = mg.etale_completion();
    Ok((
        Status::of(c.answer),
        json!({
            "achieved": achieved(&lg),
            "answer": c.answer.to_string(),
            "missing_isomorphisms": c.missing_isomorphisms.iter()
                .map(|(m, n, k)| json!({"source": m, "target": n, "count": k}))
                .collect::<Vec<_>>(),
            "sober": c.sober,
            "elimination": elimination_json(&mg, &c.elimination),
            "completion": ModelsDoc::from_models(&completion),
        }),
    ))
}

fn cospan(o: &Options, doc: &CospanDoc, loc: &Loc) -> Result<CospanMorphism, CliError> {
    let opts = logic_options(o);
    let at = |d: &ModelsDoc, key: &str| -> Result<LogicalGroupoid, CliError> {
        Ok(d.to_models(&loc.at(key))?.logical_topologies_at(opts)?)
    };
    let (x, y, v) = (at(&doc.source, "source")?, at(&doc.target, "target")?, at(&doc.apex, "apex")?);
    let fwd = doc.fwd.to_functor(&x, &v, &loc.at("fwd"))?;
    let leg = doc.weq_leg.to_functor(&y, &v, &loc.at("weq_leg"))?;
    let fam = Family::Exhaustive { budget: o.subgroupoid_budget as usize };
    make_cospan(fwd, leg, &fam).map_err(|e| match e {
        FracError::CertificateFailed(m) => loc.at("weq_leg").err(m),
        e => e.into(),
    })
}

fn compose_cmd(o: &Options, inputs: &mut Inputs, first: &Path, second: &Path) -> Outcome {
    no_family(o, "compose")?;
    let (d1, l1): (CospanDoc, _) = inputs.read("first", first)?;
    let (d2, l2): (CospanDoc, _) = inputs.read("second", second)?;
    let (f, g) = (cospan(o, &d1, &l1)?, cospan(o, &d2, &l2)?);
    let fam = Family::Exhaustive { budget: o.subgroupoid_budget as usize };
    let c = compose(&f, &g, &fam, o.merge_budget as usize)?;
    Ok((Status::of(c.certificate().answer), json!({ "cospan": CospanDoc::from_cospan(&c) })))
}

fn morita(o: &Options, inputs: &mut Inputs, left: &Path, right: &Path) -> Outcome {
    no_family(o, "morita-search")?;
    let x = models(inputs, "left", left)?;
    let y = models(inputs, "right", right)?;
    let fam = Family::Exhaustive { budget: o.subgroupoid_budget as usize };
    let r = morita_search(&x, &y, logic_options(o), &fam, o.merge_budget as usize)?;
    let witness = r.witness.as_ref().map(|w| {
        json!({
            "apex": ModelsDoc::from_models(w.apex.models()),
            "left": ModelFunctorDoc::from_functor(&w.left),
            "right": ModelFunctorDoc::from_functor(&w.right),
            "left_certificate": verdict_json(&w.left_certificate),
            "right_certificate": verdict_json(&w.right_certificate),
        })
    });
    Ok((
        Status::of(r.answer),
        json!({
            "answer": r.answer.to_string(),
            "candidates_tried": r.candidates_tried,
            "over_budget": r.over_budget,
            "separating_sentence": r.separating_sentence.as_ref().map(|f| f.display(x.signature()).to_string()),
            "witness": witness,
        }),
    ))
}
