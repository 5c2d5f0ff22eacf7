//! JSON documents for spaces, groupoids, functors and sheaves.

use crate::error::{CliError, Loc};
use grpdtopos::fintop::{FinSpace, PointSet, TopologyError};
use grpdtopos::grpd::{ContinuousFunctor, Subgroupoid, TopGroupoid};
use grpdtopos::sheaf::EquivariantSheaf;
use grpdtopos::weq::{Family, Verdict};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::sync::Arc;

pub const SCHEMA_VERSION: u32 = 1;

/// A finite space. Exactly one of `opens`, `subbasis` or `neighbourhoods`
/// describes the topology; with none of them the space is discrete.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version: Option<u32>,
    pub points: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub opens: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subbasis: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub neighbourhoods: Option<BTreeMap<String, Vec<String>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapDoc {
    pub map: BTreeMap<String, String>,
}

/// `comp` lists triples `[f, g, h]` with `h = g ∘ f`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupoidDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version: Option<u32>,
    pub objects: SpaceDoc,
    pub arrows: SpaceDoc,
    pub src: MapDoc,
    pub tgt: MapDoc,
    pub unit: MapDoc,
    pub inv: MapDoc,
    pub comp: Vec<[String; 3]>,
}

/// A subgroupoid, given by its arrows.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version: Option<u32>,
    pub arrows: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version: Option<u32>,
    pub subgroupoids: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctorDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version: Option<u32>,
    pub source: GroupoidDoc,
    pub target: GroupoidDoc,
    pub objects: MapDoc,
    pub arrows: MapDoc,
}

pub fn check_version(v: Option<u32>, loc: &Loc) -> Result<(), CliError> {
    match v {
        Some(v) if v != SCHEMA_VERSION => Err(loc.at("version").err(format!("unsupported schema version {v}"))),
        _ => Ok(()),
    }
}

fn topology_err(loc: &Loc, e: TopologyError) -> CliError {
    match e {
        TopologyError::OpenCapExceeded { cap } => CliError::Budget(format!("{loc}: more than {cap} open sets")),
        e => loc.err(e.to_string()),
    }
}

fn point_set(space_labels: &[String], members: &[String], loc: &Loc) -> Result<PointSet, CliError> {
    let mut s = PointSet::with_capacity(space_labels.len());
    for m in members {
        let p = space_labels.iter().position(|l| l == m).ok_or_else(|| loc.err(format!("unknown point {m:?}")))?;
        s.insert(p);
    }
    Ok(s)
}

impl SpaceDoc {
    pub fn to_space(&self, open_cap: usize, loc: &Loc) -> Result<FinSpace, CliError> {
        check_version(self.version, loc)?;
        let labels = self.points.clone();
        let given = [self.opens.is_some(), self.subbasis.is_some(), self.neighbourhoods.is_some()];
        if given.iter().filter(|b| **b).count() > 1 {
            return Err(loc.err("give only one of opens, subbasis, neighbourhoods".into()));
        }
        let sets = |list: &[Vec<String>], key: &str| -> Result<Vec<PointSet>, CliError> {
            list.iter().enumerate().map(|(i, s)| point_set(&labels, s, &loc.at(key).idx(i))).collect()
        };
        let space = if let Some(opens) = &self.opens {
            FinSpace::from_opens(labels.clone(), &sets(opens, "opens")?, open_cap)
        } else if let Some(sub) = &self.subbasis {
            FinSpace::generate(labels.clone(), &sets(sub, "subbasis")?)
        } else if let Some(nb) = &self.neighbourhoods {
            let l = loc.at("neighbourhoods");
            if let Some(k) = nb.keys().find(|k| !labels.contains(k)) {
                return Err(l.err(format!("unknown point {k:?}")));
            }
            let nbhd = labels
                .iter()
                .map(|p| {
                    let members = nb.get(p).ok_or_else(|| l.err(format!("no neighbourhood for {p:?}")))?;
                    point_set(&labels, members, &l.at(p))
                })
                .collect::<Result<Vec<_>, _>>()?;
            FinSpace::from_neighbourhoods(labels.clone(), nbhd)
        } else {
            Ok(FinSpace::discrete(labels.clone()))
        };
        space.map_err(|e| topology_err(loc, e))
    }

    /// Lists the opens when there are at most `open_cap` of them, and the
    /// minimal neighbourhoods otherwise.
    pub fn from_space(space: &FinSpace, open_cap: usize) -> Self {
        let names = |s: &PointSet| s.ones().map(|p| space.label(p).to_string()).collect::<Vec<_>>();
        let mut doc =
            SpaceDoc { version: None, points: space.labels().to_vec(), opens: None, subbasis: None, neighbourhoods: None };
        match space.opens(open_cap) {
            Ok(opens) => doc.opens = Some(opens.iter().map(names).collect()),
            Err(_) => {
                doc.neighbourhoods =
                    Some(space.labels().iter().zip(space.neighbourhoods()).map(|(p, n)| (p.clone(), names(n))).collect())
            }
        }
        doc
    }
}

fn lookup(table: &BTreeMap<String, String>, key: &str, space: &FinSpace, loc: &Loc) -> Result<usize, CliError> {
    let v = table.get(key).ok_or_else(|| loc.err(format!("no value for {key:?}")))?;
    space.point(v).ok_or_else(|| loc.at(key).err(format!("unknown point {v:?}")))
}

fn table(map: &MapDoc, dom: &FinSpace, cod: &FinSpace, loc: &Loc) -> Result<Vec<usize>, CliError> {
    let loc = loc.at("map");
    if let Some(k) = map.map.keys().find(|k| dom.point(k).is_none()) {
        return Err(loc.err(format!("unknown point {k:?}")));
    }
    dom.labels().iter().map(|p| lookup(&map.map, p, cod, &loc)).collect()
}

fn map_doc(dom: &FinSpace, cod: &FinSpace, table: &[usize]) -> MapDoc {
    MapDoc { map: dom.labels().iter().zip(table).map(|(p, &q)| (p.clone(), cod.label(q).to_string())).collect() }
}

impl GroupoidDoc {
    /// Builds the groupoid and checks the groupoid axioms and continuity.
    pub fn to_groupoid(&self, open_cap: usize, loc: &Loc) -> Result<Arc<TopGroupoid>, CliError> {
        let (g, problems) = self.to_groupoid_unchecked(open_cap, loc)?;
        match problems.first() {
            Some(p) => Err(loc.err(p.clone())),
            None => Ok(g),
        }
    }

    /// Builds the groupoid and returns the axioms it fails, if any.
    pub fn to_groupoid_unchecked(&self, open_cap: usize, loc: &Loc) -> Result<(Arc<TopGroupoid>, Vec<String>), CliError> {
        check_version(self.version, loc)?;
        let objects = self.objects.to_space(open_cap, &loc.at("objects"))?;
        let arrows = self.arrows.to_space(open_cap, &loc.at("arrows"))?;
        let src = table(&self.src, &arrows, &objects, &loc.at("src"))?;
        let tgt = table(&self.tgt, &arrows, &objects, &loc.at("tgt"))?;
        let unit = table(&self.unit, &objects, &arrows, &loc.at("unit"))?;
        let inv = table(&self.inv, &arrows, &arrows, &loc.at("inv"))?;
        let l = loc.at("comp");
        let comp = self
            .comp
            .iter()
            .enumerate()
            .map(|(i, [f, g, h])| {
                let find = |a: &String| arrows.point(a).ok_or_else(|| l.idx(i).err(format!("unknown arrow {a:?}")));
                Ok((find(f)?, find(g)?, find(h)?))
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let g = TopGroupoid::new(objects, arrows, src, tgt, unit, inv, &comp).map_err(|e| loc.err(e.to_string()))?;
        let problems = g.validate();
        Ok((Arc::new(g), problems))
    }

    pub fn from_groupoid(g: &TopGroupoid, open_cap: usize) -> Self {
        let (o, a) = (g.objects(), g.arrows());
        GroupoidDoc {
            version: None,
            objects: SpaceDoc::from_space(o, open_cap),
            arrows: SpaceDoc::from_space(a, open_cap),
            src: map_doc(a, o, g.src_table()),
            tgt: map_doc(a, o, g.tgt_table()),
            unit: map_doc(o, a, g.unit_table()),
            inv: map_doc(a, a, g.inv_table()),
            comp: g
                .comp_triples()
                .into_iter()
                .map(|(f, k, h)| [a.label(f).to_string(), a.label(k).to_string(), a.label(h).to_string()])
                .collect(),
        }
    }
}

pub fn subgroupoid(g: &TopGroupoid, arrows: &[String], loc: &Loc) -> Result<Subgroupoid, CliError> {
    let set = point_set(g.arrows().labels(), arrows, &loc.at("arrows"))?;
    Subgroupoid::new(g, set).map_err(|e| loc.err(e.to_string()))
}

impl SubDoc {
    pub fn to_sub(&self, g: &TopGroupoid, loc: &Loc) -> Result<Subgroupoid, CliError> {
        check_version(self.version, loc)?;
        subgroupoid(g, &self.arrows, loc)
    }
}

impl FamilyDoc {
    pub fn to_family(&self, g: &TopGroupoid, loc: &Loc) -> Result<Family, CliError> {
        check_version(self.version, loc)?;
        let l = loc.at("subgroupoids");
        let subs = self.subgroupoids.iter().enumerate().map(|(i, s)| subgroupoid(g, s, &l.idx(i))).collect::<Result<_, _>>()?;
        Ok(Family::User(subs))
    }
}

impl FunctorDoc {
    pub fn to_functor(&self, open_cap: usize, loc: &Loc) -> Result<ContinuousFunctor, CliError> {
        let (f, problems) = self.to_functor_unchecked(open_cap, loc)?;
        match problems.first() {
            Some(p) => Err(loc.err(p.clone())),
            None => Ok(f),
        }
    }

    pub fn to_functor_unchecked(&self, open_cap: usize, loc: &Loc) -> Result<(ContinuousFunctor, Vec<String>), CliError> {
        check_version(self.version, loc)?;
        let x = self.source.to_groupoid(open_cap, &loc.at("source"))?;
        let y = self.target.to_groupoid(open_cap, &loc.at("target"))?;
        let obj = table(&self.objects, x.objects(), y.objects(), &loc.at("objects"))?;
        let arr = table(&self.arrows, x.arrows(), y.arrows(), &loc.at("arrows"))?;
        let f = ContinuousFunctor::new(x, y, obj, arr).map_err(|e| loc.err(e.to_string()))?;
        let problems = f.validate();
        Ok((f, problems))
    }

    pub fn from_functor(f: &ContinuousFunctor, open_cap: usize) -> Self {
        let (x, y) = (f.dom(), f.cod());
        FunctorDoc {
            version: None,
            source: GroupoidDoc::from_groupoid(x, open_cap),
            target: GroupoidDoc::from_groupoid(y, open_cap),
            objects: map_doc(x.objects(), y.objects(), f.obj_table()),
            arrows: map_doc(x.arrows(), y.arrows(), f.arr_table()),
        }
    }
}

/// A sheaf over a groupoid that is reported separately.
#[derive(Debug, Clone, Serialize)]
pub struct SheafDoc {
    pub total: SpaceDoc,
    pub proj: MapDoc,
    /// Triples `[g, y, z]` with `g · y = z`.
    pub action: Vec<[String; 3]>,
}

impl SheafDoc {
    pub fn from_sheaf(w: &EquivariantSheaf, open_cap: usize) -> Self {
        let (t, b) = (w.total(), w.base());
        SheafDoc {
            total: SpaceDoc::from_space(t, open_cap),
            proj: map_doc(t, b.objects(), w.proj_table()),
            action: w
                .action_triples()
                .into_iter()
                .map(|(g, y, z)| [b.arrows().label(g).to_string(), t.label(y).to_string(), t.label(z).to_string()])
                .collect(),
        }
    }
}

pub fn verdict_json(v: &Verdict) -> Value {
    json!({
        "answer": v.answer.to_string(),
        "witnesses": v.witnesses.iter().map(|w| json!({"subgroupoid": w.subgroupoid, "reason": w.reason})).collect::<Vec<_>>(),
        "family": v.family.to_string(),
    })
}

pub fn labels(space: &FinSpace, s: &PointSet) -> Vec<String> {
    s.ones().map(|p| space.label(p).to_string()).collect()
}
