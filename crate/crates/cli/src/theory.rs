//! JSON documents for signatures, indexed models and cospans of model groupoids.

use crate::docs::{check_version, verdict_json};
use crate::error::{CliError, Loc};
use grpdtopos::frac::{CospanMorphism, ModelFunctor};
use grpdtopos::logic::{FinModel, IndexedModel, LogicalGroupoid, ModelArrow, ModelGroupoid, ModelIso, Signature};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationDoc {
    pub name: String,
    pub sorts: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolDoc {
    pub name: String,
    pub sort: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignatureDoc {
    pub sorts: Vec<String>,
    #[serde(default)]
    pub relations: Vec<RelationDoc>,
    #[serde(default)]
    pub constants: Vec<SymbolDoc>,
}

/// A finite model with its indexing. Elements of a sort of size `n` are
/// `0..n`; parameters missing from `indexing` are undefined.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDoc {
    pub name: String,
    pub carriers: BTreeMap<String, usize>,
    #[serde(default)]
    pub relations: BTreeMap<String, Vec<Vec<usize>>>,
    #[serde(default)]
    pub constants: BTreeMap<String, usize>,
    #[serde(default)]
    pub indexing: BTreeMap<String, usize>,
}

/// An isomorphism; `map[sort][e]` is the image of `e`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrowDoc {
    pub source: String,
    pub target: String,
    pub map: BTreeMap<String, Vec<usize>>,
}

/// `"all"` or `"identities"`, generators to close up, or an explicit list
/// already closed under composition and inverses.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ArrowsDoc {
    Keyword(String),
    Generators {
        generators: Vec<ArrowDoc>,
    },
    List {
        list: Vec<ArrowDoc>,
    },
}

impl Default for ArrowsDoc {
    fn default() -> Self {
        ArrowsDoc::Keyword("all".into())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelsDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version: Option<u32>,
    pub signature: SignatureDoc,
    #[serde(default)]
    pub parameters: Vec<SymbolDoc>,
    pub models: Vec<ModelDoc>,
    #[serde(default)]
    pub arrows: ArrowsDoc,
}

fn sort_id(sig: &Signature, name: &str, loc: &Loc) -> Result<usize, CliError> {
    sig.sort(name).ok_or_else(|| loc.err(format!("unknown sort {name:?}")))
}

impl SignatureDoc {
    pub fn to_signature(&self, loc: &Loc) -> Result<Signature, CliError> {
        let sort = |s: &String, l: Loc| {
            self.sorts.iter().position(|t| t == s).ok_or_else(|| l.err(format!("unknown sort {s:?}")))
        };
        let relations = self
            .relations
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let l = loc.at("relations").idx(i);
                Ok((r.name.clone(), r.sorts.iter().map(|s| sort(s, l.clone())).collect::<Result<_, CliError>>()?))
            })
            .collect::<Result<_, CliError>>()?;
        let constants = self
            .constants
            .iter()
            .enumerate()
            .map(|(i, c)| Ok((c.name.clone(), sort(&c.sort, loc.at("constants").idx(i))?)))
            .collect::<Result<_, CliError>>()?;
        Ok(Signature::new(self.sorts.clone(), relations, constants)?)
    }

    pub fn from_signature(sig: &Signature) -> Self {
        let name = |s: usize| sig.sorts()[s].clone();
        SignatureDoc {
            sorts: sig.sorts().to_vec(),
            relations: sig
                .relations()
                .iter()
                .map(|(n, a)| RelationDoc { name: n.clone(), sorts: a.iter().map(|&s| name(s)).collect() })
                .collect(),
            constants: sig.constants().iter().map(|(n, s)| SymbolDoc { name: n.clone(), sort: name(*s) }).collect(),
        }
    }
}

fn model(sig: &Signature, params: &[(String, usize)], m: &ModelDoc, loc: &Loc) -> Result<IndexedModel, CliError> {
    let l = loc.at("carriers");
    if let Some(s) = m.carriers.keys().find(|s| sig.sort(s).is_none()) {
        return Err(l.err(format!("unknown sort {s:?}")));
    }
    let carriers = sig
        .sorts()
        .iter()
        .map(|s| m.carriers.get(s).copied().ok_or_else(|| l.err(format!("no carrier for sort {s:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let l = loc.at("relations");
    if let Some(r) = m.relations.keys().find(|r| sig.relation(r).is_none()) {
        return Err(l.err(format!("unknown relation {r:?}")));
    }
    let relations = sig
        .relations()
        .iter()
        .map(|(r, _)| m.relations.get(r).map(|ts| ts.iter().cloned().collect()).unwrap_or_default())
        .collect::<Vec<BTreeSet<_>>>();
    let l = loc.at("constants");
    if let Some(c) = m.constants.keys().find(|c| sig.constant(c).is_none()) {
        return Err(l.err(format!("unknown constant {c:?}")));
    }
    let constants = sig
        .constants()
        .iter()
        .map(|(c, _)| m.constants.get(c).copied().ok_or_else(|| l.err(format!("no value for constant {c:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let l = loc.at("indexing");
    if let Some(p) = m.indexing.keys().find(|p| !params.iter().any(|q| &q.0 == *p)) {
        return Err(l.err(format!("unknown parameter {p:?}")));
    }
    let indexing = params.iter().map(|(p, _)| m.indexing.get(p).copied()).collect();
    let fm = FinModel::new(sig, carriers, relations, constants).map_err(|e| loc.err(e.to_string()))?;
    Ok(IndexedModel::new(m.name.clone(), fm, indexing))
}

fn iso_map(sig: &Signature, map: &BTreeMap<String, Vec<usize>>, loc: &Loc) -> Result<ModelIso, CliError> {
    if let Some(s) = map.keys().find(|s| sig.sort(s).is_none()) {
        return Err(loc.err(format!("unknown sort {s:?}")));
    }
    sig.sorts().iter().map(|s| map.get(s).cloned().ok_or_else(|| loc.err(format!("no map for sort {s:?}")))).collect()
}

fn iso_doc(sig: &Signature, map: &ModelIso) -> BTreeMap<String, Vec<usize>> {
    sig.sorts().iter().cloned().zip(map.iter().cloned()).collect()
}

fn model_index(models: &[IndexedModel], name: &str, loc: &Loc) -> Result<usize, CliError> {
    models.iter().position(|m| m.name == name).ok_or_else(|| loc.err(format!("unknown model {name:?}")))
}

impl ModelsDoc {
    pub fn to_models(&self, loc: &Loc) -> Result<ModelGroupoid, CliError> {
        check_version(self.version, loc)?;
        let sig = Arc::new(self.signature.to_signature(&loc.at("signature"))?);
        let params = self
            .parameters
            .iter()
            .enumerate()
            .map(|(i, p)| Ok((p.name.clone(), sort_id(&sig, &p.sort, &loc.at("parameters").idx(i))?)))
            .collect::<Result<Vec<_>, CliError>>()?;
        let models = self
            .models
            .iter()
            .enumerate()
            .map(|(i, m)| model(&sig, &params, m, &loc.at("models").idx(i)))
            .collect::<Result<Vec<_>, _>>()?;
        let arrows = |list: &[ArrowDoc], key: &str| {
            list.iter()
                .enumerate()
                .map(|(i, a)| {
                    let l = loc.at("arrows").at(key).idx(i);
                    Ok(ModelArrow {
                        src: model_index(&models, &a.source, &l.at("source"))?,
                        tgt: model_index(&models, &a.target, &l.at("target"))?,
                        map: iso_map(&sig, &a.map, &l.at("map"))?,
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()
        };
        let l = loc.at("arrows");
        let built = match &self.arrows {
            ArrowsDoc::Keyword(k) if k == "all" => ModelGroupoid::with_all_isomorphisms(sig, params, models.clone()),
            ArrowsDoc::Keyword(k) if k == "identities" => ModelGroupoid::identities(sig, params, models.clone()),
            ArrowsDoc::Keyword(k) => return Err(l.err(format!("expected \"all\" or \"identities\", found {k:?}"))),
            ArrowsDoc::Generators { generators } => {
                let gens = arrows(generators, "generators")?;
                ModelGroupoid::generated(sig, params, models.clone(), gens)
            }
            ArrowsDoc::List { list } => {
                let isos = arrows(list, "list")?;
                ModelGroupoid::new(sig, params, models.clone(), isos)
            }
        };
        built.map_err(|e| loc.err(e.to_string()))
    }

    /// The explicit form, which reads back to the same arrow order.
    pub fn from_models(g: &ModelGroupoid) -> Self {
        let sig = g.signature();
        let sort = |s: usize| sig.sorts()[s].clone();
        ModelsDoc {
            version: None,
            signature: SignatureDoc::from_signature(sig),
            parameters: g.params().iter().map(|(p, s)| SymbolDoc { name: p.clone(), sort: sort(*s) }).collect(),
            models: g
                .models()
                .iter()
                .map(|m| ModelDoc {
                    name: m.name.clone(),
                    carriers: sig.sorts().iter().cloned().zip(m.model.carriers().iter().copied()).collect(),
                    relations: sig
                        .relations()
                        .iter()
                        .zip(m.model.relations())
                        .map(|((r, _), ts)| (r.clone(), ts.iter().cloned().collect()))
                        .collect(),
                    constants: sig.constants().iter().map(|c| c.0.clone()).zip(m.model.constants().iter().copied()).collect(),
                    indexing: g
                        .params()
                        .iter()
                        .zip(&m.indexing)
                        .filter_map(|((p, _), e)| e.map(|e| (p.clone(), e)))
                        .collect(),
                })
                .collect(),
            arrows: ArrowsDoc::List {
                list: g
                    .isos()
                    .iter()
                    .map(|a| ArrowDoc {
                        source: g.models()[a.src].name.clone(),
                        target: g.models()[a.tgt].name.clone(),
                        map: iso_doc(sig, &a.map),
                    })
                    .collect(),
            },
        }
    }
}

/// A functor between model groupoids: the target model of each source model,
/// and the structure isomorphism between them (identity when omitted).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFunctorDoc {
    pub objects: BTreeMap<String, String>,
    #[serde(default)]
    pub thetas: BTreeMap<String, BTreeMap<String, Vec<usize>>>,
}

impl ModelFunctorDoc {
    pub fn to_functor(&self, dom: &LogicalGroupoid, cod: &LogicalGroupoid, loc: &Loc) -> Result<ModelFunctor, CliError> {
        let (x, y) = (dom.models(), cod.models());
        let sig = x.signature();
        let l = loc.at("objects");
        if let Some(k) = self.objects.keys().find(|k| !x.models().iter().any(|m| &m.name == *k)) {
            return Err(l.err(format!("unknown model {k:?}")));
        }
        let lt = loc.at("thetas");
        if let Some(k) = self.thetas.keys().find(|k| !x.models().iter().any(|m| &m.name == *k)) {
            return Err(lt.err(format!("unknown model {k:?}")));
        }
        let mut obj = Vec::new();
        let mut theta = Vec::new();
        for m in x.models() {
            let to = self.objects.get(&m.name).ok_or_else(|| l.err(format!("no image for model {:?}", m.name)))?;
            obj.push(model_index(y.models(), to, &l.at(&m.name))?);
            theta.push(match self.thetas.get(&m.name) {
                Some(map) => iso_map(sig, map, &lt.at(&m.name))?,
                None => m.model.identity_iso(),
            });
        }
        ModelFunctor::new(dom.clone(), cod.clone(), obj, theta).map_err(|e| loc.err(e.to_string()))
    }

    pub fn from_functor(f: &ModelFunctor) -> Self {
        let (x, y) = (f.dom().models(), f.cod().models());
        let sig = x.signature();
        ModelFunctorDoc {
            objects: x.models().iter().zip(f.obj_table()).map(|(m, &n)| (m.name.clone(), y.models()[n].name.clone())).collect(),
            thetas: x.models().iter().zip(f.thetas()).map(|(m, t)| (m.name.clone(), iso_doc(sig, t))).collect(),
        }
    }
}

/// A cospan `source → apex ← target`. The certificate is recomputed on input.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CospanDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version: Option<u32>,
    pub source: ModelsDoc,
    pub target: ModelsDoc,
    pub apex: ModelsDoc,
    pub fwd: ModelFunctorDoc,
    pub weq_leg: ModelFunctorDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Value>,
}

impl CospanDoc {
    pub fn from_cospan(c: &CospanMorphism) -> Self {
        CospanDoc {
            version: Some(crate::docs::SCHEMA_VERSION),
            source: ModelsDoc::from_models(c.source().models()),
            target: ModelsDoc::from_models(c.target().models()),
            apex: ModelsDoc::from_models(c.apex().models()),
            fwd: ModelFunctorDoc::from_functor(c.fwd()),
            weq_leg: ModelFunctorDoc::from_functor(c.leg()),
            certificate: Some(verdict_json(c.certificate())),
        }
    }
}
