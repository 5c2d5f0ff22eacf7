//! Deciding when a subgroupoid inclusion `Y ↪ X` induces an equivalence,
//! a localic surjection or a subtopos inclusion of sheaf toposes.
//!
//! Each criterion is computed on the groupoid side and, independently, on the
//! subobject lattices of the generators. A mismatch is reported as
//! [`WeqError::Disagreement`].

use crate::fintop::{set_of, Point, PointSet};
use crate::grpd::{enumerate_open_subgroupoids, iota_map, ContinuousFunctor, GroupoidError, Subgroupoid, TopGroupoid};
use crate::sheaf::{SheafError, SubobjectRestriction};
use rayon::prelude::*;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

pub const DEFAULT_BUDGET: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WeqError {
    #[error("criteria disagree on {criterion} at open subgroupoid {{{subgroupoid}}}")]
    Disagreement { criterion: &'static str, subgroupoid: String },
    #[error("the ambient groupoid is not open")]
    AmbientNotOpen,
    #[error("the subgroupoid is not an open groupoid in its subspace topologies")]
    SubgroupoidNotOpen,
    #[error("family member {{{0}}} is not an open subgroupoid")]
    NotOpenMember(String),
    #[error(transparent)]
    Groupoid(#[from] GroupoidError),
    #[error(transparent)]
    Sheaf(#[from] SheafError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Answer {
    Yes,
    No,
    Unknown,
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Answer::Yes => "yes",
            Answer::No => "no",
            Answer::Unknown => "unknown",
        })
    }
}

/// Where the open subgroupoids came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    Exhaustive,
    User,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Exhaustive => "exhaustive",
            Provenance::User => "user",
        })
    }
}

/// An open subgroupoid at which a criterion fails, and what failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    /// Arrow labels of the open subgroupoid.
    pub subgroupoid: Vec<String>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub answer: Answer,
    pub witnesses: Vec<Witness>,
    pub family: Provenance,
}

/// The open subgroupoids a criterion quantifies over.
#[derive(Debug, Clone)]
pub enum Family {
    /// Every open subgroupoid, failing if there are more than `budget`.
    Exhaustive { budget: usize },
    /// A caller-chosen list; a pass then only yields [`Answer::Unknown`].
    User(Vec<Subgroupoid>),
}

impl Default for Family {
    fn default() -> Self {
        Family::Exhaustive { budget: DEFAULT_BUDGET }
    }
}

impl Family {
    fn resolve(&self, x: &TopGroupoid) -> Result<(Vec<Subgroupoid>, Provenance), WeqError> {
        match self {
            Family::Exhaustive { budget } => Ok((enumerate_open_subgroupoids(x, *budget)?, Provenance::Exhaustive)),
            Family::User(list) => {
                if let Some(u) = list.iter().find(|u| !u.is_open(x)) {
                    return Err(WeqError::NotOpenMember(u.labels(x).join(",")));
                }
                Ok((list.clone(), Provenance::User))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Every comparison map `iota` is a quasi-homeomorphism.
    QuasiHomeo,
    /// Localic surjection and subtopos inclusion.
    TwoCondition,
    /// Every restriction of subobjects of a generator is a bijection.
    SubobjectOracle,
}

pub const ALL_MODES: [Mode; 3] = [Mode::QuasiHomeo, Mode::TwoCondition, Mode::SubobjectOracle];

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::QuasiHomeo => "quasi-homeo",
            Mode::TwoCondition => "two-condition",
            Mode::SubobjectOracle => "subobject-oracle",
        })
    }
}

/// Arrows `α` with `s(α) ∈ U0` and `t(α) ∈ Y0`.
pub fn restricted_arrows(x: &TopGroupoid, y: &Subgroupoid, u: &Subgroupoid) -> PointSet {
    let mut a = x.src_preimage(u.objects());
    a.intersect_with(&x.tgt_preimage(y.objects()));
    a
}

/// Objects of `U0` with an arrow of `U` into `w`.
fn u_saturation(x: &TopGroupoid, u: &Subgroupoid, w: &PointSet) -> PointSet {
    let mut out = x.objects().none();
    for a in u.arrows().ones() {
        if w.contains(x.tgt(a)) {
            out.insert(x.src(a));
        }
    }
    out
}

/// The first point of `U0` breaking Skula density of the `U`-orbits, if any.
///
/// For `x ∈ U0` every point near `x` must reach, inside `U`, the smallest open
/// containing the part of `nbhd(x)` isomorphic to `Y`.
pub fn skula_dense_failure(x: &TopGroupoid, y: &Subgroupoid, u: &Subgroupoid) -> Option<Point> {
    let orbit = y.orbit_closure(x);
    u.objects().ones().find(|&p| {
        let n = x.objects().neighbourhood(p);
        let mut seen = n.clone();
        seen.intersect_with(&orbit);
        let reach = u_saturation(x, u, &x.objects().open_hull(&seen));
        !n.is_subset(&reach)
    })
}

pub fn has_skula_dense_orbits(x: &TopGroupoid, y: &Subgroupoid, u: &Subgroupoid) -> bool {
    skula_dense_failure(x, y, u).is_none()
}

/// Close `v ⊆ s⁻¹(U0) ∩ t⁻¹(Y0)` under post-composition by `Y` and pre-composition by `U`.
pub fn bi_saturation(x: &TopGroupoid, y: &Subgroupoid, u: &Subgroupoid, v: &PointSet) -> PointSet {
    let mut out = set_of(x.arrow_count(), v.ones());
    let mut work: Vec<usize> = out.ones().collect();
    while let Some(a) = work.pop() {
        let post = y.arrows().ones().filter(|&g| x.src(g) == x.tgt(a)).map(|g| x.comp(g, a));
        let pre = u.arrows().ones().filter(|&h| x.tgt(h) == x.src(a)).map(|h| x.comp(a, h));
        let next: Vec<usize> = post.chain(pre).collect();
        for b in next {
            if !out.contains(b) {
                out.insert(b);
                work.push(b);
            }
        }
    }
    out
}

/// The first arrow of `s⁻¹(U0) ∩ t⁻¹(Y0)` whose neighbourhood has no source
/// determined orbit, if any.
pub fn source_determined_failure(x: &TopGroupoid, y: &Subgroupoid, u: &Subgroupoid) -> Option<usize> {
    let a = restricted_arrows(x, y, u);
    a.ones().find(|&alpha| {
        let mut v = x.arrows().neighbourhood(alpha).clone();
        v.intersect_with(&a);
        let z = bi_saturation(x, y, u, &v);
        let w = x.objects().open_hull(&x.objects().set(z.ones().map(|b| x.src(b))));
        a.ones().any(|b| w.contains(x.src(b)) != z.contains(b))
    })
}

pub fn has_source_determined_orbits(x: &TopGroupoid, y: &Subgroupoid, u: &Subgroupoid) -> bool {
    source_determined_failure(x, y, u).is_none()
}

fn ensure_open(x: &TopGroupoid) -> Result<(), WeqError> {
    if x.is_open() {
        Ok(())
    } else {
        Err(WeqError::AmbientNotOpen)
    }
}

// Orbits of opens under a non-open subgroupoid need not be open, and the
// groupoid-side criteria then stop describing subobjects.
fn ensure_open_subgroupoid(x: &TopGroupoid, y: &Subgroupoid) -> Result<(), WeqError> {
    if y.is_open_groupoid(x) {
        Ok(())
    } else {
        Err(WeqError::SubgroupoidNotOpen)
    }
}

type Check<'a> = dyn Fn(&Subgroupoid) -> Result<Option<String>, WeqError> + Sync + 'a;

fn run(x: &TopGroupoid, family: &Family, check: &Check<'_>) -> Result<Verdict, WeqError> {
    ensure_open(x)?;
    let (members, provenance) = family.resolve(x)?;
    let results: Vec<Result<Option<String>, WeqError>> = members.par_iter().map(check).collect();
    let mut witnesses = Vec::new();
    for (u, r) in members.iter().zip(results) {
        if let Some(reason) = r? {
            witnesses.push(Witness { subgroupoid: u.labels(x), reason });
        }
    }
    let answer = match (witnesses.is_empty(), provenance) {
        (false, _) => Answer::No,
        (true, Provenance::Exhaustive) => Answer::Yes,
        (true, Provenance::User) => Answer::Unknown,
    };
    Ok(Verdict { answer, witnesses, family: provenance })
}

fn disagreement(criterion: &'static str, x: &TopGroupoid, u: &Subgroupoid) -> WeqError {
    WeqError::Disagreement { criterion, subgroupoid: u.labels(x).join(",") }
}

/// Localic surjection: Skula dense `U`-orbits for every `U` in the family,
/// checked against injectivity of the subobject restriction.
pub fn is_localic_surjection(x: &Arc<TopGroupoid>, y: &Subgroupoid, family: &Family) -> Result<Verdict, WeqError> {
    ensure_open_subgroupoid(x, y)?;
    run(x, family, &|u| {
        let failure = skula_dense_failure(x, y, u);
        let injective = SubobjectRestriction::new(x, y, u)?.is_injective();
        if injective != failure.is_none() {
            return Err(disagreement("skula density", x, u));
        }
        Ok(failure.map(|p| format!("orbits near {} are not Skula dense", x.objects().label(p))))
    })
}

/// Subtopos inclusion: source determined orbits for every `U` in the family,
/// checked against surjectivity of the subobject restriction.
pub fn is_subtopos_inclusion(x: &Arc<TopGroupoid>, y: &Subgroupoid, family: &Family) -> Result<Verdict, WeqError> {
    ensure_open_subgroupoid(x, y)?;
    run(x, family, &|u| {
        let failure = source_determined_failure(x, y, u);
        let surjective = SubobjectRestriction::new(x, y, u)?.is_surjective();
        if surjective != failure.is_none() {
            return Err(disagreement("source determination", x, u));
        }
        Ok(failure.map(|a| format!("orbit of the neighbourhood of {} is not source determined", x.arrows().label(a))))
    })
}

pub fn is_weak_equivalence(x: &Arc<TopGroupoid>, y: &Subgroupoid, family: &Family, mode: Mode) -> Result<Verdict, WeqError> {
    ensure_open_subgroupoid(x, y)?;
    match mode {
        Mode::QuasiHomeo => run(x, family, &|u| {
            let iota = iota_map(x, y, u)?;
            Ok(match (iota.map.is_injective_on_opens(), iota.map.is_surjective_on_opens()) {
                (true, true) => None,
                (false, _) => Some("iota is not injective on opens".into()),
                (_, false) => Some("iota is not surjective on opens".into()),
            })
        }),
        Mode::TwoCondition => {
            let surj = is_localic_surjection(x, y, family)?;
            let incl = is_subtopos_inclusion(x, y, family)?;
            let mut witnesses = surj.witnesses;
            witnesses.extend(incl.witnesses);
            let answer = match (surj.answer, incl.answer) {
                (Answer::No, _) | (_, Answer::No) => Answer::No,
                (Answer::Yes, Answer::Yes) => Answer::Yes,
                _ => Answer::Unknown,
            };
            Ok(Verdict { answer, witnesses, family: surj.family })
        }
        Mode::SubobjectOracle => run(x, family, &|u| {
            let r = SubobjectRestriction::new(x, y, u)?;
            Ok(match (r.is_injective(), r.is_surjective()) {
                (true, true) => None,
                (false, _) => Some("restriction of subobjects is not injective".into()),
                (_, false) => Some("restriction of subobjects is not surjective".into()),
            })
        }),
    }
}

/// All three modes; their answers must coincide.
pub fn is_weak_equivalence_all_modes(x: &Arc<TopGroupoid>, y: &Subgroupoid, family: &Family) -> Result<Verdict, WeqError> {
    let verdicts = ALL_MODES
        .iter()
        .map(|&m| is_weak_equivalence(x, y, family, m))
        .collect::<Result<Vec<_>, _>>()?;
    if verdicts.iter().any(|v| v.answer != verdicts[0].answer) {
        return Err(WeqError::Disagreement { criterion: "weak equivalence modes", subgroupoid: String::new() });
    }
    Ok(verdicts.into_iter().next().unwrap())
}

/// The factorisation `X → E ↪ Y` of a functor through its full essential image.
#[derive(Debug, Clone)]
pub struct Factorization {
    pub image: Subgroupoid,
    pub essential_image: Subgroupoid,
    /// `X → E`.
    pub first: ContinuousFunctor,
    /// `E ↪ Y`.
    pub second: ContinuousFunctor,
    /// The first leg reaches every object of the image.
    pub surjective_on_image_objects: bool,
    /// The image has Skula dense `U`-orbits for every open `U ⊆ E`.
    pub image_skula_dense: Verdict,
    /// `E ↪ Y` is a subtopos inclusion.
    pub inclusion: Verdict,
}

pub fn factorize(f: &ContinuousFunctor, budget: usize) -> Result<Factorization, WeqError> {
    let y = f.cod();
    let image = f.image();
    let essential_image = f.full_essential_image();
    let second = essential_image.materialize(y);
    let first = f.corestrict(&second).expect("the image lies in the full essential image");
    let reached = y.objects().set(f.obj_table().iter().copied());
    let family = Family::Exhaustive { budget };
    // density is a property of the image inside E, with the subspace topology
    let e = second.dom();
    let image_in_e = first.image();
    let image_skula_dense = run(e, &family, &|u| {
        Ok(skula_dense_failure(e, &image_in_e, u).map(|p| format!("orbits near {} are not Skula dense", e.objects().label(p))))
    })?;
    let inclusion = is_subtopos_inclusion(y, &essential_image, &family)?;
    Ok(Factorization {
        surjective_on_image_objects: reached == *image.objects(),
        image,
        essential_image,
        first,
        second,
        image_skula_dense,
        inclusion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fintop::FinSpace;

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

    fn all(x: &Arc<TopGroupoid>, y: &Subgroupoid) -> Answer {
        is_weak_equivalence_all_modes(x, y, &Family::default()).unwrap().answer
    }

    #[test]
    fn whole_groupoid_is_an_equivalence() {
        let g = s3();
        assert_eq!(all(&g, &Subgroupoid::whole(&g)), Answer::Yes);
        let p = Arc::new(TopGroupoid::pair(names(&["a", "b"])));
        assert_eq!(all(&p, &Subgroupoid::whole(&p)), Answer::Yes);
    }

    #[test]
    fn endpoint_of_iso_pair() {
        let p = Arc::new(TopGroupoid::pair(names(&["a", "b"])));
        let a = Subgroupoid::full_on(&p, &set_of(2, [0]));
        assert_eq!(all(&p, &a), Answer::Yes);
    }

    #[test]
    fn proper_subgroup_is_a_surjection_but_not_an_inclusion() {
        let g = s3();
        let h = Subgroupoid::generated(&g, &set_of(6, [1]));
        let fam = Family::default();
        assert_eq!(is_localic_surjection(&g, &h, &fam).unwrap().answer, Answer::Yes);
        let incl = is_subtopos_inclusion(&g, &h, &fam).unwrap();
        assert_eq!(incl.answer, Answer::No);
        assert!(!incl.witnesses.is_empty());
        assert_eq!(all(&g, &h), Answer::No);
        for u in enumerate_open_subgroupoids(&g, 100).unwrap() {
            assert!(has_skula_dense_orbits(&g, &h, &u));
        }
    }

    #[test]
    fn one_of_two_separate_objects() {
        let d = Arc::new(TopGroupoid::discrete(&FinSpace::discrete(names(&["a", "b"]))));
        let a = Subgroupoid::full_on(&d, &set_of(2, [0]));
        let ids = Subgroupoid::whole(&d);
        assert!(!has_skula_dense_orbits(&d, &a, &ids));
        let v = is_localic_surjection(&d, &a, &Family::default()).unwrap();
        assert_eq!(v.answer, Answer::No);
        assert_eq!(v.witnesses[0].subgroupoid, names(&["id_b"]));
        // a subspace is always a subtopos
        assert_eq!(is_subtopos_inclusion(&d, &a, &Family::default()).unwrap().answer, Answer::Yes);
    }

    #[test]
    fn discrete_groupoids_reduce_to_skula_density() {
        let s = FinSpace::sierpinski();
        let d = Arc::new(TopGroupoid::discrete(&s));
        for bits in 0..4usize {
            let objs = set_of(2, (0..2).filter(|i| bits >> i & 1 == 1));
            let y = Subgroupoid::full_on(&d, &objs);
            let expected = if s.is_skula_dense(&objs) { Answer::Yes } else { Answer::No };
            assert_eq!(all(&d, &y), expected, "subset {bits:b}");
        }
    }

    // pair groupoid on {a, b} times Z/2, all discrete; arrow (s, t, g) is 4s + 2t + g
    fn pair_times_z2() -> Arc<TopGroupoid> {
        let idx = |s: usize, t: usize, g: usize| 4 * s + 2 * t + g;
        let mut comp = Vec::new();
        for (s, t, u, g, h) in itertools::iproduct!(0..2, 0..2, 0..2, 0..2, 0..2) {
            comp.push((idx(s, t, g), idx(t, u, h), idx(s, u, (g + h) % 2)));
        }
        let labels = (0..8).map(|a| format!("{}{}{}", a / 4, a / 2 % 2, a % 2)).collect();
        Arc::new(
            TopGroupoid::new(
                FinSpace::discrete(names(&["a", "b"])),
                FinSpace::discrete(labels),
                (0..8).map(|a| a / 4).collect(),
                (0..8).map(|a| a / 2 % 2).collect(),
                vec![idx(0, 0, 0), idx(1, 1, 0)],
                (0..8).map(|a| idx(a / 2 % 2, a / 4, a % 2)).collect(),
                &comp,
            )
            .unwrap(),
        )
    }

    #[test]
    fn non_replete_inclusion_without_automorphisms() {
        let x = pair_times_z2();
        assert!(x.validate().is_empty());
        let y = Subgroupoid::identities(&x, &set_of(2, [0]));
        assert!(!y.is_replete(&x));
        let fam = Family::default();
        assert_eq!(is_subtopos_inclusion(&x, &y, &fam).unwrap().answer, Answer::No);
        assert_eq!(is_localic_surjection(&x, &y, &fam).unwrap().answer, Answer::Yes);
        let with_auts = Subgroupoid::full_on(&x, &set_of(2, [0]));
        assert_eq!(all(&x, &with_auts), Answer::Yes);
    }

    #[test]
    fn user_family_gives_unknown_on_pass() {
        let g = s3();
        let fam = Family::User(vec![Subgroupoid::whole(&g)]);
        let v = is_weak_equivalence(&g, &Subgroupoid::whole(&g), &fam, Mode::QuasiHomeo).unwrap();
        assert_eq!((v.answer, v.family), (Answer::Unknown, Provenance::User));
    }

    #[test]
    fn non_open_family_member_is_rejected() {
        let d = Arc::new(TopGroupoid::discrete(&FinSpace::sierpinski()));
        let closed = Subgroupoid::full_on(&d, &set_of(2, [0]));
        let fam = Family::User(vec![closed]);
        assert!(matches!(
            is_weak_equivalence(&d, &Subgroupoid::whole(&d), &fam, Mode::QuasiHomeo),
            Err(WeqError::NotOpenMember(_))
        ));
    }

    #[test]
    fn factorizations() {
        let p = Arc::new(TopGroupoid::pair(names(&["a", "b"])));
        let id = ContinuousFunctor::identity(&p);
        let fz = factorize(&id, 100).unwrap();
        assert_eq!(fz.essential_image, Subgroupoid::whole(&p));
        assert!(fz.surjective_on_image_objects);
        assert_eq!(fz.image_skula_dense.answer, Answer::Yes);
        assert_eq!(fz.inclusion.answer, Answer::Yes);

        let one = Arc::new(TopGroupoid::discrete(&FinSpace::discrete(names(&["*"]))));
        let c = ContinuousFunctor::new(one, p.clone(), vec![0], vec![0]).unwrap();
        let fz = factorize(&c, 100).unwrap();
        assert_eq!(fz.essential_image, Subgroupoid::whole(&p));
        assert!(fz.first.validate().is_empty());
        assert!(fz.second.validate().is_empty());
        assert_eq!(fz.image_skula_dense.answer, Answer::Yes);
        assert_eq!(fz.inclusion.answer, Answer::Yes);

        let g = s3();
        let h = Subgroupoid::generated(&g, &set_of(6, [1]));
        let incl = h.materialize(&g);
        let fz = factorize(&incl, 100).unwrap();
        assert_eq!(fz.essential_image, Subgroupoid::whole(&g));
        assert_eq!(fz.inclusion.answer, Answer::Yes);
        assert_eq!(fz.image_skula_dense.answer, Answer::Yes);
    }
}
