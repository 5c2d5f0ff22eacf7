mod common;

use common::groups::small_groups;
use common::{random_open_groupoid, random_open_groupoid_any, rng};
use grpdtopos::fintop::{full_set, set_of, ContinuousMap};
use grpdtopos::grpd::{
    bi_orbit_space, enumerate_open_subgroupoids, enumerate_subgroupoids, iota_map, orbit_space, ContinuousFunctor,
    Subgroupoid, TopGroupoid,
};
use proptest::prelude::*;
use rand::Rng;
use std::collections::BTreeSet;
use std::sync::Arc;

/// Continuity straight from the opens: every open has an open preimage.
fn continuous_by_opens(f: &ContinuousMap) -> bool {
    f.codomain().opens(1 << 16).unwrap().iter().all(|o| f.domain().is_open(&f.preimage(o)))
}

#[test]
fn bi_orbits_of_groups_are_double_cosets() {
    for g in small_groups(12).iter().flatten() {
        let n = g.order();
        let x = TopGroupoid::group((0..n).map(|i| format!("g{i}")).collect(), &g.mul).unwrap();
        let subgroups = g.subgroups();
        for &h in &subgroups {
            for &k in &subgroups {
                let members = |mask: u32| (0..n).filter(move |&a| mask >> a & 1 == 1);
                let hs = Subgroupoid::new(&x, set_of(n, members(h))).unwrap();
                let ks = Subgroupoid::new(&x, set_of(n, members(k))).unwrap();
                let b = bi_orbit_space(&x, &hs, &ks, &full_set(n)).unwrap();
                for a in 0..n {
                    let coset: BTreeSet<usize> =
                        members(h).flat_map(|p| members(k).map(move |q| g.mul[g.mul[p][a]][q])).collect();
                    let class: BTreeSet<usize> = b.orbit(b.class_of(a).unwrap()).into_iter().collect();
                    assert_eq!(class, coset, "{} at {a}", g.name);
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn orbit_spaces_of_groups_are_points(seed in any::<u64>()) {
        let mut r = rng(seed);
        let groups = small_groups(8);
        let all: Vec<_> = groups.iter().flatten().collect();
        let g = all[r.gen_range(0..all.len())];
        let x = TopGroupoid::group((0..g.order()).map(|i| i.to_string()).collect(), &g.mul).unwrap();
        for u in enumerate_subgroupoids(&x, 4096).unwrap() {
            prop_assert_eq!(orbit_space(&x, &u).0.len(), u.objects().count_ones(..));
        }
    }

    #[test]
    fn trivial_actors_leave_the_subspace(seed in any::<u64>()) {
        let mut r = rng(seed);
        let x = random_open_groupoid_any(&mut r, 12);
        let ids = Subgroupoid::identities(&x, &x.objects().full());
        let none = Subgroupoid::identities(&x, &x.objects().none());
        let v = set_of(x.arrow_count(), (0..x.arrow_count()).filter(|_| r.gen_bool(0.5)));
        for actors in [&ids, &none] {
            let b = bi_orbit_space(&x, actors, actors, &v).unwrap();
            // the same space up to labels, with the identity as quotient map
            prop_assert_eq!(b.space.neighbourhoods(), b.subspace.neighbourhoods());
            prop_assert!(b.quotient.table().iter().enumerate().all(|(i, &c)| i == c));
        }
    }

    #[test]
    fn comparison_maps_are_continuous(seed in any::<u64>()) {
        let x = random_open_groupoid(&mut rng(seed), 10);
        let opens = enumerate_open_subgroupoids(&x, 4096).unwrap();
        for y in enumerate_subgroupoids(&x, 4096).unwrap() {
            for u in &opens {
                prop_assert!(continuous_by_opens(&iota_map(&x, &y, u).unwrap().map));
            }
        }
    }

    #[test]
    fn full_essential_images_are_full_and_replete(seed in any::<u64>()) {
        let mut r = rng(seed);
        let y = Arc::new(random_open_groupoid(&mut r, 12));
        let x = Arc::new(random_open_groupoid(&mut r, 8));
        let y0 = r.gen_range(0..y.object_count());
        let constant =
            ContinuousFunctor::new(x.clone(), y.clone(), vec![y0; x.object_count()], vec![y.unit(y0); x.arrow_count()]).unwrap();
        let subs = enumerate_subgroupoids(&y, 4096).unwrap();
        let incl = subs[r.gen_range(0..subs.len())].materialize(&y);
        for f in [ContinuousFunctor::identity(&y), constant, incl] {
            prop_assert!(f.validate().is_empty());
            let e = f.full_essential_image();
            prop_assert!(e.is_full(&y) && e.is_replete(&y));
            prop_assert!(f.image().arrows().is_subset(e.arrows()));
        }
    }

    #[test]
    fn subgroupoids_with_subspace_topologies_are_groupoids(seed in any::<u64>()) {
        let x = Arc::new(random_open_groupoid_any(&mut rng(seed), 12));
        for y in enumerate_subgroupoids(&x, 4096).unwrap() {
            let incl = y.materialize(&x);
            prop_assert!(incl.dom().validate().is_empty());
            prop_assert!(incl.validate().is_empty());
            prop_assert!(incl.is_embedding());
        }
    }
}
