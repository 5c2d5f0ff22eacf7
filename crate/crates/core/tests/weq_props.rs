mod common;

use common::{random_open_groupoid, random_space, rng};
use grpdtopos::fintop::{set_of, PointSet};
use grpdtopos::grpd::{enumerate_open_subgroupoids, enumerate_subgroupoids, Subgroupoid, TopGroupoid};
use grpdtopos::weq::*;
use proptest::prelude::*;
use std::sync::Arc;

/// Skula density straight from the definition: all pairs of opens `W, W' ⊆ U0`.
fn skula_dense_literal(x: &TopGroupoid, y: &Subgroupoid, u: &Subgroupoid) -> bool {
    let orbit = y.orbit_closure(x);
    let opens: Vec<PointSet> = x.objects().opens(1 << 16).unwrap().into_iter().filter(|w| w.is_subset(u.objects())).collect();
    let cut = |w: &PointSet| {
        let mut c = w.clone();
        c.intersect_with(&orbit);
        c
    };
    opens.iter().all(|w| {
        opens.iter().all(|w2| {
            !cut(w2).is_subset(&cut(w))
                || w2.ones().all(|p| u.arrows().ones().any(|a| x.src(a) == p && w.contains(x.tgt(a))))
        })
    })
}

/// Source determination straight from the definition: every relatively open
/// `V` has bi-orbit `s⁻¹(W) ∩ t⁻¹(Y0)` for some open `W ⊆ U0`.
fn source_determined_literal(x: &TopGroupoid, y: &Subgroupoid, u: &Subgroupoid) -> bool {
    let a = restricted_arrows(x, y, u);
    let (sub, incl) = x.arrows().subspace(&a);
    let ws: Vec<PointSet> = x.objects().opens(1 << 16).unwrap().into_iter().filter(|w| w.is_subset(u.objects())).collect();
    sub.opens(1 << 16).unwrap().iter().all(|v| {
        let v = incl.image(v);
        let z = bi_saturation(x, y, u, &v);
        ws.iter().any(|w| a.ones().all(|b| w.contains(x.src(b)) == z.contains(b)))
    })
}

fn check_groupoid(seed: u64) {
    let x = Arc::new(random_open_groupoid(&mut rng(seed), 12));
    let opens = enumerate_open_subgroupoids(&x, 4096).unwrap();
    for y in enumerate_subgroupoids(&x, 4096).unwrap() {
        for u in &opens {
            assert_eq!(has_skula_dense_orbits(&x, &y, u), skula_dense_literal(&x, &y, u), "seed {seed}");
            assert_eq!(
                has_source_determined_orbits(&x, &y, u),
                source_determined_literal(&x, &y, u),
                "seed {seed}"
            );
        }
        assert_eq!(y.is_open_groupoid(&x), y.materialize(&x).dom().is_open(), "seed {seed}");
        if !y.is_open_groupoid(&x) {
            assert_eq!(
                is_weak_equivalence(&x, &y, &Family::default(), Mode::QuasiHomeo),
                Err(WeqError::SubgroupoidNotOpen)
            );
            continue;
        }
        let v = is_weak_equivalence_all_modes(&x, &y, &Family::default())
            .unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        let surj = is_localic_surjection(&x, &y, &Family::default()).unwrap();
        let incl = is_subtopos_inclusion(&x, &y, &Family::default()).unwrap();
        let both = surj.answer == Answer::Yes && incl.answer == Answer::Yes;
        assert_eq!(v.answer == Answer::Yes, both, "seed {seed}");
        assert_eq!(v.answer == Answer::No, !v.witnesses.is_empty());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn modes_agree_and_match_definitions(seed in any::<u64>()) {
        check_groupoid(seed);
    }

    #[test]
    fn full_replete_inclusions_are_subtopoi(seed in any::<u64>()) {
        let x = Arc::new(random_open_groupoid(&mut rng(seed), 12));
        for y in enumerate_subgroupoids(&x, 4096).unwrap() {
            if y.is_full(&x) && y.is_replete(&x) {
                prop_assert!(y.is_open_groupoid(&x));
                prop_assert_eq!(is_subtopos_inclusion(&x, &y, &Family::default()).unwrap().answer, Answer::Yes);
            }
        }
    }

    #[test]
    fn discrete_groupoids_reduce_to_skula_density(seed in any::<u64>(), n in 0usize..6) {
        let space = random_space(&mut rng(seed), n);
        let x = Arc::new(TopGroupoid::discrete(&space));
        for bits in 0..(1usize << n) {
            let objs = set_of(n, (0..n).filter(|i| bits >> i & 1 == 1));
            let y = Subgroupoid::full_on(&x, &objs);
            let expected = if space.is_skula_dense(&objs) { Answer::Yes } else { Answer::No };
            prop_assert_eq!(is_weak_equivalence_all_modes(&x, &y, &Family::default()).unwrap().answer, expected);
        }
    }

    #[test]
    fn weak_equivalences_compose(seed in any::<u64>()) {
        let x = Arc::new(random_open_groupoid(&mut rng(seed), 12));
        let subs: Vec<Subgroupoid> = enumerate_subgroupoids(&x, 4096)
            .unwrap()
            .into_iter()
            .filter(|y| y.is_open_groupoid(&x))
            .collect();
        let weq = |g: &Arc<TopGroupoid>, y: &Subgroupoid| {
            is_weak_equivalence(g, y, &Family::default(), Mode::QuasiHomeo).unwrap().answer == Answer::Yes
        };
        for y in subs.iter().filter(|y| weq(&x, y)) {
            let incl = y.materialize(&x);
            let inner = incl.dom().clone();
            for z in subs.iter().filter(|z| z.arrows().is_subset(y.arrows())) {
                let local = inner.arrows().set(z.arrows().ones().map(|a| incl.arr_table().binary_search(&a).unwrap()));
                let z_in_y = Subgroupoid::new(&inner, local).unwrap();
                if z_in_y.is_open_groupoid(&inner) && weq(&inner, &z_in_y) {
                    prop_assert!(weq(&x, z), "seed {}", seed);
                }
            }
        }
    }
}
