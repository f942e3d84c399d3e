use num_bigint::BigUint;
use proptest::prelude::*;
use ssg_perm::{index, intersection, Perm, PermGroup, SearchBudget};

const DEGREE: usize = 7;

fn perm() -> impl Strategy<Value = Perm> {
    Just((0..DEGREE as u32).collect::<Vec<u32>>())
        .prop_shuffle()
        .prop_map(|images| Perm::from_images(images).unwrap())
}

fn group() -> impl Strategy<Value = PermGroup> {
    prop::collection::vec(perm(), 0..3).prop_map(|gens| PermGroup::new(DEGREE, gens).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn composition_is_associative_with_inverses(a in perm(), b in perm(), c in perm()) {
        prop_assert_eq!(a.compose(&b).compose(&c), a.compose(&b.compose(&c)));
        prop_assert!(a.compose(&a.inverse()).is_identity());
        prop_assert_eq!(a.compose(&b).inverse(), b.inverse().compose(&a.inverse()));
        // `compose` applies its argument first
        prop_assert_eq!(a.compose(&b).image(3), a.image(b.image(3)));
    }

    #[test]
    fn chain_order_matches_closure(g in group()) {
        let closure = g.closure_order(10_000).unwrap();
        prop_assert_eq!(g.order(), BigUint::from(closure));
    }

    #[test]
    fn membership_matches_generators(g in group(), x in perm()) {
        for s in g.generators() {
            prop_assert!(g.contains(s));
            prop_assert!(g.contains(&s.compose(s)));
        }
        let extended = g.extended(std::slice::from_ref(&x)).unwrap();
        prop_assert!(extended.contains(&x));
        prop_assert!(extended.contains_group(&g));
        prop_assert_eq!(&extended.order() % g.order(), BigUint::from(0u32));
    }

    #[test]
    fn intersection_is_symmetric_and_indices_multiply(a in group(), b in group()) {
        let budget = SearchBudget::default();
        let ab = intersection(&a, &b, &budget).unwrap();
        let ba = intersection(&b, &a, &budget).unwrap();
        prop_assert!(ab.same_elements(&ba));
        prop_assert!(a.contains_group(&ab) && b.contains_group(&ab));
        let mut brute = 0usize;
        a.for_each_element(|x| {
            if b.contains(x) {
                brute += 1;
            }
            true
        });
        prop_assert_eq!(ab.order(), BigUint::from(brute));
        let sym = PermGroup::new(DEGREE, vec![
            Perm::from_cycles(DEGREE, &[&[0, 1]]).unwrap(),
            Perm::from_cycles(DEGREE, &[&[0, 1, 2, 3, 4, 5, 6]]).unwrap(),
        ]).unwrap();
        let whole = index(&ab, &sym).unwrap();
        prop_assert_eq!(whole, index(&a, &sym).unwrap() * index(&ab, &a).unwrap());
    }
}
