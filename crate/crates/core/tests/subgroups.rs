//! Subgroup operations against a closure computed on matrices.

use std::collections::{BTreeSet, HashSet};

use pralab::subgroup::{
    centralizer, classify_subgroup, closure, find_conjugator, generates, is_structural, normalizer,
};
use pralab::{GroupElem, GroupKind, GroupTable, SubgroupClass, SubgroupLattice};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Closure by breadth-first multiplication of matrices.
fn matrix_closure(table: &GroupTable, gens: &[GroupElem]) -> HashSet<u128> {
    let id = table.id();
    let mut seen = HashSet::from([id.code(&id.identity())]);
    let mut frontier = vec![id.identity()];
    while let Some(x) = frontier.pop() {
        for g in gens {
            let y = id.multiply(&x, g).unwrap();
            if seen.insert(id.code(&y)) {
                frontier.push(y);
            }
        }
    }
    seen
}

fn tables() -> Vec<GroupTable> {
    [(GroupKind::Psl, 5, 1), (GroupKind::Pgl, 5, 1), (GroupKind::Psl, 3, 2), (GroupKind::Pgl, 7, 1)]
        .iter()
        .map(|&(k, p, e)| GroupTable::build(k, p, e).unwrap())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(100) })]

    #[test]
    fn closure_matches_matrix_oracle(which in 0usize..4, seed in any::<u64>(), n in 1usize..4) {
        let table = &tables()[which];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gens: Vec<_> = (0..n).map(|_| table.random_element(&mut rng)).collect();
        let h = closure(table, &gens).unwrap();
        let want = matrix_closure(table, &gens.iter().map(|&g| table.elem(g)).collect::<Vec<_>>());
        let got: HashSet<u128> = h.elements().iter().map(|&x| table.code(x)).collect();
        prop_assert_eq!(&got, &want);
        prop_assert_eq!(table.order() % h.order(), 0);
        prop_assert_eq!(generates(table, &gens), want.len() == table.order());
        let mut lattice = SubgroupLattice::new(table);
        let sid = lattice.generated(&gens);
        prop_assert_eq!(lattice.order(sid), h.order());

        let n = normalizer(table, &h);
        prop_assert!(h.is_subgroup_of(&n));
        for &x in n.elements() {
            for &y in h.generators() {
                prop_assert!(h.contains(table.conj(y, x)));
            }
        }
        let c = centralizer(table, &h, gens[0]);
        for &x in c.subgroup.elements() {
            prop_assert!(h.contains(x) && table.commute(x, gens[0]));
        }
        if let Some(g) = c.generator {
            prop_assert_eq!(table.order_of(g) as usize, c.subgroup.order());
        }
    }

    #[test]
    fn classification_is_conjugation_invariant(which in 0usize..4, seed in any::<u64>()) {
        let table = &tables()[which];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y, g) = (
            table.random_element(&mut rng),
            table.random_element(&mut rng),
            table.random_element(&mut rng),
        );
        let h = closure(table, &[x, y]).unwrap();
        let k = closure(table, &[table.conj(x, g), table.conj(y, g)]).unwrap();
        prop_assert_eq!(h.orbit_sizes(), k.orbit_sizes());
        prop_assert_eq!(classify_subgroup(table, &h).unwrap(), classify_subgroup(table, &k).unwrap());
        if h.order() < table.order() {
            prop_assert_eq!(is_structural(table, &h).unwrap(), is_structural(table, &k).unwrap());
        }
        let c = find_conjugator(table, &h, &k).unwrap();
        let moved: BTreeSet<_> = h.elements().iter().map(|&e| table.conj(e, c)).collect();
        let target: BTreeSet<_> = k.elements().iter().copied().collect();
        prop_assert_eq!(moved, target);
    }
}

#[test]
fn borel_subgroup_is_structural() {
    let t = GroupTable::build(GroupKind::Psl, 7, 1).unwrap();
    let stab: Vec<_> = t.elements().iter().copied().filter(|&x| t.act(x, 7) == 7).collect();
    assert_eq!(stab.len(), 7 * 3);
    let b = closure(&t, &stab).unwrap();
    assert_eq!(b.order(), 21);
    assert!(is_structural(&t, &b).unwrap());
    assert_eq!(classify_subgroup(&t, &b).unwrap(), SubgroupClass::BorelType);
}

#[test]
fn subfield_subgroup_of_psl25() {
    let t = GroupTable::build(GroupKind::Psl, 5, 2).unwrap();
    let u = t.parse_elem("10,10,00,10").unwrap();
    let v = t.parse_elem("10,00,10,10").unwrap();
    let h = closure(&t, &[u, v]).unwrap();
    assert_eq!(h.order(), 60);
    // PSL(2,5) is A5, and the small label comes first
    assert_eq!(classify_subgroup(&t, &h).unwrap(), SubgroupClass::A5);
    assert!(!is_structural(&t, &h).unwrap());
}

#[test]
fn pgl23_inside_pgl29_is_s4() {
    let t = GroupTable::build(GroupKind::Pgl, 3, 2).unwrap();
    let f = t.id().field();
    let e = |s: &str| t.parse_elem(s).unwrap();
    // matrices over the prime field
    let h = closure(&t, &[e("10,10,00,10"), e("00,10,10,00"), e("10,00,00,20")]).unwrap();
    assert_eq!(f.q(), 9);
    assert_eq!(h.order(), 24);
    assert_eq!(classify_subgroup(&t, &h).unwrap(), SubgroupClass::S4);
}

#[test]
fn psl_inside_pgl() {
    let t = GroupTable::build(GroupKind::Pgl, 7, 1).unwrap();
    let psl = t.psl();
    let h = closure(&t, psl.elements()).unwrap();
    assert_eq!(h.order(), 168);
    let class = classify_subgroup(&t, &h).unwrap();
    assert_eq!(class, SubgroupClass::PslSubfield { q1: 7 });
    assert!(!is_structural(&t, &h).unwrap());
}
