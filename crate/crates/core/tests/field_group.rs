//! Field and group arithmetic against schoolbook oracles.

use std::sync::Arc;

use pralab::group::ProjPoint;
use pralab::{Field, FieldElem, GroupId, GroupKind, GroupTable};
use proptest::prelude::*;

/// Polynomial multiplication mod the field's modulus, on coefficient vectors.
fn poly_mul(f: &Field, a: &[u32], b: &[u32]) -> Vec<u32> {
    let p = f.p() as u64;
    let e = f.e() as usize;
    let m = f.modulus();
    let mut prod = vec![0u64; 2 * e];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p;
        }
    }
    // modulus is monic of degree e
    for d in (e..2 * e).rev() {
        let c = prod[d];
        if c != 0 {
            for (i, &mi) in m.iter().enumerate() {
                let idx = d - e + i;
                prod[idx] = (prod[idx] + (p - c) * mi as u64 % p) % p;
            }
        }
    }
    prod[..e].iter().map(|&v| v as u32).collect()
}

fn fields() -> Vec<Arc<Field>> {
    [(3, 1), (5, 1), (3, 2), (5, 2), (3, 3), (7, 2), (3, 4), (13, 1)]
        .iter()
        .map(|&(p, e)| Field::new(p, e).unwrap())
        .collect()
}

#[test]
fn multiplication_matches_polynomial_oracle() {
    for f in fields() {
        let elems: Vec<FieldElem> = f.elements().collect();
        for &a in &elems {
            for &b in elems.iter().step_by(3) {
                let want = poly_mul(&f, &f.coeffs(a), &f.coeffs(b));
                assert_eq!(f.coeffs(f.mul(a, b)), want, "GF({}) {a:?} {b:?}", f.q());
                let sum: Vec<u32> = f
                    .coeffs(a)
                    .iter()
                    .zip(f.coeffs(b))
                    .map(|(x, y)| (x + y) % f.p())
                    .collect();
                assert_eq!(f.coeffs(f.add(a, b)), sum);
            }
        }
    }
}

#[test]
fn gf9_uses_x2_plus_1() {
    let f = Field::new(3, 2).unwrap();
    assert_eq!(f.modulus(), &[1, 0, 1]);
    let x = f.from_coeffs(&[0, 1]).unwrap();
    assert_eq!(f.mul(x, x), f.from_int(-1));
}

#[test]
fn squares_are_half_the_units() {
    for f in fields() {
        let squares = f.elements().filter(|&a| !a.is_zero() && f.is_square(a)).count();
        assert_eq!(squares as u32, (f.q() - 1) / 2);
        for a in f.elements() {
            assert!(f.is_square(f.mul(a, a)));
        }
    }
}

#[test]
fn group_orders() {
    for (p, e) in [(3, 1), (5, 1), (7, 1), (3, 2), (11, 1), (13, 1), (5, 2), (3, 3)] {
        let q = (p as u64).pow(e);
        for (kind, order) in [(GroupKind::Pgl, q * (q * q - 1)), (GroupKind::Psl, q * (q * q - 1) / 2)] {
            let g = GroupId::build(kind, p, e).unwrap();
            assert_eq!(g.order(), order);
            assert_eq!(g.enumerate().unwrap().len() as u64, order);
        }
    }
}

fn field_strategy() -> impl Strategy<Value = Arc<Field>> {
    prop::sample::select(fields())
}

fn matrix(g: &GroupId, raw: [u32; 4]) -> Option<pralab::GroupElem> {
    let f = g.field();
    let m = raw.map(|r| f.elem(r % f.q()).unwrap());
    g.canonicalize(m[0], m[1], m[2], m[3]).ok()
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(400) })]

    #[test]
    fn field_axioms(f in field_strategy(), a in any::<u32>(), b in any::<u32>(), c in any::<u32>()) {
        let [a, b, c] = [a, b, c].map(|r| f.elem(r % f.q()).unwrap());
        prop_assert_eq!(f.add(a, b), f.add(b, a));
        prop_assert_eq!(f.mul(a, b), f.mul(b, a));
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        prop_assert_eq!(f.sub(f.add(a, b), b), a);
        if !a.is_zero() {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), f.one());
            prop_assert_eq!(f.pow(a, f.q() as u64 - 1), f.one());
        } else {
            prop_assert!(f.inv(a).is_err());
        }
        // Frobenius is additive
        let p = f.p() as u64;
        prop_assert_eq!(f.pow(f.add(a, b), p), f.add(f.pow(a, p), f.pow(b, p)));
        prop_assert_eq!(f.parse_elem(&f.format_elem(a)).unwrap(), a);
    }

    #[test]
    fn scaling_does_not_change_the_element(
        f in field_strategy(), raw in any::<[u32; 4]>(), s in 1u32..1000,
    ) {
        let g = GroupId::new(GroupKind::Pgl, f.clone());
        let Some(x) = matrix(&g, raw) else { return Ok(()) };
        let s = f.elem(s % f.q()).unwrap();
        prop_assume!(!s.is_zero());
        let m = x.entries().map(|v| f.mul(v, s));
        prop_assert_eq!(g.canonicalize(m[0], m[1], m[2], m[3]).unwrap(), x.clone());
        prop_assert_eq!(g.from_code(g.code(&x)).unwrap(), x.clone());
        prop_assert_eq!(g.parse_elem(&g.format_elem(&x)).unwrap(), x);
    }

    #[test]
    fn moebius_action_is_a_left_action(
        f in field_strategy(), r1 in any::<[u32; 4]>(), r2 in any::<[u32; 4]>(), pt in any::<u32>(),
    ) {
        let g = GroupId::new(GroupKind::Pgl, f.clone());
        let (Some(x), Some(y)) = (matrix(&g, r1), matrix(&g, r2)) else { return Ok(()) };
        let z = ProjPoint::from_index(&f, pt % (f.q() + 1));
        let xy = g.multiply(&x, &y).unwrap();
        prop_assert_eq!(g.act(&xy, z), g.act(&x, g.act(&y, z)));
        prop_assert_eq!(g.act(&g.identity(), z), z);
        // determinant class is multiplicative
        let f2 = g.field();
        prop_assert_eq!(
            f2.is_square(g.det(&xy)),
            f2.is_square(g.det(&x)) == f2.is_square(g.det(&y))
        );
    }
}

#[test]
fn cayley_table_matches_matrix_products() {
    for (kind, p, e) in [(GroupKind::Psl, 5, 1), (GroupKind::Pgl, 3, 2), (GroupKind::Psl, 7, 1)] {
        let t = GroupTable::build(kind, p, e).unwrap();
        let id = t.id().clone();
        let els = t.elements();
        for &a in els.iter().step_by(7) {
            for &b in els {
                let m = id.multiply(&t.elem(a), &t.elem(b)).unwrap();
                assert_eq!(t.elem(t.mul(a, b)), m);
            }
            assert_eq!(t.mul(a, t.inv(a)), t.identity());
            assert_eq!(t.order_of(a) as u64, id.element_order(&t.elem(a)));
        }
    }
}

#[test]
fn psl_is_the_square_determinant_subgroup() {
    let t = GroupTable::build(GroupKind::Psl, 3, 2).unwrap();
    let pgl = t.pgl();
    assert_eq!(pgl.order(), 2 * t.order());
    let f = t.id().field().clone();
    for x in pgl.elements() {
        let det = pgl.id().det(&pgl.elem(*x));
        assert_eq!(t.contains(*x), f.is_square(det));
    }
}
