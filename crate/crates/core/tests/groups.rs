use proptest::prelude::*;
use spectralpairs::group_theory::*;

const MATRIX: &[(u32, u32, u32)] = &[(5, 1, 1), (7, 1, 1), (11, 1, 1), (13, 1, 1), (5, 2, 1), (7, 2, 1), (3, 4, 2)];

#[test]
fn degree_bound_holds_and_is_attained() {
    for &(p, n, r) in MATRIX {
        let g = build_gqm(GqmSpec::new(p, n, r).unwrap()).unwrap();
        assert_eq!(g.group.commutator_subgroup().len(), g.spec.q());
        let t = character_table(&g.group, 7).unwrap();
        let c = t.check();
        assert_eq!(c.sum_of_squares, g.group.order);
        assert!(c.orthogonality_defect < 1e-8);
        let bound = (g.spec.q() - 1) / g.spec.m_param();
        let got = min_nontrivial_dim(&t, &g.h1).unwrap();
        assert!(got >= bound);
        assert_eq!(got, bound, "({p}, {n}, {r})");
        for i in 0..t.values.len() {
            if t.dimensions[i] == 1 {
                assert!(t.trivial_on(i, &g.h1));
            }
        }
    }
}

#[test]
fn cayley_graphs_of_standard_sets() {
    for &(p, n, r) in MATRIX {
        let g = build_gqm(GqmSpec::new(p, n, r).unwrap()).unwrap();
        let s = standard_generators(&g).unwrap();
        assert!(s.is_admissible());
        let c = cayley_graph(&g.group, &s).unwrap();
        assert_eq!(c.degree, 2 * s.pair_count());
        assert_eq!(s.pair_count(), g.spec.chain_length() + 1);
        assert!(c.connected && c.right_action_automorphic);
        for i in 0..c.pair_count {
            assert!(delete_generator_pair(&c, i).unwrap() >= 2);
        }
    }
}

#[test]
fn json_round_trip() {
    let g = build_gqm(GqmSpec::new(7, 1, 1).unwrap()).unwrap();
    let mut buf = Vec::new();
    write_json(&g.group, &mut buf).unwrap();
    let back: FiniteGroup = serde_json::from_slice(&buf).unwrap();
    assert_eq!(back, g.group);
    let t = character_table(&g.group, 0).unwrap();
    let mut buf = Vec::new();
    t.write_json(&mut buf).unwrap();
    let back: CharacterTable = serde_json::from_slice(&buf).unwrap();
    assert_eq!(back.dimensions, t.dimensions);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_inverse_closed_sets_give_consistent_certificates(seed in any::<u64>(), k in 1usize..4) {
        let g = build_gqm(GqmSpec::new(7, 1, 1).unwrap()).unwrap();
        let mut x = seed;
        let mut elems = Vec::new();
        for _ in 0..k {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let a = (x >> 33) as usize % g.group.order;
            if !elems.contains(&a) {
                elems.push(a);
                let b = g.group.inv(a);
                if b != a {
                    elems.push(b);
                }
            }
        }
        let s = check_admissible_set(&g.group, &elems);
        prop_assert!(s.inverse_closed);
        prop_assert_eq!(s.generates, g.group.closure(&elems).len() == g.group.order);
        match cayley_graph(&g.group, &s) {
            Ok(c) => {
                prop_assert!(s.all_orders_at_least3);
                prop_assert_eq!(c.degree, 2 * s.pair_count());
                prop_assert_eq!(c.connected, s.generates);
                prop_assert!(c.right_action_automorphic);
            }
            Err(_) => prop_assert!(!s.all_orders_at_least3),
        }
    }
}
