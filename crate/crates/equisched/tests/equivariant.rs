mod common;

use std::collections::BTreeSet;

use equisched::actions::{orbits, stabilizer, ActionSet, GroupAction};
use equisched::equivariant::{
    brute_force_equivariant, coset_map_exists, enumerate_coset_maps, eval, eval_with_witness, preimage_size,
    solve_equivariant, EquivariantMap, DEFAULT_ORACLE_CAP,
};
use equisched::groups::{make_hom, FiniteGroup, GroupElement, Homomorphism};
use equisched::Error;

fn m(v: &[i64]) -> GroupElement {
    GroupElement::Mod(v.to_vec())
}

fn translation(q: u64) -> GroupAction {
    GroupAction::from_fn(
        FiniteGroup::cyclic(q),
        ActionSet::range("t", q as usize),
        move |g, x| (x + g.as_mod().unwrap()[0] as usize) % q as usize,
    )
    .unwrap()
}

#[test]
fn existence_examples() {
    let z4 = FiniteGroup::cyclic(4);
    let id = Homomorphism::identity(&z4);
    let half = z4.subgroup(&[m(&[2])]).unwrap();
    let triv = z4.subgroup(&[]).unwrap();
    assert!(coset_map_exists(&z4, &z4, &id, &half, &half, &m(&[0])).unwrap());
    for a in 0..4 {
        assert!(!coset_map_exists(&z4, &z4, &id, &half, &triv, &m(&[a])).unwrap());
    }
}

#[test]
fn existence_in_s3_matches_conjugation() {
    let s3 = FiniteGroup::symmetric(3);
    let id = Homomorphism::identity(&s3);
    let p = |v: &[usize]| GroupElement::perm(v.to_vec()).unwrap();
    let l = s3.subgroup(&[p(&[1, 0, 2])]).unwrap();
    let k = s3.subgroup(&[p(&[0, 2, 1])]).unwrap();
    for a in s3.sorted_elements().unwrap() {
        // oracle: conjugate every element of L
        let ainv = s3.inverse(&a).unwrap();
        let conj: BTreeSet<_> = l
            .sorted_elements()
            .unwrap()
            .iter()
            .map(|x| s3.compose(&s3.compose(&ainv, x).unwrap(), &a).unwrap())
            .collect();
        let kset: BTreeSet<_> = k.sorted_elements().unwrap().into_iter().collect();
        assert_eq!(
            coset_map_exists(&s3, &s3, &id, &l, &k, &a).unwrap(),
            conj == kset,
            "a = {a}"
        );
    }
    assert!(coset_map_exists(&s3, &s3, &id, &l, &k, &p(&[2, 1, 0])).unwrap());
}

#[test]
fn existence_rejects_non_subgroups() {
    let z4 = FiniteGroup::cyclic(4);
    let id = Homomorphism::identity(&z4);
    let l = FiniteGroup::cyclic(3);
    assert!(matches!(
        coset_map_exists(&z4, &z4, &id, &l, &z4, &m(&[0])),
        Err(Error::NotASubgroup(_))
    ));
}

#[test]
fn coset_map_counts() {
    for q in [2u64, 3, 5] {
        let z = FiniteGroup::cyclic(q);
        let triv = z.subgroup(&[]).unwrap();
        let id = Homomorphism::identity(&z);
        assert_eq!(
            enumerate_coset_maps(&z, &z, &id, &triv, &triv).unwrap().len(),
            q as usize
        );
    }
    let s3 = FiniteGroup::symmetric(3);
    let z2 = FiniteGroup::cyclic(2);
    let sign = make_hom(&s3, &z2, vec![m(&[1]), m(&[1])]).unwrap();
    assert_eq!(enumerate_coset_maps(&s3, &z2, &sign, &s3, &z2).unwrap().len(), 1);
    let (l, k) = (s3.subgroup(&[]).unwrap(), z2.subgroup(&[]).unwrap());
    assert_eq!(enumerate_coset_maps(&s3, &z2, &sign, &l, &k).unwrap().len(), 2);
}

#[test]
fn sign_maps_match_brute_force_on_cosets() {
    // regular actions: S3 on itself, Z/2 on itself
    let s3 = FiniteGroup::symmetric(3);
    let z2 = FiniteGroup::cyclic(2);
    let src = common::coset_action(&s3, &s3.subgroup(&[]).unwrap());
    let tgt = common::coset_action(&z2, &z2.subgroup(&[]).unwrap());
    let sign = make_hom(&s3, &z2, vec![m(&[1]), m(&[1])]).unwrap();
    assert_eq!(
        brute_force_equivariant(&src, &tgt, &sign, DEFAULT_ORACLE_CAP)
            .unwrap()
            .len(),
        2
    );
    assert_eq!(solve_equivariant(&src, &tgt, &sign).unwrap().len(), 2);
}

#[test]
fn shift_rotations() {
    let a = GroupAction::natural(FiniteGroup::shift(3)).unwrap();
    let id = Homomorphism::identity(&a.group);
    let maps = solve_equivariant(&a, &a, &id).unwrap();
    let tables: Vec<Vec<usize>> = maps.iter().map(|f| f.table().to_vec()).collect();
    assert_eq!(tables, vec![vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 1]]);
}

#[test]
fn no_maps_when_stabilizer_condition_fails() {
    // a point fixed by all of Z/4 cannot land where only {0,2} fixes
    let z4 = FiniteGroup::cyclic(4);
    let id = Homomorphism::identity(&z4);
    let fixed = GroupAction::from_fn(z4.clone(), ActionSet::range("x", 1), |_, x| x).unwrap();
    let two = GroupAction::from_fn(z4.clone(), ActionSet::range("y", 2), |g, x| {
        (x + g.as_mod().unwrap()[0] as usize) % 2
    })
    .unwrap();
    assert!(solve_equivariant(&fixed, &two, &id).unwrap().is_empty());
    assert_eq!(solve_equivariant(&two, &fixed, &id).unwrap().len(), 1);
}

fn fat_tree_setup() -> (GroupAction, FiniteGroup, GroupAction) {
    let s2 = GroupAction::natural(FiniteGroup::symmetric(2)).unwrap();
    let src = GroupAction::product("X", &[&s2, &s2, &s2]).unwrap();
    let leaves = GroupAction::natural(FiniteGroup::iterwr(2, 2)).unwrap();
    let tgt = GroupAction::product("PxT", &[&leaves, &translation(2)]).unwrap();
    let n = leaves.group.clone();
    (src, n, tgt)
}

fn tree_elem(n: &FiniteGroup, bits: [u8; 3], t: i64) -> GroupElement {
    let mut x = n.identity();
    for (b, s) in bits.iter().zip(n.generators()) {
        if *b == 1 {
            x = n.compose(&x, s).unwrap();
        }
    }
    GroupElement::Product(vec![x, m(&[t])])
}

/// Point index of (leaf, time) in the target.
fn pt(leaf: usize, t: usize) -> usize {
    leaf * 2 + t
}

#[test]
fn fat_tree_schedule_among_solutions() {
    let (src, n, tgt) = fat_tree_setup();
    let rho = make_hom(
        &src.group,
        &tgt.group,
        vec![
            tree_elem(&n, [1, 1, 0], 1),
            tree_elem(&n, [0, 0, 0], 1),
            tree_elem(&n, [0, 0, 1], 1),
        ],
    )
    .unwrap();
    let maps = solve_equivariant(&src, &tgt, &rho).unwrap();
    // processor P_ik sits at leaf i + 2k, time is i ⊕ j ⊕ k
    let want: Vec<usize> = (0..8)
        .map(|x| {
            let (i, j, k) = (x >> 2, (x >> 1) & 1, x & 1);
            pt(i + 2 * k, i ^ j ^ k)
        })
        .collect();
    let hit: Vec<&EquivariantMap> = maps.iter().filter(|f| f.table() == want.as_slice()).collect();
    assert_eq!(hit.len(), 1);
    assert_eq!(eval(hit[0], 0).unwrap(), pt(0, 0));
}

#[test]
fn fat_tree_table_forces_time_from_j() {
    let (src, n, tgt) = fat_tree_setup();
    let rho = make_hom(
        &src.group,
        &tgt.group,
        vec![
            tree_elem(&n, [1, 1, 0], 0),
            tree_elem(&n, [1, 1, 1], 1),
            tree_elem(&n, [0, 0, 1], 0),
        ],
    )
    .unwrap();
    let maps = solve_equivariant(&src, &tgt, &rho).unwrap();
    assert!(!maps.is_empty());
    for f in &maps {
        for x in 0..8 {
            let j = (x >> 1) & 1;
            let t0 = f.table()[0] % 2;
            assert_eq!(f.table()[x] % 2, j ^ t0);
        }
    }
}

#[test]
fn eval_examples() {
    let a = GroupAction::natural(FiniteGroup::symmetric(4)).unwrap();
    let id = Homomorphism::identity(&a.group);
    let maps = solve_equivariant(&a, &a, &id).unwrap();
    assert_eq!(maps.len(), 1);
    for x in 0..4 {
        assert_eq!(eval(&maps[0], x).unwrap(), x);
    }
    assert_eq!(eval(&maps[0], 0).unwrap(), maps[0].choices[0].image);
    assert_eq!(eval(&maps[0], 4), Err(Error::NotInSet));
}

#[test]
fn preimage_examples() {
    // Z/9 on 9 points onto Z/3 on 3 points, fibers of 3
    let z9 = translation(9);
    let z3 = translation(3);
    let rho = make_hom(&z9.group, &z3.group, vec![m(&[1])]).unwrap();
    let maps = solve_equivariant(&z9, &z3, &rho).unwrap();
    assert_eq!(maps.len(), 3);
    for f in &maps {
        assert_eq!(preimage_size(f).unwrap(), 3);
    }
    let id = Homomorphism::identity(&z3.group);
    let f = &solve_equivariant(&z3, &z3, &id).unwrap()[0];
    assert_eq!(preimage_size(f).unwrap(), 1);

    let two = common::union(&z3, &z3);
    let f = &solve_equivariant(&two, &z3, &id).unwrap()[0];
    assert!(matches!(preimage_size(f), Err(Error::NotTransitive(_))));
}

#[test]
fn brute_force_edge_cases() {
    let z2 = FiniteGroup::cyclic(2);
    let empty = GroupAction::from_fn(z2.clone(), ActionSet::range("x", 0), |_, x| x).unwrap();
    let two = translation(2);
    let id = Homomorphism::identity(&z2);
    assert_eq!(
        brute_force_equivariant(&empty, &two, &id, DEFAULT_ORACLE_CAP).unwrap(),
        vec![Vec::<usize>::new()]
    );
    assert_eq!(solve_equivariant(&empty, &two, &id).unwrap().len(), 1);

    let t = FiniteGroup::trivial();
    let x = GroupAction::new(t.clone(), ActionSet::range("x", 3), vec![]).unwrap();
    let y = GroupAction::new(t.clone(), ActionSet::range("y", 4), vec![]).unwrap();
    let id = Homomorphism::identity(&t);
    assert_eq!(
        brute_force_equivariant(&x, &y, &id, DEFAULT_ORACLE_CAP).unwrap().len(),
        64
    );
    assert_eq!(solve_equivariant(&x, &y, &id).unwrap().len(), 64);

    assert_eq!(
        brute_force_equivariant(&x, &y, &id, 10).unwrap_err(),
        Error::OracleCapExceeded { cap: 10 }
    );
}

#[test]
fn witness_independence() {
    let (src, n, tgt) = fat_tree_setup();
    let rho = make_hom(
        &src.group,
        &tgt.group,
        vec![
            tree_elem(&n, [1, 1, 0], 1),
            tree_elem(&n, [0, 0, 0], 1),
            tree_elem(&n, [0, 0, 1], 1),
        ],
    )
    .unwrap();
    let en = src.group.enumerate().unwrap();
    for f in solve_equivariant(&src, &tgt, &rho).unwrap() {
        for x in 0..8 {
            for g in &en.elements {
                if src.act(g, f.choices[0].anchor).unwrap() == x {
                    assert_eq!(eval_with_witness(&f, x, g).unwrap(), eval(&f, x).unwrap());
                }
            }
        }
    }
}

#[test]
fn solver_matches_oracle_on_corpus() {
    let cases = common::corpus();
    assert!(cases.len() > 1000);
    for c in &cases {
        let solved: BTreeSet<Vec<usize>> = solve_equivariant(&c.source, &c.target, &c.rho)
            .unwrap()
            .iter()
            .map(|f| f.table().to_vec())
            .collect();
        let oracle: BTreeSet<Vec<usize>> = brute_force_equivariant(&c.source, &c.target, &c.rho, DEFAULT_ORACLE_CAP)
            .unwrap()
            .into_iter()
            .collect();
        assert_eq!(solved, oracle, "{}", c.name);
    }
}

/// Every returned map satisfies the square for all elements, not only
/// generators.
#[test]
fn defining_square_on_all_elements() {
    for c in common::corpus().iter().step_by(7) {
        let en = c.source.group.enumerate().unwrap();
        for f in solve_equivariant(&c.source, &c.target, &c.rho).unwrap() {
            for g in &en.elements {
                let rg = equisched::groups::apply_hom(&c.rho, g).unwrap();
                for x in 0..c.source.len() {
                    let lhs = eval(&f, c.source.act(g, x).unwrap()).unwrap();
                    let rhs = c.target.act(&rg, eval(&f, x).unwrap()).unwrap();
                    assert_eq!(lhs, rhs, "{}", c.name);
                }
            }
        }
    }
}

/// Transitive source and target: the number of maps is the number of
/// cosets aK with a⁻¹ρ(L)a ⊆ K.
#[test]
fn count_equals_admissible_cosets() {
    for c in common::corpus() {
        if !(c.source.is_transitive() && c.target.is_transitive()) || c.source.is_empty() {
            continue;
        }
        let l = stabilizer(&c.source, 0).unwrap();
        let k = stabilizer(&c.target, 0).unwrap();
        let n = enumerate_coset_maps(&c.source.group, &c.target.group, &c.rho, &l, &k)
            .unwrap()
            .len();
        assert_eq!(
            solve_equivariant(&c.source, &c.target, &c.rho).unwrap().len(),
            n,
            "{}",
            c.name
        );
    }
}

#[test]
fn count_can_fall_below_index_for_nonabelian_targets() {
    let a = GroupAction::natural(FiniteGroup::symmetric(3)).unwrap();
    let id = Homomorphism::identity(&a.group);
    let k = stabilizer(&a, 0).unwrap();
    let index = a.group.order().unwrap() / k.order().unwrap();
    assert_eq!(index, 3);
    assert_eq!(solve_equivariant(&a, &a, &id).unwrap().len(), 1);

    let w = GroupAction::natural(FiniteGroup::iterwr(2, 2)).unwrap();
    let id = Homomorphism::identity(&w.group);
    assert_eq!(solve_equivariant(&w, &w, &id).unwrap().len(), 2);
}

#[test]
fn fiber_law_on_corpus() {
    for c in common::corpus() {
        if !c.source.is_transitive() || c.source.is_empty() {
            continue;
        }
        for f in solve_equivariant(&c.source, &c.target, &c.rho).unwrap() {
            let mut fibers = vec![0usize; c.target.len()];
            for &y in f.table() {
                fibers[y] += 1;
            }
            match preimage_size(&f) {
                Ok(s) => assert!(fibers.iter().all(|&n| n == s), "{}", c.name),
                Err(Error::NotTransitive(_)) => {
                    assert!(
                        !c.target.is_transitive() || fibers.iter().any(|&n| n == 0),
                        "{}",
                        c.name
                    )
                }
                Err(e) => panic!("{e}"),
            }
        }
    }
}

#[test]
fn orbit_choices_cover_source_orbits() {
    let (src, n, tgt) = fat_tree_setup();
    let rho = make_hom(
        &src.group,
        &tgt.group,
        vec![
            tree_elem(&n, [1, 1, 0], 1),
            tree_elem(&n, [0, 0, 0], 1),
            tree_elem(&n, [0, 0, 1], 1),
        ],
    )
    .unwrap();
    let f = &solve_equivariant(&src, &tgt, &rho).unwrap()[0];
    let anchors: Vec<usize> = f.choices.iter().map(|c| c.anchor).collect();
    let mins: Vec<usize> = orbits(&src).iter().map(|o| o[0]).collect();
    assert_eq!(anchors, mins);
    let p = f.choices[0].param.as_ref().unwrap();
    assert!(coset_map_exists(&src.group, &tgt.group, &rho, &p.source_stab, &p.target_stab, &p.a).unwrap());
}
