mod common;

use std::collections::{BTreeSet, HashMap};

use equisched::error::Error;
use equisched::groups::{apply_hom, make_hom, FiniteGroup, GroupElement};
use equisched::machines::{MachineModel, PmhLevel};
use equisched::matmul::fattree::fat_tree_recursive;
use equisched::matmul::hex::{hex_systolic, HEX_ROWS, HEX_STREAMS};
use equisched::matmul::pmh::{pmh_schedule_map, pmh_space_bounded};
use equisched::matmul::torus::{
    cannon, cannon_blocked, torus_schedule, torus_schedule_unchecked, SetMu, TorusHomParams,
};
use equisched::matmul::twofive::schedule_2_5d;
use equisched::matmul::{enumerate_homs_to_cyclic, instance, ScheduleBundle};
use equisched::simulate::{verify, CostReport};

fn run(b: &ScheduleBundle) -> (MachineModel, CostReport) {
    let m = b.machine.build().unwrap();
    let r = verify(b, &m).unwrap();
    (m, r)
}

#[test]
fn instance_indexing_round_trips() {
    let inst = instance(2, 3, 4).unwrap();
    assert_eq!(inst.instructions(), 24);
    for x in 0..24 {
        let (i, j, k) = inst.coords(x);
        assert_eq!(inst.index(i, j, k), x);
        assert_eq!(inst.operand_rc(0, x), (i, j));
        assert_eq!(inst.operand_rc(1, x), (j, k));
        assert_eq!(inst.operand_rc(2, x), (k, i));
    }
    assert_eq!([inst.set_size(0), inst.set_size(1), inst.set_size(2)], [6, 12, 8]);
    assert!(matches!(instance(0, 1, 1), Err(Error::ParameterInfeasible(_))));
}

#[test]
fn cyclic_homs_match_brute_force_on_every_subgroup() {
    for q in [2u64, 3, 5] {
        let sq = FiniteGroup::symmetric(q as usize);
        for h in common::subgroups(&sq) {
            for t in [q, 2 * q, q + 1] {
                let got: BTreeSet<Vec<i64>> = enumerate_homs_to_cyclic(&h, q, t)
                    .unwrap()
                    .iter()
                    .map(|rho| {
                        h.generators()
                            .iter()
                            .map(|s| apply_hom(rho, s).unwrap().as_mod().unwrap()[0])
                            .collect()
                    })
                    .collect();
                assert_eq!(
                    got,
                    common::cyclic_hom_oracle(&h, t as i64),
                    "q={q} t={t} |H|={}",
                    h.order().unwrap()
                );
            }
        }
    }
}

#[test]
fn homs_to_z_q_are_parameterized_by_one_full_cycle() {
    assert_eq!(enumerate_homs_to_cyclic(&FiniteGroup::shift(3), 3, 3).unwrap().len(), 2);
    assert!(enumerate_homs_to_cyclic(&FiniteGroup::symmetric(3), 3, 3)
        .unwrap()
        .is_empty());
    for q in [3u64, 5] {
        for h in common::subgroups(&FiniteGroup::symmetric(q as usize)) {
            let homs = enumerate_homs_to_cyclic(&h, q, q).unwrap();
            let els = h.sorted_elements().unwrap();
            for rho in &homs {
                for x in &els {
                    let full = x.as_perm().unwrap().is_full_cycle();
                    if !full {
                        assert!(rho.target.is_identity(&apply_hom(rho, x).unwrap()));
                    }
                }
            }
            if !homs.is_empty() {
                assert_eq!(els.len() as u64, q);
                assert!(els.iter().any(|x| x.as_perm().unwrap().is_full_cycle()));
                assert_eq!(homs.len() as u64, q - 1);
            }
        }
    }
}

#[test]
fn nontrivial_homs_exist_when_q_does_not_divide_t() {
    // a transposition of S₃ onto the element of order 2 in ℤ/4
    let h = FiniteGroup::symmetric(3)
        .subgroup(&[GroupElement::perm(vec![1, 0, 2]).unwrap()])
        .unwrap();
    let homs = enumerate_homs_to_cyclic(&h, 3, 4).unwrap();
    assert_eq!(homs.len(), 1);
    assert_eq!(
        apply_hom(&homs[0], &h.generators()[0]).unwrap(),
        GroupElement::Mod(vec![2])
    );
    // the sign of S₃
    assert_eq!(
        enumerate_homs_to_cyclic(&FiniteGroup::symmetric(3), 3, 2)
            .unwrap()
            .len(),
        1
    );
}

#[test]
fn cyclic_homs_need_prime_q() {
    assert!(matches!(
        enumerate_homs_to_cyclic(&FiniteGroup::symmetric(4), 4, 4),
        Err(Error::NotPrime(4))
    ));
}

#[test]
fn cannon_moves_a_and_b_one_hop_and_keeps_c() {
    for q in 2..=5usize {
        let (_, r) = run(&cannon(q));
        assert!(r.violations.is_empty(), "{:?}", r.violations);
        assert_eq!(r.coverage, (q * q * q) as u64);
        assert_eq!(r.makespan, q as u64);
        let words = (q * q * (q - 1)) as u64;
        assert_eq!(r.set_traffic["A"]["torus-dim-1"], words);
        assert_eq!(r.set_traffic["A"]["torus-dim-0"], 0);
        assert_eq!(r.set_traffic["B"]["torus-dim-0"], words);
        assert_eq!(r.set_traffic["C"].values().sum::<u64>(), 0);
        assert!(r.peak_memory.iter().all(|&m| m == 3));
    }
    let (_, r) = run(&cannon(3));
    assert_eq!(r.set_traffic["A"].values().sum::<u64>(), 18);
}

#[test]
fn cannon_parameters_satisfy_the_derived_identity() {
    let p = TorusHomParams::cannon();
    for q in 2..8 {
        assert!(p.check(q).is_ok(), "q={q}");
    }
}

#[test]
fn unit_diagonal_mu_a_fails_both_identities() {
    let mut p = TorusHomParams::cannon();
    p.mu[0] = SetMu {
        index: [[1, 1], [0, 1]],
        t: [0, 1],
    };
    for q in [3, 5] {
        assert!(!p.commutes(0, q));
        assert!(!p.commutes_sign_flipped(0, q));
        assert!(matches!(
            torus_schedule(q as usize, &p),
            Err(Error::ConditionViolated(_))
        ));
    }
    let (_, r) = run(&torus_schedule_unchecked(3, &p));
    assert!(!r.violations.is_empty());
}

#[test]
fn commuting_identity_decides_validity_where_the_flipped_one_does_not() {
    // sweep μ_A mod 3 under Cannon's rows and the other sets' Cannon μ
    let q = 3;
    let mut flipped_only = 0;
    for code in 0..729 {
        let d: Vec<i64> = (0..6).map(|e| code / 3i64.pow(e) % 3).collect();
        let mut p = TorusHomParams::cannon();
        p.mu[0] = SetMu {
            index: [[d[0], d[1]], [d[2], d[3]]],
            t: [d[4], d[5]],
        };
        let derived = p.check(q).is_ok();
        if derived {
            let (_, r) = run(&torus_schedule(q as usize, &p).unwrap());
            assert!(r.violations.is_empty(), "{d:?}");
        } else if p.commutes_sign_flipped(0, q) && p.embeds(0, q) {
            flipped_only += 1;
            let (_, r) = run(&torus_schedule_unchecked(q as usize, &p));
            assert!(!r.violations.is_empty(), "{d:?}");
        }
    }
    assert!(flipped_only > 0);
}

#[test]
fn blocked_cannon_holds_whole_blocks() {
    let b = cannon_blocked(6, 6, 6, 3, 12).unwrap();
    let (_, r) = run(&b);
    assert!(
        r.violations.is_empty(),
        "{:?}",
        r.violations.iter().take(3).collect::<Vec<_>>()
    );
    assert_eq!(r.peak_memory.iter().max(), Some(&12));
    // per node: one A and one B block of (n/q)² words, one hop per transition
    assert_eq!(r.max_node_sent, 2 * 4 * 2);
    assert!(matches!(
        cannon_blocked(6, 6, 6, 3, 11),
        Err(Error::ParameterInfeasible(_))
    ));
    assert!(matches!(
        cannon_blocked(6, 6, 6, 4, 100),
        Err(Error::ParameterInfeasible(_))
    ));
    assert_eq!(cannon_blocked(3, 3, 3, 3, 3).unwrap().schedule, cannon(3).schedule);
}

#[test]
fn fat_tree_base_case_matches_the_figure() {
    let b = fat_tree_recursive(1).unwrap();
    // processors P00, P01, P10, P11 are leaves 0, 2, 1, 3
    let p = |a: usize, bb: usize| a + 2 * bb;
    let at = |i, j, k| {
        let s = b.slot(i, j, k).unwrap();
        (s.node, s.time[0])
    };
    assert_eq!(at(0, 0, 0), (p(0, 0), 0));
    assert_eq!(at(0, 1, 1), (p(0, 1), 0));
    assert_eq!(at(1, 1, 0), (p(1, 0), 0));
    assert_eq!(at(1, 0, 1), (p(1, 1), 0));
    assert_eq!(at(0, 1, 0), (p(0, 0), 1));
    assert_eq!(at(0, 0, 1), (p(0, 1), 1));
    assert_eq!(at(1, 0, 0), (p(1, 0), 1));
    assert_eq!(at(1, 1, 1), (p(1, 1), 1));
    let (_, r) = run(&b);
    assert!(r.violations.is_empty());
    assert_eq!(r.traffic["tree-level-2"], 4);
    assert_eq!(r.traffic["tree-level-1"], 8);
}

#[test]
fn fat_tree_recursion_traffic() {
    for d in 1..=3usize {
        let n = 1u64 << d;
        let (_, r) = run(&fat_tree_recursive(d).unwrap());
        assert!(r.violations.is_empty(), "d={d}");
        assert_eq!(r.traffic[&format!("tree-level-{}", 2 * d)], n * n);
        assert_eq!(r.traffic[&format!("tree-level-{}", 2 * d - 1)], 2 * n * n);
        assert_eq!(r.set_traffic["C"].values().sum::<u64>(), 0);
        assert_eq!(r.makespan, n);
    }
    assert!(fat_tree_recursive(0).is_err());
}

#[test]
fn two_five_d_replicates_and_reduces() {
    let b = schedule_2_5d(4, 64, 4).unwrap();
    let (_, r) = run(&b);
    assert!(r.violations.is_empty());
    assert_eq!(r.coverage, 64);
    for sp in &b.sets {
        assert_eq!(sp.copies, 4);
        assert!(sp.placement.iter().all(|step| step.iter().all(|x| x.is_some())));
    }
    assert_eq!(r.reduced_words, 16);
    // chains of c − 1 = 3 hops per word: A along y, B along x, C along z
    assert_eq!(r.phase_traffic["torus-dim-2"], 3 * 16);
    assert_eq!(r.phase_traffic["torus-dim-1"], 3 * 16);
    assert_eq!(r.phase_traffic["torus-dim-0"], 3 * 16);
}

#[test]
fn two_five_d_copy_shift_maps_to_identity() {
    let b = schedule_2_5d(8, 128, 2).unwrap();
    let h = b.homs.as_ref().unwrap();
    let gens = h.rho.source.generators();
    let id = h.rho.target.identity();
    // generators: i, i-copy, j_t, j_c, k, k-copy
    assert_eq!(apply_hom(&h.rho, &gens[1]).unwrap(), id);
    assert_eq!(apply_hom(&h.rho, &gens[5]).unwrap(), id);
    assert_eq!(
        apply_hom(&h.rho, &gens[3]).unwrap(),
        GroupElement::Product(vec![GroupElement::Mod(vec![0, 0, 1]), GroupElement::Mod(vec![0])])
    );
    assert_eq!(
        apply_hom(&h.rho, &gens[0]).unwrap(),
        GroupElement::Product(vec![GroupElement::Mod(vec![1, 0, 0]), GroupElement::Mod(vec![3])])
    );
    let (_, r) = run(&b);
    assert!(r.violations.is_empty());
}

#[test]
fn two_five_d_with_one_layer_is_blocked_cannon() {
    let a = schedule_2_5d(8, 16, 1).unwrap();
    let c = cannon_blocked(8, 8, 8, 4, 12).unwrap();
    assert_eq!(a.schedule, c.schedule);
    let (_, ra) = run(&a);
    let (_, rc) = run(&c);
    assert!(ra.violations.is_empty());
    assert_eq!(ra.traffic["torus-dim-0"], rc.traffic["torus-dim-0"]);
    assert_eq!(ra.traffic["torus-dim-1"], rc.traffic["torus-dim-1"]);
    assert_eq!(ra.max_node_sent, rc.max_node_sent);
}

#[test]
fn two_five_d_rejects_bad_parameters() {
    for (n, p, c) in [(4, 48, 3), (4, 32, 3), (4, 24, 2), (6, 64, 4), (4, 0, 1)] {
        assert!(
            matches!(schedule_2_5d(n, p, c), Err(Error::ParameterInfeasible(_))),
            "{n} {p} {c}"
        );
    }
    for (n, p, c) in [(4, 32, 2), (8, 128, 2), (2, 4, 1)] {
        let (_, r) = run(&schedule_2_5d(n, p, c).unwrap());
        assert!(r.violations.is_empty(), "{n} {p} {c}");
    }
}

#[test]
fn hex_streams_advance_one_node_per_step() {
    let b = hex_systolic(3, None, None).unwrap();
    let (m, r) = run(&b);
    assert!(r.violations.is_empty());
    assert!(r.makespan <= 9);
    for (s, sp) in b.sets.iter().enumerate() {
        let mut moves = 0;
        for w in sp.placement.windows(2) {
            for (a, c) in w[0].iter().zip(&w[1]) {
                if let (Some(a), Some(c)) = (a, c) {
                    let (pa, pc) = (m.hex_coords(*a), m.hex_coords(*c));
                    assert_eq!([pc.0 - pa.0, pc.1 - pa.1], HEX_STREAMS[s]);
                    moves += 1;
                }
            }
        }
        assert_eq!(moves, 9 * 2);
    }
}

#[test]
fn hex_generator_images() {
    let b = hex_systolic(2, None, None).unwrap();
    let h = b.homs.as_ref().unwrap();
    let g = h.rho.source.generators();
    assert_eq!(
        apply_hom(&h.rho, &g[1]).unwrap(),
        GroupElement::Product(vec![GroupElement::Mod(vec![-1, -1]), GroupElement::Mod(vec![1])])
    );
    // the same images do not define a homomorphism on Shift(q)³
    let s = FiniteGroup::shift(3);
    let src = FiniteGroup::product(vec![s.clone(), s.clone(), s]);
    let tgt = FiniteGroup::product(vec![FiniteGroup::modular(vec![0, 0]), FiniteGroup::cyclic(9)]);
    let images = HEX_ROWS
        .iter()
        .map(|r| GroupElement::Product(vec![GroupElement::Mod(r.to_vec()), GroupElement::Mod(vec![1])]))
        .collect();
    assert!(make_hom(&src, &tgt, images).is_err());
}

#[test]
fn hex_single_instruction_and_window_overflow() {
    let b = hex_systolic(1, None, None).unwrap();
    assert_eq!(b.time.len(), 3);
    let (_, r) = run(&b);
    assert_eq!((r.makespan, r.coverage), (1, 1));
    assert!(matches!(
        hex_systolic(3, Some((0, 0)), None),
        Err(Error::WindowOverflow(_))
    ));
    assert!(matches!(hex_systolic(3, None, Some(4)), Err(Error::WindowOverflow(_))));
}

fn levels(v: &[(u64, u64)]) -> Vec<PmhLevel> {
    v.iter().map(|&(memory, fanout)| PmhLevel { memory, fanout }).collect()
}

/// Recursive matrix multiplication order: octants in (i, j, k)
/// lexicographic order, halving each time.
fn recursive_order(n: usize, base: (usize, usize, usize), out: &mut Vec<(usize, usize, usize)>) {
    if n == 1 {
        out.push(base);
        return;
    }
    let h = n / 2;
    for o in 0..8 {
        recursive_order(
            h,
            (base.0 + (o >> 2) * h, base.1 + (o >> 1 & 1) * h, base.2 + (o & 1) * h),
            out,
        );
    }
}

#[test]
fn sequential_pmh_is_the_recursive_order() {
    for lv in [levels(&[(12, 1)]), levels(&[(48, 1)]), levels(&[(12, 1), (192, 1)])] {
        let b = pmh_space_bounded(&lv).unwrap();
        let n = b.instance.n;
        let mut want = Vec::new();
        recursive_order(n, (0, 0, 0), &mut want);
        let got: Vec<_> = b.execution_order().into_iter().map(|x| b.instance.coords(x)).collect();
        assert_eq!(got, want);
        let (_, r) = run(&b);
        assert!(r.violations.is_empty());
    }
}

#[test]
fn pmh_boundary_traffic_is_space_bounded() {
    let lv = levels(&[(12, 1), (192, 1)]);
    let (_, r) = run(&pmh_space_bounded(&lv).unwrap());
    let worst = r
        .transitions
        .iter()
        .map(|t| {
            t.traffic
                .iter()
                .filter(|(k, _)| k.as_str() != "pmh-level-1")
                .map(|(_, v)| v)
                .sum::<u64>()
        })
        .max()
        .unwrap();
    assert!(worst <= 3 * 12, "{worst}");
}

#[test]
fn parallel_pmh_runs_one_block_per_step() {
    let lv = levels(&[(192, 8)]);
    assert!(matches!(pmh_space_bounded(&lv), Err(Error::ParameterInfeasible(_))));
    let (inst, tm, slots) = pmh_schedule_map(&lv).unwrap();
    assert_eq!(inst.n, 8);
    assert_eq!(tm.len(), 64);
    let mut per: HashMap<u64, BTreeSet<usize>> = HashMap::new();
    for s in &slots {
        per.entry(tm.rank(&s.time)).or_default().insert(s.node);
    }
    assert_eq!(per.len(), 64);
    assert!(per.values().all(|nodes| *nodes == (0..8).collect()));
    assert!(pmh_space_bounded(&levels(&[(24, 1)])).is_err());
}
