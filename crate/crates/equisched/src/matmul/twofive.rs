//! Replicated schedule on a q × q × c torus: c layers each running t skewed
//! Cannon steps on their slice of the j range.

use crate::error::{Error, Result};
use crate::groups::{FiniteGroup, GroupElement};
use crate::machines::{torus_index, MachineConfig, MachineSpec, TimeModel};

use super::{preset_hom, BundleHoms, MatmulInstance, Phase, PhaseKind, ScheduleBundle, SetHoms, Slot, Transfer};

/// Derived sizes of a 2.5D run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TwoFiveParams {
    pub n: usize,
    pub p: usize,
    pub c: usize,
    pub q: usize,
    pub t: usize,
}

impl TwoFiveParams {
    pub fn new(n: usize, p: usize, c: usize) -> Result<TwoFiveParams> {
        let bad = |m: String| Err(Error::ParameterInfeasible(m));
        if n == 0 || p == 0 || c == 0 || p % c != 0 {
            return bad(format!("c = {c} must divide p = {p}"));
        }
        let q2 = p / c;
        let q = (q2 as f64).sqrt().round() as usize;
        if q * q != q2 {
            return bad(format!("p/c = {q2} is not a square"));
        }
        if q % c != 0 {
            return bad(format!(
                "p = {p} is not a multiple of c^(3/2): c = {c} does not divide q = {q}"
            ));
        }
        let t = q / c;
        if n % (c * t) != 0 {
            return bad(format!("n = {n} is not divisible by c·t = {}", c * t));
        }
        Ok(TwoFiveParams { n, p, c, q, t })
    }
}

fn md(x: i64, q: usize) -> usize {
    x.rem_euclid(q as i64) as usize
}

pub fn schedule_2_5d(n: usize, p: usize, c: usize) -> Result<ScheduleBundle> {
    let pr = TwoFiveParams::new(n, p, c)?;
    let TwoFiveParams { q, t, .. } = pr;
    let blk = n / q;
    let inner = blk * blk * blk;
    let inst = MatmulInstance::cube(n);
    let dims = [q as u64, q as u64, c as u64];
    let machine = MachineConfig {
        spec: MachineSpec::Torus { dims: dims.to_vec() },
        memory_words: 3 * (blk * blk) as u64,
        link_weights: Default::default(),
    };
    let time = if inner == 1 {
        TimeModel::new(vec![t as u64])
    } else {
        TimeModel::new(vec![t as u64, inner as u64])
    };
    let node = |x: usize, y: usize, z: usize| torus_index(&dims, &[x as u64, y as u64, z as u64]);
    // block coordinates: i, k by Shift(q); j by (a_j, b_j) with J = b_j·t + a_j
    let split = |j: usize| ((j / blk) % t, (j / blk) / t);
    let step = |ai: usize, aj: usize, ak: usize| md(aj as i64 - ai as i64 - ak as i64, t);

    let mut b = ScheduleBundle::empty("2.5d", inst, machine, time, 1, [c, c, c]);
    for x in 0..inst.instructions() {
        let (i, j, k) = inst.coords(x);
        let (ai, ak) = (i / blk, k / blk);
        let (aj, bj) = split(j);
        let s = step(ai, aj, ak);
        let mut tv = vec![s as u64];
        if inner > 1 {
            tv.push((((i % blk) * blk + j % blk) * blk + k % blk) as u64);
        }
        b.schedule[x] = Some(Slot {
            node: node(ai, ak, bj),
            time: tv,
        });
        // A and B copies sit t apart along their skew direction
        b.sets[0].inp[x] = md(ak as i64 - (aj as i64 - ai as i64 - s as i64), q) / t;
        b.sets[1].inp[x] = md(ai as i64 - (aj as i64 - ak as i64 - s as i64), q) / t;
        b.sets[2].inp[x] = bj;
    }
    b.place_all(0, |s, var, g| {
        let (i, j) = (var / n, var % n);
        let (aj, bj) = split(j);
        let ai = i / blk;
        Some(node(ai, md(aj as i64 - ai as i64 - s as i64 + (g * t) as i64, q), bj))
    });
    b.place_all(1, |s, var, g| {
        let (j, k) = (var / n, var % n);
        let (aj, bj) = split(j);
        let ak = k / blk;
        Some(node(md(aj as i64 - ak as i64 - s as i64 + (g * t) as i64, q), ak, bj))
    });
    b.place_all(2, |_, var, g| {
        let (k, i) = (var / n, var % n);
        Some(node(i / blk, k / blk, g))
    });

    if c > 1 {
        let chain = |set: usize, rev: bool| {
            let mut v = Vec::new();
            for var in 0..n * n {
                for g in 1..c {
                    let (from, to) = if rev { (g, g - 1) } else { (g - 1, g) };
                    v.push(Transfer {
                        set,
                        var,
                        from_copy: from,
                        to_copy: to,
                    });
                }
            }
            v
        };
        let mut bc = chain(0, false);
        bc.extend(chain(1, false));
        b.prologue.push(Phase {
            label: "replicate A and B".into(),
            kind: PhaseKind::Broadcast,
            transfers: bc,
        });
        b.epilogue.push(Phase {
            label: "reduce C".into(),
            kind: PhaseKind::Reduce,
            transfers: chain(2, true),
        });
    }
    b.homs = Some(two_five_homs(&pr));
    Ok(b)
}

/// ρ with generators i, i-copy, j_t, j_c, k, k-copy: i and k by Shift(q)
/// with a Shift(c) copy shift each, j by Shift(t) × Shift(c).
///
/// C's factorization is always included. A and B are included when the
/// step group and their copy index combine into one cyclic group of order
/// q, that is when t = 1 or c = 1.
pub fn two_five_homs(pr: &TwoFiveParams) -> BundleHoms {
    let TwoFiveParams { q, t, c, .. } = *pr;
    let (qi, ti, ci) = (q as i64, t as i64, c as i64);
    let sq = FiniteGroup::shift(q);
    let st = FiniteGroup::shift(t);
    let sc = FiniteGroup::shift(c);
    let src = FiniteGroup::product(vec![
        FiniteGroup::product(vec![sq.clone(), sc.clone()]),
        FiniteGroup::product(vec![st.clone(), sc.clone()]),
        FiniteGroup::product(vec![sq.clone(), sc.clone()]),
    ]);
    let net = FiniteGroup::torus(&[q as u64, q as u64, c as u64]);
    let delta = FiniteGroup::cyclic(t as u64);
    let target = FiniteGroup::product(vec![net.clone(), delta.clone()]);
    let g = |x: i64, y: i64, z: i64| GroupElement::Mod(vec![x.rem_euclid(qi), y.rem_euclid(qi), z.rem_euclid(ci)]);
    let dt = |d: i64| GroupElement::Mod(vec![d.rem_euclid(ti)]);
    let pair = |a: GroupElement, b: GroupElement| GroupElement::Product(vec![a, b]);
    let rho = preset_hom(
        &src,
        &target,
        vec![
            pair(g(1, 0, 0), dt(-1)),
            pair(g(0, 0, 0), dt(0)),
            pair(g(0, 0, 0), dt(1)),
            pair(g(0, 0, 1), dt(0)),
            pair(g(0, 1, 0), dt(-1)),
            pair(g(0, 0, 0), dt(0)),
        ],
    );

    let mut sets = Vec::new();
    let sig = |grp: &FiniteGroup, on: bool| {
        if on {
            grp.generators()[0].clone()
        } else {
            grp.identity()
        }
    };
    // C: (k, i, layer copy, Δ)
    {
        let local = FiniteGroup::product(vec![sq.clone(), sq.clone(), sc.clone(), delta.clone()]);
        let img = |k: bool, i: bool, l: bool, d: i64| {
            GroupElement::Product(vec![sig(&sq, k), sig(&sq, i), sig(&sc, l), dt(d)])
        };
        let rho_l = preset_hom(
            &src,
            &local,
            vec![
                img(false, true, false, -1),
                img(false, false, false, 0),
                img(false, false, false, 1),
                img(false, false, true, 0),
                img(true, false, false, -1),
                img(false, false, false, 0),
            ],
        );
        let mu = preset_hom(&local, &net, vec![g(0, 1, 0), g(1, 0, 0), g(0, 0, 1), g(0, 0, 0)]);
        sets.push(SetHoms { set: 2, rho_l, mu });
    }
    if t == 1 || c == 1 {
        // A: (i, j_t, j_c, copy ∈ ℤ/q, Δ); the copy index, counted in units
        // of t hops, and the step together give ℤ/q
        let cq = FiniteGroup::cyclic(q as u64);
        let m = |x: i64| GroupElement::Mod(vec![x.rem_euclid(qi)]);
        let local = FiniteGroup::product(vec![sq.clone(), st.clone(), sc.clone(), cq.clone(), delta.clone()]);
        // `i_indexes`: whether i (rather than k) indexes the set; `gx` is
        // its index generator's direction and `gy` the skew direction
        let set_homs = |set: usize, i_indexes: bool, gx: GroupElement, gy: GroupElement| {
            let img = |a: bool, jt: bool, jc: bool, cp: i64, d: i64| {
                GroupElement::Product(vec![sig(&sq, a), sig(&st, jt), sig(&sc, jc), m(cp), dt(d)])
            };
            // both i and k advance the copy used; with c = 1 the step absorbs it
            let cp = if c == 1 { 0 } else { 1 };
            let own = img(true, false, false, cp, -1);
            let other = img(false, false, false, cp, -1);
            let (i_img, k_img) = if i_indexes { (own, other) } else { (other, own) };
            let id = img(false, false, false, 0, 0);
            let rho_l = preset_hom(
                &src,
                &local,
                vec![
                    i_img,
                    id.clone(),
                    img(false, true, false, 0, 1),
                    img(false, false, true, 0, 0),
                    k_img,
                    id,
                ],
            );
            let back = neg(&gy, qi, ci);
            let (mu_jt, mu_copy, mu_d) = if c == 1 {
                (gy.clone(), g(0, 0, 0), back)
            } else {
                (g(0, 0, 0), gy.clone(), g(0, 0, 0))
            };
            let mu = preset_hom(
                &local,
                &net,
                vec![net_sub(&gx, &gy, qi, ci), mu_jt, g(0, 0, 1), mu_copy, mu_d],
            );
            SetHoms { set, rho_l, mu }
        };
        sets.push(set_homs(0, true, g(1, 0, 0), g(0, 1, 0)));
        sets.push(set_homs(1, false, g(0, 1, 0), g(1, 0, 0)));
    }
    sets.sort_by_key(|s| s.set);
    BundleHoms { rho, sets }
}

fn coords(x: &GroupElement) -> Vec<i64> {
    match x {
        GroupElement::Mod(v) => v.clone(),
        _ => unreachable!("network elements are modular"),
    }
}

fn neg(x: &GroupElement, q: i64, c: i64) -> GroupElement {
    let v = coords(x);
    GroupElement::Mod(vec![
        (-v[0]).rem_euclid(q),
        (-v[1]).rem_euclid(q),
        (-v[2]).rem_euclid(c),
    ])
}

fn net_sub(a: &GroupElement, b: &GroupElement, q: i64, c: i64) -> GroupElement {
    let (a, b) = (coords(a), coords(b));
    GroupElement::Mod(vec![
        (a[0] - b[0]).rem_euclid(q),
        (a[1] - b[1]).rem_euclid(q),
        (a[2] - b[2]).rem_euclid(c),
    ])
}
