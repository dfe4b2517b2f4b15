#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, VecDeque};

use equisched::actions::{cosets, ActionSet, GroupAction};
use equisched::groups::{make_hom, FiniteGroup, GroupElement, Homomorphism};

pub fn corpus_groups() -> Vec<(&'static str, FiniteGroup)> {
    let s2 = FiniteGroup::symmetric(2);
    vec![
        ("Z2", FiniteGroup::cyclic(2)),
        ("Z3", FiniteGroup::cyclic(3)),
        ("Z4", FiniteGroup::cyclic(4)),
        ("Z2xZ2", FiniteGroup::torus(&[2, 2])),
        ("Shift4", FiniteGroup::shift(4)),
        ("S3", FiniteGroup::symmetric(3)),
        ("S2^3", FiniteGroup::product(vec![s2.clone(), s2.clone(), s2])),
        ("iterwr(2,2)", FiniteGroup::iterwr(2, 2)),
        (
            "S3xZ2",
            FiniteGroup::product(vec![FiniteGroup::symmetric(3), FiniteGroup::cyclic(2)]),
        ),
        ("S4", FiniteGroup::symmetric(4)),
    ]
}

/// Every subgroup generated by at most two elements, deduplicated by
/// element set.
pub fn subgroups(g: &FiniteGroup) -> Vec<FiniteGroup> {
    let els = g.sorted_elements().unwrap();
    let mut seen: BTreeSet<Vec<GroupElement>> = BTreeSet::new();
    let mut out = Vec::new();
    for (i, a) in els.iter().enumerate() {
        for b in &els[i..] {
            let h = g.subgroup(&[a.clone(), b.clone()]).unwrap();
            let key = h.sorted_elements().unwrap();
            if seen.insert(key) {
                out.push(h);
            }
        }
    }
    out
}

/// `G` acting on the left cosets of `K`.
pub fn coset_action(g: &FiniteGroup, k: &FiniteGroup) -> GroupAction {
    let cs = cosets(g, k).unwrap();
    let labels = cs.iter().map(|c| format!("{}K", c.representative)).collect();
    let set = ActionSet::new("cosets", labels).unwrap();
    GroupAction::from_fn(g.clone(), set, |s, x| {
        let y = cs[x].left_mul(g, s).unwrap();
        cs.iter().position(|c| *c == y).unwrap()
    })
    .unwrap()
}

/// Disjoint union of two actions of the same group.
pub fn union(a: &GroupAction, b: &GroupAction) -> GroupAction {
    let n = a.len();
    let mut labels: Vec<String> = a.set.points.iter().map(|p| format!("a{p}")).collect();
    labels.extend(b.set.points.iter().map(|p| format!("b{p}")));
    let set = ActionSet::new("union", labels).unwrap();
    let perms = a
        .generator_perms()
        .iter()
        .zip(b.generator_perms())
        .map(|(p, q)| {
            let mut v: Vec<usize> = p.images().to_vec();
            v.extend(q.images().iter().map(|y| y + n));
            equisched::groups::Perm::new(v).unwrap()
        })
        .collect();
    GroupAction::new(a.group.clone(), set, perms).unwrap()
}

/// Transitive actions on at most `max` points, plus a few intransitive
/// unions.
pub fn actions(g: &FiniteGroup, max: usize) -> Vec<GroupAction> {
    let order = g.order().unwrap() as usize;
    let mut trans: Vec<GroupAction> = subgroups(g)
        .iter()
        .filter(|k| order / k.order().unwrap() as usize <= max)
        .map(|k| coset_action(g, k))
        .collect();
    trans.sort_by_key(|a| a.len());
    let mut out = trans.clone();
    let mut unions = 0;
    'outer: for (i, a) in trans.iter().enumerate() {
        for b in &trans[i..] {
            if a.len() + b.len() <= max && a.len() > 1 {
                out.push(union(a, b));
                unions += 1;
                if unions == 2 {
                    break 'outer;
                }
            }
        }
    }
    out
}

/// Up to `limit` homomorphisms, found by filtering generator image tuples.
pub fn homs(g: &FiniteGroup, h: &FiniteGroup, limit: usize) -> Vec<Homomorphism> {
    let hel = h.sorted_elements().unwrap();
    let k = g.generators().len();
    let mut out = Vec::new();
    let total = hel.len().pow(k as u32);
    // spread the picks over the tuple space
    let step = (total / (limit * 8)).max(1);
    let mut idx = 0;
    while idx < total && out.len() < limit {
        let mut r = idx;
        let images = (0..k)
            .map(|_| {
                let e = hel[r % hel.len()].clone();
                r /= hel.len();
                e
            })
            .collect();
        if let Ok(rho) = make_hom(g, h, images) {
            out.push(rho);
        }
        idx += if out.is_empty() { 1 } else { step };
    }
    if g == h && !out.iter().any(|r| r.images == g.generators()) {
        out.push(Homomorphism::identity(g));
    }
    out
}

pub struct Case {
    pub name: String,
    pub source: GroupAction,
    pub target: GroupAction,
    pub rho: Homomorphism,
}

/// Pairs of small groups with homomorphisms and actions on at most eight
/// points.
pub fn corpus() -> Vec<Case> {
    let groups = corpus_groups();
    let mut out = Vec::new();
    for (gn, g) in &groups {
        let gacts = actions(g, 8);
        for (hn, h) in &groups {
            // keep the product count reasonable
            let limit = if gn == hn { 4 } else { 2 };
            for (ri, rho) in homs(g, h, limit).into_iter().enumerate() {
                let hacts = actions(h, 8);
                for (si, s) in gacts.iter().enumerate() {
                    for (ti, t) in hacts.iter().enumerate() {
                        out.push(Case {
                            name: format!("{gn}->{hn} hom{ri} src{si} tgt{ti}"),
                            source: s.clone(),
                            target: t.clone(),
                            rho: rho.clone(),
                        });
                    }
                }
            }
        }
    }
    out
}

/// All homomorphisms `G → ℤ/t` by trying every tuple of generator images,
/// propagating along a breadth-first search and checking all products.
pub fn cyclic_hom_oracle(g: &FiniteGroup, t: i64) -> BTreeSet<Vec<i64>> {
    let k = g.generators().len();
    let mut out = BTreeSet::new();
    for code in 0..t.pow(k as u32) {
        let imgs: Vec<i64> = (0..k).map(|s| code / t.pow(s as u32) % t).collect();
        let mut phi: HashMap<GroupElement, i64> = HashMap::new();
        phi.insert(g.identity(), 0);
        let mut queue = VecDeque::from([g.identity()]);
        let mut ok = true;
        while let Some(x) = queue.pop_front() {
            for (s, gen) in g.generators().iter().enumerate() {
                let y = g.compose(&x, gen).unwrap();
                let v = (phi[&x] + imgs[s]) % t;
                match phi.get(&y) {
                    Some(&w) if w != v => ok = false,
                    Some(_) => {}
                    None => {
                        phi.insert(y.clone(), v);
                        queue.push_back(y);
                    }
                }
            }
        }
        let all: Vec<_> = phi.iter().collect();
        ok = ok
            && all.iter().all(|(a, &pa)| {
                all.iter()
                    .all(|(b, &pb)| phi[&g.compose(a, b).unwrap()] == (pa + pb) % t)
            });
        if ok && imgs.iter().any(|&x| x != 0) {
            out.insert(imgs);
        }
    }
    out
}
