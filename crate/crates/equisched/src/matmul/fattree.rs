//! Fat-tree schedules on 4^d leaves for n = 2^d.

use crate::error::{Error, Result};
use crate::groups::{FiniteGroup, GroupElement};
use crate::machines::{MachineConfig, MachineSpec, TimeModel};

use super::torus::{INDEX_GENS, OTHER_GEN};
use super::{preset_hom, BundleHoms, MatmulInstance, ScheduleBundle, SetHoms, Slot};

/// Element of iterwr(2, levels) flipping leaf bit `bit` in every subtree.
pub fn flip_bit(tree: &FiniteGroup, bit: usize) -> GroupElement {
    let mut x = tree.identity();
    for g in tree.generators() {
        let p = tree.to_perm(g).expect("tree acts on leaves");
        let moved = (0..p.degree())
            .find(|&y| p.apply(y) != y)
            .expect("generators move a leaf");
        if (moved ^ p.apply(moved)).trailing_zeros() as usize == bit {
            x = tree.compose(&x, g).expect("same group");
        }
    }
    x
}

/// Leaf running `(i, j, k)`: bit 2b is bit b of i, bit 2b+1 is bit b of k.
pub fn leaf(d: usize, i: usize, k: usize) -> usize {
    (0..d)
        .map(|b| ((i >> b & 1) << (2 * b)) | ((k >> b & 1) << (2 * b + 1)))
        .sum()
}

/// Time vector, top bit outermost, of the step with bits `t`.
fn time_vector(d: usize, t: usize) -> Vec<u64> {
    (0..d).rev().map(|b| (t >> b & 1) as u64).collect()
}

pub fn fat_tree_recursive(d: usize) -> Result<ScheduleBundle> {
    if d == 0 {
        return Err(Error::ParameterInfeasible("d must be at least 1".into()));
    }
    let n = 1usize << d;
    let inst = MatmulInstance::cube(n);
    let machine = MachineConfig {
        spec: MachineSpec::FatTree { levels: 2 * d },
        memory_words: 3,
        link_weights: Default::default(),
    };
    let time = TimeModel::new(vec![2; d]);
    let mut b = ScheduleBundle::empty("fat-tree", inst, machine, time, d, [1, 1, 1]);
    for x in 0..inst.instructions() {
        let (i, j, k) = inst.coords(x);
        b.schedule[x] = Some(Slot {
            node: leaf(d, i, k),
            time: time_vector(d, i ^ j ^ k),
        });
    }
    // step index = time bits read top bit first, which is the bit value itself
    b.place_all(0, |t, var, _| {
        let (i, j) = (var / n, var % n);
        Some(leaf(d, i, t ^ i ^ j))
    });
    b.place_all(1, |t, var, _| {
        let (j, k) = (var / n, var % n);
        Some(leaf(d, t ^ j ^ k, k))
    });
    b.place_all(2, |_, var, _| {
        let (k, i) = (var / n, var % n);
        Some(leaf(d, i, k))
    });
    b.homs = Some(fat_tree_homs(d));
    Ok(b)
}

/// ρ on the bitwise swaps of i, j, k, with the placements' factorizations.
/// Generators are ordered i₀…i_{d−1}, j₀…, k₀….
pub fn fat_tree_homs(d: usize) -> BundleHoms {
    let s2 = FiniteGroup::symmetric(2);
    let src = FiniteGroup::product(vec![s2.clone(); 3 * d]);
    let tree = FiniteGroup::iterwr(2, 2 * d);
    let delta = FiniteGroup::modular(vec![2; d]);
    let target = FiniteGroup::product(vec![tree.clone(), delta.clone()]);
    let dbit = |b: usize| {
        let mut v = vec![0; d];
        v[d - 1 - b] = 1;
        GroupElement::Mod(v)
    };
    let net = |r: usize, b: usize| match r {
        0 => flip_bit(&tree, 2 * b),
        1 => tree.identity(),
        _ => flip_bit(&tree, 2 * b + 1),
    };
    let mut images = Vec::new();
    for r in 0..3 {
        for b in 0..d {
            images.push(GroupElement::Product(vec![net(r, b), dbit(b)]));
        }
    }
    let rho = preset_hom(&src, &target, images);

    // G_I × Δ = (S₂)^{2d} × (ℤ/2)^d, index generators of the set first
    let local = FiniteGroup::product(vec![FiniteGroup::product(vec![s2.clone(); 2 * d]), delta.clone()]);
    let sw = s2.generators()[0].clone();
    let sets = (0..3)
        .map(|s| {
            let mut l_images = Vec::new();
            for r in 0..3 {
                for b in 0..d {
                    let mut comps = vec![s2.identity(); 2 * d];
                    if let Some(p) = INDEX_GENS[s].iter().position(|&g| g == r) {
                        comps[p * d + b] = sw.clone();
                    }
                    l_images.push(GroupElement::Product(vec![GroupElement::Product(comps), dbit(b)]));
                }
            }
            let rho_l = preset_hom(&src, &local, l_images);
            // μ(δ_b) carries the generator that does not index the set; an
            // index generator r_b then needs ρ(r_b)·μ(δ_b)⁻¹
            let tmu = |b: usize| net(OTHER_GEN[s], b);
            let mut mu_images = Vec::new();
            for p in 0..2 {
                for b in 0..d {
                    let r = INDEX_GENS[s][p];
                    mu_images.push(tree.compose(&net(r, b), &tree.inverse(&tmu(b)).unwrap()).unwrap());
                }
            }
            // Δ's generators are listed top bit first
            for l in 0..d {
                mu_images.push(tmu(d - 1 - l));
            }
            SetHoms {
                set: s,
                rho_l,
                mu: preset_hom(&local, &tree, mu_images),
            }
        })
        .collect();
    BundleHoms { rho, sets }
}
