//! Systolic schedule on a window of the hexagonal array.

use crate::error::{Error, Result};
use crate::groups::{FiniteGroup, GroupElement};
use crate::machines::{MachineConfig, MachineSpec, TimeModel};

use super::{preset_hom, BundleHoms, MatmulInstance, ScheduleBundle, SetHoms, Slot};

/// Images of the generators of i, j, k in `(g₂, g₃)` coordinates:
/// g₂, −g₁ = (−1, −1), g₃. Each also advances time by one.
pub const HEX_ROWS: [[i64; 2]; 3] = [[1, 0], [-1, -1], [0, 1]];

/// Direction each set's words travel per step: the image of the generator
/// that does not index it. A follows g₃, B follows g₂, C follows −g₁.
pub const HEX_STREAMS: [[i64; 2]; 3] = [HEX_ROWS[2], HEX_ROWS[0], HEX_ROWS[1]];

pub fn default_anchor(q: usize) -> (i64, i64) {
    (q as i64 - 1, q as i64 - 1)
}

/// Lattice position of `X_ijk`.
pub fn hex_position(anchor: (i64, i64), i: usize, j: usize, k: usize) -> (i64, i64) {
    let (i, j, k) = (i as i64, j as i64, k as i64);
    (
        anchor.0 + i * HEX_ROWS[0][0] + j * HEX_ROWS[1][0] + k * HEX_ROWS[2][0],
        anchor.1 + i * HEX_ROWS[0][1] + j * HEX_ROWS[1][1] + k * HEX_ROWS[2][1],
    )
}

/// q × q × q product on a `window × window` patch over 3q steps. Words are
/// on the array only between their first and last use.
pub fn hex_systolic(q: usize, anchor: Option<(i64, i64)>, window: Option<u64>) -> Result<ScheduleBundle> {
    if q == 0 {
        return Err(Error::ParameterInfeasible("q must be positive".into()));
    }
    let anchor = anchor.unwrap_or_else(|| default_anchor(q));
    let w = window.unwrap_or(3 * q as u64);
    let inst = MatmulInstance::cube(q);
    let node = |p: (i64, i64)| -> Result<usize> {
        let wi = w as i64;
        if p.0 < 0 || p.1 < 0 || p.0 >= wi || p.1 >= wi {
            return Err(Error::WindowOverflow(format!(
                "node ({},{}) outside the {w}×{w} window",
                p.0, p.1
            )));
        }
        Ok((p.0 * wi + p.1) as usize)
    };
    let machine = MachineConfig {
        spec: MachineSpec::Hex { window: w },
        memory_words: 3,
        link_weights: Default::default(),
    };
    let steps = 3 * q;
    let mut b = ScheduleBundle::empty("hex", inst, machine, TimeModel::new(vec![steps as u64]), 1, [1, 1, 1]);
    for x in 0..inst.instructions() {
        let (i, j, k) = inst.coords(x);
        b.schedule[x] = Some(Slot {
            node: node(hex_position(anchor, i, j, k))?,
            time: vec![(i + j + k) as u64],
        });
    }
    // a word of set s is where its instruction for the current step runs:
    // the non-indexing coordinate is determined by the step
    for s in 0..3 {
        let sp = &mut b.sets[s];
        for var in 0..q * q {
            let (r, c) = (var / q, var % q);
            for t in 0..steps {
                let Some(other) = (t as i64 - (r + c) as i64).try_into().ok().filter(|&o: &usize| o < q) else {
                    continue;
                };
                let (i, j, k) = match s {
                    0 => (r, c, other),
                    1 => (other, r, c),
                    _ => (c, other, r),
                };
                sp.set(t, var, 0, node(hex_position(anchor, i, j, k))?);
            }
        }
    }
    b.homs = Some(hex_homs());
    Ok(b)
}

/// ρ on ℤ³, the free abelian group the shifts generate before wrapping,
/// into the lattice `ℤ²` times ℤ, with each set's factorization. Time in
/// the window is this ℤ read mod 3q. Shift(q)³ and ℤ/3q admit no such
/// homomorphisms, since g₂ has infinite order.
pub fn hex_homs() -> BundleHoms {
    let src = FiniteGroup::modular(vec![0, 0, 0]);
    let net = FiniteGroup::modular(vec![0, 0]);
    let delta = FiniteGroup::modular(vec![0]);
    let target = FiniteGroup::product(vec![net.clone(), delta.clone()]);
    let one = GroupElement::Mod(vec![1]);
    let v = |x: [i64; 2]| GroupElement::Mod(x.to_vec());
    let rho = preset_hom(
        &src,
        &target,
        HEX_ROWS
            .iter()
            .map(|r| GroupElement::Product(vec![v(*r), one.clone()]))
            .collect(),
    );
    let index: [[usize; 2]; 3] = [[0, 1], [1, 2], [2, 0]];
    let z = FiniteGroup::modular(vec![0]);
    let local = FiniteGroup::product(vec![z.clone(), z, delta.clone()]);
    let sets = (0..3)
        .map(|s| {
            // ρ_l(r) = index shift (if r indexes s) plus one step; the step
            // carries the stream direction
            let l_images = (0..3)
                .map(|r| {
                    let mut e = vec![GroupElement::Mod(vec![0]), GroupElement::Mod(vec![0]), one.clone()];
                    if let Some(p) = index[s].iter().position(|&g| g == r) {
                        e[p] = GroupElement::Mod(vec![1]);
                    }
                    GroupElement::Product(e)
                })
                .collect();
            let stream = HEX_STREAMS[s];
            let mu_images = index[s]
                .iter()
                .map(|&r| v([HEX_ROWS[r][0] - stream[0], HEX_ROWS[r][1] - stream[1]]))
                .chain([v(stream)])
                .collect();
            SetHoms {
                set: s,
                rho_l: preset_hom(&src, &local, l_images),
                mu: preset_hom(&local, &net, mu_images),
            }
        })
        .collect();
    BundleHoms { rho, sets }
}
