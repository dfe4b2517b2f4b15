//! Space-bounded recursive schedule on a parallel memory hierarchy.
//!
//! Level l of the hierarchy owns bits `[d_{l-1}/2, d_l/2)` of each index.
//! The lowest `c_l/3` of those bits of i, j and k are flattened onto the
//! level-l processor digit; the rest are traversed in Z-order in time.

use crate::error::{Error, Result};
use crate::machines::{pmh_exponents, MachineConfig, MachineSpec, PmhLevel, TimeModel};

use super::{MatmulInstance, ScheduleBundle, Slot};

/// Per level: first index bit, bits on processors, bits in time.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PmhLevelPlan {
    pub first_bit: u32,
    pub space_bits: u32,
    pub time_bits: u32,
}

/// Level plans, innermost first, with the instance edge `2^{d_h/2}`.
pub fn pmh_plan(levels: &[PmhLevel]) -> Result<(Vec<PmhLevelPlan>, usize)> {
    let ex = pmh_exponents(levels)?;
    let mut prev = 0;
    let mut out = Vec::new();
    for (l, &(d, c)) in ex.iter().enumerate() {
        if d % 2 != 0 {
            return Err(Error::ParameterInfeasible(format!("d_{} = {d} is odd", l + 1)));
        }
        if c % 3 != 0 {
            return Err(Error::ParameterInfeasible(format!(
                "c_{} = {c} is not a multiple of 3",
                l + 1
            )));
        }
        let bits = (d - prev) / 2;
        if c / 3 > bits {
            return Err(Error::ParameterInfeasible(format!(
                "t_{} = 2^(3((d_i - d_(i-1))/2 - c_i/3)) is not integral",
                l + 1
            )));
        }
        out.push(PmhLevelPlan {
            first_bit: prev / 2,
            space_bits: c / 3,
            time_bits: bits - c / 3,
        });
        prev = d;
    }
    Ok((out, 1usize << (prev / 2)))
}

fn bits(x: usize, from: u32, n: u32) -> usize {
    (x >> from) & ((1 << n) - 1)
}

/// Interleaves `n` bits of each of `xs`, the first argument most
/// significant within each group, lowest bit group last.
pub fn interleave(xs: &[usize], n: u32) -> usize {
    let mut v = 0;
    for b in (0..n).rev() {
        for &x in xs {
            v = (v << 1) | (x >> b & 1);
        }
    }
    v
}

/// Processor node and time vector (outermost level first) of `X_ijk`.
pub fn pmh_slot(plan: &[PmhLevelPlan], radices: &[u64], i: usize, j: usize, k: usize) -> Slot {
    let mut node = 0usize;
    let mut scale = 1usize;
    let mut time = Vec::new();
    for (p, &r) in plan.iter().zip(radices) {
        let pick = |x: usize, from: u32, n: u32| bits(x, p.first_bit + from, n);
        let s = p.space_bits;
        node += scale * interleave(&[pick(i, 0, s), pick(j, 0, s), pick(k, 0, s)], s);
        scale *= r as usize;
        let tb = p.time_bits;
        time.push(interleave(&[pick(i, s, tb), pick(j, s, tb), pick(k, s, tb)], tb) as u64);
    }
    time.reverse();
    Slot { node, time }
}

/// Steps per level, outermost first.
fn time_model(plan: &[PmhLevelPlan]) -> TimeModel {
    TimeModel::new(plan.iter().rev().map(|p| 1u64 << (3 * p.time_bits)).collect())
}

/// The schedule map alone, for any admissible hierarchy.
pub fn pmh_schedule_map(levels: &[PmhLevel]) -> Result<(MatmulInstance, TimeModel, Vec<Slot>)> {
    let (plan, n) = pmh_plan(levels)?;
    let radices = radices(&plan);
    let inst = MatmulInstance::cube(n);
    let slots = (0..inst.instructions())
        .map(|x| {
            let (i, j, k) = inst.coords(x);
            pmh_slot(&plan, &radices, i, j, k)
        })
        .collect();
    Ok((inst, time_model(&plan), slots))
}

fn radices(plan: &[PmhLevelPlan]) -> Vec<u64> {
    plan.iter()
        .map(|p| 1u64 << (2 * (p.space_bits + p.time_bits)))
        .collect()
}

/// Home node of word `(r, c)`: the Morton index, so every aligned
/// subproblem's words fill one cache.
pub fn home(r: usize, c: usize, n: usize) -> usize {
    interleave(&[r, c], n.trailing_zeros())
}

/// Node of the word with home digits `w` while the word with home digits
/// `s` is being used: at each level, inside the cache holding `s`, digit
/// `s_l` is swapped with 0.
pub fn swapped(w: &[u64], s: &[u64]) -> Vec<u64> {
    let h = w.len();
    (0..h)
        .map(|l| {
            if w[l + 1..] != s[l + 1..] {
                w[l]
            } else if w[l] == s[l] {
                0
            } else if w[l] == 0 {
                s[l]
            } else {
                w[l]
            }
        })
        .collect()
}

fn digits(mut x: usize, radices: &[u64]) -> Vec<u64> {
    radices
        .iter()
        .map(|&r| {
            let d = x as u64 % r;
            x /= r as usize;
            d
        })
        .collect()
}

fn undigits(d: &[u64], radices: &[u64]) -> usize {
    d.iter()
        .zip(radices)
        .rev()
        .fold(0, |acc, (&x, &r)| acc * r as usize + x as usize)
}

/// Sequential space-bounded schedule (every `f_l = 1`). Each step the
/// operands of the running instruction are swapped level by level into
/// the processor's registers, a permutation of the nodes in the wreath
/// network group.
pub fn pmh_space_bounded(levels: &[PmhLevel]) -> Result<ScheduleBundle> {
    let (plan, n) = pmh_plan(levels)?;
    if let Some(l) = plan.iter().position(|p| p.space_bits > 0) {
        return Err(Error::ParameterInfeasible(format!(
            "f_{} > 1: a {}-cube block per step needs each operand at several processors, \
             but the 3-word nodes are full at this instance size",
            l + 1,
            1 << plan[l].space_bits
        )));
    }
    let radices = radices(&plan);
    let inst = MatmulInstance::cube(n);
    let machine = MachineConfig {
        spec: MachineSpec::Pmh {
            levels: levels.to_vec(),
        },
        memory_words: 3,
        link_weights: Default::default(),
    };
    let time = time_model(&plan);
    let mut b = ScheduleBundle::empty("pmh", inst, machine, time.clone(), plan.len(), [1, 1, 1]);
    let order = (0..inst.instructions()).map(|x| {
        let (i, j, k) = inst.coords(x);
        (x, pmh_slot(&plan, &radices, i, j, k))
    });
    let mut by_step = vec![0usize; inst.instructions()];
    for (x, slot) in order {
        by_step[time.rank(&slot.time) as usize] = x;
        b.schedule[x] = Some(slot);
    }
    let homes: Vec<Vec<u64>> = (0..n * n).map(|v| digits(home(v / n, v % n, n), &radices)).collect();
    for s in 0..3 {
        b.place_all(s, |step, var, _| {
            let cur = inst.operand(s, by_step[step]);
            Some(undigits(&swapped(&homes[var], &homes[cur]), &radices))
        });
    }
    Ok(b)
}
