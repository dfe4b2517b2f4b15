//! Schedules on the 2D torus parameterized by generator images mod q.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::{FiniteGroup, GroupElement};
use crate::machines::{torus_index, MachineConfig, MachineSpec, TimeModel};

use super::{preset_hom, BundleHoms, MatmulInstance, ScheduleBundle, SetHoms, SET_NAMES};

/// Generators indexing each set, and the one that does not.
pub const INDEX_GENS: [[usize; 2]; 3] = [[0, 1], [1, 2], [2, 0]];
pub const OTHER_GEN: [usize; 3] = [2, 0, 1];

/// Movement of one set: images of its two index generators and of the time
/// step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetMu {
    pub index: [[i64; 2]; 2],
    pub t: [i64; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusHomParams {
    /// Node and step of X₀₀₀.
    pub anchor: [i64; 3],
    /// `(x_r, y_r, t_r)` for the generators of i, j, k.
    pub rows: [[i64; 3]; 3],
    /// μ for A, B, C.
    pub mu: [SetMu; 3],
}

fn md(x: i64, q: i64) -> i64 {
    x.rem_euclid(q)
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn unit(d: i64, q: i64) -> bool {
    gcd(md(d, q), q) == 1
}

fn det3(r: &[[i64; 3]; 3]) -> i64 {
    r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1]) - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
        + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0])
}

impl TorusHomParams {
    /// Cannon's algorithm: processor (i, k) at step j − i − k; A moves one
    /// hop left, B one hop up, C stays.
    pub fn cannon() -> TorusHomParams {
        TorusHomParams {
            anchor: [0, 0, 0],
            rows: [[1, 0, -1], [0, 0, 1], [0, 1, -1]],
            mu: [
                SetMu {
                    index: [[1, -1], [0, 1]],
                    t: [0, -1],
                },
                SetMu {
                    index: [[1, 0], [-1, 1]],
                    t: [-1, 0],
                },
                SetMu {
                    index: [[0, 1], [1, 0]],
                    t: [0, 0],
                },
            ],
        }
    }

    /// Whether the set's movement factors ρ through its placement:
    /// `(x_r, y_r) ≡ μ_r + t_r·μ_t` for its index generators and
    /// `(x_c, y_c) ≡ t_c·μ_t` for the other one.
    pub fn commutes(&self, set: usize, q: i64) -> bool {
        let mu = &self.mu[set];
        let ok = |r: usize, base: [i64; 2]| {
            let row = self.rows[r];
            (0..2).all(|d| md(row[d] - base[d] - row[2] * mu.t[d], q) == 0)
        };
        ok(INDEX_GENS[set][0], mu.index[0]) && ok(INDEX_GENS[set][1], mu.index[1]) && ok(OTHER_GEN[set], [0, 0])
    }

    /// The sign-flipped identity `μ_r − (x_r, y_r) ≡ t_r·μ_t` on the index
    /// generators only.
    pub fn commutes_sign_flipped(&self, set: usize, q: i64) -> bool {
        let mu = &self.mu[set];
        (0..2).all(|p| {
            let row = self.rows[INDEX_GENS[set][p]];
            (0..2).all(|d| md(mu.index[p][d] - row[d] - row[2] * mu.t[d], q) == 0)
        })
    }

    /// ρ has image of order q³.
    pub fn injective(&self, q: i64) -> bool {
        unit(det3(&self.rows), q)
    }

    /// The set's placement is a bijection onto the nodes at every step.
    pub fn embeds(&self, set: usize, q: i64) -> bool {
        let [a, b] = self.mu[set].index;
        unit(a[0] * b[1] - a[1] * b[0], q)
    }

    pub fn check(&self, q: i64) -> Result<()> {
        if !self.injective(q) {
            return Err(Error::ConditionViolated(
                "the (x, y, t) matrix is not invertible mod q".into(),
            ));
        }
        for s in 0..3 {
            if !self.commutes(s, q) {
                return Err(Error::ConditionViolated(format!(
                    "commuting identity fails for {}: (x_r, y_r) ≢ μ_r + t_r·μ_t",
                    SET_NAMES[s]
                )));
            }
            if !self.embeds(s, q) {
                return Err(Error::ConditionViolated(format!(
                    "μ of {} does not span the torus",
                    SET_NAMES[s]
                )));
            }
        }
        Ok(())
    }

    /// Node and step of the block triple `(a_i, a_j, a_k)`.
    pub fn slot(&self, q: i64, a: [i64; 3]) -> ([i64; 2], i64) {
        let mut v = [self.anchor[0], self.anchor[1], self.anchor[2]];
        for r in 0..3 {
            for d in 0..3 {
                v[d] += a[r] * self.rows[r][d];
            }
        }
        ([md(v[0], q), md(v[1], q)], md(v[2], q))
    }

    /// Node of block `(b₁, b₂)` of a set at step `t`.
    pub fn loc(&self, q: i64, set: usize, b: [i64; 2], t: i64) -> [i64; 2] {
        let mu = &self.mu[set];
        let dt = t - self.anchor[2];
        let f = |d: usize| {
            md(
                self.anchor[d] + b[0] * mu.index[0][d] + b[1] * mu.index[1][d] + dt * mu.t[d],
                q,
            )
        };
        [f(0), f(1)]
    }
}

pub fn torus_schedule(q: usize, params: &TorusHomParams) -> Result<ScheduleBundle> {
    params.check(q as i64)?;
    Ok(build(MatmulInstance::cube(q), q, params, "torus", 3))
}

/// Bundle without checking the parameters; for experiments with invalid
/// tables.
pub fn torus_schedule_unchecked(q: usize, params: &TorusHomParams) -> ScheduleBundle {
    build(MatmulInstance::cube(q), q, params, "torus", 3)
}

pub fn cannon(q: usize) -> ScheduleBundle {
    build(MatmulInstance::cube(q), q, &TorusHomParams::cannon(), "cannon", 3)
}

/// Blocked Cannon: q×q processors, each running one `q_l × q_m × q_n` block
/// per step.
pub fn cannon_blocked(l: usize, m: usize, n: usize, q: usize, memory_words: u64) -> Result<ScheduleBundle> {
    if q == 0 || l % q != 0 || m % q != 0 || n % q != 0 {
        return Err(Error::ParameterInfeasible(format!(
            "q = {q} must divide l = {l}, m = {m}, n = {n}"
        )));
    }
    let (ql, qm, qn) = (l / q, m / q, n / q);
    let need = (ql * qm + qm * qn + qn * ql) as u64;
    if memory_words < need {
        return Err(Error::ParameterInfeasible(format!(
            "blocks need q_l q_m + q_m q_n + q_n q_l = {need} words per node, budget is {memory_words}"
        )));
    }
    if ql * qm * qn == 1 {
        return Ok(cannon(q));
    }
    Ok(build(
        MatmulInstance::new(l, m, n)?,
        q,
        &TorusHomParams::cannon(),
        "cannon-blocked",
        memory_words,
    ))
}

fn build(inst: MatmulInstance, q: usize, params: &TorusHomParams, name: &str, memory_words: u64) -> ScheduleBundle {
    let qi = q as i64;
    let (ql, qm, qn) = (inst.l / q, inst.m / q, inst.n / q);
    let inner = (ql * qm * qn) as u64;
    let time = if inner == 1 {
        TimeModel::new(vec![q as u64])
    } else {
        TimeModel::new(vec![q as u64, inner])
    };
    let machine = MachineConfig {
        spec: MachineSpec::Torus {
            dims: vec![q as u64, q as u64],
        },
        memory_words,
        link_weights: Default::default(),
    };
    let dims = [q as u64, q as u64];
    let node = |p: [i64; 2]| torus_index(&dims, &[p[0] as u64, p[1] as u64]);
    let mut b = ScheduleBundle::empty(name, inst, machine, time, 1, [1, 1, 1]);
    for x in 0..inst.instructions() {
        let (i, j, k) = inst.coords(x);
        let (p, t) = params.slot(qi, [(i / ql) as i64, (j / qm) as i64, (k / qn) as i64]);
        let mut tv = vec![t as u64];
        if inner > 1 {
            tv.push((((i % ql) * qm + j % qm) * qn + k % qn) as u64);
        }
        b.schedule[x] = Some(super::Slot {
            node: node(p),
            time: tv,
        });
    }
    let block = [(ql, qm), (qm, qn), (qn, ql)];
    for s in 0..3 {
        let (rows, cols) = inst.shape(s);
        let (br, bc) = block[s];
        b.place_all(s, |step, var, _| {
            let (r, c) = (var / cols, var % cols);
            debug_assert!(r < rows);
            Some(node(params.loc(qi, s, [(r / br) as i64, (c / bc) as i64], step as i64)))
        });
    }
    b.homs = Some(torus_homs(q, params));
    b
}

fn modq(v: &[i64], q: i64) -> GroupElement {
    GroupElement::Mod(v.iter().map(|&x| md(x, q)).collect())
}

/// ρ on the block shifts, with each set's factorization through its
/// placement.
pub fn torus_homs(q: usize, params: &TorusHomParams) -> BundleHoms {
    let qi = q as i64;
    let shift = FiniteGroup::shift(q);
    let src = FiniteGroup::product(vec![shift.clone(), shift.clone(), shift.clone()]);
    let net = FiniteGroup::torus(&[q as u64, q as u64]);
    let delta = FiniteGroup::cyclic(q as u64);
    let target = FiniteGroup::product(vec![net.clone(), delta.clone()]);
    let images = params
        .rows
        .iter()
        .map(|r| GroupElement::Product(vec![modq(&r[..2], qi), modq(&r[2..], qi)]))
        .collect();
    let rho = preset_hom(&src, &target, images);
    let sigma = shift.generators()[0].clone();
    let e = shift.identity();
    let local = FiniteGroup::product(vec![shift.clone(), shift.clone(), delta.clone()]);
    let sets = (0..3)
        .map(|s| {
            let images = (0..3)
                .map(|r| {
                    let pos = INDEX_GENS[s].iter().position(|&g| g == r);
                    let a = if pos == Some(0) { sigma.clone() } else { e.clone() };
                    let b = if pos == Some(1) { sigma.clone() } else { e.clone() };
                    GroupElement::Product(vec![a, b, modq(&[params.rows[r][2]], qi)])
                })
                .collect();
            let rho_l = preset_hom(&src, &local, images);
            let mu = &params.mu[s];
            let mu_images = vec![modq(&mu.index[0], qi), modq(&mu.index[1], qi), modq(&mu.t, qi)];
            SetHoms {
                set: s,
                rho_l,
                mu: preset_hom(&local, &net, mu_images),
            }
        })
        .collect();
    BundleHoms { rho, sets }
}
