//! Exhaustive search over generator images: each homomorphism ρ fixes a
//! schedule from the anchor `(node 0, step 0)`, placements follow the
//! schedule, and the verified candidates are ranked.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::{apply_hom, make_hom, FiniteGroup, GroupElement};
use crate::machines::{MachineConfig, MachineModel, MachineSpec, TimeModel, Traffic};
use crate::matmul::cyclic::{enumerate_homs_to_cyclic, is_prime};
use crate::matmul::{MatmulInstance, ScheduleBundle, Slot, FORMAT};
use crate::simulate::{rank_key, verify};

pub const DEFAULT_SEARCH_LIMIT: usize = 50_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Shift(q)³ on the q × q torus over q steps.
    Torus,
    /// (S₂)³ on the two-level fat tree over 2 steps.
    FatTree,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    /// Dense rank: 1 for the cheapest legal schedules.
    pub rank: usize,
    /// ρ of the generators of i, j, k.
    pub images: Vec<GroupElement>,
    pub violations: usize,
    pub traffic: Traffic,
    pub total: u64,
    pub weighted_total: u64,
    pub makespan: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchResult {
    pub format: u32,
    pub family: Family,
    pub q: usize,
    /// Generator image tuples tried.
    pub tuples: usize,
    pub homomorphisms: usize,
    /// Homomorphisms whose schedule is injective.
    pub injective: usize,
    /// Set when the limit stopped the search early.
    pub truncated: bool,
    pub ranked: Vec<Candidate>,
}

struct Setup {
    inst: MatmulInstance,
    machine: MachineConfig,
    model: MachineModel,
    src: FiniteGroup,
    target: FiniteGroup,
    time: TimeModel,
    /// Images each generator may take.
    options: Vec<Vec<GroupElement>>,
}

fn time_images(src_factor: &FiniteGroup, q: u64) -> Result<Vec<GroupElement>> {
    let mut out = vec![GroupElement::Mod(vec![0])];
    if is_prime(q) {
        for rho in enumerate_homs_to_cyclic(src_factor, q, q)? {
            out.push(apply_hom(&rho, &src_factor.generators()[0])?);
        }
    } else {
        out.extend((1..q as i64).map(|a| GroupElement::Mod(vec![a])));
    }
    Ok(out)
}

fn setup(family: Family, q: usize) -> Result<Setup> {
    let (inst, spec, factor) = match family {
        Family::Torus => {
            if q < 2 {
                return Err(Error::ParameterInfeasible("q must be at least 2".into()));
            }
            (
                MatmulInstance::cube(q),
                MachineSpec::Torus {
                    dims: vec![q as u64, q as u64],
                },
                FiniteGroup::shift(q),
            )
        }
        Family::FatTree => {
            if q != 2 {
                return Err(Error::ParameterInfeasible(
                    "the fat-tree search is the 2 × 2 × 2 base case".into(),
                ));
            }
            (
                MatmulInstance::cube(2),
                MachineSpec::FatTree { levels: 2 },
                FiniteGroup::symmetric(2),
            )
        }
    };
    let machine = MachineConfig {
        spec,
        memory_words: 3,
        link_weights: Default::default(),
    };
    let model = machine.build()?;
    let net = model.network.as_ref().expect("finite network").group.clone();
    let delta = FiniteGroup::cyclic(q as u64);
    let target = FiniteGroup::product(vec![net.clone(), delta]);
    let src = FiniteGroup::product(vec![factor.clone(); 3]);
    let times = time_images(&factor, q as u64)?;
    let mut opts = Vec::new();
    for n in net.sorted_elements()? {
        for t in &times {
            opts.push(GroupElement::Product(vec![n.clone(), t.clone()]));
        }
    }
    Ok(Setup {
        inst,
        machine,
        model,
        src,
        target,
        time: TimeModel::new(vec![q as u64]),
        options: vec![opts; 3],
    })
}

/// Bundle of the schedule `f(g·X₀₀₀) = ρ(g)·(node 0, step 0)` with one copy
/// of every word: a word sits where it is used, and between uses where it
/// was last used (before its first use, at its first use).
fn bundle_from(s: &Setup, images: &[GroupElement]) -> Result<Option<ScheduleBundle>> {
    let rho = make_hom(&s.src, &s.target, images.to_vec())?;
    let action = s.model.network.as_ref().expect("finite network");
    let steps = s.time.len() as usize;
    let mut b = ScheduleBundle::empty("search", s.inst, s.machine.clone(), s.time.clone(), 1, [1, 1, 1]);
    let mut seen = std::collections::HashSet::new();
    for x in 0..s.inst.instructions() {
        let (i, j, k) = s.inst.coords(x);
        let g = s.src.evaluate(&[(0, i as i64), (1, j as i64), (2, k as i64)]);
        let r = apply_hom(&rho, &g)?;
        let parts = r.components().expect("product element");
        let node = action.act(&parts[0], 0)?;
        let t = parts[1].as_mod().expect("time element")[0] as u64;
        if !seen.insert((node, t)) {
            return Ok(None);
        }
        b.schedule[x] = Some(Slot { node, time: vec![t] });
    }
    for set in 0..3 {
        let vars = s.inst.set_size(set);
        let mut used: Vec<Vec<Option<usize>>> = vec![vec![None; steps]; vars];
        for (x, slot) in b.schedule.iter().enumerate() {
            let slot = slot.as_ref().expect("scheduled");
            let cell = &mut used[s.inst.operand(set, x)][slot.time[0] as usize];
            cell.get_or_insert(slot.node);
        }
        for (var, u) in used.iter().enumerate() {
            let first = u.iter().flatten().next().copied();
            let mut last = first;
            for (t, n) in u.iter().enumerate() {
                if n.is_some() {
                    last = *n;
                }
                b.sets[set].placement[t][var] = last;
            }
        }
    }
    b.homs = None;
    Ok(Some(b))
}

/// The schedule bundle a search candidate stands for, or `None` when its
/// schedule is not injective.
pub fn candidate_bundle(family: Family, q: usize, images: &[GroupElement]) -> Result<Option<ScheduleBundle>> {
    bundle_from(&setup(family, q)?, images)
}

/// Sweeps every image tuple, verifies the injective schedules, and ranks
/// them by (violations, weighted traffic, makespan). `limit` bounds the
/// number of verified candidates.
pub fn search(family: Family, q: usize, limit: usize) -> Result<SearchResult> {
    if limit == 0 {
        return Err(Error::CapExceeded { cap: 0 });
    }
    let s = setup(family, q)?;
    let sizes: Vec<usize> = s.options.iter().map(|o| o.len()).collect();
    let total: usize = sizes.iter().product();
    let mut out = SearchResult {
        format: FORMAT,
        family,
        q,
        tuples: 0,
        homomorphisms: 0,
        injective: 0,
        truncated: false,
        ranked: Vec::new(),
    };
    let mut keyed = Vec::new();
    for code in 0..total {
        let mut c = code;
        let images: Vec<GroupElement> = (0..3)
            .map(|g| {
                let e = s.options[g][c % sizes[g]].clone();
                c /= sizes[g];
                e
            })
            .collect();
        out.tuples += 1;
        let b = match bundle_from(&s, &images) {
            Ok(Some(b)) => b,
            Ok(None) => {
                out.homomorphisms += 1;
                continue;
            }
            Err(Error::NotAHomomorphism { .. }) => continue,
            Err(e) => return Err(e),
        };
        out.homomorphisms += 1;
        if out.injective == limit {
            out.truncated = true;
            break;
        }
        out.injective += 1;
        let r = verify(&b, &s.model)?;
        keyed.push((
            rank_key(&r),
            Candidate {
                rank: 0,
                images,
                violations: r.violations.len(),
                total: r.total_traffic(),
                traffic: r.traffic,
                weighted_total: r.weighted_total,
                makespan: r.makespan,
            },
        ));
    }
    keyed.sort_by(|a, b| (a.0, &a.1.images).cmp(&(b.0, &b.1.images)));
    let mut rank = 0;
    let mut prev = None;
    for (key, mut c) in keyed {
        if prev != Some(key) {
            rank += 1;
            prev = Some(key);
        }
        c.rank = rank;
        out.ranked.push(c);
    }
    Ok(out)
}
