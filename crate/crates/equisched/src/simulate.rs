//! Replays a schedule bundle on a machine, checks legality, and accounts
//! communication.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::{apply_hom, GroupElement};
use crate::machines::{add_traffic, total, MachineConfig, MachineModel, Traffic};
use crate::matmul::{PhaseKind, ScheduleBundle, FORMAT, SET_NAMES};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ViolationKind {
    MissingOperand,
    DoubleBooking,
    MemoryExceeded,
    NonProcessorCompute,
    UncoveredInstruction,
    DuplicateInstruction,
    InvalidSlot,
    InconsistentHom,
    IncompleteReduction,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub node: Option<usize>,
    pub time: Option<Vec<u64>>,
    pub detail: String,
}

impl Violation {
    fn new(kind: ViolationKind, node: Option<usize>, time: Option<Vec<u64>>, detail: String) -> Violation {
        Violation {
            kind,
            node,
            time,
            detail,
        }
    }
}

/// Traffic between placement step `from_step` and the next one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionCost {
    pub from_step: usize,
    /// Hop-units per set, keyed by set name.
    pub per_set: BTreeMap<String, u64>,
    pub traffic: Traffic,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostReport {
    pub format: u32,
    pub machine: MachineConfig,
    /// Main-phase hop-units per link class.
    pub traffic: Traffic,
    /// Main-phase hop-units per set and link class.
    pub set_traffic: BTreeMap<String, Traffic>,
    pub transitions: Vec<TransitionCost>,
    /// Prologue and epilogue hop-units per link class.
    pub phase_traffic: Traffic,
    /// Link-weighted total over the main phase and the phases.
    pub weighted_total: u64,
    pub peak_memory: Vec<u64>,
    /// Main-phase hop-units sent from each node.
    pub node_sent: Vec<u64>,
    pub max_node_sent: u64,
    pub makespan: u64,
    pub coverage: u64,
    /// Words whose copies the epilogue merges into one.
    pub reduced_words: u64,
    pub violations: Vec<Violation>,
}

impl CostReport {
    pub fn total_traffic(&self) -> u64 {
        total(&self.traffic)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<CostReport> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Per-class cost of moving every word from its node in `before` to its node
/// in `after`. Words absent on either side are not moved.
pub fn traffic_delta(before: &[Option<usize>], after: &[Option<usize>], machine: &MachineModel) -> Result<Traffic> {
    if before.len() != after.len() {
        return Err(Error::StructureMismatch("placements of different sets".into()));
    }
    let mut t = machine.zero_traffic();
    for (a, b) in before.iter().zip(after) {
        if let (Some(a), Some(b)) = (a, b) {
            add_traffic(&mut t, &machine.move_cost(*a, *b)?);
        }
    }
    Ok(t)
}

fn slot_valid(bundle: &ScheduleBundle, machine: &MachineModel, node: usize, time: &[u64]) -> bool {
    node < machine.node_count()
        && time.len() == bundle.time.levels()
        && time.iter().zip(&bundle.time.steps).all(|(t, s)| t < s)
}

/// Pointwise operand condition `loc(inp(x)) = node(f(x))` for every
/// instruction and set.
fn operand_violations(bundle: &ScheduleBundle) -> Vec<Violation> {
    let mut out = Vec::new();
    let inst = bundle.instance;
    let steps = bundle.placement_steps();
    for (x, slot) in bundle.schedule.iter().enumerate().take(inst.instructions()) {
        let Some(slot) = slot else { continue };
        if slot.time.len() != bundle.time.levels() || slot.time.iter().zip(&bundle.time.steps).any(|(t, s)| t >= s) {
            continue;
        }
        let step = bundle.step_of(&slot.time);
        if step >= steps {
            continue;
        }
        for (s, sp) in bundle.sets.iter().enumerate() {
            let var = inst.operand(s, x);
            let copy = sp.inp[x];
            let at = if copy < sp.copies { sp.at(step, var, copy) } else { None };
            if at != Some(slot.node) {
                let (i, j, k) = inst.coords(x);
                let (r, c) = inst.operand_rc(s, x);
                out.push(Violation::new(
                    ViolationKind::MissingOperand,
                    Some(slot.node),
                    Some(slot.time.clone()),
                    format!(
                        "X({i},{j},{k}) needs {}({r},{c}) copy {copy} but it is at {}",
                        SET_NAMES[s],
                        at.map_or("no node".to_string(), |n| format!("node {n}"))
                    ),
                ));
            }
        }
    }
    out
}

/// Algebraic check `ρ(s) = (μ(ρ_l(s)), Δ-part of ρ_l(s))` on every generator.
fn hom_violations(bundle: &ScheduleBundle) -> Vec<Violation> {
    let Some(h) = &bundle.homs else { return Vec::new() };
    let mut out = Vec::new();
    for sh in &h.sets {
        for (gi, g) in h.rho.source.generators().iter().enumerate() {
            let r = apply_hom(&h.rho, g);
            let l = apply_hom(&sh.rho_l, g);
            let ok = match (r, l) {
                (Ok(r), Ok(l)) => {
                    let delta = l.components().and_then(|c| c.last().cloned());
                    match (apply_hom(&sh.mu, &l), delta) {
                        (Ok(n), Some(d)) => r == GroupElement::Product(vec![n, d]),
                        _ => false,
                    }
                }
                _ => false,
            };
            if !ok {
                out.push(Violation::new(
                    ViolationKind::InconsistentHom,
                    None,
                    None,
                    format!("ρ ≠ (μ × Id) ∘ ρ_l for set {} at generator {gi}", SET_NAMES[sh.set]),
                ));
            }
        }
    }
    out
}

/// Both forms of the consistency condition: the homomorphism factorization
/// and the pointwise operand placement.
pub fn check_consistency(bundle: &ScheduleBundle) -> Vec<Violation> {
    let mut v = hom_violations(bundle);
    v.extend(operand_violations(bundle));
    v
}

pub fn verify(bundle: &ScheduleBundle, machine: &MachineModel) -> Result<CostReport> {
    if bundle.machine.spec != machine.spec {
        return Err(Error::MachineMismatch(format!(
            "bundle is for {:?}, machine is {:?}",
            bundle.machine.spec, machine.spec
        )));
    }
    let inst = bundle.instance;
    let steps = bundle.placement_steps();
    for sp in &bundle.sets {
        if sp.placement.len() != steps || sp.placement.iter().any(|p| p.len() != sp.vars * sp.copies) {
            return Err(Error::Parse(format!(
                "placement table of set {} has the wrong shape",
                sp.name
            )));
        }
        if sp.inp.len() != inst.instructions() {
            return Err(Error::Parse(format!(
                "copy table of set {} has the wrong length",
                sp.name
            )));
        }
        if sp
            .placement
            .iter()
            .flatten()
            .flatten()
            .any(|&n| n >= machine.node_count())
        {
            return Err(Error::MachineMismatch(format!(
                "set {} names a node outside the machine",
                sp.name
            )));
        }
    }
    let mut violations = Vec::new();

    // coverage and booking
    let mut coverage = 0u64;
    let mut makespan = 0u64;
    let mut booked: HashMap<(usize, u64), usize> = HashMap::new();
    for x in 0..inst.instructions().max(bundle.schedule.len()) {
        let (i, j, k) = inst.coords(x);
        match bundle.schedule.get(x) {
            Some(Some(slot)) if x >= inst.instructions() => violations.push(Violation::new(
                ViolationKind::DuplicateInstruction,
                Some(slot.node),
                Some(slot.time.clone()),
                format!("extra schedule entry {x}"),
            )),
            Some(Some(slot)) => {
                if !slot_valid(bundle, machine, slot.node, &slot.time) {
                    violations.push(Violation::new(
                        ViolationKind::InvalidSlot,
                        Some(slot.node),
                        Some(slot.time.clone()),
                        format!("X({i},{j},{k}) has no valid node and time"),
                    ));
                    continue;
                }
                coverage += 1;
                let clock = bundle.time.clock(&slot.time);
                makespan = makespan.max(clock + 1);
                if !machine.is_processor[slot.node] {
                    violations.push(Violation::new(
                        ViolationKind::NonProcessorCompute,
                        Some(slot.node),
                        Some(slot.time.clone()),
                        format!("X({i},{j},{k}) runs on {}", machine.nodes[slot.node]),
                    ));
                }
                if let Some(other) = booked.insert((slot.node, clock), x) {
                    let (a, b, c) = inst.coords(other);
                    violations.push(Violation::new(
                        ViolationKind::DoubleBooking,
                        Some(slot.node),
                        Some(slot.time.clone()),
                        format!("X({i},{j},{k}) and X({a},{b},{c}) share cycle {clock}"),
                    ));
                }
            }
            _ => violations.push(Violation::new(
                ViolationKind::UncoveredInstruction,
                None,
                None,
                format!("X({i},{j},{k}) is not scheduled"),
            )),
        }
    }

    violations.extend(operand_violations(bundle));
    violations.extend(hom_violations(bundle));

    // memory
    let mut peak = vec![0u64; machine.node_count()];
    for step in 0..steps {
        let mut used = vec![0u64; machine.node_count()];
        for sp in &bundle.sets {
            for n in sp.placement[step].iter().flatten() {
                used[*n] += 1;
            }
        }
        for (n, &u) in used.iter().enumerate() {
            peak[n] = peak[n].max(u);
            if u > machine.memory_words {
                violations.push(Violation::new(
                    ViolationKind::MemoryExceeded,
                    Some(n),
                    Some(
                        bundle
                            .time
                            .vector(step as u64 * bundle.time.len() / steps.max(1) as u64),
                    ),
                    format!("{} words resident, budget {}", u, machine.memory_words),
                ));
            }
        }
    }

    // main-phase traffic
    let mut traffic = machine.zero_traffic();
    let mut set_traffic: BTreeMap<String, Traffic> = bundle
        .sets
        .iter()
        .map(|s| (s.name.clone(), machine.zero_traffic()))
        .collect();
    let mut transitions = Vec::new();
    let mut node_sent = vec![0u64; machine.node_count()];
    for step in 0..steps.saturating_sub(1) {
        let mut tc = TransitionCost {
            from_step: step,
            per_set: BTreeMap::new(),
            traffic: machine.zero_traffic(),
        };
        for sp in &bundle.sets {
            let before = &sp.placement[step];
            let after = &sp.placement[step + 1];
            let d = traffic_delta(before, after, machine)?;
            for (a, b) in before.iter().zip(after) {
                if let (Some(a), Some(b)) = (a, b) {
                    node_sent[*a] += total(&machine.move_cost(*a, *b)?);
                }
            }
            tc.per_set.insert(sp.name.clone(), total(&d));
            add_traffic(&mut tc.traffic, &d);
            add_traffic(set_traffic.get_mut(&sp.name).unwrap(), &d);
        }
        add_traffic(&mut traffic, &tc.traffic);
        transitions.push(tc);
    }

    // prologue and epilogue
    let mut phase_traffic = machine.zero_traffic();
    let mut reduced_words = 0u64;
    let phases = bundle
        .prologue
        .iter()
        .map(|p| (p, 0))
        .chain(bundle.epilogue.iter().map(|p| (p, steps.saturating_sub(1))));
    for (ph, step) in phases {
        for t in &ph.transfers {
            let Some(sp) = bundle.sets.get(t.set) else {
                return Err(Error::Parse(format!("phase {} names set {}", ph.label, t.set)));
            };
            if t.var >= sp.vars || t.from_copy >= sp.copies || t.to_copy >= sp.copies {
                return Err(Error::Parse(format!(
                    "phase {} names a missing copy of {}",
                    ph.label, sp.name
                )));
            }
            match (sp.at(step, t.var, t.from_copy), sp.at(step, t.var, t.to_copy)) {
                (Some(a), Some(b)) => add_traffic(&mut phase_traffic, &machine.move_cost(a, b)?),
                _ => violations.push(Violation::new(
                    ViolationKind::MissingOperand,
                    None,
                    None,
                    format!("{} word {} copy is not resident for phase {}", sp.name, t.var, ph.label),
                )),
            }
        }
    }
    for ph in &bundle.epilogue {
        if ph.kind != PhaseKind::Reduce {
            continue;
        }
        // every replicated word must have all copies merged into one root
        let mut edges: BTreeMap<(usize, usize), Vec<(usize, usize)>> = BTreeMap::new();
        for t in &ph.transfers {
            edges.entry((t.set, t.var)).or_default().push((t.from_copy, t.to_copy));
        }
        for (s, sp) in bundle.sets.iter().enumerate() {
            if sp.copies < 2 || !ph.transfers.iter().any(|t| t.set == s) {
                continue;
            }
            for var in 0..sp.vars {
                let es = edges.get(&(s, var)).cloned().unwrap_or_default();
                let mut merged: BTreeSet<usize> = BTreeSet::new();
                // every copy but one is sent exactly once, and the sends form a tree
                let senders: BTreeSet<usize> = es.iter().map(|e| e.0).collect();
                let roots: Vec<usize> = (0..sp.copies).filter(|c| !senders.contains(c)).collect();
                if senders.len() == es.len() && roots.len() == 1 {
                    merged.insert(roots[0]);
                    let mut grew = true;
                    while grew {
                        grew = false;
                        for &(a, b) in &es {
                            if merged.contains(&b) && merged.insert(a) {
                                grew = true;
                            }
                        }
                    }
                }
                if merged.len() == sp.copies {
                    reduced_words += 1;
                } else {
                    violations.push(Violation::new(
                        ViolationKind::IncompleteReduction,
                        None,
                        None,
                        format!("{} word {var} is not reduced to a single copy", sp.name),
                    ));
                }
            }
        }
    }

    violations.sort();
    let max_node_sent = node_sent.iter().copied().max().unwrap_or(0);
    let weighted_total = machine.weighted(&traffic) + machine.weighted(&phase_traffic);
    Ok(CostReport {
        format: FORMAT,
        machine: machine.config(),
        traffic,
        set_traffic,
        transitions,
        phase_traffic,
        weighted_total,
        peak_memory: peak,
        node_sent,
        max_node_sent,
        makespan,
        coverage,
        reduced_words,
        violations,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cmp {
    Less,
    Equal,
    Greater,
}

impl From<Ordering> for Cmp {
    fn from(o: Ordering) -> Cmp {
        match o {
            Ordering::Less => Cmp::Less,
            Ordering::Equal => Cmp::Equal,
            Ordering::Greater => Cmp::Greater,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostComparison {
    pub per_class: BTreeMap<String, Cmp>,
    pub per_set: BTreeMap<String, Cmp>,
    pub total: Cmp,
    pub weighted_total: Cmp,
    pub max_node_sent: Cmp,
    pub makespan: Cmp,
    /// Ranking key order: violation-free first, then weighted traffic, then
    /// makespan.
    pub rank: Cmp,
}

pub fn compare_cost(a: &CostReport, b: &CostReport) -> Result<CostComparison> {
    if a.machine.spec != b.machine.spec {
        return Err(Error::MachineMismatch("reports are for different machines".into()));
    }
    let keys: BTreeSet<&String> = a.traffic.keys().chain(b.traffic.keys()).collect();
    let per_class = keys
        .into_iter()
        .map(|k| {
            let (x, y) = (
                a.traffic.get(k).copied().unwrap_or(0),
                b.traffic.get(k).copied().unwrap_or(0),
            );
            (k.clone(), x.cmp(&y).into())
        })
        .collect();
    let sets: BTreeSet<&String> = a.set_traffic.keys().chain(b.set_traffic.keys()).collect();
    let per_set = sets
        .into_iter()
        .map(|k| {
            let x = a.set_traffic.get(k).map_or(0, total);
            let y = b.set_traffic.get(k).map_or(0, total);
            (k.clone(), x.cmp(&y).into())
        })
        .collect();
    Ok(CostComparison {
        per_class,
        per_set,
        total: a.total_traffic().cmp(&b.total_traffic()).into(),
        weighted_total: a.weighted_total.cmp(&b.weighted_total).into(),
        max_node_sent: a.max_node_sent.cmp(&b.max_node_sent).into(),
        makespan: a.makespan.cmp(&b.makespan).into(),
        rank: rank_key(a).cmp(&rank_key(b)).into(),
    })
}

pub fn rank_key(r: &CostReport) -> (bool, u64, u64) {
    (!r.violations.is_empty(), r.weighted_total, r.makespan)
}
