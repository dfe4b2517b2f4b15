//! Machine topologies: nodes, network groups, hop costs per link class,
//! memory budgets, and the time model.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::actions::{ActionSet, GroupAction};
use crate::error::{Error, Result};
use crate::groups::{FiniteGroup, GroupElement, Perm};

/// Per-class hop-units.
pub type Traffic = BTreeMap<String, u64>;

pub fn add_traffic(into: &mut Traffic, from: &Traffic) {
    for (k, v) in from {
        *into.entry(k.clone()).or_insert(0) += v;
    }
}

pub fn total(t: &Traffic) -> u64 {
    t.values().sum()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PmhLevel {
    /// Cache size M_i in words.
    pub memory: u64,
    /// Fan-out f_i.
    pub fanout: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MachineSpec {
    Torus { dims: Vec<u64> },
    FatTree { levels: usize },
    Pmh { levels: Vec<PmhLevel> },
    Hex { window: u64 },
}

/// Declarative machine description as read from a config file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MachineConfig {
    #[serde(flatten)]
    pub spec: MachineSpec,
    pub memory_words: u64,
    #[serde(default)]
    pub link_weights: BTreeMap<String, u64>,
}

impl MachineConfig {
    pub fn from_json(s: &str) -> Result<MachineConfig> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<MachineConfig> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::Io(e.to_string()))?;
        MachineConfig::from_json(&s)
    }

    pub fn build(&self) -> Result<MachineModel> {
        let mut m = match &self.spec {
            MachineSpec::Torus { dims } => torus(dims, self.memory_words),
            MachineSpec::FatTree { levels } => fat_tree(*levels, self.memory_words)?,
            MachineSpec::Pmh { levels } => pmh(levels)?,
            MachineSpec::Hex { window } => hex_array(*window, self.memory_words),
        };
        m.memory_words = self.memory_words;
        for (k, w) in &self.link_weights {
            if !m.link_classes.iter().any(|c| c == k) {
                return Err(Error::Parse(format!("unknown link class {k}")));
            }
            m.link_weights.insert(k.clone(), *w);
        }
        Ok(m)
    }
}

#[derive(Clone, Debug)]
pub struct MachineModel {
    pub spec: MachineSpec,
    pub nodes: Vec<String>,
    pub is_processor: Vec<bool>,
    pub memory_words: u64,
    pub link_classes: Vec<String>,
    pub link_weights: BTreeMap<String, u64>,
    /// Finite network group and its action on nodes; `None` for the hex
    /// window, whose group is infinite.
    pub network: Option<GroupAction>,
    // cached per-level digit radices for the PMH, or dims for the torus
    radices: Vec<u64>,
}

impl MachineModel {
    pub fn config(&self) -> MachineConfig {
        MachineConfig {
            spec: self.spec.clone(),
            memory_words: self.memory_words,
            link_weights: self.link_weights.clone(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn processors(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| self.is_processor[i]).collect()
    }

    pub fn weight(&self, class: &str) -> u64 {
        self.link_weights.get(class).copied().unwrap_or(1)
    }

    pub fn weighted(&self, t: &Traffic) -> u64 {
        t.iter().map(|(k, v)| v * self.weight(k)).sum()
    }

    pub fn zero_traffic(&self) -> Traffic {
        self.link_classes.iter().map(|c| (c.clone(), 0)).collect()
    }

    /// Hop-units per link class for moving one word between two nodes.
    pub fn move_cost(&self, from: usize, to: usize) -> Result<Traffic> {
        let mut t = self.zero_traffic();
        if from == to {
            return Ok(t);
        }
        match &self.spec {
            MachineSpec::Torus { dims } => {
                let (a, b) = (torus_coords(dims, from), torus_coords(dims, to));
                for d in 0..dims.len() {
                    let r = (b[d] + dims[d] - a[d]) % dims[d];
                    *t.get_mut(&self.link_classes[d]).unwrap() += r.min(dims[d] - r);
                }
            }
            MachineSpec::FatTree { .. } => {
                let h = usize::BITS - (from ^ to).leading_zeros();
                for level in 1..=h as usize {
                    *t.get_mut(&self.link_classes[level - 1]).unwrap() += 1;
                }
            }
            MachineSpec::Pmh { .. } => {
                let (a, b) = (self.digits(from), self.digits(to));
                let top = (0..a.len()).rev().find(|&l| a[l] != b[l]).expect("distinct nodes");
                *t.get_mut(&self.link_classes[top]).unwrap() += 1;
            }
            MachineSpec::Hex { window } => {
                let w = *window as i64;
                let (a, b) = (from as i64, to as i64);
                let d2 = b / w - a / w;
                let d3 = b % w - a % w;
                for (class, n) in hex_decompose(d2, d3) {
                    *t.get_mut(class).unwrap() += n;
                }
            }
        }
        Ok(t)
    }

    /// Level digits of a PMH node, innermost level first.
    pub fn digits(&self, node: usize) -> Vec<u64> {
        let mut x = node as u64;
        self.radices
            .iter()
            .map(|r| {
                let d = x % r;
                x /= r;
                d
            })
            .collect()
    }

    /// Cost of a network element: per-word for the torus and the hex
    /// array, summed over every node it moves for the tree networks.
    pub fn link_cost(&self, g: &GroupElement) -> Result<Traffic> {
        match &self.spec {
            MachineSpec::Torus { dims } => {
                let v = g.as_mod().ok_or_else(|| Error::StructureMismatch(format!("{g}")))?;
                if v.len() != dims.len() {
                    return Err(Error::StructureMismatch(format!("{g}")));
                }
                let c: Vec<u64> = v
                    .iter()
                    .zip(dims)
                    .map(|(&x, &q)| x.rem_euclid(q as i64) as u64)
                    .collect();
                self.move_cost(0, torus_index(dims, &c))
            }
            MachineSpec::Hex { .. } => {
                let v = g.as_mod().ok_or_else(|| Error::StructureMismatch(format!("{g}")))?;
                let mut t = self.zero_traffic();
                for (class, n) in hex_decompose(v[0], v[1]) {
                    *t.get_mut(class).unwrap() += n;
                }
                Ok(t)
            }
            _ => {
                let action = self.network.as_ref().expect("finite network");
                let p = action.perm_of(g)?;
                let mut t = self.zero_traffic();
                for x in 0..self.nodes.len() {
                    let c = self.move_cost(x, p.apply(x))?;
                    for (k, v) in c {
                        *t.get_mut(&k).unwrap() += v;
                    }
                }
                Ok(t)
            }
        }
    }

    /// Hex lattice coordinates `(a, b)` in the `(g₂, g₃)` basis.
    pub fn hex_coords(&self, node: usize) -> (i64, i64) {
        match &self.spec {
            MachineSpec::Hex { window } => ((node as u64 / window) as i64, (node as u64 % window) as i64),
            _ => panic!("not a hex array"),
        }
    }

    /// Translates a hex node by `(d₂, d₃)`; fails outside the window.
    pub fn hex_translate(&self, node: usize, d2: i64, d3: i64) -> Result<usize> {
        let MachineSpec::Hex { window } = &self.spec else {
            return Err(Error::StructureMismatch("not a hex array".into()));
        };
        let w = *window as i64;
        let (a, b) = self.hex_coords(node);
        let (a, b) = (a + d2, b + d3);
        if a < 0 || b < 0 || a >= w || b >= w {
            return Err(Error::WindowOverflow(format!("({a},{b}) outside a {w}×{w} window")));
        }
        Ok((a * w + b) as usize)
    }

    pub fn hex_node(&self, a: i64, b: i64) -> Result<usize> {
        self.hex_translate(0, a, b)
    }
}

pub fn torus_coords(dims: &[u64], mut idx: usize) -> Vec<u64> {
    let mut c = vec![0; dims.len()];
    for d in (0..dims.len()).rev() {
        c[d] = idx as u64 % dims[d];
        idx /= dims[d] as usize;
    }
    c
}

pub fn torus_index(dims: &[u64], coords: &[u64]) -> usize {
    coords.iter().zip(dims).fold(0u64, |acc, (&c, &d)| acc * d + c % d) as usize
}

pub fn torus(dims: &[u64], memory_words: u64) -> MachineModel {
    let n: u64 = dims.iter().product();
    let nodes: Vec<String> = (0..n as usize)
        .map(|i| {
            let c = torus_coords(dims, i);
            format!("({})", c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
        })
        .collect();
    let group = FiniteGroup::torus(dims);
    let dims_owned = dims.to_vec();
    let action = GroupAction::from_fn(group, ActionSet::new("nodes", nodes.clone()).unwrap(), move |g, x| {
        let v = g.as_mod().unwrap();
        let c: Vec<u64> = torus_coords(&dims_owned, x)
            .iter()
            .zip(v)
            .map(|(&c, &s)| c + s as u64)
            .collect();
        torus_index(&dims_owned, &c)
    })
    .expect("translations form an action");
    MachineModel {
        spec: MachineSpec::Torus { dims: dims.to_vec() },
        is_processor: vec![true; nodes.len()],
        nodes,
        memory_words,
        link_classes: (0..dims.len()).map(|d| format!("torus-dim-{d}")).collect(),
        link_weights: BTreeMap::new(),
        network: Some(action),
        radices: dims.to_vec(),
    }
}

/// Label of fat-tree leaf `l`: its bits, lowest level first.
pub fn leaf_label(l: usize, levels: usize) -> String {
    let bits: String = (0..levels).map(|b| if l >> b & 1 == 1 { '1' } else { '0' }).collect();
    format!("P{bits}")
}

pub fn fat_tree(levels: usize, memory_words: u64) -> Result<MachineModel> {
    if levels == 0 {
        return Err(Error::InvalidHierarchy("a fat tree needs at least one level".into()));
    }
    let n = 1usize << levels;
    let group = FiniteGroup::iterwr(2, levels);
    let nodes: Vec<String> = (0..n).map(|l| leaf_label(l, levels)).collect();
    let action = GroupAction::natural(group)?.relabel(ActionSet::new("leaves", nodes.clone())?)?;
    Ok(MachineModel {
        spec: MachineSpec::FatTree { levels },
        is_processor: vec![true; n],
        nodes,
        memory_words,
        link_classes: (1..=levels).map(|l| format!("tree-level-{l}")).collect(),
        link_weights: BTreeMap::new(),
        network: Some(action),
        radices: vec![2; levels],
    })
}

fn log2_exact(x: u64) -> Option<u32> {
    (x.is_power_of_two()).then(|| x.trailing_zeros())
}

/// Exponents `(d_i, c_i)` with `M_i = 3·2^{d_i}` and `f_i = 2^{c_i}`.
pub fn pmh_exponents(levels: &[PmhLevel]) -> Result<Vec<(u32, u32)>> {
    if levels.is_empty() {
        return Err(Error::InvalidHierarchy("no levels".into()));
    }
    let mut out = Vec::new();
    let mut prev = 0;
    for (i, l) in levels.iter().enumerate() {
        let d = (l.memory % 3 == 0)
            .then(|| log2_exact(l.memory / 3))
            .flatten()
            .ok_or_else(|| Error::InvalidHierarchy(format!("M_{} = {} is not 3·2^d", i + 1, l.memory)))?;
        let c = log2_exact(l.fanout)
            .ok_or_else(|| Error::InvalidHierarchy(format!("f_{} = {} is not a power of two", i + 1, l.fanout)))?;
        if i > 0 && d <= prev {
            return Err(Error::InvalidHierarchy(format!(
                "M_{} does not strictly contain M_{}",
                i + 1,
                i
            )));
        }
        if c > d - prev {
            return Err(Error::InvalidHierarchy(format!(
                "f_{} = {} exceeds the {} children of a level-{} cache",
                i + 1,
                l.fanout,
                1u64 << (d - prev),
                i + 1
            )));
        }
        out.push((d, c));
        prev = d;
    }
    Ok(out)
}

pub fn pmh(levels: &[PmhLevel]) -> Result<MachineModel> {
    let ex = pmh_exponents(levels)?;
    let radices: Vec<u64> = ex
        .iter()
        .scan(0, |prev, &(d, _)| {
            let r = 1u64 << (d - *prev);
            *prev = d;
            Some(r)
        })
        .collect();
    let n = 1usize << ex.last().unwrap().0;
    // N_1 = Sym(level-1 nodes), N_i = N_{i-1} ≀ S_{M_i/M_{i-1}}
    let mut group = FiniteGroup::symmetric(radices[0] as usize);
    for &r in &radices[1..] {
        group = FiniteGroup::wreath(group, r as usize, FiniteGroup::symmetric(r as usize))?;
    }
    let mut model = MachineModel {
        spec: MachineSpec::Pmh {
            levels: levels.to_vec(),
        },
        nodes: Vec::new(),
        is_processor: Vec::new(),
        memory_words: 3,
        link_classes: (1..=levels.len()).map(|l| format!("pmh-level-{l}")).collect(),
        link_weights: BTreeMap::new(),
        network: None,
        radices,
    };
    for x in 0..n {
        let dg = model.digits(x);
        model
            .is_processor
            .push(dg.iter().zip(levels).all(|(&b, l)| b < l.fanout));
        model.nodes.push(format!(
            "N{}",
            dg.iter().rev().map(|b| b.to_string()).collect::<Vec<_>>().join(".")
        ));
    }
    let perms: Vec<Perm> = group
        .generators()
        .iter()
        .map(|g| group.to_perm(g).expect("permutation group"))
        .collect();
    // wreath points are block-major, which matches the node numbering
    model.network = Some(GroupAction::new(
        group,
        ActionSet::new("nodes", model.nodes.clone())?,
        perms,
    )?);
    Ok(model)
}

pub const HEX_CLASSES: [&str; 6] = ["hex+g1", "hex-g1", "hex+g2", "hex-g2", "hex+g3", "hex-g3"];

/// Splits a lattice move `d₂·g₂ + d₃·g₃` into generator hops, using
/// `g₁ = g₂g₃` where both components share a sign.
pub fn hex_decompose(d2: i64, d3: i64) -> Vec<(&'static str, u64)> {
    let mut out = Vec::new();
    let (mut a, mut b) = (d2, d3);
    if a.signum() == b.signum() && a != 0 {
        let m = a.abs().min(b.abs());
        out.push((if a > 0 { "hex+g1" } else { "hex-g1" }, m as u64));
        a -= a.signum() * m;
        b -= b.signum() * m;
    }
    if a != 0 {
        out.push((if a > 0 { "hex+g2" } else { "hex-g2" }, a.unsigned_abs()));
    }
    if b != 0 {
        out.push((if b > 0 { "hex+g3" } else { "hex-g3" }, b.unsigned_abs()));
    }
    out
}

/// Group elements `g₁, g₂, g₃` of the hex network in `(g₂, g₃)` coordinates.
pub fn hex_generators() -> [GroupElement; 3] {
    [
        GroupElement::Mod(vec![1, 1]),
        GroupElement::Mod(vec![1, 0]),
        GroupElement::Mod(vec![0, 1]),
    ]
}

pub fn hex_array(window: u64, memory_words: u64) -> MachineModel {
    let w = window as usize;
    let nodes: Vec<String> = (0..w * w).map(|i| format!("({},{})", i / w, i % w)).collect();
    MachineModel {
        spec: MachineSpec::Hex { window },
        is_processor: vec![true; nodes.len()],
        nodes,
        memory_words,
        link_classes: HEX_CLASSES.iter().map(|s| s.to_string()).collect(),
        link_weights: BTreeMap::new(),
        network: None,
        radices: vec![window, window],
    }
}

/// Nested time steps, outermost level first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeModel {
    pub steps: Vec<u64>,
    pub stretch: Vec<u64>,
}

impl TimeModel {
    /// Default flattening: the mixed-radix rank of the time vector.
    pub fn new(steps: Vec<u64>) -> TimeModel {
        let mut stretch = vec![1; steps.len()];
        for l in (0..steps.len().saturating_sub(1)).rev() {
            stretch[l] = stretch[l + 1] * steps[l + 1];
        }
        TimeModel { steps, stretch }
    }

    pub fn with_stretch(steps: Vec<u64>, stretch: Vec<u64>) -> Result<TimeModel> {
        if steps.len() != stretch.len() || stretch.contains(&0) || steps.contains(&0) {
            return Err(Error::ParameterInfeasible(
                "stretch factors must be positive, one per level".into(),
            ));
        }
        Ok(TimeModel { steps, stretch })
    }

    pub fn levels(&self) -> usize {
        self.steps.len()
    }

    /// Number of distinct time vectors.
    pub fn len(&self) -> u64 {
        self.steps.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Δ as a product of cyclic groups.
    pub fn delta_group(&self) -> FiniteGroup {
        FiniteGroup::modular(self.steps.clone())
    }

    pub fn clock(&self, v: &[u64]) -> u64 {
        v.iter().zip(&self.stretch).map(|(a, b)| a * b).sum()
    }

    /// Lexicographic rank of `v` among the time vectors.
    pub fn rank(&self, v: &[u64]) -> u64 {
        v.iter().zip(&self.steps).fold(0, |acc, (&x, &s)| acc * s + x)
    }

    pub fn vector(&self, mut rank: u64) -> Vec<u64> {
        let mut v = vec![0; self.steps.len()];
        for l in (0..self.steps.len()).rev() {
            v[l] = rank % self.steps[l];
            rank /= self.steps[l];
        }
        v
    }

    /// Rank of the first `prefix` levels.
    pub fn prefix_rank(&self, v: &[u64], prefix: usize) -> u64 {
        v[..prefix].iter().zip(&self.steps).fold(0, |acc, (&x, &s)| acc * s + x)
    }

    pub fn prefix_len(&self, prefix: usize) -> u64 {
        self.steps[..prefix].iter().product()
    }
}

/// Clock map `v ↦ Σ stretch_l · v_l`.
pub fn flatten_time(tm: &TimeModel, stretch: &[u64]) -> Result<impl Fn(&[u64]) -> u64> {
    let t = TimeModel::with_stretch(tm.steps.clone(), stretch.to_vec())?;
    Ok(move |v: &[u64]| t.clock(v))
}

/// Time increment of one step at level `l`, as a group element of Δ.
pub fn delta(tm: &TimeModel, level: usize) -> GroupElement {
    let mut v = vec![0; tm.levels()];
    v[level] = 1;
    GroupElement::Mod(v)
}
