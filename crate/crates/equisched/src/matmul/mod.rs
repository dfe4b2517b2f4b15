//! The matrix multiplication instance, schedule bundles, and preset
//! schedules for each topology.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::{make_hom, FiniteGroup, GroupElement, Homomorphism};
use crate::machines::{MachineConfig, TimeModel};

pub mod cyclic;
pub mod fattree;
pub mod hex;
pub mod pmh;
pub mod torus;
pub mod twofive;

pub use cyclic::enumerate_homs_to_cyclic;

pub const FORMAT: u32 = 1;
pub const SET_NAMES: [&str; 3] = ["A", "B", "C"];

/// Instructions `(i, j, k)` reading `A_ij`, `B_jk` and updating `C_ki`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatmulInstance {
    pub l: usize,
    pub m: usize,
    pub n: usize,
}

impl MatmulInstance {
    pub fn new(l: usize, m: usize, n: usize) -> Result<MatmulInstance> {
        if l == 0 || m == 0 || n == 0 {
            return Err(Error::ParameterInfeasible("extents must be positive".into()));
        }
        Ok(MatmulInstance { l, m, n })
    }

    pub fn cube(n: usize) -> MatmulInstance {
        MatmulInstance { l: n, m: n, n }
    }

    pub fn instructions(&self) -> usize {
        self.l * self.m * self.n
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.m + j) * self.n + k
    }

    pub fn coords(&self, x: usize) -> (usize, usize, usize) {
        (x / (self.m * self.n), (x / self.n) % self.m, x % self.n)
    }

    /// `(rows, cols)` of set 0, 1, 2 = A, B, C.
    pub fn shape(&self, set: usize) -> (usize, usize) {
        [(self.l, self.m), (self.m, self.n), (self.n, self.l)][set]
    }

    pub fn set_size(&self, set: usize) -> usize {
        let (r, c) = self.shape(set);
        r * c
    }

    /// Row and column of the operand of `x` in `set`.
    pub fn operand_rc(&self, set: usize, x: usize) -> (usize, usize) {
        let (i, j, k) = self.coords(x);
        [(i, j), (j, k), (k, i)][set]
    }

    pub fn operand(&self, set: usize, x: usize) -> usize {
        let (r, c) = self.operand_rc(set, x);
        r * self.shape(set).1 + c
    }

    /// S_l × S_m × S_n, as a descriptor.
    pub fn symmetry_group(&self) -> FiniteGroup {
        FiniteGroup::product(vec![
            FiniteGroup::symmetric(self.l),
            FiniteGroup::symmetric(self.m),
            FiniteGroup::symmetric(self.n),
        ])
    }
}

pub fn instance(l: usize, m: usize, n: usize) -> Result<MatmulInstance> {
    MatmulInstance::new(l, m, n)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    pub node: usize,
    pub time: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetPlacement {
    pub name: String,
    pub vars: usize,
    pub copies: usize,
    /// `placement[step][var * copies + copy]` is the node holding that copy
    /// during a placement step, if it is resident.
    pub placement: Vec<Vec<Option<usize>>>,
    /// Copy of the operand used by each instruction.
    pub inp: Vec<usize>,
}

impl SetPlacement {
    pub fn new(name: &str, vars: usize, copies: usize, steps: usize, instructions: usize) -> SetPlacement {
        SetPlacement {
            name: name.to_string(),
            vars,
            copies,
            placement: vec![vec![None; vars * copies]; steps],
            inp: vec![0; instructions],
        }
    }

    pub fn at(&self, step: usize, var: usize, copy: usize) -> Option<usize> {
        self.placement[step][var * self.copies + copy]
    }

    pub fn set(&mut self, step: usize, var: usize, copy: usize, node: usize) {
        self.placement[step][var * self.copies + copy] = Some(node);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseKind {
    Broadcast,
    Reduce,
}

/// A word sent from one copy to another outside the main phase. Prologue
/// transfers are priced between the copies' nodes at the first placement
/// step, epilogue transfers at the last.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transfer {
    pub set: usize,
    pub var: usize,
    pub from_copy: usize,
    pub to_copy: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Phase {
    pub label: String,
    pub kind: PhaseKind,
    pub transfers: Vec<Transfer>,
}

/// `ρ_l : G → G_I × Δ` and `μ : G_I × Δ → N` for one variable set.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SetHoms {
    pub set: usize,
    pub rho_l: Homomorphism,
    pub mu: Homomorphism,
}

/// `ρ : G → N × Δ` with the per-set factorizations `ρ = (μ × Id) ∘ ρ_l`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BundleHoms {
    pub rho: Homomorphism,
    pub sets: Vec<SetHoms>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScheduleBundle {
    pub format: u32,
    pub name: String,
    pub instance: MatmulInstance,
    pub machine: MachineConfig,
    pub time: TimeModel,
    /// Placements are given per value of the first `placement_levels` time
    /// levels; data does not move inside such a step.
    pub placement_levels: usize,
    pub schedule: Vec<Option<Slot>>,
    pub sets: Vec<SetPlacement>,
    #[serde(default)]
    pub prologue: Vec<Phase>,
    #[serde(default)]
    pub epilogue: Vec<Phase>,
    #[serde(default)]
    pub homs: Option<BundleHoms>,
}

impl ScheduleBundle {
    /// Empty bundle with every set unreplicated and nothing placed.
    pub fn empty(
        name: &str,
        instance: MatmulInstance,
        machine: MachineConfig,
        time: TimeModel,
        placement_levels: usize,
        copies: [usize; 3],
    ) -> ScheduleBundle {
        let steps = time.prefix_len(placement_levels) as usize;
        let sets = (0..3)
            .map(|s| {
                SetPlacement::new(
                    SET_NAMES[s],
                    instance.set_size(s),
                    copies[s],
                    steps,
                    instance.instructions(),
                )
            })
            .collect();
        ScheduleBundle {
            format: FORMAT,
            name: name.to_string(),
            instance,
            machine,
            time,
            placement_levels,
            schedule: vec![None; instance.instructions()],
            sets,
            prologue: Vec::new(),
            epilogue: Vec::new(),
            homs: None,
        }
    }

    pub fn placement_steps(&self) -> usize {
        self.time.prefix_len(self.placement_levels) as usize
    }

    pub fn step_of(&self, time: &[u64]) -> usize {
        self.time.prefix_rank(time, self.placement_levels) as usize
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<ScheduleBundle> {
        let b: ScheduleBundle = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        if b.format != FORMAT {
            return Err(Error::Parse(format!("unsupported format {}", b.format)));
        }
        Ok(b)
    }

    /// Node and time of instruction `(i, j, k)`.
    pub fn slot(&self, i: usize, j: usize, k: usize) -> Option<&Slot> {
        self.schedule[self.instance.index(i, j, k)].as_ref()
    }

    /// Order in which instructions run, by flattened clock then node.
    pub fn execution_order(&self) -> Vec<usize> {
        let mut v: Vec<(u64, usize, usize)> = self
            .schedule
            .iter()
            .enumerate()
            .filter_map(|(x, s)| s.as_ref().map(|s| (self.time.clock(&s.time), s.node, x)))
            .collect();
        v.sort();
        v.into_iter().map(|(_, _, x)| x).collect()
    }

    /// Fills in all placements of a set from a rule `(step, var, copy) → node`.
    pub fn place_all(&mut self, set: usize, rule: impl Fn(usize, usize, usize) -> Option<usize>) {
        let sp = &mut self.sets[set];
        for step in 0..sp.placement.len() {
            for var in 0..sp.vars {
                for copy in 0..sp.copies {
                    sp.placement[step][var * sp.copies + copy] = rule(step, var, copy);
                }
            }
        }
    }
}

/// Builds a homomorphism from images, panicking if the preset table is not
/// one; presets are fixed data.
pub(crate) fn preset_hom(source: &FiniteGroup, target: &FiniteGroup, images: Vec<GroupElement>) -> Homomorphism {
    make_hom(source, target, images).expect("preset table is a homomorphism")
}
