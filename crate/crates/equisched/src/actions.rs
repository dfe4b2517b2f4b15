//! Group actions on finite indexed sets.

use std::collections::HashSet;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::{make_hom, FiniteGroup, GroupElement, Perm};

/// A finite set of labelled points. Points are addressed by index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionSet {
    pub label: String,
    pub points: Vec<String>,
}

impl ActionSet {
    pub fn new(label: impl Into<String>, points: Vec<String>) -> Result<ActionSet> {
        let mut seen = HashSet::new();
        for p in &points {
            if !seen.insert(p) {
                return Err(Error::StructureMismatch(format!("duplicate point {p}")));
            }
        }
        Ok(ActionSet {
            label: label.into(),
            points,
        })
    }

    /// Points `0..n` labelled by their index.
    pub fn range(label: impl Into<String>, n: usize) -> ActionSet {
        ActionSet {
            label: label.into(),
            points: (0..n).map(|i| i.to_string()).collect(),
        }
    }

    /// Cartesian product, row-major (last factor fastest).
    pub fn product(label: impl Into<String>, factors: &[&ActionSet]) -> ActionSet {
        let mut points = vec![Vec::<&str>::new()];
        for f in factors {
            points = points
                .into_iter()
                .flat_map(|p| {
                    f.points.iter().map(move |x| {
                        let mut q = p.clone();
                        q.push(x.as_str());
                        q
                    })
                })
                .collect();
        }
        ActionSet {
            label: label.into(),
            points: points.into_iter().map(|p| format!("({})", p.join(","))).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.points.iter().position(|p| p == label)
    }
}

/// A left action given by one permutation of the point indices per
/// generator, extended to all elements by words.
#[derive(Clone, Serialize, Deserialize)]
pub struct GroupAction {
    pub group: FiniteGroup,
    pub set: ActionSet,
    generator_perms: Vec<Perm>,
    #[serde(skip)]
    cache: OnceLock<Arc<Vec<Perm>>>,
}

impl std::fmt::Debug for GroupAction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GroupAction")
            .field("group", &self.group)
            .field("set", &self.set.label)
            .field("generator_perms", &self.generator_perms)
            .finish()
    }
}

impl GroupAction {
    /// Build from generator permutations. The assignment must extend to a
    /// homomorphism into Sym(set).
    pub fn new(group: FiniteGroup, set: ActionSet, generator_perms: Vec<Perm>) -> Result<GroupAction> {
        let n = set.len();
        if generator_perms.len() != group.generators().len() {
            return Err(Error::StructureMismatch(format!(
                "{} permutations for {} generators",
                generator_perms.len(),
                group.generators().len()
            )));
        }
        if let Some(p) = generator_perms.iter().find(|p| p.degree() != n) {
            return Err(Error::StructureMismatch(format!(
                "permutation of degree {} on {n} points",
                p.degree()
            )));
        }
        let images = generator_perms.iter().cloned().map(GroupElement::Perm).collect();
        make_hom(&group, &FiniteGroup::symmetric(n), images)?;
        Ok(GroupAction {
            group,
            set,
            generator_perms,
            cache: OnceLock::new(),
        })
    }

    /// Build from a rule applied to the generators only.
    pub fn from_fn(
        group: FiniteGroup,
        set: ActionSet,
        rule: impl Fn(&GroupElement, usize) -> usize,
    ) -> Result<GroupAction> {
        let n = set.len();
        let perms = group
            .generators()
            .iter()
            .map(|g| Perm::new((0..n).map(|x| rule(g, x)).collect()))
            .collect::<Result<Vec<_>>>()?;
        GroupAction::new(group, set, perms)
    }

    /// The natural action of a permutation (or wreath) group on its points.
    pub fn natural(group: FiniteGroup) -> Result<GroupAction> {
        let n = group
            .degree()
            .ok_or_else(|| Error::StructureMismatch("group has no natural action".into()))?;
        // the group's own action on its points is a homomorphism already
        let generator_perms = group
            .generators()
            .iter()
            .map(|s| Perm::new((0..n).map(|x| group.act(s, x).expect("natural action")).collect()))
            .collect::<Result<Vec<_>>>()?;
        Ok(GroupAction {
            group,
            set: ActionSet::range("points", n),
            generator_perms,
            cache: OnceLock::new(),
        })
    }

    /// Same action on a relabelled set of the same size.
    pub fn relabel(self, set: ActionSet) -> Result<GroupAction> {
        if set.len() != self.set.len() {
            return Err(Error::StructureMismatch(format!(
                "{} labels for {} points",
                set.len(),
                self.set.len()
            )));
        }
        Ok(GroupAction { set, ..self })
    }

    /// Product group acting coordinatewise on the product set.
    pub fn product(label: impl Into<String>, factors: &[&GroupAction]) -> Result<GroupAction> {
        let group = FiniteGroup::product(factors.iter().map(|a| a.group.clone()).collect());
        let sets: Vec<&ActionSet> = factors.iter().map(|a| &a.set).collect();
        let set = ActionSet::product(label, &sets);
        let sizes: Vec<usize> = factors.iter().map(|a| a.set.len()).collect();
        let mut perms = Vec::new();
        let stride = |d: usize| sizes[d + 1..].iter().product::<usize>();
        for (d, a) in factors.iter().enumerate() {
            for p in &a.generator_perms {
                let images = (0..set.len())
                    .map(|x| {
                        let c = (x / stride(d)) % sizes[d];
                        x + (p.apply(c) * stride(d)) - c * stride(d)
                    })
                    .collect();
                perms.push(Perm::new(images)?);
            }
        }
        GroupAction::new(group, set, perms)
    }

    pub fn generator_perms(&self) -> &[Perm] {
        &self.generator_perms
    }

    pub fn len(&self) -> usize {
        self.set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }

    /// Permutation of the points induced by a word in the generators.
    pub fn perm_of_word(&self, word: &[(usize, i64)]) -> Perm {
        let n = self.set.len();
        let mut p = Perm::identity(n);
        for &(s, e) in word {
            let base = if e < 0 {
                self.generator_perms[s].inverse()
            } else {
                self.generator_perms[s].clone()
            };
            for _ in 0..e.unsigned_abs() {
                p = p.compose(&base);
            }
        }
        p
    }

    /// Permutation of the points induced by `g`.
    pub fn perm_of(&self, g: &GroupElement) -> Result<Perm> {
        if let Some(c) = self.cache.get() {
            let en = self.group.enumerate()?;
            return en.position(g).map(|i| c[i].clone()).ok_or(Error::NotInGroup);
        }
        if !self.group.contains(g)? {
            return Err(Error::NotInGroup);
        }
        Ok(self.perm_of_word(&self.group.word(g)?))
    }

    pub fn act(&self, g: &GroupElement, x: usize) -> Result<usize> {
        if x >= self.set.len() {
            return Err(Error::NotInSet);
        }
        Ok(self.perm_of(g)?.apply(x))
    }

    /// Permutations of every enumerated element, in enumeration order.
    pub fn element_perms(&self) -> Result<Arc<Vec<Perm>>> {
        if let Some(c) = self.cache.get() {
            return Ok(c.clone());
        }
        let en = self.group.enumerate()?;
        let mut out: Vec<Perm> = Vec::with_capacity(en.len());
        for i in 0..en.len() {
            let p = match en.parent(i) {
                None => Perm::identity(self.set.len()),
                Some((p, s)) => out[p].compose(&self.generator_perms[s]),
            };
            out.push(p);
        }
        Ok(self.cache.get_or_init(|| Arc::new(out)).clone())
    }

    /// Some element mapping `x` to `y`, searched breadth-first in the group.
    pub fn witness(&self, x: usize, y: usize) -> Result<Option<GroupElement>> {
        let en = self.group.enumerate()?;
        let perms = self.element_perms()?;
        Ok(perms
            .iter()
            .position(|p| p.apply(x) == y)
            .map(|i| en.elements[i].clone()))
    }

    /// Orbit of `x` under the generators, sorted.
    pub fn orbit(&self, x: usize) -> Vec<usize> {
        let mut seen = vec![false; self.set.len()];
        let mut stack = vec![x];
        seen[x] = true;
        while let Some(p) = stack.pop() {
            for g in &self.generator_perms {
                let y = g.apply(p);
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        (0..seen.len()).filter(|&i| seen[i]).collect()
    }

    pub fn is_transitive(&self) -> bool {
        self.set.is_empty() || self.orbit(0).len() == self.set.len()
    }
}

/// Partition of the points into orbits, each sorted, ordered by least point.
pub fn orbits(action: &GroupAction) -> Vec<Vec<usize>> {
    let mut assigned = vec![false; action.len()];
    let mut out = Vec::new();
    for x in 0..action.len() {
        if assigned[x] {
            continue;
        }
        let o = action.orbit(x);
        for &y in &o {
            assigned[y] = true;
        }
        out.push(o);
    }
    out
}

pub fn stabilizer(action: &GroupAction, x: usize) -> Result<FiniteGroup> {
    if x >= action.len() {
        return Err(Error::NotInSet);
    }
    let en = action.group.enumerate()?;
    let perms = action.element_perms()?;
    let fixing: Vec<GroupElement> = en
        .elements
        .iter()
        .zip(perms.iter())
        .filter(|(_, p)| p.apply(x) == x)
        .map(|(g, _)| g.clone())
        .collect();
    action.group.subgroup_from_elements(&fixing)
}

/// Left coset `a·K`, stored by its least element.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coset {
    pub subgroup: FiniteGroup,
    pub representative: GroupElement,
}

impl Coset {
    pub fn new(group: &FiniteGroup, subgroup: &FiniteGroup, a: &GroupElement) -> Result<Coset> {
        let k = subgroup.enumerate()?;
        let representative = k
            .elements
            .iter()
            .map(|x| group.mul(a, x))
            .min()
            .expect("subgroups are nonempty");
        Ok(Coset {
            subgroup: subgroup.clone(),
            representative,
        })
    }

    pub fn elements(&self, group: &FiniteGroup) -> Result<Vec<GroupElement>> {
        let k = self.subgroup.enumerate()?;
        let mut v: Vec<_> = k.elements.iter().map(|x| group.mul(&self.representative, x)).collect();
        v.sort();
        Ok(v)
    }

    pub fn contains(&self, group: &FiniteGroup, g: &GroupElement) -> Result<bool> {
        let d = group.mul(&group.inv(&self.representative), g);
        Ok(self.subgroup.enumerate()?.contains(&d))
    }

    /// `g·(aK)`.
    pub fn left_mul(&self, group: &FiniteGroup, g: &GroupElement) -> Result<Coset> {
        Coset::new(group, &self.subgroup, &group.mul(g, &self.representative))
    }
}

/// All left cosets of `k` in `g`, ordered by representative.
pub fn cosets(g: &FiniteGroup, k: &FiniteGroup) -> Result<Vec<Coset>> {
    if !k.is_subgroup_of(g)? {
        return Err(Error::NotASubgroup("generators lie outside the group".into()));
    }
    let ge = g.enumerate()?;
    let ke = k.enumerate()?;
    let mut done: HashSet<&GroupElement> = HashSet::new();
    let mut out = Vec::new();
    for a in g.sorted_elements()?.iter() {
        if done.contains(a) {
            continue;
        }
        // a is the least unseen element, so it is the least of its coset
        for x in &ke.elements {
            let y = g.mul(a, x);
            let y = &ge.elements[ge.position(&y).expect("closed")];
            done.insert(y);
        }
        out.push(Coset {
            subgroup: k.clone(),
            representative: a.clone(),
        });
    }
    Ok(out)
}

/// Pairs each point in the orbit of `x0` with the coset `g·Stab(x0)` of the
/// elements sending `x0` there.
pub fn orbit_coset_bijection(action: &GroupAction, x0: usize) -> Result<Vec<(usize, Coset)>> {
    let k = stabilizer(action, x0)?;
    let mut out = Vec::new();
    for x in action.orbit(x0) {
        let g = action.witness(x0, x)?.expect("point lies in the orbit");
        out.push((x, Coset::new(&action.group, &k, &g)?));
    }
    Ok(out)
}
