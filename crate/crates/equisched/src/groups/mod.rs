//! Finite groups used to model instruction symmetries, networks and time.
//!
//! Permutations are image sequences and compose right to left:
//! `a.compose(&b)` sends `i` to `a[b[i]]`. Every group carries its generator
//! list; elements of the structured families (modular vectors, symmetric,
//! shift, products, wreath products) can be written as generator words
//! without enumerating the group, which keeps homomorphisms total above the
//! enumeration cap.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

mod hom;

pub use hom::{apply_hom, make_hom, make_hom_by_relations, Homomorphism};

pub const DEFAULT_CAP: usize = 1_000_000;

/// A word in the generators: `[(i, e), ..]` stands for `gen[i]^e · ..`.
pub type Word = Vec<(usize, i64)>;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Perm {
    images: Vec<usize>,
}

impl Perm {
    pub fn new(images: Vec<usize>) -> Result<Perm> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &v in &images {
            if v >= n || seen[v] {
                return Err(Error::StructureMismatch(format!(
                    "{images:?} is not a bijection on [{n}]"
                )));
            }
            seen[v] = true;
        }
        Ok(Perm { images })
    }

    pub fn identity(n: usize) -> Perm {
        Perm {
            images: (0..n).collect(),
        }
    }

    pub fn transposition(n: usize, a: usize, b: usize) -> Perm {
        let mut images: Vec<usize> = (0..n).collect();
        images.swap(a, b);
        Perm { images }
    }

    /// The cyclic shift `i -> i + r (mod q)`.
    pub fn rotation(q: usize, r: usize) -> Perm {
        Perm {
            images: (0..q).map(|i| (i + r) % q.max(1)).collect(),
        }
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn compose(&self, other: &Perm) -> Perm {
        Perm {
            images: other.images.iter().map(|&i| self.images[i]).collect(),
        }
    }

    pub fn inverse(&self) -> Perm {
        let mut images = vec![0; self.images.len()];
        for (i, &v) in self.images.iter().enumerate() {
            images[v] = i;
        }
        Perm { images }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &v)| i == v)
    }

    /// Cycles of length at least two, each starting at its smallest point.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.images.len()];
        let mut out = Vec::new();
        for start in 0..self.images.len() {
            if seen[start] {
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut x = self.images[start];
            while x != start {
                seen[x] = true;
                cycle.push(x);
                x = self.images[x];
            }
            if cycle.len() > 1 {
                out.push(cycle);
            }
        }
        out
    }

    /// A single cycle through every point.
    pub fn is_full_cycle(&self) -> bool {
        let c = self.cycles();
        self.images.len() > 1 && c.len() == 1 && c[0].len() == self.images.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupElement {
    Perm(Perm),
    /// Residues; coordinate `d` lives in `[moduli[d]]`, or in all of ℤ when the modulus is 0.
    Mod(Vec<i64>),
    Wreath {
        base: Vec<GroupElement>,
        top: Perm,
    },
    Product(Vec<GroupElement>),
}

impl GroupElement {
    pub fn perm(images: Vec<usize>) -> Result<GroupElement> {
        Ok(GroupElement::Perm(Perm::new(images)?))
    }

    pub fn as_perm(&self) -> Option<&Perm> {
        match self {
            GroupElement::Perm(p) => Some(p),
            _ => None,
        }
    }

    pub fn as_mod(&self) -> Option<&[i64]> {
        match self {
            GroupElement::Mod(v) => Some(v),
            _ => None,
        }
    }

    pub fn components(&self) -> Option<&[GroupElement]> {
        match self {
            GroupElement::Product(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupElement::Perm(p) => write!(f, "{:?}", p.images),
            GroupElement::Mod(v) => write!(f, "{v:?}"),
            GroupElement::Wreath { base, top } => {
                write!(f, "(")?;
                for (i, b) in base.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{b}")?;
                }
                write!(f, ";{:?})", top.images)
            }
            GroupElement::Product(v) => {
                write!(f, "(")?;
                for (i, b) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{b}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Descriptor {
    Modular {
        moduli: Vec<u64>,
    },
    Symmetric {
        degree: usize,
    },
    Shift {
        q: usize,
    },
    Product {
        factors: Vec<FiniteGroup>,
    },
    Wreath {
        base: Box<FiniteGroup>,
        blocks: usize,
        top: Box<FiniteGroup>,
    },
    Generated {
        parent: Box<FiniteGroup>,
    },
}

/// Elements reachable from the identity, in breadth-first order.
#[derive(Debug)]
pub struct Enumeration {
    pub elements: Vec<GroupElement>,
    index: HashMap<GroupElement, usize>,
    // element i = element parent.0 · generator parent.1
    parent: Vec<Option<(usize, usize)>>,
}

impl Enumeration {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn position(&self, g: &GroupElement) -> Option<usize> {
        self.index.get(g).copied()
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.index.contains_key(g)
    }

    /// Parent pointer of element `i` in the breadth-first tree.
    pub fn parent(&self, i: usize) -> Option<(usize, usize)> {
        self.parent[i]
    }

    pub fn word(&self, mut i: usize) -> Word {
        let mut w = Vec::new();
        while let Some((p, s)) = self.parent[i] {
            w.push((s, 1));
            i = p;
        }
        w.reverse();
        w
    }
}

#[derive(Clone, Serialize, Deserialize)]
pub struct FiniteGroup {
    descriptor: Descriptor,
    generators: Vec<GroupElement>,
    enumeration_cap: usize,
    #[serde(skip)]
    cache: OnceLock<Arc<Enumeration>>,
}

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteGroup")
            .field("descriptor", &self.descriptor)
            .field("generators", &self.generators.len())
            .finish()
    }
}

impl PartialEq for FiniteGroup {
    fn eq(&self, other: &Self) -> bool {
        self.descriptor == other.descriptor && self.generators == other.generators
    }
}

impl Eq for FiniteGroup {}

fn unit(len: usize, d: usize, moduli: &[u64]) -> GroupElement {
    let mut v = vec![0i64; len];
    v[d] = if moduli[d] == 1 { 0 } else { 1 };
    GroupElement::Mod(v)
}

impl FiniteGroup {
    fn from_parts(descriptor: Descriptor, generators: Vec<GroupElement>) -> FiniteGroup {
        FiniteGroup {
            descriptor,
            generators,
            enumeration_cap: DEFAULT_CAP,
            cache: OnceLock::new(),
        }
    }

    /// `ℤ/m₁ × … × ℤ/m_k`; a zero modulus stands for ℤ.
    pub fn modular(moduli: Vec<u64>) -> FiniteGroup {
        let gens = (0..moduli.len()).map(|d| unit(moduli.len(), d, &moduli)).collect();
        FiniteGroup::from_parts(Descriptor::Modular { moduli }, gens)
    }

    pub fn cyclic(q: u64) -> FiniteGroup {
        FiniteGroup::modular(vec![q])
    }

    pub fn torus(dims: &[u64]) -> FiniteGroup {
        FiniteGroup::modular(dims.to_vec())
    }

    pub fn trivial() -> FiniteGroup {
        FiniteGroup::modular(Vec::new())
    }

    /// Symmetric group on `[n]`, generated by adjacent transpositions.
    pub fn symmetric(n: usize) -> FiniteGroup {
        let gens = (0..n.saturating_sub(1))
            .map(|i| GroupElement::Perm(Perm::transposition(n, i, i + 1)))
            .collect();
        FiniteGroup::from_parts(Descriptor::Symmetric { degree: n }, gens)
    }

    /// Cyclic group on `[q]` generated by the one-step shift `i -> i+1`.
    pub fn shift(q: usize) -> FiniteGroup {
        let gens = vec![GroupElement::Perm(Perm::rotation(q, 1))];
        FiniteGroup::from_parts(Descriptor::Shift { q }, gens)
    }

    /// Trivial permutation group of degree `n`.
    pub fn trivial_perm(n: usize) -> FiniteGroup {
        FiniteGroup {
            descriptor: Descriptor::Generated {
                parent: Box::new(FiniteGroup::symmetric(n)),
            },
            generators: Vec::new(),
            enumeration_cap: DEFAULT_CAP,
            cache: OnceLock::new(),
        }
    }

    pub fn product(factors: Vec<FiniteGroup>) -> FiniteGroup {
        let ids: Vec<GroupElement> = factors.iter().map(|f| f.identity()).collect();
        let mut gens = Vec::new();
        for (k, f) in factors.iter().enumerate() {
            for s in &f.generators {
                let mut v = ids.clone();
                v[k] = s.clone();
                gens.push(GroupElement::Product(v));
            }
        }
        FiniteGroup::from_parts(Descriptor::Product { factors }, gens)
    }

    /// `base ≀ top` where `top` permutes `blocks` slots. Generators are the
    /// base generators placed in each slot (slot-major) followed by the top
    /// generators.
    pub fn wreath(base: FiniteGroup, blocks: usize, top: FiniteGroup) -> Result<FiniteGroup> {
        if top.degree() != Some(blocks) {
            return Err(Error::StructureMismatch(format!("top group must act on [{blocks}]")));
        }
        let g = FiniteGroup::from_parts(
            Descriptor::Wreath {
                base: Box::new(base.clone()),
                blocks,
                top: Box::new(top.clone()),
            },
            Vec::new(),
        );
        if g.order_formula_checked().is_err() {
            return Err(Error::CapExceeded { cap: g.enumeration_cap });
        }
        let mut gens = Vec::new();
        for w in 0..blocks {
            for s in &base.generators {
                let mut slots = vec![base.identity(); blocks];
                slots[w] = s.clone();
                gens.push(GroupElement::Wreath {
                    base: slots,
                    top: Perm::identity(blocks),
                });
            }
        }
        for t in &top.generators {
            let p = t
                .as_perm()
                .ok_or_else(|| Error::StructureMismatch("top generator is not a permutation".into()))?;
            gens.push(GroupElement::Wreath {
                base: vec![base.identity(); blocks],
                top: p.clone(),
            });
        }
        Ok(FiniteGroup { generators: gens, ..g })
    }

    /// The `k`-fold iterated wreath product of `S_b`; `iterwr(2, k)` models a
    /// binary fat-tree with `2^k` leaves. Leaf `w·b^(k-1) + x` lies in top
    /// block `w`.
    pub fn iterwr(b: usize, k: usize) -> FiniteGroup {
        let mut g = FiniteGroup::symmetric(b);
        for _ in 1..k {
            g = FiniteGroup::wreath(g, b, FiniteGroup::symmetric(b)).expect("degree matches");
        }
        if k == 0 {
            return FiniteGroup::trivial_perm(1);
        }
        g
    }

    /// Subgroup of `parent` generated by `generators`.
    pub fn generated(parent: &FiniteGroup, generators: Vec<GroupElement>) -> Result<FiniteGroup> {
        for g in &generators {
            if !parent.contains(g)? {
                return Err(Error::NotInGroup);
            }
        }
        Ok(FiniteGroup {
            descriptor: Descriptor::Generated {
                parent: Box::new(parent.clone()),
            },
            generators,
            enumeration_cap: parent.enumeration_cap,
            cache: OnceLock::new(),
        })
    }

    pub fn with_cap(mut self, cap: usize) -> FiniteGroup {
        self.enumeration_cap = cap;
        self.cache = OnceLock::new();
        self
    }

    pub fn descriptor(&self) -> &Descriptor {
        &self.descriptor
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.generators
    }

    pub fn enumeration_cap(&self) -> usize {
        self.enumeration_cap
    }

    pub fn identity(&self) -> GroupElement {
        match &self.descriptor {
            Descriptor::Modular { moduli } => GroupElement::Mod(vec![0; moduli.len()]),
            Descriptor::Symmetric { degree } => GroupElement::Perm(Perm::identity(*degree)),
            Descriptor::Shift { q } => GroupElement::Perm(Perm::identity(*q)),
            Descriptor::Product { factors } => GroupElement::Product(factors.iter().map(|f| f.identity()).collect()),
            Descriptor::Wreath { base, blocks, .. } => GroupElement::Wreath {
                base: vec![base.identity(); *blocks],
                top: Perm::identity(*blocks),
            },
            Descriptor::Generated { parent } => parent.identity(),
        }
    }

    /// Degree of the natural permutation action, when there is one.
    pub fn degree(&self) -> Option<usize> {
        match &self.descriptor {
            Descriptor::Symmetric { degree } => Some(*degree),
            Descriptor::Shift { q } => Some(*q),
            Descriptor::Wreath { base, blocks, .. } => base.degree().map(|d| d * blocks),
            Descriptor::Generated { parent } => parent.degree(),
            _ => None,
        }
    }

    /// Structural validity: shape, lengths and residue ranges.
    pub fn check(&self, g: &GroupElement) -> Result<()> {
        let bad = || Err(Error::StructureMismatch(format!("{g} for {:?}", self.descriptor)));
        match (&self.descriptor, g) {
            (Descriptor::Modular { moduli }, GroupElement::Mod(v)) => {
                if v.len() != moduli.len() {
                    return bad();
                }
                for (x, &m) in v.iter().zip(moduli) {
                    if m > 0 && (*x < 0 || *x as u64 >= m) {
                        return bad();
                    }
                }
                Ok(())
            }
            (Descriptor::Symmetric { degree: n }, GroupElement::Perm(p))
            | (Descriptor::Shift { q: n }, GroupElement::Perm(p)) => {
                if p.degree() != *n {
                    return bad();
                }
                Perm::new(p.images.clone()).map(|_| ())
            }
            (Descriptor::Product { factors }, GroupElement::Product(v)) => {
                if v.len() != factors.len() {
                    return bad();
                }
                for (f, x) in factors.iter().zip(v) {
                    f.check(x)?;
                }
                Ok(())
            }
            (Descriptor::Wreath { base, blocks, top }, GroupElement::Wreath { base: b, top: t }) => {
                if b.len() != *blocks {
                    return bad();
                }
                for x in b {
                    base.check(x)?;
                }
                top.check(&GroupElement::Perm(t.clone()))
            }
            (Descriptor::Generated { parent }, _) => parent.check(g),
            _ => bad(),
        }
    }

    /// Membership. Structured families decide it directly; generated
    /// subgroups enumerate.
    pub fn contains(&self, g: &GroupElement) -> Result<bool> {
        if self.check(g).is_err() {
            return Ok(false);
        }
        match (&self.descriptor, g) {
            (Descriptor::Shift { q }, GroupElement::Perm(p)) => {
                let r = if *q == 0 { 0 } else { p.apply(0) };
                Ok(*p == Perm::rotation(*q, r))
            }
            (Descriptor::Product { factors }, GroupElement::Product(v)) => {
                for (f, x) in factors.iter().zip(v) {
                    if !f.contains(x)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            (Descriptor::Wreath { base, top, .. }, GroupElement::Wreath { base: b, top: t }) => {
                for x in b {
                    if !base.contains(x)? {
                        return Ok(false);
                    }
                }
                top.contains(&GroupElement::Perm(t.clone()))
            }
            (Descriptor::Generated { .. }, _) => Ok(self.enumerate()?.contains(g)),
            _ => Ok(true),
        }
    }

    pub(crate) fn mul(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        match (&self.descriptor, a, b) {
            (Descriptor::Modular { moduli }, GroupElement::Mod(x), GroupElement::Mod(y)) => GroupElement::Mod(
                x.iter()
                    .zip(y)
                    .zip(moduli)
                    .map(|((&u, &v), &m)| reduce(u + v, m))
                    .collect(),
            ),
            (Descriptor::Symmetric { .. } | Descriptor::Shift { .. }, GroupElement::Perm(p), GroupElement::Perm(r)) => {
                GroupElement::Perm(p.compose(r))
            }
            (Descriptor::Product { factors }, GroupElement::Product(x), GroupElement::Product(y)) => {
                GroupElement::Product(
                    factors
                        .iter()
                        .zip(x.iter().zip(y))
                        .map(|(f, (u, v))| f.mul(u, v))
                        .collect(),
                )
            }
            (
                Descriptor::Wreath { base, top, .. },
                GroupElement::Wreath { base: ab, top: at },
                GroupElement::Wreath { base: bb, top: bt },
            ) => {
                let slots = (0..bb.len()).map(|w| base.mul(&ab[bt.apply(w)], &bb[w])).collect();
                let t = top.mul(&GroupElement::Perm(at.clone()), &GroupElement::Perm(bt.clone()));
                GroupElement::Wreath {
                    base: slots,
                    top: t.as_perm().expect("top is a permutation group").clone(),
                }
            }
            (Descriptor::Generated { parent }, _, _) => parent.mul(a, b),
            _ => panic!("mul called on structurally invalid elements"),
        }
    }

    pub(crate) fn inv(&self, a: &GroupElement) -> GroupElement {
        match (&self.descriptor, a) {
            (Descriptor::Modular { moduli }, GroupElement::Mod(x)) => {
                GroupElement::Mod(x.iter().zip(moduli).map(|(&u, &m)| reduce(-u, m)).collect())
            }
            (Descriptor::Symmetric { .. } | Descriptor::Shift { .. }, GroupElement::Perm(p)) => {
                GroupElement::Perm(p.inverse())
            }
            (Descriptor::Product { factors }, GroupElement::Product(x)) => {
                GroupElement::Product(factors.iter().zip(x).map(|(f, u)| f.inv(u)).collect())
            }
            (Descriptor::Wreath { base, .. }, GroupElement::Wreath { base: ab, top: at }) => {
                let ti = at.inverse();
                let slots = (0..ab.len()).map(|w| base.inv(&ab[ti.apply(w)])).collect();
                GroupElement::Wreath { base: slots, top: ti }
            }
            (Descriptor::Generated { parent }, _) => parent.inv(a),
            _ => panic!("inv called on a structurally invalid element"),
        }
    }

    pub fn compose(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.mul(a, b))
    }

    pub fn inverse(&self, a: &GroupElement) -> Result<GroupElement> {
        self.check(a)?;
        Ok(self.inv(a))
    }

    pub fn pow(&self, a: &GroupElement, e: i64) -> GroupElement {
        let mut base = if e < 0 { self.inv(a) } else { a.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = self.identity();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    pub fn is_identity(&self, a: &GroupElement) -> bool {
        *a == self.identity()
    }

    pub fn evaluate(&self, word: &[(usize, i64)]) -> GroupElement {
        word.iter().fold(self.identity(), |acc, &(i, e)| {
            self.mul(&acc, &self.pow(&self.generators[i], e))
        })
    }

    /// Natural action on points, for permutation groups and wreath
    /// products of permutation groups.
    pub fn act(&self, g: &GroupElement, x: usize) -> Option<usize> {
        match (&self.descriptor, g) {
            (Descriptor::Symmetric { .. } | Descriptor::Shift { .. }, GroupElement::Perm(p)) => Some(p.apply(x)),
            (Descriptor::Wreath { base, .. }, GroupElement::Wreath { base: b, top }) => {
                let m = base.degree()?;
                let (w, y) = (x / m, x % m);
                Some(top.apply(w) * m + base.act(&b[w], y)?)
            }
            (Descriptor::Generated { parent }, _) => parent.act(g, x),
            _ => None,
        }
    }

    pub fn to_perm(&self, g: &GroupElement) -> Option<Perm> {
        let n = self.degree()?;
        let images = (0..n).map(|x| self.act(g, x)).collect::<Option<Vec<_>>>()?;
        Perm::new(images).ok()
    }

    fn order_formula_checked(&self) -> std::result::Result<Option<u128>, ()> {
        Ok(match &self.descriptor {
            Descriptor::Modular { moduli } => {
                let mut o: u128 = 1;
                for &m in moduli {
                    if m == 0 {
                        return Ok(None);
                    }
                    o = o.checked_mul(m as u128).ok_or(())?;
                }
                Some(o)
            }
            Descriptor::Symmetric { degree } => {
                let mut o: u128 = 1;
                for k in 2..=*degree as u128 {
                    o = o.checked_mul(k).ok_or(())?;
                }
                Some(o)
            }
            Descriptor::Shift { q } => Some((*q).max(1) as u128),
            Descriptor::Product { factors } => {
                let mut o: u128 = 1;
                for f in factors {
                    match f.order_formula_checked()? {
                        Some(x) => o = o.checked_mul(x).ok_or(())?,
                        None => return Ok(None),
                    }
                }
                Some(o)
            }
            Descriptor::Wreath { base, blocks, top } => {
                match (base.order_formula_checked()?, top.order_formula_checked()?) {
                    (Some(b), Some(t)) => {
                        let mut o: u128 = t;
                        for _ in 0..*blocks {
                            o = o.checked_mul(b).ok_or(())?;
                        }
                        Some(o)
                    }
                    _ => None,
                }
            }
            Descriptor::Generated { .. } => None,
        })
    }

    /// Closed-form order for the structured families (`None` for generated
    /// subgroups, infinite groups, or on overflow).
    pub fn order_formula(&self) -> Option<u128> {
        self.order_formula_checked().ok().flatten()
    }

    fn is_infinite_family(&self) -> bool {
        match &self.descriptor {
            Descriptor::Modular { moduli } => moduli.contains(&0),
            Descriptor::Product { factors } => factors.iter().any(|f| f.is_infinite_family()),
            Descriptor::Wreath { base, top, .. } => base.is_infinite_family() || top.is_infinite_family(),
            Descriptor::Generated { parent } => parent.is_infinite_family() && !self.generators.is_empty(),
            _ => false,
        }
    }

    pub fn order(&self) -> Result<u128> {
        match self.order_formula() {
            Some(o) => Ok(o),
            None => Ok(self.enumerate()?.len() as u128),
        }
    }

    /// Closure of the generators, cached after the first call.
    pub fn enumerate(&self) -> Result<Arc<Enumeration>> {
        if let Some(e) = self.cache.get() {
            return Ok(e.clone());
        }
        let cap = self.enumeration_cap;
        if self.order_formula_checked().is_err() {
            return Err(Error::CapExceeded { cap });
        }
        if let Some(o) = self.order_formula() {
            if o > cap as u128 {
                return Err(Error::CapExceeded { cap });
            }
        } else if self.is_infinite_family() && !matches!(self.descriptor, Descriptor::Generated { .. }) {
            return Err(Error::CapExceeded { cap });
        }
        let id = self.identity();
        let mut elements = vec![id.clone()];
        let mut index = HashMap::new();
        index.insert(id, 0usize);
        let mut parent = vec![None];
        let mut head = 0;
        while head < elements.len() {
            for (s, gen) in self.generators.iter().enumerate() {
                let h = self.mul(&elements[head], gen);
                if !index.contains_key(&h) {
                    if elements.len() >= cap {
                        return Err(Error::CapExceeded { cap });
                    }
                    index.insert(h.clone(), elements.len());
                    elements.push(h);
                    parent.push(Some((head, s)));
                }
            }
            head += 1;
        }
        let e = Arc::new(Enumeration {
            elements,
            index,
            parent,
        });
        let _ = self.cache.set(e.clone());
        Ok(self.cache.get().cloned().unwrap_or(e))
    }

    /// Enumerated elements in canonical (lexicographic) order.
    pub fn sorted_elements(&self) -> Result<Vec<GroupElement>> {
        let mut v = self.enumerate()?.elements.clone();
        v.sort();
        Ok(v)
    }

    /// A generator word for `g`, found structurally where possible.
    pub fn word(&self, g: &GroupElement) -> Result<Word> {
        self.check(g)?;
        match (&self.descriptor, g) {
            (Descriptor::Modular { moduli }, GroupElement::Mod(v)) => Ok(v
                .iter()
                .enumerate()
                .filter(|(d, &x)| x != 0 && moduli[*d] != 1)
                .map(|(d, &x)| (d, x))
                .collect()),
            (Descriptor::Shift { q }, GroupElement::Perm(p)) => {
                if !self.contains(g)? {
                    return Err(Error::NotInGroup);
                }
                let r = if *q == 0 { 0 } else { p.apply(0) };
                Ok(if r == 0 { Vec::new() } else { vec![(0, r as i64)] })
            }
            (Descriptor::Symmetric { .. }, GroupElement::Perm(p)) => {
                // right-multiplying by s_i swaps image positions i, i+1
                let mut images = p.images.clone();
                let mut swaps = Vec::new();
                let n = images.len();
                for pass in 0..n {
                    for i in 0..n.saturating_sub(1 + pass) {
                        if images[i] > images[i + 1] {
                            images.swap(i, i + 1);
                            swaps.push((i, 1));
                        }
                    }
                }
                swaps.reverse();
                Ok(swaps)
            }
            (Descriptor::Product { factors }, GroupElement::Product(v)) => {
                let mut out = Vec::new();
                let mut offset = 0;
                for (f, x) in factors.iter().zip(v) {
                    out.extend(f.word(x)?.into_iter().map(|(i, e)| (i + offset, e)));
                    offset += f.generators.len();
                }
                Ok(out)
            }
            (Descriptor::Wreath { base, blocks, top }, GroupElement::Wreath { base: b, top: t }) => {
                let nb = base.generators.len();
                let mut out: Word = top
                    .word(&GroupElement::Perm(t.clone()))?
                    .into_iter()
                    .map(|(i, e)| (i + nb * blocks, e))
                    .collect();
                for (w, x) in b.iter().enumerate() {
                    out.extend(base.word(x)?.into_iter().map(|(i, e)| (i + nb * w, e)));
                }
                Ok(out)
            }
            (Descriptor::Generated { .. }, _) => {
                let en = self.enumerate()?;
                let i = en.position(g).ok_or(Error::NotInGroup)?;
                Ok(en.word(i))
            }
            _ => Err(Error::StructureMismatch(format!("{g}"))),
        }
    }

    /// Subgroup generated by `gens`, with a greedy minimal generating set
    /// drawn from `gens` in order.
    pub fn subgroup(&self, gens: &[GroupElement]) -> Result<FiniteGroup> {
        let mut chosen: Vec<GroupElement> = Vec::new();
        let mut current = FiniteGroup::generated(self, Vec::new())?;
        for g in gens {
            if current.enumerate()?.contains(g) {
                continue;
            }
            chosen.push(g.clone());
            current = FiniteGroup::generated(self, chosen.clone())?;
        }
        Ok(current)
    }

    /// Subgroup consisting of exactly `elements` (which must be closed).
    pub fn subgroup_from_elements(&self, elements: &[GroupElement]) -> Result<FiniteGroup> {
        let mut sorted = elements.to_vec();
        sorted.sort();
        let h = self.subgroup(&sorted)?;
        if h.enumerate()?.len() != sorted.len() {
            return Err(Error::NotASubgroup("element set is not closed".into()));
        }
        Ok(h)
    }

    /// `self ≤ other`: the generators lie in `other` and generate a subgroup
    /// there of the same order (the multiplication must agree too).
    pub fn is_subgroup_of(&self, other: &FiniteGroup) -> Result<bool> {
        for g in &self.generators {
            if !other.contains(g)? {
                return Ok(false);
            }
        }
        let inside = FiniteGroup::generated(other, self.generators.clone())?;
        match (self.enumerate(), inside.enumerate()) {
            (Ok(a), Ok(b)) => Ok(a.len() == b.len()),
            _ => Ok(true),
        }
    }
}

fn reduce(x: i64, m: u64) -> i64 {
    if m == 0 {
        x
    } else {
        x.rem_euclid(m as i64)
    }
}
