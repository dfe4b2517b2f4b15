use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use super::{Descriptor, FiniteGroup, GroupElement, Word};
use crate::error::{Error, Result};

/// A homomorphism fixed by the images of the source generators.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Homomorphism {
    pub source: FiniteGroup,
    pub target: FiniteGroup,
    pub images: Vec<GroupElement>,
    pub validated: bool,
    #[serde(skip)]
    table: OnceLock<Arc<HashMap<GroupElement, GroupElement>>>,
}

impl Homomorphism {
    pub fn identity(g: &FiniteGroup) -> Homomorphism {
        Homomorphism {
            source: g.clone(),
            target: g.clone(),
            images: g.generators().to_vec(),
            validated: true,
            table: OnceLock::new(),
        }
    }

    /// `self ∘ inner`.
    pub fn after(&self, inner: &Homomorphism) -> Result<Homomorphism> {
        let images = inner
            .images
            .iter()
            .map(|x| apply_hom(self, x))
            .collect::<Result<Vec<_>>>()?;
        Ok(Homomorphism {
            source: inner.source.clone(),
            target: self.target.clone(),
            images,
            validated: inner.validated && self.validated,
            table: OnceLock::new(),
        })
    }

    /// Image subgroup ρ(G) inside the target.
    pub fn image(&self) -> Result<FiniteGroup> {
        self.target.subgroup(&self.images)
    }

    /// Image of a whole subgroup of the source.
    pub fn image_of(&self, sub: &FiniteGroup) -> Result<FiniteGroup> {
        let gens = sub
            .generators()
            .iter()
            .map(|g| apply_hom(self, g))
            .collect::<Result<Vec<_>>>()?;
        self.target.subgroup(&gens)
    }
}

fn evaluate_images(target: &FiniteGroup, images: &[GroupElement], word: &[(usize, i64)]) -> GroupElement {
    word.iter().fold(target.identity(), |acc, &(i, e)| {
        target.mul(&acc, &target.pow(&images[i], e))
    })
}

/// Validate a generator-image table. Exhaustive when the source is
/// enumerable, otherwise by the presentation of the source family.
pub fn make_hom(source: &FiniteGroup, target: &FiniteGroup, images: Vec<GroupElement>) -> Result<Homomorphism> {
    check_images(source, target, &images)?;
    match source.enumerate() {
        Ok(en) => {
            // φ along the breadth-first tree, then every edge g -> g·s
            let mut phi: Vec<GroupElement> = Vec::with_capacity(en.len());
            for i in 0..en.len() {
                let v = match en.parent(i) {
                    None => target.identity(),
                    Some((p, s)) => target.mul(&phi[p], &images[s]),
                };
                phi.push(v);
            }
            for (i, g) in en.elements.iter().enumerate() {
                for (s, gen) in source.generators().iter().enumerate() {
                    let j = en.position(&source.mul(g, gen)).expect("closed under generators");
                    if phi[j] != target.mul(&phi[i], &images[s]) {
                        return Err(Error::NotAHomomorphism {
                            left: g.clone(),
                            right: gen.clone(),
                        });
                    }
                }
            }
            let table: HashMap<_, _> = en.elements.iter().cloned().zip(phi).collect();
            let h = Homomorphism {
                source: source.clone(),
                target: target.clone(),
                images,
                validated: true,
                table: OnceLock::new(),
            };
            let _ = h.table.set(Arc::new(table));
            Ok(h)
        }
        Err(Error::CapExceeded { .. }) => make_hom_by_relations(source, target, images),
        Err(e) => Err(e),
    }
}

/// Validate against the defining relations only, without enumerating.
pub fn make_hom_by_relations(
    source: &FiniteGroup,
    target: &FiniteGroup,
    images: Vec<GroupElement>,
) -> Result<Homomorphism> {
    check_images(source, target, &images)?;
    let rels = relations(source).ok_or(Error::CapExceeded {
        cap: source.enumeration_cap(),
    })?;
    for rel in rels {
        if !target.is_identity(&evaluate_images(target, &images, &rel)) {
            let (last, prefix) = rel.split_last().expect("relations are nonempty");
            let left = source.evaluate(prefix);
            let right = source.pow(&source.generators()[last.0], last.1);
            return Err(Error::NotAHomomorphism { left, right });
        }
    }
    Ok(Homomorphism {
        source: source.clone(),
        target: target.clone(),
        images,
        validated: true,
        table: OnceLock::new(),
    })
}

fn check_images(source: &FiniteGroup, target: &FiniteGroup, images: &[GroupElement]) -> Result<()> {
    if images.len() != source.generators().len() {
        return Err(Error::StructureMismatch(format!(
            "{} images for {} generators",
            images.len(),
            source.generators().len()
        )));
    }
    for x in images {
        target.check(x)?;
        if !target.contains(x)? {
            return Err(Error::NotInGroup);
        }
    }
    Ok(())
}

pub fn apply_hom(rho: &Homomorphism, g: &GroupElement) -> Result<GroupElement> {
    if let Some(t) = rho.table.get() {
        return t.get(g).cloned().ok_or(Error::NotInGroup);
    }
    if !rho.source.contains(g)? {
        return Err(Error::NotInGroup);
    }
    let w = rho.source.word(g)?;
    Ok(evaluate_images(&rho.target, &rho.images, &w))
}

fn commutator(a: usize, b: usize) -> Word {
    vec![(a, 1), (b, 1), (a, -1), (b, -1)]
}

/// Defining relations of a structured family, as words that must evaluate
/// to the identity. `None` for generated subgroups.
pub(crate) fn relations(g: &FiniteGroup) -> Option<Vec<Word>> {
    let mut out = Vec::new();
    match g.descriptor() {
        Descriptor::Modular { moduli } => {
            for (d, &m) in moduli.iter().enumerate() {
                if m > 0 {
                    out.push(vec![(d, m as i64)]);
                }
                for e in d + 1..moduli.len() {
                    out.push(commutator(d, e));
                }
            }
        }
        Descriptor::Shift { q } => out.push(vec![(0, (*q).max(1) as i64)]),
        Descriptor::Symmetric { degree } => {
            let k = degree.saturating_sub(1);
            for i in 0..k {
                out.push(vec![(i, 2)]);
                for j in i + 1..k {
                    if j == i + 1 {
                        out.push([(i, 1), (j, 1)].repeat(3));
                    } else {
                        out.push(commutator(i, j));
                    }
                }
            }
        }
        Descriptor::Product { factors } => {
            let mut offsets = Vec::new();
            let mut off = 0;
            for f in factors {
                offsets.push(off);
                for r in relations(f)? {
                    out.push(r.into_iter().map(|(i, e)| (i + off, e)).collect());
                }
                off += f.generators().len();
            }
            for a in 0..factors.len() {
                for b in a + 1..factors.len() {
                    for x in 0..factors[a].generators().len() {
                        for y in 0..factors[b].generators().len() {
                            out.push(commutator(offsets[a] + x, offsets[b] + y));
                        }
                    }
                }
            }
        }
        Descriptor::Wreath { base, blocks, top } => {
            let nb = base.generators().len();
            let base_rels = relations(base)?;
            for w in 0..*blocks {
                for r in &base_rels {
                    out.push(r.iter().map(|&(i, e)| (i + nb * w, e)).collect());
                }
                for v in w + 1..*blocks {
                    for x in 0..nb {
                        for y in 0..nb {
                            out.push(commutator(nb * w + x, nb * v + y));
                        }
                    }
                }
            }
            let top_off = nb * blocks;
            for r in relations(top)? {
                out.push(r.into_iter().map(|(i, e)| (i + top_off, e)).collect());
            }
            // t · s_w · t⁻¹ = s_{t(w)}
            for (ti, t) in top.generators().iter().enumerate() {
                let p = t.as_perm()?;
                for w in 0..*blocks {
                    for x in 0..nb {
                        out.push(vec![
                            (top_off + ti, 1),
                            (nb * w + x, 1),
                            (top_off + ti, -1),
                            (nb * p.apply(w) + x, -1),
                        ]);
                    }
                }
            }
        }
        Descriptor::Generated { .. } => return None,
    }
    Some(out)
}
