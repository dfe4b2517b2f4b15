//! Equivariant maps between group actions, built orbit by orbit from coset
//! maps, together with an exhaustive oracle.

use serde::{Deserialize, Serialize};

use crate::actions::{cosets, orbits, stabilizer, GroupAction};
use crate::error::{Error, Result};
use crate::groups::{apply_hom, FiniteGroup, GroupElement, Homomorphism, Perm};

pub const DEFAULT_SOLUTION_LIMIT: usize = 10_000;
pub const DEFAULT_ORACLE_CAP: u128 = 1 << 24;

/// Parameter `a` of the coset map `gL ↦ ρ(g)·a·K`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CosetMapParam {
    pub a: GroupElement,
    pub source_stab: FiniteGroup,
    pub target_stab: FiniteGroup,
}

fn check_sub(sub: &FiniteGroup, group: &FiniteGroup, what: &str) -> Result<()> {
    if !sub.is_subgroup_of(group)? {
        return Err(Error::NotASubgroup(format!("{what} is not contained in its group")));
    }
    Ok(())
}

/// Whether `a⁻¹·ρ(L)·a ⊆ K`.
pub fn coset_map_exists(
    g: &FiniteGroup,
    h: &FiniteGroup,
    rho: &Homomorphism,
    l: &FiniteGroup,
    k: &FiniteGroup,
    a: &GroupElement,
) -> Result<bool> {
    check_sub(l, g, "L")?;
    check_sub(k, h, "K")?;
    let ainv = h.inverse(a)?;
    for x in l.generators() {
        let y = h.mul(&h.mul(&ainv, &apply_hom(rho, x)?), a);
        if !k.contains(&y)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// One parameter per coset `aK` that admits a coset map.
pub fn enumerate_coset_maps(
    g: &FiniteGroup,
    h: &FiniteGroup,
    rho: &Homomorphism,
    l: &FiniteGroup,
    k: &FiniteGroup,
) -> Result<Vec<CosetMapParam>> {
    check_sub(l, g, "L")?;
    let mut out = Vec::new();
    for c in cosets(h, k)? {
        if coset_map_exists(g, h, rho, l, k, &c.representative)? {
            out.push(CosetMapParam {
                a: c.representative,
                source_stab: l.clone(),
                target_stab: k.clone(),
            });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OrbitChoice {
    /// Least point of the source orbit.
    pub anchor: usize,
    /// Target orbit receiving it (index into the target's orbit list).
    pub target_orbit: usize,
    /// Image of the anchor.
    pub image: usize,
    pub param: Option<CosetMapParam>,
}

/// An equivariant map `f` with `f(g·x) = ρ(g)·f(x)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EquivariantMap {
    pub source: GroupAction,
    pub target: GroupAction,
    pub rho: Homomorphism,
    pub choices: Vec<OrbitChoice>,
    table: Vec<usize>,
}

impl EquivariantMap {
    /// Extends anchor images along the generators. Fails with
    /// `ConditionViolated` if the extension is inconsistent.
    pub fn from_anchors(
        source: &GroupAction,
        target: &GroupAction,
        rho: &Homomorphism,
        anchors: &[(usize, usize)],
    ) -> Result<EquivariantMap> {
        let tperms = rho_perms(target, rho)?;
        let mut table = vec![usize::MAX; source.len()];
        for &(x, y) in anchors {
            if x >= source.len() || y >= target.len() {
                return Err(Error::NotInSet);
            }
            table[x] = y;
            let mut stack = vec![x];
            while let Some(p) = stack.pop() {
                for (s, sp) in source.generator_perms().iter().enumerate() {
                    let (q, fq) = (sp.apply(p), tperms[s].apply(table[p]));
                    if table[q] == usize::MAX {
                        table[q] = fq;
                        stack.push(q);
                    } else if table[q] != fq {
                        return Err(Error::ConditionViolated(format!(
                            "anchor {x} ↦ {y} is not compatible with the stabilizer"
                        )));
                    }
                }
            }
        }
        if let Some(x) = table.iter().position(|&y| y == usize::MAX) {
            return Err(Error::ConditionViolated(format!("point {x} has no anchor")));
        }
        let torbits = orbits(target);
        let choices = anchors
            .iter()
            .map(|&(x, y)| OrbitChoice {
                anchor: x,
                target_orbit: torbits.iter().position(|o| o.contains(&y)).expect("partition"),
                image: y,
                param: None,
            })
            .collect();
        Ok(EquivariantMap {
            source: source.clone(),
            target: target.clone(),
            rho: rho.clone(),
            choices,
            table,
        })
    }

    /// Full table of images, indexed by source point.
    pub fn table(&self) -> &[usize] {
        &self.table
    }

    /// Checks the defining square on the generators, which implies it for
    /// all elements.
    pub fn check(&self) -> Result<bool> {
        let tperms = rho_perms(&self.target, &self.rho)?;
        for (s, sp) in self.source.generator_perms().iter().enumerate() {
            for x in 0..self.table.len() {
                if self.table[sp.apply(x)] != tperms[s].apply(self.table[x]) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

fn rho_perms(target: &GroupAction, rho: &Homomorphism) -> Result<Vec<Perm>> {
    rho.images.iter().map(|h| target.perm_of(h)).collect()
}

/// Enumerates every equivariant map, anchoring each source orbit at its
/// least point. An empty result means no map exists.
pub fn solve_equivariant(
    source: &GroupAction,
    target: &GroupAction,
    rho: &Homomorphism,
) -> Result<Vec<EquivariantMap>> {
    solve_equivariant_limited(source, target, rho, DEFAULT_SOLUTION_LIMIT)
}

pub fn solve_equivariant_limited(
    source: &GroupAction,
    target: &GroupAction,
    rho: &Homomorphism,
    limit: usize,
) -> Result<Vec<EquivariantMap>> {
    if source.group != rho.source || target.group != rho.target {
        return Err(Error::StructureMismatch(
            "homomorphism does not match the actions".into(),
        ));
    }
    let tperms = rho_perms(target, rho)?;
    let torbits = orbits(target);
    let tstabs: Vec<FiniteGroup> = torbits
        .iter()
        .map(|o| stabilizer(target, o[0]))
        .collect::<Result<_>>()?;

    // per source orbit, the admissible (target orbit, image, param)
    let mut options: Vec<Vec<OrbitChoice>> = Vec::new();
    for o in orbits(source) {
        let x = o[0];
        let l = stabilizer(source, x)?;
        let lperms: Vec<Perm> = l
            .generators()
            .iter()
            .map(|g| Ok(target.perm_of(&apply_hom(rho, g)?)?))
            .collect::<Result<_>>()?;
        let mut opts = Vec::new();
        for (ti, to) in torbits.iter().enumerate() {
            for &y in to {
                // y is admissible iff ρ(L) fixes it
                if lperms.iter().all(|p| p.apply(y) == y) {
                    let a = target.witness(to[0], y)?.expect("same orbit");
                    opts.push(OrbitChoice {
                        anchor: x,
                        target_orbit: ti,
                        image: y,
                        param: Some(CosetMapParam {
                            a,
                            source_stab: l.clone(),
                            target_stab: tstabs[ti].clone(),
                        }),
                    });
                }
            }
        }
        options.push(opts);
    }

    let mut out = Vec::new();
    let mut idx = vec![0usize; options.len()];
    if options.iter().any(|o| o.is_empty()) {
        return Ok(out);
    }
    let srcperms = source.generator_perms();
    loop {
        let choices: Vec<OrbitChoice> = idx.iter().zip(&options).map(|(&i, o)| o[i].clone()).collect();
        let mut table = vec![usize::MAX; source.len()];
        for c in &choices {
            table[c.anchor] = c.image;
            let mut stack = vec![c.anchor];
            while let Some(p) = stack.pop() {
                for (s, sp) in srcperms.iter().enumerate() {
                    let q = sp.apply(p);
                    if table[q] == usize::MAX {
                        table[q] = tperms[s].apply(table[p]);
                        stack.push(q);
                    }
                }
            }
        }
        let map = EquivariantMap {
            source: source.clone(),
            target: target.clone(),
            rho: rho.clone(),
            choices,
            table,
        };
        debug_assert!(map.check().unwrap_or(false));
        out.push(map);
        if out.len() >= limit {
            break;
        }
        // odometer, last orbit fastest
        let mut d = idx.len();
        loop {
            if d == 0 {
                return Ok(out);
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < options[d].len() {
                break;
            }
            idx[d] = 0;
        }
    }
    Ok(out)
}

pub fn eval(map: &EquivariantMap, x: usize) -> Result<usize> {
    map.table.get(x).copied().ok_or(Error::NotInSet)
}

/// Evaluates through a chosen witness: `ρ(g)·f(anchor)` where `g·anchor = x`.
pub fn eval_with_witness(map: &EquivariantMap, x: usize, g: &GroupElement) -> Result<usize> {
    for c in &map.choices {
        if map.source.act(g, c.anchor)? == x {
            return map.target.act(&apply_hom(&map.rho, g)?, c.image);
        }
    }
    Err(Error::ConditionViolated(
        "witness does not reach the point from any anchor".into(),
    ))
}

/// Size of every fiber, `|G/L| / |H/K|`. Needs a transitive source and a
/// target on which `ρ(G)` is transitive.
pub fn preimage_size(map: &EquivariantMap) -> Result<usize> {
    if !map.source.is_transitive() {
        return Err(Error::NotTransitive("source action".into()));
    }
    if !map.target.is_transitive() {
        return Err(Error::NotTransitive("target action".into()));
    }
    if map.target.is_empty() || map.source.is_empty() {
        return Ok(0);
    }
    // ρ(G) must also move every target point to every other
    let tperms = rho_perms(&map.target, &map.rho)?;
    let mut seen = vec![false; map.target.len()];
    let mut stack = vec![map.table[0]];
    seen[map.table[0]] = true;
    while let Some(p) = stack.pop() {
        for t in &tperms {
            let q = t.apply(p);
            if !seen[q] {
                seen[q] = true;
                stack.push(q);
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::NotTransitive("image of the homomorphism on the target".into()));
    }
    let g_over_l = map.source.group.order()? / stabilizer(&map.source, 0)?.order()?;
    let h_over_k = map.target.group.order()? / stabilizer(&map.target, 0)?.order()?;
    Ok((g_over_l / h_over_k) as usize)
}

/// Every function satisfying the defining square, by depth-first search
/// over point assignments checked against every enumerated group element.
/// `cap` bounds the number of search nodes.
pub fn brute_force_equivariant(
    source: &GroupAction,
    target: &GroupAction,
    rho: &Homomorphism,
    cap: u128,
) -> Result<Vec<Vec<usize>>> {
    let en = source.group.enumerate()?;
    let sperms = source.element_perms()?;
    let tperms: Vec<Perm> = en
        .elements
        .iter()
        .map(|g| target.perm_of(&apply_hom(rho, g)?))
        .collect::<Result<_>>()?;
    let n = source.len();
    let mut f = vec![usize::MAX; n];
    let mut out = Vec::new();
    let mut visited: u128 = 0;

    fn ok(f: &[usize], x: usize, sperms: &[Perm], tperms: &[Perm]) -> bool {
        sperms.iter().zip(tperms).all(|(sp, tp)| {
            let y = sp.apply(x);
            f[y] == usize::MAX || f[y] == tp.apply(f[x])
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn go(
        x: usize,
        f: &mut Vec<usize>,
        m: usize,
        sperms: &[Perm],
        tperms: &[Perm],
        out: &mut Vec<Vec<usize>>,
        visited: &mut u128,
        cap: u128,
    ) -> Result<()> {
        if x == f.len() {
            out.push(f.clone());
            return Ok(());
        }
        for y in 0..m {
            *visited += 1;
            if *visited > cap {
                return Err(Error::OracleCapExceeded { cap });
            }
            f[x] = y;
            if ok(f, x, sperms, tperms) {
                go(x + 1, f, m, sperms, tperms, out, visited, cap)?;
            }
        }
        f[x] = usize::MAX;
        Ok(())
    }

    go(0, &mut f, target.len(), &sperms, &tperms, &mut out, &mut visited, cap)?;
    Ok(out)
}
