//! Homomorphisms from subgroups of S_q to ℤ/t for prime q.

use crate::error::{Error, Result};
use crate::groups::{make_hom, FiniteGroup, GroupElement, Homomorphism};

pub fn is_prime(q: u64) -> bool {
    q >= 2 && (2..).take_while(|d| d * d <= q).all(|d| q % d != 0)
}

/// Every nontrivial homomorphism `G → ℤ/t` for a permutation group
/// `G ≤ S_q`, ordered by the generator images.
///
/// For `t = q` these send every imprimitive element to 0 and exist only when
/// `G` is generated by one full cycle. For other `t` a subgroup with an
/// element of order dividing `t` can have more, such as the sign map of
/// S₃ to ℤ/2, whether or not `q | t`.
pub fn enumerate_homs_to_cyclic(g: &FiniteGroup, q: u64, t: u64) -> Result<Vec<Homomorphism>> {
    if !is_prime(q) {
        return Err(Error::NotPrime(q));
    }
    if g.degree() != Some(q as usize) {
        return Err(Error::StructureMismatch(format!("group does not act on {q} points")));
    }
    if t <= 1 {
        return Ok(Vec::new());
    }
    let target = FiniteGroup::cyclic(t);
    // an image of s must have order dividing the order of s
    let orders: Vec<u64> = g.generators().iter().map(|s| element_order(g, s)).collect();
    let choices: Vec<Vec<i64>> = orders
        .iter()
        .map(|&o| (0..t as i64).filter(|&a| (a as u64 * o) % t == 0).collect())
        .collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; choices.len()];
    loop {
        let images: Vec<i64> = idx.iter().zip(&choices).map(|(&i, c)| c[i]).collect();
        if images.iter().any(|&a| a != 0) {
            let els = images.iter().map(|&a| GroupElement::Mod(vec![a])).collect();
            if let Ok(rho) = make_hom(g, &target, els) {
                out.push(rho);
            }
        }
        // odometer, last generator fastest
        let mut p = choices.len();
        loop {
            if p == 0 {
                return Ok(out);
            }
            p -= 1;
            idx[p] += 1;
            if idx[p] < choices[p].len() {
                break;
            }
            idx[p] = 0;
        }
    }
}

fn element_order(g: &FiniteGroup, s: &GroupElement) -> u64 {
    let mut x = s.clone();
    let mut o = 1;
    while !g.is_identity(&x) {
        x = g.compose(&x, s).expect("same group");
        o += 1;
    }
    o
}
