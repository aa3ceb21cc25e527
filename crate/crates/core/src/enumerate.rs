//! Exhaustive generation of balanced families.
//!
//! A balanced family contains every ordered assignment of disjoint coordinate
//! blocks with sizes `α̃_1, …, α̃_N`; the unassigned coordinates form `R`.
//! Orderings of equal-length blocks are kept as distinct members, so the
//! family has exactly `J_max` elements.

use std::collections::HashMap;

use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::exponents::{j_max, BalancedType};
use crate::multi_index::MultiIndex;
use crate::symmetry::Symmetry;

/// Default limit on the family size accepted by [`enumerate_symmetries`].
pub const DEFAULT_CAP: u64 = 1_000_000;

/// All `J_max` ordered block assignments of type `t`, in lexicographic order
/// of the block contents.
pub fn enumerate_symmetries(t: &BalancedType, cap: u64) -> Result<Vec<Symmetry>> {
    let total = j_max(t);
    let size = match total.to_u64() {
        Some(v) if v <= cap => v as usize,
        _ => return Err(Error::CapExceeded { j_max: total.to_string(), cap }),
    };
    let mut out = Vec::with_capacity(size);
    let mut blocks = Vec::with_capacity(t.lengths().len());
    assign(t.n(), t.lengths(), 0, &mut blocks, &mut out)?;
    debug_assert_eq!(out.len(), size);
    Ok(out)
}

fn assign(
    n: usize,
    lengths: &[usize],
    used: u64,
    blocks: &mut Vec<MultiIndex>,
    out: &mut Vec<Symmetry>,
) -> Result<()> {
    let Some((&len, rest)) = lengths.split_first() else {
        out.push(Symmetry::new(blocks.clone())?);
        return Ok(());
    };
    let free: Vec<usize> = (0..n).filter(|&k| used >> k & 1 == 0).collect();
    for combo in combinations(&free, len) {
        let mask = combo.iter().fold(0u64, |m, &k| m | 1 << k);
        blocks.push(MultiIndex::from_mask(n, mask)?);
        assign(n, rest, used | mask, blocks, out)?;
        blocks.pop();
    }
    Ok(())
}

/// `k`-subsets of `items` in lexicographic order.
fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k > items.len() {
        return out;
    }
    loop {
        out.push(idx.iter().map(|&i| items[i]).collect());
        let Some(pos) = (0..k).rev().find(|&p| idx[p] < items.len() - k + p) else {
            return out;
        };
        idx[pos] += 1;
        for q in pos + 1..k {
            idx[q] = idx[q - 1] + 1;
        }
    }
}

/// Groups symmetries that differ only by the order of equal-length blocks.
/// Classes appear in order of their first member.
pub fn canonical_classes(fams: &[Symmetry]) -> Vec<Vec<Symmetry>> {
    let mut index: HashMap<Symmetry, usize> = HashMap::new();
    let mut classes: Vec<Vec<Symmetry>> = Vec::new();
    for s in fams {
        let key = s.canonical();
        let slot = *index.entry(key).or_insert_with(|| {
            classes.push(Vec::new());
            classes.len() - 1
        });
        classes[slot].push(s.clone());
    }
    classes
}
