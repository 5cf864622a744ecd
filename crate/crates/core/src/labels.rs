//! Neighbor arithmetic on labels alone.
//!
//! Every neighbor of a vertex is its group companion (same degree), one of its
//! sons (lower degree) or its father (higher degree). All three are computed
//! here from `(m, t, label)` without consulting a built graph.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::DEFAULT_MAX_VERTICES;
use crate::label::{l_max, Label};

/// Neighbors of a vertex split by degree relative to the vertex itself.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NeighborPartition {
    pub equal: Vec<Label>,
    pub lower: Vec<Label>,
    pub higher: Vec<Label>,
}

impl NeighborPartition {
    /// All neighbors, sorted.
    pub fn all(&self) -> Vec<Label> {
        let mut v: Vec<Label> = self
            .equal
            .iter()
            .chain(&self.lower)
            .chain(&self.higher)
            .copied()
            .collect();
        v.sort();
        v
    }

    pub fn len(&self) -> usize {
        self.equal.len() + self.lower.len() + self.higher.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Checks that `label` names a vertex of `K_{m,t}`.
pub fn validate(m: u32, t: u32, label: &Label) -> Result<()> {
    if m == 0 {
        return Err(Error::Argument("m must be at least 1".into()));
    }
    if label.birth_step() > t {
        return Err(Error::Lookup(format!(
            "{label} is born at step {} but the network stops at t = {t}",
            label.birth_step()
        )));
    }
    if let Some(index) = label.index() {
        let max = l_max(m, &label.bits())?;
        if index > max {
            return Err(Error::Lookup(format!(
                "{label}: index exceeds group size {max}"
            )));
        }
    }
    Ok(())
}

/// Width of the index block a father born at step `i` fills at step `j`:
/// `2m(m+1)^(j-i-1)`.
pub(crate) fn block_width(m: u32, steps_after_birth: u32) -> u64 {
    let m = u64::from(m);
    2 * m * (m + 1).pow(steps_after_birth - 1)
}

/// The other son of the same group: odd index pairs with the next, even with
/// the previous.
pub fn companion(label: &Label) -> Result<Label> {
    match label.index() {
        None => Err(Error::domain(
            "companion",
            format!("hub {label} has no group partner"),
        )),
        Some(l) if l % 2 == 1 => Ok(label.with_index(l + 1)),
        Some(l) => Ok(label.with_index(l - 1)),
    }
}

/// Sons of `label`, ordered by birth step then index.
///
/// Fails with a size-cap error when there are more than
/// [`DEFAULT_MAX_VERTICES`] of them.
pub fn children(m: u32, t: u32, label: &Label) -> Result<Vec<Label>> {
    validate(m, t, label)?;
    let birth = label.birth_step();
    let count = (u128::from(m) + 1)
        .checked_pow(t - birth)
        .map_or(u128::MAX, |p| 2 * p - 2);
    if count > u128::from(DEFAULT_MAX_VERTICES) {
        return Err(Error::SizeCap {
            requested: count,
            cap: DEFAULT_MAX_VERTICES,
        });
    }
    let mut out = Vec::new();
    for step in birth + 1..=t {
        let after = step - birth;
        let bits = label.bits().child_pattern((after - 1) as usize);
        let width = block_width(m, after);
        let base = (label.block_index() - 1) * width;
        out.extend((1..=width).map(|k| Label::raw(label.subnet(), bits, base + k)));
    }
    Ok(out)
}

/// The single higher-degree neighbor of a non-hub vertex.
///
/// With the rightmost zero of the bit string at (1-based) position `j` and
/// `i` bits in total, the father keeps bits `b_1..b_(j-1)` and index
/// `ceil(l / (2m(m+1)^(i-j)))`. When `j = 1` the father is the subnet's hub.
pub fn father(m: u32, label: &Label) -> Result<Label> {
    if m == 0 {
        return Err(Error::Argument("m must be at least 1".into()));
    }
    let index = label.index().ok_or_else(|| {
        Error::domain(
            "father",
            format!("hub {label} has no higher-degree neighbor"),
        )
    })?;
    let bits = label.bits();
    let zero = bits
        .rightmost_zero()
        .expect("non-hub bit strings start with 0");
    if zero == 0 {
        return Label::hub(label.subnet());
    }
    // Every bit right of the rightmost zero is 1, so their sum is a length.
    let trailing_ones = (bits.len() - zero - 1) as u32;
    let divisor = block_width(m, trailing_ones + 1);
    Ok(Label::raw(
        label.subnet(),
        bits.truncated(zero),
        index.div_ceil(divisor),
    ))
}

/// `2(m+1)^(t - birth)`.
pub fn degree_of(m: u32, t: u32, label: &Label) -> Result<u64> {
    validate(m, t, label)?;
    (u64::from(m) + 1)
        .checked_pow(t - label.birth_step())
        .and_then(|p| p.checked_mul(2))
        .ok_or_else(|| Error::Argument(format!("degree of {label} overflows u64")))
}

pub fn neighbor_partition(m: u32, t: u32, label: &Label) -> Result<NeighborPartition> {
    let lower = children(m, t, label)?;
    if label.is_hub() {
        // Hubs: the other two hubs have the same degree, nothing is higher.
        let equal = (1..=3u8)
            .filter(|&n| n != label.subnet())
            .map(Label::hub)
            .collect::<Result<Vec<_>>>()?;
        return Ok(NeighborPartition {
            equal,
            lower,
            higher: Vec::new(),
        });
    }
    Ok(NeighborPartition {
        equal: vec![companion(label)?],
        lower,
        higher: vec![father(m, label)?],
    })
}
