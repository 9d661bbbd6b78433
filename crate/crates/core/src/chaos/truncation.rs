use std::collections::HashMap;

use super::{ChaosError, MultiIndex, Slot};

/// The truncated index set `J_{N,I}` over `K` Wiener channels.
///
/// Members are graded by `|alpha|`; within a grade the dense order vectors
/// (slots sorted by `(k, p)`) are listed in descending lexicographic order, so
/// `e_{1,1}` precedes `e_{1,2}`. Position 0 is always the zero index.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncationSet {
    num_wiener: u32,
    max_order: u32,
    max_basis: u32,
    members: Vec<MultiIndex>,
    lookup: HashMap<MultiIndex, usize>,
}

/// `C(n + s, s)` with overflow detection.
pub fn truncation_count(num_slots: u64, max_order: u64) -> Option<usize> {
    // C(N+S, S) built incrementally as prod_{i=1..N} (S+i)/i, exact at every step.
    let mut acc: u128 = 1;
    for i in 1..=u128::from(max_order) {
        acc = acc.checked_mul(u128::from(num_slots) + i)? / i;
    }
    usize::try_from(acc).ok()
}

impl TruncationSet {
    pub fn enumerate(num_wiener: u32, max_order: u32, max_basis: u32) -> Result<Self, ChaosError> {
        if num_wiener == 0 {
            return Err(ChaosError::ZeroWienerCount);
        }
        if max_basis == 0 {
            return Err(ChaosError::ZeroBasisIndex);
        }
        let num_slots = u64::from(num_wiener) * u64::from(max_basis);
        let count = truncation_count(num_slots, u64::from(max_order)).ok_or(ChaosError::TruncationOverflow {
            num_wiener,
            max_order,
            max_basis,
        })?;
        // Refuse sets that could never be materialized.
        if count > (isize::MAX as usize) / std::mem::size_of::<MultiIndex>() {
            return Err(ChaosError::TruncationOverflow { num_wiener, max_order, max_basis });
        }

        let slots: Vec<Slot> =
            (1..=num_wiener).flat_map(|k| (1..=max_basis).map(move |p| Slot { wiener: k, basis: p })).collect();

        let mut members = Vec::with_capacity(count);
        let mut orders = vec![0u32; slots.len()];
        for grade in 0..=max_order {
            compositions(grade, 0, &mut orders, &mut |o| {
                members.push(MultiIndex::from_slot_orders(&slots, o));
            });
        }
        debug_assert_eq!(members.len(), count);

        let lookup = members.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        Ok(Self { num_wiener, max_order, max_basis, members, lookup })
    }

    pub fn num_wiener(&self) -> u32 {
        self.num_wiener
    }

    pub fn max_order(&self) -> u32 {
        self.max_order
    }

    pub fn max_basis(&self) -> u32 {
        self.max_basis
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[MultiIndex] {
        &self.members
    }

    pub fn get(&self, position: usize) -> Option<&MultiIndex> {
        self.members.get(position)
    }

    pub fn position(&self, alpha: &MultiIndex) -> Option<usize> {
        self.lookup.get(alpha).copied()
    }

    pub fn contains(&self, alpha: &MultiIndex) -> bool {
        self.lookup.contains_key(alpha)
    }
}

/// Visits every split of `remaining` over `orders[slot..]`, first slot largest first.
fn compositions(remaining: u32, slot: usize, orders: &mut [u32], visit: &mut impl FnMut(&[u32])) {
    if slot + 1 == orders.len() {
        orders[slot] = remaining;
        visit(orders);
        orders[slot] = 0;
        return;
    }
    for v in (0..=remaining).rev() {
        orders[slot] = v;
        compositions(remaining - v, slot + 1, orders, visit);
    }
    orders[slot] = 0;
}
