use std::collections::BTreeMap;
use std::fmt;

use super::ChaosError;

/// A `(k, p)` position: Wiener channel `k` and basis function `p`, both 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Slot {
    pub wiener: u32,
    pub basis: u32,
}

impl Slot {
    pub fn new(wiener: u32, basis: u32) -> Result<Self, ChaosError> {
        if wiener == 0 || basis == 0 {
            return Err(ChaosError::ZeroSlot { wiener, basis });
        }
        Ok(Self { wiener, basis })
    }
}

/// Finitely supported multi-index `alpha_{k,p}`, stored sparsely.
///
/// Zero orders are never stored, so structural equality is value equality.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex {
    entries: BTreeMap<Slot, u32>,
}

impl MultiIndex {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `e_{k,p}`.
    pub fn unit(wiener: u32, basis: u32) -> Result<Self, ChaosError> {
        Self::from_entries([(wiener, basis, 1)])
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (u32, u32, u32)>) -> Result<Self, ChaosError> {
        let mut out = Self::zero();
        for (wiener, basis, order) in entries {
            let slot = Slot::new(wiener, basis)?;
            if order > 0 {
                *out.entries.entry(slot).or_insert(0) += order;
            }
        }
        Ok(out)
    }

    pub(crate) fn from_slot_orders(slots: &[Slot], orders: &[u32]) -> Self {
        let entries = slots.iter().zip(orders).filter(|(_, &o)| o > 0).map(|(&s, &o)| (s, o)).collect();
        Self { entries }
    }

    pub fn get(&self, slot: Slot) -> u32 {
        self.entries.get(&slot).copied().unwrap_or(0)
    }

    /// `|alpha|`.
    pub fn order(&self) -> u32 {
        self.entries.values().sum()
    }

    /// `d(alpha)`: largest active basis index over all channels, 0 when empty.
    pub fn degree(&self) -> u32 {
        self.entries.keys().map(|s| s.basis).max().unwrap_or(0)
    }

    pub fn max_wiener(&self) -> u32 {
        self.entries.keys().map(|s| s.wiener).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Slot, u32)> + '_ {
        self.entries.iter().map(|(&s, &o)| (s, o))
    }

    /// The single slot of a first-order index.
    pub fn as_unit(&self) -> Option<Slot> {
        match self.entries.iter().next() {
            Some((&slot, &1)) if self.entries.len() == 1 => Some(slot),
            _ => None,
        }
    }

    /// Componentwise `self <= other`.
    pub fn is_le(&self, other: &MultiIndex) -> bool {
        self.entries.iter().all(|(s, &o)| o <= other.get(*s))
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        let mut out = self.clone();
        for (s, o) in other.iter() {
            *out.entries.entry(s).or_insert(0) += o;
        }
        out
    }

    /// `self - other`, or `None` unless `other <= self`.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        if !other.is_le(self) {
            return None;
        }
        let mut out = self.clone();
        for (s, o) in other.iter() {
            let v = out.entries.get_mut(&s).expect("checked by is_le");
            *v -= o;
            if *v == 0 {
                out.entries.remove(&s);
            }
        }
        Some(out)
    }

    /// Componentwise minimum.
    pub fn meet(&self, other: &MultiIndex) -> MultiIndex {
        let entries = self
            .entries
            .iter()
            .filter_map(|(s, &o)| {
                let m = o.min(other.get(*s));
                (m > 0).then_some((*s, m))
            })
            .collect();
        MultiIndex { entries }
    }

    /// All `beta` with `0 <= beta <= self`.
    pub fn lower_set(&self) -> Vec<MultiIndex> {
        let slots: Vec<(Slot, u32)> = self.iter().collect();
        let mut out = vec![MultiIndex::zero()];
        for (slot, order) in slots {
            let mut next = Vec::with_capacity(out.len() * (order as usize + 1));
            for base in &out {
                for v in 0..=order {
                    let mut m = base.clone();
                    if v > 0 {
                        m.entries.insert(slot, v);
                    }
                    next.push(m);
                }
            }
            out = next;
        }
        out
    }
}

impl fmt::Display for MultiIndex {
    /// `0` for the empty index, otherwise `e(k,p)^a*...` terms.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (s, o)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            if o == 1 {
                write!(f, "e({},{})", s.wiener, s.basis)?;
            } else {
                write!(f, "{}e({},{})", o, s.wiener, s.basis)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(entries: &[(u32, u32, u32)]) -> MultiIndex {
        MultiIndex::from_entries(entries.iter().copied()).unwrap()
    }

    #[test]
    fn canonical_form_drops_zero_orders() {
        assert_eq!(mi(&[(1, 1, 0), (1, 2, 0)]), MultiIndex::zero());
        assert_eq!(mi(&[(1, 2, 1), (1, 1, 0)]), MultiIndex::unit(1, 2).unwrap());
        assert!(MultiIndex::from_entries([(0, 1, 1)]).is_err());
    }

    #[test]
    fn order_and_degree() {
        let a = mi(&[(1, 1, 2), (2, 3, 1)]);
        assert_eq!(a.order(), 3);
        assert_eq!(a.degree(), 3);
        assert_eq!(MultiIndex::zero().order(), 0);
        assert_eq!(MultiIndex::zero().degree(), 0);
        // single-channel indices still carry a degree
        assert_eq!(mi(&[(1, 2, 1)]).degree(), 2);
    }

    #[test]
    fn arithmetic() {
        let a = mi(&[(1, 1, 2), (1, 2, 1)]);
        let b = mi(&[(1, 1, 1)]);
        assert!(b.is_le(&a));
        assert!(!a.is_le(&b));
        assert_eq!(a.checked_sub(&b).unwrap(), mi(&[(1, 1, 1), (1, 2, 1)]));
        assert_eq!(b.checked_sub(&a), None);
        assert_eq!(a.checked_sub(&a).unwrap(), MultiIndex::zero());
        assert_eq!(b.add(&b), mi(&[(1, 1, 2)]));
        assert_eq!(a.lower_set().len(), 6);
        assert_eq!(MultiIndex::zero().lower_set(), vec![MultiIndex::zero()]);
        assert_eq!(a.meet(&mi(&[(1, 1, 5), (2, 1, 1)])), mi(&[(1, 1, 2)]));
        assert_eq!(a.meet(&MultiIndex::zero()), MultiIndex::zero());
    }

    #[test]
    fn display() {
        assert_eq!(MultiIndex::zero().to_string(), "0");
        assert_eq!(mi(&[(1, 1, 2), (1, 2, 1)]).to_string(), "2e(1,1)+e(1,2)");
    }
}
