use std::fmt;

use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::error::{domain, Result};

/// A partial function X → Y ∪ {⊥} over a finite indexed domain.
///
/// Inputs are indices `0..len`; values are range indices with ⊥ stored as M.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Database {
    values: Vec<u16>,
    bottom: u16,
}

impl Database {
    /// The all-⊥ database.
    pub fn empty(inputs: usize, range: usize) -> Self {
        Self { values: vec![range as u16; inputs], bottom: range as u16 }
    }

    pub fn from_values(values: Vec<usize>, range: usize) -> Result<Self> {
        if values.iter().any(|&v| v > range) {
            return domain(format!("database value outside 0..={range}"));
        }
        Ok(Self { values: values.into_iter().map(|v| v as u16).collect(), bottom: range as u16 })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// M, which is also the encoding of ⊥.
    pub fn range(&self) -> usize {
        self.bottom as usize
    }

    pub fn get(&self, x: usize) -> usize {
        self.values[x] as usize
    }

    pub fn is_bottom(&self, x: usize) -> bool {
        self.values[x] == self.bottom
    }

    pub fn set(&mut self, x: usize, v: usize) {
        debug_assert!(v <= self.bottom as usize);
        self.values[x] = v as u16;
    }

    /// D[x ↦ v].
    pub fn with(&self, x: usize, v: usize) -> Self {
        let mut d = self.clone();
        d.set(x, v);
        d
    }

    /// D[x⃗ ↦ v⃗].
    pub fn with_many(&self, xs: &[usize], vs: &[usize]) -> Self {
        let mut d = self.clone();
        for (&x, &v) in xs.iter().zip(vs) {
            d.set(x, v);
        }
        d
    }

    pub fn values(&self) -> impl Iterator<Item = usize> + '_ {
        self.values.iter().map(|&v| v as usize)
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|&x| !self.is_bottom(x)).collect()
    }

    pub fn support_size(&self) -> usize {
        self.values.iter().filter(|&&v| v != self.bottom).count()
    }

    /// Defined entries as (x, y) pairs in domain order.
    pub fn sparse_encode(&self) -> Vec<(usize, usize)> {
        self.support().into_iter().map(|x| (x, self.get(x))).collect()
    }

    pub fn sparse_decode(pairs: &[(usize, usize)], inputs: usize, range: usize) -> Result<Self> {
        let mut d = Self::empty(inputs, range);
        let mut last = None;
        for &(x, y) in pairs {
            if x >= inputs || y >= range {
                return domain(format!("pair ({x}, {y}) outside domain"));
            }
            if last.is_some_and(|l| l >= x) {
                return domain("sparse encoding must be strictly sorted by input");
            }
            last = Some(x);
            d.set(x, y);
        }
        Ok(d)
    }

    /// Enumerates all (M+1)^len databases in canonical order.
    pub fn all(inputs: usize, range: usize) -> impl Iterator<Item = Database> {
        let base = range + 1;
        let total = base.pow(inputs as u32);
        (0..total).map(move |mut idx| {
            let mut values = vec![0usize; inputs];
            for slot in values.iter_mut().rev() {
                *slot = idx % base;
                idx /= base;
            }
            Database::from_values(values, range).expect("digits are below base")
        })
    }
}

impl fmt::Debug for Database {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Database {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            if *v == self.bottom {
                write!(f, "⊥")?;
            } else {
                write!(f, "{v}")?;
            }
        }
        write!(f, "]")
    }
}

/// Serialized as an array with `null` for ⊥.
impl Serialize for Database {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.len()))?;
        for (x, v) in self.values.iter().enumerate() {
            if self.is_bottom(x) {
                seq.serialize_element(&Option::<u16>::None)?;
            } else {
                seq.serialize_element(&Some(*v))?;
            }
        }
        seq.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn encode_worked_example() {
        // X = (a, b, c), D = {a ↦ 1, c ↦ 0}.
        let d = Database::from_values(vec![1, 2, 0], 2).unwrap();
        assert_eq!(d.sparse_encode(), vec![(0, 1), (2, 0)]);
        assert!(Database::empty(3, 2).sparse_encode().is_empty());
        assert_eq!(d.to_string(), "[1,⊥,0]");
        assert_eq!(serde_json::to_string(&d).unwrap(), "[1,null,0]");
    }

    #[test]
    fn decode_rejects_unsorted_or_out_of_range() {
        assert!(Database::sparse_decode(&[(1, 0), (0, 1)], 3, 2).is_err());
        assert!(Database::sparse_decode(&[(3, 0)], 3, 2).is_err());
        assert!(Database::sparse_decode(&[(0, 2)], 3, 2).is_err());
    }

    #[test]
    fn enumeration_is_complete_and_ordered() {
        let all: Vec<_> = Database::all(2, 2).collect();
        assert_eq!(all.len(), 9);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
    }

    proptest! {
        #[test]
        fn round_trip(values in proptest::collection::vec(0usize..=4, 0..8)) {
            let d = Database::from_values(values.clone(), 4).unwrap();
            let back = Database::sparse_decode(&d.sparse_encode(), values.len(), 4).unwrap();
            prop_assert_eq!(back, d);
        }
    }
}
