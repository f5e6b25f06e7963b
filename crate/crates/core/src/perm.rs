//! Permutations of `{1..p}`, their cycle types and integer partitions.

use std::fmt;

use crate::{Error, Result};

/// Largest `p` accepted by [`partitions_of`].
pub const MAX_PARTITION_SIZE: usize = 20;

/// A bijection of `{1..p}` stored as 1-based images: `images[k-1] = σ(k)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let p = images.len();
        if p == 0 {
            return Err(Error::InvalidPermutation("size must be >= 1".into()));
        }
        let mut seen = vec![false; p];
        for &v in &images {
            if v == 0 || v > p || seen[v - 1] {
                return Err(Error::InvalidPermutation(format!(
                    "{images:?} is not a bijection of 1..={p}"
                )));
            }
            seen[v - 1] = true;
        }
        Ok(Permutation { images })
    }

    pub fn identity(p: usize) -> Self {
        Permutation {
            images: (1..=p).collect(),
        }
    }

    /// Builds from 0-based images.
    pub(crate) fn from_zero_based(images: &[usize]) -> Self {
        Permutation {
            images: images.iter().map(|&v| v + 1).collect(),
        }
    }

    pub fn size(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// σ(k) for 1-based `k`.
    pub fn apply(&self, k: usize) -> usize {
        self.images[k - 1]
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &v)| v == i + 1)
    }

    pub fn cycle_type(&self) -> CycleType {
        cycle_type(self)
    }

    pub fn sign(&self) -> i32 {
        sign(self)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .images
            .iter()
            .enumerate()
            .map(|(i, v)| format!("{}→{}", i + 1, v))
            .collect();
        write!(f, "({})", parts.join(","))
    }
}

/// `(a∘b)(k) = a(b(k))`.
pub fn compose(a: &Permutation, b: &Permutation) -> Result<Permutation> {
    if a.size() != b.size() {
        return Err(Error::SizeMismatch {
            left: a.size(),
            right: b.size(),
        });
    }
    Ok(Permutation {
        images: b.images.iter().map(|&k| a.images[k - 1]).collect(),
    })
}

pub fn inverse(a: &Permutation) -> Permutation {
    let mut images = vec![0; a.size()];
    for (k, &v) in a.images.iter().enumerate() {
        images[v - 1] = k + 1;
    }
    Permutation { images }
}

/// Disjoint-cycle lengths, sorted non-increasing.
pub fn cycle_type(a: &Permutation) -> CycleType {
    let p = a.size();
    let mut seen = vec![false; p];
    let mut parts = Vec::new();
    for start in 0..p {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut k = start;
        while !seen[k] {
            seen[k] = true;
            k = a.images[k] - 1;
            len += 1;
        }
        parts.push(len);
    }
    CycleType::from_parts(parts)
}

/// (−1)^(p − m) with m the number of cycles.
pub fn sign(a: &Permutation) -> i32 {
    let ct = cycle_type(a);
    if (ct.total() - ct.len()).is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// An integer partition, kept sorted non-increasing.
///
/// The empty partition (total 0) is allowed; it is the base of the
/// Weingarten recursion.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CycleType {
    parts: Vec<usize>,
}

impl CycleType {
    /// Canonicalises `parts`. Zero parts are rejected.
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.contains(&0) {
            return Err(Error::Domain(format!("partition {parts:?} has a zero part")));
        }
        Ok(Self::from_parts(parts))
    }

    pub(crate) fn from_parts(mut parts: Vec<usize>) -> Self {
        parts.sort_unstable_by(|a, b| b.cmp(a));
        CycleType { parts }
    }

    pub fn empty() -> Self {
        CycleType { parts: Vec::new() }
    }

    /// `[1, 1, …, 1]` of total `p`.
    pub fn ones(p: usize) -> Self {
        CycleType { parts: vec![1; p] }
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// Sum of the parts.
    pub fn total(&self) -> usize {
        self.parts.iter().sum()
    }

    /// Number of parts.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }
}

impl fmt::Display for CycleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        f.write_str(&s.join(","))
    }
}

/// All partitions of `p` in reverse-lexicographic order, e.g. `3 → [3], [2,1], [1,1,1]`.
pub fn partitions_of(p: usize) -> Result<Vec<CycleType>> {
    if p == 0 || p > MAX_PARTITION_SIZE {
        return Err(Error::Domain(format!(
            "partition size {p} outside 1..={MAX_PARTITION_SIZE}"
        )));
    }
    Ok(partitions_unchecked(p))
}

pub(crate) fn partitions_unchecked(p: usize) -> Vec<CycleType> {
    fn rec(remaining: usize, max_part: usize, prefix: &mut Vec<usize>, out: &mut Vec<CycleType>) {
        if remaining == 0 {
            out.push(CycleType {
                parts: prefix.clone(),
            });
            return;
        }
        for part in (1..=remaining.min(max_part)).rev() {
            prefix.push(part);
            rec(remaining - part, part, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(p, p, &mut Vec::new(), &mut out);
    out
}

/// Every permutation of `{1..p}` in lexicographic order of images.
pub fn all_permutations(p: usize) -> Vec<Permutation> {
    let mut current: Vec<usize> = (0..p).collect();
    let mut out = vec![Permutation::from_zero_based(&current)];
    // next lexicographic permutation
    while let Some(i) = (1..p).rev().find(|&i| current[i - 1] < current[i]) {
        let j = (i..p).rev().find(|&j| current[j] > current[i - 1]).unwrap();
        current.swap(i - 1, j);
        current[i..].reverse();
        out.push(Permutation::from_zero_based(&current));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn perm(v: &[usize]) -> Permutation {
        Permutation::new(v.to_vec()).unwrap()
    }

    /// Partition numbers from Euler's pentagonal recurrence.
    fn partition_count(n: usize) -> usize {
        let mut p = vec![0i64; n + 1];
        p[0] = 1;
        for m in 1..=n {
            let mut acc = 0i64;
            for k in 1.. {
                let k = k as i64;
                let g1 = (k * (3 * k - 1) / 2) as usize;
                if g1 > m {
                    break;
                }
                let s = if k % 2 == 1 { 1 } else { -1 };
                acc += s * p[m - g1];
                let g2 = (k * (3 * k + 1) / 2) as usize;
                if g2 <= m {
                    acc += s * p[m - g2];
                }
            }
            p[m] = acc;
        }
        p[n] as usize
    }

    #[test]
    fn compose_examples() {
        let s = perm(&[2, 3, 1]);
        assert_eq!(compose(&Permutation::identity(3), &s).unwrap(), s);
        let a = perm(&[2, 1, 3]);
        let b = perm(&[3, 2, 1]);
        assert_eq!(compose(&a, &b).unwrap(), perm(&[3, 1, 2]));
        assert!(compose(&s, &inverse(&s)).unwrap().is_identity());
        assert!(matches!(
            compose(&a, &Permutation::identity(2)),
            Err(Error::SizeMismatch { .. })
        ));
    }

    #[test]
    fn inverse_examples() {
        assert!(inverse(&Permutation::identity(4)).is_identity());
        assert_eq!(inverse(&perm(&[2, 3, 1])), perm(&[3, 1, 2]));
    }

    #[test]
    fn cycle_type_examples() {
        assert_eq!(Permutation::identity(4).cycle_type().parts(), &[1, 1, 1, 1]);
        assert_eq!(perm(&[2, 1, 3]).cycle_type().parts(), &[2, 1]);
        assert_eq!(perm(&[2, 3, 1]).cycle_type().parts(), &[3]);
    }

    #[test]
    fn sign_examples() {
        assert_eq!(Permutation::identity(3).sign(), 1);
        assert_eq!(perm(&[2, 1, 3]).sign(), -1);
        assert_eq!(perm(&[2, 3, 1]).sign(), 1);
    }

    #[test]
    fn invalid_permutations() {
        assert!(Permutation::new(vec![1, 1]).is_err());
        assert!(Permutation::new(vec![0, 1]).is_err());
        assert!(Permutation::new(vec![]).is_err());
    }

    #[test]
    fn partitions_small() {
        let p1 = partitions_of(1).unwrap();
        assert_eq!(p1, vec![CycleType::from_parts(vec![1])]);
        let p3: Vec<Vec<usize>> = partitions_of(3)
            .unwrap()
            .iter()
            .map(|c| c.parts().to_vec())
            .collect();
        assert_eq!(p3, vec![vec![3], vec![2, 1], vec![1, 1, 1]]);
        assert_eq!(partitions_of(5).unwrap().len(), 7);
        assert!(partitions_of(0).is_err());
        assert!(partitions_of(21).is_err());
    }

    #[test]
    fn partitions_match_brute_force_and_recurrence() {
        for p in 1..=8 {
            // brute force: cycle types of all permutations
            let mut seen: Vec<CycleType> = all_permutations(p).iter().map(cycle_type).collect();
            seen.sort();
            seen.dedup();
            let mut listed = partitions_of(p).unwrap();
            assert_eq!(listed.len(), partition_count(p));
            listed.sort();
            assert_eq!(listed, seen);
        }
        for p in 9..=20 {
            assert_eq!(partitions_of(p).unwrap().len(), partition_count(p));
        }
    }

    #[test]
    fn partitions_are_reverse_lex_and_unique() {
        let ps = partitions_of(7).unwrap();
        for w in ps.windows(2) {
            assert!(w[0] > w[1]);
        }
    }

    #[test]
    fn all_permutations_counts() {
        assert_eq!(all_permutations(1).len(), 1);
        assert_eq!(all_permutations(4).len(), 24);
        let mut v = all_permutations(5);
        v.dedup();
        assert_eq!(v.len(), 120);
    }

    fn arb_perm(p: usize) -> impl Strategy<Value = Permutation> {
        Just((1..=p).collect::<Vec<_>>())
            .prop_shuffle()
            .prop_map(|v| Permutation::new(v).unwrap())
    }

    fn triple() -> impl Strategy<Value = (Permutation, Permutation, Permutation)> {
        (1usize..=6).prop_flat_map(|p| (arb_perm(p), arb_perm(p), arb_perm(p)))
    }

    proptest! {
        #[test]
        fn relative_cycle_type_invariant_under_left_shift((chi, s, t) in triple()) {
            let base = cycle_type(&compose(&inverse(&t), &s).unwrap());
            let cs = compose(&chi, &s).unwrap();
            let ct = compose(&chi, &t).unwrap();
            let shifted = cycle_type(&compose(&inverse(&ct), &cs).unwrap());
            prop_assert_eq!(base, shifted);
        }

        #[test]
        fn sign_is_multiplicative((a, b, _c) in triple()) {
            prop_assert_eq!(sign(&compose(&a, &b).unwrap()), sign(&a) * sign(&b));
        }

        #[test]
        fn inverse_is_an_involution((a, _b, _c) in triple()) {
            prop_assert_eq!(inverse(&inverse(&a)), a.clone());
            prop_assert!(compose(&a, &inverse(&a)).unwrap().is_identity());
        }
    }
}
