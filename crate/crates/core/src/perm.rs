//! Permutations on the dart set `{0, .., n-1}` of a ribbon graph.
//!
//! Composition convention: `compose(f, g)` means "apply `g` first, then `f`",
//! i.e. `(f ∘ g)(x) = f(g(x))`. All relation bookkeeping in this crate
//! (ρ2ρ1ρ0 = 1 and friends) follows that convention.

use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PermError {
    #[error("image list of length {0} is not a permutation (duplicate or out-of-range image)")]
    NotBijective(usize),
    #[error("cycle entry {0} is out of range for a permutation on {1} points")]
    CycleOutOfRange(u32, usize),
    #[error("point {0} appears in more than one cycle")]
    RepeatedPoint(u32),
    #[error("cannot parse permutation from {0:?}")]
    Parse(String),
}

/// A permutation stored as its image table: `images[x]` is the image of `x`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Perm {
    images: Vec<u32>,
}

impl Perm {
    pub fn identity(n: usize) -> Self {
        Perm {
            images: (0..n as u32).collect(),
        }
    }

    pub fn from_images(images: Vec<u32>) -> Result<Self, PermError> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &y in &images {
            if (y as usize) >= n || seen[y as usize] {
                return Err(PermError::NotBijective(n));
            }
            seen[y as usize] = true;
        }
        Ok(Perm { images })
    }

    /// Builds a permutation on `n` points from disjoint cycles; points not
    /// mentioned are fixed.
    pub fn from_cycles(n: usize, cycles: &[Vec<u32>]) -> Result<Self, PermError> {
        let mut images: Vec<u32> = (0..n as u32).collect();
        let mut seen = vec![false; n];
        for cycle in cycles {
            for &x in cycle {
                if (x as usize) >= n {
                    return Err(PermError::CycleOutOfRange(x, n));
                }
                if seen[x as usize] {
                    return Err(PermError::RepeatedPoint(x));
                }
                seen[x as usize] = true;
            }
            for (i, &x) in cycle.iter().enumerate() {
                images[x as usize] = cycle[(i + 1) % cycle.len()];
            }
        }
        Ok(Perm { images })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    #[inline]
    pub fn apply(&self, x: u32) -> u32 {
        self.images[x as usize]
    }

    pub fn images(&self) -> &[u32] {
        &self.images
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0u32; self.images.len()];
        for (x, &y) in self.images.iter().enumerate() {
            inv[y as usize] = x as u32;
        }
        Perm { images: inv }
    }

    /// `(f ∘ g)(x) = f(g(x))`.
    pub fn compose(f: &Perm, g: &Perm) -> Perm {
        debug_assert_eq!(f.len(), g.len());
        Perm {
            images: g.images.iter().map(|&x| f.apply(x)).collect(),
        }
    }

    /// Conjugation `s ∘ self ∘ s⁻¹`: the "same" permutation after relabeling
    /// points by `s`.
    pub fn conjugate_by(&self, s: &Perm) -> Perm {
        let mut images = vec![0u32; self.len()];
        for x in 0..self.len() as u32 {
            images[s.apply(x) as usize] = s.apply(self.apply(x));
        }
        Perm { images }
    }

    /// Cycle decomposition. Each cycle starts at its minimal point; cycles are
    /// sorted by that minimum. Fixed points are included as 1-cycles.
    pub fn cycles(&self) -> Vec<Vec<u32>> {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n as u32 {
            if seen[start as usize] {
                continue;
            }
            let mut cycle = vec![start];
            seen[start as usize] = true;
            let mut x = self.apply(start);
            while x != start {
                seen[x as usize] = true;
                cycle.push(x);
                x = self.apply(x);
            }
            out.push(cycle);
        }
        out
    }

    pub fn cycle_count(&self) -> usize {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut count = 0;
        for start in 0..n as u32 {
            if seen[start as usize] {
                continue;
            }
            count += 1;
            let mut x = start;
            loop {
                seen[x as usize] = true;
                x = self.apply(x);
                if x == start {
                    break;
                }
            }
        }
        count
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(x, &y)| x as u32 == y)
    }

    pub fn is_fixed_point_free_involution(&self) -> bool {
        self.images
            .iter()
            .enumerate()
            .all(|(x, &y)| x as u32 != y && self.apply(y) == x as u32)
    }

    /// Parses cycle notation like `"(0 2 4)(1 3 5)"`.
    pub fn parse_cycles(n: usize, s: &str) -> Result<Self, PermError> {
        let s = s.trim();
        let mut cycles = Vec::new();
        let mut rest = s;
        while !rest.is_empty() {
            let open = rest.find('(').ok_or_else(|| PermError::Parse(s.into()))?;
            let close = rest.find(')').ok_or_else(|| PermError::Parse(s.into()))?;
            if close < open {
                return Err(PermError::Parse(s.into()));
            }
            let inner = &rest[open + 1..close];
            let cycle: Vec<u32> = inner
                .split_whitespace()
                .map(|tok| tok.parse::<u32>().map_err(|_| PermError::Parse(s.into())))
                .collect::<Result<_, _>>()?;
            if cycle.is_empty() {
                return Err(PermError::Parse(s.into()));
            }
            cycles.push(cycle);
            rest = rest[close + 1..].trim_start();
        }
        Perm::from_cycles(n, &cycles)
    }
}

impl fmt::Display for Perm {
    /// Cycle notation; fixed points are omitted unless the permutation is the
    /// identity, which prints as `()`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles: Vec<Vec<u32>> = self.cycles().into_iter().filter(|c| c.len() > 1).collect();
        if cycles.is_empty() {
            return write!(f, "()");
        }
        for cycle in cycles {
            write!(f, "(")?;
            for (i, x) in cycle.iter().enumerate() {
                if i > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Perm[{self}]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compose_applies_right_factor_first() {
        let f = Perm::from_cycles(3, &[vec![0, 1]]).unwrap();
        let g = Perm::from_cycles(3, &[vec![1, 2]]).unwrap();
        // (f ∘ g)(1) = f(2) = 2; (f ∘ g)(2) = f(1) = 0.
        let fg = Perm::compose(&f, &g);
        assert_eq!(fg.apply(0), 1);
        assert_eq!(fg.apply(1), 2);
        assert_eq!(fg.apply(2), 0);
    }

    #[test]
    fn inverse_roundtrip() {
        let p = Perm::from_cycles(6, &[vec![0, 2, 4], vec![1, 3, 5]]).unwrap();
        assert!(Perm::compose(&p, &p.inverse()).is_identity());
        assert!(Perm::compose(&p.inverse(), &p).is_identity());
    }

    #[test]
    fn cycles_roundtrip_and_display() {
        let p = Perm::from_cycles(6, &[vec![0, 2, 4], vec![1, 3, 5]]).unwrap();
        assert_eq!(p.cycles(), vec![vec![0, 2, 4], vec![1, 3, 5]]);
        assert_eq!(p.to_string(), "(0 2 4)(1 3 5)");
        let q = Perm::parse_cycles(6, "(0 2 4)(1 3 5)").unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn involution_detection() {
        let p = Perm::from_cycles(4, &[vec![0, 1], vec![2, 3]]).unwrap();
        assert!(p.is_fixed_point_free_involution());
        let with_fixed = Perm::from_cycles(3, &[vec![0, 1]]).unwrap();
        assert!(!with_fixed.is_fixed_point_free_involution());
    }

    #[test]
    fn conjugation_relabels_cycles() {
        let p = Perm::from_cycles(4, &[vec![0, 1, 2]]).unwrap();
        let s = Perm::from_cycles(4, &[vec![0, 3]]).unwrap();
        let q = p.conjugate_by(&s);
        assert_eq!(q.cycles(), vec![vec![0], vec![1, 2, 3]]);
    }

    #[test]
    fn rejects_malformed() {
        assert!(Perm::from_images(vec![0, 0]).is_err());
        assert!(Perm::from_images(vec![2, 1]).is_err());
        assert!(Perm::from_cycles(3, &[vec![0, 3]]).is_err());
        assert!(Perm::from_cycles(3, &[vec![0, 1], vec![1, 2]]).is_err());
    }
}
