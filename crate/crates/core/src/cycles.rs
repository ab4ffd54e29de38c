//! Cycles on a one-face dessin: the first homology of the carried surface.
//!
//! A cycle assigns a value of `Z/m` to every dart such that reversing a dart
//! negates the value and the values of the darts leaving any vertex sum to
//! zero. For a one-face dessin these maps form exactly the first homology of
//! the surface with `Z/m` coefficients, a free module of rank
//! `2g = E − V + 1`.
//!
//! A deterministic basis comes from a spanning tree: each non-tree edge seeds
//! one basis cycle (unit value on that edge, closed up through the tree), and
//! the coordinates of an arbitrary cycle can then be read off at the non-tree
//! edges directly.
//!
//! For intersection computations, cycles are lifted to integer-valued chains
//! with entries in {−1, 0, +1} (`SignedChain`): mod 3 the canonical
//! representatives serve, while mod 2 the support is decomposed into closed
//! walks and each walk is oriented.

use crate::modm::{add_mod, mul_mod, neg_mod};
use crate::perm::Perm;
use crate::ribbon::{Contraction, Dessin, REMOVED};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CycleError {
    #[error("modulus {0} not supported (need 2 or 3)")]
    BadModulus(u8),
    #[error("value vector has length {0} but dessin has {1} darts")]
    WrongLength(usize, usize),
    #[error("values on darts {0} and {1} are not negatives of each other")]
    NotAntisymmetric(u32, u32),
    #[error("values at vertex containing dart {0} do not sum to zero")]
    VertexSum(u32),
    #[error("dessin has {0} faces; cycle space equals surface homology only with one face")]
    NotOneFace(usize),
    #[error("cycle belongs to modulus {0}, expected {1}")]
    ModulusMismatch(u8, u8),
}

/// A 1-cycle with `Z/m` coefficients, stored as one value per dart.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Cycle {
    m: u8,
    values: Vec<u8>,
}

impl Cycle {
    pub fn new(d: &Dessin, m: u8, values: Vec<u8>) -> Result<Self, CycleError> {
        if m != 2 && m != 3 {
            return Err(CycleError::BadModulus(m));
        }
        if values.len() != d.n_darts() {
            return Err(CycleError::WrongLength(values.len(), d.n_darts()));
        }
        let values: Vec<u8> = values.into_iter().map(|v| v % m).collect();
        for dart in 0..d.n_darts() as u32 {
            let rev = d.rho1().apply(dart);
            if values[rev as usize] != neg_mod(values[dart as usize], m) {
                return Err(CycleError::NotAntisymmetric(dart, rev));
            }
        }
        for cycle in d.rho0().cycles() {
            let sum = cycle
                .iter()
                .fold(0u8, |acc, &x| add_mod(acc, values[x as usize], m));
            if sum != 0 {
                return Err(CycleError::VertexSum(cycle[0]));
            }
        }
        Ok(Cycle { m, values })
    }

    pub fn zero(d: &Dessin, m: u8) -> Self {
        Cycle {
            m,
            values: vec![0; d.n_darts()],
        }
    }

    /// Builds a cycle from one value per edge, interpreted on the edge's
    /// smaller dart (the reverse dart gets the negated value).
    pub fn from_edge_values(d: &Dessin, m: u8, edge_values: &[u8]) -> Result<Self, CycleError> {
        let edges = d.edges();
        if edge_values.len() != edges.len() {
            return Err(CycleError::WrongLength(edge_values.len(), edges.len()));
        }
        let mut values = vec![0u8; d.n_darts()];
        for (&(lo, hi), &v) in edges.iter().zip(edge_values) {
            values[lo as usize] = v % m;
            values[hi as usize] = neg_mod(v, m);
        }
        Cycle::new(d, m, values)
    }

    pub fn modulus(&self) -> u8 {
        self.m
    }

    #[inline]
    pub fn value(&self, dart: u32) -> u8 {
        self.values[dart as usize]
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    /// One value per edge, read at the edge's smaller dart.
    pub fn edge_values(&self, d: &Dessin) -> Vec<u8> {
        d.edges()
            .iter()
            .map(|&(lo, _)| self.values[lo as usize])
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0)
    }

    pub fn add(&self, other: &Cycle) -> Cycle {
        assert_eq!(self.m, other.m);
        Cycle {
            m: self.m,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| add_mod(a, b, self.m))
                .collect(),
        }
    }

    pub fn scale(&self, c: u8) -> Cycle {
        Cycle {
            m: self.m,
            values: self.values.iter().map(|&v| mul_mod(v, c, self.m)).collect(),
        }
    }

    /// Pushes the cycle through a dart relabeling: the new value on dart `x`
    /// is the old value on the preimage of `x`.
    pub fn relabel(&self, map: &Perm) -> Cycle {
        let inv = map.inverse();
        Cycle {
            m: self.m,
            values: (0..self.values.len() as u32)
                .map(|x| self.values[inv.apply(x) as usize])
                .collect(),
        }
    }

    /// Restricts the cycle to the surviving darts of a contraction. The two
    /// removed darts carried opposite values along a merged vertex pair, so
    /// the restriction still satisfies the cycle conditions.
    pub fn restrict_through_contraction(&self, contraction: &Contraction) -> Cycle {
        let mut values = vec![0u8; contraction.dessin.n_darts()];
        for (old, &new) in contraction.old_to_new.iter().enumerate() {
            if new != REMOVED {
                values[new as usize] = self.values[old];
            }
        }
        debug_assert!(Cycle::new(&contraction.dessin, self.m, values.clone()).is_ok());
        Cycle { m: self.m, values }
    }
}

impl std::fmt::Debug for Cycle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Cycle(mod {}; {:?})", self.m, self.values)
    }
}

/// A spanning-tree basis of the cycle space together with the data needed to
/// coordinatize arbitrary cycles.
#[derive(Debug, Clone)]
pub struct CycleBasis {
    m: u8,
    cycles: Vec<Cycle>,
    /// Smaller dart of each non-tree edge, in edge order; coordinate `i` of a
    /// cycle is its value on `coordinate_darts[i]`.
    coordinate_darts: Vec<u32>,
}

impl CycleBasis {
    pub fn modulus(&self) -> u8 {
        self.m
    }

    pub fn rank(&self) -> usize {
        self.cycles.len()
    }

    pub fn cycles(&self) -> &[Cycle] {
        &self.cycles
    }

    pub fn coordinate_darts(&self) -> &[u32] {
        &self.coordinate_darts
    }

    pub fn coordinates(&self, c: &Cycle) -> Result<Vec<u8>, CycleError> {
        if c.modulus() != self.m {
            return Err(CycleError::ModulusMismatch(c.modulus(), self.m));
        }
        Ok(self.coordinate_darts.iter().map(|&d| c.value(d)).collect())
    }

    pub fn combine(&self, coords: &[u8]) -> Cycle {
        assert_eq!(coords.len(), self.cycles.len());
        let mut acc = Cycle {
            m: self.m,
            values: vec![0; self.cycles[0].values.len()],
        };
        for (cycle, &c) in self.cycles.iter().zip(coords) {
            if c % self.m != 0 {
                acc = acc.add(&cycle.scale(c));
            }
        }
        acc
    }
}

/// Spanning-tree basis of the cycle space of a one-face dessin.
///
/// The tree is grown breadth-first from the vertex containing dart 0,
/// scanning edges in edge-id order; each of the `2g` non-tree edges then
/// yields one basis cycle: value +1 on its smaller dart, closed up along the
/// unique tree path. Basis cycle `i` has coordinate vector equal to unit
/// vector `i`, so coordinates of any cycle are its values at the non-tree
/// darts.
pub fn cycle_space_basis(d: &Dessin, m: u8) -> Result<CycleBasis, CycleError> {
    if m != 2 && m != 3 {
        return Err(CycleError::BadModulus(m));
    }
    let euler = d.euler_data().expect("validated at construction");
    if euler.faces != 1 {
        return Err(CycleError::NotOneFace(euler.faces));
    }

    let vid = d.vertex_of_dart();
    let n_vertices = euler.vertices;
    let edges = d.edges();

    // parent_dart[v] = dart originating at v whose edge leads toward the root.
    let root = vid[0] as usize;
    let mut parent_dart: Vec<Option<u32>> = vec![None; n_vertices];
    let mut in_tree = vec![false; edges.len()];
    let mut visited = vec![false; n_vertices];
    visited[root] = true;
    let mut frontier = vec![root];
    while let Some(v) = frontier.pop() {
        for (eid, &(lo, hi)) in edges.iter().enumerate() {
            for (near, far) in [(lo, hi), (hi, lo)] {
                if vid[near as usize] as usize == v {
                    let w = vid[far as usize] as usize;
                    if !visited[w] {
                        visited[w] = true;
                        in_tree[eid] = true;
                        parent_dart[w] = Some(far);
                        frontier.push(w);
                    }
                }
            }
        }
    }
    debug_assert!(visited.iter().all(|&x| x));

    let depth_to_root = |mut v: usize| {
        let mut depth = 0;
        while let Some(dart) = parent_dart[v] {
            v = vid[d.rho1().apply(dart) as usize] as usize;
            depth += 1;
        }
        depth
    };

    let mut cycles = Vec::new();
    let mut coordinate_darts = Vec::new();
    for (eid, &(lo, _hi)) in edges.iter().enumerate() {
        if in_tree[eid] {
            continue;
        }
        let mut signed = vec![0i8; d.n_darts()];
        let put = |dart: u32, s: i8, signed: &mut Vec<i8>| {
            signed[dart as usize] += s;
            signed[d.rho1().apply(dart) as usize] -= s;
        };
        // The non-tree edge itself, oriented along its smaller dart…
        put(lo, 1, &mut signed);
        // …then close up: walk both endpoints to their common tree ancestor.
        // Travel from the head vertex back to the tail vertex adds +1 along
        // each dart in the direction of travel.
        let mut u = vid[d.rho1().apply(lo) as usize] as usize; // head vertex
        let mut w = vid[lo as usize] as usize; // tail vertex
        let (mut du, mut dw) = (depth_to_root(u), depth_to_root(w));
        while du > dw {
            let dart = parent_dart[u].unwrap();
            put(dart, 1, &mut signed);
            u = vid[d.rho1().apply(dart) as usize] as usize;
            du -= 1;
        }
        while dw > du {
            let dart = parent_dart[w].unwrap();
            put(dart, -1, &mut signed);
            w = vid[d.rho1().apply(dart) as usize] as usize;
            dw -= 1;
        }
        while u != w {
            let dart_u = parent_dart[u].unwrap();
            put(dart_u, 1, &mut signed);
            u = vid[d.rho1().apply(dart_u) as usize] as usize;
            let dart_w = parent_dart[w].unwrap();
            put(dart_w, -1, &mut signed);
            w = vid[d.rho1().apply(dart_w) as usize] as usize;
        }
        let values: Vec<u8> = signed
            .iter()
            .map(|&s| (((s % m as i8) + m as i8) % m as i8) as u8)
            .collect();
        let cycle = Cycle::new(d, m, values).expect("closed tree walk is a cycle");
        cycles.push(cycle);
        coordinate_darts.push(lo);
    }

    debug_assert_eq!(cycles.len(), 2 * euler.genus);
    let basis = CycleBasis {
        m,
        cycles,
        coordinate_darts,
    };
    // Unit-coordinate property: basis cycle i reads back as unit vector i.
    for (i, c) in basis.cycles.iter().enumerate() {
        debug_assert!(basis
            .coordinates(c)
            .unwrap()
            .iter()
            .enumerate()
            .all(|(j, &v)| v == u8::from(i == j)));
    }
    Ok(basis)
}

/// Integer chain with values in {−1, 0, +1} per dart and honest antisymmetry
/// over Z; the signed lift of a `Z/m` cycle used by intersection evaluators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedChain {
    values: Vec<i8>,
}

impl SignedChain {
    #[inline]
    pub fn value(&self, dart: u32) -> i8 {
        self.values[dart as usize]
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }

    /// Net outflow of a vertex given as its list of originating darts. Zero
    /// for honestly lifted mod-2 cycles; a multiple of 3 for mod-3 lifts
    /// (three-way junction amounts).
    pub fn flux(&self, vertex_darts: &[u32]) -> i64 {
        vertex_darts
            .iter()
            .map(|&x| self.values[x as usize] as i64)
            .sum()
    }

    /// Globally reversed chain — the other orientation choice of every
    /// circuit; used to check that lift choices do not affect results.
    #[cfg(test)]
    pub(crate) fn flipped_for_tests(chain: &SignedChain) -> SignedChain {
        SignedChain {
            values: chain.values.iter().map(|&v| -v).collect(),
        }
    }
}

/// Lifts a cycle to a signed integer chain.
///
/// Mod 3, the representatives 1 → +1, 2 → −1 are taken dart-wise; vertex
/// fluxes are multiples of 3 (Kirchhoff junctions). Mod 2, the support is
/// decomposed into closed edge walks (possible since every vertex meets an
/// even number of support edges) and each walk is oriented along its
/// traversal, giving zero flux everywhere. The decomposition is
/// deterministic; different decompositions differ by twice an integer cycle,
/// so downstream intersection numbers agree mod 2.
pub fn signed_lift(d: &Dessin, c: &Cycle) -> SignedChain {
    let n = d.n_darts();
    let mut values = vec![0i8; n];
    match c.modulus() {
        3 => {
            for (x, v) in values.iter_mut().enumerate() {
                *v = match c.value(x as u32) {
                    0 => 0,
                    1 => 1,
                    _ => -1,
                };
            }
        }
        2 => {
            let vid = d.vertex_of_dart();
            // support darts not yet claimed by a walk, indexed by dart
            let mut free: Vec<bool> = (0..n as u32).map(|x| c.value(x) == 1).collect();
            // darts originating at each vertex, ascending
            let n_vertices = d.rho0().cycle_count();
            let mut at_vertex: Vec<Vec<u32>> = vec![Vec::new(); n_vertices];
            for x in 0..n as u32 {
                at_vertex[vid[x as usize] as usize].push(x);
            }
            loop {
                let start = match (0..n as u32).find(|&x| free[x as usize]) {
                    None => break,
                    Some(x) => x,
                };
                // Walk support edges until the circuit closes; it can only
                // get stuck at the starting vertex because support degrees
                // are even.
                let mut dart = start;
                loop {
                    values[dart as usize] = 1;
                    let rev = d.rho1().apply(dart);
                    values[rev as usize] = -1;
                    free[dart as usize] = false;
                    free[rev as usize] = false;
                    let head = vid[rev as usize] as usize;
                    match at_vertex[head].iter().find(|&&x| free[x as usize]) {
                        Some(&next) => dart = next,
                        None => break,
                    }
                }
            }
        }
        m => unreachable!("modulus {m} rejected at cycle construction"),
    }
    let chain = SignedChain { values };
    // The lift must reduce back to the original cycle.
    debug_assert!((0..n as u32)
        .all(|x| (chain.value(x).rem_euclid(c.modulus() as i8)) as u8 == c.value(x)));
    chain
}
