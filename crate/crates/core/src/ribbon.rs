//! Dessins d'enfants as permutation pairs on darts.
//!
//! A dessin is a connected oriented ribbon graph encoded by two permutations
//! of its darts (directed edges):
//!
//! * `rho0` — counterclockwise rotation about the origin vertex of a dart;
//! * `rho1` — direction reversal, a fixed-point-free involution pairing the
//!   two darts of each undirected edge.
//!
//! The face rotation is determined by the cartographic relation
//! `rho2 ∘ rho1 ∘ rho0 = id`, so `rho2 = rho0⁻¹ ∘ rho1`. Vertices are the
//! cycles of `rho0`, edges the cycles of `rho1`, faces the cycles of `rho2`,
//! and `V − E + F = 2 − 2g` fixes the genus of the carrying surface.
//!
//! One-face dessins are interchangeable with gluing schemes of a polygon:
//! fixing `rho2` to be the full cyclic rotation of a `2E`-gon and choosing a
//! side-pairing `rho1` determines `rho0 = rho1 ∘ rho2⁻¹`. Enumeration of
//! trivalent one-face dessins walks exactly that space.

use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::perm::{Perm, PermError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RibbonError {
    #[error(transparent)]
    Perm(#[from] PermError),
    #[error("rho0 acts on {rho0} darts but rho1 acts on {rho1}")]
    SizeMismatch { rho0: usize, rho1: usize },
    #[error("dart count {0} is not positive and even")]
    BadDartCount(usize),
    #[error("rho1 must be a fixed-point-free involution")]
    NotInvolution,
    #[error("darts are not connected under rho0 and rho1")]
    Disconnected,
    #[error("Euler characteristic V - E + F = {0} is odd; permutation data corrupt")]
    OddEuler(i64),
    #[error("degenerate spherical dessin (genus 0 with {0} faces) is not supported")]
    DegenerateSphere(usize),
    #[error("edge id {0} out of range (dessin has {1} edges)")]
    NoSuchEdge(usize, usize),
    #[error("edge {0} is a loop and cannot be contracted")]
    LoopContraction(usize),
    #[error("cannot parse dessin from {0:?}")]
    Parse(String),
}

/// Index into the edge list of a dessin (edges sorted by their minimal dart).
pub type EdgeId = usize;

/// Counts derived from the cartographic permutations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EulerData {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub genus: usize,
}

/// Relabel-invariant identifier of a dessin; equal codes iff some dart
/// bijection conjugates both `rho0` and `rho1` simultaneously.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalCode {
    code: Vec<u32>,
}

impl CanonicalCode {
    pub fn as_slice(&self) -> &[u32] {
        &self.code
    }
}

impl fmt::Display for CanonicalCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.code.iter().enumerate() {
            if i > 0 {
                write!(f, ".")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for CanonicalCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CanonicalCode[{self}]")
    }
}

/// Result of contracting an edge: the smaller dessin plus the dart relabeling
/// (`u32::MAX` marks the two removed darts).
#[derive(Debug, Clone)]
pub struct Contraction {
    pub dessin: Dessin,
    pub old_to_new: Vec<u32>,
}

pub const REMOVED: u32 = u32::MAX;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dessin {
    n_darts: usize,
    rho0: Perm,
    rho1: Perm,
}

impl Dessin {
    /// Validates the full set of invariants: sizes agree, `rho1` is a
    /// fixed-point-free involution, the action is transitive, and the surface
    /// is not a sphere with one or two faces.
    pub fn new(rho0: Perm, rho1: Perm) -> Result<Self, RibbonError> {
        if rho0.len() != rho1.len() {
            return Err(RibbonError::SizeMismatch {
                rho0: rho0.len(),
                rho1: rho1.len(),
            });
        }
        let n = rho0.len();
        if n == 0 || !n.is_multiple_of(2) {
            return Err(RibbonError::BadDartCount(n));
        }
        if !rho1.is_fixed_point_free_involution() {
            return Err(RibbonError::NotInvolution);
        }
        let d = Dessin {
            n_darts: n,
            rho0,
            rho1,
        };
        if !d.is_connected() {
            return Err(RibbonError::Disconnected);
        }
        let euler = d.euler_data()?;
        if euler.genus == 0 && euler.faces <= 2 {
            return Err(RibbonError::DegenerateSphere(euler.faces));
        }
        Ok(d)
    }

    /// Convenience constructor from vertex rotations with the default edge
    /// pairing `(2i, 2i+1)`.
    pub fn from_vertex_rotations(rotations: &[Vec<u32>]) -> Result<Self, RibbonError> {
        let n: usize = rotations.iter().map(|r| r.len()).sum();
        let rho0 = Perm::from_cycles(n, rotations)?;
        let pairs: Vec<Vec<u32>> = (0..n as u32 / 2).map(|i| vec![2 * i, 2 * i + 1]).collect();
        let rho1 = Perm::from_cycles(n, &pairs)?;
        Dessin::new(rho0, rho1)
    }

    pub fn n_darts(&self) -> usize {
        self.n_darts
    }

    pub fn rho0(&self) -> &Perm {
        &self.rho0
    }

    pub fn rho1(&self) -> &Perm {
        &self.rho1
    }

    /// Face rotation `rho2 = rho0⁻¹ ∘ rho1`, derived from `rho2 rho1 rho0 = id`.
    pub fn rho2(&self) -> Perm {
        Perm::compose(&self.rho0.inverse(), &self.rho1)
    }

    fn is_connected(&self) -> bool {
        let n = self.n_darts;
        let mut seen = vec![false; n];
        let mut stack = vec![0u32];
        seen[0] = true;
        let mut visited = 1;
        while let Some(x) = stack.pop() {
            for y in [self.rho0.apply(x), self.rho1.apply(x)] {
                if !seen[y as usize] {
                    seen[y as usize] = true;
                    visited += 1;
                    stack.push(y);
                }
            }
        }
        visited == n
    }

    pub fn euler_data(&self) -> Result<EulerData, RibbonError> {
        let vertices = self.rho0.cycle_count();
        let edges = self.n_darts / 2;
        let faces = self.rho2().cycle_count();
        let chi = vertices as i64 - edges as i64 + faces as i64;
        if (2 - chi) % 2 != 0 {
            return Err(RibbonError::OddEuler(chi));
        }
        Ok(EulerData {
            vertices,
            edges,
            faces,
            genus: ((2 - chi) / 2) as usize,
        })
    }

    /// Undirected edges as dart pairs `(min, max)`, sorted by the minimal dart.
    /// The position in this list is the edge's [`EdgeId`].
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.n_darts / 2);
        for d in 0..self.n_darts as u32 {
            let e = self.rho1.apply(d);
            if d < e {
                out.push((d, e));
            }
        }
        out
    }

    /// Vertex id (index of the `rho0`-cycle, ordered by minimal dart) for each dart.
    pub fn vertex_of_dart(&self) -> Vec<u32> {
        let mut vid = vec![u32::MAX; self.n_darts];
        for (v, cycle) in self.rho0.cycles().into_iter().enumerate() {
            for d in cycle {
                vid[d as usize] = v as u32;
            }
        }
        vid
    }

    /// Breadth-first relabeling started from `start`: darts are labeled in
    /// discovery order, exploring `rho0` then `rho1` images. Returns the map
    /// original dart → new label.
    fn bfs_labeling(&self, start: u32) -> Vec<u32> {
        let n = self.n_darts;
        let mut label = vec![u32::MAX; n];
        let mut order = Vec::with_capacity(n);
        label[start as usize] = 0;
        order.push(start);
        let mut head = 0;
        while head < order.len() {
            let x = order[head];
            head += 1;
            for y in [self.rho0.apply(x), self.rho1.apply(x)] {
                if label[y as usize] == u32::MAX {
                    label[y as usize] = order.len() as u32;
                    order.push(y);
                }
            }
        }
        debug_assert_eq!(order.len(), n);
        label
    }

    fn code_for_labeling(&self, label: &[u32]) -> Vec<u32> {
        let n = self.n_darts;
        let mut inv = vec![0u32; n];
        for (orig, &l) in label.iter().enumerate() {
            inv[l as usize] = orig as u32;
        }
        let mut code = Vec::with_capacity(2 * n);
        for l in 0..n {
            code.push(label[self.rho0.apply(inv[l]) as usize]);
        }
        for l in 0..n {
            code.push(label[self.rho1.apply(inv[l]) as usize]);
        }
        code
    }

    /// Canonical code plus one relabeling realizing it and the relabeled
    /// dessin itself. The relabeling maps original darts to canonical labels;
    /// it is the breadth-first labeling from the smallest start dart whose
    /// code attains the lexicographic minimum.
    pub fn canonical_form(&self) -> (CanonicalCode, Dessin, Perm) {
        let mut best: Option<(Vec<u32>, Vec<u32>)> = None;
        for start in 0..self.n_darts as u32 {
            let label = self.bfs_labeling(start);
            let code = self.code_for_labeling(&label);
            match &best {
                Some((b, _)) if *b <= code => {}
                _ => best = Some((code, label)),
            }
        }
        let (code, label) = best.expect("dessin has at least one dart");
        let relabel = Perm::from_images(label).expect("BFS labeling is a bijection");
        let canonical = Dessin {
            n_darts: self.n_darts,
            rho0: self.rho0.conjugate_by(&relabel),
            rho1: self.rho1.conjugate_by(&relabel),
        };
        debug_assert_eq!(
            canonical.code_for_labeling(Perm::identity(self.n_darts).images()),
            code
        );
        (CanonicalCode { code }, canonical, relabel)
    }

    pub fn canonical_code(&self) -> CanonicalCode {
        self.canonical_form().0
    }

    /// All dart permutations commuting with both `rho0` and `rho1`, sorted by
    /// image table. Because the cartographic action is transitive, an
    /// automorphism is determined by the image of dart 0, so the group order
    /// divides `n_darts`.
    pub fn automorphisms(&self) -> Vec<Perm> {
        let n = self.n_darts;
        let mut out = Vec::new();
        'candidates: for target in 0..n as u32 {
            let mut phi = vec![u32::MAX; n];
            phi[0] = target;
            let mut stack = vec![0u32];
            while let Some(x) = stack.pop() {
                let fx = phi[x as usize];
                for (gen_x, gen_fx) in [
                    (self.rho0.apply(x), self.rho0.apply(fx)),
                    (self.rho1.apply(x), self.rho1.apply(fx)),
                ] {
                    let slot = &mut phi[gen_x as usize];
                    if *slot == u32::MAX {
                        *slot = gen_fx;
                        stack.push(gen_x);
                    } else if *slot != gen_fx {
                        continue 'candidates;
                    }
                }
            }
            let phi = match Perm::from_images(phi) {
                Ok(p) => p,
                Err(_) => continue,
            };
            let commutes = Perm::compose(&phi, &self.rho0) == Perm::compose(&self.rho0, &phi)
                && Perm::compose(&phi, &self.rho1) == Perm::compose(&self.rho1, &phi);
            if commutes {
                out.push(phi);
            }
        }
        out.sort_by(|a, b| a.images().cmp(b.images()));
        out
    }

    /// Edges whose two darts sit in distinct `rho0`-cycles. Only these can be
    /// contracted; collapsing a loop would pinch a handle.
    pub fn contractible_edges(&self) -> Vec<EdgeId> {
        let vid = self.vertex_of_dart();
        self.edges()
            .iter()
            .enumerate()
            .filter(|(_, &(a, b))| vid[a as usize] != vid[b as usize])
            .map(|(i, _)| i)
            .collect()
    }

    /// Contracts a non-loop edge: the two endpoint vertices merge, and the two
    /// rotation orders are spliced at the removed darts. Genus and face count
    /// are preserved; surviving darts are renumbered compactly in increasing
    /// order.
    pub fn contract_edge(&self, e: EdgeId) -> Result<Contraction, RibbonError> {
        let edges = self.edges();
        let &(d, d_rev) = edges
            .get(e)
            .ok_or(RibbonError::NoSuchEdge(e, edges.len()))?;
        let vid = self.vertex_of_dart();
        if vid[d as usize] == vid[d_rev as usize] {
            return Err(RibbonError::LoopContraction(e));
        }

        // Merged rotation: walk the cycle of `d` starting after `d`, then the
        // cycle of `d_rev` starting after `d_rev`. List splicing handles
        // valency-1 endpoints (empty arcs) uniformly.
        let mut merged = Vec::new();
        let mut x = self.rho0.apply(d);
        while x != d {
            merged.push(x);
            x = self.rho0.apply(x);
        }
        let mut x = self.rho0.apply(d_rev);
        while x != d_rev {
            merged.push(x);
            x = self.rho0.apply(x);
        }

        let n_new = self.n_darts - 2;
        let mut old_to_new = vec![0u32; self.n_darts];
        old_to_new[d as usize] = REMOVED;
        old_to_new[d_rev as usize] = REMOVED;
        let mut next = 0u32;
        for old in 0..self.n_darts as u32 {
            if old != d && old != d_rev {
                old_to_new[old as usize] = next;
                next += 1;
            }
        }

        let mut rho0_new = vec![u32::MAX; n_new];
        let touched: HashSet<u32> = merged.iter().copied().collect();
        for old in 0..self.n_darts as u32 {
            if old == d || old == d_rev || touched.contains(&old) {
                continue;
            }
            rho0_new[old_to_new[old as usize] as usize] =
                old_to_new[self.rho0.apply(old) as usize];
        }
        for (i, &dart) in merged.iter().enumerate() {
            let succ = merged[(i + 1) % merged.len()];
            rho0_new[old_to_new[dart as usize] as usize] = old_to_new[succ as usize];
        }
        let mut rho1_new = vec![u32::MAX; n_new];
        for old in 0..self.n_darts as u32 {
            if old != d && old != d_rev {
                rho1_new[old_to_new[old as usize] as usize] =
                    old_to_new[self.rho1.apply(old) as usize];
            }
        }

        let dessin = Dessin::new(Perm::from_images(rho0_new)?, Perm::from_images(rho1_new)?)?;
        Ok(Contraction { dessin, old_to_new })
    }

    /// One-line ASCII form: `n_darts; rho0 cycles; rho1 cycles`.
    pub fn to_line(&self) -> String {
        format!("{}; {}; {}", self.n_darts, self.rho0, self.rho1)
    }

    pub fn from_line(line: &str) -> Result<Self, RibbonError> {
        let mut parts = line.splitn(3, ';');
        let n: usize = parts
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| RibbonError::Parse(line.into()))?;
        let rho0 = Perm::parse_cycles(
            n,
            parts
                .next()
                .ok_or_else(|| RibbonError::Parse(line.into()))?,
        )?;
        let rho1 = Perm::parse_cycles(
            n,
            parts
                .next()
                .ok_or_else(|| RibbonError::Parse(line.into()))?,
        )?;
        Dessin::new(rho0, rho1)
    }
}

impl fmt::Debug for Dessin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dessin[{}]", self.to_line())
    }
}

/// Enumerates all isomorphism classes of one-face, all-trivalent dessins of
/// the given genus as side-pairings of a `(12g−6)`-gon.
///
/// The face rotation is pinned to the polygon cycle `i → i+1 (mod n)`, so a
/// side-pairing `rho1` determines `rho0(x) = rho1(x−1 mod n)`. A depth-first
/// search over pairings prunes any partial `rho0`-cycle that closes with
/// length ≠ 3 or grows past 3 darts. Classes are deduplicated by canonical
/// code; representatives are returned in canonical labels, sorted by code.
pub fn enumerate_trivalent_one_face(genus: usize) -> Result<Vec<Dessin>, RibbonError> {
    if genus == 0 {
        return Err(RibbonError::DegenerateSphere(1));
    }
    let n = 12 * genus - 6;
    let mut rho1 = vec![u32::MAX; n];
    let mut found: HashMap<CanonicalCode, Dessin> = HashMap::new();
    search_pairings(n, &mut rho1, &mut found);
    let mut reps: Vec<(CanonicalCode, Dessin)> = found.into_iter().collect();
    reps.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(reps.into_iter().map(|(_, d)| d).collect())
}

fn search_pairings(n: usize, rho1: &mut Vec<u32>, found: &mut HashMap<CanonicalCode, Dessin>) {
    let first_free = match rho1.iter().position(|&x| x == u32::MAX) {
        None => {
            let rho1_perm =
                Perm::from_images(rho1.clone()).expect("complete matching is a permutation");
            let rho0_images: Vec<u32> = (0..n)
                .map(|x| rho1[(x + n - 1) % n] )
                .collect();
            let rho0 = Perm::from_images(rho0_images).expect("derived rotation is a permutation");
            let dessin = Dessin::new(rho0, rho1_perm).expect("polygon gluing is a valid dessin");
            let (code, canonical, _) = dessin.canonical_form();
            found.entry(code).or_insert(canonical);
            return;
        }
        Some(i) => i as u32,
    };
    for partner in (first_free + 1)..n as u32 {
        if rho1[partner as usize] != u32::MAX {
            continue;
        }
        rho1[first_free as usize] = partner;
        rho1[partner as usize] = first_free;
        if partial_rotation_ok(n, rho1, first_free) && partial_rotation_ok(n, rho1, partner) {
            search_pairings(n, rho1, found);
        }
        rho1[first_free as usize] = u32::MAX;
        rho1[partner as usize] = u32::MAX;
    }
}

/// Checks the partial `rho0`-chain through the rotation image created by
/// pairing `dart`: walks to the chain start, then forward. A closed chain must
/// have length exactly 3; an open chain must not contain more than 3 darts.
fn partial_rotation_ok(n: usize, rho1: &[u32], dart: u32) -> bool {
    // rho0 is defined at x iff rho1 is defined at x−1; pairing `dart` defines
    // rho0 at dart+1.
    let entry = (dart + 1) % n as u32;
    let mut start = entry;
    for _ in 0..3 {
        // predecessor of x under rho0: y with rho1(y−1) = x, i.e. y = rho1(x)+1
        let p = rho1[start as usize];
        if p == u32::MAX {
            break;
        }
        let pred = (p + 1) % n as u32;
        if pred == entry {
            // fully closed cycle through `entry`
            break;
        }
        start = pred;
    }
    let mut len = 0usize;
    let mut x = start;
    loop {
        let p = rho1[((x + n as u32 - 1) % n as u32) as usize];
        if p == u32::MAX {
            return true; // open chain of ≤ 3 darts so far
        }
        len += 1;
        x = p;
        if x == start {
            return len == 3;
        }
        if len >= 3 {
            return false; // 4 or more darts forced into one vertex
        }
    }
}

/// Closure of the top-level dessins under single-edge contraction, leveled by
/// edge count from `6g−3` down to `2g`. Every level holds canonical
/// representatives sorted by code.
pub fn closure_under_contraction(tops: &[Dessin]) -> Result<Vec<Vec<Dessin>>, RibbonError> {
    let mut levels: Vec<Vec<Dessin>> = Vec::new();
    let mut current: HashMap<CanonicalCode, Dessin> = tops
        .iter()
        .map(|d| {
            let (code, canonical, _) = d.canonical_form();
            (code, canonical)
        })
        .collect();
    loop {
        let mut sorted: Vec<(CanonicalCode, Dessin)> = current.drain().collect();
        sorted.sort_by(|a, b| a.0.cmp(&b.0));
        let level: Vec<Dessin> = sorted.into_iter().map(|(_, d)| d).collect();
        let mut next: HashMap<CanonicalCode, Dessin> = HashMap::new();
        for dessin in &level {
            for e in dessin.contractible_edges() {
                let contracted = dessin.contract_edge(e)?.dessin;
                let (code, canonical, _) = contracted.canonical_form();
                next.entry(code).or_insert(canonical);
            }
        }
        levels.push(level);
        if next.is_empty() {
            return Ok(levels);
        }
        current = next;
    }
}

#[cfg(test)]
pub(crate) mod test_fixtures {
    use super::*;

    /// The θ-graph: two trivalent vertices joined by three parallel edges,
    /// embedded on the torus with a single face.
    pub fn theta() -> Dessin {
        Dessin::from_vertex_rotations(&[vec![0, 2, 4], vec![1, 3, 5]]).unwrap()
    }

    /// One-vertex, two-loop genus-1 dessin obtained from θ by contraction.
    pub fn figure_eight() -> Dessin {
        theta().contract_edge(0).unwrap().dessin
    }

    /// Standard one-vertex octagon gluing `aba⁻¹b⁻¹cdc⁻¹d⁻¹` of genus 2.
    pub fn octagon() -> Dessin {
        let n = 8usize;
        let rho1 = Perm::from_cycles(n, &[vec![0, 2], vec![1, 3], vec![4, 6], vec![5, 7]]).unwrap();
        let rho0_images: Vec<u32> = (0..n as u32)
            .map(|x| rho1.apply((x + n as u32 - 1) % n as u32))
            .collect();
        Dessin::new(Perm::from_images(rho0_images).unwrap(), rho1).unwrap()
    }
}
