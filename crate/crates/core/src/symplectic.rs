//! Symplectic bases of the cycle space and their transports.
//!
//! A symplectic basis is an ordered tuple (a₁, b₁, …, a_g, b_g) of cycles
//! whose pairing matrix is the standard form J (⟨a_i, b_i⟩ = 1, all other
//! pairs 0). One seed basis is found by symplectic Gram–Schmidt over the
//! spanning-tree basis; every other basis is the seed times an element of the
//! symplectic group Sp(2g, Z/m), which is generated by its transvections and
//! enumerated once by breadth-first closure.
//!
//! Bases move along the two structural maps of the dessin family:
//! contraction of an edge restricts each cycle to the surviving darts, and an
//! automorphism relabels the underlying darts. Both preserve the pairing.

use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::{Arc, Mutex, OnceLock};

use crate::cycles::{cycle_space_basis, Cycle, CycleBasis, CycleError};
use crate::intersection::{pairing_matrix, IntersectionError};
use crate::modm::{add_mod, inv_mod, mul_mod, sub_mod, MatMod};
use crate::perm::Perm;
use crate::ribbon::{Contraction, Dessin, EdgeId, RibbonError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SymplecticError {
    #[error(transparent)]
    Cycle(#[from] CycleError),
    #[error(transparent)]
    Intersection(#[from] IntersectionError),
    #[error(transparent)]
    Ribbon(#[from] RibbonError),
    #[error("basis has {0} cycles but the surface needs {1}")]
    WrongSize(usize, usize),
    #[error("cycles do not form a symplectic basis (pairing differs from the standard form)")]
    NotSymplectic,
    #[error("symplectic reduction of the seed basis failed; intersection form degenerate")]
    NoSeed,
    #[error(
        "automorphism acts trivially on homology mod {0}; level structure does not rigidify this dessin"
    )]
    TrivialAction(u8),
}

/// Ordered tuple (a₁, b₁, …, a_g, b_g) of cycles pairing as the standard
/// symplectic form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymplecticBasis {
    m: u8,
    cycles: Vec<Cycle>,
}

impl SymplecticBasis {
    /// Validating constructor: checks size and the full pairing matrix.
    pub fn new(d: &Dessin, cycles: Vec<Cycle>, m: u8) -> Result<Self, SymplecticError> {
        let genus = d.euler_data().expect("validated at construction").genus;
        if cycles.len() != 2 * genus {
            return Err(SymplecticError::WrongSize(cycles.len(), 2 * genus));
        }
        let g = pairing_matrix(d, &cycles, m)?;
        if g != MatMod::standard_symplectic(genus, m) {
            return Err(SymplecticError::NotSymplectic);
        }
        Ok(SymplecticBasis { m, cycles })
    }

    pub(crate) fn from_cycles_unchecked(m: u8, cycles: Vec<Cycle>) -> Self {
        SymplecticBasis { m, cycles }
    }

    pub fn modulus(&self) -> u8 {
        self.m
    }

    pub fn cycles(&self) -> &[Cycle] {
        &self.cycles
    }

    /// Coordinate matrix with respect to a cycle basis: column `j` holds the
    /// coordinates of the j-th basis cycle.
    pub fn coordinate_matrix(&self, basis: &CycleBasis) -> Result<MatMod, CycleError> {
        let k = self.cycles.len();
        let mut x = MatMod::zero(basis.rank(), k, self.m);
        for (j, c) in self.cycles.iter().enumerate() {
            x.set_column(j, &basis.coordinates(c)?);
        }
        Ok(x)
    }

    /// One line per basis: cycles as edge-value vectors, separated by `|`.
    pub fn to_line(&self, d: &Dessin) -> String {
        self.cycles
            .iter()
            .map(|c| {
                c.edge_values(d)
                    .iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect::<Vec<_>>()
            .join(" | ")
    }
}

/// Pairing of coordinate vectors through a Gram matrix: xᵀ G y mod m.
fn gram_pair(g: &MatMod, x: &[u8], y: &[u8]) -> u8 {
    let m = g.modulus();
    let gy = g.mul_vec(y);
    x.iter()
        .zip(&gy)
        .fold(0u8, |acc, (&a, &b)| add_mod(acc, mul_mod(a, b, m), m))
}

/// Symplectic Gram–Schmidt on the spanning-tree basis: returns the seed
/// coordinate matrix X with XᵀGX = J.
fn seed_coordinates(gram: &MatMod, m: u8) -> Result<MatMod, SymplecticError> {
    let n = gram.rows();
    let mut pool: VecDeque<Vec<u8>> = (0..n)
        .map(|i| {
            let mut e = vec![0u8; n];
            e[i] = 1;
            e
        })
        .collect();
    let mut pairs: Vec<(Vec<u8>, Vec<u8>)> = Vec::new();
    while let Some(u) = pool.pop_front() {
        let partner = pool
            .iter()
            .position(|v| gram_pair(gram, &u, v) != 0)
            .ok_or(SymplecticError::NoSeed)?;
        let mut v = pool.remove(partner).unwrap();
        let c = gram_pair(gram, &u, &v);
        let cinv = inv_mod(c, m);
        for entry in v.iter_mut() {
            *entry = mul_mod(*entry, cinv, m);
        }
        // Clear the new hyperbolic pair out of every remaining vector.
        for w in pool.iter_mut() {
            let wu = gram_pair(gram, w, &u);
            let wv = gram_pair(gram, w, &v);
            for i in 0..n {
                let mut x = w[i];
                x = sub_mod(x, mul_mod(wv, u[i], m), m);
                x = add_mod(x, mul_mod(wu, v[i], m), m);
                w[i] = x;
            }
        }
        pool.retain(|w| w.iter().any(|&x| x != 0));
        pairs.push((u, v));
    }
    if pairs.len() * 2 != n {
        return Err(SymplecticError::NoSeed);
    }
    let mut x = MatMod::zero(n, n, m);
    for (i, (u, v)) in pairs.iter().enumerate() {
        x.set_column(2 * i, u);
        x.set_column(2 * i + 1, v);
    }
    let j = MatMod::standard_symplectic(n / 2, m);
    if x.transpose().mul(gram).mul(&x) != j {
        return Err(SymplecticError::NoSeed);
    }
    Ok(x)
}

/// A seed symplectic basis on a one-face dessin, built by symplectic
/// Gram–Schmidt from the spanning-tree cycle basis.
pub fn seed_symplectic_basis(d: &Dessin, m: u8) -> Result<SymplecticBasis, SymplecticError> {
    let tree = cycle_space_basis(d, m)?;
    let gram = pairing_matrix(d, tree.cycles(), m)?;
    let x = seed_coordinates(&gram, m)?;
    let cycles: Vec<Cycle> = (0..x.cols()).map(|j| tree.combine(&x.column(j))).collect();
    Ok(SymplecticBasis::from_cycles_unchecked(m, cycles))
}

/// The symplectic group Sp(2g, Z/m) for the standard form J, as explicit
/// matrices: breadth-first closure of the symplectic transvections
/// `x ↦ x + ⟨x, u⟩ u` over all nonzero vectors u. Results are cached per
/// (g, m) and sorted by packed code for determinism.
pub fn symplectic_group(genus: usize, m: u8) -> Arc<Vec<MatMod>> {
    type GroupCache = Mutex<HashMap<(usize, u8), Arc<Vec<MatMod>>>>;
    static CACHE: OnceLock<GroupCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&(genus, m)) {
        return hit.clone();
    }

    let n = 2 * genus;
    let j = MatMod::standard_symplectic(genus, m);
    // transvection matrix for u: T = I + u · (Jᵀu)ᵀ  (since ⟨x,u⟩ = xᵀJu)
    let mut generators = Vec::new();
    let count = (m as u64).pow(n as u32);
    for code in 1..count {
        let mut u = vec![0u8; n];
        let mut c = code;
        for x in u.iter_mut() {
            *x = (c % m as u64) as u8;
            c /= m as u64;
        }
        let ju = j.transpose().mul_vec(&u);
        let mut t = MatMod::identity(n, m);
        for (r, &ur) in u.iter().enumerate() {
            for (s, &jus) in ju.iter().enumerate() {
                let v = add_mod(t.get(r, s), mul_mod(ur, jus, m), m);
                t.set(r, s, v);
            }
        }
        generators.push(t);
    }

    let mut seen: HashSet<u64> = HashSet::new();
    let mut order: Vec<MatMod> = Vec::new();
    let identity = MatMod::identity(n, m);
    seen.insert(identity.pack().expect("2g×2g fits packed code"));
    let mut queue = VecDeque::from([identity.clone()]);
    order.push(identity);
    while let Some(e) = queue.pop_front() {
        for t in &generators {
            let next = e.mul(t);
            let code = next.pack().expect("2g×2g fits packed code");
            if seen.insert(code) {
                order.push(next.clone());
                queue.push_back(next);
            }
        }
    }
    order.sort_by_key(|e| e.pack().expect("packed above"));
    let arc = Arc::new(order);
    cache
        .lock()
        .unwrap()
        .insert((genus, m), arc.clone());
    arc
}

/// All symplectic bases on a one-face dessin: the seed basis times every
/// group element, ordered by the group's deterministic ordering.
pub fn enumerate_symplectic_bases(
    d: &Dessin,
    m: u8,
) -> Result<Vec<SymplecticBasis>, SymplecticError> {
    let genus = d.euler_data().expect("validated at construction").genus;
    let tree = cycle_space_basis(d, m)?;
    let seed = seed_symplectic_basis(d, m)?;
    let x0 = seed.coordinate_matrix(&tree)?;
    let group = symplectic_group(genus, m);
    Ok(group
        .iter()
        .map(|e| {
            let x = x0.mul(e);
            let cycles = (0..x.cols()).map(|j| tree.combine(&x.column(j))).collect();
            SymplecticBasis::from_cycles_unchecked(m, cycles)
        })
        .collect())
}

/// Restricts every cycle of a basis to the dessin obtained by contracting
/// edge `e`. The pairing matrix is unchanged, so the result is again
/// symplectic on the contracted dessin.
pub fn transport_contract(
    d: &Dessin,
    e: EdgeId,
    basis: &SymplecticBasis,
) -> Result<(Contraction, SymplecticBasis), SymplecticError> {
    let contraction = d.contract_edge(e)?;
    let basis = transport_through_contraction(&contraction, basis);
    Ok((contraction, basis))
}

/// Same restriction when the contraction is already at hand.
pub fn transport_through_contraction(
    contraction: &Contraction,
    basis: &SymplecticBasis,
) -> SymplecticBasis {
    SymplecticBasis::from_cycles_unchecked(
        basis.modulus(),
        basis
            .cycles()
            .iter()
            .map(|c| c.restrict_through_contraction(contraction))
            .collect(),
    )
}

/// Pushes a basis through an automorphism σ of the dessin: each cycle's
/// value map is composed with σ⁻¹.
pub fn transport_automorphism(
    _d: &Dessin,
    sigma: &Perm,
    basis: &SymplecticBasis,
) -> SymplecticBasis {
    transport_relabel(sigma, basis)
}

/// Pushes a basis through an arbitrary dart relabeling (used both for
/// automorphisms and for canonical-form relabelings).
pub fn transport_relabel(map: &Perm, basis: &SymplecticBasis) -> SymplecticBasis {
    SymplecticBasis::from_cycles_unchecked(
        basis.modulus(),
        basis.cycles().iter().map(|c| c.relabel(map)).collect(),
    )
}

/// Coordinate matrix of the linear action of a dart relabeling on the cycle
/// space: column j holds the coordinates of the pushed-forward j-th basis
/// cycle. For automorphisms this is the homology action T_σ.
pub fn relabel_coordinate_action(
    tree: &CycleBasis,
    map: &Perm,
) -> Result<MatMod, CycleError> {
    let n = tree.rank();
    let mut t = MatMod::zero(n, n, tree.modulus());
    for (j, c) in tree.cycles().iter().enumerate() {
        t.set_column(j, &tree.coordinates(&c.relabel(map))?);
    }
    Ok(t)
}

/// The image of the automorphism group in Sp acting on cycle coordinates,
/// deduplicated and sorted. For m ≥ 3 a non-faithful action is a hard error:
/// the level structure is meant to kill all automorphisms, and a kernel
/// element would make basis orbits ill-sized. For m = 2 (genus 1) the kernel
/// is tolerated and orbits are counted through the image group.
pub fn automorphism_images(d: &Dessin, m: u8) -> Result<Vec<MatMod>, SymplecticError> {
    let tree = cycle_space_basis(d, m)?;
    let auts = d.automorphisms();
    let mut images: HashMap<u64, MatMod> = HashMap::new();
    for sigma in &auts {
        let t = relabel_coordinate_action(&tree, sigma)?;
        if m >= 3 && !sigma.is_identity() && t == MatMod::identity(tree.rank(), m) {
            return Err(SymplecticError::TrivialAction(m));
        }
        images.entry(t.pack().expect("2g×2g fits")).or_insert(t);
    }
    let mut out: Vec<(u64, MatMod)> = images.into_iter().collect();
    out.sort_by_key(|(code, _)| *code);
    Ok(out.into_iter().map(|(_, t)| t).collect())
}

/// Minimal packed code of { H·X : H in images }: the canonical
/// representative of a basis orbit under the automorphism action, in
/// coordinates.
pub fn orbit_minimal_code(images: &[MatMod], x: &MatMod) -> u64 {
    images
        .iter()
        .map(|h| h.mul(x).pack().expect("2g×2g fits"))
        .min()
        .expect("automorphism image group contains the identity")
}
