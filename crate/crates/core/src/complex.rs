//! The dual cell complex of the decorated dessin family.
//!
//! A dimension-j cell is an isomorphism class of pairs (dessin with
//! `(6g−3) − j` edges, symplectic basis), the basis taken up to the dessin's
//! automorphisms. Cell identity is a canonical dessin code together with the
//! orbit-minimal packed coordinate matrix of the basis in the dessin's
//! spanning-tree cycle basis. The boundary operator contracts one edge at a
//! time and transports the basis along; entries are counted mod 2, so a
//! parent whose two edges land on the same child contributes nothing there.

use rayon::prelude::*;
use thiserror::Error;

use crate::cycles::{cycle_space_basis, CycleBasis, CycleError};
use crate::gf2::{rank_dense, Gf2Error, SparseBoolMatrix};
use crate::modm::{MatMod, ModError};
use crate::ribbon::{
    closure_under_contraction, enumerate_trivalent_one_face, CanonicalCode, Dessin, RibbonError,
};
use crate::symplectic::{
    automorphism_images, orbit_minimal_code, seed_symplectic_basis, symplectic_group,
    SymplecticError,
};
use num::rational::Ratio;

#[derive(Debug, Error)]
pub enum ComplexError {
    #[error(transparent)]
    Ribbon(#[from] RibbonError),
    #[error(transparent)]
    Cycle(#[from] CycleError),
    #[error(transparent)]
    Symplectic(#[from] SymplecticError),
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
    #[error(transparent)]
    Mod(#[from] ModError),
    #[error("complex has no cells")]
    Empty,
    #[error("boundary dimension {0} out of range 1..={1}")]
    DimOutOfRange(usize, usize),
    #[error("level {level}: dessin {dessin} has {orbits} basis orbits × {stabilizer} symmetries ≠ group order {group}")]
    OrbitSizeMismatch {
        level: usize,
        dessin: String,
        orbits: usize,
        stabilizer: usize,
        group: usize,
    },
    #[error("contraction from level {level} landed on a dessin missing from level {}", level + 1)]
    MissingContractionTarget { level: usize },
    #[error("transported basis not found among level-{level} cells (dessin {dessin}, code {code})")]
    CanonicalizationMiss {
        level: usize,
        dessin: u32,
        code: u64,
    },
}

/// A dessin of the complex together with the per-dessin data every cell on
/// it shares: the spanning-tree cycle basis and the automorphism action on
/// cycle coordinates.
#[derive(Debug)]
pub struct DecoratedDessin {
    dessin: Dessin,
    code: CanonicalCode,
    tree: CycleBasis,
    aut_images: Vec<MatMod>,
}

impl DecoratedDessin {
    pub fn dessin(&self) -> &Dessin {
        &self.dessin
    }

    pub fn code(&self) -> &CanonicalCode {
        &self.code
    }

    pub fn tree(&self) -> &CycleBasis {
        &self.tree
    }

    pub fn aut_images(&self) -> &[MatMod] {
        &self.aut_images
    }
}

/// One dimension of the complex: its dessins (sorted by canonical code) and
/// its cells as (dessin index, orbit-minimal packed basis code) pairs in
/// lexicographic order.
#[derive(Debug)]
pub struct Level {
    dessins: Vec<DecoratedDessin>,
    cells: Vec<(u32, u64)>,
}

impl Level {
    pub fn dessins(&self) -> &[DecoratedDessin] {
        &self.dessins
    }

    pub fn cells(&self) -> &[(u32, u64)] {
        &self.cells
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    fn dessin_index(&self, code: &CanonicalCode) -> Option<u32> {
        self.dessins
            .binary_search_by(|d| d.code.cmp(code))
            .ok()
            .map(|i| i as u32)
    }

    fn cell_index(&self, dessin: u32, code: u64) -> Option<u32> {
        self.cells
            .binary_search(&(dessin, code))
            .ok()
            .map(|i| i as u32)
    }
}

/// The whole complex: one level per dimension `0 ..= 4g−3`.
#[derive(Debug)]
pub struct CellComplex {
    genus: usize,
    m: u8,
    levels: Vec<Level>,
}

/// Per-dimension cell enumeration for one decorated dessin: all orbit-minimal
/// codes of `seed · Sp`, with the orbit-size consistency check.
fn enumerate_cells(
    level: usize,
    dd: &DecoratedDessin,
    m: u8,
    genus: usize,
) -> Result<Vec<u64>, ComplexError> {
    let seed = seed_symplectic_basis(&dd.dessin, m)?;
    let x0 = seed.coordinate_matrix(&dd.tree)?;
    let group = symplectic_group(genus, m);
    let mut codes: Vec<u64> = group
        .par_iter()
        .map(|e| orbit_minimal_code(&dd.aut_images, &x0.mul(e)))
        .collect();
    codes.sort_unstable();
    codes.dedup();
    if codes.len() * dd.aut_images.len() != group.len() {
        return Err(ComplexError::OrbitSizeMismatch {
            level,
            dessin: dd.code.to_string(),
            orbits: codes.len(),
            stabilizer: dd.aut_images.len(),
            group: group.len(),
        });
    }
    Ok(codes)
}

/// Builds the full complex for the given genus and modulus: enumerate the
/// trivalent dessins, close under edge contraction, and decorate every level
/// with its basis-orbit cells.
pub fn build_complex(genus: usize, m: u8) -> Result<CellComplex, ComplexError> {
    let tops = enumerate_trivalent_one_face(genus)?;
    let dessin_levels = closure_under_contraction(&tops)?;
    let mut levels = Vec::with_capacity(dessin_levels.len());
    for (j, dessins) in dessin_levels.into_iter().enumerate() {
        let decorated = dessins
            .into_iter()
            .map(|d| {
                let code = d.canonical_code();
                let tree = cycle_space_basis(&d, m)?;
                let aut_images = automorphism_images(&d, m)?;
                Ok(DecoratedDessin {
                    dessin: d,
                    code,
                    tree,
                    aut_images,
                })
            })
            .collect::<Result<Vec<_>, ComplexError>>()?;
        let mut cells = Vec::new();
        for (idx, dd) in decorated.iter().enumerate() {
            let codes = enumerate_cells(j, dd, m, genus)?;
            cells.extend(codes.into_iter().map(|c| (idx as u32, c)));
        }
        levels.push(Level {
            dessins: decorated,
            cells,
        });
    }
    Ok(CellComplex { genus, m, levels })
}

impl CellComplex {
    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn modulus(&self) -> u8 {
        self.m
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    /// Highest cell dimension (4g−3 when the closure is complete).
    pub fn top_dimension(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn cell_counts(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.cell_count()).collect()
    }

    /// The boundary operator from j-cells to (j−1)-cells: rows are indexed
    /// by (j−1)-cells, columns by j-cells, and the entry is the mod-2 count
    /// of contractible edges of the row cell whose contraction-and-transport
    /// lands on the column cell.
    pub fn boundary_matrix(&self, j: usize) -> Result<SparseBoolMatrix, ComplexError> {
        if j < 1 || j > self.top_dimension() {
            return Err(ComplexError::DimOutOfRange(j, self.top_dimension()));
        }
        let parents = &self.levels[j - 1];
        let children = &self.levels[j];
        let n = 2 * self.genus;

        struct EdgeMap {
            target: u32,
            transport: MatMod,
        }

        let maps: Vec<Vec<EdgeMap>> = parents
            .dessins
            .par_iter()
            .map(|dd| {
                dd.dessin
                    .contractible_edges()
                    .into_iter()
                    .map(|e| {
                        let contraction = dd.dessin.contract_edge(e)?;
                        let (code, _, relabel) = contraction.dessin.canonical_form();
                        let target = children
                            .dessin_index(&code)
                            .ok_or(ComplexError::MissingContractionTarget { level: j - 1 })?;
                        let child = &children.dessins[target as usize];
                        let mut transport = MatMod::zero(n, n, self.m);
                        for (i, t) in dd.tree.cycles().iter().enumerate() {
                            let pushed = t
                                .restrict_through_contraction(&contraction)
                                .relabel(&relabel);
                            transport.set_column(i, &child.tree.coordinates(&pushed)?);
                        }
                        Ok(EdgeMap { target, transport })
                    })
                    .collect::<Result<Vec<_>, ComplexError>>()
            })
            .collect::<Result<Vec<_>, ComplexError>>()?;

        let rows: Vec<Vec<u32>> = parents
            .cells
            .par_iter()
            .map(|&(d_idx, code)| {
                let x = MatMod::unpack(code, n, n, self.m)?;
                let mut cols = Vec::with_capacity(maps[d_idx as usize].len());
                for em in &maps[d_idx as usize] {
                    let moved = em.transport.mul(&x);
                    let child = &children.dessins[em.target as usize];
                    let min_code = orbit_minimal_code(&child.aut_images, &moved);
                    let col = children.cell_index(em.target, min_code).ok_or(
                        ComplexError::CanonicalizationMiss {
                            level: j,
                            dessin: em.target,
                            code: min_code,
                        },
                    )?;
                    cols.push(col);
                }
                cols.sort_unstable();
                // keep only columns hit an odd number of times
                let mut out = Vec::with_capacity(cols.len());
                let mut i = 0;
                while i < cols.len() {
                    let mut run = 1;
                    while i + run < cols.len() && cols[i + run] == cols[i] {
                        run += 1;
                    }
                    if run % 2 == 1 {
                        out.push(cols[i]);
                    }
                    i += run;
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>, ComplexError>>()?;

        Ok(SparseBoolMatrix::from_rows(
            parents.cell_count(),
            children.cell_count(),
            rows,
        )?)
    }
}

/// The Euler characteristic of the complex, both as the alternating cell-count
/// sum and divided by the symplectic group order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EulerCharacteristic {
    pub chi: i64,
    pub chi_over_group: Ratio<i64>,
}

pub fn euler_characteristic(complex: &CellComplex) -> Result<EulerCharacteristic, ComplexError> {
    let counts = complex.cell_counts();
    if counts.iter().sum::<usize>() == 0 {
        return Err(ComplexError::Empty);
    }
    let chi = counts
        .iter()
        .enumerate()
        .map(|(j, &n)| if j % 2 == 0 { n as i64 } else { -(n as i64) })
        .sum();
    let group = symplectic_group(complex.genus(), complex.modulus()).len() as i64;
    Ok(EulerCharacteristic {
        chi,
        chi_over_group: Ratio::new(chi, group),
    })
}

/// The genus-1 spine as a simplicial complex: one vertex per cell of the
/// dual complex, one 1-simplex per incident (top cell, face cell) flag.
#[derive(Debug)]
pub struct FlagComplex {
    vertices: usize,
    edges: Vec<(u32, u32)>,
}

impl FlagComplex {
    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    /// Simplicial boundary matrix: rows are vertices, columns are edges.
    pub fn boundary(&self) -> SparseBoolMatrix {
        let data = self
            .edges
            .iter()
            .map(|&(a, b)| {
                let mut row = vec![a, b];
                row.sort_unstable();
                row
            })
            .collect::<Vec<_>>();
        SparseBoolMatrix::from_rows(self.edges.len(), self.vertices, data)
            .expect("flag edges index valid vertices")
            .transpose()
    }

    /// GF(2) Betti numbers (b₀, b₁) by dense elimination.
    pub fn homology(&self) -> Result<(usize, usize), ComplexError> {
        let rank = rank_dense(&self.boundary(), None)?;
        Ok((self.vertices - rank, self.edges.len() - rank))
    }
}

/// Builds the genus-1 flag complex from the genus-1 dual complex: vertices
/// are its 0- and 1-cells, and flags join each 0-cell to the 1-cells its
/// boundary hits.
pub fn build_flag_complex_g1() -> Result<FlagComplex, ComplexError> {
    let complex = build_complex(1, 2)?;
    let n0 = complex.levels()[0].cell_count();
    let n1 = complex.levels()[1].cell_count();
    let boundary = complex.boundary_matrix(1)?;
    let mut edges = Vec::new();
    for r in 0..n0 {
        for &c in boundary.row(r) {
            edges.push((r as u32, (n0 + c as usize) as u32));
        }
    }
    Ok(FlagComplex {
        vertices: n0 + n1,
        edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::rank_elimination;

    #[test]
    fn genus_one_complex_shape() {
        let c = build_complex(1, 2).unwrap();
        assert_eq!(c.top_dimension(), 1);
        assert_eq!(c.cell_counts(), vec![2, 3]);
        assert_eq!(c.levels()[0].dessins().len(), 1, "one trivalent dessin");
        assert_eq!(c.levels()[1].dessins().len(), 1, "one contracted dessin");
    }

    #[test]
    fn genus_one_boundary_is_all_ones() {
        let c = build_complex(1, 2).unwrap();
        let b = c.boundary_matrix(1).unwrap();
        assert_eq!((b.rows(), b.cols()), (2, 3));
        for r in 0..2 {
            assert_eq!(b.row(r), &[0, 1, 2], "row {r} hits every column once");
        }
        assert_eq!(rank_dense(&b, None).unwrap(), 1);
        assert_eq!(rank_elimination(&b), 1);
    }

    #[test]
    fn genus_one_betti() {
        let c = build_complex(1, 2).unwrap();
        let b = c.boundary_matrix(1).unwrap();
        let rank = rank_dense(&b, None).unwrap();
        let betti = crate::gf2::betti_numbers(&c.cell_counts(), &[rank]).unwrap();
        assert_eq!(betti, vec![1, 2]);
    }

    #[test]
    fn genus_one_euler() {
        let c = build_complex(1, 2).unwrap();
        let e = euler_characteristic(&c).unwrap();
        assert_eq!(e.chi, -1);
        assert_eq!(e.chi_over_group, Ratio::new(-1, 6));
    }

    #[test]
    fn boundary_dimension_guard() {
        let c = build_complex(1, 2).unwrap();
        assert!(matches!(
            c.boundary_matrix(0),
            Err(ComplexError::DimOutOfRange(0, 1))
        ));
        assert!(matches!(
            c.boundary_matrix(2),
            Err(ComplexError::DimOutOfRange(2, 1))
        ));
    }

    #[test]
    fn genus_one_row_weights_match_contractible_edges() {
        let c = build_complex(1, 2).unwrap();
        let b = c.boundary_matrix(1).unwrap();
        for (idx, &(d_idx, _)) in c.levels()[0].cells().iter().enumerate() {
            let edges = c.levels()[0].dessins()[d_idx as usize]
                .dessin()
                .contractible_edges()
                .len();
            let weight = b.row(idx).len();
            assert!(weight <= edges);
            assert_eq!(weight % 2, edges % 2, "cancellation removes entries in pairs");
        }
    }

    #[test]
    fn flag_complex_matches_dual_homology() {
        let f = build_flag_complex_g1().unwrap();
        assert_eq!(f.vertex_count(), 5);
        assert_eq!(f.edges().len(), 6);
        assert_eq!(f.homology().unwrap(), (1, 2));
    }

    #[test]
    fn empty_complex_rejected_by_euler() {
        let c = CellComplex {
            genus: 1,
            m: 2,
            levels: vec![Level {
                dessins: Vec::new(),
                cells: Vec::new(),
            }],
        };
        assert!(matches!(euler_characteristic(&c), Err(ComplexError::Empty)));
    }
}
