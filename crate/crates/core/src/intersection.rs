//! The intersection pairing on first homology, evaluated two ways.
//!
//! **Corner table** (trivalent dessins only): every dart contributes a weight
//! looked up from a fixed 9×9 table of rationals, indexed by the pair of
//! chain values on the corner `(d, ρ0·d)` for each of the two chains. The
//! weights are symmetry factors with denominators 2 and 3; summed over all
//! corners of a trivalent dessin the total is an integer, and reducing it
//! mod m gives the pairing. On vertices of valency ≥ 4 the table is simply
//! wrong — straight-through strands become invisible to consecutive-corner
//! reads — so this evaluator refuses non-trivalent input.
//!
//! **Crossing count** (any valency): draw both cycles on the ribbon surface
//! and count signed crossings exactly (see [`crate::crossings`]).
//!
//! Both evaluators work on signed lifts with values {0, ±1}. They agree on
//! their common domain; [`intersection_number`] dispatches to the corner
//! table when every vertex is trivalent and to the crossing count otherwise.

use num::rational::Ratio;
use num::Zero;

use crate::crossings::crossing_number;
use crate::cycles::{signed_lift, Cycle, CycleError, SignedChain};
use crate::modm::MatMod;
use crate::ribbon::Dessin;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IntersectionError {
    #[error(transparent)]
    Cycle(#[from] CycleError),
    #[error("cycle moduli {0} and {1} differ")]
    MixedModuli(u8, u8),
    #[error("corner-table sum {0} is not an integer; corner indexing misread")]
    NonIntegral(Ratio<i64>),
    #[error("corner table is only valid on trivalent dessins (found valency {0})")]
    NotTrivalent(usize),
    #[error("pairing matrix is degenerate (det = 0 mod {0}); intersection form must be nondegenerate")]
    DegeneratePairing(u8),
}

/// Corner weights, scaled by 6 to stay integral. Rows and columns are indexed
/// by ordered value pairs in the order
/// (0,0), (0,1), (0,−1), (1,0), (1,1), (1,−1), (−1,0), (−1,1), (−1,−1):
/// the row is the first chain's corner pair, the column the second's.
/// True values are these entries divided by 6.
const CORNER_WEIGHTS_X6: [[i64; 9]; 9] = [
    [0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, -3, 3, 3, 0, 6, -3, -6, 0],
    [0, 2, -2, 2, -2, -3, -2, 3, 2],
    [0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, -2, 2, -2, 2, 3, 2, -3, -2],
    [0, 3, -3, -3, 0, -6, 3, 6, 0],
];

#[inline]
fn pair_index(x: i8, y: i8) -> usize {
    let f = |v: i8| match v {
        0 => 0,
        1 => 1,
        _ => 2,
    };
    f(x) * 3 + f(y)
}

/// Corner-table evaluation on signed lifts: exact rational accumulation over
/// all darts, with a hard integrality check. Valid only when every vertex is
/// trivalent.
pub fn intersection_via_corner_table(
    d: &Dessin,
    a: &SignedChain,
    b: &SignedChain,
) -> Result<i64, IntersectionError> {
    if let Some(bad) = d.rho0().cycles().iter().find(|c| c.len() != 3) {
        return Err(IntersectionError::NotTrivalent(bad.len()));
    }
    let mut total: Ratio<i64> = Ratio::zero();
    for dart in 0..d.n_darts() as u32 {
        let next = d.rho0().apply(dart);
        let row = pair_index(a.value(dart), -a.value(next));
        let col = pair_index(b.value(dart), -b.value(next));
        total += Ratio::new(CORNER_WEIGHTS_X6[row][col], 6);
    }
    if !total.is_integer() {
        return Err(IntersectionError::NonIntegral(total));
    }
    Ok(total.to_integer())
}

/// Crossing-count evaluation on signed lifts; any valency.
pub fn intersection_via_crossings(d: &Dessin, a: &SignedChain, b: &SignedChain) -> i64 {
    crossing_number(d, a, b)
}

/// The intersection number ⟨a, b⟩ in `Z/m`: corner table on trivalent
/// dessins, signed crossing count otherwise.
pub fn intersection_number(
    d: &Dessin,
    a: &Cycle,
    b: &Cycle,
    m: u8,
) -> Result<u8, IntersectionError> {
    if a.modulus() != b.modulus() {
        return Err(IntersectionError::MixedModuli(a.modulus(), b.modulus()));
    }
    if a.modulus() != m {
        return Err(IntersectionError::MixedModuli(a.modulus(), m));
    }
    let la = signed_lift(d, a);
    let lb = signed_lift(d, b);
    let trivalent = d.rho0().cycles().iter().all(|c| c.len() == 3);
    let value = if trivalent {
        intersection_via_corner_table(d, &la, &lb)?
    } else {
        intersection_via_crossings(d, &la, &lb)
    };
    Ok(value.rem_euclid(m as i64) as u8)
}

/// Gram matrix of the intersection pairing on the given cycles. Must be
/// antisymmetric; if it is square of full size 2g it must be invertible.
pub fn pairing_matrix(
    d: &Dessin,
    cycles: &[Cycle],
    m: u8,
) -> Result<MatMod, IntersectionError> {
    let k = cycles.len();
    let mut g = MatMod::zero(k, k, m);
    for i in 0..k {
        for j in (i + 1)..k {
            let v = intersection_number(d, &cycles[i], &cycles[j], m)?;
            g.set(i, j, v);
            g.set(j, i, (m - v) % m);
        }
    }
    for (i, cycle) in cycles.iter().enumerate() {
        let diag = intersection_number(d, cycle, cycle, m)?;
        debug_assert_eq!(diag, 0, "pairing of a cycle with itself");
        g.set(i, i, diag);
    }
    let euler = d.euler_data().expect("validated at construction");
    if k == 2 * euler.genus && g.det() == 0 {
        return Err(IntersectionError::DegeneratePairing(m));
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cycles::cycle_space_basis;
    use crate::modm::{add_mod, sub_mod};
    use crate::ribbon::enumerate_trivalent_one_face;
    use crate::ribbon::test_fixtures::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn mk_chain(d: &Dessin, m: u8, edge_values: &[u8]) -> SignedChain {
        signed_lift(d, &Cycle::from_edge_values(d, m, edge_values).unwrap())
    }

    #[test]
    fn corner_table_structure() {
        // Any corner pair containing a zero contributes nothing.
        for x in [0usize, 1, 2, 3, 6] {
            assert!(CORNER_WEIGHTS_X6[x].iter().all(|&v| v == 0));
        }
        // Negating both values of the first chain's corner negates the weight.
        for (r, nr) in [(4usize, 8usize), (5, 7)] {
            for (w, nw) in CORNER_WEIGHTS_X6[r].iter().zip(&CORNER_WEIGHTS_X6[nr]) {
                assert_eq!(*w, -nw);
            }
        }
    }

    #[test]
    fn theta_mod3_anchor() {
        // Hand-computed reference values for two explicit mod-3 cycles.
        let d = theta();
        let a = mk_chain(&d, 3, &[1, 2, 0]); // darts 0,2,4 carry 1, −1, 0
        let b = mk_chain(&d, 3, &[0, 1, 2]);
        assert_eq!(intersection_via_corner_table(&d, &a, &b).unwrap(), 1);
        assert_eq!(intersection_via_corner_table(&d, &b, &a).unwrap(), -1);
        assert_eq!(intersection_via_corner_table(&d, &a, &a).unwrap(), 0);
    }

    #[test]
    fn crossing_sign_calibration() {
        // The crossing count must reproduce the corner table's signed value
        // on the θ anchor — this pins the global sign convention.
        let d = theta();
        let a = mk_chain(&d, 3, &[1, 2, 0]);
        let b = mk_chain(&d, 3, &[0, 1, 2]);
        assert_eq!(intersection_via_crossings(&d, &a, &b), 1);
        assert_eq!(intersection_via_crossings(&d, &b, &a), -1);
    }

    #[test]
    fn theta_mod2_known_pairing() {
        let d = theta();
        let e1 = Cycle::from_edge_values(&d, 2, &[1, 1, 0]).unwrap();
        let e2 = Cycle::from_edge_values(&d, 2, &[0, 1, 1]).unwrap();
        assert_eq!(intersection_number(&d, &e1, &e2, 2).unwrap(), 1);
        let g = pairing_matrix(&d, &[e1, e2], 2).unwrap();
        assert_eq!(g, MatMod::from_rows(&[vec![0, 1], vec![1, 0]], 2));
    }

    #[test]
    fn figure_eight_dispatches_to_crossings() {
        // The corner table refuses the 4-valent vertex; the dispatcher must
        // still produce the true pairing of the two loops.
        let d = figure_eight();
        let u = Cycle::from_edge_values(&d, 2, &[1, 0]).unwrap();
        let v = Cycle::from_edge_values(&d, 2, &[0, 1]).unwrap();
        assert!(matches!(
            intersection_via_corner_table(&d, &signed_lift(&d, &u), &signed_lift(&d, &v)),
            Err(IntersectionError::NotTrivalent(4))
        ));
        assert_eq!(intersection_number(&d, &u, &v, 2).unwrap(), 1);
    }

    #[test]
    fn corner_table_non_integral_on_four_valent() {
        // On the figure-eight mod 3 the corner sum can land on ±1/3 —
        // demonstrating why the table must refuse non-trivalent input even
        // before the integrality check.
        let d = figure_eight();
        let u = mk_chain(&d, 3, &[1, 1]);
        let w = mk_chain(&d, 3, &[1, 0]);
        let mut total: Ratio<i64> = Ratio::zero();
        for dart in 0..d.n_darts() as u32 {
            let next = d.rho0().apply(dart);
            let row = pair_index(u.value(dart), -u.value(next));
            let col = pair_index(w.value(dart), -w.value(next));
            total += Ratio::new(CORNER_WEIGHTS_X6[row][col], 6);
        }
        assert!(!total.is_integer(), "expected a fractional sum, got {total}");
    }

    #[test]
    fn antisymmetry_and_bilinearity_mod3() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for d in enumerate_trivalent_one_face(2).unwrap() {
            let basis = cycle_space_basis(&d, 3).unwrap();
            for _ in 0..40 {
                let rand_cycle = |rng: &mut ChaCha8Rng| {
                    let coords: Vec<u8> = (0..4).map(|_| rng.gen_range(0..3)).collect();
                    basis.combine(&coords)
                };
                let a = rand_cycle(&mut rng);
                let a2 = rand_cycle(&mut rng);
                let b = rand_cycle(&mut rng);
                let ab = intersection_number(&d, &a, &b, 3).unwrap();
                let ba = intersection_number(&d, &b, &a, 3).unwrap();
                assert_eq!(add_mod(ab, ba, 3), 0);
                let sum_ab = intersection_number(&d, &a.add(&a2), &b, 3).unwrap();
                let a2b = intersection_number(&d, &a2, &b, 3).unwrap();
                assert_eq!(sum_ab, add_mod(ab, a2b, 3));
                assert_eq!(sub_mod(ab, ab, 3), 0);
            }
        }
    }

    #[test]
    fn corner_table_equals_crossings_sample() {
        // A quick slice of the full equivalence property (the integration
        // suite runs 1000 pairs per scheme).
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for d in enumerate_trivalent_one_face(2).unwrap() {
            let basis = cycle_space_basis(&d, 3).unwrap();
            for _ in 0..25 {
                let coords_a: Vec<u8> = (0..4).map(|_| rng.gen_range(0..3)).collect();
                let coords_b: Vec<u8> = (0..4).map(|_| rng.gen_range(0..3)).collect();
                let a = signed_lift(&d, &basis.combine(&coords_a));
                let b = signed_lift(&d, &basis.combine(&coords_b));
                let table = intersection_via_corner_table(&d, &a, &b).unwrap();
                let drawn = intersection_via_crossings(&d, &a, &b);
                assert_eq!(
                    table.rem_euclid(3),
                    drawn.rem_euclid(3),
                    "evaluators disagree on {d:?}"
                );
            }
        }
    }

    #[test]
    fn genus_two_tree_basis_pairing_invertible() {
        for d in enumerate_trivalent_one_face(2).unwrap() {
            let basis = cycle_space_basis(&d, 3).unwrap();
            let g = pairing_matrix(&d, basis.cycles(), 3).unwrap();
            assert_ne!(g.det(), 0);
            assert!(g.add(&g.transpose()).is_zero());
        }
    }

    #[test]
    fn mod2_lift_choice_is_immaterial() {
        // Two mod-2 cycles paired via crossings after flipping circuit
        // orientations by hand: results agree mod 2 with the standard lift.
        let d = theta();
        let e1 = Cycle::from_edge_values(&d, 2, &[1, 1, 0]).unwrap();
        let e2 = Cycle::from_edge_values(&d, 2, &[0, 1, 1]).unwrap();
        let l1 = signed_lift(&d, &e1);
        let l2 = signed_lift(&d, &e2);
        let flipped = SignedChain::flipped_for_tests(&l1);
        let x = intersection_via_crossings(&d, &l1, &l2);
        let y = intersection_via_crossings(&d, &flipped, &l2);
        assert_eq!(x.rem_euclid(2), y.rem_euclid(2));
        assert_eq!(x.abs(), 1);
    }
}
