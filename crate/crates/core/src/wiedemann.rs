//! Probabilistic black-box rank over GF(2): blocked Wiedemann.
//!
//! The rank of a sparse matrix is inferred without elimination, from the
//! spectral data a black box reveals. The matrix is compressed on its long
//! side by a random sparse matrix (rank-preserving with high probability),
//! padded square, and sandwiched between random unit-triangular
//! preconditioners, giving an operator `B`. A width-64 block Krylov
//! sequence `S_k = Uᵀ Bᵏ V` is recorded and a minimal approximant basis of
//! `[G; I]`, `G(x) = Σ S_k xᵏ`, is computed by an iterative order-basis
//! pass.
//!
//! The stable basis rows `[f | h]` satisfy `f·G = h` exactly with
//! `deg h ≤ deg f`, which makes their reversals generators of the
//! once-shifted sequence `S_{k+1}`. By minimal realization theory the sum
//! of their row degrees equals the rank of the block Hankel matrix
//! `[S_{i+j+1}]`, which factors as `O·B·R` through the observability and
//! reachability matrices of `(Uᵀ, B, V)`. When the projections capture the
//! full structure — the point of the width-64 margin — that rank is exactly
//! `rank B`, with no assumption on the nilpotent structure of `B` (over
//! GF(2) no cheap preconditioner controls it, so estimators that need a
//! semisimple zero eigenvalue systematically undercount here).
//!
//! Capture failure can only lower the estimate, so the protocol accepts the
//! largest value once enough independent trials reproduce it; the
//! certificate carries the seed, the trial count, and a conservative
//! failure-probability bound.

use std::collections::{HashMap, VecDeque};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::gf2::{rank_dense, Gf2Error, SparseBoolMatrix};

/// Conservative per-trial capture-failure exponent: one randomized trial
/// misses structure with probability at most 2⁻⁸. Empirically the rate is
/// far lower across thousands of matrices of varied shape and density, but
/// the small field resists clean bounds, so the certificate only claims
/// this much per trial.
const PER_TRIAL_FAILURE_EXPONENT: u32 = 8;

/// Extra trials allowed past the acceptance requirement before giving up.
const EXTRA_TRIAL_BUDGET: u32 = 12;

const BLOCK: usize = 64;

/// Columns (or rows) kept beyond the short dimension when compressing;
/// the compression loses rank with probability vanishing in the slack.
const COMPRESSION_SLACK: usize = 32;

/// Coordinates XORed into each projection row when the operator is larger
/// than the block. Single-coordinate rows mix too weakly through sparse
/// triangular preconditioners (boundary coordinates are nearly invisible);
/// weight-16 random combinations behave like dense projections at a cost
/// of `16 · 64` XORs per step.
const PROJECTION_WEIGHT: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankMethod {
    Dense,
    Wiedemann,
}

/// Exact rational `numerator / denominator`, small enough for certificates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbabilityBound {
    pub numerator: u64,
    pub denominator: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct RankCertificate {
    pub rank: usize,
    pub method: RankMethod,
    pub trials: u32,
    pub failure_probability_bound: ProbabilityBound,
    pub seed: u64,
}

impl RankCertificate {
    pub fn exact(rank: usize) -> Self {
        RankCertificate {
            rank,
            method: RankMethod::Dense,
            trials: 1,
            failure_probability_bound: ProbabilityBound {
                numerator: 0,
                denominator: 1,
            },
            seed: 0,
        }
    }
}

/// Sparse strictly-triangular part of a unit-triangular preconditioner;
/// applying it adds a few earlier (or later) coordinates to each slot.
struct UnitTriangular {
    entries: Vec<Vec<u32>>,
}

impl UnitTriangular {
    fn random_lower(n: usize, per_row: usize, rng: &mut ChaCha8Rng) -> Self {
        let entries = (0..n)
            .map(|i| {
                let mut picks: Vec<u32> = (0..per_row.min(i))
                    .map(|_| rng.gen_range(0..i) as u32)
                    .collect();
                picks.sort_unstable();
                picks.dedup();
                picks
            })
            .collect();
        UnitTriangular { entries }
    }

    fn random_upper(n: usize, per_row: usize, rng: &mut ChaCha8Rng) -> Self {
        let entries = (0..n)
            .map(|i| {
                let span = n - 1 - i;
                let mut picks: Vec<u32> = (0..per_row.min(span))
                    .map(|_| (i + 1 + rng.gen_range(0..span)) as u32)
                    .collect();
                picks.sort_unstable();
                picks.dedup();
                picks
            })
            .collect();
        UnitTriangular { entries }
    }

    fn apply(&self, v: &[u64]) -> Vec<u64> {
        self.entries
            .iter()
            .enumerate()
            .map(|(i, row)| row.iter().fold(v[i], |acc, &j| acc ^ v[j as usize]))
            .collect()
    }
}

/// How many output slots each input coordinate of the compressor feeds.
/// Odd, so a single coordinate can never map to zero; five, so that two
/// coordinates collide on identical slot sets only with negligible
/// probability even at millions of coordinates.
const COMPRESSION_REGULARITY: usize = 5;

/// Multiplies `a` by a random sparse matrix on the long side so the result
/// is nearly square: `a·K` (columns compressed) or `K·a` (rows). The
/// compressor is column-regular — every input coordinate lands in exactly
/// [`COMPRESSION_REGULARITY`] random output slots — so no part of the
/// matrix escapes it. Rank can only drop, and drops with negligible
/// probability.
fn compress_long_dimension(
    a: &SparseBoolMatrix,
    rng: &mut ChaCha8Rng,
) -> Result<SparseBoolMatrix, Gf2Error> {
    let short = a.rows().min(a.cols());
    let target = short + COMPRESSION_SLACK;
    if a.rows().max(a.cols()) <= target + target / 8 {
        return Ok(a.clone());
    }
    let compress_rows = a.rows() >= a.cols();
    let long = a.rows().max(a.cols());
    // per output slot, the list of input coordinates feeding it
    let mut slots: Vec<Vec<u32>> = vec![Vec::new(); target];
    for coord in 0..long {
        for pick in sample(rng, target, COMPRESSION_REGULARITY.min(target)) {
            slots[pick].push(coord as u32);
        }
    }
    let by_col;
    let source = if compress_rows {
        a
    } else {
        by_col = a.transpose();
        &by_col
    };
    let mut new_rows: Vec<Vec<u32>> = Vec::with_capacity(target);
    let mut scratch = Vec::new();
    for slot in &slots {
        let mut acc: Vec<u32> = Vec::new();
        for &coord in slot {
            xor_sorted_into(&mut acc, source.row(coord as usize), &mut scratch);
        }
        new_rows.push(acc);
    }
    let compressed = SparseBoolMatrix::from_rows(target, source.cols(), new_rows)?;
    Ok(if compress_rows {
        compressed
    } else {
        compressed.transpose()
    })
}

fn xor_sorted_into(acc: &mut Vec<u32>, other: &[u32], scratch: &mut Vec<u32>) {
    scratch.clear();
    let mut i = 0;
    let mut j = 0;
    while i < acc.len() && j < other.len() {
        match acc[i].cmp(&other[j]) {
            std::cmp::Ordering::Less => {
                scratch.push(acc[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                scratch.push(other[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    scratch.extend_from_slice(&acc[i..]);
    scratch.extend_from_slice(&other[j..]);
    std::mem::swap(acc, scratch);
}

/// One polynomial row of the order basis over GF(2), 2·BLOCK bit columns.
/// `coeffs[i]` is the coefficient of xⁱ.
struct PolyRow {
    coeffs: VecDeque<[u64; 2]>,
}

impl PolyRow {
    fn unit(col: usize) -> Self {
        let mut c = [0u64; 2];
        c[col / 64] = 1 << (col % 64);
        PolyRow {
            coeffs: VecDeque::from([c]),
        }
    }

    fn degree_bound(&self) -> usize {
        self.coeffs.len() - 1
    }

    fn shift_up(&mut self) {
        self.coeffs.push_front([0, 0]);
    }

    fn add_assign(&mut self, other: &PolyRow) {
        while self.coeffs.len() < other.coeffs.len() {
            self.coeffs.push_back([0, 0]);
        }
        for (a, b) in self.coeffs.iter_mut().zip(other.coeffs.iter()) {
            a[0] ^= b[0];
            a[1] ^= b[1];
        }
    }
}

/// Iterative order-basis ("M-Basis") computation: returns 2·BLOCK polynomial
/// rows M with M·[G; I] ≡ 0 mod x^d, minimal row degrees, for the series
/// G(x) = Σ S_k xᵏ given by the block sequence.
fn order_basis(seq: &[[u64; BLOCK]]) -> Vec<PolyRow> {
    let rows = 2 * BLOCK;
    let mut m: Vec<PolyRow> = (0..rows).map(PolyRow::unit).collect();
    let mut degs: Vec<usize> = vec![0; rows];
    // E_k as 2·BLOCK rows of 64 bits: top block = S_k, bottom block = I at k=0.
    let e_at = |k: usize, row: usize| -> u64 {
        if row < BLOCK {
            seq[k][row]
        } else if k == 0 {
            1u64 << (row - BLOCK)
        } else {
            0
        }
    };
    for k in 0..seq.len() {
        // discrepancy of each row at order k
        let mut delta = vec![0u64; rows];
        for (r, row) in m.iter().enumerate() {
            let mut acc = 0u64;
            for (j, coeff) in row.coeffs.iter().enumerate().take(k + 1) {
                let back = k - j;
                for (word, &bits) in coeff.iter().enumerate() {
                    let mut b = bits;
                    while b != 0 {
                        let t = b.trailing_zeros() as usize;
                        acc ^= e_at(back, word * 64 + t);
                        b &= b - 1;
                    }
                }
            }
            delta[r] = acc;
        }
        // eliminate: pick minimal-degree pivots, clear their column from the
        // other still-unpivoted rows, then advance the pivots by x
        let mut pivoted = vec![false; rows];
        loop {
            let mut best: Option<usize> = None;
            for r in 0..rows {
                if !pivoted[r] && delta[r] != 0 {
                    match best {
                        Some(b) if (degs[b], b) <= (degs[r], r) => {}
                        _ => best = Some(r),
                    }
                }
            }
            let Some(p) = best else { break };
            pivoted[p] = true;
            let col = delta[p].trailing_zeros();
            for r in 0..rows {
                if r != p && !pivoted[r] && delta[r] >> col & 1 == 1 {
                    delta[r] ^= delta[p];
                    let (head, tail) = if r < p {
                        let (h, t) = m.split_at_mut(p);
                        (&mut h[r], &t[0])
                    } else {
                        let (h, t) = m.split_at_mut(r);
                        (&mut t[0], &h[p])
                    };
                    head.add_assign(tail);
                }
            }
        }
        for r in 0..rows {
            if pivoted[r] {
                m[r].shift_up();
                degs[r] += 1;
            }
        }
    }
    m
}

/// Sum of the minimal row indices of the approximant basis: the degrees of
/// the 64 lowest-degree rows, each measured over both coefficient blocks.
/// This is the Hankel rank of the once-shifted projected sequence.
fn minimal_index_sum(seq: &[[u64; BLOCK]]) -> Option<usize> {
    let basis = order_basis(seq);
    let mut order: Vec<usize> = (0..2 * BLOCK).collect();
    order.sort_by_key(|&r| (basis[r].degree_bound(), r));
    let mut degree_sum = 0usize;
    for &r in order[..BLOCK].iter() {
        let mut actual_deg: Option<usize> = None;
        for (j, c) in basis[r].coeffs.iter().enumerate() {
            if c[0] != 0 || c[1] != 0 {
                actual_deg = Some(j);
            }
        }
        degree_sum += actual_deg?; // an identically zero basis row is broken
    }
    Some(degree_sum)
}

/// Drives the preconditioned black box and records the projected Krylov
/// sequence. Returns the padded square dimension and the sequence.
fn krylov_sequence(
    a: &SparseBoolMatrix,
    rng: &mut ChaCha8Rng,
) -> Option<(usize, Vec<[u64; BLOCK]>)> {
    let compressed = compress_long_dimension(a, rng).ok()?;
    let n = compressed.rows().max(compressed.cols()).max(1);
    let left = UnitTriangular::random_lower(n, 2, rng);
    let right = UnitTriangular::random_upper(n, 2, rng);
    // Identity rows see everything when the state fits in one block;
    // beyond that each row XORs a random weight-16 set of coordinates.
    let u_rows: Vec<Vec<usize>> = if n <= BLOCK {
        (0..n).map(|i| vec![i]).collect()
    } else {
        (0..BLOCK)
            .map(|_| sample(rng, n, PROJECTION_WEIGHT).into_iter().collect())
            .collect()
    };
    let mut w: Vec<u64> = (0..n).map(|_| rng.gen()).collect();
    let steps = 2 * n.div_ceil(BLOCK) + 32;
    let mut seq: Vec<[u64; BLOCK]> = Vec::with_capacity(steps);
    for _ in 0..steps {
        let mut s = [0u64; BLOCK];
        for (slot, combo) in s.iter_mut().zip(&u_rows) {
            for &r in combo {
                *slot ^= w[r];
            }
        }
        seq.push(s);
        // w ← L·Ā·R·w with Ā the square zero-padding of the compressed matrix
        let rw = right.apply(&w);
        let aw = compressed.mul_block(&rw[..compressed.cols()]);
        let mut padded = vec![0u64; n];
        padded[..aw.len()].copy_from_slice(&aw);
        w = left.apply(&padded);
    }
    Some((n, seq))
}

/// One randomized rank trial; None when the trial's own validity checks fail.
fn rank_trial(a: &SparseBoolMatrix, trial_seed: u64) -> Option<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
    let (_n, seq) = krylov_sequence(a, &mut rng)?;
    let estimate = minimal_index_sum(&seq)?;
    if estimate > a.rows().min(a.cols()) {
        return None;
    }
    Some(estimate)
}

/// Probabilistic rank: trials repeat until the *largest* value seen has
/// been produced by `needed` independent trials, where `needed` makes the
/// conservative failure bound `2^(−8·needed)` at most
/// `1 − target_confidence`. Capture failure only ever lowers a trial's
/// estimate, so smaller values never outvote a larger one: accepting the
/// maximum is wrong only if every trial so far failed, or an invalid
/// overestimate repeated `needed` times.
pub fn rank_wiedemann(
    a: &SparseBoolMatrix,
    seed: u64,
    target_confidence: f64,
) -> Result<RankCertificate, Gf2Error> {
    if !(0.0..1.0).contains(&target_confidence) {
        return Err(Gf2Error::BadConfidence(target_confidence));
    }
    if a.rows() == 0 || a.cols() == 0 || a.nnz() == 0 {
        return Ok(RankCertificate {
            rank: 0,
            method: RankMethod::Wiedemann,
            trials: 0,
            failure_probability_bound: ProbabilityBound {
                numerator: 0,
                denominator: 1,
            },
            seed,
        });
    }
    let miss = 1.0 - target_confidence;
    let needed = {
        let mut k = 2u32;
        while k < 7 && miss < 0.5f64.powi((PER_TRIAL_FAILURE_EXPONENT * k) as i32) {
            k += 1;
        }
        k
    };
    let budget = needed + EXTRA_TRIAL_BUDGET;

    let mut votes: HashMap<usize, u32> = HashMap::new();
    let mut best = 0usize;
    let mut trials_run = 0u32;
    while trials_run < budget {
        let trial_seed = seed
            .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(trials_run as u64 + 1));
        trials_run += 1;
        let Some(value) = rank_trial(a, trial_seed) else {
            continue;
        };
        let count = votes.entry(value).or_insert(0);
        *count += 1;
        best = best.max(value);
        if value == best && *count >= needed {
            let exponent = (PER_TRIAL_FAILURE_EXPONENT * *count).min(63);
            return Ok(RankCertificate {
                rank: value,
                method: RankMethod::Wiedemann,
                trials: trials_run,
                failure_probability_bound: ProbabilityBound {
                    numerator: 1,
                    denominator: 1u64 << exponent,
                },
                seed,
            });
        }
    }
    let mut tally: Vec<(usize, u32)> = votes.into_iter().collect();
    tally.sort_by_key(|&(rank, count)| (std::cmp::Reverse(count), std::cmp::Reverse(rank)));
    let first = tally.first().map(|&(r, _)| r).unwrap_or(0);
    let second = tally.get(1).map(|&(r, _)| r).unwrap_or(first);
    Err(Gf2Error::TrialsDisagree {
        first,
        second,
        budget,
    })
}

/// Rank with the dense oracle when the matrix fits under the cap, otherwise
/// blocked Wiedemann.
pub fn rank_certified(
    a: &SparseBoolMatrix,
    seed: u64,
    target_confidence: f64,
    dense_cap: Option<u64>,
) -> Result<RankCertificate, Gf2Error> {
    match rank_dense(a, dense_cap) {
        Ok(rank) => Ok(RankCertificate::exact(rank)),
        Err(Gf2Error::DenseCapExceeded { .. }) => rank_wiedemann(a, seed, target_confidence),
        Err(e) => Err(e),
    }
}
