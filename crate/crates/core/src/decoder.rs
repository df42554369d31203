//! Syndrome decoding shared by the coherent and frame simulators.
//!
//! Repetition code: the syndrome determines the error pattern up to a
//! global complement; the decoder returns the lighter of the two
//! (majority-consistent minimal flip set).
//!
//! Surface code: defects are matched minimum-weight, pairwise or to the
//! nearest open boundary. Matching is exact (subset-sum dynamic program
//! over all pairings) when a graph has at most [`EXACT_MATCHING_LIMIT`]
//! defects, and greedy nearest-pair beyond that. X-error chains
//! terminate on the left/right boundaries, Z-error chains on
//! top/bottom, matching the logical operator orientations.
//!
//! With measurement errors, defects live in spacetime: a defect is a
//! change of a stabilizer's effective value between consecutive rounds,
//! and matching weight is lattice distance plus time separation.

use crate::codes::{CodeKind, CodeLayout, StabKind};
use crate::pauli::{PauliKind, PauliOperator};
use thiserror::Error;

/// Above this many defects in one matching graph the decoder switches
/// from the exact pairing DP to greedy nearest-pair.
pub const EXACT_MATCHING_LIMIT: usize = 10;

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("syndrome has {got} entries, layout has {expected} stabilizers")]
    WrongSyndromeLength { got: usize, expected: usize },
    #[error("defect at stabilizer {0} cannot be matched")]
    UnmatchedDefect(usize),
}

/// One matching node: a lattice site plus a time coordinate (0 for
/// single-round decoding).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Defect {
    r: i32,
    c: i32,
    t: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Match {
    Pair(usize, usize),
    Boundary(usize),
}

/// Minimum-cost matching where every defect pairs with another defect or
/// is absorbed by its own boundary.
fn match_defects(
    defects: &[Defect],
    pair_cost: impl Fn(&Defect, &Defect) -> usize,
    boundary_cost: impl Fn(&Defect) -> usize,
) -> Vec<Match> {
    let k = defects.len();
    if k == 0 {
        return Vec::new();
    }
    if k <= EXACT_MATCHING_LIMIT {
        exact_matching(defects, &pair_cost, &boundary_cost)
    } else {
        greedy_matching(defects, &pair_cost, &boundary_cost)
    }
}

fn exact_matching(
    defects: &[Defect],
    pair_cost: &impl Fn(&Defect, &Defect) -> usize,
    boundary_cost: &impl Fn(&Defect) -> usize,
) -> Vec<Match> {
    let k = defects.len();
    let full = (1usize << k) - 1;
    let mut best = vec![usize::MAX; full + 1];
    let mut choice: Vec<Match> = vec![Match::Boundary(usize::MAX); full + 1];
    best[0] = 0;
    for mask in 1..=full {
        let i = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << i);
        // boundary option first so ties resolve toward the boundary
        let b = boundary_cost(&defects[i]);
        if best[rest] != usize::MAX && best[rest].saturating_add(b) < best[mask] {
            best[mask] = best[rest] + b;
            choice[mask] = Match::Boundary(i);
        }
        let mut js = rest;
        while js != 0 {
            let j = js.trailing_zeros() as usize;
            js &= js - 1;
            let sub = rest & !(1 << j);
            if best[sub] == usize::MAX {
                continue;
            }
            let cost = best[sub] + pair_cost(&defects[i], &defects[j]);
            if cost < best[mask] {
                best[mask] = cost;
                choice[mask] = Match::Pair(i, j);
            }
        }
    }
    let mut out = Vec::new();
    let mut mask = full;
    while mask != 0 {
        let ch = choice[mask];
        out.push(ch);
        match ch {
            Match::Boundary(i) => mask &= !(1 << i),
            Match::Pair(i, j) => mask &= !((1 << i) | (1 << j)),
        }
    }
    out
}

fn greedy_matching(
    defects: &[Defect],
    pair_cost: &impl Fn(&Defect, &Defect) -> usize,
    boundary_cost: &impl Fn(&Defect) -> usize,
) -> Vec<Match> {
    let mut alive: Vec<usize> = (0..defects.len()).collect();
    let mut out = Vec::new();
    while !alive.is_empty() {
        let mut best_cost = usize::MAX;
        let mut best_match = Match::Boundary(alive[0]);
        for (ai, &i) in alive.iter().enumerate() {
            let b = boundary_cost(&defects[i]);
            if b < best_cost {
                best_cost = b;
                best_match = Match::Boundary(i);
            }
            for &j in alive.iter().skip(ai + 1) {
                let c = pair_cost(&defects[i], &defects[j]);
                if c < best_cost {
                    best_cost = c;
                    best_match = Match::Pair(i, j);
                }
            }
        }
        match best_match {
            Match::Boundary(i) => alive.retain(|&x| x != i),
            Match::Pair(i, j) => alive.retain(|&x| x != i && x != j),
        }
        out.push(best_match);
    }
    out
}

/// Decodes one effective syndrome row (values ±1, freeze already
/// applied) into a Pauli recovery.
pub fn decode(layout: &CodeLayout, syndrome: &[i8]) -> Result<PauliOperator, DecodeError> {
    if syndrome.len() != layout.stabilizers.len() {
        return Err(DecodeError::WrongSyndromeLength {
            got: syndrome.len(),
            expected: layout.stabilizers.len(),
        });
    }
    match layout.kind {
        CodeKind::Repetition => decode_repetition(layout, syndrome),
        CodeKind::Surface => decode_surface(layout, syndrome),
    }
}

fn decode_repetition(
    layout: &CodeLayout,
    syndrome: &[i8],
) -> Result<PauliOperator, DecodeError> {
    let n = layout.n_data;
    // the two syndrome-consistent patterns differ by the complement
    let mut pattern = vec![false; n];
    for i in 1..n {
        pattern[i] = pattern[i - 1] ^ (syndrome[i - 1] == -1);
    }
    let weight = pattern.iter().filter(|&&b| b).count();
    let flips: Vec<usize> = if 2 * weight > n {
        (0..n).filter(|&q| !pattern[q]).collect()
    } else {
        (0..n).filter(|&q| pattern[q]).collect()
    };
    Ok(PauliOperator::x_string(n, &flips).expect("indices in range"))
}

fn decode_surface(layout: &CodeLayout, syndrome: &[i8]) -> Result<PauliOperator, DecodeError> {
    let g = 2 * layout.distance as i32 - 1;
    let mut x_flips: Vec<usize> = Vec::new();
    let mut z_flips: Vec<usize> = Vec::new();
    for kind in [StabKind::ZType, StabKind::XType] {
        let defects: Vec<Defect> = layout
            .stabilizers
            .iter()
            .zip(syndrome)
            .filter(|(s, &v)| s.kind == kind && v == -1)
            .map(|(s, _)| Defect {
                r: s.ancilla.0,
                c: s.ancilla.1,
                t: 0,
            })
            .collect();
        let matches = match_defects(
            &defects,
            |a, b| (((a.r - b.r).abs() + (a.c - b.c).abs()) / 2) as usize,
            |d| boundary_distance(g, kind, d),
        );
        let flips = if kind == StabKind::ZType {
            &mut x_flips
        } else {
            &mut z_flips
        };
        for m in matches {
            apply_match_path(layout, g, kind, &defects, m, flips);
        }
    }
    let x = PauliOperator::x_string(layout.n_data, &dedup_xor(x_flips)).expect("in range");
    let z = PauliOperator::z_string(layout.n_data, &dedup_xor(z_flips)).expect("in range");
    Ok(x.mul(&z).expect("same length"))
}

/// Steps from a defect to its nearest absorbing boundary: left/right for
/// Z-plaquette defects (X-error chains), top/bottom for X-plaquette
/// defects (Z-error chains).
fn boundary_distance(g: i32, kind: StabKind, d: &Defect) -> usize {
    let axis = match kind {
        StabKind::ZType => d.c,
        StabKind::XType => d.r,
    };
    (((axis + 1) / 2).min((g - axis) / 2)) as usize
}

/// Appends the data-qubit flips realising one matching decision.
fn apply_match_path(
    layout: &CodeLayout,
    g: i32,
    kind: StabKind,
    defects: &[Defect],
    m: Match,
    flips: &mut Vec<usize>,
) {
    match m {
        Match::Pair(i, j) => {
            let (a, b) = (&defects[i], &defects[j]);
            match kind {
                StabKind::ZType => {
                    // rows at column a.c, then columns at row b.r
                    push_row_walk(layout, a.c, a.r, b.r, flips);
                    push_col_walk(layout, b.r, a.c, b.c, flips);
                }
                StabKind::XType => {
                    push_col_walk(layout, a.r, a.c, b.c, flips);
                    push_row_walk(layout, b.c, a.r, b.r, flips);
                }
            }
        }
        Match::Boundary(i) => {
            let d = &defects[i];
            match kind {
                StabKind::ZType => {
                    if (d.c + 1) / 2 <= (g - d.c) / 2 {
                        push_col_walk(layout, d.r, d.c, -1, flips);
                    } else {
                        push_col_walk(layout, d.r, d.c, g, flips);
                    }
                }
                StabKind::XType => {
                    if (d.r + 1) / 2 <= (g - d.r) / 2 {
                        push_row_walk(layout, d.c, d.r, -1, flips);
                    } else {
                        push_row_walk(layout, d.c, d.r, g, flips);
                    }
                }
            }
        }
    }
}

/// Data qubits strictly between rows r1 and r2 in the given column.
fn push_row_walk(layout: &CodeLayout, col: i32, r1: i32, r2: i32, flips: &mut Vec<usize>) {
    let (lo, hi) = (r1.min(r2), r1.max(r2));
    let mut r = lo + 1;
    while r < hi {
        if let Some(q) = layout.data_at((r, col)) {
            flips.push(q);
        }
        r += 2;
    }
}

/// Data qubits strictly between columns c1 and c2 in the given row.
fn push_col_walk(layout: &CodeLayout, row: i32, c1: i32, c2: i32, flips: &mut Vec<usize>) {
    let (lo, hi) = (c1.min(c2), c1.max(c2));
    let mut c = lo + 1;
    while c < hi {
        if let Some(q) = layout.data_at((row, c)) {
            flips.push(q);
        }
        c += 2;
    }
}

/// XOR-style dedup: qubits flipped an even number of times drop out.
fn dedup_xor(mut flips: Vec<usize>) -> Vec<usize> {
    flips.sort_unstable();
    let mut out = Vec::with_capacity(flips.len());
    let mut iter = flips.into_iter().peekable();
    while let Some(q) = iter.next() {
        let mut count = 1;
        while iter.peek() == Some(&q) {
            iter.next();
            count += 1;
        }
        if count % 2 == 1 {
            out.push(q);
        }
    }
    out
}

/// Spacetime decoding over several effective rounds (values ±1, freeze
/// already applied). Defects are changes between consecutive rounds,
/// with an implicit all-+1 round before the first; matching weight is
/// lattice distance plus time separation, and recoveries are the
/// spatial projections of the matched paths.
pub fn decode_spacetime(
    layout: &CodeLayout,
    rounds: &[Vec<i8>],
) -> Result<PauliOperator, DecodeError> {
    let m = layout.stabilizers.len();
    for row in rounds {
        if row.len() != m {
            return Err(DecodeError::WrongSyndromeLength {
                got: row.len(),
                expected: m,
            });
        }
    }
    if layout.kind == CodeKind::Repetition {
        return decode_spacetime_repetition(layout, rounds);
    }
    let g = 2 * layout.distance as i32 - 1;
    let mut x_flips: Vec<usize> = Vec::new();
    let mut z_flips: Vec<usize> = Vec::new();
    for kind in [StabKind::ZType, StabKind::XType] {
        let mut defects = Vec::new();
        for (si, s) in layout.stabilizers.iter().enumerate() {
            if s.kind != kind {
                continue;
            }
            let mut prev = 1i8;
            for (t, row) in rounds.iter().enumerate() {
                if row[si] != prev {
                    defects.push(Defect {
                        r: s.ancilla.0,
                        c: s.ancilla.1,
                        t: t as i32,
                    });
                }
                prev = row[si];
            }
        }
        let matches = match_defects(
            &defects,
            |a, b| {
                ((((a.r - b.r).abs() + (a.c - b.c).abs()) / 2) + (a.t - b.t).abs()) as usize
            },
            |d| boundary_distance(g, kind, d),
        );
        let flips = if kind == StabKind::ZType {
            &mut x_flips
        } else {
            &mut z_flips
        };
        for m in matches {
            apply_match_path(layout, g, kind, &defects, m, flips);
        }
    }
    let x = PauliOperator::x_string(layout.n_data, &dedup_xor(x_flips)).expect("in range");
    let z = PauliOperator::z_string(layout.n_data, &dedup_xor(z_flips)).expect("in range");
    Ok(x.mul(&z).expect("same length"))
}

fn decode_spacetime_repetition(
    layout: &CodeLayout,
    rounds: &[Vec<i8>],
) -> Result<PauliOperator, DecodeError> {
    let n = layout.n_data as i32;
    let mut defects = Vec::new();
    for si in 0..layout.stabilizers.len() {
        let mut prev = 1i8;
        for (t, row) in rounds.iter().enumerate() {
            if row[si] != prev {
                defects.push(Defect {
                    r: 0,
                    c: si as i32,
                    t: t as i32,
                });
            }
            prev = row[si];
        }
    }
    let matches = match_defects(
        &defects,
        |a, b| ((a.c - b.c).abs() + (a.t - b.t).abs()) as usize,
        |d| ((d.c + 1).min(n - 1 - d.c)) as usize,
    );
    let mut flips = Vec::new();
    for m in matches {
        match m {
            Match::Pair(i, j) => {
                let (lo, hi) = (defects[i].c.min(defects[j].c), defects[i].c.max(defects[j].c));
                for q in lo + 1..=hi {
                    flips.push(q as usize);
                }
            }
            Match::Boundary(i) => {
                let c = defects[i].c;
                if c < n - 1 - c {
                    for q in 0..=c {
                        flips.push(q as usize);
                    }
                } else {
                    for q in c + 1..n {
                        flips.push(q as usize);
                    }
                }
            }
        }
    }
    Ok(PauliOperator::x_string(layout.n_data, &dedup_xor(flips)).expect("in range"))
}

/// Effective syndrome seen by the decoder under the freeze policy:
/// skipped entries repeat the stabilizer's last observed value, +1
/// before any observation.
pub fn effective_rows(rows: &[Vec<Option<i8>>]) -> Vec<Vec<i8>> {
    let m = rows.first().map_or(0, Vec::len);
    let mut last = vec![1i8; m];
    let mut out = Vec::with_capacity(rows.len());
    for row in rows {
        let mut eff = Vec::with_capacity(m);
        for (j, v) in row.iter().enumerate() {
            match v {
                Some(x) => {
                    last[j] = *x;
                    eff.push(*x);
                }
                None => eff.push(last[j]),
            }
        }
        out.push(eff);
    }
    out
}

/// Weight-preserving helper for tests: a recovery which, applied on top
/// of an error pattern, restores all syndromes to +1.
pub fn syndrome_of(layout: &CodeLayout, error: &PauliOperator) -> Vec<i8> {
    layout
        .stabilizers
        .iter()
        .map(|s| {
            let anti = s.op.x_bits().dot(error.z_bits()) ^ s.op.z_bits().dot(error.x_bits());
            if anti {
                -1
            } else {
                1
            }
        })
        .collect()
}

/// Minimal-weight error consistent with a syndrome, by exhaustive
/// search over X patterns. Test oracle for small repetition codes.
pub fn brute_force_min_flips(layout: &CodeLayout, syndrome: &[i8]) -> Option<PauliOperator> {
    let n = layout.n_data;
    assert!(n <= 20, "brute force oracle is for small codes");
    let mut best: Option<PauliOperator> = None;
    for mask in 0u32..(1 << n) {
        let support: Vec<usize> = (0..n).filter(|q| mask >> q & 1 == 1).collect();
        let cand = PauliOperator::x_string(n, &support).expect("in range");
        if syndrome_of(layout, &cand) == syndrome {
            let better = match &best {
                None => true,
                Some(b) => cand.weight() < b.weight(),
            };
            if better {
                best = Some(cand);
            }
        }
    }
    best
}

/// Letters of a recovery as (qubit, kind) pairs, for logging.
pub fn recovery_letters(op: &PauliOperator) -> Vec<(usize, PauliKind)> {
    (0..op.len())
        .filter_map(|q| match (op.x_bit(q), op.z_bit(q)) {
            (false, false) => None,
            (true, false) => Some((q, PauliKind::X)),
            (false, true) => Some((q, PauliKind::Z)),
            (true, true) => Some((q, PauliKind::Y)),
        })
        .collect()
}
