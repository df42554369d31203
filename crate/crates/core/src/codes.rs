//! Repetition and planar surface-code layouts, and their deformations.
//!
//! Layouts live on an integer grid. The surface code uses the unrotated
//! planar lattice of size `(2d−1) × (2d−1)`: data qubits sit on sites
//! with even coordinate sum, X-plaquettes on `(odd row, even col)` sites,
//! Z-plaquettes on `(even row, odd col)` sites. Bulk plaquettes have
//! weight 4, boundary plaquettes weight 3. The logical pair is a
//! horizontal X-string along row 0 and a vertical Z-string along
//! column 0, both of weight d.
//!
//! Punching a hole removes stabilizers from the measured set. Each
//! removed generator leaves behind a temporary logical qubit whose
//! first operator *is* the missing stabilizer and whose partner is the
//! canonical minimum-weight operator anticommuting with it while
//! commuting with everything still measured.

use crate::bits::{Bits, GaussSolver};
use crate::pauli::{in_group, LogicalPair, OperatorSearch, PauliError, PauliOperator};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CodeError {
    #[error("repetition code needs at least 2 qubits, got {0}")]
    RepetitionTooSmall(usize),
    #[error("surface code distance must be odd and at least 3, got {0}")]
    BadDistance(usize),
    #[error("stabilizer index {0} out of range")]
    StabilizerOutOfRange(usize),
    #[error("qubit index {0} out of range")]
    QubitOutOfRange(usize),
    #[error("repeated qubit {0} in path")]
    RepeatedQubit(usize),
    #[error("no silent partner exists for removed stabilizer {0}")]
    NoSilentPartner(usize),
    #[error(transparent)]
    Pauli(#[from] PauliError),
}

/// Stabilizer flavour: product of X letters or product of Z letters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum StabKind {
    XType,
    ZType,
}

/// One stabilizer generator together with its measurement metadata.
#[derive(Debug, Clone)]
pub struct Stabilizer {
    pub op: PauliOperator,
    pub kind: StabKind,
    /// Grid coordinate of the ancilla used in circuit-mode measurement.
    pub ancilla: (i32, i32),
    /// Data qubits in the fixed CNOT order (N, W, E, S on the surface).
    pub data: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum CodeKind {
    Repetition,
    Surface,
}

/// A stabilizer-code layout: geometry, generators and logical operators.
#[derive(Debug, Clone)]
pub struct CodeLayout {
    pub kind: CodeKind,
    pub n_data: usize,
    pub coords: Vec<(i32, i32)>,
    pub stabilizers: Vec<Stabilizer>,
    pub logicals: Vec<LogicalPair>,
    pub distance: usize,
}

/// A deliberately unmeasured region of a layout.
#[derive(Debug, Clone)]
pub struct Hole {
    /// Indices into the *original* layout's stabilizer list.
    pub removed: BTreeSet<usize>,
    /// One pair per removed generator, in ascending index order. The
    /// member equal to the missing stabilizer plays X_S for X-type
    /// holes and Z_S for Z-type holes; its partner is the canonical
    /// minimum-weight completion.
    pub silent_logicals: Vec<LogicalPair>,
}

/// Repetition code on a line: stabilizers Z_i Z_{i+1}, logical
/// X̄ = X_1…X_n and Z̄ = Z_1.
pub fn repetition_code(n_c: usize) -> Result<CodeLayout, CodeError> {
    if n_c < 2 {
        return Err(CodeError::RepetitionTooSmall(n_c));
    }
    let coords: Vec<(i32, i32)> = (0..n_c).map(|i| (0, 2 * i as i32)).collect();
    let mut stabilizers = Vec::with_capacity(n_c - 1);
    for i in 0..n_c - 1 {
        stabilizers.push(Stabilizer {
            op: PauliOperator::z_string(n_c, &[i, i + 1])?,
            kind: StabKind::ZType,
            ancilla: (0, 2 * i as i32 + 1),
            data: vec![i, i + 1],
        });
    }
    let logicals = vec![LogicalPair::new(
        PauliOperator::x_string(n_c, &(0..n_c).collect::<Vec<_>>())?,
        PauliOperator::z_string(n_c, &[0])?,
    )];
    Ok(CodeLayout {
        kind: CodeKind::Repetition,
        n_data: n_c,
        coords,
        stabilizers,
        logicals,
        distance: n_c,
    })
}

/// Planar (unrotated) surface code of odd distance d:
/// `d² + (d−1)²` data qubits and `d² − 1` stabilizers.
pub fn surface_code(d: usize) -> Result<CodeLayout, CodeError> {
    if d < 3 || d % 2 == 0 {
        return Err(CodeError::BadDistance(d));
    }
    let g = (2 * d - 1) as i32;
    let mut coords = Vec::new();
    for r in 0..g {
        for c in 0..g {
            if (r + c) % 2 == 0 {
                coords.push((r, c));
            }
        }
    }
    let n_data = coords.len();
    let index_of = |r: i32, c: i32| -> Option<usize> {
        if r < 0 || c < 0 || r >= g || c >= g || (r + c) % 2 != 0 {
            None
        } else {
            // row r holds ceil(g/2) sites when r is even, floor(g/2) when odd
            let before: i32 = (0..r).map(|rr| (g + ((rr + 1) % 2)) / 2).sum();
            let within = c / 2;
            Some((before + within) as usize)
        }
    };

    let mut stabilizers = Vec::new();
    for r in 0..g {
        for c in 0..g {
            if (r + c) % 2 != 1 {
                continue;
            }
            let kind = if r % 2 == 1 {
                StabKind::XType
            } else {
                StabKind::ZType
            };
            // N, W, E, S
            let neighbors = [(r - 1, c), (r, c - 1), (r, c + 1), (r + 1, c)];
            let data: Vec<usize> = neighbors
                .iter()
                .filter_map(|&(nr, nc)| index_of(nr, nc))
                .collect();
            let op = match kind {
                StabKind::XType => PauliOperator::x_string(n_data, &data)?,
                StabKind::ZType => PauliOperator::z_string(n_data, &data)?,
            };
            stabilizers.push(Stabilizer {
                op,
                kind,
                ancilla: (r, c),
                data,
            });
        }
    }

    let x_row: Vec<usize> = (0..g)
        .step_by(2)
        .map(|c| index_of(0, c).expect("row 0 data site"))
        .collect();
    let z_col: Vec<usize> = (0..g)
        .step_by(2)
        .map(|r| index_of(r, 0).expect("column 0 data site"))
        .collect();
    let logicals = vec![LogicalPair::new(
        PauliOperator::x_string(n_data, &x_row)?,
        PauliOperator::z_string(n_data, &z_col)?,
    )];

    Ok(CodeLayout {
        kind: CodeKind::Surface,
        n_data,
        coords,
        stabilizers,
        logicals,
        distance: d,
    })
}

/// Outcome of checking a layout against the stabilizer-code contract.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidationReport {
    Pass,
    Fail(String),
}

impl ValidationReport {
    pub fn is_pass(&self) -> bool {
        matches!(self, ValidationReport::Pass)
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ValidationReport::Pass => write!(f, "pass"),
            ValidationReport::Fail(why) => write!(f, "fail: {why}"),
        }
    }
}

impl CodeLayout {
    /// Checks the layout invariants and returns the first violation:
    /// stabilizer lengths, mutual commutation, GF(2) independence, the
    /// counting identity, and logical-pair relations against the
    /// stabilizers.
    pub fn validate(&self) -> ValidationReport {
        for (i, s) in self.stabilizers.iter().enumerate() {
            if s.op.len() != self.n_data {
                return ValidationReport::Fail(format!(
                    "stabilizer {i} acts on {} qubits, layout has {}",
                    s.op.len(),
                    self.n_data
                ));
            }
        }
        for (i, a) in self.stabilizers.iter().enumerate() {
            for (j, b) in self.stabilizers.iter().enumerate().skip(i + 1) {
                if !a.op.commutes(&b.op).expect("lengths checked") {
                    return ValidationReport::Fail(format!(
                        "stabilizers {i} and {j} do not commute"
                    ));
                }
            }
        }
        let rows: Vec<Bits> = self
            .stabilizers
            .iter()
            .map(|s| s.op.symplectic_vector())
            .collect();
        let mut solver = GaussSolver::new(2 * self.n_data, rows.len().max(1));
        for (i, row) in rows.iter().enumerate() {
            if !solver.insert(row) {
                return ValidationReport::Fail(format!(
                    "stabilizer {i} is dependent on earlier stabilizers"
                ));
            }
        }
        if self.stabilizers.len() + self.logicals.len() != self.n_data {
            return ValidationReport::Fail(format!(
                "counting identity violated: {} stabilizers + {} logical pairs != {} data qubits",
                self.stabilizers.len(),
                self.logicals.len(),
                self.n_data
            ));
        }
        for (p, pair) in self.logicals.iter().enumerate() {
            if pair.x_op.len() != self.n_data || pair.z_op.len() != self.n_data {
                return ValidationReport::Fail(format!("logical pair {p} has wrong length"));
            }
            if pair.x_op.commutes(&pair.z_op).expect("lengths checked") {
                return ValidationReport::Fail(format!(
                    "logical pair {p} does not anticommute internally"
                ));
            }
            for (i, s) in self.stabilizers.iter().enumerate() {
                for op in pair.ops() {
                    if !op.commutes(&s.op).expect("lengths checked") {
                        return ValidationReport::Fail(format!(
                            "logical pair {p} anticommutes with stabilizer {i}"
                        ));
                    }
                }
            }
        }
        ValidationReport::Pass
    }

    /// Index of the stabilizer whose ancilla sits at `site`, if any.
    pub fn stabilizer_at(&self, site: (i32, i32)) -> Option<usize> {
        self.stabilizers.iter().position(|s| s.ancilla == site)
    }

    /// Index of the data qubit at `coord`, if any.
    pub fn data_at(&self, coord: (i32, i32)) -> Option<usize> {
        self.coords.iter().position(|&c| c == coord)
    }

    pub fn stabilizer_ops(&self) -> Vec<PauliOperator> {
        self.stabilizers.iter().map(|s| s.op.clone()).collect()
    }

    /// Human-readable dump of the geometry, generators and logicals.
    pub fn describe(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        let name = match self.kind {
            CodeKind::Repetition => format!("repetition N_c={}", self.n_data),
            CodeKind::Surface => format!("surface d={}", self.distance),
        };
        let n_x = self
            .stabilizers
            .iter()
            .filter(|s| s.kind == StabKind::XType)
            .count();
        let _ = writeln!(out, "code: {name}");
        let _ = writeln!(out, "data qubits: {}", self.n_data);
        let _ = writeln!(
            out,
            "stabilizers: {} ({} X-type, {} Z-type)",
            self.stabilizers.len(),
            n_x,
            self.stabilizers.len() - n_x
        );
        let _ = writeln!(out, "logical pairs: {}", self.logicals.len());
        let _ = writeln!(out, "distance: {}", self.distance);
        let _ = writeln!(out, "data coordinates:");
        for (i, (r, c)) in self.coords.iter().enumerate() {
            let _ = writeln!(out, "  q{i}: ({r}, {c})");
        }
        let _ = writeln!(out, "stabilizer supports:");
        for (i, s) in self.stabilizers.iter().enumerate() {
            let kind = match s.kind {
                StabKind::XType => "X",
                StabKind::ZType => "Z",
            };
            let support: Vec<String> = s.data.iter().map(|q| format!("q{q}")).collect();
            let _ = writeln!(
                out,
                "  g{i}: {kind}-type @ ({}, {}) on [{}]",
                s.ancilla.0,
                s.ancilla.1,
                support.join(", ")
            );
        }
        let _ = writeln!(out, "logical operators:");
        for (i, pair) in self.logicals.iter().enumerate() {
            let _ = writeln!(
                out,
                "  pair {i}: X-like on {:?}, Z-like on {:?}",
                pair.x_op.support(),
                pair.z_op.support()
            );
        }
        out
    }
}

/// Removes stabilizers from the measured set.
///
/// Each removed generator g becomes one member of a silent logical pair;
/// its partner is the canonical minimum-weight Pauli that anticommutes
/// with g and commutes with every kept stabilizer, every other removed
/// stabilizer and every previously constructed partner. The deformed
/// layout keeps the original logical pairs and appends the silent pairs,
/// preserving the counting identity.
pub fn punch_hole(
    layout: &CodeLayout,
    removed: &BTreeSet<usize>,
) -> Result<(CodeLayout, Hole), CodeError> {
    for &i in removed {
        if i >= layout.stabilizers.len() {
            return Err(CodeError::StabilizerOutOfRange(i));
        }
    }
    let n = layout.n_data;
    let kept: Vec<&Stabilizer> = layout
        .stabilizers
        .iter()
        .enumerate()
        .filter(|(i, _)| !removed.contains(i))
        .map(|(_, s)| s)
        .collect();
    let removed_ops: Vec<&PauliOperator> =
        removed.iter().map(|&i| &layout.stabilizers[i].op).collect();

    let mut silent = Vec::with_capacity(removed.len());
    let mut partners: Vec<PauliOperator> = Vec::new();
    for (pos, &idx) in removed.iter().enumerate() {
        let missing = &layout.stabilizers[idx].op;
        let mut commute: Vec<&PauliOperator> = kept.iter().map(|s| &s.op).collect();
        for (other_pos, op) in removed_ops.iter().enumerate() {
            if other_pos != pos {
                commute.push(op);
            }
        }
        commute.extend(partners.iter());
        let partner = OperatorSearch {
            n,
            anticommute: vec![missing],
            commute,
            exclude_span: None,
            max_weight: n,
        }
        .run()
        .ok_or(CodeError::NoSilentPartner(idx))?;
        let pair = if missing.is_z_type() && !partner.is_z_type() {
            LogicalPair::new(partner.clone(), missing.clone())
        } else {
            LogicalPair::new(missing.clone(), partner.clone())
        };
        partners.push(partner);
        silent.push(pair);
    }

    let mut logicals = layout.logicals.clone();
    logicals.extend(silent.iter().cloned());
    let deformed = CodeLayout {
        kind: layout.kind,
        n_data: n,
        coords: layout.coords.clone(),
        stabilizers: kept.into_iter().cloned().collect(),
        logicals,
        distance: layout.distance,
    };
    Ok((
        deformed,
        Hole {
            removed: removed.clone(),
            silent_logicals: silent,
        },
    ))
}

/// Product of single-qubit X (or Z) letters along a path of distinct
/// data qubits. An empty path yields the identity.
pub fn loop_operator(
    layout: &CodeLayout,
    path: &[usize],
    kind: StabKind,
) -> Result<PauliOperator, CodeError> {
    let mut seen = BTreeSet::new();
    for &q in path {
        if q >= layout.n_data {
            return Err(CodeError::QubitOutOfRange(q));
        }
        if !seen.insert(q) {
            return Err(CodeError::RepeatedQubit(q));
        }
    }
    Ok(match kind {
        StabKind::XType => PauliOperator::x_string(layout.n_data, path)?,
        StabKind::ZType => PauliOperator::z_string(layout.n_data, path)?,
    })
}

/// Heisenberg-picture update of a logical operator transported around a
/// loop: plain Pauli multiplication. Whether the update is trivial is a
/// group-membership question for the caller (`in_group` against the
/// measured stabilizers).
pub fn braid_transform(
    logical: &PauliOperator,
    loop_op: &PauliOperator,
) -> Result<PauliOperator, PauliError> {
    logical.mul(loop_op)
}

/// Data-qubit perimeter of the 3×3 block of plaquettes centred on
/// `center` — a closed loop two lattice steps out from the centre site.
pub fn plaquette_block_ring(
    layout: &CodeLayout,
    center: (i32, i32),
) -> Result<Vec<usize>, CodeError> {
    let (r0, c0) = center;
    let mut path = Vec::with_capacity(12);
    for dc in [-2, 0, 2] {
        for dr in [-3, 3] {
            let coord = (r0 + dr, c0 + dc);
            path.push(
                layout
                    .data_at(coord)
                    .ok_or(CodeError::QubitOutOfRange(usize::MAX))?,
            );
        }
    }
    for dr in [-2, 0, 2] {
        for dc in [-3, 3] {
            let coord = (r0 + dr, c0 + dc);
            path.push(
                layout
                    .data_at(coord)
                    .ok_or(CodeError::QubitOutOfRange(usize::MAX))?,
            );
        }
    }
    path.sort_unstable();
    Ok(path)
}

/// A surface-code patch hosting two double-hole logical qubits and one
/// single-stabilizer silent hole, used to exercise braid algebra.
///
/// Qubit A is a pair of Z-plaquette holes connected by the X-string
/// `x_a`; qubit B is a pair of X-plaquette holes (roles of X and Z
/// exchanged); the silent hole is a single X-plaquette whose operators
/// are `x_s` (the missing stabilizer) and `z_s` (its minimal partner).
#[derive(Debug)]
pub struct BraidScenario {
    pub original: CodeLayout,
    pub deformed: CodeLayout,
    pub hole: Hole,
    /// X-string linking qubit A's two holes.
    pub x_a: PauliOperator,
    /// Loop operator of qubit B's upper hole (the removed X-plaquette).
    pub x_b: PauliOperator,
    /// The missing stabilizer of the silent hole.
    pub x_s: PauliOperator,
    /// Minimal partner of the silent hole.
    pub z_s: PauliOperator,
    /// Closed X-loop enclosing only the silent hole.
    pub ring_silent: PauliOperator,
    /// Closed X-loop enclosing only qubit B's upper hole.
    pub ring_b_upper: PauliOperator,
    /// Closed X-loop enclosing no hole at all.
    pub ring_trivial: PauliOperator,
}

impl BraidScenario {
    /// Builds the scenario on a distance-d patch, d ≥ 7 and odd. Hole
    /// sites are fixed in the top-left 13×13 corner of the lattice.
    pub fn new(d: usize) -> Result<Self, CodeError> {
        if d < 7 || d % 2 == 0 {
            return Err(CodeError::BadDistance(d));
        }
        let original = surface_code(d)?;
        let a_holes = [(8, 1), (8, 5)];
        let b_upper = (3, 8);
        let b_lower = (9, 8);
        let silent_site = (3, 4);
        let trivial_center = (9, 4);

        let mut removed = BTreeSet::new();
        for site in a_holes
            .iter()
            .copied()
            .chain([b_upper, b_lower, silent_site])
        {
            removed.insert(
                original
                    .stabilizer_at(site)
                    .ok_or(CodeError::StabilizerOutOfRange(usize::MAX))?,
            );
        }
        let (deformed, hole) = punch_hole(&original, &removed)?;

        let silent_idx = original
            .stabilizer_at(silent_site)
            .expect("silent site checked");
        let silent_pos = removed
            .iter()
            .position(|&i| i == silent_idx)
            .expect("silent index is in the removed set");
        let silent_pair = &hole.silent_logicals[silent_pos];
        let x_s = silent_pair.x_op.clone();
        let z_s = silent_pair.z_op.clone();

        let x_b = original.stabilizers[original.stabilizer_at(b_upper).expect("b site")]
            .op
            .clone();
        // X-string between A's holes: the data qubits of row 8 strictly
        // between the two Z-plaquette columns.
        let x_a_path: Vec<usize> = (a_holes[0].1 + 1..a_holes[1].1)
            .filter(|c| c % 2 == 0)
            .map(|c| original.data_at((8, c)).expect("row 8 data site"))
            .collect();
        let x_a = loop_operator(&original, &x_a_path, StabKind::XType)?;

        let ring_silent = loop_operator(
            &original,
            &plaquette_block_ring(&original, silent_site)?,
            StabKind::XType,
        )?;
        let ring_b_upper = loop_operator(
            &original,
            &plaquette_block_ring(&original, b_upper)?,
            StabKind::XType,
        )?;
        let ring_trivial = loop_operator(
            &original,
            &plaquette_block_ring(&original, trivial_center)?,
            StabKind::XType,
        )?;

        Ok(Self {
            original,
            deformed,
            hole,
            x_a,
            x_b,
            x_s,
            z_s,
            ring_silent,
            ring_b_upper,
            ring_trivial,
        })
    }

    /// True if `op` is a product of the deformed layout's stabilizers.
    pub fn in_kept_group(&self, op: &PauliOperator) -> bool {
        in_group(op, &self.deformed.stabilizer_ops())
            .map(|d| d.is_some())
            .unwrap_or(false)
    }
}
