//! Pauli-operator algebra over the GF(2) symplectic representation.
//!
//! An n-qubit Pauli is stored as X/Z bit vectors plus a power of the
//! imaginary unit: `i^phase · Π_q X_q^{x_q} Z_q^{z_q}`. With this
//! convention `Y = i·X·Z`, products track phases exactly in integer
//! arithmetic, and commutation is the symplectic inner product
//! `x_a·z_b ⊕ z_a·x_b`.

use crate::bits::{Bits, GaussSolver};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PauliError {
    #[error("operator length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("qubit index {index} out of range for {n} qubits")]
    QubitOutOfRange { index: usize, n: usize },
    #[error("invalid generator set: {0}")]
    InvalidGroup(String),
}

/// Single-qubit Pauli letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PauliKind {
    X,
    Y,
    Z,
}

/// An n-qubit Pauli operator with exact phase tracking.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    x: Bits,
    z: Bits,
    /// Power of i in the normal form `i^phase · Π X^x Z^z`, mod 4.
    phase: u8,
}

impl PauliOperator {
    pub fn identity(n: usize) -> Self {
        assert!(n >= 1, "operators act on at least one qubit");
        Self {
            x: Bits::zeros(n),
            z: Bits::zeros(n),
            phase: 0,
        }
    }

    /// Builds a Hermitian product of single-qubit letters.
    pub fn from_letters(n: usize, letters: &[(usize, PauliKind)]) -> Result<Self, PauliError> {
        let mut op = Self::identity(n);
        for &(q, kind) in letters {
            if q >= n {
                return Err(PauliError::QubitOutOfRange { index: q, n });
            }
            match kind {
                PauliKind::X => op.x.flip(q),
                PauliKind::Z => op.z.flip(q),
                PauliKind::Y => {
                    op.x.flip(q);
                    op.z.flip(q);
                    op.phase = (op.phase + 1) % 4;
                }
            }
        }
        Ok(op)
    }

    pub fn single(n: usize, qubit: usize, kind: PauliKind) -> Result<Self, PauliError> {
        Self::from_letters(n, &[(qubit, kind)])
    }

    /// X-type operator supported on the given qubits.
    pub fn x_string(n: usize, support: &[usize]) -> Result<Self, PauliError> {
        Self::from_letters(n, &support.iter().map(|&q| (q, PauliKind::X)).collect::<Vec<_>>())
    }

    /// Z-type operator supported on the given qubits.
    pub fn z_string(n: usize, support: &[usize]) -> Result<Self, PauliError> {
        Self::from_letters(n, &support.iter().map(|&q| (q, PauliKind::Z)).collect::<Vec<_>>())
    }

    /// Number of qubits the operator acts on (always ≥ 1).
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn x_bit(&self, q: usize) -> bool {
        self.x.get(q)
    }

    pub fn z_bit(&self, q: usize) -> bool {
        self.z.get(q)
    }

    pub fn x_bits(&self) -> &Bits {
        &self.x
    }

    pub fn z_bits(&self) -> &Bits {
        &self.z
    }

    /// Number of qubits on which the operator acts non-trivially.
    pub fn weight(&self) -> usize {
        let mut w = 0;
        for q in 0..self.len() {
            if self.x.get(q) || self.z.get(q) {
                w += 1;
            }
        }
        w
    }

    /// Qubits in the support, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&q| self.x.get(q) || self.z.get(q))
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    /// True if the operator is a non-identity product of X letters only.
    pub fn is_x_type(&self) -> bool {
        self.z.is_zero() && !self.x.is_zero()
    }

    /// True if the operator is a non-identity product of Z letters only.
    pub fn is_z_type(&self) -> bool {
        self.x.is_zero() && !self.z.is_zero()
    }

    pub fn letter(&self, q: usize) -> char {
        match (self.x.get(q), self.z.get(q)) {
            (false, false) => 'I',
            (true, false) => 'X',
            (false, true) => 'Z',
            (true, true) => 'Y',
        }
    }

    /// The (x|z) concatenation used for GF(2) linear algebra.
    pub fn symplectic_vector(&self) -> Bits {
        let n = self.len();
        let mut v = Bits::zeros(2 * n);
        for q in 0..n {
            if self.x.get(q) {
                v.set(q, true);
            }
            if self.z.get(q) {
                v.set(n + q, true);
            }
        }
        v
    }

    fn check_len(&self, other: &Self) -> Result<(), PauliError> {
        if self.len() == other.len() {
            Ok(())
        } else {
            Err(PauliError::LengthMismatch(self.len(), other.len()))
        }
    }

    /// Group product `self · other` with the phase tracked mod 4.
    pub fn mul(&self, other: &Self) -> Result<Self, PauliError> {
        self.check_len(other)?;
        // Reordering Z^{z_a} past X^{x_b} flips a sign per overlap.
        let reorder = 2 * (self.z.overlap(&other.x) % 2) as u8;
        let mut x = self.x.clone();
        x.xor_assign(&other.x);
        let mut z = self.z.clone();
        z.xor_assign(&other.z);
        Ok(Self {
            x,
            z,
            phase: (self.phase + other.phase + reorder) % 4,
        })
    }

    /// True iff the operators commute as matrices.
    pub fn commutes(&self, other: &Self) -> Result<bool, PauliError> {
        self.check_len(other)?;
        Ok(!(self.x.dot(&other.z) ^ self.z.dot(&other.x)))
    }
}

impl std::fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        // Each Y letter carries its own factor of i, so the displayed
        // prefix is the residual phase relative to the letter product.
        let mut ny = 0u8;
        for q in 0..self.len() {
            if self.x.get(q) && self.z.get(q) {
                ny = (ny + 1) % 4;
            }
        }
        let display_phase = (self.phase + 4 - ny) % 4;
        let prefix = ["", "i", "-", "-i"][display_phase as usize];
        write!(f, "{prefix}")?;
        for q in 0..self.len() {
            write!(f, "{}", self.letter(q))?;
        }
        Ok(())
    }
}

impl std::fmt::Debug for PauliOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self}")
    }
}

/// Result of a group-membership solve: `i^phase · Π gens[indices] = op`,
/// with the product taken in ascending index order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupDecomposition {
    pub indices: Vec<usize>,
    pub phase: u8,
}

/// Decomposes `op` over a generator set, if possible, via a GF(2) solve
/// on symplectic vectors. The phase mismatch between `op` and the plain
/// generator product is reported separately.
pub fn in_group(
    op: &PauliOperator,
    generators: &[PauliOperator],
) -> Result<Option<GroupDecomposition>, PauliError> {
    let n = op.len();
    for g in generators {
        op.check_len(g)?;
    }
    let rows: Vec<Bits> = generators.iter().map(|g| g.symplectic_vector()).collect();
    let solver = GaussSolver::from_rows(&rows);
    let (residual, combo) = solver.reduce(&op.symplectic_vector());
    if !residual.is_zero() {
        return Ok(None);
    }
    let indices: Vec<usize> = combo.ones().collect();
    let mut product = PauliOperator::identity(n);
    for &i in &indices {
        product = product.mul(&generators[i])?;
    }
    let phase = (op.phase + 4 - product.phase) % 4;
    Ok(Some(GroupDecomposition { indices, phase }))
}

/// A symplectically paired set of logical operators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogicalPair {
    pub x_op: PauliOperator,
    pub z_op: PauliOperator,
}

impl LogicalPair {
    pub fn new(x_op: PauliOperator, z_op: PauliOperator) -> Self {
        Self { x_op, z_op }
    }

    pub fn ops(&self) -> [&PauliOperator; 2] {
        [&self.x_op, &self.z_op]
    }
}

/// Constraint bundle for the canonical minimum-weight operator search.
pub(crate) struct OperatorSearch<'a> {
    pub n: usize,
    /// Required symplectic product 1 with each of these.
    pub anticommute: Vec<&'a PauliOperator>,
    /// Required symplectic product 0 with each of these.
    pub commute: Vec<&'a PauliOperator>,
    /// Candidates whose symplectic vector lies in this span are rejected.
    pub exclude_span: Option<&'a GaussSolver>,
    pub max_weight: usize,
}

fn next_combination(support: &mut [usize], n: usize) -> bool {
    let w = support.len();
    let mut i = w;
    while i > 0 {
        i -= 1;
        if support[i] != i + n - w {
            support[i] += 1;
            for j in i + 1..w {
                support[j] = support[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn next_letters(letters: &mut [u8]) -> bool {
    for pos in (0..letters.len()).rev() {
        if letters[pos] < 2 {
            letters[pos] += 1;
            for l in letters.iter_mut().skip(pos + 1) {
                *l = 0;
            }
            return true;
        }
        letters[pos] = 0;
    }
    false
}

impl OperatorSearch<'_> {
    /// Finds the minimum-weight Pauli satisfying the constraints.
    ///
    /// Candidates are enumerated weight-ascending, supports in
    /// lexicographic order, and letters per qubit in X < Z < Y order, so
    /// the first hit is the canonical representative.
    pub fn run(&self) -> Option<PauliOperator> {
        let n = self.n;
        for w in 1..=self.max_weight.min(n) {
            let mut support: Vec<usize> = (0..w).collect();
            loop {
                if let Some(op) = self.scan_letters(&support) {
                    return Some(op);
                }
                if !next_combination(&mut support, n) {
                    break;
                }
            }
        }
        None
    }

    fn scan_letters(&self, support: &[usize]) -> Option<PauliOperator> {
        let w = support.len();
        // letter index per position: 0 = X, 1 = Z, 2 = Y
        let mut letters = vec![0u8; w];
        loop {
            if self.check(support, &letters) {
                let assignment: Vec<(usize, PauliKind)> = support
                    .iter()
                    .zip(&letters)
                    .map(|(&q, &l)| {
                        (
                            q,
                            match l {
                                0 => PauliKind::X,
                                1 => PauliKind::Z,
                                _ => PauliKind::Y,
                            },
                        )
                    })
                    .collect();
                let op = PauliOperator::from_letters(self.n, &assignment)
                    .expect("support indices are in range");
                let excluded = self
                    .exclude_span
                    .is_some_and(|span| span.contains(&op.symplectic_vector()));
                if !excluded {
                    return Some(op);
                }
            }
            if !next_letters(&mut letters) {
                return None;
            }
        }
    }

    #[inline]
    fn check(&self, support: &[usize], letters: &[u8]) -> bool {
        for target in &self.anticommute {
            if !symplectic_parity(support, letters, target) {
                return false;
            }
        }
        for target in &self.commute {
            if symplectic_parity(support, letters, target) {
                return false;
            }
        }
        true
    }
}

/// Symplectic product parity of a sparse candidate against `target`.
#[inline]
fn symplectic_parity(support: &[usize], letters: &[u8], target: &PauliOperator) -> bool {
    let mut parity = false;
    for (&q, &l) in support.iter().zip(letters) {
        let (cx, cz) = match l {
            0 => (true, false),
            1 => (false, true),
            _ => (true, true),
        };
        parity ^= (cx & target.z_bit(q)) ^ (cz & target.x_bit(q));
    }
    parity
}

/// Extracts the `k = n − rank` logical operator pairs left unfixed by a
/// commuting, independent generator set.
///
/// Pairs are found greedily: the canonical minimum-weight operator that
/// commutes with everything fixed so far and is not a generator product
/// starts a pair, its canonical minimum-weight symplectic partner closes
/// it. Representatives are ordered (X-like, Z-like) within each pair.
pub fn residual_logicals(
    n: usize,
    generators: &[PauliOperator],
) -> Result<Vec<LogicalPair>, PauliError> {
    for g in generators {
        if g.len() != n {
            return Err(PauliError::LengthMismatch(n, g.len()));
        }
    }
    for (i, a) in generators.iter().enumerate() {
        for b in &generators[i + 1..] {
            if !a.commutes(b)? {
                return Err(PauliError::InvalidGroup(format!(
                    "generators do not commute: {a} vs {b}"
                )));
            }
        }
    }
    let rows: Vec<Bits> = generators.iter().map(|g| g.symplectic_vector()).collect();
    let mut span = GaussSolver::new(2 * n, generators.len().max(1));
    for (i, row) in rows.iter().enumerate() {
        if !span.insert(row) {
            return Err(PauliError::InvalidGroup(format!(
                "generator {i} is dependent on earlier generators"
            )));
        }
    }
    let k = n - span.rank();

    let mut pairs: Vec<LogicalPair> = Vec::with_capacity(k);
    let mut fixed: Vec<PauliOperator> = generators.to_vec();
    for _ in 0..k {
        let first = OperatorSearch {
            n,
            anticommute: Vec::new(),
            commute: fixed.iter().collect(),
            exclude_span: Some(&span),
            max_weight: n,
        }
        .run()
        .ok_or_else(|| PauliError::InvalidGroup("logical search exhausted".into()))?;
        let partner = OperatorSearch {
            n,
            anticommute: vec![&first],
            commute: fixed.iter().collect(),
            exclude_span: None,
            max_weight: n,
        }
        .run()
        .ok_or_else(|| PauliError::InvalidGroup("partner search exhausted".into()))?;

        let score = |op: &PauliOperator| -> u8 {
            if op.is_x_type() {
                0
            } else if op.is_z_type() {
                2
            } else {
                1
            }
        };
        let (x_op, z_op) = if score(&partner) < score(&first) {
            (partner.clone(), first.clone())
        } else {
            (first.clone(), partner.clone())
        };
        fixed.push(first);
        fixed.push(partner);
        pairs.push(LogicalPair::new(x_op, z_op));
    }
    Ok(pairs)
}

/// A full symplectic frame: independent commuting stabilizer generators
/// plus the canonical logical pairs completing them.
#[derive(Debug, Clone)]
pub struct SymplecticBasis {
    pub n: usize,
    pub stabilizers: Vec<PauliOperator>,
    pub logical_pairs: Vec<LogicalPair>,
}

impl SymplecticBasis {
    pub fn new(n: usize, generators: &[PauliOperator]) -> Result<Self, PauliError> {
        let logical_pairs = residual_logicals(n, generators)?;
        Ok(Self {
            n,
            stabilizers: generators.to_vec(),
            logical_pairs,
        })
    }
}
