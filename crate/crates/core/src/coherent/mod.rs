//! Dense state-vector simulation of QEC cycles under coherent
//! (precision) errors.
//!
//! The error model applies a small real rotation
//! `R(θ) = [[cos θ/2, −sin θ/2], [sin θ/2, cos θ/2]]` to every data
//! qubit each clock cycle. Stabilizers are measured either by ideal
//! Born-rule projection or by the ancilla circuit (one reused ancilla:
//! init |0⟩, Hadamards and CNOTs in the layout's fixed gate order, Z
//! measurement). Skipped stabilizers are recorded as such and, under
//! the freeze policy, report their last observed value to the decoder;
//! no projection of any kind happens for them.
//!
//! Amplitude convention: qubit q is bit q of the amplitude index
//! (little-endian), so `|100⟩` on three qubits is index 1.

mod experiments;

pub use experiments::*;

use crate::codes::{CodeLayout, StabKind, Stabilizer};
use crate::decoder::{self, DecodeError};
use crate::pauli::PauliOperator;
use num_complex::Complex64;
use rand::Rng;
use std::collections::BTreeSet;
use thiserror::Error;

/// Ideal-projection mode refuses registers larger than this.
pub const MAX_IDEAL_QUBITS: usize = 24;

#[derive(Debug, Error)]
pub enum CoherentError {
    #[error("amplitudes are not normalized: |alpha|^2+|beta|^2 = {0}")]
    NotNormalized(f64),
    #[error("register of {0} qubits exceeds the {MAX_IDEAL_QUBITS}-qubit cap")]
    OverCap(usize),
    #[error("qubit index {index} out of range for {n} qubits")]
    QubitOutOfRange { index: usize, n: usize },
    #[error("operator acts on {0} qubits, state has {1}")]
    LengthMismatch(usize, usize),
    #[error("projection probability vanished")]
    ZeroProjection,
    #[error("state is outside the codespace: residual norm {0:.3e}")]
    OutOfCodespace(f64),
    #[error(transparent)]
    Decode(#[from] DecodeError),
}

/// How the rotation angle of each qubit is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AngleMode {
    /// θ = η every time: matches the closed-form analysis.
    Fixed,
    /// θ ~ U(−η, η), resampled each round.
    Uniform,
}

/// Error-model parameters shared by the experiments.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct NoiseConfig {
    /// Precision angle scale, radians.
    pub eta: f64,
    pub angle_mode: AngleMode,
    /// Discrete flip probability per qubit per cycle (frame model).
    pub p: f64,
    /// Measurement flip probability (frame model).
    pub q: f64,
    /// Silent-failure probability per stabilizer per window.
    pub p_s: f64,
    /// Cycles a silent failure lasts.
    pub silent_duration: u32,
    /// Apply rotations to the ancilla between circuit-mode gates.
    pub apply_to_ancillas: bool,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            eta: 0.0,
            angle_mode: AngleMode::Fixed,
            p: 0.0,
            q: 0.0,
            p_s: 0.0,
            silent_duration: 0,
            apply_to_ancillas: false,
        }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.eta < 0.0 {
            return Err(format!("eta must be non-negative, got {}", self.eta));
        }
        for (name, v) in [("p", self.p), ("q", self.q), ("p-s", self.p_s)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(format!("{name} must be in [0,1], got {v}"));
            }
        }
        Ok(())
    }

    pub fn draw_angle(&self, rng: &mut impl Rng) -> f64 {
        match self.angle_mode {
            AngleMode::Fixed => self.eta,
            AngleMode::Uniform => self.eta * (2.0 * rng.random::<f64>() - 1.0),
        }
    }
}

/// Stabilizer measurement implementation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureMode {
    /// Born sampling with the projector (1 ± g)/2.
    Ideal,
    /// Ancilla circuit per the layout's gate order.
    Circuit,
}

/// Per-cycle stabilizer outcomes; `None` marks a skipped measurement.
pub type SyndromeRow = Vec<Option<i8>>;

/// Accumulated syndrome rows of a run.
#[derive(Debug, Clone, Default)]
pub struct SyndromeRecord {
    rows: Vec<SyndromeRow>,
}

impl SyndromeRecord {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, row: SyndromeRow) {
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[SyndromeRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows the decoder sees: skipped entries replaced by the last
    /// observed value (+1 before any observation).
    pub fn effective(&self) -> Vec<Vec<i8>> {
        decoder::effective_rows(&self.rows)
    }

    /// Compact ±/s string for one row, e.g. "+-s+".
    pub fn class_string(row: &SyndromeRow) -> String {
        row.iter()
            .map(|v| match v {
                Some(1) => '+',
                Some(_) => '-',
                None => 's',
            })
            .collect()
    }
}

/// 2^n complex amplitudes.
#[derive(Debug, Clone)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn basis(n: usize, index: usize) -> Result<Self, CoherentError> {
        if n > MAX_IDEAL_QUBITS {
            return Err(CoherentError::OverCap(n));
        }
        let mut amps = vec![Complex64::ZERO; 1 << n];
        amps[index] = Complex64::ONE;
        Ok(Self { n, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(Complex64::norm_sqr).sum()
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    fn normalize(&mut self) -> Result<(), CoherentError> {
        let n2 = self.norm_sq();
        if n2 < 1e-300 {
            return Err(CoherentError::ZeroProjection);
        }
        let inv = 1.0 / n2.sqrt();
        for a in &mut self.amps {
            *a *= inv;
        }
        Ok(())
    }

    fn check_qubit(&self, q: usize) -> Result<(), CoherentError> {
        if q < self.n {
            Ok(())
        } else {
            Err(CoherentError::QubitOutOfRange {
                index: q,
                n: self.n,
            })
        }
    }

    /// Real rotation [[c, −s], [s, c]] with c = cos θ/2, s = sin θ/2.
    pub fn apply_rotation(&mut self, qubit: usize, theta: f64) -> Result<(), CoherentError> {
        self.check_qubit(qubit)?;
        let (s, c) = (theta / 2.0).sin_cos();
        let mask = 1usize << qubit;
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                let a0 = self.amps[i];
                let a1 = self.amps[i | mask];
                self.amps[i] = c * a0 - s * a1;
                self.amps[i | mask] = s * a0 + c * a1;
            }
        }
        Ok(())
    }

    pub fn apply_hadamard(&mut self, qubit: usize) -> Result<(), CoherentError> {
        self.check_qubit(qubit)?;
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        let mask = 1usize << qubit;
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                let a0 = self.amps[i];
                let a1 = self.amps[i | mask];
                self.amps[i] = inv * (a0 + a1);
                self.amps[i | mask] = inv * (a0 - a1);
            }
        }
        Ok(())
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<(), CoherentError> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        let cmask = 1usize << control;
        let tmask = 1usize << target;
        for i in 0..self.amps.len() {
            if i & cmask != 0 && i & tmask == 0 {
                self.amps.swap(i, i | tmask);
            }
        }
        Ok(())
    }

    /// Phase factor of `op` acting on basis state `b`:
    /// `i^phase · (−1)^{z·b}`.
    fn pauli_phase(op: &PauliOperator, b: usize) -> Complex64 {
        let mut minus = false;
        for q in op.z_bits().ones() {
            if b >> q & 1 == 1 {
                minus = !minus;
            }
        }
        let mut ph = match op.phase() % 4 {
            0 => Complex64::ONE,
            1 => Complex64::I,
            2 => -Complex64::ONE,
            _ => -Complex64::I,
        };
        if minus {
            ph = -ph;
        }
        ph
    }

    fn x_mask(op: &PauliOperator) -> usize {
        op.x_bits().ones().fold(0usize, |m, q| m | (1 << q))
    }

    pub fn apply_pauli(&mut self, op: &PauliOperator) -> Result<(), CoherentError> {
        if op.len() != self.n {
            return Err(CoherentError::LengthMismatch(op.len(), self.n));
        }
        let xm = Self::x_mask(op);
        if xm == 0 {
            for (b, a) in self.amps.iter_mut().enumerate() {
                *a *= Self::pauli_phase(op, b);
            }
        } else {
            for b in 0..self.amps.len() {
                let p = b ^ xm;
                if b < p {
                    // new[p] = ph(b)·old[b], new[b] = ph(p)·old[p]
                    let ob = self.amps[b];
                    let op_amp = self.amps[p];
                    self.amps[p] = Self::pauli_phase(op, b) * ob;
                    self.amps[b] = Self::pauli_phase(op, p) * op_amp;
                }
            }
        }
        Ok(())
    }

    /// ⟨ψ|P|ψ⟩. Real for Hermitian P (all letter products are).
    pub fn expectation(&self, op: &PauliOperator) -> Result<Complex64, CoherentError> {
        if op.len() != self.n {
            return Err(CoherentError::LengthMismatch(op.len(), self.n));
        }
        let xm = Self::x_mask(op);
        let mut acc = Complex64::ZERO;
        for b in 0..self.amps.len() {
            // (Pψ)[b] = ph(b⊕x)·ψ[b⊕x]
            acc += self.amps[b].conj() * Self::pauli_phase(op, b ^ xm) * self.amps[b ^ xm];
        }
        Ok(acc)
    }

    /// Projects onto the `sign` eigenspace of `op` and renormalizes.
    /// Returns the pre-projection probability of that outcome.
    pub fn project(&mut self, op: &PauliOperator, sign: i8) -> Result<f64, CoherentError> {
        if op.len() != self.n {
            return Err(CoherentError::LengthMismatch(op.len(), self.n));
        }
        let s = Complex64::new(f64::from(sign), 0.0);
        let xm = Self::x_mask(op);
        if xm == 0 {
            for (b, a) in self.amps.iter_mut().enumerate() {
                *a = (*a + s * Self::pauli_phase(op, b) * *a) / 2.0;
            }
        } else {
            for b in 0..self.amps.len() {
                let p = b ^ xm;
                if b < p {
                    let ob = self.amps[b];
                    let opair = self.amps[p];
                    self.amps[b] = (ob + s * Self::pauli_phase(op, p) * opair) / 2.0;
                    self.amps[p] = (opair + s * Self::pauli_phase(op, b) * ob) / 2.0;
                }
            }
        }
        let prob = self.norm_sq();
        self.normalize()?;
        Ok(prob)
    }

    /// Appends one ancilla qubit in |0⟩ as the highest index.
    fn extend_with_ancilla(&self) -> Result<Self, CoherentError> {
        if self.n + 1 > MAX_IDEAL_QUBITS + 1 {
            return Err(CoherentError::OverCap(self.n + 1));
        }
        let mut amps = vec![Complex64::ZERO; 1 << (self.n + 1)];
        amps[..1 << self.n].copy_from_slice(&self.amps);
        Ok(Self {
            n: self.n + 1,
            amps,
        })
    }
}

/// Encodes `alpha·|0_L⟩ + beta·|1_L⟩` for the layout: the all-zeros
/// product state projected into the codespace, plus the X̄ image.
pub fn prepare_logical(
    layout: &CodeLayout,
    alpha: Complex64,
    beta: Complex64,
) -> Result<StateVector, CoherentError> {
    let norm = alpha.norm_sqr() + beta.norm_sqr();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(CoherentError::NotNormalized(norm));
    }
    if layout.n_data > MAX_IDEAL_QUBITS {
        return Err(CoherentError::OverCap(layout.n_data));
    }
    let mut zero_l = StateVector::basis(layout.n_data, 0)?;
    for s in &layout.stabilizers {
        if s.kind == StabKind::XType {
            zero_l.project(&s.op, 1)?;
        }
    }
    let mut one_l = zero_l.clone();
    one_l.apply_pauli(&layout.logicals[0].x_op)?;
    let mut amps = Vec::with_capacity(zero_l.amps.len());
    for (a, b) in zero_l.amps.iter().zip(&one_l.amps) {
        amps.push(alpha * a + beta * b);
    }
    let mut state = StateVector {
        n: layout.n_data,
        amps,
    };
    state.normalize()?;
    Ok(state)
}

/// One round of precision errors: every data qubit rotated by an angle
/// drawn per the config. Ancilla rotations happen inside circuit-mode
/// measurement, not here.
pub fn noise_round(
    state: &mut StateVector,
    layout: &CodeLayout,
    cfg: &NoiseConfig,
    rng: &mut impl Rng,
) -> Result<(), CoherentError> {
    for q in 0..layout.n_data {
        let theta = cfg.draw_angle(rng);
        state.apply_rotation(q, theta)?;
    }
    Ok(())
}

/// Measures one stabilizer, returning ±1 and collapsing the state.
pub fn measure_stabilizer(
    state: &mut StateVector,
    stab: &Stabilizer,
    mode: MeasureMode,
    cfg: &NoiseConfig,
    rng: &mut impl Rng,
) -> Result<i8, CoherentError> {
    match mode {
        MeasureMode::Ideal => measure_pauli_ideal(state, &stab.op, rng),
        MeasureMode::Circuit => measure_circuit(state, stab, cfg, rng),
    }
}

/// Ideal projective measurement of an arbitrary Pauli observable.
pub fn measure_pauli_ideal(
    state: &mut StateVector,
    op: &PauliOperator,
    rng: &mut impl Rng,
) -> Result<i8, CoherentError> {
    let expect = state.expectation(op)?.re;
    let p_plus = ((1.0 + expect) / 2.0).clamp(0.0, 1.0);
    let outcome: i8 = if rng.random::<f64>() < p_plus { 1 } else { -1 };
    state.project(op, outcome)?;
    Ok(outcome)
}

fn ancilla_noise(
    ext: &mut StateVector,
    anc: usize,
    cfg: &NoiseConfig,
    rng: &mut impl Rng,
) -> Result<(), CoherentError> {
    if cfg.apply_to_ancillas {
        let theta = cfg.draw_angle(rng);
        ext.apply_rotation(anc, theta)
    } else {
        Ok(())
    }
}

fn measure_circuit(
    state: &mut StateVector,
    stab: &Stabilizer,
    cfg: &NoiseConfig,
    rng: &mut impl Rng,
) -> Result<i8, CoherentError> {
    let anc = state.n;
    let mut ext = state.extend_with_ancilla()?;
    ancilla_noise(&mut ext, anc, cfg, rng)?; // after init
    match stab.kind {
        StabKind::XType => {
            ext.apply_hadamard(anc)?;
            ancilla_noise(&mut ext, anc, cfg, rng)?;
            for &q in &stab.data {
                ext.apply_cnot(anc, q)?;
                ancilla_noise(&mut ext, anc, cfg, rng)?;
            }
            ext.apply_hadamard(anc)?;
            ancilla_noise(&mut ext, anc, cfg, rng)?;
        }
        StabKind::ZType => {
            for &q in &stab.data {
                ext.apply_cnot(q, anc)?;
                ancilla_noise(&mut ext, anc, cfg, rng)?;
            }
        }
    }
    // Z measurement of the ancilla
    let mask = 1usize << anc;
    let p_one: f64 = ext
        .amps
        .iter()
        .enumerate()
        .filter(|(i, _)| i & mask != 0)
        .map(|(_, a)| a.norm_sqr())
        .sum();
    let bit_one = rng.random::<f64>() < p_one.clamp(0.0, 1.0);
    let keep = usize::from(bit_one) << anc;
    let mut amps = Vec::with_capacity(1 << state.n);
    for i in 0..(1usize << state.n) {
        amps.push(ext.amps[i | keep]);
    }
    *state = StateVector { n: state.n, amps };
    state.normalize()?;
    Ok(if bit_one { -1 } else { 1 })
}

/// Measures every non-skipped stabilizer in index order. Skipped
/// entries are recorded as `None`; no projection occurs for them.
pub fn qec_cycle(
    state: &mut StateVector,
    layout: &CodeLayout,
    skip: &BTreeSet<usize>,
    mode: MeasureMode,
    cfg: &NoiseConfig,
    rng: &mut impl Rng,
) -> Result<SyndromeRow, CoherentError> {
    let mut row = Vec::with_capacity(layout.stabilizers.len());
    for (i, stab) in layout.stabilizers.iter().enumerate() {
        if skip.contains(&i) {
            row.push(None);
        } else {
            row.push(Some(measure_stabilizer(state, stab, mode, cfg, rng)?));
        }
    }
    Ok(row)
}

/// Decodes the latest effective syndrome row under the freeze policy.
pub fn decode_and_correct(
    record: &SyndromeRecord,
    layout: &CodeLayout,
) -> Result<PauliOperator, CoherentError> {
    let eff = record.effective();
    let last = eff
        .last()
        .cloned()
        .unwrap_or_else(|| vec![1; layout.stabilizers.len()]);
    Ok(decoder::decode(layout, &last)?)
}

/// Decodes a majority vote over the last `window` effective rows; used
/// when measurement outcomes are noisy. Ties vote +1.
pub fn decode_window(
    record: &SyndromeRecord,
    layout: &CodeLayout,
    window: usize,
) -> Result<PauliOperator, CoherentError> {
    let eff = record.effective();
    let take = window.min(eff.len());
    let rows = &eff[eff.len() - take..];
    let m = layout.stabilizers.len();
    let mut voted = vec![1i8; m];
    for (j, v) in voted.iter_mut().enumerate() {
        let minus = rows.iter().filter(|r| r[j] == -1).count();
        if 2 * minus > take {
            *v = -1;
        }
    }
    Ok(decoder::decode(layout, &voted)?)
}

/// Bloch-sphere angle between the state and the target logical state
/// `alpha·|0_L⟩ + beta·|1_L⟩`, global phase discarded. The state must
/// already be decoded back into the codespace.
///
/// The angle is computed from the component orthogonal to the target,
/// `2·asin‖ψ − ⟨target|ψ⟩·target‖`, which stays accurate down to
/// angles near machine precision where `2·acos|⟨target|ψ⟩|` would
/// quantize.
pub fn logical_error_angle(
    state: &StateVector,
    layout: &CodeLayout,
    alpha: Complex64,
    beta: Complex64,
) -> Result<f64, CoherentError> {
    let mut probe = state.clone();
    let mut in_prob = 1.0;
    for s in &layout.stabilizers {
        in_prob *= probe.project(&s.op, 1)?;
    }
    let residual = 1.0 - in_prob;
    if residual > 1e-6 {
        return Err(CoherentError::OutOfCodespace(residual));
    }
    let target = prepare_logical(layout, alpha, beta)?;
    let overlap = target.inner(state);
    let orth_sq: f64 = state
        .amps
        .iter()
        .zip(&target.amps)
        .map(|(s, t)| (s - overlap * t).norm_sqr())
        .sum();
    Ok(2.0 * orth_sq.sqrt().clamp(0.0, 1.0).asin())
}
