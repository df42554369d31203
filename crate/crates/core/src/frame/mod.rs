//! Pauli-frame Monte Carlo for the discrete error model.
//!
//! A frame is a classical record of accumulated X/Z flips. Per cycle
//! every data qubit flips independently with probability p (X only on
//! the repetition code, X and Z independently on the surface code);
//! stabilizer outcomes are the symplectic overlap with the frame,
//! optionally flipped with probability q, with silent stabilizers
//! reporting their frozen value. A shot fails when the residual frame
//! after recovery anticommutes with a logical operator.
//!
//! Shots are embarrassingly parallel: shot k draws from RNG stream
//! `stream_base + k` (and `2^63 + stream_base + k` for silent-failure
//! injection, so switching injection on or off never shifts the error
//! stream).

mod experiments;

pub use experiments::*;

use crate::bits::Bits;
use crate::codes::{CodeKind, CodeLayout};
use crate::decoder::{self, DecodeError};
use crate::pauli::PauliOperator;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FrameError {
    #[error("probability {0} outside [0,1]")]
    BadProbability(f64),
    #[error("shots must be at least 1")]
    NoShots,
    #[error(transparent)]
    Decode(#[from] DecodeError),
}

/// Classical record of accumulated X/Z flips over the data qubits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PauliFrame {
    pub x_flips: Bits,
    pub z_flips: Bits,
}

impl PauliFrame {
    pub fn new(n_data: usize) -> Self {
        Self {
            x_flips: Bits::zeros(n_data),
            z_flips: Bits::zeros(n_data),
        }
    }

    pub fn is_clear(&self) -> bool {
        self.x_flips.is_zero() && self.z_flips.is_zero()
    }

    /// XORs a Pauli operator (e.g. a recovery) into the frame.
    pub fn apply(&mut self, op: &PauliOperator) {
        for q in op.x_bits().ones() {
            self.x_flips.flip(q);
        }
        for q in op.z_bits().ones() {
            self.z_flips.flip(q);
        }
    }

    /// Symplectic anticommutation of the frame with an operator.
    pub fn anticommutes(&self, op: &PauliOperator) -> bool {
        self.x_flips.dot(op.z_bits()) ^ self.z_flips.dot(op.x_bits())
    }
}

/// One cycle of i.i.d. flips: X with probability p, and on the surface
/// code independently Z with probability p.
pub fn sample_errors(
    frame: &mut PauliFrame,
    layout: &CodeLayout,
    p: f64,
    rng: &mut impl Rng,
) -> Result<(), FrameError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(FrameError::BadProbability(p));
    }
    for q in 0..layout.n_data {
        if rng.random::<f64>() < p {
            frame.x_flips.flip(q);
        }
    }
    if layout.kind == CodeKind::Surface {
        for q in 0..layout.n_data {
            if rng.random::<f64>() < p {
                frame.z_flips.flip(q);
            }
        }
    }
    Ok(())
}

/// True outcome of one stabilizer against the frame, before any
/// measurement noise.
pub fn stabilizer_outcome(frame: &PauliFrame, op: &PauliOperator) -> i8 {
    if op.x_bits().dot(&frame.z_flips) ^ op.z_bits().dot(&frame.x_flips) {
        -1
    } else {
        1
    }
}

/// Measures all stabilizers: outcomes flipped with probability q,
/// silent stabilizers reporting their previous value (+1 on the first
/// cycle).
pub fn measure_syndrome(
    frame: &PauliFrame,
    layout: &CodeLayout,
    q: f64,
    silent: &[bool],
    prev: Option<&[i8]>,
    rng: &mut impl Rng,
) -> Vec<i8> {
    layout
        .stabilizers
        .iter()
        .enumerate()
        .map(|(j, s)| {
            if silent.get(j).copied().unwrap_or(false) {
                prev.map_or(1, |row| row[j])
            } else {
                let mut v = stabilizer_outcome(frame, &s.op);
                if q > 0.0 && rng.random::<f64>() < q {
                    v = -v;
                }
                v
            }
        })
        .collect()
}

/// True when the residual frame flips a logical operator: Z̄ for the
/// repetition code, either logical for the surface code.
pub fn logical_failure(layout: &CodeLayout, residual: &PauliFrame) -> bool {
    let pair = &layout.logicals[0];
    match layout.kind {
        CodeKind::Repetition => residual.anticommutes(&pair.z_op),
        CodeKind::Surface => {
            residual.anticommutes(&pair.z_op) || residual.anticommutes(&pair.x_op)
        }
    }
}

/// A silent-failure event: `stabilizer` goes unmeasured starting at
/// cycle `start` for `duration` cycles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SilentEvent {
    pub stabilizer: usize,
    pub start: u32,
    pub duration: u32,
}

/// Draws silent failures: within each window every stabilizer fails
/// independently with probability p_s; a failed stabilizer is silent
/// for `duration` cycles from the window start.
pub fn inject_silent_failures(
    n_stabilizers: usize,
    p_s: f64,
    windows: u32,
    window_len: u32,
    duration: u32,
    rng: &mut impl Rng,
) -> Vec<SilentEvent> {
    let mut events = Vec::new();
    for w in 0..windows {
        for s in 0..n_stabilizers {
            if rng.random::<f64>() < p_s {
                events.push(SilentEvent {
                    stabilizer: s,
                    start: w * window_len,
                    duration,
                });
            }
        }
    }
    events
}

/// Monte Carlo estimate with its 95% Wilson interval.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ShotStats {
    pub shots: u64,
    pub failures: u64,
    pub p_l_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl ShotStats {
    pub fn from_counts(failures: u64, shots: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(failures, shots);
        Self {
            shots,
            failures,
            p_l_hat: failures as f64 / shots as f64,
            ci_low,
            ci_high,
        }
    }
}

/// 95% Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054_f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = (z / denom) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Silent-failure injection parameters for a run.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct SilentParams {
    pub p_s: f64,
    /// Cycles per failure window.
    pub window: u32,
    /// Cycles a failure stays silent.
    pub duration: u32,
}

/// Parameters of one Monte Carlo run.
#[derive(Debug, Clone, Copy)]
pub struct RunConfig {
    pub p: f64,
    pub q: f64,
    pub cycles: u32,
    pub shots: u64,
    pub silent: Option<SilentParams>,
    pub seed: u64,
    /// Offset added to every shot's stream id, so several runs can share
    /// one master seed without stream collisions.
    pub stream_base: u64,
}

impl RunConfig {
    pub fn new(p: f64, q: f64, cycles: u32, shots: u64, seed: u64) -> Self {
        Self {
            p,
            q,
            cycles,
            shots,
            silent: None,
            seed,
            stream_base: 0,
        }
    }
}

/// Aggregate outcome of a run.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct RunOutcome {
    pub stats: ShotStats,
    /// Total injected silent events across shots.
    pub silent_events: u64,
    /// Shots containing at least one silent event.
    pub event_shots: u64,
    /// Shots where a silent event masked a live defect on its
    /// stabilizer (conditional-failure candidates).
    pub candidate_shots: u64,
    /// Shots that both contained an event and failed.
    pub failed_event_shots: u64,
}

struct ShotOutcome {
    failed: bool,
    events: u64,
    masked_defect: bool,
}

/// Runs independent shots: accumulate errors over the cycles, measure
/// each cycle, decode once at the end (spacetime decoding when q > 0,
/// closed by one perfect round), apply the recovery and score failure.
pub fn run_shots(layout: &CodeLayout, cfg: &RunConfig) -> Result<RunOutcome, FrameError> {
    if cfg.shots == 0 {
        return Err(FrameError::NoShots);
    }
    for prob in [cfg.p, cfg.q] {
        if !(0.0..=1.0).contains(&prob) {
            return Err(FrameError::BadProbability(prob));
        }
    }
    if let Some(s) = cfg.silent {
        if !(0.0..=1.0).contains(&s.p_s) {
            return Err(FrameError::BadProbability(s.p_s));
        }
    }
    let results: Result<Vec<ShotOutcome>, FrameError> = (0..cfg.shots)
        .into_par_iter()
        .map(|shot| run_one_shot(layout, cfg, shot))
        .collect();
    let results = results?;
    let failures = results.iter().filter(|r| r.failed).count() as u64;
    let silent_events = results.iter().map(|r| r.events).sum();
    let event_shots = results.iter().filter(|r| r.events > 0).count() as u64;
    let candidate_shots = results.iter().filter(|r| r.masked_defect).count() as u64;
    let failed_event_shots = results
        .iter()
        .filter(|r| r.failed && r.events > 0)
        .count() as u64;
    Ok(RunOutcome {
        stats: ShotStats::from_counts(failures, cfg.shots),
        silent_events,
        event_shots,
        candidate_shots,
        failed_event_shots,
    })
}

fn run_one_shot(
    layout: &CodeLayout,
    cfg: &RunConfig,
    shot: u64,
) -> Result<ShotOutcome, FrameError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(cfg.stream_base + shot);

    let events = match cfg.silent {
        Some(s) if s.p_s > 0.0 => {
            let mut inject_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            inject_rng.set_stream((1 << 63) | (cfg.stream_base + shot));
            let windows = cfg.cycles.div_ceil(s.window.max(1));
            inject_silent_failures(
                layout.stabilizers.len(),
                s.p_s,
                windows,
                s.window.max(1),
                s.duration,
                &mut inject_rng,
            )
        }
        _ => Vec::new(),
    };
    let silent_at = |t: u32| -> Vec<bool> {
        let mut mask = vec![false; layout.stabilizers.len()];
        for e in &events {
            if t >= e.start && t < e.start + e.duration {
                mask[e.stabilizer] = true;
            }
        }
        mask
    };

    let mut frame = PauliFrame::new(layout.n_data);
    let mut rows: Vec<Vec<i8>> = Vec::with_capacity(cfg.cycles as usize);
    let mut masked_defect = false;
    for t in 0..cfg.cycles {
        sample_errors(&mut frame, layout, cfg.p, &mut rng)?;
        let silent = silent_at(t);
        let row = measure_syndrome(
            &frame,
            layout,
            cfg.q,
            &silent,
            rows.last().map(Vec::as_slice),
            &mut rng,
        );
        for (j, &is_silent) in silent.iter().enumerate() {
            if is_silent && stabilizer_outcome(&frame, &layout.stabilizers[j].op) == -1 {
                masked_defect = true;
            }
        }
        rows.push(row);
    }

    let recovery = if cfg.q > 0.0 {
        // close the spacetime volume with one perfect readout round
        let silent = silent_at(cfg.cycles);
        let perfect = measure_syndrome(
            &frame,
            layout,
            0.0,
            &silent,
            rows.last().map(Vec::as_slice),
            &mut rng,
        );
        rows.push(perfect);
        decoder::decode_spacetime(layout, &rows)?
    } else {
        let last = rows
            .last()
            .cloned()
            .unwrap_or_else(|| vec![1; layout.stabilizers.len()]);
        decoder::decode(layout, &last)?
    };
    frame.apply(&recovery);
    Ok(ShotOutcome {
        failed: logical_failure(layout, &frame),
        events: events.len() as u64,
        masked_defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{repetition_code, surface_code};
    use crate::pauli::PauliKind;

    #[test]
    fn sample_errors_edge_probabilities() {
        let c3 = repetition_code(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut frame = PauliFrame::new(3);
        sample_errors(&mut frame, &c3, 0.0, &mut rng).unwrap();
        assert!(frame.is_clear());
        sample_errors(&mut frame, &c3, 1.0, &mut rng).unwrap();
        assert_eq!(frame.x_flips.count_ones(), 3);
        assert!(sample_errors(&mut frame, &c3, 1.5, &mut rng).is_err());
    }

    #[test]
    fn sample_errors_binomial_mean() {
        let layout = repetition_code(20).unwrap();
        let p = 0.1;
        let samples = 10_000u64;
        let mut total = 0usize;
        for s in 0..samples {
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            rng.set_stream(s);
            let mut frame = PauliFrame::new(20);
            sample_errors(&mut frame, &layout, p, &mut rng).unwrap();
            total += frame.x_flips.count_ones();
        }
        let mean = total as f64 / samples as f64;
        let expect = 20.0 * p;
        let sigma = (20.0 * p * (1.0 - p) / samples as f64).sqrt();
        assert!(
            (mean - expect).abs() < 3.0 * sigma,
            "mean {mean} vs {expect} ± {sigma}"
        );
    }

    #[test]
    fn syndrome_of_x2_on_three_qubits() {
        let c3 = repetition_code(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut frame = PauliFrame::new(3);
        frame.apply(&PauliOperator::single(3, 1, PauliKind::X).unwrap());
        let row = measure_syndrome(&frame, &c3, 0.0, &[false, false], None, &mut rng);
        assert_eq!(row, vec![-1, -1]);

        let clear = PauliFrame::new(3);
        let row = measure_syndrome(&clear, &c3, 0.0, &[false, false], None, &mut rng);
        assert_eq!(row, vec![1, 1]);
    }

    #[test]
    fn silent_stabilizer_reports_frozen_value() {
        let c3 = repetition_code(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut frame = PauliFrame::new(3);
        frame.apply(&PauliOperator::single(3, 0, PauliKind::X).unwrap());
        // g_0 is silent: defect visible only at the live neighbor — and
        // X_1 touches only g_0, so nothing shows at all
        let row = measure_syndrome(&frame, &c3, 0.0, &[true, false], None, &mut rng);
        assert_eq!(row, vec![1, 1]);
        // with X_2 instead, g_1 shows the defect while g_0 stays frozen
        let mut frame = PauliFrame::new(3);
        frame.apply(&PauliOperator::single(3, 1, PauliKind::X).unwrap());
        let row = measure_syndrome(&frame, &c3, 0.0, &[true, false], None, &mut rng);
        assert_eq!(row, vec![1, -1]);
    }

    #[test]
    fn syndrome_is_linear_in_the_frame() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let d3 = surface_code(3).unwrap();
        let no_silent = vec![false; d3.stabilizers.len()];
        for _ in 0..100 {
            let mut a = PauliFrame::new(d3.n_data);
            let mut b = PauliFrame::new(d3.n_data);
            for q in 0..d3.n_data {
                if rng.random::<f64>() < 0.3 {
                    a.x_flips.flip(q);
                }
                if rng.random::<f64>() < 0.3 {
                    a.z_flips.flip(q);
                }
                if rng.random::<f64>() < 0.3 {
                    b.x_flips.flip(q);
                }
                if rng.random::<f64>() < 0.3 {
                    b.z_flips.flip(q);
                }
            }
            let mut sum = a.clone();
            sum.x_flips.xor_assign(&b.x_flips);
            sum.z_flips.xor_assign(&b.z_flips);
            let ra = measure_syndrome(&a, &d3, 0.0, &no_silent, None, &mut rng);
            let rb = measure_syndrome(&b, &d3, 0.0, &no_silent, None, &mut rng);
            let rs = measure_syndrome(&sum, &d3, 0.0, &no_silent, None, &mut rng);
            for ((x, y), z) in ra.iter().zip(&rb).zip(&rs) {
                assert_eq!(x * y, *z);
            }
        }
    }

    #[test]
    fn zero_error_rate_never_fails() {
        let c3 = repetition_code(3).unwrap();
        let out = run_shots(&c3, &RunConfig::new(0.0, 0.0, 1, 500, 9)).unwrap();
        assert_eq!(out.stats.failures, 0);
        assert_eq!(out.stats.p_l_hat, 0.0);
    }

    #[test]
    fn repetition_three_matches_closed_form() {
        let c3 = repetition_code(3).unwrap();
        for &p in &[0.05, 0.1] {
            let shots = 40_000u64;
            let out = run_shots(&c3, &RunConfig::new(p, 0.0, 1, shots, 1234)).unwrap();
            let exact = 3.0 * p * p - 2.0 * p * p * p;
            let sigma = (exact * (1.0 - exact) / shots as f64).sqrt();
            assert!(
                (out.stats.p_l_hat - exact).abs() < 3.0 * sigma,
                "p={p}: {} vs {exact} ± {sigma}",
                out.stats.p_l_hat
            );
        }
    }

    #[test]
    fn bigger_repetition_code_is_better_below_threshold() {
        let p = 0.02;
        let shots = 60_000u64;
        let c3 = repetition_code(3).unwrap();
        let c5 = repetition_code(5).unwrap();
        let out3 = run_shots(&c3, &RunConfig::new(p, 0.0, 1, shots, 7)).unwrap();
        let out5 = run_shots(&c5, &RunConfig::new(p, 0.0, 1, shots, 7)).unwrap();
        assert!(
            out5.stats.p_l_hat < out3.stats.p_l_hat,
            "N_c=5 ({}) must beat N_c=3 ({})",
            out5.stats.p_l_hat,
            out3.stats.p_l_hat
        );
    }

    #[test]
    fn decoder_validity_random_frames() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for layout in [repetition_code(7).unwrap(), surface_code(3).unwrap()] {
            let no_silent = vec![false; layout.stabilizers.len()];
            for _ in 0..200 {
                let mut frame = PauliFrame::new(layout.n_data);
                sample_errors(&mut frame, &layout, 0.15, &mut rng).unwrap();
                let row = measure_syndrome(&frame, &layout, 0.0, &no_silent, None, &mut rng);
                let recovery = decoder::decode(&layout, &row).unwrap();
                frame.apply(&recovery);
                let after = measure_syndrome(&frame, &layout, 0.0, &no_silent, None, &mut rng);
                assert!(after.iter().all(|&v| v == 1));
            }
        }
    }

    #[test]
    fn injection_edge_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(inject_silent_failures(8, 0.0, 10, 5, 5, &mut rng).is_empty());
        let all = inject_silent_failures(8, 1.0, 1, 5, 5, &mut rng);
        assert_eq!(all.len(), 8);
    }

    #[test]
    fn seed_determinism_across_runs() {
        let d3 = surface_code(3).unwrap();
        let mut cfg = RunConfig::new(0.05, 0.01, 3, 2000, 99);
        cfg.silent = Some(SilentParams {
            p_s: 0.01,
            window: 3,
            duration: 2,
        });
        let a = run_shots(&d3, &cfg).unwrap();
        let b = run_shots(&d3, &cfg).unwrap();
        assert_eq!(a.stats.failures, b.stats.failures);
        assert_eq!(a.silent_events, b.silent_events);
        assert_eq!(a.candidate_shots, b.candidate_shots);
    }

    #[test]
    fn injection_off_and_zero_ps_share_the_error_stream() {
        let c9 = repetition_code(9).unwrap();
        let mut with_zero = RunConfig::new(0.05, 0.0, 4, 3000, 5);
        with_zero.silent = Some(SilentParams {
            p_s: 0.0,
            window: 2,
            duration: 2,
        });
        let without = RunConfig::new(0.05, 0.0, 4, 3000, 5);
        let a = run_shots(&c9, &with_zero).unwrap();
        let b = run_shots(&c9, &without).unwrap();
        assert_eq!(a.stats.failures, b.stats.failures);
    }

    #[test]
    fn wilson_interval_brackets_the_estimate() {
        let s = ShotStats::from_counts(10, 1000);
        assert!(s.ci_low <= s.p_l_hat && s.p_l_hat <= s.ci_high);
        let zero = ShotStats::from_counts(0, 1000);
        assert!(zero.ci_low >= 0.0 && zero.ci_low < 1e-12);
        assert!(zero.ci_high > 0.0);
    }
}
