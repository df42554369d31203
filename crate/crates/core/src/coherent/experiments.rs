//! Experiments on top of the coherent simulator: the closed-form
//! amplitude check, precision-scaling runs and silent-drift runs.
//!
//! All experiments derive one RNG stream per shot from
//! `(master seed, shot index)`, so shots can run on any number of
//! threads with bit-identical results.

use super::{
    decode_and_correct, decode_window, logical_error_angle, noise_round, prepare_logical,
    qec_cycle, AngleMode, CoherentError, MeasureMode, NoiseConfig, SyndromeRecord,
};
use crate::codes::{repetition_code, CodeLayout};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::collections::BTreeSet;

/// Closed-form amplitudes of one rotation round applied to
/// `alpha·|0…0⟩ + beta·|1…1⟩`: basis state b receives
/// `alpha·Π(c or s) + beta·Π(c or −s)` with c_i = cos θ_i/2,
/// s_i = sin θ_i/2.
pub fn rotated_code_amplitudes(
    alpha: Complex64,
    beta: Complex64,
    thetas: &[f64],
) -> Vec<Complex64> {
    let n = thetas.len();
    let cs: Vec<(f64, f64)> = thetas.iter().map(|t| ((t / 2.0).cos(), (t / 2.0).sin())).collect();
    let mut amps = Vec::with_capacity(1 << n);
    for b in 0..(1usize << n) {
        let mut from_zero = 1.0;
        let mut from_one = 1.0;
        for (i, &(c, s)) in cs.iter().enumerate() {
            if b >> i & 1 == 1 {
                from_zero *= s;
                from_one *= c;
            } else {
                from_zero *= c;
                from_one *= -s;
            }
        }
        amps.push(alpha * from_zero + beta * from_one);
    }
    amps
}

/// Probability of the all-+1 syndrome branch per the closed form:
/// `|amp(0…0)|² + |amp(1…1)|²`.
pub fn analytic_no_defect_probability(alpha: Complex64, beta: Complex64, thetas: &[f64]) -> f64 {
    let amps = rotated_code_amplitudes(alpha, beta, thetas);
    amps[0].norm_sqr() + amps[amps.len() - 1].norm_sqr()
}

/// Deterministic simulated probability of the all-+1 branch after one
/// fixed-angle noise round: prepare, rotate every qubit by `cfg.eta`,
/// project every stabilizer onto +1 and accumulate the probabilities.
pub fn no_defect_probability(
    layout: &CodeLayout,
    alpha: Complex64,
    beta: Complex64,
    eta: f64,
) -> Result<f64, CoherentError> {
    let mut state = prepare_logical(layout, alpha, beta)?;
    for q in 0..layout.n_data {
        state.apply_rotation(q, eta)?;
    }
    let mut prob = 1.0;
    for s in &layout.stabilizers {
        prob *= state.project(&s.op, 1)?;
    }
    Ok(prob)
}

/// Result of comparing the simulator against the closed-form amplitudes
/// over random states and angles.
#[derive(Debug, Clone)]
pub struct ClosedFormReport {
    pub trials: u64,
    pub max_deviation: f64,
    pub deviations: Vec<f64>,
}

/// Runs `trials` random (alpha, beta, θ…) draws on the repetition code
/// and reports the worst amplitude deviation from the closed form.
pub fn closed_form_check(
    n_c: usize,
    eta: f64,
    trials: u64,
    seed: u64,
) -> Result<ClosedFormReport, CoherentError> {
    let layout = repetition_code(n_c).expect("n_c validated by caller");
    let mut deviations = Vec::with_capacity(trials as usize);
    let mut max_dev: f64 = 0.0;
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        let (alpha, beta) = random_logical_amplitudes(&mut rng);
        let thetas: Vec<f64> = (0..n_c)
            .map(|_| eta * (2.0 * rng.random::<f64>() - 1.0))
            .collect();
        let mut state = prepare_logical(&layout, alpha, beta)?;
        for (q, &theta) in thetas.iter().enumerate() {
            state.apply_rotation(q, theta)?;
        }
        let reference = rotated_code_amplitudes(alpha, beta, &thetas);
        let dev = state
            .amplitudes()
            .iter()
            .zip(&reference)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max);
        max_dev = max_dev.max(dev);
        deviations.push(dev);
    }
    Ok(ClosedFormReport {
        trials,
        max_deviation: max_dev,
        deviations,
    })
}

fn random_logical_amplitudes(rng: &mut impl Rng) -> (Complex64, Complex64) {
    loop {
        let alpha = Complex64::new(
            2.0 * rng.random::<f64>() - 1.0,
            2.0 * rng.random::<f64>() - 1.0,
        );
        let beta = Complex64::new(
            2.0 * rng.random::<f64>() - 1.0,
            2.0 * rng.random::<f64>() - 1.0,
        );
        let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if norm > 1e-3 {
            return (alpha / norm, beta / norm);
        }
    }
}

/// Per-branch statistics keyed by the number of decoded errors.
#[derive(Debug, Clone, Copy)]
pub struct BranchStats {
    pub count: u64,
    pub frequency: f64,
    pub frequency_se: f64,
    pub mean_eta_l: f64,
    pub eta_l_se: f64,
}

/// One emitted CSV row: a single measurement round of a shot. The
/// defect count is the number of −1 outcomes in the round; `eta_l` is
/// the shot's final logical error angle, repeated on each of its rows.
#[derive(Debug, Clone)]
pub struct ShotCycleRow {
    pub shot: u64,
    pub cycle: u32,
    pub defect_count: u32,
    pub syndrome_class: String,
    pub eta_l: f64,
}

#[derive(Debug, Clone)]
pub struct PrecisionStats {
    pub shots: u64,
    /// Keyed by total decoded error count n over the shot.
    pub branches: BTreeMap<usize, BranchStats>,
    pub mean_eta_l: f64,
    pub mean_eta_l_se: f64,
    /// Deterministic all-+1 branch probability at fixed angle eta
    /// (NaN when the angle mode is uniform).
    pub no_defect_probability: f64,
    pub rows: Vec<ShotCycleRow>,
}

struct ShotResult {
    n_total: usize,
    eta_l: f64,
    rows: Vec<(u32, u32, String)>,
}

/// Runs `shots` independent QEC histories: prepare, then per cycle one
/// noise round followed by stabilizer measurement and correction, then
/// the final logical error angle.
///
/// With `cfg.apply_to_ancillas` set, each cycle performs `distance`
/// measurement rounds, the decoder majority-votes the window, and one
/// noiseless projective round closes the run before the angle is read
/// out.
#[allow(clippy::too_many_arguments)]
pub fn precision_experiment(
    layout: &CodeLayout,
    cfg: &NoiseConfig,
    cycles: u32,
    shots: u64,
    alpha: Complex64,
    beta: Complex64,
    mode: MeasureMode,
    seed: u64,
    keep_rows: bool,
) -> Result<PrecisionStats, CoherentError> {
    let results: Result<Vec<ShotResult>, CoherentError> = (0..shots)
        .into_par_iter()
        .map(|shot| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(shot);
            run_precision_shot(layout, cfg, cycles, alpha, beta, mode, &mut rng, keep_rows)
        })
        .collect();
    let results = results?;

    let mut branch_raw: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    let mut rows = Vec::new();
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for (shot, r) in results.iter().enumerate() {
        branch_raw.entry(r.n_total).or_default().push(r.eta_l);
        sum += r.eta_l;
        sum_sq += r.eta_l * r.eta_l;
        if keep_rows {
            for (cycle, defects, class) in &r.rows {
                rows.push(ShotCycleRow {
                    shot: shot as u64,
                    cycle: *cycle,
                    defect_count: *defects,
                    syndrome_class: class.clone(),
                    eta_l: r.eta_l,
                });
            }
        }
    }
    let fshots = shots as f64;
    let mean = sum / fshots;
    let var = (sum_sq / fshots - mean * mean).max(0.0);
    let branches = branch_raw
        .into_iter()
        .map(|(n, etas)| {
            let count = etas.len() as u64;
            let f = count as f64 / fshots;
            let m = etas.iter().sum::<f64>() / count as f64;
            let v = (etas.iter().map(|e| (e - m) * (e - m)).sum::<f64>()
                / count as f64)
                .max(0.0);
            (
                n,
                BranchStats {
                    count,
                    frequency: f,
                    frequency_se: (f * (1.0 - f) / fshots).sqrt(),
                    mean_eta_l: m,
                    eta_l_se: (v / count as f64).sqrt(),
                },
            )
        })
        .collect();

    let no_defect = if cfg.angle_mode == AngleMode::Fixed {
        no_defect_probability(layout, alpha, beta, cfg.eta)?
    } else {
        f64::NAN
    };

    Ok(PrecisionStats {
        shots,
        branches,
        mean_eta_l: mean,
        mean_eta_l_se: (var / fshots).sqrt(),
        no_defect_probability: no_defect,
        rows,
    })
}

#[allow(clippy::too_many_arguments)]
fn run_precision_shot(
    layout: &CodeLayout,
    cfg: &NoiseConfig,
    cycles: u32,
    alpha: Complex64,
    beta: Complex64,
    mode: MeasureMode,
    rng: &mut ChaCha8Rng,
    keep_rows: bool,
) -> Result<ShotResult, CoherentError> {
    let mut state = prepare_logical(layout, alpha, beta)?;
    let mut record = SyndromeRecord::new();
    let mut n_total = 0usize;
    let mut rows = Vec::new();
    let no_skip = BTreeSet::new();
    let rounds_per_cycle = if cfg.apply_to_ancillas {
        layout.distance as u32
    } else {
        1
    };
    for cycle in 0..cycles {
        noise_round(&mut state, layout, cfg, rng)?;
        for _ in 0..rounds_per_cycle {
            let row = qec_cycle(&mut state, layout, &no_skip, mode, cfg, rng)?;
            if keep_rows {
                let defects = row.iter().filter(|v| **v == Some(-1)).count() as u32;
                rows.push((cycle, defects, SyndromeRecord::class_string(&row)));
            }
            record.push(row);
        }
        let recovery = if rounds_per_cycle > 1 {
            decode_window(&record, layout, rounds_per_cycle as usize)?
        } else {
            decode_and_correct(&record, layout)?
        };
        n_total += recovery.weight();
        state.apply_pauli(&recovery)?;
    }
    if cfg.apply_to_ancillas {
        // noiseless projective round to land exactly in the codespace
        let quiet = NoiseConfig {
            apply_to_ancillas: false,
            ..*cfg
        };
        let row = qec_cycle(&mut state, layout, &no_skip, MeasureMode::Ideal, &quiet, rng)?;
        if keep_rows {
            let defects = row.iter().filter(|v| **v == Some(-1)).count() as u32;
            rows.push((cycles, defects, SyndromeRecord::class_string(&row)));
        }
        record.push(row);
        let recovery = decode_and_correct(&record, layout)?;
        n_total += recovery.weight();
        state.apply_pauli(&recovery)?;
    }
    let eta_l = logical_error_angle(&state, layout, alpha, beta)?;
    Ok(ShotResult {
        n_total,
        eta_l,
        rows,
    })
}

/// One cycle of the drift curve.
#[derive(Debug, Clone, Copy)]
pub struct DriftPoint {
    pub cycle: u32,
    pub skipped: bool,
    /// Squared amplitude outside the silent stabilizer's +1 sector,
    /// recorded after the noise round and before any measurement.
    pub occupation: f64,
    /// Same quantity for the control run that never skips.
    pub control_occupation: f64,
}

#[derive(Debug, Clone)]
pub struct DriftCurve {
    pub points: Vec<DriftPoint>,
    /// Occupation right before the first resumed measurement.
    pub occupation_at_resumption: f64,
    /// Outcome of the first resumed measurement, if the run resumed.
    pub resumption_outcome: Option<i8>,
}

/// Runs QEC with one stabilizer silenced for the first `skip_cycles`
/// cycles and a control run without skipping, tracking the silent-sector
/// occupation each cycle. Both runs decode (under the freeze policy) and
/// correct every cycle.
#[allow(clippy::too_many_arguments)]
pub fn silent_drift_experiment(
    layout: &CodeLayout,
    cfg: &NoiseConfig,
    silent_stab: usize,
    skip_cycles: u32,
    total_cycles: u32,
    alpha: Complex64,
    beta: Complex64,
    seed: u64,
) -> Result<DriftCurve, CoherentError> {
    let silent = run_drift(
        layout,
        cfg,
        silent_stab,
        skip_cycles,
        total_cycles,
        alpha,
        beta,
        seed,
        0,
    )?;
    let control = run_drift(
        layout,
        cfg,
        silent_stab,
        0,
        total_cycles,
        alpha,
        beta,
        seed,
        1,
    )?;
    let points = silent
        .occupations
        .iter()
        .zip(&control.occupations)
        .enumerate()
        .map(|(t, (&occ, &ctrl))| DriftPoint {
            cycle: t as u32,
            skipped: (t as u32) < skip_cycles,
            occupation: occ,
            control_occupation: ctrl,
        })
        .collect();
    Ok(DriftCurve {
        points,
        occupation_at_resumption: silent.occupation_at_resumption,
        resumption_outcome: silent.resumption_outcome,
    })
}

struct DriftRun {
    occupations: Vec<f64>,
    occupation_at_resumption: f64,
    resumption_outcome: Option<i8>,
}

#[allow(clippy::too_many_arguments)]
fn run_drift(
    layout: &CodeLayout,
    cfg: &NoiseConfig,
    silent_stab: usize,
    skip_cycles: u32,
    total_cycles: u32,
    alpha: Complex64,
    beta: Complex64,
    seed: u64,
    stream: u64,
) -> Result<DriftRun, CoherentError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut state = prepare_logical(layout, alpha, beta)?;
    let mut record = SyndromeRecord::new();
    let silent_op = &layout.stabilizers[silent_stab].op;
    let mut occupations = Vec::with_capacity(total_cycles as usize);
    let mut occupation_at_resumption = f64::NAN;
    let mut resumption_outcome = None;
    for t in 0..total_cycles {
        noise_round(&mut state, layout, cfg, &mut rng)?;
        let occ = (1.0 - state.expectation(silent_op)?.re) / 2.0;
        occupations.push(occ);
        let skip: BTreeSet<usize> = if t < skip_cycles {
            BTreeSet::from([silent_stab])
        } else {
            BTreeSet::new()
        };
        let row = qec_cycle(&mut state, layout, &skip, MeasureMode::Ideal, cfg, &mut rng)?;
        if skip_cycles > 0 && t == skip_cycles {
            occupation_at_resumption = occ;
            resumption_outcome = row[silent_stab];
        }
        record.push(row);
        let recovery = decode_and_correct(&record, layout)?;
        state.apply_pauli(&recovery)?;
    }
    Ok(DriftRun {
        occupations,
        occupation_at_resumption,
        resumption_outcome,
    })
}

/// Aggregate Born-rule check of the resumed measurement: over many
/// independent drift histories, the −1 frequency at resumption must
/// match the tracked occupation.
#[derive(Debug, Clone, Copy)]
pub struct BornResumption {
    pub trials: u64,
    pub expected_minus: f64,
    pub variance: f64,
    pub observed_minus: u64,
}

pub fn born_resumption_stats(
    layout: &CodeLayout,
    cfg: &NoiseConfig,
    silent_stab: usize,
    skip_cycles: u32,
    trials: u64,
    seed: u64,
) -> Result<BornResumption, CoherentError> {
    let per_trial: Result<Vec<(f64, bool)>, CoherentError> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let run = run_drift(
                layout,
                cfg,
                silent_stab,
                skip_cycles,
                skip_cycles + 1,
                Complex64::ONE,
                Complex64::ZERO,
                seed,
                trial,
            )?;
            Ok((
                run.occupation_at_resumption,
                run.resumption_outcome == Some(-1),
            ))
        })
        .collect();
    let per_trial = per_trial?;
    let expected: f64 = per_trial.iter().map(|(p, _)| p).sum();
    let variance: f64 = per_trial.iter().map(|(p, _)| p * (1.0 - p)).sum();
    let observed = per_trial.iter().filter(|(_, minus)| *minus).count() as u64;
    Ok(BornResumption {
        trials,
        expected_minus: expected,
        variance,
        observed_minus: observed,
    })
}

/// Least-squares slope and intercept of ln(y) against ln(x).
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> (f64, f64) {
    let data: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = data.len() as f64;
    let sx: f64 = data.iter().map(|(x, _)| x).sum();
    let sy: f64 = data.iter().map(|(_, y)| y).sum();
    let sxx: f64 = data.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = data.iter().map(|(x, y)| x * y).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    (slope, intercept)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::repetition_code;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn closed_form_matches_simulator() {
        let report = closed_form_check(3, 0.3, 50, 11).unwrap();
        assert!(report.max_deviation < 1e-12, "max dev {}", report.max_deviation);
    }

    #[test]
    fn analytic_probability_matches_projector_route() {
        let layout = repetition_code(3).unwrap();
        let (a, b) = (c(0.6), c(0.8));
        let eta = 0.17;
        let sim = no_defect_probability(&layout, a, b, eta).unwrap();
        let analytic = analytic_no_defect_probability(a, b, &[eta, eta, eta]);
        assert!((sim - analytic).abs() < 1e-12);
    }

    #[test]
    fn zero_eta_shots_are_perfect() {
        let layout = repetition_code(3).unwrap();
        let cfg = NoiseConfig::default();
        let stats = precision_experiment(
            &layout,
            &cfg,
            1,
            50,
            c(1.0),
            c(0.0),
            MeasureMode::Ideal,
            5,
            true,
        )
        .unwrap();
        assert_eq!(stats.branches.len(), 1);
        let b0 = stats.branches.get(&0).unwrap();
        assert_eq!(b0.count, 50);
        assert!(b0.mean_eta_l.abs() < 1e-7);
        assert!(stats.rows.iter().all(|r| r.defect_count == 0));
    }

    #[test]
    fn precision_shots_are_seed_deterministic() {
        let layout = repetition_code(3).unwrap();
        let cfg = NoiseConfig {
            eta: 0.2,
            angle_mode: AngleMode::Uniform,
            ..Default::default()
        };
        let run = || {
            precision_experiment(
                &layout,
                &cfg,
                2,
                200,
                c(1.0),
                c(0.0),
                MeasureMode::Ideal,
                42,
                false,
            )
            .unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a.mean_eta_l.to_bits(), b.mean_eta_l.to_bits());
        let na: Vec<_> = a.branches.iter().map(|(n, s)| (*n, s.count)).collect();
        let nb: Vec<_> = b.branches.iter().map(|(n, s)| (*n, s.count)).collect();
        assert_eq!(na, nb);
    }

    #[test]
    fn n1_branch_angle_is_exactly_eta_for_basis_target() {
        // corrected single-defect branch of the 3-qubit code leaves the
        // state c|000⟩ + s|111⟩, i.e. an angle of exactly eta
        let layout = repetition_code(3).unwrap();
        let eta = 0.24;
        let cfg = NoiseConfig {
            eta,
            ..Default::default()
        };
        let stats = precision_experiment(
            &layout,
            &cfg,
            1,
            4000,
            c(1.0),
            c(0.0),
            MeasureMode::Ideal,
            7,
            false,
        )
        .unwrap();
        let b1 = stats.branches.get(&1).expect("n=1 branch populated");
        assert!(
            (b1.mean_eta_l - eta).abs() < 1e-9,
            "n=1 angle {} vs eta {eta}",
            b1.mean_eta_l
        );
        // and the n=0 branch matches 2·arctan(tan³(η/2))
        let b0 = stats.branches.get(&0).unwrap();
        let expected = 2.0 * (eta / 2.0).tan().powi(3).atan();
        assert!((b0.mean_eta_l - expected).abs() < 1e-9);
    }

    #[test]
    fn minus_plus_branch_matches_closed_form() {
        use super::super::{prepare_logical, SyndromeRecord};
        use crate::coherent::decode_and_correct;

        // force the (−1, +1) syndrome branch and compare both the branch
        // probability and the corrected state against the closed form
        let layout = repetition_code(3).unwrap();
        let (a, b) = (c(0.8), c(0.6));
        let eta = 0.3;
        let mut state = prepare_logical(&layout, a, b).unwrap();
        for q in 0..3 {
            state.apply_rotation(q, eta).unwrap();
        }
        let p_minus = state.project(&layout.stabilizers[0].op, -1).unwrap();
        let p_plus = state.project(&layout.stabilizers[1].op, 1).unwrap();

        let reference = rotated_code_amplitudes(a, b, &[eta, eta, eta]);
        // |100⟩ is index 1 and |011⟩ is index 6 in the little-endian
        // amplitude order
        let p_branch = reference[1].norm_sqr() + reference[6].norm_sqr();
        assert!((p_minus * p_plus - p_branch).abs() < 1e-12);

        let norm = p_branch.sqrt();
        assert!((state.amplitudes()[1] - reference[1] / norm).norm() < 1e-12);
        assert!((state.amplitudes()[6] - reference[6] / norm).norm() < 1e-12);

        // applying the decoded X_1 returns the state to the codespace
        let mut record = SyndromeRecord::new();
        record.push(vec![Some(-1), Some(1)]);
        let recovery = decode_and_correct(&record, &layout).unwrap();
        assert_eq!(recovery, crate::pauli::PauliOperator::x_string(3, &[0]).unwrap());
        state.apply_pauli(&recovery).unwrap();
        for s in &layout.stabilizers {
            assert!((state.expectation(&s.op).unwrap().re - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn equal_superposition_no_defect_branch_shift() {
        // for α = β = 1/√2 the corrected no-defect state deviates from
        // the target by the cubic coefficient shift: η_L ≈ 2·(η³/8)
        use super::super::{logical_error_angle, prepare_logical};
        let layout = repetition_code(3).unwrap();
        let amp = c(1.0 / 2f64.sqrt());
        let eta = 0.05;
        let mut state = prepare_logical(&layout, amp, amp).unwrap();
        for q in 0..3 {
            state.apply_rotation(q, eta).unwrap();
        }
        for s in &layout.stabilizers {
            state.project(&s.op, 1).unwrap();
        }
        let eta_l = logical_error_angle(&state, &layout, amp, amp).unwrap();
        let leading = 2.0 * eta.powi(3) / 8.0;
        assert!(
            (eta_l / leading - 1.0).abs() < 0.01,
            "eta_L {eta_l:.3e} vs leading order {leading:.3e}"
        );
    }

    #[test]
    fn drift_with_zero_skip_equals_control() {
        let layout = repetition_code(5).unwrap();
        let cfg = NoiseConfig {
            eta: 0.05,
            ..Default::default()
        };
        let curve =
            silent_drift_experiment(&layout, &cfg, 2, 0, 10, c(1.0), c(0.0), 3).unwrap();
        for p in &curve.points {
            assert!(!p.skipped);
            assert!((p.occupation - p.control_occupation).abs() < 1e-12);
        }
    }

    #[test]
    fn loglog_fit_recovers_power_law() {
        let pts: Vec<(f64, f64)> = (1..10)
            .map(|i| {
                let x = 0.01 * i as f64;
                (x, 3.5 * x.powf(2.5))
            })
            .collect();
        let (slope, intercept) = fit_loglog_slope(&pts);
        assert!((slope - 2.5).abs() < 1e-9);
        assert!((intercept - 3.5f64.ln()).abs() < 1e-9);
    }
}
