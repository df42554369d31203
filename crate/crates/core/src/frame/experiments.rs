//! Threshold scans and silent-failure experiments on top of the frame
//! Monte Carlo.

use super::{inject_silent_failures, run_shots, FrameError, RunConfig, ShotStats, SilentParams};
use crate::codes::{repetition_code, surface_code, CodeKind, CodeLayout};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One grid point of a scan.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ScanRow {
    /// d for the surface code, N_c for the repetition code.
    pub size: usize,
    pub p: f64,
    pub q: f64,
    pub p_s: f64,
    pub cycles: u32,
    pub stats: ShotStats,
    pub silent_events: u64,
}

pub fn layout_for(kind: CodeKind, size: usize) -> Result<CodeLayout, crate::codes::CodeError> {
    match kind {
        CodeKind::Repetition => repetition_code(size),
        CodeKind::Surface => surface_code(size),
    }
}

/// Full factorial scan over code sizes and physical error rates.
///
/// Every grid cell draws from a disjoint stream range of the same master
/// seed, so the table is reproducible regardless of worker count or of
/// which subsets of the grid are rerun.
pub fn threshold_scan(
    kind: CodeKind,
    sizes: &[usize],
    ps: &[f64],
    q: f64,
    cycles: u32,
    shots: u64,
    seed: u64,
) -> Result<Vec<ScanRow>, FrameError> {
    let mut rows = Vec::with_capacity(sizes.len() * ps.len());
    for (si, &size) in sizes.iter().enumerate() {
        let layout = layout_for(kind, size).expect("sizes validated by caller");
        for (pi, &p) in ps.iter().enumerate() {
            let cell = (si * ps.len() + pi) as u64;
            let cfg = RunConfig {
                p,
                q,
                cycles,
                shots,
                silent: None,
                seed,
                stream_base: cell << 40,
            };
            let out = run_shots(&layout, &cfg)?;
            rows.push(ScanRow {
                size,
                p,
                q,
                p_s: 0.0,
                cycles,
                stats: out.stats,
                silent_events: out.silent_events,
            });
        }
    }
    Ok(rows)
}

/// Locates the grid interval where the size ordering of p_L inverts:
/// returns `(last p with strictly decreasing p_L in size, first p with
/// the ordering broken)`, if both exist.
pub fn crossing_interval(rows: &[ScanRow]) -> Option<(f64, f64)> {
    let mut ps: Vec<f64> = rows.iter().map(|r| r.p).collect();
    ps.sort_by(f64::total_cmp);
    ps.dedup();
    let mut sizes: Vec<usize> = rows.iter().map(|r| r.size).collect();
    sizes.sort_unstable();
    sizes.dedup();
    let p_l = |size: usize, p: f64| -> f64 {
        rows.iter()
            .find(|r| r.size == size && r.p == p)
            .map(|r| r.stats.p_l_hat)
            .unwrap_or(f64::NAN)
    };
    let decreasing = |p: f64| -> bool {
        sizes
            .windows(2)
            .all(|w| p_l(w[1], p) < p_l(w[0], p))
    };
    let mut below = None;
    let mut above = None;
    for &p in &ps {
        if decreasing(p) {
            below = Some(p);
        } else if below.is_some() && above.is_none() {
            above = Some(p);
        }
    }
    Some((below?, above?))
}

/// Occurrence statistics of silent-failure injection.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct OccurrenceRow {
    pub n_c: usize,
    pub p_s: f64,
    pub windows: u64,
    /// Windows containing at least one event.
    pub hits: u64,
    pub rate: f64,
    /// 1 − (1−p_s)^(N_c−1).
    pub expected: f64,
}

/// Measures, per code size, how often a window of N_c − 1 stabilizers
/// contains at least one silent failure.
pub fn silent_occurrence_experiment(
    sizes: &[usize],
    p_s: f64,
    windows: u64,
    seed: u64,
) -> Vec<OccurrenceRow> {
    sizes
        .iter()
        .enumerate()
        .map(|(si, &n_c)| {
            let n_stabs = n_c - 1;
            let mut hits = 0u64;
            for w in 0..windows {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(((si as u64) << 40) + w);
                let events = inject_silent_failures(n_stabs, p_s, 1, 1, 1, &mut rng);
                if !events.is_empty() {
                    hits += 1;
                }
            }
            OccurrenceRow {
                n_c,
                p_s,
                windows,
                hits,
                rate: hits as f64 / windows as f64,
                expected: 1.0 - (1.0 - p_s).powi(n_stabs as i32),
            }
        })
        .collect()
}

/// Injection-on vs injection-off comparison for one code size.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SilentComparisonRow {
    pub size: usize,
    pub p: f64,
    pub p_s: f64,
    pub cycles: u32,
    pub stats_on: ShotStats,
    pub stats_off: ShotStats,
    pub silent_events: u64,
    /// Shots with at least one event.
    pub event_shots: u64,
    /// Shots where an event masked a live defect.
    pub candidate_shots: u64,
    /// Shots that both contained an event and failed.
    pub failed_event_shots: u64,
    pub occurrence_rate: f64,
}

impl SilentComparisonRow {
    /// Estimated failure probability conditioned on a silent event.
    pub fn conditional_failure(&self) -> f64 {
        if self.event_shots == 0 {
            0.0
        } else {
            self.failed_event_shots as f64 / self.event_shots as f64
        }
    }
}

/// Runs the discrete model with silent-failure injection on and off
/// over a set of code sizes. The off run reuses the same master seed
/// and stream discipline, so at p_s = 0 the two columns coincide
/// shot for shot.
#[allow(clippy::too_many_arguments)]
pub fn silent_failure_experiment(
    kind: CodeKind,
    sizes: &[usize],
    p: f64,
    p_s: f64,
    window: u32,
    duration: u32,
    cycles: u32,
    shots: u64,
    seed: u64,
) -> Result<Vec<SilentComparisonRow>, FrameError> {
    let mut rows = Vec::with_capacity(sizes.len());
    for (si, &size) in sizes.iter().enumerate() {
        let layout = layout_for(kind, size).expect("sizes validated by caller");
        let base = (si as u64) << 40;
        let mut cfg_on = RunConfig {
            p,
            q: 0.0,
            cycles,
            shots,
            silent: Some(SilentParams {
                p_s,
                window,
                duration,
            }),
            seed,
            stream_base: base,
        };
        let out_on = run_shots(&layout, &cfg_on)?;
        cfg_on.silent = None;
        let out_off = run_shots(&layout, &cfg_on)?;
        rows.push(SilentComparisonRow {
            size,
            p,
            p_s,
            cycles,
            stats_on: out_on.stats,
            stats_off: out_off.stats,
            silent_events: out_on.silent_events,
            event_shots: out_on.event_shots,
            candidate_shots: out_on.candidate_shots,
            failed_event_shots: out_on.failed_event_shots,
            occurrence_rate: out_on.event_shots as f64 / shots as f64,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rate_scan_is_all_zero() {
        let rows = threshold_scan(CodeKind::Surface, &[3], &[0.0], 0.0, 1, 200, 1).unwrap();
        assert_eq!(rows[0].stats.failures, 0);
    }

    #[test]
    fn occurrence_matches_closed_form_loosely() {
        let rows = silent_occurrence_experiment(&[9], 0.01, 20_000, 2);
        let r = &rows[0];
        let sigma = (r.expected * (1.0 - r.expected) / r.windows as f64).sqrt();
        assert!(

            (r.rate - r.expected).abs() < 4.0 * sigma,
            "rate {} vs {} ± {}",
            r.rate,
            r.expected,
            sigma
        );
    }

    #[test]
    fn repetition_five_matches_exhaustive_enumeration() {
        use super::super::{logical_failure, run_shots, PauliFrame, RunConfig};
        use crate::decoder;

        let c5 = layout_for(CodeKind::Repetition, 5).unwrap();
        let p: f64 = 0.08;
        // exact p_L by enumerating all 32 X patterns
        let mut exact = 0.0;
        for mask in 0u32..32 {
            let mut frame = PauliFrame::new(5);
            for q in 0..5 {
                if mask >> q & 1 == 1 {
                    frame.x_flips.flip(q);
                }
            }
            let syndrome: Vec<i8> = c5
                .stabilizers
                .iter()
                .map(|s| super::super::stabilizer_outcome(&frame, &s.op))
                .collect();
            let recovery = decoder::decode(&c5, &syndrome).unwrap();
            frame.apply(&recovery);
            if logical_failure(&c5, &frame) {
                let w = mask.count_ones() as i32;
                exact += p.powi(w) * (1.0 - p).powi(5 - w);
            }
        }
        let shots = 100_000u64;
        let out = run_shots(&c5, &RunConfig::new(p, 0.0, 1, shots, 55)).unwrap();
        let sigma = (exact * (1.0 - exact) / shots as f64).sqrt();
        assert!(
            (out.stats.p_l_hat - exact).abs() < 3.0 * sigma,
            "{} vs {exact} ± {sigma}",
            out.stats.p_l_hat
        );
    }

    #[test]
    fn silent_failures_put_a_floor_under_the_logical_rate() {
        // p far below threshold: the off column is essentially zero while
        // masking failures keep the on column at a finite floor that does
        // not shrink with code size
        let rows = silent_failure_experiment(
            CodeKind::Repetition,
            &[9, 25],
            0.005,
            0.05,
            4,
            4,
            4,
            40_000,
            23,
        )
        .unwrap();
        for r in &rows {
            let floor = r.occurrence_rate * r.conditional_failure();
            assert!(
                r.stats_on.p_l_hat >= floor * 0.99,
                "p_L(on) {} below its occurrence × conditional floor {floor}",
                r.stats_on.p_l_hat
            );
            assert!(
                r.stats_on.p_l_hat > r.stats_off.ci_high + 1e-3,
                "size {}: on {} must clearly exceed off {}",
                r.size,
                r.stats_on.p_l_hat,
                r.stats_off.p_l_hat
            );
        }
        assert!(
            rows[1].stats_on.p_l_hat >= rows[0].stats_on.p_l_hat,
            "the floor must not shrink as the code grows: {} vs {}",
            rows[1].stats_on.p_l_hat,
            rows[0].stats_on.p_l_hat
        );
        assert!(rows[1].occurrence_rate > rows[0].occurrence_rate);
    }

    #[test]
    fn silent_off_columns_match_at_zero_ps() {
        let rows = silent_failure_experiment(
            CodeKind::Repetition,
            &[5, 9],
            0.05,
            0.0,
            2,
            2,
            4,
            2000,
            17,
        )
        .unwrap();
        for r in rows {
            assert_eq!(r.stats_on.failures, r.stats_off.failures);
            assert_eq!(r.silent_events, 0);
        }
    }

    #[test]
    fn crossing_interval_identifies_inversion() {
        // synthetic monotone-to-inverted table
        let mk = |size, p, pl: f64| ScanRow {
            size,
            p,
            q: 0.0,
            p_s: 0.0,
            cycles: 1,
            stats: ShotStats {
                shots: 100,
                failures: (pl * 100.0) as u64,
                p_l_hat: pl,
                ci_low: pl,
                ci_high: pl,
            },
            silent_events: 0,
        };
        let rows = vec![
            mk(3, 0.01, 0.10),
            mk(5, 0.01, 0.05),
            mk(3, 0.2, 0.3),
            mk(5, 0.2, 0.4),
        ];
        let (below, above) = crossing_interval(&rows).unwrap();
        assert_eq!(below, 0.01);
        assert_eq!(above, 0.2);
    }
}
