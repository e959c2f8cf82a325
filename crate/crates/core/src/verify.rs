//! Verification harness: statistical invariance and separation fuzzing for
//! embedding keys.
//!
//! Invariance fuzzing applies random group elements (extended by random
//! translations/scalings when the key carries the corresponding
//! preprocessing) and checks that embeddings move by at most `eq_tol`.
//!
//! Separation fuzzing draws random oracle-distinct cloud pairs and checks
//! the embedding gap exceeds `sep_margin`. Independent random pairs almost
//! never land on an embedding collision even for undersized keys, so each
//! trial additionally runs a collision probe: a 1-d root finder matches the
//! first embedding coordinate along a random segment, and the remaining
//! coordinates then expose any key that is too small to be injective.

use crate::embedding::{embed, preprocess, EmbeddingKey};
use crate::error::{Error, Result};
use crate::groups::{apply, orbit_equal, sample_element, GroupElement, GroupTag};
use crate::numerics::{numeric_rank, PointCloud, ToleranceConfig};
use crate::rng::SeededRng;

/// `max_i |a_i - b_i| / max(1, |a|_inf, |b|_inf)` — the relative gap used
/// for both invariance (small) and separation (large) decisions.
pub fn relative_gap(a: &[f64], b: &[f64]) -> f64 {
    let dev = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0_f64, f64::max);
    let scale = a
        .iter()
        .chain(b)
        .fold(1.0_f64, |m, v| m.max(v.abs()));
    dev / scale
}

/// Draws a cloud the key can embed (resampling until preconditions hold).
pub fn sample_cloud_for_key(
    key: &EmbeddingKey,
    cfg: &ToleranceConfig,
    rng: &mut SeededRng,
) -> PointCloud {
    loop {
        let x = PointCloud::random_gaussian(key.d, key.n, rng);
        if !key.group.oracle_requires_full_rank() {
            return x;
        }
        let Ok(pre) = preprocess(key, &x, cfg) else {
            continue;
        };
        if numeric_rank(&pre, cfg) == key.d && numeric_rank(&x, cfg) == key.d {
            return x;
        }
    }
}

/// A random element of the key's effective symmetry group: the base group
/// element plus a translation and/or scaling for the active preprocessing,
/// returned in application order.
pub fn sample_action_for_key(key: &EmbeddingKey, rng: &mut SeededRng) -> Vec<GroupElement> {
    let mut action = vec![sample_element(key.group, key.d, key.n, rng)];
    if key.preprocess.center {
        action.push(sample_element(GroupTag::Translation, key.d, key.n, rng));
    }
    if key.preprocess.scale_normalize {
        action.push(sample_element(GroupTag::Scaling, key.d, key.n, rng));
    }
    action
}

pub fn apply_action(action: &[GroupElement], x: &PointCloud) -> Result<PointCloud> {
    let mut out = x.clone();
    for g in action {
        out = apply(g, &out)?;
    }
    Ok(out)
}

/// Orbit equality under the key's effective group: preprocessing first
/// (which quotients out translation/scaling), then the base-group oracle.
pub fn oracle_equal_for_key(
    key: &EmbeddingKey,
    x: &PointCloud,
    y: &PointCloud,
    cfg: &ToleranceConfig,
) -> Result<bool> {
    let px = preprocess(key, x, cfg)?;
    let py = preprocess(key, y, cfg)?;
    orbit_equal(key.group, &px, &py, cfg)
}

/// One stored counterexample, with enough state to replay it.
#[derive(Debug, Clone)]
pub struct Witness {
    pub kind: WitnessKind,
    pub gap: f64,
    pub cloud_a: PointCloud,
    pub cloud_b: PointCloud,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessKind {
    /// Embedding moved under a group action.
    Invariance,
    /// Oracle-distinct pair with embedding gap at or below the margin.
    Separation,
}

/// Tally of a verification run.
#[derive(Debug, Clone, Default)]
pub struct VerifyReport {
    pub invariance_checks: usize,
    pub invariance_violations: usize,
    pub separation_trials: usize,
    pub separation_violations: usize,
    pub collision_probes: usize,
    pub skipped_trials: usize,
    /// First few violating witnesses (capped), for reproduction.
    pub witnesses: Vec<Witness>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.invariance_violations == 0 && self.separation_violations == 0
    }
}

const WITNESS_CAP: usize = 8;

/// Runs `trials` clouds x `trials` group elements of invariance fuzzing and
/// `trials` separation trials (random-pair check plus collision probe).
pub fn verify_key(
    key: &EmbeddingKey,
    cfg: &ToleranceConfig,
    trials: usize,
    seed: u64,
) -> Result<VerifyReport> {
    key.validate()?;
    let mut report = VerifyReport::default();
    if trials == 0 {
        return Ok(report);
    }
    let root = SeededRng::new(seed, 0);

    // invariance: trials clouds x trials elements
    let mut cloud_rng = root.substream(1);
    let mut elem_rng = root.substream(2);
    let clouds: Vec<PointCloud> = (0..trials)
        .map(|_| sample_cloud_for_key(key, cfg, &mut cloud_rng))
        .collect();
    let actions: Vec<Vec<GroupElement>> = (0..trials)
        .map(|_| sample_action_for_key(key, &mut elem_rng))
        .collect();
    for x in &clouds {
        let base = embed(key, x, cfg)?;
        for action in &actions {
            let moved = apply_action(action, x)?;
            report.invariance_checks += 1;
            match embed(key, &moved, cfg) {
                Ok(e) => {
                    let gap = relative_gap(&base.values, &e.values);
                    if gap > cfg.eq_tol {
                        report.invariance_violations += 1;
                        if report.witnesses.len() < WITNESS_CAP {
                            report.witnesses.push(Witness {
                                kind: WitnessKind::Invariance,
                                gap,
                                cloud_a: x.clone(),
                                cloud_b: moved,
                            });
                        }
                    }
                }
                Err(Error::RankDeficient(_)) => {
                    // a boost can push a borderline cloud across the rank
                    // tolerance; not an invariance violation
                    report.skipped_trials += 1;
                }
                Err(e) => return Err(e),
            }
        }
    }

    // separation: random oracle-distinct pairs plus collision probes
    let mut pair_rng = root.substream(3);
    for _ in 0..trials {
        let x = sample_cloud_for_key(key, cfg, &mut pair_rng);
        let y = sample_cloud_for_key(key, cfg, &mut pair_rng);
        let distinct = match oracle_equal_for_key(key, &x, &y, cfg) {
            Ok(eq) => !eq,
            Err(_) => {
                report.skipped_trials += 1;
                continue;
            }
        };
        if !distinct {
            report.skipped_trials += 1;
            continue;
        }
        report.separation_trials += 1;
        let ex = embed(key, &x, cfg)?;
        let ey = embed(key, &y, cfg)?;
        if relative_gap(&ex.values, &ey.values) <= cfg.sep_margin {
            record_separation_failure(&mut report, &x, &y, relative_gap(&ex.values, &ey.values));
        }

        // collision probe along the segment through x and y
        if let Some(candidate) = collision_probe(key, cfg, &x, &y) {
            report.collision_probes += 1;
            if let Ok(ec) = embed(key, &candidate, cfg) {
                let gap = relative_gap(&ex.values, &ec.values);
                if gap <= cfg.sep_margin {
                    if let Ok(false) = oracle_equal_for_key(key, &x, &candidate, cfg) {
                        record_separation_failure(&mut report, &x, &candidate, gap);
                    }
                }
            }
        }
    }
    Ok(report)
}

fn record_separation_failure(report: &mut VerifyReport, x: &PointCloud, y: &PointCloud, gap: f64) {
    report.separation_violations += 1;
    if report.witnesses.len() < WITNESS_CAP {
        report.witnesses.push(Witness {
            kind: WitnessKind::Separation,
            gap,
            cloud_a: x.clone(),
            cloud_b: y.clone(),
        });
    }
}

/// Searches the line `x + s (y - x)` for a nonzero `s` where the first
/// embedding coordinate returns to its value at `x`. For a key with enough
/// coordinates the other values keep the candidate separated; for an
/// undersized key this lands on a genuine embedding collision.
fn collision_probe(
    key: &EmbeddingKey,
    cfg: &ToleranceConfig,
    x: &PointCloud,
    y: &PointCloud,
) -> Option<PointCloud> {
    let delta = y.matrix() - x.matrix();
    let at = |s: f64| -> Option<f64> {
        let cloud = PointCloud::new(x.matrix() + &delta * s).ok()?;
        let e = embed(key, &cloud, cfg).ok()?;
        Some(e.values[0])
    };
    let target = at(0.0)?;
    for side in [1.0_f64, -1.0] {
        let grid: Vec<f64> = (0..=40).map(|k| side * (0.05 + 2.95 * k as f64 / 40.0)).collect();
        let mut prev: Option<(f64, f64)> = None;
        for &s in &grid {
            let Some(v) = at(s) else {
                prev = None;
                continue;
            };
            let f = v - target;
            if let Some((ps, pf)) = prev {
                if pf.signum() != f.signum() && pf != 0.0 {
                    // bisect [ps, s]
                    let (mut lo, mut hi, mut flo) = (ps, s, pf);
                    for _ in 0..100 {
                        let mid = 0.5 * (lo + hi);
                        let Some(vm) = at(mid) else { break };
                        let fm = vm - target;
                        if fm == 0.0 {
                            lo = mid;
                            break;
                        }
                        if fm.signum() == flo.signum() {
                            lo = mid;
                            flo = fm;
                        } else {
                            hi = mid;
                        }
                    }
                    let s_star = 0.5 * (lo + hi);
                    return PointCloud::new(x.matrix() + &delta * s_star).ok();
                }
            }
            prev = Some((s, f));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::{generate_key, KeyOptions, Mode, Preprocess};

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn fresh_orth_key_passes() {
        let key = generate_key(
            GroupTag::Orth,
            2,
            3,
            6,
            Mode::Full,
            1,
            &KeyOptions::default(),
        )
        .unwrap();
        let report = verify_key(&key, &cfg(), 40, 7).unwrap();
        assert!(report.passed(), "{report:?}");
        assert_eq!(report.invariance_checks, 1600);
        assert!(report.separation_trials > 0);
    }

    #[test]
    fn truncated_key_fails_separation() {
        let key = generate_key(
            GroupTag::Orth,
            2,
            3,
            6,
            Mode::Full,
            1,
            &KeyOptions {
                m_override: Some(1),
                allow_undersized: true,
                ..Default::default()
            },
        )
        .unwrap();
        let report = verify_key(&key, &cfg(), 50, 7).unwrap();
        assert!(
            report.separation_violations > 0,
            "m = 1 cannot embed a 5-dimensional quotient: {report:?}"
        );
        assert!(!report.witnesses.is_empty());
    }

    #[test]
    fn zero_trials_trivially_pass() {
        let key = generate_key(
            GroupTag::Orth,
            2,
            3,
            6,
            Mode::Full,
            1,
            &KeyOptions::default(),
        )
        .unwrap();
        let report = verify_key(&key, &cfg(), 0, 0).unwrap();
        assert!(report.passed());
        assert_eq!(report.invariance_checks, 0);
    }

    #[test]
    fn wrapper_key_invariance_under_extended_group() {
        let key = generate_key(
            GroupTag::Orth,
            2,
            4,
            8,
            Mode::Full,
            3,
            &KeyOptions {
                preprocess: Preprocess {
                    center: true,
                    scale_normalize: true,
                },
                ..Default::default()
            },
        )
        .unwrap();
        let report = verify_key(&key, &cfg(), 30, 11).unwrap();
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn relative_gap_basics() {
        assert_eq!(relative_gap(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        assert!(relative_gap(&[0.0], &[1.0]) == 1.0);
        // scale-normalized by the largest coordinate
        assert!((relative_gap(&[100.0, 0.0], &[100.0, 1.0]) - 0.01).abs() < 1e-15);
    }
}
