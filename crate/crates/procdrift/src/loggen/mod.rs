//! Synthetic event-log generation with controlled concept drift.
//!
//! A log alternates 500-trace stable blocks with change regions in which an
//! old and a new model hand over according to a drift distribution. Models
//! swap roles after every region, so consecutive drifts flip back and
//! forth between the base model and its derived variant.

mod dist;
mod pattern;
mod tree;

pub use dist::DriftDistribution;
pub use pattern::{apply_pattern, ChangePattern};
pub use tree::ProcessTree;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::eventlog::EventLog;
use crate::{Error, Result};

/// Traces per stable block before, between, and after change regions.
const STABLE_BLOCK: usize = 500;
/// Retries for trees whose samples can be empty (fully optional roots).
const EMPTY_SAMPLE_RETRIES: usize = 64;
/// Cap for the variant-set inequality check between base and derived model.
const VARIANT_CAP: usize = 10_000;

/// Where the drift really happened, kept alongside a generated log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    /// Total traces in the log.
    pub log_size: usize,
    /// Change regions as half-open trace-index intervals `[t1, t2)`.
    pub regions: Vec<(usize, usize)>,
}

/// Derives a changed model from `base` by applying `pattern` under a seed.
pub fn derive_model(
    base: &ProcessTree,
    pattern: ChangePattern,
    seed: u64,
) -> Result<ProcessTree> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    apply_pattern(base, pattern, &mut rng)
}

/// Generates a drifting log: `drift_count` change regions between
/// 500-trace stable blocks, handing over per `dist`.
///
/// Trace `k` of a region follows the incoming model with probability
/// `dist.cdf(k)`; the region ends once that probability exceeds 0.999.
/// The same seed always yields the same log and ground truth.
pub fn generate_log(
    base: &ProcessTree,
    derived: &ProcessTree,
    dist: &DriftDistribution,
    drift_count: usize,
    seed: u64,
) -> Result<(EventLog, GroundTruth)> {
    if drift_count == 0 {
        return Err(Error::InvalidConfig("drift count must be at least 1".into()));
    }
    base.validate()?;
    derived.validate()?;
    dist.validate()?;
    if base.variants_bounded(VARIANT_CAP) == derived.variants_bounded(VARIANT_CAP) {
        return Err(Error::InvalidConfig(
            "base and derived model have the same variant set".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut behaviors: Vec<Vec<String>> = Vec::new();
    let mut regions = Vec::with_capacity(drift_count);
    let mut old = base;
    let mut new = derived;

    for _ in 0..drift_count {
        for _ in 0..STABLE_BLOCK {
            behaviors.push(sample_nonempty(old, &mut rng)?);
        }
        let t1 = behaviors.len();
        let mut k = 0usize;
        while !dist.ends_at(k) {
            let take_new = rng.gen_bool(dist.cdf(k).clamp(0.0, 1.0));
            let model = if take_new { new } else { old };
            behaviors.push(sample_nonempty(model, &mut rng)?);
            k += 1;
        }
        regions.push((t1, behaviors.len()));
        std::mem::swap(&mut old, &mut new);
    }
    for _ in 0..STABLE_BLOCK {
        behaviors.push(sample_nonempty(old, &mut rng)?);
    }

    let log = EventLog::from_behaviors(behaviors);
    let truth = GroundTruth { log_size: log.len(), regions };
    Ok((log, truth))
}

fn sample_nonempty(tree: &ProcessTree, rng: &mut impl Rng) -> Result<Vec<String>> {
    for _ in 0..EMPTY_SAMPLE_RETRIES {
        let behavior = tree.sample(rng);
        if !behavior.is_empty() {
            return Ok(behavior);
        }
    }
    Err(Error::InvalidTree(
        "tree keeps generating empty traces".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(spec: &str) -> DriftDistribution {
        spec.parse().unwrap()
    }

    fn base_and_derived() -> (ProcessTree, ProcessTree) {
        let base = ProcessTree::loanlike();
        let derived = derive_model(&base, ChangePattern::Re, 11).unwrap();
        (base, derived)
    }

    #[test]
    fn benchmark_grid_geometry_is_exact() {
        // (spec, expected size with 9 drifts); regions follow from the width
        let cases: [(&str, usize); 12] = [
            ("linear:0.001", 14_000),
            ("linear:0.002", 9_500),
            ("linear:0.005", 6_800),
            ("linear:0.01", 5_900),
            ("gaussian:20:10", 5_459),
            ("gaussian:50:30", 6_287),
            ("exponential:0.05", 6_251),
            ("exponential:0.1", 5_630),
            ("exponential:0.5", 5_126),
            ("constant:0.5:100", 5_900),
            ("constant:0.5:200", 6_800),
            ("constant:0.5:500", 9_500),
        ];
        let (base, derived) = base_and_derived();
        for (spec, size) in cases {
            let d = dist(spec);
            let width = d.region_width();
            let (log, truth) = generate_log(&base, &derived, &d, 9, 7).unwrap();
            assert_eq!(log.len(), size, "{spec}");
            assert_eq!(truth.log_size, size, "{spec}");
            assert_eq!(truth.regions.len(), 9, "{spec}");
            for (i, &(t1, t2)) in truth.regions.iter().enumerate() {
                assert_eq!(t1, 500 * (i + 1) + width * i, "{spec} region {i}");
                assert_eq!(t2, t1 + width, "{spec} region {i}");
            }
        }
    }

    #[test]
    fn named_grid_rows_match_their_published_boundaries() {
        let (base, derived) = base_and_derived();
        let (_, truth) =
            generate_log(&base, &derived, &dist("linear:0.001"), 9, 3).unwrap();
        assert_eq!(truth.regions[0], (500, 1_500));
        assert_eq!(truth.regions[1], (2_000, 3_000));
        assert_eq!(truth.regions[8], (12_500, 13_500));
        let (_, truth) =
            generate_log(&base, &derived, &dist("gaussian:20:10"), 9, 3).unwrap();
        assert_eq!(truth.regions[0], (500, 551));
        assert_eq!(truth.regions[8], (4_908, 4_959));
        let (_, truth) =
            generate_log(&base, &derived, &dist("exponential:0.5"), 9, 3).unwrap();
        assert_eq!(truth.regions[0], (500, 514));
        assert_eq!(truth.regions[8], (4_612, 4_626));
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let (base, derived) = base_and_derived();
        let d = dist("constant:0.5:100");
        let (log_a, truth_a) = generate_log(&base, &derived, &d, 2, 99).unwrap();
        let (log_b, truth_b) = generate_log(&base, &derived, &d, 2, 99).unwrap();
        assert_eq!(log_a, log_b);
        assert_eq!(truth_a, truth_b);
        let (log_c, _) = generate_log(&base, &derived, &d, 2, 100).unwrap();
        assert_ne!(log_a, log_c);
    }

    #[test]
    fn stable_blocks_follow_the_active_model_only() {
        let (base, derived) = base_and_derived();
        let base_variants = base.variants_bounded(100);
        let derived_variants = derived.variants_bounded(100);
        let d = dist("constant:0.5:100");
        let (log, truth) = generate_log(&base, &derived, &d, 2, 5).unwrap();
        let (t1, t2) = truth.regions[0];
        for trace in &log.traces[..t1] {
            assert!(base_variants.contains(&trace.behavior()));
        }
        // after the first region the roles are swapped
        let (u1, _) = truth.regions[1];
        for trace in &log.traces[t2..u1] {
            assert!(derived_variants.contains(&trace.behavior()));
        }
        for trace in &log.traces[t2..] {
            let b = trace.behavior();
            assert!(
                base_variants.contains(&b) || derived_variants.contains(&b)
            );
        }
    }

    #[test]
    fn constant_region_mixes_models_at_the_given_rate() {
        let (base, derived) = base_and_derived();
        let derived_variants = derived.variants_bounded(100);
        let d = dist("constant:0.5:200");
        let (log, truth) = generate_log(&base, &derived, &d, 1, 21).unwrap();
        let (t1, t2) = truth.regions[0];
        assert_eq!(t2 - t1, 200);
        let new_count = log.traces[t1..t2]
            .iter()
            .filter(|t| derived_variants.contains(&t.behavior()))
            .count();
        // binomial(200, 0.5); far outside [60, 140] would be a bug
        assert!((60..=140).contains(&new_count), "got {new_count}");
    }

    #[test]
    fn degenerate_constant_region_swaps_models_instantly() {
        let (base, derived) = base_and_derived();
        let d = dist("constant:0.9:0");
        let (log, truth) = generate_log(&base, &derived, &d, 1, 2).unwrap();
        assert_eq!(log.len(), 2 * STABLE_BLOCK);
        assert_eq!(truth.regions, vec![(500, 500)]);
        let derived_variants = derived.variants_bounded(100);
        assert!(derived_variants.contains(&log.traces[500].behavior()));
    }

    #[test]
    fn identical_models_are_rejected() {
        let base = ProcessTree::loanlike();
        let err = generate_log(
            &base,
            &base.clone(),
            &dist("linear:0.01"),
            1,
            1,
        );
        assert!(matches!(err, Err(Error::InvalidConfig(_))));
        let err = generate_log(
            &base,
            &derive_model(&base, ChangePattern::Sw, 1).unwrap(),
            &dist("linear:0.01"),
            0,
            1,
        );
        assert!(matches!(err, Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn case_ids_and_timestamps_are_sequential() {
        let (base, derived) = base_and_derived();
        let d = dist("constant:0.5:0");
        let (log, _) = generate_log(&base, &derived, &d, 1, 8).unwrap();
        assert_eq!(log.traces[0].case_id, "c1");
        assert_eq!(log.traces[999].case_id, "c1000");
        let first = log.traces[0].events[0].timestamp;
        let second = log.traces[0].events[1].timestamp;
        assert_eq!((second - first).num_minutes(), 1);
        // traces arrive in generation order
        let last_prev = log.traces[0].events.last().unwrap().timestamp;
        let first_next = log.traces[1].events[0].timestamp;
        assert!(first_next > last_prev);
    }
}
