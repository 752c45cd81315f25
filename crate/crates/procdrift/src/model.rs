//! Behavior models: the variant set and directly-follows pairs discovered
//! from a window of traces.
//!
//! Discovery is the "variant model": variants are the distinct behaviors in
//! the window and the pair set is every directly-follows pair observed. The
//! conformance metrics consume exactly these two sets, and a window always
//! scores 1.0 against its own discovered model.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::eventlog::Trace;
use crate::{Error, Result};

/// A discovered model: supported behaviors plus model directly-follows pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BehaviorModel {
    variants: BTreeSet<Vec<String>>,
    df_pairs: BTreeSet<(String, String)>,
    source_size: usize,
}

impl BehaviorModel {
    /// Discovers the variant model of a trace window.
    ///
    /// Every behavior in the window is supported by the result and every
    /// observed directly-follows pair is in `df_pairs`.
    pub fn discover(traces: &[Trace]) -> Result<BehaviorModel> {
        if traces.is_empty() {
            return Err(Error::EmptyDiscovery);
        }
        Self::discover_behaviors(traces.iter().map(|t| t.behavior()))
    }

    /// Discovery from bare activity sequences.
    pub fn discover_behaviors(
        behaviors: impl IntoIterator<Item = Vec<String>>,
    ) -> Result<BehaviorModel> {
        let mut variants = BTreeSet::new();
        let mut df_pairs = BTreeSet::new();
        let mut source_size = 0usize;
        for behavior in behaviors {
            source_size += 1;
            for pair in behavior.windows(2) {
                df_pairs.insert((pair[0].clone(), pair[1].clone()));
            }
            variants.insert(behavior);
        }
        if source_size == 0 {
            return Err(Error::EmptyDiscovery);
        }
        Ok(BehaviorModel { variants, df_pairs, source_size })
    }

    /// Builds a model from externally known structure, without checking that
    /// variant-internal pairs appear in `df_pairs`.
    ///
    /// Needed for models whose pair relation comes from a process graph
    /// rather than from traces: two activities can interleave in a variant
    /// without being directly connected in the model.
    pub fn from_parts(
        variants: BTreeSet<Vec<String>>,
        df_pairs: BTreeSet<(String, String)>,
        source_size: usize,
    ) -> BehaviorModel {
        BehaviorModel { variants, df_pairs, source_size }
    }

    /// True iff the behavior is one of the model's variants.
    pub fn supports(&self, behavior: &[String]) -> bool {
        self.variants.contains(behavior)
    }

    /// Variant-set equality; pair sets are deliberately ignored.
    pub fn behavior_equal(&self, other: &BehaviorModel) -> bool {
        self.variants == other.variants
    }

    pub fn variants(&self) -> &BTreeSet<Vec<String>> {
        &self.variants
    }

    pub fn df_pairs(&self) -> &BTreeSet<(String, String)> {
        &self.df_pairs
    }

    /// Number of traces the model was discovered from.
    pub fn source_size(&self) -> usize {
        self.source_size
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eventlog::EventLog;
    use proptest::prelude::*;

    fn seqs(items: &[&[&str]]) -> Vec<Vec<String>> {
        items
            .iter()
            .map(|b| b.iter().map(|s| s.to_string()).collect())
            .collect()
    }

    fn model_of(items: &[&[&str]]) -> BehaviorModel {
        BehaviorModel::discover_behaviors(seqs(items)).unwrap()
    }

    #[test]
    fn uniform_window_discovers_single_variant() {
        let abcd: &[&str] = &["A", "B", "C", "D"];
        let m = model_of(&[abcd, abcd, abcd, abcd]);
        assert_eq!(m.variants().len(), 1);
        let pairs: Vec<(String, String)> = m.df_pairs().iter().cloned().collect();
        let expect = |a: &str, b: &str| (a.to_string(), b.to_string());
        assert_eq!(pairs, vec![expect("A", "B"), expect("B", "C"), expect("C", "D")]);
        assert_eq!(m.source_size(), 4);
    }

    #[test]
    fn mixed_window_discovers_both_variants_and_five_pairs() {
        let m = model_of(&[
            &["A", "B", "D", "C"],
            &["A", "B", "C", "D"],
            &["A", "B", "D", "C"],
            &["A", "B", "C", "D"],
        ]);
        assert_eq!(m.variants().len(), 2);
        assert_eq!(m.df_pairs().len(), 5);
        let has = |a: &str, b: &str| m.df_pairs().contains(&(a.to_string(), b.to_string()));
        assert!(has("A", "B") && has("B", "C") && has("C", "D") && has("B", "D") && has("D", "C"));
    }

    #[test]
    fn single_activity_trace_has_no_pairs() {
        let m = model_of(&[&["A"]]);
        assert_eq!(m.variants().len(), 1);
        assert!(m.df_pairs().is_empty());
    }

    #[test]
    fn empty_window_is_an_error() {
        assert!(matches!(
            BehaviorModel::discover(&[]),
            Err(Error::EmptyDiscovery)
        ));
    }

    #[test]
    fn supports_matches_variant_membership() {
        let abcd: &[&str] = &["A", "B", "C", "D"];
        let m = model_of(&[abcd]);
        let yes: Vec<String> = seqs(&[abcd]).pop().unwrap();
        let no: Vec<String> = seqs(&[&["A", "B", "D", "C"]]).pop().unwrap();
        assert!(m.supports(&yes));
        assert!(!m.supports(&no));
    }

    #[test]
    fn behavior_equality_ignores_pair_sets() {
        let variants: BTreeSet<Vec<String>> =
            seqs(&[&["A", "C", "B"]]).into_iter().collect();
        let a = BehaviorModel::from_parts(variants.clone(), BTreeSet::new(), 1);
        let pairs = [("A".to_string(), "C".to_string())].into_iter().collect();
        let b = BehaviorModel::from_parts(variants, pairs, 3);
        assert!(a.behavior_equal(&b));
        assert!(a.behavior_equal(&a));
    }

    #[test]
    fn models_from_different_variant_sets_are_unequal() {
        let n1 = model_of(&[&["A", "B", "C", "D"]]);
        let n2 = model_of(&[&["A", "B", "C", "D"], &["A", "B", "D", "C"]]);
        assert!(!n1.behavior_equal(&n2));
    }

    #[test]
    fn json_form_is_sorted_and_round_trips() {
        let m = model_of(&[&["B", "A"], &["A", "B"]]);
        let json = serde_json::to_string(&m).unwrap();
        assert_eq!(
            json,
            r#"{"variants":[["A","B"],["B","A"]],"df_pairs":[["A","B"],["B","A"]],"source_size":2}"#
        );
        let back: BehaviorModel = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
    }

    proptest! {
        #[test]
        fn discovery_is_order_insensitive(
            behaviors in proptest::collection::vec(
                proptest::collection::vec("[a-d]", 1..5),
                1..12,
            ),
            shift in 0usize..12,
        ) {
            let mut rotated = behaviors.clone();
            let k = shift % rotated.len();
            rotated.rotate_left(k);
            let a = BehaviorModel::discover_behaviors(behaviors).unwrap();
            let b = BehaviorModel::discover_behaviors(rotated).unwrap();
            prop_assert_eq!(a.variants(), b.variants());
            prop_assert_eq!(a.df_pairs(), b.df_pairs());
        }

        #[test]
        fn discovery_covers_its_window(
            behaviors in proptest::collection::vec(
                proptest::collection::vec("[a-d]", 1..5),
                1..12,
            ),
        ) {
            let log = EventLog::from_behaviors(behaviors.clone());
            let m = BehaviorModel::discover(&log.traces).unwrap();
            for trace in &log.traces {
                prop_assert!(m.supports(&trace.behavior()));
            }
            // every observed pair is in df_pairs, and every stored pair sits
            // inside some variant (discovery adds nothing it has not seen)
            for behavior in &behaviors {
                for w in behavior.windows(2) {
                    prop_assert!(m.df_pairs().contains(&(w[0].clone(), w[1].clone())));
                }
            }
            for pair in m.df_pairs() {
                let found = m.variants().iter().any(|v| {
                    v.windows(2).any(|w| w[0] == pair.0 && w[1] == pair.1)
                });
                prop_assert!(found);
            }
        }
    }
}
