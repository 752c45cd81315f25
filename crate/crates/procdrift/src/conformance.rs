//! Window-level conformance metrics: fitness and precision of a trace
//! window against a behavior model.
//!
//! Both metrics are exact rationals. Fitness counts, with multiplicity, the
//! window traces whose behavior the model supports. Precision counts the
//! model pairs that the window actually exercises, so it reads as "how much
//! of the model does the window still use".

use std::collections::BTreeSet;

use crate::eventlog::Trace;
use crate::model::BehaviorModel;
use crate::{Error, Result};

/// An exact metric value `numerator / denominator`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MetricValue {
    pub numerator: u64,
    pub denominator: u64,
}

impl MetricValue {
    /// The metric as a float. A zero denominator only arises for precision
    /// against a model with no pairs, which is vacuously 1.
    pub fn value(&self) -> f64 {
        if self.denominator == 0 {
            1.0
        } else {
            self.numerator as f64 / self.denominator as f64
        }
    }
}

/// Fraction of window traces, with multiplicity, whose behavior the model
/// supports.
pub fn fitness(window: &[Trace], model: &BehaviorModel) -> Result<MetricValue> {
    if window.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let supported = window
        .iter()
        .filter(|t| model.supports(&t.behavior()))
        .count();
    Ok(MetricValue {
        numerator: supported as u64,
        denominator: window.len() as u64,
    })
}

/// Fraction of the model's directly-follows pairs observed in the window.
pub fn precision(window: &[Trace], model: &BehaviorModel) -> Result<MetricValue> {
    if window.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let mut observed: BTreeSet<(&str, &str)> = BTreeSet::new();
    for trace in window {
        let mut prev: Option<&str> = None;
        for activity in trace.activities() {
            if let Some(p) = prev {
                observed.insert((p, activity));
            }
            prev = Some(activity);
        }
    }
    let used = model
        .df_pairs()
        .iter()
        .filter(|(a, b)| observed.contains(&(a.as_str(), b.as_str())))
        .count();
    Ok(MetricValue {
        numerator: used as u64,
        denominator: model.df_pairs().len() as u64,
    })
}
