//! Scoring of detected drift regions against ground truth.
//!
//! Regions are half-open trace intervals `[start, end)`. Matching is
//! chronological: each detected region is matched to the earliest real
//! region that is still unmatched and overlaps it, where a region is
//! widened to at least one trace so an instantaneous drift can still
//! intersect its detection. Matched pairs are scored by detection delay
//! (distance between the start indices) and overlap ratio; unmatched
//! detections count as false positives and unmatched real regions as
//! false negatives.

/// One matched real/detected pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchRecord {
    pub real: (usize, usize),
    pub detected: (usize, usize),
    /// Absolute distance between the region starts, in traces.
    pub delay: usize,
    /// Intersection length over real-region length, in `[0, 1]`.
    pub overlap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
    pub per_match: Vec<MatchRecord>,
}

impl EvalResult {
    /// Mean detection delay over matched pairs, `None` without matches.
    pub fn mean_delay(&self) -> Option<f64> {
        if self.per_match.is_empty() {
            return None;
        }
        let total: usize = self.per_match.iter().map(|m| m.delay).sum();
        Some(total as f64 / self.per_match.len() as f64)
    }

    /// Mean overlap ratio over matched pairs, `None` without matches.
    pub fn mean_overlap(&self) -> Option<f64> {
        if self.per_match.is_empty() {
            return None;
        }
        let total: f64 = self.per_match.iter().map(|m| m.overlap).sum();
        Some(total / self.per_match.len() as f64)
    }
}

/// Treats an interval as at least one trace wide for intersection tests.
fn effective(region: (usize, usize)) -> (usize, usize) {
    (region.0, region.1.max(region.0 + 1))
}

fn intersects(a: (usize, usize), b: (usize, usize)) -> bool {
    let a = effective(a);
    let b = effective(b);
    a.0 < b.1 && b.0 < a.1
}

/// Intersection length over real length; degenerate real regions score 1
/// when the starts coincide and 0 otherwise.
fn overlap_ratio(real: (usize, usize), detected: (usize, usize)) -> f64 {
    let width = real.1.saturating_sub(real.0);
    if width == 0 {
        return if detected.0 == real.0 { 1.0 } else { 0.0 };
    }
    let lo = real.0.max(detected.0);
    let hi = real.1.min(detected.1);
    hi.saturating_sub(lo) as f64 / width as f64
}

/// Scores detected regions against real ones.
pub fn score(real: &[(usize, usize)], detected: &[(usize, usize)]) -> EvalResult {
    let mut real: Vec<(usize, usize)> = real.to_vec();
    real.sort_unstable();
    let mut detected: Vec<(usize, usize)> = detected.to_vec();
    detected.sort_unstable();

    let mut matched = vec![false; real.len()];
    let mut per_match = Vec::new();
    let mut false_positives = 0usize;
    for &d in &detected {
        let hit = real
            .iter()
            .enumerate()
            .find(|&(k, &r)| !matched[k] && intersects(r, d));
        match hit {
            Some((k, &r)) => {
                matched[k] = true;
                per_match.push(MatchRecord {
                    real: r,
                    detected: d,
                    delay: r.0.abs_diff(d.0),
                    overlap: overlap_ratio(r, d),
                });
            }
            None => false_positives += 1,
        }
    }
    let true_positives = per_match.len();
    let false_negatives = real.len() - true_positives;

    let precision = ratio(true_positives, true_positives + false_positives);
    let recall = ratio(true_positives, true_positives + false_negatives);
    let f_score = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    EvalResult {
        true_positives,
        false_positives,
        false_negatives,
        precision,
        recall,
        f_score,
        per_match,
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}
