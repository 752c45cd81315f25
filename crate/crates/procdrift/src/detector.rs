//! Sliding-window drift detection over an event log.
//!
//! The detector keeps a model of recent behavior and walks the log one
//! trace at a time, scoring each window by fitness and precision. A
//! regression over the latest metric values flags drift candidates; a run
//! of flagged windows confirms a drift, which is pinpointed to a trace,
//! classified as sudden or gradual, and followed by a fresh model
//! discovered from the confirming window.
//!
//! Fitness reacts when new behavior arrives, precision when old behavior
//! leaves, so a gradual handover is confirmed twice: once entering and once
//! leaving the change region. The classifier merges that pair into one
//! gradual drift.

use std::collections::HashMap;
use std::io::Write;

use crate::conformance::MetricValue;
use crate::eventlog::{EventLog, Trace};
use crate::model::BehaviorModel;
use crate::stats;
use crate::{Error, Result};

/// How the window is sized at the start of each detection cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WindowGrowth {
    /// Grow by doubling while three consecutive windows behave identically.
    #[default]
    Double,
    /// Always use `min_window`.
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    /// Smallest (and under `Fixed` growth, only) window size.
    pub min_window: usize,
    /// Two-sided p-value threshold for the slope test.
    pub significance: f64,
    pub growth: WindowGrowth,
}

impl Default for DetectorConfig {
    fn default() -> DetectorConfig {
        DetectorConfig {
            min_window: 50,
            significance: 0.05,
            growth: WindowGrowth::Double,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_window < 2 {
            return Err(Error::InvalidConfig(
                "min_window must be at least 2".into(),
            ));
        }
        if !(self.significance > 0.0 && self.significance < 1.0) {
            return Err(Error::InvalidConfig(
                "significance must be strictly between 0 and 1".into(),
            ));
        }
        Ok(())
    }
}

/// Which metric confirmed a drift.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriftSignal {
    Fitness,
    Precision,
}

/// A window of traces, identified by the index of its newest trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowRef {
    /// Trace index of the newest trace in the window.
    pub end: usize,
    /// Nominal window size; the window is clamped at the log start.
    pub size: usize,
}

impl WindowRef {
    /// Trace index of the oldest trace in the window.
    pub fn start(&self) -> usize {
        (self.end + 1).saturating_sub(self.size)
    }
}

/// Per-window measurement emitted by the detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRow {
    /// Trace index of the window end.
    pub index: usize,
    /// Nominal window size in this cycle.
    pub window_size: usize,
    pub fitness: MetricValue,
    pub precision: MetricValue,
    pub cand_fitness: bool,
    pub cand_precision: bool,
    /// Position in the model history of the model scored here.
    pub model_id: usize,
}

/// Everything the detector found in one pass.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DriftReport {
    /// Trace indices of sudden drifts.
    pub sudden: Vec<usize>,
    /// Gradual drifts as half-open trace intervals `[start, end)`.
    pub gradual: Vec<(usize, usize)>,
    pub diagnostics: Vec<DiagnosticsRow>,
    /// Trace range each model in the history was discovered from.
    pub model_windows: Vec<(usize, usize)>,
}

impl DriftReport {
    /// All drifts as half-open intervals in chronological order; a sudden
    /// drift at `p` becomes `[p, p+1)`.
    pub fn detections(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self
            .sudden
            .iter()
            .map(|&p| (p, p + 1))
            .chain(self.gradual.iter().copied())
            .collect();
        out.sort_unstable();
        out
    }

    /// Writes the per-window diagnostics as CSV.
    pub fn write_diagnostics_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "index,window_size,fitness_num,fitness_den,precision_num,\
             precision_den,cand_fitness,cand_precision,model_id"
        )?;
        for row in &self.diagnostics {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                row.index,
                row.window_size,
                row.fitness.numerator,
                row.fitness.denominator,
                row.precision.numerator,
                row.precision.denominator,
                row.cand_fitness,
                row.cand_precision,
                row.model_id,
            )?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Window size for a trace list: starts at `min_window` and doubles while
/// the first three disjoint windows of that size hold identical behavior
/// sets and three doubled windows still fit.
///
/// Hands back `min_window` untouched when it is below 2 or the list is
/// shorter than three minimal windows.
pub fn adjust_window(min_window: usize, traces: &[Trace]) -> usize {
    let mut ids = HashMap::new();
    let behavior_ids: Vec<u32> = traces
        .iter()
        .map(|t| {
            let next = ids.len() as u32;
            *ids.entry(t.behavior()).or_insert(next)
        })
        .collect();
    adjust_window_ids(min_window, &behavior_ids)
}

fn adjust_window_ids(min_window: usize, behavior_ids: &[u32]) -> usize {
    if min_window < 2 {
        return min_window;
    }
    let len = behavior_ids.len();
    if len < 3 * min_window {
        return min_window;
    }
    let mut n = min_window;
    loop {
        if !equal_thirds(behavior_ids, n) {
            return n;
        }
        if 3 * (2 * n) <= len {
            n *= 2;
        } else {
            return n;
        }
    }
}

/// True when the first three disjoint `n`-windows have equal behavior sets.
fn equal_thirds(behavior_ids: &[u32], n: usize) -> bool {
    let set = |lo: usize| -> std::collections::BTreeSet<u32> {
        behavior_ids[lo..lo + n].iter().copied().collect()
    };
    let first = set(0);
    first == set(n) && first == set(2 * n)
}

/// Flags the newest window as a drift candidate.
///
/// Regresses the last `n + 1` metric values against time. A significant
/// decline or incline starts a candidate run; an insignificant slope
/// continues a run that is already open, so a confirmed-in-progress drift
/// is not dropped while the metric plateaus.
pub fn identify_drift_candidate(
    n: usize,
    series: &[f64],
    flags: &[bool],
    significance: f64,
) -> bool {
    if series.len() <= n {
        return false;
    }
    let continuing = flags.last().copied().unwrap_or(false);
    let tail = &series[series.len() - (n + 1)..];
    let Ok(reg) = stats::regress(tail) else {
        return continuing;
    };
    let declining = reg.slope < 0.0 && reg.p_value < significance;
    let inclining = reg.slope > 0.0 && reg.p_value < significance;
    declining || inclining || continuing
}

/// A drift is confirmed once the last `n` windows were all candidates.
pub fn confirm_drift(n: usize, flags: &[bool]) -> bool {
    flags.len() >= n && flags[flags.len() - n..].iter().all(|&b| b)
}

/// Trace the drift is attributed to, given the first window of the
/// confirmed candidate run.
///
/// Fitness reacts to new behavior entering the window, so the newest trace
/// of that window is the drift point; precision reacts to old behavior
/// having left, which the oldest trace witnessed first.
pub fn pinpoint(signal: DriftSignal, first_run_window: WindowRef) -> usize {
    match signal {
        DriftSignal::Fitness => first_run_window.end,
        DriftSignal::Precision => first_run_window.start(),
    }
}

/// Sorts the confirmed drift at `tau_star` into the report.
///
/// The drift is gradual when the sublog since the previous drift mixes
/// behavior of the model before that drift with behavior of the newest
/// model, and nothing else: then the previous sudden drift at `tau_prime`
/// and this confirmation are two sides of one handover and merge into the
/// gradual interval `[tau_prime, tau_star)`. Everything else is sudden.
pub fn classify_drift(
    models: &[BehaviorModel],
    sublog: &[Trace],
    tau_prime: Option<usize>,
    tau_star: usize,
    report: &mut DriftReport,
) {
    let gradual = models.len() > 2 && !sublog.is_empty() && {
        let older = &models[models.len() - 3];
        let newest = &models[models.len() - 1];
        let behaviors: Vec<Vec<String>> =
            sublog.iter().map(|t| t.behavior()).collect();
        behaviors.iter().any(|b| older.supports(b))
            && behaviors.iter().any(|b| newest.supports(b))
            && behaviors
                .iter()
                .all(|b| older.supports(b) || newest.supports(b))
    };
    match tau_prime {
        Some(tp) if gradual && report.sudden.last() == Some(&tp) => {
            report.sudden.pop();
            report.gradual.push((tp, tau_star));
        }
        _ => report.sudden.push(tau_star),
    }
}

/// Runs the full detection pass over a log.
pub fn detect(log: &EventLog, config: &DetectorConfig) -> Result<DriftReport> {
    config.validate()?;
    let total = log.len();
    if total < config.min_window {
        return Err(Error::LogTooShort { len: total, min: config.min_window });
    }
    let prep = PreparedLog::build(log);
    let mut report = DriftReport::default();
    let mut models: Vec<BehaviorModel> = Vec::new();
    let mut interned: Vec<InternedModel> = Vec::new();

    let mut n = cycle_window(config, &prep, 0);
    push_model(log, &prep, 0, n, &mut models, &mut interned, &mut report)?;

    let mut gamma: Vec<f64> = Vec::new();
    let mut rho: Vec<f64> = Vec::new();
    let mut flags_fitness: Vec<bool> = Vec::new();
    let mut flags_precision: Vec<bool> = Vec::new();
    let mut run_fitness: Option<WindowRef> = None;
    let mut run_precision: Option<WindowRef> = None;
    let mut tau_prime: Option<usize> = None;
    let mut scratch = PairScratch::new(prep.pair_count);

    // the first scored window is the discovery window itself
    let mut i = n - 1;
    while i < total {
        let lo = (i + 1).saturating_sub(n);
        let model = interned.last().expect("model history is never empty");
        let fitness = window_fitness(&prep, model, lo, i + 1);
        let precision = window_precision(&prep, model, lo, i + 1, &mut scratch);
        gamma.push(fitness.value());
        rho.push(precision.value());
        let cand_fitness =
            identify_drift_candidate(n, &gamma, &flags_fitness, config.significance);
        let cand_precision = identify_drift_candidate(
            n,
            &rho,
            &flags_precision,
            config.significance,
        );
        flags_fitness.push(cand_fitness);
        flags_precision.push(cand_precision);
        if cand_fitness {
            run_fitness.get_or_insert(WindowRef { end: i, size: n });
        } else {
            run_fitness = None;
        }
        if cand_precision {
            run_precision.get_or_insert(WindowRef { end: i, size: n });
        } else {
            run_precision = None;
        }
        report.diagnostics.push(DiagnosticsRow {
            index: i,
            window_size: n,
            fitness,
            precision,
            cand_fitness,
            cand_precision,
            model_id: models.len() - 1,
        });

        let confirmed_fitness = confirm_drift(n, &flags_fitness);
        let confirmed_precision = confirm_drift(n, &flags_precision);
        if confirmed_fitness || confirmed_precision {
            // fitness wins when both confirm on the same window
            let (signal, first) = if confirmed_fitness {
                (DriftSignal::Fitness, run_fitness.expect("open run"))
            } else {
                (DriftSignal::Precision, run_precision.expect("open run"))
            };
            let tau_star = pinpoint(signal, first);
            let sub_start = tau_prime.map_or(0, |t| t + 1);
            let sublog: &[Trace] = if sub_start <= tau_star {
                &log.traces[sub_start..=tau_star]
            } else {
                &[]
            };
            // next cycle's model comes from the confirming window
            push_model(log, &prep, lo, i + 1, &mut models, &mut interned, &mut report)?;
            classify_drift(&models, sublog, tau_prime, tau_star, &mut report);
            tau_prime = Some(tau_star);
            n = cycle_window(config, &prep, i + 1);
            gamma.clear();
            rho.clear();
            flags_fitness.clear();
            flags_precision.clear();
            run_fitness = None;
            run_precision = None;
        }
        i += 1;
    }
    Ok(report)
}

fn cycle_window(config: &DetectorConfig, prep: &PreparedLog, from: usize) -> usize {
    match config.growth {
        WindowGrowth::Fixed => config.min_window,
        WindowGrowth::Double => {
            adjust_window_ids(config.min_window, &prep.behavior_ids[from..])
        }
    }
}

fn push_model(
    log: &EventLog,
    prep: &PreparedLog,
    lo: usize,
    hi: usize,
    models: &mut Vec<BehaviorModel>,
    interned: &mut Vec<InternedModel>,
    report: &mut DriftReport,
) -> Result<()> {
    models.push(BehaviorModel::discover(&log.traces[lo..hi])?);
    interned.push(InternedModel::from_window(prep, lo, hi));
    report.model_windows.push((lo, hi));
    Ok(())
}

/// The log with behaviors and directly-follows pairs interned to ids, so
/// the per-window metric recomputation stays cheap.
struct PreparedLog {
    behavior_ids: Vec<u32>,
    /// Sorted, deduplicated pair ids per trace.
    trace_pairs: Vec<Vec<u32>>,
    behavior_count: usize,
    pair_count: usize,
}

impl PreparedLog {
    fn build(log: &EventLog) -> PreparedLog {
        let mut behavior_map: HashMap<Vec<String>, u32> = HashMap::new();
        let mut pair_map: HashMap<(String, String), u32> = HashMap::new();
        let mut behavior_ids = Vec::with_capacity(log.len());
        let mut trace_pairs = Vec::with_capacity(log.len());
        for trace in &log.traces {
            let behavior = trace.behavior();
            let mut pairs: Vec<u32> = behavior
                .windows(2)
                .map(|w| {
                    let next = pair_map.len() as u32;
                    *pair_map
                        .entry((w[0].clone(), w[1].clone()))
                        .or_insert(next)
                })
                .collect();
            pairs.sort_unstable();
            pairs.dedup();
            trace_pairs.push(pairs);
            let next = behavior_map.len() as u32;
            behavior_ids.push(*behavior_map.entry(behavior).or_insert(next));
        }
        PreparedLog {
            behavior_ids,
            trace_pairs,
            behavior_count: behavior_map.len(),
            pair_count: pair_map.len(),
        }
    }
}

/// A model over interned ids, equivalent to the `BehaviorModel` discovered
/// from the same window.
struct InternedModel {
    /// Indexed by behavior id.
    supported: Vec<bool>,
    /// Sorted pair ids.
    pairs: Vec<u32>,
}

impl InternedModel {
    fn from_window(prep: &PreparedLog, lo: usize, hi: usize) -> InternedModel {
        let mut supported = vec![false; prep.behavior_count];
        let mut pairs: Vec<u32> = Vec::new();
        for t in lo..hi {
            supported[prep.behavior_ids[t] as usize] = true;
            pairs.extend_from_slice(&prep.trace_pairs[t]);
        }
        pairs.sort_unstable();
        pairs.dedup();
        InternedModel { supported, pairs }
    }
}

/// Reusable observed-pair bitmap.
struct PairScratch {
    seen: Vec<bool>,
    touched: Vec<u32>,
}

impl PairScratch {
    fn new(pair_count: usize) -> PairScratch {
        PairScratch { seen: vec![false; pair_count], touched: Vec::new() }
    }
}

fn window_fitness(
    prep: &PreparedLog,
    model: &InternedModel,
    lo: usize,
    hi: usize,
) -> MetricValue {
    let supported = prep.behavior_ids[lo..hi]
        .iter()
        .filter(|&&id| model.supported[id as usize])
        .count();
    MetricValue {
        numerator: supported as u64,
        denominator: (hi - lo) as u64,
    }
}

fn window_precision(
    prep: &PreparedLog,
    model: &InternedModel,
    lo: usize,
    hi: usize,
    scratch: &mut PairScratch,
) -> MetricValue {
    for t in lo..hi {
        for &p in &prep.trace_pairs[t] {
            if !scratch.seen[p as usize] {
                scratch.seen[p as usize] = true;
                scratch.touched.push(p);
            }
        }
    }
    let used = model
        .pairs
        .iter()
        .filter(|&&p| scratch.seen[p as usize])
        .count();
    for p in scratch.touched.drain(..) {
        scratch.seen[p as usize] = false;
    }
    MetricValue {
        numerator: used as u64,
        denominator: model.pairs.len() as u64,
    }
}
