//! Process trees: the generative models behind synthetic logs.
//!
//! A tree is sampled top down. Exclusive choices are uniform, parallel
//! blocks emit a uniformly random interleaving of their children, loops
//! repeat with probability 0.3 per extra round, and optional fragments are
//! skipped half the time.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Probability of running one more loop round.
const LOOP_REDO_PROB: f64 = 0.3;
/// Probability that an optional fragment executes.
const OPTIONAL_PROB: f64 = 0.5;

/// A block-structured process model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProcessTree {
    Activity {
        name: String,
    },
    Sequence {
        children: Vec<ProcessTree>,
    },
    Exclusive {
        children: Vec<ProcessTree>,
    },
    Parallel {
        children: Vec<ProcessTree>,
    },
    Loop {
        body: Box<ProcessTree>,
        #[serde(default)]
        redo: Option<Box<ProcessTree>>,
    },
    Optional {
        child: Box<ProcessTree>,
    },
}

impl ProcessTree {
    pub fn activity(name: impl Into<String>) -> ProcessTree {
        ProcessTree::Activity { name: name.into() }
    }

    pub fn sequence(children: Vec<ProcessTree>) -> ProcessTree {
        ProcessTree::Sequence { children }
    }

    pub fn exclusive(children: Vec<ProcessTree>) -> ProcessTree {
        ProcessTree::Exclusive { children }
    }

    pub fn parallel(children: Vec<ProcessTree>) -> ProcessTree {
        ProcessTree::Parallel { children }
    }

    pub fn loop_of(body: ProcessTree, redo: Option<ProcessTree>) -> ProcessTree {
        ProcessTree::Loop {
            body: Box::new(body),
            redo: redo.map(Box::new),
        }
    }

    pub fn optional(child: ProcessTree) -> ProcessTree {
        ProcessTree::Optional { child: Box::new(child) }
    }

    /// Structural soundness: containers need at least two children and
    /// activity names must be non-empty.
    pub fn validate(&self) -> Result<()> {
        match self {
            ProcessTree::Activity { name } => {
                if name.is_empty() {
                    return Err(Error::InvalidTree("empty activity name".into()));
                }
            }
            ProcessTree::Sequence { children }
            | ProcessTree::Exclusive { children }
            | ProcessTree::Parallel { children } => {
                if children.len() < 2 {
                    return Err(Error::InvalidTree(format!(
                        "container with {} child(ren); needs at least 2",
                        children.len()
                    )));
                }
                for c in children {
                    c.validate()?;
                }
            }
            ProcessTree::Loop { body, redo } => {
                body.validate()?;
                if let Some(r) = redo {
                    r.validate()?;
                }
            }
            ProcessTree::Optional { child } => child.validate()?,
        }
        Ok(())
    }

    /// Samples one trace behavior. May be empty if the whole tree is
    /// optional; the log generator retries in that case.
    pub fn sample(&self, rng: &mut impl Rng) -> Vec<String> {
        match self {
            ProcessTree::Activity { name } => vec![name.clone()],
            ProcessTree::Sequence { children } => {
                children.iter().flat_map(|c| c.sample(rng)).collect()
            }
            ProcessTree::Exclusive { children } => {
                children[rng.gen_range(0..children.len())].sample(rng)
            }
            ProcessTree::Parallel { children } => {
                let parts: Vec<Vec<String>> =
                    children.iter().map(|c| c.sample(rng)).collect();
                interleave(parts, rng)
            }
            ProcessTree::Loop { body, redo } => {
                let mut out = body.sample(rng);
                while rng.gen_bool(LOOP_REDO_PROB) {
                    if let Some(r) = redo {
                        out.extend(r.sample(rng));
                    }
                    out.extend(body.sample(rng));
                }
                out
            }
            ProcessTree::Optional { child } => {
                if rng.gen_bool(OPTIONAL_PROB) {
                    child.sample(rng)
                } else {
                    Vec::new()
                }
            }
        }
    }

    /// The variant set of the tree with loops unrolled at most once, capped
    /// at `cap` variants.
    ///
    /// Used to decide whether two trees describe observably different
    /// behavior; the single unrolling is enough because any loop round
    /// already changes the variant.
    pub fn variants_bounded(&self, cap: usize) -> BTreeSet<Vec<String>> {
        let set = match self {
            ProcessTree::Activity { name } => {
                BTreeSet::from([vec![name.clone()]])
            }
            ProcessTree::Sequence { children } => {
                let mut acc = BTreeSet::from([Vec::new()]);
                for c in children {
                    acc = concat_sets(&acc, &c.variants_bounded(cap), cap);
                }
                acc
            }
            ProcessTree::Exclusive { children } => {
                let mut acc = BTreeSet::new();
                for c in children {
                    acc.extend(c.variants_bounded(cap));
                }
                acc
            }
            ProcessTree::Parallel { children } => {
                let mut acc = BTreeSet::from([Vec::new()]);
                for c in children {
                    let mut next = BTreeSet::new();
                    for left in &acc {
                        for right in c.variants_bounded(cap) {
                            for merged in interleavings(left, &right, cap) {
                                next.insert(merged);
                                if next.len() >= cap {
                                    break;
                                }
                            }
                        }
                    }
                    acc = next;
                }
                acc
            }
            ProcessTree::Loop { body, redo } => {
                let once = body.variants_bounded(cap);
                let redo_set = redo
                    .as_ref()
                    .map(|r| r.variants_bounded(cap))
                    .unwrap_or_else(|| BTreeSet::from([Vec::new()]));
                let mut acc = once.clone();
                // one extra round: body (redo body)
                let with_redo = concat_sets(&once, &redo_set, cap);
                acc.extend(concat_sets(&with_redo, &once, cap));
                acc
            }
            ProcessTree::Optional { child } => {
                let mut acc = child.variants_bounded(cap);
                acc.insert(Vec::new());
                acc
            }
        };
        set.into_iter().take(cap).collect()
    }

    /// Removes single-child containers produced by edits.
    pub fn normalized(self) -> ProcessTree {
        match self {
            ProcessTree::Sequence { children } => {
                rebuild(children, ProcessTree::sequence)
            }
            ProcessTree::Exclusive { children } => {
                rebuild(children, ProcessTree::exclusive)
            }
            ProcessTree::Parallel { children } => {
                rebuild(children, ProcessTree::parallel)
            }
            ProcessTree::Loop { body, redo } => ProcessTree::Loop {
                body: Box::new(body.normalized()),
                redo: redo.map(|r| Box::new(r.normalized())),
            },
            ProcessTree::Optional { child } => {
                ProcessTree::optional(child.normalized())
            }
            leaf => leaf,
        }
    }

    /// All activity names in the tree, sorted.
    pub fn activity_names(&self) -> BTreeSet<String> {
        let mut names = BTreeSet::new();
        self.collect_names(&mut names);
        names
    }

    fn collect_names(&self, names: &mut BTreeSet<String>) {
        match self {
            ProcessTree::Activity { name } => {
                names.insert(name.clone());
            }
            ProcessTree::Sequence { children }
            | ProcessTree::Exclusive { children }
            | ProcessTree::Parallel { children } => {
                for c in children {
                    c.collect_names(names);
                }
            }
            ProcessTree::Loop { body, redo } => {
                body.collect_names(names);
                if let Some(r) = redo {
                    r.collect_names(names);
                }
            }
            ProcessTree::Optional { child } => child.collect_names(names),
        }
    }

    /// Built-in base model: a 19-activity loan handling process with one
    /// exclusive choice and one parallel block, giving four equally likely
    /// variants.
    pub fn loanlike() -> ProcessTree {
        use ProcessTree as T;
        T::sequence(vec![
            T::activity("Submit application"),
            T::activity("Open case file"),
            T::activity("Assign case worker"),
            T::activity("Validate documents"),
            T::activity("Check eligibility"),
            T::activity("Register application"),
            T::exclusive(vec![
                T::activity("Standard assessment"),
                T::activity("Fast-track assessment"),
            ]),
            T::activity("Request credit report"),
            T::parallel(vec![
                T::activity("Verify income"),
                T::activity("Verify collateral"),
            ]),
            T::activity("Schedule appraisal"),
            T::activity("Aggregate results"),
            T::activity("Compute risk score"),
            T::activity("Prepare decision"),
            T::activity("Review decision"),
            T::activity("Sign contract"),
            T::activity("Notify customer"),
            T::activity("Archive case"),
        ])
    }
}

fn rebuild(
    children: Vec<ProcessTree>,
    make: impl FnOnce(Vec<ProcessTree>) -> ProcessTree,
) -> ProcessTree {
    let mut normalized: Vec<ProcessTree> =
        children.into_iter().map(ProcessTree::normalized).collect();
    if normalized.len() == 1 {
        normalized.pop().unwrap()
    } else {
        make(normalized)
    }
}

/// Uniformly random interleaving of several sequences: at each step the
/// next source is chosen with probability proportional to its remaining
/// length, which makes every distinct merge order equally likely.
fn interleave(parts: Vec<Vec<String>>, rng: &mut impl Rng) -> Vec<String> {
    let total: usize = parts.iter().map(|p| p.len()).sum();
    let mut cursors = vec![0usize; parts.len()];
    let mut out = Vec::with_capacity(total);
    let mut remaining = total;
    while remaining > 0 {
        let mut pick = rng.gen_range(0..remaining);
        for (k, part) in parts.iter().enumerate() {
            let left = part.len() - cursors[k];
            if pick < left {
                out.push(part[cursors[k]].clone());
                cursors[k] += 1;
                break;
            }
            pick -= left;
        }
        remaining -= 1;
    }
    out
}

/// Cartesian concatenation of two variant sets, capped.
fn concat_sets(
    left: &BTreeSet<Vec<String>>,
    right: &BTreeSet<Vec<String>>,
    cap: usize,
) -> BTreeSet<Vec<String>> {
    let mut out = BTreeSet::new();
    for l in left {
        for r in right {
            let mut v = l.clone();
            v.extend(r.iter().cloned());
            out.insert(v);
            if out.len() >= cap {
                return out;
            }
        }
    }
    out
}

/// All interleavings of two sequences, capped.
fn interleavings(a: &[String], b: &[String], cap: usize) -> Vec<Vec<String>> {
    if a.is_empty() {
        return vec![b.to_vec()];
    }
    if b.is_empty() {
        return vec![a.to_vec()];
    }
    let mut out = Vec::new();
    for mut v in interleavings(&a[1..], b, cap) {
        v.insert(0, a[0].clone());
        out.push(v);
        if out.len() >= cap {
            return out;
        }
    }
    for mut v in interleavings(a, &b[1..], cap) {
        v.insert(0, b[0].clone());
        out.push(v);
        if out.len() >= cap {
            return out;
        }
    }
    out
}
