//! Structural change patterns applied to process trees to derive drifted
//! models.
//!
//! A pattern enumerates every eligible edit site in deterministic preorder,
//! picks a seeded starting site, and walks the list cyclically until an edit
//! actually changes the tree's variant set. Composite patterns chain simple
//! ones on the same random stream.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use super::tree::ProcessTree;
use crate::{Error, Result};

/// Cap for variant-set comparisons; far above any tree used here.
const VARIANT_CAP: usize = 10_000;

/// Supported control-flow change patterns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChangePattern {
    /// Duplicate a fragment.
    Cp,
    /// Move a fragment into or out of a parallel block.
    Pm,
    /// Insert or remove a fragment.
    Re,
    /// Replace an activity with a fresh one.
    Rp,
    /// Swap two fragments of a sequence.
    Sw,
    /// Make two sequential fragments exclusive, or flatten an exclusive
    /// choice back into a sequence.
    Cf,
    /// Make a fragment skippable, or mandatory again.
    Cb,
    /// Make a fragment loopable, or unroll a loop.
    Lp,
    /// Force an order between two parallel fragments.
    Cd,
    /// Put two sequential fragments in parallel.
    Pl,
    /// Composite: lp, then re, then cd.
    Oir,
    /// Composite: lp, then pl, then re.
    Ori,
    /// Composite: cf, then cp, then cb.
    Rio,
    /// Composite: pl, then lp, then rp.
    Roi,
}

impl ChangePattern {
    /// The ten patterns benchmarked against every drift distribution.
    pub const BENCH: [ChangePattern; 10] = [
        ChangePattern::Cp,
        ChangePattern::Pm,
        ChangePattern::Re,
        ChangePattern::Rp,
        ChangePattern::Sw,
        ChangePattern::Cf,
        ChangePattern::Oir,
        ChangePattern::Ori,
        ChangePattern::Rio,
        ChangePattern::Roi,
    ];

    /// Simple steps the pattern expands to, in application order.
    pub fn steps(self) -> Vec<ChangePattern> {
        use ChangePattern::*;
        match self {
            Oir => vec![Lp, Re, Cd],
            Ori => vec![Lp, Pl, Re],
            Rio => vec![Cf, Cp, Cb],
            Roi => vec![Pl, Lp, Rp],
            simple => vec![simple],
        }
    }

    pub fn code(self) -> &'static str {
        use ChangePattern::*;
        match self {
            Cp => "cp",
            Pm => "pm",
            Re => "re",
            Rp => "rp",
            Sw => "sw",
            Cf => "cf",
            Cb => "cb",
            Lp => "lp",
            Cd => "cd",
            Pl => "pl",
            Oir => "OIR",
            Ori => "ORI",
            Rio => "RIO",
            Roi => "ROI",
        }
    }
}

impl fmt::Display for ChangePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for ChangePattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<ChangePattern> {
        use ChangePattern::*;
        Ok(match s.to_ascii_lowercase().as_str() {
            "cp" => Cp,
            "pm" => Pm,
            "re" => Re,
            "rp" => Rp,
            "sw" => Sw,
            "cf" => Cf,
            "cb" => Cb,
            "lp" => Lp,
            "cd" => Cd,
            "pl" => Pl,
            "oir" => Oir,
            "ori" => Ori,
            "rio" => Rio,
            "roi" => Roi,
            other => {
                return Err(Error::InvalidConfig(format!(
                    "unknown change pattern '{other}'"
                )))
            }
        })
    }
}

/// Applies a pattern, returning a tree whose variant set differs from the
/// input's. Composites apply their steps sequentially on the same stream.
pub fn apply_pattern(
    tree: &ProcessTree,
    pattern: ChangePattern,
    rng: &mut impl Rng,
) -> Result<ProcessTree> {
    let mut current = tree.clone();
    for step in pattern.steps() {
        current = apply_simple(&current, step, rng)?;
    }
    Ok(current)
}

/// One eligible edit location.
#[derive(Debug, Clone)]
enum Site {
    /// cp: duplicate child `child` of the sequence at `seq`.
    Duplicate { seq: Vec<usize>, child: usize },
    /// pm: move child `child` of the sequence into its parallel sibling.
    MoveIntoParallel { seq: Vec<usize>, child: usize, par: usize },
    /// pm: move member `member` of the parallel child `par` out, after it.
    MoveOutOfParallel { seq: Vec<usize>, par: usize, member: usize },
    /// re: insert a fresh activity at an interior position of a sequence.
    Insert { seq: Vec<usize>, position: usize },
    /// re: delete an activity child of a sequence.
    Remove { seq: Vec<usize>, child: usize },
    /// rp: rename the activity at `leaf` to a fresh name.
    Substitute { leaf: Vec<usize> },
    /// sw: exchange children `a` and `b` of a sequence.
    Swap { seq: Vec<usize>, a: usize, b: usize },
    /// cf: fuse adjacent children `first`, `first+1` into an exclusive choice.
    Conditionalize { seq: Vec<usize>, first: usize },
    /// cf: splice a two-way exclusive child back into the sequence.
    Sequentialize { seq: Vec<usize>, child: usize },
    /// cb: wrap a sequence child into an optional.
    WrapOptional { seq: Vec<usize>, child: usize },
    /// cb: unwrap the optional at `path`.
    UnwrapOptional { path: Vec<usize> },
    /// lp: wrap a sequence child into a loop.
    WrapLoop { seq: Vec<usize>, child: usize },
    /// lp: unwrap the loop at `path`.
    UnwrapLoop { path: Vec<usize> },
    /// cd: force an order between members `a` and `b` of a parallel block.
    Synchronize { par: Vec<usize>, a: usize, b: usize },
    /// pl: put adjacent children `first`, `first+1` in parallel.
    Parallelize { seq: Vec<usize>, first: usize },
}

fn apply_simple(
    tree: &ProcessTree,
    pattern: ChangePattern,
    rng: &mut impl Rng,
) -> Result<ProcessTree> {
    let sites = enumerate_sites(tree, pattern);
    if sites.is_empty() {
        return Err(Error::NoEligibleFragment(format!(
            "pattern {pattern} has no eligible fragment"
        )));
    }
    let before = tree.variants_bounded(VARIANT_CAP);
    let start = rng.gen_range(0..sites.len());
    for offset in 0..sites.len() {
        let site = &sites[(start + offset) % sites.len()];
        let candidate = apply_site(tree, site).normalized();
        if candidate.variants_bounded(VARIANT_CAP) != before {
            candidate.validate()?;
            return Ok(candidate);
        }
    }
    Err(Error::NoEligibleFragment(format!(
        "pattern {pattern}: every eligible edit left the variant set unchanged"
    )))
}

/// Walks the tree in preorder, handing each node and its path to `visit`.
fn walk(
    node: &ProcessTree,
    path: &mut Vec<usize>,
    visit: &mut impl FnMut(&ProcessTree, &[usize]),
) {
    visit(node, path);
    match node {
        ProcessTree::Activity { .. } => {}
        ProcessTree::Sequence { children }
        | ProcessTree::Exclusive { children }
        | ProcessTree::Parallel { children } => {
            for (i, c) in children.iter().enumerate() {
                path.push(i);
                walk(c, path, visit);
                path.pop();
            }
        }
        ProcessTree::Loop { body, redo } => {
            path.push(0);
            walk(body, path, visit);
            path.pop();
            if let Some(r) = redo {
                path.push(1);
                walk(r, path, visit);
                path.pop();
            }
        }
        ProcessTree::Optional { child } => {
            path.push(0);
            walk(child, path, visit);
            path.pop();
        }
    }
}

fn enumerate_sites(tree: &ProcessTree, pattern: ChangePattern) -> Vec<Site> {
    let mut sites = Vec::new();
    let mut path = Vec::new();
    walk(tree, &mut path, &mut |node, at| {
        collect_sites(node, at, pattern, &mut sites)
    });
    sites
}

fn collect_sites(
    node: &ProcessTree,
    at: &[usize],
    pattern: ChangePattern,
    sites: &mut Vec<Site>,
) {
    use ChangePattern::*;
    match (pattern, node) {
        (Cp, ProcessTree::Sequence { children }) => {
            for child in 0..children.len() {
                sites.push(Site::Duplicate { seq: at.to_vec(), child });
            }
        }
        (Pm, ProcessTree::Sequence { children }) => {
            for (par, c) in children.iter().enumerate() {
                let ProcessTree::Parallel { children: members } = c else {
                    continue;
                };
                for child in 0..children.len() {
                    if child != par {
                        sites.push(Site::MoveIntoParallel {
                            seq: at.to_vec(),
                            child,
                            par,
                        });
                    }
                }
                for member in 0..members.len() {
                    sites.push(Site::MoveOutOfParallel {
                        seq: at.to_vec(),
                        par,
                        member,
                    });
                }
            }
        }
        (Re, ProcessTree::Sequence { children }) => {
            // insertion is interior only, so one directly-follows pair of
            // the old model always disappears
            for position in 1..children.len() {
                sites.push(Site::Insert { seq: at.to_vec(), position });
            }
            for (child, c) in children.iter().enumerate() {
                if matches!(c, ProcessTree::Activity { .. }) {
                    sites.push(Site::Remove { seq: at.to_vec(), child });
                }
            }
        }
        (Rp, ProcessTree::Activity { .. }) => {
            sites.push(Site::Substitute { leaf: at.to_vec() });
        }
        (Sw, ProcessTree::Sequence { children }) => {
            for a in 0..children.len() {
                for b in (a + 1)..children.len() {
                    sites.push(Site::Swap { seq: at.to_vec(), a, b });
                }
            }
        }
        (Cf, ProcessTree::Sequence { children }) => {
            for first in 0..children.len().saturating_sub(1) {
                sites.push(Site::Conditionalize { seq: at.to_vec(), first });
            }
            for (child, c) in children.iter().enumerate() {
                if matches!(c, ProcessTree::Exclusive { children: x } if x.len() == 2)
                {
                    sites.push(Site::Sequentialize { seq: at.to_vec(), child });
                }
            }
        }
        (Cb, ProcessTree::Sequence { children }) => {
            for (child, c) in children.iter().enumerate() {
                if !matches!(c, ProcessTree::Optional { .. }) {
                    sites.push(Site::WrapOptional { seq: at.to_vec(), child });
                }
            }
        }
        (Cb, ProcessTree::Optional { .. }) => {
            sites.push(Site::UnwrapOptional { path: at.to_vec() });
        }
        (Lp, ProcessTree::Sequence { children }) => {
            for (child, c) in children.iter().enumerate() {
                if !matches!(c, ProcessTree::Loop { .. }) {
                    sites.push(Site::WrapLoop { seq: at.to_vec(), child });
                }
            }
        }
        (Lp, ProcessTree::Loop { .. }) => {
            sites.push(Site::UnwrapLoop { path: at.to_vec() });
        }
        (Cd, ProcessTree::Parallel { children }) => {
            for a in 0..children.len() {
                for b in (a + 1)..children.len() {
                    sites.push(Site::Synchronize { par: at.to_vec(), a, b });
                }
            }
        }
        (Pl, ProcessTree::Sequence { children }) => {
            for first in 0..children.len().saturating_sub(1) {
                sites.push(Site::Parallelize { seq: at.to_vec(), first });
            }
        }
        _ => {}
    }
}

fn node_at_mut<'a>(
    mut node: &'a mut ProcessTree,
    path: &[usize],
) -> &'a mut ProcessTree {
    for &step in path {
        node = match node {
            ProcessTree::Sequence { children }
            | ProcessTree::Exclusive { children }
            | ProcessTree::Parallel { children } => &mut children[step],
            ProcessTree::Loop { body, redo } => {
                if step == 0 {
                    body.as_mut()
                } else {
                    redo.as_mut().expect("redo path").as_mut()
                }
            }
            ProcessTree::Optional { child } => child.as_mut(),
            ProcessTree::Activity { .. } => unreachable!("path into a leaf"),
        };
    }
    node
}

fn seq_children_mut<'a>(
    tree: &'a mut ProcessTree,
    path: &[usize],
) -> &'a mut Vec<ProcessTree> {
    match node_at_mut(tree, path) {
        ProcessTree::Sequence { children } => children,
        _ => unreachable!("site path is not a sequence"),
    }
}

/// First name of the form "New activity k" unused in the tree.
fn fresh_name(tree: &ProcessTree) -> String {
    let taken = tree.activity_names();
    (1..)
        .map(|k| format!("New activity {k}"))
        .find(|name| !taken.contains(name))
        .expect("unbounded name space")
}

fn apply_site(tree: &ProcessTree, site: &Site) -> ProcessTree {
    let mut out = tree.clone();
    match site {
        Site::Duplicate { seq, child } => {
            let children = seq_children_mut(&mut out, seq);
            let copy = children[*child].clone();
            children.insert(child + 1, copy);
        }
        Site::MoveIntoParallel { seq, child, par } => {
            let children = seq_children_mut(&mut out, seq);
            let moved = children.remove(*child);
            let par = if *child < *par { par - 1 } else { *par };
            match &mut children[par] {
                ProcessTree::Parallel { children: members } => members.push(moved),
                _ => unreachable!("pm target is not parallel"),
            }
        }
        Site::MoveOutOfParallel { seq, par, member } => {
            let children = seq_children_mut(&mut out, seq);
            let moved = match &mut children[*par] {
                ProcessTree::Parallel { children: members } => members.remove(*member),
                _ => unreachable!("pm source is not parallel"),
            };
            children.insert(par + 1, moved);
        }
        Site::Insert { seq, position } => {
            let name = fresh_name(tree);
            let children = seq_children_mut(&mut out, seq);
            children.insert(*position, ProcessTree::activity(name));
        }
        Site::Remove { seq, child } => {
            let children = seq_children_mut(&mut out, seq);
            children.remove(*child);
        }
        Site::Substitute { leaf } => {
            let name = fresh_name(tree);
            match node_at_mut(&mut out, leaf) {
                ProcessTree::Activity { name: n } => *n = name,
                _ => unreachable!("rp site is not an activity"),
            }
        }
        Site::Swap { seq, a, b } => {
            seq_children_mut(&mut out, seq).swap(*a, *b);
        }
        Site::Conditionalize { seq, first } => {
            let children = seq_children_mut(&mut out, seq);
            let right = children.remove(first + 1);
            let left = children.remove(*first);
            children.insert(*first, ProcessTree::exclusive(vec![left, right]));
        }
        Site::Sequentialize { seq, child } => {
            let children = seq_children_mut(&mut out, seq);
            let branches = match children.remove(*child) {
                ProcessTree::Exclusive { children: b } => b,
                _ => unreachable!("cf site is not exclusive"),
            };
            for (offset, branch) in branches.into_iter().enumerate() {
                children.insert(child + offset, branch);
            }
        }
        Site::WrapOptional { seq, child } => {
            let children = seq_children_mut(&mut out, seq);
            let inner = children.remove(*child);
            children.insert(*child, ProcessTree::optional(inner));
        }
        Site::UnwrapOptional { path } => {
            let node = node_at_mut(&mut out, path);
            let inner = match node {
                ProcessTree::Optional { child } => (**child).clone(),
                _ => unreachable!("cb site is not optional"),
            };
            *node = inner;
        }
        Site::WrapLoop { seq, child } => {
            let children = seq_children_mut(&mut out, seq);
            let inner = children.remove(*child);
            children.insert(*child, ProcessTree::loop_of(inner, None));
        }
        Site::UnwrapLoop { path } => {
            let node = node_at_mut(&mut out, path);
            let inner = match node {
                ProcessTree::Loop { body, .. } => (**body).clone(),
                _ => unreachable!("lp site is not a loop"),
            };
            *node = inner;
        }
        Site::Synchronize { par, a, b } => {
            let members = match node_at_mut(&mut out, par) {
                ProcessTree::Parallel { children } => children,
                _ => unreachable!("cd site is not parallel"),
            };
            let second = members.remove(*b);
            let first = members.remove(*a);
            members.insert(*a, ProcessTree::sequence(vec![first, second]));
        }
        Site::Parallelize { seq, first } => {
            let children = seq_children_mut(&mut out, seq);
            let right = children.remove(first + 1);
            let left = children.remove(*first);
            children.insert(*first, ProcessTree::parallel(vec![left, right]));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn abcd() -> ProcessTree {
        ProcessTree::sequence(vec![
            ProcessTree::activity("A"),
            ProcessTree::activity("B"),
            ProcessTree::activity("C"),
            ProcessTree::activity("D"),
        ])
    }

    #[test]
    fn swap_permutes_the_same_activities() {
        let base = abcd();
        let base_variants = base.variants_bounded(100);
        let mut seen_c_before_b = false;
        for seed in 0..40 {
            let out = apply_pattern(&base, ChangePattern::Sw, &mut rng(seed)).unwrap();
            assert_eq!(out.activity_names(), base.activity_names());
            let variants = out.variants_bounded(100);
            assert_ne!(variants, base_variants);
            assert_eq!(variants.len(), 1);
            let only = variants.iter().next().unwrap().clone();
            if only == vec!["A", "C", "B", "D"] {
                seen_c_before_b = true;
            }
        }
        assert!(seen_c_before_b, "adjacent swap never produced A C B D");
    }

    #[test]
    fn insert_or_remove_changes_every_variant() {
        let base = abcd();
        for seed in 0..20 {
            let out = apply_pattern(&base, ChangePattern::Re, &mut rng(seed)).unwrap();
            let names = out.activity_names();
            let grew = names.len() > 4;
            if grew {
                assert!(names.contains("New activity 1"));
                for v in out.variants_bounded(100) {
                    assert!(v.contains(&"New activity 1".to_string()));
                }
            } else {
                assert_eq!(names.len(), 3);
            }
        }
    }

    #[test]
    fn substitution_introduces_a_fresh_name() {
        let base = abcd();
        let out = apply_pattern(&base, ChangePattern::Rp, &mut rng(3)).unwrap();
        let names = out.activity_names();
        assert_eq!(names.len(), 4);
        assert!(names.contains("New activity 1"));
    }

    #[test]
    fn conditionalize_halves_variant_length() {
        let base = abcd();
        let out = apply_pattern(&base, ChangePattern::Cf, &mut rng(4)).unwrap();
        let variants = out.variants_bounded(100);
        assert_eq!(variants.len(), 2);
        for v in &variants {
            assert_eq!(v.len(), 3);
        }
    }

    #[test]
    fn parallelize_and_skip_patterns_grow_the_variant_set() {
        let base = abcd();
        for (pattern, expect) in [
            (ChangePattern::Pl, 2usize),
            (ChangePattern::Cb, 2),
            (ChangePattern::Lp, 2),
        ] {
            let out = apply_pattern(&base, pattern, &mut rng(5)).unwrap();
            assert_eq!(out.variants_bounded(100).len(), expect, "{pattern}");
        }
    }

    #[test]
    fn synchronize_orders_a_parallel_pair() {
        let base = ProcessTree::sequence(vec![
            ProcessTree::activity("A"),
            ProcessTree::parallel(vec![
                ProcessTree::activity("B"),
                ProcessTree::activity("C"),
            ]),
        ]);
        let out = apply_pattern(&base, ChangePattern::Cd, &mut rng(6)).unwrap();
        let variants = out.variants_bounded(100);
        assert_eq!(variants.len(), 1);
    }

    #[test]
    fn move_into_parallel_relaxes_an_order() {
        let base = ProcessTree::sequence(vec![
            ProcessTree::activity("A"),
            ProcessTree::parallel(vec![
                ProcessTree::activity("B"),
                ProcessTree::activity("C"),
            ]),
            ProcessTree::activity("D"),
        ]);
        let before = base.variants_bounded(100).len();
        let out = apply_pattern(&base, ChangePattern::Pm, &mut rng(7)).unwrap();
        assert_eq!(out.activity_names(), base.activity_names());
        assert_ne!(out.variants_bounded(100).len(), before);
    }

    #[test]
    fn pattern_with_no_eligible_site_is_an_error() {
        let base = abcd();
        // no parallel block anywhere, so cd cannot apply
        let err = apply_pattern(&base, ChangePattern::Cd, &mut rng(8));
        assert!(matches!(err, Err(Error::NoEligibleFragment(_))));
    }

    #[test]
    fn composite_equals_its_steps_on_one_stream() {
        let base = ProcessTree::loanlike();
        let composite =
            apply_pattern(&base, ChangePattern::Rio, &mut rng(9)).unwrap();
        let mut stream = rng(9);
        let mut staged = base;
        for step in [ChangePattern::Cf, ChangePattern::Cp, ChangePattern::Cb] {
            staged = apply_pattern(&staged, step, &mut stream).unwrap();
        }
        assert_eq!(composite, staged);
    }

    #[test]
    fn composite_expansions_are_fixed() {
        use ChangePattern::*;
        assert_eq!(Oir.steps(), vec![Lp, Re, Cd]);
        assert_eq!(Ori.steps(), vec![Lp, Pl, Re]);
        assert_eq!(Rio.steps(), vec![Cf, Cp, Cb]);
        assert_eq!(Roi.steps(), vec![Pl, Lp, Rp]);
        assert_eq!(Sw.steps(), vec![Sw]);
    }

    #[test]
    fn every_bench_pattern_changes_the_loanlike_variant_set() {
        let base = ProcessTree::loanlike();
        let before = base.variants_bounded(VARIANT_CAP);
        for pattern in ChangePattern::BENCH {
            for seed in 0..5 {
                let out = apply_pattern(&base, pattern, &mut rng(seed)).unwrap();
                out.validate().unwrap();
                assert_ne!(
                    out.variants_bounded(VARIANT_CAP),
                    before,
                    "{pattern} seed {seed} left the variant set unchanged"
                );
            }
        }
    }

    #[test]
    fn codes_round_trip_through_parsing() {
        for pattern in [
            ChangePattern::Cp,
            ChangePattern::Pm,
            ChangePattern::Re,
            ChangePattern::Rp,
            ChangePattern::Sw,
            ChangePattern::Cf,
            ChangePattern::Cb,
            ChangePattern::Lp,
            ChangePattern::Cd,
            ChangePattern::Pl,
            ChangePattern::Oir,
            ChangePattern::Ori,
            ChangePattern::Rio,
            ChangePattern::Roi,
        ] {
            assert_eq!(pattern.code().parse::<ChangePattern>().unwrap(), pattern);
        }
        assert!("xx".parse::<ChangePattern>().is_err());
    }

    #[test]
    fn application_is_reproducible_per_seed() {
        let base = ProcessTree::loanlike();
        for pattern in ChangePattern::BENCH {
            let a = apply_pattern(&base, pattern, &mut rng(11)).unwrap();
            let b = apply_pattern(&base, pattern, &mut rng(11)).unwrap();
            assert_eq!(a, b);
        }
    }
}
