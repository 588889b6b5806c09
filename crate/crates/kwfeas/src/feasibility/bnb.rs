//! Interval branch-and-bound over axis-aligned boxes in the positive
//! orthant.
//!
//! Every constraint is evaluated in outward-rounded interval
//! arithmetic, so a box whose evaluation has a strictly positive
//! lower bound on some constraint provably contains no feasible
//! point. Boxes where every upper bound is nonpositive are probed at
//! their geometric center for an exact rational witness. Everything
//! else splits along the dimension that is widest on a relative
//! scale, at the geometric mean, so the search respects the
//! multiplicative geometry of the orthant.
//!
//! The search proceeds in waves (all boxes of one depth classified
//! together, in order), which keeps results identical whether the
//! wave is mapped over threads or sequentially.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::witness::rationalize_and_verify;
use super::SearchConfig;
use crate::interval::{cmp_f64_rat, Interval};
use crate::kw::InequalitySystem;
use crate::{Error, Rat, Result};

/// A box eliminated by one constraint whose interval lower bound was
/// strictly positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrunedBox {
    pub cube: Vec<Interval>,
    /// 0-based constraint index that excluded the box.
    pub constraint: usize,
}

/// Record of one region run. The pruned and unresolved lists are
/// truncated at the configured trace limit; the counters are exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BnBTrace {
    pub root: Vec<Interval>,
    pub pruned: Vec<PrunedBox>,
    pub unresolved: Vec<Vec<Interval>>,
    pub boxes_processed: u64,
    pub boxes_pruned: u64,
    pub unresolved_total: u64,
    /// True when a trace list hit the cap and dropped entries.
    pub truncated: bool,
}

impl BnBTrace {
    /// A complete trace covers the whole root box: every leaf was
    /// pruned, so the region is exactly excluded.
    pub fn complete(&self) -> bool {
        self.unresolved_total == 0
    }
}

/// Outcome of a region search.
#[derive(Debug, Clone, PartialEq)]
pub enum RegionOutcome {
    /// No feasible point anywhere in the root box; the trace is a
    /// checkable covering proof.
    ProvenEmpty(BnBTrace),
    /// Exact verified witness inside the box.
    FoundPoint(Vec<Rat>),
    /// Budget ran out with boxes still unresolved; no claim either way.
    Exhausted(BnBTrace),
}

enum BoxStep {
    Pruned(usize),
    Found(Vec<Rat>),
    Children(Vec<Interval>, Vec<Interval>),
    Atomic,
}

fn classify(system: &InequalitySystem, cube: &[Interval]) -> BoxStep {
    let mut all_below = true;
    for (ci, g) in system.constraints().iter().enumerate() {
        if g.is_zero() {
            continue;
        }
        let range = g.eval_interval(cube).expect("arity checked at entry");
        if range.lo() > 0.0 {
            return BoxStep::Pruned(ci);
        }
        if range.hi() > 0.0 {
            all_below = false;
        }
    }
    if all_below {
        if let Some(point) = probe_center(system, cube) {
            return BoxStep::Found(point);
        }
    }
    match split(cube) {
        Some((a, b)) => BoxStep::Children(a, b),
        None => BoxStep::Atomic,
    }
}

fn probe_center(system: &InequalitySystem, cube: &[Interval]) -> Option<Vec<Rat>> {
    let center: Vec<f64> = cube.iter().map(|iv| geometric_mean(iv.lo(), iv.hi())).collect();
    let point = rationalize_and_verify(system, &center, 1_000_000)?;
    // rationalization may drift; witnesses must stay inside the box
    let inside = point.iter().zip(cube).all(|(p, iv)| {
        cmp_f64_rat(iv.lo(), p) != Ordering::Greater && cmp_f64_rat(iv.hi(), p) != Ordering::Less
    });
    inside.then_some(point)
}

fn geometric_mean(lo: f64, hi: f64) -> f64 {
    let gm = (lo * hi).sqrt();
    if gm.is_finite() && lo <= gm && gm <= hi {
        gm
    } else {
        lo + 0.5 * (hi - lo)
    }
}

/// Split along the dimension with the largest hi/lo ratio, at the
/// geometric mean. None when no dimension can be split strictly.
fn split(cube: &[Interval]) -> Option<(Vec<Interval>, Vec<Interval>)> {
    let mut dim = None;
    let mut best = 1.0f64;
    for (j, iv) in cube.iter().enumerate() {
        let ratio = iv.hi() / iv.lo();
        if ratio > best {
            best = ratio;
            dim = Some(j);
        }
    }
    let j = dim?;
    let iv = cube[j];
    let mut mid = geometric_mean(iv.lo(), iv.hi());
    if !(iv.lo() < mid && mid < iv.hi()) {
        mid = iv.lo() + 0.5 * (iv.hi() - iv.lo());
        if !(iv.lo() < mid && mid < iv.hi()) {
            return None;
        }
    }
    let mut left = cube.to_vec();
    let mut right = cube.to_vec();
    left[j] = Interval::new(iv.lo(), mid).expect("ordered endpoints");
    right[j] = Interval::new(mid, iv.hi()).expect("ordered endpoints");
    Some((left, right))
}

/// Exhaustive interval search over one box. The box must lie strictly
/// inside the positive orthant with finite endpoints.
pub fn bnb_region(
    system: &InequalitySystem,
    root: &[Interval],
    cfg: &SearchConfig,
) -> Result<RegionOutcome> {
    if root.len() != system.nvars() {
        return Err(Error::InvalidBox(format!(
            "box has {} dimensions, system has {} variables",
            root.len(),
            system.nvars()
        )));
    }
    for iv in root {
        if !(iv.lo() > 0.0 && iv.hi().is_finite()) {
            return Err(Error::InvalidBox(format!(
                "box side {iv} must lie strictly inside the positive orthant with finite endpoints"
            )));
        }
    }

    let deadline = cfg
        .time_budget_ms
        .map(|ms| std::time::Instant::now() + std::time::Duration::from_millis(ms));

    let mut trace = BnBTrace {
        root: root.to_vec(),
        pruned: Vec::new(),
        unresolved: Vec::new(),
        boxes_processed: 0,
        boxes_pruned: 0,
        unresolved_total: 0,
        truncated: false,
    };
    let cap = cfg.trace_limit as usize;
    let note_pruned = |trace: &mut BnBTrace, cube: Vec<Interval>, ci: usize| {
        trace.boxes_pruned += 1;
        if trace.pruned.len() < cap {
            trace.pruned.push(PrunedBox { cube, constraint: ci });
        } else {
            trace.truncated = true;
        }
    };
    let note_unresolved = |trace: &mut BnBTrace, cube: Vec<Interval>| {
        trace.unresolved_total += 1;
        if trace.unresolved.len() < cap {
            trace.unresolved.push(cube);
        } else {
            trace.truncated = true;
        }
    };

    // unconditional root probe: catches witnesses pinned to the
    // center, e.g. the all-ones point in a symmetric box
    if let Some(point) = probe_center(system, root) {
        return Ok(RegionOutcome::FoundPoint(point));
    }

    let mut queue: Vec<Vec<Interval>> = vec![root.to_vec()];
    while !queue.is_empty() {
        let timed_out = deadline.is_some_and(|d| std::time::Instant::now() >= d);
        let remaining = (cfg.box_budget as usize).saturating_sub(trace.boxes_processed as usize);
        let take = if timed_out { 0 } else { queue.len().min(remaining) };
        let overflow: Vec<Vec<Interval>> = queue.split_off(take);
        for cube in overflow {
            note_unresolved(&mut trace, cube);
        }
        if take == 0 {
            break;
        }

        let wave = std::mem::take(&mut queue);
        let steps: Vec<(Vec<Interval>, BoxStep)> =
            crate::exec::map_collect(&wave, |cube| (cube.clone(), classify(system, cube)));
        trace.boxes_processed += steps.len() as u64;

        for (cube, step) in steps {
            match step {
                BoxStep::Pruned(ci) => note_pruned(&mut trace, cube, ci),
                BoxStep::Found(point) => return Ok(RegionOutcome::FoundPoint(point)),
                BoxStep::Children(a, b) => {
                    queue.push(a);
                    queue.push(b);
                }
                BoxStep::Atomic => note_unresolved(&mut trace, cube),
            }
        }
    }

    if trace.complete() {
        Ok(RegionOutcome::ProvenEmpty(trace))
    } else {
        Ok(RegionOutcome::Exhausted(trace))
    }
}

/// Nested symmetric boxes [2^-m, 2^m]^n used by the decision
/// procedure, smallest first.
pub fn default_ladder(nvars: usize) -> Vec<Vec<Interval>> {
    [4i32, 8, 12]
        .iter()
        .map(|&m| {
            vec![Interval::new(2f64.powi(-m), 2f64.powi(m)).expect("exact powers of two"); nvars]
        })
        .collect()
}
