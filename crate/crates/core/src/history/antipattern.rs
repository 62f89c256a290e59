//! Historical smell indicators: average prior smell count, entropy-weighted
//! change complexity while smelly, and the longest consecutive smelly
//! streak.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::history::ChangeHistory;
use crate::real::Real;

/// Smell instance counts per class for each release observed so far,
/// index 0 = release 1.
#[derive(Debug, Clone, Default)]
pub struct SmellTimeline {
    releases: Vec<BTreeMap<String, usize>>,
}

impl SmellTimeline {
    pub fn new(releases: Vec<BTreeMap<String, usize>>) -> Self {
        SmellTimeline { releases }
    }

    pub fn push(&mut self, counts: BTreeMap<String, usize>) {
        self.releases.push(counts);
    }

    pub fn len(&self) -> usize {
        self.releases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.releases.is_empty()
    }

    /// Smell instances attached to `class` at 1-based `release`.
    pub fn count(&self, release: usize, class: &str) -> usize {
        self.releases
            .get(release - 1)
            .and_then(|m| m.get(class))
            .copied()
            .unwrap_or(0)
    }

    pub fn smelly(&self, release: usize, class: &str) -> bool {
        self.count(release, class) > 0
    }
}

/// Shannon entropy of the change distribution across classes, normalized
/// by log2 of the number of changed classes; fewer than two changed
/// classes → 0.
pub fn change_entropy<F: Real>(history: &ChangeHistory) -> F {
    let counts = history.counts_by_class();
    let n = counts.len();
    if n < 2 {
        return F::zero();
    }
    let total: f64 = counts.values().map(|&c| c as f64).sum();
    let h: f64 = counts
        .values()
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum();
    F::from_f64_(h / (n as f64).log2())
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AntipatternFeatures<F> {
    /// mean smell count over the previous releases, 0 at the first
    pub ana: F,
    /// entropy-weighted share of window changes while the class was smelly
    pub acm: F,
    /// longest consecutive smelly-release run observed so far
    pub arl: F,
}

/// Computes the three indicators for one class at release
/// `histories.len()`. The timeline must cover every release up to it.
pub fn antipattern_metrics<F: Real>(
    class: &str,
    timeline: &SmellTimeline,
    histories: &[ChangeHistory],
) -> Result<AntipatternFeatures<F>> {
    let r = histories.len();
    if r == 0 {
        return Err(Error::Contract(
            "antipattern metrics need at least one release".to_string(),
        ));
    }
    if timeline.len() < r {
        return Err(Error::Consistency(format!(
            "smell timeline covers {} releases, history has {}",
            timeline.len(),
            r
        )));
    }

    let ana = if r == 1 {
        F::zero()
    } else {
        let prior: usize = (1..r).map(|w| timeline.count(w, class)).sum();
        F::from_usize_(prior) / F::from_usize_(r - 1)
    };

    let mut acm = F::zero();
    for w in 1..=r {
        let history = &histories[w - 1];
        if !timeline.smelly(w, class) {
            continue;
        }
        let class_changes = history.count_changes(class);
        if class_changes == 0 {
            continue;
        }
        let total: u64 = history.counts_by_class().values().sum();
        let share = F::from_usize_(class_changes as usize) / F::from_usize_(total as usize);
        acm = acm + change_entropy::<F>(history) * share;
    }

    let mut arl = 0usize;
    let mut run = 0usize;
    for w in 1..=r {
        if timeline.smelly(w, class) {
            run += 1;
            arl = arl.max(run);
        } else {
            run = 0;
        }
    }

    Ok(AntipatternFeatures {
        ana,
        acm,
        arl: F::from_usize_(arl),
    })
}
