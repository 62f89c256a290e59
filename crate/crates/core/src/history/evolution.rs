//! Per-class evolution features over the release windows observed so far.
//!
//! Windows are 1-based: window `w` ends at release `w`. For the current
//! release `R`:
//! - BOC: first release containing the class
//! - FCH/LCH: first/last window with a change (0 when never changed)
//! - FRCH/TACH: commit count and line churn in the current window
//! - ATAF: TACH/FRCH; CHD: TACH/LOC; LCA: churn of the latest touching
//!   commit; LCD: LCA/LOC
//! - CSB: churn summed over windows after the birth release; CSBS: CSB/LOC
//! - WCD/WFR: per-window CHD/FRCH discounted by 2^(w−R)
//! - ACDF: mean change density per change frequency, 0 when never changed
//! - CHO: whether the class changed in the current window

use crate::error::{Error, Result};
use crate::real::Real;

/// Per-class per-window aggregates feeding the evolution features.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct WindowActivity {
    /// commits touching the class in the window
    pub commits: u32,
    /// lines added + deleted in the window
    pub churn: u64,
    /// churn of the last commit in the window touching the class
    pub last_commit_churn: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionFeatures<F> {
    pub boc: F,
    pub fch: F,
    pub frch: F,
    pub lch: F,
    pub wcd: F,
    pub wfr: F,
    pub tach: F,
    pub ataf: F,
    pub chd: F,
    pub lca: F,
    pub lcd: F,
    pub csb: F,
    pub csbs: F,
    pub acdf: F,
    pub cho: F,
}

pub const EVOLUTION_FEATURE_NAMES: &[&str] = &[
    "BOC", "FCH", "FRCH", "LCH", "WCD", "WFR", "TACH", "ATAF", "CHD", "LCA", "LCD", "CSB",
    "CSBS", "ACDF", "CHO",
];

impl<F: Real> EvolutionFeatures<F> {
    /// Values in [`EVOLUTION_FEATURE_NAMES`] order.
    pub fn values(&self) -> [F; 15] {
        [
            self.boc, self.fch, self.frch, self.lch, self.wcd, self.wfr, self.tach, self.ataf,
            self.chd, self.lca, self.lcd, self.csb, self.csbs, self.acdf, self.cho,
        ]
    }
}

/// Computes the features for one class at release `windows.len()`.
///
/// `windows[w-1]` aggregates window `w`; `locs[w-1]` is the class LOC at
/// release `w` when the class existed there. The class must exist at the
/// current release and must have been born by it.
pub fn evolution_features<F: Real>(
    windows: &[WindowActivity],
    birth_release: usize,
    locs: &[Option<F>],
) -> Result<EvolutionFeatures<F>> {
    let r = windows.len();
    if r == 0 || locs.len() != r {
        return Err(Error::Contract(format!(
            "evolution features need aligned windows and LOC values, got {} and {}",
            r,
            locs.len()
        )));
    }
    if birth_release == 0 || birth_release > r {
        return Err(Error::Contract(format!(
            "birth release {birth_release} outside 1..={r}"
        )));
    }
    let loc_now = locs[r - 1].ok_or_else(|| {
        Error::Contract("class does not exist at the current release".to_string())
    })?;
    if loc_now <= F::zero() {
        return Err(Error::Contract("class LOC must be positive".to_string()));
    }

    let count = |n: usize| F::from_usize_(n);
    let current = windows[r - 1];
    let frch = count(current.commits as usize);
    let tach = count(current.churn as usize);

    let fch = windows
        .iter()
        .position(|w| w.commits > 0)
        .map_or(F::zero(), |i| count(i + 1));
    let lch = windows
        .iter()
        .rposition(|w| w.commits > 0)
        .map_or(F::zero(), |i| count(i + 1));

    let ataf = if current.commits == 0 {
        F::zero()
    } else {
        tach / frch
    };
    let chd = tach / loc_now;

    let lca = windows
        .iter()
        .rev()
        .find(|w| w.commits > 0)
        .map_or(F::zero(), |w| count(w.last_commit_churn as usize));
    let lcd = lca / loc_now;

    let csb: F = windows
        .iter()
        .enumerate()
        .filter(|(i, _)| i + 1 > birth_release)
        .map(|(_, w)| count(w.churn as usize))
        .sum();
    let csbs = csb / loc_now;

    // per-window change density, 0 where the class had no measured size
    let chd_at = |i: usize| match locs[i] {
        Some(loc) if loc > F::zero() => count(windows[i].churn as usize) / loc,
        _ => F::zero(),
    };
    let mut wcd = F::zero();
    let mut wfr = F::zero();
    let mut chd_sum = F::zero();
    let mut total_commits = 0usize;
    for i in 0..r {
        let weight = F::from_f64_(2.0f64.powi(i as i32 + 1 - r as i32));
        wcd = wcd + chd_at(i) * weight;
        wfr = wfr + count(windows[i].commits as usize) * weight;
        chd_sum = chd_sum + chd_at(i);
        total_commits += windows[i].commits as usize;
    }
    let acdf = if total_commits == 0 {
        F::zero()
    } else {
        chd_sum / count(total_commits)
    };

    Ok(EvolutionFeatures {
        boc: count(birth_release),
        fch,
        frch,
        lch,
        wcd,
        wfr,
        tach,
        ataf,
        chd,
        lca,
        lcd,
        csb,
        csbs,
        acdf,
        cho: if current.commits > 0 { F::one() } else { F::zero() },
    })
}
