//! One feature row per (release, class): evolution, scattering, and
//! antipattern metrics plus the change count and change-proneness label.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::history::evolution::WindowActivity;
use crate::history::{
    antipattern_metrics, evolution_features, label_change_proneness, scattering_predictors,
    AntipatternFeatures, ChangeHistory, EvolutionFeatures, ScatteringFeatures, SmellTimeline,
    TfIdfIndex, EVOLUTION_FEATURE_NAMES,
};
use crate::real::Real;

pub const SCATTERING_FEATURE_NAMES: &[&str] = &["str_scat_pred", "sem_scat_pred"];
pub const ANTIPATTERN_FEATURE_NAMES: &[&str] = &["ANA", "ACM", "ARL"];

#[derive(Debug, Clone, PartialEq)]
pub struct HistoryRow<F> {
    pub release: String,
    pub class: String,
    pub evolution: EvolutionFeatures<F>,
    pub scattering: ScatteringFeatures<F>,
    pub antipattern: AntipatternFeatures<F>,
    pub change_count: u64,
    pub label: bool,
}

impl<F: Real> HistoryRow<F> {
    /// Feature lookup by column name.
    pub fn feature(&self, name: &str) -> Option<F> {
        if let Some(i) = EVOLUTION_FEATURE_NAMES.iter().position(|n| *n == name) {
            return Some(self.evolution.values()[i]);
        }
        match name {
            "str_scat_pred" => Some(self.scattering.str_scat_pred),
            "sem_scat_pred" => Some(self.scattering.sem_scat_pred),
            "ANA" => Some(self.antipattern.ana),
            "ACM" => Some(self.antipattern.acm),
            "ARL" => Some(self.antipattern.arl),
            _ => None,
        }
    }
}

/// Everything the assembler needs about one release snapshot.
pub struct ReleaseContext<'a, F> {
    /// class → LOC at this release
    pub locs: &'a BTreeMap<String, F>,
    /// class → package segments
    pub packages: &'a BTreeMap<String, Vec<String>>,
    pub index: &'a TfIdfIndex,
}

/// Computes rows for release `r` (1-based). `windows` and `contexts` cover
/// releases 1..=R_total with `r` within; the timeline covers at least `r`
/// releases.
pub fn compute_history_features<F: Real>(
    r: usize,
    windows: &[ChangeHistory],
    contexts: &[ReleaseContext<'_, F>],
    timeline: &SmellTimeline,
) -> Result<Vec<HistoryRow<F>>> {
    if r == 0 || r > windows.len() || contexts.len() != windows.len() {
        return Err(Error::Contract(format!(
            "release {r} outside the {} observed windows",
            windows.len()
        )));
    }
    let current = &windows[r - 1];
    let ctx = &contexts[r - 1];

    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for class in ctx.locs.keys() {
        counts.insert(class.clone(), current.count_changes(class));
    }
    if counts.is_empty() {
        return Err(Error::EmptyDataset(format!(
            "release {} has no classes",
            current.release
        )));
    }
    let labels: BTreeMap<String, bool> = label_change_proneness(&counts)?
        .into_iter()
        .map(|l| (l.class, l.label))
        .collect();

    let mut rows = Vec::with_capacity(counts.len());
    for class in ctx.locs.keys() {
        let birth = (1..=r)
            .find(|w| contexts[w - 1].locs.contains_key(class))
            .ok_or_else(|| {
                Error::Consistency(format!("class {class} missing from every release"))
            })?;
        let activity: Vec<WindowActivity> = windows[..r]
            .iter()
            .map(|w| window_activity(w, class))
            .collect();
        let locs: Vec<Option<F>> = contexts[..r]
            .iter()
            .map(|c| c.locs.get(class).copied())
            .collect();
        let evolution = evolution_features(&activity, birth, &locs)?;
        let scattering = scattering_predictors(current, class, ctx.packages, ctx.index)?;
        let antipattern = antipattern_metrics(class, timeline, &windows[..r])?;
        rows.push(HistoryRow {
            release: current.release.clone(),
            class: class.clone(),
            evolution,
            scattering,
            antipattern,
            change_count: counts[class],
            label: labels[class],
        });
    }
    Ok(rows)
}

fn window_activity(history: &ChangeHistory, class: &str) -> WindowActivity {
    let mut activity = WindowActivity::default();
    for commit in &history.commits {
        let churn: u64 = commit
            .touched
            .iter()
            .filter(|(c, _, _)| c == class)
            .map(|(_, a, d)| u64::from(*a) + u64::from(*d))
            .sum();
        if churn > 0 {
            activity.commits += 1;
            activity.churn += churn;
            activity.last_commit_churn = churn;
        }
    }
    activity
}

fn header() -> String {
    let mut cols = vec!["release", "class"];
    cols.extend(EVOLUTION_FEATURE_NAMES);
    cols.extend(SCATTERING_FEATURE_NAMES);
    cols.extend(ANTIPATTERN_FEATURE_NAMES);
    cols.push("change_count");
    cols.push("label");
    cols.join(",")
}

pub fn write_history_features<F: Real>(path: &Path, rows: &[HistoryRow<F>]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    writeln!(w, "{}", header()).map_err(|e| Error::io(path, e))?;
    for row in rows {
        let mut cells: Vec<String> = vec![row.release.clone(), row.class.clone()];
        for v in row.evolution.values() {
            cells.push(format!("{v}"));
        }
        cells.push(format!("{}", row.scattering.str_scat_pred));
        cells.push(format!("{}", row.scattering.sem_scat_pred));
        cells.push(format!("{}", row.antipattern.ana));
        cells.push(format!("{}", row.antipattern.acm));
        cells.push(format!("{}", row.antipattern.arl));
        cells.push(row.change_count.to_string());
        cells.push(if row.label { "1" } else { "0" }.to_string());
        writeln!(w, "{}", cells.join(",")).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn load_history_features<F: Real>(
    path: &Path,
) -> Result<BTreeMap<String, Vec<HistoryRow<F>>>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    let expected = header();
    match lines.next() {
        Some((_, first)) if first == expected => {}
        _ => {
            return Err(Error::Schema(format!(
                "{}: expected history feature header",
                path.display()
            )))
        }
    }
    let mut out: BTreeMap<String, Vec<HistoryRow<F>>> = BTreeMap::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        let want = 2 + EVOLUTION_FEATURE_NAMES.len() + 5 + 2;
        if cells.len() != want {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: format!("expected {want} fields, got {}", cells.len()),
            });
        }
        let num = |idx: usize, column: &str| -> Result<F> {
            cells[idx]
                .parse::<f64>()
                .map(F::from_f64_)
                .map_err(|_| Error::Cell {
                    row: i + 1,
                    column: column.to_string(),
                    message: format!("not a number: {:?}", cells[idx]),
                })
        };
        let mut ev = [F::zero(); 15];
        for (j, name) in EVOLUTION_FEATURE_NAMES.iter().enumerate() {
            ev[j] = num(2 + j, name)?;
        }
        let base = 2 + EVOLUTION_FEATURE_NAMES.len();
        let row = HistoryRow {
            release: cells[0].to_string(),
            class: cells[1].to_string(),
            evolution: EvolutionFeatures {
                boc: ev[0],
                fch: ev[1],
                frch: ev[2],
                lch: ev[3],
                wcd: ev[4],
                wfr: ev[5],
                tach: ev[6],
                ataf: ev[7],
                chd: ev[8],
                lca: ev[9],
                lcd: ev[10],
                csb: ev[11],
                csbs: ev[12],
                acdf: ev[13],
                cho: ev[14],
            },
            scattering: ScatteringFeatures {
                str_scat_pred: num(base, "str_scat_pred")?,
                sem_scat_pred: num(base + 1, "sem_scat_pred")?,
            },
            antipattern: AntipatternFeatures {
                ana: num(base + 2, "ANA")?,
                acm: num(base + 3, "ACM")?,
                arl: num(base + 4, "ARL")?,
            },
            change_count: cells[base + 5].parse().map_err(|_| Error::Cell {
                row: i + 1,
                column: "change_count".to_string(),
                message: format!("not a count: {:?}", cells[base + 5]),
            })?,
            label: match cells[base + 6] {
                "1" => true,
                "0" => false,
                other => {
                    return Err(Error::Cell {
                        row: i + 1,
                        column: "label".to_string(),
                        message: format!("expected 0 or 1, got {other:?}"),
                    })
                }
            },
        };
        out.entry(row.release.clone()).or_default().push(row);
    }
    Ok(out)
}
