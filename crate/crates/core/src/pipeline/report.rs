//! Aggregated WER and EER tables.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{Domain, ExperimentConfig};
use super::eval::{read_wer_rows, CellLabel, WerRow, UNMASKED};
use super::io::{files_with_extension, read_csv, write_atomic, write_csv};
use crate::alignment::Position;
use crate::error::{contract, Error, Result};
use crate::masker::MaskType;
use crate::metrics::{paired_t_test, PairedTestResult};
use crate::trials::{eer, ScoredTrial};

/// Label for cells pooled over all positions.
pub const POOLED: &str = "all";

/// The configured mask grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridSpec {
    pub domains: Vec<Domain>,
    pub types: Vec<MaskType>,
    pub positions: Vec<Position>,
}

impl GridSpec {
    pub fn full() -> Self {
        Self { domains: Domain::ALL.to_vec(), types: MaskType::ALL.to_vec(), positions: Position::ALL.to_vec() }
    }

    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        Self { domains: cfg.domains.clone(), types: cfg.types.clone(), positions: cfg.positions.clone() }
    }

    /// `(mask_type, position)` column keys: the unmasked column, then every
    /// position × type in configured order.
    pub fn columns(&self) -> Vec<(String, String)> {
        let mut cols = vec![(UNMASKED.to_string(), UNMASKED.to_string())];
        for p in &self.positions {
            for t in &self.types {
                cols.push((t.as_str().to_string(), p.as_str().to_string()));
            }
        }
        cols
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportCell {
    /// ASR system for WER tables, condition name for EER tables.
    pub row: String,
    pub domain: String,
    pub mask_type: String,
    pub position: String,
    /// Percentage; empty when the cell has no usable data.
    pub value_pct: Option<f64>,
    pub n: usize,
    pub n_excluded: usize,
    pub error: Option<String>,
}

impl ReportCell {
    fn key(&self) -> (&str, &str, &str, &str) {
        (&self.row, &self.domain, &self.mask_type, &self.position)
    }

    pub fn display(&self) -> String {
        match self.value_pct {
            Some(v) => format!("{v:.2}"),
            None if self.n_excluded > 0 => format!("n/a ({} excluded)", self.n_excluded),
            None => "n/a".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportTable {
    pub metric: String,
    pub rows: Vec<String>,
    /// Each row holds a single domain (named by its condition) rather
    /// than every domain.
    pub row_per_domain: bool,
    pub cells: Vec<ReportCell>,
}

impl ReportTable {
    pub fn cell(&self, row: &str, domain: &str, mask_type: &str, position: &str) -> Option<&ReportCell> {
        self.cells.iter().find(|c| c.key() == (row, domain, mask_type, position))
    }

    /// Checks that every (row, domain, column) of the grid appears exactly
    /// once among the per-position cells, and nothing else does.
    pub fn check_complete(&self, grid: &GridSpec) -> Result<()> {
        let mut expected = BTreeSet::new();
        for r in &self.rows {
            for d in grid.domains.iter().filter(|d| !self.row_per_domain || d.condition() == r) {
                for (t, p) in grid.columns() {
                    expected.insert((r.clone(), d.as_str().to_string(), t, p));
                }
            }
        }
        let mut seen = BTreeSet::new();
        for c in self.cells.iter().filter(|c| c.position != POOLED) {
            let k = (c.row.clone(), c.domain.clone(), c.mask_type.clone(), c.position.clone());
            if !expected.contains(&k) {
                return Err(contract(format!("unexpected report cell {k:?}")));
            }
            if !seen.insert(k.clone()) {
                return Err(contract(format!("duplicate report cell {k:?}")));
            }
        }
        if let Some(missing) = expected.difference(&seen).next() {
            return Err(contract(format!("missing report cell {missing:?}")));
        }
        Ok(())
    }

    pub fn write_long_csv(&self, path: &Path) -> Result<()> {
        write_csv(path, &self.cells)
    }
}

fn mask_title(t: &str) -> &str {
    match t {
        "noise" => "Noise",
        "delete" => "Deletion",
        "reverse" => "Reversal",
        _ => "Original Speech",
    }
}

fn position_title(p: &str) -> String {
    let mut c = p.chars();
    c.next().map_or_else(String::new, |f| f.to_uppercase().chain(c).collect())
}

fn to_csv(header: &[String], body: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in body {
        w.write_record(r)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn to_markdown(header: &[String], body: &[Vec<String>]) -> String {
    let line = |cells: &[String]| format!("| {} |\n", cells.join(" | "));
    let mut out = line(header);
    out.push_str(&line(&vec!["---".to_string(); header.len()]));
    for r in body {
        out.push_str(&line(r));
    }
    out
}

// ---------------------------------------------------------------- WER

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TTestRow {
    pub system: String,
    pub domain: String,
    pub mask_type: String,
    pub position: String,
    pub baseline_mask_type: String,
    pub baseline_position: String,
    pub n_pairs: usize,
    pub t_statistic: Option<f64>,
    pub p_value: Option<f64>,
    pub significant: Option<bool>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WerReport {
    /// Per-position cells plus cells pooled over positions.
    pub table: ReportTable,
    pub ttests: Vec<TTestRow>,
    pub grid: GridSpec,
}

fn wer_cell(row: &str, domain: &str, mask_type: &str, position: &str, rows: &[&WerRow]) -> ReportCell {
    let kept: Vec<f64> = rows.iter().filter(|r| !r.filtered).map(|r| r.wer).collect();
    let n_excluded = rows.len() - kept.len();
    let (value_pct, error) = if kept.is_empty() {
        (None, Some(if rows.is_empty() { "no data".to_string() } else { "all pairs filtered".to_string() }))
    } else {
        (Some(100.0 * kept.iter().sum::<f64>() / kept.len() as f64), None)
    };
    ReportCell {
        row: row.to_string(),
        domain: domain.to_string(),
        mask_type: mask_type.to_string(),
        position: position.to_string(),
        value_pct,
        n: kept.len(),
        n_excluded,
        error,
    }
}

/// Paired t-test between two cells of the same system, pairing unfiltered
/// rows by utterance id. Cells may be pooled (`position == "all"`), in
/// which case pairs are keyed by (utterance, position) on the masked side
/// and matched to the baseline by utterance.
pub fn compare_cells(rows: &[WerRow], a: &CellLabel, b: &CellLabel) -> TTestRow {
    let matches = |l: &CellLabel, r: &WerRow| {
        r.system == l.system
            && r.domain == l.domain
            && r.mask_type == l.mask_type
            && (l.position == POOLED || r.position == l.position)
            && !r.filtered
    };
    let base: BTreeMap<&str, f64> =
        rows.iter().filter(|r| matches(b, r)).map(|r| (r.utterance_id.as_str(), r.wer)).collect();
    let mut xa = Vec::new();
    let mut xb = Vec::new();
    for r in rows.iter().filter(|r| matches(a, r)) {
        if let Some(&w) = base.get(r.utterance_id.as_str()) {
            xa.push(r.wer);
            xb.push(w);
        }
    }
    let mut out = TTestRow {
        system: a.system.clone(),
        domain: a.domain.clone(),
        mask_type: a.mask_type.clone(),
        position: a.position.clone(),
        baseline_mask_type: b.mask_type.clone(),
        baseline_position: b.position.clone(),
        n_pairs: xa.len(),
        t_statistic: None,
        p_value: None,
        significant: None,
        error: None,
    };
    match paired_t_test::<f64>(&xa, &xb) {
        Ok(PairedTestResult { t_statistic, p_value, significant, .. }) => {
            out.t_statistic = Some(t_statistic);
            out.p_value = Some(p_value);
            out.significant = Some(significant);
        }
        Err(e) => out.error = Some(e.to_string()),
    }
    out
}

/// Aggregates per-pair WER rows into the report grid.
///
/// Cell values are the mean WER% over rows kept by the failure filter.
/// Every masked cell is t-tested against the unmasked cell of the same
/// system and domain.
pub fn build_wer_report(rows: &[WerRow], grid: &GridSpec) -> Result<WerReport> {
    if rows.is_empty() {
        return Err(contract("no WER rows to report"));
    }
    let systems: Vec<String> = rows.iter().map(|r| r.system.clone()).collect::<BTreeSet<_>>().into_iter().collect();
    let mut by_cell: BTreeMap<CellLabel, Vec<&WerRow>> = BTreeMap::new();
    for r in rows {
        by_cell.entry(r.label()).or_default().push(r);
    }
    let empty = Vec::new();
    let mut cells = Vec::new();
    let mut ttests = Vec::new();
    for s in &systems {
        for d in &grid.domains {
            let d = d.as_str();
            for (t, p) in grid.columns() {
                let found = by_cell.get(&CellLabel::new(s, d, &t, &p)).unwrap_or(&empty);
                cells.push(wer_cell(s, d, &t, &p, found));
            }
            let baseline = CellLabel::new(s, d, UNMASKED, UNMASKED);
            for t in &grid.types {
                let t = t.as_str();
                let pooled: Vec<&WerRow> = grid
                    .positions
                    .iter()
                    .flat_map(|p| by_cell.get(&CellLabel::new(s, d, t, p.as_str())).unwrap_or(&empty))
                    .copied()
                    .collect();
                cells.push(wer_cell(s, d, t, POOLED, &pooled));
                for p in grid.positions.iter().map(|p| p.as_str()).chain([POOLED]) {
                    ttests.push(compare_cells(rows, &CellLabel::new(s, d, t, p), &baseline));
                }
            }
        }
    }
    let table = ReportTable { metric: "WER".into(), rows: systems, row_per_domain: false, cells };
    table.check_complete(grid)?;
    Ok(WerReport { table, ttests, grid: grid.clone() })
}

/// Reads every per-pair CSV under `dir` and builds the report.
pub fn report_wer(dir: &Path, grid: &GridSpec) -> Result<WerReport> {
    let mut rows = Vec::new();
    for path in files_with_extension(dir, "csv")? {
        rows.extend(read_wer_rows(&path)?);
    }
    build_wer_report(&rows, grid)
}

impl WerReport {
    /// Rows are ASR systems; each domain contributes a block of
    /// unmasked + one pooled column per mask type.
    fn layout(&self) -> (Vec<String>, Vec<Vec<String>>) {
        let mut header = vec!["ASR system".to_string()];
        let mut keys = Vec::new();
        for d in &self.grid.domains {
            header.push(format!("{} / {}", d.condition(), mask_title(UNMASKED)));
            keys.push((d.as_str(), UNMASKED, UNMASKED));
            for t in &self.grid.types {
                header.push(format!("{} / {}", d.condition(), mask_title(t.as_str())));
                keys.push((d.as_str(), t.as_str(), POOLED));
            }
        }
        let body = self
            .table
            .rows
            .iter()
            .map(|s| {
                let mut r = vec![s.clone()];
                for (d, t, p) in &keys {
                    r.push(self.table.cell(s, d, t, p).map_or_else(|| "n/a".to_string(), ReportCell::display));
                }
                r
            })
            .collect();
        (header, body)
    }

    pub fn markdown(&self) -> String {
        let (h, b) = self.layout();
        to_markdown(&h, &b)
    }

    /// Writes `wer_cells.csv`, `wer_table.csv`, `wer_table.md` and
    /// `wer_ttests.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        self.table.write_long_csv(&dir.join("wer_cells.csv"))?;
        let (h, b) = self.layout();
        write_atomic(&dir.join("wer_table.csv"), &to_csv(&h, &b)?)?;
        write_atomic(&dir.join("wer_table.md"), self.markdown().as_bytes())?;
        write_csv(&dir.join("wer_ttests.csv"), &self.ttests)
    }
}

// ---------------------------------------------------------------- EER

#[derive(Debug, Clone, PartialEq)]
pub struct EerReport {
    pub table: ReportTable,
    pub grid: GridSpec,
}

/// Directory holding one cell's `scores.csv`: `{domain}/none` or
/// `{domain}/{type}/{position}`.
pub fn asv_cell_dir(root: &Path, domain: Domain, column: (&str, &str)) -> std::path::PathBuf {
    match column {
        (UNMASKED, _) => root.join(domain.as_str()).join(UNMASKED),
        (t, p) => root.join(domain.as_str()).join(t).join(p),
    }
}

fn eer_cell(row: &str, domain: Domain, t: &str, p: &str, scores: Result<Vec<ScoredTrial<f64>>>) -> ReportCell {
    let mut cell = ReportCell {
        row: row.to_string(),
        domain: domain.as_str().to_string(),
        mask_type: t.to_string(),
        position: p.to_string(),
        value_pct: None,
        n: 0,
        n_excluded: 0,
        error: None,
    };
    match scores {
        Ok(s) => {
            cell.n = s.len();
            let pairs: Vec<(f64, bool)> = s.iter().map(|s| (s.score, s.is_target())).collect();
            match eer(&pairs) {
                Ok(r) => cell.value_pct = Some(100.0 * r.eer),
                Err(e) => cell.error = Some(e.to_string()),
            }
        }
        Err(e) => cell.error = Some(e.to_string()),
    }
    cell
}

/// Builds the EER table from `scores.csv` files laid out as in
/// [`asv_cell_dir`] under `root`. Missing or
/// single-class files become cells with an error.
pub fn report_eer(root: &Path, grid: &GridSpec) -> Result<EerReport> {
    let mut cells = Vec::new();
    let mut rows = Vec::new();
    for &d in &grid.domains {
        rows.push(d.condition().to_string());
        for (t, p) in grid.columns() {
            let path = asv_cell_dir(root, d, (&t, &p)).join("scores.csv");
            let scores = if path.exists() {
                read_csv(&path)
            } else {
                Err(contract(format!("missing {}", path.display())))
            };
            cells.push(eer_cell(d.condition(), d, &t, &p, scores));
        }
    }
    // one row per condition; domains map one-to-one onto rows
    let table = ReportTable { metric: "EER".into(), rows, row_per_domain: true, cells };
    if table.cells.iter().all(|c| c.value_pct.is_none()) {
        return Err(contract(format!("no usable score files under {}", root.display())));
    }
    Ok(EerReport { table, grid: grid.clone() })
}

impl EerReport {
    fn layout(&self) -> (Vec<String>, Vec<Vec<String>>) {
        let cols = self.grid.columns();
        let mut header = vec!["Condition".to_string()];
        for (t, p) in &cols {
            header.push(if t == UNMASKED {
                "None".to_string()
            } else {
                format!("{} {}", position_title(p), mask_title(t))
            });
        }
        let body = self
            .grid
            .domains
            .iter()
            .map(|d| {
                let mut r = vec![d.condition().to_string()];
                for (t, p) in &cols {
                    r.push(
                        self.table
                            .cell(d.condition(), d.as_str(), t, p)
                            .map_or_else(|| "n/a".to_string(), ReportCell::display),
                    );
                }
                r
            })
            .collect();
        (header, body)
    }

    pub fn markdown(&self) -> String {
        let (h, b) = self.layout();
        to_markdown(&h, &b)
    }

    /// Writes `eer_cells.csv`, `eer_table.csv` and `eer_table.md` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        self.table.write_long_csv(&dir.join("eer_cells.csv"))?;
        let (h, b) = self.layout();
        write_atomic(&dir.join("eer_table.csv"), &to_csv(&h, &b)?)?;
        write_atomic(&dir.join("eer_table.md"), self.markdown().as_bytes())
    }
}
