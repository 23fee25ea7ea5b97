//! Per-domain WER density curves and their plots.

use std::path::Path;

use serde::Serialize;

use super::config::Domain;
use super::eval::{WerRow, UNMASKED};
use super::io::{write_atomic, write_csv};
use super::plot::{line_plot_svg, Series};
use super::report::GridSpec;
use crate::error::Result;
use crate::metrics::{kde_log_wer, KdeEstimate};

#[derive(Debug, Clone)]
pub struct KdeCondition {
    /// `none` or a mask type; positions and systems are pooled.
    pub mask_type: String,
    pub estimate: Option<KdeEstimate<f64>>,
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
struct CurveRow<'a> {
    condition: &'a str,
    wer: f64,
    density: f64,
}

#[derive(Debug, Serialize)]
struct SummaryRow<'a> {
    domain: &'a str,
    condition: &'a str,
    n_positive: usize,
    n_zero: usize,
    zero_fraction: Option<f64>,
    bandwidth: Option<f64>,
    mode: Option<f64>,
    error: Option<&'a str>,
}

/// Estimates one density per condition for `domain` from unfiltered rows.
/// `system` restricts the rows to one recognizer.
pub fn kde_for_domain(
    rows: &[WerRow],
    grid: &GridSpec,
    domain: Domain,
    system: Option<&str>,
    grid_size: usize,
) -> Vec<KdeCondition> {
    let conditions = std::iter::once(UNMASKED).chain(grid.types.iter().map(|t| t.as_str()));
    conditions
        .map(|c| {
            let values: Vec<f64> = rows
                .iter()
                .filter(|r| {
                    !r.filtered
                        && r.domain == domain.as_str()
                        && r.mask_type == c
                        && system.is_none_or(|s| r.system == s)
                        && (c == UNMASKED || grid.positions.iter().any(|p| p.as_str() == r.position))
                })
                .map(|r| r.wer)
                .collect();
            match kde_log_wer(&values, grid_size) {
                Ok(e) => KdeCondition { mask_type: c.to_string(), estimate: Some(e), error: None },
                Err(e) => KdeCondition { mask_type: c.to_string(), estimate: None, error: Some(e.to_string()) },
            }
        })
        .collect()
}

/// Writes `kde_{domain}.csv`, `kde_{domain}.svg` and the shared
/// `kde_summary.csv` for every configured domain into `dir`.
pub fn write_kde_reports(
    rows: &[WerRow],
    grid: &GridSpec,
    system: Option<&str>,
    grid_size: usize,
    dir: &Path,
) -> Result<Vec<(Domain, Vec<KdeCondition>)>> {
    let mut summary_data = Vec::new();
    for &d in &grid.domains {
        let conds = kde_for_domain(rows, grid, d, system, grid_size);
        let mut curve_rows = Vec::new();
        let mut series = Vec::new();
        for c in &conds {
            if let Some(e) = &c.estimate {
                for (&w, &f) in e.curve.grid.iter().zip(&e.curve.density) {
                    curve_rows.push(CurveRow { condition: &c.mask_type, wer: w, density: f });
                }
                series.push(Series { label: &c.mask_type, x: &e.curve.grid, y: &e.curve.density });
            }
        }
        write_csv(&dir.join(format!("kde_{}.csv", d.as_str())), &curve_rows)?;
        let title = format!("WER density, {}", d.condition());
        write_atomic(
            &dir.join(format!("kde_{}.svg", d.as_str())),
            line_plot_svg(&title, "WER", "density", &series).as_bytes(),
        )?;
        summary_data.push((d, conds));
    }
    let mut summary = Vec::new();
    for (d, conds) in &summary_data {
        for c in conds {
            let e = c.estimate.as_ref();
            summary.push(SummaryRow {
                domain: d.as_str(),
                condition: &c.mask_type,
                n_positive: e.map_or(0, |e| e.n_positive),
                n_zero: e.map_or(0, |e| e.n_zero),
                zero_fraction: e.map(|e| e.zero_fraction),
                bandwidth: e.map(|e| e.curve.bandwidth),
                mode: e.map(|e| e.curve.mode()),
                error: c.error.as_deref(),
            });
        }
    }
    write_csv(&dir.join("kde_summary.csv"), &summary)?;
    Ok(summary_data)
}
