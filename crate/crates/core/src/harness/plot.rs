//! Tidy long-format CSV for external plotting: one row per
//! `(sweep_value, statistic)` with columns
//! `sweep_value, statistic, estimate, ci_low, ci_high`.

use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::harness::experiment::PointReport;
use crate::stats::Estimate;

pub const PLOT_COLUMNS: [&str; 5] = ["sweep_value", "statistic", "estimate", "ci_low", "ci_high"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlotRow {
    pub sweep_value: Option<f64>,
    pub statistic: String,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl PlotRow {
    fn new(v: Option<f64>, statistic: &str, e: Estimate) -> Self {
        Self { sweep_value: v, statistic: statistic.into(), estimate: e.mean, ci_low: e.ci_low, ci_high: e.ci_high }
    }
}

pub fn emit_plot_data(reports: &[PointReport]) -> Vec<PlotRow> {
    let mut rows = Vec::new();
    for r in reports {
        let v = r.sweep_value;
        if let Some(e) = &r.energy {
            for m in &e.moments {
                rows.push(PlotRow::new(v, &format!("sup_energy_p{}", m.p), m.sup_energy));
                rows.push(PlotRow::new(v, &format!("dissipation_p{}", m.p), m.dissipation));
                rows.push(PlotRow::new(v, &format!("energy_ratio_p{}", m.p), m.ratio));
            }
        }
        for te in &r.energy_at_report_times {
            rows.push(PlotRow::new(v, &format!("energy_t{}", te.t), te.estimate));
        }
        let n = (r.paths - r.aborted).max(1) as f64;
        let p = r.tau_r_fraction;
        let half = 1.96 * (p * (1.0 - p) / n).sqrt();
        rows.push(PlotRow { sweep_value: v, statistic: "tau_r_fraction".into(), estimate: p, ci_low: p - half, ci_high: p + half });
        if let Some(i) = &r.ito {
            rows.push(PlotRow::new(v, "ito_residual", i.max_abs_residual));
        }
        if let Some(pr) = &r.pressure {
            rows.push(PlotRow::new(v, "pressure_integral", pr.integral));
            rows.push(PlotRow::new(v, "pressure_defect", pr.defect));
        }
        if let Some(e) = r.flux {
            rows.push(PlotRow::new(v, "effective_flux", e));
        }
        if let Some(e) = r.riesz_commutator {
            rows.push(PlotRow::new(v, "riesz_commutator", e));
        }
        if let Some(nm) = &r.norms {
            rows.push(PlotRow::new(v, "holder_momentum", nm.holder_momentum));
            rows.push(PlotRow::new(v, "holder_y", nm.holder_y));
            rows.push(PlotRow::new(v, "holder_z", nm.holder_z));
        }
    }
    rows
}

/// Writes the rows; an empty set still gets the header.
pub fn write_plot_data(path: &Path, rows: &[PlotRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(PLOT_COLUMNS)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_bundle_has_header() {
        let tmp = tempfile::tempdir().unwrap();
        let p = tmp.path().join("x.csv");
        write_plot_data(&p, &emit_plot_data(&[])).unwrap();
        assert_eq!(std::fs::read_to_string(p).unwrap(), "sweep_value,statistic,estimate,ci_low,ci_high\n");
    }

    #[test]
    fn rows_follow_schema() {
        let tmp = tempfile::tempdir().unwrap();
        let p = tmp.path().join("x.csv");
        let row = PlotRow { sweep_value: Some(0.1), statistic: "effective_flux".into(), estimate: 1.0, ci_low: 0.5, ci_high: 1.5 };
        write_plot_data(&p, &[row]).unwrap();
        let text = std::fs::read_to_string(p).unwrap();
        assert_eq!(text.lines().nth(1), Some("0.1,effective_flux,1.0,0.5,1.5"));
    }
}
