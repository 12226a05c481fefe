//! CSV and JSON writers plus the terminal check table.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use qtraj_core::thermo::{simpson_total, Ledger};

use crate::pipeline::Analysis;
use crate::CliError;

/// Column order of the per-node ledger CSV. Rates first, then running
/// integrals, then the three headline residuals.
const CSV_HEADER: &str = "t,U,Qdot_conv,Wdot_conv,Qdot_tbsta,Wdot_tbsta,Wdot_cd,Sdot,Sirdot,\
qdot_sc,wdot_sc,cum_U,cum_Q_tbsta,cum_W_tbsta,cum_Wcd,cum_S,cum_Sir,\
res_firstlaw,res_reconstruction,res_relent";

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Validation(format!("cannot write {}: {e}", path.display()))
}

fn ensure_parent(path: &Path) -> Result<(), CliError> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => {
            std::fs::create_dir_all(dir).map_err(|e| io_err(path, e))
        }
        _ => Ok(()),
    }
}

/// Writes one row per node in a fixed full-precision format so identical
/// runs produce byte-identical files.
pub fn write_csv(path: &Path, ledger: &Ledger) -> Result<(), CliError> {
    ensure_parent(path)?;
    let file = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    writeln!(out, "{CSV_HEADER}").map_err(|e| io_err(path, e))?;
    for (row, cum) in ledger.rows.iter().zip(&ledger.cumulative) {
        let fields = [
            row.t,
            row.u,
            row.qdot_conv,
            row.wdot_conv,
            row.qdot_tbsta,
            row.wdot_tbsta,
            row.wdot_cd,
            row.sdot,
            row.sirdot,
            row.qdot_sc,
            row.wdot_sc,
            cum.u,
            cum.q_tbsta,
            cum.w_tbsta,
            cum.w_cd,
            cum.s,
            cum.sir,
            row.residuals.first_law,
            row.residuals.reconstruction,
            row.residuals.rel_entropy_identity,
        ];
        let mut line = String::with_capacity(24 * fields.len());
        for (i, v) in fields.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            write!(line, "{v:.16e}").expect("formatting into a String cannot fail");
        }
        writeln!(out, "{line}").map_err(|e| io_err(path, e))?;
    }
    out.flush().map_err(|e| io_err(path, e))
}

/// Simpson-rule totals where the grid allows them (uniform, odd node count);
/// `None` otherwise. The exact differences `delta_u` and `delta_entropy` need
/// no quadrature and are not repeated here.
fn simpson_totals(ledger: &Ledger) -> Option<serde_json::Value> {
    let ts: Vec<f64> = ledger.rows.iter().map(|r| r.t).collect();
    let total = |pick: fn(&qtraj_core::thermo::LedgerRow) -> f64| {
        let ys: Vec<f64> = ledger.rows.iter().map(pick).collect();
        simpson_total(&ts, &ys).ok()
    };
    Some(serde_json::json!({
        "heat": total(|r| r.qdot_tbsta)?,
        "work": total(|r| r.wdot_tbsta)?,
        "cd_work": total(|r| r.wdot_cd)?,
        "entropy_production": total(|r| r.sirdot)?,
    }))
}

/// Builds the summary document: provenance, totals, residual maxima, the
/// check table, and every audit verdict.
pub fn summary_value(analysis: &Analysis) -> serde_json::Value {
    let ledger = &analysis.ledger;
    let totals = serde_json::json!({
        "delta_u": ledger.totals.delta_u,
        "heat": ledger.totals.heat,
        "work": ledger.totals.work,
        "cd_work": ledger.totals.cd_work,
        "delta_entropy": ledger.totals.delta_entropy,
        "entropy_production": ledger.totals.entropy_production,
    });
    let r = &ledger.max_residuals;
    let max_residuals = serde_json::json!({
        "first_law": r.first_law,
        "first_law_sc": r.first_law_sc,
        "heat_split": r.heat_split,
        "wcd_routes": r.wcd_routes,
        "sir_routes": r.sir_routes,
        "rel_entropy_identity": r.rel_entropy_identity,
        "reconstruction": r.reconstruction,
    });
    let checks: Vec<serde_json::Value> = analysis
        .checks
        .iter()
        .map(|c| {
            serde_json::json!({
                "name": c.name,
                "value": c.value,
                "limit": c.limit,
                "pass": c.pass(),
            })
        })
        .collect();
    let audits: Vec<serde_json::Value> = analysis
        .audits
        .iter()
        .map(|a| {
            serde_json::json!({
                "label": a.label,
                "beta": a.beta,
                "applicable": a.applicable,
                "gating": a.gating,
                "note": a.note,
                "holds": a.report.holds,
                "equality": a.report.equality,
                "min_margin": a.report.min_margin,
                "t_at_min": a.report.t_at_min,
                "violations": a.report.violations,
                "worst_violation": a.report.worst_violation,
            })
        })
        .collect();
    serde_json::json!({
        "provenance": analysis.provenance,
        "nodes": ledger.rows.len(),
        "totals": totals,
        "totals_simpson": simpson_totals(ledger),
        "max_residuals": max_residuals,
        "trace_drift": analysis.max_trace_drift,
        "checks": checks,
        "bound_audit": audits,
    })
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), CliError> {
    ensure_parent(path)?;
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Validation(format!("summary serialization: {e}")))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

/// Human-readable verdict table for the terminal.
pub fn render_table(analysis: &Analysis) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} ({} nodes, derivatives from {})",
        analysis.label,
        analysis.ledger.rows.len(),
        analysis.derivative_source
    );
    let t = &analysis.ledger.totals;
    let _ = writeln!(
        out,
        "  totals: dU = {:+.6e}  Q = {:+.6e}  W = {:+.6e}  Wcd = {:+.6e}  dS = {:+.6e}  Sir = {:+.6e}",
        t.delta_u, t.heat, t.work, t.cd_work, t.delta_entropy, t.entropy_production
    );
    let _ = writeln!(out, "  identity checks (max residual vs limit):");
    for c in &analysis.checks {
        let verdict = if c.pass() { "PASS" } else { "FAIL" };
        let _ = writeln!(
            out,
            "    {:<16} {:>12.3e}  <= {:>9.1e}   {verdict}",
            c.name, c.value, c.limit
        );
    }
    let _ = writeln!(out, "  second-law audits (margin = Sirdot - beta*Wdot_cd):");
    for a in &analysis.audits {
        let verdict = if !a.gating {
            "INFO"
        } else if a.report.holds {
            "PASS"
        } else {
            "FAIL"
        };
        let equality = if a.report.equality { ", equality" } else { "" };
        let _ = writeln!(
            out,
            "    {:<10} beta = {:<8} min margin {:+.3e} at t = {:.4} ({} violations{equality})   {verdict}",
            a.label, a.beta, a.report.min_margin, a.report.t_at_min, a.report.violations
        );
        let _ = writeln!(out, "      note: {}", a.note);
    }
    out
}
