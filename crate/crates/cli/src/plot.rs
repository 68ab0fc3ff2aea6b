//! Plot-ready CSV from `report.json` and `trace.json`.

use anyhow::{anyhow, Context, Result};
use serde_json::Value;

use crate::commands::Outcome;
use crate::output::{csv, num, OutDir};
use crate::{PlotArgs, PlotKind};

fn numbers(v: &Value, what: &str) -> Result<Vec<f64>> {
    v.as_array()
        .ok_or_else(|| anyhow!("{what} is not an array"))?
        .iter()
        .map(|x| x.as_f64().ok_or_else(|| anyhow!("{what} holds a non-number")))
        .collect()
}

fn number(v: &Value, what: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| anyhow!("{what} is missing or not a number"))
}

/// `series,t,value` rows, one series per trace in input order.
fn trace_rows(doc: &Value, key: &str) -> Result<(Vec<&'static str>, Vec<Vec<String>>)> {
    let traces = doc["traces"][key]
        .as_array()
        .filter(|t| !t.is_empty())
        .ok_or_else(|| anyhow!("report has no {key} trace (produce one with `hjlab chain`)"))?;
    let mut rows = Vec::new();
    for (series, tr) in traces.iter().enumerate() {
        let times = numbers(&tr["times"], "trace times")?;
        let values = numbers(&tr["values"], "trace values")?;
        for (t, v) in times.iter().zip(&values) {
            rows.push(vec![series.to_string(), num(*t), num(*v)]);
        }
    }
    let header = if key == "psi" {
        vec!["series", "t", "psi"]
    } else {
        vec!["series", "t", "phi"]
    };
    Ok((header, rows))
}

pub fn emit(a: &PlotArgs, out: &mut OutDir) -> Result<Outcome> {
    let text = std::fs::read_to_string(&a.input).with_context(|| format!("cannot read {}", a.input.display()))?;
    let doc: Value = serde_json::from_str(&text).with_context(|| format!("{} is not JSON", a.input.display()))?;
    let (header, rows) = match a.kind {
        PlotKind::Psi => trace_rows(&doc, "psi")?,
        PlotKind::Phi => trace_rows(&doc, "phi")?,
        PlotKind::ResidualVsS => {
            let rows = doc["residual_sweep"]["rows"]
                .as_array()
                .ok_or_else(|| anyhow!("trace has no residual sweep (run `hjlab semigroup --residual-steps ...`)"))?;
            let rows = rows
                .iter()
                .map(|r| Ok(vec![num(number(&r["s"], "s")?), num(number(&r["mean_abs"], "mean_abs")?)]))
                .collect::<Result<Vec<_>>>()?;
            (vec!["s", "mean_abs_residual"], rows)
        }
        PlotKind::DefectVsMesh => {
            let rows = doc["mesh_sweep"]
                .as_array()
                .ok_or_else(|| anyhow!("trace has no mesh sweep (run `hjlab semigroup --refine N`)"))?;
            let rows = rows
                .iter()
                .map(|r| {
                    let n = r["n"].as_u64().ok_or_else(|| anyhow!("mesh row without n"))?;
                    Ok(vec![
                        n.to_string(),
                        num(number(&r["mesh_h"], "mesh_h")?),
                        num(number(&r["defect"], "defect")?),
                    ])
                })
                .collect::<Result<Vec<_>>>()?;
            (vec!["n", "mesh_h", "defect"], rows)
        }
    };
    let name = a.out.clone().unwrap_or_else(|| {
        let kind = match a.kind {
            PlotKind::Psi => "psi",
            PlotKind::Phi => "phi",
            PlotKind::ResidualVsS => "residual_vs_s",
            PlotKind::DefectVsMesh => "defect_vs_mesh",
        };
        format!("{kind}.csv")
    });
    let count = rows.len();
    let path = out.write(&name, csv(&header, rows).as_bytes())?;
    Ok(Outcome {
        pass: true,
        message: format!("wrote {count} rows to {}", path.display()),
        summary: serde_json::json!({ "rows": count }),
    })
}
