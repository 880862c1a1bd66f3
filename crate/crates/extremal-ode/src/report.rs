//! Report emission: solution CSVs, JSON sidecars, ensemble record CSVs, and
//! a structural validator for the shipped JSON schemas.
//!
//! CSV column orders are normative: solutions are `t,y,x`, noise paths are
//! `t,omega`, ensemble records are the fixed column list below. Floats are
//! written in shortest round-trip form, so re-ingesting an emitted solution
//! as an external noise path reproduces its values exactly.

use std::io::Write;
use std::path::Path;

use serde_json::Value;

use crate::ensemble::McReport;
use crate::noise::NoisePath;
use crate::solver::SolutionPath;

/// Writes the `t,y,x` solution CSV.
pub fn write_solution_csv<W: Write>(sol: &SolutionPath, out: &mut W) -> std::io::Result<()> {
    writeln!(out, "t,y,x")?;
    for i in 0..sol.times().len() {
        writeln!(out, "{},{},{}", sol.times()[i], sol.y()[i], sol.x()[i])?;
    }
    Ok(())
}

/// The JSON sidecar accompanying a solution CSV: tag, route, verdict, stage
/// trail, settings and noise provenance, enough to replay the run.
pub fn solution_sidecar(
    sol: &SolutionPath,
    path: &NoisePath,
    drift: &Value,
    settings: &crate::solver::SolveSettings,
) -> Value {
    serde_json::json!({
        "tag": format!("{:?}", sol.tag()),
        "route": sol.route(),
        "verdict": sol.verdict(),
        "y0": sol.y0(),
        "projected": sol.projected(),
        "stage_trail": sol.trail(),
        "drift": drift,
        "noise": {
            "provenance": path.provenance(),
            "horizon": path.horizon(),
            "grid_points": path.times().len(),
        },
        "settings": settings,
    })
}

/// Flat per-path CSV of an ensemble report.
pub fn write_records_csv<W: Write>(report: &McReport, out: &mut W) -> std::io::Result<()> {
    writeln!(
        out,
        "index,seed,sup_gap,l1_gap,min_converged,max_converged,min_stages,max_stages,apriori_ok,iyanaga,nonneg_noise,lakshmikantham,error"
    )?;
    for r in &report.records {
        let verdict = |v: &Option<crate::certify::CertVerdict>| -> String {
            v.map(|x| format!("{x:?}").to_lowercase()).unwrap_or_default()
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.index,
            r.seed,
            r.sup_gap,
            r.l1_gap,
            r.min_converged,
            r.max_converged,
            r.min_stages,
            r.max_stages,
            r.apriori_ok,
            verdict(&r.iyanaga),
            verdict(&r.nonneg_noise),
            verdict(&r.lakshmikantham),
            r.error.clone().unwrap_or_default().replace(',', ";")
        )?;
    }
    Ok(())
}

/// Structural check of a document against one of the shipped schemas:
/// required keys must be present with the declared primitive type, walked
/// recursively through objects and array item schemas.
pub fn check_against_schema(schema: &Value, doc: &Value) -> Result<(), Vec<String>> {
    let mut problems = Vec::new();
    walk(schema, doc, "$", &mut problems);
    if problems.is_empty() {
        Ok(())
    } else {
        Err(problems)
    }
}

fn type_matches(ty: &str, v: &Value) -> bool {
    match ty {
        "object" => v.is_object(),
        "array" => v.is_array(),
        "string" => v.is_string(),
        "number" => v.is_number() || v.is_null(), // non-finite floats serialize as null
        "integer" => v.is_i64() || v.is_u64(),
        "boolean" => v.is_boolean(),
        "null" => v.is_null(),
        _ => true,
    }
}

fn walk(schema: &Value, doc: &Value, at: &str, problems: &mut Vec<String>) {
    if let Some(ty) = schema.get("type").and_then(Value::as_str) {
        if !type_matches(ty, doc) {
            problems.push(format!("{at}: expected {ty}"));
            return;
        }
    }
    if let Some(required) = schema.get("required").and_then(Value::as_array) {
        for key in required.iter().filter_map(Value::as_str) {
            if doc.get(key).is_none() {
                problems.push(format!("{at}: missing required key '{key}'"));
            }
        }
    }
    if let Some(props) = schema.get("properties").and_then(Value::as_object) {
        for (key, sub) in props {
            if let Some(val) = doc.get(key) {
                walk(sub, val, &format!("{at}.{key}"), problems);
            }
        }
    }
    if let (Some(items), Some(arr)) = (schema.get("items"), doc.as_array()) {
        for (i, val) in arr.iter().enumerate() {
            walk(items, val, &format!("{at}[{i}]"), problems);
        }
    }
}

/// Loads a schema shipped under `schemas/`.
pub fn load_schema(dir: &Path, name: &str) -> std::io::Result<Value> {
    let text = std::fs::read_to_string(dir.join(name))?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{PathGrid, Provenance};
    use crate::solver::{minimal_solution, SolveSettings};

    #[test]
    fn solution_csv_round_trips_as_noise_path() {
        let b = crate::drift::DriftSpec::linear(0.5);
        let grid = PathGrid::uniform(128).unwrap();
        let path = NoisePath::sample_brownian(3, &grid, 1.0);
        let sol = minimal_solution(&b, &path, &SolveSettings::with_grid(128)).unwrap();
        let mut csv = Vec::new();
        write_solution_csv(&sol, &mut csv).unwrap();
        // re-ingest the x column as an external noise path: swap header
        let text = String::from_utf8(csv).unwrap();
        let mut noise_csv = String::from("t,omega\n");
        for line in text.lines().skip(1) {
            let mut parts = line.split(',');
            let t = parts.next().unwrap();
            let _y = parts.next().unwrap();
            let x = parts.next().unwrap();
            noise_csv.push_str(&format!("{t},{x}\n"));
        }
        let back = NoisePath::from_csv(std::io::Cursor::new(noise_csv.as_bytes()), "mem").unwrap();
        for (i, v) in back.values().iter().enumerate() {
            assert_eq!(*v, sol.x()[i], "row {i}");
        }
    }

    #[test]
    fn schema_checker_flags_missing_and_mistyped() {
        let schema = serde_json::json!({
            "type": "object",
            "required": ["name", "count"],
            "properties": {
                "name": {"type": "string"},
                "count": {"type": "integer"},
                "rows": {"type": "array", "items": {"type": "object", "required": ["id"]}}
            }
        });
        let good = serde_json::json!({"name": "x", "count": 3, "rows": [{"id": 1}]});
        assert!(check_against_schema(&schema, &good).is_ok());
        let bad = serde_json::json!({"name": 7, "rows": [{}]});
        let problems = check_against_schema(&schema, &bad).unwrap_err();
        assert_eq!(problems.len(), 3, "{problems:?}");
    }

    #[test]
    fn provenance_serializes_for_replay() {
        let grid = PathGrid::uniform(64).unwrap();
        let path = NoisePath::sample_brownian(9, &grid, 1.0).transform_abs();
        let v = serde_json::to_value(path.provenance()).unwrap();
        assert_eq!(v["kind"], "abs-brownian");
        assert_eq!(v["seed"], 9);
        let p: Provenance = serde_json::from_value(v).unwrap();
        assert_eq!(&p, path.provenance());
    }
}
