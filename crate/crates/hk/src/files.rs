//! Structure files and run reports: the on-disk formats of the `hk` tool.
//!
//! Structure files are JSON with either explicit polynomial/rational form
//! entries or a reference to a built-in model. Reports serialize to a
//! canonical key-ordered text form with floats written at 17 significant
//! digits, so identical inputs and seed produce identical bytes except for
//! the wall-time field.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::chart::{ChartSpec, CheckRecord, FamilyField, FieldEntry, FormField, Poly};
use crate::error::{Error, Result};
use crate::zoo::{self, ZooModel};

/// One polynomial term: coefficient and exponent tuple.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermDef {
    pub c: f64,
    pub e: Vec<u32>,
}

/// One stored matrix entry of an explicit form, upper triangle only.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntryDef {
    pub i: usize,
    pub j: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub re: Vec<TermDef>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub im: Vec<TermDef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub den: Option<Vec<TermDef>>,
}

/// The three accepted shapes of the `forms` block.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FormsDef {
    Builtin {
        builtin: String,
        #[serde(default)]
        params: BTreeMap<String, f64>,
    },
    PlusThree {
        omega_plus: Vec<EntryDef>,
        omega_3: Vec<EntryDef>,
    },
    Triple {
        omega_1: Vec<EntryDef>,
        omega_2: Vec<EntryDef>,
        omega_3: Vec<EntryDef>,
    },
}

/// A parsed structure file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StructureFile {
    pub format_version: u32,
    pub r: usize,
    pub chart: ChartSpec,
    pub forms: FormsDef,
}

pub const FORMAT_VERSION: u32 = 1;

impl StructureFile {
    pub fn parse(text: &str) -> Result<StructureFile> {
        let file: StructureFile = serde_json::from_str(text)
            .map_err(|e| Error::Malformed(diagnose_parse_error(text, e)))?;
        file.validate()?;
        Ok(file)
    }

    pub fn validate(&self) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Malformed(format!(
                "format_version {} not recognized (expected {FORMAT_VERSION})",
                self.format_version
            )));
        }
        if self.r == 0 {
            return Err(Error::Malformed("r must be at least 1".into()));
        }
        let dim = 4 * self.r;
        if self.chart.coords.len() != dim {
            return Err(Error::Malformed(format!(
                "chart.coords has {} names but r = {} needs {dim}",
                self.chart.coords.len(),
                self.r
            )));
        }
        ChartSpec::new(
            self.chart.coords.clone(),
            self.chart.bounds.clone(),
            self.chart.grid.clone(),
        )
        .map_err(|e| Error::Malformed(format!("chart: {e}")))?;
        let check_entries = |name: &str, entries: &[EntryDef]| -> Result<()> {
            for e in entries {
                if e.i >= e.j {
                    return Err(Error::Malformed(format!(
                        "{name}: entry ({}, {}) must satisfy i < j",
                        e.i, e.j
                    )));
                }
                if e.j >= dim {
                    return Err(Error::Malformed(format!(
                        "{name}: entry index {} out of range for dimension {dim}",
                        e.j
                    )));
                }
                for t in e.re.iter().chain(&e.im).chain(e.den.iter().flatten()) {
                    if t.e.len() != dim {
                        return Err(Error::Malformed(format!(
                            "{name}: exponent tuple {:?} must have length {dim}",
                            t.e
                        )));
                    }
                    if !t.c.is_finite() {
                        return Err(Error::Malformed(format!(
                            "{name}: coefficient {} is not finite",
                            t.c
                        )));
                    }
                }
            }
            Ok(())
        };
        match &self.forms {
            FormsDef::Builtin { builtin, params } => {
                // reject unknown names/params early; the model is rebuilt on use
                zoo_model_from_params(builtin, params)
                    .map_err(|e| Error::Malformed(format!("forms.builtin: {e}")))?;
            }
            FormsDef::PlusThree {
                omega_plus,
                omega_3,
            } => {
                check_entries("forms.omega_plus", omega_plus)?;
                check_entries("forms.omega_3", omega_3)?;
            }
            FormsDef::Triple {
                omega_1,
                omega_2,
                omega_3,
            } => {
                check_entries("forms.omega_1", omega_1)?;
                check_entries("forms.omega_2", omega_2)?;
                check_entries("forms.omega_3", omega_3)?;
            }
        }
        Ok(())
    }

    /// Converts to an evaluable family over its chart.
    pub fn to_family(&self) -> Result<(FamilyField, ChartSpec)> {
        let dim = 4 * self.r;
        let chart = ChartSpec::new(
            self.chart.coords.clone(),
            self.chart.bounds.clone(),
            self.chart.grid.clone(),
        )?;
        let family = match &self.forms {
            FormsDef::Builtin { builtin, params } => {
                let model = zoo_model_from_params(builtin, params)?;
                model.family_field().clone()
            }
            FormsDef::PlusThree {
                omega_plus,
                omega_3,
            } => FamilyField::PlusThree {
                plus: explicit_field(dim, omega_plus),
                w3: explicit_field(dim, omega_3),
            },
            FormsDef::Triple {
                omega_1,
                omega_2,
                omega_3,
            } => FamilyField::Triple {
                w1: explicit_field(dim, omega_1),
                w2: explicit_field(dim, omega_2),
                w3: explicit_field(dim, omega_3),
            },
        };
        family.validate_on_chart(&chart)?;
        Ok((family, chart))
    }

    /// Serializes a zoo model as a builtin-kind structure file.
    pub fn from_model(model: &ZooModel) -> StructureFile {
        StructureFile {
            format_version: FORMAT_VERSION,
            r: model.quaternionic_rank(),
            chart: model.chart().clone(),
            forms: FormsDef::Builtin {
                builtin: model.name().to_string(),
                params: model.builtin_params().clone(),
            },
        }
    }

    pub fn to_canonical_json(&self) -> Result<String> {
        let value = serde_json::to_value(self).map_err(|e| Error::Malformed(e.to_string()))?;
        Ok(canonical_json(&value))
    }
}

/// Names the offending field when the untagged `forms` block is the reason
/// deserialization failed; serde's generic message does not say which key is
/// missing.
fn diagnose_parse_error(text: &str, err: serde_json::Error) -> String {
    let generic = err.to_string();
    if !generic.contains("untagged enum FormsDef") {
        return generic;
    }
    let Ok(value) = serde_json::from_str::<Value>(text) else {
        return generic;
    };
    let Some(forms) = value.get("forms").and_then(|f| f.as_object()) else {
        return "the forms block must be a JSON object".into();
    };
    let keys: Vec<&str> = forms.keys().map(String::as_str).collect();
    format!(
        "the forms block must contain {{omega_plus, omega_3}}, \
         {{omega_1, omega_2, omega_3}} or {{builtin}}; found keys {keys:?}"
    )
}

/// Rebuilds a zoo model from a builtin block, round-tripping the serialized
/// parameter map.
fn zoo_model_from_params(name: &str, params: &BTreeMap<String, f64>) -> Result<ZooModel> {
    // serialized multi-center params carry per-center keys; translate back
    if params
        .keys()
        .any(|k| k.starts_with("center_") || k == "n_centers")
    {
        let epsilon = params.get("epsilon").copied().unwrap_or(1.0);
        let n = params.get("n_centers").copied().unwrap_or(0.0) as usize;
        let mut centers = Vec::new();
        for k in 0..n {
            let get = |key: String| -> Result<f64> {
                params
                    .get(&key)
                    .copied()
                    .ok_or_else(|| Error::Malformed(format!("missing builtin parameter {key}")))
            };
            centers.push(zoo::GhCenter {
                position: [
                    get(format!("center_{k}_x"))?,
                    get(format!("center_{k}_y"))?,
                    get(format!("center_{k}_z"))?,
                ],
                mass: get(format!("mass_{k}"))?,
            });
        }
        return zoo::gibbons_hawking(epsilon, centers, zoo_default_chart(name)?);
    }
    zoo::get_model(name, params)
}

fn zoo_default_chart(name: &str) -> Result<ChartSpec> {
    // per-center serialized models reuse their shipped chart
    let model = zoo::get_model(name, &BTreeMap::new())?;
    Ok(model.chart().clone())
}

fn poly_from_terms(re: &[TermDef], im: &[TermDef], dim: usize) -> Poly {
    let mut terms: Vec<(Complex64, Vec<u32>)> = Vec::new();
    for t in re {
        terms.push((Complex64::new(t.c, 0.0), t.e.clone()));
    }
    for t in im {
        terms.push((Complex64::new(0.0, t.c), t.e.clone()));
    }
    if terms.is_empty() {
        terms.push((Complex64::new(0.0, 0.0), vec![0; dim]));
    }
    Poly { terms }
}

fn explicit_field(dim: usize, entries: &[EntryDef]) -> FormField {
    FormField::Explicit {
        dim,
        entries: entries
            .iter()
            .map(|e| FieldEntry {
                i: e.i,
                j: e.j,
                num: poly_from_terms(&e.re, &e.im, dim),
                den: e.den.as_ref().map(|d| poly_from_terms(d, &[], dim)),
            })
            .collect(),
    }
}

/// A verification run: tool metadata, configuration echo, check records and
/// the aggregate outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub tool_version: String,
    pub input_digest: String,
    pub seed: u64,
    pub config: Value,
    pub checks: Vec<CheckRecord>,
    pub aggregate_pass: bool,
    pub wall_time_ms: f64,
}

impl RunReport {
    pub fn to_canonical_json(&self) -> Result<String> {
        let value = serde_json::to_value(self).map_err(|e| Error::Malformed(e.to_string()))?;
        Ok(canonical_json(&value))
    }
}

/// FNV-1a hash of the input bytes, hex encoded; identifies inputs in
/// reports.
pub fn input_digest(bytes: &[u8]) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

/// Canonical JSON: keys in sorted order (the default map is ordered), two
/// space indentation, floats at 17 significant digits so doubles round-trip.
pub fn canonical_json(value: &Value) -> String {
    let mut out = String::new();
    write_value(value, 0, &mut out);
    out.push('\n');
    out
}

fn write_value(value: &Value, indent: usize, out: &mut String) {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(u) = n.as_u64() {
                out.push_str(&u.to_string());
            } else if let Some(i) = n.as_i64() {
                out.push_str(&i.to_string());
            } else {
                let f = n.as_f64().unwrap_or(0.0);
                out.push_str(&format_float(f));
            }
        }
        Value::String(s) => {
            out.push_str(&serde_json::to_string(s).expect("string serialization"));
        }
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push('[');
            for (k, item) in items.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                out.push('\n');
                push_indent(indent + 1, out);
                write_value(item, indent + 1, out);
            }
            out.push('\n');
            push_indent(indent, out);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push('{');
            for (k, (key, item)) in map.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                out.push('\n');
                push_indent(indent + 1, out);
                out.push_str(&serde_json::to_string(key).expect("key serialization"));
                out.push_str(": ");
                write_value(item, indent + 1, out);
            }
            out.push('\n');
            push_indent(indent, out);
            out.push('}');
        }
    }
}

fn push_indent(indent: usize, out: &mut String) {
    for _ in 0..indent {
        out.push_str("  ");
    }
}

/// 17 significant digits, enough to reconstruct the exact double.
pub fn format_float(f: f64) -> String {
    if f == f.trunc() && f.abs() < 1e15 {
        // keep small integers readable
        format!("{:.1}", f)
    } else {
        format!("{:.16e}", f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_file_json() -> String {
        let model = zoo::flat_hk(1).unwrap();
        StructureFile::from_model(&model)
            .to_canonical_json()
            .unwrap()
    }

    #[test]
    fn roundtrip_parse_serialize() {
        let text = flat_file_json();
        let parsed = StructureFile::parse(&text).unwrap();
        let again = parsed.to_canonical_json().unwrap();
        assert_eq!(text, again);
    }

    #[test]
    fn builtin_file_evaluates() {
        let text = flat_file_json();
        let parsed = StructureFile::parse(&text).unwrap();
        let (family, chart) = parsed.to_family().unwrap();
        let fam = family.family_at(&chart, &chart.midpoint()).unwrap();
        assert_eq!(fam.dim(), 4);
    }

    #[test]
    fn version_and_field_validation() {
        let text = flat_file_json().replace("\"format_version\": 1", "\"format_version\": 9");
        assert!(matches!(
            StructureFile::parse(&text),
            Err(Error::Malformed(m)) if m.contains("format_version")
        ));
        let bad_entries = r#"{
            "format_version": 1,
            "r": 1,
            "chart": {"coords": ["t","x","y","z"], "box": [[0.0,1.0],[0.0,1.0],[0.0,1.0],[0.0,1.0]], "grid": [3,3,3,3]},
            "forms": {"omega_plus": [{"i": 2, "j": 1, "re": [{"c": 1.0, "e": [0,0,0,0]}]}], "omega_3": []}
        }"#;
        assert!(matches!(
            StructureFile::parse(bad_entries),
            Err(Error::Malformed(m)) if m.contains("i < j")
        ));
        let bad_exponent = bad_entries
            .replace("\"i\": 2, \"j\": 1", "\"i\": 0, \"j\": 1")
            .replace("[0,0,0,0]", "[0,0]");
        assert!(matches!(
            StructureFile::parse(&bad_exponent),
            Err(Error::Malformed(m)) if m.contains("exponent")
        ));
    }

    #[test]
    fn digest_is_stable() {
        assert_eq!(input_digest(b""), "cbf29ce484222325");
        assert_eq!(input_digest(b"hk"), input_digest(b"hk"));
        assert_ne!(input_digest(b"hk"), input_digest(b"kh"));
    }

    #[test]
    fn canonical_floats() {
        assert_eq!(format_float(1.0), "1.0");
        assert_eq!(format_float(0.5), "5.0000000000000000e-1");
        let x = 0.123_456_789_012_345_67_f64;
        let parsed: f64 = format_float(x).parse().unwrap();
        assert_eq!(parsed, x);
    }

    #[test]
    fn canonical_json_sorted_and_parseable() {
        let v = serde_json::json!({"zeta": 1.5, "alpha": [1, 2], "m": {"b": true, "a": null}});
        let text = canonical_json(&v);
        let alpha_pos = text.find("alpha").unwrap();
        let zeta_pos = text.find("zeta").unwrap();
        assert!(alpha_pos < zeta_pos);
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["alpha"][0], serde_json::json!(1));
    }
}
