//! JSON documents for realizations, structures and reports.
//!
//! Conventions: coefficients are strings `"p/q"` (or `"n"`), words are lists
//! of generator names, matrices are row-major lists of rows. Object keys are
//! emitted in sorted order, so equal values serialize to equal bytes.

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::classical::{CGen, CPoly};
use crate::discovery::{gen_names, NWSOStructure, SplitTerm, GEN_NAMES};
use crate::exact::{fmt_rat, parse_rat, Mat3, Rat};
use crate::ncpoly::{NCPoly, NcTable};
use crate::realization::{SklyaninParams, SklyaninRealization};

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum SchemaError {
    #[error("malformed document: {0}")]
    Json(String),
    #[error("field `{0}` is missing or has the wrong type")]
    Field(String),
    #[error("unknown generator `{0}`")]
    Generator(String),
    #[error("bad coefficient `{0}`")]
    Coefficient(String),
    #[error("unsupported schema version {0}")]
    Version(u64),
}

pub fn rat_json(r: &Rat) -> Value {
    Value::String(fmt_rat(r))
}

fn rat_from(v: &Value) -> Result<Rat, SchemaError> {
    let s = v
        .as_str()
        .ok_or_else(|| SchemaError::Coefficient(v.to_string()))?;
    parse_rat(s).map_err(|_| SchemaError::Coefficient(s.to_string()))
}

pub fn mat_json(m: &Mat3) -> Value {
    Value::Array(
        m.0.iter()
            .map(|row| Value::Array(row.iter().map(rat_json).collect()))
            .collect(),
    )
}

fn mat_from(v: &Value) -> Result<Mat3, SchemaError> {
    let rows = v.as_array().filter(|r| r.len() == 3);
    let rows = rows.ok_or_else(|| SchemaError::Field("matrix".into()))?;
    let mut flat = Vec::with_capacity(9);
    for row in rows {
        let row = row
            .as_array()
            .filter(|r| r.len() == 3)
            .ok_or_else(|| SchemaError::Field("matrix row".into()))?;
        for x in row {
            flat.push(rat_from(x)?);
        }
    }
    Ok(Mat3::from_flat(&flat))
}

fn names_of(w: &[u8], names: &[&str]) -> Value {
    Value::Array(w.iter().map(|&g| json!(names[g as usize])).collect())
}

pub fn poly_json(p: &NCPoly<Rat>, names: &[&str]) -> Value {
    Value::Array(
        p.terms()
            .map(|(w, c)| json!({"coefficient": rat_json(c), "word": names_of(w, names)}))
            .collect(),
    )
}

pub fn cpoly_json(p: &CPoly) -> Value {
    Value::Array(
        p.terms()
            .map(|(m, c)| {
                json!({
                    "coefficient": rat_json(c),
                    "monomial": m.iter().map(|&g| CGen(g).name()).collect::<Vec<_>>(),
                })
            })
            .collect(),
    )
}

fn gen_index(name: &str, names: &[&str]) -> Result<u8, SchemaError> {
    names
        .iter()
        .position(|n| *n == name)
        .map(|i| i as u8)
        .ok_or_else(|| SchemaError::Generator(name.to_string()))
}

fn word_from(v: &Value, names: &[&str]) -> Result<Vec<u8>, SchemaError> {
    v.as_array()
        .ok_or_else(|| SchemaError::Field("word".into()))?
        .iter()
        .map(|g| {
            let s = g
                .as_str()
                .ok_or_else(|| SchemaError::Field("word".into()))?;
            gen_index(s, names)
        })
        .collect()
}

fn poly_from(v: &Value, names: &[&str]) -> Result<NCPoly<Rat>, SchemaError> {
    let mut p = NCPoly::zero();
    for t in v
        .as_array()
        .ok_or_else(|| SchemaError::Field("terms".into()))?
    {
        let c = rat_from(t.get("coefficient").unwrap_or(&Value::Null))?;
        let w = word_from(t.get("word").unwrap_or(&Value::Null), names)?;
        p.add_term(w, c);
    }
    Ok(p)
}

pub fn params_json(p: &SklyaninParams) -> Value {
    let mut m = Map::new();
    for (name, v) in SklyaninParams::NAMES.iter().zip(p.as_array()) {
        m.insert(name.to_string(), rat_json(v));
    }
    Value::Object(m)
}

fn params_from(v: &Value) -> Result<SklyaninParams, SchemaError> {
    let vals: Result<Vec<Rat>, SchemaError> = SklyaninParams::NAMES
        .iter()
        .map(|n| rat_from(v.get(n).ok_or_else(|| SchemaError::Field(n.to_string()))?))
        .collect();
    let vals: [Rat; 6] = vals?.try_into().expect("six parameters");
    Ok(SklyaninParams::new(vals))
}

/// Decisions that shaped a structure, stored with it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    /// How `J_jk` is read off the quadratic expansion.
    pub j_convention: String,
    /// Which `{s, t}` action the classical comparison uses.
    pub st_action: String,
    /// Which closed form of `Q` is used alongside the linear solve.
    pub q_formula: String,
    pub t_normalization: String,
    pub xi_kernel_dimension: usize,
    pub tt_kernel_dimension: usize,
    /// What was done with free directions of a non-unique solve.
    pub free_coordinates: String,
}

impl Provenance {
    pub fn new(t_normalization: String, xi_kernel: usize, tt_kernel: usize) -> Self {
        Provenance {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            j_convention: "direct".into(),
            st_action: "corrected".into(),
            q_formula: "corrected".into(),
            t_normalization,
            xi_kernel_dimension: xi_kernel,
            tt_kernel_dimension: tt_kernel,
            free_coordinates: "zero".into(),
        }
    }
}

pub fn block_name(a: u8, b: u8) -> &'static str {
    let class = |g: u8| match g {
        0 => 0,
        1..=3 => 1,
        _ => 2,
    };
    match (class(a.min(b)), class(a.max(b))) {
        (1, 1) => "SS",
        (0, 1) => "QS",
        (1, 2) => "ST",
        (0, 2) => "QT",
        (2, 2) => "TT",
        _ => "other",
    }
}

fn split_json(terms: &[SplitTerm]) -> Value {
    Value::Array(
        terms
            .iter()
            .map(|t| {
                json!({
                    "coefficient": rat_json(&t.coefficient),
                    "a_part": names_of(&t.a_part, &GEN_NAMES),
                    "u": GEN_NAMES[t.u as usize],
                })
            })
            .collect(),
    )
}

pub fn table_json(table: &NcTable<Rat>) -> Value {
    let names = table.name_refs();
    let mut blocks: Map<String, Value> = Map::new();
    for (&(a, b), p) in table.entries() {
        let entry = json!({
            "left": names[a as usize],
            "right": names[b as usize],
            "terms": poly_json(p, &names),
        });
        blocks
            .entry(block_name(a, b))
            .or_insert_with(|| Value::Array(Vec::new()))
            .as_array_mut()
            .unwrap()
            .push(entry);
    }
    Value::Object(blocks)
}

pub fn emit_structure(s: &NWSOStructure, prov: &Provenance) -> Value {
    let mut mats = Map::new();
    for (name, m) in GEN_NAMES.iter().zip(&s.matrices) {
        mats.insert(name.to_string(), mat_json(m));
    }
    let r_map: Vec<Value> = s
        .r_map
        .iter()
        .map(|(&(t, x), terms)| {
            json!({"t": GEN_NAMES[t as usize], "s": GEN_NAMES[x as usize], "terms": split_json(terms)})
        })
        .collect();
    let t_map: Vec<Value> = s
        .t_map
        .iter()
        .map(|(&(a, b), terms)| {
            json!({"left": GEN_NAMES[a as usize], "right": GEN_NAMES[b as usize], "terms": split_json(terms)})
        })
        .collect();
    let sigma: Vec<Value> = s
        .sigma
        .iter()
        .map(|(&(a, b), p)| {
            json!({"left": GEN_NAMES[a as usize], "right": GEN_NAMES[b as usize], "terms": poly_json(p, &GEN_NAMES)})
        })
        .collect();
    json!({
        "schema_version": SCHEMA_VERSION,
        "kind": "nwso_structure",
        "generators": GEN_NAMES,
        "parameters": s.realization.params.as_ref().map(params_json),
        "matrix_layout": "row-major",
        "matrices": mats,
        "tables": table_json(&s.table),
        "r_map": r_map,
        "t_map": t_map,
        "sigma": sigma,
        "degree_cap": s.degree_cap,
        "provenance": serde_json::to_value(prov).expect("provenance serializes"),
    })
}

/// The parts of a structure document needed to re-check or rebuild it.
#[derive(Debug, Clone)]
pub struct StoredStructure {
    pub realization: SklyaninRealization,
    pub matrices: Vec<Mat3>,
    pub table: NcTable<Rat>,
    pub degree_cap: usize,
    pub provenance: Provenance,
}

impl StoredStructure {
    /// Recomputes the derived maps from the stored table.
    pub fn reassemble(&self) -> Result<NWSOStructure, crate::discovery::DiscoveryError> {
        NWSOStructure::assemble(
            self.realization.clone(),
            self.matrices.clone(),
            self.table.clone(),
            self.degree_cap,
        )
    }
}

pub fn parse_structure(text: &str) -> Result<StoredStructure, SchemaError> {
    let v: Value = serde_json::from_str(text).map_err(|e| SchemaError::Json(e.to_string()))?;
    let version = v
        .get("schema_version")
        .and_then(Value::as_u64)
        .ok_or_else(|| SchemaError::Field("schema_version".into()))?;
    if version != SCHEMA_VERSION {
        return Err(SchemaError::Version(version));
    }
    let field = |k: &str| v.get(k).ok_or_else(|| SchemaError::Field(k.into()));
    let gens: Vec<String> = field("generators")?
        .as_array()
        .ok_or_else(|| SchemaError::Field("generators".into()))?
        .iter()
        .map(|g| g.as_str().map(String::from))
        .collect::<Option<_>>()
        .ok_or_else(|| SchemaError::Field("generators".into()))?;
    if gens != gen_names() {
        return Err(SchemaError::Field("generators".into()));
    }
    let mats_v = field("matrices")?;
    let matrices: Vec<Mat3> = GEN_NAMES
        .iter()
        .map(|n| {
            mat_from(
                mats_v
                    .get(n)
                    .ok_or_else(|| SchemaError::Field(format!("matrices.{n}")))?,
            )
        })
        .collect::<Result<_, _>>()?;
    let params = match field("parameters")? {
        Value::Null => None,
        p => Some(params_from(p)?),
    };
    let mut table = NcTable::new(gen_names());
    let names = GEN_NAMES;
    let blocks = field("tables")?
        .as_object()
        .ok_or_else(|| SchemaError::Field("tables".into()))?;
    for entries in blocks.values() {
        for e in entries
            .as_array()
            .ok_or_else(|| SchemaError::Field("tables".into()))?
        {
            let side = |k: &str| -> Result<u8, SchemaError> {
                let s = e.get(k).and_then(Value::as_str);
                gen_index(s.ok_or_else(|| SchemaError::Field(k.into()))?, &names)
            };
            let (a, b) = (side("left")?, side("right")?);
            if a == b {
                return Err(SchemaError::Field(
                    "tables: bracket of a generator with itself".into(),
                ));
            }
            table.set(
                a,
                b,
                poly_from(e.get("terms").unwrap_or(&Value::Null), &names)?,
            );
        }
    }
    let degree_cap = field("degree_cap")?
        .as_u64()
        .ok_or_else(|| SchemaError::Field("degree_cap".into()))? as usize;
    let provenance: Provenance = serde_json::from_value(field("provenance")?.clone())
        .map_err(|e| SchemaError::Field(format!("provenance: {e}")))?;
    let realization = SklyaninRealization {
        params,
        s: [
            matrices[1].clone(),
            matrices[2].clone(),
            matrices[3].clone(),
        ],
        q: matrices[0].clone(),
    };
    Ok(StoredStructure {
        realization,
        matrices,
        table,
        degree_cap,
        provenance,
    })
}

/// Pretty-printed document with a trailing newline.
pub fn to_document(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}
