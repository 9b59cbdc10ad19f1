//! Browser bindings for the demo page. Every export returns a JSON string.

use serde::Serialize;
use wasm_bindgen::prelude::*;
use zigzag_core::analysis::{lower_bound_ratio, measured_ratio, predicted_ratio, PredictionKind};
use zigzag_core::codec::{decode_erasures, encode, rebuild_plan};
use zigzag_core::construct::{build_code, CodeParams, CodeSpec, Column, Scheme};
use zigzag_core::gf::Elem;
use zigzag_core::num_rational::Rational64;

/// Largest `p * k` the page will build.
const MAX_CELLS: usize = 1 << 16;

/// Picks the construction for a standard-basis code.
fn standard_code(m: usize, r: u32, s: usize) -> Result<CodeSpec, String> {
    let scheme = match (r, s) {
        (2, 1) => Scheme::Cons3,
        (2, _) => Scheme::Cons4,
        (3, 1) => Scheme::R3,
        _ => return Err(format!("no built-in construction for r={r}, s={s}")),
    };
    if m == 0 || (r as usize).pow(m as u32) * (m + 1) * s > MAX_CELLS {
        return Err("choose a smaller m".into());
    }
    build_code(&CodeParams::standard(m, r, s, scheme)).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Fraction {
    num: i64,
    den: i64,
    approx: f64,
}

impl From<Rational64> for Fraction {
    fn from(x: Rational64) -> Self {
        Fraction {
            num: *x.numer(),
            den: *x.denom(),
            approx: *x.numer() as f64 / *x.denom() as f64,
        }
    }
}

#[derive(Serialize)]
struct NodeInfo {
    label: String,
    /// Rows read from this node, one flag per row.
    read: Vec<bool>,
}

#[derive(Serialize)]
struct AccessMap {
    code: String,
    rows: usize,
    erased: usize,
    nodes: Vec<NodeInfo>,
    /// Row labels as radix-r digit strings.
    row_labels: Vec<String>,
    cells_read: usize,
    ratio: Fraction,
}

fn label(spec: &CodeSpec, node: usize) -> String {
    match spec.column_at(node) {
        Column::Data(c) => {
            let id = spec.column_id(c);
            let v = spec.family().vector(id.family);
            if spec.s() == 1 {
                format!("C{c} ({v})")
            } else {
                format!("C{c} ({v}, copy {})", id.copy)
            }
        }
        Column::Parity(0) => "R (rows)".into(),
        Column::Parity(s) => format!("Z{s} (zigzag)"),
    }
}

fn row_label(x: usize, r: u32, m: usize) -> String {
    let mut digits = vec![0; m];
    let mut v = x;
    for d in digits.iter_mut().rev() {
        *d = v % r as usize;
        v /= r as usize;
    }
    digits.iter().map(|d| d.to_string()).collect()
}

pub fn access_map_json(m: usize, r: u32, s: usize, erased: usize) -> Result<String, String> {
    let spec = standard_code(m, r, s)?;
    if erased >= spec.n() {
        return Err(format!("node {erased} does not exist (n = {})", spec.n()));
    }
    let plan = rebuild_plan(&spec, erased);
    let nodes = plan
        .reads
        .iter()
        .enumerate()
        .map(|(node, rows)| {
            let mut read = vec![false; spec.p()];
            for &x in rows {
                read[x] = true;
            }
            NodeInfo {
                label: label(&spec, node),
                read,
            }
        })
        .collect();
    let cells = plan.cells_read();
    let map = AccessMap {
        code: spec.to_string(),
        rows: spec.p(),
        erased,
        nodes,
        row_labels: (0..spec.p()).map(|x| row_label(x, r, m)).collect(),
        cells_read: cells,
        ratio: Rational64::new(cells as i64, plan.cells_available(&spec) as i64).into(),
    };
    serde_json::to_string(&map).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct RatioRow {
    m: usize,
    s: usize,
    k: usize,
    field: String,
    predicted: Fraction,
    bound: bool,
    measured: Option<Fraction>,
    lower_bound: Fraction,
}

/// Ratios for `m = 1..=max_m` at fixed `r` and `s`. Measured values are
/// included while the code is small enough to rebuild every column.
pub fn ratio_table_json(max_m: usize, r: u32, s: usize) -> Result<String, String> {
    let mut rows = Vec::new();
    for m in 1..=max_m {
        let Ok(spec) = standard_code(m, r, s) else {
            break;
        };
        let pred = predicted_ratio(&spec);
        let measure = spec.p() * spec.k() * spec.k() <= 1 << 18;
        rows.push(RatioRow {
            m,
            s,
            k: spec.k(),
            field: spec.field().token(),
            predicted: pred.value.into(),
            bound: pred.kind == PredictionKind::Bound,
            measured: measure.then(|| measured_ratio(&spec).0.into()),
            lower_bound: lower_bound_ratio(spec.n(), spec.k()).map_err(|e| e.to_string())?.into(),
        });
    }
    if rows.is_empty() {
        return Err(format!("no code for r={r}, s={s}"));
    }
    serde_json::to_string(&rows).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct ErasureDemo {
    code: String,
    field: String,
    /// Node contents before erasure, as field element values.
    original: Vec<Vec<u32>>,
    erased: Vec<usize>,
    /// Restored contents, or `null` with `error` set.
    restored: Option<Vec<Vec<u32>>>,
    matches: bool,
    error: Option<String>,
}

/// Encodes the bytes of `text` (reduced into the field) into one stripe,
/// erases `erased`, and decodes.
pub fn erasure_demo_json(m: usize, r: u32, s: usize, text: &str, erased: &[usize]) -> Result<String, String> {
    let spec = standard_code(m, r, s)?;
    if spec.p() * spec.k() > 4096 {
        return Err("choose a smaller code for this demo".into());
    }
    let q = spec.field().order();
    let bytes = text.as_bytes();
    let info: Vec<Vec<Elem>> = (0..spec.k())
        .map(|c| {
            (0..spec.p())
                .map(|x| {
                    let b = bytes.get(c * spec.p() + x).copied().unwrap_or(0) as u32;
                    spec.field().elem(b % q).expect("reduced")
                })
                .collect()
        })
        .collect();
    let stripe = encode(&spec, &info).map_err(|e| e.to_string())?;
    let values = |cols: &[Vec<Elem>]| -> Vec<Vec<u32>> {
        cols.iter().map(|c| c.iter().map(|e| e.value()).collect()).collect()
    };
    let mut erased: Vec<usize> = erased.iter().copied().filter(|&i| i < spec.n()).collect();
    erased.sort_unstable();
    erased.dedup();
    let (restored, error) = match decode_erasures(&spec, &stripe.erase(&erased)) {
        Ok(s) => (Some(values(s.columns())), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let demo = ErasureDemo {
        code: spec.to_string(),
        field: spec.field().token(),
        original: values(stripe.columns()),
        matches: restored.as_deref() == Some(&values(stripe.columns())[..]),
        erased,
        restored,
        error,
    };
    serde_json::to_string(&demo).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn access_map(m: usize, r: u32, s: usize, erased: usize) -> Result<String, JsError> {
    access_map_json(m, r, s, erased).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn ratio_table(max_m: usize, r: u32, s: usize) -> Result<String, JsError> {
    ratio_table_json(max_m, r, s).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn erasure_demo(m: usize, r: u32, s: usize, text: &str, erased: Vec<usize>) -> Result<String, JsError> {
    erasure_demo_json(m, r, s, text, &erased).map_err(|e| JsError::new(&e))
}
