//! Rebuilding-ratio predictions, the lower bound, and measured access counts.

use std::fmt::{self, Write as _};

use num_rational::Rational64;
use thiserror::Error;

use crate::codec::rebuild_plan;
use crate::construct::{CodeSpec, FamilyKind};
use crate::perms::{self, Family};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("need n > k (got n={n}, k={k})")]
    NoRedundancy { n: usize, k: usize },
    #[error("pairwise terms are defined for s=1 codes (got s={0})")]
    Duplicated(usize),
    #[error("no asymptotic form for this family")]
    NoAsymptotic,
}

/// Whether a prediction is an exact value or only an upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictionKind {
    Exact,
    Bound,
}

impl PredictionKind {
    pub fn token(self) -> &'static str {
        match self {
            PredictionKind::Exact => "exact",
            PredictionKind::Bound => "bound",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Prediction {
    pub value: Rational64,
    pub kind: PredictionKind,
}

/// Pairwise rebuild terms of an `s = 1` code. Entry `[v][u]` concerns
/// rebuilding column `v` and reading column `u`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairTerms {
    pub rows: usize,
    pub radix: u32,
    /// Distinct rows of `u` read.
    pub union: Vec<Vec<usize>>,
    /// Rows read beyond the unavoidable `p / r`.
    pub extra: Vec<Vec<usize>>,
}

impl PairTerms {
    pub fn len(&self) -> usize {
        self.union.len()
    }

    pub fn is_empty(&self) -> bool {
        self.union.is_empty()
    }

    pub fn total_extra(&self) -> usize {
        self.extra.iter().flatten().sum()
    }

    /// Average ratio implied by the terms.
    pub fn ratio(&self) -> Rational64 {
        let k = self.len() as i64;
        let p = self.rows as i64;
        let r = self.radix as i64;
        let reads: i64 = self.union.iter().flatten().map(|&u| u as i64).sum::<i64>() + k * p;
        Rational64::new(reads, k * (k - 1 + r) * p)
    }
}

/// Pairwise terms computed from the coset closed form. Pairs involving the
/// zero vector of the standard basis use its explicit access sets.
pub fn ratio_formula_terms(spec: &CodeSpec) -> Result<PairTerms, AnalysisError> {
    if spec.s() != 1 {
        return Err(AnalysisError::Duplicated(spec.s()));
    }
    Ok(family_terms(spec.family()))
}

fn family_terms(family: &Family) -> PairTerms {
    let k = family.len();
    let p = family.rows();
    let base = p / family.radix() as usize;
    let mut union = vec![vec![0; k]; k];
    let mut extra = vec![vec![0; k]; k];
    for v in 0..k {
        for u in (0..k).filter(|&u| u != v) {
            let size = if family.zero_index().is_some_and(|z| z == v || z == u) {
                family.union_rows_read(v, u)
            } else {
                perms::union_size(family.vector(v), family.vector(u)).expect("admissible family")
            };
            union[v][u] = size;
            extra[v][u] = size - base;
        }
    }
    PairTerms {
        rows: p,
        radix: family.radix(),
        union,
        extra,
    }
}

/// The ratio the construction achieves. For duplicated codes this is the
/// duplication upper bound.
pub fn predicted_ratio(spec: &CodeSpec) -> Prediction {
    let base = family_terms(spec.family()).ratio();
    if spec.s() == 1 {
        return Prediction {
            value: base,
            kind: PredictionKind::Exact,
        };
    }
    let k = spec.family().len() as i64;
    let s = spec.s() as i64;
    let r = spec.r() as i64;
    Prediction {
        value: base * Rational64::new(s * (k + r - 1), s * k + r - 1),
        kind: PredictionKind::Bound,
    }
}

/// Large-`m` behaviour of the ratio for the built-in binary families.
pub fn asymptotic_ratio(kind: &FamilyKind, m: usize, r: u32) -> Result<Rational64, AnalysisError> {
    match kind {
        FamilyKind::Standard => Ok(Rational64::new(1, r as i64)),
        FamilyKind::WeightW { w } if r == 2 => {
            let w = *w as i64;
            Ok(Rational64::new(1, 2) + Rational64::new(w * w, 2 * m as i64))
        }
        _ => Err(AnalysisError::NoAsymptotic),
    }
}

/// `1 / (n - k)`.
pub fn lower_bound_ratio(n: usize, k: usize) -> Result<Rational64, AnalysisError> {
    if n <= k {
        return Err(AnalysisError::NoRedundancy { n, k });
    }
    Ok(Rational64::new(1, (n - k) as i64))
}

/// Cells read to rebuild one systematic column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnAccess {
    pub target: usize,
    pub cells_read: usize,
    pub reads_per_node: Vec<usize>,
}

impl ColumnAccess {
    pub fn ratio(&self, spec: &CodeSpec) -> Rational64 {
        Rational64::new(self.cells_read as i64, (spec.p() * (spec.n() - 1)) as i64)
    }
}

/// Runs the rebuild of every systematic column and averages the ratios.
pub fn measured_ratio(spec: &CodeSpec) -> (Rational64, Vec<ColumnAccess>) {
    let columns: Vec<ColumnAccess> = (0..spec.k())
        .map(|target| {
            let plan = rebuild_plan(spec, target);
            ColumnAccess {
                target,
                cells_read: plan.cells_read(),
                reads_per_node: plan.reads.iter().map(Vec::len).collect(),
            }
        })
        .collect();
    let total: usize = columns.iter().map(|c| c.cells_read).sum();
    let ratio = Rational64::new(total as i64, (spec.k() * spec.p() * (spec.n() - 1)) as i64);
    (ratio, columns)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioReport {
    pub code: String,
    pub predicted: Prediction,
    pub measured: Option<Rational64>,
    pub lower_bound: Rational64,
    pub asymptotic: Option<Rational64>,
    pub columns: Vec<ColumnAccess>,
}

/// Collects predictions and, if `measure` is set, runs every rebuild.
pub fn ratio_report(spec: &CodeSpec, kind: &FamilyKind, measure: bool) -> RatioReport {
    let (measured, columns) = if measure {
        let (ratio, cols) = measured_ratio(spec);
        (Some(ratio), cols)
    } else {
        (None, Vec::new())
    };
    RatioReport {
        code: spec.to_string(),
        predicted: predicted_ratio(spec),
        measured,
        lower_bound: lower_bound_ratio(spec.n(), spec.k()).expect("r >= 2"),
        asymptotic: asymptotic_ratio(kind, spec.m(), spec.r()).ok(),
        columns,
    }
}

fn approx(x: Rational64) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

impl RatioReport {
    /// `key=value` lines.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        let mut put = |name: &str, x: Rational64| {
            let _ = writeln!(out, "ratio_{name}_num={}", x.numer());
            let _ = writeln!(out, "ratio_{name}_den={}", x.denom());
        };
        put("predicted", self.predicted.value);
        if let Some(m) = self.measured {
            put("measured", m);
        }
        put("lower_bound", self.lower_bound);
        if let Some(a) = self.asymptotic {
            put("asymptotic", a);
        }
        let _ = writeln!(out, "ratio_predicted_kind={}", self.predicted.kind.token());
        for c in &self.columns {
            let _ = writeln!(out, "column_{}_cells_read={}", c.target, c.cells_read);
        }
        out
    }
}

impl fmt::Display for RatioReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.code)?;
        let label = match self.predicted.kind {
            PredictionKind::Exact => "predicted",
            PredictionKind::Bound => "bound",
        };
        let mut rows = vec![(label, self.predicted.value)];
        if let Some(m) = self.measured {
            rows.push(("measured", m));
        }
        rows.push(("lower bound", self.lower_bound));
        if let Some(a) = self.asymptotic {
            rows.push(("asymptotic", a));
        }
        for (name, x) in rows {
            writeln!(f, "  {name:<12} {:>12}  ~ {:.3}", x.to_string(), approx(x))?;
        }
        if !self.columns.is_empty() {
            writeln!(f, "  {:<8} {:>10}", "column", "cells read")?;
            for c in &self.columns {
                writeln!(f, "  {:<8} {:>10}", c.target, c.cells_read)?;
            }
        }
        Ok(())
    }
}
