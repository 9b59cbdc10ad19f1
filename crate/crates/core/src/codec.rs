//! Encoding, single-node rebuild with access accounting, erasure decoding
//! and single-column error correction.

use thiserror::Error;

use crate::construct::{erasure_system, CodeSpec, Column};
use crate::gf::{self, Elem, FieldError, LinalgError, Matrix};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("{missing} columns missing, the code corrects at most {r}")]
    TooManyErasures { missing: usize, r: u32 },
    #[error("single-node rebuild needs exactly one missing column (found {0})")]
    NotOneErasure(usize),
    #[error("erasure system is singular; the code is not MDS for this pattern")]
    Singular,
    #[error("unsupported: {0}")]
    Unsupported(String),
}

/// One encoded `p x n` array, stored column by column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stripe {
    columns: Vec<Vec<Elem>>,
}

impl Stripe {
    pub fn from_columns(spec: &CodeSpec, columns: Vec<Vec<Elem>>) -> Result<Stripe, CodecError> {
        check_columns(spec, &columns, spec.n())?;
        Ok(Stripe { columns })
    }

    pub fn columns(&self) -> &[Vec<Elem>] {
        &self.columns
    }

    pub fn column(&self, node: usize) -> &[Elem] {
        &self.columns[node]
    }

    pub fn column_mut(&mut self, node: usize) -> &mut Vec<Elem> {
        &mut self.columns[node]
    }

    pub fn into_columns(self) -> Vec<Vec<Elem>> {
        self.columns
    }

    /// Information part: the first `k` columns.
    pub fn info<'a>(&'a self, spec: &CodeSpec) -> &'a [Vec<Elem>] {
        &self.columns[..spec.k()]
    }

    /// A copy with the given nodes removed.
    pub fn erase(&self, nodes: &[usize]) -> ErasedStripe {
        ErasedStripe {
            columns: self
                .columns
                .iter()
                .enumerate()
                .map(|(i, c)| (!nodes.contains(&i)).then(|| c.clone()))
                .collect(),
        }
    }
}

/// A stripe with some columns missing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErasedStripe {
    pub columns: Vec<Option<Vec<Elem>>>,
}

impl ErasedStripe {
    pub fn missing(&self) -> Vec<usize> {
        self.columns
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.is_none().then_some(i))
            .collect()
    }
}

fn check_columns(spec: &CodeSpec, columns: &[Vec<Elem>], expected: usize) -> Result<(), CodecError> {
    if columns.len() != expected {
        return Err(CodecError::Shape(format!(
            "expected {expected} columns, got {}",
            columns.len()
        )));
    }
    for (i, col) in columns.iter().enumerate() {
        if col.len() != spec.p() {
            return Err(CodecError::Shape(format!(
                "column {i} has {} rows, expected {}",
                col.len(),
                spec.p()
            )));
        }
        for &e in col {
            spec.field().elem(e.value())?;
        }
    }
    Ok(())
}

/// Parity column `parity` computed from the information columns.
fn parity_column(spec: &CodeSpec, info: &[Vec<Elem>], parity: u32) -> Vec<Elem> {
    let f = spec.field();
    let mut out = vec![Elem::ZERO; spec.p()];
    for (column, values) in info.iter().enumerate() {
        for (row, &a) in values.iter().enumerate() {
            let z = spec.zigzag_index(row, column, parity);
            out[z] = f.add(out[z], f.mul(spec.coefficient(row, column, parity), a));
        }
    }
    out
}

/// Appends the `r` parity columns to `k` information columns.
pub fn encode(spec: &CodeSpec, info: &[Vec<Elem>]) -> Result<Stripe, CodecError> {
    check_columns(spec, info, spec.k())?;
    let mut columns = info.to_vec();
    for parity in 0..spec.r() {
        columns.push(parity_column(spec, info, parity));
    }
    Ok(Stripe { columns })
}

/// Cells read while rebuilding one column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RebuildPlan {
    pub erased: Column,
    /// For a systematic target: the rows recovered through each parity.
    pub rows_by_parity: Vec<Vec<usize>>,
    /// For every node, the sorted rows read from it.
    pub reads: Vec<Vec<usize>>,
}

impl RebuildPlan {
    pub fn cells_read(&self) -> usize {
        self.reads.iter().map(Vec::len).sum()
    }

    /// Cells held by the surviving nodes, `p (n - 1)`.
    pub fn cells_available(&self, spec: &CodeSpec) -> usize {
        spec.p() * (spec.n() - 1)
    }
}

/// Records each distinct cell read.
struct AccessLog<'a> {
    columns: &'a [Option<Vec<Elem>>],
    seen: Vec<Vec<bool>>,
}

impl<'a> AccessLog<'a> {
    fn new(spec: &CodeSpec, columns: &'a [Option<Vec<Elem>>]) -> Self {
        AccessLog {
            columns,
            seen: vec![vec![false; spec.p()]; spec.n()],
        }
    }

    fn read(&mut self, node: usize, row: usize) -> Elem {
        self.seen[node][row] = true;
        self.columns[node].as_ref().expect("read from a surviving node")[row]
    }

    fn into_reads(self) -> Vec<Vec<usize>> {
        self.seen
            .into_iter()
            .map(|rows| rows.iter().enumerate().filter_map(|(r, &s)| s.then_some(r)).collect())
            .collect()
    }
}

/// Rebuilds the single missing column, reading as little as the
/// construction allows. Returns the column and the access record.
pub fn rebuild_one(spec: &CodeSpec, stripe: &ErasedStripe) -> Result<(Vec<Elem>, RebuildPlan), CodecError> {
    if stripe.columns.len() != spec.n() {
        return Err(CodecError::Shape(format!(
            "expected {} columns, got {}",
            spec.n(),
            stripe.columns.len()
        )));
    }
    let missing = stripe.missing();
    let [node] = missing[..] else {
        return Err(CodecError::NotOneErasure(missing.len()));
    };
    let f = spec.field();
    let p = spec.p();
    let mut log = AccessLog::new(spec, &stripe.columns);
    let target = spec.column_at(node);
    let mut out = vec![Elem::ZERO; p];
    let mut rows_by_parity = Vec::new();
    match target {
        Column::Parity(parity) => {
            let info: Vec<Vec<Elem>> = (0..spec.k())
                .map(|c| (0..p).map(|row| log.read(c, row)).collect())
                .collect();
            out = parity_column(spec, &info, parity);
        }
        Column::Data(c) => {
            let j = spec.column_id(c).family;
            for parity in 0..spec.r() {
                let rows = spec.family().access_set(j, parity).rows;
                for &x in &rows {
                    let z = spec.zigzag_index(x, c, parity);
                    let mut acc = log.read(spec.node_index(Column::Parity(parity)), z);
                    for other in (0..spec.k()).filter(|&o| o != c) {
                        let y = spec.zigzag_member(z, other, parity);
                        let term = f.mul(spec.coefficient(y, other, parity), log.read(other, y));
                        acc = f.sub(acc, term);
                    }
                    out[x] = f.div(acc, spec.coefficient(x, c, parity))?;
                }
                rows_by_parity.push(rows);
            }
        }
    }
    let plan = RebuildPlan {
        erased: target,
        rows_by_parity,
        reads: log.into_reads(),
    };
    Ok((out, plan))
}

/// Access record for rebuilding `node`, without real data.
pub fn rebuild_plan(spec: &CodeSpec, node: usize) -> RebuildPlan {
    let zeros = ErasedStripe {
        columns: (0..spec.n())
            .map(|i| (i != node).then(|| vec![Elem::ZERO; spec.p()]))
            .collect(),
    };
    rebuild_one(spec, &zeros).expect("one erasure").1
}

/// Restores every missing column (at most `r`).
pub fn decode_erasures(spec: &CodeSpec, stripe: &ErasedStripe) -> Result<Stripe, CodecError> {
    if stripe.columns.len() != spec.n() {
        return Err(CodecError::Shape(format!(
            "expected {} columns, got {}",
            spec.n(),
            stripe.columns.len()
        )));
    }
    let missing = stripe.missing();
    if missing.len() > spec.r() as usize {
        return Err(CodecError::TooManyErasures {
            missing: missing.len(),
            r: spec.r(),
        });
    }
    let mut columns = stripe.columns.clone();
    let data: Vec<usize> = missing.iter().copied().filter(|&c| c < spec.k()).collect();
    match (missing.len(), data.len()) {
        (0, _) => {}
        (1, _) => {
            let (col, _) = rebuild_one(spec, stripe)?;
            columns[missing[0]] = Some(col);
        }
        (2, 1) if spec.r() == 2 => {
            let parity = missing[1] - spec.k();
            // the surviving parity recovers the information column
            let used = 1 - parity as u32;
            let col = recover_through_parity(spec, &columns, data[0], used)?;
            columns[data[0]] = Some(col);
        }
        (2, 2) if spec.r() == 2 => match two_data_structured(spec, &columns, data[0], data[1]) {
            Ok((a, b)) => {
                columns[data[0]] = Some(a);
                columns[data[1]] = Some(b);
            }
            Err(CodecError::Singular) => solve_generic(spec, &mut columns, &missing)?,
            Err(e) => return Err(e),
        },
        (_, 0) => {}
        _ => solve_generic(spec, &mut columns, &missing)?,
    }
    let info: Vec<Vec<Elem>> = columns[..spec.k()]
        .iter()
        .map(|c| c.clone().expect("information restored"))
        .collect();
    for node in missing.iter().copied().filter(|&c| c >= spec.k()) {
        columns[node] = Some(parity_column(spec, &info, (node - spec.k()) as u32));
    }
    Stripe::from_columns(spec, columns.into_iter().map(Option::unwrap).collect())
}

/// Every row of information column `c` recovered from parity `parity`.
fn recover_through_parity(
    spec: &CodeSpec,
    columns: &[Option<Vec<Elem>>],
    c: usize,
    parity: u32,
) -> Result<Vec<Elem>, CodecError> {
    let f = spec.field();
    let pcol = columns[spec.node_index(Column::Parity(parity))].as_ref().unwrap();
    (0..spec.p())
        .map(|x| {
            let z = spec.zigzag_index(x, c, parity);
            let mut acc = pcol[z];
            for other in (0..spec.k()).filter(|&o| o != c) {
                let y = spec.zigzag_member(z, other, parity);
                let a = columns[other].as_ref().unwrap()[y];
                acc = f.sub(acc, f.mul(spec.coefficient(y, other, parity), a));
            }
            Ok(f.div(acc, spec.coefficient(x, c, parity))?)
        })
        .collect()
}

/// Two missing information columns with both parities present: per-row
/// 2x2 systems when the columns share a permutation, otherwise 4x4 systems
/// on row pairs `{i, i + v_1 + v_2}`.
fn two_data_structured(
    spec: &CodeSpec,
    columns: &[Option<Vec<Elem>>],
    c1: usize,
    c2: usize,
) -> Result<(Vec<Elem>, Vec<Elem>), CodecError> {
    let f = spec.field();
    let p = spec.p();
    let (rows, zigs) = (
        columns[spec.node_index(Column::Parity(0))].as_ref().unwrap(),
        columns[spec.node_index(Column::Parity(1))].as_ref().unwrap(),
    );
    let known = |z: usize, parity: u32| -> Elem {
        (0..spec.k())
            .filter(|&o| o != c1 && o != c2)
            .fold(Elem::ZERO, |acc, o| {
                let y = spec.zigzag_member(z, o, parity);
                let a = columns[o].as_ref().unwrap()[y];
                f.add(acc, f.mul(spec.coefficient(y, o, parity), a))
            })
    };
    // x_i: row residual, y_i: residual of the zigzag holding (i, c1)
    let x = |i: usize| f.sub(rows[i], known(i, 0));
    let y = |i: usize| {
        let z = spec.zigzag_index(i, c1, 1);
        f.sub(zigs[z], known(z, 1))
    };
    let beta = |i: usize, c: usize| spec.coefficient(i, c, 1);
    let (j1, j2) = (spec.column_id(c1).family, spec.column_id(c2).family);
    let mut a1 = vec![Elem::ZERO; p];
    let mut a2 = vec![Elem::ZERO; p];
    if j1 == j2 {
        for i in 0..p {
            let m = Matrix::from_rows(vec![
                vec![Elem::ONE, Elem::ONE],
                vec![beta(i, c1), beta(i, c2)],
            ])
            .expect("square");
            let sol = solve(spec, &m, &[x(i), y(i)])?;
            a1[i] = sol[0];
            a2[i] = sol[1];
        }
    } else {
        let mut done = vec![false; p];
        for i in 0..p {
            if done[i] {
                continue;
            }
            let i2 = spec.family().apply(j1, 1, spec.family().apply(j2, 1, i));
            let m = Matrix::from_rows(vec![
                vec![Elem::ONE, Elem::ONE, Elem::ZERO, Elem::ZERO],
                vec![Elem::ZERO, Elem::ZERO, Elem::ONE, Elem::ONE],
                vec![beta(i, c1), Elem::ZERO, Elem::ZERO, beta(i2, c2)],
                vec![Elem::ZERO, beta(i, c2), beta(i2, c1), Elem::ZERO],
            ])
            .expect("square");
            let sol = solve(spec, &m, &[x(i), x(i2), y(i), y(i2)])?;
            a1[i] = sol[0];
            a2[i] = sol[1];
            a1[i2] = sol[2];
            a2[i2] = sol[3];
            done[i] = true;
            done[i2] = true;
        }
    }
    Ok((a1, a2))
}

fn solve(spec: &CodeSpec, m: &Matrix, rhs: &[Elem]) -> Result<Vec<Elem>, CodecError> {
    gf::solve_linear(spec.field(), m, rhs).map_err(|e| match e {
        LinalgError::Singular => CodecError::Singular,
        LinalgError::Dimension(d) => CodecError::Shape(d),
    })
}

/// Dense solve over the surviving parity cells. Uses exactly as many
/// surviving parities as there are missing information columns.
fn solve_generic(
    spec: &CodeSpec,
    columns: &mut [Option<Vec<Elem>>],
    missing: &[usize],
) -> Result<(), CodecError> {
    let f = spec.field();
    let p = spec.p();
    let system = erasure_system(spec, missing);
    let unknowns = system.data.len() * p;
    if unknowns == 0 {
        return Ok(());
    }
    let mut square = Matrix::zeros(unknowns, unknowns);
    let mut rhs = Vec::with_capacity(unknowns);
    for (eq, &(parity, z)) in system.equations.iter().take(unknowns).enumerate() {
        for c in 0..unknowns {
            square[(eq, c)] = system.matrix[(eq, c)];
        }
        let mut value = columns[spec.node_index(Column::Parity(parity))].as_ref().unwrap()[z];
        for other in (0..spec.k()).filter(|o| !system.data.contains(o)) {
            let y = spec.zigzag_member(z, other, parity);
            let a = columns[other].as_ref().unwrap()[y];
            value = f.sub(value, f.mul(spec.coefficient(y, other, parity), a));
        }
        rhs.push(value);
    }
    let sol = solve(spec, &square, &rhs)?;
    for (slot, &c) in system.data.iter().enumerate() {
        columns[c] = Some(sol[slot * p..(slot + 1) * p].to_vec());
    }
    Ok(())
}

/// Per-parity residuals: `S_s[x]` = recomputed parity cell minus stored one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Syndrome {
    pub parts: Vec<Vec<Elem>>,
}

impl Syndrome {
    pub fn is_zero(&self) -> bool {
        self.parts.iter().flatten().all(|e| e.is_zero())
    }

    pub fn part_is_zero(&self, parity: usize) -> bool {
        self.parts[parity].iter().all(|e| e.is_zero())
    }
}

pub fn syndrome(spec: &CodeSpec, stripe: &Stripe) -> Syndrome {
    let f = spec.field();
    let info = stripe.info(spec);
    Syndrome {
        parts: (0..spec.r())
            .map(|parity| {
                let stored = stripe.column(spec.node_index(Column::Parity(parity)));
                parity_column(spec, info, parity)
                    .into_iter()
                    .zip(stored)
                    .map(|(computed, &s)| f.sub(computed, s))
                    .collect()
            })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ErrorOutcome {
    Clean,
    Corrected { node: usize, stripe: Stripe },
    Uncorrectable,
}

/// Locates and corrects one arbitrarily corrupted column (two parities only).
pub fn decode_error(spec: &CodeSpec, stripe: &Stripe) -> Result<ErrorOutcome, CodecError> {
    if spec.r() != 2 {
        return Err(CodecError::Unsupported(
            "error location is defined for two parities".into(),
        ));
    }
    check_columns(spec, stripe.columns(), spec.n())?;
    let f = spec.field();
    let p = spec.p();
    let syn = syndrome(spec, stripe);
    let (zero0, zero1) = (syn.part_is_zero(0), syn.part_is_zero(1));
    if zero0 && zero1 {
        return Ok(ErrorOutcome::Clean);
    }
    if zero0 || zero1 {
        let parity = if zero0 { 1 } else { 0 };
        let node = spec.node_index(Column::Parity(parity));
        let mut fixed = stripe.clone();
        *fixed.column_mut(node) = parity_column(spec, stripe.info(spec), parity);
        return Ok(ErrorOutcome::Corrected { node, stripe: fixed });
    }
    let (s0, s1) = (&syn.parts[0], &syn.parts[1]);
    for c in 0..spec.k() {
        // the corrupted column's zigzag residual is its row residual,
        // scaled by beta and moved through the column's permutation
        let matches = (0..p).all(|i| {
            let z = spec.zigzag_index(i, c, 1);
            f.mul(spec.coefficient(i, c, 1), s0[i]) == s1[z]
        });
        if matches {
            let mut fixed = stripe.clone();
            for (a, &d) in fixed.column_mut(c).iter_mut().zip(s0) {
                *a = f.sub(*a, d);
            }
            return Ok(ErrorOutcome::Corrected { node: c, stripe: fixed });
        }
    }
    Ok(ErrorOutcome::Uncorrectable)
}
