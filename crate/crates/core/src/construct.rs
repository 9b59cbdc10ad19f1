//! Complete code descriptions: vector family, duplication, field and the
//! zigzag coefficient table.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::gf::{self, Elem, Field, FieldError, Matrix};
use crate::perms::{Family, PermError, RVector};

/// Largest `p * k` accepted by [`verify_mds`].
pub const MAX_VERIFY_CELLS: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuildError {
    #[error(transparent)]
    Perm(#[from] PermError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("incompatible parameters: {0}")]
    Incompatible(String),
    #[error("coefficient for row {row}, column {column}, parity {parity} is zero")]
    ZeroCoefficient { row: usize, column: usize, parity: u32 },
    #[error("coefficient table: {0}")]
    Table(String),
    #[error("instance too large for exhaustive verification ({cells} cells > {MAX_VERIFY_CELLS})")]
    TooLarge { cells: usize },
}

fn incompatible(msg: impl Into<String>) -> BuildError {
    BuildError::Incompatible(msg.into())
}

/// How the zigzag coefficients are assigned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Two parities over `GF(3)`: `beta = 2` when `u_j . i = 1`.
    Cons3,
    /// Duplicated standard-basis code: powers `a^t`, `a^{t+1}` (odd `q`) or
    /// `a^{t+1}`, `a^{-t-1}` (even `q`).
    Cons4,
    /// Block-weight families: `a^{r M_v}`.
    WeightW,
    /// Three parities on the standard basis over a prime field.
    R3,
    /// Coefficients supplied by the caller.
    Table,
}

impl Scheme {
    pub fn token(self) -> &'static str {
        match self {
            Scheme::Cons3 => "cons3",
            Scheme::Cons4 => "cons4",
            Scheme::WeightW => "weightw",
            Scheme::R3 => "r3",
            Scheme::Table => "table",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Scheme {
    type Err = BuildError;

    fn from_str(s: &str) -> Result<Scheme, BuildError> {
        match s.trim() {
            "cons3" => Ok(Scheme::Cons3),
            "cons4" => Ok(Scheme::Cons4),
            "weightw" => Ok(Scheme::WeightW),
            "r3" => Ok(Scheme::R3),
            "table" => Ok(Scheme::Table),
            other => Err(incompatible(format!("unknown scheme {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FamilyKind {
    Standard,
    WeightW { w: usize },
    Explicit(Vec<RVector>),
}

/// Inputs to [`build_code`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeParams {
    pub family: FamilyKind,
    pub m: usize,
    pub r: u32,
    pub s: usize,
    pub scheme: Scheme,
    pub field: Option<Field>,
}

impl CodeParams {
    pub fn standard(m: usize, r: u32, s: usize, scheme: Scheme) -> CodeParams {
        CodeParams {
            family: FamilyKind::Standard,
            m,
            r,
            s,
            scheme,
            field: None,
        }
    }

    pub fn with_field(mut self, field: Field) -> CodeParams {
        self.field = Some(field);
        self
    }
}

/// A systematic column: family member `family`, duplicate `copy`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ColumnId {
    pub family: usize,
    pub copy: usize,
}

/// Any column of the array: systematic at a flattened position, or parity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Column {
    Data(usize),
    Parity(u32),
}

/// One fully materialized code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeSpec {
    family: Family,
    s: usize,
    field: Field,
    scheme: Scheme,
    /// `beta[(parity - 1), row, column]`, flattened.
    coeffs: Vec<Elem>,
}

impl CodeSpec {
    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn m(&self) -> usize {
        self.family.m()
    }

    pub fn r(&self) -> u32 {
        self.family.radix()
    }

    /// Duplication factor.
    pub fn s(&self) -> usize {
        self.s
    }

    /// Rows per column, `r^m`.
    pub fn p(&self) -> usize {
        self.family.rows()
    }

    /// Systematic columns, `s * |T|`.
    pub fn k(&self) -> usize {
        self.s * self.family.len()
    }

    /// All columns, `k + r`.
    pub fn n(&self) -> usize {
        self.k() + self.r() as usize
    }

    pub fn column_id(&self, position: usize) -> ColumnId {
        ColumnId {
            family: position / self.s,
            copy: position % self.s,
        }
    }

    pub fn position(&self, id: ColumnId) -> usize {
        id.family * self.s + id.copy
    }

    /// Node index `0..n` of a column: systematic first, then parities.
    pub fn node_index(&self, column: Column) -> usize {
        match column {
            Column::Data(j) => j,
            Column::Parity(s) => self.k() + s as usize,
        }
    }

    pub fn column_at(&self, node: usize) -> Column {
        if node < self.k() {
            Column::Data(node)
        } else {
            Column::Parity((node - self.k()) as u32)
        }
    }

    /// Coefficient of information cell `(row, column)` in parity `parity`.
    /// Parity 0 is the plain row sum.
    pub fn coefficient(&self, row: usize, column: usize, parity: u32) -> Elem {
        if parity == 0 {
            return Elem::ONE;
        }
        let (p, k) = (self.p(), self.k());
        self.coeffs[((parity as usize - 1) * p + row) * k + column]
    }

    /// Zigzag set of parity `parity` holding cell `(row, column)`.
    pub fn zigzag_index(&self, row: usize, column: usize, parity: u32) -> usize {
        self.family.apply(column / self.s, parity, row)
    }

    /// Row of `column` that belongs to zigzag set `index` of parity `parity`.
    pub fn zigzag_member(&self, index: usize, column: usize, parity: u32) -> usize {
        self.family.unapply(column / self.s, parity, index)
    }

    /// Rewrites the coefficient table. Every entry must be nonzero.
    pub fn with_coefficients(
        mut self,
        scheme: Scheme,
        mut coefficient: impl FnMut(usize, usize, u32) -> Elem,
    ) -> Result<CodeSpec, BuildError> {
        let (p, k, r) = (self.p(), self.k(), self.r());
        let mut coeffs = Vec::with_capacity((r as usize - 1) * p * k);
        for parity in 1..r {
            for row in 0..p {
                for column in 0..k {
                    let c = coefficient(row, column, parity);
                    if c.is_zero() {
                        return Err(BuildError::ZeroCoefficient { row, column, parity });
                    }
                    self.field.elem(c.value())?;
                    coeffs.push(c);
                }
            }
        }
        self.coeffs = coeffs;
        self.scheme = scheme;
        Ok(self)
    }

    /// Same family and duplication over another field with an arbitrary table.
    pub fn from_table(
        family: Family,
        s: usize,
        field: Field,
        coefficient: impl FnMut(usize, usize, u32) -> Elem,
    ) -> Result<CodeSpec, BuildError> {
        if s == 0 {
            return Err(incompatible("duplication factor must be at least 1"));
        }
        CodeSpec {
            family,
            s,
            field,
            scheme: Scheme::Table,
            coeffs: Vec::new(),
        }
        .with_coefficients(Scheme::Table, coefficient)
    }

    /// `row col parity value` lines for every zigzag coefficient.
    pub fn dump_coefficients(&self) -> String {
        let mut out = String::new();
        for parity in 1..self.r() {
            for row in 0..self.p() {
                for column in 0..self.k() {
                    let c = self.coefficient(row, column, parity);
                    out.push_str(&format!("{row} {column} {parity} {c}\n"));
                }
            }
        }
        out
    }
}

impl fmt::Display for CodeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}) {} code over {}, {} rows, m={} r={} s={}",
            self.n(),
            self.k(),
            self.scheme,
            self.field,
            self.p(),
            self.m(),
            self.r(),
            self.s
        )
    }
}

/// Parses `row col parity value` lines into a dense table for `spec`'s shape.
pub fn parse_coefficient_table(
    text: &str,
    p: usize,
    k: usize,
    r: u32,
) -> Result<Vec<Option<u32>>, BuildError> {
    let mut table = vec![None; (r as usize - 1) * p * k];
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<usize> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|e| BuildError::Table(format!("line {}: {e}", lineno + 1)))?;
        let [row, column, parity, value] = fields[..] else {
            return Err(BuildError::Table(format!(
                "line {}: expected `row col parity value`",
                lineno + 1
            )));
        };
        if row >= p || column >= k || parity == 0 || parity >= r as usize {
            return Err(BuildError::Table(format!(
                "line {}: index out of range",
                lineno + 1
            )));
        }
        table[((parity - 1) * p + row) * k + column] = Some(value as u32);
    }
    Ok(table)
}

/// Builds a code with one of the explicit coefficient schemes.
pub fn build_code(params: &CodeParams) -> Result<CodeSpec, BuildError> {
    let CodeParams { m, r, s, scheme, .. } = *params;
    if s == 0 {
        return Err(incompatible("duplication factor must be at least 1"));
    }
    let family = match &params.family {
        FamilyKind::Standard => Family::standard_basis(m, r)?,
        FamilyKind::WeightW { w } => {
            if r != 2 {
                return Err(incompatible("weight-w families are binary"));
            }
            Family::weight_w(m, *w)?
        }
        FamilyKind::Explicit(vectors) => {
            let family = Family::explicit(r, vectors.clone())?;
            if family.m() != m {
                return Err(incompatible(format!(
                    "vectors have length {}, m = {m}",
                    family.m()
                )));
            }
            family
        }
    };
    let field = match &params.field {
        Some(f) => f.clone(),
        None => default_field(scheme, &family, s)?,
    };
    check_scheme(scheme, &family, s, &field)?;
    let spec = CodeSpec {
        family,
        s,
        field,
        scheme,
        coeffs: Vec::new(),
    };
    if scheme == Scheme::Table {
        return Err(incompatible(
            "table scheme needs explicit coefficients (use CodeSpec::from_table)",
        ));
    }
    let template = spec.clone();
    spec.with_coefficients(scheme, |row, column, parity| {
        zigzag_coefficient(&template, row, column, parity).expect("scheme validated")
    })
}

/// Builds a code whose coefficients come from a parsed table.
pub fn build_code_with_table(params: &CodeParams, table_text: &str) -> Result<CodeSpec, BuildError> {
    let family = match &params.family {
        FamilyKind::Standard => Family::standard_basis(params.m, params.r)?,
        FamilyKind::WeightW { w } => Family::weight_w(params.m, *w)?,
        FamilyKind::Explicit(v) => Family::explicit(params.r, v.clone())?,
    };
    let field = params
        .field
        .clone()
        .ok_or_else(|| incompatible("table scheme needs an explicit field"))?;
    let (p, k, r) = (family.rows(), family.len() * params.s, family.radix());
    let table = parse_coefficient_table(table_text, p, k, r)?;
    if let Some(missing) = table.iter().position(Option::is_none) {
        let column = missing % k;
        let row = (missing / k) % p;
        let parity = missing / (k * p) + 1;
        return Err(BuildError::Table(format!(
            "missing entry for row {row}, column {column}, parity {parity}"
        )));
    }
    let mut bad = None;
    let spec = CodeSpec::from_table(family, params.s, field.clone(), |row, column, parity| {
        let v = table[((parity as usize - 1) * p + row) * k + column].unwrap_or(0);
        field.elem(v).unwrap_or_else(|e| {
            bad.get_or_insert(e);
            Elem::ZERO
        })
    });
    match bad {
        Some(e) => Err(e.into()),
        None => spec,
    }
}

/// Default field for a scheme: the minimal size its MDS argument needs.
pub fn default_field(scheme: Scheme, family: &Family, s: usize) -> Result<Field, BuildError> {
    match scheme {
        Scheme::Cons3 => Ok(Field::prime(3)?),
        Scheme::Cons4 => {
            let q = next_prime((s as u64 + 1).max(3));
            Ok(Field::with_order(q)?)
        }
        Scheme::WeightW => {
            let w = block_weight(family)?;
            let q = 1u64 << w;
            Ok(Field::with_order(q + 1).or_else(|_| Field::with_order(2 * q))?)
        }
        Scheme::R3 => Ok(Field::with_order(next_prime(2 * (family.m() as u64 + 1)))?),
        Scheme::Table => Err(incompatible("table scheme needs an explicit field")),
    }
}

fn next_prime(from: u64) -> u64 {
    (from..).find(|&q| gf::is_prime(q)).expect("primes are unbounded")
}

fn is_prime_power(q: u64) -> bool {
    (2..=q).find(|d| q % d == 0).is_some_and(|p| {
        let mut x = q;
        while x % p == 0 {
            x /= p;
        }
        x == 1
    })
}

/// The weight `w` of a block-weight family, after checking its shape.
fn block_weight(family: &Family) -> Result<usize, BuildError> {
    let first = family.vector(0);
    let w = first.digits().iter().filter(|&&d| d == 1).count();
    let m = family.m();
    if family.radix() != 2 || w < 2 || m % w != 0 {
        return Err(incompatible("weightw needs a binary block-weight family"));
    }
    let block = m / w;
    for v in family.vectors() {
        for b in 0..w {
            if v.digits()[b * block..(b + 1) * block].iter().sum::<u32>() != 1 {
                return Err(incompatible(format!("{v} is not one 1 per block")));
            }
        }
    }
    Ok(w)
}

fn check_scheme(scheme: Scheme, family: &Family, s: usize, field: &Field) -> Result<(), BuildError> {
    let r = family.radix();
    let q = field.order() as usize;
    match scheme {
        Scheme::Cons3 => {
            if r != 2 || s != 1 || !family.is_standard_basis() || *field != Field::prime(3)? {
                return Err(incompatible("cons3 is the r=2, s=1 standard-basis code over gf(3)"));
            }
        }
        Scheme::Cons4 => {
            if r != 2 || !family.is_standard_basis() {
                return Err(incompatible("cons4 needs the r=2 standard basis"));
            }
            let limit = if q % 2 == 1 { q - 1 } else { q - 2 };
            if s > limit {
                return Err(incompatible(format!(
                    "cons4 over {field} allows s <= {limit}, got s = {s}"
                )));
            }
        }
        Scheme::WeightW => {
            let w = block_weight(family)?;
            let small = (1usize << w) + 1;
            let ok = (q == small && is_prime_power(small as u64)) || q == 1 << (w + 1);
            if s != 1 || !ok {
                return Err(incompatible(format!(
                    "weightw (w={w}) needs s = 1 and gf({small}) or gf(2^{})",
                    w + 1
                )));
            }
        }
        Scheme::R3 => {
            let prime_field = field.kind() == gf::FieldKind::Prime;
            if r != 3 || s != 1 || !family.is_standard_basis() {
                return Err(incompatible("r3 is the s=1 standard-basis code with three parities"));
            }
            if !prime_field || q < 2 * (family.m() + 1) {
                return Err(incompatible(format!(
                    "r3 needs a prime field of size >= {}",
                    2 * (family.m() + 1)
                )));
            }
        }
        Scheme::Table => {}
    }
    Ok(())
}

/// Coefficient of cell `(row, column)` in parity `parity`, computed from the
/// spec's scheme (not from its stored table).
pub fn zigzag_coefficient(
    spec: &CodeSpec,
    row: usize,
    column: usize,
    parity: u32,
) -> Result<Elem, BuildError> {
    if parity == 0 {
        return Ok(Elem::ONE);
    }
    if parity >= spec.r() {
        return Err(incompatible(format!("parity {parity} out of range")));
    }
    let field = &spec.field;
    let id = spec.column_id(column);
    let x = RVector::from_index(spec.r(), spec.m(), row);
    match spec.scheme {
        Scheme::Cons3 | Scheme::Cons4 => {
            // u_j = e_1 + ... + e_j, so u_j . x is the parity of x's first j digits
            let flag = x.digits()[..id.family].iter().sum::<u32>() % 2 == 1;
            let t = id.copy as i64;
            Ok(if spec.scheme == Scheme::Cons3 {
                if flag { field.add(Elem::ONE, Elem::ONE) } else { Elem::ONE }
            } else if field.order() % 2 == 1 {
                field.exp(if flag { t + 1 } else { t })
            } else {
                field.exp(if flag { -t - 1 } else { t + 1 })
            })
        }
        Scheme::WeightW => {
            let v = spec.family.vector(id.family);
            let w = v.digits().iter().filter(|&&d| d == 1).count();
            let block = spec.m() / w;
            let mut exponent = 0i64;
            for b in 0..w {
                let start = b * block;
                let pick = v.digits()[start..start + block]
                    .iter()
                    .position(|&d| d == 1)
                    .ok_or_else(|| incompatible("vector is not one 1 per block"))?;
                // x . M_pick = parity of x's digits from the block start through pick
                let bit = x.digits()[start..=start + pick].iter().sum::<u32>() % 2;
                exponent = exponent * 2 + bit as i64;
            }
            Ok(field.exp(exponent))
        }
        Scheme::R3 => {
            let l = id.family;
            let mut c = Elem::ONE;
            let mut y = row;
            for _ in 0..parity {
                let digit = if l == 0 {
                    1
                } else {
                    RVector::from_index(spec.r(), spec.m(), y).digits()[l - 1]
                };
                if digit == 0 {
                    c = field.mul(c, field.exp(l as i64));
                }
                y = spec.family.apply(l, 1, y);
            }
            Ok(c)
        }
        Scheme::Table => Ok(spec.coefficient(row, column, parity)),
    }
}

/// Outcome of an exhaustive erasure-pattern check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MdsReport {
    pub patterns_checked: usize,
    /// First undecodable pattern, as node indices.
    pub failing: Option<Vec<usize>>,
}

impl MdsReport {
    pub fn is_mds(&self) -> bool {
        self.failing.is_none()
    }
}

/// Checks every nonempty set of at most `max_erasures` columns for unique
/// recoverability from the surviving cells.
///
/// For each pattern the surviving parity cells give linear equations in the
/// erased information cells (everything else is known); the pattern is
/// decodable iff that system has full column rank.
pub fn verify_mds(spec: &CodeSpec, max_erasures: usize) -> Result<MdsReport, BuildError> {
    let cells = spec.p() * spec.k();
    if cells > MAX_VERIFY_CELLS {
        return Err(BuildError::TooLarge { cells });
    }
    let n = spec.n();
    let mut report = MdsReport {
        patterns_checked: 0,
        failing: None,
    };
    for size in 1..=max_erasures.min(n) {
        for pattern in combinations(n, size) {
            report.patterns_checked += 1;
            if !pattern_decodable(spec, &pattern) {
                report.failing = Some(pattern);
                return Ok(report);
            }
        }
    }
    Ok(report)
}

/// Whether erasing exactly the given node indices leaves a uniquely
/// solvable system.
pub fn pattern_decodable(spec: &CodeSpec, pattern: &[usize]) -> bool {
    let system = erasure_system(spec, pattern);
    let unknowns = system.matrix.cols();
    unknowns == 0 || gf::rank(spec.field(), &system.matrix) == unknowns
}

/// Surviving parity equations restricted to the erased information cells.
pub(crate) struct ErasureSystem {
    /// Erased systematic positions, in unknown order (`p` unknowns each).
    pub data: Vec<usize>,
    /// `(parity, zigzag index)` of each equation row.
    pub equations: Vec<(u32, usize)>,
    pub matrix: Matrix,
}

pub(crate) fn erasure_system(spec: &CodeSpec, pattern: &[usize]) -> ErasureSystem {
    let p = spec.p();
    let data: Vec<usize> = pattern.iter().copied().filter(|&c| c < spec.k()).collect();
    let parities: Vec<u32> = (0..spec.r())
        .filter(|&s| !pattern.contains(&spec.node_index(Column::Parity(s))))
        .collect();
    let equations: Vec<(u32, usize)> = parities
        .iter()
        .flat_map(|&s| (0..p).map(move |x| (s, x)))
        .collect();
    let mut matrix = Matrix::zeros(equations.len(), data.len() * p);
    for (eq, &(s, x)) in equations.iter().enumerate() {
        for (slot, &column) in data.iter().enumerate() {
            let row = spec.zigzag_member(x, column, s);
            matrix[(eq, slot * p + row)] = spec.coefficient(row, column, s);
        }
    }
    ErasureSystem {
        data,
        equations,
        matrix,
    }
}

/// All `size`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(size);
    fn rec(start: usize, n: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, size, cur, out);
            cur.pop();
        }
    }
    rec(0, n, size, &mut current, &mut out);
    out
}
