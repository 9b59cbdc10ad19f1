//! `zigzag`: stripe files across node files, rebuild lost nodes, scrub
//! corrupted ones, and inspect codes.

mod config;
mod store;

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;
use zigzag_core::analysis::ratio_report;
use zigzag_core::codec::{
    decode_erasures, decode_error, encode, rebuild_one, rebuild_plan, syndrome, CodecError, ErasedStripe,
    ErrorOutcome, Stripe,
};
use zigzag_core::construct::{build_code, build_code_with_table, verify_mds, BuildError, CodeParams, CodeSpec, Scheme};
use zigzag_core::gf::{Elem, Field};
use zigzag_core::num_rational::Rational64;
use zigzag_core::perms::Family;

use config::{family_kind, Config, ConfigError};
use store::{io_err, StoreError, StripeFileHeader};

/// Cells per code above which `ratio` skips the measured run unless asked.
const MEASURE_LIMIT: usize = 1 << 22;

#[derive(Parser)]
#[command(name = "zigzag", version, about = "Zigzag MDS array codes over node files")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Split INPUT into stripes and write one file per node into --out.
    Encode {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        input: PathBuf,
    },
    /// Restore one lost node and report how much was read.
    Rebuild {
        dir: PathBuf,
        #[arg(long)]
        node: usize,
    },
    /// Restore missing nodes; optionally reassemble the original file.
    Decode {
        dir: PathBuf,
        /// Nodes to treat as lost, in addition to absent files.
        #[arg(long, value_delimiter = ',')]
        missing: Vec<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Check every stripe and correct a single corrupted node.
    Scrub { dir: PathBuf },
    /// Exhaustively check the MDS property.
    Verify {
        #[arg(long)]
        config: PathBuf,
        /// Largest erasure pattern to check (default: number of parities).
        #[arg(long)]
        max_erasures: Option<usize>,
    },
    /// Predicted, measured and lower-bound rebuilding ratios.
    Ratio {
        #[arg(long)]
        config: PathBuf,
        /// Skip (or force) running every rebuild.
        #[arg(long, conflicts_with = "measure")]
        no_measure: bool,
        #[arg(long)]
        measure: bool,
        #[arg(long)]
        key_values: bool,
    },
    /// Print every zigzag coefficient as `row col parity value`.
    DumpCoefficients {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Debug, Error)]
enum Failure {
    #[error("{0}")]
    Config(String),
    #[error("uncorrectable: {0}")]
    Uncorrectable(String),
    #[error("{0}")]
    Other(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<BuildError> for Failure {
    fn from(e: BuildError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<StoreError> for Failure {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::Header(_) => Failure::Config(e.to_string()),
            StoreError::Payload(_) => Failure::Uncorrectable(e.to_string()),
            _ => Failure::Other(e.to_string()),
        }
    }
}

impl From<CodecError> for Failure {
    fn from(e: CodecError) -> Self {
        match e {
            CodecError::TooManyErasures { .. } | CodecError::Singular => Failure::Uncorrectable(e.to_string()),
            _ => Failure::Other(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("zigzag: {e}");
            ExitCode::from(match e {
                Failure::Config(_) => 3,
                Failure::Uncorrectable(_) => 2,
                Failure::Other(_) => 1,
            })
        }
    }
}

fn run(cmd: Cmd) -> Result<(), Failure> {
    match cmd {
        Cmd::Encode { config, out, input } => cmd_encode(&config, &out, &input),
        Cmd::Rebuild { dir, node } => cmd_rebuild(&dir, node),
        Cmd::Decode { dir, missing, output } => cmd_decode(&dir, &missing, output.as_deref()),
        Cmd::Scrub { dir } => cmd_scrub(&dir),
        Cmd::Verify { config, max_erasures } => {
            let spec = Config::load(&config)?.build()?;
            let report = verify_mds(&spec, max_erasures.unwrap_or(spec.r() as usize))?;
            println!("{spec}");
            match report.failing {
                None => {
                    println!("MDS: yes (checked {} patterns)", report.patterns_checked);
                    Ok(())
                }
                Some(p) => {
                    println!("MDS: no (erasing nodes {p:?} is not decodable)");
                    Err(Failure::Uncorrectable(format!("pattern {p:?}")))
                }
            }
        }
        Cmd::Ratio {
            config,
            no_measure,
            measure,
            key_values,
        } => {
            let cfg = Config::load(&config)?;
            let spec = cfg.build()?;
            let run = measure || (!no_measure && spec.p() * spec.k() * spec.k() <= MEASURE_LIMIT);
            let report = ratio_report(&spec, &cfg.params.family, run);
            if key_values {
                print!("{}", report.to_key_values());
            } else {
                print!("{report}");
                if !run {
                    println!("  (measurement skipped; pass --measure to run every rebuild)");
                }
            }
            Ok(())
        }
        Cmd::DumpCoefficients { config } => {
            let spec = Config::load(&config)?.build()?;
            print!("{}", spec.dump_coefficients());
            Ok(())
        }
    }
}

/// An encoded directory.
struct Store {
    dir: PathBuf,
    header: StripeFileHeader,
    spec: CodeSpec,
    width: usize,
}

impl Store {
    fn open(dir: &Path) -> Result<Store, Failure> {
        let path = dir.join(store::HEADER_FILE);
        let header = StripeFileHeader::from_bytes(&fs::read(&path).map_err(io_err(&path))?)?;
        let field: Field = header.field.parse().map_err(|e| Failure::Config(format!("{e}")))?;
        let scheme: Scheme = header.scheme.parse()?;
        let family =
            Family::parse(header.r as u32, &header.vectors).map_err(|e| Failure::Config(e.to_string()))?;
        let params = CodeParams {
            family: family_kind(&family),
            m: header.m as usize,
            r: header.r as u32,
            s: header.s as usize,
            scheme,
            field: Some(field.clone()),
        };
        let spec = if scheme == Scheme::Table {
            let path = dir.join(store::TABLE_FILE);
            build_code_with_table(&params, &fs::read_to_string(&path).map_err(io_err(&path))?)?
        } else {
            build_code(&params)?
        };
        Ok(Store {
            dir: dir.to_path_buf(),
            width: store::symbol_width(field.order()),
            header,
            spec,
        })
    }

    fn stripes(&self) -> usize {
        self.header.stripes as usize
    }

    fn node_symbols(&self) -> usize {
        self.stripes() * self.spec.p()
    }

    /// Raw node contents, `None` for absent files or nodes in `drop`.
    fn read_nodes(&self, drop: &[usize]) -> Result<Vec<Option<Vec<u32>>>, Failure> {
        (0..self.spec.n())
            .map(|node| {
                if drop.contains(&node) {
                    return Ok(None);
                }
                Ok(store::read_node(&store::node_path(&self.dir, node), self.width, self.node_symbols())?)
            })
            .collect()
    }

    fn write_node(&self, node: usize, symbols: &[u32]) -> Result<(), Failure> {
        Ok(store::write_node(&store::node_path(&self.dir, node), symbols, self.width)?)
    }

    /// Column `node` of stripe `t` as field elements; `Err(node)` if a
    /// stored symbol lies outside the field.
    fn column(&self, raw: &[u32], t: usize) -> Result<Vec<Elem>, u32> {
        let p = self.spec.p();
        raw[t * p..(t + 1) * p]
            .iter()
            .map(|&v| self.spec.field().elem(v).map_err(|_| v))
            .collect()
    }

    fn erased_stripe(&self, nodes: &[Option<Vec<u32>>], t: usize) -> Result<ErasedStripe, Failure> {
        let columns = nodes
            .iter()
            .enumerate()
            .map(|(node, raw)| {
                raw.as_ref()
                    .map(|raw| {
                        self.column(raw, t).map_err(|v| {
                            Failure::Uncorrectable(format!(
                                "node {node} holds symbol {v} outside {}; run scrub",
                                self.spec.field()
                            ))
                        })
                    })
                    .transpose()
            })
            .collect::<Result<_, _>>()?;
        Ok(ErasedStripe { columns })
    }
}

fn values(column: &[Elem]) -> impl Iterator<Item = u32> + '_ {
    column.iter().map(|e| e.value())
}

fn cmd_encode(config: &Path, out: &Path, input: &Path) -> Result<(), Failure> {
    let cfg = Config::load(config)?;
    let spec = cfg.build()?;
    let data = fs::read(input).map_err(|e| Failure::Other(format!("{}: {e}", input.display())))?;
    let q = spec.field().order();
    let mut symbols = store::bytes_to_symbols(&data, q);
    let per_stripe = spec.p() * spec.k();
    let stripes = symbols.len().div_ceil(per_stripe);
    symbols.resize(stripes * per_stripe, 0);
    let mut nodes = vec![Vec::with_capacity(stripes * spec.p()); spec.n()];
    for chunk in symbols.chunks(per_stripe) {
        let info: Vec<Vec<Elem>> = chunk
            .chunks(spec.p())
            .map(|col| col.iter().map(|&v| spec.field().elem(v).expect("digit below q")).collect())
            .collect();
        let stripe = encode(&spec, &info)?;
        for (node, col) in stripe.columns().iter().enumerate() {
            nodes[node].extend(values(col));
        }
    }
    fs::create_dir_all(out).map_err(io_err(out))?;
    let width = store::symbol_width(q);
    for (node, syms) in nodes.iter().enumerate() {
        store::write_node(&store::node_path(out, node), syms, width)?;
    }
    let header = StripeFileHeader {
        m: spec.m() as u8,
        r: spec.r() as u8,
        s: spec.s() as u8,
        field: spec.field().token(),
        scheme: spec.scheme().token().to_string(),
        vectors: spec.family().to_text(),
        payload_len: data.len() as u64,
        stripes: stripes as u32,
    };
    let write = |name: &str, bytes: &[u8]| -> Result<(), Failure> {
        let path = out.join(name);
        Ok(fs::write(&path, bytes).map_err(io_err(&path))?)
    };
    write(store::HEADER_FILE, &header.to_bytes())?;
    write(store::MANIFEST_FILE, header.manifest(spec.n(), width).as_bytes())?;
    if spec.scheme() == Scheme::Table {
        write(store::TABLE_FILE, spec.dump_coefficients().as_bytes())?;
    }
    println!("{spec}");
    println!(
        "encoded {} bytes into {stripes} stripes across {} nodes in {}",
        data.len(),
        spec.n(),
        out.display()
    );
    Ok(())
}

fn cmd_rebuild(dir: &Path, node: usize) -> Result<(), Failure> {
    let st = Store::open(dir)?;
    let spec = &st.spec;
    if node >= spec.n() {
        return Err(Failure::Other(format!("node {node} out of range (n = {})", spec.n())));
    }
    let nodes = st.read_nodes(&[node])?;
    let others: Vec<usize> = (0..spec.n()).filter(|&i| i != node && nodes[i].is_none()).collect();
    if !others.is_empty() {
        return Err(Failure::Other(format!(
            "nodes {others:?} are also missing; use `zigzag decode` for several lost nodes"
        )));
    }
    let mut restored = Vec::with_capacity(st.node_symbols());
    let mut reads = vec![0usize; spec.n()];
    for t in 0..st.stripes() {
        let (col, plan) = rebuild_one(spec, &st.erased_stripe(&nodes, t)?)?;
        restored.extend(values(&col));
        for (i, rows) in plan.reads.iter().enumerate() {
            reads[i] += rows.len();
        }
    }
    if st.stripes() == 0 {
        // no data: report what one stripe would cost
        reads = rebuild_plan(spec, node).reads.iter().map(Vec::len).collect();
    }
    st.write_node(node, &restored)?;
    let total: usize = reads.iter().sum();
    let available = st.stripes().max(1) * spec.p() * (spec.n() - 1);
    println!("rebuilt node {node} ({} stripes)", st.stripes());
    println!("{:>6} {:>12}", "node", "cells read");
    for (i, r) in reads.iter().enumerate().filter(|&(i, _)| i != node) {
        println!("{i:>6} {r:>12}");
    }
    let ratio = Rational64::new(total as i64, available as i64);
    println!("read {total} of {available} cells");
    println!("ratio {ratio}");
    Ok(())
}

fn cmd_decode(dir: &Path, missing: &[usize], output: Option<&Path>) -> Result<(), Failure> {
    let st = Store::open(dir)?;
    let spec = &st.spec;
    if let Some(&bad) = missing.iter().find(|&&i| i >= spec.n()) {
        return Err(Failure::Other(format!("node {bad} out of range (n = {})", spec.n())));
    }
    let nodes = st.read_nodes(missing)?;
    let lost: Vec<usize> = (0..spec.n()).filter(|&i| nodes[i].is_none()).collect();
    if lost.len() > spec.r() as usize {
        return Err(Failure::Uncorrectable(format!(
            "{} nodes lost ({lost:?}), at most {} can be restored",
            lost.len(),
            spec.r()
        )));
    }
    let mut restored = vec![Vec::with_capacity(st.node_symbols()); spec.n()];
    let mut info = Vec::new();
    for t in 0..st.stripes() {
        let stripe = decode_erasures(spec, &st.erased_stripe(&nodes, t)?)?;
        for &i in &lost {
            restored[i].extend(values(stripe.column(i)));
        }
        if output.is_some() {
            for col in stripe.info(spec) {
                info.extend(values(col));
            }
        }
    }
    for &i in &lost {
        st.write_node(i, &restored[i])?;
    }
    if lost.is_empty() {
        println!("no nodes missing");
    } else {
        println!("restored nodes {lost:?} ({} stripes)", st.stripes());
    }
    if let Some(out) = output {
        let bytes = store::symbols_to_bytes(&info, spec.field().order(), st.header.payload_len as usize)?;
        fs::write(out, &bytes).map_err(io_err(out))?;
        println!("wrote {} bytes to {}", bytes.len(), out.display());
    }
    Ok(())
}

fn cmd_scrub(dir: &Path) -> Result<(), Failure> {
    let st = Store::open(dir)?;
    let spec = &st.spec;
    let nodes = st.read_nodes(&[])?;
    if let Some(lost) = nodes.iter().position(Option::is_none) {
        return Err(Failure::Other(format!("node {lost} is missing; use `zigzag rebuild` first")));
    }
    let raw: Vec<Vec<u32>> = nodes.into_iter().map(Option::unwrap).collect();
    let mut fixed = raw.clone();
    let mut corrected = BTreeSet::new();
    let mut failed = Vec::new();
    let p = spec.p();
    for t in 0..st.stripes() {
        let columns: Vec<Result<Vec<Elem>, u32>> = raw.iter().map(|r| st.column(r, t)).collect();
        let invalid: Vec<usize> = (0..spec.n()).filter(|&i| columns[i].is_err()).collect();
        let result = if invalid.is_empty() {
            let stripe = Stripe::from_columns(spec, columns.into_iter().map(Result::unwrap).collect())?;
            locate(spec, &stripe)?
        } else if invalid.len() == 1 {
            // a symbol outside the field marks its node as the bad one
            let erased = ErasedStripe {
                columns: columns.into_iter().map(Result::ok).collect(),
            };
            decode_erasures(spec, &erased).ok().map(|s| Some((invalid[0], s)))
        } else {
            None
        };
        match result {
            None => failed.push(t),
            Some(None) => {}
            Some(Some((node, stripe))) => {
                corrected.insert(node);
                for (i, col) in stripe.columns().iter().enumerate() {
                    fixed[i].splice(t * p..(t + 1) * p, values(col));
                }
            }
        }
    }
    if !failed.is_empty() {
        return Err(Failure::Uncorrectable(format!(
            "stripes {failed:?} have errors in more than one node"
        )));
    }
    if corrected.is_empty() {
        println!("no error ({} stripes checked)", st.stripes());
        return Ok(());
    }
    for &node in &corrected {
        st.write_node(node, &fixed[node])?;
        println!("corrected node {node}");
    }
    Ok(())
}

/// `Some(None)`: clean. `Some(Some(..))`: one node corrected. `None`: not
/// correctable.
fn locate(spec: &CodeSpec, stripe: &Stripe) -> Result<Option<Option<(usize, Stripe)>>, Failure> {
    if spec.r() != 2 {
        return Ok(syndrome(spec, stripe).is_zero().then_some(None));
    }
    Ok(match decode_error(spec, stripe)? {
        ErrorOutcome::Clean => Some(None),
        ErrorOutcome::Corrected { node, stripe } => Some(Some((node, stripe))),
        ErrorOutcome::Uncorrectable => None,
    })
}
