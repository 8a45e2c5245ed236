//! `slocc`: graph states, stabilizer conditions and SLOCC-equivalence tests
//! from the command line.
//!
//! Results go to stdout (or `--out`) as JSON lines; a short human summary
//! goes to stderr. Exit codes: 0 equivalent / success, 1 not equivalent,
//! 2 inconclusive, 3 and above for errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use slocc_core::genstab::{DEFAULT_GENSTAB_LIMIT, HARD_GENSTAB_LIMIT};
use slocc_core::solver::recheck_verdict;
use slocc_core::state::DEFAULT_DENSE_LIMIT;
use slocc_core::{
    apply_slocc, build_graph_state, general_stabilizer_element, parse_graph, projector_stabilizer_element, scan,
    slocc_inverse, solve, verify_stabilizes, BitString, Category, Condition, Graph, Outcome, SeparableOperator,
    SloccOperator, SolveConfig, StateVector, Verdict,
};

const EXIT_ERROR: u8 = 3;
const EXIT_USAGE: u8 = 4;

#[derive(Parser)]
#[command(name = "slocc", version, about = "SLOCC-equivalence testing against graph states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct OutArg {
    /// Write results here instead of stdout.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct DenseArg {
    /// Largest qubit count for dense state vectors.
    #[arg(long, env = "SLOCC_DENSE_LIMIT", default_value_t = DEFAULT_DENSE_LIMIT)]
    dense_limit: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Build the graph state of a graph (JSON edge list or graph6).
    Graphstate {
        graph: PathBuf,
        #[command(flatten)]
        dense: DenseArg,
        #[command(flatten)]
        out: OutArg,
    },
    /// List stabilizer conditions grouped by support, one JSON line each.
    Conditions {
        graph: PathBuf,
        /// Largest support size, or "auto".
        #[arg(long, default_value = "auto")]
        max_support: String,
        /// Keep only groups of this category (I, II or III).
        #[arg(long)]
        category: Option<Category>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Decide whether a state is SLOCC-equivalent to a graph state.
    Test {
        state: PathBuf,
        graph: PathBuf,
        /// Relative verification tolerance.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 32)]
        multistart: usize,
        /// Largest support size used by the solver, or "auto".
        #[arg(long, default_value = "auto")]
        max_support: String,
        /// Re-check a verdict previously written by `test` instead of solving.
        #[arg(long, value_name = "VERDICT")]
        verify_only: Option<PathBuf>,
        #[command(flatten)]
        dense: DenseArg,
        #[command(flatten)]
        out: OutArg,
    },
    /// Sample random well-conditioned locals and apply them to a graph state.
    RandomSlocc {
        graph: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Where to write the operator (stdout after the state otherwise).
        #[arg(long)]
        slocc_out: Option<PathBuf>,
        #[command(flatten)]
        dense: DenseArg,
        #[command(flatten)]
        out: OutArg,
    },
    /// Separable stabilizer elements built from projector sums.
    Genstab {
        graph: PathBuf,
        /// Conjugate by this operator.
        #[arg(long)]
        slocc: Option<PathBuf>,
        /// Element index as a bitstring (site 0 first) or an integer (site 0
        /// most significant). All elements when omitted.
        #[arg(long)]
        index: Option<String>,
        #[arg(long, default_value_t = DEFAULT_GENSTAB_LIMIT)]
        dense_limit: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Apply an operator (or its inverse) to a state.
    Apply {
        state: PathBuf,
        slocc: PathBuf,
        #[arg(long)]
        inverse: bool,
        #[command(flatten)]
        out: OutArg,
    },
}

struct Output {
    lines: Vec<String>,
}

impl Output {
    fn new() -> Self {
        Output { lines: Vec::new() }
    }

    fn push<T: Serialize>(&mut self, value: &T) -> Result<()> {
        self.lines.push(serde_json::to_string(value)?);
        Ok(())
    }

    fn push_raw(&mut self, line: String) {
        self.lines.push(line);
    }

    fn write(&self, target: &OutArg) -> Result<()> {
        let mut text = self.lines.join("\n");
        text.push('\n');
        match &target.out {
            Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())?;
                Ok(out.flush()?)
            }
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_graph(path: &Path) -> Result<Graph> {
    parse_graph(&read(path)?).with_context(|| format!("parsing graph {}", path.display()))
}

fn load_state(path: &Path) -> Result<StateVector> {
    StateVector::from_json(&read(path)?).with_context(|| format!("parsing state {}", path.display()))
}

fn load_slocc(path: &Path) -> Result<SloccOperator> {
    SloccOperator::from_json(&read(path)?).with_context(|| format!("parsing operator {}", path.display()))
}

/// `"auto"` means the two smallest support sizes with the parity of `n`.
fn max_support(arg: &str, n: usize) -> Result<usize> {
    if arg == "auto" {
        return Ok(n.min(if n % 2 == 1 { 3 } else { 4 }));
    }
    let m: usize = arg.parse().map_err(|_| anyhow!("--max-support must be an integer or \"auto\", got {arg:?}"))?;
    if m > n {
        bail!("--max-support {m} exceeds qubit count {n}");
    }
    Ok(m)
}

fn parse_index(text: &str, n: usize) -> Result<BitString> {
    let t = text.trim();
    if t.len() == n && t.chars().all(|c| c == '0' || c == '1') {
        return Ok(t.parse()?);
    }
    let value: u64 = t
        .parse()
        .map_err(|_| anyhow!("index {t:?} is neither a {n}-bit string nor an integer"))?;
    BitString::from_index(n, value).map_err(|_| anyhow!("index {value} out of range for {n} qubits"))
}

#[derive(Serialize)]
struct ConditionLine<'a> {
    support: slocc_core::SiteSet,
    category: Category,
    #[serde(flatten)]
    condition: &'a Condition,
}

fn cmd_conditions(graph: &Path, max: &str, category: Option<Category>, out: &OutArg) -> Result<u8> {
    let g = load_graph(graph)?;
    let groups = scan(&g, max_support(max, g.n())?)?;
    let mut o = Output::new();
    let mut count = 0;
    for grp in groups.iter().filter(|grp| category.is_none_or(|c| c == grp.category)) {
        for c in &grp.conditions {
            o.push(&ConditionLine {
                support: grp.support,
                category: grp.category,
                condition: c,
            })?;
            count += 1;
        }
    }
    o.write(out)?;
    eprintln!("{count} conditions in {} groups", groups.len());
    Ok(0)
}

fn exit_for(outcome: Outcome) -> u8 {
    match outcome {
        Outcome::Equivalent => 0,
        Outcome::NotEquivalent => 1,
        Outcome::Inconclusive => 2,
    }
}

fn summarize(v: &Verdict) {
    match (&v.certificate, &v.witness, &v.search) {
        (Some(c), _, _) => eprintln!(
            "{:?}: verification residual {:.2e}, det S = {:.6}",
            v.outcome, c.verification_residual, c.det_s
        ),
        (_, Some(w), _) => eprintln!("{:?} at {:?}: {}", v.outcome, v.stage, w.describe()),
        (_, _, Some(s)) => eprintln!(
            "{:?}: {} starts on supports {:?}, best residual {:.2e}",
            v.outcome, s.starts, s.support_sizes, s.best_residual
        ),
        _ => eprintln!("{:?}", v.outcome),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_test(
    state: &Path,
    graph: &Path,
    tol: f64,
    seed: u64,
    multistart: usize,
    max: &str,
    verify_only: Option<&Path>,
    dense_limit: usize,
    out: &OutArg,
) -> Result<u8> {
    let g = load_graph(graph)?;
    let psi = load_state(state)?;
    if psi.n() != g.n() {
        bail!("state has {} qubits but graph has {}", psi.n(), g.n());
    }
    let mut o = Output::new();
    if let Some(path) = verify_only {
        let verdict: Verdict =
            serde_json::from_str(&read(path)?).with_context(|| format!("parsing verdict {}", path.display()))?;
        let (holds, mut again) = recheck_verdict(&psi, &g, &verdict, tol)?;
        if !holds {
            eprintln!("recorded evidence does not hold");
            again.outcome = Outcome::Inconclusive;
        }
        summarize(&again);
        o.push(&again)?;
        o.write(out)?;
        return Ok(exit_for(again.outcome));
    }
    let cfg = SolveConfig {
        tol,
        seed,
        multistart,
        max_support: (max != "auto").then(|| max_support(max, g.n())).transpose()?,
        dense_limit,
        ..SolveConfig::default()
    };
    let verdict = solve(&psi, &g, &cfg)?;
    summarize(&verdict);
    o.push(&verdict)?;
    o.write(out)?;
    Ok(exit_for(verdict.outcome))
}

fn cmd_random_slocc(graph: &Path, seed: u64, slocc_out: Option<&Path>, dense_limit: usize, out: &OutArg) -> Result<u8> {
    let g = load_graph(graph)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = SloccOperator::random(g.n(), &mut rng, 20.0);
    let psi = apply_slocc(&s, &build_graph_state(&g, dense_limit)?)?;
    let mut o = Output::new();
    o.push_raw(psi.to_json());
    match slocc_out {
        Some(p) => fs::write(p, s.to_json() + "\n").with_context(|| format!("writing {}", p.display()))?,
        None => o.push_raw(s.to_json()),
    }
    o.write(out)?;
    eprintln!("sampled {} locals with seed {seed}, det S = {:.6}", g.n(), s.det());
    Ok(0)
}

#[derive(Serialize)]
struct GenstabLine<'a> {
    index: BitString,
    #[serde(flatten)]
    op: &'a SeparableOperator,
    max_non_hermiticity: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    fix_residual: Option<f64>,
}

fn cmd_genstab(graph: &Path, slocc: Option<&Path>, index: Option<&str>, dense_limit: usize, out: &OutArg) -> Result<u8> {
    let g = load_graph(graph)?;
    let n = g.n();
    if dense_limit > HARD_GENSTAB_LIMIT {
        bail!("--dense-limit {dense_limit} exceeds the ceiling of {HARD_GENSTAB_LIMIT} qubits");
    }
    let s = slocc.map(load_slocc).transpose()?;
    let image = s
        .as_ref()
        .map(|s| apply_slocc(s, &build_graph_state(&g, dense_limit)?))
        .transpose()?;
    let indices: Vec<BitString> = match index {
        Some(t) => vec![parse_index(t, n)?],
        None => (0..1u64 << n).map(|i| BitString::from_index(n, i)).collect::<slocc_core::Result<_>>()?,
    };
    let mut o = Output::new();
    let mut worst: f64 = 0.0;
    for i in indices {
        let op = match &s {
            Some(s) => general_stabilizer_element(&g, s, i, dense_limit)?,
            None => projector_stabilizer_element(&g, i, dense_limit)?,
        };
        let fix_residual = image.as_ref().map(|psi| verify_stabilizes(psi, &op)).transpose()?;
        worst = worst.max(op.dense_residual).max(fix_residual.unwrap_or(0.0));
        o.push(&GenstabLine {
            index: i,
            op: &op,
            max_non_hermiticity: op.max_non_hermiticity(),
            fix_residual,
        })?;
    }
    o.write(out)?;
    eprintln!("{} elements, worst residual {worst:.2e}", o.lines.len());
    Ok(0)
}

fn cmd_apply(state: &Path, slocc: &Path, inverse: bool, out: &OutArg) -> Result<u8> {
    let psi = load_state(state)?;
    let mut s = load_slocc(slocc)?;
    if inverse {
        s = slocc_inverse(&s)?.0;
    }
    let mut o = Output::new();
    o.push_raw(apply_slocc(&s, &psi)?.to_json());
    o.write(out)?;
    Ok(0)
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Graphstate { graph, dense, out } => {
            let g = load_graph(&graph)?;
            let mut o = Output::new();
            o.push_raw(build_graph_state(&g, dense.dense_limit)?.to_json());
            o.write(&out)?;
            eprintln!("graph state on {} qubits, {} edges", g.n(), g.edge_count());
            Ok(0)
        }
        Command::Conditions {
            graph,
            max_support,
            category,
            out,
        } => cmd_conditions(&graph, &max_support, category, &out),
        Command::Test {
            state,
            graph,
            tol,
            seed,
            multistart,
            max_support,
            verify_only,
            dense,
            out,
        } => cmd_test(
            &state,
            &graph,
            tol,
            seed,
            multistart,
            &max_support,
            verify_only.as_deref(),
            dense.dense_limit,
            &out,
        ),
        Command::RandomSlocc {
            graph,
            seed,
            slocc_out,
            dense,
            out,
        } => cmd_random_slocc(&graph, seed, slocc_out.as_deref(), dense.dense_limit, &out),
        Command::Genstab {
            graph,
            slocc,
            index,
            dense_limit,
            out,
        } => cmd_genstab(&graph, slocc.as_deref(), index.as_deref(), dense_limit, &out),
        Command::Apply {
            state,
            slocc,
            inverse,
            out,
        } => cmd_apply(&state, &slocc, inverse, &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
