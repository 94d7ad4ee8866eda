//! Command-line front end.
//!
//! Exit codes: 0 success, 1 condition or verification failure, 2 input
//! error, 3 out of regime or over a search cap, 4 budget exhausted.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::conditions::{EnclosureParams, Regime};
use crate::decomp::{admissibility_violation, verify_enclosing, Decomposition, Enclosing};
use crate::detach::DEFAULT_BUDGET;
use crate::error::Error;
use crate::mgraph::{Multigraph, Pair};
use crate::oracle::{brute_force_enclose, enumerate_decompositions, random_admissible, OracleLimits, OracleOutcome};
use crate::pipeline::enclose;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILED: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_REGIME: u8 = 3;
pub const EXIT_BUDGET: u8 = 4;

/// On-disk decomposition: `classes[i]` lists the edges of class i, repeated
/// pairs encoding multiplicity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub n: usize,
    pub lambda: u32,
    pub k: usize,
    pub classes: Vec<Vec<[usize; 2]>>,
}

impl InstanceFile {
    pub fn from_decomposition(d: &Decomposition, lambda: u32) -> Self {
        InstanceFile {
            n: d.vertex_count(),
            lambda,
            k: d.k(),
            classes: d
                .classes()
                .iter()
                .map(|c| c.edge_list().into_iter().map(|(u, v)| [u, v]).collect())
                .collect(),
        }
    }

    /// Checks the file describes a full decomposition of lambda*K_n.
    pub fn to_decomposition(&self) -> Result<Decomposition, Error> {
        if self.classes.len() != self.k {
            return Err(Error::ClassCountMismatch {
                expected: self.k,
                found: self.classes.len(),
            });
        }
        let mut classes = Vec::with_capacity(self.k);
        for class in &self.classes {
            let mut g = Multigraph::empty(self.n);
            for &[u, v] in class {
                if u == v {
                    return Err(Error::LoopPair(Pair::new(u, v)));
                }
                g.add_edges(u, v, 1)?;
            }
            classes.push(g);
        }
        Decomposition::new(Multigraph::complete(self.n, self.lambda), classes)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }
}

#[derive(Debug, Parser)]
#[command(name = "enclosure", version, about = "Enclose decompositions of lambda*K_n in 2-edge-connected r-factorizations of mu*K_m")]
pub struct Cli {
    /// Print reports as JSON.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Target {
    /// Order of the enclosing complete multigraph.
    #[arg(long)]
    pub m: usize,
    /// Edge multiplicity of the enclosing complete multigraph.
    #[arg(long)]
    pub mu: u32,
    /// Degree of every class in the enclosing factorization.
    #[arg(long)]
    pub r: u32,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Report admissibility, p and the applicable condition battery.
    Check {
        instance: PathBuf,
        #[command(flatten)]
        target: Target,
    },
    /// Construct an enclosing factorization.
    Enclose {
        instance: PathBuf,
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Node budget for the detachment search.
        #[arg(long, env = "ENCLOSE_BUDGET", default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        /// Output file for the enclosing decomposition; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Output file for the extension trace and search statistics.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Check that one instance encloses another.
    Verify {
        instance: PathBuf,
        enclosing: PathBuf,
        #[arg(long)]
        r: u32,
    },
    /// Decide existence by exhaustive search.
    Oracle {
        instance: PathBuf,
        #[command(flatten)]
        target: Target,
        #[arg(long, env = "ENCLOSE_BUDGET", default_value_t = OracleLimits::default().budget)]
        budget: u64,
        /// Output file for a witness; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a random admissible instance or enumerate all of them.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        lambda: u32,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 2)]
        r: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Every decomposition up to color permutation.
        #[arg(long)]
        exhaustive: bool,
        /// Write one file per instance here instead of JSON lines on stdout.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

/// An error paired with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidVertex { .. }
        | Error::MissingEdge { .. }
        | Error::VertexCountMismatch { .. }
        | Error::NotAPartition { .. }
        | Error::ClassCountMismatch { .. }
        | Error::BaseMismatch { .. }
        | Error::LoopPair(_)
        | Error::InvalidParams(_) => EXIT_INPUT,
        Error::ConditionFailed { .. } | Error::Precondition(_) | Error::Inconsistency(_) => EXIT_FAILED,
        Error::OutOfRegime(_) | Error::CapExceeded(_) => EXIT_REGIME,
        Error::BudgetExhausted { .. } => EXIT_BUDGET,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::new(exit_code(&e), e.to_string())
    }
}

fn input_error(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::new(EXIT_INPUT, format!("{}: {e}", path.display()))
}

pub fn read_instance(path: &Path) -> Result<(InstanceFile, Decomposition), Failure> {
    let text = fs::read_to_string(path).map_err(|e| input_error(path, e))?;
    let file: InstanceFile = serde_json::from_str(&text).map_err(|e| input_error(path, e))?;
    let d = file.to_decomposition().map_err(|e| input_error(path, e))?;
    Ok((file, d))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", p.display()))),
        None => {
            let mut out = io::stdout().lock();
            writeln!(out, "{text}").map_err(|e| Failure::new(EXIT_INPUT, e.to_string()))
        }
    }
}

fn params_for(file: &InstanceFile, t: &Target) -> Result<EnclosureParams, Failure> {
    Ok(EnclosureParams::new(file.n, t.m, file.lambda, t.mu, t.r, file.k)?)
}

fn cmd_check(json: bool, instance: &Path, target: &Target) -> Result<u8, Failure> {
    let (file, g) = read_instance(instance)?;
    let params = params_for(&file, target)?;
    let r = params.r;
    let adm_r = admissibility_violation(g.classes(), r);
    let adm_r1 = (r >= 3).then(|| admissibility_violation(g.classes(), r - 1));
    let regime = Regime::select(&params);
    let report = regime.map(|reg| reg.battery(&g, &params)).transpose()?;
    let code = match &report {
        None => EXIT_REGIME,
        Some(rep) if rep.overall() => EXIT_OK,
        Some(_) => EXIT_FAILED,
    };
    if json {
        let conditions: Vec<_> = report
            .iter()
            .flat_map(|rep| rep.conditions.iter())
            .map(|c| json!({"name": c.name, "holds": c.holds, "reason": c.reason}))
            .collect();
        let v = json!({
            "n": params.n, "m": params.m, "lambda": params.lambda, "mu": params.mu,
            "r": r, "k": params.k, "p": params.p.to_string(),
            "r_admissible": adm_r.is_none(),
            "r_minus_1_admissible": adm_r1.as_ref().map(|v| v.is_none()),
            "regime": regime.map(|x| x.to_string()),
            "conditions": conditions,
            "holds": code == EXIT_OK,
        });
        write_output(None, &v.to_string())?;
        return Ok(code);
    }
    let mut out = String::new();
    out.push_str(&format!(
        "n = {}, m = {}, lambda = {}, mu = {}, r = {}, k = {}\np = {}\n",
        params.n, params.m, params.lambda, params.mu, r, params.k, params.p
    ));
    let describe = |v: &Option<crate::decomp::Violation>| match v {
        None => "yes".to_string(),
        Some(v) => format!("no ({v})"),
    };
    out.push_str(&format!("{r}-admissible: {}\n", describe(&adm_r)));
    if let Some(v) = &adm_r1 {
        out.push_str(&format!("{}-admissible: {}\n", r - 1, describe(v)));
    }
    match (regime, &report) {
        (Some(reg), Some(rep)) => out.push_str(&format!("battery {reg}:\n{rep}")),
        _ => out.push_str("no applicable battery for these parameters\n"),
    }
    write_output(None, out.trim_end())?;
    Ok(code)
}

#[allow(clippy::too_many_arguments)]
fn cmd_enclose(
    instance: &Path,
    target: &Target,
    seed: u64,
    budget: u64,
    out: Option<&Path>,
    trace: Option<&Path>,
) -> Result<u8, Failure> {
    let (file, g) = read_instance(instance)?;
    let params = params_for(&file, target)?;
    let outcome = enclose(&g, &params, seed, budget)?;
    let outer = InstanceFile::from_decomposition(&outcome.enclosing.outer, params.mu);
    let text = outer.to_json();

    // self-check on the serialized form
    let reread: InstanceFile = serde_json::from_str(&text).map_err(|e| Failure::new(EXIT_FAILED, e.to_string()))?;
    let d = reread.to_decomposition()?;
    let report = verify_enclosing(&g, &Enclosing::new(d), &params)?;
    if !report.is_valid() {
        return Err(Failure::new(
            EXIT_FAILED,
            format!("refusing to write an invalid enclosing: {:?}", report.diagnostics),
        ));
    }
    write_output(out, &text)?;
    if let Some(path) = trace {
        let v = json!({
            "regime": outcome.regime.to_string(),
            "seed": seed,
            "extension": outcome.trace,
            "detach": {
                "nodes": outcome.detach.nodes,
                "restarts": outcome.detach.restarts,
                "steps": outcome.detach.steps,
            },
        });
        write_output(Some(path), &serde_json::to_string_pretty(&v).expect("trace serializes"))?;
    }
    Ok(EXIT_OK)
}

fn cmd_verify(json: bool, instance: &Path, enclosing: &Path, r: u32) -> Result<u8, Failure> {
    let (inner_file, inner) = read_instance(instance)?;
    let (outer_file, outer) = read_instance(enclosing)?;
    if inner_file.k != outer_file.k {
        return Err(Failure::new(
            EXIT_INPUT,
            format!("{} classes inside, {} outside", inner_file.k, outer_file.k),
        ));
    }
    let params = EnclosureParams::new(inner_file.n, outer_file.n, inner_file.lambda, outer_file.lambda, r, inner_file.k)?;
    let report = verify_enclosing(&inner, &Enclosing::new(outer), &params)?;
    let code = if report.is_valid() { EXIT_OK } else { EXIT_FAILED };
    if json {
        let diags: Vec<String> = report.diagnostics.iter().map(|d| d.to_string()).collect();
        write_output(None, &json!({"valid": report.is_valid(), "diagnostics": diags}).to_string())?;
    } else if report.is_valid() {
        write_output(None, "valid enclosing")?;
    } else {
        let lines: Vec<String> = report.diagnostics.iter().map(|d| d.to_string()).collect();
        write_output(None, &format!("invalid enclosing\n{}", lines.join("\n")))?;
    }
    Ok(code)
}

fn cmd_oracle(json: bool, instance: &Path, target: &Target, budget: u64, out: Option<&Path>) -> Result<u8, Failure> {
    let (file, g) = read_instance(instance)?;
    let params = params_for(&file, target)?;
    let limits = OracleLimits {
        budget,
        ..OracleLimits::default()
    };
    let (outcome, stats) = brute_force_enclose(&g, &params, limits)?;
    let (label, code) = match &outcome {
        OracleOutcome::Found(_) => ("FOUND", EXIT_OK),
        OracleOutcome::NoneExists => ("NONE", EXIT_FAILED),
        OracleOutcome::BudgetExhausted => ("BUDGET", EXIT_BUDGET),
    };
    let status = if json {
        json!({"outcome": label, "nodes": stats.nodes}).to_string()
    } else {
        format!("{label} after {} nodes", stats.nodes)
    };
    if let OracleOutcome::Found(e) = &outcome {
        let witness = InstanceFile::from_decomposition(&e.outer, params.mu).to_json();
        match out {
            Some(p) => {
                write_output(Some(p), &witness)?;
                eprintln!("{status}");
            }
            None => {
                eprintln!("{status}");
                write_output(None, &witness)?;
            }
        }
    } else {
        write_output(None, &status)?;
    }
    Ok(code)
}

#[allow(clippy::too_many_arguments)]
fn cmd_gen(
    n: usize,
    lambda: u32,
    k: usize,
    r: u32,
    seed: u64,
    exhaustive: bool,
    out_dir: Option<&Path>,
) -> Result<u8, Failure> {
    if !exhaustive {
        let d = random_admissible(n, lambda, k, r, seed).map_err(|e| match e {
            Error::Precondition(msg) => Failure::new(EXIT_REGIME, msg),
            other => other.into(),
        })?;
        let text = InstanceFile::from_decomposition(&d, lambda).to_json();
        return match out_dir {
            Some(dir) => {
                fs::create_dir_all(dir).map_err(|e| input_error(dir, e))?;
                write_output(Some(&dir.join(format!("instance_{seed}.json"))), &text)?;
                Ok(EXIT_OK)
            }
            None => write_output(None, &text).map(|_| EXIT_OK),
        };
    }
    let stream = enumerate_decompositions(n, lambda, k, true)?;
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir).map_err(|e| input_error(dir, e))?;
    }
    let mut stdout = io::stdout().lock();
    for (i, d) in stream.enumerate() {
        let file = InstanceFile::from_decomposition(&d, lambda);
        match out_dir {
            Some(dir) => write_output(Some(&dir.join(format!("instance_{i:05}.json"))), &file.to_json())?,
            None => writeln!(stdout, "{}", serde_json::to_string(&file).expect("instance serializes"))
                .map_err(|e| Failure::new(EXIT_INPUT, e.to_string()))?,
        }
    }
    Ok(EXIT_OK)
}

pub fn run(cli: Cli) -> Result<u8, Failure> {
    let json = cli.json;
    match cli.command {
        Command::Check { instance, target } => cmd_check(json, &instance, &target),
        Command::Enclose {
            instance,
            target,
            seed,
            budget,
            out,
            trace,
        } => cmd_enclose(&instance, &target, seed, budget, out.as_deref(), trace.as_deref()),
        Command::Verify { instance, enclosing, r } => cmd_verify(json, &instance, &enclosing, r),
        Command::Oracle {
            instance,
            target,
            budget,
            out,
        } => cmd_oracle(json, &instance, &target, budget, out.as_deref()),
        Command::Gen {
            n,
            lambda,
            k,
            r,
            seed,
            exhaustive,
            out_dir,
        } => cmd_gen(n, lambda, k, r, seed, exhaustive, out_dir.as_deref()),
    }
}

pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { EXIT_OK });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
