//! Command-line front end: argument parsing, dispatch, and reports.

use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use serde::Serialize;
use serde_json::{json, Value};

use crate::chainops::{self, Composite, CyclicHom};
use crate::error::{Error, Result};
use crate::grouphom::{self, Chain, GroupSpec, Ring};
use crate::positivity::{self, FailureReason, Outcome};
use crate::text::parse_chain;

pub const REPORT_SCHEMA: u32 = 1;
pub const SEED: u64 = 0;

#[derive(Parser, Debug, Clone, Serialize)]
#[command(
    name = "psc",
    version,
    about = "Homology, chain operations and positivity certificates for finite abelian p-groups"
)]
pub struct Cli {
    /// Emit a JSON report.
    #[arg(long, global = true)]
    pub json: bool,
    /// Include wall-clock timing in the report.
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(tag = "subcommand", rename_all = "snake_case")]
pub enum Command {
    /// Homology of the classifying space in one degree or a range.
    Homology(HomologyArgs),
    /// Apply a chain-level operation.
    #[command(subcommand)]
    Operate(Operation),
    /// Certify positivity of an atoral integral class.
    Certify(CertifyArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct GroupArgs {
    #[arg(long)]
    pub p: u64,
    /// Comma-separated exponents, ascending.
    #[arg(long, value_delimiter = ',', required = true)]
    pub alphas: Vec<u32>,
}

impl GroupArgs {
    fn spec(&self) -> Result<GroupSpec> {
        GroupSpec::new(self.p, self.alphas.clone())
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct HomologyArgs {
    #[command(flatten)]
    pub group: GroupArgs,
    /// Single degree.
    #[arg(long, conflicts_with = "degrees")]
    pub degree: Option<u32>,
    /// Inclusive range `a..b`.
    #[arg(long)]
    pub degrees: Option<String>,
    /// `Z` or `mod:L` for coefficients in `Z/p^L`.
    #[arg(long, default_value = "Z")]
    pub ring: String,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(tag = "operation", rename_all = "snake_case")]
pub enum Operation {
    /// Bockstein of a chain read mod `p^ell`, landing mod `p`.
    Bockstein {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long)]
        ell: u32,
        #[arg(long)]
        chain: String,
    },
    /// Derivation of order `kappa` on chains mod `p^ell`.
    Milnor {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long)]
        kappa: u32,
        #[arg(long)]
        ell: u32,
        #[arg(long)]
        chain: String,
    },
    /// Image of `c_degree` under the diagonal of `Z/p^alpha`, mod `p^ell`.
    Diagonal {
        #[arg(long, default_value_t = 3)]
        p: u64,
        #[arg(long)]
        alpha: u32,
        #[arg(long)]
        ell: u32,
        #[arg(long)]
        degree: u32,
    },
    /// Map induced by `1 -> multiplier` from `Z/p^source` to `Z/p^target`.
    Induced {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        source: u32,
        #[arg(long)]
        target: u32,
        #[arg(long, default_value_t = 1)]
        multiplier: u64,
        #[arg(long)]
        chain: String,
        #[arg(long, default_value = "Z")]
        ring: String,
    },
    /// Pushforward along a composite given as JSON.
    Pushforward {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long)]
        map: String,
        #[arg(long)]
        chain: String,
        #[arg(long, default_value = "Z")]
        ring: String,
    },
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub group: GroupArgs,
    #[arg(long)]
    pub chain: String,
    /// Do not use the bordism obstructions.
    #[arg(long)]
    pub no_assume_bordism: bool,
}

/// Result payload with its human rendering and exit code.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub exit_code: i32,
    pub result: Value,
    pub text: String,
}

/// Everything a process run prints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOutput {
    pub stdout: String,
    pub stderr: String,
    pub exit_code: i32,
}

pub fn parse_ring(s: &str) -> Result<Ring> {
    let t = s.trim();
    if t.eq_ignore_ascii_case("z") {
        return Ok(Ring::Integers);
    }
    if let Some(l) = t.strip_prefix("mod:") {
        let l: u32 = l.parse().map_err(|_| Error::Parse(format!("bad ring '{s}'")))?;
        let r = Ring::ModPrimePower(l);
        r.validate()?;
        return Ok(r);
    }
    Err(Error::Parse(format!("ring must be 'Z' or 'mod:L', got '{s}'")))
}

fn parse_range(s: &str) -> Result<(u32, u32)> {
    let bad = || Error::Parse(format!("degree range must be 'a..b', got '{s}'"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let a: u32 = a.trim().parse().map_err(|_| bad())?;
    let b: u32 = b.trim().parse().map_err(|_| bad())?;
    if a > b {
        return Err(bad());
    }
    Ok((a, b))
}

fn number(x: &BigInt) -> Value {
    match u64::try_from(x) {
        Ok(v) => json!(v),
        Err(_) => json!(x.to_string()),
    }
}

fn chain_input(spec: &GroupSpec, ring: Ring, text: &str) -> Result<Chain> {
    let c = parse_chain(spec, ring, text)?;
    grouphom::check_degree(c.degree)?;
    Ok(c)
}

pub fn run_homology(a: &HomologyArgs) -> Result<Report> {
    let spec = a.group.spec()?;
    let ring = parse_ring(&a.ring)?;
    let (lo, hi) = match (&a.degree, &a.degrees) {
        (Some(d), _) => (*d, *d),
        (None, Some(r)) => parse_range(r)?,
        (None, None) => return Err(Error::Parse("either --degree or --degrees is required".into())),
    };
    grouphom::check_degree(hi)?;
    let mut rows = Vec::new();
    let mut text = String::new();
    for d in lo..=hi {
        let h = grouphom::homology(&spec, d, ring)?;
        let factors: Vec<Value> = h.invariant_factors.iter().map(number).collect();
        let reps: Vec<String> = h.representatives.iter().map(|c| c.to_string()).collect();
        let order = h.order();
        rows.push(json!({
            "degree": d,
            "invariant_factors": factors,
            "order": order.as_ref().map(number).unwrap_or(Value::Null),
            "representatives": reps,
        }));
        let fs: Vec<String> = h.invariant_factors.iter().map(|x| x.to_string()).collect();
        let ord = order.map(|o| o.to_string()).unwrap_or_else(|| "infinite".into());
        text.push_str(&format!("H_{d}({spec}; {ring}): factors [{}], order {ord}\n", fs.join(", ")));
        for r in &reps {
            text.push_str(&format!("  {r}\n"));
        }
    }
    Ok(Report { exit_code: 0, result: json!({ "spec": spec, "ring": ring.to_string(), "degrees": rows }), text })
}

fn chain_report(c: &Chain) -> Report {
    Report { exit_code: 0, result: json!({ "chain": c, "text": c.to_string() }), text: format!("{c}\n") }
}

pub fn run_operate(op: &Operation) -> Result<Report> {
    let out = match op {
        Operation::Bockstein { group, ell, chain } => {
            let spec = group.spec()?;
            let c = chain_input(&spec, Ring::ModPrimePower(*ell), chain)?;
            chainops::bockstein_chain(&c, *ell)?
        }
        Operation::Milnor { group, kappa, ell, chain } => {
            let spec = group.spec()?;
            let c = chain_input(&spec, Ring::ModPrimePower(*ell), chain)?;
            chainops::milnor_chain(&c, *kappa, *ell)?
        }
        Operation::Diagonal { p, alpha, ell, degree } => {
            grouphom::check_degree(*degree)?;
            let spec = GroupSpec::cyclic(*p, *alpha)?;
            let m = chainops::diagonal(*p, *alpha, *ell, *degree)?;
            m.apply(&Chain::basis(&spec, Ring::ModPrimePower(*ell), vec![*degree])?)?
        }
        Operation::Induced { p, source, target, multiplier, chain, ring } => {
            let ring = parse_ring(ring)?;
            let h = CyclicHom::new(*p, *source, *target, *multiplier)?;
            let spec = GroupSpec::cyclic(*p, *source)?;
            let c = chain_input(&spec, ring, chain)?;
            chainops::induced_cyclic_map(&h, c.degree, ring)?.apply(&c)?
        }
        Operation::Pushforward { group, map, chain, ring } => {
            let spec = group.spec()?;
            let ring = parse_ring(ring)?;
            let f: Composite = serde_json::from_str(map).map_err(|e| Error::Parse(format!("map: {e}")))?;
            let c = chain_input(&spec, ring, chain)?;
            f.apply(&c)?
        }
    };
    Ok(chain_report(&out))
}

fn failure_text(f: &FailureReason) -> String {
    match f {
        FailureReason::NotAtoral { subset, ell } => {
            let s: Vec<String> = subset.iter().map(|i| (i + 1).to_string()).collect();
            let l = ell.map(|l| format!(", l = {l}")).unwrap_or_default();
            format!("NotAtoral: toral on factors {{{}}}{l}\n", s.join(","))
        }
        FailureReason::ObstructedByMilnorDiff { kappa, ell, witness } => {
            format!("ObstructedByMilnorDiff: kappa = {kappa}, l = {ell}, witness {witness}\n")
        }
        FailureReason::ObstructedByBockstein { witness } => format!("ObstructedByBockstein: witness {witness}\n"),
        FailureReason::Incomplete { residual, explanation } => {
            format!("Incomplete: {explanation}; residual {residual}\n")
        }
    }
}

pub fn run_certify(a: &CertifyArgs) -> Result<Report> {
    let spec = a.group.spec()?;
    let h = chain_input(&spec, Ring::Integers, &a.chain)?;
    if !grouphom::is_cycle(&h) {
        return Err(Error::NotACycle);
    }
    match positivity::certify_atoral_bordism(&spec, &h, !a.no_assume_bordism)? {
        Outcome::Certified(cert) => {
            if !positivity::verify_certificate(&cert) {
                return Err(Error::Precondition("produced certificate failed verification".into()));
            }
            let mut rules: Vec<&str> = cert.tags();
            rules.sort_unstable();
            rules.dedup();
            let text = format!("certified: {} nodes, rules {}\n", cert.nodes.len(), rules.join(", "));
            let result = json!({ "status": "certified", "verified": true, "rules": rules, "certificate": cert });
            Ok(Report { exit_code: 0, result, text })
        }
        Outcome::Failed(f) => {
            let mut result = json!({ "status": "failed", "reason": f.tag(), "detail": f });
            let witness = match &f {
                FailureReason::ObstructedByMilnorDiff { witness, .. }
                | FailureReason::ObstructedByBockstein { witness } => Some(witness.to_string()),
                FailureReason::Incomplete { residual, .. } => Some(residual.to_string()),
                FailureReason::NotAtoral { .. } => None,
            };
            if let Some(w) = witness {
                result["witness"] = json!(w);
            }
            Ok(Report { exit_code: 1, result, text: failure_text(&f) })
        }
    }
}

/// Dispatch a parsed command line.
pub fn execute(cli: &Cli) -> RunOutput {
    let start = Instant::now();
    let r = match &cli.command {
        Command::Homology(a) => run_homology(a),
        Command::Operate(op) => run_operate(op),
        Command::Certify(a) => run_certify(a),
    };
    let elapsed = start.elapsed();
    match r {
        Err(e) => RunOutput { stdout: String::new(), stderr: format!("error: {e}\n"), exit_code: 2 },
        Ok(rep) => {
            let stdout = if cli.json {
                let mut doc = json!({
                    "schema": REPORT_SCHEMA,
                    "version": env!("CARGO_PKG_VERSION"),
                    "seed": SEED,
                    "request": &cli.command,
                    "result": rep.result,
                });
                if cli.timing {
                    doc["timing_ms"] = json!(elapsed.as_secs_f64() * 1e3);
                }
                serde_json::to_string_pretty(&doc).expect("json") + "\n"
            } else if cli.timing {
                format!("{}time: {:.3} ms\n", rep.text, elapsed.as_secs_f64() * 1e3)
            } else {
                rep.text
            };
            RunOutput { stdout, stderr: String::new(), exit_code: rep.exit_code }
        }
    }
}

/// Parse arguments (program name first) and run.
pub fn run<I, T>(args: I) -> RunOutput
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli),
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let msg = e.render().to_string();
            if code == 0 {
                RunOutput { stdout: msg, stderr: String::new(), exit_code: 0 }
            } else {
                RunOutput { stdout: String::new(), stderr: msg, exit_code: 2 }
            }
        }
    }
}
