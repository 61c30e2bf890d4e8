//! The `semiosa` command line: `check`, `morph`, `simulate`, `blend` and
//! `emerge` over workspace files.
//!
//! Exit status is 0 on success, 1 when a verification or property check
//! fails, and 2 on usage, parse or resolution errors.

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::blending::{run_pipeline, VerdictStatus};
use crate::dsl::{self, Category, Diagnostic, Workspace};
use crate::dynamics::{ratio_str, run_process_capped, ProcessError};
use crate::emergence::{analyze, Deducibility, ObserverSpec, Source};
use crate::morphism::{check_properties, find_morphisms, Property};
use crate::system::SignSystem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExitStatus {
    Success = 0,
    Failed = 1,
    Usage = 2,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Parser, Debug)]
#[command(name = "semiosa", version, about = "Sign systems, semiotic morphisms, blends and emergence")]
struct Cli {
    /// Also write the machine-readable result to PATH (`-` for stdout).
    #[arg(long, global = true, value_name = "PATH")]
    json: Option<PathBuf>,
    /// Suppress the human-readable report.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and validate workspace files.
    Check {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Verify a morphism's properties, or `morph find FILES --from A --to B`.
    Morph(MorphArgs),
    /// Run a scenario of semiotic components.
    Simulate {
        file: PathBuf,
        #[arg(long)]
        scenario: String,
        /// Execute at most this many components.
        #[arg(long)]
        steps: Option<usize>,
        /// Override the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a blending pipeline.
    Blend {
        file: PathBuf,
        #[arg(long = "blend")]
        name: String,
    },
    /// Ask whether a ground property emerges.
    Emerge(EmergeArgs),
}

#[derive(Args, Debug)]
struct MorphArgs {
    /// Files, optionally preceded by `find`.
    #[arg(required = true)]
    args: Vec<String>,
    #[arg(long)]
    name: Option<String>,
    /// Comma-separated subset of level,priority,axiom,natural.
    #[arg(long, value_delimiter = ',')]
    require: Vec<String>,
    #[arg(long)]
    from: Option<String>,
    #[arg(long)]
    to: Option<String>,
    #[arg(long, default_value_t = 100)]
    limit: usize,
}

#[derive(Args, Debug)]
struct EmergeArgs {
    file: PathBuf,
    #[arg(long)]
    system: String,
    /// The reference system Ξ′ intersected with the whole.
    #[arg(long)]
    prior: String,
    /// Observer morphism; the identity on `--system` when absent.
    #[arg(long)]
    observer: Option<String>,
    #[arg(long)]
    property: String,
    /// Alternative systems consulted when classifying the source.
    #[arg(long = "alt")]
    alts: Vec<String>,
}

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    json: Option<PathBuf>,
    quiet: bool,
}

impl Io<'_> {
    fn say(&mut self, line: impl AsRef<str>) {
        if !self.quiet {
            let _ = writeln!(self.out, "{}", line.as_ref());
        }
    }

    fn fail(&mut self, line: impl AsRef<str>) {
        let _ = writeln!(self.err, "error: {}", line.as_ref());
    }

    fn emit<T: Serialize + ?Sized>(&mut self, value: &T) -> ExitStatus {
        let Some(path) = self.json.clone() else { return ExitStatus::Success };
        let text = dsl::to_json(value);
        if path.as_os_str() == "-" {
            let _ = self.out.write_all(text.as_bytes());
        } else if let Err(e) = std::fs::write(&path, text) {
            self.fail(format!("cannot write {}: {e}", path.display()));
            return ExitStatus::Usage;
        }
        ExitStatus::Success
    }
}

/// Entry point used by the binary.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(args, &mut stdout.lock(), &mut stderr.lock()).code()
}

/// Parses `args` (including the program name) and executes the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> ExitStatus
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
            } else {
                let _ = write!(out, "{e}");
            }
            return if e.use_stderr() { ExitStatus::Usage } else { ExitStatus::Success };
        }
    };
    let mut io = Io { out, err, json: cli.json, quiet: cli.quiet };
    match cli.command {
        Command::Check { files } => cmd_check(&mut io, &files),
        Command::Morph(a) => cmd_morph(&mut io, a),
        Command::Simulate { file, scenario, steps, seed } => cmd_simulate(&mut io, &file, &scenario, steps, seed),
        Command::Blend { file, name } => cmd_blend(&mut io, &file, &name),
        Command::Emerge(a) => cmd_emerge(&mut io, a),
    }
}

enum Loaded {
    Ok(Workspace),
    Failed(ExitStatus),
}

fn print_diagnostics(io: &mut Io<'_>, file: &Path, diags: &[Diagnostic]) {
    for d in diags {
        let _ = writeln!(io.err, "{}:{d}", file.display());
    }
}

/// Worst status implied by a set of diagnostics.
fn diagnostics_status(diags: &[Diagnostic]) -> ExitStatus {
    if diags.iter().any(|d| d.category != Category::Validation) {
        ExitStatus::Usage
    } else {
        ExitStatus::Failed
    }
}

/// Parses every file and merges the workspaces; each file must be self
/// contained.
fn load(io: &mut Io<'_>, files: &[PathBuf]) -> Loaded {
    let mut ws = Workspace::default();
    let mut worst = ExitStatus::Success;
    for file in files {
        let text = match std::fs::read_to_string(file) {
            Ok(t) => t,
            Err(e) => {
                io.fail(format!("cannot read {}: {e}", file.display()));
                worst = worst.max(ExitStatus::Usage);
                continue;
            }
        };
        match dsl::parse(&text) {
            Ok(part) => {
                if let Err(dup) = merge(&mut ws, part) {
                    io.fail(format!("{}: {dup} is defined in more than one file", file.display()));
                    worst = worst.max(ExitStatus::Usage);
                }
            }
            Err(diags) => {
                print_diagnostics(io, file, &diags);
                worst = worst.max(diagnostics_status(&diags));
            }
        }
    }
    if worst == ExitStatus::Success {
        Loaded::Ok(ws)
    } else {
        Loaded::Failed(worst)
    }
}

fn merge(ws: &mut Workspace, part: Workspace) -> Result<(), String> {
    fn into<T>(dst: &mut BTreeMap<String, T>, src: BTreeMap<String, T>, kind: &str) -> Result<(), String> {
        for (k, v) in src {
            if dst.contains_key(&k) {
                return Err(format!("{kind} `{k}`"));
            }
            dst.insert(k, v);
        }
        Ok(())
    }
    into(&mut ws.systems, part.systems, "system")?;
    into(&mut ws.morphisms, part.morphisms, "morphism")?;
    into(&mut ws.scenarios, part.scenarios, "scenario")?;
    into(&mut ws.blends, part.blends, "blend")?;
    ws.positions.extend(part.positions);
    Ok(())
}

macro_rules! load_or_return {
    ($io:expr, $files:expr) => {
        match load($io, $files) {
            Loaded::Ok(ws) => ws,
            Loaded::Failed(status) => return status,
        }
    };
}

macro_rules! lookup_or_return {
    ($io:expr, $e:expr) => {
        match $e {
            Ok(v) => v,
            Err(e) => {
                $io.fail(e.to_string());
                return ExitStatus::Usage;
            }
        }
    };
}

fn cmd_check(io: &mut Io<'_>, files: &[PathBuf]) -> ExitStatus {
    let mut worst = ExitStatus::Success;
    let mut reports = Vec::new();
    for file in files {
        let (diags, systems, status) = match std::fs::read_to_string(file) {
            Err(e) => {
                io.fail(format!("cannot read {}: {e}", file.display()));
                (Vec::new(), Vec::new(), ExitStatus::Usage)
            }
            Ok(text) => match dsl::parse(&text) {
                Ok(ws) => (Vec::new(), ws.systems.keys().cloned().collect(), ExitStatus::Success),
                Err(diags) => {
                    print_diagnostics(io, file, &diags);
                    let status = diagnostics_status(&diags);
                    (diags, Vec::new(), status)
                }
            },
        };
        if status == ExitStatus::Success {
            io.say(format!("{}: ok ({} systems)", file.display(), systems.len()));
        }
        worst = worst.max(status);
        reports.push(json!({ "file": file.display().to_string(), "diagnostics": diags, "systems": systems }));
    }
    let json_status = io.emit(&json!({ "command": "check", "files": reports, "ok": worst == ExitStatus::Success }));
    worst.max(json_status)
}

fn parse_properties(io: &mut Io<'_>, names: &[String]) -> Option<BTreeSet<Property>> {
    let mut out = BTreeSet::new();
    for n in names.iter().filter(|n| !n.is_empty()) {
        match n.parse() {
            Ok(p) => {
                out.insert(p);
            }
            Err(e) => {
                io.fail(format!("{e}"));
                return None;
            }
        }
    }
    Some(out)
}

fn cmd_morph(io: &mut Io<'_>, a: MorphArgs) -> ExitStatus {
    let find = a.args.first().is_some_and(|s| s == "find");
    let files: Vec<PathBuf> = a.args.iter().skip(find as usize).map(PathBuf::from).collect();
    if files.is_empty() {
        io.fail("no input files");
        return ExitStatus::Usage;
    }
    let Some(required) = parse_properties(io, &a.require) else { return ExitStatus::Usage };
    let ws = load_or_return!(io, &files);

    if find {
        let (Some(from), Some(to)) = (a.from, a.to) else {
            io.fail("`morph find` needs --from and --to");
            return ExitStatus::Usage;
        };
        let from = lookup_or_return!(io, ws.system(&from));
        let to = lookup_or_return!(io, ws.system(&to));
        let found = find_morphisms(from, to, &required, a.limit);
        io.say(format!("{} morphism(s) {} -> {}", found.len(), from.name, to.name));
        for m in &found {
            io.say(format!("  {m}"));
        }
        return io.emit(&json!({ "command": "morph find", "from": from.name, "to": to.name, "morphisms": found }));
    }

    let Some(name) = a.name else {
        io.fail("`morph` needs --name, or `find` with --from and --to");
        return ExitStatus::Usage;
    };
    let m = lookup_or_return!(io, ws.morphism(&name));
    let from = lookup_or_return!(io, ws.system(&m.from));
    let to = lookup_or_return!(io, ws.system(&m.to));
    let report = check_properties(m, from, to, &required);
    io.say(format!("morphism {} : {} -> {}", m.name, m.from, m.to));
    io.say(format!("  well-formed: {}", report.well_formed));
    for d in report.diagnostics.clone() {
        io.say(format!("    {d}"));
    }
    for p in Property::ALL {
        if let Some(check) = report.get(p) {
            io.say(format!("  {p}: {}", if check.holds { "holds" } else { "fails" }));
            for w in check.witnesses.clone() {
                io.say(format!("    {w}"));
            }
        }
    }
    if !report.skipped_axioms.is_empty() {
        io.say(format!("  skipped axioms: {}", report.skipped_axioms.join(", ")));
    }
    let status = if report.passed() { ExitStatus::Success } else { ExitStatus::Failed };
    status.max(io.emit(&report))
}

fn cmd_simulate(io: &mut Io<'_>, file: &Path, name: &str, steps: Option<usize>, seed: Option<u64>) -> ExitStatus {
    let ws = load_or_return!(io, &[file.to_path_buf()]);
    let mut sc = lookup_or_return!(io, ws.scenario(name));
    if let Some(seed) = seed {
        sc.seed = seed;
    }
    let (trajectory, omega, failure) = match run_process_capped(&sc, steps) {
        Ok((t, omega)) => (t, Some(omega), None),
        Err(f) => (f.partial, None, Some(f.error)),
    };
    io.say(format!("scenario {} (seed {})", sc.name, sc.seed));
    io.say("step  chosen  p  cost_f  cost_mu  epsilon");
    for s in &trajectory.steps {
        let p: Vec<String> = s.probabilities.iter().map(ratio_str).collect();
        io.say(format!(
            "{:>4}  {}  [{}]  {}  {}  {} -> {}",
            s.index,
            s.chosen,
            p.join(", "),
            s.cost_f,
            s.cost_mu,
            s.epsilon_before,
            s.epsilon
        ));
        for w in &s.warnings {
            let _ = writeln!(io.err, "warning: step {}: {w}", s.index);
        }
    }
    io.say(format!("T_f = {}, T_mu = {}, T = {}", trajectory.total_f(), trajectory.total_mu(), trajectory.total()));
    let mut doc = json!({
        "command": "simulate",
        "scenario": sc.name,
        "seed": sc.seed,
        "steps": trajectory.steps,
        "totals": { "t_f": trajectory.total_f(), "t_mu": trajectory.total_mu(), "t": trajectory.total() },
    });
    if let Some(omega) = &omega {
        io.say(format!("omega: phi = {}, |lambda| = {}", omega.phi.name, omega.lambda.len()));
        doc["omega"] = json!({ "phi": omega.phi.name, "lambda": omega.lambda });
    }
    let status = match &failure {
        None => ExitStatus::Success,
        Some(e) => {
            io.fail(e.to_string());
            doc["error"] = json!(e.to_string());
            match e {
                ProcessError::BadScenario(_) => ExitStatus::Usage,
                _ => ExitStatus::Failed,
            }
        }
    };
    status.max(io.emit(&doc))
}

fn cmd_blend(io: &mut Io<'_>, file: &Path, name: &str) -> ExitStatus {
    let ws = load_or_return!(io, &[file.to_path_buf()]);
    let input = lookup_or_return!(io, ws.blend_input(name));
    let report = match run_pipeline(&input) {
        Ok(r) => r,
        Err(e) => {
            io.fail(e.to_string());
            let doc = json!({ "command": "blend", "blend": name, "error": e.failure.to_string(), "stage": e.stage.number() });
            return ExitStatus::Failed.max(io.emit(&doc));
        }
    };
    io.say(format!("blend {} ({})", report.name, report.compatibility));
    io.say("matched:");
    for line in &report.matched {
        io.say(format!("  {line}"));
    }
    if !report.detailing_stubs.is_empty() {
        io.say("stubs:");
        for s in &report.detailing_stubs {
            io.say(format!("  {} {} for {}", s.kind, s.name, s.for_target));
        }
    }
    io.say("reinterpretation:");
    for v in &report.reinterpretation {
        io.say(format!("  {v}"));
    }
    io.say(format!("accepted: {}", report.accepted));
    let failed = report.reinterpretation.iter().any(|v| matches!(v.status, VerdictStatus::Fails { .. }));
    if failed && report.accepted {
        io.say("  (failures are below the threshold)");
    }
    let status = if report.accepted { ExitStatus::Success } else { ExitStatus::Failed };
    status.max(io.emit(&report))
}

fn cmd_emerge(io: &mut Io<'_>, a: EmergeArgs) -> ExitStatus {
    let ws = load_or_return!(io, &[a.file.clone()]);
    let xi = lookup_or_return!(io, ws.system(&a.system));
    let prior = lookup_or_return!(io, ws.system(&a.prior));
    let observer = match &a.observer {
        None => ObserverSpec::identity(xi),
        Some(name) => {
            let m = lookup_or_return!(io, ws.morphism(name));
            let cod = lookup_or_return!(io, ws.system(&m.to));
            ObserverSpec::new(m.clone(), cod.clone())
        }
    };
    let alts: Vec<SignSystem> = {
        let mut v = Vec::new();
        for n in &a.alts {
            v.push(lookup_or_return!(io, ws.system(n)).clone());
        }
        v
    };
    let p = match dsl::parse_atom(&a.property, &observer.codomain) {
        Ok(p) => p,
        Err(d) => {
            io.fail(format!("--property: {d}"));
            return ExitStatus::Usage;
        }
    };
    let report = match analyze(&p, xi, prior, &observer, &alts) {
        Ok(r) => r,
        Err(e) => {
            io.fail(e.to_string());
            let doc = json!({ "command": "emerge", "property": p, "error": e.to_string() });
            return ExitStatus::Failed.max(io.emit(&doc));
        }
    };
    io.say(format!("property: {p}"));
    io.say(format!("in observed whole: {}", report.evidence.closure_whole.contains(&p)));
    io.say(format!("in observed intersection: {}", report.evidence.closure_intersection.contains(&p)));
    io.say(format!("emergent: {}", report.emergent));
    if let Some(d) = &report.deducibility {
        io.say(match d {
            Deducibility::Deducible { witness } => format!("deducibility: deducible ({})", witness.name),
            Deducibility::Observational => "deducibility: observational".to_string(),
        });
    }
    if let Some(s) = &report.source {
        io.say(match s {
            Source::Interpretation => "source: interpretation".to_string(),
            Source::Process { witness } => format!("source: process ({witness})"),
            Source::Ontology { witness } => format!("source: ontology ({witness})"),
            Source::Undetermined => "source: undetermined".to_string(),
        });
    }
    io.emit(&report)
}
