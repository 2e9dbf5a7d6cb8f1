//! Command-line verbs. Exit codes: 0 success, 1 diagnostics, a violated
//! monitor or distinguished LTSs, 2 usage errors.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use csmbench::dsl::{compile, parse_model, ModelError};
use csmbench::explorer::{check_one, explore, parse_monitor, Limits, Verdict};
use csmbench::kernel::{load_system, StaticError, ValidatedSystem};
use csmbench::lts::{equiv_strong, hide, minimize_strong, read_aut, to_lts, weak_traces, write_aut, Equivalence, LabelScheme, Lts};
use csmbench::models::{find_scenario, instantiate, parse_scenarios, shipped_model, shipped_scenarios, Scenario};
use csmbench::render::{chart_from_trace, render_dot, render_text, ChartFilter};
use csmbench::transpile::{emit_b, emit_lnt, emit_report, EmitterConfig};
use csmbench::view::{canonical_json, replay, TraceView};
use serde::Serialize;

use crate::report::*;
use crate::service;

#[derive(Debug, Parser)]
#[command(name = "csmbench", version, about = "Explore, verify and export communicating state machine models")]
pub struct Cli {
    /// Print a JSON report on stdout instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub verb: Verb,
}

/// Which system of a model to load.
#[derive(Debug, clap::Args)]
pub struct Select {
    /// Named parameter set, as `name` or `system.name`.
    #[arg(long)]
    pub scenario: Option<String>,
    /// Scenario file; defaults to `scenarios.toml` next to the model, then
    /// to the shipped one.
    #[arg(long)]
    pub scenarios: Option<PathBuf>,
    /// System declaration to load when no scenario is given.
    #[arg(long)]
    pub system: Option<String>,
}

#[derive(Debug, clap::Args)]
pub struct LimitArgs {
    #[arg(long)]
    pub max_states: Option<usize>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    /// Seconds.
    #[arg(long)]
    pub time_budget: Option<u64>,
}

impl LimitArgs {
    fn limits(&self) -> Limits {
        Limits {
            max_states: self.max_states,
            max_depth: self.max_depth,
            time_budget: self.time_budget.map(Duration::from_secs),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Verb {
    /// Parse and load every system of a model.
    Check { model: String },
    /// Explore the reachable configurations.
    Explore {
        model: String,
        #[command(flatten)]
        select: Select,
        #[command(flatten)]
        limits: LimitArgs,
    },
    /// Check monitors; exit 1 if any is violated.
    Verify {
        model: String,
        #[command(flatten)]
        select: Select,
        #[arg(long = "monitor", required = true)]
        monitors: Vec<String>,
        #[command(flatten)]
        limits: LimitArgs,
    },
    /// Labelled transition system export and comparison.
    #[command(subcommand)]
    Lts(LtsVerb),
    /// Generate B or LNT source.
    Emit {
        model: String,
        #[command(flatten)]
        select: Select,
        #[arg(long, value_enum)]
        target: Target,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Render traces as sequence charts.
    #[command(subcommand)]
    Trace(TraceVerb),
    /// Run the HTTP JSON service.
    Serve {
        #[arg(long, env = "CSMBENCH_PORT", default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Directory served at `/`.
        #[arg(long = "static", env = "CSMBENCH_STATIC")]
        static_dir: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Target {
    B,
    Lnt,
    /// Step to B operation and LNT branch table.
    Report,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Labels {
    Rules,
    Comm,
}

#[derive(Debug, Subcommand)]
pub enum LtsVerb {
    /// Explore exhaustively and write the `.aut` file.
    Export {
        model: String,
        #[command(flatten)]
        select: Select,
        #[arg(long, value_enum, default_value = "rules")]
        labels: Labels,
        /// Keep labels containing one of these substrings; hide the rest.
        #[arg(long = "keep")]
        keep: Vec<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Strong bisimulation quotient.
    Minimize {
        aut: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Strong bisimilarity; exit 1 with a distinguishing experiment.
    Compare { left: PathBuf, right: PathBuf },
    /// Weak-trace automaton; `-o x.aut` also writes `x.flags.json`.
    Weaktraces {
        aut: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Graphviz text.
    Dot {
        aut: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum TraceVerb {
    /// Sequence chart of a trace file or of a monitor's counterexample.
    Render {
        model: String,
        #[command(flatten)]
        select: Select,
        /// Trace JSON as printed by `verify --json` or the service.
        #[arg(long, conflicts_with = "monitor", required_unless_present = "monitor")]
        trace: Option<PathBuf>,
        #[arg(long)]
        monitor: Option<String>,
        #[arg(long = "instance")]
        instances: Vec<String>,
        #[arg(long = "signal")]
        signals: Vec<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

/// Why a verb stopped early.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Diagnostics(ErrorReport),
}

impl Failure {
    fn msg(error: impl Into<String>) -> Self {
        Failure::Diagnostics(ErrorReport {
            error: error.into(),
            diagnostics: Vec::new(),
        })
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Syntax(ds) => Failure::Diagnostics(ErrorReport {
                error: format!("{} syntax or resolution error(s)", ds.len()),
                diagnostics: ds.iter().map(DiagnosticView::from).collect(),
            }),
            ModelError::Static(es) => static_failure(&es),
        }
    }
}

fn static_failure(es: &[StaticError]) -> Failure {
    let lines: Vec<String> = es.iter().map(ToString::to_string).collect();
    Failure::msg(lines.join("; "))
}

/// Parses `args` (including the program name) and runs the verb.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let json = cli.json;
    match execute(cli) {
        Ok(code) => code,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            2
        }
        Err(Failure::Diagnostics(r)) => {
            if json {
                println!("{}", canonical_json(&r));
            } else {
                eprintln!("error: {}", r.error);
                for d in &r.diagnostics {
                    eprintln!("  {}:{}: {}", d.line, d.col, d.message);
                }
            }
            1
        }
    }
}

struct Source {
    text: String,
    dir: Option<PathBuf>,
    shipped: bool,
}

fn read_model(arg: &str) -> Result<Source, Failure> {
    let path = Path::new(arg);
    if path.exists() {
        let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {arg}: {e}")))?;
        return Ok(Source {
            text,
            dir: path.parent().map(Path::to_path_buf),
            shipped: false,
        });
    }
    match shipped_model(arg) {
        Some(text) => Ok(Source {
            text: text.to_string(),
            dir: None,
            shipped: true,
        }),
        None => Err(Failure::Usage(format!("{arg}: no such file or shipped model"))),
    }
}

fn scenario_table(src: &Source, sel: &Select) -> Result<Vec<Scenario>, Failure> {
    let file = sel.scenarios.clone().or_else(|| {
        src.dir
            .as_ref()
            .map(|d| d.join("scenarios.toml"))
            .filter(|p| p.exists())
    });
    match file {
        Some(f) => {
            let text = fs::read_to_string(&f).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", f.display())))?;
            parse_scenarios(&text).map_err(|e| Failure::msg(e.to_string()))
        }
        None if src.shipped || sel.scenarios.is_none() => Ok(shipped_scenarios()),
        None => Ok(Vec::new()),
    }
}

fn load(model: &str, sel: &Select) -> Result<(ValidatedSystem, Option<String>), Failure> {
    let src = read_model(model)?;
    let def = match &sel.scenario {
        Some(key) => {
            let table = scenario_table(&src, sel)?;
            let s = find_scenario(&table, key).map_err(|e| Failure::Usage(e.to_string()))?;
            instantiate(&src.text, &s.system, &s.params).map_err(|e| match e {
                csmbench::models::ScenarioError::Model(m) => Failure::from(m),
                other => Failure::msg(other.to_string()),
            })?
        }
        None => compile(&src.text, sel.system.as_deref())?,
    };
    let sys = load_system(&def).map_err(|es| static_failure(&es))?;
    let key = match &sel.scenario {
        Some(k) if k.contains('.') => Some(k.clone()),
        Some(k) => Some(format!("{}.{k}", sys.name())),
        None => None,
    };
    Ok((sys, key))
}

fn print<T: Serialize>(json: bool, report: &T, text: impl FnOnce() -> String) {
    if json {
        println!("{}", canonical_json(report));
    } else {
        print!("{}", text());
    }
}

fn write_file(path: &Path, content: &str) -> Result<(), Failure> {
    fs::write(path, content).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

/// Writes `content` to `output` or stdout, or reports it as JSON.
fn artifact(kind: &str, content: String, output: Option<&Path>, json: bool, facts: BTreeMap<String, u64>) -> Result<(), Failure> {
    if let Some(p) = output {
        write_file(p, &content)?;
    }
    let report = ArtifactReport {
        kind: kind.to_string(),
        output: output.map(|p| p.display().to_string()),
        text: output.is_none().then(|| content.clone()),
        facts,
    };
    if json {
        println!("{}", canonical_json(&report));
    } else if output.is_none() {
        print!("{content}");
    }
    Ok(())
}

fn read_lts(path: &Path) -> Result<Lts, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    read_aut(&text).map_err(|e| Failure::msg(format!("{}: {e}", path.display())))
}

fn lts_facts(l: &Lts) -> BTreeMap<String, u64> {
    BTreeMap::from([
        ("states".to_string(), l.states as u64),
        ("transitions".to_string(), l.transitions.len() as u64),
    ])
}

fn execute(cli: Cli) -> Result<i32, Failure> {
    let json = cli.json;
    match cli.verb {
        Verb::Check { model } => check(&model, json),
        Verb::Explore { model, select, limits } => {
            let (sys, scenario) = load(&model, &select)?;
            let space = explore(&sys, limits.limits());
            let report = ExploreReport {
                system: sys.name().to_string(),
                scenario,
                stats: space.stats.into(),
                failures: space
                    .failures
                    .iter()
                    .map(|f| format!("{}: {}", sys.describe_step(&f.step), f.error))
                    .collect(),
            };
            print(json, &report, || {
                let s = &report.stats;
                let mut out = format!(
                    "{}: {} states, {} transitions, depth {}, {}\n",
                    report.system,
                    s.states,
                    s.transitions,
                    s.depth,
                    if s.exhausted { "exhaustive" } else { "truncated" }
                );
                for f in &report.failures {
                    out.push_str(&format!("failure: {f}\n"));
                }
                out
            });
            Ok(if report.failures.is_empty() { 0 } else { 1 })
        }
        Verb::Verify {
            model,
            select,
            monitors,
            limits,
        } => {
            let (sys, scenario) = load(&model, &select)?;
            let mut results = Vec::new();
            for text in &monitors {
                let m = parse_monitor(&sys, text).map_err(|e| Failure::Usage(e.to_string()))?;
                let r = check_one(&sys, &m, limits.limits());
                results.push(MonitorReport {
                    monitor: text.clone(),
                    verdict: r.verdict.name().to_string(),
                    stats: r.stats.into(),
                    trace: r.verdict.trace().map(|t| TraceView::new(&sys, t)),
                });
            }
            let violated = results.iter().any(|r| r.verdict == "violated");
            let report = VerifyReport {
                system: sys.name().to_string(),
                scenario,
                results,
            };
            print(json, &report, || {
                let mut out = String::new();
                for r in &report.results {
                    out.push_str(&format!("{}: {} ({} states)\n", r.monitor, r.verdict, r.stats.states));
                    if let Some(t) = &r.trace {
                        for (k, s) in t.steps.iter().enumerate() {
                            out.push_str(&format!("  {:>3}. {}\n", k + 1, s.text));
                        }
                    }
                }
                out
            });
            Ok(if violated { 1 } else { 0 })
        }
        Verb::Lts(v) => lts(v, json),
        Verb::Emit {
            model,
            select,
            target,
            output,
        } => {
            let (sys, _) = load(&model, &select)?;
            let cfg = EmitterConfig::default();
            let (kind, text) = match target {
                Target::B => ("b", emit_b(&sys, &cfg)),
                Target::Lnt => ("lnt", emit_lnt(&sys, &cfg)),
                Target::Report => ("report", Ok(emit_report(&sys, &cfg))),
            };
            let text = text.map_err(|e| Failure::msg(e.to_string()))?;
            artifact(kind, text, output.as_deref(), json, BTreeMap::new())?;
            Ok(0)
        }
        Verb::Trace(TraceVerb::Render {
            model,
            select,
            trace,
            monitor,
            instances,
            signals,
            output,
        }) => {
            let (sys, _) = load(&model, &select)?;
            let t = match (trace, monitor) {
                (Some(path), _) => {
                    let text = fs::read_to_string(&path)
                        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
                    let view = trace_from_json(&text).map_err(|e| Failure::msg(format!("{}: {e}", path.display())))?;
                    replay(&sys, &view.steps).map_err(|e| Failure::msg(format!("step {}: {}", e.step + 1, e.message)))?
                }
                (None, Some(spec)) => {
                    let m = parse_monitor(&sys, &spec).map_err(|e| Failure::Usage(e.to_string()))?;
                    match check_one(&sys, &m, Limits::none()).verdict {
                        Verdict::Violated(t) | Verdict::Witness(t) => t,
                        v => return Err(Failure::msg(format!("monitor gave no trace ({})", v.name()))),
                    }
                }
                (None, None) => return Err(Failure::Usage("give --trace or --monitor".into())),
            };
            let filter = ChartFilter {
                instances: (!instances.is_empty()).then(|| instances.into_iter().collect()),
                signals: (!signals.is_empty()).then(|| signals.into_iter().collect()),
            };
            let chart = chart_from_trace(&sys, &t, &filter);
            let text = render_text(&chart);
            if let Some(p) = &output {
                write_file(p, &text)?;
            }
            if json {
                let mut view = TraceView::new(&sys, &t);
                view.text = text;
                view.chart = chart;
                println!("{}", canonical_json(&view));
            } else if output.is_none() {
                print!("{text}");
            }
            Ok(0)
        }
        Verb::Serve { port, host, static_dir } => {
            let addr = format!("{host}:{port}");
            let rt = tokio::runtime::Runtime::new().map_err(|e| Failure::msg(e.to_string()))?;
            rt.block_on(service::serve(&addr, service::AppState::new(static_dir), json))
                .map_err(|e| Failure::msg(format!("{addr}: {e}")))?;
            Ok(0)
        }
    }
}

/// Accepts a trace view, or a verify report with exactly one trace.
fn trace_from_json(text: &str) -> Result<TraceView, String> {
    if let Ok(v) = serde_json::from_str::<TraceView>(text) {
        return Ok(v);
    }
    let r: VerifyReport = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let mut traces: Vec<TraceView> = r.results.into_iter().filter_map(|m| m.trace).collect();
    match traces.len() {
        1 => Ok(traces.remove(0)),
        n => Err(format!("expected one trace, found {n}")),
    }
}

fn check(model: &str, json: bool) -> Result<i32, Failure> {
    let src = read_model(model)?;
    let mut report = CheckReport {
        ok: true,
        systems: Vec::new(),
        diagnostics: Vec::new(),
        errors: Vec::new(),
    };
    match parse_model(&src.text) {
        Err(ds) => {
            report.ok = false;
            report.diagnostics = ds.iter().map(DiagnosticView::from).collect();
        }
        Ok(m) if m.systems.is_empty() => {
            report.ok = false;
            report.errors.push("model declares no system".into());
        }
        Ok(m) => {
            for s in &m.systems {
                match compile(&src.text, Some(&s.name)).map(|d| load_system(&d)) {
                    Err(ModelError::Syntax(ds)) => {
                        report.ok = false;
                        report.diagnostics.extend(ds.iter().map(DiagnosticView::from));
                    }
                    Err(ModelError::Static(es)) | Ok(Err(es)) => {
                        report.ok = false;
                        report.errors.extend(es.iter().map(|e| format!("{}: {e}", s.name)));
                    }
                    Ok(Ok(sys)) => report.systems.push(SystemSummary {
                        name: sys.name().to_string(),
                        machines: sys.machines.len(),
                        instances: sys.instances.len(),
                        rules: sys.machines.iter().map(|m| m.rules.len()).sum(),
                        warnings: sys.warnings.iter().map(ToString::to_string).collect(),
                    }),
                }
            }
        }
    }
    print(json, &report, || {
        let mut out = String::new();
        for s in &report.systems {
            out.push_str(&format!(
                "{}: {} machines, {} instances, {} rules\n",
                s.name, s.machines, s.instances, s.rules
            ));
            for w in &s.warnings {
                out.push_str(&format!("  warning: {w}\n"));
            }
        }
        for d in &report.diagnostics {
            out.push_str(&format!("{}:{}: {}\n", d.line, d.col, d.message));
        }
        for e in &report.errors {
            out.push_str(&format!("error: {e}\n"));
        }
        out
    });
    Ok(if report.ok { 0 } else { 1 })
}

fn lts(v: LtsVerb, json: bool) -> Result<i32, Failure> {
    match v {
        LtsVerb::Export {
            model,
            select,
            labels,
            keep,
            output,
        } => {
            let (sys, _) = load(&model, &select)?;
            let space = explore(&sys, Limits::none());
            let scheme = match labels {
                Labels::Rules => LabelScheme::RuleLabels,
                Labels::Comm => LabelScheme::CommActions,
            };
            let mut l = to_lts(&sys, &space, &scheme).map_err(|e| Failure::msg(e.to_string()))?;
            if !keep.is_empty() {
                l = hide(&l, |lab| keep.iter().any(|k| lab.contains(k.as_str())));
            }
            let facts = lts_facts(&l);
            artifact("aut", write_aut(&l), output.as_deref(), json, facts)?;
            Ok(0)
        }
        LtsVerb::Minimize { aut, output } => {
            let l = read_lts(&aut)?;
            let (q, _) = minimize_strong(&l);
            let mut facts = lts_facts(&q);
            facts.insert("original_states".into(), l.states as u64);
            artifact("aut", write_aut(&q), output.as_deref(), json, facts)?;
            Ok(0)
        }
        LtsVerb::Compare { left, right } => {
            let (a, b) = (read_lts(&left)?, read_lts(&right)?);
            let report = CompareReport {
                left: left.display().to_string(),
                right: right.display().to_string(),
                equivalence: equiv_strong(&a, &b),
            };
            print(json, &report, || match &report.equivalence {
                Equivalence::Equivalent => "equivalent\n".to_string(),
                Equivalence::Distinguished(w) => format!(
                    "distinguished: after [{}], only the {} side can do {}\n",
                    w.labels.join(", "),
                    match w.side {
                        csmbench::lts::Side::Left => "left",
                        csmbench::lts::Side::Right => "right",
                    },
                    w.failing
                ),
            });
            Ok(match report.equivalence {
                Equivalence::Equivalent => 0,
                Equivalence::Distinguished(_) => 1,
            })
        }
        LtsVerb::Weaktraces { aut, output } => {
            let w = weak_traces(&read_lts(&aut)?);
            let text = write_aut(&w.lts);
            let flags = w.flag_table();
            if let Some(p) = &output {
                write_file(p, &text)?;
                write_file(&p.with_extension("flags.json"), &canonical_json(&flags))?;
            }
            let report = WeakTracesReport {
                states: w.lts.states,
                transitions: w.lts.transitions.len(),
                output: output.as_ref().map(|p| p.display().to_string()),
                text: output.is_none().then(|| text.clone()),
                flags,
            };
            if json {
                println!("{}", canonical_json(&report));
            } else if output.is_none() {
                print!("{text}");
            }
            Ok(0)
        }
        LtsVerb::Dot { aut, output } => {
            let l = read_lts(&aut)?;
            let facts = lts_facts(&l);
            artifact("dot", render_dot(&l), output.as_deref(), json, facts)?;
            Ok(0)
        }
    }
}
