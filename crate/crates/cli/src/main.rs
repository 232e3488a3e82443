//! `portnet`: generate graphs, run and verify protocols, benchmark scaling.
//!
//! Exit status: 0 success, 1 verification mismatch, 2 usage or input
//! error, 3 timeout.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use portnet::engine::{audit, run_until_halt, EngineError, NodeProgram, Protocol, Run, RunOptions, Trace};
use portnet::net::{generate, parse_graph_file, write_graph, Configuration, GraphKind, NodeId};
use portnet::oracle;
use portnet::protocols::{
    distributed_bridges, echo, echo_completion_round, find_bridges, flagged_bridges, height_halt_round,
    height_search, numerate, pipeline,
};

#[derive(Parser)]
#[command(name = "portnet", version, about = "Round-synchronous simulator for port-numbered leader networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a graph file.
    Gen(GenArgs),
    /// Run a protocol and print per-node results.
    Run(RunArgs),
    /// Run a protocol and check it against the centralized oracles.
    Verify(VerifyArgs),
    /// Measure pipeline rounds and traffic over a range of sizes.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_parser = parse_kind)]
    kind: GraphKind,
    #[arg(long)]
    nodes: usize,
    /// Non-tree edges, random_connected only.
    #[arg(long, default_value_t = 0)]
    extra_edges: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; standard output if omitted.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProtocolName {
    Echo,
    Height,
    Numerate,
    Bridges,
    Pipeline,
}

#[derive(Args)]
struct Target {
    #[arg(long)]
    graph: PathBuf,
    /// Overrides the file's leader line.
    #[arg(long)]
    leader: Option<u32>,
    #[arg(long, value_enum)]
    protocol: ProtocolName,
    #[arg(long)]
    max_rounds: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    target: Target,
    /// Write the full trace here.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    target: Target,
    /// Seed for the random inputs of the termination audit.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Corrupts one node's output before checking (test hook).
    #[arg(long, hide = true)]
    inject_fault: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_parser = parse_kind)]
    kind: GraphKind,
    /// Comma-separated node counts.
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<usize>,
    /// Non-tree edges per node, random_connected only.
    #[arg(long, default_value_t = 0)]
    extra_per_node: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn parse_kind(s: &str) -> Result<GraphKind, String> {
    s.parse()
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Run(args) => cmd_run(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn cmd_gen(args: GenArgs) -> Outcome {
    let cfg = generate(args.kind, args.nodes, args.extra_edges, args.seed).map_err(|e| Failure::usage(e.to_string()))?;
    let text = write_graph(&cfg);
    match args.out {
        Some(path) => fs::write(&path, text).map_err(|e| Failure::usage(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(target: &Target) -> Result<Configuration, Failure> {
    let text = fs::read_to_string(&target.graph)
        .map_err(|e| Failure::usage(format!("{}: {e}", target.graph.display())))?;
    let file = parse_graph_file(&text).map_err(|e| Failure::usage(format!("{}: {e}", target.graph.display())))?;
    let leader = target.leader.map(NodeId).or(file.leader).unwrap_or(NodeId(1));
    Configuration::new(file.network, leader).map_err(|e| Failure::usage(e.to_string()))
}

fn options(cfg: &Configuration, target: &Target, traced: bool) -> RunOptions {
    let mut opts = RunOptions::for_config(cfg);
    if let Some(max) = target.max_rounds {
        opts.max_rounds = max;
    }
    opts.record_trace = traced;
    opts
}

/// Per-node result lines plus oracle mismatches (empty when verified).
struct Checked {
    lines: Vec<String>,
    mismatches: Vec<String>,
    /// Whether the run must halt everywhere at once.
    strong: bool,
}

fn ports_to_nodes(cfg: &Configuration, v: NodeId, ports: &[u32]) -> Vec<NodeId> {
    ports.iter().map(|&p| cfg.network.ports_of(v)[p as usize].0).collect()
}

fn show(set: &oracle::BridgeSet) -> String {
    let edges: Vec<String> = set.iter().map(|(a, b)| format!("{a}-{b}")).collect();
    format!("{{{}}}", edges.join(" "))
}

fn bridge_lines(set: &oracle::BridgeSet) -> Vec<String> {
    set.iter().map(|(a, b)| format!("bridge {a} {b}")).collect()
}

fn check_echo(cfg: &Configuration, run: &Run<portnet::protocols::EchoNode>, fault: bool) -> Checked {
    let tree = oracle::bfs_tree(cfg);
    let d = oracle::height(cfg) as u64;
    let mut outputs = run.outputs();
    if fault {
        let leader = &mut outputs[cfg.leader.index()];
        leader.completed_at = leader.completed_at.map(|c| c + 1);
    }
    let mut lines = Vec::new();
    let mut mismatches = Vec::new();
    for v in cfg.network.nodes() {
        let out = &outputs[v.index()];
        let parent = out.parent_port.map(|p| cfg.network.ports_of(v)[p as usize].0);
        let children = ports_to_nodes(cfg, v, &out.child_ports);
        let mut line = format!(
            "node {v} parent={} children={}",
            parent.map_or("-".to_string(), |p| p.to_string()),
            children.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
        );
        if let Some(c) = out.completed_at {
            let _ = write!(line, " completed={c}");
        }
        lines.push(line);
        if parent != tree.parent(v) || children != tree.children(v) {
            mismatches.push(format!("node {v}: tree edges differ from the BFS tree"));
        }
    }
    let done = outputs[cfg.leader.index()].completed_at;
    if done != Some(echo_completion_round(d)) {
        mismatches.push(format!("leader completed at {done:?}, expected {}", echo_completion_round(d)));
    }
    Checked { lines, mismatches, strong: false }
}

fn check_height(cfg: &Configuration, run: &Run<portnet::protocols::HeightNode>, fault: bool) -> Checked {
    let tree = oracle::bfs_tree(cfg);
    let d = oracle::height(cfg);
    let mut outputs = run.outputs();
    if fault {
        outputs[0].d = outputs[0].d.map(|x| x + 1);
    }
    let mut lines = Vec::new();
    let mut mismatches = Vec::new();
    let expected_halt = height_halt_round(d as u64);
    for v in cfg.network.nodes() {
        let out = &outputs[v.index()];
        lines.push(format!("node {v} D={}", out.d.map_or("?".to_string(), |x| x.to_string())));
        if out.d != Some(d) {
            mismatches.push(format!("node {v}: D={:?}, expected {d}", out.d));
        }
        if ports_to_nodes(cfg, v, &out.child_ports) != tree.children(v) {
            mismatches.push(format!("node {v}: children differ from the BFS tree"));
        }
        let halt = run.halt_rounds()[v.index()];
        if halt != expected_halt {
            mismatches.push(format!("node {v}: halted at {halt}, expected {expected_halt}"));
        }
    }
    Checked { lines, mismatches, strong: true }
}

fn check_numerate(cfg: &Configuration, run: &Run<portnet::protocols::PipelineNode>, fault: bool) -> Checked {
    let tree = oracle::bfs_tree(cfg);
    let numbers = oracle::canonical_numeration(&tree);
    let full = portnet::certify::encode_tree(&tree);
    let mut outputs = run.outputs();
    if fault {
        outputs[0].number = outputs[0].number.map(|n| n % cfg.network.node_count() as u32 + 1);
    }
    let mut lines = Vec::new();
    let mut mismatches = Vec::new();
    for v in cfg.network.nodes() {
        let out = &outputs[v.index()];
        let cert = out.certificate.as_ref().map_or("?".to_string(), |c| c.to_string());
        let number = out.number.map_or("?".to_string(), |n| n.to_string());
        lines.push(format!("node {v} number={number} cert={cert}"));
        let expected = numbers[v.index()];
        if out.number != Some(expected) {
            mismatches.push(format!("node {v}: number {number}, expected {expected}"));
        }
        let expected_cert = portnet::certify::node_certificate(&full, expected).expect("valid number");
        if out.certificate.as_ref() != Some(&expected_cert) {
            mismatches.push(format!("node {v}: certificate {cert}, expected {expected_cert}"));
        }
    }
    Checked { lines, mismatches, strong: true }
}

fn check_bridges(cfg: &Configuration, run: &Run<portnet::protocols::PipelineNode>, fault: bool) -> Checked {
    let expected = oracle::bridges_dfs(cfg);
    let mut found = flagged_bridges(cfg, &run.outputs()).unwrap_or_default();
    if fault {
        corrupt(cfg, &mut found);
    }
    let mut mismatches = Vec::new();
    if found != expected {
        mismatches.push(format!("flagged {}, oracle {}", show(&found), show(&expected)));
    }
    Checked { lines: bridge_lines(&found), mismatches, strong: true }
}

fn check_pipeline(cfg: &Configuration, run: &Run<portnet::protocols::PipelineNode>, fault: bool) -> Checked {
    let expected = oracle::bridges_dfs(cfg);
    let outputs = run.outputs();
    let mut mismatches = Vec::new();
    let mut views: Vec<oracle::BridgeSet> = cfg
        .network
        .nodes()
        .map(|v| distributed_bridges(&outputs, v).unwrap_or_default())
        .collect();
    if fault {
        corrupt(cfg, &mut views[0]);
    }
    for (i, view) in views.iter().enumerate() {
        if *view != expected {
            mismatches.push(format!("node {}: {}, oracle {}", i + 1, show(view), show(&expected)));
        }
    }
    let leader_view = views[cfg.leader.index()].clone();
    Checked { lines: bridge_lines(&leader_view), mismatches, strong: true }
}

/// Toggles one edge in a bridge set.
fn corrupt(cfg: &Configuration, set: &mut oracle::BridgeSet) {
    let edge = cfg.network.edges().into_iter().next().unwrap_or((NodeId(1), NodeId(1)));
    if !set.remove(&edge) {
        set.insert(edge);
    }
}

fn execute<P: Protocol>(cfg: &Configuration, protocol: &P, opts: &RunOptions, trace_path: Option<&PathBuf>) -> Result<Run<P::Node>, Failure> {
    match run_until_halt(cfg, protocol, opts) {
        Ok(run) => Ok(run),
        Err(EngineError::Timeout { max_rounds, halted, node_count, trace }) => {
            if let (Some(path), Some(trace)) = (trace_path, trace) {
                write_trace(path, &trace)?;
            }
            Err(Failure {
                code: 3,
                message: format!("timeout: {halted} of {node_count} nodes halted within {max_rounds} rounds"),
            })
        }
        Err(e) => Err(Failure::usage(e.to_string())),
    }
}

fn write_trace(path: &PathBuf, trace: &Trace) -> Outcome {
    fs::write(path, trace.render()).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

/// Runs the requested protocol; `verify` adds the oracle checks and the
/// termination audit.
fn dispatch(cfg: &Configuration, target: &Target, trace: Option<&PathBuf>, verify: Option<(u64, bool)>) -> Outcome {
    let opts = options(cfg, target, trace.is_some());
    let fault = verify.is_some_and(|(_, f)| f);
    match target.protocol {
        ProtocolName::Echo => finish(cfg, "echo", execute(cfg, &echo(), &opts, trace)?, trace, verify, |r| check_echo(cfg, r, fault)),
        ProtocolName::Height => {
            finish(cfg, "height", execute(cfg, &height_search(), &opts, trace)?, trace, verify, |r| check_height(cfg, r, fault))
        }
        ProtocolName::Numerate => {
            finish(cfg, "numerate", execute(cfg, &numerate(), &opts, trace)?, trace, verify, |r| check_numerate(cfg, r, fault))
        }
        ProtocolName::Bridges => {
            finish(cfg, "bridges", execute(cfg, &find_bridges(), &opts, trace)?, trace, verify, |r| check_bridges(cfg, r, fault))
        }
        ProtocolName::Pipeline => {
            finish(cfg, "pipeline", execute(cfg, &pipeline(), &opts, trace)?, trace, verify, |r| check_pipeline(cfg, r, fault))
        }
    }
}

fn finish<N: NodeProgram>(
    cfg: &Configuration,
    name: &str,
    mut run: Run<N>,
    trace: Option<&PathBuf>,
    verify: Option<(u64, bool)>,
    check: impl Fn(&Run<N>) -> Checked,
) -> Outcome {
    let checked = check(&run);
    let d = oracle::height(cfg);
    println!(
        "protocol={name} V={} E={} D={d} halt={} traffic={}",
        cfg.network.node_count(),
        cfg.network.edge_count(),
        run.execution_time(),
        run.traffic().total
    );
    for line in &checked.lines {
        println!("{line}");
    }
    if let (Some(path), Some(t)) = (trace, run.trace_mut()) {
        t.outputs = checked.lines.clone();
        write_trace(path, t)?;
    }
    let Some((seed, _)) = verify else {
        return Ok(());
    };
    let mut failed = !checked.mismatches.is_empty();
    for m in &checked.mismatches {
        println!("mismatch {m}");
    }
    if checked.strong {
        let report = audit(&mut run, 2 * u64::from(d) + 8, seed);
        println!("audit simultaneous={} silent={}", report.simultaneous, report.silent_after_halt);
        failed |= !report.passed();
    } else {
        println!("audit skipped: {name} halts locally, not simultaneously");
    }
    if failed {
        println!("verdict: mismatch");
        Err(Failure { code: 1, message: "verification failed".into() })
    } else {
        println!("verdict: ok");
        Ok(())
    }
}

fn cmd_run(args: RunArgs) -> Outcome {
    let cfg = load(&args.target)?;
    dispatch(&cfg, &args.target, args.trace.as_ref(), None)
}

fn cmd_verify(args: VerifyArgs) -> Outcome {
    let cfg = load(&args.target)?;
    dispatch(&cfg, &args.target, None, Some((args.seed, args.inject_fault)))
}

fn cmd_bench(args: BenchArgs) -> Outcome {
    println!(
        "{:>6} {:>7} {:>5} {:>8} {:>10} {:>9} {:>9}",
        "V", "E", "D", "rounds", "traffic", "rounds/V", "traffic/s"
    );
    for &n in &args.sizes {
        let extra = if args.kind == GraphKind::RandomConnected {
            (args.extra_per_node * n).min(n * n.saturating_sub(1) / 2 - n.saturating_sub(1))
        } else {
            0
        };
        let cfg = generate(args.kind, n, extra, args.seed).map_err(|e| Failure::usage(e.to_string()))?;
        let run = execute(&cfg, &pipeline(), &RunOptions::for_config(&cfg), None)?;
        let (v, e) = (n as f64, cfg.network.edge_count() as f64);
        let scale = v * v + e * v.log2();
        println!(
            "{:>6} {:>7} {:>5} {:>8} {:>10} {:>9.2} {:>9.3}",
            n,
            cfg.network.edge_count(),
            oracle::height(&cfg),
            run.execution_time(),
            run.traffic().total,
            run.execution_time() as f64 / v,
            run.traffic().total as f64 / scale
        );
    }
    println!("traffic/s = traffic / (V^2 + E log2 V)");
    Ok(())
}
