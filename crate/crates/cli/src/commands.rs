//! Subcommand definitions and their implementations.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use skm::kig::{build_kig, fraternize};
use skm::modcheck::verify_partition;
use skm::netmodel::NetworkJson;
use skm::ssa::{
    conditional_projection_test, likelihood_groups, project_dstar, project_subprocess, reconstruct_reaction_paths,
    replica_rng, replica_stats, replicate, simulate_with, Side, SimOptions, SubprocessPath, DEFAULT_EVENT_CAP,
};
use skm::ReactionNetwork;

use crate::parse::{load_network, parse_partition, parse_set, parse_x0};
use crate::repl;
use crate::session::{Session, TreeMode};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "skm", version, about = "Stochastic kinetic model toolkit: independence graphs, modularization, exact simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
    Dot,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    Directed,
    Undirected,
    Moral,
    Fraternized,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Directed => "directed",
            Variant::Undirected => "undirected",
            Variant::Moral => "moral",
            Variant::Fraternized => "fraternized",
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check that a network is a standard model.
    Validate {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Export the kinetic independence graph or one of its undirected forms.
    Kig(KigArgs),
    /// Build a junction tree and the modules it induces.
    Modularize(ModularizeArgs),
    /// Simulate trajectories, replica statistics or the projection oracle.
    Simulate(SimulateArgs),
    /// Check the independence conditions for a partition A;B;D.
    Verify(VerifyArgs),
    /// Serve the session over a local HTTP JSON API.
    Serve {
        file: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: String,
        #[arg(long, value_enum, default_value = "cliques")]
        mode: TreeMode,
    },
}

#[derive(Args, Debug)]
pub struct KigArgs {
    pub file: PathBuf,
    #[arg(long, value_enum, conflicts_with_all = ["undirected", "moral", "fraternized"])]
    pub variant: Option<Variant>,
    #[arg(long, conflicts_with_all = ["moral", "fraternized"])]
    pub undirected: bool,
    #[arg(long, conflicts_with = "fraternized")]
    pub moral: bool,
    #[arg(long)]
    pub fraternized: bool,
    #[arg(long, value_enum, conflicts_with_all = ["dot", "json"])]
    pub format: Option<Format>,
    #[arg(long, conflicts_with = "json")]
    pub dot: bool,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct ModularizeArgs {
    pub file: PathBuf,
    /// Start from the maximal prime subgraph decomposition instead of the
    /// clique tree.
    #[arg(long)]
    pub mpd: bool,
    /// Commands applied after the start tree, `;`- or newline-separated
    /// (e.g. "aggregate 0 1"); `@path` reads them from a file.
    #[arg(long, conflicts_with = "interactive")]
    pub script: Option<String>,
    /// Open the aggregation loop on stdin/stdout.
    #[arg(long)]
    pub interactive: bool,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Network file; not needed with --projection-oracle.
    #[arg(required_unless_present = "projection_oracle")]
    pub file: Option<PathBuf>,
    /// `id=count,...` or one count per species in order.
    #[arg(long)]
    pub x0: Option<String>,
    #[arg(long, default_value_t = 10.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 1)]
    pub replicas: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Maximum events per replica.
    #[arg(long, default_value_t = DEFAULT_EVENT_CAP)]
    pub cap: u64,
    /// Project a single trajectory: `A:<species>` for N^A, `Dstar:<A;B;D>`
    /// for N^{D*}.
    #[arg(long)]
    pub project: Option<String>,
    /// Run the three-species conditional projection oracle.
    #[arg(long)]
    pub projection_oracle: bool,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    pub file: PathBuf,
    /// `A;B;D`, comma-separated species in each cell.
    #[arg(long)]
    pub partition: String,
    /// Test separation in the fraternized graph, where the consumption
    /// condition is not needed.
    #[arg(long)]
    pub fraternized: bool,
    /// Also check exact path reconstruction on simulated replicas.
    #[arg(long)]
    pub reconstruct: bool,
    #[arg(long, default_value_t = 100)]
    pub replicas: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 5.0)]
    pub t_end: f64,
    #[arg(long)]
    pub x0: Option<String>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

/// Text for stdout plus the exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

/// An error message for stderr plus the exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub message: String,
    pub code: i32,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure { message: message.into(), code: EXIT_USAGE }
    }

    pub fn internal(message: impl std::fmt::Display) -> Self {
        Failure { message: message.to_string(), code: EXIT_INTERNAL }
    }
}

type CmdResult = Result<Outcome, Failure>;

fn ok(stdout: String) -> CmdResult {
    Ok(Outcome { stdout, code: EXIT_OK })
}

fn pretty(v: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn unsupported(cmd: &str, f: Format) -> Failure {
    Failure::usage(format!("{cmd} does not support --format {}", format!("{f:?}").to_lowercase()))
}

fn load(path: &Path) -> Result<ReactionNetwork, Failure> {
    load_network(path).map_err(Failure::usage)
}

/// Runs a parsed command. `stdin`/`stdout` are used only by the interactive
/// loop.
pub fn run(cli: Cli, stdin: impl BufRead, stdout: impl Write) -> CmdResult {
    match cli.command {
        Command::Validate { file, format } => validate(&file, format),
        Command::Kig(a) => kig(a),
        Command::Modularize(a) => modularize(a, stdin, stdout),
        Command::Simulate(a) => simulate(a),
        Command::Verify(a) => verify(a),
        Command::Serve { file, port, bind, mode } => serve(&file, &bind, port, mode),
    }
}

pub fn validate(file: &Path, format: Format) -> CmdResult {
    let net = load(file)?;
    let report = net.check_standard();
    let stdout = match format {
        Format::Json => pretty(&report),
        Format::Text => format!("{}\n", report.to_string().trim_end()),
        f => return Err(unsupported("validate", f)),
    };
    Ok(Outcome { stdout, code: if report.passed() { EXIT_OK } else { EXIT_FAILED } })
}

pub fn kig(a: KigArgs) -> CmdResult {
    let net = load(&a.file)?;
    let variant = a.variant.unwrap_or(if a.undirected {
        Variant::Undirected
    } else if a.moral {
        Variant::Moral
    } else if a.fraternized {
        Variant::Fraternized
    } else {
        Variant::Directed
    });
    let format = a.format.unwrap_or(if a.json { Format::Json } else { Format::Dot });
    let g = build_kig(&net);
    if variant == Variant::Directed {
        return match format {
            Format::Dot => ok(g.to_dot()),
            Format::Json => ok(pretty(&g.to_json())),
            Format::Text => ok(g.edges().iter().map(|&(x, y)| format!("{} -> {}\n", net.species_id(x), net.species_id(y))).collect()),
            f => Err(unsupported("kig", f)),
        };
    }
    let u = match variant {
        Variant::Undirected => g.undirected(),
        Variant::Moral => g.moralize(),
        _ => fraternize(&net, &g),
    };
    match format {
        Format::Dot => ok(u.to_dot()),
        Format::Json => ok(pretty(&u.to_json())),
        Format::Text => ok(u.edges().iter().map(|&(x, y)| format!("{} -- {}\n", net.species_id(x), net.species_id(y))).collect()),
        f => Err(unsupported("kig", f)),
    }
}

/// JSON view of a session shared by `modularize` and the API.
pub fn session_json(s: &Session) -> Value {
    let m = s.modularization();
    let fill: Vec<[&str; 2]> =
        s.triangulation().fill_edges.iter().map(|&(a, b)| [s.net().species_id(a), s.net().species_id(b)]).collect();
    json!({
        "tree": s.tree_json(),
        "labels": (0..m.len()).map(|d| m.label(d)).collect::<Vec<_>>(),
        "fill_edges": fill,
        "modularization": {
            "modules": m.modules.iter().map(|x| m.ids(x)).collect::<Vec<_>>(),
            "separators": m.separators.iter().map(|x| m.ids(x)).collect::<Vec<_>>(),
            "residuals": m.residuals.iter().map(|x| m.ids(x)).collect::<Vec<_>>(),
            "provenance": m.provenance,
        },
        "copies": s.copies(),
        "report": s.report(),
    })
}

pub fn modularize(a: ModularizeArgs, stdin: impl BufRead, stdout: impl Write) -> CmdResult {
    let net = load(&a.file)?;
    let mode = if a.mpd { TreeMode::Mpd } else { TreeMode::Cliques };
    let mut session = Session::new(net, mode).map_err(Failure::internal)?;
    if let Some(script) = &a.script {
        let text = match script.strip_prefix('@') {
            Some(path) => std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {path}: {e}")))?,
            None => script.clone(),
        };
        repl::run_script(&mut session, &text).map_err(Failure::usage)?;
    }
    if a.interactive {
        repl::run(&mut session, stdin, stdout).map_err(Failure::internal)?;
    }
    match a.format {
        Format::Json => ok(pretty(&session_json(&session))),
        Format::Text => ok(format!("{}\n{}", session.listing(), session.report().to_markdown())),
        Format::Dot => ok(session.tree().to_dot()),
        f => Err(unsupported("modularize", f)),
    }
}

fn path_csv(p: &SubprocessPath) -> String {
    let mut out = String::from("time,component\n");
    for &(t, c) in &p.events {
        out.push_str(&format!("{t},{}\n", p.labels[c]));
    }
    out
}

pub fn simulate(a: SimulateArgs) -> CmdResult {
    if !(a.t_end.is_finite() && a.t_end > 0.0) {
        return Err(Failure::usage(format!("--t-end must be positive, got {}", a.t_end)));
    }
    if a.replicas == 0 {
        return Err(Failure::usage("--replicas must be at least 1"));
    }
    if a.projection_oracle {
        let report = conditional_projection_test(a.t_end, a.replicas, a.seed);
        let stdout = match a.format {
            Format::Json => pretty(&report),
            Format::Text => {
                let mut s = format!("projection oracle: t={} replicas={} seed={}\n", a.t_end, a.replicas, a.seed);
                for f in report.functionals.iter().chain([&report.control]) {
                    s.push_str(&format!(
                        "  {:<28} mean {:+.5}  se {:.5}  z {:.2}  {}\n",
                        f.name,
                        f.mean,
                        f.se,
                        f.z,
                        if f.pass { "pass" } else { "FAIL" }
                    ));
                }
                s.push_str(&format!("  D* reconstruction max residual {}\n", report.reconstruction_max_residual));
                s
            }
            f => return Err(unsupported("simulate --projection-oracle", f)),
        };
        return Ok(Outcome { stdout, code: if report.passed { EXIT_OK } else { EXIT_FAILED } });
    }
    let file = a.file.as_ref().expect("clap requires a file");
    let net = load(file)?;
    let x0 = parse_x0(&net, a.x0.as_deref()).map_err(Failure::usage)?;
    let opts = SimOptions { cap: a.cap };
    if a.replicas > 1 {
        if a.project.is_some() {
            return Err(Failure::usage("--project applies to a single replica"));
        }
        let stats = replica_stats(&net, &x0, a.t_end, a.replicas, a.seed, opts).map_err(Failure::internal)?;
        return match a.format {
            Format::Json => ok(pretty(&stats)),
            Format::Text => {
                let mut s = format!("replicas={} seed={} t_end={}\n", stats.replicas, stats.seed, stats.t_end);
                s.push_str(&format!("events: mean {:.4} se {:.4}\n", stats.events.mean, stats.events.se));
                for (id, m) in stats.species.iter().zip(&stats.final_state) {
                    s.push_str(&format!("{id}: mean {:.4} se {:.4}\n", m.mean, m.se));
                }
                ok(s)
            }
            f => Err(unsupported("simulate --replicas", f)),
        };
    }
    let traj = simulate_with(&net, &x0, a.t_end, &mut replica_rng(a.seed, 0), opts).map_err(Failure::internal)?;
    let Some(spec) = &a.project else {
        return match a.format {
            Format::Json => ok(pretty(&traj.to_json(&net))),
            Format::Csv | Format::Text => ok(traj.to_csv(&net)),
            f => Err(unsupported("simulate", f)),
        };
    };
    let path = if let Some(species) = spec.strip_prefix("A:") {
        let set = parse_set(&net, species).map_err(Failure::usage)?;
        project_subprocess(&traj, &net, &set).map_err(|e| Failure::usage(e.to_string()))?
    } else if let Some(cells) = spec.strip_prefix("Dstar:") {
        let [pa, pb, pd] = parse_partition(&net, cells).map_err(Failure::usage)?;
        let p = net.dstar_partition(&pa, &pb, &pd).map_err(|e| Failure::usage(e.to_string()))?;
        project_dstar(&traj, &net, &p)
    } else {
        return Err(Failure::usage(format!("--project expects A:<species> or Dstar:<A;B;D>, got {spec:?}")));
    };
    match a.format {
        Format::Json => ok(pretty(&path)),
        Format::Csv | Format::Text => ok(path_csv(&path)),
        f => Err(unsupported("simulate --project", f)),
    }
}

pub fn verify(a: VerifyArgs) -> CmdResult {
    let net = load(&a.file)?;
    let [pa, pb, pd] = parse_partition(&net, &a.partition).map_err(Failure::usage)?;
    let g = build_kig(&net);
    let report = verify_partition(&net, &g, &pa, &pb, &pd, a.fraternized).map_err(|e| Failure::usage(e.to_string()))?;
    let p = net.dstar_partition(&pa, &pb, &pd).map_err(|e| Failure::usage(e.to_string()))?;
    let groups = likelihood_groups(&net, &p);
    let mut passed = report.certified;
    let reconstruction = if a.reconstruct {
        let x0 = parse_x0(&net, a.x0.as_deref()).map_err(Failure::usage)?;
        let per_replica = replicate(&net, &x0, a.t_end, a.replicas, a.seed, SimOptions::default(), |_, traj| {
            let dstar = project_dstar(&traj, &net, &p);
            let mut bad = 0;
            for (side, cells) in [(Side::A, &p.a), (Side::B, &p.b)] {
                let path = project_subprocess(&traj, &net, cells)?;
                bad += reconstruct_reaction_paths(&net, &p, side, &path, &dstar)?.mismatches(&traj, net.n_reactions());
            }
            Ok((bad, traj.events.len()))
        });
        let value = match per_replica {
            Ok(rows) => {
                let mismatches: usize = rows.iter().map(|r| r.0).sum();
                let events: usize = rows.iter().map(|r| r.1).sum();
                passed &= mismatches == 0;
                json!({"replicas": a.replicas, "seed": a.seed, "t_end": a.t_end, "events": events,
                       "mismatches": mismatches, "exact": mismatches == 0})
            }
            Err(e) => {
                passed = false;
                json!({"replicas": a.replicas, "error": e.to_string(), "exact": false})
            }
        };
        Some(value)
    } else {
        None
    };
    let groups_json = match &groups {
        Ok(g) => json!({"a": net.reaction_names(&g.a), "b": net.reaction_names(&g.b)}),
        Err(e) => json!({"error": e.to_string()}),
    };
    let code = if passed { EXIT_OK } else { EXIT_FAILED };
    match a.format {
        Format::Json => {
            let mut v = serde_json::to_value(&report).expect("report JSON");
            v["likelihood_groups"] = groups_json;
            if let Some(r) = reconstruction {
                v["reconstruction"] = r;
            }
            Ok(Outcome { stdout: pretty(&v), code })
        }
        Format::Text => {
            let yn = |b: bool| if b { "yes" } else { "no" };
            let mut s = format!("partition A={:?} B={:?} D={:?}\n", report.a, report.b, report.d);
            s.push_str(&format!("separated in {} graph: {}\n", report.graph, yn(report.separated)));
            if let Some(w) = &report.witness {
                s.push_str(&format!("  witness path: {}\n", w.join(" - ")));
            }
            s.push_str(&format!("shared reactions Δ(A)∩Δ(B): {:?}\n", report.gamma));
            match report.condition_ok {
                Some(c) => s.push_str(&format!("consumption condition: {}\n", yn(c))),
                None => s.push_str("consumption condition: not required (fraternized)\n"),
            }
            s.push_str(&format!("D and D* histories equal: {}\n", yn(report.history_equal)));
            s.push_str(&format!("likelihood groups: {groups_json}\n"));
            if let Some(r) = reconstruction {
                s.push_str(&format!("reconstruction: {r}\n"));
            }
            for f in report.report.findings() {
                s.push_str(&format!("  [{}] {}\n", f.code, f.message));
            }
            s.push_str(if passed { "certified\n" } else { "not certified\n" });
            Ok(Outcome { stdout: s, code })
        }
        f => Err(unsupported("verify", f)),
    }
}

pub fn serve(file: &Path, bind: &str, port: u16, mode: TreeMode) -> CmdResult {
    let net = load(file)?;
    let session = Session::new(net, mode).map_err(Failure::internal)?;
    let rt = tokio::runtime::Runtime::new().map_err(Failure::internal)?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind((bind, port)).await.map_err(Failure::internal)?;
        let addr = listener.local_addr().map_err(Failure::internal)?;
        eprintln!("serving on http://{addr}");
        axum::serve(listener, crate::api::router(session)).await.map_err(Failure::internal)
    })?;
    ok(String::new())
}

/// Network JSON as served by the API.
pub fn network_json(net: &ReactionNetwork) -> NetworkJson {
    NetworkJson::from(net)
}
