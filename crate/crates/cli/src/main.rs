//! `commonsense`: run the generation phases, build profile networks, serve
//! them, and query a running server.
//!
//! Exit status: 0 on success, 1 on a usage error, 2 on a data error.

mod config;

use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Parser, Subcommand};
use commonsense_core::filter::NetworkRepository;
use commonsense_core::game::{GameConfig, GameService};
use commonsense_core::relaxation::RelationSet;
use commonsense_core::resources::Lang;
use commonsense_core::store::StatementStore;
use commonsense_server::client::RpcClient;
use commonsense_server::xml::Value;
use commonsense_server::{ClientError, PortRange, ServerConfig, Services};
use thiserror::Error;

use crate::config::{read_text, ResourceArgs, Resources};

const DEFAULT_SERVER: &str = "http://127.0.0.1:8000/RPC2";
const DEFAULT_ADDR: &str = "127.0.0.1:8000";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

fn data<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Data(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "commonsense", version, about = "Profile-scoped common-sense networks")]
struct Cli {
    #[command(flatten)]
    resources: ResourceArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Export the non-rejected statements of a store snapshot as corpus lines.
    Export {
        /// Store snapshot, one JSON statement per line.
        #[arg(long)]
        store: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Corpus lines to extracted relation lines.
    Extract {
        /// Input file, `-` for stdin.
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Tag and lemmatize extracted relation parameters.
    Normalize {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Merge duplicates and apply the inference heuristics.
    Relax {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Build the network of one profile query from relaxed lines.
    Filter {
        /// Five lists, e.g. `[[], [13_17, 18_29], [], [], [SP]]`.
        #[arg(long)]
        profile: Option<String>,
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// All phases after export, writing every stage to the output directory.
    Pipeline {
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        profile: Option<String>,
    },
    /// Node, relation and density counts without and with normalization.
    Metrics {
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        profile: Option<String>,
        /// Print only the counts without normalization.
        #[arg(long)]
        before: bool,
        /// Print only the counts with normalization.
        #[arg(long)]
        after: bool,
        #[arg(long)]
        json: bool,
    },
    /// Run the management server and the game API until interrupted.
    Serve {
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Where networks are persisted.
        #[arg(long)]
        data_dir: Option<PathBuf>,
        /// Store snapshot loaded at start and written back on exit.
        #[arg(long)]
        store: Option<PathBuf>,
        /// Management address.
        #[arg(long)]
        addr: Option<String>,
        /// Instance port range `START-END`; defaults to the environment variable, then 20000-20999.
        #[arg(long)]
        ports: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Call an inference method on the instance serving a profile.
    Query {
        #[arg(long)]
        server: Option<String>,
        #[arg(long)]
        profile: Option<String>,
        /// get_context, display_node, get_analogy, expand_query or decompose_phrases.
        method: String,
        /// Seeds for get_context; the expression or concept otherwise.
        args: Vec<String>,
        #[arg(long)]
        depth: Option<i64>,
        #[arg(long)]
        decay: Option<f64>,
        /// Target profile for get_analogy.
        #[arg(long)]
        target: Option<String>,
    },
    /// Stop server instances idle for at least the given time.
    Evict {
        #[arg(long)]
        server: Option<String>,
        /// Seconds.
        #[arg(long, default_value_t = 0.0)]
        max_idle: f64,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Data(format!("{}: {e}", p.display()))),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes()).map_err(data)
        }
    }
}

fn required(flag: Option<PathBuf>, key: &Option<PathBuf>, name: &str) -> Result<PathBuf, CliError> {
    flag.or_else(|| key.clone()).ok_or_else(|| CliError::Usage(format!("--{name} is required")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let res = Resources::load(cli.resources)?;
    match cli.command {
        Command::Export { store, output } => {
            let path = required(store, &res.file.store, "store")?;
            let st = StatementStore::new(Vec::new(), Vec::new(), 0);
            st.load_json_lines(&read_text(&path)?).map_err(data)?;
            let text: String = st.export_corpus().into_iter().map(|l| l + "\n").collect();
            write_output(output.as_deref(), &text)
        }
        Command::Extract { input, output } => {
            let text = res.pipeline()?.extract_text(&read_text(&input)?).map_err(data)?;
            write_output(output.as_deref(), &text)
        }
        Command::Normalize { input, output } => {
            let (text, stats) = res.pipeline()?.normalize_text(&read_text(&input)?).map_err(data)?;
            log::info!("normalization: {}", stats.to_json());
            write_output(output.as_deref(), &text)
        }
        Command::Relax { input, output } => {
            let (text, report) = res.pipeline()?.relax_text(&read_text(&input)?).map_err(data)?;
            log::info!("relaxation: {report:?}");
            write_output(output.as_deref(), &text)
        }
        Command::Filter { profile, input, output } => {
            let q = res.profile(profile.as_deref())?;
            let text = res.pipeline()?.filter_text(&read_text(&input)?, &q).map_err(data)?;
            write_output(output.as_deref(), &text)
        }
        Command::Pipeline { corpus, out_dir, profile } => {
            let corpus = required(corpus, &res.file.corpus, "corpus")?;
            let out_dir = required(out_dir, &res.file.out_dir, "out-dir")?;
            let q = res.profile(profile.as_deref())?;
            let p = res.pipeline()?;
            let text = read_text(&corpus)?;
            let run = p.run(&text, &q, true).map_err(data)?;
            let metrics = p.metrics(&text, &q).map_err(data)?;
            fs::create_dir_all(&out_dir).map_err(|e| CliError::Data(format!("{}: {e}", out_dir.display())))?;
            for (name, body) in [
                ("extracted.txt", &run.extracted),
                ("normalized.txt", &run.normalized),
                ("relaxed.txt", &run.relaxed),
                ("network.net", &run.network),
                ("metrics.txt", &metrics.to_table()),
            ] {
                write_output(Some(&out_dir.join(name)), body)?;
            }
            println!(
                "{} relations, {} nodes in {}",
                run.net.len(),
                run.net.node_count(),
                out_dir.join("network.net").display()
            );
            Ok(())
        }
        Command::Metrics { corpus, profile, before, after, json } => {
            let corpus = required(corpus, &res.file.corpus, "corpus")?;
            let q = res.profile(profile.as_deref())?;
            let report = res.pipeline()?.metrics(&read_text(&corpus)?, &q).map_err(data)?;
            let text = if json {
                serde_json::to_string_pretty(&report).map_err(data)? + "\n"
            } else if before != after {
                let m = if before { &report.before } else { &report.after };
                format!("nodes {}\nrelations {}\ndensity {:.6}\n", m.nodes, m.relations, m.density)
            } else {
                report.to_table()
            };
            write_output(None, &text)
        }
        Command::Serve { corpus, data_dir, store, addr, ports, seed } => {
            serve(&res, corpus, data_dir, store, addr, ports, seed)
        }
        Command::Query { server, profile, method, args, depth, decay, target } => {
            let client = RpcClient::new(server.or(res.file.server.clone()).unwrap_or(DEFAULT_SERVER.into()));
            let q = res.profile(profile.as_deref())?;
            let params = query_params(&res, &method, args, depth, decay, target)?;
            let port = client.wait_ready(&q, Duration::from_secs(300)).map_err(client_error)?;
            let v = client.for_port(port).call(&method, params).map_err(client_error)?;
            let text = serde_json::to_string_pretty(&to_json(&v)).map_err(data)?;
            write_output(None, &(text + "\n"))
        }
        Command::Evict { server, max_idle } => {
            if !(max_idle.is_finite() && max_idle >= 0.0) {
                return Err(CliError::Usage("--max-idle must be a non-negative number".into()));
            }
            let client = RpcClient::new(server.or(res.file.server.clone()).unwrap_or(DEFAULT_SERVER.into()));
            let n = client.evict_idle(Duration::from_secs_f64(max_idle)).map_err(client_error)?;
            println!("{n}");
            Ok(())
        }
    }
}

fn client_error(e: ClientError) -> CliError {
    CliError::Data(e.to_string())
}

fn query_params(
    res: &Resources,
    method: &str,
    args: Vec<String>,
    depth: Option<i64>,
    decay: Option<f64>,
    target: Option<String>,
) -> Result<Vec<Value>, CliError> {
    Ok(match method {
        "get_context" => {
            if args.is_empty() {
                return Err(CliError::Usage("get_context needs at least one seed".into()));
            }
            let mut params = vec![Value::strings(args)];
            if depth.is_some() || decay.is_some() {
                params.push(Value::Int(depth.unwrap_or(commonsense_core::inference::DEFAULT_DEPTH as i64)));
            }
            if let Some(d) = decay {
                params.push(Value::Double(d));
            }
            params
        }
        "get_analogy" => {
            let spec = target.ok_or_else(|| CliError::Usage("get_analogy needs --target".into()))?;
            let q = res.profile(Some(&spec))?;
            q.to_lists().into_iter().map(Value::strings).collect()
        }
        _ => vec![Value::str(args.join(" "))],
    })
}

fn to_json(v: &Value) -> serde_json::Value {
    use serde_json::json;
    match v {
        Value::Int(n) => json!(n),
        Value::Bool(b) => json!(b),
        Value::Double(x) => json!(x),
        Value::Str(s) => json!(s),
        Value::Array(items) => serde_json::Value::Array(items.iter().map(to_json).collect()),
        Value::Struct(members) => {
            serde_json::Value::Object(members.iter().map(|(k, v)| (k.clone(), to_json(v))).collect())
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn serve(
    res: &Resources,
    corpus: Option<PathBuf>,
    data_dir: Option<PathBuf>,
    store_path: Option<PathBuf>,
    addr: Option<String>,
    ports: Option<String>,
    seed: Option<u64>,
) -> Result<(), CliError> {
    let f = &res.file;
    let corpus = required(corpus, &f.corpus, "corpus")?;
    let data_dir = required(data_dir, &f.data_dir, "data-dir")?;
    let store_path = store_path.or(f.store.clone());
    let addr: SocketAddr = addr
        .or(f.addr.clone())
        .unwrap_or(DEFAULT_ADDR.into())
        .parse()
        .map_err(|e| CliError::Usage(format!("--addr: {e}")))?;
    let ports = match ports.or(f.ports.clone()) {
        Some(r) => r.parse::<PortRange>(),
        None => PortRange::from_env(),
    }
    .map_err(|e| CliError::Usage(e.to_string()))?;
    let seed = seed.or(f.seed).unwrap_or(0);

    let p = res.pipeline()?;
    let (normalized, _) = p.normalize_text(&p.extract_text(&read_text(&corpus)?).map_err(data)?).map_err(data)?;
    let (relaxed, _) = p.relax_text(&normalized).map_err(data)?;
    let set = RelationSet::parse_lines(&relaxed, &p.schema).map_err(data)?;
    let repo = Arc::new(NetworkRepository::new(&data_dir, set, p.flags, p.schema.clone()).map_err(data)?);

    let seeds = vec![match res.lang {
        Lang::Pt => "cadeira".to_string(),
        Lang::En => "chair".to_string(),
    }];
    let store = Arc::new(StatementStore::new(res.templates()?, seeds, seed));
    if let Some(path) = store_path.as_ref().filter(|p| p.exists()) {
        let n = store.load_json_lines(&read_text(path)?).map_err(data)?;
        log::info!("loaded {n} statements from {}", path.display());
    }
    let renderer = res.renderer()?;
    let services = Services {
        repository: Arc::clone(&repo),
        morphology: Arc::clone(&p.morphology),
        renderer: Arc::new(renderer.clone()),
    };
    let game = Arc::new(GameService::new(
        Arc::clone(&store),
        repo,
        Arc::clone(&p.morphology),
        renderer,
        GameConfig { rng_seed: seed, ..GameConfig::default() },
    ));

    let rt = tokio::runtime::Runtime::new().map_err(data)?;
    rt.block_on(async {
        let server =
            commonsense_server::start(ServerConfig { addr, ports }, services, Some(game)).await.map_err(data)?;
        println!("management endpoint http://{}/RPC2, instance ports {}-{}", server.addr(), ports.start, ports.end);
        let _ = tokio::signal::ctrl_c().await;
        server.stop().await;
        Ok::<(), CliError>(())
    })?;
    if let Some(path) = store_path {
        write_output(Some(&path), &store.to_json_lines().map_err(data)?)?;
    }
    Ok(())
}
