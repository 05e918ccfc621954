use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use coarsepath::decomp::{
    build_path_partition_with_stats, exact_width, random_tree_partition, validate_decomposition,
    PartitionDecomposition,
};
use coarsepath::gen::{generate, InstanceSpec};
use coarsepath::graph::canonical_shortest_path;
use coarsepath::oracle::{brute_dist_ds_witness, brute_dist_is_witness, Budget};
use coarsepath::qiso::main_theorem_certificates;
use coarsepath::snappath::{simplify, Level, Snapper};
use coarsepath::solver::{solve, Mode, SolverOptions};
use coarsepath::{greedy_cover, pipeline, verify_cover, Error, GeodesicCover, Graph, Vertex};

const EXIT_INVALID: u8 = 2;
const EXIT_BUDGET: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser)]
#[command(name = "coarsepath", version, about = "Coarse path-decompositions and exact distance set solvers")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Graph file: `n m` then one `u v` edge per line.
    #[arg(long, global = true)]
    graph: Option<PathBuf>,
    /// Cover file (JSON with `rho` and `paths`).
    #[arg(long, global = true)]
    cover: Option<PathBuf>,
    /// Distance parameter; overrides the one stored in an input file.
    #[arg(long, global = true)]
    rho: Option<u32>,
    /// Seed for randomized steps.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the JSON result here instead of standard output.
    #[arg(long, global = true)]
    json_out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance with a planted geodesic cover.
    Gen {
        /// path | cycle | grid | cross | random-cover-union
        family: String,
        /// Family parameters; a missing random seed is taken from --seed.
        params: Vec<String>,
        /// Also write the graph in text form.
        #[arg(long)]
        graph_out: Option<PathBuf>,
        /// Also write the planted cover.
        #[arg(long)]
        cover_out: Option<PathBuf>,
    },
    /// Check or construct a geodesic cover.
    Cover {
        #[command(subcommand)]
        action: CoverAction,
    },
    /// Snap the canonical shortest path between two vertices onto the cover.
    Snap {
        #[arg(long)]
        from: Vertex,
        #[arg(long)]
        to: Vertex,
        #[arg(long)]
        simplify: bool,
    },
    /// Build (or sample) a partition decomposition and validate it.
    Decompose {
        /// Also compute the exact per-bag domination numbers.
        #[arg(long)]
        exact_width: bool,
        /// Sample a random tree partition (needs --rho) instead of using the cover.
        #[arg(long)]
        random_tree: bool,
        /// Include per-bag construction statistics.
        #[arg(long)]
        stats: bool,
    },
    /// Distance graph, quasi-isometry and path-decomposition certificates.
    Qiso {
        /// Write the distance graph in text form.
        #[arg(long)]
        emit_h: Option<PathBuf>,
    },
    /// Run a dynamic program over a decomposition.
    Solve {
        problem: Problem,
        #[arg(long)]
        decomp: PathBuf,
        #[arg(long)]
        witness: bool,
        #[arg(long, default_value_t = 1_000_000)]
        max_states: usize,
    },
    /// Brute-force reference values.
    Oracle {
        problem: Problem,
        /// Comma-separated target vertices; all vertices by default.
        #[arg(long)]
        set: Option<String>,
        #[arg(long, default_value_t = 16)]
        max_subset: usize,
        #[arg(long, default_value_t = 20_000_000)]
        max_nodes: usize,
    },
    /// Decompose from the cover, then solve both problems at twice the cover radius.
    Pipeline {
        #[arg(long, default_value_t = 1_000_000)]
        max_states: usize,
    },
}

#[derive(Subcommand)]
enum CoverAction {
    Verify,
    /// Greedy cover at radius --rho.
    Greedy,
}

#[derive(Clone, Copy, ValueEnum)]
enum Problem {
    /// Vertices pairwise more than 2*rho apart, maximized.
    Is,
    /// Every vertex within rho of a member, minimized.
    Ds,
}

impl Problem {
    fn mode(self) -> Mode {
        match self {
            Problem::Is => Mode::Independent,
            Problem::Ds => Mode::Dominating,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Problem::Is => "is",
            Problem::Ds => "ds",
        }
    }
}

/// A JSON result and the exit status it implies.
struct Outcome {
    value: Value,
    ok: bool,
}

impl Outcome {
    fn ok(value: impl Serialize) -> Result<Self> {
        Ok(Self {
            value: serde_json::to_value(value)?,
            ok: true,
        })
    }

    fn checked(value: impl Serialize, ok: bool) -> Result<Self> {
        Ok(Self {
            value: serde_json::to_value(value)?,
            ok,
        })
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

impl Global {
    fn graph(&self) -> Result<Graph> {
        let path = self.graph.as_deref().ok_or_else(|| anyhow!("--graph is required"))?;
        Ok(Graph::parse(&read(path)?)?)
    }

    fn cover(&self) -> Result<GeodesicCover> {
        let path = self.cover.as_deref().ok_or_else(|| anyhow!("--cover is required"))?;
        let mut c = GeodesicCover::from_json(&read(path)?)?;
        if let Some(rho) = self.rho {
            c.rho = rho;
        }
        Ok(c)
    }

    fn rho(&self) -> Result<u32> {
        self.rho.ok_or_else(|| anyhow!("--rho is required"))
    }
}

fn load_decomposition(path: &Path) -> Result<PartitionDecomposition> {
    let value: Value = serde_json::from_str(&read(path)?)?;
    let inner = match value.get("decomposition") {
        Some(d) => d.clone(),
        None => value,
    };
    Ok(serde_json::from_value(inner)?)
}

fn parse_set(text: &str) -> Result<Vec<Vertex>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().with_context(|| format!("bad vertex `{s}` in --set")))
        .collect()
}

fn run(cli: &Cli) -> Result<Outcome> {
    let g = &cli.global;
    match &cli.command {
        Command::Gen {
            family,
            params,
            graph_out,
            cover_out,
        } => {
            let mut words = vec![family.clone()];
            words.extend(params.iter().cloned());
            if family == "random-cover-union" && params.len() == 3 {
                words.push(g.seed.to_string());
            }
            let spec: InstanceSpec = words.join(" ").parse()?;
            let inst = generate(spec)?;
            if let Some(p) = graph_out {
                write(p, &inst.graph.to_text())?;
            }
            if let Some(p) = cover_out {
                write(p, &inst.cover.to_json())?;
            }
            Outcome::ok(json!({
                "spec": inst.spec,
                "graph": inst.graph,
                "cover": inst.cover,
            }))
        }
        Command::Cover { action } => {
            let graph = g.graph()?;
            match action {
                CoverAction::Verify => {
                    let report = verify_cover(&graph, &g.cover()?)?;
                    let ok = report.ok;
                    Outcome::checked(report, ok)
                }
                CoverAction::Greedy => Outcome::ok(greedy_cover(&graph, g.rho()?)),
            }
        }
        Command::Snap { from, to, simplify: simp } => {
            let graph = g.graph()?;
            let cover = g.cover()?;
            let snapper = Snapper::new(&graph, &cover)?;
            let path = canonical_shortest_path(&graph, *from, *to)?
                .ok_or_else(|| Error::Precondition(format!("{to} is unreachable from {from}")))?;
            let raw = snapper.snap(&path)?;
            let mut violations = raw.raw_violations(&graph, &cover);
            let mut out = json!({
                "path": path,
                "snap_path": raw,
                "length_difference": raw.len().abs_diff(path.len()),
            });
            if *simp {
                let s = simplify(&raw, cover.k(), cover.rho)?;
                violations.extend(s.simplified_violations(&graph, &cover));
                if s.concat()? != raw.concat()? {
                    violations.push("simplification changed the walk".into());
                }
                let level = match s.level {
                    Level::Simplified(l) => l,
                    Level::Raw => 0,
                };
                out["simplified"] = serde_json::to_value(&s)?;
                out["type"] = serde_json::to_value(s.type_of()?)?;
                out["level"] = level.into();
            }
            let ok = violations.is_empty();
            out["violations"] = serde_json::to_value(violations)?;
            Outcome::checked(out, ok)
        }
        Command::Decompose {
            exact_width: exact,
            random_tree,
            stats,
        } => {
            let graph = g.graph()?;
            let (pd, bag_stats) = if *random_tree {
                let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
                (random_tree_partition(&graph, g.rho()?, 50, &mut rng)?, None)
            } else {
                let (pd, s) = build_path_partition_with_stats(&graph, &g.cover()?)?;
                (pd, Some(s))
            };
            let report = validate_decomposition(&graph, &pd);
            let mut out = json!({
                "width": pd.width(),
                "degree": pd.degree(),
                "bags": pd.bags.len(),
                "report": report,
            });
            if *exact {
                out["exact_width"] = serde_json::to_value(exact_width(&graph, &pd, Budget::default())?)?;
            }
            if *stats {
                out["stats"] = serde_json::to_value(bag_stats)?;
            }
            out["decomposition"] = serde_json::to_value(&pd)?;
            Outcome::checked(out, report.ok)
        }
        Command::Qiso { emit_h } => {
            let graph = g.graph()?;
            let certs = main_theorem_certificates(&graph, &g.cover()?)?;
            if let Some(p) = emit_h {
                write(p, &certs.distance_graph.h.to_text())?;
            }
            let ok = certs.ok;
            Outcome::checked(certs, ok)
        }
        Command::Solve {
            problem,
            decomp,
            witness,
            max_states,
        } => {
            let graph = g.graph()?;
            let pd = load_decomposition(decomp)?;
            let report = validate_decomposition(&graph, &pd);
            if !report.ok {
                return Outcome::checked(json!({ "report": report }), false);
            }
            let opts = SolverOptions {
                rho: g.rho,
                max_states: *max_states,
            };
            let sol = solve(&graph, &pd, problem.mode(), opts)?;
            let mut out = json!({
                "problem": problem.name(),
                "rho": g.rho.unwrap_or(pd.rho),
                "value": sol.value,
            });
            if *witness {
                out["witness"] = serde_json::to_value(sol.witness)?;
            }
            Outcome::ok(out)
        }
        Command::Oracle {
            problem,
            set,
            max_subset,
            max_nodes,
        } => {
            let graph = g.graph()?;
            let rho = g.rho()?;
            let targets = match set {
                Some(s) => parse_set(s)?,
                None => (0..graph.n()).collect(),
            };
            let budget = Budget::new(*max_subset, *max_nodes)?;
            let (distance, witness) = match problem {
                Problem::Is => (2 * rho, brute_dist_is_witness(&graph, &targets, 2 * rho, budget)?),
                Problem::Ds => (rho, brute_dist_ds_witness(&graph, &targets, rho, budget)?),
            };
            Outcome::ok(json!({
                "problem": problem.name(),
                "rho": rho,
                "distance": distance,
                "value": witness.len(),
                "witness": witness,
            }))
        }
        Command::Pipeline { max_states } => {
            let graph = g.graph()?;
            Outcome::ok(pipeline(&graph, &g.cover()?, *max_states)?)
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::BudgetExceeded { .. }) => EXIT_BUDGET,
        Some(
            Error::Parse { .. }
            | Error::SelfLoop(_)
            | Error::DuplicateEdge(..)
            | Error::VertexOutOfRange { .. }
            | Error::EmptySources
            | Error::EmptyWalk,
        ) => EXIT_IO,
        Some(_) => EXIT_INVALID,
        None => EXIT_IO,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(&cli).and_then(|o| {
        let text = serde_json::to_string_pretty(&o.value)? + "\n";
        match &cli.global.json_out {
            Some(p) => write(p, &text)?,
            None => print!("{text}"),
        }
        Ok(o.ok)
    });
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_INVALID),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
