use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use koch_core::analytics;
use koch_core::centrality::{self, CentralityReport};
use koch_core::electrical::{self, EndpointRule, PairPolicy};
use koch_core::export;
use koch_core::graph::DEFAULT_MAX_VERTICES;
use koch_core::label::enumerate_labels_capped;
use koch_core::labels;
use koch_core::routing;
use koch_core::verify::{self, Suite, VerifyOptions};
use koch_core::{build_with, BuildOptions, Error, KochGraph, Label, VertexRef};

const SIZE_CAP_ENV: &str = "KOCH_MAX_VERTICES";
/// Sampled pairs for current-flow betweenness above the exhaustive limit.
const CFB_SAMPLE_PAIRS: usize = 2000;

#[derive(Parser)]
#[command(
    name = "koch",
    version,
    about = "Koch network generator and analysis toolkit"
)]
struct Cli {
    /// Seed for every sampled check.
    #[arg(long, global = true, default_value = "0x6B6F6368", value_parser = parse_seed)]
    seed: u64,
    /// Worker threads for the parallel passes (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct Size {
    /// Subnet multiplicity (groups per triangle corner).
    #[arg(long)]
    m: u32,
    /// Iteration count.
    #[arg(long)]
    t: u32,
}

#[derive(Subcommand)]
enum Command {
    /// Build K_{m,t} and export it.
    Generate {
        #[command(flatten)]
        size: Size,
        #[arg(long, value_enum, default_value_t = Format::Edgelist)]
        format: Format,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Decode a label (or #id) into its father, companion, sons and degree.
    Decode {
        #[command(flatten)]
        size: Size,
        vertex: String,
    },
    /// Shortest path between two vertices computed from labels alone.
    Route {
        #[command(flatten)]
        size: Size,
        a: String,
        b: String,
        /// Also report the BFS distance on the built graph.
        #[arg(long)]
        oracle: bool,
    },
    /// Closed-form and measured structural statistics.
    Stats {
        #[command(flatten)]
        size: Size,
        #[arg(long)]
        empirical: bool,
        /// One row per degree class instead of JSON.
        #[arg(long)]
        csv: bool,
    },
    /// Vertex or edge betweenness tables.
    Betweenness {
        #[command(flatten)]
        size: Size,
        #[arg(long, value_enum, default_value_t = BetweennessMode::Compare)]
        mode: BetweennessMode,
        #[arg(long)]
        edges: bool,
    },
    /// Resistor-network analysis with unit resistors on every edge.
    Electrical {
        #[command(flatten)]
        size: Size,
        #[arg(long)]
        source: Option<String>,
        #[arg(long)]
        target: Option<String>,
        #[arg(long, conflicts_with_all = ["cfb", "gap"])]
        profile: bool,
        /// Current-flow betweenness of every vertex.
        #[arg(long, conflicts_with = "gap")]
        cfb: bool,
        /// Voltage-gap statistic for the source/target probe.
        #[arg(long)]
        gap: bool,
    },
    /// Run the verification suites and print a report.
    Verify {
        #[command(flatten)]
        size: Size,
        #[arg(long, default_value = "all", value_parser = parse_suite)]
        suite: Suite,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Edgelist,
    Json,
    Dot,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BetweennessMode {
    Formula,
    Exact,
    Compare,
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("invalid seed {s:?}: {e}"))
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

enum Failure {
    Core(Error),
    Io(io::Error),
    Usage(String),
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

type Outcome = Result<(), Failure>;

fn max_vertices() -> Result<u64, Failure> {
    match std::env::var(SIZE_CAP_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| {
            Failure::Usage(format!(
                "{SIZE_CAP_ENV} must be a positive integer, got {v:?}"
            ))
        }),
        Err(_) => Ok(DEFAULT_MAX_VERTICES),
    }
}

fn build(size: Size) -> Result<KochGraph, Failure> {
    let opts = BuildOptions {
        max_vertices: max_vertices()?,
    };
    Ok(build_with(size.m, size.t, &opts)?)
}

/// Resolves to a label without building the graph unless the input is an id.
fn resolve_label(size: Size, text: &str, graph: &mut Option<KochGraph>) -> Result<Label, Failure> {
    match VertexRef::parse(text, size.m)? {
        VertexRef::Label(l) => {
            labels::validate(size.m, size.t, &l)?;
            Ok(l)
        }
        r @ VertexRef::Id(_) => {
            if graph.is_none() {
                *graph = Some(build(size)?);
            }
            let g = graph.as_ref().expect("just built");
            Ok(g.label(r.resolve(g)?))
        }
    }
}

fn write_line(out: &mut impl Write, v: &Value) -> io::Result<()> {
    serde_json::to_writer(&mut *out, v)?;
    out.write_all(b"\n")
}

fn labels_json(ls: &[Label]) -> Value {
    Value::from(ls.iter().map(ToString::to_string).collect::<Vec<_>>())
}

fn generate(size: Size, format: Format, output: Option<PathBuf>) -> Outcome {
    let g = build(size)?;
    let mut out: Box<dyn Write> = match output {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    match format {
        Format::Edgelist => export::write_edge_list(&g, &mut out)?,
        Format::Json => export::write_json(&g, &mut out)?,
        Format::Dot => export::write_dot(&g, &mut out)?,
    }
    out.flush()?;
    Ok(())
}

fn decode(size: Size, text: &str, out: &mut impl Write) -> Outcome {
    let (m, t) = (size.m, size.t);
    let label = resolve_label(size, text, &mut None)?;
    let part = labels::neighbor_partition(m, t, &label)?;
    let father = if label.is_hub() {
        Value::Null
    } else {
        json!(labels::father(m, &label)?.to_string())
    };
    let companion = if label.is_hub() {
        Value::Null
    } else {
        json!(labels::companion(&label)?.to_string())
    };
    let v = json!({
        "label": label.to_string(),
        "subnet": label.subnet(),
        "bits": label.bits().to_string(),
        "index": label.index(),
        "birth_step": label.birth_step(),
        "degree": labels::degree_of(m, t, &label)?,
        "father": father,
        "companion": companion,
        "children": labels_json(&labels::children(m, t, &label)?),
        "neighbors": {
            "equal": labels_json(&part.equal),
            "lower": labels_json(&part.lower),
            "higher": labels_json(&part.higher),
        },
    });
    write_line(out, &v)?;
    Ok(())
}

fn route(size: Size, a: &str, b: &str, oracle: bool, out: &mut impl Write) -> Outcome {
    let mut graph = None;
    let la = resolve_label(size, a, &mut graph)?;
    let lb = resolve_label(size, b, &mut graph)?;
    let r = routing::route(size.m, size.t, &la, &lb)?;
    for hop in &r.hops {
        writeln!(out, "{hop}")?;
    }
    let mut summary = json!({ "length": r.length(), "ops": r.ops_used });
    if oracle {
        if graph.is_none() {
            graph = Some(build(size)?);
        }
        let g = graph.as_ref().expect("just built");
        let (s, x) = (g.vertex_by_label(&la)?, g.vertex_by_label(&lb)?);
        summary["oracle_length"] = json!(routing::bfs_distances(g, s).dist[x]);
    }
    write_line(out, &summary)?;
    Ok(())
}

fn stats(size: Size, seed: u64, empirical: bool, csv: bool, out: &mut impl Write) -> Outcome {
    let (m, t) = (size.m, size.t);
    let cf = analytics::closed_forms(m, t)?;
    let measured = if empirical {
        let g = build(size)?;
        let e = analytics::empirical_stats_seeded(&g, seed)?;
        let audit = if t >= 2 {
            Some(analytics::claim_audit(&g, &e)?)
        } else {
            None
        };
        Some((e, audit))
    } else {
        None
    };
    if csv {
        writeln!(
            out,
            "degree,closed_form_count,empirical_count,local_clustering"
        )?;
        for (degree, count) in analytics::degree_classes(m, t) {
            let observed = measured
                .as_ref()
                .and_then(|(e, _)| {
                    let d: usize = degree.to_string().parse().ok()?;
                    Some(e.degree_histogram.get(&d).copied().unwrap_or(0).to_string())
                })
                .unwrap_or_default();
            writeln!(out, "{degree},{count},{observed},1/{}", &degree - 1)?;
        }
        return Ok(());
    }
    let (emp, audit) = match &measured {
        Some((e, a)) => (e.to_json(), a.as_ref().map_or(Value::Null, |a| json!(a))),
        None => (Value::Null, Value::Null),
    };
    write_line(
        out,
        &json!({ "closed_form": cf.to_json(), "empirical": emp, "audit": audit }),
    )?;
    Ok(())
}

fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

fn betweenness(size: Size, mode: BetweennessMode, edges: bool, out: &mut impl Write) -> Outcome {
    let (m, t) = (size.m, size.t);
    if mode == BetweennessMode::Formula && !edges {
        // Closed forms only; labels are enumerated without building adjacency.
        writeln!(out, "label,birth,degree,exact,paper,firstorder")?;
        for l in enumerate_labels_capped(m, t, max_vertices()?)? {
            let b = l.birth_step();
            writeln!(
                out,
                "{l},{b},{},,{},{}",
                labels::degree_of(m, t, &l)?,
                fmt_f64(centrality::paper_vertex_betweenness(m, t, b)?),
                fmt_f64(centrality::firstorder_vertex_betweenness(m, t, b)?),
            )?;
        }
        return Ok(());
    }
    let g = build(size)?;
    if mode == BetweennessMode::Formula {
        writeln!(out, "u,v,class,birth,exact,paper")?;
        for (u, v) in g.edges() {
            let class = centrality::classify_edge(&g, u, v);
            let birth = g.vertex(u).birth_step.max(g.vertex(v).birth_step);
            writeln!(
                out,
                "{},{},{},{birth},,{}",
                g.label(u),
                g.label(v),
                class.as_str(),
                fmt_f64(centrality::paper_edge_betweenness(m, t, birth)?),
            )?;
        }
        return Ok(());
    }
    let report = CentralityReport::compute(&g)?;
    if edges {
        writeln!(out, "u,v,class,birth,exact,paper")?;
        for r in &report.edges {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.u_label,
                r.v_label,
                r.class.as_str(),
                r.birth,
                fmt_f64(r.exact),
                fmt_f64(r.paper)
            )?;
        }
    } else {
        writeln!(out, "label,birth,degree,exact,paper,firstorder")?;
        for r in &report.vertices {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.label,
                r.birth,
                r.degree,
                fmt_f64(r.exact),
                fmt_f64(r.paper),
                fmt_f64(r.firstorder)
            )?;
        }
    }
    if mode == BetweennessMode::Compare {
        let a = report.audit();
        write_line(
            out,
            &json!({
                "eq9_matches": a.eq9_matches,
                "eq12_matches": a.eq12_matches,
                "max_rel_gap": a.max_rel_gap,
                "gamma_hat": a.gamma_hat,
            }),
        )?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn electrical_cmd(
    size: Size,
    seed: u64,
    source: Option<&str>,
    target: Option<&str>,
    cfb: bool,
    gap: bool,
    out: &mut impl Write,
) -> Outcome {
    let g = build(size)?;
    if cfb {
        let policy = if g.num_vertices() <= electrical::CFB_EXHAUSTIVE_LIMIT {
            PairPolicy::Exhaustive
        } else {
            PairPolicy::Sampled {
                pairs: CFB_SAMPLE_PAIRS,
                seed,
            }
        };
        let flow = electrical::current_flow_betweenness(&g, policy, EndpointRule::Interior)?;
        match &flow.std_err {
            None => writeln!(out, "label,birth,cfb")?,
            Some(_) => writeln!(out, "label,birth,cfb,std_err")?,
        }
        for v in g.vertices() {
            write!(
                out,
                "{},{},{}",
                v.label,
                v.birth_step,
                fmt_f64(flow.values[v.id])
            )?;
            if let Some(se) = &flow.std_err {
                write!(out, ",{}", fmt_f64(se[v.id]))?;
            }
            writeln!(out)?;
        }
        return Ok(());
    }
    let (Some(a), Some(b)) = (source, target) else {
        return Err(Failure::Usage(
            "--source and --target are required unless --cfb is given".into(),
        ));
    };
    let s = VertexRef::parse(a, size.m)?.resolve(&g)?;
    let x = VertexRef::parse(b, size.m)?.resolve(&g)?;
    if gap {
        let vg = electrical::voltage_gap(&g, s, x)?;
        write_line(
            out,
            &json!({ "statistic": vg.statistic, "spectrum": vg.spectrum }),
        )?;
        return Ok(());
    }
    let pp = electrical::path_profile(&g, s, x)?;
    let path: Vec<Label> = pp.profile.path.iter().map(|&v| g.label(v)).collect();
    write_line(
        out,
        &json!({
            "source": g.label(s).to_string(),
            "target": g.label(x).to_string(),
            "d": pp.d,
            "R_eff": pp.profile.effective_resistance,
            "path": labels_json(&path),
            "path_voltages": pp.profile.on_path_voltages,
            "companion_voltages": pp.profile.companion_voltages,
            "support_edges": pp.profile.support_edges.len(),
            "max_offpath_current": pp.max_offpath_current,
            "thm6": pp.thm6,
            "thm7": pp.thm7,
            "thm8": pp.thm8,
        }),
    )?;
    Ok(())
}

fn verify_cmd(size: Size, seed: u64, suite: Suite, out: &mut impl Write) -> Outcome {
    let opts = VerifyOptions {
        seed,
        max_vertices: max_vertices()?,
        ..VerifyOptions::default()
    };
    let result = verify::run(size.m, size.t, suite, &opts)?;
    out.write_all(result.render().as_bytes())?;
    if result.passed() {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn dispatch(cli: Cli) -> Outcome {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(Failure::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let seed = cli.seed;
    let result = match cli.command {
        Command::Generate {
            size,
            format,
            output,
        } => return generate(size, format, output),
        Command::Decode { size, vertex } => decode(size, &vertex, &mut out),
        Command::Route { size, a, b, oracle } => route(size, &a, &b, oracle, &mut out),
        Command::Stats {
            size,
            empirical,
            csv,
        } => stats(size, seed, empirical, csv, &mut out),
        Command::Betweenness { size, mode, edges } => betweenness(size, mode, edges, &mut out),
        Command::Electrical {
            size,
            source,
            target,
            profile: _,
            cfb,
            gap,
        } => electrical_cmd(
            size,
            seed,
            source.as_deref(),
            target.as_deref(),
            cfb,
            gap,
            &mut out,
        ),
        Command::Verify { size, suite } => verify_cmd(size, seed, suite, &mut out),
    };
    out.flush()?;
    result
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(Failure::Io(e)) => {
            eprintln!("koch: io error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("koch: usage error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Core(e)) => {
            let (kind, code) = match &e {
                Error::SizeCap { .. } => ("size-cap error", 3),
                Error::Internal(_) => ("internal error", 1),
                Error::Analysis(_) => ("analysis error", 1),
                Error::Parse { .. } => ("parse error", 2),
                Error::Lookup(_) => ("lookup error", 2),
                Error::Domain { .. } => ("domain error", 2),
                Error::Argument(_) => ("argument error", 2),
            };
            eprintln!("koch: {kind}: {e}");
            ExitCode::from(code)
        }
    }
}
