//! `bsk`: load and validate graph-of-groups files, apply moves and folds,
//! run hierarchies and sandbox sweeps, and emit DOT and TSV reports.
//!
//! Exit codes: 0 success, 1 domain error (the module error is printed
//! verbatim), 2 usage error.

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use bsk_core::cayley;
use bsk_core::folds::{self, FoldKind, FoldMove};
use bsk_core::gog::{io as gogio, moves, EdgeId, GraphOfGroups, VertexId};
use bsk_core::groups::catalog::Catalog;
use bsk_core::groups::{self, GroupKind};
use bsk_core::hierarchy;
use bsk_core::sandbox;
use bsk_core::words::Word;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
    Tsv,
}

#[derive(Parser)]
#[command(name = "bsk", version, about = "graph-of-groups toolkit", disable_help_subcommand = true)]
struct Cli {
    /// Treat indeterminate statuses as failures.
    #[arg(long, global = true)]
    strict: bool,
    /// Seed for generated corpora.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a graph-of-groups file.
    Validate {
        #[arg(long)]
        input: String,
    },
    /// Print the fundamental-group presentation and abelian invariants.
    Presentation {
        #[arg(long)]
        input: String,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Apply an elementary move (subdivide, collapse, reduce).
    Move {
        #[arg(long)]
        input: String,
        #[arg(long)]
        op: String,
        #[arg(long)]
        edge: Option<String>,
        #[arg(long)]
        output: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Apply a fold move.
    Fold {
        #[arg(long)]
        input: String,
        #[arg(long)]
        kind: String,
        #[arg(long)]
        vertex: String,
        #[arg(long)]
        e: String,
        #[arg(long)]
        f: String,
        /// word for the identifying element g (IIA) or stable letter (IIIA)
        #[arg(long)]
        g: Option<String>,
        #[arg(long)]
        output: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Push a refinement forward through a fold (scenario file).
    Pushforward {
        /// JSON file: { graph, splitting, move }
        #[arg(long)]
        input: String,
    },
    /// Run the alternating hierarchy on a catalog group.
    Hierarchy {
        #[arg(long)]
        group: String,
        #[arg(long, default_value_t = 32)]
        depth: usize,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Build a refinement chain (bs or descending).
    Chain {
        #[arg(long)]
        kind: String,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Run the exhaustive finite-action sweep.
    SandboxSweep {
        #[arg(long, default_value_t = 12)]
        max_order: usize,
        #[arg(long, default_value_t = 8)]
        max_vertices: usize,
    },
    /// Estimate the number of ends of a catalog group.
    Ends {
        #[arg(long)]
        group: String,
        #[arg(long, default_value_t = 6)]
        radius: usize,
    },
    /// Translation length estimate for a word.
    Tau {
        #[arg(long)]
        group: String,
        #[arg(long)]
        word: String,
        #[arg(long, default_value_t = 8)]
        n: u32,
    },
    /// Commensurizer sample of a cyclic subgroup in a ball.
    Comm {
        #[arg(long)]
        group: String,
        /// generator words of the subgroup, comma separated
        #[arg(long)]
        sub: String,
        #[arg(long, default_value_t = 4)]
        radius: usize,
    },
    /// Two-ended structure classification of a catalog group.
    Classify {
        #[arg(long)]
        group: String,
    },
    /// DOT export of a graph-of-groups file.
    Dot {
        #[arg(long)]
        input: String,
    },
    /// Generate a seeded corpus of catalog-labeled graphs and check move
    /// invariance on it.
    Corpus {
        #[arg(long, default_value_t = 25)]
        count: usize,
    },
}

fn catalog() -> anyhow::Result<Catalog> {
    match std::env::var("BSK_CATALOG") {
        Ok(path) => {
            let text = std::fs::read_to_string(&path)?;
            Ok(Catalog::from_json(&text)?)
        }
        Err(_) => Ok(Catalog::default_catalog()),
    }
}

fn load_graph(path: &str) -> anyhow::Result<GraphOfGroups> {
    let text = std::fs::read_to_string(path)?;
    Ok(gogio::from_json(&text)?)
}

fn emit(out: &Option<String>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            let mut f = std::fs::File::create(path)?;
            f.write_all(text.as_bytes())?;
        }
        None => print!("{}", text),
    }
    Ok(())
}

fn graph_text(g: &GraphOfGroups, format: Format) -> String {
    match format {
        Format::Dot => g.to_dot(),
        _ => gogio::to_json(g) + "\n",
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Validate { input } => {
            let g = load_graph(&input)?;
            let report = g.validate()?;
            println!("ok: {} vertices, {} edges", g.vertices.len(), g.edges.len());
            for (e, st) in report.injectivity {
                println!("edge {}\tinjectivity {:?}/{:?}", e, st[0], st[1]);
            }
        }
        Command::Presentation { input, format } => {
            let g = load_graph(&input)?;
            let p = g.presentation()?;
            let inv = groups::abelian::abelianization(&p)?;
            match format {
                Format::Tsv => {
                    println!("generators\t{}", p.gens.join(","));
                    for r in &p.relators {
                        println!("relator\t{}", r.render(&p.gens));
                    }
                    println!("abelianization\t{}", inv.render());
                }
                _ => {
                    let doc = serde_json::json!({
                        "schema": "bsk-presentation-v1",
                        "generators": p.gens,
                        "relators": p.relators.iter().map(|r| r.render(&p.gens)).collect::<Vec<_>>(),
                        "abelianization": { "rank": inv.rank, "torsion": inv.torsion },
                    });
                    println!("{}", serde_json::to_string_pretty(&doc)?);
                }
            }
        }
        Command::Move { input, op, edge, output, format } => {
            let g = load_graph(&input)?;
            let result = match op.as_str() {
                "subdivide" => {
                    let e = edge.ok_or_else(|| anyhow::anyhow!("--edge required"))?;
                    moves::subdivide_edge(&g, &EdgeId(e))?
                }
                "collapse" => {
                    let e = edge.ok_or_else(|| anyhow::anyhow!("--edge required"))?;
                    moves::collapse_edge(&g, &EdgeId(e))?
                }
                "reduce" => moves::reduce_to_minimal(&g)?,
                "extract" => {
                    let e = edge.ok_or_else(|| anyhow::anyhow!("--edge required"))?;
                    moves::extract_edge_splitting(&g, &EdgeId(e))?
                }
                other => {
                    anyhow::bail!("unknown move `{}` (subdivide, collapse, reduce, extract)", other)
                }
            };
            emit(&output, &graph_text(&result, format))?;
        }
        Command::Fold { input, kind, vertex, e, f, g, output, format } => {
            let graph = load_graph(&input)?;
            let kind = match kind.as_str() {
                "IA" => FoldKind::IA,
                "IIA" => FoldKind::IIA,
                "IIIA" => FoldKind::IIIA,
                other => anyhow::bail!("unknown fold kind `{}`", other),
            };
            let mv = FoldMove {
                kind,
                v: VertexId(vertex),
                e: EdgeId(e),
                f: EdgeId(f),
                g_elem: None,
                g_name: g,
                site: None,
            };
            let res = folds::apply_fold(&graph, &mv)?;
            for (old, new) in &res.relabeling {
                eprintln!("relabel {} -> {}", old, new);
            }
            emit(&output, &graph_text(&res.graph, format))?;
        }
        Command::Pushforward { input } => {
            let text = std::fs::read_to_string(&input)?;
            let doc: serde_json::Value = serde_json::from_str(&text)?;
            let g = gogio::from_json(&serde_json::to_string(&doc["graph"])?)?;
            let mv_json: folds::FoldMoveJson = serde_json::from_value(doc["move"].clone())?;
            let mv = FoldMove::from_json(&mv_json);
            let s = parse_splitting(&g, &doc["splitting"])?;
            let out = folds::pushforward_refinement(&g, &s, &mv)?;
            let edge = out.the_edge()?;
            println!(
                "pushforward ok: target {}, edge group {}",
                out.target, edge.1.group.id
            );
        }
        Command::Hierarchy { group, depth, format } => {
            let cat = catalog()?;
            let h = cat.get(&group)?;
            let state = hierarchy::run_alternating(hierarchy::record_for(h), depth)?;
            match format {
                Format::Dot => print!("{}", state.provenance_dot()),
                _ => println!("{}", serde_json::to_string_pretty(&state.report())?),
            }
        }
        Command::Chain { kind, n, format } => {
            let report = match kind.as_str() {
                "bs" => hierarchy::bs_chain(n)?,
                "descending" => hierarchy::descending_chain(n)?,
                other => anyhow::bail!("unknown chain kind `{}` (bs, descending)", other),
            };
            let last = report.graphs.last().unwrap();
            match format {
                Format::Dot => print!("{}", last.to_dot()),
                Format::Tsv => {
                    for s in &report.steps {
                        println!(
                            "step {}\tcollapsed {}\tstructure {}\tproper {:?}\tcontainment {}",
                            s.n,
                            s.collapsed_edge,
                            s.structure_ok,
                            s.proper,
                            s.containment_certified
                        );
                    }
                }
                Format::Json => {
                    let doc = serde_json::json!({
                        "schema": "bsk-chain-v1",
                        "kind": kind,
                        "n": n,
                        "graph": serde_json::from_str::<serde_json::Value>(&gogio::to_json(last))?,
                        "steps": report.steps.iter().map(|s| serde_json::json!({
                            "n": s.n,
                            "collapsed_edge": s.collapsed_edge.0,
                            "structure_ok": s.structure_ok,
                            "proper": format!("{:?}", s.proper),
                            "containment_certified": s.containment_certified,
                        })).collect::<Vec<_>>(),
                        "terminated": report.terminated,
                    });
                    println!("{}", serde_json::to_string_pretty(&doc)?);
                }
            }
            if cli.strict {
                for s in &report.steps {
                    if !s.containment_certified || !s.structure_ok {
                        anyhow::bail!("chain step {} failed certification", s.n);
                    }
                }
            }
        }
        Command::SandboxSweep { max_order, max_vertices } => {
            let cat = catalog()?;
            let handles = cat.finite_handles(max_order);
            let groups: Vec<&groups::finite::FiniteGroup> = handles
                .iter()
                .filter_map(|h| match &h.kind {
                    GroupKind::Finite(fg) => Some(fg),
                    _ => None,
                })
                .collect();
            let report = sandbox::sweep(&groups, max_vertices)?;
            print!("{}", report.render());
            if report.fold_mismatches > 0 || report.orbit_failures > 0 {
                anyhow::bail!(
                    "sweep failures: {} fold mismatches, {} orbit failures",
                    report.fold_mismatches,
                    report.orbit_failures
                );
            }
        }
        Command::Ends { group, radius } => {
            let cat = catalog()?;
            let h = cat.get(&group)?;
            let est = cayley::ends_count(h, radius)?;
            print!("{}", cayley::ends_table(&est));
            if cli.strict && est.value == cayley::EndsValue::Indeterminate {
                anyhow::bail!("ends classification indeterminate at radius {}", radius);
            }
        }
        Command::Tau { group, word, n } => {
            let cat = catalog()?;
            let h = cat.get(&group)?;
            let w = Word::parse(&word, &h.gen_names())?;
            let tau = cayley::translation_length(h, &w, n)?;
            println!(
                "tau({})\t{}/{}\t~{:.4}\texact={}",
                word,
                tau.numerator,
                tau.denominator,
                tau.as_f64(),
                tau.exact
            );
        }
        Command::Comm { group, sub, radius } => {
            let cat = catalog()?;
            let h = cat.get(&group)?;
            let names = h.gen_names();
            let gens: Vec<Word> = sub
                .split(',')
                .map(|t| Word::parse(t.trim(), &names))
                .collect::<Result<_, _>>()?;
            let desc = groups::generated_subgroup(h, &gens)?;
            let sample = cayley::commensurizer_sample(h, &desc, radius)?;
            for w in sample {
                println!("{}", w.render(&names));
            }
        }
        Command::Classify { group } => {
            let cat = catalog()?;
            let h = cat.get(&group)?;
            let t = cayley::classify_two_ended(h)?;
            println!("group\t{}", group);
            println!("finite_radical_order\t{}", t.radical_order);
            println!("quotient\t{:?}", t.quotient);
            println!("H1\t{}", t.h1.render());
            println!("radical_unique_maximal\t{}", t.radical_is_unique_maximal);
        }
        Command::Dot { input } => {
            let g = load_graph(&input)?;
            print!("{}", g.to_dot());
        }
        Command::Corpus { count } => {
            let cat = catalog()?;
            let report = bsk_core::corpus::run_corpus(&cat, cli.seed, count)?;
            println!(
                "graphs={} checks={} mismatches={}",
                report.graphs, report.checks, report.mismatches
            );
            if report.mismatches > 0 {
                anyhow::bail!("{} move-invariance mismatches", report.mismatches);
            }
        }
    }
    Ok(())
}

fn parse_splitting(
    g: &GraphOfGroups,
    doc: &serde_json::Value,
) -> anyhow::Result<moves::SplittingSpec> {
    let target = VertexId(
        doc["target"]
            .as_str()
            .ok_or_else(|| anyhow::anyhow!("splitting.target missing"))?
            .to_string(),
    );
    let sgraph = gogio::from_json(&serde_json::to_string(&doc["graph"])?)?;
    let vd = g.vertex(&target)?;
    let names = vd.group.gen_names();
    let mut embeddings = std::collections::BTreeMap::new();
    for (vtx, words) in doc["embeddings"]
        .as_object()
        .ok_or_else(|| anyhow::anyhow!("splitting.embeddings missing"))?
    {
        let mut ws = Vec::new();
        for w in words.as_array().ok_or_else(|| anyhow::anyhow!("embedding list"))? {
            ws.push(Word::parse(
                w.as_str().ok_or_else(|| anyhow::anyhow!("embedding word"))?,
                &names,
            )?);
        }
        embeddings.insert(VertexId(vtx.clone()), ws);
    }
    let mut edge_embedding = Vec::new();
    if let Some(arr) = doc["edge_embedding"].as_array() {
        for w in arr {
            edge_embedding.push(Word::parse(
                w.as_str().ok_or_else(|| anyhow::anyhow!("edge embedding word"))?,
                &names,
            )?);
        }
    }
    Ok(moves::SplittingSpec { target, graph: sgraph, embeddings, edge_embedding })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // clap prints help/usage itself; usage problems exit 2
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(2),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(1)
        }
    }
}

