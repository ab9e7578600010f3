use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use econet::community::{self, Partition};
use econet::corpus::{self, Corpus};
use econet::glossary::{self, Glossary};
use econet::graph::{Node, WeightedGraph};
use econet::netmetrics::{self, NullEnsemble};
use econet::report::{self, PeriodConfig};
use econet::richclub::{self, Mode};
use econet::simnet::{self, PermutationConfig};
use econet::termmatrix::{self, DocTermMatrix, Weighting};

#[derive(Parser)]
#[command(name = "econet", version, about = "Similarity networks of documents from glossary term counts")]
struct Cli {
    /// Result directory; also where later stages look for earlier outputs.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Glossary operations.
    Glossary {
        #[command(subcommand)]
        action: GlossaryCommand,
    },
    /// Read `<id>.txt` files and a metadata CSV into a corpus.
    Ingest(IngestArgs),
    /// Count glossary locutions per document.
    Matrix(MatrixArgs),
    /// Permutation-test the cosine similarities and keep significant edges.
    Network(NetworkArgs),
    /// Clustering and assortativity summaries with a weight-reshuffled null.
    Metrics(MetricsArgs),
    /// Community detection and pairwise ARI.
    Communities(CommunitiesArgs),
    /// Rich-club curve and core/periphery split.
    Richclub(RichclubArgs),
    /// Economic-content time series and group term tables.
    Report(ReportArgs),
}

#[derive(Subcommand)]
enum GlossaryCommand {
    /// Merge glossary sources (TSV or JSON) into one glossary.
    Build {
        /// Source files; repeat for several.
        #[arg(long = "source", required = true)]
        sources: Vec<PathBuf>,
    },
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long)]
    corpus_dir: PathBuf,
    /// CSV with header `id,date,speaker,category`.
    #[arg(long)]
    metadata: PathBuf,
    /// Text after the first occurrence of this marker is discarded.
    #[arg(long)]
    cut_marker: Option<String>,
}

#[derive(Args)]
struct MatrixArgs {
    /// Defaults to `<out>/corpus.json`.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Glossary source or built glossary; defaults to `<out>/glossary.json`.
    #[arg(long)]
    glossary: Option<PathBuf>,
}

#[derive(Args)]
struct NetworkArgs {
    /// Defaults to `<out>/matrix.csv`.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Defaults to `<out>/corpus.json`; supplies node metadata when present.
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long, default_value_t = 0.001)]
    alpha: f64,
    #[arg(long, default_value_t = 1000)]
    permutations: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Threshold each edge at alpha instead of alpha / C(n,2).
    #[arg(long)]
    no_bonferroni: bool,
    /// Use (count + 1) / (n_perm + 1) as the p-value.
    #[arg(long)]
    pvalue_smoothing: bool,
    /// Row weighting fed to the cosine: abs or rel.
    #[arg(long, default_value = "abs")]
    weighting: String,
    /// Worker threads for the permutation test; defaults to all cores.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct MetricsArgs {
    /// Number of weight-reshuffled networks for the clustering null.
    #[arg(long, default_value_t = 100)]
    ensemble: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 30)]
    bins: usize,
}

#[derive(Args)]
struct CommunitiesArgs {
    /// Comma-separated list of louvain, lp, greedy.
    #[arg(long, default_value = "louvain,lp,greedy", value_delimiter = ',')]
    methods: Vec<String>,
    /// External partition CSV `node_id,community_id`, optionally `label=path`.
    #[arg(long = "import")]
    imports: Vec<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Ignore edge weights.
    #[arg(long)]
    binary: bool,
}

#[derive(Args)]
struct RichclubArgs {
    #[arg(long, default_value = "rank")]
    mode: String,
    #[arg(long, default_value_t = 100)]
    ensemble: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Strength-rank cut for the core; defaults to the detected regime start
    /// in rank mode.
    #[arg(long)]
    club_cut: Option<usize>,
    /// Fraction of points above 1 required after the regime start.
    #[arg(long, default_value_t = richclub::DEFAULT_SUSTAIN)]
    sustain: f64,
}

#[derive(Args)]
struct ReportArgs {
    /// CSV `start,end,label`; without it every document is `normal`.
    #[arg(long)]
    periods: Option<PathBuf>,
    /// Share of the most frequent terms removed from the second pair of
    /// group tables.
    #[arg(long, default_value_t = report::DEFAULT_CUTOFF)]
    cutoff: f64,
    /// Defaults to `<out>/corpus.json`.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Defaults to `<out>/matrix.csv`.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Defaults to `<out>/membership.csv`.
    #[arg(long)]
    membership: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let validation = err
                .chain()
                .filter_map(|e| e.downcast_ref::<econet::Error>())
                .any(|e| !matches!(e, econet::Error::Io(_)));
            ExitCode::from(if validation { 2 } else { 1 })
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
    let out = cli.out.as_path();
    match cli.command {
        Command::Glossary {
            action: GlossaryCommand::Build { sources },
        } => glossary_build(out, &sources),
        Command::Ingest(a) => ingest(out, a),
        Command::Matrix(a) => matrix(out, a),
        Command::Network(a) => network(out, a),
        Command::Metrics(a) => metrics(out, a),
        Command::Communities(a) => communities(out, a),
        Command::Richclub(a) => rich_club(out, a),
        Command::Report(a) => report_cmd(out, a),
    }
}

fn input(given: Option<PathBuf>, out: &Path, default: &str) -> PathBuf {
    given.unwrap_or_else(|| out.join(default))
}

fn write_json(path: &Path, value: &serde_json::Value) -> anyhow::Result<()> {
    fs::write(path, serde_json::to_vec_pretty(value)?).with_context(|| format!("writing {}", path.display()))
}

fn load_graph(out: &Path) -> anyhow::Result<WeightedGraph> {
    let (e, n) = (out.join("edges.csv"), out.join("nodes.csv"));
    WeightedGraph::load(&e, &n).with_context(|| format!("loading network from {}", out.display()))
}

fn load_glossary(path: &Path) -> anyhow::Result<Glossary> {
    let entries = glossary::load_entries(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Glossary::from_entries(&entries)?)
}

fn glossary_build(out: &Path, sources: &[PathBuf]) -> anyhow::Result<()> {
    let mut entries = Vec::new();
    for s in sources {
        entries.extend(glossary::load_entries(s).with_context(|| format!("reading {}", s.display()))?);
    }
    let g = Glossary::from_entries(&entries)?;
    glossary::save_json(&g, &out.join("glossary.json"))?;
    let surface: usize = g.locutions().iter().map(|l| l.match_keys().len()).sum();
    println!("glossary: {} locutions, {} surface forms", g.len(), surface);
    Ok(())
}

fn ingest(out: &Path, a: IngestArgs) -> anyhow::Result<()> {
    let (corpus, report) = corpus::ingest(&a.corpus_dir, &a.metadata, a.cut_marker.as_deref())?;
    corpus.save_json(&out.join("corpus.json"))?;
    write_json(
        &out.join("ingest_report.json"),
        &json!({ "documents": report.documents, "empty_documents": report.empty_documents }),
    )?;
    println!("ingested {} documents", report.documents);
    if !report.empty_documents.is_empty() {
        eprintln!("warning: {} documents are empty: {}", report.empty_documents.len(), report.empty_documents.join(", "));
    }
    Ok(())
}

fn matrix(out: &Path, a: MatrixArgs) -> anyhow::Result<()> {
    let corpus = Corpus::load_json(&input(a.corpus, out, "corpus.json"))?;
    let glossary = load_glossary(&input(a.glossary, out, "glossary.json"))?;
    let m = termmatrix::build_matrix(&corpus, &glossary)?;
    m.save(&out.join("matrix.csv"))?;
    println!("matrix: {} documents x {} terms", m.rows(), m.cols());
    if !m.removed_docs.is_empty() {
        eprintln!("removed {} documents without occurrences: {}", m.removed_docs.len(), m.removed_docs.join(", "));
    }
    Ok(())
}

fn nodes_for(m: &DocTermMatrix, corpus: Option<&Corpus>) -> Vec<Node> {
    m.doc_ids
        .iter()
        .map(|id| match corpus.and_then(|c| c.documents.iter().find(|d| &d.id == id)) {
            Some(d) => Node {
                id: id.clone(),
                date: Some(d.date),
                speaker: d.speaker.clone(),
                category: d.category.clone(),
            },
            None => Node::bare(id.clone()),
        })
        .collect()
}

fn network(out: &Path, a: NetworkArgs) -> anyhow::Result<()> {
    let m = DocTermMatrix::load(&input(a.matrix, out, "matrix.csv"))?;
    let corpus_path = input(a.corpus, out, "corpus.json");
    let corpus = if corpus_path.exists() {
        Some(Corpus::load_json(&corpus_path)?)
    } else {
        None
    };
    let weighting = match a.weighting.as_str() {
        "abs" => Weighting::Absolute,
        "rel" => Weighting::Relative,
        other => return Err(econet::Error::InvalidArgument(format!("unknown weighting {other:?}")).into()),
    };
    let rows = m.vectors(weighting);
    let n = rows.len();
    let tau = simnet::edge_threshold(a.alpha, n, !a.no_bonferroni)?;
    let config = PermutationConfig {
        n_perm: a.permutations,
        seed: a.seed,
        smoothing: a.pvalue_smoothing,
        workers: a.workers,
    };
    let w = simnet::similarity_matrix(&rows)?;
    let p = simnet::permutation_pvalues(&rows, &config)?;
    let full = simnet::filter_network(&w, &p, tau, nodes_for(&m, corpus.as_ref()))?;
    let density_before = simnet::density(&full)?;
    let g = simnet::largest_component(&full)?;
    let dropped: Vec<&str> = {
        let kept: std::collections::HashSet<&str> = g.nodes().iter().map(|n| n.id.as_str()).collect();
        full.nodes().iter().map(|n| n.id.as_str()).filter(|id| !kept.contains(id)).collect()
    };
    let density_after = if g.node_count() >= 2 { Some(simnet::density(&g)?) } else { None };
    g.save(&out.join("edges.csv"), &out.join("nodes.csv"))?;
    let resolution = 1.0 / a.permutations as f64;
    if !a.pvalue_smoothing && tau < resolution {
        eprintln!(
            "note: threshold {tau:.3e} is below the test resolution {resolution:.1e}; only pairs with zero exceedances survive"
        );
    }
    write_json(
        &out.join("network.json"),
        &json!({
            "tested_pairs": simnet::pair_count(n),
            "alpha": a.alpha,
            "bonferroni": !a.no_bonferroni,
            "tau": tau,
            "permutations": a.permutations,
            "seed": a.seed,
            "pvalue_smoothing": a.pvalue_smoothing,
            "nodes_before_component": full.node_count(),
            "edges_before_component": full.edge_count(),
            "density_before_component": density_before,
            "nodes": g.node_count(),
            "edges": g.edge_count(),
            "density": density_after,
            "dropped_nodes": dropped,
        }),
    )?;
    println!(
        "network: n = {}, m = {}, density = {:.4} (before component extraction: n = {}, density = {:.4})",
        g.node_count(),
        g.edge_count(),
        density_after.unwrap_or(0.0),
        full.node_count(),
        density_before
    );
    Ok(())
}

fn save_series(path: &Path, header: [&str; 2], rows: impl IntoIterator<Item = (f64, f64)>) -> anyhow::Result<()> {
    let mut text = format!("{},{}\n", header[0], header[1]);
    for (a, b) in rows {
        text.push_str(&format!("{a:?},{b:?}\n"));
    }
    fs::write(path, text)?;
    Ok(())
}

fn save_histogram(path: &Path, h: &netmetrics::Histogram) -> anyhow::Result<()> {
    let mut text = String::from("lower,upper,count\n");
    for (b, c) in h.counts.iter().enumerate() {
        text.push_str(&format!("{:?},{:?},{}\n", h.edges[b], h.edges[b + 1], c));
    }
    fs::write(path, text)?;
    Ok(())
}

fn metrics(out: &Path, a: MetricsArgs) -> anyhow::Result<()> {
    let g = load_graph(out)?;
    let stats = netmetrics::node_stats(&g);
    {
        let mut text = String::from("id,degree,strength,clustering,clustering_unweighted\n");
        let cell = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_default();
        for s in &stats {
            text.push_str(&format!(
                "{},{},{:?},{},{}\n",
                s.id,
                s.degree,
                s.strength,
                cell(s.clustering),
                cell(s.clustering_unweighted)
            ));
        }
        fs::write(out.join("node_stats.csv"), text)?;
    }
    let cnull = netmetrics::clustering_null(&g, &NullEnsemble::new(a.ensemble, a.seed))?;
    save_series(&out.join("ccdf_clustering.csv"), ["value", "exceed"], cnull.actual.values.iter().copied().zip(cnull.actual.exceed.iter().copied()))?;
    save_series(
        &out.join("ccdf_clustering_null.csv"),
        ["value", "exceed"],
        cnull.null_pooled.values.iter().copied().zip(cnull.null_pooled.exceed.iter().copied()),
    )?;

    let degrees: Vec<f64> = g.degrees().into_iter().map(|k| k as f64).collect();
    let strengths = g.strengths();
    let dates: Option<Vec<f64>> = g
        .nodes()
        .iter()
        .map(|n| n.date.map(corpus::day_number))
        .collect();
    let categories: Vec<&str> = g.nodes().iter().map(|n| n.category.as_str()).collect();
    let speakers: Vec<&str> = g.nodes().iter().map(|n| n.speaker.as_str()).collect();
    if g.node_count() > 0 {
        save_histogram(&out.join("hist_degree.csv"), &netmetrics::histogram(&degrees, a.bins)?)?;
        save_histogram(&out.join("hist_strength.csv"), &netmetrics::histogram(&strengths, a.bins)?)?;
        if let Some(d) = &dates {
            save_histogram(&out.join("hist_date.csv"), &netmetrics::histogram(d, a.bins)?)?;
        }
    }
    let r_date = match &dates {
        Some(d) => netmetrics::assortativity_scalar(&g, d)?,
        None => None,
    };
    let summary = json!({
        "nodes": g.node_count(),
        "edges": g.edge_count(),
        "density": if g.node_count() >= 2 { Some(simnet::density(&g)?) } else { None },
        "global_clustering": netmetrics::global_clustering(&g),
        "mean_local_clustering": netmetrics::mean_defined(stats.iter().map(|s| s.clustering)),
        "mean_local_clustering_unweighted": netmetrics::mean_defined(stats.iter().map(|s| s.clustering_unweighted)),
        "null_mean_local_clustering": cnull.null_mean,
        "null_instances": a.ensemble,
        "seed": a.seed,
        "assortativity": {
            "degree": netmetrics::assortativity_scalar(&g, &degrees)?,
            "strength": netmetrics::assortativity_scalar(&g, &strengths)?,
            "date": r_date,
            "category": netmetrics::assortativity_categorical(&g, &categories)?,
            "speaker": netmetrics::assortativity_categorical(&g, &speakers)?,
        },
        "dip": {
            "degree": netmetrics::dip_statistic(&degrees),
            "strength": netmetrics::dip_statistic(&strengths),
        },
    });
    write_json(&out.join("metrics.json"), &summary)?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

fn communities(out: &Path, a: CommunitiesArgs) -> anyhow::Result<()> {
    let g = load_graph(out)?;
    if g.node_count() >= 2 {
        if let Some(w) = community::density_warning(simnet::density(&g)?) {
            eprintln!("warning: {w}");
        }
    }
    let mut partitions = Vec::new();
    for method in &a.methods {
        let p = match method.trim() {
            "louvain" => community::louvain(&g, a.seed, a.binary),
            "lp" | "label_propagation" => community::label_propagation(&g, a.seed, a.binary),
            "greedy" | "fg" => community::greedy_modularity(&g, a.binary),
            "" => continue,
            other => return Err(econet::Error::InvalidArgument(format!("unknown method {other:?}")).into()),
        };
        p.validate(&g)?;
        partitions.push(p);
    }
    for spec in &a.imports {
        let (label, path) = match spec.split_once('=') {
            Some((l, p)) => (l.to_string(), PathBuf::from(p)),
            None => {
                let p = PathBuf::from(spec);
                let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or("imported").to_string();
                (stem, p)
            }
        };
        partitions.push(Partition::load(&g, &path, label)?);
    }
    if partitions.is_empty() {
        bail!(econet::Error::InvalidArgument("no partitions requested".into()));
    }
    let mut summary = Vec::new();
    for p in &partitions {
        p.save(&g, &out.join(format!("partition_{}.csv", p.method)))?;
        summary.push(json!({
            "method": p.method,
            "communities": p.community_count(),
            "modularity": community::modularity(&g, p)?,
            "weighted_modularity": community::weighted_modularity(&g, p)?,
        }));
    }
    if partitions.len() >= 2 {
        let m = community::ari_matrix(&partitions)?;
        let mut text = String::from("method");
        for p in &partitions {
            text.push(',');
            text.push_str(&p.method);
        }
        text.push('\n');
        for (p, row) in partitions.iter().zip(&m) {
            text.push_str(&p.method);
            for v in row {
                text.push_str(&format!(",{v:?}"));
            }
            text.push('\n');
        }
        fs::write(out.join("ari.csv"), &text)?;
        print!("{text}");
    }
    write_json(&out.join("communities.json"), &json!({ "binary": a.binary, "seed": a.seed, "partitions": summary }))?;
    Ok(())
}

fn rich_club(out: &Path, a: RichclubArgs) -> anyhow::Result<()> {
    let g = load_graph(out)?;
    let mode: Mode = a.mode.parse()?;
    if !(0.0..=1.0).contains(&a.sustain) {
        bail!(econet::Error::InvalidArgument(format!("sustain must be in [0, 1], got {}", a.sustain)));
    }
    let mut curve = richclub::normalized_curve(&g, mode, &NullEnsemble::new(a.ensemble, a.seed))?;
    curve.regime_start = richclub::detect_regime(&curve, a.sustain);
    curve.save(&out.join(format!("richclub_{mode}.csv")))?;
    let cut = match (a.club_cut, mode, curve.regime_start) {
        (Some(c), _, _) => Some(c),
        (None, Mode::Rank, Some(p)) => Some(p as usize),
        _ => None,
    };
    let membership = richclub::core_periphery_split(&g, cut)?;
    membership.save(&out.join("membership.csv"))?;
    let composition: serde_json::Map<String, serde_json::Value> = membership
        .composition
        .iter()
        .map(|(k, (c, p))| (k.clone(), json!({ "core": c, "periphery": p })))
        .collect();
    let summary = json!({
        "mode": mode.to_string(),
        "ensemble": a.ensemble,
        "seed": a.seed,
        "sustain": a.sustain,
        "regime_start": curve.regime_start,
        "club_cut": membership.cut,
        "core_size": membership.core_size(),
        "periphery_size": membership.periphery_size(),
        "composition": composition,
    });
    write_json(&out.join("richclub.json"), &summary)?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

fn load_membership(path: &Path) -> anyhow::Result<richclub::CoreMembership> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut m = richclub::CoreMembership {
        cut: 0,
        ids: Vec::new(),
        ranks: Vec::new(),
        in_core: Vec::new(),
        composition: Default::default(),
    };
    for (line, row) in text.lines().enumerate().skip(1) {
        let f: Vec<&str> = row.split(',').collect();
        let bad = || econet::Error::Parse {
            path: path.to_path_buf(),
            message: format!("line {}: expected node_id,rank,in_core", line + 1),
        };
        if f.len() != 3 {
            return Err(bad().into());
        }
        m.ids.push(f[0].to_string());
        m.ranks.push(f[1].trim().parse().map_err(|_| bad())?);
        m.in_core.push(f[2].trim().parse().map_err(|_| bad())?);
    }
    Ok(m)
}

fn report_cmd(out: &Path, a: ReportArgs) -> anyhow::Result<()> {
    let corpus = Corpus::load_json(&input(a.corpus, out, "corpus.json"))?;
    let m = DocTermMatrix::load(&input(a.matrix, out, "matrix.csv"))?;
    let periods = match &a.periods {
        Some(p) => PeriodConfig::load(p)?,
        None => PeriodConfig::default(),
    };
    let rows = report::content_timeseries(&corpus, &m, &periods)?;
    report::save_timeseries(&rows, &out.join("timeseries.csv"))?;
    let means: serde_json::Map<String, serde_json::Value> = report::mean_by_label(&rows)
        .into_iter()
        .map(|(l, v)| (l.to_string(), json!(v)))
        .collect();

    let membership = load_membership(&input(a.membership, out, "membership.csv"))?;
    let (core, periphery) = report::group_terms(&m, &membership, None)?;
    core.save(&out.join("terms_core.csv"))?;
    periphery.save(&out.join("terms_periphery.csv"))?;
    let (core_cut, periphery_cut) = report::group_terms(&m, &membership, Some(a.cutoff))?;
    core_cut.save(&out.join("terms_core_cutoff.csv"))?;
    periphery_cut.save(&out.join("terms_periphery_cutoff.csv"))?;
    let removed = report::high_frequency_terms(&m, a.cutoff)?;
    let summary = json!({
        "documents": rows.len(),
        "mean_score_by_period": means,
        "cutoff": a.cutoff,
        "cutoff_terms": removed,
        "core_terms": core.terms.len(),
        "periphery_terms": periphery.terms.len(),
    });
    write_json(&out.join("report.json"), &summary)?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}
