use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use listcomm::pipeline::{self, ConfigOverrides, CorpusInputs, PipelineConfig};
use listcomm::synth::{synth, PlantedSpec};
use listcomm::Result;

#[derive(Parser)]
#[command(name = "listcomm", version, about = "Ensemble overlapping communities from list co-membership data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the significance-weighted list graph.
    BuildGraph(StageArgs),
    /// Run the base detections and write the consensus matrix.
    Ensemble(StageArgs),
    /// Detect consensus communities on the thresholded consensus matrix.
    Consensus(StageArgs),
    /// Score and rank consensus communities.
    Stability(StageArgs),
    /// Label consensus communities from list text.
    Label(StageArgs),
    /// Derive weighted member communities.
    Members(StageArgs),
    /// Evaluate member communities against ground truth.
    Evaluate(StageArgs),
    /// Run every stage.
    Pipeline(StageArgs),
    /// Generate a planted benchmark corpus.
    Synth(SynthArgs),
}

#[derive(Args)]
struct StageArgs {
    /// Output directory holding all artifacts.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    memberships: Option<PathBuf>,
    #[arg(long)]
    lists: Option<PathBuf>,
    #[arg(long)]
    ground_truth: Option<PathBuf>,
    /// Core user ids, one per line.
    #[arg(long)]
    core: Option<PathBuf>,
    /// Stopword list, one lowercase term per line.
    #[arg(long)]
    stopwords: Option<PathBuf>,
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Args)]
struct ParamArgs {
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    top_k: Option<usize>,
    #[arg(long)]
    draws: Option<usize>,
    #[arg(long)]
    fast_iterations: Option<usize>,
    #[arg(long)]
    thorough_iterations: Option<usize>,
    #[arg(long)]
    overlap_threshold: Option<f64>,
    /// Repeat the consensus step until the communities stop changing.
    #[arg(long)]
    iterate: bool,
    /// Match categories to communities one-to-one.
    #[arg(long)]
    unique_match: bool,
    #[arg(long)]
    min_list_size: Option<usize>,
    #[arg(long)]
    min_core_members: Option<usize>,
}

impl ParamArgs {
    fn overrides(&self) -> ConfigOverrides {
        ConfigOverrides {
            rho: self.rho,
            runs: self.runs,
            tau: self.tau,
            mu: self.mu,
            master_seed: self.seed,
            workers: self.workers,
            top_k: self.top_k,
            draws: self.draws,
            fast_iterations: self.fast_iterations,
            thorough_iterations: self.thorough_iterations,
            overlap_threshold: self.overlap_threshold,
            iterate: self.iterate.then_some(true),
            unique_match: self.unique_match.then_some(true),
            min_list_size: self.min_list_size,
            min_core_members: self.min_core_members,
        }
    }
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 8)]
    groups: usize,
    #[arg(long, default_value_t = 25)]
    users_per_group: usize,
    #[arg(long, default_value_t = 40)]
    lists_per_group: usize,
    #[arg(long, default_value_t = 5)]
    min_list_size: usize,
    #[arg(long, default_value_t = 15)]
    max_list_size: usize,
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    #[arg(long, default_value_t = 0.1)]
    overlap: f64,
    /// Zipf exponent of user popularity within a group; 0 is uniform.
    #[arg(long, default_value_t = 1.0)]
    popularity: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

impl StageArgs {
    fn config(&self) -> Result<PipelineConfig> {
        PipelineConfig::resolve(self.config.as_deref(), &self.params.overrides())
    }

    fn inputs(&self) -> Result<CorpusInputs> {
        let missing = |flag: &str| listcomm::Error::Validation(format!("--{flag} is required for this stage"));
        Ok(CorpusInputs {
            memberships: self.memberships.clone().ok_or_else(|| missing("memberships"))?,
            lists: self.lists.clone().ok_or_else(|| missing("lists"))?,
            core: self.core.clone(),
            stopwords: self.stopwords.clone(),
            ground_truth: self.ground_truth.clone(),
        })
    }

    fn truth_inputs(&self) -> CorpusInputs {
        CorpusInputs {
            core: self.core.clone(),
            ground_truth: self.ground_truth.clone(),
            ..CorpusInputs::default()
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::BuildGraph(a) => {
            let g = pipeline::build_graph_stage(&a.config()?, &a.inputs()?, &a.out)?;
            println!("{} nodes, {} edges", g.node_count(), g.edge_count());
        }
        Command::Ensemble(a) => {
            let m = pipeline::ensemble_stage(&a.config()?, &a.out)?;
            println!("{} nonzero entries over {} runs", m.nnz(), m.runs());
        }
        Command::Consensus(a) => {
            let cs = pipeline::consensus_stage(&a.config()?, &a.out)?;
            println!("{} consensus communities", cs.len());
        }
        Command::Stability(a) => {
            let rows = pipeline::stability_stage(&a.config()?, &a.out)?;
            println!("{} communities ranked", rows.len());
        }
        Command::Label(a) => {
            let labels = pipeline::label_stage(&a.config()?, &a.inputs()?, &a.out)?;
            println!("{} communities labelled", labels.len());
        }
        Command::Members(a) => {
            let users = pipeline::members_stage(&a.config()?, &a.inputs()?, &a.out)?;
            println!("{} member communities", users.len());
        }
        Command::Evaluate(a) => {
            for row in pipeline::evaluate_stage(&a.config()?, &a.truth_inputs(), &a.out)? {
                println!("{}\t{:.2}\t{:.2}\t{:.2}", row.category, row.precision, row.recall, row.f1);
            }
        }
        Command::Pipeline(a) => {
            let report = pipeline::run_pipeline(&a.config()?, &a.inputs()?, &a.out)?;
            println!(
                "{} lists, {} edges, {} consensus entries, {} communities",
                report.lists, report.edges, report.consensus_entries, report.communities
            );
        }
        Command::Synth(a) => {
            let spec = PlantedSpec {
                groups: a.groups,
                users_per_group: a.users_per_group,
                lists_per_group: a.lists_per_group,
                min_list_size: a.min_list_size,
                max_list_size: a.max_list_size,
                noise: a.noise,
                overlap: a.overlap,
                popularity: a.popularity,
                vocabulary: None,
            };
            let planted = synth(&spec, a.seed)?;
            planted.write(&a.out)?;
            println!("{} lists, {} users", planted.corpus.list_count(), planted.corpus.n());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
