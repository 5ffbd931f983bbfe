use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use geoa3::attack::{AttackConfig, AttackMode, AttackResult};
use geoa3::classifier::{self, ClassifierModel, TrainConfig, TrainReport};
use geoa3::dataset::{gen_dataset, read_dataset, write_dataset, DatasetSpec, Shape};
use geoa3::eval::{self, AblationVariant, Instance, SweepReport};
use geoa3::geom::{sor_defense, DEFAULT_K_SOR};
use geoa3::io::{read_json, read_xyz, write_atomic, write_json, write_xyz, SCHEMA_VERSION};
use geoa3::losses::GeoWeights;
use geoa3::{Error, Result};

#[derive(Parser)]
#[command(
    name = "geoa3",
    version,
    about = "Geometry-aware adversarial point clouds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the synthetic shape dataset
    GenData(GenDataArgs),
    /// Train the point-set classifier on a generated dataset
    Train(TrainArgs),
    /// Attack test clouds and write adversarial clouds plus results JSON
    Attack(AttackCmd),
    /// Apply statistical outlier removal to point clouds
    Defend(DefendArgs),
    /// Evaluate attack results under the defense sweep
    Eval(EvalArgs),
    /// Run the full ablation grid on the same instances
    Ablate(AblateCmd),
}

#[derive(Args)]
struct GenDataArgs {
    /// Output directory
    #[arg(long)]
    out: PathBuf,
    /// Comma-separated class list
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "sphere,box,cylinder,cone,torus,ellipsoid,pyramid,capsule"
    )]
    classes: Vec<String>,
    #[arg(long, default_value_t = 250)]
    train_per_class: usize,
    #[arg(long, default_value_t = 50)]
    test_per_class: usize,
    /// Points per cloud
    #[arg(long, default_value_t = 1024)]
    points: usize,
    #[arg(long, default_value_t = 0.7)]
    scale_min: f64,
    #[arg(long, default_value_t = 1.3)]
    scale_max: f64,
    /// Bound of the uniform coordinate noise
    #[arg(long, default_value_t = 0.005)]
    noise: f64,
    /// Disable random rotation about the vertical axis
    #[arg(long)]
    no_rotate: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct TrainArgs {
    /// Dataset directory written by gen-data
    #[arg(long)]
    data: PathBuf,
    /// Output model file
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 25)]
    epochs: usize,
    #[arg(long, default_value_t = 16)]
    batch_size: usize,
    #[arg(long, default_value_t = 1e-3)]
    lr: f64,
    /// Standard deviation of the training jitter
    #[arg(long, default_value_t = 0.005)]
    jitter: f64,
    /// Disable rotation augmentation
    #[arg(long)]
    no_rotate: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Optional JSON training report
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegularizerArg {
    Geometry,
    MinusChamfer,
    MinusHausdorff,
    MinusCurvature,
    DegenerateL2,
}

impl RegularizerArg {
    fn variant(self) -> AblationVariant {
        match self {
            RegularizerArg::Geometry => AblationVariant::Full,
            RegularizerArg::MinusChamfer => AblationVariant::MinusChamfer,
            RegularizerArg::MinusHausdorff => AblationVariant::MinusHausdorff,
            RegularizerArg::MinusCurvature => AblationVariant::MinusCurvature,
            RegularizerArg::DegenerateL2 => AblationVariant::DegenerateL2,
        }
    }
}

/// Attack hyperparameters shared by `attack` and `ablate`.
#[derive(Args)]
struct AttackArgs {
    /// Hausdorff weight
    #[arg(long, default_value_t = 0.1)]
    lambda1: f64,
    /// Curvature consistency weight
    #[arg(long, default_value_t = 1.0)]
    lambda2: f64,
    /// Initial regularization weight
    #[arg(long, default_value_t = 2500.0)]
    beta_init: f64,
    /// Number of β stages
    #[arg(long, default_value_t = 10)]
    binary_steps: usize,
    /// Adam iterations per stage
    #[arg(long, default_value_t = 500)]
    iters: usize,
    /// Adam learning rate
    #[arg(long, default_value_t = 0.01)]
    lr: f64,
    #[arg(long, default_value_t = 0.9)]
    adam_beta1: f64,
    #[arg(long, default_value_t = 0.999)]
    adam_beta2: f64,
    #[arg(long, default_value_t = 1e-8)]
    adam_eps: f64,
    /// Neighborhood size for curvature, frames and regularity
    #[arg(long, default_value_t = 16)]
    k: usize,
    /// Iterations between neighborhood and frame refreshes
    #[arg(long, default_value_t = 10)]
    refresh_period: usize,
    /// Evaluate gradients at tangent-jittered copies of the iterate
    #[arg(long)]
    itertanjit: bool,
    /// Tangent jitter standard deviation
    #[arg(long, default_value_t = 0.02)]
    sigma: f64,
    #[arg(long, value_enum, default_value = "geometry")]
    regularizer: RegularizerArg,
    /// Seed for target selection and the attacks
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl AttackArgs {
    fn config(&self) -> AttackConfig {
        AttackConfig {
            mode: AttackMode::Untargeted,
            weights: GeoWeights {
                lambda1: self.lambda1,
                lambda2: self.lambda2,
            },
            regularizer: self.regularizer.variant().regularizer(),
            beta_init: self.beta_init,
            binary_search_steps: self.binary_steps,
            iters_per_step: self.iters,
            learning_rate: self.lr,
            adam_beta1: self.adam_beta1,
            adam_beta2: self.adam_beta2,
            adam_eps: self.adam_eps,
            k: self.k,
            refresh_period: self.refresh_period,
            itertanjit: self.itertanjit,
            sigma: self.sigma,
            seed: self.seed,
        }
    }
}

/// Which clouds to attack and how targets are chosen.
#[derive(Args)]
struct SelectionArgs {
    /// Trained model file
    #[arg(long)]
    model: PathBuf,
    /// Dataset directory; its test split supplies the clouds
    #[arg(long)]
    data: PathBuf,
    /// Number of correctly classified test clouds to attack
    #[arg(long, default_value_t = 50)]
    count: usize,
    /// Attack every cloud towards this class (clouds already of this class are skipped)
    #[arg(long, conflicts_with = "untargeted")]
    target: Option<usize>,
    /// Untargeted attack; the default draws one random target per cloud
    #[arg(long)]
    untargeted: bool,
}

#[derive(Args)]
struct AttackCmd {
    #[command(flatten)]
    select: SelectionArgs,
    #[command(flatten)]
    attack: AttackArgs,
    /// Output directory for results.json and adversarial XYZ files
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AblateCmd {
    #[command(flatten)]
    select: SelectionArgs,
    #[command(flatten)]
    attack: AttackArgs,
    #[command(flatten)]
    sweep: SweepArgs,
    /// Output directory for ablation.json and table.txt
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DefendArgs {
    /// Input XYZ files
    #[arg(long, required = true, num_args = 1..)]
    input: Vec<PathBuf>,
    /// Fraction of points to drop
    #[arg(long, default_value_t = 0.01)]
    ratio: f64,
    #[arg(long, default_value_t = DEFAULT_K_SOR)]
    k_sor: usize,
    /// Output directory; files keep their names
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// Comma-separated SOR drop ratios
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0,0.01,0.02,0.05,0.1,0.15,0.2"
    )]
    ratios: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_K_SOR)]
    k_sor: usize,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    /// results.json written by attack
    #[arg(long)]
    results: PathBuf,
    #[command(flatten)]
    sweep: SweepArgs,
    /// Jitter scale of the surrogate resampling test
    #[arg(long, default_value_t = 0.02)]
    sigma_test: f64,
    #[arg(long, default_value_t = 5)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    resample_seed: u64,
    /// Output report JSON
    #[arg(long)]
    out: PathBuf,
}

#[derive(Serialize, Deserialize)]
struct TrainOutput {
    schema_version: u32,
    config: TrainConfig,
    report: TrainReport,
}

#[derive(Serialize, Deserialize)]
struct Selection {
    count: usize,
    mode: String,
    target: Option<usize>,
    seed: u64,
}

#[derive(Serialize, Deserialize)]
struct AttackEntry {
    id: usize,
    file: String,
    result: AttackResult,
}

#[derive(Serialize, Deserialize)]
struct AttackRun {
    schema_version: u32,
    selection: Selection,
    /// Resolved configuration; mode and seed are set per instance.
    config: AttackConfig,
    instances: Vec<AttackEntry>,
}

#[derive(Serialize, Deserialize)]
struct Resampling {
    /// Tangent-plane jitter stands in for meshing and re-sampling.
    method: String,
    sigma: f64,
    trials: usize,
    seed: u64,
    success_rate: f64,
}

#[derive(Serialize, Deserialize)]
struct EvalOutput {
    schema_version: u32,
    sweep: SweepReport,
    resampling: Resampling,
}

#[derive(Serialize, Deserialize)]
struct AblationOutput {
    schema_version: u32,
    selection: Selection,
    config: AttackConfig,
    reports: Vec<SweepReport>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::GenData(a) => gen_data(a),
        Command::Train(a) => train(a),
        Command::Attack(a) => attack(a),
        Command::Defend(a) => defend(a),
        Command::Eval(a) => evaluate(a),
        Command::Ablate(a) => ablate(a),
    }
}

fn gen_data(a: GenDataArgs) -> Result<()> {
    let classes = a
        .classes
        .iter()
        .map(|c| {
            Shape::from_name(c.trim())
                .ok_or_else(|| Error::InvalidSpec(format!("unknown class {c:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let spec = DatasetSpec {
        classes,
        train_per_class: a.train_per_class,
        test_per_class: a.test_per_class,
        points: a.points,
        scale_range: (a.scale_min, a.scale_max),
        rotate: !a.no_rotate,
        noise: a.noise,
        seed: a.seed,
    };
    let data = gen_dataset(&spec)?;
    write_dataset(&a.out, &spec, &data)?;
    println!(
        "wrote {} train and {} test clouds to {}",
        data.train.len(),
        data.test.len(),
        a.out.display()
    );
    Ok(())
}

fn train(a: TrainArgs) -> Result<()> {
    let data = read_dataset(&a.data)?;
    let cfg = TrainConfig {
        epochs: a.epochs,
        batch_size: a.batch_size,
        learning_rate: a.lr,
        seed: a.seed,
        rotate: !a.no_rotate,
        jitter: a.jitter,
    };
    let init = ClassifierModel::new(data.class_names.len(), a.seed);
    let (model, report) = classifier::train(&init, &data.train, &data.test, &cfg)?;
    classifier::save(&model, &a.out)?;
    println!(
        "train accuracy {:.4}, test accuracy {:.4}",
        report.train_accuracy, report.test_accuracy
    );
    if let Some(path) = a.report {
        write_json(
            &path,
            &TrainOutput {
                schema_version: SCHEMA_VERSION,
                config: cfg,
                report,
            },
        )?;
    }
    Ok(())
}

fn select(s: &SelectionArgs, seed: u64) -> Result<(ClassifierModel, Vec<Instance>, Selection)> {
    let model = classifier::load(&s.model)?;
    let data = read_dataset(&s.data)?;
    let targeted = !s.untargeted;
    let mut instances = match s.target {
        Some(t) => {
            if t >= model.classes() {
                return Err(Error::InvalidClass {
                    class: t,
                    classes: model.classes(),
                });
            }
            let pool: Vec<_> = data
                .test
                .iter()
                .filter(|c| c.label != Some(t))
                .cloned()
                .collect();
            let mut inst = eval::select_instances(&model, &pool, s.count, true, seed)?;
            // ids refer to the full test split
            let ids: Vec<usize> = (0..data.test.len())
                .filter(|&i| data.test[i].label != Some(t))
                .collect();
            for i in &mut inst {
                i.id = ids[i.id];
                i.mode = AttackMode::Targeted { target: t };
            }
            inst
        }
        None => eval::select_instances(&model, &data.test, s.count, targeted, seed)?,
    };
    instances.sort_by_key(|i| i.id);
    let selection = Selection {
        count: instances.len(),
        mode: if targeted { "targeted" } else { "untargeted" }.to_string(),
        target: s.target,
        seed,
    };
    if instances.is_empty() {
        return Err(Error::EmptyResults);
    }
    Ok((model, instances, selection))
}

fn attack(a: AttackCmd) -> Result<()> {
    let cfg = a.attack.config();
    cfg.validate()?;
    let (model, instances, selection) = select(&a.select, cfg.seed)?;
    let results = eval::run_attacks(&model, &instances, &cfg)?;
    let adv_dir = a.out.join("adv");
    std::fs::create_dir_all(&adv_dir).map_err(|e| Error::io(&adv_dir, e))?;
    let mut entries = Vec::with_capacity(results.len());
    let mut wins = 0;
    for (inst, result) in instances.iter().zip(results) {
        let file = format!("adv/{:05}.xyz", inst.id);
        write_xyz(&result.adversarial, a.out.join(&file))?;
        wins += usize::from(result.success);
        entries.push(AttackEntry {
            id: inst.id,
            file,
            result,
        });
    }
    let n = entries.len();
    write_json(
        &a.out.join("results.json"),
        &AttackRun {
            schema_version: SCHEMA_VERSION,
            selection,
            config: cfg,
            instances: entries,
        },
    )?;
    println!("{wins}/{n} attacks succeeded");
    Ok(())
}

fn defend(a: DefendArgs) -> Result<()> {
    std::fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    for path in &a.input {
        let cloud = read_xyz(path)?;
        let kept = sor_defense(&cloud, a.k_sor, a.ratio)?;
        let name = path
            .file_name()
            .ok_or_else(|| Error::InvalidConfig(format!("{} has no file name", path.display())))?;
        write_xyz(&kept, a.out.join(name))?;
    }
    Ok(())
}

fn evaluate(a: EvalArgs) -> Result<()> {
    let model = classifier::load(&a.model)?;
    let run: AttackRun = read_json(&a.results)?;
    if run.schema_version != SCHEMA_VERSION {
        return Err(Error::FormatVersionMismatch(format!(
            "results schema {} (expected {SCHEMA_VERSION})",
            run.schema_version
        )));
    }
    let ids: Vec<usize> = run.instances.iter().map(|e| e.id).collect();
    let results: Vec<AttackResult> = run.instances.into_iter().map(|e| e.result).collect();
    let name = run.config.regularizer.name();
    let sweep = eval::sweep_report(
        &name,
        &ids,
        &results,
        &model,
        &a.sweep.ratios,
        a.sweep.k_sor,
    )?;
    let rate = eval::resample_robustness(
        &results,
        &model,
        a.sigma_test,
        a.trials,
        run.config.k,
        a.resample_seed,
    )?;
    print!("{}", eval::format_table(std::slice::from_ref(&sweep)));
    println!(
        "surrogate resampling success (sigma {}): {:.2}%",
        a.sigma_test,
        rate * 100.0
    );
    write_json(
        &a.out,
        &EvalOutput {
            schema_version: SCHEMA_VERSION,
            sweep,
            resampling: Resampling {
                method: "surrogate tangent-plane jitter, majority of trials".into(),
                sigma: a.sigma_test,
                trials: a.trials,
                seed: a.resample_seed,
                success_rate: rate,
            },
        },
    )
}

fn ablate(a: AblateCmd) -> Result<()> {
    let cfg = a.attack.config();
    cfg.validate()?;
    let (model, instances, selection) = select(&a.select, cfg.seed)?;
    let out = eval::run_ablation(&model, &instances, &cfg, &a.sweep.ratios, a.sweep.k_sor)?;
    let reports: Vec<SweepReport> = out.into_iter().map(|(_, _, r)| r).collect();
    let table = eval::format_table(&reports);
    std::fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    write_atomic(&a.out.join("table.txt"), table.as_bytes())?;
    print!("{table}");
    write_json(
        &a.out.join("ablation.json"),
        &AblationOutput {
            schema_version: SCHEMA_VERSION,
            selection,
            config: cfg,
            reports,
        },
    )
}
