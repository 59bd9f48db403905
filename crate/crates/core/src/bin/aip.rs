//! Command-line front end: scene validation, action inference, forward
//! prediction, scene generation, and ground-truth checking.
//!
//! Exit codes: 0 success with solutions, 2 input error, 3 no solution,
//! 4 check failure.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use aip_core::dynamics::DEFAULT_SUBSET_CAP;
use aip_core::oracle::{
    enumerate_actions, generate_scene, random_scene, GenerateOptions, GroundTruthFile,
    ImpulseEvent, IntegrationMode, StackSpec, ENUMERATE_OBJECT_CAP,
};
use aip_core::report::{
    action_set_diff, digest, predict_envelopes, CheckReport, ForcesFile, PredictReport, RunReport,
    FORCES_FORMAT,
};
use aip_core::scene::Scene;
use aip_core::sign::QuantizationConfig;
use aip_core::solver::{
    definite_actions, solve, solve_pinned, Heuristics, SolveError, SolverConfig, VertexOrder,
    ACTION_VAR,
};

const EXIT_OK: u8 = 0;
const EXIT_INPUT: u8 = 2;
const EXIT_NO_SOLUTION: u8 = 3;
const EXIT_CHECK_FAILED: u8 = 4;

#[derive(Parser)]
#[command(
    name = "aip",
    version,
    about = "Qualitative rigid-body action inference",
    after_help = "Exit codes: 0 solutions found / success, 2 input error, 3 no solution, \
                  4 check failure. AIP_THREADS caps internal parallelism."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a scene file.
    Validate(ValidateArgs),
    /// Infer every qualitative action that explains the observed change.
    Infer(InferArgs),
    /// Forward mode: possible state changes per object under a force set.
    Predict(PredictArgs),
    /// Simulate a box stack hit by an impulse; write the scene and, unless
    /// the impulse is zero, a ground-truth sidecar.
    Generate(GenerateArgs),
    /// Check a scene against its ground-truth sidecar and, on small scenes,
    /// against the brute-force enumerator.
    Check(CheckArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

#[derive(Args)]
struct SolveFlags {
    /// Pruning heuristics: none, h1, h2, or h1h2.
    #[arg(long, default_value = "h1h2")]
    heuristics: String,
    /// Cap on per-object force sets (the envelope is exponential in it).
    #[arg(long, default_value_t = DEFAULT_SUBSET_CAP)]
    cap: usize,
    /// Quantization dead-band for numeric geometry in the scene file.
    #[arg(long, default_value_t = 1e-6)]
    epsilon: f64,
}

impl SolveFlags {
    fn config(&self) -> Result<SolverConfig> {
        let heuristics: Heuristics = self.heuristics.parse().map_err(|e: String| anyhow!(e))?;
        Ok(SolverConfig {
            heuristics,
            subset_cap: self.cap,
            max_solutions: None,
            vertex_order: VertexOrder::PreferKnown,
        })
    }

    fn quantization(&self) -> Result<QuantizationConfig> {
        Ok(QuantizationConfig::new(self.epsilon)?)
    }
}

#[derive(Args)]
struct ValidateArgs {
    scene: PathBuf,
    #[arg(long, default_value_t = 1e-6)]
    epsilon: f64,
}

#[derive(Args)]
struct InferArgs {
    scene: PathBuf,
    #[command(flatten)]
    flags: SolveFlags,
    #[arg(long)]
    max_solutions: Option<usize>,
    #[arg(long, value_enum, default_value = "text")]
    format: OutputFormat,
}

#[derive(Args)]
struct PredictArgs {
    scene: PathBuf,
    /// Force-set file (format "aip-forces/1").
    #[arg(long)]
    forces: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SUBSET_CAP)]
    cap: usize,
    #[arg(long, default_value_t = 1e-6)]
    epsilon: f64,
    #[arg(long, value_enum, default_value = "text")]
    format: OutputFormat,
}

#[derive(Args)]
struct GenerateArgs {
    /// Number of boxes in the stack.
    #[arg(long)]
    stack: usize,
    /// Impulse: "random", "zero", or "JX,JY,JZ@TARGET" with TARGET a box
    /// index or "top". The push lands at the centre of the face it enters.
    #[arg(long, default_value = "random")]
    impulse: String,
    /// Seed for the stack (and the impulse when it is "random").
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Use identical unit boxes instead of a seeded random stack
    /// (explicit --impulse only).
    #[arg(long)]
    uniform: bool,
    #[arg(long)]
    out: PathBuf,
    /// Where to write the ground-truth sidecar.
    #[arg(long)]
    sidecar: Option<PathBuf>,
    /// Simulation steps after the impulse.
    #[arg(long, default_value_t = 40)]
    horizon: usize,
    /// Settling steps before the earlier snapshot.
    #[arg(long, default_value_t = 60)]
    settle: usize,
    #[arg(long, default_value_t = 0.01)]
    dt: f64,
    /// Floor for the quantization dead-band.
    #[arg(long, default_value_t = 1e-6)]
    min_epsilon: f64,
    /// Integrate positions with pre-step velocities.
    #[arg(long)]
    explicit: bool,
}

#[derive(Args)]
struct CheckArgs {
    scene: PathBuf,
    sidecar: PathBuf,
    #[command(flatten)]
    flags: SolveFlags,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_scene(path: &Path, cfg: QuantizationConfig) -> Result<(Scene, String)> {
    let text = read(path)?;
    let scene =
        Scene::parse_json(&text, cfg).with_context(|| format!("scene {}", path.display()))?;
    Ok((scene, text))
}

fn cmd_validate(args: &ValidateArgs) -> Result<u8> {
    let cfg = QuantizationConfig::new(args.epsilon)?;
    let (scene, text) = load_scene(&args.scene, cfg)?;
    println!(
        "ok: {} objects, {} contacts, gravity {}, digest {}",
        scene.objects.len(),
        scene.contacts.len(),
        if scene.gravity { "on" } else { "off" },
        digest(text.as_bytes()),
    );
    Ok(EXIT_OK)
}

fn cmd_infer(args: &InferArgs) -> Result<u8> {
    let qcfg = args.flags.quantization()?;
    let (scene, text) = load_scene(&args.scene, qcfg)?;
    let mut cfg = args.flags.config()?;
    cfg.max_solutions = args.max_solutions;
    let start = Instant::now();
    let solutions = match solve(&scene, &cfg) {
        Ok(s) => s,
        Err(SolveError::NoMovedObject) => {
            eprintln!("no solution: {}", SolveError::NoMovedObject);
            return Ok(EXIT_NO_SOLUTION);
        }
        Err(e) => return Err(e.into()),
    };
    let report = RunReport::new(
        text.as_bytes(),
        &cfg,
        qcfg.epsilon,
        solutions,
        start.elapsed().as_millis() as u64,
    );
    match args.format {
        OutputFormat::Text => print!("{}", report.render_text()),
        OutputFormat::Json => print!("{}", report.to_json()),
    }
    Ok(if report.solution_count > 0 { EXIT_OK } else { EXIT_NO_SOLUTION })
}

fn cmd_predict(args: &PredictArgs) -> Result<u8> {
    let qcfg = QuantizationConfig::new(args.epsilon)?;
    let (scene, text) = load_scene(&args.scene, qcfg)?;
    let forces_text = read(&args.forces)?;
    let forces: ForcesFile = serde_json::from_str(&forces_text)
        .with_context(|| format!("forces {}", args.forces.display()))?;
    if forces.format != FORCES_FORMAT {
        bail!("field \"format\" is {:?}, expected {:?}", forces.format, FORCES_FORMAT);
    }
    for f in &forces.forces {
        if scene.object(&f.object.as_str().into()).is_none() {
            bail!("force references unknown object {:?}", f.object);
        }
    }
    let start = Instant::now();
    let per_object = predict_envelopes(&scene, &forces, args.cap)?;
    let report = PredictReport {
        scene_digest: digest(text.as_bytes()),
        per_object,
        wall_ms: start.elapsed().as_millis() as u64,
    };
    match args.format {
        OutputFormat::Text => print!("{}", report.render_text()),
        OutputFormat::Json => print!("{}", report.to_json()),
    }
    Ok(EXIT_OK)
}

/// Parses "JX,JY,JZ@TARGET" into an impulse on the stack: the application
/// point is the centre of the face the push enters through.
fn explicit_impulse(spec: &str, stack: &StackSpec) -> Result<ImpulseEvent> {
    let (vec_part, target) = spec
        .split_once('@')
        .ok_or_else(|| anyhow!("impulse {spec:?} is not JX,JY,JZ@TARGET"))?;
    let parts: Vec<f64> = vec_part
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("impulse vector in {spec:?}"))?;
    let [jx, jy, jz]: [f64; 3] = parts
        .try_into()
        .map_err(|_| anyhow!("impulse {spec:?} needs exactly three components"))?;
    let index = if target == "top" {
        stack.boxes.len().checked_sub(1).ok_or_else(|| anyhow!("empty stack"))?
    } else {
        target.parse::<usize>().with_context(|| format!("impulse target {target:?}"))?
    };
    if index >= stack.boxes.len() {
        bail!("impulse target {index} out of range (stack has {})", stack.boxes.len());
    }
    let world = stack.build();
    let body = &world.bodies[index + 1];
    let impulse = [jx, jy, jz];
    // The dominant component decides which face is poked.
    let axis = (0..3)
        .max_by(|a, b| impulse[*a].abs().total_cmp(&impulse[*b].abs()))
        .unwrap();
    let mut point = body.position;
    if impulse[axis] != 0.0 {
        point[axis] -= impulse[axis].signum() * body.half_extents[axis];
    } else {
        point[2] += body.half_extents[2];
    }
    Ok(ImpulseEvent { body: body.id.clone(), application_point: point, impulse, time: 0 })
}

fn cmd_generate(args: &GenerateArgs) -> Result<u8> {
    if args.stack == 0 {
        bail!("--stack must be at least 1");
    }
    let opts = GenerateOptions {
        dt: args.dt,
        settle_steps: args.settle,
        horizon: args.horizon,
        mode: if args.explicit { IntegrationMode::Explicit } else { IntegrationMode::SemiImplicit },
        min_epsilon: args.min_epsilon,
    };
    let generated = if args.impulse == "random" {
        if args.uniform {
            bail!("--uniform requires an explicit --impulse");
        }
        random_scene(args.stack, args.seed, &opts)?
    } else {
        let stack = if args.uniform {
            StackSpec::uniform(args.stack)
        } else {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(args.seed);
            StackSpec::random(args.stack, &mut rng)
        };
        let impulse = if args.impulse == "zero" {
            let world = stack.build();
            let body = world.bodies.last().expect("stack has boxes");
            let mut point = body.position;
            point[2] += body.half_extents[2];
            ImpulseEvent {
                body: body.id.clone(),
                application_point: point,
                impulse: [0.0; 3],
                time: 0,
            }
        } else {
            explicit_impulse(&args.impulse, &stack)?
        };
        generate_scene(&stack, &impulse, &opts)?
    };
    std::fs::write(&args.out, generated.scene.to_json())
        .with_context(|| format!("writing {}", args.out.display()))?;
    println!(
        "wrote {} ({} objects, {} contacts, epsilon {})",
        args.out.display(),
        generated.scene.objects.len(),
        generated.scene.contacts.len(),
        generated.epsilon
    );
    match (&args.sidecar, &generated.truth) {
        (Some(path), Some(truth)) => {
            std::fs::write(path, GroundTruthFile::of(truth).to_json())
                .with_context(|| format!("writing {}", path.display()))?;
            println!("wrote {} ({})", path.display(), truth);
        }
        (Some(_), None) => println!("no sidecar written: the impulse was zero"),
        (None, _) => {}
    }
    Ok(EXIT_OK)
}

fn cmd_check(args: &CheckArgs) -> Result<u8> {
    let qcfg = args.flags.quantization()?;
    let (scene, text) = load_scene(&args.scene, qcfg)?;
    let sidecar_text = read(&args.sidecar)?;
    let sidecar: GroundTruthFile = serde_json::from_str(&sidecar_text)
        .with_context(|| format!("sidecar {}", args.sidecar.display()))?;
    let truth = sidecar.to_action()?;
    let cfg = args.flags.config()?;

    let mut report = CheckReport {
        scene_digest: digest(text.as_bytes()),
        heuristics: cfg.heuristics.to_string(),
        truth_found: false,
        solver_actions: 0,
        enumerator_actions: None,
        missing: Vec::new(),
        extra: Vec::new(),
        error: None,
    };
    match solve(&scene, &cfg) {
        Ok(solutions) => {
            let group_hit = solutions.iter().any(|s| {
                let g = &s.assignments[ACTION_VAR].value;
                g.object == truth.force.object
                    && g.qr == truth.force.qr
                    && g.qd.admits(truth.force.qd)
            });
            let pinned = !solve_pinned(&scene, &cfg, &truth)?.is_empty();
            report.truth_found = group_hit && pinned;
            let expanded = definite_actions(&scene, &cfg, &solutions)?;
            report.solver_actions = expanded.len();
            let movable = scene.objects.iter().filter(|o| !o.is_static).count();
            if movable <= ENUMERATE_OBJECT_CAP {
                let reference = enumerate_actions(&scene, &cfg)?;
                report.enumerator_actions = Some(reference.len());
                let expanded_set: BTreeSet<_> = expanded.into_iter().collect();
                let (missing, extra) = action_set_diff(&reference, &expanded_set);
                report.missing = missing;
                report.extra = extra;
            }
        }
        Err(e) => report.error = Some(e.to_string()),
    }
    print!("{}", report.to_json());
    Ok(if report.passed() { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Validate(args) => cmd_validate(args),
        Command::Infer(args) => cmd_infer(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Generate(args) => cmd_generate(args),
        Command::Check(args) => cmd_check(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
