// SPDX-License-Identifier: Apache-2.0

//! Command-line front end.
//!
//! Every command writes its artifacts into `--out-dir` together with a
//! `<command>_manifest.json` that lists them and records the exact argument
//! vector, so `qneuron replay <manifest>` can regenerate and compare them.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::activations::{fmt_sig, Activation, ActivationSpec};
use crate::circuits::{count_resources, Circuit, DecompositionRule, ResourceReport};
use crate::error::{Error, Result};
use crate::fixedpoint::{encode_features, FixedPointFormat, Rounding};
use crate::neuron::{
    build_amplitude_neuron_circuit, build_basis_neuron_circuit, run_amplitude_neuron,
    run_basis_neuron, AmplitudeNeuronConfig, BasisNeuronConfig, NeuronOutput, OracleConstruction,
    RunMode,
};
use crate::noise::{accuracy, exact_accuracy, run_noisy, with_input, NoiseModel, OracleInput};
use crate::oracles::{build_assignment_circuit, build_phase_qft_circuit, BooleanTable};
use crate::qnn::{train, Dataset, ForwardMode, QFNNConfig, TrainConfig};
use crate::statevec::{parse_bitstring, to_bitstring, Distribution, MeasurementHistogram};
use crate::{Execution, DEFAULT_SHOTS};

#[derive(Debug, Parser)]
#[command(name = "qneuron", version, about = "Quantum neuron simulator")]
pub struct Cli {
    /// RNG seed; each command has its own default.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, default_value_t = DEFAULT_SHOTS)]
    pub shots: u64,
    /// Noise model JSON `{p1, p2, r01, r10}`.
    #[arg(long, global = true)]
    pub noise: Option<PathBuf>,
    /// Also write the executed circuit as JSON.
    #[arg(long, global = true)]
    pub dump_circuit: bool,
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    /// Report exact probabilities instead of sampling.
    #[arg(long, global = true)]
    pub exact: bool,
    /// Run without the thread pool.
    #[arg(long, global = true)]
    pub sequential: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConstructionArg {
    Assignment,
    PhaseQft,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    NoAncilla,
    OneAncilla,
}

impl From<RuleArg> for DecompositionRule {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::NoAncilla => DecompositionRule::NoAncilla,
            RuleArg::OneAncilla => DecompositionRule::OneAncilla,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an oracle construction on a truth table and score its outputs.
    OracleDemo {
        /// Truth-table file; the 2-bit ReLU table is used when omitted.
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "both")]
        construction: ConstructionArg,
        /// Input bitstring or `uniform`.
        #[arg(long, default_value = "uniform")]
        input: String,
    },
    /// Run a neuron described by a JSON config on one sample.
    NeuronRun {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated feature values.
        #[arg(long, allow_hyphen_values = true)]
        sample: String,
    },
    /// Tabulate an activation over every code of a fixed-point format.
    ActivationPlot {
        #[arg(long)]
        name: Activation,
        #[arg(long, default_value = "1:3:4")]
        fmt: FixedPointFormat,
    },
    /// Train the 2-2-1 network on XOR.
    TrainXor {
        #[arg(long, default_value_t = TrainConfig::default().eta)]
        eta: f64,
        #[arg(long, default_value_t = TrainConfig::default().epochs)]
        epochs: usize,
        #[arg(long, default_value_t = TrainConfig::default().mode)]
        mode: ForwardMode,
        #[arg(long, default_value_t = TrainConfig::default().init_scale)]
        init_scale: f64,
    },
    /// Count qubits and gates of a neuron config.
    Resources {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value = "no-ancilla")]
        rule: RuleArg,
        /// Sample used for the data encoding; zeros (basis) or the weights
        /// (amplitude) when omitted.
        #[arg(long, allow_hyphen_values = true)]
        sample: Option<String>,
    },
    /// Re-run the command recorded in a manifest and compare its artifacts.
    Replay { manifest: PathBuf },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::OracleDemo { .. } => "oracle-demo",
            Command::NeuronRun { .. } => "neuron-run",
            Command::ActivationPlot { .. } => "activation-plot",
            Command::TrainXor { .. } => "train-xor",
            Command::Resources { .. } => "resources",
            Command::Replay { .. } => "replay",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: Value,
    /// Arguments after the program name.
    pub argv: Vec<String>,
    pub seed: Option<u64>,
    pub outputs: Vec<PathBuf>,
    pub version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

/// Activation given by name or by a truth-table file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ActivationRef {
    Named(Activation),
    Table { table: PathBuf },
}

/// Neuron config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum NeuronSpec {
    Basis {
        weights: Vec<f64>,
        m: u32,
        fb: u32,
        /// Feature format `s:i:f`; defaults to `0:0:p` (or `0:0:fb`).
        #[serde(default)]
        sample_format: Option<String>,
        #[serde(default)]
        p: Option<u32>,
        activation: ActivationRef,
        /// Output format when `activation` is a table file.
        #[serde(default)]
        output_format: Option<String>,
        #[serde(default)]
        oracle: OracleConstruction,
    },
    Amplitude {
        weights: Vec<f64>,
        m: u32,
        activation: ActivationRef,
        #[serde(default)]
        output_format: Option<String>,
        #[serde(default)]
        oracle: OracleConstruction,
    },
}

/// A neuron config resolved against its file location.
pub enum NeuronConfig {
    Basis(BasisNeuronConfig),
    Amplitude(AmplitudeNeuronConfig),
}

fn load_table(path: &Path) -> Result<BooleanTable> {
    BooleanTable::parse(&fs::read_to_string(path).map_err(|e| Error::file(path, e))?)
}

impl NeuronSpec {
    pub fn load(path: &Path) -> Result<(Self, PathBuf)> {
        let text = fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        let spec: NeuronSpec = serde_json::from_str(&text)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((spec, base))
    }

    /// Builds the neuron; table paths are relative to `base`.
    pub fn resolve(&self, base: &Path) -> Result<NeuronConfig> {
        match self {
            NeuronSpec::Basis {
                weights,
                m,
                fb,
                sample_format,
                p,
                activation,
                output_format,
                oracle,
            } => {
                let sample_format_text = sample_format;
                let sample_format = match (sample_format, p) {
                    (Some(f), _) => f.parse()?,
                    (None, Some(p)) => FixedPointFormat::unsigned(0, *p)?,
                    (None, None) => FixedPointFormat::unsigned(0, *fb)?,
                };
                if let (Some(_), Some(p)) = (sample_format_text, p) {
                    if sample_format.total_bits() != *p {
                        return Err(Error::Config(format!(
                            "sample format {sample_format} is not {p} bits wide"
                        )));
                    }
                }
                let mut cfg = match activation {
                    ActivationRef::Named(a) => BasisNeuronConfig::with_activation(
                        weights.clone(),
                        sample_format,
                        *m,
                        *fb,
                        *a,
                    )?,
                    ActivationRef::Table { table } => {
                        let out = match output_format {
                            Some(f) => f.parse()?,
                            None => FixedPointFormat::register(*m, *fb)?,
                        };
                        BasisNeuronConfig::new(
                            weights.clone(),
                            sample_format,
                            *m,
                            *fb,
                            load_table(&base.join(table))?,
                            out,
                        )?
                    }
                };
                cfg.oracle = *oracle;
                Ok(NeuronConfig::Basis(cfg))
            }
            NeuronSpec::Amplitude {
                weights,
                m,
                activation,
                output_format,
                oracle,
            } => {
                let out: FixedPointFormat = match output_format {
                    Some(f) => f.parse()?,
                    None => "1:3:4".parse()?,
                };
                let mut cfg = match activation {
                    ActivationRef::Named(a) => {
                        AmplitudeNeuronConfig::with_activation(weights.clone(), *m, *a, out)?
                    }
                    ActivationRef::Table { table } => AmplitudeNeuronConfig::new(
                        weights.clone(),
                        *m,
                        load_table(&base.join(table))?,
                        out,
                    )?,
                };
                cfg.oracle = *oracle;
                Ok(NeuronConfig::Amplitude(cfg))
            }
        }
    }
}

fn parse_sample(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse(format!("bad feature value {t:?}")))
        })
        .collect()
}

/// Qubit count predicted by the closed forms: `pn + 2m` (basis) and
/// `log₂n + 2m + 1` (amplitude).
pub fn closed_form_qubits(cfg: &NeuronConfig) -> usize {
    match cfg {
        NeuronConfig::Basis(c) => c.p() * c.n() + 2 * c.m as usize,
        NeuronConfig::Amplitude(c) => c.n().trailing_zeros() as usize + 2 * c.m as usize + 1,
    }
}

/// Resource report of a resolved neuron, with the closed-form qubit count.
pub fn neuron_resources(
    cfg: &NeuronConfig,
    sample: Option<&[f64]>,
    rule: DecompositionRule,
) -> Result<(Circuit, ResourceReport)> {
    let circuit = match cfg {
        NeuronConfig::Basis(c) => {
            let zeros = vec![0.0; c.n()];
            let x = encode_features(
                sample.unwrap_or(&zeros),
                c.sample_format,
                Rounding::NearestEven,
            )?;
            build_basis_neuron_circuit(c, &x)?
        }
        NeuronConfig::Amplitude(c) => {
            build_amplitude_neuron_circuit(c, sample.unwrap_or(&c.weights))?
        }
    };
    let report = count_resources(&circuit, rule);
    Ok((circuit, report))
}

struct Ctx<'a> {
    cli: &'a Cli,
    exec: Execution,
    outputs: Vec<PathBuf>,
}

impl Ctx<'_> {
    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.cli.out_dir.join(name);
        fs::write(&path, contents)?;
        self.outputs.push(path);
        Ok(())
    }

    fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, &text)
    }

    fn noise(&self) -> Result<Option<NoiseModel>> {
        self.cli.noise.as_deref().map(NoiseModel::load).transpose()
    }
}

fn histogram_csv(h: &MeasurementHistogram) -> String {
    h.to_csv()
}

fn probability_csv(d: &Distribution) -> String {
    let mut out = String::from("bitstring,probability\n");
    for (bits, p) in d.to_map(0.0) {
        out.push_str(&format!("{bits},{}\n", fmt_sig(p)));
    }
    out
}

fn relu_table() -> BooleanTable {
    BooleanTable::new(2, 2, vec![0, 1, 0, 0]).expect("static table")
}

fn oracle_demo(
    ctx: &mut Ctx,
    table: &Option<PathBuf>,
    construction: ConstructionArg,
    input: &str,
) -> Result<Value> {
    let truth = match table {
        Some(p) => load_table(p)?,
        None => relu_table(),
    };
    let (n, m) = (truth.n(), truth.m());
    let input = if input == "uniform" {
        OracleInput::Uniform
    } else {
        if input.len() != n {
            return Err(Error::Bitstring(format!("input {input:?} is not {n} bits")));
        }
        parse_bitstring(input)?;
        OracleInput::Basis(input.to_string())
    };
    let seed = ctx.cli.seed.unwrap_or(0);
    let noise = ctx.noise()?;
    let kinds: &[(ConstructionArg, &str)] = match construction {
        ConstructionArg::Assignment => &[(ConstructionArg::Assignment, "assignment")],
        ConstructionArg::PhaseQft => &[(ConstructionArg::PhaseQft, "phase-qft")],
        ConstructionArg::Both => &[
            (ConstructionArg::Assignment, "assignment"),
            (ConstructionArg::PhaseQft, "phase-qft"),
        ],
    };
    let mut accuracy_csv = String::from("construction,input,shots,accuracy\n");
    let mut summary = BTreeMap::new();
    for &(kind, label) in kinds {
        let oracle = match kind {
            ConstructionArg::Assignment => build_assignment_circuit(&truth)?,
            _ => build_phase_qft_circuit(&truth)?,
        };
        let circuit = with_input(&oracle, n, &input)?;
        if ctx.cli.dump_circuit {
            ctx.write_json(&format!("oracle_{label}_circuit.json"), &circuit.to_json())?;
        }
        let input_label = match &input {
            OracleInput::Uniform => "uniform".to_string(),
            OracleInput::Basis(b) => b.clone(),
        };
        let (acc, shots_col) = if ctx.cli.exact {
            if noise.is_some() {
                return Err(Error::Config(
                    "--exact cannot be combined with --noise".into(),
                ));
            }
            let d = circuit.run()?.full_probabilities();
            ctx.write(
                &format!("oracle_{label}_probabilities.csv"),
                &probability_csv(&d),
            )?;
            (exact_accuracy(&d, &truth, &input)?, "exact".to_string())
        } else {
            let model = noise.unwrap_or_default();
            let h = run_noisy(&circuit, &model, ctx.cli.shots, seed, ctx.exec)?;
            ctx.write(&format!("oracle_{label}_histogram.csv"), &histogram_csv(&h))?;
            (accuracy(&h, &truth, &input)?, ctx.cli.shots.to_string())
        };
        accuracy_csv.push_str(&format!(
            "{label},{input_label},{shots_col},{}\n",
            fmt_sig(acc)
        ));
        println!("{label}: accuracy {}", fmt_sig(acc));
        summary.insert(label, acc);
    }
    ctx.write("oracle_accuracy.csv", &accuracy_csv)?;
    Ok(json!({
        "table": table,
        "n": n,
        "m": m,
        "construction": format!("{construction:?}"),
        "input": match &input { OracleInput::Uniform => "uniform".to_string(), OracleInput::Basis(b) => b.clone() },
        "noise": noise,
        "accuracy": summary,
    }))
}

/// Noisy run of the full neuron circuit, reduced to a [`NeuronOutput`].
fn noisy_neuron_output(
    circuit: &Circuit,
    m: usize,
    model: &NoiseModel,
    shots: u64,
    seed: u64,
    exec: Execution,
    finish: impl Fn(u64, u64) -> (f64, u64, f64, bool),
) -> Result<NeuronOutput> {
    let h = run_noisy(circuit, model, shots, seed, exec)?;
    let mut reg = vec![0.0; 1 << m];
    let mut act = vec![0.0; 1 << m];
    for (bits, &c) in &h.counts {
        let f = c as f64 / shots as f64;
        act[parse_bitstring(&bits[..m])? as usize] += f;
        reg[parse_bitstring(&bits[m..2 * m])? as usize] += f;
    }
    let reg = Distribution::from_probs(reg);
    let act = Distribution::from_probs(act);
    let value = reg.argmax();
    let (decoded, code, act_value, boundary) = finish(value, act.argmax());
    Ok(NeuronOutput {
        register_value: value,
        register_bits: to_bitstring(value, m),
        decoded_pre_activation: decoded,
        activation_code: code,
        activation_value: act_value,
        distribution: reg.to_map(1e-15),
        activation_distribution: act.to_map(1e-15),
        boundary,
    })
}

fn neuron_run(ctx: &mut Ctx, config: &Path, sample: &str) -> Result<Value> {
    let (spec, base) = NeuronSpec::load(config)?;
    let cfg = spec.resolve(&base)?;
    let x = parse_sample(sample)?;
    let seed = ctx.cli.seed.unwrap_or(0);
    let mode = if ctx.cli.exact {
        RunMode::Exact
    } else {
        RunMode::Shots {
            shots: ctx.cli.shots,
            seed,
        }
    };
    let noise = ctx.noise()?;
    let (output, circuit) = match &cfg {
        NeuronConfig::Basis(c) => {
            let enc = encode_features(&x, c.sample_format, Rounding::NearestEven)?;
            let circuit = build_basis_neuron_circuit(c, &enc)?;
            let out = match noise {
                Some(model) if !ctx.cli.exact => noisy_neuron_output(
                    &circuit,
                    c.m as usize,
                    &model,
                    ctx.cli.shots,
                    seed,
                    ctx.exec,
                    |v, a| {
                        (
                            c.register_format().decode(v),
                            a,
                            c.output_format.decode(a),
                            false,
                        )
                    },
                )?,
                _ => run_basis_neuron(c, &enc, mode)?,
            };
            (out, circuit)
        }
        NeuronConfig::Amplitude(c) => {
            let circuit = build_amplitude_neuron_circuit(c, &x)?;
            let out = match noise {
                Some(model) if !ctx.cli.exact => {
                    let half = 1u64 << (c.m - 1);
                    noisy_neuron_output(
                        &circuit,
                        c.m as usize,
                        &model,
                        ctx.cli.shots,
                        seed,
                        ctx.exec,
                        |v, a| {
                            let u = crate::neuron::fold_amplitude_reading(v, c.m);
                            let t = -(u as f64 * std::f64::consts::PI / half as f64).cos();
                            (t, a, c.output_format.decode(a), u == half)
                        },
                    )?
                }
                _ => run_amplitude_neuron(c, &x, mode)?,
            };
            (out, circuit)
        }
    };
    if ctx.cli.dump_circuit {
        ctx.write_json("neuron_circuit.json", &circuit.to_json())?;
    }
    ctx.write_json("neuron_output.json", &output)?;
    println!(
        "register {} pre-activation {} activation {}{}",
        output.register_bits,
        fmt_sig(output.decoded_pre_activation),
        fmt_sig(output.activation_value),
        if output.boundary { " (boundary)" } else { "" }
    );
    Ok(json!({
        "config": config,
        "neuron": spec,
        "sample": x,
        "exact": ctx.cli.exact,
        "shots": ctx.cli.shots,
        "noise": noise,
    }))
}

fn activation_plot(ctx: &mut Ctx, name: Activation, fmt: FixedPointFormat) -> Result<Value> {
    let spec = ActivationSpec::new(name, fmt);
    ctx.write(&format!("activation_{name}.csv"), &spec.curve_csv()?)?;
    Ok(json!({ "name": name, "fmt": fmt.to_string() }))
}

fn train_xor(ctx: &mut Ctx, cfg: TrainConfig) -> Result<Value> {
    let net = QFNNConfig::xor_default();
    let report = train(&net, &Dataset::xor(), &cfg, ctx.exec)?;
    ctx.write("xor_learning_curve.csv", &report.curve_csv())?;
    ctx.write_json(
        "xor_weights.json",
        &json!({
            "layer_sizes": net.layer_sizes,
            "m": net.m,
            "fb": net.fb,
            "activation": net.activation,
            "initial_weights": report.initial_weights,
            "weights": report.weights,
            "final_loss": report.final_loss,
        }),
    )?;
    println!(
        "final loss {} after {} epochs ({} forward)",
        fmt_sig(report.final_loss),
        cfg.epochs,
        cfg.mode
    );
    Ok(json!({ "train": cfg, "network": net }))
}

fn resources(
    ctx: &mut Ctx,
    config: &Path,
    rule: DecompositionRule,
    sample: &Option<String>,
) -> Result<Value> {
    let (spec, base) = NeuronSpec::load(config)?;
    let cfg = spec.resolve(&base)?;
    let x = sample.as_deref().map(parse_sample).transpose()?;
    let (circuit, report) = neuron_resources(&cfg, x.as_deref(), rule)?;
    let expected = closed_form_qubits(&cfg);
    if ctx.cli.dump_circuit {
        ctx.write_json("resources_circuit.json", &circuit.to_json())?;
    }
    let out = json!({
        "report": report,
        "closed_form": {
            "formula": match cfg { NeuronConfig::Basis(_) => "pn+2m", NeuronConfig::Amplitude(_) => "log2(n)+2m+1" },
            "qubits": expected,
            "matches": expected == report.qubit_count,
        },
    });
    ctx.write_json("resources.json", &out)?;
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(json!({ "config": config, "neuron": spec, "rule": rule, "sample": x }))
}

fn replay(cli: &Cli, manifest: &Path) -> Result<Vec<PathBuf>> {
    let m: RunManifest =
        serde_json::from_str(&fs::read_to_string(manifest).map_err(|e| Error::file(manifest, e))?)?;
    let mut argv = vec!["qneuron".to_string()];
    argv.extend(m.argv.iter().cloned());
    argv.push("--out-dir".into());
    argv.push(cli.out_dir.display().to_string());
    let inner =
        Cli::try_parse_from(&argv).map_err(|e| Error::Config(format!("manifest argv: {e}")))?;
    if matches!(inner.command, Command::Replay { .. }) {
        return Err(Error::Config("a replay manifest cannot be replayed".into()));
    }
    let produced = run(&inner)?;
    let mut differing = Vec::new();
    for original in &m.outputs {
        let name = original
            .file_name()
            .ok_or_else(|| Error::Config("bad output path".into()))?;
        let again = cli.out_dir.join(name);
        let read = |p: &Path| fs::read(p).map_err(|e| Error::file(p, e));
        if read(original)? != read(&again)? {
            differing.push(name.to_string_lossy().into_owned());
        }
    }
    if !differing.is_empty() {
        return Err(Error::Config(format!(
            "replay differs in {}",
            differing.join(", ")
        )));
    }
    println!(
        "replayed {}: {} artifacts identical",
        m.command,
        m.outputs.len()
    );
    Ok(produced)
}

/// Runs one parsed invocation and returns the artifacts it wrote, the
/// manifest last.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(&cli.out_dir)?;
    if let Command::Replay { manifest } = &cli.command {
        return replay(cli, manifest);
    }
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    let mut ctx = Ctx {
        cli,
        exec,
        outputs: Vec::new(),
    };
    let (parameters, seed) = match &cli.command {
        Command::OracleDemo {
            table,
            construction,
            input,
        } => (
            oracle_demo(&mut ctx, table, *construction, input)?,
            Some(cli.seed.unwrap_or(0)),
        ),
        Command::NeuronRun { config, sample } => (
            neuron_run(&mut ctx, config, sample)?,
            Some(cli.seed.unwrap_or(0)),
        ),
        Command::ActivationPlot { name, fmt } => (activation_plot(&mut ctx, *name, *fmt)?, None),
        Command::TrainXor {
            eta,
            epochs,
            mode,
            init_scale,
        } => {
            let cfg = TrainConfig {
                eta: *eta,
                epochs: *epochs,
                seed: cli.seed.unwrap_or(TrainConfig::default().seed),
                init_scale: *init_scale,
                mode: *mode,
            };
            (train_xor(&mut ctx, cfg)?, Some(cfg.seed))
        }
        Command::Resources {
            config,
            rule,
            sample,
        } => (resources(&mut ctx, config, (*rule).into(), sample)?, None),
        Command::Replay { .. } => unreachable!("handled above"),
    };
    let manifest = RunManifest {
        command: cli.command.name().to_string(),
        parameters,
        argv: reconstruct_argv(cli),
        seed,
        outputs: ctx.outputs.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    };
    let name = format!("{}_manifest.json", manifest.command);
    let path = cli.out_dir.join(&name);
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(&path, text)?;
    let mut all = ctx.outputs;
    all.push(path);
    Ok(all)
}

/// Canonical argument vector of `cli`, without `--out-dir`.
fn reconstruct_argv(cli: &Cli) -> Vec<String> {
    fn opt(argv: &mut Vec<String>, flag: &str, value: impl ToString) {
        argv.push(flag.to_string());
        argv.push(value.to_string());
    }
    let mut argv = vec![cli.command.name().to_string()];
    match &cli.command {
        Command::OracleDemo {
            table,
            construction,
            input,
        } => {
            if let Some(t) = table {
                opt(&mut argv, "--table", t.display());
            }
            opt(&mut argv, "--construction", value_name(*construction));
            opt(&mut argv, "--input", input);
        }
        Command::NeuronRun { config, sample } => {
            opt(&mut argv, "--config", config.display());
            opt(&mut argv, "--sample", sample);
        }
        Command::ActivationPlot { name, fmt } => {
            opt(&mut argv, "--name", name);
            opt(&mut argv, "--fmt", fmt);
        }
        Command::TrainXor {
            eta,
            epochs,
            mode,
            init_scale,
        } => {
            opt(&mut argv, "--eta", eta);
            opt(&mut argv, "--epochs", epochs);
            opt(&mut argv, "--mode", mode);
            opt(&mut argv, "--init-scale", init_scale);
        }
        Command::Resources {
            config,
            rule,
            sample,
        } => {
            opt(&mut argv, "--config", config.display());
            opt(&mut argv, "--rule", value_name(*rule));
            if let Some(s) = sample {
                opt(&mut argv, "--sample", s);
            }
        }
        Command::Replay { manifest } => argv.push(manifest.display().to_string()),
    }
    if let Some(seed) = cli.seed {
        opt(&mut argv, "--seed", seed);
    }
    opt(&mut argv, "--shots", cli.shots);
    if let Some(n) = &cli.noise {
        opt(&mut argv, "--noise", n.display());
    }
    for (flag, on) in [
        ("--dump-circuit", cli.dump_circuit),
        ("--exact", cli.exact),
        ("--sequential", cli.sequential),
    ] {
        if on {
            argv.push(flag.into());
        }
    }
    argv
}

fn value_name(v: impl ValueEnum) -> String {
    v.to_possible_value()
        .map(|p| p.get_name().to_string())
        .unwrap_or_default()
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(&cli) {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
