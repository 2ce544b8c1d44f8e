//! Command-line front-end: operator decomposition, channel analysis and
//! teleportation runs, all reporting JSON on stdout.
//!
//! Exit codes: 0 success, 2 input error, 3 validation failure.

use std::fs;
use std::io::Read;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qudit_weyl::channel::{
    apply_and_correct, induced_weights, sample_error, validate_gamma, ErrorWeights, GammaTable,
};
use qudit_weyl::linalg::{random_state_with, seeded_rng};
use qudit_weyl::teleport::{teleport, teleport_forced, BellLabel, TeleportTranscript};
use qudit_weyl::weyl::{decompose, reconstruct};
use qudit_weyl::{ComplexMatrix, Dimension, PauliCoefficients, StateVector, PROTOCOL_TOL};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;

/// Largest reconstruction residual `decompose` accepts.
pub const DECOMPOSE_RESIDUAL_LIMIT: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(
    name = "qudit",
    version,
    about = "Generalized Pauli operators on qudits"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Expand a d×d matrix in the X_i Z_j basis.
    Decompose(CommonArgs),
    /// Pauli error weights of a γ table, or sampled errors with correction.
    Channel {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum, default_value_t = ChannelMode::Weights)]
        mode: ChannelMode,
    },
    /// Teleport a qudit through the Bell pair labelled (A, B).
    Teleport {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long = "A")]
        a: Option<usize>,
        #[arg(long = "B")]
        b: Option<usize>,
        /// Force Alice's first outcome (requires --M2).
        #[arg(long = "M1", requires = "m2")]
        m1: Option<usize>,
        /// Force Alice's second outcome (requires --M1).
        #[arg(long = "M2", requires = "m1")]
        m2: Option<usize>,
    },
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub d: usize,
    /// Input JSON file, or "-" for stdin.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChannelMode {
    Weights,
    Sample,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Decompose,
    Channel,
    Teleport,
}

/// Validated settings for one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub d: Dimension,
    pub input: Option<PathBuf>,
    pub seed: u64,
    pub trials: usize,
    pub a: Option<usize>,
    pub b: Option<usize>,
    pub forced: Option<(usize, usize)>,
    pub mode: ChannelMode,
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self, String> {
        let (command, common, mode, a, b, m1, m2) = match cli.command {
            CliCommand::Decompose(common) => (
                Command::Decompose,
                common,
                ChannelMode::Weights,
                None,
                None,
                None,
                None,
            ),
            CliCommand::Channel { common, mode } => {
                (Command::Channel, common, mode, None, None, None, None)
            }
            CliCommand::Teleport {
                common,
                a,
                b,
                m1,
                m2,
            } => (
                Command::Teleport,
                common,
                ChannelMode::Weights,
                a,
                b,
                m1,
                m2,
            ),
        };
        let d = Dimension::new(common.d).map_err(|e| e.to_string())?;
        if common.trials == 0 {
            return Err("--trials must be positive".into());
        }
        let forced = match (m1, m2) {
            (Some(m1), Some(m2)) => Some((m1, m2)),
            (None, None) => None,
            _ => return Err("--M1 and --M2 must be given together".into()),
        };
        Ok(Self {
            command,
            d,
            input: common.input,
            seed: common.seed,
            trials: common.trials,
            a,
            b,
            forced,
            mode,
        })
    }
}

/// Result of running one command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn report<T: Serialize>(code: i32, report: &T) -> Self {
        let mut stdout = serde_json::to_string_pretty(report).expect("reports serialize");
        stdout.push('\n');
        Self {
            code,
            stdout,
            stderr: String::new(),
        }
    }

    fn failure(code: i32, message: impl std::fmt::Display) -> Self {
        Self {
            code,
            stdout: String::new(),
            stderr: format!("error: {message}\n"),
        }
    }
}

/// `decompose` output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecomposeReport {
    #[serde(flatten)]
    pub coefficients: PauliCoefficients,
    pub residual: f64,
}

/// `channel --mode weights` output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightsReport {
    #[serde(flatten)]
    pub weights: ErrorWeights,
    pub sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledError {
    pub trial: usize,
    pub l: usize,
    pub k: usize,
    pub fidelity: f64,
}

/// `channel --mode sample` output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleReport {
    pub d: Dimension,
    pub seed: u64,
    pub samples: Vec<SampledError>,
}

/// One teleportation run as written by `teleport`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptReport {
    pub d: Dimension,
    #[serde(rename = "A")]
    pub a: usize,
    #[serde(rename = "B")]
    pub b: usize,
    #[serde(rename = "M1")]
    pub m1: usize,
    #[serde(rename = "M2")]
    pub m2: usize,
    pub fidelity: f64,
    #[serde(rename = "final")]
    pub final_state: StateVector,
}

impl From<&TeleportTranscript> for TranscriptReport {
    fn from(t: &TeleportTranscript) -> Self {
        Self {
            d: t.dim(),
            a: t.label.a(),
            b: t.label.b(),
            m1: t.m1,
            m2: t.m2,
            fidelity: t.fidelity,
            final_state: t.final_state.clone(),
        }
    }
}

fn read_input(cfg: &RunConfig, stdin: &mut dyn Read) -> Result<Option<String>, String> {
    let Some(path) = &cfg.input else {
        return Ok(None);
    };
    let mut text = String::new();
    if path.as_os_str() == "-" {
        stdin
            .read_to_string(&mut text)
            .map_err(|e| format!("reading stdin: {e}"))?;
    } else {
        text = fs::read_to_string(path).map_err(|e| format!("reading {}: {e}", path.display()))?;
    }
    Ok(Some(text))
}

fn parse<T: DeserializeOwned>(text: &str, what: &str) -> Result<T, String> {
    serde_json::from_str(text).map_err(|e| format!("malformed {what} JSON: {e}"))
}

fn required_input<T: DeserializeOwned>(
    cfg: &RunConfig,
    stdin: &mut dyn Read,
    what: &str,
) -> Result<T, String> {
    let text =
        read_input(cfg, stdin)?.ok_or_else(|| format!("--input with a {what} is required"))?;
    parse(&text, what)
}

/// Run the configured command, reading `--input -` from `stdin`.
pub fn run(cfg: &RunConfig, stdin: &mut dyn Read) -> Outcome {
    match cfg.command {
        Command::Decompose => cmd_decompose(cfg, stdin),
        Command::Channel => cmd_channel(cfg, stdin),
        Command::Teleport => cmd_teleport(cfg, stdin),
    }
}

pub fn cmd_decompose(cfg: &RunConfig, stdin: &mut dyn Read) -> Outcome {
    let matrix: ComplexMatrix = match required_input(cfg, stdin, "matrix") {
        Ok(m) => m,
        Err(e) => return Outcome::failure(EXIT_INPUT, e),
    };
    let coefficients = match decompose(&matrix, cfg.d) {
        Ok(c) => c,
        Err(e) => return Outcome::failure(EXIT_INPUT, e),
    };
    let residual = reconstruct(&coefficients).max_abs_diff(&matrix);
    let code = if residual < DECOMPOSE_RESIDUAL_LIMIT {
        EXIT_OK
    } else {
        EXIT_VALIDATION
    };
    Outcome::report(
        code,
        &DecomposeReport {
            coefficients,
            residual,
        },
    )
}

pub fn cmd_channel(cfg: &RunConfig, stdin: &mut dyn Read) -> Outcome {
    let gamma: GammaTable = match required_input(cfg, stdin, "gamma table") {
        Ok(g) => g,
        Err(e) => return Outcome::failure(EXIT_INPUT, e),
    };
    if gamma.dim() != cfg.d {
        return Outcome::failure(
            EXIT_INPUT,
            format!("gamma table has d = {}, expected {}", gamma.dim(), cfg.d),
        );
    }
    if let Err(v) = validate_gamma(&gamma) {
        return Outcome::failure(EXIT_VALIDATION, format!("invalid gamma table: {v}"));
    }
    let weights = match induced_weights(&gamma) {
        Ok(w) => w,
        Err(e) => return Outcome::failure(EXIT_VALIDATION, e),
    };
    match cfg.mode {
        ChannelMode::Weights => {
            let sum = weights.sum();
            Outcome::report(EXIT_OK, &WeightsReport { weights, sum })
        }
        ChannelMode::Sample => {
            let mut samples = Vec::with_capacity(cfg.trials);
            for trial in 0..cfg.trials {
                let mut rng = seeded_rng(cfg.seed.wrapping_add(trial as u64));
                let psi = random_state_with(cfg.d, &mut rng);
                let error = sample_error(&weights, &mut rng);
                let fidelity = match apply_and_correct(&psi, error)
                    .and_then(|run| run.corrected.fidelity(&psi))
                {
                    Ok(f) => f,
                    Err(e) => return Outcome::failure(EXIT_VALIDATION, e),
                };
                samples.push(SampledError {
                    trial,
                    l: error.l(),
                    k: error.k(),
                    fidelity,
                });
            }
            let code = if samples
                .iter()
                .all(|s| (s.fidelity - 1.0).abs() <= PROTOCOL_TOL)
            {
                EXIT_OK
            } else {
                EXIT_VALIDATION
            };
            Outcome::report(
                code,
                &SampleReport {
                    d: cfg.d,
                    seed: cfg.seed,
                    samples,
                },
            )
        }
    }
}

pub fn cmd_teleport(cfg: &RunConfig, stdin: &mut dyn Read) -> Outcome {
    let (Some(a), Some(b)) = (cfg.a, cfg.b) else {
        return Outcome::failure(EXIT_INPUT, "teleport requires --A and --B");
    };
    let label = match BellLabel::new(cfg.d, a, b) {
        Ok(l) => l,
        Err(e) => return Outcome::failure(EXIT_INPUT, format!("Bell label: {e}")),
    };
    if let Some((m1, m2)) = cfg.forced {
        if let Err(e) = cfg.d.check(m1).and_then(|_| cfg.d.check(m2)) {
            return Outcome::failure(EXIT_INPUT, format!("forced outcome: {e}"));
        }
    }
    let fixed_state: Option<StateVector> = match read_input(cfg, stdin) {
        Ok(Some(text)) => match parse::<StateVector>(&text, "state") {
            Ok(s) if s.dim() == cfg.d.get() => Some(s),
            Ok(s) => {
                return Outcome::failure(
                    EXIT_INPUT,
                    format!("state has dim {}, expected {}", s.dim(), cfg.d),
                )
            }
            Err(e) => return Outcome::failure(EXIT_INPUT, e),
        },
        Ok(None) => None,
        Err(e) => return Outcome::failure(EXIT_INPUT, e),
    };

    let mut transcripts = Vec::with_capacity(cfg.trials);
    for trial in 0..cfg.trials {
        let mut rng = seeded_rng(cfg.seed.wrapping_add(trial as u64));
        let psi = fixed_state
            .clone()
            .unwrap_or_else(|| random_state_with(cfg.d, &mut rng));
        let run = match cfg.forced {
            Some((m1, m2)) => teleport_forced(&psi, label, m1, m2),
            None => teleport(&psi, label, &mut rng),
        };
        match run {
            Ok(t) => transcripts.push(TranscriptReport::from(&t)),
            Err(e) => return Outcome::failure(EXIT_VALIDATION, e),
        }
    }
    let code = if transcripts
        .iter()
        .all(|t| (t.fidelity - 1.0).abs() <= PROTOCOL_TOL)
    {
        EXIT_OK
    } else {
        EXIT_VALIDATION
    };
    Outcome::report(code, &transcripts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(args: &[&str]) -> Result<RunConfig, String> {
        let cli = Cli::try_parse_from(std::iter::once("qudit").chain(args.iter().copied()))
            .map_err(|e| e.to_string())?;
        RunConfig::from_cli(cli)
    }

    fn run_with(args: &[&str], stdin: &str) -> Outcome {
        let cfg = config(args).unwrap();
        run(&cfg, &mut stdin.as_bytes())
    }

    #[test]
    fn config_requires_paired_outcomes() {
        assert!(config(&["teleport", "--d", "2", "--A", "0", "--B", "0", "--M1", "1"]).is_err());
        let cfg = config(&[
            "teleport", "--d", "2", "--A", "0", "--B", "0", "--M1", "1", "--M2", "0",
        ])
        .unwrap();
        assert_eq!(cfg.forced, Some((1, 0)));
    }

    #[test]
    fn config_rejects_small_dimension_and_zero_trials() {
        assert!(config(&["decompose", "--d", "1"]).is_err());
        assert!(config(&["channel", "--d", "2", "--trials", "0"]).is_err());
    }

    #[test]
    fn decompose_from_stdin() {
        let out = run_with(
            &["decompose", "--d", "2", "--input", "-"],
            r#"{"rows":2,"cols":2,"entries":[[1,0],[0,0],[0,0],[1,0]]}"#,
        );
        assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
        let report: DecomposeReport = serde_json::from_str(&out.stdout).unwrap();
        assert!(report.residual < 1e-12);
    }

    #[test]
    fn decompose_input_errors() {
        assert_eq!(
            run_with(&["decompose", "--d", "2", "--input", "-"], "{not json").code,
            EXIT_INPUT
        );
        let non_square = r#"{"rows":2,"cols":3,"entries":[[1,0],[0,0],[0,0],[1,0],[0,0],[0,0]]}"#;
        assert_eq!(
            run_with(&["decompose", "--d", "2", "--input", "-"], non_square).code,
            EXIT_INPUT
        );
        let wrong_d = r#"{"rows":2,"cols":2,"entries":[[1,0],[0,0],[0,0],[1,0]]}"#;
        assert_eq!(
            run_with(&["decompose", "--d", "3", "--input", "-"], wrong_d).code,
            EXIT_INPUT
        );
        assert_eq!(run_with(&["decompose", "--d", "2"], "").code, EXIT_INPUT);
    }

    #[test]
    fn channel_rejects_zero_table() {
        let zeros = r#"{"d":2,"gamma":[[[0,0],[0,0]],[[0,0],[0,0]]]}"#;
        let out = run_with(&["channel", "--d", "2", "--input", "-"], zeros);
        assert_eq!(out.code, EXIT_VALIDATION);
        assert!(out.stderr.contains("column 0"));
    }

    #[test]
    fn channel_sample_mode_corrects_everything() {
        let identity = r#"{"d":2,"gamma":[[[1,0],[0,0]],[[0,0],[1,0]]]}"#;
        let out = run_with(
            &[
                "channel", "--d", "2", "--input", "-", "--mode", "sample", "--trials", "100",
                "--seed", "3",
            ],
            identity,
        );
        assert_eq!(out.code, EXIT_OK);
        let report: SampleReport = serde_json::from_str(&out.stdout).unwrap();
        assert_eq!(report.samples.len(), 100);
        for s in &report.samples {
            assert_eq!(s.l, 0, "identity table only produces phase errors");
            assert!((s.fidelity - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn channel_dimension_mismatch() {
        let identity = r#"{"d":2,"gamma":[[[1,0],[0,0]],[[0,0],[1,0]]]}"#;
        assert_eq!(
            run_with(&["channel", "--d", "3", "--input", "-"], identity).code,
            EXIT_INPUT
        );
    }

    #[test]
    fn teleport_random_trials() {
        let out = run_with(
            &[
                "teleport", "--d", "2", "--A", "0", "--B", "0", "--trials", "10", "--seed", "1",
            ],
            "",
        );
        assert_eq!(out.code, EXIT_OK);
        let transcripts: Vec<TranscriptReport> = serde_json::from_str(&out.stdout).unwrap();
        assert_eq!(transcripts.len(), 10);
        assert!(transcripts.iter().all(|t| (t.fidelity - 1.0).abs() < 1e-10));
    }

    #[test]
    fn teleport_input_errors() {
        assert_eq!(
            run_with(&["teleport", "--d", "2", "--A", "0"], "").code,
            EXIT_INPUT
        );
        assert_eq!(
            run_with(&["teleport", "--d", "2", "--A", "2", "--B", "0"], "").code,
            EXIT_INPUT
        );
        assert_eq!(
            run_with(
                &["teleport", "--d", "2", "--A", "0", "--B", "0", "--M1", "0", "--M2", "5"],
                ""
            )
            .code,
            EXIT_INPUT
        );
        let qutrit = r#"{"dim":3,"amps":[[1,0],[0,0],[0,0]]}"#;
        assert_eq!(
            run_with(
                &["teleport", "--d", "2", "--A", "0", "--B", "0", "--input", "-"],
                qutrit
            )
            .code,
            EXIT_INPUT
        );
    }

    #[test]
    fn teleport_is_deterministic() {
        let args = [
            "teleport", "--d", "3", "--A", "1", "--B", "2", "--trials", "5", "--seed", "9",
        ];
        assert_eq!(run_with(&args, ""), run_with(&args, ""));
    }
}
