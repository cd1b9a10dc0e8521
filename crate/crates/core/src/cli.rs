//! Command-line driver: effective operator, scenarios, error budget, eta
//! sweeps and arbitrary circuit files.
//!
//! Exit codes: 0 success, 1 numerical contract violation, 2 usage or parse
//! error. Probabilities are rounded to 6 significant digits and amplitudes
//! are printed as `[re, im]` pairs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;

use crate::circuit::{auto_compensation_phase, build_filter_circuit, parse_circuit, Circuit, FilterSpec, PolarizationOperator};
use crate::detection::{DetectorModel, Ensemble};
use crate::error::Error;
use crate::fock::FockState;
use crate::polarization::PathModes;
use crate::scenarios::{
    encode2, encode3, entangle_independent, error_analysis, filter_pair, ghz4, max_entangled_state,
    ErrorReport, FilterOutcome, MaxEntangledParams, QubitCoeffs, REFERENCE_ESTIMATES,
};

const DIAGONAL_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(name = "fockfilter", version, about = "Post-selected linear-optics simulator and polarization filter")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScenarioName {
    Entangle,
    MaxEntangled,
    Ghz4,
    Encode2,
    Encode3,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the filter's effective 4×4 operator on (HH, HV, VH, VV).
    Operator {
        /// Reflectivity of the vertical-rail attenuator.
        #[arg(long, default_value_t = 0.75)]
        attenuator_r: f64,
    },
    /// Run one of the prebuilt filter experiments.
    #[command(allow_negative_numbers = true)]
    Scenario {
        name: ScenarioName,
        /// H coefficient of the qubit photon (encode2, encode3), e.g. `0.6` or `0.6+0.1i`.
        #[arg(long, default_value = "1")]
        ch: Complex64,
        /// V coefficient of the qubit photon.
        #[arg(long, default_value = "0")]
        cv: Complex64,
        /// c1 of the maximally entangled family.
        #[arg(long, default_value = "1")]
        c1: Complex64,
        /// c2 of the maximally entangled family.
        #[arg(long, default_value = "0")]
        c2: Complex64,
        /// Relative phase of the maximally entangled family, radians.
        #[arg(long, default_value_t = 0.0)]
        phi: f64,
        /// Draw random maximally entangled parameters (|c1| ≥ 0.1) from this seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Detector error budget of the filter.
    ErrorAnalysis {
        #[arg(long, default_value_t = 0.88)]
        eta: f64,
        #[arg(long, default_value_t = 0.0)]
        dark: f64,
        /// Dark-count rate in counts per second.
        #[arg(long, default_value_t = 1e4)]
        dark_rate: f64,
        /// Detection window in seconds.
        #[arg(long, default_value_t = 1e-9)]
        window: f64,
    },
    /// Error budget over a uniform grid of detector efficiencies.
    Sweep {
        #[arg(long, default_value_t = 0.5)]
        eta_from: f64,
        #[arg(long, default_value_t = 1.0)]
        eta_to: f64,
        #[arg(long, default_value_t = 11)]
        steps: usize,
        #[arg(long, default_value_t = 0.0)]
        dark: f64,
    },
    /// Run a JSON circuit file.
    Circuit {
        path: PathBuf,
        /// Input photons as comma-separated mode labels; a repeated label adds
        /// a photon. Defaults to one photon in every declared input mode.
        #[arg(long, conflicts_with = "polarization")]
        input: Option<String>,
        /// Polarization string such as `HV`: photon k occupies declared input
        /// mode 2k (H) or 2k+1 (V).
        #[arg(long)]
        polarization: Option<String>,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Contract(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Contract(_) => 1,
        }
    }
}

fn usage(e: impl ToString) -> CliError {
    CliError::Usage(e.to_string())
}

fn contract(e: Error) -> CliError {
    CliError::Contract(e.to_string())
}

/// Rounds to 6 significant digits.
pub fn sig6(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    let r: f64 = format!("{x:.5e}").parse().expect("formatted float parses");
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn pair(z: Complex64) -> [f64; 2] {
    [sig6(z.re), sig6(z.im)]
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

/// Parses arguments and runs the command, returning the text to print.
pub fn execute(cli: &Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::Operator { attenuator_r } => cmd_operator(*attenuator_r, cli.format),
        Command::Scenario {
            name,
            ch,
            cv,
            c1,
            c2,
            phi,
            seed,
        } => cmd_scenario(*name, (*ch, *cv), (*c1, *c2, *phi), *seed, cli.format),
        Command::ErrorAnalysis {
            eta,
            dark,
            dark_rate,
            window,
        } => cmd_error_analysis(*eta, *dark, *dark_rate, *window, cli.format),
        Command::Sweep {
            eta_from,
            eta_to,
            steps,
            dark,
        } => cmd_sweep(*eta_from, *eta_to, *steps, *dark, cli.format),
        Command::Circuit {
            path,
            input,
            polarization,
        } => cmd_circuit(path, input.as_deref(), polarization.as_deref(), cli.format),
    }
}

#[derive(Serialize)]
struct OperatorReport {
    attenuator_r: f64,
    compensation_phase: f64,
    labels: [&'static str; 4],
    /// `matrix[out][in]` as `[re, im]`.
    matrix: Vec<Vec<[f64; 2]>>,
    acceptance: BTreeMap<&'static str, f64>,
    max_off_diagonal: f64,
}

fn operator_report(op: &PolarizationOperator, r: f64, phi: f64) -> OperatorReport {
    let labels = PolarizationOperator::labels();
    OperatorReport {
        attenuator_r: r,
        compensation_phase: sig6(phi),
        labels,
        matrix: (0..4)
            .map(|o| (0..4).map(|i| pair(op.get(o, i))).collect())
            .collect(),
        acceptance: labels
            .iter()
            .zip(op.column_acceptance())
            .map(|(l, p)| (*l, sig6(p)))
            .collect(),
        max_off_diagonal: sig6(op.max_off_diagonal()),
    }
}

pub fn cmd_operator(attenuator_r: f64, format: Format) -> Result<String, CliError> {
    let spec = FilterSpec::default().with_attenuator(attenuator_r);
    let circuit = build_filter_circuit(&spec).map_err(usage)?;
    let phi = auto_compensation_phase(&spec).map_err(contract)?;
    let op = circuit.effective_polarization_operator().map_err(contract)?;
    let report = operator_report(&op, attenuator_r, phi);
    let out = match format {
        Format::Json => json(&report),
        Format::Csv => {
            let mut s = String::new();
            for row in &report.matrix {
                let cells: Vec<String> = row.iter().flat_map(|c| c.map(|x| x.to_string())).collect();
                writeln!(s, "{}", cells.join(",")).unwrap();
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            writeln!(s, "attenuator R = {attenuator_r}, compensation phase = {}", report.compensation_phase).unwrap();
            writeln!(s, "out\\in {}", report.labels.map(|l| format!("{l:>22}")).join("")).unwrap();
            for (label, row) in report.labels.iter().zip(&report.matrix) {
                let cells: String = row
                    .iter()
                    .map(|[re, im]| format!("{:>22}", format!("[{re}, {im}]")))
                    .collect();
                writeln!(s, "{label:<6} {cells}").unwrap();
            }
            writeln!(s, "acceptance:").unwrap();
            for l in report.labels {
                writeln!(s, "  {l}: {}", report.acceptance[l]).unwrap();
            }
            s
        }
    };
    if !op.is_diagonal(DIAGONAL_TOLERANCE) {
        return Err(CliError::Contract(format!(
            "{out}operator is not diagonal: largest off-diagonal magnitude {:e}",
            op.max_off_diagonal()
        )));
    }
    Ok(out)
}

#[derive(Serialize)]
struct LabeledAmplitude {
    label: String,
    amplitude: [f64; 2],
}

#[derive(Serialize)]
struct ScenarioReport {
    scenario: String,
    input: String,
    /// Normalized output amplitudes in the one-photon-per-path subspace.
    output: Vec<LabeledAmplitude>,
    acceptance: f64,
    concurrence: Option<f64>,
}

fn random_params(seed: u64) -> MaxEntangledParams {
    // c1 and c2 share a phase so the drawn input is itself maximally entangled
    let mut rng = StdRng::seed_from_u64(seed);
    let mag = rng.random_range(0.1f64..=1.0);
    let common = rng.random_range(0.0..std::f64::consts::TAU);
    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
    let c1 = Complex64::from_polar(mag, common);
    let c2 = Complex64::from_polar(sign * (1.0 - mag * mag).max(0.0).sqrt(), common);
    let phi = rng.random_range(0.0..std::f64::consts::TAU);
    MaxEntangledParams { c1, c2, phi }
}

fn fmt_c(z: Complex64) -> String {
    let [re, im] = pair(z);
    format!("[{re}, {im}]")
}

pub fn cmd_scenario(
    name: ScenarioName,
    qubit: (Complex64, Complex64),
    family: (Complex64, Complex64, f64),
    seed: Option<u64>,
    format: Format,
) -> Result<String, CliError> {
    let qubit = || QubitCoeffs::new(qubit.0, qubit.1).map_err(usage);
    let (label, input, outcome): (&str, String, FilterOutcome) = match name {
        ScenarioName::Entangle => (
            "entangle",
            "|R>|L> with R = (H + iV)/sqrt2, L = (H - iV)/sqrt2".into(),
            entangle_independent().map_err(contract)?,
        ),
        ScenarioName::MaxEntangled => {
            let p = match seed {
                Some(s) => random_params(s),
                None => MaxEntangledParams::new(family.0, family.1, family.2).map_err(usage)?,
            };
            let state = max_entangled_state(&p).map_err(usage)?;
            (
                "max-entangled",
                format!(
                    "maximally entangled pair, c1 = {}, c2 = {}, phi = {}",
                    fmt_c(p.c1),
                    fmt_c(p.c2),
                    sig6(p.phi)
                ),
                filter_pair(&state, DetectorModel::ideal()).map_err(contract)?,
            )
        }
        ScenarioName::Ghz4 => (
            "ghz4",
            "Bell pairs (1,2) and (3,4) in (HH + VV)/sqrt2; photons 2 and 3 filtered".into(),
            ghz4().map_err(contract)?,
        ),
        ScenarioName::Encode2 => {
            let q = qubit()?;
            (
                "encode2",
                format!("(H + V)/sqrt2 and qubit cH = {}, cV = {}", fmt_c(q.ch), fmt_c(q.cv)),
                encode2(&q).map_err(contract)?,
            )
        }
        ScenarioName::Encode3 => {
            let q = qubit()?;
            (
                "encode3",
                format!(
                    "Bell pair (1,2) in (HH + VV)/sqrt2, photon 2 filtered with qubit cH = {}, cV = {}",
                    fmt_c(q.ch),
                    fmt_c(q.cv)
                ),
                encode3(&q).map_err(contract)?,
            )
        }
    };
    let amps = outcome
        .normalized_amplitudes()
        .ok_or_else(|| CliError::Contract("scenario output is not pure".into()))?;
    let report = ScenarioReport {
        scenario: label.into(),
        input,
        output: amps
            .into_iter()
            .map(|(label, a)| LabeledAmplitude {
                label,
                amplitude: pair(a),
            })
            .collect(),
        acceptance: sig6(outcome.acceptance),
        concurrence: outcome.concurrence().map_err(contract)?.map(sig6),
    };
    Ok(match format {
        Format::Json => json(&report),
        Format::Csv => {
            let mut s = String::from("kind,label,re,im\n");
            for a in &report.output {
                writeln!(s, "amplitude,{},{},{}", a.label, a.amplitude[0], a.amplitude[1]).unwrap();
            }
            writeln!(s, "acceptance,,{},", report.acceptance).unwrap();
            if let Some(c) = report.concurrence {
                writeln!(s, "concurrence,,{c},").unwrap();
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            writeln!(s, "scenario: {}", report.scenario).unwrap();
            writeln!(s, "input: {}", report.input).unwrap();
            writeln!(s, "normalized output:").unwrap();
            for a in &report.output {
                writeln!(s, "  {}: [{}, {}]", a.label, a.amplitude[0], a.amplitude[1]).unwrap();
            }
            writeln!(s, "acceptance: {}", report.acceptance).unwrap();
            if let Some(c) = report.concurrence {
                writeln!(s, "concurrence: {c}").unwrap();
            }
            s
        }
    })
}

fn rounded(r: &ErrorReport) -> ErrorReport {
    ErrorReport {
        eta: r.eta,
        dark: r.dark,
        misread_2_as_1: sig6(r.misread_2_as_1),
        hv_error_rate: sig6(r.hv_error_rate),
        ideal_success_prob: sig6(r.ideal_success_prob),
        false_transmission_prob: sig6(r.false_transmission_prob),
        lossy_acceptance: sig6(r.lossy_acceptance),
        mixture_entangled_fraction: sig6(r.mixture_entangled_fraction),
        mixture_single_photon_fraction: sig6(r.mixture_single_photon_fraction),
        dark_counts_per_pulse: sig6(r.dark_counts_per_pulse),
    }
}

fn comparison_rows(r: &ErrorReport) -> Vec<(&'static str, f64, Option<f64>)> {
    let q = REFERENCE_ESTIMATES;
    vec![
        ("misread_2_as_1", r.misread_2_as_1, Some(q.misread_2_as_1)),
        ("hv_error_rate", r.hv_error_rate, Some(q.hv_error_rate)),
        ("ideal_success_prob", r.ideal_success_prob, Some(q.ideal_success_prob)),
        ("false_transmission_prob", r.false_transmission_prob, Some(q.false_transmission_prob)),
        ("lossy_acceptance", r.lossy_acceptance, None),
        ("mixture_entangled_fraction", r.mixture_entangled_fraction, Some(q.mixture_entangled_fraction)),
        (
            "mixture_single_photon_fraction",
            r.mixture_single_photon_fraction,
            Some(q.mixture_single_photon_fraction),
        ),
        ("dark_counts_per_pulse", r.dark_counts_per_pulse, Some(q.dark_counts_per_pulse)),
    ]
}

#[derive(Serialize)]
struct ErrorAnalysisReport {
    dark_rate_cps: f64,
    window_s: f64,
    simulated: ErrorReport,
    reference: crate::scenarios::ReferenceEstimates,
}

pub fn cmd_error_analysis(
    eta: f64,
    dark: f64,
    dark_rate: f64,
    window: f64,
    format: Format,
) -> Result<String, CliError> {
    DetectorModel::lossy(eta, dark).map_err(usage)?;
    if !(dark_rate >= 0.0 && window >= 0.0 && dark_rate.is_finite() && window.is_finite()) {
        return Err(CliError::Usage(format!(
            "dark rate and window must be non-negative (got {dark_rate}, {window})"
        )));
    }
    let report = rounded(&error_analysis(eta, dark, dark_rate, window).map_err(contract)?);
    Ok(match format {
        Format::Json => json(&ErrorAnalysisReport {
            dark_rate_cps: dark_rate,
            window_s: window,
            simulated: report,
            reference: REFERENCE_ESTIMATES,
        }),
        Format::Csv => {
            let mut s = String::from("quantity,simulated,reference\n");
            for (name, sim, reference) in comparison_rows(&report) {
                let reference = reference.map(|r| r.to_string()).unwrap_or_default();
                writeln!(s, "{name},{sim},{reference}").unwrap();
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            writeln!(
                s,
                "eta = {eta}, dark = {dark}, dark rate = {dark_rate} cps, window = {window} s"
            )
            .unwrap();
            writeln!(s, "{:<32}{:>14}{:>14}", "quantity", "simulated", "reference").unwrap();
            for (name, sim, reference) in comparison_rows(&report) {
                let reference = reference.map(|r| r.to_string()).unwrap_or_else(|| "-".into());
                writeln!(s, "{name:<32}{sim:>14}{reference:>14}").unwrap();
            }
            s
        }
    })
}

pub fn cmd_sweep(eta_from: f64, eta_to: f64, steps: usize, dark: f64, format: Format) -> Result<String, CliError> {
    if steps == 0 {
        return Err(CliError::Usage("sweep needs at least one step".into()));
    }
    for eta in [eta_from, eta_to] {
        DetectorModel::lossy(eta, dark).map_err(usage)?;
    }
    let grid: Vec<f64> = (0..steps)
        .map(|k| {
            if steps == 1 {
                eta_from
            } else {
                eta_from + (eta_to - eta_from) * k as f64 / (steps - 1) as f64
            }
        })
        .collect();
    let rows = grid
        .par_iter()
        .map(|&eta| error_analysis(eta, dark, 0.0, 0.0).map(|r| rounded(&r)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(contract)?;
    Ok(match format {
        Format::Json => json(&rows),
        Format::Csv | Format::Text => {
            let sep = if format == Format::Csv { "," } else { " " };
            let header = [
                "eta",
                "misread_2_as_1",
                "hv_error_rate",
                "false_transmission_prob",
                "lossy_acceptance",
                "mixture_entangled_fraction",
                "mixture_single_photon_fraction",
            ];
            let mut s = header.join(sep);
            s.push('\n');
            for r in &rows {
                let cells = [
                    sig6(r.eta),
                    r.misread_2_as_1,
                    r.hv_error_rate,
                    r.false_transmission_prob,
                    r.lossy_acceptance,
                    r.mixture_entangled_fraction,
                    r.mixture_single_photon_fraction,
                ];
                let cells: Vec<String> = cells.iter().map(|c| c.to_string()).collect();
                writeln!(s, "{}", cells.join(sep)).unwrap();
            }
            s
        }
    })
}

/// Builds the input state of a circuit run.
pub fn circuit_input(circuit: &Circuit, input: Option<&str>, polarization: Option<&str>) -> crate::Result<FockState> {
    let reg = circuit.registry();
    let mut counts: BTreeMap<usize, u8> = BTreeMap::new();
    match (input, polarization) {
        (Some(list), _) => {
            for label in list.split(',').map(str::trim).filter(|l| !l.is_empty()) {
                *counts.entry(reg.require(label)?).or_default() += 1;
            }
        }
        (None, Some(pol)) => {
            let inputs = circuit.inputs();
            if inputs.len() != 2 * pol.chars().count() {
                return Err(Error::InvalidInput(format!(
                    "polarization `{pol}` needs {} declared inputs, circuit has {}",
                    2 * pol.chars().count(),
                    inputs.len()
                )));
            }
            for (k, c) in pol.chars().enumerate() {
                let path = PathModes::new(inputs[2 * k], inputs[2 * k + 1]);
                let mode = match c {
                    'H' | 'h' => path.h,
                    'V' | 'v' => path.v,
                    other => {
                        return Err(Error::InvalidInput(format!("polarization symbol `{other}`")))
                    }
                };
                *counts.entry(mode).or_default() += 1;
            }
        }
        (None, None) => {
            for &m in circuit.inputs() {
                *counts.entry(m).or_default() += 1;
            }
        }
    }
    let photons: Vec<(&str, u8)> = counts
        .iter()
        .map(|(&m, &n)| (reg.labels()[m].as_str(), n))
        .collect();
    FockState::from_labels(reg, &photons)
}

#[derive(Serialize)]
struct TermReport {
    occupation: BTreeMap<String, u8>,
    amplitude: [f64; 2],
}

#[derive(Serialize)]
struct BranchReport {
    weight: f64,
    /// `√weight` times the branch's normalized amplitudes; for a pure run these
    /// are the conditional (unnormalized) output amplitudes.
    terms: Vec<TermReport>,
}

#[derive(Serialize)]
struct CircuitReport {
    input: BTreeMap<String, u8>,
    acceptance: f64,
    branches: Vec<BranchReport>,
}

fn occupation_map(reg: &crate::fock::ModeRegistry, counts: &[u8], only: &[usize]) -> BTreeMap<String, u8> {
    only.iter()
        .filter(|&&m| counts[m] > 0)
        .map(|&m| (reg.labels()[m].clone(), counts[m]))
        .collect()
}

fn format_occupation(occ: &BTreeMap<String, u8>) -> String {
    if occ.is_empty() {
        return "vacuum".into();
    }
    occ.iter()
        .map(|(l, n)| format!("{l}={n}"))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn cmd_circuit(
    path: &std::path::Path,
    input: Option<&str>,
    polarization: Option<&str>,
    format: Format,
) -> Result<String, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let circuit = parse_circuit(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let state = circuit_input(&circuit, input, polarization).map_err(usage)?;
    let out = circuit.run(&Ensemble::pure(&state)).map_err(contract)?;
    let reg = circuit.registry();
    let all_modes: Vec<usize> = (0..reg.len()).collect();
    let shown = if circuit.outputs().is_empty() {
        all_modes.clone()
    } else {
        circuit.outputs().to_vec()
    };
    let input_occ = state
        .terms()
        .next()
        .map(|(occ, _)| occupation_map(reg, occ.counts(), &all_modes))
        .unwrap_or_default();
    let report = CircuitReport {
        input: input_occ,
        acceptance: sig6(out.acceptance_probability()),
        branches: out
            .branches()
            .iter()
            .map(|b| BranchReport {
                weight: sig6(b.weight),
                terms: b
                    .state
                    .terms()
                    .map(|(occ, a)| TermReport {
                        occupation: occupation_map(reg, occ.counts(), &shown),
                        amplitude: pair(a * b.weight.sqrt()),
                    })
                    .collect(),
            })
            .collect(),
    };
    Ok(match format {
        Format::Json => json(&report),
        Format::Csv => {
            let mut s = String::from("branch,weight,occupation,re,im\n");
            for (i, b) in report.branches.iter().enumerate() {
                for t in &b.terms {
                    writeln!(
                        s,
                        "{i},{},{},{},{}",
                        b.weight,
                        format_occupation(&t.occupation),
                        t.amplitude[0],
                        t.amplitude[1]
                    )
                    .unwrap();
                }
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            writeln!(s, "input: {}", format_occupation(&report.input)).unwrap();
            writeln!(s, "acceptance: {}", report.acceptance).unwrap();
            for (i, b) in report.branches.iter().enumerate() {
                writeln!(s, "branch {i} (weight {}):", b.weight).unwrap();
                for t in &b.terms {
                    writeln!(
                        s,
                        "  {}: [{}, {}]",
                        format_occupation(&t.occupation),
                        t.amplitude[0],
                        t.amplitude[1]
                    )
                    .unwrap();
                }
            }
            s
        }
    })
}
