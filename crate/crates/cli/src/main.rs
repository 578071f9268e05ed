//! Command-line front end: load scenario/state/channel files, run the
//! library operations, and emit tables, spectra, and verification reports.
//!
//! Exit codes: 0 success, 1 contract failure (a residual above tolerance or
//! a non-exact inverse), 2 input or parse error. Parse errors print nothing
//! to stdout.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use stot::bayes::{
    bayesian_inverse, reversed_mh, spatiotemporal_bayes_check, verify_bayes_rule,
    BayesianInverseResult, InverseStatus, SupportReport,
};
use stot::distributions::{
    born_evaluate, disturbance_term, lvn_distribution, mh_distribution, DistributionKind,
    JointQuasiDistribution, TpsmScenario,
};
use stot::explorer::{
    bloch_grid, born_existence_check, qubit_necessity_scan, reconstruct_from_mh,
    search_max_disturbance, BornExistenceVerdict, NecessityScanReport, SearchBudget,
    SufficientConditionHits, TomographicFrame,
};
use stot::io::{
    channel_from_json, distribution_to_csv, scenario_from_json, scenario_to_file, state_from_json,
    to_json_pretty, DistributionFile, ScenarioFile,
};
use stot::matrix::{hadamard, pauli_x, pauli_y, pauli_z, ComplexMatrix};
use stot::sot::state_over_time;
use stot::states::{DensityOperator, ProjectiveMeasurement};
use stot::{Error, QuantumChannel, SpectrumReport, Tolerances};

#[derive(Parser)]
#[command(
    name = "stot",
    version,
    about = "Sequential-measurement quasiprobability toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Pass/fail tolerance for residual checks; overrides STOT_TOL.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Seed for randomized searches; overrides any seed in the input file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Render tables as CSV instead of aligned text.
    #[arg(long, global = true)]
    csv: bool,
    /// Write the JSON report to this path instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Suppress the human-readable output; only the JSON report is emitted.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate all four outcome tables of a scenario and check identities.
    Evaluate { scenario: PathBuf },
    /// Spectral report of the state over time built from a state and channel.
    Spectrum { state: PathBuf, channel: PathBuf },
    /// Solve for the Bayesian inverse of the channel with respect to the state.
    Invert { state: PathBuf, channel: PathBuf },
    /// Verify a claimed inverse: Bayes rule, time reversal, conditional rule.
    Verify { scenario: PathBuf, inverse: PathBuf },
    /// Randomized searches over projectors and state/channel grids.
    Search {
        #[arg(long, value_enum)]
        mode: SearchMode,
        #[arg(long)]
        state: Option<PathBuf>,
        /// Channel file; repeatable for qubit-scan families.
        #[arg(long = "channel")]
        channels: Vec<PathBuf>,
        /// Sample count and ascent iteration cap.
        #[arg(long, default_value_t = 200)]
        budget: usize,
        /// Bloch-ball grid resolution for qubit-scan.
        #[arg(long, default_value_t = 2)]
        grid: usize,
    },
    /// Reconstruct the state over time tomographically and compare.
    Tomo { state: PathBuf, channel: PathBuf },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SearchMode {
    MaxDisturbance,
    BornExistence,
    QubitScan,
}

struct Ctx {
    tol: Option<f64>,
    seed: Option<u64>,
    csv: bool,
    out: Option<PathBuf>,
    quiet: bool,
}

impl Ctx {
    /// Explicit --tol, else STOT_TOL, else the per-check default.
    fn tol_or(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut ctx = Ctx {
        tol: cli.tol,
        seed: cli.seed,
        csv: cli.csv,
        out: cli.out,
        quiet: cli.quiet,
    };
    if ctx.tol.is_none() {
        if let Ok(raw) = std::env::var("STOT_TOL") {
            match raw.parse::<f64>() {
                Ok(v) => ctx.tol = Some(v),
                Err(_) => {
                    eprintln!("error: STOT_TOL is not a number: {raw}");
                    return ExitCode::from(2);
                }
            }
        }
    }
    match run(cli.command, &ctx) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command, ctx: &Ctx) -> Result<u8, Error> {
    match command {
        Command::Evaluate { scenario } => cmd_evaluate(&scenario, ctx),
        Command::Spectrum { state, channel } => cmd_spectrum(&state, &channel, ctx),
        Command::Invert { state, channel } => cmd_invert(&state, &channel, ctx),
        Command::Verify { scenario, inverse } => cmd_verify(&scenario, &inverse, ctx),
        Command::Search {
            mode,
            state,
            channels,
            budget,
            grid,
        } => cmd_search(mode, state.as_deref(), &channels, budget, grid, ctx),
        Command::Tomo { state, channel } => cmd_tomo(&state, &channel, ctx),
    }
}

fn read_file(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn load_scenario(path: &Path) -> Result<(TpsmScenario, Option<u64>), Error> {
    let loaded = scenario_from_json(&read_file(path)?, &Tolerances::default())?;
    Ok((loaded.scenario, loaded.seed))
}

fn load_state(path: &Path) -> Result<DensityOperator, Error> {
    state_from_json(&read_file(path)?)
}

fn load_channel(path: &Path) -> Result<QuantumChannel, Error> {
    channel_from_json(&read_file(path)?)
}

/// Emit the report: human text to stdout unless quiet; JSON to --out or, when
/// quiet or no human text was produced, to stdout.
fn emit<T: Serialize>(ctx: &Ctx, human: &str, report: &T) -> Result<(), Error> {
    if !ctx.quiet {
        print!("{human}");
    }
    let json = to_json_pretty(report)?;
    match &ctx.out {
        Some(path) => std::fs::write(path, json + "\n").map_err(|e| Error::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })?,
        None => println!("{json}"),
    }
    Ok(())
}

fn render_table(buf: &mut String, d: &JointQuasiDistribution, csv: bool) {
    let kind = match d.kind() {
        DistributionKind::Lvn => "lvn",
        DistributionKind::Mh => "mh",
        DistributionKind::Disturbance => "disturbance",
        DistributionKind::ReversedMh => "reversed_mh",
    };
    if csv {
        let _ = writeln!(buf, "# table: {kind}");
        buf.push_str(&distribution_to_csv(d));
        buf.push('\n');
        return;
    }
    let _ = writeln!(buf, "table: {kind}");
    let label_width = d
        .row_labels()
        .iter()
        .map(|l| l.len())
        .max()
        .unwrap_or(1)
        .max(4);
    let _ = write!(buf, "{:label_width$}", "");
    for col in d.col_labels() {
        let _ = write!(buf, " {col:>13}");
    }
    buf.push('\n');
    for i in 0..d.num_rows() {
        let _ = write!(buf, "{:label_width$}", d.row_labels()[i]);
        for j in 0..d.num_cols() {
            let _ = write!(buf, " {:>13.6e}", d.get(i, j));
        }
        buf.push('\n');
    }
    buf.push('\n');
}

#[derive(Serialize)]
struct EvaluateTables {
    lvn: DistributionFile,
    mh: DistributionFile,
    disturbance: DistributionFile,
    born: DistributionFile,
}

#[derive(Serialize)]
struct EvaluateResiduals {
    /// max |Q − P − D|
    identity: f64,
    /// max |Q − Tr[ϱ(P⊗Q)]|
    born: f64,
}

#[derive(Serialize)]
struct EvaluateReport {
    tables: EvaluateTables,
    residuals: EvaluateResiduals,
    tolerance: f64,
    pass: bool,
}

fn cmd_evaluate(path: &Path, ctx: &Ctx) -> Result<u8, Error> {
    let (scenario, _) = load_scenario(path)?;
    let tol = ctx.tol_or(1e-10);

    let p = lvn_distribution(&scenario)?;
    let q = mh_distribution(&scenario)?;
    let d = disturbance_term(&scenario)?;
    let sot = state_over_time(scenario.rho(), scenario.channel())?;
    let born = born_evaluate(&scenario, &sot)?;

    let identity_residual = q
        .entrywise_sub(&p, DistributionKind::Mh)
        .entrywise_sub(&d, DistributionKind::Mh)
        .max_abs_entry();
    let born_residual = q.max_abs_diff(&born);
    let pass = identity_residual <= tol && born_residual <= tol;

    let mut human = String::new();
    for table in [&p, &q, &d, &born] {
        render_table(&mut human, table, ctx.csv);
    }
    let _ = writeln!(
        human,
        "identity residual (max |Q - P - D|): {identity_residual:e}"
    );
    let _ = writeln!(human, "born residual (max |Q - born|): {born_residual:e}");
    let _ = writeln!(human, "pass: {pass} (tolerance {tol:e})");

    let report = EvaluateReport {
        tables: EvaluateTables {
            lvn: (&p).into(),
            mh: (&q).into(),
            disturbance: (&d).into(),
            born: (&born).into(),
        },
        residuals: EvaluateResiduals {
            identity: identity_residual,
            born: born_residual,
        },
        tolerance: tol,
        pass,
    };
    emit(ctx, &human, &report)?;
    Ok(u8::from(!pass))
}

fn cmd_spectrum(state_path: &Path, channel_path: &Path, ctx: &Ctx) -> Result<u8, Error> {
    let rho = load_state(state_path)?;
    let e = load_channel(channel_path)?;
    let report: SpectrumReport = state_over_time(&rho, &e)?.spectrum_report()?;

    let mut human = String::new();
    let eig_strings: Vec<String> = report
        .eigenvalues
        .iter()
        .map(|l| format!("{l:.12}"))
        .collect();
    let _ = writeln!(human, "eigenvalues: {}", eig_strings.join(", "));
    let _ = writeln!(human, "negativity: {}", report.negativity);
    let _ = writeln!(human, "causality measure: {}", report.causality_measure);
    let _ = writeln!(human, "psd: {}", report.is_psd);
    emit(ctx, &human, &report)?;
    Ok(0)
}

#[derive(Serialize)]
struct InvertReport {
    status: InverseStatus,
    residual: f64,
    min_choi_eigenvalue: Option<f64>,
    support: SupportReport,
    jamiolkowski_solution: ComplexMatrix,
    kraus: Option<Vec<ComplexMatrix>>,
}

fn cmd_invert(state_path: &Path, channel_path: &Path, ctx: &Ctx) -> Result<u8, Error> {
    let rho = load_state(state_path)?;
    let e = load_channel(channel_path)?;
    let result = match bayesian_inverse(&e, &rho) {
        Ok(r) => r,
        Err(Error::NoSolution {
            offending_blocks,
            residual,
        }) => {
            let sigma = e.apply_state(&rho)?;
            let eig = sigma.eig()?;
            let support_dim = eig.eigenvalues.iter().filter(|&&s| s > 5e-11).count();
            let diagnostics = SupportReport {
                kernel_dim: eig.eigenvalues.len() - support_dim,
                eigenvalues: eig.eigenvalues,
                support_dim,
            };
            BayesianInverseResult::no_solution(
                offending_blocks,
                residual,
                diagnostics,
                e.dim_in() * e.dim_out(),
            )
        }
        Err(other) => return Err(other),
    };

    let min_choi = match (&result.status, &result.channel) {
        (InverseStatus::Exact, Some(f)) => Some(f.choi_min_eigenvalue()),
        (
            InverseStatus::ApproximateCp {
                min_choi_eigenvalue,
                ..
            },
            _,
        ) => Some(*min_choi_eigenvalue),
        _ => None,
    };
    let mut human = String::new();
    let status_name = match &result.status {
        InverseStatus::Exact => "exact".to_string(),
        InverseStatus::ApproximateCp {
            min_choi_eigenvalue,
            tp_residual,
        } => format!(
            "approximate-cp (min Choi eigenvalue {min_choi_eigenvalue:e}, TP residual {tp_residual:e})"
        ),
        InverseStatus::NoSolution {
            offending_blocks, ..
        } => format!("no-solution (kernel obstruction at blocks {offending_blocks:?})"),
    };
    let _ = writeln!(human, "status: {status_name}");
    let _ = writeln!(human, "equation residual: {:e}", result.residual);
    if let Some(m) = min_choi {
        let _ = writeln!(human, "min Choi eigenvalue: {m:e}");
    }
    if let Some(f) = &result.channel {
        let _ = writeln!(human, "recovered Kraus operators: {}", f.kraus().len());
    }
    let exact = result.status == InverseStatus::Exact;
    let report = InvertReport {
        kraus: result.channel.as_ref().map(|f| f.kraus().to_vec()),
        status: result.status,
        residual: result.residual,
        min_choi_eigenvalue: min_choi,
        support: result.diagnostics,
        jamiolkowski_solution: result.jamiolkowski_solution,
    };
    emit(ctx, &human, &report)?;
    Ok(u8::from(!exact))
}

#[derive(Serialize)]
struct ConditionalRuleSummary {
    max_defined_residual: f64,
    max_multiplied_out_residual: f64,
    undefined_cells: usize,
    pass: bool,
}

#[derive(Serialize)]
struct VerifyReport {
    bayes_residual: f64,
    time_reversal_residual: f64,
    conditional_rule: ConditionalRuleSummary,
    residual_tolerance: f64,
    conditional_tolerance: f64,
    pass: bool,
}

fn cmd_verify(scenario_path: &Path, inverse_path: &Path, ctx: &Ctx) -> Result<u8, Error> {
    let (scenario, _) = load_scenario(scenario_path)?;
    let f = load_channel(inverse_path)?;
    let residual_tol = ctx.tol_or(1e-10);
    let conditional_tol = ctx.tol_or(1e-8);

    let bayes_residual = verify_bayes_rule(scenario.channel(), scenario.rho(), &f)?;
    let q = mh_distribution(&scenario)?;
    let q_bar = reversed_mh(&scenario, &f)?;
    let time_reversal_residual = q.max_abs_diff_transposed(&q_bar);
    let rule = spatiotemporal_bayes_check(&scenario, &f)?;
    let rule_pass = rule.max_defined_residual <= conditional_tol
        && rule.max_multiplied_out_residual <= conditional_tol;
    let pass =
        bayes_residual <= residual_tol && time_reversal_residual <= residual_tol && rule_pass;

    let mut human = String::new();
    let _ = writeln!(
        human,
        "Bayes rule residual (‖SϱS − ϱ‖_F): {bayes_residual:e}"
    );
    let _ = writeln!(
        human,
        "time reversal residual (max |Q(i,j) − Q̄(j,i)|): {time_reversal_residual:e}"
    );
    let _ = writeln!(
        human,
        "conditional rule: max defined {:e}, max multiplied-out {:e}, undefined cells {}",
        rule.max_defined_residual, rule.max_multiplied_out_residual, rule.undefined_cells
    );
    let _ = writeln!(human, "pass: {pass}");
    let report = VerifyReport {
        bayes_residual,
        time_reversal_residual,
        conditional_rule: ConditionalRuleSummary {
            max_defined_residual: rule.max_defined_residual,
            max_multiplied_out_residual: rule.max_multiplied_out_residual,
            undefined_cells: rule.undefined_cells,
            pass: rule_pass,
        },
        residual_tolerance: residual_tol,
        conditional_tolerance: conditional_tol,
        pass,
    };
    emit(ctx, &human, &report)?;
    Ok(u8::from(!pass))
}

#[derive(Serialize)]
struct MaxDisturbanceReport {
    mode: &'static str,
    value: f64,
    evaluations: usize,
    seed: u64,
    budget: usize,
    witness: ScenarioFile,
}

#[derive(Serialize)]
struct BornExistenceJson {
    mode: &'static str,
    max_violation: f64,
    verdict: &'static str,
    sufficient_condition_hits: SufficientConditionHits,
    evaluations: usize,
    seed: u64,
    budget: usize,
    witness: Option<ScenarioFile>,
    witness_cell: Option<[String; 2]>,
}

#[derive(Serialize)]
struct QubitScanJson {
    mode: &'static str,
    states: usize,
    channels: usize,
    tolerance: f64,
    seed: u64,
    budget: usize,
    report: NecessityScanReport,
}

fn default_qubit_family() -> Result<Vec<QuantumChannel>, Error> {
    let half = DensityOperator::maximally_mixed(2)?;
    let ground = DensityOperator::diagonal(&[1.0, 0.0])?;
    let dephase = vec![
        ComplexMatrix::identity(2).scale(0.5_f64.sqrt()),
        pauli_z().scale(0.5_f64.sqrt()),
    ];
    let lam = 0.5f64;
    let depolarize = vec![
        ComplexMatrix::identity(2).scale((1.0 - 3.0 * lam / 4.0).sqrt()),
        pauli_x().scale((lam / 4.0).sqrt()),
        pauli_y().scale((lam / 4.0).sqrt()),
        pauli_z().scale((lam / 4.0).sqrt()),
    ];
    Ok(vec![
        QuantumChannel::identity(2)?,
        QuantumChannel::unitary(hadamard())?,
        QuantumChannel::new(dephase)?,
        QuantumChannel::new(depolarize)?,
        QuantumChannel::discard_and_prepare(2, &half)?,
        QuantumChannel::discard_and_prepare(2, &ground)?,
        QuantumChannel::erasure(0.5)?,
    ])
}

fn cmd_search(
    mode: SearchMode,
    state: Option<&Path>,
    channels: &[PathBuf],
    budget: usize,
    grid: usize,
    ctx: &Ctx,
) -> Result<u8, Error> {
    let seed = ctx.seed.unwrap_or(0);
    let search_budget = SearchBudget::new(budget);
    match mode {
        SearchMode::MaxDisturbance | SearchMode::BornExistence => {
            let state_path = state.ok_or_else(|| {
                Error::InvalidParameter("--state is required for this mode".into())
            })?;
            let channel_path = channels.first().ok_or_else(|| {
                Error::InvalidParameter("--channel is required for this mode".into())
            })?;
            let rho = load_state(state_path)?;
            let e = load_channel(channel_path)?;
            if mode == SearchMode::MaxDisturbance {
                let result = search_max_disturbance(&rho, &e, &search_budget, seed)?;
                let mut human = String::new();
                let _ = writeln!(human, "max |D(i,j)| found: {}", result.value);
                let _ = writeln!(human, "objective evaluations: {}", result.evaluations);
                let report = MaxDisturbanceReport {
                    mode: "max-disturbance",
                    value: result.value,
                    evaluations: result.evaluations,
                    seed,
                    budget,
                    witness: scenario_to_file(&result.scenario),
                };
                emit(ctx, &human, &report)?;
            } else {
                let report = born_existence_check(&rho, &e, &search_budget, seed)?;
                let mut human = String::new();
                let _ = writeln!(
                    human,
                    "max violation ‖ℰ(ρ − ρ_P)‖_F: {}",
                    report.max_violation
                );
                let (verdict, witness, cell) = match &report.verdict {
                    BornExistenceVerdict::ExistsWithinTolerance => {
                        let _ = writeln!(human, "verdict: exists within tolerance");
                        ("exists_within_tolerance", None, None)
                    }
                    BornExistenceVerdict::FailsWithWitness { witness, row, col } => {
                        let _ = writeln!(human, "verdict: fails, witness at cell ({row}, {col})");
                        (
                            "fails_with_witness",
                            Some(scenario_to_file(witness)),
                            Some([
                                witness.pvm_a().labels()[*row].clone(),
                                witness.pvm_b().labels()[*col].clone(),
                            ]),
                        )
                    }
                };
                let _ = writeln!(
                    human,
                    "sufficient conditions: maximally mixed {}, discard-and-prepare {}",
                    report.sufficient_condition_hits.maximally_mixed_state,
                    report.sufficient_condition_hits.discard_and_prepare_channel
                );
                let json = BornExistenceJson {
                    mode: "born-existence",
                    max_violation: report.max_violation,
                    verdict,
                    sufficient_condition_hits: report.sufficient_condition_hits,
                    evaluations: report.evaluations,
                    seed,
                    budget,
                    witness,
                    witness_cell: cell,
                };
                emit(ctx, &human, &json)?;
            }
            Ok(0)
        }
        SearchMode::QubitScan => {
            let family = if channels.is_empty() {
                default_qubit_family()?
            } else {
                channels
                    .iter()
                    .map(|p| load_channel(p))
                    .collect::<Result<Vec<_>, _>>()?
            };
            for (i, ch) in family.iter().enumerate() {
                if ch.dim_in() != 2 {
                    return Err(Error::InvalidParameter(format!(
                        "qubit-scan channel {i} has input dimension {}",
                        ch.dim_in()
                    )));
                }
            }
            let tol = ctx.tol_or(1e-8);
            let states = bloch_grid(grid)?;
            let report = qubit_necessity_scan(&states, &family, tol, &search_budget, seed)?;
            let mut human = String::new();
            let _ = writeln!(
                human,
                "scanned {} states x {} channels (tolerance {tol:e})",
                states.len(),
                family.len()
            );
            let passes = report.entries.iter().filter(|e| e.within_tolerance).count();
            let _ = writeln!(
                human,
                "within tolerance: {passes} / {}",
                report.entries.len()
            );
            let _ = writeln!(
                human,
                "anomalies (pass without sufficient condition): {}",
                report.anomalies.len()
            );
            let json = QubitScanJson {
                mode: "qubit-scan",
                states: states.len(),
                channels: family.len(),
                tolerance: tol,
                seed,
                budget,
                report,
            };
            emit(ctx, &human, &json)?;
            Ok(0)
        }
    }
}

#[derive(Serialize)]
struct TomoReport {
    sv_min_a: f64,
    sv_min_b: f64,
    conditioning: f64,
    least_squares_residual: f64,
    frobenius_error: f64,
    tolerance: f64,
    pass: bool,
}

fn cmd_tomo(state_path: &Path, channel_path: &Path, ctx: &Ctx) -> Result<u8, Error> {
    let rho = load_state(state_path)?;
    let e = load_channel(channel_path)?;
    let tol = ctx.tol_or(1e-8);
    let sot = state_over_time(&rho, &e)?;
    let frame = TomographicFrame::standard(e.dim_in(), e.dim_out())?;
    let mut oracle_error: Option<Error> = None;
    let rec = reconstruct_from_mh(&frame, |fa, fb| {
        let value = ProjectiveMeasurement::binary(fa).and_then(|pa| {
            let pb = ProjectiveMeasurement::binary(fb)?;
            let s = TpsmScenario::new(rho.clone(), pa, e.clone(), pb)?;
            Ok(mh_distribution(&s)?.get(0, 0))
        });
        match value {
            Ok(v) => v,
            Err(err) => {
                oracle_error.get_or_insert(err);
                f64::NAN
            }
        }
    })?;
    if let Some(err) = oracle_error {
        return Err(err);
    }
    let frobenius_error = rec.operator.matrix().frobenius_diff(sot.matrix());
    let pass = frobenius_error <= tol;

    let mut human = String::new();
    let _ = writeln!(
        human,
        "frame conditioning: sv_min_a {:.6}, sv_min_b {:.6}, product {:.6}",
        frame.sv_min_a, frame.sv_min_b, frame.conditioning
    );
    let _ = writeln!(human, "least-squares residual: {:e}", rec.residual);
    let _ = writeln!(
        human,
        "Frobenius error vs direct construction: {frobenius_error:e}"
    );
    let _ = writeln!(human, "pass: {pass} (tolerance {tol:e})");
    let report = TomoReport {
        sv_min_a: frame.sv_min_a,
        sv_min_b: frame.sv_min_b,
        conditioning: frame.conditioning,
        least_squares_residual: rec.residual,
        frobenius_error,
        tolerance: tol,
        pass,
    };
    emit(ctx, &human, &report)?;
    Ok(u8::from(!pass))
}
