//! The three subcommands, each turning a parsed config into a [`Table`].

use std::path::Path;

use qigate::config::{parse_config, Config, ExperimentConfig, GateKind, Mode};
use qigate::gates::{basis_label, gate_metrics, truth_table, IdealGate};
use qigate::interrogation::{estimate_frequencies, exact_outcome_probabilities, run_joint_protocol};
use qigate::statespace::{concurrence, decode_with, encode_with, joint_modes, project_code_space, JOINT_DIM};
use rayon::prelude::*;
use rayon::ThreadPool;

use crate::table::{Cell, Table};
use crate::CliError;

pub const CNOT_CONVENTION: &str =
    "CNOT = (I x R(pi/4)) CZ (I x R(pi/4)), R(t) = [[-cos t, sin t], [sin t, cos t]]";

const COMMON: [&str; 7] = [
    "variant",
    "gate",
    "n_stages",
    "theta",
    "eta",
    "crossings_per_stage",
    "input",
];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Options {
    pub parallel: usize,
    pub seed: Option<u64>,
}

pub fn load_config(path: &Path, seed: Option<u64>) -> Result<Config, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg =
        parse_config(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if let Some(s) = seed {
        cfg.base_mut().seed = s;
    }
    Ok(cfg)
}

fn pool(parallel: usize) -> Result<ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(parallel.max(1))
        .build()
        .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))
}

fn runtime(e: qigate::Error) -> CliError {
    CliError::Runtime(e.to_string())
}

fn columns(specific: &[&str]) -> Vec<String> {
    COMMON.iter().chain(specific).map(|s| s.to_string()).collect()
}

fn common_cells(cfg: &ExperimentConfig, input: Option<String>) -> Vec<Cell> {
    let s = &cfg.spec;
    vec![
        s.variant.token().into(),
        cfg.gate().token().into(),
        s.n_stages.into(),
        s.resolved_theta().into(),
        s.eta.into(),
        u64::from(s.crossings_per_stage).into(),
        input.unwrap_or_else(|| cfg.input.token()).into(),
    ]
}

fn ideal(cfg: &ExperimentConfig) -> Option<IdealGate> {
    match (cfg.spec.variant, cfg.gate()) {
        (qigate::interrogation::Variant::Azuma, _) => None,
        (_, GateKind::Cz) => Some(IdealGate::Cz),
        (_, GateKind::Cnot) => Some(IdealGate::Cnot),
    }
}

fn with_metadata(mut t: Table, cfg: &ExperimentConfig) -> Table {
    t.metadata = vec![
        ("mode".into(), cfg.mode.token().into()),
        ("number_format".into(), "12 significant digits, round half to even".into()),
        ("cnot_convention".into(), CNOT_CONVENTION.into()),
    ];
    t
}

fn experiment(cfg: Config, command: &str) -> Result<ExperimentConfig, CliError> {
    match cfg {
        Config::Experiment(e) => Ok(e),
        Config::Sweep(_) => Err(CliError::Config(format!(
            "`{command}` needs a single experiment, the config defines a sweep"
        ))),
    }
}

pub fn cmd_run(cfg: Config, opts: Options) -> Result<Table, CliError> {
    let cfg = experiment(cfg, "run")?;
    let pool = pool(opts.parallel)?;
    let spec = &cfg.spec;
    let input = encode_with(&cfg.input.qubit_state(), spec.encoding()).map_err(runtime)?;
    let exact = run_joint_protocol(spec, &input).map_err(runtime)?;

    let table = match cfg.mode {
        Mode::Exact => {
            let mut names = vec!["success_prob".to_string(), "scatter_prob".to_string()];
            for i in 0..JOINT_DIM {
                let (c, t) = joint_modes(i);
                names.push(format!("amp_{c}_{t}_re"));
                names.push(format!("amp_{c}_{t}_im"));
            }
            let names: Vec<&str> = names.iter().map(String::as_str).collect();
            let mut t = Table::new("run", columns(&names));
            let mut row = common_cells(&cfg, None);
            row.push(exact.success_prob.into());
            row.push(exact.scatter_prob().into());
            for a in exact.no_scatter_state.amplitudes() {
                row.push(a.re.into());
                row.push(a.im.into());
            }
            t.push(row);
            t
        }
        Mode::Sample => {
            let probs = exact_outcome_probabilities(spec, &exact);
            let freqs = pool
                .install(|| estimate_frequencies(spec, &input, cfg.n_samples, cfg.seed))
                .map_err(runtime)?;
            let mut t = Table::new(
                "run",
                columns(&["seed", "n_samples", "outcome", "count", "frequency", "exact_prob"]),
            );
            let mut outcomes: Vec<_> = probs.keys().chain(freqs.counts.keys()).collect();
            outcomes.sort();
            outcomes.dedup();
            for o in outcomes {
                let mut row = common_cells(&cfg, None);
                row.push(cfg.seed.into());
                row.push(cfg.n_samples.into());
                row.push(o.to_string().into());
                row.push(freqs.count(o).into());
                row.push(freqs.frequency(o).into());
                row.push(probs.get(o).copied().unwrap_or(0.0).into());
                t.push(row);
            }
            t
        }
    };
    Ok(with_metadata(table, &cfg))
}

pub fn cmd_truth_table(cfg: Config, _opts: Options) -> Result<Table, CliError> {
    let cfg = experiment(cfg, "truth-table")?;
    let rows = truth_table(&cfg.spec).map_err(runtime)?;
    let mut names: Vec<String> = [
        "success_prob",
        "scatter_prob",
        "leak_prob",
        "first_scatter_prob",
        "forbidden",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for i in 0..4 {
        names.push(format!("out_{}_re", basis_label(i)));
        names.push(format!("out_{}_im", basis_label(i)));
    }
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut t = Table::new("truth-table", columns(&names));
    for r in &rows {
        let mut row = common_cells(&cfg, Some(r.label().to_string()));
        row.push(r.success_prob.into());
        row.push(r.scatter_prob.into());
        row.push(r.leak_prob.into());
        row.push(r.stage_scatter_probs.first().copied().unwrap_or(0.0).into());
        row.push(r.forbidden().into());
        for a in r.output.amplitudes() {
            row.push(a.re.into());
            row.push(a.im.into());
        }
        t.push(row);
    }
    Ok(with_metadata(t, &cfg))
}

fn sweep_row(cfg: &ExperimentConfig) -> Result<Vec<Cell>, CliError> {
    let spec = &cfg.spec;
    let enc = spec.encoding();
    let input = encode_with(&cfg.input.qubit_state(), enc).map_err(runtime)?;
    let exact = run_joint_protocol(spec, &input).map_err(runtime)?;
    let mut row = common_cells(cfg, None);
    row.push(exact.success_prob.into());

    match ideal(cfg) {
        Some(g) => {
            let m = gate_metrics(spec, g).map_err(runtime)?;
            row.push(m.raw_process_fidelity.into());
            row.push(m.postselected_process_fidelity.into());
            row.push(m.worst_case_basis_success.into());
        }
        None => row.extend([Cell::Empty, Cell::Empty, Cell::Empty]),
    }

    let out = decode_with(&project_code_space(&exact.no_scatter_state, enc), enc).map_err(runtime)?;
    row.push(match out.normalized() {
        Some(q) => concurrence(&q).map_err(runtime)?.into(),
        None => Cell::Empty,
    });

    row.push(match cfg.mode {
        Mode::Exact => Cell::Empty,
        Mode::Sample => {
            let f = estimate_frequencies(spec, &input, cfg.n_samples, cfg.seed).map_err(runtime)?;
            (f.survival_count() as f64 / f.n_samples as f64).into()
        }
    });
    Ok(row)
}

pub fn cmd_sweep(cfg: Config, opts: Options) -> Result<Table, CliError> {
    let sweep = match cfg {
        Config::Sweep(s) => s,
        Config::Experiment(_) => {
            return Err(CliError::Config(
                "`sweep` needs at least one `sweep.<param>` key".into(),
            ))
        }
    };
    let pool = pool(opts.parallel)?;
    let rows: Vec<Vec<Cell>> = pool.install(|| {
        (0..sweep.grid_size())
            .into_par_iter()
            .map(|i| sweep_row(&sweep.point(i)))
            .collect::<Result<_, _>>()
    })?;
    let mut t = Table::new(
        "sweep",
        columns(&[
            "success_prob",
            "raw_fidelity",
            "postselected_fidelity",
            "worst_case_success",
            "concurrence",
            "sampled_success",
        ]),
    );
    for r in rows {
        t.push(r);
    }
    let mut t = with_metadata(t, &sweep.base);
    let axes: Vec<&str> = sweep.axes.iter().map(|a| a.name()).collect();
    t.metadata.push(("axes".into(), axes.join(",")));
    Ok(t)
}
