//! Parameter sweeps over runtime, mean control strength and pulse length.
//!
//! Every (grid point `j`, realization `k`) pair is an independent work item
//! seeded by [`realization_seed`], so results do not depend on thread count
//! or completion order.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::control::{
    generate_segments, is_commensurate, kicks_for, make_kicks, net_area, resonance_condition, PulseKind, PulseTrain,
    RNG_ALGORITHM,
};
use crate::error::{Error, Result};
use crate::hamiltonians::{GateKind, GateSpec, Schedule};
use crate::holonomy::{evaluate, HolonomyResult};
use crate::linalg::C64;
use crate::propagation::{propagate_lab, StepPolicy};

/// Revision tag written into result bundles and manifests.
pub const SCHEMA_REVISION: &str = "hqc-sim/1";

/// Tolerance on `|J dt - 2 pi n|` when annotating resonant rows.
pub const RESONANCE_TOL: f64 = 1e-6;

pub const CSV_HEADER: &str =
    "x,f_mean,f_min,f_max,gamma_measured_mean,gamma_ideal,overlap_mean,resonant,nearest_n,seed_base";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepVariable {
    #[serde(rename = "T")]
    Runtime,
    #[serde(rename = "mean_control")]
    MeanControl,
    #[serde(rename = "dt")]
    Dt,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

/// Sweep grid: explicit values, or a linear/log range plus extra points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Values(Vec<f64>),
    Range {
        start: f64,
        stop: f64,
        points: usize,
        #[serde(default)]
        spacing: Spacing,
        #[serde(default)]
        include: Vec<f64>,
    },
}

impl GridSpec {
    /// Ascending, de-duplicated grid values.
    pub fn values(&self) -> Result<Vec<f64>> {
        let mut values = match self {
            GridSpec::Values(v) => v.clone(),
            GridSpec::Range { start, stop, points, spacing, include } => {
                if *points == 0 || !(start.is_finite() && stop.is_finite()) || stop < start {
                    return Err(Error::Config(format!("bad grid range [{start}, {stop}] x {points}")));
                }
                if *spacing == Spacing::Log && *start <= 0.0 {
                    return Err(Error::Config("log grid needs start > 0".into()));
                }
                let mut v: Vec<f64> = (0..*points)
                    .map(|i| {
                        let frac = if *points == 1 { 0.0 } else { i as f64 / (*points - 1) as f64 };
                        match spacing {
                            Spacing::Linear => start + frac * (stop - start),
                            Spacing::Log => start * (stop / start).powf(frac),
                        }
                    })
                    .collect();
                if let Some(last) = v.last_mut() {
                    *last = *stop;
                }
                v.extend(include.iter().copied());
                v
            }
        };
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config("grid values must be finite".into()));
        }
        values.sort_by(f64::total_cmp);
        values.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
        if values.is_empty() {
            return Err(Error::Config("grid is empty".into()));
        }
        Ok(values)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub gate: GateSpec,
    pub control: PulseTrain,
    pub sweep_variable: SweepVariable,
    pub grid: GridSpec,
    #[serde(default = "one")]
    pub realizations: u32,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub policy: StepPolicy,
}

fn one() -> u32 {
    1
}

/// Default amplitude of the zero-energy pulse-length sweep.
pub const DEFAULT_DT_SWEEP_J: f64 = 100.0;
/// Amplitude giving a Berry phase of pi/2.
pub const DEFAULT_A: f64 = 0.7605;

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.gate.validate().map_err(|e| Error::Config(format!("gate: {e}")))?;
        self.control.validate().map_err(|e| Error::Config(format!("control: {e}")))?;
        self.policy.validate().map_err(|e| Error::Config(format!("policy: {e}")))?;
        if self.realizations == 0 {
            return Err(Error::Config("realizations must be >= 1".into()));
        }
        self.grid.values()?;
        Ok(())
    }

    /// No control, `a = 0.7605`, 40 log-spaced runtimes in [1, 100].
    pub fn runtime_default() -> Self {
        Self {
            gate: GateSpec::new(GateKind::Phase, Schedule { a: DEFAULT_A, period: 1.0 }),
            control: PulseTrain::none(),
            sweep_variable: SweepVariable::Runtime,
            grid: GridSpec::Range { start: 1.0, stop: 100.0, points: 40, spacing: Spacing::Log, include: vec![] },
            realizations: 1,
            master_seed: 1,
            policy: StepPolicy::default(),
        }
    }

    /// Noisy positive square pulses at `T = 1`, `dt = 0.005`, `p = 0.5`,
    /// mean control in [0, 200].
    pub fn mean_control_default() -> Self {
        Self {
            gate: GateSpec::new(GateKind::Phase, Schedule { a: DEFAULT_A, period: 1.0 }),
            control: PulseTrain::new(PulseKind::PositiveSquare, 0.0, 0.005, 0.5, 0),
            sweep_variable: SweepVariable::MeanControl,
            grid: GridSpec::Range { start: 0.0, stop: 200.0, points: 40, spacing: Spacing::Linear, include: vec![] },
            realizations: 10,
            master_seed: 1,
            policy: StepPolicy::default(),
        }
    }

    /// Zero-energy alternating pulses at `T = 10`, `J = 100`, `dt` in
    /// [T/2000, T/20] plus the `J dt = 2 pi, 3 pi, 4 pi, 5 pi` points.
    pub fn dt_zero_energy_default(p: f64) -> Self {
        let period = 10.0;
        let j = DEFAULT_DT_SWEEP_J;
        Self {
            gate: GateSpec::new(GateKind::Phase, Schedule { a: DEFAULT_A, period }),
            control: PulseTrain::new(PulseKind::ZeroEnergyAlternating, j, 0.05, p, 0),
            sweep_variable: SweepVariable::Dt,
            grid: GridSpec::Range {
                start: period / 2000.0,
                stop: period / 20.0,
                points: 60,
                spacing: Spacing::Linear,
                include: (2..=5).map(|m| m as f64 * PI / j).collect(),
            },
            realizations: if p > 0.0 { 10 } else { 1 },
            master_seed: 1,
            policy: StepPolicy::default(),
        }
    }

    /// Alternating vs positive pi-kicks, mean interval 0.05 with jitter, `T = 1`.
    pub fn kick_equivalence_default() -> Self {
        Self {
            gate: GateSpec::new(GateKind::Phase, Schedule { a: DEFAULT_A, period: 1.0 }),
            control: PulseTrain::new(PulseKind::DeltaKickAlternating, 0.0, 0.05, 0.5, 0),
            sweep_variable: SweepVariable::Runtime,
            grid: GridSpec::Values(vec![1.0]),
            realizations: 1,
            master_seed: 1,
            policy: StepPolicy::default(),
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of realization `k` at grid point `j`.
pub fn realization_seed(master_seed: u64, j: usize, k: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(master_seed) ^ j as u64) ^ k as u64)
}

/// Outcome of one propagation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub holonomy: HolonomyResult,
    pub steps: usize,
    pub unitarity_defect: f64,
    pub mean_control: f64,
    pub net_area: f64,
}

/// Generates the control described by `train`, propagates and scores.
pub fn run_single(gate: &GateSpec, train: &PulseTrain, policy: &StepPolicy) -> Result<RunOutcome> {
    let period = gate.schedule.period;
    let segments = generate_segments(train, period)?;
    let kicks = kicks_for(train, period)?;
    let result = propagate_lab(gate, &segments, &kicks, policy)?;
    let holonomy = evaluate(gate.kind, gate.schedule.a, &result.unitary)?;
    let area = net_area(&segments) + kicks.net_area();
    Ok(RunOutcome {
        holonomy,
        steps: result.steps_taken,
        unitarity_defect: result.unitarity_defect,
        mean_control: area / period,
        net_area: area,
    })
}

/// One row of a sweep table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub x: f64,
    pub f_mean: f64,
    pub f_min: f64,
    pub f_max: f64,
    /// Sample standard deviation of f over realizations (0 for one).
    pub f_std: f64,
    /// Circular mean of the measured phases.
    pub gamma_measured_mean: f64,
    pub gamma_ideal: f64,
    pub overlap_mean: f64,
    /// Time-averaged control actually generated, averaged over realizations.
    pub measured_mean_control: f64,
    pub resonant: bool,
    pub nearest_n: u64,
    pub seed_base: u64,
    pub realizations: u32,
    pub steps: usize,
    pub max_unitarity_defect: f64,
}

fn is_deterministic(train: &PulseTrain) -> bool {
    train.kind == PulseKind::NoControl || train.p == 0.0
}

fn aggregate(x: f64, outcomes: &[RunOutcome], train: &PulseTrain, seed_base: u64) -> SweepRow {
    let n = outcomes.len() as f64;
    let fs: Vec<f64> = outcomes.iter().map(|o| o.holonomy.f).collect();
    let f_mean = fs.iter().sum::<f64>() / n;
    let f_std = if outcomes.len() > 1 {
        (fs.iter().map(|f| (f - f_mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let phasor: C64 = outcomes.iter().map(|o| C64::from_polar(1.0, o.holonomy.gamma_measured)).sum();
    let resonance = if train.kind.is_square() && train.amplitude > 0.0 {
        resonance_condition(train.amplitude, train.dt, RESONANCE_TOL)
    } else {
        crate::control::Resonance { is_resonant: false, nearest_n: 0 }
    };
    SweepRow {
        x,
        f_mean,
        f_min: fs.iter().copied().fold(f64::INFINITY, f64::min),
        f_max: fs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        f_std,
        gamma_measured_mean: phasor.arg(),
        gamma_ideal: outcomes[0].holonomy.gamma_ideal,
        overlap_mean: outcomes.iter().map(|o| o.holonomy.overlap_abs).sum::<f64>() / n,
        measured_mean_control: outcomes.iter().map(|o| o.mean_control).sum::<f64>() / n,
        resonant: resonance.is_resonant,
        nearest_n: resonance.nearest_n,
        seed_base,
        realizations: outcomes.len() as u32,
        steps: outcomes.iter().map(|o| o.steps).sum(),
        max_unitarity_defect: outcomes.iter().map(|o| o.unitarity_defect).fold(0.0, f64::max),
    }
}

/// Runs `realizations` seeds at every grid value; `setup` maps a grid value
/// to the gate and control of that point.
fn sweep_with(
    cfg: &ExperimentConfig,
    setup: impl Fn(f64) -> Result<(GateSpec, PulseTrain)> + Sync,
) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let grid = cfg.grid.values()?;
    let points: Vec<(GateSpec, PulseTrain)> = grid.iter().map(|&x| setup(x)).collect::<Result<_>>()?;

    let items: Vec<(usize, usize)> = points
        .iter()
        .enumerate()
        .flat_map(|(j, (_, train))| {
            let runs = if is_deterministic(train) { 1 } else { cfg.realizations as usize };
            (0..runs).map(move |k| (j, k))
        })
        .collect();
    let outcomes: Vec<Result<RunOutcome>> = items
        .par_iter()
        .map(|&(j, k)| {
            let (gate, train) = &points[j];
            let seeded = PulseTrain { seed: realization_seed(cfg.master_seed, j, k), ..*train };
            run_single(gate, &seeded, &cfg.policy)
        })
        .collect();

    let mut rows = Vec::with_capacity(grid.len());
    let mut cursor = 0;
    for (j, &x) in grid.iter().enumerate() {
        let (_, train) = &points[j];
        let runs = items[cursor..].iter().take_while(|(jj, _)| *jj == j).count();
        let mut collected = Vec::with_capacity(cfg.realizations as usize);
        for outcome in &outcomes[cursor..cursor + runs] {
            collected.push(*outcome.as_ref().map_err(|e| Error::InvalidParameter(format!("grid point {x}: {e}")))?);
        }
        cursor += runs;
        if runs == 1 && cfg.realizations > 1 {
            // Deterministic control: every realization is identical.
            collected = vec![collected[0]; cfg.realizations as usize];
        }
        rows.push(aggregate(x, &collected, train, realization_seed(cfg.master_seed, j, 0)));
    }
    Ok(rows)
}

/// f versus runtime `T` without control.
pub fn sweep_runtime(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    if cfg.control.kind != PulseKind::NoControl {
        return Err(Error::Config("runtime sweep runs without control (kind = no-control)".into()));
    }
    sweep_with(cfg, |x| {
        let gate = GateSpec { schedule: cfg.gate.schedule.with_period(x), ..cfg.gate };
        gate.validate()?;
        Ok((gate, cfg.control))
    })
}

/// f versus target mean control of a positive square train (`J = 2 x`).
pub fn sweep_mean_control(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    if cfg.control.kind != PulseKind::PositiveSquare {
        return Err(Error::Config("mean-control sweep needs kind = positive-square".into()));
    }
    let period = cfg.gate.schedule.period;
    if !is_commensurate(period, cfg.control.dt) {
        return Err(Error::Config(format!("dt = {} does not divide T = {period}", cfg.control.dt)));
    }
    sweep_with(cfg, |x| {
        if x < 0.0 {
            return Err(Error::Config(format!("mean control must be >= 0, got {x}")));
        }
        let train = if x == 0.0 {
            PulseTrain { kind: PulseKind::NoControl, amplitude: 0.0, ..cfg.control }
        } else {
            PulseTrain { amplitude: 2.0 * x, ..cfg.control }
        };
        Ok((cfg.gate, train))
    })
}

/// f versus pulse length `dt` of a square train (zero-energy alternating by default).
pub fn sweep_dt_zero_energy(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    if !cfg.control.kind.is_square() {
        return Err(Error::Config("dt sweep needs a square pulse kind".into()));
    }
    sweep_with(cfg, |x| Ok((cfg.gate, PulseTrain { dt: x, ..cfg.control })))
}

pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    match cfg.sweep_variable {
        SweepVariable::Runtime => sweep_runtime(cfg),
        SweepVariable::MeanControl => sweep_mean_control(cfg),
        SweepVariable::Dt => sweep_dt_zero_energy(cfg),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KickEquivalenceReport {
    pub kick_count: usize,
    pub max_entry_difference: f64,
    pub net_area_positive: f64,
    pub net_area_alternating: f64,
    pub f_positive: f64,
    pub f_alternating: f64,
    pub max_unitarity_defect: f64,
}

/// Positive vs alternating pi-kicks at identical instants.
///
/// Kick times come from `cfg.control` (`dt` = mean interval, `p` = jitter)
/// seeded with `cfg.master_seed`.
pub fn compare_positive_vs_zero_energy(cfg: &ExperimentConfig) -> Result<KickEquivalenceReport> {
    let period = cfg.gate.schedule.period;
    let positive = make_kicks(PulseKind::DeltaKickPositive, period, cfg.control.dt, cfg.control.p, cfg.master_seed)?;
    compare_kick_schedules(&cfg.gate, &positive, &cfg.policy)
}

/// Same comparison for an explicit set of kick instants.
pub fn compare_kick_schedules(
    gate: &GateSpec,
    kicks: &crate::control::KickSchedule,
    policy: &StepPolicy,
) -> Result<KickEquivalenceReport> {
    let segments = generate_segments(&PulseTrain::none(), gate.schedule.period)?;
    let positive = kicks.all_positive();
    let alternating = kicks.alternating();
    let up = propagate_lab(gate, &segments, &positive, policy)?;
    let ua = propagate_lab(gate, &segments, &alternating, policy)?;
    let hp = evaluate(gate.kind, gate.schedule.a, &up.unitary)?;
    let ha = evaluate(gate.kind, gate.schedule.a, &ua.unitary)?;
    Ok(KickEquivalenceReport {
        kick_count: kicks.len(),
        max_entry_difference: up.unitary.max_abs_diff(&ua.unitary),
        net_area_positive: positive.net_area(),
        net_area_alternating: alternating.net_area(),
        f_positive: hp.f,
        f_alternating: ha.f,
        max_unitarity_defect: up.unitarity_defect.max(ua.unitarity_defect),
    })
}

fn sig12(v: f64) -> String {
    format!("{v:.11e}")
}

/// CSV text of a sweep, LF line endings, 12 significant digits.
pub fn to_csv_string(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            sig12(r.x),
            sig12(r.f_mean),
            sig12(r.f_min),
            sig12(r.f_max),
            sig12(r.gamma_measured_mean),
            sig12(r.gamma_ideal),
            sig12(r.overlap_mean),
            r.resonant,
            r.nearest_n,
            r.seed_base
        );
    }
    out
}

pub fn write_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    std::fs::write(path, to_csv_string(rows))?;
    Ok(())
}

/// Machine-readable results with the full configuration echo.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultBundle {
    pub schema_revision: String,
    pub experiment: String,
    pub rng_algorithm: String,
    pub config: ExperimentConfig,
    pub rows: Vec<SweepRow>,
}

impl ResultBundle {
    pub fn new(experiment: &str, config: &ExperimentConfig, rows: Vec<SweepRow>) -> Self {
        Self {
            schema_revision: SCHEMA_REVISION.to_string(),
            experiment: experiment.to_string(),
            rng_algorithm: RNG_ALGORITHM.to_string(),
            config: config.clone(),
            rows,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
