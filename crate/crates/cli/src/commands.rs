//! Subcommand implementations producing CSV documents.

use std::f64::consts::PI;

use dpa_feedback::classical::{
    classify_longtime, hopf_locus, integrate, linearize_at, steady_states, ClassicalParams,
    ClassicalState, LongTimeBehavior, PumpModel,
};
use dpa_feedback::critical::characteristic_point;
use dpa_feedback::grid::linspace;
use dpa_feedback::params::SystemParams;
use dpa_feedback::rootfind::Region;
use dpa_feedback::spectrum::squeezing_spectrum;
use dpa_feedback::stability::{default_region, rightmost_roots};
use num_complex::Complex64;

use crate::config::{is_grid, ConfigError, RunConfig};
use crate::csvout::{Cell, Csv};

/// Command failure with the exit code it maps to.
#[derive(Debug)]
pub enum CliError {
    /// Exit code 2.
    Config(String),
    /// Exit code 3: incomplete certification, undecidable classification.
    Numerical(String),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

const LINEAR_KEYS: &[&str] = &[
    "kappa_b", "kappa_c", "k0", "loss", "phi", "tau", "delta", "eps", "theta", "kappa_hz",
];
const CLASSICAL_KEYS: &[&str] = &[
    "kappa_b", "kappa_c", "k0", "loss", "phi", "tau", "kappa_p", "x", "kappa_hz",
];

fn extend(base: &[&'static str], extra: &[&'static str]) -> Vec<&'static str> {
    let mut keys = base.to_vec();
    keys.extend_from_slice(extra);
    keys
}

fn echo_all(csv: &mut Csv, cfg: &RunConfig) {
    for (key, value) in cfg.bindings() {
        csv.echo(key, value);
    }
}

/// Quadrature angle: the pump phase plus `theta_d` (default pi, the squeezed
/// quadrature).
fn quadrature_angle(cfg: &RunConfig, p: &SystemParams) -> Result<f64, ConfigError> {
    Ok(p.eps_phase() + cfg.f64_or("theta_d", PI)?)
}

pub fn spectrum(cfg: &RunConfig) -> Result<Csv, CliError> {
    cfg.check_keys(&extend(LINEAR_KEYS, &["theta_d", "nu", "nu_grid"]))?;
    let p = cfg.system_params()?;
    let theta_prime = quadrature_angle(cfg, &p)?;
    let grid = match (cfg.f64("nu")?, cfg.grid("nu_grid")?) {
        (Some(_), Some(_)) => return Err(CliError::Config("give nu or nu_grid, not both".into())),
        (Some(nu), None) => vec![nu],
        (None, Some(grid)) => grid,
        (None, None) => dpa_feedback::grid::default_nu_grid(1.0),
    };
    let mut csv = Csv::new("spectrum", vec!["nu", "variance", "db", "diverged"]);
    echo_all(&mut csv, cfg);
    for nu in grid {
        let pt = squeezing_spectrum(&p, theta_prime, nu);
        csv.push_row(vec![
            nu.into(),
            pt.variance.into(),
            pt.decibels.into(),
            pt.diverged.into(),
        ]);
    }
    Ok(csv)
}

pub fn critical_point(cfg: &RunConfig) -> Result<Csv, CliError> {
    cfg.check_keys(LINEAR_KEYS)?;
    let p = cfg.system_params()?;
    let mut csv = Csv::new(
        "critical-point",
        vec!["nu_c", "tau_c", "floor", "floor_db", "valid"],
    );
    echo_all(&mut csv, cfg);
    match characteristic_point(&p) {
        Ok(cp) => {
            let floor_db = dpa_feedback::spectrum::variance_to_db(cp.squeezed_floor);
            csv.push_row(vec![
                cp.nu_c.into(),
                cp.tau_c.into(),
                cp.squeezed_floor.into(),
                floor_db.into(),
                true.into(),
            ]);
        }
        Err(reason) => {
            csv.note(format!("invalid: {reason}"));
            csv.push_row(vec![
                f64::NAN.into(),
                f64::NAN.into(),
                f64::NAN.into(),
                f64::NAN.into(),
                false.into(),
            ]);
        }
    }
    Ok(csv)
}

pub fn stability_roots(cfg: &RunConfig) -> Result<Csv, CliError> {
    cfg.check_keys(&extend(LINEAR_KEYS, &["re_min", "re_max", "im_max"]))?;
    let p = cfg.system_params()?;
    let base = default_region(&p);
    let region = Region::symmetric(
        cfg.f64_or("re_min", base.re_min)?,
        cfg.f64_or("re_max", base.re_max)?,
        cfg.f64_or("im_max", base.im_max)?,
    );
    let roots = rightmost_roots(&p, &region)
        .map_err(|e| CliError::Numerical(format!("root certification: {e}")))?;
    let mut csv = Csv::new(
        "stability-roots",
        vec!["lambda_re", "lambda_im", "residual"],
    );
    echo_all(&mut csv, cfg);
    csv.note(format!(
        "region = [{}, {}] x [{}, {}]",
        region.re_min, region.re_max, region.im_min, region.im_max
    ));
    csv.note(format!("certified root count = {}", roots.len()));
    for root in &roots {
        csv.push_row(vec![
            root.lambda_re.into(),
            root.lambda_im.into(),
            root.residual.into(),
        ]);
    }
    Ok(csv)
}

/// Stability verdict for one steady state from the certified rightmost roots
/// of its linearisation.
fn branch_is_stable(
    p: &ClassicalParams,
    ss: &dpa_feedback::classical::SteadyState,
) -> Result<bool, CliError> {
    let lin = linearize_at(p, ss).map_err(|e| CliError::Numerical(e.to_string()))?;
    lin.is_stable()
        .map_err(|e| CliError::Numerical(e.to_string()))
}

pub fn steady_states_cmd(cfg: &RunConfig) -> Result<Csv, CliError> {
    cfg.check_keys(CLASSICAL_KEYS)?;
    let p = cfg.classical_params()?;
    let mut csv = Csv::new(
        "steady-states",
        vec!["branch", "re_amp", "im_amp", "re_pump", "im_pump", "stable"],
    );
    echo_all(&mut csv, cfg);
    csv.note(format!("x_th = {}", p.x_threshold()));
    for ss in steady_states(&p) {
        let stable = branch_is_stable(&p, &ss)?;
        csv.push_row(vec![
            format!("{:?}", ss.branch).to_lowercase().as_str().into(),
            ss.amplitude.re.into(),
            ss.amplitude.im.into(),
            ss.pump.re.into(),
            ss.pump.im.into(),
            stable.into(),
        ]);
    }
    Ok(csv)
}

/// Integrate and classify. The CSV is produced even when the long-time
/// verdict is undecidable; the undecidability is reported alongside so the
/// caller can emit the data and still exit with the numerical-failure code.
pub fn evolve(cfg: &RunConfig) -> Result<(Csv, Option<String>), CliError> {
    cfg.check_keys(&extend(
        CLASSICAL_KEYS,
        &[
            "eps0_re",
            "eps0_im",
            "eps_p0_re",
            "eps_p0_im",
            "t_end",
            "step",
            "stride",
        ],
    ))?;
    let p = cfg.classical_params()?;
    let initial = ClassicalState::new(
        Complex64::new(cfg.f64_or("eps0_re", 0.5)?, cfg.f64_or("eps0_im", 0.0)?),
        Complex64::new(cfg.f64_or("eps_p0_re", 0.0)?, cfg.f64_or("eps_p0_im", 0.0)?),
    );
    let t_end = cfg.f64_or("t_end", 100.0)?;
    let default_step = if p.tau() > 0.0 {
        (p.tau() / 40.0).min(0.01)
    } else {
        0.01
    };
    let step = cfg.f64_or("step", default_step)?;
    let traj =
        integrate(&p, initial, t_end, step).map_err(|e| CliError::Numerical(e.to_string()))?;

    let auto_stride = (traj.len() / 20_000).max(1);
    let stride = cfg.usize_or("stride", auto_stride)?.max(1);

    let mut csv = Csv::new(
        "evolve",
        vec!["t", "re_sig", "im_sig", "abs_sig", "re_pump", "im_pump"],
    );
    echo_all(&mut csv, cfg);
    if cfg.raw("step").is_none() {
        csv.note(format!("step = {}", traj.step()));
    }
    if cfg.raw("stride").is_none() {
        csv.note(format!("stride = {stride}"));
    }
    let mut undecidable = None;
    match classify_longtime(&traj) {
        Ok(LongTimeBehavior::Converged) => csv.note("verdict = converged"),
        Ok(LongTimeBehavior::Oscillating { period }) => {
            csv.note(format!("verdict = oscillating, period = {period}"))
        }
        Ok(LongTimeBehavior::Growing) => csv.note("verdict = growing"),
        Err(e @ dpa_feedback::ClassicalError::TrajectoryTooShort { .. }) => {
            // Short runs are legitimate data requests; only a genuinely
            // ambiguous long run is a numerical failure.
            csv.note(format!("verdict = skipped ({e})"));
        }
        Err(e) => {
            csv.note(format!("verdict = undecided ({e})"));
            undecidable = Some(e.to_string());
        }
    }
    let mut index = 0;
    while index < traj.len() {
        let state = traj.state(index);
        csv.push_row(vec![
            traj.time(index).into(),
            state.signal.re.into(),
            state.signal.im.into(),
            state.signal.norm().into(),
            state.pump.re.into(),
            state.pump.im.into(),
        ]);
        if index == traj.len() - 1 {
            break;
        }
        index = (index + stride).min(traj.len() - 1);
    }
    Ok((csv, undecidable))
}

fn parse_variant(cfg: &RunConfig) -> Result<Vec<(PumpModel, &'static str)>, CliError> {
    match cfg.raw("variant").unwrap_or("depleted") {
        "depleted" => Ok(vec![(PumpModel::Depleted, "depleted")]),
        "frozen" => Ok(vec![(PumpModel::Frozen, "frozen")]),
        "both" => Ok(vec![
            (PumpModel::Depleted, "depleted"),
            (PumpModel::Frozen, "frozen"),
        ]),
        other => Err(CliError::Config(format!(
            "variant `{other}` is not depleted|frozen|both"
        ))),
    }
}

pub fn hopf_locus_cmd(cfg: &RunConfig) -> Result<Csv, CliError> {
    let mut keys = extend(CLASSICAL_KEYS, &["tau_grid", "x_range", "variant"]);
    keys.retain(|k| *k != "tau" && *k != "x");
    cfg.check_keys(&keys)?;
    let p = cfg.classical_params()?;
    let taus = cfg
        .grid("tau_grid")?
        .unwrap_or_else(|| linspace(1.0, 4.2, 65));
    let x_range = cfg.range("x_range")?.unwrap_or((0.02, 1.98));
    let mut csv = Csv::new(
        "hopf-locus",
        vec!["variant", "kappa_tau", "x", "omega", "residual"],
    );
    echo_all(&mut csv, cfg);
    for (model, label) in parse_variant(cfg)? {
        let points = hopf_locus(&p, &taus, x_range, model)
            .map_err(|e| CliError::Numerical(e.to_string()))?;
        for pt in points {
            csv.push_row(vec![
                label.into(),
                pt.tau.into(),
                pt.x.into(),
                pt.omega.into(),
                pt.residual.into(),
            ]);
        }
    }
    Ok(csv)
}

const SWEEP_QUANTITIES: &[&str] = &[
    "variance",
    "db",
    "nu_c",
    "tau_c",
    "squeezed_floor",
    "squeezed_floor_db",
    "max_lambda_re",
    "max_lambda_im",
    "sign_max_lambda_re",
    "x_th",
    "omega_hopf",
];

const SWEEPABLE: &[&str] = &[
    "kappa_b", "kappa_c", "k0", "loss", "phi", "tau", "delta", "eps", "theta", "theta_d", "nu",
    "kappa_p", "x",
];

fn sweep_value(quantity: &str, cfg: &RunConfig) -> Result<(f64, bool), CliError> {
    // For linear-model quantities the classical drive is accepted as an
    // alias of the pump strength (the undepleted correspondence eps = kappa x
    // with kappa = 1), so stability maps can be swept in either variable.
    let mut cfg = cfg.clone();
    if cfg.raw("eps").is_none() {
        if let Some(x) = cfg.raw("x") {
            cfg.set("eps", x.to_string());
        }
    }
    let cfg = &cfg;
    match quantity {
        "variance" | "db" => {
            let p = cfg.system_params()?;
            let theta_prime = quadrature_angle(cfg, &p)?;
            let nu = cfg.require_f64("nu")?;
            let pt = squeezing_spectrum(&p, theta_prime, nu);
            let value = if quantity == "variance" {
                pt.variance
            } else {
                pt.decibels
            };
            Ok((value, !pt.diverged))
        }
        "nu_c" | "tau_c" | "squeezed_floor" | "squeezed_floor_db" => {
            let p = cfg.system_params()?;
            match characteristic_point(&p) {
                Ok(cp) => Ok((
                    match quantity {
                        "nu_c" => cp.nu_c,
                        "tau_c" => cp.tau_c,
                        "squeezed_floor" => cp.squeezed_floor,
                        _ => dpa_feedback::spectrum::variance_to_db(cp.squeezed_floor),
                    },
                    true,
                )),
                Err(_) => Ok((f64::NAN, false)),
            }
        }
        "max_lambda_re" | "max_lambda_im" | "sign_max_lambda_re" => {
            let p = cfg.system_params()?;
            let roots = rightmost_roots(&p, &default_region(&p))
                .map_err(|e| CliError::Numerical(format!("root certification: {e}")))?;
            match roots.first() {
                Some(top) => Ok((
                    match quantity {
                        "max_lambda_re" => top.lambda_re,
                        "max_lambda_im" => top.lambda_im,
                        _ => top.lambda_re.signum(),
                    },
                    true,
                )),
                // No roots right of the search band: certainly stable.
                None => match quantity {
                    "sign_max_lambda_re" => Ok((-1.0, true)),
                    _ => Ok((f64::NAN, false)),
                },
            }
        }
        "x_th" => Ok((cfg.classical_params()?.x_threshold(), true)),
        "omega_hopf" => {
            let p = cfg.classical_params()?;
            let tau = cfg.require_f64("tau")?;
            let x_range = cfg.range("x_range")?.unwrap_or((0.02, 1.98));
            let model = parse_variant(cfg)?[0].0;
            let points = hopf_locus(&p, &[tau], x_range, model)
                .map_err(|e| CliError::Numerical(e.to_string()))?;
            match points.first() {
                Some(pt) => Ok((pt.omega, true)),
                None => Ok((f64::NAN, false)),
            }
        }
        other => Err(CliError::Config(format!(
            "quantity `{other}` is not one of {}",
            SWEEP_QUANTITIES.join(", ")
        ))),
    }
}

pub fn sweep(cfg: &RunConfig) -> Result<Csv, CliError> {
    let mut keys = extend(LINEAR_KEYS, &["theta_d", "nu", "kappa_p", "x"]);
    keys.extend_from_slice(&["quantity", "x_range", "variant"]);
    cfg.check_keys(&keys)?;
    let quantity = cfg
        .raw("quantity")
        .ok_or_else(|| CliError::Config("missing required key `quantity`".into()))?
        .to_string();

    // Swept keys are numeric bindings written as start:stop:count grids.
    let mut swept: Vec<(String, Vec<f64>)> = Vec::new();
    for (key, value) in cfg.bindings() {
        if SWEEPABLE.contains(&key) && is_grid(value) {
            swept.push((
                key.to_string(),
                crate::config::parse_grid(value)
                    .map_err(|e| CliError::Config(format!("key `{key}`: {e}")))?,
            ));
        } else if is_grid(value) && !["x_range", "quantity", "variant"].contains(&key) {
            return Err(CliError::Config(format!(
                "key `{key}` cannot be swept (sweepable: {})",
                SWEEPABLE.join(", ")
            )));
        }
    }
    if swept.len() > 2 {
        return Err(CliError::Config(format!(
            "at most two swept keys, got {}",
            swept.len()
        )));
    }

    let mut columns: Vec<&'static str> = Vec::new();
    for (key, _) in &swept {
        // Column names live for the program; leak the few sweep keys.
        columns.push(Box::leak(key.clone().into_boxed_str()));
    }
    columns.push("value");
    columns.push("valid");
    let mut csv = Csv::new("sweep", columns);
    echo_all(&mut csv, cfg);

    // Cartesian product in lexicographic grid order (keys are already sorted
    // by the binding map; first key is the outer loop).
    let shape: Vec<usize> = swept.iter().map(|(_, g)| g.len()).collect();
    let total: usize = shape.iter().product::<usize>().max(1);
    for flat in 0..total {
        let mut remainder = flat;
        let mut values = Vec::with_capacity(swept.len());
        for axis in (0..swept.len()).rev() {
            values.push((axis, swept[axis].1[remainder % shape[axis]]));
            remainder /= shape[axis];
        }
        values.reverse();

        let mut point = cfg.clone();
        let mut cells: Vec<Cell> = Vec::new();
        for &(axis, value) in &values {
            point.set(&swept[axis].0, format!("{value:.17e}"));
            cells.push(value.into());
        }
        let (value, valid) = sweep_value(&quantity, &point)?;
        cells.push(value.into());
        cells.push(valid.into());
        csv.push_row(cells);
    }
    Ok(csv)
}
