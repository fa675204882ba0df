//! Scenario execution: construct → solve → differentiate → residuals.

use thiserror::Error;

use ansatz_core::calculus::{chaundy_consistency, implicit_jet, ScalarFieldSample};
use ansatz_core::constructors::{
    bateman_ansatz, legendre_pair_sampled, ma_chaundy, monge_flow, superposed_wave, ufe_chaundy,
    wave_ansatz, NullCheckOptions, QuadratureRule,
};
use ansatz_core::residuals::{
    bateman_residual, bordered_hessian, monge_ampere_det, monge_flow_residuals, null_gradient,
    wave_residual, SignConvention,
};
use ansatz_core::solve::{grid_continuation, PointSolve};
use ansatz_core::{
    AnsatzSystem, AxisSpec, GridSpec, HomogeneousMap, NewtonOptions, SmoothMap, SolveError,
    TraversalPolicy,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{Equation, ScenarioConfig, SignConventionConfig};
use crate::report::{config_hash, PointRecord, Provenance, ResidualReport, Summary};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

fn config_err(msg: impl Into<String>) -> RunError {
    RunError::Config(msg.into())
}

fn status_of(e: &SolveError) -> &'static str {
    match e {
        SolveError::SingularJacobian { .. } => "singular",
        SolveError::NonConvergence { .. } => "no-converge",
        SolveError::Eval(_) => "error",
    }
}

fn failed_record(coords: Vec<f64>, status: &str, iterations: usize) -> PointRecord {
    PointRecord {
        coords,
        phi: None,
        params: vec![],
        residuals: vec![],
        status: status.into(),
        iterations,
    }
}

/// Residual overflow at a solved point downgrades it to an error record;
/// NaN must never reach a report marked "ok" (JSON would drop it to null).
fn finite_or_error(residuals: Vec<f64>) -> Result<Vec<f64>, String> {
    if residuals.iter().all(|r| r.is_finite()) {
        Ok(residuals)
    } else {
        Err("error".into())
    }
}

/// Spacetime coordinate names (t, x, y, z, or t, x1…xn beyond three
/// spatial dimensions).
fn spacetime_names(n: usize) -> Vec<String> {
    match n {
        1 => vec!["t".into(), "x".into()],
        2 => vec!["t".into(), "x".into(), "y".into()],
        3 => vec!["t".into(), "x".into(), "y".into(), "z".into()],
        _ => {
            let mut names = vec!["t".to_string()];
            names.extend((1..=n).map(|i| format!("x{i}")));
            names
        }
    }
}

struct EquationRun {
    coord_names: Vec<String>,
    param_names: Vec<String>,
    residual_names: Vec<String>,
    points: Vec<PointRecord>,
}

/// Run one scenario deterministically; every grid point appears in the
/// report, convergent or not.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ResidualReport, RunError> {
    validate(config)?;
    let opts = NewtonOptions { tol: config.tolerances.newton, max_iter: 50 };
    let run = match config.equation {
        Equation::Bateman => run_bateman(config, opts)?,
        Equation::Ufe => run_ufe(config, opts)?,
        Equation::MongeAmpere => run_monge_ampere(config, opts)?,
        Equation::Wave => run_wave(config, opts)?,
        Equation::MongeFlow => run_monge_flow(config, opts)?,
        Equation::Legendre => run_legendre(config)?,
        Equation::SuperposedWave => run_superposed_wave(config)?,
    };
    let hash = config_hash(&serde_json::to_string(config).expect("config serializes"));
    let summary = Summary::from_points(&run.points);
    Ok(ResidualReport {
        scenario: format!("{}-{}", config.equation.id(), &hash[..8]),
        equation: config.equation.id().into(),
        provenance: Provenance {
            config_hash: hash,
            rng_seed: config.rng_seed,
            version: env!("CARGO_PKG_VERSION").into(),
        },
        coord_names: run.coord_names,
        param_names: run.param_names,
        residual_names: run.residual_names,
        points: run.points,
        summary,
    })
}

/// The exit-status gate: a pure function of the summary and the residual
/// tolerance.
pub fn passes_gate(summary: &Summary, residual_tol: f64) -> bool {
    summary.convergence_fraction >= 0.5
        && summary.max_normalized.is_some_and(|m| m <= residual_tol)
}

fn validate(config: &ScenarioConfig) -> Result<(), RunError> {
    if config.grid.is_empty() {
        return Err(config_err("grid must have at least one axis"));
    }
    for (i, axis) in config.grid.iter().enumerate() {
        if axis.count < 1 {
            return Err(config_err(format!("grid axis {i}: count must be >= 1")));
        }
        if !axis.min.is_finite() || !axis.max.is_finite() {
            return Err(config_err(format!("grid axis {i}: bounds must be finite")));
        }
    }
    if config.tolerances.newton <= 0.0 || config.tolerances.residual <= 0.0 {
        return Err(config_err("tolerances must be positive"));
    }
    Ok(())
}

fn grid_from(config: &ScenarioConfig, expected_axes: usize) -> Result<GridSpec, RunError> {
    if config.grid.len() != expected_axes {
        return Err(config_err(format!(
            "{} expects {expected_axes} grid axes, found {}",
            config.equation.id(),
            config.grid.len()
        )));
    }
    Ok(GridSpec::new(
        config
            .grid
            .iter()
            .map(|a| AxisSpec { min: a.min, max: a.max, count: a.count })
            .collect(),
    ))
}

fn get_map(config: &ScenarioConfig, slot: &str, params: &[&str]) -> Result<SmoothMap, RunError> {
    let source = config
        .functions
        .get(slot)
        .ok_or_else(|| config_err(format!("missing function slot `{slot}`")))?;
    SmoothMap::parse(source, params)
        .map_err(|e| config_err(format!("function `{slot}`: {e}")))
}

fn check_slots(config: &ScenarioConfig, expected: &[String]) -> Result<(), RunError> {
    for key in config.functions.keys() {
        if !expected.iter().any(|e| e == key) {
            return Err(config_err(format!(
                "unexpected function slot `{key}` for {} (expected one of {expected:?})",
                config.equation.id()
            )));
        }
    }
    Ok(())
}

fn check_seed_len(config: &ScenarioConfig, expected: usize) -> Result<(), RunError> {
    if config.seed_values.len() != expected {
        return Err(config_err(format!(
            "seed_values must list {expected} value(s) for this scenario, found {}",
            config.seed_values.len()
        )));
    }
    Ok(())
}

/// Sweep an implicit system over its grid and turn every point into a
/// record; `residuals` maps a differentiated sample to the named
/// normalized residual values.
fn system_records(
    system: &AnsatzSystem,
    grid: &GridSpec,
    seed: &[f64],
    opts: NewtonOptions,
    residuals: impl Fn(&ScalarFieldSample) -> Result<Vec<f64>, String>,
) -> Vec<PointRecord> {
    let branch = match grid_continuation(system, grid, seed, TraversalPolicy::Lexicographic, opts)
    {
        Ok(branch) => branch,
        Err(first_err) => {
            // First-point failure aborts the branch: report every point
            // as unconverged rather than dropping the scenario.
            let status = status_of(&first_err);
            return (0..grid.len())
                .map(|i| failed_record(grid.point(i), status, 0))
                .collect();
        }
    };
    branch
        .points
        .iter()
        .enumerate()
        .map(|(i, point)| {
            let coords = grid.point(i);
            match point {
                PointSolve::Solved { unknowns, iterations, .. } => {
                    match implicit_jet(system, &coords, unknowns) {
                        Ok(sample) => match residuals(&sample).and_then(finite_or_error) {
                            Ok(values) => PointRecord {
                                coords,
                                phi: Some(sample.phi),
                                params: sample.parameters.clone(),
                                residuals: values,
                                status: "ok".into(),
                                iterations: *iterations,
                            },
                            Err(status) => failed_record(coords, &status, *iterations),
                        },
                        Err(e) => failed_record(coords, status_of(&e), *iterations),
                    }
                }
                PointSolve::Failed(e) => failed_record(coords, status_of(e), 0),
            }
        })
        .collect()
}

fn run_bateman(config: &ScenarioConfig, opts: NewtonOptions) -> Result<EquationRun, RunError> {
    check_slots(config, &["f1".into(), "f2".into()])?;
    let f1 = get_map(config, "f1", &["phi"])?;
    let f2 = get_map(config, "f2", &["phi"])?;
    let system = bateman_ansatz(&f1, &f2).map_err(|e| config_err(e.to_string()))?;
    let grid = grid_from(config, 2)?;
    check_seed_len(config, 1)?;
    let points = system_records(&system, &grid, &config.seed_values, opts, |sample| {
        let b = bateman_residual(sample).map_err(|e| e.to_string())?;
        let h = bordered_hessian(sample).map_err(|e| e.to_string())?;
        Ok(vec![b.normalized, h.normalized])
    });
    Ok(EquationRun {
        coord_names: vec!["t".into(), "x".into()],
        param_names: vec![],
        residual_names: vec!["bateman".into(), "bordered".into()],
        points,
    })
}

fn run_ufe(config: &ScenarioConfig, opts: NewtonOptions) -> Result<EquationRun, RunError> {
    let slots: Vec<String> = (1..=4).map(|i| format!("f{i}")).collect();
    check_slots(config, &slots)?;
    let maps: Vec<SmoothMap> = slots
        .iter()
        .map(|slot| get_map(config, slot, &["phi", "u"]))
        .collect::<Result<_, _>>()?;
    let f: [SmoothMap; 4] = maps.try_into().expect("four slots");
    let system = ufe_chaundy(&f).map_err(|e| config_err(e.to_string()))?;
    let grid = grid_from(config, 3)?;
    check_seed_len(config, system.unknown_count())?;
    let reduced = system.unknown_count() == 1;
    let points = system_records(&system, &grid, &config.seed_values, opts, |sample| {
        let h = bordered_hessian(sample).map_err(|e| e.to_string())?;
        let coords = [sample.coords[0], sample.coords[1], sample.coords[2]];
        let u = if reduced { 0.0 } else { sample.parameters[0] };
        let defects = chaundy_consistency(&f, &coords, sample.phi, u)
            .map_err(|e| status_of(&e).to_string())?;
        let consistency = defects.iter().fold(0.0f64, |m, d| m.max(*d));
        Ok(vec![h.normalized, consistency])
    });
    Ok(EquationRun {
        coord_names: vec!["t".into(), "x".into(), "y".into()],
        param_names: if reduced { vec![] } else { vec!["u".into()] },
        residual_names: vec!["bordered".into(), "consistency".into()],
        points,
    })
}

fn run_monge_ampere(config: &ScenarioConfig, opts: NewtonOptions) -> Result<EquationRun, RunError> {
    let slots: Vec<String> = (1..=4).map(|i| format!("g{i}")).collect();
    check_slots(config, &slots)?;
    let maps: Vec<SmoothMap> = slots
        .iter()
        .map(|slot| get_map(config, slot, &["u", "v"]))
        .collect::<Result<_, _>>()?;
    let g: [SmoothMap; 4] = maps.try_into().expect("four slots");
    let weight_one = g[3].is_zero();
    let field = ma_chaundy(&g).map_err(|e| config_err(e.to_string()))?;
    let grid = grid_from(config, 3)?;
    check_seed_len(config, 2)?;

    let mut residual_names = vec!["hessian_det".to_string()];
    if weight_one {
        residual_names.push("euler_weight1".into());
    }
    let mut carry = [config.seed_values[0], config.seed_values[1]];
    let mut points = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let coords_vec = grid.point(i);
        let coords = [coords_vec[0], coords_vec[1], coords_vec[2]];
        match field.sample(&coords, carry, opts) {
            Ok(sample) => {
                carry = [sample.parameters[0], sample.parameters[1]];
                let mut residuals = vec![monge_ampere_det(&sample).normalized];
                if weight_one {
                    let euler: f64 = (0..3).map(|k| coords[k] * sample.grad[k]).sum();
                    residuals.push((euler - sample.phi) / (1.0 + sample.phi.abs()));
                }
                match finite_or_error(residuals) {
                    Ok(residuals) => points.push(PointRecord {
                        coords: coords_vec,
                        phi: Some(sample.phi),
                        params: sample.parameters.clone(),
                        residuals,
                        status: "ok".into(),
                        iterations: 0,
                    }),
                    Err(status) => points.push(failed_record(coords_vec, &status, 0)),
                }
            }
            Err(e) => points.push(failed_record(coords_vec, status_of(&e), 0)),
        }
    }
    Ok(EquationRun {
        coord_names: vec!["x1".into(), "x2".into(), "x3".into()],
        param_names: vec!["u".into(), "v".into()],
        residual_names,
        points,
    })
}

fn wave_slot_count(config: &ScenarioConfig) -> Result<usize, RunError> {
    let mut n = 0;
    while config.functions.contains_key(&format!("f{n}")) {
        n += 1;
    }
    if n < 2 {
        return Err(config_err(
            "wave needs contiguous slots f0, f1, … (at least f0 and f1)",
        ));
    }
    Ok(n)
}

fn run_wave(config: &ScenarioConfig, opts: NewtonOptions) -> Result<EquationRun, RunError> {
    let n = wave_slot_count(config)?;
    let slots: Vec<String> = (0..n).map(|i| format!("f{i}")).collect();
    check_slots(config, &slots)?;
    let maps: Vec<SmoothMap> = slots
        .iter()
        .map(|slot| get_map(config, slot, &["u"]))
        .collect::<Result<_, _>>()?;
    let system = wave_ansatz(&maps, NullCheckOptions::default())
        .map_err(|e| config_err(e.to_string()))?;
    let grid = grid_from(config, n)?; // t plus n−1 spatial axes
    check_seed_len(config, 1)?;
    let points = system_records(&system, &grid, &config.seed_values, opts, |sample| {
        let w = wave_residual(sample, 0).map_err(|e| e.to_string())?;
        let g = null_gradient(sample, 0).map_err(|e| e.to_string())?;
        Ok(vec![w.normalized, g.normalized])
    });
    Ok(EquationRun {
        coord_names: spacetime_names(n - 1),
        param_names: vec![],
        residual_names: vec!["wave".into(), "null_gradient".into()],
        points,
    })
}

fn run_monge_flow(config: &ScenarioConfig, opts: NewtonOptions) -> Result<EquationRun, RunError> {
    let mut n = 0;
    while config.functions.contains_key(&format!("f{}", n + 1)) {
        n += 1;
    }
    if n < 1 {
        return Err(config_err("monge_flow needs contiguous slots f1, f2, …"));
    }
    let slots: Vec<String> = (1..=n).map(|i| format!("f{i}")).collect();
    check_slots(config, &slots)?;
    let arg_names: Vec<String> = (1..=n).map(|i| format!("a{i}")).collect();
    let arg_refs: Vec<&str> = arg_names.iter().map(String::as_str).collect();
    let maps: Vec<SmoothMap> = slots
        .iter()
        .map(|slot| get_map(config, slot, &arg_refs))
        .collect::<Result<_, _>>()?;
    let field = monge_flow(&maps).map_err(|e| config_err(e.to_string()))?;
    let grid = grid_from(config, n + 1)?;
    check_seed_len(config, n)?;
    let convention = match config.sign_convention {
        SignConventionConfig::Material => SignConvention::Material,
        SignConventionConfig::Printed => SignConvention::Printed,
    };

    let mut carry = config.seed_values.clone();
    let mut points = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let coords = grid.point(i);
        match field.sample(&coords, &carry, opts) {
            Ok(sample) => {
                carry = sample.components.iter().map(|c| c.value).collect();
                let residuals = monge_flow_residuals(&sample, convention)
                    .map_err(|_| "error".to_string())
                    .and_then(|r| finite_or_error(r.iter().map(|r| r.normalized).collect()));
                match residuals {
                    Ok(residuals) => points.push(PointRecord {
                        coords,
                        phi: Some(sample.components[0].value),
                        params: sample.components[1..].iter().map(|c| c.value).collect(),
                        residuals,
                        status: "ok".into(),
                        iterations: 0,
                    }),
                    Err(status) => points.push(failed_record(coords, &status, 0)),
                }
            }
            Err(e) => points.push(failed_record(coords, status_of(&e), 0)),
        }
    }
    Ok(EquationRun {
        coord_names: spacetime_names(n),
        param_names: (2..=n).map(|i| format!("u{i}")).collect(),
        residual_names: (1..=n).map(|i| format!("monge_{i}")).collect(),
        points,
    })
}

fn run_legendre(config: &ScenarioConfig) -> Result<EquationRun, RunError> {
    check_slots(config, &["f0".into(), "f1".into()])?;
    let d = config.grid.len();
    if d < 2 {
        return Err(config_err("legendre needs at least two dual axes"));
    }
    let ratio_names: Vec<String> = (1..d).map(|i| format!("r{i}")).collect();
    let ratio_refs: Vec<&str> = ratio_names.iter().map(String::as_str).collect();
    let base0 = get_map(config, "f0", &ratio_refs)?;
    let base1 = get_map(config, "f1", &ratio_refs)?;
    let f0 = HomogeneousMap::new(0.0, base0, d).map_err(|e| config_err(e.to_string()))?;
    let f1 = HomogeneousMap::new(1.0, base1, d).map_err(|e| config_err(e.to_string()))?;

    // Homogeneity validation points drawn from the scenario RNG.
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let samples: Vec<Vec<f64>> = (0..6)
        .map(|_| {
            (0..d)
                .map(|_| {
                    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                    sign * rng.gen_range(0.5..1.5)
                })
                .collect()
        })
        .collect();
    let data =
        legendre_pair_sampled(f0, f1, &samples).map_err(|e| config_err(e.to_string()))?;

    let grid = grid_from(config, d)?;
    let mut points = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let xi = grid.point(i);
        match (data.w_jet(&xi), data.check_univ3(&xi)) {
            (Ok(w), Ok(r)) if r.normalized.is_finite() && w.value.is_finite() => {
                points.push(PointRecord {
                    coords: xi,
                    phi: Some(w.value),
                    params: vec![],
                    residuals: vec![r.normalized],
                    status: "ok".into(),
                    iterations: 0,
                })
            }
            _ => points.push(failed_record(xi, "error", 0)),
        }
    }
    Ok(EquationRun {
        coord_names: (1..=d).map(|i| format!("xi{i}")).collect(),
        param_names: vec![],
        residual_names: vec!["univ3".into()],
        points,
    })
}

fn run_superposed_wave(config: &ScenarioConfig) -> Result<EquationRun, RunError> {
    check_slots(config, &["profile".into()])?;
    let profile = get_map(config, "profile", &["s", "theta"])?;
    if config.quadrature_nodes == 0 {
        return Err(config_err("quadrature_nodes must be >= 1"));
    }
    let rule = QuadratureRule::periodic_trapezoid(config.quadrature_nodes);
    let field = superposed_wave(profile, rule).map_err(|e| config_err(e.to_string()))?;
    let grid = grid_from(config, 3)?;
    let mut points = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let coords = grid.point(i);
        let at = [coords[0], coords[1], coords[2]];
        match field.sample(&at) {
            Ok(sample) => {
                let r = wave_residual(&sample, 0).map_err(|e| config_err(e.to_string()))?;
                match finite_or_error(vec![r.normalized]) {
                    Ok(residuals) => points.push(PointRecord {
                        coords,
                        phi: Some(sample.phi),
                        params: vec![],
                        residuals,
                        status: "ok".into(),
                        iterations: 0,
                    }),
                    Err(status) => points.push(failed_record(coords, &status, 0)),
                }
            }
            Err(_) => points.push(failed_record(coords, "error", 0)),
        }
    }
    Ok(EquationRun {
        coord_names: vec!["t".into(), "x".into(), "y".into()],
        param_names: vec![],
        residual_names: vec!["wave".into()],
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ScenarioConfig;

    fn bateman_config() -> ScenarioConfig {
        ScenarioConfig::from_json(
            r#"{
                "equation": "bateman",
                "functions": { "f1": "phi", "f2": "1" },
                "grid": [
                    { "min": 1.0, "max": 2.0, "count": 10 },
                    { "min": 0.0, "max": 0.9, "count": 10 }
                ],
                "seed_values": [0.3],
                "rng_seed": 42
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn bateman_scenario_converges_everywhere() {
        let report = run_scenario(&bateman_config()).unwrap();
        assert_eq!(report.summary.total_points, 100);
        assert_eq!(report.summary.convergence_fraction, 1.0);
        assert!(report.summary.max_normalized.unwrap() <= 1e-10);
        assert!(passes_gate(&report.summary, 1e-8));
    }

    #[test]
    fn reports_are_deterministic() {
        let a = run_scenario(&bateman_config()).unwrap().to_json();
        let b = run_scenario(&bateman_config()).unwrap().to_json();
        assert_eq!(a, b);
    }

    #[test]
    fn summary_matches_recomputation() {
        let report = run_scenario(&bateman_config()).unwrap();
        assert_eq!(report.summary, Summary::from_points(&report.points));
    }

    #[test]
    fn missing_slot_is_a_config_error() {
        let mut config = bateman_config();
        config.functions.remove("f2");
        let err = run_scenario(&config).unwrap_err();
        assert!(matches!(err, RunError::Config(ref m) if m.contains("f2")));
    }

    #[test]
    fn bad_grammar_is_a_config_error() {
        let mut config = bateman_config();
        config.functions.insert("f1".into(), "2*".into());
        let err = run_scenario(&config).unwrap_err();
        assert!(matches!(err, RunError::Config(ref m) if m.contains("offset 2")));
    }

    #[test]
    fn non_null_wave_family_is_rejected_at_build_time() {
        let config = ScenarioConfig::from_json(
            r#"{
                "equation": "wave",
                "functions": { "f0": "u", "f1": "1", "f2": "0" },
                "grid": [
                    { "min": 0.8, "max": 1.2, "count": 3 },
                    { "min": 0.8, "max": 1.2, "count": 3 },
                    { "min": 0.1, "max": 0.3, "count": 3 }
                ],
                "seed_values": [0.4]
            }"#,
        )
        .unwrap();
        let err = run_scenario(&config).unwrap_err();
        assert!(matches!(err, RunError::Config(ref m) if m.contains("null constraint")));
    }

    #[test]
    fn u_independent_ufe_takes_a_single_seed() {
        let config = ScenarioConfig::from_json(
            r#"{
                "equation": "ufe",
                "functions": { "f1": "phi", "f2": "phi^2 + 1", "f3": "2", "f4": "1" },
                "grid": [
                    { "min": 1.0, "max": 1.4, "count": 4 },
                    { "min": 0.1, "max": 0.4, "count": 4 },
                    { "min": -0.8, "max": -0.5, "count": 4 }
                ],
                "seed_values": [0.2]
            }"#,
        )
        .unwrap();
        let report = run_scenario(&config).unwrap();
        assert_eq!(report.param_names, Vec::<String>::new());
        assert!(report.summary.convergence_fraction > 0.9);
        assert!(report.summary.max_normalized.unwrap() <= 1e-8);

        // The two-unknown seed shape is rejected with the expected count.
        let mut wrong = config;
        wrong.seed_values = vec![0.2, 0.0];
        let err = run_scenario(&wrong).unwrap_err();
        assert!(matches!(err, RunError::Config(ref m) if m.contains("1 value")));
    }

    #[test]
    fn gate_is_a_pure_function_of_summary_and_tolerance() {
        let summary = |fraction: f64, max: Option<f64>| Summary {
            total_points: 100,
            converged_points: (fraction * 100.0) as usize,
            convergence_fraction: fraction,
            max_normalized: max,
            rms_normalized: max,
        };
        assert!(passes_gate(&summary(1.0, Some(1e-9)), 1e-8));
        assert!(!passes_gate(&summary(1.0, Some(1e-7)), 1e-8));
        assert!(!passes_gate(&summary(0.4, Some(1e-9)), 1e-8));
        assert!(!passes_gate(&summary(0.0, None), 1e-8));
        assert!(!passes_gate(&summary(1.0, Some(f64::NAN)), 1e-8));
    }

    #[test]
    fn envelope_points_are_data_not_failures() {
        // t ∈ [−0.5, 1.5] crosses t = 0 where t·phi + x = 1 is singular.
        let mut config = bateman_config();
        config.grid[0] = crate::config::AxisConfig { min: 1.5, max: -0.5, count: 9 };
        let report = run_scenario(&config).unwrap();
        assert!(report.summary.convergence_fraction < 1.0);
        assert!(report.points.iter().any(|p| p.status == "singular"));
    }
}
