//! Builders that assemble each construction into an [`AnsatzSystem`] or
//! an explicit field evaluator, enforcing the side constraints (null
//! condition, homogeneity) at build time.

use thiserror::Error;

use crate::calculus::{implicit_jet, ScalarFieldSample};
use crate::expr::{EvalError, Expr, SmoothMap};
use crate::homogeneity::{homogeneity_check_fn, HomogeneousMap, DEFAULT_SCALES};
use crate::jet::Jet2;
use crate::linalg::{row_norm_product, LuFactors};
use crate::residuals::{FlowComponent, ResidualValue, VectorFieldSample};
use crate::solve::{newton_on_maps, AnsatzSystem, NewtonOptions, NewtonResult, SolveError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BuildError {
    #[error("{name} must take {expected} argument(s), found {found}")]
    Arity { name: &'static str, expected: usize, found: usize },
    #[error("null constraint violated: |F0² − ΣFk²| = {deviation} at u = {at}")]
    NullConstraintViolation { deviation: f64, at: f64 },
    #[error("homogeneity violated at weight {weight}: deviation {deviation}")]
    HomogeneityViolation { weight: f64, deviation: f64 },
    #[error("quadrature rule is empty")]
    EmptyQuadrature,
    #[error("evaluation failed while building: {0}")]
    Eval(#[from] EvalError),
}

fn check_arity(name: &'static str, map: &SmoothMap, expected: usize) -> Result<(), BuildError> {
    if map.arity() != expected {
        return Err(BuildError::Arity { name, expected, found: map.arity() });
    }
    Ok(())
}

/// `t·f1(φ) + x·f2(φ) = 1` as a one-unknown system over (t, x).
pub fn bateman_ansatz(f1: &SmoothMap, f2: &SmoothMap) -> Result<AnsatzSystem, BuildError> {
    check_arity("f1", f1, 1)?;
    check_arity("f2", f2, 1)?;
    // Parameters: (phi, t, x).
    let phi = Expr::var(0);
    let residual = Expr::sub(
        Expr::add(
            Expr::mul(Expr::var(1), f1.substituted(std::slice::from_ref(&phi))?),
            Expr::mul(Expr::var(2), f2.substituted(&[phi])?),
        ),
        Expr::num(1.0),
    );
    let map = SmoothMap::from_parts(vec!["phi".into(), "t".into(), "x".into()], residual);
    Ok(AnsatzSystem::new(vec!["phi".into()], vec!["t".into(), "x".into()], vec![map])
        .expect("square by construction"))
}

/// Chaundy's plane-family constraints
/// `t F1(φ,u) + x F2(φ,u) + y F3(φ,u) = F4(φ,u)` together with its
/// ∂/∂u derivative.
///
/// Families with no u-dependence collapse to a single scalar constraint;
/// the second equation folds to the identity `0 = 0` and the u unknown is
/// dropped.
pub fn ufe_chaundy(f: &[SmoothMap; 4]) -> Result<AnsatzSystem, BuildError> {
    for (i, map) in f.iter().enumerate() {
        let name = ["F1", "F2", "F3", "F4"][i];
        check_arity(name, map, 2)?;
        let _ = name;
    }
    // Parameters: (phi, u, t, x, y).
    let subst = [Expr::var(0), Expr::var(1)];
    let coeff = |i: usize| f[i].substituted(&subst);
    let g_body = Expr::sub(
        Expr::add(
            Expr::add(
                Expr::mul(Expr::var(2), coeff(0)?),
                Expr::mul(Expr::var(3), coeff(1)?),
            ),
            Expr::mul(Expr::var(4), coeff(2)?),
        ),
        coeff(3)?,
    );
    let params = vec!["phi".into(), "u".into(), "t".into(), "x".into(), "y".into()];
    let g = SmoothMap::from_parts(params, g_body.clone());
    let h = g.diff(1);

    if h.is_zero() {
        // u never enters: rebuild over (phi, t, x, y).
        let reduced = g_body.substitute(&[
            Expr::var(0),
            Expr::num(0.0),
            Expr::var(1),
            Expr::var(2),
            Expr::var(3),
        ]);
        let map = SmoothMap::from_parts(
            vec!["phi".into(), "t".into(), "x".into(), "y".into()],
            reduced,
        );
        return Ok(AnsatzSystem::new(
            vec!["phi".into()],
            vec!["t".into(), "x".into(), "y".into()],
            vec![map],
        )
        .expect("square by construction"));
    }

    Ok(AnsatzSystem::new(
        vec!["phi".into(), "u".into()],
        vec!["t".into(), "x".into(), "y".into()],
        vec![g, h],
    )
    .expect("square by construction"))
}

/// Explicit Monge–Ampère field from four parameter functions:
/// per point solve the two derivative constraints for (u, v), then
/// `φ = Σ x_i G_i(u,v) − G4(u,v)`.
#[derive(Debug, Clone)]
pub struct MongeAmpereField {
    g: [SmoothMap; 4],
    /// The (u, v) constraints over (u, v, x1, x2, x3).
    param_maps: Vec<SmoothMap>,
    /// Equivalent three-unknown system (phi, u, v) for cross-checking
    /// against the implicit-function-theorem route.
    system: AnsatzSystem,
}

pub fn ma_chaundy(g: &[SmoothMap; 4]) -> Result<MongeAmpereField, BuildError> {
    for (i, map) in g.iter().enumerate() {
        check_arity(["G1", "G2", "G3", "G4"][i], map, 2)?;
    }
    // Parameter maps over (u, v, x1, x2, x3).
    let build_constraint = |axis: usize| -> Result<SmoothMap, BuildError> {
        let subst = [Expr::var(0), Expr::var(1)];
        let mut body = Expr::neg(f_diff(&g[3], axis).substituted(&subst)?);
        for i in 0..3 {
            body = Expr::add(
                body,
                Expr::mul(Expr::var(2 + i), f_diff(&g[i], axis).substituted(&subst)?),
            );
        }
        Ok(SmoothMap::from_parts(
            vec!["u".into(), "v".into(), "x1".into(), "x2".into(), "x3".into()],
            body,
        ))
    };
    let param_maps = vec![build_constraint(0)?, build_constraint(1)?];

    // Three-unknown system over (phi, u, v, x1, x2, x3).
    let subst = [Expr::var(1), Expr::var(2)];
    let mut phi_body = Expr::neg(g[3].substituted(&subst)?);
    for i in 0..3 {
        phi_body = Expr::add(phi_body, Expr::mul(Expr::var(3 + i), g[i].substituted(&subst)?));
    }
    let sys_params: Vec<String> = ["phi", "u", "v", "x1", "x2", "x3"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let r0 = SmoothMap::from_parts(sys_params.clone(), Expr::sub(Expr::var(0), phi_body));
    let lift = |m: &SmoothMap| {
        let body = m
            .substituted(&[
                Expr::var(1),
                Expr::var(2),
                Expr::var(3),
                Expr::var(4),
                Expr::var(5),
            ])
            .expect("arity checked");
        SmoothMap::from_parts(sys_params.clone(), body)
    };
    let system = AnsatzSystem::new(
        vec!["phi".into(), "u".into(), "v".into()],
        vec!["x1".into(), "x2".into(), "x3".into()],
        vec![r0, lift(&param_maps[0]), lift(&param_maps[1])],
    )
    .expect("square by construction");

    Ok(MongeAmpereField { g: g.clone(), param_maps, system })
}

fn f_diff(map: &SmoothMap, axis: usize) -> SmoothMap {
    map.diff(axis)
}

impl MongeAmpereField {
    pub fn system(&self) -> &AnsatzSystem {
        &self.system
    }

    /// Newton solve of the (u, v) constraints at one point.
    pub fn solve_params(
        &self,
        coords: &[f64; 3],
        seed: [f64; 2],
        opts: NewtonOptions,
    ) -> Result<NewtonResult, SolveError> {
        newton_on_maps(&self.param_maps, coords, &seed, opts)
    }

    /// Field sample with the closed-form second derivatives
    /// `φ_ij = ∂G_i/∂u·u_j + ∂G_i/∂v·v_j`, written in symmetrized form.
    pub fn sample(
        &self,
        coords: &[f64; 3],
        seed: [f64; 2],
        opts: NewtonOptions,
    ) -> Result<ScalarFieldSample, SolveError> {
        let params = self.solve_params(coords, seed, opts)?.unknowns;
        let args = Jet2::seed_all(&params);
        let jets: Vec<Jet2> = self
            .g
            .iter()
            .map(|m| m.eval_jets(&args))
            .collect::<Result<_, _>>()
            .map_err(SolveError::Eval)?;

        let phi = (0..3).map(|i| coords[i] * jets[i].value).sum::<f64>() - jets[3].value;
        let grad: Vec<f64> = (0..3).map(|i| jets[i].value).collect();

        // (u_j, v_j) from the differentiated constraints.
        let a: f64 =
            (0..3).map(|i| coords[i] * jets[i].hess_at(0, 0)).sum::<f64>() - jets[3].hess_at(0, 0);
        let b: f64 =
            (0..3).map(|i| coords[i] * jets[i].hess_at(0, 1)).sum::<f64>() - jets[3].hess_at(0, 1);
        let c: f64 =
            (0..3).map(|i| coords[i] * jets[i].hess_at(1, 1)).sum::<f64>() - jets[3].hess_at(1, 1);
        let m = [a, b, b, c];
        let scale = row_norm_product(&m, 2);
        let factors = LuFactors::factor(&m, 2);
        let det = factors.det();
        if det.abs() < crate::solve::SINGULAR_FACTOR * scale || scale == 0.0 {
            return Err(SolveError::SingularJacobian { det, scale });
        }
        let mut du = [0.0; 3];
        let mut dv = [0.0; 3];
        for j in 0..3 {
            let sol = factors.solve(&[-jets[j].grad[0], -jets[j].grad[1]]);
            du[j] = sol[0];
            dv[j] = sol[1];
        }

        let mut hess = vec![0.0; 9];
        for i in 0..3 {
            for j in i..3 {
                let v = 0.5
                    * (jets[i].grad[0] * du[j]
                        + jets[i].grad[1] * dv[j]
                        + jets[j].grad[0] * du[i]
                        + jets[j].grad[1] * dv[i]);
                hess[i * 3 + j] = v;
                hess[j * 3 + i] = v;
            }
        }

        Ok(ScalarFieldSample {
            coords: coords.to_vec(),
            phi,
            parameters: params,
            grad,
            hess,
            diagnostics: None,
        })
    }

    /// The same field differentiated through the equivalent three-unknown
    /// system; used to cross-check the closed-form Hessian.
    pub fn sample_implicit(
        &self,
        coords: &[f64; 3],
        seed: [f64; 2],
        opts: NewtonOptions,
    ) -> Result<ScalarFieldSample, SolveError> {
        let params = self.solve_params(coords, seed, opts)?.unknowns;
        let values: Vec<f64> = self
            .g
            .iter()
            .map(|m| m.eval_scalar(&params))
            .collect::<Result<_, _>>()
            .map_err(SolveError::Eval)?;
        let phi = (0..3).map(|i| coords[i] * values[i]).sum::<f64>() - values[3];
        implicit_jet(&self.system, coords, &[phi, params[0], params[1]])
    }
}

/// Options for the sampled verification of the wave-ansatz null
/// constraint `F0² − Σ F_k² ≡ 0`.
#[derive(Debug, Clone, Copy)]
pub struct NullCheckOptions {
    pub interval: (f64, f64),
    pub samples: usize,
}

impl Default for NullCheckOptions {
    fn default() -> Self {
        NullCheckOptions { interval: (-1.0, 1.0), samples: 32 }
    }
}

/// Absolute deviation above which the null constraint counts as violated.
pub const NULL_DEVIATION_TOL: f64 = 1e-8;

/// Linear wave-equation ansatz `t·F0(u) + Σ x_i F_i(u) = 1`, accepted
/// only when the coefficient family is numerically null.
pub fn wave_ansatz(f: &[SmoothMap], opts: NullCheckOptions) -> Result<AnsatzSystem, BuildError> {
    assert!(f.len() >= 2, "need F0 plus at least one spatial coefficient");
    for map in f {
        check_arity("wave coefficient", map, 1)?;
    }
    let (lo, hi) = opts.interval;
    let samples = opts.samples.max(2);
    let mut worst = (0.0f64, lo);
    for i in 0..samples {
        let u = lo + (hi - lo) * (i as f64) / ((samples - 1) as f64);
        let f0 = f[0].eval_scalar(&[u])?;
        let mut dev = f0 * f0;
        for map in &f[1..] {
            let v = map.eval_scalar(&[u])?;
            dev -= v * v;
        }
        if !dev.is_finite() {
            return Err(BuildError::NullConstraintViolation { deviation: f64::INFINITY, at: u });
        }
        if dev.abs() >= worst.0 {
            worst = (dev.abs(), u);
        }
    }
    if worst.0 > NULL_DEVIATION_TOL {
        return Err(BuildError::NullConstraintViolation { deviation: worst.0, at: worst.1 });
    }

    let n = f.len() - 1;
    let coord_names = wave_coord_names(n);
    // Parameters: (u, t, x_1, …, x_n).
    let mut body = Expr::mul(Expr::var(1), f[0].substituted(&[Expr::var(0)])?);
    for (i, map) in f[1..].iter().enumerate() {
        body = Expr::add(
            body,
            Expr::mul(Expr::var(2 + i), map.substituted(&[Expr::var(0)])?),
        );
    }
    body = Expr::sub(body, Expr::num(1.0));
    let mut params = vec!["u".to_string()];
    params.extend(coord_names.iter().cloned());
    let map = SmoothMap::from_parts(params, body);
    Ok(AnsatzSystem::new(vec!["u".into()], coord_names, vec![map])
        .expect("square by construction"))
}

fn wave_coord_names(n: usize) -> Vec<String> {
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

/// Explicit solution of the first-order Monge system:
/// `u_i = F_i(x_1 − u_1 t, …, x_n − u_n t)` solved per point.
#[derive(Debug, Clone)]
pub struct MongeFlowField {
    /// Fixed-point residuals over (u_1…u_n, t, x_1…x_n).
    residual_maps: Vec<SmoothMap>,
    n: usize,
}

pub fn monge_flow(f: &[SmoothMap]) -> Result<MongeFlowField, BuildError> {
    let n = f.len();
    assert!(n >= 1, "need at least one component");
    for map in f {
        check_arity("flow component", map, n)?;
    }
    let mut params: Vec<String> = (1..=n).map(|i| format!("u{i}")).collect();
    params.push("t".into());
    params.extend((1..=n).map(|i| format!("x{i}")));
    // Characteristic arguments x_j − u_j t.
    let args: Vec<Expr> = (0..n)
        .map(|j| Expr::sub(Expr::var(n + 1 + j), Expr::mul(Expr::var(j), Expr::var(n))))
        .collect();
    let residual_maps = f
        .iter()
        .enumerate()
        .map(|(i, map)| {
            Ok(SmoothMap::from_parts(
                params.clone(),
                Expr::sub(Expr::var(i), map.substituted(&args)?),
            ))
        })
        .collect::<Result<Vec<_>, BuildError>>()?;
    Ok(MongeFlowField { residual_maps, n })
}

impl MongeFlowField {
    pub fn components(&self) -> usize {
        self.n
    }

    /// Solve the fixed point at (t, x) and differentiate the components
    /// once by the implicit function theorem.
    pub fn sample(
        &self,
        coords: &[f64],
        seed: &[f64],
        opts: NewtonOptions,
    ) -> Result<VectorFieldSample, SolveError> {
        let n = self.n;
        debug_assert_eq!(coords.len(), n + 1);
        let solved = newton_on_maps(&self.residual_maps, coords, seed, opts)?.unknowns;

        let point: Vec<f64> = solved.iter().chain(coords.iter()).copied().collect();
        let args = Jet2::seed_all(&point);
        let jets: Vec<Jet2> = self
            .residual_maps
            .iter()
            .map(|m| m.eval_jets(&args))
            .collect::<Result<_, _>>()
            .map_err(SolveError::Eval)?;
        let mut jac = vec![0.0; n * n];
        for (i, jet) in jets.iter().enumerate() {
            jac[i * n..(i + 1) * n].copy_from_slice(&jet.grad[..n]);
        }
        let scale = row_norm_product(&jac, n);
        let factors = LuFactors::factor(&jac, n);
        let det = factors.det();
        if det.abs() < crate::solve::SINGULAR_FACTOR * scale || scale == 0.0 {
            return Err(SolveError::SingularJacobian { det, scale });
        }
        let mut grads = vec![vec![0.0; n + 1]; n];
        for k in 0..=n {
            let rhs: Vec<f64> = jets.iter().map(|jet| -jet.grad[n + k]).collect();
            let col = factors.solve(&rhs);
            for i in 0..n {
                grads[i][k] = col[i];
            }
        }
        let components = solved
            .iter()
            .zip(grads)
            .map(|(&value, grad)| FlowComponent { value, grad })
            .collect();
        Ok(VectorFieldSample { coords: coords.to_vec(), components })
    }
}

/// Dual-space data for the Legendre-linearized equation:
/// `w = f0 + f1` with f0 homogeneous of weight zero and f1 of weight one.
#[derive(Debug, Clone)]
pub struct LegendreData {
    pub dim: usize,
    pub f0: HomogeneousMap,
    pub f1: HomogeneousMap,
}

/// Deterministic sample points for homogeneity validation, away from the
/// chart boundary.
pub fn default_dual_samples(dim: usize) -> Vec<Vec<f64>> {
    const PATTERN: [f64; 6] = [1.0, -1.3, 0.7, 1.1, -0.8, 0.9];
    (0..6)
        .map(|j| (0..dim).map(|i| PATTERN[(i + j) % PATTERN.len()]).collect())
        .collect()
}

pub fn legendre_pair(f0: HomogeneousMap, f1: HomogeneousMap) -> Result<LegendreData, BuildError> {
    let samples = default_dual_samples(f0.dim().max(f1.dim()));
    legendre_pair_sampled(f0, f1, &samples)
}

pub fn legendre_pair_sampled(
    f0: HomogeneousMap,
    f1: HomogeneousMap,
    samples: &[Vec<f64>],
) -> Result<LegendreData, BuildError> {
    if f0.dim() != f1.dim() {
        return Err(BuildError::Arity { name: "f1", expected: f0.dim(), found: f1.dim() });
    }
    for (map, weight) in [(&f0, 0.0), (&f1, 1.0)] {
        let deviation =
            homogeneity_check_fn(|p| map.eval_scalar(p), weight, samples, &DEFAULT_SCALES)?;
        if deviation > 1e-8 {
            return Err(BuildError::HomogeneityViolation { weight, deviation });
        }
    }
    let dim = f0.dim();
    Ok(LegendreData { dim, f0, f1 })
}

impl LegendreData {
    /// Jet of `w = f0 + f1` at a dual point.
    pub fn w_jet(&self, xi: &[f64]) -> Result<Jet2, EvalError> {
        let args = Jet2::seed_all(xi);
        Ok(self.f0.eval_jets(&args)?.add(&self.f1.eval_jets(&args)?))
    }

    /// The linearized equation `Σ ξ_i ξ_j w_ij` at a dual point; zero for
    /// any valid weight decomposition by the Euler relations.
    pub fn check_univ3(&self, xi: &[f64]) -> Result<ResidualValue, EvalError> {
        let w = self.w_jet(xi)?;
        let mut raw = 0.0;
        let mut scale = 1.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let term = xi[i] * xi[j] * w.hess_at(i, j);
                raw += term;
                scale += term.abs();
            }
        }
        Ok(ResidualValue::new(raw, scale))
    }
}

/// Nodes and weights for the θ-superposition of plane-wave profiles.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    /// Periodic trapezoid rule on [0, 2π): spectrally exact for
    /// trigonometric integrands. Weights sum to 2π.
    pub fn periodic_trapezoid(n: usize) -> QuadratureRule {
        let w = std::f64::consts::TAU / n as f64;
        QuadratureRule {
            nodes: (0..n).map(|q| w * q as f64).collect(),
            weights: vec![w; n],
        }
    }
}

/// Superposition `u(t,x,y) = Σ_q w_q · profile(t + x cos θ_q + y sin θ_q, θ_q)`
/// in two spatial dimensions; jets propagate by linearity.
#[derive(Debug, Clone)]
pub struct SuperposedWaveField {
    profile: SmoothMap,
    rule: QuadratureRule,
}

pub fn superposed_wave(
    profile: SmoothMap,
    rule: QuadratureRule,
) -> Result<SuperposedWaveField, BuildError> {
    check_arity("profile", &profile, 2)?;
    if rule.nodes.is_empty() || rule.nodes.len() != rule.weights.len() {
        return Err(BuildError::EmptyQuadrature);
    }
    Ok(SuperposedWaveField { profile, rule })
}

impl SuperposedWaveField {
    pub fn sample(&self, coords: &[f64; 3]) -> Result<ScalarFieldSample, EvalError> {
        let seeds = Jet2::seed_all(coords);
        let mut total = Jet2::constant(0.0, 3);
        for (&theta, &weight) in self.rule.nodes.iter().zip(&self.rule.weights) {
            let (s, c) = theta.sin_cos();
            let phase = seeds[0]
                .add(&seeds[1].scale(c))
                .add(&seeds[2].scale(s));
            let value = self
                .profile
                .eval_jets(&[phase, Jet2::constant(theta, 3)])?;
            total = total.add(&value.scale(weight));
        }
        Ok(ScalarFieldSample::from_jet(coords, &total))
    }
}
