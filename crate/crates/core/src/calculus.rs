//! Derivatives of the implicitly defined field.
//!
//! Three routes to the same numbers, used to check each other:
//!
//! * [`implicit_jet`]: the implicit function theorem applied to the full
//!   constraint system, with every residual differentiated to second
//!   order by jets. This is the authoritative path.
//! * [`chaundy_jet`]: closed formulas for the plane-envelope
//!   construction in three coordinates, built from μ and λ.
//! * [`fd_jet`]: central finite differences of re-solved fields, slow
//!   and entirely independent. The oracle of last resort.

use crate::expr::{EvalError, SmoothMap};
use crate::jet::Jet2;
use crate::linalg::{row_norm_product, LuFactors};
use crate::solve::{newton_solve, AnsatzSystem, NewtonOptions, SolveError, SINGULAR_FACTOR};

/// Field data at one grid point: value, parameters, exact gradient and
/// Hessian, plus envelope diagnostics when produced by the closed-form
/// route.
#[derive(Debug, Clone)]
pub struct ScalarFieldSample {
    pub coords: Vec<f64>,
    pub phi: f64,
    /// Auxiliary unknowns (u, v, …) in system order, `phi` excluded.
    pub parameters: Vec<f64>,
    pub grad: Vec<f64>,
    /// Row-major `d × d`, symmetric.
    pub hess: Vec<f64>,
    pub diagnostics: Option<ChaundyDiagnostics>,
}

impl ScalarFieldSample {
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn hess_at(&self, i: usize, j: usize) -> f64 {
        self.hess[i * self.dim() + j]
    }

    /// Sample of an explicit field from its jet at a point.
    pub fn from_jet(coords: &[f64], jet: &Jet2) -> ScalarFieldSample {
        ScalarFieldSample {
            coords: coords.to_vec(),
            phi: jet.value,
            parameters: Vec::new(),
            grad: jet.grad.clone(),
            hess: jet.hess.clone(),
            diagnostics: None,
        }
    }

    /// Evaluate an explicit field expression (parameters = coordinates).
    pub fn from_map(map: &SmoothMap, coords: &[f64]) -> Result<ScalarFieldSample, EvalError> {
        let jet = map.eval_jets(&Jet2::seed_all(coords))?;
        Ok(ScalarFieldSample::from_jet(coords, &jet))
    }
}

/// Envelope diagnostics of the closed-form route.
#[derive(Debug, Clone)]
pub struct ChaundyDiagnostics {
    /// μ = t ∂F1/∂φ + x ∂F2/∂φ + y ∂F3/∂φ − ∂F4/∂φ.
    pub mu: f64,
    /// Same combination with second φ-derivatives.
    pub lambda: f64,
    /// (u_t, u_x, u_y).
    pub param_grad: Vec<f64>,
}

/// Implicit gradient and Hessian of the field unknown from a solved
/// constraint system.
///
/// First derivatives solve `J ∂y/∂x_k = −∂g/∂x_k`; differentiating that
/// relation once more gives the second derivatives, with every required
/// derivative of the residual maps read off their second-order jets.
pub fn implicit_jet(
    system: &AnsatzSystem,
    coords: &[f64],
    unknowns: &[f64],
) -> Result<ScalarFieldSample, SolveError> {
    let m = system.unknown_count();
    let d = system.coord_dim();
    let point: Vec<f64> = unknowns.iter().chain(coords.iter()).copied().collect();
    let args = Jet2::seed_all(&point);
    let jets: Vec<Jet2> = system
        .residual_maps()
        .iter()
        .map(|map| map.eval_jets(&args))
        .collect::<Result<_, _>>()
        .map_err(SolveError::Eval)?;

    let mut jac = vec![0.0; m * m];
    for (i, jet) in jets.iter().enumerate() {
        jac[i * m..(i + 1) * m].copy_from_slice(&jet.grad[..m]);
    }
    let scale = row_norm_product(&jac, m);
    let factors = LuFactors::factor(&jac, m);
    let det = factors.det();
    if det.abs() < SINGULAR_FACTOR * scale || scale == 0.0 {
        return Err(SolveError::SingularJacobian { det, scale });
    }

    // First derivatives of every unknown: y1[j * d + k] = ∂y_j/∂x_k.
    let mut y1 = vec![0.0; m * d];
    for k in 0..d {
        let rhs: Vec<f64> = jets.iter().map(|jet| -jet.grad[m + k]).collect();
        let col = factors.solve(&rhs);
        for j in 0..m {
            y1[j * d + k] = col[j];
        }
    }

    // Second derivatives of the field unknown.
    let field = system.field_index();
    let mut hess = vec![0.0; d * d];
    for k in 0..d {
        for l in k..d {
            let mut rhs = vec![0.0; m];
            for (i, jet) in jets.iter().enumerate() {
                let mut v = jet.hess_at(m + k, m + l);
                for j in 0..m {
                    v += jet.hess_at(j, m + l) * y1[j * d + k];
                    v += jet.hess_at(j, m + k) * y1[j * d + l];
                    for p in 0..m {
                        v += jet.hess_at(j, p) * y1[j * d + k] * y1[p * d + l];
                    }
                }
                rhs[i] = -v;
            }
            let z = factors.solve(&rhs);
            hess[k * d + l] = z[field];
            hess[l * d + k] = z[field];
        }
    }

    let parameters: Vec<f64> = unknowns
        .iter()
        .enumerate()
        .filter_map(|(j, &v)| (j != field).then_some(v))
        .collect();
    Ok(ScalarFieldSample {
        coords: coords.to_vec(),
        phi: unknowns[field],
        parameters,
        grad: y1[field * d..(field + 1) * d].to_vec(),
        hess,
        diagnostics: None,
    })
}

/// Evaluated derivative data of the four plane-family coefficients at one
/// (φ, u) point.
struct ChaundyParts {
    /// value, ∂φ, ∂u, ∂φφ, ∂φu, ∂uu of each F_i.
    f: Vec<Jet2>,
    mu: f64,
    lambda: f64,
    /// ∂μ/∂u = ∂²g/∂φ∂u.
    h_phi: f64,
    /// φ_k = −F_{k+1}/μ.
    phi_grad: [f64; 3],
    /// u_k from the differentiated second constraint.
    u_grad: [f64; 3],
}

fn chaundy_parts(
    f: &[SmoothMap; 4],
    coords: &[f64; 3],
    phi: f64,
    u: f64,
) -> Result<ChaundyParts, SolveError> {
    let args = Jet2::seed_all(&[phi, u]);
    let jets: Vec<Jet2> = f
        .iter()
        .map(|m| m.eval_jets(&args))
        .collect::<Result<_, _>>()
        .map_err(SolveError::Eval)?;
    let combine = |pick: &dyn Fn(&Jet2) -> f64| -> f64 {
        coords[0] * pick(&jets[0]) + coords[1] * pick(&jets[1]) + coords[2] * pick(&jets[2])
            - pick(&jets[3])
    };
    let mu = combine(&|j| j.grad[0]);
    let lambda = combine(&|j| j.hess_at(0, 0));
    let h_phi = combine(&|j| j.hess_at(0, 1));
    let h_u = combine(&|j| j.hess_at(1, 1));

    let mu_scale = 1.0
        + (0..3)
            .map(|i| (coords[i] * jets[i].grad[0]).abs())
            .sum::<f64>()
        + jets[3].grad[0].abs();
    if mu.abs() <= 1e-10 * mu_scale {
        return Err(SolveError::SingularJacobian { det: mu, scale: mu_scale });
    }

    let phi_grad = [
        -jets[0].value / mu,
        -jets[1].value / mu,
        -jets[2].value / mu,
    ];

    // u_k = −(∂F_{k+1}/∂u + h_φ φ_k)/h_u. Families with no u dependence
    // leave u undetermined but also unused; their u-gradient is zero.
    let cu = [jets[0].grad[1], jets[1].grad[1], jets[2].grad[1]];
    let hu_scale = 1.0
        + (0..3)
            .map(|i| (coords[i] * jets[i].hess_at(1, 1)).abs())
            .sum::<f64>()
        + jets[3].hess_at(1, 1).abs();
    let u_decoupled =
        cu.iter().all(|c| c.abs() <= 1e-12) && h_phi.abs() <= 1e-12 && jets[3].grad[1].abs() <= 1e-12;
    let u_grad = if u_decoupled {
        [0.0; 3]
    } else if h_u.abs() <= 1e-10 * hu_scale {
        return Err(SolveError::SingularJacobian { det: h_u, scale: hu_scale });
    } else {
        [
            -(cu[0] + h_phi * phi_grad[0]) / h_u,
            -(cu[1] + h_phi * phi_grad[1]) / h_u,
            -(cu[2] + h_phi * phi_grad[2]) / h_u,
        ]
    };

    Ok(ChaundyParts { f: jets, mu, lambda, h_phi, phi_grad, u_grad })
}

/// Closed-form derivatives of the plane-envelope field.
///
/// First derivatives are φ_k = −F_k/μ. Second derivatives complete the
/// classical display: differentiating μ·φ_k + F_k = 0 along x_l gives
///
/// ```text
/// μ·φ_kl = −( λ φ_k φ_l + μ_u u_l φ_k + ∂F_l/∂φ φ_k + ∂F_k/∂φ φ_l
///             + ∂F_k/∂u u_l )
/// ```
///
/// including the μ_u = ∂μ/∂u term, which vanishes for families that are
/// additively separable in (φ, u). The result is symmetrized over (k, l);
/// the two orders agree identically on the constraint manifold.
pub fn chaundy_jet(
    f: &[SmoothMap; 4],
    coords: &[f64; 3],
    phi: f64,
    u: f64,
) -> Result<ScalarFieldSample, SolveError> {
    let parts = chaundy_parts(f, coords, phi, u)?;
    let ChaundyParts { f: jets, mu, lambda, h_phi, phi_grad, u_grad, .. } = &parts;

    let cphi = [jets[0].grad[0], jets[1].grad[0], jets[2].grad[0]];
    let cu = [jets[0].grad[1], jets[1].grad[1], jets[2].grad[1]];
    let mut hess = vec![0.0; 9];
    for k in 0..3 {
        for l in k..3 {
            let v_kl = lambda * phi_grad[k] * phi_grad[l]
                + h_phi * u_grad[l] * phi_grad[k]
                + cphi[l] * phi_grad[k]
                + cphi[k] * phi_grad[l]
                + cu[k] * u_grad[l];
            let v_lk = lambda * phi_grad[l] * phi_grad[k]
                + h_phi * u_grad[k] * phi_grad[l]
                + cphi[k] * phi_grad[l]
                + cphi[l] * phi_grad[k]
                + cu[l] * u_grad[k];
            let value = -(v_kl + v_lk) / (2.0 * mu);
            hess[k * 3 + l] = value;
            hess[l * 3 + k] = value;
        }
    }

    Ok(ScalarFieldSample {
        coords: coords.to_vec(),
        phi,
        parameters: vec![u],
        grad: phi_grad.to_vec(),
        hess,
        diagnostics: Some(ChaundyDiagnostics {
            mu: *mu,
            lambda: *lambda,
            param_grad: u_grad.to_vec(),
        }),
    })
}

/// Normalized cross-derivative consistency defects
/// `|∂F_k/∂u · u_l − ∂F_l/∂u · u_k|` for the coordinate pairs
/// (t,x), (t,y), (x,y).
pub fn chaundy_consistency(
    f: &[SmoothMap; 4],
    coords: &[f64; 3],
    phi: f64,
    u: f64,
) -> Result<[f64; 3], SolveError> {
    let parts = chaundy_parts(f, coords, phi, u)?;
    let cu = [
        parts.f[0].grad[1],
        parts.f[1].grad[1],
        parts.f[2].grad[1],
    ];
    let pairs = [(0, 1), (0, 2), (1, 2)];
    Ok(pairs.map(|(k, l)| {
        let a = cu[k] * parts.u_grad[l];
        let b = cu[l] * parts.u_grad[k];
        (a - b).abs() / (1.0 + a.abs() + b.abs())
    }))
}

/// Derivatives of the solved field by central finite differences of
/// repeated Newton solves: 3-point stencils on the axes, 4-point cross
/// stencils for the mixed entries, all with step `h`.
pub fn fd_jet(
    system: &AnsatzSystem,
    coords: &[f64],
    seed: &[f64],
    h: f64,
    opts: NewtonOptions,
) -> Result<ScalarFieldSample, SolveError> {
    let d = system.coord_dim();
    let field = system.field_index();
    let center = newton_solve(system, coords, seed, opts)?;
    let phi_at = |q: &[f64]| -> Result<f64, SolveError> {
        Ok(newton_solve(system, q, &center.unknowns, opts)?.unknowns[field])
    };

    let phi0 = center.unknowns[field];
    let mut grad = vec![0.0; d];
    let mut hess = vec![0.0; d * d];
    let shifted = |k: usize, dk: f64, l: usize, dl: f64| -> Vec<f64> {
        let mut q = coords.to_vec();
        q[k] += dk;
        q[l] += dl;
        q
    };
    for k in 0..d {
        let hi = phi_at(&shifted(k, h, k, 0.0))?;
        let lo = phi_at(&shifted(k, -h, k, 0.0))?;
        grad[k] = (hi - lo) / (2.0 * h);
        hess[k * d + k] = (hi - 2.0 * phi0 + lo) / (h * h);
    }
    for k in 0..d {
        for l in k + 1..d {
            let pp = phi_at(&shifted(k, h, l, h))?;
            let pm = phi_at(&shifted(k, h, l, -h))?;
            let mp = phi_at(&shifted(k, -h, l, h))?;
            let mm = phi_at(&shifted(k, -h, l, -h))?;
            let v = (pp - pm - mp + mm) / (4.0 * h * h);
            hess[k * d + l] = v;
            hess[l * d + k] = v;
        }
    }

    let parameters: Vec<f64> = center
        .unknowns
        .iter()
        .enumerate()
        .filter_map(|(j, &v)| (j != field).then_some(v))
        .collect();
    Ok(ScalarFieldSample {
        coords: coords.to_vec(),
        phi: phi0,
        parameters,
        grad,
        hess,
        diagnostics: None,
    })
}
