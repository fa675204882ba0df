//! PDE residuals and identities evaluated at field samples.
//!
//! Every operation returns a [`ResidualValue`] carrying the raw
//! combination together with a Hadamard-type magnitude of its constituent
//! terms; vanishing is always judged on the normalized value, so grid
//! points with large coordinates do not inflate the verdict.

use thiserror::Error;

use crate::calculus::ScalarFieldSample;
use crate::linalg::{det, row_norm_product};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ResidualError {
    #[error("sample has dimension {got}, operation needs {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("time axis {axis} out of range for dimension {dim}")]
    AxisOutOfRange { axis: usize, dim: usize },
    #[error("level-set samples are inconsistent: {0}")]
    LevelInconsistent(String),
    #[error("level-set slope |∂φ/∂x_d| = {0:e} too small")]
    SingularSlope(f64),
}

/// A scalar residual with the scale it should be compared against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualValue {
    pub raw: f64,
    pub scale: f64,
    pub normalized: f64,
}

impl ResidualValue {
    pub fn new(raw: f64, scale: f64) -> ResidualValue {
        let scale = if scale > 0.0 { scale } else { 1.0 };
        ResidualValue { raw, scale, normalized: raw / scale }
    }
}

/// Bateman combination `φ_tt φ_x² − 2 φ_tx φ_t φ_x + φ_xx φ_t²` in two
/// coordinates (t, x).
pub fn bateman_residual(s: &ScalarFieldSample) -> Result<ResidualValue, ResidualError> {
    if s.dim() != 2 {
        return Err(ResidualError::Dimension { expected: 2, got: s.dim() });
    }
    let (pt, px) = (s.grad[0], s.grad[1]);
    let terms = [
        s.hess_at(0, 0) * px * px,
        -2.0 * s.hess_at(0, 1) * pt * px,
        s.hess_at(1, 1) * pt * pt,
    ];
    let raw = terms.iter().sum();
    let scale = terms.iter().map(|t| t.abs()).sum::<f64>() + 1.0;
    Ok(ResidualValue::new(raw, scale))
}

/// Bordered-Hessian matrix of a sample: zero corner, gradient border,
/// Hessian block.
fn bordered_matrix(s: &ScalarFieldSample) -> Vec<f64> {
    let d = s.dim();
    let n = d + 1;
    let mut m = vec![0.0; n * n];
    for i in 0..d {
        m[i + 1] = s.grad[i];
        m[(i + 1) * n] = s.grad[i];
        for j in 0..d {
            m[(i + 1) * n + (j + 1)] = s.hess_at(i, j);
        }
    }
    m
}

/// Determinant of the bordered Hessian (the Universal Field Equation
/// left-hand side), via LU with partial pivoting.
pub fn bordered_hessian(s: &ScalarFieldSample) -> Result<ResidualValue, ResidualError> {
    if s.dim() < 2 {
        return Err(ResidualError::Dimension { expected: 2, got: s.dim() });
    }
    let n = s.dim() + 1;
    let m = bordered_matrix(s);
    let raw = det(&m, n);
    let scale = row_norm_product(&m, n);
    Ok(ResidualValue::new(raw, scale))
}

/// Determinant of the Hessian (homogeneous Monge–Ampère left-hand side).
pub fn monge_ampere_det(s: &ScalarFieldSample) -> ResidualValue {
    let d = s.dim();
    let raw = det(&s.hess, d);
    let scale = row_norm_product(&s.hess, d);
    ResidualValue::new(raw, scale)
}

/// Wave operator `φ_tt − Σ_{i≠t} φ_ii`.
pub fn wave_residual(
    s: &ScalarFieldSample,
    time_axis: usize,
) -> Result<ResidualValue, ResidualError> {
    let d = s.dim();
    if d < 2 {
        return Err(ResidualError::Dimension { expected: 2, got: d });
    }
    if time_axis >= d {
        return Err(ResidualError::AxisOutOfRange { axis: time_axis, dim: d });
    }
    let mut raw = s.hess_at(time_axis, time_axis);
    let mut scale = raw.abs() + 1.0;
    for i in 0..d {
        if i != time_axis {
            raw -= s.hess_at(i, i);
            scale += s.hess_at(i, i).abs();
        }
    }
    Ok(ResidualValue::new(raw, scale))
}

/// Null-gradient identity `φ_t² − Σ_{i≠t} φ_i²`.
pub fn null_gradient(
    s: &ScalarFieldSample,
    time_axis: usize,
) -> Result<ResidualValue, ResidualError> {
    let d = s.dim();
    if d < 2 {
        return Err(ResidualError::Dimension { expected: 2, got: d });
    }
    if time_axis >= d {
        return Err(ResidualError::AxisOutOfRange { axis: time_axis, dim: d });
    }
    let mut raw = s.grad[time_axis] * s.grad[time_axis];
    let mut scale = raw.abs() + 1.0;
    for i in 0..d {
        if i != time_axis {
            raw -= s.grad[i] * s.grad[i];
            scale += s.grad[i] * s.grad[i];
        }
    }
    Ok(ResidualValue::new(raw, scale))
}

/// One component of a first-order vector field sample.
#[derive(Debug, Clone)]
pub struct FlowComponent {
    pub value: f64,
    /// First derivatives over (t, x_1, …, x_n).
    pub grad: Vec<f64>,
}

/// Velocity-field sample for the first-order Monge system: coordinates
/// (t, x_1, …, x_n) and n components.
#[derive(Debug, Clone)]
pub struct VectorFieldSample {
    pub coords: Vec<f64>,
    pub components: Vec<FlowComponent>,
}

/// Which sign the transport term carries.
///
/// `Material` is the vanishing-material-derivative form
/// `u_t + u u_x + v u_y = 0`; `Printed` is the classical display
/// `u_t = u u_x + v u_y`, i.e. the transport term flipped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SignConvention {
    #[default]
    Material,
    Printed,
}

/// Residuals of the Monge system for any number of components.
pub fn monge_flow_residuals(
    field: &VectorFieldSample,
    convention: SignConvention,
) -> Result<Vec<ResidualValue>, ResidualError> {
    let n = field.components.len();
    if field.coords.len() != n + 1 {
        return Err(ResidualError::Dimension { expected: n + 1, got: field.coords.len() });
    }
    let sign = match convention {
        SignConvention::Material => 1.0,
        SignConvention::Printed => -1.0,
    };
    Ok(field
        .components
        .iter()
        .map(|comp| {
            let ut = comp.grad[0];
            let mut raw = ut;
            let mut scale = ut.abs() + 1.0;
            for (j, other) in field.components.iter().enumerate() {
                let term = other.value * comp.grad[1 + j];
                raw += sign * term;
                scale += term.abs();
            }
            ResidualValue::new(raw, scale)
        })
        .collect())
}

/// The two-component case of [`monge_flow_residuals`], coordinates
/// (t, x, y).
pub fn monge_system_residual(
    field: &VectorFieldSample,
    convention: SignConvention,
) -> Result<[ResidualValue; 2], ResidualError> {
    if field.components.len() != 2 {
        return Err(ResidualError::Dimension { expected: 2, got: field.components.len() });
    }
    let v = monge_flow_residuals(field, convention)?;
    Ok([v[0], v[1]])
}

/// Both sides of the level-set equivalence: the Hessian determinant of
/// the solved slice `z(x_1,…,x_{d−1})` against the bordered determinant
/// of φ at the same base point.
#[derive(Debug, Clone, Copy)]
pub struct HessianEquivalence {
    pub det_hz: f64,
    pub det_hz_normalized: f64,
    pub bordered: f64,
    pub bordered_normalized: f64,
    /// `det_hz / bordered`; meaningful only when both are away from zero.
    pub ratio: f64,
}

/// Threshold below which the level-set slope counts as singular.
pub const LEVEL_SLOPE_EPS: f64 = 1e-8;

/// Compare `det Hz` of the implicit slice against the bordered
/// determinant of φ. `level_consistency` bounds how far `z` may sit from
/// the base point's last coordinate.
pub fn hessian_equivalence(
    phi_sample: &ScalarFieldSample,
    z_sample: &ScalarFieldSample,
    level_consistency: f64,
) -> Result<HessianEquivalence, ResidualError> {
    let d = phi_sample.dim();
    if z_sample.dim() != d - 1 {
        return Err(ResidualError::Dimension { expected: d - 1, got: z_sample.dim() });
    }
    for k in 0..d - 1 {
        if (phi_sample.coords[k] - z_sample.coords[k]).abs() > level_consistency {
            return Err(ResidualError::LevelInconsistent(format!(
                "base coordinate {k} differs: {} vs {}",
                phi_sample.coords[k], z_sample.coords[k]
            )));
        }
    }
    if (z_sample.phi - phi_sample.coords[d - 1]).abs() > level_consistency {
        return Err(ResidualError::LevelInconsistent(format!(
            "z = {} but the base point has x_d = {}",
            z_sample.phi,
            phi_sample.coords[d - 1]
        )));
    }
    let slope = phi_sample.grad[d - 1];
    if slope.abs() < LEVEL_SLOPE_EPS {
        return Err(ResidualError::SingularSlope(slope));
    }

    let hz = monge_ampere_det(z_sample);
    let bordered = bordered_hessian(phi_sample)?;
    Ok(HessianEquivalence {
        det_hz: hz.raw,
        det_hz_normalized: hz.normalized,
        bordered: bordered.raw,
        bordered_normalized: bordered.normalized,
        ratio: hz.raw / bordered.raw,
    })
}
