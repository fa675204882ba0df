//! Newton solution of ansatz constraint systems, point by point, and
//! branch continuation over coordinate grids.
//!
//! The implicit solutions built in this crate are multivalued; branch
//! choice is always made explicit through the seed and through
//! neighbor-to-neighbor continuation. There is no global root finding.

use thiserror::Error;

use crate::expr::{EvalError, SmoothMap};
use crate::jet::Jet2;
use crate::linalg::{row_norm_product, LuFactors};

/// |det J| below `SINGULAR_FACTOR ×` (Hadamard row-norm product) counts
/// as singular. Scaled this way, the test is insensitive to the overall
/// magnitude of the residual maps.
pub const SINGULAR_FACTOR: f64 = 1e-12;

/// A square constraint system `g(unknowns; coordinates) = 0` defining the
/// unknowns implicitly at each coordinate point.
#[derive(Debug, Clone)]
pub struct AnsatzSystem {
    coord_names: Vec<String>,
    unknown_names: Vec<String>,
    residual_maps: Vec<SmoothMap>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SystemError {
    #[error("system is not square: {unknowns} unknowns vs {residuals} residuals")]
    NotSquare { unknowns: usize, residuals: usize },
    #[error("residual map {index} has parameters {found:?}, expected {expected:?}")]
    ParamMismatch {
        index: usize,
        expected: Vec<String>,
        found: Vec<String>,
    },
}

impl AnsatzSystem {
    /// Residual maps must each take the unknowns followed by the
    /// coordinates, in order.
    pub fn new(
        unknown_names: Vec<String>,
        coord_names: Vec<String>,
        residual_maps: Vec<SmoothMap>,
    ) -> Result<AnsatzSystem, SystemError> {
        if residual_maps.len() != unknown_names.len() {
            return Err(SystemError::NotSquare {
                unknowns: unknown_names.len(),
                residuals: residual_maps.len(),
            });
        }
        let expected: Vec<String> = unknown_names
            .iter()
            .chain(coord_names.iter())
            .cloned()
            .collect();
        for (index, map) in residual_maps.iter().enumerate() {
            if map.params() != expected.as_slice() {
                return Err(SystemError::ParamMismatch {
                    index,
                    expected: expected.clone(),
                    found: map.params().to_vec(),
                });
            }
        }
        Ok(AnsatzSystem {
            coord_names,
            unknown_names,
            residual_maps,
        })
    }

    pub fn coord_dim(&self) -> usize {
        self.coord_names.len()
    }

    pub fn unknown_count(&self) -> usize {
        self.unknown_names.len()
    }

    pub fn coord_names(&self) -> &[String] {
        &self.coord_names
    }

    pub fn unknown_names(&self) -> &[String] {
        &self.unknown_names
    }

    pub fn residual_maps(&self) -> &[SmoothMap] {
        &self.residual_maps
    }

    /// Index of the scalar field unknown: `phi` when present, else the
    /// first unknown.
    pub fn field_index(&self) -> usize {
        self.unknown_names
            .iter()
            .position(|n| n == "phi")
            .unwrap_or(0)
    }

    /// Residual values at explicit unknowns and coordinates.
    pub fn residuals_at(&self, unknowns: &[f64], coords: &[f64]) -> Result<Vec<f64>, EvalError> {
        let args: Vec<f64> = unknowns.iter().chain(coords.iter()).copied().collect();
        self.residual_maps
            .iter()
            .map(|m| m.eval_scalar(&args))
            .collect()
    }

    /// Max |g_i| at a candidate point; NaN residuals count as infinite.
    pub fn residual_norm(&self, unknowns: &[f64], coords: &[f64]) -> Result<f64, EvalError> {
        Ok(max_abs(&self.residuals_at(unknowns, coords)?))
    }
}

/// Max-norm that refuses to lose NaN entries: `f64::max` would silently
/// drop them and a divergent trial step could masquerade as converged.
pub(crate) fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0f64, |acc, r| {
        if r.is_nan() {
            f64::INFINITY
        } else {
            acc.max(r.abs())
        }
    })
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("singular Jacobian: |det| = {det:e} against scale {scale:e}")]
    SingularJacobian { det: f64, scale: f64 },
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        // Quadratic convergence near regular points makes a tight
        // tolerance cheap for these small square systems.
        NewtonOptions { tol: 1e-12, max_iter: 50 }
    }
}

#[derive(Debug, Clone)]
pub struct NewtonResult {
    pub unknowns: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

const MAX_HALVINGS: usize = 20;

/// Damped Newton iteration on a square system, Jacobian from jet
/// gradients in the unknowns.
pub fn newton_solve(
    system: &AnsatzSystem,
    coords: &[f64],
    seed: &[f64],
    opts: NewtonOptions,
) -> Result<NewtonResult, SolveError> {
    newton_on_maps(&system.residual_maps, coords, seed, opts)
}

/// Newton driver shared by [`newton_solve`] and the explicit field
/// constructors; `maps` follow the unknowns-then-coordinates convention.
pub(crate) fn newton_on_maps(
    maps: &[SmoothMap],
    coords: &[f64],
    seed: &[f64],
    opts: NewtonOptions,
) -> Result<NewtonResult, SolveError> {
    let m = maps.len();
    debug_assert_eq!(seed.len(), m);
    let mut unknowns = seed.to_vec();

    // Evaluate residual values and their Jacobian in the unknowns only;
    // coordinates enter as constants.
    let eval = |y: &[f64]| -> Result<(Vec<f64>, Vec<f64>), EvalError> {
        let mut args: Vec<Jet2> = Vec::with_capacity(m + coords.len());
        for (i, &v) in y.iter().enumerate() {
            let mut jet = Jet2::constant(v, m);
            jet.grad[i] = 1.0;
            args.push(jet);
        }
        for &c in coords {
            args.push(Jet2::constant(c, m));
        }
        let mut values = Vec::with_capacity(m);
        let mut jacobian = vec![0.0; m * m];
        for (i, map) in maps.iter().enumerate() {
            let jet = map.eval_jets(&args)?;
            values.push(jet.value);
            jacobian[i * m..(i + 1) * m].copy_from_slice(&jet.grad);
        }
        Ok((values, jacobian))
    };

    let (mut residuals, mut jacobian) = eval(&unknowns)?;
    let mut res_norm = max_abs(&residuals);
    if !res_norm.is_finite() {
        return Err(SolveError::NonConvergence { iterations: 0, residual: res_norm });
    }
    if res_norm <= opts.tol {
        return Ok(NewtonResult { unknowns, iterations: 0, residual: res_norm });
    }

    for iteration in 1..=opts.max_iter {
        let scale = row_norm_product(&jacobian, m);
        let factors = LuFactors::factor(&jacobian, m);
        let det = factors.det();
        if det.abs() < SINGULAR_FACTOR * scale || scale == 0.0 {
            return Err(SolveError::SingularJacobian { det, scale });
        }
        let neg_g: Vec<f64> = residuals.iter().map(|r| -r).collect();
        let step = factors.solve(&neg_g);

        // Step halving until the residual norm decreases.
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<f64> = unknowns
                .iter()
                .zip(&step)
                .map(|(y, s)| y + alpha * s)
                .collect();
            // An Err here means the trial left the domain: reject it.
            if let Ok((g, j)) = eval(&trial) {
                let n = max_abs(&g);
                if n.is_finite() && n < res_norm {
                    accepted = Some((trial, g, j, n));
                    break;
                }
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((trial, g, j, n)) => {
                unknowns = trial;
                residuals = g;
                jacobian = j;
                res_norm = n;
            }
            None => {
                return Err(SolveError::NonConvergence {
                    iterations: iteration,
                    residual: res_norm,
                })
            }
        }
        if res_norm <= opts.tol {
            return Ok(NewtonResult { unknowns, iterations: iteration, residual: res_norm });
        }
    }
    Err(SolveError::NonConvergence { iterations: opts.max_iter, residual: res_norm })
}

// ---------------------------------------------------------------------------
// Grids and continuation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct AxisSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl AxisSpec {
    pub fn value(&self, i: usize) -> f64 {
        if self.count <= 1 {
            self.min
        } else {
            self.min + (self.max - self.min) * (i as f64) / ((self.count - 1) as f64)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub axes: Vec<AxisSpec>,
}

impl GridSpec {
    pub fn new(axes: Vec<AxisSpec>) -> GridSpec {
        GridSpec { axes }
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coordinates of the lexicographic point `index` (last axis fastest).
    pub fn point(&self, index: usize) -> Vec<f64> {
        let mut rem = index;
        let mut out = vec![0.0; self.axes.len()];
        for (k, axis) in self.axes.iter().enumerate().rev() {
            out[k] = axis.value(rem % axis.count);
            rem /= axis.count;
        }
        out
    }
}

/// Order in which the lattice is swept; each point is seeded from the
/// previously solved one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TraversalPolicy {
    #[default]
    Lexicographic,
    ReverseLexicographic,
}

impl TraversalPolicy {
    fn indices(self, len: usize) -> Box<dyn Iterator<Item = usize>> {
        match self {
            TraversalPolicy::Lexicographic => Box::new(0..len),
            TraversalPolicy::ReverseLexicographic => Box::new((0..len).rev()),
        }
    }
}

#[derive(Debug, Clone)]
pub enum PointSolve {
    Solved {
        unknowns: Vec<f64>,
        iterations: usize,
        residual: f64,
    },
    Failed(SolveError),
}

impl PointSolve {
    pub fn is_solved(&self) -> bool {
        matches!(self, PointSolve::Solved { .. })
    }

    pub fn unknowns(&self) -> Option<&[f64]> {
        match self {
            PointSolve::Solved { unknowns, .. } => Some(unknowns),
            PointSolve::Failed(_) => None,
        }
    }
}

/// One continuation branch over a grid.
#[derive(Debug, Clone)]
pub struct SolutionBranch {
    pub grid: GridSpec,
    pub seed: Vec<f64>,
    /// Indexed like the grid (lexicographic), regardless of traversal.
    pub points: Vec<PointSolve>,
}

impl SolutionBranch {
    pub fn convergence_fraction(&self) -> f64 {
        if self.points.is_empty() {
            return 1.0;
        }
        self.points.iter().filter(|p| p.is_solved()).count() as f64 / self.points.len() as f64
    }

    /// Iterate solved points as `(grid index, coords, unknowns)`.
    pub fn solved(&self) -> impl Iterator<Item = (usize, Vec<f64>, &[f64])> + '_ {
        self.points.iter().enumerate().filter_map(move |(i, p)| {
            p.unknowns().map(|u| (i, self.grid.point(i), u))
        })
    }
}

/// Sweep the lattice, seeding each point from the last solved one.
/// Failure at the first traversed point aborts; later failures are
/// recorded per point.
pub fn grid_continuation(
    system: &AnsatzSystem,
    grid: &GridSpec,
    seed: &[f64],
    policy: TraversalPolicy,
    opts: NewtonOptions,
) -> Result<SolutionBranch, SolveError> {
    let len = grid.len();
    let mut points: Vec<PointSolve> = Vec::with_capacity(len);
    points.resize_with(len, || {
        PointSolve::Failed(SolveError::NonConvergence { iterations: 0, residual: f64::NAN })
    });
    if len == 0 {
        return Ok(SolutionBranch { grid: grid.clone(), seed: seed.to_vec(), points });
    }
    let mut carry = seed.to_vec();
    for (step, index) in policy.indices(len).enumerate() {
        let coords = grid.point(index);
        match newton_solve(system, &coords, &carry, opts) {
            Ok(result) => {
                carry.clone_from(&result.unknowns);
                points[index] = PointSolve::Solved {
                    unknowns: result.unknowns,
                    iterations: result.iterations,
                    residual: result.residual,
                };
            }
            Err(err) => {
                if step == 0 {
                    return Err(err);
                }
                points[index] = PointSolve::Failed(err);
            }
        }
    }
    Ok(SolutionBranch { grid: grid.clone(), seed: seed.to_vec(), points })
}

/// Continuation with region auto-restriction: if fewer than
/// `min_fraction` of the points converge, each axis range is halved
/// toward its first point and the sweep retried, up to `max_shrinks`
/// times. Returns the grid actually used together with its branch.
pub fn grid_continuation_restricted(
    system: &AnsatzSystem,
    grid: &GridSpec,
    seed: &[f64],
    policy: TraversalPolicy,
    opts: NewtonOptions,
    min_fraction: f64,
    max_shrinks: usize,
) -> Result<(GridSpec, SolutionBranch), SolveError> {
    let mut current = grid.clone();
    let mut attempt = 0;
    loop {
        let branch = grid_continuation(system, &current, seed, policy, opts)?;
        if branch.convergence_fraction() >= min_fraction || attempt >= max_shrinks {
            return Ok((current, branch));
        }
        attempt += 1;
        for axis in &mut current.axes {
            axis.max = axis.min + 0.5 * (axis.max - axis.min);
        }
    }
}
