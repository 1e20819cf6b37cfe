//! Projected adaptive gradient ascent over sets of complex beamforming
//! vectors.
//!
//! The driver maximizes a real objective of `k` complex vectors by Wirtinger
//! steepest ascent: each iteration steps every vector along its gradient with
//! a shared step size, then projects back onto the feasible set (unit norm,
//! optionally followed by the constant-amplitude projection). If a candidate
//! step would decrease the objective, the step is reverted and the step size
//! halved before retrying, which keeps the accepted objective trace
//! monotone; halving below `STEP_FLOOR` or exhausting `max_iters` terminates
//! the run without the convergence flag.
//!
//! Gradients follow the `d/d conj(x)` convention: for a real objective this
//! is the steepest-ascent direction, and `finite_difference_gradient`
//! provides an independent numerical oracle in the same convention.

use rand::Rng;
use std::io::{self, Write};

use crate::channel::{ChannelMatrix, standard_complex_gaussian};
use crate::error::{Error, Result};
use crate::{C64, CVector};

/// Step sizes below this terminate a halving loop that never finds an
/// uphill candidate (for instance when started exactly at a local maximum).
pub const STEP_FLOOR: f64 = 1e-12;

/// Feasible set for a beamforming vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    /// Euclidean unit norm.
    UnitNorm,
    /// Every coefficient has magnitude `1/sqrt(n)` (phase-only hardware).
    /// A subset of the unit sphere.
    ConstantAmplitude,
}

/// How the starting vectors are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitScheme {
    /// Normalized i.i.d. complex Gaussian vectors.
    Gaussian,
    /// Dominant singular vectors of the link channel.
    Svd,
}

impl InitScheme {
    pub fn name(&self) -> &'static str {
        match self {
            InitScheme::Gaussian => "gaussian",
            InitScheme::Svd => "svd",
        }
    }
}

/// A beamforming vector tagged with the constraint it satisfies.
#[derive(Debug, Clone, PartialEq)]
pub struct Beamformer {
    pub coeffs: CVector,
    pub constraint: Constraint,
}

impl Beamformer {
    /// Wraps a vector after checking constraint membership to 1e-10.
    pub fn new(coeffs: CVector, constraint: Constraint) -> Result<Self> {
        let tol = 1e-10;
        match constraint {
            Constraint::UnitNorm => {
                if (coeffs.norm() - 1.0).abs() > tol {
                    return Err(Error::InvalidConfig(format!(
                        "vector norm {} is not 1",
                        coeffs.norm()
                    )));
                }
            }
            Constraint::ConstantAmplitude => {
                let want = 1.0 / (coeffs.len() as f64).sqrt();
                for (m, z) in coeffs.iter().enumerate() {
                    if (z.norm() - want).abs() > tol {
                        return Err(Error::InvalidConfig(format!(
                            "entry {m} has magnitude {} instead of {want}",
                            z.norm()
                        )));
                    }
                }
            }
        }
        Ok(Self { coeffs, constraint })
    }

    /// Projects an arbitrary vector onto the constraint set.
    pub fn project(coeffs: &CVector, constraint: Constraint) -> Result<Self> {
        let projected = project_step(coeffs, constraint)?;
        Ok(Self { coeffs: projected, constraint })
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }
}

/// Scales a nonzero vector to unit Euclidean norm.
pub fn project_unit_norm(v: &CVector) -> Result<CVector> {
    let norm = v.norm();
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(v.unscale(norm))
}

/// Maps every entry to magnitude `1/sqrt(n)` while keeping its phase.
/// Zero entries are assigned phase zero.
pub fn project_constant_amplitude(v: &CVector) -> CVector {
    let target = 1.0 / (v.len() as f64).sqrt();
    v.map(|z| {
        let m = z.norm();
        if m == 0.0 {
            C64::new(target, 0.0)
        } else {
            z * (target / m)
        }
    })
}

/// The projection applied after each ascent step: unit norm, then the
/// constant-amplitude projection when configured. The CA projection is
/// scale-invariant, so the preceding normalization only conditions the
/// intermediate magnitudes.
fn project_step(v: &CVector, constraint: Constraint) -> Result<CVector> {
    match constraint {
        Constraint::UnitNorm => project_unit_norm(v),
        Constraint::ConstantAmplitude => {
            let u = project_unit_norm(v).unwrap_or_else(|_| v.clone());
            Ok(project_constant_amplitude(&u))
        }
    }
}

/// Draws a normalized complex Gaussian vector under the given constraint.
/// The measure-zero all-zeros draw is resampled.
pub fn init_gaussian<R: Rng + ?Sized>(n: usize, constraint: Constraint, rng: &mut R) -> Beamformer {
    loop {
        let v = CVector::from_fn(n, |_, _| standard_complex_gaussian(rng));
        if let Ok(b) = Beamformer::project(&v, constraint) {
            return b;
        }
    }
}

/// Builds `(precoder, combiner)` from the dominant singular pair of the
/// channel, projected onto the constraint set.
pub fn init_svd(h: &ChannelMatrix, constraint: Constraint) -> Result<(Beamformer, Beamformer)> {
    if h.entries.norm() == 0.0 {
        return Err(Error::ZeroVector);
    }
    let svd = h.entries.clone().svd(true, true);
    let (mut best, mut best_sv) = (0, f64::NEG_INFINITY);
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > best_sv {
            best_sv = s;
            best = i;
        }
    }
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let combiner: CVector = u.column(best).into_owned();
    let precoder: CVector = v_t.row(best).adjoint();
    Ok((
        Beamformer::project(&precoder, constraint)?,
        Beamformer::project(&combiner, constraint)?,
    ))
}

/// Optimizer settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    /// Initial step size.
    pub step0: f64,
    /// Convergence threshold on the change of the objective between
    /// accepted iterates.
    pub epsilon: f64,
    /// Hard cap on accepted iterations.
    pub max_iters: usize,
    pub init: InitScheme,
    pub constraint: Constraint,
    /// When set, a decreasing candidate is accepted anyway and only the
    /// step size is halved; the objective trace may then be non-monotone.
    /// Off by default.
    pub accept_descent: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            step0: 1.0,
            epsilon: 1e-5,
            max_iters: 20_000,
            init: InitScheme::Svd,
            constraint: Constraint::ConstantAmplitude,
            accept_descent: false,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let step_ok = self.step0.is_finite() && self.step0 > 0.0;
        if !step_ok {
            return Err(Error::InvalidConfig(format!("step0 must be > 0, got {}", self.step0)));
        }
        let epsilon_ok = self.epsilon.is_finite() && self.epsilon > 0.0;
        if !epsilon_ok {
            return Err(Error::InvalidConfig(format!(
                "epsilon must be > 0, got {}",
                self.epsilon
            )));
        }
        if self.max_iters < 1 {
            return Err(Error::InvalidConfig("max_iters must be >= 1".into()));
        }
        Ok(())
    }
}

/// The accepted-iterate record of one ascent run.
#[derive(Debug, Clone)]
pub struct OptimizerTrace {
    /// Objective at the start followed by every accepted iterate;
    /// non-decreasing unless `accept_descent` was set.
    pub objective_history: Vec<f64>,
    /// Step size used for each accepted iterate (one entry per iteration).
    pub step_history: Vec<f64>,
    /// Number of accepted iterations; equals `objective_history.len() - 1`.
    pub iterations: usize,
    pub final_vectors: Vec<Beamformer>,
    /// True when the run stopped because the objective change between
    /// accepted iterates fell to `epsilon` or below.
    pub converged: bool,
}

impl OptimizerTrace {
    pub fn final_objective(&self) -> f64 {
        *self.objective_history.last().expect("history never empty")
    }

    /// Writes the trace as CSV with columns `iter,objective,step`; the
    /// initial row has an empty step field.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "iter,objective,step")?;
        for (i, obj) in self.objective_history.iter().enumerate() {
            if i == 0 {
                writeln!(w, "0,{obj},")?;
            } else {
                writeln!(w, "{i},{obj},{}", self.step_history[i - 1])?;
            }
        }
        Ok(())
    }
}

/// Runs projected adaptive gradient ascent.
///
/// `objective` maps the current vectors to the scalar being maximized;
/// `gradients` returns one `d/d conj(x)` gradient per vector, in the same
/// order as `init`. All vectors share one adaptive step size. Non-finite
/// objective or gradient values abort with the iteration index.
pub fn ascend<F, G>(
    objective: F,
    gradients: G,
    init: &[Beamformer],
    cfg: &OptimizerConfig,
) -> Result<OptimizerTrace>
where
    F: Fn(&[CVector]) -> f64,
    G: Fn(&[CVector]) -> Vec<CVector>,
{
    cfg.validate()?;
    if init.is_empty() {
        return Err(Error::InvalidConfig("ascend needs at least one vector".into()));
    }

    let mut x: Vec<CVector> = init.iter().map(|b| b.coeffs.clone()).collect();
    let mut current = objective(&x);
    if !current.is_finite() {
        return Err(Error::NonFinite { what: "objective", iteration: 0 });
    }

    let mut history = vec![current];
    let mut steps: Vec<f64> = Vec::new();
    let mut delta = cfg.step0;
    let mut converged = false;

    'outer: while steps.len() < cfg.max_iters {
        let iteration = steps.len();
        let grad = gradients(&x);
        if grad.len() != x.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} gradients for {} vectors",
                grad.len(),
                x.len()
            )));
        }
        for g in &grad {
            if g.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::NonFinite { what: "gradient", iteration });
            }
        }

        // Retry from the same point with halved steps until the candidate
        // does not decrease the objective (the gradient stays valid).
        loop {
            let candidate: Result<Vec<CVector>> = x
                .iter()
                .zip(&grad)
                .map(|(v, g)| project_step(&(v + g.scale(delta)), cfg.constraint))
                .collect();
            let candidate = candidate?;
            let value = objective(&candidate);
            if !value.is_finite() {
                return Err(Error::NonFinite { what: "objective", iteration });
            }

            let decreased = value < current;
            if decreased && !cfg.accept_descent {
                delta *= 0.5;
                if delta < STEP_FLOOR {
                    break 'outer;
                }
                continue;
            }

            x = candidate;
            let previous = current;
            current = value;
            history.push(current);
            steps.push(delta);
            if decreased {
                // accept_descent mode: keep the iterate, still shrink the step
                delta *= 0.5;
            }
            if (current - previous).abs() <= cfg.epsilon {
                converged = true;
                break 'outer;
            }
            if delta < STEP_FLOOR {
                break 'outer;
            }
            break;
        }
    }

    let final_vectors = x
        .into_iter()
        .map(|coeffs| Beamformer { coeffs, constraint: cfg.constraint })
        .collect();
    Ok(OptimizerTrace {
        iterations: steps.len(),
        objective_history: history,
        step_history: steps,
        final_vectors,
        converged,
    })
}

/// Central-difference Wirtinger gradients: perturbs the real and imaginary
/// part of every coefficient and assembles `0.5 * (d/dRe + j d/dIm)`.
///
/// This is the numerical oracle the analytic gradients are validated
/// against; it is deliberately independent of any analytic expression.
pub fn finite_difference_gradient<F>(objective: F, point: &[CVector], h: f64) -> Vec<CVector>
where
    F: Fn(&[CVector]) -> f64,
{
    let mut grads = Vec::with_capacity(point.len());
    for vi in 0..point.len() {
        let n = point[vi].len();
        let mut g = CVector::zeros(n);
        for j in 0..n {
            let probe = |delta: C64| {
                let mut p: Vec<CVector> = point.to_vec();
                p[vi][j] += delta;
                objective(&p)
            };
            let d_re = (probe(C64::new(h, 0.0)) - probe(C64::new(-h, 0.0))) / (2.0 * h);
            let d_im = (probe(C64::new(0.0, h)) - probe(C64::new(0.0, -h))) / (2.0 * h);
            g[j] = C64::new(d_re, d_im) * 0.5;
        }
        grads.push(g);
    }
    grads
}
