//! Explicit initial-value-problem integration on a fixed output grid.
//!
//! The integrator is the Dormand-Prince 5(4) embedded Runge-Kutta pair with
//! adaptive step control and a 4th-order dense-output interpolant, so output
//! samples never constrain the step sequence. Step acceptance uses the mixed
//! absolute/relative error norm over all state components.

use thiserror::Error;

/// Errors raised during integration.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("step size underflow at t = {t} (h = {h}); dynamics too stiff or singular")]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("derivative returned a non-finite component at t = {t}")]
    NonFiniteDerivative { t: f64 },
    #[error("exceeded {max_steps} accepted steps at t = {t}")]
    MaxStepsExceeded { t: f64, max_steps: usize },
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
}

/// Tolerances and step limits for the adaptive controller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    /// Relative tolerance (dimensionless).
    pub rtol: f64,
    /// Absolute tolerance (state units).
    pub atol: f64,
    /// Largest step the controller may take (s).
    pub max_step: f64,
    /// Step used for the first attempt (s).
    pub initial_step: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-6,
            atol: 1e-8,
            max_step: 1e-2,
            initial_step: 1e-4,
        }
    }
}

impl IntegratorConfig {
    fn validate(&self) -> Result<(), OdeError> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !(positive(self.rtol) && positive(self.atol)) {
            return Err(OdeError::InvalidProblem(format!(
                "tolerances must be positive (rtol = {}, atol = {})",
                self.rtol, self.atol
            )));
        }
        if !(positive(self.max_step) && positive(self.initial_step)) {
            return Err(OdeError::InvalidProblem(format!(
                "steps must be positive (max_step = {}, initial_step = {})",
                self.max_step, self.initial_step
            )));
        }
        Ok(())
    }
}

/// An initial-value problem `dy/dt = f(t, y)` sampled on a fixed grid.
///
/// The grid must be nonempty, strictly increasing and contained in
/// `[t0, tf]`; these invariants are checked on construction.
pub struct IvpProblem<const N: usize, F>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    derivative: F,
    y0: [f64; N],
    t0: f64,
    tf: f64,
    grid: Vec<f64>,
}

impl<const N: usize, F> IvpProblem<N, F>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    pub fn new(
        derivative: F,
        y0: [f64; N],
        span: (f64, f64),
        grid: Vec<f64>,
    ) -> Result<Self, OdeError> {
        let (t0, tf) = span;
        if !(t0.is_finite() && tf.is_finite() && tf > t0) {
            return Err(OdeError::InvalidProblem(format!(
                "span must be finite with tf > t0 (got [{t0}, {tf}])"
            )));
        }
        if grid.is_empty() {
            return Err(OdeError::InvalidProblem("output grid is empty".into()));
        }
        if !grid.windows(2).all(|w| w[1] > w[0]) {
            return Err(OdeError::InvalidProblem(
                "output grid must be strictly increasing".into(),
            ));
        }
        let first = grid[0];
        let last = *grid.last().unwrap();
        if first < t0 || last > tf {
            return Err(OdeError::InvalidProblem(format!(
                "output grid [{first}, {last}] not contained in span [{t0}, {tf}]"
            )));
        }
        Ok(Self {
            derivative,
            y0,
            t0,
            tf,
            grid,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];

const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

// 5th-order solution weights (row 7 of A equals B: FSAL).
const B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];

// Difference between the 5th- and embedded 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

// Dense-output coefficients for the 4th-order interpolant.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

const SAFETY: f64 = 0.9;
const MIN_SCALE: f64 = 0.2;
const MAX_SCALE: f64 = 10.0;
const MAX_STEPS: usize = 1_000_000;

#[inline]
fn axpy<const N: usize>(y: &mut [f64; N], a: f64, x: &[f64; N]) {
    for i in 0..N {
        y[i] += a * x[i];
    }
}

/// Coefficients of the quartic interpolant over one accepted step.
struct DenseSegment<const N: usize> {
    t_old: f64,
    h: f64,
    cont: [[f64; N]; 5],
}

impl<const N: usize> DenseSegment<N> {
    fn eval(&self, t: f64) -> [f64; N] {
        let s = (t - self.t_old) / self.h;
        let s1 = 1.0 - s;
        let mut out = [0.0; N];
        for i in 0..N {
            let c = [
                self.cont[0][i],
                self.cont[1][i],
                self.cont[2][i],
                self.cont[3][i],
                self.cont[4][i],
            ];
            out[i] = c[0] + s * (c[1] + s1 * (c[2] + s * (c[3] + s1 * c[4])));
        }
        out
    }
}

/// Integrates the problem, returning the state at every output grid point.
///
/// Local error per step is kept within `atol + rtol * |y|` componentwise;
/// output samples come from the dense interpolant of the accepted steps.
pub fn integrate<const N: usize, F>(
    problem: &IvpProblem<N, F>,
    config: &IntegratorConfig,
) -> Result<Vec<[f64; N]>, OdeError>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    config.validate()?;

    let f = &problem.derivative;
    let mut t = problem.t0;
    let mut y = problem.y0;
    let mut h = config.initial_step.min(config.max_step).min(problem.tf - t);

    let mut output = Vec::with_capacity(problem.grid.len());
    let mut next_out = 0;

    let eval = |tt: f64, yy: &[f64; N]| -> Result<[f64; N], OdeError> {
        let dy = f(tt, yy);
        if dy.iter().any(|v| !v.is_finite()) {
            return Err(OdeError::NonFiniteDerivative { t: tt });
        }
        Ok(dy)
    };

    // Grid points that coincide with t0 need no step.
    while next_out < problem.grid.len() && problem.grid[next_out] <= t {
        output.push(y);
        next_out += 1;
    }

    let mut k0 = eval(t, &y)?;
    let mut steps = 0usize;

    while next_out < problem.grid.len() {
        if steps >= MAX_STEPS {
            return Err(OdeError::MaxStepsExceeded {
                t,
                max_steps: MAX_STEPS,
            });
        }
        h = h.min(problem.tf - t).min(config.max_step);
        if h < 1e-14 * problem.tf.abs().max(1.0) {
            return Err(OdeError::StepSizeUnderflow { t, h });
        }

        // Stages 2..7; stage 1 is k0 (FSAL from the previous step).
        let mut k = [[0.0; N]; 7];
        k[0] = k0;
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s - 1][j];
                if a != 0.0 {
                    axpy(&mut ys, h * a, kj);
                }
            }
            k[s] = eval(t + C[s] * h, &ys)?;
        }

        let mut y_new = y;
        let mut err_vec = [0.0; N];
        for (s, ks) in k.iter().enumerate() {
            if B[s] != 0.0 {
                axpy(&mut y_new, h * B[s], ks);
            }
            if E[s] != 0.0 {
                axpy(&mut err_vec, h * E[s], ks);
            }
        }

        // Mixed abs/rel RMS error norm.
        let mut err = 0.0;
        for i in 0..N {
            let scale = config.atol + config.rtol * y[i].abs().max(y_new[i].abs());
            let r = err_vec[i] / scale;
            err += r * r;
        }
        err = (err / N as f64).sqrt();

        if err <= 1.0 {
            steps += 1;

            // contd5 interpolant over [t, t+h].
            let mut cont = [[0.0; N]; 5];
            let mut dsum = [0.0; N];
            for (s, ks) in k.iter().enumerate() {
                if D[s] != 0.0 {
                    axpy(&mut dsum, D[s], ks);
                }
            }
            for i in 0..N {
                let ydiff = y_new[i] - y[i];
                let bspl = h * k[0][i] - ydiff;
                cont[0][i] = y[i];
                cont[1][i] = ydiff;
                cont[2][i] = bspl;
                cont[3][i] = ydiff - h * k[6][i] - bspl;
                cont[4][i] = h * dsum[i];
            }
            let segment = DenseSegment { t_old: t, h, cont };

            let t_new = t + h;
            while next_out < problem.grid.len() && problem.grid[next_out] <= t_new {
                let tg = problem.grid[next_out];
                output.push(if tg == t_new {
                    y_new
                } else {
                    segment.eval(tg)
                });
                next_out += 1;
            }

            t = t_new;
            y = y_new;
            k0 = k[6]; // FSAL
            let scale = if err == 0.0 {
                MAX_SCALE
            } else {
                (SAFETY * err.powf(-0.2)).clamp(MIN_SCALE, MAX_SCALE)
            };
            h *= scale;
        } else {
            h *= (SAFETY * err.powf(-0.2)).clamp(MIN_SCALE, 1.0);
        }
    }

    Ok(output)
}
