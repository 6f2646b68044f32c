//! Backward-Euler time integration of the coupled system, on the fine space
//! or on a multiscale coarse space.
//!
//! Each step solves [M/dt + K(w) + Q] u^n = M u^{n-1}/dt + F with the
//! mobility lag w either frozen at u^{n-1} (direct linearization) or updated
//! by fixed-point iteration until the b-norm of the update is small. A
//! fixed-point run capped at one iteration is the linearized step, bit for
//! bit. Dirichlet data is imposed by symmetric elimination plus a nodal
//! lifting; coarse solves project the eliminated fine operator with the
//! free-dof rows of the prolongation.

use crate::assembly::{
    apply_dirichlet, assemble_stiffness, b_norm, AlphaField, AssemblyError, DofMap,
};
use crate::geometry::{FineMesh, FractureNetwork};
use crate::linalg::{solve_spd_guess, Cholesky, CsrMatrix, LinalgError};
use crate::linalg::dense::PivotedCholesky;
use crate::multiscale::{MultiscaleError, MultiscaleSpace};
use crate::physics::{ContinuumParams, FluidProperties};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TimestepError {
    #[error("invalid time controls: {0}")]
    Controls(String),
    #[error("coarse space is rank deficient: {0}")]
    RankDeficient(LinalgError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Multiscale(#[from] MultiscaleError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Linearized,
    FixedPoint,
}

#[derive(Debug, Clone, Copy)]
pub struct TimeControls {
    /// step size (days)
    pub dt: f64,
    /// final time (days)
    pub t_end: f64,
    pub scheme: Scheme,
    /// relative b-norm update tolerance for the fixed-point iteration
    pub fp_tol: f64,
    pub fp_max_iters: usize,
}

impl TimeControls {
    pub fn validate(&self) -> Result<usize, TimestepError> {
        if !(self.dt > 0.0) {
            return Err(TimestepError::Controls(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= self.dt) {
            return Err(TimestepError::Controls(format!(
                "t_end ({}) must be at least dt ({})",
                self.t_end, self.dt
            )));
        }
        if !(self.fp_tol > 0.0) {
            return Err(TimestepError::Controls("fixed-point tolerance must be positive".into()));
        }
        if self.fp_max_iters == 0 {
            return Err(TimestepError::Controls("fixed-point iteration cap must be at least 1".into()));
        }
        let n = (self.t_end / self.dt).round();
        if n < 1.0 || ((n * self.dt - self.t_end).abs() > 1e-9 * self.t_end.max(self.dt)) {
            return Err(TimestepError::Controls(format!(
                "t_end ({}) is not a multiple of dt ({})",
                self.t_end, self.dt
            )));
        }
        Ok(n as usize)
    }
}

/// Pressures at one time instant: the fine-grid coupled field (always
/// populated; for coarse runs it is the downscaled representation) and the
/// coarse coefficients when the state lives in a multiscale space.
#[derive(Debug, Clone)]
pub struct SystemState {
    /// time (days)
    pub time: f64,
    /// continuum-major nodal pressures on the fine mesh
    pub values: Vec<f64>,
    pub coarse_coeffs: Option<Vec<f64>>,
}

impl SystemState {
    pub fn continuum<'a>(&'a self, c: usize, n_nodes: usize) -> &'a [f64] {
        &self.values[c * n_nodes..(c + 1) * n_nodes]
    }
}

/// The assembled time-independent parts of the fine problem plus everything
/// needed to reassemble the lagged stiffness.
pub struct FineProblem<'a> {
    pub mesh: &'a FineMesh,
    pub params: &'a [ContinuumParams],
    pub network: &'a FractureNetwork,
    pub fluid: &'a FluidProperties,
    pub mass: CsrMatrix,
    pub exchange_op: CsrMatrix,
    pub load: Vec<f64>,
    pub dofmap: DofMap,
    pub solver_tol: f64,
}

impl<'a> FineProblem<'a> {
    pub fn stiffness(&self, w: &[f64]) -> CsrMatrix {
        assemble_stiffness(
            self.mesh,
            self.params,
            self.network,
            AlphaField::Lagged {
                pressures: w,
                fluid: self.fluid,
            },
        )
    }

    pub fn n_dofs(&self) -> usize {
        self.dofmap.n_dofs()
    }
}

enum DriverMode {
    Fine,
    Coarse {
        space_red: MultiscaleSpace,
        gram_factor: PivotedCholesky,
    },
}

/// Conditioning rule shared with the snapshot filter: eigendirections below
/// this fraction of the largest are treated as dependent and dropped.
const COARSE_DROP_TOL: f64 = 1e-12;

/// Advances the coupled system in time on either the fine space or a
/// multiscale coarse space.
pub struct Driver<'a> {
    pub prob: &'a FineProblem<'a>,
    mode: DriverMode,
    free: Vec<usize>,
    lift: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct StepResult {
    pub state: SystemState,
    pub iterations: usize,
    /// false only when the fixed-point cap was hit before the tolerance
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct StepDiagnostics {
    pub time: f64,
    pub iterations: usize,
    pub converged: bool,
    /// b-weighted total mass 1' M u
    pub total_mass: f64,
    pub wall_seconds: f64,
    /// per-continuum (min, mean, max) pressures
    pub pressure_range: Vec<(f64, f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub states: Vec<SystemState>,
    pub diagnostics: Vec<StepDiagnostics>,
}

impl<'a> Driver<'a> {
    pub fn fine(prob: &'a FineProblem<'a>) -> Self {
        Driver {
            prob,
            mode: DriverMode::Fine,
            free: prob.dofmap.free_dofs(),
            lift: prob.dofmap.lift(),
        }
    }

    /// Coarse driver: restricts the prolongation to free dofs and factors the
    /// b-projection Gram matrix once.
    pub fn coarse(prob: &'a FineProblem<'a>, space: &MultiscaleSpace) -> Result<Self, TimestepError> {
        let free = prob.dofmap.free_dofs();
        let space_red = space.restricted(&free);
        let mass_ff = prob.mass.select(&free, &free);
        let mut gram = space_red.project_operator(&mass_ff);
        if gram.frobenius() == 0.0 {
            // incompressible limit: the b form is null and any projection of
            // the initial data works; pick coefficients zero
            gram = crate::linalg::DenseMatrix::identity(space_red.dim());
        }
        let gram_factor = PivotedCholesky::factor(&gram, COARSE_DROP_TOL);
        Ok(Driver {
            prob,
            mode: DriverMode::Coarse { space_red, gram_factor },
            free,
            lift: prob.dofmap.lift(),
        })
    }

    pub fn is_coarse(&self) -> bool {
        matches!(self.mode, DriverMode::Coarse { .. })
    }

    /// Initial state at t = 0. Fine mode pins the Dirichlet dofs to their
    /// prescribed values; coarse mode b-projects u0 onto the space.
    pub fn initial_state(&self, u0: &[f64]) -> Result<SystemState, TimestepError> {
        match &self.mode {
            DriverMode::Fine => {
                let mut v = u0.to_vec();
                for (d, g) in self.prob.dofmap.dirichlet() {
                    v[d] = g;
                }
                Ok(SystemState {
                    time: 0.0,
                    values: v,
                    coarse_coeffs: None,
                })
            }
            DriverMode::Coarse { space_red, gram_factor } => {
                // project the same data the fine mode starts from: boundary
                // entries pinned to their prescribed values
                let mut pinned = u0.to_vec();
                for (d, g) in self.prob.dofmap.dirichlet() {
                    pinned[d] = g;
                }
                let coeffs = project_initial_with(
                    &pinned,
                    space_red,
                    gram_factor,
                    &self.prob.mass,
                    &self.free,
                    &self.lift,
                );
                let values = self.embed_coarse(space_red, &coeffs);
                Ok(SystemState {
                    time: 0.0,
                    values,
                    coarse_coeffs: Some(coeffs),
                })
            }
        }
    }

    fn embed_coarse(&self, space_red: &MultiscaleSpace, coeffs: &[f64]) -> Vec<f64> {
        let free_vals = space_red.prolongation().matvec(coeffs);
        let mut full = self.lift.clone();
        for (k, &d) in self.free.iter().enumerate() {
            full[d] = free_vals[k];
        }
        full
    }

    /// One backward-Euler step with the mobility lagged at the previous time
    /// level.
    pub fn step_linearized(
        &self,
        state: &SystemState,
        controls: &TimeControls,
    ) -> Result<StepResult, TimestepError> {
        self.step_inner(state, controls, 1)
    }

    /// One backward-Euler step iterating the lagged mobility to a fixed
    /// point. Hitting the iteration cap is reported, not fatal.
    pub fn step_fixed_point(
        &self,
        state: &SystemState,
        controls: &TimeControls,
    ) -> Result<StepResult, TimestepError> {
        self.step_inner(state, controls, controls.fp_max_iters)
    }

    pub fn step(&self, state: &SystemState, controls: &TimeControls) -> Result<StepResult, TimestepError> {
        match controls.scheme {
            Scheme::Linearized => self.step_linearized(state, controls),
            Scheme::FixedPoint => self.step_fixed_point(state, controls),
        }
    }

    fn step_inner(
        &self,
        state: &SystemState,
        controls: &TimeControls,
        max_iters: usize,
    ) -> Result<StepResult, TimestepError> {
        let prob = self.prob;
        let inv_dt = 1.0 / controls.dt;
        let mut rhs = prob.mass.matvec(&state.values);
        for (r, f) in rhs.iter_mut().zip(&prob.load) {
            *r = *r * inv_dt + f;
        }

        let mut w = state.values.clone();
        let mut iterations = 0;
        let mut converged = true;
        let mut new_state = None;
        for m in 1..=max_iters {
            let k = prob.stiffness(&w);
            let a = prob
                .mass
                .add_scaled(&k, inv_dt, 1.0)
                .add_scaled(&prob.exchange_op, 1.0, 1.0);
            let red = apply_dirichlet(&a, &rhs, &prob.dofmap)?;
            let (values, coeffs) = match &self.mode {
                DriverMode::Fine => {
                    let guess: Vec<f64> = self.free.iter().map(|&d| w[d]).collect();
                    let (x, _) =
                        solve_spd_guess(&red.matrix, &red.rhs, prob.solver_tol, Some(&guess))?;
                    (red.expand(&x), None)
                }
                DriverMode::Coarse { space_red, .. } => {
                    let a_c = space_red.project_operator(&red.matrix);
                    let rhs_c = space_red.project_vec(&red.rhs);
                    let factor = PivotedCholesky::factor(&a_c, COARSE_DROP_TOL);
                    let c = factor.solve_vec(&rhs_c);
                    let full = self.embed_coarse(space_red, &c);
                    (full, Some(c))
                }
            };
            iterations = m;
            let update_ok = if max_iters > 1 {
                let diff: Vec<f64> = values.iter().zip(&w).map(|(a, b)| a - b).collect();
                let rel = b_norm(&prob.mass, &diff) / b_norm(&prob.mass, &values).max(1e-300);
                rel <= controls.fp_tol
            } else {
                true
            };
            w = values.clone();
            new_state = Some(SystemState {
                time: state.time + controls.dt,
                values,
                coarse_coeffs: coeffs,
            });
            if update_ok {
                converged = true;
                break;
            }
            converged = false;
        }
        Ok(StepResult {
            state: new_state.expect("at least one iteration"),
            iterations,
            converged,
        })
    }

    /// March from u0 to t_end, recording states and diagnostics at every
    /// time level (the initial one included).
    pub fn run(&self, u0: &[f64], controls: &TimeControls) -> Result<RunResult, TimestepError> {
        let n_steps = controls.validate()?;
        let mut states = Vec::with_capacity(n_steps + 1);
        let mut diagnostics = Vec::with_capacity(n_steps + 1);
        let mut current = self.initial_state(u0)?;
        diagnostics.push(self.diagnose(&current, 0, true, 0.0));
        states.push(current.clone());
        for _ in 0..n_steps {
            let t0 = std::time::Instant::now();
            let out = self.step(&current, controls)?;
            let wall = t0.elapsed().as_secs_f64();
            diagnostics.push(self.diagnose(&out.state, out.iterations, out.converged, wall));
            current = out.state.clone();
            states.push(out.state);
        }
        Ok(RunResult { states, diagnostics })
    }

    fn diagnose(
        &self,
        state: &SystemState,
        iterations: usize,
        converged: bool,
        wall: f64,
    ) -> StepDiagnostics {
        StepDiagnostics {
            time: state.time,
            iterations,
            converged,
            total_mass: total_b_mass(&self.prob.mass, &state.values),
            wall_seconds: wall,
            pressure_range: pressure_ranges(
                &state.values,
                self.prob.dofmap.n_continua,
                self.prob.dofmap.n_nodes,
            ),
        }
    }
}

/// b-projection of a fine field onto a multiscale space:
/// (P' M P) c = P' M u0 over the free dofs.
pub fn project_initial(
    u0: &[f64],
    space: &MultiscaleSpace,
    mass: &CsrMatrix,
    dofmap: &DofMap,
) -> Result<Vec<f64>, TimestepError> {
    let free = dofmap.free_dofs();
    let space_red = space.restricted(&free);
    let mass_ff = mass.select(&free, &free);
    let mut gram = space_red.project_operator(&mass_ff);
    if gram.frobenius() == 0.0 {
        gram = crate::linalg::DenseMatrix::identity(space_red.dim());
    }
    // strict factorization: a rank-deficient prolongation is an error here
    Cholesky::factor(&gram).map_err(TimestepError::RankDeficient)?;
    let factor = PivotedCholesky::factor(&gram, COARSE_DROP_TOL);
    Ok(project_initial_with(
        u0,
        &space_red,
        &factor,
        mass,
        &free,
        &dofmap.lift(),
    ))
}

fn project_initial_with(
    u0: &[f64],
    space_red: &MultiscaleSpace,
    gram_factor: &PivotedCholesky,
    mass: &CsrMatrix,
    free: &[usize],
    lift: &[f64],
) -> Vec<f64> {
    let w: Vec<f64> = u0.iter().zip(lift).map(|(a, b)| a - b).collect();
    let y = mass.matvec(&w);
    let y_f: Vec<f64> = free.iter().map(|&d| y[d]).collect();
    let rhs = space_red.project_vec(&y_f);
    gram_factor.solve_vec(&rhs)
}

/// 1' M u with compensated summation.
pub fn total_b_mass(mass: &CsrMatrix, u: &[f64]) -> f64 {
    let mu = mass.matvec(u);
    let mut sum = 0.0;
    let mut carry = 0.0;
    for v in mu {
        let y = v - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum
}

fn pressure_ranges(values: &[f64], n_continua: usize, n_nodes: usize) -> Vec<(f64, f64, f64)> {
    (0..n_continua)
        .map(|c| {
            let slice = &values[c * n_nodes..(c + 1) * n_nodes];
            let mut min = f64::INFINITY;
            let mut max = f64::NEG_INFINITY;
            let mut sum = 0.0;
            for &v in slice {
                min = min.min(v);
                max = max.max(v);
                sum += v;
            }
            (min, sum / n_nodes as f64, max)
        })
        .collect()
}
