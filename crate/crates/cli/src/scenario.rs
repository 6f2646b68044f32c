//! Scenario assembly and experiment orchestration: build the mesh, fields
//! and operators from a validated config, then run the fine reference,
//! GMsFEM or MsFEM mode.

use crate::config::{
    continuum_index, InitialConfig, PermeabilitySpec, ScenarioConfig, SideBc,
};
use crate::CliError;
use fracflow_core::assembly::{
    assemble_exchange, assemble_load, assemble_mass, DofMap, LoadSpec, PointSource,
};
use fracflow_core::geometry::{
    build_coarse_grid, build_fine_mesh, partition_of_unity, CoarseGrid, CoarseNeighborhood,
    FineMesh, Fracture, FractureNetwork, PartitionOfUnity, Side,
};
use fracflow_core::linalg::CsrMatrix;
use fracflow_core::multiscale::{
    build_neighborhood_bases, build_space, msfem_space, MultiscaleSpace, NeighborhoodBasis,
};
use fracflow_core::physics::{
    load_permeability_csv, sigma_from_mesh, synth_permeability, Continuum, ContinuumParams,
    ExchangeTable, FluidProperties,
};
use fracflow_core::timestepper::{Driver, FineProblem, RunResult, Scheme, TimeControls};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Fine,
    Gmsfem,
    Msfem,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Fine => "fine",
            Mode::Gmsfem => "gmsfem",
            Mode::Msfem => "msfem",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "fine" => Ok(Mode::Fine),
            "gmsfem" => Ok(Mode::Gmsfem),
            "msfem" => Ok(Mode::Msfem),
            other => Err(format!("unknown mode {other:?} (fine | gmsfem | msfem)")),
        }
    }
}

/// Everything a run needs, assembled once per scenario.
pub struct SimSetup {
    pub config: ScenarioConfig,
    pub mesh: FineMesh,
    pub grid: CoarseGrid,
    pub network: FractureNetwork,
    pub fluid: FluidProperties,
    pub params: Vec<ContinuumParams>,
    pub sigma: f64,
    pub exchange: ExchangeTable,
    pub pou: PartitionOfUnity,
    pub mass: CsrMatrix,
    pub exchange_op: CsrMatrix,
    pub load: Vec<f64>,
    pub dofmap: DofMap,
    pub initial: Vec<f64>,
}

impl SimSetup {
    pub fn build(config: ScenarioConfig) -> Result<Self, CliError> {
        config.validate()?;
        let network = FractureNetwork {
            fractures: config
                .fractures
                .iter()
                .map(|f| Fracture {
                    points: f.points.clone(),
                    aperture: f.aperture,
                    permeability: f.permeability,
                    porosity: f.porosity,
                })
                .collect(),
        };
        let mesh = build_fine_mesh(
            config.domain.extent,
            config.domain.fine[0],
            config.domain.fine[1],
            &network,
        )?;
        let grid = build_coarse_grid(&mesh, config.domain.coarse[0], config.domain.coarse[1])?;
        let fluid = FluidProperties {
            compressibility: config.fluid.compressibility,
            viscosity: config.fluid.viscosity,
            fvf_ref: config.fluid.fvf_ref,
            ref_pressure: config.fluid.ref_pressure,
        };
        fluid.validate()?;

        let field = |spec: &PermeabilitySpec| -> Result<Vec<f64>, CliError> {
            Ok(match spec {
                PermeabilitySpec::Constant { value } => vec![*value; mesh.triangles.len()],
                PermeabilitySpec::Synthetic { seed, contrast, base } => {
                    synth_permeability(*seed, &mesh, *base, *contrast)?
                }
                PermeabilitySpec::Csv { path } => {
                    load_permeability_csv(path, mesh.triangles.len())?
                }
            })
        };
        let params = vec![
            ContinuumParams::new(
                Continuum::Matrix,
                config.continua.matrix.porosity,
                field(&config.continua.matrix.permeability)?,
                &fluid,
            )?,
            ContinuumParams::new(
                Continuum::NaturalFracture,
                config.continua.fracture.porosity,
                field(&config.continua.fracture.permeability)?,
                &fluid,
            )?,
            ContinuumParams::new(
                Continuum::Vug,
                config.continua.vug.porosity,
                field(&config.continua.vug.permeability)?,
                &fluid,
            )?,
        ];
        let sigma = config.exchange.sigma.unwrap_or_else(|| sigma_from_mesh(&mesh));
        let exchange = ExchangeTable::build(&params, sigma, &fluid)?;
        let pou = partition_of_unity(&mesh, &grid);

        let n = mesh.n_nodes();
        let mut dofmap = DofMap::new(n, 3);
        let mut neumann = Vec::new();
        for (side, bc) in [
            (Side::Bottom, config.boundary.bottom),
            (Side::Right, config.boundary.right),
            (Side::Top, config.boundary.top),
            (Side::Left, config.boundary.left),
        ] {
            match bc {
                SideBc::Dirichlet(v) => dofmap.set_dirichlet_side(&mesh, side, v),
                SideBc::Neumann(flux) => {
                    if flux != 0.0 {
                        neumann.push((side, flux));
                    }
                }
            }
        }
        let wells: Vec<PointSource> = config
            .wells
            .iter()
            .map(|w| PointSource {
                x: w.x,
                y: w.y,
                rate: w.rate,
                continuum: continuum_index(&w.continuum).expect("validated"),
            })
            .collect();
        let load = assemble_load(
            &mesh,
            &params,
            &LoadSpec {
                densities: None,
                wells: &wells,
                neumann: &neumann,
            },
        )?;
        let mass = assemble_mass(&mesh, &params, &network, &fluid);
        let exchange_op = assemble_exchange(&mesh, &exchange);

        let initial = match &config.initial {
            InitialConfig::Constant { value } => {
                vec![value.unwrap_or(fluid.ref_pressure); 3 * n]
            }
            InitialConfig::Bump {
                center,
                radius,
                amplitude,
                base,
            } => {
                let base = base.unwrap_or(fluid.ref_pressure);
                let mut u = vec![0.0; 3 * n];
                for (i, p) in mesh.nodes.iter().enumerate() {
                    let dx = p[0] - center[0];
                    let dy = p[1] - center[1];
                    let v = base
                        + amplitude * (-(dx * dx + dy * dy) / (2.0 * radius * radius)).exp();
                    u[i] = v;
                    u[n + i] = v;
                    u[2 * n + i] = v;
                }
                u
            }
        };

        Ok(SimSetup {
            config,
            mesh,
            grid,
            network,
            fluid,
            params,
            sigma,
            exchange,
            pou,
            mass,
            exchange_op,
            load,
            dofmap,
            initial,
        })
    }

    pub fn problem(&self) -> FineProblem<'_> {
        FineProblem {
            mesh: &self.mesh,
            params: &self.params,
            network: &self.network,
            fluid: &self.fluid,
            mass: self.mass.clone(),
            exchange_op: self.exchange_op.clone(),
            load: self.load.clone(),
            dofmap: self.dofmap.clone(),
            solver_tol: self.config.solver.tolerance,
        }
    }

    pub fn controls(&self) -> TimeControls {
        TimeControls {
            dt: self.config.time.dt,
            t_end: self.config.time.t_end,
            scheme: if self.config.time.scheme == "fixed_point" {
                Scheme::FixedPoint
            } else {
                Scheme::Linearized
            },
            fp_tol: self.config.time.tolerance,
            fp_max_iters: self.config.time.max_iterations,
        }
    }

    /// Snapshot + spectral bases for every neighborhood, keeping `l_keep`
    /// modes (capped by the local snapshot dimension).
    pub fn spectral_bases(
        &self,
        l_keep: usize,
    ) -> Result<(Vec<CoarseNeighborhood>, Vec<NeighborhoodBasis>), CliError> {
        Ok(build_neighborhood_bases(
            &self.mesh,
            &self.grid,
            &self.params,
            &self.network,
            &self.exchange,
            &self.fluid,
            l_keep,
        )?)
    }

    /// Assemble the spectral space for a uniform basis count (or the
    /// configured eigenvalue threshold when one is set).
    pub fn gmsfem_space(
        &self,
        nbs: &[CoarseNeighborhood],
        bases: &[NeighborhoodBasis],
        l: usize,
    ) -> Result<MultiscaleSpace, CliError> {
        let l_per_node: Vec<usize> = match self.config.basis.lambda_threshold {
            Some(thr) => bases
                .iter()
                .map(|b| {
                    let by_thr = b.eigenvalues.iter().take_while(|&&v| v <= thr).count();
                    by_thr.clamp(1, b.fields.ncols())
                })
                .collect(),
            None => bases
                .iter()
                .map(|b| l.min(b.fields.ncols()))
                .collect(),
        };
        Ok(build_space(
            &self.mesh,
            &self.grid,
            nbs,
            bases,
            &self.pou,
            &l_per_node,
        )?)
    }

    pub fn msfem(&self) -> Result<MultiscaleSpace, CliError> {
        Ok(msfem_space(
            &self.mesh,
            &self.grid,
            &self.params,
            &self.network,
            &self.exchange,
            &self.fluid,
            &self.pou,
        )?)
    }
}

/// Outcome of one mode run: the time series plus bookkeeping for reports.
pub struct ModeRun {
    pub mode: Mode,
    /// basis count per coarse node (0 for the fine reference, 3 for MsFEM)
    pub basis: usize,
    pub dof: usize,
    pub lambda: Option<f64>,
    pub offline_seconds: f64,
    pub online_seconds: f64,
    pub result: RunResult,
}

pub fn run_mode(setup: &SimSetup, mode: Mode, basis: Option<usize>) -> Result<ModeRun, CliError> {
    let prob = setup.problem();
    let controls = setup.controls();
    match mode {
        Mode::Fine => {
            let t0 = std::time::Instant::now();
            let driver = Driver::fine(&prob);
            let result = driver.run(&setup.initial, &controls)?;
            Ok(ModeRun {
                mode,
                basis: 0,
                dof: prob.n_dofs(),
                lambda: None,
                offline_seconds: 0.0,
                online_seconds: t0.elapsed().as_secs_f64(),
                result,
            })
        }
        Mode::Gmsfem => {
            let l = basis.unwrap_or(setup.config.basis.count);
            let t0 = std::time::Instant::now();
            let (nbs, bases) = setup.spectral_bases(l)?;
            let space = setup.gmsfem_space(&nbs, &bases, l)?;
            let offline = t0.elapsed().as_secs_f64();
            let t1 = std::time::Instant::now();
            let driver = Driver::coarse(&prob, &space)?;
            let result = driver.run(&setup.initial, &controls)?;
            Ok(ModeRun {
                mode,
                basis: l,
                dof: space.dim(),
                lambda: space.lambda_cut,
                offline_seconds: offline,
                online_seconds: t1.elapsed().as_secs_f64(),
                result,
            })
        }
        Mode::Msfem => {
            let t0 = std::time::Instant::now();
            let space = setup.msfem()?;
            let offline = t0.elapsed().as_secs_f64();
            let t1 = std::time::Instant::now();
            let driver = Driver::coarse(&prob, &space)?;
            let result = driver.run(&setup.initial, &controls)?;
            Ok(ModeRun {
                mode,
                basis: 3,
                dof: space.dim(),
                lambda: None,
                offline_seconds: offline,
                online_seconds: t1.elapsed().as_secs_f64(),
                result,
            })
        }
    }
}

/// Map a report day to its step index, requiring it to land on a time level.
pub fn day_to_step(config: &ScenarioConfig, day: f64) -> Result<usize, CliError> {
    let dt = config.time.dt;
    if day > config.time.t_end + 1e-9 * config.time.t_end.max(dt) {
        return Err(CliError::Config(format!(
            "report day {day} lies beyond t_end = {}",
            config.time.t_end
        )));
    }
    let idx = (day / dt).round();
    if (idx * dt - day).abs() > 1e-9 * day.max(dt) {
        return Err(CliError::Config(format!(
            "report day {day} is not a multiple of dt = {dt}"
        )));
    }
    Ok(idx as usize)
}
