use clap::{Parser, Subcommand};
use fracflow_cli::export::{
    export_eigenvalues_csv, export_fields_vtk, export_mesh_vtk, export_report, export_timeseries,
    load_fields_artifact, load_report, resolve_out_dir, save_fields_artifact, FieldsArtifact,
};
use fracflow_cli::scenario::day_to_step;
use fracflow_cli::{compare, load_config, run_mode, CliError, Mode, SimSetup};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "fracflow",
    about = "Triple-continuum multiscale flow simulator for fractured vuggy porous media",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the fine mesh and coarse grid, export them as VTK
    Mesh {
        /// scenario JSON file
        config: String,
        #[arg(long)]
        out: Option<String>,
    },
    /// Build the spectral basis, export per-neighborhood eigenvalues
    Basis {
        config: String,
        /// basis functions per coarse node (defaults to the config value)
        #[arg(long)]
        basis: Option<usize>,
        #[arg(long)]
        out: Option<String>,
        /// export the first N global basis columns as VTK fields
        #[arg(long, value_name = "N")]
        vtk_basis: Option<usize>,
    },
    /// Run one simulation mode and export its time series
    Run {
        config: String,
        #[arg(long, default_value = "fine", value_parser = parse_mode)]
        mode: Mode,
        #[arg(long)]
        basis: Option<usize>,
        #[arg(long)]
        out: Option<String>,
        /// days at which nodal fields are stored and exported as VTK
        #[arg(long, value_delimiter = ',')]
        vtk_days: Vec<f64>,
    },
    /// Run the fine reference plus coarse modes and report L2 errors
    Compare {
        config: String,
        #[arg(long, value_delimiter = ',', default_value = "gmsfem", value_parser = parse_mode)]
        modes: Vec<Mode>,
        /// basis counts for the spectral space, e.g. 2,4,8
        #[arg(long, value_delimiter = ',', default_value = "8")]
        basis: Vec<usize>,
        /// report days, e.g. 1,10,20
        #[arg(long, value_delimiter = ',')]
        days: Vec<f64>,
        #[arg(long)]
        out: Option<String>,
    },
    /// Re-render CSV or VTK files from saved run artifacts
    Export {
        /// directory holding report.json / fields.json
        #[arg(long)]
        from: String,
        #[arg(long, value_parser = ["csv", "vtk"])]
        format: String,
        #[arg(long)]
        out: Option<String>,
    },
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse()
}

fn main() {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Mesh { config, out } => {
            let cfg = load_config(&config)?;
            let dir = resolve_out_dir(&cfg.output.directory, out.as_deref());
            let setup = SimSetup::build(cfg)?;
            let path = export_mesh_vtk(&setup, &dir)?;
            println!(
                "mesh: {} nodes, {} triangles, {} fracture edges, h_min {:.6e}",
                setup.mesh.n_nodes(),
                setup.mesh.triangles.len(),
                setup.mesh.fracture_edges.iter().map(|c| c.len()).sum::<usize>(),
                setup.mesh.h_min
            );
            println!(
                "coarse grid: {} nodes, {} blocks",
                setup.grid.n_nodes(),
                setup.grid.n_blocks()
            );
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Basis {
            config,
            basis,
            out,
            vtk_basis,
        } => {
            let cfg = load_config(&config)?;
            let dir = resolve_out_dir(&cfg.output.directory, out.as_deref());
            let setup = SimSetup::build(cfg)?;
            let l = basis.unwrap_or(setup.config.basis.count);
            let (nbs, bases) = setup.spectral_bases(l)?;
            let space = setup.gmsfem_space(&nbs, &bases, l)?;
            let eigs: Vec<Vec<f64>> = bases.iter().map(|b| b.eigenvalues.clone()).collect();
            let path = export_eigenvalues_csv(&eigs, &dir)?;
            println!(
                "spectral space: {} columns over {} neighborhoods",
                space.dim(),
                nbs.len()
            );
            match space.lambda_cut {
                Some(l) => println!("lambda cut (min first discarded eigenvalue): {l:.6e}"),
                None => println!("lambda cut: none (no modes discarded)"),
            }
            println!("wrote {}", path.display());
            if let Some(count) = vtk_basis {
                let n = setup.mesh.n_nodes();
                let names = ["pressure_matrix", "pressure_fracture", "pressure_vug"];
                std::fs::create_dir_all(&dir)
                    .map_err(|e| CliError::Io(format!("creating {}: {e}", dir.display())))?;
                for k in 0..count.min(space.dim()) {
                    let mut e = vec![0.0; space.dim()];
                    e[k] = 1.0;
                    let col = space.downscale(&e)?;
                    let mut buf = Vec::new();
                    fracflow_core::vtk::write_fields(&mut buf, &setup.mesh, &names, &col[..3 * n])
                        .map_err(|e| CliError::Io(format!("vtk: {e}")))?;
                    let p = dir.join(format!("basis_{k:04}.vtk"));
                    std::fs::write(&p, &buf)
                        .map_err(|e| CliError::Io(format!("writing {}: {e}", p.display())))?;
                    println!("wrote {}", p.display());
                }
            }
            Ok(())
        }
        Command::Run {
            config,
            mode,
            basis,
            out,
            vtk_days,
        } => {
            let cfg = load_config(&config)?;
            let dir = resolve_out_dir(&cfg.output.directory, out.as_deref());
            let setup = SimSetup::build(cfg)?;
            let run = run_mode(&setup, mode, basis)?;
            let capped = run
                .result
                .diagnostics
                .iter()
                .filter(|d| !d.converged)
                .count();
            if capped > 0 {
                eprintln!(
                    "warning: fixed-point iteration hit its cap on {capped} step(s) without reaching the update tolerance"
                );
            }
            let ts = export_timeseries(
                &run.result,
                &dir,
                &format!("timeseries_{}.csv", mode.name()),
            )?;
            println!(
                "{} run: {} dofs, {} steps, offline {:.2}s online {:.2}s",
                mode.name(),
                run.dof,
                run.result.states.len() - 1,
                run.offline_seconds,
                run.online_seconds
            );
            println!("wrote {}", ts.display());
            let days = if vtk_days.is_empty() {
                vec![setup.config.time.t_end]
            } else {
                vtk_days
            };
            let mut values = Vec::new();
            for &d in &days {
                let step = day_to_step(&setup.config, d)?;
                values.push(run.result.states[step].values.clone());
            }
            let artifact = FieldsArtifact {
                config: setup.config.clone(),
                mode: mode.name().to_string(),
                days,
                values,
            };
            let ap = save_fields_artifact(&artifact, &dir)?;
            println!("wrote {}", ap.display());
            for p in export_fields_vtk(&artifact, &dir)? {
                println!("wrote {}", p.display());
            }
            Ok(())
        }
        Command::Compare {
            config,
            modes,
            basis,
            days,
            out,
        } => {
            let cfg = load_config(&config)?;
            if days.is_empty() {
                return Err(CliError::Config(
                    "compare needs at least one --days value".into(),
                ));
            }
            let dir = resolve_out_dir(&cfg.output.directory, out.as_deref());
            let setup = SimSetup::build(cfg)?;
            let report = compare(&setup, &modes, &basis, &days)?;
            print!("{}", report.render_table());
            for p in export_report(&report, &dir)? {
                println!("wrote {}", p.display());
            }
            Ok(())
        }
        Command::Export { from, format, out } => {
            let from = PathBuf::from(from);
            let dir = out.map(PathBuf::from).unwrap_or_else(|| from.clone());
            match format.as_str() {
                "csv" => {
                    let report = load_report(&from.join("report.json"))?;
                    for p in export_report(&report, &dir)? {
                        println!("wrote {}", p.display());
                    }
                }
                "vtk" => {
                    let artifact = load_fields_artifact(&from.join("fields.json"))?;
                    for p in export_fields_vtk(&artifact, &dir)? {
                        println!("wrote {}", p.display());
                    }
                }
                other => {
                    return Err(CliError::Config(format!("unknown format {other:?}")));
                }
            }
            Ok(())
        }
    }
}
