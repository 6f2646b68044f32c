//! L2 relative errors against the fine reference and the mode/basis
//! comparison driver.

use crate::config::CONTINUUM_NAMES;
use crate::scenario::{day_to_step, run_mode, Mode, ModeRun, SimSetup};
use crate::CliError;
use fracflow_core::geometry::FineMesh;
use fracflow_core::linalg::CsrMatrix;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Plain P1 mass matrix (unit coefficient), the L2 inner product on nodal
/// fields of one continuum.
pub fn unit_mass(mesh: &FineMesh) -> CsrMatrix {
    let n = mesh.n_nodes();
    let mut trip = Vec::new();
    for t in 0..mesh.triangles.len() {
        let m = mesh.triangle_area(t) / 12.0;
        let vs = mesh.triangles[t];
        for i in 0..3 {
            for j in 0..3 {
                trip.push((vs[i], vs[j], if i == j { 2.0 * m } else { m }));
            }
        }
    }
    CsrMatrix::from_triplets(n, n, trip)
}

#[derive(Debug, Clone)]
pub struct ErrorBreakdown {
    /// percent per continuum
    pub per_continuum: Vec<f64>,
    /// percent over the concatenated continua
    pub combined: f64,
}

/// 100 * (integral (u_a - u_r)^2 / integral u_r^2)^(1/2), per continuum and
/// combined over all continua, using P1 mass-matrix inner products.
pub fn l2_relative_error(
    u_approx: &[f64],
    u_ref: &[f64],
    mesh: &FineMesh,
    n_continua: usize,
) -> Result<ErrorBreakdown, CliError> {
    let n = mesh.n_nodes();
    if u_approx.len() != n * n_continua || u_ref.len() != n * n_continua {
        return Err(CliError::Config(format!(
            "field length mismatch: {} and {} vs {} dofs",
            u_approx.len(),
            u_ref.len(),
            n * n_continua
        )));
    }
    let m = unit_mass(mesh);
    let quad = |v: &[f64]| -> f64 {
        let mv = m.matvec(v);
        v.iter().zip(&mv).map(|(a, b)| a * b).sum()
    };
    let mut per = Vec::with_capacity(n_continua);
    let mut num_total = 0.0;
    let mut den_total = 0.0;
    for c in 0..n_continua {
        let a = &u_approx[c * n..(c + 1) * n];
        let r = &u_ref[c * n..(c + 1) * n];
        let diff: Vec<f64> = a.iter().zip(r).map(|(x, y)| x - y).collect();
        let num = quad(&diff);
        let den = quad(r);
        if den <= 0.0 {
            return Err(CliError::Numerical(format!(
                "reference field of continuum {c} has zero L2 norm"
            )));
        }
        num_total += num;
        den_total += den;
        per.push(100.0 * (num / den).max(0.0).sqrt());
    }
    Ok(ErrorBreakdown {
        per_continuum: per,
        combined: 100.0 * (num_total / den_total).max(0.0).sqrt(),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorRow {
    pub mode: String,
    pub basis: usize,
    pub day: f64,
    /// percent, one entry per continuum (matrix, fracture, vug)
    pub per_continuum: Vec<f64>,
    pub combined: f64,
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorReport {
    pub config_digest: String,
    pub rows: Vec<ErrorRow>,
    /// dofs per mode label ("fine", "gmsfem@8", "msfem")
    pub dof: BTreeMap<String, usize>,
    /// offline/online wall seconds per mode label; informational only and
    /// excluded from the CSV export
    pub runtimes: BTreeMap<String, (f64, f64)>,
}

/// Run the fine reference once, then every requested mode and basis count,
/// and report per-day L2 errors mirroring a rows-by-basis, columns-by-day
/// table.
pub fn compare(
    setup: &SimSetup,
    modes: &[Mode],
    basis_counts: &[usize],
    days: &[f64],
) -> Result<ErrorReport, CliError> {
    let steps: Vec<usize> = days
        .iter()
        .map(|&d| day_to_step(&setup.config, d))
        .collect::<Result<_, _>>()?;

    let fine = run_mode(setup, Mode::Fine, None)?;
    let mut report = ErrorReport {
        config_digest: setup.config.digest(),
        rows: Vec::new(),
        dof: BTreeMap::new(),
        runtimes: BTreeMap::new(),
    };
    report.dof.insert("fine".into(), fine.dof);
    report
        .runtimes
        .insert("fine".into(), (fine.offline_seconds, fine.online_seconds));

    let mut add_rows = |run: &ModeRun| -> Result<(), CliError> {
        for (&day, &step) in days.iter().zip(&steps) {
            let err = l2_relative_error(
                &run.result.states[step].values,
                &fine.result.states[step].values,
                &setup.mesh,
                3,
            )?;
            report.rows.push(ErrorRow {
                mode: run.mode.name().to_string(),
                basis: run.basis,
                day,
                per_continuum: err.per_continuum,
                combined: err.combined,
                lambda: run.lambda,
            });
        }
        let label = match run.mode {
            Mode::Gmsfem => format!("gmsfem@{}", run.basis),
            m => m.name().to_string(),
        };
        report.dof.insert(label.clone(), run.dof);
        report
            .runtimes
            .insert(label, (run.offline_seconds, run.online_seconds));
        Ok(())
    };

    for &mode in modes {
        match mode {
            Mode::Fine => {}
            Mode::Gmsfem => {
                // one offline pass at the largest requested count, sliced per L
                let l_max = basis_counts.iter().copied().max().unwrap_or(setup.config.basis.count);
                let t0 = std::time::Instant::now();
                let (nbs, bases) = setup.spectral_bases(l_max)?;
                let offline_shared = t0.elapsed().as_secs_f64();
                for &l in basis_counts {
                    let t1 = std::time::Instant::now();
                    let space = setup.gmsfem_space(&nbs, &bases, l)?;
                    let prob = setup.problem();
                    let driver = fracflow_core::timestepper::Driver::coarse(&prob, &space)?;
                    let result = driver.run(&setup.initial, &setup.controls())?;
                    let run = ModeRun {
                        mode,
                        basis: l,
                        dof: space.dim(),
                        lambda: space.lambda_cut,
                        offline_seconds: offline_shared,
                        online_seconds: t1.elapsed().as_secs_f64(),
                        result,
                    };
                    add_rows(&run)?;
                }
            }
            Mode::Msfem => {
                let run = run_mode(setup, Mode::Msfem, None)?;
                add_rows(&run)?;
            }
        }
    }
    Ok(report)
}

impl ErrorReport {
    /// Text table in rows-by-basis, columns-by-day layout, one block per mode.
    pub fn render_table(&self) -> String {
        let mut days: Vec<f64> = self.rows.iter().map(|r| r.day).collect();
        days.sort_by(|a, b| a.partial_cmp(b).unwrap());
        days.dedup();
        let mut out = String::new();
        for mode in ["gmsfem", "msfem"] {
            let mut keys: Vec<usize> = self
                .rows
                .iter()
                .filter(|r| r.mode == mode)
                .map(|r| r.basis)
                .collect();
            keys.sort_unstable();
            keys.dedup();
            if keys.is_empty() {
                continue;
            }
            out.push_str(&format!("{mode}: combined L2 relative error (%)\n"));
            out.push_str("basis");
            for d in &days {
                out.push_str(&format!("{:>12}", format!("day {d}")));
            }
            out.push('\n');
            for &b in &keys {
                out.push_str(&format!("{b:>5}"));
                for &d in &days {
                    let v = self
                        .rows
                        .iter()
                        .find(|r| r.mode == mode && r.basis == b && r.day == d)
                        .map(|r| r.combined);
                    match v {
                        Some(v) => out.push_str(&format!("{v:>12.3}")),
                        None => out.push_str(&format!("{:>12}", "-")),
                    }
                }
                out.push('\n');
            }
        }
        let mut dofs: Vec<String> = self
            .dof
            .iter()
            .map(|(k, v)| format!("{k}: {v}"))
            .collect();
        dofs.sort();
        out.push_str(&format!("dof counts: {}\n", dofs.join(", ")));
        out
    }

    /// Rows of the pinned CSV schema, one file per mode.
    pub fn csv_per_mode(&self) -> BTreeMap<String, String> {
        let mut files = BTreeMap::new();
        for row in &self.rows {
            let entry = files
                .entry(row.mode.clone())
                .or_insert_with(|| "basis,day,continuum,error_pct\n".to_string());
            for (c, v) in row.per_continuum.iter().enumerate() {
                entry.push_str(&format!(
                    "{},{},{},{}\n",
                    row.basis, row.day, CONTINUUM_NAMES[c], v
                ));
            }
            entry.push_str(&format!(
                "{},{},combined,{}\n",
                row.basis, row.day, row.combined
            ));
        }
        files
    }
}
