//! One function per subcommand; each returns the complete output document
//! as a string so the writer can emit it in a single deterministic pass.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qgeo::bures::{bures_line_element_sq, uhlmann_fidelity};
use qgeo::dynamics::{dispersions, evolve_path};
use qgeo::geodesics::{geodesic_gallery, geodesic_length, geodesic_r, numeric_geodesic};
use qgeo::interferometry::{maximize_p0, run_purified, run_unitary, NonunitaryStep};
use qgeo::matrix::unitary_exp;
use qgeo::metric::{differential_line_element, line_element_sq};
use qgeo::sample::random_density;
use qgeo::state::{align_step, decompose};
use qgeo::thermal::{
    build_anisotropic_chain, build_heisenberg_chain, fd_metric_db, fd_metric_dbeta, metric_db,
    metric_dbeta, single_spin, specific_heat, susceptibilities, thermal_state,
};
use qgeo::{AlignedPath, Decomposition64, Density64, GeodesicSpec, MagneticModel};

use crate::config::{
    BuresConfig, GeodesicConfig, InterfereConfig, MetricPathConfig, ModelConfig, ThermalScanConfig,
};
use crate::CliError;

/// Fixed-width float formatting: 17 significant digits, so equal values
/// always print as equal bytes.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_row(values: &[f64]) -> String {
    let mut row = values.iter().map(|&v| num(v)).collect::<Vec<_>>().join(",");
    row.push('\n');
    row
}

fn decompose_or_report(rho: &Density64, t: f64) -> Result<Decomposition64, CliError> {
    decompose(rho, qgeo::DEFAULT_RANK_TOL, qgeo::DEFAULT_DEGENERACY_TOL)
        .map_err(|e| CliError::from_qgeo_at(e, t))
}

pub fn cmd_metric_path(config: &MetricPathConfig, tol: f64) -> Result<String, CliError> {
    let (grid, path) = match config {
        MetricPathConfig::Unitary {
            rho0,
            hamiltonian,
            grid,
        } => {
            let rho0 = rho0.build_density(tol)?;
            let h = hamiltonian.build_hermitian(tol)?;
            let grid = grid.build()?;
            let path = evolve_path(
                &rho0,
                &h,
                &grid,
                qgeo::DEFAULT_RANK_TOL,
                qgeo::DEFAULT_DEGENERACY_TOL,
            )
            .map_err(|e| locate_path_failure(e, &grid, &rho0, &h))?;
            (grid, path)
        }
        MetricPathConfig::Tabulated { states, grid } => {
            let grid = grid.build()?;
            if states.len() != grid.len() {
                return Err(CliError::Config(format!(
                    "tabulated mode needs one state per grid point: {} states, {} points",
                    states.len(),
                    grid.len()
                )));
            }
            let mut decomps = Vec::with_capacity(states.len());
            for (spec, &t) in states.iter().zip(&grid) {
                let rho = spec.build_density(tol)?;
                let d = decompose_or_report(&rho, t)?;
                let aligned = match decomps.last() {
                    Some(prev) => align_step(prev, &d).map_err(|e| CliError::from_qgeo_at(e, t))?,
                    None => d,
                };
                decomps.push(aligned);
            }
            let path = AlignedPath::new(grid.clone(), decomps).map_err(CliError::from)?;
            (grid, path)
        }
    };

    let mut out = String::from("t,ds2_discrete,ds2_differential,fubini_study,fisher_rao,speed\n");
    for i in 1..path.len() - 1 {
        let t = path.time(i);
        let breakdown =
            differential_line_element(&path, i).map_err(|e| CliError::from_qgeo_at(e, t))?;
        let discrete = line_element_sq(path.decomp(i), path.decomp(i + 1))
            .map_err(|e| CliError::from_qgeo_at(e, t))?;
        let fs: f64 = breakdown.fubini_study_terms.iter().sum();
        let dt = (path.time(i + 1) - path.time(i - 1)) / 2.0;
        let speed = breakdown.total.sqrt() / dt;
        out.push_str(&csv_row(&[
            t,
            discrete,
            breakdown.total,
            fs,
            breakdown.fisher_rao,
            speed,
        ]));
    }
    let _ = grid;
    Ok(out)
}

/// Pin a path-construction failure to the first offending grid point.
fn locate_path_failure(
    e: qgeo::Error,
    grid: &[f64],
    rho0: &Density64,
    h: &qgeo::Matrix64,
) -> CliError {
    match e {
        qgeo::Error::RankChange {
            index,
            expected,
            found,
        } => {
            let t = grid[index];
            CliError::from_qgeo_at(
                qgeo::Error::RankChange {
                    index,
                    expected,
                    found,
                },
                t,
            )
        }
        qgeo::Error::DegenerateSpectrum { .. } => {
            for &t in grid {
                let bad = qgeo::dynamics::evolve(rho0, h, t)
                    .and_then(|rho| {
                        decompose(&rho, qgeo::DEFAULT_RANK_TOL, qgeo::DEFAULT_DEGENERACY_TOL)
                    })
                    .is_err();
                if bad {
                    return CliError::from_qgeo_at(e, t);
                }
            }
            CliError::from(e)
        }
        _ => CliError::from(e),
    }
}

pub fn cmd_geodesic(config: &GeodesicConfig) -> Result<String, CliError> {
    match config {
        GeodesicConfig::Gallery => {
            let mut out = String::from("r1,theta12,theta,x,z\n");
            for row in geodesic_gallery::<f64>() {
                out.push_str(&csv_row(&[row.r1, row.theta12, row.theta, row.x, row.z]));
            }
            Ok(out)
        }
        GeodesicConfig::Custom {
            r1,
            r2,
            theta12,
            points,
        } => {
            let spec = GeodesicSpec::new(*r1, *r2, *theta12)
                .map_err(|e| CliError::Config(format!("invalid geodesic spec: {e}")))?;
            let (r_num, len_num) = numeric_geodesic(&spec, *points)?;
            let len_closed = geodesic_length(&spec)?;
            let mut out = String::from("theta,r_closed,r_numeric,length_closed,length_numeric\n");
            for (i, &rn) in r_num.iter().enumerate() {
                let theta = spec.theta12() * (i as f64 / (*points - 1) as f64);
                let rc = geodesic_r(&spec, theta)?;
                out.push_str(&csv_row(&[theta, rc, rn, len_closed, len_num]));
            }
            Ok(out)
        }
    }
}

pub fn cmd_bures(config: &BuresConfig, tol: f64, seed: u64) -> Result<String, CliError> {
    match config {
        BuresConfig::Pair { rho, sigma } => {
            let rho = rho.build_density(tol)?;
            let sigma = sigma.build_density(tol)?;
            let da = decompose_or_report(&rho, f64::NAN)?;
            let db = decompose_or_report(&sigma, f64::NAN)?;
            let from_overlaps = bures_line_element_sq(&da, &db)?;
            let fidelity = uhlmann_fidelity(&rho, &sigma)?;
            let from_fidelity = 2.0 - 2.0 * fidelity;
            let spectral = line_element_sq(&da, &db)?;
            let mut out = String::new();
            out.push_str(&format!("bures_from_overlaps = {}\n", num(from_overlaps)));
            out.push_str(&format!("bures_from_fidelity = {}\n", num(from_fidelity)));
            out.push_str(&format!(
                "route_discrepancy = {}\n",
                num((from_overlaps - from_fidelity).abs())
            ));
            out.push_str(&format!("spectral = {}\n", num(spectral)));
            out.push_str(&format!(
                "ordering_ok = {}\n",
                from_overlaps <= spectral + 1e-12
            ));
            Ok(out)
        }
        BuresConfig::Fuzz {
            pairs,
            min_dim,
            max_dim,
        } => {
            if *min_dim < 2 || max_dim < min_dim {
                return Err(CliError::Config(format!(
                    "dimension range [{min_dim}, {max_dim}] is invalid"
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut max_route = 0.0f64;
            let mut max_violation = 0.0f64;
            for i in 0..*pairs {
                let dim = min_dim + i % (max_dim - min_dim + 1);
                // Keep the requested spectral gap feasible: `d` levels with
                // floor and gaps `g` need `g·d(d+1)/2 < 1`.
                let gap = (5e-2_f64).min(1.6 / (dim * (dim + 1)) as f64);
                let rho = random_density::<f64>(dim, gap, &mut rng);
                let sigma = random_density::<f64>(dim, gap, &mut rng);
                let da = decompose_or_report(&rho, f64::NAN)?;
                let db = decompose_or_report(&sigma, f64::NAN)?;
                let from_overlaps = bures_line_element_sq(&da, &db)?;
                let from_fidelity = 2.0 - 2.0 * uhlmann_fidelity(&rho, &sigma)?;
                let spectral = line_element_sq(&da, &db)?;
                max_route = max_route.max((from_overlaps - from_fidelity).abs());
                max_violation = max_violation.max(from_overlaps - spectral);
            }
            let mut out = String::new();
            out.push_str(&format!("pairs = {pairs}\n"));
            out.push_str(&format!("max_route_discrepancy = {}\n", num(max_route)));
            out.push_str(&format!(
                "max_ordering_violation = {}\n",
                num(max_violation.max(0.0))
            ));
            Ok(out)
        }
    }
}

pub fn cmd_interfere(config: &InterfereConfig, tol: f64) -> Result<String, CliError> {
    let rho = config.rho.build_density(tol)?;
    let h = config.hamiltonian.build_hermitian(tol)?;
    let dt = config.delta_t;
    if !(dt >= 0.0) {
        return Err(CliError::Config(format!("delta_t must be >= 0, got {dt}")));
    }
    let decomp = decompose_or_report(&rho, f64::NAN)?;
    let (p0max, fstar) = maximize_p0(&rho, &h, dt)?;
    let phases = match &config.phases {
        Some(f) => {
            if f.len() != decomp.rank() {
                return Err(CliError::Config(format!(
                    "expected {} phases, got {}",
                    decomp.rank(),
                    f.len()
                )));
            }
            f.clone()
        }
        None => fstar.clone(),
    };
    let (p0, p1) = run_unitary(&rho, &h, dt, &phases)?;
    let report = dispersions(&rho, &h)?;
    let delta_s_sq = report.avg_dispersion_sq * dt * dt;

    let mut out = String::new();
    out.push_str(&format!("p0 = {}\n", num(p0)));
    out.push_str(&format!("p1 = {}\n", num(p1)));
    out.push_str(&format!("p0_max = {}\n", num(p0max)));
    for (k, f) in fstar.iter().enumerate() {
        out.push_str(&format!("f_star_{k} = {}\n", num(*f)));
    }
    out.push_str(&format!(
        "dispersion_prediction = {}\n",
        num(1.0 - 0.25 * delta_s_sq)
    ));

    // Residual order estimate: the defect against 1 − ¼ΔĒ²δt² under δt
    // halving (only meaningful for a nonzero exposure).
    if dt > 0.0 {
        let residual = |t: f64| -> Result<f64, CliError> {
            let (p, _) = maximize_p0(&rho, &h, t)?;
            Ok(((1.0 - p) - 0.25 * report.avg_dispersion_sq * t * t).abs())
        };
        let r_full = residual(dt)?;
        let r_half = residual(dt / 2.0)?;
        out.push_str(&format!("residual_full_step = {}\n", num(r_full)));
        out.push_str(&format!("residual_half_step = {}\n", num(r_half)));
        if r_half > 0.0 {
            out.push_str(&format!(
                "residual_halving_ratio = {}\n",
                num(r_full / r_half)
            ));
        }
    }

    if let Some(delta_p) = &config.delta_p {
        if delta_p.len() != decomp.rank() {
            return Err(CliError::Config(format!(
                "expected {} probability increments, got {}",
                decomp.rank(),
                delta_p.len()
            )));
        }
        let u = unitary_exp(&h, dt)?;
        let step = NonunitaryStep::new(delta_p.clone(), u, phases)
            .map_err(|e| CliError::Config(format!("invalid nonunitary step: {e}")))?;
        let (p0_purified, _) = run_purified(&decomp, &step)
            .map_err(|e| CliError::Config(format!("invalid nonunitary step: {e}")))?;
        let classical: f64 = delta_p
            .iter()
            .zip(decomp.probs())
            .map(|(&dp, &p)| dp * dp / p)
            .sum();
        let prediction = 1.0 - 0.25 * (delta_s_sq + 0.25 * classical);
        out.push_str(&format!("purified_p0 = {}\n", num(p0_purified)));
        out.push_str(&format!("purified_prediction = {}\n", num(prediction)));
    }
    Ok(out)
}

fn build_model(config: &ModelConfig, field: f64) -> Result<MagneticModel<f64>, CliError> {
    let model = match config {
        ModelConfig::SingleSpin => single_spin::<f64>(),
        ModelConfig::Chain { sites, coupling } => build_heisenberg_chain(*sites, *coupling)
            .map_err(|e| CliError::Config(format!("invalid chain: {e}")))?,
        ModelConfig::TransverseChain {
            sites,
            coupling,
            transverse,
        } => build_anisotropic_chain(*sites, *coupling, *transverse)
            .map_err(|e| CliError::Config(format!("invalid chain: {e}")))?,
    };
    Ok(model.with_field(field))
}

pub fn cmd_thermal_scan(config: &ThermalScanConfig) -> Result<String, CliError> {
    let model = build_model(&config.model, config.field)?;
    let betas = config.beta_grid.build()?;
    if betas[0] <= 0.0 {
        return Err(CliError::Config(format!(
            "inverse temperatures must be positive, grid starts at {}",
            betas[0]
        )));
    }
    let delta = config.fd_delta;
    if !(delta > 0.0) {
        return Err(CliError::Config(format!(
            "fd_delta must be positive, got {delta}"
        )));
    }
    let mut out = String::from(
        "beta,b,C_V,chi_M,sum_p_chiF,metric_dbeta,metric_db,fd_metric_dbeta,fd_metric_db,rel_err_dbeta,rel_err_db\n",
    );
    for &beta in &betas {
        let state = thermal_state(&model, beta).map_err(|e| CliError::from_qgeo_at(e, beta))?;
        let cv = specific_heat(&model, beta).map_err(|e| CliError::from_qgeo_at(e, beta))?;
        let (chi_m, chi_f) =
            susceptibilities(&model, beta).map_err(|e| CliError::from_qgeo_at(e, beta))?;
        let sum_p_chif: f64 = state
            .weights()
            .iter()
            .zip(&chi_f)
            .map(|(&p, &c)| p * c)
            .sum();
        let m_dbeta = metric_dbeta(&model, beta).map_err(|e| CliError::from_qgeo_at(e, beta))?;
        let m_db = metric_db(&model, beta).map_err(|e| CliError::from_qgeo_at(e, beta))?;
        let (fd_dbeta, _, _) =
            fd_metric_dbeta(&model, beta, delta).map_err(|e| CliError::from_qgeo_at(e, beta))?;
        let (fd_db, _, _) =
            fd_metric_db(&model, beta, delta).map_err(|e| CliError::from_qgeo_at(e, beta))?;
        let rel = |a: f64, b: f64| {
            let scale = a.abs().max(b.abs());
            if scale == 0.0 {
                0.0
            } else {
                (a - b).abs() / scale
            }
        };
        out.push_str(&csv_row(&[
            beta,
            model.b(),
            cv,
            chi_m,
            sum_p_chif,
            m_dbeta,
            m_db,
            fd_dbeta,
            fd_db,
            rel(m_dbeta, fd_dbeta),
            rel(m_db, fd_db),
        ]));
    }
    Ok(out)
}
