//! JSON config schema: matrices carry separate real/imag arrays, grids are
//! uniform (start, stop, points).

use serde::Deserialize;

use qgeo::{Density64, Matrix64};

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSpec {
    pub dim: usize,
    pub real: Vec<f64>,
    pub imag: Vec<f64>,
}

impl MatrixSpec {
    pub fn build(&self) -> Result<Matrix64, CliError> {
        Matrix64::from_parts(self.dim, &self.real, &self.imag).map_err(|e| {
            CliError::Config(format!(
                "matrix needs {n} real and {n} imaginary entries: {e}",
                n = self.dim * self.dim
            ))
        })
    }

    /// Builds and validates a density operator at tolerance `tol`.
    pub fn build_density(&self, tol: f64) -> Result<Density64, CliError> {
        let m = self.build()?;
        Density64::new(m, tol).map_err(|e| CliError::Config(format!("invalid density matrix: {e}")))
    }

    /// Builds and checks Hermiticity at tolerance `tol`.
    pub fn build_hermitian(&self, tol: f64) -> Result<Matrix64, CliError> {
        let m = self.build()?;
        let dev = m.hermitian_deviation();
        if dev > tol {
            return Err(CliError::Config(format!(
                "matrix is not Hermitian (deviation {dev:.3e})"
            )));
        }
        Ok(m)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn build(&self) -> Result<Vec<f64>, CliError> {
        if self.points < 2 {
            return Err(CliError::Config(format!(
                "grid needs at least 2 points, got {}",
                self.points
            )));
        }
        if !(self.stop > self.start) {
            return Err(CliError::Config(format!(
                "grid must be strictly increasing, got [{}, {}]",
                self.start, self.stop
            )));
        }
        let span = self.stop - self.start;
        Ok((0..self.points)
            .map(|i| self.start + span * (i as f64 / (self.points - 1) as f64))
            .collect())
    }
}

#[derive(Debug, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MetricPathConfig {
    /// Evolve `rho0` under `exp(−iHt)` over the grid.
    Unitary {
        rho0: MatrixSpec,
        hamiltonian: MatrixSpec,
        grid: GridSpec,
    },
    /// One density matrix per grid point.
    Tabulated {
        states: Vec<MatrixSpec>,
        grid: GridSpec,
    },
}

#[derive(Debug, Deserialize)]
#[serde(tag = "curve", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GeodesicConfig {
    /// The eight sample curves toward r2 = 0.05.
    Gallery,
    /// One user-specified geodesic, closed form next to the relaxed
    /// minimizer.
    Custom {
        r1: f64,
        r2: f64,
        theta12: f64,
        #[serde(default = "default_curve_points")]
        points: usize,
    },
}

fn default_curve_points() -> usize {
    200
}

#[derive(Debug, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BuresConfig {
    /// Compare the two routes on one explicit pair of states.
    Pair { rho: MatrixSpec, sigma: MatrixSpec },
    /// Random pairs with dimensions drawn from [min_dim, max_dim].
    Fuzz {
        pairs: usize,
        #[serde(default = "default_min_dim")]
        min_dim: usize,
        #[serde(default = "default_max_dim")]
        max_dim: usize,
    },
}

fn default_min_dim() -> usize {
    2
}

fn default_max_dim() -> usize {
    6
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterfereConfig {
    pub rho: MatrixSpec,
    pub hamiltonian: MatrixSpec,
    pub delta_t: f64,
    /// 1-beam phases; defaults to the per-branch maximizers.
    #[serde(default)]
    pub phases: Option<Vec<f64>>,
    /// Probability increments; switches on the purified nonunitary mode.
    #[serde(default)]
    pub delta_p: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelConfig {
    SingleSpin,
    Chain {
        sites: usize,
        coupling: f64,
    },
    TransverseChain {
        sites: usize,
        coupling: f64,
        transverse: f64,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalScanConfig {
    pub model: ModelConfig,
    pub field: f64,
    pub beta_grid: GridSpec,
    #[serde(default = "default_fd_delta")]
    pub fd_delta: f64,
}

fn default_fd_delta() -> f64 {
    1e-4
}

pub fn load<T: serde::de::DeserializeOwned>(path: &std::path::Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("cannot parse config {}: {e}", path.display())))
}
