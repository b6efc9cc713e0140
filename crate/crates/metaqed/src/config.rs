//! Run configuration: a TOML document in boundary units (GHz, MHz, fF, pH,
//! um, us), converted once to SI and angular frequency.
//!
//! ```toml
//! seed = 7
//! output_dir = "out"
//!
//! [device]
//! lower_edge_ghz = 4.92
//! upper_edge_ghz = 6.74
//! q_internal = 7.2e4
//!
//! [disorder]
//! n_realizations = 10000
//! ```
//!
//! Unknown keys are rejected. Sections other than `[device]` are needed
//! only by the commands that use them.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::circuit::{CapacitiveCell, UnitCell, WaveguideSpec, PAPER_BARE_FRACTION};
use crate::disorder::{DisorderConfig, DisorderDistribution};
use crate::error::{Error, Result};
use crate::qubit::TransmonParams;
use crate::units::{ghz_to_joule, ghz_to_omega, FEMTO, MICRO, PICO};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub device: Option<DeviceBlock>,
    #[serde(default)]
    pub dispersion: DispersionBlock,
    #[serde(default)]
    pub transmission: TransmissionBlock,
    pub disorder: Option<DisorderBlock>,
    pub qubit: Option<QubitBlock>,
    #[serde(default)]
    pub sweep: SweepBlock,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// The unit cell, given either by its gap edges or by explicit elements.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceBlock {
    #[serde(default = "default_z0")]
    pub z0_ohm: f64,
    #[serde(default = "default_index")]
    pub index: f64,
    #[serde(default = "default_period")]
    pub period_um: f64,
    pub lower_edge_ghz: Option<f64>,
    pub upper_edge_ghz: Option<f64>,
    /// C0/C0' of a gap design.
    pub bare_fraction: Option<f64>,
    pub cr_ff: Option<f64>,
    pub lr_ph: Option<f64>,
    pub ck_ff: Option<f64>,
    /// Q_i = omega_r/gamma_i with omega_r the resonator frequency seen by
    /// the lattice; absent means lossless.
    pub q_internal: Option<f64>,
}

fn default_z0() -> f64 {
    50.0
}
fn default_index() -> f64 {
    2.54
}
fn default_period() -> f64 {
    350.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DispersionBlock {
    pub k_points: usize,
}

impl Default for DispersionBlock {
    fn default() -> Self {
        Self { k_points: 1001 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransmissionBlock {
    pub n_cells: usize,
    pub port_in_ohm: f64,
    pub port_out_ohm: f64,
    pub f_start_ghz: f64,
    pub f_stop_ghz: f64,
    pub points: usize,
    /// Initial frequency scale of the lumped fit.
    pub fit_scale: f64,
}

impl Default for TransmissionBlock {
    fn default() -> Self {
        Self { n_cells: 9, port_in_ohm: 50.0, port_out_ohm: 50.0, f_start_ghz: 3.0, f_stop_ghz: 9.0, points: 1201, fit_scale: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DisorderBlock {
    pub n_cells: usize,
    pub n_realizations: usize,
    pub sigma_rel: f64,
    pub distribution: String,
    /// Points of the profile grid spanning the gap with half-gap margins.
    pub grid_points: usize,
}

impl Default for DisorderBlock {
    fn default() -> Self {
        Self { n_cells: 100, n_realizations: 100_000, sigma_rel: 0.005, distribution: "normal".into(), grid_points: 400 }
    }
}

/// Transmon and its environment. Either `max_frequency_ghz` with
/// `ej_over_ec`, or `ej_max_ghz`, `ec_ghz` and `cq_ff`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitBlock {
    pub max_frequency_ghz: Option<f64>,
    pub ej_over_ec: Option<f64>,
    pub ej_max_ghz: Option<f64>,
    pub ec_ghz: Option<f64>,
    pub cq_ff: Option<f64>,
    #[serde(default = "default_cg")]
    pub cg_ff: f64,
    /// When set, C_g is rescaled so the mean mid-gap-referenced shift at the
    /// two edge probes equals this value; `cg_ff` is the starting point.
    pub calibrate_edge_shift_mhz: Option<f64>,
    #[serde(default = "default_min_ratio")]
    pub min_ratio: f64,
    #[serde(default = "default_qubit_cells")]
    pub n_cells: usize,
    #[serde(default = "default_z0")]
    pub r_load_ohm: f64,
    /// Intrinsic lifetime; absent means radiative decay only.
    pub t_int_us: Option<f64>,
}

fn default_cg() -> f64 {
    5.0
}
fn default_min_ratio() -> f64 {
    crate::qubit::TRANSMON_MIN_RATIO
}
fn default_qubit_cells() -> usize {
    9
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepBlock {
    pub flux_start: f64,
    pub flux_stop: f64,
    pub flux_points: usize,
}

impl Default for SweepBlock {
    fn default() -> Self {
        Self { flux_start: 0.0, flux_stop: 0.25, flux_points: 201 }
    }
}

/// Device in SI units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Device {
    pub cell: CapacitiveCell,
    pub gamma_i: f64,
}

/// Qubit and environment in SI units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitSetup {
    pub params: TransmonParams,
    pub calibrate_target: Option<f64>,
    pub n_cells: usize,
    pub r_load: f64,
    pub t_int: f64,
}

fn config_error(message: impl Into<String>) -> Error {
    Error::Config(message.into())
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(config_error(format!("{name} must be positive and finite, got {v}")))
    }
}

fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n).map(|j| start + (stop - start) * j as f64 / (n - 1) as f64).collect(),
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| config_error(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => config_error(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// SHA-256 over the canonical JSON serialization of the parsed config.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&canonical).iter().map(|b| format!("{b:02x}")).collect()
    }

    fn device_block(&self) -> Result<&DeviceBlock> {
        self.device.as_ref().ok_or_else(|| config_error("missing [device] section"))
    }

    pub fn device(&self) -> Result<Device> {
        let b = self.device_block()?;
        let spec = WaveguideSpec::new(
            positive("z0_ohm", b.z0_ohm)?,
            positive("index", b.index)?,
            positive("period_um", b.period_um)? * MICRO,
        )
        .map_err(|e| config_error(e.to_string()))?;
        let edges = (b.lower_edge_ghz, b.upper_edge_ghz);
        let elements = (b.cr_ff, b.lr_ph, b.ck_ff);
        let cell = match (edges, elements) {
            ((Some(lo), Some(hi)), (None, None, None)) => {
                let fraction = b.bare_fraction.unwrap_or(PAPER_BARE_FRACTION);
                CapacitiveCell::design_for_gap(&spec, ghz_to_omega(lo), ghz_to_omega(hi), fraction)
            }
            ((None, None), (Some(cr), Some(lr), Some(ck))) => {
                if b.bare_fraction.is_some() {
                    return Err(config_error("bare_fraction applies only to a gap design"));
                }
                CapacitiveCell::from_line(&spec, cr * FEMTO, lr * PICO, ck * FEMTO)
            }
            _ => {
                return Err(config_error(
                    "[device] needs either lower_edge_ghz and upper_edge_ghz, or cr_ff, lr_ph and ck_ff",
                ))
            }
        }
        .map_err(|e| config_error(e.to_string()))?;
        let gamma_i = match b.q_internal {
            None => 0.0,
            Some(q) => cell.lattice().omega0 / positive("q_internal", q)?,
        };
        Ok(Device { cell, gamma_i })
    }

    pub fn k_points(&self) -> Result<usize> {
        match self.dispersion.k_points {
            n if n >= 2 => Ok(n),
            n => Err(config_error(format!("k_points must be at least 2, got {n}"))),
        }
    }

    /// Transmission frequency grid in Hz.
    pub fn transmission_grid(&self) -> Result<Vec<f64>> {
        let t = &self.transmission;
        let start = positive("f_start_ghz", t.f_start_ghz)?;
        let stop = positive("f_stop_ghz", t.f_stop_ghz)?;
        if !(stop > start) || t.points < 2 {
            return Err(config_error("transmission grid needs f_stop_ghz > f_start_ghz and at least 2 points"));
        }
        if t.n_cells == 0 {
            return Err(config_error("transmission n_cells must be positive"));
        }
        positive("port_in_ohm", t.port_in_ohm)?;
        positive("port_out_ohm", t.port_out_ohm)?;
        positive("fit_scale", t.fit_scale)?;
        Ok(linspace(start * 1e9, stop * 1e9, t.points))
    }

    /// Disorder ensemble and grid size; the seed is the run seed.
    pub fn disorder(&self) -> Result<(DisorderConfig, usize)> {
        let b = self.disorder.as_ref().ok_or_else(|| config_error("missing [disorder] section"))?;
        let distribution = match b.distribution.as_str() {
            "normal" => DisorderDistribution::Normal,
            other => return Err(config_error(format!("unknown disorder distribution {other:?}"))),
        };
        let mut config = DisorderConfig::new(b.n_cells, b.n_realizations, b.sigma_rel, self.seed)
            .map_err(|e| config_error(e.to_string()))?;
        config.distribution = distribution;
        if b.grid_points < 2 {
            return Err(config_error("grid_points must be at least 2"));
        }
        Ok((config, b.grid_points))
    }

    pub fn qubit(&self) -> Result<QubitSetup> {
        let b = self.qubit.as_ref().ok_or_else(|| config_error("missing [qubit] section"))?;
        let cg = positive("cg_ff", b.cg_ff)? * FEMTO;
        let reference = (b.max_frequency_ghz, b.ej_over_ec);
        let explicit = (b.ej_max_ghz, b.ec_ghz, b.cq_ff);
        let params = match (reference, explicit) {
            ((Some(f), Some(ratio)), (None, None, None)) => {
                if ratio < b.min_ratio {
                    return Err(config_error(format!("ej_over_ec = {ratio} is below min_ratio = {}", b.min_ratio)));
                }
                TransmonParams::from_max_frequency(ghz_to_omega(positive("max_frequency_ghz", f)?), ratio, cg)
            }
            ((None, None), (Some(ej), Some(ec), Some(cq))) => TransmonParams::with_min_ratio(
                ghz_to_joule(positive("ej_max_ghz", ej)?),
                ghz_to_joule(positive("ec_ghz", ec)?),
                positive("cq_ff", cq)? * FEMTO,
                cg,
                0.0,
                b.min_ratio,
            ),
            _ => {
                return Err(config_error(
                    "[qubit] needs either max_frequency_ghz and ej_over_ec, or ej_max_ghz, ec_ghz and cq_ff",
                ))
            }
        }
        .map_err(|e| config_error(e.to_string()))?;
        let calibrate_target = match b.calibrate_edge_shift_mhz {
            None => None,
            Some(mhz) => Some(2.0 * std::f64::consts::PI * positive("calibrate_edge_shift_mhz", mhz)? * 1e6),
        };
        if b.n_cells == 0 {
            return Err(config_error("qubit n_cells must be positive"));
        }
        let t_int = match b.t_int_us {
            None => f64::INFINITY,
            Some(t) => positive("t_int_us", t)? * MICRO,
        };
        Ok(QubitSetup { params, calibrate_target, n_cells: b.n_cells, r_load: positive("r_load_ohm", b.r_load_ohm)?, t_int })
    }

    pub fn flux_grid(&self) -> Result<Vec<f64>> {
        let s = &self.sweep;
        if !(s.flux_start.is_finite() && s.flux_stop.is_finite()) || s.flux_points == 0 {
            return Err(config_error("flux grid needs finite bounds and at least one point"));
        }
        Ok(linspace(s.flux_start, s.flux_stop, s.flux_points))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bands::band_edges;
    use crate::circuit::reference_cell;
    use crate::qubit::transmon_frequency;
    use approx::assert_relative_eq;

    const PAPER: &str = r#"
seed = 3
[device]
lower_edge_ghz = 4.92
upper_edge_ghz = 6.74
q_internal = 7.2e4
[disorder]
n_realizations = 1000
[qubit]
max_frequency_ghz = 7.9
ej_over_ec = 100
"#;

    #[test]
    fn reference_device_from_gap_edges() {
        let config = RunConfig::from_toml(PAPER).unwrap();
        let device = config.device().unwrap();
        assert_eq!(device.cell, reference_cell());
        let edges = band_edges(&device.cell.lattice()).unwrap();
        assert_relative_eq!(device.gamma_i, edges.omega_c_plus / 7.2e4, max_relative = 1e-12);
        assert_eq!(config.output_dir, PathBuf::from("out"));
        assert_eq!(config.k_points().unwrap(), 1001);
    }

    #[test]
    fn explicit_elements_and_decoupled_cell() {
        let text = "[device]\ncr_ff = 46.57\nlr_ph = 8160\nck_ff = 0\n";
        let device = RunConfig::from_toml(text).unwrap().device().unwrap();
        assert_eq!(device.cell.ck, 0.0);
        assert_eq!(device.gamma_i, 0.0);
        assert_relative_eq!(device.cell.lr, 8.16e-9, max_relative = 1e-12);
    }

    #[test]
    fn blocks_convert_to_si() {
        let config = RunConfig::from_toml(PAPER).unwrap();
        let (disorder, grid) = config.disorder().unwrap();
        assert_eq!((disorder.n_cells, disorder.n_realizations, disorder.seed, grid), (100, 1000, 3, 400));
        assert_eq!(disorder.sigma_rel, 0.005);
        let qubit = config.qubit().unwrap();
        assert_relative_eq!(transmon_frequency(&qubit.params).unwrap(), ghz_to_omega(7.9), max_relative = 1e-12);
        assert_eq!(qubit.t_int, f64::INFINITY);
        assert_eq!(config.flux_grid().unwrap().len(), 201);
        assert_eq!(config.transmission_grid().unwrap().len(), 1201);
    }

    #[test]
    fn rejects_unknown_keys_and_missing_blocks() {
        assert!(matches!(RunConfig::from_toml("colour = 1\n"), Err(Error::Config(_))));
        assert!(RunConfig::from_toml("[device]\nlower_edge_ghz = 4\nupper_edge_ghz = 6\nwidth = 3\n").is_err());
        let bare = RunConfig::from_toml("seed = 1\n").unwrap();
        for err in [bare.device().unwrap_err(), bare.disorder().unwrap_err(), bare.qubit().unwrap_err()] {
            assert_eq!(err.exit_code(), 2);
        }
    }

    #[test]
    fn rejects_ambiguous_or_invalid_values() {
        let mixed = "[device]\nlower_edge_ghz = 4.9\nupper_edge_ghz = 6.7\ncr_ff = 40\n";
        assert!(RunConfig::from_toml(mixed).unwrap().device().is_err());
        let inverted = "[device]\nlower_edge_ghz = 6.7\nupper_edge_ghz = 4.9\n";
        assert!(RunConfig::from_toml(inverted).unwrap().device().is_err());
        let wide = "[disorder]\nsigma_rel = 0.2\n";
        assert!(RunConfig::from_toml(wide).unwrap().disorder().is_err());
        let shape = "[disorder]\ndistribution = \"uniform\"\n";
        assert!(RunConfig::from_toml(shape).unwrap().disorder().is_err());
        let cooper_pair_box = "[qubit]\nmax_frequency_ghz = 7.9\nej_over_ec = 5\n";
        assert!(RunConfig::from_toml(cooper_pair_box).unwrap().qubit().is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::from_toml(PAPER).unwrap();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
        b.seed += 1;
        assert_ne!(a.hash(), b.hash());
    }
}
