//! Localization lengths from resonator disorder and loss.
//!
//! Lengths are in unit cells unless a function says otherwise. An infinite
//! length (`f64::INFINITY`) marks a divergence: no disorder, no loss, or an
//! undamped band.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::bands::{DispersionModel, Edge};
use crate::circuit::CapacitiveCell;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::transmission::{abcd_cell, forward_mode};

/// Statistical model of the resonator frequencies.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DisorderDistribution {
    /// omega0_n ~ Normal(omega0, sigma_rel omega0).
    #[default]
    Normal,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DisorderConfig {
    pub n_cells: usize,
    pub n_realizations: usize,
    pub sigma_rel: f64,
    pub seed: u64,
    pub distribution: DisorderDistribution,
}

impl DisorderConfig {
    pub fn new(n_cells: usize, n_realizations: usize, sigma_rel: f64, seed: u64) -> Result<Self> {
        let config = Self { n_cells, n_realizations, sigma_rel, seed, distribution: DisorderDistribution::Normal };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_cells == 0 || self.n_realizations == 0 {
            return Err(Error::InvalidParameter("cell and realization counts must be positive".into()));
        }
        if !(0.0..0.1).contains(&self.sigma_rel) {
            return Err(Error::InvalidParameter(format!(
                "sigma_rel must lie in [0, 0.1), got {}",
                self.sigma_rel
            )));
        }
        Ok(())
    }
}

/// Localization lengths (unit cells) on a frequency grid (rad/s).
#[derive(Clone, Debug, PartialEq)]
pub struct LocalizationProfile {
    pub freq: Vec<f64>,
    /// Disorder alone, lossless resonators.
    pub ell_disorder: Vec<f64>,
    /// Loss alone, from the complex band structure of the clean lattice.
    pub ell_loss: Vec<f64>,
    /// Harmonic combination of `ell_disorder` and `ell_loss`.
    pub ell_total: Vec<f64>,
    /// Standard error of 1/ell_total (per cell).
    pub stderr: Vec<f64>,
    /// Disorder and loss simulated together in one cascade.
    pub ell_joint: Vec<f64>,
    /// Standard error of 1/ell_joint (per cell).
    pub stderr_joint: Vec<f64>,
}

/// Disorder strength of the Kronig-Penney mapping at one edge.
///
/// sigma_low = (gamma_e/gamma_i)^2 dw/Delta and sigma_high = (gamma_e/Delta)^2 dw/Delta
/// with dw = sigma_rel omega0. The lower edge diverges without loss.
pub fn sigma_eff(edge: Edge, gamma_e: f64, gamma_i: f64, delta: f64, sigma_rel: f64, omega0: f64) -> Result<f64> {
    if !(gamma_e >= 0.0 && gamma_i >= 0.0 && delta > 0.0 && sigma_rel >= 0.0 && omega0 > 0.0) {
        return Err(Error::Domain("sigma_eff needs non-negative rates and a positive gap".into()));
    }
    let spread = sigma_rel * omega0 / delta;
    let ratio = match edge {
        Edge::Upper => gamma_e / delta,
        Edge::Lower if gamma_i == 0.0 => return Ok(if spread == 0.0 { 0.0 } else { f64::INFINITY }),
        Edge::Lower => gamma_e / gamma_i,
    };
    Ok(ratio * ratio * spread)
}

/// 2 Gamma(1/6) / (6^{1/3} sqrt(pi)).
pub fn band_edge_prefactor() -> f64 {
    2.0 * libm::tgamma(1.0 / 6.0) / (6f64.cbrt() * std::f64::consts::PI.sqrt())
}

/// Band-edge localization length ell = prefactor sigma^{-2/3} d, in the units of `d`.
pub fn analytic_loc_length(sigma: f64, d: f64) -> Result<f64> {
    if !(sigma >= 0.0) || !(d > 0.0) {
        return Err(Error::Domain(format!("analytic localization length needs sigma >= 0 and d > 0, got {sigma}, {d}")));
    }
    if sigma == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(band_edge_prefactor() * sigma.powf(-2.0 / 3.0) * d)
}

/// Loss-limited length 1/Im k (m) of the lossy band structure in `model`.
///
/// In the gap this includes the evanescent decay. A lossless pole has zero length.
pub fn loss_loc_length(omega: f64, model: &DispersionModel) -> Result<f64> {
    match model.inverse_dispersion(omega) {
        Ok(k) => Ok(k.loc_length()),
        Err(Error::Divergent(_)) => Ok(0.0),
        Err(e) => Err(e),
    }
}

/// Harmonic combination 1/ell = 1/ell_d + 1/ell_l; an infinite partner drops out.
pub fn combine_loc(ell_d: f64, ell_l: f64) -> f64 {
    match (ell_d.is_infinite(), ell_l.is_infinite()) {
        (true, _) => ell_l,
        (_, true) => ell_d,
        _ => 1.0 / (1.0 / ell_d + 1.0 / ell_l),
    }
}

/// Vectors are renormalized after this many cells.
const RENORMALIZE_EVERY: usize = 8;
/// Above this condition number of the clean mode basis the forward mode is ill
/// defined (band edge) and the norm growth of a random vector is used instead.
const MODE_CONDITION_LIMIT: f64 = 1e6;
/// Exponents at or below this (per cell) count as no localization.
const ZERO_EXPONENT: f64 = 1e-12;

/// Per-cell transfer matrices at one frequency, parameterized by the
/// relative shift of the resonator frequency.
struct CellFamily {
    z: Complex64,
    node: Complex64,
    coupler: Complex64,
    resonator_fixed: Complex64,
    inverse_inductor: Complex64,
}

impl CellFamily {
    fn new(omega: f64, cell: &CapacitiveCell, gamma_i: f64) -> Self {
        let i = Complex64::i();
        Self {
            z: i * omega * cell.l0,
            node: i * omega * cell.c0,
            coupler: i * omega * cell.ck,
            resonator_fixed: Complex64::new(2.0 * gamma_i * (cell.cr + cell.ck), omega * cell.cr),
            inverse_inductor: Complex64::new(0.0, -1.0 / (omega * cell.lr)),
        }
    }

    /// Applies the cell whose resonator frequency is scaled by `scale`
    /// (Lr -> Lr/scale^2) to (V, I).
    #[inline]
    fn apply(&self, scale: f64, v: [Complex64; 2]) -> [Complex64; 2] {
        let resonator = self.resonator_fixed + self.inverse_inductor * (scale * scale);
        let y = if self.coupler == Complex64::new(0.0, 0.0) {
            self.node
        } else {
            self.node + self.coupler * resonator / (self.coupler + resonator)
        };
        let zy = self.z * y;
        let a = 1.0 + 0.5 * zy;
        let b = self.z * (1.0 + 0.25 * zy);
        [a * v[0] + b * v[1], y * v[0] + a * v[1]]
    }
}

/// How the growth of a cascade is read out.
#[derive(Clone, Copy, Debug)]
enum Estimator {
    /// Amplitude of the forward Bloch mode with impedance `z` after starting in it.
    ForwardMode { z: Complex64 },
    /// Norm growth from a random start.
    Norm,
}

impl Estimator {
    fn for_clean_cell(omega: f64, cell: &CapacitiveCell, gamma_i: f64, z_ref: f64) -> Self {
        let (_, z) = forward_mode(&abcd_cell(omega, cell, gamma_i));
        // Mode basis [[z, -z], [1, 1]] in (V/z_ref, I) coordinates.
        let zn = z / z_ref;
        let frob = 2.0 * zn.norm_sqr() + 2.0;
        let det = 2.0 * zn.norm();
        let cond = (frob + (frob * frob - 4.0 * det * det).max(0.0).sqrt()) / (2.0 * det);
        if z.is_finite() && cond.is_finite() && cond <= MODE_CONDITION_LIMIT {
            Estimator::ForwardMode { z }
        } else {
            Estimator::Norm
        }
    }
}

struct Propagation<'a> {
    family: &'a CellFamily,
    estimator: Estimator,
    z_ref: f64,
}

impl Propagation<'_> {
    fn norm(&self, v: &[Complex64; 2]) -> f64 {
        ((v[0] / self.z_ref).norm_sqr() + v[1].norm_sqr()).sqrt()
    }

    fn start(&self, random: [Complex64; 2]) -> [Complex64; 2] {
        match self.estimator {
            Estimator::ForwardMode { z } => [z, Complex64::new(1.0, 0.0)],
            Estimator::Norm => [random[0] * self.z_ref, random[1]],
        }
    }

    /// ln of the growth of the readout over the cascade.
    fn log_growth(&self, scales: &[f64], random: [Complex64; 2]) -> f64 {
        let mut v = self.start(random);
        let readout = |v: &[Complex64; 2]| match self.estimator {
            Estimator::ForwardMode { z } => ((v[0] + z * v[1]) / (2.0 * z)).norm(),
            Estimator::Norm => self.norm(v),
        };
        let initial = readout(&v).ln();
        let mut acc = 0.0;
        for (n, &scale) in scales.iter().enumerate() {
            v = self.family.apply(scale, v);
            if (n + 1) % RENORMALIZE_EVERY == 0 {
                let norm = self.norm(&v);
                acc += norm.ln();
                v = [v[0] / norm, v[1] / norm];
            }
        }
        acc + readout(&v).ln() - initial
    }
}

fn draw_realization(config: &DisorderConfig, r: usize, scales: &mut Vec<f64>) -> [Complex64; 2] {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(r as u64);
    scales.clear();
    scales.extend((0..config.n_cells).map(|_| {
        let xi: f64 = StandardNormal.sample(&mut rng);
        1.0 + config.sigma_rel * xi
    }));
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
    [Complex64::new(normal(), normal()), Complex64::new(normal(), normal())]
}

/// Mean and standard error of per-cell exponents, summed in realization order.
fn exponent_stats(values: &[f64], n_cells: usize) -> (f64, f64) {
    let count = values.len() as f64;
    let per_cell: Vec<f64> = values.iter().map(|v| v / n_cells as f64).collect();
    let mean = per_cell.iter().sum::<f64>() / count;
    let stderr = if values.len() > 1 {
        let var = per_cell.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0);
        (var / count).sqrt()
    } else {
        0.0
    };
    (mean, stderr)
}

fn length_from_exponent(exponent: f64) -> f64 {
    if exponent <= ZERO_EXPONENT {
        f64::INFINITY
    } else {
        1.0 / exponent
    }
}

/// Lyapunov exponent per cell and its standard error at one frequency.
///
/// Realization `r` draws its resonator frequencies from stream `r` of a
/// ChaCha8 generator seeded with `config.seed`, so every frequency and
/// both loss settings see the same disorder.
pub fn lyapunov_exponent(
    cell: &CapacitiveCell,
    config: &DisorderConfig,
    omega: f64,
    gamma_i: f64,
    exec: Execution,
) -> Result<(f64, f64)> {
    Ok(lyapunov_pair(cell, config, omega, &[gamma_i], exec)?[0])
}

fn lyapunov_pair(
    cell: &CapacitiveCell,
    config: &DisorderConfig,
    omega: f64,
    gammas: &[f64],
    exec: Execution,
) -> Result<Vec<(f64, f64)>> {
    config.validate()?;
    if !(omega > 0.0) {
        return Err(Error::Domain(format!("frequency must be positive, got {omega}")));
    }
    let z_ref = cell.effective_line().z0;
    let families: Vec<CellFamily> = gammas.iter().map(|&g| CellFamily::new(omega, cell, g)).collect();
    let runs: Vec<Propagation> = families
        .iter()
        .zip(gammas)
        .map(|(family, &g)| Propagation { family, estimator: Estimator::for_clean_cell(omega, cell, g, z_ref), z_ref })
        .collect();
    let growth = exec.map_range(config.n_realizations, |r| {
        let mut scales = Vec::with_capacity(config.n_cells);
        let random = draw_realization(config, r, &mut scales);
        runs.iter().map(|run| run.log_growth(&scales, random)).collect::<Vec<f64>>()
    });
    let out = (0..runs.len())
        .map(|j| {
            let values: Vec<f64> = growth.iter().map(|g| g[j]).collect();
            exponent_stats(&values, config.n_cells)
        })
        .collect::<Vec<_>>();
    if out.iter().any(|(m, s)| !m.is_finite() || !s.is_finite()) {
        return Err(Error::Numerical(format!("non-finite Lyapunov exponent at omega = {omega:e}")));
    }
    Ok(out)
}

/// Monte Carlo localization profile of a disordered cascade of `cell`.
///
/// Each frequency runs the cascade with lossless resonators (`ell_disorder`)
/// and with half-width `gamma_i` (`ell_joint`) over the same realizations.
pub fn monte_carlo_localization(
    cell: &CapacitiveCell,
    config: &DisorderConfig,
    freqs: &[f64],
    gamma_i: f64,
    exec: Execution,
) -> Result<LocalizationProfile> {
    config.validate()?;
    if !(gamma_i >= 0.0) {
        return Err(Error::InvalidParameter(format!("gamma_i must be non-negative, got {gamma_i}")));
    }
    let model = DispersionModel::from_cell(cell, gamma_i)?;
    let mut profile = LocalizationProfile {
        freq: freqs.to_vec(),
        ell_disorder: Vec::with_capacity(freqs.len()),
        ell_loss: Vec::with_capacity(freqs.len()),
        ell_total: Vec::with_capacity(freqs.len()),
        stderr: Vec::with_capacity(freqs.len()),
        ell_joint: Vec::with_capacity(freqs.len()),
        stderr_joint: Vec::with_capacity(freqs.len()),
    };
    for &omega in freqs {
        let stats = lyapunov_pair(cell, config, omega, &[0.0, gamma_i], exec)?;
        let ((mean_d, err_d), (mean_j, err_j)) = (stats[0], stats[1]);
        let ell_d = length_from_exponent(mean_d);
        let ell_l = loss_loc_length(omega, &model)? / cell.d;
        profile.ell_disorder.push(ell_d);
        profile.ell_loss.push(ell_l);
        profile.ell_total.push(combine_loc(ell_d, ell_l));
        // ell_loss is deterministic, so 1/ell_total inherits the disorder error.
        profile.stderr.push(err_d);
        profile.ell_joint.push(length_from_exponent(mean_j));
        profile.stderr_joint.push(err_j);
    }
    Ok(profile)
}

/// The plotting grid of a profile: `n` points over
/// [omega_c- - Delta/2, omega_c+ + Delta/2].
pub fn profile_grid(cell: &CapacitiveCell, n: usize) -> Result<Vec<f64>> {
    let edges = crate::bands::band_edges(&crate::circuit::UnitCell::lattice(cell))?;
    let lo = edges.omega_c_minus - 0.5 * edges.delta;
    let hi = edges.omega_c_plus + 0.5 * edges.delta;
    Ok(match n {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => (0..n).map(|j| lo + (hi - lo) * j as f64 / (n - 1) as f64).collect(),
    })
}
