//! Transmon coupled through a capacitor to a waveguide environment: flux
//! tuning, Lamb shift, radiative decay, dressed poles and transition rates.
//!
//! The qubit is linearized to L_J in parallel with C_q. It sees the load
//! Y_L = i w C_g / (1 + Z_line i w C_g) of the coupling capacitor in series
//! with the impedance of the line.

use num_complex::Complex64;

use crate::bands::{BandEdges, DispersionModel};
use crate::circuit::CapacitiveCell;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::transmission::{abcd_cell_complex, forward_mode, input_impedance_complex, FiniteWaveguide, Load};
use crate::units::{C_LIGHT, FLUX_QUANTUM, HBAR, PLANCK};

/// Smallest E_J,max/E_C accepted by default.
pub const TRANSMON_MIN_RATIO: f64 = 20.0;

/// Transmon energies (J), capacitances (F) and flux bias in units of the flux quantum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransmonParams {
    pub ej_max: f64,
    pub ec: f64,
    pub cq: f64,
    pub cg: f64,
    pub flux: f64,
}

impl TransmonParams {
    pub fn new(ej_max: f64, ec: f64, cq: f64, cg: f64, flux: f64) -> Result<Self> {
        Self::with_min_ratio(ej_max, ec, cq, cg, flux, TRANSMON_MIN_RATIO)
    }

    pub fn with_min_ratio(ej_max: f64, ec: f64, cq: f64, cg: f64, flux: f64, min_ratio: f64) -> Result<Self> {
        if !(ec > 0.0 && ej_max > 0.0) {
            return Err(Error::InvalidParameter("transmon energies must be positive".into()));
        }
        if !(ej_max / ec >= min_ratio) {
            return Err(Error::InvalidParameter(format!(
                "E_J/E_C = {:.2} is below the transmon guard {min_ratio}",
                ej_max / ec
            )));
        }
        if !(cq > 0.0 && cg > 0.0) {
            return Err(Error::InvalidParameter("C_q and C_g must be positive".into()));
        }
        if !flux.is_finite() {
            return Err(Error::InvalidParameter("flux must be finite".into()));
        }
        Ok(Self { ej_max, ec, cq, cg, flux })
    }

    /// Transmon with E_J,max = `ratio` E_C whose zero-flux transition is at
    /// `omega_max`, with C_q calibrated so the linearized circuit resonates there.
    pub fn from_max_frequency(omega_max: f64, ratio: f64, cg: f64) -> Result<Self> {
        if !(omega_max > 0.0 && ratio > 0.0) {
            return Err(Error::InvalidParameter("frequency and E_J/E_C must be positive".into()));
        }
        let ec = HBAR * omega_max / ((8.0 * ratio).sqrt() - 1.0);
        let uncalibrated = Self::new(ratio * ec, ec, 1.0, cg, 0.0)?;
        uncalibrated.calibrated()
    }

    /// The device of the reference experiment: 7.9 GHz at zero flux, E_J/E_C = 100.
    pub fn reference_device(cg: f64) -> Result<Self> {
        Self::from_max_frequency(2.0 * std::f64::consts::PI * 7.9e9, 100.0, cg)
    }

    /// E_J(flux) = E_J,max cos(2 pi flux).
    pub fn ej(&self) -> f64 {
        self.ej_max * (2.0 * std::f64::consts::PI * self.flux).cos()
    }

    pub fn with_flux(&self, flux: f64) -> Self {
        Self { flux, ..*self }
    }

    pub fn with_cg(&self, cg: f64) -> Self {
        Self { cg, ..*self }
    }

    /// Copy with C_q chosen so that the linearized and transmon frequencies
    /// coincide at zero flux.
    pub fn calibrated(&self) -> Result<Self> {
        let zero = self.with_flux(0.0);
        let omega = transmon_frequency(&zero)?;
        let lj = josephson_inductance(zero.ej());
        Ok(Self { cq: 1.0 / (omega * omega * lj), ..*self })
    }

    /// Copy biased to the smallest non-negative flux whose transition is at `omega`.
    pub fn tuned_to(&self, omega: f64) -> Result<Self> {
        let ej = (HBAR * omega + self.ec).powi(2) / (8.0 * self.ec);
        let ratio = ej / self.ej_max;
        if !(omega > 0.0 && ratio <= 1.0) {
            return Err(Error::Domain(format!("transmon cannot be tuned to {:.4} GHz", omega / 2e9 / std::f64::consts::PI)));
        }
        Ok(self.with_flux(ratio.acos() / (2.0 * std::f64::consts::PI)))
    }
}

fn josephson_inductance(ej: f64) -> f64 {
    let reduced = FLUX_QUANTUM / (2.0 * std::f64::consts::PI);
    reduced * reduced / ej
}

/// hbar w_ge = sqrt(8 E_C E_J(flux)) - E_C.
pub fn transmon_frequency(p: &TransmonParams) -> Result<f64> {
    let ej = p.ej();
    if !(ej > 0.0) {
        return Err(Error::Domain(format!("E_J is not positive at flux {}", p.flux)));
    }
    let omega = ((8.0 * p.ec * ej).sqrt() - p.ec) / HBAR;
    if !(omega > 0.0) {
        return Err(Error::Domain("transition energy is not positive".into()));
    }
    Ok(omega)
}

/// (L_J, 1/sqrt(L_J C_q)) of the linearized junction.
pub fn linearized_qubit(p: &TransmonParams) -> Result<(f64, f64)> {
    let ej = p.ej();
    if !(ej > 0.0) {
        return Err(Error::Domain(format!("E_J is not positive at flux {}", p.flux)));
    }
    let lj = josephson_inductance(ej);
    Ok((lj, 1.0 / (lj * p.cq).sqrt()))
}

/// 1/sqrt(L_J (C_q + C_g)): the resonance with the line replaced by a short,
/// i.e. the qubit dressed only by its static coupling capacitance.
pub fn loaded_frequency(p: &TransmonParams) -> Result<f64> {
    let (lj, _) = linearized_qubit(p)?;
    Ok(1.0 / (lj * (p.cq + p.cg)).sqrt())
}

/// Anharmonicity E_C/hbar separating the g-e and e-f transitions (rad/s).
pub fn anharmonicity(p: &TransmonParams) -> f64 {
    p.ec / HBAR
}

/// E_C/h in Hz.
pub fn charging_frequency(p: &TransmonParams) -> f64 {
    p.ec / PLANCK
}

/// Y_L = i s C_g / (1 + Z_line i s C_g).
pub fn series_load_admittance(z_line: Complex64, s: Complex64, cg: f64) -> Complex64 {
    let yc = Complex64::i() * s * cg;
    yc / (1.0 + z_line * yc)
}

/// What the qubit port couples to.
pub trait Environment: Sync {
    /// Admittance loading the qubit through C_g at complex frequency `s`.
    fn load_admittance(&self, s: Complex64, cg: f64) -> Complex64;

    /// Load resistance at the far end, if the environment has one.
    fn r_load(&self) -> Option<f64> {
        None
    }
}

/// A finite cascade with the qubit at its input node and the far end
/// terminated by `port_out` of the waveguide.
#[derive(Clone, Debug, PartialEq)]
pub struct CascadeEnv {
    pub waveguide: FiniteWaveguide,
}

impl CascadeEnv {
    pub fn new(cell: CapacitiveCell, n_cells: usize, gamma_i: f64, r_load: f64) -> Result<Self> {
        Ok(Self { waveguide: FiniteWaveguide::uniform(cell, n_cells, gamma_i, r_load, r_load)? })
    }

    pub fn line_impedance(&self, s: Complex64) -> Complex64 {
        input_impedance_complex(&self.waveguide, s, Load::resistor(self.waveguide.port_out))
    }

    /// Distance from the qubit to the load.
    pub fn length(&self) -> f64 {
        self.waveguide.length()
    }
}

impl Environment for CascadeEnv {
    fn load_admittance(&self, s: Complex64, cg: f64) -> Complex64 {
        series_load_admittance(self.line_impedance(s), s, cg)
    }

    fn r_load(&self) -> Option<f64> {
        Some(self.waveguide.port_out)
    }
}

/// Line impedance of a uniform periodic line of length `x` ending in `r_load`,
/// written through its Bloch impedance and wavenumber.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochEnv {
    pub cell: CapacitiveCell,
    pub gamma_i: f64,
    pub r_load: f64,
    pub x: f64,
}

impl BlochEnv {
    pub fn new(cell: CapacitiveCell, gamma_i: f64, r_load: f64, x: f64) -> Result<Self> {
        if !(r_load > 0.0 && x > 0.0 && gamma_i >= 0.0) {
            return Err(Error::InvalidParameter("Bloch environment needs R_L > 0, x > 0 and gamma_i >= 0".into()));
        }
        Ok(Self { cell, gamma_i, r_load, x })
    }
}

impl Environment for BlochEnv {
    fn load_admittance(&self, s: Complex64, cg: f64) -> Complex64 {
        let z = bloch_terms(s, &self.cell, self.gamma_i, self.r_load, self.x).exact;
        series_load_admittance(z, s, cg)
    }

    fn r_load(&self) -> Option<f64> {
        Some(self.r_load)
    }
}

/// A frequency-independent conductance seen directly by the qubit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlatBath {
    pub conductance: f64,
}

impl Environment for FlatBath {
    fn load_admittance(&self, _s: Complex64, _cg: f64) -> Complex64 {
        Complex64::new(self.conductance, 0.0)
    }
}

/// Line impedance of a terminated periodic line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochLineImpedance {
    /// Z_B (R_L + Z_B tanh(ikx)) / (Z_B + R_L tanh(ikx)).
    pub exact: Complex64,
    /// Z_B + 4 R_L exp(-2 Im(k) x).
    pub approx: Complex64,
    pub bloch: Complex64,
    /// Attenuation Im k (1/m).
    pub attenuation: f64,
    /// False outside the gap, for Im(k) x < 2 or for R_L > |Z_B|/5.
    pub valid: bool,
}

const APPROX_MIN_DECAY: f64 = 2.0;
const APPROX_MAX_LOAD_RATIO: f64 = 0.2;
/// |Re k d| below this counts as inside the gap.
const GAP_PHASE_TOLERANCE: f64 = 0.05;

fn bloch_terms(s: Complex64, cell: &CapacitiveCell, gamma_i: f64, r_load: f64, x: f64) -> BlochLineImpedance {
    let (lambda, zb) = forward_mode(&abcd_cell_complex(s, cell, gamma_i));
    // lambda = exp(i k d) grows along the cascade, so ln(lambda) = i k d with Re >= 0.
    let log_lambda = lambda.ln();
    let cells = x / cell.d;
    let decay = (-2.0 * cells * log_lambda).exp();
    let t = (1.0 - decay) / (1.0 + decay);
    let exact = zb * (r_load + zb * t) / (zb + r_load * t);
    let attenuation = log_lambda.re / cell.d;
    let approx = zb + 4.0 * r_load * (-2.0 * attenuation * x).exp();
    let valid = log_lambda.im.abs() < GAP_PHASE_TOLERANCE
        && attenuation * x >= APPROX_MIN_DECAY
        && r_load <= APPROX_MAX_LOAD_RATIO * zb.norm();
    BlochLineImpedance { exact, approx, bloch: zb, attenuation, valid }
}

/// Impedance of `x` of periodic line ending in `r_load`, exact and in the
/// deep-gap approximation. Out of its validity window the approximation is
/// still returned, with `valid` cleared.
pub fn bloch_line_impedance(omega: f64, cell: &CapacitiveCell, gamma_i: f64, r_load: f64, x: f64) -> Result<BlochLineImpedance> {
    if !(omega > 0.0 && r_load > 0.0 && x > 0.0) {
        return Err(Error::Domain("Bloch line impedance needs omega, R_L and x positive".into()));
    }
    Ok(bloch_terms(Complex64::new(omega, 0.0), cell, gamma_i, r_load, x))
}

/// Load admittance at real frequency.
pub fn load_admittance(omega: f64, p: &TransmonParams, env: &impl Environment) -> Complex64 {
    env.load_admittance(Complex64::new(omega, 0.0), p.cg)
}

/// Frequency shift of the qubit (rad/s).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambShift {
    /// -(w^2 L_J / 2) Im Y_L.
    pub raw: f64,
    /// The same with Y_L replaced by i w C_g: the static renormalization,
    /// -(w/2) C_g/C_q on resonance.
    pub capacitive: f64,
    /// raw - capacitive.
    pub anomalous: f64,
}

pub fn lamb_shift(omega: f64, p: &TransmonParams, env: &impl Environment) -> Result<LambShift> {
    let (lj, _) = linearized_qubit(p)?;
    let prefactor = -0.5 * omega * omega * lj;
    let raw = prefactor * load_admittance(omega, p, env).im;
    let capacitive = prefactor * omega * p.cg;
    Ok(LambShift { raw, capacitive, anomalous: raw - capacitive })
}

/// Radiative decay rate kappa = w^2 L_J Re Y_L and lifetime 1/kappa.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Purcell {
    pub kappa: f64,
    pub t_rad: f64,
}

pub fn purcell_decay(omega: f64, p: &TransmonParams, env: &impl Environment) -> Result<Purcell> {
    let (lj, _) = linearized_qubit(p)?;
    let kappa = omega * omega * lj * load_admittance(omega, p, env).re;
    if kappa < 0.0 {
        return Err(Error::Numerical(format!("negative decay rate {kappa:e}: environment is not passive")));
    }
    let t_rad = if kappa > 0.0 { 1.0 / kappa } else { f64::INFINITY };
    Ok(Purcell { kappa, t_rad })
}

/// Deep-gap lifetime C_q/(4 w^2 C_g^2 R_L) exp(2 Im(k) x).
pub fn t_rad_deep_gap(omega: f64, p: &TransmonParams, model: &DispersionModel, r_load: f64, x: f64) -> Result<f64> {
    let k = model.inverse_dispersion(omega)?;
    Ok(p.cq / (4.0 * omega * omega * p.cg * p.cg * r_load) * (2.0 * k.im * x).exp())
}

/// In-band Markovian rate gamma = (L/c) f^2 n_g.
pub fn markov_decay_in_band(f_coupling: f64, length: f64, n_g: f64) -> f64 {
    length / C_LIGHT * f_coupling * f_coupling * n_g
}

/// Relative step of the lifetime derivative, in units of the gap.
pub const SLOPE_STEP: f64 = 1e-4;

/// Both sides of |d T_rad/d w| / T_rad = x |Im n_g| / c, with T_rad the
/// deep-gap lifetime.
///
/// The left side is a centred difference with step `SLOPE_STEP` Delta. The
/// right side uses the exact group index of `model`.
pub fn lifetime_slope_identity(omega: f64, p: &TransmonParams, model: &DispersionModel, r_load: f64, x: f64) -> Result<(f64, f64)> {
    lifetime_slope_identity_with_step(omega, p, model, r_load, x, model.edges.delta * SLOPE_STEP)
}

/// As `lifetime_slope_identity` with an explicit difference step (rad/s).
pub fn lifetime_slope_identity_with_step(
    omega: f64,
    p: &TransmonParams,
    model: &DispersionModel,
    r_load: f64,
    x: f64,
    h: f64,
) -> Result<(f64, f64)> {
    if !(h > 0.0 && h < omega) {
        return Err(Error::Domain(format!("difference step must lie in (0, omega), got {h:e}")));
    }
    let t = |w: f64| t_rad_deep_gap(w, p, model, r_load, x);
    let lhs = ((t(omega + h)? - t(omega - h)?) / (2.0 * h)).abs() / t(omega)?;
    let rhs = x * model.group_index(omega)?.im.abs() / C_LIGHT;
    Ok((lhs, rhs))
}

/// Total admittance at the qubit node, Y_L + i s C_q + 1/(i s L_J).
pub fn circuit_admittance(s: Complex64, p: &TransmonParams, env: &impl Environment) -> Result<Complex64> {
    let (lj, _) = linearized_qubit(p)?;
    let i = Complex64::i();
    Ok(env.load_admittance(s, p.cg) + i * s * p.cq + 1.0 / (i * s * lj))
}

const POLE_GRID: usize = 4000;
const POLE_TOLERANCE: f64 = 1e-10;
const POLE_MAX_ITER: usize = 200;

fn secant_root<F: Fn(Complex64) -> Complex64>(f: &F, seed: f64) -> Option<Complex64> {
    let mut a = Complex64::new(seed, 0.0);
    let mut b = Complex64::new(seed * (1.0 + 1e-6), seed * 1e-7);
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..POLE_MAX_ITER {
        let denom = fb - fa;
        if denom.norm() == 0.0 || !denom.is_finite() {
            return None;
        }
        let c = b - fb * (b - a) / denom;
        if !c.is_finite() {
            return None;
        }
        if (c - b).norm() <= POLE_TOLERANCE * c.norm() {
            return Some(c);
        }
        (a, fa, b) = (b, fb, c);
        fb = f(b);
    }
    None
}

/// Complex zeros of the node admittance with real part in `window` (rad/s),
/// sorted by real part. A root s = w' + i eta rings as exp(i w' t - eta t),
/// so w' is the dressed frequency and 2 eta the energy decay rate.
pub fn strong_coupling_poles(p: &TransmonParams, env: &impl Environment, window: (f64, f64)) -> Result<Vec<Complex64>> {
    let (lo, hi) = window;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Domain("pole search window must be positive and ordered".into()));
    }
    linearized_qubit(p)?;
    let f = |s: Complex64| circuit_admittance(s, p, env).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
    let grid: Vec<f64> = (0..POLE_GRID).map(|j| lo + (hi - lo) * j as f64 / (POLE_GRID - 1) as f64).collect();
    let magnitude: Vec<f64> = grid.iter().map(|&w| f(Complex64::new(w, 0.0)).norm()).collect();
    let mut roots: Vec<Complex64> = Vec::new();
    for j in 1..POLE_GRID - 1 {
        if !(magnitude[j] <= magnitude[j - 1] && magnitude[j] < magnitude[j + 1]) {
            continue;
        }
        let Some(root) = secant_root(&f, grid[j]) else { continue };
        let inside = root.re >= lo && root.re <= hi && root.im >= -1e-9 * root.re;
        let fresh = roots.iter().all(|r| (r - root).norm() > 1e-8 * root.norm());
        if inside && fresh {
            roots.push(root);
        }
    }
    roots.sort_by(|a, b| a.re.total_cmp(&b.re));
    Ok(roots)
}

/// Rates of the g-e transition and of the e-f transition at w_ge - E_C/hbar.
///
/// Each rate is Re Y_L / C_q at its transition frequency. The e-f matrix
/// element is sqrt(2) larger, so its rate carries a factor 2.
pub fn two_transition_rates(p: &TransmonParams, env: &impl Environment) -> Result<(f64, f64)> {
    let omega_ge = transmon_frequency(p)?;
    let omega_fe = omega_ge - anharmonicity(p);
    let rate = |w: f64| load_admittance(w, p, env).re / p.cq;
    Ok((rate(omega_ge), 2.0 * rate(omega_fe)))
}

/// Observables of one bias point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitPrediction {
    pub flux: f64,
    pub omega_q_bare: f64,
    pub lamb_shift: LambShift,
    /// Anomalous shift minus that of the same qubit tuned to the reference
    /// frequency, when one is given.
    pub lamb_referenced: Option<f64>,
    pub kappa: f64,
    pub t_rad: f64,
    /// 1/T1 = 1/T_rad + 1/T_int.
    pub t1_total: f64,
}

/// Anomalous shift at `omega` relative to the anomalous shift at
/// `omega_ref`, with the qubit flux-tuned to each frequency.
pub fn referenced_shift(omega: f64, omega_ref: f64, p: &TransmonParams, env: &impl Environment) -> Result<f64> {
    let here = lamb_shift(omega, &p.tuned_to(omega)?, env)?.anomalous;
    let there = lamb_shift(omega_ref, &p.tuned_to(omega_ref)?, env)?.anomalous;
    Ok(here - there)
}

/// Evaluates the environment at the transmon frequency of `p`, which is
/// taken to include the static loading by C_g. `t_int` is the intrinsic
/// lifetime (infinity disables it); `omega_ref` sets the reference of
/// `lamb_referenced`.
pub fn predict(p: &TransmonParams, env: &impl Environment, t_int: f64, omega_ref: Option<f64>) -> Result<QubitPrediction> {
    if !(t_int > 0.0) {
        return Err(Error::InvalidParameter(format!("intrinsic lifetime must be positive, got {t_int}")));
    }
    let omega = transmon_frequency(p)?;
    let shift = lamb_shift(omega, p, env)?;
    let lamb_referenced = match omega_ref {
        Some(w) => Some(shift.anomalous - lamb_shift(w, &p.tuned_to(w)?, env)?.anomalous),
        None => None,
    };
    let purcell = purcell_decay(omega, p, env)?;
    let t1_total = 1.0 / (purcell.kappa + 1.0 / t_int);
    Ok(QubitPrediction {
        flux: p.flux,
        omega_q_bare: omega,
        lamb_shift: shift,
        lamb_referenced,
        kappa: purcell.kappa,
        t_rad: purcell.t_rad,
        t1_total,
    })
}

/// Predictions over a list of flux biases, in input order.
pub fn flux_sweep(
    p: &TransmonParams,
    env: &impl Environment,
    fluxes: &[f64],
    t_int: f64,
    omega_ref: Option<f64>,
    exec: Execution,
) -> Result<Vec<QubitPrediction>> {
    exec.map(fluxes, |&flux| predict(&p.with_flux(flux), env, t_int, omega_ref)).into_iter().collect()
}

/// Probe frequencies used for the coupling calibration: a twentieth of the
/// gap inside each edge.
pub fn calibration_probes(edges: &BandEdges) -> [f64; 2] {
    [edges.omega_c_minus + edges.delta / 20.0, edges.omega_c_plus - edges.delta / 20.0]
}

/// Anomalous shifts at the two probes referenced to mid-gap, lower edge first.
pub fn edge_shifts(p: &TransmonParams, env: &impl Environment, edges: &BandEdges) -> Result<[f64; 2]> {
    let [lower, upper] = calibration_probes(edges);
    Ok([
        referenced_shift(lower, edges.omega_mid, p, env)?,
        referenced_shift(upper, edges.omega_mid, p, env)?,
    ])
}

const CALIBRATION_TOLERANCE: f64 = 1e-10;
const CALIBRATION_MAX_ITER: usize = 100;

/// C_g for which the mean magnitude of `edge_shifts` equals `target` (rad/s).
///
/// The shift grows as C_g^2 at weak coupling, so each step rescales C_g by
/// the square root of the remaining ratio.
pub fn calibrate_cg(p: &TransmonParams, env: &impl Environment, edges: &BandEdges, target: f64) -> Result<f64> {
    if !(target > 0.0) {
        return Err(Error::InvalidParameter("calibration target must be positive".into()));
    }
    let mut cg = p.cg;
    for _ in 0..CALIBRATION_MAX_ITER {
        let [lower, upper] = edge_shifts(&p.with_cg(cg), env, edges)?;
        let shift = 0.5 * (lower.abs() + upper.abs());
        if !(shift > 0.0) {
            return Err(Error::Numerical("anomalous shift vanishes at the calibration probes".into()));
        }
        let next = cg * (target / shift).sqrt();
        if (next - cg).abs() <= CALIBRATION_TOLERANCE * cg {
            return Ok(next);
        }
        cg = next;
    }
    Err(Error::Numerical("coupling capacitance calibration did not converge".into()))
}
