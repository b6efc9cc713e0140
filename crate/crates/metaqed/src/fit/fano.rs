//! Single-resonance Fano lineshape and its complex least-squares fit.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::lsq::minimize;
use crate::error::{Error, Result};
use crate::transmission::SParamTrace;
use crate::units::hz_to_omega;

/// Fitted resonance. `gamma_i` and `gamma_e` are rates with Q = omega0/gamma.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FanoFit {
    pub omega0: f64,
    pub gamma_i: f64,
    pub gamma_e: f64,
    /// Fano phase in (-pi, pi].
    pub phi0: f64,
    /// RMS of the complex residual.
    pub residual: f64,
}

impl FanoFit {
    pub fn q_internal(&self) -> f64 {
        self.omega0 / self.gamma_i
    }

    pub fn q_external(&self) -> f64 {
        self.omega0 / self.gamma_e
    }
}

/// S21 = 1 - gamma_e e^{i phi0} / (gamma_i + gamma_e + 2i (omega - omega0)).
pub fn fano_s21(omega: f64, omega0: f64, gamma_i: f64, gamma_e: f64, phi0: f64) -> Complex64 {
    let denom = Complex64::new(gamma_i + gamma_e, 2.0 * (omega - omega0));
    1.0 - gamma_e * Complex64::from_polar(1.0, phi0) / denom
}

fn wrap_phase(phi: f64) -> f64 {
    let wrapped = phi.rem_euclid(2.0 * PI);
    if wrapped > PI {
        wrapped - 2.0 * PI
    } else {
        wrapped
    }
}

const MIN_SAMPLES: usize = 10;
const MIN_LINEWIDTHS: f64 = 3.0;

/// Estimates the resonance from the response |1 - S21|, whose peak sits at
/// omega0 with height gamma_e/(gamma_i+gamma_e) and full width gamma_i+gamma_e.
fn initial_guess(omega: &[f64], s21: &[Complex64]) -> FanoFit {
    let depth: Vec<f64> = s21.iter().map(|s| (1.0 - s).norm()).collect();
    let peak = (0..depth.len()).max_by(|&a, &b| depth[a].total_cmp(&depth[b])).unwrap_or(0);
    let half = 0.5 * depth[peak];
    let lo = (0..peak).rev().find(|&i| depth[i] < half).unwrap_or(0);
    let hi = (peak..depth.len()).find(|&i| depth[i] < half).unwrap_or(depth.len() - 1);
    let spacing = (omega[omega.len() - 1] - omega[0]) / (omega.len() - 1) as f64;
    let total = (omega[hi] - omega[lo]).max(spacing);
    let coupled = depth[peak].clamp(1e-3, 0.999);
    FanoFit {
        omega0: omega[peak],
        gamma_i: total * (1.0 - coupled),
        gamma_e: total * coupled,
        phi0: (1.0 - s21[peak]).arg(),
        residual: f64::NAN,
    }
}

/// Fits the Fano lineshape to the samples of `trace` inside `window` (Hz).
///
/// Parameters are fitted as omega0/omega_ref, ln(gamma/omega_ref) and phi0,
/// with omega_ref the window centre, which keeps both rates positive.
pub fn fit_fano(trace: &SParamTrace, window: (f64, f64), init: Option<FanoFit>) -> Result<FanoFit> {
    let sub = trace.window(window.0, window.1);
    if sub.len() < MIN_SAMPLES {
        return Err(Error::Domain(format!(
            "Fano window holds {} samples; at least {MIN_SAMPLES} are required",
            sub.len()
        )));
    }
    let omega: Vec<f64> = sub.freq.iter().map(|&f| hz_to_omega(f)).collect();
    let guess = init.unwrap_or_else(|| initial_guess(&omega, &sub.s21));
    let span = omega[omega.len() - 1] - omega[0];
    let linewidth = guess.gamma_i + guess.gamma_e;
    if !(linewidth > 0.0) || span < MIN_LINEWIDTHS * linewidth {
        return Err(Error::Domain(format!(
            "Fano window spans {:.2} linewidths; at least {MIN_LINEWIDTHS} are required",
            span / linewidth
        )));
    }
    let reference = 0.5 * (omega[0] + omega[omega.len() - 1]);
    let x0 = [
        guess.omega0 / reference,
        (guess.gamma_i / reference).ln(),
        (guess.gamma_e / reference).ln(),
        guess.phi0,
    ];
    let residuals = |p: &[f64]| {
        let (w0, gi, ge) = (p[0] * reference, p[1].exp() * reference, p[2].exp() * reference);
        let mut out = Vec::with_capacity(2 * omega.len());
        for (&w, &s) in omega.iter().zip(&sub.s21) {
            let r = fano_s21(w, w0, gi, ge, p[3]) - s;
            out.push(r.re);
            out.push(r.im);
        }
        Some(out)
    };
    let fit = minimize(residuals, &x0)?;
    let p = &fit.params;
    Ok(FanoFit {
        omega0: p[0] * reference,
        gamma_i: p[1].exp() * reference,
        gamma_e: p[2].exp() * reference,
        phi0: wrap_phase(p[3]),
        // Two real residuals per complex sample.
        residual: fit.rms * 2f64.sqrt(),
    })
}
