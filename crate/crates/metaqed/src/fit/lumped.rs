//! Fit of a uniform lumped-element cascade to a measured |S21| trace.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::lsq::minimize;
use crate::circuit::CapacitiveCell;
use crate::error::{Error, Result};
use crate::transmission::{FiniteWaveguide, SParamTrace};
use crate::units::hz_to_omega;

/// Cascade geometry held fixed during a fit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CascadeLayout {
    pub n_cells: usize,
    pub port_in: f64,
    pub port_out: f64,
}

impl Default for CascadeLayout {
    fn default() -> Self {
        Self { n_cells: 9, port_in: 50.0, port_out: 50.0 }
    }
}

/// Fitted cell, resonator half-width and frequency scale.
///
/// A device whose model responds at omega appears at `scale * omega` in
/// the measured trace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LumpedFit {
    pub cell: CapacitiveCell,
    pub gamma_i: f64,
    pub scale: f64,
    /// RMS deviation of |S21| in dB.
    pub residual: f64,
}

impl LumpedFit {
    pub fn new(cell: CapacitiveCell, gamma_i: f64, scale: f64) -> Self {
        Self { cell, gamma_i, scale, residual: f64::NAN }
    }
}

const STARTS: usize = 5;
/// Log-normal spread of the perturbed starting points.
const START_SPREAD: f64 = 0.05;
const START_SEED: u64 = 0x6c75_6d70;
const SCALE_RANGE: (f64, f64) = (0.5, 1.5);

/// Parameter vector: ln Lr, ln Cr, ln Ck, sqrt(gamma_i/omega_ref), ln scale.
fn encode(fit: &LumpedFit, reference: f64) -> [f64; 5] {
    [
        fit.cell.lr.ln(),
        fit.cell.cr.ln(),
        fit.cell.ck.ln(),
        (fit.gamma_i / reference).sqrt(),
        fit.scale.ln(),
    ]
}

fn decode(p: &[f64], base: &CapacitiveCell, reference: f64) -> Option<(CapacitiveCell, f64, f64)> {
    let cell = CapacitiveCell::new(base.c0, base.l0, p[1].exp(), p[0].exp(), p[2].exp(), base.d).ok()?;
    Some((cell, p[3] * p[3] * reference, p[4].exp()))
}

/// Fits Lr, Cr, Ck, gamma_i and the frequency scale; C0, L0 and d stay at
/// the values of `init.cell`. The loss is the RMS difference of |S21| in dB.
pub fn fit_lumped_model(trace: &SParamTrace, init: &LumpedFit, layout: &CascadeLayout) -> Result<LumpedFit> {
    if trace.len() < 5 {
        return Err(Error::Domain("lumped fit needs at least five samples".into()));
    }
    if !(init.cell.ck > 0.0) {
        return Err(Error::Domain("lumped fit needs a coupled initial cell".into()));
    }
    let omega: Vec<f64> = trace.freq.iter().map(|&f| hz_to_omega(f)).collect();
    let data_db = trace.s21_db();
    if data_db.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("trace contains zero or non-finite transmission".into()));
    }
    let reference = 0.5 * (omega[0] + omega[omega.len() - 1]);
    let base = init.cell;
    let residuals = |p: &[f64]| {
        let (cell, gamma_i, scale) = decode(p, &base, reference)?;
        let wg = FiniteWaveguide::uniform(cell, layout.n_cells, gamma_i, layout.port_in, layout.port_out).ok()?;
        Some(
            omega
                .iter()
                .zip(&data_db)
                .map(|(&w, &y)| 20.0 * wg.s_parameters(w / scale).1.norm().log10() - y)
                .collect(),
        )
    };

    let x0 = encode(init, reference);
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let starts: Vec<[f64; 5]> = (0..STARTS)
        .map(|s| {
            let mut x = x0;
            if s > 0 {
                for (i, v) in x.iter_mut().enumerate() {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    // The loss coordinate is a square root, so it is perturbed relatively.
                    let width = if i == 3 { 0.5 * v.abs() } else { 1.0 };
                    *v += START_SPREAD * z * width;
                }
            }
            x
        })
        .collect();

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut last_failure = None;
    for start in &starts {
        match minimize(residuals, start) {
            Ok(out) => {
                if best.as_ref().is_none_or(|(rms, _)| out.rms < *rms) {
                    best = Some((out.rms, out.params));
                }
            }
            Err(e) => last_failure = Some(e),
        }
    }
    let (rms, params) = match (best, last_failure) {
        (Some(b), _) => b,
        (None, Some(e)) => return Err(e),
        (None, None) => unreachable!("at least one start is always attempted"),
    };
    let (cell, gamma_i, scale) =
        decode(&params, &base, reference).ok_or_else(|| Error::Numerical("fitted cell is invalid".into()))?;
    if !(scale > SCALE_RANGE.0 && scale < SCALE_RANGE.1) {
        return Err(Error::FitFailure { evaluations: 0, residual: rms, best: params });
    }
    Ok(LumpedFit { cell, gamma_i, scale, residual: rms })
}
