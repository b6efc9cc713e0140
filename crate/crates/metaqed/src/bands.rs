//! Band structure: RWA and exact spectra, band edges, complex dispersion with
//! loss, band-edge expansions and group index.
//!
//! Time dependence is exp(i omega t). A [`ComplexK`] describes a wave that
//! varies as exp(-i re x - im x), so `im` is the attenuation constant and is
//! never negative.

use nalgebra::Matrix4;
use num_complex::Complex64;

use crate::circuit::{CapacitiveCell, Lattice, UnitCell, WaveguideSpec};
use crate::error::{Error, Result};
use crate::units::C_LIGHT;

/// Both polariton branches at one wavenumber, with RWA eigenvector weights
/// `(waveguide, resonator)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BandPoint {
    pub k: f64,
    pub omega_plus: f64,
    pub omega_minus: f64,
    pub weights_plus: (f64, f64),
    pub weights_minus: (f64, f64),
}

/// Polariton bands in the rotating-wave approximation.
pub fn rwa_bands(k: f64, lat: &Lattice) -> BandPoint {
    let omega_k = lat.bare_dispersion(k);
    let w0 = lat.omega0;
    let g = lat.coupling(k);
    let root = ((omega_k - w0).powi(2) + 4.0 * g * g).sqrt();
    let omega_plus = 0.5 * (omega_k + w0 + root);
    let omega_minus = 0.5 * (omega_k + w0 - root);
    let weights = |w: f64| {
        let a = w - w0;
        let norm = (a * a + g * g).sqrt();
        if norm == 0.0 {
            (0.0, 1.0)
        } else {
            (a / norm, g / norm)
        }
    };
    BandPoint {
        k,
        omega_plus,
        omega_minus,
        weights_plus: weights(omega_plus),
        weights_minus: weights(omega_minus),
    }
}

/// Exact (counter-rotating terms included) polariton frequencies `(plus, minus)`.
pub fn exact_bands(k: f64, lat: &Lattice) -> Result<(f64, f64)> {
    let omega_k = lat.bare_dispersion(k);
    let w0 = lat.omega0;
    let reduction = 1.0 - 4.0 * lat.coupling_ratio;
    if reduction < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "over-coupled cell: 4 g^2/(Omega omega0) = {} exceeds 1",
            4.0 * lat.coupling_ratio
        )));
    }
    let (a2, b2) = (omega_k * omega_k, w0 * w0);
    let cross = 16.0 * lat.coupling_ratio * a2 * b2;
    let plus2 = 0.5 * ((a2 + b2) + ((a2 - b2).powi(2) + cross).sqrt());
    // Product of the roots avoids cancellation in the lower branch.
    let minus2 = if plus2 > 0.0 { a2 * b2 * reduction / plus2 } else { 0.0 };
    Ok((plus2.sqrt(), minus2.sqrt()))
}

/// Exact frequencies from a dense eigen-decomposition of J H_k.
pub fn brute_force_bands(k: f64, lat: &Lattice) -> Result<(f64, f64)> {
    let w = lat.bare_dispersion(k);
    let w0 = lat.omega0;
    let g = lat.coupling(k);
    #[rustfmt::skip]
    let h = Matrix4::new(
        w,   0.0, g,   -g,
        0.0, w,   -g,  g,
        g,   -g,  w0,  0.0,
        -g,  g,   0.0, w0,
    );
    let j = Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, -1.0, 1.0, -1.0));
    let eig = (j * h).complex_eigenvalues();
    let scale = w.max(w0);
    let mut positive: Vec<f64> = eig
        .iter()
        .map(|z| {
            if z.im.abs() > 1e-6 * scale {
                Err(Error::Numerical(format!("complex eigenvalue {z} of J H_k")))
            } else {
                Ok(z.re)
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    positive.sort_by(|a, b| b.total_cmp(a));
    Ok((positive[0].max(0.0), positive[1].max(0.0)))
}

/// Cut-off frequencies of the gap.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BandEdges {
    pub omega_c_minus: f64,
    pub omega_c_plus: f64,
    pub delta: f64,
    pub omega_mid: f64,
}

impl BandEdges {
    pub fn from_edges(omega_c_minus: f64, omega_c_plus: f64) -> Self {
        Self {
            omega_c_minus,
            omega_c_plus,
            delta: omega_c_plus - omega_c_minus,
            omega_mid: 0.5 * (omega_c_plus + omega_c_minus),
        }
    }

    pub fn edge(&self, which: Edge) -> f64 {
        match which {
            Edge::Lower => self.omega_c_minus,
            Edge::Upper => self.omega_c_plus,
        }
    }

    pub fn contains(&self, omega: f64) -> bool {
        omega > self.omega_c_minus && omega < self.omega_c_plus
    }
}

/// Upper edge omega0 and lower edge omega0 sqrt(1 - 4 g^2/(Omega omega0)).
pub fn band_edges(lat: &Lattice) -> Result<BandEdges> {
    let ratio = 4.0 * lat.coupling_ratio;
    if ratio >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "gap reaches zero frequency: 4 g^2/(Omega omega0) = {ratio}"
        )));
    }
    Ok(BandEdges::from_edges(lat.omega0 * (1.0 - ratio).sqrt(), lat.omega0))
}

/// Complex Bloch wavenumber; see the module documentation for the sign convention.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexK {
    pub re: f64,
    pub im: f64,
}

impl ComplexK {
    /// Selects the root of `k` (or `-k`) that decays along +x.
    ///
    /// Components below 1e-13 |k| are round-off and are set to zero.
    pub fn decaying(k: Complex64) -> Self {
        let k = snap(k);
        let k = if needs_flip(k) { -k } else { k };
        Self { re: k.re + 0.0, im: -k.im + 0.0 }
    }

    /// 1/e amplitude decay length (m); infinite without attenuation.
    pub fn loc_length(&self) -> f64 {
        if self.im > 0.0 {
            1.0 / self.im
        } else {
            f64::INFINITY
        }
    }

    /// The wavenumber as a complex number in the exp(-ikx) convention.
    pub fn as_complex(&self) -> Complex64 {
        Complex64::new(self.re, -self.im)
    }
}

fn snap(k: Complex64) -> Complex64 {
    let tiny = 1e-13 * k.norm();
    let clean = |v: f64| if v.abs() <= tiny { 0.0 } else { v };
    Complex64::new(clean(k.re), clean(k.im))
}

/// True when `-k` rather than `k` is the root decaying along +x.
fn needs_flip(k: Complex64) -> bool {
    let k = snap(k);
    k.im > 0.0 || (k.im == 0.0 && k.re < 0.0)
}

/// Which edge of the gap.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Edge {
    Lower,
    Upper,
}

/// Lossy dispersion of the lattice, k(omega), continued from its band edges.
///
/// The squared bare-line frequency is
/// Omega^2 = omega^2 (omega_c+^2 - omega^2 + 2i omega g+)/(omega_c-^2 - omega^2 + 2i omega g-),
/// and k = (2/d) asin(n d Omega / 2c). The damping rates g- and g+ are the
/// half-widths with which loss enters the resonator pole and the upper-edge
/// zero respectively.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DispersionModel {
    pub edges: BandEdges,
    pub line: WaveguideSpec,
    pub damping_lower: f64,
    pub damping_upper: f64,
}

impl DispersionModel {
    /// Model with the same damping at both edges.
    pub fn new(edges: BandEdges, line: WaveguideSpec, gamma_i: f64) -> Self {
        Self { edges, line, damping_lower: gamma_i, damping_upper: gamma_i }
    }

    /// Exact lattice dispersion of `cell` with resonator half-width `gamma_i`.
    ///
    /// A resonator conductance 2 gamma_i (Cr+Ck) damps the pole by gamma_i and
    /// the upper-edge zero by gamma_i (Cr+Ck)/Cr'.
    pub fn from_cell(cell: &CapacitiveCell, gamma_i: f64) -> Result<Self> {
        let edges = band_edges(&cell.lattice())?;
        let eff = cell.effective();
        Ok(Self {
            edges,
            line: cell.effective_line(),
            damping_lower: gamma_i,
            damping_upper: gamma_i * (cell.cr + cell.ck) / eff.xrp,
        })
    }

    pub fn lossless(&self) -> Self {
        Self { damping_lower: 0.0, damping_upper: 0.0, ..*self }
    }

    fn ratio_terms(&self, omega: f64) -> (Complex64, Complex64) {
        let w2 = omega * omega;
        let num = Complex64::new(
            self.edges.omega_c_plus.powi(2) - w2,
            2.0 * omega * self.damping_upper,
        );
        let den = Complex64::new(
            self.edges.omega_c_minus.powi(2) - w2,
            2.0 * omega * self.damping_lower,
        );
        (num, den)
    }

    /// Time of flight across one period of the loaded line, n d / c.
    fn cell_delay(&self) -> f64 {
        self.line.n * self.line.d / C_LIGHT
    }

    fn raw_k(&self, omega: f64) -> Result<(Complex64, Complex64)> {
        if !(omega > 0.0) {
            return Err(Error::Domain(format!("frequency must be positive, got {omega}")));
        }
        let (num, den) = self.ratio_terms(omega);
        if den.norm() == 0.0 {
            return Err(Error::Divergent("lossless resonator pole at the lower edge".into()));
        }
        let omega_bare = (num / den).sqrt() * omega;
        let arg = omega_bare * (0.5 * self.cell_delay());
        let k = arg.asin() * (2.0 / self.line.d);
        Ok((k, omega_bare))
    }

    /// Decaying Bloch wavenumber at `omega`.
    pub fn inverse_dispersion(&self, omega: f64) -> Result<ComplexK> {
        Ok(ComplexK::decaying(self.raw_k(omega)?.0))
    }

    /// Complex group index c dk/domega on the decaying branch.
    pub fn group_index(&self, omega: f64) -> Result<Complex64> {
        let (k, omega_bare) = self.raw_k(omega)?;
        if omega_bare.norm() == 0.0 {
            return Err(Error::Divergent("lossless band edge".into()));
        }
        let (num, den) = self.ratio_terms(omega);
        let dnum = Complex64::new(-2.0 * omega, 2.0 * self.damping_upper);
        let dden = Complex64::new(-2.0 * omega, 2.0 * self.damping_lower);
        let d_bare2 = 2.0 * omega * num / den + omega * omega * (dnum * den - num * dden) / (den * den);
        let d_bare = d_bare2 / (2.0 * omega_bare);
        let tau = self.cell_delay();
        let dk = tau / (self.line.d * (k * (0.5 * self.line.d)).cos()) * d_bare;
        let sign = if needs_flip(k) { -1.0 } else { 1.0 };
        Ok(dk * (sign * C_LIGHT))
    }
}

/// Decaying wavenumber of `model` at `omega`.
pub fn inverse_dispersion(omega: f64, model: &DispersionModel) -> Result<ComplexK> {
    model.inverse_dispersion(omega)
}

/// Leading-order wavenumber next to one edge, valid for |detuning| below
/// about a tenth of the gap.
pub fn edge_expansion(omega: f64, edge: Edge, edges: &BandEdges, line: &WaveguideSpec) -> Result<f64> {
    match edge {
        Edge::Lower => {
            let detuning = omega - edges.omega_c_minus;
            if detuning >= 0.0 {
                return Err(Error::Domain("lower-edge expansion needs omega below the edge".into()));
            }
            Ok(line.n * edges.omega_c_minus / C_LIGHT * (edges.delta / -detuning).sqrt())
        }
        Edge::Upper => {
            let detuning = omega - edges.omega_c_plus;
            if detuning < 0.0 {
                return Err(Error::Domain("upper-edge expansion needs omega above the edge".into()));
            }
            Ok(line.n * edges.omega_c_plus / C_LIGHT * (detuning / edges.delta).sqrt())
        }
    }
}

/// Leading-order complex group index next to one edge, with the detuning
/// continued to detuning - i gamma.
pub fn group_index_edge(
    omega: f64,
    edge: Edge,
    edges: &BandEdges,
    line: &WaveguideSpec,
    gamma: f64,
) -> Result<Complex64> {
    let detuning = Complex64::new(omega - edges.edge(edge), -gamma);
    if detuning.norm() == 0.0 {
        return Err(Error::Divergent("lossless group index at the band edge".into()));
    }
    Ok(match edge {
        Edge::Lower => {
            line.n * edges.omega_c_minus * edges.delta.sqrt() / (-4.0 * detuning.powi(3)).sqrt()
        }
        Edge::Upper => line.n * edges.omega_c_plus / (4.0 * edges.delta * detuning).sqrt(),
    })
}

/// Continuum or discrete-period form of the loaded-line dispersion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LineForm {
    Continuum,
    Discrete,
}

/// Wavenumber of a line loaded with resonators of port frequency `omega0`,
/// coupling rate `gamma_e` and half-width `gamma_i`.
pub fn circuit_dispersion(
    omega: f64,
    line: &WaveguideSpec,
    omega0: f64,
    gamma_e: f64,
    gamma_i: f64,
    form: LineForm,
) -> ComplexK {
    let tau = line.n * line.d / C_LIGHT;
    let resonance = Complex64::new(omega0 * omega0 - omega * omega, 2.0 * omega * gamma_i);
    match form {
        LineForm::Continuum => {
            let k0 = line.n * omega / C_LIGHT;
            let k2 = k0 * k0 * (1.0 + 2.0 * gamma_e / (tau * resonance));
            ComplexK::decaying(k2.sqrt())
        }
        LineForm::Discrete => {
            let cos_kd = 1.0 - 0.5 * (omega * tau).powi(2) - tau * gamma_e * omega * omega / resonance;
            ComplexK::decaying(cos_kd.acos() / line.d)
        }
    }
}
