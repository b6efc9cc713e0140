//! Lumped-element unit cells and their derived circuit quantities.

use crate::error::{Error, Result};
use crate::units::C_LIGHT;

/// Effective line seen by the waveguide: impedance, index and period.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WaveguideSpec {
    /// Characteristic impedance (Ohm).
    pub z0: f64,
    /// Effective refractive index.
    pub n: f64,
    /// Lattice constant (m).
    pub d: f64,
}

impl WaveguideSpec {
    pub fn new(z0: f64, n: f64, d: f64) -> Result<Self> {
        for (name, v) in [("z0", z0), ("n", n), ("d", d)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self { z0, n, d })
    }

    /// Series inductance and shunt capacitance per period reproducing this line.
    pub fn per_cell_lc(&self) -> (f64, f64) {
        cell_from_spec(self)
    }
}

/// Inverts `z0 = sqrt(l0/c0)` and `c/n = d/sqrt(l0 c0)`; returns `(l0, c0)`.
pub fn cell_from_spec(spec: &WaveguideSpec) -> (f64, f64) {
    let l0 = spec.z0 * spec.n * spec.d / C_LIGHT;
    let c0 = spec.n * spec.d / (spec.z0 * C_LIGHT);
    (l0, c0)
}

/// Coupling topology of the resonator to the line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    Capacitive,
    Inductive,
}

/// Renormalized elements after eliminating the coupling element.
///
/// For the capacitive variant the three reactive values are C0', Cr', Ck';
/// for the inductive variant they are L0', Lr', Lk'.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EffectiveParams {
    pub x0p: f64,
    pub xrp: f64,
    pub xkp: f64,
    pub omega0: f64,
    pub variant: Variant,
}

/// Band parameters shared by both coupling variants.
///
/// `coupling_ratio` is g_k^2/(Omega_k omega0), which does not depend on k.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lattice {
    /// Bare-line frequency at the zone boundary, 2/sqrt(L C).
    pub band_top: f64,
    pub omega0: f64,
    pub coupling_ratio: f64,
    pub d: f64,
}

impl Lattice {
    /// Bare waveguide dispersion Omega_k; even and 2pi/d periodic.
    pub fn bare_dispersion(&self, k: f64) -> f64 {
        self.band_top * (0.5 * k * self.d).sin().abs()
    }

    /// Waveguide-resonator coupling g_k.
    pub fn coupling(&self, k: f64) -> f64 {
        (self.coupling_ratio * self.omega0 * self.bare_dispersion(k)).sqrt()
    }
}

/// Common interface of the two unit-cell variants.
pub trait UnitCell {
    fn effective(&self) -> EffectiveParams;
    fn lattice(&self) -> Lattice;
}

/// Waveguide period with a capacitively coupled resonator.
///
/// `ck = 0` is admitted and describes a decoupled resonator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CapacitiveCell {
    pub c0: f64,
    pub l0: f64,
    pub cr: f64,
    pub lr: f64,
    pub ck: f64,
    pub d: f64,
}

fn require_positive(pairs: &[(&str, f64)]) -> Result<()> {
    for &(name, v) in pairs {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Domain(format!("{name} must be positive, got {v}")));
        }
    }
    Ok(())
}

impl CapacitiveCell {
    pub fn new(c0: f64, l0: f64, cr: f64, lr: f64, ck: f64, d: f64) -> Result<Self> {
        require_positive(&[("c0", c0), ("l0", l0), ("cr", cr), ("lr", lr), ("d", d)])?;
        if !(ck >= 0.0 && ck.is_finite()) {
            return Err(Error::Domain(format!("ck must be non-negative, got {ck}")));
        }
        Ok(Self { c0, l0, cr, lr, ck, d })
    }

    /// Builds the cell whose loaded line is `spec`.
    ///
    /// `spec` fixes L0 and the loaded shunt capacitance C0' = C0 + CkCr/(Ck+Cr),
    /// so the bare C0 is what remains after the resonator's series share.
    pub fn from_line(spec: &WaveguideSpec, cr: f64, lr: f64, ck: f64) -> Result<Self> {
        let (l0, c_line) = cell_from_spec(spec);
        let c0 = c_line - series(ck, cr);
        if c0 <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "resonator loading {:.4e} F exceeds the line capacitance {:.4e} F",
                series(ck, cr),
                c_line
            )));
        }
        Self::new(c0, l0, cr, lr, ck, spec.d)
    }

    /// Designs a cell on `spec` whose gap spans `[omega_lower, omega_upper]`.
    ///
    /// `bare_fraction` is C0/C0', the share of the loaded shunt capacitance
    /// that belongs to the bare line. The lower edge is the resonator port
    /// frequency 1/sqrt(Lr(Cr+Ck)) and the upper edge is 1/sqrt(Lr Cr').
    pub fn design_for_gap(
        spec: &WaveguideSpec,
        omega_lower: f64,
        omega_upper: f64,
        bare_fraction: f64,
    ) -> Result<Self> {
        if !(omega_lower > 0.0 && omega_upper > omega_lower) {
            return Err(Error::Domain("gap edges must satisfy 0 < lower < upper".into()));
        }
        if !(bare_fraction > 0.0 && bare_fraction < 1.0) {
            return Err(Error::Domain("bare_fraction must lie in (0, 1)".into()));
        }
        let (_, c_line) = cell_from_spec(spec);
        let loading = (1.0 - bare_fraction) * c_line;
        let rho = (omega_upper / omega_lower).powi(2) - 1.0;
        let ck = loading + rho * c_line;
        let cr = loading * ck / (ck - loading);
        let lr = 1.0 / (omega_lower * omega_lower * (ck + cr));
        Self::from_line(spec, cr, lr, ck)
    }

    /// Impedance, index and period of the loaded line (uses C0').
    pub fn effective_line(&self) -> WaveguideSpec {
        let c0p = self.c0 + series(self.ck, self.cr);
        WaveguideSpec {
            z0: (self.l0 / c0p).sqrt(),
            n: C_LIGHT * (self.l0 * c0p).sqrt() / self.d,
            d: self.d,
        }
    }

    /// Copy with a different resonator inductance.
    pub fn with_lr(&self, lr: f64) -> Self {
        Self { lr, ..*self }
    }

    /// Copy with the resonator branch removed.
    pub fn decoupled(&self) -> Self {
        Self { ck: 0.0, ..*self }
    }
}

fn series(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        0.0
    } else {
        a * b / (a + b)
    }
}

impl UnitCell for CapacitiveCell {
    fn effective(&self) -> EffectiveParams {
        let CapacitiveCell { c0, cr, ck, lr, .. } = *self;
        let sum = ck * cr + ck * c0 + c0 * cr;
        let xrp = sum / (ck + c0);
        EffectiveParams {
            x0p: sum / (ck + cr),
            xrp,
            xkp: if ck > 0.0 { sum / ck } else { f64::INFINITY },
            omega0: 1.0 / (lr * xrp).sqrt(),
            variant: Variant::Capacitive,
        }
    }

    fn lattice(&self) -> Lattice {
        let eff = self.effective();
        let CapacitiveCell { c0, cr, ck, .. } = *self;
        Lattice {
            band_top: 2.0 / (self.l0 * eff.x0p).sqrt(),
            omega0: eff.omega0,
            coupling_ratio: ck * ck / (4.0 * (c0 + ck) * (cr + ck)),
            d: self.d,
        }
    }
}

/// Waveguide period with an inductively coupled resonator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InductiveCell {
    pub c0: f64,
    pub l0: f64,
    pub cr: f64,
    pub lr: f64,
    pub lk: f64,
    pub d: f64,
}

impl InductiveCell {
    pub fn new(c0: f64, l0: f64, cr: f64, lr: f64, lk: f64, d: f64) -> Result<Self> {
        require_positive(&[("c0", c0), ("l0", l0), ("cr", cr), ("lr", lr), ("lk", lk), ("d", d)])?;
        Ok(Self { c0, l0, cr, lr, lk, d })
    }
}

impl UnitCell for InductiveCell {
    fn effective(&self) -> EffectiveParams {
        let InductiveCell { l0, lr, lk, cr, .. } = *self;
        let sum = lk * lr + lk * l0 + l0 * lr;
        let xrp = sum / (lk + l0);
        EffectiveParams {
            x0p: sum / (lk + lr),
            xrp,
            xkp: sum / lk,
            omega0: 1.0 / (cr * xrp).sqrt(),
            variant: Variant::Inductive,
        }
    }

    fn lattice(&self) -> Lattice {
        let eff = self.effective();
        Lattice {
            band_top: 2.0 / (self.c0 * eff.x0p).sqrt(),
            omega0: eff.omega0,
            coupling_ratio: eff.x0p * eff.xrp / (4.0 * eff.xkp * eff.xkp),
            d: self.d,
        }
    }
}

/// Renormalized elements of either variant.
pub fn derive_effective(cell: &impl UnitCell) -> EffectiveParams {
    cell.effective()
}

/// Resonance seen from the line and the external coupling rate of one resonator.
///
/// Returns `(omega0, gamma_e)` with omega0 = 1/sqrt(Lr(Cr+Ck)) and
/// gamma_e = (Z0/2Lr)(Ck/(Cr+Ck))^2.
pub fn resonator_port_params(cell: &CapacitiveCell, spec: &WaveguideSpec) -> (f64, f64) {
    let c_sum = cell.cr + cell.ck;
    let omega0 = 1.0 / (cell.lr * c_sum).sqrt();
    let gamma_e = spec.z0 / (2.0 * cell.lr) * (cell.ck / c_sum).powi(2);
    (omega0, gamma_e)
}

/// Line of the fabricated device: 50 Ohm, index 2.54, 350 um period.
pub fn reference_line() -> WaveguideSpec {
    WaveguideSpec { z0: 50.0, n: 2.54, d: 350e-6 }
}

/// Share of the loaded shunt capacitance assigned to the bare line in the
/// reference device.
pub const PAPER_BARE_FRACTION: f64 = 0.5;

/// Reference device: gap 4.92-6.74 GHz on [`reference_line`].
pub fn reference_cell() -> CapacitiveCell {
    use crate::units::ghz_to_omega;
    CapacitiveCell::design_for_gap(
        &reference_line(),
        ghz_to_omega(4.92),
        ghz_to_omega(6.74),
        PAPER_BARE_FRACTION,
    )
    .expect("reference design is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{ghz_to_omega, omega_to_ghz};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    const FF: f64 = 1e-15;

    fn test_cell() -> CapacitiveCell {
        CapacitiveCell::new(60.0 * FF, 150e-12, 300.0 * FF, 2e-9, 20.0 * FF, 350e-6).unwrap()
    }

    #[test]
    fn vanishing_coupling_decouples() {
        let cell = CapacitiveCell::new(100.0 * FF, 1e-10, 100.0 * FF, 1e-9, 1e-24, 1e-4).unwrap();
        let eff = cell.effective();
        assert_relative_eq!(eff.x0p, cell.c0, max_relative = 1e-9);
        assert_relative_eq!(eff.xrp, cell.cr, max_relative = 1e-9);
        assert!(eff.xkp >= 1e10 * cell.c0);
    }

    #[test]
    fn symmetric_capacitances() {
        let c = 50.0 * FF;
        let eff = CapacitiveCell::new(c, 1e-10, c, 1e-9, c, 1e-4).unwrap().effective();
        assert_relative_eq!(eff.x0p, 1.5 * c, max_relative = 1e-14);
        assert_relative_eq!(eff.xrp, 1.5 * c, max_relative = 1e-14);
        assert_relative_eq!(eff.xkp, 3.0 * c, max_relative = 1e-14);
    }

    #[test]
    fn omega0_matches_definition() {
        let cell = test_cell();
        let eff = cell.effective();
        assert_relative_eq!(eff.omega0, 1.0 / (cell.lr * eff.xrp).sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn coupling_identity() {
        let cell = test_cell();
        let eff = cell.effective();
        let lhs = eff.xkp * cell.ck;
        let rhs = cell.ck * cell.cr + cell.ck * cell.c0 + cell.c0 * cell.cr;
        assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
    }

    #[test]
    fn inductive_duality() {
        let cap = test_cell();
        let ind = InductiveCell::new(cap.l0, cap.c0, cap.lr, cap.cr, cap.ck, cap.d).unwrap();
        let (a, b) = (cap.effective(), ind.effective());
        assert_relative_eq!(a.x0p, b.x0p, max_relative = 1e-14);
        assert_relative_eq!(a.xrp, b.xrp, max_relative = 1e-14);
        assert_relative_eq!(a.xkp, b.xkp, max_relative = 1e-14);
        assert_relative_eq!(a.omega0, b.omega0, max_relative = 1e-14);
        assert_eq!(b.variant, Variant::Inductive);
    }

    #[test]
    fn inductive_coupling_formula() {
        let ind = InductiveCell::new(60.0 * FF, 150e-12, 400.0 * FF, 1.5e-9, 0.1e-9, 350e-6).unwrap();
        let eff = ind.effective();
        let lat = ind.lattice();
        let k = 0.37 * PI / ind.d;
        let omega_k = lat.bare_dispersion(k);
        let g = (eff.x0p * eff.xrp).sqrt() / (2.0 * eff.xkp) * (eff.omega0 * omega_k).sqrt();
        assert_relative_eq!(lat.coupling(k), g, max_relative = 1e-13);
        let expected = 2.0 * (0.5 * k * ind.d).sin() / (ind.c0 * eff.x0p).sqrt();
        assert_relative_eq!(omega_k, expected, max_relative = 1e-14);
    }

    #[test]
    fn bare_dispersion_landmarks() {
        let cell = test_cell();
        let lat = cell.lattice();
        let eff = cell.effective();
        assert_eq!(lat.bare_dispersion(0.0), 0.0);
        assert_relative_eq!(
            lat.bare_dispersion(PI / cell.d),
            2.0 / (cell.l0 * eff.x0p).sqrt(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn small_k_slope_is_line_velocity() {
        let spec = reference_line();
        let cell = reference_cell();
        let lat = cell.lattice();
        // Forward difference from the zone centre.
        let k = 1e-3 * PI / spec.d;
        let slope = (lat.bare_dispersion(k) - lat.bare_dispersion(0.0)) / k;
        assert_relative_eq!(slope, C_LIGHT / spec.n, max_relative = 1e-6);
    }

    #[test]
    fn coupling_ratio_is_k_independent() {
        let cell = test_cell();
        let lat = cell.lattice();
        let ratios: Vec<f64> = (1..=100)
            .map(|j| {
                let k = j as f64 * 0.0314 / cell.d;
                lat.coupling(k).powi(2) / (lat.bare_dispersion(k) * lat.omega0)
            })
            .collect();
        for r in &ratios {
            assert_relative_eq!(*r, ratios[0], max_relative = 1e-12);
        }
        assert_eq!(lat.coupling(0.0), 0.0);
        assert_eq!(cell.decoupled().lattice().coupling(1.0 / cell.d), 0.0);
    }

    #[test]
    fn coupling_matches_element_form() {
        let cell = test_cell();
        let lat = cell.lattice();
        let eff = cell.effective();
        let k = 0.8 / cell.d;
        let omega_k = lat.bare_dispersion(k);
        let g = cell.ck * (eff.omega0 * omega_k).sqrt()
            / (2.0 * ((cell.c0 + cell.ck) * (cell.cr + cell.ck)).sqrt());
        assert_relative_eq!(lat.coupling(k), g, max_relative = 1e-13);
        let g_prime = (eff.x0p * eff.xrp).sqrt() / (2.0 * eff.xkp) * (eff.omega0 * omega_k).sqrt();
        assert_relative_eq!(lat.coupling(k), g_prime, max_relative = 1e-13);
    }

    #[test]
    fn port_params_limits() {
        let spec = reference_line();
        let cell = test_cell().decoupled();
        let (w0, ge) = resonator_port_params(&cell, &spec);
        assert_eq!(ge, 0.0);
        assert_relative_eq!(w0, 1.0 / (cell.lr * cell.cr).sqrt(), max_relative = 1e-14);
        let cell = test_cell();
        let doubled = WaveguideSpec { z0: 2.0 * spec.z0, ..spec };
        let (_, ge1) = resonator_port_params(&cell, &spec);
        let (_, ge2) = resonator_port_params(&cell, &doubled);
        assert_eq!(ge2, 2.0 * ge1);
    }

    #[test]
    fn gamma_e_grows_with_ck_at_fixed_port_frequency() {
        let spec = reference_line();
        let total = 300.0 * FF;
        let mut last = 0.0;
        for j in 1..20 {
            let ck = j as f64 * 10.0 * FF;
            let cell = CapacitiveCell::new(60.0 * FF, 150e-12, total - ck, 2e-9, ck, 350e-6).unwrap();
            let (_, ge) = resonator_port_params(&cell, &spec);
            assert!(ge > last);
            last = ge;
        }
    }

    #[test]
    fn spec_inversion_examples() {
        let (l0, c0) = cell_from_spec(&reference_line());
        assert!((l0 * 1e12 - 148.2).abs() < 0.1, "L0 = {} pH", l0 * 1e12);
        assert!((c0 * 1e15 - 59.3).abs() < 0.05, "C0 = {} fF", c0 * 1e15);
        let unit = WaveguideSpec { z0: 1.0, n: 1.0, d: C_LIGHT };
        let (l0, c0) = cell_from_spec(&unit);
        assert_relative_eq!(l0, 1.0, max_relative = 1e-15);
        assert_relative_eq!(c0, 1.0, max_relative = 1e-15);
        let spec = reference_line();
        let (l0, c0) = cell_from_spec(&spec);
        assert_relative_eq!((l0 / c0).sqrt(), spec.z0, max_relative = 1e-12);
        assert_relative_eq!(spec.d / (l0 * c0).sqrt(), C_LIGHT / spec.n, max_relative = 1e-12);
    }

    #[test]
    fn from_line_round_trips_effective_line() {
        let spec = reference_line();
        let cell = CapacitiveCell::from_line(&spec, 40.0 * FF, 8e-9, 70.0 * FF).unwrap();
        let back = cell.effective_line();
        assert_relative_eq!(back.z0, spec.z0, max_relative = 1e-12);
        assert_relative_eq!(back.n, spec.n, max_relative = 1e-12);
        assert!(CapacitiveCell::from_line(&spec, 400.0 * FF, 8e-9, 400.0 * FF).is_err());
    }

    #[test]
    fn reference_design_hits_gap() {
        let cell = reference_cell();
        let eff = cell.effective();
        assert!((omega_to_ghz(eff.omega0) - 6.74).abs() < 1e-9);
        let (w_port, _) = resonator_port_params(&cell, &reference_line());
        assert!((omega_to_ghz(w_port) - 4.92).abs() < 1e-9);
        assert_relative_eq!(cell.c0 / eff.x0p, PAPER_BARE_FRACTION, max_relative = 1e-12);
        assert!(ghz_to_omega(6.74) > w_port);
    }

    #[test]
    fn rejects_non_positive_elements() {
        assert!(CapacitiveCell::new(0.0, 1.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(CapacitiveCell::new(1.0, 1.0, 1.0, 1.0, -1.0, 1.0).is_err());
        assert!(InductiveCell::new(1.0, 1.0, 1.0, 1.0, 0.0, 1.0).is_err());
        assert!(WaveguideSpec::new(50.0, 0.0, 1.0).is_err());
    }
}
