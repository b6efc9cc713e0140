//! The command implementations behind the CLI. Each writes its CSV or TOML
//! outputs and a JSON manifest into the configured output directory.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::bands::{band_edges, exact_bands, BandEdges};
use crate::circuit::UnitCell;
use crate::config::{Device, RunConfig};
use crate::disorder::{monte_carlo_localization, profile_grid};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fit::{fit_fano, fit_lumped_model, CascadeLayout, LumpedFit};
use crate::io::{read_trace, write_atomic, write_table, write_trace_csv, Table};
use crate::manifest::{digest_file, sha256_hex, RunManifest};
use crate::qubit::{calibrate_cg, predict, CascadeEnv, QubitPrediction};
use crate::transmission::{simulate_s21, trace_band_gap, FiniteWaveguide};
use crate::units::{omega_to_ghz, omega_to_mhz, FEMTO, MICRO, PICO};

/// Parsed configuration plus the files it came from.
#[derive(Clone, Debug)]
pub struct RunContext {
    pub config: RunConfig,
    /// Files whose digests go into the manifest.
    pub inputs: Vec<PathBuf>,
    pub exec: Execution,
}

impl RunContext {
    pub fn new(config: RunConfig) -> Self {
        Self { config, inputs: Vec::new(), exec: Execution::Auto }
    }

    fn out_dir(&self) -> Result<&Path> {
        let dir = self.config.output_dir.as_path();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(dir)
    }

    fn manifest(&self, command: &str, extra_inputs: &[&Path]) -> Result<RunManifest> {
        let mut m = RunManifest::start(command, &self.config.hash(), self.config.seed);
        for path in self.inputs.iter().map(PathBuf::as_path).chain(extra_inputs.iter().copied()) {
            m.inputs.push(digest_file(path)?);
        }
        Ok(m)
    }
}

/// Files written by a command and a short human-readable summary.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Outputs {
    pub files: Vec<PathBuf>,
    pub summary: Vec<String>,
}

fn gap_of(device: &Device) -> Result<BandEdges> {
    let edges = band_edges(&device.cell.lattice())?;
    if !(edges.delta > 0.0) {
        return Err(Error::Config("the configured device has no band gap".into()));
    }
    Ok(edges)
}

fn edge_footer(edges: &BandEdges) -> Vec<String> {
    vec![
        format!("lower_edge_ghz = {}", omega_to_ghz(edges.omega_c_minus)),
        format!("upper_edge_ghz = {}", omega_to_ghz(edges.omega_c_plus)),
        format!("midgap_ghz = {}", omega_to_ghz(edges.omega_mid)),
        format!("span_ghz = {}", omega_to_ghz(edges.delta)),
    ]
}

fn finish(ctx: &RunContext, mut manifest: RunManifest, mut outputs: Outputs) -> Result<Outputs> {
    manifest.outputs = outputs.files.clone();
    outputs.files.push(manifest.finish(ctx.out_dir()?)?);
    Ok(outputs)
}

/// Exact bands on a k grid over [0, pi/d]:
/// `k_over_pi_d,omega_plus_ghz,omega_minus_ghz,omega_bare_ghz`, band edges in the footer.
pub fn cmd_dispersion(ctx: &RunContext) -> Result<Outputs> {
    let device = ctx.config.device()?;
    let n = ctx.config.k_points()?;
    let manifest = ctx.manifest("dispersion", &[])?;
    let lattice = device.cell.lattice();
    let edges = band_edges(&lattice)?;
    let mut table = Table::new(&["k_over_pi_d", "omega_plus_ghz", "omega_minus_ghz", "omega_bare_ghz"]);
    for j in 0..n {
        let x = j as f64 / (n - 1) as f64;
        let k = x * std::f64::consts::PI / device.cell.d;
        let (plus, minus) = exact_bands(k, &lattice)?;
        table.push(vec![x, omega_to_ghz(plus), omega_to_ghz(minus), omega_to_ghz(lattice.bare_dispersion(k))]);
    }
    table.footer = edge_footer(&edges);
    let path = ctx.out_dir()?.join("dispersion.csv");
    write_table(&path, &table, &manifest.config_hash)?;
    let outputs = Outputs { files: vec![path], summary: table.footer.clone() };
    finish(ctx, manifest, outputs)
}

#[derive(Serialize)]
struct LumpedReport {
    c0_ff: f64,
    l0_ph: f64,
    cr_ff: f64,
    lr_ph: f64,
    ck_ff: f64,
    gamma_i_mhz: f64,
    scale: f64,
    residual_db: f64,
    lower_edge_ghz: f64,
    upper_edge_ghz: f64,
    midgap_ghz: f64,
    span_ghz: f64,
}

/// Simulated S-parameters of the configured cascade (`transmission.csv`).
///
/// With `data`, the trace is also re-emitted as `data.csv` and a lumped
/// model is fitted to it (`lumped_fit.toml`, edges in the data's frequency
/// frame). A lossless device starts the fit at Q_i = 1e4.
pub fn cmd_transmission(ctx: &RunContext, data: Option<&Path>) -> Result<Outputs> {
    let device = ctx.config.device()?;
    let freqs = ctx.config.transmission_grid()?;
    let t = &ctx.config.transmission;
    let data_trace = data.map(read_trace).transpose()?;
    let manifest = ctx.manifest("transmission", data.as_slice())?;
    let dir = ctx.out_dir()?;
    let wg = FiniteWaveguide::uniform(device.cell, t.n_cells, device.gamma_i, t.port_in_ohm, t.port_out_ohm)?;
    let trace = simulate_s21(&wg, &freqs, ctx.exec)?;
    let mut table = write_trace_csv(&trace);
    let mut summary = Vec::new();
    if let Some((lo, hi)) = trace_band_gap(&trace) {
        summary.push(format!("simulated_gap_ghz = {} {}", lo / 1e9, hi / 1e9));
    }
    let deepest = (0..trace.len()).min_by(|&a, &b| trace.s21[a].norm().total_cmp(&trace.s21[b].norm())).unwrap_or(0);
    summary.push(format!("min_s21_ghz = {}", trace.freq[deepest] / 1e9));
    table.footer = summary.clone();
    let path = dir.join("transmission.csv");
    write_table(&path, &table, &manifest.config_hash)?;
    let mut files = vec![path];

    if let Some(measured) = data_trace {
        let copy = dir.join("data.csv");
        write_table(&copy, &write_trace_csv(&measured), &manifest.config_hash)?;
        files.push(copy);
        let layout = CascadeLayout { n_cells: t.n_cells, port_in: t.port_in_ohm, port_out: t.port_out_ohm };
        let gamma0 = if device.gamma_i > 0.0 { device.gamma_i } else { device.cell.lattice().omega0 / 1e4 };
        let fit = fit_lumped_model(&measured, &LumpedFit::new(device.cell, gamma0, t.fit_scale), &layout)?;
        let edges = band_edges(&fit.cell.lattice())?;
        let report = LumpedReport {
            c0_ff: fit.cell.c0 / FEMTO,
            l0_ph: fit.cell.l0 / PICO,
            cr_ff: fit.cell.cr / FEMTO,
            lr_ph: fit.cell.lr / PICO,
            ck_ff: fit.cell.ck / FEMTO,
            gamma_i_mhz: omega_to_mhz(fit.gamma_i),
            scale: fit.scale,
            residual_db: fit.residual,
            lower_edge_ghz: omega_to_ghz(edges.omega_c_minus * fit.scale),
            upper_edge_ghz: omega_to_ghz(edges.omega_c_plus * fit.scale),
            midgap_ghz: omega_to_ghz(edges.omega_mid * fit.scale),
            span_ghz: omega_to_ghz(edges.delta * fit.scale),
        };
        summary.push(format!("fit residual_db = {:.3e}, midgap_ghz = {:.4}", report.residual_db, report.midgap_ghz));
        let path = dir.join("lumped_fit.toml");
        write_report(&path, &report, &manifest.config_hash)?;
        files.push(path);
    }
    finish(ctx, manifest, Outputs { files, summary })
}

fn write_report(path: &Path, report: &impl Serialize, hash: &str) -> Result<()> {
    let body = toml::to_string(report).map_err(|e| Error::Numerical(e.to_string()))?;
    write_atomic(path, format!("# manifest: {hash}\n{body}").as_bytes())
}

/// Monte Carlo localization profile over the gap with half-gap margins
/// (`localization.csv`). Lengths are in cells; `inf` marks an unattenuated
/// wave. `stderr` is the standard error of 1/ell_total per cell.
pub fn cmd_localization(ctx: &RunContext) -> Result<Outputs> {
    let device = ctx.config.device()?;
    let (disorder, grid_points) = ctx.config.disorder()?;
    let edges = gap_of(&device)?;
    let manifest = ctx.manifest("localization", &[])?;
    let grid = profile_grid(&device.cell, grid_points)?;
    let profile = monte_carlo_localization(&device.cell, &disorder, &grid, device.gamma_i, ctx.exec)?;
    let mut table = Table::new(&[
        "freq_ghz",
        "ell_disorder_cells",
        "ell_loss_cells",
        "ell_total_cells",
        "stderr",
        "ell_joint_cells",
        "stderr_joint",
    ]);
    for i in 0..profile.freq.len() {
        table.push(vec![
            omega_to_ghz(profile.freq[i]),
            profile.ell_disorder[i],
            profile.ell_loss[i],
            profile.ell_total[i],
            profile.stderr[i],
            profile.ell_joint[i],
            profile.stderr_joint[i],
        ]);
    }
    let nearest = |target: f64, above: bool| {
        (0..grid.len())
            .filter(|&i| if above { grid[i] > target } else { grid[i] < target })
            .min_by(|&a, &b| (grid[a] - target).abs().total_cmp(&(grid[b] - target).abs()))
    };
    let mut footer = edge_footer(&edges);
    if let (Some(lo), Some(hi)) = (nearest(edges.omega_c_minus, false), nearest(edges.omega_c_plus, true)) {
        footer.push(format!("ell_total_below_lower_edge_cells = {}", profile.ell_total[lo]));
        footer.push(format!("ell_total_above_upper_edge_cells = {}", profile.ell_total[hi]));
    }
    table.footer = footer.clone();
    let path = ctx.out_dir()?.join("localization.csv");
    write_table(&path, &table, &manifest.config_hash)?;
    finish(ctx, manifest, Outputs { files: vec![path], summary: footer })
}

/// Flux sweep of the Lamb shift and lifetimes (`qubit_sweep.csv`).
///
/// `lamb_shift_mhz` is the anomalous shift referenced to the qubit tuned to
/// mid-gap (unreferenced if it cannot reach mid-gap). `kappa_mhz` is
/// kappa/2pi. Rows the transmon model cannot evaluate are written as NaN and
/// counted in the footer.
pub fn cmd_qubit_sweep(ctx: &RunContext) -> Result<Outputs> {
    let device = ctx.config.device()?;
    let setup = ctx.config.qubit()?;
    let fluxes = ctx.config.flux_grid()?;
    let edges = gap_of(&device)?;
    let manifest = ctx.manifest("qubit-sweep", &[])?;
    let env = CascadeEnv::new(device.cell, setup.n_cells, device.gamma_i, setup.r_load)?;
    let mut params = setup.params;
    if let Some(target) = setup.calibrate_target {
        params = params.with_cg(calibrate_cg(&params, &env, &edges, target)?);
    }
    let reference = params.tuned_to(edges.omega_mid).ok().map(|_| edges.omega_mid);
    let rows: Vec<Option<QubitPrediction>> =
        ctx.exec.map(&fluxes, |&flux| predict(&params.with_flux(flux), &env, setup.t_int, reference).ok());
    let mut table = Table::new(&[
        "flux",
        "freq_ghz",
        "lamb_shift_mhz",
        "kappa_mhz",
        "t_rad_us",
        "t1_us",
        "lamb_raw_mhz",
        "lamb_anomalous_mhz",
    ]);
    let mut flagged = 0;
    for (&flux, row) in fluxes.iter().zip(&rows) {
        match row {
            Some(p) => table.push(vec![
                flux,
                omega_to_ghz(p.omega_q_bare),
                omega_to_mhz(p.lamb_referenced.unwrap_or(p.lamb_shift.anomalous)),
                omega_to_mhz(p.kappa),
                p.t_rad / MICRO,
                p.t1_total / MICRO,
                omega_to_mhz(p.lamb_shift.raw),
                omega_to_mhz(p.lamb_shift.anomalous),
            ]),
            None => {
                flagged += 1;
                let mut nan = vec![f64::NAN; 8];
                nan[0] = flux;
                table.push(nan);
            }
        }
    }
    let mut footer = edge_footer(&edges);
    footer.push(format!("cg_ff = {}", params.cg / FEMTO));
    footer.push(match reference {
        Some(w) => format!("lamb_reference_ghz = {}", omega_to_ghz(w)),
        None => "lamb_reference_ghz = none".into(),
    });
    footer.push(format!("flagged_rows = {flagged}"));
    table.footer = footer.clone();
    let path = ctx.out_dir()?.join("qubit_sweep.csv");
    write_table(&path, &table, &manifest.config_hash)?;
    finish(ctx, manifest, Outputs { files: vec![path], summary: footer })
}

#[derive(Serialize)]
struct FanoReport {
    window_ghz: [f64; 2],
    f0_ghz: f64,
    gamma_i_mhz: f64,
    gamma_e_mhz: f64,
    q_internal: f64,
    q_external: f64,
    phi0_rad: f64,
    residual: f64,
}

/// Fano fit of one resonance inside `window_ghz` of the trace in `data`
/// (`fano_fit.toml`). Needs no device section.
pub fn cmd_fano(ctx: &RunContext, data: &Path, window_ghz: (f64, f64)) -> Result<Outputs> {
    if !(window_ghz.0 > 0.0 && window_ghz.1 > window_ghz.0) {
        return Err(Error::Config(format!("invalid Fano window {}:{} GHz", window_ghz.0, window_ghz.1)));
    }
    let trace = read_trace(data)?;
    let mut manifest = ctx.manifest("fano", &[data])?;
    let fit = fit_fano(&trace, (window_ghz.0 * 1e9, window_ghz.1 * 1e9), None)?;
    let report = FanoReport {
        window_ghz: [window_ghz.0, window_ghz.1],
        f0_ghz: omega_to_ghz(fit.omega0),
        gamma_i_mhz: omega_to_mhz(fit.gamma_i),
        gamma_e_mhz: omega_to_mhz(fit.gamma_e),
        q_internal: fit.q_internal(),
        q_external: fit.q_external(),
        phi0_rad: fit.phi0,
        residual: fit.residual,
    };
    // The window is a command argument, so it enters the hash alongside the config.
    manifest.config_hash = sha256_hex(format!("{}:{:?}", manifest.config_hash, window_ghz).as_bytes());
    let path = ctx.out_dir()?.join("fano_fit.toml");
    write_report(&path, &report, &manifest.config_hash)?;
    let summary = vec![format!("f0_ghz = {}, q_internal = {:.4e}, q_external = {:.4e}", report.f0_ghz, report.q_internal, report.q_external)];
    finish(ctx, manifest, Outputs { files: vec![path], summary })
}
