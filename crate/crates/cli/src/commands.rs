use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use spopo_core::cavity::{gain_scale_for_ratio, squeezing_spectrum_for_gains, threshold_gain};
use spopo_core::metrology::{cramer_rao, improvement_curve, optimal_probe, pulse_branch};
use spopo_core::pulses::{min_variance_direct, min_variance_transcendental_branch, sigma2_limit};
use spopo_core::supermodes::schmidt_decompose;
use spopo_core::{build_kernel, duan_sum, CavityConfig, PulseCovariance, SpopoError, SupermodeBasis};

use serde_json::{json, Value};

use crate::config::{PumpStrength, ScenarioConfig};
use crate::error::CliError;
use crate::output::{Cell, Metadata, Table};

/// Supermode basis with gains at the configured pump strength.
struct Scenario {
    basis: SupermodeBasis,
    cavity: CavityConfig,
    delta0: f64,
    reconstruction_residual: f64,
}

impl Scenario {
    fn build(cfg: &ScenarioConfig) -> Result<Self, CliError> {
        let grid = cfg.grid()?;
        let pump = cfg.pump()?;
        let kernel = build_kernel(&grid, &pump, &cfg.crystal())?;
        let basis = schmidt_decompose(&kernel, cfg.run.gain_cutoff)?;
        let reconstruction_residual = basis.reconstruction_residual(&kernel);
        let cavity = cfg.cavity()?;
        let delta0 = cfg.pump.delta0;
        let basis = match cfg.strength() {
            PumpStrength::Energy(_) => basis,
            PumpStrength::Ratio(ratio) => {
                let factor = gain_scale_for_ratio(basis.max_gain(), ratio, &cavity, delta0)?;
                basis.with_scaled_gains(factor)
            }
        };
        Ok(Self {
            basis,
            cavity,
            delta0,
            reconstruction_residual,
        })
    }

    fn threshold(&self) -> Option<f64> {
        threshold_gain(&self.cavity, self.delta0).ok().map(|t| t.gain)
    }

    /// Leading gain, rejected at or above threshold.
    fn leading_gain(&self) -> Result<f64, CliError> {
        let g0 = self.basis.max_gain();
        let th = threshold_gain(&self.cavity, self.delta0)?;
        if g0 >= th.gain {
            return Err(SpopoError::AboveThreshold { gain: g0, threshold: th.gain }.into());
        }
        Ok(g0)
    }
}

fn mode_dump_header(axis: &str, count: usize) -> Vec<String> {
    let mut h = vec![axis.to_string()];
    for n in 0..count {
        h.push(format!("re_{n}"));
        h.push(format!("im_{n}"));
    }
    h
}

pub fn run_supermodes(cfg: &ScenarioConfig, out: &Path, meta: &Metadata) -> Result<Vec<PathBuf>, CliError> {
    let sc = Scenario::build(cfg)?;
    let b = &sc.basis;
    let th = sc.threshold();

    let mut gains = Table::new("gains", &["mode", "gain", "gain_over_threshold", "kept"]);
    gains.note("n_kept", b.n_kept);
    gains.note("threshold_gain", th.map_or("none".to_string(), |g| format!("{g:e}")));
    gains.note("orthonormality_error", format!("{:e}", b.orthonormality_error()));
    gains.note("reconstruction_residual", format!("{:e}", sc.reconstruction_residual));
    for (n, &g) in b.gains.iter().enumerate() {
        gains.row(&[n.into(), g.into(), th.map(|t| g / t).into(), Cell::Int((n < b.n_kept) as i64)]);
    }

    let count = cfg.run.mode_dump.min(b.n_kept);
    let mut freq = Table::with_header("modes_freq", mode_dump_header("omega", count));
    let mut time = Table::with_header("modes_time", mode_dump_header("t", count));
    for i in 0..b.grid.n_points() {
        let mut fr = vec![Cell::Float(b.grid.omega(i))];
        let mut tr = vec![Cell::Float(b.grid.time(i))];
        for n in 0..count {
            let (zf, zt) = (b.modes_freq[(i, n)], b.modes_time[(i, n)]);
            fr.extend([zf.re.into(), zf.im.into()]);
            tr.extend([zt.re.into(), zt.im.into()]);
        }
        freq.row(&fr);
        time.row(&tr);
    }
    [gains, freq, time].iter().map(|t| t.write(out, meta)).collect()
}

pub fn theta_grid(points: usize) -> Vec<f64> {
    (0..points).map(|i| -PI + 2.0 * PI * i as f64 / (points - 1) as f64).collect()
}

pub fn run_squeezing(cfg: &ScenarioConfig, out: &Path, meta: &Metadata) -> Result<Vec<PathBuf>, CliError> {
    let sc = Scenario::build(cfg)?;
    let b = &sc.basis;
    let modes = cfg.run.spectrum_modes.unwrap_or(b.n_kept).min(b.n_kept);
    let thetas = theta_grid(cfg.run.theta_points);
    let spec = squeezing_spectrum_for_gains(&b.gains[..modes], &sc.cavity, sc.delta0, &thetas)?;

    let mut table = Table::new(
        "spectrum",
        &["theta", "mode", "var_x", "var_p", "epr_variance", "gain", "single_comb_variance"],
    );
    table.note("threshold_gain", sc.threshold().map_or("none".to_string(), |g| format!("{g:e}")));
    table.note("r", sc.cavity.r);
    for m in &spec.modes {
        for p in &m.points {
            table.row(&[
                p.theta.into(),
                m.mode.into(),
                p.var_x.into(),
                p.var_p.into(),
                p.epr_variance.into(),
                m.gain.into(),
                p.single_comb_variance.into(),
            ]);
        }
    }
    Ok(vec![table.write(out, meta)?])
}

pub fn run_pulses(cfg: &ScenarioConfig, out: &Path, meta: &Metadata) -> Result<Vec<PathBuf>, CliError> {
    let sc = Scenario::build(cfg)?;
    let branch = pulse_branch(&sc.cavity, sc.delta0)?;
    let g = sc.leading_gain()?;
    let r = sc.cavity.r;

    let n_cov = cfg.run.covariance_pulses.max(1);
    let v = PulseCovariance::with_branch(g, r, n_cov, branch)?;
    let mut cov = Table::new("covariance", &["j", "k", "v_plus", "v_minus", "v_minus_normalized"]);
    cov.note("gain", format!("{g:e}"));
    cov.note("branch", format!("{branch:?}").to_lowercase());
    for j in 0..n_cov {
        for k in 0..n_cov {
            let vm = v.v_minus[(j, k)];
            cov.row(&[j.into(), k.into(), v.v_plus[(j, k)].into(), vm.into(), (vm / 0.5).into()]);
        }
    }

    let mut sig = Table::new(
        "sigma2",
        &["N", "g", "r", "sigma2_abs", "sigma2_normalized", "theta_sol", "sigma2_direct"],
    );
    sig.note("sigma2_limit", format!("{:e}", sigma2_limit(g, r)));
    for n in 1..=cfg.run.n_max {
        let t = min_variance_transcendental_branch(g, r, n, branch)?;
        let d = min_variance_direct(&PulseCovariance::with_branch(g, r, n, branch)?)?;
        sig.row(&[
            n.into(),
            g.into(),
            r.into(),
            t.sigma2.into(),
            t.sigma2_normalized().into(),
            t.theta_sol.into(),
            d.sigma2.into(),
        ]);
    }

    let dmax = cfg.run.duan_max_separation;
    let mut duan = Table::new("duan", &["separation", "duan_sum"]);
    duan.note("separable_bound", 2);
    if dmax > 0 {
        let vd = PulseCovariance::with_branch(g, r, dmax + 1, branch)?;
        for d in 1..=dmax {
            duan.row(&[d.into(), duan_sum(&vd, 0, d)?.into()]);
        }
    }
    [cov, sig, duan].iter().map(|t| t.write(out, meta)).collect()
}

pub fn run_metrology(cfg: &ScenarioConfig, out: &Path, meta: &Metadata) -> Result<Vec<PathBuf>, CliError> {
    let sc = Scenario::build(cfg)?;
    let branch = pulse_branch(&sc.cavity, sc.delta0)?;
    let g = sc.leading_gain()?;
    let r = sc.cavity.r;
    let omega0 = cfg.crystal.omega0;
    let n_bar0 = cfg.run.n_bar0;

    let curves = improvement_curve(&sc.cavity, sc.delta0, &cfg.run.ratios, cfg.run.n_max)?;
    let mut ct = Table::new("curves", &["ratio", "N", "sigma2", "improvement", "asymptote", "gain"]);
    for c in &curves {
        ct.note(
            &format!("ratio {}", c.ratio),
            format!(
                "asymptote {:e}, min_pulses_99 {}",
                c.asymptote,
                c.min_pulses.map_or("none".to_string(), |n| n.to_string())
            ),
        );
        for (i, (s, imp)) in c.sigma2.iter().zip(&c.improvement).enumerate() {
            ct.row(&[c.ratio.into(), (i + 1).into(), (*s).into(), (*imp).into(), c.asymptote.into(), c.gain.into()]);
        }
    }

    let probe = optimal_probe(&sc.basis, &sc.cavity, sc.delta0, cfg.run.probe_pulses, n_bar0, omega0, cfg.pump.t0)?;
    let mut it = Table::new("improvement", &["N", "sigma2", "fisher", "delta_tau", "delta_tau_sql", "improvement"]);
    it.note("gain", format!("{g:e}"));
    it.note("spectral_spread", format!("{:e}", probe.spectral_spread));
    for n in 1..=cfg.run.n_max {
        let s = min_variance_transcendental_branch(g, r, n, branch)?.sigma2;
        let res = cramer_rao(s, n, n_bar0, omega0, probe.spectral_spread)?;
        it.row(&[
            n.into(),
            s.into(),
            res.fisher.into(),
            res.delta_tau.into(),
            res.delta_tau_sql.into(),
            res.improvement.into(),
        ]);
    }

    let mut pt = Table::new("probe", &["pulse", "coefficient", "t", "re", "im"]);
    pt.note("alpha0", format!("{:e}", probe.alpha0));
    pt.note("total_photons", format!("{:e}", probe.total_photons()));
    let grid = &sc.basis.grid;
    for (k, period) in probe.envelope.periods.iter().enumerate() {
        for (j, z) in period.iter().enumerate() {
            let t = k as f64 * probe.envelope.t0 + grid.time(j);
            pt.row(&[k.into(), probe.coefficients[k].into(), t.into(), z.re.into(), z.im.into()]);
        }
    }
    let summary = json!({
        "config_sha256": meta.config_sha256,
        "version": env!("CARGO_PKG_VERSION"),
        "gain": g,
        "curves": curves.iter().map(|c| json!({
            "ratio": c.ratio,
            "gain": c.gain,
            "asymptote": c.asymptote,
            "min_pulses_99": c.min_pulses,
        })).collect::<Vec<_>>(),
    });
    let mut files = [ct, it, pt].iter().map(|t| t.write(out, meta)).collect::<Result<Vec<_>, _>>()?;
    files.push(write_json(out, "summary", &summary)?);
    Ok(files)
}

fn write_json(dir: &Path, name: &str, value: &Value) -> Result<PathBuf, CliError> {
    let path = dir.join(format!("{name}.json"));
    let text = serde_json::to_string_pretty(value).expect("json value serializes") + "\n";
    std::fs::write(&path, text).map_err(|e| CliError::Output {
        path: path.clone(),
        message: e.to_string(),
    })?;
    Ok(path)
}
