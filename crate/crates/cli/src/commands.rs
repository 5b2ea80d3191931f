//! Subcommand implementations: run the solvers and emit CSV artifacts.
//!
//! Every output file carries the full resolved configuration in `#`
//! comment lines, so an artifact is enough to re-run its experiment.
//! Bodies are written with LF endings and shortest-roundtrip float
//! formatting; re-running any subcommand with the same config produces
//! byte-identical files regardless of the worker pool.

use crate::config::{ExperimentConfig, OracleKind, Scan};
use crit_core::criticality::{self, MixtureFamily, PercolationVerdict};
use crit_core::error::Error as CoreError;
use crit_core::survival::ChiOutcome;
use crit_core::{dynamics, fixedpoint, oracles, survival};
use std::fmt::Write as _;
use std::path::Path;

/// Failure modes mapped to process exit codes (2: validation, 3:
/// numerical non-convergence).
#[derive(Debug)]
pub enum CmdError {
    Validation(String),
    NonConvergence(String),
    Io(String),
}

impl CmdError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CmdError::Validation(_) => 2,
            CmdError::NonConvergence(_) => 3,
            CmdError::Io(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CmdError::Validation(m) | CmdError::NonConvergence(m) | CmdError::Io(m) => m,
        }
    }
}

impl From<CoreError> for CmdError {
    fn from(e: CoreError) -> CmdError {
        match e {
            CoreError::NonConvergence { .. } => CmdError::NonConvergence(e.to_string()),
            other => CmdError::Validation(other.to_string()),
        }
    }
}

pub type CmdResult = Result<(), CmdError>;

struct Csv {
    buf: String,
}

impl Csv {
    fn new(tool: &str, cfg: &ExperimentConfig) -> Csv {
        let mut buf = String::new();
        let _ = writeln!(buf, "# crit-avalanche {tool}");
        for line in cfg.header_lines() {
            let _ = writeln!(buf, "{line}");
        }
        Csv { buf }
    }

    fn comment(&mut self, s: &str) {
        let _ = writeln!(self.buf, "# {s}");
    }

    fn line(&mut self, s: &str) {
        let _ = writeln!(self.buf, "{s}");
    }

    fn write(self, out_dir: &Path, name: &str) -> CmdResult {
        std::fs::create_dir_all(out_dir)
            .map_err(|e| CmdError::Io(format!("creating {}: {e}", out_dir.display())))?;
        let path = out_dir.join(name);
        std::fs::write(&path, self.buf)
            .map_err(|e| CmdError::Io(format!("writing {}: {e}", path.display())))
    }
}

fn f(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x}")
    }
}

/// `simulate`: Monte Carlo tail table plus the chi/survival summary row.
pub fn simulate(cfg: &ExperimentConfig, out: &Path) -> CmdResult {
    let w = cfg.workers();
    let tail = dynamics::mc_tail(
        &cfg.measure,
        cfg.b,
        cfg.v,
        cfg.samples,
        cfg.depth_cap,
        cfg.seed,
        w,
        cfg.tail_n_max,
    )?;
    let mut csv = Csv::new("simulate", cfg);
    csv.line("n,p_ge_n,stderr");
    for (i, (p, se)) in tail.p_ge.iter().zip(&tail.stderr).enumerate() {
        csv.line(&format!("{},{},{}", i + 1, f(*p), f(*se)));
    }
    csv.comment(&format!(
        "truncated_fraction = {}, lower_bound = {}",
        f(tail.truncated_fraction),
        tail.lower_bound
    ));
    csv.write(out, "tail.csv")?;

    let r = dynamics::mc_chi_and_survival(
        &cfg.measure,
        cfg.b,
        cfg.v,
        cfg.samples,
        cfg.depth_cap,
        cfg.chi_size_cap,
        cfg.seed,
        w,
    )?;
    let mut csv = Csv::new("simulate", cfg);
    csv.line("mean_size,stderr,trunc_frac,survival,survival_stderr");
    csv.line(&format!(
        "{},{},{},{},{}",
        f(r.mean_size),
        f(r.stderr),
        f(r.truncated_fraction),
        f(r.survival),
        f(r.survival_stderr)
    ));
    if r.truncated_fraction > 0.0 {
        csv.comment("truncation occurred: mean_size is a lower bound");
    }
    csv.write(out, "summary.csv")
}

/// `zeta`: the Z_n table at theta = 1 and theta_b with consecutive ratios.
pub fn zeta(cfg: &ExperimentConfig, out: &Path) -> CmdResult {
    let r = survival::z_of_rho(&cfg.measure, cfg.b, cfg.nodes, cfg.zeta_tol, cfg.zeta_iter_cap)?;
    let mut csv = Csv::new("zeta", cfg);
    csv.line("n,Z_theta1,Z_thetab,ratio1,ratio2");
    let t = &r.trace;
    for i in 0..t.z_at_1.len() {
        let (r1, r2) = if i == 0 {
            (String::new(), String::new())
        } else {
            (
                f(t.z_at_1[i] / t.z_at_1[i - 1]),
                f(t.z_at_top[i] / t.z_at_top[i - 1]),
            )
        };
        csv.line(&format!("{},{},{},{},{}", i, f(t.z_at_1[i]), f(t.z_at_top[i]), r1, r2));
    }
    csv.comment(&format!(
        "z = {}, half_width = {}, bracket = [{}, {}], iterations = {}, converged = {}",
        f(r.z),
        f(r.half_width),
        f(r.bracket.0),
        f(r.bracket.1),
        r.iterations,
        r.converged
    ));
    csv.write(out, "zeta.csv")?;
    if !r.converged {
        return Err(CmdError::NonConvergence(format!(
            "zeta ratios not Cauchy after {} iterations (spread {})",
            r.iterations,
            f(2.0 * r.half_width)
        )));
    }
    Ok(())
}

/// `psi`: the limit profile psi(theta) on [1, theta_max].
pub fn psi(cfg: &ExperimentConfig, out: &Path) -> CmdResult {
    let s = cfg.measure.summary(cfg.b)?;
    let theta_max = survival::theta_max_for(&s, cfg.v);
    let prof = survival::psi(&cfg.measure, cfg.b, theta_max, cfg.nodes, cfg.fp_tol.max(1e-13))?;
    let mut csv = Csv::new("psi", cfg);
    csv.line("theta,psi");
    let g = prof.grid();
    for i in 0..g.len() {
        csv.line(&format!("{},{}", f(g.node(i)), f(g.values()[i])));
    }
    csv.comment(&format!(
        "z = {}, factors = {}, converged = {}",
        f(prof.z),
        prof.factors,
        prof.converged
    ));
    csv.write(out, "psi.csv")?;
    if !prof.converged {
        return Err(CmdError::NonConvergence(
            "psi product did not settle within 500 factors".into(),
        ));
    }
    Ok(())
}

/// `psi-v`: the threshold-CDF iterates Psi_n and the phase verdict.
pub fn psi_v(cfg: &ExperimentConfig, out: &Path) -> CmdResult {
    let seq = fixedpoint::psi_sequence(
        &cfg.measure,
        cfg.b,
        cfg.psi_theta_max,
        cfg.nodes,
        cfg.psi_n_max,
        cfg.psi_eps,
    )?;
    let mut csv = Csv::new("psi-v", cfg);
    csv.line("n,theta,psi_n");
    for (n, it) in seq.iterates.iter().enumerate() {
        for i in 0..it.len() {
            csv.line(&format!("{},{},{}", n, f(it.node(i)), f(it.values()[i])));
        }
    }
    csv.comment(&format!(
        "verdict = {:?}, threshold = {}, iterations = {}",
        seq.verdict,
        seq.threshold.map_or("none".into(), f),
        seq.iterations
    ));
    csv.write(out, "psi_v.csv")
}

/// `qinf`: the stationary conditioned path-value law.
pub fn qinf(cfg: &ExperimentConfig, out: &Path) -> CmdResult {
    let q = fixedpoint::q_infinity_from(
        &cfg.measure,
        cfg.b,
        cfg.nodes,
        cfg.fp_tol,
        cfg.fp_iter_cap,
        cfg.theta,
    )?;
    let mut csv = Csv::new("qinf", cfg);
    csv.line("q,density");
    let g = &q.density;
    for i in 0..g.len() {
        csv.line(&format!("{},{}", f(g.node(i)), f(g.values()[i])));
    }
    csv.comment(&format!(
        "z_hat = {}, residual = {}, iterations = {}",
        f(q.z_hat),
        f(q.residual),
        q.iterations
    ));
    csv.write(out, "qinf.csv")
}

/// `binf`: the external-field profile B(theta, lambda).
pub fn binf(cfg: &ExperimentConfig, out: &Path) -> CmdResult {
    let bp = fixedpoint::b_infinity(
        &cfg.measure,
        cfg.b,
        cfg.lambda,
        cfg.psi_theta_max,
        cfg.nodes,
        cfg.fp_tol,
        cfg.fp_iter_cap,
    )?;
    let mut csv = Csv::new("binf", cfg);
    csv.line("theta,B");
    let g = bp.grid();
    for i in 0..g.len() {
        csv.line(&format!("{},{}", f(g.node(i)), f(g.values()[i])));
    }
    csv.comment(&format!(
        "lambda = {}, residual = {}, iterations = {}",
        f(bp.lambda),
        f(bp.residual),
        bp.iterations
    ));
    csv.write(out, "binf.csv")
}

/// `chi`: the expected avalanche size by quadrature (inf when divergent).
pub fn chi(cfg: &ExperimentConfig, out: &Path) -> CmdResult {
    let r = survival::chi_quadrature(&cfg.measure, cfg.b, cfg.v, cfg.nodes, cfg.chi_tol)?;
    let mut csv = Csv::new("chi", cfg);
    csv.line("chi,z,terms");
    match r {
        ChiOutcome::Finite { chi, z, terms } => {
            csv.line(&format!("{},{},{}", f(chi), f(z), terms));
        }
        ChiOutcome::Divergent { z } => {
            csv.line(&format!("inf,{},0", f(z)));
            csv.comment("series diverges: z >= 1/b");
        }
    }
    csv.write(out, "chi.csv")
}

/// `critical`: sweep the mixture family, reporting z, chi and the product
/// chi * (z_c - z) per alpha, plus the located critical alpha.
pub fn critical(cfg: &ExperimentConfig, out: &Path) -> CmdResult {
    let (rho0, rho1) = cfg.family().map_err(CmdError::Validation)?;
    let family = MixtureFamily::new(rho0, rho1, cfg.b)?;
    if cfg.alphas.is_empty() {
        return Err(CmdError::Validation(
            "critical needs a non-empty `alphas` list".into(),
        ));
    }
    let z_c = 1.0 / cfg.b as f64;
    let mut csv = Csv::new("critical", cfg);
    csv.line("alpha,z,chi,product");
    for &alpha in &cfg.alphas {
        let m = family.member(alpha)?;
        match survival::chi_quadrature(&m, cfg.b, cfg.v, cfg.nodes, cfg.chi_tol)? {
            ChiOutcome::Finite { chi, z, .. } => {
                csv.line(&format!(
                    "{},{},{},{}",
                    f(alpha),
                    f(z),
                    f(chi),
                    f(chi * (z_c - z))
                ));
            }
            ChiOutcome::Divergent { z } => {
                csv.line(&format!("{},{},inf,", f(alpha), f(z)));
            }
        }
    }
    match criticality::find_critical_alpha(&family, 1e-7, cfg.nodes) {
        Ok(a) => csv.comment(&format!("critical_alpha = {}", f(a))),
        Err(e) => csv.comment(&format!("critical_alphaationale unavailable: {e}")),
    }
    csv.write(out, "critical.csv")
}

/// `exponents`: one of the three scans plus its summary block.
pub fn exponents(cfg: &ExperimentConfig, out: &Path) -> CmdResult {
    let scan = cfg
        .scan
        .clone()
        .ok_or_else(|| CmdError::Validation("exponents needs `scan = gamma|delta|beta`".into()))?;
    match scan {
        Scan::Gamma => {
            let (rho0, rho1) = cfg.family().map_err(CmdError::Validation)?;
            let family = MixtureFamily::new(rho0, rho1, cfg.b)?;
            let r = criticality::gamma_scan(&family, cfg.v, &cfg.alphas, cfg.nodes, cfg.chi_tol)?;
            let mut csv = Csv::new("exponents gamma", cfg);
            csv.line("z,chi");
            for (z, chi) in &r.points {
                csv.line(&format!("{},{}", f(*z), f(*chi)));
            }
            csv.comment("summary");
            csv.line("exponent,stderr,amplitude,formula_value,oracle_value,ratio");
            csv.line(&format!(
                "{},{},{},{},{},{}",
                f(r.fit.exponent),
                f(r.fit.stderr),
                f(r.fit.amplitude),
                f(r.tau_formula),
                f(r.tau_empirical),
                f(r.tau_empirical / r.tau_formula)
            ));
            csv.write(out, "exponents_gamma.csv")
        }
        Scan::Delta => {
            let r = criticality::delta_scan(
                &cfg.measure,
                cfg.b,
                cfg.v,
                cfg.samples,
                cfg.seed,
                cfg.workers(),
                cfg.nodes,
                (cfg.fit_n_lo, cfg.fit_n_hi),
            )?;
            let mut csv = Csv::new("exponents delta", cfg);
            csv.line("n,p_ge_n,stderr");
            for (i, (p, se)) in r.tail.p_ge.iter().zip(&r.tail.stderr).enumerate() {
                csv.line(&format!("{},{},{}", i + 1, f(*p), f(*se)));
            }
            csv.comment("summary");
            csv.line("exponent,stderr,amplitude,formula_value,oracle_value,ratio");
            let oracle = r.oracle_amplitude.map_or(String::new(), f);
            let ratio = r
                .oracle_amplitude
                .map_or(String::new(), |o| f(r.theta_formula / o));
            csv.line(&format!(
                "{},{},{},{},{oracle},{ratio}",
                f(r.fit.exponent),
                f(r.fit.stderr),
                f(r.fit.amplitude),
                f(r.theta_formula),
            ));
            csv.write(out, "exponents_delta.csv")
        }
        Scan::Beta => {
            let (rho0, rho1) = cfg.family().map_err(CmdError::Validation)?;
            let family = MixtureFamily::new(rho0, rho1, cfg.b)?;
            let r = criticality::beta_scan(
                &family,
                cfg.v,
                &cfg.alphas,
                cfg.depth_proxy,
                cfg.samples,
                cfg.seed,
                cfg.workers(),
                cfg.nodes,
            )?;
            let mut csv = Csv::new("exponents beta", cfg);
            csv.line("z,survival,stderr");
            for (z, p, se) in &r.points {
                csv.line(&format!("{},{},{}", f(*z), f(*p), f(*se)));
            }
            csv.comment("summary");
            csv.line("exponent,stderr,amplitude,formula_value,oracle_value,ratio");
            // the branching-process slope applies when the family reduces
            // to independent percolation
            let reducible = criticality::gw_reduction(&family.rho0, cfg.b, cfg.v).is_some()
                && criticality::gw_reduction(&family.rho1, cfg.b, cfg.v).is_some();
            let gw_slope = 2.0 * (cfg.b as f64).powi(2) / (cfg.b as f64 - 1.0);
            let oracle = if reducible { f(gw_slope) } else { String::new() };
            let ratio = if reducible {
                f(r.tee_formula / gw_slope)
            } else {
                String::new()
            };
            csv.line(&format!(
                "{},{},{},{},{oracle},{ratio}",
                f(r.fit.exponent),
                f(r.fit.stderr),
                f(r.fit.amplitude),
                f(r.tee_formula),
            ));
            csv.write(out, "exponents_beta.csv")
        }
    }
}

/// `oracle`: the independent ground-truth generators, mirroring the CSV
/// schemas of what they check.
pub fn oracle(cfg: &ExperimentConfig, out: &Path) -> CmdResult {
    let kind = cfg.oracle_kind.clone().ok_or_else(|| {
        CmdError::Validation("oracle needs `oracle.kind = tail|survival|mc-z`".into())
    })?;
    match kind {
        OracleKind::Tail => {
            let red = criticality::gw_reduction(&cfg.measure, cfg.b, cfg.v).ok_or_else(|| {
                CmdError::Validation(
                    "oracle tail needs a measure that reduces to independent percolation".into(),
                )
            })?;
            let spec = oracles::GwSpec::new(cfg.b, red.p).map_err(CmdError::from)?;
            let tail = oracles::otter_dwass_tail(spec, cfg.tail_n_max)?;
            let mut csv = Csv::new("oracle tail", cfg);
            csv.comment(&format!("p = {}, root_prob = {}", f(red.p), f(red.root_prob)));
            csv.line("n,p_ge_n,stderr");
            for (i, t) in tail.iter().enumerate() {
                csv.line(&format!("{},{},0", i + 1, f(red.root_prob * t)));
            }
            csv.write(out, "oracle_tail.csv")
        }
        OracleKind::Survival => {
            let red = criticality::gw_reduction(&cfg.measure, cfg.b, cfg.v).ok_or_else(|| {
                CmdError::Validation(
                    "oracle survival needs a measure that reduces to independent percolation"
                        .into(),
                )
            })?;
            let spec = oracles::GwSpec::new(cfg.b, red.p).map_err(CmdError::from)?;
            let s = oracles::gw_survival(spec, 1e-13);
            let mut csv = Csv::new("oracle survival", cfg);
            csv.line("survival,gw_survival,root_prob");
            csv.line(&format!("{},{},{}", f(red.root_prob * s), f(s), f(red.root_prob)));
            csv.write(out, "oracle_survival.csv")
        }
        OracleKind::McZ => {
            let (est, se) = oracles::mc_z(
                &cfg.measure,
                cfg.b,
                cfg.theta,
                cfg.n,
                cfg.samples,
                cfg.seed,
                cfg.workers(),
            )?;
            let mut csv = Csv::new("oracle mc-z", cfg);
            csv.line("estimate,stderr");
            csv.line(&format!("{},{}", f(est), f(se)));
            csv.write(out, "oracle_mcz.csv")
        }
    }
}

/// `verdict`: the percolation-bound phase classification.
pub fn verdict(cfg: &ExperimentConfig, out: &Path) -> CmdResult {
    let r = criticality::percolation_verdict(&cfg.measure, cfg.b)?;
    let name = match r.verdict {
        PercolationVerdict::InfiniteForLargeV => "infinite_for_large_v",
        PercolationVerdict::FiniteAlways => "finite_always",
        PercolationVerdict::Inconclusive => "inconclusive",
        PercolationVerdict::Marginal => "marginal",
    };
    println!(
        "{name} (rho([(b-1)/b, 1]) = {}, theta_b = {}, rho([1 - theta_b/b, 1]) = {})",
        f(r.mass_open),
        f(r.theta_b),
        f(r.mass_wide)
    );
    let mut csv = Csv::new("verdict", cfg);
    csv.line("verdict,mass_open,theta_b,mass_wide");
    csv.line(&format!(
        "{name},{},{},{}",
        f(r.mass_open),
        f(r.theta_b),
        f(r.mass_wide)
    ));
    csv.write(out, "verdict.csv")
}
