//! Flat `key = value` experiment configuration.
//!
//! Every key is validated before any computation starts and all errors are
//! reported at once. Unknown and duplicated keys are errors; `piece` and
//! `atom` lines are the only repeatable keys.

use crit_core::{Atom, Measure, Piece};
use std::collections::HashMap;
use std::fmt::Write as _;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Scan {
    Gamma,
    Delta,
    Beta,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleKind {
    Tail,
    Survival,
    McZ,
}

/// How the measure was specified; kept for the output header echo and for
/// extracting mixture families.
#[derive(Clone, Debug)]
pub enum MeasureSpec {
    Uniform {
        lo: f64,
        hi: f64,
    },
    Gap {
        x_star: f64,
        p: f64,
        low_cap: f64,
    },
    Piecewise {
        pieces: Vec<(f64, f64, f64, f64)>,
        atoms: Vec<(f64, f64)>,
    },
    Mix {
        alpha: f64,
        first: Box<MeasureSpec>,
        second: Box<MeasureSpec>,
    },
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub b: u32,
    pub seed: u64,
    pub v: f64,
    pub samples: u64,
    pub depth_cap: u32,
    /// Worker count in the config file; 0 means available parallelism.
    /// Outputs are worker-invariant by construction.
    pub workers_configured: usize,
    pub nodes: usize,
    pub zeta_tol: f64,
    pub zeta_iter_cap: u32,
    pub fp_tol: f64,
    pub fp_iter_cap: u32,
    pub psi_eps: f64,
    pub psi_n_max: u32,
    pub psi_theta_max: Option<f64>,
    pub lambda: f64,
    pub chi_tol: f64,
    pub chi_size_cap: u64,
    pub tail_n_max: usize,
    pub fit_n_lo: usize,
    pub fit_n_hi: usize,
    pub depth_proxy: u32,
    pub alphas: Vec<f64>,
    pub scan: Option<Scan>,
    pub oracle_kind: Option<OracleKind>,
    pub theta: f64,
    pub n: u32,
    pub measure: Measure,
    pub measure_spec: MeasureSpec,
}

impl ExperimentConfig {
    /// Effective worker count: env override, then config, then all cores.
    pub fn workers(&self) -> usize {
        if let Ok(s) = std::env::var("CRIT_AVALANCHE_WORKERS") {
            if let Ok(w) = s.trim().parse::<usize>() {
                return w;
            }
        }
        self.workers_configured
    }

    /// The two endpoint measures when the config describes a mixture.
    pub fn family(&self) -> Result<(Measure, Measure), String> {
        match &self.measure_spec {
            MeasureSpec::Mix { first, second, .. } => {
                Ok((build_measure(first)?, build_measure(second)?))
            }
            _ => Err("this subcommand needs measure.kind = mix (a mixture family)".into()),
        }
    }

    /// Resolved experiment parameters as header comment lines, in fixed
    /// order. The worker count is an execution knob and is echoed as
    /// configured, so reruns under any pool size stay byte-identical.
    pub fn header_lines(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut push = |k: &str, v: String| out.push(format!("# {k} = {v}"));
        push("b", self.b.to_string());
        push("seed", self.seed.to_string());
        push("v", fmt_f64(self.v));
        push("samples", self.samples.to_string());
        push("depth_cap", self.depth_cap.to_string());
        push("workers", self.workers_configured.to_string());
        push("grid.nodes", self.nodes.to_string());
        push("zeta.tol", fmt_f64(self.zeta_tol));
        push("zeta.iter_cap", self.zeta_iter_cap.to_string());
        push("fp.tol", fmt_f64(self.fp_tol));
        push("fp.iter_cap", self.fp_iter_cap.to_string());
        push("psi.eps", fmt_f64(self.psi_eps));
        push("psi.n_max", self.psi_n_max.to_string());
        if let Some(t) = self.psi_theta_max {
            push("psi.theta_max", fmt_f64(t));
        }
        push("lambda", fmt_f64(self.lambda));
        push("chi.tol", fmt_f64(self.chi_tol));
        push("chi.size_cap", self.chi_size_cap.to_string());
        push("tail.n_max", self.tail_n_max.to_string());
        push("fit.n_lo", self.fit_n_lo.to_string());
        push("fit.n_hi", self.fit_n_hi.to_string());
        push("depth_proxy", self.depth_proxy.to_string());
        if !self.alphas.is_empty() {
            let list = self
                .alphas
                .iter()
                .map(|a| fmt_f64(*a))
                .collect::<Vec<_>>()
                .join(",");
            push("alphas", list);
        }
        if let Some(s) = &self.scan {
            push(
                "scan",
                match s {
                    Scan::Gamma => "gamma".into(),
                    Scan::Delta => "delta".into(),
                    Scan::Beta => "beta".into(),
                },
            );
        }
        if let Some(k) = &self.oracle_kind {
            push(
                "oracle.kind",
                match k {
                    OracleKind::Tail => "tail".into(),
                    OracleKind::Survival => "survival".into(),
                    OracleKind::McZ => "mc-z".into(),
                },
            );
        }
        push("theta", fmt_f64(self.theta));
        push("n", self.n.to_string());
        let mut spec = String::new();
        echo_measure(&mut spec, "measure", &self.measure_spec);
        out.extend(spec.lines().map(|s| s.to_string()));
        out
    }
}

fn fmt_f64(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{x}")
}

fn echo_measure(out: &mut String, prefix: &str, spec: &MeasureSpec) {
    match spec {
        MeasureSpec::Uniform { lo, hi } => {
            let _ = writeln!(out, "# {prefix}.kind = uniform");
            let _ = writeln!(out, "# {prefix}.lo = {}", fmt_f64(*lo));
            let _ = writeln!(out, "# {prefix}.hi = {}", fmt_f64(*hi));
        }
        MeasureSpec::Gap { x_star, p, low_cap } => {
            let _ = writeln!(out, "# {prefix}.kind = gap");
            let _ = writeln!(out, "# {prefix}.x_star = {}", fmt_f64(*x_star));
            let _ = writeln!(out, "# {prefix}.p = {}", fmt_f64(*p));
            let _ = writeln!(out, "# {prefix}.low_cap = {}", fmt_f64(*low_cap));
        }
        MeasureSpec::Piecewise { pieces, atoms } => {
            let _ = writeln!(out, "# {prefix}.kind = piecewise");
            let key = if prefix == "measure" {
                "piece".to_string()
            } else {
                format!("{prefix}.piece")
            };
            for (l, r, fl, fr) in pieces {
                let _ = writeln!(
                    out,
                    "# {key} = {},{},{},{}",
                    fmt_f64(*l),
                    fmt_f64(*r),
                    fmt_f64(*fl),
                    fmt_f64(*fr)
                );
            }
            let akey = if prefix == "measure" {
                "atom".to_string()
            } else {
                format!("{prefix}.atom")
            };
            for (x, m) in atoms {
                let _ = writeln!(out, "# {akey} = {},{}", fmt_f64(*x), fmt_f64(*m));
            }
        }
        MeasureSpec::Mix { alpha, first, second } => {
            let _ = writeln!(out, "# {prefix}.kind = mix");
            let _ = writeln!(out, "# {prefix}.alpha = {}", fmt_f64(*alpha));
            echo_measure(out, &format!("{prefix}.first"), first);
            echo_measure(out, &format!("{prefix}.second"), second);
        }
    }
}

const SCALAR_KEYS: &[&str] = &[
    "b",
    "seed",
    "v",
    "samples",
    "depth_cap",
    "workers",
    "grid.nodes",
    "zeta.tol",
    "zeta.iter_cap",
    "fp.tol",
    "fp.iter_cap",
    "psi.eps",
    "psi.n_max",
    "psi.theta_max",
    "lambda",
    "chi.tol",
    "chi.size_cap",
    "tail.n_max",
    "fit.n_lo",
    "fit.n_hi",
    "depth_proxy",
    "alphas",
    "scan",
    "oracle.kind",
    "theta",
    "n",
    "measure.kind",
    "measure.lo",
    "measure.hi",
    "measure.x_star",
    "measure.p",
    "measure.low_cap",
    "measure.alpha",
    "measure.first.kind",
    "measure.first.lo",
    "measure.first.hi",
    "measure.first.x_star",
    "measure.first.p",
    "measure.first.low_cap",
    "measure.second.kind",
    "measure.second.lo",
    "measure.second.hi",
    "measure.second.x_star",
    "measure.second.p",
    "measure.second.low_cap",
];

const REPEATABLE_KEYS: &[&str] = &[
    "piece",
    "atom",
    "measure.first.piece",
    "measure.first.atom",
    "measure.second.piece",
    "measure.second.atom",
];

struct Raw {
    scalars: HashMap<String, String>,
    lists: HashMap<String, Vec<String>>,
}

/// Parses the config text. On failure returns every problem found, not
/// just the first.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, Vec<String>> {
    let mut errors = Vec::new();
    let mut raw = Raw {
        scalars: HashMap::new(),
        lists: HashMap::new(),
    };
    for (lineno, line) in text.lines().enumerate() {
        let line = match line.find('#') {
            Some(i) => &line[..i],
            None => line,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let Some(eq) = line.find('=') else {
            errors.push(format!("line {}: expected `key = value`", lineno + 1));
            continue;
        };
        let key = line[..eq].trim().to_string();
        let value = line[eq + 1..].trim().to_string();
        if REPEATABLE_KEYS.contains(&key.as_str()) {
            raw.lists.entry(key).or_default().push(value);
        } else if SCALAR_KEYS.contains(&key.as_str()) {
            if raw.scalars.insert(key.clone(), value).is_some() {
                errors.push(format!("line {}: duplicate key `{key}`", lineno + 1));
            }
        } else {
            errors.push(format!("line {}: unknown key `{key}`", lineno + 1));
        }
    }

    let mut get_f64 = |key: &str, default: Option<f64>, errors: &mut Vec<String>| -> f64 {
        match raw.scalars.get(key) {
            Some(v) => v.parse::<f64>().unwrap_or_else(|_| {
                errors.push(format!("key `{key}`: expected a number, got `{v}`"));
                f64::NAN
            }),
            None => match default {
                Some(d) => d,
                None => {
                    errors.push(format!("key `{key}` is required"));
                    f64::NAN
                }
            },
        }
    };

    let b = get_f64("b", None, &mut errors);
    let seed = get_f64("seed", None, &mut errors);
    let v = get_f64("v", Some(1.0), &mut errors);
    let samples = get_f64("samples", Some(100_000.0), &mut errors);
    let depth_cap = get_f64("depth_cap", Some(10_000.0), &mut errors);
    let workers = get_f64("workers", Some(0.0), &mut errors);
    let nodes = get_f64("grid.nodes", Some(4096.0), &mut errors);
    let zeta_tol = get_f64("zeta.tol", Some(1e-9), &mut errors);
    let zeta_iter_cap = get_f64("zeta.iter_cap", Some(500.0), &mut errors);
    let fp_tol = get_f64("fp.tol", Some(1e-10), &mut errors);
    let fp_iter_cap = get_f64("fp.iter_cap", Some(200_000.0), &mut errors);
    let psi_eps = get_f64("psi.eps", Some(1e-6), &mut errors);
    let psi_n_max = get_f64("psi.n_max", Some(200.0), &mut errors);
    let psi_theta_max = raw
        .scalars
        .get("psi.theta_max")
        .map(|s| {
            s.parse::<f64>().unwrap_or_else(|_| {
                errors.push(format!("key `psi.theta_max`: expected a number, got `{s}`"));
                f64::NAN
            })
        });
    let lambda = get_f64("lambda", Some(1e-6), &mut errors);
    let chi_tol = get_f64("chi.tol", Some(1e-9), &mut errors);
    let chi_size_cap = get_f64("chi.size_cap", Some(1_000_000.0), &mut errors);
    let tail_n_max = get_f64("tail.n_max", Some(10_000.0), &mut errors);
    let fit_n_lo = get_f64("fit.n_lo", Some(100.0), &mut errors);
    let fit_n_hi = get_f64("fit.n_hi", Some(10_000.0), &mut errors);
    let depth_proxy = get_f64("depth_proxy", Some(1_000.0), &mut errors);
    let theta = get_f64("theta", Some(1.0), &mut errors);
    let n = get_f64("n", Some(10.0), &mut errors);

    let alphas: Vec<f64> = match raw.scalars.get("alphas") {
        Some(s) if !s.trim().is_empty() => s
            .split(',')
            .filter_map(|t| {
                let t = t.trim();
                t.parse::<f64>()
                    .map_err(|_| errors.push(format!("key `alphas`: bad entry `{t}`")))
                    .ok()
            })
            .collect(),
        _ => Vec::new(),
    };
    let scan = match raw.scalars.get("scan").map(|s| s.as_str()) {
        None => None,
        Some("gamma") => Some(Scan::Gamma),
        Some("delta") => Some(Scan::Delta),
        Some("beta") => Some(Scan::Beta),
        Some(other) => {
            errors.push(format!("key `scan`: expected gamma|delta|beta, got `{other}`"));
            None
        }
    };
    let oracle_kind = match raw.scalars.get("oracle.kind").map(|s| s.as_str()) {
        None => None,
        Some("tail") => Some(OracleKind::Tail),
        Some("survival") => Some(OracleKind::Survival),
        Some("mc-z") => Some(OracleKind::McZ),
        Some(other) => {
            errors.push(format!(
                "key `oracle.kind`: expected tail|survival|mc-z, got `{other}`"
            ));
            None
        }
    };

    let measure_spec = parse_measure(&raw, "measure", &mut errors);

    // range checks on the scalars that parsed
    let check_pos_int = |name: &str, x: f64, errors: &mut Vec<String>| {
        if x.is_nan() {
            return;
        }
        if x < 0.0 || x.fract() != 0.0 {
            errors.push(format!("key `{name}`: expected a non-negative integer, got {x}"));
        }
    };
    check_pos_int("b", b, &mut errors);
    check_pos_int("seed", seed, &mut errors);
    check_pos_int("samples", samples, &mut errors);
    check_pos_int("depth_cap", depth_cap, &mut errors);
    check_pos_int("workers", workers, &mut errors);
    check_pos_int("grid.nodes", nodes, &mut errors);
    check_pos_int("zeta.iter_cap", zeta_iter_cap, &mut errors);
    check_pos_int("fp.iter_cap", fp_iter_cap, &mut errors);
    check_pos_int("psi.n_max", psi_n_max, &mut errors);
    check_pos_int("chi.size_cap", chi_size_cap, &mut errors);
    check_pos_int("tail.n_max", tail_n_max, &mut errors);
    check_pos_int("fit.n_lo", fit_n_lo, &mut errors);
    check_pos_int("fit.n_hi", fit_n_hi, &mut errors);
    check_pos_int("depth_proxy", depth_proxy, &mut errors);
    check_pos_int("n", n, &mut errors);
    if !b.is_nan() && b.fract() == 0.0 && b < 2.0 {
        errors.push(format!("key `b`: branching number must be >= 2, got {b}"));
    }

    let measure = match &measure_spec {
        Some(spec) => match build_measure_with_b(spec, b as u32) {
            Ok(m) => Some(m),
            Err(e) => {
                errors.push(format!("measure: {e}"));
                None
            }
        },
        None => None,
    };

    if !errors.is_empty() {
        return Err(errors);
    }
    let (measure, measure_spec) = (measure.unwrap(), measure_spec.unwrap());
    Ok(ExperimentConfig {
        b: b as u32,
        seed: seed as u64,
        v,
        samples: samples as u64,
        depth_cap: depth_cap as u32,
        workers_configured: workers as usize,
        nodes: nodes as usize,
        zeta_tol,
        zeta_iter_cap: zeta_iter_cap as u32,
        fp_tol,
        fp_iter_cap: fp_iter_cap as u32,
        psi_eps,
        psi_n_max: psi_n_max as u32,
        psi_theta_max,
        lambda,
        chi_tol,
        chi_size_cap: chi_size_cap as u64,
        tail_n_max: tail_n_max as usize,
        fit_n_lo: fit_n_lo as usize,
        fit_n_hi: fit_n_hi as usize,
        depth_proxy: depth_proxy as u32,
        alphas,
        scan,
        oracle_kind,
        theta,
        n: n as u32,
        measure,
        measure_spec,
    })
}

fn parse_measure(raw: &Raw, prefix: &str, errors: &mut Vec<String>) -> Option<MeasureSpec> {
    let key = |suffix: &str| {
        if suffix.is_empty() {
            prefix.to_string()
        } else {
            format!("{prefix}.{suffix}")
        }
    };
    let kind = match raw.scalars.get(&key("kind")) {
        Some(k) => k.clone(),
        None => {
            errors.push(format!("key `{}` is required", key("kind")));
            return None;
        }
    };
    let get = |suffix: &str, errors: &mut Vec<String>| -> Option<f64> {
        let k = key(suffix);
        match raw.scalars.get(&k) {
            Some(v) => match v.parse::<f64>() {
                Ok(x) => Some(x),
                Err(_) => {
                    errors.push(format!("key `{k}`: expected a number, got `{v}`"));
                    None
                }
            },
            None => {
                errors.push(format!("key `{k}` is required for {} = {kind}", key("kind")));
                None
            }
        }
    };
    match kind.as_str() {
        "uniform" => {
            let lo = get("lo", errors)?;
            let hi = get("hi", errors)?;
            Some(MeasureSpec::Uniform { lo, hi })
        }
        "gap" => {
            let x_star = get("x_star", errors)?;
            let p = get("p", errors)?;
            let low_cap = match raw.scalars.get(&key("low_cap")) {
                Some(v) => match v.parse::<f64>() {
                    Ok(x) => x,
                    Err(_) => {
                        errors.push(format!("key `{}`: expected a number", key("low_cap")));
                        return None;
                    }
                },
                None => 0.0,
            };
            Some(MeasureSpec::Gap { x_star, p, low_cap })
        }
        "piecewise" => {
            let piece_key = if prefix == "measure" {
                "piece".to_string()
            } else {
                format!("{prefix}.piece")
            };
            let atom_key = if prefix == "measure" {
                "atom".to_string()
            } else {
                format!("{prefix}.atom")
            };
            let mut pieces = Vec::new();
            for line in raw.lists.get(&piece_key).map(|v| v.as_slice()).unwrap_or(&[]) {
                match parse_tuple::<4>(line) {
                    Some(t) => pieces.push((t[0], t[1], t[2], t[3])),
                    None => errors.push(format!(
                        "key `{piece_key}`: expected `left,right,fleft,fright`, got `{line}`"
                    )),
                }
            }
            let mut atoms = Vec::new();
            for line in raw.lists.get(&atom_key).map(|v| v.as_slice()).unwrap_or(&[]) {
                match parse_tuple::<2>(line) {
                    Some(t) => atoms.push((t[0], t[1])),
                    None => errors.push(format!("key `{atom_key}`: expected `x,mass`, got `{line}`")),
                }
            }
            if pieces.is_empty() && atoms.is_empty() {
                errors.push(format!(
                    "{} = piecewise needs at least one `{piece_key}` or `{atom_key}` line",
                    key("kind")
                ));
                return None;
            }
            Some(MeasureSpec::Piecewise { pieces, atoms })
        }
        "mix" => {
            if prefix != "measure" {
                errors.push(format!(
                    "key `{}`: nested mixtures are not supported",
                    key("kind")
                ));
                return None;
            }
            let alpha = get("alpha", errors)?;
            let first = parse_measure(raw, "measure.first", errors)?;
            let second = parse_measure(raw, "measure.second", errors)?;
            Some(MeasureSpec::Mix {
                alpha,
                first: Box::new(first),
                second: Box::new(second),
            })
        }
        other => {
            errors.push(format!(
                "key `{}`: expected uniform|gap|piecewise|mix, got `{other}`",
                key("kind")
            ));
            None
        }
    }
}

fn parse_tuple<const N: usize>(s: &str) -> Option<[f64; N]> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != N {
        return None;
    }
    let mut out = [0.0; N];
    for (slot, p) in out.iter_mut().zip(&parts) {
        *slot = p.parse().ok()?;
    }
    Some(out)
}

/// Builds a measure from a spec (b is needed only by the gap family; use
/// `build_measure_with_b` when it is known).
pub fn build_measure(spec: &MeasureSpec) -> Result<Measure, String> {
    build_measure_with_b(spec, 2)
}

pub fn build_measure_with_b(spec: &MeasureSpec, b: u32) -> Result<Measure, String> {
    match spec {
        MeasureSpec::Uniform { lo, hi } => Measure::uniform(*lo, *hi).map_err(|e| e.to_string()),
        MeasureSpec::Gap { x_star, p, low_cap } => {
            Measure::gap(b, *x_star, *p, *low_cap).map_err(|e| e.to_string())
        }
        MeasureSpec::Piecewise { pieces, atoms } => {
            let ps = pieces
                .iter()
                .map(|&(left, right, f_left, f_right)| Piece {
                    left,
                    right,
                    f_left,
                    f_right,
                })
                .collect();
            let ats = atoms.iter().map(|&(x, mass)| Atom { x, mass }).collect();
            Measure::piecewise(ps, ats).map_err(|e| e.to_string())
        }
        MeasureSpec::Mix { alpha, first, second } => {
            let a = build_measure_with_b(first, b)?;
            let c = build_measure_with_b(second, b)?;
            a.mix(&c, *alpha).map_err(|e| e.to_string())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
b = 2
seed = 7
measure.kind = uniform
measure.lo = 0
measure.hi = 1
";

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.b, 2);
        assert_eq!(c.seed, 7);
        assert_eq!(c.nodes, 4096);
        assert_eq!(c.depth_cap, 10_000);
        assert_eq!(c.samples, 100_000);
        assert_eq!(c.v, 1.0);
    }

    #[test]
    fn missing_gap_key_is_named() {
        let text = "b = 2\nseed = 1\nmeasure.kind = gap\nmeasure.x_star = 0.8\n";
        let errs = parse_config(text).unwrap_err();
        assert!(errs.iter().any(|e| e.contains("measure.p")), "{errs:?}");
    }

    #[test]
    fn duplicate_key_is_error() {
        let text = format!("{MINIMAL}v = 1\nv = 2\n");
        let errs = parse_config(&text).unwrap_err();
        assert!(errs.iter().any(|e| e.contains("duplicate key `v`")), "{errs:?}");
    }

    #[test]
    fn unknown_key_is_error() {
        let text = format!("{MINIMAL}frobnicate = 3\n");
        let errs = parse_config(&text).unwrap_err();
        assert!(errs.iter().any(|e| e.contains("unknown key")), "{errs:?}");
    }

    #[test]
    fn all_errors_reported_at_once() {
        let text = "b = 1\nmeasure.kind = gap\nmeasure.x_star = 0.8\nbogus = 1\n";
        let errs = parse_config(text).unwrap_err();
        // missing seed, b < 2, unknown key, missing measure.p
        assert!(errs.len() >= 4, "{errs:?}");
    }

    #[test]
    fn gap_condition_violation_reported() {
        let text = "b = 2\nseed = 1\nmeasure.kind = gap\nmeasure.x_star = 0.8\nmeasure.p = 0.4\nmeasure.low_cap = 0.3\n";
        let errs = parse_config(text).unwrap_err();
        assert!(errs.iter().any(|e| e.contains("gap condition")), "{errs:?}");
    }

    #[test]
    fn mix_family_parses() {
        let text = "\
b = 2
seed = 3
measure.kind = mix
measure.alpha = 0.25
measure.first.kind = gap
measure.first.x_star = 0.8
measure.first.p = 0.4
measure.first.low_cap = 0.05
measure.second.kind = gap
measure.second.x_star = 0.8
measure.second.p = 0.6
measure.second.low_cap = 0.05
";
        let c = parse_config(text).unwrap();
        let (a, b2) = c.family().unwrap();
        assert!((a.mass(0.5, 0.8, true, true) - 0.4).abs() < 1e-12);
        assert!((b2.mass(0.5, 0.8, true, true) - 0.6).abs() < 1e-12);
        // member at alpha = 0.25: p = 0.45
        assert!((c.measure.mass(0.5, 0.8, true, true) - 0.45).abs() < 1e-12);
    }

    #[test]
    fn piecewise_with_atoms_parses() {
        let text = "\
b = 2
seed = 3
measure.kind = piecewise
piece = 0, 0.5, 1.0, 1.0
atom = 0.9, 0.5
";
        let c = parse_config(text).unwrap();
        assert_eq!(c.measure.atoms().len(), 1);
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let text = format!("# a comment\n\n{MINIMAL}samples = 50 # trailing\n");
        let c = parse_config(&text).unwrap();
        assert_eq!(c.samples, 50);
    }
}
