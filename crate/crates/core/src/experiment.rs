//! Run configuration, time-series scans and N-scaling studies.
//!
//! Time is measured in the units in which `rabi` is given: the Hamiltonian
//! carries Ω_R = `rabi`, and grid points are evolution times.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observables::{
    check_resolution, default_squeezing_initial, direction_optimality_margin, edge_populations, ghz_fidelity,
    min_squeezing_scan, MomentOperators, SpinMoments, SqueezingResult,
};
use crate::propagator::{validate_grid, Evolver};
use crate::spinops::{CouplingScheme, SchemeKind};
use crate::state::{all_down_state, all_up_state, coherent_spin_state, DickeState};

/// Largest N accepted by [`scaling_study`].
pub const MAX_SCALING_ATOMS: usize = 2048;

/// Populations count as balanced when |p0 − pN| is at most this.
pub const BALANCE_TOLERANCE: f64 = 0.05;

const RANDOM_DIRECTION_SAMPLES: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum InitialSpec {
    AllUp,
    AllDown,
    Coherent { theta: f64, phi: f64 },
}

impl InitialSpec {
    pub fn build(&self, n_atoms: usize) -> Result<DickeState> {
        match *self {
            InitialSpec::AllUp => all_up_state(n_atoms),
            InitialSpec::AllDown => all_down_state(n_atoms),
            InitialSpec::Coherent { theta, phi } => coherent_spin_state(n_atoms, theta, phi),
        }
    }
}

impl fmt::Display for InitialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialSpec::AllUp => f.write_str("all_up"),
            InitialSpec::AllDown => f.write_str("all_down"),
            InitialSpec::Coherent { theta, phi } => write!(f, "coherent({theta},{phi})"),
        }
    }
}

/// Accepts `all_up`, `all_down`, `coherent(θ,φ)` and `coherent:θ,φ`.
impl FromStr for InitialSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.replace('-', "_").as_str() {
            "all_up" | "up" => return Ok(InitialSpec::AllUp),
            "all_down" | "down" => return Ok(InitialSpec::AllDown),
            _ => {}
        }
        let args = s
            .strip_prefix("coherent")
            .map(|r| r.trim_start_matches(':').trim_start_matches('(').trim_end_matches(')'))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown initial state '{s}'")))?;
        let parts: Vec<&str> = args.split(',').map(str::trim).collect();
        let parse = |x: &str| {
            x.parse::<f64>().map_err(|_| Error::InvalidParameter(format!("bad angle '{x}' in '{s}'")))
        };
        match parts.as_slice() {
            [theta, phi] => Ok(InitialSpec::Coherent { theta: parse(theta)?, phi: parse(phi)? }),
            _ => Err(Error::InvalidParameter(format!("coherent state needs two angles, got '{s}'"))),
        }
    }
}

impl TryFrom<String> for InitialSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<InitialSpec> for String {
    fn from(s: InitialSpec) -> String {
        s.to_string()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    EdgePopulations,
    GhzFidelity,
    Squeezing,
    Moments,
}

impl FromStr for Output {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "edge_populations" | "edges" => Ok(Output::EdgePopulations),
            "ghz_fidelity" | "ghz" => Ok(Output::GhzFidelity),
            "squeezing" => Ok(Output::Squeezing),
            "moments" => Ok(Output::Moments),
            other => Err(Error::InvalidParameter(format!("unknown output '{other}'"))),
        }
    }
}

fn default_outputs() -> BTreeSet<Output> {
    [Output::EdgePopulations, Output::GhzFidelity, Output::Squeezing].into()
}

fn default_rabi() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub scheme: SchemeKind,
    #[serde(default = "default_rabi")]
    pub rabi: f64,
    pub n_atoms: usize,
    /// Defaults per scheme, see [`default_squeezing_initial`].
    #[serde(default)]
    pub initial: Option<InitialSpec>,
    pub t_max: f64,
    pub n_points: usize,
    #[serde(default = "default_outputs")]
    pub outputs: BTreeSet<Output>,
    #[serde(default)]
    pub seed: u64,
}

impl RunConfig {
    pub fn new(scheme: SchemeKind, n_atoms: usize, t_max: f64, n_points: usize) -> Self {
        Self {
            scheme,
            rabi: 1.0,
            n_atoms,
            initial: None,
            t_max,
            n_points,
            outputs: default_outputs(),
            seed: 0,
        }
    }

    pub fn coupling(&self) -> Result<CouplingScheme> {
        CouplingScheme::new(self.scheme, self.rabi)
    }

    pub fn wants(&self, o: Output) -> bool {
        self.outputs.contains(&o)
    }

    /// t_max = 0 yields the single point t = 0.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.n_atoms == 0 {
            return Err(Error::ZeroAtoms);
        }
        if !(self.t_max >= 0.0 && self.t_max.is_finite()) {
            return bad(format!("t_max must be finite and non-negative, got {}", self.t_max));
        }
        if self.t_max > 0.0 && self.n_points < 2 {
            return bad(format!("n_points must be at least 2, got {}", self.n_points));
        }
        if self.wants(Output::GhzFidelity) && !self.n_atoms.is_multiple_of(2) {
            return bad(format!("GHZ fidelity needs an even number of atoms, got {}", self.n_atoms));
        }
        self.coupling()?;
        Ok(())
    }

    pub fn initial_state(&self) -> Result<DickeState> {
        match self.initial {
            Some(spec) => spec.build(self.n_atoms),
            None => default_squeezing_initial(self.scheme, self.n_atoms),
        }
    }

    pub fn time_grid(&self) -> Vec<f64> {
        if self.t_max == 0.0 {
            return vec![0.0];
        }
        linspace(self.t_max, self.n_points)
    }
}

/// n points from 0 to `end` inclusive.
pub fn linspace(end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![0.0],
        _ => {
            let step = end / (n - 1) as f64;
            (0..n).map(|i| if i == n - 1 { end } else { i as f64 * step }).collect()
        }
    }
}

/// One grid point. Fields not requested by the run are `None`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub t: f64,
    pub p0: Option<f64>,
    pub p_n: Option<f64>,
    pub ghz_fidelity: Option<f64>,
    pub squeezing: Option<SqueezingResult>,
    pub moments: Option<SpinMoments>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgePeak {
    pub t: f64,
    pub p0: f64,
    pub p_n: f64,
    pub sum: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub scheme: SchemeKind,
    pub rabi: f64,
    pub n_atoms: usize,
    pub initial: InitialSpec,
    pub t_of_max_ghz_fidelity: Option<f64>,
    pub max_ghz_fidelity: Option<f64>,
    pub t_of_min_xi2: Option<f64>,
    pub min_xi2: Option<f64>,
    pub direction_at_min_xi2: Option<[f64; 3]>,
    /// Largest p0 + pN among points with |p0 − pN| ≤ [`BALANCE_TOLERANCE`].
    pub balanced_edge_peak: Option<EdgePeak>,
    /// Seeded random-direction check at the ξ² minimum; ≤ 0 means optimal.
    pub direction_optimality_margin: Option<f64>,
    pub runtime: f64,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub rows: Vec<Row>,
    pub summary: Summary,
    pub outputs: BTreeSet<Output>,
}

pub fn run(config: &RunConfig) -> Result<RunOutput> {
    let start = Instant::now();
    config.validate()?;
    let scheme = config.coupling()?;
    let n = config.n_atoms;
    let grid = config.time_grid();
    validate_grid(&grid)?;
    let want_sq = config.wants(Output::Squeezing);
    let want_mom = config.wants(Output::Moments);
    if want_sq && grid.len() > 1 {
        check_resolution(&scheme, n, &grid)?;
    }
    let initial = config.initial_state()?;
    let evolver = Evolver::for_scheme(&scheme, n)?;
    let prepared = evolver.prepare(&initial)?;
    let ops = if want_sq || want_mom { Some(MomentOperators::new(n)?) } else { None };

    let rows: Vec<Row> = grid
        .par_iter()
        .map(|&t| {
            let psi = prepared.at(t)?;
            let (p0, pn) = edge_populations(&psi);
            let edges = config.wants(Output::EdgePopulations);
            let moments = ops.as_ref().map(|o| o.moments(&psi)).transpose()?;
            Ok(Row {
                t,
                p0: edges.then_some(p0),
                p_n: edges.then_some(pn),
                ghz_fidelity: config.wants(Output::GhzFidelity).then(|| ghz_fidelity(&psi).fidelity),
                squeezing: if want_sq {
                    moments.as_ref().map(|m| crate::observables::squeezing_from_moments(m, n))
                } else {
                    None
                },
                moments: if want_mom { moments } else { None },
            })
        })
        .collect::<Result<_>>()?;

    let mut summary = summarize(config, &rows, &initial);
    if let (Some(t), Some(ops)) = (summary.t_of_min_xi2, ops.as_ref()) {
        let mom = ops.moments(&prepared.at(t)?)?;
        let res = crate::observables::squeezing_from_moments(&mom, n);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        summary.direction_optimality_margin =
            Some(direction_optimality_margin(&mom, &res, RANDOM_DIRECTION_SAMPLES, &mut rng));
    }
    summary.runtime = start.elapsed().as_secs_f64();
    Ok(RunOutput { rows, summary, outputs: config.outputs.clone() })
}

fn initial_label(config: &RunConfig) -> InitialSpec {
    config.initial.unwrap_or(match config.scheme {
        SchemeKind::OneAxisTwisting => InitialSpec::Coherent { theta: std::f64::consts::FRAC_PI_2, phi: 0.0 },
        _ => InitialSpec::AllUp,
    })
}

fn summarize(config: &RunConfig, rows: &[Row], _initial: &DickeState) -> Summary {
    let argbest = |key: &dyn Fn(&Row) -> Option<f64>, better: fn(f64, f64) -> bool| {
        let mut best: Option<(f64, f64)> = None;
        for r in rows {
            if let Some(v) = key(r) {
                if best.is_none_or(|(_, b)| better(v, b)) {
                    best = Some((r.t, v));
                }
            }
        }
        best
    };
    let ghz = argbest(&|r| r.ghz_fidelity, |a, b| a > b);
    let xi = argbest(&|r| r.squeezing.and_then(|s| s.xi_squared), |a, b| a < b);
    let direction = xi
        .and_then(|(t, _)| rows.iter().find(|r| r.t == t).and_then(|r| r.squeezing).map(|s| s.direction_n1));
    let balanced_edge_peak = rows
        .iter()
        .filter_map(|r| match (r.p0, r.p_n) {
            (Some(p0), Some(p_n)) if (p0 - p_n).abs() <= BALANCE_TOLERANCE => {
                Some(EdgePeak { t: r.t, p0, p_n, sum: p0 + p_n })
            }
            _ => None,
        })
        .fold(None, |best: Option<EdgePeak>, e| match best {
            Some(b) if b.sum >= e.sum => Some(b),
            _ => Some(e),
        });
    Summary {
        scheme: config.scheme,
        rabi: config.rabi,
        n_atoms: config.n_atoms,
        initial: initial_label(config),
        t_of_max_ghz_fidelity: ghz.map(|x| x.0),
        max_ghz_fidelity: ghz.map(|x| x.1),
        t_of_min_xi2: xi.map(|x| x.0),
        min_xi2: xi.map(|x| x.1),
        direction_at_min_xi2: direction,
        balanced_edge_peak,
        direction_optimality_margin: None,
        runtime: 0.0,
    }
}

fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f).unwrap_or_default()
}

impl RunOutput {
    pub fn csv_header(&self) -> Vec<&'static str> {
        let mut h =
            vec!["t", "p0", "pN", "ghz_fidelity", "xi_squared", "n1_x", "n1_y", "n1_z", "degenerate_flag"];
        if self.outputs.contains(&Output::Moments) {
            h.extend(["jx", "jy", "jz", "cov_xx", "cov_yy", "cov_zz", "cov_xy", "cov_xz", "cov_yz"]);
        }
        h
    }

    /// Floats carry 17 significant digits; absent values are empty cells.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{}", self.csv_header().join(","))?;
        let with_moments = self.outputs.contains(&Output::Moments);
        for r in &self.rows {
            let mut cells = vec![fmt_f(r.t), fmt_opt(r.p0), fmt_opt(r.p_n), fmt_opt(r.ghz_fidelity)];
            match r.squeezing {
                Some(s) => {
                    cells.push(fmt_opt(s.xi_squared));
                    cells.extend(s.direction_n1.iter().map(|&x| fmt_f(x)));
                    cells.push(u8::from(s.degenerate_flag).to_string());
                }
                None => cells.extend(std::iter::repeat_n(String::new(), 5)),
            }
            if with_moments {
                match r.moments {
                    Some(m) => {
                        cells.extend(m.mean.iter().map(|&x| fmt_f(x)));
                        let c = m.covariance;
                        cells.extend(
                            [c[0][0], c[1][1], c[2][2], c[0][1], c[0][2], c[1][2]].iter().map(|&x| fmt_f(x)),
                        );
                    }
                    None => cells.extend(std::iter::repeat_n(String::new(), 9)),
                }
            }
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }
}

/// Least-squares fit of log y = log a + b log x.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub exponent_stderr: f64,
    pub prefactor: f64,
    pub r_squared: f64,
}

pub fn fit_power_law(x: &[f64], y: &[f64]) -> Result<PowerLawFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidParameter("power-law fit needs at least two paired points".into()));
    }
    if x.iter().chain(y).any(|&v| v.is_nan() || v <= 0.0) {
        return Err(Error::InvalidParameter("power-law fit needs positive data".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = ly.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("power-law fit needs distinct x values".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = lx.iter().zip(&ly).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let exponent_stderr = if lx.len() > 2 { (sse / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Ok(PowerLawFit { exponent: slope, exponent_stderr, prefactor: intercept.exp(), r_squared })
}

/// Scan window in Ω_R t for the squeezing minimum at a given N.
///
/// Twisting schemes reach their minimum near N^{-2/3}; two-axis
/// countertwisting near ln N / N.
pub fn scaling_window(kind: SchemeKind, n_atoms: usize) -> f64 {
    let n = n_atoms as f64;
    match kind {
        SchemeKind::OneAxisTwisting | SchemeKind::MolmerSorensen => 6.0 * n.powf(-2.0 / 3.0),
        SchemeKind::TwoAxisRaman => 2.0 * n.ln().max(1.0) / n,
    }
}

/// Grid spacing in Ω_R t used by [`scaling_study`].
pub fn scaling_spacing(n_atoms: usize) -> f64 {
    0.02 / n_atoms as f64
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub n_atoms: usize,
    pub min_variance: f64,
    pub t_min_variance: f64,
    pub min_xi2: f64,
    pub t_min_xi2: f64,
    pub direction_at_min_xi2: [f64; 3],
    pub n_points: usize,
    pub t_max: f64,
    /// Set when either minimum sits on the last grid point.
    pub at_window_edge: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScalingReport {
    pub scheme: SchemeKind,
    pub rabi: f64,
    pub initial: InitialSpec,
    pub points: Vec<ScalingPoint>,
    pub variance_fit: PowerLawFit,
    pub t_min_xi2_fit: PowerLawFit,
    pub t_min_variance_fit: PowerLawFit,
    pub runtime: f64,
}

pub fn validate_n_list(n_list: &[usize]) -> Result<()> {
    if n_list.len() < 2 {
        return Err(Error::InvalidParameter("scaling needs at least two values of N".into()));
    }
    if let Some(&bad) = n_list.iter().find(|&&n| n == 0 || n % 2 != 0 || n > MAX_SCALING_ATOMS) {
        return Err(Error::InvalidParameter(format!(
            "each N must be even and in 2..={MAX_SCALING_ATOMS}, got {bad}"
        )));
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("N list must be strictly ascending".into()));
    }
    Ok(())
}

/// Minimum variance and its time for each N, with log-log fits. One worker
/// per N.
pub fn scaling_study(
    scheme: &CouplingScheme,
    n_list: &[usize],
    initial: Option<InitialSpec>,
) -> Result<ScalingReport> {
    let start = Instant::now();
    validate_n_list(n_list)?;
    let points: Vec<ScalingPoint> = n_list
        .par_iter()
        .map(|&n| {
            let state = match initial {
                Some(spec) => spec.build(n)?,
                None => default_squeezing_initial(scheme.kind, n)?,
            };
            let t_max = scaling_window(scheme.kind, n) / scheme.rabi;
            let n_points = (scaling_window(scheme.kind, n) / scaling_spacing(n)).ceil() as usize + 1;
            let grid = linspace(t_max, n_points);
            let scan = min_squeezing_scan(scheme, &state, &grid)?;
            let last = *grid.last().expect("non-empty grid");
            Ok(ScalingPoint {
                n_atoms: n,
                min_variance: scan.min_variance,
                t_min_variance: scan.t_min_variance,
                min_xi2: scan.xi_sq_min,
                t_min_xi2: scan.t_min,
                direction_at_min_xi2: scan.at_min_xi().direction_n1,
                n_points,
                t_max,
                at_window_edge: scan.t_min == last || scan.t_min_variance == last,
            })
        })
        .collect::<Result<_>>()?;
    let ns: Vec<f64> = points.iter().map(|p| p.n_atoms as f64).collect();
    let col = |f: fn(&ScalingPoint) -> f64| points.iter().map(f).collect::<Vec<f64>>();
    let initial_label = initial.unwrap_or(match scheme.kind {
        SchemeKind::OneAxisTwisting => InitialSpec::Coherent { theta: std::f64::consts::FRAC_PI_2, phi: 0.0 },
        _ => InitialSpec::AllUp,
    });
    Ok(ScalingReport {
        scheme: scheme.kind,
        rabi: scheme.rabi,
        initial: initial_label,
        variance_fit: fit_power_law(&ns, &col(|p| p.min_variance))?,
        t_min_xi2_fit: fit_power_law(&ns, &col(|p| p.t_min_xi2))?,
        t_min_variance_fit: fit_power_law(&ns, &col(|p| p.t_min_variance))?,
        points,
        runtime: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_spec_parsing() {
        assert_eq!("all_up".parse::<InitialSpec>().unwrap(), InitialSpec::AllUp);
        assert_eq!("All-Down".parse::<InitialSpec>().unwrap(), InitialSpec::AllDown);
        assert_eq!(
            "coherent(1.5, 0.25)".parse::<InitialSpec>().unwrap(),
            InitialSpec::Coherent { theta: 1.5, phi: 0.25 }
        );
        assert_eq!(
            "coherent:1,2".parse::<InitialSpec>().unwrap(),
            InitialSpec::Coherent { theta: 1.0, phi: 2.0 }
        );
        assert!("coherent(1)".parse::<InitialSpec>().is_err());
        assert!("sideways".parse::<InitialSpec>().is_err());
        let s = InitialSpec::Coherent { theta: 0.5, phi: -1.0 };
        assert_eq!(s.to_string().parse::<InitialSpec>().unwrap(), s);
    }

    #[test]
    fn linspace_endpoints() {
        let g = linspace(4.0 * std::f64::consts::PI, 10_000);
        assert_eq!(g.len(), 10_000);
        assert_eq!(g[0], 0.0);
        assert_eq!(*g.last().unwrap(), 4.0 * std::f64::consts::PI);
    }

    #[test]
    fn trivial_run() {
        let mut c = RunConfig::new(SchemeKind::TwoAxisRaman, 2, 0.0, 1);
        c.outputs.insert(Output::Moments);
        let out = run(&c).unwrap();
        assert_eq!(out.rows.len(), 1);
        let csv = out.csv_string();
        assert_eq!(csv.lines().count(), 2);
        let xi = out.rows[0].squeezing.unwrap().xi_squared.unwrap();
        assert!((xi - 1.0).abs() < 1e-12);
        assert!(csv.lines().nth(1).unwrap().starts_with("0.0000000000000000e0,1.0000000000000000e0,"));
    }

    #[test]
    fn config_validation() {
        let ok = RunConfig::new(SchemeKind::MolmerSorensen, 10, 1.0, 11);
        assert!(ok.validate().is_ok());
        assert!(RunConfig { n_atoms: 0, ..ok.clone() }.validate().is_err());
        assert!(RunConfig { n_atoms: 9, ..ok.clone() }.validate().is_err());
        assert!(RunConfig { n_points: 1, ..ok.clone() }.validate().is_err());
        assert!(RunConfig { t_max: -1.0, ..ok.clone() }.validate().is_err());
        assert!(RunConfig { rabi: 0.0, ..ok.clone() }.validate().is_err());
        let odd_no_ghz = RunConfig { n_atoms: 9, outputs: [Output::Squeezing].into(), ..ok };
        assert!(odd_no_ghz.validate().is_ok());
    }

    #[test]
    fn under_resolved_squeezing_is_rejected() {
        let c = RunConfig::new(SchemeKind::TwoAxisRaman, 100, 1.0, 11);
        assert!(matches!(run(&c), Err(Error::UnderResolvedGrid { .. })));
        let c = RunConfig { outputs: [Output::GhzFidelity].into(), ..c };
        assert!(run(&c).is_ok());
    }

    #[test]
    fn unrequested_columns_are_empty() {
        let c = RunConfig {
            outputs: [Output::GhzFidelity].into(),
            ..RunConfig::new(SchemeKind::MolmerSorensen, 4, 1.0, 3)
        };
        let csv = run(&c).unwrap().csv_string();
        let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(row.len(), 9);
        assert!(row[1].is_empty() && row[2].is_empty());
        assert!(!row[3].is_empty());
        assert!(row[4..].iter().all(|c| c.is_empty()));
    }

    #[test]
    fn ghz_summary_for_molmer_sorensen() {
        // GHZ at Ω_R t = 2π under (Ω_R/4)(J_x² − N)
        let c = RunConfig {
            outputs: [Output::GhzFidelity, Output::EdgePopulations].into(),
            ..RunConfig::new(SchemeKind::MolmerSorensen, 10, 2.0 * std::f64::consts::PI, 201)
        };
        let s = run(&c).unwrap().summary;
        assert!(s.max_ghz_fidelity.unwrap() > 0.999);
        assert!((s.t_of_max_ghz_fidelity.unwrap() - 2.0 * std::f64::consts::PI).abs() < 1e-9);
        let peak = s.balanced_edge_peak.unwrap();
        assert!(peak.sum > 0.999);
    }

    #[test]
    fn power_law_exact() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(-0.5)).collect();
        let f = fit_power_law(&x, &y).unwrap();
        assert!((f.exponent + 0.5).abs() < 1e-12);
        assert!((f.prefactor - 3.0).abs() < 1e-12);
        assert!(f.exponent_stderr < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        assert!(fit_power_law(&[1.0], &[1.0]).is_err());
        assert!(fit_power_law(&[1.0, 2.0], &[1.0, -1.0]).is_err());
    }

    #[test]
    fn n_list_checks() {
        assert!(validate_n_list(&[128, 256]).is_ok());
        assert!(validate_n_list(&[256, 128]).is_err());
        assert!(validate_n_list(&[127, 256]).is_err());
        assert!(validate_n_list(&[128, 4096]).is_err());
        assert!(validate_n_list(&[128]).is_err());
    }

    #[test]
    fn small_scaling_study_runs() {
        let sc = CouplingScheme::dimensionless(SchemeKind::OneAxisTwisting);
        let r = scaling_study(&sc, &[32, 64, 128], None).unwrap();
        assert_eq!(r.points.len(), 3);
        assert!(r.points.iter().all(|p| !p.at_window_edge));
        assert!(r.variance_fit.exponent > 0.0);
    }

    #[test]
    fn run_config_json_round_trip() {
        let mut c = RunConfig::new(SchemeKind::OneAxisTwisting, 8, 1.0, 5);
        c.initial = Some(InitialSpec::Coherent { theta: 1.0, phi: 0.5 });
        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }
}
