//! Spin moments, the squeezing parameter ξ², GHZ fidelity and edge
//! populations.

use std::f64::consts::PI;

use nalgebra::{Matrix3, SymmetricEigen};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagator::{validate_grid, Evolver};
use crate::spinops::{collective_op, Axis, BandedHermitian, CouplingScheme, SchemeKind};
use crate::state::{all_up_state, coherent_spin_state, DickeState};

/// Mean spin below this fraction of N leaves ξ² undefined.
pub const DEGENERATE_MEAN_FRACTION: f64 = 1e-6;

/// Amplitudes smaller than this carry no usable phase.
const PHASE_FLOOR: f64 = 1e-14;

/// First and second moments of (J_x, J_y, J_z).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinMoments {
    pub mean: [f64; 3],
    /// Cov(J_a, J_b) = ⟨J_aJ_b + J_bJ_a⟩/2 − ⟨J_a⟩⟨J_b⟩.
    pub covariance: [[f64; 3]; 3],
}

impl SpinMoments {
    pub fn mean_norm(&self) -> f64 {
        self.mean.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// nᵀ C n for a unit vector n.
    pub fn variance_along(&self, n: [f64; 3]) -> f64 {
        let c = &self.covariance;
        (0..3).map(|a| (0..3).map(|b| n[a] * c[a][b] * n[b]).sum::<f64>()).sum()
    }

    pub fn trace(&self) -> f64 {
        (0..3).map(|a| self.covariance[a][a]).sum()
    }
}

/// The nine banded operators needed for [`SpinMoments`], built once per N.
#[derive(Clone, Debug)]
pub struct MomentOperators {
    n_atoms: usize,
    linear: [BandedHermitian; 3],
    /// Symmetrized products in the order xx, yy, zz, xy, xz, yz.
    quadratic: [BandedHermitian; 6],
}

impl MomentOperators {
    pub fn new(n_atoms: usize) -> Result<Self> {
        let [jx, jy, jz] = [Axis::X, Axis::Y, Axis::Z].map(|a| collective_op(n_atoms, a));
        let (jx, jy, jz) = (jx?, jy?, jz?);
        let quadratic = [
            jx.square(),
            jy.square(),
            jz.square(),
            jx.anticommutator(&jy)?,
            jx.anticommutator(&jz)?,
            jy.anticommutator(&jz)?,
        ];
        Ok(Self { n_atoms, linear: [jx, jy, jz], quadratic })
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn moments(&self, state: &DickeState) -> Result<SpinMoments> {
        let mut mean = [0.0; 3];
        for (m, op) in mean.iter_mut().zip(&self.linear) {
            *m = op.expectation(state)?;
        }
        let mut second = [0.0; 6];
        for (s, op) in second.iter_mut().zip(&self.quadratic) {
            *s = op.expectation(state)?;
        }
        let [xx, yy, zz, xy, xz, yz] = second;
        let sym = [[xx, xy, xz], [xy, yy, yz], [xz, yz, zz]];
        let mut covariance = [[0.0; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                covariance[a][b] = sym[a][b] - mean[a] * mean[b];
            }
        }
        Ok(SpinMoments { mean, covariance })
    }

    pub fn squeezing(&self, state: &DickeState) -> Result<SqueezingResult> {
        Ok(squeezing_from_moments(&self.moments(state)?, self.n_atoms))
    }
}

/// Exact moments from the banded J operators; O(N).
pub fn spin_moments(state: &DickeState) -> Result<SpinMoments> {
    MomentOperators::new(state.n_atoms())?.moments(state)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqueezingResult {
    /// N·min_variance/|⟨J⟩|²; `None` when the mean spin is degenerate.
    pub xi_squared: Option<f64>,
    /// (ΔJ_{n1})².
    pub min_variance: f64,
    pub direction_n1: [f64; 3],
    pub mean_spin_norm: f64,
    pub degenerate_flag: bool,
}

/// Flips `v` so its first non-negligible component is positive.
fn canonical_sign(v: [f64; 3]) -> [f64; 3] {
    match v.iter().find(|x| x.abs() > 1e-12) {
        Some(&x) if x < 0.0 => [-v[0], -v[1], -v[2]],
        _ => v,
    }
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a.iter().zip(&b).map(|(x, y)| x * y).sum()
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = dot(v, v).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

/// Orthonormal pair spanning the plane normal to unit vector `n`.
fn transverse_basis(n: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let seed = if n[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let d = dot(seed, n);
    let e1 = normalize([seed[0] - d * n[0], seed[1] - d * n[1], seed[2] - d * n[2]]);
    (e1, cross(n, e1))
}

/// Minimizes the variance over directions normal to the mean spin.
pub fn squeezing_from_moments(mom: &SpinMoments, n_atoms: usize) -> SqueezingResult {
    let norm = mom.mean_norm();
    if norm < DEGENERATE_MEAN_FRACTION * n_atoms as f64 {
        let c = Matrix3::from_fn(|a, b| mom.covariance[a][b]);
        let eig = SymmetricEigen::new(c);
        let k = eig.eigenvalues.imin();
        let v = eig.eigenvectors.column(k);
        return SqueezingResult {
            xi_squared: None,
            min_variance: eig.eigenvalues[k],
            direction_n1: canonical_sign([v[0], v[1], v[2]]),
            mean_spin_norm: norm,
            degenerate_flag: true,
        };
    }
    let n = [mom.mean[0] / norm, mom.mean[1] / norm, mom.mean[2] / norm];
    let (e1, e2) = transverse_basis(n);
    let a = mom.variance_along(e1);
    let c = mom.variance_along(e2);
    let cov = &mom.covariance;
    let b: f64 = (0..3).map(|i| (0..3).map(|j| e1[i] * cov[i][j] * e2[j]).sum::<f64>()).sum();
    // smaller eigenvalue of [[a, b], [b, c]]
    let half_gap = ((a - c) / 2.0).hypot(b);
    let lambda = (a + c) / 2.0 - half_gap;
    let angle = 0.5 * (2.0 * b).atan2(a - c) + PI / 2.0;
    let (s, co) = angle.sin_cos();
    let dir = normalize([co * e1[0] + s * e2[0], co * e1[1] + s * e2[1], co * e1[2] + s * e2[2]]);
    SqueezingResult {
        xi_squared: Some(n_atoms as f64 * lambda / (norm * norm)),
        min_variance: lambda,
        direction_n1: canonical_sign(dir),
        mean_spin_norm: norm,
        degenerate_flag: false,
    }
}

/// ξ² = N (ΔJ_{n1})² / |⟨J⟩|² with n₁ ⊥ ⟨J⟩ chosen to minimize the variance.
pub fn squeezing(state: &DickeState) -> Result<SqueezingResult> {
    Ok(squeezing_from_moments(&spin_moments(state)?, state.n_atoms()))
}

/// Largest amount by which the reported minimum exceeds the variance along
/// `samples` random unit vectors normal to ⟨J⟩. Non-positive means optimal.
pub fn direction_optimality_margin<R: Rng>(
    mom: &SpinMoments,
    result: &SqueezingResult,
    samples: usize,
    rng: &mut R,
) -> f64 {
    let norm = mom.mean_norm();
    if norm == 0.0 {
        return f64::NEG_INFINITY;
    }
    let n = [mom.mean[0] / norm, mom.mean[1] / norm, mom.mean[2] / norm];
    let (e1, e2) = transverse_basis(n);
    (0..samples)
        .map(|_| {
            let phi: f64 = rng.gen_range(0.0..2.0 * PI);
            let (s, c) = phi.sin_cos();
            let u = [c * e1[0] + s * e2[0], c * e1[1] + s * e2[1], c * e1[2] + s * e2[2]];
            result.min_variance - mom.variance_along(u)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GhzOverlap {
    /// max_η |⟨GHZ(η)|ψ⟩|² = (|c_0| + |c_N|)²/2.
    pub fidelity: f64,
    /// arg(c_N) − arg(c_0) in (−π, π]; 0 when either amplitude vanishes.
    pub eta_phase: f64,
}

pub fn ghz_fidelity(state: &DickeState) -> GhzOverlap {
    let c0 = state.amplitude(0);
    let cn = state.amplitude(state.n_atoms());
    let fidelity = (c0.norm() + cn.norm()).powi(2) / 2.0;
    let eta_phase = if c0.norm() < PHASE_FLOOR || cn.norm() < PHASE_FLOOR {
        0.0
    } else {
        wrap_phase(cn.arg() - c0.arg())
    };
    GhzOverlap { fidelity, eta_phase }
}

fn wrap_phase(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// (|c_0|², |c_N|²).
pub fn edge_populations(state: &DickeState) -> (f64, f64) {
    (state.amplitude(0).norm_sqr(), state.amplitude(state.n_atoms()).norm_sqr())
}

/// Initial state used for squeezing scans when none is given.
///
/// One-axis twisting starts on the equator, since J_z² leaves the poles
/// invariant. The other schemes start from c_0 = 1.
pub fn default_squeezing_initial(kind: SchemeKind, n_atoms: usize) -> Result<DickeState> {
    match kind {
        SchemeKind::OneAxisTwisting => coherent_spin_state(n_atoms, PI / 2.0, 0.0),
        _ => all_up_state(n_atoms),
    }
}

/// Grid spacing bound in Ω_R t units.
pub fn max_scan_spacing(n_atoms: usize) -> f64 {
    0.1 / n_atoms as f64
}

/// Rejects grids too coarse for the 1/(NΩ_R) squeezing timescale.
pub fn check_resolution(scheme: &CouplingScheme, n_atoms: usize, t_grid: &[f64]) -> Result<()> {
    let limit = max_scan_spacing(n_atoms);
    let spacing = t_grid.windows(2).map(|w| (w[1] - w[0]) * scheme.rabi).fold(0.0, f64::max);
    if spacing > limit * (1.0 + 1e-12) {
        return Err(Error::UnderResolvedGrid { spacing, limit });
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SqueezingScan {
    /// Grid time of the smallest ξ².
    pub t_min: f64,
    pub xi_sq_min: f64,
    /// Grid time of the smallest transverse variance.
    pub t_min_variance: f64,
    pub min_variance: f64,
    pub times: Vec<f64>,
    pub trajectory: Vec<SqueezingResult>,
}

impl SqueezingScan {
    pub fn at_min_xi(&self) -> &SqueezingResult {
        let i = self.times.iter().position(|&t| t == self.t_min).unwrap_or(0);
        &self.trajectory[i]
    }
}

/// ξ²(t) on `t_grid` starting from `initial`.
pub fn min_squeezing_scan(
    scheme: &CouplingScheme,
    initial: &DickeState,
    t_grid: &[f64],
) -> Result<SqueezingScan> {
    let n = initial.n_atoms();
    validate_grid(t_grid)?;
    check_resolution(scheme, n, t_grid)?;
    let evolver = Evolver::for_scheme(scheme, n)?;
    let prepared = evolver.prepare(initial)?;
    let ops = MomentOperators::new(n)?;
    let trajectory: Vec<SqueezingResult> =
        t_grid.par_iter().map(|&t| ops.squeezing(&prepared.at(t)?)).collect::<Result<_>>()?;
    let (mut t_min, mut xi_sq_min) = (t_grid[0], f64::INFINITY);
    let (mut t_min_variance, mut min_variance) = (t_grid[0], f64::INFINITY);
    for (&t, r) in t_grid.iter().zip(&trajectory) {
        if let Some(x) = r.xi_squared {
            if x < xi_sq_min {
                xi_sq_min = x;
                t_min = t;
            }
        }
        if r.min_variance < min_variance {
            min_variance = r.min_variance;
            t_min_variance = t;
        }
    }
    Ok(SqueezingScan { t_min, xi_sq_min, t_min_variance, min_variance, times: t_grid.to_vec(), trajectory })
}
