//! Pure states of N two-level bosons in the symmetric two-mode basis.
//!
//! Basis ket `m` is |m⟩_↓ |N−m⟩_↑: `m` counts atoms in the spin-down state, so
//! J_z = (N − 2m)/2 on ket `m`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on Σ|c_m|² − 1 accepted for a constructed state.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Amplitudes c_m over the (N+1)-dimensional Dicke basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateRepr", into = "StateRepr")]
pub struct DickeState {
    n_atoms: usize,
    amplitudes: Vec<C64>,
}

#[derive(Serialize, Deserialize)]
struct StateRepr {
    n_atoms: usize,
    amplitudes: Vec<[f64; 2]>,
}

impl TryFrom<StateRepr> for DickeState {
    type Error = Error;

    fn try_from(repr: StateRepr) -> Result<Self> {
        let amps = repr.amplitudes.iter().map(|&[re, im]| C64::new(re, im)).collect();
        DickeState::new(repr.n_atoms, amps)
    }
}

impl From<DickeState> for StateRepr {
    fn from(state: DickeState) -> Self {
        StateRepr {
            n_atoms: state.n_atoms,
            amplitudes: state.amplitudes.iter().map(|c| [c.re, c.im]).collect(),
        }
    }
}

fn check_atoms(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::ZeroAtoms)
    } else {
        Ok(())
    }
}

impl DickeState {
    /// Wraps amplitudes that are already normalized (within [`NORM_TOLERANCE`]).
    pub fn new(n_atoms: usize, amplitudes: Vec<C64>) -> Result<Self> {
        check_atoms(n_atoms)?;
        if amplitudes.len() != n_atoms + 1 {
            return Err(Error::DimensionMismatch { expected: n_atoms + 1, found: amplitudes.len() });
        }
        let norm_sq: f64 = amplitudes.iter().map(|c| c.norm_sqr()).sum();
        if !norm_sq.is_finite() || (norm_sq - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(Self { n_atoms, amplitudes })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(n_atoms: usize, mut amplitudes: Vec<C64>) -> Result<Self> {
        check_atoms(n_atoms)?;
        if amplitudes.len() != n_atoms + 1 {
            return Err(Error::DimensionMismatch { expected: n_atoms + 1, found: amplitudes.len() });
        }
        let norm_sq: f64 = amplitudes.iter().map(|c| c.norm_sqr()).sum();
        if norm_sq.is_nan() || norm_sq <= 0.0 || !norm_sq.is_finite() {
            return Err(Error::NotNormalized { norm_sq });
        }
        let scale = norm_sq.sqrt().recip();
        amplitudes.iter_mut().for_each(|c| *c *= scale);
        Ok(Self { n_atoms, amplitudes })
    }

    /// Internal constructor for unitary images of valid states.
    pub(crate) fn from_unitary_image(n_atoms: usize, amplitudes: Vec<C64>) -> Self {
        debug_assert_eq!(amplitudes.len(), n_atoms + 1);
        Self { n_atoms, amplitudes }
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, m: usize) -> C64 {
        self.amplitudes[m]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &DickeState) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    /// |⟨self|other⟩|², insensitive to global phase.
    pub fn overlap(&self, other: &DickeState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Multiplies every amplitude by e^{iα}.
    pub fn with_global_phase(&self, alpha: f64) -> DickeState {
        let phase = C64::from_polar(1.0, alpha);
        Self { n_atoms: self.n_atoms, amplitudes: self.amplitudes.iter().map(|c| c * phase).collect() }
    }

    /// Relabels ↑ ↔ ↓, i.e. c_m → c_{N−m}.
    pub fn spin_flipped(&self) -> DickeState {
        Self { n_atoms: self.n_atoms, amplitudes: self.amplitudes.iter().rev().copied().collect() }
    }

    /// J_z eigenvalue (N − 2m)/2 of basis ket `m`.
    pub fn jz_of(n_atoms: usize, m: usize) -> f64 {
        (n_atoms as f64 - 2.0 * m as f64) / 2.0
    }
}

/// All atoms spin up: c_m = δ_{0m}, the J_z = +N/2 eigenstate.
pub fn all_up_state(n_atoms: usize) -> Result<DickeState> {
    basis_state(n_atoms, 0)
}

/// All atoms spin down: c_m = δ_{Nm}, the J_z = −N/2 eigenstate.
pub fn all_down_state(n_atoms: usize) -> Result<DickeState> {
    basis_state(n_atoms, n_atoms)
}

/// Dicke basis ket `m`.
pub fn basis_state(n_atoms: usize, m: usize) -> Result<DickeState> {
    check_atoms(n_atoms)?;
    if m > n_atoms {
        return Err(Error::InvalidParameter(format!("basis index {m} exceeds N = {n_atoms}")));
    }
    let mut amps = vec![C64::new(0.0, 0.0); n_atoms + 1];
    amps[m] = C64::new(1.0, 0.0);
    Ok(DickeState { n_atoms, amplitudes: amps })
}

/// Every atom in cos(θ/2)|↑⟩ + e^{iφ} sin(θ/2)|↓⟩.
///
/// c_m = √C(N,m) cos(θ/2)^{N−m} (e^{iφ} sin(θ/2))^m. The binomial weights are
/// accumulated in log space so large N does not overflow.
pub fn coherent_spin_state(n_atoms: usize, theta: f64, phi: f64) -> Result<DickeState> {
    check_atoms(n_atoms)?;
    if !theta.is_finite() || !phi.is_finite() {
        return Err(Error::InvalidParameter("coherent state angles must be finite".into()));
    }
    let (s, c) = (theta / 2.0).sin_cos();
    let n = n_atoms;
    let mut amps = vec![C64::new(0.0, 0.0); n + 1];
    let ln_c = c.abs().ln();
    let ln_s = s.abs().ln();
    let mut ln_binom = 0.0_f64;
    for (m, amp) in amps.iter_mut().enumerate() {
        if m > 0 {
            ln_binom += ((n - m + 1) as f64).ln() - (m as f64).ln();
        }
        let up = n - m;
        // 0^0 = 1 at the poles
        let mag_ln = 0.5 * ln_binom
            + if up == 0 { 0.0 } else { up as f64 * ln_c }
            + if m == 0 { 0.0 } else { m as f64 * ln_s };
        if mag_ln == f64::NEG_INFINITY {
            continue;
        }
        let mut sign = 1.0;
        if c < 0.0 && up % 2 == 1 {
            sign = -sign;
        }
        if s < 0.0 && m % 2 == 1 {
            sign = -sign;
        }
        *amp = C64::from_polar(sign * mag_ln.exp(), m as f64 * phi);
    }
    DickeState::normalized(n, amps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn close(a: &DickeState, b: &DickeState, tol: f64) -> bool {
        a.amplitudes().iter().zip(b.amplitudes()).all(|(x, y)| (x - y).norm() < tol)
    }

    #[test]
    fn all_up_is_delta() {
        let s = all_up_state(4).unwrap();
        let want = [1.0, 0.0, 0.0, 0.0, 0.0];
        for (c, w) in s.amplitudes().iter().zip(want) {
            assert_eq!(*c, C64::new(w, 0.0));
        }
        let big = all_up_state(1000).unwrap();
        assert_eq!(big.dim(), 1001);
        assert_eq!(big.amplitude(0), C64::new(1.0, 0.0));
    }

    #[test]
    fn all_down_is_mirror() {
        let s = all_down_state(4).unwrap();
        assert_eq!(s.amplitude(4), C64::new(1.0, 0.0));
        assert!(s.amplitudes()[..4].iter().all(|c| c.norm() == 0.0));
        assert_eq!(s, all_up_state(4).unwrap().spin_flipped());
    }

    #[test]
    fn zero_atoms_rejected() {
        assert!(matches!(all_up_state(0), Err(Error::ZeroAtoms)));
        assert!(matches!(coherent_spin_state(0, 0.0, 0.0), Err(Error::ZeroAtoms)));
    }

    #[test]
    fn coherent_poles() {
        let up = coherent_spin_state(4, 0.0, 0.0).unwrap();
        assert!(close(&up, &all_up_state(4).unwrap(), 1e-15));
        let down = coherent_spin_state(4, PI, 0.0).unwrap();
        assert!(close(&down, &all_down_state(4).unwrap(), 1e-15));
    }

    #[test]
    fn coherent_equator_two_atoms() {
        // (|↑⟩+|↓⟩)^{⊗2}/2 = ½|↑↑⟩ + ½(|↑↓⟩+|↓↑⟩) + ½|↓↓⟩ → (1/2, 1/√2, 1/2)
        let s = coherent_spin_state(2, PI / 2.0, 0.0).unwrap();
        let want = [0.5, FRAC_1_SQRT_2, 0.5];
        for (c, w) in s.amplitudes().iter().zip(want) {
            assert!((c - C64::new(w, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn coherent_large_n_normalized() {
        let s = coherent_spin_state(2000, 1.1, 0.4).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_unnormalized_and_wrong_length() {
        let amps = vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)];
        assert!(matches!(DickeState::new(1, amps.clone()), Err(Error::NotNormalized { .. })));
        assert!(matches!(DickeState::new(2, amps), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn json_round_trip() {
        let s = coherent_spin_state(3, 0.7, -1.2).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.contains("\"n_atoms\":3"));
        let back: DickeState = serde_json::from_str(&text).unwrap();
        assert_eq!(s, back);
        let bad = r#"{"n_atoms":1,"amplitudes":[[1.0,0.0],[1.0,0.0]]}"#;
        assert!(serde_json::from_str::<DickeState>(bad).is_err());
    }
}
