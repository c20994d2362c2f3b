//! Exact unitary evolution c(t) = V e^{−iΛt} Vᵀ c(0) under a time-independent
//! real-symmetric banded Hamiltonian.
//!
//! All three coupling Hamiltonians connect m only to m and m±2, so the even-m
//! and odd-m sectors are diagonalized separately as tridiagonal matrices.

use ndarray::{Array1, Array2, ArrayView2};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spinops::{parity_blocks, parity_indices, BandedHermitian, CouplingScheme, SchemeKind};
use crate::state::DickeState;
use crate::tridiag::{dense_symmetric_eigen, tridiagonal_eigen, Eigenpairs};

/// Largest |Im| tolerated when treating an operator as real symmetric.
const REAL_TOLERANCE: f64 = 1e-14;

/// Eigenpairs of one invariant sector of the operator.
#[derive(Clone, Debug)]
pub struct Sector {
    /// Dicke indices spanned by this sector.
    pub indices: Vec<usize>,
    pub eigenvalues: Array1<f64>,
    /// One eigenvector per row.
    eigvecs_t: Array2<f64>,
}

impl Sector {
    fn from_pairs(indices: Vec<usize>, pairs: Eigenpairs) -> Self {
        let n = indices.len();
        let eigvecs_t = Array2::from_shape_vec((n, n), pairs.vectors).expect("square eigenvector block");
        Self { indices, eigenvalues: Array1::from(pairs.values), eigvecs_t }
    }

    /// Orthogonal matrix with the eigenvectors as columns.
    pub fn eigenvectors(&self) -> ArrayView2<'_, f64> {
        self.eigvecs_t.t()
    }

    /// Vᵀ c restricted to this sector, as (re, im).
    fn project(&self, c: &[C64]) -> (Vec<f64>, Vec<f64>) {
        let re: Vec<f64> = self.indices.iter().map(|&i| c[i].re).collect();
        let im: Vec<f64> = self.indices.iter().map(|&i| c[i].im).collect();
        self.eigvecs_t
            .rows()
            .into_iter()
            .map(|row| {
                let row = row.to_slice().expect("row-major eigenvectors");
                row.iter()
                    .zip(re.iter().zip(&im))
                    .fold((0.0, 0.0), |(a, b), (v, (r, i))| (a + v * r, b + v * i))
            })
            .unzip()
    }

    /// Writes V e^{−iΛt} a into the sector's slots of `out`.
    fn synthesize(&self, a_re: &[f64], a_im: &[f64], t: f64, out: &mut [C64]) {
        let n = self.indices.len();
        let mut c_re = vec![0.0; n];
        let mut c_im = vec![0.0; n];
        for (k, row) in self.eigvecs_t.rows().into_iter().enumerate() {
            let (s, co) = (-self.eigenvalues[k] * t).sin_cos();
            let b_re = co * a_re[k] - s * a_im[k];
            let b_im = s * a_re[k] + co * a_im[k];
            let row = row.to_slice().expect("row-major eigenvectors");
            for ((v, x), y) in row.iter().zip(c_re.iter_mut()).zip(c_im.iter_mut()) {
                *x += v * b_re;
                *y += v * b_im;
            }
        }
        for (j, &i) in self.indices.iter().enumerate() {
            out[i] = C64::new(c_re[j], c_im[j]);
        }
    }
}

/// A state expanded in the eigenbasis of a [`SpectralDecomposition`], so
/// that each later time costs one pass over the eigenvectors.
#[derive(Clone, Debug)]
pub struct ProjectedState {
    initial: DickeState,
    coeffs: Vec<(Vec<f64>, Vec<f64>)>,
}

/// Full spectrum of an operator, split into invariant sectors.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    dim: usize,
    sectors: Vec<Sector>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sectors(&self) -> &[Sector] {
        &self.sectors
    }

    /// All eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut all: Vec<f64> = self.sectors.iter().flat_map(|s| s.eigenvalues.iter().copied()).collect();
        all.sort_by(f64::total_cmp);
        all
    }

    /// Eigenvectors embedded in the full Dicke basis, one per column, in
    /// sector order.
    pub fn eigenvector_matrix(&self) -> Array2<f64> {
        let mut v = Array2::zeros((self.dim, self.dim));
        let mut col = 0;
        for s in &self.sectors {
            let sv = s.eigenvectors();
            for k in 0..s.indices.len() {
                for (j, &i) in s.indices.iter().enumerate() {
                    v[[i, col]] = sv[[j, k]];
                }
                col += 1;
            }
        }
        v
    }

    /// Eigenvalues in the same order as the columns of [`Self::eigenvector_matrix`].
    pub fn eigenvalues_in_sector_order(&self) -> Vec<f64> {
        self.sectors.iter().flat_map(|s| s.eigenvalues.iter().copied()).collect()
    }

    /// V diag(λ) Vᵀ.
    pub fn reconstruct(&self) -> Array2<f64> {
        let v = self.eigenvector_matrix();
        let lam = Array1::from(self.eigenvalues_in_sector_order());
        let scaled = &v * &lam;
        scaled.dot(&v.t())
    }

    pub fn project(&self, state: &DickeState) -> Result<ProjectedState> {
        if state.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: state.dim() });
        }
        let coeffs = self.sectors.iter().map(|s| s.project(state.amplitudes())).collect();
        Ok(ProjectedState { initial: state.clone(), coeffs })
    }

    /// State at time `t` from a projection made by [`Self::project`].
    pub fn evolve_projected(&self, p: &ProjectedState, t: f64) -> DickeState {
        if t == 0.0 {
            return p.initial.clone();
        }
        let mut out = vec![C64::new(0.0, 0.0); self.dim];
        for (s, (a_re, a_im)) in self.sectors.iter().zip(&p.coeffs) {
            s.synthesize(a_re, a_im, t, &mut out);
        }
        DickeState::from_unitary_image(p.initial.n_atoms(), out)
    }

    /// max |VᵀV − I|.
    pub fn orthonormality_error(&self) -> f64 {
        let v = self.eigenvector_matrix();
        let g = v.t().dot(&v);
        g.indexed_iter().map(|((i, j), x)| (x - if i == j { 1.0 } else { 0.0 }).abs()).fold(0.0, f64::max)
    }
}

fn require_real(h: &BandedHermitian) -> Result<()> {
    let max_imag = h.max_imag();
    if max_imag > REAL_TOLERANCE {
        Err(Error::NotRealSymmetric { max_imag })
    } else {
        Ok(())
    }
}

fn real_diagonal(h: &BandedHermitian, k: usize) -> Vec<f64> {
    h.diagonal(k).map_or_else(Vec::new, |d| d.iter().map(|c| c.re).collect())
}

fn diagonalize_block(h: &BandedHermitian) -> Result<Eigenpairs> {
    let n = h.dim();
    let diag = real_diagonal(h, 0);
    match h.bandwidth() {
        0 => tridiagonal_eigen(&diag, &vec![0.0; n.saturating_sub(1)]),
        1 => tridiagonal_eigen(&diag, &real_diagonal(h, 1)),
        _ => {
            let dense: Vec<f64> = h.to_dense().iter().map(|c| c.re).collect();
            dense_symmetric_eigen(&dense, n)
        }
    }
}

/// Spectrum and orthonormal eigenbasis of a real-symmetric banded operator.
///
/// Operators without odd-offset bands are split into parity sectors first.
pub fn diagonalize(h: &BandedHermitian) -> Result<SpectralDecomposition> {
    require_real(h)?;
    let dim = h.dim();
    let sectors = if dim > 1 && !h.has_odd_band() {
        let (even, odd) = parity_blocks(h)?;
        let (ei, oi) = parity_indices(dim);
        let (pe, po) = rayon::join(|| diagonalize_block(&even), || diagonalize_block(&odd));
        vec![Sector::from_pairs(ei, pe?), Sector::from_pairs(oi, po?)]
    } else {
        vec![Sector::from_pairs((0..dim).collect(), diagonalize_block(h)?)]
    };
    Ok(SpectralDecomposition { dim, sectors })
}

/// Evolves `state` for dimensionless time `t` (Ω_R t when Ω_R = 1).
pub fn evolve(state: &DickeState, spec: &SpectralDecomposition, t: f64) -> Result<DickeState> {
    if state.dim() != spec.dim {
        return Err(Error::DimensionMismatch { expected: spec.dim, found: state.dim() });
    }
    if t == 0.0 {
        return Ok(state.clone());
    }
    Ok(spec.evolve_projected(&spec.project(state)?, t))
}

/// Checks a grid is nonempty and strictly ascending.
pub fn validate_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if let Some(index) =
        t_grid.windows(2).position(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater))
    {
        return Err(Error::NonAscendingGrid { index: index + 1 });
    }
    Ok(())
}

/// One independent [`evolve`] per grid point, all from the same initial state.
pub fn evolve_series(
    state: &DickeState,
    spec: &SpectralDecomposition,
    t_grid: &[f64],
) -> Result<Vec<DickeState>> {
    validate_grid(t_grid)?;
    t_grid.par_iter().map(|&t| evolve(state, spec, t)).collect()
}

/// One-axis twisting in closed form: c_m(t) = c_m(0) e^{−i(Ω_R/2) j_z(m)² t}.
pub fn evolve_diagonal(state: &DickeState, scheme: &CouplingScheme, t: f64) -> Result<DickeState> {
    if scheme.kind != SchemeKind::OneAxisTwisting {
        return Err(Error::WrongScheme { expected: "one-axis-twisting" });
    }
    let n = state.n_atoms();
    let amps = state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(m, c)| {
            let jz = DickeState::jz_of(n, m);
            // same rounding as the banded J_z² scaled by Ω_R/2
            let lambda = jz * jz * (scheme.rabi / 2.0);
            c * C64::from_polar(1.0, -lambda * t)
        })
        .collect();
    Ok(DickeState::from_unitary_image(n, amps))
}

/// Evolution engine for one scheme: the closed form for one-axis twisting,
/// the spectral path otherwise.
#[derive(Clone, Debug)]
pub enum Evolver {
    Diagonal(CouplingScheme),
    Spectral(SpectralDecomposition),
}

impl Evolver {
    pub fn for_scheme(scheme: &CouplingScheme, n_atoms: usize) -> Result<Self> {
        match scheme.kind {
            SchemeKind::OneAxisTwisting => {
                if n_atoms == 0 {
                    return Err(Error::ZeroAtoms);
                }
                Ok(Evolver::Diagonal(*scheme))
            }
            _ => Ok(Evolver::Spectral(diagonalize(&crate::spinops::hamiltonian(scheme, n_atoms)?)?)),
        }
    }

    pub fn evolve(&self, state: &DickeState, t: f64) -> Result<DickeState> {
        match self {
            Evolver::Diagonal(s) => evolve_diagonal(state, s, t),
            Evolver::Spectral(spec) => evolve(state, spec, t),
        }
    }

    /// Fixes the initial state for repeated evaluation at many times.
    pub fn prepare(&self, state: &DickeState) -> Result<Prepared<'_>> {
        let projected = match self {
            Evolver::Diagonal(_) => None,
            Evolver::Spectral(spec) => Some(spec.project(state)?),
        };
        Ok(Prepared { evolver: self, initial: state.clone(), projected })
    }
}

/// An [`Evolver`] bound to one initial state.
pub struct Prepared<'a> {
    evolver: &'a Evolver,
    initial: DickeState,
    projected: Option<ProjectedState>,
}

impl Prepared<'_> {
    pub fn at(&self, t: f64) -> Result<DickeState> {
        match (self.evolver, &self.projected) {
            (Evolver::Spectral(spec), Some(p)) => Ok(spec.evolve_projected(p, t)),
            (Evolver::Diagonal(s), _) => evolve_diagonal(&self.initial, s, t),
            (Evolver::Spectral(_), None) => unreachable!("spectral evolver always projects"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spinops::{collective_op, hamiltonian, Axis};
    use crate::state::{all_up_state, coherent_spin_state};

    fn scheme(kind: SchemeKind) -> CouplingScheme {
        CouplingScheme::dimensionless(kind)
    }

    fn max_diff(a: &DickeState, b: &DickeState) -> f64 {
        a.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn one_axis_spectrum_two_atoms() {
        let spec = diagonalize(&hamiltonian(&scheme(SchemeKind::OneAxisTwisting), 2).unwrap()).unwrap();
        let ev = spec.eigenvalues();
        assert_eq!(ev, vec![0.0, 0.5, 0.5]);
    }

    #[test]
    fn two_axis_spectrum_two_atoms() {
        // even block {m=0, m=2} is [[0, ½], [½, 0]] → ±½; odd block {m=1} is 0
        let spec = diagonalize(&hamiltonian(&scheme(SchemeKind::TwoAxisRaman), 2).unwrap()).unwrap();
        let ev = spec.eigenvalues();
        for (a, b) in ev.iter().zip([-0.5, 0.0, 0.5]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn casimir_spectrum_flat() {
        let n = 9;
        let c = collective_op(n, Axis::X)
            .unwrap()
            .square()
            .add(&collective_op(n, Axis::Y).unwrap().square())
            .unwrap()
            .add(&collective_op(n, Axis::Z).unwrap().square())
            .unwrap();
        let s = n as f64 / 2.0;
        for ev in diagonalize(&c).unwrap().eigenvalues() {
            assert!((ev - s * (s + 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_complex_operator() {
        let jy = collective_op(3, Axis::Y).unwrap();
        assert!(matches!(diagonalize(&jy), Err(Error::NotRealSymmetric { .. })));
    }

    #[test]
    fn tridiagonal_without_parity() {
        let jx = collective_op(6, Axis::X).unwrap();
        let spec = diagonalize(&jx).unwrap();
        assert_eq!(spec.sectors().len(), 1);
        for (ev, want) in spec.eigenvalues().iter().zip([-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0]) {
            assert!((ev - want).abs() < 1e-12);
        }
    }

    #[test]
    fn pentadiagonal_fallback() {
        let n = 7;
        let h = collective_op(n, Axis::X).unwrap().square().add(&collective_op(n, Axis::X).unwrap()).unwrap();
        let spec = diagonalize(&h).unwrap();
        let dense = h.to_dense().mapv(|c| c.re);
        let err = (&spec.reconstruct() - &dense).iter().map(|x| x.abs()).fold(0.0, f64::max);
        assert!(err < 1e-12);
        // J_x eigenvalues j give j² + j
        let mut want: Vec<f64> = (-7..=7).step_by(2).map(|k| k as f64 / 2.0).map(|j| j * j + j).collect();
        want.sort_by(f64::total_cmp);
        for (a, b) in spec.eigenvalues().iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn decomposition_invariants() {
        for kind in SchemeKind::ALL {
            let h = hamiltonian(&scheme(kind), 40).unwrap();
            let spec = diagonalize(&h).unwrap();
            assert!(spec.orthonormality_error() < 1e-10, "{kind}");
            let dense = h.to_dense().mapv(|c| c.re);
            let err = (&spec.reconstruct() - &dense).iter().map(|x| x.abs()).fold(0.0, f64::max);
            assert!(err < 1e-9 * h.frobenius_norm(), "{kind} reconstruction {err}");
        }
    }

    #[test]
    fn t_zero_is_identity() {
        let spec = diagonalize(&hamiltonian(&scheme(SchemeKind::TwoAxisRaman), 10).unwrap()).unwrap();
        let s = coherent_spin_state(10, 0.4, 1.0).unwrap();
        assert!(max_diff(&evolve(&s, &spec, 0.0).unwrap(), &s) < 1e-14);
    }

    #[test]
    fn composition() {
        let spec = diagonalize(&hamiltonian(&scheme(SchemeKind::MolmerSorensen), 30).unwrap()).unwrap();
        let s = coherent_spin_state(30, 1.0, 0.3).unwrap();
        let once = evolve(&s, &spec, 1.7).unwrap();
        let twice = evolve(&evolve(&s, &spec, 0.6).unwrap(), &spec, 1.1).unwrap();
        assert!(max_diff(&once, &twice) < 1e-9);
    }

    #[test]
    fn dimension_mismatch() {
        let spec = diagonalize(&hamiltonian(&scheme(SchemeKind::TwoAxisRaman), 4).unwrap()).unwrap();
        let s = all_up_state(5).unwrap();
        assert!(matches!(evolve(&s, &spec, 1.0), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn diagonal_path_matches_spectral() {
        let n = 100;
        let sc = scheme(SchemeKind::OneAxisTwisting);
        let spec = diagonalize(&hamiltonian(&sc, n).unwrap()).unwrap();
        let s = coherent_spin_state(n, 1.3, 0.2).unwrap();
        for t in [0.0, 0.01, 0.37, 2.0] {
            let a = evolve_diagonal(&s, &sc, t).unwrap();
            let b = evolve(&s, &spec, t).unwrap();
            assert!(max_diff(&a, &b) < 1e-12, "t={t}");
            for (x, y) in a.amplitudes().iter().zip(s.amplitudes()) {
                assert!((x.norm() - y.norm()).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn diagonal_rejects_other_schemes() {
        let s = all_up_state(4).unwrap();
        let r = evolve_diagonal(&s, &scheme(SchemeKind::TwoAxisRaman), 1.0);
        assert!(matches!(r, Err(Error::WrongScheme { .. })));
    }

    #[test]
    fn series_grid_validation() {
        let spec = diagonalize(&hamiltonian(&scheme(SchemeKind::TwoAxisRaman), 4).unwrap()).unwrap();
        let s = all_up_state(4).unwrap();
        assert!(matches!(evolve_series(&s, &spec, &[]), Err(Error::EmptyGrid)));
        assert!(matches!(
            evolve_series(&s, &spec, &[0.0, 0.2, 0.1]),
            Err(Error::NonAscendingGrid { index: 2 })
        ));
        let single = evolve_series(&s, &spec, &[0.0]).unwrap();
        assert_eq!(single[0], s);
        let two = evolve_series(&s, &spec, &[0.3, 0.9]).unwrap();
        assert_eq!(two[0], evolve(&s, &spec, 0.3).unwrap());
        assert_eq!(two[1], evolve(&s, &spec, 0.9).unwrap());
    }
}
