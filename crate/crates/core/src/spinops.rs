//! Collective spin operators and the three coupling Hamiltonians, stored as
//! banded Hermitian matrices on the Dicke basis.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::DickeState;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Hermitian matrix stored by its upper diagonals.
///
/// `diagonals[k][i]` is the element (i, i+k); the lower triangle is the
/// conjugate. The main diagonal is kept real so the reconstruction is exactly
/// Hermitian.
#[derive(Clone, Debug, PartialEq)]
pub struct BandedHermitian {
    dim: usize,
    diagonals: Vec<Vec<C64>>,
}

impl BandedHermitian {
    pub fn new(dim: usize, diagonals: Vec<Vec<C64>>) -> Result<Self> {
        if dim == 0 || diagonals.is_empty() {
            return Err(Error::InvalidParameter("banded operator needs dim ≥ 1 and a main diagonal".into()));
        }
        for (k, d) in diagonals.iter().enumerate() {
            let want = dim.saturating_sub(k);
            if d.len() != want {
                return Err(Error::DimensionMismatch { expected: want, found: d.len() });
            }
        }
        if diagonals[0].iter().any(|c| c.im != 0.0) {
            return Err(Error::InvalidParameter("main diagonal of a Hermitian operator must be real".into()));
        }
        Ok(Self { dim, diagonals })
    }

    pub fn zeros(dim: usize, bandwidth: usize) -> Self {
        let diagonals = (0..=bandwidth).map(|k| vec![ZERO; dim.saturating_sub(k)]).collect();
        Self { dim, diagonals }
    }

    pub fn identity(dim: usize) -> Self {
        let mut op = Self::zeros(dim, 0);
        op.diagonals[0].iter_mut().for_each(|c| *c = C64::new(1.0, 0.0));
        op
    }

    pub fn from_real_diagonals(dim: usize, diagonals: &[Vec<f64>]) -> Result<Self> {
        let diags = diagonals.iter().map(|d| d.iter().map(|&x| C64::new(x, 0.0)).collect()).collect();
        Self::new(dim, diags)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Largest stored offset.
    pub fn bandwidth(&self) -> usize {
        self.diagonals.len() - 1
    }

    /// Upper diagonal at offset `k`, or `None` beyond the stored band.
    pub fn diagonal(&self, k: usize) -> Option<&[C64]> {
        self.diagonals.get(k).map(Vec::as_slice)
    }

    /// Element (i, j).
    pub fn get(&self, i: usize, j: usize) -> C64 {
        if i <= j {
            self.diagonals.get(j - i).map_or(ZERO, |d| d[i])
        } else {
            self.diagonals.get(i - j).map_or(ZERO, |d| d[j].conj())
        }
    }

    pub fn to_dense(&self) -> Array2<C64> {
        Array2::from_shape_fn((self.dim, self.dim), |(i, j)| self.get(i, j))
    }

    /// Largest |Im| over all stored entries.
    pub fn max_imag(&self) -> f64 {
        self.diagonals.iter().flatten().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.diagonals.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut acc = 0.0;
        for (k, d) in self.diagonals.iter().enumerate() {
            let w = if k == 0 { 1.0 } else { 2.0 };
            acc += w * d.iter().map(|c| c.norm_sqr()).sum::<f64>();
        }
        acc.sqrt()
    }

    /// True if any odd-offset diagonal has a nonzero entry.
    pub fn has_odd_band(&self) -> bool {
        self.diagonals.iter().skip(1).step_by(2).flatten().any(|c| *c != ZERO)
    }

    /// H·v.
    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: v.len() });
        }
        let mut out: Vec<C64> = self.diagonals[0].iter().zip(v).map(|(h, x)| h * x).collect();
        for (k, d) in self.diagonals.iter().enumerate().skip(1) {
            for (i, h) in d.iter().enumerate() {
                out[i] += h * v[i + k];
                out[i + k] += h.conj() * v[i];
            }
        }
        Ok(out)
    }

    /// ⟨ψ|H|ψ⟩, real for Hermitian H.
    pub fn expectation(&self, state: &DickeState) -> Result<f64> {
        let c = state.amplitudes();
        if c.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: c.len() });
        }
        let mut acc: f64 = self.diagonals[0].iter().zip(c).map(|(h, x)| h.re * x.norm_sqr()).sum();
        for (k, d) in self.diagonals.iter().enumerate().skip(1) {
            let off: C64 = d.iter().enumerate().map(|(i, h)| c[i].conj() * h * c[i + k]).sum();
            acc += 2.0 * off.re;
        }
        Ok(acc)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            diagonals: self.diagonals.iter().map(|d| d.iter().map(|c| c * factor).collect()).collect(),
        }
    }

    fn combine(&self, other: &Self, sign: f64) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        let bw = self.bandwidth().max(other.bandwidth());
        let mut out = Self::zeros(self.dim, bw);
        for (k, d) in out.diagonals.iter_mut().enumerate() {
            for (i, c) in d.iter_mut().enumerate() {
                *c = self.get(i, i + k) + sign * other.get(i, i + k);
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, -1.0)
    }

    /// (A·B)(i, j) for banded A, B.
    fn product_entry(&self, other: &Self, i: usize, j: usize) -> C64 {
        let (a, b) = (self.bandwidth(), other.bandwidth());
        let lo = i.saturating_sub(a).max(j.saturating_sub(b));
        let hi = (i + a).min(j + b).min(self.dim - 1);
        (lo..=hi).map(|k| self.get(i, k) * other.get(k, j)).sum()
    }

    /// (AB + BA)/2, Hermitian whenever A and B are.
    pub fn anticommutator(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        let bw = (self.bandwidth() + other.bandwidth()).min(self.dim - 1);
        let mut out = Self::zeros(self.dim, bw);
        for (k, d) in out.diagonals.iter_mut().enumerate() {
            for (i, c) in d.iter_mut().enumerate() {
                *c = 0.5 * (self.product_entry(other, i, i + k) + other.product_entry(self, i, i + k));
            }
        }
        // symmetrized products of Hermitian operators have a real diagonal
        out.diagonals[0].iter_mut().for_each(|c| c.im = 0.0);
        Ok(out)
    }

    pub fn square(&self) -> Self {
        self.anticommutator(self).expect("same dimension")
    }

    /// Writes the dense matrix row by row, each entry as "re im".
    pub fn write_dense_text<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "# dim {}", self.dim)?;
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|j| {
                    let c = self.get(i, j);
                    format!("{:.17e} {:.17e}", c.re, c.im)
                })
                .collect();
            writeln!(w, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

/// Reads the format written by [`BandedHermitian::write_dense_text`].
pub fn parse_dense_text(text: &str) -> Result<Array2<C64>> {
    let bad = |msg: &str| Error::InvalidParameter(format!("dense text: {msg}"));
    let mut rows: Vec<Vec<C64>> = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let nums: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| bad("unparsable number")))
            .collect::<Result<_>>()?;
        if !nums.len().is_multiple_of(2) {
            return Err(bad("odd number of values in row"));
        }
        rows.push(nums.chunks(2).map(|p| C64::new(p[0], p[1])).collect());
    }
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(bad("matrix is not square"));
    }
    Ok(Array2::from_shape_fn((n, n), |(i, j)| rows[i][j]))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Which pairwise coupling drives the ensemble.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    /// Mølmer–Sørensen, (Ω_R/4)(J_x² − N).
    MolmerSorensen,
    /// Collisional one-axis twisting, (Ω_R/2)J_z².
    OneAxisTwisting,
    /// Molecular Raman coupling, (Ω_R/2)(J_x² − J_y²).
    TwoAxisRaman,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 3] =
        [SchemeKind::MolmerSorensen, SchemeKind::OneAxisTwisting, SchemeKind::TwoAxisRaman];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::MolmerSorensen => "molmer-sorensen",
            SchemeKind::OneAxisTwisting => "one-axis-twisting",
            SchemeKind::TwoAxisRaman => "two-axis-raman",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "molmer-sorensen" | "ms" | "v-m" => Ok(SchemeKind::MolmerSorensen),
            "one-axis-twisting" | "oat" | "v-s" => Ok(SchemeKind::OneAxisTwisting),
            "two-axis-raman" | "raman" | "tact" => Ok(SchemeKind::TwoAxisRaman),
            other => Err(Error::InvalidParameter(format!("unknown scheme '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingScheme {
    pub kind: SchemeKind,
    /// Ω_R; 1 in dimensionless mode.
    pub rabi: f64,
}

impl CouplingScheme {
    pub fn new(kind: SchemeKind, rabi: f64) -> Result<Self> {
        if rabi.is_nan() || rabi <= 0.0 || !rabi.is_finite() {
            return Err(Error::InvalidParameter(format!("Rabi frequency must be positive, got {rabi}")));
        }
        Ok(Self { kind, rabi })
    }

    /// Ω_R = 1.
    pub fn dimensionless(kind: SchemeKind) -> Self {
        Self { kind, rabi: 1.0 }
    }
}

/// J_axis on the (N+1)-dimensional Dicke basis.
///
/// ⟨m+1|J_x|m⟩ = √((m+1)(N−m))/2 and ⟨m+1|J_y|m⟩ = i√((m+1)(N−m))/2, which
/// with J_z|m⟩ = ((N−2m)/2)|m⟩ gives [J_x, J_y] = iJ_z.
pub fn collective_op(n_atoms: usize, axis: Axis) -> Result<BandedHermitian> {
    if n_atoms == 0 {
        return Err(Error::ZeroAtoms);
    }
    let dim = n_atoms + 1;
    let ladder: Vec<f64> = (0..n_atoms).map(|m| (((m + 1) * (n_atoms - m)) as f64).sqrt() / 2.0).collect();
    let op = match axis {
        Axis::Z => {
            let diag = (0..dim).map(|m| C64::new(DickeState::jz_of(n_atoms, m), 0.0)).collect();
            BandedHermitian { dim, diagonals: vec![diag] }
        }
        Axis::X => BandedHermitian {
            dim,
            diagonals: vec![vec![ZERO; dim], ladder.iter().map(|&a| C64::new(a, 0.0)).collect()],
        },
        // upper element ⟨m|J_y|m+1⟩ = conj(⟨m+1|J_y|m⟩) = −i·a
        Axis::Y => BandedHermitian {
            dim,
            diagonals: vec![vec![ZERO; dim], ladder.iter().map(|&a| C64::new(0.0, -a)).collect()],
        },
    };
    Ok(op)
}

/// Coupling Hamiltonian on the Dicke basis (ħ = 1).
pub fn hamiltonian(scheme: &CouplingScheme, n_atoms: usize) -> Result<BandedHermitian> {
    let rabi = scheme.rabi;
    let op = match scheme.kind {
        SchemeKind::MolmerSorensen => {
            let jx2 = collective_op(n_atoms, Axis::X)?.square();
            let shift = BandedHermitian::identity(n_atoms + 1).scaled(n_atoms as f64);
            jx2.sub(&shift)?.scaled(rabi / 4.0)
        }
        SchemeKind::OneAxisTwisting => collective_op(n_atoms, Axis::Z)?.square().scaled(rabi / 2.0),
        SchemeKind::TwoAxisRaman => {
            let jx2 = collective_op(n_atoms, Axis::X)?.square();
            let jy2 = collective_op(n_atoms, Axis::Y)?.square();
            jx2.sub(&jy2)?.scaled(rabi / 2.0)
        }
    };
    Ok(pad_to_bandwidth(op, 2.min(n_atoms)))
}

fn pad_to_bandwidth(mut op: BandedHermitian, bw: usize) -> BandedHermitian {
    while op.bandwidth() < bw {
        let k = op.diagonals.len();
        op.diagonals.push(vec![ZERO; op.dim - k]);
    }
    op
}

/// Dicke indices of the even-m and odd-m sectors.
pub fn parity_indices(dim: usize) -> (Vec<usize>, Vec<usize>) {
    ((0..dim).step_by(2).collect(), (1..dim).step_by(2).collect())
}

/// Splits an operator that couples only m ↔ m±2k into its even-m and odd-m
/// sectors. Offset 2k of `h` becomes offset k of each block.
pub fn parity_blocks(h: &BandedHermitian) -> Result<(BandedHermitian, BandedHermitian)> {
    if h.has_odd_band() {
        return Err(Error::OddBandPresent);
    }
    let (even, odd) = parity_indices(h.dim);
    let block = |idx: &[usize]| {
        let n = idx.len();
        let bw = (h.bandwidth() / 2).min(n.saturating_sub(1));
        let diagonals = (0..=bw).map(|k| (0..n - k).map(|j| h.get(idx[j], idx[j + k])).collect()).collect();
        BandedHermitian { dim: n, diagonals }
    };
    Ok((block(&even), block(&odd)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    fn commutator(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
        a.dot(b) - b.dot(a)
    }

    fn max_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
        (a - b).iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn single_spin_is_half_pauli() {
        let jx = collective_op(1, Axis::X).unwrap().to_dense();
        assert_eq!(jx[[0, 1]], C64::new(0.5, 0.0));
        assert_eq!(jx[[1, 0]], C64::new(0.5, 0.0));
        assert_eq!(jx[[0, 0]], ZERO);
    }

    #[test]
    fn spin_one_jz() {
        let jz = collective_op(2, Axis::Z).unwrap();
        let d: Vec<f64> = jz.diagonal(0).unwrap().iter().map(|c| c.re).collect();
        assert_eq!(d, vec![1.0, 0.0, -1.0]);
    }

    #[test]
    fn angular_momentum_algebra() {
        let i = C64::new(0.0, 1.0);
        for n in 1..=8 {
            let [jx, jy, jz] = [Axis::X, Axis::Y, Axis::Z].map(|a| collective_op(n, a).unwrap().to_dense());
            assert!(max_diff(&commutator(&jx, &jy), &jz.mapv(|c| i * c)) < 1e-12, "N={n} [Jx,Jy]");
            assert!(max_diff(&commutator(&jy, &jz), &jx.mapv(|c| i * c)) < 1e-12, "N={n} [Jy,Jz]");
            assert!(max_diff(&commutator(&jz, &jx), &jy.mapv(|c| i * c)) < 1e-12, "N={n} [Jz,Jx]");
            let casimir = jx.dot(&jx) + jy.dot(&jy) + jz.dot(&jz);
            let s = n as f64 / 2.0;
            let want = Array2::from_diag_elem(n + 1, C64::new(s * (s + 1.0), 0.0));
            assert!(max_diff(&casimir, &want) < 1e-12, "N={n} Casimir");
        }
    }

    #[test]
    fn banded_square_matches_dense() {
        let jy = collective_op(5, Axis::Y).unwrap();
        let d = jy.to_dense();
        assert!(max_diff(&jy.square().to_dense(), &d.dot(&d)) < 1e-13);
        let jx = collective_op(5, Axis::X).unwrap();
        let dx = jx.to_dense();
        let anti = (dx.dot(&d) + d.dot(&dx)).mapv(|c| c * 0.5);
        assert!(max_diff(&jx.anticommutator(&jy).unwrap().to_dense(), &anti) < 1e-13);
    }

    #[test]
    fn two_axis_two_atoms_by_hand() {
        // J_+² |m=2⟩ = J_+ √2 |1⟩ = 2|0⟩ for spin 1, so (J_x²−J_y²) = (J_+²+J_−²)/2
        // has ⟨0|·|2⟩ = 1 and H = ½(J_x²−J_y²) has ⟨0|H|2⟩ = ½.
        let h = hamiltonian(&CouplingScheme::dimensionless(SchemeKind::TwoAxisRaman), 2).unwrap();
        let d = h.to_dense();
        for i in 0..3 {
            for j in 0..3 {
                let want = if (i, j) == (0, 2) || (i, j) == (2, 0) { 0.5 } else { 0.0 };
                assert!((d[[i, j]] - C64::new(want, 0.0)).norm() < 1e-15, "({i},{j})");
            }
        }
    }

    #[test]
    fn one_axis_two_atoms() {
        let h = hamiltonian(&CouplingScheme::dimensionless(SchemeKind::OneAxisTwisting), 2).unwrap();
        let d: Vec<f64> = h.diagonal(0).unwrap().iter().map(|c| c.re).collect();
        assert_eq!(d, vec![0.5, 0.0, 0.5]);
    }

    #[test]
    fn molmer_sorensen_literal_form() {
        let n = 6;
        let h = hamiltonian(&CouplingScheme::new(SchemeKind::MolmerSorensen, 2.0).unwrap(), n).unwrap();
        let jx = collective_op(n, Axis::X).unwrap().to_dense();
        let want = (jx.dot(&jx) - Array2::from_diag_elem(n + 1, C64::new(n as f64, 0.0))).mapv(|c| c * 0.5);
        assert!(max_diff(&h.to_dense(), &want) < 1e-13);
    }

    #[test]
    fn scheme_structure() {
        for n in 1..=12 {
            for kind in SchemeKind::ALL {
                let h = hamiltonian(&CouplingScheme::dimensionless(kind), n).unwrap();
                assert!(h.max_imag() < 1e-15, "{kind} N={n} imaginary part");
                if let Some(d1) = h.diagonal(1) {
                    assert!(d1.iter().all(|c| *c == ZERO), "{kind} N={n} offset-1 band");
                }
                assert!(h.bandwidth() <= 2);
                if kind == SchemeKind::TwoAxisRaman {
                    assert!(h.diagonal(0).unwrap().iter().all(|c| c.norm() == 0.0));
                }
            }
        }
    }

    #[test]
    fn zero_atoms_rejected() {
        assert!(matches!(collective_op(0, Axis::X), Err(Error::ZeroAtoms)));
        let s = CouplingScheme::dimensionless(SchemeKind::TwoAxisRaman);
        assert!(matches!(hamiltonian(&s, 0), Err(Error::ZeroAtoms)));
        assert!(CouplingScheme::new(SchemeKind::TwoAxisRaman, 0.0).is_err());
    }

    #[test]
    fn parity_block_dims() {
        let s = CouplingScheme::dimensionless(SchemeKind::TwoAxisRaman);
        let (e, o) = parity_blocks(&hamiltonian(&s, 4).unwrap()).unwrap();
        assert_eq!((e.dim(), o.dim()), (3, 2));
        for kind in SchemeKind::ALL {
            let (e, o) =
                parity_blocks(&hamiltonian(&CouplingScheme::dimensionless(kind), 1000).unwrap()).unwrap();
            assert_eq!((e.dim(), o.dim()), (501, 500));
        }
    }

    #[test]
    fn parity_blocks_reject_odd_band() {
        let jx = collective_op(4, Axis::X).unwrap();
        assert!(matches!(parity_blocks(&jx), Err(Error::OddBandPresent)));
    }

    #[test]
    fn parity_blocks_reassemble() {
        let s = CouplingScheme::dimensionless(SchemeKind::MolmerSorensen);
        let h = hamiltonian(&s, 7).unwrap();
        let (e, o) = parity_blocks(&h).unwrap();
        let (ei, oi) = parity_indices(h.dim());
        let dense = h.to_dense();
        for (blk, idx) in [(&e, &ei), (&o, &oi)] {
            for a in 0..idx.len() {
                for b in 0..idx.len() {
                    assert_eq!(blk.get(a, b), dense[[idx[a], idx[b]]]);
                }
            }
        }
    }

    #[test]
    fn dense_text_round_trip() {
        let jy = collective_op(3, Axis::Y).unwrap();
        let mut buf = Vec::new();
        jy.write_dense_text(&mut buf).unwrap();
        let parsed = parse_dense_text(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(parsed, jy.to_dense());
    }

    #[test]
    fn scheme_names_parse() {
        for kind in SchemeKind::ALL {
            assert_eq!(kind.name().parse::<SchemeKind>().unwrap(), kind);
        }
        assert!("nonsense".parse::<SchemeKind>().is_err());
    }
}
