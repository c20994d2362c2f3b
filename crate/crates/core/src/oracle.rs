//! Brute-force reference on the full 2^N tensor-product space.
//!
//! Deliberately shares nothing with the Dicke-basis path: the Hamiltonians are
//! sums of single- and two-body terms over all pairs, and evolution uses a
//! dense eigendecomposition from nalgebra. Computational basis index bit `i`
//! set means atom `i` is spin down.
//!
//! Single-atom operators carry the spin-1/2 normalization s = σ/2, matching
//! J = Σ_i s^(i).

use nalgebra::{DMatrix, DVector, Matrix4, SymmetricEigen};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spinops::{CouplingScheme, SchemeKind};
use crate::state::DickeState;

pub const MAX_ORACLE_ATOMS: usize = 12;

fn guard(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::ZeroAtoms);
    }
    if n > MAX_ORACLE_ATOMS {
        return Err(Error::OracleTooLarge { n, max: MAX_ORACLE_ATOMS });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FullState {
    pub n_atoms: usize,
    /// Length 2^N; stored as [re, im] pairs in JSON fixtures.
    #[serde(with = "complex_pairs")]
    pub amplitudes: Vec<C64>,
}

mod complex_pairs {
    use num_complex::Complex64 as C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(pairs.into_iter().map(|[re, im]| C64::new(re, im)).collect())
    }
}

impl FullState {
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data serializes")
    }
}

/// Single-site Pauli matrices in the (↑, ↓) basis.
fn pauli(axis: char) -> [[C64; 2]; 2] {
    let (o, z, i) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 1.0));
    match axis {
        'x' => [[z, o], [o, z]],
        'y' => [[z, -i], [i, z]],
        'z' => [[o, z], [z, -o]],
        // |↑⟩⟨↓|
        '+' => [[z, o], [z, z]],
        // |↓⟩⟨↑|
        '-' => [[z, z], [o, z]],
        _ => unreachable!("unknown single-site operator"),
    }
}

/// a ⊗ b with atom 1 as the high bit: index = 2·b₁ + b₂.
fn kron2(a: [[C64; 2]; 2], b: [[C64; 2]; 2]) -> Matrix4<C64> {
    let mut m = Matrix4::zeros();
    for r1 in 0..2 {
        for c1 in 0..2 {
            for r2 in 0..2 {
                for c2 in 0..2 {
                    m[(2 * r1 + r2, 2 * c1 + c2)] = a[r1][c1] * b[r2][c2];
                }
            }
        }
    }
    m
}

/// (Ω_R/2)(σ_x⊗σ_x − σ_y⊗σ_y) with Pauli matrices.
///
/// Index order is |↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩.
pub fn two_atom_coupling(omega_r: f64) -> Matrix4<C64> {
    (kron2(pauli('x'), pauli('x')) - kron2(pauli('y'), pauli('y'))) * C64::new(omega_r / 2.0, 0.0)
}

/// (Ω_R/2)[(|↑⟩⟨↓|)⊗(|↑⟩⟨↓|) + (|↓⟩⟨↑|)⊗(|↓⟩⟨↑|)], the outer-product form.
pub fn two_atom_ladder_form(omega_r: f64) -> Matrix4<C64> {
    (kron2(pauli('+'), pauli('+')) + kron2(pauli('-'), pauli('-'))) * C64::new(omega_r / 2.0, 0.0)
}

fn bit(state: usize, atom: usize) -> usize {
    (state >> atom) & 1
}

/// Sum over unordered pairs of the scheme's two-body term, as a dense real
/// symmetric 2^N × 2^N matrix.
///
/// - MolmerSorensen: Σ_{i<j} (Ω_R/2) s_x^i s_x^j, which restricted to the
///   symmetric sector is (Ω_R/4)(J_x² − N/4), i.e. the Dicke-basis V_M plus
///   the constant 3Ω_R N/16.
/// - OneAxisTwisting: (Ω_R/2)(Σ_i s_z^i)².
/// - TwoAxisRaman: Σ_{i<j} (Ω_R/2)(s_+^i s_+^j + s_−^i s_−^j).
pub fn pairwise_hamiltonian(scheme: &CouplingScheme, n_atoms: usize) -> Result<DMatrix<f64>> {
    guard(n_atoms)?;
    let dim = 1usize << n_atoms;
    let w = scheme.rabi;
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    match scheme.kind {
        SchemeKind::OneAxisTwisting => {
            for b in 0..dim {
                let down = b.count_ones() as f64;
                let jz = (n_atoms as f64 - 2.0 * down) / 2.0;
                h[(b, b)] = 0.5 * w * jz * jz;
            }
        }
        SchemeKind::MolmerSorensen => {
            // s_x^i s_x^j flips both bits with amplitude ¼
            for b in 0..dim {
                for i in 0..n_atoms {
                    for j in i + 1..n_atoms {
                        let flipped = b ^ (1 << i) ^ (1 << j);
                        h[(flipped, b)] += 0.5 * w * 0.25;
                    }
                }
            }
        }
        SchemeKind::TwoAxisRaman => {
            // s_+ s_+ raises two down atoms; s_− s_− lowers two up atoms
            for b in 0..dim {
                for i in 0..n_atoms {
                    for j in i + 1..n_atoms {
                        if bit(b, i) == bit(b, j) {
                            let flipped = b ^ (1 << i) ^ (1 << j);
                            h[(flipped, b)] += 0.5 * w;
                        }
                    }
                }
            }
        }
    }
    Ok(h)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Isometry |m⟩ → C(N,m)^{-1/2} Σ_{weight(b)=m} |b⟩.
pub fn symmetric_embed(state: &DickeState) -> Result<FullState> {
    let n = state.n_atoms();
    guard(n)?;
    let dim = 1usize << n;
    let scales: Vec<f64> = (0..=n).map(|m| binomial(n, m).sqrt().recip()).collect();
    let amplitudes = (0..dim)
        .map(|b| {
            let m = b.count_ones() as usize;
            state.amplitude(m) * scales[m]
        })
        .collect();
    Ok(FullState { n_atoms: n, amplitudes })
}

/// Orthogonal projection onto the symmetric sector, expressed in Dicke
/// amplitudes. Not renormalized.
pub fn symmetric_project(full: &FullState) -> Result<Vec<C64>> {
    let n = full.n_atoms;
    guard(n)?;
    if full.amplitudes.len() != 1 << n {
        return Err(Error::DimensionMismatch { expected: 1 << n, found: full.amplitudes.len() });
    }
    let mut out = vec![C64::new(0.0, 0.0); n + 1];
    for (b, a) in full.amplitudes.iter().enumerate() {
        out[b.count_ones() as usize] += a;
    }
    for (m, c) in out.iter_mut().enumerate() {
        *c /= binomial(n, m).sqrt();
    }
    Ok(out)
}

/// Dense eigendecomposition of a pairwise Hamiltonian, reusable across times.
pub struct DenseEvolver {
    n_atoms: usize,
    eigen: SymmetricEigen<f64, nalgebra::Dyn>,
}

impl DenseEvolver {
    pub fn new(scheme: &CouplingScheme, n_atoms: usize) -> Result<Self> {
        let h = pairwise_hamiltonian(scheme, n_atoms)?;
        Ok(Self { n_atoms, eigen: SymmetricEigen::new(h) })
    }

    pub fn evolve(&self, state: &FullState, t: f64) -> Result<FullState> {
        if state.n_atoms != self.n_atoms {
            return Err(Error::DimensionMismatch { expected: self.n_atoms, found: state.n_atoms });
        }
        let v = &self.eigen.eigenvectors;
        let re = DVector::from_iterator(state.amplitudes.len(), state.amplitudes.iter().map(|c| c.re));
        let im = DVector::from_iterator(state.amplitudes.len(), state.amplitudes.iter().map(|c| c.im));
        let a_re = v.tr_mul(&re);
        let a_im = v.tr_mul(&im);
        let mut b_re = a_re.clone();
        let mut b_im = a_im.clone();
        for (k, &lambda) in self.eigen.eigenvalues.iter().enumerate() {
            let (s, c) = (-lambda * t).sin_cos();
            b_re[k] = c * a_re[k] - s * a_im[k];
            b_im[k] = s * a_re[k] + c * a_im[k];
        }
        let out_re = v * b_re;
        let out_im = v * b_im;
        let amplitudes = out_re.iter().zip(out_im.iter()).map(|(&r, &i)| C64::new(r, i)).collect();
        Ok(FullState { n_atoms: self.n_atoms, amplitudes })
    }
}

/// Embeds, evolves in the full space and projects back.
pub fn oracle_evolve(scheme: &CouplingScheme, state: &DickeState, t: f64) -> Result<Vec<C64>> {
    let ev = DenseEvolver::new(scheme, state.n_atoms())?;
    symmetric_project(&ev.evolve(&symmetric_embed(state)?, t)?)
}

/// Permutation of atom labels applied to computational basis indices.
pub fn permute_basis(b: usize, perm: &[usize]) -> usize {
    perm.iter().enumerate().fold(0, |acc, (i, &p)| acc | (bit(b, i) << p))
}
