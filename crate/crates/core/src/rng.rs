//! Reproducible random streams and Haar-distributed unitaries.
//!
//! Every Monte Carlo sample owns a [`SeedSpec`]. The master seed is hashed into
//! a ChaCha20 key and the stream index selects one of the 2^64 ChaCha streams
//! under that key, so distinct indices never overlap and the bytes a sample
//! sees do not depend on which thread draws them.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use sha2::{Digest, Sha256};

use crate::{Error, Result, C64};

/// Identifies one random stream: a master seed and a substream index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_index: u64,
}

/// Stream `index` under `master_seed`.
pub fn derive_stream(master_seed: u64, index: u64) -> SeedSpec {
    SeedSpec {
        master_seed,
        stream_index: index,
    }
}

impl SeedSpec {
    /// The generator for this stream, positioned at its start.
    pub fn rng(&self) -> ChaCha20Rng {
        let digest = Sha256::new()
            .chain_update(b"floquet-stream-key")
            .chain_update(self.master_seed.to_le_bytes())
            .finalize();
        let mut key = [0u8; 32];
        key.copy_from_slice(&digest[..32]);
        let mut rng = ChaCha20Rng::from_seed(key);
        rng.set_stream(self.stream_index);
        rng
    }

    /// A nested stream: `(master, index)` is mixed into a fresh 64-bit master
    /// seed and `index` selects the stream under it.
    pub fn substream(&self, index: u64) -> SeedSpec {
        derive_stream(self.fold(), index)
    }

    fn fold(&self) -> u64 {
        let digest = Sha256::new()
            .chain_update(b"floquet-stream-fold")
            .chain_update(self.master_seed.to_le_bytes())
            .chain_update(self.stream_index.to_le_bytes())
            .finalize();
        let mut word = [0u8; 8];
        word.copy_from_slice(&digest[..8]);
        u64::from_le_bytes(word)
    }
}

/// Dense square unitary matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix(DMatrix<C64>);

impl UnitaryMatrix {
    /// Relative unitarity tolerance; the absolute bound is this times the dimension.
    pub const TOLERANCE: f64 = 1e-10;

    /// Wraps `m`, checking that it is square, non-empty and unitary.
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() == 0 || m.nrows() != m.ncols() {
            return Err(Error::InvalidDimension(format!(
                "unitary must be square and non-empty, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let dev = unitarity_defect(&m);
        let bound = Self::TOLERANCE * m.nrows() as f64;
        if dev > bound {
            return Err(Error::Numeric(format!(
                "unitarity defect {dev:e} exceeds {bound:e}"
            )));
        }
        Ok(UnitaryMatrix(m))
    }

    pub(crate) fn from_unchecked(m: DMatrix<C64>) -> Self {
        UnitaryMatrix(m)
    }

    pub fn identity(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension("dimension must be >= 1".into()));
        }
        Ok(UnitaryMatrix(DMatrix::identity(dim, dim)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    /// Max-norm of `U†U - I`.
    pub fn defect(&self) -> f64 {
        unitarity_defect(&self.0)
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    /// Kronecker product `self ⊗ other` (first factor most significant).
    pub fn kron(&self, other: &UnitaryMatrix) -> UnitaryMatrix {
        UnitaryMatrix(self.0.kronecker(&other.0))
    }
}

/// Max-norm of `m†m - I`.
pub fn unitarity_defect(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let prod = m.adjoint() * m;
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((prod[(i, j)] - C64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// Draws a Haar-distributed `dim × dim` unitary.
///
/// A matrix of i.i.d. standard complex Gaussians is QR-factorised and each
/// column of `Q` is multiplied by the phase of the matching diagonal entry of
/// `R`, which makes the factorisation unique and the result Haar distributed.
pub fn cue_sample(dim: usize, seed: SeedSpec) -> Result<UnitaryMatrix> {
    if dim == 0 {
        return Err(Error::InvalidDimension("CUE dimension must be >= 1".into()));
    }
    let mut rng = seed.rng();
    Ok(cue_from_rng(dim, &mut rng))
}

pub(crate) fn cue_from_rng<R: rand::Rng + ?Sized>(dim: usize, rng: &mut R) -> UnitaryMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let mut gauss = DMatrix::<C64>::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            gauss[(i, j)] = C64::new(re * scale, im * scale);
        }
    }
    let qr = gauss.qr();
    let r = qr.r();
    let mut q = qr.q();
    for k in 0..dim {
        let d = r[(k, k)];
        let norm = d.norm();
        let phase = if norm > 0.0 { d / norm } else { C64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, k)] *= phase;
        }
    }
    UnitaryMatrix(q)
}
