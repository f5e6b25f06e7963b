//! Exact moment channels of Floquet operators built from independent Haar gates.
//!
//! Gates are independent, so `E[U ⊗ Ū] = Π_k E[W_k ⊗ W̄_k]` in operator order,
//! and likewise for the four-replica moment. Each per-gate factor is the exact
//! CUE(d) moment of the gate dimension `d`, applied matrix-free to the
//! replica-space vector through the gate's index embedding:
//!
//! - second order: `E[w_{xy} w̄_{x'y'}] = δ_{xx'} δ_{yy'} / d`;
//! - fourth order: the `p = 2` Weingarten sum with `Wg([1,1])` and `Wg([2])` at
//!   dimension `d`, exact at finite `d`.
//!
//! Replica vectors are indexed `(r₁·N + r₂)` for `U ⊗ Ū` and
//! `((r₁·N + r₂)·N + r₃)·N + r₄` for `U ⊗ U ⊗ Ū ⊗ Ū`, with 0-based many-body
//! indices.

use nalgebra::DMatrix;

use crate::circuit::{Embedding, FloquetModel, GateLayout};
use crate::rng::derive_stream;
use crate::stats::{par_map_ordered, ComplexEstimate};
use crate::weingarten::{solve_table, to_f64};
use crate::perm::CycleType;
use crate::{Error, Result, C64};

/// Dense second-moment matrices are built for `N` up to this size.
pub const MAX_DENSE_SECOND_DIM: usize = 16;
/// Matrix-free second-moment contractions accept `N` up to this size.
pub const MAX_SECOND_DIM: usize = 64;
/// Fourth-moment vectors have `N⁴` entries.
pub const MAX_FOURTH_DIM: usize = 16;

/// Index tuple for `⟨U_{i₁j₁}⋯ U†_{j'₁i'₁}⋯⟩` of a Floquet operator (0-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FloquetPattern {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub rows_conj: Vec<usize>,
    pub cols_conj: Vec<usize>,
}

impl FloquetPattern {
    /// `⟨U_{ij} U†_{j'i'}⟩`.
    pub fn second(i: usize, j: usize, i2: usize, j2: usize) -> Self {
        FloquetPattern {
            rows: vec![i],
            cols: vec![j],
            rows_conj: vec![i2],
            cols_conj: vec![j2],
        }
    }

    /// `⟨U_{i₁j₁} U_{i₂j₂} U†_{j'₁i'₁} U†_{j'₂i'₂}⟩` from `[i₁, j₁, i₂, j₂]` and primed.
    pub fn fourth(unprimed: [usize; 4], primed: [usize; 4]) -> Self {
        FloquetPattern {
            rows: vec![unprimed[0], unprimed[2]],
            cols: vec![unprimed[1], unprimed[3]],
            rows_conj: vec![primed[0], primed[2]],
            cols_conj: vec![primed[1], primed[3]],
        }
    }

    /// Moment order: 2 or 4.
    pub fn order(&self) -> usize {
        2 * self.rows.len()
    }

    fn check(&self, n: usize) -> Result<()> {
        let k = self.rows.len();
        if !(k == 1 || k == 2)
            || self.cols.len() != k
            || self.rows_conj.len() != k
            || self.cols_conj.len() != k
        {
            return Err(Error::Domain("pattern must be of order 2 or 4".into()));
        }
        for &i in self.rows.iter().chain(&self.cols).chain(&self.rows_conj).chain(&self.cols_conj) {
            if i >= n {
                return Err(Error::IndexOutOfRange(format!("index {i} >= N={n}")));
            }
        }
        Ok(())
    }

    pub fn evaluate(&self, u: &DMatrix<C64>) -> C64 {
        let mut acc = C64::new(1.0, 0.0);
        for (&i, &j) in self.rows.iter().zip(&self.cols) {
            acc *= u[(i, j)];
        }
        for (&i, &j) in self.rows_conj.iter().zip(&self.cols_conj) {
            acc *= u[(i, j)].conj();
        }
        acc
    }

    /// Large-`N` CUE value: `δδ/N` at order 2, the two pairings over `N²` at order 4.
    pub fn rmt_target(&self, n: usize) -> f64 {
        let nf = n as f64;
        let eq = |a: usize, b: usize| a == b;
        if self.rows.len() == 1 {
            let hit = eq(self.rows[0], self.rows_conj[0]) && eq(self.cols[0], self.cols_conj[0]);
            return if hit { 1.0 / nf } else { 0.0 };
        }
        let (r, c, rc, cc) = (&self.rows, &self.cols, &self.rows_conj, &self.cols_conj);
        let direct = eq(r[0], rc[0]) && eq(c[0], cc[0]) && eq(r[1], rc[1]) && eq(c[1], cc[1]);
        let crossed = eq(r[0], rc[1]) && eq(c[0], cc[1]) && eq(r[1], rc[0]) && eq(c[1], cc[0]);
        (direct as u8 + crossed as u8) as f64 / (nf * nf)
    }
}

fn layout_dim(layout: &GateLayout, ceiling: usize, what: &str) -> Result<usize> {
    let n = layout.hilbert_dim()?;
    if n > ceiling {
        return Err(Error::Resource(format!("{what} needs N <= {ceiling}, got {n}")));
    }
    Ok(n)
}

/// `E[U ⊗ Ū]` for a gate layout, applied gate by gate.
#[derive(Debug, Clone)]
pub struct MomentChannel2 {
    n: usize,
    gates: Vec<(Embedding, f64)>,
}

impl MomentChannel2 {
    pub fn new(layout: &GateLayout) -> Result<Self> {
        let n = layout_dim(layout, MAX_SECOND_DIM, "second-moment channel")?;
        let gates = layout
            .gates
            .iter()
            .map(|g| {
                let d = layout.local_dim.pow(g.sites.len() as u32);
                (layout.embedding(&g.sites), 1.0 / d as f64)
            })
            .collect();
        Ok(MomentChannel2 { n, gates })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `v ← E[U ⊗ Ū] v` for a vector of length `N²`.
    pub fn apply(&self, v: &mut [f64]) {
        let n = self.n;
        assert_eq!(v.len(), n * n);
        for (emb, inv_d) in self.gates.iter().rev() {
            for &b1 in &emb.base {
                for &b2 in &emb.base {
                    let mut s = 0.0;
                    for &ly in &emb.local {
                        s += v[(b1 + ly) * n + b2 + ly];
                    }
                    for &lx in &emb.local {
                        for &lx2 in &emb.local {
                            v[(b1 + lx) * n + b2 + lx2] = 0.0;
                        }
                    }
                    for &lx in &emb.local {
                        v[(b1 + lx) * n + b2 + lx] = s * inv_d;
                    }
                }
            }
        }
    }

    /// `E[U_{ij} U†_{j'i'}]`.
    pub fn entry(&self, i: usize, j: usize, i2: usize, j2: usize) -> f64 {
        let n = self.n;
        let mut v = vec![0.0; n * n];
        v[j * n + j2] = 1.0;
        self.apply(&mut v);
        v[i * n + i2]
    }
}

/// `E[U ⊗ U ⊗ Ū ⊗ Ū]` for a gate layout, applied gate by gate.
#[derive(Debug, Clone)]
pub struct MomentChannel4 {
    n: usize,
    /// Embedding with `(Wg([1,1]), Wg([2]))` at the gate dimension.
    gates: Vec<(Embedding, f64, f64)>,
}

impl MomentChannel4 {
    pub fn new(layout: &GateLayout) -> Result<Self> {
        let n = layout_dim(layout, MAX_FOURTH_DIM, "fourth-moment channel")?;
        let gates = layout
            .gates
            .iter()
            .map(|g| {
                let d = layout.local_dim.pow(g.sites.len() as u32);
                let table = solve_table(d, 2)?;
                let w11 = to_f64(table.get(&CycleType::ones(2))?);
                let w2 = to_f64(table.get(&CycleType::new(vec![2])?)?);
                Ok((layout.embedding(&g.sites), w11, w2))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MomentChannel4 { n, gates })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `v ← E[U ⊗ U ⊗ Ū ⊗ Ū] v` for a vector of length `N⁴`.
    pub fn apply(&self, v: &mut [f64]) {
        let n = self.n;
        assert_eq!(v.len(), n * n * n * n);
        let idx = |a: usize, b: usize, c: usize, d: usize| ((a * n + b) * n + c) * n + d;
        for (emb, w11, w2) in self.gates.iter().rev() {
            let l = &emb.local;
            for &b1 in &emb.base {
                for &b2 in &emb.base {
                    for &b3 in &emb.base {
                        for &b4 in &emb.base {
                            let (mut c_id, mut c_sw) = (0.0, 0.0);
                            for &y1 in l {
                                for &y2 in l {
                                    c_id += v[idx(b1 + y1, b2 + y2, b3 + y1, b4 + y2)];
                                    c_sw += v[idx(b1 + y1, b2 + y2, b3 + y2, b4 + y1)];
                                }
                            }
                            for &x1 in l {
                                for &x2 in l {
                                    for &x3 in l {
                                        for &x4 in l {
                                            v[idx(b1 + x1, b2 + x2, b3 + x3, b4 + x4)] = 0.0;
                                        }
                                    }
                                }
                            }
                            let direct = w11 * c_id + w2 * c_sw;
                            let crossed = w2 * c_id + w11 * c_sw;
                            for &x1 in l {
                                for &x2 in l {
                                    v[idx(b1 + x1, b2 + x2, b3 + x1, b4 + x2)] += direct;
                                    v[idx(b1 + x1, b2 + x2, b3 + x2, b4 + x1)] += crossed;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}

/// Dense `E[U ⊗ Ū]` as an `N² × N²` matrix, row `(i, i')`, column `(j, j')`.
pub fn second_moment_exact(model: &FloquetModel) -> Result<DMatrix<f64>> {
    let layout = model.layout()?;
    layout_dim(&layout, MAX_DENSE_SECOND_DIM, "dense second moment")?;
    let channel = MomentChannel2::new(&layout)?;
    let nn = channel.dim() * channel.dim();
    let mut out = DMatrix::<f64>::zeros(nn, nn);
    let mut v = vec![0.0; nn];
    for col in 0..nn {
        v.iter_mut().for_each(|x| *x = 0.0);
        v[col] = 1.0;
        channel.apply(&mut v);
        for (row, &x) in v.iter().enumerate() {
            out[(row, col)] = x;
        }
    }
    Ok(out)
}

/// Largest deviation of a dense second-moment matrix from `δ_{ii'}δ_{jj'}/N`.
pub fn second_moment_deviation(m: &DMatrix<f64>, n: usize) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..n {
        for i2 in 0..n {
            for j in 0..n {
                for j2 in 0..n {
                    let target = if i == i2 && j == j2 { 1.0 / n as f64 } else { 0.0 };
                    worst = worst.max((m[(i * n + i2, j * n + j2)] - target).abs());
                }
            }
        }
    }
    worst
}

/// Exact `E[U_{i₁j₁}U_{i₂j₂}U†_{j'₁i'₁}U†_{j'₂i'₂}]`.
pub fn fourth_moment_exact(model: &FloquetModel, pattern: &FloquetPattern) -> Result<f64> {
    let layout = model.layout()?;
    let channel = MomentChannel4::new(&layout)?;
    let n = channel.dim();
    pattern.check(n)?;
    if pattern.order() != 4 {
        return Err(Error::Domain("fourth_moment_exact needs an order-4 pattern".into()));
    }
    let idx = |a: usize, b: usize, c: usize, d: usize| ((a * n + b) * n + c) * n + d;
    let mut v = vec![0.0; n * n * n * n];
    let (c, cc) = (&pattern.cols, &pattern.cols_conj);
    v[idx(c[0], c[1], cc[0], cc[1])] = 1.0;
    channel.apply(&mut v);
    let (r, rc) = (&pattern.rows, &pattern.rows_conj);
    Ok(v[idx(r[0], r[1], rc[0], rc[1])])
}

/// `⟨|Tr U|²⟩ = Σ_{ij} E[U_{ii} U†_{jj}]`, the trace of the exact channel.
pub fn sff2_from_channel(model: &FloquetModel) -> Result<f64> {
    let channel = MomentChannel2::new(&model.layout()?)?;
    let nn = channel.dim() * channel.dim();
    let mut v = vec![0.0; nn];
    let mut total = 0.0;
    for col in 0..nn {
        v.iter_mut().for_each(|x| *x = 0.0);
        v[col] = 1.0;
        channel.apply(&mut v);
        total += v[col];
    }
    Ok(total)
}

/// Monte Carlo estimate of a moment over realisations of `model`.
pub fn moment_mc(
    model: &FloquetModel,
    pattern: &FloquetPattern,
    n_samples: usize,
    master_seed: u64,
    workers: usize,
) -> Result<ComplexEstimate> {
    pattern.check(model.hilbert_dim()?)?;
    if n_samples < 2 {
        return Err(Error::Domain("n_samples must be >= 2".into()));
    }
    let values = par_map_ordered(n_samples, workers, |s| {
        let u = model.sample(derive_stream(master_seed, s as u64))?;
        Ok(pattern.evaluate(u.matrix()))
    })?;
    ComplexEstimate::from_samples(&values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{standard_orderings, Boundary, ManyBodyIndex, OrderingKind};
    use crate::weingarten::{haar_moment, MomentPattern};

    fn circuit(kind: OrderingKind, d: usize, l: usize, q: usize, b: Boundary, s: u64) -> FloquetModel {
        FloquetModel::Circuit(standard_orderings(kind, d, l, q, b, derive_stream(s, 0)).unwrap())
    }

    #[test]
    fn second_moment_identity_small_circuits() {
        for b in [Boundary::Open, Boundary::Periodic] {
            for kind in [OrderingKind::Staircase, OrderingKind::Random] {
                let m = circuit(kind, 1, 3, 2, b, 3);
                let mat = second_moment_exact(&m).unwrap();
                assert!(second_moment_deviation(&mat, 8) < 1e-12);
            }
        }
    }

    #[test]
    fn channel_preserves_vectorised_identity() {
        let m = circuit(OrderingKind::Brickwork, 1, 4, 2, Boundary::Periodic, 0);
        let ch = MomentChannel2::new(&m.layout().unwrap()).unwrap();
        let n = ch.dim();
        let mut v = vec![0.0; n * n];
        for j in 0..n {
            v[j * n + j] = 1.0;
        }
        let before = v.clone();
        ch.apply(&mut v);
        for (a, b) in v.iter().zip(&before) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn sff2_is_one() {
        let cases = [
            circuit(OrderingKind::Brickwork, 1, 4, 2, Boundary::Periodic, 0),
            circuit(OrderingKind::Staircase, 1, 2, 3, Boundary::Open, 0),
            FloquetModel::Noninteracting { local_dim: 2, sites: 2 },
            FloquetModel::SingleCue { dim: 7 },
        ];
        for m in cases {
            let s = sff2_from_channel(&m).unwrap();
            assert!((s - 1.0).abs() < 1e-12, "{m:?}: {s}");
        }
    }

    #[test]
    fn single_gate_fourth_moment_is_haar_moment() {
        let m = circuit(OrderingKind::Brickwork, 1, 2, 2, Boundary::Open, 0);
        let table = solve_table(4, 2).unwrap();
        let pats = [
            ([0, 0, 1, 1], [0, 0, 1, 1]),
            ([0, 1, 2, 3], [2, 3, 0, 1]),
            ([0, 0, 0, 0], [0, 0, 0, 0]),
            ([1, 2, 3, 0], [1, 0, 3, 2]),
            ([0, 1, 0, 1], [0, 1, 0, 1]),
        ];
        for (a, b) in pats {
            let fp = FloquetPattern::fourth(a, b);
            let exact = fourth_moment_exact(&m, &fp).unwrap();
            let hp = MomentPattern::new(
                fp.rows.iter().map(|x| x + 1).collect(),
                fp.cols.iter().map(|x| x + 1).collect(),
                fp.rows_conj.iter().map(|x| x + 1).collect(),
                fp.cols_conj.iter().map(|x| x + 1).collect(),
            )
            .unwrap();
            let want = to_f64(&haar_moment(&table, &hp).unwrap());
            assert!((exact - want).abs() < 1e-14, "{a:?} {b:?}");
        }
    }

    #[test]
    fn fourth_contracts_to_second() {
        let m = circuit(OrderingKind::Staircase, 1, 3, 2, Boundary::Open, 0);
        let layout = m.layout().unwrap();
        let ch2 = MomentChannel2::new(&layout).unwrap();
        let ch4 = MomentChannel4::new(&layout).unwrap();
        let n = 8;
        let idx = |a: usize, b: usize, c: usize, d: usize| ((a * n + b) * n + c) * n + d;
        for (j1, j1p, j2) in [(0, 0, 3), (2, 5, 1), (7, 7, 7)] {
            let mut v = vec![0.0; n * n * n * n];
            v[idx(j1, j2, j1p, j2)] = 1.0;
            ch4.apply(&mut v);
            for (i1, i1p) in [(0, 0), (1, 4), (6, 6), (3, 2)] {
                let contracted: f64 = (0..n).map(|i2| v[idx(i1, i2, i1p, i2)]).sum();
                let want = ch2.entry(i1, j1, i1p, j1p);
                assert!((contracted - want).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn noninteracting_fourth_moment_factorises() {
        let (q, l) = (2, 2);
        let m = FloquetModel::Noninteracting { local_dim: q, sites: l };
        let table = solve_table(q, 2).unwrap();
        let pats = [
            ([0, 0, 3, 3], [0, 0, 3, 3]),
            ([0, 1, 2, 3], [2, 3, 0, 1]),
            ([1, 1, 1, 1], [1, 1, 1, 1]),
            ([0, 3, 3, 0], [3, 0, 0, 3]),
        ];
        for (a, b) in pats {
            let fp = FloquetPattern::fourth(a, b);
            let exact = fourth_moment_exact(&m, &fp).unwrap();
            let digit = |x: usize, site: usize| ManyBodyIndex::decode(x, q, l).digits[site] + 1;
            let mut prod = 1.0;
            for site in 0..l {
                let dv = |v: &Vec<usize>| v.iter().map(|&x| digit(x, site)).collect::<Vec<_>>();
                let hp = MomentPattern::new(dv(&fp.rows), dv(&fp.cols), dv(&fp.rows_conj), dv(&fp.cols_conj)).unwrap();
                prod *= to_f64(&haar_moment(&table, &hp).unwrap());
            }
            assert!((exact - prod).abs() < 1e-14, "{a:?} {b:?}: {exact} vs {prod}");
        }
    }

    #[test]
    fn resource_ceilings() {
        let m = circuit(OrderingKind::Brickwork, 1, 5, 2, Boundary::Open, 0);
        assert!(matches!(second_moment_exact(&m), Err(Error::Resource(_))));
        assert!(matches!(
            fourth_moment_exact(&m, &FloquetPattern::fourth([0; 4], [0; 4])),
            Err(Error::Resource(_))
        ));
        assert!(sff2_from_channel(&m).is_ok());
    }

    #[test]
    fn rmt_targets() {
        assert_eq!(FloquetPattern::second(1, 2, 1, 2).rmt_target(4), 0.25);
        assert_eq!(FloquetPattern::second(1, 2, 1, 3).rmt_target(4), 0.0);
        assert_eq!(FloquetPattern::fourth([0, 0, 0, 0], [0, 0, 0, 0]).rmt_target(2), 0.5);
        assert_eq!(FloquetPattern::fourth([0, 1, 2, 3], [2, 3, 0, 1]).rmt_target(4), 1.0 / 16.0);
    }

    #[test]
    fn mc_second_moment_small() {
        let m = circuit(OrderingKind::Brickwork, 1, 3, 2, Boundary::Open, 0);
        let est = moment_mc(&m, &FloquetPattern::second(2, 5, 2, 5), 4000, 9, 2).unwrap();
        assert!(est.z_score(C64::new(0.125, 0.0)) < 5.0);
        let est = moment_mc(&m, &FloquetPattern::second(2, 5, 3, 5), 4000, 9, 2).unwrap();
        assert!(est.z_score(C64::new(0.0, 0.0)) < 5.0);
    }
}
