//! Floquet circuits of two-qudit gates on `D`-dimensional qudit lattices.
//!
//! Conventions:
//!
//! - Sites are 1-based coordinate vectors, ordered lexicographically. The
//!   many-body basis index is mixed-radix big-endian in that order, so the
//!   first site is the most significant digit.
//! - `gate_order` lists bonds left to right as factors of the Floquet
//!   operator: `U = W[gate_order[0]] · W[gate_order[1]] ⋯`. The last entry acts
//!   first on states. Orders produced here sort bonds by ascending substep.
//! - Every bond's gate is drawn from the stream `seed.substream(k)` where `k`
//!   is the bond's position in the canonical bond enumeration, so one seed
//!   gives the same gates under any ordering of the same lattice.
//! - With periodic boundaries and `L = 2` the wrap-around pair coincides with
//!   the direct pair and is listed once.

use std::collections::{HashMap, HashSet};
use std::fmt;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::rng::{cue_sample, SeedSpec, UnitaryMatrix};
use crate::{Error, Result, C64};

/// Largest dense Hilbert-space dimension assembled.
pub const MAX_DENSE_DIM: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Periodic,
    Open,
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Periodic => "periodic",
            Boundary::Open => "open",
        })
    }
}

/// A lattice site; coordinates are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatticeSite {
    pub coords: Vec<usize>,
}

impl LatticeSite {
    pub fn new(coords: Vec<usize>) -> Self {
        LatticeSite { coords }
    }
}

impl fmt::Display for LatticeSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", c.join(","))
    }
}

/// Nearest-neighbour pair carrying one gate per period, applied at `substep`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bond {
    pub a: LatticeSite,
    pub b: LatticeSite,
    pub substep: usize,
}

/// One member of the circuit family, up to gate randomness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitSpec {
    pub dimension: usize,
    pub linear_size: usize,
    pub local_dim: usize,
    pub boundary: Boundary,
    pub bonds: Vec<Bond>,
    /// Indices into `bonds`, leftmost operator factor first.
    pub gate_order: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderingKind {
    Brickwork,
    Staircase,
    Random,
}

/// A broken invariant found by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    Shape,
    SiteOutOfRange,
    NotNearestNeighbor,
    DuplicateBond,
    MissingBond,
    BadSubstep,
    SharedSubstepAtSite,
    GateOrder,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.kind, self.detail)
    }
}

/// Canonical lattice geometry shared by validation, ordering and assembly.
#[derive(Debug, Clone)]
pub struct Lattice {
    pub dimension: usize,
    pub linear_size: usize,
    pub boundary: Boundary,
}

impl Lattice {
    pub fn new(dimension: usize, linear_size: usize, boundary: Boundary) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidCircuit("dimension must be >= 1".into()));
        }
        if linear_size < 2 {
            return Err(Error::InvalidCircuit("linear_size must be >= 2".into()));
        }
        u32::try_from(dimension)
            .ok()
            .and_then(|d| linear_size.checked_pow(d))
            .filter(|&n| n <= 1 << 20)
            .ok_or_else(|| Error::Resource("lattice too large".into()))?;
        Ok(Lattice {
            dimension,
            linear_size,
            boundary,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.linear_size.pow(self.dimension as u32)
    }

    /// Position of a site in lexicographic order.
    pub fn site_index(&self, site: &LatticeSite) -> Option<usize> {
        if site.coords.len() != self.dimension {
            return None;
        }
        let mut idx = 0;
        for &c in &site.coords {
            if c == 0 || c > self.linear_size {
                return None;
            }
            idx = idx * self.linear_size + (c - 1);
        }
        Some(idx)
    }

    pub fn site(&self, mut index: usize) -> LatticeSite {
        let mut coords = vec![0; self.dimension];
        for k in (0..self.dimension).rev() {
            coords[k] = index % self.linear_size + 1;
            index /= self.linear_size;
        }
        LatticeSite { coords }
    }

    /// Every nearest-neighbour pair once, as `(site, site + e_axis)` with the
    /// wrap-around pair oriented `(L, 1)`. Also returns the axis of each pair.
    pub fn canonical_bonds(&self) -> Vec<(LatticeSite, LatticeSite, usize)> {
        let l = self.linear_size;
        let mut out = Vec::new();
        for i in 0..self.n_sites() {
            let a = self.site(i);
            for axis in 0..self.dimension {
                let mut b = a.clone();
                if a.coords[axis] < l {
                    b.coords[axis] += 1;
                } else if self.boundary == Boundary::Periodic && l > 2 {
                    b.coords[axis] = 1;
                } else {
                    continue;
                }
                out.push((a.clone(), b, axis));
            }
        }
        out
    }

    fn is_neighbor(&self, a: &LatticeSite, b: &LatticeSite) -> bool {
        let l = self.linear_size;
        let mut differing = 0;
        let mut ok = true;
        for (&x, &y) in a.coords.iter().zip(&b.coords) {
            if x == y {
                continue;
            }
            differing += 1;
            let d = x.abs_diff(y);
            let wrap = self.boundary == Boundary::Periodic && d == l - 1;
            ok &= d == 1 || wrap;
        }
        differing == 1 && ok
    }
}

fn pair_key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

impl CircuitSpec {
    pub fn lattice(&self) -> Result<Lattice> {
        Lattice::new(self.dimension, self.linear_size, self.boundary)
    }

    /// Hilbert-space dimension `q^(L^D)`, if it fits in `usize`.
    pub fn hilbert_dim(&self) -> Option<usize> {
        let sites = self.linear_size.checked_pow(u32::try_from(self.dimension).ok()?)?;
        self.local_dim.checked_pow(u32::try_from(sites).ok()?)
    }

    /// Number of distinct substeps.
    pub fn substep_count(&self) -> usize {
        self.bonds
            .iter()
            .map(|b| b.substep)
            .collect::<HashSet<_>>()
            .len()
    }

    /// Re-derives `gate_order` from substeps (ascending, ties by bond index).
    pub fn with_substep_order(mut self) -> Self {
        let mut order: Vec<usize> = (0..self.bonds.len()).collect();
        order.sort_by_key(|&i| (self.bonds[i].substep, i));
        self.gate_order = order;
        self
    }

    /// The gate sequence in operator order, ready for assembly.
    pub fn gate_layout(&self) -> Result<GateLayout> {
        let violations = validate(self);
        if !violations.is_empty() {
            let msgs: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
            return Err(Error::InvalidCircuit(msgs.join("; ")));
        }
        let lattice = self.lattice()?;
        let canonical: HashMap<(usize, usize), usize> = lattice
            .canonical_bonds()
            .iter()
            .enumerate()
            .map(|(k, (a, b, _))| {
                let ia = lattice.site_index(a).unwrap();
                let ib = lattice.site_index(b).unwrap();
                (pair_key(ia, ib), k)
            })
            .collect();
        let gates = self
            .gate_order
            .iter()
            .map(|&bi| {
                let bond = &self.bonds[bi];
                let ia = lattice.site_index(&bond.a).unwrap();
                let ib = lattice.site_index(&bond.b).unwrap();
                LocalGate {
                    sites: vec![ia, ib],
                    stream: canonical[&pair_key(ia, ib)] as u64,
                }
            })
            .collect();
        Ok(GateLayout {
            local_dim: self.local_dim,
            n_sites: lattice.n_sites(),
            gates,
        })
    }
}

/// Checks every structural invariant and returns all violations found.
pub fn validate(spec: &CircuitSpec) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |kind, detail: String| out.push(Violation { kind, detail });
    if spec.local_dim < 2 {
        push(ViolationKind::Shape, format!("local_dim {} < 2", spec.local_dim));
    }
    let lattice = match Lattice::new(spec.dimension, spec.linear_size, spec.boundary) {
        Ok(l) => l,
        Err(e) => {
            push(ViolationKind::Shape, e.to_string());
            return out;
        }
    };

    let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
    let mut incident: HashMap<usize, Vec<(usize, usize)>> = HashMap::new();
    for (bi, bond) in spec.bonds.iter().enumerate() {
        let (Some(ia), Some(ib)) = (lattice.site_index(&bond.a), lattice.site_index(&bond.b)) else {
            push(
                ViolationKind::SiteOutOfRange,
                format!("bond {bi} {}-{} has a site outside the lattice", bond.a, bond.b),
            );
            continue;
        };
        if !lattice.is_neighbor(&bond.a, &bond.b) {
            push(
                ViolationKind::NotNearestNeighbor,
                format!("bond {bi} {}-{} is not a nearest-neighbour pair", bond.a, bond.b),
            );
            continue;
        }
        if bond.substep == 0 {
            push(ViolationKind::BadSubstep, format!("bond {bi} has substep 0"));
        }
        if let Some(prev) = seen.insert(pair_key(ia, ib), bi) {
            push(
                ViolationKind::DuplicateBond,
                format!("bonds {prev} and {bi} join {} and {}", bond.a, bond.b),
            );
            continue;
        }
        incident.entry(ia).or_default().push((bi, bond.substep));
        incident.entry(ib).or_default().push((bi, bond.substep));
    }
    for (a, b, _) in lattice.canonical_bonds() {
        let key = pair_key(lattice.site_index(&a).unwrap(), lattice.site_index(&b).unwrap());
        if !seen.contains_key(&key) {
            push(ViolationKind::MissingBond, format!("no bond joins {a} and {b}"));
        }
    }
    let mut sites: Vec<_> = incident.into_iter().collect();
    sites.sort();
    for (site, bonds) in sites {
        let mut by_step: HashMap<usize, Vec<usize>> = HashMap::new();
        for (bi, s) in bonds {
            by_step.entry(s).or_default().push(bi);
        }
        let mut clashes: Vec<_> = by_step.into_iter().filter(|(_, v)| v.len() > 1).collect();
        clashes.sort();
        for (s, v) in clashes {
            push(
                ViolationKind::SharedSubstepAtSite,
                format!("site {} has bonds {v:?} sharing substep {s}", lattice.site(site)),
            );
        }
    }

    let n = spec.bonds.len();
    let mut used = vec![false; n];
    let mut order_ok = spec.gate_order.len() == n;
    for &g in &spec.gate_order {
        if g >= n || used[g] {
            order_ok = false;
            break;
        }
        used[g] = true;
    }
    if !order_ok {
        push(
            ViolationKind::GateOrder,
            "gate_order is not a permutation of the bond indices".into(),
        );
    } else if spec
        .gate_order
        .windows(2)
        .any(|w| spec.bonds[w[0]].substep > spec.bonds[w[1]].substep)
    {
        push(
            ViolationKind::GateOrder,
            "gate_order is not sorted by substep".into(),
        );
    }
    out
}

/// Standard members of the family.
///
/// - `Brickwork`: bond from coordinate `n` along axis `a` (0-based) gets
///   substep `2a + 1` for odd `n` and `2a + 2` for even `n`; in 1D this is
///   `2 − (n mod 2)`. Periodic boundaries need even `L`.
/// - `Staircase` (1D only): bond `(n, n+1)` gets substep `n`.
/// - `Random`: bonds in a seeded random order get the smallest substep unused
///   at either end (first fit).
pub fn standard_orderings(
    kind: OrderingKind,
    dimension: usize,
    linear_size: usize,
    local_dim: usize,
    boundary: Boundary,
    seed: SeedSpec,
) -> Result<CircuitSpec> {
    let lattice = Lattice::new(dimension, linear_size, boundary)?;
    let canonical = lattice.canonical_bonds();
    let mut substeps = vec![0usize; canonical.len()];
    let mut tie_break: Vec<usize> = (0..canonical.len()).collect();
    match kind {
        OrderingKind::Brickwork => {
            if boundary == Boundary::Periodic && linear_size % 2 == 1 {
                return Err(Error::InvalidCircuit(format!(
                    "brickwork with periodic boundary needs even L, got {linear_size}"
                )));
            }
            for (k, (a, _, axis)) in canonical.iter().enumerate() {
                let parity = if a.coords[*axis] % 2 == 1 { 1 } else { 2 };
                substeps[k] = 2 * axis + parity;
            }
        }
        OrderingKind::Staircase => {
            if dimension != 1 {
                return Err(Error::InvalidCircuit(
                    "staircase ordering is defined for D = 1".into(),
                ));
            }
            for (k, (a, _, _)) in canonical.iter().enumerate() {
                substeps[k] = a.coords[0];
            }
        }
        OrderingKind::Random => {
            let mut rng = seed.rng();
            let mut visit: Vec<usize> = (0..canonical.len()).collect();
            visit.shuffle(&mut rng);
            let mut taken: HashMap<usize, HashSet<usize>> = HashMap::new();
            for (rank, &k) in visit.iter().enumerate() {
                let (a, b, _) = &canonical[k];
                let ia = lattice.site_index(a).unwrap();
                let ib = lattice.site_index(b).unwrap();
                let mut s = 1;
                while taken.get(&ia).is_some_and(|t| t.contains(&s))
                    || taken.get(&ib).is_some_and(|t| t.contains(&s))
                {
                    s += 1;
                }
                taken.entry(ia).or_default().insert(s);
                taken.entry(ib).or_default().insert(s);
                substeps[k] = s;
                tie_break[k] = rank;
            }
        }
    }
    let bonds: Vec<Bond> = canonical
        .into_iter()
        .zip(&substeps)
        .map(|((a, b, _), &substep)| Bond { a, b, substep })
        .collect();
    let mut gate_order: Vec<usize> = (0..bonds.len()).collect();
    gate_order.sort_by_key(|&i| (substeps[i], tie_break[i]));
    Ok(CircuitSpec {
        dimension,
        linear_size,
        local_dim,
        boundary,
        bonds,
        gate_order,
    })
}

/// A gate acting on one or more sites, with the RNG substream it draws from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalGate {
    /// Site indices; the first is the most significant local digit.
    pub sites: Vec<usize>,
    pub stream: u64,
}

/// Local gates in operator order over `n_sites` qudits of dimension `local_dim`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GateLayout {
    pub local_dim: usize,
    pub n_sites: usize,
    /// Leftmost factor first; the last gate acts first.
    pub gates: Vec<LocalGate>,
}

/// Flat-index tables for one gate: every basis index is `base[r] + local[x]`.
#[derive(Debug, Clone)]
pub struct Embedding {
    pub base: Vec<usize>,
    pub local: Vec<usize>,
}

impl GateLayout {
    pub fn hilbert_dim(&self) -> Result<usize> {
        u32::try_from(self.n_sites)
            .ok()
            .and_then(|n| self.local_dim.checked_pow(n))
            .ok_or_else(|| Error::Resource("Hilbert space dimension overflows".into()))
    }

    pub fn embedding(&self, sites: &[usize]) -> Embedding {
        let q = self.local_dim;
        let stride = |s: usize| q.pow((self.n_sites - 1 - s) as u32);
        let mut local = vec![0usize];
        for &s in sites {
            local = local
                .iter()
                .flat_map(|&off| (0..q).map(move |d| off + d * stride(s)))
                .collect();
        }
        let mut base = vec![0usize];
        for s in (0..self.n_sites).filter(|s| !sites.contains(s)) {
            base = base
                .iter()
                .flat_map(|&off| (0..q).map(move |d| off + d * stride(s)))
                .collect();
        }
        Embedding { base, local }
    }

    /// Multiplies the given gate matrices in operator order.
    ///
    /// `gates[k]` is the matrix for `self.gates[k]` and must have dimension
    /// `q^(number of sites)`.
    pub fn assemble(&self, gates: &[DMatrix<C64>]) -> Result<UnitaryMatrix> {
        if gates.len() != self.gates.len() {
            return Err(Error::SizeMismatch {
                left: gates.len(),
                right: self.gates.len(),
            });
        }
        let n = self.hilbert_dim()?;
        if n > MAX_DENSE_DIM {
            return Err(Error::Resource(format!(
                "Hilbert space dimension {n} exceeds the dense ceiling {MAX_DENSE_DIM}"
            )));
        }
        let mut u = DMatrix::<C64>::identity(n, n);
        for (gate, m) in self.gates.iter().zip(gates).rev() {
            let d = self.local_dim.pow(gate.sites.len() as u32);
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::SizeMismatch {
                    left: m.nrows(),
                    right: d,
                });
            }
            apply_left(&mut u, m, &self.embedding(&gate.sites));
        }
        Ok(UnitaryMatrix::from_unchecked(u))
    }

    /// Draws every gate from CUE and assembles the Floquet operator.
    pub fn sample(&self, seed: SeedSpec) -> Result<UnitaryMatrix> {
        let n = self.hilbert_dim()?;
        if n > MAX_DENSE_DIM {
            return Err(Error::Resource(format!(
                "Hilbert space dimension {n} exceeds the dense ceiling {MAX_DENSE_DIM}"
            )));
        }
        let gates = self
            .gates
            .iter()
            .map(|g| {
                let d = self.local_dim.pow(g.sites.len() as u32);
                cue_sample(d, seed.substream(g.stream)).map(UnitaryMatrix::into_inner)
            })
            .collect::<Result<Vec<_>>>()?;
        self.assemble(&gates)
    }
}

/// `m ← (gate ⊗ 1) · m` with the gate placed by `emb`.
pub fn apply_left(m: &mut DMatrix<C64>, gate: &DMatrix<C64>, emb: &Embedding) {
    let d = emb.local.len();
    let mut buf = vec![C64::new(0.0, 0.0); d];
    for col in 0..m.ncols() {
        for &b in &emb.base {
            for (x, slot) in buf.iter_mut().enumerate() {
                *slot = m[(b + emb.local[x], col)];
            }
            for x in 0..d {
                let mut acc = C64::new(0.0, 0.0);
                for (y, v) in buf.iter().enumerate() {
                    acc += gate[(x, y)] * v;
                }
                m[(b + emb.local[x], col)] = acc;
            }
        }
    }
}

/// Site-local digits of a many-body basis state, first site most significant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManyBodyIndex {
    pub digits: Vec<usize>,
}

impl ManyBodyIndex {
    pub fn encode(&self, local_dim: usize) -> Result<usize> {
        let mut flat = 0usize;
        for &d in &self.digits {
            if d >= local_dim {
                return Err(Error::IndexOutOfRange(format!("digit {d} >= {local_dim}")));
            }
            flat = flat
                .checked_mul(local_dim)
                .and_then(|f| f.checked_add(d))
                .ok_or_else(|| Error::Resource("index overflow".into()))?;
        }
        Ok(flat)
    }

    pub fn decode(mut flat: usize, local_dim: usize, n_sites: usize) -> Self {
        let mut digits = vec![0; n_sites];
        for k in (0..n_sites).rev() {
            digits[k] = flat % local_dim;
            flat /= local_dim;
        }
        ManyBodyIndex { digits }
    }
}

/// Floquet operator of one circuit realisation.
pub fn build_floquet(spec: &CircuitSpec, seed: SeedSpec) -> Result<UnitaryMatrix> {
    let n = spec
        .hilbert_dim()
        .ok_or_else(|| Error::Resource("Hilbert space dimension overflows".into()))?;
    if n > MAX_DENSE_DIM {
        return Err(Error::Resource(format!(
            "Hilbert space dimension {n} exceeds the dense ceiling {MAX_DENSE_DIM}"
        )));
    }
    spec.gate_layout()?.sample(seed)
}

/// Single-site gates on `sites` qudits, one per site.
pub fn noninteracting_layout(local_dim: usize, sites: usize) -> Result<GateLayout> {
    if local_dim < 2 || sites == 0 {
        return Err(Error::InvalidDimension(format!(
            "noninteracting model needs q >= 2 and L >= 1, got q={local_dim}, L={sites}"
        )));
    }
    if u32::try_from(sites).ok().and_then(|l| local_dim.checked_pow(l)).is_none() {
        return Err(Error::Resource(format!("q^L overflows for q={local_dim}, L={sites}")));
    }
    Ok(GateLayout {
        local_dim,
        n_sites: sites,
        gates: (0..sites)
            .map(|s| LocalGate {
                sites: vec![s],
                stream: s as u64,
            })
            .collect(),
    })
}

/// A noninteracting realisation and its single-site factors.
#[derive(Debug, Clone)]
pub struct NoninteractingRealization {
    pub floquet: UnitaryMatrix,
    pub factors: Vec<UnitaryMatrix>,
}

/// `U = w¹ ⊗ w² ⊗ ⋯ ⊗ wᴸ` with independent CUE(q) factors.
pub fn build_noninteracting(
    local_dim: usize,
    sites: usize,
    seed: SeedSpec,
) -> Result<NoninteractingRealization> {
    let layout = noninteracting_layout(local_dim, sites)?;
    let n = layout.hilbert_dim()?;
    if n > MAX_DENSE_DIM {
        return Err(Error::Resource(format!(
            "Hilbert space dimension {n} exceeds the dense ceiling {MAX_DENSE_DIM}"
        )));
    }
    let factors = (0..sites)
        .map(|s| cue_sample(local_dim, seed.substream(s as u64)))
        .collect::<Result<Vec<_>>>()?;
    let mut floquet = factors[0].clone();
    for f in &factors[1..] {
        floquet = floquet.kron(f);
    }
    Ok(NoninteractingRealization { floquet, factors })
}

/// Ensembles whose Floquet operators can be sampled.
#[derive(Debug, Clone, PartialEq)]
pub enum FloquetModel {
    /// One CUE matrix of the given dimension.
    SingleCue { dim: usize },
    Circuit(CircuitSpec),
    Noninteracting { local_dim: usize, sites: usize },
}

impl FloquetModel {
    pub fn layout(&self) -> Result<GateLayout> {
        match self {
            FloquetModel::SingleCue { dim } => {
                if *dim == 0 {
                    return Err(Error::InvalidDimension("CUE dimension must be >= 1".into()));
                }
                Ok(GateLayout {
                    local_dim: *dim,
                    n_sites: 1,
                    gates: vec![LocalGate {
                        sites: vec![0],
                        stream: 0,
                    }],
                })
            }
            FloquetModel::Circuit(spec) => spec.gate_layout(),
            FloquetModel::Noninteracting { local_dim, sites } => {
                noninteracting_layout(*local_dim, *sites)
            }
        }
    }

    pub fn hilbert_dim(&self) -> Result<usize> {
        self.layout()?.hilbert_dim()
    }

    /// One realisation.
    pub fn sample(&self, seed: SeedSpec) -> Result<UnitaryMatrix> {
        match self {
            FloquetModel::SingleCue { dim } => cue_sample(*dim, seed),
            _ => self.layout()?.sample(seed),
        }
    }
}
