//! Schur–Weyl machinery for `n` qutrits: partitions, irrep dimensions and
//! multiplicities, Schur polynomials, Young symmetrizers and reduced bases.
//!
//! Computational strings `|s_1 … s_n⟩` are indexed with particle 1 as the most
//! significant base-3 digit, matching `A_1 ⊗ A_2 ⊗ … ⊗ A_n`.

use std::collections::{HashMap, VecDeque};

use faer::Mat;
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use crate::error::{EngineError, Result};
use crate::linalg::{self, c64, re, CMat, ZERO};
use crate::su3::{self, Generators, IrrepLabel, Sixths, WeightState};

/// Largest particle number for which dense `3^n` objects are built.
pub const DENSE_LIMIT: u32 = 6;

/// Young diagram with at most three rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition3(pub [u32; 3]);

impl Partition3 {
    pub fn new(parts: [u32; 3]) -> Result<Self> {
        let [a, b, c] = parts;
        if a >= b && b >= c {
            Ok(Partition3(parts))
        } else {
            Err(EngineError::InvalidParams(format!("{parts:?} is not non-increasing")))
        }
    }

    pub fn from_label(label: IrrepLabel, n: u32) -> Result<Self> {
        Ok(Partition3(label.partition(n)?))
    }

    pub fn n(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn label(&self) -> IrrepLabel {
        IrrepLabel::new(self.0[0] - self.0[1], self.0[1] - self.0[2])
    }

    /// Particle positions (0-based) in each row of the row-major canonical
    /// standard tableau.
    pub fn canonical_rows(&self) -> Vec<Vec<usize>> {
        let mut next = 0usize;
        self.0
            .iter()
            .filter(|&&len| len > 0)
            .map(|&len| {
                let row: Vec<usize> = (next..next + len as usize).collect();
                next += len as usize;
                row
            })
            .collect()
    }

    /// Columns of the canonical tableau.
    pub fn canonical_columns(&self) -> Vec<Vec<usize>> {
        let rows = self.canonical_rows();
        (0..self.0[0] as usize)
            .map(|j| rows.iter().filter_map(|r| r.get(j).copied()).collect())
            .collect()
    }
}

/// All partitions of `n` into at most three parts, `λ1` then `λ2` descending.
pub fn partitions(n: u32) -> Vec<Partition3> {
    let mut out = Vec::new();
    for l1 in (0..=n).rev() {
        for l2 in (0..=l1.min(n - l1)).rev() {
            let l3 = n - l1 - l2;
            if l3 <= l2 {
                out.push(Partition3([l1, l2, l3]));
            }
        }
    }
    out
}

/// Irrep labels occurring in `(C^3)^{⊗n}`, in partition order.
pub fn irrep_labels(n: u32) -> Vec<IrrepLabel> {
    partitions(n).iter().map(Partition3::label).collect()
}

fn factorial(k: u32) -> BigUint {
    (1..=k).fold(BigUint::one(), |acc, i| acc * i)
}

/// Exact multiplicity `m_λ = 2 d_λ n! / ((λ2+1)! (λ1+2)! λ3!)`.
pub fn multiplicity(partition: Partition3) -> BigUint {
    let [l1, l2, l3] = partition.0;
    let d = partition.label().dimension();
    let num = BigUint::from(2u32) * BigUint::from(d) * factorial(partition.n());
    num / (factorial(l2 + 1) * factorial(l1 + 2) * factorial(l3))
}

pub fn multiplicity_f64(partition: Partition3) -> f64 {
    multiplicity(partition).to_f64().unwrap_or(f64::INFINITY)
}

/// `(d_λ, m_λ)`.
pub fn dims(partition: Partition3) -> (usize, BigUint) {
    (partition.label().dimension(), multiplicity(partition))
}

/// One row of the irrep table of `(C^3)^{⊗n}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecompositionRow {
    pub partition: Partition3,
    pub label: IrrepLabel,
    pub dimension: usize,
    pub multiplicity: BigUint,
}

impl DecompositionRow {
    pub fn block_size(&self) -> BigUint {
        &self.multiplicity * BigUint::from(self.dimension)
    }
}

pub fn decomposition(n: u32) -> Vec<DecompositionRow> {
    partitions(n)
        .into_iter()
        .map(|partition| {
            let (dimension, multiplicity) = dims(partition);
            DecompositionRow {
                partition,
                label: partition.label(),
                dimension,
                multiplicity,
            }
        })
        .collect()
}

/// `Σ_λ m_λ d_λ`, which must equal `3^n`.
pub fn total_dimension(n: u32) -> BigUint {
    decomposition(n).iter().map(DecompositionRow::block_size).sum()
}

/// Visit every Gelfand–Tsetlin pattern with top row `λ`, passing
/// `(μ1, μ2, ν)`; the content of the matching tableau is
/// `(ν, μ1+μ2−ν, |λ|−μ1−μ2)`.
fn for_each_gt_pattern(partition: Partition3, mut f: impl FnMut(u32, u32, u32)) {
    let [l1, l2, l3] = partition.0;
    for m1 in l2..=l1 {
        for m2 in l3..=l2 {
            for nu in m2..=m1 {
                f(m1, m2, nu);
            }
        }
    }
}

/// Schur polynomial `s_λ(r1, r2, r3)` as a sum over semistandard tableaux.
pub fn schur_polynomial(partition: Partition3, r: [f64; 3]) -> f64 {
    let n = partition.n() as i32;
    let mut acc = 0.0;
    for_each_gt_pattern(partition, |m1, m2, nu| {
        let mu = (m1 + m2) as i32;
        let nu = nu as i32;
        acc += r[0].powi(nu) * r[1].powi(mu - nu) * r[2].powi(n - mu);
    });
    acc
}

/// Kostka number: semistandard fillings of `λ` with content `t`.
pub fn kostka(partition: Partition3, t: TypeVector) -> usize {
    let mut count = 0;
    for_each_gt_pattern(partition, |m1, m2, nu| {
        if nu == t.0[0] && m1 + m2 - nu == t.0[1] {
            count += 1;
        }
    });
    count
}

/// Occupation numbers `(t0, t1, t2)` of the computational levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeVector(pub [u32; 3]);

impl TypeVector {
    pub fn n(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `(w, y)` weight shared by every string of this type.
    pub fn weight(&self) -> (Sixths, Sixths) {
        let [a, b, c] = self.0.map(|x| x as i32);
        (Sixths(3 * (a - b)), Sixths(2 * (a + b) - 4 * c))
    }

    /// Strings with these occupations, ascending by index.
    pub fn strings(&self) -> Vec<Vec<u8>> {
        let n = self.n() as usize;
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(n);
        fn rec(left: [u32; 3], cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
            if left == [0, 0, 0] {
                out.push(cur.clone());
                return;
            }
            for digit in 0..3 {
                if left[digit] > 0 {
                    let mut l = left;
                    l[digit] -= 1;
                    cur.push(digit as u8);
                    rec(l, cur, out);
                    cur.pop();
                }
            }
        }
        rec(self.0, &mut cur, &mut out);
        out
    }
}

/// All type vectors of `n` particles, lexicographically descending.
pub fn type_vectors(n: u32) -> Vec<TypeVector> {
    let mut out = Vec::new();
    for a in (0..=n).rev() {
        for b in (0..=n - a).rev() {
            out.push(TypeVector([a, b, n - a - b]));
        }
    }
    out
}

pub fn string_index(s: &[u8]) -> usize {
    s.iter().fold(0usize, |acc, &d| acc * 3 + d as usize)
}

fn string_of_index(mut idx: usize, n: usize) -> Vec<u8> {
    let mut s = vec![0u8; n];
    for k in (0..n).rev() {
        s[k] = (idx % 3) as u8;
        idx /= 3;
    }
    s
}

/// Permutations of `0..n` that map each block to itself, with their signs.
fn block_group(blocks: &[Vec<usize>], n: usize) -> Vec<(Vec<usize>, i32)> {
    let mut group = vec![((0..n).collect::<Vec<_>>(), 1)];
    for block in blocks {
        let perms = permutations(block.len());
        let mut next = Vec::with_capacity(group.len() * perms.len());
        for (base, sign) in &group {
            for (perm, psign) in &perms {
                let mut sigma = base.clone();
                for (k, &pk) in perm.iter().enumerate() {
                    sigma[block[k]] = base[block[pk]];
                }
                next.push((sigma, sign * psign));
            }
        }
        group = next;
    }
    group
}

/// All permutations of `0..k` with signs, in lexicographic order.
pub fn permutations(k: usize) -> Vec<(Vec<usize>, i32)> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..k).collect();
    loop {
        let inversions = (0..k)
            .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
            .filter(|&(i, j)| p[i] > p[j])
            .count();
        out.push((p.clone(), if inversions % 2 == 0 { 1 } else { -1 }));
        // next lexicographic permutation
        let Some(i) = (1..k).rev().find(|&i| p[i - 1] < p[i]) else {
            break;
        };
        let j = (i..k).rev().find(|&j| p[j] > p[i - 1]).unwrap();
        p.swap(i - 1, j);
        p[i..].reverse();
    }
    out
}

/// Action of the permutation `σ` on a string: the particle at position `k`
/// moves to position `σ(k)`.
pub fn permute_string(sigma: &[usize], s: &[u8]) -> Vec<u8> {
    let mut out = vec![0u8; s.len()];
    for (k, &d) in s.iter().enumerate() {
        out[sigma[k]] = d;
    }
    out
}

/// Index map of the permutation operator `P(σ)` on `3^n` basis strings.
pub fn permutation_index_map(sigma: &[usize]) -> Vec<usize> {
    let n = sigma.len();
    (0..3usize.pow(n as u32))
        .map(|i| string_index(&permute_string(sigma, &string_of_index(i, n))))
        .collect()
}

fn restricted_group_sum(group: &[(Vec<usize>, i32)], strings: &[Vec<u8>], signed: bool) -> CMat {
    let pos: HashMap<&[u8], usize> = strings.iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect();
    let d = strings.len();
    let mut m = linalg::zeros(d);
    for (sigma, sign) in group {
        let w = if signed { f64::from(*sign) } else { 1.0 };
        for (col, s) in strings.iter().enumerate() {
            let row = pos[permute_string(sigma, s).as_slice()];
            m[(row, col)] += re(w);
        }
    }
    m
}

/// Young symmetrizer `(Σ_c sgn(c) P(c)) (Σ_r P(r))` of the canonical tableau,
/// restricted to the strings of type `t` (ordered as [`TypeVector::strings`]).
pub fn young_symmetrizer(partition: Partition3, t: TypeVector) -> Result<CMat> {
    if t.n() != partition.n() {
        return Err(EngineError::DimensionMismatch(format!(
            "type {:?} has {} particles, diagram has {}",
            t.0,
            t.n(),
            partition.n()
        )));
    }
    if partition.n() > DENSE_LIMIT {
        return Err(EngineError::TooManyParticles {
            n: partition.n(),
            limit: DENSE_LIMIT,
        });
    }
    if kostka(partition, t) == 0 {
        return Err(EngineError::IncompatibleType(t.0));
    }
    let n = partition.n() as usize;
    let strings = t.strings();
    let rows = block_group(&partition.canonical_rows(), n);
    let cols = block_group(&partition.canonical_columns(), n);
    let r = restricted_group_sum(&rows, &strings, false);
    let c = restricted_group_sum(&cols, &strings, true);
    Ok(&c * &r)
}

/// Relative singular-value cut used when extracting symmetrizer images.
pub const RANK_TOL: f64 = 1e-8;

/// Orthonormal basis of one copy of the irrep `λ` inside `(C^3)^{⊗n}`.
#[derive(Debug, Clone)]
pub struct ReducedBasis {
    pub label: IrrepLabel,
    pub partition: Partition3,
    /// `3^n × d_λ`, columns ordered as [`su3::enumerate_basis`].
    pub isometry: CMat,
    pub states: Vec<WeightState>,
}

impl ReducedBasis {
    pub fn dim(&self) -> usize {
        self.states.len()
    }

    /// Embed an irrep-basis operator into the full space: `B X B^H`.
    pub fn embed(&self, x: &CMat) -> CMat {
        &self.isometry * x * self.isometry.adjoint()
    }
}

/// Raw symmetrizer image: per type vector (descending order) the left
/// singular vectors above [`RANK_TOL`], embedded in the full space.
pub fn symmetrizer_image(partition: Partition3) -> Result<(CMat, Vec<TypeVector>)> {
    let n = partition.n();
    if n > DENSE_LIMIT {
        return Err(EngineError::TooManyParticles { n, limit: DENSE_LIMIT });
    }
    let full = 3usize.pow(n);
    let mut columns: Vec<(TypeVector, Vec<(usize, c64)>)> = Vec::new();
    for t in type_vectors(n) {
        let k = kostka(partition, t);
        if k == 0 {
            continue;
        }
        let strings = t.strings();
        let y = young_symmetrizer(partition, t)?;
        let (u, s, _) = linalg::svd(&y)?;
        let smax = s.first().copied().unwrap_or(0.0);
        let rank = s.iter().filter(|&&x| x > RANK_TOL * smax).count();
        if rank != k {
            return Err(EngineError::RankMismatch {
                expected: k,
                found: rank,
            });
        }
        for c in 0..rank {
            let col = strings
                .iter()
                .enumerate()
                .map(|(i, st)| (string_index(st), u[(i, c)]))
                .collect();
            columns.push((t, col));
        }
    }
    let d = partition.label().dimension();
    if columns.len() != d {
        return Err(EngineError::RankMismatch {
            expected: d,
            found: columns.len(),
        });
    }
    let mut b = Mat::zeros(full, d);
    for (j, (_, col)) in columns.iter().enumerate() {
        for &(i, v) in col {
            b[(i, j)] = v;
        }
    }
    Ok((b, columns.into_iter().map(|(t, _)| t).collect()))
}

/// Reduced basis whose projected generators coincide entrywise with
/// [`su3::irrep_matrices`]: degenerate weight spaces are resolved by
/// diagonalising `W²`, then phases are fixed along ladder-operator paths.
pub fn reduced_basis(partition: Partition3) -> Result<ReducedBasis> {
    let n = partition.n();
    let label = partition.label();
    let (raw, types) = symmetrizer_image(partition)?;
    let full_gens = collective_generators(n, 1.0, 2.0)?;
    let w2 = full_gens.isospin_squared();

    // resolve isospin inside each weight space
    let mut rotated = raw.clone();
    let mut states = Vec::with_capacity(types.len());
    let mut start = 0;
    while start < types.len() {
        let t = types[start];
        let end = (start..types.len()).find(|&j| types[j] != t).unwrap_or(types.len());
        let block = raw.subcols(start, end - start).to_owned();
        let (vals, vecs) = linalg::eigh(&linalg::sandwich(&block, &w2))?;
        let rot = &block * &vecs;
        let (w, y) = t.weight();
        for (k, lam) in vals.iter().enumerate() {
            rotated.col_mut(start + k).copy_from(rot.col(k));
            let twice_iso = ((4.0 * lam + 1.0).max(0.0).sqrt() - 1.0).round() as i32;
            states.push(WeightState::new(Sixths::from_halves(twice_iso), w, y));
        }
        start = end;
    }

    let target = su3::irrep_matrices(label, 1.0, 2.0)?;
    let d = target.dim();
    let mut order = vec![usize::MAX; d];
    for (col, s) in states.iter().enumerate() {
        let idx = target
            .index_of(s)
            .ok_or_else(|| EngineError::StateNotInIrrep(s.to_string()))?;
        order[idx] = col;
    }
    if order.contains(&usize::MAX) {
        return Err(EngineError::RankMismatch {
            expected: d,
            found: states.len(),
        });
    }
    let mut b = Mat::zeros(raw.nrows(), d);
    for (idx, &col) in order.iter().enumerate() {
        b.col_mut(idx).copy_from(rotated.col(col));
    }

    let projected = full_gens.project(&b);
    let phases = ladder_phases(&projected, &target.ops)?;
    for (j, ph) in phases.iter().enumerate() {
        for i in 0..b.nrows() {
            b[(i, j)] *= *ph;
        }
    }
    Ok(ReducedBasis {
        label,
        partition,
        isometry: b,
        states: target.basis,
    })
}

/// Diagonal phases `D` with `D^H P D = A` for the ladder operators.
fn ladder_phases(projected: &Generators, algebraic: &Generators) -> Result<Vec<c64>> {
    let d = algebraic.dim();
    let pairs = [
        (&projected.w_plus, &algebraic.w_plus),
        (&projected.w_minus, &algebraic.w_minus),
        (&projected.u_plus, &algebraic.u_plus),
        (&projected.u_minus, &algebraic.u_minus),
        (&projected.v_plus, &algebraic.v_plus),
        (&projected.v_minus, &algebraic.v_minus),
    ];
    let mut phases = vec![None; d];
    phases[0] = Some(re(1.0));
    let mut queue = VecDeque::from([0usize]);
    while let Some(j) = queue.pop_front() {
        let dj = phases[j].unwrap();
        for (p, a) in pairs {
            for i in 0..d {
                if phases[i].is_some() || a[(i, j)].norm() < 1e-8 {
                    continue;
                }
                let z = a[(i, j)] / (p[(i, j)] * dj).conj();
                if z.norm() < 1e-12 {
                    continue;
                }
                phases[i] = Some(z / z.norm());
                queue.push_back(i);
            }
        }
    }
    phases
        .into_iter()
        .map(|p| p.ok_or_else(|| EngineError::Numerical("ladder graph is disconnected".into())))
        .collect()
}

/// Kronecker sum `Σ_k 1 ⊗ … ⊗ A_k ⊗ … ⊗ 1`.
pub fn collective_operator(single: &CMat, n: u32) -> Result<CMat> {
    if single.nrows() != 3 || single.ncols() != 3 {
        return Err(EngineError::DimensionMismatch(
            "single-particle operator must be 3x3".into(),
        ));
    }
    if n > DENSE_LIMIT {
        return Err(EngineError::TooManyParticles { n, limit: DENSE_LIMIT });
    }
    let n = n as usize;
    let dim = 3usize.pow(n as u32);
    let mut out = linalg::zeros(dim);
    for col in 0..dim {
        let s = string_of_index(col, n);
        for k in 0..n {
            let stride = 3usize.pow((n - 1 - k) as u32);
            let base = col - s[k] as usize * stride;
            for a in 0..3 {
                let v = single[(a, s[k] as usize)];
                if v != ZERO {
                    out[(base + a * stride, col)] += v;
                }
            }
        }
    }
    Ok(out)
}

/// Collective generators on `(C^3)^{⊗n}`.
pub fn collective_generators(n: u32, omega_c: f64, omega_h: f64) -> Result<Generators> {
    let sp = su3::single_particle_generators(omega_c, omega_h).generators;
    let lift = |m: &CMat| collective_operator(m, n);
    Ok(Generators::from_raising(
        lift(&sp.wz)?,
        lift(&sp.y)?,
        lift(&sp.w_plus)?,
        lift(&sp.u_plus)?,
        lift(&sp.v_plus)?,
        omega_c,
        omega_h,
    ))
}

/// `B^H O B`.
pub fn project_operator(op: &CMat, basis: &ReducedBasis) -> Result<CMat> {
    if op.nrows() != basis.isometry.nrows() || op.ncols() != op.nrows() {
        return Err(EngineError::DimensionMismatch(format!(
            "operator is {}x{}, basis lives in dimension {}",
            op.nrows(),
            op.ncols(),
            basis.isometry.nrows()
        )));
    }
    Ok(linalg::sandwich(&basis.isometry, op))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partitions_small_n() {
        assert_eq!(partitions(1), vec![Partition3([1, 0, 0])]);
        assert_eq!(
            partitions(3),
            vec![Partition3([3, 0, 0]), Partition3([2, 1, 0]), Partition3([1, 1, 1])]
        );
        assert_eq!(
            partitions(4),
            vec![
                Partition3([4, 0, 0]),
                Partition3([3, 1, 0]),
                Partition3([2, 2, 0]),
                Partition3([2, 1, 1])
            ]
        );
    }

    #[test]
    fn n4_dimensions_and_multiplicities() {
        let table: Vec<_> = decomposition(4)
            .into_iter()
            .map(|r| (r.label.p, r.label.q, r.dimension, r.multiplicity.to_u64().unwrap()))
            .collect();
        assert_eq!(table, vec![(4, 0, 15, 1), (2, 1, 15, 3), (0, 2, 6, 2), (1, 0, 3, 3)]);
    }

    #[test]
    fn n3_mixed_symmetry_multiplicity() {
        assert_eq!(multiplicity(Partition3([2, 1, 0])), BigUint::from(2u32));
    }

    #[test]
    fn completeness_exact() {
        for n in 1..=40 {
            assert_eq!(total_dimension(n), BigUint::from(3u32).pow(n), "n={n}");
        }
    }

    #[test]
    fn schur_polynomial_small_cases() {
        let r = [0.7, 0.2, 0.1];
        assert!((schur_polynomial(Partition3([1, 0, 0]), r) - 1.0).abs() < 1e-15);
        let e2 = r[0] * r[1] + r[0] * r[2] + r[1] * r[2];
        assert!((schur_polynomial(Partition3([1, 1, 0]), r) - e2).abs() < 1e-15);
        for p in partitions(5) {
            let s = schur_polynomial(p, [1.0; 3]);
            assert_eq!(s, p.label().dimension() as f64);
        }
    }

    #[test]
    fn schur_expansion_of_power_sum() {
        let r = [0.5, 0.3, 0.9];
        for n in 1..=9 {
            let sum: f64 = partitions(n)
                .iter()
                .map(|&p| multiplicity_f64(p) * schur_polynomial(p, r))
                .sum();
            let expected = (r[0] + r[1] + r[2]).powi(n as i32);
            assert!((sum - expected).abs() < 1e-11 * expected, "n={n}");
        }
    }

    #[test]
    fn kostka_sums_to_dimension() {
        for n in 1..=6 {
            for p in partitions(n) {
                let total: usize = type_vectors(n).iter().map(|&t| kostka(p, t)).sum();
                assert_eq!(total, p.label().dimension());
            }
        }
    }

    #[test]
    fn permutations_of_three() {
        let p = permutations(3);
        assert_eq!(p.len(), 6);
        assert_eq!(p.iter().filter(|(_, s)| *s == -1).count(), 3);
    }

    #[test]
    fn symmetrizer_on_mixed_diagram_n3() {
        // rows {1,2},{3}; columns {1,3},{2}
        let p = Partition3([2, 1, 0]);
        assert_eq!(p.canonical_rows(), vec![vec![0, 1], vec![2]]);
        assert_eq!(p.canonical_columns(), vec![vec![0, 2], vec![1]]);
        let t = TypeVector([2, 1, 0]);
        assert_eq!(t.strings(), vec![vec![0, 0, 1], vec![0, 1, 0], vec![1, 0, 0]]);
        let y = young_symmetrizer(p, t).unwrap();
        // (1 - P_(13))(1 + P_(12)) on {|001⟩, |010⟩, |100⟩}
        let row_sum = [[2.0, 0.0, 0.0], [0.0, 1.0, 1.0], [0.0, 1.0, 1.0]];
        let swap13 = [[0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]];
        for i in 0..3 {
            for j in 0..3 {
                let direct: f64 = (0..3)
                    .map(|k| {
                        let c = if i == k { 1.0 } else { 0.0 } - swap13[i][k];
                        c * row_sum[k][j]
                    })
                    .sum();
                assert_eq!(y[(i, j)].re, direct);
            }
        }
        let (_, s, _) = linalg::svd(&y).unwrap();
        assert_eq!(s.iter().filter(|&&x| x > 1e-8).count(), 1);
    }

    #[test]
    fn symmetric_diagram_has_rank_one_per_type() {
        let p = Partition3([4, 0, 0]);
        for t in type_vectors(4) {
            let y = young_symmetrizer(p, t).unwrap();
            let (_, s, _) = linalg::svd(&y).unwrap();
            assert_eq!(s.iter().filter(|&&x| x > 1e-8 * s[0]).count(), 1);
        }
    }

    #[test]
    fn incompatible_type_is_rejected() {
        let err = young_symmetrizer(Partition3([1, 1, 1]), TypeVector([3, 0, 0]));
        assert!(matches!(err, Err(EngineError::IncompatibleType(_))));
    }

    #[test]
    fn fundamental_reduced_basis_is_a_permutation() {
        let b = reduced_basis(Partition3([1, 0, 0])).unwrap();
        for j in 0..3 {
            let nz: Vec<_> = (0..3).filter(|&i| b.isometry[(i, j)].norm() > 1e-12).collect();
            assert_eq!(nz.len(), 1);
            assert!((b.isometry[(nz[0], j)].norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetric_n2_spans_symmetric_subspace() {
        let b = reduced_basis(Partition3([2, 0, 0])).unwrap();
        assert_eq!(b.dim(), 6);
        let proj = &b.isometry * b.isometry.adjoint();
        let swap = permutation_index_map(&[1, 0]);
        let sym = Mat::from_fn(9, 9, |i, j| {
            let mut v = if i == j { 0.5 } else { 0.0 };
            if swap[j] == i {
                v += 0.5;
            }
            re(v)
        });
        assert!(linalg::max_abs_diff(&proj, &sym) < 1e-12);
    }

    #[test]
    fn n3_blocks_are_orthonormal_and_mutually_orthogonal() {
        let bases: Vec<_> = partitions(3).into_iter().map(|p| reduced_basis(p).unwrap()).collect();
        for (i, a) in bases.iter().enumerate() {
            let gram = a.isometry.adjoint() * &a.isometry;
            assert!(linalg::max_abs_diff(&gram, &linalg::identity(a.dim())) < 1e-10);
            for b in bases.iter().skip(i + 1) {
                let cross = a.isometry.adjoint() * &b.isometry;
                assert!(linalg::max_abs(cross.as_ref()) < 1e-10);
            }
        }
        let total: usize = bases.iter().zip([1, 2, 1]).map(|(b, m)| b.dim() * m).sum();
        assert_eq!(total, 27);
    }

    #[test]
    fn collective_wz_for_two_particles() {
        let sp = su3::single_particle_generators(1.0, 2.0).generators;
        let wz = collective_operator(&sp.wz, 2).unwrap();
        let expected = [1.0, 0.0, 0.5, 0.0, -1.0, -0.5, 0.5, -0.5, 0.0];
        assert!(linalg::is_diagonal(&wz, 0.0));
        for (i, e) in expected.iter().enumerate() {
            assert_eq!(wz[(i, i)].re, *e);
        }
        let id = collective_operator(&linalg::identity(3), 3).unwrap();
        let three = linalg::scale(linalg::identity(27).as_ref(), re(3.0));
        assert_eq!(linalg::max_abs_diff(&id, &three), 0.0);
    }

    #[test]
    fn collective_commutators_n3() {
        let g = collective_generators(3, 2.0 / 3.0, 5.0 / 3.0).unwrap();
        assert!(g.max_commutator_residual() < 1e-12);
    }

    #[test]
    fn projection_reproduces_algebraic_matrices_n4() {
        for p in partitions(4) {
            let b = reduced_basis(p).unwrap();
            let full = collective_generators(4, 2.0 / 3.0, 5.0 / 3.0).unwrap();
            let proj = full.project(&b.isometry);
            let alg = su3::irrep_matrices(p.label(), 2.0 / 3.0, 5.0 / 3.0).unwrap().ops;
            for (x, y) in [
                (&proj.wz, &alg.wz),
                (&proj.y, &alg.y),
                (&proj.w_plus, &alg.w_plus),
                (&proj.u_plus, &alg.u_plus),
                (&proj.v_plus, &alg.v_plus),
                (&proj.h, &alg.h),
            ] {
                assert!(linalg::max_abs_diff(x, y) < 1e-10, "{:?}", p);
            }
            let id = project_operator(&linalg::identity(81), &b).unwrap();
            assert!(linalg::max_abs_diff(&id, &linalg::identity(b.dim())) < 1e-12);
        }
    }

    #[test]
    fn project_operator_checks_dimensions() {
        let b = reduced_basis(Partition3([2, 0, 0])).unwrap();
        assert!(project_operator(&linalg::identity(27), &b).is_err());
    }

    #[test]
    fn size_guard() {
        assert!(collective_operator(&linalg::identity(3), 7).is_err());
    }
}
