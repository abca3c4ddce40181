//! Weight basis and generator matrices of SU(3) irreps `(p, q)`.
//!
//! States are labelled `|W, w, y⟩`: `W` is the total isospin of the
//! `W_z, W_±` sub-algebra, `w` the `W_z` eigenvalue and `y` the hypercharge.
//! All labels are stored exactly as integer multiples of 1/6.
//!
//! Single-particle conventions: the computational states `|0⟩, |1⟩, |2⟩` are
//! the energy levels `|e⟩, |g⟩, |f⟩`, so `W_+ = |e⟩⟨g|` drives the lasing
//! transition, `U_+ = |g⟩⟨f|` emits into the hot bath and `V_+ = |e⟩⟨f|` into
//! the cold bath.

use std::collections::HashMap;
use std::fmt;

use faer::Mat;

use crate::error::{EngineError, Result};
use crate::linalg::{self, c64, commutator, dagger, re, CMat, ZERO};

/// Exact rational with denominator 6.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Sixths(pub i32);

impl Sixths {
    pub const ZERO: Sixths = Sixths(0);

    pub fn from_halves(h: i32) -> Self {
        Sixths(3 * h)
    }

    pub fn from_thirds(t: i32) -> Self {
        Sixths(2 * t)
    }

    pub fn from_int(i: i32) -> Self {
        Sixths(6 * i)
    }

    pub fn to_f64(self) -> f64 {
        f64::from(self.0) / 6.0
    }
}

impl std::ops::Add for Sixths {
    type Output = Sixths;
    fn add(self, o: Sixths) -> Sixths {
        Sixths(self.0 + o.0)
    }
}

impl std::ops::Sub for Sixths {
    type Output = Sixths;
    fn sub(self, o: Sixths) -> Sixths {
        Sixths(self.0 - o.0)
    }
}

impl std::ops::Neg for Sixths {
    type Output = Sixths;
    fn neg(self) -> Sixths {
        Sixths(-self.0)
    }
}

impl fmt::Display for Sixths {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (num, den) = reduce(self.0, 6);
        if den == 1 {
            write!(f, "{num}")
        } else {
            write!(f, "{num}/{den}")
        }
    }
}

fn reduce(num: i32, den: i32) -> (i32, i32) {
    let mut a = num.abs();
    let mut b = den;
    while b != 0 {
        (a, b) = (b, a % b);
    }
    let g = a.max(1);
    (num / g, den / g)
}

/// Basis label `|W, w, y⟩` inside an irrep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WeightState {
    pub isospin: Sixths,
    pub isospin_z: Sixths,
    pub hypercharge: Sixths,
}

impl WeightState {
    pub fn new(isospin: Sixths, isospin_z: Sixths, hypercharge: Sixths) -> Self {
        WeightState {
            isospin,
            isospin_z,
            hypercharge,
        }
    }

    pub fn big_w(&self) -> f64 {
        self.isospin.to_f64()
    }

    pub fn w(&self) -> f64 {
        self.isospin_z.to_f64()
    }

    pub fn y(&self) -> f64 {
        self.hypercharge.to_f64()
    }

    /// The `(w, y)` weight, i.e. the weight space this state belongs to.
    pub fn weight(&self) -> (Sixths, Sixths) {
        (self.isospin_z, self.hypercharge)
    }

    fn shifted(&self, d_iso: i32, d_z: i32, d_y: i32) -> WeightState {
        WeightState {
            isospin: self.isospin + Sixths(d_iso),
            isospin_z: self.isospin_z + Sixths(d_z),
            hypercharge: self.hypercharge + Sixths(d_y),
        }
    }
}

impl fmt::Display for WeightState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(W={}, w={}, y={})", self.isospin, self.isospin_z, self.hypercharge)
    }
}

/// SU(3) irrep label in highest-weight notation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IrrepLabel {
    pub p: u32,
    pub q: u32,
}

impl IrrepLabel {
    pub const fn new(p: u32, q: u32) -> Self {
        IrrepLabel { p, q }
    }

    /// `d = (p+1)(q+1)(p+q+2)/2`.
    pub fn dimension(&self) -> usize {
        let (p, q) = (self.p as usize, self.q as usize);
        (p + 1) * (q + 1) * (p + q + 2) / 2
    }

    /// Whether this irrep occurs in `(C^3)^{⊗n}`.
    pub fn occurs_in(&self, n: u32) -> bool {
        let used = self.p + 2 * self.q;
        n >= used && (n - used).is_multiple_of(3)
    }

    pub fn check_for(&self, n: u32) -> Result<()> {
        if self.occurs_in(n) {
            Ok(())
        } else {
            Err(EngineError::InvalidIrrep {
                p: self.p,
                q: self.q,
                n,
            })
        }
    }

    /// Young diagram row lengths `[λ1, λ2, λ3]` for particle number `n`.
    pub fn partition(&self, n: u32) -> Result<[u32; 3]> {
        self.check_for(n)?;
        let l3 = (n - self.p - 2 * self.q) / 3;
        Ok([self.p + self.q + l3, self.q + l3, l3])
    }

    pub fn highest_weight(&self) -> (Sixths, Sixths) {
        highest_weight(*self)
    }
}

impl fmt::Display for IrrepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.p, self.q)
    }
}

/// The eight collective generators plus the free Hamiltonian
/// `H = ω_l W_z − (ω_c + ω_h) Y / 2`, all in one common basis.
#[derive(Debug, Clone)]
pub struct Generators {
    pub wz: CMat,
    pub y: CMat,
    pub w_plus: CMat,
    pub w_minus: CMat,
    pub u_plus: CMat,
    pub u_minus: CMat,
    pub v_plus: CMat,
    pub v_minus: CMat,
    pub h: CMat,
    pub omega_c: f64,
    pub omega_h: f64,
}

impl Generators {
    /// Assemble from the diagonal generators and the three raising operators.
    pub fn from_raising(
        wz: CMat,
        y: CMat,
        w_plus: CMat,
        u_plus: CMat,
        v_plus: CMat,
        omega_c: f64,
        omega_h: f64,
    ) -> Self {
        let h = free_hamiltonian(&wz, &y, omega_c, omega_h);
        Generators {
            w_minus: dagger(w_plus.as_ref()),
            u_minus: dagger(u_plus.as_ref()),
            v_minus: dagger(v_plus.as_ref()),
            wz,
            y,
            w_plus,
            u_plus,
            v_plus,
            h,
            omega_c,
            omega_h,
        }
    }

    pub fn dim(&self) -> usize {
        self.wz.nrows()
    }

    pub fn omega_l(&self) -> f64 {
        self.omega_h - self.omega_c
    }

    /// Rebuild `H` for new bath frequencies.
    pub fn with_frequencies(&self, omega_c: f64, omega_h: f64) -> Self {
        let mut g = self.clone();
        g.omega_c = omega_c;
        g.omega_h = omega_h;
        g.h = free_hamiltonian(&g.wz, &g.y, omega_c, omega_h);
        g
    }

    /// `W_x = W_+ + W_-`.
    pub fn w_x(&self) -> CMat {
        &self.w_plus + &self.w_minus
    }

    /// `W_y = −i (W_+ − W_-)`.
    pub fn w_y(&self) -> CMat {
        linalg::scale((&self.w_plus - &self.w_minus).as_ref(), c64::new(0.0, -1.0))
    }

    /// `W² = ½(W_+W_- + W_-W_+) + W_z²`.
    pub fn isospin_squared(&self) -> CMat {
        let sym = &self.w_plus * &self.w_minus + &self.w_minus * &self.w_plus;
        linalg::scale(sym.as_ref(), re(0.5)) + &self.wz * &self.wz
    }

    /// Quadratic Casimir `Σ F_a²` in the Gell-Mann normalisation; equals
    /// `(p² + q² + pq + 3p + 3q)/3` on the irrep `(p, q)`.
    pub fn casimir(&self) -> CMat {
        let half = re(0.5);
        let pair = |a: &CMat, b: &CMat| linalg::scale((a * b + b * a).as_ref(), half);
        pair(&self.w_plus, &self.w_minus)
            + &self.wz * &self.wz
            + pair(&self.u_plus, &self.u_minus)
            + pair(&self.v_plus, &self.v_minus)
            + linalg::scale((&self.y * &self.y).as_ref(), re(0.75))
    }

    /// Population of `|g⟩` up to the constant `n/3`: `Y/2 − W_z`.
    pub fn ground_count_shifted(&self) -> CMat {
        linalg::scale(self.y.as_ref(), re(0.5)) - &self.wz
    }

    /// Entrywise residual of each of the su(3) commutation relations.
    pub fn commutator_residuals(&self) -> Vec<(&'static str, f64)> {
        let g = self;
        let d = g.dim();
        let z = linalg::zeros(d);
        let s = |m: &CMat, x: f64| linalg::scale(m.as_ref(), re(x));
        let res = |lhs: CMat, rhs: CMat| linalg::max_abs_diff(&lhs, &rhs);
        vec![
            ("[Wz,W+]=W+", res(commutator(&g.wz, &g.w_plus), g.w_plus.clone())),
            ("[Wz,W-]=-W-", res(commutator(&g.wz, &g.w_minus), s(&g.w_minus, -1.0))),
            ("[W+,W-]=2Wz", res(commutator(&g.w_plus, &g.w_minus), s(&g.wz, 2.0))),
            ("[Wz,U+]=-U+/2", res(commutator(&g.wz, &g.u_plus), s(&g.u_plus, -0.5))),
            ("[Wz,U-]=U-/2", res(commutator(&g.wz, &g.u_minus), s(&g.u_minus, 0.5))),
            (
                "[U+,U-]=3Y/2-Wz",
                res(commutator(&g.u_plus, &g.u_minus), s(&g.y, 1.5) - &g.wz),
            ),
            ("[Wz,V+]=V+/2", res(commutator(&g.wz, &g.v_plus), s(&g.v_plus, 0.5))),
            ("[Wz,V-]=-V-/2", res(commutator(&g.wz, &g.v_minus), s(&g.v_minus, -0.5))),
            (
                "[V+,V-]=3Y/2+Wz",
                res(commutator(&g.v_plus, &g.v_minus), s(&g.y, 1.5) + &g.wz),
            ),
            ("[Y,U+]=U+", res(commutator(&g.y, &g.u_plus), g.u_plus.clone())),
            ("[Y,U-]=-U-", res(commutator(&g.y, &g.u_minus), s(&g.u_minus, -1.0))),
            ("[Y,V+]=V+", res(commutator(&g.y, &g.v_plus), g.v_plus.clone())),
            ("[Y,V-]=-V-", res(commutator(&g.y, &g.v_minus), s(&g.v_minus, -1.0))),
            (
                "[W+,V-]=-U-",
                res(commutator(&g.w_plus, &g.v_minus), s(&g.u_minus, -1.0)),
            ),
            ("[W+,U+]=V+", res(commutator(&g.w_plus, &g.u_plus), g.v_plus.clone())),
            ("[U+,V-]=W-", res(commutator(&g.u_plus, &g.v_minus), g.w_minus.clone())),
            ("[Y,W+]=0", res(commutator(&g.y, &g.w_plus), z.clone())),
            ("[Y,Wz]=0", res(commutator(&g.y, &g.wz), z.clone())),
            ("[W+,V+]=0", res(commutator(&g.w_plus, &g.v_plus), z.clone())),
            ("[W-,U+]=0", res(commutator(&g.w_minus, &g.u_plus), z.clone())),
            ("[U+,V+]=0", res(commutator(&g.u_plus, &g.v_plus), z)),
            (
                "[U-,V+]=-W+",
                res(commutator(&g.u_minus, &g.v_plus), s(&g.w_plus, -1.0)),
            ),
        ]
    }

    pub fn max_commutator_residual(&self) -> f64 {
        self.commutator_residuals()
            .into_iter()
            .map(|(_, r)| r)
            .fold(0.0, f64::max)
    }

    /// Conjugate every operator by an isometry: `B^H O B`.
    pub fn project(&self, b: &CMat) -> Generators {
        let p = |m: &CMat| linalg::sandwich(b, m);
        Generators {
            wz: p(&self.wz),
            y: p(&self.y),
            w_plus: p(&self.w_plus),
            w_minus: p(&self.w_minus),
            u_plus: p(&self.u_plus),
            u_minus: p(&self.u_minus),
            v_plus: p(&self.v_plus),
            v_minus: p(&self.v_minus),
            h: p(&self.h),
            omega_c: self.omega_c,
            omega_h: self.omega_h,
        }
    }
}

fn free_hamiltonian(wz: &CMat, y: &CMat, omega_c: f64, omega_h: f64) -> CMat {
    let omega_l = omega_h - omega_c;
    linalg::scale(wz.as_ref(), re(omega_l)) - linalg::scale(y.as_ref(), re(0.5 * (omega_c + omega_h)))
}

/// Single-particle generators together with the level Hamiltonian
/// `h = ω_l |e⟩⟨e| + ω_h |f⟩⟨f|`.
#[derive(Debug, Clone)]
pub struct SingleParticle {
    pub generators: Generators,
    pub h: CMat,
}

/// Defining representation in the computational order `|0⟩=|e⟩, |1⟩=|g⟩, |2⟩=|f⟩`.
pub fn single_particle_generators(omega_c: f64, omega_h: f64) -> SingleParticle {
    let unit = |i: usize, j: usize| Mat::from_fn(3, 3, |a, b| if a == i && b == j { re(1.0) } else { ZERO });
    let wz = linalg::diag(&[0.5, -0.5, 0.0]);
    let y = linalg::diag(&[1.0 / 3.0, 1.0 / 3.0, -2.0 / 3.0]);
    let generators = Generators::from_raising(wz, y, unit(0, 1), unit(1, 2), unit(0, 2), omega_c, omega_h);
    let h = linalg::diag(&[omega_h - omega_c, 0.0, omega_h]);
    SingleParticle { generators, h }
}

/// Highest weight `((p+q)/2, (p−q)/3)`.
pub fn highest_weight(label: IrrepLabel) -> (Sixths, Sixths) {
    let (p, q) = (label.p as i32, label.q as i32);
    (Sixths::from_halves(p + q), Sixths::from_thirds(p - q))
}

/// Weight basis of `(p, q)`: for `a ∈ 0..=q`, `b ∈ 0..=p` one isospin
/// multiplet with `W = (a+b)/2` and `y = b − a + 2(q−p)/3`.
///
/// Sorted by `y` descending, then `w` ascending, then `W` descending.
pub fn enumerate_basis(label: IrrepLabel) -> Vec<WeightState> {
    let (p, q) = (label.p as i32, label.q as i32);
    let mut states = Vec::with_capacity(label.dimension());
    for a in 0..=q {
        for b in 0..=p {
            let twice_iso = a + b;
            let hyper = Sixths::from_int(b - a) + Sixths::from_thirds(2 * (q - p));
            for m in 0..=twice_iso {
                let twice_z = -twice_iso + 2 * m;
                states.push(WeightState::new(
                    Sixths::from_halves(twice_iso),
                    Sixths::from_halves(twice_z),
                    hyper,
                ));
            }
        }
    }
    states.sort_by(|s, t| {
        t.hypercharge
            .cmp(&s.hypercharge)
            .then(s.isospin_z.cmp(&t.isospin_z))
            .then(t.isospin.cmp(&s.isospin))
    });
    states
}

/// Coefficients `(A, B)` of `V_+|W,w,y⟩ = A|W+½,w+½,y+1⟩ + B|W−½,w+½,y+1⟩`.
///
/// Every factor is an exact multiple of 1/6, so the sign test of the radicand
/// is exact; boundary states give exact zeros.
pub fn ladder_coefficients(label: IrrepLabel, state: WeightState) -> Result<(f64, f64)> {
    let (p, q) = (label.p as i64, label.q as i64);
    let iso = i64::from(state.isospin.0);
    let z = i64::from(state.isospin_z.0);
    let y = i64::from(state.hypercharge.0);
    // all quantities below are in units of 1/6; y/2 is y6/2, always integral
    // because y6 is even
    let half_y = y / 2;
    let a_factors = [
        iso + z + 6,
        2 * (p - q) + iso + half_y + 6,
        2 * (p + 2 * q) + iso + half_y + 12,
        2 * (2 * p + q) - iso - half_y,
    ];
    let b_factors = [
        iso - z,
        2 * (q - p) + iso - half_y,
        2 * (p + 2 * q) - iso + half_y + 6,
        2 * (2 * p + q) + iso - half_y + 6,
    ];
    let radicand = |factors: [i64; 4], denom: f64| -> Result<f64> {
        let num: i128 = factors.iter().map(|&f| i128::from(f)).product();
        if num < 0 {
            return Err(EngineError::NegativeLadderArgument {
                value: num as f64 / 1296.0 / denom,
                state: state.to_string(),
            });
        }
        Ok(num as f64 / 1296.0 / denom)
    };
    let w = state.big_w();
    let a = radicand(a_factors, 2.0 * (w + 1.0) * (2.0 * w + 1.0))?.sqrt();
    let b = if iso == 0 || iso == z {
        0.0
    } else {
        radicand(b_factors, 2.0 * w * (2.0 * w + 1.0))?.sqrt()
    };
    Ok((a, b))
}

/// Weight basis and generator matrices of one irrep.
#[derive(Debug, Clone)]
pub struct IrrepOperators {
    pub label: IrrepLabel,
    pub basis: Vec<WeightState>,
    pub ops: Generators,
    index: HashMap<WeightState, usize>,
}

impl IrrepOperators {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn index_of(&self, state: &WeightState) -> Option<usize> {
        self.index.get(state).copied()
    }

    /// Energies `ω_l w − (ω_c + ω_h) y / 2` along the basis.
    pub fn energies(&self) -> Vec<f64> {
        let omega_l = self.ops.omega_l();
        let s = self.ops.omega_c + self.ops.omega_h;
        self.basis.iter().map(|b| omega_l * b.w() - s * b.y() / 2.0).collect()
    }

    pub fn with_frequencies(&self, omega_c: f64, omega_h: f64) -> Self {
        IrrepOperators {
            ops: self.ops.with_frequencies(omega_c, omega_h),
            ..self.clone()
        }
    }
}

/// Build all generators of `(p, q)` from the isospin and `V_±` action
/// formulas; `U_+ = [W_-, V_+]` and `U_- = U_+^†`.
pub fn irrep_matrices(label: IrrepLabel, omega_c: f64, omega_h: f64) -> Result<IrrepOperators> {
    let basis = enumerate_basis(label);
    let d = basis.len();
    let index: HashMap<WeightState, usize> = basis.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let wz = linalg::diag(&basis.iter().map(WeightState::w).collect::<Vec<_>>());
    let y = linalg::diag(&basis.iter().map(WeightState::y).collect::<Vec<_>>());
    let mut w_plus = linalg::zeros(d);
    let mut v_plus = linalg::zeros(d);
    let place = |m: &mut CMat, col: usize, target: WeightState, amp: f64| -> Result<()> {
        if amp == 0.0 {
            return Ok(());
        }
        let row = *index
            .get(&target)
            .ok_or_else(|| EngineError::StateNotInIrrep(target.to_string()))?;
        m[(row, col)] = re(amp);
        Ok(())
    };
    for (col, s) in basis.iter().enumerate() {
        let (big, small) = (s.big_w(), s.w());
        let amp = ((big - small) * (big + small + 1.0)).max(0.0).sqrt();
        place(&mut w_plus, col, s.shifted(0, 6, 0), amp)?;
        let (a, b) = ladder_coefficients(label, *s)?;
        place(&mut v_plus, col, s.shifted(3, 3, 6), a)?;
        place(&mut v_plus, col, s.shifted(-3, 3, 6), b)?;
    }
    let w_minus = dagger(w_plus.as_ref());
    let u_plus = commutator(&w_minus, &v_plus);
    let ops = Generators::from_raising(wz, y, w_plus, u_plus, v_plus, omega_c, omega_h);
    Ok(IrrepOperators {
        label,
        basis,
        ops,
        index,
    })
}
