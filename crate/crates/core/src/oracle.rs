//! Brute-force reference on the full tensor-product space `(ℂ³)^⊗n`.
//!
//! Nothing here uses the algebraic irrep matrices: collective operators are
//! Kronecker sums of single-particle generators and block data comes from
//! the Young-symmetrizer bases. For `n ≤ 3` the Liouvillian is built densely
//! and steady states are obtained by the spectral projector onto its
//! kernel; for `n = 4` the master equation is integrated matrix-free.

use std::sync::OnceLock;

use faer::Mat;
use log::debug;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::{self, BlockEntry, BlockState, EngineParams, Model};
use crate::error::{EngineError, Result};
use crate::linalg::{self, c64, re, CMat, ZERO};
use crate::schur_weyl::{self, ReducedBasis};
use crate::spectra;
use crate::su3::{self, Generators};
use crate::thermo::{self, ThermoReport};

/// Largest `n` for which the dense `9^n` superoperator is built.
pub const DENSE_SUPEROP_LIMIT: u32 = 3;
/// Largest `n` supported at all (time integration only above the dense limit).
pub const ORACLE_LIMIT: u32 = 4;

/// Coordinate-format sparse matrix.
#[derive(Debug, Clone)]
struct Sparse {
    dim: usize,
    entries: Vec<(usize, usize, c64)>,
}

impl Sparse {
    fn from_dense(m: &CMat) -> Self {
        let mut entries = Vec::new();
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                if m[(i, j)].norm() > 1e-15 {
                    entries.push((i, j, m[(i, j)]));
                }
            }
        }
        Sparse {
            dim: m.nrows(),
            entries,
        }
    }

    /// `out += c · O X`
    fn left_acc(&self, x: &CMat, c: c64, out: &mut CMat) {
        for &(i, k, v) in &self.entries {
            let w = c * v;
            for j in 0..self.dim {
                out[(i, j)] += w * x[(k, j)];
            }
        }
    }

    /// `O X`
    fn left(&self, x: &CMat) -> CMat {
        let mut out = linalg::zeros(self.dim);
        self.left_acc(x, re(1.0), &mut out);
        out
    }

    /// `out += c · X O†`
    fn right_dagger_acc(&self, x: &CMat, c: c64, out: &mut CMat) {
        for &(j, k, v) in &self.entries {
            let w = c * v.conj();
            for i in 0..self.dim {
                out[(i, j)] += w * x[(i, k)];
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coupling {
    /// Every bath couples to the collective operators.
    Collective,
    /// Each particle has its own copy of every dissipator.
    Independent,
}

#[derive(Debug, Clone)]
struct Channel {
    op: Sparse,
    rate: f64,
}

/// Master equation on the unreduced space.
pub struct FullSpaceModel {
    pub n: u32,
    pub params: EngineParams,
    pub coupling: Coupling,
    /// Collective generators, `3^n × 3^n`.
    pub ops: Generators,
    channels: Vec<Channel>,
    /// Dense jump operators, same order as `channels`.
    jumps: Vec<(CMat, f64)>,
    drive: Option<CMat>,
    /// `K = ½ Σ γ O†O + i H_R`, so that `Lρ = Σ γ OρO† − Kρ − ρK†`.
    k: Sparse,
    superop: OnceLock<CMat>,
    projector: OnceLock<CMat>,
    bases: OnceLock<Vec<ReducedBasis>>,
}

/// Operator acting as `single` on particle `k` and identity elsewhere.
pub fn embed(single: &CMat, k: u32, n: u32) -> CMat {
    let mut out = linalg::identity(1);
    for j in 0..n {
        let factor = if j == k { single.clone() } else { linalg::identity(3) };
        out = linalg::kron(out.as_ref(), factor.as_ref());
    }
    out
}

fn bath_jumps(ops: &Generators, params: &EngineParams) -> Vec<(CMat, f64)> {
    let (nh, nc) = (params.nbar_h(), params.nbar_c());
    let mut out = vec![
        (ops.u_plus.clone(), params.g_u * (nh + 1.0)),
        (ops.u_minus.clone(), params.g_u * nh),
        (ops.v_plus.clone(), params.g_v * (nc + 1.0)),
        (ops.v_minus.clone(), params.g_v * nc),
    ];
    if params.model == Model::DissipativeLoad {
        out.push((ops.w_minus.clone(), params.g_w));
    }
    out.retain(|(_, g)| *g > 0.0);
    out
}

impl FullSpaceModel {
    pub fn new(n: u32, params: &EngineParams) -> Result<Self> {
        Self::with_coupling(n, params, Coupling::Collective)
    }

    pub fn independent(n: u32, params: &EngineParams) -> Result<Self> {
        Self::with_coupling(n, params, Coupling::Independent)
    }

    pub fn with_coupling(n: u32, params: &EngineParams, coupling: Coupling) -> Result<Self> {
        if n == 0 || n > ORACLE_LIMIT {
            return Err(EngineError::TooManyParticles { n, limit: ORACLE_LIMIT });
        }
        params.validate()?;
        params.check_rates()?;
        let ops = schur_weyl::collective_generators(n, params.omega_c, params.omega_h)?;
        let jumps = match coupling {
            Coupling::Collective => bath_jumps(&ops, params),
            Coupling::Independent => {
                let single = su3::single_particle_generators(params.omega_c, params.omega_h).generators;
                let mut out = Vec::new();
                for k in 0..n {
                    let lift = |m: &CMat| embed(m, k, n);
                    let local = Generators::from_raising(
                        lift(&single.wz),
                        lift(&single.y),
                        lift(&single.w_plus),
                        lift(&single.u_plus),
                        lift(&single.v_plus),
                        params.omega_c,
                        params.omega_h,
                    );
                    out.extend(bath_jumps(&local, params));
                }
                out
            }
        };
        let drive = (params.model == Model::Driven && params.alpha != 0.0)
            .then(|| linalg::scale(ops.w_x().as_ref(), re(params.alpha)));
        let dim = ops.dim();
        let mut k = linalg::zeros(dim);
        for (o, g) in &jumps {
            k += linalg::scale((o.adjoint() * o).as_ref(), re(0.5 * g));
        }
        if let Some(h) = &drive {
            k += linalg::scale(h.as_ref(), linalg::I);
        }
        Ok(FullSpaceModel {
            n,
            params: *params,
            coupling,
            channels: jumps
                .iter()
                .map(|(o, g)| Channel {
                    op: Sparse::from_dense(o),
                    rate: *g,
                })
                .collect(),
            jumps,
            drive,
            k: Sparse::from_dense(&k),
            ops,
            superop: OnceLock::new(),
            projector: OnceLock::new(),
            bases: OnceLock::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.ops.dim()
    }

    /// Matrix-free `Lρ`.
    pub fn apply(&self, rho: &CMat) -> CMat {
        let mut out = linalg::zeros(self.dim());
        for ch in &self.channels {
            let o_rho = ch.op.left(rho);
            ch.op.right_dagger_acc(&o_rho, re(ch.rate), &mut out);
        }
        self.k.left_acc(rho, re(-1.0), &mut out);
        self.k.right_dagger_acc(rho, re(-1.0), &mut out);
        out
    }

    /// Dense `9^n × 9^n` generator; only for `n ≤ 3`.
    pub fn superoperator(&self) -> Result<&CMat> {
        if self.n > DENSE_SUPEROP_LIMIT {
            return Err(EngineError::TooManyParticles {
                n: self.n,
                limit: DENSE_SUPEROP_LIMIT,
            });
        }
        Ok(self.superop.get_or_init(|| {
            let d = self.dim();
            let mut l = Mat::zeros(d * d, d * d);
            for (o, g) in &self.jumps {
                l += linalg::scale(engine::dissipator(o).as_ref(), re(*g));
            }
            if let Some(h) = &self.drive {
                l += engine::hamiltonian_superop(h);
            }
            l
        }))
    }

    /// Projector onto the stationary manifold along the decaying modes.
    pub fn stationary_projector(&self) -> Result<&CMat> {
        if let Some(p) = self.projector.get() {
            return Ok(p);
        }
        let p = spectra::stationary_projector(self.superoperator()?)?;
        debug!(
            "stationary manifold of the n={} model has rank {}",
            self.n,
            linalg::trace(p.as_ref()).re.round()
        );
        Ok(self.projector.get_or_init(|| p))
    }

    /// Symmetrizer-route basis for one copy of every irrep, ordered as [`schur_weyl::partitions`].
    pub fn bases(&self) -> Result<&[ReducedBasis]> {
        if let Some(b) = self.bases.get() {
            return Ok(b);
        }
        let b = schur_weyl::partitions(self.n)
            .into_iter()
            .map(schur_weyl::reduced_basis)
            .collect::<Result<Vec<_>>>()?;
        Ok(self.bases.get_or_init(|| b))
    }

    /// Long-time limit of the evolution started in `initial`.
    pub fn steady_state(&self, initial: &CMat) -> Result<CMat> {
        if initial.nrows() != self.dim() || initial.ncols() != self.dim() {
            return Err(EngineError::DimensionMismatch(format!(
                "initial state is {}x{}, model dimension {}",
                initial.nrows(),
                initial.ncols(),
                self.dim()
            )));
        }
        let rho = if self.n <= DENSE_SUPEROP_LIMIT {
            let p = self.stationary_projector()?;
            linalg::hermitian_part(&linalg::apply_superop(p, initial))
        } else {
            self.evolve(initial, &IntegrationOptions::for_params(&self.params))?
                .state
        };
        let residual = linalg::max_abs(self.apply(&rho).as_ref());
        if residual > 1e-8 {
            return Err(EngineError::SteadyState(format!(
                "oracle state has residual {residual:e}"
            )));
        }
        Ok(rho)
    }

    /// Adaptive RK4 with step-doubling error control until `‖Lρ‖ ≤ stationarity`.
    pub fn evolve(&self, initial: &CMat, opts: &IntegrationOptions) -> Result<Integration> {
        let mut rho = initial.clone();
        let mut t = 0.0;
        let mut h = opts.initial_step;
        let mut steps = 0usize;
        let rk4 = |x: &CMat, h: f64| -> CMat {
            let k1 = self.apply(x);
            let k2 = self.apply(&(x + linalg::scale(k1.as_ref(), re(h / 2.0))));
            let k3 = self.apply(&(x + linalg::scale(k2.as_ref(), re(h / 2.0))));
            let k4 = self.apply(&(x + linalg::scale(k3.as_ref(), re(h))));
            let sum = k1 + linalg::scale(k2.as_ref(), re(2.0)) + linalg::scale(k3.as_ref(), re(2.0)) + k4;
            x + linalg::scale(sum.as_ref(), re(h / 6.0))
        };
        loop {
            let residual = linalg::max_abs(self.apply(&rho).as_ref());
            if residual <= opts.stationarity {
                return Ok(Integration {
                    state: linalg::hermitian_part(&rho),
                    time: t,
                    steps,
                    residual,
                });
            }
            if t >= opts.t_max {
                return Err(EngineError::Integration(format!(
                    "not stationary at t={t:.3}: residual {residual:e} after {steps} steps"
                )));
            }
            let full = rk4(&rho, h);
            let half = rk4(&rk4(&rho, h / 2.0), h / 2.0);
            let err = linalg::max_abs_diff(&full, &half) / 15.0;
            if err <= opts.tolerance {
                rho = &half + linalg::scale((&half - &full).as_ref(), re(1.0 / 15.0));
                t += h;
                steps += 1;
            }
            let factor = if err == 0.0 {
                2.0
            } else {
                0.9 * (opts.tolerance / err).powf(0.2)
            };
            h = (h * factor.clamp(0.2, 2.0)).min(opts.max_step);
            if h < 1e-12 {
                return Err(EngineError::Integration(format!("step size underflow at t={t}")));
            }
        }
    }

    /// Block content of a full-space state: `p^λ` summed over multiplicity
    /// copies and the copy-averaged normalized block.
    pub fn decompose(&self, rho: &CMat) -> Result<BlockState> {
        let twirled = permutation_twirl(rho, self.n);
        let mut entries = Vec::new();
        for basis in self.bases()? {
            let a = linalg::sandwich(&basis.isometry, &twirled);
            let tr = linalg::trace(a.as_ref()).re;
            let weight = schur_weyl::multiplicity_f64(basis.partition) * tr;
            let d = basis.dim();
            let block = if tr.abs() > 1e-14 {
                linalg::scale(a.as_ref(), re(1.0 / tr))
            } else {
                linalg::scale(linalg::identity(d).as_ref(), re(1.0 / d as f64))
            };
            entries.push(BlockEntry {
                label: basis.label,
                weight,
                rho: block,
            });
        }
        let state = BlockState { entries };
        let total = state.total_weight();
        if (total - 1.0).abs() > 1e-8 {
            return Err(EngineError::ReconstructionDefect(total));
        }
        Ok(state)
    }

    /// Heat currents from the adjoint dissipators, summed over channels.
    fn heat_currents(&self, rho: &CMat) -> (f64, f64) {
        let h = &self.ops.h;
        let mut hot = 0.0;
        let mut cold = 0.0;
        for (o, g) in &self.jumps {
            let flow = g * adjoint_expect(o, h, rho);
            match self.bath_of(o) {
                Bath::Hot => hot += flow,
                Bath::Cold => cold += flow,
                Bath::Work => {}
            }
        }
        (hot, cold)
    }

    fn bath_of(&self, o: &CMat) -> Bath {
        // The three transitions are distinguished by the energy they carry.
        let comm = &self.ops.h * o - o * &self.ops.h;
        let scale = linalg::max_abs(o.as_ref());
        let ratio = |omega: f64| linalg::max_abs_diff(&comm, &linalg::scale(o.as_ref(), re(omega))) <= 1e-9 * scale;
        let (wc, wh, wl) = (self.params.omega_c, self.params.omega_h, self.params.omega_l());
        if ratio(-wh) || ratio(wh) {
            Bath::Hot
        } else if ratio(-wc) || ratio(wc) {
            Bath::Cold
        } else {
            debug_assert!(ratio(-wl) || ratio(wl));
            Bath::Work
        }
    }

    /// Power delivered to the work channel, `−tr{H L_work ρ}`.
    pub fn power(&self, rho: &CMat) -> f64 {
        let h = &self.ops.h;
        let mut p = 0.0;
        for (o, g) in &self.jumps {
            if self.bath_of(o) == Bath::Work {
                p -= g * adjoint_expect(o, h, rho);
            }
        }
        if let Some(hr) = &self.drive {
            let drho = linalg::scale(linalg::commutator(hr, rho).as_ref(), c64::new(0.0, -1.0));
            p -= linalg::trace_product(h.as_ref(), drho.as_ref()).re;
        }
        p
    }

    /// Every thermodynamic quantity, evaluated without Schur reduction.
    /// Ergotropy is the block-preserving value of the decomposed state.
    pub fn observables(&self, rho: &CMat) -> Result<ThermoReport> {
        let ops = &self.ops;
        let (heat_hot, heat_cold) = self.heat_currents(rho);
        let power = self.power(rho);
        let mut ergotropy = 0.0;
        let blocks = self.decompose(rho)?;
        for (basis, entry) in self.bases()?.iter().zip(&blocks.entries) {
            if entry.weight.abs() > 1e-14 {
                let h = linalg::sandwich(&basis.isometry, &ops.h);
                ergotropy += entry.weight * thermo::ergotropy(&entry.rho, &h)?.0;
            }
        }
        let drho = self.apply(rho);
        Ok(ThermoReport {
            energy: linalg::expect(&ops.h, rho).re,
            ergotropy,
            lasing_ergotropy: thermo::lasing_ergotropy_scan(rho, ops)?,
            heat_hot,
            heat_cold,
            power,
            efficiency: (heat_hot > thermo::HEAT_FLOOR).then(|| power / heat_hot),
            ground_rate: linalg::expect(&ops.ground_count_shifted(), &drho).re,
            wz: linalg::expect(&ops.wz, rho).re,
            jy: 0.5 * linalg::expect(&ops.w_y(), rho).re,
        })
    }

    pub fn g2_zero(&self, rho: &CMat) -> Result<f64> {
        spectra::g2_zero(rho, &self.ops)
    }

    /// Continuous part of `S` at zero detuning from the full-space resolvent.
    pub fn s_peak(&self, rho: &CMat) -> Result<f64> {
        let flux = linalg::expect(&(&self.ops.w_plus * &self.ops.w_minus), rho).re;
        if flux <= 1e-14 {
            return Err(EngineError::VanishingFlux(flux));
        }
        let p0 = self.stationary_projector()?;
        let l = self.superoperator()?;
        Ok(spectra::resolvent_spectrum_with(l, p0, &(rho * &self.ops.w_plus), &self.ops.w_minus, flux, &[0.0])[0])
    }

    /// `max ‖L(PρP†) − P L(ρ) P†‖` over adjacent transpositions.
    pub fn permutation_defect(&self, rho: &CMat) -> f64 {
        let n = self.n as usize;
        let l_rho = self.apply(rho);
        (0..n.saturating_sub(1))
            .map(|k| {
                let mut sigma: Vec<usize> = (0..n).collect();
                sigma.swap(k, k + 1);
                let map = schur_weyl::permutation_index_map(&sigma);
                let lhs = self.apply(&permute(rho, &map));
                linalg::max_abs_diff(&lhs, &permute(&l_rho, &map))
            })
            .fold(0.0, f64::max)
    }

    /// `max ‖L(Tρ) − T(Lρ)‖` for the diagonal weight twirl `T`.
    pub fn twirl_defect(&self, rho: &CMat) -> f64 {
        let key = |i: usize| {
            (
                (self.ops.wz[(i, i)].re * 2.0).round() as i64,
                (self.ops.y[(i, i)].re * 3.0).round() as i64,
            )
        };
        let twirl = |x: &CMat| {
            Mat::from_fn(
                x.nrows(),
                x.ncols(),
                |i, j| if key(i) == key(j) { x[(i, j)] } else { ZERO },
            )
        };
        linalg::max_abs_diff(&self.apply(&twirl(rho)), &twirl(&self.apply(rho)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Bath {
    Hot,
    Cold,
    Work,
}

/// `tr{ρ D†[O](X)}`.
fn adjoint_expect(o: &CMat, x: &CMat, rho: &CMat) -> f64 {
    let odo = o.adjoint() * o;
    let adj = o.adjoint() * x * o - linalg::scale(linalg::anticommutator(&odo, x).as_ref(), re(0.5));
    linalg::expect(&adj, rho).re
}

#[derive(Debug, Clone, Copy)]
pub struct IntegrationOptions {
    /// Local error per step, absolute on matrix entries.
    pub tolerance: f64,
    /// Stop once `max |Lρ| ≤ stationarity`.
    pub stationarity: f64,
    pub t_max: f64,
    pub initial_step: f64,
    pub max_step: f64,
}

impl IntegrationOptions {
    pub fn for_params(params: &EngineParams) -> Self {
        let g_min = [params.g_u, params.g_v, params.work_coupling()]
            .into_iter()
            .filter(|&g| g > 0.0)
            .fold(f64::INFINITY, f64::min);
        IntegrationOptions {
            tolerance: 1e-10,
            stationarity: 1e-10,
            t_max: 50.0 / g_min,
            initial_step: 1e-2,
            max_step: 5.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Integration {
    pub state: CMat,
    pub time: f64,
    pub steps: usize,
    pub residual: f64,
}

fn permute(rho: &CMat, map: &[usize]) -> CMat {
    Mat::from_fn(rho.nrows(), rho.ncols(), |i, j| rho[(map[i], map[j])])
}

/// Average of `P_σ ρ P_σ†` over the symmetric group.
pub fn permutation_twirl(rho: &CMat, n: u32) -> CMat {
    let perms = schur_weyl::permutations(n as usize);
    let mut out = linalg::zeros(rho.nrows());
    for (sigma, _) in &perms {
        out += permute(rho, &schur_weyl::permutation_index_map(sigma));
    }
    linalg::scale(out.as_ref(), re(1.0 / perms.len() as f64))
}

/// `n`-fold product of the single-particle Gibbs state at `β₀`.
pub fn thermal_product_state(n: u32, beta_0: f64, omega_c: f64, omega_h: f64) -> CMat {
    let single = engine::gibbs_state(&su3::single_particle_generators(omega_c, omega_h).h, beta_0);
    (0..n).fold(linalg::identity(1), |acc, _| {
        linalg::kron(acc.as_ref(), single.as_ref())
    })
}

pub fn maximally_mixed(n: u32) -> CMat {
    let d = 3usize.pow(n);
    linalg::scale(linalg::identity(d).as_ref(), re(1.0 / d as f64))
}

/// Maximally mixed state on one copy of an irrep.
pub fn irrep_start(basis: &ReducedBasis) -> CMat {
    let d = basis.dim();
    basis.embed(&linalg::scale(linalg::identity(d).as_ref(), re(1.0 / d as f64)))
}

/// Observables compared between the block route and the oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservableSet {
    pub ergotropy: f64,
    pub lasing_ergotropy: f64,
    pub heat_hot: f64,
    pub heat_cold: f64,
    pub power: f64,
    pub efficiency: Option<f64>,
    pub g2_zero: f64,
    /// Not available from the oracle above the dense limit.
    pub s_peak: Option<f64>,
}

impl ObservableSet {
    fn from_report(r: &ThermoReport, g2_zero: f64, s_peak: Option<f64>) -> Self {
        ObservableSet {
            ergotropy: r.ergotropy,
            lasing_ergotropy: r.lasing_ergotropy,
            heat_hot: r.heat_hot,
            heat_cold: r.heat_cold,
            power: r.power,
            efficiency: r.efficiency,
            g2_zero,
            s_peak,
        }
    }

    /// Largest absolute difference in thermodynamic quantities.
    pub fn thermo_difference(&self, other: &Self) -> f64 {
        let eff = match (self.efficiency, other.efficiency) {
            (Some(a), Some(b)) => (a - b).abs(),
            (None, None) => 0.0,
            _ => f64::INFINITY,
        };
        [
            (self.ergotropy - other.ergotropy).abs(),
            (self.lasing_ergotropy - other.lasing_ergotropy).abs(),
            (self.heat_hot - other.heat_hot).abs(),
            (self.heat_cold - other.heat_cold).abs(),
            (self.power - other.power).abs(),
            eff,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn spectral_difference(&self, other: &Self) -> f64 {
        let peak = match (self.s_peak, other.s_peak) {
            (Some(a), Some(b)) => (a - b).abs(),
            _ => 0.0,
        };
        (self.g2_zero - other.g2_zero).abs().max(peak)
    }
}

/// Block-route observables for the thermal product start at `params.beta_0`.
pub fn block_observables(n: u32, params: &EngineParams) -> Result<ObservableSet> {
    let steady = engine::block_steady_state(&engine::thermal_block_state(n, params)?, params)?;
    let mut parts = Vec::new();
    let (mut pair, mut flux, mut peak) = (0.0, 0.0, 0.0);
    for e in &steady.entries {
        let ops = su3::irrep_matrices(e.label, params.omega_c, params.omega_h)?;
        parts.push((e.weight, thermo::thermo_report(&e.rho, &ops.ops, params)?));
        let n_op = &ops.ops.w_plus * &ops.ops.w_minus;
        let f = linalg::expect(&n_op, &e.rho).re;
        if f > 1e-14 {
            let l = engine::build_liouvillian(&ops, params)?;
            peak += e.weight * f * spectra::spectrum_resolvent(&l, &e.rho, &ops.ops, &[0.0])?[0];
            pair += e.weight * linalg::expect(&(&ops.ops.w_plus * &n_op * &ops.ops.w_minus), &e.rho).re;
            flux += e.weight * f;
        }
    }
    if flux <= 1e-14 {
        return Err(EngineError::VanishingFlux(flux));
    }
    let report = thermo::aggregate(&parts, params.omega_l());
    Ok(ObservableSet::from_report(
        &report,
        pair / (flux * flux),
        Some(peak / flux),
    ))
}

/// Oracle observables for the same preparation. Above the dense limit the
/// state comes from time integration and the spectral peak is omitted.
pub fn full_observables(n: u32, params: &EngineParams) -> Result<ObservableSet> {
    let model = FullSpaceModel::new(n, params)?;
    let rho = model.steady_state(&thermal_product_state(n, params.beta_0, params.omega_c, params.omega_h))?;
    let report = model.observables(&rho)?;
    let s_peak = if n <= DENSE_SUPEROP_LIMIT {
        Some(model.s_peak(&rho)?)
    } else {
        None
    };
    Ok(ObservableSet::from_report(&report, model.g2_zero(&rho)?, s_peak))
}

/// One random parameter point of the equivalence suite.
#[derive(Debug, Clone)]
pub struct EquivalenceCase {
    pub params: EngineParams,
    pub block: ObservableSet,
    pub full: ObservableSet,
}

impl EquivalenceCase {
    pub fn thermo_difference(&self) -> f64 {
        self.block.thermo_difference(&self.full)
    }

    pub fn spectral_difference(&self) -> f64 {
        self.block.spectral_difference(&self.full)
    }
}

/// Random engine parameters; the drive is kept weak (`α ≤ ω_l/10`).
pub fn random_params(rng: &mut impl Rng, model: Model) -> EngineParams {
    let omega_c = rng.gen_range(0.3..1.0);
    let omega_h = omega_c + rng.gen_range(0.5..1.5);
    EngineParams {
        omega_c,
        omega_h,
        beta_c: rng.gen_range(0.5..2.0),
        beta_h: rng.gen_range(0.1..1.5),
        g_u: rng.gen_range(0.05..0.3),
        g_v: rng.gen_range(0.05..0.3),
        g_w: if model == Model::DissipativeLoad {
            rng.gen_range(0.05..0.5)
        } else {
            0.0
        },
        alpha: if model == Model::Driven {
            rng.gen_range(0.01..0.1) * (omega_h - omega_c)
        } else {
            0.0
        },
        beta_0: rng.gen_range(0.1..2.0),
        model,
    }
}

/// Block route against oracle for `draws` random points per model.
pub fn equivalence_suite(n: u32, draws: usize, seed: u64) -> Result<Vec<EquivalenceCase>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for model in [Model::TwoBath, Model::DissipativeLoad, Model::Driven] {
        for _ in 0..draws {
            let params = random_params(&mut rng, model);
            out.push(EquivalenceCase {
                params,
                block: block_observables(n, &params)?,
                full: full_observables(n, &params)?,
            });
        }
    }
    Ok(out)
}

/// Largest per-block trace distance between a decomposed oracle state and
/// the block-route steady states weighted by product-state weights, together
/// with the largest weight difference.
pub fn compare_blocks(full: &BlockState, block: &BlockState) -> Result<(f64, f64)> {
    let mut worst_state: f64 = 0.0;
    let mut worst_weight: f64 = 0.0;
    for e in &block.entries {
        let f = full
            .get(e.label)
            .ok_or_else(|| EngineError::InvalidParams(format!("irrep {} missing from oracle state", e.label)))?;
        worst_weight = worst_weight.max((f.weight - e.weight).abs());
        if e.weight > 1e-12 {
            worst_state = worst_state.max(linalg::trace_distance(&f.rho, &e.rho)?);
        }
    }
    Ok((worst_state, worst_weight))
}

/// Thermal product start at `β₀` evolved on the full space, then decomposed,
/// against the block route.
pub fn thermal_block_check(n: u32, params: &EngineParams) -> Result<(f64, f64)> {
    let model = FullSpaceModel::new(n, params)?;
    let rho = model.steady_state(&thermal_product_state(n, params.beta_0, params.omega_c, params.omega_h))?;
    let full = model.decompose(&rho)?;
    let block = engine::block_steady_state(&engine::thermal_block_state(n, params)?, params)?;
    compare_blocks(&full, &block)
}
