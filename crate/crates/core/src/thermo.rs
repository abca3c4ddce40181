//! Thermodynamic figures of merit: ergotropy, lasing ergotropy, heat
//! currents, power and efficiency.
//!
//! Heat currents are counted positive when energy flows from a bath into the
//! engine; power is counted positive when energy leaves through the work
//! channel. At steady state `I_h + I_c = P`.

use log::{debug, warn};

use crate::engine::{self, EngineParams, Model};
use crate::error::{EngineError, Result};
use crate::linalg::{self, c64, re, CMat};
use crate::su3::{Generators, IrrepOperators, Sixths};

fn expect_re(op: &CMat, rho: &CMat) -> f64 {
    linalg::expect(op, rho).re
}

pub fn energy(rho: &CMat, h: &CMat) -> f64 {
    expect_re(h, rho)
}

/// Maximum energy extractable by a unitary, and the passive state.
///
/// Degenerate energies keep their basis order (stable sort), so for a
/// diagonal Hamiltonian the passive state is diagonal in the given basis.
pub fn ergotropy(rho: &CMat, h: &CMat) -> Result<(f64, CMat)> {
    let (energies, frame) = if linalg::is_diagonal(h, 0.0) {
        let d = h.nrows();
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| h[(a, a)].re.total_cmp(&h[(b, b)].re));
        let frame = faer::Mat::from_fn(d, d, |i, k| if i == order[k] { re(1.0) } else { linalg::ZERO });
        (order.iter().map(|&i| h[(i, i)].re).collect::<Vec<_>>(), frame)
    } else {
        linalg::eigh(h)?
    };
    let mut pops = linalg::eigvalsh(rho)?;
    pops.sort_by(|a, b| b.total_cmp(a));
    let passive_diag = linalg::diag(&pops);
    let passive = &frame * passive_diag * frame.adjoint();
    let passive_energy: f64 = pops.iter().zip(&energies).map(|(p, e)| p * e).sum();
    Ok((energy(rho, h) - passive_energy, passive))
}

/// `⟨W_z⟩` and `⟨J_y⟩ = ⟨W_y⟩/2`, the two quadratures seen by a lasing rotation.
fn lasing_quadratures(rho: &CMat, ops: &Generators) -> (f64, f64) {
    (expect_re(&ops.wz, rho), 0.5 * expect_re(&ops.w_y(), rho))
}

fn rotation_optimum(omega_l: f64, a: f64, b: f64) -> f64 {
    omega_l * (a + a.hypot(b))
}

/// Tolerance on `⟨W_y⟩` below which the `θ = π` closed form is used.
pub const QUADRATURE_TOL: f64 = 1e-8;

/// Hot currents at or below this are treated as zero when forming `η`.
pub const HEAT_FLOOR: f64 = 1e-12;

/// Energy extractable by rotations `e^{−iθ W_x/2}` on the lasing transition.
///
/// For states without `⟨W_y⟩` this is `2 ω_l max(⟨W_z⟩, 0)`, reached at
/// `θ = π`. Otherwise the energy change is a sinusoid in `θ` and its exact
/// maximum `ω_l(⟨W_z⟩ + |(⟨W_z⟩, ⟨W_y⟩/2)|)` is returned.
pub fn lasing_ergotropy(rho: &CMat, ops: &Generators) -> f64 {
    let (a, b) = lasing_quadratures(rho, ops);
    if b.abs() <= QUADRATURE_TOL {
        2.0 * ops.omega_l() * a.max(0.0)
    } else {
        debug!("<W_y> = {:e}; using the general rotation optimum", 2.0 * b);
        rotation_optimum(ops.omega_l(), a, b)
    }
}

/// Brute-force lasing ergotropy: 1000-point scan of `θ ∈ [0, 2π)` followed
/// by golden-section refinement around the best grid point.
pub fn lasing_ergotropy_scan(rho: &CMat, ops: &Generators) -> Result<f64> {
    let jx = linalg::scale(ops.w_x().as_ref(), re(0.5));
    let (vals, vecs) = linalg::eigh(&jx)?;
    let e0 = energy(rho, &ops.h);
    let extracted = |theta: f64| {
        let phases: Vec<c64> = vals.iter().map(|v| c64::from_polar(1.0, -theta * v)).collect();
        let d = vals.len();
        let diag = faer::Mat::from_fn(d, d, |i, j| if i == j { phases[i] } else { linalg::ZERO });
        let u = &vecs * diag * vecs.adjoint();
        let rotated = &u * rho * u.adjoint();
        e0 - energy(&rotated, &ops.h)
    };
    const GRID: usize = 1000;
    let step = std::f64::consts::TAU / GRID as f64;
    let (best_k, mut best) = (0..GRID)
        .map(|k| (k, extracted(k as f64 * step)))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let (mut lo, mut hi) = ((best_k as f64 - 1.0) * step, (best_k as f64 + 1.0) * step);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (extracted(x1), extracted(x2));
    for _ in 0..80 {
        if f1 > f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = extracted(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = extracted(x2);
        }
    }
    best = best.max(f1).max(f2);
    Ok(best.max(0.0))
}

/// Low-cold-temperature steady state: Boltzmann weights `e^{−k β_h ω_h}` on
/// the `q + 1` states `w = (p+k)/2`, `y = (p+2q)/3 − k`.
pub fn cold_limit_state(ops: &IrrepOperators, beta_h: f64) -> Result<CMat> {
    let (p, q) = (ops.label.p as i32, ops.label.q as i32);
    let d = ops.dim();
    let x = (-beta_h * ops.ops.omega_h).exp();
    let mut pops = vec![0.0; d];
    for k in 0..=q {
        let w = Sixths::from_halves(p + k);
        let y = Sixths::from_thirds(p + 2 * q) - Sixths::from_int(k);
        pops[line_index(ops, w, y)?] = x.powi(k);
    }
    let z: f64 = pops.iter().sum();
    Ok(linalg::diag(&pops.iter().map(|v| v / z).collect::<Vec<_>>()))
}

fn line_index(ops: &IrrepOperators, w: Sixths, y: Sixths) -> Result<usize> {
    let hits: Vec<usize> = (0..ops.dim()).filter(|&i| ops.basis[i].weight() == (w, y)).collect();
    match hits.as_slice() {
        [i] => Ok(*i),
        _ => Err(EngineError::StateNotInIrrep(format!("(w={w}, y={y})"))),
    }
}

/// `ω_l [p + q + 1/(1−x) − (q+1)/(1−x^{q+1})]` with `x = e^{−β_h ω_h}`.
pub fn cold_limit_ergotropy(p: u32, q: u32, beta_h: f64, omega_h: f64, omega_l: f64) -> f64 {
    let (p, q) = (f64::from(p), f64::from(q));
    let s = beta_h * omega_h;
    let bose = if s < 1e-6 {
        // 1/(1−x) − (q+1)/(1−x^{q+1}) = −q/2 − s q(q+2)/12 + O(s³)
        -q / 2.0 - s * q * (q + 2.0) / 12.0
    } else {
        -1.0 / (-s).exp_m1() + (q + 1.0) / (-(q + 1.0) * s).exp_m1()
    };
    omega_l * (p + q + bose)
}

/// Heat current from the hot bath, `ω_h g_u ⟨n̄_h U_+U_- − (n̄_h+1) U_-U_+⟩`.
pub fn heat_current_hot(rho: &CMat, ops: &Generators, params: &EngineParams) -> f64 {
    bath_current(
        rho,
        &ops.u_plus,
        &ops.u_minus,
        params.nbar_h(),
        params.g_u,
        params.omega_h,
    )
}

/// Heat current from the cold bath, `ω_c g_v ⟨n̄_c V_+V_- − (n̄_c+1) V_-V_+⟩`.
pub fn heat_current_cold(rho: &CMat, ops: &Generators, params: &EngineParams) -> f64 {
    bath_current(
        rho,
        &ops.v_plus,
        &ops.v_minus,
        params.nbar_c(),
        params.g_v,
        params.omega_c,
    )
}

fn bath_current(rho: &CMat, o_plus: &CMat, o_minus: &CMat, nbar: f64, g: f64, omega: f64) -> f64 {
    if g == 0.0 {
        return 0.0;
    }
    let absorb = expect_re(&(o_plus * o_minus), rho);
    let emit = expect_re(&(o_minus * o_plus), rho);
    omega * g * (nbar * absorb - (nbar + 1.0) * emit)
}

/// Power into the dissipative load, `ω_l g_w ⟨W_+W_-⟩`.
pub fn load_power(rho: &CMat, ops: &Generators, params: &EngineParams) -> f64 {
    ops.omega_l() * params.g_w * expect_re(&(&ops.w_plus * &ops.w_minus), rho)
}

/// Power delivered to the drive, `i α ω_l ⟨W_+ − W_-⟩`.
pub fn driven_power(rho: &CMat, ops: &Generators, params: &EngineParams) -> f64 {
    let v = linalg::expect(&(&ops.w_plus - &ops.w_minus), rho) * c64::new(0.0, params.alpha * ops.omega_l());
    if v.im.abs() > 1e-10 * v.re.abs().max(1.0) {
        warn!("driven power has imaginary part {:e}; state is not Hermitian", v.im);
    }
    v.re
}

/// Output power of whichever work channel the model has.
pub fn power(rho: &CMat, ops: &Generators, params: &EngineParams) -> f64 {
    match params.model {
        Model::TwoBath => 0.0,
        Model::DissipativeLoad => load_power(rho, ops, params),
        Model::Driven => driven_power(rho, ops, params),
    }
}

/// `η = P / I_h`.
pub fn efficiency(rho: &CMat, ops: &Generators, params: &EngineParams) -> Result<f64> {
    let ih = heat_current_hot(rho, ops, params);
    if ih <= HEAT_FLOOR {
        return Err(EngineError::NonPositiveHeatCurrent(ih));
    }
    Ok(power(rho, ops, params) / ih)
}

/// `𝓛^*(X) = Σ rate · (O^† X O − ½{O^†O, X})` for one dissipator.
fn adjoint_dissipator(o: &CMat, x: &CMat) -> CMat {
    let odo = o.adjoint() * o;
    o.adjoint() * x * o - linalg::scale(linalg::anticommutator(&odo, x).as_ref(), re(0.5))
}

/// Heat currents `tr{ρ g 𝓛^*(H)}` per bath, from the adjoint generator.
pub fn adjoint_heat_currents(rho: &CMat, ops: &Generators, params: &EngineParams) -> (f64, f64) {
    let bath = |o_plus: &CMat, o_minus: &CMat, nbar: f64, g: f64| {
        let lh = linalg::scale(adjoint_dissipator(o_plus, &ops.h).as_ref(), re(nbar + 1.0))
            + linalg::scale(adjoint_dissipator(o_minus, &ops.h).as_ref(), re(nbar));
        g * expect_re(&lh, rho)
    };
    (
        bath(&ops.u_plus, &ops.u_minus, params.nbar_h(), params.g_u),
        bath(&ops.v_plus, &ops.v_minus, params.nbar_c(), params.g_v),
    )
}

/// `d⟨N_g⟩/dt = tr{N_g 𝓛ρ}` with `N_g = n/3 + Y/2 − W_z`; the constant drops
/// out because the generator is trace preserving.
pub fn ground_population_rate(rho: &CMat, ops: &Generators, params: &EngineParams) -> Result<f64> {
    let l = engine::generator_matrix(ops, params)?;
    let drho = linalg::apply_superop(&l, rho);
    Ok(expect_re(&ops.ground_count_shifted(), &drho))
}

/// All figures of merit of one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoReport {
    pub energy: f64,
    pub ergotropy: f64,
    pub lasing_ergotropy: f64,
    pub heat_hot: f64,
    pub heat_cold: f64,
    pub power: f64,
    /// `None` when the hot current is not positive.
    pub efficiency: Option<f64>,
    /// `d⟨N_g⟩/dt`.
    pub ground_rate: f64,
    pub wz: f64,
    /// `⟨W_y⟩/2`.
    pub jy: f64,
}

impl ThermoReport {
    /// `I_h + I_c − P`.
    pub fn first_law_residual(&self) -> f64 {
        self.heat_hot + self.heat_cold - self.power
    }
}

pub fn thermo_report(rho: &CMat, ops: &Generators, params: &EngineParams) -> Result<ThermoReport> {
    let heat_hot = heat_current_hot(rho, ops, params);
    let power = power(rho, ops, params);
    let (wz, jy) = lasing_quadratures(rho, ops);
    Ok(ThermoReport {
        energy: energy(rho, &ops.h),
        ergotropy: ergotropy(rho, &ops.h)?.0,
        lasing_ergotropy: lasing_ergotropy(rho, ops),
        heat_hot,
        heat_cold: heat_current_cold(rho, ops, params),
        power,
        efficiency: (heat_hot > HEAT_FLOOR).then(|| power / heat_hot),
        ground_rate: ground_population_rate(rho, ops, params)?,
        wz,
        jy,
    })
}

/// Mixture of per-irrep reports with weights `p^λ`.
///
/// Additive quantities are averaged. The lasing rotation is one collective
/// unitary acting on every block at once, so its optimum is taken on the
/// averaged quadratures rather than per block. Ergotropy is the
/// block-preserving value `Σ p^λ 𝓔^λ`.
pub fn aggregate(parts: &[(f64, ThermoReport)], omega_l: f64) -> ThermoReport {
    let mean = |f: fn(&ThermoReport) -> f64| parts.iter().map(|(p, r)| p * f(r)).sum::<f64>();
    let wz = mean(|r| r.wz);
    let jy = mean(|r| r.jy);
    let heat_hot = mean(|r| r.heat_hot);
    let power = mean(|r| r.power);
    let lasing = if jy.abs() <= QUADRATURE_TOL {
        2.0 * omega_l * wz.max(0.0)
    } else {
        rotation_optimum(omega_l, wz, jy)
    };
    ThermoReport {
        energy: mean(|r| r.energy),
        ergotropy: mean(|r| r.ergotropy),
        lasing_ergotropy: lasing,
        heat_hot,
        heat_cold: mean(|r| r.heat_cold),
        power,
        efficiency: (heat_hot > HEAT_FLOOR).then(|| power / heat_hot),
        ground_rate: mean(|r| r.ground_rate),
        wz,
        jy,
    }
}

/// `n` distinguishable particles, each in the single-particle steady state.
pub fn independent_baseline(n: u32, params: &EngineParams) -> Result<ThermoReport> {
    let ops = crate::su3::irrep_matrices(crate::su3::IrrepLabel::new(1, 0), params.omega_c, params.omega_h)?;
    let l = engine::build_liouvillian(&ops, params)?;
    let rho = engine::steady_state(&l, params)?;
    let single = thermo_report(&rho, &ops.ops, params)?;
    Ok(aggregate(&[(f64::from(n), single)], params.omega_l()))
}
