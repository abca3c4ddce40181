//! Steady-state correlation functions from the quantum regression theorem,
//! emission spectra and the second-order coherence `g²`.
//!
//! Generators are in the interaction picture, so spectra are functions of
//! the detuning `Δ = ω − ω_l`:
//! `S(Δ) = (1/π) Re ∫_0^∞ e^{iΔτ} G⁽¹⁾(τ) dτ / G⁽¹⁾(0)`.
//! A non-decaying part of `G⁽¹⁾` (coherent emission under a drive) is split
//! off as a delta peak at `Δ = 0` and reported as `coherent_fraction`.

use faer::Mat;
use log::{debug, warn};
use rustfft::FftPlanner;

use crate::engine::{self, EngineParams, Liouvillian, Model};
use crate::error::{EngineError, Result};
use crate::linalg::{self, c64, re, CMat, ZERO};
use crate::su3::{Generators, IrrepOperators};

/// Which generator propagates the regression correlators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RegressionGenerator {
    /// The model's own generator, including the work channel.
    #[default]
    Full,
    /// Only the two bath dissipators.
    TwoBath,
}

impl std::str::FromStr for RegressionGenerator {
    type Err = EngineError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Self::Full),
            "two_bath" => Ok(Self::TwoBath),
            other => Err(EngineError::InvalidParams(format!(
                "unknown regression generator '{other}'"
            ))),
        }
    }
}

pub fn regression_liouvillian(
    ops: &IrrepOperators,
    params: &EngineParams,
    mode: RegressionGenerator,
) -> Result<Liouvillian> {
    match mode {
        RegressionGenerator::Full => engine::build_liouvillian(ops, params),
        RegressionGenerator::TwoBath => engine::build_liouvillian(
            ops,
            &EngineParams {
                model: Model::TwoBath,
                ..*params
            },
        ),
    }
}

/// Correlator samples on a uniform grid `τ_j = j dτ`.
#[derive(Debug, Clone)]
pub struct CorrelatorSeries {
    pub dtau: f64,
    pub values: Vec<c64>,
    /// `τ → ∞` limit.
    pub limit: c64,
    /// `dG/dτ` at `τ = 0`.
    pub derivative0: c64,
}

impl CorrelatorSeries {
    pub fn tau(&self) -> Vec<f64> {
        (0..self.values.len()).map(|j| j as f64 * self.dtau).collect()
    }

    pub fn at_zero(&self) -> c64 {
        self.values[0]
    }
}

/// Default window `τ_max = 20 / |Re λ_gap|`.
pub fn default_tau_max(l: &Liouvillian) -> Result<f64> {
    Ok(20.0 / l.spectral_gap()?)
}

pub const DEFAULT_N_TAU: usize = 1 << 14;

fn check_grid(tau_max: f64, n_tau: usize) -> Result<f64> {
    if !(tau_max > 0.0 && tau_max.is_finite()) || n_tau < 2 {
        return Err(EngineError::InvalidParams(format!(
            "bad correlator grid: tau_max={tau_max}, n={n_tau}"
        )));
    }
    Ok(tau_max / (n_tau - 1) as f64)
}

/// `tr{A e^{Lτ}[X]}` on a uniform grid, by repeated application of the
/// one-step propagator.
fn regress(l: &Liouvillian, x: &CMat, a: &CMat, tau_max: f64, n_tau: usize) -> Result<Vec<c64>> {
    let dtau = check_grid(tau_max, n_tau)?;
    let step = linalg::expm(&linalg::scale(l.matrix.as_ref(), re(dtau)));
    let d = l.dim;
    let a_t = linalg::vectorize(&linalg::transpose(a.as_ref()));
    let mut v = linalg::vectorize(x);
    let mut out = Vec::with_capacity(n_tau);
    for j in 0..n_tau {
        if j > 0 {
            v = &step * &v;
        }
        out.push((0..d * d).map(|k| a_t[(k, 0)] * v[(k, 0)]).sum());
    }
    Ok(out)
}

/// `G⁽¹⁾(τ) = tr{W_- e^{Lτ}[ρ W_+]}`.
pub fn g1_correlator(
    l: &Liouvillian,
    rho: &CMat,
    ops: &Generators,
    tau_max: f64,
    n_tau: usize,
) -> Result<CorrelatorSeries> {
    let x = rho * &ops.w_plus;
    let values = regress(l, &x, &ops.w_minus, tau_max, n_tau)?;
    let limit = linalg::expect(&ops.w_minus, rho) * linalg::expect(&ops.w_plus, rho);
    let derivative0 = linalg::expect(&ops.w_minus, &l.apply(&x));
    let g0 = values[0].norm();
    let tail = (values[n_tau - 1] - limit).norm();
    if tail > 1e-3 * g0 {
        warn!("G1 has not decayed by tau_max: |G1(tau_max) - G1(inf)| = {tail:e}, G1(0) = {g0:e}");
    }
    Ok(CorrelatorSeries {
        dtau: tau_max / (n_tau - 1) as f64,
        values,
        limit,
        derivative0,
    })
}

/// `G⁽²⁾(τ) = tr{W_+W_- e^{Lτ}[W_- ρ W_+]}`.
pub fn g2_correlator(
    l: &Liouvillian,
    rho: &CMat,
    ops: &Generators,
    tau_max: f64,
    n_tau: usize,
) -> Result<CorrelatorSeries> {
    let x = &ops.w_minus * rho * &ops.w_plus;
    let n_op = &ops.w_plus * &ops.w_minus;
    let values = regress(l, &x, &n_op, tau_max, n_tau)?;
    let flux = linalg::expect(&n_op, rho);
    Ok(CorrelatorSeries {
        dtau: tau_max / (n_tau - 1) as f64,
        values,
        limit: flux * flux,
        derivative0: linalg::expect(&n_op, &l.apply(&x)),
    })
}

/// Normalised spectrum on a detuning grid.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub detuning: Vec<f64>,
    pub values: Vec<f64>,
    /// `G⁽¹⁾(0) = ⟨W_+W_-⟩`.
    pub flux: f64,
    /// Weight of the delta peak at zero detuning.
    pub coherent_fraction: f64,
}

impl Spectrum {
    /// Trapezoid integral of the continuous part.
    pub fn integral(&self) -> f64 {
        trapezoid(&self.detuning, &self.values)
    }

    /// Sub-spectrum with `|Δ| ≤ half_width`.
    pub fn window(&self, half_width: f64) -> Spectrum {
        let (detuning, values) = self
            .detuning
            .iter()
            .zip(&self.values)
            .filter(|(d, _)| d.abs() <= half_width)
            .map(|(d, v)| (*d, *v))
            .unzip();
        Spectrum {
            detuning,
            values,
            ..self.clone()
        }
    }

    /// Value at the grid point nearest to zero detuning.
    pub fn peak_at_zero(&self) -> f64 {
        let k = (0..self.detuning.len())
            .min_by(|&a, &b| self.detuning[a].abs().total_cmp(&self.detuning[b].abs()))
            .unwrap();
        self.values[k]
    }
}

pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

/// Spectrum of a correlator by FFT: trapezoid rule with the first-order
/// Euler–Maclaurin endpoint correction, zero-padded to twice the length.
/// The grid is the full FFT frequency grid, sorted by detuning.
pub fn spectrum(series: &CorrelatorSeries) -> Result<Spectrum> {
    let c0 = series.at_zero().re;
    if c0 <= 1e-14 {
        return Err(EngineError::VanishingFlux(c0));
    }
    let n = series.values.len();
    let m = 2 * n.next_power_of_two();
    let h = series.dtau;
    let mut buf: Vec<c64> = vec![ZERO; m];
    for (j, v) in series.values.iter().enumerate() {
        let w = if j == 0 { 0.5 } else { 1.0 };
        buf[j] = (v - series.limit) * w * h;
    }
    FftPlanner::new().plan_fft_inverse(m).process(&mut buf);
    let f0 = series.values[0] - series.limit;
    let mut pairs: Vec<(f64, f64)> = (0..m)
        .map(|k| {
            let kk = if k < m / 2 { k as f64 } else { k as f64 - m as f64 };
            let delta = std::f64::consts::TAU * kk / (m as f64 * h);
            let fprime0 = c64::new(0.0, delta) * f0 + series.derivative0;
            let integral = buf[k] + fprime0 * (h * h / 12.0);
            (delta, integral.re / std::f64::consts::PI / c0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (detuning, values) = pairs.into_iter().unzip();
    Ok(Spectrum {
        detuning,
        values,
        flux: c0,
        coherent_fraction: series.limit.re / c0,
    })
}

/// Projector onto the stationary manifold along the decaying modes,
/// `P0 = R (L_0^† R)^{-1} L_0^†` from right and left null vectors.
pub fn stationary_projector(matrix: &CMat) -> Result<CMat> {
    let r = linalg::null_space(matrix, 1e-10)?;
    let lf = linalg::null_space(&linalg::dagger(matrix.as_ref()), 1e-10)?;
    if r.ncols() != lf.ncols() || r.ncols() == 0 {
        return Err(EngineError::Numerical(format!(
            "left/right null spaces have dimensions {} and {}",
            lf.ncols(),
            r.ncols()
        )));
    }
    let overlap = lf.adjoint() * &r;
    Ok(&r * linalg::inverse(&overlap) * lf.adjoint())
}

/// `(1/π) Re tr{A (−iΔ − L + P0)^{-1} [(1 − P0) X]} / norm` for each detuning.
///
/// Uses one eigendecomposition of `P0 − L` when it reproduces direct LU
/// solves at the ends and centre of the grid, and LU at every point otherwise.
pub fn resolvent_spectrum_with(matrix: &CMat, p0: &CMat, x: &CMat, a: &CMat, norm: f64, detuning: &[f64]) -> Vec<f64> {
    let dim = x.nrows();
    let xv = linalg::vectorize(x);
    let xq = &xv - p0 * &xv;
    let base = p0 - matrix;
    let a_t = linalg::vectorize(&linalg::transpose(a.as_ref()));
    let scale = 1.0 / std::f64::consts::PI / norm;
    let direct = |delta: f64| {
        let mut m = base.clone();
        for k in 0..dim * dim {
            m[(k, k)] += c64::new(0.0, -delta);
        }
        let y = linalg::solve(&m, &xq);
        let v: c64 = (0..dim * dim).map(|k| a_t[(k, 0)] * y[(k, 0)]).sum();
        v.re * scale
    };
    if detuning.len() > 8 {
        if let Some(modal) = modal_resolvent(&base, &xq, &a_t) {
            let values: Vec<f64> = detuning.iter().map(|&d| modal(d).re * scale).collect();
            let probes = [0, detuning.len() / 2, detuning.len() - 1];
            let reference: Vec<f64> = probes.iter().map(|&k| direct(detuning[k])).collect();
            let size = reference
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()))
                .max(f64::MIN_POSITIVE);
            if probes
                .iter()
                .zip(&reference)
                .all(|(&k, r)| (values[k] - r).abs() <= 1e-10 * size)
            {
                return values;
            }
            debug!("modal resolvent failed its spot check; solving at every detuning");
        }
    }
    detuning.iter().map(|&d| direct(d)).collect()
}

/// `Δ ↦ aᵀ (M − iΔ)^{-1} x` through the eigenvectors of `M`.
fn modal_resolvent(m: &CMat, x: &CMat, a_t: &CMat) -> Option<impl Fn(f64) -> c64> {
    let (vals, v) = linalg::eig(m).ok()?;
    let coeffs = linalg::solve(&v, x);
    let rows = a_t.transpose() * &v;
    let weights: Vec<c64> = (0..vals.len()).map(|j| rows[(0, j)] * coeffs[(j, 0)]).collect();
    if weights.iter().any(|w| !w.is_finite()) {
        return None;
    }
    Some(move |delta: f64| {
        vals.iter()
            .zip(&weights)
            .map(|(&lam, &w)| w / (lam - c64::new(0.0, delta)))
            .sum()
    })
}

/// Resolvent route to `S(Δ)` for a block with a unique steady state.
pub fn spectrum_resolvent(l: &Liouvillian, rho: &CMat, ops: &Generators, detuning: &[f64]) -> Result<Vec<f64>> {
    let c0 = linalg::expect(&(&ops.w_plus * &ops.w_minus), rho).re;
    if c0 <= 1e-14 {
        return Err(EngineError::VanishingFlux(c0));
    }
    let d = l.dim;
    let rv = linalg::vectorize(rho);
    let trace_row = Mat::from_fn(1, d * d, |_, k| if k % (d + 1) == 0 { re(1.0) } else { ZERO });
    let p0 = &rv * &trace_row;
    Ok(resolvent_spectrum_with(
        &l.matrix,
        &p0,
        &(rho * &ops.w_plus),
        &ops.w_minus,
        c0,
        detuning,
    ))
}

/// `g⁽²⁾(0) = ⟨W_+W_+W_-W_-⟩ / ⟨W_+W_-⟩²` for a raising operator `a^†`.
pub fn g2_zero_with(rho: &CMat, raising: &CMat) -> Result<f64> {
    let lowering = linalg::dagger(raising.as_ref());
    let n_op = raising * &lowering;
    let flux = linalg::expect(&n_op, rho).re;
    if flux <= 1e-14 {
        return Err(EngineError::VanishingFlux(flux));
    }
    let pair = raising * raising * &lowering * &lowering;
    Ok(linalg::expect(&pair, rho).re / (flux * flux))
}

pub fn g2_zero(rho: &CMat, ops: &Generators) -> Result<f64> {
    g2_zero_with(rho, &ops.w_plus)
}

/// Scalar spectral summary of one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralSummary {
    pub flux: f64,
    pub g2_zero: f64,
    /// `S` at zero detuning (continuous part).
    pub s_peak: f64,
    /// Slowest decay rate of the regression generator.
    pub linewidth: f64,
    /// Fraction of emitted power within the window, delta peak included.
    pub window_fraction: f64,
    pub coherent_fraction: f64,
}

/// Default half-width of the integration window, in linewidths.
pub const DEFAULT_WINDOW_LINEWIDTHS: f64 = 10.0;

pub fn spectral_summary(
    l: &Liouvillian,
    rho: &CMat,
    ops: &Generators,
    window_linewidths: f64,
) -> Result<SpectralSummary> {
    let flux = linalg::expect(&(&ops.w_plus * &ops.w_minus), rho).re;
    let g2 = g2_zero(rho, ops)?;
    let linewidth = l.spectral_gap()?;
    let half = window_linewidths * linewidth;
    let grid: Vec<f64> = (0..=400).map(|k| -half + 2.0 * half * k as f64 / 400.0).collect();
    let s = spectrum_resolvent(l, rho, ops, &grid)?;
    let coherent = (linalg::expect(&ops.w_minus, rho) * linalg::expect(&ops.w_plus, rho)).re / flux;
    Ok(SpectralSummary {
        flux,
        g2_zero: g2,
        s_peak: s[200],
        linewidth,
        window_fraction: trapezoid(&grid, &s) + coherent,
        coherent_fraction: coherent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{build_liouvillian, steady_state};
    use crate::su3::{irrep_matrices, IrrepLabel};

    fn load(g_w: f64) -> EngineParams {
        EngineParams {
            beta_c: 1.1,
            beta_h: 0.3,
            g_w,
            model: Model::DissipativeLoad,
            ..EngineParams::default()
        }
    }

    fn setup(label: IrrepLabel, p: &EngineParams) -> (IrrepOperators, Liouvillian, CMat) {
        let ops = irrep_matrices(label, p.omega_c, p.omega_h).unwrap();
        let l = build_liouvillian(&ops, p).unwrap();
        let rho = steady_state(&l, p).unwrap();
        (ops, l, rho)
    }

    #[test]
    fn lorentzian_from_single_exponential() {
        let gamma = 0.3;
        let n = 1 << 14;
        let tau_max = 40.0 / gamma;
        let dtau = tau_max / (n - 1) as f64;
        let values = (0..n).map(|j| re(2.0 * (-gamma * j as f64 * dtau).exp())).collect();
        let series = CorrelatorSeries {
            dtau,
            values,
            limit: ZERO,
            derivative0: re(-2.0 * gamma),
        };
        let s = spectrum(&series).unwrap();
        for (d, v) in s.detuning.iter().zip(&s.values).filter(|(d, _)| d.abs() < 3.0) {
            let exact = gamma / (gamma * gamma + d * d) / std::f64::consts::PI;
            assert!((v - exact).abs() < 1e-6 * exact.max(1e-3), "{d} {v} {exact}");
        }
        assert!((s.integral() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn g1_starts_at_flux_and_matches_exact_propagation() {
        let p = load(0.2);
        let (ops, l, rho) = setup(IrrepLabel::new(1, 0), &p);
        let tau_max = default_tau_max(&l).unwrap();
        let s = g1_correlator(&l, &rho, &ops.ops, tau_max, 257).unwrap();
        let flux = linalg::expect(&(&ops.ops.w_plus * &ops.ops.w_minus), &rho);
        assert!((s.at_zero() - flux).norm() < 1e-15);
        let tau = s.tau();
        for j in [1, 50, 200] {
            let x = engine::propagate(&l, &(&rho * &ops.ops.w_plus), tau[j]).unwrap();
            let exact = linalg::expect(&ops.ops.w_minus, &x);
            assert!((s.values[j] - exact).norm() < 1e-10);
            assert!(s.values[j].norm() <= s.at_zero().norm() + 1e-14);
        }
    }

    #[test]
    fn fft_and_resolvent_routes_agree() {
        for label in [IrrepLabel::new(1, 0), IrrepLabel::new(2, 1), IrrepLabel::new(4, 0)] {
            let p = load(0.3);
            let (ops, l, rho) = setup(label, &p);
            let tau_max = default_tau_max(&l).unwrap();
            let series = g1_correlator(&l, &rho, &ops.ops, tau_max, DEFAULT_N_TAU).unwrap();
            let fft = spectrum(&series).unwrap();
            assert!((fft.integral() + fft.coherent_fraction - 1.0).abs() < 1e-3);
            assert!(fft.values.iter().all(|&v| v > -1e-8));
            let center = fft.detuning.iter().position(|&d| d == 0.0).unwrap();
            let idx: Vec<usize> = (center - 100..center + 100).collect();
            let grid: Vec<f64> = idx.iter().map(|&k| fft.detuning[k]).collect();
            let res = spectrum_resolvent(&l, &rho, &ops.ops, &grid).unwrap();
            let peak = res.iter().copied().fold(0.0, f64::max);
            for (k, r) in idx.iter().zip(&res) {
                assert!(
                    (fft.values[*k] - r).abs() < 1e-4 * peak,
                    "{label}: {} vs {}",
                    fft.values[*k],
                    r
                );
            }
        }
    }

    #[test]
    fn g2_zero_vanishes_for_single_emitter() {
        let p = load(0.3);
        let (ops, _, rho) = setup(IrrepLabel::new(1, 0), &p);
        assert!(g2_zero(&rho, &ops.ops).unwrap().abs() < 1e-12);
    }

    #[test]
    fn coherent_state_has_unit_g2() {
        let n = 80;
        let alpha: f64 = 2.0;
        let mut amp = vec![0.0; n];
        amp[0] = (-alpha * alpha / 2.0).exp();
        for k in 1..n {
            amp[k] = amp[k - 1] * alpha / (k as f64).sqrt();
        }
        let rho = Mat::from_fn(n, n, |i, j| re(amp[i] * amp[j]));
        let raising = Mat::from_fn(n, n, |i, j| if i == j + 1 { re((i as f64).sqrt()) } else { ZERO });
        assert!((g2_zero_with(&rho, &raising).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn g2_correlator_properties() {
        let p = load(0.3);
        let (ops, l, rho) = setup(IrrepLabel::new(1, 0), &p);
        let tau_max = default_tau_max(&l).unwrap();
        let s = g2_correlator(&l, &rho, &ops.ops, tau_max, 2048).unwrap();
        assert!(s.at_zero().norm() < 1e-14);
        assert!(s.values.iter().all(|v| v.re > -1e-8 && v.im.abs() < 1e-8));
        let last = s.values.last().unwrap().re;
        assert!((last / s.limit.re - 1.0).abs() < 1e-6);
        // early antibunching rise
        assert!(s.values[1].re < s.values[10].re && s.values[10].re < s.values[100].re);

        let (ops, l, rho) = setup(IrrepLabel::new(2, 1), &p);
        let s = g2_correlator(&l, &rho, &ops.ops, 10.0, 2).unwrap();
        let g2 = g2_zero(&rho, &ops.ops).unwrap();
        assert!((s.at_zero().re / s.limit.re - g2).abs() < 1e-12);
    }

    #[test]
    fn peak_falls_with_load_coupling() {
        let label = IrrepLabel::new(2, 1);
        let peaks: Vec<f64> = [0.05, 0.2, 0.6]
            .iter()
            .map(|&g| {
                let p = load(g);
                let (ops, l, rho) = setup(label, &p);
                spectrum_resolvent(&l, &rho, &ops.ops, &[0.0]).unwrap()[0]
            })
            .collect();
        assert!(peaks[0] > peaks[1] && peaks[1] > peaks[2], "{peaks:?}");
    }

    #[test]
    fn summary_window_fraction_is_a_fraction() {
        let p = load(0.3);
        let (ops, l, rho) = setup(IrrepLabel::new(2, 1), &p);
        let s = spectral_summary(&l, &rho, &ops.ops, DEFAULT_WINDOW_LINEWIDTHS).unwrap();
        assert!(s.window_fraction > 0.5 && s.window_fraction <= 1.0 + 1e-9);
        let flux = thermo_flux(&ops, &rho, &p);
        assert!((s.flux - flux).abs() < 1e-14);
    }

    fn thermo_flux(ops: &IrrepOperators, rho: &CMat, p: &EngineParams) -> f64 {
        crate::thermo::load_power(rho, &ops.ops, p) / (p.omega_l() * p.g_w)
    }

    #[test]
    fn stationary_projector_on_unique_state() {
        let p = load(0.3);
        let (_, l, rho) = setup(IrrepLabel::new(2, 1), &p);
        let p0 = stationary_projector(&l.matrix).unwrap();
        let x = linalg::vectorize(&linalg::identity(15));
        let y = linalg::unvectorize((&p0 * &x).as_ref(), 15);
        assert!(linalg::max_abs_diff(&linalg::scale(rho.as_ref(), re(15.0)), &y) < 1e-9);
    }

    #[test]
    fn two_bath_regression_drops_work_channel() {
        let p = load(0.3);
        let ops = irrep_matrices(IrrepLabel::new(2, 1), p.omega_c, p.omega_h).unwrap();
        let full = regression_liouvillian(&ops, &p, RegressionGenerator::Full).unwrap();
        let bare = regression_liouvillian(&ops, &p, RegressionGenerator::TwoBath).unwrap();
        assert!(linalg::max_abs_diff(&full.matrix, &bare.matrix) > 0.1);
        assert_eq!(
            "two_bath".parse::<RegressionGenerator>().unwrap(),
            RegressionGenerator::TwoBath
        );
    }
}
