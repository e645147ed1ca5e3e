//! Time-domain evolution under the full nonstationary Hamiltonian
//! `H(ω(t)) + (ω̇/4ω) i(a² − a†²)` across a frequency ramp.
//!
//! The production stepper is a fourth-order commutator-free Magnus scheme
//! with two Gauss nodes. Each step is an exact unitary, so the unitarity and
//! parity monitors only see round-off. An explicit Dormand–Prince 5(4) stepper
//! is kept for cross-validation.

use std::collections::BTreeMap;

use log::{debug, warn};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::entanglement::{sector_state, Conditioning};
use crate::error::{DleError, Result};
use crate::hamiltonian::{
    drive_generator, frequency_jump_unitary, h_static, CavityFrequency, SystemParams,
};
use crate::hilbert::{
    build_basis, build_operator, BasisLabel, FockCutoff, OperatorKind, StateVector, C64,
};
use crate::linalg::expm_hermitian;
use crate::oracle::{diagonalize, identify_dressed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RampShape {
    Sudden,
    Linear,
    /// `3s² − 2s³`, with vanishing `ω̇` at both ends.
    Smoothstep,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RampProtocol {
    pub shape: RampShape,
    pub omega_start: CavityFrequency,
    pub omega_end: CavityFrequency,
    pub tau: f64,
    pub t0: f64,
}

impl RampProtocol {
    pub fn new(
        shape: RampShape,
        omega_start: CavityFrequency,
        omega_end: CavityFrequency,
        tau: f64,
        t0: f64,
    ) -> Result<Self> {
        if !(t0.is_finite() && t0 >= 0.0) {
            return Err(DleError::invalid(
                "t0",
                format!("onset must be finite and >= 0, got {t0}"),
            ));
        }
        let needs_duration = shape != RampShape::Sudden;
        if !tau.is_finite() || tau < 0.0 || (needs_duration && tau == 0.0) {
            return Err(DleError::invalid(
                "tau",
                format!("ramp duration must be > 0, got {tau}"),
            ));
        }
        Ok(RampProtocol {
            shape,
            omega_start,
            omega_end,
            tau: if needs_duration { tau } else { 0.0 },
            t0,
        })
    }

    pub fn end_time(&self) -> f64 {
        self.t0 + self.tau
    }
}

/// `(ω(t), ω̇(t))`. A sudden protocol reports `ω̇ = 0`; its jump is applied
/// separately by [`evolve`].
pub fn omega_of_t(protocol: &RampProtocol, t: f64) -> (f64, f64) {
    let (ws, we) = (protocol.omega_start.value(), protocol.omega_end.value());
    if t < protocol.t0 {
        return (ws, 0.0);
    }
    if protocol.shape == RampShape::Sudden || t > protocol.end_time() {
        return (we, 0.0);
    }
    let s = (t - protocol.t0) / protocol.tau;
    let delta = we - ws;
    match protocol.shape {
        RampShape::Linear => (ws + delta * s, delta / protocol.tau),
        RampShape::Smoothstep => (
            ws + delta * s * s * (3.0 - 2.0 * s),
            delta * 6.0 * s * (1.0 - s) / protocol.tau,
        ),
        RampShape::Sudden => unreachable!(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stepper {
    Magnus4,
    DormandPrince,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveConfig {
    pub stepper: Stepper,
    /// Local error per step, in state-vector norm.
    pub tol: f64,
    pub norm_bound: f64,
    pub parity_bound: f64,
    pub leakage_bound: f64,
    /// Overlaps are reported for dressed labels with `n <= report_photons`.
    pub report_photons: usize,
    pub min_step: f64,
    /// Include the `(ω̇/4ω) i(a² − a†²)` term. Without it a sudden ramp is a
    /// bare projection of the initial state onto the final dressed basis.
    pub drive: bool,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        EvolveConfig {
            stepper: Stepper::Magnus4,
            tol: 1e-10,
            norm_bound: 1e-8,
            parity_bound: 1e-10,
            leakage_bound: 1e-6,
            report_photons: 2,
            min_step: 1e-14,
            drive: true,
        }
    }
}

impl EvolveConfig {
    /// Default head-room: `max(20, 4 + report_photons)`.
    pub fn default_cutoff(&self) -> FockCutoff {
        FockCutoff::new(20.max(4 + self.report_photons))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionResult {
    pub final_state: StateVector,
    /// Largest `|‖ψ‖ − 1|` seen during the run.
    pub norm_drift: f64,
    /// Largest change of either excitation-parity weight.
    pub parity_drift: f64,
    /// Largest top-Fock occupation seen.
    pub max_leakage: f64,
    /// `<dressed(label, ω_end)|ψ(final)>`.
    pub overlaps: BTreeMap<BasisLabel, C64>,
    pub steps: usize,
}

impl EvolutionResult {
    pub fn probability(&self, label: BasisLabel) -> f64 {
        self.overlaps.get(&label).map_or(0.0, |z| z.norm_sqr())
    }

    pub fn w_10(&self) -> f64 {
        self.probability(BasisLabel::new(1, 1, 0))
    }

    pub fn w_01(&self) -> f64 {
        self.probability(BasisLabel::new(1, 0, 1))
    }

    pub fn w_11(&self) -> f64 {
        self.probability(BasisLabel::new(0, 1, 1)) + self.probability(BasisLabel::new(2, 1, 1))
    }

    /// Probability of leaving the dressed ground state of the final Hamiltonian.
    pub fn total_excitation(&self) -> f64 {
        (self.final_state.norm_sqr() - self.probability(BasisLabel::new(0, 0, 0))).max(0.0)
    }

    /// Raw concurrence of the `n`-photon sector in the dressed basis.
    pub fn conditional_concurrence(&self, n: usize) -> Result<f64> {
        let mut dressed = StateVector::zeros(self.final_state.cutoff());
        for (&label, &amp) in &self.overlaps {
            dressed.set_amplitude(label, amp)?;
        }
        Ok(sector_state(&dressed, n, Conditioning::Raw)?
            .state
            .concurrence())
    }
}

/// Time-dependent Hamiltonian assembled from fixed pieces:
/// `H(ω) = H(ω_ref) + (ω − ω_ref) a†a + (ω̇/4ω) K`.
struct Generator {
    base: DMatrix<C64>,
    omega_ref: f64,
    number: DVector<f64>,
    drive: Option<DMatrix<C64>>,
    /// Basis indices of the two excitation-parity blocks.
    blocks: [Vec<usize>; 2],
}

impl Generator {
    fn new(
        params: &SystemParams,
        omega_ref: CavityFrequency,
        cutoff: FockCutoff,
        with_drive: bool,
    ) -> Result<Self> {
        let a = build_operator(OperatorKind::Annihilate, cutoff)?;
        let number = a.adjoint().product(&a)?;
        Ok(Generator {
            base: h_static(params, omega_ref, cutoff).into_matrix(),
            omega_ref: omega_ref.value(),
            number: number.matrix().diagonal().map(|z| z.re),
            drive: with_drive.then(|| drive_generator(cutoff).into_matrix()),
            blocks: [1, -1].map(|parity| {
                build_basis(cutoff)
                    .into_iter()
                    .filter(|l| l.parity() == parity)
                    .map(|l| l.index())
                    .collect()
            }),
        })
    }

    /// `exp(−i h H) ψ` for a parity-conserving `H`, one block at a time.
    fn propagate(&self, hmat: &DMatrix<C64>, h: f64, psi: &DVector<C64>) -> Result<DVector<C64>> {
        let mut out = DVector::zeros(psi.len());
        for idx in &self.blocks {
            let sub = hmat.select_rows(idx).select_columns(idx);
            let moved = expm_hermitian(&sub, h)? * psi.select_rows(idx);
            for (k, &i) in idx.iter().enumerate() {
                out[i] = moved[k];
            }
        }
        Ok(out)
    }

    fn at(&self, omega: f64, omega_dot: f64) -> DMatrix<C64> {
        let mut h = self.base.clone();
        let shift = omega - self.omega_ref;
        for (i, n) in self.number.iter().enumerate() {
            h[(i, i)] += C64::new(shift * n, 0.0);
        }
        if let Some(drive) = self.drive.as_ref().filter(|_| omega_dot != 0.0) {
            h += drive * C64::new(omega_dot / (4.0 * omega), 0.0);
        }
        h
    }

    fn at_time(&self, protocol: &RampProtocol, t: f64) -> DMatrix<C64> {
        let (w, wd) = omega_of_t(protocol, t);
        self.at(w, wd)
    }
}

struct Monitor<'a> {
    config: &'a EvolveConfig,
    even0: f64,
    odd0: f64,
    norm_drift: f64,
    parity_drift: f64,
    max_leakage: f64,
}

impl<'a> Monitor<'a> {
    fn new(config: &'a EvolveConfig, psi: &StateVector) -> Self {
        let (even0, odd0) = psi.parity_weights();
        Monitor {
            config,
            even0,
            odd0,
            norm_drift: 0.0,
            parity_drift: 0.0,
            max_leakage: psi.top_fock_weight(),
        }
    }

    fn check(&mut self, psi: &StateVector, time: f64) -> Result<()> {
        let drift = (psi.norm() - 1.0).abs();
        self.norm_drift = self.norm_drift.max(drift);
        if drift > self.config.norm_bound {
            return Err(DleError::NormDrift {
                drift,
                time,
                bound: self.config.norm_bound,
            });
        }
        let (even, odd) = psi.parity_weights();
        self.parity_drift = self
            .parity_drift
            .max((even - self.even0).abs())
            .max((odd - self.odd0).abs());
        let weight = psi.top_fock_weight();
        self.max_leakage = self.max_leakage.max(weight);
        if weight > self.config.leakage_bound {
            return Err(DleError::CutoffLeakage {
                weight,
                time,
                bound: self.config.leakage_bound,
            });
        }
        Ok(())
    }
}

const SQRT3: f64 = 1.732_050_807_568_877_2;

fn magnus_step(
    gen: &Generator,
    protocol: &RampProtocol,
    psi: &DVector<C64>,
    t: f64,
    h: f64,
) -> Result<DVector<C64>> {
    let t1 = t + (0.5 - SQRT3 / 6.0) * h;
    let t2 = t + (0.5 + SQRT3 / 6.0) * h;
    let h1 = gen.at_time(protocol, t1);
    let h2 = gen.at_time(protocol, t2);
    let comm = &h1 * &h2 - &h2 * &h1;
    // exp(Ω) = exp(−i h H_eff), with H_eff Hermitian
    let mut heff = (&h1 + &h2) * C64::new(0.5, 0.0) + comm * C64::new(0.0, SQRT3 * h / 12.0);
    heff = (&heff + heff.adjoint()) * C64::new(0.5, 0.0);
    gen.propagate(&heff, h, psi)
}

// Dormand–Prince 5(4) tableau
const DP_C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP_B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const DP_E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// One Dormand–Prince step; returns the fifth-order solution and the error estimate.
fn dopri_step(
    gen: &Generator,
    protocol: &RampProtocol,
    psi: &DVector<C64>,
    t: f64,
    h: f64,
) -> (DVector<C64>, f64) {
    let minus_i = C64::new(0.0, -1.0);
    let mut k: Vec<DVector<C64>> = Vec::with_capacity(7);
    for s in 0..7 {
        let mut y = psi.clone();
        for (j, kj) in k.iter().enumerate() {
            if DP_A[s][j] != 0.0 {
                y.axpy(C64::new(h * DP_A[s][j], 0.0), kj, C64::new(1.0, 0.0));
            }
        }
        k.push(gen.at_time(protocol, t + DP_C[s] * h) * y * minus_i);
    }
    let mut next = psi.clone();
    let mut err = DVector::<C64>::zeros(psi.len());
    for s in 0..7 {
        next.axpy(C64::new(h * DP_B[s], 0.0), &k[s], C64::new(1.0, 0.0));
        err.axpy(C64::new(h * DP_E[s], 0.0), &k[s], C64::new(1.0, 0.0));
    }
    (next, err.norm())
}

/// Adaptive integration over `[t_start, t_end]` where the Hamiltonian is smooth.
fn integrate_segment(
    gen: &Generator,
    protocol: &RampProtocol,
    psi: &mut StateVector,
    (t_start, t_end): (f64, f64),
    config: &EvolveConfig,
    monitor: &mut Monitor,
) -> Result<usize> {
    if t_end <= t_start {
        return Ok(0);
    }
    let cutoff = psi.cutoff();
    let scale = gen.at_time(protocol, t_start).norm().max(1.0);
    let mut h = (t_end - t_start).min(0.1 / scale);
    let mut t = t_start;
    let mut steps = 0;
    let mut amps = psi.amplitudes().clone();
    while t < t_end {
        h = h.min(t_end - t);
        if h < config.min_step {
            return Err(DleError::StepUnderflow { time: t, step: h });
        }
        let (candidate, err, order) = match config.stepper {
            Stepper::Magnus4 => {
                let full = magnus_step(gen, protocol, &amps, t, h)?;
                let half = magnus_step(gen, protocol, &amps, t, 0.5 * h)?;
                let two = magnus_step(gen, protocol, &half, t + 0.5 * h, 0.5 * h)?;
                let err = (&two - &full).norm() / 15.0;
                (two, err, 5.0)
            }
            Stepper::DormandPrince => {
                let (next, err) = dopri_step(gen, protocol, &amps, t, h);
                (next, err, 5.0)
            }
        };
        let factor = if err == 0.0 {
            4.0
        } else {
            (0.9 * (config.tol / err).powf(1.0 / order)).clamp(0.2, 4.0)
        };
        if err <= config.tol {
            t = if t_end - (t + h) < 1e-12 * t_end.abs().max(1.0) {
                t_end
            } else {
                t + h
            };
            amps = candidate;
            steps += 1;
            *psi = StateVector::from_amplitudes(cutoff, amps.clone())?;
            monitor.check(psi, t)?;
        }
        h *= factor;
    }
    Ok(steps)
}

/// Integrates `i d|ψ>/dt = H(t)|ψ>` from `t = 0` to the end of the ramp.
pub fn evolve(
    initial: &StateVector,
    protocol: &RampProtocol,
    params: &SystemParams,
    cutoff: FockCutoff,
    config: &EvolveConfig,
) -> Result<EvolutionResult> {
    let cutoff = cutoff.require_quench()?;
    if config.report_photons > cutoff.max_photons() {
        return Err(DleError::PhotonOutOfRange {
            n: config.report_photons,
            cutoff: cutoff.max_photons(),
        });
    }
    initial.cutoff().check_same(cutoff)?;
    if !initial.is_normalized(1e-12) {
        return Err(DleError::invalid(
            "initial",
            format!("state must be normalized, norm² = {}", initial.norm_sqr()),
        ));
    }
    params.check_off_resonance(protocol.omega_end, "omega_end")?;

    let gen = Generator::new(params, protocol.omega_start, cutoff, config.drive)?;
    let mut psi = initial.clone();
    let mut monitor = Monitor::new(config, &psi);
    let mut steps = 0;

    // static prefix: a single exact propagator
    if protocol.t0 > 0.0 {
        let h = gen.at(protocol.omega_start.value(), 0.0);
        psi = StateVector::from_amplitudes(
            cutoff,
            gen.propagate(&h, protocol.t0, psi.amplitudes())?,
        )?;
        monitor.check(&psi, protocol.t0)?;
        steps += 1;
    }
    match protocol.shape {
        RampShape::Sudden if config.drive => {
            let jump = frequency_jump_unitary(protocol.omega_start, protocol.omega_end, cutoff)?;
            psi = jump.apply(&psi)?;
            monitor.check(&psi, protocol.t0)?;
            steps += 1;
        }
        RampShape::Sudden => {}
        RampShape::Linear | RampShape::Smoothstep => {
            steps += integrate_segment(
                &gen,
                protocol,
                &mut psi,
                (protocol.t0, protocol.end_time()),
                config,
                &mut monitor,
            )?;
        }
    }
    debug!(
        "evolve: {steps} steps, norm drift {:.2e}",
        monitor.norm_drift
    );
    if monitor.parity_drift > config.parity_bound {
        warn!(
            "parity-sector weight drifted by {:.2e} (bound {:.0e})",
            monitor.parity_drift, config.parity_bound
        );
    }

    let spectrum = diagonalize(params, protocol.omega_end, cutoff)?;
    let overlaps = build_basis(cutoff)
        .into_iter()
        .filter(|l| l.n <= config.report_photons)
        .map(|l| Ok((l, identify_dressed(&spectrum, l)?.vector.inner(&psi)?)))
        .collect::<Result<BTreeMap<_, _>>>()?;

    Ok(EvolutionResult {
        final_state: psi,
        norm_drift: monitor.norm_drift,
        parity_drift: monitor.parity_drift,
        max_leakage: monitor.max_leakage,
        overlaps,
        steps,
    })
}

/// Dressed ground state of `H(ω)`, the natural initial state of a ramp.
pub fn dressed_ground(
    params: &SystemParams,
    omega: CavityFrequency,
    cutoff: FockCutoff,
) -> Result<StateVector> {
    let spectrum = diagonalize(params, omega, cutoff)?;
    Ok(identify_dressed(&spectrum, BasisLabel::new(0, 0, 0))?.vector)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub tau: f64,
    pub total_excitation: f64,
    pub w_10: f64,
    pub w_01: f64,
    pub w_11: f64,
    pub c_1: f64,
    pub c_2: f64,
    pub norm_drift: f64,
    pub parity_drift: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanTable {
    pub rows: Vec<ScanRow>,
    /// Total excitation never increases with `tau`.
    pub monotone: bool,
}

/// Logarithmic grid of `points` durations between `tau_min` and `tau_max`.
pub fn log_tau_grid(tau_min: f64, tau_max: f64, points: usize) -> Result<Vec<f64>> {
    if !(tau_min > 0.0 && tau_max >= tau_min && tau_max.is_finite()) {
        return Err(DleError::invalid(
            "tau-grid",
            format!("need 0 < min <= max, got {tau_min}..{tau_max}"),
        ));
    }
    if points == 0 || (points == 1 && tau_min != tau_max) {
        return Err(DleError::invalid(
            "tau-grid",
            "need at least two points for a range",
        ));
    }
    if points == 1 {
        return Ok(vec![tau_min]);
    }
    let (a, b) = (tau_min.ln(), tau_max.ln());
    Ok((0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .collect())
}

/// Runs [`evolve`] from the dressed ground state of `omega_start` for every
/// duration in `taus`, in parallel, keeping grid order.
pub fn limit_scan(
    params: &SystemParams,
    family: &RampProtocol,
    taus: &[f64],
    cutoff: FockCutoff,
    config: &EvolveConfig,
) -> Result<ScanTable> {
    if taus.windows(2).any(|w| w[1] <= w[0]) {
        return Err(DleError::invalid(
            "tau-grid",
            "durations must be strictly increasing",
        ));
    }
    let initial = dressed_ground(params, family.omega_start, cutoff)?;
    let rows = taus
        .par_iter()
        .map(|&tau| {
            let protocol = RampProtocol::new(
                family.shape,
                family.omega_start,
                family.omega_end,
                tau,
                family.t0,
            )?;
            let r = evolve(&initial, &protocol, params, cutoff, config)?;
            Ok(ScanRow {
                tau,
                total_excitation: r.total_excitation(),
                w_10: r.w_10(),
                w_01: r.w_01(),
                w_11: r.w_11(),
                c_1: r.conditional_concurrence(1)?,
                c_2: r.conditional_concurrence(2)?,
                norm_drift: r.norm_drift,
                parity_drift: r.parity_drift,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let monotone = rows
        .windows(2)
        .all(|w| w[1].total_excitation <= w[0].total_excitation * (1.0 + 1e-9) + 1e-15);
    if !monotone {
        warn!("total excitation is not monotone in tau across the scan");
    }
    Ok(ScanTable { rows, monotone })
}
