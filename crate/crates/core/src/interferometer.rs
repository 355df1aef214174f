//! Two-crystal induced-coherence interferometer.
//!
//! Signal photons from the two sources are superposed on a combining
//! splitter (the signal side is a Mach-Zehnder arm); the idler of the first
//! source traverses the sample arm and is overlapped with the idler mode of
//! the second source (the idler side is a Michelson arm). Interference shows
//! up in the signal count rate even though the idler is never detected, and
//! its contrast is set by the heralding efficiencies and the arm
//! transmittances.
//!
//! The module carries two independent routes to the detector rate: a closed
//! form, and a brute-force expansion of the propagated two-photon state
//! followed by a partial trace over the idler modes. The pair is used as a
//! cross-check throughout the test suite.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::numeric::{lit, Real, SPEED_OF_LIGHT};
use crate::pair_source::PairSourceParams;

/// Signal-side mode labels after propagation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SignalMode {
    /// Detector output port of the combining splitter.
    Port1,
    /// Complementary output port.
    Port2,
    /// Reflection loss of the signal-arm attenuator.
    AttenuatorLoss,
    /// Stray signal of source 1 (its idler kept, signal lost).
    Stray1,
    /// Stray signal of source 2.
    Stray2,
}

/// Idler-side mode labels after propagation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum IdlerMode {
    /// Common idler mode shared by the two sources once overlapped.
    Common,
    /// Source-2 idler kept distinct (only when mode merging is disabled).
    Source2,
    /// Idler lost in the sample-arm element.
    SampleLoss,
    /// Stray idler of source 1.
    Stray1,
    /// Stray idler of source 2.
    Stray2,
}

/// One coalesced term of the propagated two-photon state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeTerm<R: Real> {
    pub signal: SignalMode,
    pub idler: IdlerMode,
    pub amplitude: Complex<R>,
}

/// Propagated two-photon state as a list of (signal mode, idler mode,
/// amplitude) terms, with duplicate label pairs coherently summed.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeAmplitudeState<R: Real> {
    pub terms: Vec<ModeTerm<R>>,
}

impl<R: Real> ModeAmplitudeState<R> {
    /// Total probability carried by the state; unitary propagation preserves
    /// |gain1|^2 + |gain2|^2.
    pub fn total_probability(&self) -> R {
        self.terms.iter().map(|t| t.amplitude.norm_sqr()).sum()
    }

    /// Partial trace over the idler modes, evaluated at one signal mode:
    /// sum over idler labels of |amplitude|^2.
    pub fn signal_mode_rate(&self, mode: SignalMode) -> R {
        self.terms
            .iter()
            .filter(|t| t.signal == mode)
            .map(|t| t.amplitude.norm_sqr())
            .sum()
    }

    /// Rate at the detector output port.
    pub fn detector_rate(&self) -> R {
        self.signal_mode_rate(SignalMode::Port1)
    }
}

/// Full configuration of the interferometer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferometerConfig<R: Real> {
    pub source1: PairSourceParams<R>,
    pub source2: PairSourceParams<R>,
    /// Power transmittance of the signal-arm attenuator, in [0, 1].
    pub signal_transmittance: R,
    /// Power transmittance of the idler-arm element, in [0, 1].
    pub idler_transmittance: R,
    /// Phase shifter setting on the source-2 signal path, radians.
    pub phase_shift: R,
    /// Constant phase offset accumulated on the inter-crystal idler path, radians.
    pub phase_offset: R,
    /// Idler transit time from crystal 1 to crystal 2, seconds.
    pub idler_transit: R,
    /// Source-1 signal propagation time to the combining splitter, seconds.
    pub signal_transit_1: R,
    /// Source-2 signal propagation time to the combining splitter, seconds.
    pub signal_transit_2: R,
    /// Pump wavelength, meters.
    pub pump_wavelength: R,
    /// Signal center wavelength, meters.
    pub signal_wavelength: R,
    /// Idler center wavelength, meters.
    pub idler_wavelength: R,
    /// Overlap the idler modes of the two sources. Disabling it makes the
    /// idlers distinguishable and must kill the interference.
    pub merge_idler_modes: bool,
}

impl<R: Real> InterferometerConfig<R> {
    /// Lossless configuration from two sources and the pump/signal
    /// wavelengths; the idler wavelength follows from energy conservation.
    pub fn new(
        source1: PairSourceParams<R>,
        source2: PairSourceParams<R>,
        pump_wavelength: R,
        signal_wavelength: R,
    ) -> Result<Self> {
        let inv_idler = pump_wavelength.recip() - signal_wavelength.recip();
        if !(inv_idler > R::zero()) {
            return Err(Error::Domain(format!(
                "pump wavelength {pump_wavelength} must be shorter than signal wavelength {signal_wavelength}"
            )));
        }
        let cfg = Self {
            source1,
            source2,
            signal_transmittance: R::one(),
            idler_transmittance: R::one(),
            phase_shift: R::zero(),
            phase_offset: R::zero(),
            idler_transit: R::zero(),
            signal_transit_1: R::zero(),
            signal_transit_2: R::zero(),
            pump_wavelength,
            signal_wavelength,
            idler_wavelength: inv_idler.recip(),
            merge_idler_modes: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Symmetric ideal configuration (unit efficiency sources with equal
    /// gains), handy as a baseline in scans and tests.
    pub fn ideal(pump_wavelength: R, signal_wavelength: R) -> Result<Self> {
        let half = lit::<R>(0.5);
        let src = PairSourceParams::ideal().with_gain_sq(half);
        Self::new(src, src, pump_wavelength, signal_wavelength)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("signal_transmittance", self.signal_transmittance),
            ("idler_transmittance", self.idler_transmittance),
        ] {
            if !(v >= R::zero() && v <= R::one()) {
                return Err(Error::Domain(format!("{name} = {v} outside [0, 1]")));
            }
        }
        for (name, v) in [
            ("pump_wavelength", self.pump_wavelength),
            ("signal_wavelength", self.signal_wavelength),
            ("idler_wavelength", self.idler_wavelength),
        ] {
            if !(v > R::zero()) {
                return Err(Error::Domain(format!("{name} = {v} must be positive")));
            }
        }
        // Energy conservation: 1/lambda_p = 1/lambda_s + 1/lambda_i.
        let lhs = self.pump_wavelength.recip();
        let rhs = self.signal_wavelength.recip() + self.idler_wavelength.recip();
        if ((lhs - rhs) / lhs).abs() > lit(1e-6) {
            return Err(Error::Domain(format!(
                "wavelengths violate energy conservation: 1/{} != 1/{} + 1/{}",
                self.pump_wavelength, self.signal_wavelength, self.idler_wavelength
            )));
        }
        Ok(())
    }

    pub fn with_phase(mut self, phase_shift: R) -> Self {
        self.phase_shift = phase_shift;
        self
    }

    pub fn with_signal_transmittance(mut self, t: R) -> Self {
        self.signal_transmittance = t;
        self
    }

    pub fn with_idler_transmittance(mut self, t: R) -> Self {
        self.idler_transmittance = t;
        self
    }

    /// Optical path by which the idler side leads the signal side,
    /// c * (tau0 - tau1 + tau2), in meters. Zero at group-delay matching.
    pub fn path_offset(&self) -> R {
        lit::<R>(SPEED_OF_LIGHT)
            * (self.idler_transit - self.signal_transit_1 + self.signal_transit_2)
    }

    /// Set the path offset through the idler transit time.
    pub fn with_path_offset(mut self, offset: R) -> Self {
        self.idler_transit = offset / lit::<R>(SPEED_OF_LIGHT);
        self.signal_transit_1 = R::zero();
        self.signal_transit_2 = R::zero();
        self
    }
}

/// Expand the propagated two-photon state into mode amplitudes.
///
/// Source-1 signal passes the attenuator and splits on the combiner with a
/// plus sign; source-2 signal carries exp(i*phase_shift) and splits with a
/// minus sign on the second port. Source-1 idler passes the sample-arm
/// element and picks up exp(i*phase_offset); with mode merging on it is
/// identified with the source-2 idler.
pub fn expand_final_state<R: Real>(cfg: &InterferometerConfig<R>) -> ModeAmplitudeState<R> {
    let half = lit::<R>(0.5);
    let split = half.sqrt(); // 1/sqrt(2) combiner factor
    let ts = cfg.signal_transmittance.sqrt();
    let ts_loss = (R::one() - cfg.signal_transmittance).sqrt();
    let ti = cfg.idler_transmittance.sqrt();
    let ti_loss = (R::one() - cfg.idler_transmittance).sqrt();
    let idler_phase = Complex::from_polar(R::one(), cfg.phase_offset);
    let shifter = Complex::from_polar(R::one(), cfg.phase_shift);

    let merged_idler = if cfg.merge_idler_modes {
        IdlerMode::Common
    } else {
        IdlerMode::Source2
    };

    let mut raw: Vec<(SignalMode, IdlerMode, Complex<R>)> = Vec::with_capacity(16);

    // Source 1. Signal factor: sqrt(eta_s) (port1 + port2)/sqrt(2) + sqrt(1-eta_s) loss.
    let s1 = cfg.source1;
    let signal_ports = [
        (SignalMode::Port1, ts * split),
        (SignalMode::Port2, ts * split),
        (SignalMode::AttenuatorLoss, ts_loss),
    ];
    // Idler factor: sqrt(eta_i) e^{i phi0} common + sqrt(1-eta_i) loss.
    let idler_ports = [
        (IdlerMode::Common, idler_phase * ti),
        (IdlerMode::SampleLoss, Complex::new(ti_loss, R::zero())),
    ];
    let paired1 = s1.gain * s1.paired;
    for (sig, sw) in signal_ports {
        for (idl, iw) in idler_ports {
            raw.push((sig, idl, paired1 * sw * iw));
        }
    }
    let stray_idler1 = s1.gain * s1.signal_only;
    for (sig, sw) in signal_ports {
        raw.push((sig, IdlerMode::Stray1, stray_idler1 * sw));
    }
    let stray_signal1 = s1.gain * s1.idler_only;
    for (idl, iw) in idler_ports {
        raw.push((SignalMode::Stray1, idl, stray_signal1 * iw));
    }

    // Source 2. Signal factor: e^{i phi} (port1 - port2)/sqrt(2); no attenuator.
    let s2 = cfg.source2;
    let paired2 = s2.gain * s2.paired * shifter;
    raw.push((SignalMode::Port1, merged_idler, paired2 * split));
    raw.push((SignalMode::Port2, merged_idler, -paired2 * split));
    let stray_idler2 = s2.gain * s2.signal_only * shifter;
    raw.push((SignalMode::Port1, IdlerMode::Stray2, stray_idler2 * split));
    raw.push((SignalMode::Port2, IdlerMode::Stray2, -stray_idler2 * split));
    raw.push((SignalMode::Stray2, merged_idler, s2.gain * s2.idler_only));

    // Coalesce duplicate (signal, idler) label pairs coherently.
    let mut map: std::collections::BTreeMap<(SignalMode, IdlerMode), Complex<R>> =
        std::collections::BTreeMap::new();
    for (sig, idl, amp) in raw {
        let entry = map
            .entry((sig, idl))
            .or_insert_with(|| Complex::new(R::zero(), R::zero()));
        *entry += amp;
    }
    let terms = map
        .into_iter()
        .filter(|(_, amp)| amp.norm_sqr() > R::zero())
        .map(|((signal, idler), amplitude)| ModeTerm {
            signal,
            idler,
            amplitude,
        })
        .collect();
    ModeAmplitudeState { terms }
}

/// Detector rate by the brute-force route: expand the state at the given
/// phase-shifter setting and trace out the idler modes.
pub fn signal_rate_oracle<R: Real>(cfg: &InterferometerConfig<R>, phase: R) -> R {
    expand_final_state(&cfg.with_phase(phase)).detector_rate()
}

/// Detector rate in closed form:
/// mean + |C1 p1 C2 p2| sqrt(eta_s eta_i) cos(phi - phi0 + arg(C2 p2 / C1 p1)).
pub fn signal_rate<R: Real>(cfg: &InterferometerConfig<R>, phase: R) -> R {
    let mean = mean_signal_rate(cfg);
    if !cfg.merge_idler_modes {
        return mean;
    }
    let a1 = cfg.source1.gain * cfg.source1.paired;
    let a2 = cfg.source2.gain * cfg.source2.paired;
    let amp = a1.norm() * a2.norm() * (cfg.signal_transmittance * cfg.idler_transmittance).sqrt();
    let arg = a2.arg() - a1.arg();
    mean + amp * (phase - cfg.phase_offset + arg).cos()
}

/// Phase-independent part of the detector rate:
/// (|C1 p1|^2 eta_s + |C2 p2|^2 + |C1 q1|^2 eta_s + |C2 q2|^2) / 2.
/// Independent of the idler transmittance.
pub fn mean_signal_rate<R: Real>(cfg: &InterferometerConfig<R>) -> R {
    let half = lit::<R>(0.5);
    let g1 = cfg.source1.gain.norm_sqr();
    let g2 = cfg.source2.gain.norm_sqr();
    let s1 = g1 * (cfg.source1.paired.norm_sqr() + cfg.source1.signal_only.norm_sqr());
    let s2 = g2 * (cfg.source2.paired.norm_sqr() + cfg.source2.signal_only.norm_sqr());
    half * (s1 * cfg.signal_transmittance + s2)
}

/// Fringe visibility of the detector rate versus the phase shifter:
/// gamma = 2 |C1 C2 p1 p2| sqrt(eta_s eta_i)
///       / [ (|p1|^2+|q1|^2)|C1|^2 eta_s + (|p2|^2+|q2|^2)|C2|^2 ].
pub fn fringe_visibility<R: Real>(cfg: &InterferometerConfig<R>) -> Result<R> {
    let mean = mean_signal_rate(cfg);
    if mean <= R::zero() {
        return Err(Error::UndefinedVisibility);
    }
    if !cfg.merge_idler_modes {
        return Ok(R::zero());
    }
    let a1 = cfg.source1.gain * cfg.source1.paired;
    let a2 = cfg.source2.gain * cfg.source2.paired;
    let amp = a1.norm() * a2.norm() * (cfg.signal_transmittance * cfg.idler_transmittance).sqrt();
    Ok(amp / mean)
}

/// Symmetric-source simplification gamma = mu_s->i * 2 sqrt(eta_s eta_i) / (1 + eta_s).
/// Valid when both sources share gains and amplitude moduli.
pub fn symmetric_visibility<R: Real>(
    mu_signal_to_idler: R,
    signal_transmittance: R,
    idler_transmittance: R,
) -> R {
    mu_signal_to_idler * lit::<R>(2.0) * (signal_transmittance * idler_transmittance).sqrt()
        / (R::one() + signal_transmittance)
}

/// Which interferometer arm a loss sweep attenuates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arm {
    Signal,
    Idler,
}

/// Fringe visibility versus transmission of one arm element.
///
/// For the idler arm, `idler_double_pass` models a filter sitting in the
/// Michelson arm and traversed twice, so the effective power transmittance is
/// T^2 and the visibility becomes linear in T.
pub fn sweep_arm_loss<R: Real>(
    cfg: &InterferometerConfig<R>,
    arm: Arm,
    transmission_grid: &[R],
    idler_double_pass: bool,
) -> Result<Vec<(R, R)>> {
    transmission_grid
        .iter()
        .map(|&t| {
            if !(t >= R::zero() && t <= R::one()) {
                return Err(Error::Domain(format!("transmission {t} outside [0, 1]")));
            }
            let swept = match arm {
                Arm::Signal => cfg.with_signal_transmittance(t),
                Arm::Idler => {
                    let eff = if idler_double_pass { t * t } else { t };
                    cfg.with_idler_transmittance(eff)
                }
            };
            Ok((t, fringe_visibility(&swept)?))
        })
        .collect()
}
