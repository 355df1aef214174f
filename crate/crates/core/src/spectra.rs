//! Frequency-domain fringe synthesis.
//!
//! The detected signal spectrum is a Gaussian envelope carrying one
//! sinusoidal fringe per sample reflection path. The fringe frequency in
//! relative wavelength is (optical mismatch)/lambda^2, the exact reciprocal
//! phase is kept internally, and each component is damped by the
//! finite-spectral-bin roll-off. Second-order beat notes between reflection
//! paths can be added behind a flag.

use crate::error::{Error, Result};
use crate::interferometer::{fringe_visibility, mean_signal_rate, InterferometerConfig};
use crate::numeric::{lit, sinc, Real};
use crate::sample::ReflectionPath;

/// Gaussian description of the detected signal spectrum and of the
/// spectrometer sampling grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalSpectrum<R: Real> {
    /// Center wavelength, meters.
    pub center_wavelength: R,
    /// Full width at half maximum of the spectral envelope, meters.
    pub fwhm: R,
    /// Width of one spectral sample (the unit spectral measurement), meters.
    pub grid_step: R,
    /// Total width of the sampled grid, meters.
    pub grid_span: R,
}

impl<R: Real> SignalSpectrum<R> {
    pub fn new(center_wavelength: R, fwhm: R, grid_step: R, grid_span: R) -> Result<Self> {
        let spec = Self {
            center_wavelength,
            fwhm,
            grid_step,
            grid_span,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.center_wavelength > R::zero()) {
            return Err(Error::Domain("center wavelength must be positive".into()));
        }
        if !(self.fwhm > R::zero()) {
            return Err(Error::Domain("spectral fwhm must be positive".into()));
        }
        if !(self.grid_step > R::zero()) {
            return Err(Error::Domain("grid step must be positive".into()));
        }
        if self.grid_span < self.fwhm * lit(4.0) {
            return Err(Error::Domain(format!(
                "grid span {} must cover at least 4x the spectral fwhm {}",
                self.grid_span, self.fwhm
            )));
        }
        Ok(())
    }

    /// Number of spectral samples on the grid.
    pub fn samples(&self) -> usize {
        let n = (self.grid_span / self.grid_step).round();
        n.to_usize().unwrap_or(0).max(2)
    }

    /// Relative-wavelength axis, centered on zero.
    pub fn axis(&self) -> Vec<R> {
        let n = self.samples();
        let half = lit::<R>((n as f64 - 1.0) / 2.0);
        (0..n)
            .map(|i| (lit::<R>(i as f64) - half) * self.grid_step)
            .collect()
    }

    /// Normalized Gaussian envelope at a relative wavelength.
    pub fn envelope(&self, rel_wavelength: R) -> R {
        let x = rel_wavelength / self.fwhm;
        (-lit::<R>(4.0) * R::LN_2() * x * x).exp()
    }

    /// Depth-axis bin of an N-point transform of this grid,
    /// lambda0^2 / (N * grid_step).
    pub fn depth_bin(&self) -> R {
        self.center_wavelength * self.center_wavelength
            / (lit::<R>(self.samples() as f64) * self.grid_step)
    }

    /// Deepest unaliased optical path difference, lambda0^2 / (2 * grid_step).
    pub fn nyquist_depth(&self) -> R {
        self.center_wavelength * self.center_wavelength / (lit::<R>(2.0) * self.grid_step)
    }
}

/// What a fringe record scans over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FringeKind {
    /// Spectral fringe versus relative wavelength.
    Fd,
    /// Delay scan, meters of optical path.
    Td,
    /// Fine phase scan, meters of mirror displacement.
    Phase,
}

impl FringeKind {
    pub fn label(&self) -> &'static str {
        match self {
            FringeKind::Fd => "FD",
            FringeKind::Td => "TD",
            FringeKind::Phase => "PHASE",
        }
    }

    pub fn axis_unit(&self) -> &'static str {
        match self {
            FringeKind::Fd => "relative_wavelength_m",
            FringeKind::Td => "delay_m",
            FringeKind::Phase => "displacement_m",
        }
    }
}

/// Expected (and optionally Poisson-sampled) counts along a scan axis.
#[derive(Debug, Clone, PartialEq)]
pub struct FringeRecord<R: Real> {
    pub kind: FringeKind,
    pub axis: Vec<R>,
    pub expected: Vec<R>,
    pub sampled: Option<Vec<u64>>,
}

impl<R: Real> FringeRecord<R> {
    pub fn new(kind: FringeKind, axis: Vec<R>, expected: Vec<R>) -> Self {
        debug_assert_eq!(axis.len(), expected.len());
        debug_assert!(
            axis.windows(2).all(|w| w[1] > w[0]),
            "axis must be monotone"
        );
        Self {
            kind,
            axis,
            expected,
            sampled: None,
        }
    }

    /// The values a reconstruction should consume: sampled counts when
    /// present, expected rates otherwise.
    pub fn values(&self) -> Vec<R> {
        match &self.sampled {
            Some(counts) => counts.iter().map(|&c| lit::<R>(c as f64)).collect(),
            None => self.expected.clone(),
        }
    }

    /// Uniform axis step, if the axis is uniform to 1 part in 10^6 (plus a
    /// few ulps of the axis magnitude, which dominates at f32).
    pub fn uniform_step(&self) -> Result<R> {
        if self.axis.len() < 2 {
            return Err(Error::NonUniformAxis);
        }
        let step = self.axis[1] - self.axis[0];
        let scale = self.axis[0]
            .abs()
            .max(self.axis[self.axis.len() - 1].abs());
        let tol = step.abs() * lit(1e-6) + R::epsilon() * scale * lit(8.0);
        for w in self.axis.windows(2) {
            if (w[1] - w[0] - step).abs() > tol {
                return Err(Error::NonUniformAxis);
            }
        }
        Ok(step)
    }
}

/// Whether to include inter-path beat notes, and how strongly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CrossTerms<R: Real> {
    Exclude,
    /// `strength` scales the beat amplitude relative to gamma |a_j a_k|;
    /// the underlying second-order process has no first-principles magnitude
    /// in this model.
    Include {
        strength: R,
    },
}

/// Per-path fringe visibility: interferometer visibility times the path
/// amplitude magnitude (the path takes the place of the idler-arm
/// amplitude transmittance), times the spectral-bin roll-off at its depth.
fn path_contrast<R: Real>(gamma: R, path: &ReflectionPath<R>, rolloff: R) -> R {
    gamma * path.amplitude.norm() * rolloff
}

/// Synthesize the frequency-domain fringe for a set of reflection paths.
///
/// expected(dl) = E(dl) * mean * [ 1 + sum_k gamma_k sin(theta_k(dl))
///                                   + optional beats ]
/// with theta_k the exact reciprocal-wavelength phase whose linearization is
/// -2 pi m_k dl / lambda0^2, m_k = path roundtrip + configured delay offset.
pub fn synthesize_fd_fringe<R: Real>(
    cfg: &InterferometerConfig<R>,
    paths: &[ReflectionPath<R>],
    spectrum: &SignalSpectrum<R>,
    cross: CrossTerms<R>,
) -> Result<FringeRecord<R>> {
    if paths.is_empty() {
        return Err(Error::Domain(
            "at least one reflection path required".into(),
        ));
    }
    cfg.validate()?;
    spectrum.validate()?;
    let offset = cfg.path_offset();
    if !offset.is_finite() {
        return Err(Error::Domain("delay offset must be finite".into()));
    }

    let gamma = fringe_visibility(cfg)?;
    let mean = mean_signal_rate(cfg);
    let lambda0 = spectrum.center_wavelength;
    let two_pi = lit::<R>(2.0) * R::PI();
    let quarter = R::FRAC_PI_2();
    let phase_bias = cfg.phase_shift + cfg.phase_offset;

    struct Tone<R> {
        contrast: R,
        depth: R,
        extra: R,
    }
    let mut tones: Vec<Tone<R>> = Vec::new();
    for p in paths {
        let m = p.optical_roundtrip + offset;
        tones.push(Tone {
            contrast: path_contrast(gamma, p, rolloff_factor(m.abs(), spectrum)?),
            // Phase: -2 pi m / (lambda0 + dl) + arg a + phi + phi0 + pi/2.
            depth: m,
            extra: p.amplitude.arg() + phase_bias + quarter,
        });
    }
    if let CrossTerms::Include { strength } = cross {
        // Beat between paths j and k rides at their roundtrip difference and
        // carries the idler-wavelength carrier: the difference frequency of
        // two idler-side reflections does not move with the signal delay.
        let inv_pump = cfg.pump_wavelength.recip();
        for j in 0..paths.len() {
            for k in (j + 1)..paths.len() {
                let dd = paths[j].optical_roundtrip - paths[k].optical_roundtrip;
                if dd == R::zero() {
                    continue;
                }
                let contrast = strength
                    * gamma
                    * paths[j].amplitude.norm()
                    * paths[k].amplitude.norm()
                    * rolloff_factor(dd.abs(), spectrum)?;
                tones.push(Tone {
                    contrast,
                    depth: -dd, // idler frequency rises as signal falls
                    extra: paths[j].amplitude.arg() - paths[k].amplitude.arg()
                        + two_pi * dd * inv_pump
                        + quarter,
                });
            }
        }
    }

    let axis = spectrum.axis();
    let expected = axis
        .iter()
        .map(|&dl| {
            let mut fringe = R::one();
            for t in &tones {
                let theta = -two_pi * t.depth / (lambda0 + dl) + t.extra;
                fringe += t.contrast * theta.sin();
            }
            spectrum.envelope(dl) * mean * fringe
        })
        .collect();
    Ok(FringeRecord::new(FringeKind::Fd, axis, expected))
}

/// Reference spectrum with the interference blocked: envelope times mean.
pub fn envelope_reference<R: Real>(
    cfg: &InterferometerConfig<R>,
    spectrum: &SignalSpectrum<R>,
) -> Result<FringeRecord<R>> {
    spectrum.validate()?;
    let mean = mean_signal_rate(cfg);
    let axis = spectrum.axis();
    let expected = axis
        .iter()
        .map(|&dl| spectrum.envelope(dl) * mean)
        .collect();
    Ok(FringeRecord::new(FringeKind::Fd, axis, expected))
}

/// Fringe washout from integrating one rectangular spectral bin:
/// |sinc(pi * depth * grid_step / lambda0^2)|. Unity at zero depth, first
/// zero at lambda0^2 / grid_step.
pub fn rolloff_factor<R: Real>(depth: R, spectrum: &SignalSpectrum<R>) -> Result<R> {
    if !(depth >= R::zero()) {
        return Err(Error::Domain(format!("depth {depth} must be >= 0")));
    }
    let x = R::PI() * depth * spectrum.grid_step
        / (spectrum.center_wavelength * spectrum.center_wavelength);
    Ok(sinc(x).abs())
}

/// Pointwise difference fringe - reference, for removing the zero-delay
/// artifact before reconstruction. Sampled counts are differenced when both
/// records carry them (the result may be negative, stored in `expected`).
pub fn subtract_dc<R: Real>(
    fringe: &FringeRecord<R>,
    reference: &FringeRecord<R>,
) -> Result<FringeRecord<R>> {
    if fringe.axis.len() != reference.axis.len()
        || fringe.axis.iter().zip(&reference.axis).any(|(a, b)| a != b)
    {
        return Err(Error::AxisMismatch);
    }
    let expected: Vec<R> = match (&fringe.sampled, &reference.sampled) {
        (Some(fs), Some(rs)) => fs
            .iter()
            .zip(rs)
            .map(|(&f, &r)| lit::<R>(f as f64) - lit::<R>(r as f64))
            .collect(),
        (Some(fs), None) => fs
            .iter()
            .zip(&reference.expected)
            .map(|(&f, &r)| lit::<R>(f as f64) - r)
            .collect(),
        _ => fringe
            .expected
            .iter()
            .zip(&reference.expected)
            .map(|(&f, &r)| f - r)
            .collect(),
    };
    Ok(FringeRecord {
        kind: fringe.kind,
        axis: fringe.axis.clone(),
        expected,
        sampled: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::ReflectionPath;
    use num_complex::Complex;

    const PUMP: f64 = 532e-9;
    const SIGNAL: f64 = 810e-9;

    fn cfg() -> InterferometerConfig<f64> {
        InterferometerConfig::ideal(PUMP, SIGNAL).unwrap()
    }

    fn spectrum() -> SignalSpectrum<f64> {
        SignalSpectrum::new(SIGNAL, 2.924425e-9, 0.07e-9, 35.84e-9).unwrap()
    }

    fn dft_magnitude(values: &[f64]) -> Vec<f64> {
        let n = values.len();
        (0..=n / 2)
            .map(|k| {
                let (mut re, mut im) = (0.0, 0.0);
                for (i, &v) in values.iter().enumerate() {
                    let w = -2.0 * std::f64::consts::PI * (k * i) as f64 / n as f64;
                    re += v * w.cos();
                    im += v * w.sin();
                }
                (re * re + im * im).sqrt()
            })
            .collect()
    }

    #[test]
    fn grid_matches_requested_span() {
        let s = spectrum();
        assert_eq!(s.samples(), 512);
        let axis = s.axis();
        assert_eq!(axis.len(), 512);
        assert!((axis[1] - axis[0] - 0.07e-9).abs() < 1e-24);
        assert!((axis[0] + axis[511]).abs() < 1e-15, "axis centered on zero");
    }

    #[test]
    fn zero_depth_path_gives_constant_phase_fringe() {
        let paths = [ReflectionPath::mirror_at(0.0)];
        let rec = synthesize_fd_fringe(&cfg(), &paths, &spectrum(), CrossTerms::Exclude).unwrap();
        // Oscillation-free: expected / envelope is constant.
        let s = spectrum();
        let vals: Vec<f64> = rec
            .axis
            .iter()
            .zip(&rec.expected)
            .map(|(&dl, &e)| e / s.envelope(dl))
            .collect();
        let first = vals[0];
        assert!(vals.iter().all(|v| (v - first).abs() < 1e-12));
        // At zero phases the fringe sits on its maximum: mean * (1 + gamma).
        assert!((first - 0.5 * 2.0).abs() < 1e-12);
    }

    #[test]
    fn one_millimeter_offset_reproduces_expected_cycle_count() {
        let c = cfg().with_path_offset(1e-3);
        let paths = [ReflectionPath::mirror_at(0.0)];
        let s = spectrum();
        let rec = synthesize_fd_fringe(&c, &paths, &s, CrossTerms::Exclude).unwrap();
        // Frequency 1 mm / lambda0^2 in cycles per meter of relative
        // wavelength; over the grid span that is ~78 cycles. Count zero
        // crossings of the DC-subtracted fringe.
        let reference = envelope_reference(&c, &s).unwrap();
        let diff = subtract_dc(&rec, &reference).unwrap();
        let mut crossings = 0;
        for w in diff.expected.windows(2) {
            if (w[0] > 0.0) != (w[1] > 0.0) {
                crossings += 1;
            }
        }
        let span = s.grid_step * s.samples() as f64;
        let expected_cycles = 1e-3 / (SIGNAL * SIGNAL) * span;
        let measured_cycles = crossings as f64 / 2.0;
        assert!(
            (measured_cycles - expected_cycles).abs() < 1.5,
            "cycles: measured {measured_cycles}, expected {expected_cycles}"
        );
    }

    #[test]
    fn two_paths_beat_into_two_depth_peaks() {
        let paths = [
            ReflectionPath::mirror_at(0.0),
            ReflectionPath {
                optical_roundtrip: 1.56468e-3,
                amplitude: Complex::new(0.5, 0.0),
                order: 0,
            },
        ];
        let c = cfg().with_path_offset(0.7e-3);
        let s = spectrum();
        let rec = synthesize_fd_fringe(&c, &paths, &s, CrossTerms::Exclude).unwrap();
        let diff = subtract_dc(&rec, &envelope_reference(&c, &s).unwrap()).unwrap();
        let mags = dft_magnitude(&diff.expected);
        let bin = s.depth_bin();
        let expect_bins = [
            (0.7e-3 / bin).round() as usize,
            ((1.56468e-3 + 0.7e-3) / bin).round() as usize,
        ];
        // Peak FWHM is ~11 bins, so compare against the floor one full
        // width away.
        for target in expect_bins {
            let local_max = (target - 2..=target + 2)
                .any(|k| mags[k] > mags[target + 14] * 3.0 && mags[k] > mags[target - 14] * 3.0);
            assert!(local_max, "no peak near bin {target}");
        }
    }

    #[test]
    fn rolloff_reference_points() {
        let s = spectrum();
        assert_eq!(rolloff_factor(0.0, &s).unwrap(), 1.0);
        let nyquist = s.nyquist_depth();
        assert!((nyquist - 4.6864e-3).abs() < 1e-6);
        let r = rolloff_factor(nyquist, &s).unwrap();
        assert!((r - 2.0 / std::f64::consts::PI).abs() < 1e-12);
        // First zero at twice the Nyquist depth.
        assert!(rolloff_factor(2.0 * nyquist, &s).unwrap() < 1e-12);
        assert!(rolloff_factor(-1.0, &s).is_err());
    }

    #[test]
    fn nyquist_depth_for_published_sampling() {
        // 810 nm center, 0.07 nm unit measurement: range ~4.69 mm.
        let s: SignalSpectrum<f64> =
            SignalSpectrum::new(810e-9, 2.9e-9, 0.07e-9, 35.84e-9).unwrap();
        assert!((s.nyquist_depth() - 4.686428571428572e-3).abs() < 1e-12);
    }

    #[test]
    fn subtract_self_zeroes_and_mismatch_errors() {
        let paths = [ReflectionPath::mirror_at(0.0)];
        let rec = synthesize_fd_fringe(&cfg(), &paths, &spectrum(), CrossTerms::Exclude).unwrap();
        let diff = subtract_dc(&rec, &rec).unwrap();
        assert!(diff.expected.iter().all(|&v| v == 0.0));

        let mut other = rec.clone();
        other.axis[3] += 1e-12;
        assert!(matches!(
            subtract_dc(&rec, &other),
            Err(Error::AxisMismatch)
        ));
    }

    #[test]
    fn noisy_minus_noiseless_reference_has_zero_mean_residual() {
        use crate::detector::{sample_fringe, DetectorModel};
        // Blocked-idler trace: Poisson-sample the envelope and subtract its
        // own noiseless expectation; the residual mean is shot-noise-limited.
        let c = cfg().with_idler_transmittance(0.0);
        let s = spectrum();
        let reference = envelope_reference(&c, &s).unwrap();
        let mut noisy = reference.clone();
        let det = DetectorModel::new(1.0, 0.0, 1.0, 21).unwrap();
        sample_fringe(&mut noisy, &det, 1.0e4).unwrap();
        let mut scaled_ref = reference.clone();
        scaled_ref.expected = scaled_ref.expected.iter().map(|&r| r * 1.0e4).collect();
        let diff = subtract_dc(&noisy, &scaled_ref).unwrap();
        let n = diff.expected.len() as f64;
        let residual_mean = diff.expected.iter().sum::<f64>() / n;
        let total_counts: f64 = noisy.expected.iter().sum();
        let sigma = total_counts.sqrt() / n;
        assert!(
            residual_mean.abs() < 3.0 * sigma,
            "residual mean {residual_mean} vs 3 sigma {}",
            3.0 * sigma
        );
    }

    #[test]
    fn dc_subtraction_suppresses_zero_depth_bin() {
        let c = cfg().with_path_offset(1.2e-3);
        let s = spectrum();
        let rec = synthesize_fd_fringe(
            &c,
            &[ReflectionPath::mirror_at(0.0)],
            &s,
            CrossTerms::Exclude,
        )
        .unwrap();
        let diff = subtract_dc(&rec, &envelope_reference(&c, &s).unwrap()).unwrap();
        let mags = dft_magnitude(&diff.expected);
        let peak = mags.iter().cloned().fold(0.0, f64::max);
        assert!(mags[0] < 1e-9 * peak, "dc bin {} vs peak {peak}", mags[0]);
    }

    #[test]
    fn envelope_factorization_leaves_constant_amplitude() {
        let c = cfg().with_path_offset(2.0e-3);
        let s = spectrum();
        let rec = synthesize_fd_fringe(
            &c,
            &[ReflectionPath::mirror_at(0.0)],
            &s,
            CrossTerms::Exclude,
        )
        .unwrap();
        let gamma_rho = fringe_visibility(&c).unwrap() * rolloff_factor(2.0e-3, &s).unwrap();
        let mean = mean_signal_rate(&c);
        // Where the sine is comfortably away from its zeros, the implied
        // amplitude must be the same constant.
        let two_pi = 2.0 * std::f64::consts::PI;
        for (&dl, &e) in rec.axis.iter().zip(&rec.expected) {
            let theta = -two_pi * 2.0e-3 / (SIGNAL + dl) + std::f64::consts::FRAC_PI_2;
            if theta.sin().abs() > 0.2 {
                let amp = (e / s.envelope(dl) / mean - 1.0) / theta.sin();
                assert!((amp - gamma_rho).abs() < 1e-9, "amp {amp} vs {gamma_rho}");
            }
        }
    }

    #[test]
    fn increasing_depth_increases_fringe_frequency() {
        let s = spectrum();
        let mut last = 0.0;
        for offset in [0.5e-3, 1.0e-3, 2.0e-3, 3.0e-3] {
            let c = cfg().with_path_offset(offset);
            let rec = synthesize_fd_fringe(
                &c,
                &[ReflectionPath::mirror_at(0.0)],
                &s,
                CrossTerms::Exclude,
            )
            .unwrap();
            let diff = subtract_dc(&rec, &envelope_reference(&c, &s).unwrap()).unwrap();
            let crossings = diff
                .expected
                .windows(2)
                .filter(|w| (w[0] > 0.0) != (w[1] > 0.0))
                .count();
            assert!(crossings as f64 > last, "offset {offset}");
            last = crossings as f64;
        }
    }

    #[test]
    fn cross_terms_vanish_when_excluded_or_dark() {
        let paths = [
            ReflectionPath::mirror_at(0.2e-3),
            ReflectionPath {
                optical_roundtrip: 1.0e-3,
                amplitude: Complex::new(0.0, 0.0),
                order: 0,
            },
        ];
        let s = spectrum();
        let c = cfg();
        let excl = synthesize_fd_fringe(&c, &paths, &s, CrossTerms::Exclude).unwrap();
        let incl =
            synthesize_fd_fringe(&c, &paths, &s, CrossTerms::Include { strength: 1.0 }).unwrap();
        // The second path is dark, so the beat contributes nothing either way.
        for (a, b) in excl.expected.iter().zip(&incl.expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn cross_terms_add_a_difference_tone() {
        let paths = [
            ReflectionPath::mirror_at(0.5e-3),
            ReflectionPath {
                optical_roundtrip: 2.2e-3,
                amplitude: Complex::new(0.4, 0.0),
                order: 0,
            },
        ];
        let s = spectrum();
        let c = cfg();
        let incl =
            synthesize_fd_fringe(&c, &paths, &s, CrossTerms::Include { strength: 0.5 }).unwrap();
        let diff = subtract_dc(&incl, &envelope_reference(&c, &s).unwrap()).unwrap();
        let mags = dft_magnitude(&diff.expected);
        let beat_bin = ((2.2e-3 - 0.5e-3) / s.depth_bin()).round() as usize;
        let near = (beat_bin - 1..=beat_bin + 1)
            .map(|k| mags[k])
            .fold(0.0, f64::max);
        let floor = mags[beat_bin + 10];
        assert!(near > 5.0 * floor, "beat {near} vs floor {floor}");
    }

    #[test]
    fn span_shorter_than_four_fwhm_is_rejected() {
        assert!(SignalSpectrum::new(810e-9, 3e-9, 0.07e-9, 10e-9).is_err());
    }

    #[test]
    fn empty_path_list_is_rejected() {
        assert!(matches!(
            synthesize_fd_fringe(&cfg(), &[], &spectrum(), CrossTerms::<f64>::Exclude),
            Err(Error::Domain(_))
        ));
    }
}
