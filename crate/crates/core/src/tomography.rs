//! Delay scans, depth reconstruction and the derived figures of merit.
//!
//! The frequency-domain pipeline Fourier-transforms a (DC-subtracted)
//! spectral fringe over the relative-wavelength axis; bin k maps to an
//! optical path difference k * lambda0^2 / (N * grid_step). Positive and
//! negative depths fold onto one axis, which narrows peaks near zero and
//! mirrors anything beyond the Nyquist depth back into range.

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::detector::{expected_counts, sample_count_at, DetectorModel};
use crate::error::{Error, Result};
use crate::interferometer::{fringe_visibility, mean_signal_rate, InterferometerConfig};
use crate::numeric::{derive_seed, lit, Real};
use crate::sample::ReflectionPath;
use crate::spectra::{
    envelope_reference, subtract_dc, synthesize_fd_fringe, CrossTerms, FringeKind, FringeRecord,
    SignalSpectrum,
};

/// Reconstructed amplitude versus optical path difference.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthProfile<R: Real> {
    pub depth_axis: Vec<R>,
    pub magnitude: Vec<R>,
}

impl<R: Real> DepthProfile<R> {
    pub fn depth_bin(&self) -> R {
        if self.depth_axis.len() > 1 {
            self.depth_axis[1] - self.depth_axis[0]
        } else {
            R::zero()
        }
    }

    pub fn max_depth(&self) -> R {
        self.depth_axis.last().copied().unwrap_or(R::zero())
    }
}

/// One detected peak of a depth profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak<R: Real> {
    /// Center position, meters (midpoint of the half-maximum crossings when
    /// both exist, otherwise the maximum sample position).
    pub position: R,
    /// Full width at half maximum, meters; clamped at the axis boundaries.
    pub fwhm: R,
    /// Magnitude at the maximum sample.
    pub amplitude: R,
}

/// Spectral apodization applied before the transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    None,
    Hann,
}

/// Time-domain delay scan.
///
/// counts(delay) = mean * [1 + sum_k gamma_k env(x_k) cos(2 pi x_k / lambda0 + psi_k)],
/// x_k = delay - (roundtrip_k + static offset). The burst envelope is the
/// transform of the spectral envelope, a Gaussian whose FWHM equals
/// [`axial_resolution_theory`]. No spectral-bin roll-off applies here: the
/// scan detects the full band at once.
pub fn td_scan<R: Real>(
    cfg: &InterferometerConfig<R>,
    paths: &[ReflectionPath<R>],
    spectrum: &SignalSpectrum<R>,
    delay_grid: &[R],
) -> Result<FringeRecord<R>> {
    if delay_grid.len() < 2 || delay_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain(
            "delay grid must be strictly increasing".into(),
        ));
    }
    cfg.validate()?;
    spectrum.validate()?;
    let gamma = fringe_visibility(cfg)?;
    let mean = mean_signal_rate(cfg);
    let offset = cfg.path_offset();
    let width = axial_resolution_theory(spectrum);
    let four_ln2 = lit::<R>(4.0) * R::LN_2();
    let two_pi = lit::<R>(2.0) * R::PI();
    let phase_bias = cfg.phase_shift + cfg.phase_offset;

    let expected = delay_grid
        .iter()
        .map(|&delay| {
            let mut fringe = R::one();
            for p in paths {
                let x = delay - (p.optical_roundtrip + offset);
                let u = x / width;
                let env = (-four_ln2 * u * u).exp();
                let phase = two_pi * x / cfg.signal_wavelength + p.amplitude.arg() + phase_bias;
                fringe += gamma * p.amplitude.norm() * env * phase.cos();
            }
            mean * fringe
        })
        .collect();
    Ok(FringeRecord::new(
        FringeKind::Td,
        delay_grid.to_vec(),
        expected,
    ))
}

/// Fine scan of the idler end mirror. A displacement d adds 2 * omega_i * d / c
/// of phase, so the fringe period is half the idler wavelength and the
/// contrast equals the interference visibility.
pub fn fine_phase_scan<R: Real>(
    cfg: &InterferometerConfig<R>,
    displacement_grid: &[R],
) -> Result<FringeRecord<R>> {
    if displacement_grid.len() < 2 || displacement_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain(
            "displacement grid must be strictly increasing".into(),
        ));
    }
    cfg.validate()?;
    let gamma = fringe_visibility(cfg)?;
    let mean = mean_signal_rate(cfg);
    let four_pi = lit::<R>(4.0) * R::PI();
    let phase_bias = cfg.phase_shift + cfg.phase_offset;
    let expected = displacement_grid
        .iter()
        .map(|&d| {
            mean * (R::one() + gamma * (four_pi * d / cfg.idler_wavelength + phase_bias).cos())
        })
        .collect();
    Ok(FringeRecord::new(
        FringeKind::Phase,
        displacement_grid.to_vec(),
        expected,
    ))
}

/// Fourier-transform a spectral fringe into a depth profile.
///
/// The record should already be DC-subtracted; whatever sits at zero
/// mismatch lands in bin 0 otherwise. Consumes sampled counts when present.
pub fn fd_reconstruct<R: Real>(
    fringe: &FringeRecord<R>,
    spectrum: &SignalSpectrum<R>,
    window: Window,
) -> Result<DepthProfile<R>> {
    if fringe.kind != FringeKind::Fd {
        return Err(Error::KindMismatch {
            expected: FringeKind::Fd.label(),
            got: fringe.kind.label(),
        });
    }
    let step = fringe.uniform_step()?;
    let values = fringe.values();
    let n = values.len();

    let mut buf: Vec<Complex<R>> = values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let w = match window {
                Window::None => R::one(),
                Window::Hann => {
                    let x = lit::<R>(i as f64) / lit::<R>((n - 1) as f64);
                    lit::<R>(0.5) * (R::one() - (lit::<R>(2.0) * R::PI() * x).cos())
                }
            };
            Complex::new(v * w, R::zero())
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let bin = spectrum.center_wavelength * spectrum.center_wavelength / (lit::<R>(n as f64) * step);
    let half = n / 2;
    let depth_axis = (0..=half).map(|k| lit::<R>(k as f64) * bin).collect();
    let magnitude = buf[..=half].iter().map(|c| c.norm()).collect();
    Ok(DepthProfile {
        depth_axis,
        magnitude,
    })
}

/// Local maxima above a height threshold given as a fraction of the profile
/// maximum. FWHM comes from linearly interpolated half-maximum crossings;
/// crossings that run off the axis are clamped, which is what produces the
/// narrowed widths of near-zero (folded) peaks.
pub fn detect_peaks<R: Real>(profile: &DepthProfile<R>, min_prominence: R) -> Vec<Peak<R>> {
    let mags = &profile.magnitude;
    let n = mags.len();
    if n < 2 {
        return Vec::new();
    }
    let max = mags.iter().fold(R::zero(), |a, &b| a.max(b));
    if max <= R::zero() {
        return Vec::new();
    }
    let threshold = min_prominence * max;

    let mut peaks = Vec::new();
    for i in 0..n {
        let left_ok = i == 0 || mags[i] > mags[i - 1];
        let right_ok = i == n - 1 || mags[i] >= mags[i + 1];
        // Strict rise on the left avoids double-counting flat tops.
        if !(left_ok && right_ok && mags[i] >= threshold && mags[i] > R::zero()) {
            continue;
        }
        let half = mags[i] * lit::<R>(0.5);
        let axis = &profile.depth_axis;

        let mut left = axis[0];
        let mut left_clamped = true;
        for j in (1..=i).rev() {
            if mags[j - 1] < half {
                let t = (half - mags[j - 1]) / (mags[j] - mags[j - 1]);
                left = axis[j - 1] + t * (axis[j] - axis[j - 1]);
                left_clamped = false;
                break;
            }
        }
        let mut right = axis[n - 1];
        let mut right_clamped = true;
        for j in i..n - 1 {
            if mags[j + 1] < half {
                let t = (mags[j] - half) / (mags[j] - mags[j + 1]);
                right = axis[j] + t * (axis[j + 1] - axis[j]);
                right_clamped = false;
                break;
            }
        }
        let position = if left_clamped || right_clamped {
            axis[i]
        } else {
            (left + right) * lit::<R>(0.5)
        };
        peaks.push(Peak {
            position,
            fwhm: right - left,
            amplitude: mags[i],
        });
    }
    peaks.sort_by(|a, b| a.position.partial_cmp(&b.position).unwrap());
    peaks
}

/// FWHM of the transform of the Gaussian spectral envelope (amplitude
/// profile): (4 ln 2 / pi) * lambda0^2 / fwhm.
pub fn axial_resolution_theory<R: Real>(spectrum: &SignalSpectrum<R>) -> R {
    lit::<R>(4.0) * R::LN_2() / R::PI() * spectrum.center_wavelength * spectrum.center_wavelength
        / spectrum.fwhm
}

/// Spectral FWHM that yields a requested axial resolution; the relation is
/// its own inverse.
pub fn spectrum_fwhm_for_resolution<R: Real>(resolution: R, center_wavelength: R) -> R {
    lit::<R>(4.0) * R::LN_2() / R::PI() * center_wavelength * center_wavelength / resolution
}

/// Fold a signed depth onto the unaliased axis [0, nyquist].
pub fn fold_depth<R: Real>(depth: R, nyquist: R) -> R {
    let period = lit::<R>(2.0) * nyquist;
    let mut d = depth.abs() % period;
    if d > nyquist {
        d = period - d;
    }
    d
}

/// Internal quadrature-biased ideal setup used by the characterization
/// sweeps: with the fringe at quadrature the near-zero-delay fringe term
/// survives DC subtraction.
fn characterization_config<R: Real>(spectrum: &SignalSpectrum<R>) -> InterferometerConfig<R> {
    let half = spectrum.center_wavelength * lit::<R>(0.5);
    let mut cfg = InterferometerConfig::ideal(half, spectrum.center_wavelength)
        .expect("degenerate ideal config is valid");
    cfg.phase_offset = R::FRAC_PI_2();
    cfg
}

/// Reconstructed peak FWHM for a single mirror at each delay.
///
/// Near zero the folded image overlaps the peak and the measured width drops
/// below the plateau; the plateau itself sits at the theoretical resolution.
pub fn resolution_vs_delay<R: Real>(
    spectrum: &SignalSpectrum<R>,
    delays: &[R],
) -> Result<Vec<(R, R)>> {
    spectrum.validate()?;
    let nyquist = spectrum.nyquist_depth();
    let base = characterization_config(spectrum);
    delays
        .iter()
        .map(|&delay| {
            if delay.abs() > nyquist {
                return Err(Error::DepthOutOfRange {
                    depth: delay.to_f64().unwrap_or(f64::NAN),
                    max: nyquist.to_f64().unwrap_or(f64::NAN),
                });
            }
            let cfg = base.with_path_offset(delay);
            let fringe = synthesize_fd_fringe(
                &cfg,
                &[ReflectionPath::mirror_at(R::zero())],
                spectrum,
                CrossTerms::Exclude,
            )?;
            let diff = subtract_dc(&fringe, &envelope_reference(&cfg, spectrum)?)?;
            let profile = fd_reconstruct(&diff, spectrum, Window::None)?;
            let peaks = detect_peaks(&profile, lit(0.25));
            let target = fold_depth(delay, nyquist);
            let peak = peaks
                .iter()
                .min_by(|a, b| {
                    (a.position - target)
                        .abs()
                        .partial_cmp(&(b.position - target).abs())
                        .unwrap()
                })
                .ok_or(Error::UndefinedSnr)?;
            Ok((delay, peak.fwhm))
        })
        .collect()
}

/// Scene for SNR characterization: a single known reflector observed through
/// the full frequency-domain pipeline.
#[derive(Debug, Clone)]
pub struct SnrScene<R: Real> {
    pub cfg: InterferometerConfig<R>,
    pub paths: Vec<ReflectionPath<R>>,
    pub spectrum: SignalSpectrum<R>,
    /// Depth of the known peak, meters.
    pub target_depth: R,
    /// Rate-to-counts bridge, counts per second per rate unit.
    pub rate_scale: R,
}

/// Peak power over mean noise-floor power, averaged over `repeats`
/// independent shot-noise realizations, for each integration time.
///
/// With no detector the expected record is reconstructed directly; the noise
/// floor is then zero and the SNR is reported as the infinity sentinel.
pub fn snr_estimate<R: Real>(
    scene: &SnrScene<R>,
    det: Option<&DetectorModel<R>>,
    integration_times: &[R],
    repeats: usize,
) -> Result<Vec<(R, R)>> {
    if repeats < 10 {
        return Err(Error::Domain("at least 10 repeats required".into()));
    }
    let det = match det {
        Some(d) => d,
        None => {
            return Ok(integration_times
                .iter()
                .map(|&t| (t, R::infinity()))
                .collect())
        }
    };
    let fringe = synthesize_fd_fringe(
        &scene.cfg,
        &scene.paths,
        &scene.spectrum,
        CrossTerms::Exclude,
    )?;
    let reference = envelope_reference(&scene.cfg, &scene.spectrum)?;
    let resolution = axial_resolution_theory(&scene.spectrum);

    integration_times
        .iter()
        .enumerate()
        .map(|(ti, &t)| {
            let det_t = det.with_integration_time(t);
            let snrs: Vec<R> = (0..repeats)
                .into_par_iter()
                .map(|rep| -> Result<R> {
                    // Independent substream per (time point, repeat).
                    let seed = derive_seed(det.rng_seed, ((ti as u64) << 32) | rep as u64);
                    let mut noisy = fringe.clone();
                    let means: Vec<R> = noisy
                        .expected
                        .iter()
                        .map(|&r| expected_counts(r, &det_t, scene.rate_scale))
                        .collect::<Result<_>>()?;
                    noisy.sampled = Some(
                        means
                            .iter()
                            .enumerate()
                            .map(|(i, &m)| {
                                sample_count_at(m.to_f64().unwrap_or(0.0), seed, i as u64)
                            })
                            .collect(),
                    );
                    noisy.expected = means;
                    // Noiseless reference on the same count scale.
                    let mut ref_counts = reference.clone();
                    ref_counts.expected = ref_counts
                        .expected
                        .iter()
                        .map(|&r| expected_counts(r, &det_t, scene.rate_scale))
                        .collect::<Result<_>>()?;
                    let diff = subtract_dc(&noisy, &ref_counts)?;
                    let profile = fd_reconstruct(&diff, &scene.spectrum, Window::None)?;
                    snr_of_profile(&profile, scene.target_depth, resolution)
                })
                .collect::<Result<_>>()?;
            let mean_snr = snrs.iter().copied().sum::<R>() / lit::<R>(snrs.len() as f64);
            Ok((t, mean_snr))
        })
        .collect()
}

/// Power SNR of one reconstruction: max |X|^2 within the peak window over
/// the mean |X|^2 of bins well away from the peak and from zero depth.
fn snr_of_profile<R: Real>(profile: &DepthProfile<R>, target: R, resolution: R) -> Result<R> {
    let guard = resolution * lit::<R>(4.0);
    let peak_window = resolution;
    let mut peak_power = R::zero();
    let mut floor_power = R::zero();
    let mut floor_bins = 0usize;
    for (&d, &m) in profile.depth_axis.iter().zip(&profile.magnitude) {
        let p = m * m;
        if (d - target).abs() <= peak_window {
            peak_power = peak_power.max(p);
        } else if (d - target).abs() > guard && d > guard && d < profile.max_depth() - guard {
            floor_power += p;
            floor_bins += 1;
        }
    }
    if peak_power <= R::zero() {
        return Err(Error::UndefinedSnr);
    }
    if floor_bins == 0 || floor_power <= R::zero() {
        return Ok(R::infinity());
    }
    Ok(peak_power / (floor_power / lit::<R>(floor_bins as f64)))
}
