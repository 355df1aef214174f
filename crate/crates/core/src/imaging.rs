//! Transverse raster imaging through the frequency-domain pipeline.
//!
//! A focused Gaussian spot scans across a patterned reflectivity mask. The
//! fraction of the spot hitting a reflective region sets how much idler
//! amplitude returns; because the reflected light must also couple back into
//! the collection mode, the detected amplitude falls with the overlap twice
//! (illumination times collection). That two-pass weighting is what sharpens
//! the edge response by sqrt(2) relative to the spot size. A one-way
//! coupling mode is kept as a control.

use num_complex::Complex;
use rayon::prelude::*;

use crate::detector::{expected_counts, sample_count_at, DetectorModel};
use crate::error::{Error, Result};
use crate::interferometer::InterferometerConfig;
use crate::numeric::{derive_seed, lit, normal_cdf, Real};
use crate::sample::ReflectionPath;
use crate::spectra::{
    envelope_reference, rolloff_factor, subtract_dc, synthesize_fd_fringe, CrossTerms,
    SignalSpectrum,
};
use crate::tomography::{axial_resolution_theory, fd_reconstruct, fold_depth, Window};

/// Gaussian spot at the sample, by intensity half-maximum diameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamProfile<R: Real> {
    pub fwhm_x: R,
    pub fwhm_y: R,
}

impl<R: Real> BeamProfile<R> {
    pub fn new(fwhm_x: R, fwhm_y: R) -> Result<Self> {
        if !(fwhm_x > R::zero() && fwhm_y > R::zero()) {
            return Err(Error::Domain("beam FWHM values must be positive".into()));
        }
        Ok(Self { fwhm_x, fwhm_y })
    }

    pub fn round(fwhm: R) -> Result<Self> {
        Self::new(fwhm, fwhm)
    }
}

/// Binary-or-graded reflectivity features, in mask-local coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pattern<R: Real> {
    /// Constant multiplier everywhere.
    Uniform { value: R },
    /// Feature (multiplier 1) where x >= boundary, 0 elsewhere.
    EdgeX { boundary: R },
    /// Feature bars of the given width repeating along x with the given
    /// period, first bar starting at x = start.
    BarsX { start: R, period: R, bar_width: R },
}

/// Reflectivity map: position -> per-path amplitude multiplier in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatternMask<R: Real> {
    pub pattern: Pattern<R>,
    /// Mask origin in world coordinates; features are defined relative to it.
    pub origin: (R, R),
    /// Nominal extent (informational, e.g. for plotting).
    pub extent: (R, R),
}

impl<R: Real> PatternMask<R> {
    pub fn validate(&self) -> Result<()> {
        match self.pattern {
            Pattern::Uniform { value } => {
                if !(value >= R::zero() && value <= R::one()) {
                    return Err(Error::Domain("mask multiplier outside [0, 1]".into()));
                }
            }
            Pattern::BarsX {
                period, bar_width, ..
            } => {
                if !(period > R::zero() && bar_width > R::zero() && bar_width <= period) {
                    return Err(Error::Domain(
                        "bar pattern requires 0 < width <= period".into(),
                    ));
                }
            }
            Pattern::EdgeX { .. } => {}
        }
        Ok(())
    }

    /// Multiplier at mask-local coordinates.
    pub fn multiplier_local(&self, x: R, _y: R) -> R {
        match self.pattern {
            Pattern::Uniform { value } => value,
            Pattern::EdgeX { boundary } => {
                if x >= boundary {
                    R::one()
                } else {
                    R::zero()
                }
            }
            Pattern::BarsX {
                start,
                period,
                bar_width,
            } => {
                let mut u = (x - start) % period;
                if u < R::zero() {
                    u += period;
                }
                if u < bar_width {
                    R::one()
                } else {
                    R::zero()
                }
            }
        }
    }
}

/// How the beam couples to the mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coupling {
    /// Single mask pass weighted by the spot intensity (control case).
    OneWay,
    /// Illumination and collection passes: mask squared, intensity squared.
    TwoWay,
}

// Quadrature resolution: 16 nodes per FWHM over +/- 2.5 FWHM. Nodes sit on
// a lattice fixed in mask coordinates so the overlap varies smoothly as the
// beam scans (nodes tied to the beam would quantize edge responses into a
// staircase of one lattice step).
const NODES_PER_FWHM: usize = 16;
const SUPPORT_FWHM: f64 = 2.5;

fn axis_nodes<R: Real>(fwhm: R, center: R) -> Vec<(R, R)> {
    let n = (NODES_PER_FWHM as f64 * 2.0 * SUPPORT_FWHM) as usize;
    let step = fwhm / lit::<R>(NODES_PER_FWHM as f64);
    let start = ((center - lit::<R>(SUPPORT_FWHM) * fwhm) / step).floor();
    (0..n)
        .map(|i| {
            let x = (start + lit::<R>(i as f64) + lit(0.5)) * step;
            let u = (x - center) / fwhm;
            let w = (-lit::<R>(4.0) * R::LN_2() * u * u).exp();
            (x, w)
        })
        .collect()
}

fn weighted_overlap<R: Real>(
    beam: &BeamProfile<R>,
    mask: &PatternMask<R>,
    center_local: (R, R),
    coupling: Coupling,
) -> R {
    let xs = axis_nodes(beam.fwhm_x, center_local.0);
    let ys = axis_nodes(beam.fwhm_y, center_local.1);
    let mut num = R::zero();
    let mut den = R::zero();
    for &(y, wy) in &ys {
        for &(x, wx) in &xs {
            let mut w = wx * wy;
            let mut m = mask.multiplier_local(x, y);
            if coupling == Coupling::TwoWay {
                w = w * w;
                m = m * m;
            }
            num += w * m;
            den += w;
        }
    }
    num / den
}

/// Fraction of the incident intensity profile reflected by the mask:
/// f = Int I(r - center) m(r) dA / Int I dA.
pub fn overlap_fraction<R: Real>(
    beam: &BeamProfile<R>,
    mask: &PatternMask<R>,
    center: (R, R),
) -> Result<R> {
    mask.validate()?;
    let local = (center.0 - mask.origin.0, center.1 - mask.origin.1);
    Ok(weighted_overlap(beam, mask, local, Coupling::OneWay))
}

/// Raster geometry: pixel (i, j) sits at origin + ((i + 1/2) step, (j + 1/2) step).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanGrid<R: Real> {
    pub origin: (R, R),
    pub width: usize,
    pub height: usize,
    pub step: R,
}

impl<R: Real> ScanGrid<R> {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > R::zero()) || self.width == 0 || self.height == 0 {
            return Err(Error::Domain(
                "scan grid needs positive step and size".into(),
            ));
        }
        Ok(())
    }
}

/// Row-major image of detected peak amplitudes at a selected depth.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanImage<R: Real> {
    pub pixels: Vec<R>,
    pub width: usize,
    pub height: usize,
    pub step: R,
    pub origin: (R, R),
}

impl<R: Real> ScanImage<R> {
    pub fn get(&self, i: usize, j: usize) -> R {
        self.pixels[j * self.width + i]
    }

    /// One row as (x position, amplitude) pairs, e.g. for edge analysis.
    pub fn row_profile(&self, j: usize) -> Vec<(R, R)> {
        (0..self.width)
            .map(|i| {
                let x = self.origin.0 + (lit::<R>(i as f64) + lit(0.5)) * self.step;
                (x, self.get(i, j))
            })
            .collect()
    }
}

/// Everything a transverse scan needs besides the raster geometry.
#[derive(Debug, Clone)]
pub struct ImagingScene<R: Real> {
    pub cfg: InterferometerConfig<R>,
    pub spectrum: SignalSpectrum<R>,
    /// Reflection paths where the mask multiplier applies (feature region).
    pub feature_paths: Vec<ReflectionPath<R>>,
    /// Reflection paths of the complementary region.
    pub background_paths: Vec<ReflectionPath<R>>,
    pub mask: PatternMask<R>,
    pub beam: BeamProfile<R>,
    pub coupling: Coupling,
    /// Depth at which the image amplitude is extracted, meters.
    pub depth_select: R,
}

impl<R: Real> ImagingScene<R> {
    fn validate(&self) -> Result<()> {
        self.cfg.validate()?;
        self.spectrum.validate()?;
        self.mask.validate()?;
        let nyquist = self.spectrum.nyquist_depth();
        if !(self.depth_select >= R::zero() && self.depth_select <= nyquist) {
            return Err(Error::DepthOutOfRange {
                depth: self.depth_select.to_f64().unwrap_or(f64::NAN),
                max: nyquist.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(())
    }

    fn pixel_weights(&self, grid: &ScanGrid<R>, i: usize, j: usize) -> (R, R) {
        // World-frame difference taken once so that shifting mask and scan
        // origin together cancels before any further arithmetic.
        let rel = (
            grid.origin.0 - self.mask.origin.0,
            grid.origin.1 - self.mask.origin.1,
        );
        let local = (
            rel.0 + (lit::<R>(i as f64) + lit(0.5)) * grid.step,
            rel.1 + (lit::<R>(j as f64) + lit(0.5)) * grid.step,
        );
        let w_feature = weighted_overlap(&self.beam, &self.mask, local, self.coupling);
        // The complement of a binary mask is 1 - m pointwise; for the
        // weighted overlaps used here that is 1 - w in both coupling modes.
        let w_background = R::one() - w_feature;
        (w_feature, w_background)
    }
}

/// Analytic fast path: the pixel value is the coupled overlap times the
/// summed path amplitude near the selected depth, per region.
pub fn scan_image_fast<R: Real>(
    scene: &ImagingScene<R>,
    grid: &ScanGrid<R>,
) -> Result<ScanImage<R>> {
    scene.validate()?;
    grid.validate()?;
    let amp_feature = region_amplitude(scene, &scene.feature_paths)?;
    let amp_background = region_amplitude(scene, &scene.background_paths)?;

    let pixels: Vec<R> = (0..grid.width * grid.height)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx % grid.width, idx / grid.width);
            let (wf, wb) = scene.pixel_weights(grid, i, j);
            wf * amp_feature + wb * amp_background
        })
        .collect();
    Ok(ScanImage {
        pixels,
        width: grid.width,
        height: grid.height,
        step: grid.step,
        origin: grid.origin,
    })
}

fn region_amplitude<R: Real>(scene: &ImagingScene<R>, paths: &[ReflectionPath<R>]) -> Result<R> {
    let offset = scene.cfg.path_offset();
    let nyquist = scene.spectrum.nyquist_depth();
    let window = axial_resolution_theory(&scene.spectrum);
    let mut amp = R::zero();
    for p in paths {
        let m = p.optical_roundtrip + offset;
        if (fold_depth(m, nyquist) - scene.depth_select).abs() <= window {
            amp += p.amplitude.norm() * rolloff_factor(m.abs(), &scene.spectrum)?;
        }
    }
    Ok(amp)
}

/// Full pipeline: per pixel, scale each region's paths by its coupled
/// overlap, synthesize the spectral fringe, optionally Poisson-sample it,
/// DC-subtract and reconstruct, then read the peak amplitude at the selected
/// depth. Pixels are independent and sampled with index-keyed seeds.
pub fn scan_image_full<R: Real>(
    scene: &ImagingScene<R>,
    grid: &ScanGrid<R>,
    detector: Option<(&DetectorModel<R>, R)>,
) -> Result<ScanImage<R>> {
    scene.validate()?;
    grid.validate()?;
    let reference = envelope_reference(&scene.cfg, &scene.spectrum)?;
    let bin = scene.spectrum.depth_bin();

    let pixels: Vec<R> = (0..grid.width * grid.height)
        .into_par_iter()
        .map(|idx| -> Result<R> {
            let (i, j) = (idx % grid.width, idx / grid.width);
            let (wf, wb) = scene.pixel_weights(grid, i, j);
            let mut paths: Vec<ReflectionPath<R>> = Vec::new();
            for (weight, set) in [(wf, &scene.feature_paths), (wb, &scene.background_paths)] {
                for p in set.iter() {
                    paths.push(ReflectionPath {
                        amplitude: p.amplitude * Complex::new(weight, R::zero()),
                        ..*p
                    });
                }
            }
            if paths.is_empty() {
                return Ok(R::zero());
            }
            let mut fringe =
                synthesize_fd_fringe(&scene.cfg, &paths, &scene.spectrum, CrossTerms::Exclude)?;
            let mut reference = reference.clone();
            if let Some((det, rate_scale)) = detector {
                let means: Vec<R> = fringe
                    .expected
                    .iter()
                    .map(|&r| expected_counts(r, det, rate_scale))
                    .collect::<Result<_>>()?;
                fringe.sampled = Some(
                    means
                        .iter()
                        .enumerate()
                        .map(|(k, &m)| {
                            sample_count_at(
                                m.to_f64().unwrap_or(0.0),
                                derive_seed(det.rng_seed, idx as u64),
                                k as u64,
                            )
                        })
                        .collect(),
                );
                fringe.expected = means;
                reference.expected = reference
                    .expected
                    .iter()
                    .map(|&r| expected_counts(r, det, rate_scale))
                    .collect::<Result<_>>()?;
            }
            let diff = subtract_dc(&fringe, &reference)?;
            let profile = fd_reconstruct(&diff, &scene.spectrum, Window::None)?;
            let window = bin * lit::<R>(2.0);
            let peak = profile
                .depth_axis
                .iter()
                .zip(&profile.magnitude)
                .filter(|(&d, _)| (d - scene.depth_select).abs() <= window)
                .map(|(_, &m)| m)
                .fold(R::zero(), |a, b| a.max(b));
            Ok(peak)
        })
        .collect::<Result<_>>()?;
    Ok(ScanImage {
        pixels,
        width: grid.width,
        height: grid.height,
        step: grid.step,
        origin: grid.origin,
    })
}

/// Fit an edge response to an error-function shape, differentiate to the
/// line spread function, and report the LSF full width at half maximum.
pub fn edge_response_fwhm<R: Real>(line: &[(R, R)]) -> Result<R> {
    if line.len() < 8 {
        return Err(Error::NoEdgeTransition);
    }
    let ys: Vec<R> = line.iter().map(|p| p.1).collect();
    let y_min = ys.iter().fold(R::infinity(), |a, &b| a.min(b));
    let y_max = ys.iter().fold(R::neg_infinity(), |a, &b| a.max(b));
    let swing = y_max - y_min;
    let scale = y_max.abs().max(y_min.abs()).max(lit(1e-300));
    if !(swing > scale * lit(1e-6)) {
        return Err(Error::NoEdgeTransition);
    }

    // Initial center: half-swing crossing. Initial width: quartile spacing.
    let crossing = |level: R| -> Option<R> {
        for w in line.windows(2) {
            let (a, b) = (w[0], w[1]);
            if (a.1 - level) * (b.1 - level) <= R::zero() && a.1 != b.1 {
                let t = (level - a.1) / (b.1 - a.1);
                return Some(a.0 + t * (b.0 - a.0));
            }
        }
        None
    };
    let half = y_min + swing * lit(0.5);
    let q1 = y_min + swing * lit(0.25);
    let q3 = y_min + swing * lit(0.75);
    let x0_init = crossing(half).ok_or(Error::NoEdgeTransition)?;
    let span = line.last().unwrap().0 - line[0].0;
    let s_init = match (crossing(q1), crossing(q3)) {
        (Some(a), Some(b)) if (b - a).abs() > R::zero() => (b - a).abs() / lit(1.349),
        _ => span / lit(8.0),
    };

    // Least squares in (offset, amplitude) given (x0, s); refine (x0, s) by
    // alternating golden-section searches.
    let sse = |x0: R, s: R| -> R {
        let n = lit::<R>(line.len() as f64);
        let mut sg = R::zero();
        let mut sgg = R::zero();
        let mut sy = R::zero();
        let mut sgy = R::zero();
        for &(x, y) in line {
            let g = normal_cdf((x - x0) / s);
            sg += g;
            sgg += g * g;
            sy += y;
            sgy += g * y;
        }
        let det = n * sgg - sg * sg;
        if det.abs() <= R::zero() {
            return R::infinity();
        }
        let a = (n * sgy - sg * sy) / det;
        let y0 = (sy - a * sg) / n;
        let mut err = R::zero();
        for &(x, y) in line {
            let r = y - y0 - a * normal_cdf((x - x0) / s);
            err += r * r;
        }
        err
    };
    let golden = |f: &dyn Fn(R) -> R, mut lo: R, mut hi: R| -> R {
        let phi = lit::<R>(0.618_033_988_749_894_8);
        let mut x1 = hi - phi * (hi - lo);
        let mut x2 = lo + phi * (hi - lo);
        let mut f1 = f(x1);
        let mut f2 = f(x2);
        for _ in 0..48 {
            if f1 < f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - phi * (hi - lo);
                f1 = f(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + phi * (hi - lo);
                f2 = f(x2);
            }
        }
        (lo + hi) * lit(0.5)
    };

    let mut x0 = x0_init;
    let mut s = s_init.max(span * lit(1e-4));
    for _ in 0..3 {
        let s_fixed = s;
        x0 = golden(&|x| sse(x, s_fixed), x0 - s * lit(2.0), x0 + s * lit(2.0));
        let x0_fixed = x0;
        s = golden(&|w| sse(x0_fixed, w), s * lit(0.25), s * lit(4.0));
    }
    // Gaussian LSF: FWHM = 2 sqrt(2 ln 2) s.
    Ok(lit::<R>(2.0) * (lit::<R>(2.0) * R::LN_2()).sqrt() * s.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::ReflectionPath;

    const PUMP: f64 = 532e-9;
    const SIGNAL: f64 = 810e-9;

    fn beam17() -> BeamProfile<f64> {
        BeamProfile::round(17e-6).unwrap()
    }

    fn edge_mask(boundary: f64) -> PatternMask<f64> {
        PatternMask {
            pattern: Pattern::EdgeX { boundary },
            origin: (0.0, 0.0),
            extent: (200e-6, 200e-6),
        }
    }

    fn scene(
        coupling: Coupling,
        mask: PatternMask<f64>,
        beam: BeamProfile<f64>,
    ) -> ImagingScene<f64> {
        let cfg = InterferometerConfig::ideal(PUMP, SIGNAL)
            .unwrap()
            .with_path_offset(1.0e-3);
        let spectrum = SignalSpectrum::new(
            SIGNAL,
            crate::tomography::spectrum_fwhm_for_resolution(0.198e-3, SIGNAL),
            0.07e-9,
            35.84e-9,
        )
        .unwrap();
        ImagingScene {
            cfg,
            spectrum,
            feature_paths: vec![ReflectionPath::mirror_at(0.0)],
            background_paths: vec![],
            mask,
            beam,
            coupling,
            depth_select: 1.0e-3,
        }
    }

    #[test]
    fn uniform_mask_gives_unit_overlap() {
        let mask = PatternMask {
            pattern: Pattern::Uniform { value: 1.0 },
            origin: (0.0, 0.0),
            extent: (1e-3, 1e-3),
        };
        let f = overlap_fraction(&beam17(), &mask, (0.3e-3, -0.1e-3)).unwrap();
        assert!((f - 1.0).abs() < 1e-12);
    }

    #[test]
    fn centered_edge_gives_exactly_half() {
        let f = overlap_fraction(&beam17(), &edge_mask(0.0), (0.0, 0.0)).unwrap();
        assert!((f - 0.5).abs() < 1e-12, "f = {f}");
    }

    #[test]
    fn edge_one_fwhm_away_matches_erf_oracle() {
        // Beam centered one FWHM into the dark side of the edge: the analytic
        // value is Phi(-2 sqrt(2 ln 2)) = 0.00927.
        let f = overlap_fraction(&beam17(), &edge_mask(0.0), (-17e-6, 5e-6)).unwrap();
        let analytic = normal_cdf(-2.0 * (2.0 * f64::ln(2.0)).sqrt());
        assert!((analytic - 0.00927).abs() < 2e-5, "analytic = {analytic}");
        assert!(
            (f - analytic).abs() < 2e-4,
            "quadrature {f} vs erf {analytic}"
        );
    }

    #[test]
    fn overlap_is_monotone_in_coverage() {
        let mut last = 1.1;
        for i in 0..12 {
            let boundary = -40e-6 + i as f64 * 8e-6;
            let f = overlap_fraction(&beam17(), &edge_mask(boundary), (0.0, 0.0)).unwrap();
            assert!(f <= last + 1e-12);
            assert!((0.0..=1.0).contains(&f));
            last = f;
        }
    }

    #[test]
    fn uniform_coverage_scales_as_f_squared_in_two_way_mode() {
        let image_of = |value: f64| {
            let mask = PatternMask {
                pattern: Pattern::Uniform { value },
                origin: (0.0, 0.0),
                extent: (1e-3, 1e-3),
            };
            let sc = scene(Coupling::TwoWay, mask, beam17());
            let grid = ScanGrid {
                origin: (0.0, 0.0),
                width: 2,
                height: 1,
                step: 5e-6,
            };
            scan_image_fast(&sc, &grid).unwrap().get(0, 0)
        };
        let base = image_of(1.0);
        for value in [0.3, 0.6] {
            let f = value;
            assert!((image_of(value) / base - f * f).abs() < 1e-9);
        }
    }

    #[test]
    fn all_reflective_mask_gives_constant_image() {
        let mask = PatternMask {
            pattern: Pattern::Uniform { value: 1.0 },
            origin: (0.0, 0.0),
            extent: (1e-3, 1e-3),
        };
        let sc = scene(Coupling::TwoWay, mask, beam17());
        let grid = ScanGrid {
            origin: (-32e-6, 0.0),
            width: 16,
            height: 4,
            step: 4e-6,
        };
        let img = scan_image_full(&sc, &grid, None).unwrap();
        let first = img.get(0, 0);
        assert!(first > 0.0);
        for j in 0..4 {
            for i in 0..16 {
                assert!((img.get(i, j) - first).abs() < 1e-9 * first);
            }
        }
    }

    #[test]
    fn fast_and_full_paths_agree_on_an_edge() {
        let sc = scene(Coupling::TwoWay, edge_mask(0.0), beam17());
        let grid = ScanGrid {
            origin: (-48e-6, -2e-6),
            width: 32,
            height: 1,
            step: 3e-6,
        };
        let fast = scan_image_fast(&sc, &grid).unwrap();
        let full = scan_image_full(&sc, &grid, None).unwrap();
        // The full pipeline carries an overall reconstruction scale; compare
        // shapes after normalizing to the bright side.
        let nf = fast.pixels.iter().cloned().fold(0.0, f64::max);
        let nu = full.pixels.iter().cloned().fold(0.0, f64::max);
        for (a, b) in fast.pixels.iter().zip(&full.pixels) {
            assert!((a / nf - b / nu).abs() < 5e-3);
        }
    }

    #[test]
    fn two_way_edge_lsf_is_beam_over_sqrt2() {
        let sc = scene(Coupling::TwoWay, edge_mask(0.0), beam17());
        let grid = ScanGrid {
            origin: (-64e-6, -1e-6),
            width: 64,
            height: 1,
            step: 2e-6,
        };
        let img = scan_image_full(&sc, &grid, None).unwrap();
        let lsf = edge_response_fwhm(&img.row_profile(0)).unwrap();
        let expect = 17e-6 / 2f64.sqrt();
        assert!(
            (lsf - expect).abs() / expect < 0.03,
            "lsf {lsf} vs {expect}"
        );
        let ratio = lsf / 17e-6;
        assert!((0.68..=0.74).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn one_way_control_recovers_the_beam_width() {
        let sc = scene(Coupling::OneWay, edge_mask(0.0), beam17());
        let grid = ScanGrid {
            origin: (-64e-6, -1e-6),
            width: 64,
            height: 1,
            step: 2e-6,
        };
        let img = scan_image_full(&sc, &grid, None).unwrap();
        let lsf = edge_response_fwhm(&img.row_profile(0)).unwrap();
        assert!((lsf - 17e-6).abs() / 17e-6 < 0.03, "lsf {lsf}");
    }

    #[test]
    fn y_beam_prediction_for_asymmetric_spot() {
        // 20 um spot: expected two-way LSF 14.1 um.
        let sc = scene(
            Coupling::TwoWay,
            edge_mask(0.0),
            BeamProfile::round(20e-6).unwrap(),
        );
        let grid = ScanGrid {
            origin: (-76e-6, -1e-6),
            width: 64,
            height: 1,
            step: 2.4e-6,
        };
        let img = scan_image_full(&sc, &grid, None).unwrap();
        let lsf = edge_response_fwhm(&img.row_profile(0)).unwrap();
        assert!((lsf - 14.14e-6).abs() / 14.14e-6 < 0.03, "lsf {lsf}");
    }

    #[test]
    fn three_bar_pattern_resolved_with_strong_modulation() {
        // Bar pitch 3x the two-way resolution (12 um) with 50% duty.
        let pitch = 36e-6;
        let mask = PatternMask {
            pattern: Pattern::BarsX {
                start: 0.0,
                period: pitch,
                bar_width: pitch / 2.0,
            },
            origin: (0.0, 0.0),
            extent: (3.0 * pitch, 50e-6),
        };
        let sc = scene(Coupling::TwoWay, mask, beam17());
        let grid = ScanGrid {
            origin: (0.0, 0.0),
            width: 72,
            height: 1,
            step: 1.5e-6,
        };
        let img = scan_image_full(&sc, &grid, None).unwrap();
        let profile = img.row_profile(0);
        let max = profile.iter().map(|p| p.1).fold(f64::MIN, f64::max);
        let interior: Vec<f64> = profile
            .iter()
            .filter(|(x, _)| (*x > 9e-6) && (*x < 99e-6))
            .map(|p| p.1)
            .collect();
        let min = interior.iter().cloned().fold(f64::MAX, f64::min);
        let modulation = (max - min) / (max + min);
        assert!(modulation > 0.5, "modulation {modulation}");
    }

    #[test]
    fn image_is_translation_equivariant_bit_for_bit() {
        // Power-of-two origin and shift keep every addition exact, so the
        // world-frame cancellation happens bit-for-bit.
        let shift = 2f64.powi(-13);
        let sc0 = scene(Coupling::TwoWay, edge_mask(0.0), beam17());
        let mut sc1 = sc0.clone();
        sc1.mask.origin = (shift, shift);
        let grid0 = ScanGrid {
            origin: (-2f64.powi(-15), 0.0),
            width: 24,
            height: 2,
            step: 3e-6,
        };
        let grid1 = ScanGrid {
            origin: (grid0.origin.0 + shift, grid0.origin.1 + shift),
            ..grid0
        };
        let img0 = scan_image_full(&sc0, &grid0, None).unwrap();
        let img1 = scan_image_full(&sc1, &grid1, None).unwrap();
        assert_eq!(img0.pixels, img1.pixels);
    }

    #[test]
    fn depth_select_outside_range_is_an_error() {
        let mut sc = scene(Coupling::TwoWay, edge_mask(0.0), beam17());
        sc.depth_select = 6.0e-3;
        let grid = ScanGrid {
            origin: (0.0, 0.0),
            width: 2,
            height: 2,
            step: 1e-6,
        };
        assert!(matches!(
            scan_image_full(&sc, &grid, None),
            Err(Error::DepthOutOfRange { .. })
        ));
    }

    #[test]
    fn noisy_scan_tracks_the_noiseless_image_and_is_reproducible() {
        use crate::detector::DetectorModel;
        let sc = scene(Coupling::TwoWay, edge_mask(0.0), beam17());
        let grid = ScanGrid {
            origin: (-24e-6, -2e-6),
            width: 16,
            height: 1,
            step: 3e-6,
        };
        let clean = scan_image_full(&sc, &grid, None).unwrap();
        let det = DetectorModel::new(1.0, 0.0, 1.0, 31).unwrap();
        let noisy = scan_image_full(&sc, &grid, Some((&det, 1.0e6))).unwrap();
        let again = scan_image_full(&sc, &grid, Some((&det, 1.0e6))).unwrap();
        assert_eq!(noisy.pixels, again.pixels);
        // Counting noise scales the image by the rate bridge; compare after
        // normalizing to the bright plateau.
        let norm = |img: &ScanImage<f64>| {
            let max = img.pixels.iter().cloned().fold(0.0, f64::max);
            img.pixels.iter().map(|&p| p / max).collect::<Vec<_>>()
        };
        for (a, b) in norm(&clean).iter().zip(norm(&noisy)) {
            assert!((a - b).abs() < 0.05, "{a} vs {b}");
        }
    }

    #[test]
    fn flat_line_has_no_edge() {
        let line: Vec<(f64, f64)> = (0..32).map(|i| (i as f64, 1.0)).collect();
        assert!(matches!(
            edge_response_fwhm(&line),
            Err(Error::NoEdgeTransition)
        ));
    }

    #[test]
    fn exact_erf_line_recovers_its_width() {
        let s = 7.2e-6;
        let line: Vec<(f64, f64)> = (0..80)
            .map(|i| {
                let x = (i as f64 - 40.0) * 1.5e-6;
                (x, 3.0 + 2.0 * normal_cdf(x / s))
            })
            .collect();
        let fwhm = edge_response_fwhm(&line).unwrap();
        let expect = 2.0 * (2.0 * f64::ln(2.0)).sqrt() * s;
        assert!(
            (fwhm - expect).abs() / expect < 1e-3,
            "fwhm {fwhm} vs {expect}"
        );
    }
}
