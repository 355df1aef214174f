//! Scenario execution: one function per experiment kind, each writing its
//! artifact files and contributing headline metrics to `summary.json`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use icot_core::detector::sample_fringe;
use icot_core::imaging::{
    edge_response_fwhm, scan_image_full, BeamProfile, Coupling, ImagingScene, Pattern, PatternMask,
    ScanGrid,
};
use icot_core::interferometer::{fringe_visibility, mean_signal_rate, sweep_arm_loss, Arm};
use icot_core::io::{
    write_depth_csv, write_fringe_csv, write_image_csv, write_image_pgm, write_pairs_csv,
    write_peaks_csv,
};
use icot_core::numeric::{derive_seed, linear_fit};
use icot_core::sample::enumerate_paths;
use icot_core::spectra::{envelope_reference, subtract_dc, synthesize_fd_fringe};
use icot_core::tomography::{
    axial_resolution_theory, detect_peaks, fd_reconstruct, fine_phase_scan, resolution_vs_delay,
    snr_estimate, td_scan, SnrScene,
};

use crate::spec::{ArmSpec, CouplingSpec, Kind, PatternSpec, Scenario};

/// Anything that can go wrong while executing a validated scenario.
#[derive(Debug)]
pub enum RunError {
    Core(icot_core::Error),
    Io(std::io::Error),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Core(e) => write!(f, "{e}"),
            RunError::Io(e) => write!(f, "i/o: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<icot_core::Error> for RunError {
    fn from(e: icot_core::Error) -> Self {
        RunError::Core(e)
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

pub struct RunOutput {
    pub out_dir: PathBuf,
    pub files: Vec<String>,
}

struct Artifacts {
    out_dir: PathBuf,
    files: Vec<String>,
}

impl Artifacts {
    fn write(
        &mut self,
        name: &str,
        write: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
    ) -> Result<(), RunError> {
        let mut buf = Vec::new();
        write(&mut buf)?;
        fs::write(self.out_dir.join(name), buf)?;
        self.files.push(name.to_string());
        Ok(())
    }
}

/// Execute a parsed-and-validated scenario; `seed_override` replaces the
/// detector seed when given.
pub fn run_scenario(
    scenario: &Scenario,
    out_dir: &Path,
    seed_override: Option<u64>,
) -> Result<RunOutput, RunError> {
    fs::create_dir_all(out_dir)?;
    let mut artifacts = Artifacts {
        out_dir: out_dir.to_path_buf(),
        files: Vec::new(),
    };
    let mut summary: BTreeMap<String, Value> = BTreeMap::new();
    summary.insert("scenario".into(), json!(scenario.name));
    summary.insert("kind".into(), json!(scenario.kind.label()));

    let cfg = scenario
        .build_config()
        .expect("scenario validated before running");
    let gamma = fringe_visibility(&cfg)?;
    summary.insert("visibility".into(), json!(gamma));
    summary.insert("mean_rate".into(), json!(mean_signal_rate(&cfg)));

    let detector = match &scenario.detector {
        Some(d) if d.enabled => {
            let mut det = d.build()?;
            if let Some(seed) = seed_override {
                det = det.with_seed(seed);
            }
            summary.insert("seed".into(), json!(det.rng_seed));
            Some((det, d.rate_scale_hz))
        }
        _ => None,
    };

    match scenario.kind {
        Kind::TdScan => {
            let spectrum = scenario
                .spectrum
                .as_ref()
                .unwrap()
                .build(cfg.signal_wavelength)?;
            let stack = scenario.sample.as_ref().unwrap().build();
            let paths = enumerate_paths(&stack, scenario.sample.as_ref().unwrap().max_order)?;
            let grid = scenario.td.as_ref().unwrap().points();
            let mut rec = td_scan(&cfg, &paths, &spectrum, &grid)?;
            if let Some((det, scale)) = &detector {
                sample_fringe(&mut rec, det, *scale)?;
            }
            artifacts.write("fringe_td.csv", |b| write_fringe_csv(&rec, b))?;
            summary.insert("path_count".into(), json!(paths.len()));
        }
        Kind::FdScan | Kind::Reconstruct => {
            let spectrum = scenario
                .spectrum
                .as_ref()
                .unwrap()
                .build(cfg.signal_wavelength)?;
            let sample_spec = scenario.sample.as_ref().unwrap();
            let stack = sample_spec.build();
            let paths = enumerate_paths(&stack, sample_spec.max_order)?;
            let mut fringe =
                synthesize_fd_fringe(&cfg, &paths, &spectrum, sample_spec.cross_mode())?;
            let mut reference = envelope_reference(&cfg, &spectrum)?;
            if let Some((det, scale)) = &detector {
                sample_fringe(&mut fringe, det, *scale)?;
                // Independent shot noise on the blocked-idler reference.
                let ref_det = det.with_seed(derive_seed(det.rng_seed, u64::MAX));
                sample_fringe(&mut reference, &ref_det, *scale)?;
            }
            artifacts.write("fringe_fd.csv", |b| write_fringe_csv(&fringe, b))?;
            artifacts.write("reference.csv", |b| write_fringe_csv(&reference, b))?;
            summary.insert("path_count".into(), json!(paths.len()));
            summary.insert("nyquist_depth_m".into(), json!(spectrum.nyquist_depth()));
            summary.insert(
                "axial_resolution_theory_m".into(),
                json!(axial_resolution_theory(&spectrum)),
            );

            if scenario.kind == Kind::Reconstruct {
                let recon = scenario.reconstruction.as_ref().copied().unwrap_or(
                    crate::spec::ReconstructionSpec {
                        window: crate::spec::WindowSpec::None,
                        min_prominence: 0.05,
                    },
                );
                let diff = subtract_dc(&fringe, &reference)?;
                let profile = fd_reconstruct(&diff, &spectrum, recon.window.to_window())?;
                let peaks = detect_peaks(&profile, recon.min_prominence);
                artifacts.write("depth_profile.csv", |b| write_depth_csv(&profile, b))?;
                artifacts.write("peaks.csv", |b| write_peaks_csv(&peaks, b))?;
                summary.insert("peak_count".into(), json!(peaks.len()));
                for (i, p) in peaks.iter().enumerate() {
                    summary.insert(format!("peak_{i:02}_position_m"), json!(p.position));
                    summary.insert(format!("peak_{i:02}_fwhm_m"), json!(p.fwhm));
                    summary.insert(format!("peak_{i:02}_amplitude"), json!(p.amplitude));
                }
            }
        }
        Kind::PhaseScan => {
            let grid = scenario.phase.as_ref().unwrap().points();
            let mut rec = fine_phase_scan(&cfg, &grid)?;
            if let Some((det, scale)) = &detector {
                sample_fringe(&mut rec, det, *scale)?;
            }
            artifacts.write("fringe_phase.csv", |b| write_fringe_csv(&rec, b))?;
            let max = rec.expected.iter().cloned().fold(f64::MIN, f64::max);
            let min = rec.expected.iter().cloned().fold(f64::MAX, f64::min);
            summary.insert("measured_contrast".into(), json!((max - min) / (max + min)));
        }
        Kind::VisibilitySweep => {
            let sweep = scenario.sweep.as_ref().unwrap();
            let arm = match sweep.arm {
                ArmSpec::Signal => Arm::Signal,
                ArmSpec::Idler => Arm::Idler,
            };
            let grid: Vec<f64> = (0..sweep.steps)
                .map(|i| {
                    sweep.start + (sweep.stop - sweep.start) * i as f64 / (sweep.steps - 1) as f64
                })
                .collect();
            let points = sweep_arm_loss(&cfg, arm, &grid, sweep.double_pass)?;
            artifacts.write("visibility.csv", |b| {
                write_pairs_csv("transmission,visibility", &points, b)
            })?;
            let (slope, intercept, r2) = linear_fit(&points);
            summary.insert("fit_slope".into(), json!(slope));
            summary.insert("fit_intercept".into(), json!(intercept));
            summary.insert("fit_r_squared".into(), json!(r2));
            if let Some(last) = points.last() {
                summary.insert("visibility_at_stop".into(), json!(last.1));
            }
        }
        Kind::ResolutionCurve => {
            let spectrum = scenario
                .spectrum
                .as_ref()
                .unwrap()
                .build(cfg.signal_wavelength)?;
            let delays = &scenario.resolution.as_ref().unwrap().delays_m;
            let points = resolution_vs_delay(&spectrum, delays)?;
            artifacts.write("resolution.csv", |b| {
                write_pairs_csv("delay_m,fwhm_m", &points, b)
            })?;
            summary.insert(
                "axial_resolution_theory_m".into(),
                json!(axial_resolution_theory(&spectrum)),
            );
            let zero = points
                .iter()
                .find(|(d, _)| d.abs() < 1e-12)
                .map(|&(_, w)| w);
            if let Some(w) = zero {
                summary.insert("zero_delay_fwhm_m".into(), json!(w));
            }
            let interior: Vec<f64> = points
                .iter()
                .filter(|(d, _)| d.abs() > 1e-12)
                .map(|&(_, w)| w)
                .collect();
            if !interior.is_empty() {
                summary.insert(
                    "plateau_fwhm_m".into(),
                    json!(interior.iter().sum::<f64>() / interior.len() as f64),
                );
            }
        }
        Kind::SnrCurve => {
            let spectrum = scenario
                .spectrum
                .as_ref()
                .unwrap()
                .build(cfg.signal_wavelength)?;
            let sample_spec = scenario.sample.as_ref().unwrap();
            let stack = sample_spec.build();
            let paths = enumerate_paths(&stack, sample_spec.max_order)?;
            let snr = scenario.snr.as_ref().unwrap();
            let (det, scale) = detector.as_ref().expect("detector required by validation");
            let scene = SnrScene {
                cfg,
                paths,
                spectrum,
                target_depth: snr.target_depth_m,
                rate_scale: *scale,
            };
            let points = snr_estimate(&scene, Some(det), &snr.times_s, snr.repeats)?;
            artifacts.write("snr.csv", |b| {
                write_pairs_csv("integration_time_s,snr", &points, b)
            })?;
            let log_pts: Vec<(f64, f64)> = points
                .iter()
                .filter(|(_, s)| s.is_finite() && *s > 0.0)
                .map(|&(t, s)| (t.ln(), s.ln()))
                .collect();
            if log_pts.len() >= 2 {
                let (slope, _, r2) = linear_fit(&log_pts);
                summary.insert("loglog_slope".into(), json!(slope));
                summary.insert("loglog_r_squared".into(), json!(r2));
            }
        }
        Kind::Image => {
            let spectrum = scenario
                .spectrum
                .as_ref()
                .unwrap()
                .build(cfg.signal_wavelength)?;
            let image = scenario.image.as_ref().unwrap();
            let sample_spec = scenario.sample.as_ref().unwrap();
            let feature_paths = enumerate_paths(&sample_spec.build(), sample_spec.max_order)?;
            let background_paths = match &image.background_sample {
                Some(bg) => enumerate_paths(&bg.build(), bg.max_order)?,
                None => Vec::new(),
            };
            let scene = ImagingScene {
                cfg,
                spectrum,
                feature_paths,
                background_paths,
                mask: PatternMask {
                    pattern: match image.pattern {
                        PatternSpec::Uniform { value } => Pattern::Uniform { value },
                        PatternSpec::EdgeX { boundary_m } => Pattern::EdgeX {
                            boundary: boundary_m,
                        },
                        PatternSpec::BarsX {
                            start_m,
                            period_m,
                            bar_width_m,
                        } => Pattern::BarsX {
                            start: start_m,
                            period: period_m,
                            bar_width: bar_width_m,
                        },
                    },
                    origin: (image.mask_origin_m[0], image.mask_origin_m[1]),
                    extent: (image.mask_extent_m[0], image.mask_extent_m[1]),
                },
                beam: BeamProfile::new(image.beam_fwhm_x_m, image.beam_fwhm_y_m)?,
                coupling: match image.coupling {
                    CouplingSpec::OneWay => Coupling::OneWay,
                    CouplingSpec::TwoWay => Coupling::TwoWay,
                },
                depth_select: image.depth_select_m,
            };
            let grid = ScanGrid {
                origin: (image.grid_origin_m[0], image.grid_origin_m[1]),
                width: image.width,
                height: image.height,
                step: image.step_m,
            };
            let det = if image.noise {
                detector.as_ref().map(|(d, s)| (d, *s))
            } else {
                None
            };
            let img = scan_image_full(&scene, &grid, det)?;
            artifacts.write("image.csv", |b| write_image_csv(&img, b))?;
            artifacts.write("image.pgm", |b| write_image_pgm(&img, b))?;
            if matches!(image.pattern, PatternSpec::EdgeX { .. }) {
                let row = img.row_profile(image.height / 2);
                if let Ok(lsf) = edge_response_fwhm(&row) {
                    summary.insert("edge_lsf_fwhm_m".into(), json!(lsf));
                }
            }
            let max = img.pixels.iter().cloned().fold(f64::MIN, f64::max);
            summary.insert("image_max".into(), json!(max));
        }
    }

    let mut buf = serde_json::to_vec_pretty(&summary).expect("summary serializes");
    buf.push(b'\n');
    fs::write(out_dir.join("summary.json"), buf)?;
    artifacts.files.push("summary.json".to_string());

    Ok(RunOutput {
        out_dir: artifacts.out_dir,
        files: artifacts.files,
    })
}
