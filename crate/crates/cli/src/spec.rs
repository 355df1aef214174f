//! Scenario file schema and validation.
//!
//! Scenarios are JSON documents with raw SI values (meters, seconds, hertz);
//! field names carry the unit. Unknown fields are rejected at parse time,
//! range violations are reported with a dotted field path.

use serde::Deserialize;

use icot_core::interferometer::InterferometerConfig;
use icot_core::pair_source::PairSourceParams;
use icot_core::sample::{Backing, Layer, LayerStack};
use icot_core::spectra::{CrossTerms, SignalSpectrum};
use icot_core::tomography::Window;

#[derive(Debug)]
pub struct ValidationError {
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for ValidationError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

impl std::error::Error for ValidationError {}

fn err(path: &str, message: impl Into<String>) -> ValidationError {
    ValidationError {
        path: path.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub kind: Kind,
    pub sources: SourcesSpec,
    pub interferometer: InterferometerSpec,
    #[serde(default)]
    pub spectrum: Option<SpectrumSpec>,
    #[serde(default)]
    pub sample: Option<SampleSpec>,
    #[serde(default)]
    pub detector: Option<DetectorSpec>,
    #[serde(default)]
    pub reconstruction: Option<ReconstructionSpec>,
    #[serde(default)]
    pub td: Option<GridSpec>,
    #[serde(default)]
    pub phase: Option<GridSpec>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub resolution: Option<ResolutionSpec>,
    #[serde(default)]
    pub snr: Option<SnrSpec>,
    #[serde(default)]
    pub image: Option<ImageSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum Kind {
    #[serde(rename = "td-scan")]
    TdScan,
    #[serde(rename = "fd-scan")]
    FdScan,
    #[serde(rename = "phase-scan")]
    PhaseScan,
    #[serde(rename = "reconstruct")]
    Reconstruct,
    #[serde(rename = "visibility-sweep")]
    VisibilitySweep,
    #[serde(rename = "resolution-curve")]
    ResolutionCurve,
    #[serde(rename = "snr-curve")]
    SnrCurve,
    #[serde(rename = "image")]
    Image,
}

impl Kind {
    pub fn label(&self) -> &'static str {
        match self {
            Kind::TdScan => "td-scan",
            Kind::FdScan => "fd-scan",
            Kind::PhaseScan => "phase-scan",
            Kind::Reconstruct => "reconstruct",
            Kind::VisibilitySweep => "visibility-sweep",
            Kind::ResolutionCurve => "resolution-curve",
            Kind::SnrCurve => "snr-curve",
            Kind::Image => "image",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourcesSpec {
    pub source1: SourceSpec,
    pub source2: SourceSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SourceSpec {
    Efficiencies {
        mu_signal_to_idler: f64,
        mu_idler_to_signal: f64,
        gain_sq: f64,
    },
    Raw {
        raw: RawSource,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSource {
    pub gain: PolarAmplitude,
    pub paired: PolarAmplitude,
    pub signal_only: PolarAmplitude,
    pub idler_only: PolarAmplitude,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolarAmplitude {
    pub mag: f64,
    #[serde(default)]
    pub phase_rad: f64,
}

impl PolarAmplitude {
    fn to_complex(self) -> num_complex::Complex<f64> {
        num_complex::Complex::from_polar(self.mag, self.phase_rad)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterferometerSpec {
    pub pump_wavelength_m: f64,
    pub signal_wavelength_m: f64,
    #[serde(default = "one")]
    pub signal_transmittance: f64,
    #[serde(default = "one")]
    pub idler_transmittance: f64,
    #[serde(default)]
    pub phase_shift_rad: f64,
    #[serde(default)]
    pub phase_offset_rad: f64,
    #[serde(default)]
    pub delay_offset_m: f64,
    #[serde(default = "yes")]
    pub merge_idler_modes: bool,
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSpec {
    pub fwhm_m: f64,
    pub grid_step_m: f64,
    pub grid_span_m: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSpec {
    #[serde(default = "one")]
    pub ambient_index: f64,
    #[serde(default)]
    pub layers: Vec<LayerSpec>,
    pub backing: BackingSpec,
    #[serde(default)]
    pub reference_plane_offset_m: f64,
    #[serde(default)]
    pub max_order: u32,
    /// Inter-path beat notes; on by default (they matter for strongly
    /// reflecting stacks and cost nothing for single-path scenes).
    #[serde(default = "yes")]
    pub cross_terms: bool,
    #[serde(default = "default_cross_strength")]
    pub cross_term_strength: f64,
}

fn default_cross_strength() -> f64 {
    0.15
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerSpec {
    pub thickness_m: f64,
    pub group_index: f64,
    #[serde(default)]
    pub phase_index: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackingSpec {
    #[serde(default)]
    pub medium_index: Option<f64>,
    #[serde(default)]
    pub mirror_reflectivity: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSpec {
    #[serde(default = "yes")]
    pub enabled: bool,
    #[serde(default = "one")]
    pub efficiency: f64,
    #[serde(default)]
    pub dark_rate_hz: f64,
    #[serde(default = "one")]
    pub integration_time_s: f64,
    pub rate_scale_hz: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReconstructionSpec {
    #[serde(default)]
    pub window: WindowSpec,
    #[serde(default = "default_prominence")]
    pub min_prominence: f64,
}

fn default_prominence() -> f64 {
    0.05
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
pub enum WindowSpec {
    #[default]
    #[serde(rename = "none")]
    None,
    #[serde(rename = "hann")]
    Hann,
}

impl WindowSpec {
    pub fn to_window(self) -> Window {
        match self {
            WindowSpec::None => Window::None,
            WindowSpec::Hann => Window::Hann,
        }
    }
}

/// Inclusive linear grid.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start_m: f64,
    pub stop_m: f64,
    pub steps: usize,
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        let n = self.steps.max(2);
        (0..n)
            .map(|i| self.start_m + (self.stop_m - self.start_m) * i as f64 / (n - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub arm: ArmSpec,
    #[serde(default)]
    pub double_pass: bool,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum ArmSpec {
    #[serde(rename = "signal")]
    Signal,
    #[serde(rename = "idler")]
    Idler,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolutionSpec {
    pub delays_m: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnrSpec {
    pub times_s: Vec<f64>,
    pub repeats: usize,
    pub target_depth_m: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageSpec {
    pub beam_fwhm_x_m: f64,
    pub beam_fwhm_y_m: f64,
    pub pattern: PatternSpec,
    #[serde(default)]
    pub mask_origin_m: [f64; 2],
    pub mask_extent_m: [f64; 2],
    #[serde(default)]
    pub grid_origin_m: [f64; 2],
    pub width: usize,
    pub height: usize,
    pub step_m: f64,
    pub depth_select_m: f64,
    #[serde(default)]
    pub coupling: CouplingSpec,
    /// Stack seen where the pattern multiplier is zero; empty when absent.
    #[serde(default)]
    pub background_sample: Option<SampleSpec>,
    #[serde(default)]
    pub noise: bool,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(tag = "type")]
pub enum PatternSpec {
    #[serde(rename = "uniform")]
    Uniform { value: f64 },
    #[serde(rename = "edge_x")]
    EdgeX { boundary_m: f64 },
    #[serde(rename = "bars_x")]
    BarsX {
        start_m: f64,
        period_m: f64,
        bar_width_m: f64,
    },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
pub enum CouplingSpec {
    #[serde(rename = "one_way")]
    OneWay,
    #[default]
    #[serde(rename = "two_way")]
    TwoWay,
}

impl Scenario {
    /// Range and cross-section checks beyond what serde's shape checking
    /// gives us. Returns the first violation with its dotted path.
    pub fn validate(&self) -> Result<(), ValidationError> {
        if self.name.is_empty() {
            return Err(err("name", "must not be empty"));
        }
        self.validate_sources()?;
        self.validate_interferometer()?;
        if let Some(s) = &self.spectrum {
            s.validate("spectrum")?;
        }
        if let Some(s) = &self.sample {
            s.validate("sample")?;
        }
        if let Some(d) = &self.detector {
            d.validate("detector")?;
        }
        if let Some(r) = &self.reconstruction {
            if !(r.min_prominence > 0.0 && r.min_prominence <= 1.0) {
                return Err(err("reconstruction.min_prominence", "must be in (0, 1]"));
            }
        }

        let need = |ok: bool, path: &str| {
            if ok {
                Ok(())
            } else {
                Err(err(
                    path,
                    format!("required for kind {}", self.kind.label()),
                ))
            }
        };
        match self.kind {
            Kind::TdScan => {
                need(self.sample.is_some(), "sample")?;
                need(self.spectrum.is_some(), "spectrum")?;
                need(self.td.is_some(), "td")?;
                self.td.as_ref().unwrap().validate("td")?;
            }
            Kind::FdScan => {
                need(self.sample.is_some(), "sample")?;
                need(self.spectrum.is_some(), "spectrum")?;
            }
            Kind::PhaseScan => {
                need(self.phase.is_some(), "phase")?;
                self.phase.as_ref().unwrap().validate("phase")?;
            }
            Kind::Reconstruct => {
                need(self.sample.is_some(), "sample")?;
                need(self.spectrum.is_some(), "spectrum")?;
            }
            Kind::VisibilitySweep => {
                let sweep = self.sweep.as_ref();
                need(sweep.is_some(), "sweep")?;
                let sweep = sweep.unwrap();
                if !(0.0..=1.0).contains(&sweep.start) || !(0.0..=1.0).contains(&sweep.stop) {
                    return Err(err("sweep", "transmissions must lie in [0, 1]"));
                }
                if sweep.steps < 2 {
                    return Err(err("sweep.steps", "need at least 2 points"));
                }
            }
            Kind::ResolutionCurve => {
                need(self.spectrum.is_some(), "spectrum")?;
                let res = self.resolution.as_ref();
                need(res.is_some(), "resolution")?;
                if res.unwrap().delays_m.is_empty() {
                    return Err(err("resolution.delays_m", "must not be empty"));
                }
            }
            Kind::SnrCurve => {
                need(self.sample.is_some(), "sample")?;
                need(self.spectrum.is_some(), "spectrum")?;
                need(self.detector.is_some(), "detector")?;
                let snr = self.snr.as_ref();
                need(snr.is_some(), "snr")?;
                let snr = snr.unwrap();
                if snr.times_s.iter().any(|&t| t <= 0.0) || snr.times_s.len() < 2 {
                    return Err(err("snr.times_s", "need >= 2 positive times"));
                }
                if snr.repeats < 10 {
                    return Err(err("snr.repeats", "need at least 10 repeats"));
                }
            }
            Kind::Image => {
                need(self.sample.is_some(), "sample")?;
                need(self.spectrum.is_some(), "spectrum")?;
                let image = self.image.as_ref();
                need(image.is_some(), "image")?;
                image.unwrap().validate("image")?;
                if self.image.as_ref().unwrap().noise {
                    need(self.detector.is_some(), "detector")?;
                }
            }
        }
        Ok(())
    }

    fn validate_sources(&self) -> Result<(), ValidationError> {
        for (path, src) in [
            ("sources.source1", &self.sources.source1),
            ("sources.source2", &self.sources.source2),
        ] {
            match src {
                SourceSpec::Efficiencies {
                    mu_signal_to_idler,
                    mu_idler_to_signal,
                    gain_sq,
                } => {
                    for (field, mu) in [
                        ("mu_signal_to_idler", mu_signal_to_idler),
                        ("mu_idler_to_signal", mu_idler_to_signal),
                    ] {
                        if !(*mu > 0.0 && *mu <= 1.0) {
                            return Err(err(&format!("{path}.{field}"), "must be in (0, 1]"));
                        }
                    }
                    if !(*gain_sq >= 0.0) {
                        return Err(err(&format!("{path}.gain_sq"), "must be >= 0"));
                    }
                }
                SourceSpec::Raw { raw } => {
                    let w = raw.paired.mag * raw.paired.mag
                        + raw.signal_only.mag * raw.signal_only.mag
                        + raw.idler_only.mag * raw.idler_only.mag;
                    if !(w > 0.0) {
                        return Err(err(&format!("{path}.raw"), "all amplitudes are zero"));
                    }
                }
            }
        }
        Ok(())
    }

    fn validate_interferometer(&self) -> Result<(), ValidationError> {
        let i = &self.interferometer;
        for (field, v) in [
            ("signal_transmittance", i.signal_transmittance),
            ("idler_transmittance", i.idler_transmittance),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(err(&format!("interferometer.{field}"), "must be in [0, 1]"));
            }
        }
        if !(i.pump_wavelength_m > 0.0 && i.signal_wavelength_m > 0.0) {
            return Err(err("interferometer", "wavelengths must be positive"));
        }
        if i.pump_wavelength_m >= i.signal_wavelength_m {
            return Err(err(
                "interferometer.pump_wavelength_m",
                "pump must be shorter than the signal wavelength",
            ));
        }
        if !i.delay_offset_m.is_finite() {
            return Err(err("interferometer.delay_offset_m", "must be finite"));
        }
        Ok(())
    }

    pub fn build_config(&self) -> Result<InterferometerConfig<f64>, ValidationError> {
        let s1 = build_source(&self.sources.source1)
            .map_err(|e| err("sources.source1", e.to_string()))?;
        let s2 = build_source(&self.sources.source2)
            .map_err(|e| err("sources.source2", e.to_string()))?;
        let i = &self.interferometer;
        let mut cfg = InterferometerConfig::new(s1, s2, i.pump_wavelength_m, i.signal_wavelength_m)
            .map_err(|e| err("interferometer", e.to_string()))?;
        cfg.signal_transmittance = i.signal_transmittance;
        cfg.idler_transmittance = i.idler_transmittance;
        cfg.phase_shift = i.phase_shift_rad;
        cfg.phase_offset = i.phase_offset_rad;
        cfg.merge_idler_modes = i.merge_idler_modes;
        Ok(cfg.with_path_offset(i.delay_offset_m))
    }
}

fn build_source(spec: &SourceSpec) -> icot_core::Result<PairSourceParams<f64>> {
    match spec {
        SourceSpec::Efficiencies {
            mu_signal_to_idler,
            mu_idler_to_signal,
            gain_sq,
        } => Ok(
            PairSourceParams::from_efficiencies(*mu_signal_to_idler, *mu_idler_to_signal)?
                .with_gain_sq(*gain_sq),
        ),
        SourceSpec::Raw { raw } => PairSourceParams::from_unnormalized(
            raw.gain.to_complex(),
            raw.paired.to_complex(),
            raw.signal_only.to_complex(),
            raw.idler_only.to_complex(),
        ),
    }
}

impl SpectrumSpec {
    fn validate(&self, path: &str) -> Result<(), ValidationError> {
        if !(self.fwhm_m > 0.0) {
            return Err(err(&format!("{path}.fwhm_m"), "must be > 0"));
        }
        if !(self.grid_step_m > 0.0) {
            return Err(err(&format!("{path}.grid_step_m"), "must be > 0"));
        }
        if self.grid_span_m < 4.0 * self.fwhm_m {
            return Err(err(
                &format!("{path}.grid_span_m"),
                "must cover at least 4x the fwhm",
            ));
        }
        Ok(())
    }

    pub fn build(&self, signal_wavelength_m: f64) -> icot_core::Result<SignalSpectrum<f64>> {
        SignalSpectrum::new(
            signal_wavelength_m,
            self.fwhm_m,
            self.grid_step_m,
            self.grid_span_m,
        )
    }
}

impl SampleSpec {
    fn validate(&self, path: &str) -> Result<(), ValidationError> {
        if !(self.ambient_index >= 1.0) {
            return Err(err(&format!("{path}.ambient_index"), "must be >= 1"));
        }
        for (i, layer) in self.layers.iter().enumerate() {
            if !(layer.thickness_m >= 0.0) {
                return Err(err(
                    &format!("{path}.layers.{i}.thickness_m"),
                    "must be >= 0",
                ));
            }
            if !(layer.group_index >= 1.0) || !(layer.phase_index.unwrap_or(1.0) >= 1.0) {
                return Err(err(&format!("{path}.layers.{i}"), "indices must be >= 1"));
            }
        }
        match (self.backing.medium_index, self.backing.mirror_reflectivity) {
            (Some(n), None) => {
                if !(n >= 1.0) {
                    return Err(err(&format!("{path}.backing.medium_index"), "must be >= 1"));
                }
            }
            (None, Some(r)) => {
                if !(0.0..=1.0).contains(&r) {
                    return Err(err(
                        &format!("{path}.backing.mirror_reflectivity"),
                        "must be in [0, 1]",
                    ));
                }
            }
            _ => {
                return Err(err(
                    &format!("{path}.backing"),
                    "exactly one of medium_index or mirror_reflectivity",
                ))
            }
        }
        if !(0.0..=1.0).contains(&self.cross_term_strength) {
            return Err(err(
                &format!("{path}.cross_term_strength"),
                "must be in [0, 1]",
            ));
        }
        Ok(())
    }

    pub fn build(&self) -> LayerStack<f64> {
        LayerStack {
            ambient_index: self.ambient_index,
            layers: self
                .layers
                .iter()
                .map(|l| Layer {
                    thickness: l.thickness_m,
                    group_index: l.group_index,
                    phase_index: l.phase_index,
                })
                .collect(),
            backing: match (self.backing.medium_index, self.backing.mirror_reflectivity) {
                (Some(n), _) => Backing::Medium { index: n },
                (_, Some(r)) => Backing::Mirror { reflectivity: r },
                _ => unreachable!("validated"),
            },
            reference_plane_offset: self.reference_plane_offset_m,
        }
    }

    pub fn cross_mode(&self) -> CrossTerms<f64> {
        if self.cross_terms {
            CrossTerms::Include {
                strength: self.cross_term_strength,
            }
        } else {
            CrossTerms::Exclude
        }
    }
}

impl DetectorSpec {
    fn validate(&self, path: &str) -> Result<(), ValidationError> {
        if !(0.0..=1.0).contains(&self.efficiency) {
            return Err(err(&format!("{path}.efficiency"), "must be in [0, 1]"));
        }
        if !(self.dark_rate_hz >= 0.0) {
            return Err(err(&format!("{path}.dark_rate_hz"), "must be >= 0"));
        }
        if !(self.integration_time_s > 0.0) {
            return Err(err(&format!("{path}.integration_time_s"), "must be > 0"));
        }
        if !(self.rate_scale_hz > 0.0) {
            return Err(err(&format!("{path}.rate_scale_hz"), "must be > 0"));
        }
        Ok(())
    }

    pub fn build(&self) -> icot_core::Result<icot_core::DetectorModel64> {
        icot_core::detector::DetectorModel::new(
            self.efficiency,
            self.dark_rate_hz,
            self.integration_time_s,
            self.seed,
        )
    }
}

impl GridSpec {
    fn validate(&self, path: &str) -> Result<(), ValidationError> {
        if self.steps < 2 {
            return Err(err(&format!("{path}.steps"), "need at least 2 points"));
        }
        if !(self.stop_m > self.start_m) {
            return Err(err(path, "stop must exceed start"));
        }
        Ok(())
    }
}

impl ImageSpec {
    fn validate(&self, path: &str) -> Result<(), ValidationError> {
        if !(self.beam_fwhm_x_m > 0.0 && self.beam_fwhm_y_m > 0.0) {
            return Err(err(&format!("{path}.beam_fwhm_x_m"), "must be > 0"));
        }
        if self.width == 0 || self.height == 0 || !(self.step_m > 0.0) {
            return Err(err(path, "grid needs positive width, height and step"));
        }
        if !(self.depth_select_m >= 0.0) {
            return Err(err(&format!("{path}.depth_select_m"), "must be >= 0"));
        }
        if let PatternSpec::Uniform { value } = self.pattern {
            if !(0.0..=1.0).contains(&value) {
                return Err(err(&format!("{path}.pattern.value"), "must be in [0, 1]"));
            }
        }
        if let PatternSpec::BarsX {
            period_m,
            bar_width_m,
            ..
        } = self.pattern
        {
            if !(period_m > 0.0 && bar_width_m > 0.0 && bar_width_m <= period_m) {
                return Err(err(
                    &format!("{path}.pattern"),
                    "need 0 < bar width <= period",
                ));
            }
        }
        if let Some(bg) = &self.background_sample {
            bg.validate(&format!("{path}.background_sample"))?;
        }
        Ok(())
    }
}
