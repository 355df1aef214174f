//! Layered samples in the idler arm, modeled as a set of reflection paths.
//!
//! Each path carries a complex amplitude (a product of normal-incidence
//! Fresnel factors along its bounce sequence) and an optical roundtrip
//! length (twice the group-index-weighted thickness of every traversed
//! section, referenced to a configurable plane). Multi-roundtrip components
//! are enumerated up to a caller-chosen order.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::numeric::Real;

/// Hard cap on enumerated paths; exceeding it is reported as an error
/// rather than silently truncated.
pub const DEFAULT_PATH_CAP: usize = 1 << 16;

/// One homogeneous section of the stack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Layer<R: Real> {
    /// Geometric thickness, meters.
    pub thickness: R,
    /// Group index; sets the interferometric delay through the layer.
    pub group_index: R,
    /// Phase index for Fresnel coefficients. Defaults to the group index,
    /// which shifts Fresnel magnitudes slightly but leaves the validated
    /// peak positions untouched.
    pub phase_index: Option<R>,
}

impl<R: Real> Layer<R> {
    pub fn new(thickness: R, group_index: R) -> Self {
        Self {
            thickness,
            group_index,
            phase_index: None,
        }
    }

    pub fn phase_index(&self) -> R {
        self.phase_index.unwrap_or(self.group_index)
    }

    fn validate(&self, what: &str) -> Result<()> {
        if !(self.thickness >= R::zero()) {
            return Err(Error::Domain(format!("{what}: thickness must be >= 0")));
        }
        if !(self.group_index >= R::one()) || !(self.phase_index() >= R::one()) {
            return Err(Error::Domain(format!("{what}: indices must be >= 1")));
        }
        Ok(())
    }
}

/// How the stack ends below the last layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Backing<R: Real> {
    /// Semi-infinite medium of the given index (Fresnel interface).
    Medium { index: R },
    /// Opaque mirror of the given amplitude reflectivity (e.g. a metal
    /// coating; the value is configurable because thin-metal reflectivity
    /// is not derivable from a refractive index here).
    Mirror { reflectivity: R },
}

/// Layered sample: ambient medium, ordered layers, and a backing.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerStack<R: Real> {
    pub ambient_index: R,
    pub layers: Vec<Layer<R>>,
    pub backing: Backing<R>,
    /// Optical path of the reference plane, meters, subtracted from every
    /// enumerated roundtrip (signed).
    pub reference_plane_offset: R,
}

impl<R: Real> LayerStack<R> {
    /// A bare mirror at the reference plane.
    pub fn mirror(reflectivity: R) -> Self {
        Self {
            ambient_index: R::one(),
            layers: Vec::new(),
            backing: Backing::Mirror { reflectivity },
            reference_plane_offset: R::zero(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ambient_index >= R::one()) {
            return Err(Error::Domain("ambient_index must be >= 1".into()));
        }
        for (i, layer) in self.layers.iter().enumerate() {
            layer.validate(&format!("layers[{i}]"))?;
        }
        match self.backing {
            Backing::Medium { index } => {
                if !(index >= R::one()) {
                    return Err(Error::Domain("backing index must be >= 1".into()));
                }
            }
            Backing::Mirror { reflectivity } => {
                if !(reflectivity >= R::zero() && reflectivity <= R::one()) {
                    return Err(Error::Domain(
                        "mirror reflectivity must be within [0, 1]".into(),
                    ));
                }
            }
        }
        if !self.reference_plane_offset.is_finite() {
            return Err(Error::Domain(
                "reference plane offset must be finite".into(),
            ));
        }
        Ok(())
    }

    pub fn with_reference_plane(mut self, offset: R) -> Self {
        self.reference_plane_offset = offset;
        self
    }
}

/// One enumerated reflection component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionPath<R: Real> {
    /// Optical roundtrip length relative to the reference plane, meters.
    pub optical_roundtrip: R,
    /// Product of the Fresnel factors along the bounce sequence.
    pub amplitude: Complex<R>,
    /// Number of internal roundtrips beyond the direct bounce.
    pub order: u32,
}

impl<R: Real> ReflectionPath<R> {
    /// A perfect reflector at the given roundtrip position.
    pub fn mirror_at(optical_roundtrip: R) -> Self {
        Self {
            optical_roundtrip,
            amplitude: Complex::new(R::one(), R::zero()),
            order: 0,
        }
    }
}

/// Normal-incidence Fresnel amplitude reflectivity, r = (n1 - n2)/(n1 + n2).
pub fn fresnel_reflectivity<R: Real>(n_from: R, n_to: R) -> R {
    (n_from - n_to) / (n_from + n_to)
}

/// Enumerate reflection paths with at most `max_order` internal roundtrips,
/// using the default path cap.
pub fn enumerate_paths<R: Real>(
    stack: &LayerStack<R>,
    max_order: u32,
) -> Result<Vec<ReflectionPath<R>>> {
    enumerate_paths_with_cap(stack, max_order, DEFAULT_PATH_CAP)
}

/// Enumerate reflection paths with an explicit cap on the path count.
///
/// Interface crossings contribute the symmetric factor sqrt(1 - r^2); since
/// every returning path crosses each interface as often downward as upward,
/// the product equals the exact t_fwd * t_back = 1 - r^2 pairing. Paths
/// whose amplitude is exactly zero (an index-matched interface) are dropped,
/// so at order 0 the path count equals the number of reflecting interfaces.
pub fn enumerate_paths_with_cap<R: Real>(
    stack: &LayerStack<R>,
    max_order: u32,
    cap: usize,
) -> Result<Vec<ReflectionPath<R>>> {
    stack.validate()?;

    // Media indices bounding each interface k: media[k] | media[k+1].
    let mut phase_indices = vec![stack.ambient_index];
    let mut optical: Vec<R> = Vec::new(); // one-way optical length of each layer
    for layer in &stack.layers {
        phase_indices.push(layer.phase_index());
        optical.push(layer.group_index * layer.thickness);
    }
    let mirror = match stack.backing {
        Backing::Medium { index } => {
            phase_indices.push(index);
            None
        }
        Backing::Mirror { reflectivity } => Some(reflectivity),
    };
    let n_interfaces = phase_indices.len() - 1 + usize::from(mirror.is_some());

    // Reflection looking down at interface k and the paired crossing factor.
    let refl_down: Vec<R> = (0..n_interfaces)
        .map(|k| match mirror {
            Some(r) if k == n_interfaces - 1 => r,
            _ => fresnel_reflectivity(phase_indices[k], phase_indices[k + 1]),
        })
        .collect();
    let cross: Vec<R> = refl_down
        .iter()
        .map(|&r| (R::one() - r * r).max(R::zero()).sqrt())
        .collect();

    struct Walk<'a, R: Real> {
        refl_down: &'a [R],
        cross: &'a [R],
        optical: &'a [R],
        last: usize,
        max_order: u32,
        cap: usize,
        out: Vec<(R, R, u32)>,
    }

    impl<R: Real> Walk<'_, R> {
        /// Arrive at interface `k` heading down. `opt` accumulates one
        /// layer optical length per traversal, so a completed path already
        /// carries its full roundtrip.
        fn down(&mut self, k: usize, amp: R, opt: R, order: u32) -> Result<()> {
            let r = self.refl_down[k];
            if amp * r != R::zero() {
                self.up(k, amp * r, opt, order)?;
            }
            // Transmission through the deepest interface is lost light.
            if k < self.last {
                let t = self.cross[k];
                if amp * t != R::zero() {
                    self.down(k + 1, amp * t, opt + self.optical[k], order)?;
                }
            }
            Ok(())
        }

        /// Depart upward from just above interface `k`.
        fn up(&mut self, k: usize, amp: R, opt: R, order: u32) -> Result<()> {
            if k == 0 {
                return self.emit(amp, opt, order);
            }
            // Travel up through the layer above, arriving under interface k-1.
            let above = k - 1;
            let opt = opt + self.optical[above];
            // Transmit out through it.
            let t = self.cross[above];
            if amp * t != R::zero() {
                self.up(above, amp * t, opt, order)?;
            }
            // Or reflect back down (seen from below the sign flips), opening
            // one more internal roundtrip.
            if order < self.max_order {
                let r = -self.refl_down[above];
                if amp * r != R::zero() {
                    self.down(above + 1, amp * r, opt + self.optical[above], order + 1)?;
                }
            }
            Ok(())
        }

        fn emit(&mut self, amp: R, opt: R, order: u32) -> Result<()> {
            if self.out.len() >= self.cap {
                return Err(Error::EnumerationLimit {
                    count: self.out.len() + 1,
                    cap: self.cap,
                });
            }
            self.out.push((opt, amp, order));
            Ok(())
        }
    }

    let mut walk = Walk {
        refl_down: &refl_down,
        cross: &cross,
        optical: &optical,
        last: n_interfaces - 1,
        max_order,
        cap,
        out: Vec::new(),
    };
    if n_interfaces > 0 {
        walk.down(0, R::one(), R::zero(), 0)?;
    }

    let mut paths: Vec<ReflectionPath<R>> = walk
        .out
        .into_iter()
        .map(|(opt, amp, order)| ReflectionPath {
            optical_roundtrip: opt - stack.reference_plane_offset,
            amplitude: Complex::new(amp, R::zero()),
            order,
        })
        .collect();
    paths.sort_by(|a, b| {
        a.optical_roundtrip
            .partial_cmp(&b.optical_roundtrip)
            .unwrap()
            .then(a.order.cmp(&b.order))
    });
    Ok(paths)
}

/// Sum of |amplitude|^2 over a path set; bounded by 1 for a lossless stack.
pub fn reflected_energy<R: Real>(paths: &[ReflectionPath<R>]) -> R {
    paths.iter().map(|p| p.amplitude.norm_sqr()).sum()
}
