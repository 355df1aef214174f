//! CSV and PGM serialization for scan results.
//!
//! Fringe records serialize with a two-line preamble (`axis_unit,kind`
//! header and its values) followed by `axis,expected,sampled` rows; depth
//! profiles and peak tables are plain CSV. Images write both a CSV matrix
//! and an 8-bit binary PGM, row-major, normalized to the brightest pixel.
//! All formatting is deterministic, so identical runs produce identical
//! bytes.

use std::io::{self, Write};

use crate::imaging::ScanImage;
use crate::numeric::Real;
use crate::spectra::FringeRecord;
use crate::tomography::{DepthProfile, Peak};

pub fn write_fringe_csv<R: Real, W: Write>(rec: &FringeRecord<R>, out: &mut W) -> io::Result<()> {
    writeln!(out, "axis_unit,kind")?;
    writeln!(out, "{},{}", rec.kind.axis_unit(), rec.kind.label())?;
    writeln!(out, "axis,expected,sampled")?;
    for (i, (&x, &e)) in rec.axis.iter().zip(&rec.expected).enumerate() {
        match &rec.sampled {
            Some(counts) => writeln!(out, "{x},{e},{}", counts[i])?,
            None => writeln!(out, "{x},{e},")?,
        }
    }
    Ok(())
}

pub fn write_depth_csv<R: Real, W: Write>(
    profile: &DepthProfile<R>,
    out: &mut W,
) -> io::Result<()> {
    writeln!(out, "depth_m,magnitude")?;
    for (&d, &m) in profile.depth_axis.iter().zip(&profile.magnitude) {
        writeln!(out, "{d},{m}")?;
    }
    Ok(())
}

pub fn write_peaks_csv<R: Real, W: Write>(peaks: &[Peak<R>], out: &mut W) -> io::Result<()> {
    writeln!(out, "position_m,fwhm_m,amplitude")?;
    for p in peaks {
        writeln!(out, "{},{},{}", p.position, p.fwhm, p.amplitude)?;
    }
    Ok(())
}

/// Generic two-column CSV, e.g. (transmission, visibility) sweeps.
pub fn write_pairs_csv<R: Real, W: Write>(
    header: &str,
    pairs: &[(R, R)],
    out: &mut W,
) -> io::Result<()> {
    writeln!(out, "{header}")?;
    for (a, b) in pairs {
        writeln!(out, "{a},{b}")?;
    }
    Ok(())
}

pub fn write_image_csv<R: Real, W: Write>(image: &ScanImage<R>, out: &mut W) -> io::Result<()> {
    for j in 0..image.height {
        let row: Vec<String> = (0..image.width)
            .map(|i| format!("{}", image.get(i, j)))
            .collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Binary 8-bit PGM (P5), row-major, max-normalized.
pub fn write_image_pgm<R: Real, W: Write>(image: &ScanImage<R>, out: &mut W) -> io::Result<()> {
    let max = image
        .pixels
        .iter()
        .fold(R::zero(), |a, &b| if b > a { b } else { a });
    writeln!(out, "P5")?;
    writeln!(out, "{} {}", image.width, image.height)?;
    writeln!(out, "255")?;
    let mut bytes = Vec::with_capacity(image.width * image.height);
    for j in 0..image.height {
        for i in 0..image.width {
            let v = if max > R::zero() {
                (image.get(i, j) / max).to_f64().unwrap_or(0.0)
            } else {
                0.0
            };
            bytes.push((v.clamp(0.0, 1.0) * 255.0).round() as u8);
        }
    }
    out.write_all(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::FringeKind;

    #[test]
    fn fringe_csv_layout() {
        let mut rec = FringeRecord::new(
            FringeKind::Fd,
            vec![-1.0e-9, 0.0, 1.0e-9],
            vec![1.5, 2.0, 1.5],
        );
        rec.sampled = Some(vec![1, 2, 1]);
        let mut buf = Vec::new();
        write_fringe_csv(&rec, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "axis_unit,kind");
        assert_eq!(lines[1], "relative_wavelength_m,FD");
        assert_eq!(lines[2], "axis,expected,sampled");
        assert_eq!(lines[3], "-0.000000001,1.5,1");
        assert_eq!(lines.len(), 6);
    }

    #[test]
    fn missing_samples_leave_empty_column() {
        let rec = FringeRecord::new(FringeKind::Td, vec![0.0, 1.0], vec![3.0, 4.0]);
        let mut buf = Vec::new();
        write_fringe_csv(&rec, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().nth(3).unwrap().ends_with(','));
    }

    #[test]
    fn pgm_header_and_payload_size() {
        let image = ScanImage {
            pixels: vec![0.0, 0.5, 1.0, 0.25, 0.75, 0.1],
            width: 3,
            height: 2,
            step: 1e-6,
            origin: (0.0, 0.0),
        };
        let mut buf = Vec::new();
        write_image_pgm(&image, &mut buf).unwrap();
        let header_end = buf
            .windows(4)
            .position(|w| w == b"255\n")
            .map(|p| p + 4)
            .unwrap();
        assert_eq!(&buf[..3], b"P5\n");
        assert_eq!(buf.len() - header_end, 6);
        assert_eq!(buf[header_end + 2], 255);
    }

    #[test]
    fn identical_inputs_serialize_identically() {
        let profile = DepthProfile {
            depth_axis: vec![0.0, 1.0e-3 / 3.0, 2.0e-3 / 3.0],
            magnitude: vec![0.1, 0.9, 0.2],
        };
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_depth_csv(&profile, &mut a).unwrap();
        write_depth_csv(&profile, &mut b).unwrap();
        assert_eq!(a, b);
    }
}
