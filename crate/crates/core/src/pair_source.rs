//! Photon-pair source description and heralding efficiencies.
//!
//! A single down-conversion crystal emits signal/idler pairs into a few
//! spatial modes. Besides the wanted paired emission there are two loss
//! channels: a major-mode signal whose idler scattered out of the common
//! mode, and a major-mode idler whose signal was lost. The three amplitudes
//! are normalized to unit total weight per source; the overall pair rate is
//! carried separately by `gain`, so efficiency and visibility formulas stay
//! unambiguous.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::numeric::{norm_tolerance, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSourceParams<R: Real> {
    /// Pair-generation strength of the crystal (complex; carries any pump phase).
    pub gain: Complex<R>,
    /// Amplitude for both photons landing in their major modes.
    pub paired: Complex<R>,
    /// Amplitude for a major-mode signal whose idler is lost.
    pub signal_only: Complex<R>,
    /// Amplitude for a major-mode idler whose signal is lost.
    pub idler_only: Complex<R>,
}

impl<R: Real> PairSourceParams<R> {
    /// Build from already-normalized amplitudes.
    ///
    /// Requires |paired|^2 + |signal_only|^2 + |idler_only|^2 = 1 within the
    /// normalization tolerance.
    pub fn new(
        gain: Complex<R>,
        paired: Complex<R>,
        signal_only: Complex<R>,
        idler_only: Complex<R>,
    ) -> Result<Self> {
        let weight = paired.norm_sqr() + signal_only.norm_sqr() + idler_only.norm_sqr();
        if (weight - R::one()).abs() > norm_tolerance::<R>() {
            return Err(Error::Domain(format!(
                "source amplitudes not normalized: |p|^2+|q|^2+|r|^2 = {weight}"
            )));
        }
        Ok(Self {
            gain,
            paired,
            signal_only,
            idler_only,
        })
    }

    /// Build from unnormalized amplitudes, folding the overall scale into `gain`.
    pub fn from_unnormalized(
        gain: Complex<R>,
        paired: Complex<R>,
        signal_only: Complex<R>,
        idler_only: Complex<R>,
    ) -> Result<Self> {
        let weight = paired.norm_sqr() + signal_only.norm_sqr() + idler_only.norm_sqr();
        if weight <= R::zero() {
            return Err(Error::DegenerateSource("all pair amplitudes are zero"));
        }
        let scale = weight.sqrt();
        Ok(Self {
            gain: gain * scale,
            paired: paired / scale,
            signal_only: signal_only / scale,
            idler_only: idler_only / scale,
        })
    }

    /// Build a zero-phase source that reproduces the requested heralding
    /// efficiencies exactly. Both inputs must lie in (0, 1].
    pub fn from_efficiencies(mu_signal_to_idler: R, mu_idler_to_signal: R) -> Result<Self> {
        for (name, mu) in [
            ("mu_signal_to_idler", mu_signal_to_idler),
            ("mu_idler_to_signal", mu_idler_to_signal),
        ] {
            if !(mu > R::zero() && mu <= R::one()) {
                return Err(Error::Domain(format!("{name} = {mu} outside (0, 1]")));
            }
        }
        // |p|^2 (1/mu_si + 1/mu_is - 1) = 1 under unit normalization.
        let p_sq = R::one() / (mu_signal_to_idler.recip() + mu_idler_to_signal.recip() - R::one());
        let q_sq = p_sq * (R::one() - mu_signal_to_idler) / mu_signal_to_idler;
        let r_sq = p_sq * (R::one() - mu_idler_to_signal) / mu_idler_to_signal;
        Self::new(
            Complex::new(R::one(), R::zero()),
            Complex::new(p_sq.sqrt(), R::zero()),
            Complex::new(q_sq.sqrt(), R::zero()),
            Complex::new(r_sq.sqrt(), R::zero()),
        )
    }

    /// An ideal lossless source: every signal heralds an idler and vice versa.
    pub fn ideal() -> Self {
        Self {
            gain: Complex::new(R::one(), R::zero()),
            paired: Complex::new(R::one(), R::zero()),
            signal_only: Complex::new(R::zero(), R::zero()),
            idler_only: Complex::new(R::zero(), R::zero()),
        }
    }

    /// Replace the gain, keeping the normalized amplitudes.
    pub fn with_gain(mut self, gain: Complex<R>) -> Self {
        self.gain = gain;
        self
    }

    /// Set |gain|^2 with zero phase.
    pub fn with_gain_sq(self, gain_sq: R) -> Self {
        self.with_gain(Complex::new(gain_sq.sqrt(), R::zero()))
    }

    /// Heralding efficiencies (signal-to-idler, idler-to-signal):
    /// mu_s->i = |p|^2 / (|p|^2 + |q|^2), mu_i->s = |p|^2 / (|p|^2 + |r|^2).
    pub fn heralding_efficiencies(&self) -> Result<(R, R)> {
        let p_sq = self.paired.norm_sqr();
        let q_sq = self.signal_only.norm_sqr();
        let r_sq = self.idler_only.norm_sqr();
        if p_sq + q_sq <= R::zero() {
            return Err(Error::DegenerateSource(
                "no signal population: |p|^2 + |q|^2 = 0",
            ));
        }
        if p_sq + r_sq <= R::zero() {
            return Err(Error::DegenerateSource(
                "no idler population: |p|^2 + |r|^2 = 0",
            ));
        }
        Ok((p_sq / (p_sq + q_sq), p_sq / (p_sq + r_sq)))
    }
}
