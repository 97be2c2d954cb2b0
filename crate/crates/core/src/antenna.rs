//! Directional beam models.
//!
//! Two models are provided. The sector model is an idealized circular sector
//! whose area stays equal to the omnidirectional disk, so narrowing the beam
//! lengthens it. The uniform linear array (ULA) model uses the array factor
//! of `m` half-wavelength spaced elements and a power budget with path-loss
//! exponent 2; it keeps side lobes, which the sector model does not.

use std::f64::consts::{PI, TAU};

use crate::error::{invalid, Result};
use crate::topology::{in_reach, Point};

/// Below this `|sin(ψ/2)|` the array factor is evaluated by its limit, 1.
const ARRAY_FACTOR_GUARD: f64 = 1e-9;

/// Default number of candidate beam lengths (`k = 1..=6`).
pub const DEFAULT_MAX_MULTIPLE: u32 = 6;

/// Path-loss exponent used by the ULA model.
pub const PATHLOSS_EXPONENT: f64 = 2.0;

/// Wraps an angle into `[0, 2π)`.
pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Signed angular difference `a - b` wrapped into `(-π, π]`.
fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorBeam {
    pub boresight: f64,
    pub width: f64,
    pub length: f64,
}

impl SectorBeam {
    /// Sector of the given width whose length follows from constant area.
    pub fn new(boresight: f64, width: f64, omni_range: f64) -> Result<Self> {
        Ok(Self {
            boresight: normalize_angle(boresight),
            width,
            length: sector_beam_length(width, omni_range)?,
        })
    }

    /// Area of the sector footprint, `θ·r(θ)²/2`.
    pub fn footprint_area(&self) -> f64 {
        self.width * self.length * self.length / 2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UlaBeam {
    pub boresight: f64,
    pub elements: u32,
    pub pathloss_exponent: f64,
    pub tx_power: f64,
    pub rx_threshold: f64,
}

impl UlaBeam {
    /// Unit transmit power with the receive threshold calibrated so that a
    /// single element reaches exactly `omni_range`.
    pub fn new(boresight: f64, elements: u32, omni_range: f64) -> Result<Self> {
        if elements == 0 {
            return Err(invalid("ULA needs at least one element"));
        }
        if !(omni_range > 0.0) {
            return Err(invalid(format!("omni_range must be positive, got {omni_range}")));
        }
        let tx_power = 1.0;
        Ok(Self {
            boresight: normalize_angle(boresight),
            elements,
            pathloss_exponent: PATHLOSS_EXPONENT,
            tx_power,
            rx_threshold: tx_power / omni_range.powf(PATHLOSS_EXPONENT),
        })
    }

    pub fn gain_toward(&self, direction: f64) -> f64 {
        ula_gain(self.elements, self.boresight, direction)
    }
}

/// Result of the beamwidth optimization over integer beam-length multiples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamwidthChoice {
    pub theta_star: f64,
    pub length_multiple: u32,
    pub p_nf: f64,
    pub p_nl: f64,
    pub weighted_length: f64,
}

impl BeamwidthChoice {
    pub fn beam_length(&self, omni_range: f64) -> f64 {
        omni_range * (TAU / self.theta_star).sqrt()
    }
}

/// Beam length of a constant-area sector: `r·sqrt(2π/θ)`.
pub fn sector_beam_length(width: f64, omni_range: f64) -> Result<f64> {
    if !(width > 0.0 && width <= TAU) {
        return Err(invalid(format!("beam width must lie in (0, 2π], got {width}")));
    }
    if width == TAU {
        return Ok(omni_range);
    }
    Ok(omni_range * (TAU / width).sqrt())
}

/// Width of the candidate sector whose length is `k` omnidirectional ranges.
pub fn candidate_width(k: u32) -> f64 {
    TAU / f64::from(k * k)
}

/// Probabilities that at least one of `neighborhood_size` uniformly placed
/// neighbours falls in the first, respectively last, annular region of a beam
/// of length `k·r` split into regions of radial width `r`.
pub fn region_presence_probs(length_multiple: u32, neighborhood_size: u32, omni_range: f64) -> Result<(f64, f64)> {
    if length_multiple < 1 {
        return Err(invalid("length multiple must be at least 1"));
    }
    if !(omni_range > 0.0) {
        return Err(invalid(format!("omni_range must be positive, got {omni_range}")));
    }
    let k = f64::from(length_multiple);
    let theta = candidate_width(length_multiple);
    let r2 = omni_range * omni_range;
    let disk = PI * r2;
    let first = theta * r2 / 2.0;
    let last = theta * r2 * (2.0 * k - 1.0) / 2.0;
    let at_least_one = |area: f64| {
        let miss = (1.0 - area / disk).clamp(0.0, 1.0);
        1.0 - miss.powi(neighborhood_size as i32)
    };
    Ok((at_least_one(first), at_least_one(last)))
}

/// Picks the candidate `θ = 2π/k²`, `k = 1..=max_multiple`, maximizing the
/// connectivity-weighted length `r(θ)·p_nf·p_nl`. Ties go to the smaller `k`.
pub fn optimize_beamwidth(neighborhood_size: u32, max_multiple: u32, omni_range: f64) -> Result<BeamwidthChoice> {
    if max_multiple < 1 {
        return Err(invalid("max_multiple must be at least 1"));
    }
    let mut best: Option<BeamwidthChoice> = None;
    for k in 1..=max_multiple {
        let theta = candidate_width(k);
        let (p_nf, p_nl) = region_presence_probs(k, neighborhood_size, omni_range)?;
        let weighted_length = sector_beam_length(theta, omni_range)? * p_nf * p_nl;
        if best.is_none_or(|b| weighted_length > b.weighted_length) {
            best = Some(BeamwidthChoice {
                theta_star: theta,
                length_multiple: k,
                p_nf,
                p_nl,
                weighted_length,
            });
        }
    }
    Ok(best.expect("at least one candidate"))
}

/// Element count for a ULA standing in for a sector of the given length:
/// `ceil(length / r)`.
pub fn elements_for_length(beam_length: f64, omni_range: f64) -> u32 {
    // absorb rounding in exact multiples, e.g. 3.0000000000000004
    (beam_length / omni_range - 1e-9).ceil().max(1.0) as u32
}

pub fn elements_for_beamwidth(choice: &BeamwidthChoice, omni_range: f64) -> u32 {
    elements_for_length(choice.beam_length(omni_range), omni_range)
}

pub fn sector_covers(origin: Point, beam: &SectorBeam, target: Point) -> Result<bool> {
    let d2 = origin.distance_sq(target);
    if d2 == 0.0 {
        return Err(invalid("coverage undefined for coincident points"));
    }
    if !in_reach(d2, beam.length * beam.length) {
        return Ok(false);
    }
    if beam.width >= TAU {
        return Ok(true);
    }
    let off = angle_diff(origin.bearing_to(target), beam.boresight).abs();
    Ok(off <= beam.width / 2.0)
}

/// Array-factor power gain of an `m`-element half-wavelength ULA steered to
/// `boresight`, evaluated toward `direction`. Peaks at `m`.
pub fn ula_gain(elements: u32, boresight: f64, direction: f64) -> f64 {
    if elements <= 1 {
        return 1.0;
    }
    let m = f64::from(elements);
    let psi = PI * (direction.cos() - boresight.cos());
    let denom = (psi / 2.0).sin();
    if denom.abs() < ARRAY_FACTOR_GUARD {
        return m;
    }
    let factor = (m * psi / 2.0).sin() / (m * denom);
    m * factor * factor
}

/// Received-power test `p_t·g_t·g_r / s^α >= p_r0` with omnidirectional
/// reception (`g_r = 1`).
pub fn ula_covers(origin: Point, beam: &UlaBeam, target: Point, omni_range: f64) -> Result<bool> {
    let d2 = origin.distance_sq(target);
    if d2 == 0.0 {
        return Err(invalid("coverage undefined for coincident points"));
    }
    let gain = beam.gain_toward(origin.bearing_to(target));
    let rx_gain = 1.0;
    // link budget relative to the calibrated single-element budget; exactly 1
    // when rx_threshold = tx_power / omni_range^α
    let excess = beam.tx_power * rx_gain / (beam.rx_threshold * omni_range.powf(beam.pathloss_exponent));
    let reach_sq = omni_range * omni_range * (gain * excess).powf(2.0 / beam.pathloss_exponent);
    Ok(in_reach(d2, reach_sq))
}
