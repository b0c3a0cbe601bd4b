//! Hexcone conversions between RGB (components in [0,255]) and HSV (hue in
//! radians [0,2π), saturation and value in [0,1]).

use crate::error::{Error, Result};
use std::f64::consts::TAU;

/// Converts an RGB triple to (hue, saturation, value). Achromatic inputs
/// (max = min) report hue 0 by convention; black reports saturation 0.
pub fn rgb_to_hsv(r: f64, g: f64, b: f64) -> Result<(f64, f64, f64)> {
    for (name, v) in [("r", r), ("g", g), ("b", b)] {
        if !(v.is_finite() && (0.0..=255.0).contains(&v)) {
            return Err(Error::Input(format!(
                "{name} component must be in [0,255], got {v}"
            )));
        }
    }
    let (r, g, b) = (r / 255.0, g / 255.0, b / 255.0);
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let hue_sixths = if delta == 0.0 {
        0.0
    } else if max == r {
        ((g - b) / delta).rem_euclid(6.0)
    } else if max == g {
        (b - r) / delta + 2.0
    } else {
        (r - g) / delta + 4.0
    };
    let h = (hue_sixths * TAU / 6.0).rem_euclid(TAU);
    let s = if max == 0.0 { 0.0 } else { delta / max };
    Ok((h, s, max))
}

/// Converts (hue, saturation, value) back to an RGB triple in [0,255].
pub fn hsv_to_rgb(h: f64, s: f64, v: f64) -> Result<(f64, f64, f64)> {
    if !(h.is_finite() && (0.0..TAU).contains(&h)) {
        return Err(Error::Input(format!("hue must be in [0,2π), got {h}")));
    }
    for (name, x) in [("saturation", s), ("value", v)] {
        if !(x.is_finite() && (0.0..=1.0).contains(&x)) {
            return Err(Error::Input(format!("{name} must be in [0,1], got {x}")));
        }
    }
    let c = v * s;
    let sector = h * 6.0 / TAU;
    let x = c * (1.0 - (sector.rem_euclid(2.0) - 1.0).abs());
    let (r1, g1, b1) = match sector as usize {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    Ok(((r1 + m) * 255.0, (g1 + m) * 255.0, (b1 + m) * 255.0))
}
