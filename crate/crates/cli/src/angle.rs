//! Angle arguments: raw radians, or a multiple of π written with a `pi`
//! suffix (`0.25pi`, `pi`, `-0.5pi`).

use std::f64::consts::PI;

pub fn parse_angle(s: &str) -> Result<f64, String> {
    let t = s.trim();
    let value = match t.strip_suffix("pi") {
        Some(coef) => {
            let c = match coef.trim() {
                "" | "+" => 1.0,
                "-" => -1.0,
                c => c
                    .trim_end_matches('*')
                    .parse::<f64>()
                    .map_err(|_| format!("cannot read `{s}` as a multiple of pi"))?,
            };
            c * PI
        }
        None => t.parse::<f64>().map_err(|_| format!("cannot read `{s}` as an angle"))?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("angle `{s}` is not finite"))
    }
}

/// Short label for file names, in multiples of π.
pub fn pi_label(alpha: f64) -> String {
    let c = alpha / PI;
    let r = (c * 1e6).round() / 1e6;
    format!("{r}pi")
}
