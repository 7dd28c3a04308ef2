//! Half-up decimal rendering for table output. Computation stays in full
//! precision; only the printed form is rounded.

use num_rational::Ratio;

/// Rounds an exact ratio half-up to `decimals` places.
pub fn ratio_half_up(value: Ratio<u64>, decimals: u32) -> String {
    let scale = 10u128.pow(decimals);
    let num = u128::from(*value.numer());
    let den = u128::from(*value.denom());
    let scaled = (2 * num * scale + den) / (2 * den);
    fixed(scaled, scale, decimals)
}

fn fixed(scaled: u128, scale: u128, decimals: u32) -> String {
    if decimals == 0 {
        return scaled.to_string();
    }
    format!("{}.{:0width$}", scaled / scale, scaled % scale, width = decimals as usize)
}

/// Rounds a float half away from zero to `decimals` places. Non-finite
/// values print as `inf`, `-inf` or `NaN`.
pub fn f64_half_up(value: f64, decimals: u32) -> String {
    if !value.is_finite() {
        return format!("{value}");
    }
    let factor = 10f64.powi(decimals as i32);
    let rounded = (value.abs() * factor + 0.5).floor() / factor;
    let s = format!("{:.*}", decimals as usize, rounded);
    if value < 0.0 && rounded != 0.0 {
        format!("-{s}")
    } else {
        s
    }
}

/// Scientific notation with `digits` significant digits, e.g. `5.733e-7`.
pub fn f64_sci(value: f64, digits: u32) -> String {
    if !value.is_finite() {
        return format!("{value}");
    }
    format!("{:.*e}", digits.saturating_sub(1) as usize, value)
}

/// Parses a rounded rendering back into a float for JSON output.
pub fn rounded_f64(value: Ratio<u64>, decimals: u32) -> f64 {
    ratio_half_up(value, decimals).parse().expect("fixed-point rendering")
}
