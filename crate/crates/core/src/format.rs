//! Locale-independent number formatting shared by every text report.

/// Formats `x` with `digits` significant digits, trailing zeros trimmed.
///
/// Values whose magnitude falls outside [1e-4, 1e7) switch to scientific
/// notation (`-1.99e-06` style). NaN renders as `.`, the usual missing marker.
pub fn sig(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return ".".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let digits = digits.max(1);
    let mag = x.abs();
    if !(1e-4..1e7).contains(&mag) {
        let s = format!("{:.*e}", digits - 1, x);
        let (mant, exp) = s.split_once('e').expect("exponent");
        let exp: i32 = exp.parse().expect("integer exponent");
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{}e{}{:02}", trim_zeros(mant), sign, exp.abs());
    }
    // Round first so that e.g. 9.9999999 → 10 gets the right decimal count.
    let exp = mag.log10().floor() as i32;
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    let s = format!("{:.*}", decimals, x);
    let rounded: f64 = s.parse().expect("formatted float");
    let exp2 = if rounded == 0.0 {
        exp
    } else {
        rounded.abs().log10().floor() as i32
    };
    let s = if exp2 != exp {
        let decimals = (digits as i32 - 1 - exp2).max(0) as usize;
        format!("{:.*}", decimals, x)
    } else {
        s
    };
    trim_zeros(&s).to_string()
}

/// Seven significant digits, the precision of the regression tables.
pub fn sig7(x: f64) -> String {
    sig(x, 7)
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
