//! Decimal output at a fixed number of significant digits.

pub const SIG_DIGITS: usize = 10;

/// `x` rounded to [`SIG_DIGITS`] significant digits, printed in the shortest
/// form that parses back to the rounded value. Re-formatting a parsed output
/// reproduces it exactly.
pub fn fmt_sig(x: f64) -> String {
    fmt_sig_n(x, SIG_DIGITS)
}

pub fn fmt_sig_n(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let rounded: f64 = format!("{:.*e}", digits.max(1) - 1, x)
        .parse()
        .expect("scientific notation parses");
    let a = rounded.abs();
    if (1e-6..1e15).contains(&a) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounds_to_ten_digits() {
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(-0.1), "-0.1");
        assert_eq!(fmt_sig(std::f64::consts::PI), "3.141592654");
        assert_eq!(fmt_sig(123456.78901234), "123456.789");
        assert_eq!(fmt_sig(1.5e-9), "1.5e-9");
        assert_eq!(fmt_sig(0.0), "0");
    }

    #[test]
    fn formatting_is_idempotent() {
        for x in [1.0 / 3.0, 2.0 / 7.0 * 1e7, -9.87654321012345e-3, 1e20 / 3.0] {
            let s = fmt_sig(x);
            let y: f64 = s.parse().unwrap();
            assert_eq!(fmt_sig(y), s);
        }
    }
}
