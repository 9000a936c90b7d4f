//! Fixed number formatting for output files.

/// `%g` with six significant digits: trailing zeros dropped, exponent form
/// below 1e-4 and from 1e6 up.
pub fn g6(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        let decimals = (5 - exp) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Shortest text that parses back to the same value.
pub fn exact(v: f64) -> String {
    format!("{v}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g6_matches_printf() {
        let cases = [
            (0.6, "0.6"),
            (1.0, "1"),
            (0.123456789, "0.123457"),
            (0.99999951, "1"),
            (123456.7, "123457"),
            (1234567.0, "1.23457e+06"),
            (0.0001, "0.0001"),
            (0.00001234, "1.234e-05"),
            (-2.5, "-2.5"),
            (-0.0, "0"),
            (0.05, "0.05"),
            (100.0, "100"),
        ];
        for (v, want) in cases {
            assert_eq!(g6(v), want, "{v}");
        }
    }

    #[test]
    fn exact_round_trips() {
        for v in [0.1, 1.0 / 3.0, -7.25e-9, 12345.678901234567, 1e300] {
            assert_eq!(exact(v).parse::<f64>().unwrap(), v);
        }
    }
}
