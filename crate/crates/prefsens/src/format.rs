//! Human-readable numbers: six significant digits, trailing zeros trimmed,
//! scientific notation outside `[1e-4, 1e6)`.

pub const SIGNIFICANT_DIGITS: usize = 6;

pub fn sig(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if !(-4..SIGNIFICANT_DIGITS as i32).contains(&exp) {
        format!("{}e{exp}", trim(mantissa))
    } else {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp) as usize;
        trim(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::sig;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig(0.5012786415711944), "0.501279");
        assert_eq!(sig(22.37034331628926), "22.3703");
        assert_eq!(sig(0.073919095806), "0.0739191");
        assert_eq!(sig(1.0), "1");
        assert_eq!(sig(-0.5), "-0.5");
        assert_eq!(sig(0.0), "0");
        assert_eq!(sig(3.2134817e-5), "3.21348e-5");
        assert_eq!(sig(999999.7), "1e6");
        assert_eq!(sig(123456.4), "123456");
        assert_eq!(sig(f64::INFINITY), "inf");
    }
}
