//! Locale-free number formatting.

use hinf_core::linalg::ComplexMatrix;
use num_complex::Complex64;

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `printf("%.*g")`: `digits` significant digits, trailing zeros removed.
pub fn sig(v: f64, digits: usize) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, v);
    let (mant, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        format!("{}e{exp}", trim_zeros(mant))
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

pub fn complex(z: Complex64) -> String {
    if z.im == 0.0 {
        sig(z.re, 9)
    } else {
        format!("{}{}{}i", sig(z.re, 9), if z.im < 0.0 { "-" } else { "+" }, sig(z.im.abs(), 9))
    }
}

pub fn matrix(m: &ComplexMatrix) -> String {
    let mut s = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| complex(m[(i, j)])).collect();
        s.push_str("  [");
        s.push_str(&row.join(", "));
        s.push_str("]\n");
    }
    s
}
