//! Deterministic number formatting for text exports.

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        // normalise -0
        return "0".to_string();
    }
    let s = format!("{x:?}");
    match s.strip_suffix(".0") {
        Some(int) => int.to_string(),
        None => s,
    }
}

#[cfg(test)]
mod tests {
    use super::fmt_f64;

    #[test]
    fn round_trips() {
        for &x in &[0.1, 1.0, -2.5, 1e-300, 6.02e23, f64::MAX, 1.0 / 3.0] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(-0.0), "0");
        assert_eq!(fmt_f64(3.0), "3");
    }
}
