//! Plain-text rendering shared by the table outputs.

use wce_core::numfield::CycScalar;
use wce_core::poly::Poly;

/// Decimal rendering of a float with about twelve significant digits.
fn decimal(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let a = x.abs();
    if (1e-4..1e9).contains(&a) {
        let digits = (11 - a.log10().floor() as i32).max(0) as usize;
        let s = format!("{x:.digits$}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" { "0".into() } else { s.to_string() }
    } else {
        format!("{x:.11e}")
    }
}

/// Float approximation of an exact scalar, complex when it is not real.
pub fn approx(c: &CycScalar) -> String {
    let (re, im) = c.to_complex();
    let scale = re.abs().max(im.abs()).max(1e-300);
    if im.abs() <= 1e-12 * scale {
        decimal(re)
    } else if re.abs() <= 1e-12 * scale {
        format!("{}i", decimal(im))
    } else {
        format!("{}{}{}i", decimal(re), if im < 0.0 { "-" } else { "+" }, decimal(im.abs()))
    }
}

/// `exact  (≈ approx)`
pub fn scalar(c: &CycScalar) -> String {
    format!("{c}  (≈ {})", approx(c))
}

pub fn poly_monomial(exps: &[u32], names: &[String]) -> String {
    let parts: Vec<String> = exps
        .iter()
        .zip(names)
        .filter(|(&e, _)| e > 0)
        .map(|(&e, n)| if e == 1 { n.clone() } else { format!("{n}^{e}") })
        .collect();
    if parts.is_empty() { "1".into() } else { parts.join("*") }
}

/// One line per term, ordered by the polynomial's own term order.
pub fn poly_table(p: &Poly, names: &[String]) -> Vec<String> {
    let rows: Vec<(String, &CycScalar)> = p.terms().map(|(e, c)| (poly_monomial(e, names), c)).collect();
    let width = rows.iter().map(|(m, _)| m.chars().count()).max().unwrap_or(0);
    rows.into_iter()
        .map(|(m, c)| format!("  {m:<width$}  {}", scalar(c)))
        .collect()
}
