//! CSV emission with `%.12g` number formatting.

use num_complex::Complex64;
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    /// Written as two columns, real then imaginary.
    Complex(Complex64),
    Text(String),
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<Complex64> for Cell {
    fn from(v: Complex64) -> Self {
        Cell::Complex(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// C `printf("%.12g")`.
pub fn format_g(v: f64) -> String {
    const P: i32 = 12;
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", (P - 1) as usize, v);
    let (mant, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..P).contains(&exp) {
        let mant = trim_zeros(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mant}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (P - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, v)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn render(cell: &Cell, out: &mut Vec<String>) {
    match cell {
        Cell::Int(v) => out.push(v.to_string()),
        Cell::Real(v) => out.push(format_g(*v)),
        Cell::Complex(z) => {
            out.push(format_g(z.re));
            out.push(format_g(z.im));
        }
        Cell::Text(s) => out.push(quote(s)),
    }
}

/// Writes the header and rows; complex header names should already carry `_re`/`_im` pairs.
pub fn write_table_to<W: Write>(header: &[&str], rows: &[Vec<Cell>], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{}", header.iter().map(|h| quote(h)).collect::<Vec<_>>().join(","))?;
    for row in rows {
        let mut fields = Vec::with_capacity(header.len());
        for c in row {
            render(c, &mut fields);
        }
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(())
}

pub fn write_table(header: &[&str], rows: &[Vec<Cell>], path: &Path) -> std::io::Result<()> {
    let mut buf = Vec::new();
    write_table_to(header, rows, &mut buf)?;
    std::fs::write(path, buf)
}

/// Header names `name_re`, `name_im`.
pub fn complex_columns(name: &str) -> [String; 2] {
    [format!("{name}_re"), format!("{name}_im")]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_format_matches_printf() {
        let cases = [
            (1.0, "1"),
            (0.1, "0.1"),
            (1.0 / 3.0, "0.333333333333"),
            (2.0 * std::f64::consts::PI * std::f64::consts::PI, "19.7392088022"),
            (1e-5, "1e-05"),
            (1.5e-4, "0.00015"),
            (123456789012.0, "123456789012"),
            (1234567890123.0, "1.23456789012e+12"),
            (-2.5e100, "-2.5e+100"),
            (0.0, "0"),
        ];
        for (v, s) in cases {
            assert_eq!(format_g(v), s, "{v}");
        }
    }

    #[test]
    fn empty_rows_give_header_only() {
        let mut buf = Vec::new();
        write_table_to(&["a", "b"], &[], &mut buf).unwrap();
        assert_eq!(buf, b"a,b\n");
    }

    #[test]
    fn complex_cells_take_two_columns() {
        let mut buf = Vec::new();
        let rows = vec![vec![Cell::Int(3), Cell::Complex(Complex64::new(0.5, -2.0)), Cell::from("x,y")]];
        write_table_to(&["n", "z_re", "z_im", "label"], &rows, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "n,z_re,z_im,label\n3,0.5,-2,\"x,y\"\n");
    }
}
