//! CSV and JSON artifacts with fixed float formatting.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::coherence::ModeSpectrum;
use crate::grid::TemporalGrid;
use crate::linalg::CMat;
use crate::state::{CharFunction, WignerGrid};
use crate::Result;

/// 17 significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Comment lines (`# ...`), one header row and numeric rows.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CsvTable {
    pub comments: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), ..Self::default() }
    }

    pub fn comment(mut self, line: impl Into<String>) -> Self {
        self.comments.push(line.into());
        self
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.comments {
            let _ = writeln!(s, "# {c}");
        }
        let _ = writeln!(s, "{}", self.header.join(","));
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|&x| fmt_f64(x)).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render())?;
        Ok(())
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize + ?Sized>(value: &T, path: &Path) -> Result<()> {
    std::fs::write(path, to_json_string(value)?)?;
    Ok(())
}

/// Real or imaginary part of a density matrix, one matrix row per CSV row.
pub fn matrix_csv(m: &CMat, imaginary: bool) -> CsvTable {
    let n = m.ncols();
    let mut t = CsvTable::new((0..n).map(|j| format!("col{j}")))
        .comment(format!("{} part of a {}x{} Fock-basis density matrix", if imaginary { "imaginary" } else { "real" }, m.nrows(), n));
    for i in 0..m.nrows() {
        t.push((0..n).map(|j| if imaginary { m[(i, j)].im } else { m[(i, j)].re }).collect());
    }
    t
}

/// Long format `x, p, w`, with `x` varying fastest.
pub fn wigner_csv(w: &WignerGrid) -> CsvTable {
    let g = w.grid;
    let mut t = CsvTable::new(["x", "p", "w"])
        .comment("Wigner function W(x, p), a = (x + ip)/sqrt(2), dimensionless quadratures")
        .comment(format!("extent={} n_side={} spacing={}", fmt_f64(g.extent), g.n_side, fmt_f64(g.spacing())));
    for ip in 0..g.n_side {
        for ix in 0..g.n_side {
            t.push(vec![g.coord(ix), g.coord(ip), w.at(ip, ix)]);
        }
    }
    t
}

/// Long format `beta_re, beta_im, chi_re, chi_im`.
pub fn char_csv(chi: &CharFunction) -> CsvTable {
    let g = *chi.grid();
    let mut t = CsvTable::new(["beta_re", "beta_im", "chi_re", "chi_im"])
        .comment("characteristic function chi(beta) = Tr[rho D(beta)]")
        .comment(format!("extent={} n_side={}", fmt_f64(g.extent), g.n_side));
    for i in 0..g.n_side {
        for j in 0..g.n_side {
            let (b, c) = (g.beta(i, j), chi.at(i, j));
            t.push(vec![b.re, b.im, c.re, c.im]);
        }
    }
    t
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumSummary {
    pub total: f64,
    pub seeded: Vec<f64>,
    pub vacuum: Vec<f64>,
    pub seeded_remainder: f64,
    pub vacuum_remainder: f64,
}

impl From<&ModeSpectrum> for SpectrumSummary {
    fn from(s: &ModeSpectrum) -> Self {
        Self {
            total: s.total,
            seeded: s.seeded.iter().map(|o| o.occupation).collect(),
            vacuum: s.vacuum.iter().map(|o| o.occupation).collect(),
            seeded_remainder: s.seeded_remainder,
            vacuum_remainder: s.vacuum_remainder,
        }
    }
}

/// Time column followed by real/imaginary columns of the seeded modes `v_i`
/// and the leading `max_vacuum` vacuum modes `w_i`.
pub fn modes_csv(spectrum: &ModeSpectrum, grid: &TemporalGrid, max_vacuum: usize) -> CsvTable {
    let mut header = vec!["t".to_string()];
    let mut cols: Vec<&[crate::C64]> = Vec::new();
    for (i, o) in spectrum.seeded.iter().enumerate() {
        header.push(format!("v{}_re", i + 1));
        header.push(format!("v{}_im", i + 1));
        cols.push(o.mode.amplitudes());
    }
    for (i, o) in spectrum.vacuum.iter().take(max_vacuum).enumerate() {
        header.push(format!("w{}_re", i + 1));
        header.push(format!("w{}_im", i + 1));
        cols.push(o.mode.amplitudes());
    }
    let mut t = CsvTable::new(header)
        .comment("temporal mode amplitudes, t in units of 1/gamma, modes normalized to int |v|^2 dt = 1")
        .comment(format!(
            "t_start={} t_end={} n_points={}",
            fmt_f64(grid.t_start()),
            fmt_f64(grid.t_end()),
            grid.n_points()
        ));
    for k in 0..grid.n_points() {
        let mut row = vec![grid.point(k)];
        for c in &cols {
            row.push(c[k].re);
            row.push(c[k].im);
        }
        t.push(row);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for x in [0.0, 1.0, -2.5e-300, std::f64::consts::PI, 1.0 / 3.0, f64::MAX] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn table_render() {
        let mut t = CsvTable::new(["a", "b"]).comment("units: none");
        t.push(vec![1.0, -0.5]);
        assert_eq!(t.render(), "# units: none\na,b\n1.0000000000000000e0,-5.0000000000000000e-1\n");
    }
}
