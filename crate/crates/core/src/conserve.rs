//! Conservation bookkeeping shared by both schemes.
//!
//! A conserved functional `G` changes at the rate
//! `dG/dt = sum_k sum_x w_x (dG/dx_k) (dx_k/dt)`, where `w` is the measure
//! turning the scheme's derivatives into partial derivatives (cell areas for
//! per-area derivatives, ones otherwise). The harness evaluates this sum and
//! the sum of absolute values of its terms, nothing scheme-specific.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// One prognostic field's contribution to a contraction.
#[derive(Clone, Copy, Debug)]
pub struct Term<'a> {
    pub derivative: &'a [f64],
    pub tendency: &'a [f64],
    pub measure: Option<&'a [f64]>,
}

impl<'a> Term<'a> {
    pub fn new(derivative: &'a [f64], tendency: &'a [f64]) -> Self {
        Term {
            derivative,
            tendency,
            measure: None,
        }
    }

    pub fn weighted(derivative: &'a [f64], tendency: &'a [f64], measure: &'a [f64]) -> Self {
        Term {
            derivative,
            tendency,
            measure: Some(measure),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Contraction {
    /// Signed rate `dG/dt`.
    pub rate: f64,
    /// Sum of the absolute values of the individual terms.
    pub magnitude: f64,
}

impl Contraction {
    /// `|rate| / magnitude`, or zero when every term vanishes.
    pub fn relative(&self) -> f64 {
        if self.magnitude == 0.0 {
            0.0
        } else {
            self.rate.abs() / self.magnitude
        }
    }
}

pub fn contract(terms: &[Term]) -> Contraction {
    let mut rate = 0.0;
    let mut magnitude = 0.0;
    for t in terms {
        assert_eq!(t.derivative.len(), t.tendency.len(), "contraction operand lengths");
        for (k, (a, b)) in t.derivative.iter().zip(t.tendency).enumerate() {
            let w = t.measure.map_or(1.0, |m| m[k]);
            let x = w * a * b;
            rate += x;
            magnitude += x.abs();
        }
    }
    Contraction { rate, magnitude }
}

/// Energy and enstrophy contractions of one state.
pub fn contraction_residuals(energy: &[Term], enstrophy: &[Term]) -> (Contraction, Contraction) {
    (contract(energy), contract(enstrophy))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    CGrid,
    ZGrid,
}

impl Scheme {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "cgrid" => Ok(Scheme::CGrid),
            "zgrid" => Ok(Scheme::ZGrid),
            _ => Err(Error::Unknown {
                what: "scheme",
                name: name.into(),
            }),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::CGrid => "cgrid",
            Scheme::ZGrid => "zgrid",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Conserved quantities and contraction residuals at one instant.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsRecord {
    pub scheme: Scheme,
    pub step: usize,
    pub time: f64,
    pub mass: f64,
    pub circulation: f64,
    pub energy: f64,
    pub enstrophy: f64,
    /// `(E - E0) / |E0|`, filled in by [`Series::push`].
    pub energy_drift: f64,
    pub enstrophy_drift: f64,
    pub energy_rate: Contraction,
    pub enstrophy_rate: Contraction,
}

pub const CSV_COLUMNS: [&str; 15] = [
    "scheme",
    "step",
    "time",
    "mass",
    "circulation",
    "energy",
    "enstrophy",
    "mass_drift",
    "energy_drift",
    "enstrophy_drift",
    "energy_rate",
    "energy_rate_relative",
    "enstrophy_rate",
    "enstrophy_rate_relative",
    "circulation_drift",
];

fn drift(x: f64, x0: f64) -> f64 {
    if x0 == 0.0 {
        x - x0
    } else {
        (x - x0) / x0.abs()
    }
}

/// Time series of records with drifts measured against the first record.
#[derive(Clone, Debug, Default)]
pub struct Series {
    pub records: Vec<DiagnosticsRecord>,
}

impl Series {
    pub fn push(&mut self, mut r: DiagnosticsRecord) -> &DiagnosticsRecord {
        let (e0, z0) = match self.records.first() {
            Some(first) => (first.energy, first.enstrophy),
            None => (r.energy, r.enstrophy),
        };
        r.energy_drift = drift(r.energy, e0);
        r.enstrophy_drift = drift(r.enstrophy, z0);
        self.records.push(r);
        self.records.last().expect("just pushed")
    }

    pub fn max_abs_energy_drift(&self) -> f64 {
        self.records.iter().fold(0.0, |m, r| m.max(r.energy_drift.abs()))
    }

    pub fn max_abs_enstrophy_drift(&self) -> f64 {
        self.records.iter().fold(0.0, |m, r| m.max(r.enstrophy_drift.abs()))
    }

    pub fn max_energy_rate(&self) -> f64 {
        self.records.iter().fold(0.0, |m, r| m.max(r.energy_rate.relative()))
    }

    pub fn max_enstrophy_rate(&self) -> f64 {
        self.records.iter().fold(0.0, |m, r| m.max(r.enstrophy_rate.relative()))
    }

    pub fn csv_row(&self, r: &DiagnosticsRecord) -> String {
        let first = self.records.first().unwrap_or(r);
        let reals = [
            r.time,
            r.mass,
            r.circulation,
            r.energy,
            r.enstrophy,
            drift(r.mass, first.mass),
            r.energy_drift,
            r.enstrophy_drift,
            r.energy_rate.rate,
            r.energy_rate.relative(),
            r.enstrophy_rate.rate,
            r.enstrophy_rate.relative(),
            drift(r.circulation, first.circulation),
        ];
        let mut row = format!("{},{}", r.scheme, r.step);
        for x in reals {
            row.push_str(&format!(",{x:.16e}"));
        }
        row
    }

    pub fn to_csv(&self) -> String {
        let mut out = CSV_COLUMNS.join(",");
        out.push('\n');
        for r in &self.records {
            out.push_str(&self.csv_row(r));
            out.push('\n');
        }
        out
    }
}

/// Appends records to a CSV file as they arrive.
pub struct CsvWriter {
    path: PathBuf,
    file: std::io::BufWriter<std::fs::File>,
}

impl CsvWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = CsvWriter {
            path: path.to_path_buf(),
            file: std::io::BufWriter::new(f),
        };
        w.line(&CSV_COLUMNS.join(","))?;
        Ok(w)
    }

    fn line(&mut self, s: &str) -> Result<()> {
        writeln!(self.file, "{s}").map_err(|e| Error::io(&self.path, e))
    }

    /// Writes the most recent record of `series`.
    pub fn append(&mut self, series: &Series) -> Result<()> {
        if let Some(r) = series.records.last() {
            let row = series.csv_row(r);
            self.line(&row)?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.file.flush().map_err(|e| Error::io(&self.path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(step: usize, energy: f64) -> DiagnosticsRecord {
        DiagnosticsRecord {
            scheme: Scheme::ZGrid,
            step,
            time: step as f64,
            mass: 1.0,
            circulation: 0.0,
            energy,
            enstrophy: 2.0,
            energy_drift: f64::NAN,
            enstrophy_drift: f64::NAN,
            energy_rate: Contraction { rate: 0.0, magnitude: 0.0 },
            enstrophy_rate: Contraction { rate: 0.0, magnitude: 0.0 },
        }
    }

    #[test]
    fn contraction_weights_and_relative() {
        let c = contract(&[
            Term::weighted(&[1.0, 2.0], &[3.0, -1.0], &[2.0, 3.0]),
            Term::new(&[1.0], &[0.0]),
        ]);
        assert_eq!(c.rate, 0.0);
        assert_eq!(c.magnitude, 12.0);
        assert_eq!(c.relative(), 0.0);
    }

    #[test]
    fn drifts_are_relative_to_first_record() {
        let mut s = Series::default();
        s.push(record(0, 4.0));
        s.push(record(1, 5.0));
        assert_eq!(s.records[0].energy_drift, 0.0);
        assert_eq!(s.records[1].energy_drift, 0.25);
        assert_eq!(s.max_abs_enstrophy_drift(), 0.0);
        let csv = s.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1].split(',').count(), CSV_COLUMNS.len());
        assert!(lines[2].contains("2.5000000000000000e-1"));
    }
}
