//! Tabulated one-dimensional spectra with linear interpolation.

use crate::error::CoreError;
use std::path::Path;

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl Table {
    pub fn new(name: &str, x: Vec<f64>, y: Vec<f64>) -> Result<Self, CoreError> {
        let bad = |reason: &str| CoreError::Table {
            name: name.to_string(),
            reason: reason.to_string(),
        };
        if x.len() != y.len() {
            return Err(bad("abscissa and ordinate lengths differ"));
        }
        if x.len() < 2 {
            return Err(bad("need at least two rows"));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(bad("non-finite value"));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(bad("abscissae must be strictly increasing"));
        }
        Ok(Self { x, y })
    }

    /// Reads a two-column CSV with a one-line header.
    pub fn from_csv(path: impl AsRef<Path>, name: &str) -> Result<Self, CoreError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| CoreError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_csv_str(&text, name).map_err(|e| match e {
            CoreError::Csv { reason, .. } => CoreError::Csv {
                path: path.display().to_string(),
                reason,
            },
            other => other,
        })
    }

    pub fn from_csv_str(text: &str, name: &str) -> Result<Self, CoreError> {
        let csv_err = |reason: String| CoreError::Csv {
            path: name.to_string(),
            reason,
        };
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let (mut x, mut y) = (Vec::new(), Vec::new());
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| csv_err(e.to_string()))?;
            if rec.len() != 2 {
                return Err(csv_err(format!("row {}: expected 2 columns", line + 2)));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| csv_err(format!("row {}: bad number `{s}`", line + 2)))
            };
            x.push(parse(&rec[0])?);
            y.push(parse(&rec[1])?);
        }
        Self::new(name, x, y)
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    fn locate(&self, x: f64) -> usize {
        // index i with x[i] <= x < x[i+1], clamped to the valid range
        match self.x.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(self.x.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.x.len() - 2),
        }
    }

    /// Linear interpolation, held constant beyond the table ends.
    pub fn interp_clamped(&self, x: f64) -> f64 {
        let n = self.x.len();
        if x <= self.x[0] {
            return self.y[0];
        }
        if x >= self.x[n - 1] {
            return self.y[n - 1];
        }
        self.lerp(x)
    }

    /// Linear interpolation, zero outside the table.
    pub fn interp_or_zero(&self, x: f64) -> f64 {
        let n = self.x.len();
        if x < self.x[0] || x > self.x[n - 1] {
            return 0.0;
        }
        self.lerp(x)
    }

    fn lerp(&self, x: f64) -> f64 {
        let i = self.locate(x);
        let (x0, x1) = (self.x[i], self.x[i + 1]);
        let t = (x - x0) / (x1 - x0);
        self.y[i] + t * (self.y[i + 1] - self.y[i])
    }

    pub fn to_csv_string(&self, header: (&str, &str)) -> String {
        let mut s = format!("{},{}\n", header.0, header.1);
        for (a, b) in self.x.iter().zip(&self.y) {
            s.push_str(&format!("{a},{b}\n"));
        }
        s
    }

    pub fn map_y(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            x: self.x.clone(),
            y: self.y.iter().map(|&v| f(v)).collect(),
        }
    }
}
