use std::io::Read;

use super::AnalysisError;

/// Samples of a function on an increasing grid.
///
/// Values and derivatives between the nodes come from the 5-point Lagrange
/// polynomial on the nearest nodes; at interior nodes of a uniform grid the
/// derivative is the 4th-order central difference, near the ends it is the
/// one-sided stencil.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledFunction {
    grid: Vec<f64>,
    values: Vec<f64>,
}

const STENCIL: usize = 5;

impl SampledFunction {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self, AnalysisError> {
        if grid.len() != values.len() {
            return Err(AnalysisError::InvalidInput(format!(
                "grid has {} points but {} values",
                grid.len(),
                values.len()
            )));
        }
        if grid.len() < STENCIL {
            return Err(AnalysisError::InvalidInput(format!(
                "need at least {STENCIL} samples"
            )));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0]))
            || grid.iter().chain(&values).any(|v| !v.is_finite())
        {
            return Err(AnalysisError::InvalidInput(
                "grid must be finite and strictly increasing".into(),
            ));
        }
        Ok(SampledFunction { grid, values })
    }

    /// Sample `f` at `n` evenly spaced points of `[a, b]`.
    pub fn tabulate<F: Fn(f64) -> f64>(
        f: F,
        a: f64,
        b: f64,
        n: usize,
    ) -> Result<Self, AnalysisError> {
        let step = (b - a) / (n.max(2) - 1) as f64;
        let grid: Vec<f64> = (0..n).map(|m| a + step * m as f64).collect();
        let values = grid.iter().map(|&t| f(t)).collect();
        Self::new(grid, values)
    }

    /// Parse `h,value` rows; a header row is skipped when present.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self, AnalysisError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut grid = Vec::new();
        let mut values = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| AnalysisError::InvalidInput(format!("csv: {e}")))?;
            if record.len() != 2 {
                return Err(AnalysisError::InvalidInput(format!(
                    "csv row {} must have two columns",
                    line + 1
                )));
            }
            let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
            match parsed {
                (Ok(h), Ok(v)) => {
                    grid.push(h);
                    values.push(v);
                }
                _ if line == 0 => continue,
                _ => {
                    return Err(AnalysisError::InvalidInput(format!(
                        "csv row {} is not numeric",
                        line + 1
                    )))
                }
            }
        }
        Self::new(grid, values)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("h,value\n");
        for (h, v) in self.grid.iter().zip(&self.values) {
            out.push_str(&format!("{h},{v}\n"));
        }
        out
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.grid[0], self.grid[self.grid.len() - 1])
    }

    fn window(&self, t: f64) -> usize {
        let n = self.grid.len();
        let pos = self.grid.partition_point(|&x| x < t);
        pos.saturating_sub(STENCIL / 2).min(n - STENCIL)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let s = self.window(t);
        let xs = &self.grid[s..s + STENCIL];
        let ys = &self.values[s..s + STENCIL];
        (0..STENCIL)
            .map(|j| {
                let basis: f64 = (0..STENCIL)
                    .filter(|&m| m != j)
                    .map(|m| (t - xs[m]) / (xs[j] - xs[m]))
                    .product();
                ys[j] * basis
            })
            .sum()
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let s = self.window(t);
        let xs = &self.grid[s..s + STENCIL];
        let ys = &self.values[s..s + STENCIL];
        let mut total = 0.0;
        for j in 0..STENCIL {
            let mut dj = 0.0;
            for m in (0..STENCIL).filter(|&m| m != j) {
                let rest: f64 = (0..STENCIL)
                    .filter(|&l| l != j && l != m)
                    .map(|l| (t - xs[l]) / (xs[j] - xs[l]))
                    .product();
                dj += rest / (xs[j] - xs[m]);
            }
            total += ys[j] * dj;
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartic_reproduced() {
        let f = |t: f64| 1.0 + t - 2.0 * t.powi(3) + t.powi(4);
        let s = SampledFunction::tabulate(f, 0.0, 1.0, 21).unwrap();
        for &t in &[0.0, 0.013, 0.5, 0.77, 1.0] {
            assert!((s.eval(t) - f(t)).abs() < 1e-12);
            let df = 1.0 - 6.0 * t * t + 4.0 * t.powi(3);
            assert!((s.derivative(t) - df).abs() < 1e-10);
        }
    }

    #[test]
    fn csv_with_header() {
        let text = "h,value\n0,1\n0.1,1.1\n0.2,1.2\n0.3,1.3\n0.4,1.4\n";
        let s = SampledFunction::from_csv(text.as_bytes()).unwrap();
        assert_eq!(s.grid().len(), 5);
        assert!((s.eval(0.25) - 1.25).abs() < 1e-12);
        let back = SampledFunction::from_csv(s.to_csv().as_bytes()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(SampledFunction::new(vec![0.0, 1.0, 1.0, 2.0, 3.0], vec![0.0; 5]).is_err());
        assert!(SampledFunction::new(vec![0.0, 1.0], vec![0.0; 2]).is_err());
        assert!(SampledFunction::from_csv("h,value\n0,a\n".as_bytes()).is_err());
    }
}
