//! Tabulated compaction equation of state p(E) with Hencky strain E = ln(h/h0).

use std::path::Path;

use crate::error::{Error, Result};

/// Pascal per bar.
pub const BAR: f64 = 1.0e5;

/// Averaged rising flank of the compaction trials for UPPH-GF SMC
/// (Hencky strain, pressure in bar).
pub const UPPH_GF_TABLE_BAR: [(f64, f64); 20] = [
    (0.0, 0.0),
    (-0.0770, 6.3),
    (-0.1098, 12.6),
    (-0.1325, 18.9),
    (-0.1496, 25.3),
    (-0.1638, 31.6),
    (-0.1749, 37.9),
    (-0.1840, 44.2),
    (-0.1923, 50.5),
    (-0.1982, 56.8),
    (-0.2029, 63.2),
    (-0.2073, 69.5),
    (-0.2116, 75.8),
    (-0.2167, 82.1),
    (-0.2219, 88.4),
    (-0.2270, 94.7),
    (-0.2317, 101.1),
    (-0.2349, 107.4),
    (-0.2378, 113.7),
    (-0.2407, 120.0),
];

/// Piecewise-linear pressure over compressive Hencky strain.
///
/// Tension (E > 0) gives zero pressure; strains beyond the last knot continue
/// with the slope of the final segment.
#[derive(Debug, Clone, PartialEq)]
pub struct EquationOfState {
    /// (strain, pressure in Pa), strain strictly decreasing from 0.
    knots: Vec<(f64, f64)>,
    /// dp/d|E| used below the last knot (Pa).
    extrapolation_slope: f64,
}

impl EquationOfState {
    /// Builds from knots given in Pa.
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidInput("equation of state needs at least two knots".into()));
        }
        if knots[0] != (0.0, 0.0) {
            return Err(Error::InvalidInput(format!(
                "first knot must be (0, 0), got {:?}",
                knots[0]
            )));
        }
        for w in knots.windows(2) {
            if !(w[1].0 < w[0].0) {
                return Err(Error::InvalidInput(format!(
                    "strain must decrease strictly between knots ({} -> {})",
                    w[0].0, w[1].0
                )));
            }
            if !(w[1].1 > w[0].1) {
                return Err(Error::InvalidInput(format!(
                    "pressure must increase strictly between knots ({} -> {})",
                    w[0].1, w[1].1
                )));
            }
        }
        let n = knots.len();
        let (e0, p0) = knots[n - 2];
        let (e1, p1) = knots[n - 1];
        let extrapolation_slope = (p1 - p0) / (e0 - e1);
        Ok(Self {
            knots,
            extrapolation_slope,
        })
    }

    /// Builds from (strain, pressure in bar) rows.
    pub fn from_bar_table(rows: &[(f64, f64)]) -> Result<Self> {
        Self::new(rows.iter().map(|&(e, p)| (e, p * BAR)).collect())
    }

    pub fn upph_gf() -> Self {
        Self::from_bar_table(&UPPH_GF_TABLE_BAR).expect("built-in table is valid")
    }

    /// Two-column CSV (strain, pressure in bar) with a header row.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_path(path)
            .map_err(|source| Error::Csv {
                path: path.to_path_buf(),
                source,
            })?;
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|source| Error::Csv {
                path: path.to_path_buf(),
                source,
            })?;
            let parse = |i: usize| -> Result<f64> {
                rec.get(i)
                    .ok_or_else(|| Error::Parse {
                        path: path.to_path_buf(),
                        message: format!("row {:?} has fewer than two columns", rec),
                    })?
                    .parse::<f64>()
                    .map_err(|e| Error::Parse {
                        path: path.to_path_buf(),
                        message: format!("{e} in row {:?}", rec),
                    })
            };
            rows.push((parse(0)?, parse(1)?));
        }
        Self::from_bar_table(&rows).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    /// Multiplies every pressure by `factor` (e.g. 1e6 for a near-incompressible limit).
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            knots: self.knots.iter().map(|&(e, p)| (e, p * factor)).collect(),
            extrapolation_slope: self.extrapolation_slope * factor,
        }
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn extrapolation_slope(&self) -> f64 {
        self.extrapolation_slope
    }

    /// Pressure (Pa) at Hencky strain `strain`.
    pub fn pressure(&self, strain: f64) -> f64 {
        if strain >= 0.0 {
            return 0.0;
        }
        let last = self.knots[self.knots.len() - 1];
        if strain <= last.0 {
            return last.1 + self.extrapolation_slope * (last.0 - strain);
        }
        // knots are sorted by decreasing strain
        let idx = self.knots.partition_point(|&(e, _)| e > strain);
        let (e1, p1) = self.knots[idx];
        let (e0, p0) = self.knots[idx - 1];
        p0 + (p1 - p0) * (strain - e0) / (e1 - e0)
    }

    /// Pressure at density `rho` given the uncompacted density `rho0`.
    pub fn pressure_from_density(&self, rho: f64, rho0: f64) -> f64 {
        if rho <= rho0 {
            return 0.0;
        }
        self.pressure(-(rho / rho0).ln())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn exact_at_knots() {
        let eos = EquationOfState::upph_gf();
        for &(e, p) in &UPPH_GF_TABLE_BAR {
            assert_eq!(eos.pressure(e), p * BAR);
        }
        assert_eq!(eos.pressure(-0.1098) / BAR, 12.6);
    }

    #[test]
    fn first_segment_midpoint() {
        let eos = EquationOfState::upph_gf();
        assert_relative_eq!(eos.pressure(-0.0385) / BAR, 3.15, max_relative = 1e-12);
    }

    #[test]
    fn tension_and_density_mapping() {
        let eos = EquationOfState::upph_gf();
        assert_eq!(eos.pressure(0.05), 0.0);
        assert_eq!(eos.pressure_from_density(1480.0, 1480.0), 0.0);
        assert_eq!(eos.pressure_from_density(1400.0, 1480.0), 0.0);
        let rho = 1480.0 * 0.1098f64.exp();
        assert_relative_eq!(eos.pressure_from_density(rho, 1480.0), 12.6 * BAR, max_relative = 1e-9);
    }

    #[test]
    fn extrapolates_with_last_slope() {
        let eos = EquationOfState::upph_gf();
        let slope = (120.0 - 113.7) * BAR / (0.2407 - 0.2378);
        assert_relative_eq!(eos.extrapolation_slope(), slope, max_relative = 1e-12);
        assert_relative_eq!(eos.pressure(-0.2507), 120.0 * BAR + 0.01 * slope, max_relative = 1e-12);
    }

    #[test]
    fn rejects_non_monotone_tables() {
        assert!(EquationOfState::from_bar_table(&[(0.0, 0.0), (-0.1, 5.0), (-0.05, 6.0)]).is_err());
        assert!(EquationOfState::from_bar_table(&[(0.0, 0.0), (-0.1, 5.0), (-0.2, 4.0)]).is_err());
        assert!(EquationOfState::from_bar_table(&[(-0.01, 0.0), (-0.1, 5.0)]).is_err());
    }

    proptest! {
        #[test]
        fn monotone_and_continuous(a in -0.4f64..0.1, b in -0.4f64..0.1) {
            let eos = EquationOfState::upph_gf();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            // more compression never lowers the pressure
            prop_assert!(eos.pressure(lo) >= eos.pressure(hi));
            // Lipschitz with the steepest segment slope
            let steepest = eos.knots().windows(2)
                .map(|w| (w[1].1 - w[0].1) / (w[0].0 - w[1].0))
                .fold(0.0, f64::max);
            prop_assert!(eos.pressure(lo) - eos.pressure(hi) <= steepest * (hi - lo) * (1.0 + 1e-12) + 1e-9);
        }
    }
}
