//! Rate/divergence sweeps over grids of input lengths and codebook sizes.

use rayon::prelude::*;
use rescode_core::baseline::build_block_code;
use rescode_core::encoder::{build_code, Scheme};
use rescode_core::metrics::rate_report;
use rescode_core::tunstall::{is_valid_size, round_down_size};
use rescode_core::{Pmf, RateReport};

use crate::error::{CliError, Result};

/// Input lengths and codebook exponents of the reference grid.
pub const DEFAULT_GRID: [(u32, std::ops::RangeInclusive<u32>); 3] =
    [(6, 3..=6), (9, 5..=9), (12, 8..=12)];

/// One code to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Point {
    pub scheme: Scheme,
    pub m: u32,
    /// Tunstall codebook size for f2v, block length for b2b.
    pub param: u64,
}

impl Point {
    fn key(&self, d: usize) -> (&'static str, u32, u128) {
        let size = match self.scheme {
            Scheme::F2v => self.param as u128,
            Scheme::B2b => (d as u128).saturating_pow(self.param as u32),
        };
        (self.scheme.name(), self.m, size)
    }

    pub fn evaluate(&self, p: &Pmf) -> Result<RateReport> {
        let code = match self.scheme {
            Scheme::F2v => build_code(p, self.param, self.m)?,
            Scheme::B2b => build_block_code(p, self.param as usize, self.m)?,
        };
        Ok(rate_report(&code, p))
    }
}

/// What to sweep.
#[derive(Debug, Clone, Default)]
pub struct Grid {
    /// `(m, n)` pairs: f2v uses `N = 2^n`, b2b uses blocks of length `n`.
    pub pairs: Vec<(u32, u32)>,
    /// `(m, N)` pairs evaluated for f2v only.
    pub extra: Vec<(u32, u64)>,
    pub schemes: Vec<Scheme>,
    /// Round f2v sizes down to the nearest reachable Tunstall size.
    pub round_size: bool,
}

impl Grid {
    pub fn default_table() -> Vec<(u32, u32)> {
        DEFAULT_GRID
            .iter()
            .flat_map(|(m, ns)| ns.clone().map(move |n| (*m, n)))
            .collect()
    }

    /// Points in output order: scheme name, then `m`, then codebook size.
    pub fn points(&self, d: usize) -> Result<Vec<Point>> {
        let mut points = Vec::new();
        let f2v_size = |m: u32, size: u64| -> Result<Point> {
            let param = if is_valid_size(d, size) {
                size
            } else if self.round_size {
                round_down_size(d, size).ok_or_else(|| {
                    CliError::usage(format!("no Tunstall size for D = {d} at or below {size}"))
                })?
            } else {
                return Err(CliError::usage(format!(
                    "N = {size} is not reachable with D = {d}; pass --round-size to round down"
                )));
            };
            Ok(Point {
                scheme: Scheme::F2v,
                m,
                param,
            })
        };
        for &scheme in &self.schemes {
            for &(m, n) in &self.pairs {
                match scheme {
                    Scheme::F2v => {
                        if n > 62 {
                            return Err(CliError::usage(format!("n = {n} exceeds 62")));
                        }
                        points.push(f2v_size(m, 1u64 << n)?);
                    }
                    Scheme::B2b => points.push(Point {
                        scheme,
                        m,
                        param: n as u64,
                    }),
                }
            }
            if scheme == Scheme::F2v {
                for &(m, size) in &self.extra {
                    points.push(f2v_size(m, size)?);
                }
            }
        }
        points.sort_by_key(|pt| pt.key(d));
        points.dedup();
        Ok(points)
    }
}

/// Evaluates every point on up to `jobs` threads. Rows come back in point
/// order whatever order the threads finish in.
pub fn run(p: &Pmf, points: &[Point], jobs: usize) -> Result<Vec<RateReport>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::usage(e.to_string()))?;
    pool.install(|| points.par_iter().map(|pt| pt.evaluate(p)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_grid() -> Grid {
        Grid {
            pairs: Grid::default_table(),
            extra: vec![],
            schemes: vec![Scheme::F2v, Scheme::B2b],
            round_size: false,
        }
    }

    #[test]
    fn default_table_has_fourteen_points() {
        assert_eq!(Grid::default_table().len(), 14);
        let pts = reference_grid().points(2).unwrap();
        assert_eq!(pts.len(), 28);
        assert!(pts[..14].iter().all(|p| p.scheme == Scheme::B2b));
        assert_eq!(
            pts[0],
            Point {
                scheme: Scheme::B2b,
                m: 6,
                param: 3
            }
        );
        assert_eq!(
            pts[27],
            Point {
                scheme: Scheme::F2v,
                m: 12,
                param: 4096
            }
        );
    }

    #[test]
    fn extra_size_sorts_into_place() {
        let grid = Grid {
            pairs: vec![(12, 11), (12, 12)],
            extra: vec![(12, 3072)],
            schemes: vec![Scheme::F2v],
            round_size: false,
        };
        let sizes: Vec<u64> = grid.points(2).unwrap().iter().map(|p| p.param).collect();
        assert_eq!(sizes, [2048, 3072, 4096]);
    }

    #[test]
    fn ternary_sizes_need_rounding() {
        let mut grid = Grid {
            pairs: vec![(6, 2)],
            extra: vec![],
            schemes: vec![Scheme::F2v],
            round_size: false,
        };
        assert!(matches!(grid.points(3), Err(CliError::Usage(_))));
        grid.round_size = true;
        assert_eq!(grid.points(3).unwrap()[0].param, 3);
    }

    #[test]
    fn thread_count_does_not_change_rows() {
        let p = Pmf::new(vec![0.211, 0.789]).unwrap();
        let pts = reference_grid().points(2).unwrap();
        let one = run(&p, &pts, 1).unwrap();
        let many = run(&p, &pts, 4).unwrap();
        assert_eq!(one, many);
    }
}
