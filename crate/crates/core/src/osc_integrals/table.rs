//! Cached `I(A, B)` values on a square grid with local bicubic interpolation.
//!
//! Nodes are uniform in `xi(r) = ln r + r / h0`: logarithmic near the origin,
//! linear (spacing about `h0 * dxi`) at large radii, so the `A ~ B` ridge stays
//! resolved. The interpolated quantity is `A^2 I`, which is bounded as `A -> 0`.

use std::io::{BufRead, Write};
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{lambda_integral_with, IntegralKind, OscError, PanelOptions};
use crate::specfun::CutoffSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableSpec {
    pub kind: IntegralKind,
    pub cutoff: CutoffSpec,
    pub lo: f64,
    pub hi: f64,
    pub nodes: usize,
    /// Crossover radius between log and linear spacing.
    pub h0: f64,
    pub panels: PanelOptions,
}

impl TableSpec {
    pub fn new(kind: IntegralKind, cutoff: CutoffSpec, lo: f64, hi: f64, nodes: usize) -> Self {
        Self {
            kind,
            cutoff,
            lo,
            hi,
            nodes,
            h0: 1.0,
            panels: PanelOptions::default(),
        }
    }

    fn xi(&self, r: f64) -> f64 {
        r.ln() + r / self.h0
    }

    fn xi_inverse(&self, xi: f64) -> f64 {
        // Newton on ln r + r/h0 = xi, starting from the dominant branch
        let mut r = if xi < 0.0 {
            xi.exp()
        } else {
            (xi * self.h0).max(1e-300).min(xi.exp())
        };
        for _ in 0..100 {
            let f = r.ln() + r / self.h0 - xi;
            let step = f / (1.0 / r + 1.0 / self.h0);
            let next = (r - step).max(r * 1e-3);
            if (next - r).abs() <= 1e-16 * r {
                r = next;
                break;
            }
            r = next;
        }
        r
    }

    pub fn grid(&self) -> Vec<f64> {
        let (x0, x1) = (self.xi(self.lo), self.xi(self.hi));
        let mut g: Vec<f64> = (0..self.nodes)
            .map(|i| self.xi_inverse(x0 + (x1 - x0) * i as f64 / (self.nodes - 1) as f64))
            .collect();
        g[0] = self.lo;
        g[self.nodes - 1] = self.hi;
        g
    }

    /// Same range with the node spacing halved.
    pub fn refined(&self) -> Self {
        Self {
            nodes: 2 * self.nodes - 1,
            ..*self
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscTable {
    pub spec: TableSpec,
    pub grid: Vec<f64>,
    /// Row-major in `(A, B)`.
    pub values: Vec<Complex64>,
}

impl OscTable {
    pub fn build(spec: TableSpec) -> Result<Self, OscError> {
        if !(spec.lo > 0.0 && spec.hi > spec.lo && spec.nodes >= 4 && spec.h0 > 0.0) {
            return Err(OscError::Range {
                lo: spec.lo,
                hi: spec.hi,
                needed: f64::NAN,
            });
        }
        let grid = spec.grid();
        let n = grid.len();
        let values = (0..n * n)
            .into_par_iter()
            .map(|k| {
                lambda_integral_with(
                    grid[k / n],
                    grid[k % n],
                    spec.kind,
                    &spec.cutoff,
                    &spec.panels,
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { spec, grid, values })
    }

    pub fn node(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.grid.len() + j]
    }

    pub fn covers(&self, r: f64) -> bool {
        r >= self.spec.lo && r <= self.spec.hi
    }

    /// Error unless every argument up to `needed` is covered.
    pub fn require(&self, needed: f64) -> Result<(), OscError> {
        if needed > self.spec.hi || needed < self.spec.lo {
            Err(OscError::Range {
                lo: self.spec.lo,
                hi: self.spec.hi,
                needed,
            })
        } else {
            Ok(())
        }
    }

    fn coordinate(&self, r: f64) -> f64 {
        let n = self.grid.len();
        let (x0, x1) = (self.spec.xi(self.spec.lo), self.spec.xi(self.spec.hi));
        (self.spec.xi(r) - x0) / (x1 - x0) * (n - 1) as f64
    }

    fn exact_index(&self, r: f64) -> Option<usize> {
        let t = self.coordinate(r).round();
        let i = t.clamp(0.0, (self.grid.len() - 1) as f64) as usize;
        (self.grid[i] == r).then_some(i)
    }

    /// Interpolated value; direct evaluation outside the grid.
    pub fn lookup(&self, a: f64, b: f64) -> Result<Complex64, OscError> {
        if !self.covers(a) || !self.covers(b) {
            return lambda_integral_with(
                a,
                b,
                self.spec.kind,
                &self.spec.cutoff,
                &self.spec.panels,
            );
        }
        if let (Some(i), Some(j)) = (self.exact_index(a), self.exact_index(b)) {
            return Ok(self.node(i, j));
        }
        let (ia, wa) = self.stencil(a);
        let (ib, wb) = self.stencil(b);
        let mut s = Complex64::new(0.0, 0.0);
        for (p, wp) in wa.iter().enumerate() {
            let i = ia + p;
            let ai2 = self.grid[i] * self.grid[i];
            for (q, wq) in wb.iter().enumerate() {
                s += self.node(i, ib + q) * (ai2 * wp * wq);
            }
        }
        Ok(s / (a * a))
    }

    /// Stencil for an in-range argument.
    pub fn stencil_at(&self, r: f64) -> Result<(usize, [f64; 4]), OscError> {
        if !self.covers(r) {
            return Err(OscError::Range {
                lo: self.spec.lo,
                hi: self.spec.hi,
                needed: r,
            });
        }
        Ok(self.stencil(r))
    }

    /// Four-point Lagrange stencil in the uniform coordinate.
    fn stencil(&self, r: f64) -> (usize, [f64; 4]) {
        let n = self.grid.len();
        let t = self.coordinate(r);
        let base = (t.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
        let s = t - base as f64;
        let mut w = [0.0; 4];
        for (k, wk) in w.iter_mut().enumerate() {
            let mut v = 1.0;
            for m in 0..4 {
                if m != k {
                    v *= (s - m as f64) / (k as f64 - m as f64);
                }
            }
            *wk = v;
        }
        (base, w)
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), OscError> {
        let io = |e: std::io::Error| OscError::Artifact(e.to_string());
        let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
        let meta =
            serde_json::to_string(&self.spec).map_err(|e| OscError::Artifact(e.to_string()))?;
        writeln!(f, "# {meta}").map_err(io)?;
        writeln!(f, "a,b,re,im").map_err(io)?;
        let n = self.grid.len();
        for (k, v) in self.values.iter().enumerate() {
            writeln!(
                f,
                "{:.17e},{:.17e},{:.17e},{:.17e}",
                self.grid[k / n],
                self.grid[k % n],
                v.re,
                v.im
            )
            .map_err(io)?;
        }
        f.flush().map_err(io)
    }

    pub fn read_csv(path: &Path) -> Result<Self, OscError> {
        let bad = |m: &str| OscError::Artifact(m.to_string());
        let f = std::fs::File::open(path).map_err(|e| OscError::Artifact(e.to_string()))?;
        // comment lines may carry provenance; the first JSON one is the spec
        let mut spec: Option<TableSpec> = None;
        let mut values = Vec::new();
        for line in std::io::BufReader::new(f).lines() {
            let line = line.map_err(|e| bad(&e.to_string()))?;
            if let Some(comment) = line.strip_prefix('#') {
                let comment = comment.trim();
                if spec.is_none() && comment.starts_with('{') {
                    spec = Some(
                        serde_json::from_str(comment)
                            .map_err(|e| bad(&format!("metadata: {e}")))?,
                    );
                }
                continue;
            }
            if line.starts_with("a,") {
                continue;
            }
            let cols: Vec<f64> = line
                .split(',')
                .map(|c| c.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| bad(&format!("row: {e}")))?;
            if cols.len() != 4 {
                return Err(bad("row width"));
            }
            values.push(Complex64::new(cols[2], cols[3]));
        }
        let spec = spec.ok_or_else(|| bad("missing metadata"))?;
        let grid = spec.grid();
        if values.len() != grid.len() * grid.len() {
            return Err(bad("value count does not match grid metadata"));
        }
        Ok(Self { spec, grid, values })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> TableSpec {
        TableSpec::new(IntegralKind::Ws0, CutoffSpec::default(), 0.05, 4.0, 12)
    }

    #[test]
    fn grid_endpoints_and_monotone() {
        let s = TableSpec { h0: 0.5, ..small() };
        let g = s.grid();
        assert_eq!(g[0], 0.05);
        assert_eq!(*g.last().unwrap(), 4.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        for &r in &g {
            assert!((s.xi_inverse(s.xi(r)) / r - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn nodes_exact_and_fallback() {
        let t = OscTable::build(small()).unwrap();
        let (a, b) = (t.grid[3], t.grid[7]);
        assert_eq!(t.lookup(a, b).unwrap(), t.node(3, 7));
        let outside = t.lookup(5.0, 1.0).unwrap();
        let direct =
            super::super::lambda_integral(5.0, 1.0, IntegralKind::Ws0, &CutoffSpec::default())
                .unwrap();
        assert_eq!(outside, direct);
        assert!(t.require(10.0).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let t = OscTable::build(small()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        t.write_csv(&p).unwrap();
        assert_eq!(OscTable::read_csv(&p).unwrap(), t);
    }
}
