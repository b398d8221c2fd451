//! Dense discretisations of transfer (Perron–Frobenius) operators.
//!
//! A [`TransferMatrix`] acts on grid values by `(A f)[i] = Σ_j A[i][j] f[j]`.
//! Every builder ends with a rank-one correction `A ← A + 1·cᵀ` that makes
//! each column sum exactly 1, so the discrete mass functional is preserved to
//! round-off and the zero-mass subspace is invariant.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{DensityGrid, Stencil};
use crate::maps::{ExpandingMap, KickField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorKind {
    Identity,
    Deterministic,
    Kick,
    Kernel,
    Composite,
}

#[derive(Debug, Clone)]
pub struct TransferMatrix {
    n: usize,
    entries: Vec<f64>,
    kind: OperatorKind,
}

impl TransferMatrix {
    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
        }
        Self {
            n,
            entries,
            kind: OperatorKind::Identity,
        }
    }

    /// Assembles a matrix from rows, then applies the mass correction.
    pub(crate) fn from_rows(n: usize, rows: Vec<Vec<f64>>, kind: OperatorKind) -> Self {
        debug_assert_eq!(rows.len(), n);
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            debug_assert_eq!(row.len(), n);
            entries.extend(row);
        }
        let mut m = Self { n, entries, kind };
        m.correct_mass();
        m
    }

    fn correct_mass(&mut self) {
        let n = self.n;
        let mut colsum = vec![0.0; n];
        for i in 0..n {
            for (j, c) in colsum.iter_mut().enumerate() {
                *c += self.entries[i * n + j];
            }
        }
        let shift: Vec<f64> = colsum.iter().map(|s| (1.0 - s) / n as f64).collect();
        for row in self.entries.chunks_mut(n) {
            for (a, c) in row.iter_mut().zip(&shift) {
                *a += c;
            }
        }
    }

    #[inline]
    pub fn n_points(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn apply(&self, f: &DensityGrid) -> Result<DensityGrid> {
        if f.n_points() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: f.n_points(),
            });
        }
        let v = f.values();
        let out = self
            .entries
            .chunks(self.n)
            .map(|row| {
                let mut s = 0.0;
                for (a, x) in row.iter().zip(v) {
                    s += a * x;
                }
                s
            })
            .collect();
        Ok(DensityGrid::from_values_unchecked(out))
    }

    /// The operator "apply `first`, then `self`".
    pub fn after(&self, first: &TransferMatrix) -> Result<TransferMatrix> {
        if first.n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: first.n,
            });
        }
        let n = self.n;
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut out = vec![0.0; n];
                for (k, &a) in self.row(i).iter().enumerate() {
                    if a == 0.0 {
                        continue;
                    }
                    for (o, b) in out.iter_mut().zip(first.row(k)) {
                        *o += a * b;
                    }
                }
                out
            })
            .collect();
        Ok(Self {
            n,
            entries: rows.concat(),
            kind: OperatorKind::Composite,
        })
    }

    /// Debug dump of all entries as CSV, one matrix row per line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for row in self.entries.chunks(self.n) {
            let line: Vec<String> = row.iter().map(|a| format!("{a:?}")).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }
}

fn add_stencil(row: &mut [f64], x: f64, weight: f64, stencil: Stencil) {
    let n = row.len();
    for (j, w) in stencil.weights(x, n).iter(n) {
        row[j] += weight * w;
    }
}

/// Branch-sum operator `(Lf)(x) = Σ_j f(h_j(x)) / |T′(h_j(x))|`.
pub fn build_deterministic<M: ExpandingMap>(map: &M, n: usize) -> Result<TransferMatrix> {
    let rows = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = i as f64 / n as f64;
            let mut row = vec![0.0; n];
            for y in map.inverse_branches(x)? {
                add_stencil(&mut row, y, 1.0 / map.d1(y).abs(), Stencil::default());
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TransferMatrix::from_rows(n, rows, OperatorKind::Deterministic))
}

/// Push-forward under the kick `h_ε`: `(L_h u)(x) = u(h⁻¹x) / h′(h⁻¹x)`.
pub fn build_kick(kick: &KickField, eps: f64, n: usize) -> Result<TransferMatrix> {
    kick.check_eps(eps)?;
    let rows = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = i as f64 / n as f64;
            let y = kick.inverse(eps, x)?;
            let mut row = vec![0.0; n];
            add_stencil(&mut row, y, 1.0 / kick.h_d1(eps, y), Stencil::default());
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TransferMatrix::from_rows(n, rows, OperatorKind::Kick))
}

/// First-order kick derivative `D u = −(X u)′`.
pub fn d_operator(kick: &KickField, u: &DensityGrid) -> DensityGrid {
    let n = u.n_points();
    let xu: Vec<f64> = u
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| kick.x(i as f64 / n as f64) * v)
        .collect();
    DensityGrid::from_values_unchecked(xu).derivative().scale(-1.0)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::maps::{kick_map, CircleMap, TrigPoly};

    const N: usize = 256;

    fn g(f: impl Fn(f64) -> f64) -> DensityGrid {
        DensityGrid::from_fn(N, f).unwrap()
    }

    #[test]
    fn doubling_examples() {
        let l = build_deterministic(&CircleMap::doubling(), N).unwrap();
        let one = DensityGrid::constant(N, 1.0).unwrap();
        assert!(l.apply(&one).unwrap().sup_distance(&one).unwrap() <= 1e-12);

        let f = g(|x| 1.0 + (2.0 * PI * x).cos());
        assert!(l.apply(&f).unwrap().sup_distance(&one).unwrap() <= 1e-8);

        let f = g(|x| 1.0 + (4.0 * PI * x).cos());
        let expected = g(|x| 1.0 + (2.0 * PI * x).cos());
        assert!(l.apply(&f).unwrap().sup_distance(&expected).unwrap() <= 1e-8);
    }

    #[test]
    fn doubling_row_sparsity() {
        let l = build_deterministic(&CircleMap::doubling(), N).unwrap();
        // the mass correction is exactly zero for the doubling map by symmetry
        for i in [0, 1, 77] {
            let nnz = l.row(i).iter().filter(|a| a.abs() > 1e-14).count();
            assert!(nnz <= 6 * 2, "row {i} has {nnz} nonzeros");
        }
    }

    #[test]
    fn kick_examples() {
        let kick = KickField::new(TrigPoly::sin(1, 0.4));
        let id = build_kick(&kick, 0.0, N).unwrap();
        let f = g(|x| 1.0 + 0.3 * (2.0 * PI * x).sin() + 0.1 * (6.0 * PI * x).cos());
        assert!(id.apply(&f).unwrap().l1_distance(&f).unwrap() <= 1e-12);

        let c = 0.8;
        let eps = 0.013;
        let rot = build_kick(&KickField::new(TrigPoly::constant(c)), eps, N).unwrap();
        let s = g(|x| (2.0 * PI * x).sin());
        let expected = g(|x| (2.0 * PI * (x - eps * c)).sin());
        assert!(rot.apply(&s).unwrap().sup_distance(&expected).unwrap() <= 1e-7);

        let big = KickField::new(TrigPoly::sin(1, 1.0));
        assert!(matches!(build_kick(&big, 0.1, N), Err(Error::KickTooLarge { .. })));
    }

    #[test]
    fn d_operator_examples() {
        let one = DensityGrid::constant(N, 1.0).unwrap();
        let d = d_operator(&KickField::new(TrigPoly::constant(0.7)), &one);
        assert!(d.norm_sup() == 0.0);

        let d = d_operator(&KickField::new(TrigPoly::sin(1, 1.0)), &one);
        let expected = g(|x| -2.0 * PI * (2.0 * PI * x).cos());
        assert!(d.sup_distance(&expected).unwrap() <= 1e-5);
    }

    #[test]
    fn apply_examples() {
        let f = g(|x| (2.0 * PI * x).sin() + 0.5);
        let id = TransferMatrix::identity(N);
        assert_eq!(id.apply(&f).unwrap(), f);
        let l = build_deterministic(&CircleMap::new(2, TrigPoly::sin(1, 0.05)).unwrap(), N).unwrap();
        let z = DensityGrid::zeros(N).unwrap();
        assert_eq!(l.apply(&z).unwrap().norm_sup(), 0.0);
        let h = g(|x| (6.0 * PI * x).cos());
        let lhs = l.apply(&(&f + &h)).unwrap();
        let rhs = &l.apply(&f).unwrap() + &l.apply(&h).unwrap();
        assert!(lhs.sup_distance(&rhs).unwrap() <= 1e-12);
        assert!(matches!(
            l.apply(&DensityGrid::zeros(64).unwrap()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn kicked_map_factorises_as_kick_after_map() {
        let t = CircleMap::new(2, TrigPoly::new(vec![(1, 0.02, 0.03)])).unwrap();
        let kick = KickField::new(TrigPoly::new(vec![(1, 0.0, 0.3), (2, 0.1, 0.0)]));
        let eps = 0.05;
        let lt = build_deterministic(&t, N).unwrap();
        let lh = build_kick(&kick, eps, N).unwrap();
        let lkt = build_deterministic(&kick_map(&kick, eps, &t).unwrap(), N).unwrap();
        let f = g(|x| 1.0 + 0.4 * (2.0 * PI * x).cos() + 0.2 * (4.0 * PI * x + 0.3).sin());
        let direct = lkt.apply(&f).unwrap();
        let factored = lh.apply(&lt.apply(&f).unwrap()).unwrap();
        assert!(direct.l1_distance(&factored).unwrap() <= 1e-6);
        let product = lh.after(&lt).unwrap().apply(&f).unwrap();
        assert!(product.l1_distance(&factored).unwrap() <= 1e-13);
        // the other order is a genuinely different operator
        let wrong = lt.apply(&lh.apply(&f).unwrap()).unwrap();
        assert!(direct.l1_distance(&wrong).unwrap() > 1e-4);
    }

    #[test]
    fn csv_dump_has_n_rows() {
        let l = TransferMatrix::identity(16);
        let mut buf = Vec::new();
        l.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 16);
        assert_eq!(text.lines().next().unwrap().split(',').count(), 16);
    }
}
