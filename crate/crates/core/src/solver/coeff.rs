//! Coefficient fields of the linear non-divergence class, stored as
//! nonnegative weights on the stencil directions: `A = Σ_d c_d d̂ d̂ᵀ`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::lattice::{Lattice, DIRECTIONS_2D, FRAMES_2D};
use crate::error::{Error, Result};
use crate::operators::{check_coefficient, Ellipticity, SymMatrix};

fn default_cell() -> f64 {
    0.125
}

fn default_slab() -> f64 {
    0.125
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoefficientSpec {
    /// A constant matrix; in 2-D it must be diagonally dominant to admit a monotone stencil.
    Constant { matrix: SymMatrix },
    /// Random frame and eigenvalues at the vertices of a fixed grid of spacing
    /// `cell` (anchored at the origin), multilinear in space and piecewise linear
    /// in time over slabs of length `slab`. Independent of the lattice step.
    Random {
        seed: u64,
        #[serde(default = "default_cell")]
        cell: f64,
        #[serde(default = "default_slab")]
        slab: f64,
        /// Step index at which slab 0 begins; shifting it shifts the field in time.
        #[serde(default)]
        origin_step: i64,
    },
}

/// Direction weights on a lattice; `weights[slab][point·ndir + d]`.
#[derive(Clone, Debug)]
pub struct CoefficientField {
    ndir: usize,
    constant: Option<Vec<f64>>,
    slab_steps: i64,
    origin_step: i64,
    first_slab: i64,
    slabs: Vec<Vec<f64>>,
}

fn stencil_dirs(n: usize) -> Vec<Vec<i64>> {
    if n == 1 {
        vec![vec![1]]
    } else {
        DIRECTIONS_2D.iter().map(|&(a, b)| vec![a, b]).collect()
    }
}

/// Nonnegative direction weights reproducing a constant matrix.
pub fn decompose_constant(m: &SymMatrix) -> Result<Vec<f64>> {
    match m.dim() {
        1 => Ok(vec![m.get(0, 0)]),
        2 => {
            let (p, q, r) = (m.get(0, 0), m.get(0, 1), m.get(1, 1));
            if p < q.abs() || r < q.abs() {
                return Err(Error::InvalidParameter(format!(
                    "coefficient {m:?} is not diagonally dominant; no monotone stencil on this lattice"
                )));
            }
            let mut w = vec![0.0; 8];
            w[0] = p - q.abs();
            w[1] = r - q.abs();
            if q > 0.0 {
                w[2] = 2.0 * q;
            } else {
                w[3] = -2.0 * q;
            }
            Ok(w)
        }
        n => Err(Error::InvalidParameter(format!("lattice solver supports n ∈ {{1, 2}}, got {n}"))),
    }
}

/// `Σ_d c_d d̂ d̂ᵀ`.
pub fn weights_to_matrix(n: usize, w: &[f64]) -> SymMatrix {
    let dirs = stencil_dirs(n);
    let mut m = SymMatrix::zeros(n);
    for (d, c) in dirs.iter().zip(w) {
        let l2: f64 = d.iter().map(|v| (v * v) as f64).sum();
        for i in 0..n {
            for j in i..n {
                m.set(i, j, m.get(i, j) + c * (d[i] * d[j]) as f64 / l2);
            }
        }
    }
    m
}

impl CoefficientField {
    pub fn build(
        spec: &CoefficientSpec,
        lat: &Lattice,
        ell: &Ellipticity,
        ht: f64,
        start_step: i64,
        n_steps: usize,
    ) -> Result<CoefficientField> {
        let n = lat.dim();
        let ndir = stencil_dirs(n).len();
        match spec {
            CoefficientSpec::Constant { matrix } => {
                if matrix.dim() != n {
                    return Err(Error::InvalidParameter("coefficient dimension mismatch".into()));
                }
                check_coefficient(matrix, ell)?;
                Ok(CoefficientField {
                    ndir,
                    constant: Some(decompose_constant(matrix)?),
                    slab_steps: 1,
                    origin_step: 0,
                    first_slab: 0,
                    slabs: Vec::new(),
                })
            }
            CoefficientSpec::Random { seed, cell, slab, origin_step } => {
                if !(*slab > 0.0) || !(*cell > 0.0) {
                    return Err(Error::InvalidParameter("coefficient cell and slab lengths must be positive".into()));
                }
                let slab_steps = ((slab / ht).round() as i64).max(1);
                let first = (start_step - origin_step).div_euclid(slab_steps);
                let last = (start_step + n_steps as i64 - origin_step).div_euclid(slab_steps) + 1;
                let slabs = (first..=last).map(|k| random_slab(*seed, k, lat, ell, *cell)).collect();
                Ok(CoefficientField { ndir, constant: None, slab_steps, origin_step: *origin_step, first_slab: first, slabs })
            }
        }
    }

    pub fn ndir(&self) -> usize {
        self.ndir
    }

    /// Writes the direction weights at lattice point `idx`, time step `step` into `out`.
    pub fn weights(&self, idx: usize, step: i64, out: &mut [f64]) {
        if let Some(c) = &self.constant {
            out.copy_from_slice(c);
            return;
        }
        let local = step - self.origin_step;
        let k = local.div_euclid(self.slab_steps);
        let frac = local.rem_euclid(self.slab_steps) as f64 / self.slab_steps as f64;
        let a = &self.slabs[(k - self.first_slab) as usize][idx * self.ndir..(idx + 1) * self.ndir];
        let b = &self.slabs[(k + 1 - self.first_slab) as usize][idx * self.ndir..(idx + 1) * self.ndir];
        for d in 0..self.ndir {
            out[d] = (1.0 - frac) * a[d] + frac * b[d];
        }
    }

    pub fn matrix_at(&self, n: usize, idx: usize, step: i64) -> SymMatrix {
        let mut w = vec![0.0; self.ndir];
        self.weights(idx, step, &mut w);
        weights_to_matrix(n, &w)
    }
}

/// Direction weights at one vertex of the coarse grid.
fn vertex_weights(seed: u64, slab: i64, vertex: &[i64], ell: &Ellipticity, out: &mut [f64]) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(slab as u64);
    let mut key: u128 = 0;
    for &v in vertex {
        key = (key << 32) | ((v + (1 << 30)) as u64 as u128);
    }
    rng.set_word_pos(key * 64);
    out.iter_mut().for_each(|w| *w = 0.0);
    if vertex.len() == 1 {
        out[0] = rng.gen_range(ell.lambda..=ell.big_lambda);
    } else {
        let (a, b) = FRAMES_2D[rng.gen_range(0..4)];
        out[a] = rng.gen_range(ell.lambda..=ell.big_lambda);
        out[b] = rng.gen_range(ell.lambda..=ell.big_lambda);
    }
}

/// Multilinear interpolation of vertex weights; a convex combination keeps the spectrum in `[λ, Λ]`.
fn random_slab(seed: u64, slab: i64, lat: &Lattice, ell: &Ellipticity, cell: f64) -> Vec<f64> {
    let n = lat.dim();
    let ndir = stencil_dirs(n).len();
    let mut out = vec![0.0; lat.len() * ndir];
    let mut w = vec![0.0; ndir];
    let mut cache: std::collections::HashMap<Vec<i64>, Vec<f64>> = std::collections::HashMap::new();
    for p in 0..lat.len() {
        let x = lat.point(p);
        let base: Vec<i64> = x.iter().map(|v| (v / cell).floor() as i64).collect();
        let frac: Vec<f64> = x.iter().zip(&base).map(|(v, b)| v / cell - *b as f64).collect();
        let acc = &mut out[p * ndir..(p + 1) * ndir];
        for corner in 0..(1usize << n) {
            let mut weight = 1.0;
            let mut v = base.clone();
            for k in 0..n {
                if corner >> k & 1 == 1 {
                    weight *= frac[k];
                    v[k] += 1;
                } else {
                    weight *= 1.0 - frac[k];
                }
            }
            let vals = cache.entry(v).or_insert_with_key(|key| {
                vertex_weights(seed, slab, key, ell, &mut w);
                w.clone()
            });
            for d in 0..ndir {
                acc[d] += weight * vals[d];
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainSpec;

    #[test]
    fn constant_decomposition_round_trips() {
        let m = SymMatrix::from_rows(&[&[2.0, -0.5], &[-0.5, 1.5]]);
        let w = decompose_constant(&m).unwrap();
        assert!(w.iter().all(|&c| c >= 0.0));
        let back = weights_to_matrix(2, &w);
        for i in 0..2 {
            for j in 0..2 {
                assert!((back.get(i, j) - m.get(i, j)).abs() < 1e-15);
            }
        }
        let bad = SymMatrix::from_rows(&[&[1.0, 1.5], &[1.5, 3.0]]);
        assert!(decompose_constant(&bad).is_err());
    }

    #[test]
    fn random_field_spectrum_stays_in_band() {
        let dom = DomainSpec::Disk { center: vec![0.0, 0.0], radius: 1.0 };
        let lat = Lattice::for_domain(&dom, 1.0 / 8.0, 2).unwrap();
        let ell = Ellipticity::pucci(0.5, 2.0).unwrap();
        let spec = CoefficientSpec::Random { seed: 7, cell: 0.25, slab: 0.1, origin_step: 0 };
        let f = CoefficientField::build(&spec, &lat, &ell, 0.01, 0, 50).unwrap();
        for step in [0, 3, 17, 50] {
            for idx in 0..lat.len() {
                let e = f.matrix_at(2, idx, step).eigenvalues();
                assert!(e[0] >= 0.5 - 1e-12 && e[1] <= 2.0 + 1e-12, "{e:?}");
            }
        }
    }

    #[test]
    fn shifted_origin_shifts_the_field() {
        let dom = DomainSpec::Interval { length: 1.0 };
        let lat = Lattice::for_domain(&dom, 1.0 / 16.0, 2).unwrap();
        let ell = Ellipticity::pucci(0.5, 2.0).unwrap();
        let a = CoefficientField::build(
            &CoefficientSpec::Random { seed: 1, cell: 0.125, slab: 0.05, origin_step: 0 },
            &lat,
            &ell,
            0.01,
            0,
            40,
        )
        .unwrap();
        let b = CoefficientField::build(
            &CoefficientSpec::Random { seed: 1, cell: 0.125, slab: 0.05, origin_step: 7 },
            &lat,
            &ell,
            0.01,
            7,
            40,
        )
        .unwrap();
        let (mut wa, mut wb) = ([0.0], [0.0]);
        for j in 0..40 {
            a.weights(5, j, &mut wa);
            b.weights(5, j + 7, &mut wb);
            assert_eq!(wa, wb);
        }
    }

    #[test]
    fn random_field_does_not_depend_on_the_lattice_step() {
        let dom = DomainSpec::Square { center: vec![0.0, 0.0], side: 1.0 };
        let ell = Ellipticity::pucci(0.5, 2.0).unwrap();
        let spec = CoefficientSpec::Random { seed: 4, cell: 0.25, slab: 1.0, origin_step: 0 };
        let coarse = Lattice::for_domain(&dom, 1.0 / 8.0, 2).unwrap();
        let fine = Lattice::for_domain(&dom, 1.0 / 16.0, 2).unwrap();
        let a = CoefficientField::build(&spec, &coarse, &ell, 0.5, 0, 1).unwrap();
        let b = CoefficientField::build(&spec, &fine, &ell, 0.5, 0, 1).unwrap();
        let (mut wa, mut wb) = (vec![0.0; 8], vec![0.0; 8]);
        for i in 0..coarse.len() {
            let Some(j) = fine.node_at(&coarse.point(i)) else { continue };
            a.weights(i, 0, &mut wa);
            b.weights(j, 0, &mut wb);
            for d in 0..8 {
                assert!((wa[d] - wb[d]).abs() < 1e-12);
            }
        }
    }
}
