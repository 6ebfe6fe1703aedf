//! Pucci extremal operators and the concrete members of the class they bound.
//!
//! Everything here acts on jets `(u, Du, D²u, u_t)` at a single point and is
//! pure. Matrices are at most 3×3, so eigenvalues are computed in closed form
//! (n ≤ 2) or from the trigonometric cubic formula with a Newton polish (n = 3).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Symmetric real matrix of dimension 1, 2 or 3.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymMatrix {
    n: usize,
    m: [[f64; 3]; 3],
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        assert!((1..=3).contains(&n), "dimension must be 1, 2 or 3");
        SymMatrix { n, m: [[0.0; 3]; 3] }
    }

    pub fn identity(n: usize) -> Self {
        Self::diag(&vec![1.0; n])
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut s = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            s.m[i][i] = v;
        }
        s
    }

    /// Builds from row-major entries; the result is the symmetric part.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let mut s = Self::zeros(n);
        for i in 0..n {
            assert_eq!(rows[i].len(), n, "matrix must be square");
            for j in 0..n {
                s.m[i][j] = 0.5 * (rows[i][j] + rows[j][i]);
            }
        }
        s
    }

    /// `Σ c_k v_k v_kᵀ`.
    pub fn from_outer_products(n: usize, terms: &[(f64, &[f64])]) -> Self {
        let mut s = Self::zeros(n);
        for &(c, v) in terms {
            for i in 0..n {
                for j in 0..n {
                    s.m[i][j] += c * v[i] * v[j];
                }
            }
        }
        s
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.m[i][j] = v;
        self.m[j][i] = v;
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.m[i][i]).sum()
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut s = *self;
        for row in s.m.iter_mut() {
            for v in row.iter_mut() {
                *v *= c;
            }
        }
        s
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut s = *self;
        for i in 0..3 {
            for j in 0..3 {
                s.m[i][j] += other.m[i][j];
            }
        }
        s
    }

    /// `trace(self · other)`.
    pub fn frobenius_dot(&self, other: &Self) -> f64 {
        assert_eq!(self.n, other.n);
        let mut acc = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                acc += self.m[i][j] * other.m[j][i];
            }
        }
        acc
    }

    pub fn quad_form(&self, v: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                acc += v[i] * self.m[i][j] * v[j];
            }
        }
        acc
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.m[i][j] * v[j]).sum())
            .collect()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let m = &self.m;
        match self.n {
            1 => vec![m[0][0]],
            2 => {
                let mean = 0.5 * (m[0][0] + m[1][1]);
                let half_diff = 0.5 * (m[0][0] - m[1][1]);
                let rad = half_diff.hypot(m[0][1]);
                vec![mean - rad, mean + rad]
            }
            _ => self.eigenvalues_3x3(),
        }
    }

    /// Computed on the sign-canonical one of `±M`, so that `eig(−M) = −eig(M)` bit for bit.
    fn eigenvalues_3x3(&self) -> Vec<f64> {
        let m = &self.m;
        let lead = [m[0][0], m[1][1], m[2][2], m[0][1], m[0][2], m[1][2]].into_iter().find(|&v| v != 0.0);
        if lead.is_some_and(|v| v < 0.0) {
            let mut eig = self.scale(-1.0).eigenvalues_3x3_canonical();
            eig.reverse();
            eig.iter_mut().for_each(|e| *e = -*e);
            return eig;
        }
        self.eigenvalues_3x3_canonical()
    }

    fn eigenvalues_3x3_canonical(&self) -> Vec<f64> {
        let m = &self.m;
        let off = m[0][1] * m[0][1] + m[0][2] * m[0][2] + m[1][2] * m[1][2];
        let mut eig = if off == 0.0 {
            vec![m[0][0], m[1][1], m[2][2]]
        } else {
            let q = self.trace() / 3.0;
            let a = m[0][0] - q;
            let b = m[1][1] - q;
            let c = m[2][2] - q;
            let p2 = a * a + b * b + c * c + 2.0 * off;
            let p = (p2 / 6.0).sqrt();
            // B = (M - qI)/p, r = det(B)/2
            let det = a * (b * c - m[1][2] * m[1][2]) - m[0][1] * (m[0][1] * c - m[1][2] * m[0][2])
                + m[0][2] * (m[0][1] * m[1][2] - b * m[0][2]);
            let r = (det / (p * p * p) / 2.0).clamp(-1.0, 1.0);
            let phi = r.acos() / 3.0;
            let e1 = q + 2.0 * p * phi.cos();
            let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
            let e2 = 3.0 * q - e1 - e3;
            vec![e1, e2, e3]
        };
        for e in eig.iter_mut() {
            *e = self.newton_polish(*e);
        }
        eig.sort_by(f64::total_cmp);
        eig
    }

    /// One Newton step on the characteristic polynomial.
    fn newton_polish(&self, x: f64) -> f64 {
        let m = &self.m;
        let (a, b, c) = (m[0][0] - x, m[1][1] - x, m[2][2] - x);
        let (d, e, f) = (m[0][1], m[0][2], m[1][2]);
        let p = a * b * c + 2.0 * d * e * f - a * f * f - b * e * e - c * d * d;
        // d/dx det(M - xI)
        let dp = -(b * c + a * c + a * b) + f * f + e * e + d * d;
        if dp.abs() < 1e-300 || !p.is_finite() {
            return x;
        }
        let step = p / dp;
        let scale = 1.0 + x.abs();
        // a step larger than the rounding neighbourhood means a clustered root; keep x
        if step.abs() > 1e-6 * scale {
            x
        } else {
            x - step
        }
    }

    /// Eigen-decomposition by cyclic Jacobi rotations: `(values, vectors)` with
    /// `vectors[k]` the unit eigenvector for `values[k]`, ascending.
    pub fn eigen_decomposition(&self) -> (Vec<f64>, Vec<Vec<f64>>) {
        let n = self.n;
        let mut a = self.m;
        let mut v = [[0.0; 3]; 3];
        for (i, row) in v.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        for _sweep in 0..64 {
            let mut off = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    off += a[i][j] * a[i][j];
                }
            }
            if off < 1e-300 {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    if a[p][q] == 0.0 {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k][p];
                        let akq = a[k][q];
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p][k];
                        let aqk = a[q][k];
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                    for row in v.iter_mut().take(n) {
                        let vkp = row[p];
                        let vkq = row[q];
                        row[p] = c * vkp - s * vkq;
                        row[q] = s * vkp + c * vkq;
                    }
                }
            }
        }
        let mut pairs: Vec<(f64, Vec<f64>)> = (0..n)
            .map(|k| (a[k][k], (0..n).map(|i| v[i][k]).collect()))
            .collect();
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        pairs.into_iter().unzip()
    }

    /// Largest absolute eigenvalue.
    pub fn spectral_scale(&self) -> f64 {
        self.eigenvalues().iter().fold(0.0_f64, |acc, e| acc.max(e.abs()))
    }
}

/// Ellipticity data `(λ, Λ, a, b)` of the extremal class.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ellipticity {
    pub lambda: f64,
    #[serde(rename = "Lambda")]
    pub big_lambda: f64,
    pub a: f64,
    #[serde(default)]
    pub b: f64,
}

impl Ellipticity {
    pub fn new(lambda: f64, big_lambda: f64, a: f64, b: f64) -> Result<Self> {
        let e = Ellipticity { lambda, big_lambda, a, b };
        e.validate()?;
        Ok(e)
    }

    /// Pure second-order case, `a = b = 0`.
    pub fn pucci(lambda: f64, big_lambda: f64) -> Result<Self> {
        Self::new(lambda, big_lambda, 0.0, 0.0)
    }

    /// Ellipticity of the normalized p-Laplacian: `λ = min(1, p−1)`, `Λ = max(1, p−1)`.
    pub fn for_p_laplacian(p: f64) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::InvalidParameter(format!("p must exceed 1, got {p}")));
        }
        Self::pucci((p - 1.0).min(1.0), (p - 1.0).max(1.0))
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.lambda, self.big_lambda, self.a, self.b].iter().all(|v| v.is_finite());
        if !finite || !(self.lambda > 0.0) || self.big_lambda < self.lambda || self.a < 0.0 || self.b < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "ellipticity requires 0 < λ ≤ Λ, a ≥ 0, b ≥ 0; got {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Plus,
    Minus,
}

/// Closed interval; degenerate when `lo == hi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn new(a: f64, b: f64) -> Self {
        Interval { lo: a.min(b), hi: a.max(b) }
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Second-order jet of a function at a point-time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Jet {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: SymMatrix,
    /// Time derivative; an interval where the function has a kink in time.
    pub time: Interval,
}

impl Jet {
    pub fn new(value: f64, grad: Vec<f64>, hess: SymMatrix, u_t: f64) -> Self {
        assert_eq!(grad.len(), hess.dim(), "jet dimension mismatch");
        Jet { value, grad, hess, time: Interval::point(u_t) }
    }

    pub fn dim(&self) -> usize {
        self.hess.dim()
    }

    pub fn grad_norm(&self) -> f64 {
        self.grad.iter().map(|g| g * g).sum::<f64>().sqrt()
    }
}

/// `P⁺(M) = Λ Σ_{e>0} e + λ Σ_{e<0} e`, `P⁻(M) = λ Σ_{e>0} e + Λ Σ_{e<0} e`.
pub fn pucci_extremal(m: &SymMatrix, ell: &Ellipticity, side: Side) -> f64 {
    pucci_from_eigenvalues(&m.eigenvalues(), ell.lambda, ell.big_lambda, side)
}

pub(crate) fn pucci_from_eigenvalues(eig: &[f64], lambda: f64, big_lambda: f64, side: Side) -> f64 {
    let (pos_w, neg_w) = match side {
        Side::Plus => (big_lambda, lambda),
        Side::Minus => (lambda, big_lambda),
    };
    // summing by increasing magnitude makes the result independent of the eigenvalue order,
    // so P⁻(M) and −P⁺(−M) agree bit for bit
    let mut by_size = eig.to_vec();
    by_size.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    let pos: f64 = by_size.iter().filter(|&&e| e > 0.0).sum();
    let neg: f64 = by_size.iter().filter(|&&e| e < 0.0).sum();
    pos_w * pos + neg_w * neg
}

/// Random symmetric matrix with spectrum uniform in `[lo, hi]` and a random eigenframe.
pub fn random_spectrum_matrix<R: Rng>(n: usize, lo: f64, hi: f64, rng: &mut R) -> SymMatrix {
    let frame = random_orthonormal_frame(n, rng);
    let terms: Vec<(f64, &[f64])> = frame
        .iter()
        .map(|v| (rng.gen_range(lo..=hi), v.as_slice()))
        .collect();
    SymMatrix::from_outer_products(n, &terms)
}

/// Orthonormal frame from Gram–Schmidt on Gaussian-ish vectors.
pub fn random_orthonormal_frame<R: Rng>(n: usize, rng: &mut R) -> Vec<Vec<f64>> {
    loop {
        let mut frame: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut ok = true;
        for _ in 0..n {
            let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            for u in &frame {
                let d: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= d * ui;
                }
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < 1e-3 {
                ok = false;
                break;
            }
            v.iter_mut().for_each(|x| *x /= norm);
            frame.push(v);
        }
        if ok {
            return frame;
        }
    }
}

/// Brute-force `sup_{A ∈ [[λ,Λ]]} trace(AM)` over random samples plus the
/// `2ⁿ` candidates diagonal in M's eigenbasis (from a Jacobi decomposition).
pub fn pucci_bruteforce(m: &SymMatrix, ell: &Ellipticity, samples: usize, seed: u64) -> f64 {
    let n = m.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::NEG_INFINITY;
    for _ in 0..samples {
        let a = random_spectrum_matrix(n, ell.lambda, ell.big_lambda, &mut rng);
        best = best.max(a.frobenius_dot(m));
    }
    let (_, vecs) = m.eigen_decomposition();
    for mask in 0..(1usize << n) {
        let terms: Vec<(f64, &[f64])> = vecs
            .iter()
            .enumerate()
            .map(|(k, v)| {
                let c = if mask & (1 << k) != 0 { ell.big_lambda } else { ell.lambda };
                (c, v.as_slice())
            })
            .collect();
        let a = SymMatrix::from_outer_products(n, &terms);
        best = best.max(a.frobenius_dot(m));
    }
    best
}

/// Spatial part of `L±`: `P⁺(D²u) + a|Du| + b|u|` or `P⁻(D²u) − a|Du| − b|u|`.
pub fn extremal_operator(jet: &Jet, ell: &Ellipticity, side: Side) -> f64 {
    let p = pucci_extremal(&jet.hess, ell, side);
    let lower = ell.a * jet.grad_norm() + ell.b * jet.value.abs();
    match side {
        Side::Plus => p + lower,
        Side::Minus => p - lower,
    }
}

/// Gradient threshold below which the p-Laplacian switches to its degenerate branch.
pub fn gradient_threshold(hess: &SymMatrix) -> f64 {
    1e-8 * hess.spectral_scale()
}

/// Normalized p-Laplacian `Δu + (p−2)⟨D²u ν, ν⟩`, `ν = Du/|Du|`.
///
/// At (numerically) vanishing gradient the value is the interval
/// `[min, max]` of `tr M + (p−2)⟨M d, d⟩` over the supplied unit directions.
pub fn normalized_p_laplacian(jet: &Jet, p: f64, directions: &[Vec<f64>]) -> Result<Interval> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!("p must exceed 1, got {p}")));
    }
    let m = &jet.hess;
    let g = jet.grad_norm();
    if g > gradient_threshold(m) && g > 0.0 {
        let nu: Vec<f64> = jet.grad.iter().map(|x| x / g).collect();
        return Ok(Interval::point(m.trace() + (p - 2.0) * m.quad_form(&nu)));
    }
    if directions.is_empty() {
        return Err(Error::InvalidParameter("degenerate branch needs a nonempty direction set".into()));
    }
    let tr = m.trace();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for d in directions {
        if d.len() != m.dim() {
            return Err(Error::InvalidParameter("direction dimension mismatch".into()));
        }
        let v = tr + (p - 2.0) * m.quad_form(d);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok(Interval { lo, hi })
}

/// `trace(A · D²u)` for a coefficient sample `A ∈ [[λ,Λ]]`.
pub fn linear_nondiv_residual(jet: &Jet, coeff: &SymMatrix, ell: &Ellipticity) -> Result<f64> {
    check_coefficient(coeff, ell)?;
    Ok(coeff.frobenius_dot(&jet.hess))
}

pub(crate) fn check_coefficient(coeff: &SymMatrix, ell: &Ellipticity) -> Result<()> {
    let eig = coeff.eigenvalues();
    let tol = 1e-12 * ell.big_lambda.max(1.0);
    if eig[0] < ell.lambda - tol || eig[eig.len() - 1] > ell.big_lambda + tol {
        return Err(Error::InvalidParameter(format!(
            "coefficient spectrum {eig:?} outside [{}, {}]",
            ell.lambda, ell.big_lambda
        )));
    }
    Ok(())
}

/// Unit directions at angles `kπ/count`, `k = 0..count`.
pub fn planar_directions(count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|k| {
            let th = k as f64 * std::f64::consts::PI / count as f64;
            vec![th.cos(), th.sin()]
        })
        .collect()
}
