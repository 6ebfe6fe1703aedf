use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::lattice::Lattice;
use crate::error::{Error, Result};
use crate::geometry::DomainSpec;
use crate::operators::Ellipticity;

pub const FIELD_MAGIC: &[u8; 4] = b"PLGF";
pub const FIELD_VERSION: u32 = 1;

/// Provenance of a field: what was solved, on what base, with which seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldMeta {
    pub label: String,
    pub problem: String,
    pub domain: DomainSpec,
    pub ell: Ellipticity,
    pub seed: Option<u64>,
    pub lateral: f64,
}

/// Saved time slices of a lattice function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridField {
    pub lattice: Lattice,
    pub ht: f64,
    pub horizon: f64,
    pub times: Vec<f64>,
    pub data: Vec<f64>,
    pub meta: FieldMeta,
}

impl GridField {
    /// Samples a closed-form function on the lattice; nodes outside Ω̄ get the lateral value.
    pub fn from_fn<F: Fn(&[f64], f64) -> f64>(lattice: Lattice, times: Vec<f64>, horizon: f64, meta: FieldMeta, f: F) -> GridField {
        let len = lattice.len();
        let points: Vec<Vec<f64>> = (0..len).map(|i| lattice.point(i)).collect();
        let inside: Vec<bool> = points.iter().map(|x| meta.domain.contains_closure(x)).collect();
        let mut data = Vec::with_capacity(len * times.len());
        for &t in &times {
            for (x, &ok) in points.iter().zip(&inside) {
                data.push(if ok { f(x, t) } else { meta.lateral });
            }
        }
        GridField { lattice, ht: 0.0, horizon, times, data, meta }
    }

    pub fn n_slices(&self) -> usize {
        self.times.len()
    }

    pub fn slice(&self, k: usize) -> &[f64] {
        let n = self.lattice.len();
        &self.data[k * n..(k + 1) * n]
    }

    /// Index of the saved slice at time `t`, if any.
    pub fn time_index(&self, t: f64) -> Option<usize> {
        let tol = 1e-9 * self.horizon.max(1e-300);
        self.times.iter().position(|&s| (s - t).abs() <= tol)
    }

    pub fn mask(&self) -> Vec<bool> {
        self.lattice.mask(&self.meta.domain)
    }

    /// Multilinear in space, linear in time between saved slices.
    pub fn sample(&self, x: &[f64], t: f64) -> Option<f64> {
        let (first, last) = (self.times[0], *self.times.last()?);
        if t < first - 1e-12 || t > last + 1e-12 {
            return None;
        }
        if let Some(k) = self.time_index(t) {
            return self.lattice.interpolate(self.slice(k), x);
        }
        let k = self.times.partition_point(|&s| s <= t).clamp(1, self.times.len() - 1) - 1;
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let w = (t - t0) / (t1 - t0);
        let a = self.lattice.interpolate(self.slice(k), x)?;
        let b = self.lattice.interpolate(self.slice(k + 1), x)?;
        Some((1.0 - w) * a + w * b)
    }

    pub fn sup(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, c: f64) -> GridField {
        let mut g = self.clone();
        g.data.iter_mut().for_each(|v| *v *= c);
        g.meta.lateral *= c;
        g
    }

    /// Same numerical layout (lattice, times).
    pub fn same_grid(&self, other: &GridField) -> bool {
        self.lattice == other.lattice && self.times == other.times
    }

    /// Binary layout, little endian: magic `PLGF`, u32 version, u32 ndim,
    /// u64 dims[ndim], f64 origin[ndim], f64 hx, f64 ht, f64 T, u64 n_slices,
    /// f64 times[n_slices], then the slices, each row-major with x fastest.
    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.lattice.dim();
        let mut out = Vec::with_capacity(64 + 8 * (self.data.len() + self.times.len()));
        out.extend_from_slice(FIELD_MAGIC);
        out.extend_from_slice(&FIELD_VERSION.to_le_bytes());
        out.extend_from_slice(&(n as u32).to_le_bytes());
        for &d in &self.lattice.dims {
            out.extend_from_slice(&(d as u64).to_le_bytes());
        }
        for &o in &self.lattice.origin {
            out.extend_from_slice(&o.to_le_bytes());
        }
        for v in [self.lattice.h, self.ht, self.horizon] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&(self.times.len() as u64).to_le_bytes());
        for v in self.times.iter().chain(&self.data) {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], meta: FieldMeta) -> Result<GridField> {
        let mut r = Reader { b: bytes, pos: 0 };
        if r.take(4)? != FIELD_MAGIC {
            return Err(Error::InvalidParameter("not a field file (bad magic)".into()));
        }
        let version = r.u32()?;
        if version != FIELD_VERSION {
            return Err(Error::InvalidParameter(format!("unsupported field version {version}")));
        }
        let n = r.u32()? as usize;
        let dims = (0..n).map(|_| r.u64().map(|v| v as usize)).collect::<Result<Vec<_>>>()?;
        let origin = (0..n).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
        let (h, ht, horizon) = (r.f64()?, r.f64()?, r.f64()?);
        let ns = r.u64()? as usize;
        let times = (0..ns).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
        let len: usize = dims.iter().product::<usize>() * ns;
        let data = (0..len).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
        if r.pos != bytes.len() {
            return Err(Error::InvalidParameter("trailing bytes in field file".into()));
        }
        Ok(GridField { lattice: Lattice { dims, origin, h }, ht, horizon, times, data, meta })
    }

    /// `t,x[,y],u` rows for nodes in Ω̄.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("# pucci-lab field csv v1\n");
        let n = self.lattice.dim();
        s.push_str(if n == 1 { "t,x,u\n" } else { "t,x,y,u\n" });
        let keep: Vec<bool> = (0..self.lattice.len()).map(|i| self.meta.domain.contains_closure(&self.lattice.point(i))).collect();
        for (k, &t) in self.times.iter().enumerate() {
            for (i, v) in self.slice(k).iter().enumerate() {
                if keep[i] {
                    let x = self.lattice.point(i);
                    let _ = write!(s, "{t}");
                    for c in x {
                        let _ = write!(s, ",{c}");
                    }
                    let _ = writeln!(s, ",{v}");
                }
            }
        }
        s
    }
}

struct Reader<'a> {
    b: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.b.len() {
            return Err(Error::InvalidParameter("truncated field file".into()));
        }
        let s = &self.b[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta() -> FieldMeta {
        FieldMeta {
            label: "t".into(),
            problem: "closed_form".into(),
            domain: DomainSpec::Interval { length: 1.0 },
            ell: Ellipticity::pucci(1.0, 1.0).unwrap(),
            seed: None,
            lateral: 0.0,
        }
    }

    #[test]
    fn binary_round_trip() {
        let lat = Lattice::for_domain(&DomainSpec::Interval { length: 1.0 }, 0.125, 2).unwrap();
        let f = GridField::from_fn(lat, vec![0.0, 0.5, 1.0], 1.0, meta(), |x, t| (x[0] * 3.0).sin() + t);
        let back = GridField::from_bytes(&f.to_bytes(), meta()).unwrap();
        assert_eq!(back, f);
        let mut bad = f.to_bytes();
        bad[0] = b'X';
        assert!(GridField::from_bytes(&bad, meta()).is_err());
        assert!(GridField::from_bytes(&f.to_bytes()[..40], meta()).is_err());
    }

    #[test]
    fn sampling_interpolates_in_time() {
        let lat = Lattice::for_domain(&DomainSpec::Interval { length: 1.0 }, 0.25, 1).unwrap();
        let f = GridField::from_fn(lat, vec![0.0, 1.0], 1.0, meta(), |x, t| x[0] + 2.0 * t);
        assert!((f.sample(&[0.3], 0.25).unwrap() - 0.8).abs() < 1e-15);
        assert!(f.sample(&[0.3], 1.5).is_none());
        assert!(f.to_csv().starts_with("# pucci-lab field csv v1\nt,x,u\n0,0,0\n"));
    }
}
