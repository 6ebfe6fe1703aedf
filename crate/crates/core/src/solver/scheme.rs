use rayon::prelude::*;

use super::coeff::CoefficientField;
use super::field::{FieldMeta, GridField};
use super::lattice::{Lattice, DIRECTIONS_2D, FRAMES_2D};
use super::{monotone_time_limit, GridSpec, OperatorKind, ProblemSpec};
use crate::error::{Error, Result};
use crate::operators::Ellipticity;

#[derive(Clone, Copy, Debug, PartialEq)]
enum Kind {
    Plus,
    Minus,
    Linear,
    PLap(f64),
}

/// One explicit step `u ↦ u + ht·D_h[u]` on a fixed lattice.
pub struct Stepper {
    kind: Kind,
    ell: Ellipticity,
    lattice: Lattice,
    mask: Vec<bool>,
    offsets: Vec<isize>,
    axes: Vec<isize>,
    inv_l2h2: Vec<f64>,
    coeff: Option<CoefficientField>,
    lateral: f64,
    ht: f64,
    /// Index into `clip` for nodes whose wide stencil crosses `∂Ω`.
    near: Vec<u32>,
    /// Per direction, the fractions `(θ₊, θ₋)` of the arm lengths at which `∂Ω` is met.
    clip: Vec<[(f64, f64); 8]>,
}

const NOT_NEAR: u32 = u32::MAX;

/// Smallest arm fraction kept for diagonal and knight directions. With these
/// floors a clipped frame is never stiffer than the axis frame, so the usual
/// time-step limit still gives a monotone update.
fn clip_floor(len2: i64) -> f64 {
    if len2 == 2 {
        std::f64::consts::FRAC_1_SQRT_2
    } else {
        0.5
    }
}

/// Fraction of the segment `x → y` (x inside, y outside the open base) at which `∂Ω` is met.
fn crossing(dom: &crate::geometry::DomainSpec, x: &[f64], y: &[f64]) -> f64 {
    if dom.on_boundary(y) {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..50 {
        let m = 0.5 * (lo + hi);
        let z: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + m * (b - a)).collect();
        if dom.contains(&z) {
            lo = m;
        } else {
            hi = m;
        }
    }
    0.5 * (lo + hi)
}

fn weight(s: f64, lo: f64, hi: f64) -> f64 {
    if s > 0.0 {
        hi * s
    } else {
        lo * s
    }
}

impl Stepper {
    pub fn new(problem: &ProblemSpec, grid: &GridSpec) -> Result<Stepper> {
        let s = Stepper::new_unchecked(problem, grid)?;
        let limit = monotone_time_limit(s.lattice.dim(), grid.hx, &s.ell);
        if grid.ht > limit * (1.0 + 1e-12) {
            return Err(Error::CflViolation { ht: grid.ht, limit });
        }
        Ok(s)
    }

    /// Skips the CFL check; only for negative-control fixtures.
    pub(crate) fn new_unchecked(problem: &ProblemSpec, grid: &GridSpec) -> Result<Stepper> {
        let ell = problem.effective_ell()?;
        let lattice = grid.lattice()?;
        let n = lattice.dim();
        if n > 2 {
            return Err(Error::InvalidParameter(format!("lattice solver supports n ∈ {{1, 2}}, got {n}")));
        }
        let mask = lattice.mask(&grid.cylinder.base);
        let dirs: Vec<Vec<i64>> =
            if n == 1 { vec![vec![1]] } else { DIRECTIONS_2D.iter().map(|&(a, b)| vec![a, b]).collect() };
        lattice.check_reach(&mask, if n == 1 { 1 } else { 2 })?;
        let offsets: Vec<isize> = dirs.iter().map(|d| lattice.offset(d)).collect();
        let h2 = grid.hx * grid.hx;
        let inv_l2h2 = dirs.iter().map(|d| 1.0 / (d.iter().map(|v| v * v).sum::<i64>() as f64 * h2)).collect();
        let axes = offsets[..n].to_vec();
        let (kind, coeff) = match &problem.operator {
            OperatorKind::ExtremalPlus => (Kind::Plus, None),
            OperatorKind::ExtremalMinus => (Kind::Minus, None),
            OperatorKind::LinearNondiv { coefficients } => (
                Kind::Linear,
                Some(CoefficientField::build(coefficients, &lattice, &ell, grid.ht, grid.start_step, grid.n_steps)?),
            ),
            OperatorKind::PLaplacian { p } => (Kind::PLap(*p), None),
        };
        // wide directions (not the axes) are clipped where they leave Ω
        let mut near = vec![NOT_NEAR; lattice.len()];
        let mut clip = Vec::new();
        if n == 2 {
            let dom = &grid.cylinder.base;
            for i in (0..lattice.len()).filter(|&i| mask[i]) {
                let x = lattice.point(i);
                let mut row = [(1.0, 1.0); 8];
                let mut any = false;
                for (k, d) in dirs.iter().enumerate().skip(n) {
                    let floor = clip_floor(d[0] * d[0] + d[1] * d[1]);
                    let arm = |sign: isize| {
                        let j = (i as isize + sign * offsets[k]) as usize;
                        if mask[j] {
                            return 1.0;
                        }
                        let t = crossing(dom, &x, &lattice.point(j));
                        if t >= 1.0 - 1e-12 {
                            1.0
                        } else {
                            t.max(floor)
                        }
                    };
                    row[k] = (arm(1), arm(-1));
                    any |= row[k] != (1.0, 1.0);
                }
                if any {
                    near[i] = clip.len() as u32;
                    clip.push(row);
                }
            }
        }
        Ok(Stepper {
            kind,
            ell,
            lattice,
            mask,
            offsets,
            axes,
            inv_l2h2,
            coeff,
            lateral: problem.lateral,
            ht: grid.ht,
            near,
            clip,
        })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    #[inline]
    fn d2(&self, u: &[f64], i: usize, k: usize) -> f64 {
        let o = self.offsets[k];
        let c = u[i];
        let (f, b) = (u[(i as isize + o) as usize] - c, u[(i as isize - o) as usize] - c);
        let slot = self.near[i];
        if slot != NOT_NEAR {
            let (tp, tm) = self.clip[slot as usize][k];
            if tp != 1.0 || tm != 1.0 {
                // non-uniform three-point difference with the boundary value at the crossing
                return 2.0 / (tp + tm) * (f / tp + b / tm) * self.inv_l2h2[k];
            }
        }
        (f + b) * self.inv_l2h2[k]
    }

    /// Discrete Laplacian on the axis frame; shared by every path that reduces to the heat stencil.
    #[inline]
    fn axis_laplacian(&self, u: &[f64], i: usize) -> f64 {
        let mut s = self.d2(u, i, 0);
        if self.lattice.dim() == 2 {
            s += self.d2(u, i, 1);
        }
        s
    }

    fn pucci(&self, u: &[f64], i: usize, plus: bool) -> f64 {
        let (lam, big) = (self.ell.lambda, self.ell.big_lambda);
        let (lo, hi) = if plus { (lam, big) } else { (big, lam) };
        if self.lattice.dim() == 1 {
            return weight(self.d2(u, i, 0), lo, hi);
        }
        if lam == big {
            return big * self.axis_laplacian(u, i);
        }
        let mut best = if plus { f64::NEG_INFINITY } else { f64::INFINITY };
        for (a, b) in FRAMES_2D {
            let v = weight(self.d2(u, i, a), lo, hi) + weight(self.d2(u, i, b), lo, hi);
            best = if plus { best.max(v) } else { best.min(v) };
        }
        best
    }

    /// Upwind `a|Du|` (plus side) or `−a|Du|` (minus side).
    fn gradient_term(&self, u: &[f64], i: usize, plus: bool) -> f64 {
        if self.ell.a == 0.0 {
            return 0.0;
        }
        let c = u[i];
        let mut s = 0.0;
        for &o in &self.axes {
            let (f, b) = (u[(i as isize + o) as usize], u[(i as isize - o) as usize]);
            let m = if plus { (f - c).max(b - c) } else { (c - f).max(c - b) }.max(0.0);
            s += m * m;
        }
        let g = self.ell.a * s.sqrt() / self.lattice.h;
        if plus {
            g
        } else {
            -g
        }
    }

    /// Stencil direction nearest the discrete gradient, or `None` in the degenerate branch.
    pub(crate) fn plap_direction(&self, u: &[f64], i: usize) -> Option<usize> {
        if self.lattice.dim() == 1 {
            return Some(0);
        }
        let h2 = 2.0 * self.lattice.h;
        let g = [
            (u[(i as isize + self.offsets[0]) as usize] - u[(i as isize - self.offsets[0]) as usize]) / h2,
            (u[(i as isize + self.offsets[1]) as usize] - u[(i as isize - self.offsets[1]) as usize]) / h2,
        ];
        let gn = g[0].hypot(g[1]);
        let scale = (0..8).map(|k| self.d2(u, i, k).abs()).fold(0.0, f64::max);
        if !(gn > 1e-8 * scale && gn > 0.0) {
            return None;
        }
        let mut best = 0;
        let mut best_c = f64::NEG_INFINITY;
        for (k, &(a, b)) in DIRECTIONS_2D.iter().enumerate() {
            let c = (g[0] * a as f64 + g[1] * b as f64).abs() / ((a * a + b * b) as f64).sqrt();
            if c > best_c {
                best_c = c;
                best = k;
            }
        }
        Some(best)
    }

    pub(crate) fn plap_value(&self, u: &[f64], i: usize, p: f64, dir: Option<usize>) -> f64 {
        if self.lattice.dim() == 1 {
            return (p - 1.0) * self.d2(u, i, 0);
        }
        match dir {
            Some(nu) if p >= 2.0 => self.axis_laplacian(u, i) + (p - 2.0) * self.d2(u, i, nu),
            Some(nu) => {
                let perp = nu ^ 1;
                (p - 1.0) * self.d2(u, i, nu) + self.d2(u, i, perp)
            }
            None if p >= 2.0 => {
                let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                for k in 0..8 {
                    let v = self.d2(u, i, k);
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                self.axis_laplacian(u, i) + (p - 2.0) * 0.5 * (lo + hi)
            }
            None => {
                let total: f64 = (0..8).map(|k| self.d2(u, i, k)).sum();
                0.5 * p * 0.25 * total
            }
        }
    }

    /// `D_h[u]` at an interior node.
    pub fn operator_value(&self, u: &[f64], i: usize, step: i64) -> f64 {
        match self.kind {
            Kind::Plus => {
                self.pucci(u, i, true) + self.gradient_term(u, i, true) + self.ell.b * u[i].abs()
            }
            Kind::Minus => {
                self.pucci(u, i, false) + self.gradient_term(u, i, false) - self.ell.b * u[i].abs()
            }
            Kind::Linear => {
                let cf = self.coeff.as_ref().expect("linear stepper carries its coefficients");
                let mut w = [0.0; 8];
                let w = &mut w[..cf.ndir()];
                cf.weights(i, step, w);
                let mut s = 0.0;
                for (k, c) in w.iter().enumerate() {
                    s += c * self.d2(u, i, k);
                }
                s
            }
            Kind::PLap(p) => self.plap_value(u, i, p, self.plap_direction(u, i)),
        }
    }

    /// Advances `u` from absolute step `step` to `step + 1`.
    pub fn advance(&self, u: &[f64], out: &mut [f64], step: i64) -> Result<()> {
        out.par_iter_mut().enumerate().for_each(|(i, o)| {
            *o = if self.mask[i] { u[i] + self.ht * self.operator_value(u, i, step) } else { self.lateral };
        });
        if let Some(index) = out.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index, step: (step + 1).max(0) as usize });
        }
        Ok(())
    }
}

fn meta_for(problem: &ProblemSpec, grid: &GridSpec) -> Result<FieldMeta> {
    Ok(FieldMeta {
        label: problem.name(),
        problem: problem.name(),
        domain: grid.cylinder.base.clone(),
        ell: problem.effective_ell()?,
        seed: problem.seed(),
        lateral: problem.lateral,
    })
}

fn run(stepper: &Stepper, problem: &ProblemSpec, grid: &GridSpec, initial: Vec<f64>) -> Result<GridField> {
    let lat = stepper.lattice.clone();
    if initial.len() != lat.len() {
        return Err(Error::GridMismatch(format!("initial slice has {} values, lattice {}", initial.len(), lat.len())));
    }
    let mut u: Vec<f64> =
        initial.iter().zip(&stepper.mask).map(|(&v, &m)| if m { v } else { problem.lateral }).collect();
    if let Some(index) = u.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index, step: 0 });
    }
    let mut next = vec![0.0; u.len()];
    let mut times = vec![grid.time_of(grid.start_step)];
    let mut data = u.clone();
    for j in 0..grid.n_steps {
        let step = grid.start_step + j as i64;
        stepper.advance(&u, &mut next, step)?;
        std::mem::swap(&mut u, &mut next);
        if (j + 1) % grid.save_every == 0 {
            times.push(grid.time_of(step + 1));
            data.extend_from_slice(&u);
        }
    }
    Ok(GridField { lattice: lat, ht: grid.ht, horizon: grid.cylinder.horizon, times, data, meta: meta_for(problem, grid)? })
}

/// Solves from the problem's initial datum.
pub fn solve(problem: &ProblemSpec, grid: &GridSpec) -> Result<GridField> {
    let stepper = Stepper::new(problem, grid)?;
    let init = problem.initial.on_lattice(&grid.cylinder.base, &stepper.lattice, problem.lateral)?;
    run(&stepper, problem, grid, init)
}

/// Solves from an explicit lattice slice at step `grid.start_step`.
pub fn solve_from(problem: &ProblemSpec, grid: &GridSpec, initial: &[f64]) -> Result<GridField> {
    let stepper = Stepper::new(problem, grid)?;
    run(&stepper, problem, grid, initial.to_vec())
}

#[cfg(test)]
pub(crate) fn solve_unchecked(problem: &ProblemSpec, grid: &GridSpec) -> Result<GridField> {
    let stepper = Stepper::new_unchecked(problem, grid)?;
    let init = problem.initial.on_lattice(&grid.cylinder.base, &stepper.lattice, problem.lateral)?;
    run(&stepper, problem, grid, init)
}

/// One step of the scheme from absolute step `step`.
pub fn step(u: &[f64], problem: &ProblemSpec, grid: &GridSpec, step: i64) -> Result<Vec<f64>> {
    let stepper = Stepper::new(problem, grid)?;
    let mut out = vec![0.0; u.len()];
    if u.len() != stepper.lattice.len() {
        return Err(Error::GridMismatch(format!("slice has {} values, lattice {}", u.len(), stepper.lattice.len())));
    }
    stepper.advance(u, &mut out, step)?;
    Ok(out)
}

/// True iff `sub ≤ sup` on the parabolic boundary implies `sub ≤ sup` on every saved node.
pub fn discrete_comparison_check(sub: &GridField, sup: &GridField) -> Result<bool> {
    if !sub.same_grid(sup) || sub.meta.domain != sup.meta.domain {
        return Err(Error::GridMismatch("comparison needs fields on the same lattice and times".into()));
    }
    let mask = sub.mask();
    let mut boundary_ordered = true;
    for k in 0..sub.n_slices() {
        let (a, b) = (sub.slice(k), sup.slice(k));
        for i in 0..a.len() {
            let on_boundary = k == 0 || !mask[i];
            if on_boundary && a[i] > b[i] {
                boundary_ordered = false;
            }
        }
    }
    if !boundary_ordered {
        return Ok(true);
    }
    Ok(sub.data.iter().zip(&sup.data).all(|(a, b)| a <= b))
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::super::{CoefficientSpec, InitialDatum, DEFAULT_C_CFL};
    use super::*;
    use crate::geometry::{Cylinder, DomainSpec};
    use crate::operators::SymMatrix;

    fn disk() -> Cylinder {
        Cylinder::new(DomainSpec::Disk { center: vec![0.0, 0.0], radius: 1.0 }, 0.05).unwrap()
    }

    fn bump() -> InitialDatum {
        InitialDatum::Bump { center: vec![0.1, -0.2], radius: 0.7, amplitude: 1.0 }
    }

    fn problems() -> Vec<ProblemSpec> {
        let ell = Ellipticity::new(0.5, 2.0, 1.0, 0.0).unwrap();
        let mk = |operator| ProblemSpec { operator, ell, initial: bump(), lateral: 0.0 };
        vec![
            mk(OperatorKind::ExtremalPlus),
            mk(OperatorKind::ExtremalMinus),
            mk(OperatorKind::LinearNondiv {
                coefficients: CoefficientSpec::Random { seed: 3, cell: 0.25, slab: 0.01, origin_step: 0 },
            }),
            mk(OperatorKind::PLaplacian { p: 3.0 }),
            mk(OperatorKind::PLaplacian { p: 1.5 }),
        ]
    }

    fn grid(problem: &ProblemSpec, cyl: Cylinder, hx: f64) -> GridSpec {
        GridSpec::for_problem(cyl, hx, problem, 5, DEFAULT_C_CFL).unwrap()
    }

    #[test]
    fn constants_are_unchanged() {
        for mut pr in problems() {
            pr.initial = InitialDatum::Constant { value: 0.75 };
            pr.lateral = 0.75;
            let g = grid(&pr, disk(), 1.0 / 16.0);
            let f = solve(&pr, &g).unwrap();
            assert!(f.data.iter().all(|&v| v == 0.75), "{}", pr.name());
        }
    }

    #[test]
    fn unit_ellipticity_is_the_heat_stencil() {
        let ell = Ellipticity::pucci(1.0, 1.0).unwrap();
        let pr = ProblemSpec { operator: OperatorKind::ExtremalPlus, ell, initial: bump(), lateral: 0.0 };
        let g = grid(&pr, disk(), 1.0 / 16.0);
        let st = Stepper::new(&pr, &g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u: Vec<f64> = (0..st.lattice.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (nx, h2) = (st.lattice.dims[0], g.hx * g.hx);
        for i in (0..u.len()).filter(|&i| st.mask[i]) {
            let heat = ((u[i + 1] - u[i]) + (u[i - 1] - u[i])) / h2 + ((u[i + nx] - u[i]) + (u[i - nx] - u[i])) / h2;
            assert!((st.operator_value(&u, i, 0) - heat).abs() <= 1e-12 * heat.abs().max(1.0));
        }
    }

    fn probe_update(st: &Stepper, u: &[f64], i: usize, dir: Option<Option<usize>>) -> f64 {
        let d = match (st.kind, dir) {
            (Kind::PLap(p), Some(frozen)) => st.plap_value(u, i, p, frozen),
            _ => st.operator_value(u, i, 7),
        };
        u[i] + st.ht * d
    }

    #[test]
    fn update_is_monotone_in_every_stencil_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for pr in problems() {
            let g = grid(&pr, disk(), 1.0 / 16.0);
            let st = Stepper::new(&pr, &g).unwrap();
            let interior: Vec<usize> = (0..st.lattice.len()).filter(|&i| st.mask[i]).collect();
            for _ in 0..200 {
                let u: Vec<f64> = (0..st.lattice.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let i = interior[rng.gen_range(0..interior.len())];
                // the p-Laplacian is monotone for a frozen frame; the frame itself follows the gradient
                let frozen = matches!(st.kind, Kind::PLap(_)).then(|| st.plap_direction(&u, i));
                let base = probe_update(&st, &u, i, frozen);
                let k = rng.gen_range(0..st.offsets.len());
                let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
                let j = if rng.gen_bool(0.2) { i } else { (i as isize + sign * st.offsets[k]) as usize };
                let mut v = u.clone();
                v[j] += rng.gen_range(1e-6..0.5);
                let raised = probe_update(&st, &v, i, frozen);
                assert!(raised >= base - 1e-12, "{}: {raised} < {base}", pr.name());
            }
        }
    }

    #[test]
    fn zero_data_give_the_zero_field() {
        for mut pr in problems() {
            pr.initial = InitialDatum::Constant { value: 0.0 };
            let f = solve(&pr, &grid(&pr, disk(), 1.0 / 16.0)).unwrap();
            assert!(f.data.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn nonnegative_data_stay_nonnegative() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for run in 0..10 {
            let pr = &problems()[run % 5];
            let g = grid(pr, disk(), 1.0 / 16.0);
            let lat = g.lattice().unwrap();
            let vals: Vec<f64> = (0..lat.len()).map(|_| rng.gen_range(0.0..1.0)).collect();
            let f = solve_from(pr, &g, &vals).unwrap();
            assert!(f.data.iter().all(|&v| v >= 0.0), "{}", pr.name());
        }
    }

    #[test]
    fn ordered_data_stay_ordered() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        // the p-Laplacian frame follows the gradient, so only the other operators are monotone
        for run in 0..20 {
            let pr = &problems()[run % 3];
            let g = grid(pr, disk(), 1.0 / 12.0);
            let lat = g.lattice().unwrap();
            let lo: Vec<f64> = (0..lat.len()).map(|_| rng.gen_range(0.0..1.0)).collect();
            let hi: Vec<f64> = lo.iter().map(|v| v + if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.0..0.5) }).collect();
            let a = solve_from(pr, &g, &lo).unwrap();
            let b = solve_from(pr, &g, &hi).unwrap();
            let bad = a.data.iter().zip(&b.data).enumerate().find(|(_, (x, y))| x > y);
            assert!(bad.is_none(), "{} {:?}", pr.name(), bad);
            assert!(discrete_comparison_check(&a, &b).unwrap());
        }
    }

    #[test]
    fn restart_from_a_slice_is_bit_exact() {
        for pr in problems().iter().filter(|p| p.is_autonomous()) {
            let g = grid(pr, disk(), 1.0 / 16.0);
            let full = solve(pr, &g).unwrap();
            let k = 2;
            let rest = solve_from(pr, &g.restarted(k).unwrap(), full.slice(k)).unwrap();
            assert_eq!(rest.times[..], full.times[k..]);
            assert_eq!(rest.data[..], full.data[k * full.lattice.len()..]);
        }
    }

    #[test]
    fn shifted_coefficients_shift_the_field() {
        let pr = &problems()[2];
        let g = grid(pr, disk(), 1.0 / 16.0);
        let a = solve(pr, &g).unwrap();
        let shift = 37;
        let mut q = pr.clone();
        if let OperatorKind::LinearNondiv { coefficients: CoefficientSpec::Random { origin_step, .. } } = &mut q.operator {
            *origin_step += shift;
        }
        let b = solve(&q, &g.shifted(shift)).unwrap();
        assert_eq!(a.data, b.data);
        for (s, t) in a.times.iter().zip(&b.times) {
            assert_eq!(*t, (shift as f64 + s / g.ht).round() * g.ht);
        }
    }

    #[test]
    fn heat_on_the_strip_converges() {
        use super::super::{heat_reference, HeatMode};
        let ell = Ellipticity::pucci(1.0, 1.0).unwrap();
        let pr = ProblemSpec {
            operator: OperatorKind::ExtremalPlus,
            ell,
            initial: InitialDatum::Sine { amplitude: 1.0 },
            lateral: 0.0,
        };
        let mut errs = Vec::new();
        for m in [32.0, 64.0, 128.0] {
            let cyl = Cylinder::new(DomainSpec::Interval { length: 1.0 }, 0.1).unwrap();
            let f = solve(&pr, &grid(&pr, cyl, 1.0 / m)).unwrap();
            let mut err = 0.0f64;
            for k in 0..f.n_slices() {
                for (i, v) in f.slice(k).iter().enumerate() {
                    let x = f.lattice.point(i);
                    if (0.0..=1.0).contains(&x[0]) {
                        err = err.max((v - heat_reference(&x, f.times[k], HeatMode::StripSine)).abs());
                    }
                }
            }
            errs.push(err);
        }
        assert!(errs[2] < 1e-2, "{errs:?}");
        assert!(errs[0] / errs[1] >= 1.8 && errs[1] / errs[2] >= 1.8, "{errs:?}");
    }

    #[test]
    fn p_two_matches_the_linear_heat_path() {
        let heat = ProblemSpec {
            operator: OperatorKind::LinearNondiv { coefficients: CoefficientSpec::Constant { matrix: SymMatrix::identity(2) } },
            ell: Ellipticity::pucci(1.0, 1.0).unwrap(),
            initial: bump(),
            lateral: 0.0,
        };
        let plap = ProblemSpec { operator: OperatorKind::PLaplacian { p: 2.0 }, ..heat.clone() };
        let g = grid(&heat, disk(), 1.0 / 16.0);
        assert_eq!(solve(&heat, &g).unwrap().data, solve(&plap, &g).unwrap().data);
    }

    #[test]
    fn linear_residual_is_sandwiched_by_the_extremal_stencils() {
        let pr = &problems()[2];
        let g = grid(pr, disk(), 1.0 / 16.0);
        let f = solve(pr, &g).unwrap();
        let lin = Stepper::new(pr, &g).unwrap();
        let plus = Stepper::new(&ProblemSpec { operator: OperatorKind::ExtremalPlus, ..pr.clone() }, &g).unwrap();
        let minus = Stepper::new(&ProblemSpec { operator: OperatorKind::ExtremalMinus, ..pr.clone() }, &g).unwrap();
        let u = f.slice(1);
        for i in (0..u.len()).filter(|&i| lin.mask[i]) {
            let step = g.save_every as i64;
            let d = lin.operator_value(u, i, step);
            let tol = 1e-12 * d.abs().max(1.0);
            assert!(minus.pucci(u, i, false) <= d + tol && d <= plus.pucci(u, i, true) + tol);
        }
    }

    #[test]
    fn cfl_violation_is_rejected_and_its_fixture_breaks_order() {
        let ell = Ellipticity::pucci(1.0, 1.0).unwrap();
        let cyl = Cylinder::new(DomainSpec::Interval { length: 1.0 }, 0.02).unwrap();
        let zero = ProblemSpec {
            operator: OperatorKind::ExtremalPlus,
            ell,
            initial: InitialDatum::Constant { value: 0.0 },
            lateral: 0.0,
        };
        let mut g = grid(&zero, cyl, 1.0 / 32.0);
        g.ht *= 3.0;
        assert!(matches!(solve(&zero, &g), Err(Error::CflViolation { .. })));
        let lat = g.lattice().unwrap();
        let checker: Vec<f64> = (0..lat.len()).map(|i| (i % 2) as f64).collect();
        let wild = ProblemSpec { initial: InitialDatum::Values { values: checker }, ..zero.clone() };
        let sub = solve_unchecked(&zero, &g).unwrap();
        let sup = solve_unchecked(&wild, &g).unwrap();
        assert!(!discrete_comparison_check(&sub, &sup).unwrap());
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let pr = &problems()[0];
        let a = solve(pr, &grid(pr, disk(), 1.0 / 8.0)).unwrap();
        let b = solve(pr, &grid(pr, disk(), 1.0 / 10.0)).unwrap();
        assert!(matches!(discrete_comparison_check(&a, &b), Err(Error::GridMismatch(_))));
        assert!(discrete_comparison_check(&a, &a).unwrap());
    }
}
