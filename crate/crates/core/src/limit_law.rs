//! Limiting law of the hermitized singular values.
//!
//! For fixed `z`, the Stieltjes transform `S(alpha, z)` of the symmetrized
//! limit law solves
//!
//! ```text
//!     S (alpha + S)^2 + (alpha + S) - |z|^2 S = 0,
//! ```
//!
//! i.e. the cubic `S^3 + 2 alpha S^2 + (alpha^2 + 1 - |z|^2) S + alpha = 0`.
//! With `y = S + alpha` it becomes `y^3 - alpha y^2 + (1 - |z|^2) y + alpha |z|^2 = 0`,
//! whose real-root structure on the real axis fixes the support.

use num_traits::Zero;

use crate::error::{invalid, Error, Result};
use crate::scalar::{cx, Cx, Real};

/// Points in the default symmetric grid.
pub const DEFAULT_GRID_POINTS: usize = 2001;
/// Margin beyond `±x1` covered by the default grid.
pub const DEFAULT_GRID_MARGIN: f64 = 0.5;
/// Height above the real axis used for off-axis Herglotz evaluation.
pub const DEFAULT_V0: f64 = 1e-6;
/// Distance from a threshold inside which the root count is not reported.
pub const BOUNDARY_TOL: f64 = 1e-6;
/// Imaginary-part tolerance for calling a root real.
pub const REAL_ROOT_TOL: f64 = 1e-9;

/// The three complex roots of a cubic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicRoots<T> {
    pub roots: [Cx<T>; 3],
}

impl<T: Real> CubicRoots<T> {
    pub fn iter(&self) -> impl Iterator<Item = &Cx<T>> {
        self.roots.iter()
    }
}

fn eval_monic<T: Real>(b: Cx<T>, c: Cx<T>, d: Cx<T>, y: Cx<T>) -> (Cx<T>, Cx<T>) {
    let p = ((y + b) * y + c) * y + d;
    let dp = (y * T::lit(3.0) + b * T::lit(2.0)) * y + c;
    (p, dp)
}

/// Roots of the monic cubic `y^3 + b y^2 + c y + d` by Cardano's formula,
/// each polished by at most three guarded Newton steps.
pub fn cubic_roots<T: Real>(b: Cx<T>, c: Cx<T>, d: Cx<T>) -> CubicRoots<T> {
    let three = T::lit(3.0);
    let d0 = b * b - c * three;
    let d1 = b * b * b * T::lit(2.0) - b * c * T::lit(9.0) + d * T::lit(27.0);
    let sq = (d1 * d1 - d0 * d0 * d0 * T::lit(4.0)).sqrt();
    let (w1, w2) = ((d1 + sq) * T::lit(0.5), (d1 - sq) * T::lit(0.5));
    let w = if w1.norm() >= w2.norm() { w1 } else { w2 };
    let mut roots = [-b / three; 3];
    if w.norm() > T::zero() {
        let cbrt = Cx::from_polar(w.norm().cbrt(), w.arg() / three);
        let omega = Cx::from_polar(T::one(), T::lit(2.0) * T::PI() / three);
        let mut ck = cbrt;
        for r in roots.iter_mut() {
            *r = -(b + ck + d0 / ck) / three;
            ck = ck * omega;
        }
    }
    for r in roots.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = eval_monic(b, c, d, *r);
            if p.is_zero() || dp.is_zero() {
                break;
            }
            let cand = *r - p / dp;
            if eval_monic(b, c, d, cand).0.norm() < p.norm() {
                *r = cand;
            } else {
                break;
            }
        }
    }
    CubicRoots { roots }
}

/// `S (alpha + S)^2 + (alpha + S) - |z|^2 S`.
pub fn stieltjes_residual<T: Real>(s: Cx<T>, alpha: Cx<T>, z: Cx<T>) -> Cx<T> {
    let y = alpha + s;
    s * y * y + y - s * z.norm_sqr()
}

/// The three roots in `S` of the self-consistent cubic at `(alpha, z)`.
pub fn solve_cubic<T: Real>(alpha: Cx<T>, z: Cx<T>) -> CubicRoots<T> {
    let t = z.norm_sqr();
    cubic_roots(
        alpha * T::lit(2.0),
        alpha * alpha + Cx::from(T::one() - t),
        alpha,
    )
}

/// Roots in `y` of `y^3 - x y^2 + (1 - |z|^2) y + x |z|^2` for complex `x`.
pub fn solve_shifted_cubic<T: Real>(x: Cx<T>, z: Cx<T>) -> CubicRoots<T> {
    let t = z.norm_sqr();
    cubic_roots(-x, Cx::from(T::one() - t), x * t)
}

fn ambiguity_error<T: Real>(alpha: Cx<T>, roots: &CubicRoots<T>) -> Error {
    let r = roots.roots.map(|r| (r.re.to_f64_lossy(), r.im.to_f64_lossy()));
    Error::AmbiguousBranch {
        alpha_re: alpha.re.to_f64_lossy(),
        alpha_im: alpha.im.to_f64_lossy(),
        roots: r,
    }
}

/// `S(alpha, z)`: the root with positive imaginary part.
///
/// When more than one root sits in the upper half plane (or the signs are
/// within rounding), the branch is tracked down the vertical path from
/// `alpha + 10i`, where the Herglotz root is isolated near `-1/alpha`.
pub fn stieltjes_limit<T: Real>(alpha: Cx<T>, z: Cx<T>) -> Result<Cx<T>> {
    if !(alpha.im > T::zero()) {
        return invalid(format!("limit Stieltjes transform needs Im alpha > 0, got {alpha}"));
    }
    let roots = solve_cubic(alpha, z);
    let noise = T::lit(1e-12);
    let upper: Vec<&Cx<T>> = roots.iter().filter(|r| r.im > noise * (T::one() + r.norm())).collect();
    let near_axis = roots.iter().filter(|r| r.im.abs() <= noise * (T::one() + r.norm())).count();
    if upper.len() == 1 && near_axis == 0 {
        return Ok(*upper[0]);
    }
    track_branch(alpha, z)
}

fn track_branch<T: Real>(alpha: Cx<T>, z: Cx<T>) -> Result<Cx<T>> {
    let start_v = alpha.im + T::lit(10.0);
    let start = solve_cubic(cx(alpha.re, start_v), z);
    let mut s = *start
        .iter()
        .max_by(|a, b| a.im.partial_cmp(&b.im).expect("finite roots"))
        .expect("three roots");
    let mut v = start_v;
    let base_step = T::lit(0.1);
    let min_step = T::lit(1e-4);
    let mut step = base_step;
    while v > alpha.im {
        let next_v = (v - step).max(alpha.im);
        let roots = solve_cubic(cx(alpha.re, next_v), z);
        let mut by_dist: Vec<(T, Cx<T>)> = roots.iter().map(|r| ((*r - s).norm(), *r)).collect();
        by_dist.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"));
        let separated = by_dist[1].0 > T::lit(2.0) * by_dist[0].0;
        if !separated {
            if step > min_step {
                step = step / T::lit(10.0);
                continue;
            }
            return Err(ambiguity_error(alpha, &roots));
        }
        s = by_dist[0].1;
        v = next_v;
        step = (step * T::lit(10.0)).min(base_step);
    }
    Ok(s)
}

/// Support thresholds `(x1, x2)` of the symmetrized law.
///
/// `x1^2 = (5 + 2t)/2 + ((1 + 8t)^{3/2} - 1)/(8t)` and
/// `x2^2 = (5 + 2t)/2 - ((1 + 8t)^{3/2} + 1)/(8t)` with `t = |z|^2`; `x2`
/// is reported as 0 for `|z| <= 1`.
pub fn support_thresholds<T: Real>(z: Cx<T>) -> (T, T) {
    let t = z.norm_sqr();
    let u = T::lit(8.0) * t;
    let half = T::lit(0.5);
    let base = (T::lit(5.0) + T::lit(2.0) * t) * half;
    let p = (T::one() + u).powf(T::lit(1.5));
    // ((1+u)^{3/2} - 1)/u = (3 + 3u + u^2) / ((1+u)^{3/2} + 1), finite at u = 0
    let frac = (T::lit(3.0) + T::lit(3.0) * u + u * u) / (p + T::one());
    let x1 = (base + frac).sqrt();
    let x2 = if t > T::one() {
        (base - (p + T::one()) / u).max(T::zero()).sqrt()
    } else {
        T::zero()
    };
    (x1, x2)
}

/// Whether the symmetrized limit density vanishes at `x`.
pub fn outside_support<T: Real>(x: T, z: Cx<T>) -> bool {
    let (x1, x2) = support_thresholds(z);
    let ax = x.abs();
    ax >= x1 || (z.norm_sqr() > T::one() && ax <= x2)
}

/// Number of real roots (1 or 3) of the shifted cubic at real `x`.
pub fn root_count<T: Real>(x: T, z: Cx<T>) -> Result<usize> {
    let (x1, x2) = support_thresholds(z);
    let tol = T::lit(BOUNDARY_TOL);
    let ax = x.abs();
    if (ax - x1).abs() < tol || (z.norm_sqr() >= T::one() && (ax - x2).abs() < tol) {
        return Err(Error::BoundaryIndeterminate {
            x: x.to_f64_lossy(),
            tol: BOUNDARY_TOL,
        });
    }
    let roots = solve_shifted_cubic(Cx::from(x), z);
    let eps = T::lit(REAL_ROOT_TOL);
    Ok(roots
        .iter()
        .filter(|r| r.im.abs() <= eps * T::one().max(r.norm()))
        .count())
}

/// `p~(x, z)`: density of the symmetrized limit law at real `x`.
///
/// Zero wherever the shifted cubic has three real roots; elsewhere `1/pi`
/// times the imaginary part of the upper member of the conjugate pair.
pub fn density_at<T: Real>(x: T, z: Cx<T>) -> T {
    if outside_support(x, z) {
        return T::zero();
    }
    let roots = solve_cubic(Cx::from(x), z);
    let top = roots.iter().map(|r| r.im).fold(T::zero(), T::max);
    top / T::PI()
}

/// Density and distribution function of the symmetrized limit law on a
/// symmetric grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitSolution<T> {
    pub z: Cx<T>,
    pub x_grid: Vec<T>,
    pub density: Vec<T>,
    /// `F~` at each grid point, normalized so the last entry is 1.
    pub cdf: Vec<T>,
    pub x1: T,
    pub x2: T,
    /// Trapezoid integral of the density before normalization.
    pub mass: T,
}

/// Symmetric grid of `points` nodes over `[-(x1 + margin), x1 + margin]`.
pub fn default_grid<T: Real>(z: Cx<T>, points: usize, margin: T) -> Vec<T> {
    let (x1, _) = support_thresholds(z);
    symmetric_grid(x1 + margin, points)
}

/// `points` nodes on `[-half_width, half_width]`, exactly antisymmetric.
pub fn symmetric_grid<T: Real>(half_width: T, points: usize) -> Vec<T> {
    assert!(points >= 2);
    let last = T::from_usize_lossy(points - 1);
    let mut g: Vec<T> = (0..points)
        .map(|i| half_width * (T::lit(2.0) * T::from_usize_lossy(i) / last - T::one()))
        .collect();
    for i in 0..points / 2 {
        g[points - 1 - i] = -g[i];
    }
    if points % 2 == 1 {
        g[points / 2] = T::zero();
    }
    g
}

pub fn density<T: Real>(z: Cx<T>, x_grid: &[T]) -> Result<LimitSolution<T>> {
    let (x1, x2) = support_thresholds(z);
    let n = x_grid.len();
    if n < 3 {
        return invalid("density grid needs at least 3 points");
    }
    if x_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return invalid("density grid must be strictly ascending");
    }
    let scale = x_grid[n - 1].abs().max(T::one());
    let sym_tol = T::lit(1e-12) * scale;
    if (0..n / 2).any(|i| (x_grid[i] + x_grid[n - 1 - i]).abs() > sym_tol) {
        return invalid("density grid must be symmetric about 0");
    }
    if x_grid[0] > -x1 || x_grid[n - 1] < x1 {
        return invalid(format!("density grid must cover [-x1, x1] with x1 = {x1}"));
    }
    let max_gap = x_grid.windows(2).map(|w| w[1] - w[0]).fold(T::zero(), T::max);
    if max_gap > x1 / T::lit(200.0) {
        return invalid(format!("grid spacing {max_gap} exceeds x1/200 = {}", x1 / T::lit(200.0)));
    }
    let dens: Vec<T> = x_grid.iter().map(|&x| density_at(x, z)).collect();
    let half = T::lit(0.5);
    let mut cum = Vec::with_capacity(n);
    cum.push(T::zero());
    for i in 1..n {
        let step = (x_grid[i] - x_grid[i - 1]) * (dens[i] + dens[i - 1]) * half;
        cum.push(cum[i - 1] + step);
    }
    let mass = cum[n - 1];
    if !(mass > T::zero()) {
        return Err(Error::InvalidInput("limit density integrates to zero on the grid".into()));
    }
    let cdf = cum.iter().map(|c| *c / mass).collect();
    Ok(LimitSolution {
        z,
        x_grid: x_grid.to_vec(),
        density: dens,
        cdf,
        x1,
        x2,
        mass,
    })
}

/// [`density`] on the default grid.
pub fn density_default<T: Real>(z: Cx<T>) -> Result<LimitSolution<T>> {
    density(z, &default_grid(z, DEFAULT_GRID_POINTS, T::lit(DEFAULT_GRID_MARGIN)))
}

impl<T: Real> LimitSolution<T> {
    /// `F~(x, z)` by linear interpolation; 0 left of the grid, 1 right of it.
    pub fn cdf_at(&self, x: T) -> T {
        let g = &self.x_grid;
        if x <= g[0] {
            return T::zero();
        }
        if x >= g[g.len() - 1] {
            return T::one();
        }
        let k = g.partition_point(|p| *p <= x);
        let (x0, x1) = (g[k - 1], g[k]);
        let w = (x - x0) / (x1 - x0);
        self.cdf[k - 1] + w * (self.cdf[k] - self.cdf[k - 1])
    }

    /// Distribution function of the squared law, `F(x) = 2 F~(sqrt x) - 1`.
    pub fn squared_cdf_at(&self, x: T) -> T {
        if x <= T::zero() {
            return T::zero();
        }
        (T::lit(2.0) * self.cdf_at(x.sqrt()) - T::one()).max(T::zero()).min(T::one())
    }

    /// CSV with header `x,density,cdf`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,density,cdf\n");
        for ((x, d), c) in self.x_grid.iter().zip(&self.density).zip(&self.cdf) {
            s.push_str(&format!("{x},{d},{c}\n"));
        }
        s
    }
}

/// `F~(x, z)` from a solved grid.
pub fn limit_cdf<T: Real>(sol: &LimitSolution<T>, x: T) -> T {
    sol.cdf_at(x)
}

/// Marchenko-Pastur density `(1/2pi) sqrt((4 - x)/x)` on `(0, 4)`.
pub fn mp_density<T: Real>(x: T) -> T {
    if x > T::zero() && x < T::lit(4.0) {
        ((T::lit(4.0) - x) / x).sqrt() / (T::lit(2.0) * T::PI())
    } else {
        T::zero()
    }
}

/// Marchenko-Pastur distribution function; with `x = 4 sin^2 theta` it is
/// `(2/pi)(theta + sin(2 theta)/2)`.
pub fn mp_cdf<T: Real>(x: T) -> T {
    if x <= T::zero() {
        return T::zero();
    }
    if x >= T::lit(4.0) {
        return T::one();
    }
    let theta = (x.sqrt() * T::lit(0.5)).asin();
    T::lit(2.0) / T::PI() * (theta + (T::lit(2.0) * theta).sin() * T::lit(0.5))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn semicircle(x: f64) -> f64 {
        if x.abs() < 2.0 {
            (4.0 - x * x).sqrt() / (2.0 * std::f64::consts::PI)
        } else {
            0.0
        }
    }

    fn semicircle_cdf(x: f64) -> f64 {
        let x = x.clamp(-2.0, 2.0);
        0.5 + (x * (4.0 - x * x).sqrt() / 4.0 + (x / 2.0).asin()) / std::f64::consts::PI
    }

    #[test]
    fn cubic_at_zero_shift_contains_quadratic_root() {
        let roots = solve_cubic(cx(0.0, 1.0), cx(0.0, 0.0));
        // S^2 + alpha S + 1 = 0 gives S = (-alpha + sqrt(alpha^2 - 4))/2
        let want = cx(0.0, (5f64.sqrt() - 1.0) / 2.0);
        assert!(roots.iter().any(|r| (r - want).norm() < 1e-12));
        assert!(roots.iter().any(|r| (r - cx(0.0, -1.0)).norm() < 1e-12));
    }

    #[test]
    fn shift_identity_between_the_two_cubics() {
        for (a, z) in [(cx(0.3, 0.2), cx(0.5, 0.1)), (cx(-1.2, 0.01), cx(1.4, -0.3)), (cx(2.0, 3.0), cx(0.0, 2.0))] {
            let mut s: Vec<Cx<f64>> = solve_cubic(a, z).roots.iter().map(|r| r + a).collect();
            let mut y: Vec<Cx<f64>> = solve_shifted_cubic(a, z).roots.to_vec();
            let key = |c: &Cx<f64>| (c.re * 1e6).round() as i64 * 1_000_000_000 + (c.im * 1e6).round() as i64;
            s.sort_by_key(key);
            y.sort_by_key(key);
            for (p, q) in s.iter().zip(&y) {
                assert!((p - q).norm() < 1e-10, "{p} vs {q}");
            }
        }
    }

    #[test]
    fn cubic_residuals_on_random_inputs() {
        use rand::Rng;
        let mut rng = crate::rng::stream(1, crate::rng::Experiment::Custom, 0);
        for _ in 0..1000 {
            let a = cx(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
            let z = cx(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            for r in solve_cubic(a, z).iter() {
                let res = stieltjes_residual(*r, a, z).norm();
                assert!(res <= 1e-10 * (1.0f64 + a.norm()).powi(3), "a={a} z={z} res={res}");
            }
        }
    }

    #[test]
    fn stieltjes_limit_closed_forms() {
        let s = stieltjes_limit(cx(0.0, 1.0), cx(0.0, 0.0)).unwrap();
        assert!((s - cx(0.0, (5f64.sqrt() - 1.0) / 2.0)).norm() < 1e-12);
        let s = stieltjes_limit(cx(0.0, 2.0), cx(0.0, 0.0)).unwrap();
        assert!((s - cx(0.0, 2f64.sqrt() - 1.0)).norm() < 1e-12);
        assert!(stieltjes_limit(cx(1.0, 0.0), cx(0.0, 0.0)).is_err());
    }

    #[test]
    fn stieltjes_limit_matches_semicircle_transform() {
        // at z = 0, S is the semicircle transform (-alpha + sqrt(alpha^2 - 4))/2
        for a in [cx(0.5, 0.01), cx(-1.9, 0.001), cx(3.0, 0.2), cx(-2.5, 1e-5)] {
            let s = stieltjes_limit(a, cx(0.0, 0.0)).unwrap();
            let r = (a * a - 4.0).sqrt();
            let cand = [(-a + r) / 2.0, (-a - r) / 2.0];
            let want = if cand[0].im > cand[1].im { cand[0] } else { cand[1] };
            assert!((s - want).norm() < 1e-9, "alpha={a}: {s} vs {want}");
        }
    }

    #[test]
    fn modulus_bound_on_grid() {
        for i in 0..20 {
            for j in 0..20 {
                let v = 0.05 + (5.0 - 0.05) * i as f64 / 19.0;
                let u = -4.0 + 8.0 * j as f64 / 19.0;
                for zm in [0.0, 0.5, 1.0, 1.5, 2.0] {
                    let s = stieltjes_limit(cx(u, v), cx(zm, 0.0)).unwrap();
                    assert!(s.norm() <= 1.0 + 1e-12);
                    assert!(s.im > 0.0);
                }
            }
        }
    }

    #[test]
    fn thresholds() {
        let (a, b) = support_thresholds(cx(0.0f64, 0.0));
        assert!((a - 2.0).abs() < 1e-12 && b == 0.0);
        let (a, b) = support_thresholds(cx(1.0f64, 0.0));
        assert!((a - 6.75f64.sqrt()).abs() < 1e-12 && b == 0.0);
        let (a, b) = support_thresholds(cx(0.0f64, 2.0));
        let p = 33f64.powf(1.5);
        assert!((a - (6.5 + (p - 1.0) / 32.0).sqrt()).abs() < 1e-12);
        assert!((b - (6.5 - (p + 1.0) / 32.0).sqrt()).abs() < 1e-12);
        assert!((a - 3.5203).abs() < 1e-4 && (b - 0.7381).abs() < 1e-4);
        // removable singularity: direct formula at |z|^2 = 1e-8
        let t = 1e-8f64;
        let direct = ((5.0 + 2.0 * t) / 2.0 + ((1.0 + 8.0 * t).powf(1.5) - 1.0) / (8.0 * t)).sqrt();
        let (a, _) = support_thresholds(cx(t.sqrt(), 0.0));
        assert!((a - direct).abs() < 1e-6);
    }

    #[test]
    fn root_counts() {
        assert_eq!(root_count(0.0, cx(0.5, 0.0)).unwrap(), 1);
        assert_eq!(root_count(3.0, cx(0.5, 0.0)).unwrap(), 3);
        assert_eq!(root_count(0.1, cx(1.5, 0.0)).unwrap(), 3);
        assert_eq!(root_count(1.0, cx(1.5, 0.0)).unwrap(), 1);
        let (x1, _) = support_thresholds(cx(0.5, 0.0));
        assert!(matches!(root_count(x1 + 1e-7, cx(0.5, 0.0)), Err(Error::BoundaryIndeterminate { .. })));
    }

    #[test]
    fn root_count_transitions_sit_at_thresholds() {
        for zm in [0.3, 0.8, 1.2, 1.7] {
            let z = cx(zm, 0.0f64);
            let (x1, x2) = support_thresholds(z);
            let h = 1e-3;
            let mut prev: Option<(f64, usize)> = None;
            let mut x = 0.0005;
            while x < x1 + 1.0 {
                if let Ok(c) = root_count(x, z) {
                    if let Some((px, pc)) = prev {
                        if pc != c {
                            let near = (x - x1).abs() <= 2.0 * h || (zm > 1.0 && (x - x2).abs() <= 2.0 * h);
                            assert!(near, "z={zm}: transition {pc}->{c} between {px} and {x}");
                        }
                    }
                    prev = Some((x, c));
                }
                x += h;
            }
        }
    }

    #[test]
    fn density_matches_semicircle_at_zero() {
        let sol = density_default(cx(0.0f64, 0.0)).unwrap();
        for (x, d) in sol.x_grid.iter().zip(&sol.density) {
            assert!((d - semicircle(*x)).abs() <= 1e-4, "x={x}");
        }
        let mid = density_at(1.0, cx(0.0, 0.0));
        assert!((mid - 3f64.sqrt() / (2.0 * std::f64::consts::PI)).abs() < 1e-10);
        assert_eq!(density_at(2.001, cx(0.0, 0.0)), 0.0);
        assert!((sol.mass - 1.0).abs() < 1e-3);
        assert!((limit_cdf(&sol, 0.0) - 0.5).abs() < 1e-12);
        assert!((limit_cdf(&sol, 2.0) - 1.0).abs() < 1e-3);
        assert!((limit_cdf(&sol, 1.0) - semicircle_cdf(1.0)).abs() < 1e-3);
        assert!((semicircle_cdf(1.0) - 0.8045).abs() < 1e-4);
    }

    #[test]
    fn density_gap_outside_unit_disc() {
        let z = cx(2.0f64, 0.0);
        let sol = density_default(z).unwrap();
        for (x, d) in sol.x_grid.iter().zip(&sol.density) {
            if x.abs() < 0.73 || x.abs() >= sol.x1 {
                assert_eq!(*d, 0.0, "x={x}");
            }
            assert!(*d >= 0.0);
        }
        assert!((sol.mass - 1.0).abs() < 1e-3);
        assert!(sol.cdf.windows(2).all(|w| w[1] >= w[0]));
        assert!((sol.cdf_at(0.0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn density_normalization_across_shifts() {
        for zm in [0.0, 0.3, 0.7, 0.99, 1.0, 1.01, 1.5, 2.5] {
            let sol = density_default(cx(zm, 0.0f64)).unwrap();
            assert!((sol.mass - 1.0).abs() < 1e-3, "z={zm} mass={}", sol.mass);
            assert!((sol.cdf_at(sol.x1) - 1.0).abs() < 1e-3);
            assert!(sol.cdf_at(-sol.x1) < 1e-3);
        }
    }

    #[test]
    fn density_agrees_with_herglotz_evaluation_inside_support() {
        for zm in [0.4, 1.6] {
            let z = cx(zm, 0.0);
            let (x1, x2) = support_thresholds(z);
            for k in 1..10 {
                let x = x2 + (x1 - x2) * k as f64 / 10.0;
                let off = stieltjes_limit(cx(x, DEFAULT_V0), z).unwrap().im / std::f64::consts::PI;
                assert!((off - density_at(x, z)).abs() < 1e-5, "z={zm} x={x}");
            }
        }
    }

    #[test]
    fn grid_validation() {
        let z = cx(0.0, 0.0);
        assert!(density(z, &symmetric_grid(2.5, 101)).is_err()); // spacing 0.05 > 2/200
        assert!(density(z, &symmetric_grid(1.5, 2001)).is_err()); // misses the support
        let mut g = symmetric_grid(2.5, 2001);
        g[3] += 1e-4;
        assert!(density(z, &g).is_err());
    }

    #[test]
    fn pushforward_reproduces_marchenko_pastur() {
        // p(x, 0) = p~(sqrt x, 0) / sqrt x
        let mut x = 0.05f64;
        while x < 4.0 {
            let p = density_at(x.sqrt(), cx(0.0, 0.0)) / x.sqrt();
            assert!((p - mp_density(x)).abs() < 1e-4, "x={x}");
            x += 0.01;
        }
    }

    #[test]
    fn marchenko_pastur_examples() {
        assert!((mp_density(1.0) - 3f64.sqrt() / (2.0 * std::f64::consts::PI)).abs() < 1e-12);
        assert_eq!(mp_density(4.0), 0.0);
        assert_eq!(mp_density(5.0), 0.0);
        assert_eq!(mp_cdf(4.0), 1.0);
        assert!((mp_cdf(2.0) - (0.5 + 1.0 / std::f64::consts::PI)).abs() < 1e-12);
    }

    /// Adaptive Simpson quadrature.
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                return left + right + (left + right - whole) / 15.0;
            }
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
        let m = 0.5 * (a + b);
        let (fa, fm, fb) = (f(a), f(m), f(b));
        rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50)
    }

    #[test]
    fn marchenko_pastur_integrates_to_one() {
        // x = y^2 removes the 1/sqrt(x) endpoint singularity
        let f = |y: f64| 2.0 * y * mp_density(y * y);
        let total = simpson(&f, 0.0, 2.0, 1e-10);
        assert!((total - 1.0).abs() < 1e-6, "{total}");
    }

    #[test]
    fn exact_solution_lower_bound() {
        for i in 0..20 {
            for j in 0..20 {
                for k in 0..5 {
                    let u = -4.0 + 8.0 * i as f64 / 19.0;
                    let v = 0.05 + (5.0 - 0.05) * j as f64 / 19.0;
                    let zm = 2.0 * k as f64 / 4.0;
                    let (a, z) = (cx(u, v), cx(zm, 0.0));
                    let s = stieltjes_limit(a, z).unwrap();
                    let lhs = 1.0 - s.norm_sqr() - zm * zm * s.norm_sqr() / (a + s).norm_sqr();
                    assert!(lhs >= v / (v + 1.0) - 1e-9, "u={u} v={v} |z|={zm}: {lhs}");
                }
            }
        }
    }

    /// Root of `S = -(alpha+S)/((alpha+S)^2 - |z|^2) + delta` nearest `s0`.
    fn perturbed_root(alpha: Cx<f64>, z: Cx<f64>, delta: Cx<f64>, s0: Cx<f64>) -> Cx<f64> {
        let t = z.norm_sqr();
        let r = cubic_roots(
            alpha * 2.0 - delta,
            alpha * alpha - t + 1.0 - alpha * delta * 2.0,
            alpha - delta * (alpha * alpha - t),
        );
        *r.iter()
            .filter(|y| (alpha + **y).im > 0.0)
            .min_by(|a, b| (*a - s0).norm().partial_cmp(&(*b - s0).norm()).unwrap())
            .unwrap()
    }

    #[test]
    fn stability_under_fixed_point_perturbation() {
        for &(u, v) in &[(0.0, 0.1), (1.0, 0.5), (-2.5, 0.2), (3.0, 1.0), (0.3, 2.0)] {
            for zm in [0.0, 0.6, 1.0, 1.8] {
                let (a, z) = (cx(u, v), cx(zm, 0.0));
                let s = stieltjes_limit(a, z).unwrap();
                for k in 0..8 {
                    let ang = k as f64 * std::f64::consts::PI / 4.0;
                    for scale in [0.01, 0.5, 1.0] {
                        let delta = Cx::from_polar(scale * v / 8.0, ang);
                        let sd = perturbed_root(a, z, delta, s);
                        assert!(
                            (sd - s).norm() <= 4.0 * delta.norm() / v + 1e-9,
                            "alpha={a} z={zm} delta={delta}: moved {}",
                            (sd - s).norm()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn herglotz_decay_outside_support() {
        for zm in [0.0, 0.8, 1.5] {
            let z = cx(zm, 0.0);
            let (x1, x2) = support_thresholds(z);
            let mut xs = vec![x1 + 0.2, x1 + 1.0, -(x1 + 0.5)];
            if zm > 1.0 && x2 > 0.2 {
                xs.push(x2 / 2.0);
            }
            for x in xs {
                let ims: Vec<f64> = [1e-2, 1e-4, 1e-6]
                    .iter()
                    .map(|&v| stieltjes_limit(cx(x, v), z).unwrap().im)
                    .collect();
                assert!(ims[0] > ims[1] && ims[1] > ims[2] && ims[2] > 0.0, "z={zm} x={x}: {ims:?}");
                assert!(ims[2] < 1e-5);
            }
            // strictly positive inside the support
            let inside = 0.5 * (x1 + x2);
            assert!(stieltjes_limit(cx(inside, 1e-6), z).unwrap().im > 1e-3);
        }
    }

    #[test]
    fn generic_over_f32() {
        let (a, _) = support_thresholds(cx(1.0f32, 0.0));
        assert!((a - 2.598_076).abs() < 1e-5);
        assert!((density_at(1.0f32, cx(0.0, 0.0)) - 0.275_664_4).abs() < 1e-5);
    }
}
