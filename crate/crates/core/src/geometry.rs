//! Planar lp geometry: distances, the area of the lp unit disk, and the
//! farthest-pair distance between two axis-aligned rectangles.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Above this exponent the direct `(dx^p + dy^p)^(1/p)` form loses the
/// smaller coordinate to underflow, so the distance is rescaled by the max.
const DIRECT_POW_LIMIT: f64 = 64.0;

/// Exponent of an lp norm, `1 <= p <= inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LpExponent {
    Finite(f64),
    Infinity,
}

impl LpExponent {
    pub const ONE: LpExponent = LpExponent::Finite(1.0);
    pub const TWO: LpExponent = LpExponent::Finite(2.0);
    pub const INF: LpExponent = LpExponent::Infinity;

    /// Validates `p`. `f64::INFINITY` maps to [`LpExponent::Infinity`].
    pub fn new(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            Ok(LpExponent::Infinity)
        } else if p.is_finite() && p >= 1.0 {
            Ok(LpExponent::Finite(p))
        } else {
            Err(Error::InvalidExponent(p.to_string()))
        }
    }

    /// `p` as a float, with `f64::INFINITY` for the max-norm.
    pub fn value(self) -> f64 {
        match self {
            LpExponent::Finite(p) => p,
            LpExponent::Infinity => f64::INFINITY,
        }
    }

    /// Norm of the vector `(dx, dy)`; both components must be non-negative.
    #[inline]
    pub fn norm(self, dx: f64, dy: f64) -> f64 {
        match self {
            LpExponent::Infinity => dx.max(dy),
            LpExponent::Finite(1.0) => dx + dy,
            LpExponent::Finite(2.0) => (dx * dx + dy * dy).sqrt(),
            LpExponent::Finite(p) if p <= DIRECT_POW_LIMIT => (dx.powf(p) + dy.powf(p)).powf(1.0 / p),
            LpExponent::Finite(p) => {
                let hi = dx.max(dy);
                if hi == 0.0 {
                    return 0.0;
                }
                let lo = dx.min(dy);
                hi * (1.0 + (lo / hi).powf(p)).powf(1.0 / p)
            }
        }
    }

    /// `2^(1/p)`: the lp diameter of the unit square.
    pub fn unit_square_diameter(self) -> f64 {
        self.norm(1.0, 1.0)
    }
}

impl fmt::Display for LpExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LpExponent::Finite(p) => write!(f, "{p}"),
            LpExponent::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for LpExponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(LpExponent::Infinity),
            _ => {
                let p: f64 = t.parse().map_err(|_| Error::InvalidExponent(t.to_string()))?;
                LpExponent::new(p)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2D { x, y }
    }

    pub fn in_unit_square(&self) -> bool {
        (0.0..=1.0).contains(&self.x) && (0.0..=1.0).contains(&self.y)
    }
}

/// Closed axis-aligned rectangle `[x_lo, x_hi] x [y_lo, y_hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
}

impl Rect {
    pub fn new(x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> Self {
        debug_assert!(x_lo <= x_hi && y_lo <= y_hi, "inverted rectangle");
        Rect { x_lo, x_hi, y_lo, y_hi }
    }

    pub fn width(&self) -> f64 {
        self.x_hi - self.x_lo
    }

    pub fn height(&self) -> f64 {
        self.y_hi - self.y_lo
    }

    pub fn corners(&self) -> [Point2D; 4] {
        [
            Point2D::new(self.x_lo, self.y_lo),
            Point2D::new(self.x_hi, self.y_lo),
            Point2D::new(self.x_lo, self.y_hi),
            Point2D::new(self.x_hi, self.y_hi),
        ]
    }

    pub fn contains(&self, pt: Point2D) -> bool {
        (self.x_lo..=self.x_hi).contains(&pt.x) && (self.y_lo..=self.y_hi).contains(&pt.y)
    }
}

#[inline]
pub fn lp_distance(p: LpExponent, a: Point2D, b: Point2D) -> f64 {
    p.norm((a.x - b.x).abs(), (a.y - b.y).abs())
}

/// Area of the lp unit disk `{v : |v|_p <= 1}`.
///
/// Closed form `4 Γ(1 + 1/p)^2 / Γ(1 + 2/p)` for finite p, exactly 4 for the max-norm.
pub fn alpha_p(p: LpExponent) -> f64 {
    match p {
        LpExponent::Infinity => 4.0,
        LpExponent::Finite(p) => {
            let g1 = libm::tgamma(1.0 + 1.0 / p);
            4.0 * g1 * g1 / libm::tgamma(1.0 + 2.0 / p)
        }
    }
}

/// Supremum of the lp distance between a point of `a` and a point of `b`.
///
/// The lp norm is monotone in each coordinate magnitude, so the supremum is the
/// norm of the per-axis maximal separations.
#[inline]
pub fn max_box_distance(p: LpExponent, a: &Rect, b: &Rect) -> f64 {
    let sx = (a.x_lo - b.x_hi).abs().max((a.x_hi - b.x_lo).abs());
    let sy = (a.y_lo - b.y_hi).abs().max((a.y_hi - b.y_lo).abs());
    p.norm(sx, sy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Adaptive Simpson on `[a, b]`; independent of the Gamma-function path.
    fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
            let m = 0.5 * (a + b);
            let fm = f(m);
            (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
        }
        #[allow(clippy::too_many_arguments)]
        fn recurse(
            f: &dyn Fn(f64) -> f64,
            a: f64,
            fa: f64,
            b: f64,
            fb: f64,
            m: f64,
            fm: f64,
            whole: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let (lm, flm, left) = simpson(f, a, fa, m, fm);
            let (rm, frm, right) = simpson(f, m, fm, b, fb);
            let delta = left + right - whole;
            if depth == 0 || delta.abs() <= 15.0 * tol {
                return left + right + delta / 15.0;
            }
            recurse(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
                + recurse(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
        }
        let (fa, fb) = (f(a), f(b));
        let (m, fm, whole) = simpson(f, a, fa, b, fb);
        recurse(f, a, fa, b, fb, m, fm, whole, tol, 60)
    }

    fn alpha_by_quadrature(p: f64) -> f64 {
        let quarter = |x: f64| (1.0 - x.powf(p)).max(0.0).powf(1.0 / p);
        4.0 * adaptive_simpson(&quarter, 0.0, 1.0, 1e-13)
    }

    fn corner_brute_force(p: LpExponent, a: &Rect, b: &Rect) -> f64 {
        let mut best = 0.0f64;
        for u in a.corners() {
            for v in b.corners() {
                best = best.max(lp_distance(p, u, v));
            }
        }
        best
    }

    #[test]
    fn distance_examples() {
        let o = Point2D::new(0.0, 0.0);
        let q = Point2D::new(0.3, 0.4);
        assert!((lp_distance(LpExponent::TWO, o, q) - 0.5).abs() < 1e-15);
        assert!((lp_distance(LpExponent::ONE, o, q) - 0.7).abs() < 1e-15);
        assert_eq!(lp_distance(LpExponent::INF, o, q), 0.4);
        assert!((lp_distance(LpExponent::Finite(3.0), o, q) - (0.027f64 + 0.064).cbrt()).abs() < 1e-15);
    }

    #[test]
    fn large_finite_p_does_not_underflow() {
        let p = LpExponent::Finite(1e6);
        let d = lp_distance(p, Point2D::new(0.0, 0.0), Point2D::new(0.2, 0.1));
        assert!((d - 0.2).abs() < 1e-9);
        assert!(d > 0.0);
    }

    #[test]
    fn alpha_special_values() {
        assert!((alpha_p(LpExponent::TWO) - std::f64::consts::PI).abs() < 1e-12);
        assert_eq!(alpha_p(LpExponent::INF), 4.0);
        assert!((alpha_p(LpExponent::ONE) - 2.0).abs() < 1e-12);
        // closed form away from the special cases
        assert!((alpha_p(LpExponent::Finite(2.0 + 1e-12)) - std::f64::consts::PI).abs() < 1e-9);
    }

    #[test]
    fn alpha_agrees_with_quadrature() {
        for p in [1.0, 1.5, 2.0, 3.0, 10.0] {
            let closed = alpha_p(LpExponent::Finite(p));
            let numeric = alpha_by_quadrature(p);
            assert!((closed - numeric).abs() < 1e-6, "p={p}: {closed} vs {numeric}");
        }
    }

    #[test]
    fn alpha_is_monotone_and_bounded() {
        let grid = [1.0, 1.5, 2.0, 3.0, 10.0].map(LpExponent::Finite);
        let mut prev = 0.0;
        for p in grid.into_iter().chain([LpExponent::INF]) {
            let a = alpha_p(p);
            assert!((2.0 - 1e-12..=4.0).contains(&a), "{a}");
            assert!(a >= prev);
            prev = a;
        }
    }

    #[test]
    fn box_distance_examples() {
        let unit = Rect::new(0.0, 1.0, 0.0, 1.0);
        let right = Rect::new(2.0, 3.0, 0.0, 1.0);
        assert_eq!(max_box_distance(LpExponent::INF, &unit, &right), 3.0);
        assert_eq!(corner_brute_force(LpExponent::INF, &unit, &right), 3.0);
        assert_eq!(max_box_distance(LpExponent::ONE, &unit, &unit), 2.0);

        let a = Rect::new(0.0, 0.1, 0.0, 0.1);
        let b = Rect::new(0.2, 0.3, 0.0, 0.1);
        let d = max_box_distance(LpExponent::TWO, &a, &b);
        assert_eq!(d, corner_brute_force(LpExponent::TWO, &a, &b));
        assert!((d - 0.10f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn exponent_parsing() {
        assert_eq!("inf".parse::<LpExponent>().unwrap(), LpExponent::INF);
        assert_eq!("2".parse::<LpExponent>().unwrap(), LpExponent::TWO);
        assert!("0.5".parse::<LpExponent>().is_err());
        assert!("nan".parse::<LpExponent>().is_err());
        assert!(LpExponent::new(f64::NEG_INFINITY).is_err());
    }

    fn exponent() -> impl Strategy<Value = LpExponent> {
        prop_oneof![
            Just(LpExponent::ONE),
            Just(LpExponent::TWO),
            Just(LpExponent::INF),
            (1.0f64..12.0).prop_map(LpExponent::Finite),
            (64.0f64..1e4).prop_map(LpExponent::Finite),
        ]
    }

    fn point() -> impl Strategy<Value = Point2D> {
        (0.0f64..=1.0, 0.0f64..=1.0).prop_map(|(x, y)| Point2D::new(x, y))
    }

    fn rect() -> impl Strategy<Value = Rect> {
        (0.0f64..1.0, 0.0f64..0.5, 0.0f64..1.0, 0.0f64..0.5).prop_map(|(x, w, y, h)| Rect::new(x, x + w, y, y + h))
    }

    proptest! {
        #[test]
        fn lp_distance_is_a_metric(p in exponent(), a in point(), b in point(), c in point()) {
            let ab = lp_distance(p, a, b);
            prop_assert_eq!(ab, lp_distance(p, b, a));
            prop_assert_eq!(lp_distance(p, a, a), 0.0);
            if a != b {
                prop_assert!(ab > 0.0);
            }
            prop_assert!(ab <= lp_distance(p, a, c) + lp_distance(p, c, b) + 1e-12);
        }

        #[test]
        fn box_distance_equals_corner_brute_force(p in exponent(), a in rect(), b in rect()) {
            prop_assert_eq!(max_box_distance(p, &a, &b), corner_brute_force(p, &a, &b));
        }

        #[test]
        fn self_box_distance_is_diameter(p in exponent(), a in rect()) {
            prop_assert_eq!(max_box_distance(p, &a, &a), p.norm(a.width(), a.height()));
        }
    }
}
