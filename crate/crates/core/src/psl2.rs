//! Arithmetic on PSL(2,R), the Mobius action on the upper half-plane, and a
//! certified two-sided bracket for the left-invariant metric `d_G`.
//!
//! Elements are stored as the canonical SL(2,R) representative: determinant
//! renormalized to 1 after every composition, sign fixed so that `a + d > 0`
//! (or `a + d = 0` and `b > 0`). The metric is the left-invariant extension of
//! the Frobenius pairing on the Lie algebra at the identity; with that choice
//! the unipotent one-parameter subgroup has unit speed, so
//! `dist_upper(e, b_t) = |t|` exactly.
//!
//! `d_G` has no closed form, so it is never computed directly. Every contract
//! is stated against the bracket `[dist_lower, dist_upper]`:
//!
//! * `dist_upper(g, h)` is the length of the one-parameter curve
//!   `exp(s log(g^-1 h))`, which is `|log(g^-1 h)|` in the Frobenius norm;
//! * `dist_lower(g, h)` is `dist_h2(g i, h i) / sqrt(2)`, valid because the
//!   orbit map `g -> g i` has differential norm at most `sqrt(2)` for this
//!   pairing (for traceless `X = (a b; c -a)` the image velocity has
//!   hyperbolic norm `sqrt((b+c)^2 + 4a^2) <= sqrt(2) |X|`).

use serde::Serialize;

/// Treat `a + d` as zero below this when fixing the representative sign.
pub const SIGN_TOL: f64 = 1e-12;
/// Classify an element as parabolic when `|trace - 2|` is below this.
pub const PARABOLIC_TOL: f64 = 1e-9;

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Canonical representative of a PSL(2,R) class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroupElement {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

/// Traceless 2x2 matrix `(x11 x12; x21 -x11)`: tangent data at the identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LieVector {
    pub x11: f64,
    pub x12: f64,
    pub x21: f64,
}

/// Certified interval containing a left-invariant distance value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistanceBracket {
    pub lo: f64,
    pub hi: f64,
}

/// Point of the upper half-plane (`y > 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointH2 {
    pub x: f64,
    pub y: f64,
}

/// 2x2 determinant with one fused multiply-add per product (Kahan). Accurate
/// to a couple of ulps of the result even when `ad` and `bc` nearly cancel.
fn det2(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let w = b * c;
    let e = (-b).mul_add(c, w);
    let f = a.mul_add(d, -w);
    f + e
}

impl GroupElement {
    pub const IDENTITY: GroupElement = GroupElement {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    /// Canonicalize raw entries: renormalize the determinant to 1 when it is
    /// positive and finite, then fix the representative sign. Total; entries
    /// whose determinant cannot be trusted (overflow-scale cancellation) are
    /// passed through so that downstream norms stay large instead of NaN.
    /// Determinants already within 1e-14 of 1 are left alone, which makes
    /// canonicalization exactly idempotent (a renormalized determinant lands
    /// within a few ulps of 1, below that threshold).
    pub fn canonicalize(a: f64, b: f64, c: f64, d: f64) -> GroupElement {
        let det = det2(a, b, c, d);
        let renorm = det.is_finite() && det > 0.0 && (det - 1.0).abs() > 1e-14;
        let (mut a, mut b, mut c, mut d) = if renorm {
            let inv = 1.0 / det.sqrt();
            (a * inv, b * inv, c * inv, d * inv)
        } else {
            (a, b, c, d)
        };
        let tr = a + d;
        if tr < -SIGN_TOL || (tr.abs() <= SIGN_TOL && b < 0.0) {
            a = -a;
            b = -b;
            c = -c;
            d = -d;
        }
        GroupElement { a, b, c, d }
    }

    /// Build an element from entries, requiring a positive determinant.
    pub fn from_entries(a: f64, b: f64, c: f64, d: f64) -> crate::Result<GroupElement> {
        let det = det2(a, b, c, d);
        if !det.is_finite() || det <= 0.0 {
            return Err(crate::Error::Domain(format!(
                "matrix determinant must be positive and finite, got {det}"
            )));
        }
        Ok(GroupElement::canonicalize(a, b, c, d))
    }

    /// The horocycle subgroup element `b_t = (1 t; 0 1)`.
    pub fn horocycle(t: f64) -> GroupElement {
        GroupElement {
            a: 1.0,
            b: t,
            c: 0.0,
            d: 1.0,
        }
    }

    /// The diagonal element `(a 0; 0 1/a)` for `a > 0`.
    pub fn diagonal(a: f64) -> crate::Result<GroupElement> {
        if !a.is_finite() || a <= 0.0 {
            return Err(crate::Error::Domain(format!(
                "diagonal element needs a > 0, got {a}"
            )));
        }
        Ok(GroupElement::canonicalize(a, 0.0, 0.0, 1.0 / a))
    }

    /// PSL(2,R) element whose Mobius action rotates the tangent space at `i`
    /// by `angle` (half-angle rotation matrix).
    pub fn rotation(angle: f64) -> GroupElement {
        let t = 0.5 * angle;
        GroupElement::canonicalize(t.cos(), t.sin(), -t.sin(), t.cos())
    }

    /// Group product, canonicalized.
    pub fn compose(&self, rhs: &GroupElement) -> GroupElement {
        GroupElement::canonicalize(
            self.a * rhs.a + self.b * rhs.c,
            self.a * rhs.b + self.b * rhs.d,
            self.c * rhs.a + self.d * rhs.c,
            self.c * rhs.b + self.d * rhs.d,
        )
    }

    /// Inverse via the adjugate (exact for a det-1 representative).
    pub fn inverse(&self) -> GroupElement {
        GroupElement::canonicalize(self.d, -self.b, -self.c, self.a)
    }

    /// `tr(g) = |a + d|`, independent of the representative sign.
    pub fn trace(&self) -> f64 {
        (self.a + self.d).abs()
    }

    /// Mobius action `z -> (az + b)/(cz + d)` on the upper half-plane.
    pub fn mobius(&self, z: &PointH2) -> PointH2 {
        let cx_d = self.c * z.x + self.d;
        let cy = self.c * z.y;
        let den = cx_d * cx_d + cy * cy;
        PointH2 {
            x: ((self.a * z.x + self.b) * cx_d + self.a * z.y * cy) / den,
            y: z.y / den,
        }
    }

    /// Principal matrix logarithm of the canonical representative.
    ///
    /// Branches by class: hyperbolic (`trace > 2`) through the positive
    /// eigenvalue, parabolic (`|trace - 2| <= 1e-9`) through the nilpotent
    /// part with a first-order scale correction, elliptic (`trace < 2`)
    /// through the rotation angle in `(-pi/2, pi/2]` once the sign is
    /// canonical. Exactly inverse to `LieVector::exp` away from the elliptic
    /// cut locus (rotation angle `pi/2`).
    pub fn log(&self) -> LieVector {
        let half = 0.5 * (self.a + self.d);
        let delta = (self.a + self.d) - 2.0;
        let factor = if delta.abs() <= PARABOLIC_TOL {
            // theta/sinh(theta) and phi/sin(phi) share the expansion
            // 1 - delta/6 + O(delta^2) in delta = trace - 2.
            1.0 - delta / 6.0
        } else if delta > 0.0 {
            let sh = ((half - 1.0) * (half + 1.0)).sqrt();
            sh.asinh() / sh
        } else {
            let s = ((1.0 - half) * (1.0 + half)).sqrt();
            s.atan2(half) / s
        };
        LieVector {
            x11: 0.5 * (self.a - self.d) * factor,
            x12: self.b * factor,
            x21: self.c * factor,
        }
    }

    /// Largest entrywise deviation from another element.
    pub fn entry_dist(&self, rhs: &GroupElement) -> f64 {
        (self.a - rhs.a)
            .abs()
            .max((self.b - rhs.b).abs())
            .max((self.c - rhs.c).abs())
            .max((self.d - rhs.d).abs())
    }

    /// `|g11 - 1| + |g12| + |g21| + |g22 - 1|`: entry deviation from the
    /// identity used by the near-identity closeness contracts.
    pub fn entry_deviation(&self) -> f64 {
        (self.a - 1.0).abs() + self.b.abs() + self.c.abs() + (self.d - 1.0).abs()
    }

    pub fn det(&self) -> f64 {
        det2(self.a, self.b, self.c, self.d)
    }
}

impl std::ops::Mul for GroupElement {
    type Output = GroupElement;
    fn mul(self, rhs: GroupElement) -> GroupElement {
        self.compose(&rhs)
    }
}

impl LieVector {
    pub const ZERO: LieVector = LieVector {
        x11: 0.0,
        x12: 0.0,
        x21: 0.0,
    };

    /// Frobenius norm `sqrt(2 x11^2 + x12^2 + x21^2)`.
    pub fn norm(&self) -> f64 {
        (2.0 * self.x11 * self.x11 + self.x12 * self.x12 + self.x21 * self.x21).sqrt()
    }

    /// Matrix exponential. `delta = x11^2 + x12 x21` is minus the
    /// determinant: positive gives a hyperbolic element, negative elliptic,
    /// near zero the shared power series in `delta`.
    pub fn exp(&self) -> GroupElement {
        let delta = self.x11 * self.x11 + self.x12 * self.x21;
        let (c0, c1) = if delta.abs() <= 1e-8 {
            (
                1.0 + delta / 2.0 + delta * delta / 24.0,
                1.0 + delta / 6.0 + delta * delta / 120.0,
            )
        } else if delta > 0.0 {
            let r = delta.sqrt();
            (r.cosh(), r.sinh() / r)
        } else {
            let r = (-delta).sqrt();
            (r.cos(), r.sin() / r)
        };
        GroupElement::canonicalize(
            c0 + c1 * self.x11,
            c1 * self.x12,
            c1 * self.x21,
            c0 - c1 * self.x11,
        )
    }

    pub fn scale(&self, s: f64) -> LieVector {
        LieVector {
            x11: s * self.x11,
            x12: s * self.x12,
            x21: s * self.x21,
        }
    }
}

impl PointH2 {
    pub const I: PointH2 = PointH2 { x: 0.0, y: 1.0 };

    pub fn new(x: f64, y: f64) -> crate::Result<PointH2> {
        if !y.is_finite() || y <= 0.0 || !x.is_finite() {
            return Err(crate::Error::Domain(format!(
                "upper half-plane point needs finite x and y > 0, got ({x}, {y})"
            )));
        }
        Ok(PointH2 { x, y })
    }
}

/// Hyperbolic distance on the upper half-plane,
/// `arccosh(1 + |z - w|^2 / (2 y_z y_w))`, evaluated in the `ln(1+u)` form
/// that stays accurate for nearby points.
pub fn dist_h2(z: &PointH2, w: &PointH2) -> f64 {
    let dx = z.x - w.x;
    let dy = z.y - w.y;
    let u = (dx * dx + dy * dy) / (2.0 * z.y * w.y);
    (u + (u * (u + 2.0)).sqrt()).ln_1p()
}

/// `d_H(i, g i)`: hyperbolic displacement of the basepoint.
pub fn displacement(g: &GroupElement) -> f64 {
    dist_h2(&PointH2::I, &g.mobius(&PointH2::I))
}

/// Certified upper bound for `d_G(g, h)`: Frobenius norm of `log(g^-1 h)`.
/// Depends on the pair only through `g^-1 h`, hence exactly left-invariant.
/// Identical representatives short-circuit to 0 so the bracket vanishes
/// exactly at equality.
pub fn dist_upper(g: &GroupElement, h: &GroupElement) -> f64 {
    if g == h {
        return 0.0;
    }
    g.inverse().compose(h).log().norm()
}

/// Certified lower bound for `d_G(g, h)`: `dist_h2(g i, h i) / sqrt(2)`,
/// computed through `g^-1 h` so it is exactly left-invariant. The `sqrt(2)`
/// is the sup of the orbit-map differential norm for the Frobenius pairing.
pub fn dist_lower(g: &GroupElement, h: &GroupElement) -> f64 {
    if g == h {
        return 0.0;
    }
    let w = g.inverse().compose(h);
    dist_h2(&PointH2::I, &w.mobius(&PointH2::I)) / SQRT_2
}

/// Two-sided bracket `[dist_lower, dist_upper]` for `d_G(g, h)`. The lower
/// end is clamped to the upper so rounding at tight (diagonal) pairs cannot
/// invert the interval; clamping only ever shrinks a valid lower bound.
pub fn dist_bracket(g: &GroupElement, h: &GroupElement) -> DistanceBracket {
    let hi = dist_upper(g, h);
    let lo = dist_lower(g, h).min(hi);
    DistanceBracket { lo, hi }
}

impl DistanceBracket {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// Whether this bracket and `other` can describe the same value.
    pub fn overlaps(&self, other: &DistanceBracket, tol: f64) -> bool {
        self.lo <= other.hi + tol && other.lo <= self.hi + tol
    }
}
