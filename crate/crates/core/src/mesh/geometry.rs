//! Planar and spherical measure primitives.
//!
//! Spherical routines take unit vectors and return values on the unit
//! sphere; callers scale by the radius.

use nalgebra::Vector3;

pub type V3 = Vector3<f64>;

pub fn planar_triangle_area(a: &V3, b: &V3, c: &V3) -> f64 {
    let u = b - a;
    let v = c - a;
    0.5 * (u.x * v.y - u.y * v.x)
}

/// Signed area of the spherical triangle `abc` (positive when
/// counterclockwise seen from outside).
pub fn spherical_triangle_area(a: &V3, b: &V3, c: &V3) -> f64 {
    let triple = a.dot(&b.cross(c));
    let denom = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    2.0 * triple.atan2(denom)
}

pub fn great_circle_distance(a: &V3, b: &V3) -> f64 {
    a.cross(b).norm().atan2(a.dot(b))
}

/// Intersection of the infinite lines `p0p1` and `q0q1` in the plane.
/// Falls back to the midpoint of `p0p1` for parallel lines.
pub fn planar_line_intersection(p0: &V3, p1: &V3, q0: &V3, q1: &V3) -> V3 {
    let r = p1 - p0;
    let s = q1 - q0;
    let denom = r.x * s.y - r.y * s.x;
    if denom.abs() <= 1e-300 {
        return 0.5 * (p0 + p1);
    }
    let w = q0 - p0;
    let t = (w.x * s.y - w.y * s.x) / denom;
    p0 + r * t
}

/// Intersection of the great circles through `p0p1` and `q0q1`, taking the
/// antipode nearest to the `p0p1` arc.
pub fn great_circle_intersection(p0: &V3, p1: &V3, q0: &V3, q1: &V3) -> V3 {
    let n1 = p0.cross(p1);
    let n2 = q0.cross(q1);
    let d = n1.cross(&n2);
    let norm = d.norm();
    if norm <= 1e-300 {
        return (p0 + p1).normalize();
    }
    let d = d / norm;
    if d.dot(&(p0 + p1)) < 0.0 {
        -d
    } else {
        d
    }
}

pub fn planar_circumcenter(a: &V3, b: &V3, c: &V3) -> V3 {
    let bx = b.x - a.x;
    let by = b.y - a.y;
    let cx = c.x - a.x;
    let cy = c.y - a.y;
    let d = 2.0 * (bx * cy - by * cx);
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    let ux = (cy * b2 - by * c2) / d;
    let uy = (bx * c2 - cx * b2) / d;
    V3::new(a.x + ux, a.y + uy, 0.0)
}

pub fn spherical_circumcenter(a: &V3, b: &V3, c: &V3) -> V3 {
    let n = (b - a).cross(&(c - a)).normalize();
    if n.dot(&(a + b + c)) < 0.0 {
        -n
    } else {
        n
    }
}

/// Orthonormal basis of the tangent plane at unit vector `p`, ordered so
/// that `(e1, e2, p)` is right-handed.
pub fn tangent_basis(p: &V3) -> (V3, V3) {
    let helper = if p.z.abs() < 0.9 {
        V3::new(0.0, 0.0, 1.0)
    } else {
        V3::new(1.0, 0.0, 0.0)
    };
    let e1 = helper.cross(p).normalize();
    let e2 = p.cross(&e1);
    (e1, e2)
}

/// Angle between a segment direction `a` and `b`, measured as the
/// departure from a right angle.
pub fn right_angle_defect(a: &V3, b: &V3) -> f64 {
    let c = a.dot(b) / (a.norm() * b.norm());
    c.abs().min(1.0).asin()
}
