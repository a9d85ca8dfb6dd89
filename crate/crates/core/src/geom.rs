//! Small fixed-size vector helpers. Points and normals are plain `[f64; 3]`.

pub type Vec3 = [f64; 3];
pub type Vec2 = [f64; 2];

#[inline]
pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn dist2(a: Vec3, b: Vec3) -> f64 {
    let d = sub(a, b);
    dot(d, d)
}

/// Returns `a / |a|`. A zero vector is returned unchanged.
#[inline]
pub fn normalize(a: Vec3) -> Vec3 {
    let n = norm(a);
    if n > 0.0 {
        scale(a, 1.0 / n)
    } else {
        a
    }
}

/// Angle between two unit vectors, robust near 0 and pi.
pub fn angle_between(a: Vec3, b: Vec3) -> f64 {
    norm(cross(a, b)).atan2(dot(a, b))
}

/// Unit direction for polar angle `phi` (from +y) and azimuth `theta`.
///
/// The y axis is the polar axis. Azimuth increases towards the local
/// `y_up x normal` direction, so increasing `theta` is "east" in the
/// tangent frames built by [`crate::sphere::local_frame`] and matches
/// increasing column index in an equirectangular image.
#[inline]
pub fn spherical_to_cartesian(theta: f64, phi: f64) -> Vec3 {
    let (sp, cp) = phi.sin_cos();
    let (st, ct) = theta.sin_cos();
    [sp * ct, cp, -sp * st]
}

/// Inverse of [`spherical_to_cartesian`]: returns `(theta, phi)` with
/// `theta` in `[0, 2pi)` and `phi` in `[0, pi]`.
#[inline]
pub fn cartesian_to_spherical(p: Vec3) -> (f64, f64) {
    let phi = p[1].clamp(-1.0, 1.0).acos();
    let mut theta = (-p[2]).atan2(p[0]);
    if theta < 0.0 {
        theta += std::f64::consts::TAU;
    }
    if theta >= std::f64::consts::TAU {
        theta -= std::f64::consts::TAU;
    }
    (theta, phi)
}
