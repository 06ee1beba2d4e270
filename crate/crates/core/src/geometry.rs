//! Pinhole cameras and the univariate polynomials of three minimal pose
//! problems.
//!
//! Camera frames follow the usual computer-vision convention: `x` right,
//! `y` down, `z` forward. A camera is *level* when its `y` axis is the world
//! `-z` axis, i.e. it can only rotate about the world vertical.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix3, Matrix4, Vector3};
use thiserror::Error;

use crate::polynomials::Polynomial;

pub type Point3 = nalgebra::Point3<f64>;
pub type Point2 = nalgebra::Point2<f64>;

/// Pairwise 3D distances below this count as coincident points.
pub const MIN_POINT_DISTANCE: f64 = 1e-9;
/// Ray pairs closer than this angle (radians) count as coincident rays.
pub const MIN_RAY_ANGLE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("point lies behind the camera")]
    BehindCamera,
    #[error("degenerate configuration: coincident points or rays")]
    DegenerateConfiguration,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intrinsics {
    pub fu: f64,
    pub fv: f64,
    pub cu: f64,
    pub cv: f64,
}

impl Intrinsics {
    pub fn new(fu: f64, fv: f64, cu: f64, cv: f64) -> Self {
        assert!(fu > 0.0 && fv > 0.0, "focal lengths must be positive");
        Self { fu, fv, cu, cv }
    }

    /// `K^-1 u` for a pixel `u`.
    pub fn unproject(&self, u: &Point2) -> Vector3<f64> {
        Vector3::new((u.x - self.cu) / self.fu, (u.y - self.cv) / self.fv, 1.0)
    }

    /// Unit-length viewing ray through `u`.
    pub fn bearing(&self, u: &Point2) -> Vector3<f64> {
        self.unproject(u).normalize()
    }
}

impl Default for Intrinsics {
    /// 640x480 image with `f_u = f_v = 1000` and a centered principal point.
    fn default() -> Self {
        Self::new(1000.0, 1000.0, 320.0, 240.0)
    }
}

/// Calibrated pinhole camera. `rotation` maps world directions into the
/// camera frame: `X_cam = rotation * (X - center)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Camera {
    pub intrinsics: Intrinsics,
    pub rotation: Matrix3<f64>,
    pub center: Vector3<f64>,
}

impl Camera {
    pub fn new(intrinsics: Intrinsics, rotation: Matrix3<f64>, center: Vector3<f64>) -> Self {
        Self {
            intrinsics,
            rotation,
            center,
        }
    }

    /// Camera at `center` whose optical axis passes through `target`, with roll
    /// chosen so the image up direction is as close as possible to world `+z`.
    pub fn looking_at(intrinsics: Intrinsics, center: Vector3<f64>, target: Vector3<f64>) -> Self {
        Self::new(intrinsics, look_at_rotation(&center, &target), center)
    }

    pub fn to_camera_frame(&self, x: &Point3) -> Vector3<f64> {
        self.rotation * (x.coords - self.center)
    }

    pub fn project(&self, x: &Point3) -> Result<Point2, GeometryError> {
        project(x, self)
    }
}

/// Pinhole projection of a world point.
pub fn project(x: &Point3, cam: &Camera) -> Result<Point2, GeometryError> {
    let pc = cam.to_camera_frame(x);
    if pc.z <= 0.0 {
        return Err(GeometryError::BehindCamera);
    }
    let k = &cam.intrinsics;
    Ok(Point2::new(
        k.fu * pc.x / pc.z + k.cu,
        k.fv * pc.y / pc.z + k.cv,
    ))
}

/// World-to-camera rotation for a camera at `center` looking at `target`.
pub fn look_at_rotation(center: &Vector3<f64>, target: &Vector3<f64>) -> Matrix3<f64> {
    let forward = (target - center).normalize();
    let mut right = forward.cross(&Vector3::z());
    if right.norm() < 1e-12 {
        right = forward.cross(&Vector3::y());
    }
    let right = right.normalize();
    let down = forward.cross(&right);
    Matrix3::from_rows(&[right.transpose(), down.transpose(), forward.transpose()])
}

/// Rotation about the world `z` axis.
pub fn rot_z(angle: f64) -> Matrix3<f64> {
    let (s, c) = angle.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Rotation about a camera `y` axis, the vertical of a level camera.
pub fn rot_y(angle: f64) -> Matrix3<f64> {
    let (s, c) = angle.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

/// Rotation of a level camera looking along world `+x`.
pub fn level_base_rotation() -> Matrix3<f64> {
    Matrix3::new(0.0, -1.0, 0.0, 0.0, 0.0, -1.0, 1.0, 0.0, 0.0)
}

/// Rotation of a level camera with the given yaw: `level_base_rotation() * rot_z(yaw)`.
pub fn level_rotation(yaw: f64) -> Matrix3<f64> {
    level_base_rotation() * rot_z(yaw)
}

/// Yaw of a level camera rotation, the inverse of [`level_rotation`].
pub fn level_yaw(rotation: &Matrix3<f64>) -> f64 {
    let rz = level_base_rotation().transpose() * rotation;
    rz[(1, 0)].atan2(rz[(0, 0)])
}

/// Angle of the relative rotation `second * first^T` between two level
/// cameras, measured about the camera `y` axis (see [`rot_y`]).
pub fn relative_vertical_angle(first: &Matrix3<f64>, second: &Matrix3<f64>) -> f64 {
    let r = second * first.transpose();
    r[(0, 2)].atan2(r[(0, 0)])
}

/// The three minimal problems handled by the matcher.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MinimalProblemKind {
    /// Absolute pose from three 2D-3D correspondences; shared variable is the
    /// depth ratio `b / a`.
    P3P,
    /// Relative pose of two level cameras from three 2D-2D correspondences;
    /// shared variable is `cos(theta)`.
    ThreePlusOne,
    /// Absolute pose of a level camera from two 2D-3D correspondences; shared
    /// variable is `tan(theta / 2)`.
    Up2p,
}

impl MinimalProblemKind {
    pub const ALL: [Self; 3] = [Self::P3P, Self::ThreePlusOne, Self::Up2p];

    pub fn minimal_set_size(self) -> usize {
        match self {
            Self::P3P | Self::ThreePlusOne => 3,
            Self::Up2p => 2,
        }
    }

    /// Number of correspondences in one hyper-edge.
    pub fn edge_order(self) -> usize {
        self.minimal_set_size() + 1
    }

    pub fn polynomial_degree(self) -> usize {
        match self {
            Self::P3P | Self::ThreePlusOne => 4,
            Self::Up2p => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::P3P => "p3p",
            Self::ThreePlusOne => "3p1",
            Self::Up2p => "up2p",
        }
    }
}

impl fmt::Display for MinimalProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MinimalProblemKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "p3p" => Ok(Self::P3P),
            "3p1" | "threeplusone" => Ok(Self::ThreePlusOne),
            "up2p" => Ok(Self::Up2p),
            other => Err(format!("unknown problem kind `{other}` (expected p3p, 3p1 or up2p)")),
        }
    }
}

fn ray_angle(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    a.cross(b).norm().atan2(a.dot(b))
}

fn check_distinct_points(points: &[Point3]) -> Result<(), GeometryError> {
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            if (a - b).norm() < MIN_POINT_DISTANCE {
                return Err(GeometryError::DegenerateConfiguration);
            }
        }
    }
    Ok(())
}

fn check_distinct_rays(rays: &[Vector3<f64>]) -> Result<(), GeometryError> {
    for (i, a) in rays.iter().enumerate() {
        for b in &rays[i + 1..] {
            if ray_angle(a, b) < MIN_RAY_ANGLE {
                return Err(GeometryError::DegenerateConfiguration);
            }
        }
    }
    Ok(())
}

fn finish(ascending: Vec<f64>) -> Result<Polynomial, GeometryError> {
    Polynomial::from_ascending(ascending)
        .and_then(|p| p.normalize())
        .map_err(|_| GeometryError::DegenerateConfiguration)
}

// Ascending-coefficient helpers for the small eliminations below.
fn pmul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn psub(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] -= y;
    }
    out
}

fn pscale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

fn resize(mut a: Vec<f64>, len: usize) -> Vec<f64> {
    a.resize(len, 0.0);
    a
}

/// Quartic in the depth ratio `x = b / a` for the correspondences
/// `(X_a, u_a), (X_b, u_b), (X_c, u_c)`.
///
/// With `y = c / a`, the three cosine-law constraints reduce (after dividing
/// out `a^2`) to two quadratics in `y` whose coefficients are polynomials in
/// `x`; their resultant in `y` is the quartic returned here, unit-normalized.
pub fn p3p_quartic(
    world: [Point3; 3],
    image: [Point2; 3],
    intrinsics: &Intrinsics,
) -> Result<Polynomial, GeometryError> {
    check_distinct_points(&world)?;
    let rays = image.map(|u| intrinsics.bearing(&u));
    check_distinct_rays(&rays)?;
    let [xa, xb, xc] = world;
    let r_ab2 = (xa - xb).norm_squared();
    let r_bc2 = (xb - xc).norm_squared();
    let r_ca2 = (xc - xa).norm_squared();
    let c_ab = rays[0].dot(&rays[1]);
    let c_bc = rays[1].dot(&rays[2]);
    let c_ca = rays[2].dot(&rays[0]);
    Ok(p3p_quartic_from_invariants(
        [r_ab2, r_bc2, r_ca2],
        [c_ab, c_bc, c_ca],
    )?)
}

/// Same quartic from squared distances `[R_ab^2, R_bc^2, R_ca^2]` and ray
/// cosines `[C_ab, C_bc, C_ca]`.
pub fn p3p_quartic_from_invariants(
    sq_dist: [f64; 3],
    cosines: [f64; 3],
) -> Result<Polynomial, GeometryError> {
    let [r_ab2, r_bc2, r_ca2] = sq_dist;
    let [c_ab, c_bc, c_ca] = cosines;
    // ab triangle: a^2 (x^2 - 2 C_ab x + 1) = R_ab^2
    let ab = [1.0, -2.0 * c_ab, 1.0];
    // R_ab^2 y^2 + b1 y + c1 = 0   (from the ca triangle)
    let b1 = [-2.0 * r_ab2 * c_ca];
    let c1 = psub(&[r_ab2], &pscale(&ab, r_ca2));
    // R_ab^2 y^2 + b2(x) y + c2(x) = 0   (from the bc triangle)
    let b2 = [0.0, -2.0 * r_ab2 * c_bc];
    let c2 = psub(&[0.0, 0.0, r_ab2], &pscale(&ab, r_bc2));
    // Res_y / R_ab^2 = R_ab^2 (c2 - c1)^2 - (b2 - b1)(b1 c2 - b2 c1)
    let dc = psub(&c2, &c1);
    let db = psub(&b2, &b1);
    let cross = psub(&pmul(&b1, &c2), &pmul(&b2, &c1));
    let quartic = psub(&pscale(&pmul(&dc, &dc), r_ab2), &pmul(&db, &cross));
    finish(resize(quartic, 5))
}

/// Linear form `k0 + kc * cos + ks * sin` with vector coefficients.
#[derive(Clone, Copy)]
struct TrigRow {
    constant: Vector3<f64>,
    cos: Vector3<f64>,
    sin: Vector3<f64>,
}

impl TrigRow {
    fn part(&self, which: usize) -> &Vector3<f64> {
        match which {
            0 => &self.constant,
            1 => &self.cos,
            _ => &self.sin,
        }
    }
}

/// Quartic in `x = cos(theta)` for three correspondences between two level
/// cameras related by `X_2 = rot_y(theta) X_1 + t`.
///
/// Each correspondence gives `t . (rot_y(theta) q_k x q'_k) = 0`; a nonzero
/// `t` exists iff the 3x3 determinant of those rows vanishes. That
/// determinant is a trigonometric polynomial of degree two in `theta`,
/// `P(cos) + sin * Q(cos)`, and squaring out the sine gives
/// `P^2 - (1 - cos^2) Q^2`.
pub fn three_plus_one_quartic(
    first: [Point2; 3],
    second: [Point2; 3],
    intrinsics: &Intrinsics,
) -> Result<Polynomial, GeometryError> {
    let q1 = first.map(|u| intrinsics.bearing(&u));
    let q2 = second.map(|u| intrinsics.bearing(&u));
    check_distinct_rays(&q1)?;
    check_distinct_rays(&q2)?;
    let (p, q) = three_plus_one_trig_parts(&q1, &q2);
    // cubic harmonics cancel identically; keep P to degree 2 and Q to degree 1
    let p = &p[..3];
    let q = &q[..2];
    let quartic = psub(&pmul(p, p), &pmul(&[1.0, 0.0, -1.0], &pmul(q, q)));
    finish(resize(quartic, 5))
}

/// Epipolar determinant as `P(c) + s Q(c)`, ascending coefficients, with `P`
/// up to degree 3 and `Q` up to degree 2 before truncation.
pub(crate) fn three_plus_one_trig_parts(
    q1: &[Vector3<f64>; 3],
    q2: &[Vector3<f64>; 3],
) -> ([f64; 4], [f64; 3]) {
    let rows: Vec<TrigRow> = q1
        .iter()
        .zip(q2)
        .map(|(a, b)| {
            // rot_y(theta) a = cos * (ax, 0, az) + sin * (az, 0, -ax) + (0, ay, 0)
            let cos = Vector3::new(a.x, 0.0, a.z).cross(b);
            let sin = Vector3::new(a.z, 0.0, -a.x).cross(b);
            let constant = Vector3::new(0.0, a.y, 0.0).cross(b);
            TrigRow { constant, cos, sin }
        })
        .collect();

    // coefficient of cos^i sin^j
    let mut mono = [[0.0f64; 4]; 4];
    for e0 in 0..3 {
        for e1 in 0..3 {
            for e2 in 0..3 {
                let det = Matrix3::from_rows(&[
                    rows[0].part(e0).transpose(),
                    rows[1].part(e1).transpose(),
                    rows[2].part(e2).transpose(),
                ])
                .determinant();
                let choice = [e0, e1, e2];
                let i = choice.iter().filter(|&&e| e == 1).count();
                let j = choice.iter().filter(|&&e| e == 2).count();
                mono[i][j] += det;
            }
        }
    }

    let mut p = [0.0; 4];
    let mut q = [0.0; 3];
    for (i, row) in mono.iter().enumerate() {
        for (j, &coef) in row.iter().enumerate() {
            if coef == 0.0 || i + j > 3 {
                continue;
            }
            match j {
                0 => p[i] += coef,
                1 => q[i] += coef,
                // s^2 = 1 - c^2
                2 => {
                    p[i] += coef;
                    p[i + 2] -= coef;
                }
                // s^3 = s (1 - c^2)
                _ => {
                    q[i] += coef;
                    q[i + 2] -= coef;
                }
            }
        }
    }
    (p, q)
}

/// Ray through `u` expressed in the level frame of a level camera (world
/// axes rotated by the camera yaw).
pub fn level_ray(u: &Point2, intrinsics: &Intrinsics) -> Vector3<f64> {
    level_base_rotation().transpose() * intrinsics.bearing(u)
}

/// Quadratic in `x = tan(theta / 2)` for two correspondences seen by a level
/// camera with yaw `theta` (`X_cam = level_rotation(theta) * (X - C)`).
///
/// In the level frame each ray `r` satisfies `r ~ rot_z(theta) X + t`. Two
/// planes through `r` give two scalar equations per point; with
/// `(1 + x^2) rot_z` polynomial in `x` and the translation scaled by
/// `1 + x^2`, the four equations are linear in `(t, 1)` and their 4x4
/// determinant is the returned quadratic.
pub fn up2p_quadratic(
    world: [Point3; 2],
    image: [Point2; 2],
    intrinsics: &Intrinsics,
) -> Result<Polynomial, GeometryError> {
    check_distinct_points(&world)?;
    let rays = image.map(|u| level_ray(&u, intrinsics));
    check_distinct_rays(&rays)?;

    let mut normals = Vec::with_capacity(4);
    for r in &rays {
        let mut e1 = r.cross(&Vector3::z());
        if e1.norm() < 1e-12 {
            e1 = r.cross(&Vector3::x());
        }
        let e1 = e1.normalize();
        let e2 = r.normalize().cross(&e1);
        normals.push(e1);
        normals.push(e2);
    }
    // b(x) = e . ((1 + x^2) rot_z(theta) X), ascending in x
    let constant_terms: Vec<[f64; 3]> = normals
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let p = &world[k / 2];
            [
                e.x * p.x + e.y * p.y + e.z * p.z,
                2.0 * (e.y * p.x - e.x * p.y),
                -e.x * p.x - e.y * p.y + e.z * p.z,
            ]
        })
        .collect();

    let mut quad = [0.0; 3];
    for (power, q) in quad.iter_mut().enumerate() {
        let m = Matrix4::from_fn(|r, c| {
            if c < 3 {
                normals[r][c]
            } else {
                constant_terms[r][power]
            }
        });
        *q = m.determinant();
    }
    finish(quad.to_vec())
}
