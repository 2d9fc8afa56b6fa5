//! Evaluation metrics: contour circularity and tracker angular deviation.

use std::path::Path;

use nalgebra::{Matrix3, Quaternion, UnitQuaternion, Vector3};

use crate::io::{parse_f64, read_table};
use crate::{Error, Result};

/// Unit-norm tolerance for orientation inputs.
const UNIT_TOLERANCE: f64 = 1e-6;
/// Trace-derived cosines beyond this margin outside [-1, 1] are rejected.
const COSINE_TOLERANCE: f64 = 1e-6;

/// Closed polygon in the plane, vertices in mm.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<[f64; 2]>,
}

impl Polygon {
    /// Validates vertex count, finiteness, simplicity and non-zero area.
    pub fn new(vertices: Vec<[f64; 2]>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::DegeneratePolygon(format!(
                "{} vertices, need at least 3",
                vertices.len()
            )));
        }
        if vertices.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::DegeneratePolygon("non-finite vertex".into()));
        }
        let polygon = Self { vertices };
        if polygon.signed_area() == 0.0 {
            return Err(Error::DegeneratePolygon("zero area".into()));
        }
        if let Some((i, j)) = polygon.self_intersection() {
            return Err(Error::DegeneratePolygon(format!(
                "edges {i} and {j} intersect"
            )));
        }
        Ok(polygon)
    }

    /// Regular `n`-gon of circumradius `radius` centred on the origin.
    pub fn regular(n: usize, radius: f64) -> Result<Self> {
        let step = std::f64::consts::TAU / n as f64;
        Self::new(
            (0..n)
                .map(|i| {
                    let a = step * i as f64;
                    [radius * a.cos(), radius * a.sin()]
                })
                .collect(),
        )
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    fn edges(&self) -> impl Iterator<Item = ([f64; 2], [f64; 2])> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    // Coordinates are taken relative to the first vertex so that a small
    // outline far from the origin keeps its precision.
    fn signed_area(&self) -> f64 {
        let o = self.vertices[0];
        0.5 * self
            .edges()
            .map(|(a, b)| (a[0] - o[0]) * (b[1] - o[1]) - (b[0] - o[0]) * (a[1] - o[1]))
            .sum::<f64>()
    }

    fn self_intersection(&self) -> Option<(usize, usize)> {
        let n = self.vertices.len();
        let edge = |i: usize| (self.vertices[i], self.vertices[(i + 1) % n]);
        for i in 0..n {
            for j in i + 1..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                let (p1, p2) = edge(i);
                let (q1, q2) = edge(j);
                if adjacent {
                    // Neighbouring edges share a vertex; they only conflict
                    // when they fold back onto each other.
                    let shared = if j == i + 1 { p2 } else { p1 };
                    let (u, v) = if j == i + 1 { (p1, q2) } else { (p2, q1) };
                    if cross(shared, u, v) == 0.0 && dot(shared, u, v) > 0.0 {
                        return Some((i, j));
                    }
                } else if segments_intersect(p1, p2, q1, q2) {
                    return Some((i, j));
                }
            }
        }
        None
    }
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn dot(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[0] - o[0]) + (a[1] - o[1]) * (b[1] - o[1])
}

fn on_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> bool {
    p[0] >= a[0].min(b[0])
        && p[0] <= a[0].max(b[0])
        && p[1] >= a[1].min(b[1])
        && p[1] <= a[1].max(b[1])
}

fn segments_intersect(p1: [f64; 2], p2: [f64; 2], q1: [f64; 2], q2: [f64; 2]) -> bool {
    // Bounding boxes first: cheap and rules out most pairs.
    if p1[0].max(p2[0]) < q1[0].min(q2[0])
        || q1[0].max(q2[0]) < p1[0].min(p2[0])
        || p1[1].max(p2[1]) < q1[1].min(q2[1])
        || q1[1].max(q2[1]) < p1[1].min(p2[1])
    {
        return false;
    }
    let d1 = cross(q1, q2, p1);
    let d2 = cross(q1, q2, p2);
    let d3 = cross(p1, p2, q1);
    let d4 = cross(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(p1, q1, q2))
        || (d2 == 0.0 && on_segment(p2, q1, q2))
        || (d3 == 0.0 && on_segment(q1, p1, p2))
        || (d4 == 0.0 && on_segment(q2, p1, p2))
}

/// Shoelace area, independent of vertex order.
pub fn polygon_area(p: &Polygon) -> f64 {
    p.signed_area().abs()
}

pub fn polygon_perimeter(p: &Polygon) -> f64 {
    p.edges()
        .map(|(a, b)| (b[0] - a[0]).hypot(b[1] - a[1]))
        .sum()
}

/// `4 pi area / perimeter^2`; 1 for a circle, smaller for anything else.
pub fn circularity(p: &Polygon) -> f64 {
    let perimeter = polygon_perimeter(p);
    4.0 * std::f64::consts::PI * polygon_area(p) / (perimeter * perimeter)
}

/// Circularity of a cut contour relative to an imaged template.
pub fn relative_circularity(cut: &Polygon, template: &Polygon) -> f64 {
    circularity(cut) / circularity(template)
}

/// Reads an `x,y` vertex file (mm). A leading `x,y` header is optional.
pub fn read_polygon(path: &Path) -> Result<Polygon> {
    let table = read_table(path, false)?;
    let mut rows = table.rows.iter().peekable();
    if let Some(first) = rows.peek() {
        if first.fields.first().map(String::as_str) == Some("x") {
            rows.next();
        }
    }
    let mut vertices = Vec::new();
    for row in rows {
        if row.fields.len() != 2 {
            return Err(Error::parse(path, row.line, "expected `x,y`"));
        }
        vertices.push([
            parse_f64(path, row.line, &row.fields[0])?,
            parse_f64(path, row.line, &row.fields[1])?,
        ]);
    }
    Polygon::new(vertices)
}

/// Validated unit quaternion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Orientation(UnitQuaternion<f64>);

impl Orientation {
    /// From scalar-first components. The norm must be within 1e-6 of one;
    /// the stored value is renormalised.
    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Result<Self> {
        let q = Quaternion::new(w, x, y, z);
        let norm = q.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::InvalidOrientation(format!("quaternion norm {norm}")));
        }
        Ok(Self(UnitQuaternion::new_normalize(q)))
    }

    pub fn identity() -> Self {
        Self(UnitQuaternion::identity())
    }

    /// Rotation of `angle` rad about `axis` (normalised internally).
    pub fn from_axis_angle(axis: [f64; 3], angle: f64) -> Result<Self> {
        let axis = nalgebra::Vector3::from(axis);
        let unit = nalgebra::Unit::try_new(axis, 1e-12)
            .ok_or_else(|| Error::InvalidOrientation("zero rotation axis".into()))?;
        Ok(Self(UnitQuaternion::from_axis_angle(&unit, angle)))
    }

    pub fn quaternion(&self) -> &UnitQuaternion<f64> {
        &self.0
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        *self.0.to_rotation_matrix().matrix()
    }

    /// Composition `self * other` (apply `other` first).
    pub fn compose(&self, other: &Orientation) -> Orientation {
        Orientation(self.0 * other.0)
    }

    pub fn inverse(&self) -> Orientation {
        Orientation(self.0.inverse())
    }
}

/// `R_t R_0^T`: rotation taking the initial orientation to the current one.
pub fn relative_rotation(r0: &Orientation, rt: &Orientation) -> Orientation {
    rt.compose(&r0.inverse())
}

/// Rotation angle in `[0, pi]` recovered from a matrix trace.
///
/// The cosine `(tr - 1) / 2` is clamped to `[-1, 1]`; values more than 1e-6
/// outside that range indicate a corrupt matrix and are rejected.
pub fn angle_from_trace(trace: f64) -> Result<f64> {
    let cosine = (trace - 1.0) / 2.0;
    if !cosine.is_finite() || cosine.abs() > 1.0 + COSINE_TOLERANCE {
        return Err(Error::InvalidOrientation(format!("rotation trace {trace}")));
    }
    Ok(cosine.clamp(-1.0, 1.0).acos().abs())
}

/// Geodesic angle of a rotation, in `[0, pi]`.
///
/// Equal to `acos((tr R - 1) / 2)`, but taken as `atan2(2 sin, 2 cos)` with
/// the sine from the skew part of `R`, which stays accurate near 0 and pi
/// where `acos` loses half the digits.
pub fn rotation_angle(r: &Orientation) -> f64 {
    let m = r.matrix();
    let skew = Vector3::new(
        m[(2, 1)] - m[(1, 2)],
        m[(0, 2)] - m[(2, 0)],
        m[(1, 0)] - m[(0, 1)],
    );
    skew.norm().atan2(m.trace() - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrackerRole {
    Chest,
    UpperArm,
    LowerArm,
}

impl TrackerRole {
    pub fn name(self) -> &'static str {
        match self {
            TrackerRole::Chest => "chest",
            TrackerRole::UpperArm => "upper_arm",
            TrackerRole::LowerArm => "lower_arm",
        }
    }

    /// Role from a pose-log file name ending in `_chest`, `_upper` or
    /// `_lower` before the extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        let stem = path.file_stem()?.to_str()?;
        let suffix = stem.rsplit_once('_')?.1;
        match suffix {
            "chest" => Some(TrackerRole::Chest),
            "upper" => Some(TrackerRole::UpperArm),
            "lower" => Some(TrackerRole::LowerArm),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseSample {
    pub t: f64,
    pub orientation: Orientation,
}

/// Orientation log of one body-mounted tracker.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseTrace {
    role: TrackerRole,
    samples: Vec<PoseSample>,
}

impl PoseTrace {
    pub fn new(role: TrackerRole, samples: Vec<PoseSample>) -> Result<Self> {
        if samples
            .windows(2)
            .any(|w| w[1].t.partial_cmp(&w[0].t) != Some(std::cmp::Ordering::Greater))
        {
            return Err(Error::InvalidOrientation(
                "pose timestamps must be strictly increasing".into(),
            ));
        }
        Ok(Self { role, samples })
    }

    pub fn role(&self) -> TrackerRole {
        self.role
    }

    pub fn samples(&self) -> &[PoseSample] {
        &self.samples
    }

    /// Nominal rate from the mean timestamp spacing.
    pub fn sample_rate(&self) -> Option<f64> {
        let (first, last) = (self.samples.first()?, self.samples.last()?);
        if self.samples.len() < 2 {
            return None;
        }
        Some((self.samples.len() - 1) as f64 / (last.t - first.t))
    }
}

/// Mean over all samples of the angle between each sample and the first.
pub fn mean_abs_angular_deviation(trace: &PoseTrace) -> Result<f64> {
    let first = trace
        .samples
        .first()
        .ok_or(Error::EmptyInput("pose trace has no samples"))?;
    let total: f64 = trace
        .samples
        .iter()
        .map(|s| rotation_angle(&relative_rotation(&first.orientation, &s.orientation)))
        .sum();
    Ok(total / trace.samples.len() as f64)
}

/// Reads a `t,qw,qx,qy,qz` pose log; the tracker role comes from the file
/// name suffix.
pub fn read_pose_trace(path: &Path) -> Result<PoseTrace> {
    let role = TrackerRole::from_path(path).ok_or_else(|| {
        Error::InvalidTrace(format!(
            "{}: file name must end in _chest, _upper or _lower",
            path.display()
        ))
    })?;
    let table = read_table(path, true)?;
    if table.header != ["t", "qw", "qx", "qy", "qz"] {
        return Err(Error::parse(path, 1, "header must be `t,qw,qx,qy,qz`"));
    }
    let mut samples = Vec::with_capacity(table.rows.len());
    for row in &table.rows {
        let v = row
            .fields
            .iter()
            .map(|f| parse_f64(path, row.line, f))
            .collect::<Result<Vec<f64>>>()?;
        let orientation = Orientation::new(v[1], v[2], v[3], v[4])
            .map_err(|e| Error::parse(path, row.line, e.to_string()))?;
        if let Some(prev) = samples.last() {
            let prev: &PoseSample = prev;
            if v[0] <= prev.t {
                return Err(Error::parse(
                    path,
                    row.line,
                    "timestamps must be strictly increasing",
                ));
            }
        }
        samples.push(PoseSample {
            t: v[0],
            orientation,
        });
    }
    PoseTrace::new(role, samples)
}
