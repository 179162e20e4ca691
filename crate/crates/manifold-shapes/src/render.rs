//! Procedural prism meshes, OBJ ingestion, and a small perspective
//! rasterizer with flat Lambertian shading and a movable point light.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sampling::{hopf_to_rotation, RotationMatrix, SampleGrid, Topology};
use crate::Scalar;

const DEGENERATE_AREA: f64 = 1e-12;

/// Triangle mesh in model units.
#[derive(Clone, Debug)]
pub struct TriMesh<T> {
    pub vertices: Vec<[T; 3]>,
    pub triangles: Vec<[usize; 3]>,
}

impl<T: Scalar> TriMesh<T> {
    /// Validates index ranges and rejects degenerate triangles.
    pub fn new(vertices: Vec<[T; 3]>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        for (t, tri) in triangles.iter().enumerate() {
            for &i in tri {
                if i >= vertices.len() {
                    return Err(Error::InvalidMesh(format!(
                        "triangle {t} references vertex {i} of {}",
                        vertices.len()
                    )));
                }
            }
            let area = triangle_area(&vertices[tri[0]], &vertices[tri[1]], &vertices[tri[2]]);
            if area.as_f64() <= DEGENERATE_AREA {
                return Err(Error::InvalidMesh(format!("triangle {t} is degenerate")));
            }
        }
        Ok(TriMesh {
            vertices,
            triangles,
        })
    }

    pub fn bounding_radius(&self) -> T {
        self.vertices
            .iter()
            .map(|v| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt())
            .fold(T::zero(), T::max)
    }
}

fn sub3<T: Scalar>(a: &[T; 3], b: &[T; 3]) -> [T; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross3<T: Scalar>(a: &[T; 3], b: &[T; 3]) -> [T; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm3<T: Scalar>(v: &[T; 3]) -> T {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn triangle_area<T: Scalar>(a: &[T; 3], b: &[T; 3], c: &[T; 3]) -> T {
    norm3(&cross3(&sub3(b, a), &sub3(c, a))) / T::of(2.0)
}

/// Pinhole camera on the negative y-axis looking at the origin, up = +z.
/// The sensor is a unit square at the focal distance.
#[derive(Clone, Copy, Debug)]
pub struct CameraConfig<T> {
    pub distance: T,
    pub focal_length: T,
    pub image_size: usize,
}

impl<T: Scalar> CameraConfig<T> {
    pub fn new(distance: T, focal_length: T, image_size: usize) -> Result<Self> {
        if distance <= T::zero() || focal_length <= T::zero() {
            return Err(Error::InvalidArgument(
                "camera distance and focal length must be positive".into(),
            ));
        }
        if image_size < 16 {
            return Err(Error::InvalidArgument(format!(
                "image size must be >= 16, got {image_size}"
            )));
        }
        Ok(CameraConfig {
            distance,
            focal_length,
            image_size,
        })
    }
}

/// Single point light plus a constant ambient term.
#[derive(Clone, Copy, Debug)]
pub struct LightConfig<T> {
    pub position: [T; 3],
    pub ambient: T,
    pub diffuse: T,
}

impl<T: Scalar> LightConfig<T> {
    pub fn new(position: [T; 3], ambient: T, diffuse: T) -> Result<Self> {
        if ambient < T::zero() || diffuse < T::zero() || ambient + diffuse > T::one() {
            return Err(Error::InvalidArgument(
                "need ambient, diffuse >= 0 with ambient + diffuse <= 1".into(),
            ));
        }
        Ok(LightConfig {
            position,
            ambient,
            diffuse,
        })
    }

    pub fn at(&self, position: [T; 3]) -> Self {
        LightConfig { position, ..*self }
    }
}

/// D x D grayscale raster, row-major intensities in [0, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct GrayImage<T> {
    pub size: usize,
    pub pixels: Vec<T>,
}

impl<T: Scalar> GrayImage<T> {
    pub fn zeros(size: usize) -> Self {
        GrayImage {
            size,
            pixels: vec![T::zero(); size * size],
        }
    }

    pub fn max_abs_diff(&self, other: &GrayImage<T>) -> T {
        assert_eq!(self.size, other.size);
        self.pixels
            .iter()
            .zip(&other.pixels)
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::zero(), T::max)
    }

    pub fn mirrored_horizontal(&self) -> GrayImage<T> {
        let d = self.size;
        let mut out = GrayImage::zeros(d);
        for r in 0..d {
            for c in 0..d {
                out.pixels[r * d + c] = self.pixels[r * d + (d - 1 - c)];
            }
        }
        out
    }

    pub fn foreground_count(&self) -> usize {
        self.pixels.iter().filter(|&&p| p > T::zero()).count()
    }

    /// Binary PGM (P5, maxval 255) with the rounding rule `round(255 * v)`.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.size, self.size).into_bytes();
        out.extend(self.pixels.iter().map(|&v| {
            let v = v.max(T::zero()).min(T::one()).as_f64();
            (255.0 * v).round() as u8
        }));
        out
    }
}

/// Projected vertex: sensor pixel coordinates plus inverse depth.
#[derive(Clone, Copy)]
struct Projected<T> {
    u: T,
    v: T,
    inv_depth: T,
}

fn project<T: Scalar>(p: &[T; 3], cam: &CameraConfig<T>) -> Option<Projected<T>> {
    let depth = p[1] + cam.distance;
    if depth <= T::of(1e-9) {
        return None;
    }
    let half = T::of(0.5);
    let d = T::of(cam.image_size as f64);
    let sx = cam.focal_length * p[0] / depth;
    let sy = cam.focal_length * p[2] / depth;
    Some(Projected {
        u: (sx + half) * d - half,
        v: (half - sy) * d - half,
        inv_depth: T::one() / depth,
    })
}

/// Flat-shaded, z-buffered perspective render of a posed mesh.
///
/// Covered pixels get `clamp(ambient + diffuse * max(0, n.l))` with `n` the
/// triangle normal and `l` the unit direction from the triangle centroid to
/// the light. Background stays exactly zero. Triangles are rasterized in
/// order with a strict nearest-depth test, so output is deterministic.
pub fn render<T: Scalar>(
    mesh: &TriMesh<T>,
    pose: &RotationMatrix<T>,
    cam: &CameraConfig<T>,
    light: &LightConfig<T>,
) -> GrayImage<T> {
    let d = cam.image_size;
    let mut img = GrayImage::zeros(d);
    let mut zbuf = vec![T::infinity(); d * d];

    let world: Vec<[T; 3]> = mesh.vertices.iter().map(|v| pose.apply(*v)).collect();

    for tri in &mesh.triangles {
        let a = &world[tri[0]];
        let b = &world[tri[1]];
        let c = &world[tri[2]];

        let n = cross3(&sub3(b, a), &sub3(c, a));
        let n_len = norm3(&n);
        if n_len == T::zero() {
            continue;
        }
        let third = T::one() / T::of(3.0);
        let centroid = [
            (a[0] + b[0] + c[0]) * third,
            (a[1] + b[1] + c[1]) * third,
            (a[2] + b[2] + c[2]) * third,
        ];
        let to_light = sub3(&light.position, &centroid);
        let tl_len = norm3(&to_light);
        let ndotl = if tl_len > T::zero() {
            (n[0] * to_light[0] + n[1] * to_light[1] + n[2] * to_light[2]) / (n_len * tl_len)
        } else {
            T::zero()
        };
        let intensity = (light.ambient + light.diffuse * ndotl.max(T::zero()))
            .max(T::zero())
            .min(T::one());

        let (pa, pb, pc) = match (project(a, cam), project(b, cam), project(c, cam)) {
            (Some(pa), Some(pb), Some(pc)) => (pa, pb, pc),
            _ => continue,
        };

        let area2 = (pb.u - pa.u) * (pc.v - pa.v) - (pb.v - pa.v) * (pc.u - pa.u);
        if area2 == T::zero() {
            continue;
        }

        let min_u = pa.u.min(pb.u).min(pc.u).floor().max(T::zero());
        let max_u = pa.u.max(pb.u).max(pc.u).ceil().min(T::of((d - 1) as f64));
        let min_v = pa.v.min(pb.v).min(pc.v).floor().max(T::zero());
        let max_v = pa.v.max(pb.v).max(pc.v).ceil().min(T::of((d - 1) as f64));
        if min_u > max_u || min_v > max_v {
            continue;
        }
        let (c0, c1) = (min_u.as_f64() as usize, max_u.as_f64() as usize);
        let (r0, r1) = (min_v.as_f64() as usize, max_v.as_f64() as usize);

        for row in r0..=r1 {
            let py = T::of(row as f64);
            for col in c0..=c1 {
                let px = T::of(col as f64);
                let l0 = ((pb.u - px) * (pc.v - py) - (pc.u - px) * (pb.v - py)) / area2;
                let l1 = ((pc.u - px) * (pa.v - py) - (pa.u - px) * (pc.v - py)) / area2;
                let l2 = ((pa.u - px) * (pb.v - py) - (pb.u - px) * (pa.v - py)) / area2;
                if l0 < T::zero() || l1 < T::zero() || l2 < T::zero() {
                    continue;
                }
                let inv_depth = l0 * pa.inv_depth + l1 * pb.inv_depth + l2 * pc.inv_depth;
                if inv_depth <= T::zero() {
                    continue;
                }
                let depth = T::one() / inv_depth;
                let at = row * d + col;
                if depth < zbuf[at] {
                    zbuf[at] = depth;
                    img.pixels[at] = intensity;
                }
            }
        }
    }
    img
}

/// One image per grid node in node order, under a fixed light.
pub fn render_pose_set<T: Scalar>(
    mesh: &TriMesh<T>,
    grid: &SampleGrid<T>,
    cam: &CameraConfig<T>,
    light: &LightConfig<T>,
) -> Result<Vec<GrayImage<T>>> {
    if !grid.topology.is_rotation() {
        return Err(Error::WrongGridKind(
            "pose rendering needs a rotation grid, got a light circle".into(),
        ));
    }
    Ok(grid
        .nodes
        .par_iter()
        .map(|h| render(mesh, &hopf_to_rotation(h), cam, light))
        .collect())
}

/// One image per light position, pose fixed at identity.
pub fn render_illumination_set<T: Scalar>(
    mesh: &TriMesh<T>,
    grid: &SampleGrid<T>,
    cam: &CameraConfig<T>,
    base_light: &LightConfig<T>,
) -> Result<Vec<GrayImage<T>>> {
    if !matches!(grid.topology, Topology::LightCircle { .. }) {
        return Err(Error::WrongGridKind(
            "illumination rendering needs a light-circle grid".into(),
        ));
    }
    let identity = RotationMatrix::identity();
    Ok((0..grid.len())
        .into_par_iter()
        .map(|i| {
            let light = base_light.at(grid.light_position(i).unwrap());
            render(mesh, &identity, cam, &light)
        })
        .collect())
}

/// Regular prism: two parallel copies of a regular polygon with `sides`
/// vertices of circumradius `radius`, faces in the horizontal planes
/// `z = +-height/2`.
pub fn make_prism<T: Scalar>(sides: usize, radius: T, height: T) -> Result<TriMesh<T>> {
    if sides < 3 {
        return Err(Error::InvalidMesh(format!(
            "prism needs >= 3 sides, got {sides}"
        )));
    }
    if radius <= T::zero() || height <= T::zero() {
        return Err(Error::InvalidMesh(
            "prism radius and height must be positive".into(),
        ));
    }
    let half_h = height / T::of(2.0);
    let mut vertices = Vec::with_capacity(2 * sides);
    for &z in &[half_h, -half_h] {
        for k in 0..sides {
            let angle = T::of(2.0) * T::PI() * T::of(k as f64) / T::of(sides as f64);
            vertices.push([radius * angle.cos(), radius * angle.sin(), z]);
        }
    }
    let top = |k: usize| k % sides;
    let bot = |k: usize| sides + k % sides;

    let mut triangles = Vec::with_capacity(2 * sides + 2 * (sides - 2));
    for k in 0..sides {
        triangles.push([top(k), bot(k), bot(k + 1)]);
        triangles.push([top(k), bot(k + 1), top(k + 1)]);
    }
    for k in 1..sides - 1 {
        triangles.push([top(0), top(k), top(k + 1)]);
        triangles.push([bot(0), bot(k + 1), bot(k)]);
    }
    TriMesh::new(vertices, triangles)
}

/// Parse an OBJ document (v/f records, polygons fan-triangulated), recenter
/// to the vertex centroid, and rescale to unit bounding radius. Degenerate
/// faces are dropped.
pub fn load_obj<T: Scalar>(text: &str) -> Result<TriMesh<T>> {
    let mut vertices: Vec<[T; 3]> = Vec::new();
    let mut faces: Vec<Vec<usize>> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = lineno + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("v") => {
                let coords: Vec<&str> = parts.collect();
                if coords.len() < 3 {
                    return Err(Error::ObjParse {
                        line: lineno,
                        msg: "vertex needs 3 coordinates".into(),
                    });
                }
                let mut v = [T::zero(); 3];
                for (slot, c) in v.iter_mut().zip(&coords) {
                    *slot = T::of(c.parse::<f64>().map_err(|e| Error::ObjParse {
                        line: lineno,
                        msg: format!("bad coordinate '{c}': {e}"),
                    })?);
                }
                vertices.push(v);
            }
            Some("f") => {
                let mut idxs = Vec::new();
                for tok in parts {
                    let first = tok.split('/').next().unwrap_or("");
                    let i: i64 = first.parse().map_err(|e| Error::ObjParse {
                        line: lineno,
                        msg: format!("bad face index '{tok}': {e}"),
                    })?;
                    let resolved = if i > 0 {
                        (i - 1) as usize
                    } else if i < 0 {
                        let from_end = (-i) as usize;
                        if from_end > vertices.len() {
                            return Err(Error::ObjParse {
                                line: lineno,
                                msg: format!("relative index {i} out of range"),
                            });
                        }
                        vertices.len() - from_end
                    } else {
                        return Err(Error::ObjParse {
                            line: lineno,
                            msg: "face index 0 is invalid".into(),
                        });
                    };
                    if resolved >= vertices.len() {
                        return Err(Error::ObjParse {
                            line: lineno,
                            msg: format!("face index {i} out of range"),
                        });
                    }
                    idxs.push(resolved);
                }
                if idxs.len() < 3 {
                    return Err(Error::ObjParse {
                        line: lineno,
                        msg: "face needs at least 3 vertices".into(),
                    });
                }
                faces.push(idxs);
            }
            _ => {} // vn, vt, groups, materials: ignored
        }
    }

    if vertices.is_empty() || faces.is_empty() {
        return Err(Error::InvalidMesh("OBJ contains no geometry".into()));
    }

    // Recenter to centroid, rescale to unit bounding radius.
    let n = T::of(vertices.len() as f64);
    let mut centroid = [T::zero(); 3];
    for v in &vertices {
        for k in 0..3 {
            centroid[k] += v[k] / n;
        }
    }
    for v in &mut vertices {
        for k in 0..3 {
            v[k] -= centroid[k];
        }
    }
    let radius = vertices.iter().map(norm3).fold(T::zero(), T::max);
    if radius == T::zero() {
        return Err(Error::InvalidMesh("all vertices coincide".into()));
    }
    for v in &mut vertices {
        for k in 0..3 {
            v[k] /= radius;
        }
    }

    let mut triangles = Vec::new();
    for face in faces {
        for k in 1..face.len() - 1 {
            let tri = [face[0], face[k], face[k + 1]];
            let area = triangle_area(&vertices[tri[0]], &vertices[tri[1]], &vertices[tri[2]]);
            if area.as_f64() > DEGENERATE_AREA {
                triangles.push(tri);
            }
        }
    }
    TriMesh::new(vertices, triangles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{sample_lights, sample_so2, HopfTriple};
    use std::f64::consts::PI;

    fn cam(d: usize) -> CameraConfig<f64> {
        CameraConfig::new(4.0, 1.0, d).unwrap()
    }

    fn light() -> LightConfig<f64> {
        LightConfig::new([2.0, -3.0, 4.0], 0.25, 0.65).unwrap()
    }

    #[test]
    fn prism_counts() {
        let p4 = make_prism::<f64>(4, 1.0, 1.0).unwrap();
        assert_eq!(p4.vertices.len(), 8);
        assert_eq!(p4.triangles.len(), 12);
        let p1000 = make_prism::<f64>(1000, 1.0, 1.0).unwrap();
        assert_eq!(p1000.vertices.len(), 2000);
        assert_eq!(p1000.triangles.len(), 2 * 1000 + 2 * 998);
        assert!(matches!(
            make_prism::<f64>(2, 1.0, 1.0),
            Err(Error::InvalidMesh(_))
        ));
    }

    #[test]
    fn prism_vertex_geometry() {
        let r = 1.5;
        let h = 0.8;
        let p = make_prism::<f64>(7, r, h).unwrap();
        let expect = (r * r + (h / 2.0) * (h / 2.0)).sqrt();
        for v in &p.vertices {
            let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            assert!((norm - expect).abs() < 1e-12);
            let xy = (v[0] * v[0] + v[1] * v[1]).sqrt();
            assert!((xy - r).abs() < 1e-12);
            assert!((v[2].abs() - h / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn obj_minimal_triangle() {
        let mesh = load_obj::<f64>("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n").unwrap();
        assert_eq!(mesh.triangles.len(), 1);
        assert!((mesh.bounding_radius() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn obj_quad_fan() {
        let mesh =
            load_obj::<f64>("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n").unwrap();
        assert_eq!(mesh.triangles.len(), 2);
    }

    #[test]
    fn obj_cube_oracle() {
        // hand-written unit cube
        let cube = "\
v -1 -1 -1\nv 1 -1 -1\nv 1 1 -1\nv -1 1 -1\n\
v -1 -1 1\nv 1 -1 1\nv 1 1 1\nv -1 1 1\n\
f 1 4 3 2\nf 5 6 7 8\nf 1 2 6 5\nf 2 3 7 6\nf 3 4 8 7\nf 4 1 5 8\n";
        let mesh = load_obj::<f64>(cube).unwrap();
        assert_eq!(mesh.vertices.len(), 8);
        assert_eq!(mesh.triangles.len(), 12);
        assert!((mesh.bounding_radius() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn obj_errors() {
        match load_obj::<f64>("v 0 0\n") {
            Err(Error::ObjParse { line: 1, .. }) => {}
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(matches!(
            load_obj::<f64>("# empty\n"),
            Err(Error::InvalidMesh(_))
        ));
        match load_obj::<f64>("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n") {
            Err(Error::ObjParse { line: 4, .. }) => {}
            other => panic!("expected index error, got {other:?}"),
        }
    }

    #[test]
    fn render_empty_mesh_is_black() {
        let mesh = TriMesh::<f64>::new(vec![], vec![]).unwrap();
        let img = render(&mesh, &RotationMatrix::identity(), &cam(32), &light());
        assert!(img.pixels.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn render_is_deterministic() {
        let mesh = make_prism::<f64>(5, 1.0, 1.0).unwrap();
        let pose = hopf_to_rotation(&HopfTriple::new(PI / 4.0, 0.3, 1.1));
        let a = render(&mesh, &pose, &cam(64), &light());
        let b = render(&mesh, &pose, &cam(64), &light());
        assert_eq!(a, b);
        assert!(a.foreground_count() > 0);
        assert!(a.pixels.iter().all(|&p| (0.0..=1.0).contains(&p)));
    }

    #[test]
    fn foreground_shrinks_with_distance() {
        // similar triangles: doubling the distance quarters the pixel area
        let mesh = make_prism::<f64>(4, 1.0, 1.0).unwrap();
        let pose = hopf_to_rotation(&HopfTriple::new(PI / 4.0, 0.0, 0.4));
        let near = CameraConfig::new(6.0, 1.0, 128).unwrap();
        let far = CameraConfig::new(12.0, 1.0, 128).unwrap();
        let a = render(&mesh, &pose, &near, &light()).foreground_count() as f64;
        let b = render(&mesh, &pose, &far, &light()).foreground_count() as f64;
        let ratio = a / b;
        assert!((ratio - 4.0).abs() / 4.0 < 0.15, "ratio {ratio}");
    }

    /// Brute-force per-pixel all-triangle oracle for the z-buffer: for every
    /// pixel, scan all triangles and keep the nearest covering one.
    fn reference_render(
        mesh: &TriMesh<f64>,
        pose: &RotationMatrix<f64>,
        cam: &CameraConfig<f64>,
        light: &LightConfig<f64>,
    ) -> GrayImage<f64> {
        let d = cam.image_size;
        let mut img = GrayImage::zeros(d);
        let world: Vec<[f64; 3]> = mesh.vertices.iter().map(|v| pose.apply(*v)).collect();

        for row in 0..d {
            for col in 0..d {
                let px = col as f64;
                let py = row as f64;
                let mut best_depth = f64::INFINITY;
                let mut best_val = 0.0;
                for tri in &mesh.triangles {
                    let (a, b, c) = (&world[tri[0]], &world[tri[1]], &world[tri[2]]);
                    let pr = |p: &[f64; 3]| {
                        let depth = p[1] + cam.distance;
                        let dd = d as f64;
                        (
                            (cam.focal_length * p[0] / depth + 0.5) * dd - 0.5,
                            (0.5 - cam.focal_length * p[2] / depth) * dd - 0.5,
                            depth,
                        )
                    };
                    let (ua, va, da) = pr(a);
                    let (ub, vb, db) = pr(b);
                    let (uc, vc, dc) = pr(c);
                    if da <= 1e-9 || db <= 1e-9 || dc <= 1e-9 {
                        continue;
                    }
                    let area2 = (ub - ua) * (vc - va) - (vb - va) * (uc - ua);
                    if area2 == 0.0 {
                        continue;
                    }
                    let l0 = ((ub - px) * (vc - py) - (uc - px) * (vb - py)) / area2;
                    let l1 = ((uc - px) * (va - py) - (ua - px) * (vc - py)) / area2;
                    let l2 = ((ua - px) * (vb - py) - (ub - px) * (va - py)) / area2;
                    if l0 < 0.0 || l1 < 0.0 || l2 < 0.0 {
                        continue;
                    }
                    let inv_depth = l0 / da + l1 / db + l2 / dc;
                    if inv_depth <= 0.0 {
                        continue;
                    }
                    let depth = 1.0 / inv_depth;
                    if depth >= best_depth {
                        continue;
                    }
                    let n = cross3(&sub3(b, a), &sub3(c, a));
                    let n_len = norm3(&n);
                    let centroid = [
                        (a[0] + b[0] + c[0]) / 3.0,
                        (a[1] + b[1] + c[1]) / 3.0,
                        (a[2] + b[2] + c[2]) / 3.0,
                    ];
                    let tl = sub3(&light.position, &centroid);
                    let ndotl = (n[0] * tl[0] + n[1] * tl[1] + n[2] * tl[2])
                        / (n_len * norm3(&tl));
                    best_depth = depth;
                    best_val =
                        (light.ambient + light.diffuse * ndotl.max(0.0)).clamp(0.0, 1.0);
                }
                img.pixels[row * d + col] = best_val;
            }
        }
        img
    }

    #[test]
    fn zbuffer_matches_per_pixel_oracle() {
        let mesh = make_prism::<f64>(5, 1.0, 1.0).unwrap();
        let pose = hopf_to_rotation(&HopfTriple::new(0.9, 0.37, 2.13));
        let c = CameraConfig::new(4.0, 1.0, 16).unwrap();
        let fast = render(&mesh, &pose, &c, &light());
        let slow = reference_render(&mesh, &pose, &c, &light());
        assert!(fast.max_abs_diff(&slow) < 1e-12);
    }

    #[test]
    fn pose_set_prism_symmetry() {
        let grid = sample_so2::<f64>(40).unwrap();
        let mesh = make_prism::<f64>(4, 1.0, 1.0).unwrap();
        let images = render_pose_set(&mesh, &grid, &cam(64), &light()).unwrap();
        assert_eq!(images.len(), 40);
        // 4-fold symmetry: image i matches image i + 10
        for i in 0..10 {
            let diff = images[i].max_abs_diff(&images[i + 10]);
            assert!(diff < 2.0 / 255.0, "i={i} diff={diff}");
        }
        // identity-pose check via a grid whose node 0 has psi = 0
        let direct = render(
            &mesh,
            &hopf_to_rotation(&grid.nodes[0]),
            &cam(64),
            &light(),
        );
        assert_eq!(images[0], direct);
    }

    #[test]
    fn pose_set_rejects_light_grid() {
        let grid = sample_lights::<f64>(8, 2.0, 2.0).unwrap();
        let mesh = make_prism::<f64>(4, 1.0, 1.0).unwrap();
        assert!(matches!(
            render_pose_set(&mesh, &grid, &cam(32), &light()),
            Err(Error::WrongGridKind(_))
        ));
        let rot = sample_so2::<f64>(8).unwrap();
        assert!(matches!(
            render_illumination_set(&mesh, &rot, &cam(32), &light()),
            Err(Error::WrongGridKind(_))
        ));
    }

    /// Sphere by midpoint subdivision of an octahedron. Both the vertex set
    /// and the triangulation are exactly mirror symmetric across the
    /// yz-plane, which flat shading needs for the symmetry check below.
    fn octasphere(subdivisions: usize) -> TriMesh<f64> {
        let mut vertices: Vec<[f64; 3]> = vec![
            [1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0],
        ];
        let mut triangles: Vec<[usize; 3]> = vec![
            [0, 2, 4],
            [2, 1, 4],
            [1, 3, 4],
            [3, 0, 4],
            [2, 0, 5],
            [1, 2, 5],
            [3, 1, 5],
            [0, 3, 5],
        ];
        let mut midpoints = std::collections::HashMap::new();
        for _ in 0..subdivisions {
            let mut next = Vec::with_capacity(triangles.len() * 4);
            for &[a, b, c] in &triangles {
                let mut mid = |p: usize, q: usize| {
                    *midpoints.entry((p.min(q), p.max(q))).or_insert_with(|| {
                        let (u, v) = (vertices[p], vertices[q]);
                        let m = [
                            (u[0] + v[0]) / 2.0,
                            (u[1] + v[1]) / 2.0,
                            (u[2] + v[2]) / 2.0,
                        ];
                        let norm = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]).sqrt();
                        vertices.push([m[0] / norm, m[1] / norm, m[2] / norm]);
                        vertices.len() - 1
                    })
                };
                let (ab, bc, ca) = (mid(a, b), mid(b, c), mid(c, a));
                next.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
            }
            triangles = next;
        }
        TriMesh::new(vertices, triangles).unwrap()
    }

    #[test]
    fn illumination_set_mirror_symmetry() {
        // With the camera on the y-axis, reflecting space across the yz-plane
        // fixes the camera, mirrors the image horizontally, and sends the
        // light angle alpha to pi - alpha.
        let n = 16;
        let grid = sample_lights::<f64>(n, 2.0, 1.0).unwrap();
        let sphere = octasphere(2);
        let images =
            render_illumination_set(&sphere, &grid, &cam(48), &light()).unwrap();
        assert_eq!(images.len(), n);
        for i in 0..n {
            // angle 2*pi*i/n maps to pi - angle = 2*pi*(n/2 - i)/n
            let j = (n / 2 + n - i) % n;
            let diff = images[i].mirrored_horizontal().max_abs_diff(&images[j]);
            assert!(diff < 2.0 / 255.0, "i={i} j={j} diff={diff}");
        }
    }

    #[test]
    fn identical_light_positions_identical_images() {
        let mesh = make_prism::<f64>(6, 1.0, 1.0).unwrap();
        let l = light();
        let a = render(&mesh, &RotationMatrix::identity(), &cam(32), &l);
        let b = render(&mesh, &RotationMatrix::identity(), &cam(32), &l.at(l.position));
        assert_eq!(a, b);
    }
}
