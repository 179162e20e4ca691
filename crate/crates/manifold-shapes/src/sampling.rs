//! Structured rotation and illumination parameter sets, their neighbor
//! graphs, and the rigid registration families used by shape analysis.

use crate::error::{Error, Result};
use crate::Scalar;

/// Hopf coordinates for SO(3): tilt direction `(theta, phi)` on the sphere
/// plus a spin angle `psi` about the object's internal z-axis.
///
/// `phi` is meaningless at the degenerate tilts `theta = 0` and `theta = pi`;
/// such triples are still valid inputs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HopfTriple<T> {
    pub theta: T,
    pub phi: T,
    pub psi: T,
}

impl<T: Scalar> HopfTriple<T> {
    pub fn new(theta: T, phi: T, psi: T) -> Self {
        HopfTriple { theta, phi, psi }
    }
}

/// 3x3 rotation matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotationMatrix<T>(pub [[T; 3]; 3]);

impl<T: Scalar> RotationMatrix<T> {
    pub fn identity() -> Self {
        let o = T::one();
        let z = T::zero();
        RotationMatrix([[o, z, z], [z, o, z], [z, z, o]])
    }

    pub fn about_z(angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        let o = T::one();
        let z = T::zero();
        RotationMatrix([[c, -s, z], [s, c, z], [z, z, o]])
    }

    pub fn about_y(angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        let o = T::one();
        let z = T::zero();
        RotationMatrix([[c, z, s], [z, o, z], [-s, z, c]])
    }

    pub fn compose(&self, other: &RotationMatrix<T>) -> Self {
        let mut out = [[T::zero(); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    out[i][j] += self.0[i][k] * other.0[k][j];
                }
            }
        }
        RotationMatrix(out)
    }

    pub fn transpose(&self) -> Self {
        let m = &self.0;
        RotationMatrix([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn apply(&self, v: [T; 3]) -> [T; 3] {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    pub fn trace(&self) -> T {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn det(&self) -> T {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Max deviation of R^T R from the identity.
    pub fn orthonormality_error(&self) -> T {
        let rtr = self.transpose().compose(self);
        let mut err = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { T::one() } else { T::zero() };
                err = err.max((rtr.0[i][j] - target).abs());
            }
        }
        err
    }

    /// Relative rotation angle between two rotations.
    pub fn angle_to(&self, other: &RotationMatrix<T>) -> T {
        let rel = self.transpose().compose(other);
        let c = (rel.trace() - T::one()) / T::of(2.0);
        c.min(T::one()).max(-T::one()).acos()
    }
}

/// Rotation for Hopf coordinates: spin by `psi` about the extrinsic z-axis,
/// then tilt by `theta` about the in-plane axis `(-sin phi, cos phi, 0)` so
/// the internal north pole lands in the `(theta, phi)` direction.
///
/// The tilt is realized as the conjugation `Rz(phi) Ry(theta) Rz(-phi)`,
/// giving `R = Rz(phi) Ry(theta) Rz(psi - phi)`.
pub fn hopf_to_rotation<T: Scalar>(h: &HopfTriple<T>) -> RotationMatrix<T> {
    RotationMatrix::about_z(h.phi)
        .compose(&RotationMatrix::about_y(h.theta))
        .compose(&RotationMatrix::about_z(h.psi - h.phi))
}

/// Grid topology plus its construction parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum Topology<T> {
    Circle { n: usize },
    Torus { n_phi: usize, n_psi: usize },
    So3Grid { n_sphere: usize, n_psi: usize },
    LightCircle { n: usize, radius: T, height: T },
}

impl<T: Scalar> Topology<T> {
    pub fn node_count(&self) -> usize {
        match *self {
            Topology::Circle { n } => n,
            Topology::Torus { n_phi, n_psi } => n_phi * n_psi,
            Topology::So3Grid { n_sphere, n_psi } => n_sphere * n_psi,
            Topology::LightCircle { n, .. } => n,
        }
    }

    pub fn is_rotation(&self) -> bool {
        !matches!(self, Topology::LightCircle { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Topology::Circle { .. } => "circle",
            Topology::Torus { .. } => "torus",
            Topology::So3Grid { .. } => "so3",
            Topology::LightCircle { .. } => "lights",
        }
    }
}

/// An ordered finite subset of imaging conditions with its neighbor graph.
///
/// For light grids the angle is stored in the `psi` slot of the node triple.
#[derive(Clone, Debug)]
pub struct SampleGrid<T> {
    pub topology: Topology<T>,
    pub nodes: Vec<HopfTriple<T>>,
    pub neighbors: Vec<Vec<usize>>,
    pub k_directions: usize,
}

impl<T: Scalar> SampleGrid<T> {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// 3D light position for a node of a light-circle grid.
    pub fn light_position(&self, i: usize) -> Option<[T; 3]> {
        match self.topology {
            Topology::LightCircle { radius, height, .. } => {
                let angle = self.nodes[i].psi;
                Some([radius * angle.cos(), radius * angle.sin(), height])
            }
            _ => None,
        }
    }

    /// Undirected edge set of the neighbor graph, as ordered index pairs.
    pub fn edge_set(&self) -> std::collections::BTreeSet<(usize, usize)> {
        let mut edges = std::collections::BTreeSet::new();
        for (i, nbrs) in self.neighbors.iter().enumerate() {
            for &j in nbrs {
                edges.insert((i.min(j), i.max(j)));
            }
        }
        edges
    }
}

fn two_pi_fraction<T: Scalar>(i: usize, n: usize) -> T {
    T::of(2.0) * T::PI() * T::of(i as f64) / T::of(n as f64)
}

/// Circle of `n` evenly spaced spin angles at the fixed tilt
/// `(theta, phi) = (pi/4, 0)`.
pub fn sample_so2<T: Scalar>(n: usize) -> Result<SampleGrid<T>> {
    if n < 3 {
        return Err(Error::InvalidGrid(format!("circle needs n >= 3, got {n}")));
    }
    let quarter = T::PI() / T::of(4.0);
    let nodes = (0..n)
        .map(|i| HopfTriple::new(quarter, T::zero(), two_pi_fraction(i, n)))
        .collect();
    let neighbors = cycle_neighbors(n);
    Ok(SampleGrid {
        topology: Topology::Circle { n },
        nodes,
        neighbors,
        k_directions: 2,
    })
}

fn cycle_neighbors(n: usize) -> Vec<Vec<usize>> {
    (0..n).map(|i| vec![(i + n - 1) % n, (i + 1) % n]).collect()
}

/// Torus grid: `n_phi` evenly spaced tilt directions at `theta = pi/4`, each
/// carrying a circle of `n_psi` spin angles. Nodes are psi-major within each
/// phi ring.
pub fn sample_t2<T: Scalar>(n_phi: usize, n_psi: usize) -> Result<SampleGrid<T>> {
    if n_phi < 3 || n_psi < 3 {
        return Err(Error::InvalidGrid(format!(
            "torus needs both counts >= 3, got ({n_phi}, {n_psi})"
        )));
    }
    let quarter = T::PI() / T::of(4.0);
    let mut nodes = Vec::with_capacity(n_phi * n_psi);
    for a in 0..n_phi {
        for b in 0..n_psi {
            nodes.push(HopfTriple::new(
                quarter,
                two_pi_fraction(a, n_phi),
                two_pi_fraction(b, n_psi),
            ));
        }
    }
    let idx = |a: usize, b: usize| a * n_psi + b;
    let mut neighbors = vec![Vec::with_capacity(4); n_phi * n_psi];
    for a in 0..n_phi {
        for b in 0..n_psi {
            neighbors[idx(a, b)] = vec![
                idx((a + n_phi - 1) % n_phi, b),
                idx((a + 1) % n_phi, b),
                idx(a, (b + n_psi - 1) % n_psi),
                idx(a, (b + 1) % n_psi),
            ];
        }
    }
    Ok(SampleGrid {
        topology: Topology::Torus { n_phi, n_psi },
        nodes,
        neighbors,
        k_directions: 4,
    })
}

/// `n` points spread over the unit sphere along a Fibonacci spiral,
/// returned as `(theta, phi)` pairs.
pub fn fibonacci_sphere<T: Scalar>(n: usize) -> Vec<(T, T)> {
    assert!(n >= 1);
    let golden = (T::one() + T::of(5.0).sqrt()) / T::of(2.0);
    let two_pi = T::of(2.0) * T::PI();
    (0..n)
        .map(|i| {
            let z = T::one() - T::of((2 * i + 1) as f64) / T::of(n as f64);
            let theta = z.min(T::one()).max(-T::one()).acos();
            let phi = (two_pi * T::of(i as f64) * golden) % two_pi;
            (theta, phi)
        })
        .collect()
}

/// Number of nearest sphere points each spin circle is linked to.
const SO3_CROSS_LINKS: usize = 4;

/// SO(3) grid: a spin circle of `n_psi` angles attached to each of
/// `n_sphere` Fibonacci sphere directions. Spin circles are chained
/// internally; across circles each node links to the angularly nearest node
/// on each of its 4 nearest sphere directions. Registration is disabled on
/// this grid (`k_directions = 1`).
pub fn sample_so3<T: Scalar>(n_sphere: usize, n_psi: usize) -> Result<SampleGrid<T>> {
    if n_sphere < 1 || n_psi < 3 {
        return Err(Error::InvalidGrid(format!(
            "so3 grid needs n_sphere >= 1 and n_psi >= 3, got ({n_sphere}, {n_psi})"
        )));
    }
    let sphere = fibonacci_sphere::<T>(n_sphere);
    let mut nodes = Vec::with_capacity(n_sphere * n_psi);
    for &(theta, phi) in &sphere {
        for b in 0..n_psi {
            nodes.push(HopfTriple::new(theta, phi, two_pi_fraction(b, n_psi)));
        }
    }
    let rotations: Vec<RotationMatrix<T>> = nodes.iter().map(hopf_to_rotation).collect();

    let idx = |j: usize, b: usize| j * n_psi + b;
    let mut neighbor_sets: Vec<std::collections::BTreeSet<usize>> =
        vec![std::collections::BTreeSet::new(); n_sphere * n_psi];

    for j in 0..n_sphere {
        for b in 0..n_psi {
            neighbor_sets[idx(j, b)].insert(idx(j, (b + n_psi - 1) % n_psi));
            neighbor_sets[idx(j, b)].insert(idx(j, (b + 1) % n_psi));
        }
    }

    // Nearest sphere directions by geodesic distance (largest dot product).
    let cart: Vec<[T; 3]> = sphere
        .iter()
        .map(|&(t, p)| [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()])
        .collect();
    let links = SO3_CROSS_LINKS.min(n_sphere.saturating_sub(1));
    for j in 0..n_sphere {
        let mut others: Vec<usize> = (0..n_sphere).filter(|&k| k != j).collect();
        others.sort_by(|&a, &b| {
            let da = dot3(&cart[j], &cart[a]);
            let db = dot3(&cart[j], &cart[b]);
            db.partial_cmp(&da).unwrap().then(a.cmp(&b))
        });
        for &jn in others.iter().take(links) {
            for b in 0..n_psi {
                let here = idx(j, b);
                let best = (0..n_psi)
                    .min_by(|&b1, &b2| {
                        let a1 = rotations[here].angle_to(&rotations[idx(jn, b1)]);
                        let a2 = rotations[here].angle_to(&rotations[idx(jn, b2)]);
                        a1.partial_cmp(&a2).unwrap().then(b1.cmp(&b2))
                    })
                    .unwrap();
                neighbor_sets[here].insert(idx(jn, best));
                neighbor_sets[idx(jn, best)].insert(here);
            }
        }
    }

    Ok(SampleGrid {
        topology: Topology::So3Grid { n_sphere, n_psi },
        nodes,
        neighbors: neighbor_sets
            .into_iter()
            .map(|s| s.into_iter().collect())
            .collect(),
        k_directions: 1,
    })
}

fn dot3<T: Scalar>(a: &[T; 3], b: &[T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Circle of `n` point-light positions at constant height.
pub fn sample_lights<T: Scalar>(n: usize, radius: T, height: T) -> Result<SampleGrid<T>> {
    if n < 3 {
        return Err(Error::InvalidGrid(format!(
            "light circle needs n >= 3, got {n}"
        )));
    }
    if radius <= T::zero() {
        return Err(Error::InvalidGrid("light radius must be positive".into()));
    }
    let nodes = (0..n)
        .map(|i| HopfTriple::new(T::zero(), T::zero(), two_pi_fraction(i, n)))
        .collect();
    Ok(SampleGrid {
        topology: Topology::LightCircle { n, radius, height },
        nodes,
        neighbors: cycle_neighbors(n),
        k_directions: 2,
    })
}

/// A rigid, adjacency-preserving re-indexing of a grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Registration {
    Identity {
        n: usize,
    },
    Circle {
        n: usize,
        shift: usize,
        reversed: bool,
    },
    Torus {
        n_phi: usize,
        n_psi: usize,
        shift_phi: usize,
        shift_psi: usize,
        flip_phi: bool,
        flip_psi: bool,
    },
}

impl Registration {
    pub fn len(&self) -> usize {
        match *self {
            Registration::Identity { n } => n,
            Registration::Circle { n, .. } => n,
            Registration::Torus { n_phi, n_psi, .. } => n_phi * n_psi,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The permuted source index `sigma(i)`.
    pub fn map_index(&self, i: usize) -> usize {
        match *self {
            Registration::Identity { .. } => i,
            Registration::Circle { n, shift, reversed } => {
                if reversed {
                    (shift + n - i % n) % n
                } else {
                    (i + shift) % n
                }
            }
            Registration::Torus {
                n_phi,
                n_psi,
                shift_phi,
                shift_psi,
                flip_phi,
                flip_psi,
            } => {
                let a = i / n_psi;
                let b = i % n_psi;
                let a2 = if flip_phi {
                    (shift_phi + n_phi - a) % n_phi
                } else {
                    (a + shift_phi) % n_phi
                };
                let b2 = if flip_psi {
                    (shift_psi + n_psi - b) % n_psi
                } else {
                    (b + shift_psi) % n_psi
                };
                a2 * n_psi + b2
            }
        }
    }

    pub fn direction_class(&self) -> usize {
        match *self {
            Registration::Identity { .. } => 0,
            Registration::Circle { reversed, .. } => reversed as usize,
            Registration::Torus {
                flip_phi, flip_psi, ..
            } => (flip_phi as usize) * 2 + flip_psi as usize,
        }
    }

    pub fn permutation(&self) -> Vec<usize> {
        (0..self.len()).map(|i| self.map_index(i)).collect()
    }
}

/// Every permissible rigid registration of the grid: `k_directions * n`
/// entries for circle, torus, and light-circle grids.
///
/// SO(3) grids rely on the objects' default-pose pre-registration and only
/// admit the identity; asking for their family is an error.
pub fn registration_family<T: Scalar>(grid: &SampleGrid<T>) -> Result<Vec<Registration>> {
    match grid.topology {
        Topology::Circle { n } | Topology::LightCircle { n, .. } => {
            let mut family = Vec::with_capacity(2 * n);
            for reversed in [false, true] {
                for shift in 0..n {
                    family.push(Registration::Circle { n, shift, reversed });
                }
            }
            Ok(family)
        }
        Topology::Torus { n_phi, n_psi } => {
            let mut family = Vec::with_capacity(4 * n_phi * n_psi);
            for flip_phi in [false, true] {
                for flip_psi in [false, true] {
                    for shift_phi in 0..n_phi {
                        for shift_psi in 0..n_psi {
                            family.push(Registration::Torus {
                                n_phi,
                                n_psi,
                                shift_phi,
                                shift_psi,
                                flip_phi,
                                flip_psi,
                            });
                        }
                    }
                }
            }
            Ok(family)
        }
        Topology::So3Grid { .. } => Err(Error::UnsupportedRegistration),
    }
}

/// Identity-only fallback family, valid on any grid.
pub fn identity_family<T: Scalar>(grid: &SampleGrid<T>) -> Vec<Registration> {
    vec![Registration::Identity { n: grid.len() }]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Rodrigues rotation about a unit axis, as an independent oracle.
    fn rodrigues(axis: [f64; 3], angle: f64) -> RotationMatrix<f64> {
        let (x, y, z) = (axis[0], axis[1], axis[2]);
        let c = angle.cos();
        let s = angle.sin();
        let t = 1.0 - c;
        RotationMatrix([
            [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
            [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
            [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
        ])
    }

    fn max_entry_diff(a: &RotationMatrix<f64>, b: &RotationMatrix<f64>) -> f64 {
        let mut d = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                d = d.max((a.0[i][j] - b.0[i][j]).abs());
            }
        }
        d
    }

    #[test]
    fn hopf_zero_is_identity() {
        let r = hopf_to_rotation(&HopfTriple::new(0.0, 0.0, 0.0));
        assert!(max_entry_diff(&r, &RotationMatrix::identity()) < 1e-15);
    }

    #[test]
    fn hopf_pure_spin_is_rz() {
        let r = hopf_to_rotation(&HopfTriple::new(0.0, 0.0, PI / 2.0));
        let ex = r.apply([1.0, 0.0, 0.0]);
        assert!((ex[0]).abs() < 1e-15 && (ex[1] - 1.0).abs() < 1e-15 && ex[2].abs() < 1e-15);
    }

    #[test]
    fn hopf_north_pole_image_matches_tilt_direction() {
        for &psi in &[0.0, 0.7, 2.1, 5.6] {
            let r = hopf_to_rotation(&HopfTriple::new(PI / 2.0, 0.0, psi));
            let north = r.apply([0.0, 0.0, 1.0]);
            assert!((north[0] - 1.0).abs() < 1e-12);
            assert!(north[1].abs() < 1e-12 && north[2].abs() < 1e-12);
        }
    }

    #[test]
    fn hopf_matches_rodrigues_oracle() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let theta = rng.gen_range(0.0..PI);
            let phi = rng.gen_range(0.0..2.0 * PI);
            let psi = rng.gen_range(0.0..2.0 * PI);
            let got = hopf_to_rotation(&HopfTriple::new(theta, phi, psi));
            // Oracle: tilt about the in-plane axis composed with spin about z.
            let tilt = rodrigues([-phi.sin(), phi.cos(), 0.0], theta);
            let spin = rodrigues([0.0, 0.0, 1.0], psi);
            let expected = tilt.compose(&spin);
            assert!(max_entry_diff(&got, &expected) < 1e-12);
            assert!(got.orthonormality_error() < 1e-12);
            assert!((got.det() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn so2_grid_matches_paper_setup() {
        let g = sample_so2::<f64>(500).unwrap();
        assert_eq!(g.len(), 500);
        assert!(g
            .nodes
            .iter()
            .all(|h| (h.theta - PI / 4.0).abs() < 1e-15 && h.phi == 0.0));
        assert_eq!(g.k_directions, 2);
    }

    #[test]
    fn so2_even_spacing_and_single_cycle() {
        let g = sample_so2::<f64>(4).unwrap();
        let psis: Vec<f64> = g.nodes.iter().map(|h| h.psi).collect();
        for (i, &p) in psis.iter().enumerate() {
            assert!((p - PI / 2.0 * i as f64).abs() < 1e-15);
        }
        // walk the cycle
        for n in [3usize, 4, 17, 500] {
            let g = sample_so2::<f64>(n).unwrap();
            let mut seen = vec![false; n];
            let mut prev = 0usize;
            let mut cur = g.neighbors[0][1];
            seen[0] = true;
            let mut steps = 1;
            while cur != 0 {
                seen[cur] = true;
                let next = *g.neighbors[cur].iter().find(|&&x| x != prev).unwrap();
                prev = cur;
                cur = next;
                steps += 1;
                assert!(steps <= n);
            }
            assert_eq!(steps, n);
            assert!(seen.iter().all(|&s| s));
        }
    }

    #[test]
    fn so2_rejects_small_n() {
        assert!(matches!(sample_so2::<f64>(2), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn t2_grid_counts_and_degree() {
        let g = sample_t2::<f64>(40, 50).unwrap();
        assert_eq!(g.len(), 2000);
        let small = sample_t2::<f64>(3, 3).unwrap();
        assert_eq!(small.len(), 9);
        assert!(small.neighbors.iter().all(|nb| nb.len() == 4));
        assert!(matches!(sample_t2::<f64>(2, 9), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn t2_phi_zero_ring_is_the_so2_circle() {
        let torus = sample_t2::<f64>(40, 50).unwrap();
        let circle = sample_so2::<f64>(50).unwrap();
        for b in 0..50 {
            assert_eq!(torus.nodes[b], circle.nodes[b]);
        }
    }

    #[test]
    fn fibonacci_counts_and_unit_norm() {
        assert_eq!(fibonacci_sphere::<f64>(267).len(), 267);
        let single = fibonacci_sphere::<f64>(1);
        assert!((single[0].0 - PI / 2.0).abs() < 1e-12);
        for &(t, p) in &fibonacci_sphere::<f64>(533) {
            let v = [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()];
            let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn fibonacci_nearest_neighbor_ratio_is_balanced() {
        // brute-force all-pairs nearest neighbor geodesic distances
        let pts = fibonacci_sphere::<f64>(500);
        let cart: Vec<[f64; 3]> = pts
            .iter()
            .map(|&(t, p)| [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()])
            .collect();
        let mut nn = vec![f64::INFINITY; 500];
        for i in 0..500 {
            for j in 0..500 {
                if i == j {
                    continue;
                }
                let dot = cart[i][0] * cart[j][0] + cart[i][1] * cart[j][1] + cart[i][2] * cart[j][2];
                let d = dot.clamp(-1.0, 1.0).acos();
                nn[i] = nn[i].min(d);
            }
        }
        let max = nn.iter().cloned().fold(0.0f64, f64::max);
        let min = nn.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(max / min < 2.5, "ratio {}", max / min);
    }

    #[test]
    fn so3_grid_counts_and_symmetry() {
        let g = sample_so3::<f64>(267, 30).unwrap();
        assert_eq!(g.len(), 8010);
        for (i, nbrs) in g.neighbors.iter().enumerate() {
            for &j in nbrs {
                assert!(g.neighbors[j].contains(&i), "asymmetric edge {i}-{j}");
            }
        }
        assert_eq!(g.k_directions, 1);
    }

    #[test]
    fn so3_single_sphere_point_degenerates_to_circle() {
        let g = sample_so3::<f64>(1, 30).unwrap();
        assert_eq!(g.len(), 30);
        assert!(g.neighbors.iter().all(|nb| nb.len() == 2));
    }

    #[test]
    fn lights_positions() {
        let g = sample_lights::<f64>(4, 1.0, 0.0).unwrap();
        let expect = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]];
        for (i, e) in expect.iter().enumerate() {
            let p = g.light_position(i).unwrap();
            assert!((p[0] - e[0]).abs() < 1e-12 && (p[1] - e[1]).abs() < 1e-12);
            assert_eq!(p[2], 0.0);
        }
        let g = sample_lights::<f64>(500, 2.0, 1.5).unwrap();
        assert_eq!(g.len(), 500);
        assert!((0..500).all(|i| g.light_position(i).unwrap()[2] == 1.5));
        assert!(matches!(
            sample_lights::<f64>(2, 1.0, 0.0),
            Err(Error::InvalidGrid(_))
        ));
    }

    #[test]
    fn circle_family_size_and_example_shift() {
        let g = sample_so2::<f64>(500).unwrap();
        assert_eq!(registration_family(&g).unwrap().len(), 1000);

        let g4 = sample_so2::<f64>(4).unwrap();
        let family = registration_family(&g4).unwrap();
        let reg = family
            .iter()
            .find(|r| matches!(r, Registration::Circle { shift: 1, reversed: false, .. }))
            .unwrap();
        assert_eq!(reg.permutation(), vec![1, 2, 3, 0]);
    }

    /// Edge-set comparison oracle: a registration must map the neighbor
    /// graph's edge set onto itself exactly.
    fn assert_family_preserves_adjacency(grid: &SampleGrid<f64>) {
        let edges = grid.edge_set();
        for reg in registration_family(grid).unwrap() {
            let mapped: std::collections::BTreeSet<(usize, usize)> = edges
                .iter()
                .map(|&(a, b)| {
                    let (x, y) = (reg.map_index(a), reg.map_index(b));
                    (x.min(y), x.max(y))
                })
                .collect();
            assert_eq!(mapped, edges, "registration {reg:?} broke adjacency");
            // and sigma must be a bijection
            let mut seen = vec![false; grid.len()];
            for i in 0..grid.len() {
                let s = reg.map_index(i);
                assert!(!seen[s]);
                seen[s] = true;
            }
        }
    }

    #[test]
    fn circle_registrations_preserve_adjacency() {
        assert_family_preserves_adjacency(&sample_so2::<f64>(12).unwrap());
    }

    #[test]
    fn torus_registrations_preserve_adjacency() {
        let g = sample_t2::<f64>(5, 7).unwrap();
        let family = registration_family(&g).unwrap();
        assert_eq!(family.len(), 4 * 35);
        assert_family_preserves_adjacency(&g);
    }

    #[test]
    fn so3_registration_unsupported() {
        let g = sample_so3::<f64>(10, 5).unwrap();
        assert!(matches!(
            registration_family(&g),
            Err(Error::UnsupportedRegistration)
        ));
        assert_eq!(identity_family(&g).len(), 1);
    }
}
