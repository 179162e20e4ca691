//! Distance matrices and the embedding algorithms: SMACOF multidimensional
//! scaling plus Isomap, Laplacian Eigenmaps, and LLE baselines, and the
//! stress-vs-dimension scan.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{jacobi_eigh, solve, Mat};
use crate::sampling::SampleGrid;
use crate::Scalar;

/// Symmetric nonnegative distance matrix with zero diagonal.
#[derive(Clone, Debug)]
pub struct DistanceMatrix<T> {
    entries: Mat<T>,
}

impl<T: Scalar> DistanceMatrix<T> {
    /// Validates symmetry (1e-9), nonnegativity, and a zero diagonal.
    pub fn new(entries: Mat<T>) -> Result<Self> {
        let n = entries.rows();
        if entries.cols() != n {
            return Err(Error::ShapeMismatch(format!(
                "distance matrix must be square, got {}x{}",
                n,
                entries.cols()
            )));
        }
        let tol = T::of(1e-9);
        for i in 0..n {
            if entries[(i, i)] != T::zero() {
                return Err(Error::ShapeMismatch(format!("nonzero diagonal at {i}")));
            }
            for j in (i + 1)..n {
                if entries[(i, j)] < T::zero() || entries[(j, i)] < T::zero() {
                    return Err(Error::ShapeMismatch(format!("negative entry at ({i},{j})")));
                }
                if (entries[(i, j)] - entries[(j, i)]).abs() > tol {
                    return Err(Error::ShapeMismatch(format!(
                        "asymmetry beyond tolerance at ({i},{j})"
                    )));
                }
            }
        }
        Ok(DistanceMatrix { entries })
    }

    /// Wrap entries without the symmetry check. Used where small asymmetry
    /// is expected and documented (shape-distance matrices).
    pub fn from_entries_unchecked(entries: Mat<T>) -> Self {
        assert_eq!(entries.rows(), entries.cols());
        DistanceMatrix { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries[(i, j)]
    }

    pub fn entries(&self) -> &Mat<T> {
        &self.entries
    }

    pub fn is_all_zero(&self) -> bool {
        self.entries.data().iter().all(|&x| x == T::zero())
    }

    /// Re-index rows and columns by `perm` (entry `(i,j)` of the result is
    /// the distance between original points `perm[i]` and `perm[j]`).
    pub fn permuted(&self, perm: &[usize]) -> DistanceMatrix<T> {
        let n = self.len();
        assert_eq!(perm.len(), n);
        let mut out = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = self.entries[(perm[i], perm[j])];
            }
        }
        DistanceMatrix { entries: out }
    }
}

/// n ordered latent points tied to the sample grid they came from.
#[derive(Clone, Debug)]
pub struct LatentManifold<T> {
    pub points: Mat<T>,
    /// Final normalized stress against the distances that produced this
    /// embedding.
    pub stress: T,
    /// Normalized stress after each SMACOF iteration (empty for spectral
    /// methods).
    pub stress_history: Vec<T>,
    pub grid: Option<SampleGrid<T>>,
    pub provenance: String,
}

impl<T: Scalar> LatentManifold<T> {
    pub fn from_points(points: Mat<T>) -> Self {
        LatentManifold {
            points,
            stress: T::zero(),
            stress_history: Vec::new(),
            grid: None,
            provenance: String::new(),
        }
    }

    pub fn with_grid(mut self, grid: SampleGrid<T>) -> Self {
        assert_eq!(grid.len(), self.points.rows(), "grid/point count mismatch");
        self.grid = Some(grid);
        self
    }

    pub fn with_provenance(mut self, p: impl Into<String>) -> Self {
        self.provenance = p.into();
        self
    }

    pub fn len(&self) -> usize {
        self.points.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.cols()
    }
}

fn row_dist<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum::<T>()
        .sqrt()
}

/// Euclidean distances between the rows of `vectors`; each pair is computed
/// exactly once so the result is exactly symmetric.
pub fn pairwise_distances<T: Scalar>(vectors: &Mat<T>) -> Result<DistanceMatrix<T>> {
    let n = vectors.rows();
    if n < 2 {
        return Err(Error::ShapeMismatch(format!(
            "need at least 2 vectors, got {n}"
        )));
    }
    let upper: Vec<Vec<T>> = (0..n)
        .into_par_iter()
        .map(|i| {
            ((i + 1)..n)
                .map(|j| row_dist(vectors.row(i), vectors.row(j)))
                .collect()
        })
        .collect();
    let mut entries = Mat::zeros(n, n);
    for (i, row) in upper.iter().enumerate() {
        for (off, &d) in row.iter().enumerate() {
            let j = i + 1 + off;
            entries[(i, j)] = d;
            entries[(j, i)] = d;
        }
    }
    Ok(DistanceMatrix { entries })
}

/// Stack equal-length vectors into a matrix; mismatched lengths error.
pub fn vectors_to_mat<T: Scalar>(vectors: &[Vec<T>]) -> Result<Mat<T>> {
    if vectors.is_empty() {
        return Err(Error::ShapeMismatch("no vectors".into()));
    }
    let len = vectors[0].len();
    if let Some(bad) = vectors.iter().position(|v| v.len() != len) {
        return Err(Error::ShapeMismatch(format!(
            "vector {bad} has length {} but expected {len}",
            vectors[bad].len()
        )));
    }
    Ok(Mat::from_rows(vectors))
}

/// Root ratio of the squared distance-reproduction error to the total
/// squared distance: `[sum_{i<j} (d_ij - |z_i - z_j|)^2 / sum_{i<j} d_ij^2]^(1/2)`.
pub fn normalized_stress<T: Scalar>(d: &DistanceMatrix<T>, z: &Mat<T>) -> Result<T> {
    let n = d.len();
    if z.rows() != n {
        return Err(Error::ShapeMismatch(format!(
            "distance matrix has {n} points but embedding has {}",
            z.rows()
        )));
    }
    if d.is_all_zero() {
        return Err(Error::UndefinedStress);
    }
    let mut num = T::zero();
    let mut den = T::zero();
    for i in 0..n {
        for j in (i + 1)..n {
            let dij = d.get(i, j);
            let rho = row_dist(z.row(i), z.row(j));
            num += (dij - rho) * (dij - rho);
            den += dij * dij;
        }
    }
    Ok((num / den).sqrt())
}

/// SMACOF multidimensional scaling: iterated Guttman transforms from a
/// seeded Gaussian initialization. The stress sequence is non-increasing;
/// iteration stops when the relative stress decrease drops below `tol`.
/// The output is centered at the origin.
pub fn mds_smacof<T: Scalar>(
    d: &DistanceMatrix<T>,
    dim: usize,
    seed: u64,
    tol: T,
    max_iter: usize,
) -> Result<LatentManifold<T>> {
    if dim < 1 {
        return Err(Error::InvalidArgument("dimension must be >= 1".into()));
    }
    if tol <= T::zero() {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    if d.is_all_zero() {
        return Err(Error::UndefinedStress);
    }
    let n = d.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut z = Mat::zeros(n, dim);
    for i in 0..n {
        for v in z.row_mut(i) {
            *v = T::of(rng.sample::<f64, _>(StandardNormal));
        }
    }

    let mut den = T::zero();
    for i in 0..n {
        for j in (i + 1)..n {
            den += d.get(i, j) * d.get(i, j);
        }
    }

    let mut history = Vec::new();
    let mut prev_stress = T::infinity();
    for _iter in 0..max_iter {
        // Each target row is accumulated by exactly one task, so the result
        // is independent of the thread count.
        let (new_rows, row_errs): (Vec<Vec<T>>, Vec<T>) = (0..n)
            .into_par_iter()
            .map(|i| {
                let zi = z.row(i);
                let mut acc = vec![T::zero(); dim];
                let mut err = T::zero();
                for j in 0..n {
                    if j == i {
                        continue;
                    }
                    let zj = z.row(j);
                    let rho = row_dist(zi, zj);
                    let dij = d.get(i, j);
                    err += (dij - rho) * (dij - rho);
                    if rho > T::zero() {
                        let w = dij / rho;
                        for k in 0..dim {
                            acc[k] += w * (zi[k] - zj[k]);
                        }
                    }
                }
                for k in 0..dim {
                    acc[k] /= T::of(n as f64);
                }
                (acc, err)
            })
            .unzip();

        // each pair was visited twice in the row sums
        let num: T = row_errs.iter().copied().sum::<T>() / T::of(2.0);
        let stress = (num / den).sqrt();
        history.push(stress);

        z = Mat::from_rows(&new_rows);

        if prev_stress.is_finite() {
            let decrease = (prev_stress - stress) / prev_stress.max(T::min_positive_value());
            if decrease < tol {
                break;
            }
        }
        prev_stress = stress;
    }

    // center
    let means = z.col_means();
    for i in 0..n {
        for (v, &m) in z.row_mut(i).iter_mut().zip(&means) {
            *v -= m;
        }
    }
    let final_stress = normalized_stress(d, &z)?;

    Ok(LatentManifold {
        points: z,
        stress: final_stress,
        stress_history: history,
        grid: None,
        provenance: format!("mds(dim={dim},seed={seed})"),
    })
}

/// One SMACOF run per requested dimension under a shared seed; reports the
/// final normalized stress of each.
pub fn stress_scan<T: Scalar>(
    d: &DistanceMatrix<T>,
    dims: &[usize],
    seed: u64,
    tol: T,
    max_iter: usize,
) -> Result<Vec<(usize, T)>> {
    if dims.is_empty() {
        return Err(Error::InvalidArgument("no dimensions requested".into()));
    }
    dims.iter()
        .map(|&dim| Ok((dim, mds_smacof(d, dim, seed, tol, max_iter)?.stress)))
        .collect()
}

/// Indices of the k nearest neighbors of each point (self excluded),
/// deterministic tie-break by lower index.
pub fn knn_indices<T: Scalar>(d: &DistanceMatrix<T>, k: usize) -> Vec<Vec<usize>> {
    let n = d.len();
    (0..n)
        .map(|i| {
            let mut order: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            order.sort_by(|&a, &b| {
                d.get(i, a)
                    .partial_cmp(&d.get(i, b))
                    .unwrap()
                    .then(a.cmp(&b))
            });
            order.truncate(k);
            order
        })
        .collect()
}

/// Symmetrized (union) kNN adjacency lists.
fn knn_graph<T: Scalar>(d: &DistanceMatrix<T>, k: usize) -> Vec<Vec<usize>> {
    let n = d.len();
    let knn = knn_indices(d, k);
    let mut sets = vec![std::collections::BTreeSet::new(); n];
    for (i, nbrs) in knn.iter().enumerate() {
        for &j in nbrs {
            sets[i].insert(j);
            sets[j].insert(i);
        }
    }
    sets.into_iter().map(|s| s.into_iter().collect()).collect()
}

fn component_count(adj: &[Vec<usize>]) -> usize {
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut components = 0;
    for start in 0..n {
        if seen[start] {
            continue;
        }
        components += 1;
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
    }
    components
}

fn require_connected(adj: &[Vec<usize>]) -> Result<()> {
    let components = component_count(adj);
    if components != 1 {
        return Err(Error::Disconnected { components });
    }
    Ok(())
}

/// All-pairs shortest paths on the symmetrized kNN graph with Euclidean edge
/// weights (per-source Dijkstra).
pub fn geodesic_distances<T: Scalar>(d: &DistanceMatrix<T>, k: usize) -> Result<DistanceMatrix<T>> {
    if k < 1 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    let n = d.len();
    let adj = knn_graph(d, k);
    require_connected(&adj)?;

    let rows: Vec<Vec<T>> = (0..n)
        .into_par_iter()
        .map(|src| dijkstra(d, &adj, src))
        .collect();
    let mut entries = Mat::zeros(n, n);
    // Mirror the upper triangle so the matrix is exactly symmetric.
    for i in 0..n {
        for j in (i + 1)..n {
            let v = rows[i][j];
            entries[(i, j)] = v;
            entries[(j, i)] = v;
        }
    }
    DistanceMatrix::new(entries)
}

fn dijkstra<T: Scalar>(d: &DistanceMatrix<T>, adj: &[Vec<usize>], src: usize) -> Vec<T> {
    use std::cmp::Ordering;
    use std::collections::BinaryHeap;

    #[derive(PartialEq)]
    struct Entry<T>(T, usize);
    impl<T: PartialOrd> Eq for Entry<T> {}
    impl<T: PartialOrd> Ord for Entry<T> {
        fn cmp(&self, other: &Self) -> Ordering {
            // min-heap on distance, tie-break on index
            other
                .0
                .partial_cmp(&self.0)
                .unwrap()
                .then(other.1.cmp(&self.1))
        }
    }
    impl<T: PartialOrd> PartialOrd for Entry<T> {
        fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
            Some(self.cmp(other))
        }
    }

    let n = adj.len();
    let mut dist = vec![T::infinity(); n];
    dist[src] = T::zero();
    let mut heap = BinaryHeap::new();
    heap.push(Entry(T::zero(), src));
    while let Some(Entry(cost, v)) = heap.pop() {
        if cost > dist[v] {
            continue;
        }
        for &w in &adj[v] {
            let next = cost + d.get(v, w);
            if next < dist[w] {
                dist[w] = next;
                heap.push(Entry(next, w));
            }
        }
    }
    dist
}

/// Isomap on a precomputed chordal distance matrix: SMACOF applied to the
/// kNN-graph geodesics.
pub fn isomap_from_distances<T: Scalar>(
    d: &DistanceMatrix<T>,
    k: usize,
    dim: usize,
    seed: u64,
) -> Result<LatentManifold<T>> {
    if k < 2 {
        return Err(Error::InvalidArgument("isomap needs k >= 2".into()));
    }
    let geo = geodesic_distances(d, k)?;
    let mut m = mds_smacof(&geo, dim, seed, T::of(1e-7), 500)?;
    m.provenance = format!("isomap(k={k},dim={dim},seed={seed})");
    Ok(m)
}

pub fn isomap<T: Scalar>(
    vectors: &Mat<T>,
    k: usize,
    dim: usize,
    seed: u64,
) -> Result<LatentManifold<T>> {
    isomap_from_distances(&pairwise_distances(vectors)?, k, dim, seed)
}

/// Laplacian Eigenmaps on a precomputed distance matrix: eigenvectors
/// 2..d+1 of the symmetric normalized Laplacian of the binary kNN graph.
pub fn laplacian_eigenmaps_from_distances<T: Scalar>(
    d: &DistanceMatrix<T>,
    k: usize,
    dim: usize,
) -> Result<LatentManifold<T>> {
    if k < 2 {
        return Err(Error::InvalidArgument(
            "laplacian eigenmaps needs k >= 2".into(),
        ));
    }
    let n = d.len();
    if dim + 1 > n {
        return Err(Error::Dimension(format!(
            "cannot extract {dim} eigenvectors from {n} points"
        )));
    }
    let adj = knn_graph(d, k);
    require_connected(&adj)?;

    let mut lap = Mat::zeros(n, n);
    let inv_sqrt_deg: Vec<T> = adj
        .iter()
        .map(|nb| T::one() / T::of(nb.len() as f64).sqrt())
        .collect();
    for i in 0..n {
        lap[(i, i)] = T::one();
        for &j in &adj[i] {
            lap[(i, j)] = -inv_sqrt_deg[i] * inv_sqrt_deg[j];
        }
    }
    let (_vals, vecs) = jacobi_eigh(&lap);

    let mut points = Mat::zeros(n, dim);
    for i in 0..n {
        for c in 0..dim {
            points[(i, c)] = vecs[(i, c + 1)]; // skip the constant eigenvector
        }
    }
    let stress = normalized_stress(d, &points)?;
    Ok(LatentManifold {
        points,
        stress,
        stress_history: Vec::new(),
        grid: None,
        provenance: format!("le(k={k},dim={dim})"),
    })
}

pub fn laplacian_eigenmaps<T: Scalar>(
    vectors: &Mat<T>,
    k: usize,
    dim: usize,
) -> Result<LatentManifold<T>> {
    laplacian_eigenmaps_from_distances(&pairwise_distances(vectors)?, k, dim)
}

/// Ridge factor for the local Gram matrices: `1e-3 * trace`.
const LLE_RIDGE: f64 = 1e-3;

/// Locally linear embedding from a precomputed distance matrix. Local Gram
/// matrices are recovered from distances via the polarization identity,
/// which is exact for Euclidean input.
pub fn lle_from_distances<T: Scalar>(
    d: &DistanceMatrix<T>,
    k: usize,
    dim: usize,
) -> Result<LatentManifold<T>> {
    if k < dim + 1 {
        return Err(Error::InvalidArgument(format!(
            "lle needs k >= dim + 1, got k={k}, dim={dim}"
        )));
    }
    let n = d.len();
    if dim + 1 > n {
        return Err(Error::Dimension(format!(
            "cannot extract {dim} eigenvectors from {n} points"
        )));
    }
    let knn = knn_indices(d, k);
    require_connected(&knn_graph(d, k))?;

    // reconstruction weights
    let half = T::of(0.5);
    let weight_rows: Vec<Vec<T>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let nbrs = &knn[i];
            let kk = nbrs.len();
            let mut c = Mat::zeros(kk, kk);
            for a in 0..kk {
                for b in 0..kk {
                    let dia = d.get(i, nbrs[a]);
                    let dib = d.get(i, nbrs[b]);
                    let dab = d.get(nbrs[a], nbrs[b]);
                    c[(a, b)] = half * (dia * dia + dib * dib - dab * dab);
                }
            }
            let mut trace = T::zero();
            for a in 0..kk {
                trace += c[(a, a)];
            }
            let ridge = if trace > T::zero() {
                T::of(LLE_RIDGE) * trace
            } else {
                T::of(LLE_RIDGE)
            };
            for a in 0..kk {
                c[(a, a)] += ridge;
            }
            let ones = vec![T::one(); kk];
            let w = solve(&c, &ones).expect("ridge keeps the Gram matrix invertible");
            let total: T = w.iter().copied().sum();
            w.into_iter().map(|x| x / total).collect()
        })
        .collect();

    // M = (I - W)^T (I - W), built densely
    let mut iw: Mat<T> = Mat::identity(n);
    for i in 0..n {
        for (a, &j) in knn[i].iter().enumerate() {
            iw[(i, j)] -= weight_rows[i][a];
        }
    }
    let m = iw.transpose().matmul(&iw);
    // enforce exact symmetry before the eigensolve
    let mut sym = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            sym[(i, j)] = (m[(i, j)] + m[(j, i)]) * half;
        }
    }
    let (_vals, vecs) = jacobi_eigh(&sym);

    let mut points = Mat::zeros(n, dim);
    for i in 0..n {
        for c in 0..dim {
            points[(i, c)] = vecs[(i, c + 1)]; // drop the near-constant bottom eigenvector
        }
    }
    let stress = normalized_stress(d, &points)?;
    Ok(LatentManifold {
        points,
        stress,
        stress_history: Vec::new(),
        grid: None,
        provenance: format!("lle(k={k},dim={dim})"),
    })
}

pub fn lle<T: Scalar>(vectors: &Mat<T>, k: usize, dim: usize) -> Result<LatentManifold<T>> {
    lle_from_distances(&pairwise_distances(vectors)?, k, dim)
}
