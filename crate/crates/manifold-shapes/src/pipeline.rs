//! Experiment orchestration: configuration, PCA visualization projections,
//! neighbor smoothing, joint multi-object embedding, the seed/permutation
//! invariance study, and all artifact emission.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::embed::{
    isomap_from_distances, laplacian_eigenmaps_from_distances, lle_from_distances, mds_smacof,
    pairwise_distances, DistanceMatrix, LatentManifold,
};
use crate::error::{Error, Result};
use crate::io;
use crate::linalg::{jacobi_eigh, Mat};
use crate::render::{
    make_prism, render_illumination_set, render_pose_set, CameraConfig, GrayImage, LightConfig,
    TriMesh,
};
use crate::sampling::{sample_lights, sample_so2, sample_so3, sample_t2, SampleGrid, Topology};
use crate::shape::{proximity_embed_2d, shape_distance, shape_distance_matrix, cluster};
use crate::simdata::{add_noise, double_saddle, lift_and_rotate, loop_of_double_saddles};
use crate::Scalar;

// ---------------------------------------------------------------------------
// configuration

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    So2,
    T2,
    So3,
    Illumination,
    Simulation,
    Invariance,
    Joint,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ObjectSpec {
    Prism { sides: usize },
    Mesh { path: PathBuf },
}

impl ObjectSpec {
    pub fn name(&self) -> String {
        match self {
            ObjectSpec::Prism { sides } => format!("prism{sides}"),
            ObjectSpec::Mesh { path } => path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "mesh".into()),
        }
    }
}

fn default_grid_n() -> usize {
    500
}
fn default_n_phi() -> usize {
    40
}
fn default_n_psi() -> usize {
    50
}
fn default_n_sphere() -> usize {
    267
}
fn default_so3_psi() -> usize {
    30
}
fn default_light_radius() -> f64 {
    4.0
}
fn default_light_height() -> f64 {
    2.0
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(default)]
pub struct GridParams {
    pub n: usize,
    pub n_phi: usize,
    pub n_psi: usize,
    pub n_sphere: usize,
    pub so3_psi: usize,
    pub light_radius: f64,
    pub light_height: f64,
}

impl Default for GridParams {
    fn default() -> Self {
        GridParams {
            n: default_grid_n(),
            n_phi: default_n_phi(),
            n_psi: default_n_psi(),
            n_sphere: default_n_sphere(),
            so3_psi: default_so3_psi(),
            light_radius: default_light_radius(),
            light_height: default_light_height(),
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(default)]
pub struct RenderParams {
    pub image_size: usize,
    pub focal_length: f64,
    /// Camera distance as a multiple of the mesh bounding radius.
    pub distance_factor: f64,
    pub ambient: f64,
    pub diffuse: f64,
}

impl Default for RenderParams {
    fn default() -> Self {
        RenderParams {
            image_size: 64,
            focal_length: 1.0,
            distance_factor: 4.0,
            ambient: 0.25,
            diffuse: 0.65,
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(default)]
pub struct EmbedParams {
    pub method: String,
    pub dim: usize,
    pub seed: u64,
    pub knn: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for EmbedParams {
    fn default() -> Self {
        EmbedParams {
            method: "mds".into(),
            dim: 8,
            seed: 0,
            knn: 10,
            tol: 1e-7,
            max_iter: 500,
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(default)]
pub struct SmoothParams {
    /// `None` picks the per-topology default (10 steps on one-dimensional
    /// grids, 5 on two-dimensional ones).
    pub steps: Option<usize>,
    pub self_weight: f64,
}

impl Default for SmoothParams {
    fn default() -> Self {
        SmoothParams {
            steps: None,
            self_weight: 0.5,
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(default)]
pub struct SimulationParams {
    /// "double_saddle" or "loop"
    pub manifold: String,
    pub lift_dim: usize,
    pub lift_seed: u64,
    pub noise_sigma: f64,
    pub noise_seed: u64,
}

impl Default for SimulationParams {
    fn default() -> Self {
        SimulationParams {
            manifold: "double_saddle".into(),
            lift_dim: 768,
            lift_seed: 0,
            noise_sigma: 0.0,
            noise_seed: 0,
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(default)]
pub struct InvarianceParams {
    pub n_seeds: usize,
    pub n_perms: usize,
}

impl Default for InvarianceParams {
    fn default() -> Self {
        InvarianceParams {
            n_seeds: 5,
            n_perms: 4,
        }
    }
}

/// Full description of one experiment run. Every random choice is driven by
/// an explicit seed in here, so a config determines its artifacts.
#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub objects: Vec<ObjectSpec>,
    #[serde(default)]
    pub grid: GridParams,
    #[serde(default)]
    pub render: RenderParams,
    #[serde(default)]
    pub embedding: EmbedParams,
    #[serde(default)]
    pub smoothing: Option<SmoothParams>,
    #[serde(default)]
    pub simulation: SimulationParams,
    #[serde(default)]
    pub invariance: InvarianceParams,
    #[serde(default)]
    pub cluster_count: Option<usize>,
    /// The full-SO(3) grid (8010 nodes) takes minutes to hours; it must be
    /// requested explicitly.
    #[serde(default)]
    pub allow_long: bool,
    pub out_dir: PathBuf,
}

// ---------------------------------------------------------------------------
// PCA projection

/// Top-3 principal-axis coordinates of one point set, under a basis shared
/// by every set passed to the same `pca_project` call.
#[derive(Clone, Debug)]
pub struct PcaProjection<T> {
    pub coords: Mat<T>,
    pub variance_fractions: [T; 3],
    /// Set when the joint covariance had rank below 3 and zero axes were
    /// padded in.
    pub rank_deficient: bool,
}

/// Project one or more point sets onto the top 3 principal axes of their
/// union. All sets share the joint mean and basis, so cross-set geometry is
/// comparable.
pub fn pca_project<T: Scalar>(sets: &[Mat<T>]) -> Result<Vec<PcaProjection<T>>> {
    if sets.is_empty() {
        return Err(Error::InvalidArgument("no point sets".into()));
    }
    let d = sets[0].cols();
    if sets.iter().any(|s| s.cols() != d) {
        return Err(Error::ShapeMismatch(
            "point sets have different dimensions".into(),
        ));
    }
    let total: usize = sets.iter().map(|s| s.rows()).sum();
    if total <= 3 {
        return Err(Error::InvalidArgument(format!(
            "need more than 3 points total, got {total}"
        )));
    }

    // joint mean
    let mut mean = vec![T::zero(); d];
    for s in sets {
        for i in 0..s.rows() {
            for (m, &v) in mean.iter_mut().zip(s.row(i)) {
                *m += v;
            }
        }
    }
    for m in &mut mean {
        *m /= T::of(total as f64);
    }

    let mut x = Mat::zeros(total, d);
    let mut at = 0;
    for s in sets {
        for i in 0..s.rows() {
            for (c, (&v, &m)) in s.row(i).iter().zip(&mean).enumerate() {
                x[(at, c)] = v - m;
            }
            at += 1;
        }
    }

    // scatter eigenvectors; go through the Gram matrix when d > n
    let (eigvals, basis) = if d <= total {
        let s = x.transpose().matmul(&x);
        let (vals, vecs) = jacobi_eigh(&s);
        let mut axes = Mat::zeros(d, 3);
        let mut lambda = [T::zero(); 3];
        for k in 0..3.min(d) {
            let col = d - 1 - k;
            lambda[k] = vals[col].max(T::zero());
            for r in 0..d {
                axes[(r, k)] = vecs[(r, col)];
            }
        }
        (lambda, axes)
    } else {
        let g = x.matmul(&x.transpose());
        let (vals, vecs) = jacobi_eigh(&g);
        let mut axes = Mat::zeros(d, 3);
        let mut lambda = [T::zero(); 3];
        for k in 0..3.min(total) {
            let col = total - 1 - k;
            let lam = vals[col].max(T::zero());
            lambda[k] = lam;
            if lam > T::zero() {
                let inv = T::one() / lam.sqrt();
                for r in 0..d {
                    let mut acc = T::zero();
                    for i in 0..total {
                        acc += x[(i, r)] * vecs[(i, col)];
                    }
                    axes[(r, k)] = acc * inv;
                }
            }
        }
        (lambda, axes)
    };

    let trace: T = {
        let t = x.norm_sq();
        if t > T::zero() {
            t
        } else {
            T::one()
        }
    };
    let floor = T::epsilon() * T::of(total as f64) * trace;
    let mut fractions = [T::zero(); 3];
    let mut rank_deficient = false;
    let mut basis = basis;
    for k in 0..3 {
        if eigvals[k] > floor {
            fractions[k] = eigvals[k] / trace;
        } else {
            rank_deficient = true;
            fractions[k] = T::zero();
            for r in 0..d {
                basis[(r, k)] = T::zero();
            }
        }
    }

    Ok(sets
        .iter()
        .map(|s| {
            let mut centered = s.clone();
            for i in 0..centered.rows() {
                for (v, &m) in centered.row_mut(i).iter_mut().zip(&mean) {
                    *v -= m;
                }
            }
            PcaProjection {
                coords: centered.matmul(&basis),
                variance_fractions: fractions,
                rank_deficient,
            }
        })
        .collect())
}

// ---------------------------------------------------------------------------
// smoothing

/// Default smoothing step count: 10 on one-dimensional grids, 5 on higher
/// dimensional ones.
pub fn default_smoothing_steps<T: Scalar>(grid: &SampleGrid<T>) -> usize {
    match grid.topology {
        Topology::Circle { .. } | Topology::LightCircle { .. } => 10,
        Topology::Torus { .. } | Topology::So3Grid { .. } => 5,
    }
}

/// Repeatedly replace each point with `w * z_i + (1 - w) * mean(neighbors)`.
/// Grid and point count are unchanged.
pub fn smooth<T: Scalar>(
    m: &LatentManifold<T>,
    steps: usize,
    self_weight: T,
) -> Result<LatentManifold<T>> {
    if self_weight <= T::zero() || self_weight >= T::one() {
        return Err(Error::InvalidArgument(
            "self weight must lie strictly between 0 and 1".into(),
        ));
    }
    let grid = m
        .grid
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("smoothing needs a grid".into()))?;
    let n = m.len();
    let d = m.dim();
    let mut points = m.points.clone();
    for _ in 0..steps {
        let mut next = Mat::zeros(n, d);
        for i in 0..n {
            let nbrs = &grid.neighbors[i];
            let row = next.row_mut(i);
            if nbrs.is_empty() {
                row.copy_from_slice(points.row(i));
                continue;
            }
            let inv = (T::one() - self_weight) / T::of(nbrs.len() as f64);
            for &j in nbrs {
                for (v, &z) in row.iter_mut().zip(points.row(j)) {
                    *v += inv * z;
                }
            }
            for (v, &z) in row.iter_mut().zip(points.row(i)) {
                *v += self_weight * z;
            }
        }
        points = next;
    }
    let mut out = m.clone();
    out.points = points;
    out.provenance = format!("{} +smooth(steps={steps})", m.provenance);
    Ok(out)
}

// ---------------------------------------------------------------------------
// joint embedding and the invariance study

/// One SMACOF run over the concatenation of several per-object point sets on
/// a shared grid, split back into per-object manifolds in node order.
pub fn joint_embed_points<T: Scalar>(
    sets: &[Mat<T>],
    grid: &SampleGrid<T>,
    dim: usize,
    seed: u64,
) -> Result<Vec<LatentManifold<T>>> {
    if sets.is_empty() {
        return Err(Error::InvalidArgument("no objects".into()));
    }
    let n = grid.len();
    if sets.iter().any(|s| s.rows() != n) {
        return Err(Error::GridMismatch(format!(
            "every object needs {n} rows to match the grid"
        )));
    }
    let width = sets[0].cols();
    if sets.iter().any(|s| s.cols() != width) {
        return Err(Error::ShapeMismatch("objects have unequal widths".into()));
    }
    let mut stacked = Mat::zeros(n * sets.len(), width);
    for (o, s) in sets.iter().enumerate() {
        for i in 0..n {
            stacked.row_mut(o * n + i).copy_from_slice(s.row(i));
        }
    }
    let d = pairwise_distances(&stacked)?;
    let joint = mds_smacof(&d, dim, seed, T::of(1e-7), 500)?;
    Ok((0..sets.len())
        .map(|o| {
            let mut pts = Mat::zeros(n, dim);
            for i in 0..n {
                pts.row_mut(i).copy_from_slice(joint.points.row(o * n + i));
            }
            LatentManifold::from_points(pts)
                .with_grid(grid.clone())
                .with_provenance(format!("joint[{o}] of {}", sets.len()))
        })
        .collect())
}

/// Render each mesh over the grid, flatten the images, and jointly embed.
pub fn joint_embed<T: Scalar>(
    meshes: &[TriMesh<T>],
    grid: &SampleGrid<T>,
    cam: &CameraConfig<T>,
    light: &LightConfig<T>,
    dim: usize,
    seed: u64,
) -> Result<Vec<LatentManifold<T>>> {
    let sets: Vec<Mat<T>> = meshes
        .iter()
        .map(|mesh| Ok(images_to_mat(&render_pose_set(mesh, grid, cam, light)?)))
        .collect::<Result<_>>()?;
    joint_embed_points(&sets, grid, dim, seed)
}

fn images_to_mat<T: Scalar>(images: &[GrayImage<T>]) -> Mat<T> {
    let width = images.first().map_or(0, |im| im.pixels.len());
    let mut m = Mat::zeros(images.len(), width);
    for (i, im) in images.iter().enumerate() {
        m.row_mut(i).copy_from_slice(&im.pixels);
    }
    m
}

/// Embed the same distance matrix under `n_seeds` different seeds, plus
/// `n_perms` random row/column permutations (inverse-permuted back after
/// embedding), and return the pairwise shape distances among all runs.
pub fn invariance_study<T: Scalar>(
    d: &DistanceMatrix<T>,
    grid: &SampleGrid<T>,
    dim: usize,
    n_seeds: usize,
    n_perms: usize,
    base_seed: u64,
) -> Result<DistanceMatrix<T>> {
    if n_seeds < 1 {
        return Err(Error::InvalidArgument("need at least one seed".into()));
    }
    if d.len() != grid.len() {
        return Err(Error::GridMismatch(format!(
            "distance matrix over {} points on a grid of {}",
            d.len(),
            grid.len()
        )));
    }
    let n = d.len();
    let tol = T::of(1e-7);
    let mut manifolds = Vec::with_capacity(n_seeds + n_perms);
    for s in 0..n_seeds {
        manifolds.push(
            mds_smacof(d, dim, base_seed.wrapping_add(s as u64), tol, 500)?
                .with_grid(grid.clone()),
        );
    }
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed ^ 0x9e37_79b9_7f4a_7c15);
    for p in 0..n_perms {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let embedded = mds_smacof(&d.permuted(&perm), dim, base_seed, tol, 500)?;
        // row r of the permuted run is original node perm[r]; undo it
        let mut pts = Mat::zeros(n, dim);
        for r in 0..n {
            pts.row_mut(perm[r]).copy_from_slice(embedded.points.row(r));
        }
        manifolds.push(
            LatentManifold::from_points(pts)
                .with_grid(grid.clone())
                .with_provenance(format!("perm{p}")),
        );
    }
    shape_distance_matrix(&manifolds)
}

// ---------------------------------------------------------------------------
// experiment runner

struct Workspace {
    root: PathBuf,
    artifacts: Vec<String>,
}

impl Workspace {
    fn new(root: &Path) -> Result<Self> {
        fs::create_dir_all(root)?;
        Ok(Workspace {
            root: root.to_path_buf(),
            artifacts: Vec::new(),
        })
    }

    fn path(&mut self, rel: &str) -> Result<PathBuf> {
        let p = self.root.join(rel);
        if let Some(parent) = p.parent() {
            fs::create_dir_all(parent)?;
        }
        self.artifacts.push(rel.to_string());
        Ok(p)
    }
}

fn stage<T>(name: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| e.in_stage(name))
}

fn load_mesh(spec: &ObjectSpec) -> Result<TriMesh<f64>> {
    match spec {
        ObjectSpec::Prism { sides } => make_prism(*sides, 1.0, 1.0),
        ObjectSpec::Mesh { path } => crate::render::load_obj(&fs::read_to_string(path)?),
    }
}

fn build_grid(cfg: &ExperimentConfig) -> Result<SampleGrid<f64>> {
    let g = &cfg.grid;
    match cfg.kind {
        ExperimentKind::So2 | ExperimentKind::Invariance | ExperimentKind::Joint => {
            sample_so2(g.n)
        }
        ExperimentKind::T2 => sample_t2(g.n_phi, g.n_psi),
        ExperimentKind::So3 => {
            if !cfg.allow_long {
                return Err(Error::InvalidArgument(
                    "the full SO(3) grid is a long run; set allow_long to confirm".into(),
                ));
            }
            sample_so3(g.n_sphere, g.so3_psi)
        }
        ExperimentKind::Illumination => sample_lights(g.n, g.light_radius, g.light_height),
        ExperimentKind::Simulation => unreachable!("simulation builds its own grid"),
    }
}

fn render_object(
    ws: &mut Workspace,
    name: &str,
    mesh: &TriMesh<f64>,
    grid: &SampleGrid<f64>,
    rp: &RenderParams,
) -> Result<Mat<f64>> {
    let cam = CameraConfig::new(
        rp.distance_factor * mesh.bounding_radius(),
        rp.focal_length,
        rp.image_size,
    )?;
    let light_pos = [cam.distance, -cam.distance, cam.distance];
    let light = LightConfig::new(light_pos, rp.ambient, rp.diffuse)?;
    let images = if grid.topology.is_rotation() {
        render_pose_set(mesh, grid, &cam, &light)?
    } else {
        render_illumination_set(mesh, grid, &cam, &light)?
    };
    let mut names = Vec::with_capacity(images.len());
    for (i, im) in images.iter().enumerate() {
        let rel = format!("images/{name}/{i:05}.pgm");
        io::write_image(&ws.path(&rel)?, im)?;
        names.push(rel);
    }
    let manifest_path = ws.path(&format!("images/{name}/set.json"))?;
    fs::write(manifest_path, serde_json::to_string_pretty(&names)?)?;
    Ok(images_to_mat(&images))
}

fn embed_distances(
    d: &DistanceMatrix<f64>,
    ep: &EmbedParams,
) -> Result<(LatentManifold<f64>, io::EmbedSidecar)> {
    let m = match ep.method.as_str() {
        "mds" => mds_smacof(d, ep.dim, ep.seed, ep.tol, ep.max_iter)?,
        "isomap" => isomap_from_distances(d, ep.knn, ep.dim, ep.seed)?,
        "le" => laplacian_eigenmaps_from_distances(d, ep.knn, ep.dim)?,
        "lle" => lle_from_distances(d, ep.knn, ep.dim)?,
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown embedding method '{other}' (expected mds|isomap|le|lle)"
            )))
        }
    };
    let sidecar = io::EmbedSidecar {
        method: ep.method.clone(),
        dim: ep.dim,
        seed: ep.seed,
        knn: if ep.method == "mds" { None } else { Some(ep.knn) },
        tol: ep.tol,
        max_iter: ep.max_iter,
        stress: m.stress,
    };
    Ok((m, sidecar))
}

fn write_manifest(ws: &mut Workspace, cfg: &ExperimentConfig) -> Result<()> {
    let mut hashes = BTreeMap::new();
    for rel in ws.artifacts.clone() {
        let bytes = fs::read(ws.root.join(&rel))?;
        hashes.insert(rel, hex_digest(&bytes));
    }
    #[derive(Serialize)]
    struct Manifest<'a> {
        config: &'a ExperimentConfig,
        artifacts: BTreeMap<String, String>,
    }
    let manifest = Manifest {
        config: cfg,
        artifacts: hashes,
    };
    fs::write(
        ws.root.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(())
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Execute a configured experiment end to end, writing every intermediate
/// artifact plus `manifest.json` into the output directory. Failures leave
/// partial outputs behind along with a `FAILED` marker naming the stage.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<PathBuf> {
    let mut ws = Workspace::new(&cfg.out_dir)?;
    let failed = ws.root.join("FAILED");
    let _ = fs::remove_file(&failed);
    match run_stages(cfg, &mut ws) {
        Ok(()) => {
            write_manifest(&mut ws, cfg)?;
            Ok(ws.root.join("manifest.json"))
        }
        Err(e) => {
            let _ = fs::write(&failed, format!("{e}\n"));
            Err(e)
        }
    }
}

fn run_stages(cfg: &ExperimentConfig, ws: &mut Workspace) -> Result<()> {
    match cfg.kind {
        ExperimentKind::Simulation => run_simulation(cfg, ws),
        ExperimentKind::Invariance => run_invariance(cfg, ws),
        ExperimentKind::Joint => run_joint(cfg, ws),
        _ => run_rendered(cfg, ws),
    }
}

fn require_objects(cfg: &ExperimentConfig) -> Result<()> {
    if cfg.objects.is_empty() {
        return Err(Error::InvalidArgument("config lists no objects".into()).in_stage("sample"));
    }
    Ok(())
}

fn run_rendered(cfg: &ExperimentConfig, ws: &mut Workspace) -> Result<()> {
    require_objects(cfg)?;
    let grid = stage("sample", build_grid(cfg))?;
    io::write_grid(&ws.path("grid.json")?, &grid)?;

    let single = cfg.objects.len() == 1;
    let mut manifolds = Vec::new();
    let mut names = Vec::new();
    for spec in &cfg.objects {
        let name = spec.name();
        let prefix = if single {
            String::new()
        } else {
            format!("objects/{name}/")
        };
        let mesh = stage("render", load_mesh(spec))?;
        let pixels = stage("render", render_object(ws, &name, &mesh, &grid, &cfg.render))?;
        let d = stage("distances", pairwise_distances(&pixels))?;
        io::write_matrix_csv(&ws.path(&format!("{prefix}distances.csv"))?, d.entries())?;

        let (raw, sidecar) = stage("embed", embed_distances(&d, &cfg.embedding))?;
        let raw = raw.with_grid(grid.clone()).with_provenance(name.clone());
        io::write_matrix_csv(&ws.path(&format!("{prefix}latent_raw.csv"))?, &raw.points)?;
        let final_manifold = match &cfg.smoothing {
            Some(sp) => {
                let steps = sp.steps.unwrap_or_else(|| default_smoothing_steps(&grid));
                stage("smooth", smooth(&raw, steps, sp.self_weight))?
            }
            None => raw,
        };
        io::write_latent(
            &ws.path(&format!("{prefix}latent.csv"))?,
            &final_manifold,
            &sidecar,
        )?;
        ws.artifacts.push(format!("{prefix}latent.csv.json"));
        manifolds.push(final_manifold);
        names.push(name);
    }

    if manifolds.len() >= 2 {
        let sd = stage("shape", shape_distance_matrix(&manifolds))?;
        io::write_named_matrix_csv(&ws.path("shape_distances.csv")?, &names, sd.entries())?;
        let layout = stage("shape", proximity_embed_2d(&sd, cfg.embedding.seed))?;
        io::write_matrix_csv(&ws.path("proximity2d.csv")?, &layout)?;
        let k = cfg.cluster_count.unwrap_or(2).min(manifolds.len());
        let labels = stage("shape", cluster(&sd, k))?;
        let rows: Vec<Vec<f64>> = labels.iter().map(|&l| vec![l as f64]).collect();
        io::write_matrix_csv(&ws.path("clusters.csv")?, &Mat::from_rows(&rows))?;
    }
    Ok(())
}

fn run_simulation(cfg: &ExperimentConfig, ws: &mut Workspace) -> Result<()> {
    let sp = &cfg.simulation;
    let truth = stage(
        "simulate",
        match sp.manifold.as_str() {
            "double_saddle" => double_saddle(cfg.grid.n),
            "loop" => loop_of_double_saddles(cfg.grid.n_phi, cfg.grid.n_psi),
            other => Err(Error::InvalidArgument(format!(
                "unknown synthetic manifold '{other}' (expected double_saddle|loop)"
            ))),
        },
    )?;
    io::write_grid(&ws.path("grid.json")?, &truth.grid)?;
    io::write_matrix_csv(&ws.path("truth.csv")?, &truth.points)?;

    let lifted = stage("lift", lift_and_rotate(&truth, sp.lift_dim, sp.lift_seed))?;
    let observed = if sp.noise_sigma > 0.0 {
        add_noise(&lifted, sp.noise_sigma, sp.noise_seed)
    } else {
        lifted
    };
    io::write_matrix_csv(&ws.path("points.csv")?, &observed.points)?;

    let d = stage("distances", pairwise_distances(&observed.points))?;
    io::write_matrix_csv(&ws.path("distances.csv")?, d.entries())?;

    let (latent, sidecar) = stage("embed", embed_distances(&d, &cfg.embedding))?;
    let latent = latent.with_grid(truth.grid.clone());
    io::write_latent(&ws.path("latent.csv")?, &latent, &sidecar)?;
    ws.artifacts.push("latent.csv.json".into());

    let truth_manifold = LatentManifold::from_points(truth.points.clone())
        .with_grid(truth.grid.clone())
        .with_provenance("ground truth");
    let family = stage(
        "shape",
        crate::sampling::registration_family(&truth.grid),
    )?;
    let result = stage("shape", shape_distance(&latent, &truth_manifold, &family))?;
    fs::write(
        ws.path("shape_result.json")?,
        io::shape_result_to_json(&result),
    )?;
    fs::write(
        ws.path("table.csv")?,
        format!(
            "method,dim,stress,shape_distance_to_truth\n{},{},{},{}\n",
            cfg.embedding.method, cfg.embedding.dim, sidecar.stress, result.distance
        ),
    )?;
    Ok(())
}

fn run_invariance(cfg: &ExperimentConfig, ws: &mut Workspace) -> Result<()> {
    require_objects(cfg)?;
    let grid = stage("sample", build_grid(cfg))?;
    io::write_grid(&ws.path("grid.json")?, &grid)?;
    let spec = &cfg.objects[0];
    let mesh = stage("render", load_mesh(spec))?;
    let pixels = stage(
        "render",
        render_object(ws, &spec.name(), &mesh, &grid, &cfg.render),
    )?;
    let d = stage("distances", pairwise_distances(&pixels))?;
    io::write_matrix_csv(&ws.path("distances.csv")?, d.entries())?;

    let iv = &cfg.invariance;
    let sd = stage(
        "invariance",
        invariance_study(
            &d,
            &grid,
            cfg.embedding.dim,
            iv.n_seeds,
            iv.n_perms,
            cfg.embedding.seed,
        ),
    )?;
    let names: Vec<String> = (0..iv.n_seeds)
        .map(|s| format!("seed{s}"))
        .chain((0..iv.n_perms).map(|p| format!("perm{p}")))
        .collect();
    io::write_named_matrix_csv(&ws.path("shape_distances.csv")?, &names, sd.entries())?;
    Ok(())
}

fn run_joint(cfg: &ExperimentConfig, ws: &mut Workspace) -> Result<()> {
    require_objects(cfg)?;
    let grid = stage("sample", build_grid(cfg))?;
    io::write_grid(&ws.path("grid.json")?, &grid)?;

    let mut sets = Vec::new();
    let mut names = Vec::new();
    for spec in &cfg.objects {
        let mesh = stage("render", load_mesh(spec))?;
        sets.push(stage(
            "render",
            render_object(ws, &spec.name(), &mesh, &grid, &cfg.render),
        )?);
        names.push(spec.name());
    }
    let manifolds = stage(
        "embed",
        joint_embed_points(&sets, &grid, cfg.embedding.dim, cfg.embedding.seed),
    )?;
    for (name, m) in names.iter().zip(&manifolds) {
        io::write_matrix_csv(&ws.path(&format!("objects/{name}/latent.csv"))?, &m.points)?;
    }
    if manifolds.len() >= 2 {
        let sd = stage("shape", shape_distance_matrix(&manifolds))?;
        io::write_named_matrix_csv(&ws.path("shape_distances.csv")?, &names, sd.entries())?;
    }
    Ok(())
}
