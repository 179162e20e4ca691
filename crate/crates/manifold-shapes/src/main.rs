//! Command-line front end: sampling grids, rendering image sets, embedding
//! distance matrices, shape comparison, and config-driven experiment runs.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use manifold_shapes::embed::{
    isomap_from_distances, laplacian_eigenmaps_from_distances, lle_from_distances, mds_smacof,
    pairwise_distances, DistanceMatrix, LatentManifold,
};
use manifold_shapes::error::{Error, Result};
use manifold_shapes::io;
use manifold_shapes::linalg::Mat;
use manifold_shapes::pipeline::{
    default_smoothing_steps, invariance_study, joint_embed_points, pca_project, run_experiment,
    smooth, ExperimentConfig,
};
use manifold_shapes::render::{
    load_obj, make_prism, render_illumination_set, render_pose_set, CameraConfig, LightConfig,
    TriMesh,
};
use manifold_shapes::sampling::{
    identity_family, registration_family, sample_lights, sample_so2, sample_so3, sample_t2,
    SampleGrid,
};
use manifold_shapes::shape::shape_distance;
use manifold_shapes::simdata::{add_noise, double_saddle, lift_and_rotate, loop_of_double_saddles};

#[derive(Parser)]
#[command(
    name = "mshape",
    about = "Pose/illumination image manifolds: rendering, embedding, and shape comparison",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic ground-truth manifold, lift it, and add noise
    Simulate {
        /// double_saddle | loop
        #[arg(long, default_value = "double_saddle")]
        manifold: String,
        /// Sample count for the curve
        #[arg(long, default_value_t = 500)]
        n: usize,
        /// Ring count for the surface
        #[arg(long, default_value_t = 40)]
        n_phi: usize,
        /// Points per ring for the surface
        #[arg(long, default_value_t = 50)]
        n_psi: usize,
        #[arg(long, default_value_t = 768)]
        lift_dim: usize,
        #[arg(long, default_value_t = 0)]
        lift_seed: u64,
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        #[arg(long, default_value_t = 0)]
        noise_seed: u64,
        /// Lifted (and optionally noisy) point CSV
        #[arg(long)]
        out: PathBuf,
        /// Unlifted ground-truth point CSV
        #[arg(long)]
        out_truth: Option<PathBuf>,
        /// Parameter grid JSON
        #[arg(long)]
        out_grid: Option<PathBuf>,
    },
    /// Construct a sampling grid and write it as JSON
    Sample {
        /// so2 | t2 | so3 | lights
        #[arg(long)]
        topology: String,
        #[arg(long, default_value_t = 500)]
        n: usize,
        #[arg(long, default_value_t = 40)]
        n_phi: usize,
        #[arg(long, default_value_t = 50)]
        n_psi: usize,
        #[arg(long, default_value_t = 267)]
        n_sphere: usize,
        /// Spin angles per sphere point for the so3 grid
        #[arg(long, default_value_t = 30)]
        n_spin: usize,
        #[arg(long, default_value_t = 4.0)]
        radius: f64,
        #[arg(long, default_value_t = 2.0)]
        height: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render an object over a grid into PGM images
    Render {
        #[arg(long)]
        grid: PathBuf,
        /// "prism:<sides>" or a path to an OBJ file
        #[arg(long)]
        object: String,
        #[arg(long, default_value_t = 64)]
        image_size: usize,
        #[arg(long, default_value_t = 1.0)]
        focal: f64,
        /// Camera distance in bounding radii
        #[arg(long, default_value_t = 4.0)]
        distance_factor: f64,
        #[arg(long, default_value_t = 0.25)]
        ambient: f64,
        #[arg(long, default_value_t = 0.65)]
        diffuse: f64,
        #[arg(long)]
        out_dir: PathBuf,
        /// Also write the pairwise image distance matrix
        #[arg(long)]
        distances: Option<PathBuf>,
    },
    /// Embed a distance matrix into a latent space
    Embed {
        /// mds | isomap | le | lle
        #[arg(long, default_value = "mds")]
        method: String,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        knn: usize,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        #[arg(long, default_value_t = 500)]
        max_iter: usize,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Shape distance between two latent point sets
    #[command(name = "shape-dist")]
    ShapeDist {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Grid JSON providing the registration family; identity if omitted
        #[arg(long)]
        grid: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Project point sets onto their joint top-3 principal axes
    Pca {
        #[arg(long = "in", required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        /// Output prefix; writes <prefix><index>.csv plus <prefix>variance.csv
        #[arg(long)]
        out_prefix: String,
    },
    /// Neighbor smoothing of a latent point set on its grid
    Smooth {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        grid: PathBuf,
        /// Defaults to 10 steps on 1D grids, 5 on 2D grids
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long, default_value_t = 0.5)]
        self_weight: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a full experiment from a JSON config
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Seed/permutation invariance study of MDS on a distance matrix
    Invariance {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        grid: PathBuf,
        #[arg(long, default_value_t = 8)]
        dim: usize,
        #[arg(long, default_value_t = 5)]
        seeds: usize,
        #[arg(long, default_value_t = 4)]
        perms: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Jointly embed several objects rendered over one grid
    Joint {
        #[arg(long)]
        grid: PathBuf,
        /// Comma-separated object specs ("prism:4,prism:1000" or OBJ paths)
        #[arg(long)]
        objects: String,
        #[arg(long, default_value_t = 8)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 64)]
        image_size: usize,
        #[arg(long, default_value_t = 1.0)]
        focal: f64,
        #[arg(long, default_value_t = 4.0)]
        distance_factor: f64,
        #[arg(long, default_value_t = 0.25)]
        ambient: f64,
        #[arg(long, default_value_t = 0.65)]
        diffuse: f64,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn parse_object(spec: &str) -> Result<TriMesh<f64>> {
    if let Some(sides) = spec.strip_prefix("prism:") {
        let sides: usize = sides
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad prism spec '{spec}'")))?;
        make_prism(sides, 1.0, 1.0)
    } else {
        load_obj(&fs::read_to_string(spec)?)
    }
}

fn object_name(spec: &str) -> String {
    if let Some(sides) = spec.strip_prefix("prism:") {
        format!("prism{sides}")
    } else {
        PathBuf::from(spec)
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "mesh".into())
    }
}

fn render_images(
    mesh: &TriMesh<f64>,
    grid: &SampleGrid<f64>,
    image_size: usize,
    focal: f64,
    distance_factor: f64,
    ambient: f64,
    diffuse: f64,
) -> Result<Vec<manifold_shapes::render::GrayImage<f64>>> {
    let cam = CameraConfig::new(distance_factor * mesh.bounding_radius(), focal, image_size)?;
    let light = LightConfig::new([cam.distance, -cam.distance, cam.distance], ambient, diffuse)?;
    if grid.topology.is_rotation() {
        render_pose_set(mesh, grid, &cam, &light)
    } else {
        render_illumination_set(mesh, grid, &cam, &light)
    }
}

fn images_matrix(images: &[manifold_shapes::render::GrayImage<f64>]) -> Mat<f64> {
    let width = images.first().map_or(0, |im| im.pixels.len());
    let mut m = Mat::zeros(images.len(), width);
    for (i, im) in images.iter().enumerate() {
        m.row_mut(i).copy_from_slice(&im.pixels);
    }
    m
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Simulate {
            manifold,
            n,
            n_phi,
            n_psi,
            lift_dim,
            lift_seed,
            sigma,
            noise_seed,
            out,
            out_truth,
            out_grid,
        } => {
            let truth = match manifold.as_str() {
                "double_saddle" => double_saddle(n)?,
                "loop" => loop_of_double_saddles(n_phi, n_psi)?,
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "unknown manifold '{other}' (expected double_saddle|loop)"
                    )))
                }
            };
            let lifted = lift_and_rotate(&truth, lift_dim, lift_seed)?;
            let observed = if sigma > 0.0 {
                add_noise(&lifted, sigma, noise_seed)
            } else {
                lifted
            };
            io::write_matrix_csv(&out, &observed.points)?;
            if let Some(p) = out_truth {
                io::write_matrix_csv(&p, &truth.points)?;
            }
            if let Some(p) = out_grid {
                io::write_grid(&p, &truth.grid)?;
            }
            Ok(())
        }
        Command::Sample {
            topology,
            n,
            n_phi,
            n_psi,
            n_sphere,
            n_spin,
            radius,
            height,
            out,
        } => {
            let grid: SampleGrid<f64> = match topology.as_str() {
                "so2" => sample_so2(n)?,
                "t2" => sample_t2(n_phi, n_psi)?,
                "so3" => sample_so3(n_sphere, n_spin)?,
                "lights" => sample_lights(n, radius, height)?,
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "unknown topology '{other}' (expected so2|t2|so3|lights)"
                    )))
                }
            };
            io::write_grid(&out, &grid)
        }
        Command::Render {
            grid,
            object,
            image_size,
            focal,
            distance_factor,
            ambient,
            diffuse,
            out_dir,
            distances,
        } => {
            let grid = io::read_grid::<f64>(&grid)?;
            let mesh = parse_object(&object)?;
            let images = render_images(
                &mesh,
                &grid,
                image_size,
                focal,
                distance_factor,
                ambient,
                diffuse,
            )?;
            fs::create_dir_all(&out_dir)?;
            let mut names = Vec::with_capacity(images.len());
            for (i, im) in images.iter().enumerate() {
                let name = format!("{i:05}.pgm");
                io::write_image(&out_dir.join(&name), im)?;
                names.push(name);
            }
            fs::write(
                out_dir.join("set.json"),
                serde_json::to_string_pretty(&names)?,
            )?;
            if let Some(p) = distances {
                let d = pairwise_distances(&images_matrix(&images))?;
                io::write_matrix_csv(&p, d.entries())?;
            }
            Ok(())
        }
        Command::Embed {
            method,
            dim,
            seed,
            knn,
            tol,
            max_iter,
            input,
            out,
        } => {
            let d = DistanceMatrix::new(io::read_matrix_csv::<f64>(&input)?)?;
            let m = match method.as_str() {
                "mds" => mds_smacof(&d, dim, seed, tol, max_iter)?,
                "isomap" => isomap_from_distances(&d, knn, dim, seed)?,
                "le" => laplacian_eigenmaps_from_distances(&d, knn, dim)?,
                "lle" => lle_from_distances(&d, knn, dim)?,
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "unknown method '{other}' (expected mds|isomap|le|lle)"
                    )))
                }
            };
            let sidecar = io::EmbedSidecar {
                method,
                dim,
                seed,
                knn: Some(knn),
                tol,
                max_iter,
                stress: m.stress,
            };
            io::write_latent(&out, &m, &sidecar)
        }
        Command::ShapeDist { a, b, grid, out } => {
            let pa = io::read_matrix_csv::<f64>(&a)?;
            let pb = io::read_matrix_csv::<f64>(&b)?;
            let family = match grid {
                Some(p) => {
                    let g = io::read_grid::<f64>(&p)?;
                    registration_family(&g).unwrap_or_else(|_| identity_family(&g))
                }
                None => vec![manifold_shapes::sampling::Registration::Identity { n: pa.rows() }],
            };
            let ma = LatentManifold::from_points(pa);
            let mb = LatentManifold::from_points(pb);
            let result = shape_distance(&ma, &mb, &family)?;
            let json = io::shape_result_to_json(&result);
            match out {
                Some(p) => fs::write(p, json)?,
                None => println!("{json}"),
            }
            Ok(())
        }
        Command::Pca { inputs, out_prefix } => {
            let sets: Vec<Mat<f64>> = inputs
                .iter()
                .map(|p| io::read_matrix_csv(p))
                .collect::<Result<_>>()?;
            let projections = pca_project(&sets)?;
            for (i, proj) in projections.iter().enumerate() {
                io::write_matrix_csv(
                    &PathBuf::from(format!("{out_prefix}{i}.csv")),
                    &proj.coords,
                )?;
            }
            let f = projections[0].variance_fractions;
            fs::write(
                format!("{out_prefix}variance.csv"),
                format!("{},{},{}\n", f[0], f[1], f[2]),
            )?;
            Ok(())
        }
        Command::Smooth {
            input,
            grid,
            steps,
            self_weight,
            out,
        } => {
            let g = io::read_grid::<f64>(&grid)?;
            let steps = steps.unwrap_or_else(|| default_smoothing_steps(&g));
            let m = LatentManifold::from_points(io::read_matrix_csv(&input)?).with_grid(g);
            let s = smooth(&m, steps, self_weight)?;
            io::write_matrix_csv(&out, &s.points)
        }
        Command::Run { config } => {
            let cfg: ExperimentConfig = serde_json::from_str(&fs::read_to_string(config)?)?;
            run_experiment(&cfg)?;
            Ok(())
        }
        Command::Invariance {
            input,
            grid,
            dim,
            seeds,
            perms,
            seed,
            out,
        } => {
            let d = DistanceMatrix::new(io::read_matrix_csv::<f64>(&input)?)?;
            let g = io::read_grid::<f64>(&grid)?;
            let sd = invariance_study(&d, &g, dim, seeds, perms, seed)?;
            let names: Vec<String> = (0..seeds)
                .map(|s| format!("seed{s}"))
                .chain((0..perms).map(|p| format!("perm{p}")))
                .collect();
            io::write_named_matrix_csv(&out, &names, sd.entries())
        }
        Command::Joint {
            grid,
            objects,
            dim,
            seed,
            image_size,
            focal,
            distance_factor,
            ambient,
            diffuse,
            out_dir,
        } => {
            let g = io::read_grid::<f64>(&grid)?;
            let specs: Vec<&str> = objects.split(',').filter(|s| !s.is_empty()).collect();
            if specs.is_empty() {
                return Err(Error::InvalidArgument("no objects given".into()));
            }
            let sets: Vec<Mat<f64>> = specs
                .iter()
                .map(|s| {
                    let mesh = parse_object(s)?;
                    Ok(images_matrix(&render_images(
                        &mesh,
                        &g,
                        image_size,
                        focal,
                        distance_factor,
                        ambient,
                        diffuse,
                    )?))
                })
                .collect::<Result<_>>()?;
            let manifolds = joint_embed_points(&sets, &g, dim, seed)?;
            fs::create_dir_all(&out_dir)?;
            for (spec, m) in specs.iter().zip(&manifolds) {
                io::write_matrix_csv(
                    &out_dir.join(format!("{}_latent.csv", object_name(spec))),
                    &m.points,
                )?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Stage { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
