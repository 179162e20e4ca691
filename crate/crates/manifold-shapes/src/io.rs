//! File formats: grid JSON, numeric CSV, PGM images, and the JSON sidecars
//! describing embeddings and alignment results.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::embed::LatentManifold;
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::render::GrayImage;
use crate::sampling::{HopfTriple, Registration, SampleGrid, Topology};
use crate::shape::ShapeResult;
use crate::Scalar;

#[derive(Serialize, Deserialize)]
struct NodeDto {
    theta: f64,
    phi: f64,
    psi: f64,
}

#[derive(Serialize, Deserialize)]
struct GridDto {
    topology: String,
    parameters: serde_json::Map<String, serde_json::Value>,
    nodes: Vec<NodeDto>,
    neighbors: Vec<Vec<usize>>,
}

fn json_num(x: f64) -> serde_json::Value {
    serde_json::Number::from_f64(x).map_or(serde_json::Value::Null, serde_json::Value::Number)
}

pub fn grid_to_json<T: Scalar>(grid: &SampleGrid<T>) -> String {
    let mut parameters = serde_json::Map::new();
    match grid.topology {
        Topology::Circle { n } => {
            parameters.insert("n".into(), n.into());
        }
        Topology::Torus { n_phi, n_psi } => {
            parameters.insert("n_phi".into(), n_phi.into());
            parameters.insert("n_psi".into(), n_psi.into());
        }
        Topology::So3Grid { n_sphere, n_psi } => {
            parameters.insert("n_sphere".into(), n_sphere.into());
            parameters.insert("n_psi".into(), n_psi.into());
        }
        Topology::LightCircle { n, radius, height } => {
            parameters.insert("n".into(), n.into());
            parameters.insert("radius".into(), json_num(radius.as_f64()));
            parameters.insert("height".into(), json_num(height.as_f64()));
        }
    }
    let dto = GridDto {
        topology: grid.topology.name().into(),
        parameters,
        nodes: grid
            .nodes
            .iter()
            .map(|h| NodeDto {
                theta: h.theta.as_f64(),
                phi: h.phi.as_f64(),
                psi: h.psi.as_f64(),
            })
            .collect(),
        neighbors: grid.neighbors.clone(),
    };
    serde_json::to_string_pretty(&dto).expect("grid serialization cannot fail")
}

fn param_usize(p: &serde_json::Map<String, serde_json::Value>, key: &str) -> Result<usize> {
    p.get(key)
        .and_then(|v| v.as_u64())
        .map(|v| v as usize)
        .ok_or_else(|| Error::InvalidGrid(format!("missing integer parameter '{key}'")))
}

fn param_f64(p: &serde_json::Map<String, serde_json::Value>, key: &str) -> Result<f64> {
    p.get(key)
        .and_then(|v| v.as_f64())
        .ok_or_else(|| Error::InvalidGrid(format!("missing numeric parameter '{key}'")))
}

pub fn grid_from_json<T: Scalar>(text: &str) -> Result<SampleGrid<T>> {
    let dto: GridDto = serde_json::from_str(text)?;
    let p = &dto.parameters;
    let (topology, k_directions) = match dto.topology.as_str() {
        "circle" => (
            Topology::Circle {
                n: param_usize(p, "n")?,
            },
            2,
        ),
        "torus" => (
            Topology::Torus {
                n_phi: param_usize(p, "n_phi")?,
                n_psi: param_usize(p, "n_psi")?,
            },
            4,
        ),
        "so3" => (
            Topology::So3Grid {
                n_sphere: param_usize(p, "n_sphere")?,
                n_psi: param_usize(p, "n_psi")?,
            },
            1,
        ),
        "lights" => (
            Topology::LightCircle {
                n: param_usize(p, "n")?,
                radius: T::of(param_f64(p, "radius")?),
                height: T::of(param_f64(p, "height")?),
            },
            2,
        ),
        other => return Err(Error::InvalidGrid(format!("unknown topology '{other}'"))),
    };
    if topology.node_count() != dto.nodes.len() || dto.nodes.len() != dto.neighbors.len() {
        return Err(Error::InvalidGrid(format!(
            "node count mismatch: topology says {}, file has {} nodes / {} neighbor lists",
            topology.node_count(),
            dto.nodes.len(),
            dto.neighbors.len()
        )));
    }
    let n = dto.nodes.len();
    if dto.neighbors.iter().flatten().any(|&j| j >= n) {
        return Err(Error::InvalidGrid("neighbor index out of range".into()));
    }
    Ok(SampleGrid {
        topology,
        nodes: dto
            .nodes
            .iter()
            .map(|d| HopfTriple::new(T::of(d.theta), T::of(d.phi), T::of(d.psi)))
            .collect(),
        neighbors: dto.neighbors,
        k_directions,
    })
}

pub fn write_grid<T: Scalar>(path: &Path, grid: &SampleGrid<T>) -> Result<()> {
    fs::write(path, grid_to_json(grid))?;
    Ok(())
}

pub fn read_grid<T: Scalar>(path: &Path) -> Result<SampleGrid<T>> {
    grid_from_json(&fs::read_to_string(path)?)
}

/// Plain numeric CSV, one row per line, shortest round-trip float formatting.
pub fn matrix_to_csv<T: Scalar>(m: &Mat<T>) -> String {
    let mut out = String::new();
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|v| v.as_f64().to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn write_matrix_csv<T: Scalar>(path: &Path, m: &Mat<T>) -> Result<()> {
    fs::write(path, matrix_to_csv(m))?;
    Ok(())
}

pub fn matrix_from_csv<T: Scalar>(text: &str) -> Result<Mat<T>> {
    let mut rows: Vec<Vec<T>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row: Vec<T> = line
            .split(',')
            .map(|cell| {
                cell.trim()
                    .parse::<f64>()
                    .map(T::of)
                    .map_err(|e| Error::InvalidArgument(format!("csv line {}: {e}", lineno + 1)))
            })
            .collect::<Result<_>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::ShapeMismatch(format!(
                    "csv line {} has {} cells, expected {}",
                    lineno + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::InvalidArgument("empty csv".into()));
    }
    Ok(Mat::from_rows(&rows))
}

pub fn read_matrix_csv<T: Scalar>(path: &Path) -> Result<Mat<T>> {
    matrix_from_csv(&fs::read_to_string(path)?)
}

/// CSV with a header row and a leading name column, for labeled square
/// matrices.
pub fn named_matrix_to_csv<T: Scalar>(names: &[String], m: &Mat<T>) -> String {
    assert_eq!(names.len(), m.rows());
    let mut out = String::new();
    out.push_str("name,");
    out.push_str(&names.join(","));
    out.push('\n');
    for i in 0..m.rows() {
        out.push_str(&names[i]);
        for v in m.row(i) {
            out.push(',');
            out.push_str(&v.as_f64().to_string());
        }
        out.push('\n');
    }
    out
}

pub fn write_named_matrix_csv<T: Scalar>(path: &Path, names: &[String], m: &Mat<T>) -> Result<()> {
    fs::write(path, named_matrix_to_csv(names, m))?;
    Ok(())
}

pub fn write_image<T: Scalar>(path: &Path, image: &GrayImage<T>) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(&image.to_pgm())?;
    Ok(())
}

/// Parameters and outcome of one embedding run, written next to the latent
/// CSV.
#[derive(Serialize, Deserialize, Debug)]
pub struct EmbedSidecar {
    pub method: String,
    pub dim: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub knn: Option<usize>,
    pub tol: f64,
    pub max_iter: usize,
    pub stress: f64,
}

pub fn write_embed_sidecar(path: &Path, sidecar: &EmbedSidecar) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(sidecar)?)?;
    Ok(())
}

pub fn write_latent<T: Scalar>(
    path: &Path,
    manifold: &LatentManifold<T>,
    sidecar: &EmbedSidecar,
) -> Result<()> {
    write_matrix_csv(path, &manifold.points)?;
    let mut sidecar_path = path.as_os_str().to_owned();
    sidecar_path.push(".json");
    write_embed_sidecar(Path::new(&sidecar_path), sidecar)
}

#[derive(Serialize, Deserialize, Debug)]
struct ShapeResultDto {
    distance: f64,
    registration: String,
    shift_indices: Vec<usize>,
    direction_class: usize,
    dim: usize,
    alignment_row_major: Vec<f64>,
}

pub fn shape_result_to_json<T: Scalar>(r: &ShapeResult<T>) -> String {
    let (kind, shifts) = match r.registration {
        Registration::Identity { .. } => ("identity", vec![]),
        Registration::Circle { shift, .. } => ("circle", vec![shift]),
        Registration::Torus {
            shift_phi,
            shift_psi,
            ..
        } => ("torus", vec![shift_phi, shift_psi]),
    };
    let dto = ShapeResultDto {
        distance: r.distance.as_f64(),
        registration: kind.into(),
        shift_indices: shifts,
        direction_class: r.registration.direction_class(),
        dim: r.alignment.rows(),
        alignment_row_major: r.alignment.data().iter().map(|v| v.as_f64()).collect(),
    };
    serde_json::to_string_pretty(&dto).expect("shape result serialization cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{sample_lights, sample_so2, sample_so3, sample_t2};

    #[test]
    fn grid_json_round_trip() {
        for grid in [
            sample_so2::<f64>(12).unwrap(),
            sample_t2::<f64>(5, 7).unwrap(),
            sample_so3::<f64>(20, 6).unwrap(),
            sample_lights::<f64>(9, 2.0, 1.5).unwrap(),
        ] {
            let json = grid_to_json(&grid);
            let back: SampleGrid<f64> = grid_from_json(&json).unwrap();
            assert_eq!(back.len(), grid.len());
            assert_eq!(back.neighbors, grid.neighbors);
            assert_eq!(back.k_directions, grid.k_directions);
            assert_eq!(back.topology.name(), grid.topology.name());
            for (a, b) in back.nodes.iter().zip(&grid.nodes) {
                assert!((a.theta - b.theta).abs() < 1e-15);
                assert!((a.phi - b.phi).abs() < 1e-15);
                assert!((a.psi - b.psi).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn grid_json_rejects_bad_input() {
        assert!(grid_from_json::<f64>("{}").is_err());
        let mut grid = sample_so2::<f64>(8).unwrap();
        grid.neighbors[0] = vec![99];
        let json = grid_to_json(&grid);
        assert!(grid_from_json::<f64>(&json).is_err());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let m = Mat::from_rows(&[
            vec![1.0, -0.5, 1.0 / 3.0],
            vec![1e-17, 2.25, std::f64::consts::PI],
        ]);
        let text = matrix_to_csv(&m);
        let back: Mat<f64> = matrix_from_csv(&text).unwrap();
        assert_eq!(m, back);

        assert!(matrix_from_csv::<f64>("1,2\n3\n").is_err());
        assert!(matrix_from_csv::<f64>("").is_err());
        assert!(matrix_from_csv::<f64>("1,x\n").is_err());
    }

    #[test]
    fn named_csv_layout() {
        let m = Mat::from_rows(&[vec![0.0, 1.5], vec![1.5, 0.0]]);
        let text = named_matrix_to_csv(&["a".to_string(), "b".to_string()], &m);
        assert_eq!(text, "name,a,b\na,0,1.5\nb,1.5,0\n");
    }
}
