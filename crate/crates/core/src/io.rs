//! File formats: ESRI-style ASCII grids, ASCII PLY point clouds and
//! Wavefront OBJ meshes.
//!
//! Grid files carry a six-line header (`ncols`, `nrows`, `xllcorner`,
//! `yllcorner`, `cellsize`, `NODATA_value`) followed by one whitespace
//! separated row per line, northernmost row first. Elevations are written
//! with six decimal digits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::Vector3;

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::grid::{BinaryMask, HeightGrid, LabelGrid, GROUND};
use crate::mesh::Mesh;
use crate::real::Real;

struct GridHeader {
    ncols: usize,
    nrows: usize,
    xllcorner: f64,
    yllcorner: f64,
    cellsize: f64,
    nodata: f64,
    data_start: usize,
}

fn parse_header(path: &Path, lines: &[&str]) -> Result<GridHeader> {
    let mut fields = [0.0f64; 6];
    let names = [
        "ncols",
        "nrows",
        "xllcorner",
        "yllcorner",
        "cellsize",
        "NODATA_value",
    ];
    for (i, name) in names.iter().enumerate() {
        let line = lines
            .get(i)
            .ok_or_else(|| Error::parse(path, i + 1, "missing header line"))?;
        let mut it = line.split_whitespace();
        let key = it
            .next()
            .ok_or_else(|| Error::parse(path, i + 1, "empty header line"))?;
        if !key.eq_ignore_ascii_case(name) {
            return Err(Error::parse(
                path,
                i + 1,
                format!("expected header field `{name}`, found `{key}`"),
            ));
        }
        let value = it
            .next()
            .ok_or_else(|| Error::parse(path, i + 1, format!("missing value for `{name}`")))?;
        fields[i] = value
            .parse::<f64>()
            .map_err(|_| Error::parse(path, i + 1, format!("non-numeric value `{value}`")))?;
    }
    if fields[0] < 1.0 || fields[1] < 1.0 || fields[0].fract() != 0.0 || fields[1].fract() != 0.0 {
        return Err(Error::parse(path, 1, "ncols/nrows must be positive integers"));
    }
    if fields[4] <= 0.0 {
        return Err(Error::parse(path, 5, "cellsize must be positive"));
    }
    Ok(GridHeader {
        ncols: fields[0] as usize,
        nrows: fields[1] as usize,
        xllcorner: fields[2],
        yllcorner: fields[3],
        cellsize: fields[4],
        nodata: fields[5],
        data_start: 6,
    })
}

fn parse_rows<F: Real>(path: &Path, lines: &[&str], h: &GridHeader) -> Result<Vec<F>> {
    let mut values = vec![F::zero(); h.ncols * h.nrows];
    for file_row in 0..h.nrows {
        let line_no = h.data_start + file_row + 1;
        let line = lines
            .get(h.data_start + file_row)
            .ok_or_else(|| Error::parse(path, line_no, "missing data row"))?;
        let grid_row = h.nrows - 1 - file_row; // file rows run north to south
        let mut count = 0usize;
        for (col, tok) in line.split_whitespace().enumerate() {
            if col >= h.ncols {
                return Err(Error::parse(
                    path,
                    line_no,
                    format!("row has more than {} columns", h.ncols),
                ));
            }
            let v = tok
                .parse::<f64>()
                .map_err(|_| Error::parse(path, line_no, format!("non-numeric cell `{tok}`")))?;
            values[grid_row * h.ncols + col] = F::of(v);
            count += 1;
        }
        if count != h.ncols {
            return Err(Error::parse(
                path,
                line_no,
                format!("expected {} columns, found {count}", h.ncols),
            ));
        }
    }
    if lines.len() > h.data_start + h.nrows && lines[h.data_start + h.nrows..].iter().any(|l| !l.trim().is_empty())
    {
        return Err(Error::parse(
            path,
            h.data_start + h.nrows + 1,
            "trailing data after last row",
        ));
    }
    Ok(values)
}

pub fn read_grid<F: Real>(path: impl AsRef<Path>) -> Result<HeightGrid<F>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let lines: Vec<&str> = text.lines().collect();
    let h = parse_header(path, &lines)?;
    let values = parse_rows::<F>(path, &lines, &h)?;
    let half = h.cellsize / 2.0;
    let grid = HeightGrid {
        width: h.ncols,
        height: h.nrows,
        cell_size: F::of(h.cellsize),
        origin: (F::of(h.xllcorner + half), F::of(h.yllcorner + half)),
        values,
        nodata: F::of(h.nodata),
    };
    grid.validate()
        .map_err(|e| Error::parse(path, 1, e.to_string()))?;
    Ok(grid)
}

pub fn write_grid<F: Real>(grid: &HeightGrid<F>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    grid.validate()?;
    let half = grid.cell_size.f64() / 2.0;
    let mut out = String::new();
    let _ = writeln!(out, "ncols {}", grid.width);
    let _ = writeln!(out, "nrows {}", grid.height);
    let _ = writeln!(out, "xllcorner {:.6}", grid.origin.0.f64() - half);
    let _ = writeln!(out, "yllcorner {:.6}", grid.origin.1.f64() - half);
    let _ = writeln!(out, "cellsize {:.6}", grid.cell_size.f64());
    let _ = writeln!(out, "NODATA_value {:.6}", grid.nodata.f64());
    for file_row in 0..grid.height {
        let grid_row = grid.height - 1 - file_row;
        for col in 0..grid.width {
            if col > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{:.6}", grid.get(col, grid_row).f64());
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Masks reuse the grid header with cells written as `0`/`1`.
pub fn write_mask(mask: &BinaryMask, cell_size: f64, origin: (f64, f64), path: impl AsRef<Path>) -> Result<()> {
    let grid = HeightGrid::<f64> {
        width: mask.width,
        height: mask.height,
        cell_size,
        origin,
        values: mask.bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
        nodata: -9999.0,
    };
    write_grid(&grid, path)
}

pub fn read_mask(path: impl AsRef<Path>) -> Result<(BinaryMask, f64, (f64, f64))> {
    let grid: HeightGrid<f64> = read_grid(&path)?;
    let mask = BinaryMask {
        width: grid.width,
        height: grid.height,
        bits: grid.values.iter().map(|&v| v != 0.0).collect(),
    };
    Ok((mask, grid.cell_size, grid.origin))
}

/// Label grids: ground sentinel serialized as `-1`.
pub fn write_labels(labels: &LabelGrid, cell_size: f64, origin: (f64, f64), path: impl AsRef<Path>) -> Result<()> {
    let grid = HeightGrid::<f64> {
        width: labels.width,
        height: labels.height,
        cell_size,
        origin,
        values: labels
            .labels
            .iter()
            .map(|&l| if l == GROUND { -1.0 } else { l as f64 })
            .collect(),
        nodata: -9999.0,
    };
    write_grid(&grid, path)
}

pub fn read_labels(path: impl AsRef<Path>) -> Result<LabelGrid> {
    let grid: HeightGrid<f64> = read_grid(&path)?;
    Ok(LabelGrid {
        width: grid.width,
        height: grid.height,
        labels: grid
            .values
            .iter()
            .map(|&v| if v < 0.0 { GROUND } else { v as u32 })
            .collect(),
    })
}

pub fn write_ply<F: Real>(cloud: &PointCloud<F>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    cloud.validate()?;
    let mut out = String::new();
    out.push_str("ply\nformat ascii 1.0\n");
    let _ = writeln!(out, "element vertex {}", cloud.len());
    out.push_str("property double x\nproperty double y\nproperty double z\nend_header\n");
    for p in &cloud.points {
        let _ = writeln!(out, "{} {} {}", p.x.f64(), p.y.f64(), p.z.f64());
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_ply<F: Real>(path: impl AsRef<Path>) -> Result<PointCloud<F>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut vertex_count: Option<usize> = None;
    let mut in_header = true;
    let mut points = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let trimmed = line.trim();
        if in_header {
            if i == 0 && trimmed != "ply" {
                return Err(Error::parse(path, 1, "not a PLY file"));
            }
            if trimmed.starts_with("element vertex") {
                let n = trimmed
                    .split_whitespace()
                    .nth(2)
                    .and_then(|t| t.parse::<usize>().ok())
                    .ok_or_else(|| Error::parse(path, line_no, "bad element vertex line"))?;
                vertex_count = Some(n);
            }
            if trimmed == "end_header" {
                in_header = false;
            }
            continue;
        }
        if trimmed.is_empty() {
            continue;
        }
        let mut coords = [0.0f64; 3];
        let mut it = trimmed.split_whitespace();
        for c in coords.iter_mut() {
            let tok = it
                .next()
                .ok_or_else(|| Error::parse(path, line_no, "expected 3 coordinates"))?;
            *c = tok
                .parse::<f64>()
                .map_err(|_| Error::parse(path, line_no, format!("non-numeric coordinate `{tok}`")))?;
        }
        points.push(Vector3::new(F::of(coords[0]), F::of(coords[1]), F::of(coords[2])));
    }
    let expected = vertex_count.ok_or_else(|| Error::parse(path, 1, "missing element vertex"))?;
    if points.len() != expected {
        return Err(Error::parse(
            path,
            1,
            format!("header declares {expected} vertices, file has {}", points.len()),
        ));
    }
    Ok(PointCloud::new(points))
}

/// Writes `v`/`f` records (1-based indices) with `g` groups on section
/// changes. Returns `(vertex_count, face_count)`.
pub fn write_mesh_obj<F: Real>(mesh: &Mesh<F>, path: impl AsRef<Path>) -> Result<(usize, usize)> {
    let path = path.as_ref();
    mesh.validate()?;
    let mut out = String::new();
    for v in &mesh.vertices {
        let _ = writeln!(out, "v {} {} {}", v.x.f64(), v.y.f64(), v.z.f64());
    }
    let mut current_section: Option<u32> = None;
    for (i, f) in mesh.faces.iter().enumerate() {
        let section = mesh.face_sections.get(i).copied();
        if section.is_some() && section != current_section {
            let _ = writeln!(out, "g section_{}", section.unwrap());
            current_section = section;
        }
        let _ = writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))?;
    Ok((mesh.vertices.len(), mesh.faces.len()))
}
