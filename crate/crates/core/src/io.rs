//! File formats: JSON ensembles, the `ZBWGRID v1` grid text format and CSV
//! tables.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::density::{DensityGrid, GridSpec};
use crate::dirac_beat::{CellEnsemble, MomentumCell};
use crate::error::{Result, ZbwError};
use crate::kinematics::OscillationMode;

pub const GRID_MAGIC: &str = "ZBWGRID";
pub const GRID_VERSION: &str = "v1";

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ZbwError + '_ {
    move |source| ZbwError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn format_err(path: &Path, message: impl Into<String>) -> ZbwError {
    ZbwError::Format {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

/// One momentum cell as stored in an ensemble file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub p: [f64; 3],
    pub sigma: f64,
    pub a: [[f64; 2]; 4],
    pub b: [[f64; 2]; 4],
}

impl CellRecord {
    pub fn from_cell(cell: &MomentumCell) -> Self {
        let pack = |s: &[Complex64; 4]| s.map(|z| [z.re, z.im]);
        CellRecord {
            p: cell.p,
            sigma: cell.sigma,
            a: pack(&cell.a),
            b: pack(&cell.b),
        }
    }

    pub fn to_cell(&self, consts: &PhysicalConstants) -> Result<MomentumCell> {
        let unpack = |s: &[[f64; 2]; 4]| s.map(|[re, im]| Complex64::new(re, im));
        MomentumCell::new(
            self.p,
            self.sigma,
            unpack(&self.a),
            unpack(&self.b),
            consts.m_e,
            consts,
        )
    }
}

pub fn read_cell_ensemble(path: &Path, consts: &PhysicalConstants) -> Result<CellEnsemble> {
    let file = File::open(path).map_err(io_err(path))?;
    let records: Vec<CellRecord> = serde_json::from_reader(BufReader::new(file))
        .map_err(|e| format_err(path, e.to_string()))?;
    let cells = records
        .iter()
        .map(|r| r.to_cell(consts))
        .collect::<Result<Vec<_>>>()?;
    CellEnsemble::new(cells, *consts)
}

pub fn write_cell_ensemble(path: &Path, ensemble: &CellEnsemble) -> Result<()> {
    let records: Vec<_> = ensemble.cells().iter().map(CellRecord::from_cell).collect();
    let file = File::create(path).map_err(io_err(path))?;
    serde_json::to_writer_pretty(BufWriter::new(file), &records)?;
    Ok(())
}

pub fn read_modes(path: &Path) -> Result<Vec<OscillationMode>> {
    let file = File::open(path).map_err(io_err(path))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|e| format_err(path, e.to_string()))
}

/// Writes the `ZBWGRID v1` text format. Floats use the shortest
/// representation that round-trips.
pub fn write_grid<W: Write>(mut out: W, grid: &DensityGrid) -> std::io::Result<()> {
    let s = grid.spec();
    writeln!(
        out,
        "{GRID_MAGIC} {GRID_VERSION} {} {} {} {:e} {:e} {:e} {:e} {:e}",
        s.n[0],
        s.n[1],
        s.n[2],
        s.origin[0],
        s.origin[1],
        s.origin[2],
        s.spacing,
        grid.total_charge()
    )?;
    for (idx, q) in grid.cells() {
        writeln!(out, "{} {} {} {:e}", idx[0], idx[1], idx[2], q)?;
    }
    Ok(())
}

pub fn save_grid(path: &Path, grid: &DensityGrid) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut out = BufWriter::new(file);
    write_grid(&mut out, grid).map_err(io_err(path))?;
    out.flush().map_err(io_err(path))
}

pub fn parse_grid<R: BufRead>(input: R, path: &Path) -> Result<DensityGrid> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| format_err(path, "empty grid file"))?
        .map_err(io_err(path))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 10 || fields[0] != GRID_MAGIC || fields[1] != GRID_VERSION {
        return Err(format_err(
            path,
            format!(
                "expected header `{GRID_MAGIC} {GRID_VERSION} nx ny nz ox oy oz h total_charge`"
            ),
        ));
    }
    let int = |s: &str| {
        s.parse::<usize>()
            .map_err(|e| format_err(path, format!("{s:?}: {e}")))
    };
    let float = |s: &str| {
        s.parse::<f64>()
            .map_err(|e| format_err(path, format!("{s:?}: {e}")))
    };
    let n = [int(fields[2])?, int(fields[3])?, int(fields[4])?];
    let origin = [float(fields[5])?, float(fields[6])?, float(fields[7])?];
    let spec = GridSpec::new(n, origin, float(fields[8])?)?;
    let total_charge = float(fields[9])?;

    let mut cells = BTreeMap::new();
    for (lineno, line) in lines.enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 4 {
            return Err(format_err(
                path,
                format!("line {}: expected `ix iy iz q`", lineno + 2),
            ));
        }
        let idx = [int(f[0])?, int(f[1])?, int(f[2])?];
        if cells.insert(idx, float(f[3])?).is_some() {
            return Err(format_err(
                path,
                format!("line {}: duplicate cell {idx:?}", lineno + 2),
            ));
        }
    }
    DensityGrid::new(spec, cells, total_charge)
}

pub fn load_grid(path: &Path) -> Result<DensityGrid> {
    let file = File::open(path).map_err(io_err(path))?;
    parse_grid(BufReader::new(file), path)
}

/// CSV with a one-line schema comment, a header row and `{:e}` floats.
pub fn write_csv(
    path: &Path,
    schema: &str,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<f64>>,
) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut out = BufWriter::new(file);
    let emit = || -> std::io::Result<()> {
        writeln!(out, "# {schema}")?;
        writeln!(out, "{}", header.join(","))?;
        for row in rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        out.flush()
    };
    emit().map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    const K: PhysicalConstants = PhysicalConstants::CGS;

    #[test]
    fn rejects_bad_header() {
        let p = Path::new("mem");
        assert!(parse_grid("GRID v1 1 1 1 0 0 0 1 -1\n".as_bytes(), p).is_err());
        assert!(parse_grid("ZBWGRID v2 1 1 1 0 0 0 1 -1\n".as_bytes(), p).is_err());
        assert!(parse_grid("".as_bytes(), p).is_err());
    }

    #[test]
    fn rejects_cells_outside_or_duplicated() {
        let p = Path::new("mem");
        let text = "ZBWGRID v1 2 2 2 0e0 0e0 0e0 1e0 -2e0\n0 0 0 -1e0\n2 0 0 -1e0\n";
        assert!(parse_grid(text.as_bytes(), p).is_err());
        let text = "ZBWGRID v1 2 2 2 0e0 0e0 0e0 1e0 -2e0\n0 0 0 -1e0\n0 0 0 -1e0\n";
        assert!(parse_grid(text.as_bytes(), p).is_err());
    }

    #[test]
    fn cell_record_round_trip() {
        let ens = CellEnsemble::gaussian_ball(3, 1e-17, 8, K).unwrap();
        for cell in ens.cells() {
            let back = CellRecord::from_cell(cell).to_cell(&K).unwrap();
            assert_eq!(&back, cell);
        }
    }

    proptest! {
        #[test]
        fn grid_text_round_trip(
            cells in proptest::collection::btree_map(proptest::array::uniform3(0usize..5), 1e-3f64..1.0, 1..30),
            origin in proptest::array::uniform3(-1e-10f64..1e-10),
            h in 1e-14f64..1e-10,
        ) {
            let spec = GridSpec::new([5; 3], origin, h).unwrap();
            let total: f64 = cells.values().sum();
            let grid = DensityGrid::new(spec, cells, total).unwrap();
            let mut buf = Vec::new();
            write_grid(&mut buf, &grid).unwrap();
            let back = parse_grid(buf.as_slice(), Path::new("mem")).unwrap();
            prop_assert_eq!(back, grid);
        }
    }
}
