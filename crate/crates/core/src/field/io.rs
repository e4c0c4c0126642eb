//! Field snapshots: a small binary container and a CSV dump.
//!
//! Binary layout (little endian): the 8-byte magic `DISCFLD1`, then `n_r`,
//! `n_theta` and the boundary condition (0 Neumann, 1 Dirichlet) as u64, then
//! the values ring by ring as interleaved re/im f64 pairs.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use super::grid::{BoundaryCondition, GridSpec};
use super::wavefield::WaveField;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"DISCFLD1";

pub fn write_field(field: &WaveField, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    let bc: u64 = match field.grid.bc {
        BoundaryCondition::Neumann => 0,
        BoundaryCondition::Dirichlet => 1,
    };
    for v in [field.grid.n_r as u64, field.grid.n_theta as u64, bc] {
        w.write_all(&v.to_le_bytes())?;
    }
    for z in &field.values {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<WaveField> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let mut word = [0u8; 8];
    let mut next = |r: &mut BufReader<File>| -> Result<u64> {
        r.read_exact(&mut word)?;
        Ok(u64::from_le_bytes(word))
    };
    let n_r = next(&mut r)? as usize;
    let n_theta = next(&mut r)? as usize;
    let bc = match next(&mut r)? {
        0 => BoundaryCondition::Neumann,
        1 => BoundaryCondition::Dirichlet,
        other => return Err(Error::Format(format!("unknown boundary tag {other}"))),
    };
    let grid = GridSpec::new(n_r, n_theta, bc)?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != 16 * grid.len() {
        return Err(Error::Format(format!(
            "expected {} payload bytes, found {}",
            16 * grid.len(),
            bytes.len()
        )));
    }
    let values = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    WaveField::new(grid, values)
}

/// One line per node: `r,theta,re,im`.
pub fn write_field_csv(field: &WaveField, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "r,theta,re,im")?;
    let g = &field.grid;
    for j in 0..g.n_r {
        for k in 0..g.n_theta {
            let z = field.values[g.index(j, k)];
            writeln!(w, "{},{},{},{}", g.r_nodes[j], g.theta_nodes[k], z.re, z.im)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.bin");
        let g = GridSpec::new(16, 20, BoundaryCondition::Dirichlet).unwrap();
        let f = WaveField::random(&g, 9);
        write_field(&f, &path).unwrap();
        assert_eq!(read_field(&path).unwrap(), f);
    }

    #[test]
    fn truncated_file_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.bin");
        let g = GridSpec::new(16, 16, BoundaryCondition::Neumann).unwrap();
        write_field(&WaveField::random(&g, 1), &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 3]).unwrap();
        assert!(matches!(read_field(&path), Err(Error::Format(_))));
    }

    #[test]
    fn csv_has_header_and_all_nodes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let g = GridSpec::new(16, 16, BoundaryCondition::Neumann).unwrap();
        write_field_csv(&WaveField::random(&g, 1), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("r,theta,re,im"));
        assert_eq!(lines.count(), 256);
    }
}
