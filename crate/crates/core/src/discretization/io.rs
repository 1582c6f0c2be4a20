//! `DiscreteFunction` persistence.
//!
//! CSV layout: a `x_lo,x_hi,n,topology` header row, the grid descriptor row,
//! then one value per line. Values are written in shortest round-trip form so
//! reading back is bit-exact.
//!
//! Binary layout (little endian): magic `AEDF`, `u32` version, `f64 x_lo`,
//! `f64 x_hi`, `u64 n`, `u8` topology (0 closed, 1 periodic), `n × f64`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{DiscreteFunction, Grid1D, Topology};
use crate::binio::{Reader, Writer};
use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"AEDF";
const VERSION: u32 = 1;

pub(crate) fn grid_to_csv(g: &Grid1D) -> String {
    format!("{:?},{:?},{},{}", g.x_lo(), g.x_hi(), g.len(), g.topology().tag())
}

pub(crate) fn grid_from_csv(line: &str) -> Result<Grid1D> {
    let fields: Vec<&str> = line.trim().split(',').collect();
    if fields.len() != 4 {
        return Err(Error::Format(format!("bad grid descriptor `{line}`")));
    }
    let num = |s: &str| s.parse::<f64>().map_err(|e| Error::Format(format!("`{s}`: {e}")));
    let n = fields[2]
        .parse::<usize>()
        .map_err(|e| Error::Format(format!("`{}`: {e}", fields[2])))?;
    Grid1D::new(num(fields[0])?, num(fields[1])?, n, Topology::from_tag(fields[3])?)
}

pub(crate) fn write_grid<W: Write>(w: &mut Writer<W>, g: &Grid1D) -> std::io::Result<()> {
    w.f64(g.x_lo())?;
    w.f64(g.x_hi())?;
    w.u64(g.len() as u64)?;
    w.u8(match g.topology() {
        Topology::Closed => 0,
        Topology::Periodic => 1,
    })
}

pub(crate) fn read_grid<R: std::io::Read>(r: &mut Reader<R>) -> Result<Grid1D> {
    let lo = r.f64()?;
    let hi = r.f64()?;
    let n = r.u64()? as usize;
    let topology = match r.u8()? {
        0 => Topology::Closed,
        1 => Topology::Periodic,
        t => return Err(Error::Format(format!("unknown topology code {t}"))),
    };
    Grid1D::new(lo, hi, n, topology)
}

pub fn write_function_csv(u: &DiscreteFunction, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut body = String::from("x_lo,x_hi,n,topology\n");
    body.push_str(&grid_to_csv(u.grid()));
    body.push('\n');
    for v in u.values() {
        body.push_str(&format!("{v:?}\n"));
    }
    w.write_all(body.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn read_function_csv(path: &Path) -> Result<DiscreteFunction> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let mut next = || -> Result<Option<String>> {
        lines.next().transpose().map_err(|e| Error::io(path, e))
    };
    let _header = next()?.ok_or_else(|| Error::Format("empty file".into()))?;
    let grid = grid_from_csv(&next()?.ok_or_else(|| Error::Format("missing grid row".into()))?)?;
    let mut values = Vec::with_capacity(grid.len());
    while let Some(line) = next()? {
        if line.trim().is_empty() {
            continue;
        }
        values.push(
            line.trim()
                .parse::<f64>()
                .map_err(|e| Error::Format(format!("`{line}`: {e}")))?,
        );
    }
    DiscreteFunction::new(grid, values)
}

pub fn write_function_binary(u: &DiscreteFunction, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = Writer::new(BufWriter::new(file));
    (|| {
        w.bytes(MAGIC)?;
        w.u32(VERSION)?;
        write_grid(&mut w, u.grid())?;
        w.f64s(u.values())?;
        w.finish().map(|_| ())
    })()
    .map_err(|e| Error::io(path, e))
}

pub fn read_function_binary(path: &Path) -> Result<DiscreteFunction> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = Reader::new(BufReader::new(file));
    r.expect_magic(MAGIC)?;
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let grid = read_grid(&mut r)?;
    let values = r.f64s(grid.len())?;
    DiscreteFunction::new(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::discretize;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn round_trips_are_bit_exact(values in prop::collection::vec(-1e6f64..1e6, 2..40), periodic in any::<bool>()) {
            let g = Grid1D::new(-0.3, 2.7, values.len(), if periodic { Topology::Periodic } else { Topology::Closed }).unwrap();
            let u = DiscreteFunction::new(g, values).unwrap();
            let dir = tempfile::tempdir().unwrap();
            let csv = dir.path().join("u.csv");
            let bin = dir.path().join("u.bin");
            write_function_csv(&u, &csv).unwrap();
            write_function_binary(&u, &bin).unwrap();
            prop_assert_eq!(read_function_csv(&csv).unwrap(), u.clone());
            prop_assert_eq!(read_function_binary(&bin).unwrap(), u);
        }
    }

    #[test]
    fn rejects_foreign_binary() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("junk.bin");
        std::fs::write(&p, b"NOPE0000").unwrap();
        assert!(matches!(read_function_binary(&p), Err(Error::Format(_))));
        let g = Grid1D::closed(0.0, 1.0, 3).unwrap();
        let u = discretize(|x| x, &g).unwrap();
        write_function_binary(&u, &p).unwrap();
        let bytes = std::fs::read(&p).unwrap();
        std::fs::write(&p, &bytes[..bytes.len() - 4]).unwrap();
        assert!(read_function_binary(&p).is_err());
    }
}
