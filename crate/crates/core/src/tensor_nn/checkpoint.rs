//! Network checkpoints and loss histories.
//!
//! Binary layout (little endian): magic `AEMP`, `u32` version, `u8` float
//! width in bytes, `u32` number of dims, the dims as `u64`, then every
//! parameter in storage order at the recorded width.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::matrix::Real;
use super::mlp::Mlp;
use crate::binio::{Reader, Writer};
use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"AEMP";
const VERSION: u32 = 1;

pub(crate) fn write_mlp<T: Real, W: Write>(w: &mut Writer<W>, net: &Mlp<T>) -> std::io::Result<()> {
    w.bytes(MAGIC)?;
    w.u32(VERSION)?;
    w.u8(T::WIDTH as u8)?;
    w.u32(net.dims().len() as u32)?;
    for &d in net.dims() {
        w.u64(d as u64)?;
    }
    if T::WIDTH == 4 {
        let vs: Vec<f32> = net.params().iter().map(|v| v.as_f64() as f32).collect();
        w.f32s(&vs)
    } else {
        let vs: Vec<f64> = net.params().iter().map(|v| v.as_f64()).collect();
        w.f64s(&vs)
    }
}

pub(crate) fn read_mlp<T: Real, R: Read>(r: &mut Reader<R>) -> Result<Mlp<T>> {
    r.expect_magic(MAGIC)?;
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported checkpoint version {version}")));
    }
    let width = r.u8()?;
    let ndims = r.u32()? as usize;
    if ndims > 1024 {
        return Err(Error::Format(format!("implausible layer count {ndims}")));
    }
    let dims = (0..ndims).map(|_| r.u64().map(|d| d as usize)).collect::<Result<Vec<_>>>()?;
    let count: usize = dims.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
    let params: Vec<T> = match width {
        4 => r.f32s(count)?.into_iter().map(|v| T::of_f64(v as f64)).collect(),
        8 => r.f64s(count)?.into_iter().map(T::of_f64).collect(),
        w => return Err(Error::Format(format!("unsupported float width {w}"))),
    };
    Mlp::from_params(&dims, params).map_err(|e| Error::Format(e.to_string()))
}

pub fn save_mlp<T: Real>(net: &Mlp<T>, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = Writer::new(BufWriter::new(file));
    write_mlp(&mut w, net)
        .and_then(|_| w.finish().map(|_| ()))
        .map_err(|e| Error::io(path, e))
}

pub fn load_mlp<T: Real>(path: &Path) -> Result<Mlp<T>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_mlp(&mut Reader::new(BufReader::new(file)))
}

/// Writes `epoch,loss` rows.
pub fn write_loss_history(history: &[f64], path: &Path) -> Result<()> {
    let mut body = String::from("epoch,loss\n");
    for (i, l) in history.iter().enumerate() {
        body.push_str(&format!("{i},{l:?}\n"));
    }
    std::fs::write(path, body).map_err(|e| Error::io(path, e))
}

pub fn read_loss_history(path: &Path) -> Result<Vec<f64>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let loss = line
            .split(',')
            .nth(1)
            .ok_or_else(|| Error::Format(format!("bad loss row `{line}`")))?;
        out.push(loss.trim().parse().map_err(|e| Error::Format(format!("`{loss}`: {e}")))?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_both_widths() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("net.bin");
        let a = Mlp::<f64>::init(&[3, 5, 2], 8).unwrap();
        save_mlp(&a, &p).unwrap();
        assert_eq!(load_mlp::<f64>(&p).unwrap(), a);
        let b = Mlp::<f32>::init(&[3, 5, 2], 8).unwrap();
        save_mlp(&b, &p).unwrap();
        assert_eq!(load_mlp::<f32>(&p).unwrap(), b);
    }

    #[test]
    fn truncated_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("net.bin");
        save_mlp(&Mlp::<f64>::init(&[3, 5, 2], 8).unwrap(), &p).unwrap();
        let bytes = std::fs::read(&p).unwrap();
        std::fs::write(&p, &bytes[..bytes.len() - 3]).unwrap();
        assert!(matches!(load_mlp::<f64>(&p), Err(Error::Format(_))));
    }

    #[test]
    fn history_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("loss.csv");
        let h = vec![1.5, 0.25, 1e-7 / 3.0];
        write_loss_history(&h, &p).unwrap();
        assert_eq!(read_loss_history(&p).unwrap(), h);
    }
}
