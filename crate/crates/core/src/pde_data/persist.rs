//! Dataset files.
//!
//! CSV layout: one record per line, tagged by its first field.
//!
//! ```text
//! aenet-dataset,1
//! meta,<family>,<split>,<master_seed>,<sigma>,<noise_seed>,<grf_seed0|>,<grf_seed1|>,<grf_cutoff>,<input_scale>,<output_scale>
//! grid_in,<x_lo>,<x_hi>,<n>,<topology>
//! grid_out,<x_lo>,<x_hi>,<n>,<topology>
//! param,<i>,<a>,<h>,<seed>
//! input,<i>,<values...>
//! clean,<i>,<values...>
//! noisy,<i>,<values...>
//! ```
//!
//! The binary variant (magic `AEDS`) stores the same fields little endian.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use super::dataset::{DatasetMeta, FunctionPairDataset, Split};
use super::families::{Family, IntrinsicParams};
use crate::binio::{Reader, Writer};
use crate::discretization::io::{grid_from_csv, grid_to_csv, read_grid, write_grid};
use crate::discretization::{DiscreteFunction, Grid1D};
use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"AEDS";
const VERSION: u32 = 1;
const CSV_HEADER: &str = "aenet-dataset,1";

fn family_code(f: Family) -> u8 {
    match f {
        Family::Transport => 0,
        Family::Burgers => 1,
        Family::Kdv => 2,
    }
}

fn family_from_code(c: u8) -> Result<Family> {
    Family::ALL
        .get(c as usize)
        .copied()
        .ok_or_else(|| Error::Format(format!("unknown family code {c}")))
}

fn split_from_name(s: &str) -> Result<Split> {
    match s {
        "train" => Ok(Split::Train),
        "test" => Ok(Split::Test),
        other => Err(Error::Format(format!("unknown split `{other}`"))),
    }
}

fn grids(ds: &FunctionPairDataset) -> Result<(Grid1D, Grid1D)> {
    ds.validate()?;
    match (ds.grid_in(), ds.grid_out()) {
        (Some(a), Some(b)) => Ok((*a, *b)),
        _ => Err(Error::Empty("cannot persist an empty dataset".into())),
    }
}

fn encode<W: Write>(w: &mut Writer<W>, ds: &FunctionPairDataset) -> Result<()> {
    let (gi, go) = grids(ds)?;
    let m = &ds.meta;
    let io = |e| Error::Format(format!("write failed: {e}"));
    (|| -> std::io::Result<()> {
        w.bytes(MAGIC)?;
        w.u32(VERSION)?;
        w.u8(family_code(m.family))?;
        w.u8(matches!(m.split, Split::Test) as u8)?;
        w.u64(m.master_seed)?;
        w.f64(m.noise_sigma)?;
        w.u64(m.noise_seed)?;
        match m.grf_seeds {
            Some([a, b]) => {
                w.u8(1)?;
                w.u64(a)?;
                w.u64(b)?;
            }
            None => w.u8(0)?,
        }
        w.u64(m.grf_cutoff as u64)?;
        write_grid(w, &gi)?;
        write_grid(w, &go)?;
        w.u64(ds.len() as u64)?;
        for (p, s) in ds.params.iter().zip(&ds.sample_seeds) {
            w.f64(p.a)?;
            w.f64(p.h)?;
            w.u64(*s)?;
        }
        for side in [&ds.inputs, &ds.clean_outputs, &ds.noisy_outputs] {
            for f in side {
                w.f64s(f.values())?;
            }
        }
        Ok(())
    })()
    .map_err(io)
}

fn decode<R: Read>(r: &mut Reader<R>) -> Result<FunctionPairDataset> {
    r.expect_magic(MAGIC)?;
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported dataset version {version}")));
    }
    let family = family_from_code(r.u8()?)?;
    let split = if r.u8()? == 1 { Split::Test } else { Split::Train };
    let master_seed = r.u64()?;
    let noise_sigma = r.f64()?;
    let noise_seed = r.u64()?;
    let grf_seeds = match r.u8()? {
        0 => None,
        _ => Some([r.u64()?, r.u64()?]),
    };
    let grf_cutoff = r.u64()? as usize;
    let gi = read_grid(r)?;
    let go = read_grid(r)?;
    let n = r.u64()? as usize;
    let mut params = Vec::with_capacity(n.min(1 << 20));
    let mut sample_seeds = Vec::with_capacity(n.min(1 << 20));
    for _ in 0..n {
        let a = r.f64()?;
        let h = r.f64()?;
        params.push(IntrinsicParams { family, a, h });
        sample_seeds.push(r.u64()?);
    }
    let mut side = |g: &Grid1D| -> Result<Vec<DiscreteFunction>> {
        (0..n).map(|_| DiscreteFunction::new(*g, r.f64s(g.len())?)).collect()
    };
    let inputs = side(&gi)?;
    let clean_outputs = side(&go)?;
    let noisy_outputs = side(&go)?;
    let ds = FunctionPairDataset {
        meta: DatasetMeta {
            family,
            split,
            master_seed,
            noise_sigma,
            noise_seed,
            grf_seeds,
            grf_cutoff,
        },
        params,
        sample_seeds,
        inputs,
        clean_outputs,
        noisy_outputs,
    };
    ds.validate()?;
    Ok(ds)
}

pub fn write_dataset_binary(ds: &FunctionPairDataset, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = Writer::new(BufWriter::new(file));
    encode(&mut w, ds)?;
    w.finish().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn read_dataset_binary(path: &Path) -> Result<FunctionPairDataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    decode(&mut Reader::new(BufReader::new(file)))
}

/// SHA-256 of the binary encoding, as lowercase hex.
pub fn dataset_fingerprint(ds: &FunctionPairDataset) -> Result<String> {
    let mut w = Writer::new(Vec::new());
    encode(&mut w, ds)?;
    let bytes = w.finish().map_err(|e| Error::Format(e.to_string()))?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(",")
}

pub fn write_dataset_csv(ds: &FunctionPairDataset, path: &Path) -> Result<()> {
    let (gi, go) = grids(ds)?;
    let m = &ds.meta;
    let (s0, s1) = match m.grf_seeds {
        Some([a, b]) => (a.to_string(), b.to_string()),
        None => (String::new(), String::new()),
    };
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    out.push_str(&format!(
        "meta,{},{},{},{:?},{},{},{},{},{:?},{:?}\n",
        m.family,
        m.split.name(),
        m.master_seed,
        m.noise_sigma,
        m.noise_seed,
        s0,
        s1,
        m.grf_cutoff,
        ds.input_scale(),
        ds.output_scale()
    ));
    out.push_str(&format!("grid_in,{}\n", grid_to_csv(&gi)));
    out.push_str(&format!("grid_out,{}\n", grid_to_csv(&go)));
    for (i, (p, s)) in ds.params.iter().zip(&ds.sample_seeds).enumerate() {
        out.push_str(&format!("param,{i},{:?},{:?},{s}\n", p.a, p.h));
    }
    for (tag, side) in [("input", &ds.inputs), ("clean", &ds.clean_outputs), ("noisy", &ds.noisy_outputs)] {
        for (i, f) in side.iter().enumerate() {
            out.push_str(&format!("{tag},{i},{}\n", join(f.values())));
        }
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(out.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

fn parse<T: std::str::FromStr>(s: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.trim().parse().map_err(|e| Error::Format(format!("`{s}`: {e}")))
}

pub fn read_dataset_csv(path: &Path) -> Result<FunctionPairDataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut meta = None;
    let (mut gi, mut go) = (None, None);
    let mut params = Vec::new();
    let mut sample_seeds = Vec::new();
    let mut sides: [Vec<Vec<f64>>; 3] = Default::default();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if lineno == 0 {
            if line.trim() != CSV_HEADER {
                return Err(Error::Format(format!("not a dataset file: `{line}`")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let (tag, rest) = line.split_once(',').unwrap_or((line.as_str(), ""));
        match tag {
            "meta" => {
                let f: Vec<&str> = rest.split(',').collect();
                if f.len() != 10 {
                    return Err(Error::Format(format!("bad meta row `{line}`")));
                }
                let grf_seeds = if f[5].is_empty() {
                    None
                } else {
                    Some([parse(f[5])?, parse(f[6])?])
                };
                meta = Some(DatasetMeta {
                    family: Family::from_name(f[0]).map_err(|e| Error::Format(e.to_string()))?,
                    split: split_from_name(f[1])?,
                    master_seed: parse(f[2])?,
                    noise_sigma: parse(f[3])?,
                    noise_seed: parse(f[4])?,
                    grf_seeds,
                    grf_cutoff: parse(f[7])?,
                });
            }
            "grid_in" => gi = Some(grid_from_csv(rest)?),
            "grid_out" => go = Some(grid_from_csv(rest)?),
            "param" => {
                let f: Vec<&str> = rest.split(',').collect();
                if f.len() != 4 {
                    return Err(Error::Format(format!("bad param row `{line}`")));
                }
                let family = meta.as_ref().ok_or_else(|| Error::Format("param before meta".into()))?.family;
                params.push(IntrinsicParams { family, a: parse(f[1])?, h: parse(f[2])? });
                sample_seeds.push(parse(f[3])?);
            }
            "input" | "clean" | "noisy" => {
                let k = ["input", "clean", "noisy"].iter().position(|t| *t == tag).unwrap_or(0);
                let mut fields = rest.split(',');
                let _index = fields.next();
                sides[k].push(fields.map(parse).collect::<Result<Vec<f64>>>()?);
            }
            other => return Err(Error::Format(format!("unknown record `{other}`"))),
        }
    }
    let meta = meta.ok_or_else(|| Error::Format("missing meta row".into()))?;
    let gi = gi.ok_or_else(|| Error::Format("missing grid_in row".into()))?;
    let go = go.ok_or_else(|| Error::Format("missing grid_out row".into()))?;
    let [inputs, clean, noisy] = sides;
    let build = |g: Grid1D, rows: Vec<Vec<f64>>| -> Result<Vec<DiscreteFunction>> {
        rows.into_iter().map(|v| DiscreteFunction::new(g, v)).collect()
    };
    let ds = FunctionPairDataset {
        meta,
        params,
        sample_seeds,
        inputs: build(gi, inputs)?,
        clean_outputs: build(go, clean)?,
        noisy_outputs: build(go, noisy)?,
    };
    ds.validate()?;
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde_data::make_dataset;

    #[test]
    fn round_trips_are_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        for family in Family::ALL {
            let g = family.grid(32).unwrap();
            let (train, _) = make_dataset(family, 4, 1, &g, &g, 0.03, 11).unwrap();
            let csv = dir.path().join("d.csv");
            write_dataset_csv(&train, &csv).unwrap();
            assert_eq!(read_dataset_csv(&csv).unwrap(), train);
            let bin = dir.path().join("d.bin");
            write_dataset_binary(&train, &bin).unwrap();
            assert_eq!(read_dataset_binary(&bin).unwrap(), train);
        }
    }

    #[test]
    fn fingerprint_tracks_content() {
        let g = Family::Transport.grid(32).unwrap();
        let (a, _) = make_dataset(Family::Transport, 4, 1, &g, &g, 0.0, 1).unwrap();
        let (b, _) = make_dataset(Family::Transport, 4, 1, &g, &g, 0.0, 2).unwrap();
        assert_eq!(dataset_fingerprint(&a).unwrap(), dataset_fingerprint(&a).unwrap());
        assert_ne!(dataset_fingerprint(&a).unwrap(), dataset_fingerprint(&b).unwrap());
        assert_eq!(dataset_fingerprint(&a).unwrap().len(), 64);
    }

    #[test]
    fn garbage_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        std::fs::write(&p, "hello\n").unwrap();
        assert!(matches!(read_dataset_csv(&p), Err(Error::Format(_))));
        std::fs::write(&p, b"AEDSxx").unwrap();
        assert!(matches!(read_dataset_binary(&p), Err(Error::Format(_))));
    }
}
