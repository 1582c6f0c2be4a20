//! Reduction checkpoints.
//!
//! Layout (little endian): magic `AERD`, `u32` version, `u8` kind (0 = PCA,
//! 1 = autoencoder), `u64` latent dimension, `f64` input scale, the dataset
//! fingerprint as a length-prefixed string, then the model payload. PCA
//! stores four `u64` sizes, then its mean, components, eigenvalues and singular values as `f64`;
//! an autoencoder stores two network checkpoints (encoder, decoder).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{AutoEncoder, PcaModel};
use crate::binio::{Reader, Writer};
use crate::tensor_nn::{read_mlp, write_mlp, DenseMatrix};
use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"AERD";
const VERSION: u32 = 1;
const KIND_PCA: u8 = 0;
const KIND_AE: u8 = 1;

/// Header shared by every reduction checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionMeta {
    pub latent_dim: usize,
    pub input_scale: f64,
    /// Fingerprint of the dataset the model was fitted on; may be empty.
    pub fingerprint: String,
}

fn write_header<W: Write>(w: &mut Writer<W>, kind: u8, meta: &ReductionMeta) -> std::io::Result<()> {
    w.bytes(MAGIC)?;
    w.u32(VERSION)?;
    w.u8(kind)?;
    w.u64(meta.latent_dim as u64)?;
    w.f64(meta.input_scale)?;
    w.str(&meta.fingerprint)
}

fn read_header<R: Read>(r: &mut Reader<R>, kind: u8) -> Result<ReductionMeta> {
    r.expect_magic(MAGIC)?;
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported reduction checkpoint version {version}")));
    }
    let got = r.u8()?;
    if got != kind {
        return Err(Error::Format(format!("checkpoint holds model kind {got}, expected {kind}")));
    }
    Ok(ReductionMeta {
        latent_dim: r.u64()? as usize,
        input_scale: r.f64()?,
        fingerprint: r.str()?,
    })
}

fn create(path: &Path) -> Result<Writer<BufWriter<File>>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(Writer::new(BufWriter::new(file)))
}

fn open(path: &Path) -> Result<Reader<BufReader<File>>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(Reader::new(BufReader::new(file)))
}

fn bounded(n: u64, what: &str) -> Result<usize> {
    if n > 1 << 28 {
        return Err(Error::Format(format!("implausible {what} {n}")));
    }
    Ok(n as usize)
}

pub(crate) fn write_pca_body<W: Write>(w: &mut Writer<W>, model: &PcaModel) -> std::io::Result<()> {
    w.u64(model.dim() as u64)?;
    w.u64(model.input_dim() as u64)?;
    w.u64(model.n_samples() as u64)?;
    w.u64(model.singular_values().len() as u64)?;
    w.f64s(model.mean())?;
    w.f64s(model.components().as_slice())?;
    w.f64s(model.eigenvalues())?;
    w.f64s(model.singular_values())
}

pub(crate) fn read_pca_body<R: Read>(r: &mut Reader<R>) -> Result<PcaModel> {
    let d = bounded(r.u64()?, "latent dimension")?;
    let dim = bounded(r.u64()?, "input dimension")?;
    let n_samples = bounded(r.u64()?, "sample count")?;
    let n_sv = bounded(r.u64()?, "spectrum length")?;
    let mean = r.f64s(dim)?;
    let components = DenseMatrix::from_vec(dim, d, r.f64s(dim * d)?)?;
    let eigenvalues = r.f64s(d)?;
    let singular_values = r.f64s(n_sv)?;
    PcaModel::from_parts(mean, components, eigenvalues, singular_values, n_samples)
        .map_err(|e| Error::Format(e.to_string()))
}

pub fn save_pca(model: &PcaModel, fingerprint: &str, path: &Path) -> Result<()> {
    let meta = ReductionMeta {
        latent_dim: model.dim(),
        input_scale: 1.0,
        fingerprint: fingerprint.to_string(),
    };
    let mut w = create(path)?;
    write_header(&mut w, KIND_PCA, &meta)
        .and_then(|_| write_pca_body(&mut w, model))
        .and_then(|_| w.finish().map(|_| ()))
        .map_err(|e| Error::io(path, e))
}

pub fn load_pca(path: &Path) -> Result<(PcaModel, ReductionMeta)> {
    let mut r = open(path)?;
    let meta = read_header(&mut r, KIND_PCA)?;
    let model = read_pca_body(&mut r)?;
    if model.dim() != meta.latent_dim {
        return Err(Error::Format(format!(
            "header latent dimension {} but model keeps {}",
            meta.latent_dim,
            model.dim()
        )));
    }
    Ok((model, meta))
}

pub fn save_autoencoder(ae: &AutoEncoder, fingerprint: &str, path: &Path) -> Result<()> {
    let meta = ReductionMeta {
        latent_dim: ae.latent_dim(),
        input_scale: ae.input_scale(),
        fingerprint: fingerprint.to_string(),
    };
    let mut w = create(path)?;
    write_header(&mut w, KIND_AE, &meta)
        .and_then(|_| write_mlp(&mut w, ae.encoder()))
        .and_then(|_| write_mlp(&mut w, ae.decoder()))
        .and_then(|_| w.finish().map(|_| ()))
        .map_err(|e| Error::io(path, e))
}

pub fn load_autoencoder(path: &Path) -> Result<(AutoEncoder, ReductionMeta)> {
    let mut r = open(path)?;
    let meta = read_header(&mut r, KIND_AE)?;
    let encoder = read_mlp(&mut r)?;
    let decoder = read_mlp(&mut r)?;
    let ae = AutoEncoder::new(encoder, decoder, meta.input_scale).map_err(|e| Error::Format(e.to_string()))?;
    if ae.latent_dim() != meta.latent_dim {
        return Err(Error::Format(format!(
            "header latent dimension {} but encoder emits {}",
            meta.latent_dim,
            ae.latent_dim()
        )));
    }
    Ok((ae, meta))
}
