//! Trained model bundles.
//!
//! Layout (little endian): magic `AEOP`, `u32` version, `u8` method
//! (0 = AENet, 1 = PCANet, 2 = DeepONet), the dataset fingerprint as a
//! length-prefixed string, the input and output grids (`f64` ends, `u64`
//! node count, topology tag), two `f64` scaling factors, then the method
//! payload: encoder and Γ checkpoints for AENet; input PCA, output PCA and
//! core checkpoint for PCANet; `f64` bias, branch and trunk checkpoints for
//! DeepONet.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{AeNetModel, DeepONetModel, Method, OperatorModel, PcaNetModel};
use crate::binio::{Reader, Writer};
use crate::discretization::{Grid1D, Topology};
use crate::model_reduction::persist::{read_pca_body, write_pca_body};
use crate::tensor_nn::{read_mlp, write_mlp, DenseMatrix};
use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"AEOP";
const VERSION: u32 = 1;

/// Any of the trained operator models.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyModel {
    AeNet(AeNetModel),
    PcaNet(PcaNetModel),
    DeepONet(DeepONetModel),
}

impl AnyModel {
    fn inner(&self) -> &dyn OperatorModel {
        match self {
            AnyModel::AeNet(m) => m,
            AnyModel::PcaNet(m) => m,
            AnyModel::DeepONet(m) => m,
        }
    }
}

impl OperatorModel for AnyModel {
    fn method(&self) -> Method {
        self.inner().method()
    }

    fn grid_in(&self) -> &Grid1D {
        self.inner().grid_in()
    }

    fn grid_out(&self) -> &Grid1D {
        self.inner().grid_out()
    }

    fn predict_rows(&self, inputs: &DenseMatrix<f64>) -> Result<DenseMatrix<f64>> {
        self.inner().predict_rows(inputs)
    }
}

impl From<AeNetModel> for AnyModel {
    fn from(m: AeNetModel) -> Self {
        AnyModel::AeNet(m)
    }
}

impl From<PcaNetModel> for AnyModel {
    fn from(m: PcaNetModel) -> Self {
        AnyModel::PcaNet(m)
    }
}

impl From<DeepONetModel> for AnyModel {
    fn from(m: DeepONetModel) -> Self {
        AnyModel::DeepONet(m)
    }
}

fn write_grid<W: Write>(w: &mut Writer<W>, g: &Grid1D) -> std::io::Result<()> {
    w.f64(g.x_lo())?;
    w.f64(g.x_hi())?;
    w.u64(g.len() as u64)?;
    w.str(g.topology().tag())
}

fn read_grid<R: Read>(r: &mut Reader<R>) -> Result<Grid1D> {
    let (lo, hi, n) = (r.f64()?, r.f64()?, r.u64()?);
    let topo = Topology::from_tag(&r.str()?)?;
    if n > 1 << 28 {
        return Err(Error::Format(format!("implausible grid size {n}")));
    }
    Grid1D::new(lo, hi, n as usize, topo).map_err(|e| Error::Format(e.to_string()))
}

fn encode<W: Write>(w: &mut Writer<W>, model: &AnyModel, fingerprint: &str) -> std::io::Result<()> {
    w.bytes(MAGIC)?;
    w.u32(VERSION)?;
    let tag = match model {
        AnyModel::AeNet(_) => 0,
        AnyModel::PcaNet(_) => 1,
        AnyModel::DeepONet(_) => 2,
    };
    w.u8(tag)?;
    w.str(fingerprint)?;
    write_grid(w, model.grid_in())?;
    write_grid(w, model.grid_out())?;
    match model {
        AnyModel::AeNet(m) => {
            w.f64(m.input_scale())?;
            w.f64(m.output_scale())?;
            write_mlp(w, m.encoder())?;
            write_mlp(w, m.gamma())
        }
        AnyModel::PcaNet(m) => {
            let (a, b) = m.latent_scales();
            w.f64(a)?;
            w.f64(b)?;
            write_pca_body(w, m.input_pca())?;
            write_pca_body(w, m.output_pca())?;
            write_mlp(w, m.core())
        }
        AnyModel::DeepONet(m) => {
            let (a, b) = m.scales();
            w.f64(a)?;
            w.f64(b)?;
            w.f64(m.bias() as f64)?;
            write_mlp(w, m.branch())?;
            write_mlp(w, m.trunk())
        }
    }
}

fn decode<R: Read>(r: &mut Reader<R>) -> Result<(AnyModel, String)> {
    r.expect_magic(MAGIC)?;
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported model bundle version {version}")));
    }
    let tag = r.u8()?;
    let fingerprint = r.str()?;
    let (gin, gout) = (read_grid(r)?, read_grid(r)?);
    let (a, b) = (r.f64()?, r.f64()?);
    let bad = |e: Error| Error::Format(e.to_string());
    let model = match tag {
        0 => AeNetModel::new(read_mlp(r)?, read_mlp(r)?, a, b, gin, gout).map_err(bad)?.into(),
        1 => {
            let pin = read_pca_body(r)?;
            let pout = read_pca_body(r)?;
            PcaNetModel::new(pin, pout, read_mlp(r)?, a, b, gin, gout).map_err(bad)?.into()
        }
        2 => {
            let bias = r.f64()? as f32;
            DeepONetModel::new(read_mlp(r)?, read_mlp(r)?, bias, a, b, gin, gout)
                .map_err(bad)?
                .into()
        }
        t => return Err(Error::Format(format!("unknown model tag {t}"))),
    };
    Ok((model, fingerprint))
}

pub fn save_model(model: &AnyModel, fingerprint: &str, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = Writer::new(BufWriter::new(file));
    encode(&mut w, model, fingerprint)
        .and_then(|_| w.finish().map(|_| ()))
        .map_err(|e| Error::io(path, e))
}

/// The model and the fingerprint of its training set.
pub fn load_model(path: &Path) -> Result<(AnyModel, String)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    decode(&mut Reader::new(BufReader::new(file)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator_learning::{train_deeponet, train_pcanet, DeepONetArch};
    use crate::pde_data::{make_dataset, Family};
    use crate::tensor_nn::{Mlp, TrainConfig};

    #[test]
    fn bundles_round_trip() {
        let g = Family::Transport.grid(17).unwrap();
        let (tr, te) = make_dataset(Family::Transport, 8, 2, &g, &g, 0.0, 4).unwrap();
        let cfg = TrainConfig {
            epochs: 1,
            batch_size: 4,
            ..Default::default()
        };
        let models: Vec<AnyModel> = vec![
            AeNetModel::new(Mlp::init(&[17, 5, 2], 1).unwrap(), Mlp::init(&[2, 5, 17], 2).unwrap(), 0.5, 2.0, g, g)
                .unwrap()
                .into(),
            train_pcanet(&tr, 2, 40, &[6], &cfg).unwrap().0.into(),
            train_deeponet(&tr, 3, &DeepONetArch::uniform(4), &cfg).unwrap().0.into(),
        ];
        let dir = tempfile::tempdir().unwrap();
        let x = te.input_matrix().unwrap();
        for (i, m) in models.iter().enumerate() {
            let p = dir.path().join(format!("m{i}.bin"));
            save_model(m, "fp", &p).unwrap();
            let (back, fp) = load_model(&p).unwrap();
            assert_eq!(&back, m);
            assert_eq!(fp, "fp");
            assert_eq!(back.predict_batch(&x).unwrap(), m.predict_batch(&x).unwrap());
        }
        let p = dir.path().join("junk.bin");
        std::fs::write(&p, b"AEOP\x01\x00\x00\x00\x07").unwrap();
        assert!(matches!(load_model(&p), Err(Error::Format(_))));
    }
}
