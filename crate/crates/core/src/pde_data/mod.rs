//! Initial-condition families, random fields, PDE solvers and datasets.
//!
//! Three solution operators are provided: transport `u_t = −u_x` on `[0, 1]`
//! (solved exactly), viscous Burgers' `u_t = ν u_xx − u u_x` on the periodic
//! unit interval and KdV `u_t = −u_xxx − u u_x` on the periodic interval
//! `[0, 6)`, the last two by a Fourier ETDRK4 integrator.

mod dataset;
mod families;
mod grf;
mod persist;
mod spectral;
mod transport;

pub use dataset::{add_noise, make_dataset, DataGenerator, DatasetMeta, FunctionPairDataset, PdeSettings, Split};
pub use families::{hat, kdv_ic, transport_ic, Family, IntrinsicParams, HAT_WIDTH};
pub use grf::{burgers_ic, sample_grf, sample_grf_series, GrfSpec, TrigSeries};
pub use persist::{dataset_fingerprint, read_dataset_binary, read_dataset_csv, write_dataset_binary, write_dataset_csv};
pub use spectral::{solve_burgers, solve_kdv, Etdrk4};
pub use transport::{shift_samples, solve_transport, TRANSPORT_TIME};
