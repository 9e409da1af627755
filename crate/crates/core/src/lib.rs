//! Task-oriented semantic-loss modelling for bandwidth-constrained
//! Earth-observation links.
//!
//! Accuracy is modelled as a function of compression quality `q` and the
//! actual-to-Shannon SNR ratio `s`, either per `s` level with classic 1-D
//! curve families or jointly with a sum of sigmoid × exponential terms
//! fitted by gradient descent.

pub mod error;
pub mod fit;
pub mod fixtures;
pub mod grid;
pub mod link;
pub mod model;
pub mod surface;

pub use error::{Error, Result};
pub use grid::{load_grid_csv, parse_grid_csv, write_grid_csv, AccuracyGrid, Series1D};
pub use link::{shannon_snr_db, snr_ratio, LinkOperatingPoint};
pub use model::{Family, Model1DParams};
pub use surface::{
    eval_semantic_loss, semantic_loss_gradients, SemanticLossGradient, SemanticLossParams, SurfaceData, Term,
};
