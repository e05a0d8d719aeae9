//! Models, local training and conversion to flat update vectors.

mod model;
mod train;

pub use model::{
    build_model, evaluate, flatten, loss_and_gradient, unflatten, Architecture, Layer, ModelParams,
};
pub use train::{train_local, BatchEntry, BatchSampler, FlatUpdate, TrainerConfig};
