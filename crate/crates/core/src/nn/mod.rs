//! Small sequential networks with hand-written backpropagation.

mod cutoffs;
mod layers;
mod loss;
mod metrics;
mod model;
mod optim;
mod search;
mod tensor;
mod train;

pub use cutoffs::{extract_cutoffs, write_cutoffs_csv, CutoffRow};
pub use layers::{
    conv1d_backward, conv1d_forward, conv_out_len, dropout, relu, BatchNorm1d, Conv1d, Dense, Layer, Mode, Param,
    Standardize,
};
pub use loss::{cross_entropy_weighted, softmax};
pub use metrics::{binary_mcc, confusion_and_mcc, rk_statistic, Metrics};
pub use model::{argmax, build_cnn, build_fcnn, default_l2, Arch, CnnConfig, Model, CNN_CHANNELS, FCNN_HIDDEN};
pub use optim::{adam_step, one_cycle, AdamConfig, AdamState};
pub use search::{best_trial, random_search, SearchSpace, Trial};
pub use tensor::Tensor;
pub use train::{evaluate, train, EpochRecord, History, Samples, TrainConfig};
