//! Low-rank decompositions of the received-signal tensor.

mod admm;
mod cpals;
mod factors;
mod hooi;
mod params;
mod stdce;

pub use admm::{dlr4dtd, objective, soft_threshold, AdmmState, StopReason};
pub use cpals::{cp_als, CpAlsOptions};
pub use factors::{slot_rotation, FactorSet};
pub use hooi::{hooi, Tucker};
pub use params::AdmmParams;
pub use stdce::{fourd_stdce, slot_subcarrier_matrix, smoothing_window, solve_khatri_rao_rank1, spatial_smoothing};
