//! System configuration, array responses and channel-parameter generation.

mod config;
mod geometry;
mod realization;

pub use config::{AngleRanges, Interval, NoiseModel, SystemConfig};
pub use geometry::{
    bessel_weights, cascade_ris_derivative, cascade_ris_vector, circ_ris_steering, doppler_shift,
    from_equivalent, harmonic_phase, jacobi_anger_factors, to_equivalent, ula_steering,
    ula_steering_derivative, JacobiAnger, RisGeometry,
};
pub use realization::{
    bs_ris_matrix, cascade_channel_matrix, delay_response, doppler_phase, doppler_response,
    gen_realization, ris_ms_matrix, spatial_steering, ChannelRealization, PathParams,
};
