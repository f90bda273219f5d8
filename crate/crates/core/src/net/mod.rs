//! Asymptotic (Chebyshev) nets: flows, the net lattice, the sine-Gordon and
//! area checks, and the Picard existence demo on the disk.

pub mod flow;
pub mod grid;
pub mod picard;

pub use flow::{integrate_flow, Asymptotic, AsymptoticField, FlowResult, LineField};
pub use grid::{
    area_two_ways, build_net, check_f_inverse, connection_eta_residual, flow_commutation, jacobian_data,
    jacobian_det_residual, sine_gordon_residual, AreaReport, InverseReport, JacobianData, NetGrid, NetPoint,
    SineGordonReport,
};
pub use picard::{picard_existence_demo, picard_recentered, sample_fields, PicardCertificate, PicardOptions};
