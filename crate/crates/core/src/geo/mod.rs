//! Geometric equivariance: E(3)-equivariant message passing on point graphs
//! and gauge-equivariant convolution on meshes.

mod egnn;
mod gauge;
mod kernel;

pub use egnn::{e3_transform, egnn_layer, random_orthogonal, EgnnParams, GeometricGraph, Rotation3};
pub use gauge::{
    angle_defect, corner_angle, enclosed_angle_defect, gauge_transform, holonomy, one_ring_log_map, tangent_frames, transport_angles, wrap_pi, Connection,
    GaugeFrameField,
};
pub use kernel::{gauge_conv, kernel_constraint_basis, FeatureType, GaugeKernel};
