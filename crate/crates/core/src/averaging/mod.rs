//! Averaging operators: Euclidean sphere means of the fundamental solution
//! and discrete kernels on meshes.

pub mod euclidean;
pub mod kernel;

pub use euclidean::{
    compose_kernels, extract_profile_f, fundamental_solution, radial_green, smoothness_order, sphere_average,
    unit_sphere_area, ComposedProfile, DeformationProfile, EuclideanKernelSpec, RadialLaw, RadialProfile,
};
pub use kernel::{
    build_mesh_kernel, check_lambda_one, regularized_green, restrict_kernel_to_submesh, spectral_regularized_green,
    verify_deformed_gluing, DeformedSplit, KernelMatrix, KernelPart, KernelProfile,
};
