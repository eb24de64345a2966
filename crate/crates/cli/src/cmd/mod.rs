pub mod coeffs;
pub mod invert;
pub mod loss;
pub mod optimize;
pub mod plot_polys;
pub mod stream_demo;
pub mod verify;
