pub mod braid;
pub mod cpoly;
pub mod escape;
pub mod factory;
pub mod julia;
pub mod monodromy;
pub mod skewparam;
