pub mod algebra;
pub mod fragmentation;
pub mod kalton_roberts;
pub mod kelley;
pub mod lp;
pub mod rational;
