pub mod app;
pub mod chains;
pub mod classes;
pub mod douglas;
pub mod gallery;
pub mod harness;
pub mod numeric;
pub mod shifts;
