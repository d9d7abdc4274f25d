pub mod fd;
pub mod grid;
