pub mod character;
pub mod checks;
pub mod format;
pub mod linalg;
pub mod model;
pub mod polyhedron;
pub mod quantize;
