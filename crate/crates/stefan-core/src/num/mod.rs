//! Small numerical building blocks shared by the physics modules.

pub mod mesh;
pub mod quad;
pub mod roots;
pub mod special;
pub mod tridiag;
