pub mod expr;
pub mod jet;
pub mod oracle;
pub mod reduction;
pub mod symmetry;
