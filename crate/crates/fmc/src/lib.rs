//! The Functional Machine Calculus: terms, an abstract machine, reduction,
//! simple types with a strong-normalisation measure, machine equivalence, and
//! translations to and from the λ-calculus.

pub mod syntax;
pub mod parser;
pub mod machine;
pub mod types;
pub mod reduction;
pub mod measure;
pub mod gen;
pub mod equivalence;
pub mod bridge;
pub mod cli;
