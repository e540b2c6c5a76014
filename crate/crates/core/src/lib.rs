pub mod cli;
pub mod denot;
pub mod gen;
pub mod opsem;
pub mod qstate;
pub mod syntax;
pub mod typing;
pub mod vna;
