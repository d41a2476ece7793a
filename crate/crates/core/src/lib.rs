pub mod bipartite;
pub mod channels;
pub mod cli;
pub mod error;
pub mod linalg;
pub mod locc;
pub mod opalg;
pub mod qec;
pub mod stabilizer;
