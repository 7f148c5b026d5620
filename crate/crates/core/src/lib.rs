pub mod absinv;
pub mod epidemic;
pub mod error;
pub mod experiments;
pub mod expm;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod mapeq;
pub mod markov;
pub mod networks;
pub mod optimizer;
pub mod partition;
