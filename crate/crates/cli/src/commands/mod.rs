//! One module per command family; each public function is the body of a
//! subcommand and returns `anyhow::Result` so `main` owns the exit code.

pub mod corpus;
pub mod evalcmd;
pub mod export;
pub mod gen;
pub mod gradcheck;
pub mod traincmd;
