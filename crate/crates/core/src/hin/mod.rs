//! Heterogeneous graph model: ingestion, meta-paths, homogenization and
//! shift operators.

mod graph;
mod homog;
pub mod io;
mod metapath;
mod operator;

pub use graph::{HeteroGraph, Label, NodeType, Relation, Splits};
pub use homog::{degenerate_method1, degenerate_method2, HomoGraph};
pub use io::{load_csv_dir, load_hetero_graph, parse_hetero_graph, save_hetero_graph};
pub use metapath::{enumerate_meta_paths, materialize_meta_path_graph, MetaPath, MetaPathGraph};
pub use operator::{laplacian, OperatorKind, ShiftOperator};
