//! Curve datasets: generation, ingestion, features and splits.

mod cubic;
mod features;
mod generate;
mod io;
mod record;
mod split;

pub use cubic::{cubic_to_weierstrass, gen_pencil_cubic, gen_pencil_cubic_with, PencilCubic, PlaneCubic, Point3, WeierstrassMap, MONOMIALS};
pub use features::{build_feature_matrix, conductor_feature, FeatureMatrix};
pub use generate::{gen_random_weierstrass, generate_custom_dataset, quasi_minimal, GenConfig};
pub use io::{
    ingest_csv, read_aps, read_aps_file, read_curves, write_aps, write_aps_file, write_curves, write_curves_csv,
    IngestOptions, CSV_HEADER,
};
pub use record::CurveRecord;
pub use split::{
    class_weights, merge_binary_labels, merge_binary_records, split_by_conductor, split_dataset, DatasetSplit,
    SplitMode, SplitSpec,
};
