//! Dataset groups, stratified splits, model evaluation and the experiment
//! tables.

pub mod bins;
mod experiment;
mod group;
mod pipeline;
mod report;

pub use experiment::{
    evaluate_algorithms, run_group_experiment, run_label_fraction_experiment, ExperimentConfig, ExternalPool, PreparedGroup,
};
pub use group::{build_group, nested_subsample, split, GroupDataset, GroupItem, GroupSize, GroupSpec, Source, Split, SplitSpec};
pub use pipeline::{
    external_pool, run_fraction_study, run_tables, synthesize_sources, task_groups, FractionConfig, SyntheticConfig,
    SyntheticSource, TableRow, Task,
};
pub use report::{
    fraction_findings, fraction_points, fraction_tsv, summary_csv, EvalReport, FractionFindings, FractionPoint, PretrainSource,
};
