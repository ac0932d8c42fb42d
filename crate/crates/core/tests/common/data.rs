use spatial_bench::bench::{generate_dataset, Dataset, DatasetProfile};
use spatial_bench::tasks::TaskRegistry;
use std::sync::OnceLock;

/// A small dataset covering every task and tier, built once per test binary.
pub fn small_dataset() -> &'static Dataset {
    static DS: OnceLock<Dataset> = OnceLock::new();
    DS.get_or_init(|| generate_dataset(&TaskRegistry::default(), &DatasetProfile::standard(2, 7)).unwrap())
}
