//! Numerical checks of the Morse-index theorems, the partition energy and
//! vertex-condition interlacing.
//!
//! Every harness returns a [`VerificationReport`] rather than an error. A
//! report is skipped when `λ_n` is degenerate or `ψ_n` vanishes at a vertex
//! or cut, since the statements assume neither happens.

mod interlacing;
mod partitions;
mod report;
mod theorems;

pub use interlacing::{interlacing_check, InterlacingReport, InterlacingRow};
pub use partitions::{partition_energy, robin_partition_energy, Partition, PartitionEnergy};
pub use report::{csv_field, Check, VerificationReport, VerifyConfig, VERIFICATION_HEADER};
pub use theorems::{
    complementary, few_zeros_report, partition_report, theorem1_report, theorem2_report,
    verify_partition_criticality, verify_range, verify_theorem1, verify_theorem2,
    verify_theorem2_few_zeros,
};
