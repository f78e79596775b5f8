//! Quality metrics and the batch benchmark report.

mod metrics;
mod report;

pub use metrics::{abnormal_count, ber, psnr, ssim};
pub use report::{bench, run_one, write_csv, BenchConfig, Row, Scheme, REPORT_HEADER};
