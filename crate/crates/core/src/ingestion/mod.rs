//! Raw generation feeds: parsing, duplicate handling, and daily power
//! matrix cleaning.

mod clean;
mod feed;
mod matrix;

pub use clean::{clean_column, mad_scale, modified_mad, ColumnCleaning, THRESHOLD_SLACK};
pub(crate) use clean::median;
pub use feed::{
    parse_feed_reader, parse_power_feed, FeedSchema, FeedSchemaRegistry, Quality, RawObservation,
    Reading, ALLOWED_INTERVALS,
};
pub use matrix::{
    aggregate_daily, build_daily_matrices, clean_matrix, daily_generation, resolve_duplicates,
    CleanReport, CleanReportEntry, DailyGeneration, DailyPowerMatrix, Deduplicated,
};
