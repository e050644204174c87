//! Configuration and file formats.

mod config;
mod formats;
mod plot;
mod slc;

pub use config::{default_grid, load_config, parse_config, EstimatorSettings, PixelSource, RunConfig};
pub use formats::{
    read_sweep_csv, read_truth_csv, sorted_rows, write_point_cloud_ply, write_spectrum, write_sweep_csv,
    write_truth_csv, PixelSpacing, SWEEP_HEADER, TRUTH_HEADER,
};
pub use plot::{emit_plot_script, plot_script};
pub use slc::{read_slc_stack, write_slc_stack, SLC_HEADER_LEN, SLC_MAGIC, SLC_VERSION};
