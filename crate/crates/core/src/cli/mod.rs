//! Command-line front end: scenario files, overrides, and the `run`,
//! `genpool` and `validate` commands.

mod commands;
mod file;

pub use commands::{
    cmd_genpool, cmd_run, cmd_validate, format_summary, run_to_dir, summarize, write_outputs, CliError,
    GenpoolArgs, RunArgs, RunReport, Summary, CHANNEL_GRID_FILE, SAP_LOG_FILE, SLOT_TRACE_FILE, SUMMARY_FILE,
};
pub use file::{apply_override, load_scenario, locate_key, Diagnostic, ScenarioFile};
