//! Monte Carlo comparison of the estimators on simulated panels.

pub mod config;
pub mod dgp;
pub mod run;
pub mod spec;
pub mod table;

pub use config::{parse_config, SimConfig};
pub use dgp::{contaminate, generate_panel};
pub use run::{replication_panel, run_simulation, EstimatorSummary, SimResult};
pub use spec::{Contamination, Dgp, EffectLayout, ErrorLaw, PowerRule, Scheme, SimSpec};
pub use table::{emit_table, render_text, CSV_HEADER};
