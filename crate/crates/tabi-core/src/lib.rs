//! Tight-and-balanced packing of irregular polygonal charts into fixed-size
//! texel atlases.
//!
//! The packer folds height-sorted charts into rows and pushes rows up against
//! an advancing frontline. Tightness comes from per-chart shape proxies
//! (local bounding boxes per axis interval plus an approximate OBB) used to
//! compact gaps both horizontally and vertically; balance comes from
//! per-row direction, fold-width, and compaction choices driven by knee
//! detection in the frontline. A prefix-sum folding path handles the small
//! charts of very large inputs. A classic bounding-box fold-and-push packer
//! is included as a baseline, alongside validation and stretch metrics.

pub mod chart;
pub mod compact;
pub mod corpus;
pub mod error;
pub mod geom;
pub mod io;
pub mod metrics;
pub mod packer;
pub mod proxies;
pub mod rowpack;
pub mod validate;

pub use chart::{AtlasSpec, Chart, ChartMode, ChartSet, PackResult, PackStats, Placement};
pub use corpus::{generate_chart_set, CorpusParams};
pub use error::{Error, Result};
pub use geom::{Fraction, Point, Rotation};
pub use io::{load_chart_set, render_atlas_svg, ChartFormat};
pub use metrics::{l2_stretch, StretchReport};
pub use packer::{chameleon_pack, pack, pack_with_options, PackOptions};
pub use validate::{occupancy, validate_atlas, ValidationReport};
