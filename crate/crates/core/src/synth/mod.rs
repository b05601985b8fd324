//! Synthetic data: the colored-patch dataset, synthetic leaves with known
//! lesion fractions, and a seeded suite of eight image corruptions at five
//! severities.
//!
//! Every random draw comes from a stream derived from the user seed and the
//! item position, so outputs do not depend on generation order or thread
//! count.

mod color;
mod corrupt;
mod leaf;

pub use self::color::{generate_color_dataset, render_color_image, sample_patch_center, ColorDatasetSpec, Split};
pub use self::corrupt::{apply_corruption, corrupt, corrupt_with, CorruptionKind, CorruptionSpec, SeverityTable};
pub use self::leaf::{generate_synthetic_leaf, LeafDatasetSpec, SyntheticLeaf, LEAF_BROWN, LEAF_DISCOLORED, LEAF_GREEN, LESION_MARGIN};
