//! Named test meshes with their standard cuts.

use crate::error::{Error, Result};
use crate::mesh::{CutSpec, MeshSpec, ProfileSpec};
use crate::{Cut, Mesh};

/// Names accepted by [`preset`].
pub const PRESET_NAMES: [&str; 6] = ["path5", "path9", "grid5", "grid5-flat", "grid9", "grid9-flat"];

/// Mesh and cut descriptions of a named preset.
///
/// Paths have unit spacing and a flat metric, cut at the middle node. Grids
/// have unit spacing, cut along the middle column; the non-flat ones use
/// [`ProfileSpec::striped`].
pub fn preset_spec(name: &str) -> Result<(MeshSpec, CutSpec)> {
    let path = |interior: usize| {
        (
            MeshSpec::Interval { interior, spacing: 1.0, profile: ProfileSpec::Flat },
            CutSpec::Nodes { nodes: vec![(interior + 1) / 2] },
        )
    };
    let grid = |n: usize, profile: ProfileSpec| {
        (
            MeshSpec::Grid { nx: n, ny: n, spacing: 1.0, profile },
            CutSpec::Coordinate { axis: 0, value: ((n - 1) / 2) as f64 },
        )
    };
    Ok(match name {
        "path5" => path(3),
        "path9" => path(7),
        "grid5" => grid(5, ProfileSpec::striped(5)),
        "grid5-flat" => grid(5, ProfileSpec::Flat),
        "grid9" => grid(9, ProfileSpec::striped(9)),
        "grid9-flat" => grid(9, ProfileSpec::Flat),
        other => return Err(Error::InvalidInput(format!("unknown preset {other:?}"))),
    })
}

/// Builds a named preset.
pub fn preset(name: &str) -> Result<(Mesh, Cut)> {
    let (m, c) = preset_spec(name)?;
    let mesh = m.build()?.with_label(name);
    let cut = c.apply(&mesh)?;
    Ok((mesh, cut))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_build() {
        for name in PRESET_NAMES {
            let (m, c) = preset(name).unwrap();
            assert_eq!(m.label(), name);
            assert!(!c.interface().is_empty());
        }
        assert!(preset("torus").is_err());
    }
}
