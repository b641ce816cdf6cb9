//! Vertex-disjoint crossings over the half-plane from boundary sites left of
//! `x` to boundary sites right of `x`, via unit-capacity maximum flow.

use petgraph::algo::dinics;
use petgraph::graph::{DiGraph, NodeIndex};
use serde::{Deserialize, Serialize};

use super::{sample_configuration, GrowthConfiguration};
use crate::error::{Error, Result};
use crate::lattice::{SiteCoord, Window, NEIGHBOR_OFFSETS};

/// Which state a path must consist of.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathType {
    Vacant,
    Occupied,
}

impl PathType {
    pub fn from_index(j: u8) -> Result<Self> {
        match j {
            0 => Ok(PathType::Vacant),
            1 => Ok(PathType::Occupied),
            _ => Err(Error::InvalidParameter(format!("path type must be 0 or 1, got {j}"))),
        }
    }

    fn admits(self, occupied: bool) -> bool {
        occupied == (self == PathType::Occupied)
    }
}

/// Maximum number of vertex-disjoint `path_type` paths in `config` from
/// `{k < x, l = 0}` to `{k > x, l = 0}`.
pub fn max_disjoint_crossings(config: &GrowthConfiguration, x: f64, path_type: PathType) -> Result<u32> {
    let window = config.window;
    check_straddles(&window, x)?;
    let usable = |s: SiteCoord| window.contains(s) && s.l >= 0 && path_type.admits(config.is_occupied(s));

    let mut g: DiGraph<(), u32> = DiGraph::new();
    let source = g.add_node(());
    let sink = g.add_node(());
    let mut inner: Vec<Option<(NodeIndex, NodeIndex)>> = vec![None; window.len()];
    for (i, s) in window.sites().enumerate() {
        if usable(s) {
            let (a, b) = (g.add_node(()), g.add_node(()));
            g.add_edge(a, b, 1);
            inner[i] = Some((a, b));
        }
    }
    for (i, s) in window.sites().enumerate() {
        let Some((a, b)) = inner[i] else { continue };
        for (dk, dl) in NEIGHBOR_OFFSETS {
            if let Some(j) = window.index(s.offset(dk, dl)) {
                if let Some((na, _)) = inner[j] {
                    g.add_edge(b, na, 1);
                }
            }
        }
        if s.l == 0 {
            let k = s.k as f64;
            if k < x {
                g.add_edge(source, a, 1);
            } else if k > x {
                g.add_edge(b, sink, 1);
            }
        }
    }
    Ok(dinics(&g, source, sink).0)
}

/// Samples `σ^u_t` on `window` and counts disjoint crossings.
pub fn disjoint_crossings(x: f64, window: Window, t: f64, seed: u64, path_type: PathType) -> Result<u32> {
    if !window.is_half_plane() {
        return Err(Error::InvalidParameter("crossings are counted on half-plane windows".into()));
    }
    let config = sample_configuration(window, t, seed, true)?;
    max_disjoint_crossings(&config, x, path_type)
}

fn check_straddles(window: &Window, x: f64) -> Result<()> {
    if window.l_min > 0 || !((window.k_min as f64) < x && x < window.k_max as f64) {
        return Err(Error::InvalidParameter(format!(
            "window [{}, {}] on the boundary row does not straddle x = {x}",
            window.k_min, window.k_max
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clocks::T_C;

    #[test]
    fn vacant_window_type_one_is_zero() {
        let w = Window::half_plane(-4, 4, 4).unwrap();
        let c = GrowthConfiguration::vacant(w, true);
        assert_eq!(max_disjoint_crossings(&c, 0.5, PathType::Occupied).unwrap(), 0);
        // Every site is a 0-site; nested arcs around x give one crossing per
        // available row, capped by the left boundary sites.
        let n = max_disjoint_crossings(&c, 0.5, PathType::Vacant).unwrap();
        assert!(n >= 4, "{n}");
    }

    #[test]
    fn full_and_vacant_are_dual() {
        let w = Window::half_plane(-5, 5, 5).unwrap();
        let full = GrowthConfiguration::from_fn(w, 1.0, true, |_| true);
        let vacant = GrowthConfiguration::vacant(w, true);
        assert_eq!(
            max_disjoint_crossings(&full, 0.0, PathType::Occupied).unwrap(),
            max_disjoint_crossings(&vacant, 0.0, PathType::Vacant).unwrap()
        );
    }

    #[test]
    fn rejects_non_straddling_window() {
        let w = Window::half_plane(0, 5, 5).unwrap();
        assert!(disjoint_crossings(-1.0, w, T_C, 1, PathType::Vacant).is_err());
        assert!(PathType::from_index(2).is_err());
    }
}
