use crate::error::{Error, Result};

/// Uniform grid on (x_left, x_right) holding interior nodes only; the field
/// vanishes at both endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub x_left: f64,
    pub x_right: f64,
    pub n_interior: usize,
    pub h: f64,
}

impl Grid {
    pub fn new(x_left: f64, x_right: f64, n_interior: usize) -> Result<Self> {
        if !(x_left.is_finite() && x_right.is_finite()) || x_left >= x_right {
            return Err(Error::invalid(
                "grid",
                format!("need finite x_left < x_right, got ({x_left}, {x_right})"),
            ));
        }
        if n_interior < 3 {
            return Err(Error::invalid(
                "n_interior",
                format!("need at least 3 nodes, got {n_interior}"),
            ));
        }
        let h = (x_right - x_left) / (n_interior + 1) as f64;
        Ok(Grid {
            x_left,
            x_right,
            n_interior,
            h,
        })
    }

    /// Grid starting at `x_left` with spacing `h` and `n_interior` nodes; the right
    /// endpoint is placed at x_left + (n+1)h so that grids sharing (x_left, h) nest.
    pub fn with_spacing(x_left: f64, h: f64, n_interior: usize) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::invalid("h", format!("spacing must be positive, got {h}")));
        }
        let mut g = Grid::new(x_left, x_left + h * (n_interior + 1) as f64, n_interior)?;
        g.h = h;
        Ok(g)
    }

    /// Node i (0-based), i.e. x_left + (i+1)h.
    pub fn node(&self, i: usize) -> f64 {
        self.x_left + (i + 1) as f64 * self.h
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_interior).map(|i| self.node(i)).collect()
    }

    pub fn n_edges(&self) -> usize {
        self.n_interior + 1
    }

    /// Midpoint of edge e, which joins node e-1 and node e (endpoints included).
    pub fn edge_midpoint(&self, e: usize) -> f64 {
        self.x_left + (e as f64 + 0.5) * self.h
    }

    /// Halve the spacing: n -> 2n + 1. Old nodes are the odd-indexed new nodes.
    pub fn refined(&self) -> Self {
        Grid::new(self.x_left, self.x_right, 2 * self.n_interior + 1).expect("refinement of a valid grid")
    }

    /// Index of the last node with x_i <= x (None if x is left of the first node).
    pub fn last_node_at_or_below(&self, x: f64) -> Option<usize> {
        let s = ((x - self.x_left) / self.h + 1e-9).floor();
        if s < 1.0 {
            None
        } else {
            Some(((s as usize) - 1).min(self.n_interior - 1))
        }
    }

    /// True if `sub` shares x_left and h and its nodes plus right endpoint are nodes of `self`.
    pub fn contains_prefix(&self, sub: &Grid) -> bool {
        let tol = 1e-12 * self.h.max(1.0);
        (sub.x_left - self.x_left).abs() <= tol
            && (sub.h - self.h).abs() <= 1e-12 * self.h
            && sub.n_interior < self.n_interior
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_and_nodes() {
        let g = Grid::new(0.0, 1.0, 3).unwrap();
        assert_eq!(g.h, 0.25);
        assert_eq!(g.nodes(), vec![0.25, 0.5, 0.75]);
        assert_eq!(g.edge_midpoint(0), 0.125);
        assert_eq!(g.edge_midpoint(3), 0.875);
        assert!(Grid::new(1.0, 0.0, 5).is_err());
        assert!(Grid::new(0.0, 1.0, 2).is_err());
    }

    #[test]
    fn refinement_nests() {
        let g = Grid::new(-1.0, 0.0, 9).unwrap();
        let r = g.refined();
        assert_eq!(r.n_interior, 19);
        for i in 0..g.n_interior {
            assert!((g.node(i) - r.node(2 * i + 1)).abs() < 1e-15);
        }
    }

    #[test]
    fn prefix_grids() {
        let small = Grid::with_spacing(-1.0, 0.01, 99).unwrap();
        let big = Grid::with_spacing(-1.0, 0.01, 599).unwrap();
        assert!((small.x_right).abs() < 1e-12);
        assert!(big.contains_prefix(&small));
        assert_eq!(big.last_node_at_or_below(0.0), Some(99));
        assert_eq!(big.last_node_at_or_below(-1.0), None);
    }
}
