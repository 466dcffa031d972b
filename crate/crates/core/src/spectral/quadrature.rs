//! Grid quadrature: Σ h v_i² for L², plus finite-difference derivative norms.
//! The field is taken to vanish at both grid endpoints.

use num_complex::Complex64;

use super::grid::Grid;
use crate::error::{Error, Result};

pub fn quadrature_l2(grid: &Grid, v: &[f64]) -> f64 {
    (grid.h * v.iter().map(|x| x * x).sum::<f64>()).sqrt()
}

pub fn l2_norm_complex(grid: &Grid, v: &[Complex64]) -> f64 {
    (grid.h * v.iter().map(|x| x.norm_sqr()).sum::<f64>()).sqrt()
}

/// One-sided differences on the n+1 edges, with zero Dirichlet values outside.
pub fn first_difference(grid: &Grid, v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..=n)
        .map(|e| {
            let right = if e < n { v[e] } else { 0.0 };
            let left = if e > 0 { v[e - 1] } else { 0.0 };
            (right - left) / grid.h
        })
        .collect()
}

/// Centered second differences at the n nodes.
pub fn second_difference(grid: &Grid, v: &[f64]) -> Vec<f64> {
    let d1 = first_difference(grid, v);
    d1.windows(2).map(|w| (w[1] - w[0]) / grid.h).collect()
}

/// ‖D^k v‖ for k ∈ {0, 1, 2}.
pub fn seminorm_hk(grid: &Grid, v: &[f64], k: usize) -> Result<f64> {
    let d = match k {
        0 => v.to_vec(),
        1 => first_difference(grid, v),
        2 => second_difference(grid, v),
        _ => {
            return Err(Error::invalid(
                "k",
                format!("derivative order must be 0, 1 or 2, got {k}"),
            ))
        }
    };
    Ok((grid.h * d.iter().map(|x| x * x).sum::<f64>()).sqrt())
}

/// (Σ_{j≤k} ‖D^j v‖²)^{1/2}.
pub fn quadrature_hk(grid: &Grid, v: &[f64], k: usize) -> Result<f64> {
    let mut total = 0.0;
    for j in 0..=k {
        total += seminorm_hk(grid, v, j)?.powi(2);
    }
    Ok(total.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sine(grid: &Grid) -> Vec<f64> {
        grid.nodes().iter().map(|x| (PI * x).sin()).collect()
    }

    #[test]
    fn zero_and_sine() {
        let g = Grid::new(0.0, 1.0, 63).unwrap();
        assert_eq!(quadrature_l2(&g, &vec![0.0; 63]), 0.0);
        assert_eq!(quadrature_hk(&g, &vec![0.0; 63], 2).unwrap(), 0.0);
        assert!((quadrature_l2(&g, &sine(&g)) - 0.5f64.sqrt()).abs() < 1e-12);
        assert!(seminorm_hk(&g, &sine(&g), 3).is_err());
    }

    #[test]
    fn h1_seminorm_second_order() {
        let target = PI / 2f64.sqrt();
        let mut errs = Vec::new();
        let mut g = Grid::new(0.0, 1.0, 15).unwrap();
        for _ in 0..4 {
            errs.push((seminorm_hk(&g, &sine(&g), 1).unwrap() - target).abs());
            g = g.refined();
        }
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn h2_seminorm_converges() {
        let target = PI * PI / 2f64.sqrt();
        let g = Grid::new(0.0, 1.0, 1023).unwrap();
        let got = seminorm_hk(&g, &sine(&g), 2).unwrap();
        assert!((got - target).abs() / target < 1e-5);
    }
}
