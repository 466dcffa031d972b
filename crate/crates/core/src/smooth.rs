//! C^∞ transition functions built from the kernel s ↦ exp(-1/s).

use crate::jet::Jet;

/// Smooth step: 0 for s ≤ 0, 1 for s ≥ 1, strictly increasing in between.
/// Equal to ψ(s)/(ψ(s)+ψ(1-s)) with ψ(s) = exp(-1/s), evaluated as
/// 1/(1 + exp(1/s - 1/(1-s))) to stay monotone in floating point.
/// Derivatives stay finite up to the flat ends.
pub fn smooth_step(s: Jet) -> Jet {
    let v = s.value();
    if v <= 0.0 {
        return Jet::constant(0.0);
    }
    if v >= 1.0 {
        return Jet::constant(1.0);
    }
    let arg = s.recip() - (1.0 - s).recip();
    if arg.value() > 700.0 {
        return Jet::constant(0.0);
    }
    if arg.value() < -700.0 {
        return Jet::constant(1.0);
    }
    if arg.value() > 0.0 {
        // e^{-arg}/(1 + e^{-arg}) keeps every derivative finite near s = 0.
        let e = (-arg).exp();
        e * (e + 1.0).recip()
    } else {
        (arg.exp() + 1.0).recip()
    }
}

pub fn smooth_step_value(s: f64) -> f64 {
    smooth_step(Jet::variable(s)).value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_and_symmetry() {
        assert_eq!(smooth_step_value(-0.5), 0.0);
        assert_eq!(smooth_step_value(0.0), 0.0);
        assert_eq!(smooth_step_value(1.0), 1.0);
        assert!((smooth_step_value(0.5) - 0.5).abs() < 1e-15);
        for i in 1..20 {
            let s = i as f64 / 20.0;
            let sum = smooth_step_value(s) + smooth_step_value(1.0 - s);
            assert!((sum - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn monotone_with_flat_ends() {
        let mut prev = 0.0;
        for i in 1..1000 {
            let v = smooth_step_value(i as f64 / 1000.0);
            assert!(v >= prev);
            prev = v;
        }
        let near = smooth_step(Jet::variable(1e-3));
        assert!(near.d.iter().all(|d| d.abs() < 1e-100));
    }

    #[test]
    fn derivatives_finite_across_the_transition() {
        for i in 1..4000 {
            let s = i as f64 / 4000.0;
            let j = smooth_step(Jet::variable(s));
            assert!(j.d.iter().all(|d| d.is_finite()), "s = {s}: {:?}", j.d);
        }
    }
}
