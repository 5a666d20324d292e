//! Fixed Gauss–Legendre rules used by the verifier integrals.

/// Nodes and weights on [-1, 1].
pub const GL8: [(f64, f64); 8] = [
    (-0.9602898564975363, 0.1012285362903763),
    (-0.7966664774136267, 0.2223810344533745),
    (-0.5255324099163290, 0.3137066458778873),
    (-0.1834346424956498, 0.3626837833783620),
    (0.1834346424956498, 0.3626837833783620),
    (0.5255324099163290, 0.3137066458778873),
    (0.7966664774136267, 0.2223810344533745),
    (0.9602898564975363, 0.1012285362903763),
];

pub const GL16: [(f64, f64); 16] = [
    (-0.9894009349916499, 0.0271524594117541),
    (-0.9445750230732326, 0.0622535239386479),
    (-0.8656312023878318, 0.0951585116824928),
    (-0.7554044083550030, 0.1246289712555339),
    (-0.6178762444026438, 0.1495959888165767),
    (-0.4580167776572274, 0.1691565193950025),
    (-0.2816035507792589, 0.1826034150449236),
    (-0.0950125098376374, 0.1894506104550685),
    (0.0950125098376374, 0.1894506104550685),
    (0.2816035507792589, 0.1826034150449236),
    (0.4580167776572274, 0.1691565193950025),
    (0.6178762444026438, 0.1495959888165767),
    (0.7554044083550030, 0.1246289712555339),
    (0.8656312023878318, 0.0951585116824928),
    (0.9445750230732326, 0.0622535239386479),
    (0.9894009349916499, 0.0271524594117541),
];

/// ∫_a^b f with one 16-point rule.
pub fn gl16<F: Fn(f64) -> f64>(a: f64, b: f64, f: F) -> f64 {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    GL16.iter().map(|&(x, w)| w * f(c + r * x)).sum::<f64>() * r
}

/// ∫_a^b f with one 8-point rule.
pub fn gl8<F: Fn(f64) -> f64>(a: f64, b: f64, f: F) -> f64 {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    GL8.iter().map(|&(x, w)| w * f(c + r * x)).sum::<f64>() * r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exactness() {
        // GL16 integrates degree ≤ 31 exactly
        let exact = |p: i32, a: f64, b: f64| (b.powi(p + 1) - a.powi(p + 1)) / (p + 1) as f64;
        for p in [0, 3, 7, 15, 21] {
            let v = gl16(-0.7, 1.3, |x| x.powi(p));
            assert!((v - exact(p, -0.7, 1.3)).abs() < 1e-12, "degree {p}");
        }
        for p in [0, 3, 7, 15] {
            let v = gl8(-0.7, 1.3, |x| x.powi(p));
            assert!((v - exact(p, -0.7, 1.3)).abs() < 1e-12, "degree {p}");
        }
    }
}
