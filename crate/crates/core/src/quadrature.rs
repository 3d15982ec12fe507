//! Quadrature rules on triangles in barycentric coordinates.
//!
//! Weights are normalized to sum to one, so `sum_q w_q f(x_q) * |T|`
//! approximates `\int_T f`. Degrees up to 8 use fully symmetric Gaussian
//! rules with interior points and positive weights; degrees 9 and 10 use a
//! collapsed (Duffy) tensor Gauss-Legendre rule, which also has positive
//! weights and interior points.

use crate::error::{Error, Result};

/// Assembly degree used throughout unless a caller asks otherwise.
pub const DEFAULT_DEGREE: usize = 8;

pub const MAX_DEGREE: usize = 10;

#[derive(Debug, Clone)]
pub struct TriangleRule {
    points: Vec<[f64; 3]>,
    weights: Vec<f64>,
    degree: usize,
}

impl TriangleRule {
    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Total degree of polynomials integrated exactly.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64; 3], f64)> + '_ {
        self.points.iter().zip(self.weights.iter().copied())
    }

    fn from_orbits(degree: usize, orbits: &[Orbit]) -> Self {
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for orbit in orbits {
            match *orbit {
                Orbit::Centroid(w) => {
                    points.push([1.0 / 3.0; 3]);
                    weights.push(w);
                }
                Orbit::Edge(a, w) => {
                    let b = 1.0 - 2.0 * a;
                    points.extend_from_slice(&[[a, a, b], [a, b, a], [b, a, a]]);
                    weights.extend_from_slice(&[w; 3]);
                }
                Orbit::General(a, b, w) => {
                    let c = 1.0 - a - b;
                    points.extend_from_slice(&[[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]]);
                    weights.extend_from_slice(&[w; 6]);
                }
            }
        }
        Self { points, weights, degree }
    }
}

enum Orbit {
    Centroid(f64),
    /// Three points (a, a, 1-2a).
    Edge(f64, f64),
    /// Six permutations of (a, b, 1-a-b).
    General(f64, f64, f64),
}

/// A rule exact for all bivariate polynomials of total degree `degree`.
pub fn triangle_rule(degree: usize) -> Result<TriangleRule> {
    use Orbit::*;
    let rule = match degree {
        1 => TriangleRule::from_orbits(1, &[Centroid(1.0)]),
        2 => TriangleRule::from_orbits(2, &[Edge(1.0 / 6.0, 1.0 / 3.0)]),
        3 | 4 => TriangleRule::from_orbits(
            4,
            &[Edge(0.445_948_490_915_965, 0.223_381_589_678_011), Edge(0.091_576_213_509_771, 0.109_951_743_655_322)],
        ),
        5 => {
            let s = 15f64.sqrt();
            TriangleRule::from_orbits(
                5,
                &[
                    Centroid(9.0 / 40.0),
                    Edge((6.0 - s) / 21.0, (155.0 - s) / 1200.0),
                    Edge((6.0 + s) / 21.0, (155.0 + s) / 1200.0),
                ],
            )
        }
        6 => TriangleRule::from_orbits(
            6,
            &[
                Edge(0.249_286_745_170_910, 0.116_786_275_726_379),
                Edge(0.063_089_014_491_502, 0.050_844_906_370_207),
                General(0.053_145_049_844_817, 0.310_352_451_033_784, 0.082_851_075_618_374),
            ],
        ),
        7 | 8 => TriangleRule::from_orbits(
            8,
            &[
                Centroid(0.144_315_607_677_787),
                Edge(0.459_292_588_292_723, 0.095_091_634_267_285),
                Edge(0.170_569_307_751_760, 0.103_217_370_534_718),
                Edge(0.050_547_228_317_031, 0.032_458_497_623_198),
                General(0.263_112_829_634_638, 0.008_394_777_409_958, 0.027_230_314_174_435),
            ],
        ),
        9 | 10 => collapsed_gauss_rule(10),
        d => return Err(Error::UnsupportedDegree(d)),
    };
    Ok(rule)
}

/// Duffy-collapsed tensor Gauss-Legendre rule exact to `degree`, for any
/// degree. Less economical than the symmetric rules.
pub fn collapsed_gauss_rule(degree: usize) -> TriangleRule {
    // the collapse adds one power of (1 - s) to the integrand
    let m = (degree + 2).div_ceil(2);
    let (nodes, wts) = gauss_legendre_unit(m);
    let mut points = Vec::with_capacity(m * m);
    let mut weights = Vec::with_capacity(m * m);
    for (&s, &ws) in nodes.iter().zip(&wts) {
        for (&t, &wt) in nodes.iter().zip(&wts) {
            let l1 = s;
            let l2 = (1.0 - s) * t;
            points.push([l1, l2, 1.0 - l1 - l2]);
            // reference triangle has area 1/2; normalize to unit total weight
            weights.push(2.0 * ws * wt * (1.0 - s));
        }
    }
    TriangleRule { points, weights, degree }
}

/// Gauss-Legendre nodes and weights on [0, 1].
pub fn gauss_legendre_unit(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m {
        // Chebyshev-like initial guess, then Newton on P_m
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(m, x);
        dp = if d != 0.0 { d } else { dp };
        nodes[i] = 0.5 * (1.0 - x);
        weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Exact integral of `l1^a l2^b l3^c` over a triangle of area `area`:
/// `2|T| a! b! c! / (a+b+c+2)!`.
pub fn barycentric_monomial_integral(a: u32, b: u32, c: u32, area: f64) -> f64 {
    let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
    2.0 * area * fact(a) * fact(b) * fact(c) / fact(a + b + c + 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn integrate(rule: &TriangleRule, f: impl Fn([f64; 3]) -> f64, area: f64) -> f64 {
        rule.iter().map(|(p, w)| w * f(*p)).sum::<f64>() * area
    }

    #[test]
    fn exactness_sweep() {
        for degree in 1..=MAX_DEGREE {
            let rule = triangle_rule(degree).unwrap();
            assert!(rule.degree() >= degree);
            assert!(rule.weights().iter().all(|&w| w > 0.0));
            assert!(rule.points().iter().all(|p| p.iter().all(|&l| l > 0.0)));
            let wsum: f64 = rule.weights().iter().sum();
            assert!((wsum - 1.0).abs() < 1e-14, "degree {degree}: weight sum {wsum}");
            for a in 0..=rule.degree() as u32 {
                for b in 0..=(rule.degree() as u32 - a) {
                    for c in 0..=(rule.degree() as u32 - a - b) {
                        let exact = barycentric_monomial_integral(a, b, c, 0.5);
                        let got =
                            integrate(&rule, |l| l[0].powi(a as i32) * l[1].powi(b as i32) * l[2].powi(c as i32), 0.5);
                        assert!(
                            (got - exact).abs() <= 1e-13 * exact,
                            "degree {degree}, monomial ({a},{b},{c}): {got} vs {exact}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn named_integrals() {
        let r4 = triangle_rule(4).unwrap();
        let v = integrate(&r4, |l| l[0] * l[0] * l[1] * l[2], 0.5);
        assert!((v - 1.0 / 360.0).abs() < 1e-16);
        // x = l2 on the reference triangle (0,0),(1,0),(0,1)
        let r8 = triangle_rule(8).unwrap();
        let v = integrate(&r8, |l| l[1].powi(8), 0.5);
        assert!((v - 1.0 / 90.0).abs() < 1e-15);
        for d in 1..=10 {
            let r = triangle_rule(d).unwrap();
            assert!((integrate(&r, |_| 1.0, 0.37) - 0.37).abs() < 1e-15);
        }
    }

    #[test]
    fn unsupported_degrees() {
        assert!(matches!(triangle_rule(0), Err(Error::UnsupportedDegree(0))));
        assert!(matches!(triangle_rule(11), Err(Error::UnsupportedDegree(11))));
    }

    #[test]
    fn gauss_legendre_is_exact() {
        let (x, w) = gauss_legendre_unit(6);
        for k in 0..12 {
            let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum();
            assert!((got - 1.0 / (k as f64 + 1.0)).abs() < 1e-15);
        }
    }
}
