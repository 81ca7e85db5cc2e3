//! Gauss–Legendre rules on intervals and fixed rules on simplices.

use std::f64::consts::PI;

/// Points per panel used for every remainder integral.
pub const REMAINDER_ORDER: usize = 5;
/// Panels per unit subinterval used for every remainder integral.
pub const REMAINDER_PANELS: usize = 32;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// `n`-point rule, exact for polynomials of degree `2n - 1`.
    ///
    /// Nodes are Newton-refined roots of `P_n` starting from the Chebyshev-like
    /// guess `cos(π (i + 3/4) / (n + 1/2))`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        half * self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(mid + half * x)).sum::<f64>()
    }

    /// Composite rule over `panels` equal panels of `[a, b]`.
    pub fn composite(&self, a: f64, b: f64, panels: usize, f: impl Fn(f64) -> f64) -> f64 {
        let width = (b - a) / panels as f64;
        (0..panels)
            .map(|p| {
                let lo = a + p as f64 * width;
                let hi = if p + 1 == panels { b } else { lo + width };
                self.integrate(lo, hi, &f)
            })
            .sum()
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    (p1, n * (x * p1 - p0) / (x * x - 1.0))
}

/// Quadrature on a simplex expressed in barycentric coordinates; weights are
/// fractions of the simplex measure and sum to one.
#[derive(Clone, Debug)]
pub struct SimplexRule {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl SimplexRule {
    /// Rule exact for polynomials of degree ≤ 4 on an `n`-simplex, `n ∈ {1,2,3}`:
    /// 3-point Gauss on segments, the 6-point Dunavant rule on triangles and a
    /// collapsed 4×4×4 Gauss product on tetrahedra.
    pub fn degree4(dim: usize) -> Self {
        match dim {
            1 => {
                let gl = GaussLegendre::new(3);
                let points = gl.nodes.iter().map(|x| vec![0.5 * (1.0 - x), 0.5 * (1.0 + x)]).collect();
                let weights = gl.weights.iter().map(|w| 0.5 * w).collect();
                Self { points, weights }
            }
            2 => {
                const A: f64 = 0.445948490915965;
                const WA: f64 = 0.223381589678011;
                const B: f64 = 0.091576213509771;
                const WB: f64 = 0.109951743655322;
                let mut points = Vec::with_capacity(6);
                let mut weights = Vec::with_capacity(6);
                for (c, w) in [(A, WA), (B, WB)] {
                    let o = 1.0 - 2.0 * c;
                    points.extend([vec![o, c, c], vec![c, o, c], vec![c, c, o]]);
                    weights.extend([w; 3]);
                }
                Self { points, weights }
            }
            3 => {
                let gl = GaussLegendre::new(4);
                let to01 = |x: f64| 0.5 * (1.0 + x);
                let mut points = Vec::with_capacity(64);
                let mut weights = Vec::with_capacity(64);
                for (xu, wu) in gl.nodes.iter().zip(&gl.weights) {
                    for (xv, wv) in gl.nodes.iter().zip(&gl.weights) {
                        for (xw, ww) in gl.nodes.iter().zip(&gl.weights) {
                            let (u, v, w) = (to01(*xu), to01(*xv), to01(*xw));
                            let x = u;
                            let y = v * (1.0 - u);
                            let z = w * (1.0 - u) * (1.0 - v);
                            let jac = (1.0 - u) * (1.0 - u) * (1.0 - v);
                            // 1/8 from the [-1,1] -> [0,1] maps, 6 from dividing by the unit tet volume
                            weights.push(wu * wv * ww * jac * 6.0 / 8.0);
                            points.push(vec![1.0 - x - y - z, x, y, z]);
                        }
                    }
                }
                Self { points, weights }
            }
            _ => panic!("no simplex rule for dimension {dim}"),
        }
    }
}
