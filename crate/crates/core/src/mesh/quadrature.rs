use super::MeshError;

/// Gauss-Legendre rule on `[0, 1]`. `n` points integrate polynomials of degree
/// `2n - 1` exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl IntervalRule {
    pub fn gauss(n: usize) -> Result<Self, MeshError> {
        if n == 0 || n > 64 {
            return Err(MeshError::Quadrature(format!("Gauss-Legendre with {n} points")));
        }
        let mut points = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..(n + 1) / 2 {
            // Newton on P_n from the Chebyshev-type initial guess.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
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
            points[i] = 0.5 * (1.0 - x);
            points[n - 1 - i] = 0.5 * (1.0 + x);
            weights[i] = 0.5 * w;
            weights[n - 1 - i] = 0.5 * w;
        }
        Ok(IntervalRule { points, weights, degree: 2 * n - 1 })
    }

    /// Smallest Gauss rule exact to `degree`.
    pub fn with_degree(degree: usize) -> Result<Self, MeshError> {
        Self::gauss(degree / 2 + 1)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Rule on the reference triangle `{ξ, η ≥ 0, ξ + η ≤ 1}` (area 1/2),
/// obtained by collapsing a tensor Gauss rule onto the triangle.
/// Points are stored as barycentric triples `(1 - ξ - η, ξ, η)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangleRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl TriangleRule {
    /// Exact for polynomials of total degree `degree`.
    pub fn with_degree(degree: usize) -> Result<Self, MeshError> {
        // ∫_T p = ∫∫ p(ξ, (1-ξ)s) (1-ξ) ds dξ: degree + 1 in ξ, degree in s.
        let g = IntervalRule::with_degree(degree + 1)?;
        let mut points = Vec::with_capacity(g.len() * g.len());
        let mut weights = Vec::with_capacity(g.len() * g.len());
        for (&xi, &wx) in g.points.iter().zip(&g.weights) {
            for (&s, &ws) in g.points.iter().zip(&g.weights) {
                let eta = (1.0 - xi) * s;
                points.push([1.0 - xi - eta, xi, eta]);
                weights.push(wx * ws * (1.0 - xi));
            }
        }
        Ok(TriangleRule { points, weights, degree })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Rules used together for one discretisation: triangle interiors, faces, and
/// the time direction of each slab.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub triangle: TriangleRule,
    pub edge: IntervalRule,
    pub time: IntervalRule,
}

impl QuadratureRule {
    pub fn new(space_degree: usize, time_degree: usize) -> Result<Self, MeshError> {
        Ok(QuadratureRule {
            triangle: TriangleRule::with_degree(space_degree)?,
            edge: IntervalRule::with_degree(space_degree)?,
            time: IntervalRule::with_degree(time_degree)?,
        })
    }

    /// Default for spatial degree `k`: space exact to `max(2k + 6, 8)`, time to 5.
    pub fn for_degree(k: usize) -> Result<Self, MeshError> {
        Self::new((2 * k + 6).max(8), 5)
    }
}
