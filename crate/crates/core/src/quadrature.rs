//! Triangle quadrature rules in barycentric form.

/// Points and weights (summing to 1) of a rule on a triangle.
#[derive(Clone, Debug)]
pub struct TriangleRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl TriangleRule {
    /// Three edge midpoints, exact for polynomials of degree 2.
    pub fn edge_midpoints() -> Self {
        TriangleRule {
            points: vec![[0.0, 0.5, 0.5], [0.5, 0.0, 0.5], [0.5, 0.5, 0.0]],
            weights: vec![1.0 / 3.0; 3],
        }
    }

    /// Seven-point rule exact for polynomials of degree 5.
    pub fn degree5() -> Self {
        let s = 15f64.sqrt();
        let (a1, b1) = ((9.0 - 2.0 * s) / 21.0, (6.0 + s) / 21.0);
        let (a2, b2) = ((9.0 + 2.0 * s) / 21.0, (6.0 - s) / 21.0);
        let (w1, w2) = ((155.0 + s) / 1200.0, (155.0 - s) / 1200.0);
        TriangleRule {
            points: vec![
                [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
                [a1, b1, b1],
                [b1, a1, b1],
                [b1, b1, a1],
                [a2, b2, b2],
                [b2, a2, b2],
                [b2, b2, a2],
            ],
            weights: vec![9.0 / 40.0, w1, w1, w1, w2, w2, w2],
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64; 3], f64)> {
        self.points.iter().zip(self.weights.iter().copied())
    }
}

/// Physical coordinates of a barycentric point.
#[inline]
pub fn map_point(vertices: &[[f64; 2]; 3], bary: &[f64; 3]) -> [f64; 2] {
    [
        bary[0] * vertices[0][0] + bary[1] * vertices[1][0] + bary[2] * vertices[2][0],
        bary[0] * vertices[0][1] + bary[1] * vertices[1][1] + bary[2] * vertices[2][1],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    // exact integral of x^p y^q over the unit right triangle: p! q! / (p+q+2)!
    fn monomial_integral(p: u32, q: u32) -> f64 {
        let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
        fact(p) * fact(q) / fact(p + q + 2)
    }

    fn check(rule: &TriangleRule, degree: u32) {
        let v = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        for p in 0..=degree {
            for q in 0..=(degree - p) {
                let approx: f64 = rule
                    .iter()
                    .map(|(b, w)| {
                        let x = map_point(&v, b);
                        0.5 * w * x[0].powi(p as i32) * x[1].powi(q as i32)
                    })
                    .sum();
                assert!((approx - monomial_integral(p, q)).abs() < 1e-15, "x^{p} y^{q}");
            }
        }
    }

    #[test]
    fn midpoint_rule_is_degree_two() {
        check(&TriangleRule::edge_midpoints(), 2);
    }

    #[test]
    fn seven_point_rule_is_degree_five() {
        check(&TriangleRule::degree5(), 5);
    }
}
