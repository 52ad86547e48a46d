use crate::error::{invalid, Result};

/// Cubic spline interpolant with not-a-knot end conditions, stored as knot
/// second derivatives.
#[derive(Clone, Debug)]
pub struct CubicSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    second: Vec<f64>,
}

impl CubicSpline {
    pub fn not_a_knot(knots: &[f64], values: &[f64]) -> Result<Self> {
        let n = knots.len();
        if n != values.len() {
            return invalid("knot and value counts differ");
        }
        if n < 4 {
            return invalid(format!("not-a-knot spline needs at least 4 knots, got {n}"));
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) {
            return invalid("spline knots must be strictly increasing");
        }

        let h: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
        let slope: Vec<f64> = values
            .windows(2)
            .zip(&h)
            .map(|(y, h)| (y[1] - y[0]) / h)
            .collect();

        // Interior equations for M_1..M_{n-2}; the end moments are eliminated
        // with the third-derivative continuity conditions at x_1 and x_{n-2}.
        let k = n - 2;
        let mut sub = vec![0.0; k];
        let mut diag = vec![0.0; k];
        let mut sup = vec![0.0; k];
        let mut rhs = vec![0.0; k];
        for r in 0..k {
            let i = r + 1;
            sub[r] = h[i - 1];
            diag[r] = 2.0 * (h[i - 1] + h[i]);
            sup[r] = h[i];
            rhs[r] = 6.0 * (slope[i] - slope[i - 1]);
        }
        let (h0, h1) = (h[0], h[1]);
        diag[0] = (h0 + h1) * (h0 + 2.0 * h1) / h1;
        let first_sup = (h1 * h1 - h0 * h0) / h1;
        let (ha, hb) = (h[n - 3], h[n - 2]);
        let last_sub = (ha * ha - hb * hb) / ha;
        let last_diag = (ha + hb) * (2.0 * ha + hb) / ha;
        if k == 2 {
            // Both boundary rows touch the same pair of unknowns.
            sup[0] = first_sup;
            sub[1] = last_sub;
            diag[1] = last_diag;
        } else {
            sup[0] = first_sup;
            sub[k - 1] = last_sub;
            diag[k - 1] = last_diag;
        }

        let interior = solve_tridiagonal(&sub, &diag, &sup, &rhs)?;
        let mut second = Vec::with_capacity(n);
        second.push(((h0 + h1) * interior[0] - h0 * interior[1]) / h1);
        second.extend_from_slice(&interior);
        second.push(((ha + hb) * interior[k - 1] - hb * interior[k - 2]) / ha);

        Ok(Self {
            knots: knots.to_vec(),
            values: values.to_vec(),
            second,
        })
    }

    /// Evaluates the interpolant; outside the knot span the end pieces are extended.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.knots.len();
        let i = self
            .knots
            .partition_point(|&k| k <= t)
            .saturating_sub(1)
            .min(n - 2);
        let (x0, x1) = (self.knots[i], self.knots[i + 1]);
        let h = x1 - x0;
        let (m0, m1) = (self.second[i], self.second[i + 1]);
        let (a, b) = (x1 - t, t - x0);
        m0 * a * a * a / (6.0 * h)
            + m1 * b * b * b / (6.0 * h)
            + (self.values[i] / h - m0 * h / 6.0) * a
            + (self.values[i + 1] / h - m1 * h / 6.0) * b
    }
}

fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let k = diag.len();
    let mut c = vec![0.0; k];
    let mut d = vec![0.0; k];
    let mut pivot = diag[0];
    if pivot == 0.0 {
        return Err(crate::SynsqError::Numerical("singular spline system".into()));
    }
    c[0] = sup[0] / pivot;
    d[0] = rhs[0] / pivot;
    for i in 1..k {
        pivot = diag[i] - sub[i] * c[i - 1];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(crate::SynsqError::Numerical("singular spline system".into()));
        }
        c[i] = sup[i] / pivot;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / pivot;
    }
    let mut x = vec![0.0; k];
    x[k - 1] = d[k - 1];
    for i in (0..k - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_knots_give_the_interpolating_cubic() {
        let knots = [0.0, 0.3, 1.1, 2.0];
        let p = |t: f64| 2.0 * t * t * t - t * t + 0.5 * t - 3.0;
        let values: Vec<f64> = knots.iter().map(|&t| p(t)).collect();
        let s = CubicSpline::not_a_knot(&knots, &values).unwrap();
        for i in 0..=40 {
            let t = -0.2 + i as f64 * 0.06;
            assert!((s.eval(t) - p(t)).abs() < 1e-10, "t={t}");
        }
    }

    #[test]
    fn passes_through_knots() {
        let knots: Vec<f64> = (0..30).map(|i| i as f64 + 0.3 * ((i * 7) % 5) as f64 / 5.0).collect();
        let values: Vec<f64> = knots.iter().map(|t| (0.4 * t).cos()).collect();
        let s = CubicSpline::not_a_knot(&knots, &values).unwrap();
        for (t, v) in knots.iter().zip(&values) {
            assert!((s.eval(*t) - v).abs() < 1e-12);
        }
    }
}
