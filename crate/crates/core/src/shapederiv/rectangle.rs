use std::f64::consts::PI;

/// Normalized second Neumann eigenfunction of `(0, ell) x (0, height)`.
pub fn rect_psi(ell: f64, height: f64, y: [f64; 2]) -> f64 {
    (2.0 / (ell * height)).sqrt() * (PI * y[0] / ell).cos()
}

fn q_and_grad(ell: f64, height: f64, w: [f64; 2], y: [f64; 2]) -> (f64, [f64; 2]) {
    let k = PI / ell;
    let (s, c) = (k * y[0]).sin_cos();
    let b = 2.0 * 2f64.sqrt() / PI * (ell / height).sqrt();
    let q1 = -b * s;
    let dq1 = [-b * k * c, 0.0];
    let a = (2.0 / ell).sqrt();
    let cy = a * (height.sqrt() - 2.0 * y[1] / height.sqrt());
    let dcy = -2.0 * a / height.sqrt();
    let q2 = cy * c;
    let dq2 = [-k * cy * s, dcy * c];
    (
        w[0] * q1 + w[1] * q2,
        [w[0] * dq1[0] + w[1] * dq2[0], w[0] * dq1[1] + w[1] * dq2[1]],
    )
}

/// Adjoint state `w₁q₁ + w₂q₂` on the rectangle.
pub fn rect_q(ell: f64, height: f64, w: [f64; 2], y: [f64; 2]) -> f64 {
    q_and_grad(ell, height, w, y).0
}

/// `∇(ψ²)·w − λqψ + ∇q·∇ψ` from the closed forms.
pub fn rect_integrand(ell: f64, height: f64, w: [f64; 2], y: [f64; 2]) -> f64 {
    let k = PI / ell;
    let amp = (2.0 / (ell * height)).sqrt();
    let (s, c) = (k * y[0]).sin_cos();
    let psi = amp * c;
    let gp = [-amp * k * s, 0.0];
    let (q, gq) = q_and_grad(ell, height, w, y);
    2.0 * psi * (gp[0] * w[0] + gp[1] * w[1]) - k * k * q * psi + gq[0] * gp[0] + gq[1] * gp[1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrands_match_expanded_forms() {
        let (ell, h) = (2.0, 1.0);
        for &y1 in &[0.1, 0.7, 1.3, 1.9] {
            for &y2 in &[0.0, 0.4, 1.0] {
                let (s, c) = (PI * y1 / ell).sin_cos();
                let e1 = 4.0 * PI / (ell * ell * h) * c * s;
                let e2 = 2.0 * PI * PI / ell.powi(3) * (1.0 - 2.0 * y2 / h) * (s * s - c * c);
                assert!((rect_integrand(ell, h, [1.0, 0.0], [y1, y2]) - e1).abs() < 1e-14);
                assert!((rect_integrand(ell, h, [0.0, 1.0], [y1, y2]) - e2).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn adjoint_flux_condition() {
        // ∂_n q = −2ψ (n·w) on the four sides.
        let (ell, h) = (2.0, 1.0);
        let e = 1e-6;
        let sides: [([f64; 2], [f64; 2]); 4] = [
            ([0.6, 0.0], [0.0, -1.0]),
            ([0.6, h], [0.0, 1.0]),
            ([0.0, 0.3], [-1.0, 0.0]),
            ([ell, 0.3], [1.0, 0.0]),
        ];
        for w in [[1.0, 0.0], [0.0, 1.0]] {
            for (p, n) in sides {
                let inner = [p[0] - e * n[0], p[1] - e * n[1]];
                let outer = [p[0] + e * n[0], p[1] + e * n[1]];
                let dn = (rect_q(ell, h, w, outer) - rect_q(ell, h, w, inner)) / (2.0 * e);
                let rhs = -2.0 * rect_psi(ell, h, p) * (n[0] * w[0] + n[1] * w[1]);
                assert!((dn - rhs).abs() < 1e-8, "{w:?} {p:?}: {dn} vs {rhs}");
            }
        }
    }
}
