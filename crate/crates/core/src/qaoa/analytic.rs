/// Closed-form depth-1 `<Z_i>` for a vertex of degree `degree` with local
/// field `field`, on any graph where `i`'s neighbors are not adjacent to one
/// another's other neighbors through `i` (always true of causal cones).
///
/// `coupling` is the `Z_i Z_j` coefficient of the cost Hamiltonian
/// (`lambda / 4` for the MIS encoding), so the product factor is
/// `cos(2 * gamma * coupling)^degree`.
pub fn expectation_p1_analytic(degree: usize, field: f64, coupling: f64, gamma: f64, beta: f64) -> f64 {
    (2.0 * beta).sin() * (2.0 * gamma * field).sin() * (2.0 * gamma * coupling).cos().powi(degree as i32)
}

/// Closed-form depth-1 `<Z_u Z_v>` across an edge whose endpoints share no
/// neighbors (degrees `du`, `dv`, fields `hu`, `hv`).
pub fn edge_correlation_p1_analytic(
    du: usize,
    dv: usize,
    hu: f64,
    hv: f64,
    coupling: f64,
    gamma: f64,
    beta: f64,
) -> f64 {
    let (s, c) = ((2.0 * beta).sin(), (2.0 * beta).cos());
    let k = (2.0 * gamma * coupling).cos();
    let sj = (2.0 * gamma * coupling).sin();
    let cross = s * c * sj * ((2.0 * gamma * hu).cos() * k.powi(du as i32 - 1)
        + (2.0 * gamma * hv).cos() * k.powi(dv as i32 - 1));
    let yy = s * s * (2.0 * gamma * hu).sin() * (2.0 * gamma * hv).sin()
        * k.powi(du as i32 - 1)
        * k.powi(dv as i32 - 1);
    cross + yy
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn vanishing_angles() {
        assert_eq!(expectation_p1_analytic(3, 0.25, 0.25, 0.0, 0.4), 0.0);
        assert_eq!(expectation_p1_analytic(3, 0.25, 0.25, 0.4, 0.0), 0.0);
    }

    #[test]
    fn isolated_vertex_substitution() {
        let v = expectation_p1_analytic(0, -0.5, 0.25, PI / 4.0, -PI / 4.0);
        assert!((v - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }
}
