//! Neumann diffusion operator and the forward/backward difference operators.
//!
//! Indices are 0-based: edge `i` joins compartments `i` and `i + 1`.

use crate::error::ModelError;

/// `w[i+1] - w[i]`, defined for `i < n - 1`.
pub fn forward_diff(w: &[f64], i: usize) -> Result<f64, ModelError> {
    if i + 1 >= w.len() {
        return Err(ModelError::IndexOutOfRange {
            index: i,
            len: w.len(),
        });
    }
    Ok(w[i + 1] - w[i])
}

/// `w[i] - w[i-1]`, defined for `1 ≤ i < n`.
pub fn backward_diff(w: &[f64], i: usize) -> Result<f64, ModelError> {
    if i == 0 || i >= w.len() {
        return Err(ModelError::IndexOutOfRange {
            index: i,
            len: w.len(),
        });
    }
    Ok(w[i] - w[i - 1])
}

/// `(D w)` for the tridiagonal matrix with rows `(-1, 1)`, `(1, -2, 1)`, `(1, -1)`.
pub fn apply_diffusion(w: &[f64]) -> Result<Vec<f64>, ModelError> {
    let mut out = vec![0.0; w.len()];
    apply_diffusion_into(w, &mut out)?;
    Ok(out)
}

/// In-place variant of [`apply_diffusion`]; `out` must have the same length.
///
/// Row `i` equals `Δᵢ⁺w − Δᵢ⁻w` (one-sided at the ends). The stencil is summed
/// left to right, which is also the order a dense row-times-vector product uses.
pub fn apply_diffusion_into(w: &[f64], out: &mut [f64]) -> Result<(), ModelError> {
    let n = w.len();
    if n < 2 {
        return Err(ModelError::InvalidSystem(format!(
            "diffusion needs at least 2 compartments, got {n}"
        )));
    }
    if out.len() != n {
        return Err(ModelError::InvalidSystem(format!(
            "output length {} does not match input length {n}",
            out.len()
        )));
    }
    out[0] = -w[0] + w[1];
    for i in 1..n - 1 {
        out[i] = (w[i - 1] + -2.0 * w[i]) + w[i + 1];
    }
    out[n - 1] = w[n - 2] + -w[n - 1];
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_vector_is_annihilated() {
        assert_eq!(apply_diffusion(&[2.0, 2.0, 2.0]).unwrap(), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn two_compartment_corner_blocks() {
        assert_eq!(apply_diffusion(&[1.0, 0.0]).unwrap(), vec![-1.0, 1.0]);
    }

    #[test]
    fn single_compartment_is_rejected() {
        assert!(matches!(
            apply_diffusion(&[1.0]),
            Err(ModelError::InvalidSystem(_))
        ));
    }

    #[test]
    fn difference_operators() {
        assert_eq!(forward_diff(&[1.0, 3.0], 0).unwrap(), 2.0);
        assert_eq!(backward_diff(&[1.0, 3.0], 1).unwrap(), 2.0);
        let c = [4.0; 5];
        for i in 0..4 {
            assert_eq!(forward_diff(&c, i).unwrap(), 0.0);
            assert_eq!(backward_diff(&c, i + 1).unwrap(), 0.0);
        }
        assert!(forward_diff(&c, 4).is_err());
        assert!(backward_diff(&c, 0).is_err());
        assert!(backward_diff(&c, 5).is_err());
    }

    #[test]
    fn three_case_form_matches() {
        let w = [0.3, -1.2, 4.5, 2.0, 0.0, 7.25];
        let dw = apply_diffusion(&w).unwrap();
        let n = w.len();
        assert!((dw[0] - forward_diff(&w, 0).unwrap()).abs() < 1e-14);
        for (i, dwi) in dw.iter().enumerate().take(n - 1).skip(1) {
            let expect = forward_diff(&w, i).unwrap() - backward_diff(&w, i).unwrap();
            assert!((dwi - expect).abs() < 1e-13);
        }
        assert!((dw[n - 1] + backward_diff(&w, n - 1).unwrap()).abs() < 1e-14);
    }
}
