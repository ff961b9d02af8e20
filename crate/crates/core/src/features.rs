//! The four feature schemes mapping a two-qubit state to a real vector.
//!
//! - F1 (15): diagonal entries `rho_11..rho_33` plus real/imaginary parts of
//!   the strict lower triangle, row by row; `rho_44` is omitted as
//!   trace-determined.
//! - F2 (9): the correlation matrix `t_kl = tr[(s_k (x) s_l) rho]`, row-major.
//! - F3 (9): F2 of the canonical form of `rho`.
//! - F4 (6): F3 without the lower-triangle cross terms (2,1), (3,1), (3,2).

use crate::error::{Error, Result};
use crate::qstate::{bloch_decompose, canonical_form, CanonicalMode, DensityMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum FeatureScheme {
    F1,
    F2,
    F3,
    F4,
}

#[allow(clippy::len_without_is_empty)]
impl FeatureScheme {
    pub const ALL: [FeatureScheme; 4] = [
        FeatureScheme::F1,
        FeatureScheme::F2,
        FeatureScheme::F3,
        FeatureScheme::F4,
    ];

    pub fn len(&self) -> usize {
        match self {
            FeatureScheme::F1 => 15,
            FeatureScheme::F2 => 9,
            FeatureScheme::F3 => 9,
            FeatureScheme::F4 => 6,
        }
    }

    /// Whether the scheme depends on the canonical-form mode.
    pub fn uses_canonical_mode(&self) -> bool {
        matches!(self, FeatureScheme::F3 | FeatureScheme::F4)
    }
}

impl std::fmt::Display for FeatureScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FeatureScheme::F1 => write!(f, "F1"),
            FeatureScheme::F2 => write!(f, "F2"),
            FeatureScheme::F3 => write!(f, "F3"),
            FeatureScheme::F4 => write!(f, "F4"),
        }
    }
}

impl std::str::FromStr for FeatureScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "F1" | "f1" => Ok(FeatureScheme::F1),
            "F2" | "f2" => Ok(FeatureScheme::F2),
            "F3" | "f3" => Ok(FeatureScheme::F3),
            "F4" | "f4" => Ok(FeatureScheme::F4),
            other => Err(Error::InvalidParameter(format!(
                "unknown feature scheme '{other}'"
            ))),
        }
    }
}

/// Scheme-tagged feature vector. The canonical mode is carried only for F3/F4.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    pub scheme: FeatureScheme,
    pub values: Vec<f64>,
    pub mode: Option<CanonicalMode>,
}

impl FeatureVector {
    fn new(scheme: FeatureScheme, values: Vec<f64>, mode: Option<CanonicalMode>) -> Self {
        debug_assert_eq!(values.len(), scheme.len());
        debug_assert!(values.iter().all(|v| v.is_finite()));
        Self { scheme, values, mode }
    }
}

/// F1: raw matrix entries, 1-based convention
/// `[rho_11, rho_22, rho_33, Re rho_21, Im rho_21, Re rho_31, Im rho_31,
///   Re rho_32, Im rho_32, Re rho_41, Im rho_41, Re rho_42, Im rho_42,
///   Re rho_43, Im rho_43]`.
pub fn extract_f1(rho: &DensityMatrix) -> FeatureVector {
    let m = rho.mat();
    let mut values = Vec::with_capacity(15);
    for i in 0..3 {
        values.push(m.get(i, i).re);
    }
    for i in 1..4 {
        for j in 0..i {
            let e = m.get(i, j);
            values.push(e.re);
            values.push(e.im);
        }
    }
    FeatureVector::new(FeatureScheme::F1, values, None)
}

/// F2: the correlation matrix flattened row-major, `(t_11, t_12, ..., t_33)`.
pub fn extract_f2(rho: &DensityMatrix) -> FeatureVector {
    let b = bloch_decompose(rho);
    let values = b.t.iter().flatten().copied().collect();
    FeatureVector::new(FeatureScheme::F2, values, None)
}

/// F3: F2 applied to the canonical form of `rho`.
pub fn extract_f3(rho: &DensityMatrix, mode: CanonicalMode) -> Result<FeatureVector> {
    let mapped = canonical_form(rho, mode)?;
    let values = extract_f2(&mapped).values;
    Ok(FeatureVector::new(FeatureScheme::F3, values, Some(mode)))
}

/// F4: the F3 vector with the (2,1), (3,1), (3,2) cross terms removed,
/// order preserved: `(t'_11, t'_12, t'_13, t'_22, t'_23, t'_33)`.
pub fn extract_f4(rho: &DensityMatrix, mode: CanonicalMode) -> Result<FeatureVector> {
    let f3 = extract_f3(rho, mode)?;
    let values = F4_KEEP.iter().map(|&i| f3.values[i]).collect();
    Ok(FeatureVector::new(FeatureScheme::F4, values, Some(mode)))
}

/// Index positions of F3 retained by F4 (upper triangle incl. diagonal).
pub const F4_KEEP: [usize; 6] = [0, 1, 2, 4, 5, 8];

/// Scheme dispatcher; `mode` is ignored for F1/F2.
pub fn extract(rho: &DensityMatrix, scheme: FeatureScheme, mode: CanonicalMode) -> Result<FeatureVector> {
    match scheme {
        FeatureScheme::F1 => Ok(extract_f1(rho)),
        FeatureScheme::F2 => Ok(extract_f2(rho)),
        FeatureScheme::F3 => extract_f3(rho, mode),
        FeatureScheme::F4 => extract_f4(rho, mode),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{random_density, werner_state, ComplexMatrix, WernerParams};
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_6};

    fn bell() -> DensityMatrix {
        werner_state(&WernerParams::new(1.0, FRAC_PI_4).unwrap())
    }

    fn maximally_mixed() -> DensityMatrix {
        DensityMatrix::new(ComplexMatrix::identity(4).scale_re(0.25)).unwrap()
    }

    #[test]
    fn f1_of_maximally_mixed() {
        let f = extract_f1(&maximally_mixed());
        assert_eq!(f.values.len(), 15);
        assert_eq!(&f.values[..3], &[0.25, 0.25, 0.25]);
        assert!(f.values[3..].iter().all(|v| v.abs() <= 1e-15));
    }

    #[test]
    fn f1_of_bell_has_single_corner_entry() {
        let f = extract_f1(&bell());
        let mut expected = vec![0.0; 15];
        expected[0] = 0.5; // rho_11
        expected[9] = 0.5; // Re rho_41
        for (got, want) in f.values.iter().zip(&expected) {
            assert!((got - want).abs() <= 1e-15, "{:?}", f.values);
        }
    }

    #[test]
    fn f1_imaginary_parts_vanish_for_real_states() {
        let rho = werner_state(&WernerParams::new(0.37, FRAC_PI_6).unwrap());
        let f = extract_f1(&rho);
        // Entries 4, 6, 8, 10, 12, 14 are the imaginary parts.
        for i in [4usize, 6, 8, 10, 12, 14] {
            assert_eq!(f.values[i], 0.0);
        }
    }

    #[test]
    fn f2_matches_bloch_correlations() {
        let f = extract_f2(&maximally_mixed());
        assert!(f.values.iter().all(|v| v.abs() <= 1e-15));

        let f = extract_f2(&bell());
        let expected = [1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 1.0];
        for (got, want) in f.values.iter().zip(&expected) {
            assert!((got - want).abs() <= 1e-14);
        }

        let alpha = 0.42;
        let f = extract_f2(&werner_state(&WernerParams::new(alpha, FRAC_PI_4).unwrap()));
        for (got, want) in f.values.iter().zip(&expected) {
            assert!((got - alpha * want).abs() <= 1e-14);
        }
    }

    #[test]
    fn f2_agrees_with_bloch_decompose_entrywise() {
        for seed in 0..20 {
            let rho = random_density(seed);
            let f = extract_f2(&rho);
            let b = bloch_decompose(&rho);
            for k in 0..3 {
                for l in 0..3 {
                    assert!((f.values[3 * k + l] - b.t[k][l]).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn f3_reduces_to_f2_when_marginal_is_maximally_mixed() {
        for mode in [CanonicalMode::AsWritten, CanonicalMode::InverseSqrtNormalized] {
            let f3 = extract_f3(&bell(), mode).unwrap();
            let f2 = extract_f2(&bell());
            for (a, b) in f3.values.iter().zip(&f2.values) {
                assert!((a - b).abs() <= 1e-12);
            }
            let f3 = extract_f3(&maximally_mixed(), mode).unwrap();
            assert!(f3.values.iter().all(|v| v.abs() <= 1e-12));
        }
    }

    #[test]
    fn f3_composes_canonical_form_with_f2() {
        let rho = werner_state(&WernerParams::new(0.7, FRAC_PI_6).unwrap());
        for mode in [CanonicalMode::AsWritten, CanonicalMode::InverseSqrtNormalized] {
            let f3 = extract_f3(&rho, mode).unwrap();
            let direct = extract_f2(&canonical_form(&rho, mode).unwrap());
            assert_eq!(f3.values.len(), 9);
            for (a, b) in f3.values.iter().zip(&direct.values) {
                assert!((a - b).abs() <= 1e-14);
            }
            assert_eq!(f3.mode, Some(mode));
        }
    }

    #[test]
    fn f4_is_a_coordinate_projection_of_f3() {
        for seed in 0..20 {
            let rho = random_density(seed);
            let f3 = extract_f3(&rho, CanonicalMode::AsWritten).unwrap();
            let f4 = extract_f4(&rho, CanonicalMode::AsWritten).unwrap();
            assert_eq!(f4.values.len(), 6);
            for (out_idx, &src_idx) in F4_KEEP.iter().enumerate() {
                assert_eq!(f4.values[out_idx], f3.values[src_idx]);
            }
        }
    }

    #[test]
    fn f4_of_bell_drops_cross_terms() {
        let f4 = extract_f4(&bell(), CanonicalMode::AsWritten).unwrap();
        let expected = [1.0, 0.0, 0.0, -1.0, 0.0, 1.0];
        for (got, want) in f4.values.iter().zip(&expected) {
            assert!((got - want).abs() <= 1e-12);
        }
    }

    #[test]
    fn scheme_lengths_and_ranges_hold_on_random_states() {
        for seed in 0..30 {
            let rho = random_density(seed);
            for scheme in FeatureScheme::ALL {
                let f = extract(&rho, scheme, CanonicalMode::AsWritten).unwrap();
                assert_eq!(f.values.len(), scheme.len());
                assert!(f.values.iter().all(|v| v.is_finite()));
                if scheme != FeatureScheme::F1 {
                    assert!(
                        f.values.iter().all(|v| v.abs() <= 1.0 + 1e-10),
                        "{scheme} out of range: {:?}",
                        f.values
                    );
                }
            }
        }
    }

    #[test]
    fn f3_propagates_singular_marginal() {
        let mut m = ComplexMatrix::zeros(4, 4);
        m.set(0, 0, num_complex::Complex64::new(1.0, 0.0));
        let rho = DensityMatrix::new(m).unwrap();
        assert!(extract_f3(&rho, CanonicalMode::InverseSqrtNormalized).is_err());
        assert!(extract_f4(&rho, CanonicalMode::InverseSqrtNormalized).is_err());
    }
}
