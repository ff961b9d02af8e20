//! Projective qubit measurements, deterministic response strategies, and
//! assemblage construction.
//!
//! Alice performs `m` two-outcome measurements; the assemblage collects the
//! subnormalized conditional states `tr_A[(M_{a|x} (x) I) rho]` that Bob
//! observes. Deterministic strategies enumerate the `2^m` outcome strings the
//! LHS membership test decomposes over.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::qstate::{dot_sigma, partial_trace_a, ComplexMatrix, DensityMatrix};
use crate::rng::rng_from_seed;

/// Number of outcomes per measurement; projective qubit measurements only.
pub const OUTCOMES: usize = 2;
/// Largest supported number of settings (`d = 2^m <= 256`).
pub const MAX_SETTINGS: usize = 8;
pub const MIN_SETTINGS: usize = 2;

fn check_m(m: usize) -> Result<()> {
    if !(MIN_SETTINGS..=MAX_SETTINGS).contains(&m) {
        return Err(Error::InvalidParameter(format!(
            "number of settings m={m} outside [{MIN_SETTINGS}, {MAX_SETTINGS}]"
        )));
    }
    Ok(())
}

/// A set of `m` Bloch directions; projectors are derived on demand so the
/// directions stay the single source of truth.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementSet {
    directions: Vec<[f64; 3]>,
}

impl MeasurementSet {
    pub fn new(directions: Vec<[f64; 3]>) -> Result<Self> {
        check_m(directions.len())?;
        for (i, d) in directions.iter().enumerate() {
            let norm = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            if (norm - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "direction {i} has norm {norm}, expected 1"
                )));
            }
        }
        Ok(Self { directions })
    }

    pub fn m(&self) -> usize {
        self.directions.len()
    }

    pub fn directions(&self) -> &[[f64; 3]] {
        &self.directions
    }

    /// Projector `M_{a|x} = (I + (-1)^a n_x . sigma)/2`.
    pub fn projector(&self, a: usize, x: usize) -> ComplexMatrix {
        assert!(a < OUTCOMES, "outcome {a} out of range");
        assert!(x < self.m(), "setting {x} out of range");
        let sign = if a == 0 { 1.0 } else { -1.0 };
        ComplexMatrix::identity(2)
            .add(&dot_sigma(self.directions[x]).scale_re(sign))
            .scale_re(0.5)
    }
}

/// `m` directions drawn uniformly on the unit sphere (normalized standard
/// normal triples); deterministic per seed.
pub fn random_measurements(m: usize, seed: u64) -> Result<MeasurementSet> {
    check_m(m)?;
    let mut rng = rng_from_seed(seed);
    let mut directions = Vec::with_capacity(m);
    while directions.len() < m {
        let v: [f64; 3] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if norm < 1e-8 {
            continue; // essentially impossible; redraw rather than divide by ~0
        }
        directions.push([v[0] / norm, v[1] / norm, v[2] / norm]);
    }
    MeasurementSet::new(directions)
}

/// The fixed mutually unbiased axes: (x, z) for m=2 and (x, y, z) for m=3.
pub fn mub_measurements(m: usize) -> Result<MeasurementSet> {
    let dirs: Vec<[f64; 3]> = match m {
        2 => vec![[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]],
        3 => vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        _ => {
            return Err(Error::InvalidParameter(format!(
                "MUB sets are defined for m in {{2, 3}}, got {m}"
            )))
        }
    };
    MeasurementSet::new(dirs)
}

/// All `d = 2^m` deterministic response functions, one outcome string per row,
/// in lexicographic order.
#[derive(Clone, Debug, PartialEq)]
pub struct DeterministicStrategySet {
    m: usize,
    table: Vec<Vec<u8>>,
}

impl DeterministicStrategySet {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.table.len()
    }

    /// Outcome assigned to setting `x` by strategy `lambda`.
    pub fn outcome(&self, lambda: usize, x: usize) -> usize {
        self.table[lambda][x] as usize
    }

    /// `D(a|x, lambda) = delta_{a, lambda(x)}`.
    pub fn response(&self, a: usize, x: usize, lambda: usize) -> f64 {
        if self.outcome(lambda, x) == a {
            1.0
        } else {
            0.0
        }
    }

    pub fn rows(&self) -> &[Vec<u8>] {
        &self.table
    }
}

pub fn enumerate_strategies(m: usize) -> Result<DeterministicStrategySet> {
    check_m(m)?;
    let d = 1usize << m;
    let mut table = Vec::with_capacity(d);
    for lambda in 0..d {
        // Setting 0 is the most significant bit: lexicographic row order.
        let row = (0..m)
            .map(|x| ((lambda >> (m - 1 - x)) & 1) as u8)
            .collect();
        table.push(row);
    }
    Ok(DeterministicStrategySet { m, table })
}

/// The subnormalized conditional states `{rho~_{a|x}}` with probabilities
/// `p(a|x) = tr rho~_{a|x}`.
#[derive(Clone, Debug)]
pub struct Assemblage {
    m: usize,
    /// Indexed `x * OUTCOMES + a`.
    elements: Vec<ComplexMatrix>,
}

impl Assemblage {
    /// Validates PSD-ness, per-setting normalization, and no-signaling.
    pub fn new(m: usize, elements: Vec<ComplexMatrix>) -> Result<Self> {
        check_m(m)?;
        if elements.len() != m * OUTCOMES {
            return Err(Error::ShapeMismatch(format!(
                "expected {} assemblage elements, got {}",
                m * OUTCOMES,
                elements.len()
            )));
        }
        let asm = Self { m, elements };
        asm.validate()?;
        Ok(asm)
    }

    fn validate(&self) -> Result<()> {
        let mut reference: Option<ComplexMatrix> = None;
        for x in 0..self.m {
            let mut sum = ComplexMatrix::zeros(2, 2);
            let mut total_p = 0.0;
            for a in 0..OUTCOMES {
                let el = self.element(a, x);
                if !el.is_hermitian(1e-10) {
                    return Err(Error::InvalidDensity(format!(
                        "assemblage element ({a}|{x}) not Hermitian"
                    )));
                }
                let min_eig = el.min_eigenvalue();
                if min_eig < -1e-10 {
                    return Err(Error::InvalidDensity(format!(
                        "assemblage element ({a}|{x}) not PSD (min eigenvalue {min_eig:.3e})"
                    )));
                }
                total_p += el.trace().re;
                sum = sum.add(el);
            }
            if (total_p - 1.0).abs() > 1e-10 {
                return Err(Error::InvalidDensity(format!(
                    "outcome probabilities for setting {x} sum to {total_p}"
                )));
            }
            match &reference {
                None => reference = Some(sum),
                Some(r) => {
                    if r.max_abs_diff(&sum) > 1e-10 {
                        return Err(Error::InvalidDensity(format!(
                            "no-signaling violated between setting 0 and {x}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn element(&self, a: usize, x: usize) -> &ComplexMatrix {
        assert!(a < OUTCOMES && x < self.m);
        &self.elements[x * OUTCOMES + a]
    }

    pub fn prob(&self, a: usize, x: usize) -> f64 {
        self.element(a, x).trace().re
    }

    /// `sum_a rho~_{a|x}`, independent of `x` by no-signaling; equals Bob's
    /// reduced state.
    pub fn reduced_state(&self) -> ComplexMatrix {
        let mut sum = ComplexMatrix::zeros(2, 2);
        for a in 0..OUTCOMES {
            sum = sum.add(self.element(a, 0));
        }
        sum
    }
}

/// Assemblage of `rho` under a measurement set: `rho~_{a|x} = tr_A[(M_{a|x} (x) I) rho]`.
pub fn assemblage(rho: &DensityMatrix, meas: &MeasurementSet) -> Assemblage {
    let id2 = ComplexMatrix::identity(2);
    let mut elements = Vec::with_capacity(meas.m() * OUTCOMES);
    for x in 0..meas.m() {
        for a in 0..OUTCOMES {
            let op = meas.projector(a, x).kron(&id2);
            let product = op.mul(rho.mat());
            // tr_A of the 4x4 product, with ulp-level hermitization.
            let mut el = ComplexMatrix::zeros(2, 2);
            for j in 0..2 {
                for l in 0..2 {
                    el.set(j, l, product.get(j, l) + product.get(2 + j, 2 + l));
                }
            }
            let off = (el.get(0, 1) + el.get(1, 0).conj()) * 0.5;
            el.set(0, 1, off);
            el.set(1, 0, off.conj());
            el.set(0, 0, Complex64::new(el.get(0, 0).re, 0.0));
            el.set(1, 1, Complex64::new(el.get(1, 1).re, 0.0));
            elements.push(el);
        }
    }
    let asm = Assemblage { m: meas.m(), elements };
    debug_assert!(asm.validate().is_ok());
    asm
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{random_density, random_qubit_density, werner_state, WernerParams};
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn random_measurements_are_unit_and_deterministic() {
        let a = random_measurements(2, 7).unwrap();
        for d in a.directions() {
            let norm = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            assert!((norm - 1.0).abs() <= 1e-12);
        }
        let b = random_measurements(2, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn random_measurements_distinct_at_m8() {
        let set = random_measurements(8, 3).unwrap();
        assert_eq!(set.m(), 8);
        for i in 0..8 {
            for j in (i + 1)..8 {
                let a = set.directions()[i];
                let b = set.directions()[j];
                let dist: f64 = (0..3).map(|k| (a[k] - b[k]).powi(2)).sum();
                assert!(dist > 1e-12, "directions {i} and {j} coincide");
            }
        }
    }

    #[test]
    fn random_measurements_reject_out_of_range_m() {
        assert!(random_measurements(1, 0).is_err());
        assert!(random_measurements(9, 0).is_err());
    }

    #[test]
    fn mub_directions_are_the_fixed_axes() {
        let three = mub_measurements(3).unwrap();
        assert_eq!(
            three.directions(),
            &[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
        );
        let two = mub_measurements(2).unwrap();
        assert_eq!(two.directions(), &[[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]);
        assert!(mub_measurements(4).is_err());
    }

    #[test]
    fn projectors_are_complete_and_idempotent() {
        let set = random_measurements(4, 99).unwrap();
        let id = ComplexMatrix::identity(2);
        for x in 0..set.m() {
            let sum = set.projector(0, x).add(&set.projector(1, x));
            assert!(sum.max_abs_diff(&id) <= 1e-12);
            for a in 0..2 {
                let p = set.projector(a, x);
                assert!(p.mul(&p).max_abs_diff(&p) <= 1e-12);
            }
        }
    }

    #[test]
    fn strategies_enumerate_lexicographically() {
        let s = enumerate_strategies(2).unwrap();
        assert_eq!(s.d(), 4);
        assert_eq!(s.rows(), &[vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        let s3 = enumerate_strategies(3).unwrap();
        assert_eq!(s3.d(), 8);
        assert_eq!(s3.rows()[0], vec![0, 0, 0]);
        assert_eq!(s3.rows()[7], vec![1, 1, 1]);
    }

    #[test]
    fn strategies_partition_outcomes() {
        let s = enumerate_strategies(3).unwrap();
        for lambda in 0..s.d() {
            for x in 0..3 {
                let total: f64 = (0..2).map(|a| s.response(a, x, lambda)).sum();
                assert_eq!(total, 1.0);
            }
        }
    }

    #[test]
    fn strategies_have_distinct_rows() {
        for m in 2..=8 {
            let s = enumerate_strategies(m).unwrap();
            assert_eq!(s.d(), 1 << m);
            let mut rows = s.rows().to_vec();
            rows.sort();
            rows.dedup();
            assert_eq!(rows.len(), 1 << m);
        }
    }

    #[test]
    fn assemblage_of_product_state_in_eigenbasis() {
        // |0><0| (x) tau measured along z: outcome 0 is certain.
        let tau = random_qubit_density(5);
        let mut zero = ComplexMatrix::zeros(2, 2);
        zero.set(0, 0, Complex64::new(1.0, 0.0));
        let rho = DensityMatrix::new(zero.kron(tau.mat())).unwrap();
        let meas = MeasurementSet::new(vec![[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]).unwrap();
        let asm = assemblage(&rho, &meas);
        assert!((asm.prob(0, 0) - 1.0).abs() <= 1e-12);
        assert!(asm.prob(1, 0).abs() <= 1e-12);
        assert!(asm.element(0, 0).max_abs_diff(tau.mat()) <= 1e-12);
        assert!(asm.element(1, 0).frobenius_norm() <= 1e-12);
    }

    #[test]
    fn assemblage_of_maximally_mixed_state_is_flat() {
        let rho = DensityMatrix::new(ComplexMatrix::identity(4).scale_re(0.25)).unwrap();
        let meas = random_measurements(3, 11).unwrap();
        let asm = assemblage(&rho, &meas);
        let quarter = ComplexMatrix::identity(2).scale_re(0.25);
        for x in 0..3 {
            for a in 0..2 {
                assert!(asm.element(a, x).max_abs_diff(&quarter) <= 1e-12);
                assert!((asm.prob(a, x) - 0.5).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn assemblage_of_werner_under_z_matches_closed_form() {
        let rho = werner_state(&WernerParams::new(0.6, FRAC_PI_4).unwrap());
        let meas = MeasurementSet::new(vec![[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]).unwrap();
        let asm = assemblage(&rho, &meas);
        // rho~_{0|z} = I/4 + (alpha/4) sigma_z.
        let expected = ComplexMatrix::identity(2)
            .scale_re(0.25)
            .add(&crate::qstate::pauli(3).scale_re(0.6 / 4.0));
        assert!((asm.prob(0, 0) - 0.5).abs() <= 1e-12);
        assert!(asm.element(0, 0).max_abs_diff(&expected) <= 1e-12);
    }

    #[test]
    fn no_signaling_matches_partial_trace() {
        for seed in 0..50 {
            let rho = random_density(seed);
            let meas = random_measurements(3, seed + 1000).unwrap();
            let asm = assemblage(&rho, &meas);
            let marg = partial_trace_a(&rho);
            for x in 0..3 {
                let mut sum = ComplexMatrix::zeros(2, 2);
                for a in 0..2 {
                    sum = sum.add(asm.element(a, x));
                }
                assert!(sum.max_abs_diff(marg.mat()) <= 1e-10);
            }
        }
    }

    #[test]
    fn assemblage_is_linear_in_the_state() {
        let rho1 = random_density(21);
        let rho2 = random_density(22);
        let lambda = 0.3;
        let mixed = DensityMatrix::mix(&[(lambda, rho1.clone()), (1.0 - lambda, rho2.clone())])
            .unwrap();
        let meas = random_measurements(2, 77).unwrap();
        let (a_mix, a1, a2) = (
            assemblage(&mixed, &meas),
            assemblage(&rho1, &meas),
            assemblage(&rho2, &meas),
        );
        for x in 0..2 {
            for a in 0..2 {
                let combo = a1
                    .element(a, x)
                    .scale_re(lambda)
                    .add(&a2.element(a, x).scale_re(1.0 - lambda));
                assert!(a_mix.element(a, x).max_abs_diff(&combo) <= 1e-12);
            }
        }
    }

    #[test]
    fn assemblage_constructor_rejects_signaling_collections() {
        // Two settings whose element sums differ signal Bob about x.
        let id = ComplexMatrix::identity(2);
        let half = id.scale_re(0.5);
        let mut biased = ComplexMatrix::zeros(2, 2);
        biased.set(0, 0, Complex64::new(0.9, 0.0));
        biased.set(1, 1, Complex64::new(0.1, 0.0));
        let elements = vec![half.scale_re(0.5), half.scale_re(0.5), biased.scale_re(0.5), half.scale_re(0.5)];
        assert!(Assemblage::new(2, elements).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn prop_assemblage_invariants(seed in 0u64..1_000_000, m in 2usize..=4) {
            let rho = random_density(seed);
            let meas = random_measurements(m, seed ^ 0xabcd).unwrap();
            let asm = assemblage(&rho, &meas);
            // Constructor-level validation is a debug assertion on this path;
            // re-run it explicitly here.
            prop_assert!(Assemblage::new(m, (0..m).flat_map(|x| (0..2).map(move |a| (a, x)))
                .map(|(a, x)| asm.element(a, x).clone()).collect()).is_ok());
        }
    }
}
