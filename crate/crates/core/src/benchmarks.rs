//! Shifted and rotated benchmark functions and the function-error metric.
//!
//! Every problem evaluates `base(Rᵀ(x − o))`, so its optimum sits at the shift
//! `o` with value 0. These are stand-ins with the same landscape categories,
//! not bit-exact copies of any competition suite.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::{E, PI};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{OrthonormalBasis, SquareMatrix};
use crate::operators::SearchBounds;
use crate::Objective;

/// Below this a function error is reported as zero.
pub const ERROR_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum BaseFunction {
    Sphere,
    /// High-conditioned elliptic, condition number 1e6.
    Elliptic,
    BentCigar,
    Discus,
    /// Rosenbrock evaluated at `z + 1`, so its minimum is at the origin.
    Rosenbrock,
    Ackley,
    Rastrigin,
    Griewank,
    Schwefel12,
    /// `weight·first + (1 − weight)·second`.
    Composition {
        first: Box<BaseFunction>,
        second: Box<BaseFunction>,
        weight: f64,
    },
}

impl BaseFunction {
    pub fn evaluate(&self, z: &[f64]) -> f64 {
        let d = z.len();
        match self {
            BaseFunction::Sphere => z.iter().map(|v| v * v).sum(),
            BaseFunction::Elliptic => {
                if d == 1 {
                    return z[0] * z[0];
                }
                z.iter()
                    .enumerate()
                    .map(|(i, v)| libm::pow(1e6, i as f64 / (d - 1) as f64) * v * v)
                    .sum()
            }
            BaseFunction::BentCigar => z[0] * z[0] + 1e6 * z[1..].iter().map(|v| v * v).sum::<f64>(),
            BaseFunction::Discus => 1e6 * z[0] * z[0] + z[1..].iter().map(|v| v * v).sum::<f64>(),
            BaseFunction::Rosenbrock => z
                .windows(2)
                .map(|w| {
                    let (a, b) = (w[0] + 1.0, w[1] + 1.0);
                    100.0 * (a * a - b) * (a * a - b) + (a - 1.0) * (a - 1.0)
                })
                .sum(),
            BaseFunction::Ackley => {
                let n = d as f64;
                let sq = z.iter().map(|v| v * v).sum::<f64>() / n;
                let cs = z.iter().map(|v| libm::cos(2.0 * PI * v)).sum::<f64>() / n;
                let value = -20.0 * libm::exp(-0.2 * libm::sqrt(sq)) - libm::exp(cs) + 20.0 + E;
                value.max(0.0)
            }
            BaseFunction::Rastrigin => z
                .iter()
                .map(|v| v * v - 10.0 * libm::cos(2.0 * PI * v) + 10.0)
                .sum(),
            BaseFunction::Griewank => {
                let s = z.iter().map(|v| v * v).sum::<f64>() / 4000.0;
                let p = z
                    .iter()
                    .enumerate()
                    .map(|(i, v)| libm::cos(v / libm::sqrt((i + 1) as f64)))
                    .product::<f64>();
                s - p + 1.0
            }
            BaseFunction::Schwefel12 => {
                let mut prefix = 0.0;
                let mut total = 0.0;
                for v in z {
                    prefix += v;
                    total += prefix * prefix;
                }
                total
            }
            BaseFunction::Composition {
                first,
                second,
                weight,
            } => weight * first.evaluate(z) + (1.0 - weight) * second.evaluate(z),
        }
    }

    pub fn min_dim(&self) -> usize {
        match self {
            BaseFunction::BentCigar | BaseFunction::Discus | BaseFunction::Rosenbrock => 2,
            BaseFunction::Composition { first, second, .. } => first.min_dim().max(second.min_dim()),
            _ => 1,
        }
    }
}

/// Looks up a base function by its catalog name.
pub fn make_base_function(name: &str) -> Result<BaseFunction> {
    Ok(match name {
        "sphere" => BaseFunction::Sphere,
        "elliptic" => BaseFunction::Elliptic,
        "bent_cigar" => BaseFunction::BentCigar,
        "discus" => BaseFunction::Discus,
        "rosenbrock" => BaseFunction::Rosenbrock,
        "ackley" => BaseFunction::Ackley,
        "rastrigin" => BaseFunction::Rastrigin,
        "griewank" => BaseFunction::Griewank,
        "schwefel_1_2" => BaseFunction::Schwefel12,
        _ => return Err(Error::InvalidArgument("unknown base function")),
    })
}

/// A concrete benchmark instance.
#[derive(Debug, Clone)]
pub struct Problem {
    pub name: String,
    pub base: BaseFunction,
    pub bounds: SearchBounds,
    pub shift: Vec<f64>,
    pub rotation: OrthonormalBasis,
    pub f_opt: f64,
}

impl Problem {
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let diff: Vec<f64> = x.iter().zip(&self.shift).map(|(a, o)| a - o).collect();
        let z = self
            .rotation
            .to_eigen(&diff)
            .expect("dimension checked at construction");
        self.base.evaluate(&z) + self.f_opt
    }
}

impl Objective for Problem {
    fn dim(&self) -> usize {
        self.shift.len()
    }

    fn bounds(&self) -> &SearchBounds {
        &self.bounds
    }

    fn evaluate(&self, x: &[f64]) -> f64 {
        Problem::evaluate(self, x)
    }
}

/// `x ↦ base(Rᵀ(x − shift))` on `[−100, 100]^D`.
pub fn shift_rotate(
    name: impl Into<String>,
    base: BaseFunction,
    shift: Vec<f64>,
    rotation: OrthonormalBasis,
) -> Result<Problem> {
    check_dim(shift.len(), rotation.dim())?;
    if shift.len() < base.min_dim() {
        return Err(Error::InvalidArgument("dimension too small for base function"));
    }
    let bounds = SearchBounds::uniform(shift.len(), -100.0, 100.0)?;
    Ok(Problem {
        name: name.into(),
        base,
        bounds,
        shift,
        rotation,
        f_opt: 0.0,
    })
}

/// Modified Gram–Schmidt on a matrix of standard normal draws (row-major
/// draw order). Rank-deficient draws are redrawn.
pub fn random_rotation<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<OrthonormalBasis> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1"));
    }
    'retry: for _ in 0..16 {
        let mut cols: Vec<Vec<f64>> = alloc::vec![alloc::vec![0.0; dim]; dim];
        for i in 0..dim {
            for col in cols.iter_mut() {
                col[i] = StandardNormal.sample(rng);
            }
        }
        for j in 0..dim {
            for k in 0..j {
                let (done, rest) = cols.split_at_mut(j);
                let proj: f64 = done[k].iter().zip(&rest[0]).map(|(a, b)| a * b).sum();
                for (c, q) in rest[0].iter_mut().zip(&done[k]) {
                    *c -= proj * q;
                }
            }
            let norm = libm::sqrt(cols[j].iter().map(|v| v * v).sum());
            if !(norm > 1e-8) {
                continue 'retry;
            }
            cols[j].iter_mut().for_each(|v| *v /= norm);
        }
        let mut m = SquareMatrix::zeros(dim);
        for (j, col) in cols.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        return OrthonormalBasis::try_from_matrix(m);
    }
    Err(Error::NumericFailure("repeated rank-deficient rotation draws"))
}

/// Raw and floored function error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorValue {
    pub raw: f64,
    pub floored: f64,
}

pub fn function_error(best_fitness: f64, f_opt: f64) -> Result<ErrorValue> {
    let raw = best_fitness - f_opt;
    if raw < -1e-6 {
        return Err(Error::ImpossibleValue { raw });
    }
    let floored = if raw < ERROR_FLOOR { 0.0 } else { raw };
    Ok(ErrorValue { raw, floored })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Unimodal,
    Multimodal,
    Composition,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::Unimodal => "unimodal",
            Category::Multimodal => "multimodal",
            Category::Composition => "composition",
        }
    }
}

/// One entry of the function catalog.
#[derive(Debug, Clone, Copy)]
pub struct CatalogEntry {
    pub name: &'static str,
    base: &'static str,
    second: Option<&'static str>,
    pub rotated: bool,
    pub category: Category,
}

impl CatalogEntry {
    pub fn base_function(&self) -> BaseFunction {
        let first = make_base_function(self.base).expect("catalog names are valid");
        match self.second {
            None => first,
            Some(second) => BaseFunction::Composition {
                first: Box::new(first),
                second: Box::new(make_base_function(second).expect("catalog names are valid")),
                weight: 0.5,
            },
        }
    }

    pub fn min_dim(&self) -> usize {
        self.base_function().min_dim()
    }

    /// Builds an instance: shift uniform in `[−80, 80]^D` drawn first, then a
    /// random rotation when the entry is rotated.
    pub fn instantiate<R: Rng + ?Sized>(&self, dim: usize, rng: &mut R) -> Result<Problem> {
        if dim < self.min_dim() {
            return Err(Error::InvalidArgument("dimension too small for this function"));
        }
        let shift = (0..dim).map(|_| rng.random_range(-80.0..80.0)).collect();
        let rotation = if self.rotated {
            random_rotation(dim, rng)?
        } else {
            OrthonormalBasis::identity(dim)
        };
        shift_rotate(self.name, self.base_function(), shift, rotation)
    }
}

const fn entry(
    name: &'static str,
    base: &'static str,
    second: Option<&'static str>,
    rotated: bool,
    category: Category,
) -> CatalogEntry {
    CatalogEntry {
        name,
        base,
        second,
        rotated,
        category,
    }
}

/// The function suite: rotated unimodal, rotated multimodal, separable
/// variants, and one weighted composition.
pub const CATALOG: &[CatalogEntry] = &[
    entry("sphere", "sphere", None, false, Category::Unimodal),
    entry("rot_elliptic", "elliptic", None, true, Category::Unimodal),
    entry("rot_bent_cigar", "bent_cigar", None, true, Category::Unimodal),
    entry("rot_discus", "discus", None, true, Category::Unimodal),
    entry("schwefel_1_2", "schwefel_1_2", None, false, Category::Unimodal),
    entry("elliptic", "elliptic", None, false, Category::Unimodal),
    entry("rot_rosenbrock", "rosenbrock", None, true, Category::Multimodal),
    entry("rot_ackley", "ackley", None, true, Category::Multimodal),
    entry("rot_rastrigin", "rastrigin", None, true, Category::Multimodal),
    entry("rot_griewank", "griewank", None, true, Category::Multimodal),
    entry("rastrigin", "rastrigin", None, false, Category::Multimodal),
    entry("ackley", "ackley", None, false, Category::Multimodal),
    entry(
        "rot_composition",
        "rastrigin",
        Some("elliptic"),
        true,
        Category::Composition,
    ),
];

pub fn catalog_entry(name: &str) -> Result<&'static CatalogEntry> {
    CATALOG
        .iter()
        .find(|e| e.name == name)
        .ok_or(Error::InvalidArgument("unknown function name"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::SeedableRng;

    const BASES: [&str; 9] = [
        "sphere",
        "elliptic",
        "bent_cigar",
        "discus",
        "rosenbrock",
        "ackley",
        "rastrigin",
        "griewank",
        "schwefel_1_2",
    ];

    #[test]
    fn base_examples() {
        assert_eq!(make_base_function("sphere").unwrap().evaluate(&[0.0; 4]), 0.0);
        let r = make_base_function("rastrigin")
            .unwrap()
            .evaluate(&[1.0, 0.0, 0.0]);
        assert!((r - 1.0).abs() < 1e-12);
        let a = make_base_function("ackley").unwrap().evaluate(&[0.0; 5]);
        assert!(a.abs() <= 1e-12);
        assert!(make_base_function("nope").is_err());
    }

    #[test]
    fn every_base_is_zero_at_origin() {
        for name in BASES {
            let f = make_base_function(name).unwrap();
            assert!(f.evaluate(&[0.0; 7]).abs() <= 1e-12, "{name}");
        }
    }

    #[test]
    fn shift_rotate_examples() {
        let mut rng = crate::RunRng::seed_from_u64(9);
        let plain = shift_rotate(
            "s",
            BaseFunction::Rastrigin,
            vec![0.0; 3],
            OrthonormalBasis::identity(3),
        )
        .unwrap();
        let x = [0.3, -1.7, 2.2];
        assert_eq!(plain.evaluate(&x), BaseFunction::Rastrigin.evaluate(&x));

        let shift: Vec<f64> = (0..6).map(|_| rng.random_range(-80.0..80.0)).collect();
        let rot = random_rotation(6, &mut rng).unwrap();
        for name in BASES {
            let p = shift_rotate(
                name,
                make_base_function(name).unwrap(),
                shift.clone(),
                rot.clone(),
            )
            .unwrap();
            assert!(p.evaluate(&shift).abs() <= 1e-12, "{name}");
        }

        let sr = shift_rotate("a", BaseFunction::Sphere, shift.clone(), rot).unwrap();
        let s = shift_rotate("b", BaseFunction::Sphere, shift, OrthonormalBasis::identity(6)).unwrap();
        for _ in 0..100 {
            let x: Vec<f64> = (0..6).map(|_| rng.random_range(-100.0..100.0)).collect();
            assert!((sr.evaluate(&x) - s.evaluate(&x)).abs() <= 1e-10 * (1.0 + s.evaluate(&x)));
        }
    }

    #[test]
    fn rotation_examples() {
        let mut rng = crate::RunRng::seed_from_u64(1);
        let one = random_rotation(1, &mut rng).unwrap();
        assert_eq!(one.matrix()[(0, 0)].abs(), 1.0);
        for d in 1..20 {
            assert!(random_rotation(d, &mut rng).unwrap().orthonormality_error() <= 1e-10);
        }
        let a = random_rotation(5, &mut crate::RunRng::seed_from_u64(77)).unwrap();
        let b = random_rotation(5, &mut crate::RunRng::seed_from_u64(77)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rotation_preserves_level_values() {
        let mut rng = crate::RunRng::seed_from_u64(4);
        for name in BASES {
            let shift: Vec<f64> = (0..5).map(|_| rng.random_range(-80.0..80.0)).collect();
            let rot = random_rotation(5, &mut rng).unwrap();
            let base = make_base_function(name).unwrap();
            let p = shift_rotate(name, base.clone(), shift.clone(), rot.clone()).unwrap();
            for _ in 0..1000 {
                let y: Vec<f64> = (0..5).map(|_| rng.random_range(-3.0..3.0)).collect();
                let ry = rot.to_original(&y).unwrap();
                let x: Vec<f64> = ry.iter().zip(&shift).map(|(a, o)| a + o).collect();
                let (want, got) = (base.evaluate(&y), p.evaluate(&x));
                assert!(
                    (want - got).abs() <= 1e-9 * (1.0 + want.abs()),
                    "{name}: {want} vs {got}"
                );
            }
        }
    }

    #[test]
    fn sphere_family_monotone_on_rays() {
        let mut rng = crate::RunRng::seed_from_u64(6);
        for name in ["sphere", "elliptic", "bent_cigar", "discus", "schwefel_1_2"] {
            let shift: Vec<f64> = (0..4).map(|_| rng.random_range(-80.0..80.0)).collect();
            let rot = random_rotation(4, &mut rng).unwrap();
            let p = shift_rotate(name, make_base_function(name).unwrap(), shift.clone(), rot).unwrap();
            for _ in 0..50 {
                let dir: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
                let mut last = -1.0;
                for k in 0..100 {
                    let t = k as f64 * 0.5;
                    let x: Vec<f64> = shift.iter().zip(&dir).map(|(o, d)| o + t * d).collect();
                    let v = p.evaluate(&x);
                    assert!(v >= last);
                    last = v;
                }
            }
        }
    }

    #[test]
    fn error_floor_examples() {
        assert_eq!(function_error(3.0, 3.0).unwrap().floored, 0.0);
        assert_eq!(function_error(5e-9, 0.0).unwrap().floored, 0.0);
        assert_eq!(function_error(2e-8, 0.0).unwrap().floored, 2e-8);
        assert!(matches!(
            function_error(-1.0, 0.0),
            Err(Error::ImpossibleValue { .. })
        ));
    }

    #[test]
    fn catalog_instances_have_optimum_at_shift() {
        let mut rng = crate::RunRng::seed_from_u64(2);
        for e in CATALOG {
            let p = e.instantiate(10, &mut rng).unwrap();
            assert!(p.evaluate(&p.shift).abs() <= 1e-12, "{}", e.name);
            assert!(p.shift.iter().all(|v| v.abs() <= 80.0));
            assert_eq!(p.rotation == OrthonormalBasis::identity(10), !e.rotated);
        }
        assert!(catalog_entry("rot_rosenbrock")
            .unwrap()
            .instantiate(1, &mut rng)
            .is_err());
        assert!(catalog_entry("missing").is_err());
    }
}
