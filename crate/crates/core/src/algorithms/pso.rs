use alloc::vec::Vec;

use rand::Rng;

use super::{FamilyParams, Offspring};
use crate::error::Result;
use crate::linalg::OrthonormalBasis;
use crate::operators::{
    inertia_weight, pso_position_update, pso_velocity_eigen, pso_velocity_original, velocity_limit, Particle,
    PsoCoefficients, SearchBounds, VelocityScheme,
};
use crate::selector::{classify_outcome_pso, CoordinateSystem};

pub(super) struct Swarm {
    pub particles: Vec<Particle>,
    pub gbest_position: Vec<f64>,
    pub gbest_fitness: f64,
    limit: Vec<f64>,
    coeffs: PsoCoefficients,
    inertia_schedule: bool,
}

impl Swarm {
    /// Positions uniform in the box, velocities uniform in `±limit`.
    pub fn init<R: Rng + ?Sized>(
        np: usize,
        params: FamilyParams,
        bounds: &SearchBounds,
        rng: &mut R,
        eval: &mut dyn FnMut(&[f64]) -> Result<f64>,
    ) -> Result<Self> {
        let (coeffs, fraction, inertia_schedule) = match params {
            FamilyParams::PsoW {
                c1,
                c2,
                velocity_fraction,
            } => (
                PsoCoefficients {
                    scheme: VelocityScheme::InertiaWeight(0.9),
                    c1,
                    c2,
                },
                velocity_fraction,
                true,
            ),
            FamilyParams::PsoCf {
                c1,
                c2,
                chi,
                velocity_fraction,
            } => (
                PsoCoefficients {
                    scheme: VelocityScheme::Constriction(chi),
                    c1,
                    c2,
                },
                velocity_fraction,
                false,
            ),
            _ => unreachable!("swarm built for a DE family"),
        };
        let limit = velocity_limit(bounds, fraction);
        let mut particles = Vec::with_capacity(np);
        for _ in 0..np {
            let position = bounds.sample(rng);
            let velocity = limit
                .iter()
                .map(|l| l * (2.0 * rng.random::<f64>() - 1.0))
                .collect();
            particles.push(Particle {
                pbest_position: position.clone(),
                position,
                velocity,
                pbest_fitness: f64::INFINITY,
                fitness: f64::INFINITY,
            });
        }
        for p in particles.iter_mut() {
            let f = eval(&p.position)?;
            p.record(f);
        }
        let mut swarm = Swarm {
            gbest_position: particles[0].pbest_position.clone(),
            gbest_fitness: particles[0].pbest_fitness,
            particles,
            limit,
            coeffs,
            inertia_schedule,
        };
        swarm.sync_gbest();
        Ok(swarm)
    }

    pub fn begin_generation(&mut self, fes: u64, budget: u64) {
        if self.inertia_schedule {
            self.coeffs.scheme = VelocityScheme::InertiaWeight(inertia_weight(fes, budget));
        }
    }

    /// Moves particle `i`: `r1` then `r2` are drawn, one uniform per coordinate.
    pub fn offspring<R: Rng + ?Sized>(
        &mut self,
        i: usize,
        system: CoordinateSystem,
        basis: &OrthonormalBasis,
        bounds: &SearchBounds,
        rng: &mut R,
    ) -> Result<Offspring> {
        let d = self.limit.len();
        let r1: Vec<f64> = (0..d).map(|_| rng.random()).collect();
        let r2: Vec<f64> = (0..d).map(|_| rng.random()).collect();
        let p = &self.particles[i];
        let limit = Some(self.limit.as_slice());
        let mut velocity = match system {
            CoordinateSystem::Original => {
                pso_velocity_original(p, &self.gbest_position, &self.coeffs, &r1, &r2, limit)?
            }
            CoordinateSystem::Eigen => {
                pso_velocity_eigen(p, &self.gbest_position, &self.coeffs, &r1, &r2, basis, limit)?
            }
        };
        let position = pso_position_update(&p.position, &mut velocity, bounds)?;
        let p = &mut self.particles[i];
        p.velocity = velocity;
        p.position.clone_from(&position);
        Ok(Offspring {
            position,
            system: Some(system),
        })
    }

    /// pbest updates per particle, then one synchronous gbest update.
    pub fn absorb(&mut self, offspring: &[Offspring], fitness: &[f64]) -> Vec<bool> {
        let improved = offspring
            .iter()
            .zip(fitness)
            .enumerate()
            .map(|(i, (_, &f))| {
                let p = &mut self.particles[i];
                let better = classify_outcome_pso(f, p.pbest_fitness);
                p.record(f);
                better
            })
            .collect();
        self.sync_gbest();
        improved
    }

    fn sync_gbest(&mut self) {
        for p in &self.particles {
            if p.pbest_fitness < self.gbest_fitness {
                self.gbest_fitness = p.pbest_fitness;
                self.gbest_position.clone_from(&p.pbest_position);
            }
        }
    }
}
