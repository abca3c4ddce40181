use std::time::Instant;

use collective_engine::engine::{self, EngineParams, Model};
use collective_engine::oracle::{self, FullSpaceModel, IntegrationOptions};

fn fig3(model: Model) -> EngineParams {
    EngineParams {
        beta_h: 0.4,
        g_w: 0.1,
        alpha: 0.05,
        beta_0: 0.8,
        model,
        ..EngineParams::default()
    }
}

#[test]
fn three_particle_equivalence_all_models() {
    let start = Instant::now();
    let cases = oracle::equivalence_suite(3, 5, 2024).unwrap();
    for c in &cases {
        eprintln!(
            "{} thermo {:.2e} spectral {:.2e}",
            c.params.model,
            c.thermo_difference(),
            c.spectral_difference()
        );
        assert!(c.thermo_difference() < 1e-8, "{c:?}");
        assert!(c.spectral_difference() < 1e-6, "{c:?}");
    }
    eprintln!("elapsed {:?}", start.elapsed());
}

#[test]
fn four_particle_evolution_matches_blocks() {
    for model in [Model::DissipativeLoad, Model::Driven] {
        let p = fig3(model);
        let start = Instant::now();
        let m = FullSpaceModel::new(4, &p).unwrap();
        let rho0 = oracle::thermal_product_state(4, p.beta_0, p.omega_c, p.omega_h);
        let run = m.evolve(&rho0, &IntegrationOptions::for_params(&p)).unwrap();
        eprintln!(
            "{model}: t={:.1} steps={} residual={:.1e} in {:?}",
            run.time,
            run.steps,
            run.residual,
            start.elapsed()
        );
        let full = m.decompose(&run.state).unwrap();
        let block = engine::block_steady_state(&engine::thermal_block_state(4, &p).unwrap(), &p).unwrap();
        let (state, weight) = oracle::compare_blocks(&full, &block).unwrap();
        assert!(state < 1e-6, "{model}: trace distance {state}");
        assert!(weight < 1e-8, "{model}: weight {weight}");
        assert!(m.permutation_defect(&run.state) < 1e-12);
    }
}
