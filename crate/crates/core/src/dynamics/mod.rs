//! Time evolution of `iψ_t + Δψ + μ|ψ|^{q-2}ψ + |ψ|^{p-2}ψ = 0`.

mod evolve;
mod experiments;
mod field;

pub use evolve::{
    evolve, virial_check, BlowUpSignals, EvolutionTrace, EvolveConfig, Outcome, VirialCertificate, VirialReport,
};
pub use experiments::{
    classify_datum, has_classifier, orbital_distance, prediction_experiment, stability_experiment, Prediction,
    PredictionExperiment, StabilityReport, StabilityTrial, Verdict,
};
pub use field::{DynamicsGrid, Observables, WaveField};
