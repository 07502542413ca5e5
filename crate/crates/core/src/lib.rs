//! Edge-node biosignal pipeline.
//!
//! * [`signal`]: records, windowing, Bonn-style ingestion, synthetic data
//! * [`spectral`]: magnitude spectra and the five frequency features
//! * [`ffc`]: threshold classifier, baselines, stratified cross-validation
//! * [`sae`]: stacked autoencoder codec with an edge/cloud split
//! * [`benchmark`]: joint versus per-modality compression tables
//! * [`wire`]: edge-to-cloud message framing
//! * [`sim`]: class-based transmission simulation and energy accounting

pub mod benchmark;
pub mod ffc;
pub mod sae;
pub mod signal;
pub mod sim;
pub mod spectral;
pub mod wire;
