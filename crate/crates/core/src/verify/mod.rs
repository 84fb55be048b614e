//! Constructive witnesses and exact checkers for the operator's dynamical
//! properties. Every checker returns a [`WitnessReport`](crate::report::WitnessReport)
//! whose inequalities were evaluated without rounding.

mod blocks;
mod escape;
mod hyp;

pub use blocks::{
    exclusion_set, fhc0_check, fhc1_check, fhc2_fraction, ExclusionProbe, ExclusionSet, Fhc2Census, Fhc2Witness,
    LeakWitness,
};
pub use escape::{
    cool_certificate, periodicity_check, prelim_scan, CoolWitness, Escalation, PrelimOutcome, PrelimWitness,
};
pub use hyp::{
    block_witness, hyp0_witness, reiterative_witness, transitivity_witness, BlockWitness, Hyp0Witness, Placement,
    ReiterativeWitness, TransitivityStep, TransitivityWitness,
};
