//! Closed-form dispersive model: cavity population, transmitted density,
//! click probabilities, contrast and the optimal cavity decay.

mod click;
mod population;

pub use click::{
    click_probability, click_probability_infinite, contrast_approx, contrast_dispersive,
    contrast_for_group, finite_time_delta, finite_time_delta_approx, optimal_cavity_decay,
    optimal_cavity_decay_asymptote, ApproxContrast, Branch, ClickProbability, Counting,
};
pub use population::{
    cavity_population, cavity_population_spectral, transmitted_density, PopulationCurve,
    SpectralWindow,
};
