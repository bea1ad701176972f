//! Fixed problem instances shared by the benches.

use frida_core::harness::generators as gen;
use frida_core::RegressionDataset;

/// A dataset and the query predictor to fit it at.
pub struct Instance {
    pub name: &'static str,
    pub dataset: RegressionDataset,
    pub x: Vec<f64>,
}

/// Sphere geodesic at its extrapolated query, the noisy geodesic at the
/// midpoint, and S²×S¹ inside and outside the nonnegative-weight region.
pub fn instances() -> Vec<Instance> {
    vec![
        Instance {
            name: "sphere-geodesic",
            dataset: gen::gen_sphere_geodesic(0).expect("sphere-geodesic").dataset,
            x: vec![gen::GEODESIC_X_TEST],
        },
        Instance {
            name: "sphere-noisy",
            dataset: gen::gen_sphere_noisy_geodesic(0, gen::NOISY_GEODESIC_SIGMA)
                .expect("sphere-noisy-geodesic")
                .dataset,
            x: vec![0.5],
        },
        Instance {
            name: "s2xs1-interior",
            dataset: gen::gen_s2xs1(0).expect("s2xs1").dataset,
            x: vec![0.5],
        },
        Instance {
            name: "s2xs1-signed",
            dataset: gen::gen_s2xs1(0).expect("s2xs1").dataset,
            x: vec![0.2],
        },
    ]
}
