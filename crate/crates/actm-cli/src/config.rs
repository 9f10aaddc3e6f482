//! The project configuration file: a TOML document whose keys carry their
//! units in the name. Everything has a default matching the reference
//! forceps, so a config file only states what differs. Unknown keys are
//! rejected so a typo cannot silently fall back to a default.

use actm::beam_fem::{CrossSection, DesignBox, Material};
use actm::ga::{GaConfig, NsmLinearityProblem, ShapeSpace};
use actm::geometry::{AngleSchedule, CrankGeometry};
use actm::presets;
use actm::synthesis::{PositiveSpring, SynthesisConfig};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

fn err(message: impl Into<String>) -> ConfigError {
    ConfigError(message.into())
}

const DEG: f64 = std::f64::consts::PI / 180.0;
const MM: f64 = 1e-3;

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometrySection {
    pub w_mm: f64,
    pub r_mm: f64,
}

impl Default for GeometrySection {
    fn default() -> Self {
        Self {
            w_mm: presets::ANCHOR_OFFSET / MM,
            r_mm: presets::CRANK_RADIUS / MM,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpringSection {
    pub k_mnm_per_deg: f64,
}

impl Default for SpringSection {
    fn default() -> Self {
        Self { k_mnm_per_deg: 0.3 }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct MaterialSection {
    pub youngs_modulus_gpa: f64,
    pub poisson_ratio: f64,
    pub yield_mpa: f64,
}

impl Default for MaterialSection {
    fn default() -> Self {
        Self {
            youngs_modulus_gpa: 3.45,
            poisson_ratio: 0.39,
            yield_mpa: 106.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct SectionSection {
    pub thickness_mm: f64,
    pub width_mm: f64,
}

impl Default for SectionSection {
    fn default() -> Self {
        Self {
            thickness_mm: 2.0,
            width_mm: 6.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoxSection {
    pub length_mm: f64,
    pub depth_mm: f64,
    pub pin_a_mm: [f64; 2],
    pub pin_b_mm: [f64; 2],
}

impl Default for BoxSection {
    fn default() -> Self {
        Self {
            length_mm: 30.0,
            depth_mm: 12.0,
            pin_a_mm: [presets::PIN_A.0 / MM, presets::PIN_A.1 / MM],
            pin_b_mm: [presets::PIN_B.0 / MM, presets::PIN_B.1 / MM],
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct WindowSection {
    pub theta1_deg: f64,
    pub theta2_deg: f64,
    pub step_deg: f64,
}

impl Default for WindowSection {
    fn default() -> Self {
        Self {
            theta1_deg: 45.0,
            theta2_deg: 90.0,
            step_deg: 15.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct FemSection {
    pub n_elements: usize,
    pub prelude_steps: usize,
}

impl Default for FemSection {
    fn default() -> Self {
        Self {
            n_elements: presets::N_ELEMENTS,
            prelude_steps: presets::PRELUDE_STEPS,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaSection {
    pub population_size: usize,
    pub crossover_probability: f64,
    pub mutation_mu: f64,
    pub mutation_sigma: f64,
    pub cull_fraction: f64,
    pub max_generations: usize,
    pub target_fraction: f64,
    pub rng_seed: u64,
}

impl Default for GaSection {
    fn default() -> Self {
        let ga = GaConfig::default();
        Self {
            population_size: ga.population_size,
            crossover_probability: ga.crossover_probability,
            mutation_mu: ga.mutation_mu,
            mutation_sigma: ga.mutation_sigma,
            cull_fraction: ga.cull_fraction,
            max_generations: ga.max_generations,
            target_fraction: 0.02,
            rng_seed: ga.rng_seed,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: "out".into() }
    }
}

/// The whole config file. Every table is optional.
#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProjectConfig {
    pub geometry: GeometrySection,
    pub spring: SpringSection,
    pub material: MaterialSection,
    pub section: SectionSection,
    pub design_box: BoxSection,
    pub window: WindowSection,
    pub fem: FemSection,
    pub ga: GaSection,
    pub output: OutputSection,
}

impl ProjectConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| err(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| err(format!("cannot parse config {}: {e}", path.display())))
    }

    /// Converts to SI and runs every module's own validation.
    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        let geometry = CrankGeometry::new(self.geometry.w_mm * MM, self.geometry.r_mm * MM)
            .map_err(|e| err(format!("geometry: {e}")))?;
        let stiffness = self.spring.k_mnm_per_deg * 1e-3 / DEG;
        let spring =
            PositiveSpring::new(stiffness, 0.0).map_err(|e| err(format!("spring: {e}")))?;
        let material = Material::new(
            self.material.youngs_modulus_gpa * 1e9,
            self.material.poisson_ratio,
            self.material.yield_mpa * 1e6,
        )
        .map_err(|e| err(format!("material: {e}")))?;
        let section = CrossSection::new(self.section.thickness_mm * MM, self.section.width_mm * MM)
            .map_err(|e| err(format!("section: {e}")))?;
        let design_box = DesignBox::new(self.design_box.length_mm * MM, self.design_box.depth_mm * MM)
            .map_err(|e| err(format!("design box: {e}")))?;
        let pin_a = (self.design_box.pin_a_mm[0] * MM, self.design_box.pin_a_mm[1] * MM);
        let pin_b = (self.design_box.pin_b_mm[0] * MM, self.design_box.pin_b_mm[1] * MM);
        let space = ShapeSpace::new(design_box, pin_a, pin_b)
            .map_err(|e| err(format!("design box: {e}")))?;
        let relaxed_chord = ((pin_b.0 - pin_a.0).powi(2) + (pin_b.1 - pin_a.1).powi(2)).sqrt();

        let theta1 = self.window.theta1_deg * DEG;
        let theta2 = self.window.theta2_deg * DEG;
        let synthesis = SynthesisConfig::new(geometry, spring, theta1, theta2, relaxed_chord)
            .map_err(|e| err(format!("window: {e}")))?;
        if !(self.window.step_deg > 0.0) {
            return Err(err("window: step_deg must be positive"));
        }
        let steps_exact = self.window.theta2_deg / self.window.step_deg;
        let steps = steps_exact.round();
        if (steps_exact - steps).abs() > 1e-9 || steps < 1.0 {
            return Err(err(format!(
                "window: step_deg {} must divide theta2_deg {}",
                self.window.step_deg, self.window.theta2_deg
            )));
        }
        let schedule = AngleSchedule::new(theta1, theta1 + theta2, steps as usize + 1)
            .map_err(|e| err(format!("window: {e}")))?;

        if self.fem.n_elements == 0 {
            return Err(err("fem: n_elements must be positive"));
        }

        let ga = GaConfig {
            population_size: self.ga.population_size,
            crossover_probability: self.ga.crossover_probability,
            mutation_mu: self.ga.mutation_mu,
            mutation_sigma: self.ga.mutation_sigma,
            cull_fraction: self.ga.cull_fraction,
            max_generations: self.ga.max_generations,
            rng_seed: self.ga.rng_seed,
            ..GaConfig::default()
        };
        ga.validate().map_err(|e| err(format!("ga: {e}")))?;
        if !(self.ga.target_fraction > 0.0) || !self.ga.target_fraction.is_finite() {
            return Err(err("ga: target_fraction must be positive and finite"));
        }

        Ok(Resolved {
            geometry,
            spring,
            material,
            section,
            design_box,
            space,
            relaxed_chord,
            synthesis,
            schedule,
            n_elements: self.fem.n_elements,
            prelude_steps: self.fem.prelude_steps,
            ga,
            target_fraction: self.ga.target_fraction,
            out_dir: self.output.dir.clone(),
        })
    }
}

/// The configuration in SI units with every invariant already checked.
pub struct Resolved {
    pub geometry: CrankGeometry,
    pub spring: PositiveSpring,
    pub material: Material,
    pub section: CrossSection,
    pub design_box: DesignBox,
    pub space: ShapeSpace,
    pub relaxed_chord: f64,
    pub synthesis: SynthesisConfig,
    /// The operating window sampled at the configured step.
    pub schedule: AngleSchedule,
    pub n_elements: usize,
    pub prelude_steps: usize,
    pub ga: GaConfig,
    pub target_fraction: f64,
    pub out_dir: PathBuf,
}

impl Resolved {
    pub fn linearity_problem(&self) -> NsmLinearityProblem {
        NsmLinearityProblem {
            geometry: self.geometry,
            section: self.section,
            material: self.material,
            design_box: self.design_box,
            relaxed_chord: self.relaxed_chord,
            window: self.schedule.clone(),
            n_elements: self.n_elements,
            prelude_steps: self.prelude_steps,
            target_fraction: self.target_fraction,
        }
    }
}

/// The design file `optimize` writes and `synthesize`/`sweep` read back,
/// also in millimeter/GPa units.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DesignFile {
    pub design: DesignTable,
    pub material: MaterialSection,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DesignTable {
    pub key_points_mm: [[f64; 2]; 5],
    pub thickness_mm: f64,
    pub width_mm: f64,
}

impl DesignFile {
    pub fn from_design(design: &actm::beam_fem::BeamDesign) -> Self {
        let section = design.section();
        let material = design.material();
        Self {
            design: DesignTable {
                key_points_mm: design.key_points().map(|(x, y)| [x / MM, y / MM]),
                thickness_mm: section.in_plane_thickness() / MM,
                width_mm: section.out_of_plane_width() / MM,
            },
            material: MaterialSection {
                youngs_modulus_gpa: material.youngs_modulus() / 1e9,
                poisson_ratio: material.poisson_ratio(),
                yield_mpa: material.yield_strength() / 1e6,
            },
        }
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| err(format!("cannot read design {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| err(format!("cannot parse design {}: {e}", path.display())))
    }

    pub fn to_design(
        &self,
        design_box: DesignBox,
    ) -> Result<actm::beam_fem::BeamDesign, ConfigError> {
        let material = Material::new(
            self.material.youngs_modulus_gpa * 1e9,
            self.material.poisson_ratio,
            self.material.yield_mpa * 1e6,
        )
        .map_err(|e| err(format!("design material: {e}")))?;
        let section = CrossSection::new(
            self.design.thickness_mm * MM,
            self.design.width_mm * MM,
        )
        .map_err(|e| err(format!("design section: {e}")))?;
        let key_points = self.design.key_points_mm.map(|[x, y]| (x * MM, y * MM));
        actm::beam_fem::BeamDesign::new(key_points, section, material, design_box)
            .map_err(|e| err(format!("design: {e}")))
    }
}
