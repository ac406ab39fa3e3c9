//! Channel-side scenario: geometry, medium and wind model in one place.

use crate::kernel::{Geometry, GeometryError, Medium};
use crate::wind::{TimeGrid, WindError, WindModel, WindPath};

/// Everything the channel formulas need: where source and receiver sit,
/// how fast particles diffuse, and how the wind behaves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub geometry: Geometry,
    pub medium: Medium,
    pub wind: WindModel,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioError {
    Geometry(GeometryError),
    Wind(WindError),
    /// A positive mean speed needs a horizontal source-receiver offset to
    /// define its direction.
    MeanWindWithoutDirection,
}

impl core::fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::Geometry(e) => write!(f, "{e}"),
            Self::Wind(e) => write!(f, "{e}"),
            Self::MeanWindWithoutDirection => write!(
                f,
                "mean wind speed > 0 requires a nonzero horizontal source-receiver offset"
            ),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ScenarioError {}

impl From<GeometryError> for ScenarioError {
    fn from(e: GeometryError) -> Self {
        Self::Geometry(e)
    }
}

impl From<WindError> for ScenarioError {
    fn from(e: WindError) -> Self {
        Self::Wind(e)
    }
}

impl Scenario {
    pub fn new(geometry: Geometry, medium: Medium, wind: WindModel) -> Result<Self, ScenarioError> {
        wind.kernel.validate()?;
        if wind.mean_speed > 0.0 && geometry.horizontal_distance() == 0.0 {
            return Err(ScenarioError::MeanWindWithoutDirection);
        }
        Ok(Self { geometry, medium, wind })
    }

    /// Unit vector the mean wind acts along (source toward receiver).
    pub fn wind_direction(&self) -> [f64; 2] {
        self.geometry.wind_direction()
    }

    /// Per-axis mean wind velocity components (m/s).
    pub fn mean_velocity(&self) -> [f64; 2] {
        let d = self.wind_direction();
        [self.wind.mean_speed * d[0], self.wind.mean_speed * d[1]]
    }

    /// Sample a wind realization on `grid` for this scenario.
    pub fn sample_wind(&self, grid: TimeGrid, seed: u64) -> Result<WindPath, WindError> {
        crate::wind::sample_wind_path(&self.wind, self.wind_direction(), grid, seed)
    }
}
