//! Measurement chain: output coupling, heterodyne detection with lumped
//! amplifier noise, and the power/gain/photon-number calibrations.

mod calibration;
mod detection;

pub use calibration::{
    calibrate, duffing_frequency_vs_power, fit_attenuation, gain_from_attenuation,
    photons_from_power, power_from_photons, synthetic_dataset, AttenuationFit, CalibrationDataset,
    CalibrationPoint, CalibrationReport, DATASET_HEADER,
};
pub use detection::{detect, output_field, watts_per_photon, Detection, DetectionConfig};
