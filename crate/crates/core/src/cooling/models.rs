use crate::cooling::lossy::bath_occupancy_lossy_cavity;
use crate::cooling::occupancy::{equilibrium_occupancy, Branch};
use crate::cooling::ponderomotive::strong_coupling_estimate;
use crate::error::{Error, Result};
use crate::langevin::occupancy::phonon_occupancy_numeric;
use crate::model::drive::SqueezedDrive;
use crate::model::system::OmSystem;

/// A way of computing the steady-state phonon occupancy.
pub trait OccupancyModel: Send + Sync {
    fn name(&self) -> &'static str;
    fn describe(&self) -> &'static str;
    fn phonon_occupancy(&self, sys: &OmSystem, drive: &SqueezedDrive) -> Result<f64>;
}

/// Weak-coupling closed form; hands generic phases to the Langevin model.
pub struct ClosedForm;

impl OccupancyModel for ClosedForm {
    fn name(&self) -> &'static str {
        "closed-form"
    }

    fn describe(&self) -> &'static str {
        "weak-coupling detailed balance with the lossy-cavity bath; generic phases use the Langevin model"
    }

    fn phonon_occupancy(&self, sys: &OmSystem, drive: &SqueezedDrive) -> Result<f64> {
        match Branch::of_drive(sys, drive) {
            Ok(_) => equilibrium_occupancy(sys, bath_occupancy_lossy_cavity(sys, drive)?.bath.n_bath),
            Err(Error::GenericPhase { .. }) => Langevin.phonon_occupancy(sys, drive),
            Err(e) => Err(e),
        }
    }
}

pub struct Langevin;

impl OccupancyModel for Langevin {
    fn name(&self) -> &'static str {
        "langevin"
    }

    fn describe(&self) -> &'static str {
        "integrated mechanical spectrum of the full linearized model"
    }

    fn phonon_occupancy(&self, sys: &OmSystem, drive: &SqueezedDrive) -> Result<f64> {
        phonon_occupancy_numeric(sys, drive)
    }
}

/// Second-order estimate for a coherent drive at zero bath temperature.
pub struct StrongCoupling;

impl OccupancyModel for StrongCoupling {
    fn name(&self) -> &'static str {
        "strong-coupling"
    }

    fn describe(&self) -> &'static str {
        "(kappa/4 Omega)^2 + (g/Omega)^2/2, coherent drive and zero bath temperature only"
    }

    fn phonon_occupancy(&self, sys: &OmSystem, drive: &SqueezedDrive) -> Result<f64> {
        if !drive.is_coherent() {
            return Err(Error::invalid("drive", "the strong-coupling estimate needs a coherent drive"));
        }
        if sys.n_th() != 0.0 {
            return Err(Error::invalid("n_th", "the strong-coupling estimate needs a zero-temperature bath"));
        }
        Ok(strong_coupling_estimate(sys))
    }
}

/// Named occupancy models.
pub struct OccupancyRegistry {
    models: Vec<Box<dyn OccupancyModel>>,
}

impl Default for OccupancyRegistry {
    fn default() -> Self {
        OccupancyRegistry { models: vec![Box::new(ClosedForm), Box::new(Langevin), Box::new(StrongCoupling)] }
    }
}

impl OccupancyRegistry {
    pub fn register(&mut self, model: Box<dyn OccupancyModel>) {
        self.models.retain(|m| m.name() != model.name());
        self.models.push(model);
    }

    pub fn get(&self, name: &str) -> Result<&dyn OccupancyModel> {
        self.models.iter().find(|m| m.name() == name).map(|m| m.as_ref()).ok_or_else(|| {
            Error::invalid("model", format!("unknown model `{name}`, expected one of {}", self.names().join(", ")))
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.models.iter().map(|m| m.name()).collect()
    }
}
