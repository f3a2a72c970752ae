pub mod coolcurve;
pub mod derive;
pub mod fit;
pub mod map;
pub mod spectra;
