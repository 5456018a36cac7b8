//! Subspace spectrum over the equivalent RIS angle box, printed as a
//! coarse text map with the true and estimated peak.

use ristensor::bench::TrialData;
use ristensor::decomp::fourd_stdce;
use ristensor::extract::{estimate_ris_angles, ris_spectrum, RisSteeringModel, SearchGrid};
use ristensor::scenario::{to_equivalent, RisGeometry, SystemConfig};

fn main() -> ristensor::Result<()> {
    let cfg = SystemConfig::desk();
    let data = TrialData::draw(&cfg, 4)?;
    let obs = data.observe(&cfg, 10.0)?;
    let fs = fourd_stdce(&obs.y, cfg.paths, None)?;
    let model = RisSteeringModel::new(&data.pilots, &RisGeometry::from_config(&cfg), cfg.search.series_tol)?;
    let grid = SearchGrid {
        coarse_step_deg: 4.0,
        ..cfg.search.clone()
    };
    let b = fs.b.column(0).into_owned();
    let spec = ris_spectrum(&b, &model, &cfg, &grid)?;
    let ((t, p), v) = spec.peak().unwrap();
    println!("{} grid points, coarse peak {v:.3e} at θeq {t:.3} φeq {p:.3}", spec.points.len());

    let path = &data.realization.paths[0];
    let truth = to_equivalent(data.realization.ris_arrival, path.ris_departure);
    let (arr, dep) = estimate_ris_angles(&b, &model, &cfg, &cfg.search)?;
    println!("truth     arrival {:.5} departure {:.5} (θeq {:.3} φeq {:.3})", data.realization.ris_arrival, path.ris_departure, truth.0, truth.1);
    println!("estimate  arrival {arr:.5} departure {dep:.5}");
    Ok(())
}
