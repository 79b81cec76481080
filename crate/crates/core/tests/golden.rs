//! Frozen baseline trajectory (desk scale, seed 1) and shipped-fixture checks.
//! A change here means the simulated dynamics changed; refreeze deliberately.

use std::path::PathBuf;

use agrobio::io::load_reference_data;
use agrobio::{run_replica, ModelParams, ScenarioConfig};

fn reference_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/reference")
}

// (year, eps, active farmers, price, weighted pesticide)
const GOLDEN: [(i32, f64, f64, f64, f64); 5] = [
    (1990, 1.0, 30000.0, 80.70127449500477, 4.995396759828775),
    (2000, 0.9691508996515383, 25213.0, 78.95939724420393, 4.126771434188358),
    (2021, 0.604687012931349, 12548.0, 75.06107557906839, 3.30172130483116),
    (2050, 0.4699700159528045, 8231.0, 69.58220930292862, 2.423699685784228),
    (2075, 0.4463083321054409, 5760.0, 65.04906848758438, 1.839332194452085),
];

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * b.abs().max(1.0)
}

#[test]
fn baseline_desk_trajectory_is_frozen() {
    let data = load_reference_data(&reference_dir()).unwrap();
    let params = ModelParams::default().desk_scale();
    let run = run_replica(&params, &ScenarioConfig::default(), &data.histogram, 1).unwrap();
    assert_eq!(run.frames.len(), 86);
    for (year, eps, n, price, pest) in GOLDEN {
        let f = run.frames.iter().find(|f| f.year == year).unwrap();
        assert!(close(f.eps, eps), "{year} eps {}", f.eps);
        assert_eq!(f.n_active, n, "{year}");
        assert!(close(f.price, price), "{year} price {}", f.price);
        assert!(close(f.weighted_pesticide_mean, pest), "{year} pesticide {}", f.weighted_pesticide_mean);
    }
}

#[test]
fn shipped_fixtures_describe_the_1990_sector() {
    let data = load_reference_data(&reference_dir()).unwrap();
    let land: f64 = data.census.iter().filter(|r| r.year == 1990).map(|r| r.total_land).sum();
    assert!((land / 1e7 - 1.0).abs() < 0.01, "{land}");
    assert!((data.histogram.total_count() - 300_000.0).abs() < 1.0);
    let bio = data.series.get(agrobio::calibration::BIODIVERSITY).unwrap();
    assert_eq!(bio.value_at(1990), Some(1.0));
    for name in ["pesticide", "price_index", "yield", "farmer_count"] {
        assert!(data.series.get(name).is_some(), "{name}");
    }
}
