//! Reference-data directory loader.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::calibration::{
    census_histogram, CensusRow, ObservedSeries, ReferenceSeries, BIODIVERSITY, PESTICIDE,
    PRICE_INDEX, YIELD,
};
use crate::error::{ModelError, Result};
use crate::init::SizeHistogram;

pub const BIODIVERSITY_FILE: &str = "biodiversity.csv";
pub const PESTICIDE_FILE: &str = "pesticide.csv";
pub const PRICE_INDEX_FILE: &str = "price_index.csv";
pub const YIELD_FILE: &str = "yield.csv";
pub const CENSUS_FILE: &str = "structural_census.csv";

const CENSUS_COLUMNS: [&str; 5] = [
    "year",
    "size_class_low_ha",
    "size_class_high_ha",
    "farm_count",
    "total_land_ha",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceData {
    pub series: ReferenceSeries,
    pub census: Vec<CensusRow>,
    /// Farm-size distribution of the earliest census year.
    pub histogram: SizeHistogram,
}

struct Table {
    path: PathBuf,
    provenance: String,
    /// `(line number, fields)`.
    rows: Vec<(usize, Vec<String>)>,
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> ModelError {
    ModelError::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Reads a comma-separated file whose first line may be a `#` provenance
/// comment, checks the header and returns the data rows.
fn read_table(path: &Path, columns: &[&str]) -> Result<Table> {
    let text = std::fs::read_to_string(path).map_err(|e| ModelError::io(path, e))?;
    let provenance = text
        .lines()
        .next()
        .and_then(|l| l.strip_prefix('#'))
        .map(|l| l.trim().to_string())
        .unwrap_or_default();
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(1);
            parse_error(path, line, e.to_string())
        })?
        .iter()
        .map(str::to_string)
        .collect();
    if header != columns {
        return Err(parse_error(
            path,
            1 + usize::from(!provenance.is_empty()),
            format!("expected columns `{}`, found `{}`", columns.join(","), header.join(",")),
        ));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            parse_error(path, line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        rows.push((line, record.iter().map(str::to_string).collect()));
    }
    Ok(Table {
        path: path.to_path_buf(),
        provenance,
        rows,
    })
}

fn field<T: std::str::FromStr>(t: &Table, line: usize, name: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| parse_error(&t.path, line, format!("`{name}` is not a number: `{raw}`")))
}

fn annual_series(dir: &Path, file: &str, column: &str) -> Result<ObservedSeries> {
    let t = read_table(&dir.join(file), &["year", column])?;
    let mut points: Vec<(i32, f64)> = Vec::with_capacity(t.rows.len());
    for (line, row) in &t.rows {
        let year: i32 = field(&t, *line, "year", &row[0])?;
        let value: f64 = field(&t, *line, column, &row[1])?;
        if !(value.is_finite() && value > 0.0) {
            return Err(parse_error(
                &t.path,
                *line,
                format!("`{column}` must be positive, got {value}"),
            ));
        }
        if let Some(&(prev, _)) = points.last() {
            if year <= prev {
                return Err(parse_error(
                    &t.path,
                    *line,
                    format!("year {year} does not follow {prev}"),
                ));
            }
        }
        points.push((year, value));
    }
    if points.is_empty() {
        return Err(parse_error(&t.path, 0, "no data rows"));
    }
    ObservedSeries::new(points, t.provenance)
}

fn census_rows(path: &Path) -> Result<(Vec<CensusRow>, String)> {
    let t = read_table(path, &CENSUS_COLUMNS)?;
    let mut rows: Vec<CensusRow> = Vec::with_capacity(t.rows.len());
    for (line, raw) in &t.rows {
        let row = CensusRow {
            year: field(&t, *line, CENSUS_COLUMNS[0], &raw[0])?,
            low: field(&t, *line, CENSUS_COLUMNS[1], &raw[1])?,
            high: field(&t, *line, CENSUS_COLUMNS[2], &raw[2])?,
            farm_count: field(&t, *line, CENSUS_COLUMNS[3], &raw[3])?,
            total_land: field(&t, *line, CENSUS_COLUMNS[4], &raw[4])?,
        };
        let bad = |m: String| Err(parse_error(&t.path, *line, m));
        if !(row.low >= 0.0 && row.high > row.low && row.high.is_finite()) {
            return bad(format!("size class [{}, {}) is not a valid interval", row.low, row.high));
        }
        if !(row.farm_count.is_finite() && row.farm_count >= 0.0) {
            return bad(format!("farm_count must be non-negative, got {}", row.farm_count));
        }
        if !(row.total_land.is_finite() && row.total_land >= 0.0) {
            return bad(format!("total_land_ha must be non-negative, got {}", row.total_land));
        }
        if let Some(prev) = rows.last() {
            if row.year < prev.year {
                return bad(format!("year {} does not follow {}", row.year, prev.year));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_error(&t.path, 0, "no data rows"));
    }
    Ok((rows, t.provenance))
}

/// Loads every reference file from `dir`.
pub fn load_reference_data(dir: &Path) -> Result<ReferenceData> {
    let mut annual = BTreeMap::new();
    annual.insert(BIODIVERSITY.to_string(), annual_series(dir, BIODIVERSITY_FILE, "value")?);
    annual.insert(PESTICIDE.to_string(), annual_series(dir, PESTICIDE_FILE, "kg_per_ha")?);
    annual.insert(PRICE_INDEX.to_string(), annual_series(dir, PRICE_INDEX_FILE, "index")?);
    annual.insert(YIELD.to_string(), annual_series(dir, YIELD_FILE, "t_per_ha")?);
    let census_path = dir.join(CENSUS_FILE);
    let (census, provenance) = census_rows(&census_path)?;
    let series = ReferenceSeries::from_parts(annual, &census, &provenance)?;
    let histogram = census_histogram(&census, census[0].year)?;
    Ok(ReferenceData {
        series,
        census,
        histogram,
    })
}

/// Start-year size histogram only.
pub fn load_histogram(dir: &Path) -> Result<SizeHistogram> {
    let (census, _) = census_rows(&dir.join(CENSUS_FILE))?;
    census_histogram(&census, census[0].year)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibration::{FARMER_COUNT, LAND_LARGE};

    fn write_fixture(dir: &Path) {
        std::fs::write(dir.join(BIODIVERSITY_FILE), "# test bird index\nyear,value\n1990,1.0\n1991,0.9\n").unwrap();
        std::fs::write(dir.join(PESTICIDE_FILE), "year,kg_per_ha\n1990,5\n1991,4.9\n").unwrap();
        std::fs::write(dir.join(PRICE_INDEX_FILE), "year,index\n1990,1\n1991,1.1\n").unwrap();
        std::fs::write(dir.join(YIELD_FILE), "year,t_per_ha\n1990,7\n1991,7.1\n").unwrap();
        std::fs::write(
            dir.join(CENSUS_FILE),
            "year,size_class_low_ha,size_class_high_ha,farm_count,total_land_ha\n\
             1990,0,20,100,1000\n1990,20,100,50,2500\n1990,100,300,10,1500\n\
             2000,0,20,60,600\n2000,20,100,40,2000\n2000,100,300,15,2400\n",
        )
        .unwrap();
    }

    #[test]
    fn loads_well_formed_files() {
        let dir = tempfile::tempdir().unwrap();
        write_fixture(dir.path());
        let d = load_reference_data(dir.path()).unwrap();
        let bio = d.series.get(BIODIVERSITY).unwrap();
        assert_eq!(bio.len(), 2);
        assert_eq!(bio.provenance, "test bird index");
        assert_eq!(d.series.get(FARMER_COUNT).unwrap().len(), 11);
        assert_eq!(d.series.get(LAND_LARGE).unwrap().value_at(2000), Some(2400.0));
        assert_eq!(d.census.len(), 6);
        assert_eq!(d.histogram.total_count(), 160.0);
        assert_eq!(load_histogram(dir.path()).unwrap(), d.histogram);
    }

    #[test]
    fn negative_land_names_the_row() {
        let dir = tempfile::tempdir().unwrap();
        write_fixture(dir.path());
        std::fs::write(
            dir.path().join(CENSUS_FILE),
            "# note\nyear,size_class_low_ha,size_class_high_ha,farm_count,total_land_ha\n1990,0,20,100,1000\n1990,20,100,50,-5\n",
        )
        .unwrap();
        let err = load_reference_data(dir.path()).unwrap_err();
        match &err {
            ModelError::Parse { path, line, message } => {
                assert!(path.ends_with(CENSUS_FILE));
                assert_eq!(*line, 4);
                assert!(message.contains("total_land_ha"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(err.to_string().contains("structural_census.csv:4"));
    }

    #[test]
    fn malformed_and_unordered_rows_fail() {
        let dir = tempfile::tempdir().unwrap();
        write_fixture(dir.path());
        std::fs::write(dir.path().join(YIELD_FILE), "year,t_per_ha\n1990,7\n1991,abc\n").unwrap();
        let e = load_reference_data(dir.path()).unwrap_err().to_string();
        assert!(e.contains("yield.csv:3"), "{e}");

        std::fs::write(dir.path().join(YIELD_FILE), "year,t_per_ha\n1991,7\n1990,7\n").unwrap();
        assert!(load_reference_data(dir.path()).is_err());

        std::fs::write(dir.path().join(YIELD_FILE), "year,t_per_ha\n1990,0\n").unwrap();
        assert!(load_reference_data(dir.path()).is_err());

        std::fs::write(dir.path().join(YIELD_FILE), "year,tonnes\n1990,7\n").unwrap();
        let e = load_reference_data(dir.path()).unwrap_err().to_string();
        assert!(e.contains("expected columns"), "{e}");

        std::fs::write(dir.path().join(YIELD_FILE), "year,t_per_ha\n1990,7,8\n").unwrap();
        assert!(load_reference_data(dir.path()).is_err());
    }

    #[test]
    fn missing_file_is_an_io_error() {
        let dir = tempfile::tempdir().unwrap();
        write_fixture(dir.path());
        std::fs::remove_file(dir.path().join(PESTICIDE_FILE)).unwrap();
        let e = load_reference_data(dir.path()).unwrap_err();
        assert!(matches!(e, ModelError::Io { .. }));
        assert!(e.to_string().contains(PESTICIDE_FILE));
    }
}
