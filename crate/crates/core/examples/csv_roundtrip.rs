//! Writes a dataset and a trained checkpoint to disk and reads both back.
//!
//! cargo run --example csv_roundtrip

use dualgraph::dataio::{self, ColumnMap, CsvOptions};
use dualgraph::{gcn, synthesize, train_fold, SynthSpec, TrainConfig};

fn main() -> dualgraph::Result<()> {
    let dir = std::env::temp_dir().join("dualgraph-csv-roundtrip");
    std::fs::create_dir_all(&dir).map_err(|e| dualgraph::Error::Io {
        path: dir.clone(),
        source: e,
    })?;
    let data = synthesize(&SynthSpec {
        n_per_class: 30,
        d_total: 12,
        d_informative: 3,
        gap: 2.0,
        seed: 1,
    })?;
    let path = dir.join("dataset.csv");
    dataio::save_csv(&data, &path)?;
    let loaded = dataio::load_csv(&path, &CsvOptions::default())?;
    println!("dataset round trip exact: {}", loaded.dataset == data);

    // A file with other header names, loaded through a column map.
    let renamed = "subject,diagnosis,x1,x2\na,AD,0.1,2\nb,NC,0.4,NA\nc,NC,0.3,1\nd,AD,0.9,5\n";
    let map = ColumnMap::parse("subject = id\ndiagnosis = label\n")?;
    let options = CsvOptions {
        column_map: Some(&map),
        ..CsvOptions::default()
    };
    let other = dataio::read_csv(renamed.as_bytes(), &options)?;
    println!(
        "renamed file: {} rows kept, {} dropped, classes {:?}",
        other.dataset.len(),
        other.dropped_rows,
        other.dataset.class_names
    );

    let all: Vec<usize> = (0..data.len()).collect();
    let config = TrainConfig {
        epochs: 20,
        ..TrainConfig::default()
    };
    let run = train_fold(&data, &all, &[], &config)?;
    let ckpt = dir.join("checkpoint.txt");
    gcn::save_checkpoint(&run.model, &ckpt)?;
    println!(
        "checkpoint round trip exact: {}",
        gcn::load_checkpoint(&ckpt)? == run.model
    );
    println!("files in {}", dir.display());
    Ok(())
}
