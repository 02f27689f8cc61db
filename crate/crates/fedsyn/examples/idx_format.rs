//! Decode an IDX image/label pair from raw bytes.
//!
//! Run with `cargo run --release --example idx_format`.

use fedsyn::data::parse_idx_bytes;

fn main() -> fedsyn::Result<()> {
    // two 2x2 "images" plus matching labels, built by hand
    let mut images = vec![0, 0, 8, 3];
    for dim in [2u32, 2, 2] {
        images.extend_from_slice(&dim.to_be_bytes());
    }
    images.extend_from_slice(&[0, 255, 128, 64, 10, 20, 30, 40]);

    let mut labels = vec![0, 0, 8, 1];
    labels.extend_from_slice(&2u32.to_be_bytes());
    labels.extend_from_slice(&[7, 2]);

    let dataset = parse_idx_bytes(&images, &labels)?;
    println!(
        "{} samples of dimension {}, labels {:?}",
        dataset.len(),
        dataset.feature_dim(),
        dataset.labels
    );
    for row in dataset.samples.rows() {
        let pixels: Vec<String> = row.iter().map(|v| format!("{v:.3}")).collect();
        println!("[{}]", pixels.join(", "));
    }

    // a truncated stream reports the byte offset where parsing failed
    let err = parse_idx_bytes(&images[..images.len() - 3], &labels).unwrap_err();
    println!("truncated stream: {err}");
    Ok(())
}
