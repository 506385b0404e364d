//! Compresses a tag file (or a random tag matrix) into dense side features and
//! shows how much of `T Tᵀ` each component carries.
//!
//! cargo run --release --example pca_side_features -- [tags-file items-ratings-file] [components]

use std::path::PathBuf;

use cfn::ingest::{parse_ratings, parse_tags, FileFormat, IdMap, TagMatrix};
use cfn::sideinfo::pca_compress;
use cfn::{Orientation, SparseRatings};
use rand::{Rng, SeedableRng};

fn random_tags() -> cfn::Result<TagMatrix> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let mut t = Vec::new();
    for e in 0..40 {
        for g in 0..25 {
            if rng.random::<f64>() < 0.2 {
                t.push((e, g, rng.random_range(1..5) as f64));
            }
        }
    }
    let mut tags = IdMap::new();
    for g in 0..25 {
        tags.intern(&format!("tag{g}"));
    }
    Ok(TagMatrix {
        counts: SparseRatings::from_triplets(40, 25, Orientation::ItemRows, &t)?,
        tags,
    })
}

fn main() -> cfn::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let tags = match (args.first(), args.get(1)) {
        (Some(tags), Some(ratings)) => {
            let ratings = PathBuf::from(ratings);
            let mut items = parse_ratings(&ratings, FileFormat::from_path(&ratings), None)?.items;
            let tags = PathBuf::from(tags);
            parse_tags(&tags, FileFormat::from_path(&tags), &mut items)?
        }
        _ => random_tags()?,
    };
    let k: usize = args.get(2).map_or(10, |s| s.parse().expect("components"));
    let y = pca_compress(&tags, k)?;

    let total: f64 = tags.counts.values().iter().map(|v| v * v).sum();
    println!("{} entities, {} tags, trace(T Tᵀ) = {total:.1}", tags.n_entities(), tags.n_tags());
    let mut cumulative = 0.0;
    for c in 0..y.dim() {
        let ev: f64 = y.column(c).iter().map(|v| v * v).sum();
        cumulative += ev;
        println!("component {:>2}  eigenvalue {ev:>10.3}  cumulative {:.1}%", c + 1, 100.0 * cumulative / total);
    }
    Ok(())
}
