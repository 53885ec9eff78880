//! Train/test partitioning.

use rand::seq::SliceRandom;

use crate::dataset::Dataset;
use crate::error::{MlError, Result};
use crate::rng;

/// Stratified split on a binary target.
///
/// Each class is shuffled with a stream derived from `seed` and the first
/// `round(n_class * test_fraction)` rows go to the test side. Both sides keep
/// the original row order.
pub fn stratified_split(d: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    check_fraction(test_fraction)?;
    d.check_binary()?;
    let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, &y) in d.target().iter().enumerate() {
        by_class[y as usize].push(i);
    }
    for (class, rows) in by_class.iter().enumerate() {
        if rows.len() < 2 {
            return Err(MlError::ClassTooSmall {
                class: class as u8,
                count: rows.len(),
                required: 2,
            });
        }
    }

    let mut test = Vec::new();
    let mut train = Vec::new();
    for (class, rows) in by_class.iter_mut().enumerate() {
        let mut r = rng::stream(seed, &format!("stratified-split/{class}"));
        rows.shuffle(&mut r);
        let n_test = (rows.len() as f64 * test_fraction).round() as usize;
        let n_test = n_test.clamp(1, rows.len() - 1);
        test.extend_from_slice(&rows[..n_test]);
        train.extend_from_slice(&rows[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((d.subset(&train), d.subset(&test)))
}

/// Unstratified shuffled split, used for regression targets.
pub fn shuffle_split(d: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    check_fraction(test_fraction)?;
    if d.len() < 2 {
        return Err(MlError::EmptyDataset);
    }
    let mut idx: Vec<usize> = (0..d.len()).collect();
    idx.shuffle(&mut rng::stream(seed, "shuffle-split"));
    let n_test = ((d.len() as f64 * test_fraction).round() as usize).clamp(1, d.len() - 1);
    let mut test = idx[..n_test].to_vec();
    let mut train = idx[n_test..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok((d.subset(&train), d.subset(&test)))
}

fn check_fraction(f: f64) -> Result<()> {
    if f.is_finite() && f > 0.0 && f < 1.0 {
        Ok(())
    } else {
        Err(MlError::InvalidFraction(f))
    }
}
