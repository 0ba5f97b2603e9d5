//! Print feature dimensions and network parameter counts for a config.

use crate::config::RunConfig;
use crate::error::CliError;

fn dense_params(dims: &[usize]) -> usize {
    dims.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

fn dims_string(dims: &[usize]) -> String {
    dims.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(",")
}

pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    cfg.features.validate()?;
    let bins = cfg.stft.bins();
    let frame_dim = cfg.features.frame_dim(bins);
    let context_dim = cfg.features.context_dim(bins);

    let mut gen_dims = vec![cfg.train.z_dim + context_dim];
    gen_dims.extend_from_slice(&cfg.train.hidden_layers);
    gen_dims.push(bins);
    let mut disc_dims = vec![bins + frame_dim];
    disc_dims.extend_from_slice(&cfg.train.hidden_layers);
    disc_dims.push(1);

    println!("feature_set = {}", cfg.features.feature_set);
    println!("frame_dim = {frame_dim}");
    println!("context_frames = {}", 2 * cfg.features.context + 1);
    println!("context_dim = {context_dim}");
    println!("bins = {bins}");
    println!("z_dim = {}", cfg.train.z_dim);
    println!("generator_dims = {}", dims_string(&gen_dims));
    println!("generator_params = {}", dense_params(&gen_dims));
    println!("discriminator_dims = {}", dims_string(&disc_dims));
    println!("discriminator_params = {}", dense_params(&disc_dims));
    Ok(())
}
