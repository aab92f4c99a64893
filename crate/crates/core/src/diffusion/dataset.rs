use rand::Rng;
use rayon::prelude::*;

use super::{simulate, DiffusionConfig};
use crate::cascade::Cascade;
use crate::error::{invalid_config, Error, Result};
use crate::netgen::{Network, NodeId};
use crate::seed::derived_rng;

/// Consecutive filtered-out simulations tolerated before giving up.
pub const MAX_CONSECUTIVE_REJECTIONS: u64 = 1_000_000;

const BLOCK: u64 = 256;

/// Simulates from uniformly drawn seed nodes until `count` cascades with at
/// least `min_size` events are collected, each truncated to `max_size`.
///
/// Attempt `i` uses its own RNG stream `(config.seed, i)`. Attempts are
/// evaluated in parallel blocks but accepted strictly in attempt order, so
/// the dataset does not depend on the thread count.
pub fn generate_dataset(net: &Network, config: &DiffusionConfig, count: usize) -> Result<Vec<Cascade>> {
    config.validate()?;
    if count == 0 {
        return Err(invalid_config("count must be positive"));
    }
    let n = net.node_count();
    let attempt = |index: u64| -> Result<Option<Cascade>> {
        let mut rng = derived_rng(config.seed, "cascade", index);
        let seed_node = rng.gen_range(0..n) as NodeId;
        let mut cascade = simulate(net, config, seed_node, &mut rng)?;
        if cascade.len() < config.min_size {
            return Ok(None);
        }
        cascade.truncate(config.max_size);
        Ok(Some(cascade))
    };

    let mut out = Vec::with_capacity(count);
    let mut rejections = 0u64;
    let mut next = 0u64;
    while out.len() < count {
        let block: Vec<Option<Cascade>> = (next..next + BLOCK).into_par_iter().map(attempt).collect::<Result<_>>()?;
        next += BLOCK;
        for result in block {
            match result {
                Some(cascade) => {
                    rejections = 0;
                    let id = format!("{}-{}", config.model, out.len());
                    out.push(cascade.with_id(id)?);
                    if out.len() == count {
                        break;
                    }
                }
                None => {
                    rejections += 1;
                    if rejections > MAX_CONSECUTIVE_REJECTIONS {
                        return Err(Error::ProgressFailure { rejections });
                    }
                }
            }
        }
    }
    Ok(out)
}
