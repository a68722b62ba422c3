//! Random instances with the shape of the 30-activity archive set: a dummy
//! source and sink, four renewable resources, durations in 1..=10 and
//! capacities set between the largest request and the peak of the
//! earliest-start schedule.

use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ttef_core::psplib::{render_sm, RawPsplib};

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    /// Output directory; created if missing.
    pub dir: PathBuf,
    #[arg(long, default_value_t = 9)]
    pub count: usize,
    /// Seed of the first instance; the rest use consecutive seeds.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Non-dummy activities per instance.
    #[arg(long, default_value_t = 30)]
    pub activities: usize,
    #[arg(long, default_value = "gen")]
    pub prefix: String,
    /// Resource strength in [0, 1]: 0 sets capacity to the largest request.
    #[arg(long, default_value_t = 0.5)]
    pub strength: f64,
    /// Probability that an activity uses a given resource.
    #[arg(long, default_value_t = 0.5)]
    pub factor: f64,
}

const RESOURCES: usize = 4;

pub fn instance(seed: u64, activities: usize, strength: f64, factor: f64) -> RawPsplib {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = activities + 2;
    let sink = n - 1;
    let mut durations = vec![0; n];
    let mut requests = vec![vec![0; RESOURCES]; n];
    for j in 1..sink {
        durations[j] = rng.gen_range(1..=10);
        let mut used: Vec<usize> = (0..RESOURCES).filter(|_| rng.gen_bool(factor)).collect();
        if used.is_empty() {
            used.push(rng.gen_range(0..RESOURCES));
        }
        for k in used {
            requests[j][k] = rng.gen_range(1..=10);
        }
    }

    let mut successors = vec![Vec::new(); n];
    let mut has_pred = vec![false; n];
    // the first three real jobs start the network
    for (j, pred) in has_pred.iter_mut().enumerate().take(sink).skip(4) {
        let earlier: Vec<usize> = (1..j).collect();
        let k = rng.gen_range(1..=3).min(earlier.len());
        for &i in earlier.choose_multiple(&mut rng, k) {
            successors[i].push(j);
            *pred = true;
        }
    }
    for (j, &pred) in has_pred.iter().enumerate().take(sink).skip(1) {
        if !pred {
            successors[0].push(j);
        }
        if successors[j].is_empty() {
            successors[j].push(sink);
        }
        successors[j].sort_unstable();
    }

    let mut start = vec![0i64; n];
    for i in 0..n {
        for &j in &successors[i] {
            start[j] = start[j].max(start[i] + durations[i]);
        }
    }
    let end = (0..n).map(|j| start[j] + durations[j]).max().unwrap_or(0);
    let capacities = (0..RESOURCES)
        .map(|k| {
            let lo = requests.iter().map(|r| r[k]).max().unwrap_or(0);
            let hi = (0..end)
                .map(|t| {
                    (0..n)
                        .filter(|&j| start[j] <= t && t < start[j] + durations[j])
                        .map(|j| requests[j][k])
                        .sum::<i64>()
                })
                .max()
                .unwrap_or(0);
            lo + (strength * (hi - lo) as f64).round() as i64
        })
        .collect();
    RawPsplib {
        horizon: Some(durations.iter().sum()),
        capacities,
        durations,
        requests,
        successors,
    }
}

pub fn generate(args: &GenerateArgs, err: &mut dyn Write) -> i32 {
    if !(0.0..=1.0).contains(&args.strength) || !(0.0..=1.0).contains(&args.factor) {
        let _ = writeln!(err, "error: --strength and --factor must lie in [0, 1]");
        return 2;
    }
    if let Err(e) = std::fs::create_dir_all(&args.dir) {
        let _ = writeln!(err, "error: {}: {e}", args.dir.display());
        return 1;
    }
    for i in 0..args.count as u64 {
        let seed = args.seed + i;
        let raw = instance(seed, args.activities, args.strength, args.factor);
        let path = args.dir.join(format!("{}_{seed}.sm", args.prefix));
        if let Err(e) = std::fs::write(&path, render_sm(&raw)) {
            let _ = writeln!(err, "error: {}: {e}", path.display());
            return 1;
        }
    }
    0
}

#[cfg(test)]
mod tests {
    use super::*;
    use ttef_core::psplib::{parse_sm, to_project};

    #[test]
    fn shape_and_validity() {
        let raw = instance(3, 30, 0.5, 0.5);
        assert_eq!(raw.jobs(), 32);
        assert_eq!(raw.capacities.len(), 4);
        assert_eq!(parse_sm(&render_sm(&raw)).unwrap(), raw);
        let p = to_project(&raw, "g", None).unwrap();
        assert_eq!(p.len(), 32);
        assert!(p.overloaded_activity().is_none());
    }
}
