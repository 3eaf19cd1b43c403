//! Regenerates the bundled mini-dataset under `data/`.
//!
//! The dataset is fully synthetic and deterministic: 6 motes, 200 epochs,
//! sink = mote 6. Every mote follows the shared diurnal signal
//! `base(e) = 20 + 5 sin(2*pi*e/96)` plus a mote-specific offset and noise
//! term drawn from a fixed-seed LCG:
//!
//! - mote 1: base + 2.0 * n          (noisy)
//! - mote 2: base + 0.4 + 0.05 * n   (tracks the sink closely)
//! - mote 3: base - 0.2 + 0.08 * n   (tracks the sink closely)
//! - mote 4: base + 1.5 * n, temperature omitted when e % 37 == 5
//! - mote 5: 0.5 * base + 12 + 0.8 * n (scaled copy)
//! - mote 6: base + 0.05 * n         (the sink)
//!
//! The log also carries one duplicated reading and two malformed lines so
//! ingest reporting has something to count.
//!
//! Run: cargo run -p motesel --example generate_mini_dataset

use std::fmt::Write as _;
use std::path::Path;

struct Lcg(u64);

impl Lcg {
    fn uniform(&mut self) -> f64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Box-Muller standard normal.
    fn normal(&mut self) -> f64 {
        let u1 = self.uniform().max(1e-15);
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}

fn main() -> std::io::Result<()> {
    let data_dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    std::fs::create_dir_all(&data_dir)?;

    let mut rng = Lcg(0x6d6f7465); // "mote"
    let mut log = String::new();
    let n_epochs = 200u64;
    let offsets = [0.0, 0.4, -0.2, 0.0, 12.0, 0.0];
    let scales = [1.0, 1.0, 1.0, 1.0, 0.5, 1.0];
    let noise = [2.0, 0.05, 0.08, 1.5, 0.8, 0.05];

    for e in 0..n_epochs {
        let base = 20.0 + 5.0 * (2.0 * std::f64::consts::PI * e as f64 / 96.0).sin();
        for mote in 1..=6u64 {
            let i = (mote - 1) as usize;
            let temp = scales[i] * base + offsets[i] + noise[i] * rng.normal();
            let humidity = 40.0 - 0.5 * (temp - 20.0) + rng.normal();
            let light = 500.0 + 100.0 * (2.0 * std::f64::consts::PI * e as f64 / 96.0).cos();
            let voltage = 2.7 - e as f64 * 0.0005;

            let secs = e * 31;
            let time = format!("{:02}:{:02}:{:02}", secs / 3600, (secs / 60) % 60, secs % 60);
            if mote == 4 && e % 37 == 5 {
                // dropped measurement: mandatory fields only
                writeln!(log, "2004-03-01 {time} {e} {mote}").unwrap();
            } else {
                writeln!(
                    log,
                    "2004-03-01 {time} {e} {mote} {temp:.4} {humidity:.4} {light:.4} {voltage:.4}"
                )
                .unwrap();
            }
        }
    }
    // a duplicate reading for (epoch 10, mote 1) and two malformed lines
    log.push_str("2004-03-01 00:05:10 10 1 21.1234 39.0000 500.0000 2.6950\n");
    log.push_str("this line is not a reading\n");
    log.push_str("2004-03-01 xx:yy:zz 3 2 19.5\n");
    std::fs::write(data_dir.join("mini_log.txt"), &log)?;

    let positions = "\
# mote_id x y
1 0.0 0.0
2 10.0 0.0
3 20.0 0.0
4 0.0 10.0
5 10.0 10.0
6 20.0 10.0
";
    std::fs::write(data_dir.join("mini_positions.txt"), positions)?;
    println!("wrote mini_log.txt and mini_positions.txt to {}", data_dir.display());
    Ok(())
}
