//! Acceptance suite: one PASS/FAIL line per criterion, then a single verdict.

use std::f64::consts::PI;

use mmwave::channel::{
    assemble_channel, beamforming_gain, generate_realization_pool, power_iteration_beamforming, small_scale_gain,
    BeamformingPair, CMatrix, ClusterStats, PowerIteration, Subpath,
};
use mmwave::cli::{load_scenario, run_to_dir, CHANNEL_GRID_FILE, SAP_LOG_FILE, SLOT_TRACE_FILE};
use mmwave::config::{FrameConfig, SlotKind};
use mmwave::mac::{
    assign_tdd_slots, direction_switch, tb_size_ladder, AmcTable, CqiReport, Direction, RoundRobinScheduler,
};
use mmwave::phy::{
    codeblock_bler, compute_sinr, decide_decode, noise_power, thermal_noise_psd, transport_block_bler,
    DecodeOutcome, LinkPower,
};
use mmwave::sim::{
    average_sinr_vs_distance, read_channel_grid, read_slot_traces_file, run, throughput_vs_time, GridEvent,
    Scenario, SlotOutcome, SlotTrace,
};
use nalgebra::{Complex, DMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LOS_WALK: &str = include_str!("../scenarios/los_walk.toml");

type Verdict = Result<String, String>;

fn check(ok: bool, what: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what.into())
    }
}

/// Spearman correlation with tie-averaged ranks; `None` for a constant input.
fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            for k in i..=j {
                r[idx[k]] = (i + j) as f64 / 2.0;
            }
            i = j + 1;
        }
        r
    }
    let (a, b) = (ranks(x), ranks(y));
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(&b).map(|(p, q)| (p - ma) * (q - mb)).sum();
    let va: f64 = a.iter().map(|p| (p - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|q| (q - mb).powi(2)).sum();
    (va > 0.0 && vb > 0.0).then(|| cov / (va * vb).sqrt())
}

/// Non-increasing in the rank sense: Spearman ≤ −0.9. A run of points stuck
/// at the final value (a link past its range) counts once, and a constant
/// series passes.
fn rank_non_increasing(x: &[f64], y: &[f64]) -> (bool, String) {
    let mut n = y.len();
    while n > 1 && y[n - 2] == y[n - 1] {
        n -= 1;
    }
    let tail = y.len() - n;
    match spearman(&x[..n], &y[..n]) {
        None => (true, "constant".into()),
        Some(r) => (r <= -0.9, format!("spearman {r:.3} over {n} points (+{tail} at floor)")),
    }
}

fn frame_arithmetic() -> Verdict {
    let cfg = FrameConfig::<f64>::default();
    check(cfg.resource_elements_per_slot() == 103_680, "resource elements per slot")?;
    check(cfg.tti_ns() == 124_800, "tti in ns")?;
    check((cfg.tti() - 124.8e-6).abs() <= 1e-15, "tti in s")?;
    let bw = cfg.system_bandwidth();
    check(((bw - 1e9) / 1e9).abs() <= 1e-4, format!("system bandwidth {bw}"))?;
    Ok(format!("N_RE 103680, TTI 124.8 us, BW {:.4} GHz", bw / 1e9))
}

fn tdd_layout() -> Verdict {
    let cfg = FrameConfig::<f64>::default();
    check(cfg.pattern_string() == "ccdddddd", "default pattern")?;
    let layout = assign_tdd_slots(cfg.tdd_pattern());
    let expect = [
        (SlotKind::Control, Direction::Downlink),
        (SlotKind::Control, Direction::Uplink),
        (SlotKind::Data, Direction::Downlink),
        (SlotKind::Data, Direction::Downlink),
        (SlotKind::Data, Direction::Downlink),
        (SlotKind::Data, Direction::Uplink),
        (SlotKind::Data, Direction::Uplink),
        (SlotKind::Data, Direction::Uplink),
    ];
    for (i, (s, e)) in layout.iter().zip(expect).enumerate() {
        check((s.kind, s.direction) == e, format!("slot {i} is {:?}/{:?}", s.kind, s.direction))?;
    }
    let data: Vec<_> = layout.iter().filter(|s| s.kind == SlotKind::Data).collect();
    let dl_to_ul = data
        .windows(2)
        .filter(|w| w[0].direction == Direction::Downlink && w[1].direction == Direction::Uplink)
        .count();
    check(dl_to_ul == 1, format!("{dl_to_ul} DL->UL data transitions"))?;
    check(direction_switch(&layout, 5) && !direction_switch(&layout, 6), "guard placement")?;
    Ok("DLc ULc 3xDLd 3xULd, one DL->UL data switch".into())
}

fn error_model() -> Verdict {
    for (b, c) in [(1.0f64, 0.1f64), (0.37, 0.02), (0.9, 0.3)] {
        let p = codeblock_bler(b, b, c).map_err(|e| e.to_string())?;
        check((p - 0.5).abs() <= 1e-12, format!("bler at gamma=b is {p}"))?;
    }
    for p in [0.01f64, 0.1, 0.5] {
        for n in 1..=20 {
            let tb = transport_block_bler(&vec![p; n]);
            let want = 1.0 - (1.0 - p).powi(n as i32);
            check((tb - want).abs() <= 1e-12, format!("tb bler p={p} C={n}"))?;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for bler in [0.01, 0.1, 0.35, 0.5, 0.9] {
        let n = 100_000;
        let drops = (0..n)
            .filter(|_| decide_decode(bler, rng.random::<f64>()) == DecodeOutcome::Dropped)
            .count();
        let rate = drops as f64 / n as f64;
        worst = worst.max((rate - bler).abs());
        check((rate - bler).abs() <= 0.01, format!("empirical {rate} vs {bler}"))?;
    }
    Ok(format!("max |empirical - bler| = {worst:.4}"))
}

/// Largest squared singular value from an independent SVD.
fn svd_oracle(h: &CMatrix<f64>) -> f64 {
    let m = DMatrix::from_fn(h.rows(), h.cols(), |r, c| {
        let v = h.get(r, c);
        Complex::new(v.re, v.im)
    });
    let s = m.singular_values();
    s.iter().fold(0.0f64, |a, &b| a.max(b)).powi(2)
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<num_complex::Complex<f64>> {
    let v: Vec<_> = (0..n)
        .map(|_| num_complex::Complex::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    mmwave::channel::normalized(&v).expect("non-zero")
}

fn beamforming_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let stats = ClusterStats::default();
    let mut worst: f64 = 0.0;
    for case in 0..200 {
        let nt = rng.random_range(1..=64usize);
        let nr = rng.random_range(1..=16usize);
        let pool = generate_realization_pool::<f64>(rng.random(), 1, &stats, nt, nr).map_err(|e| e.to_string())?;
        let t = rng.random_range(0.0..0.1);
        let f = rng.random_range(-5e8..5e8);
        let h = assemble_channel(&pool.entries()[0], t, f, 1867.9);
        let pair = power_iteration_beamforming(&h, PowerIteration::default()).map_err(|e| e.to_string())?;
        let g = beamforming_gain(&h, &pair).map_err(|e| e.to_string())?;
        let oracle = svd_oracle(&h);
        let rel = (g - oracle).abs() / oracle;
        worst = worst.max(rel);
        check(rel <= 1e-6, format!("case {case} ({nr}x{nt}): gain {g} vs sigma^2 {oracle}"))?;
        for _ in 0..1000 {
            let p = BeamformingPair {
                tx_weights: random_unit(&mut rng, nt),
                rx_weights: random_unit(&mut rng, nr),
            };
            let r = beamforming_gain(&h, &p).map_err(|e| e.to_string())?;
            check(r <= g * (1.0 + 1e-12), format!("case {case}: random pair {r} beats {g}"))?;
        }
    }
    Ok(format!("200 channels, worst relative error {worst:.2e}"))
}

fn small_scale_fading() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let p = Subpath {
            power: rng.random_range(0.0..4.0),
            aoa_rel_motion: rng.random_range(-PI..PI),
            delay: rng.random_range(0.0..1e-6),
        };
        let g = small_scale_gain(rng.random_range(0.0..10.0), rng.random_range(-1e9..1e9), &p, 1867.9);
        let err = (g.norm() - p.power.sqrt()).abs();
        worst = worst.max(err);
        check(err <= 1e-12, format!("|g| off by {err}"))?;
    }
    let p = Subpath {
        power: 1.0,
        aoa_rel_motion: 0.0,
        delay: 0.0,
    };
    let phase = small_scale_gain(2.5e-3, 0.0, &p, 100.0).arg();
    check((phase - PI / 2.0).abs() <= 1e-9, format!("phase {phase}"))?;
    Ok(format!("max ||g| - sqrt(P)| = {worst:.1e}, phase {phase:.12}"))
}

fn sinr_chain() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let n0 = thermal_noise_psd::<f64>();
    let bw = 13.89e6;
    for _ in 0..1000 {
        let link = |rng: &mut ChaCha8Rng| LinkPower {
            tx_power_w: rng.random_range(1e-3..10.0),
            pathloss: 10f64.powf(rng.random_range(6.0..14.0)),
            gain: rng.random_range(0.1..1000.0),
        };
        let s = link(&mut rng);
        let ints: Vec<_> = (0..rng.random_range(0..5)).map(|_| link(&mut rng)).collect();
        let nf = rng.random_range(0.0..10.0);
        let base = compute_sinr(&s, &ints, bw, n0, nf);

        // scaling every power and the noise together leaves the ratio alone
        let a = 10f64.powf(rng.random_range(-3.0..3.0));
        let scale = |l: &LinkPower<f64>| LinkPower {
            tx_power_w: l.tx_power_w * a,
            ..*l
        };
        let scaled = compute_sinr(&scale(&s), &ints.iter().map(scale).collect::<Vec<_>>(), bw, n0 * a, nf);
        check(((scaled - base) / base).abs() <= 1e-12, "homogeneity")?;

        let mut more = ints.clone();
        more.push(link(&mut rng));
        check(compute_sinr(&s, &more, bw, n0, nf) <= base, "extra interferer raised SINR")?;

        let snr = compute_sinr(&s, &[], bw, n0, nf);
        let closed = s.tx_power_w * s.gain / s.pathloss / (bw * n0 * 10f64.powf(nf / 10.0));
        check(((snr - closed) / closed).abs() <= 1e-12, "closed-form SNR")?;
        check((noise_power(bw, n0, nf) - bw * n0 * 10f64.powf(nf / 10.0)).abs() <= 1e-27, "noise power")?;
    }
    Ok("1000 random links: homogeneous, monotone, closed-form SNR".into())
}

fn walk(link_state: &str) -> Result<Vec<SlotTrace>, String> {
    let sc = load_scenario(LOS_WALK, &[format!("run.link_state=\"{link_state}\"")]).map_err(|d| format!("{d:?}"))?;
    Ok(run(&sc).map_err(|e| e.to_string())?.slot_traces)
}

fn scenario_reproduction() -> Verdict {
    let los = walk("los")?;
    let nlos = walk("nlos")?;
    let cfg = FrameConfig::<f64>::default();
    let mut notes = Vec::new();
    let mut failures = Vec::new();

    // (a) binned SINR falls with distance
    let bins_los = average_sinr_vs_distance(&los, 10.0).map_err(|e| e.to_string())?;
    let bins_nlos = average_sinr_vs_distance(&nlos, 10.0).map_err(|e| e.to_string())?;
    for (name, bins) in [("los", &bins_los), ("nlos", &bins_nlos)] {
        let d: Vec<f64> = bins.iter().map(|b| b.centre_m()).collect();
        let s: Vec<f64> = bins.iter().map(|b| b.mean_sinr_db).collect();
        let (ok, msg) = rank_non_increasing(&d, &s);
        notes.push(format!("(a) {name} sinr {msg}"));
        if !ok {
            failures.push(format!("(a) {name}"));
        }
    }

    // (b) LoS above NLoS in every common bin
    let mut common = 0;
    let mut b_ok = true;
    for l in &bins_los {
        if let Some(n) = bins_nlos.iter().find(|n| n.lower_m == l.lower_m) {
            common += 1;
            b_ok &= l.mean_sinr_db > n.mean_sinr_db;
        }
    }
    notes.push(format!("(b) {common} common bins"));
    if !b_ok || common == 0 {
        failures.push("(b)".into());
    }

    // (c) windowed throughput falls with distance; 0.5 s is 10 m at 20 m/s
    for (name, tr) in [("los", &los), ("nlos", &nlos)] {
        let pts = throughput_vs_time(tr, 0.5).map_err(|e| e.to_string())?;
        let t: Vec<f64> = pts.iter().map(|p| p.start_s).collect();
        let r: Vec<f64> = pts.iter().map(|p| p.bits_per_second).collect();
        let (ok, msg) = rank_non_increasing(&t, &r);
        notes.push(format!("(c) {name} throughput {msg}"));
        if !ok {
            failures.push(format!("(c) {name}"));
        }
    }

    // (d) every delivered quantum is a TB size from the AMC ladder
    let ladder = tb_size_ladder(&AmcTable::lte(), &cfg);
    let d_ok = los.iter().chain(&nlos).all(|t| {
        let bits_ok = match t.outcome {
            SlotOutcome::Decoded => t.delivered_bits == t.tb_size_bits,
            _ => t.delivered_bits == 0,
        };
        bits_ok && ladder.binary_search(&t.tb_size_bits).is_ok()
    });
    let levels: std::collections::BTreeSet<u32> = los.iter().chain(&nlos).map(|t| t.delivered_bits).collect();
    notes.push(format!("(d) {} distinct per-slot levels", levels.len()));
    if !d_ok {
        failures.push("(d)".into());
    }

    let summary = notes.join("; ");
    if failures.is_empty() {
        Ok(summary)
    } else {
        Err(format!("failed {}: {summary}", failures.join(", ")))
    }
}

fn short_run(seed: u64, dir: &std::path::Path, extra: &[&str]) -> Result<(), String> {
    let mut o: Vec<String> = vec!["run.duration=0.3".into()];
    o.extend(extra.iter().map(|s| s.to_string()));
    o.push(format!("run.seed={seed}"));
    // a fixed duration replaces the walk's stopping distance
    let src = LOS_WALK.replace("max_distance = 200.0\n", "");
    let sc: Scenario = load_scenario(&src, &o).map_err(|d| format!("{d:?}"))?;
    run_to_dir(&sc, dir).map(|_| ()).map_err(|e| e.to_string())
}

fn determinism() -> Verdict {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (a, b, c) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c"));
    let extra = ["run.channel_grid=true", "run.link_state=\"random\""];
    short_run(11, &a, &extra)?;
    short_run(11, &b, &extra)?;
    short_run(12, &c, &extra)?;
    let read = |d: &std::path::Path, f: &str| std::fs::read(d.join(f)).map_err(|e| e.to_string());
    for f in [SLOT_TRACE_FILE, SAP_LOG_FILE, CHANNEL_GRID_FILE] {
        check(read(&a, f)? == read(&b, f)?, format!("{f} differs for equal seeds"))?;
    }
    let ta = read_slot_traces_file(&a.join(SLOT_TRACE_FILE)).map_err(|e| e.to_string())?;
    let tc = read_slot_traces_file(&c.join(SLOT_TRACE_FILE)).map_err(|e| e.to_string())?;
    let header = |d: &std::path::Path| -> Result<String, String> {
        Ok(String::from_utf8_lossy(&read(d, SLOT_TRACE_FILE)?).lines().next().unwrap_or("").to_string())
    };
    check(header(&a)? == header(&c)?, "schema differs across seeds")?;
    let times = |t: &[SlotTrace]| t.iter().map(|r| r.time_ns).collect::<Vec<_>>();
    check(times(&ta) == times(&tc), "slot timestamps differ across seeds")?;
    let changed = ta.iter().zip(&tc).any(|(x, y)| x.wideband_sinr_db != y.wideband_sinr_db);
    check(changed, "different seeds gave identical SINR")?;
    Ok(format!("{} records byte-identical; seed 12 keeps schema and timestamps", ta.len()))
}

fn scheduler_fairness() -> Verdict {
    let cfg = FrameConfig::<f64>::default();
    let layout = assign_tdd_slots(cfg.tdd_pattern());
    let mut s = RoundRobinScheduler::new(layout.clone(), AmcTable::lte());
    for u in 0..4 {
        s.attach(u);
        s.relay_cqi(CqiReport {
            user: u,
            cqi: 9,
            subframe: 0,
            slot: 2,
        })
        .map_err(|e| e.to_string())?;
    }
    let mut dl = [0usize; 4];
    for sf in 0..400u64 {
        let map = s.schedule(sf, &cfg).clone();
        check(map.assignments.len() == layout.len(), format!("subframe {sf} slot count"))?;
        for (a, l) in map.assignments.iter().zip(&layout) {
            check(a.kind == l.kind && a.direction == l.direction, format!("subframe {sf} slot {}", a.slot))?;
            if a.kind == SlotKind::Control {
                check(a.user.is_none(), "control slot assigned")?;
            } else if a.direction == Direction::Downlink {
                dl[a.user.ok_or("unassigned DL data slot")? as usize] += 1;
            }
        }
    }
    let (lo, hi) = (dl.iter().min().unwrap(), dl.iter().max().unwrap());
    check(hi - lo <= 1, format!("DL slot counts {dl:?}"))?;
    Ok(format!("DL data slots per user {dl:?}"))
}

fn gain_surface() -> Verdict {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    short_run(3, tmp.path(), &["run.duration=0.2", "run.channel_grid=true", "channel.update_period=0.1"])?;
    let rows = read_channel_grid(std::fs::File::open(tmp.path().join(CHANNEL_GRID_FILE)).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    check(!rows.is_empty(), "empty grid")?;
    let changes = rows.windows(2).filter(|w| w[1].realization != w[0].realization).count();
    let updates = rows
        .iter()
        .filter(|r| r.event == GridEvent::LargeScaleUpdate && r.subband == 0)
        .count();
    check(changes == 2, format!("{changes} realization changes"))?;
    check(updates == 2, format!("{updates} large-scale update events"))?;
    // small-scale variation between updates: subband 0 gain moves slot to slot
    let first: Vec<f64> = rows
        .iter()
        .filter(|r| r.realization == rows[0].realization && r.subband == 0 && r.event == GridEvent::Slot)
        .map(|r| r.gain_db)
        .collect();
    let distinct = first.windows(2).filter(|w| (w[1] - w[0]).abs() > 1e-9).count();
    check(first.len() > 100 && distinct * 2 > first.len(), "no per-slot variation")?;
    Ok(format!("{} rows, 2 discontinuities, {} slots in first realization", rows.len(), first.len()))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("1 frame arithmetic", frame_arithmetic),
        ("2 tdd layout", tdd_layout),
        ("3 error model", error_model),
        ("4 beamforming oracle", beamforming_oracle),
        ("5 small-scale fading", small_scale_fading),
        ("6 sinr chain", sinr_chain),
        ("7 mobility scenario", scenario_reproduction),
        ("8 determinism", determinism),
        ("9 scheduler fairness", scheduler_fairness),
        ("10 gain surface", gain_surface),
    ];
    let mut failed = Vec::new();
    for (name, f) in criteria {
        let started = std::time::Instant::now();
        let v = f();
        let secs = started.elapsed().as_secs_f64();
        match v {
            Ok(msg) => println!("PASS {name} ({secs:.1}s): {msg}"),
            Err(msg) => {
                println!("FAIL {name} ({secs:.1}s): {msg}");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
