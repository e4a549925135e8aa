//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the report is always printed.

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lut_loopfilter::cost::{
    energy, energy_fj, format_kmacs, frame_cost, preset_cost, published_kmacs_rounding, CostVector, EnergyTable,
};
use lut_loopfilter::interp::{interp_2d, interp_4d, split_msb_lsb, triangle_2d, Lut2d};
use lut_loopfilter::io::lutfile::{decode_lutset, encode_lutset};
use lut_loopfilter::io::pgm::{decode_pgm, encode_pgm};
use lut_loopfilter::lut::{preset, storage_bytes, Offset, LUT_DIMS};
use lut_loopfilter::pipeline::filter_plane;
use lut_loopfilter::rdo::{decide, ssd, ssd_region, RdoConfig, Region};
use lut_loopfilter::transfer::{clipped_vs_full_report, Oracle};
use lut_loopfilter::{ClippedLut, Error, LatticeGrid, LutSet, PipelinePreset, PlaneU8, PresetName, StageSpec};

const PRESETS: [PresetName; 3] = [PresetName::U, PresetName::V, PresetName::F];

type Check = fn() -> Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn random_lut(rng: &mut ChaCha8Rng, stage: u8, pattern: u8) -> ClippedLut {
    let values = (0..LatticeGrid::STANDARD.table_len()).map(|_| rng.gen()).collect();
    ClippedLut::new(LatticeGrid::STANDARD, values, pattern, stage, 27).unwrap()
}

fn random_set(rng: &mut ChaCha8Rng, preset: PipelinePreset) -> LutSet {
    LutSet::build(preset, 27, |stage, p| Ok(random_lut(rng, stage, p.id()))).unwrap()
}

/// The named preset with random (non-uniform) pattern weights.
fn reweighted(rng: &mut ChaCha8Rng, name: PresetName) -> PipelinePreset {
    let base = preset(name).unwrap();
    let stages = base.stages().clone().map(|s| {
        let raw: Vec<u32> = s.patterns().iter().map(|_| rng.gen_range(1..100)).collect();
        StageSpec::with_weights(s.patterns().to_vec(), &raw).unwrap()
    });
    PipelinePreset::new(name, stages)
}

fn random_plane(rng: &mut ChaCha8Rng, w: usize, h: usize) -> PlaneU8 {
    PlaneU8::from_fn(w, h, |_, _| rng.gen()).unwrap()
}

// ---------------------------------------------------------------------------
// Naive per-pixel reference, written independently of the library kernels.

/// `(bin, lsb)`: the maximal sample sits exactly on the top lattice point.
fn naive_locate(v: u8) -> (usize, usize) {
    if v == 255 {
        (16, 0)
    } else {
        (v as usize / 16, v as usize % 16)
    }
}

/// Simplex interpolation as an average over the 16 LSB thresholds: at
/// threshold `t` the vertex sets every dimension whose LSB exceeds `t`.
fn naive_interp(lut: &ClippedLut, q: [u8; LUT_DIMS]) -> u32 {
    let loc = q.map(naive_locate);
    let mut acc = 0u32;
    for t in 0..16 {
        let bins = loc.map(|(b, l)| (b + usize::from(l > t)).min(16));
        acc += lut.get(bins) as u32;
    }
    (acc + 8) / 16
}

/// Quarter-turn `k` as an explicit integer matrix on `(dy, dx)`.
fn rotate(o: Offset, k: usize) -> (isize, isize) {
    const M: [[[isize; 2]; 2]; 4] = [[[1, 0], [0, 1]], [[0, 1], [-1, 0]], [[-1, 0], [0, -1]], [[0, -1], [1, 0]]];
    let m = M[k];
    let (dy, dx) = (o.dy as isize, o.dx as isize);
    (m[0][0] * dy + m[0][1] * dx, m[1][0] * dy + m[1][1] * dx)
}

fn naive_sample(p: &PlaneU8, x: isize, y: isize) -> u8 {
    let cx = x.clamp(0, p.width() as isize - 1) as usize;
    let cy = y.clamp(0, p.height() as isize - 1) as usize;
    p.samples()[cy * p.width() + cx]
}

fn naive_stage(p: &PlaneU8, stage: &StageSpec, index: u8, set: &LutSet) -> PlaneU8 {
    PlaneU8::from_fn(p.width(), p.height(), |x, y| {
        let mut acc = 0u64;
        for (pat, &w) in stage.patterns().iter().zip(stage.weights()) {
            let lut = set.get(index, pat.id()).unwrap();
            let mut sum = 0u32;
            for k in 0..4 {
                let q = pat.offsets().map(|o| {
                    let (dy, dx) = rotate(o, k);
                    naive_sample(p, x as isize + dx, y as isize + dy)
                });
                sum += naive_interp(lut, q);
            }
            acc += w as u64 * ((sum as u64 + 2) / 4);
        }
        let scale: u64 = stage.weights().iter().map(|&w| w as u64).sum();
        ((acc + scale / 2) / scale).min(255) as u8
    })
    .unwrap()
}

fn naive_filter(p: &PlaneU8, preset: &PipelinePreset, set: &LutSet) -> PlaneU8 {
    let mid = naive_stage(p, &preset.stages()[0], 1, set);
    naive_stage(&mid, &preset.stages()[1], 2, set)
}

// ---------------------------------------------------------------------------

fn storage() -> Result<String, String> {
    let single = 17usize.pow(4);
    ensure!(single == 83521, "17^4 = {single}");
    ensure!(LatticeGrid::STANDARD.table_len() == single, "table_len {}", LatticeGrid::STANDARD.table_len());
    let expected = [(PresetName::U, 2, 164.0), (PresetName::V, 6, 492.0), (PresetName::F, 14, 1148.0)];
    let mut parts = vec![format!("single={single}")];
    for (name, luts, published_kb) in expected {
        let bytes = storage_bytes(&preset(name).unwrap());
        ensure!(bytes == luts * single, "{name}: {bytes} != {}", luts * single);
        let rel = (bytes as f64 / 1024.0 - published_kb).abs() / published_kb;
        ensure!(rel < 0.01, "{name}: {bytes} B is {:.2}% off {published_kb} KB", rel * 100.0);
        parts.push(format!("{name}={bytes}"));
    }
    Ok(parts.join(" "))
}

fn complexity() -> Result<String, String> {
    let u = preset_cost(PresetName::U).map_err(|e| e.to_string())?;
    let v = preset_cost(PresetName::V).map_err(|e| e.to_string())?;
    ensure!(u == CostVector::new(70, 4, 68, 55), "U {u:?}");
    ensure!(v == CostVector::new(206, 4, 190, 152), "V {v:?}");
    ensure!((u.total_add(), u.total_mul()) == (138, 59), "U totals");
    ensure!((v.total_add(), v.total_mul()) == (396, 156), "V totals");

    // int8 add, int8 mul, int32 add, int32 mul, total add, total mul
    let published: [(CostVector, [u64; 6]); 2] = [
        (u, [145_152_000, 8_294_400, 141_004_800, 114_048_000, 286_156_800, 122_342_400]),
        (v, [427_161_600, 8_294_400, 393_984_000, 315_187_200, 821_145_600, 323_481_600]),
    ];
    for (cv, table) in published {
        let f = frame_cost(&cv, 1920, 1080).map_err(|e| e.to_string())?;
        let got = [f.int8_add, f.int8_mul, f.int32_add, f.int32_mul, f.total_add(), f.total_mul()];
        ensure!(got == table, "frame {got:?} != {table:?}");
    }
    ensure!(frame_cost(&u, 0, 1080).is_err(), "zero width accepted");

    let ku = format_kmacs(&u, published_kmacs_rounding(PresetName::U));
    let kv = format_kmacs(&v, published_kmacs_rounding(PresetName::V));
    ensure!(ku == "0.13" && kv == "0.40", "kMACs {ku} / {kv}");
    ensure!(
        matches!(preset_cost(PresetName::F), Err(Error::UnpublishedCost(_))),
        "F vector should be unpublished"
    );
    Ok(format!("12 frame numbers exact, kMACs {ku}/{kv}"))
}

fn energy_model() -> Result<String, String> {
    let table = EnergyTable::from_pj(0.03, 0.2, 0.1, 3.1).map_err(|e| e.to_string())?;
    ensure!(table == EnergyTable::default(), "default table differs");
    let u = preset_cost(PresetName::U).unwrap();
    let v = preset_cost(PresetName::V).unwrap();
    // exact in femtojoules: 70·30 + 4·200 + 68·100 + 55·3100
    ensure!(energy_fj(&u, &table) == 180_200, "U {} fJ", energy_fj(&u, &table));
    ensure!(energy_fj(&v, &table) == 497_180, "V {} fJ", energy_fj(&v, &table));
    let (eu, ev) = (energy(&u, &table), energy(&v, &table));
    ensure!(eu == 180.2, "U {eu} pJ");
    ensure!((497.1..=497.3).contains(&ev), "V {ev} pJ");
    ensure!(format!("{ev:.1}") == "497.2", "V prints {ev:.1}");
    Ok(format!("U={eu} pJ V={ev:.2} pJ"))
}

fn worked_example() -> Result<String, String> {
    ensure!(split_msb_lsb(74) == (4, 10), "74 -> {:?}", split_msb_lsb(74));
    ensure!(split_msb_lsb(98) == (6, 2), "98 -> {:?}", split_msb_lsb(98));
    let t = triangle_2d(74, 98);
    // [P11, P10, P00] with weights (w0, w1, w2)
    ensure!(t.vertices == [(5, 7), (5, 6), (4, 6)], "vertices {:?}", t.vertices);
    ensure!(t.weights == [2, 8, 6], "weights {:?}", t.weights);
    let linear = Lut2d::from_fn(|i, _| (16 * i).min(255) as u8);
    let v = interp_2d(&linear, 74, 98);
    ensure!(v == 74, "linear table gives {v}");
    Ok("P10 selected, weights (2,8,6)/16, linear table -> 74".into())
}

fn lattice_and_affine() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a77_1ce5);
    let grid = LatticeGrid::STANDARD;
    for n in 0..3 {
        let lut = random_lut(&mut rng, 1, 1);
        for i in 0..grid.table_len() {
            let bins = grid.bins_of(i);
            let q = bins.map(|b| grid.lattice_value(b).unwrap());
            let got = interp_4d(&lut, q);
            ensure!(got == lut.get(bins), "lut {n} bins {bins:?}: {got} != {}", lut.get(bins));
        }
    }

    // affine maps whose outputs stay inside [0, 15] on the 4-bit domain
    let mut oracles = vec![
        Oracle::Identity,
        Oracle::Affine { coeffs: [1.0, 0.0, 0.0, 0.0], bias: 0.0 },
        Oracle::Affine { coeffs: [0.25; 4], bias: 0.0 },
        Oracle::Affine { coeffs: [0.5, 0.25, 0.125, 0.125], bias: 0.0 },
        Oracle::Affine { coeffs: [0.6, 0.2, 0.1, 0.0], bias: 1.2 },
        Oracle::Affine { coeffs: [0.0, 0.0, 0.0, 1.0], bias: 0.0 },
    ];
    for _ in 0..10 {
        let mut c = [0f64; 4];
        for v in c.iter_mut() {
            *v = rng.gen_range(0.0..1.0);
        }
        let total: f64 = c.iter().sum();
        let scale = rng.gen_range(0.3..1.0) / total;
        let coeffs = c.map(|v| v * scale);
        let room = 15.0 * (1.0 - coeffs.iter().sum::<f64>());
        oracles.push(Oracle::Affine { coeffs, bias: rng.gen_range(0.0..room) });
    }
    let mut worst = 0;
    for o in &oracles {
        let r = clipped_vs_full_report(o, 2, 2, 4).map_err(|e| e.to_string())?;
        ensure!(r.samples == 65_536, "samples {}", r.samples);
        ensure!(r.max_abs <= 1, "{o:?}: max deviation {}", r.max_abs);
        worst = worst.max(r.max_abs);
    }
    Ok(format!(
        "3x83521 lattice points exact; {} affine maps, max dev {worst}",
        oracles.len()
    ))
}

fn pipeline_equivalence() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xe9_0a1e);
    let mut pixels = 0usize;
    for name in PRESETS {
        for n in 0..50 {
            let p = if n % 2 == 0 { preset(name).unwrap() } else { reweighted(&mut rng, name) };
            let set = random_set(&mut rng, p.clone());
            let (w, h) = (rng.gen_range(1..=16), rng.gen_range(1..=16));
            let plane = random_plane(&mut rng, w, h);
            let got = filter_plane(&plane, &p, &set).map_err(|e| e.to_string())?;
            let want = naive_filter(&plane, &p, &set);
            if got != want {
                let i = (0..w * h).find(|&i| got.samples()[i] != want.samples()[i]).unwrap();
                return Err(format!(
                    "{name} plane {n} ({w}x{h}) pixel ({}, {}): {} != {}",
                    i % w,
                    i / w,
                    got.samples()[i],
                    want.samples()[i]
                ));
            }
            pixels += w * h;
        }
    }
    Ok(format!("150 planes, {pixels} pixels bit-exact"))
}

fn equivariance_and_support() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0707);
    for name in PRESETS {
        let p = reweighted(&mut rng, name);
        let set = random_set(&mut rng, p.clone());
        for n in 0..4 {
            let plane = random_plane(&mut rng, 12, 12);
            let base = filter_plane(&plane, &p, &set).unwrap();
            let (mut rotated_in, mut rotated_out) = (plane.clone(), base.clone());
            for turn in 1..4 {
                rotated_in = rotated_in.rotate90();
                rotated_out = rotated_out.rotate90();
                let got = filter_plane(&rotated_in, &p, &set).unwrap();
                ensure!(got == rotated_out, "{name} plane {n}: not equivariant at {turn} quarter turns");
            }
        }

        let range = p.effective_range();
        let expected = match name {
            PresetName::U => 5,
            PresetName::V => 9,
            _ => 13,
        };
        ensure!(range == expected, "{name}: effective range {range}");
        let half = (range / 2) as isize;
        let size = 21;
        let background = PlaneU8::filled(size, size, 0).unwrap();
        let reference = filter_plane(&background, &p, &set).unwrap();
        for (cx, cy) in [(10, 10), (0, 0), (20, 3), (7, 20)] {
            let mut impulse = background.clone();
            impulse.set(cx, cy, 255);
            let out = filter_plane(&impulse, &p, &set).unwrap();
            for y in 0..size {
                for x in 0..size {
                    let inside = (x as isize - cx as isize).abs() <= half && (y as isize - cy as isize).abs() <= half;
                    ensure!(
                        inside || out.get(x, y) == reference.get(x, y),
                        "{name}: impulse at ({cx},{cy}) changed ({x},{y}) outside {range}x{range}"
                    );
                }
            }
        }
    }
    Ok("12x12 planes equivariant under 90/180/270; impulse support within 5/9/13".into())
}

fn rdo_properties() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5d0);
    let mut ratios_seen = Vec::new();
    for n in 0..10 {
        let (w, h) = (rng.gen_range(40..130), rng.gen_range(40..130));
        let ctu = [16, 32, 64][n % 3];
        let original = random_plane(&mut rng, w, h);
        let noisy = |rng: &mut ChaCha8Rng, amp: i32| {
            PlaneU8::from_fn(w, h, |x, y| {
                (original.get(x, y) as i32 + rng.gen_range(-amp..=amp)).clamp(0, 255) as u8
            })
            .unwrap()
        };
        let recon = noisy(&mut rng, 6);
        let mut filtered = noisy(&mut rng, 6);
        // make some CTUs clearly better and some clearly worse
        for y in 0..h {
            for x in 0..w {
                if (x / ctu + y / ctu) % 3 == 0 {
                    filtered.set(x, y, original.get(x, y));
                }
            }
        }

        let cfg = |lambda| RdoConfig {
            ctu_size: ctu,
            lambda,
            flag_bits_on: 1.0,
            flag_bits_off: 0.0,
        };
        let d0 = decide(&recon, &filtered, &original, &cfg(0.0)).map_err(|e| e.to_string())?;
        for row in 0..d0.flags.rows {
            for col in 0..d0.flags.cols {
                let region = Region {
                    x: col * ctu,
                    y: row * ctu,
                    width: ctu.min(w - col * ctu),
                    height: ctu.min(h - row * ctu),
                };
                let on = ssd_region(&filtered, &original, region).unwrap();
                let off = ssd_region(&recon, &original, region).unwrap();
                ensure!(d0.flags.get(col, row) == (on < off), "triple {n} CTU ({col},{row})");
            }
        }

        let unfiltered = ssd(&recon, &original).unwrap();
        let mut previous = f64::INFINITY;
        let mut ratios = Vec::new();
        for lambda in [0.0, 10.0, 100.0, 1000.0] {
            let d = decide(&recon, &filtered, &original, &cfg(lambda)).unwrap();
            let stitched = ssd(&d.output, &original).unwrap();
            ensure!(stitched <= unfiltered, "triple {n} λ={lambda}: {stitched} > {unfiltered}");
            let ratio = d.stats.ratio();
            ensure!(ratio <= previous, "triple {n}: ratio rose to {ratio} at λ={lambda}");
            previous = ratio;
            ratios.push(ratio);
        }
        ratios_seen.push(ratios);
    }
    let first = &ratios_seen[0];
    Ok(format!(
        "10 triples; e.g. ratios {:.3}/{:.3}/{:.3}/{:.3}",
        first[0], first[1], first[2], first[3]
    ))
}

fn file_round_trips() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xf11e);
    let mut total = 0;
    for name in PRESETS {
        let p = reweighted(&mut rng, name);
        let set = random_set(&mut rng, p);
        let bytes = encode_lutset(&set).map_err(|e| e.to_string())?;
        let back = decode_lutset(&bytes).map_err(|e| e.to_string())?;
        ensure!(back.preset() == set.preset(), "{name}: preset changed");
        ensure!(back.luts().eq(set.luts()), "{name}: tables changed");
        ensure!(encode_lutset(&back).unwrap() == bytes, "{name}: re-encoding differs");
        total += bytes.len();

        let mut corrupt = bytes.clone();
        let n = corrupt.len();
        corrupt[n - 2] ^= 0x10;
        ensure!(matches!(decode_lutset(&corrupt), Err(Error::Checksum { .. })), "{name}: bad checksum accepted");
        let mut corrupt = bytes.clone();
        corrupt[n / 2] ^= 0x01;
        ensure!(decode_lutset(&corrupt).is_err(), "{name}: corrupted payload accepted");
    }
    for (w, h) in [(1, 1), (7, 3), (64, 48), (255, 2)] {
        let plane = random_plane(&mut rng, w, h);
        let bytes = encode_pgm(&plane);
        let back = decode_pgm(&bytes).map_err(|e| e.to_string())?;
        ensure!(back == plane, "pgm {w}x{h} changed");
        ensure!(encode_pgm(&back) == bytes, "pgm {w}x{h} re-encoding differs");
    }
    Ok(format!("U/V/F sets ({total} bytes) and 4 PGM planes byte-exact; corruption rejected"))
}

fn main() -> ExitCode {
    let criteria: [(&str, Check, u64); 9] = [
        ("storage arithmetic", storage, 1),
        ("complexity tables", complexity, 1),
        ("energy model", energy_model, 1),
        ("interpolation worked example", worked_example, 1),
        ("lattice and affine exactness", lattice_and_affine, 30),
        ("brute-force pipeline equivalence", pipeline_equivalence, 60),
        ("rotation equivariance and receptive field", equivariance_and_support, 60),
        ("rdo properties", rdo_properties, 30),
        ("file-format round trips", file_round_trips, 5),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check, budget_s) in criteria {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > Duration::from_secs(budget_s) => {
                Err(format!("{detail}; took {elapsed:.2?}, budget {budget_s} s"))
            }
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS  {name} ({elapsed:.2?}): {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name} ({elapsed:.2?}): {why}");
            }
        }
    }
    println!("{} of {} criteria passed", 9 - failed, 9);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
