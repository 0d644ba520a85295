use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};

use membench::blur::{make_gaussian_kernel, ppm, synth_image, BlurRunner, BlurVariant, Image, Pattern};
use membench::device::DeviceProfile;
use membench::metrics::{bytes_moved, speedup, utilization, Workload};
use membench::report::{render_chart, ChartSpec, RunRecord, Suite};
use membench::stream::{measure_dram_single_core, run_hierarchy_sweep, StreamKind};
use membench::timing::{check_clock, measure, RepetitionPolicy};
use membench::transpose::{BlockSpec, SquareMatrix, TransposeVariant};

use crate::config::Settings;
use crate::output::{
    baseline_from_records, default_stream_file, read_records, write_manifest, write_records, BaselineNote, Notes,
};

/// Largest interior difference tolerated between blur variants, per unit of
/// input magnitude (images in [0, 1] get exactly this).
pub const AGREEMENT_TOL: f32 = 1e-4;

pub struct Ctx {
    pub settings: Settings,
    pub device: DeviceProfile,
    pub threads: usize,
    pub policy: RepetitionPolicy,
    pub clock_resolution: f64,
}

impl Ctx {
    pub fn new(mut settings: Settings) -> Result<Ctx> {
        let path = settings
            .profile
            .clone()
            .ok_or_else(|| anyhow!("no device profile given; pass --profile FILE (see profiles/ for examples)"))?;
        let device = DeviceProfile::load(&path).with_context(|| format!("device profile {}", path.display()))?;
        let threads = settings.threads.unwrap_or(device.core_count);
        settings.threads = Some(threads);
        let device = device.with_cores(threads);
        let policy = settings.policy()?;
        let clock_resolution = check_clock().context("timer is too coarse for these measurements")?;
        Ok(Ctx {
            settings,
            device,
            threads,
            policy,
            clock_resolution: clock_resolution.as_secs_f64(),
        })
    }

    fn manifest(&self, command: &str, notes: &Notes) -> Result<()> {
        write_manifest(&self.settings, command, Some(&self.device), self.clock_resolution, notes)?;
        Ok(())
    }
}

/// STREAM records used to score other kernels.
pub struct Baselines {
    records: Vec<RunRecord>,
    source: String,
}

impl Baselines {
    pub fn new(records: Vec<RunRecord>, source: impl Into<String>) -> Self {
        Baselines {
            records,
            source: source.into(),
        }
    }

    /// `--baseline`, else a stream result file in the output directory.
    pub fn locate(settings: &Settings) -> Result<Baselines> {
        let path = match &settings.baseline {
            Some(p) => p.clone(),
            None => default_stream_file(&settings.out).ok_or_else(|| {
                anyhow!(
                    "no STREAM baseline: run `membench stream` first, pass --baseline FILE, or use --no-utilization"
                )
            })?,
        };
        Ok(Baselines::new(read_records(&path)?, path.display().to_string()))
    }

    fn get(&self, threads: usize, notes: &mut Notes) -> Result<f64> {
        let bw = baseline_from_records(&self.records, threads).ok_or_else(|| {
            anyhow!(
                "{} has no DRAM STREAM result with {threads} thread(s); rerun stream with the same profile and --threads",
                self.source
            )
        })?;
        if !notes.baselines.iter().any(|b| b.threads == threads) {
            notes.baselines.push(BaselineNote {
                threads,
                bandwidth_bps: bw,
                source: self.source.clone(),
            });
        }
        Ok(bw)
    }
}

fn baselines_for(settings: &Settings) -> Result<Option<Baselines>> {
    if settings.utilization {
        Baselines::locate(settings).map(Some)
    } else {
        Ok(None)
    }
}

fn mem_available() -> Option<u64> {
    let text = std::fs::read_to_string("/proc/meminfo").ok()?;
    let line = text.lines().find(|l| l.starts_with("MemAvailable:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

fn fill_speedups(records: &mut [RunRecord], naive_best: Option<f64>) -> Result<()> {
    if let Some(t0) = naive_best {
        for r in records.iter_mut() {
            r.speedup = Some(speedup(r.variant.clone(), t0, r.best_s)?.speedup);
        }
    }
    Ok(())
}

pub fn stream(ctx: &Ctx, notes: &mut Notes) -> Result<Vec<RunRecord>> {
    let report = run_hierarchy_sweep(&ctx.device, &ctx.policy);
    let mut measurements = report.measurements;
    if ctx.threads > 1 {
        // sequential kernels are scored against a one-thread DRAM run
        for kind in StreamKind::ALL {
            match measure_dram_single_core(&ctx.device, kind, &ctx.policy) {
                Ok(m) => measurements.push(m),
                Err(e) => notes.failures.push(format!("DRAM {kind} (1 thread): {e}")),
            }
        }
    }
    for f in &report.failures {
        notes.failures.push(format!("{} {}: {}", f.level, f.kind, f.error));
        eprintln!("stream: {} {} failed: {}", f.level, f.kind, f.error);
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    notes.warnings.extend(report.warnings);

    let failed = report.failures.iter().map(|f| f.level).collect::<std::collections::BTreeSet<_>>();
    if failed.len() == ctx.device.levels.len() || measurements.is_empty() {
        bail!("every memory level failed: {}", notes.failures.join("; "));
    }

    println!("{:<6} {:<6} {:>10} {:>8} {:>12}  mode", "level", "kernel", "n", "threads", "GB/s");
    for m in &measurements {
        println!(
            "{:<6} {:<6} {:>10} {:>8} {:>12.3}  {}",
            m.level.label.as_str(),
            m.kind.as_str(),
            m.n_elems,
            m.threads,
            m.best_bandwidth / 1e9,
            m.mode.as_str()
        );
    }
    Ok(measurements
        .iter()
        .map(|m| RunRecord::from_stream(m, &ctx.device.name))
        .collect())
}

pub fn transpose(ctx: &Ctx, baselines: Option<&Baselines>, notes: &mut Notes) -> Result<Vec<RunRecord>> {
    let s = &ctx.settings;
    let dram = ctx.device.dram().map(|l| l.capacity);
    let avail = mem_available();
    let auto_blk = BlockSpec::auto_size(&ctx.device);
    let mut all = Vec::new();

    for &n in &s.sizes {
        let need = (n as u64) * (n as u64) * 8;
        if let Some(cap) = dram.filter(|&c| need > c) {
            let msg = format!("n={n}: matrix needs {need} bytes, more than the profile's DRAM ({cap} bytes)");
            eprintln!("transpose: skipping {msg}");
            notes.skipped.push(msg);
            continue;
        }
        if let Some(a) = avail.filter(|&a| need > a) {
            let msg = format!("n={n}: matrix needs {need} bytes, host has {a} bytes available");
            eprintln!("transpose: skipping {msg}");
            notes.skipped.push(msg);
            continue;
        }
        let mut mat = match SquareMatrix::indexed(n) {
            Ok(m) => m,
            Err(e) => {
                let msg = format!("n={n}: {e}");
                eprintln!("transpose: skipping {msg}");
                notes.skipped.push(msg);
                continue;
            }
        };
        let blk = BlockSpec::clamped(s.block.unwrap_or(auto_blk), n);
        let mut records = Vec::new();
        let mut naive_best = None;

        for &v in &s.transpose_variants {
            let threads = if v.is_parallel() { ctx.threads } else { 1 };
            // untimed check against the closed-form result, then undo
            v.run(&mut mat, blk, threads)?;
            if !mat.is_indexed_transpose() {
                bail!("correctness: {v} produced a wrong transpose for n={n}, blk={}", blk.size());
            }
            v.run(&mut mat, blk, threads)?;
            if !mat.is_indexed() {
                bail!("correctness: applying {v} twice did not restore the matrix for n={n}");
            }

            let mut err = None;
            let stats = measure(
                || {
                    if let Err(e) = v.run(&mut mat, blk, threads) {
                        err = Some(e);
                    }
                },
                &ctx.policy,
            )?;
            if let Some(e) = err {
                return Err(e.into());
            }
            if mat.is_indexed_transpose() {
                v.run(&mut mat, blk, threads)?;
            }
            if !mat.is_indexed() {
                bail!("correctness: {v} corrupted the matrix while timing n={n}");
            }

            let mut r = RunRecord::new(Suite::Transpose, v.label(), &ctx.device.name, threads, &stats);
            r.n = Some(n as u64);
            if matches!(
                v,
                TransposeVariant::Blocking | TransposeVariant::ManualBlocking | TransposeVariant::Dynamic
            ) {
                r.blk = Some(blk.size() as u64);
            }
            let bytes = bytes_moved(Workload::Transpose { n: n as u64 });
            r.bytes_moved = Some(bytes);
            if let Some(b) = baselines {
                let base = b.get(threads, notes)?;
                let u = utilization(v.label(), bytes, stats.best(), base)?;
                r.baseline_bps = Some(base);
                r.utilization = Some(u.utilization);
            }
            if v == TransposeVariant::Naive {
                naive_best = Some(stats.best());
            }
            println!(
                "transpose n={n:<6} {:<16} threads={threads:<3} best={:.6}s median={:.6}s",
                v.label(),
                stats.best(),
                stats.median()
            );
            records.push(r);
        }
        fill_speedups(&mut records, naive_best)?;
        all.extend(records);
    }
    if all.is_empty() {
        bail!("no transpose size could be run: {}", notes.skipped.join("; "));
    }
    Ok(all)
}

fn blur_input(s: &Settings) -> Result<Image> {
    if let Some(p) = &s.image {
        return ppm::load_ppm(p).with_context(|| format!("input image {}", p.display()));
    }
    let pattern = Pattern::parse(&s.synthetic, s.seed).ok_or_else(|| anyhow!("unknown synthetic pattern '{}'", s.synthetic))?;
    if s.width == 0 || s.height == 0 {
        bail!("synthetic image must have positive width and height");
    }
    if !matches!(s.channels, 1 | 3) {
        bail!("channels must be 1 or 3, got {}", s.channels);
    }
    Ok(synth_image(s.width, s.height, s.channels, pattern))
}

fn check_agreement(input: &Image, outputs: &[(BlurVariant, Image)], margin: usize) -> Result<()> {
    let (lo, hi) = input.min_max();
    let tol = AGREEMENT_TOL * lo.abs().max(hi.abs()).max(1.0);
    for (i, (va, a)) in outputs.iter().enumerate() {
        for (vb, b) in &outputs[i + 1..] {
            // NaN counts as disagreement
            let d = a.max_abs_diff_interior(b, margin).unwrap_or(f32::INFINITY);
            if d.is_nan() || d > tol {
                bail!("correctness: blur variants {va} and {vb} disagree by {d:e} (tolerance {tol:e})");
            }
        }
    }
    Ok(())
}

pub fn blur(ctx: &Ctx, baselines: Option<&Baselines>, notes: &mut Notes) -> Result<Vec<RunRecord>> {
    let s = &ctx.settings;
    let img = blur_input(s)?;
    let f = s.filter_size;
    let k = make_gaussian_kernel(f, s.sigma)?;
    let margin = k.middle();
    let mut runner = BlurRunner::new(k);
    let threads_of = |v: BlurVariant| if v.is_parallel() { ctx.threads } else { 1 };

    // every variant must agree before anything is timed
    let mut outputs: Vec<(BlurVariant, Image)> = Vec::new();
    for &v in &s.blur_variants {
        runner.run(v, &img, threads_of(v))?;
        outputs.push((v, runner.output_image(&img)));
    }
    check_agreement(&img, &outputs, margin)?;
    drop(outputs);

    let (w, h, c) = (img.width() as u64, img.height() as u64, img.channels() as u64);
    let mut records = Vec::new();
    let mut naive_best = None;
    for &v in &s.blur_variants {
        let threads = threads_of(v);
        let mut err = None;
        let stats = measure(
            || {
                if let Err(e) = runner.run(v, &img, threads) {
                    err = Some(e);
                }
            },
            &ctx.policy,
        )?;
        if let Some(e) = err {
            return Err(e.into());
        }
        let mut r = RunRecord::new(Suite::Blur, v.label(), &ctx.device.name, threads, &stats);
        (r.w, r.h, r.c, r.f) = (Some(w), Some(h), Some(c), Some(f as u64));
        if v.is_separable() {
            let bytes = bytes_moved(Workload::BlurSeparable { w, h, c, f: f as u64 });
            r.bytes_moved = Some(bytes);
            if let Some(b) = baselines {
                let base = b.get(threads, notes)?;
                r.baseline_bps = Some(base);
                r.utilization = Some(utilization(v.label(), bytes, stats.best(), base)?.utilization);
            }
        }
        if v == BlurVariant::Naive {
            naive_best = Some(stats.best());
        }
        println!(
            "blur {w}x{h}x{c} F={f:<3} {:<12} threads={threads:<3} best={:.6}s median={:.6}s",
            v.label(),
            stats.best(),
            stats.median()
        );
        records.push(r);
    }
    fill_speedups(&mut records, naive_best)?;
    Ok(records)
}

/// Renders whichever charts the records support. Returns the file names.
pub fn charts(records: &[RunRecord], out: &Path) -> Result<Vec<String>> {
    std::fs::create_dir_all(out)?;
    let specs = [
        ("stream_bandwidth.svg", ChartSpec::bandwidth_chart("STREAM bandwidth", records)),
        (
            "transpose_time.svg",
            ChartSpec::time_chart("Matrix transpose", Suite::Transpose, records),
        ),
        ("blur_time.svg", ChartSpec::time_chart("Gaussian blur", Suite::Blur, records)),
        (
            "utilization.svg",
            ChartSpec::utilization_chart("Memory bandwidth utilization", records),
        ),
    ];
    let mut written = Vec::new();
    for (name, spec) in specs {
        if spec.bar_count() == 0 {
            continue;
        }
        std::fs::write(out.join(name), render_chart(&spec)?)?;
        written.push(name.to_string());
    }
    Ok(written)
}

pub fn cmd_stream(settings: Settings) -> Result<()> {
    let ctx = Ctx::new(settings)?;
    let mut notes = Notes::default();
    let result = stream(&ctx, &mut notes);
    ctx.manifest("stream", &notes)?;
    let records = result?;
    write_records(&ctx.settings, "stream", &records)?;
    Ok(())
}

pub fn cmd_transpose(settings: Settings) -> Result<()> {
    let ctx = Ctx::new(settings)?;
    let mut notes = Notes::default();
    let baselines = baselines_for(&ctx.settings)?;
    let result = transpose(&ctx, baselines.as_ref(), &mut notes);
    ctx.manifest("transpose", &notes)?;
    write_records(&ctx.settings, "transpose", &result?)?;
    Ok(())
}

pub fn cmd_blur(settings: Settings) -> Result<()> {
    let ctx = Ctx::new(settings)?;
    let mut notes = Notes::default();
    let baselines = baselines_for(&ctx.settings)?;
    let result = blur(&ctx, baselines.as_ref(), &mut notes);
    ctx.manifest("blur", &notes)?;
    write_records(&ctx.settings, "blur", &result?)?;
    Ok(())
}

pub fn cmd_suite(settings: Settings) -> Result<()> {
    let ctx = Ctx::new(settings)?;
    let s = &ctx.settings;
    let mut notes = Notes::default();
    let mut records = Vec::new();

    let baselines = if !s.skips(Suite::Stream) {
        let st = stream(&ctx, &mut notes)?;
        write_records(s, "stream", &st)?;
        records.extend(st.iter().cloned());
        s.utilization.then(|| Baselines::new(st, "this run"))
    } else {
        baselines_for(s)?
    };
    let result = (|| -> Result<()> {
        if !s.skips(Suite::Transpose) {
            let tr = transpose(&ctx, baselines.as_ref(), &mut notes)?;
            write_records(s, "transpose", &tr)?;
            records.extend(tr);
        }
        if !s.skips(Suite::Blur) {
            let bl = blur(&ctx, baselines.as_ref(), &mut notes)?;
            write_records(s, "blur", &bl)?;
            records.extend(bl);
        }
        Ok(())
    })();
    ctx.manifest("suite", &notes)?;
    result?;
    write_records(s, "suite", &records)?;
    for name in charts(&records, &s.out)? {
        println!("chart: {}", s.out.join(name).display());
    }
    Ok(())
}

pub fn cmd_chart(settings: Settings) -> Result<()> {
    let inputs = if settings.inputs.is_empty() {
        let found: Vec<_> = ["suite", "stream", "transpose", "blur"]
            .iter()
            .filter_map(|stem| {
                ["csv", "json"]
                    .iter()
                    .map(|e| settings.out.join(format!("{stem}.{e}")))
                    .find(|p| p.is_file())
            })
            .collect();
        // suite already contains the others
        match found.first() {
            Some(p) if p.file_stem().is_some_and(|s| s == "suite") => vec![p.clone()],
            _ => found,
        }
    } else {
        settings.inputs.clone()
    };
    if inputs.is_empty() {
        bail!("no result files found in {}; pass --input FILE", settings.out.display());
    }
    let mut records = Vec::new();
    for p in &inputs {
        records.extend(read_records(p)?);
    }
    let written = charts(&records, &settings.out)?;
    if written.is_empty() {
        bail!("the input records contain nothing to chart");
    }
    for name in written {
        println!("chart: {}", settings.out.join(name).display());
    }
    Ok(())
}
