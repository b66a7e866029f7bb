//! Formatting and parallel helpers shared by the subcommands.

use qslkit::bounds::ExtReal;
use qslkit::io::format_g7;
use qslkit::{Error, Result};

/// Human-readable extended value; stationary infinities are spelled out.
pub fn fmt_ext_human(x: &ExtReal) -> String {
    match x {
        ExtReal::Finite(v) => format_g7(*v),
        ExtReal::Infinite => "infinity (stationary)".to_string(),
    }
}

/// CSV form of an extended value.
pub fn fmt_ext_csv(x: &ExtReal) -> String {
    match x {
        ExtReal::Finite(v) => format_g7(*v),
        ExtReal::Infinite => "inf".to_string(),
    }
}

/// Parses `A:B:N` into an inclusive linearly spaced grid.
pub fn parse_range(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidArgument(format!(
            "range must look like A:B:N, got `{text}`"
        )));
    }
    let a: f64 = parts[0]
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("invalid range start `{}`", parts[0])))?;
    let b: f64 = parts[1]
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("invalid range end `{}`", parts[1])))?;
    let n: usize = parts[2]
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("invalid range count `{}`", parts[2])))?;
    if n == 0 {
        return Err(Error::InvalidArgument("range needs at least one point".into()));
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    if !(b > a) {
        return Err(Error::InvalidArgument(format!(
            "range end {b} must exceed start {a}"
        )));
    }
    Ok((0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect())
}

/// Thread cap: `QSLKIT_THREADS` when set, otherwise the machine's available
/// parallelism.
pub fn thread_cap() -> usize {
    std::env::var("QSLKIT_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

/// Order-preserving parallel map over grid points; the output order depends
/// only on the input order, never on scheduling.
pub fn parallel_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync,
{
    let threads = thread_cap().min(items.len()).max(1);
    if threads == 1 {
        return items.iter().map(&f).collect();
    }
    let mut out: Vec<Option<U>> = Vec::with_capacity(items.len());
    out.resize_with(items.len(), || None);
    let chunk = items.len().div_ceil(threads);
    let f = &f;
    std::thread::scope(|scope| {
        for (slice_in, slice_out) in items.chunks(chunk).zip(out.chunks_mut(chunk)) {
            scope.spawn(move || {
                for (x, o) in slice_in.iter().zip(slice_out.iter_mut()) {
                    *o = Some(f(x));
                }
            });
        }
    });
    out.into_iter().map(|o| o.expect("filled by worker")).collect()
}
