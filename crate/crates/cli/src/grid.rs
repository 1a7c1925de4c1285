//! `start:step:end` ranges and comma lists of λ values.

pub fn parse_grid(spec: &str) -> Result<Vec<f64>, String> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Err("empty grid".into());
    }
    let num = |s: &str| -> Result<f64, String> {
        let v: f64 = s.trim().parse().map_err(|_| format!("not a number: {s:?}"))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("not finite: {s:?}"))
        }
    };
    let mut out = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let [start, step, end] = parts[..] else {
            return Err(format!("range must be start:step:end, got {spec:?}"));
        };
        let (start, step, end) = (num(start)?, num(step)?, num(end)?);
        if step <= 0.0 || end < start {
            return Err(format!("empty or non-increasing range {spec:?}"));
        }
        // index-based so 0:0.1:1 hits 1.0 exactly
        let count = ((end - start) / step + 1e-9).floor() as usize;
        if count > 1_000_000 {
            return Err(format!("range {spec:?} has more than a million values"));
        }
        let mut v: Vec<f64> = (0..=count).map(|k| start + k as f64 * step).collect();
        if let Some(last) = v.last_mut() {
            if (*last - end).abs() < 1e-9 {
                *last = end;
            }
        }
        v
    } else {
        spec.split(',').map(num).collect::<Result<Vec<f64>, String>>()?
    };
    if let Some(v) = out.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(format!("grid value {v} outside [0, 1]"));
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    Ok(out)
}
