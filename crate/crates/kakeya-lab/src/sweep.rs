//! Exact strip areas of parallelogram unions by plane sweep.
//!
//! The union boundary consists of lines `y = S x + C`. At a fixed `x` the
//! union length is a sum of gaps between vertically consecutive lines, so
//! it is linear in `x` between crossings and the strip area is piecewise
//! quadratic. The sweep keeps the vertical order of the lines incrementally
//! (a kinetic sorted list), updates the length coefficients locally at each
//! crossing, and accumulates the exact integral as rationals.
//!
//! All per-event arithmetic works on differences of coefficients relative
//! to a reference line. Differences stay small even when the absolute
//! values carry tiny offsets (a slope like `left + 2^-100` differs from its
//! neighbors by grid-scale amounts once the shared offset cancels), which
//! keeps the hot path in `i128`. When the differences genuinely need more
//! than [`MAX_DIFF_BITS`] bits of precision the code falls back to a
//! straightforward rational evaluation.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::dyadic::Dyadic;
use crate::kset::Parallelogram;

/// A diagonal band `t0 < y - slope*x < t0 + width`, used to restrict a
/// measured region to the neighborhood of one line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Band {
    pub slope: Dyadic,
    pub t0: Dyadic,
    pub width: Dyadic,
}

/// Difference precision the fast path supports, in bits.
pub const MAX_DIFF_BITS: u64 = 45;

/// Exact area of the union of parallelograms inside `x0 <= x <= x1`.
pub fn union_strip_area(paras: &[Parallelogram], x0: &Dyadic, x1: &Dyadic) -> BigRational {
    measure(paras, x0, x1, None)
}

/// Exact area of the union restricted to a band.
pub fn union_strip_band_area(
    paras: &[Parallelogram],
    x0: &Dyadic,
    x1: &Dyadic,
    band: &Band,
) -> BigRational {
    measure(paras, x0, x1, Some(band))
}

fn measure(paras: &[Parallelogram], x0: &Dyadic, x1: &Dyadic, band: Option<&Band>) -> BigRational {
    if paras.is_empty() || x0 >= x1 {
        return BigRational::zero();
    }
    let lines = collect_lines(paras, band);
    if lines.is_empty() {
        return BigRational::zero();
    }
    let has_band = band.is_some();
    match DiffLines::build(&lines, x0, x1) {
        Some(dl) => kinetic_area(&lines, dl, x0, x1, has_band),
        None => naive_area(&lines, x0, x1, has_band),
    }
}

/// One boundary line `y = s x + c` with its coverage deltas: `dcov` for the
/// union counter, `dband` for the band counter.
struct Line {
    s: Dyadic,
    c: Dyadic,
    dcov: i32,
    dband: i32,
}

fn collect_lines(paras: &[Parallelogram], band: Option<&Band>) -> Vec<Line> {
    let mut merged: BTreeMap<(Dyadic, Dyadic), (i32, i32)> = BTreeMap::new();
    let mut add = |s: Dyadic, c: Dyadic, dcov: i32, dband: i32| {
        let entry = merged.entry((s, c)).or_insert((0, 0));
        entry.0 += dcov;
        entry.1 += dband;
    };
    for p in paras {
        add(p.slope.clone(), p.base.left(), 1, 0);
        add(p.slope.clone(), p.base.right(), -1, 0);
    }
    if let Some(b) = band {
        add(b.slope.clone(), b.t0.clone(), 0, 1);
        add(b.slope.clone(), &b.t0 + &b.width, 0, -1);
    }
    merged
        .into_iter()
        .filter(|(_, (dcov, dband))| *dcov != 0 || *dband != 0)
        .map(|((s, c), (dcov, dband))| Line { s, c, dcov, dband })
        .collect()
}

/// Integer views of the lines relative to a reference, scaled by `2^ud`:
/// every pairwise difference of slopes or intercepts is exact in `i128`.
struct DiffLines {
    sd: Vec<i128>,
    cd: Vec<i128>,
    /// Vertical order at the left edge of the strip (ties broken by slope).
    order0: Vec<usize>,
    /// Strip edges as `(numer, exp)` with `x = numer / 2^exp`.
    x0n: i128,
    x0e: u64,
    x1n: i128,
    x1e: u64,
    ud: u64,
}

impl DiffLines {
    fn build(lines: &[Line], x0: &Dyadic, x1: &Dyadic) -> Option<DiffLines> {
        if x0.exp() > MAX_DIFF_BITS || x1.exp() > MAX_DIFF_BITS {
            return None;
        }
        let sref = lines[0].s.clone();
        let cref = lines[0].c.clone();
        let mut ud = x0.exp().max(x1.exp());
        let mut diffs = Vec::with_capacity(lines.len());
        for l in lines {
            let ds = &l.s - &sref;
            let dc = &l.c - &cref;
            ud = ud.max(ds.exp()).max(dc.exp());
            diffs.push((ds, dc));
        }
        if ud > MAX_DIFF_BITS {
            return None;
        }
        let to_scaled = |d: &Dyadic| -> Option<i128> {
            let shift = usize::try_from(ud - d.exp()).ok()?;
            let shifted: BigInt = d.numer() << shift;
            i128::try_from(&shifted)
                .ok()
                .filter(|v| v.abs() < (1i128 << 60))
        };
        let mut sd = Vec::with_capacity(lines.len());
        let mut cd = Vec::with_capacity(lines.len());
        for (ds, dc) in &diffs {
            sd.push(to_scaled(ds)?);
            cd.push(to_scaled(dc)?);
        }
        let mut order0: Vec<usize> = (0..lines.len()).collect();
        let values0: Vec<Dyadic> = lines.iter().map(|l| &l.c + &(&l.s * x0)).collect();
        order0.sort_by(|&a, &b| values0[a].cmp(&values0[b]).then(sd[a].cmp(&sd[b])));
        // Strip edges must stay narrow enough for the event-window filter.
        let to_i128 = |x: &Dyadic| {
            i128::try_from(x.numer())
                .ok()
                .filter(|v| v.abs() < (1i128 << 50))
        };
        Some(DiffLines {
            sd,
            cd,
            order0,
            x0n: to_i128(x0)?,
            x0e: x0.exp(),
            x1n: to_i128(x1)?,
            x1e: x1.exp(),
            ud,
        })
    }
}

/// A crossing of two lines at `x = p/q`, `q > 0`.
struct Event {
    p: i128,
    q: i128,
    a: u32,
    b: u32,
}

fn kinetic_area(
    lines: &[Line],
    dl: DiffLines,
    x0: &Dyadic,
    x1: &Dyadic,
    has_band: bool,
) -> BigRational {
    let DiffLines {
        sd,
        cd,
        order0,
        x0n,
        x0e,
        x1n,
        x1e,
        ud,
    } = dl;
    let n = lines.len();

    let mut events = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let dq = sd[i] - sd[j];
            if dq == 0 {
                continue;
            }
            let dp = cd[j] - cd[i];
            let (mut p, mut q) = if dq > 0 { (dp, dq) } else { (-dp, -dq) };
            // Keep only crossings strictly inside the strip.
            if p << x0e <= x0n * q || p << x1e >= x1n * q {
                continue;
            }
            let tz = if p == 0 {
                q.trailing_zeros()
            } else {
                p.trailing_zeros().min(q.trailing_zeros())
            };
            p >>= tz;
            q >>= tz;
            events.push(Event {
                p,
                q,
                a: i as u32,
                b: j as u32,
            });
        }
    }
    events.sort_by(|e1, e2| (e1.p * e2.q).cmp(&(e2.p * e1.q)));

    let mut order = order0;
    let mut pos = vec![0usize; n];
    for (i, &l) in order.iter().enumerate() {
        pos[l] = i;
    }
    // cov[i] and bandv[i] hold the counter values in the gap just above
    // line order[i]; the gap between order[i] and order[i+1] contributes to
    // the union length when cov[i] > 0 and (if a band is present)
    // bandv[i] > 0.
    let mut cov = vec![0i32; n];
    let mut bandv = vec![0i32; n];
    let recompute = |order: &[usize], cov: &mut [i32], bandv: &mut [i32], lo: usize, hi: usize| {
        let (mut c, mut b) = if lo == 0 {
            (0, 0)
        } else {
            (cov[lo - 1], bandv[lo - 1])
        };
        for i in lo..=hi {
            let l = &lines[order[i]];
            c += l.dcov;
            b += l.dband;
            cov[i] = c;
            bandv[i] = b;
        }
    };
    recompute(&order, &mut cov, &mut bandv, 0, n - 1);

    // Union length at the sweep position is (ad + bd*x) / 2^ud.
    let counted = |cov: &[i32], bandv: &[i32], g: usize| cov[g] > 0 && (!has_band || bandv[g] > 0);
    let mut ad: i128 = 0;
    let mut bd: i128 = 0;
    for g in 0..n.saturating_sub(1) {
        if counted(&cov, &bandv, g) {
            ad += cd[order[g + 1]] - cd[order[g]];
            bd += sd[order[g + 1]] - sd[order[g]];
        }
    }
    let ad0 = ad;
    let bd0 = bd;

    // Per-denominator accumulators for the event corrections: the integral
    // picks up -(x_e * dA + x_e^2/2 * dB) at each event, collected as exact
    // integer sums keyed by the denominator of x_e.
    let mut lin: BTreeMap<i128, BigInt> = BTreeMap::new();
    let mut quad: BTreeMap<i128, BigInt> = BTreeMap::new();

    let mut e = 0usize;
    let mut involved: Vec<usize> = Vec::new();
    while e < events.len() {
        let mut f = e + 1;
        while f < events.len()
            && events[f].p * events[e].q == events[e].p * events[f].q
        {
            f += 1;
        }
        let (p, q) = (events[e].p, events[e].q);
        let ad_before = ad;
        let bd_before = bd;

        involved.clear();
        for ev in &events[e..f] {
            involved.push(pos[ev.a as usize]);
            involved.push(pos[ev.b as usize]);
        }
        involved.sort_unstable();
        involved.dedup();

        // Split the involved positions into maximal blocks that are
        // contiguous and share the same value at the event abscissa.
        let same_value = |u: usize, v: usize| {
            (sd[u] - sd[v]) * p + (cd[u] - cd[v]) * q == 0
        };
        let mut k = 0usize;
        while k < involved.len() {
            let lo = involved[k];
            let mut hi = lo;
            let mut m = k + 1;
            while m < involved.len()
                && involved[m] == hi + 1
                && same_value(order[involved[m]], order[hi])
            {
                hi = involved[m];
                m += 1;
            }
            k = m;
            if hi == lo {
                continue;
            }
            let glo = lo.saturating_sub(1);
            let ghi = hi.min(n - 2);
            for g in glo..=ghi {
                if counted(&cov, &bandv, g) {
                    ad -= cd[order[g + 1]] - cd[order[g]];
                    bd -= sd[order[g + 1]] - sd[order[g]];
                }
            }
            // After the crossing the steeper line lies above.
            order[lo..=hi].sort_by_key(|&l| sd[l]);
            for (i, &l) in order[lo..=hi].iter().enumerate() {
                pos[l] = lo + i;
            }
            recompute(&order, &mut cov, &mut bandv, lo, hi);
            for g in glo..=ghi {
                if counted(&cov, &bandv, g) {
                    ad += cd[order[g + 1]] - cd[order[g]];
                    bd += sd[order[g + 1]] - sd[order[g]];
                }
            }
        }

        let da = ad - ad_before;
        let db = bd - bd_before;
        // The union length is continuous across the event.
        assert_eq!(da * q + db * p, 0, "discontinuous length at a crossing");
        if da != 0 {
            *lin.entry(q).or_default() += BigInt::from(p) * BigInt::from(da);
        }
        if db != 0 {
            let pp = p.checked_mul(p).expect("event abscissa out of range");
            *quad.entry(q).or_default() += BigInt::from(pp) * BigInt::from(db);
        }
        e = f;
    }

    // Total = [A x + B x^2 / 2] taken at x1 with the final coefficients,
    // minus the same at x0 with the initial ones, minus the per-event
    // corrections; everything still scaled by 2^ud.
    let endpoint = |a: i128, b: i128, x: &BigRational| {
        let xr = x.clone();
        BigRational::from_integer(BigInt::from(a)) * &xr
            + BigRational::from_integer(BigInt::from(b)) * &xr * &xr
                / BigRational::from_integer(BigInt::from(2))
    };
    let x0r = x0.to_rational();
    let x1r = x1.to_rational();
    let mut total = endpoint(ad, bd, &x1r) - endpoint(ad0, bd0, &x0r);
    for (q, sum) in lin {
        total -= BigRational::new(sum, BigInt::from(q));
    }
    for (q, sum) in quad {
        total -= BigRational::new(sum, BigInt::from(q) * BigInt::from(q) * BigInt::from(2));
    }
    total / BigRational::from_integer(BigInt::from(1) << usize::try_from(ud).expect("scale fits"))
}

/// Rational fallback: cut the strip at every crossing and integrate each
/// piece from the union length at its midpoint (the length is linear on a
/// piece, so the midpoint value is the exact average).
fn naive_area(lines: &[Line], x0: &Dyadic, x1: &Dyadic, has_band: bool) -> BigRational {
    let s: Vec<BigRational> = lines.iter().map(|l| l.s.to_rational()).collect();
    let c: Vec<BigRational> = lines.iter().map(|l| l.c.to_rational()).collect();
    let lo = x0.to_rational();
    let hi = x1.to_rational();
    let mut cuts: Vec<BigRational> = vec![lo.clone(), hi.clone()];
    for i in 0..lines.len() {
        for j in (i + 1)..lines.len() {
            if s[i] != s[j] {
                let x = (&c[j] - &c[i]) / (&s[i] - &s[j]);
                if x > lo && x < hi {
                    cuts.push(x);
                }
            }
        }
    }
    cuts.sort();
    cuts.dedup();
    let two = BigRational::from_integer(BigInt::from(2));
    let mut total = BigRational::zero();
    for w in cuts.windows(2) {
        let mid = (&w[0] + &w[1]) / &two;
        let len = union_length_at(lines, &s, &c, &mid, has_band);
        total += len * (&w[1] - &w[0]);
    }
    total
}

fn union_length_at(
    lines: &[Line],
    s: &[BigRational],
    c: &[BigRational],
    x: &BigRational,
    has_band: bool,
) -> BigRational {
    let mut marks: Vec<(BigRational, i32, i32)> = lines
        .iter()
        .enumerate()
        .map(|(i, l)| (&c[i] + &(&s[i] * x), l.dcov, l.dband))
        .collect();
    marks.sort_by(|a, b| a.0.cmp(&b.0));
    let mut total = BigRational::zero();
    let mut covc = 0i32;
    let mut bandc = 0i32;
    for w in marks.windows(2) {
        covc += w[0].1;
        bandc += w[0].2;
        if covc > 0 && (!has_band || bandc > 0) {
            total += &w[1].0 - &w[0].0;
        }
    }
    total
}
