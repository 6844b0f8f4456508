//! Process-wide cache of the Moser constant `C4(p)`.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use plapsys_core::bounds::{moser_c4, C4Estimate, C4_GRID, C4_T_MAX};

fn cache() -> &'static Mutex<HashMap<u64, C4Estimate>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, C4Estimate>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `C4(p)`, computed once per distinct `p`.
pub fn c4_estimate(p: f64) -> C4Estimate {
    let key = p.to_bits();
    if let Some(e) = cache().lock().expect("c4 cache poisoned").get(&key) {
        return *e;
    }
    let e = moser_c4(p, C4_T_MAX, C4_GRID).unwrap_or(C4Estimate { p, argmax: f64::NAN, value: f64::NAN, interior: false });
    *cache().lock().expect("c4 cache poisoned").entry(key).or_insert(e)
}

pub fn c4(p: f64) -> f64 {
    c4_estimate(p).value
}
