fn clamp(x: i32, lo: i32, hi: i32) -> i32 {
    // keep x within bounds
    if x < lo {
        return lo;
    }
    if x > hi {
        return hi;
    }
    x
}
