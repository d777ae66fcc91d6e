//! Seeded Game of 24 puzzles, the exact checker and the brute-force solver.
//!
//! ```bash
//! cargo run -p hdflow --example game24 -- 7 5
//! ```

use hdflow::bench::{check_game24, game24_numbers, gen_game24, solve_game24};

fn main() {
    let mut args = std::env::args().skip(1);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(7);
    let n = args.next().and_then(|s| s.parse().ok()).unwrap_or(5);

    for item in gen_game24(seed, n) {
        let nums = game24_numbers(&item.reference).expect("generated references are valid");
        let expr = solve_game24(nums).expect("generated puzzles are solvable");
        println!("{:<14} {:?}  {}  ok={}", item.id, nums, expr, check_game24(nums, &expr));
    }

    for (nums, expr) in [([4, 7, 8, 8], "(7-8/8)*4"), ([4, 7, 8, 8], "4*7-8+8"), ([1, 1, 1, 1], "(1+1+1)*1")] {
        println!("{nums:?} {expr:<12} -> {}", check_game24(nums, expr));
    }
}
