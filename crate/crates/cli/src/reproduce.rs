//! Bundled worked examples with their expected values. Each scenario runs
//! the full computation and compares every value it is known for.

use num::{BigInt, BigUint, One};

use sievelab::total_sieve::{total_sieve_around, GrowthSeries, ScanLimits};
use sievelab::{
    matching_positions, EratosthenesWindow, KTuple, Pattern, SievingPrefix, TupleAnchor,
};

pub struct Check {
    pub label: &'static str,
    pub expected: String,
    pub actual: String,
}

impl Check {
    fn new(label: &'static str, expected: impl ToString, actual: impl ToString) -> Self {
        Self {
            label,
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }

    pub fn ok(&self) -> bool {
        self.expected == self.actual
    }
}

fn example_prefix() -> SievingPrefix {
    SievingPrefix::new(&[3, 3, 5, 5, 7, 7, 11, 11], &[1, 2, 4, 0, 5, 6, 7, 10]).unwrap()
}

fn interval(prefix: &SievingPrefix, depth: usize, z: i64) -> String {
    let pattern = Pattern::new(prefix.clone(), depth).unwrap();
    total_sieve_around(&pattern, &BigInt::from(z), ScanLimits::default())
        .unwrap()
        .to_string()
}

/// The eight-class example: four total sieves read off the chart, the final
/// expansion size, and the bit row over positions 1..38.
pub fn figure1() -> Vec<Check> {
    let prefix = example_prefix();
    let mut checks = vec![
        Check::new(
            "total sieve depth 3 around 23",
            "[22, 26]",
            interval(&prefix, 3, 23),
        ),
        Check::new(
            "total sieve depth 5 around 9",
            "[7, 17]",
            interval(&prefix, 5, 9),
        ),
        Check::new(
            "total sieve depth 5 around 12",
            "[7, 17]",
            interval(&prefix, 5, 12),
        ),
        Check::new(
            "total sieve depth 5 around 17",
            "[7, 17]",
            interval(&prefix, 5, 17),
        ),
        Check::new(
            "total sieve depth 7 around 21",
            "empty",
            interval(&prefix, 7, 21),
        ),
        Check::new(
            "total sieve depth 8 around 7",
            "[4, 35]",
            interval(&prefix, 8, 7),
        ),
    ];

    let series =
        GrowthSeries::compute(&prefix, &BigInt::from(7), 8, ScanLimits::default()).unwrap();
    checks.push(Check::new(
        "expansion around 7, final size",
        "32",
        series.rows.last().unwrap().size,
    ));
    let series9 =
        GrowthSeries::compute(&prefix, &BigInt::from(9), 5, ScanLimits::default()).unwrap();
    checks.push(Check::new(
        "expansion around 9, size at depth 5",
        "11",
        series9.rows.last().unwrap().size,
    ));

    let pattern = Pattern::full(prefix);
    let ones: Vec<i64> = (1..=38).filter(|&z| pattern.eval_i64(z) == 1).collect();
    checks.push(Check::new(
        "unsieved positions in 1..38 at depth 8",
        "[3, 36]",
        format!("{ones:?}"),
    ));
    checks
}

/// The anchored-triplet example: matches of (0,2,6), the reduction of its
/// progression sieve, the coordinate map, and the certifying window.
pub fn guiding_example() -> Vec<Check> {
    let triple = KTuple::new(vec![0, 2, 6]).unwrap();
    let erat3 = Pattern::eratosthenes(3);
    let mut checks = Vec::new();

    let in_period = matching_positions(&triple, &erat3, &BigInt::from(0), &BigInt::from(29));
    checks.push(Check::new(
        "matches of (0,2,6) over one period of depth 3",
        "[11, 17]",
        format!("{in_period:?}"),
    ));
    let wider = matching_positions(&triple, &erat3, &BigInt::from(0), &BigInt::from(61));
    checks.push(Check::new(
        "matches of (0,2,6) over 0..61",
        "[11, 17, 41, 47]",
        format!("{wider:?}"),
    ));

    let smallest = TupleAnchor::smallest(triple.clone()).unwrap();
    checks.push(Check::new("smallest anchor d", "4", smallest.d()));

    let anchor = TupleAnchor::choose(triple, None, Some(BigUint::from(17u32))).unwrap();
    let reduced = anchor.reduce(2);
    let classes: Vec<String> = reduced.classes.iter().map(|c| c.to_string()).collect();
    checks.push(Check::new(
        "reduced classes for two primes",
        "[3]_7 [2]_7 [0]_7 [3]_11 [0]_11 [5]_11",
        classes.join(" "),
    ));

    checks.push(Check::new("mu(1)", "17", anchor.mu(&BigInt::one())));
    checks.push(Check::new("mu(5)", "137", anchor.mu(&BigInt::from(5))));
    checks.push(Check::new(
        "mu inverse of 47",
        "2",
        anchor.mu_inverse(&BigInt::from(47)).unwrap(),
    ));

    let window = anchor.z_window(2, &BigInt::one()).unwrap();
    checks.push(Check::new(
        "coordinate window at depth 2",
        "[1, 5]",
        format!("[{}, {}]", window.0, window.1),
    ));
    let positions: Vec<String> = (1..=5)
        .map(|z| anchor.mu(&BigInt::from(z)).to_string())
        .collect();
    checks.push(Check::new(
        "positions of the depth-2 window",
        "17 47 77 107 137",
        positions.join(" "),
    ));

    let w5 = EratosthenesWindow::new(5);
    checks.push(Check::new(
        "certifying window for five primes",
        "[2, 168]",
        format!("[{}, {}]", w5.lo, w5.hi),
    ));
    checks
}
