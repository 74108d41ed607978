//! Fixtures shared by the criterion benches.

use protori::GroupDescription;

/// Named group texts of increasing size.
pub const GROUPS: [(&str, &str); 4] = [
    ("dyadic", "rank 1\ndir v=(1) s=2^inf\n"),
    ("half_diag", "rank 2\ndir v=(1/2,1/2) s=1\n"),
    (
        "mixed2",
        "rank 2\ndir v=(1/2,1/3) s=5^inf\ndir v=(0,1) s=3^2\ndir v=(7/4,1) s=2^3*7^inf\n",
    ),
    (
        "mixed3",
        "rank 3\ndir v=(1,2,3) s=2^inf*3^inf\ndir v=(1/5,0,1/7) s=5^2\ndir v=(0,1/4,1) s=11^inf\n",
    ),
];

pub fn group(text: &str) -> GroupDescription {
    GroupDescription::parse(text).expect("fixture parses")
}
